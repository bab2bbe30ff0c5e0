//! Real Lambert W on the principal (`W₀`) and lower (`W₋₁`) branches.
//!
//! Halley iteration on `w e^w − z` from a branch-appropriate start: the
//! branch-point series near `−1/e`, a log expansion for large `|ln|z||`, and
//! `ln(1+z)` elsewhere on the principal branch.

use std::f64::consts::E;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Principal,
    MinusOne,
}

const BRANCH_POINT: f64 = -1.0 / E;
const STEP_TOL: f64 = 1e-14;
const MAX_ITER: usize = 64;

pub fn lambert_w(branch: Branch, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("Lambert W of non-finite argument {z}")));
    }
    // distance to the branch point, tolerant of the rounding in -1/e itself
    let q = E * z + 1.0;
    if q < -4.0 * f64::EPSILON {
        return Err(Error::Domain(format!(
            "Lambert W undefined for z = {z} < -1/e"
        )));
    }
    if branch == Branch::MinusOne && z >= 0.0 {
        return Err(Error::Domain(format!(
            "W_-1 requires -1/e <= z < 0, got {z}"
        )));
    }
    if q <= 4.0 * f64::EPSILON {
        return Ok(-1.0);
    }
    if z == 0.0 {
        return Ok(0.0);
    }

    let mut w = initial_guess(branch, z, q);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = w - step;
        // stay on the requested branch
        let next = match branch {
            Branch::Principal if next < -1.0 => 0.5 * (w - 1.0),
            Branch::MinusOne if next > -1.0 => 0.5 * (w - 1.0),
            _ => next,
        };
        let moved = (next - w).abs();
        w = next;
        if moved <= STEP_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(branch: Branch, z: f64, q: f64) -> f64 {
    let p = (2.0 * q).sqrt();
    let series = |p: f64| {
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p.powi(3) - 43.0 / 540.0 * p.powi(4)
            + 769.0 / 17280.0 * p.powi(5)
    };
    match branch {
        Branch::Principal => {
            if z < -0.25 {
                series(p)
            } else if z < 3.0 {
                z.ln_1p()
            } else {
                let l1 = z.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            }
        }
        Branch::MinusOne => {
            if z < -0.25 {
                series(-p)
            } else {
                let l1 = (-z).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    }
}

pub fn branch_point() -> f64 {
    BRANCH_POINT
}
