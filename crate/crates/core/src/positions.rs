//! Single-antenna position updates with everything else held fixed.
//!
//! With a rank-one `V = v vᴴ`, the received power of link `k` splits around
//! antenna `n` as `Tr(H_k V) = α + fᴴΨf + 2 Re(fᴴΩ)` where `f = f_k(t_n)` is
//! the field response of that antenna. The quadratic part is bounded from
//! below (Bob) by its tangent and from above (Eve, Willie) through
//! `Ψ ⪯ λ_max(Ψ) I`; the remaining sinusoid `2 Re(fᴴ c)` is then sandwiched
//! by quadratics in `t_n` with curvature `(16π²/λ²) Σ|c_l|`. The resulting
//! concave/convex models give a convex program in `(t_n, β₁, β₂)` whose
//! solution never decreases the true secrecy ratio.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{channels, field_response_vector, AntennaLayout, ChannelRealization, PathAngle, Position2D};
use crate::config::{Link, LinkMap, ScenarioConfig};
use crate::convex::{strictly_feasible_point, BarrierOptions, ConvexProgram, QuadConstraint};
use crate::covertness::CovertBudget;
use crate::error::{Error, Result};
use crate::numerics::{inner, norm_sqr, HermitianMat, C64};

/// Splitting of `Tr(H_k v vᴴ)` around antenna `n`.
#[derive(Clone, Debug)]
pub struct TraceDecomposition {
    /// `gᴴΦg` with `g = Σ_{j≠n} f(t_j) v_j`.
    pub alpha: f64,
    /// `Φ g conj(v_n)`.
    pub omega: Vec<C64>,
    /// `|v_n|² Φ`.
    pub psi: HermitianMat,
    /// `w wᴴ` with `w_l = conj(σ_l)`, so that `hᴴv = wᴴ F v`.
    pub phi: HermitianMat,
    /// `|v_n|² ‖w‖²`, the only nonzero eigenvalue of `Ψ`.
    pub lambda_max: f64,
}

impl TraceDecomposition {
    /// `fᴴΨf`.
    pub fn beta(&self, f: &[C64]) -> f64 {
        self.psi.quad_form(f)
    }

    /// `α + fᴴΨf + 2 Re(fᴴΩ)`.
    pub fn reconstruct(&self, f: &[C64]) -> f64 {
        self.alpha + self.beta(f) + 2.0 * inner(f, &self.omega).re
    }
}

pub fn trace_decompose(
    layout: &AntennaLayout,
    beamformer: &[C64],
    n: usize,
    link: Link,
    realization: &ChannelRealization,
) -> TraceDecomposition {
    let l = realization.paths(link);
    let w: Vec<C64> = realization.gains[link].iter().map(|s| s.conj()).collect();
    let mut g = vec![C64::new(0.0, 0.0); l];
    for (j, &t) in layout.positions.iter().enumerate() {
        if j == n {
            continue;
        }
        for (gi, fi) in g.iter_mut().zip(field_response_vector(t, link, realization)) {
            *gi += fi * beamformer[j];
        }
    }
    let phi = HermitianMat::outer(&w);
    let vn = beamformer[n];
    // Φ g = w (wᴴ g)
    let wg = inner(&w, &g);
    let omega = w.iter().map(|wi| wi * wg * vn.conj()).collect();
    TraceDecomposition {
        alpha: wg.norm_sqr(),
        omega,
        psi: phi.scale(vn.norm_sqr()),
        lambda_max: vn.norm_sqr() * norm_sqr(&w),
        phi,
    }
}

/// `2 Re(fᴴ c) = 2 Σ_l |c_l| cos χ_l` with `χ_l = (2π/λ) ρ_l(t) − ∠c_l`.
pub fn beta_bar(t: Position2D, coeff: &[C64], angles: &[PathAngle], wavelength: f64) -> f64 {
    let k = 2.0 * PI / wavelength;
    coeff
        .iter()
        .zip(angles)
        .map(|(c, a)| 2.0 * c.norm() * (k * phase_distance(t, a) - c.arg()).cos())
        .sum()
}

pub fn grad_beta_bar(t: Position2D, coeff: &[C64], angles: &[PathAngle], wavelength: f64) -> [f64; 2] {
    let k = 2.0 * PI / wavelength;
    let mut g = [0.0; 2];
    for (c, a) in coeff.iter().zip(angles) {
        let s = -2.0 * k * c.norm() * (k * phase_distance(t, a) - c.arg()).sin();
        let d = a.direction();
        g[0] += s * d[0];
        g[1] += s * d[1];
    }
    g
}

fn phase_distance(t: Position2D, a: &PathAngle) -> f64 {
    let d = a.direction();
    t.x * d[0] + t.y * d[1]
}

/// Bound on the Hessian norm of `2 Re(fᴴ c)`: `(16π²/λ²) Σ|c_l|`.
pub fn curvature_bound(coeff: &[C64], wavelength: f64) -> f64 {
    16.0 * PI * PI / (wavelength * wavelength) * coeff.iter().map(|c| c.norm()).sum::<f64>()
}

/// Coefficients of both surrogate families of one link at an anchor.
#[derive(Clone, Debug)]
pub struct SurrogateSet {
    pub anchor: Position2D,
    /// `f(t_anchor)`.
    pub f_anchor: Vec<C64>,
    /// `Ψ f_anchor + Ω`.
    pub upsilon: Vec<C64>,
    /// `Ω − (Θ − Ψ) f_anchor` with `Θ = λ_max I`.
    pub pi: Vec<C64>,
    pub kappa: f64,
    pub kappa_tilde: f64,
    pub lambda_max: f64,
    /// `2 λ_max L − f_anchorᴴ Ψ f_anchor`.
    pub c: f64,
}

impl SurrogateSet {
    pub fn new(dec: &TraceDecomposition, anchor: Position2D, link: Link, realization: &ChannelRealization) -> Self {
        let f = field_response_vector(anchor, link, realization);
        let psi_f = dec.psi.as_mat().matvec(&f);
        let upsilon: Vec<C64> = psi_f.iter().zip(&dec.omega).map(|(a, b)| a + b).collect();
        let pi: Vec<C64> = psi_f
            .iter()
            .zip(&dec.omega)
            .zip(&f)
            .map(|((pf, o), fi)| o + pf - fi * dec.lambda_max)
            .collect();
        let l = f.len() as f64;
        Self {
            kappa: curvature_bound(&upsilon, realization.wavelength),
            kappa_tilde: curvature_bound(&pi, realization.wavelength),
            lambda_max: dec.lambda_max,
            c: 2.0 * dec.lambda_max * l - dec.beta(&f),
            anchor,
            f_anchor: f,
            upsilon,
            pi,
        }
    }

    /// Concave quadratic model that never exceeds the true trace.
    pub fn lower_model(&self, dec: &TraceDecomposition, angles: &[PathAngle], wavelength: f64) -> QuadraticModel {
        QuadraticModel {
            anchor: self.anchor,
            value: beta_bar(self.anchor, &self.upsilon, angles, wavelength) + dec.alpha - dec.beta(&self.f_anchor),
            gradient: grad_beta_bar(self.anchor, &self.upsilon, angles, wavelength),
            curvature: -self.kappa,
        }
    }

    /// Convex quadratic model that never falls below the true trace.
    pub fn upper_model(&self, dec: &TraceDecomposition, angles: &[PathAngle], wavelength: f64) -> QuadraticModel {
        QuadraticModel {
            anchor: self.anchor,
            value: beta_bar(self.anchor, &self.pi, angles, wavelength) + dec.alpha + self.c,
            gradient: grad_beta_bar(self.anchor, &self.pi, angles, wavelength),
            curvature: self.kappa_tilde,
        }
    }
}

/// `value + gradient·(t − anchor) + ½ curvature ‖t − anchor‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticModel {
    pub anchor: Position2D,
    pub value: f64,
    pub gradient: [f64; 2],
    pub curvature: f64,
}

impl QuadraticModel {
    pub fn eval(&self, t: Position2D) -> f64 {
        let dx = t.x - self.anchor.x;
        let dy = t.y - self.anchor.y;
        self.value + self.gradient[0] * dx + self.gradient[1] * dy + 0.5 * self.curvature * (dx * dx + dy * dy)
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            anchor: self.anchor,
            value: self.value * s,
            gradient: [self.gradient[0] * s, self.gradient[1] * s],
            curvature: self.curvature * s,
        }
    }

    /// `sign · model` over the displacement variables `(0, 1)`, as the
    /// pieces of a [`QuadConstraint`].
    fn terms(&self, sign: f64) -> (Vec<(usize, usize, f64)>, Vec<(usize, f64)>, f64) {
        let c = sign * self.curvature;
        let quad = if c != 0.0 { vec![(0, 0, c), (1, 1, c)] } else { Vec::new() };
        (
            quad,
            vec![(0, sign * self.gradient[0]), (1, sign * self.gradient[1])],
            sign * self.value,
        )
    }
}

pub fn lower_bound_trace(
    t: Position2D,
    dec: &TraceDecomposition,
    sur: &SurrogateSet,
    angles: &[PathAngle],
    wavelength: f64,
) -> f64 {
    sur.lower_model(dec, angles, wavelength).eval(t)
}

pub fn upper_bound_trace(
    t: Position2D,
    dec: &TraceDecomposition,
    sur: &SurrogateSet,
    angles: &[PathAngle],
    wavelength: f64,
) -> f64 {
    sur.upper_model(dec, angles, wavelength).eval(t)
}

/// Half-plane `normal · t ≥ offset` inside `{‖t − t_v‖ ≥ D}`, tangent to it
/// along the ray from `t_v` through the anchor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceCut {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl DistanceCut {
    /// `normal · t − offset`; nonnegative when satisfied.
    pub fn slack(&self, t: Position2D) -> f64 {
        self.normal[0] * t.x + self.normal[1] * t.y - self.offset
    }
}

pub fn min_distance_linearization(other: Position2D, anchor: Position2D, min_spacing: f64) -> Result<DistanceCut> {
    let dx = anchor.x - other.x;
    let dy = anchor.y - other.y;
    let d = dx.hypot(dy);
    if !(d > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "anchor ({}, {}) coincides with another antenna",
            anchor.x, anchor.y
        )));
    }
    let normal = [dx / d, dy / d];
    Ok(DistanceCut {
        normal,
        offset: min_spacing + normal[0] * other.x + normal[1] * other.y,
    })
}

/// `(σ² + |h_bᴴv|²) / (σ² + |h_eᴴv|²)`.
pub fn secrecy_ratio(layout: &AntennaLayout, beamformer: &[C64], realization: &ChannelRealization, noise_power: f64) -> f64 {
    let ch = channels(layout, realization);
    (noise_power + ch[Link::Bob].gain(beamformer)) / (noise_power + ch[Link::Eve].gain(beamformer))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionStep {
    pub position: Position2D,
    pub beta1: f64,
    /// Watts.
    pub beta2: f64,
    pub objective_before: f64,
    pub objective_after: f64,
    pub moved: bool,
}

/// One MM step for antenna `n`: builds all surrogates at its current
/// position and solves the convex model problem.
pub fn solve_position_subproblem(
    n: usize,
    layout: &AntennaLayout,
    beamformer: &[C64],
    realization: &ChannelRealization,
    config: &ScenarioConfig,
    budget: &CovertBudget,
) -> Result<PositionStep> {
    let sigma2 = config.noise_power;
    let anchor = layout.positions[n];
    let decs = LinkMap::from_fn(|link| trace_decompose(layout, beamformer, n, link, realization));
    let traces = LinkMap::from_fn(|link| {
        let f = field_response_vector(anchor, link, realization);
        decs[link].reconstruct(&f) / sigma2
    });
    let beta2_m = 1.0 + traces[Link::Eve];
    let beta1_m = (1.0 + traces[Link::Bob]) / beta2_m;
    let stay = PositionStep {
        position: anchor,
        beta1: beta1_m,
        beta2: beta2_m * sigma2,
        objective_before: beta1_m,
        objective_after: beta1_m,
        moved: false,
    };
    if beamformer[n].norm_sqr() == 0.0 {
        return Ok(stay);
    }

    let model = |link: Link, upper: bool| {
        let sur = SurrogateSet::new(&decs[link], anchor, link, realization);
        let angles = &realization.angles[link];
        let m = if upper {
            sur.upper_model(&decs[link], angles, realization.wavelength)
        } else {
            sur.lower_model(&decs[link], angles, realization.wavelength)
        };
        m.scaled(1.0 / sigma2)
    };
    let bob = model(Link::Bob, false);
    let eve = model(Link::Eve, true);
    let willie = model(Link::Willie, true);

    // variables: displacement (dx, dy), β₁, β̂₂
    let mut program = ConvexProgram::new(4, vec![0.0, 0.0, -1.0, 0.0]);
    let half = 0.5 * config.region_side;
    for (i, p) in [anchor.x, anchor.y].into_iter().enumerate() {
        program.constraints.push(QuadConstraint::linear(vec![(i, 1.0)], p - half));
        program.constraints.push(QuadConstraint::linear(vec![(i, -1.0)], -p - half));
    }
    for (j, &other) in layout.positions.iter().enumerate() {
        if j == n {
            continue;
        }
        let cut = min_distance_linearization(other, anchor, config.min_spacing)?;
        // offset − normal·(anchor + d) ≤ 0
        program.constraints.push(QuadConstraint::linear(
            vec![(0, -cut.normal[0]), (1, -cut.normal[1])],
            -cut.slack(anchor),
        ));
    }
    let cap = budget.normalized_cap();
    let (quad, lin, constant) = willie.terms(1.0);
    program.constraints.push(QuadConstraint {
        quad,
        lin,
        constant: constant - cap,
    });
    let (quad, mut lin, constant) = eve.terms(1.0);
    lin.push((3, -1.0));
    program.constraints.push(QuadConstraint {
        quad,
        lin,
        constant: constant + 1.0,
    });
    // ¼(β₁+β₂)² − ½dβ₁ + ½dβ₂ + ¼d² − 1 − bob(t) ≤ 0
    let d = beta1_m - beta2_m;
    let (mut quad, mut lin, constant) = bob.terms(-1.0);
    quad.extend([(2, 2, 0.5), (2, 3, 0.5), (3, 2, 0.5), (3, 3, 0.5)]);
    lin.push((2, -0.5 * d));
    lin.push((3, 0.5 * d));
    program.constraints.push(QuadConstraint {
        quad,
        lin,
        constant: constant + 0.25 * d * d - 1.0,
    });

    let x0 = [0.0, 0.0, beta1_m, beta2_m];
    let Some(start) = strictly_feasible_point(&program, &x0)? else {
        return Ok(stay);
    };
    let opts = BarrierOptions {
        gap_tol: 1e-10 * (1.0 + beta1_m.abs()),
        ..BarrierOptions::default()
    };
    let out = program.minimize(&start, &opts).map_err(|e| e.context("position subproblem"))?;
    let candidate = Position2D::new(anchor.x + out.x[0], anchor.y + out.x[1]);

    let Some(mut best) = evaluate_move(n, candidate, layout, beamformer, realization, config, cap)
        .filter(|e| e.objective >= beta1_m)
    else {
        return Ok(stay);
    };
    let mut beta = (out.x[2], out.x[3] * sigma2);
    // stretch the surrogate step while the exact objective keeps improving
    let step = [out.x[0], out.x[1]];
    let mut gamma = 2.0;
    while gamma <= MAX_STRETCH {
        let t = Position2D::new(anchor.x + gamma * step[0], anchor.y + gamma * step[1]);
        match evaluate_move(n, t, layout, beamformer, realization, config, cap) {
            Some(e) if e.objective > best.objective => {
                beta = (e.objective, (1.0 + e.eve) * sigma2);
                best = e;
            }
            _ => break,
        }
        gamma *= 2.0;
    }
    Ok(PositionStep {
        position: best.position,
        beta1: beta.0,
        beta2: beta.1,
        objective_before: beta1_m,
        objective_after: best.objective,
        moved: true,
    })
}

/// Largest multiple of the surrogate step tried by the stretch search.
const MAX_STRETCH: f64 = 64.0;

struct Evaluated {
    position: Position2D,
    objective: f64,
    eve: f64,
}

/// Exact objective at `t` if moving antenna `n` there keeps the layout, the
/// region and the covert cap satisfied.
fn evaluate_move(
    n: usize,
    t: Position2D,
    layout: &AntennaLayout,
    beamformer: &[C64],
    realization: &ChannelRealization,
    config: &ScenarioConfig,
    cap: f64,
) -> Option<Evaluated> {
    let sigma2 = config.noise_power;
    let mut moved = layout.clone();
    moved.positions[n] = t;
    moved.check(config.region_side, config.min_spacing, 1e-12).ok()?;
    let ch = channels(&moved, realization);
    let t_w = ch[Link::Willie].gain(beamformer) / sigma2;
    if t_w > cap * (1.0 + 1e-12) + 1e-14 {
        return None;
    }
    let t_b = ch[Link::Bob].gain(beamformer) / sigma2;
    let t_e = ch[Link::Eve].gain(beamformer) / sigma2;
    Some(Evaluated {
        position: t,
        objective: (1.0 + t_b) / (1.0 + t_e),
        eve: t_e,
    })
}
