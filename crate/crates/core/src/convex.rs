//! Log-barrier interior-point method for small convex programs.
//!
//! Programs have a linear objective (minimized), any number of convex
//! quadratic inequality constraints `½xᵀQx + qᵀx + r ≤ 0`, and optionally one
//! Hermitian positive-semidefinite block spanned by the leading coordinates.
//! Dimensions in this crate are tiny (≤ 66 variables), so every Newton system
//! is formed densely and factored by Cholesky.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMat, HermitianMat, SymMat, C64, ZERO};

/// `½xᵀQx + qᵀx + r ≤ 0` with `Q ⪰ 0`.
#[derive(Clone, Debug)]
pub struct QuadConstraint {
    /// Symmetric `Q` entries; both `(i, j)` and `(j, i)` must be listed.
    pub quad: Vec<(usize, usize, f64)>,
    pub lin: Vec<(usize, f64)>,
    pub constant: f64,
}

impl QuadConstraint {
    pub fn linear(lin: Vec<(usize, f64)>, constant: f64) -> Self {
        Self {
            quad: Vec::new(),
            lin,
            constant,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for &(i, c) in &self.lin {
            v += c * x[i];
        }
        for &(i, j, q) in &self.quad {
            v += 0.5 * q * x[i] * x[j];
        }
        v
    }

    fn gradient_into(&self, x: &[f64], g: &mut [f64]) {
        for &(i, c) in &self.lin {
            g[i] += c;
        }
        for &(i, j, q) in &self.quad {
            g[i] += q * x[j];
        }
    }
}

/// Coordinates `0..dim²` of the variable vector parameterize a Hermitian
/// `dim × dim` matrix in an orthonormal basis (under `Re Tr(AB)`); the
/// program then carries the barrier `−log det W`.
#[derive(Clone, Debug)]
pub struct PsdBlock {
    dim: usize,
    /// Nonzero entries `(row, col, value)` of each basis matrix.
    basis: Vec<Vec<(usize, usize, C64)>>,
}

impl PsdBlock {
    pub fn new(dim: usize) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut basis = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            basis.push(vec![(a, a, C64::new(1.0, 0.0))]);
        }
        for a in 0..dim {
            for b in (a + 1)..dim {
                basis.push(vec![(a, b, C64::new(r, 0.0)), (b, a, C64::new(r, 0.0))]);
                basis.push(vec![(a, b, C64::new(0.0, r)), (b, a, C64::new(0.0, -r))]);
            }
        }
        Self { dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> usize {
        self.basis.len()
    }

    pub fn to_matrix(&self, x: &[f64]) -> HermitianMat {
        let mut w = ComplexMat::zeros(self.dim, self.dim);
        for (e, &xi) in self.basis.iter().zip(x) {
            for &(p, q, c) in e {
                w[(p, q)] += c * xi;
            }
        }
        HermitianMat::symmetrized(&w)
    }

    pub fn from_matrix(&self, w: &HermitianMat) -> Vec<f64> {
        self.basis
            .iter()
            .map(|e| e.iter().map(|&(p, q, c)| (c.conj() * w[(p, q)]).re).sum())
            .collect()
    }

    /// Coefficients `a_i = Re Tr(A E_i)`, so that `Tr(A W) = Σ a_i x_i`.
    pub fn linear_functional(&self, a: &HermitianMat) -> Vec<f64> {
        self.basis
            .iter()
            .map(|e| e.iter().map(|&(p, q, c)| (c * a[(q, p)]).re).sum())
            .collect()
    }

    /// `−log det W` with gradient and Hessian, or `None` if `W` is not
    /// positive definite.
    fn barrier(&self, x: &[f64], grad: &mut [f64], hess: Option<&mut SymMat>) -> Option<f64> {
        let w = self.to_matrix(x);
        let (logdet, inv) = chol_logdet_inverse(&w)?;
        for (i, e) in self.basis.iter().enumerate() {
            let tr: C64 = e.iter().map(|&(p, q, c)| c * inv[(q, p)]).sum();
            grad[i] -= tr.re;
        }
        if let Some(h) = hess {
            for (i, ei) in self.basis.iter().enumerate() {
                for (j, ej) in self.basis.iter().enumerate().skip(i) {
                    let mut acc = ZERO;
                    for &(p, q, c) in ei {
                        for &(r, s, d) in ej {
                            acc += c * d * inv[(q, r)] * inv[(s, p)];
                        }
                    }
                    h.add(i, j, acc.re);
                    if i != j {
                        h.add(j, i, acc.re);
                    }
                }
            }
        }
        Some(-logdet)
    }
}

/// Cholesky-based `log det` and inverse of a Hermitian positive-definite
/// matrix.
fn chol_logdet_inverse(w: &HermitianMat) -> Option<(f64, ComplexMat)> {
    let n = w.dim();
    let dense = DMatrix::from_fn(n, n, |i, j| w[(i, j)]);
    let chol = dense.cholesky()?;
    let diag = chol.l_dirty().diagonal();
    // complex square roots never fail, so a negative pivot shows up as an
    // (almost) imaginary diagonal entry instead of an error
    if diag.iter().any(|d| !(d.re > 0.0) || d.im.abs() > 1e-8 * d.re) {
        return None;
    }
    let logdet: f64 = 2.0 * diag.iter().map(|d| d.re.ln()).sum::<f64>();
    if !logdet.is_finite() {
        return None;
    }
    let inv = chol.inverse();
    let data = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| inv[(i, j)]).collect();
    Some((logdet, ComplexMat::from_row_major(n, n, data).ok()?))
}

const INTERIOR_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ConvexProgram {
    pub dim: usize,
    /// Minimized.
    pub objective: Vec<f64>,
    pub constraints: Vec<QuadConstraint>,
    pub psd: Option<PsdBlock>,
}

#[derive(Clone, Debug)]
pub struct BarrierOptions {
    /// Barrier weight growth between centering steps.
    pub mu: f64,
    /// Stop once the duality-gap bound `ν/t` falls below this.
    pub gap_tol: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            mu: 20.0,
            gap_tol: 1e-10,
            max_newton: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BarrierOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Duality-gap bound `ν/t` at termination.
    pub gap: f64,
    pub newton_steps: usize,
}

impl ConvexProgram {
    pub fn new(dim: usize, objective: Vec<f64>) -> Self {
        assert_eq!(objective.len(), dim);
        Self {
            dim,
            objective,
            constraints: Vec::new(),
            psd: None,
        }
    }

    /// Barrier parameter `ν` (number of scalar constraints plus PSD order).
    pub fn nu(&self) -> f64 {
        (self.constraints.len() + self.psd.as_ref().map_or(0, PsdBlock::dim)) as f64
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    pub fn is_strictly_feasible(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.value(x) < 0.0)
            && self
                .psd
                .as_ref()
                .map_or(true, |p| chol_logdet_inverse(&p.to_matrix(x)).is_some())
    }

    /// Strict feasibility with every slack above `1e-9 (1 + |r_i|)`, so that
    /// the barrier is not started on a point whose slack is rounding noise.
    pub fn is_comfortably_feasible(&self, x: &[f64]) -> bool {
        self.constraints
            .iter()
            .all(|c| c.value(x) < -INTERIOR_MARGIN * (1.0 + c.constant.abs()))
            && self.is_strictly_feasible(x)
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn barrier(&self, x: &[f64], grad: &mut [f64], mut hess: Option<&mut SymMat>) -> Option<f64> {
        let mut value = 0.0;
        let mut g = vec![0.0; self.dim];
        for c in &self.constraints {
            let s = -c.value(x);
            if !(s > 0.0) {
                return None;
            }
            value -= s.ln();
            g.iter_mut().for_each(|v| *v = 0.0);
            c.gradient_into(x, &mut g);
            for (gi, v) in grad.iter_mut().zip(&g) {
                *gi += v / s;
            }
            if let Some(h) = hess.as_deref_mut() {
                h.add_outer(&g, 1.0 / (s * s));
                for &(i, j, q) in &c.quad {
                    h.add(i, j, q / s);
                }
            }
        }
        if let Some(p) = &self.psd {
            value += p.barrier(x, grad, hess)?;
        }
        Some(value)
    }

    fn merit(&self, t: f64, x: &[f64]) -> Option<f64> {
        let mut scratch = vec![0.0; self.dim];
        let b = self.barrier(x, &mut scratch, None)?;
        Some(t * self.objective_value(x) + b)
    }

    /// Minimizes the objective from a strictly feasible start.
    pub fn minimize(&self, x0: &[f64], opts: &BarrierOptions) -> Result<BarrierOutcome> {
        self.minimize_until(x0, opts, |_| false)
    }

    /// Like [`minimize`](Self::minimize) but returns early after any
    /// centering step whose iterate satisfies `stop`.
    pub fn minimize_until(
        &self,
        x0: &[f64],
        opts: &BarrierOptions,
        stop: impl Fn(&[f64]) -> bool,
    ) -> Result<BarrierOutcome> {
        if !self.is_strictly_feasible(x0) {
            return Err(Error::InternalLogic(
                "barrier method started from a point that is not strictly feasible".into(),
            ));
        }
        let nu = self.nu().max(1.0);
        let mut x = x0.to_vec();
        let mut t = nu / (1.0 + self.objective_value(&x).abs());
        let mut steps = 0usize;
        loop {
            steps += self.center(&mut x, t, opts.max_newton.saturating_sub(steps))?;
            let gap = nu / t;
            if gap <= opts.gap_tol || stop(&x) {
                return Ok(BarrierOutcome {
                    objective: self.objective_value(&x),
                    x,
                    gap,
                    newton_steps: steps,
                });
            }
            if steps >= opts.max_newton {
                return Err(Error::NonConvergence {
                    context: "barrier method".into(),
                    iterations: steps,
                    residual: gap,
                });
            }
            t *= opts.mu;
        }
    }

    /// Newton centering at barrier weight `t`; returns the step count.
    fn center(&self, x: &mut Vec<f64>, t: f64, budget: usize) -> Result<usize> {
        let n = self.dim;
        let mut steps = 0;
        let mut f = self
            .merit(t, x)
            .ok_or_else(|| Error::InternalLogic("iterate left the barrier domain".into()))?;
        while steps < budget.max(1) {
            steps += 1;
            let mut grad = self.objective.iter().map(|c| c * t).collect::<Vec<_>>();
            let mut hess = SymMat::zeros(n);
            self.barrier(x, &mut grad, Some(&mut hess))
                .ok_or_else(|| Error::InternalLogic("iterate left the barrier domain".into()))?;
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let dx = match hess.solve_spd(&neg) {
                Some(d) => d,
                None => break,
            };
            let slope: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            let decrement = -slope;
            if !(decrement > 1e-14) {
                break;
            }
            let mut s = 1.0;
            let mut accepted = false;
            let f_old = f;
            for _ in 0..80 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + s * d).collect();
                if let Some(ft) = self.merit(t, &trial) {
                    if ft <= f + 0.25 * s * slope {
                        *x = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            // the merit grows with t, so decrements below its rounding level are noise
            let tiny = decrement * 0.5 <= 1e-11f64.max(1e-13 * f_old.abs());
            // a collapsing step on an almost centered point is rounding in the barrier
            let rounding = s < 1e-4 && decrement * 0.5 <= 1e-6;
            if !accepted || tiny || rounding {
                break;
            }
        }
        Ok(steps)
    }
}

/// Finds a comfortably feasible point (see
/// [`ConvexProgram::is_comfortably_feasible`]) of a program without a PSD
/// block by minimizing the largest constraint value from `x0`. Returns `None`
/// when the feasible set is empty or thinner than the margin.
pub fn strictly_feasible_point(program: &ConvexProgram, x0: &[f64]) -> Result<Option<Vec<f64>>> {
    assert!(program.psd.is_none(), "phase one does not handle PSD blocks");
    if program.is_comfortably_feasible(x0) {
        return Ok(Some(x0.to_vec()));
    }
    let n = program.dim;
    let s_idx = n;
    let worst = program.max_violation(x0);
    let mut phase = ConvexProgram::new(n + 1, {
        let mut c = vec![0.0; n + 1];
        c[s_idx] = 1.0;
        c
    });
    for c in &program.constraints {
        let mut shifted = c.clone();
        shifted.lin.push((s_idx, -1.0));
        phase.constraints.push(shifted);
    }
    let floor = 1.0 + worst.abs();
    // s ≥ −floor keeps the phase-one problem bounded
    phase
        .constraints
        .push(QuadConstraint::linear(vec![(s_idx, -1.0)], -floor));
    let mut start = x0.to_vec();
    start.push(worst.max(0.0) + 1.0);
    let opts = BarrierOptions {
        gap_tol: 1e-12 * floor,
        ..BarrierOptions::default()
    };
    let out = phase.minimize_until(&start, &opts, |x| program.is_comfortably_feasible(&x[..n]))?;
    let x = out.x[..n].to_vec();
    Ok(program.is_comfortably_feasible(&x).then_some(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_domain_rejects_definite_negative_and_indefinite() {
        let block = PsdBlock::new(4);
        let mut scratch = vec![0.0; block.coords()];
        let neg = block.from_matrix(&HermitianMat::identity(4).scale(-1.0));
        assert!(block.barrier(&neg, &mut scratch, None).is_none());
        let mut w = ComplexMat::identity(3);
        w[(0, 1)] = C64::new(0.3, 2.0);
        w[(1, 0)] = C64::new(0.3, -2.0);
        let block = PsdBlock::new(3);
        let mut scratch = vec![0.0; block.coords()];
        let x = block.from_matrix(&HermitianMat::symmetrized(&w));
        assert!(block.barrier(&x, &mut scratch, None).is_none());
        let pd = block.from_matrix(&HermitianMat::identity(3).scale(2.0));
        let v = block.barrier(&pd, &mut scratch, None).unwrap();
        assert!((v + 3.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn linear_program_on_box() {
        // min x + y over [0,1]^2 ∩ {x + y ≥ 0.5}
        let mut p = ConvexProgram::new(2, vec![1.0, 1.0]);
        for i in 0..2 {
            p.constraints.push(QuadConstraint::linear(vec![(i, -1.0)], 0.0));
            p.constraints.push(QuadConstraint::linear(vec![(i, 1.0)], -1.0));
        }
        p.constraints
            .push(QuadConstraint::linear(vec![(0, -1.0), (1, -1.0)], 0.5));
        let out = p.minimize(&[0.6, 0.6], &BarrierOptions::default()).unwrap();
        assert!((out.objective - 0.5).abs() < 1e-8);
    }

    #[test]
    fn disk_constraint() {
        // min -x s.t. x² + y² ≤ 1
        let mut p = ConvexProgram::new(2, vec![-1.0, 0.0]);
        p.constraints.push(QuadConstraint {
            quad: vec![(0, 0, 2.0), (1, 1, 2.0)],
            lin: vec![],
            constant: -1.0,
        });
        let out = p.minimize(&[0.0, 0.0], &BarrierOptions::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-8, "{:?}", out.x);
    }

    #[test]
    fn psd_block_trace_minimization() {
        // min -Re Tr(A W) s.t. Tr W ≤ 1, W ⪰ 0 → λ_max(A)
        let block = PsdBlock::new(2);
        let a = HermitianMat::new(
            ComplexMat::from_row_major(
                2,
                2,
                vec![
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 1.0),
                    C64::new(0.0, -1.0),
                    C64::new(2.0, 0.0),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let obj: Vec<f64> = block.linear_functional(&a).iter().map(|v| -v).collect();
        let tr = block.linear_functional(&HermitianMat::identity(2));
        let mut p = ConvexProgram::new(4, obj);
        p.constraints.push(QuadConstraint::linear(
            tr.iter().copied().enumerate().collect(),
            -1.0,
        ));
        p.psd = Some(block.clone());
        let x0 = block.from_matrix(&HermitianMat::identity(2).scale(0.25));
        let out = p.minimize(&x0, &BarrierOptions::default()).unwrap();
        let lmax = 1.5 + (0.25f64 + 1.0).sqrt();
        assert!((-out.objective - lmax).abs() < 1e-8);
    }

    #[test]
    fn basis_round_trip() {
        let block = PsdBlock::new(3);
        let x: Vec<f64> = (0..9).map(|i| i as f64 * 0.3 - 1.0).collect();
        let back = block.from_matrix(&block.to_matrix(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn phase_one_finds_interior() {
        // x ≥ 1, x ≤ 2 from x0 = 5
        let mut p = ConvexProgram::new(1, vec![1.0]);
        p.constraints.push(QuadConstraint::linear(vec![(0, -1.0)], 1.0));
        p.constraints.push(QuadConstraint::linear(vec![(0, 1.0)], -2.0));
        let x = strictly_feasible_point(&p, &[5.0]).unwrap().unwrap();
        assert!(x[0] > 1.0 && x[0] < 2.0);
    }

    #[test]
    fn phase_one_reports_empty_interior() {
        // x ≥ 1 and x ≤ 1
        let mut p = ConvexProgram::new(1, vec![1.0]);
        p.constraints.push(QuadConstraint::linear(vec![(0, -1.0)], 1.0));
        p.constraints.push(QuadConstraint::linear(vec![(0, 1.0)], -1.0));
        assert!(strictly_feasible_point(&p, &[1.0]).unwrap().is_none());
    }
}
