//! Transmit-covariance design for a fixed antenna layout.
//!
//! The secrecy ratio `(σ² + Tr(H_b V)) / (σ² + Tr(H_e V))` is maximized
//! through two auxiliary variables `β₁, β₂` with `σ² + Tr(H_b V) ≥ β₁β₂` and
//! `β₂ ≥ σ² + Tr(H_e V)`. The bilinear term is replaced by a convex upper
//! bound that is tight at the previous iterate, and the rank-one requirement
//! by the penalty `η (Tr V − uᴴ V u)` with `u` the principal eigenvector of
//! the previous `V`. Each outer iteration solves the resulting convex program
//! with the barrier method in [`crate::convex`], then grows `η`.
//!
//! Internally all quantities are normalized: `V̂ = V / P_max`,
//! `Ĥ = H P_max / σ²`, `β̂₂ = β₂ / σ²`, so the power constraint reads
//! `Tr V̂ ≤ 1` and the covert cap `Tr(Ĥ_w V̂) ≤ a₂ − 1`.

use serde::{Deserialize, Serialize};

use crate::config::SolverSettings;
use crate::convex::{BarrierOptions, ConvexProgram, PsdBlock, QuadConstraint};
use crate::error::{Error, Result};
use crate::numerics::{eig_hermitian, principal_component, ComplexMat, HermitianMat, C64};

/// Normalized caps below this are treated as an exact null-steering
/// requirement.
const ZERO_CAP: f64 = 1e-12;

/// Convex upper bound of `β₁β₂` that touches it at `(β₁ᵐ, β₂ᵐ)`:
/// `¼(β₁+β₂)² − ¼(β₁ᵐ−β₂ᵐ)² − ½(β₁ᵐ−β₂ᵐ)(β₁−β₁ᵐ−β₂+β₂ᵐ)`.
pub fn beta_product_surrogate(beta1: f64, beta2: f64, beta1_m: f64, beta2_m: f64) -> f64 {
    let d = beta1_m - beta2_m;
    0.25 * (beta1 + beta2).powi(2) - 0.25 * d * d - 0.5 * d * (beta1 - beta1_m - beta2 + beta2_m)
}

/// `√λ_max(V) · u_max(V)`.
pub fn extract_rank_one(v: &HermitianMat) -> Result<Vec<C64>> {
    let (lmax, u) = principal_component(v)?;
    let s = lmax.max(0.0).sqrt();
    Ok(u.iter().map(|x| x * s).collect())
}

/// `‖V − v vᴴ‖_F` for the principal rank-one part `v`.
pub fn rank_one_residual(v: &HermitianMat) -> Result<f64> {
    let w = extract_rank_one(v)?;
    Ok(v.sub(&HermitianMat::outer(&w)).frobenius_norm())
}

#[derive(Clone, Debug)]
pub struct BeamformingProblem {
    pub h_bob: HermitianMat,
    pub h_eve: HermitianMat,
    pub h_willie: HermitianMat,
    pub noise_power: f64,
    pub pmax: f64,
    /// Covert cap on `Tr(H_w V)`, watts.
    pub cap: f64,
    /// Feasible warm start; the default matched-filter start is used when
    /// absent.
    pub initial: Option<HermitianMat>,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub penalty_ceiling: f64,
    pub tol: f64,
    pub rank_tol: f64,
    pub max_iters: usize,
}

impl BeamformingProblem {
    pub fn new(
        h_bob: HermitianMat,
        h_eve: HermitianMat,
        h_willie: HermitianMat,
        noise_power: f64,
        pmax: f64,
        cap: f64,
    ) -> Result<Self> {
        let n = h_bob.dim();
        if h_eve.dim() != n || h_willie.dim() != n {
            return Err(Error::InvalidInput("channel matrices differ in size".into()));
        }
        if !(noise_power > 0.0 && pmax > 0.0 && cap >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "need σ² > 0, P_max > 0, cap ≥ 0 (got {noise_power}, {pmax}, {cap})"
            )));
        }
        let s = SolverSettings::default();
        Ok(Self {
            h_bob,
            h_eve,
            h_willie,
            noise_power,
            pmax,
            cap,
            initial: None,
            penalty_init: s.penalty_init,
            penalty_growth: s.penalty_growth,
            penalty_ceiling: s.penalty_ceiling,
            tol: s.beam_tol,
            rank_tol: s.rank_tol,
            max_iters: s.max_beam_iters,
        })
    }

    pub fn with_settings(mut self, s: &SolverSettings) -> Self {
        self.penalty_init = s.penalty_init;
        self.penalty_growth = s.penalty_growth;
        self.penalty_ceiling = s.penalty_ceiling;
        self.tol = s.beam_tol;
        self.rank_tol = s.rank_tol;
        self.max_iters = s.max_beam_iters;
        self
    }

    pub fn with_initial(mut self, v: HermitianMat) -> Self {
        self.initial = Some(v);
        self
    }

    pub fn dim(&self) -> usize {
        self.h_bob.dim()
    }

    /// `(σ² + Tr(H_b V)) / (σ² + Tr(H_e V))`.
    pub fn secrecy_ratio(&self, v: &HermitianMat) -> f64 {
        (self.noise_power + self.h_bob.trace_product(v).max(0.0))
            / (self.noise_power + self.h_eve.trace_product(v).max(0.0))
    }

    /// Largest violation of `V ⪰ 0`, `Tr V ≤ P_max`, `Tr(H_w V) ≤ cap`,
    /// relative to `P_max` and `σ²` respectively.
    pub fn constraint_violation(&self, v: &HermitianMat) -> Result<f64> {
        let eig = eig_hermitian(v)?;
        let psd = (-eig.eigenvalues[0]).max(0.0) / self.pmax;
        let power = (v.trace() - self.pmax).max(0.0) / self.pmax;
        let cap = (self.h_willie.trace_product(v) - self.cap).max(0.0) / self.noise_power;
        Ok(psd.max(power).max(cap))
    }
}

/// Expansion point and penalty data of one convex subproblem.
#[derive(Clone, Debug)]
pub struct SubproblemState {
    /// Previous covariance (watts), feasible for the subproblem.
    pub v: HermitianMat,
    pub beta1: f64,
    /// Watts.
    pub beta2: f64,
    pub u_max: Vec<C64>,
    pub eta: f64,
}

#[derive(Clone, Debug)]
pub struct ConvexIterate {
    pub v: HermitianMat,
    pub beta1: f64,
    /// Watts.
    pub beta2: f64,
    pub u_max: Vec<C64>,
    pub eta: f64,
    /// `β₁ − η (Tr V̂ − uᴴ V̂ u)` with `V̂ = V / P_max`.
    pub objective: f64,
    /// `Tr V − uᴴ V u`, watts.
    pub penalty_residual: f64,
    /// Barrier duality-gap bound at termination.
    pub gap: f64,
}

/// Normalized problem data restricted to the subspace the covert cap allows.
struct Normalized {
    /// Orthonormal basis (columns) of the admissible subspace.
    basis: ComplexMat,
    bob: HermitianMat,
    eve: HermitianMat,
    willie: Option<HermitianMat>,
    cap: f64,
}

impl Normalized {
    fn new(p: &BeamformingProblem) -> Result<Option<Self>> {
        let n = p.dim();
        let scale = p.pmax / p.noise_power;
        let cap = p.cap / p.noise_power;
        let hw = p.h_willie.scale(scale);
        let hw_norm = hw.frobenius_norm();
        let basis = if cap <= ZERO_CAP && hw_norm > 0.0 {
            let eig = eig_hermitian(&hw)?;
            let top = eig.eigenvalues[n - 1];
            let keep: Vec<Vec<C64>> = (0..n)
                .filter(|&i| eig.eigenvalues[i] <= 1e-12 * top)
                .map(|i| eig.vector(i))
                .collect();
            if keep.is_empty() {
                return Ok(None);
            }
            ComplexMat::from_columns(&keep)?
        } else {
            ComplexMat::identity(n)
        };
        let willie = (cap > ZERO_CAP && hw_norm > 0.0).then(|| hw.congruence(&basis));
        Ok(Some(Self {
            bob: p.h_bob.scale(scale).congruence(&basis),
            eve: p.h_eve.scale(scale).congruence(&basis),
            willie,
            cap,
            basis,
        }))
    }

    fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// `Qᴴ V̂ Q`.
    fn reduce(&self, v_hat: &HermitianMat) -> HermitianMat {
        v_hat.congruence(&self.basis)
    }

    /// `Q W Qᴴ`.
    fn expand(&self, w: &HermitianMat) -> HermitianMat {
        HermitianMat::symmetrized(&(&(&self.basis * w.as_mat()) * &self.basis.adjoint()))
    }

    fn reduce_vec(&self, u: &[C64]) -> Vec<C64> {
        self.basis.adjoint().matvec(u)
    }
}

/// Variable layout: `[W coordinates…, β₁, β̂₂]`.
struct Subproblem {
    program: ConvexProgram,
    block: PsdBlock,
}

impl Subproblem {
    fn build(norm: &Normalized, u: &[C64], eta: f64, beta1_m: f64, beta2_m: f64) -> Self {
        let m = norm.dim();
        let block = PsdBlock::new(m);
        let k = block.coords();
        let b1 = k;
        let b2 = k + 1;
        let dim = k + 2;

        let ur = norm.reduce_vec(u);
        let proj = HermitianMat::identity(m).sub(&HermitianMat::outer(&ur));
        let mut objective = vec![0.0; dim];
        for (o, a) in objective.iter_mut().zip(block.linear_functional(&proj)) {
            *o = eta * a;
        }
        objective[b1] = -1.0;
        let mut program = ConvexProgram::new(dim, objective);
        program.psd = Some(block.clone());

        let indexed = |a: Vec<f64>, scale: f64| -> Vec<(usize, f64)> {
            a.into_iter().enumerate().map(|(i, v)| (i, v * scale)).collect()
        };
        // Tr W ≤ 1
        program.constraints.push(QuadConstraint::linear(
            indexed(block.linear_functional(&HermitianMat::identity(m)), 1.0),
            -1.0,
        ));
        // Tr(Ĥ_w W) ≤ ĉ
        if let Some(hw) = &norm.willie {
            program.constraints.push(QuadConstraint::linear(
                indexed(block.linear_functional(hw), 1.0),
                -norm.cap,
            ));
        }
        // 1 + Tr(Ĥ_e W) − β̂₂ ≤ 0
        let mut lin = indexed(block.linear_functional(&norm.eve), 1.0);
        lin.push((b2, -1.0));
        program.constraints.push(QuadConstraint::linear(lin, 1.0));
        // f(β₁, β̂₂; β₁ᵐ, β̂₂ᵐ) − 1 − Tr(Ĥ_b W) ≤ 0
        let d = beta1_m - beta2_m;
        let mut lin = indexed(block.linear_functional(&norm.bob), -1.0);
        lin.push((b1, -0.5 * d));
        lin.push((b2, 0.5 * d));
        program.constraints.push(QuadConstraint {
            quad: vec![(b1, b1, 0.5), (b1, b2, 0.5), (b2, b1, 0.5), (b2, b2, 0.5)],
            lin,
            constant: 0.25 * d * d - 1.0,
        });
        Self { program, block }
    }

    /// Pulls a feasible `(W, β)` toward the interior.
    fn interior_start(&self, norm: &Normalized, w_prev: &HermitianMat, beta1_m: f64, beta2_m: f64) -> Option<Vec<f64>> {
        let m = norm.dim();
        let mut s = 0.5 / m as f64;
        if let Some(hw) = &norm.willie {
            let t = hw.trace();
            if t > 0.0 {
                s = s.min(0.5 * norm.cap / t);
            }
        }
        let w_center = HermitianMat::identity(m).scale(s);
        let d = beta1_m - beta2_m;
        let mut tau = 0.5;
        for _ in 0..60 {
            let w = w_prev.scale(1.0 - tau).add(&w_center.scale(tau));
            let r = 1.0 + norm.bob.trace_product(&w);
            let beta2 = 1.0 + norm.eve.trace_product(&w) + tau * 1e-3 * beta2_m.max(1.0);
            let disc = r - d * beta2;
            if disc > 0.0 {
                let beta1 = d - beta2 + disc.sqrt();
                let mut x = self.block.from_matrix(&w);
                x.push(beta1);
                x.push(beta2);
                if self.program.is_strictly_feasible(&x) {
                    return Some(x);
                }
            }
            tau *= 0.5;
        }
        None
    }
}

/// Solves one penalized, convexified subproblem around `state`.
pub fn solve_convex_subproblem(problem: &BeamformingProblem, state: &SubproblemState) -> Result<ConvexIterate> {
    let norm = Normalized::new(problem)?
        .ok_or_else(|| Error::Infeasible("covert cap leaves no admissible transmit direction".into()))?;
    solve_normalized(problem, &norm, state)
}

fn solve_normalized(problem: &BeamformingProblem, norm: &Normalized, state: &SubproblemState) -> Result<ConvexIterate> {
    let sigma2 = problem.noise_power;
    let beta2_m = state.beta2 / sigma2;
    let beta1_m = state.beta1;
    // η weighs the penalty in watts, i.e. η·P_max on the normalized one
    let eta_hat = state.eta * problem.pmax;
    let sub = Subproblem::build(norm, &state.u_max, eta_hat, beta1_m, beta2_m);
    let w_prev = norm.reduce(&state.v.scale(1.0 / problem.pmax));
    let x0 = sub.interior_start(norm, &w_prev, beta1_m, beta2_m).ok_or_else(|| {
        Error::Infeasible("no strictly feasible point near the previous iterate".into())
    })?;
    let opts = BarrierOptions {
        gap_tol: 1e-10 * (1.0 + beta1_m.abs() + eta_hat),
        ..BarrierOptions::default()
    };
    let out = sub.program.minimize(&x0, &opts).map_err(|e| e.context("beamforming subproblem"))?;
    let k = sub.block.coords();
    let w = sub.block.to_matrix(&out.x[..k]);
    let v_hat = norm.expand(&w);
    let v = v_hat.scale(problem.pmax);
    let beta1 = out.x[k];
    let beta2 = out.x[k + 1] * sigma2;
    let penalty_hat = v_hat.trace() - v_hat.quad_form(&state.u_max);
    Ok(ConvexIterate {
        beta1,
        beta2,
        u_max: state.u_max.clone(),
        eta: state.eta,
        objective: beta1 - eta_hat * penalty_hat,
        penalty_residual: penalty_hat * problem.pmax,
        gap: out.gap,
        v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamIteration {
    pub eta: f64,
    pub beta1: f64,
    /// Penalized objective of the previous iterate under this iteration's
    /// `η` and `u`.
    pub penalized_before: f64,
    /// Penalized objective attained by the subproblem.
    pub penalized_after: f64,
    /// `‖V − vvᴴ‖_F / (1 + Tr V)`.
    pub rank_residual: f64,
}

#[derive(Clone, Debug)]
pub struct BeamSolution {
    /// Final covariance (watts).
    pub v: HermitianMat,
    /// Principal rank-one beamformer extracted from `v`.
    pub beamformer: Vec<C64>,
    pub beta1: f64,
    /// Watts.
    pub beta2: f64,
    /// `(1+γ_b)/(1+γ_e)` achieved by `beamformer`.
    pub secrecy_objective: f64,
    pub trace: Vec<BeamIteration>,
    /// `‖V − vvᴴ‖_F`, watts.
    pub rank_residual: f64,
    pub converged: bool,
}

impl BeamSolution {
    /// `v vᴴ`.
    pub fn rank_one_covariance(&self) -> HermitianMat {
        HermitianMat::outer(&self.beamformer)
    }

    fn idle(problem: &BeamformingProblem) -> Self {
        let n = problem.dim();
        BeamSolution {
            v: HermitianMat::zeros(n),
            beamformer: vec![C64::new(0.0, 0.0); n],
            beta1: 1.0,
            beta2: problem.noise_power,
            secrecy_objective: 1.0,
            trace: Vec::new(),
            rank_residual: 0.0,
            converged: true,
        }
    }
}

/// Matched-filter start inside the admissible subspace, halved until the
/// covert cap holds.
fn default_start(problem: &BeamformingProblem, norm: &Normalized) -> Result<Option<HermitianMat>> {
    let (lmax, dir) = principal_component(&norm.bob)?;
    if !(lmax > 0.0) {
        return Ok(None);
    }
    let full = norm.basis.matvec(&dir);
    let unit = HermitianMat::outer(&full);
    let mut rho = 1.0;
    for _ in 0..200 {
        let v = unit.scale(problem.pmax / rho);
        if problem.h_willie.trace_product(&v) <= problem.cap {
            return Ok(Some(v));
        }
        rho *= 2.0;
    }
    Ok(Some(HermitianMat::zeros(problem.dim())))
}

fn start_point(problem: &BeamformingProblem, norm: &Normalized) -> Result<Option<HermitianMat>> {
    if let Some(v0) = &problem.initial {
        if v0.dim() == problem.dim() && problem.constraint_violation(v0)? <= 1e-12 {
            // move into the admissible subspace exactly
            let w = norm.reduce(&v0.scale(1.0 / problem.pmax));
            return Ok(Some(norm.expand(&w).scale(problem.pmax)));
        }
    }
    default_start(problem, norm)
}

/// Penalty/SCA loop for the fixed-layout beamforming problem.
pub fn solve_beamforming(problem: &BeamformingProblem) -> Result<BeamSolution> {
    let Some(norm) = Normalized::new(problem)? else {
        return Ok(BeamSolution::idle(problem));
    };
    if !(principal_component(&norm.bob)?.0 > 0.0) {
        return Ok(BeamSolution::idle(problem));
    }
    let Some(mut v) = start_point(problem, &norm)? else {
        return Ok(BeamSolution::idle(problem));
    };
    let sigma2 = problem.noise_power;
    let mut beta2 = sigma2 + problem.h_eve.trace_product(&v).max(0.0);
    let mut beta1 = (sigma2 + problem.h_bob.trace_product(&v).max(0.0)) / beta2;
    let mut eta = problem.penalty_init;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut residual;

    for _ in 0..problem.max_iters {
        let u = principal_dir(&v, &norm)?;
        let before = beta1 - eta * (v.trace() - v.quad_form(&u));
        let state = SubproblemState {
            v: v.clone(),
            beta1,
            beta2,
            u_max: u,
            eta,
        };
        let it = solve_normalized(problem, &norm, &state)?;
        let rel = (it.beta1 - beta1).abs() / beta1.abs().max(1e-300);
        v = it.v;
        beta1 = it.beta1;
        beta2 = it.beta2;
        residual = rank_one_residual(&v)?;
        let scaled = residual / (1.0 + v.trace());
        trace.push(BeamIteration {
            eta,
            beta1,
            penalized_before: before,
            penalized_after: it.objective,
            rank_residual: scaled,
        });
        if rel <= problem.tol && scaled <= problem.rank_tol {
            converged = true;
            break;
        }
        if eta >= problem.penalty_ceiling && scaled > problem.rank_tol && rel <= problem.tol {
            return Err(Error::RankOneFailure {
                residual: scaled,
                penalty: eta,
                iterations: trace.len(),
            });
        }
        eta = (eta * problem.penalty_growth).min(problem.penalty_ceiling);
    }

    residual = rank_one_residual(&v)?;
    if !converged && residual / (1.0 + v.trace()) > problem.rank_tol {
        return Err(Error::RankOneFailure {
            residual: residual / (1.0 + v.trace()),
            penalty: eta,
            iterations: trace.len(),
        });
    }
    let beamformer = extract_rank_one(&v)?;
    let vv = HermitianMat::outer(&beamformer);
    Ok(BeamSolution {
        secrecy_objective: problem.secrecy_ratio(&vv),
        beamformer,
        beta1,
        beta2,
        trace,
        rank_residual: residual,
        converged,
        v,
    })
}

/// Principal direction of `V`; for `V = 0` the Bob-matched direction of the
/// admissible subspace.
fn principal_dir(v: &HermitianMat, norm: &Normalized) -> Result<Vec<C64>> {
    let (l, u) = principal_component(v)?;
    if l > 0.0 {
        return Ok(u);
    }
    let (_, dir) = principal_component(&norm.bob)?;
    Ok(norm.basis.matvec(&dir))
}
