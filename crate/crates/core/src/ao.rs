//! Alternating optimization of the beamformer and each antenna position,
//! plus the fixed, random and exhaustive-selection baselines that only
//! optimize the beamformer.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::{solve_beamforming, BeamSolution, BeamformingProblem};
use crate::channel::{channels, AntennaLayout, ChannelRealization, Position2D};
use crate::config::{Link, ScenarioConfig};
use crate::covertness::{verify_covertness, CovertBudget, CovertnessReport};
use crate::error::{Error, Result};
use crate::numerics::{HermitianMat, C64};
use crate::positions::{secrecy_ratio, solve_position_subproblem};

/// Rejection-sampling budget for random layouts.
const RPA_ATTEMPTS: usize = 100_000;
/// Largest antenna count the exhaustive baseline enumerates.
const EAS_MAX_ANTENNAS: usize = 8;
/// Largest multiple of a round's displacement tried when extrapolating.
const MAX_EXTRAPOLATION: f64 = 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Proposed,
    Fpa,
    Rpa,
    Eas,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::Fpa, Scheme::Rpa, Scheme::Eas];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Fpa => "fpa",
            Scheme::Rpa => "rpa",
            Scheme::Eas => "eas",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?} (expected proposed, fpa, rpa or eas)")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockTiming {
    pub beamforming: Duration,
    pub positions: Duration,
}

#[derive(Clone, Debug)]
pub struct AOState {
    /// Completed rounds.
    pub iteration: usize,
    pub layout: AntennaLayout,
    /// `v vᴴ`.
    pub v: HermitianMat,
    pub beamformer: Vec<C64>,
    pub beta1: f64,
    /// Watts.
    pub beta2: f64,
    /// `(1+γ_b)/(1+γ_e)` after each round.
    pub history: Vec<f64>,
    pub timing: BlockTiming,
}

impl AOState {
    pub fn objective(&self) -> f64 {
        *self.history.last().expect("history starts non-empty")
    }
}

#[derive(Clone, Debug)]
pub struct AOSolution {
    pub state: AOState,
    /// `log₂` of the final objective; negative when Eve out-receives Bob.
    pub secrecy_rate_raw: f64,
    pub secrecy_rate: f64,
    pub covertness: CovertnessReport,
    pub converged: bool,
}

impl AOSolution {
    pub fn objective(&self) -> f64 {
        self.state.objective()
    }

    pub fn rounds(&self) -> usize {
        self.state.iteration
    }

    fn finish(state: AOState, config: &ScenarioConfig, realization: &ChannelRealization, converged: bool) -> Result<Self> {
        let budget = CovertBudget::new(config.epsilon, config.noise_power)?;
        let ch = channels(&state.layout, realization);
        let covertness = verify_covertness(&ch[Link::Willie], &state.v, &budget)?;
        let raw = state.objective().log2();
        Ok(Self {
            secrecy_rate_raw: raw,
            secrecy_rate: raw.max(0.0),
            covertness,
            converged,
            state,
        })
    }
}

/// Beamforming for a fixed layout, optionally warm-started.
pub fn beamform(
    config: &ScenarioConfig,
    layout: &AntennaLayout,
    realization: &ChannelRealization,
    initial: Option<&HermitianMat>,
) -> Result<BeamSolution> {
    let budget = CovertBudget::new(config.epsilon, config.noise_power)?;
    let ch = channels(layout, realization);
    let mut problem = BeamformingProblem::new(
        ch[Link::Bob].gram(),
        ch[Link::Eve].gram(),
        ch[Link::Willie].gram(),
        config.noise_power,
        config.pmax,
        budget.power_cap,
    )?
    .with_settings(&config.solver);
    if let Some(v) = initial {
        problem = problem.with_initial(v.clone());
    }
    solve_beamforming(&problem)
}

/// Centered square grid at spacing `max(D, A/⌈√N⌉)` with a seeded jitter of
/// at most `D/10` per antenna.
pub fn init_layout(config: &ScenarioConfig, seed: u64) -> Result<AntennaLayout> {
    let n = config.antennas;
    let k = (n as f64).sqrt().ceil() as usize;
    let side = config.region_side;
    let spacing = config.min_spacing.max(side / k as f64);
    let span = (k - 1) as f64 * spacing;
    if span > side * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "{n} antennas at spacing {} do not fit in a region of side {side}",
            config.min_spacing
        )));
    }
    let margin = 0.5 * (side - span);
    let radius = (config.min_spacing / 10.0)
        .min(0.5 * (spacing - config.min_spacing))
        .min(margin)
        .max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|i| {
            let (r, c) = (i / k, i % k);
            let x = -0.5 * span + c as f64 * spacing;
            let y = -0.5 * span + r as f64 * spacing;
            let rho = radius * rng.gen::<f64>().sqrt();
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            let half = 0.5 * side;
            Position2D::new(
                (x + rho * phi.cos()).clamp(-half, half),
                (y + rho * phi.sin()).clamp(-half, half),
            )
        })
        .collect();
    let layout = AntennaLayout::new(positions);
    layout.check(side, config.min_spacing, 1e-12)?;
    Ok(layout)
}

/// `N` antennas on the x axis at half-wavelength spacing, centered.
pub fn fpa_layout(config: &ScenarioConfig) -> Result<AntennaLayout> {
    let n = config.antennas;
    let step = config.wavelength / 2.0;
    let layout = AntennaLayout::new(
        (0..n)
            .map(|i| Position2D::new((i as f64 - (n as f64 - 1.0) / 2.0) * step, 0.0))
            .collect(),
    );
    layout
        .check(config.region_side, config.min_spacing, 1e-12)
        .map_err(|e| Error::Config(format!("fixed array does not fit the scenario: {e}")))?;
    Ok(layout)
}

/// Sequential rejection sampling of uniform positions at spacing `D`.
pub fn random_layout(config: &ScenarioConfig, seed: u64) -> Result<AntennaLayout> {
    let half = config.region_side / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<Position2D> = Vec::with_capacity(config.antennas);
    let mut attempts = 0;
    while positions.len() < config.antennas {
        if attempts == RPA_ATTEMPTS {
            return Err(Error::Config(format!(
                "could not place {} antennas at spacing {} after {RPA_ATTEMPTS} draws",
                config.antennas, config.min_spacing
            )));
        }
        attempts += 1;
        let t = Position2D::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half));
        if positions.iter().all(|p| p.distance(&t) >= config.min_spacing) {
            positions.push(t);
        }
    }
    Ok(AntennaLayout::new(positions))
}

/// The `2N` candidate ports: two rows at `y = ±λ/4`, each with `N`
/// half-wavelength-spaced positions centered on the x axis.
pub fn eas_candidates(config: &ScenarioConfig) -> Result<Vec<Position2D>> {
    let n = config.antennas;
    if n > EAS_MAX_ANTENNAS {
        return Err(Error::Config(format!(
            "exhaustive selection supports at most {EAS_MAX_ANTENNAS} antennas, got {n}"
        )));
    }
    let step = config.wavelength / 2.0;
    let mut out = Vec::with_capacity(2 * n);
    for y in [-step / 2.0, step / 2.0] {
        for i in 0..n {
            out.push(Position2D::new((i as f64 - (n as f64 - 1.0) / 2.0) * step, y));
        }
    }
    let half = config.region_side / 2.0;
    if out.iter().any(|p| p.x.abs() > half || p.y.abs() > half) {
        return Err(Error::Config("candidate ports fall outside the region".into()));
    }
    Ok(out)
}

/// Every `N`-subset of the candidates (in lexicographic bitmask order) whose
/// pairwise spacing is at least `D`.
pub fn eas_subsets(config: &ScenarioConfig, candidates: &[Position2D]) -> Vec<AntennaLayout> {
    let m = candidates.len();
    let n = config.antennas;
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == n)
        .map(|mask| {
            AntennaLayout::new((0..m).filter(|i| mask >> i & 1 == 1).map(|i| candidates[i]).collect())
        })
        .filter(|l| l.min_pairwise_distance() >= config.min_spacing - 1e-12)
        .collect()
}

fn single_shot(config: &ScenarioConfig, layout: AntennaLayout, realization: &ChannelRealization) -> Result<AOSolution> {
    let start = Instant::now();
    let bs = beamform(config, &layout, realization, None)?;
    let objective = secrecy_ratio(&layout, &bs.beamformer, realization, config.noise_power);
    let state = AOState {
        iteration: 1,
        v: bs.rank_one_covariance(),
        beamformer: bs.beamformer,
        beta1: bs.beta1,
        beta2: bs.beta2,
        history: vec![objective],
        timing: BlockTiming {
            beamforming: start.elapsed(),
            positions: Duration::ZERO,
        },
        layout,
    };
    AOSolution::finish(state, config, realization, bs.converged)
}

pub fn run_fpa(config: &ScenarioConfig, realization: &ChannelRealization) -> Result<AOSolution> {
    single_shot(config, fpa_layout(config)?, realization)
}

pub fn run_rpa(config: &ScenarioConfig, realization: &ChannelRealization, seed: u64) -> Result<AOSolution> {
    single_shot(config, random_layout(config, seed)?, realization)
}

pub fn run_eas(config: &ScenarioConfig, realization: &ChannelRealization) -> Result<AOSolution> {
    let candidates = eas_candidates(config)?;
    let mut best: Option<AOSolution> = None;
    for layout in eas_subsets(config, &candidates) {
        let sol = single_shot(config, layout, realization)?;
        if best.as_ref().map_or(true, |b| sol.objective() > b.objective()) {
            best = Some(sol);
        }
    }
    best.ok_or_else(|| Error::Config("no candidate subset satisfies the minimum spacing".into()))
}

/// Alternating optimization from `init_layout(config, seed)`; with
/// `multi_start > 1` further starts use derived seeds and the best run wins.
pub fn run_ao(config: &ScenarioConfig, realization: &ChannelRealization, seed: u64) -> Result<AOSolution> {
    let starts = config.solver.multi_start.max(1);
    let mut best: Option<AOSolution> = None;
    for s in 0..starts {
        let start_seed = if s == 0 { seed } else { crate::seed::derive(seed, &[s as u64]) };
        let sol = run_ao_from(config, realization, init_layout(config, start_seed)?)?;
        if best.as_ref().map_or(true, |b| sol.objective() > b.objective()) {
            best = Some(sol);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Alternating optimization from a given feasible layout.
pub fn run_ao_from(config: &ScenarioConfig, realization: &ChannelRealization, layout: AntennaLayout) -> Result<AOSolution> {
    layout.check(config.region_side, config.min_spacing, 1e-12)?;
    let budget = CovertBudget::new(config.epsilon, config.noise_power)?;
    let sigma2 = config.noise_power;
    let settings = &config.solver;
    let mut timing = BlockTiming::default();

    let clock = Instant::now();
    let bs = beamform(config, &layout, realization, None).map_err(|e| e.context("AO round 1, beamforming"))?;
    timing.beamforming += clock.elapsed();
    let mut state = AOState {
        iteration: 0,
        v: bs.rank_one_covariance(),
        beamformer: bs.beamformer,
        beta1: bs.beta1,
        beta2: bs.beta2,
        history: Vec::new(),
        timing: BlockTiming::default(),
        layout,
    };
    let mut objective = secrecy_ratio(&state.layout, &state.beamformer, realization, sigma2);
    let mut converged = false;

    for round in 1..=settings.max_rounds {
        if round > 1 {
            let clock = Instant::now();
            let bs = beamform(config, &state.layout, realization, Some(&state.v))
                .map_err(|e| e.context(format!("AO round {round}, beamforming")))?;
            timing.beamforming += clock.elapsed();
            let candidate = secrecy_ratio(&state.layout, &bs.beamformer, realization, sigma2);
            if candidate >= objective {
                objective = candidate;
                state.v = bs.rank_one_covariance();
                state.beamformer = bs.beamformer;
                state.beta1 = bs.beta1;
                state.beta2 = bs.beta2;
            }
        }
        let clock = Instant::now();
        let before = state.layout.clone();
        for n in 0..config.antennas {
            for _ in 0..settings.position_mm_steps.max(1) {
                let step = solve_position_subproblem(n, &state.layout, &state.beamformer, realization, config, &budget)
                    .map_err(|e| e.context(format!("AO round {round}, antenna {}", n + 1)))?;
                if !step.moved {
                    break;
                }
                state.layout.positions[n] = step.position;
                objective = step.objective_after;
                if step.objective_after - step.objective_before <= 1e-2 * settings.ao_tol * step.objective_before {
                    break;
                }
            }
        }
        for n in 0..config.antennas {
            let mut from = state.layout.clone();
            from.positions[n] = before.positions[n];
            objective = extrapolate(config, realization, &budget, &from, &mut state, objective);
        }
        objective = extrapolate(config, realization, &budget, &before, &mut state, objective);
        timing.positions += clock.elapsed();

        let previous = state.history.last().copied();
        state.history.push(objective);
        state.iteration = round;
        if let Some(prev) = previous {
            if (objective - prev).abs() <= settings.ao_tol * prev.abs() {
                converged = true;
                break;
            }
        }
    }
    state.timing = timing;
    AOSolution::finish(state, config, realization, converged)
}

/// Safeguarded extrapolation of the layout along `state.layout − from`:
/// doubles the step while the exact objective improves and the layout stays
/// admissible. The beam is rescaled only as far as the covert cap needs.
fn extrapolate(
    config: &ScenarioConfig,
    realization: &ChannelRealization,
    budget: &CovertBudget,
    from: &AntennaLayout,
    state: &mut AOState,
    objective: f64,
) -> f64 {
    let sigma2 = config.noise_power;
    let base = state.layout.clone();
    let mut best = objective;
    let mut gamma = 1.0;
    while gamma <= MAX_EXTRAPOLATION {
        let positions = base
            .positions
            .iter()
            .zip(&from.positions)
            .map(|(p, q)| Position2D::new(p.x + gamma * (p.x - q.x), p.y + gamma * (p.y - q.y)))
            .collect();
        let layout = AntennaLayout::new(positions);
        if layout == base || layout.check(config.region_side, config.min_spacing, 0.0).is_err() {
            break;
        }
        let ch = channels(&layout, realization);
        let leak = ch[Link::Willie].gain(&state.beamformer);
        let scale = if leak > budget.power_cap {
            (budget.power_cap / leak).sqrt() * (1.0 - 1e-12)
        } else {
            1.0
        };
        let beam: Vec<C64> = state.beamformer.iter().map(|x| x * scale).collect();
        let value = secrecy_ratio(&layout, &beam, realization, sigma2);
        if value <= best {
            break;
        }
        best = value;
        state.beta1 = value;
        state.beta2 = sigma2 + ch[Link::Eve].gain(&beam);
        state.v = HermitianMat::outer(&beam);
        state.beamformer = beam;
        state.layout = layout;
        gamma *= 2.0;
    }
    best
}

pub fn run_scheme(
    scheme: Scheme,
    config: &ScenarioConfig,
    realization: &ChannelRealization,
    seed: u64,
) -> Result<AOSolution> {
    match scheme {
        Scheme::Proposed => run_ao(config, realization, seed),
        Scheme::Fpa => run_fpa(config, realization),
        Scheme::Rpa => run_rpa(config, realization, seed),
        Scheme::Eas => run_eas(config, realization),
    }
}
