//! Scenario parameters and their flat JSON representation.

use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::Position2D;
use crate::error::{Error, Result};

/// The three single-antenna receivers Alice's array illuminates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Link {
    Bob,
    Eve,
    Willie,
}

impl Link {
    pub const ALL: [Link; 3] = [Link::Bob, Link::Eve, Link::Willie];

    fn idx(self) -> usize {
        match self {
            Link::Bob => 0,
            Link::Eve => 1,
            Link::Willie => 2,
        }
    }
}

/// One value per link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkMap<T>(pub [T; 3]);

impl<T> LinkMap<T> {
    pub fn from_fn(mut f: impl FnMut(Link) -> T) -> Self {
        LinkMap([f(Link::Bob), f(Link::Eve), f(Link::Willie)])
    }

    pub fn map<U>(&self, mut f: impl FnMut(Link, &T) -> U) -> LinkMap<U> {
        LinkMap::from_fn(|l| f(l, &self[l]))
    }
}

impl<T> Index<Link> for LinkMap<T> {
    type Output = T;
    fn index(&self, link: Link) -> &T {
        &self.0[link.idx()]
    }
}

impl<T> IndexMut<Link> for LinkMap<T> {
    fn index_mut(&mut self, link: Link) -> &mut T {
        &mut self.0[link.idx()]
    }
}

/// Iteration caps and tolerances for every solver in the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Initial rank-one penalty weight.
    pub penalty_init: f64,
    /// Multiplicative penalty growth per outer beamforming iteration.
    pub penalty_growth: f64,
    /// Penalty weight beyond which a nonzero rank-one residual is an error.
    pub penalty_ceiling: f64,
    /// Relative objective change that ends the beamforming loop.
    pub beam_tol: f64,
    /// Rank-one residual `‖V − vvᴴ‖_F / (1 + Tr V)` accepted at convergence.
    pub rank_tol: f64,
    pub max_beam_iters: usize,
    /// Relative objective change over one AO round that ends the run.
    pub ao_tol: f64,
    pub max_rounds: usize,
    /// Majorization-minimization steps per antenna per AO round.
    pub position_mm_steps: usize,
    /// Independent AO starts (best kept).
    pub multi_start: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            penalty_init: 1.0,
            penalty_growth: 1.5,
            penalty_ceiling: 1e6,
            beam_tol: 1e-4,
            rank_tol: 1e-6,
            max_beam_iters: 200,
            ao_tol: 1e-4,
            max_rounds: 50,
            position_mm_steps: 3,
            multi_start: 1,
        }
    }
}

/// Physical and algorithmic parameters of one scenario. Powers are in watts
/// and lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub alice: Position2D,
    pub bob: Position2D,
    pub eve: Position2D,
    pub willie: Position2D,
    pub wavelength: f64,
    /// Side `A` of the square antenna region `[−A/2, A/2]²`.
    pub region_side: f64,
    pub min_spacing: f64,
    pub antennas: usize,
    pub paths: LinkMap<usize>,
    /// Linear channel gain at 1 m.
    pub g0: f64,
    pub pathloss_exponent: f64,
    pub pmax: f64,
    pub noise_power: f64,
    pub epsilon: f64,
    pub solver: SolverSettings,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ScenarioConfig {
    /// Two-dimensional geometry with Alice at the origin, Bob at (100, 0) m,
    /// Eve at (150, 5) m and Willie at (150, −5) m; 2.4 GHz carrier, four
    /// antennas in a 4λ square at λ/2 spacing, four paths per link, −40 dB
    /// reference gain, exponent 2.8, 20 dBm budget, −80 dBm noise, ε = 0.2.
    pub fn reference() -> Self {
        let wavelength = 0.125;
        Self {
            alice: Position2D::new(0.0, 0.0),
            bob: Position2D::new(100.0, 0.0),
            eve: Position2D::new(150.0, 5.0),
            willie: Position2D::new(150.0, -5.0),
            wavelength,
            region_side: 4.0 * wavelength,
            min_spacing: wavelength / 2.0,
            antennas: 4,
            paths: LinkMap([4, 4, 4]),
            g0: db_to_linear(-40.0),
            pathloss_exponent: 2.8,
            pmax: dbm_to_watts(20.0),
            noise_power: dbm_to_watts(-80.0),
            epsilon: 0.2,
            solver: SolverSettings::default(),
        }
    }

    pub fn node(&self, link: Link) -> Position2D {
        match link {
            Link::Bob => self.bob,
            Link::Eve => self.eve,
            Link::Willie => self.willie,
        }
    }

    /// Alice-to-receiver distance.
    pub fn distance(&self, link: Link) -> f64 {
        self.alice.distance(&self.node(link))
    }

    /// Largest antenna count a square grid at spacing `D` can place in the
    /// region.
    pub fn grid_capacity(&self) -> usize {
        let per_side = (self.region_side / self.min_spacing + 1e-9).floor() as usize + 1;
        per_side * per_side
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let positive = [
            ("wavelength", self.wavelength),
            ("region_side", self.region_side),
            ("min_spacing", self.min_spacing),
            ("g0", self.g0),
            ("pathloss_exponent", self.pathloss_exponent),
            ("pmax", self.pmax),
            ("noise_power", self.noise_power),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.antennas < 2 {
            return bad(format!("need at least 2 antennas, got {}", self.antennas));
        }
        if self.paths.0.iter().any(|&l| l == 0) {
            return bad("every link needs at least one path".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1], got {}", self.epsilon));
        }
        for p in [self.alice, self.bob, self.eve, self.willie] {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return bad("node positions must be finite".into());
            }
        }
        for link in Link::ALL {
            if !(self.distance(link) > 0.0) {
                return bad(format!("{link:?} coincides with Alice"));
            }
        }
        if self.grid_capacity() < self.antennas {
            return bad(format!(
                "region of side {} m cannot hold {} antennas at spacing {} m",
                self.region_side, self.antennas, self.min_spacing
            ));
        }
        let s = &self.solver;
        if !(s.penalty_init > 0.0 && s.penalty_growth > 1.0 && s.penalty_ceiling >= s.penalty_init)
        {
            return bad("penalty schedule must start positive and grow".into());
        }
        if !(s.beam_tol > 0.0 && s.rank_tol > 0.0 && s.ao_tol > 0.0) {
            return bad("solver tolerances must be positive".into());
        }
        if s.max_beam_iters == 0 || s.max_rounds == 0 || s.multi_start == 0 {
            return bad("iteration caps must be at least 1".into());
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        raw.into_config()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| e.context(format!("reading {}", path.display())))
    }

    /// Flat JSON document accepted by [`from_json_str`](Self::from_json_str).
    pub fn to_json_string(&self) -> String {
        let raw = RawConfig::from_config(self);
        serde_json::to_string_pretty(&raw).expect("config serializes")
    }
}

/// Flat on-disk form. Units appear as field-name suffixes; either the dB(m)
/// or the linear form of a power may be given, not both.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    alice: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bob: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eve: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    willie: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wavelength_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    region_side_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_spacing_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    antennas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths_bob: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths_eve: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths_willie: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g0_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pathloss_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pmax_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pmax_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty_growth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty_ceiling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beam_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_beam_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ao_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    position_mm_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    multi_start: Option<usize>,
}

fn one_of(name: &str, log: Option<f64>, lin: Option<f64>, conv: fn(f64) -> f64) -> Result<Option<f64>> {
    match (log, lin) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "give either the logarithmic or the linear form of {name}, not both"
        ))),
        (Some(v), None) => Ok(Some(conv(v))),
        (None, v) => Ok(v),
    }
}

impl RawConfig {
    fn into_config(self) -> Result<ScenarioConfig> {
        let mut c = ScenarioConfig::reference();
        let pos = |p: [f64; 2]| Position2D::new(p[0], p[1]);
        if let Some(p) = self.alice {
            c.alice = pos(p);
        }
        if let Some(p) = self.bob {
            c.bob = pos(p);
        }
        if let Some(p) = self.eve {
            c.eve = pos(p);
        }
        if let Some(p) = self.willie {
            c.willie = pos(p);
        }
        if let Some(w) = self.wavelength_m {
            // keep the λ-relative defaults tied to the new wavelength
            c.region_side = 4.0 * w;
            c.min_spacing = w / 2.0;
            c.wavelength = w;
        }
        if let Some(v) = self.region_side_m {
            c.region_side = v;
        }
        if let Some(v) = self.min_spacing_m {
            c.min_spacing = v;
        }
        if let Some(v) = self.antennas {
            c.antennas = v;
        }
        if let Some(l) = self.paths {
            c.paths = LinkMap([l; 3]);
        }
        if let Some(l) = self.paths_bob {
            c.paths[Link::Bob] = l;
        }
        if let Some(l) = self.paths_eve {
            c.paths[Link::Eve] = l;
        }
        if let Some(l) = self.paths_willie {
            c.paths[Link::Willie] = l;
        }
        if let Some(v) = one_of("g0", self.g0_db, self.g0, db_to_linear)? {
            c.g0 = v;
        }
        if let Some(v) = self.pathloss_exponent {
            c.pathloss_exponent = v;
        }
        if let Some(v) = one_of("pmax", self.pmax_dbm, self.pmax_w, dbm_to_watts)? {
            c.pmax = v;
        }
        if let Some(v) = one_of("sigma2", self.sigma2_dbm, self.sigma2_w, dbm_to_watts)? {
            c.noise_power = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        let s = &mut c.solver;
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { s.$f = v; })* };
        }
        take!(
            penalty_init,
            penalty_growth,
            penalty_ceiling,
            beam_tol,
            rank_tol,
            max_beam_iters,
            ao_tol,
            max_rounds,
            position_mm_steps,
            multi_start
        );
        c.validate()?;
        Ok(c)
    }

    fn from_config(c: &ScenarioConfig) -> Self {
        let p = |p: Position2D| Some([p.x, p.y]);
        let s = &c.solver;
        RawConfig {
            alice: p(c.alice),
            bob: p(c.bob),
            eve: p(c.eve),
            willie: p(c.willie),
            wavelength_m: Some(c.wavelength),
            region_side_m: Some(c.region_side),
            min_spacing_m: Some(c.min_spacing),
            antennas: Some(c.antennas),
            paths_bob: Some(c.paths[Link::Bob]),
            paths_eve: Some(c.paths[Link::Eve]),
            paths_willie: Some(c.paths[Link::Willie]),
            g0: Some(c.g0),
            pathloss_exponent: Some(c.pathloss_exponent),
            pmax_w: Some(c.pmax),
            sigma2_w: Some(c.noise_power),
            epsilon: Some(c.epsilon),
            penalty_init: Some(s.penalty_init),
            penalty_growth: Some(s.penalty_growth),
            penalty_ceiling: Some(s.penalty_ceiling),
            beam_tol: Some(s.beam_tol),
            rank_tol: Some(s.rank_tol),
            max_beam_iters: Some(s.max_beam_iters),
            ao_tol: Some(s.ao_tol),
            max_rounds: Some(s.max_rounds),
            position_mm_steps: Some(s.position_mm_steps),
            multi_start: Some(s.multi_start),
            ..RawConfig::default()
        }
    }
}
