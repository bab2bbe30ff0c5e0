//! Far-field geometric channels between Alice's movable antennas and the
//! single-antenna receivers.
//!
//! Every link `k` has `L_k` transmit paths with elevation/azimuth angles and a
//! complex path gain. Moving antenna `n` to `t_n` only rotates the phase of
//! each path by `2π/λ · ρ_{k,l}(t_n)`, so the channel row is
//! `h_kᴴ[n] = Σ_l σ_{k,l} exp(j 2π/λ ρ_{k,l}(t_n))`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{Link, LinkMap, ScenarioConfig};
use crate::error::{Error, Result};
use crate::numerics::{inner, ComplexMat, HermitianMat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions of Alice's `N` antennas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntennaLayout {
    pub positions: Vec<Position2D>,
}

impl AntennaLayout {
    pub fn new(positions: Vec<Position2D>) -> Self {
        Self { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let p = &self.positions;
        let mut best = f64::INFINITY;
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                best = best.min(p[i].distance(&p[j]));
            }
        }
        best
    }

    /// Largest excursion outside `[−A/2, A/2]²`, zero when inside.
    pub fn region_violation(&self, region_side: f64) -> f64 {
        let h = region_side / 2.0;
        self.positions
            .iter()
            .map(|p| (p.x.abs() - h).max(p.y.abs() - h).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Checks the region and minimum-spacing invariants up to `tol` meters.
    pub fn check(&self, region_side: f64, min_spacing: f64, tol: f64) -> Result<()> {
        if self.positions.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidInput("antenna position is not finite".into()));
        }
        let out = self.region_violation(region_side);
        if out > tol {
            return Err(Error::InvalidInput(format!(
                "antenna lies {out:.3e} m outside the region"
            )));
        }
        let d = self.min_pairwise_distance();
        if self.len() > 1 && d < min_spacing - tol {
            return Err(Error::InvalidInput(format!(
                "antennas are {d:.6e} m apart, below the minimum {min_spacing:.6e} m"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathAngle {
    /// θ ∈ [0, π].
    pub elevation: f64,
    /// φ ∈ [0, π].
    pub azimuth: f64,
}

impl PathAngle {
    /// Direction `(sin θ cos φ, cos θ)` whose inner product with a position is
    /// the path-length difference.
    pub fn direction(&self) -> [f64; 2] {
        [
            self.elevation.sin() * self.azimuth.cos(),
            self.elevation.cos(),
        ]
    }
}

/// Per-trial random channel state: path angles and diagonal path gains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub angles: LinkMap<Vec<PathAngle>>,
    pub gains: LinkMap<Vec<C64>>,
    pub wavelength: f64,
    pub seed: u64,
}

impl ChannelRealization {
    pub fn paths(&self, link: Link) -> usize {
        self.gains[link].len()
    }

    /// Same angles with every path gain set to zero.
    pub fn silenced(&self) -> Self {
        let mut out = self.clone();
        for link in Link::ALL {
            out.gains[link].iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
        }
        out
    }
}

/// `ρ(t) = x sin θ cos φ + y cos θ`.
pub fn path_phase_offset(t: Position2D, elevation: f64, azimuth: f64) -> f64 {
    t.x * elevation.sin() * azimuth.cos() + t.y * elevation.cos()
}

pub fn field_response_vector(t: Position2D, link: Link, realization: &ChannelRealization) -> Vec<C64> {
    let k = 2.0 * PI / realization.wavelength;
    realization.angles[link]
        .iter()
        .map(|a| C64::from_polar(1.0, k * path_phase_offset(t, a.elevation, a.azimuth)))
        .collect()
}

/// `L × N` matrix whose column `n` is the field response of antenna `n`.
pub fn field_response_matrix(
    layout: &AntennaLayout,
    link: Link,
    realization: &ChannelRealization,
) -> ComplexMat {
    let columns: Vec<Vec<C64>> = layout
        .positions
        .iter()
        .map(|&t| field_response_vector(t, link, realization))
        .collect();
    ComplexMat::from_columns(&columns).expect("layout and path set are non-empty")
}

/// Channel of one link for a given layout, stored as the row `hᴴ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    row: Vec<C64>,
}

impl Channel {
    pub fn from_row(row: Vec<C64>) -> Self {
        Self { row }
    }

    /// `hᴴ`.
    pub fn row(&self) -> &[C64] {
        &self.row
    }

    /// `h`.
    pub fn column(&self) -> Vec<C64> {
        self.row.iter().map(|x| x.conj()).collect()
    }

    /// `H = h hᴴ`.
    pub fn gram(&self) -> HermitianMat {
        HermitianMat::outer(&self.column())
    }

    /// `|hᴴ v|²`.
    pub fn gain(&self, v: &[C64]) -> f64 {
        let hv: C64 = self.row.iter().zip(v).map(|(a, b)| a * b).sum();
        hv.norm_sqr()
    }

    /// `hᴴ V h = Tr(H V)`.
    pub fn power(&self, v: &HermitianMat) -> f64 {
        let h = self.column();
        inner(&h, &v.as_mat().matvec(&h)).re
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::numerics::norm_sqr(&self.row)
    }
}

/// `hᴴ = 1ᴴ Σ F(t̄)` with diagonal `Σ`.
pub fn channel_vector(layout: &AntennaLayout, link: Link, realization: &ChannelRealization) -> Channel {
    let gains = &realization.gains[link];
    let row = layout
        .positions
        .iter()
        .map(|&t| {
            field_response_vector(t, link, realization)
                .iter()
                .zip(gains)
                .map(|(f, g)| f * g)
                .sum()
        })
        .collect();
    Channel { row }
}

pub fn channels(layout: &AntennaLayout, realization: &ChannelRealization) -> LinkMap<Channel> {
    LinkMap::from_fn(|link| channel_vector(layout, link, realization))
}

/// Draws path angles uniformly on `[0, π]` and path gains from
/// `CN(0, g0 d_k^{−α} / L_k)`; the stream is fully determined by `seed`.
pub fn sample_realization(config: &ScenarioConfig, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut angles = LinkMap::from_fn(|_| Vec::new());
    let mut gains = LinkMap::from_fn(|_| Vec::new());
    for link in Link::ALL {
        let l = config.paths[link];
        let variance =
            config.g0 * config.distance(link).powf(-config.pathloss_exponent) / l as f64;
        let sd = (variance / 2.0).sqrt();
        for _ in 0..l {
            let elevation = rng.gen_range(0.0..=PI);
            let azimuth = rng.gen_range(0.0..=PI);
            let re = std_normal.sample(&mut rng) * sd;
            let im = std_normal.sample(&mut rng) * sd;
            angles[link].push(PathAngle { elevation, azimuth });
            gains[link].push(C64::new(re, im));
        }
    }
    ChannelRealization {
        angles,
        gains,
        wavelength: config.wavelength,
        seed,
    }
}

/// `Tr(h hᴴ V) / σ²`.
pub fn snr(h: &Channel, v: &HermitianMat, noise_power: f64) -> Result<f64> {
    let p = h.power(v);
    let scale = h.norm_sqr() * v.frobenius_norm();
    if p < -1e-12 * (1.0 + scale) {
        return Err(Error::NumericalConsistency(format!(
            "received power {p:.3e} is negative; covariance is not PSD"
        )));
    }
    Ok(p.max(0.0) / noise_power)
}

/// `log2(1 + γ_b) − log2(1 + γ_e)`, unclamped.
pub fn secrecy_rate(snr_bob: f64, snr_eve: f64) -> f64 {
    (1.0 + snr_bob).log2() - (1.0 + snr_eve).log2()
}
