#![allow(dead_code)]

use fascovert::beamforming::BeamformingProblem;
use fascovert::channel::{channels, sample_realization, AntennaLayout, ChannelRealization, Position2D};
use fascovert::config::Link;
use fascovert::covertness::CovertBudget;
use fascovert::numerics::HermitianMat;
use fascovert::config::ScenarioConfig;
use fascovert::numerics::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Root of a sign-changing `f` on `[lo, hi]` by plain bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    assert!(f_lo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Central difference gradient of a function of a position.
pub fn central_gradient(f: impl Fn(Position2D) -> f64, t: Position2D, h: f64) -> [f64; 2] {
    let dx = (f(Position2D::new(t.x + h, t.y)) - f(Position2D::new(t.x - h, t.y))) / (2.0 * h);
    let dy = (f(Position2D::new(t.x, t.y + h)) - f(Position2D::new(t.x, t.y - h))) / (2.0 * h);
    [dx, dy]
}

pub fn complex_normal(rng: &mut impl Rng, sd: f64) -> C64 {
    use rand_distr::{Distribution, StandardNormal};
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * (sd / 2f64.sqrt())
}

pub fn random_point(rng: &mut impl Rng, side: f64) -> Position2D {
    Position2D::new(rng.gen_range(-side / 2.0..=side / 2.0), rng.gen_range(-side / 2.0..=side / 2.0))
}

/// Rejection-sampled layout satisfying the region and spacing rules.
pub fn random_layout(rng: &mut impl Rng, config: &ScenarioConfig) -> AntennaLayout {
    loop {
        let mut pts: Vec<Position2D> = Vec::new();
        for _ in 0..10_000 {
            let p = random_point(rng, config.region_side);
            if pts.iter().all(|q| q.distance(&p) >= config.min_spacing) {
                pts.push(p);
                if pts.len() == config.antennas {
                    return AntennaLayout::new(pts);
                }
            }
        }
    }
}

pub fn reference_instance(seed: u64) -> (ScenarioConfig, ChannelRealization) {
    let config = ScenarioConfig::reference();
    let real = sample_realization(&config, seed);
    (config, real)
}

pub fn small_config(antennas: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::reference();
    c.antennas = antennas;
    c
}

/// Largest ratio `(σ² + |h_bᴴv|²)/(σ² + |h_eᴴv|²)` over rank-one
/// `v = √p (cos a, sin a e^{jφ})` for two antennas, found by a dense grid
/// followed by repeated zoomed grids around the best cells. For each
/// direction the best power is either zero or the largest admissible one,
/// since the ratio is monotone in `p`.
pub struct TwoAntennaOracle {
    pub hb: [C64; 2],
    pub he: [C64; 2],
    pub hw: [C64; 2],
    pub noise: f64,
    pub pmax: f64,
    pub cap: f64,
}

impl TwoAntennaOracle {
    fn gain(h: &[C64; 2], u: &[C64; 2]) -> f64 {
        (h[0].conj() * u[0] + h[1].conj() * u[1]).norm_sqr()
    }

    pub fn value_at(&self, a: f64, phi: f64) -> f64 {
        let u = [C64::new(a.cos(), 0.0), C64::from_polar(a.sin(), phi)];
        let gw = Self::gain(&self.hw, &u);
        let p = if gw > 0.0 { self.pmax.min(self.cap / gw) } else { self.pmax };
        let r = (self.noise + p * Self::gain(&self.hb, &u)) / (self.noise + p * Self::gain(&self.he, &u));
        r.max(1.0)
    }

    pub fn maximize(&self) -> f64 {
        use std::f64::consts::PI;
        let (na, np) = (180usize, 360usize);
        let mut cells: Vec<(f64, f64, f64)> = Vec::with_capacity(na * np);
        for i in 0..=na {
            let a = PI / 2.0 * i as f64 / na as f64;
            for j in 0..np {
                let phi = 2.0 * PI * j as f64 / np as f64;
                cells.push((self.value_at(a, phi), a, phi));
            }
        }
        cells.sort_by(|x, y| y.0.total_cmp(&x.0));
        let mut best = cells[0].0;
        for &(_, a0, p0) in cells.iter().take(8) {
            let (mut a, mut p) = (a0, p0);
            let (mut da, mut dp) = (PI / 2.0 / na as f64, 2.0 * PI / np as f64);
            for _ in 0..30 {
                let mut local = (self.value_at(a, p), a, p);
                for i in -10i32..=10 {
                    for j in -10i32..=10 {
                        let ai = (a + da * i as f64 / 10.0).clamp(0.0, PI / 2.0);
                        let pj = p + dp * j as f64 / 10.0;
                        let v = self.value_at(ai, pj);
                        if v > local.0 {
                            local = (v, ai, pj);
                        }
                    }
                }
                a = local.1;
                p = local.2;
                best = best.max(local.0);
                da *= 0.3;
                dp *= 0.3;
            }
        }
        best
    }
}

pub fn problem_for(config: &ScenarioConfig, seed: u64) -> BeamformingProblem {
    let real = sample_realization(config, seed);
    let layout = random_layout(&mut rng(seed ^ 0x55), config);
    let ch = channels(&layout, &real);
    let cap = CovertBudget::new(config.epsilon, config.noise_power).unwrap().power_cap;
    BeamformingProblem::new(
        ch[Link::Bob].gram(),
        ch[Link::Eve].gram(),
        ch[Link::Willie].gram(),
        config.noise_power,
        config.pmax,
        cap,
    )
    .unwrap()
    .with_settings(&config.solver)
}

pub fn oracle_for(p: &BeamformingProblem) -> TwoAntennaOracle {
    // H = h hᴴ; recover h up to a common phase from the dominant column
    let col = |h: &HermitianMat| {
        let m = h.as_mat();
        let (j, _) = (0..2).map(|j| (j, m.row(j)[j].re)).fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let d = m.row(j)[j].re.max(0.0).sqrt();
        if d == 0.0 {
            return [Default::default(); 2];
        }
        [m.row(0)[j] / d, m.row(1)[j] / d]
    };
    TwoAntennaOracle {
        hb: col(&p.h_bob),
        he: col(&p.h_eve),
        hw: col(&p.h_willie),
        noise: p.noise_power,
        pmax: p.pmax,
        cap: p.cap,
    }
}
