mod common;

use common::{reference_instance, random_layout, rng};
use fascovert::channel::{channel_vector, channels, field_response_matrix, sample_realization, secrecy_rate, snr, AntennaLayout, Position2D};
use fascovert::config::{Link, ScenarioConfig};
use fascovert::numerics::{HermitianMat, C64};

#[test]
fn channel_is_gain_weighted_sum_of_field_responses() {
    let (config, real) = reference_instance(5);
    let layout = random_layout(&mut rng(1), &config);
    for link in Link::ALL {
        let f = field_response_matrix(&layout, link, &real);
        let h = channel_vector(&layout, link, &real);
        for n in 0..layout.len() {
            let expected: C64 = (0..f.rows()).map(|l| real.gains[link][l] * f.row(l)[n]).sum();
            assert!((h.row()[n] - expected).norm() <= 1e-15 * (1.0 + expected.norm()));
        }
    }
}

#[test]
fn single_path_phase_follows_projection() {
    let (config, real) = reference_instance(8);
    let layout = AntennaLayout::new(vec![Position2D::new(0.0, 0.0), Position2D::new(0.1, -0.05)]);
    let f = field_response_matrix(&layout, Link::Bob, &real);
    for l in 0..f.rows() {
        assert!((f.row(l)[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let a = real.angles[Link::Bob][l];
        let rho = 0.1 * a.elevation.sin() * a.azimuth.cos() - 0.05 * a.elevation.cos();
        let expected = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / config.wavelength * rho);
        assert!((f.row(l)[1] - expected).norm() < 1e-12);
    }
}

#[test]
fn realizations_are_seed_deterministic() {
    let config = ScenarioConfig::reference();
    assert_eq!(sample_realization(&config, 42), sample_realization(&config, 42));
    assert_ne!(sample_realization(&config, 42), sample_realization(&config, 43));
}

#[test]
fn path_gain_variance_follows_distance_law() {
    let config = ScenarioConfig::reference();
    let trials = 4000;
    for link in Link::ALL {
        let mut acc = 0.0;
        for s in 0..trials {
            let r = sample_realization(&config, s);
            acc += r.gains[link].iter().map(|g| g.norm_sqr()).sum::<f64>() / r.gains[link].len() as f64;
        }
        let mean = acc / trials as f64;
        let expected = config.g0 * config.distance(link).powf(-config.pathloss_exponent) / config.paths[link] as f64;
        // 16000 exponential samples: 5% is over six standard errors
        assert!((mean / expected - 1.0).abs() < 0.05, "{link:?}: {mean:e} vs {expected:e}");
    }
}

#[test]
fn angles_lie_in_declared_support() {
    let config = ScenarioConfig::reference();
    for s in 0..50 {
        let r = sample_realization(&config, s);
        for link in Link::ALL {
            for a in &r.angles[link] {
                assert!((0.0..=std::f64::consts::PI).contains(&a.elevation));
                assert!((0.0..=std::f64::consts::PI).contains(&a.azimuth));
            }
        }
    }
}

#[test]
fn snr_and_rate_of_rank_one_beam() {
    let (config, real) = reference_instance(2);
    let layout = random_layout(&mut rng(2), &config);
    let ch = channels(&layout, &real);
    let v: Vec<C64> = ch[Link::Bob].column().iter().map(|x| x * 1e3).collect();
    let cov = HermitianMat::outer(&v);
    let gb = snr(&ch[Link::Bob], &cov, config.noise_power).unwrap();
    assert!((gb - ch[Link::Bob].gain(&v) / config.noise_power).abs() <= 1e-12 * gb);
    let ge = snr(&ch[Link::Eve], &cov, config.noise_power).unwrap();
    assert!((secrecy_rate(gb, ge) - ((1.0 + gb) / (1.0 + ge)).log2()).abs() < 1e-12);
    assert_eq!(secrecy_rate(3.0, 3.0), 0.0);
}

#[test]
fn silenced_realization_has_zero_channels() {
    let (config, real) = reference_instance(9);
    let layout = random_layout(&mut rng(9), &config);
    let ch = channels(&layout, &real.silenced());
    for link in Link::ALL {
        assert_eq!(ch[link].norm_sqr(), 0.0);
    }
}
