mod common;

use common::{oracle_for, problem_for, rng, small_config};
use fascovert::ao::fpa_layout;
use fascovert::beamforming::{beta_product_surrogate, rank_one_residual, solve_beamforming, BeamformingProblem};
use fascovert::channel::{channels, sample_realization};
use fascovert::config::{Link, ScenarioConfig};
use fascovert::covertness::CovertBudget;
use fascovert::numerics::HermitianMat;
use rand::Rng;

#[test]
fn two_antenna_optimum_matches_grid_search() {
    let config = small_config(2);
    for seed in 0..20 {
        let p = problem_for(&config, seed);
        let sol = solve_beamforming(&p).unwrap();
        let best = oracle_for(&p).maximize();
        let rel = (sol.secrecy_objective - best) / best;
        assert!(rel.abs() <= 1e-3, "seed {seed}: solver {} oracle {best}", sol.secrecy_objective);
    }
}

#[test]
fn accepted_solutions_are_rank_one_and_feasible() {
    for (antennas, eps) in [(2, 0.2), (4, 0.2), (4, 0.05), (6, 0.3)] {
        let mut config = small_config(antennas);
        config.epsilon = eps;
        for seed in 0..8 {
            let p = problem_for(&config, 100 + seed);
            let sol = solve_beamforming(&p).unwrap();
            let v_hat = sol.v.scale(1.0 / p.pmax);
            assert!(
                rank_one_residual(&v_hat).unwrap() <= 1e-6 * (1.0 + v_hat.trace()),
                "N={antennas} seed {seed}: residual {}",
                sol.rank_residual / p.pmax
            );
            let emitted = sol.rank_one_covariance();
            assert!(p.constraint_violation(&emitted).unwrap() <= 1e-8);
            assert!(p.constraint_violation(&sol.v).unwrap() <= 1e-8);
            let recomputed = p.secrecy_ratio(&emitted);
            assert!((recomputed - sol.secrecy_objective).abs() <= 1e-12 * recomputed);
        }
    }
}

#[test]
fn penalized_objective_never_drops_between_outer_iterations() {
    let config = ScenarioConfig::reference();
    for seed in 0..10 {
        let real = sample_realization(&config, seed);
        let ch = channels(&fpa_layout(&config).unwrap(), &real);
        let cap = CovertBudget::new(config.epsilon, config.noise_power).unwrap().power_cap;
        let p = BeamformingProblem::new(ch[Link::Bob].gram(), ch[Link::Eve].gram(), ch[Link::Willie].gram(), config.noise_power, config.pmax, cap).unwrap();
        let sol = solve_beamforming(&p).unwrap();
        assert!(sol.converged, "seed {seed}");
        let betas: Vec<f64> = sol.trace.iter().map(|t| t.beta1).collect();
        for w in betas.windows(2) {
            assert!(w[1] >= w[0] - 1e-8 * w[0].abs(), "seed {seed}: {betas:?}");
        }
        for it in &sol.trace {
            assert!(it.penalized_after >= it.penalized_before - 1e-8 * (1.0 + it.penalized_before.abs()));
        }
    }
}

#[test]
fn zero_tolerance_steers_a_null_at_the_warden() {
    let mut config = small_config(4);
    config.epsilon = 0.0;
    for seed in 0..5 {
        let p = problem_for(&config, 300 + seed);
        let sol = solve_beamforming(&p).unwrap();
        let leak = p.h_willie.trace_product(&sol.rank_one_covariance());
        assert!(leak <= 1e-8 * p.noise_power, "seed {seed}: {leak:e}");
        assert!(sol.secrecy_objective >= 1.0);
    }
}

#[test]
fn product_surrogate_majorizes_and_touches() {
    let mut r = rng(77);
    for _ in 0..10_000 {
        let (b1m, b2m) = (r.gen_range(1e-3..50.0), r.gen_range(1e-3..50.0));
        let (b1, b2) = (r.gen_range(1e-3..50.0), r.gen_range(1e-3..50.0));
        let f = beta_product_surrogate(b1, b2, b1m, b2m);
        assert!(f >= b1 * b2 - 1e-9 * (1.0 + f.abs()));
        let at = beta_product_surrogate(b1m, b2m, b1m, b2m);
        assert!((at - b1m * b2m).abs() <= 1e-9 * (1.0 + at.abs()));
    }
}

#[test]
fn silent_channels_give_unit_ratio() {
    let config = small_config(3);
    let z = HermitianMat::zeros(3);
    let p = BeamformingProblem::new(z.clone(), z.clone(), z, config.noise_power, config.pmax, 1e-12).unwrap();
    let sol = solve_beamforming(&p).unwrap();
    assert_eq!(sol.secrecy_objective, 1.0);
}
