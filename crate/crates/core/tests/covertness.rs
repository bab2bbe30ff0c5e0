mod common;

use common::{bisect, rng, simpson};
use fascovert::channel::Channel;
use fascovert::covertness::{covert_power_cap, covert_roots, dep_lower_bound, kl_divergence, verify_covertness, CovertBudget};
use fascovert::numerics::{lambert_w, Branch, HermitianMat, C64};
use rand::Rng;

const EPSILONS: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.5];

fn root_equation(eps: f64) -> impl Fn(f64) -> f64 {
    move |a: f64| a.ln() + 1.0 / a - (1.0 + 2.0 * eps * eps)
}

/// KL of the received-power densities: `|y|²` is exponential with mean δ.
fn kl_by_quadrature(d0: f64, d1: f64) -> f64 {
    let integrand = |r: f64| (-r / d0).exp() / d0 * ((d1 / d0).ln() - r / d0 + r / d1);
    simpson(integrand, 0.0, 80.0 * d0, 40_000)
}

#[test]
fn roots_satisfy_their_equation() {
    for eps in EPSILONS {
        let (a1, a2) = covert_roots(eps).unwrap();
        let f = root_equation(eps);
        assert!(f(a1).abs() <= 1e-10, "eps {eps}: a1 residual {}", f(a1));
        assert!(f(a2).abs() <= 1e-10, "eps {eps}: a2 residual {}", f(a2));
        assert!(a1 < 1.0 && a2 > 1.0);
    }
}

#[test]
fn roots_match_bisection() {
    for eps in EPSILONS {
        let (a1, a2) = covert_roots(eps).unwrap();
        let f = root_equation(eps);
        let b1 = bisect(&f, 1e-6, 1.0);
        let b2 = bisect(&f, 1.0, 100.0);
        assert!((a1 - b1).abs() <= 1e-9, "eps {eps}: {a1} vs {b1}");
        assert!((a2 - b2).abs() <= 1e-9, "eps {eps}: {a2} vs {b2}");
    }
}

#[test]
fn kl_matches_quadrature() {
    let mut r = rng(11);
    for _ in 0..20 {
        let d0 = 10f64.powf(r.gen_range(-12.0..0.0));
        let d1 = d0 * r.gen_range(0.2..5.0);
        let exact = kl_divergence(d0, d1).unwrap();
        let numeric = kl_by_quadrature(d0, d1);
        assert!((exact - numeric).abs() <= 1e-6, "{d0} {d1}: {exact} vs {numeric}");
    }
}

#[test]
fn cap_equals_kl_boundary() {
    for eps in EPSILONS {
        let sigma2 = 1e-11;
        let cap = covert_power_cap(eps, sigma2).unwrap();
        let kl = kl_divergence(sigma2, sigma2 + cap).unwrap();
        assert!((kl - 2.0 * eps * eps).abs() <= 1e-10, "eps {eps}");
        let dep = dep_lower_bound(sigma2, sigma2 + cap).unwrap();
        assert!((dep - (1.0 - eps)).abs() <= 1e-9);
    }
}

#[test]
fn zero_tolerance_means_zero_cap() {
    assert_eq!(covert_roots(0.0).unwrap(), (1.0, 1.0));
    assert_eq!(covert_power_cap(0.0, 1.0).unwrap(), 0.0);
    assert!(covert_roots(-0.1).is_err());
    assert!(covert_roots(1.5).is_err());
}

#[test]
fn lambert_inverts_on_both_branches() {
    let mut r = rng(3);
    for _ in 0..200 {
        let z = r.gen_range(-1.0 / std::f64::consts::E..0.0);
        for b in [Branch::Principal, Branch::MinusOne] {
            let w = lambert_w(b, z).unwrap();
            assert!((w * w.exp() - z).abs() <= 1e-13 * (1.0 + z.abs()));
        }
        assert!(lambert_w(Branch::Principal, z).unwrap() >= -1.0);
        assert!(lambert_w(Branch::MinusOne, z).unwrap() <= -1.0);
    }
}

#[test]
fn verify_reports_slack_in_noise_units() {
    let h = Channel::from_row(vec![C64::new(1e-5, 0.0), C64::new(0.0, 2e-5)]);
    let budget = CovertBudget::new(0.2, 1e-11).unwrap();
    // power just below and above the cap along the channel direction
    let dir = h.column();
    let g = 5e-10f64;
    for (scale, ok) in [(0.999, true), (1.001, false)] {
        let p = scale * budget.power_cap / (g * g);
        let v = HermitianMat::outer(&[dir[0] * p.sqrt(), dir[1] * p.sqrt()]);
        let rep = verify_covertness(&h, &v, &budget).unwrap();
        assert_eq!(rep.feasible, ok);
        assert!((rep.relative_slack - (1.0 - scale) * budget.normalized_cap()).abs() < 1e-9);
    }
}
