// Covert beamforming for a fixed half-wavelength array: the penalty loop
// trace, the rank of the result and the margin left under the covert cap.

use fascovert::ao::{beamform, fpa_layout};
use fascovert::beamforming::BeamSolution;
use fascovert::channel::{channels, sample_realization};
use fascovert::config::{Link, ScenarioConfig};
use fascovert::covertness::{verify_covertness, CovertBudget};

pub fn run_example() -> fascovert::Result<BeamSolution> {
    let config = ScenarioConfig::reference();
    let real = sample_realization(&config, 11);
    let layout = fpa_layout(&config)?;
    let sol = beamform(&config, &layout, &real, None)?;
    for (k, it) in sol.trace.iter().enumerate() {
        println!(
            "iter {k:>2}  eta {:>8.3}  beta1 {:.6}  rank residual {:.2e}",
            it.eta, it.beta1, it.rank_residual
        );
    }
    let budget = CovertBudget::new(config.epsilon, config.noise_power)?;
    let ch = channels(&layout, &real);
    let report = verify_covertness(&ch[Link::Willie], &sol.rank_one_covariance(), &budget)?;
    println!(
        "secrecy rate {:.4} bit/s/Hz, power {:.4} W of {:.4}, cap slack {:.3}σ², DEP >= {:.4}",
        sol.secrecy_objective.log2(),
        sol.rank_one_covariance().trace(),
        config.pmax,
        report.relative_slack,
        report.dep_bound
    );
    Ok(sol)
}

#[allow(dead_code)]
fn main() -> fascovert::Result<()> {
    run_example().map(drop)
}
