// One majorize-minimize move per antenna with the beamformer held fixed.

use fascovert::ao::{beamform, init_layout};
use fascovert::channel::sample_realization;
use fascovert::config::ScenarioConfig;
use fascovert::covertness::CovertBudget;
use fascovert::positions::{secrecy_ratio, solve_position_subproblem};

pub fn run_example() -> fascovert::Result<(f64, f64)> {
    let config = ScenarioConfig::reference();
    let real = sample_realization(&config, 3);
    let budget = CovertBudget::new(config.epsilon, config.noise_power)?;
    let mut layout = init_layout(&config, 3)?;
    let beam = beamform(&config, &layout, &real, None)?.beamformer;
    let start = secrecy_ratio(&layout, &beam, &real, config.noise_power);
    println!("start ratio {start:.6}");
    for n in 0..layout.len() {
        let step = solve_position_subproblem(n, &layout, &beam, &real, &config, &budget)?;
        let from = layout.positions[n];
        layout.positions[n] = step.position;
        println!(
            "antenna {n}: ({:+.4}, {:+.4}) -> ({:+.4}, {:+.4})  ratio {:.6} -> {:.6}",
            from.x, from.y, step.position.x, step.position.y, step.objective_before, step.objective_after
        );
    }
    let end = secrecy_ratio(&layout, &beam, &real, config.noise_power);
    Ok((start, end))
}

#[allow(dead_code)]
fn main() -> fascovert::Result<()> {
    run_example().map(drop)
}
