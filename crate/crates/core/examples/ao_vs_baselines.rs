// Every scheme on the same few channel draws.

use fascovert::ao::{run_scheme, Scheme};
use fascovert::channel::sample_realization;
use fascovert::config::ScenarioConfig;

pub fn run_example() -> fascovert::Result<Vec<(Scheme, f64)>> {
    let config = ScenarioConfig::reference();
    let draws = 3;
    let mut means = Vec::new();
    for scheme in Scheme::ALL {
        let mut total = 0.0;
        for seed in 0..draws {
            let real = sample_realization(&config, seed);
            let sol = run_scheme(scheme, &config, &real, seed)?;
            println!(
                "{scheme:>8} draw {seed}: {:.4} bit/s/Hz after {} round(s){}",
                sol.secrecy_rate,
                sol.rounds(),
                if sol.converged { "" } else { " (round cap)" }
            );
            total += sol.secrecy_rate;
        }
        means.push((scheme, total / draws as f64));
    }
    for (s, m) in &means {
        println!("{s:>8} mean {m:.4}");
    }
    Ok(means)
}

#[allow(dead_code)]
fn main() -> fascovert::Result<()> {
    run_example().map(drop)
}
