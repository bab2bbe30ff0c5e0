// A small power sweep written to CSV and SVG in a temporary directory.

use fascovert::ao::Scheme;
use fascovert::config::ScenarioConfig;
use fascovert::harness::{emit_plot, run_experiment, write_csv, ExperimentSpec, ResultsTable, SweepAxis};

pub fn run_example() -> fascovert::Result<ResultsTable> {
    let spec = ExperimentSpec::new(
        ScenarioConfig::reference(),
        SweepAxis::PmaxDbm,
        vec![0.0, 10.0, 20.0],
        vec![Scheme::Proposed, Scheme::Fpa],
        2,
        1,
    );
    let table = run_experiment(&spec)?;
    let dir = std::env::temp_dir().join(format!("fascovert-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| fascovert::Error::io(&dir, e))?;
    write_csv(&table, dir.join("pmax.csv"))?;
    emit_plot(&table, dir.join("pmax.svg"))?;
    for a in &table.aggregates {
        println!("{:>8} {:>5} dBm  mean {:.4}  std {:.4}", a.scheme.name(), a.sweep_value, a.mean, a.std);
    }
    println!("wrote {}", dir.display());
    std::fs::remove_dir_all(&dir).map_err(|e| fascovert::Error::io(&dir, e))?;
    Ok(table)
}

#[allow(dead_code)]
fn main() -> fascovert::Result<()> {
    run_example().map(drop)
}
