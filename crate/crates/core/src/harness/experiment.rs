use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ao::{eas_candidates, fpa_layout, init_layout, run_scheme, Scheme};
use crate::channel::sample_realization;
use crate::config::{dbm_to_watts, ScenarioConfig};
use crate::error::{Error, Result};
use crate::seed::derive;

/// Key separating channel-realization seeds from scheme seeds.
const CHANNEL_STREAM: u64 = 0x6368_616e;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Alice's power budget in dBm.
    PmaxDbm,
    Epsilon,
}

impl SweepAxis {
    /// Column name used in CSV output.
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::PmaxDbm => "pmax_dbm",
            SweepAxis::Epsilon => "epsilon",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::PmaxDbm => "P_max (dBm)",
            SweepAxis::Epsilon => "epsilon",
        }
    }

    pub fn apply(self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::PmaxDbm => c.pmax = dbm_to_watts(value),
            SweepAxis::Epsilon => c.epsilon = value,
        }
        c
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pmax" | "pmax_dbm" => Ok(SweepAxis::PmaxDbm),
            "epsilon" | "eps" => Ok(SweepAxis::Epsilon),
            other => Err(Error::Config(format!("unknown sweep axis {other:?} (expected pmax or epsilon)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub base: ScenarioConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub master_seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn new(base: ScenarioConfig, axis: SweepAxis, values: Vec<f64>, schemes: Vec<Scheme>, trials: usize, master_seed: u64) -> Self {
        Self {
            base,
            axis,
            values,
            schemes,
            trials,
            master_seed,
            jobs: 0,
        }
    }

    /// Checks the sweep and every per-point configuration, including that
    /// each requested scheme can build its layouts.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("need at least one trial".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("need at least one scheme".into()));
        }
        let mut sorted = self.schemes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.schemes.len() {
            return Err(Error::Config("schemes must not repeat".into()));
        }
        for &v in &self.values {
            let c = self.config_at(v);
            c.validate()?;
            for s in &self.schemes {
                match s {
                    Scheme::Proposed => init_layout(&c, 0).map(drop)?,
                    Scheme::Fpa => fpa_layout(&c).map(drop)?,
                    Scheme::Eas => eas_candidates(&c).map(drop)?,
                    Scheme::Rpa => {}
                }
            }
        }
        Ok(())
    }

    pub fn config_at(&self, value: f64) -> ScenarioConfig {
        self.axis.apply(&self.base, value)
    }

    /// Seed of the channel realization of `trial`; shared by every scheme
    /// and sweep point so that comparisons are paired.
    pub fn channel_seed(&self, trial: usize) -> u64 {
        derive(self.master_seed, &[CHANNEL_STREAM, trial as u64])
    }

    /// Seed of a scheme's own randomness (initial or random layout).
    pub fn scheme_seed(&self, scheme: Scheme, trial: usize) -> u64 {
        derive(self.master_seed, &[scheme as u64 + 1, trial as u64])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scheme: Scheme,
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub trial: usize,
    /// Channel-realization seed.
    pub seed: u64,
    /// `None` on success, otherwise the error message.
    pub error: Option<String>,
    pub secrecy_rate_raw: f64,
    pub secrecy_rate: f64,
    /// `Tr(H_w V)` in watts.
    pub willie_power: f64,
    /// `(cap − Tr(H_w V)) / σ²`.
    pub covert_slack: f64,
    pub rounds: usize,
    pub converged: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scheme: Scheme,
    pub sweep_value: f64,
    /// Mean clamped secrecy rate over successful trials.
    pub mean: f64,
    /// Sample standard deviation of the same.
    pub std: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

impl Aggregate {
    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.trials_ok == 0 {
            f64::NAN
        } else {
            self.std / (self.trials_ok as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultsTable {
    pub axis: SweepAxis,
    /// Sorted by scheme, sweep index, trial.
    pub records: Vec<TrialRecord>,
    /// Sorted by scheme, sweep value.
    pub aggregates: Vec<Aggregate>,
}

impl ResultsTable {
    /// Sorts the records and recomputes the aggregates from them.
    pub fn from_records(axis: SweepAxis, mut records: Vec<TrialRecord>) -> Self {
        records.sort_by(|a, b| (a.scheme, a.sweep_index, a.trial).cmp(&(b.scheme, b.sweep_index, b.trial)));
        let mut aggregates: Vec<Aggregate> = Vec::new();
        for r in &records {
            let fresh = aggregates
                .last()
                .map_or(true, |a| a.scheme != r.scheme || a.sweep_value != r.sweep_value);
            if fresh {
                aggregates.push(Aggregate {
                    scheme: r.scheme,
                    sweep_value: r.sweep_value,
                    mean: 0.0,
                    std: 0.0,
                    trials_ok: 0,
                    trials_failed: 0,
                });
            }
            let a = aggregates.last_mut().expect("just pushed");
            if r.is_ok() {
                a.trials_ok += 1;
            } else {
                a.trials_failed += 1;
            }
        }
        for a in &mut aggregates {
            let rates: Vec<f64> = records
                .iter()
                .filter(|r| r.scheme == a.scheme && r.sweep_value == a.sweep_value && r.is_ok())
                .map(|r| r.secrecy_rate)
                .collect();
            let (mean, std) = mean_std(&rates);
            a.mean = mean;
            a.std = std;
        }
        Self {
            axis,
            records,
            aggregates,
        }
    }

    pub fn aggregate(&self, scheme: Scheme, sweep_value: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.scheme == scheme && a.sweep_value == sweep_value)
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        let mut s: Vec<Scheme> = self.aggregates.iter().map(|a| a.scheme).collect();
        s.dedup();
        s
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_trial(spec: &ExperimentSpec, scheme: Scheme, sweep_index: usize, trial: usize) -> TrialRecord {
    let value = spec.values[sweep_index];
    let config = spec.config_at(value);
    let seed = spec.channel_seed(trial);
    let start = Instant::now();
    let realization = sample_realization(&config, seed);
    let outcome = run_scheme(scheme, &config, &realization, spec.scheme_seed(scheme, trial));
    let mut record = TrialRecord {
        scheme,
        sweep_index,
        sweep_value: value,
        trial,
        seed,
        error: None,
        secrecy_rate_raw: f64::NAN,
        secrecy_rate: f64::NAN,
        willie_power: f64::NAN,
        covert_slack: f64::NAN,
        rounds: 0,
        converged: false,
        wall_time: Duration::ZERO,
    };
    match outcome {
        Ok(sol) => {
            record.secrecy_rate_raw = sol.secrecy_rate_raw;
            record.secrecy_rate = sol.secrecy_rate;
            record.willie_power = sol.covertness.willie_power;
            record.covert_slack = sol.covertness.relative_slack;
            record.rounds = sol.rounds();
            record.converged = sol.converged;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record.wall_time = start.elapsed();
    record
}

/// Runs every (scheme, sweep point, trial) combination on a worker pool.
/// Failed trials are recorded, not propagated.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultsTable> {
    spec.validate()?;
    let work: Vec<(Scheme, usize, usize)> = spec
        .schemes
        .iter()
        .flat_map(|&s| (0..spec.values.len()).flat_map(move |i| (0..spec.trials).map(move |t| (s, i, t))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let records = pool.install(|| {
        work.par_iter()
            .map(|&(s, i, t)| run_trial(spec, s, i, t))
            .collect::<Vec<_>>()
    });
    Ok(ResultsTable::from_records(spec.axis, records))
}
