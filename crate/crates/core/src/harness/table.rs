//! CSV form of a [`ResultsTable`]: a trial block, a blank line, then an
//! aggregate block. Floats carry nine significant digits; wall-clock times
//! are left out so identical runs produce identical bytes.

use std::path::Path;

use super::experiment::{Aggregate, ResultsTable, SweepAxis, TrialRecord};
use crate::ao::Scheme;
use crate::error::{Error, Result};

const TRIAL_TAIL: [&str; 9] = [
    "trial",
    "seed",
    "status",
    "secrecy_rate_raw",
    "secrecy_rate",
    "willie_power_w",
    "covert_slack",
    "rounds",
    "converged",
];
const AGGREGATE_TAIL: [&str; 4] = ["mean_secrecy_rate", "std_secrecy_rate", "trials_ok", "trials_failed"];

pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn header(axis: SweepAxis, tail: &[&str]) -> Vec<String> {
    ["scheme", axis.column()]
        .iter()
        .chain(tail)
        .map(|s| s.to_string())
        .collect()
}

pub fn to_csv_string(table: &ResultsTable) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header(table.axis, &TRIAL_TAIL)).expect("in-memory write");
    for r in &table.records {
        let status = match &r.error {
            None => "ok".to_string(),
            Some(msg) => format!("error: {msg}"),
        };
        w.write_record([
            r.scheme.name().to_string(),
            format_float(r.sweep_value),
            r.trial.to_string(),
            r.seed.to_string(),
            status,
            format_float(r.secrecy_rate_raw),
            format_float(r.secrecy_rate),
            format_float(r.willie_power),
            format_float(r.covert_slack),
            r.rounds.to_string(),
            r.converged.to_string(),
        ])
        .expect("in-memory write");
    }
    let mut out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input");
    if table.aggregates.is_empty() {
        return out;
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header(table.axis, &AGGREGATE_TAIL)).expect("in-memory write");
    for a in &table.aggregates {
        w.write_record([
            a.scheme.name().to_string(),
            format_float(a.sweep_value),
            format_float(a.mean),
            format_float(a.std),
            a.trials_ok.to_string(),
            a.trials_failed.to_string(),
        ])
        .expect("in-memory write");
    }
    out.push('\n');
    out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8 input"));
    out
}

pub fn write_csv(table: &ResultsTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv_string(table)).map_err(|e| Error::io(path, e))
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {what} from {field:?}")))
}

fn rows(block: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut r = csv::ReaderBuilder::new().from_reader(block.as_bytes());
    let head = r
        .headers()
        .map_err(|e| Error::Config(format!("bad csv header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let records = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Config(format!("bad csv row: {e}")))?;
    Ok((head, records))
}

fn axis_from(head: &[String]) -> Result<SweepAxis> {
    head.get(1)
        .ok_or_else(|| Error::Config("csv header is too short".into()))?
        .parse()
}

pub fn from_csv_str(text: &str) -> Result<ResultsTable> {
    let (trials, aggregates) = match text.find("\n\n") {
        Some(i) => (&text[..=i], Some(&text[i + 2..])),
        None => (text, None),
    };
    let (head, trial_rows) = rows(trials)?;
    let axis = axis_from(&head)?;
    let mut values: Vec<f64> = Vec::new();
    let mut records = Vec::new();
    for row in &trial_rows {
        let f = |i: usize| row.get(i).unwrap_or("");
        let status = f(4);
        let sweep_value: f64 = parse(f(1), "sweep value")?;
        if !values.contains(&sweep_value) {
            values.push(sweep_value);
        }
        records.push(TrialRecord {
            scheme: f(0).parse::<Scheme>()?,
            sweep_index: 0,
            sweep_value,
            trial: parse(f(2), "trial")?,
            seed: parse(f(3), "seed")?,
            error: status.strip_prefix("error: ").map(str::to_string),
            secrecy_rate_raw: parse(f(5), "raw rate")?,
            secrecy_rate: parse(f(6), "rate")?,
            willie_power: parse(f(7), "Willie power")?,
            covert_slack: parse(f(8), "slack")?,
            rounds: parse(f(9), "rounds")?,
            converged: parse(f(10), "converged flag")?,
            wall_time: Default::default(),
        });
    }
    values.sort_by(f64::total_cmp);
    for r in &mut records {
        r.sweep_index = values.iter().position(|&v| v == r.sweep_value).expect("collected above");
    }
    let mut table = ResultsTable::from_records(axis, records);
    if let Some(block) = aggregates {
        let (_, agg_rows) = rows(block)?;
        table.aggregates = agg_rows
            .iter()
            .map(|row| {
                let f = |i: usize| row.get(i).unwrap_or("");
                Ok(Aggregate {
                    scheme: f(0).parse()?,
                    sweep_value: parse(f(1), "sweep value")?,
                    mean: parse(f(2), "mean")?,
                    std: parse(f(3), "std")?,
                    trials_ok: parse(f(4), "ok count")?,
                    trials_failed: parse(f(5), "failure count")?,
                })
            })
            .collect::<Result<_>>()?;
    }
    Ok(table)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<ResultsTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_csv_str(&text).map_err(|e| e.context(format!("reading {}", path.display())))
}
