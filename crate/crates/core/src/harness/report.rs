use std::io::Write;

use csv::{Terminator, WriterBuilder};

use super::{ExperimentResult, SummaryRow};
use crate::error::Result;

pub const SERIES_HEADER: [&str; 11] = [
    "experiment",
    "agent",
    "run",
    "episode",
    "phase",
    "score",
    "positives",
    "negatives",
    "steps",
    "pos_rate",
    "pos_rate_roll10",
];

pub const SUMMARY_HEADER: [&str; 4] = ["experiment", "agent", "metric", "value"];

fn cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Episode rows for the given results, train phases before test phases.
pub fn write_series_csv<W: Write>(out: W, results: &[&ExperimentResult]) -> Result<()> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for result in results {
        for series in result.train.iter().chain(&result.test) {
            let rates = series.pos_rates();
            let rolling = series.rolling_pos_rates();
            for (episode, row) in series.rows.iter().enumerate() {
                w.write_record([
                    result.experiment.clone(),
                    result.agent.to_string(),
                    series.run.to_string(),
                    episode.to_string(),
                    series.phase.to_string(),
                    row.score.to_string(),
                    row.positives.to_string(),
                    row.negatives.to_string(),
                    row.steps.to_string(),
                    cell(rates[episode]),
                    cell(rolling[episode]),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        w.write_record([
            row.experiment.clone(),
            row.agent.to_string(),
            row.metric.to_owned(),
            cell(row.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}
