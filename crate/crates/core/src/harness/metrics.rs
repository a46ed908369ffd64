//! Per-episode rows, derived series, and cross-run aggregation.

use std::fmt;

use crate::agent::AgentKind;

pub const ROLLING_WINDOW: usize = 10;
pub const FINAL_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Train,
    Test,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Train => "train",
            Phase::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRow {
    pub score: f64,
    pub positives: u32,
    pub negatives: u32,
    pub steps: u32,
    pub truncated: bool,
}

impl EpisodeRow {
    /// Share of positives among collected objects; `None` when nothing was collected.
    pub fn pos_rate(&self) -> Option<f64> {
        let total = self.positives + self.negatives;
        (total > 0).then(|| self.positives as f64 / total as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub run: usize,
    pub phase: Phase,
    pub rows: Vec<EpisodeRow>,
}

/// Mean over the defined entries; `None` if there are none.
pub fn mean_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Trailing mean over up to `window` entries ending at each index, skipping blanks.
pub fn rolling_mean(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    (0..values.len())
        .map(|i| mean_defined(values[(i + 1).saturating_sub(window)..=i].iter().copied()))
        .collect()
}

/// Least-squares slope of `ys` against their index.
pub fn slope(ys: &[f64]) -> Option<f64> {
    let n = ys.len();
    if n < 2 {
        return None;
    }
    let mean_x = (n - 1) as f64 / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    Some(sxy / sxx)
}

impl RunSeries {
    pub fn pos_rates(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(EpisodeRow::pos_rate).collect()
    }

    pub fn rolling_pos_rates(&self) -> Vec<Option<f64>> {
        rolling_mean(&self.pos_rates(), ROLLING_WINDOW)
    }

    pub fn cumulative_scores(&self) -> Vec<f64> {
        self.rows
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r.score;
                Some(*acc)
            })
            .collect()
    }

    fn tail<T: Clone>(items: &[T], n: usize) -> &[T] {
        &items[items.len().saturating_sub(n)..]
    }

    pub fn mean_score_last(&self, n: usize) -> Option<f64> {
        mean_defined(Self::tail(&self.rows, n).iter().map(|r| Some(r.score)))
    }

    pub fn mean_pos_rate_last(&self, n: usize) -> Option<f64> {
        mean_defined(Self::tail(&self.pos_rates(), n).iter().copied())
    }

    pub fn mean_rolling_pos_rate_last(&self, n: usize) -> Option<f64> {
        mean_defined(Self::tail(&self.rolling_pos_rates(), n).iter().copied())
    }

    pub fn final_score_slope(&self) -> Option<f64> {
        slope(Self::tail(&self.cumulative_scores(), FINAL_WINDOW))
    }

    /// First episode count at which the trailing `window`-episode mean score
    /// reaches `threshold`; needs a full window.
    pub fn episodes_to_reach(&self, window: usize, threshold: f64) -> Option<usize> {
        if window == 0 || self.rows.len() < window {
            return None;
        }
        let mut sum: f64 = self.rows[..window].iter().map(|r| r.score).sum();
        if sum / window as f64 >= threshold {
            return Some(window);
        }
        for i in window..self.rows.len() {
            sum += self.rows[i].score - self.rows[i - window].score;
            if sum / window as f64 >= threshold {
                return Some(i + 1);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub agent: AgentKind,
    pub metric: &'static str,
    pub value: Option<f64>,
}

fn across_runs(series: &[RunSeries], f: impl Fn(&RunSeries) -> Option<f64>) -> Option<f64> {
    mean_defined(series.iter().map(f))
}

/// Cross-run means of the headline quantities for one agent.
pub fn summarize(experiment: &str, agent: AgentKind, train: &[RunSeries], test: &[RunSeries]) -> Vec<SummaryRow> {
    let row = |metric, value| SummaryRow {
        experiment: experiment.to_owned(),
        agent,
        metric,
        value,
    };
    let mut rows = vec![
        row("final_score_slope", across_runs(train, RunSeries::final_score_slope)),
        row("final100_score", across_runs(train, |s| s.mean_score_last(FINAL_WINDOW))),
        row("final100_pos_rate", across_runs(train, |s| s.mean_pos_rate_last(FINAL_WINDOW))),
        row(
            "final100_pos_rate_roll10",
            across_runs(train, |s| s.mean_rolling_pos_rate_last(FINAL_WINDOW)),
        ),
    ];
    if !test.is_empty() {
        rows.push(row("test_score", across_runs(test, |s| s.mean_score_last(usize::MAX))));
        rows.push(row("test_pos_rate", across_runs(test, |s| s.mean_pos_rate_last(usize::MAX))));
    }
    rows
}
