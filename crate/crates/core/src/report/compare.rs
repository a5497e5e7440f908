use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::run::{read_summary, summary_means, RunSummary};
use crate::error::{Error, Result};

/// Rows of the comparison table, in output order.
pub const COMPARE_METRICS: [&str; 10] = [
    "c_vsl", "c_medical", "c_prod", "c_build", "c_cic", "nei", "total", "mean_rr", "n_death", "n_injured",
];

/// Mean metrics of several runs side by side, with percentage changes
/// relative to the first run.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Column labels; repeated scenarios get a `#k` suffix.
    pub labels: Vec<String>,
    /// `(metric, value per run)`.
    pub rows: Vec<(&'static str, Vec<f64>)>,
}

/// `100 · (value − reference) / reference`; zero when both are zero.
pub fn percent_change(reference: f64, value: f64) -> f64 {
    if reference == 0.0 {
        if value == 0.0 {
            0.0
        } else {
            f64::NAN
        }
    } else {
        100.0 * (value - reference) / reference
    }
}

/// Reduction of `value` relative to `reference`, in percent.
pub fn percent_reduction(reference: f64, value: f64) -> f64 {
    -percent_change(reference, value)
}

pub fn compare_summaries(summaries: &[RunSummary]) -> Result<Comparison> {
    if summaries.len() < 2 {
        return Err(Error::Config("compare needs at least two runs".into()));
    }
    let hash = &summaries[0].population_hash;
    if let Some(s) = summaries.iter().find(|s| &s.population_hash != hash) {
        return Err(Error::Mismatch(format!(
            "population hash {} of the {} run differs from {}; comparisons must share one population",
            s.population_hash, s.scenario, hash
        )));
    }
    let mut labels = Vec::new();
    for s in summaries {
        let base = s.scenario.label().to_string();
        let seen = labels.iter().filter(|l: &&String| l.split('#').next() == Some(base.as_str())).count();
        labels.push(if seen == 0 { base } else { format!("{base}#{}", seen + 1) });
    }
    let means: Vec<_> = summaries.iter().map(summary_means).collect();
    let rows = COMPARE_METRICS
        .iter()
        .map(|&m| (m, means.iter().map(|row| row[m]).collect()))
        .collect();
    Ok(Comparison { labels, rows })
}

pub fn compare_scenarios<P: AsRef<Path>>(dirs: &[P]) -> Result<Comparison> {
    let summaries = dirs.iter().map(|d| read_summary(d.as_ref())).collect::<Result<Vec<_>>>()?;
    compare_summaries(&summaries)
}

fn fmt_pct(v: f64) -> String {
    if v.is_nan() {
        "n/a".into()
    } else {
        format!("{v:.2}")
    }
}

impl Comparison {
    pub fn value(&self, metric: &str, column: usize) -> Option<f64> {
        self.rows.iter().find(|(m, _)| *m == metric).map(|(_, v)| v[column])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Runtime(format!("comparison CSV: {e}"));
        let mut header = vec!["metric".to_string()];
        header.extend(self.labels.iter().cloned());
        header.extend(self.labels[1..].iter().map(|l| format!("pct_vs_{}_{l}", self.labels[0])));
        writeln!(w, "{}", header.join(",")).map_err(io)?;
        for (metric, values) in &self.rows {
            let mut cells = vec![metric.to_string()];
            cells.extend(values.iter().map(|v| format!("{v:.6}")));
            cells.extend(values[1..].iter().map(|&v| fmt_pct(percent_change(values[0], v))));
            writeln!(w, "{}", cells.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Fixed-width table for the terminal.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<10}", "metric");
        for l in &self.labels {
            let _ = write!(out, " {l:>18}");
        }
        for l in &self.labels[1..] {
            let _ = write!(out, " {:>12}", format!("Δ% {l}"));
        }
        out.push('\n');
        for (metric, values) in &self.rows {
            let _ = write!(out, "{metric:<10}");
            for v in values {
                if *metric == "mean_rr" {
                    let _ = write!(out, " {v:>18.5}");
                } else {
                    let _ = write!(out, " {v:>18.2}");
                }
            }
            for &v in &values[1..] {
                let _ = write!(out, " {:>12}", fmt_pct(percent_change(values[0], v)));
            }
            out.push('\n');
        }
        out
    }
}
