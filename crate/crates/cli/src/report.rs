//! Result artifacts: per-iteration CSV traces, run summaries and sweep tables.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use cvoa::engine::{IterationRecord, Termination};
use cvoa::Objective;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::CodecConfig;
use crate::error::CliError;

pub const ITERATIONS_HEADER: [&str; 5] = ["Iteration", "Deaths", "Recovered", "Infected", "Fitness"];

/// Outcome of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    /// First iteration whose best-so-far fitness equals the known optimum.
    pub iterations_to_optimum: Option<u32>,
    pub best_fitness: f64,
    pub best_genotype: String,
    pub evaluations_total: u64,
    /// `evaluations_total` over the search-space size.
    pub evaluated_fraction: Option<f64>,
    pub iterations: u32,
    pub termination: Termination,
    /// `deaths / (deaths + recovered)` from the last iteration record.
    pub dead_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean over the runs that reached the optimum.
    pub mean_iterations_to_optimum: Option<f64>,
    /// Median over all runs, counting a run that never reached the optimum as
    /// infinitely slow; absent when that median is infinite.
    pub median_iterations_to_optimum: Option<f64>,
    pub mean_evaluated_fraction: Option<f64>,
    pub mean_dead_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub codec: CodecConfig,
    pub search_space_size: Option<u128>,
    pub strains: u32,
    pub runs: Vec<RunRecord>,
    pub aggregates: Aggregates,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Median of `values`, with `None` standing for +∞.
pub fn median_with_failures(values: &[Option<u32>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<u64> = values.iter().map(|v| v.map_or(u64::MAX, u64::from)).collect();
    sorted.sort_unstable();
    let n = sorted.len();
    let (a, b) = if n % 2 == 1 { (sorted[n / 2], sorted[n / 2]) } else { (sorted[n / 2 - 1], sorted[n / 2]) };
    (b != u64::MAX).then(|| (a as f64 + b as f64) / 2.0)
}

impl Aggregates {
    pub fn from_runs(runs: &[RunRecord]) -> Self {
        let reached: Vec<Option<u32>> = runs.iter().map(|r| r.iterations_to_optimum).collect();
        let successes = reached.iter().flatten().count();
        Aggregates {
            runs: runs.len(),
            successes,
            success_rate: if runs.is_empty() { 0.0 } else { successes as f64 / runs.len() as f64 },
            mean_iterations_to_optimum: mean(reached.iter().flatten().map(|&i| f64::from(i))),
            median_iterations_to_optimum: median_with_failures(&reached),
            mean_evaluated_fraction: mean(runs.iter().filter_map(|r| r.evaluated_fraction)),
            mean_dead_fraction: mean(runs.iter().filter_map(|r| r.dead_fraction)),
        }
    }
}

/// Merges per-strain traces into one: counters are summed, fitness is the
/// best over strains, and a strain that already stopped keeps contributing
/// its last record.
pub fn combine_histories(strains: &[Vec<IterationRecord>], objective: Objective) -> Vec<IterationRecord> {
    let len = strains.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let rows: Vec<&IterationRecord> =
                strains.iter().filter_map(|h| h.get(i).or_else(|| h.last())).collect();
            let mut combined = rows[0].clone();
            combined.iteration = i as u32 + 1;
            for row in &rows[1..] {
                combined.deaths_total += row.deaths_total;
                combined.recovered_total += row.recovered_total;
                combined.infected_count += row.infected_count;
                combined.evaluations_total += row.evaluations_total;
                combined.isolated_total += row.isolated_total;
                combined.reinfected_total += row.reinfected_total;
                if objective.improves(row.best_fitness, combined.best_fitness) {
                    combined.best_fitness = row.best_fitness;
                }
            }
            combined
        })
        .collect()
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_owned(), source }
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_owned(), source: e.into() }
}

/// Writes an `iterations.csv` trace.
pub fn write_iterations(path: &Path, history: &[IterationRecord]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error(path))?;
    writer.write_record(ITERATIONS_HEADER).map_err(csv_error(path))?;
    for r in history {
        writer
            .write_record([
                r.iteration.to_string(),
                r.deaths_total.to_string(),
                r.recovered_total.to_string(),
                r.infected_count.to_string(),
                r.best_fitness.to_string(),
            ])
            .map_err(csv_error(path))?;
    }
    writer.flush().map_err(io_error(path))
}

/// Pretty JSON that prints every float as a plain decimal literal.
struct DecimalFormatter(PrettyFormatter<'static>);

impl Formatter for DecimalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // `Display` for f64 never uses exponent notation.
        if value.fract() == 0.0 {
            write!(writer, "{value:.1}")
        } else {
            write!(writer, "{value}")
        }
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as UTF-8 JSON with fields in declaration order.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, DecimalFormatter(PrettyFormatter::new()));
    value.serialize(&mut serializer).expect("report types serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(io_error(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, format!("{text}\n")).map_err(io_error(path))
}

/// One row of a length sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub bits: u32,
    pub aggregates: Aggregates,
}

pub const SWEEP_HEADER: [&str; 6] =
    ["Bits", "Runs", "Successes", "MeanIterationsToOptimum", "MedianIterationsToOptimum", "EvaluatedFraction"];

fn optional(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(SWEEP_HEADER)?;
    for row in rows {
        let a = &row.aggregates;
        writer.write_record([
            row.bits.to_string(),
            a.runs.to_string(),
            a.successes.to_string(),
            optional(a.mean_iterations_to_optimum),
            optional(a.median_iterations_to_optimum),
            optional(a.mean_evaluated_fraction),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, reached: Option<u32>) -> RunRecord {
        RunRecord {
            seed,
            iterations_to_optimum: reached,
            best_fitness: if reached.is_some() { 0.0 } else { 4.0 },
            best_genotype: "0000001111".into(),
            evaluations_total: 64,
            evaluated_fraction: Some(0.0625),
            iterations: 30,
            termination: Termination::DurationReached,
            dead_fraction: Some(0.05),
        }
    }

    #[test]
    fn median_counts_failures_as_infinite() {
        assert_eq!(median_with_failures(&[Some(3), None, Some(5)]), Some(5.0));
        assert_eq!(median_with_failures(&[Some(3), Some(4), None, Some(10)]), Some(7.0));
        assert_eq!(median_with_failures(&[Some(3), None]), None);
        assert_eq!(median_with_failures(&[]), None);
    }

    #[test]
    fn success_rate_matches_reached_runs() {
        let runs = vec![record(0, Some(4)), record(1, None), record(2, Some(8)), record(3, None)];
        let a = Aggregates::from_runs(&runs);
        assert_eq!(a.successes, 2);
        assert_eq!(a.success_rate, 0.5);
        assert_eq!(a.mean_iterations_to_optimum, Some(6.0));
        assert_eq!(a.median_iterations_to_optimum, None);
    }

    #[test]
    fn json_uses_plain_decimals_in_field_order() {
        let mut r = record(7, Some(2));
        r.evaluated_fraction = Some(1.0e-10);
        let json = to_json(&r);
        assert!(json.contains("\"evaluated_fraction\": 0.0000000001"), "{json}");
        assert!(json.contains("\"best_fitness\": 0.0"));
        assert!(!json.contains("e-"));
        let keys: Vec<usize> = ["seed", "iterations_to_optimum", "best_fitness", "dead_fraction"]
            .iter()
            .map(|k| json.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["evaluated_fraction"], 1.0e-10);
    }

    #[test]
    fn combined_history_keeps_stopped_strains() {
        let row = |iteration, infected, fitness| IterationRecord {
            iteration,
            deaths_total: 1,
            recovered_total: 2,
            infected_count: infected,
            best_fitness: fitness,
            evaluations_total: 3,
            isolated_total: 0,
            reinfected_total: 0,
        };
        let a = vec![row(1, 4, 9.0), row(2, 0, 1.0)];
        let b = vec![row(1, 5, 4.0)];
        let combined = combine_histories(&[a, b], Objective::Minimize);
        assert_eq!(combined.len(), 2);
        assert_eq!(combined[0].infected_count, 9);
        assert_eq!(combined[0].best_fitness, 4.0);
        assert_eq!(combined[1].deaths_total, 2);
        assert_eq!(combined[1].infected_count, 5);
        assert_eq!(combined[1].best_fitness, 1.0);
    }

    #[test]
    fn sweep_table_leaves_missing_values_empty() {
        let rows = vec![SweepRow { bits: 10, aggregates: Aggregates::from_runs(&[record(0, None)]) }];
        let mut out = Vec::new();
        write_sweep(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().nth(1), Some("10,1,0,,,0.0625"));
    }
}
