//! CSV emission and re-parsing for run artifacts.
//!
//! Every file starts with a `# drlcov <kind> v1` comment naming its schema
//! version, then a header row. Floats are written with Rust's shortest
//! round-trip formatting, so re-parsing reproduces the in-memory values
//! exactly and identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::coverage::{CoverageLedger, CoverageRow, COVERAGE_CSV_HEADER};
use crate::maximizer::Branch;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{}: {0}", .1.display())]
    Io(std::io::Error, std::path::PathBuf),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn malformed(line: usize, message: impl Into<String>) -> CsvError {
    CsvError::Malformed { line, message: message.into() }
}

/// Write `text` to `path`, creating parent directories as needed.
pub fn write_file(path: &Path, text: &str) -> Result<(), CsvError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CsvError::Io(e, path.to_path_buf()))?;
    }
    std::fs::write(path, text).map_err(|e| CsvError::Io(e, path.to_path_buf()))
}

pub fn read_file(path: &Path) -> Result<String, CsvError> {
    std::fs::read_to_string(path).map_err(|e| CsvError::Io(e, path.to_path_buf()))
}

/// Split a CSV body into field rows, checking the version comment and the
/// header line. Returns `(line_number, fields)` pairs for data rows.
fn parse_body<'a>(
    text: &'a str,
    kind: &str,
    header: &str,
) -> Result<Vec<(usize, Vec<&'a str>)>, CsvError> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if line_no == 1 && comment != format!("drlcov {kind} v1") {
                return Err(malformed(1, format!("expected `# drlcov {kind} v1`, got `{line}`")));
            }
            continue;
        }
        if !seen_header {
            if line != header {
                return Err(malformed(line_no, format!("expected header `{header}`, got `{line}`")));
            }
            seen_header = true;
            continue;
        }
        rows.push((line_no, line.split(',').collect()));
    }
    if !seen_header {
        return Err(malformed(text.lines().count(), format!("missing `{header}` header")));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(fields: &[&str], i: usize, line: usize) -> Result<T, CsvError> {
    let raw = fields
        .get(i)
        .ok_or_else(|| malformed(line, format!("missing column {i}")))?;
    raw.parse()
        .map_err(|_| malformed(line, format!("column {i}: cannot parse `{raw}`")))
}

// ---------------------------------------------------------------------------
// Rewards: one row per episode.

pub const REWARDS_HEADER: &str = "episode,reward,steps";

pub fn rewards_to_csv(rewards: &[f64], steps: &[usize]) -> String {
    assert_eq!(rewards.len(), steps.len());
    let mut out = String::from("# drlcov rewards v1\n");
    out.push_str(REWARDS_HEADER);
    out.push('\n');
    for (ep, (r, s)) in rewards.iter().zip(steps).enumerate() {
        let _ = writeln!(out, "{ep},{r},{s}");
    }
    out
}

pub fn parse_rewards_csv(text: &str) -> Result<(Vec<f64>, Vec<usize>), CsvError> {
    let mut rewards = Vec::new();
    let mut steps = Vec::new();
    for (line, fields) in parse_body(text, "rewards", REWARDS_HEADER)? {
        let ep: usize = field(&fields, 0, line)?;
        if ep != rewards.len() {
            return Err(malformed(line, format!("episode {ep} out of order")));
        }
        rewards.push(field(&fields, 1, line)?);
        steps.push(field(&fields, 2, line)?);
    }
    Ok((rewards, steps))
}

// ---------------------------------------------------------------------------
// Coverage ledger.

pub fn coverage_to_csv(ledger: &CoverageLedger) -> String {
    format!("# drlcov coverage v1\n{}", ledger.to_csv())
}

pub fn parse_coverage_csv(text: &str) -> Result<CoverageLedger, CsvError> {
    let mut ledger = CoverageLedger::new();
    for (line, fields) in parse_body(text, "coverage", COVERAGE_CSV_HEADER)? {
        ledger.push(CoverageRow {
            batch: field(&fields, 0, line)?,
            episode_start: field(&fields, 1, line)?,
            episode_end: field(&fields, 2, line)?,
            new_cells: field(&fields, 3, line)?,
            cum_occupied: field(&fields, 4, line)?,
            apc: field(&fields, 5, line)?,
        });
    }
    Ok(ledger)
}

// ---------------------------------------------------------------------------
// Scheduler trace: abstraction width varies by environment.

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub episode: usize,
    pub branch: Branch,
    pub abstraction: Vec<f64>,
    pub score: f64,
}

pub fn trace_header(abs_dim: usize) -> String {
    let coords: Vec<String> = (0..abs_dim).map(|i| format!("a{i}")).collect();
    format!("episode,branch,{},score", coords.join(","))
}

pub fn trace_to_csv(rows: &[TraceRow], abs_dim: usize) -> String {
    let mut out = String::from("# drlcov trace v1\n");
    out.push_str(&trace_header(abs_dim));
    out.push('\n');
    for row in rows {
        assert_eq!(row.abstraction.len(), abs_dim);
        let coords: Vec<String> = row.abstraction.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{},{},{},{}", row.episode, row.branch, coords.join(","), row.score);
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>, CsvError> {
    // Infer the abstraction width from the header before the generic pass.
    let header_line = text
        .lines()
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| malformed(1, "empty trace file"))?;
    let ncols = header_line.split(',').count();
    if ncols < 4 || !header_line.starts_with("episode,branch,") || !header_line.ends_with(",score")
    {
        return Err(malformed(1, format!("unrecognized trace header `{header_line}`")));
    }
    let abs_dim = ncols - 3;

    let mut rows = Vec::new();
    for (line, fields) in parse_body(text, "trace", &trace_header(abs_dim))? {
        let branch = match fields.get(1) {
            Some(&"explore") => Branch::Explore,
            Some(&"exploit") => Branch::Exploit,
            other => {
                return Err(malformed(line, format!("unknown branch {other:?}")));
            }
        };
        let mut abstraction = Vec::with_capacity(abs_dim);
        for i in 0..abs_dim {
            abstraction.push(field(&fields, 2 + i, line)?);
        }
        rows.push(TraceRow {
            episode: field(&fields, 0, line)?,
            branch,
            abstraction,
            score: field(&fields, 2 + abs_dim, line)?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Embedding snapshots: one row per embedded state.

pub const SNAPSHOT_HEADER: &str = "x,y,q_first";

pub fn snapshot_to_csv(rows: &[[f64; 3]]) -> String {
    let mut out = String::from("# drlcov snapshot v1\n");
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for [x, y, q] in rows {
        let _ = writeln!(out, "{x},{y},{q}");
    }
    out
}

pub fn parse_snapshot_csv(text: &str) -> Result<Vec<[f64; 3]>, CsvError> {
    let mut rows = Vec::new();
    for (line, fields) in parse_body(text, "snapshot", SNAPSHOT_HEADER)? {
        rows.push([
            field(&fields, 0, line)?,
            field(&fields, 1, line)?,
            field(&fields, 2, line)?,
        ]);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewards_round_trip_exactly() {
        let rewards = vec![12.5, 0.1 + 0.2, -3.0, 1e-17];
        let steps = vec![13, 1, 500, 2];
        let text = rewards_to_csv(&rewards, &steps);
        assert!(text.starts_with("# drlcov rewards v1\nepisode,reward,steps\n"));
        let (r2, s2) = parse_rewards_csv(&text).unwrap();
        assert_eq!(r2, rewards);
        assert_eq!(s2, steps);
    }

    #[test]
    fn coverage_round_trips_through_text() {
        let mut ledger = CoverageLedger::new();
        ledger.push(CoverageRow {
            batch: 0,
            episode_start: 0,
            episode_end: 99,
            new_cells: 31,
            cum_occupied: 31,
            apc: 31.0 / 2500.0,
        });
        let text = coverage_to_csv(&ledger);
        let back = parse_coverage_csv(&text).unwrap();
        assert_eq!(back.rows(), ledger.rows());
    }

    #[test]
    fn trace_round_trips_with_inferred_width() {
        let rows = vec![
            TraceRow {
                episode: 0,
                branch: Branch::Explore,
                abstraction: vec![0.01, -0.02],
                score: 23.0,
            },
            TraceRow {
                episode: 1,
                branch: Branch::Exploit,
                abstraction: vec![0.011, -0.019],
                score: 57.5,
            },
        ];
        let text = trace_to_csv(&rows, 2);
        assert!(text.contains("episode,branch,a0,a1,score"));
        assert_eq!(parse_trace_csv(&text).unwrap(), rows);
    }

    #[test]
    fn snapshot_round_trips() {
        let rows = vec![[0.5, -1.25, 3.75], [1e-3, 2.0, -0.125]];
        let text = snapshot_to_csv(&rows);
        assert_eq!(parse_snapshot_csv(&text).unwrap(), rows);
    }

    #[test]
    fn wrong_version_comment_is_rejected() {
        let text = "# drlcov rewards v2\nepisode,reward,steps\n0,1,1\n";
        assert!(parse_rewards_csv(text).is_err());
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = "# drlcov rewards v1\nepisode,reward,steps\n0,1.0,3\n1,banana,4\n";
        let err = parse_rewards_csv(text).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }
}
