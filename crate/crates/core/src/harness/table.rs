//! Per-round results and their CSV form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["algorithm", "seed", "t", "cost", "cum_cost", "avg_cost"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub algorithm: String,
    pub seed: u64,
    pub t: usize,
    pub cost: f64,
    pub cum_cost: f64,
    pub avg_cost: f64,
}

/// An (algorithm, seed) cell that did not complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub algorithm: String,
    pub seed: u64,
    pub desk_scale: bool,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultsTable {
    pub rows: Vec<Row>,
    pub failures: Vec<Failure>,
}

impl ResultsTable {
    /// Rows for one run; cumulative and average columns are derived from `costs`.
    pub fn push_run(&mut self, algorithm: &str, seed: u64, costs: &[f64]) {
        let mut cum = 0.0;
        for (i, &c) in costs.iter().enumerate() {
            cum += c;
            let t = i + 1;
            self.rows.push(Row {
                algorithm: algorithm.to_string(),
                seed,
                t,
                cost: c,
                cum_cost: cum,
                avg_cost: cum / t as f64,
            });
        }
    }

    /// Orders rows by (algorithm, seed, t) and failures by (algorithm, seed).
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| (&a.algorithm, a.seed, a.t).cmp(&(&b.algorithm, b.seed, b.t)));
        self.failures.sort_by(|a, b| (&a.algorithm, a.seed).cmp(&(&b.algorithm, b.seed)));
    }

    /// Last row of every (algorithm, seed) run.
    pub fn finals(&self) -> BTreeMap<(String, u64), &Row> {
        let mut out: BTreeMap<(String, u64), &Row> = BTreeMap::new();
        for row in &self.rows {
            let key = (row.algorithm.clone(), row.seed);
            match out.get(&key) {
                Some(prev) if prev.t >= row.t => {}
                _ => {
                    out.insert(key, row);
                }
            }
        }
        out
    }

    pub fn summarize(&self) -> Vec<SummaryLine> {
        let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for ((alg, _), row) in &self.finals() {
            let _ = alg;
            groups.entry(row.algorithm.as_str()).or_default().push(row.avg_cost);
        }
        let mut lines: Vec<SummaryLine> = groups
            .into_iter()
            .map(|(alg, v)| {
                let k = v.len() as f64;
                let mean = v.iter().sum::<f64>() / k;
                let std = if v.len() > 1 {
                    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
                } else {
                    0.0
                };
                SummaryLine {
                    algorithm: alg.to_string(),
                    seeds: v.len(),
                    final_avg_mean: mean,
                    final_avg_std: std,
                    regret_vs_brute: None,
                }
            })
            .collect();
        let brute = lines.iter().find(|l| l.algorithm == "brute").map(|l| l.final_avg_mean);
        if let Some(b) = brute {
            for l in &mut lines {
                l.regret_vs_brute = Some(l.final_avg_mean - b);
            }
        }
        lines
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryLine {
    pub algorithm: String,
    pub seeds: usize,
    /// Seed average of the final time-average cost.
    pub final_avg_mean: f64,
    pub final_avg_std: f64,
    /// Difference to the brute-force optimum's final time-average, when it ran.
    pub regret_vs_brute: Option<f64>,
}

pub fn write_csv<W: std::io::Write>(table: &ResultsTable, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &table.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_bytes(table: &ResultsTable) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Writes the rows to `path`; failures, if any, go to `<path>.errors.csv`.
pub fn emit_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    std::fs::write(path, csv_bytes(table)).map_err(|e| Error::io(path, e))?;
    let errors = errors_path(path);
    if table.failures.is_empty() {
        return Ok(());
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for f in &table.failures {
            w.serialize(f).expect("writing to memory cannot fail");
        }
        w.flush().map_err(|e| Error::io(&errors, e))?;
    }
    std::fs::write(&errors, buf).map_err(|e| Error::io(&errors, e))
}

pub fn errors_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".errors.csv");
    name.into()
}

pub fn parse_csv(bytes: &[u8]) -> Result<ResultsTable> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| Error::Config(format!("results CSV: {e}")))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!(
            "results CSV header must be {}, got {}",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows = r
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::Config(format!("results CSV line {}: {e}", i + 2))))
        .collect::<Result<Vec<Row>>>()?;
    Ok(ResultsTable {
        rows,
        failures: Vec::new(),
    })
}

pub fn read_csv(path: &Path) -> Result<ResultsTable> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&bytes)
}

/// Summary as CSV text: one line per algorithm.
pub fn emit_summary(table: &ResultsTable) -> String {
    let mut out = String::from("algorithm,seeds,final_avg_mean,final_avg_std,regret_vs_brute\n");
    for l in table.summarize() {
        let regret = l.regret_vs_brute.map(|r| r.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            l.algorithm, l.seeds, l.final_avg_mean, l.final_avg_std, regret
        );
    }
    for f in &table.failures {
        let _ = writeln!(out, "# failed: {} seed {}: {}", f.algorithm, f.seed, f.message);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let bytes = csv_bytes(&ResultsTable::default());
        assert_eq!(bytes, b"algorithm,seed,t,cost,cum_cost,avg_cost\n");
        assert_eq!(parse_csv(&bytes).unwrap(), ResultsTable::default());
    }

    #[test]
    fn round_trip_and_prefix_sums() {
        let mut t = ResultsTable::default();
        t.push_run("a", 3, &[1.0, 2.5, 0.1]);
        t.push_run("b", 0, &[4.0]);
        let back = parse_csv(&csv_bytes(&t)).unwrap();
        assert_eq!(back, t);
        let mut acc = 0.0;
        for row in back.rows.iter().filter(|r| r.algorithm == "a") {
            acc += row.cost;
            assert_eq!(row.cum_cost, acc);
        }
    }

    #[test]
    fn summary_and_regret() {
        let mut t = ResultsTable::default();
        t.push_run("brute", 0, &[1.0, 1.0]);
        t.push_run("x", 0, &[3.0, 1.0]);
        t.push_run("x", 1, &[1.0, 1.0]);
        let s = t.summarize();
        let x = s.iter().find(|l| l.algorithm == "x").unwrap();
        assert_eq!(x.seeds, 2);
        assert!((x.final_avg_mean - 1.5).abs() < 1e-12);
        assert!((x.regret_vs_brute.unwrap() - 0.5).abs() < 1e-12);
        assert!(emit_summary(&t).starts_with("algorithm,seeds"));
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(parse_csv(b"a,b\n1,2\n").is_err());
    }
}
