//! Performance matrices: algorithms × problems, lower scores are better.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Results of a set of algorithms on a set of problems.
///
/// Rows are algorithms, columns are problems. Scores are minimized: the
/// smallest value in a column is the best result on that problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMatrix {
    algorithm_ids: Vec<String>,
    problem_ids: Vec<String>,
    /// Row-major, `algorithm_ids.len() * problem_ids.len()` cells.
    values: Vec<f64>,
}

impl PerformanceMatrix {
    pub fn new(
        algorithm_ids: Vec<String>,
        problem_ids: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_unique("algorithm", &algorithm_ids)?;
        check_unique("problem", &problem_ids)?;
        if values.len() != algorithm_ids.len() * problem_ids.len() {
            return Err(Error::Shape(format!(
                "{} algorithms × {} problems needs {} values, got {}",
                algorithm_ids.len(),
                problem_ids.len(),
                algorithm_ids.len() * problem_ids.len(),
                values.len()
            )));
        }
        let n = problem_ids.len();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n,
                column: pos % n,
            });
        }
        Ok(Self {
            algorithm_ids,
            problem_ids,
            values,
        })
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(
        algorithm_ids: Vec<String>,
        problem_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = problem_ids.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Shape(format!(
                "row {i} has {} values, expected {n}",
                row.len()
            )));
        }
        Self::new(algorithm_ids, problem_ids, rows.concat())
    }

    pub fn algorithm_ids(&self) -> &[String] {
        &self.algorithm_ids
    }

    pub fn problem_ids(&self) -> &[String] {
        &self.problem_ids
    }

    pub fn n_algorithms(&self) -> usize {
        self.algorithm_ids.len()
    }

    pub fn n_problems(&self) -> usize {
        self.problem_ids.len()
    }

    pub fn value(&self, algorithm: usize, problem: usize) -> f64 {
        self.values[algorithm * self.n_problems() + problem]
    }

    pub fn row(&self, algorithm: usize) -> &[f64] {
        let n = self.n_problems();
        &self.values[algorithm * n..(algorithm + 1) * n]
    }

    pub fn column(&self, problem: usize) -> Vec<f64> {
        (0..self.n_algorithms())
            .map(|a| self.value(a, problem))
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn algorithm_index(&self, label: &str) -> Result<usize> {
        self.algorithm_ids
            .iter()
            .position(|id| id == label)
            .ok_or_else(|| Error::UnknownLabel {
                kind: "algorithm",
                label: label.to_string(),
            })
    }

    pub fn problem_index(&self, label: &str) -> Result<usize> {
        self.problem_ids
            .iter()
            .position(|id| id == label)
            .ok_or_else(|| Error::UnknownLabel {
                kind: "problem",
                label: label.to_string(),
            })
    }

    /// Restricts the matrix to the algorithms in `keep`, preserving the
    /// original row order.
    pub fn project_algorithms<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let wanted = resolve(keep, |l| self.algorithm_index(l))?;
        if wanted.len() < 2 {
            return Err(Error::TooFew {
                kind: "algorithms",
                required: 2,
                got: wanted.len(),
            });
        }
        Ok(self.select_rows(&wanted))
    }

    /// Restricts the matrix to the problems in `keep`, preserving the
    /// original column order.
    pub fn project_problems<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let wanted = resolve(keep, |l| self.problem_index(l))?;
        if wanted.is_empty() {
            return Err(Error::TooFew {
                kind: "problems",
                required: 1,
                got: 0,
            });
        }
        Ok(self.select_columns(&wanted))
    }

    /// Row subset by sorted index list. Indices must be valid and unique.
    pub(crate) fn select_rows(&self, rows: &[usize]) -> Self {
        let values = rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect();
        Self {
            algorithm_ids: rows.iter().map(|&r| self.algorithm_ids[r].clone()).collect(),
            problem_ids: self.problem_ids.clone(),
            values,
        }
    }

    pub(crate) fn select_columns(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n_algorithms() * cols.len());
        for a in 0..self.n_algorithms() {
            values.extend(cols.iter().map(|&c| self.value(a, c)));
        }
        Self {
            algorithm_ids: self.algorithm_ids.clone(),
            problem_ids: cols.iter().map(|&c| self.problem_ids[c].clone()).collect(),
            values,
        }
    }

    /// Appends rows. Ids must be new and rows must match the column count.
    pub fn append_rows(&mut self, ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<()> {
        if ids.len() != rows.len() {
            return Err(Error::Shape(format!(
                "{} ids for {} rows",
                ids.len(),
                rows.len()
            )));
        }
        let mut all = self.algorithm_ids.clone();
        all.extend(ids.iter().cloned());
        check_unique("algorithm", &all)?;
        let n = self.n_problems();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "appended row {i} has {} values, expected {n}",
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    row: self.n_algorithms() + i,
                    column: c,
                });
            }
        }
        self.algorithm_ids = all;
        for row in rows {
            self.values.extend(row);
        }
        Ok(())
    }

    /// Returns a copy with every value replaced by `f(value)`, same ids.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.algorithm_ids.clone(),
            self.problem_ids.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Returns a copy with each column mapped by `f(column_index, value)`.
    pub fn map_columns(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let n = self.n_problems();
        Self::new(
            self.algorithm_ids.clone(),
            self.problem_ids.clone(),
            self.values
                .iter()
                .enumerate()
                .map(|(i, &v)| f(i % n, v))
                .collect(),
        )
    }

    /// Per-column `(min, max)`.
    pub fn column_ranges(&self) -> Vec<(f64, f64)> {
        (0..self.n_problems())
            .map(|c| {
                let col = self.column(c);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect()
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(File::open(path)?)
    }

    /// Parses the `algorithm,<problem ids...>` layout.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => {
                return Err(Error::Parse {
                    row: 0,
                    column: 0,
                    message: "empty input".into(),
                })
            }
        };
        if header.len() < 2 {
            return Err(Error::Parse {
                row: 0,
                column: 0,
                message: "header needs `algorithm` plus at least one problem id".into(),
            });
        }
        for (c, field) in header.iter().enumerate() {
            reject_comma(field, 0, c)?;
        }
        let problem_ids: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        let n = problem_ids.len();

        let mut algorithm_ids = Vec::new();
        let mut values = Vec::new();
        for (r, rec) in records.enumerate() {
            let row = r + 1;
            let rec = rec?;
            if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
                continue;
            }
            if rec.len() != n + 1 {
                return Err(Error::Parse {
                    row,
                    column: rec.len(),
                    message: format!("ragged row: expected {} fields, found {}", n + 1, rec.len()),
                });
            }
            let id = rec.get(0).unwrap_or_default();
            reject_comma(id, row, 0)?;
            algorithm_ids.push(id.trim().to_string());
            for (c, cell) in rec.iter().enumerate().skip(1) {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    row,
                    column: c,
                    message: format!("`{cell}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: c,
                        message: format!("non-finite value `{cell}`"),
                    });
                }
                values.push(v);
            }
        }
        Self::new(algorithm_ids, problem_ids, values)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = File::create(path)?;
        self.write_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }

    /// Writes with shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(writer);
        let mut header = vec!["algorithm".to_string()];
        header.extend(self.problem_ids.iter().cloned());
        w.write_record(&header)?;
        for (a, id) in self.algorithm_ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(a).iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        // Writing to a Vec cannot fail.
        self.write_csv(&mut buf).expect("in-memory csv write");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn reject_comma(field: &str, row: usize, column: usize) -> Result<()> {
    if field.contains(',') {
        return Err(Error::Parse {
            row,
            column,
            message: format!("id `{field}` contains a comma"),
        });
    }
    Ok(())
}

fn check_unique(kind: &'static str, ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId {
                kind,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

/// Maps labels to sorted, deduplicated indices.
fn resolve<S: AsRef<str>>(
    labels: &[S],
    index_of: impl Fn(&str) -> Result<usize>,
) -> Result<Vec<usize>> {
    let mut idx = labels
        .iter()
        .map(|l| index_of(l.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}
