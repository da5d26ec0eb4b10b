//! Search traces and objective samples.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The decision vectors an optimizer visited, in order, with their
/// objective values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl SearchTrace {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet("search trace"));
        }
        if points.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        let dim = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        Ok(Self { points, values })
    }

    /// A trace over one-dimensional points `0, 1, 2, …` carrying `values`.
    /// Convenient when only the value sequence matters.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let points = (0..values.len()).map(|i| vec![i as f64]).collect();
        Self::new(points, values)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), values)
    }

    /// Running minimum of the values.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.values
            .iter()
            .map(|&v| {
                if v < best {
                    best = v;
                }
                best
            })
            .collect()
    }

    /// SHA-256 over the bit patterns of all coordinates, then all values.
    pub fn point_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for p in &self.points {
            for x in p {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(File::open(path)?)
    }

    /// Reads `x0,…,x{d-1},value` rows.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || header.get(header.len() - 1).map(str::trim) != Some("value") {
            return Err(Error::Parse {
                row: 0,
                column: header.len().saturating_sub(1),
                message: "trace header must be x0,…,x{d-1},value".into(),
            });
        }
        let dim = header.len() - 1;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(dim + 1);
            for (c, cell) in rec.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    row: r + 1,
                    column: c,
                    message: format!("`{cell}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: c,
                        message: format!("non-finite value `{cell}`"),
                    });
                }
                row.push(v);
            }
            if row.len() != dim + 1 {
                return Err(Error::Parse {
                    row: r + 1,
                    column: row.len(),
                    message: format!("expected {} fields", dim + 1),
                });
            }
            values.push(row.pop().expect("nonempty row"));
            points.push(row);
        }
        Self::new(points, values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dimension()).map(|i| format!("x{i}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (p, v) in self.points.iter().zip(&self.values) {
            let mut rec: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
            rec.push(format!("{v}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = File::create(path)?;
        self.write_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }
}

/// Objective values on a finite set of domain points, with the known
/// optimum where available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSample {
    pub domain_points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub f_star: Option<f64>,
    pub x_star: Option<Vec<f64>>,
}

impl ObjectiveSample {
    pub fn new(domain_points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if domain_points.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} points but {} values",
                domain_points.len(),
                values.len()
            )));
        }
        Ok(Self {
            domain_points,
            values,
            f_star: None,
            x_star: None,
        })
    }

    /// A context holding only the optimum, no sampled points.
    pub fn with_optimum(f_star: f64) -> Self {
        Self {
            domain_points: Vec::new(),
            values: Vec::new(),
            f_star: Some(f_star),
            x_star: None,
        }
    }

    /// Uses the trace itself as the sample.
    pub fn from_trace(trace: &SearchTrace) -> Self {
        Self {
            domain_points: trace.points().to_vec(),
            values: trace.values().to_vec(),
            f_star: None,
            x_star: None,
        }
    }

    pub fn f_star(mut self, f_star: Option<f64>) -> Self {
        self.f_star = f_star;
        self
    }

    pub fn x_star(mut self, x_star: Option<Vec<f64>>) -> Self {
        self.x_star = x_star;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Adds the trace's points that the sample does not already contain.
    pub fn include_trace(&mut self, trace: &SearchTrace) {
        let mut known: std::collections::HashSet<Vec<u64>> =
            self.domain_points.iter().map(|p| point_key(p)).collect();
        for (p, &v) in trace.points().iter().zip(trace.values()) {
            if known.insert(point_key(p)) {
                self.domain_points.push(p.clone());
                self.values.push(v);
            }
        }
    }
}

/// Exact identity of a decision vector.
pub(crate) fn point_key(p: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 are the same point
    p.iter().map(|x| (x + 0.0).to_bits()).collect()
}

/// A point with both its decision vector and its objective vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub decision: Vec<f64>,
    pub objectives: Vec<f64>,
}

/// Reference front/set and an approximation of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoCase {
    pub reference: Vec<ParetoPoint>,
    pub approximation: Vec<ParetoPoint>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_invariants() {
        assert!(SearchTrace::new(vec![], vec![]).is_err());
        assert!(SearchTrace::new(vec![vec![0.0]], vec![1.0, 2.0]).is_err());
        assert!(SearchTrace::new(vec![vec![0.0], vec![0.0, 1.0]], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn best_so_far_is_running_min() {
        let t = SearchTrace::from_values(vec![3.0, 5.0, 1.0, 2.0]).unwrap();
        assert_eq!(t.best_so_far(), vec![3.0, 3.0, 1.0, 1.0]);
    }

    #[test]
    fn trace_csv_round_trip() {
        let t = SearchTrace::new(vec![vec![0.5, -1.25], vec![1e-9, 3.0]], vec![7.0, 0.1]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x0,x1,value\n"));
        assert_eq!(SearchTrace::read_csv(text.as_bytes()).unwrap(), t);
    }

    #[test]
    fn include_trace_skips_known_points() {
        let t = SearchTrace::from_values(vec![4.0, 2.0]).unwrap();
        let mut s = ObjectiveSample::new(vec![vec![0.0]], vec![4.0]).unwrap();
        s.include_trace(&t);
        assert_eq!(s.values, vec![4.0, 2.0]);
    }
}
