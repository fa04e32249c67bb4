//! Parity-check matrices, their layer schedules and the graphs derived from them.

mod alist;
mod gf2;
mod graph;
mod qc;
mod random;
pub mod standard;

pub use alist::{parse_alist, write_alist};
pub use gf2::CodewordSpace;
pub use graph::{build_check_graph, message_chains, message_count, CheckGraph};
pub use qc::{expand_qc, QcDescription};
pub use random::random_code;

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Sparse binary parity-check matrix stored by rows.
///
/// `rows[m]` holds the sorted, duplicate-free variable indices `N(m)` of
/// check `m`. The optional layer schedule partitions the rows into groups
/// with pairwise disjoint support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCheckMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
    layers: Option<Vec<Vec<usize>>>,
    label: String,
}

impl ParityCheckMatrix {
    pub fn new(n_cols: usize, rows: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self> {
        for (m, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidCode(format!("row {m} is empty")));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidCode(format!(
                    "row {m} is not sorted and duplicate-free"
                )));
            }
            if let Some(&last) = row.last() {
                if last >= n_cols {
                    return Err(Error::InvalidCode(format!(
                        "row {m} references variable {last} but the code has {n_cols} columns"
                    )));
                }
            }
        }
        Ok(Self {
            n_cols,
            rows,
            layers: None,
            label: label.into(),
        })
    }

    /// Attaches an explicit layer schedule after checking that it partitions
    /// the rows and that no layer holds two rows sharing a variable.
    pub fn with_layers(mut self, layers: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; self.rows.len()];
        let mut owner = vec![usize::MAX; self.n_cols];
        for (l, layer) in layers.iter().enumerate() {
            for &m in layer {
                if m >= self.rows.len() {
                    return Err(Error::InvalidCode(format!("layer {l} names missing row {m}")));
                }
                if std::mem::replace(&mut seen[m], true) {
                    return Err(Error::InvalidCode(format!("row {m} appears in two layers")));
                }
                for &j in &self.rows[m] {
                    if owner[j] == l {
                        return Err(Error::InvalidCode(format!(
                            "layer {l} has two rows sharing variable {j}"
                        )));
                    }
                    owner[j] = l;
                }
            }
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidCode(format!("row {m} is not in any layer")));
        }
        self.layers = Some(layers);
        Ok(self)
    }

    /// Replaces any existing schedule with the greedy first-fit one.
    pub fn with_greedy_layers(mut self) -> Self {
        self.layers = Some(compute_layers(&self));
        self
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, m: usize) -> &[usize] {
        &self.rows[m]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn layers(&self) -> Option<&[Vec<usize>]> {
        self.layers.as_deref()
    }

    /// Layer schedule, or an error naming the operation that needed it.
    pub fn require_layers(&self) -> Result<&[Vec<usize>]> {
        self.layers().ok_or_else(|| {
            Error::InvalidCode(format!("code '{}' has no layer schedule", self.label))
        })
    }

    /// Layer index of every row.
    pub fn layer_of_rows(&self) -> Result<Vec<usize>> {
        let mut out = vec![0; self.n_rows()];
        for (l, layer) in self.require_layers()?.iter().enumerate() {
            for &m in layer {
                out[m] = l;
            }
        }
        Ok(out)
    }

    /// Maximum row degree `N_d`.
    pub fn max_row_degree(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of ones in the matrix.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Column view: for every variable, the rows that contain it, ascending.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (m, row) in self.rows.iter().enumerate() {
            for &j in row {
                cols[j].push(m);
            }
        }
        cols
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_cols];
        for row in &self.rows {
            for &j in row {
                deg[j] += 1;
            }
        }
        deg
    }

    /// Design rate `1 - M/N`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.n_rows() as f64 / self.n_cols as f64
    }
}

/// Greedy first-fit layering: rows are visited in index order and each one
/// joins the lowest layer whose rows share no variable with it.
pub fn compute_layers(h: &ParityCheckMatrix) -> Vec<Vec<usize>> {
    let mut layers: Vec<Vec<usize>> = Vec::new();
    // layers already touching each variable
    let mut var_layers: Vec<Vec<usize>> = vec![Vec::new(); h.n_cols()];
    let mut blocked: Vec<bool> = Vec::new();
    for (m, row) in h.rows().iter().enumerate() {
        blocked.clear();
        blocked.resize(layers.len() + 1, false);
        for &j in row {
            for &l in &var_layers[j] {
                blocked[l] = true;
            }
        }
        let l = blocked.iter().position(|b| !b).unwrap_or(layers.len());
        if l == layers.len() {
            layers.push(Vec::new());
        }
        layers[l].push(m);
        for &j in row {
            var_layers[j].push(l);
        }
    }
    layers
}

/// Input format of a code file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeFormat {
    Alist,
    Qc,
}

impl std::str::FromStr for CodeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alist" => Ok(Self::Alist),
            "qc" => Ok(Self::Qc),
            other => Err(Error::InvalidParam(format!("unknown code format '{other}'"))),
        }
    }
}

/// Loads a code from disk. Alist inputs get the greedy layer schedule, QC
/// inputs keep their block-row layers. Without an explicit format the file
/// extension decides (`.qc` or anything else as alist).
pub fn load_code(path: &Path, format: Option<CodeFormat>) -> Result<ParityCheckMatrix> {
    let text = std::fs::read_to_string(path)?;
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("qc") => CodeFormat::Qc,
        _ => CodeFormat::Alist,
    });
    let label = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("code")
        .to_string();
    let mut h = match format {
        CodeFormat::Alist => parse_alist(&text)?.with_greedy_layers(),
        CodeFormat::Qc => expand_qc(&QcDescription::parse(&text)?)?,
    };
    h.set_label(label);
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(rows: Vec<Vec<usize>>, n: usize) -> ParityCheckMatrix {
        ParityCheckMatrix::new(n, rows, "t").unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(ParityCheckMatrix::new(3, vec![vec![]], "x").is_err());
        assert!(ParityCheckMatrix::new(3, vec![vec![1, 1]], "x").is_err());
        assert!(ParityCheckMatrix::new(3, vec![vec![2, 1]], "x").is_err());
        assert!(ParityCheckMatrix::new(3, vec![vec![0, 3]], "x").is_err());
    }

    #[test]
    fn greedy_layers_small() {
        let m = h(vec![vec![0, 1], vec![1, 2], vec![3]], 4);
        assert_eq!(compute_layers(&m), vec![vec![0, 2], vec![1]]);
        let m = h(vec![vec![0], vec![0], vec![0]], 1);
        assert_eq!(compute_layers(&m), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn explicit_layers_validated() {
        let m = h(vec![vec![0, 1], vec![1, 2], vec![3]], 4);
        assert!(m.clone().with_layers(vec![vec![0, 1], vec![2]]).is_err());
        assert!(m.clone().with_layers(vec![vec![0]]).is_err());
        assert!(m.clone().with_layers(vec![vec![0, 2], vec![1], vec![2]]).is_err());
        let m = m.with_layers(vec![vec![1, 2], vec![0]]).unwrap();
        assert_eq!(m.layer_of_rows().unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn max_degree_and_columns() {
        let m = h(vec![vec![0, 1, 3], vec![1, 2, 4], vec![0, 2, 5]], 6);
        assert_eq!(m.max_row_degree(), 3);
        assert_eq!(m.columns()[2], vec![1, 2]);
        assert_eq!(m.column_degrees(), vec![2, 2, 2, 1, 1, 1]);
    }
}
