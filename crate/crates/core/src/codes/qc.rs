use serde::{Deserialize, Serialize};

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Quasi-cyclic base matrix: every entry is either a right-shift of the
/// `z x z` identity or an all-zero block (`None`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcDescription {
    pub base_rows: usize,
    pub base_cols: usize,
    pub z: usize,
    /// Row-major shift values.
    pub entries: Vec<Option<usize>>,
}

impl QcDescription {
    pub fn new(
        base_rows: usize,
        base_cols: usize,
        z: usize,
        entries: Vec<Option<usize>>,
    ) -> Result<Self> {
        let desc = Self {
            base_rows,
            base_cols,
            z,
            entries,
        };
        desc.validate()?;
        Ok(desc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.z == 0 {
            return Err(Error::InvalidCode("expansion factor must be positive".into()));
        }
        if self.entries.len() != self.base_rows * self.base_cols {
            return Err(Error::InvalidCode(format!(
                "{}x{} base matrix needs {} entries, found {}",
                self.base_rows,
                self.base_cols,
                self.base_rows * self.base_cols,
                self.entries.len()
            )));
        }
        if let Some(s) = self.entries.iter().flatten().find(|&&s| s >= self.z) {
            return Err(Error::InvalidCode(format!(
                "shift {s} is not below the expansion factor {}",
                self.z
            )));
        }
        Ok(())
    }

    pub fn entry(&self, r: usize, c: usize) -> Option<usize> {
        self.entries[r * self.base_cols + c]
    }

    /// Text layout: first line `rows cols Z`, then `rows x cols` integers
    /// with `-1` marking an empty block.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
        let mut next = |what: &str| -> Result<(usize, i64)> {
            let (line, tok) = tokens.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of input while reading {what}"),
            })?;
            let v = tok.parse::<i64>().map_err(|_| Error::Parse {
                line,
                msg: format!("'{tok}' is not an integer ({what})"),
            })?;
            Ok((line, v))
        };
        let mut dim = |what: &str| -> Result<usize> {
            let (line, v) = next(what)?;
            usize::try_from(v).map_err(|_| Error::Parse {
                line,
                msg: format!("{what} must be non-negative"),
            })
        };
        let base_rows = dim("base rows")?;
        let base_cols = dim("base columns")?;
        let z = dim("expansion factor")?;
        let mut entries = Vec::with_capacity(base_rows * base_cols);
        for _ in 0..base_rows * base_cols {
            let (line, v) = next("shift value")?;
            entries.push(match v {
                -1 => None,
                s if s >= 0 && (s as usize) < z.max(1) => Some(s as usize),
                s => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("shift {s} outside -1..{z}"),
                    })
                }
            });
        }
        Self::new(base_rows, base_cols, z, entries)
    }

    /// Rescales shifts from a reference expansion factor with the floor rule
    /// `floor(s * z / z_ref)` used for the 802.16e code family.
    pub fn rescaled(&self, z: usize) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.map(|s| s * z / self.z))
            .collect();
        Self::new(self.base_rows, self.base_cols, z, entries)
    }
}

/// Expands a QC description into its binary matrix. Row `r` of block-row `b`
/// holds `c*z + (shift + r) mod z` for every non-empty block column `c`; the
/// block rows become the layer schedule.
pub fn expand_qc(desc: &QcDescription) -> Result<ParityCheckMatrix> {
    desc.validate()?;
    let z = desc.z;
    let mut rows = Vec::with_capacity(desc.base_rows * z);
    let mut layers = Vec::with_capacity(desc.base_rows);
    for b in 0..desc.base_rows {
        layers.push((b * z..(b + 1) * z).collect());
        for r in 0..z {
            let row: Vec<usize> = (0..desc.base_cols)
                .filter_map(|c| desc.entry(b, c).map(|s| c * z + (s + r) % z))
                .collect();
            rows.push(row);
        }
    }
    let label = format!(
        "qc ({},{})",
        desc.base_cols * z,
        desc.base_rows * z
    );
    ParityCheckMatrix::new(desc.base_cols * z, rows, label)?.with_layers(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::compute_layers;

    #[test]
    fn zero_shift_is_identity() {
        let h = expand_qc(&QcDescription::new(1, 1, 4, vec![Some(0)]).unwrap()).unwrap();
        assert_eq!(h.rows(), &[vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn unit_shift_rotates() {
        let h = expand_qc(&QcDescription::new(1, 1, 4, vec![Some(1)]).unwrap()).unwrap();
        assert_eq!(h.rows(), &[vec![1], vec![2], vec![3], vec![0]]);
    }

    #[test]
    fn null_block_contributes_nothing() {
        let h = expand_qc(&QcDescription::new(1, 2, 2, vec![Some(0), None]).unwrap()).unwrap();
        assert_eq!(h.n_cols(), 4);
        assert_eq!(h.rows(), &[vec![0], vec![1]]);
    }

    #[test]
    fn oversized_shift_rejected() {
        assert!(QcDescription::new(1, 1, 4, vec![Some(4)]).is_err());
        assert!(QcDescription::parse("1 1 4\n4\n").is_err());
        assert!(QcDescription::parse("1 2 4\n3\n").is_err());
    }

    #[test]
    fn parse_and_layers_match_block_rows() {
        let d = QcDescription::parse("2 3 3\n0 -1 2\n1 1 -1\n").unwrap();
        let h = expand_qc(&d).unwrap();
        assert_eq!(h.n_rows(), 6);
        assert_eq!(h.row(0), &[0, 8]);
        assert_eq!(h.row(3), &[1, 4]);
        assert_eq!(h.layers().unwrap(), compute_layers(&h).as_slice());
        for (r, row) in h.rows().iter().enumerate() {
            let base = r / 3;
            let nonnull = (0..3).filter(|&c| d.entry(base, c).is_some()).count();
            assert_eq!(row.len(), nonnull);
        }
    }
}
