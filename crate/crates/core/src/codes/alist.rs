use std::fmt::Write as _;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, integers).
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (idx, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Parse {
                        line: idx + 1,
                        msg: format!("'{tok}' is not a non-negative integer ({what})"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((idx + 1, nums));
        }
        Err(Error::Parse {
            line: 0,
            msg: format!("unexpected end of input while reading {what}"),
        })
    }
}

/// Drops the zero padding some writers append to short adjacency lists.
fn unpad(mut list: Vec<usize>, want: usize) -> Vec<usize> {
    while list.len() > want && list.last() == Some(&0) {
        list.pop();
    }
    list
}

fn expect_len(line: usize, got: &[usize], want: usize, what: &str) -> Result<()> {
    if got.len() != want {
        return Err(Error::Parse {
            line,
            msg: format!("{what}: expected {want} entries, found {}", got.len()),
        });
    }
    Ok(())
}

/// Reads an alist file (MacKay layout, 1-based indices, optional zero padding).
///
/// The column and row adjacency sections must describe the same matrix.
/// The returned matrix has no layer schedule.
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (ln, header) = lines.next_ints("header")?;
    expect_len(ln, &header, 2, "header 'N M'")?;
    let (n, m) = (header[0], header[1]);
    let (ln, maxes) = lines.next_ints("maximum degrees")?;
    expect_len(ln, &maxes, 2, "maximum degree line")?;
    let (ln_cd, col_deg) = lines.next_ints("column degrees")?;
    expect_len(ln_cd, &col_deg, n, "column degree list")?;
    let (ln_rd, row_deg) = lines.next_ints("row degrees")?;
    expect_len(ln_rd, &row_deg, m, "row degree list")?;
    if col_deg.iter().max().copied().unwrap_or(0) != maxes[0] {
        return Err(Error::Parse {
            line: ln_cd,
            msg: format!("maximum column degree {} does not match the list", maxes[0]),
        });
    }
    if row_deg.iter().max().copied().unwrap_or(0) != maxes[1] {
        return Err(Error::Parse {
            line: ln_rd,
            msg: format!("maximum row degree {} does not match the list", maxes[1]),
        });
    }

    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (j, &d) in col_deg.iter().enumerate() {
        let (ln, list) = lines.next_ints("column adjacency")?;
        let list = unpad(list, d);
        expect_len(ln, &list, d, &format!("column {} adjacency", j + 1))?;
        let mut entries = Vec::with_capacity(d);
        for &r in &list {
            if r == 0 || r > m {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("row index {r} out of range 1..={m}"),
                });
            }
            entries.push(r - 1);
        }
        entries.sort_unstable();
        cols.push(entries);
    }

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
    for (i, &d) in row_deg.iter().enumerate() {
        let (ln, list) = lines.next_ints("row adjacency")?;
        let list = unpad(list, d);
        expect_len(ln, &list, d, &format!("row {} adjacency", i + 1))?;
        let mut entries = Vec::with_capacity(d);
        for &c in &list {
            if c == 0 || c > n {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("column index {c} out of range 1..={n}"),
                });
            }
            entries.push(c - 1);
        }
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse {
                line: ln,
                msg: format!("row {} lists a column twice", i + 1),
            });
        }
        if entries.is_empty() {
            return Err(Error::Parse {
                line: ln,
                msg: format!("row {} is empty", i + 1),
            });
        }
        rows.push(entries);
    }

    // cross-check the two sections
    let mut transposed = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &c in row {
            transposed[c].push(i);
        }
    }
    if let Some(j) = (0..n).find(|&j| transposed[j] != cols[j]) {
        return Err(Error::Parse {
            line: ln_cd,
            msg: format!("column {} adjacency disagrees with the row lists", j + 1),
        });
    }

    ParityCheckMatrix::new(n, rows, "alist")
}

/// Serializes a matrix in the same alist layout `parse_alist` reads.
pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let cols = h.columns();
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", h.n_cols(), h.n_rows());
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let _ = writeln!(out, "{} {}", max_col, h.max_row_degree());
    let join = |v: &mut dyn Iterator<Item = usize>| {
        v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "{}", join(&mut cols.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for col in &cols {
        let _ = writeln!(out, "{}", join(&mut col.iter().map(|r| r + 1)));
    }
    for row in h.rows() {
        let _ = writeln!(out, "{}", join(&mut row.iter().map(|c| c + 1)));
    }
    out
}
