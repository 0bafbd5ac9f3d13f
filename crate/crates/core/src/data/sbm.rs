//! Row-compressed 0/1 matrix.
//!
//! Holds the binarized rating matrix (users x items) and the side-information
//! matrix (items x features). Only the positions of 1-entries are stored,
//! CSR-style: `row_ptr` has `rows + 1` offsets into `col_idx`, and column
//! indices are strictly increasing within each row.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparseBinaryMatrix {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
        }
    }

    /// Builds from `(row, col)` pairs in any order; duplicates collapse to a
    /// single 1-entry (binarization is idempotent by construction).
    pub fn from_pairs<I>(rows: usize, cols: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut entries: Vec<(usize, usize)> = pairs.into_iter().collect();
        for &(r, c) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::Shape(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
        }
        entries.sort_unstable();
        entries.dedup();
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        for (r, c) in entries {
            row_ptr[r + 1] += 1;
            col_idx.push(c);
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
        })
    }

    /// Builds from per-row column lists; each list may be unsorted.
    pub fn from_row_lists(cols: usize, row_lists: Vec<Vec<usize>>) -> Result<Self> {
        let rows = row_lists.len();
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::new();
        for (r, mut list) in row_lists.into_iter().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&c) = list.last() {
                if c >= cols {
                    return Err(Error::Shape(format!(
                        "entry ({r}, {c}) outside column count {cols}"
                    )));
                }
            }
            col_idx.extend_from_slice(&list);
            row_ptr[r + 1] = col_idx.len();
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Sorted column indices of the 1-entries in row `r`.
    pub fn row(&self, r: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.row(r).binary_search(&c).is_ok()
    }

    /// Writes row `r` as a dense 0/1 vector into `out` (length `cols`).
    pub fn write_dense_row(&self, r: usize, out: &mut [f64]) {
        assert_eq!(out.len(), self.cols, "dense row buffer length");
        out.fill(0.0);
        for &c in self.row(r) {
            out[c] = 1.0;
        }
    }

    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c)))
    }

    pub fn transpose(&self) -> SparseBinaryMatrix {
        let mut row_ptr = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for c in 0..self.cols {
            row_ptr[c + 1] += row_ptr[c];
        }
        let mut cursor = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        for (r, c) in self.iter_pairs() {
            col_idx[cursor[c]] = r;
            cursor[c] += 1;
        }
        SparseBinaryMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
        }
    }

    /// Serializes in the portable `SBM1` cache format: a header line
    /// `SBM1 rows cols nnz`, then one `row col` pair per line in row-major
    /// order. Round-trips bit-exactly.
    pub fn save_sbm<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "SBM1 {} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c) in self.iter_pairs() {
            writeln!(w, "{r} {c}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_sbm<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("SBM file is empty".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "SBM1" {
            return Err(Error::Format(format!("bad SBM header: {header:?}")));
        }
        let parse = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad SBM {what}: {s:?}")))
        };
        let rows = parse(fields[1], "row count")?;
        let cols = parse(fields[2], "column count")?;
        let nnz = parse(fields[3], "nnz")?;
        let mut pairs = Vec::with_capacity(nnz);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let mut it = line.split_whitespace();
            let (r, c) = match (it.next(), it.next(), it.next()) {
                (Some(r), Some(c), None) => (parse(r, "row index")?, parse(c, "column index")?),
                _ => {
                    return Err(Error::Format(format!(
                        "expected 'row col' on SBM line {}: {line:?}",
                        i + 2
                    )))
                }
            };
            if let Some(&last) = pairs.last() {
                if (r, c) <= last {
                    return Err(Error::Format(format!(
                        "SBM entries not strictly sorted near line {}",
                        i + 2
                    )));
                }
            }
            pairs.push((r, c));
        }
        if pairs.len() != nnz {
            return Err(Error::Format(format!(
                "SBM header declares {nnz} entries, found {}",
                pairs.len()
            )));
        }
        Self::from_pairs(rows, cols, pairs)
    }
}

/// Yields the columns of `x` as dense 0/1 vectors of length `x.rows()`, in
/// column-index order; equivalently the rows of `x` transposed. These are
/// the per-feature samples fed to the shared network.
pub fn column_samples(x: &SparseBinaryMatrix) -> impl Iterator<Item = Vec<f64>> {
    let xt = x.transpose();
    (0..xt.rows()).map(move |r| {
        let mut v = vec![0.0; xt.cols()];
        xt.write_dense_row(r, &mut v);
        v
    })
}
