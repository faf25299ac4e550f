//! Min-max discretization of real-valued feature columns.
//!
//! Each dimension is mapped independently onto `l` integer bins:
//! `code = floor((x - min) * l / (max - min))`, with the value attained
//! only at the maximum clamped down to `l - 1` so codes stay inside
//! `[0, l-1]`. A degenerate dimension (max = min) maps entirely to 0.

use std::io::BufRead;
use std::io::Write;

use crate::embed::Matrix;
use crate::error::{Error, Result};
use crate::io::is_comment;

/// Per-dimension bin boundaries plus the integer codes of the fitting
/// matrix (dimension-major, like the input).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEmbeddingTable {
    l: u32,
    mins: Vec<f64>,
    maxs: Vec<f64>,
    codes: Vec<Vec<u32>>,
}

impl DiscreteEmbeddingTable {
    /// Number of dimensions.
    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    /// Bin count per dimension.
    pub fn bins(&self) -> u32 {
        self.l
    }

    pub fn min(&self, dim: usize) -> f64 {
        self.mins[dim]
    }

    pub fn max(&self, dim: usize) -> f64 {
        self.maxs[dim]
    }

    /// Codes of the fitting matrix, one row per dimension. Empty for a
    /// table loaded from a file.
    pub fn codes(&self) -> &[Vec<u32>] {
        &self.codes
    }

    fn code_one(&self, dim: usize, x: f64) -> u32 {
        let (lo, hi) = (self.mins[dim], self.maxs[dim]);
        if hi <= lo {
            return 0;
        }
        let raw = ((x - lo) * f64::from(self.l) / (hi - lo)).floor();
        if raw < 0.0 {
            0
        } else if raw >= f64::from(self.l) {
            self.l - 1
        } else {
            raw as u32
        }
    }

    /// Serialize as a `d l` header followed by one `min max` line per
    /// dimension. The fitted codes are not part of the file.
    pub fn write_to(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "{} {}", self.dim(), self.l)?;
        for (lo, hi) in self.mins.iter().zip(&self.maxs) {
            writeln!(w, "{lo} {hi}")?;
        }
        Ok(())
    }

    /// Load a table written by [`Self::write_to`].
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .filter(|l| !is_comment(l) && !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::invalid("empty discretizer file"))?;
        let mut parts = header.split_whitespace();
        let d: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::invalid("bad discretizer header"))?;
        let l: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::invalid("bad discretizer header"))?;
        let mut mins = Vec::with_capacity(d);
        let mut maxs = Vec::with_capacity(d);
        for line in lines {
            let mut parts = line.split_whitespace();
            let lo: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::invalid(format!("bad discretizer line {line:?}")))?;
            let hi: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::invalid(format!("bad discretizer line {line:?}")))?;
            mins.push(lo);
            maxs.push(hi);
        }
        if mins.len() != d {
            return Err(Error::invalid(format!(
                "discretizer header promises {d} dimensions, found {}",
                mins.len()
            )));
        }
        Ok(DiscreteEmbeddingTable { l, mins, maxs, codes: Vec::new() })
    }
}

/// Fit per-dimension bins over a dimension-major matrix (`d` rows, one
/// column per item) and code the fitting columns.
pub fn fit_discretizer(columns: &Matrix, l: u32) -> Result<DiscreteEmbeddingTable> {
    if l < 2 {
        return Err(Error::invalid("need at least 2 discrete intervals"));
    }
    if columns.data().iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite value in discretizer input"));
    }
    let d = columns.n_rows();
    let mut mins = Vec::with_capacity(d);
    let mut maxs = Vec::with_capacity(d);
    for dim in 0..d {
        let row = columns.row(dim);
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        mins.push(lo);
        maxs.push(hi);
    }
    let mut table = DiscreteEmbeddingTable { l, mins, maxs, codes: Vec::new() };
    table.codes = (0..d)
        .map(|dim| columns.row(dim).iter().map(|&x| table.code_one(dim, x)).collect())
        .collect();
    Ok(table)
}

/// Apply train-time bins to an unseen vector. Out-of-range inputs clamp
/// into `[0, l-1]`.
pub fn apply_discretizer(table: &DiscreteEmbeddingTable, vector: &[f64]) -> Result<Vec<u32>> {
    if vector.len() != table.dim() {
        return Err(Error::invalid(format!(
            "vector has {} dimensions, table has {}",
            vector.len(),
            table.dim()
        )));
    }
    Ok(vector
        .iter()
        .enumerate()
        .map(|(dim, &x)| table.code_one(dim, x))
        .collect())
}
