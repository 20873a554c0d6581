use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Stream, StreamLabel, NORMAL_METHOD};

/// Variance convention for the non-zero entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Non-zero entries are N(0, 1).
    Standard,
    /// Non-zero entries are N(0, 1/γ), so every entry has unit variance.
    Rescaled,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Standard => "standard",
            Convention::Rescaled => "rescaled",
        }
    }

    /// Standard deviation of a stored value under this convention.
    pub fn value_scale(self, gamma: f64) -> f64 {
        match self {
            Convention::Standard => 1.0,
            Convention::Rescaled => 1.0 / gamma.sqrt(),
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Convention::Standard),
            "rescaled" => Ok(Convention::Rescaled),
            other => Err(Error::parameter(format!(
                "unknown convention `{other}` (expected `standard` or `rescaled`)"
            ))),
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Shape and distribution of a γ-sparsified ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub p: usize,
    pub gamma: f64,
    pub convention: Convention,
}

impl EnsembleSpec {
    pub fn new(n: usize, p: usize, gamma: f64, convention: Convention) -> Result<Self> {
        let spec = EnsembleSpec {
            n,
            p,
            gamma,
            convention,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::parameter(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::parameter(format!(
                "matrix dimensions must be positive, got {}x{}",
                self.n, self.p
            )));
        }
        Ok(())
    }

    /// `n * p` as a `u64` counter range, or a capacity error.
    fn entry_count(&self) -> Result<u64> {
        self.n
            .checked_mul(self.p)
            .and_then(|np| u64::try_from(np).ok())
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "{} x {} entries overflow the index space",
                    self.n, self.p
                ))
            })
    }
}

/// Where a matrix's randomness came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub pattern_seed: u64,
    pub value_seed: u64,
    pub normal_method: String,
}

/// Row-compressed n×p measurement matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMeasurementMatrix {
    n: usize,
    p: usize,
    gamma: f64,
    convention: Convention,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    provenance: Provenance,
}

/// Draw a matrix from the ensemble. Pattern and values come from separate
/// sub-streams of `seed`.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> Result<SparseMeasurementMatrix> {
    sample_matrix_split(spec, seed, seed)
}

/// Like [`sample_matrix`] with independent seeds for the Bernoulli pattern
/// and the Gaussian values. Keeping `pattern_seed` fixed keeps the pattern.
pub fn sample_matrix_split(
    spec: &EnsembleSpec,
    pattern_seed: u64,
    value_seed: u64,
) -> Result<SparseMeasurementMatrix> {
    spec.validate()?;
    spec.entry_count()?;
    let pattern = Stream::new(pattern_seed, StreamLabel::Pattern);
    let values_stream = Stream::new(value_seed, StreamLabel::Values);
    let scale = spec.convention.value_scale(spec.gamma);
    let dense = spec.gamma >= 1.0;

    let expected = ((spec.n * spec.p) as f64 * spec.gamma * 1.05) as usize + 16;
    let mut row_ptr = Vec::with_capacity(spec.n + 1);
    let mut col_idx = Vec::with_capacity(expected);
    let mut values = Vec::with_capacity(expected);
    row_ptr.push(0);
    for row in 0..spec.n {
        let base = (row as u64) * (spec.p as u64);
        for col in 0..spec.p {
            let counter = base + col as u64;
            if dense || pattern.bernoulli(counter, spec.gamma) {
                col_idx.push(col);
                values.push(scale * values_stream.normal(counter));
            }
        }
        row_ptr.push(col_idx.len());
    }

    Ok(SparseMeasurementMatrix {
        n: spec.n,
        p: spec.p,
        gamma: spec.gamma,
        convention: spec.convention,
        row_ptr,
        col_idx,
        values,
        provenance: Provenance {
            seed: pattern_seed,
            pattern_seed,
            value_seed,
            normal_method: NORMAL_METHOD.to_string(),
        },
    })
}

/// Result of [`rescale_coupled`].
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub matrix: SparseMeasurementMatrix,
    /// Set when the requested convention was already in effect.
    pub no_op: bool,
}

/// Switch a matrix between conventions while keeping the same randomness:
/// the pattern is unchanged and every value is scaled by `1/√γ`
/// (standard → rescaled) or `√γ` (rescaled → standard).
pub fn rescale_coupled(m: &SparseMeasurementMatrix, target: Convention) -> Rescaled {
    if m.convention == target {
        return Rescaled {
            matrix: m.clone(),
            no_op: true,
        };
    }
    let mut out = m.clone();
    match target {
        Convention::Rescaled => {
            let factor = Convention::Rescaled.value_scale(m.gamma);
            out.values.iter_mut().for_each(|v| *v *= factor);
        }
        Convention::Standard => {
            let factor = m.gamma.sqrt();
            out.values.iter_mut().for_each(|v| *v *= factor);
        }
    }
    out.convention = target;
    Rescaled {
        matrix: out,
        no_op: false,
    }
}

impl SparseMeasurementMatrix {
    /// Build from explicit rows of `(column, value)` pairs.
    pub fn from_rows(
        p: usize,
        gamma: f64,
        convention: Convention,
        rows: &[Vec<(usize, f64)>],
        provenance: Provenance,
    ) -> Result<Self> {
        EnsembleSpec::new(rows.len(), p, gamma, convention)?;
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(c, v) in row {
                if c >= p {
                    return Err(Error::data(format!(
                        "row {i}: column {c} out of range for p = {p}"
                    )));
                }
                if prev.is_some_and(|q| c <= q) {
                    return Err(Error::data(format!(
                        "row {i}: column indices must be strictly increasing"
                    )));
                }
                if !v.is_finite() || v == 0.0 {
                    return Err(Error::data(format!(
                        "row {i}, column {c}: stored values must be finite and non-zero, got {v}"
                    )));
                }
                prev = Some(c);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMeasurementMatrix {
            n: rows.len(),
            p,
            gamma,
            convention,
            row_ptr,
            col_idx,
            values,
            provenance,
        })
    }

    /// Build from a dense row-major matrix, dropping exact zeros.
    pub fn from_dense(
        dense: &[Vec<f64>],
        gamma: f64,
        convention: Convention,
    ) -> Result<Self> {
        let p = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != p) {
            return Err(Error::parameter("ragged dense matrix"));
        }
        let rows: Vec<Vec<(usize, f64)>> = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(
            p,
            gamma,
            convention,
            &rows,
            Provenance {
                seed: 0,
                pattern_seed: 0,
                value_seed: 0,
                normal_method: "explicit".to_string(),
            },
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[usize], &[f64])> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    /// `X β`.
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(beta.len(), self.p);
        self.rows()
            .map(|(cols, vals)| cols.iter().zip(vals).map(|(&c, &v)| v * beta[c]).sum())
            .collect()
    }

    /// `Xᵀ v`, accumulated in row order.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.p];
        for ((cols, vals), &vi) in self.rows().zip(v) {
            for (&c, &x) in cols.iter().zip(vals) {
                out[c] += x * vi;
            }
        }
        out
    }

    /// Column-compressed copy, for column access.
    pub fn to_columns(&self) -> ColumnMatrix {
        let mut counts = vec![0usize; self.p + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.p {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                row_idx[slot] = i;
                values[slot] = v;
                next[c] += 1;
            }
        }
        ColumnMatrix {
            n: self.n,
            p: self.p,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Dense row-major copy (tests and small problems only).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows()
            .map(|(cols, vals)| {
                let mut row = vec![0.0; self.p];
                for (&c, &v) in cols.iter().zip(vals) {
                    row[c] = v;
                }
                row
            })
            .collect()
    }
}

/// Column-compressed view of a measurement matrix. Row indices within each
/// column are increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMatrix {
    n: usize,
    p: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl ColumnMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[a..b], &self.values[a..b])
    }

    /// `X_jᵀ v` summed in increasing row order.
    pub fn dot(&self, j: usize, v: &[f64]) -> f64 {
        let (rows, vals) = self.column(j);
        rows.iter().zip(vals).map(|(&r, &x)| x * v[r]).sum()
    }

    pub fn squared_norm(&self, j: usize) -> f64 {
        self.column(j).1.iter().map(|x| x * x).sum()
    }

    /// `out += alpha * X_j`.
    pub fn axpy(&self, j: usize, alpha: f64, out: &mut [f64]) {
        let (rows, vals) = self.column(j);
        for (&r, &x) in rows.iter().zip(vals) {
            out[r] += alpha * x;
        }
    }

    /// Column `j` expanded to a dense vector of length n.
    pub fn dense_column(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.axpy(j, 1.0, &mut out);
        out
    }
}
