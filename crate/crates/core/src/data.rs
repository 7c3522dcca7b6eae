//! Sparse classification data: parsing, validation and the per-feature
//! statistics that every screening pass reuses.
//!
//! The text format is the usual `<label> <idx>:<val> ...` layout with 1-based,
//! strictly increasing feature indices. Lines starting with `#` are skipped.
//! The number of features is the largest index seen anywhere in the file, so
//! trailing all-zero features cannot be represented.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One feature column in compressed form: row indices are strictly increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseColumn {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseColumn {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// `fᵀv` for a dense `v`.
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.iter().map(|(i, x)| x * v[i]).sum()
    }

    /// `f̂ᵀv = (Y f)ᵀ v` for a dense `v` and labels `y`.
    pub fn weighted_dot(&self, y: &[f64], v: &[f64]) -> f64 {
        self.iter().map(|(i, x)| y[i] * x * v[i]).sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (i, x) in self.iter() {
            out[i] = x;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Reject any label other than exactly `+1` / `-1`.
    pub strict_labels: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_samples: usize,
    columns: Vec<SparseColumn>,
    labels: Vec<f64>,
    n_pos: usize,
    n_neg: usize,
}

impl Dataset {
    /// Builds a dataset from columns and ±1 labels, checking every invariant.
    pub fn new(columns: Vec<SparseColumn>, labels: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("dataset has no samples".into()));
        }
        if columns.is_empty() {
            return Err(Error::InvalidArgument("dataset has no features".into()));
        }
        let mut n_pos = 0;
        for (i, &y) in labels.iter().enumerate() {
            if y == 1.0 {
                n_pos += 1;
            } else if y != -1.0 {
                return Err(Error::InvalidArgument(format!(
                    "label {y} of sample {i} is not +1 or -1"
                )));
            }
        }
        for (j, col) in columns.iter().enumerate() {
            if col.indices.len() != col.values.len() {
                return Err(Error::InvalidArgument(format!(
                    "column {j}: index/value length mismatch"
                )));
            }
            let mut prev: Option<usize> = None;
            for (i, x) in col.iter() {
                if i >= n || prev.is_some_and(|p| i <= p) {
                    return Err(Error::InvalidArgument(format!(
                        "column {j}: row indices must be strictly increasing and < {n}"
                    )));
                }
                if !x.is_finite() {
                    return Err(Error::NonFinite("feature values"));
                }
                prev = Some(i);
            }
        }
        Ok(Self {
            n_samples: n,
            columns,
            labels,
            n_pos,
            n_neg: n - n_pos,
        })
    }

    /// Row-major dense constructor, mostly for tests and small examples.
    pub fn from_dense(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        let mut columns = vec![SparseColumn::default(); m];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument("ragged dense rows".into()));
            }
            for (j, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    columns[j].indices.push(i);
                    columns[j].values.push(x);
                }
            }
        }
        Self::new(columns, labels.to_vec())
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[SparseColumn] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &SparseColumn {
        &self.columns[j]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseColumn::nnz).sum()
    }

    /// `yᵀ1 = n₊ − n₋`.
    pub fn label_sum(&self) -> f64 {
        self.n_pos as f64 - self.n_neg as f64
    }

    /// Keeps only the listed features, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Dataset {
        Dataset {
            n_samples: self.n_samples,
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            labels: self.labels.clone(),
            n_pos: self.n_pos,
            n_neg: self.n_neg,
        }
    }

    /// Decision values `Xw + b` for every sample.
    pub fn decision_values(&self, w: &[f64], b: f64) -> Vec<f64> {
        let mut z = vec![b; self.n_samples];
        for (col, &wj) in self.columns.iter().zip(w) {
            if wj != 0.0 {
                for (i, x) in col.iter() {
                    z[i] += wj * x;
                }
            }
        }
        z
    }

    /// Row `i` as a dense vector (O(nnz)); used by tests and oracles.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| match c.indices.binary_search(&i) {
                Ok(p) => c.values[p],
                Err(_) => 0.0,
            })
            .collect()
    }

    /// Serializes back to the sparse text format (canonical form: `+1`/`-1`
    /// labels, shortest round-trip float formatting).
    pub fn to_sparse_text(&self) -> String {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n_samples];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, x) in col.iter() {
                rows[i].push((j + 1, x));
            }
        }
        let mut out = String::new();
        for (row, &y) in rows.iter().zip(&self.labels) {
            out.push_str(if y > 0.0 { "+1" } else { "-1" });
            for &(idx, x) in row {
                let _ = write!(out, " {idx}:{x}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn read_sparse_file(path: impl AsRef<Path>, opts: ParseOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::file(&path, e))?;
    parse_sparse_text(&text, opts)
}

/// Parses `<label> <idx>:<val> ...` lines into a column-major [`Dataset`].
pub fn parse_sparse_text(text: &str, opts: ParseOptions) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut columns: Vec<SparseColumn> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label `{label_tok}`")))?;
        if !label.is_finite() {
            return Err(err(format!("bad label `{label_tok}`")));
        }
        let y = if opts.strict_labels {
            if label == 1.0 {
                1.0
            } else if label == -1.0 {
                -1.0
            } else {
                return Err(err(format!("label `{label_tok}` is not +1 or -1")));
            }
        } else if label > 0.0 {
            1.0
        } else {
            -1.0
        };
        let row = labels.len();
        labels.push(y);

        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected <index>:<value>, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad feature index `{idx}`")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based; got 0".into()));
            }
            if idx <= prev {
                return Err(err(format!(
                    "feature index {idx} does not increase (previous {prev})"
                )));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("bad feature value `{val}`")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite feature value `{val}`")));
            }
            prev = idx;
            if idx > columns.len() {
                columns.resize_with(idx, SparseColumn::default);
            }
            let col = &mut columns[idx - 1];
            col.indices.push(row);
            col.values.push(val);
        }
    }

    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if columns.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no features present in any line".into(),
        });
    }
    Dataset::new(columns, labels)
}

/// Label-dependent quantities of one weighted feature `f̂ = Y f` that do not
/// depend on λ or θ, so a regularization path computes them exactly once.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FeatureStats {
    /// `f̂ᵀy` (equals `Σ f_i` since `y_i² = 1`).
    pub dot_y: f64,
    /// `f̂ᵀ1` (equals `yᵀf`).
    pub dot_one: f64,
    /// `f̂ᵀf̂`.
    pub sq_norm: f64,
    /// `‖P_y(f̂)‖₂`.
    pub proj_y_norm: f64,
}

impl FeatureStats {
    /// One pass over the nonzeros of `col`.
    pub fn of_column(col: &SparseColumn, labels: &[f64]) -> Self {
        let n = labels.len() as f64;
        let mut dot_y = 0.0;
        let mut dot_one = 0.0;
        let mut sq_norm = 0.0;
        for (i, x) in col.iter() {
            dot_y += x;
            dot_one += labels[i] * x;
            sq_norm += x * x;
        }
        // ‖f̂ − μy‖² with μ = f̂ᵀy/n, summed explicitly rather than through
        // sq_norm − dot_y²/n so that f̂ ∝ y lands on exactly zero.
        let mu = dot_y / n;
        let mut proj_sq = 0.0;
        for (i, x) in col.iter() {
            let r = labels[i] * x - mu * labels[i];
            proj_sq += r * r;
        }
        proj_sq += (labels.len() - col.nnz()) as f64 * mu * mu;
        Self {
            dot_y,
            dot_one,
            sq_norm,
            proj_y_norm: proj_sq.sqrt(),
        }
    }
}

pub fn compute_feature_stats(data: &Dataset) -> Vec<FeatureStats> {
    data.columns()
        .iter()
        .map(|c| FeatureStats::of_column(c, data.labels()))
        .collect()
}
