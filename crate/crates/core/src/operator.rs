//! Bounded finite-rank and diagonal input operators `B : ℂ^m → X`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{check_len, l2_norm, SpectralVector, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputOperator {
    /// One coordinate column per scalar input channel.
    Columns { columns: Vec<SpectralVector> },
    /// Channel `n` drives mode `n` with weight `w_n`.
    Diagonal { weights: SpectralVector },
}

impl InputOperator {
    pub fn columns(columns: Vec<SpectralVector>) -> Result<Self> {
        let first = columns
            .first()
            .ok_or_else(|| invalid("input operator needs at least one channel"))?;
        let len = first.len();
        for c in &columns {
            check_len(len, c.len())?;
            if !c.norm().is_finite() {
                return Err(invalid("input column has infinite norm"));
            }
        }
        Ok(InputOperator::Columns { columns })
    }

    pub fn rank_one(b: SpectralVector) -> Self {
        InputOperator::Columns { columns: vec![b] }
    }

    pub fn zero(state_len: usize) -> Self {
        Self::rank_one(SpectralVector::zeros(state_len))
    }

    pub fn diagonal(weights: SpectralVector) -> Self {
        InputOperator::Diagonal { weights }
    }

    /// Number of input channels `m`.
    pub fn channels(&self) -> usize {
        match self {
            InputOperator::Columns { columns } => columns.len(),
            InputOperator::Diagonal { weights } => weights.len(),
        }
    }

    pub fn state_len(&self) -> usize {
        match self {
            InputOperator::Columns { columns } => columns[0].len(),
            InputOperator::Diagonal { weights } => weights.len(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            InputOperator::Columns { columns } => columns.iter().all(|c| c.norm() == 0.0),
            InputOperator::Diagonal { weights } => weights.norm() == 0.0,
        }
    }

    pub fn column(&self, channel: usize) -> SpectralVector {
        match self {
            InputOperator::Columns { columns } => columns[channel].clone(),
            InputOperator::Diagonal { weights } => {
                let mut v = vec![C64::new(0.0, 0.0); weights.len()];
                v[channel] = weights.coeffs()[channel];
                SpectralVector::new(v)
            }
        }
    }

    /// Entry `B[n, channel]`.
    pub fn entry(&self, n: usize, channel: usize) -> C64 {
        match self {
            InputOperator::Columns { columns } => columns[channel].coeffs()[n],
            InputOperator::Diagonal { weights } => {
                if n == channel {
                    weights.coeffs()[n]
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    /// `Bv` in coordinates.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_len(self.channels(), v.len())?;
        let mut out = vec![C64::new(0.0, 0.0); self.state_len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        match self {
            InputOperator::Columns { columns } => {
                for (col, &vc) in columns.iter().zip(v) {
                    if vc == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (o, b) in out.iter_mut().zip(col.coeffs()) {
                        *o += b * vc;
                    }
                }
            }
            InputOperator::Diagonal { weights } => {
                for ((o, w), vc) in out.iter_mut().zip(weights.coeffs()).zip(v) {
                    *o = w * vc;
                }
            }
        }
    }

    /// Applies a per-mode multiplier `B ↦ D B`.
    pub fn map_rows(&self, f: impl Fn(usize, C64) -> C64) -> Self {
        match self {
            InputOperator::Columns { columns } => InputOperator::Columns {
                columns: columns
                    .iter()
                    .map(|c| {
                        SpectralVector::new(
                            c.coeffs().iter().enumerate().map(|(n, &x)| f(n, x)).collect(),
                        )
                    })
                    .collect(),
            },
            InputOperator::Diagonal { weights } => InputOperator::Diagonal {
                weights: SpectralVector::new(
                    weights
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(n, &x)| f(n, x))
                        .collect(),
                ),
            },
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_rows(|_, x| x * s)
    }

    /// Euclidean norm of row `n`.
    pub fn row_norm(&self, n: usize) -> f64 {
        match self {
            InputOperator::Columns { columns } => {
                columns.iter().map(|c| c.coeffs()[n].norm_sqr()).sum::<f64>().sqrt()
            }
            InputOperator::Diagonal { weights } => weights.coeffs()[n].norm(),
        }
    }

    /// Operator norm `‖B‖` from `(ℂ^m, |·|₂)` into `ℓ²`.
    pub fn operator_norm(&self) -> f64 {
        match self {
            InputOperator::Diagonal { weights } => {
                weights.coeffs().iter().map(|w| w.norm()).fold(0.0, f64::max)
            }
            InputOperator::Columns { columns } => {
                if columns.len() == 1 {
                    return columns[0].norm();
                }
                gram_norm(columns, |_, x| x)
            }
        }
    }

    /// `‖D(s) B‖` for a diagonal multiplier `D(s) = diag(d_n)` given as moduli `|d_n|`.
    pub(crate) fn weighted_norm(&self, moduli: &[f64]) -> f64 {
        match self {
            InputOperator::Diagonal { weights } => weights
                .coeffs()
                .iter()
                .zip(moduli)
                .map(|(w, d)| w.norm() * d)
                .fold(0.0, f64::max),
            InputOperator::Columns { columns } => {
                if columns.len() == 1 {
                    let v: Vec<C64> = columns[0]
                        .coeffs()
                        .iter()
                        .zip(moduli)
                        .map(|(b, d)| b * *d)
                        .collect();
                    return l2_norm(&v);
                }
                gram_norm(columns, |n, x| x * moduli[n])
            }
        }
    }
}

/// Largest singular value of the column matrix after a row multiplier.
fn gram_norm(columns: &[SpectralVector], f: impl Fn(usize, C64) -> C64) -> f64 {
    let m = columns.len();
    let n = columns[0].len();
    let scaled: Vec<Vec<C64>> = columns
        .iter()
        .map(|c| (0..n).map(|i| f(i, c.coeffs()[i])).collect())
        .collect();
    let gram = DMatrix::<C64>::from_fn(m, m, |i, j| {
        scaled[i]
            .iter()
            .zip(&scaled[j])
            .map(|(a, b)| a.conj() * b)
            .sum()
    });
    let eig = gram.symmetric_eigenvalues();
    eig.iter().copied().fold(0.0, f64::max).max(0.0).sqrt()
}
