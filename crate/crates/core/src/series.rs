//! Grids, log-log fits and the tail-slope test for truncated infinite sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slope above which partial sums are declared divergent.
pub const DIVERGENT_SLOPE: f64 = 0.05;
/// Slope below which partial sums are declared convergent.
pub const CONVERGENT_SLOPE: f64 = 0.005;

/// Geometric time grid `t_i = start·ratio^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl GeometricGrid {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if !(start > 0.0 && end > start && points >= 2) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < start < end and ≥ 2 points, got [{start}, {end}] with {points}"
            )));
        }
        Ok(GeometricGrid { start, end, points })
    }

    /// Grid `2^lo, …, 2^hi` with `per_octave` points per doubling.
    pub fn powers_of_two(lo: i32, hi: i32, per_octave: usize) -> Result<Self> {
        let points = (hi - lo) as usize * per_octave + 1;
        Self::new(2f64.powi(lo), 2f64.powi(hi), points)
    }

    pub fn values(&self) -> Vec<f64> {
        let ratio = (self.end / self.start).ln() / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start * (ratio * i as f64).exp()
                }
            })
            .collect()
    }

    pub fn decades(&self) -> f64 {
        (self.end / self.start).log10()
    }
}

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    #[serde(with = "crate::num_serde::lenient")]
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual.
    #[serde(with = "crate::num_serde::lenient")]
    pub max_residual: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Some(LineFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Verdict of the tail-slope test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Convergence {
    pub fn converges(self) -> bool {
        self == Convergence::Convergent
    }
}

/// Result of the tail-slope test on a sequence of nonnegative partial sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSlope {
    #[serde(with = "crate::num_serde::lenient")]
    pub slope: f64,
    pub verdict: Convergence,
}

/// Fits `log S(n)` against `log n` at the boundaries `N/4, N/2, N` of the last two
/// dyadic blocks of the partial sums `S(1..=N)` (1-based positions).
pub fn tail_slope(partial_sums: &[f64]) -> TailSlope {
    let n = partial_sums.len();
    let last = partial_sums.last().copied().unwrap_or(0.0);
    if last == 0.0 {
        return TailSlope {
            slope: 0.0,
            verdict: Convergence::Convergent,
        };
    }
    if n < 4 {
        return TailSlope {
            slope: f64::NAN,
            verdict: Convergence::Inconclusive,
        };
    }
    let idx = [n / 4, n / 2, n];
    let vals: Vec<f64> = idx.iter().map(|&i| partial_sums[i - 1]).collect();
    if vals[0] <= 0.0 {
        // all mass sits in the last blocks
        return TailSlope {
            slope: f64::INFINITY,
            verdict: Convergence::Inconclusive,
        };
    }
    let xs: Vec<f64> = idx.iter().map(|&i| (i as f64).ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let slope = least_squares(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN);
    let verdict = if slope > DIVERGENT_SLOPE {
        Convergence::Divergent
    } else if slope < CONVERGENT_SLOPE {
        Convergence::Convergent
    } else {
        Convergence::Inconclusive
    };
    TailSlope { slope, verdict }
}

/// Running sums of a sequence.
pub fn partial_sums(terms: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    terms
        .into_iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect()
}
