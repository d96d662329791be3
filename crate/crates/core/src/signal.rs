//! Piecewise-constant, right-continuous inputs `u : ℝ₊ → ℂ^m`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{l2_norm, C64};

/// Piece `j` holds `values[j]` on `[breakpoints[j], breakpoints[j+1])`; the last piece
/// extends to infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalDoc", into = "SignalDoc")]
pub struct InputSignal {
    breakpoints: Vec<f64>,
    values: Vec<Vec<C64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalDoc {
    breakpoints: Vec<f64>,
    values: Vec<Vec<C64>>,
}

impl TryFrom<SignalDoc> for InputSignal {
    type Error = crate::Error;
    fn try_from(d: SignalDoc) -> Result<Self> {
        InputSignal::new(d.breakpoints, d.values)
    }
}

impl From<InputSignal> for SignalDoc {
    fn from(s: InputSignal) -> Self {
        SignalDoc {
            breakpoints: s.breakpoints,
            values: s.values,
        }
    }
}

impl InputSignal {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Vec<C64>>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(invalid(
                "input needs one value per breakpoint and at least one piece",
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(invalid("first breakpoint must be 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid("breakpoints must be finite and strictly increasing"));
        }
        let m = values[0].len();
        if m == 0 {
            return Err(invalid("input dimension must be positive"));
        }
        for v in &values {
            if v.len() != m {
                return Err(invalid("all pieces must share the input dimension"));
            }
            if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(invalid("input values must be finite"));
            }
        }
        Ok(InputSignal { breakpoints, values })
    }

    pub fn constant(value: Vec<C64>) -> Result<Self> {
        Self::new(vec![0.0], vec![value])
    }

    pub fn zero(dim: usize) -> Self {
        InputSignal {
            breakpoints: vec![0.0],
            values: vec![vec![C64::new(0.0, 0.0); dim]],
        }
    }

    /// Samples `f` on pieces of width `width` over `[0, end)` and holds `tail` afterwards.
    pub fn sampled(
        width: f64,
        end: f64,
        tail: Vec<C64>,
        f: impl Fn(f64, f64) -> Vec<C64>,
    ) -> Result<Self> {
        if !(width > 0.0 && end > 0.0) {
            return Err(invalid("sampling width and end must be positive"));
        }
        let pieces = (end / width).ceil() as usize;
        let mut breakpoints = Vec::with_capacity(pieces + 1);
        let mut values = Vec::with_capacity(pieces + 1);
        for j in 0..pieces {
            let a = j as f64 * width;
            let b = ((j + 1) as f64 * width).min(end);
            breakpoints.push(a);
            values.push(f(a, b));
        }
        breakpoints.push(end);
        values.push(tail);
        Self::new(breakpoints, values)
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<C64>] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    fn piece_index(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1)
    }

    pub fn value_at(&self, t: f64) -> &[C64] {
        &self.values[self.piece_index(t)]
    }

    /// `‖u‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| l2_norm(v)).fold(0.0, f64::max)
    }

    /// `sup_{s ≥ τ} ‖u(s)‖`.
    pub fn tail_sup(&self, tau: f64) -> f64 {
        self.values[self.piece_index(tau)..]
            .iter()
            .map(|v| l2_norm(v))
            .fold(0.0, f64::max)
    }

    /// `u(· + τ)`.
    pub fn shift(&self, tau: f64) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(invalid("shift must be nonnegative"));
        }
        let start = self.piece_index(tau);
        let mut breakpoints = vec![0.0];
        breakpoints.extend(self.breakpoints[start + 1..].iter().map(|b| b - tau));
        let values = self.values[start..].to_vec();
        Self::new(breakpoints, values)
    }

    /// Pieces intersected with `[0, t]` as `(start, end, value)`.
    pub fn pieces_until(&self, t: f64) -> impl Iterator<Item = (f64, f64, &[C64])> + '_ {
        let n = self.values.len();
        (0..n).map_while(move |j| {
            let a = self.breakpoints[j];
            if a >= t {
                return None;
            }
            let b = if j + 1 < n {
                self.breakpoints[j + 1].min(t)
            } else {
                t
            };
            Some((a, b, self.values[j].as_slice()))
        })
    }

    /// `∫₀ᵗ μ(‖u(s)‖) ds`, exact for piecewise-constant inputs.
    pub fn integral(&self, t: f64, mu: impl Fn(f64) -> f64) -> f64 {
        self.pieces_until(t)
            .map(|(a, b, v)| mu(l2_norm(v)) * (b - a))
            .sum()
    }
}
