//! Comparison functions of classes K, K∞, L and KL with sampled-grid validators.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionClass {
    K,
    KInfinity,
    L,
    Kl,
}

/// Function of one nonnegative argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ComparisonFunction {
    Zero,
    /// `a·r^q`.
    Power { a: f64, q: f64 },
    /// `a·r`.
    Linear { a: f64 },
    /// `a·ln(1 + r)`.
    Log1p { a: f64 },
    /// `e^(a·r) − 1`.
    ExpMinusOne { a: f64 },
    /// `a·r/(1 + r)`.
    Saturating { a: f64 },
    MaxOf { parts: Vec<ComparisonFunction> },
    SumOf { parts: Vec<ComparisonFunction> },
    /// `outer(inner(r))`.
    Composed {
        outer: Box<ComparisonFunction>,
        inner: Box<ComparisonFunction>,
    },
}

impl ComparisonFunction {
    pub fn identity() -> Self {
        ComparisonFunction::Linear { a: 1.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ComparisonFunction::Zero => 0.0,
            ComparisonFunction::Power { a, q } => {
                if r == 0.0 {
                    0.0
                } else {
                    a * r.powf(*q)
                }
            }
            ComparisonFunction::Linear { a } => a * r,
            ComparisonFunction::Log1p { a } => a * r.ln_1p(),
            ComparisonFunction::ExpMinusOne { a } => (a * r).exp_m1(),
            ComparisonFunction::Saturating { a } => a * r / (1.0 + r),
            ComparisonFunction::MaxOf { parts } => {
                parts.iter().map(|p| p.eval(r)).fold(0.0, f64::max)
            }
            ComparisonFunction::SumOf { parts } => parts.iter().map(|p| p.eval(r)).sum(),
            ComparisonFunction::Composed { outer, inner } => outer.eval(inner.eval(r)),
        }
    }

    /// `r⁴ + 4r³ + 6r² + 4r + e^r − 1`.
    pub fn bilinear_theta() -> Self {
        ComparisonFunction::SumOf {
            parts: vec![
                ComparisonFunction::Power { a: 1.0, q: 4.0 },
                ComparisonFunction::Power { a: 4.0, q: 3.0 },
                ComparisonFunction::Power { a: 6.0, q: 2.0 },
                ComparisonFunction::Linear { a: 4.0 },
                ComparisonFunction::ExpMinusOne { a: 1.0 },
            ],
        }
    }

    /// `s² + 2s`.
    pub fn square_plus_double() -> Self {
        ComparisonFunction::SumOf {
            parts: vec![
                ComparisonFunction::Power { a: 1.0, q: 2.0 },
                ComparisonFunction::Linear { a: 2.0 },
            ],
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        ComparisonFunction::Composed {
            outer: Box::new(ComparisonFunction::Linear { a: c }),
            inner: Box::new(self),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ComparisonFunction::Zero => true,
            ComparisonFunction::Power { a, .. }
            | ComparisonFunction::Linear { a }
            | ComparisonFunction::Log1p { a }
            | ComparisonFunction::ExpMinusOne { a }
            | ComparisonFunction::Saturating { a } => *a == 0.0,
            ComparisonFunction::MaxOf { parts } | ComparisonFunction::SumOf { parts } => {
                parts.iter().all(|p| p.is_zero())
            }
            ComparisonFunction::Composed { outer, inner } => outer.is_zero() || inner.is_zero(),
        }
    }

    /// Checks class K or K∞ on a logarithmic grid; `L` and `KL` are not one-argument classes.
    pub fn validate(&self, class: FunctionClass) -> Result<(), String> {
        match class {
            FunctionClass::K => validate_k(|r| self.eval(r)),
            FunctionClass::KInfinity => {
                validate_k(|r| self.eval(r))?;
                let (a, b) = (self.eval(1e4), self.eval(1e8));
                if !(b >= 1.5 * a) {
                    return Err(format!("no growth at large arguments: f(1e4) = {a}, f(1e8) = {b}"));
                }
                Ok(())
            }
            FunctionClass::L => validate_l(|t| self.eval(t), 1e6),
            FunctionClass::Kl => Err("KL needs a two-argument function".into()),
        }
    }
}

/// Logarithmic sample points on `[lo, hi]` preceded by 0.
pub fn validation_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (points - 1) as f64;
    std::iter::once(0.0)
        .chain((0..points).map(|i| lo * (step * i as f64).exp()))
        .collect()
}

fn validate_k(f: impl Fn(f64) -> f64) -> Result<(), String> {
    if f(0.0) != 0.0 {
        return Err(format!("f(0) = {} ≠ 0", f(0.0)));
    }
    let grid = validation_grid(1e-6, 1e6, 241);
    let vals: Vec<f64> = grid.iter().map(|&r| f(r)).collect();
    for (w, r) in vals.windows(2).zip(grid.windows(2)) {
        if w[1] == f64::INFINITY && w[0].is_finite() {
            // overflow past the last representable value still means growth
            break;
        }
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(format!("not strictly increasing between r = {} and r = {}", r[0], r[1]));
        }
    }
    Ok(())
}

fn validate_l(f: impl Fn(f64) -> f64, t_end: f64) -> Result<(), String> {
    let grid = validation_grid(1e-3, t_end, 181);
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    if !(vals[0] > 0.0) {
        return Err(format!("L function must be positive at 0, got {}", vals[0]));
    }
    for (w, t) in vals.windows(2).zip(grid.windows(2)) {
        if !(w[1] < w[0]) {
            return Err(format!("not strictly decreasing between t = {} and t = {}", t[0], t[1]));
        }
    }
    let last = *vals.last().unwrap();
    if !(last < 1e-3 * vals[0]) {
        return Err(format!("does not tend to 0: f({t_end}) = {last}"));
    }
    Ok(())
}

/// `κ(r,t) = ψ(M·r·d(t))` with a decay factor `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KlFunction {
    /// `d(t) = (t+1)^(−rate)`.
    PolynomialDecay {
        outer: ComparisonFunction,
        gain: f64,
        rate: f64,
    },
    /// `d(t) = e^(−rate·t)`.
    ExponentialDecay {
        outer: ComparisonFunction,
        gain: f64,
        rate: f64,
    },
}

impl KlFunction {
    /// `M r/(t+1)^(1/α)`.
    pub fn polynomial(gain: f64, alpha: f64) -> Self {
        KlFunction::PolynomialDecay {
            outer: ComparisonFunction::identity(),
            gain,
            rate: 1.0 / alpha,
        }
    }

    pub fn eval(&self, r: f64, t: f64) -> f64 {
        match self {
            KlFunction::PolynomialDecay { outer, gain, rate } => {
                outer.eval(gain * r / (t + 1.0).powf(*rate))
            }
            KlFunction::ExponentialDecay { outer, gain, rate } => {
                outer.eval(gain * r * (-rate * t).exp())
            }
        }
    }

    /// `α` with `κ(r,t) = O(t^(−1/α))`, for the polynomial family.
    pub fn polynomial_alpha(&self) -> Option<f64> {
        match self {
            KlFunction::PolynomialDecay { rate, .. } => Some(1.0 / rate),
            KlFunction::ExponentialDecay { .. } => None,
        }
    }

    /// Smallest `t` with `κ(r,t) ≤ ε`, by bisection on the decay factor.
    pub fn inversion_time(&self, r: f64, eps: f64) -> f64 {
        if self.eval(r, 0.0) <= eps {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.eval(r, hi) > eps {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(r, mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// `κ(·,t) ∈ K` for sampled `t` and `κ(r,·) ∈ L` for sampled `r > 0`.
    pub fn validate(&self) -> Result<(), String> {
        let (gain, rate) = match self {
            KlFunction::PolynomialDecay { gain, rate, .. }
            | KlFunction::ExponentialDecay { gain, rate, .. } => (*gain, *rate),
        };
        if !(gain > 0.0 && rate > 0.0) {
            return Err(format!("gain and rate must be positive, got {gain}, {rate}"));
        }
        let t_end = match self {
            KlFunction::PolynomialDecay { .. } => 1e6,
            KlFunction::ExponentialDecay { rate, .. } => 600.0 / rate,
        };
        for &t in &validation_grid(1e-3, t_end, 25) {
            validate_k(|r| self.eval(r, t)).map_err(|e| format!("κ(·, {t}): {e}"))?;
        }
        for &r in validation_grid(1e-3, 1e3, 13).iter().skip(1) {
            validate_l(|t| self.eval(r, t), t_end).map_err(|e| format!("κ({r}, ·): {e}"))?;
        }
        Ok(())
    }
}
