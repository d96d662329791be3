//! Coordinate-space model of diagonalizable generators.
//!
//! A state is represented by its coefficient sequence `x_n = ⟨x, ψ_n⟩` against the
//! biorthogonal sequence of a Riesz basis of eigenvectors. In these coordinates the
//! generator, its semigroup, resolvent and fractional powers all act mode by mode.
//! Norms are computed in `ℓ²`; the Riesz frame bounds only widen reported operator
//! norms into a bracket.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Relative distance below which a resolvent point is treated as an eigenvalue.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;

/// Closed-form eigenvalue families, indexed from `n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `λ_n = −re_coef·n^(−re_exp) + i·im_coef·n^(im_exp)`
    PowerLaw {
        re_coef: f64,
        re_exp: f64,
        im_coef: f64,
        im_exp: f64,
    },
    /// `λ_n = −re_coef·n^(−re_exp) + i·im_coef·ln n`
    LogImag {
        re_coef: f64,
        re_exp: f64,
        im_coef: f64,
    },
    /// `λ_n = −2^(−k) − i·2^k` for `2^k ≤ n ≤ 2^(k+1) − 1`.
    DyadicCluster,
    /// Every eigenvalue equal to `re + i·im`.
    Constant { re: f64, im: f64 },
}

/// Limit of `|im λ_n|·|re λ_n|^(1/α)` along the tail of a closed-form family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "limit", content = "value", rename_all = "snake_case")]
pub enum TailLimit {
    Zero,
    Positive(f64),
    Infinite,
}

/// Qualitative tail behaviour of a closed-form family as `n → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBehaviour {
    /// `re λ_n → 0`.
    pub re_vanishes: bool,
    /// `|im λ_n| → ∞`.
    pub im_unbounded: bool,
}

impl ClosedForm {
    /// The common test family `λ_n = −n^(−α) + i·n`.
    pub fn power_law(alpha: f64) -> Self {
        ClosedForm::PowerLaw {
            re_coef: 1.0,
            re_exp: alpha,
            im_coef: 1.0,
            im_exp: 1.0,
        }
    }

    pub fn eigenvalue(&self, n: usize) -> C64 {
        debug_assert!(n >= 1);
        let nf = n as f64;
        match *self {
            ClosedForm::PowerLaw {
                re_coef,
                re_exp,
                im_coef,
                im_exp,
            } => C64::new(-re_coef * nf.powf(-re_exp), im_coef * nf.powf(im_exp)),
            ClosedForm::LogImag {
                re_coef,
                re_exp,
                im_coef,
            } => C64::new(-re_coef * nf.powf(-re_exp), im_coef * nf.ln()),
            ClosedForm::DyadicCluster => {
                let k = dyadic_block(n) as i32;
                C64::new(-(2f64).powi(-k), -(2f64).powi(k))
            }
            ClosedForm::Constant { re, im } => C64::new(re, im),
        }
    }

    pub fn tail(&self) -> TailBehaviour {
        match *self {
            ClosedForm::PowerLaw {
                re_coef,
                re_exp,
                im_coef,
                im_exp,
            } => TailBehaviour {
                re_vanishes: re_exp > 0.0 || re_coef == 0.0,
                im_unbounded: im_coef != 0.0 && im_exp > 0.0,
            },
            ClosedForm::LogImag {
                re_coef,
                re_exp,
                im_coef,
            } => TailBehaviour {
                re_vanishes: re_exp > 0.0 || re_coef == 0.0,
                im_unbounded: im_coef != 0.0,
            },
            ClosedForm::DyadicCluster => TailBehaviour {
                re_vanishes: true,
                im_unbounded: true,
            },
            ClosedForm::Constant { re, im: _ } => TailBehaviour {
                re_vanishes: re == 0.0,
                im_unbounded: false,
            },
        }
    }

    /// Tail limit of `|im λ_n|·|re λ_n|^(1/α)`.
    pub fn geometric_limit(&self, alpha: f64) -> TailLimit {
        const EPS: f64 = 1e-12;
        let classify = |exponent: f64, coef: f64| {
            if coef == 0.0 {
                TailLimit::Zero
            } else if exponent > EPS {
                TailLimit::Infinite
            } else if exponent < -EPS {
                TailLimit::Zero
            } else {
                TailLimit::Positive(coef)
            }
        };
        match *self {
            ClosedForm::PowerLaw {
                re_coef,
                re_exp,
                im_coef,
                im_exp,
            } => classify(
                im_exp - re_exp / alpha,
                im_coef.abs() * re_coef.abs().powf(1.0 / alpha),
            ),
            ClosedForm::LogImag {
                re_coef, re_exp, im_coef, ..
            } => {
                if im_coef == 0.0 || re_coef == 0.0 || re_exp > 0.0 {
                    TailLimit::Zero
                } else {
                    TailLimit::Infinite
                }
            }
            ClosedForm::DyadicCluster => classify(1.0 - 1.0 / alpha, 1.0),
            ClosedForm::Constant { re, im } => {
                let v = im.abs() * re.abs().powf(1.0 / alpha);
                if v > 0.0 {
                    TailLimit::Positive(v)
                } else {
                    TailLimit::Zero
                }
            }
        }
    }

    fn sup_re_bounded(&self) -> bool {
        match *self {
            ClosedForm::PowerLaw { re_coef, re_exp, .. }
            | ClosedForm::LogImag { re_coef, re_exp, .. } => !(re_coef < 0.0 && re_exp < 0.0),
            _ => true,
        }
    }
}

/// Block index `k` with `2^k ≤ n < 2^(k+1)`.
pub fn dyadic_block(n: usize) -> u32 {
    debug_assert!(n >= 1);
    usize::BITS - 1 - n.leading_zeros()
}

/// Either a closed-form family or an explicit finite list of eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EigenvalueModel {
    ClosedForm(ClosedForm),
    List { values: Vec<C64> },
}

/// Whether statements about a generator extend beyond its truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceKind {
    CertifiedTail,
    FiniteOnly,
}

/// Norm bounds `lower·‖c‖ ≤ ‖Σ c_n φ_n‖ ≤ upper·‖c‖` of the eigenvector basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct RieszBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for RieszBounds {
    fn default() -> Self {
        RieszBounds {
            lower: 1.0,
            upper: 1.0,
        }
    }
}

impl From<[f64; 2]> for RieszBounds {
    fn from(v: [f64; 2]) -> Self {
        RieszBounds {
            lower: v[0],
            upper: v[1],
        }
    }
}

impl From<RieszBounds> for [f64; 2] {
    fn from(r: RieszBounds) -> Self {
        [r.lower, r.upper]
    }
}

impl RieszBounds {
    pub fn condition(&self) -> f64 {
        self.upper / self.lower
    }

    /// Bracket of the state-space operator norm given its coordinate value.
    pub fn bracket(&self, value: f64) -> (f64, f64) {
        (value / self.condition(), value * self.condition())
    }
}

/// Truncated complex coefficient sequence of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<C64>", into = "Vec<C64>")]
pub struct SpectralVector {
    coeffs: Vec<C64>,
    norm: f64,
}

impl From<Vec<C64>> for SpectralVector {
    fn from(coeffs: Vec<C64>) -> Self {
        SpectralVector::new(coeffs)
    }
}

impl From<SpectralVector> for Vec<C64> {
    fn from(v: SpectralVector) -> Self {
        v.coeffs
    }
}

impl SpectralVector {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let norm = l2_norm(&coeffs);
        SpectralVector { coeffs, norm }
    }

    pub fn zeros(len: usize) -> Self {
        SpectralVector {
            coeffs: vec![C64::new(0.0, 0.0); len],
            norm: 0.0,
        }
    }

    /// Unit coordinate vector `e_index` (0-based).
    pub fn unit(len: usize, index: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); len];
        coeffs[index] = C64::new(1.0, 0.0);
        SpectralVector { coeffs, norm: 1.0 }
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        Self::new(values.into_iter().map(|v| C64::new(v, 0.0)).collect())
    }

    /// `x_n = f(n)` for `n = 1..=len`.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> C64) -> Self {
        Self::new((1..=len).map(f).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &SpectralVector) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &SpectralVector) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn distance(&self, other: &SpectralVector) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

pub(crate) fn l2_norm(coeffs: &[C64]) -> f64 {
    // scaled accumulation keeps tiny and huge coefficients from under/overflowing
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = coeffs.iter().map(|c| (c / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Operator norm in coordinates together with its Riesz bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayNorm {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// 0-based index of the maximizing mode.
    pub mode: usize,
}

/// JSON document form of a generator.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDoc {
    eigenvalues: EigenvalueModel,
    truncation: usize,
    #[serde(default)]
    riesz: RieszBounds,
}

/// Diagonalizable generator `Ax = Σ λ_n ⟨x, ψ_n⟩ φ_n`, truncated to `N` modes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GeneratorDoc", into = "GeneratorDoc")]
pub struct DiagonalGenerator {
    model: EigenvalueModel,
    truncation: usize,
    riesz: RieszBounds,
    eigenvalues: Arc<[C64]>,
}

impl PartialEq for DiagonalGenerator {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
            && self.truncation == other.truncation
            && self.riesz == other.riesz
    }
}

impl TryFrom<GeneratorDoc> for DiagonalGenerator {
    type Error = Error;

    fn try_from(doc: GeneratorDoc) -> Result<Self> {
        DiagonalGenerator::new(doc.eigenvalues, doc.truncation, doc.riesz)
    }
}

impl From<DiagonalGenerator> for GeneratorDoc {
    fn from(g: DiagonalGenerator) -> Self {
        GeneratorDoc {
            eigenvalues: g.model,
            truncation: g.truncation,
            riesz: g.riesz,
        }
    }
}

impl DiagonalGenerator {
    pub fn new(model: EigenvalueModel, truncation: usize, riesz: RieszBounds) -> Result<Self> {
        if truncation == 0 {
            return Err(invalid("truncation must be at least 1"));
        }
        if !(riesz.lower > 0.0 && riesz.lower <= riesz.upper && riesz.upper.is_finite()) {
            return Err(invalid(format!(
                "Riesz bounds must satisfy 0 < m1 ≤ M1 < ∞, got ({}, {})",
                riesz.lower, riesz.upper
            )));
        }
        let eigenvalues: Vec<C64> = match &model {
            EigenvalueModel::ClosedForm(cf) => {
                if !cf.sup_re_bounded() {
                    return Err(invalid("sup re λ_n is infinite; not a generator"));
                }
                (1..=truncation).map(|n| cf.eigenvalue(n)).collect()
            }
            EigenvalueModel::List { values } => {
                if truncation > values.len() {
                    return Err(invalid(format!(
                        "truncation {truncation} exceeds list length {}",
                        values.len()
                    )));
                }
                values[..truncation].to_vec()
            }
        };
        if let Some(i) = eigenvalues.iter().position(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err(invalid(format!("eigenvalue #{i} is not finite")));
        }
        Ok(DiagonalGenerator {
            model,
            truncation,
            riesz,
            eigenvalues: eigenvalues.into(),
        })
    }

    pub fn closed_form(family: ClosedForm, truncation: usize) -> Result<Self> {
        Self::new(
            EigenvalueModel::ClosedForm(family),
            truncation,
            RieszBounds::default(),
        )
    }

    pub fn from_list(values: Vec<C64>) -> Result<Self> {
        let n = values.len();
        Self::new(EigenvalueModel::List { values }, n, RieszBounds::default())
    }

    pub fn with_riesz(mut self, riesz: RieszBounds) -> Result<Self> {
        if !(riesz.lower > 0.0 && riesz.lower <= riesz.upper) {
            return Err(invalid("Riesz bounds must satisfy 0 < m1 ≤ M1"));
        }
        self.riesz = riesz;
        Ok(self)
    }

    /// Same model with a different number of retained modes.
    pub fn retruncate(&self, truncation: usize) -> Result<Self> {
        Self::new(self.model.clone(), truncation, self.riesz)
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.truncation
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn model(&self) -> &EigenvalueModel {
        &self.model
    }

    pub fn riesz(&self) -> RieszBounds {
        self.riesz
    }

    pub fn closed_form_family(&self) -> Option<&ClosedForm> {
        match &self.model {
            EigenvalueModel::ClosedForm(cf) => Some(cf),
            EigenvalueModel::List { .. } => None,
        }
    }

    pub fn evidence(&self) -> EvidenceKind {
        match self.model {
            EigenvalueModel::ClosedForm(_) => EvidenceKind::CertifiedTail,
            EigenvalueModel::List { .. } => EvidenceKind::FiniteOnly,
        }
    }

    /// Growth bound `sup_n re λ_n` over retained modes.
    pub fn growth_bound(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Errors unless every retained eigenvalue has negative real part.
    pub fn require_sectorial(&self) -> Result<()> {
        match self.eigenvalues.iter().position(|l| l.re >= 0.0) {
            Some(index) => Err(Error::NotSectorial {
                index,
                eigenvalue: self.eigenvalues[index],
            }),
            None => Ok(()),
        }
    }

    fn check_vector(&self, x: &SpectralVector) -> Result<()> {
        check_len(self.truncation, x.len())
    }

    /// `T(t)x`, coefficient `n` equal to `e^(tλ_n) x_n`.
    pub fn semigroup_apply(&self, t: f64, x: &SpectralVector) -> Result<SpectralVector> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        self.check_vector(x)?;
        Ok(SpectralVector::new(
            self.eigenvalues
                .iter()
                .zip(x.coeffs())
                .map(|(l, c)| (l * t).exp() * c)
                .collect(),
        ))
    }

    /// `R(λ, A)x = (λI − A)^(−1)x`.
    pub fn resolvent_apply(&self, lambda: C64, x: &SpectralVector) -> Result<SpectralVector> {
        self.check_vector(x)?;
        for (index, l) in self.eigenvalues.iter().enumerate() {
            if (lambda - l).norm() <= SPECTRUM_TOLERANCE * (lambda.norm() + l.norm()) {
                return Err(Error::SpectrumHit {
                    lambda,
                    index,
                    eigenvalue: *l,
                });
            }
        }
        Ok(SpectralVector::new(
            self.eigenvalues
                .iter()
                .zip(x.coeffs())
                .map(|(l, c)| c / (lambda - l))
                .collect(),
        ))
    }

    /// `(−A)^β x` with the principal branch.
    pub fn fractional_power_apply(&self, beta: f64, x: &SpectralVector) -> Result<SpectralVector> {
        self.require_sectorial()?;
        self.check_vector(x)?;
        if beta == 0.0 {
            return Ok(x.clone());
        }
        Ok(SpectralVector::new(
            self.eigenvalues
                .iter()
                .zip(x.coeffs())
                .map(|(l, c)| (-l).powf(beta) * c)
                .collect(),
        ))
    }

    /// `‖Ax‖` in coordinates.
    pub fn apply_norm(&self, x: &SpectralVector) -> Result<f64> {
        self.check_vector(x)?;
        let ax: Vec<C64> = self
            .eigenvalues
            .iter()
            .zip(x.coeffs())
            .map(|(l, c)| l * c)
            .collect();
        Ok(l2_norm(&ax))
    }

    /// Graph norm `‖x‖ + ‖Ax‖`.
    pub fn graph_norm(&self, x: &SpectralVector) -> Result<f64> {
        Ok(x.norm() + self.apply_norm(x)?)
    }

    /// `‖T(t)(−A)^(−β)‖ = sup_n e^(t re λ_n) / |λ_n|^β` over retained modes.
    pub fn operator_decay_norm(&self, beta: f64, t: f64) -> Result<DecayNorm> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        self.require_sectorial()?;
        let (mode, value) = self
            .eigenvalues
            .par_iter()
            .enumerate()
            .map(|(i, l)| (i, (t * l.re).exp() * l.norm().powf(-beta)))
            .reduce(
                || (usize::MAX, f64::NEG_INFINITY),
                |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
            );
        let (lower, upper) = self.riesz.bracket(value);
        Ok(DecayNorm {
            value,
            lower,
            upper,
            mode,
        })
    }

    /// Smallest `M` with `‖T(t)(−A)^(−β)‖ ≤ M/(t+1)^(β/α)` for all `t ≥ 0` on the truncation.
    pub fn polynomial_decay_constant(&self, beta: f64, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(invalid("α must be positive"));
        }
        self.require_sectorial()?;
        let gamma = beta / alpha;
        Ok(self
            .eigenvalues
            .par_iter()
            .map(|l| weighted_exp_sup(gamma, -l.re) * l.norm().powf(-beta))
            .reduce(|| 0.0, f64::max))
    }

    /// Smallest `M ≥ 1` with `‖T(t)‖ ≤ M` and `‖T(t)R(1,A)‖ ≤ M/(t+1)^(1/α)`.
    pub fn resolvent_decay_constant(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(invalid("α must be positive"));
        }
        self.require_sectorial()?;
        let gamma = 1.0 / alpha;
        let m = self
            .eigenvalues
            .par_iter()
            .map(|l| weighted_exp_sup(gamma, -l.re) / (C64::new(1.0, 0.0) - l).norm())
            .reduce(|| 0.0, f64::max);
        Ok(m.max(1.0))
    }

    /// Certified upper bound of `sup_{t≥0} (t+1)^γ ‖T(t)g‖` on the truncation.
    ///
    /// `‖T(t)g‖` is nonincreasing, so on each cell of a dense geometric grid the
    /// supremum is bounded by the left norm times the right weight; beyond the grid
    /// the slowest mode dominates `(t+1)^γ e^(−a_min t)‖g‖`.
    pub fn weighted_orbit_bound(&self, g: &SpectralVector, gamma: f64) -> Result<f64> {
        self.require_sectorial()?;
        self.check_vector(g)?;
        if g.norm() == 0.0 {
            return Ok(0.0);
        }
        let a_min = self
            .eigenvalues
            .iter()
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min);
        let t_crit = (gamma / a_min - 1.0).max(0.0);
        let t_end = (4.0 * t_crit).max(64.0 / a_min).max(1.0);
        let cells = 4000usize;
        let ratio = ((t_end + 1.0).ln() / cells as f64).exp();
        let grid: Vec<f64> = std::iter::once(0.0)
            .chain((1..=cells).map(|i| ratio.powi(i as i32) - 1.0))
            .collect();
        let norms: Vec<f64> = grid
            .par_iter()
            .map(|&t| {
                let c: Vec<C64> = self
                    .eigenvalues
                    .iter()
                    .zip(g.coeffs())
                    .map(|(l, x)| x * (t * l.re).exp())
                    .collect();
                l2_norm(&c)
            })
            .collect();
        let mut bound = 0.0f64;
        for i in 0..cells {
            bound = bound.max(norms[i] * (grid[i + 1] + 1.0).powf(gamma));
        }
        let tail = g.norm() * (t_end + 1.0).powf(gamma) * (-a_min * t_end).exp();
        Ok(bound.max(tail))
    }
}

/// `sup_{t≥0} (t+1)^γ e^(−a t)` for `a > 0`, `γ ≥ 0`.
pub fn weighted_exp_sup(gamma: f64, a: f64) -> f64 {
    if gamma <= 0.0 {
        return 1.0;
    }
    if a <= 0.0 {
        return f64::INFINITY;
    }
    let peak = gamma / a;
    if peak <= 1.0 {
        1.0
    } else {
        (gamma * peak.ln() - (gamma - a)).exp()
    }
}

/// `(e^z − 1)/z` with the removable singularity filled in.
pub(crate) fn phi1(z: C64) -> C64 {
    if z.norm() < 1e-8 {
        return C64::new(1.0, 0.0) + z / 2.0;
    }
    expm1(z) / z
}

/// `e^z − 1` without cancellation for small `|z|`.
pub(crate) fn expm1(z: C64) -> C64 {
    let (s, c) = z.im.sin_cos();
    let half = (z.im / 2.0).sin();
    let em1 = z.re.exp_m1();
    C64::new(em1 * c - 2.0 * half * half, z.re.exp() * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single(l: C64) -> DiagonalGenerator {
        DiagonalGenerator::from_list(vec![l]).unwrap()
    }

    #[test]
    fn semigroup_at_zero_is_identity() {
        let g = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 5).unwrap();
        let x = SpectralVector::from_fn(5, |n| c(n as f64, -1.0 / n as f64));
        assert_eq!(g.semigroup_apply(0.0, &x).unwrap(), x);
    }

    #[test]
    fn semigroup_single_modes() {
        let y = single(c(-1.0, 0.0))
            .semigroup_apply(1.0, &SpectralVector::unit(1, 0))
            .unwrap();
        assert!((y.coeffs()[0] - c((-1.0f64).exp(), 0.0)).norm() < 1e-15);
        assert!((y.coeffs()[0].re - 0.36788).abs() < 1e-5);

        let y = single(c(-1.0, 1.0))
            .semigroup_apply(PI, &SpectralVector::unit(1, 0))
            .unwrap();
        assert!((y.coeffs()[0] - c(-(-PI).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn semigroup_rejects_bad_input() {
        let g = single(c(-1.0, 0.0));
        assert!(matches!(
            g.semigroup_apply(-1.0, &SpectralVector::unit(1, 0)),
            Err(Error::NegativeTime(_))
        ));
        assert!(matches!(
            g.semigroup_apply(1.0, &SpectralVector::zeros(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn resolvent_examples() {
        let g = DiagonalGenerator::from_list(vec![c(-1.0, 0.0); 3]).unwrap();
        let r = g
            .resolvent_apply(c(1.0, 0.0), &SpectralVector::unit(3, 0))
            .unwrap();
        assert_eq!(r.coeffs()[0], c(0.5, 0.0));

        let g = single(c(-1.0, 1.0));
        let r = g
            .resolvent_apply(c(1.0, 0.0), &SpectralVector::unit(1, 0))
            .unwrap();
        let expected = c(1.0, 0.0) / c(2.0, -1.0);
        assert!((r.coeffs()[0] - expected).norm() < 1e-15);

        assert!(matches!(
            g.resolvent_apply(c(-1.0, 1.0), &SpectralVector::unit(1, 0)),
            Err(Error::SpectrumHit { index: 0, .. })
        ));
    }

    #[test]
    fn fractional_power_examples() {
        let g = DiagonalGenerator::from_list(vec![c(-2.0, 0.0), c(-0.5, 3.0)]).unwrap();
        let x = SpectralVector::new(vec![c(1.0, 0.0), c(0.3, -0.2)]);
        assert_eq!(g.fractional_power_apply(0.0, &x).unwrap(), x);
        let y = g
            .fractional_power_apply(1.0, &SpectralVector::unit(2, 0))
            .unwrap();
        assert!((y.coeffs()[0] - c(2.0, 0.0)).norm() < 1e-14);
        let back = g
            .fractional_power_apply(1.0, &g.fractional_power_apply(-1.0, &x).unwrap())
            .unwrap();
        assert!(back.distance(&x).unwrap() <= 1e-10 * x.norm());

        let bad = single(c(0.0, 1.0));
        assert!(matches!(
            bad.fractional_power_apply(0.5, &SpectralVector::unit(1, 0)),
            Err(Error::NotSectorial { .. })
        ));
    }

    #[test]
    fn graph_norm_examples() {
        let g = single(c(-1.0, 1.0));
        assert_eq!(g.graph_norm(&SpectralVector::zeros(1)).unwrap(), 0.0);
        let v = g.graph_norm(&SpectralVector::unit(1, 0)).unwrap();
        assert!((v - (1.0 + 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn graph_norm_of_resolvent_image() {
        // ‖R(1,A)y‖_A ≤ ‖R(1,A)y‖ + ‖AR(1,A)y‖ ≤ (1 + 2‖R(1,A)‖)‖y‖
        let g = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 50).unwrap();
        let y = SpectralVector::from_fn(50, |n| c(1.0 / n as f64, 0.5));
        let x = g.resolvent_apply(c(1.0, 0.0), &y).unwrap();
        let r_norm = g
            .eigenvalues()
            .iter()
            .map(|l| 1.0 / (c(1.0, 0.0) - l).norm())
            .fold(0.0, f64::max);
        let ax: Vec<C64> = g
            .eigenvalues()
            .iter()
            .zip(x.coeffs())
            .map(|(l, v)| l * v)
            .collect();
        let ax_norm = l2_norm(&ax);
        assert!(ax_norm <= (1.0 + r_norm) * y.norm() + 1e-12);
        let gn = g.graph_norm(&x).unwrap();
        assert!((gn - (x.norm() + ax_norm)).abs() < 1e-12);
        assert!(gn <= (1.0 + 2.0 * r_norm) * y.norm() + 1e-12);
    }

    #[test]
    fn decay_norm_examples() {
        let g = single(c(-1.0, 0.0));
        for t in [0.0, 0.5, 3.0] {
            let d = g.operator_decay_norm(1.0, t).unwrap();
            assert!((d.value - (-t).exp()).abs() < 1e-15);
        }
        let g = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 20).unwrap();
        let d0 = g.operator_decay_norm(1.5, 0.0).unwrap();
        let expected = g
            .eigenvalues()
            .iter()
            .map(|l| l.norm().powf(-1.5))
            .fold(0.0, f64::max);
        assert_eq!(d0.value, expected);
    }

    #[test]
    fn decay_norm_matches_brute_force_on_large_truncation() {
        let n = 1_000_000;
        let g = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), n).unwrap();
        let t = 100.0;
        let d = g.operator_decay_norm(1.0, t).unwrap();
        let mut best = 0.0f64;
        for k in 1..=n {
            let kf = k as f64;
            let re = -1.0 / kf;
            let modulus = (re * re + kf * kf).sqrt();
            best = best.max((t * re).exp() / modulus);
        }
        assert!((d.value - best).abs() <= 1e-6 * best);
        assert!((d.value - 1.0 / (E * t)).abs() < 0.01 / (E * t));
    }

    #[test]
    fn riesz_bracket_widens_value() {
        let g = single(c(-1.0, 0.0))
            .with_riesz(RieszBounds {
                lower: 0.5,
                upper: 2.0,
            })
            .unwrap();
        let d = g.operator_decay_norm(1.0, 1.0).unwrap();
        assert!((d.lower - d.value / 4.0).abs() < 1e-15);
        assert!((d.upper - d.value * 4.0).abs() < 1e-15);
    }

    #[test]
    fn decay_constant_matches_dense_scan() {
        let g = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 40).unwrap();
        let m = g.polynomial_decay_constant(2.0, 1.0).unwrap();
        let mut scan = 0.0f64;
        for i in 0..20000 {
            let t = i as f64 * 0.05;
            scan = scan.max((t + 1.0).powi(2) * g.operator_decay_norm(2.0, t).unwrap().value);
        }
        assert!(scan <= m * (1.0 + 1e-12));
        assert!(scan >= m * (1.0 - 1e-4));
    }

    #[test]
    fn weighted_exp_sup_closed_form() {
        for (gamma, a) in [(1.0, 0.01), (2.0, 0.3), (0.5, 2.0), (1.0, 1.0)] {
            let exact = weighted_exp_sup(gamma, a);
            let mut scan = 0.0f64;
            for i in 0..200_000 {
                let t = i as f64 * 0.01;
                scan = scan.max((t + 1.0f64).powf(gamma) * (-a * t).exp());
            }
            assert!(scan <= exact * (1.0 + 1e-12), "{gamma} {a}");
            assert!(scan >= exact * (1.0 - 1e-6), "{gamma} {a}");
        }
    }

    #[test]
    fn orbit_bound_dominates_samples() {
        let g = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 100).unwrap();
        let x = SpectralVector::from_fn(100, |n| c((n as f64).powf(-2.5), 0.0));
        let k = g.weighted_orbit_bound(&x, 1.0).unwrap();
        for i in 0..2000 {
            let t = i as f64 * 0.37;
            let v = (t + 1.0) * g.semigroup_apply(t, &x).unwrap().norm();
            assert!(v <= k);
        }
    }

    #[test]
    fn expm1_is_accurate_for_small_arguments() {
        let z = c(1e-9, -2e-9);
        let e = expm1(z);
        assert!((e - z).norm() < 1e-17);
        let big = c(0.7, 2.1);
        assert!((expm1(big) - (big.exp() - 1.0)).norm() < 1e-14);
        assert_eq!(phi1(c(0.0, 0.0)), c(1.0, 0.0));
    }

    #[test]
    fn dyadic_blocks() {
        assert_eq!(dyadic_block(1), 0);
        assert_eq!(dyadic_block(2), 1);
        assert_eq!(dyadic_block(3), 1);
        assert_eq!(dyadic_block(4), 2);
        assert_eq!(dyadic_block(15), 3);
        let g = DiagonalGenerator::closed_form(ClosedForm::DyadicCluster, 7).unwrap();
        assert_eq!(g.eigenvalues()[3], c(-0.25, -4.0));
    }

    #[test]
    fn json_document_shape() {
        let g = DiagonalGenerator::closed_form(ClosedForm::power_law(2.0), 8).unwrap();
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(v["eigenvalues"]["kind"], "closed_form");
        assert_eq!(v["eigenvalues"]["family"], "power_law");
        assert_eq!(v["truncation"], 8);
        assert_eq!(v["riesz"], serde_json::json!([1.0, 1.0]));
        let back: DiagonalGenerator = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.eigenvalues(), g.eigenvalues());

        let list = r#"{"eigenvalues":{"kind":"list","values":[[-1.0,2.0],[-0.5,0.0]]},"truncation":2,"riesz":[1.0,3.0]}"#;
        let g: DiagonalGenerator = serde_json::from_str(list).unwrap();
        assert_eq!(g.eigenvalues()[0], c(-1.0, 2.0));
        assert_eq!(g.riesz().upper, 3.0);
        assert_eq!(g.evidence(), EvidenceKind::FiniteOnly);

        let bad = r#"{"eigenvalues":{"kind":"list","values":[[-1.0,2.0]]},"truncation":0,"riesz":[1.0,1.0]}"#;
        assert!(serde_json::from_str::<DiagonalGenerator>(bad).is_err());
    }
}
