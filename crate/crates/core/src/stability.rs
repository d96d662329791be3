//! Semi-uniform and polynomial stability of diagonal generators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{least_squares, GeometricGrid};
use crate::spectral::{DiagonalGenerator, EvidenceKind, TailBehaviour, TailLimit, C64};

/// Residual (log₁₀ units) separating polynomial from faster decay.
pub const POLYNOMIAL_RESIDUAL: f64 = 0.05;

const C_RANGE: (i32, i32) = (-6, 6);
const GRID_PER_DECADE: i32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenpoint {
    /// 0-based mode index.
    pub index: usize,
    pub eigenvalue: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `inf_n |re λ_n|` over retained modes.
    pub gap: f64,
    pub semi_uniform: bool,
    pub evidence: EvidenceKind,
    pub tail: Option<TailBehaviour>,
    /// First retained eigenvalue with `re λ ≥ 0`, if any.
    pub offending: Option<Eigenpoint>,
}

/// Spectral test for semi-uniform stability: no spectrum on or accumulating at `iℝ`.
pub fn check_spectral_gap(gen: &DiagonalGenerator) -> GapReport {
    let eig = gen.eigenvalues();
    let gap = eig.iter().map(|l| l.re.abs()).fold(f64::INFINITY, f64::min);
    let offending = eig.iter().position(|l| l.re >= 0.0).map(|index| Eigenpoint {
        index,
        eigenvalue: eig[index],
    });
    let tail = gen.closed_form_family().map(|cf| cf.tail());
    let tail_ok = match tail {
        Some(t) => !t.re_vanishes || t.im_unbounded,
        None => true,
    };
    GapReport {
        gap,
        semi_uniform: offending.is_none() && tail_ok,
        evidence: gen.evidence(),
        tail,
        offending,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConditionReport {
    pub alpha: f64,
    pub holds: bool,
    /// Largest grid value `C` found feasible.
    pub c: Option<f64>,
    /// Strip width `p` paired with `c`.
    pub p: Option<f64>,
    pub witness: Option<Eigenpoint>,
    pub evidence: EvidenceKind,
    pub tail_limit: Option<TailLimit>,
}

fn log_grid(lo: f64, hi: f64) -> Vec<f64> {
    let jlo = (lo.log10() * GRID_PER_DECADE as f64).floor() as i32;
    let jhi = (hi.log10() * GRID_PER_DECADE as f64).ceil() as i32;
    (jlo..=jhi)
        .map(|j| 10f64.powf(j as f64 / GRID_PER_DECADE as f64))
        .filter(|&v| v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12))
        .collect()
}

/// Largest grid value not exceeding `x` (relative slack `1e-12`).
fn grid_floor(x: f64) -> Option<f64> {
    let (lo, hi) = C_RANGE;
    if x.is_infinite() {
        return Some(10f64.powi(hi));
    }
    (lo * GRID_PER_DECADE..=hi * GRID_PER_DECADE)
        .rev()
        .map(|j| 10f64.powf(j as f64 / GRID_PER_DECADE as f64))
        .find(|&c| c <= x * (1.0 + 1e-12))
}

/// Searches `(C, p)` with `|im λ_n| ≥ C/|re λ_n|^(1/α)` whenever `re λ_n > −p`.
pub fn check_polynomial_spectral_condition(
    gen: &DiagonalGenerator,
    alpha: f64,
) -> Result<SpectralConditionReport> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter("α must be positive".into()));
    }
    gen.require_sectorial()?;
    let eig = gen.eigenvalues();
    // sort by |re λ| so every strip {|re λ| < p} is a prefix
    let mut order: Vec<usize> = (0..eig.len()).collect();
    order.sort_by(|&a, &b| eig[a].re.abs().total_cmp(&eig[b].re.abs()));
    let product = |i: usize| eig[i].im.abs() * eig[i].re.abs().powf(1.0 / alpha);
    let mut prefix_min = Vec::with_capacity(order.len());
    let mut running = (f64::INFINITY, usize::MAX);
    for &i in &order {
        let v = product(i);
        if v < running.0 {
            running = (v, i);
        }
        prefix_min.push(running);
    }
    let re_sorted: Vec<f64> = order.iter().map(|&i| eig[i].re.abs()).collect();
    let sup_re = *re_sorted.last().unwrap();

    let mut best: Option<(f64, f64)> = None;
    for p in log_grid(1e-6, sup_re.max(1e-6)) {
        let count = re_sorted.partition_point(|&a| a < p);
        if count == 0 {
            continue;
        }
        let cmax = prefix_min[count - 1].0;
        if let Some(c) = grid_floor(cmax) {
            let better = match best {
                None => true,
                Some((bc, bp)) => c > bc || (c == bc && p > bp),
            };
            if better {
                best = Some((c, p));
            }
        }
    }
    let witness_at = |i: usize| Eigenpoint {
        index: i,
        eigenvalue: eig[i],
    };
    let global_min = prefix_min.last().unwrap().1;

    let family = gen.closed_form_family();
    let tail_limit = family.map(|cf| cf.geometric_limit(alpha));
    let evidence = gen.evidence();

    let report = match (family, best) {
        (Some(cf), _) if !cf.tail().re_vanishes => {
            // only finitely many eigenvalues approach the axis strip; the tail is vacuous
            let (c, p) = best.unwrap_or((10f64.powi(C_RANGE.1), 1e-6));
            SpectralConditionReport {
                alpha,
                holds: true,
                c: Some(c),
                p: Some(p),
                witness: None,
                evidence,
                tail_limit,
            }
        }
        (Some(_), _) if tail_limit == Some(TailLimit::Zero) => SpectralConditionReport {
            alpha,
            holds: false,
            c: None,
            p: None,
            witness: Some(witness_at(global_min)),
            evidence,
            tail_limit,
        },
        (_, Some((c, p))) => {
            let c = match tail_limit {
                Some(TailLimit::Positive(l)) => grid_floor(l).map_or(c, |lc| lc.min(c)),
                _ => c,
            };
            SpectralConditionReport {
                alpha,
                holds: true,
                c: Some(c),
                p: Some(p),
                witness: None,
                evidence,
                tail_limit,
            }
        }
        (_, None) => SpectralConditionReport {
            alpha,
            holds: false,
            c: None,
            p: None,
            witness: Some(witness_at(global_min)),
            evidence,
            tail_limit,
        },
    };
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    Polynomial,
    ExponentialOrFaster,
    NonDecaying,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub beta: f64,
    /// Fitted exponent `ê` with `‖T(t)(−A)^(−β)‖ ≈ C t^(−ê)`.
    pub exponent: Option<f64>,
    /// Largest log₁₀ deviation from the fitted line.
    #[serde(with = "crate::num_serde::lenient")]
    pub residual: f64,
    pub grid: GeometricGrid,
    pub classification: DecayClass,
    /// `(t, ‖T(t)(−A)^(−β)‖)` samples.
    pub samples: Vec<(f64, f64)>,
}

impl DecayFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,norm\n");
        for (t, v) in &self.samples {
            s.push_str(&format!("{t},{v}\n"));
        }
        s
    }
}

/// Least-squares exponent of `t ↦ ‖T(t)(−A)^(−β)‖` in log-log coordinates.
pub fn fit_decay_exponent(
    gen: &DiagonalGenerator,
    beta: f64,
    grid: &GeometricGrid,
) -> Result<DecayFit> {
    fit_decay_exponent_with(gen, beta, grid, POLYNOMIAL_RESIDUAL)
}

pub fn fit_decay_exponent_with(
    gen: &DiagonalGenerator,
    beta: f64,
    grid: &GeometricGrid,
    residual_threshold: f64,
) -> Result<DecayFit> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter("β must be positive".into()));
    }
    if grid.points < 8 || grid.decades() < 3.0 - 1e-12 {
        return Err(Error::InvalidGrid(format!(
            "decay fits need ≥ 8 points over ≥ 3 decades, got {} points over {:.2}",
            grid.points,
            grid.decades()
        )));
    }
    let ts = grid.values();
    let gap = check_spectral_gap(gen);
    if !gap.semi_uniform {
        return Ok(DecayFit {
            beta,
            exponent: None,
            residual: f64::INFINITY,
            grid: grid.clone(),
            classification: DecayClass::NonDecaying,
            samples: Vec::new(),
        });
    }
    let norms: Vec<f64> = ts
        .par_iter()
        .map(|&t| gen.operator_decay_norm(beta, t).map(|d| d.value))
        .collect::<Result<_>>()?;
    let samples: Vec<(f64, f64)> = ts.iter().copied().zip(norms.iter().copied()).collect();
    let first = norms[0];
    let last = *norms.last().unwrap();

    if last >= first * (1.0 - 1e-12) {
        return Ok(DecayFit {
            beta,
            exponent: None,
            residual: 0.0,
            grid: grid.clone(),
            classification: DecayClass::NonDecaying,
            samples,
        });
    }
    if norms.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Ok(DecayFit {
            beta,
            exponent: None,
            residual: f64::INFINITY,
            grid: grid.clone(),
            classification: DecayClass::ExponentialOrFaster,
            samples,
        });
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.log10()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.log10()).collect();
    let fit = least_squares(&xs, &ys).expect("grid has ≥ 8 distinct points");
    let exponent = -fit.slope;
    let classification = if exponent <= 1e-3 {
        DecayClass::NonDecaying
    } else if fit.max_residual <= residual_threshold {
        DecayClass::Polynomial
    } else {
        DecayClass::ExponentialOrFaster
    };
    Ok(DecayFit {
        beta,
        exponent: (classification != DecayClass::NonDecaying).then_some(exponent),
        residual: fit.max_residual,
        grid: grid.clone(),
        classification,
        samples,
    })
}
