//! Infinite-time L∞-admissibility of bounded input operators.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operator::InputOperator;
use crate::series::{partial_sums, tail_slope, Convergence, GeometricGrid, TailSlope};
use crate::spectral::{check_len, phi1, DiagonalGenerator, SpectralVector, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSum {
    #[serde(with = "crate::num_serde::lenient")]
    pub sum: f64,
    pub tail: TailSlope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeConditionReport {
    pub beta: f64,
    pub alpha: Option<f64>,
    /// `Σ_n |λ_n|^(2β) |b_n|²` per column.
    pub columns: Vec<ColumnSum>,
    #[serde(with = "crate::num_serde::lenient")]
    pub sum: f64,
    pub converges: bool,
    /// `‖(−A)^β B‖` on the truncation.
    #[serde(with = "crate::num_serde::lenient")]
    pub fractional_norm: f64,
    pub decay_constant: Option<f64>,
    /// `α M ‖(−A)^β B‖ / (β − α)`, present when `β > α` and the sums converge.
    pub bound: Option<f64>,
}

pub fn range_condition_margin(
    gen: &DiagonalGenerator,
    b: &InputOperator,
    beta: f64,
    alpha: Option<f64>,
) -> Result<RangeConditionReport> {
    if !(beta > 0.0) {
        return Err(invalid(format!("β must be positive, got {beta}")));
    }
    gen.require_sectorial()?;
    check_len(gen.len(), b.state_len())?;
    let lam = gen.eigenvalues();
    let columns: Vec<ColumnSum> = (0..b.channels())
        .map(|ch| {
            let sums = partial_sums(
                (0..lam.len()).map(|n| lam[n].norm().powf(2.0 * beta) * b.entry(n, ch).norm_sqr()),
            );
            ColumnSum {
                sum: *sums.last().unwrap_or(&0.0),
                tail: tail_slope(&sums),
            }
        })
        .collect();
    let sum = columns.iter().map(|c| c.sum).sum();
    let converges = columns.iter().all(|c| c.tail.verdict.converges());
    let fractional = b.map_rows(|n, x| x * C64::new(-lam[n].re, -lam[n].im).powf(beta));
    let fractional_norm = fractional.operator_norm();
    let (decay_constant, bound) = match alpha {
        Some(a) if beta > a && converges => {
            let m = gen.polynomial_decay_constant(beta, a)?;
            (Some(m), Some(a * m * fractional_norm / (beta - a)))
        }
        Some(a) if a > 0.0 => (Some(gen.polynomial_decay_constant(beta, a)?), None),
        _ => (None, None),
    };
    Ok(RangeConditionReport {
        beta,
        alpha,
        columns,
        sum,
        converges,
        fractional_norm,
        decay_constant,
        bound,
    })
}

/// `inf |im λ_n − im λ_m|` over distinct retained modes with `|re λ| < p`; `+∞` when fewer
/// than two modes lie in the strip.
pub fn separation_gap(gen: &DiagonalGenerator, p: f64) -> f64 {
    let mut ims: Vec<f64> = gen
        .eigenvalues()
        .iter()
        .filter(|l| l.re.abs() < p)
        .map(|l| l.im)
        .collect();
    if ims.len() < 2 {
        return f64::INFINITY;
    }
    ims.sort_by(f64::total_cmp);
    ims.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Index `k` of the dyadic stripe `2^k ≤ a < 2^(k+1)`.
pub fn stripe_index(a: f64) -> i32 {
    let mut k = a.log2().floor() as i32;
    while 2f64.powi(k) > a {
        k -= 1;
    }
    while 2f64.powi(k + 1) <= a {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stripe {
    pub k: i32,
    pub phi: f64,
    pub count: usize,
    /// `ν(S_k) = Σ_{−λ_n ∈ S_k} |b_n|²`.
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub stripes: Vec<Stripe>,
    #[serde(with = "crate::num_serde::lenient")]
    pub sum: f64,
    /// `(n, Σ_k Φ_k)` over the first `n` modes, at powers of two and at `N`.
    pub partial_sums: Vec<(usize, f64)>,
    pub tail: TailSlope,
    pub divergent: bool,
    /// Separation gap at `p`; `None` stands for `+∞`.
    pub gap: Option<f64>,
    pub p: f64,
    pub norm_sq: f64,
    /// `(1/d² + 4/p²)‖b‖² + Σ Φ_k` when `d > 0`.
    pub sandwich_upper: Option<f64>,
}

impl CarlesonReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,phi,count\n");
        for st in &self.stripes {
            let _ = writeln!(s, "{},{:e},{}", st.k, st.phi, st.count);
        }
        s
    }
}

fn require_stable(gen: &DiagonalGenerator) -> Result<()> {
    if let Some(bad) = gen.eigenvalues().iter().position(|l| !(l.re < 0.0)) {
        return Err(crate::Error::NotSectorial {
            index: bad,
            eigenvalue: gen.eigenvalues()[bad],
        });
    }
    Ok(())
}

/// `Σ_k Φ_k` with the threshold `p` chosen to minimize the sandwich constant.
pub fn phi_sums(gen: &DiagonalGenerator, b: &SpectralVector) -> Result<CarlesonReport> {
    phi_sums_with(gen, b, None)
}

pub fn phi_sums_with(
    gen: &DiagonalGenerator,
    b: &SpectralVector,
    p: Option<f64>,
) -> Result<CarlesonReport> {
    require_stable(gen)?;
    check_len(gen.len(), b.len())?;
    let lam = gen.eigenvalues();
    let mut stripes: BTreeMap<i32, Stripe> = BTreeMap::new();
    let mut running = 0.0;
    let mut sums = Vec::with_capacity(lam.len());
    for (l, x) in lam.iter().zip(b.coeffs()) {
        let a = -l.re;
        let w = x.norm_sqr();
        let k = stripe_index(a);
        let st = stripes.entry(k).or_insert(Stripe {
            k,
            phi: 0.0,
            count: 0,
            mass: 0.0,
        });
        st.count += 1;
        st.mass += w;
        let phi = w / (a * a);
        if phi > st.phi {
            running += phi - st.phi;
            st.phi = phi;
        }
        sums.push(running);
    }
    let sum: f64 = stripes.values().map(|s| s.phi).sum();
    let tail = tail_slope(&sums);
    let checkpoints: Vec<(usize, f64)> = (0..)
        .map(|j| 1usize << j)
        .take_while(|&n| n < sums.len())
        .chain(std::iter::once(sums.len()))
        .map(|n| (n, sums[n - 1]))
        .collect();
    let norm_sq = b.norm().powi(2);
    let (p, gap) = match p {
        Some(p) => (p, separation_gap(gen, p)),
        None => best_threshold(gen, norm_sq),
    };
    let sandwich_upper = (gap > 0.0).then(|| {
        let inv_d = if gap.is_finite() { 1.0 / (gap * gap) } else { 0.0 };
        (inv_d + 4.0 / (p * p)) * norm_sq + sum
    });
    Ok(CarlesonReport {
        stripes: stripes.into_values().collect(),
        sum,
        partial_sums: checkpoints,
        divergent: tail.verdict == Convergence::Divergent,
        tail,
        gap: gap.is_finite().then_some(gap),
        p,
        norm_sq,
        sandwich_upper,
    })
}

/// Dyadic threshold with the smallest `1/d² + 4/p²` among those with `d > 0`.
fn best_threshold(gen: &DiagonalGenerator, norm_sq: f64) -> (f64, f64) {
    let (lo, hi) = gen
        .eigenvalues()
        .iter()
        .map(|l| -l.re)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), a| (lo.min(a), hi.max(a)));
    let mut best: Option<(f64, f64, f64)> = None;
    for j in stripe_index(lo)..=stripe_index(hi) + 2 {
        let p = 2f64.powi(j);
        let d = separation_gap(gen, p);
        if d <= 0.0 {
            continue;
        }
        let inv_d = if d.is_finite() { 1.0 / (d * d) } else { 0.0 };
        let c = (inv_d + 4.0 / (p * p)) * norm_sq.max(1.0);
        if best.is_none_or(|b| c < b.0) {
            best = Some((c, p, d));
        }
    }
    match best {
        Some((_, p, d)) => (p, d),
        None => {
            let p = 2f64.powi(stripe_index(hi) + 1);
            (p, separation_gap(gen, p))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonGeneral {
    /// Certified lower bound of `Σ_k sup_I ν(Q_I ∩ S_k)/|I|²`.
    #[serde(with = "crate::num_serde::lenient")]
    pub value: f64,
    pub candidate_intervals: usize,
    pub per_stripe: Vec<(i32, f64)>,
}

/// Lengths tried per stripe beyond the stripe's own real parts.
const MAX_LENGTHS: usize = 256;

/// Evaluates `ν(Q_I ∩ S_k)/|I|²` over a finite family of intervals per stripe.
///
/// Lengths are the real parts `a_m` of the stripe's points (taken as right limits, so a
/// point with `a_m = |I|` counts) and dyadic multiples of half the separation gap up to
/// the imaginary span. For each length every window with an endpoint on a point is tried,
/// which contains the optimal placement for that length.
pub fn carleson_sum_general(
    gen: &DiagonalGenerator,
    b: &SpectralVector,
) -> Result<CarlesonGeneral> {
    require_stable(gen)?;
    check_len(gen.len(), b.len())?;
    let gap = separation_gap(gen, f64::INFINITY);
    let mut groups: BTreeMap<i32, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for (l, x) in gen.eigenvalues().iter().zip(b.coeffs()) {
        let w = x.norm_sqr();
        if w > 0.0 {
            groups
                .entry(stripe_index(-l.re))
                .or_default()
                .push((-l.re, -l.im, w));
        }
    }
    let results: Vec<(i32, f64, usize)> = groups
        .into_par_iter()
        .map(|(k, mut pts)| {
            pts.sort_by(|p, q| p.1.total_cmp(&q.1));
            let (best, count) = stripe_sup(&pts, gap);
            (k, best, count)
        })
        .collect();
    Ok(CarlesonGeneral {
        value: results.iter().map(|r| r.1).sum(),
        candidate_intervals: results.iter().map(|r| r.2).sum(),
        per_stripe: results.iter().map(|r| (r.0, r.1)).collect(),
    })
}

/// Points are `(a, y, w)` sorted by `y`.
fn stripe_sup(pts: &[(f64, f64, f64)], gap: f64) -> (f64, usize) {
    let mut lengths: Vec<f64> = pts.iter().map(|p| p.0).collect();
    lengths.sort_by(f64::total_cmp);
    lengths.dedup();
    if lengths.len() > MAX_LENGTHS {
        let step = lengths.len() as f64 / MAX_LENGTHS as f64;
        let mut keep: Vec<f64> = (0..MAX_LENGTHS)
            .map(|i| lengths[(i as f64 * step) as usize])
            .collect();
        keep.push(*lengths.last().unwrap());
        let phi_arg = pts
            .iter()
            .max_by(|p, q| (p.2 / (p.0 * p.0)).total_cmp(&(q.2 / (q.0 * q.0))))
            .unwrap();
        keep.push(phi_arg.0);
        lengths = keep;
    }
    let a_min = lengths[0];
    let span = pts.last().unwrap().1 - pts[0].1;
    if gap.is_finite() && gap > 0.0 {
        let mut l = gap / 2.0;
        while l <= span && lengths.len() < 2 * MAX_LENGTHS + 2 {
            if l >= a_min {
                lengths.push(l);
            }
            l *= 2.0;
        }
    }
    if span >= a_min {
        lengths.push(span);
    }
    let mut best = 0.0f64;
    let mut count = 0;
    let mut eligible: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &len in &lengths {
        eligible.clear();
        eligible.extend(pts.iter().filter(|p| p.0 <= len).map(|p| (p.1, p.2)));
        if eligible.is_empty() {
            continue;
        }
        // windows [y_i, y_i + len]
        let mut hi = 0;
        let mut acc = 0.0;
        for lo in 0..eligible.len() {
            while hi < eligible.len() && eligible[hi].0 <= eligible[lo].0 + len {
                acc += eligible[hi].1;
                hi += 1;
            }
            best = best.max(acc / (len * len));
            count += 1;
            acc -= eligible[lo].1;
        }
    }
    (best, count)
}

/// Largest number of distinct eigenvalues tracked by the convolution estimator.
pub const MAX_GROUPS: usize = 256;
/// Largest number of input pieces on `[0, horizon]`.
pub const MAX_PIECES: usize = 1 << 21;

/// Rough operation count of [`admissibility_constant_estimate`]: pieces × tracked groups × trials.
pub fn estimate_work(gen: &DiagonalGenerator, b: &InputOperator, horizon: f64) -> f64 {
    let lam = gen.eigenvalues();
    let mut distinct = std::collections::BTreeSet::new();
    let mut max_im = 0.0f64;
    for n in 0..lam.len().min(b.state_len()) {
        if b.row_norm(n) > 0.0 {
            distinct.insert((lam[n].re.to_bits(), lam[n].im.to_bits()));
            max_im = max_im.max(lam[n].im.abs());
        }
    }
    let groups = distinct.len().min(MAX_GROUPS) as f64;
    let pieces = (horizon * 2.0 * max_im / std::f64::consts::PI)
        .ceil()
        .clamp(256.0, MAX_PIECES as f64);
    pieces * groups * (groups + 5.0)
}

/// How the tail `∫_H^∞ ‖T(s)B‖ ds` was bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    /// `Σ_n ‖B_n‖ e^(−a_n H)/a_n`, valid on the truncation.
    Rigorous,
    /// Power-law extrapolation from the fitted decay exponent.
    Extrapolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityEstimate {
    pub horizon: f64,
    /// Best convolution norm found over trial inputs with `‖u‖_∞ ≤ 1`.
    pub lower: f64,
    #[serde(with = "crate::num_serde::lenient")]
    pub upper: f64,
    /// Quadrature part of `upper` on `[0, horizon]`.
    #[serde(with = "crate::num_serde::lenient")]
    pub quadrature: f64,
    #[serde(with = "crate::num_serde::lenient")]
    pub tail: f64,
    pub tail_kind: TailKind,
    /// `(lower, upper)` transported to the state norm through the Riesz constants.
    pub state_norm_bracket: (f64, f64),
    pub best_trial: String,
    pub trials_run: usize,
    pub pieces: usize,
    pub groups: usize,
}

/// Modes sharing one eigenvalue, with `G = Σ_n B_n^* B_n` over the group's channels.
struct Group {
    lambda: C64,
    channels: Vec<usize>,
    gram: DMatrix<C64>,
}

impl Group {
    fn quad(&self, j: &[C64]) -> f64 {
        let k = self.channels.len();
        let mut s = 0.0;
        for r in 0..k {
            let mut row = C64::new(0.0, 0.0);
            for c in 0..k {
                row += self.gram[(r, c)] * j[c];
            }
            s += (j[r].conj() * row).re;
        }
        s.max(0.0)
    }

    fn gram_times(&self, j: &[C64]) -> Vec<C64> {
        let k = self.channels.len();
        (0..k)
            .map(|r| (0..k).map(|c| self.gram[(r, c)] * j[c]).sum())
            .collect()
    }
}

/// `∫₀ᵗ T(s) B u(s) ds` for piecewise-constant `u` on a uniform grid, grouped by eigenvalue.
struct ConvolutionEngine {
    groups: Vec<Group>,
    /// Active input channels in local numbering.
    channels: usize,
    width: f64,
    pieces: usize,
}

struct Run {
    peak: f64,
    /// Final `J_λ = ∫ e^(λs) u(s) ds` per group, over the group's channels.
    finals: Vec<Vec<C64>>,
}

impl ConvolutionEngine {
    fn new(gen: &DiagonalGenerator, b: &InputOperator, horizon: f64) -> Self {
        let lam = gen.eigenvalues();
        let mut by_value: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
        for n in 0..lam.len() {
            if b.row_norm(n) > 0.0 {
                by_value
                    .entry((lam[n].re.to_bits(), lam[n].im.to_bits()))
                    .or_default()
                    .push(n);
            }
        }
        let mut scored: Vec<(f64, Vec<usize>)> = by_value
            .into_values()
            .map(|modes| {
                let a = -lam[modes[0]].re;
                let w: f64 = modes.iter().map(|&n| b.row_norm(n).powi(2)).sum();
                let reach = -(-a * horizon).exp_m1() / a;
                (w.sqrt() * reach, modes)
            })
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0));
        scored.truncate(MAX_GROUPS);

        let mut used: Vec<Vec<usize>> = Vec::with_capacity(scored.len());
        for (_, modes) in &scored {
            used.push(
                (0..b.channels())
                    .filter(|&c| modes.iter().any(|&n| b.entry(n, c) != C64::new(0.0, 0.0)))
                    .collect(),
            );
        }
        let mut all: Vec<usize> = used.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        let local: BTreeMap<usize, usize> = all.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let groups: Vec<Group> = scored
            .iter()
            .zip(&used)
            .map(|((_, modes), chans)| Group {
                lambda: lam[modes[0]],
                channels: chans.iter().map(|c| local[c]).collect(),
                gram: DMatrix::from_fn(chans.len(), chans.len(), |r, c| {
                    modes
                        .iter()
                        .map(|&n| b.entry(n, chans[r]).conj() * b.entry(n, chans[c]))
                        .sum()
                }),
            })
            .collect();
        let max_im = groups
            .iter()
            .map(|g| g.lambda.im.abs())
            .fold(0.0f64, f64::max);
        let mut pieces = 256usize;
        if max_im > 0.0 {
            let needed = (horizon * 2.0 * max_im / std::f64::consts::PI).ceil();
            pieces = pieces.max(needed.min(MAX_PIECES as f64) as usize);
        }
        ConvolutionEngine {
            groups,
            channels: all.len(),
            width: horizon / pieces as f64,
            pieces,
        }
    }

    /// Drives the input chosen by `policy(piece, per-group piece integrals)`.
    fn run(&self, mut policy: impl FnMut(usize, &[C64]) -> Vec<C64>) -> Run {
        let h = self.width;
        let steps: Vec<C64> = self.groups.iter().map(|g| (g.lambda * h).exp()).collect();
        let base: Vec<C64> = self.groups.iter().map(|g| phi1(g.lambda * h) * h).collect();
        let mut cur: Vec<C64> = vec![C64::new(1.0, 0.0); self.groups.len()];
        let mut acc: Vec<Vec<C64>> = self
            .groups
            .iter()
            .map(|g| vec![C64::new(0.0, 0.0); g.channels.len()])
            .collect();
        let mut integrals = vec![C64::new(0.0, 0.0); self.groups.len()];
        let mut peak = 0.0f64;
        for j in 0..self.pieces {
            if j % 512 == 0 {
                let s = j as f64 * h;
                for (c, g) in cur.iter_mut().zip(&self.groups) {
                    *c = (g.lambda * s).exp();
                }
            }
            for i in 0..self.groups.len() {
                integrals[i] = cur[i] * base[i];
            }
            let u = policy(j, &integrals);
            let mut norm_sq = 0.0;
            for (i, g) in self.groups.iter().enumerate() {
                for (a, &c) in acc[i].iter_mut().zip(&g.channels) {
                    *a += integrals[i] * u[c];
                }
                norm_sq += g.quad(&acc[i]);
                cur[i] *= steps[i];
            }
            peak = peak.max(norm_sq.sqrt());
        }
        Run { peak, finals: acc }
    }

    fn unit(v: Vec<C64>) -> Vec<C64> {
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            v.into_iter().map(|x| x / n).collect()
        } else {
            let mut e = vec![C64::new(0.0, 0.0); v.len()];
            e[0] = C64::new(1.0, 0.0);
            e
        }
    }

    /// Input `u_j = v · conj(I_gj)/|I_gj|` saturating group `g` along `v`.
    fn target(&self, g: usize) -> Run {
        let grp = &self.groups[g];
        let eig = grp.gram.clone().symmetric_eigen();
        let top = (0..eig.eigenvalues.len())
            .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .unwrap_or(0);
        let mut v = vec![C64::new(0.0, 0.0); self.channels];
        for (r, &c) in grp.channels.iter().enumerate() {
            v[c] = eig.eigenvectors[(r, top)];
        }
        let v = Self::unit(v);
        self.run(|_, ints| {
            let i = ints[g];
            let ph = if i.norm() > 0.0 { i.conj() / i.norm() } else { C64::new(1.0, 0.0) };
            v.iter().map(|x| x * ph).collect()
        })
    }

    /// Input aligned with the final state of a previous run.
    fn aligned(&self, previous: &Run) -> Run {
        let weights: Vec<Vec<C64>> = self
            .groups
            .iter()
            .zip(&previous.finals)
            .map(|(g, j)| g.gram_times(j))
            .collect();
        self.run(|_, ints| {
            let mut w = vec![C64::new(0.0, 0.0); self.channels];
            for ((g, gw), i) in self.groups.iter().zip(&weights).zip(ints) {
                for (&c, x) in g.channels.iter().zip(gw) {
                    w[c] += i * x.conj();
                }
            }
            Self::unit(w.into_iter().map(|x| x.conj()).collect())
        })
    }

    fn random(&self, seed: u64) -> Run {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hold = 1usize << rng.gen_range(0..12u32);
        let m = self.channels;
        let mut current = vec![C64::new(1.0, 0.0); m];
        self.run(|j, _| {
            if j % hold == 0 {
                current = Self::unit(
                    (0..m)
                        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect(),
                );
            }
            current.clone()
        })
    }
}

/// Bracket for `sup_{t ≤ horizon, ‖u‖_∞ ≤ 1} ‖∫₀ᵗ T(s)Bu(s)ds‖` and its infinite-horizon limit.
///
/// The lower bound runs structured trial inputs (one saturating each tracked eigenvalue,
/// then greedy alignment with the best final state) plus `trials` random piecewise-constant
/// unit inputs, and is a heuristic search. The upper bound integrates `‖T(s)B‖` with an
/// exponential left-sum that is exact for a single mode and adds a tail bound.
pub fn admissibility_constant_estimate(
    gen: &DiagonalGenerator,
    b: &InputOperator,
    horizon: f64,
    trials: usize,
    seed: u64,
) -> Result<AdmissibilityEstimate> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    require_stable(gen)?;
    check_len(gen.len(), b.state_len())?;
    if b.is_zero() {
        return Ok(AdmissibilityEstimate {
            horizon,
            lower: 0.0,
            upper: 0.0,
            quadrature: 0.0,
            tail: 0.0,
            tail_kind: TailKind::Rigorous,
            state_norm_bracket: (0.0, 0.0),
            best_trial: "zero".into(),
            trials_run: 0,
            pieces: 0,
            groups: 0,
        });
    }
    let engine = ConvolutionEngine::new(gen, b, horizon);
    let targets: Vec<(f64, String, Run)> = (0..engine.groups.len())
        .into_par_iter()
        .map(|g| {
            let r = engine.target(g);
            (r.peak, format!("target λ={}", engine.groups[g].lambda), r)
        })
        .collect();
    let mut best_peak = 0.0;
    let mut best_label = String::new();
    let mut best_run: Option<&Run> = None;
    for (peak, label, run) in &targets {
        if *peak > best_peak {
            best_peak = *peak;
            best_label = label.clone();
            best_run = Some(run);
        }
    }
    let mut trials_run = targets.len();
    if let Some(start) = best_run {
        let mut prev = engine.aligned(start);
        trials_run += 1;
        for round in 0..4 {
            if prev.peak > best_peak {
                best_peak = prev.peak;
                best_label = format!("aligned round {round}");
            }
            let next = engine.aligned(&prev);
            trials_run += 1;
            let stalled = next.peak <= prev.peak * (1.0 + 1e-9);
            prev = next;
            if stalled {
                break;
            }
        }
        if prev.peak > best_peak {
            best_peak = prev.peak;
            best_label = "aligned".into();
        }
    }
    let randoms: Vec<(f64, u64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| (engine.random(seed.wrapping_add(i)).peak, i))
        .collect();
    trials_run += randoms.len();
    for (peak, i) in randoms {
        if peak > best_peak {
            best_peak = peak;
            best_label = format!("random #{i}");
        }
    }

    let quadrature = orbit_integral(gen, b, horizon)?;
    let rigorous: f64 = gen
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(n, l)| {
            let a = -l.re;
            b.row_norm(n) * (-a * horizon).exp() / a
        })
        .sum();
    let (tail, tail_kind) = match extrapolated_tail(gen, b, horizon)? {
        Some(t) if t < rigorous => (t, TailKind::Extrapolated),
        _ => (rigorous, TailKind::Rigorous),
    };
    let upper = quadrature + tail;
    let lower = best_peak.min(upper);
    let bracket = (gen.riesz().bracket(lower).0, gen.riesz().bracket(upper).1);
    Ok(AdmissibilityEstimate {
        horizon,
        lower,
        upper,
        quadrature,
        tail,
        tail_kind,
        state_norm_bracket: bracket,
        best_trial: best_label,
        trials_run,
        pieces: engine.pieces,
        groups: engine.groups.len(),
    })
}

/// Cells of the quadrature grid for `∫₀ᴴ ‖T(s)B‖ ds`.
const QUADRATURE_CELLS: usize = 4096;

fn decay_moduli(gen: &DiagonalGenerator, s: f64) -> Vec<f64> {
    gen.eigenvalues().iter().map(|l| (s * l.re).exp()).collect()
}

/// Upper bound of `∫₀ᴴ ‖T(s)B‖ ds` using `‖T(s+σ)B‖ ≤ e^(−a_min σ)‖T(s)B‖`.
fn orbit_integral(gen: &DiagonalGenerator, b: &InputOperator, horizon: f64) -> Result<f64> {
    let a_min = gen
        .eigenvalues()
        .iter()
        .map(|l| -l.re)
        .fold(f64::INFINITY, f64::min);
    let first = (horizon / QUADRATURE_CELLS as f64).min(1.0 / a_min).min(horizon / 4.0);
    let grid = GeometricGrid::new(first, horizon, QUADRATURE_CELLS)?.values();
    let nodes: Vec<f64> = std::iter::once(0.0).chain(grid).collect();
    let cells: Vec<f64> = nodes
        .par_windows(2)
        .map(|w| {
            let h = w[1] - w[0];
            let norm = b.weighted_norm(&decay_moduli(gen, w[0]));
            norm * -(-a_min * h).exp_m1() / a_min
        })
        .collect();
    Ok(cells.iter().sum())
}

/// `∫_H^∞ K s^(−ρ) ds` with `K` the largest `s^ρ ‖T(s)B‖` seen on `[H/16, H]`.
fn extrapolated_tail(
    gen: &DiagonalGenerator,
    b: &InputOperator,
    horizon: f64,
) -> Result<Option<f64>> {
    if horizon < 16.0 {
        return Ok(None);
    }
    let grid = GeometricGrid::new(horizon / 1024.0, horizon, 31)?;
    let ts = grid.values();
    let norms: Vec<f64> = ts
        .iter()
        .map(|&t| b.weighted_norm(&decay_moduli(gen, t)))
        .collect();
    if norms.iter().any(|&v| !(v > 0.0)) {
        return Ok(Some(0.0));
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.log10()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.log10()).collect();
    let Some(fit) = crate::series::least_squares(&xs[20..], &ys[20..]) else {
        return Ok(None);
    };
    let rho = -fit.slope;
    if !(rho > 1.0) || fit.max_residual > 0.05 {
        return Ok(None);
    }
    let k = ts[20..]
        .iter()
        .zip(&norms[20..])
        .map(|(t, v)| v * t.powf(rho))
        .fold(0.0, f64::max);
    Ok(Some(k * horizon.powf(1.0 - rho) / (rho - 1.0)))
}
