//! Mild solutions `x(t) = T(t)x₀ + ∫₀ᵗ T(t−s)F(x(s),u(s))ds` with `F(ξ,v) = Bv + G(ξ,v)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operator::InputOperator;
use crate::signal::InputSignal;
use crate::spectral::{check_len, l2_norm, phi1, DiagonalGenerator, SpectralVector, C64};

/// Scalar profile `q` of the saturating term `q(‖ξ‖)Hv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Saturation {
    Zero,
    /// `q(z) = min(z, cap)`.
    MinCap { cap: f64 },
    /// `q(z) = tanh(z/scale)`.
    Tanh { scale: f64 },
}

impl Saturation {
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Saturation::Zero => 0.0,
            Saturation::MinCap { cap } => z.min(cap),
            Saturation::Tanh { scale } => (z / scale).tanh(),
        }
    }

    /// `sup_{z≥0} |q(z)|`.
    pub fn sup(&self) -> f64 {
        match *self {
            Saturation::Zero => 0.0,
            Saturation::MinCap { cap } => cap,
            Saturation::Tanh { .. } => 1.0,
        }
    }

    /// Global Lipschitz constant of `q` on `ℝ₊`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Saturation::Zero => 0.0,
            Saturation::MinCap { .. } => 1.0,
            Saturation::Tanh { scale } => 1.0 / scale,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Saturation::MinCap { cap } if !(cap > 0.0 && cap.is_finite()) => {
                Err(invalid("saturation cap must be positive and finite"))
            }
            Saturation::Tanh { scale } if !(scale > 0.0 && scale.is_finite()) => {
                Err(invalid("tanh scale must be positive and finite"))
            }
            _ => Ok(()),
        }
    }
}

/// The part `G` of `F(ξ,v) = Bv + G(ξ,v)`; every variant has `G(0,v) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearTerm {
    Zero,
    /// `G(ξ,v) = ξ_coord · (w·v) · g`.
    Bilinear {
        g: SpectralVector,
        weights: Vec<C64>,
        coord: usize,
    },
    /// `G(ξ,v) = q(‖ξ‖) H v`.
    Saturating { q: Saturation, h: InputOperator },
}

/// Constants with `‖G(ξ,v) − G(ζ,v)‖ ≤ K‖ξ−ζ‖χ(‖v‖)` for all `ξ, ζ`, where `χ(r) = r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lipschitz {
    pub k: f64,
}

impl Lipschitz {
    pub fn chi(&self, r: f64) -> f64 {
        r
    }
}

impl NonlinearTerm {
    pub fn bilinear(g: SpectralVector, weights: Vec<C64>, coord: usize) -> Result<Self> {
        if coord >= g.len() {
            return Err(invalid("bilinear coordinate out of range"));
        }
        if weights.is_empty() {
            return Err(invalid("bilinear weights must match the input dimension"));
        }
        Ok(NonlinearTerm::Bilinear { g, weights, coord })
    }

    pub fn saturating(q: Saturation, h: InputOperator) -> Result<Self> {
        q.validate()?;
        Ok(NonlinearTerm::Saturating { q, h })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NonlinearTerm::Zero => true,
            NonlinearTerm::Bilinear { g, weights, .. } => {
                g.norm() == 0.0 || weights.iter().all(|w| w.norm() == 0.0)
            }
            NonlinearTerm::Saturating { q, h } => *q == Saturation::Zero || h.is_zero(),
        }
    }

    pub fn lipschitz(&self) -> Lipschitz {
        let k = match self {
            NonlinearTerm::Zero => 0.0,
            NonlinearTerm::Bilinear { g, weights, .. } => g.norm() * l2_norm(weights),
            NonlinearTerm::Saturating { q, h } => q.lipschitz() * h.operator_norm(),
        };
        Lipschitz { k }
    }

    pub(crate) fn check_dims(&self, state: usize, input: usize) -> Result<()> {
        match self {
            NonlinearTerm::Zero => Ok(()),
            NonlinearTerm::Bilinear { g, weights, .. } => {
                check_len(state, g.len())?;
                check_len(input, weights.len())
            }
            NonlinearTerm::Saturating { h, .. } => {
                check_len(state, h.state_len())?;
                check_len(input, h.channels())
            }
        }
    }

    /// Adds `G(ξ,v)` to `out`.
    pub(crate) fn add_to(&self, xi: &[C64], v: &[C64], out: &mut [C64]) {
        match self {
            NonlinearTerm::Zero => {}
            NonlinearTerm::Bilinear { g, weights, coord } => {
                let s: C64 = weights.iter().zip(v).map(|(w, x)| w * x).sum::<C64>() * xi[*coord];
                if s != C64::new(0.0, 0.0) {
                    for (o, gn) in out.iter_mut().zip(g.coeffs()) {
                        *o += gn * s;
                    }
                }
            }
            NonlinearTerm::Saturating { q, h } => {
                let scale = q.eval(l2_norm(xi));
                if scale != 0.0 {
                    let mut hv = vec![C64::new(0.0, 0.0); out.len()];
                    h.apply_into(v, &mut hv);
                    for (o, x) in out.iter_mut().zip(hv) {
                        *o += x * scale;
                    }
                }
            }
        }
    }

    pub fn eval(&self, xi: &SpectralVector, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); xi.len()];
        self.add_to(xi.coeffs(), v, &mut out);
        out
    }
}

/// `ẋ = Ax + Bu + G(x,u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSystem {
    pub generator: DiagonalGenerator,
    pub input: InputOperator,
    pub nonlinear: NonlinearTerm,
}

impl ControlSystem {
    pub fn new(
        generator: DiagonalGenerator,
        input: InputOperator,
        nonlinear: NonlinearTerm,
    ) -> Result<Self> {
        check_len(generator.len(), input.state_len())?;
        nonlinear.check_dims(generator.len(), input.channels())?;
        Ok(ControlSystem {
            generator,
            input,
            nonlinear,
        })
    }

    pub fn linear(generator: DiagonalGenerator, input: InputOperator) -> Result<Self> {
        Self::new(generator, input, NonlinearTerm::Zero)
    }

    pub fn state_len(&self) -> usize {
        self.generator.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input.channels()
    }

    /// Runs the exact linear stepper when `G` vanishes, the semilinear one otherwise.
    pub fn simulate(
        &self,
        u: &InputSignal,
        x0: &SpectralVector,
        grid: &[f64],
        options: &SemilinearOptions,
    ) -> Result<Trajectory> {
        if self.nonlinear.is_zero() {
            simulate_linear(&self.generator, &self.input, u, x0, grid)
        } else {
            simulate_semilinear(self, u, x0, grid, options)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepMeta {
    pub steps: usize,
    #[serde(with = "crate::num_serde::lenient")]
    pub min_step: f64,
    #[serde(with = "crate::num_serde::lenient")]
    pub max_step: f64,
    pub picard_iterations: usize,
    pub max_picard: usize,
    pub rejected_steps: usize,
    /// `max_t ‖x_h(t) − x_(h/2)(t)‖` from the step-halving comparison.
    pub error_estimate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralVector>,
    pub norms: Vec<f64>,
    pub meta: StepMeta,
    /// Time at which the norm first exceeded the ceiling.
    pub blow_up: Option<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, x: &[C64]) {
        let v = SpectralVector::new(x.to_vec());
        self.norms.push(v.norm());
        self.times.push(t);
        self.snapshots.push(v);
    }

    pub fn last(&self) -> &SpectralVector {
        self.snapshots.last().expect("trajectory has at least the initial state")
    }

    pub fn error_slack(&self) -> f64 {
        self.meta.error_estimate.unwrap_or(0.0)
    }

    /// CSV with columns `t, norm` and the real and imaginary parts of the listed modes.
    pub fn to_csv(&self, modes: &[usize]) -> String {
        let mut s = String::from("t,norm");
        for m in modes {
            let _ = write!(s, ",re_x{m},im_x{m}");
        }
        s.push('\n');
        for ((t, n), x) in self.times.iter().zip(&self.norms).zip(&self.snapshots) {
            let _ = write!(s, "{t:e},{n:e}");
            for &m in modes {
                let c = x.coeffs().get(m).copied().unwrap_or_default();
                let _ = write!(s, ",{:e},{:e}", c.re, c.im);
            }
            s.push('\n');
        }
        s
    }
}

/// `n` equal steps on `[0, end]` merged with the input breakpoints inside it.
pub fn time_grid(end: f64, n: usize, u: Option<&InputSignal>) -> Result<Vec<f64>> {
    if !(end > 0.0 && end.is_finite()) || n == 0 {
        return Err(invalid("grid needs a positive end and at least one step"));
    }
    let mut grid: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
    if let Some(u) = u {
        grid.extend(u.breakpoints().iter().copied().filter(|&b| b > 0.0 && b < end));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    Ok(grid)
}

fn check_grid(grid: &[f64], u: &InputSignal) -> Result<()> {
    if grid.first() != Some(&0.0) {
        return Err(Error::InvalidGrid("grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidGrid("grid must be finite and strictly increasing".into()));
    }
    let end = *grid.last().unwrap();
    for &b in u.breakpoints() {
        if b > 0.0 && b < end && grid.binary_search_by(|g| g.total_cmp(&b)).is_err() {
            return Err(Error::InvalidGrid(format!(
                "grid does not contain input breakpoint {b}"
            )));
        }
    }
    Ok(())
}

/// Per-mode factors `e^(λΔ)` and `Δ φ₁(λΔ)`, cached by step length.
struct Propagators<'a> {
    lambda: &'a [C64],
    cache: HashMap<u64, (Vec<C64>, Vec<C64>)>,
}

impl<'a> Propagators<'a> {
    fn new(lambda: &'a [C64]) -> Self {
        Propagators {
            lambda,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, dt: f64) -> &(Vec<C64>, Vec<C64>) {
        let lambda = self.lambda;
        if self.cache.len() > 64 {
            self.cache.clear();
        }
        self.cache.entry(dt.to_bits()).or_insert_with(|| {
            let e = lambda.iter().map(|l| (l * dt).exp()).collect();
            let p = lambda.iter().map(|l| phi1(l * dt) * dt).collect();
            (e, p)
        })
    }
}

pub fn simulate_linear(
    gen: &DiagonalGenerator,
    b: &InputOperator,
    u: &InputSignal,
    x0: &SpectralVector,
    grid: &[f64],
) -> Result<Trajectory> {
    check_len(gen.len(), x0.len())?;
    check_len(gen.len(), b.state_len())?;
    check_len(b.channels(), u.dim())?;
    check_grid(grid, u)?;
    let mut props = Propagators::new(gen.eigenvalues());
    let mut x = x0.coeffs().to_vec();
    let mut bu = vec![C64::new(0.0, 0.0); x.len()];
    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.len()),
        snapshots: Vec::with_capacity(grid.len()),
        norms: Vec::with_capacity(grid.len()),
        meta: StepMeta {
            min_step: f64::INFINITY,
            ..StepMeta::default()
        },
        blow_up: None,
    };
    traj.push(0.0, &x);
    for w in grid.windows(2) {
        let dt = w[1] - w[0];
        b.apply_into(u.value_at(w[0]), &mut bu);
        let (e, p) = props.get(dt);
        for n in 0..x.len() {
            x[n] = e[n] * x[n] + p[n] * bu[n];
        }
        traj.meta.steps += 1;
        traj.meta.min_step = traj.meta.min_step.min(dt);
        traj.meta.max_step = traj.meta.max_step.max(dt);
        traj.push(w[1], &x);
    }
    if traj.meta.steps == 0 {
        traj.meta.min_step = 0.0;
    }
    traj.meta.error_estimate = Some(0.0);
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemilinearOptions {
    /// Total Picard defect budget, split evenly over the steps.
    pub tol: f64,
    /// Largest internal step; grid intervals are subdivided to respect it.
    pub max_step: Option<f64>,
    #[serde(with = "crate::num_serde::lenient")]
    pub min_step: f64,
    pub max_picard: usize,
    /// Blow-up ceiling as a multiple of `max(1, ‖x₀‖)`.
    pub ceiling_factor: f64,
    /// Also run with halved steps to estimate the global error.
    pub richardson: bool,
}

impl Default for SemilinearOptions {
    fn default() -> Self {
        SemilinearOptions {
            tol: 1e-10,
            max_step: None,
            min_step: 1e-12,
            max_picard: 60,
            ceiling_factor: 1e12,
            richardson: true,
        }
    }
}

pub fn simulate_semilinear(
    sys: &ControlSystem,
    u: &InputSignal,
    x0: &SpectralVector,
    grid: &[f64],
    options: &SemilinearOptions,
) -> Result<Trajectory> {
    if !(options.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    check_len(sys.state_len(), x0.len())?;
    check_len(sys.input_dim(), u.dim())?;
    check_grid(grid, u)?;
    let mut coarse = integrate(sys, u, x0, grid, options, 1)?;
    if options.richardson && coarse.blow_up.is_none() {
        let fine = integrate(sys, u, x0, grid, options, 2)?;
        if fine.blow_up.is_none() {
            let err = coarse
                .snapshots
                .iter()
                .zip(&fine.snapshots)
                .map(|(a, b)| a.distance(b).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            let mut out = fine;
            out.meta.error_estimate = Some(err);
            return Ok(out);
        }
        coarse.meta.error_estimate = None;
    }
    Ok(coarse)
}

fn integrate(
    sys: &ControlSystem,
    u: &InputSignal,
    x0: &SpectralVector,
    grid: &[f64],
    options: &SemilinearOptions,
    refine: usize,
) -> Result<Trajectory> {
    let n = sys.state_len();
    let end = *grid.last().unwrap();
    let default_step = end / (grid.len() - 1).max(1) as f64;
    let h_max = options.max_step.unwrap_or(default_step) / refine as f64;
    let substeps: Vec<usize> = grid
        .windows(2)
        .map(|w| ((w[1] - w[0]) / h_max * (1.0 - 1e-12)).ceil().max(1.0) as usize)
        .collect();
    let total_steps: usize = substeps.iter().sum();
    let step_tol = options.tol / total_steps as f64;
    let ceiling = options.ceiling_factor * x0.norm().max(1.0);

    let mut props = Propagators::new(sys.generator.eigenvalues());
    let mut x = x0.coeffs().to_vec();
    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.len()),
        snapshots: Vec::with_capacity(grid.len()),
        norms: Vec::with_capacity(grid.len()),
        meta: StepMeta {
            min_step: f64::INFINITY,
            ..StepMeta::default()
        },
        blow_up: None,
    };
    traj.push(0.0, &x);
    let mut bu = vec![C64::new(0.0, 0.0); n];
    let mut work = Workspace::new(n);
    for (w, &k) in grid.windows(2).zip(&substeps) {
        let v = u.value_at(w[0]);
        sys.input.apply_into(v, &mut bu);
        let dt = (w[1] - w[0]) / k as f64;
        for j in 0..k {
            let t0 = w[0] + j as f64 * dt;
            let mut pending = vec![dt];
            let mut t = t0;
            while let Some(h) = pending.pop() {
                match picard_step(sys, &mut props, &x, v, &bu, h, step_tol, options, &mut work) {
                    Some(iters) => {
                        std::mem::swap(&mut x, &mut work.next);
                        t += h;
                        traj.meta.steps += 1;
                        traj.meta.picard_iterations += iters;
                        traj.meta.max_picard = traj.meta.max_picard.max(iters);
                        traj.meta.min_step = traj.meta.min_step.min(h);
                        traj.meta.max_step = traj.meta.max_step.max(h);
                        if l2_norm(&x) > ceiling || !l2_norm(&x).is_finite() {
                            traj.blow_up = Some(t);
                            traj.push(t, &x);
                            return Ok(traj);
                        }
                    }
                    None => {
                        traj.meta.rejected_steps += 1;
                        let half = h / 2.0;
                        if half < options.min_step {
                            return Err(Error::BlowUpSuspected {
                                time: t,
                                min_step: options.min_step,
                            });
                        }
                        pending.push(half);
                        pending.push(half);
                    }
                }
            }
        }
        traj.push(w[1], &x);
    }
    Ok(traj)
}

struct Workspace {
    next: Vec<C64>,
    free: Vec<C64>,
    forcing: Vec<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            next: vec![C64::new(0.0, 0.0); n],
            free: vec![C64::new(0.0, 0.0); n],
            forcing: vec![C64::new(0.0, 0.0); n],
        }
    }
}

/// Solves `y = e^(Ah)x + h φ₁(Ah)(Bv + G(y,v))` by fixed-point iteration into `work.next`.
#[allow(clippy::too_many_arguments)]
fn picard_step(
    sys: &ControlSystem,
    props: &mut Propagators,
    x: &[C64],
    v: &[C64],
    bu: &[C64],
    h: f64,
    tol: f64,
    options: &SemilinearOptions,
    work: &mut Workspace,
) -> Option<usize> {
    let (e, p) = props.get(h);
    for i in 0..x.len() {
        work.free[i] = e[i] * x[i] + p[i] * bu[i];
    }
    work.next.copy_from_slice(x);
    let mut prev_diff = f64::INFINITY;
    for iter in 1..=options.max_picard {
        work.forcing.iter_mut().for_each(|f| *f = C64::new(0.0, 0.0));
        sys.nonlinear.add_to(&work.next, v, &mut work.forcing);
        let mut diff_sq = 0.0;
        for i in 0..x.len() {
            let y = work.free[i] + p[i] * work.forcing[i];
            diff_sq += (y - work.next[i]).norm_sqr();
            work.next[i] = y;
        }
        let diff = diff_sq.sqrt();
        let scale = l2_norm(&work.next).max(1.0);
        if diff <= tol * scale {
            return Some(iter);
        }
        if iter > 2 && diff >= prev_diff {
            return None;
        }
        prev_diff = diff;
    }
    None
}
