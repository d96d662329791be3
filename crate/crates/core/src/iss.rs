//! Envelope certification (UGS, semi-uniform ISS, iISS) and attractivity probes.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::{ComparisonFunction, FunctionClass, KlFunction};
use crate::error::{invalid, Error, Result};
use crate::signal::InputSignal;
use crate::spectral::{SpectralVector, C64};
use crate::trajectory::{time_grid, ControlSystem, SemilinearOptions, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Ugs,
    SemiIss,
    Iiss,
    Gronwall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Envelope {
    /// `‖φ(t,x₀,u)‖ ≤ γ(‖x₀‖) + μ(‖u‖_∞)`.
    Ugs {
        gamma: ComparisonFunction,
        mu: ComparisonFunction,
    },
    /// `‖φ(t,x₀,u)‖ ≤ κ(‖x₀‖_A, t) + μ(‖u‖_∞)`.
    SemiIss {
        kappa: KlFunction,
        mu: ComparisonFunction,
    },
    /// `‖φ(t,x₀,u)‖ ≤ κ(‖x₀‖_A, t) + θ(∫₀ᵗ μ(‖u(s)‖) ds)`.
    Iiss {
        kappa: KlFunction,
        theta: ComparisonFunction,
        mu: ComparisonFunction,
    },
}

impl Envelope {
    /// `κ(r,t) = M r/(t+1)^(1/α)` with a linear gain.
    pub fn polynomial_iss(m: f64, alpha: f64, gain: f64) -> Self {
        Envelope::SemiIss {
            kappa: KlFunction::polynomial(m, alpha),
            mu: ComparisonFunction::Linear { a: gain },
        }
    }

    pub fn kind(&self) -> CheckKind {
        match self {
            Envelope::Ugs { .. } => CheckKind::Ugs,
            Envelope::SemiIss { .. } => CheckKind::SemiIss,
            Envelope::Iiss { .. } => CheckKind::Iiss,
        }
    }

    /// `α` when the decay part is polynomial.
    pub fn polynomial_alpha(&self) -> Option<f64> {
        match self {
            Envelope::Ugs { .. } => None,
            Envelope::SemiIss { kappa, .. } | Envelope::Iiss { kappa, .. } => {
                kappa.polynomial_alpha()
            }
        }
    }

    pub fn kappa(&self) -> Option<&KlFunction> {
        match self {
            Envelope::Ugs { .. } => None,
            Envelope::SemiIss { kappa, .. } | Envelope::Iiss { kappa, .. } => Some(kappa),
        }
    }

    /// UGS envelope `γ(r) = κ(r, 0)` implied by a semi-uniform ISS one.
    pub fn to_ugs(&self) -> Option<Envelope> {
        match self {
            Envelope::SemiIss { kappa, mu } => Some(Envelope::Ugs {
                gamma: kappa_at_zero(kappa),
                mu: mu.clone(),
            }),
            _ => None,
        }
    }

    /// Runs every component through its class validator; a vanishing gain is allowed.
    pub fn validate(&self) -> Result<(), String> {
        let gain_ok = |mu: &ComparisonFunction| {
            if mu.is_zero() {
                Ok(())
            } else {
                mu.validate(FunctionClass::K).map_err(|e| format!("μ: {e}"))
            }
        };
        match self {
            Envelope::Ugs { gamma, mu } => {
                gamma
                    .validate(FunctionClass::KInfinity)
                    .map_err(|e| format!("γ: {e}"))?;
                gain_ok(mu)
            }
            Envelope::SemiIss { kappa, mu } => {
                kappa.validate().map_err(|e| format!("κ: {e}"))?;
                gain_ok(mu)
            }
            Envelope::Iiss { kappa, theta, mu } => {
                kappa.validate().map_err(|e| format!("κ: {e}"))?;
                theta
                    .validate(FunctionClass::KInfinity)
                    .map_err(|e| format!("θ: {e}"))?;
                gain_ok(mu)
            }
        }
    }

    fn bound(&self, run: &EnvelopeRun, t: f64, u_sup: f64) -> Result<f64> {
        let graph = || {
            run.graph_norm
                .ok_or_else(|| Error::MissingGraphNorm(run.id.clone()))
        };
        Ok(match self {
            Envelope::Ugs { gamma, mu } => gamma.eval(run.x0_norm) + mu.eval(u_sup),
            Envelope::SemiIss { kappa, mu } => kappa.eval(graph()?, t) + mu.eval(u_sup),
            Envelope::Iiss { kappa, theta, mu } => {
                kappa.eval(graph()?, t) + theta.eval(run.u.integral(t, |r| mu.eval(r)))
            }
        })
    }
}

fn kappa_at_zero(kappa: &KlFunction) -> ComparisonFunction {
    match kappa {
        KlFunction::PolynomialDecay { outer, gain, .. }
        | KlFunction::ExponentialDecay { outer, gain, .. } => ComparisonFunction::Composed {
            outer: Box::new(outer.clone()),
            inner: Box::new(ComparisonFunction::Linear { a: *gain }),
        },
    }
}

/// The iISS envelope from the bilinear non-Lyapunov argument:
/// `κ(r,t) = (Mr/(t+1)^(1/α))² + 2Mr/(t+1)^(1/α)`, `θ(r) = r⁴ + 4r³ + 6r² + 4r + e^r − 1`,
/// `μ(r) = max{M‖B‖r, 4Kχ(r)}`.
pub fn bilinear_envelope(
    m: f64,
    k: f64,
    norm_b: f64,
    chi: ComparisonFunction,
    alpha: f64,
) -> Result<Envelope> {
    if !(m >= 1.0) {
        return Err(invalid(format!("M must be at least 1, got {m}")));
    }
    if !(k >= 0.0 && norm_b >= 0.0) {
        return Err(invalid("K and ‖B‖ must be nonnegative"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("α must be positive"));
    }
    chi.validate(FunctionClass::K)
        .map_err(|e| invalid(format!("χ is not of class K: {e}")))?;
    Ok(Envelope::Iiss {
        kappa: KlFunction::PolynomialDecay {
            outer: ComparisonFunction::square_plus_double(),
            gain: m,
            rate: 1.0 / alpha,
        },
        theta: ComparisonFunction::bilinear_theta(),
        mu: ComparisonFunction::MaxOf {
            parts: vec![
                ComparisonFunction::Linear { a: m * norm_b },
                chi.scaled(4.0 * k),
            ],
        },
    })
}

/// One simulated run with the norms the envelope needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRun {
    pub id: String,
    pub trajectory: Trajectory,
    pub u: InputSignal,
    pub x0_norm: f64,
    /// `‖x₀‖_A = ‖x₀‖ + ‖Ax₀‖`.
    pub graph_norm: Option<f64>,
}

impl EnvelopeRun {
    pub fn new(
        id: impl Into<String>,
        sys: &ControlSystem,
        trajectory: Trajectory,
        u: InputSignal,
        x0: &SpectralVector,
    ) -> Result<Self> {
        Ok(EnvelopeRun {
            id: id.into(),
            trajectory,
            u,
            x0_norm: x0.norm(),
            graph_norm: Some(sys.generator.graph_norm(x0)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub run_id: String,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginPoint {
    pub run_id: String,
    pub t: f64,
    #[serde(with = "crate::num_serde::lenient")]
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub kind: CheckKind,
    pub pass: bool,
    /// Smallest `bound + slack − ‖x(t)‖` over all runs and grid times.
    #[serde(with = "crate::num_serde::lenient")]
    pub worst_margin: f64,
    pub witness: Option<Witness>,
    pub checked_points: usize,
    pub trace: Vec<MarginPoint>,
}

impl EnvelopeReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("run,t,margin\n");
        for p in &self.trace {
            let _ = writeln!(s, "{},{:e},{:e}", p.run_id, p.t, p.margin);
        }
        s
    }
}

/// Roundoff allowance added to the simulator error estimate.
const RELATIVE_SLACK: f64 = 1e-12;

fn collect_margins(
    kind: CheckKind,
    runs: &[EnvelopeRun],
    bound: impl Fn(&EnvelopeRun, f64) -> Result<f64> + Sync,
) -> Result<EnvelopeReport> {
    let per_run: Vec<Vec<MarginPoint>> = runs
        .par_iter()
        .map(|run| {
            let slack = run.trajectory.error_slack();
            run.trajectory
                .times
                .iter()
                .zip(&run.trajectory.norms)
                .map(|(&t, &n)| {
                    let b = bound(run, t)?;
                    Ok(MarginPoint {
                        run_id: run.id.clone(),
                        t,
                        margin: b + slack + RELATIVE_SLACK * b.abs().max(n).max(1.0) - n,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let trace: Vec<MarginPoint> = per_run.into_iter().flatten().collect();
    let worst = trace
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin));
    let worst_margin = worst.map_or(f64::INFINITY, |p| p.margin);
    let pass = worst_margin >= 0.0;
    let witness = (!pass)
        .then(|| worst.map(|p| Witness {
            run_id: p.run_id.clone(),
            t: p.t,
        }))
        .flatten();
    Ok(EnvelopeReport {
        kind,
        pass,
        worst_margin,
        witness,
        checked_points: trace.len(),
        trace,
    })
}

/// Checks the envelope at every grid time of every run, with the simulator's error estimate
/// as slack.
pub fn verify_envelope(env: &Envelope, runs: &[EnvelopeRun]) -> Result<EnvelopeReport> {
    let sups: Vec<f64> = runs.iter().map(|r| r.u.sup_norm()).collect();
    let index: std::collections::HashMap<&str, usize> =
        runs.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    collect_margins(env.kind(), runs, |run, t| {
        env.bound(run, t, sups[index[run.id.as_str()]])
    })
}

/// `‖x(t)‖ ≤ M(‖x₀‖ + t‖B‖‖u‖_∞) e^(tKχ(‖u‖_∞))` with `χ(r) = r`.
pub fn gronwall_bound(m: f64, norm_b: f64, k: f64, x0_norm: f64, u_sup: f64, t: f64) -> f64 {
    m * (x0_norm + t * norm_b * u_sup) * (t * k * u_sup).exp()
}

pub fn verify_gronwall(
    runs: &[EnvelopeRun],
    m: f64,
    norm_b: f64,
    k: f64,
) -> Result<EnvelopeReport> {
    collect_margins(CheckKind::Gronwall, runs, |run, t| {
        Ok(gronwall_bound(m, norm_b, k, run.x0_norm, run.u.sup_norm(), t))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallNorm {
    /// Sample from `‖x₀‖ + ‖Ax₀‖ ≤ r`.
    Graph,
    /// Sample from `‖x₀‖ ≤ r`.
    State,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub eps: f64,
    pub radius: f64,
    pub mu: ComparisonFunction,
    pub samples: usize,
    /// Number of radius strata `r·j/strata`, `j = 1..=strata`.
    pub strata: usize,
    pub horizon: f64,
    pub grid_steps: usize,
    pub seed: u64,
    pub ball: BallNorm,
    pub options: SemilinearOptions,
}

impl ProbeConfig {
    pub fn new(eps: f64, radius: f64, mu: ComparisonFunction) -> Self {
        ProbeConfig {
            eps,
            radius,
            mu,
            samples: 16,
            strata: 4,
            horizon: 100.0,
            grid_steps: 1000,
            seed: 0,
            ball: BallNorm::Graph,
            options: SemilinearOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeProperty {
    Limit,
    AsymptoticGain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeStatus {
    /// Every sample met the bound; `tau_hat` is set.
    Found,
    /// Some sample grows away from the bound.
    Falsified,
    /// Horizon exhausted without growth.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub sample: usize,
    pub input: usize,
    pub x0_norm: f64,
    pub t: f64,
    #[serde(with = "crate::num_serde::lenient")]
    pub norm: f64,
    #[serde(with = "crate::num_serde::lenient")]
    pub bound: f64,
}

pub const PROBE_NOTE: &str = "empirical evidence over samples, not a proof";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub property: ProbeProperty,
    pub status: ProbeStatus,
    pub tau_hat: Option<f64>,
    pub witness: Option<ProbeWitness>,
    pub candidates: Vec<ProbeWitness>,
    pub runs: usize,
    pub note: String,
}

/// Initial states with `‖x₀‖_ball = r·j/strata`.
///
/// Even samples use Gaussian directions; odd samples sit on a single mode drawn
/// log-uniformly, since single modes are the slow cases in the graph-norm ball.
pub fn sample_ball(
    sys: &ControlSystem,
    radius: f64,
    samples: usize,
    strata: usize,
    ball: BallNorm,
    seed: u64,
) -> Result<Vec<SpectralVector>> {
    let n = sys.state_len();
    let strata = strata.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|i| {
            let rho = radius * ((i % strata) + 1) as f64 / strata as f64;
            let dir = if i % 2 == 1 && n > 1 {
                let k = ((n as f64).ln() * rng.gen::<f64>()).exp().floor() as usize;
                SpectralVector::unit(n, k.clamp(1, n) - 1)
            } else {
                SpectralVector::new((0..n).map(|_| gaussian_pair(&mut rng)).collect())
            };
            let size = match ball {
                BallNorm::Graph => sys.generator.graph_norm(&dir)?,
                BallNorm::State => dir.norm(),
            };
            Ok(if size > 0.0 && rho > 0.0 {
                dir.scale(C64::new(rho / size, 0.0))
            } else {
                SpectralVector::zeros(n)
            })
        })
        .collect()
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> C64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
    C64::new(r * c, r * s)
}

struct ProbeRun {
    sample: usize,
    input: usize,
    x0_norm: f64,
    bound: f64,
    trajectory: Trajectory,
}

fn run_probes(
    sys: &ControlSystem,
    inputs: &[InputSignal],
    cfg: &ProbeConfig,
) -> Result<Vec<ProbeRun>> {
    if !(cfg.eps > 0.0) || !(cfg.radius >= 0.0) || !(cfg.horizon > 0.0) {
        return Err(invalid("probe needs ε > 0, r ≥ 0 and a positive horizon"));
    }
    if inputs.is_empty() {
        return Err(invalid("probe needs at least one input"));
    }
    let x0s = sample_ball(sys, cfg.radius, cfg.samples.max(1), cfg.strata, cfg.ball, cfg.seed)?;
    let jobs: Vec<(usize, usize)> = (0..x0s.len())
        .flat_map(|s| (0..inputs.len()).map(move |i| (s, i)))
        .collect();
    jobs.par_iter()
        .map(|&(s, i)| {
            let u = &inputs[i];
            let grid = time_grid(cfg.horizon, cfg.grid_steps, Some(u))?;
            let trajectory = sys.simulate(u, &x0s[s], &grid, &cfg.options)?;
            Ok(ProbeRun {
                sample: s,
                input: i,
                x0_norm: x0s[s].norm(),
                bound: cfg.eps + cfg.mu.eval(u.sup_norm()),
                trajectory,
            })
        })
        .collect()
}

fn summarize(property: ProbeProperty, runs: Vec<ProbeRun>) -> ProbeReport {
    let mut tau_hat = 0.0f64;
    let mut failures: Vec<(f64, ProbeWitness, bool)> = Vec::new();
    for run in &runs {
        let tr = &run.trajectory;
        let slack = tr.error_slack();
        let ok = |n: f64| n <= run.bound + slack;
        let tau = match property {
            ProbeProperty::Limit => tr
                .norms
                .iter()
                .position(|&n| ok(n))
                .filter(|_| tr.blow_up.is_none())
                .map(|i| tr.times[i]),
            ProbeProperty::AsymptoticGain => match tr.norms.iter().rposition(|&n| !ok(n)) {
                None => Some(0.0),
                Some(j) if j + 1 < tr.times.len() && tr.blow_up.is_none() => Some(tr.times[j + 1]),
                _ => None,
            },
        };
        match tau {
            Some(t) => tau_hat = tau_hat.max(t),
            None => {
                let last = tr.norms.len() - 1;
                let growing = tr.blow_up.is_some()
                    || (tr.norms[last] > tr.norms[0].max(run.bound)
                        && tr.norms[last] >= tr.norms[last / 2]);
                failures.push((
                    tr.norms[last] - run.bound,
                    ProbeWitness {
                        sample: run.sample,
                        input: run.input,
                        x0_norm: run.x0_norm,
                        t: tr.times[last],
                        norm: tr.norms[last],
                        bound: run.bound,
                    },
                    growing,
                ));
            }
        }
    }
    let runs_count = runs.len();
    if failures.is_empty() {
        return ProbeReport {
            property,
            status: ProbeStatus::Found,
            tau_hat: Some(tau_hat),
            witness: None,
            candidates: Vec::new(),
            runs: runs_count,
            note: PROBE_NOTE.into(),
        };
    }
    failures.sort_by(|a, b| b.0.total_cmp(&a.0));
    let falsified = failures.iter().any(|f| f.2);
    let witness = failures
        .iter()
        .find(|f| f.2 || !falsified)
        .map(|f| f.1.clone());
    ProbeReport {
        property,
        status: if falsified {
            ProbeStatus::Falsified
        } else {
            ProbeStatus::Inconclusive
        },
        tau_hat: None,
        witness,
        candidates: failures.into_iter().take(5).map(|f| f.1).collect(),
        runs: runs_count,
        note: PROBE_NOTE.into(),
    }
}

/// Smallest grid `τ̂` such that every sample reaches `‖φ(t,x₀,u)‖ ≤ ε + μ(‖u‖_∞)` at some `t ≤ τ̂`.
pub fn probe_limit_property(
    sys: &ControlSystem,
    inputs: &[InputSignal],
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    Ok(summarize(ProbeProperty::Limit, run_probes(sys, inputs, cfg)?))
}

/// Smallest grid `τ̂` such that every sample satisfies the bound at all grid `t ≥ τ̂`.
pub fn probe_asymptotic_gain(
    sys: &ControlSystem,
    inputs: &[InputSignal],
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    Ok(summarize(
        ProbeProperty::AsymptoticGain,
        run_probes(sys, inputs, cfg)?,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub threshold: f64,
    /// First grid time from which the trace stays below the threshold.
    pub time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergingInputReport {
    /// The input's last piece is zero, so `‖u(·+τ)‖_∞ → 0`.
    pub hypothesis: bool,
    pub crossings: Vec<Crossing>,
    pub last_crossed: Option<f64>,
    #[serde(with = "crate::num_serde::lenient")]
    pub final_norm: f64,
    /// Hypothesis holds and every threshold was crossed.
    pub decays: bool,
}

pub fn check_converging_input_decay(
    sys: &ControlSystem,
    u: &InputSignal,
    x0: &SpectralVector,
    horizon: f64,
    grid_steps: usize,
    ladder: &[f64],
    options: &SemilinearOptions,
) -> Result<ConvergingInputReport> {
    let last_break = *u.breakpoints().last().unwrap();
    let hypothesis = u.tail_sup(last_break) == 0.0;
    let grid = time_grid(horizon, grid_steps, Some(u))?;
    let tr = sys.simulate(u, x0, &grid, options)?;
    let slack = tr.error_slack();
    let crossings: Vec<Crossing> = ladder
        .iter()
        .map(|&threshold| {
            let time = match tr.norms.iter().rposition(|&n| n > threshold + slack) {
                None => Some(0.0),
                Some(j) if j + 1 < tr.times.len() => Some(tr.times[j + 1]),
                _ => None,
            };
            Crossing { threshold, time }
        })
        .collect();
    let last_crossed = crossings
        .iter()
        .filter(|c| c.time.is_some())
        .map(|c| c.threshold)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
    let all = crossings.iter().all(|c| c.time.is_some());
    Ok(ConvergingInputReport {
        hypothesis,
        final_norm: *tr.norms.last().unwrap(),
        decays: hypothesis && all && tr.blow_up.is_none(),
        crossings,
        last_crossed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::InputOperator;
    use crate::spectral::{ClosedForm, DiagonalGenerator};
    use crate::trajectory::simulate_linear;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_system(lambda: C64, b: f64) -> ControlSystem {
        ControlSystem::linear(
            DiagonalGenerator::from_list(vec![lambda]).unwrap(),
            InputOperator::rank_one(SpectralVector::from_real([b])),
        )
        .unwrap()
    }

    #[test]
    fn bilinear_envelope_components() {
        let env =
            bilinear_envelope(1.0, 0.0, 0.0, ComparisonFunction::identity(), 1.0)
                .unwrap();
        let Envelope::Iiss { kappa, theta, mu } = &env else {
            panic!("wrong kind");
        };
        for &(r, t) in &[(1.0, 0.0), (2.0, 3.0), (0.5, 99.0)] {
            let s: f64 = r / (t + 1.0);
            assert!((kappa.eval(r, t) - (s * s + 2.0 * s)).abs() < 1e-15);
        }
        assert!(mu.is_zero());
        assert_eq!(mu.eval(7.0), 0.0);
        assert!((theta.eval(1.0) - (14.0 + std::f64::consts::E)).abs() < 1e-12);
        assert_eq!(env.polynomial_alpha(), Some(1.0));
        assert!(env.validate().is_ok());

        let env =
            bilinear_envelope(2.0, 3.0, 0.1, ComparisonFunction::identity(), 0.5)
                .unwrap();
        let Envelope::Iiss { mu, .. } = &env else { unreachable!() };
        // M‖B‖r = 0.2r < 12r = 4Kχ(r)
        for r in [0.1, 1.0, 10.0] {
            assert_eq!(mu.eval(r), 12.0 * r);
        }
        assert!(bilinear_envelope(0.5, 1.0, 1.0, ComparisonFunction::identity(), 1.0)
            .is_err());
    }

    fn runs_for(sys: &ControlSystem, cases: &[(SpectralVector, InputSignal)], end: f64) -> Vec<EnvelopeRun> {
        cases
            .iter()
            .enumerate()
            .map(|(i, (x0, u))| {
                let grid = time_grid(end, 200, Some(u)).unwrap();
                let tr = simulate_linear(&sys.generator, &sys.input, u, x0, &grid).unwrap();
                EnvelopeRun::new(format!("run{i}"), sys, tr, u.clone(), x0).unwrap()
            })
            .collect()
    }

    #[test]
    fn zero_input_semi_iss_on_powerlaw() {
        let gen = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 64).unwrap();
        let sys = ControlSystem::linear(gen.clone(), InputOperator::zero(64)).unwrap();
        let m = gen.resolvent_decay_constant(1.0).unwrap();
        let env = Envelope::polynomial_iss(m, 1.0, 0.0);
        let cases: Vec<_> = (0..5)
            .map(|k| {
                (
                    SpectralVector::from_fn(64, |n| c(((n + k) as f64).powf(-1.5), 0.3)),
                    InputSignal::zero(1),
                )
            })
            .collect();
        let report = verify_envelope(&env, &runs_for(&sys, &cases, 500.0)).unwrap();
        assert!(report.pass, "{}", report.worst_margin);
        assert!(report.witness.is_none());
        // UGS with γ = κ(·, 0) passes on the same runs
        let ugs = env.to_ugs().unwrap();
        assert!(verify_envelope(&ugs, &runs_for(&sys, &cases, 500.0)).unwrap().pass);
    }

    #[test]
    fn ugs_with_zero_state_is_gain_only_and_shrunk_gain_fails() {
        let sys = scalar_system(c(-1.0, 0.0), 1.0);
        let u = InputSignal::constant(vec![c(1.0, 0.0)]).unwrap();
        let cases = vec![(SpectralVector::zeros(1), u)];
        let runs = runs_for(&sys, &cases, 30.0);
        // exact gain is 1
        let tight = Envelope::Ugs {
            gamma: ComparisonFunction::identity(),
            mu: ComparisonFunction::identity(),
        };
        let r = verify_envelope(&tight, &runs).unwrap();
        assert!(r.pass);
        assert!(r.worst_margin < 1e-9);
        let shrunk = Envelope::Ugs {
            gamma: ComparisonFunction::identity(),
            mu: ComparisonFunction::Linear { a: 0.5 },
        };
        let r = verify_envelope(&shrunk, &runs).unwrap();
        assert!(!r.pass);
        let w = r.witness.clone().unwrap();
        assert_eq!(w.run_id, "run0");
        assert!(w.t > 20.0);
        assert!(r.to_csv().starts_with("run,t,margin\nrun0,0e0,"));
    }

    #[test]
    fn missing_graph_norm_is_an_error() {
        let sys = scalar_system(c(-1.0, 0.0), 1.0);
        let mut runs = runs_for(&sys, &[(SpectralVector::unit(1, 0), InputSignal::zero(1))], 1.0);
        runs[0].graph_norm = None;
        let env = Envelope::polynomial_iss(2.0, 1.0, 1.0);
        assert!(matches!(verify_envelope(&env, &runs), Err(Error::MissingGraphNorm(_))));
    }

    #[test]
    fn probe_scalar_decay() {
        let sys = scalar_system(c(-1.0, 0.0), 0.0);
        let inputs = [InputSignal::zero(1)];
        let mut cfg = ProbeConfig::new(0.1, 1.0, ComparisonFunction::Zero);
        cfg.ball = BallNorm::State;
        cfg.horizon = 10.0;
        cfg.grid_steps = 10_000;
        let lim = probe_limit_property(&sys, &inputs, &cfg).unwrap();
        assert_eq!(lim.status, ProbeStatus::Found);
        assert!((lim.tau_hat.unwrap() - 10f64.ln()).abs() <= 1e-3);
        let gain = probe_asymptotic_gain(&sys, &inputs, &cfg).unwrap();
        assert!((gain.tau_hat.unwrap() - lim.tau_hat.unwrap()).abs() <= 1e-3);
        assert_eq!(lim.note, PROBE_NOTE);
        // graph-norm ball: |x| + |x| ≤ r
        cfg.ball = BallNorm::Graph;
        let lim = probe_limit_property(&sys, &inputs, &cfg).unwrap();
        assert!((lim.tau_hat.unwrap() - 5f64.ln()).abs() <= 1e-3);
    }

    #[test]
    fn probe_zero_state_zero_input() {
        let sys = scalar_system(c(-1.0, 0.0), 0.0);
        let cfg = ProbeConfig::new(0.1, 0.0, ComparisonFunction::Zero);
        let r = probe_asymptotic_gain(&sys, &[InputSignal::zero(1)], &cfg).unwrap();
        assert_eq!(r.tau_hat, Some(0.0));
    }

    #[test]
    fn probe_unstable_mode_is_falsified() {
        let gen = DiagonalGenerator::from_list(vec![c(1.0, 0.0)]).unwrap();
        let sys = ControlSystem::linear(gen, InputOperator::zero(1)).unwrap();
        let mut cfg = ProbeConfig::new(0.1, 1.0, ComparisonFunction::Zero);
        cfg.horizon = 10.0;
        let r = probe_limit_property(&sys, &[InputSignal::zero(1)], &cfg).unwrap();
        assert_eq!(r.status, ProbeStatus::Falsified);
        let w = r.witness.unwrap();
        assert!(w.norm > w.bound);
        assert!(r.tau_hat.is_none());
    }

    #[test]
    fn converging_input_checks() {
        let gen = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 64).unwrap();
        let b = InputOperator::rank_one(SpectralVector::from_fn(64, |n| c((n as f64).powi(-2), 0.0)));
        let sys = ControlSystem::linear(gen, b).unwrap();
        let ladder = [1e-1, 1e-2, 1e-3];
        let opts = SemilinearOptions::default();
        let x0 = SpectralVector::unit(64, 0);

        let zero = check_converging_input_decay(&sys, &InputSignal::zero(1), &x0, 200.0, 400, &ladder, &opts)
            .unwrap();
        assert!(zero.hypothesis && zero.decays);

        let stair = InputSignal::sampled(0.5, 20.0, vec![c(0.0, 0.0)], |a, _| vec![c((-a).exp(), 0.0)])
            .unwrap();
        let r = check_converging_input_decay(&sys, &stair, &x0, 400.0, 800, &ladder, &opts).unwrap();
        assert!(r.hypothesis && r.decays, "{r:?}");
        assert_eq!(r.last_crossed, Some(1e-3));
        assert!(r.final_norm < 1e-3);

        let persistent = InputSignal::constant(vec![c(1.0, 0.0)]).unwrap();
        let r = check_converging_input_decay(&sys, &persistent, &x0, 400.0, 800, &ladder, &opts).unwrap();
        assert!(!r.hypothesis);
        assert!(!r.decays);
    }
}
