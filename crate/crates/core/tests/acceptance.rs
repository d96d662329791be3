//! Acceptance criteria, one line per criterion. Runs without the libtest harness.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semistab::admissibility::{
    admissibility_constant_estimate, carleson_sum_general, phi_sums, range_condition_margin,
};
use semistab::comparison::ComparisonFunction;
use semistab::iss::{
    probe_asymptotic_gain, probe_limit_property, verify_envelope, verify_gronwall, Envelope,
    ProbeConfig, ProbeStatus,
};
use semistab::scenarios::{
    assemble_beam, build_dyadic_cluster, build_powerlaw, random_input, CoefficientRule, Details,
    EnvelopeSampling, Scenario, ScenarioSpec,
};
use semistab::series::GeometricGrid;
use semistab::stability::fit_decay_exponent;
use semistab::trajectory::{simulate_linear, time_grid, ControlSystem, NonlinearTerm, SemilinearOptions};
use semistab::{ClosedForm, DiagonalGenerator, InputOperator, InputSignal, SpectralVector, C64};

type Check = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rel(a: &SpectralVector, b: &SpectralVector) -> f64 {
    a.distance(b).unwrap() / a.norm().max(f64::MIN_POSITIVE)
}

/// `sup_n e^(t re λ_n)|λ_n|^(−β)` for `λ_n = −1/n + i n`, evaluated directly.
fn powerlaw_decay_oracle(n: usize, beta: f64, t: f64) -> f64 {
    (1..=n)
        .map(|k| {
            let k = k as f64;
            let modulus = (1.0 / (k * k) + k * k).sqrt();
            (-t / k).exp() * modulus.powf(-beta)
        })
        .fold(0.0, f64::max)
}

fn decay_grid() -> GeometricGrid {
    GeometricGrid::powers_of_two(4, 14, 4).unwrap()
}

fn power_law_decay() -> Check {
    let gen = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 100_000).map_err(err)?;
    let fit = fit_decay_exponent(&gen, 1.0, &decay_grid()).map_err(err)?;
    let e = fit.exponent.ok_or("no exponent fitted")?;
    ensure((e - 1.0).abs() <= 0.1, || format!("ê = {e}"))?;
    let mut worst: f64 = 0.0;
    for &t in decay_grid().values().iter().filter(|&&t| t >= 256.0) {
        let value = gen.operator_decay_norm(1.0, t).map_err(err)?.value;
        let oracle = powerlaw_decay_oracle(100_000, 1.0, t);
        ensure((value - oracle).abs() <= 1e-12 * oracle, || {
            format!("t = {t}: {value} vs brute force {oracle}")
        })?;
        let asymptote = 1.0 / (std::f64::consts::E * t);
        worst = worst.max((value - asymptote).abs() / asymptote);
    }
    ensure(worst <= 0.1, || format!("deviation from 1/(e t) {worst:.3}"))?;
    Ok(format!("ê = {e:.4}, max deviation from 1/(e t) {:.2}%", 100.0 * worst))
}

fn ratio_law() -> Check {
    let gen = DiagonalGenerator::closed_form(ClosedForm::power_law(1.0), 100_000).map_err(err)?;
    let fit = |beta| {
        fit_decay_exponent(&gen, beta, &decay_grid())
            .map_err(err)?
            .exponent
            .ok_or_else(|| format!("no exponent for β = {beta}"))
    };
    let (e1, e2) = (fit(1.0)?, fit(2.0)?);
    let ratio = e2 / e1;
    ensure((ratio - 2.0).abs() <= 0.15, || format!("ratio {ratio}"))?;
    Ok(format!("ê(1) = {e1:.4}, ê(2) = {e2:.4}, ratio {ratio:.4}"))
}

fn beam() -> Check {
    let s = Scenario::builtin("beam").map_err(err)?;
    let gen = s.generator();
    ensure(gen.len() == 128, || format!("{} modes", gen.len()))?;
    let max_re = gen.eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    ensure(max_re < 0.0, || format!("max re λ = {max_re}"))?;
    let Details::Beam { residual, .. } = s.details else {
        return Err("not a beam scenario".into());
    };
    ensure(residual <= 1e-8, || format!("residual {residual:e}"))?;
    let e = fit_decay_exponent(gen, 1.0, &GeometricGrid::powers_of_two(4, 14, 4).map_err(err)?)
        .map_err(err)?
        .exponent
        .ok_or("no exponent fitted")?;
    ensure((0.8..=1.2).contains(&e), || format!("ê = {e}"))?;

    let undamped = assemble_beam(64, false).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x0: Vec<C64> = (0..128).map(|_| c(rng.gen_range(-1.0..1.0), 0.0)).collect();
    let e0 = x0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut drift: f64 = 0.0;
    for j in 0..=200 {
        let t = 0.5 * j as f64;
        let e = undamped.propagate(t, &x0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        drift = drift.max((e - e0).abs() / e0);
    }
    ensure(drift <= 1e-10, || format!("undamped energy drift {drift:e}"))?;
    Ok(format!(
        "max re λ = {max_re:.3e}, residual {residual:.1e}, ê = {e:.3}, energy drift {drift:.1e}"
    ))
}

/// Piecewise-constant input with `|u(t)| = 1` and random phases.
fn unit_input(rng: &mut ChaCha8Rng, horizon: f64) -> InputSignal {
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    loop {
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        values.push(vec![C64::from_polar(1.0, phase)]);
        let next = breakpoints.last().unwrap() + rng.gen_range(0.5..20.0);
        if next >= horizon {
            break;
        }
        breakpoints.push(next);
    }
    InputSignal::new(breakpoints, values).unwrap()
}

fn range_bound() -> Check {
    let s = Scenario::builtin("saturating").map_err(err)?;
    let (alpha, beta) = match (&s.spec, &s.details) {
        (ScenarioSpec::Saturating { alpha, .. }, Details::Saturating { beta, .. }) => (*alpha, *beta),
        _ => return Err("not a saturating scenario".into()),
    };
    ensure(alpha == 1.0 && beta == 2.0, || format!("α = {alpha}, β = {beta}"))?;
    let lin = s.linear_part().map_err(err)?;
    let range = range_condition_margin(&lin.generator, &lin.input, beta, Some(alpha)).map_err(err)?;
    let bound = range.bound.ok_or("no range bound")?;
    let m = range.decay_constant.ok_or("no decay constant")?;
    let formula = alpha * m * range.fractional_norm / (beta - alpha);
    ensure((bound - formula).abs() <= 1e-12 * formula, || format!("bound {bound} vs {formula}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x0 = SpectralVector::zeros(lin.state_len());
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let horizon = 10f64.powf(1.0 + 2.0 * i as f64 / 99.0);
        let u = unit_input(&mut rng, horizon);
        let grid = time_grid(horizon, (4.0 * horizon) as usize, Some(&u)).map_err(err)?;
        let tr = simulate_linear(&lin.generator, &lin.input, &u, &x0, &grid).map_err(err)?;
        worst = worst.max(tr.norms.iter().copied().fold(0.0, f64::max));
    }
    ensure(worst <= bound + 1e-6, || format!("sup {worst} exceeds bound {bound}"))?;
    Ok(format!("sup convolution {worst:.4} ≤ bound {bound:.4}"))
}

fn separated_cases() -> Vec<(String, DiagonalGenerator, SpectralVector)> {
    let mut cases = Vec::new();
    for (alpha, q) in [(0.5, 1.0), (1.0, 1.0), (2.0, 1.5)] {
        let gen = DiagonalGenerator::closed_form(ClosedForm::power_law(alpha), 512).unwrap();
        let b = SpectralVector::from_fn(512, |n| c((n as f64).powf(-q), 0.0));
        cases.push((format!("powerlaw α={alpha}"), gen, b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..7 {
        let n = 64 + 64 * i;
        let spacing = rng.gen_range(0.5..3.0);
        let lambda: Vec<C64> = (0..n)
            .map(|k| {
                let a = 2f64.powf(rng.gen_range(-6.0..3.0));
                let y = spacing * (k as f64 - n as f64 / 2.0) + rng.gen_range(-0.2..0.2) * spacing;
                c(-a, y)
            })
            .collect();
        let q = 0.5 + 0.25 * i as f64;
        let b = SpectralVector::from_fn(n, |k| C64::from_polar((k as f64).powf(-q), k as f64));
        cases.push((format!("random #{i}"), DiagonalGenerator::from_list(lambda).unwrap(), b));
    }
    cases
}

fn sandwich() -> Check {
    let cases = separated_cases();
    ensure(cases.len() == 10, || format!("{} cases", cases.len()))?;
    let mut tightest = f64::INFINITY;
    for (name, gen, b) in &cases {
        let phi = phi_sums(gen, b).map_err(err)?;
        let d = phi.gap.ok_or_else(|| format!("{name}: infinite gap"))?;
        ensure(d > 0.0, || format!("{name}: not separated"))?;
        let upper = (1.0 / (d * d) + 4.0 / (phi.p * phi.p)) * b.norm().powi(2) + phi.sum;
        let general = carleson_sum_general(gen, b).map_err(err)?.value;
        let slack = 1e-12 * upper;
        ensure(phi.sum <= general + slack, || format!("{name}: ΣΦ {} > {general}", phi.sum))?;
        ensure(general <= upper + slack, || format!("{name}: {general} > {upper}"))?;
        tightest = tightest.min(upper - general);
    }
    Ok(format!("10 separated cases, smallest upper margin {tightest:.3e}"))
}

fn dyadic_necessity() -> Check {
    let horizons = [64.0, 128.0, 256.0, 512.0];
    let lowers = |base: f64| -> Result<Vec<f64>, String> {
        let s = build_dyadic_cluster(10, CoefficientRule::DyadicBlock { base }).map_err(err)?;
        horizons
            .iter()
            .map(|&h| {
                admissibility_constant_estimate(s.generator(), &s.system.input, h, 8, 1)
                    .map(|e| e.lower)
                    .map_err(err)
            })
            .collect()
    };
    let ratios = |v: &[f64]| v.windows(2).map(|w| w[1] / w[0]).collect::<Vec<_>>();
    let divergent = ratios(&lowers(3.0)?);
    let convergent = ratios(&lowers(16.0)?);
    ensure(divergent.iter().all(|&r| r >= 1.5), || format!("divergent ratios {divergent:?}"))?;
    ensure(convergent.iter().all(|&r| (r - 1.0).abs() <= 0.1), || {
        format!("convergent ratios {convergent:?}")
    })?;
    Ok(format!("ratios 3^-k {divergent:.3?}, 16^-k {convergent:.3?}"))
}

fn non_ugs() -> Check {
    let s = Scenario::builtin("nonadmissible").map_err(err)?;
    let (alpha, n, beta) = match s.spec {
        ScenarioSpec::Nonadmissible { alpha, n, beta } => (alpha, n, beta),
        _ => return Err("not the nonadmissible scenario".into()),
    };
    ensure(alpha == 1.0 && beta == 0.5, || format!("α = {alpha}, β = {beta}"))?;
    let pts = s.resonant_response(&[16.0, 32.0, 64.0, 128.0]).map_err(err)?;
    let mut worst: f64 = 0.0;
    for p in &pts {
        let oracle = (1..=n)
            .map(|k| {
                let k = k as f64;
                p.t * (-p.t / k).exp() * k.powf(-0.5)
            })
            .fold(0.0, f64::max);
        worst = worst.max((p.simulated - oracle).abs() / oracle);
    }
    let ratios: Vec<f64> = pts.windows(2).map(|w| w[1].simulated / w[0].simulated).collect();
    ensure(ratios.iter().all(|&r| r >= 1.3), || format!("ratios {ratios:?}"))?;
    ensure(worst <= 0.1, || format!("oracle deviation {worst}"))?;
    Ok(format!("ratios {ratios:.3?}, max oracle deviation {:.2}%", 100.0 * worst))
}

/// `θ(r) = r⁴ + 4r³ + 6r² + 4r + e^r − 1`.
fn theta(r: f64) -> f64 {
    r.powi(4) + 4.0 * r.powi(3) + 6.0 * r * r + 4.0 * r + r.exp() - 1.0
}

fn bilinear_envelope() -> Check {
    let s = Scenario::builtin("bilinear").map_err(err)?;
    let Details::Bilinear { m, k, norm_b, hypothesis } = s.details else {
        return Err("not a bilinear scenario".into());
    };
    ensure(hypothesis, || "g ∉ D(A)".into())?;
    let env = s.envelope().map_err(err)?.ok_or("no envelope")?;
    let Envelope::Iiss { kappa, theta: th, mu } = &env else {
        return Err("envelope is not iISS".into());
    };
    let mu_exact = |r: f64| (m * norm_b * r).max(4.0 * k * r);
    let kappa_exact = |r: f64, t: f64| {
        let z = m * r / (t + 1.0);
        z * z + 2.0 * z
    };
    for &r in &[0.0, 0.3, 1.0, 2.5] {
        for &t in &[0.0, 1.0, 10.0] {
            let (a, b) = (kappa.eval(r, t), kappa_exact(r, t));
            ensure((a - b).abs() <= 1e-12 * b.max(1.0), || format!("κ({r},{t}) = {a} vs {b}"))?;
        }
        ensure((th.eval(r) - theta(r)).abs() <= 1e-12 * theta(r).max(1.0), || format!("θ({r})"))?;
        ensure((mu.eval(r) - mu_exact(r)).abs() <= 1e-12 * mu_exact(r).max(1.0), || format!("μ({r})"))?;
    }

    let runs = s
        .sample_runs(&EnvelopeSampling {
            samples: 50,
            ..EnvelopeSampling::default()
        })
        .map_err(err)?;
    let report = verify_envelope(&env, &runs).map_err(err)?;
    ensure(report.pass, || format!("iISS margin {} at {:?}", report.worst_margin, report.witness))?;

    // independent recomputation of the envelope along every run
    let mut worst = f64::INFINITY;
    for run in &runs {
        let r = run.graph_norm.ok_or("missing graph norm")?;
        let slack = run.trajectory.error_slack();
        for (&t, &norm) in run.trajectory.times.iter().zip(&run.trajectory.norms) {
            let integral: f64 = run.u.pieces_until(t).map(|(a, b, v)| {
                let size = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                (b - a) * mu_exact(size)
            }).sum();
            let bound = kappa_exact(r, t) + theta(integral);
            worst = worst.min(bound + slack + 1e-12 * bound.max(1.0) - norm);
        }
    }
    ensure(worst >= 0.0, || format!("independent margin {worst}"))?;

    let gron = verify_gronwall(&runs, m, norm_b, k).map_err(err)?;
    ensure(gron.pass, || format!("Gronwall margin {}", gron.worst_margin))?;
    Ok(format!(
        "50 runs, {} points, iISS margin {:.3e}, Gronwall margin {:.3e}",
        report.checked_points, report.worst_margin, gron.worst_margin
    ))
}

fn probes() -> Check {
    let s = build_powerlaw(1.0, 256).map_err(err)?;
    let env = s.envelope().map_err(err)?.ok_or("powerlaw has no envelope")?;
    let Envelope::SemiIss { mu, .. } = env.clone() else {
        return Err("envelope is not semi-ISS".into());
    };
    let sample = s
        .sample_runs(&EnvelopeSampling::default())
        .map_err(err)?;
    ensure(verify_envelope(&env, &sample).map_err(err)?.pass, || "scenario is not certified".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let horizon = 1000.0;
    let inputs = vec![
        InputSignal::zero(1),
        random_input(&mut rng, 1, horizon / 2.0, 1.0).map_err(err)?,
        random_input(&mut rng, 1, horizon / 2.0, 1.0).map_err(err)?,
    ];
    let mut lines = Vec::new();
    for radius in [1.0, 10.0] {
        let mut previous = [0.0f64; 2];
        for eps in [0.1, 0.01] {
            let mut cfg = ProbeConfig::new(eps, radius, mu.clone());
            cfg.horizon = horizon;
            cfg.grid_steps = 2000;
            let limit = probe_limit_property(&s.system, &inputs, &cfg).map_err(err)?;
            let gain = probe_asymptotic_gain(&s.system, &inputs, &cfg).map_err(err)?;
            for (i, r) in [&limit, &gain].into_iter().enumerate() {
                let tau = r.tau_hat.filter(|t| t.is_finite() && r.status == ProbeStatus::Found);
                let tau = tau.ok_or_else(|| format!("ε = {eps}, r = {radius}: {:?}", r.status))?;
                ensure(tau >= previous[i], || {
                    format!("τ̂ decreased to {tau} at ε = {eps}, r = {radius}")
                })?;
                previous[i] = tau;
            }
            lines.push(format!("(ε {eps}, r {radius}) → {:.1}/{:.1}", previous[0], previous[1]));
        }
    }

    let unstable = ControlSystem::new(
        DiagonalGenerator::from_list(vec![c(1.0, 0.0)]).map_err(err)?,
        InputOperator::zero(1),
        NonlinearTerm::Zero,
    )
    .map_err(err)?;
    let mut cfg = ProbeConfig::new(0.1, 1.0, ComparisonFunction::Zero);
    cfg.horizon = 20.0;
    let r = probe_limit_property(&unstable, &[InputSignal::zero(1)], &cfg).map_err(err)?;
    ensure(r.status == ProbeStatus::Falsified && r.witness.is_some(), || {
        format!("unstable scalar gave {:?}", r.status)
    })?;
    Ok(format!("τ̂ limit/gain {}; λ = +1 falsified", lines.join(", ")))
}

fn random_generator(rng: &mut ChaCha8Rng) -> DiagonalGenerator {
    let n = rng.gen_range(4..48);
    DiagonalGenerator::from_list(
        (0..n)
            .map(|_| c(-(10f64.powf(rng.gen_range(-3.0..1.0))), rng.gen_range(-50.0..50.0)))
            .collect(),
    )
    .unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> SpectralVector {
    SpectralVector::new((0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
}

/// Input with breakpoints on multiples of 1/4 so that shifts by such times are exact.
fn quarter_input(rng: &mut ChaCha8Rng, end: f64) -> InputSignal {
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    loop {
        values.push(vec![c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))]);
        let next = breakpoints.last().unwrap() + 0.25 * rng.gen_range(1..8) as f64;
        if next >= end {
            break;
        }
        breakpoints.push(next);
    }
    InputSignal::new(breakpoints, values).unwrap()
}

fn algebra() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 5];
    let options = SemilinearOptions::default();
    for _ in 0..100 {
        let gen = random_generator(&mut rng);
        let n = gen.len();
        let x = random_vector(&mut rng, n);
        let (t, s) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let whole = gen.semigroup_apply(t + s, &x).map_err(err)?;
        let split = gen.semigroup_apply(t, &gen.semigroup_apply(s, &x).map_err(err)?).map_err(err)?;
        worst[0] = worst[0].max(rel(&whole, &split));

        let lambda = c(rng.gen_range(0.1..5.0), rng.gen_range(-60.0..60.0));
        let r = gen.resolvent_apply(lambda, &x).map_err(err)?;
        let back = SpectralVector::from_fn(n, |k| (lambda - gen.eigenvalues()[k - 1]) * r.coeffs()[k - 1]);
        worst[1] = worst[1].max(rel(&x, &back));

        let beta = rng.gen_range(0.1..2.0);
        let pair = gen
            .fractional_power_apply(beta, &gen.fractional_power_apply(-beta, &x).map_err(err)?)
            .map_err(err)?;
        worst[2] = worst[2].max(rel(&x, &pair));

        // cocycle: φ(τ + t) = φ(t, φ(τ), u(· + τ)) on matching grids
        let b = InputOperator::rank_one(random_vector(&mut rng, n));
        let tau = 0.25 * rng.gen_range(1..16) as f64;
        let end = tau + 0.25 * rng.gen_range(1..16) as f64;
        let u = quarter_input(&mut rng, end);
        let grid: Vec<f64> = (0..=(end * 8.0) as usize).map(|j| j as f64 / 8.0).collect();
        let split_at = grid.iter().position(|&g| g == tau).unwrap();
        let tail: Vec<f64> = grid[split_at..].iter().map(|g| g - tau).collect();
        let shifted = u.shift(tau).map_err(err)?;

        let full = simulate_linear(&gen, &b, &u, &x, &grid).map_err(err)?;
        let head = full.snapshots[split_at].clone();
        let rest = simulate_linear(&gen, &b, &shifted, &head, &tail).map_err(err)?;
        worst[3] = worst[3].max(rel(full.last(), rest.last()));

        let g = random_vector(&mut rng, n).scale(c(0.2, 0.0));
        let sys = ControlSystem::new(
            gen.clone(),
            b,
            NonlinearTerm::bilinear(g, vec![c(1.0, 0.0)], 0).map_err(err)?,
        )
        .map_err(err)?;
        let full = sys.simulate(&u, &x, &grid, &options).map_err(err)?;
        let head = full.snapshots[split_at].clone();
        let rest = sys.simulate(&shifted, &head, &tail, &options).map_err(err)?;
        worst[4] = worst[4].max(rel(full.last(), rest.last()));
    }
    let limits = [1e-12, 1e-12, 1e-10, 1e-10, 1e-8];
    let names = ["semigroup", "resolvent", "fractional pair", "linear cocycle", "semilinear cocycle"];
    for i in 0..5 {
        ensure(worst[i] <= limits[i], || format!("{} error {:e}", names[i], worst[i]))?;
    }
    Ok(names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", "))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria = [
        Criterion { id: 1, name: "power-law decay exponent", limit: Duration::from_secs(30), run: power_law_decay },
        Criterion { id: 2, name: "decay ratio law", limit: Duration::from_secs(60), run: ratio_law },
        Criterion { id: 3, name: "damped beam", limit: Duration::from_secs(60), run: beam },
        Criterion { id: 4, name: "range-condition bound", limit: Duration::from_secs(60), run: range_bound },
        Criterion { id: 5, name: "Carleson sandwich", limit: Duration::from_secs(30), run: sandwich },
        Criterion { id: 6, name: "dyadic necessity", limit: Duration::from_secs(60), run: dyadic_necessity },
        Criterion { id: 7, name: "resonant non-UGS growth", limit: Duration::from_secs(30), run: non_ugs },
        Criterion { id: 8, name: "bilinear iISS envelope", limit: Duration::from_secs(120), run: bilinear_envelope },
        Criterion { id: 9, name: "attractivity probes", limit: Duration::from_secs(60), run: probes },
        Criterion { id: 10, name: "core algebra suite", limit: Duration::from_secs(10), run: algebra },
    ];
    let mut failed = 0;
    for cr in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (cr.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= cr.limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {:<26} {} {:>6.2}s/{}s  {}",
            cr.id,
            cr.name,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            cr.limit.as_secs(),
            detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
