use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Analysis, RunConfig};
use super::report::{Provenance, Record, RunReport, StageTiming};
use crate::admissibility::{
    admissibility_constant_estimate, estimate_work, phi_sums, range_condition_margin,
    separation_gap,
};
use crate::comparison::ComparisonFunction;
use crate::error::{invalid, Result};
use crate::iss::{probe_asymptotic_gain, probe_limit_property, verify_envelope, Envelope, ProbeConfig};
use crate::scenarios::{random_input, Check, EnvelopeSampling, FlagOutcome, Scenario, Source};
use crate::series::GeometricGrid;
use crate::signal::InputSignal;
use crate::stability::{check_polynomial_spectral_condition, check_spectral_gap, fit_decay_exponent};
use crate::trajectory::SemilinearOptions;

fn belongs(analysis: Analysis, check: &Check) -> bool {
    matches!(
        (analysis, check),
        (Analysis::Gap, Check::SemiUniform)
            | (Analysis::SpectralCondition, Check::SpectralCondition { .. })
            | (Analysis::DecayFit, Check::DecayExponent { .. })
            | (Analysis::Admissibility, Check::RangeCondition { .. })
            | (Analysis::Admissibility, Check::Separated { .. })
            | (Analysis::Admissibility, Check::ResonantGrowth { .. })
    )
}

fn sampling(cfg: &RunConfig, samples: usize) -> EnvelopeSampling {
    EnvelopeSampling {
        samples,
        horizon: cfg.horizon,
        grid_steps: cfg.grid_steps,
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        ..EnvelopeSampling::default()
    }
}

fn decay_grid(cfg: &RunConfig, scenario: &Scenario) -> Result<GeometricGrid> {
    if let (Some(lo), Some(hi)) = (cfg.decay.lo, cfg.decay.hi) {
        return GeometricGrid::powers_of_two(lo, hi, cfg.decay.per_octave);
    }
    let declared = scenario.expected.iter().find_map(|f| match &f.check {
        Check::DecayExponent { beta, grid, .. } if *beta == cfg.decay.beta => Some(grid.clone()),
        _ => None,
    });
    match declared {
        Some(g) => Ok(g),
        None => GeometricGrid::powers_of_two(0, 10, cfg.decay.per_octave),
    }
}

fn execute(a: Analysis, cfg: &RunConfig, scenario: &Scenario) -> Result<(Record, Vec<FlagOutcome>)> {
    let gen = scenario.generator();
    let alpha = cfg.alpha.or(scenario.alpha).unwrap_or(1.0);
    let mut outcomes: Vec<FlagOutcome> = scenario
        .expected
        .par_iter()
        .filter(|f| belongs(a, &f.check))
        .map(|f| scenario.evaluate(f))
        .collect();
    let record = match a {
        Analysis::Gap => Record::Gap {
            report: check_spectral_gap(gen),
        },
        Analysis::SpectralCondition => Record::SpectralCondition {
            report: check_polynomial_spectral_condition(gen, alpha)?,
        },
        Analysis::DecayFit => Record::DecayFit {
            fit: fit_decay_exponent(gen, cfg.decay.beta, &decay_grid(cfg, scenario)?)?,
        },
        Analysis::Admissibility => {
            let beta = scenario
                .expected
                .iter()
                .find_map(|f| match f.check {
                    Check::RangeCondition { beta } => Some(beta),
                    _ => None,
                })
                .unwrap_or(1.0);
            let range = range_condition_margin(gen, &scenario.range_operator(), beta, Some(alpha))?;
            let b = scenario.linear_part()?.input;
            let mut notes = Vec::new();
            let phi = if b.channels() == 1 {
                Some(phi_sums(gen, &b.column(0))?)
            } else {
                notes.push("Φ-sums need a single input channel".to_string());
                None
            };
            let gap = match &phi {
                Some(p) => p.gap,
                None => Some(separation_gap(gen, 1.0)).filter(|d| d.is_finite()),
            };
            let work = estimate_work(gen, &b, cfg.horizon);
            let estimate = if work <= cfg.estimate_budget {
                Some(admissibility_constant_estimate(gen, &b, cfg.horizon, cfg.trials, cfg.seed)?)
            } else {
                notes.push(format!(
                    "convolution estimate skipped: ~{work:.1e} operations exceeds the budget {:.1e}",
                    cfg.estimate_budget
                ));
                None
            };
            let resonant = scenario
                .expected
                .iter()
                .find_map(|f| match &f.check {
                    Check::ResonantGrowth { horizons, .. } => Some(horizons.clone()),
                    _ => None,
                })
                .map(|h| scenario.resonant_response(&h))
                .transpose()?;
            Record::Admissibility {
                range,
                separation_gap: gap,
                phi,
                estimate,
                resonant,
                notes,
            }
        }
        Analysis::Simulate => {
            let run = scenario
                .sample_runs(&sampling(cfg, 1))?
                .pop()
                .ok_or_else(|| invalid("no run produced"))?;
            Record::Simulate {
                u_sup: run.u.sup_norm(),
                run_id: run.id,
                x0_norm: run.x0_norm,
                times: run.trajectory.times,
                norms: run.trajectory.norms,
                meta: run.trajectory.meta,
                blow_up: run.trajectory.blow_up,
            }
        }
        Analysis::Certify => {
            let envelope = scenario
                .envelope()?
                .ok_or_else(|| invalid(format!("scenario `{}` has no envelope to certify", scenario.name)))?;
            let runs = scenario.sample_runs(&sampling(cfg, cfg.samples))?;
            let report = verify_envelope(&envelope, &runs)?;
            let declared = scenario
                .expected
                .iter()
                .find(|f| matches!(f.check, Check::EnvelopePass { .. }));
            let expected = declared.is_none_or(|f| f.expected);
            outcomes.push(FlagOutcome {
                check: Check::EnvelopePass {
                    samples: cfg.samples,
                    horizon: cfg.horizon,
                    grid_steps: cfg.grid_steps,
                    seed: cfg.seed,
                },
                expected,
                observed: Some(report.pass),
                value: Some(report.worst_margin),
                source: declared.map_or(Source::Construction, |f| f.source),
                matches: report.pass == expected,
                detail: format!("{} points", report.checked_points),
            });
            Record::Certify { envelope, report }
        }
        Analysis::Probe => {
            let mu = match scenario.envelope()? {
                Some(Envelope::SemiIss { mu, .. }) => mu,
                _ => ComparisonFunction::Zero,
            };
            let dim = scenario.system.input_dim();
            let mut inputs = vec![InputSignal::zero(dim)];
            if !mu.is_zero() {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
                for _ in 0..2 {
                    inputs.push(random_input(&mut rng, dim, cfg.horizon / 2.0, 1.0)?);
                }
            }
            let probe = ProbeConfig {
                eps: cfg.probe.eps,
                radius: cfg.probe.radius,
                mu,
                samples: cfg.samples,
                strata: cfg.probe.strata,
                horizon: cfg.horizon,
                grid_steps: cfg.grid_steps,
                seed: cfg.seed,
                ball: cfg.probe.ball,
                options: SemilinearOptions {
                    tol: cfg.tolerance,
                    ..SemilinearOptions::default()
                },
            };
            Record::Probe {
                limit: probe_limit_property(&scenario.system, &inputs, &probe)?,
                gain: probe_asymptotic_gain(&scenario.system, &inputs, &probe)?,
            }
        }
    };
    Ok((record, outcomes))
}

/// Runs every requested analysis and assembles the report in dependency order.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let scenario = cfg.resolve_scenario()?;
    let mut timings = vec![StageTiming {
        stage: "scenario".into(),
        seconds: start.elapsed().as_secs_f64(),
    }];
    let analyses = cfg.ordered_analyses();
    let results: Vec<(Record, Vec<FlagOutcome>, f64)> = analyses
        .par_iter()
        .map(|&a| {
            let t = Instant::now();
            let (record, outcomes) = execute(a, cfg, &scenario).unwrap_or_else(|e| {
                (
                    Record::Failed {
                        failed: a,
                        error: e.to_string(),
                    },
                    Vec::new(),
                )
            });
            (record, outcomes, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut records = Vec::new();
    let mut expectations = Vec::new();
    for (a, (record, outcomes, secs)) in analyses.iter().zip(results) {
        timings.push(StageTiming {
            stage: a.name().into(),
            seconds: secs,
        });
        records.push(record);
        expectations.extend(outcomes);
    }
    let failed = records.iter().any(|r| matches!(r, Record::Failed { .. }));
    let expectations_met = !failed && expectations.iter().all(|o| o.matches);
    Ok(RunReport {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: cfg.hash(),
            config: cfg.clone(),
            scenario,
        },
        records,
        expectations,
        expectations_met,
        timings,
    })
}
