use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use semistab::cli::{run, Analysis, Format, RunConfig, RunReport};
use semistab::scenarios::{Scenario, BUILTIN};
use semistab::Error;

#[derive(Parser)]
#[command(name = "semistab", version, about = "Stability, admissibility and ISS analysis of diagonal semigroup systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral gap, polynomial spectral condition and decay-rate fit.
    Analyze(Common),
    /// Range condition, Φ-sums and the convolution estimate.
    Admissibility(Common),
    /// One sampled trajectory.
    Simulate(Common),
    /// Envelope verification on sampled runs.
    Certify(Common),
    /// Limit-property and asymptotic-gain probes.
    Probe(Common),
    /// Built-in scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// The same analyses over several truncations.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated mode counts.
        #[arg(long, value_delimiter = ',', required = true)]
        truncations: Vec<usize>,
        /// Comma-separated analyses.
        #[arg(long, value_delimiter = ',', default_value = "gap,decay-fit")]
        analyses: Vec<String>,
    },
    /// Everything listed in a config file.
    Run(Common),
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Print the full scenario as JSON.
    Dump {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Print the built-in scenario names.
    List,
}

#[derive(Args, Clone)]
struct Common {
    /// Built-in name or scenario file.
    #[arg(long)]
    scenario: Option<String>,
    /// TOML or JSON run config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Probe tolerance ε.
    #[arg(long)]
    eps: Option<f64>,
    /// Probe radius r.
    #[arg(long)]
    radius: Option<f64>,
    /// Output directory; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json, csv or both (comma-separated).
    #[arg(long, value_delimiter = ',')]
    format: Vec<String>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn parse_analysis(s: &str) -> Result<Analysis, String> {
    Analysis::ALL
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| format!("unknown analysis `{s}`"))
}

fn build_config(c: &Common, analyses: Option<Vec<Analysis>>) -> Result<RunConfig, String> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(a) = analyses {
        cfg.analyses = a;
    }
    if let Some(s) = &c.scenario {
        cfg.scenario = s.clone();
    }
    cfg.truncation = c.truncation.or(cfg.truncation);
    cfg.alpha = c.alpha.or(cfg.alpha);
    if let Some(h) = c.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = c.samples {
        cfg.samples = s;
    }
    if let Some(e) = c.eps {
        cfg.probe.eps = e;
    }
    if let Some(r) = c.radius {
        cfg.probe.radius = r;
    }
    if c.out.is_some() {
        cfg.output.dir = c.out.clone();
    }
    if !c.format.is_empty() {
        cfg.output.formats = c
            .format
            .iter()
            .map(|f| match f.as_str() {
                "json" => Ok(Format::Json),
                "csv" => Ok(Format::Csv),
                other => Err(format!("unknown format `{other}`")),
            })
            .collect::<Result<_, _>>()?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::Io(_) | Error::UnknownScenario(_) | Error::Json(_) | Error::InvalidParameter(_)
    )
}

fn emit(report: &RunReport, cfg: &RunConfig) -> Result<(), Error> {
    match &cfg.output.dir {
        Some(dir) => {
            for p in report.export(dir, &cfg.output.formats)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            if cfg.output.formats.contains(&Format::Json) {
                println!("{}", report.to_json()?);
            }
            if cfg.output.formats.contains(&Format::Csv) {
                for (name, body) in report.csv_tables() {
                    println!("# {name}\n{body}");
                }
            }
        }
    }
    Ok(())
}

fn execute(cfg: RunConfig) -> ExitCode {
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) if is_usage_error(&e) => return usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&report, &cfg) {
        return usage(e);
    }
    for o in report.expectations.iter().filter(|o| !o.matches) {
        eprintln!("mismatch: {:?} expected {} observed {:?} ({})", o.check, o.expected, o.observed, o.detail);
    }
    if report.expectations_met {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("SEMISTAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("SEMISTAB_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("SEMISTAB_THREADS must be positive".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return usage(e);
    }
    let preset = |c: &Common, a: &[Analysis]| build_config(c, Some(a.to_vec()));
    let cfg = match &cli.command {
        Command::Analyze(c) => preset(
            c,
            &[Analysis::Gap, Analysis::SpectralCondition, Analysis::DecayFit],
        ),
        Command::Admissibility(c) => preset(c, &[Analysis::Admissibility]),
        Command::Simulate(c) => preset(c, &[Analysis::Simulate]),
        Command::Certify(c) => preset(c, &[Analysis::Certify]),
        Command::Probe(c) => preset(c, &[Analysis::Probe]),
        Command::Run(c) => {
            if c.config.is_none() {
                return usage("run needs --config");
            }
            build_config(c, None)
        }
        Command::Scenario(ScenarioCmd::List) => {
            for name in BUILTIN {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Scenario(ScenarioCmd::Dump {
            scenario,
            truncation,
        }) => {
            let cfg = RunConfig {
                scenario: scenario.clone(),
                truncation: *truncation,
                ..RunConfig::default()
            };
            return match cfg.resolve_scenario().and_then(|s: Scenario| s.to_json()) {
                Ok(json) => {
                    println!("{json}");
                    ExitCode::SUCCESS
                }
                Err(e) => usage(e),
            };
        }
        Command::Sweep {
            common,
            truncations,
            analyses,
        } => {
            let parsed: Result<Vec<Analysis>, String> =
                analyses.iter().map(|s| parse_analysis(s)).collect();
            let base = match parsed.and_then(|a| build_config(common, Some(a))) {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            return sweep(base, truncations);
        }
    };
    match cfg {
        Ok(cfg) => execute(cfg),
        Err(e) => usage(e),
    }
}

fn sweep(base: RunConfig, truncations: &[usize]) -> ExitCode {
    let reports: Vec<Result<RunReport, Error>> = truncations
        .par_iter()
        .map(|&n| {
            run(&RunConfig {
                truncation: Some(n),
                output: Default::default(),
                ..base.clone()
            })
        })
        .collect();
    let mut ok = true;
    let mut collected = Vec::new();
    for (n, r) in truncations.iter().zip(reports) {
        match r {
            Ok(r) => {
                ok &= r.expectations_met;
                if let Some(dir) = &base.output.dir {
                    if let Err(e) = r.export(&dir.join(format!("n{n}")), &base.output.formats) {
                        return usage(e);
                    }
                }
                collected.push(r);
            }
            Err(e) => return usage(format!("truncation {n}: {e}")),
        }
    }
    if base.output.dir.is_none() {
        match serde_json::to_string_pretty(&collected) {
            Ok(s) => println!("{s}"),
            Err(e) => return usage(e),
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
