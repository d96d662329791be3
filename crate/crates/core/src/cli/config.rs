use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::iss::BallNorm;
use crate::scenarios::{Scenario, ScenarioSpec, BUILTIN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Gap,
    SpectralCondition,
    DecayFit,
    Admissibility,
    Simulate,
    Certify,
    Probe,
}

impl Analysis {
    pub const ALL: [Analysis; 7] = [
        Analysis::Gap,
        Analysis::SpectralCondition,
        Analysis::DecayFit,
        Analysis::Admissibility,
        Analysis::Simulate,
        Analysis::Certify,
        Analysis::Probe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Gap => "gap",
            Analysis::SpectralCondition => "spectral-condition",
            Analysis::DecayFit => "decay-fit",
            Analysis::Admissibility => "admissibility",
            Analysis::Simulate => "simulate",
            Analysis::Certify => "certify",
            Analysis::Probe => "probe",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayKnobs {
    pub beta: f64,
    /// Grid `2^lo ..= 2^hi`; defaults to the scenario's declared grid, else `2^0 ..= 2^10`.
    pub lo: Option<i32>,
    pub hi: Option<i32>,
    pub per_octave: usize,
}

impl Default for DecayKnobs {
    fn default() -> Self {
        DecayKnobs {
            beta: 1.0,
            lo: None,
            hi: None,
            per_octave: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeKnobs {
    pub eps: f64,
    pub radius: f64,
    pub ball: BallNorm,
    pub strata: usize,
}

impl Default for ProbeKnobs {
    fn default() -> Self {
        ProbeKnobs {
            eps: 0.1,
            radius: 1.0,
            ball: BallNorm::Graph,
            strata: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            formats: vec![Format::Json],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Built-in scenario name or path to a scenario spec / dump.
    pub scenario: String,
    pub analyses: Vec<Analysis>,
    pub truncation: Option<usize>,
    /// Overrides the scenario's declared `α`.
    pub alpha: Option<f64>,
    pub horizon: f64,
    pub grid_steps: usize,
    pub samples: usize,
    pub trials: usize,
    pub seed: u64,
    /// Picard defect budget of the semilinear solver.
    pub tolerance: f64,
    /// Skip the convolution estimator above this many operations.
    pub estimate_budget: f64,
    pub decay: DecayKnobs,
    pub probe: ProbeKnobs,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: "powerlaw".into(),
            analyses: Vec::new(),
            truncation: None,
            alpha: None,
            horizon: 100.0,
            grid_steps: 200,
            samples: 8,
            trials: 8,
            seed: 0,
            tolerance: 1e-10,
            estimate_budget: 2e10,
            decay: DecayKnobs::default(),
            probe: ProbeKnobs::default(),
            output: OutputConfig::default(),
        }
    }
}

fn is_toml(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "toml")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = if is_toml(path) {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive");
        }
        if self.grid_steps == 0 || self.samples == 0 {
            return bad("grid_steps and samples must be positive");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.alpha.is_some_and(|a| !(a > 0.0)) {
            return bad("alpha must be positive");
        }
        if !(self.probe.eps > 0.0 && self.probe.radius >= 0.0) {
            return bad("probe needs eps > 0 and radius ≥ 0");
        }
        if self.decay.per_octave == 0 || !(self.decay.beta > 0.0) {
            return bad("decay needs beta > 0 and per_octave ≥ 1");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Analyses in dependency order, deduplicated.
    pub fn ordered_analyses(&self) -> Vec<Analysis> {
        let mut a = self.analyses.clone();
        a.sort();
        a.dedup();
        a
    }

    pub fn resolve_scenario(&self) -> Result<Scenario> {
        let apply = |spec: ScenarioSpec| match self.truncation {
            Some(n) => spec.with_truncation(n),
            None => Ok(spec),
        };
        if BUILTIN.contains(&self.scenario.as_str()) {
            return apply(ScenarioSpec::builtin(&self.scenario)?)?.build();
        }
        let path = Path::new(&self.scenario);
        if !path.exists() {
            return Err(Error::UnknownScenario(self.scenario.clone()));
        }
        let text = std::fs::read_to_string(path)?;
        if is_toml(path) {
            let spec: ScenarioSpec =
                toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            return apply(spec)?.build();
        }
        if let Ok(spec) = serde_json::from_str::<ScenarioSpec>(&text) {
            return apply(spec)?.build();
        }
        let dump: Scenario =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        match self.truncation {
            Some(_) => apply(dump.spec)?.build(),
            None => Ok(dump),
        }
    }
}
