use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Analysis, Format, RunConfig};
use crate::admissibility::{AdmissibilityEstimate, CarlesonReport, RangeConditionReport};
use crate::error::Result;
use crate::iss::{Envelope, EnvelopeReport, ProbeReport};
use crate::scenarios::{FlagOutcome, ResonantPoint, Scenario};
use crate::stability::{DecayFit, GapReport, SpectralConditionReport};
use crate::trajectory::StepMeta;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub scenario: Scenario,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "analysis", rename_all = "kebab-case")]
pub enum Record {
    Gap {
        report: GapReport,
    },
    SpectralCondition {
        report: SpectralConditionReport,
    },
    DecayFit {
        fit: DecayFit,
    },
    Admissibility {
        range: RangeConditionReport,
        /// `None` means no two modes share a strip, i.e. an infinite gap.
        separation_gap: Option<f64>,
        phi: Option<CarlesonReport>,
        estimate: Option<AdmissibilityEstimate>,
        resonant: Option<Vec<ResonantPoint>>,
        notes: Vec<String>,
    },
    Simulate {
        run_id: String,
        x0_norm: f64,
        u_sup: f64,
        times: Vec<f64>,
        norms: Vec<f64>,
        meta: StepMeta,
        blow_up: Option<f64>,
    },
    Certify {
        envelope: Envelope,
        report: EnvelopeReport,
    },
    Probe {
        limit: ProbeReport,
        gain: ProbeReport,
    },
    Failed {
        failed: Analysis,
        error: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub records: Vec<Record>,
    pub expectations: Vec<FlagOutcome>,
    pub expectations_met: bool,
    /// Wall-clock per stage; the only nondeterministic part of a report.
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Per-analysis CSV tables as `(file name, contents)`.
    pub fn csv_tables(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for r in &self.records {
            match r {
                Record::DecayFit { fit } => out.push(("decay_fit.csv".into(), fit.to_csv())),
                Record::Admissibility { phi: Some(phi), .. } => {
                    out.push(("stripes.csv".into(), phi.to_csv()))
                }
                Record::Simulate { times, norms, .. } => {
                    let mut s = String::from("t,norm\n");
                    for (t, n) in times.iter().zip(norms) {
                        let _ = writeln!(s, "{t:e},{n:e}");
                    }
                    out.push(("trajectory.csv".into(), s));
                }
                Record::Certify { report, .. } => out.push(("margins.csv".into(), report.to_csv())),
                _ => {}
            }
        }
        out
    }

    /// Writes `report.json` and/or the CSV tables into `dir`.
    pub fn export(&self, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if formats.contains(&Format::Json) {
            let p = dir.join("report.json");
            std::fs::write(&p, self.to_json()?)?;
            written.push(p);
        }
        if formats.contains(&Format::Csv) {
            for (name, body) in self.csv_tables() {
                let p = dir.join(name);
                std::fs::write(&p, body)?;
                written.push(p);
            }
        }
        Ok(written)
    }

    /// JSON with wall-clock fields cleared, for determinism checks.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.timings.clear();
        r.to_json()
    }
}
