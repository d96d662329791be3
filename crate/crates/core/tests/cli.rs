use std::path::Path;
use std::process::{Command, Output};

use semistab::cli::{Record, RunReport};

fn semistab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semistab"))
        .args(args)
        .env("SEMISTAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> RunReport {
    RunReport::from_json(std::str::from_utf8(&o.stdout).unwrap()).expect("report JSON")
}

#[test]
fn analyze_powerlaw_fits_unit_exponent() {
    let o = semistab(&["analyze", "--scenario", "powerlaw", "--alpha", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    let fit = r
        .records
        .iter()
        .find_map(|rec| match rec {
            Record::DecayFit { fit } => Some(fit),
            _ => None,
        })
        .expect("decay-fit record");
    let e = fit.exponent.unwrap();
    assert!((e - 1.0).abs() < 0.05, "ê = {e}");
    assert!(r.expectations_met);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&semistab(&["run", "--config", missing.to_str().unwrap()])), 2);
    assert_eq!(code(&semistab(&["run"])), 2);
    assert_eq!(code(&semistab(&["analyze", "--scenario", "no-such-scenario"])), 2);
    assert_eq!(code(&semistab(&["analyze", "--format", "xml"])), 2);
    assert_eq!(code(&semistab(&["analyze", "--horizon", "-1"])), 2);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "scenario = \"powerlaw\"\nunknown_knob = 3\n").unwrap();
    let o = semistab(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown_knob"));
}

#[test]
fn certify_without_envelope_exits_one() {
    let o = semistab(&["certify", "--scenario", "dyadic"]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    assert!(matches!(r.records[0], Record::Failed { .. }));
}

#[test]
fn certify_bilinear_passes() {
    let o = semistab(&["certify", "--scenario", "bilinear", "--samples", "4", "--horizon", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    match &r.records[0] {
        Record::Certify { report, envelope } => {
            assert!(report.pass);
            assert_eq!(envelope.kind(), semistab::iss::CheckKind::Iiss);
        }
        other => panic!("unexpected record {other:?}"),
    }
}

#[test]
fn empty_analysis_list_gives_provenance_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "scenario = \"beam\"\nanalyses = []\n").unwrap();
    let o = semistab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert!(r.records.is_empty());
    assert_eq!(r.provenance.scenario.name, "beam");
    assert_eq!(r.provenance.config_hash.len(), 64);
}

fn csv_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn export_csv_and_reload_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "scenario = \"powerlaw\"\ntruncation = 4096\nanalyses = [\"decay-fit\", \"simulate\"]\n\
         [output]\nformats = [\"json\", \"csv\"]\n",
    )
    .unwrap();
    let o = semistab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    let r = RunReport::from_json(&text).unwrap();
    assert_eq!(r.to_json().unwrap(), text);

    let fit = r
        .records
        .iter()
        .find_map(|rec| match rec {
            Record::DecayFit { fit } => Some(fit),
            _ => None,
        })
        .unwrap();
    let rows = csv_rows(&out.join("decay_fit.csv"));
    assert!(rows.len() >= 8);
    assert_eq!(rows.len(), fit.grid.values().len());
    for (row, t) in rows.iter().zip(fit.grid.values()) {
        let first: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert_eq!(first, t);
    }
    assert!(csv_rows(&out.join("trajectory.csv")).len() > 8);
}

#[test]
fn reports_are_deterministic() {
    let args = ["simulate", "--scenario", "saturating", "--seed", "5", "--horizon", "20"];
    let (a, b) = (semistab(&args), semistab(&args));
    assert_eq!(code(&a), 0);
    let (a, b) = (report(&a), report(&b));
    assert_eq!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
    let c = report(&semistab(&["simulate", "--scenario", "saturating", "--seed", "6", "--horizon", "20"]));
    assert_ne!(a.canonical_json().unwrap(), c.canonical_json().unwrap());
}

#[test]
fn scenario_dump_feeds_back_in() {
    let dir = tempfile::tempdir().unwrap();
    let o = semistab(&["scenario", "dump", "--scenario", "dyadic", "--truncation", "4"]);
    assert_eq!(code(&o), 0);
    let path = dir.path().join("dyadic.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let o = semistab(&["analyze", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dumped: semistab::scenarios::Scenario =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report(&o).provenance.scenario, dumped);

    let list = semistab(&["scenario", "list"]);
    let names = String::from_utf8(list.stdout).unwrap();
    assert_eq!(names.lines().count(), semistab::scenarios::BUILTIN.len());
}

#[test]
fn sweep_over_truncations() {
    let o = semistab(&["sweep", "--scenario", "powerlaw", "--truncations", "512,1024", "--analyses", "gap"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<RunReport> = serde_json::from_slice(&o.stdout).unwrap();
    let sizes: Vec<usize> = reports.iter().map(|r| r.provenance.scenario.generator().len()).collect();
    assert_eq!(sizes, vec![512, 1024]);
}
