use std::time::Instant;

use semistab::scenarios::{Scenario, BUILTIN};

#[test]
fn builtin_expectations_are_rederived() {
    for name in BUILTIN {
        let start = Instant::now();
        let s = Scenario::builtin(name).unwrap();
        assert!(!s.expected.is_empty(), "{name} declares no flags");
        for o in s.verify_expectations() {
            assert!(o.matches, "{name}: {:?} expected {} got {:?} ({})", o.check, o.expected, o.observed, o.detail);
        }
        eprintln!("{name}: {:.2?}", start.elapsed());
    }
}

#[test]
fn dumps_rebuild_identically() {
    for name in BUILTIN {
        let s = Scenario::builtin(name).unwrap();
        let json = s.to_json().unwrap();
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s, "{name}");
        assert_eq!(back.spec.build().unwrap(), s, "{name}");
    }
}
