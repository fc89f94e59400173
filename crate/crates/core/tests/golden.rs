//! Pinned headlines for every gallery fixture. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test --test golden`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use condpd::pipeline::{gallery, run, GALLERY};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"))
}

#[test]
fn headlines_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in GALLERY {
        let report = run(&gallery(name).unwrap()).unwrap();
        let path = golden_path(name);
        if update {
            let text = serde_json::to_string_pretty(&report.headline).unwrap() + "\n";
            std::fs::write(&path, text).unwrap();
            continue;
        }
        let pinned: BTreeMap<String, String> =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(report.headline, pinned, "{name}");
    }
}

#[test]
fn reports_are_byte_identical() {
    for name in GALLERY {
        let req = gallery(name).unwrap();
        let a = run(&req).unwrap();
        let b = run(&req).unwrap();
        assert_eq!(a.to_json(), b.to_json(), "{name}");
        assert_eq!(a.to_text(), b.to_text(), "{name}");
    }
}

#[test]
fn failing_verdicts_carry_witnesses() {
    fn walk(v: &serde_json::Value, path: &str) {
        match v {
            serde_json::Value::Object(map) => {
                if map.get("status").and_then(|s| s.as_str()) == Some("fails") {
                    assert!(map.contains_key("witness"), "{path}");
                }
                for (k, x) in map {
                    walk(x, &format!("{path}.{k}"));
                }
            }
            serde_json::Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    walk(x, &format!("{path}[{i}]"));
                }
            }
            _ => {}
        }
    }
    for name in GALLERY {
        let report = run(&gallery(name).unwrap()).unwrap();
        walk(&serde_json::to_value(&report.analyses).unwrap(), name);
    }
}

#[test]
fn recovered_objects_carry_tolerances() {
    for name in ["wab", "nilpotent3iso", "theta_sequence", "qclass_disk"] {
        let report = run(&gallery(name).unwrap()).unwrap();
        for key in ["measure", "triplet"] {
            if let Some(v) = report.analyses.get(key) {
                assert!(v.get("validated_at").is_some(), "{name}.{key}");
            }
        }
    }
}

#[test]
fn headline_examples() {
    let wab = run(&gallery("wab").unwrap()).unwrap();
    assert_eq!(wab.headline("cpd"), Some("holds_at_truncation"));
    assert_eq!(wab.headline("classification"), Some("kop-2izo-class"));
    assert_eq!(wab.headline("subnormal"), Some("false"));
    assert_eq!(wab.headline("measure"), Some("atoms at [0.000000]"));

    let wa1 = run(&gallery("wa1").unwrap()).unwrap();
    assert_eq!(wa1.headline("subnormal"), Some("true"));

    let squares = run(&gallery("squares").unwrap()).unwrap();
    assert_eq!(squares.headline("cpd"), Some("holds_at_truncation"));
    assert_eq!(squares.headline("pd"), Some("fails"));
    assert_eq!(squares.headline("triplet"), Some("b=0.000000, c=1.000000, nu=empty"));
}
