//! The fuzz targets' properties, replayed over their seed corpora.

use mcdf_core::config::RunConfig;
use mcdf_core::report::ResultDocument;
use std::path::PathBuf;

fn corpus(name: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(name);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus {}", dir.display());
    out
}

#[test]
fn config_seeds_round_trip_when_accepted() {
    let mut accepted = 0;
    for (path, text) in corpus("config_toml") {
        if let Ok(cfg) = RunConfig::from_toml_str(&text) {
            let again = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(cfg.to_toml_string(), again.to_toml_string(), "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 4);
}

#[test]
fn result_seeds_round_trip_when_accepted() {
    let mut accepted = 0;
    for (path, text) in corpus("result_json") {
        if let Ok(doc) = ResultDocument::from_json(&text) {
            let written = doc.to_json();
            let again = ResultDocument::from_json(&written).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(written, again.to_json(), "{}", path.display());
            accepted += 1;
        }
    }
    assert_eq!(accepted, 1);
}
