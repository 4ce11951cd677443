//! Encoded formulas must match the checked-in WCNF files byte for byte.
//! Regenerate with `TREECLUST_BLESS=1 cargo test --test golden`.

mod common;

use std::fs;

use common::{golden_instances, golden_path};
use treeclust::encoding::WcnfFormula;

#[test]
fn wcnf_matches_golden_files() {
    let bless = std::env::var_os("TREECLUST_BLESS").is_some();
    for g in golden_instances() {
        let text = g.encoded.formula.to_dimacs_string();
        let path = golden_path(g.name);
        if bless {
            fs::write(&path, &text).unwrap();
        }
        let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(text == expected, "{} differs from {}", g.name, path.display());
    }
}

#[test]
fn encoding_is_deterministic() {
    let a = golden_instances();
    let b = golden_instances();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(
            x.encoded.formula.to_dimacs_string(),
            y.encoded.formula.to_dimacs_string()
        );
        assert_eq!(x.encoded.layout.to_json(), y.encoded.layout.to_json());
    }
}

#[test]
fn golden_files_parse_back() {
    for g in golden_instances() {
        let text = fs::read_to_string(golden_path(g.name)).unwrap();
        let f = WcnfFormula::read_dimacs(text.as_bytes()).unwrap();
        assert_eq!(f, g.encoded.formula);
        assert!(text.starts_with("p wcnf "));
        assert!(text.ends_with('\n'));
    }
}
