//! Compile a small instance to DIMACS WCNF plus a variable map.
//!
//! ```text
//! cargo run --example encode_wcnf -- out.wcnf
//! ```

use treeclust::data::{load_dataset, pair_table, ConstraintSet, LoadOptions};
use treeclust::encoding::{emit_wcnf, encode_tree, Objective, TreeShape};
use treeclust::pairs::{build_distance_classes, smart_pairs};

fn main() -> treeclust::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "blobs.wcnf".into());
    let d = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/blobs.csv"),
        &LoadOptions::default(),
    )?;
    let cs = ConstraintSet::parse("ML 0 1\nCL 0 6\nCL 6 12\n", d.n_points())?;
    let pt = pair_table(&d)?;
    let dc = build_distance_classes(&pt, 0.1);
    let po = smart_pairs(&pt, &dc, &cs, 3);
    let enc = encode_tree(&d, &TreeShape::new(2)?, 3, &dc, &po, Objective::MdMs)?;

    emit_wcnf(&enc.formula, &out)?;
    let map = std::path::Path::new(&out).with_extension("vars.json");
    std::fs::write(&map, serde_json::to_string_pretty(&enc.layout.to_json())?).expect("write variable map");

    println!(
        "{} vars, {} hard, {} soft (top weight {}) -> {out}",
        enc.formula.n_vars,
        enc.formula.hard.len(),
        enc.formula.soft.len(),
        enc.formula.top()
    );
    for (family, n) in &enc.census.counts {
        println!("  {family:?}: {n}");
    }
    Ok(())
}
