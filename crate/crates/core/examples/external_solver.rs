//! Hand a formula to an external MaxSAT solver and compare with the builtin
//! backend.
//!
//! ```text
//! TREECLUST_SOLVER="rc2.py -vv" cargo run --example external_solver
//! ```

use std::time::Duration;

use treeclust::data::{generate_constraints, load_dataset, pair_table, LoadOptions};
use treeclust::encoding::{encode_tree, Objective, TreeShape};
use treeclust::pairs::{build_distance_classes, smart_pairs};
use treeclust::solver::{solve_builtin, solve_external, SOLVER_ENV};

fn main() -> treeclust::Result<()> {
    let Ok(cmd) = std::env::var(SOLVER_ENV) else {
        eprintln!("set {SOLVER_ENV} to a MaxSAT solver command, e.g. \"rc2.py -vv\"");
        return Ok(());
    };
    let d = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &LoadOptions::default(),
    )?;
    let pt = pair_table(&d)?;
    let dc = build_distance_classes(&pt, 0.1);
    let cs = generate_constraints(&d, 0.5, 1)?;
    let po = smart_pairs(&pt, &dc, &cs, 3);
    let enc = encode_tree(&d, &TreeShape::new(3)?, 3, &dc, &po, Objective::MdMs)?;

    let limit = Duration::from_secs(600);
    let ext = solve_external(&enc.formula, &cmd, limit)?;
    let own = solve_builtin(&enc.formula, limit)?;
    println!("external: {} cost {:?} in {:.2}s", ext.status, ext.cost, ext.wall_time);
    println!("builtin:  {} cost {:?} in {:.2}s", own.status, own.cost, own.wall_time);
    Ok(())
}
