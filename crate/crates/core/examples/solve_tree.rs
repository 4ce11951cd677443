//! Fit a depth-3 clustering tree to Iris under random pairwise constraints.
//!
//! ```text
//! cargo run --release --example solve_tree -- [csv] [kappa] [seed] [depth]
//! ```
//!
//! Uses the solver named by `TREECLUST_SOLVER` if set, the builtin one
//! otherwise.

use std::time::Duration;

use treeclust::data::{generate_constraints, load_dataset, pair_table, LoadOptions};
use treeclust::encoding::{Mode, Objective};
use treeclust::harness::{solve_instance, InstanceSpec};
use treeclust::oracle::ari;
use treeclust::pairs::build_distance_classes;
use treeclust::solver::Backend;

fn main() -> treeclust::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .map_or(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"), |s| s.as_str());
    let kappa: f64 = args.get(1).map_or(0.5, |s| s.parse().expect("kappa"));
    let seed: u64 = args.get(2).map_or(1, |s| s.parse().expect("seed"));
    let depth: u32 = args.get(3).map_or(3, |s| s.parse().expect("depth"));

    let d = load_dataset(path, &LoadOptions::default())?;
    let pt = pair_table(&d)?;
    let dc = build_distance_classes(&pt, 0.1);
    let cs = generate_constraints(&d, kappa, seed)?;
    println!(
        "{} points, {} pairs in {} classes, {} must-link, {} cannot-link",
        d.n_points(),
        pt.len(),
        dc.len(),
        cs.ml().len(),
        cs.cl().len()
    );

    let spec = InstanceSpec {
        mode: Mode::Tree { depth },
        objective: Objective::MdMs,
        k: 3,
        smart_pairs: true,
        backend: Backend::from_env(),
        time_limit: Duration::from_secs(1800),
    };
    let out = solve_instance(&d, &pt, &dc, &cs, &spec)?;
    println!(
        "status {} in {:.2}s, {} clauses",
        out.status, out.wall_time, out.clause_count
    );
    if let Some(sol) = &out.solution {
        println!(
            "md {:.3}  ms {:.3}  lambda+ {}  lambda- {}",
            sol.md, sol.ms, sol.lambda_plus, sol.lambda_minus
        );
        println!("ARI vs species: {:.3}", ari(&sol.labels, d.labels().unwrap())?);
        print!("{}", sol.tree.as_ref().unwrap().render(&d));
    }
    Ok(())
}
