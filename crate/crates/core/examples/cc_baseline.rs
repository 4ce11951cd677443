//! The tree-free baseline next to a shallow tree on XOR-shaped data.
//! Plain constrained clustering can group the diagonals; a single split
//! cannot.

use std::time::Duration;

use treeclust::data::{load_dataset, pair_table, ConstraintSet, LoadOptions};
use treeclust::encoding::{Mode, Objective};
use treeclust::harness::{solve_instance, InstanceSpec};
use treeclust::pairs::build_distance_classes;
use treeclust::solver::Backend;

fn main() -> treeclust::Result<()> {
    let d = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/xor.csv"),
        &LoadOptions::default(),
    )?;
    let pt = pair_table(&d)?;
    let dc = build_distance_classes(&pt, 0.0);
    // keep each diagonal together and the two diagonals apart
    let cs = ConstraintSet::new(d.n_points(), vec![(0, 2), (4, 6)], vec![(0, 4)])?;

    for mode in [Mode::Cc, Mode::Tree { depth: 1 }, Mode::Tree { depth: 2 }] {
        let spec = InstanceSpec {
            mode,
            objective: Objective::MdMs,
            k: 2,
            smart_pairs: true,
            backend: Backend::Builtin,
            time_limit: Duration::from_secs(60),
        };
        let out = solve_instance(&d, &pt, &dc, &cs, &spec)?;
        match &out.solution {
            Some(sol) => println!("{mode:?}: {} labels {:?} md {:.2}", out.status, sol.labels, sol.md),
            None => println!("{mode:?}: {}", out.status),
        }
    }
    Ok(())
}
