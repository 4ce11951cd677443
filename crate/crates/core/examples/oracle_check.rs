//! Compare the MaxSAT optimum with exhaustive enumeration on a tiny
//! instance.

use std::time::Duration;

use treeclust::data::{generate_constraints, pair_table, Dataset};
use treeclust::encoding::{Mode, Objective};
use treeclust::harness::{solve_instance, InstanceSpec};
use treeclust::oracle::{cc_oracle, tree_oracle};
use treeclust::pairs::build_distance_classes;
use treeclust::solver::Backend;

fn main() -> treeclust::Result<()> {
    let rows = vec![
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![2.0, 3.0],
        vec![8.0, 8.0],
        vec![9.0, 7.0],
        vec![3.0, 9.0],
        vec![4.0, 8.5],
        vec![7.5, 1.0],
    ];
    let d = Dataset::from_rows(rows, Some(vec![1, 1, 1, 2, 2, 3, 3, 1]))?.normalized();
    let cs = generate_constraints(&d, 0.5, 7)?;
    let pt = pair_table(&d)?;
    let dc = build_distance_classes(&pt, 0.0);

    for (mode, oracle) in [
        (Mode::Cc, cc_oracle(&d, 3, &cs)?),
        (Mode::Tree { depth: 2 }, tree_oracle(&d, 2, 3, &cs)?),
    ] {
        let spec = InstanceSpec {
            mode,
            objective: Objective::Md,
            k: 3,
            smart_pairs: true,
            backend: Backend::Builtin,
            time_limit: Duration::from_secs(60),
        };
        let out = solve_instance(&d, &pt, &dc, &cs, &spec)?;
        let md = out.solution.as_ref().map(|s| s.md);
        println!("{mode:?}: solver md {md:?}, oracle md {:?}", oracle.min_md);
        assert_eq!(md, oracle.min_md);
    }
    Ok(())
}
