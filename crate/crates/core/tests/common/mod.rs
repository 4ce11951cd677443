//! Fixtures shared by the integration test targets.

#![allow(dead_code)]

use std::path::PathBuf;

use treeclust::data::{pair_table, ConstraintSet, Dataset};
use treeclust::encoding::{encode_cc, encode_tree, Encoded, Objective, TreeShape};
use treeclust::pairs::{build_distance_classes, smart_pairs};

pub struct Golden {
    pub name: &'static str,
    pub encoded: Encoded,
}

fn encode(
    rows: &[[f64; 2]],
    ml: &[(usize, usize)],
    cl: &[(usize, usize)],
    eps: f64,
    k: usize,
    depth: Option<u32>,
    objective: Objective,
) -> Encoded {
    let d = Dataset::from_rows(rows.iter().map(|r| r.to_vec()).collect(), None)
        .unwrap()
        .normalized();
    let cs = ConstraintSet::new(d.n_points(), ml.to_vec(), cl.to_vec()).unwrap();
    let pt = pair_table(&d).unwrap();
    let dc = build_distance_classes(&pt, eps);
    let po = smart_pairs(&pt, &dc, &cs, k);
    match depth {
        Some(depth) => encode_tree(&d, &TreeShape::new(depth).unwrap(), k, &dc, &po, objective).unwrap(),
        None => encode_cc(&d, k, &dc, &po, objective).unwrap(),
    }
}

/// Three fixed instances covering CC mode, a stump and a depth-2 tree with ties.
pub fn golden_instances() -> Vec<Golden> {
    vec![
        Golden {
            name: "cc_k2_md",
            encoded: encode(
                &[[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 1.0]],
                &[],
                &[(0, 1)],
                0.0,
                2,
                None,
                Objective::Md,
            ),
        },
        Golden {
            name: "tree_d1_mdms",
            encoded: encode(
                &[[0.0, 3.0], [1.0, 2.0], [2.0, 2.0], [8.0, 0.0], [9.0, 1.0]],
                &[(0, 1), (1, 2)],
                &[(2, 3)],
                0.0,
                2,
                Some(1),
                Objective::MdMs,
            ),
        },
        Golden {
            name: "tree_d2_ties",
            encoded: encode(
                &[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.0], [2.0, 2.0], [1.0, 2.0]],
                &[(3, 4)],
                &[(0, 5)],
                10.0,
                3,
                Some(2),
                Objective::MdMs,
            ),
        },
    ]
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.wcnf"))
}

/// An executable MaxSAT command: `TREECLUST_SOLVER`, else `rc2.py -vv` if on PATH.
pub fn external_solver() -> Option<String> {
    if let Ok(cmd) = std::env::var(treeclust::solver::SOLVER_ENV) {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    let on_path = std::env::var_os("PATH")?
        .to_str()?
        .split(':')
        .any(|d| std::path::Path::new(d).join("rc2.py").is_file());
    on_path.then(|| "rc2.py -vv".to_string())
}

/// Directory holding the benchmark CSVs: `TREECLUST_DATA_DIR`, else the bundled `data/`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("TREECLUST_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"))
}
