//! A small kappa sweep written to a results directory.
//!
//! ```text
//! cargo run --release --example sweep -- [out-dir]
//! ```

use treeclust::encoding::Mode;
use treeclust::harness::{render_table, run_matrix, RunConfig};

fn main() -> treeclust::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "sweep-results".into());
    let mut cfgs = Vec::new();
    for kappa in [0.0, 0.25, 0.5, 1.0] {
        let mut cfg = RunConfig::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/blobs.csv"));
        cfg.mode = Mode::Tree { depth: 2 };
        cfg.kappa = kappa;
        cfg.seeds = (1..=5).collect();
        cfgs.push(cfg);
    }
    let report = run_matrix(&cfgs, out.as_ref(), 2)?;
    print!("{}", render_table(&report));
    println!("per-seed records, summary.csv and figure1.csv in {out}/");
    Ok(())
}
