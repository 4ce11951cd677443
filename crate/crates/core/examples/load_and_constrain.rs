//! Load a CSV, normalize it, and draw seeded must-link / cannot-link sets.
//!
//! ```text
//! cargo run --example load_and_constrain -- [csv] [kappa]
//! ```

use treeclust::data::{constraint_count, generate_constraints, load_dataset, LoadOptions};

fn main() -> treeclust::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .map_or(concat!(env!("CARGO_MANIFEST_DIR"), "/data/blobs.csv"), |s| s.as_str());
    let kappa: f64 = args.get(1).map_or(0.5, |s| s.parse().expect("kappa"));

    let d = load_dataset(path, &LoadOptions::default())?;
    println!(
        "{} points x {} features, classes {:?}",
        d.n_points(),
        d.n_features(),
        d.label_names()
    );
    for (j, (lo, hi)) in d.feature_ranges().unwrap().iter().enumerate() {
        println!("  {:<14} [{lo}, {hi}] -> [0, 100]", d.feature_name(j));
    }

    println!(
        "kappa {kappa}: {} constraints per set",
        constraint_count(d.n_points(), kappa)
    );
    for seed in 1..=3 {
        let cs = generate_constraints(&d, kappa, seed)?;
        println!("seed {seed}: ML {:?}", cs.ml());
        println!("        CL {:?}", cs.cl());
    }
    // the same seed always yields the same set
    assert_eq!(generate_constraints(&d, kappa, 2)?, generate_constraints(&d, kappa, 2)?);
    Ok(())
}
