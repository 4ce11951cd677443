//! Group pair distances into epsilon-wide classes and see how Smart Pairs
//! shrinks the set of pair clauses.

use treeclust::data::{generate_constraints, load_dataset, pair_table, LoadOptions};
use treeclust::pairs::{build_distance_classes, bypass_pairs, smart_pairs};

fn main() -> treeclust::Result<()> {
    let d = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/blobs.csv"),
        &LoadOptions::default(),
    )?;
    let pt = pair_table(&d)?;
    println!(
        "{} pairs, distances {:.2} .. {:.2}",
        pt.len(),
        pt.dist(0),
        pt.dist(pt.len() - 1)
    );

    for eps in [0.0, 0.1, 1.0, 5.0, 20.0] {
        let dc = build_distance_classes(&pt, eps);
        println!("epsilon {eps:>5}: {:>4} classes", dc.len());
    }

    let dc = build_distance_classes(&pt, 1.0);
    let cs = generate_constraints(&d, 1.0, 3)?;
    let all = bypass_pairs(&pt, &dc, &cs, 3);
    let kept = smart_pairs(&pt, &dc, &cs, 3);
    println!(
        "constraints: {} ML / {} CL kept of {} / {}",
        kept.emit_ml.len(),
        kept.emit_cl.len(),
        all.emit_ml.len(),
        all.emit_cl.len()
    );
    println!(
        "conditional pairs: {} together / {} apart kept of {} each",
        kept.emit_cond_plus.len(),
        kept.emit_cond_minus.len(),
        all.emit_cond_plus.len()
    );
    println!("fixed class units: {:?}", kept.fixed_units);
    Ok(())
}
