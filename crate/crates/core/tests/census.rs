//! Clause counts per family against closed-form expectations.

use proptest::prelude::*;
use treeclust::data::{generate_constraints, pair_table, Dataset};
use treeclust::encoding::{encode_cc, encode_tree, Encoded, Family, Objective, TreeShape};
use treeclust::pairs::{build_distance_classes, smart_pairs, FixedUnit, PruningOutcome};

struct Expect {
    n: usize,
    nf: usize,
    k: usize,
    mu: usize,
    plus: bool,
    po: PruningOutcome,
}

impl Expect {
    fn label_families(&self, e: &Encoded) {
        let (n, k, mu) = (self.n, self.k, self.mu);
        let po = &self.po;
        let c = |f| e.census.get(f);
        assert_eq!(c(Family::F13), k - 1);
        assert_eq!(c(Family::F14), (2..k).map(|cc| n - cc).sum::<usize>());
        assert_eq!(c(Family::F15), 1);
        assert_eq!(c(Family::F16), po.emit_cl.len());
        assert_eq!(c(Family::F17), po.emit_cl.len());
        assert_eq!(c(Family::F18), po.emit_cl.len() * (k - 2));
        assert_eq!(c(Family::F19), po.emit_ml.len() * (k - 1));
        assert_eq!(c(Family::F20), po.emit_ml.len() * (k - 1));
        assert_eq!(c(Family::F21), po.emit_cond_minus.len());
        assert_eq!(c(Family::F22), po.emit_cond_minus.len());
        assert_eq!(c(Family::F23), po.emit_cond_minus.len() * (k - 2));
        let cp = if self.plus {
            po.emit_cond_plus.len() * (k - 1)
        } else {
            0
        };
        assert_eq!(c(Family::F24), cp);
        assert_eq!(c(Family::F25), cp);
        assert_eq!(c(Family::F26), mu - 1);
        assert_eq!(c(Family::F27), if self.plus { mu - 1 } else { 0 });
        assert_eq!(c(Family::F28), if self.plus { mu } else { 0 });
        let fixed = po
            .fixed_units
            .iter()
            .filter(|u| self.plus || matches!(u, FixedUnit::BMinus(_)))
            .count();
        assert_eq!(c(Family::FixedUnits), fixed);
        assert_eq!(c(Family::Soft29), mu);
        assert_eq!(c(Family::Soft30), if self.plus { mu } else { 0 });
        assert_eq!(e.census.total(), e.formula.n_clauses());
        assert_eq!(e.census.hard_total(), e.formula.hard.len());
        assert!(e.formula.validate().is_ok());
    }

    fn tree_families(&self, e: &Encoded, d: &Dataset, depth: u32) {
        let (n, nf, k) = (self.n, self.nf, self.k);
        let b = (1usize << depth) - 1;
        let l = 1usize << depth;
        let c = |f| e.census.get(f);
        assert_eq!(c(Family::F1), b * nf * (nf - 1) / 2);
        assert_eq!(c(Family::F2), b);
        assert_eq!(c(Family::F3), b * nf * (n - 1));
        // adjacent equal values in each feature's sorted order
        let ties: usize = (0..nf)
            .map(|j| {
                let mut v: Vec<f64> = (0..n).map(|i| d.value(i, j)).collect();
                v.sort_by(f64::total_cmp);
                v.windows(2).filter(|w| w[0] == w[1]).count()
            })
            .sum();
        assert_eq!(c(Family::F4), b * ties);
        // every leaf has depth ancestors, half of them on the left on average
        assert_eq!(c(Family::F5), n * l * depth as usize / 2);
        assert_eq!(c(Family::F6), n * l * depth as usize / 2);
        assert_eq!(c(Family::F7), n * l);
        assert_eq!(c(Family::F8), b * nf);
        assert_eq!(c(Family::F9), b * nf);
        assert_eq!(c(Family::F10), l * (k - 2));
        assert_eq!(c(Family::F11), l * n * (k - 1));
        assert_eq!(c(Family::F12), l * n * (k - 1));
        assert_eq!(c(Family::F10b), 0);
    }
}

fn dataset(rows: Vec<Vec<f64>>, k: usize) -> Dataset {
    let labels = (0..rows.len()).map(|i| (i % k) as u32).collect();
    Dataset::from_rows(rows, Some(labels)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn census_matches_closed_form(
        rows in (3usize..12, 1usize..4).prop_flat_map(|(n, f)| prop::collection::vec(prop::collection::vec(0u8..6, f), n)),
        k in 2usize..5,
        depth in 1u32..4,
        kappa in prop::sample::select(vec![0.0, 0.5, 1.0]),
        eps in prop::sample::select(vec![0.0, 0.1, 5.0]),
        plus in any::<bool>(),
        seed in 0u64..1000,
    ) {
        let n = rows.len();
        prop_assume!(k <= n && (1usize << depth) >= k);
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
        let nf = rows[0].len();
        let d = dataset(rows, k);
        let pt = pair_table(&d).unwrap();
        let dc = build_distance_classes(&pt, eps);
        let cs = generate_constraints(&d, kappa, seed).unwrap();
        let po = smart_pairs(&pt, &dc, &cs, k);
        prop_assume!(!po.infeasible);
        let objective = if plus { Objective::MdMs } else { Objective::Md };
        let expect = Expect { n, nf, k, mu: dc.len(), plus, po: po.clone() };

        let tree = encode_tree(&d, &TreeShape::new(depth).unwrap(), k, &dc, &po, objective).unwrap();
        expect.tree_families(&tree, &d, depth);
        expect.label_families(&tree);

        let cc = encode_cc(&d, k, &dc, &po, objective).unwrap();
        prop_assert_eq!(cc.census.get(Family::F10b), n * (k - 2));
        prop_assert_eq!(cc.census.get(Family::F1) + cc.census.get(Family::F11), 0);
        expect.label_families(&cc);
    }
}
