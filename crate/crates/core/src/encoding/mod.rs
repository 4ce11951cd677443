//! Compiles a clustering instance into weighted partial MaxSAT.
//!
//! Clause families are emitted in a fixed order so a given instance always
//! produces the same formula:
//!
//! | family | meaning |
//! |--------|---------|
//! | 1-2    | exactly one feature per branch node |
//! | 3-4    | left/right routing follows the feature order |
//! | 5-7    | leaf membership matches the routing path |
//! | 8-9    | thresholds split the data non-trivially |
//! | 10     | leaf labels are well-formed unary numbers |
//! | 10b    | point labels are well-formed unary numbers (CC mode) |
//! | 11-12  | a point takes the label of its leaf |
//! | 13-14  | first-occurrence symmetry breaking |
//! | 15     | the last cluster is used (so all are) |
//! | 16-18  | cannot-link separation |
//! | 19-20  | must-link co-clustering |
//! | 21-23  | class `w` separated unless `b-[w]` |
//! | 24-25  | class `w` together if `b+[w]` |
//! | 26-28  | `b-` and `b+` are prefixes, `b+ => b-` |
//!
//! Then the units fixed by pair pruning, then soft units `not b-[w]` and,
//! for `[MD,MS]`, `b+[w]`.

mod layout;
mod wcnf;

use serde::{Deserialize, Serialize};

pub use layout::{Symbol, VariableLayout};
pub use wcnf::{emit_wcnf, Lit, WcnfFormula};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::pairs::{DistanceClassing, FixedUnit, PruningOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    /// Minimize the maximum diameter.
    #[serde(rename = "MD")]
    Md,
    /// Minimize the maximum diameter and maximize the minimum split.
    #[serde(rename = "MD_MS")]
    MdMs,
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Md => "md",
            Objective::MdMs => "md-ms",
        })
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md" => Ok(Objective::Md),
            "md-ms" | "md_ms" | "mdms" | "ms-md" => Ok(Objective::MdMs),
            _ => Err(Error::Config(format!("unknown objective `{s}` (md | md-ms)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Tree {
        depth: u32,
    },
    /// Plain constrained clustering, no tree.
    Cc,
}

/// Complete binary tree of a given depth, heap-indexed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    depth: u32,
}

impl TreeShape {
    pub fn new(depth: u32) -> Result<Self> {
        if depth == 0 || depth > 16 {
            return Err(Error::Config(format!("tree depth {depth} outside 1..=16")));
        }
        Ok(TreeShape { depth })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn n_branches(&self) -> usize {
        (1 << self.depth) - 1
    }

    pub fn n_leaves(&self) -> usize {
        1 << self.depth
    }

    pub fn branches(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_branches()
    }

    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.n_leaves()..2 * self.n_leaves()
    }

    pub fn left(t: usize) -> usize {
        2 * t
    }

    pub fn right(t: usize) -> usize {
        2 * t + 1
    }

    pub fn is_leaf(&self, t: usize) -> bool {
        t >= self.n_leaves()
    }

    /// Ancestors of `t` that reach it through their left child.
    pub fn left_ancestors(&self, t: usize) -> Vec<usize> {
        self.ancestors(t, 0)
    }

    /// Ancestors of `t` that reach it through their right child.
    pub fn right_ancestors(&self, t: usize) -> Vec<usize> {
        self.ancestors(t, 1)
    }

    fn ancestors(&self, mut t: usize, side: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while t > 1 {
            if t % 2 == side {
                out.push(t / 2);
            }
            t /= 2;
        }
        out.reverse();
        out
    }
}

/// Per-feature point orderings, ties broken by point index.
#[derive(Debug, Clone)]
pub struct FeatureOrders {
    orders: Vec<Vec<usize>>,
}

impl FeatureOrders {
    pub fn new(d: &Dataset) -> Self {
        let orders = (0..d.n_features())
            .map(|j| {
                let mut idx: Vec<usize> = (0..d.n_points()).collect();
                idx.sort_by(|&a, &b| d.value(a, j).total_cmp(&d.value(b, j)).then(a.cmp(&b)));
                idx
            })
            .collect();
        FeatureOrders { orders }
    }

    pub fn order(&self, j: usize) -> &[usize] {
        &self.orders[j]
    }

    /// Consecutive pairs of the ordering on feature `j`.
    pub fn consecutive(&self, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.orders[j].windows(2).map(|w| (w[0], w[1]))
    }

    pub fn first(&self, j: usize) -> usize {
        self.orders[j][0]
    }

    pub fn last(&self, j: usize) -> usize {
        *self.orders[j].last().expect("non-empty dataset")
    }
}

/// Clause family tags, used for the census.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F10b,
    F11,
    F12,
    F13,
    F14,
    F15,
    F16,
    F17,
    F18,
    F19,
    F20,
    F21,
    F22,
    F23,
    F24,
    F25,
    F26,
    F27,
    F28,
    FixedUnits,
    Soft29,
    Soft30,
}

/// How many clauses each family contributed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub counts: std::collections::BTreeMap<Family, usize>,
}

impl Census {
    pub fn get(&self, f: Family) -> usize {
        self.counts.get(&f).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn hard_total(&self) -> usize {
        self.total() - self.get(Family::Soft29) - self.get(Family::Soft30)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EncodeOptions {
    /// Only the first `min_clusters` clusters must be non-empty. `None`
    /// means all `k`.
    pub min_clusters: Option<usize>,
}

/// A compiled instance.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub formula: WcnfFormula,
    pub layout: VariableLayout,
    pub census: Census,
}

struct Emitter {
    formula: WcnfFormula,
    census: Census,
}

impl Emitter {
    fn hard(&mut self, fam: Family, clause: Vec<Lit>) {
        self.formula.add_hard(clause);
        *self.census.counts.entry(fam).or_default() += 1;
    }

    fn soft(&mut self, fam: Family, clause: Vec<Lit>) {
        self.formula.add_soft(clause);
        *self.census.counts.entry(fam).or_default() += 1;
    }
}

fn check_common(d: &Dataset, k: usize, dc: &DistanceClassing, po: &PruningOutcome, opts: &EncodeOptions) -> Result<()> {
    if po.infeasible {
        return Err(Error::InfeasibleConstraints);
    }
    if k < 2 {
        return Err(Error::Config(format!("k = {k}; at least two clusters are required")));
    }
    if d.n_points() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            actual: d.n_points(),
        });
    }
    if dc.is_empty() {
        return Err(Error::EmptyClassing);
    }
    if let Some(m) = opts.min_clusters {
        if m == 0 || m > k {
            return Err(Error::Config(format!("min_clusters = {m} outside 1..={k}")));
        }
    }
    Ok(())
}

/// Tree-mode encoding.
pub fn encode_tree(
    d: &Dataset,
    shape: &TreeShape,
    k: usize,
    dc: &DistanceClassing,
    po: &PruningOutcome,
    objective: Objective,
) -> Result<Encoded> {
    encode_tree_with(d, shape, k, dc, po, objective, &EncodeOptions::default())
}

pub fn encode_tree_with(
    d: &Dataset,
    shape: &TreeShape,
    k: usize,
    dc: &DistanceClassing,
    po: &PruningOutcome,
    objective: Objective,
    opts: &EncodeOptions,
) -> Result<Encoded> {
    if shape.n_leaves() < k {
        return Err(Error::ShapeTooShallow {
            depth: shape.depth(),
            leaves: shape.n_leaves(),
            k,
        });
    }
    check_common(d, k, dc, po, opts)?;
    let layout = VariableLayout::new(
        d.n_points(),
        d.n_features(),
        Mode::Tree { depth: shape.depth() },
        k,
        dc.len(),
        objective,
    );
    let mut e = Emitter {
        formula: WcnfFormula::new(layout.n_vars()),
        census: Census::default(),
    };
    let l = &layout;
    let n = d.n_points();
    let nf = d.n_features();
    let orders = FeatureOrders::new(d);

    for t in shape.branches() {
        for j in 0..nf {
            for j2 in j + 1..nf {
                e.hard(Family::F1, vec![-l.a(t, j), -l.a(t, j2)]);
            }
        }
    }
    for t in shape.branches() {
        e.hard(Family::F2, (0..nf).map(|j| l.a(t, j)).collect());
    }
    for t in shape.branches() {
        for j in 0..nf {
            for (i, i2) in orders.consecutive(j) {
                e.hard(Family::F3, vec![-l.a(t, j), l.s(i, t), -l.s(i2, t)]);
            }
        }
    }
    for t in shape.branches() {
        for j in 0..nf {
            for (i, i2) in orders.consecutive(j) {
                if d.value(i, j) == d.value(i2, j) {
                    e.hard(Family::F4, vec![-l.a(t, j), -l.s(i, t), l.s(i2, t)]);
                }
            }
        }
    }
    for t in shape.leaves() {
        let anc = shape.left_ancestors(t);
        for i in 0..n {
            for &ta in &anc {
                e.hard(Family::F5, vec![-l.z(i, t), l.s(i, ta)]);
            }
        }
    }
    for t in shape.leaves() {
        let anc = shape.right_ancestors(t);
        for i in 0..n {
            for &ta in &anc {
                e.hard(Family::F6, vec![-l.z(i, t), -l.s(i, ta)]);
            }
        }
    }
    for t in shape.leaves() {
        let (al, ar) = (shape.left_ancestors(t), shape.right_ancestors(t));
        for i in 0..n {
            let mut c = vec![l.z(i, t)];
            c.extend(al.iter().map(|&ta| -l.s(i, ta)));
            c.extend(ar.iter().map(|&ta| l.s(i, ta)));
            e.hard(Family::F7, c);
        }
    }
    for t in shape.branches() {
        for j in 0..nf {
            e.hard(Family::F8, vec![-l.a(t, j), l.s(orders.first(j), t)]);
        }
    }
    for t in shape.branches() {
        for j in 0..nf {
            e.hard(Family::F9, vec![-l.a(t, j), -l.s(orders.last(j), t)]);
        }
    }
    for t in shape.leaves() {
        for c in 1..k.saturating_sub(1) {
            e.hard(Family::F10, vec![l.g(t, c), -l.g(t, c + 1)]);
        }
    }
    for t in shape.leaves() {
        for i in 0..n {
            for c in 1..k {
                e.hard(Family::F11, vec![-l.z(i, t), -l.g(t, c), l.x(i, c)]);
            }
        }
    }
    for t in shape.leaves() {
        for i in 0..n {
            for c in 1..k {
                e.hard(Family::F12, vec![-l.z(i, t), l.g(t, c), -l.x(i, c)]);
            }
        }
    }
    emit_label_families(&mut e, l, n, k, dc, po, objective, opts);
    Ok(Encoded {
        formula: e.formula,
        layout,
        census: e.census,
    })
}

/// Constrained-clustering baseline: labels only, no tree.
pub fn encode_cc(
    d: &Dataset,
    k: usize,
    dc: &DistanceClassing,
    po: &PruningOutcome,
    objective: Objective,
) -> Result<Encoded> {
    encode_cc_with(d, k, dc, po, objective, &EncodeOptions::default())
}

pub fn encode_cc_with(
    d: &Dataset,
    k: usize,
    dc: &DistanceClassing,
    po: &PruningOutcome,
    objective: Objective,
    opts: &EncodeOptions,
) -> Result<Encoded> {
    check_common(d, k, dc, po, opts)?;
    let layout = VariableLayout::new(d.n_points(), d.n_features(), Mode::Cc, k, dc.len(), objective);
    let mut e = Emitter {
        formula: WcnfFormula::new(layout.n_vars()),
        census: Census::default(),
    };
    let l = &layout;
    for i in 0..d.n_points() {
        for c in 1..k.saturating_sub(1) {
            e.hard(Family::F10b, vec![l.x(i, c), -l.x(i, c + 1)]);
        }
    }
    emit_label_families(&mut e, l, d.n_points(), k, dc, po, objective, opts);
    Ok(Encoded {
        formula: e.formula,
        layout,
        census: e.census,
    })
}

/// Families 13 onwards, shared by both modes.
#[allow(clippy::too_many_arguments)]
fn emit_label_families(
    e: &mut Emitter,
    l: &VariableLayout,
    n: usize,
    k: usize,
    dc: &DistanceClassing,
    po: &PruningOutcome,
    objective: Objective,
    opts: &EncodeOptions,
) {
    let with_plus = objective == Objective::MdMs;

    // symmetry breaking over one-based point numbers: point `p` is index p-1
    for c in 1..k {
        e.hard(Family::F13, vec![-l.x(c - 1, c)]);
    }
    for c in 2..k {
        for p in (c + 1)..=n {
            let mut clause = vec![-l.x(p - 1, c)];
            clause.extend((1..p).map(|q| l.x(q - 1, c - 1)));
            e.hard(Family::F14, clause);
        }
    }
    let used = opts.min_clusters.unwrap_or(k);
    if used >= 2 {
        e.hard(Family::F15, (0..n).map(|i| l.x(i, used - 1)).collect());
    }

    for &(i, j) in &po.emit_cl {
        e.hard(Family::F16, vec![l.x(i, 1), l.x(j, 1)]);
    }
    for &(i, j) in &po.emit_cl {
        e.hard(Family::F17, vec![-l.x(i, k - 1), -l.x(j, k - 1)]);
    }
    for &(i, j) in &po.emit_cl {
        for c in 1..k - 1 {
            e.hard(Family::F18, vec![-l.x(i, c), -l.x(j, c), l.x(i, c + 1), l.x(j, c + 1)]);
        }
    }
    for &(i, j) in &po.emit_ml {
        for c in 1..k {
            e.hard(Family::F19, vec![-l.x(i, c), l.x(j, c)]);
        }
    }
    for &(i, j) in &po.emit_ml {
        for c in 1..k {
            e.hard(Family::F20, vec![l.x(i, c), -l.x(j, c)]);
        }
    }

    for p in &po.emit_cond_minus {
        e.hard(Family::F21, vec![l.bminus(p.class), l.x(p.i, 1), l.x(p.j, 1)]);
    }
    for p in &po.emit_cond_minus {
        e.hard(Family::F22, vec![l.bminus(p.class), -l.x(p.i, k - 1), -l.x(p.j, k - 1)]);
    }
    for p in &po.emit_cond_minus {
        for c in 1..k - 1 {
            e.hard(
                Family::F23,
                vec![
                    l.bminus(p.class),
                    -l.x(p.i, c),
                    -l.x(p.j, c),
                    l.x(p.i, c + 1),
                    l.x(p.j, c + 1),
                ],
            );
        }
    }
    if with_plus {
        for p in &po.emit_cond_plus {
            for c in 1..k {
                e.hard(Family::F24, vec![-l.bplus(p.class), -l.x(p.i, c), l.x(p.j, c)]);
            }
        }
        for p in &po.emit_cond_plus {
            for c in 1..k {
                e.hard(Family::F25, vec![-l.bplus(p.class), l.x(p.i, c), -l.x(p.j, c)]);
            }
        }
    }

    let mu = dc.len();
    for w in 1..mu {
        e.hard(Family::F26, vec![-l.bminus(w), l.bminus(w - 1)]);
    }
    if with_plus {
        for w in 1..mu {
            e.hard(Family::F27, vec![-l.bplus(w), l.bplus(w - 1)]);
        }
        for w in 0..mu {
            e.hard(Family::F28, vec![-l.bplus(w), l.bminus(w)]);
        }
    }

    for unit in &po.fixed_units {
        match *unit {
            FixedUnit::BMinus(w) => e.hard(Family::FixedUnits, vec![l.bminus(w)]),
            FixedUnit::NotBPlus(w) if with_plus => e.hard(Family::FixedUnits, vec![-l.bplus(w)]),
            FixedUnit::NotBPlus(_) => {}
        }
    }

    for w in 0..mu {
        e.soft(Family::Soft29, vec![-l.bminus(w)]);
    }
    if with_plus {
        for w in 0..mu {
            e.soft(Family::Soft30, vec![l.bplus(w)]);
        }
    }
}
