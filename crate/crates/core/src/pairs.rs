//! Distance classes and the Smart Pairs pruning pass.
//!
//! Pairs are swept in `<*` order and grouped greedily into classes whose
//! distance span stays below `epsilon`. Smart Pairs then walks the
//! must-link / cannot-link pairs and the whole pair population, tracking
//! connected components of forced co-clustering (`E+`) and mutual
//! exclusions between components (`E-`), to decide which pair clauses are
//! redundant, which `b` variables can be fixed, and whether the constraints
//! are already contradictory.

use std::collections::HashSet;
use std::ops::Range;

use crate::data::{ConstraintSet, PairTable};

/// Ordered partition of the pair table into distance classes.
#[derive(Debug, Clone)]
pub struct DistanceClassing {
    epsilon: f64,
    classes: Vec<Range<usize>>,
    class_min: Vec<f64>,
    class_max: Vec<f64>,
    class_of: Vec<u32>,
}

impl DistanceClassing {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of classes, `mu`.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Pair-table positions held by class `w` (zero-based).
    pub fn class(&self, w: usize) -> Range<usize> {
        self.classes[w].clone()
    }

    pub fn class_min(&self, w: usize) -> f64 {
        self.class_min[w]
    }

    pub fn class_max(&self, w: usize) -> f64 {
        self.class_max[w]
    }

    /// Class index of the pair at sorted position `pos`.
    pub fn class_of(&self, pos: usize) -> usize {
        self.class_of[pos] as usize
    }
}

/// Greedy sweep over the sorted pairs. A new class opens when the next
/// distance is at least `epsilon` above the current class minimum. With
/// `epsilon == 0` a class holds exactly one distinct distance value;
/// `epsilon == inf` yields a single class.
pub fn build_distance_classes(pt: &PairTable, epsilon: f64) -> DistanceClassing {
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    let mut classes = Vec::new();
    let mut class_min = Vec::new();
    let mut class_max = Vec::new();
    let mut class_of = Vec::with_capacity(pt.len());
    let mut start = 0;
    for pos in 0..pt.len() {
        let d = pt.dist(pos);
        let opens = match class_min.last() {
            None => true,
            Some(&lo) if epsilon == 0.0 => d != lo,
            Some(&lo) => d - lo >= epsilon,
        };
        if opens {
            if pos > 0 {
                classes.push(start..pos);
                class_max.push(pt.dist(pos - 1));
            }
            start = pos;
            class_min.push(d);
        }
        class_of.push(class_min.len() as u32 - 1);
    }
    if !pt.is_empty() {
        classes.push(start..pt.len());
        class_max.push(pt.dist(pt.len() - 1));
    }
    DistanceClassing {
        epsilon,
        classes,
        class_min,
        class_max,
        class_of,
    }
}

/// Union-find over points (`E+`) with per-root exclusion sets (`E-`).
#[derive(Debug, Clone)]
pub struct ComponentState {
    parent: Vec<u32>,
    size: Vec<u32>,
    excl: Vec<HashSet<u32>>,
}

impl ComponentState {
    pub fn new(n: usize) -> Self {
        ComponentState {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            excl: vec![HashSet::new(); n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Both endpoints already sit in one `E+` component.
    pub fn is_inner(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// The endpoints sit in two components that `E-` marks as exclusive.
    pub fn is_crossing(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        ra != rb && self.excl[ra].contains(&(rb as u32))
    }

    /// Adds a positive edge, merging components and their exclusion sets.
    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        // rb is absorbed into ra
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        let moved = std::mem::take(&mut self.excl[rb]);
        for other in moved {
            let o = other as usize;
            self.excl[o].remove(&(rb as u32));
            self.excl[o].insert(ra as u32);
            self.excl[ra].insert(other);
        }
        debug_assert!(!self.excl[ra].contains(&(ra as u32)));
    }

    /// Adds a negative edge between the components of `a` and `b`.
    pub fn exclude(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        debug_assert_ne!(ra, rb, "excluding a component from itself");
        self.excl[ra].insert(rb as u32);
        self.excl[rb].insert(ra as u32);
    }

    /// Component id of every point (the root), for comparing partitions.
    pub fn components(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|i| self.find(i)).collect()
    }

    /// Checks that exclusions are symmetric, reference roots only, and
    /// never contain their owner.
    pub fn is_consistent(&mut self) -> bool {
        let n = self.parent.len();
        for r in 0..n {
            if self.excl[r].is_empty() {
                continue;
            }
            if self.find(r) != r {
                return false;
            }
            for &o in &self.excl[r] {
                let o = o as usize;
                if o == r || self.parent[o] as usize != o || !self.excl[o].contains(&(r as u32)) {
                    return false;
                }
            }
        }
        true
    }
}

/// A pair tied to the class whose `b` variable guards its clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CondPair {
    pub i: usize,
    pub j: usize,
    pub class: usize,
}

/// Unit clause over a class variable fixed by the pruning pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedUnit {
    /// `not b+[w]`: class `w` cannot be forced together.
    NotBPlus(usize),
    /// `b-[w]`: class `w` cannot be forced apart.
    BMinus(usize),
}

#[derive(Debug, Clone, Default)]
pub struct PruningOutcome {
    pub emit_ml: Vec<(usize, usize)>,
    pub emit_cl: Vec<(usize, usize)>,
    pub emit_cond_plus: Vec<CondPair>,
    pub emit_cond_minus: Vec<CondPair>,
    pub fixed_units: Vec<FixedUnit>,
    pub infeasible: bool,
}

/// Per-phase component snapshots, kept for invariant checks.
#[derive(Debug, Clone)]
pub struct PruningTrace {
    /// `E+` partition after the must-link phase.
    pub after_ml: Vec<usize>,
    /// `E+` partition at the start of the conditional separating phase.
    pub before_minus: Vec<usize>,
}

fn sorted_positions(pt: &PairTable, pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut pos: Vec<usize> = pairs.iter().map(|&(i, j)| pt.position(i, j)).collect();
    pos.sort_unstable();
    pos
}

/// Runs Smart Pairs and returns which clauses survive.
///
/// `_k` is accepted for interface symmetry with [`bypass_pairs`]; pruning
/// does not depend on the number of clusters.
pub fn smart_pairs(pt: &PairTable, dc: &DistanceClassing, cs: &ConstraintSet, _k: usize) -> PruningOutcome {
    smart_pairs_traced(pt, dc, cs).0
}

pub fn smart_pairs_traced(pt: &PairTable, dc: &DistanceClassing, cs: &ConstraintSet) -> (PruningOutcome, PruningTrace) {
    let n = pt.n_points();
    let mut out = PruningOutcome::default();
    let mut state = ComponentState::new(n);

    // must-links, ascending
    for pos in sorted_positions(pt, cs.ml()) {
        let (i, j) = pt.pair(pos);
        if !state.is_inner(i, j) {
            state.union(i, j);
            out.emit_ml.push((i, j));
        }
    }
    let after_ml = state.components();

    // cannot-links, descending
    for pos in sorted_positions(pt, cs.cl()).into_iter().rev() {
        let (i, j) = pt.pair(pos);
        if state.is_inner(i, j) {
            out.infeasible = true;
            let trace = PruningTrace {
                before_minus: after_ml.clone(),
                after_ml,
            };
            return (out, trace);
        }
        if !state.is_crossing(i, j) {
            state.exclude(i, j);
            out.emit_cl.push((i, j));
        }
    }
    let snapshot = state.clone();

    // conditional co-clustering, ascending
    for pos in 0..pt.len() {
        let (i, j) = pt.pair(pos);
        let w = dc.class_of(pos);
        if state.is_crossing(i, j) {
            out.fixed_units.push(FixedUnit::NotBPlus(w));
            break;
        }
        if !state.is_inner(i, j) {
            state.union(i, j);
            out.emit_cond_plus.push(CondPair { i, j, class: w });
        }
    }

    // implied co-clustered pairs do not carry over
    let mut state = snapshot;
    let before_minus = state.components();

    // conditional separation, descending
    for pos in (0..pt.len()).rev() {
        let (i, j) = pt.pair(pos);
        let w = dc.class_of(pos);
        if state.is_inner(i, j) {
            out.fixed_units.push(FixedUnit::BMinus(w));
            break;
        }
        if !state.is_crossing(i, j) {
            state.exclude(i, j);
            out.emit_cond_minus.push(CondPair { i, j, class: w });
        }
    }

    (out, PruningTrace { after_ml, before_minus })
}

/// The unpruned encoding: every constraint and every pair is emitted and
/// nothing is fixed.
pub fn bypass_pairs(pt: &PairTable, dc: &DistanceClassing, cs: &ConstraintSet, _k: usize) -> PruningOutcome {
    let all: Vec<CondPair> = pt
        .iter()
        .enumerate()
        .map(|(pos, ((i, j), _))| CondPair {
            i,
            j,
            class: dc.class_of(pos),
        })
        .collect();
    PruningOutcome {
        emit_ml: sorted_positions(pt, cs.ml()).into_iter().map(|p| pt.pair(p)).collect(),
        emit_cl: sorted_positions(pt, cs.cl())
            .into_iter()
            .rev()
            .map(|p| pt.pair(p))
            .collect(),
        emit_cond_plus: all.clone(),
        emit_cond_minus: all.into_iter().rev().collect(),
        fixed_units: Vec::new(),
        infeasible: false,
    }
}
