//! Reading a clustering back out of a MaxSAT model, and checking it.
//!
//! [`decode`] turns variable values into a tree, per-point labels and the
//! class prefixes. [`verify`] re-derives every property from the raw data
//! and the constraint set alone, without touching the encoder.

use serde::Serialize;
use serde_json::json;

use crate::data::{ConstraintSet, Dataset};
use crate::encoding::{Symbol, TreeShape, VariableLayout};
use crate::error::{Error, Result};
use crate::pairs::DistanceClassing;
use crate::solver::Status;

/// A complete binary decision tree, heap-indexed like [`TreeShape`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionTree {
    pub depth: u32,
    /// Split feature of branch node `t` at index `t - 1`.
    pub features: Vec<usize>,
    /// Threshold of branch node `t` at index `t - 1`, in normalized units.
    pub thresholds: Vec<f64>,
    /// Cluster label of leaf `t` at index `t - 2^depth`.
    pub leaf_labels: Vec<u32>,
}

impl DecisionTree {
    pub fn n_branches(&self) -> usize {
        self.features.len()
    }

    /// Heap index of the leaf `point` falls into. Points go left when their
    /// value is less than or equal to the threshold.
    pub fn leaf(&self, point: &[f64]) -> usize {
        let mut t = 1;
        while t <= self.n_branches() {
            t = if point[self.features[t - 1]] <= self.thresholds[t - 1] {
                2 * t
            } else {
                2 * t + 1
            };
        }
        t
    }

    pub fn predict(&self, point: &[f64]) -> u32 {
        self.leaf_labels[self.leaf(point) - self.n_branches() - 1]
    }

    /// Nested JSON. Thresholds are in the dataset's (normalized) units;
    /// the original ranges are listed so they can be mapped back.
    pub fn to_json(&self, d: &Dataset) -> serde_json::Value {
        fn node(tree: &DecisionTree, d: &Dataset, t: usize) -> serde_json::Value {
            if t > tree.n_branches() {
                return json!({ "leaf": t, "label": tree.leaf_labels[t - tree.n_branches() - 1] });
            }
            let j = tree.features[t - 1];
            json!({
                "node": t,
                "feature": j,
                "feature_name": d.feature_name(j),
                "threshold": tree.thresholds[t - 1],
                "left": node(tree, d, 2 * t),
                "right": node(tree, d, 2 * t + 1),
            })
        }
        let normalization = d.feature_ranges().map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, &(lo, hi))| json!({ "feature": d.feature_name(j), "min": lo, "max": hi, "scale": 100.0 }))
                .collect::<Vec<_>>()
        });
        json!({
            "depth": self.depth,
            "normalization": normalization,
            "root": node(self, d, 1),
        })
    }

    /// Indented text, one line per node.
    pub fn render(&self, d: &Dataset) -> String {
        fn go(tree: &DecisionTree, d: &Dataset, t: usize, indent: usize, out: &mut String) {
            let pad = "  ".repeat(indent);
            if t > tree.n_branches() {
                out.push_str(&format!(
                    "{pad}cluster {}\n",
                    tree.leaf_labels[t - tree.n_branches() - 1]
                ));
                return;
            }
            let name = d.feature_name(tree.features[t - 1]);
            let a = tree.thresholds[t - 1];
            out.push_str(&format!("{pad}if {name} <= {a:.4}\n"));
            go(tree, d, 2 * t, indent + 1, out);
            out.push_str(&format!("{pad}else  # {name} > {a:.4}\n"));
            go(tree, d, 2 * t + 1, indent + 1, out);
        }
        let mut out = String::new();
        go(self, d, 1, 0, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringSolution {
    /// Absent in CC mode.
    pub tree: Option<DecisionTree>,
    /// Leaf each point was assigned to by the model (tree mode).
    pub leaves: Option<Vec<usize>>,
    /// Cluster of each point, `1..=k`.
    pub labels: Vec<u32>,
    pub k: usize,
    /// Clusters that must be non-empty (`k` unless relaxed).
    pub required_clusters: usize,
    /// Number of leading classes forced together (one-based class index).
    pub lambda_plus: usize,
    /// Number of leading classes allowed together (one-based class index).
    pub lambda_minus: usize,
    /// Smallest distance between points in different clusters; infinite if
    /// there is no such pair.
    pub ms: f64,
    /// Largest distance between points in the same cluster; 0 if there is
    /// no such pair.
    pub md: f64,
    pub status: Status,
}

/// Maximum diameter and minimum split of a labelling.
pub fn md_ms(d: &Dataset, labels: &[u32]) -> (f64, f64) {
    let (mut md, mut ms) = (0.0f64, f64::INFINITY);
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let dist = d.distance(i, j);
            if labels[i] == labels[j] {
                md = md.max(dist);
            } else {
                ms = ms.min(dist);
            }
        }
    }
    (md, ms)
}

fn var(model: &[bool], v: i32) -> bool {
    model[v as usize - 1]
}

/// Decodes `model` under `layout`. `status` is copied into the solution.
pub fn decode(
    model: &[bool],
    layout: &VariableLayout,
    d: &Dataset,
    dc: &DistanceClassing,
    status: Status,
) -> Result<ClusteringSolution> {
    let corrupt = |msg: String| Err(Error::CorruptModel(msg));
    if model.len() < layout.n_vars() as usize {
        return corrupt(format!(
            "model has {} values, layout needs {}",
            model.len(),
            layout.n_vars()
        ));
    }
    if layout.n_points() != d.n_points() || layout.mu() != dc.len() {
        return corrupt("layout does not match dataset or classing".into());
    }
    let (n, k) = (layout.n_points(), layout.k());

    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let bits: Vec<bool> = (1..k).map(|c| var(model, layout.x(i, c))).collect();
        if bits.windows(2).any(|w| !w[0] && w[1]) {
            return corrupt(format!("point {i} has a non-unary label {bits:?}"));
        }
        labels.push(1 + bits.iter().filter(|&&b| b).count() as u32);
    }

    let prefix = |vars: Vec<bool>, name: &str| -> Result<usize> {
        let count = vars.iter().take_while(|&&b| b).count();
        if vars[count..].iter().any(|&b| b) {
            return Err(Error::CorruptModel(format!("{name} is not a prefix: {vars:?}")));
        }
        Ok(count)
    };
    let mu = layout.mu();
    let lambda_minus = prefix((0..mu).map(|w| var(model, layout.bminus(w))).collect(), "b-")?;
    let lambda_plus = match layout.objective() {
        crate::encoding::Objective::MdMs => prefix((0..mu).map(|w| var(model, layout.bplus(w))).collect(), "b+")?,
        crate::encoding::Objective::Md => 0,
    };

    let (tree, leaves) = match layout.depth() {
        None => (None, None),
        Some(depth) => {
            let (tree, leaves) = decode_tree(model, layout, d, depth)?;
            (Some(tree), Some(leaves))
        }
    };

    let (md, ms) = md_ms(d, &labels);
    Ok(ClusteringSolution {
        tree,
        leaves,
        labels,
        k,
        required_clusters: k,
        lambda_plus,
        lambda_minus,
        ms,
        md,
        status,
    })
}

fn decode_tree(model: &[bool], layout: &VariableLayout, d: &Dataset, depth: u32) -> Result<(DecisionTree, Vec<usize>)> {
    let shape = TreeShape::new(depth)?;
    let (n, k, nf) = (layout.n_points(), layout.k(), layout.n_features());
    let mut features = Vec::new();
    let mut thresholds = Vec::new();
    for t in shape.branches() {
        let chosen: Vec<usize> = (0..nf).filter(|&j| var(model, layout.a(t, j))).collect();
        let [j] = chosen[..] else {
            return Err(Error::CorruptModel(format!("node {t} selects features {chosen:?}")));
        };
        let (mut left_max, mut right_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let v = d.value(i, j);
            if var(model, layout.s(i, t)) {
                left_max = left_max.max(v);
            } else {
                right_min = right_min.min(v);
            }
        }
        if !(left_max < right_min) || !left_max.is_finite() || !right_min.is_finite() {
            return Err(Error::CorruptModel(format!(
                "node {t} on feature {j} does not split the data (left max {left_max}, right min {right_min})"
            )));
        }
        features.push(j);
        thresholds.push((left_max + right_min) / 2.0);
    }
    let leaf_labels = shape
        .leaves()
        .map(|t| 1 + (1..k).filter(|&c| var(model, layout.g(t, c))).count() as u32)
        .collect();
    let mut leaves = Vec::with_capacity(n);
    for i in 0..n {
        let hit: Vec<usize> = shape.leaves().filter(|&t| var(model, layout.z(i, t))).collect();
        let [t] = hit[..] else {
            return Err(Error::CorruptModel(format!("point {i} lands in leaves {hit:?}")));
        };
        leaves.push(t);
    }
    Ok((
        DecisionTree {
            depth,
            features,
            thresholds,
            leaf_labels,
        },
        leaves,
    ))
}

/// Whether the `b-`/`b+` blocks of a raw model are prefixes with
/// `b+[w] => b-[w]`.
pub fn lambda_structure_holds(model: &[bool], layout: &VariableLayout) -> bool {
    let mu = layout.mu();
    let is_prefix = |v: &[bool]| v.windows(2).all(|w| w[0] || !w[1]);
    let bm: Vec<bool> = (0..mu).map(|w| var(model, layout.bminus(w))).collect();
    if !is_prefix(&bm) {
        return false;
    }
    if layout.objective() == crate::encoding::Objective::Md {
        return true;
    }
    let bp: Vec<bool> = (0..mu).map(|w| var(model, layout.bplus(w))).collect();
    is_prefix(&bp) && bp.iter().zip(&bm).all(|(&p, &m)| !p || m)
}

/// Symbols set to true in `model`, for debugging output.
pub fn true_symbols(model: &[bool], layout: &VariableLayout) -> Vec<Symbol> {
    (1..=layout.n_vars())
        .filter(|&v| model[v as usize - 1])
        .filter_map(|v| layout.symbol(v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, failure: Option<String>) {
        self.checks.push(Check {
            name,
            passed: failure.is_none(),
            detail: failure.unwrap_or_default(),
        });
    }

    /// `Ok` if every check passed, otherwise a verification error naming the
    /// failures.
    pub fn into_result(self) -> Result<()> {
        if self.all_passed() {
            return Ok(());
        }
        let msg: Vec<String> = self
            .failures()
            .iter()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        Err(Error::VerificationFailed(msg.join("; ")))
    }
}

const TOL: f64 = 1e-9;

/// Re-checks a solution against the raw data.
pub fn verify(sol: &ClusteringSolution, d: &Dataset, cs: &ConstraintSet, dc: &DistanceClassing) -> VerificationReport {
    let mut r = VerificationReport::default();
    let n = d.n_points();
    let labels = &sol.labels;

    r.push(
        "label_count",
        (labels.len() != n).then(|| format!("{} labels for {n} points", labels.len())),
    );
    if labels.len() != n {
        return r;
    }

    let bad = labels.iter().position(|&l| l < 1 || l as usize > sol.k);
    r.push(
        "labels_in_range",
        bad.map(|i| format!("point {i} has label {} outside 1..={}", labels[i], sol.k)),
    );

    let mut used = vec![false; sol.k + 1];
    for &l in labels {
        if (l as usize) <= sol.k {
            used[l as usize] = true;
        }
    }
    let empty: Vec<usize> = (1..=sol.required_clusters.min(sol.k)).filter(|&c| !used[c]).collect();
    r.push(
        "clusters_non_empty",
        (!empty.is_empty()).then(|| format!("empty clusters {empty:?}")),
    );

    let broken: Vec<_> = cs.ml().iter().filter(|&&(i, j)| labels[i] != labels[j]).collect();
    r.push(
        "must_link",
        (!broken.is_empty()).then(|| format!("split must-link pairs {broken:?}")),
    );
    let broken: Vec<_> = cs.cl().iter().filter(|&&(i, j)| labels[i] == labels[j]).collect();
    r.push(
        "cannot_link",
        (!broken.is_empty()).then(|| format!("merged cannot-link pairs {broken:?}")),
    );

    let mut md = 0.0f64;
    let mut ms = f64::INFINITY;
    for i in 0..n {
        let p = d.point(i);
        for j in i + 1..n {
            let q = d.point(j);
            let dist = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if labels[i] == labels[j] {
                md = md.max(dist);
            } else {
                ms = ms.min(dist);
            }
        }
    }
    let close = |a: f64, b: f64| a == b || (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()));
    r.push(
        "md_recomputed",
        (!close(md, sol.md)).then(|| format!("reported md {} but data gives {md}", sol.md)),
    );
    r.push(
        "ms_recomputed",
        (!close(ms, sol.ms)).then(|| format!("reported ms {} but data gives {ms}", sol.ms)),
    );

    let mu = dc.len();
    let md_bound = if sol.lambda_minus > mu {
        Some(format!("lambda- = {} exceeds {mu} classes", sol.lambda_minus))
    } else if sol.lambda_minus == 0 {
        (md > 0.0 || has_co_clustered(labels)).then(|| "lambda- = 0 but some pair shares a cluster".to_string())
    } else {
        let bound = dc.class_max(sol.lambda_minus - 1);
        (md > bound + TOL).then(|| format!("md {md} above class {} max {bound}", sol.lambda_minus))
    };
    r.push("md_class_bound", md_bound);

    let ms_bound = if sol.lambda_plus > mu {
        Some(format!("lambda+ = {} exceeds {mu} classes", sol.lambda_plus))
    } else if sol.lambda_plus > sol.lambda_minus {
        Some(format!(
            "lambda+ = {} above lambda- = {}",
            sol.lambda_plus, sol.lambda_minus
        ))
    } else if sol.lambda_plus == mu {
        ms.is_finite()
            .then(|| "every class forced together but clusters are separated".to_string())
    } else {
        let bound = dc.class_min(sol.lambda_plus);
        (ms < bound - TOL).then(|| format!("ms {ms} below class {} min {bound}", sol.lambda_plus + 1))
    };
    r.push("ms_class_bound", ms_bound);

    let mut next = 1;
    let mut canon = None;
    for (i, &l) in labels.iter().enumerate() {
        if l > next {
            canon = Some(format!("label {l} first appears at point {i} before label {next}"));
            break;
        }
        if l == next {
            next += 1;
        }
    }
    r.push("canonical_order", canon);

    if let Some(tree) = &sol.tree {
        let mut replay = None;
        for i in 0..n {
            let leaf = tree.leaf(d.point(i));
            let label = tree.predict(d.point(i));
            if let Some(leaves) = &sol.leaves {
                if leaves[i] != leaf {
                    replay = Some(format!("point {i} reaches leaf {leaf}, model says {}", leaves[i]));
                    break;
                }
            }
            if label != labels[i] {
                replay = Some(format!("point {i}: tree gives {label}, labels say {}", labels[i]));
                break;
            }
        }
        r.push("tree_replay", replay);

        let mut split = None;
        for (t, (&j, &a)) in tree.features.iter().zip(&tree.thresholds).enumerate() {
            let below = (0..n).any(|i| d.value(i, j) <= a);
            let above = (0..n).any(|i| d.value(i, j) > a);
            if !(below && above) {
                split = Some(format!("node {} threshold {a} does not split feature {j}", t + 1));
                break;
            }
        }
        r.push("tree_thresholds_split", split);
    }
    r
}

fn has_co_clustered(labels: &[u32]) -> bool {
    let mut seen = std::collections::HashSet::new();
    labels.iter().any(|l| !seen.insert(*l))
}
