//! Exhaustive reference solvers and external quality metrics.
//!
//! Nothing here touches the encoder, the pruning pass or the decoder; the
//! oracles work straight from point coordinates and the constraint set.

use std::collections::HashSet;

use serde::Serialize;

use crate::data::{ConstraintSet, Dataset};
use crate::error::{Error, Result};

pub const CC_MAX_POINTS: usize = 12;
pub const CC_MAX_K: usize = 4;
pub const TREE_MAX_POINTS: usize = 10;
pub const TREE_MAX_FEATURES: usize = 2;
pub const TREE_MAX_DEPTH: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoPoint {
    pub md: f64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// `None` when no labelling is feasible.
    pub min_md: Option<f64>,
    /// Non-dominated `(md, ms)` pairs (minimize md, maximize ms), by
    /// ascending md.
    pub pareto: Vec<ParetoPoint>,
    /// Every feasible labelling attaining `min_md`, in first-occurrence
    /// canonical form.
    pub optimal_labelings: Vec<Vec<u32>>,
    /// Number of distinct feasible canonical labellings.
    pub n_feasible: usize,
}

impl OracleResult {
    pub fn is_feasible(&self) -> bool {
        self.min_md.is_some()
    }

    /// Whether `(md, ms)` is within `eps` of some front point in both
    /// coordinates (up to rounding).
    pub fn near_front(&self, md: f64, ms: f64, eps: f64) -> bool {
        let slack = 1e-9;
        self.pareto
            .iter()
            .any(|p| md <= p.md + eps + slack && ms >= p.ms - eps - slack)
    }
}

fn distance_matrix(d: &Dataset) -> Vec<Vec<f64>> {
    let n = d.n_points();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    d.point(i)
                        .iter()
                        .zip(d.point(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect()
}

/// Relabels so labels appear as 1, 2, 3, ... in point order.
pub fn canonicalize(labels: &[u32]) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len() as u32 + 1;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

#[derive(Default)]
struct Collector {
    entries: Vec<(Vec<u32>, f64, f64)>,
}

impl Collector {
    fn finish(self) -> OracleResult {
        let min_md = self.entries.iter().map(|e| e.1).min_by(f64::total_cmp);
        let optimal_labelings = match min_md {
            Some(m) => self.entries.iter().filter(|e| e.1 == m).map(|e| e.0.clone()).collect(),
            None => Vec::new(),
        };
        let mut pts: Vec<ParetoPoint> = self.entries.iter().map(|e| ParetoPoint { md: e.1, ms: e.2 }).collect();
        pts.sort_by(|a, b| a.md.total_cmp(&b.md).then(b.ms.total_cmp(&a.ms)));
        let mut pareto: Vec<ParetoPoint> = Vec::new();
        for p in pts {
            if pareto.last().is_none_or(|q| p.ms > q.ms) {
                pareto.push(p);
            }
        }
        OracleResult {
            min_md,
            pareto,
            optimal_labelings,
            n_feasible: self.entries.len(),
        }
    }
}

fn md_ms(dist: &[Vec<f64>], labels: &[u32]) -> (f64, f64) {
    let (mut md, mut ms) = (0.0f64, f64::INFINITY);
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            if labels[i] == labels[j] {
                md = md.max(dist[i][j]);
            } else {
                ms = ms.min(dist[i][j]);
            }
        }
    }
    (md, ms)
}

fn respects(labels: &[u32], cs: &ConstraintSet) -> bool {
    cs.ml().iter().all(|&(i, j)| labels[i] == labels[j]) && cs.cl().iter().all(|&(i, j)| labels[i] != labels[j])
}

/// Exact optimum over all partitions of the points into exactly `k`
/// non-empty clusters that respect `cs`.
pub fn cc_oracle(d: &Dataset, k: usize, cs: &ConstraintSet) -> Result<OracleResult> {
    let n = d.n_points();
    if n > CC_MAX_POINTS || k > CC_MAX_K {
        return Err(Error::InstanceTooLarge(format!(
            "{n} points, k = {k} (limits {CC_MAX_POINTS} points, k <= {CC_MAX_K})"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("k = {k} with {n} points")));
    }
    let dist = distance_matrix(d);
    let mut ml_partners = vec![Vec::new(); n];
    let mut cl_partners = vec![Vec::new(); n];
    for &(i, j) in cs.ml() {
        ml_partners[j].push(i);
    }
    for &(i, j) in cs.cl() {
        cl_partners[j].push(i);
    }
    let mut out = Collector::default();
    let mut labels = vec![0u32; n];

    // restricted growth strings, checking constraints against earlier points
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        used: u32,
        k: u32,
        labels: &mut Vec<u32>,
        dist: &[Vec<f64>],
        ml: &[Vec<usize>],
        cl: &[Vec<usize>],
        out: &mut Collector,
    ) {
        let n = labels.len();
        if i == n {
            if used == k {
                let (md, ms) = md_ms(dist, labels);
                out.entries.push((labels.clone(), md, ms));
            }
            return;
        }
        // not enough points left to open the remaining clusters
        if (k - used) as usize > n - i {
            return;
        }
        for l in 1..=(used + 1).min(k) {
            if ml[i].iter().any(|&p| labels[p] != l) || cl[i].iter().any(|&p| labels[p] == l) {
                continue;
            }
            labels[i] = l;
            rec(i + 1, used.max(l), k, labels, dist, ml, cl, out);
        }
    }
    rec(0, 0, k as u32, &mut labels, &dist, &ml_partners, &cl_partners, &mut out);
    Ok(out.finish())
}

/// Candidate thresholds on feature `j`: midpoints between consecutive
/// distinct values.
fn candidate_thresholds(d: &Dataset, j: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d.n_points()).map(|i| d.value(i, j)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

/// Exact optimum over every clustering a complete depth-`depth` tree can
/// express with exactly `k` non-empty clusters that respect `cs`.
pub fn tree_oracle(d: &Dataset, depth: u32, k: usize, cs: &ConstraintSet) -> Result<OracleResult> {
    let (n, nf) = (d.n_points(), d.n_features());
    if n > TREE_MAX_POINTS || nf > TREE_MAX_FEATURES || depth > TREE_MAX_DEPTH || depth == 0 {
        return Err(Error::InstanceTooLarge(format!(
            "{n} points, {nf} features, depth {depth} (limits {TREE_MAX_POINTS}, {TREE_MAX_FEATURES}, 1..={TREE_MAX_DEPTH})"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("k = {k} with {n} points")));
    }
    let splits: Vec<(usize, f64)> = (0..nf)
        .flat_map(|j| candidate_thresholds(d, j).into_iter().map(move |a| (j, a)))
        .collect();
    let n_branches = (1usize << depth) - 1;
    let n_leaves = 1usize << depth;

    // distinct point-to-leaf assignments over all trees
    let mut cells: HashSet<Vec<u8>> = HashSet::new();
    let mut choice = vec![0usize; n_branches];
    if !splits.is_empty() {
        'trees: loop {
            let cell: Vec<u8> = (0..n)
                .map(|i| {
                    let mut t = 1;
                    while t <= n_branches {
                        let (j, a) = splits[choice[t - 1]];
                        t = if d.value(i, j) <= a { 2 * t } else { 2 * t + 1 };
                    }
                    (t - n_branches - 1) as u8
                })
                .collect();
            cells.insert(cell);
            for c in choice.iter_mut() {
                *c += 1;
                if *c < splits.len() {
                    continue 'trees;
                }
                *c = 0;
            }
            break;
        }
    }

    let dist = distance_matrix(d);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Collector::default();
    let mut leaf_label = vec![0u32; n_leaves];
    let total = k.pow(n_leaves as u32);
    for cell in &cells {
        for code in 0..total {
            let mut c = code;
            for l in leaf_label.iter_mut() {
                *l = (c % k) as u32 + 1;
                c /= k;
            }
            let labels: Vec<u32> = cell.iter().map(|&t| leaf_label[t as usize]).collect();
            let canon = canonicalize(&labels);
            if *canon.iter().max().expect("non-empty") as usize != k || !seen.insert(canon.clone()) {
                continue;
            }
            if respects(&canon, cs) {
                let (md, ms) = md_ms(&dist, &canon);
                out.entries.push((canon, md, ms));
            }
        }
    }
    out.entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out.finish())
}

fn check_lengths(a: &[u32], b: &[u32]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Config(format!(
            "label vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Config("empty label vectors".into()));
    }
    Ok(())
}

/// Contingency counts `n_ij`, row sums and column sums.
fn contingency(a: &[u32], b: &[u32]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let (ca, cb) = (canonicalize(a), canonicalize(b));
    let ra = *ca.iter().max().expect("non-empty") as usize;
    let rb = *cb.iter().max().expect("non-empty") as usize;
    let mut m = vec![vec![0.0; rb]; ra];
    for (&x, &y) in ca.iter().zip(&cb) {
        m[x as usize - 1][y as usize - 1] += 1.0;
    }
    let rows = m.iter().map(|r| r.iter().sum()).collect();
    let cols = (0..rb).map(|j| m.iter().map(|r| r[j]).sum()).collect();
    (m, rows, cols)
}

fn comb2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand Index. When the index is undefined (both partitions
/// trivial in the same way) it is 1 for identical partitions, else 0.
pub fn ari(a: &[u32], b: &[u32]) -> Result<f64> {
    check_lengths(a, b)?;
    let (m, rows, cols) = contingency(a, b);
    let index: f64 = m.iter().flatten().map(|&x| comb2(x)).sum();
    let sa: f64 = rows.iter().map(|&x| comb2(x)).sum();
    let sb: f64 = cols.iter().map(|&x| comb2(x)).sum();
    let expected = sa * sb / comb2(a.len() as f64);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return Ok(if canonicalize(a) == canonicalize(b) { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Normalized Mutual Information, `I(U;V) / sqrt(H(U) H(V))`. When either
/// entropy is zero it is 1 for identical partitions, else 0.
pub fn nmi(a: &[u32], b: &[u32]) -> Result<f64> {
    check_lengths(a, b)?;
    let n = a.len() as f64;
    let (m, rows, cols) = contingency(a, b);
    let h = |v: &[f64]| -> f64 {
        -v.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x / n * (x / n).ln())
            .sum::<f64>()
    };
    let (hu, hv) = (h(&rows), h(&cols));
    if hu == 0.0 || hv == 0.0 {
        return Ok(if canonicalize(a) == canonicalize(b) { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x > 0.0 {
                mi += x / n * (n * x / (rows[i] * cols[j])).ln();
            }
        }
    }
    Ok((mi / (hu * hv).sqrt()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(vals: &[f64]) -> Dataset {
        Dataset::from_rows(vals.iter().map(|&v| vec![v]).collect(), None).unwrap()
    }

    #[test]
    fn four_collinear_points() {
        let d = line(&[0.0, 1.0, 10.0, 11.0]);
        let r = cc_oracle(&d, 2, &ConstraintSet::empty()).unwrap();
        assert_eq!(r.min_md, Some(1.0));
        assert_eq!(r.optimal_labelings, vec![vec![1, 1, 2, 2]]);
        assert_eq!(r.pareto[0], ParetoPoint { md: 1.0, ms: 9.0 });

        let cs = ConstraintSet::new(4, vec![], vec![(0, 1)]).unwrap();
        let r2 = cc_oracle(&d, 2, &cs).unwrap();
        assert!(r2.min_md.unwrap() > 1.0);
    }

    #[test]
    fn singletons() {
        let d = line(&[0.0, 3.0, 7.0]);
        let r = cc_oracle(&d, 3, &ConstraintSet::empty()).unwrap();
        assert_eq!(r.min_md, Some(0.0));
        let cs = ConstraintSet::new(3, vec![(0, 1)], vec![]).unwrap();
        assert!(!cc_oracle(&d, 3, &cs).unwrap().is_feasible());
    }

    #[test]
    fn enumeration_counts_partitions() {
        // Stirling numbers of the second kind: S(6,2) = 31, S(6,3) = 90
        let d = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(cc_oracle(&d, 2, &ConstraintSet::empty()).unwrap().n_feasible, 31);
        assert_eq!(cc_oracle(&d, 3, &ConstraintSet::empty()).unwrap().n_feasible, 90);
    }

    #[test]
    fn trees_agree_on_separable_data() {
        let d = Dataset::from_rows(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![10.0, 0.0],
                vec![11.0, 1.0],
                vec![5.0, 20.0],
            ],
            None,
        )
        .unwrap();
        let cs = ConstraintSet::empty();
        let cc = cc_oracle(&d, 3, &cs).unwrap();
        let tree = tree_oracle(&d, 2, 3, &cs).unwrap();
        assert_eq!(cc.min_md, tree.min_md);
    }

    #[test]
    fn xor_shows_the_representability_gap() {
        let d = Dataset::from_rows(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            None,
        )
        .unwrap();
        // diagonal clusters are optimal but no single split produces them
        let cs = ConstraintSet::new(4, vec![(0, 1), (2, 3)], vec![]).unwrap();
        assert!(cc_oracle(&d, 2, &cs).unwrap().is_feasible());
        assert!(!tree_oracle(&d, 1, 2, &cs).unwrap().is_feasible());
        assert!(tree_oracle(&d, 2, 2, &cs).unwrap().is_feasible());
    }

    #[test]
    fn size_limits() {
        let d = line(&(0..13).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            cc_oracle(&d, 2, &ConstraintSet::empty()),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn ari_hand_example() {
        let v = ari(&[1, 1, 2, 2], &[1, 1, 2, 3]).unwrap();
        assert!((v - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(ari(&[1, 2, 2], &[5, 7, 7]).unwrap(), 1.0);
        assert_eq!(nmi(&[1, 2, 2], &[5, 7, 7]).unwrap(), 1.0);
        assert_eq!(nmi(&[1, 1, 1], &[2, 2, 2]).unwrap(), 1.0);
        assert_eq!(nmi(&[1, 1, 1], &[1, 2, 2]).unwrap(), 0.0);
        assert_eq!(ari(&[1, 1], &[1, 2]).unwrap(), 0.0);
        assert!(ari(&[1], &[1, 2]).is_err());
    }
}
