//! Dataset ingestion, feature normalization, pairwise distances and
//! ground-truth driven constraint generation.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Upper end of the normalized feature range.
pub const NORMALIZED_MAX: f64 = 100.0;

/// Which CSV column carries ground-truth labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// The last column of the header.
    #[default]
    Last,
    Named(String),
    /// Every column is a feature.
    Absent,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label_column: LabelColumn,
    pub normalize: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            label_column: LabelColumn::Last,
            normalize: true,
        }
    }
}

/// A point matrix with optional ground truth.
///
/// Row order is fixed at construction; point index `i` is the identity used
/// throughout encoding and decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_points: usize,
    n_features: usize,
    labels: Option<Vec<u32>>,
    label_names: Vec<String>,
    feature_names: Option<Vec<String>>,
    /// Original `(min, max)` of every feature, recorded by [`Dataset::normalized`].
    feature_ranges: Option<Vec<(f64, f64)>>,
}

impl Dataset {
    /// Builds a dataset from rows. All rows must share one length and every
    /// value must be finite.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Option<Vec<u32>>) -> Result<Self> {
        let n_points = rows.len();
        if n_points == 0 {
            return Err(Error::EmptyDataset);
        }
        let n_features = rows[0].len();
        if n_features == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut values = Vec::with_capacity(n_points * n_features);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::Config(format!(
                    "row {i} has {} features, expected {n_features}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Config(format!("row {i} holds non-finite value {v}")));
            }
            values.extend(row);
        }
        if let Some(l) = &labels {
            if l.len() != n_points {
                return Err(Error::Config(format!("{} labels for {n_points} points", l.len())));
            }
        }
        Ok(Dataset {
            values,
            n_points,
            n_features,
            labels,
            label_names: Vec::new(),
            feature_names: None,
            feature_ranges: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.n_features);
        self.feature_names = Some(names);
        self
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_features + j]
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Original label strings, indexed by label id (empty when labels were
    /// supplied numerically).
    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn feature_name(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => names[j].clone(),
            None => format!("f{j}"),
        }
    }

    pub fn feature_ranges(&self) -> Option<&[(f64, f64)]> {
        self.feature_ranges.as_deref()
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Min-max scales every feature into `[0, 100]`. A constant feature maps
    /// to all zeros.
    ///
    /// Normalizing an already normalized dataset leaves the values unchanged
    /// bit for bit. The ranges recorded by the first call are kept.
    pub fn normalized(&self) -> Dataset {
        let mut out = self.clone();
        let mut ranges = Vec::with_capacity(self.n_features);
        for j in 0..self.n_features {
            let (lo, hi) = (0..self.n_points).fold((f64::INFINITY, f64::NEG_INFINITY), |acc, i| {
                let v = self.value(i, j);
                (acc.0.min(v), acc.1.max(v))
            });
            ranges.push((lo, hi));
            let span = hi - lo;
            let scale = if span > 0.0 { NORMALIZED_MAX / span } else { 0.0 };
            for i in 0..self.n_points {
                let v = self.value(i, j);
                out.values[i * self.n_features + j] = if span <= 0.0 {
                    0.0
                } else if v == hi {
                    NORMALIZED_MAX
                } else {
                    ((v - lo) * scale).clamp(0.0, NORMALIZED_MAX)
                };
            }
        }
        if out.feature_ranges.is_none() {
            out.feature_ranges = Some(ranges);
        }
        out
    }

    /// Reads a CSV with a header row.
    pub fn from_csv_reader<R: Read>(reader: R, source: &Path, opts: &LoadOptions) -> Result<Self> {
        let csv_err = |e| Error::Csv {
            path: source.to_path_buf(),
            source: e,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        if header.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let label_idx = match &opts.label_column {
            LabelColumn::Last => Some(header.len() - 1),
            LabelColumn::Named(name) => Some(
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
            ),
            LabelColumn::Absent => None,
        };
        let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != label_idx).collect();

        let mut rows = Vec::new();
        let mut raw_labels = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let mut row = Vec::with_capacity(feature_cols.len());
            for &c in &feature_cols {
                let cell = record.get(c).unwrap_or("");
                let v: f64 = cell
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| Error::NonNumeric {
                        path: source.to_path_buf(),
                        row: r + 1,
                        column: header[c].clone(),
                        value: cell.to_owned(),
                    })?;
                row.push(v);
            }
            rows.push(row);
            if let Some(li) = label_idx {
                raw_labels.push(record.get(li).unwrap_or("").to_owned());
            }
        }
        if rows.is_empty() || feature_cols.is_empty() {
            return Err(Error::EmptyDataset);
        }

        let (labels, label_names) = match label_idx {
            Some(_) => {
                let mut names: Vec<String> = Vec::new();
                let ids = raw_labels
                    .into_iter()
                    .map(|s| match names.iter().position(|n| *n == s) {
                        Some(p) => p as u32,
                        None => {
                            names.push(s);
                            (names.len() - 1) as u32
                        }
                    })
                    .collect();
                (Some(ids), names)
            }
            None => (None, Vec::new()),
        };

        let mut ds = Dataset::from_rows(rows, labels)?;
        ds.label_names = label_names;
        ds.feature_names = Some(feature_cols.iter().map(|&c| header[c].clone()).collect());
        Ok(if opts.normalize { ds.normalized() } else { ds })
    }
}

/// Loads a CSV dataset from disk.
pub fn load_dataset(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_csv_reader(std::io::BufReader::new(file), path, opts)
}

/// Must-link and cannot-link pairs, stored as `(i, j)` with `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    ml: Vec<(usize, usize)>,
    cl: Vec<(usize, usize)>,
}

impl ConstraintSet {
    /// Validates and canonicalizes the pairs. A pair may not repeat inside
    /// one list; a pair listed as both must-link and cannot-link is accepted
    /// and makes the set contradictory (see [`ConstraintSet::is_contradictory`]).
    pub fn new(n_points: usize, ml: Vec<(usize, usize)>, cl: Vec<(usize, usize)>) -> Result<Self> {
        let canon = |list: Vec<(usize, usize)>, kind: &str| -> Result<Vec<(usize, usize)>> {
            let mut seen = HashSet::new();
            list.into_iter()
                .map(|(a, b)| {
                    if a == b {
                        return Err(Error::InvalidConstraints(format!(
                            "{kind} pair ({a}, {b}) links a point to itself"
                        )));
                    }
                    if a.max(b) >= n_points {
                        return Err(Error::InvalidConstraints(format!(
                            "{kind} pair ({a}, {b}) out of range for {n_points} points"
                        )));
                    }
                    let p = (a.min(b), a.max(b));
                    if !seen.insert(p) {
                        return Err(Error::InvalidConstraints(format!("{kind} pair {p:?} listed twice")));
                    }
                    Ok(p)
                })
                .collect()
        };
        Ok(ConstraintSet {
            ml: canon(ml, "ML")?,
            cl: canon(cl, "CL")?,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn ml(&self) -> &[(usize, usize)] {
        &self.ml
    }

    pub fn cl(&self) -> &[(usize, usize)] {
        &self.cl
    }

    pub fn len(&self) -> usize {
        self.ml.len() + self.cl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when some pair is both must-linked and cannot-linked.
    pub fn is_contradictory(&self) -> bool {
        let ml: HashSet<_> = self.ml.iter().collect();
        self.cl.iter().any(|p| ml.contains(p))
    }

    /// Parses the line format `ML i j` / `CL i j` (zero-based indices).
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str, n_points: usize) -> Result<Self> {
        let mut ml = Vec::new();
        let mut cl = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::ConstraintSyntax {
                line: n + 1,
                msg: msg.to_owned(),
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(err("expected `ML i j` or `CL i j`"));
            }
            let i: usize = toks[1].parse().map_err(|_| err("bad first index"))?;
            let j: usize = toks[2].parse().map_err(|_| err("bad second index"))?;
            match toks[0] {
                "ML" | "ml" => ml.push((i, j)),
                "CL" | "cl" => cl.push((i, j)),
                other => return Err(err(&format!("unknown constraint kind `{other}`"))),
            }
        }
        Self::new(n_points, ml, cl)
    }

    pub fn load(path: impl AsRef<Path>, n_points: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, n_points)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, j) in &self.ml {
            let _ = writeln!(s, "ML {i} {j}");
        }
        for (i, j) in &self.cl {
            let _ = writeln!(s, "CL {i} {j}");
        }
        s
    }
}

/// Index of the unordered pair `(i, j)`, `i < j`, in row-major upper
/// triangular order.
#[inline]
pub(crate) fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn tri_unrank(n: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - i - 1;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range")
}

/// All point pairs sorted by `(distance, i, j)`.
#[derive(Debug, Clone)]
pub struct PairTable {
    n_points: usize,
    pairs: Vec<(u32, u32)>,
    dist: Vec<f64>,
    /// `rank[tri_index(i, j)]` is the sorted position of pair `(i, j)`.
    rank: Vec<u32>,
}

impl PairTable {
    pub fn new(d: &Dataset) -> Result<Self> {
        let n = d.n_points();
        if n < 2 {
            return Err(Error::TooFewPoints { needed: 2, actual: n });
        }
        let mut entries: Vec<(f64, u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                entries.push((d.distance(i, j), i as u32, j as u32));
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut rank = vec![0u32; entries.len()];
        for (pos, &(_, i, j)) in entries.iter().enumerate() {
            rank[tri_index(n, i as usize, j as usize)] = pos as u32;
        }
        Ok(PairTable {
            n_points: n,
            pairs: entries.iter().map(|e| (e.1, e.2)).collect(),
            dist: entries.iter().map(|e| e.0).collect(),
            rank,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The pair at sorted position `pos`.
    pub fn pair(&self, pos: usize) -> (usize, usize) {
        let (i, j) = self.pairs[pos];
        (i as usize, j as usize)
    }

    pub fn dist(&self, pos: usize) -> f64 {
        self.dist[pos]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Sorted position of the unordered pair `{i, j}`.
    pub fn position(&self, i: usize, j: usize) -> usize {
        let (a, b) = (i.min(j), i.max(j));
        self.rank[tri_index(self.n_points, a, b)] as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.pairs
            .iter()
            .zip(&self.dist)
            .map(|(&(i, j), &d)| ((i as usize, j as usize), d))
    }
}

pub fn pair_table(d: &Dataset) -> Result<PairTable> {
    PairTable::new(d)
}

/// Number of constraints drawn for a given `kappa`: `floor(kappa * |X|)`.
pub fn constraint_count(n_points: usize, kappa: f64) -> usize {
    // The tolerance keeps products such as 0.29 * 100 from truncating to 28.
    (kappa * n_points as f64 + 1e-9).floor() as usize
}

/// Samples `floor(kappa * |X|)` distinct pairs uniformly and labels each as
/// must-link when both points share a ground-truth label, cannot-link
/// otherwise. Deterministic in `seed`.
pub fn generate_constraints(d: &Dataset, kappa: f64, seed: u64) -> Result<ConstraintSet> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    let n = d.n_points();
    let max = (n as f64 - 1.0) / 2.0;
    if !(0.0..=max).contains(&kappa) || kappa.is_nan() {
        return Err(Error::KappaOutOfRange { kappa, max });
    }
    let total = n * (n - 1) / 2;
    let amount = constraint_count(n, kappa).min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ml = Vec::new();
    let mut cl = Vec::new();
    for idx in rand::seq::index::sample(&mut rng, total.max(1), amount) {
        let (i, j) = tri_unrank(n, idx);
        if labels[i] == labels[j] {
            ml.push((i, j));
        } else {
            cl.push((i, j));
        }
    }
    ml.sort_unstable();
    cl.sort_unstable();
    ConstraintSet::new(n, ml, cl)
}
