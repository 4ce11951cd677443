//! Experiment driver: seeded constraint sets, the full solve pipeline per
//! seed, aggregation over feasible runs, and report files for parameter
//! grids.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::data::{
    generate_constraints, load_dataset, pair_table, ConstraintSet, Dataset, LabelColumn, LoadOptions, PairTable,
};
use crate::decode::{decode, verify, ClusteringSolution, VerificationReport};
use crate::encoding::{encode_cc, encode_tree, Census, Encoded, Mode, Objective, TreeShape};
use crate::error::{Error, Result};
use crate::oracle::{ari, nmi};
use crate::pairs::{build_distance_classes, bypass_pairs, smart_pairs, DistanceClassing};
use crate::solver::{Backend, SolveResult, Status, DEFAULT_TIME_LIMIT};

/// One cell of an experiment grid.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub label_column: LabelColumn,
    pub mode: Mode,
    pub objective: Objective,
    /// Number of clusters; `None` takes the number of ground-truth classes.
    pub k: Option<usize>,
    pub epsilon: f64,
    pub kappa: f64,
    pub seeds: Vec<u64>,
    pub time_limit: Duration,
    pub smart_pairs: bool,
    pub backend: Backend,
    /// Seeds solved concurrently within the cell.
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset: dataset.into(),
            label_column: LabelColumn::Last,
            mode: Mode::Tree { depth: 3 },
            objective: Objective::MdMs,
            k: None,
            epsilon: 0.1,
            kappa: 0.0,
            seeds: (1..=20).collect(),
            time_limit: DEFAULT_TIME_LIMIT,
            smart_pairs: true,
            backend: Backend::Builtin,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon = {} must be >= 0", self.epsilon)));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds".into()));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if let Mode::Tree { depth } = self.mode {
            TreeShape::new(depth)?;
        }
        if self.time_limit.is_zero() {
            return Err(Error::Config("time limit must be positive".into()));
        }
        Ok(())
    }

    pub fn dataset_name(&self) -> String {
        self.dataset
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Tree { .. } => "tree",
            Mode::Cc => "cc",
        }
    }

    fn depth(&self) -> Option<u32> {
        match self.mode {
            Mode::Tree { depth } => Some(depth),
            Mode::Cc => None,
        }
    }

    /// `runs/<dataset>/<mode>/<objective>/d<d>_k<k>_eps<e>_kappa<kappa>`,
    /// relative to the results root.
    pub fn cell_dir(&self, k: usize) -> PathBuf {
        let d = self.depth().map_or("-".to_string(), |d| d.to_string());
        let mut leaf = format!("d{d}_k{k}_eps{}_kappa{}", self.epsilon, self.kappa);
        if !self.smart_pairs {
            leaf.push_str("_nosp");
        }
        PathBuf::from("runs")
            .join(self.dataset_name())
            .join(self.mode_name())
            .join(self.objective.to_string())
            .join(leaf)
    }

    fn echo(&self, k: usize) -> ConfigEcho {
        ConfigEcho {
            dataset: self.dataset_name(),
            mode: self.mode_name(),
            objective: self.objective,
            depth: self.depth(),
            k,
            epsilon: self.epsilon,
            kappa: self.kappa,
            seeds: self.seeds.len(),
            time_limit: self.time_limit.as_secs_f64(),
            smart_pairs: self.smart_pairs,
            backend: self.backend.to_string(),
        }
    }
}

/// Parameters of one solve, independent of where the data came from.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub mode: Mode,
    pub objective: Objective,
    pub k: usize,
    pub smart_pairs: bool,
    pub backend: Backend,
    pub time_limit: Duration,
}

/// Everything one solve produced.
#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub status: Status,
    pub solution: Option<ClusteringSolution>,
    pub report: Option<VerificationReport>,
    pub encoded: Option<Encoded>,
    pub solve: Option<SolveResult>,
    /// Hard plus soft clauses handed to the solver (0 when pruning proved
    /// the constraints inconsistent).
    pub clause_count: usize,
    pub wall_time: f64,
}

/// Prune, encode, solve, decode and verify one instance. A verification
/// failure is an error, never a feasible result.
pub fn solve_instance(
    d: &Dataset,
    pt: &PairTable,
    dc: &DistanceClassing,
    cs: &ConstraintSet,
    spec: &InstanceSpec,
) -> Result<InstanceOutcome> {
    let start = Instant::now();
    let po = if spec.smart_pairs {
        smart_pairs(pt, dc, cs, spec.k)
    } else {
        bypass_pairs(pt, dc, cs, spec.k)
    };
    if po.infeasible || cs.is_contradictory() {
        return Ok(InstanceOutcome {
            status: Status::Infeasible,
            solution: None,
            report: None,
            encoded: None,
            solve: None,
            clause_count: 0,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    let enc = match spec.mode {
        Mode::Tree { depth } => encode_tree(d, &TreeShape::new(depth)?, spec.k, dc, &po, spec.objective)?,
        Mode::Cc => encode_cc(d, spec.k, dc, &po, spec.objective)?,
    };
    let res = spec.backend.solve(&enc.formula, spec.time_limit)?;
    let (solution, report) = match &res.model {
        Some(model) if res.status.is_feasible() => {
            let sol = decode(model, &enc.layout, d, dc, res.status)?;
            let report = verify(&sol, d, cs, dc);
            report.clone().into_result()?;
            (Some(sol), Some(report))
        }
        _ => (None, None),
    };
    Ok(InstanceOutcome {
        status: res.status,
        solution,
        report,
        clause_count: enc.formula.n_clauses(),
        encoded: Some(enc),
        solve: Some(res),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub dataset: String,
    pub mode: &'static str,
    pub objective: Objective,
    pub depth: Option<u32>,
    pub k: usize,
    pub epsilon: f64,
    pub kappa: f64,
    pub seeds: usize,
    pub time_limit: f64,
    pub smart_pairs: bool,
    pub backend: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub status: Status,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
    pub wall_time: f64,
    pub clause_count: usize,
    pub n_ml: usize,
    pub n_cl: usize,
    pub lambda_plus: Option<usize>,
    pub lambda_minus: Option<usize>,
    pub ms: Option<f64>,
    pub md: Option<f64>,
    pub cost: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub census: Option<Census>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config: ConfigEcho,
    pub seeds: Vec<SeedRecord>,
    /// Mean over feasible runs; `None` when no run was feasible.
    pub mean_ari: Option<f64>,
    pub mean_nmi: Option<f64>,
    pub feasible: usize,
    pub mean_time: f64,
    pub mean_clauses: f64,
}

impl RunRecord {
    fn aggregate(config: ConfigEcho, seeds: Vec<SeedRecord>) -> Self {
        let feasible: Vec<&SeedRecord> = seeds.iter().filter(|s| s.status.is_feasible()).collect();
        let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        let n = seeds.len().max(1) as f64;
        RunRecord {
            mean_ari: mean(feasible.iter().filter_map(|s| s.ari).collect()),
            mean_nmi: mean(feasible.iter().filter_map(|s| s.nmi).collect()),
            feasible: feasible.len(),
            mean_time: seeds.iter().map(|s| s.wall_time).sum::<f64>() / n,
            mean_clauses: seeds.iter().map(|s| s.clause_count as f64).sum::<f64>() / n,
            config,
            seeds,
        }
    }
}

fn seed_record(d: &Dataset, seed: u64, cs: &ConstraintSet, out: InstanceOutcome) -> Result<SeedRecord> {
    let truth = d.labels();
    let (ari_v, nmi_v) = match (&out.solution, truth) {
        (Some(sol), Some(t)) => (Some(ari(&sol.labels, t)?), Some(nmi(&sol.labels, t)?)),
        _ => (None, None),
    };
    let sol = out.solution.as_ref();
    Ok(SeedRecord {
        seed,
        status: out.status,
        ari: ari_v,
        nmi: nmi_v,
        wall_time: out.wall_time,
        clause_count: out.clause_count,
        n_ml: cs.ml().len(),
        n_cl: cs.cl().len(),
        lambda_plus: sol.map(|s| s.lambda_plus),
        lambda_minus: sol.map(|s| s.lambda_minus),
        ms: sol.map(|s| s.ms).filter(|v| v.is_finite()),
        md: sol.map(|s| s.md),
        cost: out.solve.as_ref().and_then(|r| r.cost),
        census: out.encoded.as_ref().map(|e| e.census.clone()),
        labels: sol.map(|s| s.labels.clone()),
        tree: sol.and_then(|s| s.tree.as_ref()).map(|t| t.to_json(d)),
    })
}

/// Runs every seed of one cell. If `out_dir` is given, each seed's record
/// is written under [`RunConfig::cell_dir`].
pub fn run_cell_to(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<RunRecord> {
    cfg.validate()?;
    let d = load_dataset(
        &cfg.dataset,
        &LoadOptions {
            label_column: cfg.label_column.clone(),
            normalize: true,
        },
    )?;
    let truth = d.labels().ok_or(Error::MissingLabels)?;
    let k = match cfg.k {
        Some(k) => k,
        None => truth.iter().copied().collect::<std::collections::BTreeSet<_>>().len(),
    };
    if let Mode::Tree { depth } = cfg.mode {
        let leaves = 1usize << depth;
        if leaves < k {
            return Err(Error::ShapeTooShallow { depth, leaves, k });
        }
    }
    let pt = pair_table(&d)?;
    let dc = build_distance_classes(&pt, cfg.epsilon);
    let spec = InstanceSpec {
        mode: cfg.mode,
        objective: cfg.objective,
        k,
        smart_pairs: cfg.smart_pairs,
        backend: cfg.backend.clone(),
        time_limit: cfg.time_limit,
    };

    let run_seed = |seed: u64| -> Result<SeedRecord> {
        let cs = generate_constraints(&d, cfg.kappa, seed)?;
        let out = solve_instance(&d, &pt, &dc, &cs, &spec)?;
        seed_record(&d, seed, &cs, out)
    };
    let results = parallel_map(&cfg.seeds, cfg.jobs, |&s| run_seed(s));
    let seeds = results.into_iter().collect::<Result<Vec<_>>>()?;

    if let Some(root) = out_dir {
        let dir = root.join(cfg.cell_dir(k));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for s in &seeds {
            let path = dir.join(format!("seed{}.json", s.seed));
            let text = serde_json::to_string_pretty(s)?;
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(RunRecord::aggregate(cfg.echo(k), seeds))
}

pub fn run_cell(cfg: &RunConfig) -> Result<RunRecord> {
    run_cell_to(cfg, None)
}

/// Order-preserving map over a bounded pool of scoped threads.
fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// A cell that raised an error instead of producing a record.
#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    pub dataset: String,
    pub cell: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixReport {
    pub records: Vec<RunRecord>,
    pub failures: Vec<CellFailure>,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    dataset: &'a str,
    mode: &'a str,
    objective: String,
    depth: String,
    k: usize,
    epsilon: f64,
    kappa: f64,
    smart_pairs: bool,
    seeds: usize,
    feasible: usize,
    mean_ari: String,
    mean_nmi: String,
    mean_clauses: f64,
    mean_time: f64,
}

#[derive(Serialize)]
struct FigureRow {
    mode: String,
    objective: String,
    kappa: f64,
    datasets: usize,
    mean_ari: String,
    feasible_pct: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.4}"))
}

/// Runs every cell on a pool of `workers` threads and writes, under
/// `out_dir`: per-seed JSON files, `summary.csv`, `summary.json`,
/// `table.txt` and `figure1.csv` (mean ARI and feasibility per kappa).
/// Failed cells are reported and the rest still run.
pub fn run_matrix(cfgs: &[RunConfig], out_dir: &Path, workers: usize) -> Result<MatrixReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let results = parallel_map(cfgs, workers, |cfg| run_cell_to(cfg, Some(out_dir)));
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (cfg, r) in cfgs.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(CellFailure {
                dataset: cfg.dataset_name(),
                cell: cfg.cell_dir(cfg.k.unwrap_or(0)).display().to_string(),
                error: e.to_string(),
            }),
        }
    }
    let report = MatrixReport { records, failures };
    write_reports(&report, out_dir)?;
    Ok(report)
}

fn write_reports(report: &MatrixReport, out_dir: &Path) -> Result<()> {
    let csv_err = |path: &Path, e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };

    let path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    for r in &report.records {
        let c = &r.config;
        w.serialize(SummaryRow {
            dataset: &c.dataset,
            mode: c.mode,
            objective: c.objective.to_string(),
            depth: c.depth.map_or("-".into(), |d| d.to_string()),
            k: c.k,
            epsilon: c.epsilon,
            kappa: c.kappa,
            smart_pairs: c.smart_pairs,
            seeds: c.seeds,
            feasible: r.feasible,
            mean_ari: opt(r.mean_ari),
            mean_nmi: opt(r.mean_nmi),
            mean_clauses: r.mean_clauses,
            mean_time: r.mean_time,
        })
        .map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(report)?).map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join("table.txt");
    std::fs::write(&path, render_table(report)).map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join("figure1.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    for row in figure_rows(&report.records) {
        w.serialize(row).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Mode, objective and kappa.
type FigureKey = (String, String, f64);

fn figure_rows(records: &[RunRecord]) -> Vec<FigureRow> {
    let mut groups: Vec<(FigureKey, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = (
            r.config.mode.to_string(),
            r.config.objective.to_string(),
            r.config.kappa,
        );
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups.sort_by(|a, b| {
        (&a.0 .0, &a.0 .1)
            .cmp(&(&b.0 .0, &b.0 .1))
            .then(a.0 .2.total_cmp(&b.0 .2))
    });
    groups
        .into_iter()
        .map(|((mode, objective, kappa), rs)| {
            let aris: Vec<f64> = rs.iter().filter_map(|r| r.mean_ari).collect();
            let seeds: usize = rs.iter().map(|r| r.seeds.len()).sum();
            let feasible: usize = rs.iter().map(|r| r.feasible).sum();
            FigureRow {
                mode,
                objective,
                kappa,
                datasets: rs.len(),
                mean_ari: opt((!aris.is_empty()).then(|| aris.iter().sum::<f64>() / aris.len() as f64)),
                feasible_pct: 100.0 * feasible as f64 / seeds.max(1) as f64,
            }
        })
        .collect()
}

/// Fixed-width text table, one row per cell plus one per failure.
pub fn render_table(report: &MatrixReport) -> String {
    let mut out = format!(
        "{:<12} {:<5} {:<6} {:>2} {:>2} {:>6} {:>5} {:>3} {:>6} {:>6} {:>6} {:>10} {:>12}\n",
        "dataset", "mode", "obj", "d", "k", "eps", "kappa", "sp", "ARI", "NMI", "Feas", "Time(s)", "Clauses"
    );
    for r in &report.records {
        let c = &r.config;
        out.push_str(&format!(
            "{:<12} {:<5} {:<6} {:>2} {:>2} {:>6} {:>5} {:>3} {:>6} {:>6} {:>6} {:>10.2} {:>12.1}\n",
            c.dataset,
            c.mode,
            c.objective.to_string(),
            c.depth.map_or("-".into(), |d| d.to_string()),
            c.k,
            c.epsilon,
            c.kappa,
            if c.smart_pairs { "y" } else { "n" },
            r.mean_ari.map_or("-".into(), |x| format!("{x:.2}")),
            r.mean_nmi.map_or("-".into(), |x| format!("{x:.2}")),
            format!("{}/{}", r.feasible, c.seeds),
            r.mean_time,
            r.mean_clauses,
        ));
    }
    for f in &report.failures {
        out.push_str(&format!("{:<12} FAILED {}: {}\n", f.dataset, f.cell, f.error));
    }
    out
}

/// The three ablation variants of a cell: smart pairs with the given
/// epsilon, epsilon only, and neither (epsilon = 0).
pub fn ablation_configs(base: &RunConfig) -> [RunConfig; 3] {
    let mut sp = base.clone();
    sp.smart_pairs = true;
    let mut eps = base.clone();
    eps.smart_pairs = false;
    let mut none = base.clone();
    none.smart_pairs = false;
    none.epsilon = 0.0;
    [sp, eps, none]
}
