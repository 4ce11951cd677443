use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use treeclust::data::{
    generate_constraints, load_dataset, pair_table, ConstraintSet, Dataset, LabelColumn, LoadOptions,
};
use treeclust::encoding::{emit_wcnf, encode_cc, encode_tree, Mode, Objective, TreeShape};
use treeclust::harness::{ablation_configs, render_table, run_matrix, solve_instance, InstanceSpec, RunConfig};
use treeclust::oracle::{ari, cc_oracle, nmi, tree_oracle};
use treeclust::pairs::{build_distance_classes, bypass_pairs, smart_pairs};
use treeclust::solver::{Backend, Status};
use treeclust::Error;

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "treeclust",
    version,
    about = "Constrained clustering with decision trees via MaxSAT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the tree and clustering.
    Solve(SolveArgs),
    /// Run a grid of cells over seeds and write reports.
    Sweep(SweepArgs),
    /// Write the WCNF formula for one instance.
    Encode(SolveArgs),
    /// Exhaustive reference optimum for a small instance.
    Oracle(SolveArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    dataset: PathBuf,
    /// Ground-truth column: a header name, `last` or `none`.
    #[arg(long, default_value = "last")]
    label_column: String,
}

impl DataArgs {
    fn label_column(&self) -> LabelColumn {
        match self.label_column.as_str() {
            "last" => LabelColumn::Last,
            "none" => LabelColumn::Absent,
            name => LabelColumn::Named(name.to_string()),
        }
    }

    fn load(&self) -> treeclust::Result<Dataset> {
        load_dataset(
            &self.dataset,
            &LoadOptions {
                label_column: self.label_column(),
                normalize: true,
            },
        )
    }
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `tree` or `cc`.
    #[arg(long, default_value = "tree")]
    mode: String,
    /// `md` or `md-ms`.
    #[arg(long, default_value = "md-ms")]
    objective: String,
    #[arg(long, default_value_t = 3)]
    depth: u32,
    /// Number of clusters; defaults to the number of ground-truth classes.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Constraints drawn per point (needs ground truth).
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Constraint file (`ML i j` / `CL i j` lines); overrides --kappa.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Seconds.
    #[arg(long, default_value_t = 1800.0)]
    time_limit: f64,
    /// `builtin`, `external` (uses TREECLUST_SOLVER) or a solver command.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    no_smart_pairs: bool,
    /// Also write the formula as DIMACS WCNF.
    #[arg(long)]
    emit_wcnf: Option<PathBuf>,
    /// Write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// One or more CSV files.
    #[arg(long, required = true, num_args = 1..)]
    dataset: Vec<PathBuf>,
    #[arg(long, default_value = "last")]
    label_column: String,
    #[arg(long, default_value = "tree", value_delimiter = ',')]
    mode: Vec<String>,
    #[arg(long, default_value = "md-ms", value_delimiter = ',')]
    objective: Vec<String>,
    #[arg(long, default_value = "3", value_delimiter = ',')]
    depth: Vec<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = "0.1", value_delimiter = ',')]
    epsilon: Vec<f64>,
    #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5,1.0", value_delimiter = ',')]
    kappa: Vec<f64>,
    /// Number of seeds (1..=n).
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 1800.0)]
    time_limit: f64,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    no_smart_pairs: bool,
    /// Run each cell as the smart-pairs / epsilon-only / exact triple.
    #[arg(long)]
    ablation: bool,
    /// Cells solved in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Results directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

fn parse_mode(mode: &str, depth: u32) -> treeclust::Result<Mode> {
    match mode {
        "tree" => Ok(Mode::Tree { depth }),
        "cc" => Ok(Mode::Cc),
        _ => Err(Error::Config(format!("unknown mode `{mode}` (tree | cc)"))),
    }
}

fn backend(spec: &Option<String>) -> treeclust::Result<Backend> {
    match spec {
        Some(s) => Backend::parse(s),
        None => Ok(Backend::from_env()),
    }
}

fn time_limit(secs: f64) -> treeclust::Result<Duration> {
    if !(secs > 0.0 && secs.is_finite()) {
        return Err(Error::Config(format!("time limit {secs} must be positive")));
    }
    Ok(Duration::from_secs_f64(secs))
}

struct Prepared {
    d: Dataset,
    cs: ConstraintSet,
    mode: Mode,
    objective: Objective,
    k: usize,
}

fn prepare(a: &SolveArgs) -> treeclust::Result<Prepared> {
    let d = a.data.load()?;
    let mode = parse_mode(&a.mode, a.depth)?;
    let objective: Objective = a.objective.parse()?;
    if !(a.epsilon >= 0.0) {
        return Err(Error::Config(format!("epsilon = {} must be >= 0", a.epsilon)));
    }
    let k = match a.k {
        Some(k) => k,
        None => {
            let labels = d
                .labels()
                .ok_or_else(|| Error::Config("--k is required without ground truth".into()))?;
            labels.iter().collect::<std::collections::BTreeSet<_>>().len()
        }
    };
    let cs = match &a.constraints {
        Some(path) => ConstraintSet::load(path, d.n_points())?,
        None if a.kappa == 0.0 => ConstraintSet::empty(),
        None => generate_constraints(&d, a.kappa, a.seed)?,
    };
    Ok(Prepared {
        d,
        cs,
        mode,
        objective,
        k,
    })
}

fn cmd_solve(a: &SolveArgs) -> treeclust::Result<u8> {
    let p = prepare(a)?;
    let pt = pair_table(&p.d)?;
    let dc = build_distance_classes(&pt, a.epsilon);
    let spec = InstanceSpec {
        mode: p.mode,
        objective: p.objective,
        k: p.k,
        smart_pairs: !a.no_smart_pairs,
        backend: backend(&a.solver)?,
        time_limit: time_limit(a.time_limit)?,
    };
    let out = solve_instance(&p.d, &pt, &dc, &p.cs, &spec)?;
    if let (Some(path), Some(enc)) = (&a.emit_wcnf, &out.encoded) {
        emit_wcnf(&enc.formula, path)?;
    }
    println!(
        "status {}  time {:.2}s  clauses {}  ML {}  CL {}",
        out.status,
        out.wall_time,
        out.clause_count,
        p.cs.ml().len(),
        p.cs.cl().len()
    );
    let mut json = serde_json::json!({
        "status": out.status,
        "wall_time": out.wall_time,
        "clause_count": out.clause_count,
    });
    if let Some(sol) = &out.solution {
        println!(
            "md {:.4}  ms {:.4}  lambda+ {}  lambda- {}",
            sol.md, sol.ms, sol.lambda_plus, sol.lambda_minus
        );
        if let Some(truth) = p.d.labels() {
            println!(
                "ARI {:.4}  NMI {:.4}",
                ari(&sol.labels, truth)?,
                nmi(&sol.labels, truth)?
            );
        }
        if let Some(tree) = &sol.tree {
            print!("{}", tree.render(&p.d));
            json["tree"] = tree.to_json(&p.d);
        }
        json["labels"] = serde_json::json!(sol.labels);
        json["md"] = serde_json::json!(sol.md);
        json["ms"] = serde_json::json!(sol.ms);
        json["lambda_plus"] = serde_json::json!(sol.lambda_plus);
        json["lambda_minus"] = serde_json::json!(sol.lambda_minus);
    }
    if let Some(path) = &a.out {
        std::fs::write(path, serde_json::to_string_pretty(&json)?).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(match out.status {
        Status::Optimal | Status::Satisfiable => 0,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::Unknown => EXIT_UNKNOWN,
    })
}

fn cmd_encode(a: &SolveArgs) -> treeclust::Result<u8> {
    let p = prepare(a)?;
    let pt = pair_table(&p.d)?;
    let dc = build_distance_classes(&pt, a.epsilon);
    let po = if a.no_smart_pairs {
        bypass_pairs(&pt, &dc, &p.cs, p.k)
    } else {
        smart_pairs(&pt, &dc, &p.cs, p.k)
    };
    let enc = match p.mode {
        Mode::Tree { depth } => encode_tree(&p.d, &TreeShape::new(depth)?, p.k, &dc, &po, p.objective)?,
        Mode::Cc => encode_cc(&p.d, p.k, &dc, &po, p.objective)?,
    };
    let path = a
        .emit_wcnf
        .clone()
        .or_else(|| a.out.clone())
        .ok_or_else(|| Error::Config("encode needs --emit-wcnf or --out".into()))?;
    emit_wcnf(&enc.formula, &path)?;
    let sidecar = path.with_extension("vars.json");
    std::fs::write(&sidecar, serde_json::to_string(&enc.layout.to_json())?).map_err(|e| Error::Io {
        path: sidecar.clone(),
        source: e,
    })?;
    println!(
        "{} variables, {} hard, {} soft -> {}",
        enc.formula.n_vars,
        enc.formula.hard.len(),
        enc.formula.soft.len(),
        path.display()
    );
    for (family, count) in &enc.census.counts {
        println!("  {family:?}: {count}");
    }
    Ok(0)
}

fn cmd_oracle(a: &SolveArgs) -> treeclust::Result<u8> {
    let p = prepare(a)?;
    let r = match p.mode {
        Mode::Cc => cc_oracle(&p.d, p.k, &p.cs)?,
        Mode::Tree { depth } => tree_oracle(&p.d, depth, p.k, &p.cs)?,
    };
    match r.min_md {
        None => {
            println!("no feasible clustering");
            return Ok(EXIT_INFEASIBLE);
        }
        Some(md) => println!("min md {md:.4} over {} feasible labelings", r.n_feasible),
    }
    for pt in &r.pareto {
        println!("  front: md {:.4}  ms {:.4}", pt.md, pt.ms);
    }
    for l in &r.optimal_labelings {
        println!("  optimal: {l:?}");
    }
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs) -> treeclust::Result<u8> {
    let backend = backend(&a.solver)?;
    let limit = time_limit(a.time_limit)?;
    let label_column = DataArgs {
        dataset: PathBuf::new(),
        label_column: a.label_column.clone(),
    }
    .label_column();
    let mut cfgs = Vec::new();
    for dataset in &a.dataset {
        for mode in &a.mode {
            let depths: Vec<u32> = if mode == "cc" { vec![0] } else { a.depth.clone() };
            for &depth in &depths {
                for objective in &a.objective {
                    for &epsilon in &a.epsilon {
                        for &kappa in &a.kappa {
                            let mut cfg = RunConfig::new(dataset);
                            cfg.label_column = label_column.clone();
                            cfg.mode = parse_mode(mode, depth)?;
                            cfg.objective = objective.parse()?;
                            cfg.k = a.k;
                            cfg.epsilon = epsilon;
                            cfg.kappa = kappa;
                            cfg.seeds = (1..=a.seeds).collect();
                            cfg.time_limit = limit;
                            cfg.smart_pairs = !a.no_smart_pairs;
                            cfg.backend = backend.clone();
                            cfg.validate()?;
                            if a.ablation {
                                cfgs.extend(ablation_configs(&cfg));
                            } else {
                                cfgs.push(cfg);
                            }
                        }
                    }
                }
            }
        }
    }
    let report = run_matrix(&cfgs, &a.out, a.jobs)?;
    print!("{}", render_table(&report));
    println!("reports written to {}", a.out.display());
    Ok(0)
}

fn main() -> ExitCode {
    // die quietly when piped into `head` instead of panicking on EPIPE
    // SAFETY: installing the default disposition before any other thread exists.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let config = matches!(
                e,
                Error::Config(_)
                    | Error::KappaOutOfRange { .. }
                    | Error::ShapeTooShallow { .. }
                    | Error::MissingLabels
                    | Error::MissingLabelColumn(_)
                    | Error::ConstraintSyntax { .. }
                    | Error::InvalidConstraints(_)
                    | Error::TooFewPoints { .. }
                    | Error::InstanceTooLarge(_)
                    | Error::Io { .. }
                    | Error::Csv { .. }
                    | Error::NonNumeric { .. }
                    | Error::EmptyDataset
            );
            ExitCode::from(if config { EXIT_CONFIG } else { 1 })
        }
    }
}
