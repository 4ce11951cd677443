//! MaxSAT backends.
//!
//! [`solve_builtin`] is a linear SAT-UNSAT search on top of the in-crate
//! CDCL solver; [`solve_external`] shells out to any MaxSAT-Evaluation style
//! solver. Both verify the returned model against the formula before
//! handing it back.

pub mod sat;

use std::io::Read;
use std::os::unix::process::CommandExt;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::encoding::WcnfFormula;
use crate::error::{Error, Result};
use sat::{Lit, SatResult, Solver};

/// Default wall-clock limit, 30 minutes.
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(1800);

/// Environment variable holding the default external solver command.
pub const SOLVER_ENV: &str = "TREECLUST_SOLVER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    /// A model was found but optimality was not proven.
    Satisfiable,
    Infeasible,
    Unknown,
}

impl Status {
    pub fn is_feasible(self) -> bool {
        matches!(self, Status::Optimal | Status::Satisfiable)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "OPTIMAL",
            Status::Satisfiable => "SATISFIABLE",
            Status::Infeasible => "INFEASIBLE",
            Status::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// `model[v - 1]` is the value of variable `v`.
    pub model: Option<Vec<bool>>,
    pub cost: Option<usize>,
    pub wall_time: f64,
}

/// Which backend to run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Builtin,
    /// Command template; `{}` is replaced by the WCNF path, otherwise the
    /// path is appended as the last argument.
    External(String),
}

impl Backend {
    /// `builtin`, `external` (command from the environment) or a command.
    pub fn parse(spec: &str) -> Result<Backend> {
        match spec {
            "builtin" => Ok(Backend::Builtin),
            "external" | "env" => std::env::var(SOLVER_ENV)
                .map(Backend::External)
                .map_err(|_| Error::Config(format!("{SOLVER_ENV} is not set"))),
            cmd if cmd.trim().is_empty() => Err(Error::Config("empty solver command".into())),
            cmd => Ok(Backend::External(cmd.to_string())),
        }
    }

    /// External if the environment names a solver, builtin otherwise.
    pub fn from_env() -> Backend {
        match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Backend::External(cmd),
            _ => Backend::Builtin,
        }
    }

    pub fn solve(&self, f: &WcnfFormula, time_limit: Duration) -> Result<SolveResult> {
        match self {
            Backend::Builtin => solve_builtin(f, time_limit),
            Backend::External(cmd) => solve_external(f, cmd, time_limit),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Builtin => f.write_str("builtin"),
            Backend::External(cmd) => f.write_str(cmd),
        }
    }
}

fn checked(f: &WcnfFormula, status: Status, model: Vec<bool>, start: Instant) -> Result<SolveResult> {
    if model.len() != f.n_vars as usize {
        return Err(Error::ModelVerification(format!(
            "model has {} values for {} variables",
            model.len(),
            f.n_vars
        )));
    }
    if let Some(n) = f.first_violated_hard(&model) {
        return Err(Error::ModelVerification(format!(
            "hard clause {n} falsified: {:?}",
            f.hard[n]
        )));
    }
    let cost = f.cost(&model);
    Ok(SolveResult {
        status,
        model: Some(model),
        cost: Some(cost),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn modelless(status: Status, start: Instant) -> SolveResult {
    SolveResult {
        status,
        model: None,
        cost: None,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Linear SAT-UNSAT search. Every soft clause gets a violation literal; an
/// at-most-`b` constraint over those literals is tightened to one below the
/// cost of each model found until the formula becomes unsatisfiable.
pub fn solve_builtin(f: &WcnfFormula, time_limit: Duration) -> Result<SolveResult> {
    solve_builtin_with(f, time_limit, |_| {})
}

/// As [`solve_builtin`], calling `on_model` with the cost of every improving
/// model as it is found.
pub fn solve_builtin_with(
    f: &WcnfFormula,
    time_limit: Duration,
    mut on_model: impl FnMut(usize),
) -> Result<SolveResult> {
    let start = Instant::now();
    let deadline = start + time_limit;
    f.validate().map_err(Error::Config)?;

    let mut s = Solver::new(f.n_vars as usize);
    let mut hard_ok = true;
    for c in &f.hard {
        let lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
        hard_ok &= s.add_clause(&lits);
    }
    if !hard_ok {
        return Ok(modelless(Status::Infeasible, start));
    }

    // A repeated soft unit gets its own relaxation variable: the cardinality
    // constraint counts distinct literals.
    let mut violation = Vec::with_capacity(f.soft.len());
    let mut used = std::collections::HashSet::new();
    for c in &f.soft {
        let unit = match c[..] {
            [l] => Some(!Lit::from_dimacs(l)).filter(|v| used.insert(*v)),
            _ => None,
        };
        if let Some(v) = unit {
            violation.push(v);
        } else {
            let r = Lit::new(s.new_var(), false);
            let mut lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
            lits.push(r);
            s.add_clause(&lits);
            violation.push(r);
        }
    }
    for &v in &violation {
        s.set_phase(v.var(), v.is_negative());
    }
    s.set_at_most(violation.clone());

    let mut best: Option<Vec<bool>> = None;
    loop {
        match s.solve(&[], Some(deadline)) {
            SatResult::Sat => {
                let model = s.model();
                let cost = violation
                    .iter()
                    .filter(|l| model[l.var() as usize] != l.is_negative())
                    .count();
                best = Some(model[..f.n_vars as usize].to_vec());
                on_model(cost);
                if cost == 0 || !s.tighten_at_most(cost - 1) {
                    let m = best.take().expect("just stored");
                    return checked(f, Status::Optimal, m, start);
                }
            }
            SatResult::Unsat => {
                return match best {
                    Some(m) => checked(f, Status::Optimal, m, start),
                    None => Ok(modelless(Status::Infeasible, start)),
                };
            }
            SatResult::Interrupted => {
                return match best {
                    Some(m) => checked(f, Status::Satisfiable, m, start),
                    None => Ok(modelless(Status::Unknown, start)),
                };
            }
        }
    }
}

fn split_command(template: &str, path: &str) -> Vec<String> {
    let mut args: Vec<String> = template.split_whitespace().map(str::to_string).collect();
    let mut substituted = false;
    for a in args.iter_mut() {
        if a.contains("{}") {
            *a = a.replace("{}", path);
            substituted = true;
        }
    }
    if !substituted {
        args.push(path.to_string());
    }
    args
}

/// Runs an external MaxSAT solver on `f`.
///
/// The subprocess gets SIGTERM at the time limit, then SIGKILL after a short
/// grace period; whatever it printed up to then is parsed, so anytime
/// solvers still report their best model.
pub fn solve_external(f: &WcnfFormula, solver_cmd: &str, time_limit: Duration) -> Result<SolveResult> {
    let start = Instant::now();
    let mut file = tempfile::Builder::new()
        .prefix("treeclust-")
        .suffix(".wcnf")
        .tempfile()
        .map_err(|e| Error::io(std::env::temp_dir(), e))?;
    f.write_dimacs(std::io::BufWriter::new(file.as_file_mut()))
        .map_err(|e| Error::io(file.path(), e))?;
    let path = file.path().to_string_lossy().into_owned();

    let args = split_command(solver_cmd, &path);
    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .process_group(0)
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                Error::SolverMissing(format!("{}: {e}", args[0]))
            }
            _ => Error::io(&args[0], e),
        })?;

    let mut stdout = child.stdout.take().expect("piped");
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });

    let deadline = start + time_limit;
    let mut timed_out = false;
    loop {
        if child.try_wait().map_err(|e| Error::io(&args[0], e))?.is_some() {
            break;
        }
        if Instant::now() >= deadline {
            timed_out = true;
            terminate(&mut child);
            break;
        }
        std::thread::sleep(Duration::from_millis(10));
    }
    let output = reader.join().unwrap_or_default();
    drop(file);

    let parsed = parse_output(&output, f.n_vars as usize)?;
    let status = match (parsed.status.as_deref(), &parsed.model) {
        (Some("UNSATISFIABLE"), _) => return Ok(modelless(Status::Infeasible, start)),
        (_, None) => return Ok(modelless(Status::Unknown, start)),
        (Some("OPTIMUM FOUND"), Some(_)) if !timed_out => Status::Optimal,
        (_, Some(_)) => Status::Satisfiable,
    };
    let result = checked(f, status, parsed.model.expect("matched Some"), start)?;
    if let (Some(o), Some(c)) = (parsed.cost, result.cost) {
        if status == Status::Optimal && o != c as u64 {
            return Err(Error::ModelVerification(format!(
                "solver reported cost {o}, model falsifies {c} soft clauses"
            )));
        }
    }
    Ok(result)
}

/// Signals the child's whole process group, so wrapper scripts do not leave
/// a grandchild holding stdout open.
fn terminate(child: &mut std::process::Child) {
    let group = -(child.id() as libc::pid_t);
    // SAFETY: kill(2) on the process group led by a child we still own.
    unsafe {
        libc::kill(group, libc::SIGTERM);
    }
    let grace = Instant::now() + Duration::from_secs(2);
    while Instant::now() < grace {
        if let Ok(Some(_)) = child.try_wait() {
            return;
        }
        std::thread::sleep(Duration::from_millis(10));
    }
    // SAFETY: as above.
    unsafe {
        libc::kill(group, libc::SIGKILL);
    }
    let _ = child.wait();
}

#[derive(Debug, Default, PartialEq)]
pub(crate) struct ParsedOutput {
    pub status: Option<String>,
    pub cost: Option<u64>,
    pub model: Option<Vec<bool>>,
}

/// Parses `s`/`o`/`v` lines. The last `o` line wins; the model comes from
/// the last block of `v` lines, either as signed literals or as a 0/1
/// string.
pub(crate) fn parse_output(out: &str, n_vars: usize) -> Result<ParsedOutput> {
    let mut p = ParsedOutput::default();
    let mut v_lines: Vec<&str> = Vec::new();
    let mut last_was_v = false;
    for line in out.lines() {
        let line = line.trim();
        let (tag, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match tag {
            "s" => p.status = Some(rest.trim().to_string()),
            "o" => {
                p.cost = Some(
                    rest.trim()
                        .parse()
                        .map_err(|_| Error::SolverOutput(format!("bad cost line `{line}`")))?,
                )
            }
            "v" => {
                if !last_was_v {
                    v_lines.clear();
                }
                v_lines.push(rest);
            }
            _ => {}
        }
        last_was_v = tag == "v";
    }
    if let Some(s) = &p.status {
        if !matches!(
            s.as_str(),
            "OPTIMUM FOUND" | "SATISFIABLE" | "UNSATISFIABLE" | "UNKNOWN"
        ) {
            return Err(Error::SolverOutput(format!("unknown status `s {s}`")));
        }
    }
    if v_lines.is_empty() {
        return Ok(p);
    }
    let toks: Vec<&str> = v_lines.iter().flat_map(|l| l.split_whitespace()).collect();
    // a lone "1" reads the same either way; a lone "0" is only meaningful as bits
    let bitstring =
        toks.len() == 1 && (toks[0].len() > 1 || toks[0] == "0") && toks[0].bytes().all(|b| b == b'0' || b == b'1');
    let mut model = vec![false; n_vars];
    if bitstring {
        let bits = toks[0].as_bytes();
        if bits.len() < n_vars {
            return Err(Error::SolverOutput(format!(
                "bit-string model has {} values for {n_vars} variables",
                bits.len()
            )));
        }
        for (v, b) in bits.iter().take(n_vars).enumerate() {
            model[v] = *b == b'1';
        }
    } else {
        // solvers may omit variables that occur in no clause; those stay false
        // and the hard clauses are re-checked afterwards anyway
        for t in toks {
            let l: i64 = t
                .parse()
                .map_err(|_| Error::SolverOutput(format!("bad literal `{t}` in model")))?;
            if l == 0 {
                continue;
            }
            let v = l.unsigned_abs() as usize;
            if v > n_vars {
                // auxiliary variables introduced by the solver
                continue;
            }
            model[v - 1] = l > 0;
        }
    }
    p.model = Some(model);
    Ok(p)
}
