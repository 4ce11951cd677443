//! Weighted partial MaxSAT formulas and their DIMACS WCNF form.

use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A DIMACS literal: `v` or `-v` for variable `v >= 1`.
pub type Lit = i32;

/// Hard clauses plus unit-weight soft clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WcnfFormula {
    pub n_vars: u32,
    pub hard: Vec<Vec<Lit>>,
    pub soft: Vec<Vec<Lit>>,
}

impl WcnfFormula {
    pub fn new(n_vars: u32) -> Self {
        WcnfFormula {
            n_vars,
            ..Default::default()
        }
    }

    /// Weight written on hard clauses: one more than the total soft weight.
    pub fn top(&self) -> u64 {
        self.soft.len() as u64 + 1
    }

    pub fn n_clauses(&self) -> usize {
        self.hard.len() + self.soft.len()
    }

    pub fn add_hard(&mut self, clause: Vec<Lit>) {
        debug_assert!(well_formed(&clause, self.n_vars), "bad clause {clause:?}");
        self.hard.push(clause);
    }

    pub fn add_soft(&mut self, clause: Vec<Lit>) {
        debug_assert!(well_formed(&clause, self.n_vars), "bad clause {clause:?}");
        self.soft.push(clause);
    }

    /// Checks every structural invariant: non-empty clauses, literals in
    /// range, no clause holding both polarities of a variable.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (kind, list) in [("hard", &self.hard), ("soft", &self.soft)] {
            for (n, c) in list.iter().enumerate() {
                if !well_formed(c, self.n_vars) {
                    return Err(format!("{kind} clause {n} is malformed: {c:?}"));
                }
            }
        }
        Ok(())
    }

    /// Number of soft clauses falsified by `model` (`model[v - 1]` is the
    /// value of variable `v`).
    pub fn cost(&self, model: &[bool]) -> usize {
        self.soft.iter().filter(|c| !satisfied(c, model)).count()
    }

    /// Index of the first hard clause `model` falsifies.
    pub fn first_violated_hard(&self, model: &[bool]) -> Option<usize> {
        self.hard.iter().position(|c| !satisfied(c, model))
    }

    /// Writes the formula as DIMACS WCNF. Output depends only on the formula.
    pub fn write_dimacs<W: Write>(&self, mut w: W) -> io::Result<()> {
        let top = self.top();
        writeln!(w, "p wcnf {} {} {}", self.n_vars, self.n_clauses(), top)?;
        for (weight, list) in [(top, &self.hard), (1, &self.soft)] {
            for clause in list {
                write!(w, "{weight}")?;
                for lit in clause {
                    write!(w, " {lit}")?;
                }
                writeln!(w, " 0")?;
            }
        }
        w.flush()
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses DIMACS WCNF with a `p wcnf` header. Clauses weighted with the
    /// top weight are hard; everything else must carry weight 1.
    pub fn read_dimacs<R: BufRead>(r: R) -> Result<Self> {
        let mut f: Option<(WcnfFormula, u64)> = None;
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<wcnf>", e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let syntax = |msg: &str| Error::SolverOutput(format!("wcnf line {}: {msg}", n + 1));
            if let Some(rest) = line.strip_prefix("p ") {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 4 || toks[0] != "wcnf" {
                    return Err(syntax("expected `p wcnf <vars> <clauses> <top>`"));
                }
                let vars = toks[1].parse().map_err(|_| syntax("bad variable count"))?;
                let top = toks[3].parse().map_err(|_| syntax("bad top weight"))?;
                f = Some((WcnfFormula::new(vars), top));
                continue;
            }
            let (formula, top) = f.as_mut().ok_or_else(|| syntax("clause before header"))?;
            let mut toks = line.split_whitespace();
            let weight: u64 = match toks.next() {
                Some("h") => *top,
                Some(t) => t.parse().map_err(|_| syntax("bad weight"))?,
                None => return Err(syntax("bad weight")),
            };
            let mut clause = Vec::new();
            for t in toks {
                let lit: Lit = t.parse().map_err(|_| syntax("bad literal"))?;
                if lit == 0 {
                    break;
                }
                if lit.unsigned_abs() > formula.n_vars {
                    return Err(syntax("literal out of range"));
                }
                clause.push(lit);
            }
            if weight == *top {
                formula.hard.push(clause);
            } else if weight == 1 {
                formula.soft.push(clause);
            } else {
                return Err(syntax("only unit soft weights are supported"));
            }
        }
        f.map(|(formula, _)| formula)
            .ok_or_else(|| Error::SolverOutput("missing `p wcnf` header".into()))
    }
}

pub(crate) fn satisfied(clause: &[Lit], model: &[bool]) -> bool {
    clause.iter().any(|&l| model[l.unsigned_abs() as usize - 1] == (l > 0))
}

fn well_formed(clause: &[Lit], n_vars: u32) -> bool {
    if clause.is_empty() || !clause.iter().all(|&l| l != 0 && l.unsigned_abs() <= n_vars) {
        return false;
    }
    if clause.len() <= 16 {
        return clause
            .iter()
            .enumerate()
            .all(|(a, &l)| clause[a + 1..].iter().all(|&m| m != -l));
    }
    let lits: std::collections::HashSet<Lit> = clause.iter().copied().collect();
    !clause.iter().any(|l| lits.contains(&-l))
}

/// Writes `f` to `path` in DIMACS WCNF.
pub fn emit_wcnf(f: &WcnfFormula, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_dimacs(io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
