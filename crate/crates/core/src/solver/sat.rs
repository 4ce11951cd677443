//! A compact CDCL SAT solver.
//!
//! Two-watched-literal propagation, first-UIP learning with recursive clause
//! minimization, VSIDS with phase saving, Luby restarts and LBD-based
//! clause deletion. Besides clauses it supports one native at-most-`b`
//! constraint over a set of literals, which the MaxSAT loop uses as its
//! cost bound; the bound can be tightened between calls.

use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, negative: bool) -> Lit {
        Lit(var << 1 | negative as u32)
    }

    /// From a DIMACS literal (`v` or `-v`, `v >= 1`).
    pub fn from_dimacs(l: i32) -> Lit {
        debug_assert!(l != 0);
        Lit::new(l.unsigned_abs() - 1, l < 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var() as i32 + 1;
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    #[inline]
    pub fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Interrupted,
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    None,
    Clause(u32),
    Card,
}

#[derive(Debug, Clone, Copy)]
enum Conflict {
    Clause(u32),
    Card,
}

#[derive(Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f32,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

#[derive(Debug)]
struct Card {
    lits: Vec<Lit>,
    member: Vec<bool>,
    bound: usize,
    count: usize,
}

/// Binary max-heap over variables keyed by activity.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] >= 0
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            self.up(self.pos[v as usize] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pv = self.heap[parent];
            if act[pv as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = pv;
            self.pos[pv as usize] = i as i32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            let cv = self.heap[child];
            if act[cv as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = i as i32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let (mut size, mut seq) = (1u64, 0i32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

#[derive(Debug)]
pub struct Solver {
    n_vars: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f32,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<u8>,
    card: Option<Card>,
    ok: bool,
    n_learnts: usize,
    max_learnts: f64,
    model: Vec<bool>,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

impl Solver {
    pub fn new(n_vars: usize) -> Self {
        let mut s = Solver {
            n_vars: 0,
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail_pos: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            card: None,
            ok: true,
            n_learnts: 0,
            max_learnts: 0.0,
            model: Vec::new(),
            conflicts: 0,
            decisions: 0,
            propagations: 0,
        };
        for _ in 0..n_vars {
            s.new_var();
        }
        s
    }

    pub fn new_var(&mut self) -> u32 {
        let v = self.n_vars as u32;
        self.n_vars += 1;
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(Reason::None);
        self.trail_pos.push(0);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(0);
        self.heap.pos.push(-1);
        self.heap.insert(v, &self.activity);
        v
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Preferred polarity for the first decision on `var`.
    pub fn set_phase(&mut self, var: u32, value: bool) {
        self.phase[var as usize] = value;
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[l.var() as usize];
        if l.is_negative() {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Reason) {
        let v = l.var() as usize;
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.is_negative() { FALSE } else { TRUE };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
    }

    /// Adds a clause at decision level zero. Returns `false` once the
    /// formula is known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        let mut kept = Vec::with_capacity(c.len());
        for (i, &l) in c.iter().enumerate() {
            if i + 1 < c.len() && c[i + 1] == !l {
                return true;
            }
            match self.value(l) {
                TRUE => return true,
                FALSE => {}
                _ => kept.push(l),
            }
        }
        match kept.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(kept[0], Reason::None);
                self.ok = self.propagate().is_none();
                self.ok
            }
            _ => {
                self.attach(kept, false, 0);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(Watcher { cref, blocker: lits[1] });
        self.watches[lits[1].idx()].push(Watcher { cref, blocker: lits[0] });
        if learnt {
            self.n_learnts += 1;
        }
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            lbd,
            activity: 0.0,
        });
        cref
    }

    /// Installs the at-most constraint over `lits` with bound `lits.len()`
    /// (vacuous until tightened).
    pub fn set_at_most(&mut self, lits: Vec<Lit>) {
        let mut member = vec![false; 2 * self.n_vars];
        for &l in &lits {
            member[l.idx()] = true;
        }
        let bound = lits.len();
        self.card = Some(Card {
            lits,
            member,
            bound,
            count: 0,
        });
        self.cancel_until(0);
        let count = self
            .trail
            .iter()
            .filter(|l| self.card.as_ref().unwrap().member[l.idx()])
            .count();
        self.card.as_mut().unwrap().count = count;
    }

    /// Lowers the at-most bound. Returns `false` if this makes the formula
    /// unsatisfiable at level zero.
    pub fn tighten_at_most(&mut self, bound: usize) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let Some(card) = self.card.as_mut() else {
            return true;
        };
        card.bound = bound.min(card.bound);
        // every level-zero literal has been processed, so `count` is exact
        if card.count > card.bound {
            self.ok = false;
            return false;
        }
        if card.count == card.bound {
            // `lits` may hold a literal and its negation
            for l in card.lits.clone() {
                if self.value(l) == UNDEF {
                    self.enqueue(!l, Reason::Card);
                }
            }
            self.ok = self.propagate().is_none();
        }
        self.ok
    }

    fn propagate(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;

            if let Some(card) = self.card.as_mut() {
                if card.member[p.idx()] {
                    card.count += 1;
                    if card.count > card.bound {
                        return Some(Conflict::Card);
                    }
                    if card.count == card.bound {
                        let lits = std::mem::take(&mut card.lits);
                        for &l in &lits {
                            if self.value(l) == UNDEF {
                                self.enqueue(!l, Reason::Card);
                            }
                        }
                        self.card.as_mut().unwrap().lits = lits;
                    }
                }
            }

            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = Watcher {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l.idx()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == FALSE {
                    conflict = Some(Conflict::Clause(w.cref));
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Reason::Clause(w.cref));
                }
            }
            ws.truncate(j);
            // watchers pushed onto false_lit meanwhile cannot exist: a clause
            // never moves its watch to a false literal
            debug_assert!(self.watches[false_lit.idx()].is_empty());
            self.watches[false_lit.idx()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// Literals of the reason for `var`, implied literal first.
    fn reason_lits(&self, var: u32) -> Vec<Lit> {
        match self.reason[var as usize] {
            Reason::None => Vec::new(),
            Reason::Clause(c) => self.clauses[c as usize].lits.clone(),
            Reason::Card => {
                let card = self.card.as_ref().expect("card reason without card");
                let pos = self.trail_pos[var as usize];
                let implied = Lit::new(var, self.assigns[var as usize] == FALSE);
                let mut out = vec![implied];
                out.extend(
                    card.lits
                        .iter()
                        .filter(|&&l| self.value(l) == TRUE && self.trail_pos[l.var() as usize] < pos)
                        .map(|&l| !l),
                );
                out
            }
        }
    }

    fn conflict_lits(&self, c: Conflict) -> Vec<Lit> {
        match c {
            Conflict::Clause(cref) => self.clauses[cref as usize].lits.clone(),
            Conflict::Card => {
                let card = self.card.as_ref().expect("card conflict without card");
                card.lits
                    .iter()
                    .filter(|&&l| self.value(l) == TRUE && (self.trail_pos[l.var() as usize] as usize) < self.qhead)
                    .map(|&l| !l)
                    .collect()
            }
        }
    }

    fn bump_var(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, confl: Conflict) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut path_c = 0usize;
        let mut index = self.trail.len();
        let mut lits = self.conflict_lits(confl);
        if let Conflict::Clause(c) = confl {
            self.bump_clause(c);
        }
        let mut skip_first = false;
        let p = loop {
            for (n, &q) in lits.iter().enumerate() {
                if skip_first && n == 0 {
                    continue;
                }
                let v = q.var() as usize;
                if self.seen[v] == 0 && self.level[v] > 0 {
                    self.bump_var(q.var());
                    self.seen[v] = 1;
                    if self.level[v] as usize >= self.decision_level() {
                        path_c += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] != 0 {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var() as usize] = 0;
            path_c -= 1;
            if path_c == 0 {
                break p;
            }
            if let Reason::Clause(c) = self.reason[p.var() as usize] {
                self.bump_clause(c);
            }
            lits = self.reason_lits(p.var());
            skip_first = true;
        };
        learnt[0] = !p;

        // recursive minimization
        let abstract_levels = learnt[1..]
            .iter()
            .fold(0u32, |acc, l| acc | 1 << (self.level[l.var() as usize] & 31));
        let mut to_clear: Vec<u32> = learnt.iter().map(|l| l.var()).collect();
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            if matches!(self.reason[l.var() as usize], Reason::None)
                || !self.redundant(l, abstract_levels, &mut to_clear)
            {
                kept.push(l);
            }
        }
        for v in to_clear {
            self.seen[v as usize] = 0;
        }
        let mut learnt = kept;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var() as usize] as usize
        };
        (learnt, bt)
    }

    fn redundant(&mut self, p: Lit, abstract_levels: u32, to_clear: &mut Vec<u32>) -> bool {
        let mut stack = vec![p];
        let top = to_clear.len();
        while let Some(q) = stack.pop() {
            let reason = self.reason_lits(q.var());
            for &l in &reason[1..] {
                let v = l.var() as usize;
                if self.seen[v] != 0 || self.level[v] == 0 {
                    continue;
                }
                let has_reason = !matches!(self.reason[v], Reason::None);
                if has_reason && abstract_levels & (1 << (self.level[v] & 31)) != 0 {
                    self.seen[v] = 1;
                    stack.push(l);
                    to_clear.push(l.var());
                } else {
                    for &u in &to_clear[top..] {
                        self.seen[u as usize] = 0;
                    }
                    to_clear.truncate(top);
                    return false;
                }
            }
        }
        true
    }

    fn lbd(&mut self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var() as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for idx in (start..self.trail.len()).rev() {
            let l = self.trail[idx];
            let v = l.var() as usize;
            if let Some(card) = self.card.as_mut() {
                if idx < self.qhead && card.member[l.idx()] {
                    card.count -= 1;
                }
            }
            self.assigns[v] = UNDEF;
            self.reason[v] = Reason::None;
            self.phase[v] = !l.is_negative();
            self.heap.insert(l.var(), &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.qhead.min(start);
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&c| {
                let cl = &self.clauses[c as usize];
                cl.learnt && !cl.deleted && cl.lits.len() > 2 && cl.lbd > 2
            })
            .filter(|&c| {
                let first = self.clauses[c as usize].lits[0];
                let v = first.var() as usize;
                !(self.value(first) == TRUE && self.reason[v] == Reason::Clause(c))
            })
            .collect();
        cands.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd.cmp(&ca.lbd).then(ca.activity.total_cmp(&cb.activity))
        });
        for &c in &cands[..cands.len() / 2] {
            let cl = &mut self.clauses[c as usize];
            cl.deleted = true;
            cl.lits = Vec::new();
            self.n_learnts -= 1;
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                return Some(Lit::new(v, !self.phase[v as usize]));
            }
        }
        None
    }

    /// Runs the search under `assumptions`. On `Sat` the model is available
    /// through [`Solver::model`].
    pub fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> SatResult {
        if !self.ok {
            return SatResult::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SatResult::Unsat;
        }
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        }
        let mut restart = 0u64;
        loop {
            let budget = (luby(2.0, restart) * 100.0) as u64;
            restart += 1;
            match self.search(budget, assumptions, deadline) {
                Some(r) => {
                    if r == SatResult::Sat {
                        self.model = self.assigns.iter().map(|&a| a == TRUE).collect();
                    }
                    self.cancel_until(0);
                    return r;
                }
                None => self.cancel_until(0),
            }
        }
    }

    fn search(&mut self, budget: u64, assumptions: &[Lit], deadline: Option<Instant>) -> Option<SatResult> {
        let mut local = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                local += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SatResult::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], Reason::None);
                } else {
                    let lbd = self.lbd(&learnt);
                    let first = learnt[0];
                    let cref = self.attach(learnt, true, lbd);
                    self.bump_clause(cref);
                    self.enqueue(first, Reason::Clause(cref));
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if self.conflicts.is_multiple_of(256) {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            return Some(SatResult::Interrupted);
                        }
                    }
                }
            } else {
                if local >= budget {
                    return None;
                }
                if self.n_learnts as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let p = assumptions[self.decision_level()];
                    match self.value(p) {
                        TRUE => self.trail_lim.push(self.trail.len()),
                        FALSE => return Some(SatResult::Unsat),
                        _ => {
                            next = Some(p);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(p) => p,
                    None => {
                        self.decisions += 1;
                        if self.decisions.is_multiple_of(1024) {
                            if let Some(d) = deadline {
                                if Instant::now() >= d {
                                    return Some(SatResult::Interrupted);
                                }
                            }
                        }
                        match self.pick_branch() {
                            Some(l) => l,
                            None => return Some(SatResult::Sat),
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, Reason::None);
            }
        }
    }

    /// Assignment found by the last satisfiable call (`model()[v]` for
    /// zero-based variable `v`).
    pub fn model(&self) -> &[bool] {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(c: &[i32]) -> Vec<Lit> {
        c.iter().map(|&l| Lit::from_dimacs(l)).collect()
    }

    fn brute_sat(n: usize, clauses: &[Vec<i32>]) -> bool {
        (0..1u32 << n).any(|m| {
            clauses
                .iter()
                .all(|c| c.iter().any(|&l| ((m >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0)))
        })
    }

    #[test]
    fn literal_encoding() {
        let l = Lit::from_dimacs(-3);
        assert_eq!(l.var(), 2);
        assert!(l.is_negative());
        assert_eq!((!l).to_dimacs(), 3);
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 4 pigeons into 3 holes
        let var = |p: i32, h: i32| p * 3 + h + 1;
        let mut s = Solver::new(12);
        for p in 0..4 {
            assert!(s.add_clause(&lits(&[var(p, 0), var(p, 1), var(p, 2)])));
        }
        for h in 0..3 {
            for p in 0..4 {
                for q in p + 1..4 {
                    s.add_clause(&lits(&[-var(p, h), -var(q, h)]));
                }
            }
        }
        assert_eq!(s.solve(&[], None), SatResult::Unsat);
    }

    #[test]
    fn assumptions_do_not_stick() {
        let mut s = Solver::new(2);
        s.add_clause(&lits(&[1, 2]));
        assert_eq!(s.solve(&lits(&[-1, -2]), None), SatResult::Unsat);
        assert_eq!(s.solve(&lits(&[-1]), None), SatResult::Sat);
        assert!(s.model()[1]);
    }

    #[test]
    fn at_most_bound() {
        let mut s = Solver::new(4);
        s.add_clause(&lits(&[1, 2]));
        s.add_clause(&lits(&[3, 4]));
        s.set_at_most(lits(&[1, 2, 3, 4]));
        assert!(s.tighten_at_most(2));
        assert_eq!(s.solve(&[], None), SatResult::Sat);
        assert!(s.model().iter().filter(|&&b| b).count() <= 2);
        assert!(!s.tighten_at_most(1) || s.solve(&[], None) == SatResult::Unsat);
    }

    #[test]
    fn random_3sat_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(3..=10);
            let m = rng.gen_range(1..=50);
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=n) as i32;
                            if rng.gen_bool(0.5) {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let mut s = Solver::new(n);
            for c in &clauses {
                s.add_clause(&lits(c));
            }
            let r = s.solve(&[], None);
            assert_eq!(r == SatResult::Sat, brute_sat(n, &clauses), "{clauses:?}");
            if r == SatResult::Sat {
                let m = s.model();
                assert!(clauses
                    .iter()
                    .all(|c| c.iter().any(|&l| m[l.unsigned_abs() as usize - 1] == (l > 0))));
            }
        }
    }
}
