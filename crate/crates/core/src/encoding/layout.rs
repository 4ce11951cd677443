//! Deterministic variable numbering.
//!
//! Blocks are allocated in the fixed order `a, s, z, g, x, b-, b+`. Tree
//! nodes are heap-indexed: branch nodes `1..2^d`, leaves `2^d..2^(d+1)`.
//! Point indices and features are zero-based; cluster thresholds `c` run
//! over `1..k`; distance classes `w` are zero-based in the API.

use serde::Serialize;

use super::{Mode, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    /// Feature `j` splits branch node `t`.
    A {
        t: usize,
        j: usize,
    },
    /// Point `i` goes left at branch node `t`.
    S {
        i: usize,
        t: usize,
    },
    /// Point `i` lands in leaf `t`.
    Z {
        i: usize,
        t: usize,
    },
    /// Leaf `t` carries a label greater than `c`.
    G {
        t: usize,
        c: usize,
    },
    /// Point `i` carries a label greater than `c`.
    X {
        i: usize,
        c: usize,
    },
    BMinus(usize),
    BPlus(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableLayout {
    n_points: usize,
    n_features: usize,
    depth: Option<u32>,
    k: usize,
    mu: usize,
    objective: Objective,
    a_base: u32,
    s_base: u32,
    z_base: u32,
    g_base: u32,
    x_base: u32,
    bm_base: u32,
    bp_base: u32,
    n_vars: u32,
}

impl VariableLayout {
    pub fn new(n_points: usize, n_features: usize, mode: Mode, k: usize, mu: usize, objective: Objective) -> Self {
        assert!(k >= 1);
        let depth = match mode {
            Mode::Tree { depth } => Some(depth),
            Mode::Cc => None,
        };
        let (branches, leaves) = match depth {
            Some(d) => ((1usize << d) - 1, 1usize << d),
            None => (0, 0),
        };
        let mut next = 1u32;
        let mut alloc = |count: usize| {
            let base = next;
            next += count as u32;
            base
        };
        let a_base = alloc(branches * n_features);
        let s_base = alloc(n_points * branches);
        let z_base = alloc(n_points * leaves);
        let g_base = alloc(leaves * (k - 1));
        let x_base = alloc(n_points * (k - 1));
        let bm_base = alloc(mu);
        let bp_base = alloc(if objective == Objective::MdMs { mu } else { 0 });
        VariableLayout {
            n_points,
            n_features,
            depth,
            k,
            mu,
            objective,
            a_base,
            s_base,
            z_base,
            g_base,
            x_base,
            bm_base,
            bp_base,
            n_vars: next - 1,
        }
    }

    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn depth(&self) -> Option<u32> {
        self.depth
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    fn n_branches(&self) -> usize {
        self.depth.map_or(0, |d| (1usize << d) - 1)
    }

    fn n_leaves(&self) -> usize {
        self.depth.map_or(0, |d| 1usize << d)
    }

    fn first_leaf(&self) -> usize {
        self.n_branches() + 1
    }

    pub fn a(&self, t: usize, j: usize) -> i32 {
        debug_assert!((1..=self.n_branches()).contains(&t) && j < self.n_features);
        (self.a_base as usize + (t - 1) * self.n_features + j) as i32
    }

    pub fn s(&self, i: usize, t: usize) -> i32 {
        debug_assert!(i < self.n_points && (1..=self.n_branches()).contains(&t));
        (self.s_base as usize + i * self.n_branches() + (t - 1)) as i32
    }

    pub fn z(&self, i: usize, t: usize) -> i32 {
        debug_assert!(i < self.n_points && t >= self.first_leaf() && t < self.first_leaf() + self.n_leaves());
        (self.z_base as usize + i * self.n_leaves() + (t - self.first_leaf())) as i32
    }

    pub fn g(&self, t: usize, c: usize) -> i32 {
        debug_assert!(t >= self.first_leaf() && (1..self.k).contains(&c));
        (self.g_base as usize + (t - self.first_leaf()) * (self.k - 1) + (c - 1)) as i32
    }

    pub fn x(&self, i: usize, c: usize) -> i32 {
        debug_assert!(i < self.n_points && (1..self.k).contains(&c));
        (self.x_base as usize + i * (self.k - 1) + (c - 1)) as i32
    }

    pub fn bminus(&self, w: usize) -> i32 {
        debug_assert!(w < self.mu);
        (self.bm_base as usize + w) as i32
    }

    pub fn bplus(&self, w: usize) -> i32 {
        assert!(self.objective == Objective::MdMs, "b+ variables exist only for [MD,MS]");
        debug_assert!(w < self.mu);
        (self.bp_base as usize + w) as i32
    }

    /// Inverse of the allocators.
    pub fn symbol(&self, var: u32) -> Option<Symbol> {
        if var == 0 || var > self.n_vars {
            return None;
        }
        let (b, l, kk, f) = (self.n_branches(), self.n_leaves(), self.k - 1, self.n_features);
        let v = var as usize;
        let off = |base: u32| v - base as usize;
        Some(if var < self.s_base {
            let o = off(self.a_base);
            Symbol::A { t: o / f + 1, j: o % f }
        } else if var < self.z_base {
            let o = off(self.s_base);
            Symbol::S { i: o / b, t: o % b + 1 }
        } else if var < self.g_base {
            let o = off(self.z_base);
            Symbol::Z {
                i: o / l,
                t: o % l + self.first_leaf(),
            }
        } else if var < self.x_base {
            let o = off(self.g_base);
            Symbol::G {
                t: o / kk + self.first_leaf(),
                c: o % kk + 1,
            }
        } else if var < self.bm_base {
            let o = off(self.x_base);
            Symbol::X {
                i: o / kk,
                c: o % kk + 1,
            }
        } else if var < self.bp_base {
            Symbol::BMinus(off(self.bm_base))
        } else {
            Symbol::BPlus(off(self.bp_base))
        })
    }

    /// Sidecar map `{"a":[[t,j,id],...], ...}`. Classes are written
    /// one-based (`D_1..D_mu`); every other index as in the API.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize, Default)]
        struct Map {
            a: Vec<[usize; 3]>,
            s: Vec<[usize; 3]>,
            z: Vec<[usize; 3]>,
            g: Vec<[usize; 3]>,
            x: Vec<[usize; 3]>,
            bminus: Vec<[usize; 2]>,
            bplus: Vec<[usize; 2]>,
        }
        let mut m = Map::default();
        for v in 1..=self.n_vars {
            let id = v as usize;
            match self.symbol(v).expect("in range") {
                Symbol::A { t, j } => m.a.push([t, j, id]),
                Symbol::S { i, t } => m.s.push([i, t, id]),
                Symbol::Z { i, t } => m.z.push([i, t, id]),
                Symbol::G { t, c } => m.g.push([t, c, id]),
                Symbol::X { i, c } => m.x.push([i, c, id]),
                Symbol::BMinus(w) => m.bminus.push([w + 1, id]),
                Symbol::BPlus(w) => m.bplus.push([w + 1, id]),
            }
        }
        serde_json::to_value(m).expect("plain data")
    }
}
