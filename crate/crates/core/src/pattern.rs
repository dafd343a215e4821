//! Skeleton-plus-immoralities invariant of a DAG's Markov equivalence class.
//!
//! Two DAGs are Markov equivalent exactly when their patterns coincide, and
//! their models are isomorphic exactly when the patterns are related by a
//! relabeling. This is the deterministic oracle the randomized tests are
//! checked against.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dag::{Dag, Permutation};

/// No edge between the pair.
pub const CODE_NONE: u8 = 0;
/// Skeleton edge not taking part in any immorality.
pub const CODE_UNDIRECTED: u8 = 1;
/// `u -> v` is the arm of an immorality.
pub const CODE_OUT: u8 = 2;
/// `v -> u` is the arm of an immorality.
pub const CODE_IN: u8 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    n: usize,
    /// Unordered pairs stored as `(min, max)`.
    skeleton: BTreeSet<(usize, usize)>,
    /// `(i, k, j)` with `i < j`: the immorality `i -> k <- j`.
    immoralities: BTreeSet<(usize, usize, usize)>,
}

impl Pattern {
    pub fn of(g: &Dag) -> Pattern {
        let skeleton = g.edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        let mut immoralities = BTreeSet::new();
        for k in 0..g.n() {
            let pa = g.parents(k);
            for (a, &i) in pa.iter().enumerate() {
                for &j in &pa[a + 1..] {
                    if !g.adjacent(i, j) {
                        immoralities.insert((i.min(j), k, i.max(j)));
                    }
                }
            }
        }
        Pattern {
            n: g.n(),
            skeleton,
            immoralities,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn skeleton(&self) -> &BTreeSet<(usize, usize)> {
        &self.skeleton
    }

    pub fn immoralities(&self) -> &BTreeSet<(usize, usize, usize)> {
        &self.immoralities
    }

    pub fn skeleton_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.skeleton {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn relabel(&self, p: &Permutation) -> Pattern {
        let skeleton = self
            .skeleton
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (p.apply(u), p.apply(v));
                (a.min(b), a.max(b))
            })
            .collect();
        let immoralities = self
            .immoralities
            .iter()
            .map(|&(i, k, j)| {
                let (a, b) = (p.apply(i), p.apply(j));
                (a.min(b), p.apply(k), a.max(b))
            })
            .collect();
        Pattern {
            n: self.n,
            skeleton,
            immoralities,
        }
    }

    /// Row-major `n x n` matrix of edge codes: the pattern drawn as a
    /// partially directed graph whose directed edges are immorality arms.
    pub fn edge_codes(&self) -> Vec<u8> {
        let n = self.n;
        let mut codes = vec![CODE_NONE; n * n];
        for &(u, v) in &self.skeleton {
            codes[u * n + v] = CODE_UNDIRECTED;
            codes[v * n + u] = CODE_UNDIRECTED;
        }
        for &(i, k, j) in &self.immoralities {
            for t in [i, j] {
                codes[t * n + k] = CODE_OUT;
                codes[k * n + t] = CODE_IN;
            }
        }
        codes
    }
}

pub fn pattern(g: &Dag) -> Pattern {
    Pattern::of(g)
}

/// Search for a relabeling carrying `p1` onto `p2`.
///
/// Candidates are restricted to maps preserving skeleton degree; the search
/// visits images in lexicographic order, so the result is deterministic.
pub fn pattern_isomorphic(p1: &Pattern, p2: &Pattern) -> Option<Permutation> {
    let n = p1.n;
    if n != p2.n || p1.skeleton.len() != p2.skeleton.len() || p1.immoralities.len() != p2.immoralities.len() {
        return None;
    }
    let (d1, d2) = (p1.skeleton_degrees(), p2.skeleton_degrees());
    let mut s1 = d1.clone();
    let mut s2 = d2.clone();
    s1.sort_unstable();
    s2.sort_unstable();
    if s1 != s2 {
        return None;
    }
    let (c1, c2) = (p1.edge_codes(), p2.edge_codes());

    struct Search<'a> {
        n: usize,
        d1: &'a [usize],
        d2: &'a [usize],
        c1: &'a [u8],
        c2: &'a [u8],
        p1: &'a Pattern,
        p2: &'a Pattern,
        map: Vec<usize>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        fn go(&mut self, u: usize) -> Option<Permutation> {
            if u == self.n {
                let p = Permutation::new(self.map.clone()).expect("bijection by construction");
                return (self.p1.relabel(&p) == *self.p2).then_some(p);
            }
            for v in 0..self.n {
                if self.used[v] || self.d1[u] != self.d2[v] {
                    continue;
                }
                let n = self.n;
                let consistent = (0..u).all(|w| {
                    let x = self.map[w];
                    self.c1[u * n + w] == self.c2[v * n + x]
                });
                if !consistent {
                    continue;
                }
                self.map[u] = v;
                self.used[v] = true;
                if let Some(p) = self.go(u + 1) {
                    return Some(p);
                }
                self.used[v] = false;
            }
            None
        }
    }

    Search {
        n,
        d1: &d1,
        d2: &d2,
        c1: &c1,
        c2: &c2,
        p1,
        p2,
        map: vec![0; n],
        used: vec![false; n],
    }
    .go(0)
}
