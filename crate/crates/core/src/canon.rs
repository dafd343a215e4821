//! Canonical labeling of patterns by individualization and refinement.
//!
//! Colors start from local edge-code counts and are refined by neighbour
//! color multisets until stable. When the coloring is not discrete, every
//! vertex of the first non-singleton cell is individualized in turn and the
//! search recurses. The canonical form is the least certificate over all
//! leaves. Vertices of a cell that are twins of one already tried are
//! skipped: swapping twins is an automorphism fixing everything
//! individualized so far, so their subtrees yield the same certificates.

use crate::pattern::{Pattern, CODE_IN, CODE_NONE, CODE_OUT, CODE_UNDIRECTED};

struct Canon<'a> {
    n: usize,
    codes: &'a [u8],
    best: Option<Vec<u8>>,
}

fn rank_signatures<T: Ord + Clone>(sigs: &[T]) -> (Vec<usize>, usize) {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    let colors = sigs.iter().map(|s| sorted.binary_search(s).expect("present")).collect();
    (colors, sorted.len())
}

impl Canon<'_> {
    fn code(&self, u: usize, v: usize) -> u8 {
        self.codes[u * self.n + v]
    }

    fn initial_colors(&self) -> Vec<usize> {
        let sigs: Vec<[usize; 3]> = (0..self.n)
            .map(|v| {
                let mut c = [0; 3];
                for w in 0..self.n {
                    match self.code(v, w) {
                        CODE_UNDIRECTED => c[0] += 1,
                        CODE_OUT => c[1] += 1,
                        CODE_IN => c[2] += 1,
                        _ => {}
                    }
                }
                c
            })
            .collect();
        rank_signatures(&sigs).0
    }

    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut count = {
            let mut c = colors.clone();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        loop {
            let sigs: Vec<(usize, Vec<(u8, usize)>)> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<(u8, usize)> = (0..self.n)
                        .filter(|&w| self.code(v, w) != CODE_NONE)
                        .map(|w| (self.code(v, w), colors[w]))
                        .collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let (next, next_count) = rank_signatures(&sigs);
            colors = next;
            if next_count == count {
                return colors;
            }
            count = next_count;
        }
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        let uv = self.code(u, v);
        if uv != CODE_NONE && uv != CODE_UNDIRECTED {
            return false;
        }
        (0..self.n).all(|w| w == u || w == v || self.code(u, w) == self.code(v, w))
    }

    fn certificate(&self, colors: &[usize]) -> Vec<u8> {
        let n = self.n;
        let mut at = vec![0; n];
        for (v, &c) in colors.iter().enumerate() {
            at[c] = v;
        }
        let mut cert = Vec::with_capacity(1 + n * n.saturating_sub(1) / 2);
        cert.push(n as u8);
        for a in 0..n {
            for b in a + 1..n {
                cert.push(self.code(at[a], at[b]));
            }
        }
        cert
    }

    fn search(&mut self, colors: Vec<usize>) {
        let colors = self.refine(colors);
        let mut sizes = vec![0usize; self.n];
        for &c in &colors {
            sizes[c] += 1;
        }
        let Some(cell) = (0..self.n).find(|&c| sizes[c] > 1) else {
            let cert = self.certificate(&colors);
            if self.best.as_ref().is_none_or(|b| cert < *b) {
                self.best = Some(cert);
            }
            return;
        };
        let members: Vec<usize> = (0..self.n).filter(|&v| colors[v] == cell).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &members {
            if tried.iter().any(|&u| self.twins(u, v)) {
                continue;
            }
            tried.push(v);
            let split: Vec<usize> = (0..self.n)
                .map(|w| 2 * colors[w] + usize::from(colors[w] == cell && w != v))
                .collect();
            self.search(rank_signatures(&split).0);
        }
    }
}

/// Canonical byte string of a pattern: equal strings exactly when the
/// patterns are related by a relabeling.
pub fn canonical_form(p: &Pattern) -> Vec<u8> {
    let codes = p.edge_codes();
    let mut canon = Canon {
        n: p.n(),
        codes: &codes,
        best: None,
    };
    if p.n() == 0 {
        return vec![0];
    }
    let init = canon.initial_colors();
    canon.search(init);
    canon.best.expect("search reaches at least one leaf")
}
