//! Directed acyclic graphs, relabelings and topological orders.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A DAG on nodes `0..n`. Edges are `(parent, child)` pairs, kept sorted.
///
/// Acyclicity is checked once at construction; every other operation in the
/// crate relies on it.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DagJson", into = "DagJson")]
pub struct Dag {
    n: usize,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

/// Wire form: `{"n": 3, "edges": [[0, 1], [1, 2]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<DagJson> for Dag {
    type Error = Error;
    fn try_from(raw: DagJson) -> Result<Self> {
        Dag::new(raw.n, raw.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Dag> for DagJson {
    fn from(g: Dag) -> Self {
        DagJson {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dag(n={}, {:?})", self.n, self.edges)
    }
}

impl Dag {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !set.insert((u, v)) {
                return Err(Error::DuplicateEdge(u, v));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(u, v) in &edges {
            parents[v].push(u);
            children[u].push(v);
        }
        let g = Dag {
            n,
            edges,
            parents,
            children,
        };
        g.kahn().ok_or(Error::Cycle)?;
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Dag::new(n, []).expect("edgeless graph is acyclic")
    }

    /// The complete DAG `i -> j` for all `i < j`.
    pub fn complete(n: usize) -> Self {
        Dag::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).expect("acyclic")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.parents[v].binary_search(&u).is_ok()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    /// Number of neighbours in the underlying undirected graph.
    pub fn skeleton_degree(&self, v: usize) -> usize {
        self.parents[v].len() + self.children[v].len()
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node, n: self.n })
        }
    }

    // Kahn's algorithm, always releasing the smallest ready node.
    fn kahn(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    /// Topological order, smallest id first among ready nodes.
    pub fn topo_sort(&self) -> TopoOrder {
        TopoOrder {
            order: self.kahn().expect("validated acyclic at construction"),
        }
    }

    /// Nodes reachable from `v` by a nonempty directed path.
    pub fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = self.children[v].clone();
        while let Some(u) = stack.pop() {
            if seen.insert(u) {
                stack.extend_from_slice(&self.children[u]);
            }
        }
        seen
    }

    /// All `j != v` with no directed path `v -> ... -> j`.
    pub fn nondescendants(&self, v: usize) -> BTreeSet<usize> {
        let desc = self.descendants(v);
        (0..self.n).filter(|&j| j != v && !desc.contains(&j)).collect()
    }

    /// Nodes with a directed path into some member of `set`, plus `set` itself.
    pub fn ancestors_of_set(&self, set: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.n];
        let mut stack: Vec<usize> = set.to_vec();
        while let Some(u) = stack.pop() {
            if !mark[u] {
                mark[u] = true;
                stack.extend_from_slice(&self.parents[u]);
            }
        }
        mark
    }

    /// Relabel nodes: edge `(u, v)` becomes `(p(u), p(v))`.
    pub fn apply_permutation(&self, p: &Permutation) -> Result<Dag> {
        if p.len() != self.n {
            return Err(Error::SizeMismatch(format!(
                "permutation on {} points applied to a graph on {} nodes",
                p.len(),
                self.n
            )));
        }
        Dag::new(self.n, self.edges.iter().map(|&(u, v)| (p.apply(u), p.apply(v))))
    }

    /// True when the underlying undirected graph has no cycles.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Random DAG with exactly `m` edges: a random node order, then `m`
    /// distinct forward pairs.
    pub fn random_with_edges<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Dag> {
        let max = n * n.saturating_sub(1) / 2;
        if m > max {
            return Err(Error::Parameter(format!("{m} edges do not fit in a DAG on {n} nodes")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let (chosen, _) = pairs.partial_shuffle(rng, m);
        Dag::new(n, chosen.iter().map(|&(a, b)| (order[a], order[b])))
    }

    /// Random DAG where each forward pair of a random order is an edge with
    /// probability `p`.
    pub fn random_bernoulli<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Dag {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    edges.push((order[i], order[j]));
                }
            }
        }
        Dag::new(n, edges).expect("forward edges of an order are acyclic")
    }
}

/// Every DAG on `n` labeled nodes (`n <= 5`), in a fixed order.
pub fn all_dags(n: usize) -> Result<Vec<Dag>> {
    if n > 5 {
        return Err(Error::TooLarge {
            what: "exhaustive DAG enumeration",
            size: n,
            max: 5,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match c % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(g) = Dag::new(n, edges) {
            out.push(g);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopoOrder {
    order: Vec<usize>,
}

impl TopoOrder {
    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// `position[v]` is the index of `v` in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }

    pub fn is_valid_for(&self, g: &Dag) -> bool {
        if self.order.len() != g.n() {
            return false;
        }
        let mut seen = vec![false; g.n()];
        for &v in &self.order {
            if v >= g.n() || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        let pos = self.positions();
        g.edges().iter().all(|&(u, v)| pos[u] < pos[v])
    }
}

/// A bijection of `0..n`; `map[u]` is the image of `u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            if x >= map.len() || seen[x] {
                return Err(Error::NotPermutation(format!("{map:?}")));
            }
            seen[x] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    /// Transposition of `a` and `b` on `n` points.
    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let mut p = Permutation::identity(n);
        p.map.swap(a, b);
        p
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, u: usize) -> usize {
        self.map[u]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    /// `self.then(other)` maps `u` to `other(self(u))`.
    pub fn then(&self, other: &Permutation) -> Self {
        Permutation {
            map: self.map.iter().map(|&x| other.map[x]).collect(),
        }
    }
}

/// Visit all permutations of `0..n` in lexicographic order.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        f(&p);
        // next_permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}
