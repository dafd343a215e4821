//! Conditional-independence statements of a DAG.
//!
//! Statements are pairwise (`i ⊥⊥ j | K` for single nodes `i`, `j`); a
//! Gaussian set-valued statement holds iff all its pairwise pieces do, so
//! nothing is lost.

use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::error::{Error, Result};

/// Largest node count for operations that enumerate every conditioning set.
pub const MAX_ENUMERATION_NODES: usize = 12;

/// `i ⊥⊥ j | cond`, with `cond` sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CiStatement {
    pub i: usize,
    pub j: usize,
    pub cond: Vec<usize>,
}

impl CiStatement {
    pub fn new(i: usize, j: usize, mut cond: Vec<usize>) -> Result<Self> {
        cond.sort_unstable();
        cond.dedup();
        if i == j || cond.contains(&i) || cond.contains(&j) {
            return Err(Error::IndexOverlap(format!("{i} ⊥⊥ {j} | {cond:?}")));
        }
        Ok(CiStatement { i, j, cond })
    }

    /// Same statement with `i < j`.
    pub fn normalized(&self) -> Self {
        CiStatement {
            i: self.i.min(self.j),
            j: self.i.max(self.j),
            cond: self.cond.clone(),
        }
    }

    pub fn minor(&self) -> MinorSpec {
        MinorSpec::from_statement(self)
    }

    fn max_node(&self) -> usize {
        self.cond.iter().copied().chain([self.i, self.j]).max().unwrap_or(0)
    }
}

/// Row and column index lists of the determinant `|σ_{iK,jK}|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MinorSpec {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl MinorSpec {
    /// Rows `i, K...`, columns `j, K...` with `K` ascending.
    pub fn from_statement(s: &CiStatement) -> Self {
        let mut rows = vec![s.i];
        rows.extend_from_slice(&s.cond);
        let mut cols = vec![s.j];
        cols.extend_from_slice(&s.cond);
        MinorSpec { rows, cols }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Sorted row and column sets with the pair itself ordered, so that two
    /// specs describing the same determinant up to sign and transposition
    /// compare equal.
    pub fn unordered_key(&self) -> (Vec<usize>, Vec<usize>) {
        let mut r = self.rows.clone();
        let mut c = self.cols.clone();
        r.sort_unstable();
        c.sort_unstable();
        if r <= c {
            (r, c)
        } else {
            (c, r)
        }
    }

    /// Render with 1-based labels as `|σ_{12,23}|`.
    pub fn render_one_based(&self) -> String {
        let fmt = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join("");
        format!("|σ_{{{},{}}}|", fmt(&self.rows), fmt(&self.cols))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeRelationKind {
    /// `σ_ij = 0`
    Linear,
    /// `σ_ij - σ_ik σ_kj = 0`
    Quadratic,
}

/// Low-degree generator of a tree model's imposed relations, for
/// unit-diagonal points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeRelation {
    pub kind: TreeRelationKind,
    pub i: usize,
    pub j: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
}

fn check_query(g: &Dag, i: usize, j: usize, cond: &[usize]) -> Result<()> {
    for &v in cond.iter().chain([&i, &j]) {
        g.check_node(v)?;
    }
    if i == j || cond.contains(&i) || cond.contains(&j) {
        return Err(Error::IndexOverlap(format!("{i} ⊥⊥ {j} | {cond:?}")));
    }
    Ok(())
}

/// d-separation of `i` and `j` given `cond`.
///
/// Reachability over (node, direction) states: a trail may pass a
/// non-collider outside `cond`, and a collider that is in `cond` or has a
/// descendant there.
pub fn d_separated(g: &Dag, i: usize, j: usize, cond: &[usize]) -> Result<bool> {
    check_query(g, i, j, cond)?;
    Ok(!reachable(g, i, cond)[j])
}

// true at v iff some active trail connects `src` and v.
fn reachable(g: &Dag, src: usize, cond: &[usize]) -> Vec<bool> {
    let n = g.n();
    let mut in_cond = vec![false; n];
    for &c in cond {
        in_cond[c] = true;
    }
    let anc = g.ancestors_of_set(cond);
    // state: (node, arrived_from_child) ; arrived_from_child = travelling up
    let mut visited = vec![[false; 2]; n];
    let mut reach = vec![false; n];
    let mut stack = vec![(src, true)];
    while let Some((v, up)) = stack.pop() {
        if visited[v][up as usize] {
            continue;
        }
        visited[v][up as usize] = true;
        if !in_cond[v] {
            reach[v] = true;
        }
        if up {
            if !in_cond[v] {
                stack.extend(g.parents(v).iter().map(|&p| (p, true)));
                stack.extend(g.children(v).iter().map(|&c| (c, false)));
            }
        } else {
            if !in_cond[v] {
                stack.extend(g.children(v).iter().map(|&c| (c, false)));
            }
            if anc[v] {
                stack.extend(g.parents(v).iter().map(|&p| (p, true)));
            }
        }
    }
    reach[src] = false;
    reach
}

/// Local Markov relations restricted to predecessors in the topological
/// order: for node `i` with parents `K`, one statement `(i, j, K)` for each
/// earlier non-parent `j`.
pub fn toposorted_imposed(g: &Dag) -> Vec<CiStatement> {
    let order = g.topo_sort();
    let order = order.as_slice();
    let mut out = Vec::new();
    for (p, &i) in order.iter().enumerate() {
        let pa = g.parents(i);
        for &j in &order[..p] {
            if !pa.contains(&j) {
                out.push(CiStatement {
                    i,
                    j,
                    cond: pa.to_vec(),
                });
            }
        }
    }
    out
}

pub fn imposed_minors(g: &Dag) -> Vec<MinorSpec> {
    toposorted_imposed(g).iter().map(MinorSpec::from_statement).collect()
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_NODES {
        return Err(Error::TooLarge {
            what: "conditioning-set enumeration",
            size: n,
            max: MAX_ENUMERATION_NODES,
        });
    }
    Ok(())
}

/// Every pairwise statement implied by d-separation, with `i < j`, sorted.
pub fn implied_relations(g: &Dag) -> Result<Vec<CiStatement>> {
    marginal_implied(g, &[])
}

/// Implied statements that avoid every node in `removed`.
pub fn marginal_implied(g: &Dag, removed: &[usize]) -> Result<Vec<CiStatement>> {
    let n = g.n();
    guard(n)?;
    for &v in removed {
        g.check_node(v)?;
    }
    let mut out = Vec::new();
    let keep: Vec<usize> = (0..n).filter(|v| !removed.contains(v)).collect();
    for (a, &i) in keep.iter().enumerate() {
        for &j in &keep[a + 1..] {
            let rest: Vec<usize> = keep.iter().copied().filter(|&v| v != i && v != j).collect();
            for mask in 0u32..(1 << rest.len()) {
                let cond: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &v)| v)
                    .collect();
                if !reachable(g, i, &cond)[j] {
                    out.push(CiStatement { i, j, cond });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Reduced generators of a tree (or forest) model: for every toposorted
/// pair, the smallest subset of `pa(i)` that d-separates it.
pub fn tree_reduced_generators(t: &Dag) -> Result<Vec<TreeRelation>> {
    if !t.is_forest() {
        return Err(Error::NotForest);
    }
    let mut out = Vec::new();
    for s in toposorted_imposed(t) {
        if d_separated(t, s.i, s.j, &[])? {
            out.push(TreeRelation {
                kind: TreeRelationKind::Linear,
                i: s.i,
                j: s.j,
                k: None,
            });
            continue;
        }
        let k = s
            .cond
            .iter()
            .copied()
            .find(|&k| d_separated(t, s.i, s.j, &[k]).unwrap_or(false))
            .expect("in a forest a single parent blocks the unique trail");
        out.push(TreeRelation {
            kind: TreeRelationKind::Quadratic,
            i: s.i,
            j: s.j,
            k: Some(k),
        });
    }
    Ok(out)
}

/// Whether every toposorted imposed statement of `m`, moved into `g` by
/// `embed`, holds in `g`.
pub fn lies_below_ci(m: &Dag, g: &Dag, embed: &[usize]) -> Result<bool> {
    if embed.len() != m.n() {
        return Err(Error::SizeMismatch(format!(
            "embedding has {} entries for a graph on {} nodes",
            embed.len(),
            m.n()
        )));
    }
    let mut seen = vec![false; g.n()];
    for &v in embed {
        g.check_node(v)?;
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::NotInjective(format!("{embed:?}")));
        }
    }
    for s in toposorted_imposed(m) {
        let cond: Vec<usize> = s.cond.iter().map(|&c| embed[c]).collect();
        if !d_separated(g, embed[s.i], embed[s.j], &cond)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest node index mentioned by any statement, plus one.
pub fn span(statements: &[CiStatement]) -> usize {
    statements.iter().map(|s| s.max_node() + 1).max().unwrap_or(0)
}
