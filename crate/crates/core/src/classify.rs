//! Isomorphism classes of directed tree models.
//!
//! Every labeled tree (Prüfer order) is combined with every orientation of
//! its edges; orientations of a tree are automatically acyclic. The labeled
//! DAGs are then bucketed by cheap invariants and merged into classes either
//! by canonical pattern strings or by the randomized test.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::canon::canonical_form;
use crate::dag::{Dag, DagJson};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::isodag::{refute_on_points, round_rng, Mode, DEFAULT_SEED};
use crate::pattern::Pattern;
use crate::variety::{sample_point, SymPoint};

pub const MAX_TREE_NODES: usize = 8;
pub const MAX_CANONICAL_NODES: usize = 10;

/// Labeled trees on `n` nodes in Prüfer-sequence order, as sorted edge
/// lists of `(min, max)` pairs.
pub fn labeled_trees(n: usize) -> Result<impl Iterator<Item = Vec<(usize, usize)>>> {
    tree_guard(n)?;
    let count = if n < 2 { 1 } else { n.pow(n as u32 - 2) };
    Ok((0..count).map(move |idx| prufer_tree(n, idx)))
}

fn tree_guard(n: usize) -> Result<()> {
    if n == 0 || n > MAX_TREE_NODES {
        return Err(Error::TooLarge {
            what: "tree enumeration (1 <= n)",
            size: n,
            max: MAX_TREE_NODES,
        });
    }
    Ok(())
}

/// Decode the `idx`-th Prüfer sequence (base-`n` digits, most significant
/// first) into its tree.
fn prufer_tree(n: usize, idx: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut seq = vec![0; n - 2];
    let mut rest = idx;
    for slot in seq.iter_mut().rev() {
        *slot = rest % n;
        rest /= n;
    }
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let last: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((last[0], last[1]));
    edges.sort_unstable();
    edges
}

/// All `2^(n-1)` orientations of a tree; bit `b` of the mask reverses edge `b`.
fn orientations(n: usize, tree: &[(usize, usize)]) -> impl Iterator<Item = Dag> + '_ {
    (0..1usize << tree.len()).map(move |mask| {
        let edges = tree
            .iter()
            .enumerate()
            .map(|(b, &(u, v))| if mask & (1 << b) == 0 { (u, v) } else { (v, u) });
        Dag::new(n, edges).expect("orientations of a tree are acyclic")
    })
}

/// Every labeled directed tree on `n` nodes: `n^(n-2) 2^(n-1)` of them for
/// `n >= 2`.
pub fn enumerate_tree_dags(n: usize) -> Result<impl Iterator<Item = Dag>> {
    Ok(labeled_trees(n)?.flat_map(move |t| orientations(n, &t).collect::<Vec<_>>()))
}

pub fn expected_tree_dag_count(n: usize) -> usize {
    if n < 2 {
        1
    } else {
        n.pow(n as u32 - 2) << (n - 1)
    }
}

/// Canonical pattern string of a DAG (see [`canonical_form`]).
pub fn canonical_pattern(g: &Dag) -> Result<Vec<u8>> {
    if g.n() > MAX_CANONICAL_NODES {
        return Err(Error::TooLarge {
            what: "canonical pattern",
            size: g.n(),
            max: MAX_CANONICAL_NODES,
        });
    }
    Ok(canonical_form(&Pattern::of(g)))
}

/// Sorted skeleton degrees and immorality count.
type BucketKey = (Vec<usize>, usize);

/// Bucket key plus canonical string.
type ClassKey = (BucketKey, Vec<u8>);

fn bucket_key(p: &Pattern) -> BucketKey {
    let mut deg = p.skeleton_degrees();
    deg.sort_unstable();
    (deg, p.immoralities().len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifyMode {
    Oracle,
    Randomized,
    CrossCheck,
}

impl std::str::FromStr for ClassifyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(ClassifyMode::Oracle),
            "randomized" => Ok(ClassifyMode::Randomized),
            "cross-check" => Ok(ClassifyMode::CrossCheck),
            other => Err(Error::Parameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub mode: ClassifyMode,
    pub q: PrimeField,
    pub m: u32,
    pub seed: u64,
}

impl ClassifyOptions {
    pub fn new(mode: ClassifyMode) -> Self {
        ClassifyOptions {
            mode,
            q: PrimeField::default(),
            m: 3,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub n: usize,
    pub mode: ClassifyMode,
    pub total_dags: usize,
    pub class_count: usize,
    /// Parallel to `representatives`: labeled DAGs in each class.
    pub class_sizes: Vec<usize>,
    #[serde(serialize_with = "dags_as_json")]
    pub representatives: Vec<Dag>,
}

fn dags_as_json<S: serde::Serializer>(dags: &[Dag], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(dags.iter().map(|g| DagJson::from(g.clone())))
}

#[derive(Clone)]
struct Class {
    size: usize,
    rep: Dag,
}

impl Class {
    fn absorb(&mut self, g: &Dag, count: usize) {
        self.size += count;
        if g.edges() < self.rep.edges() {
            self.rep = g.clone();
        }
    }
}

fn report(n: usize, mode: ClassifyMode, classes: impl IntoIterator<Item = Class>) -> ClassReport {
    let mut classes: Vec<Class> = classes.into_iter().collect();
    classes.sort_by(|a, b| a.rep.edges().cmp(b.rep.edges()));
    ClassReport {
        n,
        mode,
        total_dags: classes.iter().map(|c| c.size).sum(),
        class_count: classes.len(),
        class_sizes: classes.iter().map(|c| c.size).collect(),
        representatives: classes.into_iter().map(|c| c.rep).collect(),
    }
}

/// Oracle classification. Orientations of one tree that share a labeled
/// pattern are merged before canonicalization; trees are processed in
/// parallel.
fn classify_oracle(n: usize) -> Result<ClassReport> {
    let trees: Vec<Vec<(usize, usize)>> = labeled_trees(n)?.collect();
    let per_tree: Vec<Vec<(ClassKey, Class)>> = trees
        .par_iter()
        .map(|t| {
            let mut local: HashMap<Pattern, Class> = HashMap::new();
            for g in orientations(n, t) {
                let p = Pattern::of(&g);
                match local.get_mut(&p) {
                    Some(c) => c.absorb(&g, 1),
                    None => {
                        local.insert(p, Class { size: 1, rep: g });
                    }
                }
            }
            local
                .into_iter()
                .map(|(p, c)| ((bucket_key(&p), canonical_form(&p)), c))
                .collect()
        })
        .collect();
    let mut merged: BTreeMap<ClassKey, Class> = BTreeMap::new();
    for (key, c) in per_tree.into_iter().flatten() {
        match merged.get_mut(&key) {
            Some(existing) => existing.absorb(&c.rep, c.size),
            None => {
                merged.insert(key, c);
            }
        }
    }
    Ok(report(n, ClassifyMode::Oracle, merged.into_values()))
}

fn round_points(g: &Dag, opts: &ClassifyOptions, idx: usize) -> Result<Vec<SymPoint<PrimeField>>> {
    let m = opts.m as u64;
    (0..m)
        .map(|r| sample_point(g, &opts.q, &mut round_rng(opts.seed, idx as u64 * m + r)))
        .collect()
}

/// Randomized classification: class label of every DAG in `dags`.
fn randomized_labels(dags: &[Dag], opts: &ClassifyOptions) -> Result<Vec<usize>> {
    struct Member {
        class: usize,
        dag: Dag,
        points: Vec<SymPoint<PrimeField>>,
    }
    let mut buckets: HashMap<BucketKey, Vec<Member>> = HashMap::new();
    let mut labels = Vec::with_capacity(dags.len());
    let mut next_class = 0;
    for (idx, g) in dags.iter().enumerate() {
        let points = round_points(g, opts, idx)?;
        let bucket = buckets.entry(bucket_key(&Pattern::of(g))).or_default();
        let mut found = None;
        for rep in bucket.iter() {
            if refute_on_points(g, &points, &rep.dag, &rep.points, Mode::Isomorphism)?.is_ok() {
                found = Some(rep.class);
                break;
            }
        }
        let class = match found {
            Some(c) => c,
            None => {
                bucket.push(Member {
                    class: next_class,
                    dag: g.clone(),
                    points,
                });
                next_class += 1;
                next_class - 1
            }
        };
        labels.push(class);
    }
    Ok(labels)
}

fn classes_from_labels<L: std::hash::Hash + Eq>(dags: &[Dag], labels: &[L]) -> Vec<Class> {
    let mut by_label: HashMap<&L, Class> = HashMap::new();
    for (g, l) in dags.iter().zip(labels) {
        match by_label.get_mut(l) {
            Some(c) => c.absorb(g, 1),
            None => {
                by_label.insert(
                    l,
                    Class {
                        size: 1,
                        rep: g.clone(),
                    },
                );
            }
        }
    }
    by_label.into_values().collect()
}

fn pair_json(a: &Dag, b: &Dag) -> String {
    serde_json::json!([DagJson::from(a.clone()), DagJson::from(b.clone())]).to_string()
}

/// Partition the labeled directed trees on `n` nodes into isomorphism
/// classes.
pub fn classify_trees(n: usize, opts: &ClassifyOptions) -> Result<ClassReport> {
    tree_guard(n)?;
    match opts.mode {
        ClassifyMode::Oracle => classify_oracle(n),
        ClassifyMode::Randomized => {
            let dags: Vec<Dag> = enumerate_tree_dags(n)?.collect();
            let labels = randomized_labels(&dags, opts)?;
            Ok(report(n, ClassifyMode::Randomized, classes_from_labels(&dags, &labels)))
        }
        ClassifyMode::CrossCheck => {
            let dags: Vec<Dag> = enumerate_tree_dags(n)?.collect();
            let canon: Vec<Vec<u8>> = dags.par_iter().map(|g| canonical_form(&Pattern::of(g))).collect();
            let labels = randomized_labels(&dags, opts)?;
            // The partitions agree iff canon -> label and label -> canon are
            // both functions.
            let mut c2l: HashMap<&[u8], (usize, usize)> = HashMap::new();
            let mut l2c: HashMap<usize, (&[u8], usize)> = HashMap::new();
            for (i, (c, &l)) in canon.iter().zip(&labels).enumerate() {
                let (seen_l, j) = *c2l.entry(c).or_insert((l, i));
                if seen_l != l {
                    return Err(Error::CrossCheck(format!(
                        "oracle merges, randomized splits: {}",
                        pair_json(&dags[j], &dags[i])
                    )));
                }
                let (seen_c, j) = *l2c.entry(l).or_insert((c, i));
                if seen_c != c.as_slice() {
                    return Err(Error::CrossCheck(format!(
                        "randomized merges, oracle splits: {}",
                        pair_json(&dags[j], &dags[i])
                    )));
                }
            }
            let oracle = report(n, ClassifyMode::CrossCheck, classes_from_labels(&dags, &canon));
            let randomized = report(n, ClassifyMode::CrossCheck, classes_from_labels(&dags, &labels));
            debug_assert_eq!(oracle, randomized);
            Ok(oracle)
        }
    }
}
