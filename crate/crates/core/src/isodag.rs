//! Randomized isomorphism and Markov-equivalence tests.
//!
//! Each round draws one point from each graph's variety over `F_q` and asks
//! whether some relabeling carries it onto the other graph's variety. A
//! relabeling of isomorphic models always exists, so "no" answers are never
//! wrong; "yes" answers carry an upper bound on the false-accept probability.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::ci::imposed_minors;
use crate::dag::{Dag, Permutation};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::variety::{on_variety, sample_point, SymMatrix, SymPoint};

/// Largest node count for the permutation search (`n!` candidates).
pub const MAX_ISO_NODES: usize = 10;

/// Master seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x15_0DA6;

const MAX_ROUNDS: u32 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IsoParams {
    pub m: u32,
    pub q: PrimeField,
    /// Stand-in for the degree of the sampler's exceptional locus.
    pub d_bound: u64,
    pub seed: u64,
}

impl IsoParams {
    pub fn new(m: u32, q: PrimeField, d_bound: u64, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("at least one round is required".into()));
        }
        if q.modulus() <= d_bound {
            return Err(Error::Parameter(format!(
                "modulus {} must exceed the degree bound {d_bound}",
                q.modulus()
            )));
        }
        Ok(IsoParams { m, q, d_bound, seed })
    }

    /// Parameters for comparing `g` and `g2`, with the degree surrogate
    /// from [`degree_bound`].
    pub fn for_pair(g: &Dag, g2: &Dag, q: PrimeField, m: u32, seed: u64) -> Result<Self> {
        IsoParams::new(m, q, degree_bound(g, g2), seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        IsoParams { seed, ..self }
    }
}

/// `Σ|pa_G(i)| + Σ|pa_G'(i)| + 2n`: the degrees of the parent-set minors of
/// both graphs plus slack for the completion denominators.
pub fn degree_bound(g: &Dag, g2: &Dag) -> u64 {
    (g.edge_count() + g2.edge_count() + 2 * g.n().max(g2.n())) as u64
}

/// Independent generator for one `(round, graph)` stream of a master seed.
pub fn round_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exact false-accept bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureBound {
    pub value: BigRational,
}

impl FailureBound {
    pub fn zero() -> Self {
        FailureBound {
            value: BigRational::zero(),
        }
    }

    /// A bound of one or more says nothing.
    pub fn is_vacuous(&self) -> bool {
        self.value >= BigRational::one()
    }

    pub fn approx(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for FailureBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FailureBound", 3)?;
        st.serialize_field("exact", &self.value.to_string())?;
        st.serialize_field("approx", &self.approx())?;
        st.serialize_field("vacuous", &self.is_vacuous())?;
        st.end()
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `(n! (n + 2d - 1) / (q - d))^m`, without the `n!` factor when no
/// relabelings are searched.
pub fn failure_bound(n: usize, d_bound: u64, q: u64, m: u32, with_permutations: bool) -> Result<FailureBound> {
    if q <= d_bound {
        return Err(Error::Parameter(format!(
            "modulus {q} must exceed the degree bound {d_bound}"
        )));
    }
    let degree = (n as i128 + 2 * d_bound as i128 - 1).max(0);
    let mut num = BigInt::from(degree);
    if with_permutations {
        num *= factorial(n);
    }
    let base = BigRational::new(num, BigInt::from(q - d_bound));
    Ok(FailureBound {
        value: num_traits::pow(base, m as usize),
    })
}

/// Default modulus, degree surrogate for two graphs with `edges` edges each,
/// and the fewest rounds whose bound is at most `target_eps`.
pub fn choose_params(n: usize, edges: usize, target_eps: &BigRational) -> Result<IsoParams> {
    choose_params_for(n, edges, target_eps, true)
}

pub fn choose_params_for(
    n: usize,
    edges: usize,
    target_eps: &BigRational,
    with_permutations: bool,
) -> Result<IsoParams> {
    let q = PrimeField::default();
    let d_bound = (2 * edges + 2 * n) as u64;
    let m = rounds_for(n, d_bound, q, target_eps, with_permutations)?;
    IsoParams::new(m, q, d_bound, DEFAULT_SEED)
}

/// Fewest rounds whose bound at modulus `q` is at most `target_eps`.
pub fn rounds_for(
    n: usize,
    d_bound: u64,
    q: PrimeField,
    target_eps: &BigRational,
    with_permutations: bool,
) -> Result<u32> {
    if *target_eps <= BigRational::zero() || *target_eps > BigRational::one() {
        return Err(Error::Parameter(format!(
            "target error {target_eps} must lie in (0, 1]"
        )));
    }
    let base = failure_bound(n, d_bound, q.modulus(), 1, with_permutations)?;
    if base.is_vacuous() {
        return Err(Error::Parameter(format!(
            "per-round bound {} is vacuous at q = {}; a larger modulus is needed",
            base.value,
            q.modulus()
        )));
    }
    let mut bound = base.value.clone();
    let mut m = 1;
    while bound > *target_eps {
        if m >= MAX_ROUNDS {
            return Err(Error::Parameter(format!(
                "target {target_eps} needs more than {MAX_ROUNDS} rounds"
            )));
        }
        bound *= &base.value;
        m += 1;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Relabelings allowed.
    Isomorphism,
    /// Identity relabeling only.
    Equivalence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundWitness {
    pub round: u32,
    /// Carries the first graph's point onto the second graph's variety.
    pub forward: Permutation,
    /// Carries the second graph's point onto the first graph's variety.
    pub backward: Permutation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoVerdict {
    pub mode: Mode,
    pub answer: Answer,
    pub rounds_run: u32,
    pub witnesses: Vec<RoundWitness>,
    pub refuting_round: Option<u32>,
    /// Set when a structural precheck decided the answer without sampling.
    pub precheck: Option<String>,
    /// Upper bound on the probability that this verdict is wrong; zero for
    /// "no". Computed from the degree surrogate, so it is a heuristic
    /// certificate rather than a proven bound.
    pub failure_bound: FailureBound,
    pub params: IsoParams,
}

impl IsoVerdict {
    pub fn is_yes(&self) -> bool {
        self.answer == Answer::Yes
    }
}

/// First relabeling `π` (skeleton-degree preserving) with
/// `π(z) ∈ V(I_target)`.
pub fn perm_witness(z: &SymMatrix<PrimeField>, source: &Dag, target: &Dag) -> Result<Option<Permutation>> {
    perm_witness_with(z, source, target, true)
}

/// As [`perm_witness`]; `prune_degrees = false` searches all `n!` maps.
///
/// The search assigns the preimage of each target node in turn and checks
/// an imposed minor of `target` as soon as all of its indices are assigned.
/// Candidates are visited in lexicographic order of the inverse map, so the
/// identity is tried first.
pub fn perm_witness_with(
    z: &SymMatrix<PrimeField>,
    source: &Dag,
    target: &Dag,
    prune_degrees: bool,
) -> Result<Option<Permutation>> {
    let n = target.n();
    if source.n() != n || z.n() != n {
        return Err(Error::SizeMismatch(format!(
            "point on {} indices, graphs on {} and {} nodes",
            z.n(),
            source.n(),
            n
        )));
    }
    if n > MAX_ISO_NODES {
        return Err(Error::TooLarge {
            what: "permutation search",
            size: n,
            max: MAX_ISO_NODES,
        });
    }
    let mut by_level: Vec<Vec<(Vec<usize>, Vec<usize>)>> = vec![Vec::new(); n];
    for m in imposed_minors(target) {
        let top = m.rows.iter().chain(&m.cols).copied().max().expect("nonempty minor");
        by_level[top].push((m.rows, m.cols));
    }
    let src_deg: Vec<usize> = (0..n).map(|v| source.skeleton_degree(v)).collect();
    let tgt_deg: Vec<usize> = (0..n).map(|v| target.skeleton_degree(v)).collect();

    struct Search<'a> {
        z: &'a SymMatrix<PrimeField>,
        by_level: &'a [Vec<(Vec<usize>, Vec<usize>)>],
        src_deg: &'a [usize],
        tgt_deg: &'a [usize],
        prune: bool,
        pre: Vec<usize>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        fn level_holds(&self, t: usize) -> bool {
            let f = self.z.field();
            self.by_level[t].iter().all(|(rows, cols)| {
                let r: Vec<usize> = rows.iter().map(|&x| self.pre[x]).collect();
                let c: Vec<usize> = cols.iter().map(|&x| self.pre[x]).collect();
                f.is_zero(&self.z.minor(&r, &c))
            })
        }

        fn go(&mut self, t: usize) -> bool {
            if t == self.pre.len() {
                return true;
            }
            for s in 0..self.pre.len() {
                if self.used[s] || (self.prune && self.src_deg[s] != self.tgt_deg[t]) {
                    continue;
                }
                self.pre[t] = s;
                if !self.level_holds(t) {
                    continue;
                }
                self.used[s] = true;
                if self.go(t + 1) {
                    return true;
                }
                self.used[s] = false;
            }
            false
        }
    }

    let mut search = Search {
        z,
        by_level: &by_level,
        src_deg: &src_deg,
        tgt_deg: &tgt_deg,
        prune: prune_degrees,
        pre: vec![0; n],
        used: vec![false; n],
    };
    if !search.go(0) {
        return Ok(None);
    }
    let pre = Permutation::new(search.pre).expect("bijection by construction");
    Ok(Some(pre.inverse()))
}

fn precheck(g: &Dag, g2: &Dag) -> Option<String> {
    if g.n() != g2.n() {
        Some(format!("node counts differ ({} vs {})", g.n(), g2.n()))
    } else if g.edge_count() != g2.edge_count() {
        Some(format!(
            "edge counts differ ({} vs {}); the variety dimension n + |E| is an invariant",
            g.edge_count(),
            g2.edge_count()
        ))
    } else {
        None
    }
}

/// Draw the `m` per-round points of one graph. Round `r` (1-based) of graph
/// slot `k` uses stream `2(r - 1) + k` of the master seed.
pub fn sample_rounds(g: &Dag, params: &IsoParams, slot: u64) -> Result<Vec<SymPoint<PrimeField>>> {
    (1..=params.m)
        .map(|r| sample_point(g, &params.q, &mut round_rng(params.seed, 2 * (r as u64 - 1) + slot)))
        .collect()
}

type Check = fn(&SymMatrix<PrimeField>, &Dag, &Dag) -> Result<Option<Permutation>>;

fn identity_check(z: &SymMatrix<PrimeField>, _source: &Dag, target: &Dag) -> Result<Option<Permutation>> {
    Ok(on_variety(z, target)?.then(|| Permutation::identity(target.n())))
}

/// Decide a pair from points already drawn; `None` when every round
/// produced witnesses, otherwise the 1-based refuting round.
pub fn refute_on_points(
    g: &Dag,
    zs: &[SymPoint<PrimeField>],
    g2: &Dag,
    zs2: &[SymPoint<PrimeField>],
    mode: Mode,
) -> Result<std::result::Result<Vec<RoundWitness>, u32>> {
    let check: Check = match mode {
        Mode::Isomorphism => perm_witness,
        Mode::Equivalence => identity_check,
    };
    let mut witnesses = Vec::with_capacity(zs.len());
    for (r, (z, z2)) in zs.iter().zip(zs2).enumerate() {
        let round = r as u32 + 1;
        let Some(forward) = check(z, g, g2)? else {
            return Ok(Err(round));
        };
        let Some(backward) = check(z2, g2, g)? else {
            return Ok(Err(round));
        };
        witnesses.push(RoundWitness {
            round,
            forward,
            backward,
        });
    }
    Ok(Ok(witnesses))
}

fn run(g: &Dag, g2: &Dag, params: &IsoParams, mode: Mode) -> Result<IsoVerdict> {
    let no = |rounds_run, refuting_round, precheck| IsoVerdict {
        mode,
        answer: Answer::No,
        rounds_run,
        witnesses: Vec::new(),
        refuting_round,
        precheck,
        failure_bound: FailureBound::zero(),
        params: *params,
    };
    if let Some(reason) = precheck(g, g2) {
        return Ok(no(0, None, Some(reason)));
    }
    if mode == Mode::Isomorphism && g.n() > MAX_ISO_NODES {
        return Err(Error::TooLarge {
            what: "permutation search",
            size: g.n(),
            max: MAX_ISO_NODES,
        });
    }
    let check: Check = match mode {
        Mode::Isomorphism => perm_witness,
        Mode::Equivalence => identity_check,
    };
    let mut witnesses = Vec::with_capacity(params.m as usize);
    for round in 1..=params.m {
        let stream = 2 * (round as u64 - 1);
        let z = sample_point(g, &params.q, &mut round_rng(params.seed, stream))?;
        let z2 = sample_point(g2, &params.q, &mut round_rng(params.seed, stream + 1))?;
        let Some(forward) = check(&z, g, g2)? else {
            return Ok(no(round, Some(round), None));
        };
        let Some(backward) = check(&z2, g2, g)? else {
            return Ok(no(round, Some(round), None));
        };
        witnesses.push(RoundWitness {
            round,
            forward,
            backward,
        });
    }
    let bound = failure_bound(
        g.n(),
        params.d_bound,
        params.q.modulus(),
        params.m,
        mode == Mode::Isomorphism,
    )?;
    Ok(IsoVerdict {
        mode,
        answer: Answer::Yes,
        rounds_run: params.m,
        witnesses,
        refuting_round: None,
        precheck: None,
        failure_bound: bound,
        params: *params,
    })
}

/// Are the models of `g` and `g2` equal up to relabeling?
pub fn isodag_test(g: &Dag, g2: &Dag, params: &IsoParams) -> Result<IsoVerdict> {
    run(g, g2, params, Mode::Isomorphism)
}

/// Are `g` and `g2` Markov equivalent (same model, no relabeling)?
pub fn equiv_randomized(g: &Dag, g2: &Dag, params: &IsoParams) -> Result<IsoVerdict> {
    run(g, g2, params, Mode::Equivalence)
}
