//! Points on DAG varieties.
//!
//! A point is a symmetric matrix `σ`. It lies on the variety of `G` when
//! every imposed minor `|σ_{iK,jK}|` vanishes. The sampler builds such points
//! over `F_q` by drawing the entries on edges uniformly and then solving the
//! toposorted imposed relations, one linear equation per non-edge.

use std::collections::BTreeMap;
use std::ops::Deref;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::ci::{imposed_minors, MinorSpec};
use crate::dag::{Dag, Permutation};
use crate::error::{Error, Result};
use crate::field::{det, rank, solve_univariate_linear, Field, Matrix, PrimeField, Rationals};

/// Above this size the sampler stops checking every principal minor (there
/// are `2^n - 1`) and falls back to [`Nondegeneracy::ParentAndLeading`].
pub const MAX_ALL_PRINCIPAL_NODES: usize = 14;

/// Resamples allowed per point before giving up.
pub const REJECTION_BUDGET: usize = 64;

/// Symmetric `n x n` matrix over a field, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<F: Field> {
    field: F,
    n: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> SymMatrix<F> {
    pub fn identity(field: F, n: usize) -> Self {
        let mut data = vec![field.zero(); n * n];
        for i in 0..n {
            data[i * n + i] = field.one();
        }
        SymMatrix { field, n, data }
    }

    pub fn from_rows(field: F, rows: Vec<Vec<F::Elem>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::SizeMismatch("matrix is not square".into()));
        }
        let data: Vec<F::Elem> = rows.into_iter().flatten().collect();
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::Parameter(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SymMatrix { field, n, data })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[j * self.n + i] = v.clone();
        self.data[i * self.n + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<F::Elem>> {
        self.data
            .chunks(self.n.max(1))
            .take(self.n)
            .map(<[F::Elem]>::to_vec)
            .collect()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<F::Elem> {
        Matrix::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]).clone())
    }

    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> F::Elem {
        det(&self.field, &self.submatrix(rows, cols)).expect("square by construction")
    }

    pub fn principal_minor(&self, set: &[usize]) -> F::Elem {
        self.minor(set, set)
    }

    /// Relabel indices: entry `(u, v)` moves to `(p(u), p(v))`.
    pub fn permuted(&self, p: &Permutation) -> Self {
        let n = self.n;
        let mut data = vec![self.field.zero(); n * n];
        for u in 0..n {
            for v in 0..n {
                data[p.apply(u) * n + p.apply(v)] = self.get(u, v).clone();
            }
        }
        SymMatrix {
            field: self.field.clone(),
            n,
            data,
        }
    }

    pub fn is_unit_diagonal(&self) -> bool {
        let one = self.field.one();
        (0..self.n).all(|i| *self.get(i, i) == one)
    }

    /// First nonempty index set (subsets in increasing bitmask order) whose
    /// principal minor vanishes.
    pub fn first_vanishing_principal_minor(&self) -> Result<Option<Vec<usize>>> {
        if self.n > MAX_ALL_PRINCIPAL_NODES {
            return Err(Error::TooLarge {
                what: "principal-minor enumeration",
                size: self.n,
                max: MAX_ALL_PRINCIPAL_NODES,
            });
        }
        for mask in 1u32..(1 << self.n) {
            let set: Vec<usize> = (0..self.n).filter(|&b| mask & (1 << b) != 0).collect();
            if self.field.is_zero(&self.principal_minor(&set)) {
                return Ok(Some(set));
            }
        }
        Ok(None)
    }

    pub fn all_principal_minors_nonzero(&self) -> Result<bool> {
        Ok(self.first_vanishing_principal_minor()?.is_none())
    }

    /// Whether every leading principal minor, in the given index order, is
    /// nonzero. One elimination pass without pivoting: the pivots are the
    /// ratios of consecutive leading minors.
    pub fn leading_minors_nonzero(&self, order: &[usize]) -> bool {
        let f = &self.field;
        let k = order.len();
        let mut a: Vec<F::Elem> = Vec::with_capacity(k * k);
        for &r in order {
            for &c in order {
                a.push(self.get(r, c).clone());
            }
        }
        for p in 0..k {
            let Some(pinv) = f.inv(&a[p * k + p]) else {
                return false;
            };
            for r in p + 1..k {
                let lead = a[r * k + p].clone();
                if f.is_zero(&lead) {
                    continue;
                }
                let factor = f.mul(&lead, &pinv);
                for c in p + 1..k {
                    let t = f.mul(&factor, &a[p * k + c]);
                    a[r * k + c] = f.sub(&a[r * k + c], &t);
                }
            }
        }
        true
    }
}

/// A unit-diagonal symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPoint<F: Field>(SymMatrix<F>);

impl<F: Field> SymPoint<F> {
    pub fn new(m: SymMatrix<F>) -> Result<Self> {
        if !m.is_unit_diagonal() {
            return Err(Error::Parameter("point must have unit diagonal".into()));
        }
        Ok(SymPoint(m))
    }

    pub fn into_inner(self) -> SymMatrix<F> {
        self.0
    }

    pub fn permuted(&self, p: &Permutation) -> Self {
        SymPoint(self.0.permuted(p))
    }
}

impl<F: Field> Deref for SymPoint<F> {
    type Target = SymMatrix<F>;
    fn deref(&self) -> &SymMatrix<F> {
        &self.0
    }
}

/// Exact determinant of the submatrix named by `m`.
pub fn minor_eval<F: Field>(p: &SymMatrix<F>, m: &MinorSpec) -> Result<F::Elem> {
    if m.rows.len() != m.cols.len() {
        return Err(Error::SizeMismatch("minor is not square".into()));
    }
    if let Some(&bad) = m.rows.iter().chain(&m.cols).find(|&&x| x >= p.n()) {
        return Err(Error::NodeOutOfRange { node: bad, n: p.n() });
    }
    Ok(p.minor(&m.rows, &m.cols))
}

/// Membership in `V(I_G)`: every imposed minor of `g` vanishes at `p`.
///
/// Each imposed minor is homogeneous of degree one in every row and every
/// column index, so rescaling variables (`σ_ij -> c_i c_j σ_ij`) does not
/// change whether it vanishes. The test therefore accepts un-normalized
/// covariance matrices as well as unit-diagonal points.
pub fn on_variety<F: Field>(p: &SymMatrix<F>, g: &Dag) -> Result<bool> {
    if p.n() != g.n() {
        return Err(Error::SizeMismatch(format!(
            "point on {} indices, graph on {} nodes",
            p.n(),
            g.n()
        )));
    }
    let f = p.field();
    Ok(imposed_minors(g).iter().all(|m| f.is_zero(&p.minor(&m.rows, &m.cols))))
}

/// Gaussian conditional independence `A ⊥⊥ B | C` by the rank criterion:
/// `rank σ_{A∪C, B∪C} = rank σ_{CC}`. Valid for singular `σ`.
pub fn gaussian_ci<F: Field>(sigma: &SymMatrix<F>, a: &[usize], b: &[usize], c: &[usize]) -> Result<bool> {
    for &x in a.iter().chain(b).chain(c) {
        if x >= sigma.n() {
            return Err(Error::NodeOutOfRange { node: x, n: sigma.n() });
        }
    }
    let mut all: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
    let total = all.len();
    all.sort_unstable();
    all.dedup();
    if all.len() != total {
        return Err(Error::IndexOverlap(format!(
            "{a:?}, {b:?}, {c:?} are not pairwise disjoint"
        )));
    }
    let rows: Vec<usize> = a.iter().chain(c).copied().collect();
    let cols: Vec<usize> = b.iter().chain(c).copied().collect();
    let f = sigma.field();
    Ok(rank(f, &sigma.submatrix(&rows, &cols)) == rank(f, &sigma.submatrix(c, c)))
}

/// Linear structural equation parameters: `X_i = Σ α_ij X_j + ω_i Z_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemParams {
    dag: Dag,
    /// Keyed by `(parent, child)`.
    alpha: BTreeMap<(usize, usize), BigRational>,
    omega: Vec<BigRational>,
}

impl SemParams {
    pub fn new(dag: Dag, alpha: BTreeMap<(usize, usize), BigRational>, omega: Vec<BigRational>) -> Result<Self> {
        if omega.len() != dag.n() {
            return Err(Error::SizeMismatch(format!(
                "{} noise scales for {} nodes",
                omega.len(),
                dag.n()
            )));
        }
        if let Some(i) = omega.iter().position(Zero::is_zero) {
            return Err(Error::Parameter(format!("noise scale of node {i} is zero")));
        }
        if alpha.len() != dag.edge_count() || alpha.keys().any(|&(u, v)| !dag.has_edge(u, v)) {
            return Err(Error::Parameter(
                "edge weights must be given on exactly the edges".into(),
            ));
        }
        Ok(SemParams { dag, alpha, omega })
    }

    /// All edge weights and noise scales equal to one.
    pub fn unit(dag: Dag) -> Self {
        let alpha = dag.edges().iter().map(|&e| (e, BigRational::one())).collect();
        let omega = vec![BigRational::one(); dag.n()];
        SemParams { dag, alpha, omega }
    }

    /// Nonzero integer weights and noise scales drawn from `[-range, range]`.
    pub fn random<R: Rng + ?Sized>(dag: Dag, range: i64, rng: &mut R) -> Self {
        let mut draw = |nonzero: bool| loop {
            let v = rng.gen_range(-range..=range);
            if !nonzero || v != 0 {
                return BigRational::from_integer(BigInt::from(v));
            }
        };
        let alpha = dag.edges().iter().map(|&e| (e, draw(true))).collect();
        let omega = (0..dag.n()).map(|_| draw(true)).collect();
        SemParams { dag, alpha, omega }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }
}

/// Covariance `(I - A)^{-1} Ω² (I - A)^{-T}` of the structural equations,
/// exact over the rationals and not rescaled to unit diagonal.
///
/// Filled in topological order: `σ_il = Σ_{j∈pa(i)} α_ij σ_jl` for earlier
/// `l`, and `σ_ii = Σ_{j,k∈pa(i)} α_ij α_ik σ_jk + ω_i²`.
pub fn sem_covariance(params: &SemParams) -> SymMatrix<Rationals> {
    let g = &params.dag;
    let mut s = SymMatrix::identity(Rationals, g.n());
    let order = g.topo_sort();
    let order = order.as_slice();
    for (p, &i) in order.iter().enumerate() {
        let pa = g.parents(i);
        for &l in &order[..p] {
            let v = pa.iter().fold(BigRational::zero(), |acc, &j| {
                acc + &params.alpha[&(j, i)] * s.get(j, l)
            });
            s.set(i, l, v);
        }
        let mut d = &params.omega[i] * &params.omega[i];
        for &j in pa {
            for &k in pa {
                d += &params.alpha[&(j, i)] * &params.alpha[&(k, i)] * s.get(j, k);
            }
        }
        s.set(i, i, d);
    }
    s
}

/// Which principal minors the sampler requires to be nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nondegeneracy {
    /// All `2^n - 1` principal minors.
    All,
    /// Leading minors along the topological order, plus `|σ_KK|` and
    /// `|σ_{iK,iK}|` for every node `i` with parents `K`.
    ParentAndLeading,
}

impl Nondegeneracy {
    pub fn for_size(n: usize) -> Self {
        if n <= MAX_ALL_PRINCIPAL_NODES {
            Nondegeneracy::All
        } else {
            Nondegeneracy::ParentAndLeading
        }
    }
}

pub fn is_nondegenerate<F: Field>(p: &SymMatrix<F>, g: &Dag, rule: Nondegeneracy) -> Result<bool> {
    match rule {
        Nondegeneracy::All => p.all_principal_minors_nonzero(),
        Nondegeneracy::ParentAndLeading => {
            let f = p.field();
            for i in 0..g.n() {
                let pa = g.parents(i);
                if pa.is_empty() {
                    continue;
                }
                let mut fam = pa.to_vec();
                fam.push(i);
                if f.is_zero(&p.principal_minor(pa)) || f.is_zero(&p.principal_minor(&fam)) {
                    return Ok(false);
                }
            }
            Ok(p.leading_minors_nonzero(g.topo_sort().as_slice()))
        }
    }
}

/// Complete a unit-diagonal point from its edge entries by solving each
/// toposorted imposed relation for its one unknown non-edge entry.
///
/// The minor `|σ_{iK,jK}|` is affine in `σ_ij` with slope `|σ_KK|`, so
/// `σ_ij = -c / |σ_KK|` where `c` is the minor with `σ_ij` set to zero.
/// Fails with [`Error::SingularPivot`] when some `|σ_KK|` vanishes.
pub fn complete_from_edges<F: Field>(
    g: &Dag,
    field: F,
    edge_value: impl Fn(usize, usize) -> F::Elem,
) -> Result<SymMatrix<F>> {
    let mut s = SymMatrix::identity(field.clone(), g.n());
    for &(u, v) in g.edges() {
        s.set(u, v, edge_value(u, v));
    }
    let order = g.topo_sort();
    let order = order.as_slice();
    for (p, &i) in order.iter().enumerate() {
        let pa = g.parents(i);
        let mut rows = Vec::with_capacity(pa.len() + 1);
        rows.push(i);
        rows.extend_from_slice(pa);
        let mut cols = rows.clone();
        let mut slope: Option<F::Elem> = None;
        for &j in &order[..p] {
            if pa.contains(&j) {
                continue;
            }
            let slope = slope.get_or_insert_with(|| s.principal_minor(pa)).clone();
            s.set(i, j, field.zero());
            cols[0] = j;
            let c = s.minor(&rows, &cols);
            let x = solve_univariate_linear(&field, &slope, &field.neg(&c))?;
            s.set(i, j, x);
        }
    }
    Ok(s)
}

/// Draw a point of `V(I_G)` over `F_q` with the nondegeneracy rule for its
/// size, rejecting and redrawing up to [`REJECTION_BUDGET`] times.
pub fn sample_point<R: Rng + ?Sized>(g: &Dag, field: &PrimeField, rng: &mut R) -> Result<SymPoint<PrimeField>> {
    sample_point_with(g, field, Nondegeneracy::for_size(g.n()), rng)
}

pub fn sample_point_with<R: Rng + ?Sized>(
    g: &Dag,
    field: &PrimeField,
    rule: Nondegeneracy,
    rng: &mut R,
) -> Result<SymPoint<PrimeField>> {
    sample_point_budget(g, field, rule, REJECTION_BUDGET, rng)
}

pub fn sample_point_budget<R: Rng + ?Sized>(
    g: &Dag,
    field: &PrimeField,
    rule: Nondegeneracy,
    budget: usize,
    rng: &mut R,
) -> Result<SymPoint<PrimeField>> {
    let q = field.modulus();
    for _ in 0..budget {
        let draws: BTreeMap<(usize, usize), u64> = g.edges().iter().map(|&e| (e, rng.gen_range(0..q))).collect();
        let point = match complete_from_edges(g, *field, |u, v| draws[&(u, v)]) {
            Ok(p) => p,
            Err(Error::SingularPivot) => continue,
            Err(e) => return Err(e),
        };
        if is_nondegenerate(&point, g, rule)? {
            return SymPoint::new(point);
        }
    }
    Err(Error::ResampleExhausted { attempts: budget })
}

/// JSON encoding of field elements for the point format.
pub trait FieldJson: Field {
    fn modulus_json(&self) -> Value;
    fn elem_json(&self, e: &Self::Elem) -> Value;
}

impl FieldJson for PrimeField {
    fn modulus_json(&self) -> Value {
        json!(self.modulus())
    }
    fn elem_json(&self, e: &u64) -> Value {
        json!(e)
    }
}

impl FieldJson for Rationals {
    fn modulus_json(&self) -> Value {
        json!("rational")
    }
    fn elem_json(&self, e: &BigRational) -> Value {
        json!(e.to_string())
    }
}

/// `{"q": <modulus or "rational">, "mat": [[...], ...]}`.
pub fn point_to_json<F: FieldJson>(m: &SymMatrix<F>) -> Value {
    let f = m.field();
    let mat: Vec<Vec<Value>> = m
        .to_rows()
        .iter()
        .map(|r| r.iter().map(|e| f.elem_json(e)).collect())
        .collect();
    json!({ "q": f.modulus_json(), "mat": mat })
}

/// Parse an exact rational from a JSON integer or a string `"a"`/`"a/b"`.
pub fn rational_from_json(v: &Value) -> Result<BigRational> {
    let bad = || Error::Parameter(format!("not an exact rational: {v}"));
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|x| BigRational::from_integer(BigInt::from(x)))
            .ok_or_else(bad),
        Value::String(s) => {
            let (num, den) = match s.split_once('/') {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (s.trim(), "1"),
            };
            let num: BigInt = num.parse().map_err(|_| bad())?;
            let den: BigInt = den.parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(num, den))
        }
        _ => Err(bad()),
    }
}

/// Parse a symmetric rational matrix from rows of JSON numbers or strings.
pub fn rational_matrix_from_json(v: &Value) -> Result<SymMatrix<Rationals>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parameter("matrix must be an array of rows".into()))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parameter("matrix row must be an array".into()))?
                .iter()
                .map(rational_from_json)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SymMatrix::from_rows(Rationals, rows)
}
