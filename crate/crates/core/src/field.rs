//! Exact scalar arithmetic and dense linear algebra.
//!
//! Two instantiations of [`Field`] are provided: [`PrimeField`] (integers
//! modulo a prime `q`, elements stored as `u64`) and [`Rationals`]
//! (arbitrary-precision fractions). Everything downstream is generic over
//! the field, so a vanishing test is always exact.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Mersenne prime 2^31 - 1, the default sampling modulus.
pub const DEFAULT_MODULUS: u64 = (1 << 31) - 1;

/// A field context. Elements carry no reference to their field, so every
/// operation goes through the context.
pub trait Field: Clone + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn of_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
}

/// Integers modulo a prime `q`, with `2 < q < 2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q <= 2 {
            return Err(Error::Parameter(format!("modulus {q} must be an odd prime")));
        }
        if q >= 1 << 63 {
            return Err(Error::Parameter(format!("modulus {q} must be below 2^63")));
        }
        if !is_prime(q) {
            return Err(Error::Parameter(format!("modulus {q} is not prime")));
        }
        Ok(PrimeField { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn reduce(&self, v: u64) -> u64 {
        v % self.q
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base, self.q);
            }
            base = mulmod(base, base, self.q);
            exp >>= 1;
        }
        acc
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { q: DEFAULT_MODULUS }
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.q
    }
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; these witnesses are exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn of_i64(&self, v: i64) -> u64 {
        let r = (v as i128).rem_euclid(self.q as i128);
        r as u64
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mulmod(*a, *b, self.q)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            // Fermat: a^(q-2)
            Some(self.pow(*a, self.q - 2))
        }
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

/// The field of rational numbers with arbitrary-precision numerator and
/// denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn of_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}

/// Reduce a rational into `F_q`; `None` when `q` divides the denominator.
pub fn rational_mod(f: &PrimeField, r: &BigRational) -> Option<u64> {
    let q = BigInt::from(f.modulus());
    let num = r.numer().mod_floor_big(&q);
    let den = r.denom().mod_floor_big(&q);
    let den = f.inv(&den)?;
    Some(f.mul(&num, &den))
}

/// Parse an exact rational from `a/b`, an integer, or a decimal with an
/// optional exponent such as `2.5e-9`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parameter(format!("not a number: {s:?}"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(at) => (&s[..at], s[at + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.starts_with(['+', '-']) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * pow)
    } else {
        BigRational::new(num, pow)
    })
}

trait ModFloorBig {
    fn mod_floor_big(&self, q: &BigInt) -> u64;
}

impl ModFloorBig for BigInt {
    fn mod_floor_big(&self, q: &BigInt) -> u64 {
        let mut r = self % q;
        if r.is_negative() {
            r += q;
        }
        u64::try_from(r).expect("residue fits in u64")
    }
}

/// Dense row-major matrix over a field.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::SizeMismatch("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &E {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: E) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(<[E]>::to_vec)
            .collect()
    }
}

pub fn mat_mul<F: Field>(f: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>> {
    if a.cols != b.rows {
        return Err(Error::SizeMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(Matrix::from_fn(a.rows, b.cols, |r, c| {
        (0..a.cols).fold(f.zero(), |acc, k| f.add(&acc, &f.mul(a.get(r, k), b.get(k, c))))
    }))
}

/// Determinant (square inputs only) and rank by Gaussian elimination,
/// pivoting on the first nonzero entry of each column.
pub fn det_and_rank<F: Field>(f: &F, m: &Matrix<F::Elem>) -> (Option<F::Elem>, usize) {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut det = f.one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !f.is_zero(&a[r * cols + col])) else {
            continue;
        };
        if p != rank {
            for c in 0..cols {
                a.swap(p * cols + c, rank * cols + c);
            }
            det = f.neg(&det);
        }
        let pivot = a[rank * cols + col].clone();
        det = f.mul(&det, &pivot);
        let pinv = f.inv(&pivot).expect("pivot is nonzero");
        for r in rank + 1..rows {
            let lead = a[r * cols + col].clone();
            if f.is_zero(&lead) {
                continue;
            }
            let factor = f.mul(&lead, &pinv);
            for c in col..cols {
                let t = f.mul(&factor, &a[rank * cols + c]);
                a[r * cols + c] = f.sub(&a[r * cols + c], &t);
            }
        }
        rank += 1;
    }
    let det = if rows == cols {
        Some(if rank == rows { det } else { f.zero() })
    } else {
        None
    };
    (det, rank)
}

/// Determinant of a square matrix; the empty matrix has determinant one.
pub fn det<F: Field>(f: &F, m: &Matrix<F::Elem>) -> Result<F::Elem> {
    if m.rows != m.cols {
        return Err(Error::SizeMismatch(format!(
            "{}x{} matrix is not square",
            m.rows, m.cols
        )));
    }
    Ok(det_and_rank(f, m).0.expect("square"))
}

pub fn rank<F: Field>(f: &F, m: &Matrix<F::Elem>) -> usize {
    det_and_rank(f, m).1
}

/// Solve `a * x = b` for `x`.
pub fn solve_univariate_linear<F: Field>(f: &F, a: &F::Elem, b: &F::Elem) -> Result<F::Elem> {
    let inv = f.inv(a).ok_or(Error::SingularPivot)?;
    Ok(f.mul(b, &inv))
}
