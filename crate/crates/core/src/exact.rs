//! Small exact-arithmetic toolkit: rationals, binomials, dense polynomials and
//! row reduction over `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub(crate) type Q = BigRational;

pub(crate) fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub(crate) fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n || n < 0 {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub(crate) fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Dense polynomial, coefficient `i` multiplies `u^i`.
pub(crate) type Poly = Vec<Q>;

pub(crate) fn poly_mul_linear(p: &Poly, root: &Q) -> Poly {
    // p(u) * (u - root)
    let mut out = vec![Q::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c.clone();
        out[i] -= c * root;
    }
    out
}

pub(crate) fn poly_derivative(p: &Poly) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * q(i as i64))
        .collect()
}

/// Solves `m x = rhs` for a possibly overdetermined system. Returns `None`
/// unless the system has full column rank and is consistent.
pub(crate) fn solve_exact(m: &[Vec<Q>], rhs: &[Q]) -> Option<Vec<Q>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Q>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..cols {
        let found = (pivot_row..rows).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(pivot_row, found);
        let p = aug[pivot_row][col].clone();
        for c in col..=cols {
            aug[pivot_row][c] = &aug[pivot_row][c] / &p;
        }
        for r in 0..rows {
            if r != pivot_row && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in col..=cols {
                    let delta = &factor * &aug[pivot_row][c];
                    aug[r][c] -= delta;
                }
            }
        }
        pivot_row += 1;
    }
    if aug[cols..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some(aug[..cols].iter().map(|r| r[cols].clone()).collect())
}

/// `L D L^T` factorisation of a symmetric positive definite matrix, with `L`
/// unit lower triangular. `None` if a pivot is not strictly positive.
pub(crate) fn ldl(g: &[Vec<Q>]) -> Option<(Vec<Vec<Q>>, Vec<Q>)> {
    let n = g.len();
    let mut l = vec![vec![Q::zero(); n]; n];
    let mut d = vec![Q::zero(); n];
    for i in 0..n {
        let mut di = g[i][i].clone();
        for k in 0..i {
            di -= &l[i][k] * &l[i][k] * &d[k];
        }
        if !di.is_positive() {
            return None;
        }
        l[i][i] = Q::one();
        for r in (i + 1)..n {
            let mut v = g[r][i].clone();
            for k in 0..i {
                v -= &l[r][k] * &l[i][k] * &d[k];
            }
            l[r][i] = v / &di;
        }
        d[i] = di;
    }
    Some((l, d))
}
