//! `(a,b)`-optimal weights.
//!
//! For a stencil `S^a_b` of the order-`r` family, the `(a,b)`-optimal weights
//! `C^a_{b,k}` express the midpoint value of `p^a_b` as a convex combination of
//! the midpoint values of the degree-`r` sub-stencil polynomials `p^r_k` it
//! contains, `k = r + b - a ..= b`.
//!
//! Three independent routes produce them: the closed forms (binomial formula
//! for the full stencil and the two-row formula for `b = l - 1, l`), an exact
//! linear solve on the midpoint rules, and Aitken's two-term recursion.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{binomial, frac, solve_exact, to_f64, Q};
#[cfg(test)]
use crate::exact::q;
use crate::stencil::midpoint_coeffs;

/// One row `C^a_{b,k}` over the sub-stencils `k` contained in `S^a_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub r: usize,
    pub a: usize,
    pub b: usize,
    pub weights: Vec<Q>,
}

impl WeightRow {
    pub fn first_k(&self) -> usize {
        self.r + self.b - self.a
    }

    pub fn ks(&self) -> RangeInclusive<usize> {
        self.first_k()..=self.b
    }

    /// `C^a_{b,k}`, zero for sub-stencils outside `S^a_b`.
    pub fn get(&self, k: usize) -> Q {
        if self.ks().contains(&k) {
            self.weights[k - self.first_k()].clone()
        } else {
            Q::zero()
        }
    }

    /// Dense length-`r` vector indexed by `k`.
    pub fn dense(&self) -> Vec<Q> {
        (0..self.r).map(|k| self.get(k)).collect()
    }

    pub fn dense_f64(&self) -> Vec<f64> {
        self.dense().iter().map(to_f64).collect()
    }

    pub fn sum(&self) -> Q {
        self.weights.iter().fold(Q::zero(), |acc, w| acc + w)
    }
}

fn check_family(r: usize, a: usize, b: usize) -> Result<()> {
    if r < 1 || a < r || a > 2 * r - 1 || b + r < a || b > r - 1 {
        return Err(Error::InvalidParameter(format!(
            "({a},{b}) is not a stencil of the order-{r} family \
             (need r <= a <= 2r-1 and a-r <= b <= r-1)"
        )));
    }
    Ok(())
}

/// Optimal weights of the full stencil: `C^{2r-1}_{r-1,k} = binom(2r, 2k+1) / 2^{2r-1}`.
pub fn classical_optimal(r: usize) -> Result<Vec<Q>> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let denom = Q::from_integer(num_bigint::BigInt::one() << (2 * r - 1));
    Ok((0..r as i64)
        .map(|k| Q::from_integer(binomial(2 * r as i64, 2 * k + 1)) / &denom)
        .collect())
}

/// Raw closed-form entry for the stencil of degree `r + l - 1`.
///
/// `upper = false` gives `C^{r+l-1}_{l-1,k}`, `upper = true` gives
/// `C^{r+l-1}_{l,k}`. Defined for `0 <= k <= min(l, r - 1)`; the factors
/// `(l - k)` and `k` make the entry outside the stencil vanish.
pub fn theorem_entry(r: usize, l: usize, upper: bool, k: usize) -> Q {
    assert!(l >= 1 && l <= r && k <= l && k < r);
    let (r, l, k) = (r as i64, l as i64, k as i64);
    let ratio = |n: num_bigint::BigInt, d: num_bigint::BigInt| Q::new(n, d);
    let common = frac(1, 1) / Q::from_integer(num_bigint::BigInt::one() << (2 * l) as usize)
        * frac(r + l, l)
        * ratio(binomial(l, k), binomial(r, k))
        * ratio(binomial(2 * l, l), binomial(l + r, r))
        * Q::from_integer(binomial(2 * r, 2 * k + 1));
    if upper {
        common * frac(2 * l + 1, 2 * r - 1) * frac(k, r - k)
    } else {
        common * frac(l - k, r - k)
    }
}

fn theorem_row(r: usize, l: usize, upper: bool) -> WeightRow {
    let a = r + l - 1;
    let b = if upper { l } else { l - 1 };
    let first = r + b - a;
    WeightRow {
        r,
        a,
        b,
        weights: (first..=b).map(|k| theorem_entry(r, l, upper, k)).collect(),
    }
}

/// Closed-form `(r+l-1, l-1)` and `(r+l-1, l)` rows. The second row only
/// exists while `l <= r - 1`.
pub fn theorem_optimal(r: usize, l: usize) -> Result<(WeightRow, Option<WeightRow>)> {
    if r < 1 || l < 1 || l > r {
        return Err(Error::InvalidParameter(format!(
            "l = {l} outside [1, {r}]"
        )));
    }
    let upper = (l < r).then(|| theorem_row(r, l, true));
    Ok((theorem_row(r, l, false), upper))
}

/// Brute-force optimal weights: solve for the combination of the sub-stencil
/// midpoint rules that reproduces the `(a,b)` midpoint rule node by node.
pub fn optimal_oracle(r: usize, a: usize, b: usize) -> Result<WeightRow> {
    check_family(r, a, b)?;
    let wide = midpoint_coeffs(a, b as i64);
    let first_node = b as i64 - a as i64;
    let ks: Vec<usize> = (r + b - a..=b).collect();
    let narrow: Vec<_> = ks.iter().map(|&k| midpoint_coeffs(r, k as i64)).collect();
    let matrix: Vec<Vec<Q>> = (0..=a)
        .map(|m| {
            let node = first_node + m as i64;
            narrow
                .iter()
                .map(|rule| {
                    let idx = node - rule.spec().first();
                    if (0..=r as i64).contains(&idx) {
                        rule.coeffs()[idx as usize].clone()
                    } else {
                        Q::zero()
                    }
                })
                .collect()
        })
        .collect();
    let weights = solve_exact(&matrix, wide.coeffs()).ok_or(Error::NoSolution { r, a, b })?;
    Ok(WeightRow { r, a, b, weights })
}

/// Optimal weights by Aitken's recursion
/// `p^a_b = (b + 1/2)/a * p^{a-1}_{b-1} + (a - b - 1/2)/a * p^{a-1}_b`
/// evaluated at the midpoint, starting from `p^r_k`.
pub fn aitken_optimal(r: usize, a: usize, b: usize) -> Result<WeightRow> {
    check_family(r, a, b)?;
    let mut memo = HashMap::new();
    let dense = aitken_dense(r, a, b, &mut memo);
    let first = r + b - a;
    Ok(WeightRow {
        r,
        a,
        b,
        weights: dense[first..=b].to_vec(),
    })
}

fn aitken_dense(r: usize, a: usize, b: usize, memo: &mut HashMap<(usize, usize), Vec<Q>>) -> Vec<Q> {
    if let Some(v) = memo.get(&(a, b)) {
        return v.clone();
    }
    let out = if a == r {
        let mut e = vec![Q::zero(); r];
        e[b] = Q::one();
        e
    } else {
        let left = aitken_dense(r, a - 1, b - 1, memo);
        let right = aitken_dense(r, a - 1, b, memo);
        let wl = frac(2 * b as i64 + 1, 2 * a as i64);
        let wr = frac(2 * (a - b) as i64 - 1, 2 * a as i64);
        left.iter()
            .zip(&right)
            .map(|(x, y)| &wl * x + &wr * y)
            .collect()
    };
    memo.insert((a, b), out.clone());
    out
}

/// `O^r`, `A^r` and `Ã^r`.
///
/// Column `c` of `A^r` multiplies `J_{r-1-c}` and holds the `(2r-2-c, r-2-c)`
/// row; column `c` of `Ã^r` multiplies `J_{-(c+1)}` and holds the
/// `(r+c, r-1)` row, obtained by mirroring the `(r+c, c)` row.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrices {
    pub r: usize,
    pub o_vec: Vec<Q>,
    pub a_mat: Vec<Vec<Q>>,
    pub a_tilde: Vec<Vec<Q>>,
}

impl WeightMatrices {
    /// `(A^r | Ã^r)`, `r` rows by `2r - 2` columns.
    pub fn combined(&self) -> Vec<Vec<Q>> {
        self.a_mat
            .iter()
            .zip(&self.a_tilde)
            .map(|(x, y)| x.iter().chain(y).cloned().collect())
            .collect()
    }
}

pub fn weight_matrices(r: usize) -> Result<WeightMatrices> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "weight matrices need r >= 2, got {r}"
        )));
    }
    Ok(build_matrices(r))
}

fn build_matrices(r: usize) -> WeightMatrices {
    let lower: Vec<WeightRow> = (1..r).map(|l| theorem_row(r, l, false)).collect();
    let a_mat = (0..r)
        .map(|k| (0..r - 1).map(|c| lower[r - 2 - c].get(k)).collect())
        .collect();
    let a_tilde = (0..r)
        .map(|k| (0..r - 1).map(|c| lower[c].get(r - 1 - k)).collect())
        .collect();
    WeightMatrices {
        r,
        o_vec: classical_optimal(r).expect("r >= 1"),
        a_mat,
        a_tilde,
    }
}

/// Every `(a,b)` row of the order-`r` family plus the matrices, with binary64
/// copies of the pieces used during interpolation.
#[derive(Debug)]
pub struct OptimalWeightTable {
    r: usize,
    rows: BTreeMap<(usize, usize), WeightRow>,
    matrices: WeightMatrices,
    o_f64: Vec<f64>,
    combined_f64: Vec<Vec<f64>>,
}

impl OptimalWeightTable {
    pub fn build(r: usize) -> Result<Self> {
        if r < 1 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        let mut rows = BTreeMap::new();
        for a in r..2 * r {
            let l = a + 1 - r;
            for b in a - r..r {
                let row = if b + 1 == l {
                    theorem_row(r, l, false)
                } else if b == l {
                    theorem_row(r, l, true)
                } else {
                    aitken_optimal(r, a, b)?
                };
                rows.insert((a, b), row);
            }
        }
        let matrices = build_matrices(r);
        let o_f64 = matrices.o_vec.iter().map(to_f64).collect();
        let combined_f64 = matrices
            .combined()
            .iter()
            .map(|row| row.iter().map(to_f64).collect())
            .collect();
        Ok(Self {
            r,
            rows,
            matrices,
            o_f64,
            combined_f64,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn row(&self, a: usize, b: usize) -> Option<&WeightRow> {
        self.rows.get(&(a, b))
    }

    pub fn rows(&self) -> impl Iterator<Item = &WeightRow> {
        self.rows.values()
    }

    pub fn matrices(&self) -> &WeightMatrices {
        &self.matrices
    }

    pub fn optimal_f64(&self) -> &[f64] {
        &self.o_f64
    }

    /// `(A^r | Ã^r)` in binary64.
    pub fn combined_f64(&self) -> &[Vec<f64>] {
        &self.combined_f64
    }

    /// Row reached when a single jump sits at interval offset `l0`:
    /// `[x_{j+l0-1}, x_{j+l0}]` for `l0 > 0`, `[x_{j+l0-1}, x_{j+l0}]` mirrored
    /// as `[x_{j-|l0|-1}, x_{j-|l0|}]` for `l0 < 0`.
    pub fn limit_row(&self, l0: i64) -> Option<&WeightRow> {
        let m = l0.unsigned_abs() as usize;
        if m == 0 || m >= self.r {
            return None;
        }
        let a = self.r + m - 1;
        if l0 > 0 {
            self.row(a, m - 1)
        } else {
            self.row(a, self.r - 1)
        }
    }
}

/// Shared, lazily built table for order `r`.
pub fn optimal_table(r: usize) -> Result<Arc<OptimalWeightTable>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<OptimalWeightTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("cache poisoned").get(&r) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(OptimalWeightTable::build(r)?);
    let mut guard = cache.lock().expect("cache poisoned");
    Ok(Arc::clone(guard.entry(r).or_insert(table)))
}
