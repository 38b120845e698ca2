//! Smoothness indicators and jump measures.
//!
//! `I^{r,j}_k = sum_{l=1}^r h^{2l-1} ∫_{x_{j-1}}^{x_j} ((p^r_k)^{(l)})^2 dx`.
//! In the variable `u = (x - x_j)/h` the powers of `h` cancel, leaving
//! `sum_l ∫_{-1}^0 (q^{(l)}(u))^2 du` for the index-space polynomial `q`.
//! That is a quadratic form in the Newton differences of the window; it is
//! factored exactly as `sum_i D_i y_i^2` with `D_i > 0`, so binary64
//! evaluation is nonnegative by construction, exactly zero on constant data
//! and exactly one on unit-increment linear data.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, frac, ldl, poly_derivative, poly_mul_linear, q, to_f64, Poly, Q};
use crate::grid::SampledSignal;

/// Largest order for which indicator forms are generated on demand.
pub const MAX_ORDER: usize = 12;

/// `I^{r,j}_k` as `sum_i d_i (m_i · Δ)^2`, where `Δ = (Δ^1 v_0, ..., Δ^r v_0)`
/// are the forward differences of the `r + 1` window values.
#[derive(Debug, Clone)]
pub struct IndicatorForm {
    r: usize,
    d: Vec<f64>,
    m: Vec<Vec<f64>>,
    d_exact: Vec<Q>,
    m_exact: Vec<Vec<Q>>,
}

impl IndicatorForm {
    fn build(r: usize, k: usize) -> Self {
        // Newton basis binom(u - u0, n) in monomials, u0 = k - r.
        let u0 = k as i64 - r as i64;
        let mut basis: Vec<Poly> = vec![vec![Q::one()]];
        for n in 1..=r {
            let prev = &basis[n - 1];
            let p: Poly = poly_mul_linear(prev, &q(u0 + n as i64 - 1))
                .into_iter()
                .map(|c| c / q(n as i64))
                .collect();
            basis.push(p);
        }
        // newton[p][n]: coefficient of u^p in basis n, p, n = 1..=r.
        let newton: Vec<Vec<Q>> = (1..=r)
            .map(|p| {
                (1..=r)
                    .map(|n| basis[n].get(p).cloned().unwrap_or_else(Q::zero))
                    .collect()
            })
            .collect();

        let gram = gram_matrix(r);
        let (l, d) = ldl(&gram).expect("derivative Gram matrix is positive definite");
        // y = L^T a, a = newton * Δ.
        let m_exact: Vec<Vec<Q>> = (0..r)
            .map(|i| {
                (0..r)
                    .map(|n| {
                        (i..r).fold(Q::zero(), |acc, p| acc + &l[p][i] * &newton[p][n])
                    })
                    .collect()
            })
            .collect();
        Self {
            r,
            d: d.iter().map(to_f64).collect(),
            m: m_exact.iter().map(|row| row.iter().map(to_f64).collect()).collect(),
            d_exact: d,
            m_exact,
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Evaluates the indicator on the `r + 1` values of the sub-stencil.
    pub fn eval(&self, window: &[f64]) -> f64 {
        debug_assert_eq!(window.len(), self.r + 1);
        let mut buf = [0.0f64; MAX_ORDER + 1];
        let buf = &mut buf[..=self.r];
        buf.copy_from_slice(window);
        let mut diffs = [0.0f64; MAX_ORDER];
        for n in 1..=self.r {
            for i in 0..=self.r - n {
                buf[i] = buf[i + 1] - buf[i];
            }
            diffs[n - 1] = buf[0];
        }
        let diffs = &diffs[..self.r];
        self.m
            .iter()
            .zip(&self.d)
            .map(|(row, d)| {
                let y: f64 = row.iter().zip(diffs).map(|(a, b)| a * b).sum();
                d * y * y
            })
            .sum()
    }

    /// Exact symmetric matrix `Q` with `I = v^T Q v` over the window values.
    pub fn sample_matrix(&self) -> Vec<Vec<Q>> {
        let r = self.r;
        // Δ^n v_0 = sum_i (-1)^{n-i} binom(n, i) v_i
        let e: Vec<Vec<Q>> = (1..=r)
            .map(|n| {
                (0..=r)
                    .map(|i| {
                        if i > n {
                            Q::zero()
                        } else {
                            let sign = if (n - i) % 2 == 0 { 1 } else { -1 };
                            Q::from_integer(binomial(n as i64, i as i64) * sign)
                        }
                    })
                    .collect()
            })
            .collect();
        let rows: Vec<Vec<Q>> = self
            .m_exact
            .iter()
            .map(|mi| {
                (0..=r)
                    .map(|c| mi.iter().zip(&e).fold(Q::zero(), |acc, (a, er)| acc + a * &er[c]))
                    .collect()
            })
            .collect();
        (0..=r)
            .map(|a| {
                (0..=r)
                    .map(|b| {
                        rows.iter()
                            .zip(&self.d_exact)
                            .fold(Q::zero(), |acc, (row, d)| acc + d * &row[a] * &row[b])
                    })
                    .collect()
            })
            .collect()
    }
}

/// `G[p][q] = sum_l ∫_{-1}^0 (u^p)^{(l)} (u^q)^{(l)} du` for `p, q = 1..=r`.
fn gram_matrix(r: usize) -> Vec<Vec<Q>> {
    let monomial = |p: usize| -> Poly {
        let mut v = vec![Q::zero(); p + 1];
        v[p] = Q::one();
        v
    };
    let integrate = |poly: &Poly| -> Q {
        // ∫_{-1}^0 u^n du = (-1)^n / (n + 1)
        poly.iter().enumerate().fold(Q::zero(), |acc, (n, c)| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            acc + c * frac(sign, n as i64 + 1)
        })
    };
    (1..=r)
        .map(|p| {
            (1..=r)
                .map(|qq| {
                    let (mut dp, mut dq) = (monomial(p), monomial(qq));
                    let mut total = Q::zero();
                    for _ in 1..=r {
                        dp = poly_derivative(&dp);
                        dq = poly_derivative(&dq);
                        let mut prod = vec![Q::zero(); dp.len() + dq.len()];
                        for (i, a) in dp.iter().enumerate() {
                            for (j, b) in dq.iter().enumerate() {
                                prod[i + j] += a * b;
                            }
                        }
                        total += integrate(&prod);
                    }
                    total
                })
                .collect()
        })
        .collect()
}

/// Cached forms for every sub-stencil `k = 0..r` of order `r`.
pub fn indicator_forms(r: usize) -> Result<Arc<Vec<IndicatorForm>>> {
    if !(1..=MAX_ORDER).contains(&r) {
        return Err(Error::UnsupportedR(r));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<IndicatorForm>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(f) = cache.lock().expect("cache poisoned").get(&r) {
        return Ok(Arc::clone(f));
    }
    let forms = Arc::new((0..r).map(|k| IndicatorForm::build(r, k)).collect::<Vec<_>>());
    let mut guard = cache.lock().expect("cache poisoned");
    Ok(Arc::clone(guard.entry(r).or_insert(forms)))
}

fn check_k(r: usize, k: usize) -> Result<()> {
    if k >= r {
        return Err(Error::InvalidParameter(format!(
            "sub-stencil index k = {k} must be below r = {r}"
        )));
    }
    Ok(())
}

/// `I^{r,j}_k` on the sub-stencil `x_{j+k-r} ..= x_{j+k}`.
pub fn smoothness_indicator(signal: &SampledSignal, j: usize, r: usize, k: usize) -> Result<f64> {
    let forms = indicator_forms(r)?;
    check_k(r, k)?;
    let window = signal.window(j as i64 + k as i64 - r as i64, r + 1)?;
    Ok(forms[k].eval(window))
}

// Tabulated δ coefficients, one `(denominator, numerators)` pair per δ_p,
// numerators over the sub-stencil nodes in increasing order.
type DeltaTable = &'static [&'static [(f64, &'static [f64])]];

const DELTA3: DeltaTable = &[
    &[(6.0, &[-2.0, 9.0, -18.0, 11.0]), (2.0, &[-1.0, 4.0, -5.0, 2.0]), (6.0, &[-1.0, 3.0, -3.0, 1.0])],
    &[(6.0, &[1.0, -6.0, 3.0, 2.0]), (2.0, &[0.0, 1.0, -2.0, 1.0]), (6.0, &[-1.0, 3.0, -3.0, 1.0])],
    &[(6.0, &[-2.0, -3.0, 6.0, -1.0]), (2.0, &[1.0, -2.0, 1.0, 0.0]), (6.0, &[-1.0, 3.0, -3.0, 1.0])],
];

const DELTA4: DeltaTable = &[
    &[
        (6.0, &[1.0, -4.0, 6.0, -4.0, 1.0]),
        (4.0, &[3.0, -14.0, 24.0, -18.0, 5.0]),
        (12.0, &[11.0, -56.0, 114.0, -104.0, 35.0]),
        (12.0, &[3.0, -16.0, 36.0, -48.0, 25.0]),
    ],
    &[
        (6.0, &[1.0, -4.0, 6.0, -4.0, 1.0]),
        (4.0, &[1.0, -6.0, 12.0, -10.0, 3.0]),
        (12.0, &[-1.0, 4.0, 6.0, -20.0, 11.0]),
        (12.0, &[-1.0, 6.0, -18.0, 10.0, 3.0]),
    ],
    &[
        (6.0, &[1.0, -4.0, 6.0, -4.0, 1.0]),
        (4.0, &[-1.0, 2.0, 0.0, -2.0, 1.0]),
        (12.0, &[-1.0, 16.0, -30.0, 16.0, -1.0]),
        (12.0, &[1.0, -8.0, 0.0, 8.0, -1.0]),
    ],
    &[
        (6.0, &[1.0, -4.0, 6.0, -4.0, 1.0]),
        (4.0, &[-3.0, 10.0, -12.0, 6.0, -1.0]),
        (12.0, &[11.0, -20.0, 6.0, 4.0, -1.0]),
        (12.0, &[-3.0, -10.0, 18.0, -6.0, 1.0]),
    ],
];

/// Tabulated quadratic-form coefficients `(p, q, c)` for `c δ_p δ_q`, 0-based.
const FORM3: &[(usize, usize, f64)] = &[
    (0, 0, 1.0),
    (0, 1, -2.0),
    (0, 2, 2.0),
    (1, 1, 16.0 / 3.0),
    (1, 2, -15.0),
    (2, 2, 249.0 / 5.0),
];

const FORM4: &[(usize, usize, f64)] = &[
    (0, 0, 1748.0 / 35.0),
    (1, 1, 83.0 / 15.0),
    (2, 2, 4.0 / 3.0),
    (3, 3, 1.0),
    (0, 1, -46.0 / 3.0),
    (0, 2, 12.0 / 5.0),
    (0, 3, -1.0 / 2.0),
    (1, 2, -5.0 / 2.0),
    (1, 3, 2.0 / 3.0),
    (2, 3, -1.0),
];

fn tables(r: usize) -> Result<(DeltaTable, &'static [(usize, usize, f64)])> {
    match r {
        3 => Ok((DELTA3, FORM3)),
        4 => Ok((DELTA4, FORM4)),
        _ => Err(Error::UnsupportedR(r)),
    }
}

/// The `δ` values of the tabulated form for `r ∈ {3, 4}`.
pub fn quadform_deltas(signal: &SampledSignal, j: usize, r: usize, k: usize) -> Result<Vec<f64>> {
    let (deltas, _) = tables(r)?;
    check_k(r, k)?;
    let window = signal.window(j as i64 + k as i64 - r as i64, r + 1)?;
    Ok(deltas[k]
        .iter()
        .map(|(den, nums)| nums.iter().zip(window).map(|(a, f)| a * f).sum::<f64>() / den)
        .collect())
}

/// Indicator from the tabulated `δ` quadratic forms (`r ∈ {3, 4}` only),
/// kept as an independent cross-check of [`smoothness_indicator`].
pub fn quadform_indicator(signal: &SampledSignal, j: usize, r: usize, k: usize) -> Result<f64> {
    let (_, form) = tables(r)?;
    let d = quadform_deltas(signal, j, r, k)?;
    Ok(form.iter().map(|&(p, qq, c)| c * d[p] * d[qq]).sum())
}

/// `J_k = |f_{j+k} - f_{j+k-1}|^{2t}` for `k = 1..r-1` (`right`) and
/// `k = -1..-(r-1)` (`left`, indexed by `|k| - 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpMeasures {
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

impl JumpMeasures {
    /// `J_k` for `k ≠ 0`, `|k| < r`.
    pub fn get(&self, k: i64) -> Option<f64> {
        let idx = k.unsigned_abs() as usize;
        match k {
            0 => None,
            k if k > 0 => self.right.get(idx - 1).copied(),
            _ => self.left.get(idx - 1).copied(),
        }
    }
}

pub fn jump_measures(signal: &SampledSignal, j: usize, r: usize, t: u32) -> Result<JumpMeasures> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let w = signal.window(j as i64 - r as i64, 2 * r)?;
    // node j + k sits at w[r + k]
    let jump = |k: i64| -> f64 {
        let i = (r as i64 + k) as usize;
        (w[i] - w[i - 1]).abs().powi(2 * t as i32)
    };
    Ok(JumpMeasures {
        right: (1..r as i64).map(jump).collect(),
        left: (1..r as i64).map(|k| jump(-k)).collect(),
    })
}

/// Indicators and jump measures at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessProfile {
    pub j: usize,
    pub r: usize,
    pub t: u32,
    pub indicators: Vec<f64>,
    pub jumps: JumpMeasures,
}

pub fn smoothness_profile(signal: &SampledSignal, j: usize, r: usize, t: u32) -> Result<SmoothnessProfile> {
    let indicators = (0..r)
        .map(|k| smoothness_indicator(signal, j, r, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SmoothnessProfile {
        j,
        r,
        t,
        indicators,
        jumps: jump_measures(signal, j, r, t)?,
    })
}
