//! Exact midpoint rules for interpolating polynomials on arbitrary stencils.
//!
//! Positions are measured in units of `h` relative to node `x_j`, so the target
//! `x_{j-1/2}` sits at `-1/2` and the stencil `S^a_b` covers offsets
//! `b - a ..= b`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{frac, q, to_f64, Q};
use crate::grid::SampledSignal;

/// The stencil `{x_{j+b-a}, ..., x_{j+b}}` carrying a polynomial of degree `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StencilSpec {
    pub degree: usize,
    pub offset: i64,
}

impl StencilSpec {
    pub fn new(degree: usize, offset: i64) -> Self {
        Self { degree, offset }
    }

    /// Offset of the leftmost node relative to `j`.
    pub fn first(&self) -> i64 {
        self.offset - self.degree as i64
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether this is one of the admissible stencils `r <= a <= 2r-1`,
    /// `a - r <= b <= r - 1` of the order-`r` family.
    pub fn in_family(&self, r: usize) -> bool {
        let a = self.degree as i64;
        let r = r as i64;
        r <= a && a < 2 * r && a - r <= self.offset && self.offset < r
    }
}

/// Coefficients `c_m` with `p^a_b(x_{j-1/2}) = sum_m c_m f_{j+b-a+m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointRule {
    spec: StencilSpec,
    coeffs: Vec<Q>,
    coeffs_f64: Vec<f64>,
}

impl MidpointRule {
    pub fn spec(&self) -> StencilSpec {
        self.spec
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> &[f64] {
        &self.coeffs_f64
    }

    /// Coefficients rendered as `p/q` strings.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }

    /// Applies the rule to the `a + 1` values of its stencil.
    pub fn apply(&self, stencil_values: &[f64]) -> f64 {
        debug_assert_eq!(stencil_values.len(), self.coeffs_f64.len());
        dot(&self.coeffs_f64, stencil_values)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lagrange basis of the nodes `offset - degree ..= offset` evaluated at `-1/2`.
pub fn midpoint_coeffs(a: usize, b: i64) -> MidpointRule {
    let spec = StencilSpec::new(a, b);
    let nodes: Vec<Q> = (spec.first()..=b).map(q).collect();
    let target = frac(-1, 2);
    let coeffs: Vec<Q> = nodes
        .iter()
        .enumerate()
        .map(|(m, um)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(n, _)| n != m)
                .fold(Q::one(), |acc, (_, un)| acc * (&target - un) / (um - un))
        })
        .collect();
    let coeffs_f64 = coeffs.iter().map(to_f64).collect();
    MidpointRule {
        spec,
        coeffs,
        coeffs_f64,
    }
}

/// The classical `2r`-point rule, stencil `S^{2r-1}_{r-1}`.
pub fn linear_beta(r: usize) -> Result<MidpointRule> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    Ok(midpoint_coeffs(2 * r - 1, r as i64 - 1))
}

/// Evaluates `rule` at the midpoint of `[x_{j-1}, x_j]`.
pub fn eval_midpoint(signal: &SampledSignal, j: usize, rule: &MidpointRule) -> Result<f64> {
    let window = signal.window(j as i64 + rule.spec.first(), rule.spec.len())?;
    Ok(rule.apply(window))
}

/// Sum of the exact coefficients, `1` for every rule.
pub fn coefficient_sum(rule: &MidpointRule) -> Q {
    rule.coeffs.iter().fold(Q::zero(), |acc, c| acc + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, UniformGrid};

    fn fr(v: &[(i64, i64)]) -> Vec<Q> {
        v.iter().map(|&(n, d)| frac(n, d)).collect()
    }

    /// Independent oracle: solve the Vandermonde system `sum_m c_m u_m^p = (-1/2)^p`.
    fn vandermonde_oracle(a: usize, b: i64) -> Vec<Q> {
        let nodes: Vec<i64> = (b - a as i64..=b).collect();
        let m: Vec<Vec<Q>> = (0..=a)
            .map(|p| nodes.iter().map(|&u| num_traits::pow(q(u), p)).collect())
            .collect();
        let rhs: Vec<Q> = (0..=a).map(|p| num_traits::pow(frac(-1, 2), p)).collect();
        crate::exact::solve_exact(&m, &rhs).unwrap()
    }

    #[test]
    fn known_rules() {
        assert_eq!(midpoint_coeffs(1, 0).coeffs(), fr(&[(1, 2), (1, 2)]).as_slice());
        let cubic = fr(&[(-1, 16), (9, 16), (9, 16), (-1, 16)]);
        assert_eq!(midpoint_coeffs(3, 1).coeffs(), cubic.as_slice());
        assert_eq!(vandermonde_oracle(3, 1), cubic);
        assert_eq!(linear_beta(1).unwrap().coeffs(), fr(&[(1, 2), (1, 2)]).as_slice());
        assert_eq!(linear_beta(2).unwrap().coeffs(), cubic.as_slice());
        let six = fr(&[(3, 256), (-25, 256), (150, 256), (150, 256), (-25, 256), (3, 256)]);
        assert_eq!(linear_beta(3).unwrap().coeffs(), six.as_slice());
        assert_eq!(vandermonde_oracle(5, 2), six);
    }

    #[test]
    fn rules_match_vandermonde_oracle_and_sum_to_one() {
        for a in 0..=9usize {
            for b in -(a as i64) - 2..=a as i64 + 2 {
                let rule = midpoint_coeffs(a, b);
                assert_eq!(rule.coeffs(), vandermonde_oracle(a, b).as_slice(), "({a},{b})");
                assert_eq!(coefficient_sum(&rule), q(1));
            }
        }
    }

    #[test]
    fn mirror_symmetry() {
        for a in 0..=9usize {
            for b in 0..=a as i64 {
                let mut rev = midpoint_coeffs(a, b).coeffs().to_vec();
                rev.reverse();
                let mirror = midpoint_coeffs(a, a as i64 - 1 - b);
                assert_eq!(rev.as_slice(), mirror.coeffs(), "({a},{b})");
            }
        }
        for r in 1..=6 {
            let beta = linear_beta(r).unwrap();
            let c = beta.coeffs();
            for xi in 0..r {
                assert_eq!(c[xi], c[2 * r - 1 - xi]);
            }
        }
    }

    #[test]
    fn polynomial_reproduction() {
        let g = UniformGrid::new(-1.0, 1.0, 5, 1).unwrap();
        for a in 0..=8usize {
            for m in 0..=a as i32 {
                let s = sample(|x| x.powi(m), &g).unwrap();
                for b in [0i64, a as i64 / 2, a as i64 - 1] {
                    let rule = midpoint_coeffs(a, b);
                    for j in 1..g.n_nodes() {
                        let Ok(v) = eval_midpoint(&s, j, &rule) else {
                            continue;
                        };
                        let exact = g.midpoint(j).powi(m);
                        let scale = exact.abs().max(1.0);
                        assert!(
                            (v - exact).abs() <= 1e-12 * scale,
                            "a={a} b={b} m={m} j={j}: {v} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let g = UniformGrid::new(0.0, 1.0, 4, 1).unwrap();
        let s = sample(|_| 5.0, &g).unwrap();
        assert_eq!(eval_midpoint(&s, 8, &linear_beta(3).unwrap()).unwrap(), 5.0);

        let s = sample(|x| x * x * x, &g).unwrap();
        for k in 0..3 {
            let v = eval_midpoint(&s, 8, &midpoint_coeffs(3, k)).unwrap();
            assert!((v - g.midpoint(8).powi(3)).abs() < 1e-15);
        }

        let err = eval_midpoint(&s, 1, &linear_beta(3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { first: -2, .. }));
    }

    #[test]
    fn six_point_rule_splits_into_cubics() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = UniformGrid::with_cells(0.0, 1.0, 12).unwrap();
        for _ in 0..100 {
            let vals: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = SampledSignal::new(g, vals).unwrap();
            let j = 6;
            let wide = eval_midpoint(&s, j, &midpoint_coeffs(5, 2)).unwrap();
            let combo = 3.0 / 16.0 * eval_midpoint(&s, j, &midpoint_coeffs(3, 0)).unwrap()
                + 5.0 / 8.0 * eval_midpoint(&s, j, &midpoint_coeffs(3, 1)).unwrap()
                + 3.0 / 16.0 * eval_midpoint(&s, j, &midpoint_coeffs(3, 2)).unwrap();
            assert!((wide - combo).abs() < 1e-14);
        }
    }

    #[test]
    fn family_membership() {
        assert!(StencilSpec::new(5, 2).in_family(3));
        assert!(StencilSpec::new(4, 1).in_family(3));
        assert!(!StencilSpec::new(4, 0).in_family(3));
        assert!(!StencilSpec::new(6, 2).in_family(3));
    }
}
