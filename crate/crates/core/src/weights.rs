//! Nonlinear weights: WENO, the order-2 and order-4 rational families, and
//! general order-`2r` rational weights driven by jump measures.
//!
//! Every family is of the form `α_k = base_k + S · shape_k` for a possibly
//! huge scale `S` (powers of `h^{-1}` and of the data differences). `S` is
//! handled in log space and whichever of the two terms is larger is kept at
//! unit size before normalising, so no intermediate overflows and the result
//! is a convex combination for any finite data.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::SampledSignal;
use crate::optimal::{optimal_table, OptimalWeightTable};
use crate::smoothness::{indicator_forms, IndicatorForm, MAX_ORDER};
use crate::stencil::{dot, linear_beta, midpoint_coeffs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Linear,
    Weno,
    Rational2Family1,
    Rational2Family2,
    Rational4V3,
    Rational4V4,
    Rational,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        SchemeKind::Linear,
        SchemeKind::Weno,
        SchemeKind::Rational2Family1,
        SchemeKind::Rational2Family2,
        SchemeKind::Rational4V3,
        SchemeKind::Rational4V4,
        SchemeKind::Rational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Linear => "linear",
            SchemeKind::Weno => "weno",
            SchemeKind::Rational2Family1 => "rational2_family1",
            SchemeKind::Rational2Family2 => "rational2_family2",
            SchemeKind::Rational4V3 => "rational4_v3",
            SchemeKind::Rational4V4 => "rational4_v4",
            SchemeKind::Rational => "rational",
        }
    }

    /// Whether the scheme is parameterised by `r` (the others have a fixed
    /// 4-point window).
    pub fn uses_r(self) -> bool {
        matches!(self, SchemeKind::Linear | SchemeKind::Weno | SchemeKind::Rational)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown scheme `{s}` (expected one of: {})",
                    SchemeKind::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

/// Scheme selector and parameters. Unset options take their defaults:
/// `t = 2r - 1` (`3` for the order-4 rational weights), `eps = h^2`,
/// `weno_power = r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub r: usize,
    pub t: Option<u32>,
    pub eps: Option<f64>,
    pub alpha: f64,
    pub weno_power: Option<u32>,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, r: usize) -> Self {
        Self {
            scheme,
            r,
            t: None,
            eps: None,
            alpha: 1.0,
            weno_power: None,
        }
    }

    pub fn with_t(mut self, t: u32) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_weno_power(mut self, p: u32) -> Self {
        self.weno_power = Some(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scheme.uses_r() && !(1..=MAX_ORDER).contains(&self.r) {
            return Err(Error::InvalidParameter(format!(
                "r = {} outside [1, {MAX_ORDER}]",
                self.r
            )));
        }
        if self.t == Some(0) {
            return Err(Error::InvalidParameter("t must be at least 1".into()));
        }
        if self.weno_power == Some(0) {
            return Err(Error::InvalidParameter("weno_power must be at least 1".into()));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} must be nonnegative",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Order parameter actually used: `r`, or 2 for the order-4 rational
    /// weights and 1 for the order-2 families.
    pub fn effective_r(&self) -> usize {
        match self.scheme {
            SchemeKind::Rational2Family1 | SchemeKind::Rational2Family2 => 1,
            SchemeKind::Rational4V3 | SchemeKind::Rational4V4 => 2,
            _ => self.r,
        }
    }

    /// Points on each side of the midpoint: the window is `x_{j-w} ..= x_{j+w-1}`.
    pub fn half_width(&self) -> usize {
        if self.scheme.uses_r() {
            self.r
        } else {
            2
        }
    }

    pub fn t_or_default(&self) -> u32 {
        self.t.unwrap_or(2 * self.effective_r() as u32 - 1)
    }

    pub fn eps_for(&self, h: f64) -> f64 {
        self.eps.unwrap_or(h * h)
    }

    pub fn weno_power_or_default(&self) -> u32 {
        self.weno_power.unwrap_or(self.r as u32)
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub omegas: Vec<f64>,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.omegas.iter().sum()
    }
}

/// Normalises `base_k + exp(ln_s) * shape_k`. Requires `base_k > 0` and
/// `max shape_k` of order one whenever `ln_s` is large.
fn normalize_scaled(base: &[f64], ln_s: f64, shape: &[f64]) -> Vec<f64> {
    let alpha: Vec<f64> = if ln_s > 0.0 {
        let damp = (-ln_s).exp();
        base.iter().zip(shape).map(|(b, s)| b * damp + s).collect()
    } else {
        let grow = ln_s.exp();
        base.iter().zip(shape).map(|(b, s)| b + grow * s).collect()
    };
    normalize(alpha)
}

/// Power of two bringing huge data down to unit size, so squared
/// differences and indicators stay finite; `1` for ordinary data.
fn data_scale(window: &[f64]) -> f64 {
    let m = window.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m > 1e100 {
        2f64.powi(m.log2().floor() as i32)
    } else {
        1.0
    }
}

/// `ln(e^a + e^b)`.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn normalize(mut alpha: Vec<f64>) -> Vec<f64> {
    let total: f64 = alpha.iter().sum();
    for a in &mut alpha {
        *a /= total;
    }
    alpha
}

/// Evaluation engine with every table the scheme needs resolved up front.
#[derive(Debug, Clone)]
pub struct Scheme {
    config: SchemeConfig,
    r: usize,
    t: u32,
    linear: Vec<f64>,
    sub_rules: Vec<Vec<f64>>,
    forms: Option<Arc<Vec<IndicatorForm>>>,
    table: Option<Arc<OptimalWeightTable>>,
}

impl Scheme {
    pub fn new(config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        let r = config.effective_r();
        let needs_substencils = !matches!(
            config.scheme,
            SchemeKind::Rational2Family1 | SchemeKind::Rational2Family2
        );
        let sub_rules = if needs_substencils {
            (0..r)
                .map(|k| midpoint_coeffs(r, k as i64).coeffs_f64().to_vec())
                .collect()
        } else {
            Vec::new()
        };
        let forms = match config.scheme {
            SchemeKind::Weno | SchemeKind::Rational4V3 | SchemeKind::Rational4V4 => {
                Some(indicator_forms(r)?)
            }
            _ => None,
        };
        let table = if config.scheme.uses_r() {
            Some(optimal_table(r)?)
        } else {
            None
        };
        Ok(Self {
            config,
            r,
            t: config.t_or_default(),
            linear: linear_beta(config.half_width())?.coeffs_f64().to_vec(),
            sub_rules,
            forms,
            table,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn half_width(&self) -> usize {
        self.config.half_width()
    }

    /// Number of values in the evaluation window.
    pub fn window_len(&self) -> usize {
        2 * self.half_width()
    }

    /// Coefficients of the linear `2w`-point rule on the same window.
    pub fn linear_coeffs(&self) -> &[f64] {
        &self.linear
    }

    /// Weights from the `2w` window values `f_{j-w} ..= f_{j+w-1}`.
    ///
    /// The linear scheme reports the optimal weights, which reproduce its
    /// rule exactly.
    pub fn weights(&self, window: &[f64], h: f64) -> WeightVector {
        debug_assert_eq!(window.len(), self.window_len());
        let omegas = match self.config.scheme {
            SchemeKind::Linear => self.optimal().to_vec(),
            SchemeKind::Weno => self.weno(window, h),
            SchemeKind::Rational2Family1 => self.rational2(window, 1),
            SchemeKind::Rational2Family2 => self.rational2(window, 2),
            SchemeKind::Rational4V3 => self.rational4_v3(window, h),
            SchemeKind::Rational4V4 => self.rational4_v4(window, h),
            SchemeKind::Rational => self.rational_general(window, h),
        };
        WeightVector { omegas }
    }

    /// Predicted value at the midpoint `x_{j-1/2}` of the window.
    pub fn interpolate(&self, window: &[f64], h: f64) -> f64 {
        let w = self.half_width();
        match self.config.scheme {
            SchemeKind::Linear => dot(&self.linear, window),
            SchemeKind::Rational2Family1 | SchemeKind::Rational2Family2 => {
                let om = self.weights(window, h).omegas;
                om[0] * window[w - 1] + om[1] * window[w]
            }
            _ => {
                let om = self.weights(window, h).omegas;
                om.iter()
                    .enumerate()
                    .map(|(k, o)| o * dot(&self.sub_rules[k], self.substencil(window, k)))
                    .sum()
            }
        }
    }

    fn optimal(&self) -> &[f64] {
        self.table.as_ref().expect("r-parameterised scheme").optimal_f64()
    }

    /// Values of `S^r_k`: nodes `j + k - r ..= j + k`.
    fn substencil<'a>(&self, window: &'a [f64], k: usize) -> &'a [f64] {
        let w = self.half_width();
        &window[w + k - self.r..=w + k]
    }

    /// Indicators of the window divided by `s`, and `ln s^2` (zero when no
    /// rescaling was needed).
    fn indicators(&self, window: &[f64]) -> (Vec<f64>, f64) {
        let forms = self.forms.as_ref().expect("indicator forms");
        let s = data_scale(window);
        let scaled: Vec<f64>;
        let window = if s == 1.0 {
            window
        } else {
            scaled = window.iter().map(|v| v / s).collect();
            &scaled
        };
        let ind = (0..self.r).map(|k| forms[k].eval(self.substencil(window, k))).collect();
        (ind, 2.0 * s.ln())
    }

    /// `α_k = c_k / (ε + I_k)^p`, scaled by `(min_k (ε + I_k))^p`.
    fn inverse_power(&self, window: &[f64], h: f64, c: &[f64], p: u32) -> Vec<f64> {
        let eps = self.config.eps_for(h);
        let (ind, ln_s2) = self.indicators(window);
        let alpha = if ln_s2 == 0.0 {
            let beta: Vec<f64> = ind.iter().map(|i| eps + i).collect();
            let m = beta.iter().copied().fold(f64::INFINITY, f64::min);
            beta.iter()
                .zip(c)
                .map(|(b, c)| c * (m / b).powi(p as i32))
                .collect()
        } else {
            let ln_eps = eps.ln();
            let ln_beta: Vec<f64> = ind.iter().map(|i| log_add(ln_eps, ln_s2 + i.ln())).collect();
            let m = ln_beta.iter().copied().fold(f64::INFINITY, f64::min);
            ln_beta
                .iter()
                .zip(c)
                .map(|(b, c)| c * (p as f64 * (m - b)).exp())
                .collect()
        };
        normalize(alpha)
    }

    fn weno(&self, window: &[f64], h: f64) -> Vec<f64> {
        let c = self.optimal().to_vec();
        self.inverse_power(window, h, &c, self.config.weno_power_or_default())
    }

    fn rational4_v3(&self, window: &[f64], h: f64) -> Vec<f64> {
        self.inverse_power(window, h, &[0.5, 0.5], self.t)
    }

    /// `α_k = 1 + h^{-2t} I_{1-k}^t`: a rough sub-stencil boosts the weight
    /// of the other one, as in the order-2 families.
    fn rational4_v4(&self, window: &[f64], h: f64) -> Vec<f64> {
        let (mut ind, ln_s2) = self.indicators(window);
        ind.reverse();
        let m = ind.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return vec![0.5, 0.5];
        }
        let t = self.t as f64;
        let ln_s = -2.0 * t * h.ln() + t * (ln_s2 + m.ln());
        let shape: Vec<f64> = ind.iter().map(|i| (i / m).powi(self.t as i32)).collect();
        normalize_scaled(&[1.0, 1.0], ln_s, &shape)
    }

    /// Order-2 families on `f_{j-2}, f_{j-1}, f_j, f_{j+1}`.
    fn rational2(&self, window: &[f64], family: u8) -> Vec<f64> {
        let sc = data_scale(window);
        let [fm2, fm1, f0, fp1] = [window[0], window[1], window[2], window[3]].map(|v| v / sc);
        let (d0, d1): (Vec<f64>, Vec<f64>) = if family == 1 {
            (vec![fm1 - fp1], vec![fm2 - f0])
        } else {
            (vec![fm1 - fp1, f0 - fp1], vec![fm1 - fm2, f0 - fm2])
        };
        let m = d0.iter().chain(&d1).fold(0.0f64, |acc, d| acc.max(d.abs()));
        let alpha = self.config.alpha;
        if alpha == 0.0 || m == 0.0 {
            return vec![0.5, 0.5];
        }
        let shape = [&d0, &d1].map(|ds| ds.iter().map(|d| (d / m) * (d / m)).sum::<f64>());
        let ln_s = alpha.ln() + 2.0 * (m.ln() + sc.ln());
        normalize_scaled(&[1.0, 1.0], ln_s, &shape)
    }

    /// `α = O^r + h^{-t} (A^r | Ã^r) (J_{r-1}, ..., J_1, J_{-1}, ..., J_{-r+1})`.
    fn rational_general(&self, window: &[f64], h: f64) -> Vec<f64> {
        let r = self.r;
        let table = self.table.as_ref().expect("optimal table");
        if r == 1 {
            return vec![1.0];
        }
        let w = self.half_width();
        let sc = data_scale(window);
        // |f_{j+k} - f_{j+k-1}| / sc in column order
        let diff = |k: i64| -> f64 {
            let i = (w as i64 + k) as usize;
            (window[i] / sc - window[i - 1] / sc).abs()
        };
        let cols: Vec<f64> = (1..r as i64)
            .rev()
            .map(diff)
            .chain((1..r as i64).map(|k| diff(-k)))
            .collect();
        let d = cols.iter().copied().fold(0.0, f64::max);
        let base = table.optimal_f64();
        if d == 0.0 {
            return base.to_vec();
        }
        let two_t = 2 * self.t as i32;
        let scaled: Vec<f64> = cols.iter().map(|c| (c / d).powi(two_t)).collect();
        let shape: Vec<f64> = table
            .combined_f64()
            .iter()
            .map(|row| dot(row, &scaled))
            .collect();
        let t = self.t as f64;
        let ln_s = -t * h.ln() + 2.0 * t * (d.ln() + sc.ln());
        normalize_scaled(base, ln_s, &shape)
    }
}

fn window_at<'a>(signal: &'a SampledSignal, j: usize, scheme: &Scheme) -> Result<&'a [f64]> {
    let w = scheme.half_width();
    signal.window(j as i64 - w as i64, 2 * w)
}

/// Weights at the midpoint `x_{j-1/2}` for any scheme.
pub fn nonlinear_weights(signal: &SampledSignal, j: usize, config: &SchemeConfig) -> Result<WeightVector> {
    let scheme = Scheme::new(*config)?;
    let window = window_at(signal, j, &scheme)?;
    Ok(scheme.weights(window, signal.grid().spacing()))
}

fn expect_kind(config: &SchemeConfig, allowed: &[SchemeKind]) -> Result<()> {
    if allowed.contains(&config.scheme) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "scheme {} is not one of {}",
            config.scheme,
            allowed.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
        )))
    }
}

/// `α_k = C^{2r-1}_{r-1,k} / (ε + I^{r,j}_k)^p`.
pub fn weno_weights(signal: &SampledSignal, j: usize, config: &SchemeConfig) -> Result<WeightVector> {
    expect_kind(config, &[SchemeKind::Weno])?;
    nonlinear_weights(signal, j, config)
}

/// Order-2 weights for `f_{j-1}` and `f_j`; `family` is 1 or 2.
pub fn rational2_weights(signal: &SampledSignal, j: usize, family: u8, alpha: f64) -> Result<WeightVector> {
    let kind = match family {
        1 => SchemeKind::Rational2Family1,
        2 => SchemeKind::Rational2Family2,
        _ => return Err(Error::InvalidParameter(format!("family must be 1 or 2, got {family}"))),
    };
    nonlinear_weights(signal, j, &SchemeConfig::new(kind, 1).with_alpha(alpha))
}

/// Order-4 weights for `p^2_0` and `p^2_1`.
pub fn rational4_weights(signal: &SampledSignal, j: usize, config: &SchemeConfig) -> Result<WeightVector> {
    expect_kind(config, &[SchemeKind::Rational4V3, SchemeKind::Rational4V4])?;
    nonlinear_weights(signal, j, config)
}

/// General order-`2r` rational weights.
pub fn rational_general_weights(signal: &SampledSignal, j: usize, config: &SchemeConfig) -> Result<WeightVector> {
    expect_kind(config, &[SchemeKind::Rational])?;
    nonlinear_weights(signal, j, config)
}
