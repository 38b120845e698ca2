//! Level `i` → level `i + 1` prediction: even nodes are copied, odd nodes are
//! interpolated at the midpoints.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{SampledSignal, UniformGrid};
use crate::stencil::{dot, midpoint_coeffs};
use crate::weights::{Scheme, SchemeConfig};

/// What to do at midpoints whose centred window leaves the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Linear rule of the same width with the stencil moved inside the grid.
    #[default]
    Shift,
    /// Leave the point unavailable.
    Restrict,
}

impl fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryPolicy::Shift => "shift",
            BoundaryPolicy::Restrict => "restrict",
        })
    }
}

impl FromStr for BoundaryPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shift" => Ok(BoundaryPolicy::Shift),
            "restrict" => Ok(BoundaryPolicy::Restrict),
            _ => Err(Error::InvalidParameter(format!(
                "unknown boundary policy `{s}` (expected shift or restrict)"
            ))),
        }
    }
}

/// Values on the child grid; `None` marks points left out under
/// [`BoundaryPolicy::Restrict`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionResult {
    grid: UniformGrid,
    values: Vec<Option<f64>>,
    scheme: SchemeConfig,
    boundary: BoundaryPolicy,
}

impl PredictionResult {
    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn boundary(&self) -> BoundaryPolicy {
        self.boundary
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// The refined signal, if every node has a value.
    pub fn signal(&self) -> Result<SampledSignal> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "node {i} is unavailable under the restrict boundary policy"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SampledSignal::new(self.grid, values)
    }

    /// `(x, value)` rows of the child grid.
    pub fn rows(&self) -> impl Iterator<Item = (f64, Option<f64>)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        crate::grid::write_xf_csv(writer, self.rows())
    }
}

/// Predicted value at `x_{j-1/2}`, the midpoint of `[x_{j-1}, x_j]`.
pub fn interpolate_midpoint(signal: &SampledSignal, j: usize, config: &SchemeConfig) -> Result<f64> {
    let scheme = Scheme::new(*config)?;
    let w = scheme.half_width();
    let window = signal.window(j as i64 - w as i64, 2 * w)?;
    Ok(scheme.interpolate(window, signal.grid().spacing()))
}

pub fn predict_level(
    signal: &SampledSignal,
    config: &SchemeConfig,
    policy: BoundaryPolicy,
) -> Result<PredictionResult> {
    predict_with(&Scheme::new(*config)?, signal, policy)
}

/// [`predict_level`] with a prebuilt engine.
pub fn predict_with(scheme: &Scheme, signal: &SampledSignal, policy: BoundaryPolicy) -> Result<PredictionResult> {
    let w = scheme.half_width();
    let n = signal.grid().n_cells();
    if signal.len() < 2 * w + 1 {
        return Err(Error::SignalTooShort {
            nodes: signal.len(),
            required: 2 * w + 1,
        });
    }
    let h = signal.grid().spacing();
    let f = signal.values();
    let degree = 2 * w - 1;
    let shifted = |j: usize| -> f64 {
        // nodes j + b - degree ..= j + b must lie in 0 ..= n
        let lo = degree as i64 - j as i64;
        let hi = n as i64 - j as i64;
        let b = (w as i64 - 1).clamp(lo, hi);
        let rule = midpoint_coeffs(degree, b);
        let first = (j as i64 + b - degree as i64) as usize;
        dot(rule.coeffs_f64(), &f[first..=first + degree])
    };
    let odd: Vec<Option<f64>> = (1..=n)
        .into_par_iter()
        .map(|j| {
            if j >= w && j + w - 1 <= n {
                Some(scheme.interpolate(&f[j - w..j + w], h))
            } else {
                match policy {
                    BoundaryPolicy::Shift => Some(shifted(j)),
                    BoundaryPolicy::Restrict => None,
                }
            }
        })
        .collect();
    let mut values = Vec::with_capacity(2 * n + 1);
    values.push(Some(f[0]));
    for (j, v) in odd.into_iter().enumerate() {
        values.push(v);
        values.push(Some(f[j + 1]));
    }
    Ok(PredictionResult {
        grid: signal.grid().child(),
        values,
        scheme: *scheme.config(),
        boundary: policy,
    })
}

/// Applies [`predict_level`] `levels` times. Only a single level is allowed
/// under [`BoundaryPolicy::Restrict`], since unavailable points cannot feed
/// the next level.
pub fn refine(
    signal: &SampledSignal,
    config: &SchemeConfig,
    policy: BoundaryPolicy,
    levels: u32,
) -> Result<PredictionResult> {
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be at least 1".into()));
    }
    if levels > 1 && policy == BoundaryPolicy::Restrict {
        return Err(Error::InvalidParameter(
            "the restrict boundary policy supports a single level".into(),
        ));
    }
    let scheme = Scheme::new(*config)?;
    let mut current = predict_with(&scheme, signal, policy)?;
    for _ in 1..levels {
        current = predict_with(&scheme, &current.signal()?, policy)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;
    use crate::weights::SchemeKind;

    fn cfg(kind: SchemeKind, r: usize) -> SchemeConfig {
        SchemeConfig::new(kind, r)
    }

    #[test]
    fn constant_signal_stays_constant() {
        let g = UniformGrid::new(0.0, 1.0, 4, 1).unwrap();
        let s = sample(|_| 2.5, &g).unwrap();
        for kind in SchemeKind::ALL {
            let p = predict_level(&s, &cfg(kind, 3), BoundaryPolicy::Shift).unwrap();
            assert_eq!(p.grid().n_cells(), 32);
            let out = p.signal().unwrap();
            assert!(out.values().iter().all(|&v| (v - 2.5).abs() < 1e-14), "{kind}");
        }
    }

    #[test]
    fn even_nodes_are_copied_bitwise() {
        let g = UniformGrid::new(-1.0, 1.0, 5, 1).unwrap();
        let s = sample(|x| (7.0 * x).exp().sin() + 1e-9 * x, &g).unwrap();
        for kind in SchemeKind::ALL {
            let p = predict_level(&s, &cfg(kind, 3), BoundaryPolicy::Restrict).unwrap();
            for (j, v) in s.values().iter().enumerate() {
                assert_eq!(p.values()[2 * j].unwrap().to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn cubic_reproduction() {
        let g = UniformGrid::new(-1.0, 1.0, 4, 1).unwrap();
        let f = |x: f64| x * x * x - 0.5 * x + 0.25;
        let s = sample(f, &g).unwrap();
        for kind in [SchemeKind::Linear, SchemeKind::Weno, SchemeKind::Rational] {
            for r in 3..=4 {
                let p = predict_level(&s, &cfg(kind, r), BoundaryPolicy::Shift).unwrap();
                for (x, v) in p.rows() {
                    assert!((v.unwrap() - f(x)).abs() < 1e-13, "{kind} r={r} x={x}");
                }
            }
        }
    }

    #[test]
    fn restrict_marks_boundary_points() {
        let g = UniformGrid::new(0.0, 1.0, 3, 1).unwrap();
        let s = sample(|x| x, &g).unwrap();
        let p = predict_level(&s, &cfg(SchemeKind::Rational, 3), BoundaryPolicy::Restrict).unwrap();
        // odd child nodes 2j - 1 with j < 3 or j > 6 are missing
        let missing: Vec<usize> = (0..p.values().len()).filter(|&i| p.values()[i].is_none()).collect();
        assert_eq!(missing, vec![1, 3, 13, 15]);
        assert!(!p.is_complete());
        assert!(p.signal().is_err());
        assert!(refine(&s, &cfg(SchemeKind::Rational, 3), BoundaryPolicy::Restrict, 2).is_err());
    }

    #[test]
    fn too_short() {
        let g = UniformGrid::with_cells(0.0, 1.0, 5).unwrap();
        let s = sample(|x| x, &g).unwrap();
        let err = predict_level(&s, &cfg(SchemeKind::Linear, 3), BoundaryPolicy::Shift).unwrap_err();
        assert!(matches!(err, Error::SignalTooShort { nodes: 6, required: 7 }));
        assert!(predict_level(&s, &cfg(SchemeKind::Linear, 2), BoundaryPolicy::Shift).is_ok());
    }

    #[test]
    fn multi_level_refinement() {
        let g = UniformGrid::new(0.0, 1.0, 3, 1).unwrap();
        let s = sample(|x| x * x, &g).unwrap();
        let p = refine(&s, &cfg(SchemeKind::Rational, 2), BoundaryPolicy::Shift, 3).unwrap();
        assert_eq!(p.grid().n_cells(), 64);
        for (x, v) in p.rows() {
            assert!((v.unwrap() - x * x).abs() < 1e-14);
        }
        assert!(refine(&s, &cfg(SchemeKind::Rational, 2), BoundaryPolicy::Shift, 0).is_err());
    }

    #[test]
    fn interpolate_single_point() {
        let g = UniformGrid::new(0.0, 1.0, 4, 1).unwrap();
        let s = sample(|x| x, &g).unwrap();
        for kind in SchemeKind::ALL {
            let v = interpolate_midpoint(&s, 8, &cfg(kind, 3)).unwrap();
            assert!((v - g.midpoint(8)).abs() < 1e-15);
        }
        assert!(interpolate_midpoint(&s, 1, &cfg(SchemeKind::Linear, 3)).is_err());
    }

    #[test]
    fn linear_order_on_sine() {
        let mut prev: Option<f64> = None;
        for level in 4..=7u32 {
            let g = UniformGrid::new(0.0, 16.0, level, 4).unwrap();
            let s = sample(f64::sin, &g).unwrap();
            let p = predict_level(&s, &cfg(SchemeKind::Linear, 3), BoundaryPolicy::Restrict).unwrap();
            let err = p
                .rows()
                .filter_map(|(x, v)| v.map(|v| (v - x.sin()).abs()))
                .fold(0.0, f64::max);
            if let Some(e) = prev {
                let ratio = e / err;
                assert!((ratio / 64.0 - 1.0).abs() < 0.1, "ratio {ratio}");
            }
            prev = Some(err);
        }
    }

    #[test]
    fn parse_policy() {
        assert_eq!("Shift".parse::<BoundaryPolicy>().unwrap(), BoundaryPolicy::Shift);
        assert_eq!("restrict".parse::<BoundaryPolicy>().unwrap(), BoundaryPolicy::Restrict);
        assert!("clamp".parse::<BoundaryPolicy>().is_err());
    }
}
