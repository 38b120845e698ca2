//! Test functions, jump location and numerical order studies.
//!
//! A study samples a function on successive dyadic levels `i`, predicts level
//! `i + 1` and records the error at fixed offsets from the discontinuity. The
//! order between consecutive levels is `log2(e_i / e_{i+1})`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{format_f64, sample, UniformGrid};
use crate::predictor::{predict_with, BoundaryPolicy};
use crate::weights::{Scheme, SchemeConfig};

/// Built-in test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinFunction {
    /// `e^x` for `x <= 0`, `1 + e^x` for `x > 0`.
    F1,
    /// `-x^9 + x^8 - 4x^7 + x^4 + 5x^2 + 3x` for `x < 0`, plus one for `x >= 0`.
    F2,
    Sine,
    /// The polynomial of `F2` without the jump.
    Poly9Smooth,
}

/// A jump at `at`; `right_closed` means `f(at)` belongs to the right branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discontinuity {
    pub at: f64,
    pub right_closed: bool,
}

fn poly9(x: f64) -> f64 {
    let x2 = x * x;
    let x4 = x2 * x2;
    -x4 * x4 * x + x4 * x4 - 4.0 * x4 * x2 * x + x4 + 5.0 * x2 + 3.0 * x
}

impl BuiltinFunction {
    pub const ALL: [BuiltinFunction; 4] = [
        BuiltinFunction::F1,
        BuiltinFunction::F2,
        BuiltinFunction::Sine,
        BuiltinFunction::Poly9Smooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinFunction::F1 => "f1",
            BuiltinFunction::F2 => "f2",
            BuiltinFunction::Sine => "sine",
            BuiltinFunction::Poly9Smooth => "poly9smooth",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            BuiltinFunction::F1 => {
                if x <= 0.0 {
                    x.exp()
                } else {
                    1.0 + x.exp()
                }
            }
            BuiltinFunction::F2 => {
                if x < 0.0 {
                    poly9(x)
                } else {
                    poly9(x) + 1.0
                }
            }
            BuiltinFunction::Sine => x.sin(),
            BuiltinFunction::Poly9Smooth => poly9(x),
        }
    }

    pub fn discontinuity(self) -> Option<Discontinuity> {
        match self {
            BuiltinFunction::F1 => Some(Discontinuity {
                at: 0.0,
                right_closed: false,
            }),
            BuiltinFunction::F2 => Some(Discontinuity {
                at: 0.0,
                right_closed: true,
            }),
            _ => None,
        }
    }
}

impl fmt::Display for BuiltinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase();
        BuiltinFunction::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::UnknownFunction(s.to_string()))
    }
}

/// `j0 = argmax_j |f_j - f_{j-1}|`, ties to the smallest `j`.
pub fn locate_jump(values: &[f64]) -> usize {
    let mut best = 1;
    let mut best_d = f64::NEG_INFINITY;
    for j in 1..values.len() {
        let d = (values[j] - values[j - 1]).abs();
        if d > best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// Interval `[x_{j0-1}, x_{j0}]` holding the branch switch of a known
/// discontinuity, or `None` if it is not strictly inside the grid.
pub fn jump_interval(disc: &Discontinuity, grid: &UniformGrid) -> Option<usize> {
    let j0 = (0..grid.n_nodes()).find(|&j| {
        let x = grid.node(j);
        if disc.right_closed {
            x >= disc.at
        } else {
            x > disc.at
        }
    })?;
    (j0 >= 1).then_some(j0)
}

/// `log2(e_coarse / e_fine)`.
pub fn order_estimate(e_coarse: f64, e_fine: f64) -> Result<f64> {
    for e in [e_coarse, e_fine] {
        if !(e >= 1e-300) {
            return Err(Error::DegenerateError(e));
        }
    }
    Ok((e_coarse / e_fine).log2())
}

pub const DEFAULT_OFFSETS: [i64; 5] = [0, 1, 2, 3, 4];

/// Parameters of a near-discontinuity order study.
///
/// `levels = (i0, i1)` runs the coarse levels `i0 .. i1`, each predicted to
/// the next level, so the finest errors live on level `i1`. Offset `ξ >= 0`
/// tracks the child node `2 j0 + 1 + 2ξ`, the `ξ`-th midpoint right of the
/// jump interval; `ξ < 0` tracks `2 j0 - 1 + 2ξ`, its mirror on the left.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub function: BuiltinFunction,
    pub scheme: SchemeConfig,
    pub interval: (f64, f64),
    pub levels: (u32, u32),
    pub offsets: Vec<i64>,
    pub base_cells: usize,
}

impl StudyConfig {
    pub fn new(function: BuiltinFunction, scheme: SchemeConfig, interval: (f64, f64), levels: (u32, u32)) -> Self {
        Self {
            function,
            scheme,
            interval,
            levels,
            offsets: DEFAULT_OFFSETS.to_vec(),
            base_cells: 1,
        }
    }

    pub fn with_offsets(mut self, offsets: Vec<i64>) -> Self {
        self.offsets = offsets;
        self
    }
}

/// Order between a row and the one above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// First row, or an error is unavailable.
    Missing,
    /// One of the errors is zero (or below `1e-300`).
    Exact,
    Value(f64),
}

impl Order {
    pub fn value(self) -> Option<f64> {
        match self {
            Order::Value(v) => Some(v),
            _ => None,
        }
    }

    fn render(self) -> String {
        match self {
            Order::Missing => String::new(),
            Order::Exact => "exact".into(),
            Order::Value(v) => format_f64(v),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Missing => s.serialize_none(),
            Order::Exact => s.serialize_str("exact"),
            Order::Value(v) => s.serialize_f64(*v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportCell {
    pub offset: i64,
    /// `None` when the point's window leaves the grid.
    pub error: Option<f64>,
    pub order: Order,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    /// Coarse level `i`; the errors are measured on level `i + 1`.
    pub level: u32,
    pub j0: usize,
    pub cells: Vec<ReportCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    fn column(&self, offset: i64) -> Option<usize> {
        self.config.offsets.iter().position(|&o| o == offset)
    }

    /// Order in column `offset` on the last row (the finest level pair).
    pub fn final_order(&self, offset: i64) -> Option<Order> {
        let c = self.column(offset)?;
        self.rows.last().map(|row| row.cells[c].order)
    }

    pub fn final_error(&self, offset: i64) -> Option<f64> {
        let c = self.column(offset)?;
        self.rows.last().and_then(|row| row.cells[c].error)
    }

    /// One row per level: `level,j0,error_xi<o>,order_xi<o>,...`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["level".to_string(), "j0".to_string()];
        for o in &self.config.offsets {
            header.push(format!("error_xi{o}"));
            header.push(format!("order_xi{o}"));
        }
        wtr.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.level.to_string(), row.j0.to_string()];
            for cell in &row.cells {
                rec.push(cell.error.map(format_f64).unwrap_or_default());
                rec.push(cell.order.render());
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writeln!(writer)?;
        Ok(())
    }
}

fn check_study(interval: (f64, f64), levels: (u32, u32)) -> Result<()> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::InvalidInterval { start: a, end: b });
    }
    if levels.0 >= levels.1 {
        return Err(Error::InvalidParameter(format!(
            "levels {} {} must be increasing",
            levels.0, levels.1
        )));
    }
    Ok(())
}

fn fill_orders(rows: &mut [ReportRow]) {
    for i in 1..rows.len() {
        for c in 0..rows[i].cells.len() {
            let (Some(e0), Some(e1)) = (rows[i - 1].cells[c].error, rows[i].cells[c].error) else {
                continue;
            };
            rows[i].cells[c].order = match order_estimate(e0, e1) {
                Ok(o) => Order::Value(o),
                Err(_) => Order::Exact,
            };
        }
    }
}

/// Errors at fixed offsets from the discontinuity across levels. The window
/// centred on the jump interval must fit in the grid; cells whose own window
/// does not fit are reported without an error value.
pub fn convergence_study(config: &StudyConfig) -> Result<ConvergenceReport> {
    check_study(config.interval, config.levels)?;
    let scheme = Scheme::new(config.scheme)?;
    let w = scheme.half_width() as i64;
    let f = config.function;
    let mut rows = (config.levels.0..config.levels.1)
        .into_par_iter()
        .map(|level| -> Result<ReportRow> {
            let grid = UniformGrid::new(config.interval.0, config.interval.1, level, config.base_cells)?;
            let signal = sample(|x| f.eval(x), &grid)?;
            let j0 = match f.discontinuity() {
                Some(d) => jump_interval(&d, &grid).unwrap_or_else(|| locate_jump(signal.values())),
                None => locate_jump(signal.values()),
            };
            signal
                .window(j0 as i64 - w, 2 * w as usize)
                .map_err(|_| Error::JumpTooCloseToBoundary { j0 })?;
            let child = grid.child();
            let h = grid.spacing();
            let cells = config
                .offsets
                .iter()
                .map(|&xi| {
                    // midpoint of [x_{j-1}, x_j]
                    let j = if xi >= 0 { j0 as i64 + 1 + xi } else { j0 as i64 + xi };
                    let error = signal.window(j - w, 2 * w as usize).ok().map(|window| {
                        let x = child.node((2 * j - 1) as usize);
                        (f.eval(x) - scheme.interpolate(window, h)).abs()
                    });
                    ReportCell {
                        offset: xi,
                        error,
                        order: Order::Missing,
                    }
                })
                .collect();
            Ok(ReportRow { level, j0, cells })
        })
        .collect::<Result<Vec<_>>>()?;
    fill_orders(&mut rows);
    Ok(ConvergenceReport {
        config: config.clone(),
        rows,
    })
}

/// Maximum error over interior midpoints on each level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothReport {
    pub function: BuiltinFunction,
    pub scheme: SchemeConfig,
    pub rows: Vec<(u32, f64, Order)>,
}

impl SmoothReport {
    pub fn orders(&self) -> Vec<Option<f64>> {
        self.rows.iter().skip(1).map(|r| r.2.value()).collect()
    }
}

/// Max interior midpoint error for coarse levels `levels.0 .. levels.1`
/// (boundary points excluded).
pub fn smooth_study(
    function: BuiltinFunction,
    scheme: &SchemeConfig,
    interval: (f64, f64),
    levels: (u32, u32),
    base_cells: usize,
) -> Result<SmoothReport> {
    check_study(interval, levels)?;
    let engine = Scheme::new(*scheme)?;
    let errors = (levels.0..levels.1)
        .into_par_iter()
        .map(|level| -> Result<(u32, f64)> {
            let grid = UniformGrid::new(interval.0, interval.1, level, base_cells)?;
            let signal = sample(|x| function.eval(x), &grid)?;
            let pred = predict_with(&engine, &signal, BoundaryPolicy::Restrict)?;
            let err = pred
                .rows()
                .filter_map(|(x, v)| v.map(|v| (v - function.eval(x)).abs()))
                .fold(0.0, f64::max);
            Ok((level, err))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = errors
        .iter()
        .enumerate()
        .map(|(i, &(level, e))| {
            let order = if i == 0 {
                Order::Missing
            } else {
                order_estimate(errors[i - 1].1, e).map_or(Order::Exact, Order::Value)
            };
            (level, e, order)
        })
        .collect();
    Ok(SmoothReport {
        function,
        scheme: *scheme,
        rows,
    })
}
