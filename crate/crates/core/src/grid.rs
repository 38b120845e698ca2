//! Uniform dyadic grids and point-value samples on them.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// A uniform partition of `[start, end]` into `n_cells` cells.
///
/// Node `j` sits at `start + j * spacing`. Coordinates are never accumulated,
/// so node `2j` of the child grid has the same coordinate as node `j` here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformGrid {
    start: f64,
    end: f64,
    level: u32,
    n_cells: usize,
    spacing: f64,
}

impl UniformGrid {
    /// Grid at `level` with `base_cells * 2^level` cells.
    pub fn new(start: f64, end: f64, level: u32, base_cells: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::InvalidInterval { start, end });
        }
        if base_cells < 1 {
            return Err(Error::InvalidSize("base_cells must be at least 1".into()));
        }
        let n_cells = 1usize
            .checked_shl(level)
            .and_then(|p| p.checked_mul(base_cells))
            .filter(|&n| n < (1usize << 40))
            .ok_or_else(|| Error::InvalidSize(format!("level {level} is too fine")))?;
        Ok(Self::from_parts(start, end, level, n_cells))
    }

    /// Level-0 grid with an explicit cell count.
    pub fn with_cells(start: f64, end: f64, n_cells: usize) -> Result<Self> {
        Self::new(start, end, 0, n_cells)
    }

    fn from_parts(start: f64, end: f64, level: u32, n_cells: usize) -> Self {
        Self {
            start,
            end,
            level,
            n_cells,
            spacing: (end - start) / n_cells as f64,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node(&self, j: usize) -> f64 {
        self.start + j as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|j| self.node(j))
    }

    /// Midpoint of cell `[x_{j-1}, x_j]`, i.e. node `2j - 1` of the child grid.
    pub fn midpoint(&self, j: usize) -> f64 {
        self.start + (2 * j - 1) as f64 * (0.5 * self.spacing)
    }

    /// Next dyadic level: same interval, twice the cells.
    pub fn child(&self) -> Self {
        Self::from_parts(self.start, self.end, self.level + 1, 2 * self.n_cells)
    }
}

/// Point values `f_j = f(x_j)` on every node of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledSignal {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidSize(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                index,
                x: grid.node(index),
                value,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The `len` consecutive values starting at node `first`.
    pub fn window(&self, first: i64, len: usize) -> Result<&[f64]> {
        let last = first + len as i64 - 1;
        if first < 0 || last >= self.values.len() as i64 {
            return Err(Error::OutOfRange {
                first,
                last,
                max: self.values.len().saturating_sub(1),
            });
        }
        Ok(&self.values[first as usize..=last as usize])
    }

    /// Reads a two-column `x,f` table. The grid is rebuilt from the first and
    /// last abscissae; interior abscissae must lie on it.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "f" {
            return Err(Error::Format(format!(
                "expected header `x,f`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |field: &str| -> Result<f64> {
                field.parse::<f64>().map_err(|_| {
                    Error::Format(format!("row {}: cannot parse `{field}` as a number", line + 1))
                })
            };
            xs.push(parse(&record[0])?);
            fs.push(parse(&record[1])?);
        }
        if xs.len() < 2 {
            return Err(Error::Format("a signal needs at least two rows".into()));
        }
        let grid = UniformGrid::with_cells(xs[0], xs[xs.len() - 1], xs.len() - 1)?;
        let tol = 1e-6 * grid.spacing();
        if let Some(j) = (0..xs.len()).find(|&j| (xs[j] - grid.node(j)).abs() > tol) {
            return Err(Error::Format(format!(
                "row {}: x = {} is not on the uniform grid (expected {})",
                j + 1,
                xs[j],
                grid.node(j)
            )));
        }
        Self::new(grid, fs)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_xf_csv(writer, self.grid.nodes().zip(self.values.iter().map(|&v| Some(v))))
    }
}

/// Writes `x,f` rows with 17 significant digits; `None` values become empty fields.
pub(crate) fn write_xf_csv<W: Write>(
    writer: W,
    rows: impl Iterator<Item = (f64, Option<f64>)>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["x", "f"])?;
    for (x, f) in rows {
        let f = f.map(format_f64).unwrap_or_default();
        wtr.write_record([format_f64(x), f])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Decimal rendering with 17 significant digits, enough to round-trip binary64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Samples `f` on every node of `grid`.
pub fn sample<F: Fn(f64) -> f64>(f: F, grid: &UniformGrid) -> Result<SampledSignal> {
    let values = grid.nodes().map(f).collect();
    SampledSignal::new(*grid, values)
}
