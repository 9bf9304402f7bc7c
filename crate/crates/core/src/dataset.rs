//! Sampled data sets of an (n-1)-variate function and their CSV form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A set of sample points `(x, y)` of an (n-1)-variate function together
/// with the per-dimension domain bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<(Vec<f64>, f64)>,
    /// Per x-dimension `[min, max]`.
    x_bounds: Vec<(f64, f64)>,
    y_bounds: (f64, f64),
}

impl Dataset {
    /// Builds a dataset with bounds derived from the data itself.
    ///
    /// Bounds that would collapse (a dimension where all samples agree) are
    /// padded by a tiny margin so they stay non-degenerate.
    pub fn from_points(points: Vec<(Vec<f64>, f64)>) -> Result<Dataset> {
        if points.is_empty() {
            return Err(Error::Parameter("dataset needs at least one point".into()));
        }
        let dim = points[0].0.len();
        if dim == 0 {
            return Err(Error::Parameter(
                "dataset points need at least one independent variable".into(),
            ));
        }
        for (x, y) in &points {
            if x.len() != dim {
                return Err(Error::Parameter(format!(
                    "inconsistent point dimension: expected {dim}, got {}",
                    x.len()
                )));
            }
            if !x.iter().all(|v| v.is_finite()) || !y.is_finite() {
                return Err(Error::Parameter("dataset contains non-finite values".into()));
            }
        }
        let mut x_bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        let mut y_bounds = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in &points {
            for (j, v) in x.iter().enumerate() {
                x_bounds[j].0 = x_bounds[j].0.min(*v);
                x_bounds[j].1 = x_bounds[j].1.max(*v);
            }
            y_bounds.0 = y_bounds.0.min(*y);
            y_bounds.1 = y_bounds.1.max(*y);
        }
        for b in x_bounds.iter_mut().chain(std::iter::once(&mut y_bounds)) {
            if b.0 == b.1 {
                let pad = 1e-9 * (1.0 + b.0.abs());
                b.0 -= pad;
                b.1 += pad;
            }
        }
        Ok(Dataset {
            points,
            x_bounds,
            y_bounds,
        })
    }

    /// Builds a dataset with explicit bounds; every point must fall inside.
    pub fn with_bounds(
        points: Vec<(Vec<f64>, f64)>,
        x_bounds: Vec<(f64, f64)>,
        y_bounds: (f64, f64),
    ) -> Result<Dataset> {
        let data = Dataset::from_points(points)?;
        if x_bounds.len() != data.x_dim() {
            return Err(Error::Parameter(format!(
                "got {} bounds for {} dimensions",
                x_bounds.len(),
                data.x_dim()
            )));
        }
        for (j, b) in x_bounds.iter().enumerate() {
            if !(b.0 < b.1) {
                return Err(Error::Parameter(format!(
                    "degenerate bounds for dimension {}: [{}, {}]",
                    j + 1,
                    b.0,
                    b.1
                )));
            }
            if data.x_bounds[j].0 < b.0 - 1e-12 || data.x_bounds[j].1 > b.1 + 1e-12 {
                return Err(Error::Parameter(format!(
                    "data exceeds bounds in dimension {}",
                    j + 1
                )));
            }
        }
        if !(y_bounds.0 < y_bounds.1) {
            return Err(Error::Parameter("degenerate y bounds".into()));
        }
        Ok(Dataset {
            points: data.points,
            x_bounds,
            y_bounds,
        })
    }

    /// Samples `y = x1 * x2` on an equally spaced `grid_size x grid_size`
    /// grid of the unit square, endpoints included, row-major in `x1`.
    pub fn multiplication_grid(grid_size: usize) -> Result<Dataset> {
        if grid_size < 2 {
            return Err(Error::Parameter(format!(
                "grid size must be at least 2, got {grid_size}"
            )));
        }
        let step = 1.0 / (grid_size - 1) as f64;
        let mut points = Vec::with_capacity(grid_size * grid_size);
        for i in 0..grid_size {
            let x1 = i as f64 * step;
            for j in 0..grid_size {
                let x2 = j as f64 * step;
                points.push((vec![x1, x2], x1 * x2));
            }
        }
        Dataset::from_points(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of independent variables, `n - 1`.
    pub fn x_dim(&self) -> usize {
        self.x_bounds.len()
    }

    /// Full space dimension `n` (independent variables plus y).
    pub fn dimension(&self) -> usize {
        self.x_dim() + 1
    }

    pub fn points(&self) -> &[(Vec<f64>, f64)] {
        &self.points
    }

    pub fn x_bounds(&self) -> &[(f64, f64)] {
        &self.x_bounds
    }

    pub fn y_bounds(&self) -> (f64, f64) {
        self.y_bounds
    }

    pub fn y_range(&self) -> f64 {
        self.y_bounds.1 - self.y_bounds.0
    }

    /// Diameter of the x-domain box.
    pub fn domain_diameter(&self) -> f64 {
        self.x_bounds
            .iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    /// All corners of the x-domain box (2^(n-1) points).
    pub fn domain_corners(&self) -> Vec<Vec<f64>> {
        let dim = self.x_dim();
        let mut corners = Vec::with_capacity(1 << dim);
        for mask in 0..(1usize << dim) {
            let corner: Vec<f64> = self
                .x_bounds
                .iter()
                .enumerate()
                .map(|(j, (lo, hi))| if mask >> j & 1 == 1 { *hi } else { *lo })
                .collect();
            corners.push(corner);
        }
        corners
    }

    /// Serializes as CSV with header `x1,...,x{n-1},y` and lossless decimal
    /// values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 1..=self.x_dim() {
            let _ = write!(out, "x{j},");
        }
        out.push_str("y\n");
        for (x, y) in &self.points {
            for v in x {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{y}");
        }
        out
    }

    /// Parses the CSV form produced by [`Dataset::to_csv`].
    pub fn from_csv(text: &str) -> Result<Dataset> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty dataset file".into()))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        if columns.len() < 2 || columns.last() != Some(&"y") {
            return Err(Error::Format(format!(
                "dataset header must end in a y column, got '{header}'"
            )));
        }
        let dim = columns.len() - 1;
        let mut points = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != dim + 1 {
                return Err(Error::Format(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    dim + 1,
                    fields.len()
                )));
            }
            let mut values = Vec::with_capacity(dim + 1);
            for field in fields {
                values.push(field.parse::<f64>().map_err(|_| {
                    Error::Format(format!("line {}: bad number '{field}'", lineno + 2))
                })?);
            }
            let y = values.pop().expect("at least one field");
            points.push((values, y));
        }
        Dataset::from_points(points)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let text = fs::read_to_string(path)?;
        Dataset::from_csv(&text)
    }
}
