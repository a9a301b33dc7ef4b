//! Raster elevation: ESRI ASCII grid loading, tile mosaicking, bilinear
//! sampling and 1D gap filling along a profile.
//!
//! Cell values sit at cell centers, `origin + (i + 0.5) * cell_size`.
//! Rows are stored south-first.

use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::geom::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum TerrainError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} values in the data block, found {found}")]
    ValueCount { line: usize, expected: usize, found: usize },
    #[error("tile {tile}: {message}")]
    Alignment { tile: usize, message: String },
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("no tiles to mosaic")]
    Empty,
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemGrid<T> {
    pub origin_x: T,
    pub origin_y: T,
    pub cell_size: T,
    pub n_cols: usize,
    pub n_rows: usize,
    pub nodata: T,
    /// Row-major, row 0 southernmost.
    pub values: Vec<T>,
}

impl<T: Scalar> DemGrid<T> {
    pub fn new(
        origin_x: T,
        origin_y: T,
        cell_size: T,
        n_cols: usize,
        n_rows: usize,
        nodata: T,
        values: Vec<T>,
    ) -> Result<Self, TerrainError> {
        let grid = Self { origin_x, origin_y, cell_size, n_cols, n_rows, nodata, values };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid of `n_cols x n_rows` filled by evaluating `f` at every cell center.
    pub fn from_fn(
        origin_x: T,
        origin_y: T,
        cell_size: T,
        n_cols: usize,
        n_rows: usize,
        f: impl Fn(T, T) -> T,
    ) -> Self {
        let half = T::lit(0.5);
        let mut values = Vec::with_capacity(n_cols * n_rows);
        for r in 0..n_rows {
            let y = origin_y + (T::from_usize(r).unwrap() + half) * cell_size;
            for c in 0..n_cols {
                let x = origin_x + (T::from_usize(c).unwrap() + half) * cell_size;
                values.push(f(x, y));
            }
        }
        Self { origin_x, origin_y, cell_size, n_cols, n_rows, nodata: T::lit(-9999.0), values }
    }

    fn validate(&self) -> Result<(), TerrainError> {
        if !(self.cell_size > T::zero()) || !self.cell_size.is_finite() {
            return Err(TerrainError::Invalid("cell_size must be positive".into()));
        }
        if self.n_cols == 0 || self.n_rows == 0 {
            return Err(TerrainError::Invalid("grid must have at least one row and column".into()));
        }
        if self.values.len() != self.n_cols * self.n_rows {
            return Err(TerrainError::Invalid(format!(
                "{} values for a {}x{} grid",
                self.values.len(),
                self.n_cols,
                self.n_rows
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite() && **v != self.nodata) {
            return Err(TerrainError::Invalid(format!("non-finite value {v:?}")));
        }
        Ok(())
    }

    pub fn get(&self, col: usize, row: usize) -> T {
        self.values[row * self.n_cols + col]
    }

    pub fn is_nodata(&self, v: T) -> bool {
        v == self.nodata || !v.is_finite()
    }

    /// Bilinear elevation from the four surrounding cell centers.
    ///
    /// `None` outside the cell-center hull or when any of the four is nodata.
    pub fn sample(&self, x: T, y: T) -> Option<T> {
        let (c0, c1, tx) = self.axis(x, self.origin_x, self.n_cols)?;
        let (r0, r1, ty) = self.axis(y, self.origin_y, self.n_rows)?;
        let corners = [self.get(c0, r0), self.get(c1, r0), self.get(c0, r1), self.get(c1, r1)];
        if corners.iter().any(|v| self.is_nodata(*v)) {
            return None;
        }
        let south = lerp(corners[0], corners[1], tx);
        let north = lerp(corners[2], corners[3], tx);
        Some(lerp(south, north, ty))
    }

    // Lower/upper index and fraction along one axis.
    fn axis(&self, v: T, origin: T, n: usize) -> Option<(usize, usize, T)> {
        let f = (v - origin) / self.cell_size - T::lit(0.5);
        let last = T::from_usize(n - 1).unwrap();
        if !(f >= T::zero() && f <= last) {
            return None;
        }
        if n == 1 {
            return Some((0, 0, T::zero()));
        }
        let i0 = f.floor().to_usize().unwrap().min(n - 2);
        let t = f - T::from_usize(i0).unwrap();
        Some((i0, i0 + 1, t))
    }
}

// Convex combination, clamped so rounding never leaves [a, b].
fn lerp<T: Scalar>(a: T, b: T, t: T) -> T {
    if t == T::zero() {
        return a;
    }
    if t == T::one() {
        return b;
    }
    let v = a + (b - a) * t;
    v.max(a.min(b)).min(a.max(b))
}

pub fn load_asc<T: Scalar + FromStr>(path: &Path) -> Result<DemGrid<T>, TerrainError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TerrainError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_asc(&text)
}

/// Parses an ESRI ASCII grid. The first data row in the file is the northernmost.
pub fn parse_asc<T: Scalar + FromStr>(text: &str) -> Result<DemGrid<T>, TerrainError> {
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut cellsize = None;
    let mut nodata = None;

    let mut lines = text.lines().enumerate().peekable();
    while let Some(&(idx, line)) = lines.peek() {
        let lineno = idx + 1;
        let mut toks = line.split_whitespace();
        let Some(key) = toks.next() else {
            lines.next();
            continue;
        };
        if !key.starts_with(|c: char| c.is_ascii_alphabetic()) || key.eq_ignore_ascii_case("nan") {
            break;
        }
        let val = toks.next().ok_or_else(|| TerrainError::Parse { line: lineno, message: format!("header {key} has no value") })?;
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| TerrainError::Parse { line: lineno, message: format!("header {key}: {v:?} is not a number") })
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| TerrainError::Parse { line: lineno, message: format!("header {key}: {v:?} is not a count") })
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => ncols = Some(count(val)?),
            "nrows" => nrows = Some(count(val)?),
            "xllcorner" => xll = Some(num(val)?),
            "yllcorner" => yll = Some(num(val)?),
            "cellsize" => cellsize = Some(num(val)?),
            "nodata_value" => nodata = Some(num(val)?),
            other => {
                return Err(TerrainError::Parse { line: lineno, message: format!("unknown header key {other:?}") });
            }
        }
        lines.next();
    }
    let header_end = lines.peek().map_or(text.lines().count() + 1, |(i, _)| i + 1);
    let missing = |k: &str| TerrainError::Parse { line: header_end, message: format!("missing header key {k}") };
    let n_cols = ncols.ok_or_else(|| missing("ncols"))?;
    let n_rows = nrows.ok_or_else(|| missing("nrows"))?;
    let xll = xll.ok_or_else(|| missing("xllcorner"))?;
    let yll = yll.ok_or_else(|| missing("yllcorner"))?;
    let cell = cellsize.ok_or_else(|| missing("cellsize"))?;
    let nodata = nodata.unwrap_or(-9999.0);

    let expected = n_cols * n_rows;
    let mut file_order: Vec<T> = Vec::with_capacity(expected);
    for (idx, line) in lines {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| TerrainError::Parse {
                line: idx + 1,
                message: format!("{tok:?} is not a number"),
            })?;
            if !v.is_finite() && v != nodata {
                return Err(TerrainError::Parse { line: idx + 1, message: format!("non-finite value {tok:?}") });
            }
            file_order.push(T::lit(v));
        }
    }
    if file_order.len() != expected {
        return Err(TerrainError::ValueCount { line: header_end, expected, found: file_order.len() });
    }
    let values = file_order.chunks(n_cols).rev().flatten().copied().collect();
    DemGrid::new(T::lit(xll), T::lit(yll), T::lit(cell), n_cols, n_rows, T::lit(nodata), values)
}

/// Writes an ESRI ASCII grid, northernmost row first.
pub fn write_asc<T: Scalar + std::fmt::Display>(grid: &DemGrid<T>) -> String {
    let mut out = format!(
        "ncols {}\nnrows {}\nxllcorner {}\nyllcorner {}\ncellsize {}\nnodata_value {}\n",
        grid.n_cols, grid.n_rows, grid.origin_x, grid.origin_y, grid.cell_size, grid.nodata
    );
    for row in grid.values.chunks(grid.n_cols).rev() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Union of aligned tiles. Valid cells of later tiles overwrite earlier ones;
/// uncovered cells are nodata.
pub fn mosaic<T: Scalar>(grids: &[DemGrid<T>]) -> Result<DemGrid<T>, TerrainError> {
    let first = grids.first().ok_or(TerrainError::Empty)?;
    let cs = first.cell_size;
    let tol = T::lit(1e-6);
    let mut offsets = Vec::with_capacity(grids.len());
    for (i, g) in grids.iter().enumerate() {
        if ((g.cell_size - cs) / cs).abs() > T::lit(1e-9) {
            return Err(TerrainError::Alignment {
                tile: i,
                message: format!("cell size {:?} differs from {:?}", g.cell_size, cs),
            });
        }
        let dx = (g.origin_x - first.origin_x) / cs;
        let dy = (g.origin_y - first.origin_y) / cs;
        if (dx - dx.round()).abs() > tol || (dy - dy.round()).abs() > tol {
            return Err(TerrainError::Alignment { tile: i, message: "origin is off the lattice of tile 0".into() });
        }
        offsets.push((dx.round().to_i64().unwrap(), dy.round().to_i64().unwrap()));
    }
    let min_c = offsets.iter().map(|o| o.0).min().unwrap();
    let min_r = offsets.iter().map(|o| o.1).min().unwrap();
    let max_c = grids.iter().zip(&offsets).map(|(g, o)| o.0 + g.n_cols as i64).max().unwrap();
    let max_r = grids.iter().zip(&offsets).map(|(g, o)| o.1 + g.n_rows as i64).max().unwrap();
    let n_cols = (max_c - min_c) as usize;
    let n_rows = (max_r - min_r) as usize;
    let nodata = first.nodata;
    let mut values = vec![nodata; n_cols * n_rows];
    for (g, &(oc, or)) in grids.iter().zip(&offsets) {
        let (c0, r0) = ((oc - min_c) as usize, (or - min_r) as usize);
        for r in 0..g.n_rows {
            for c in 0..g.n_cols {
                let v = g.get(c, r);
                if !g.is_nodata(v) {
                    values[(r0 + r) * n_cols + c0 + c] = v;
                }
            }
        }
    }
    Ok(DemGrid {
        origin_x: first.origin_x + T::from_i64(min_c).unwrap() * cs,
        origin_y: first.origin_y + T::from_i64(min_r).unwrap() * cs,
        cell_size: cs,
        n_cols,
        n_rows,
        nodata,
        values,
    })
}

/// A profile after gap filling.
#[derive(Debug, Clone, PartialEq)]
pub struct FilledProfile<T> {
    pub samples: Vec<(T, T)>,
    /// Set when no sample was valid and everything fell back to zero.
    pub all_missing: bool,
}

/// Replaces each missing elevation with its nearest valid neighbor by station;
/// ties go to the earlier station.
pub fn fill_missing<T: Scalar>(samples: &[(T, Option<T>)]) -> FilledProfile<T> {
    let n = samples.len();
    if samples.iter().all(|(_, z)| z.is_none()) {
        return FilledProfile { samples: samples.iter().map(|(s, _)| (*s, T::zero())).collect(), all_missing: n > 0 };
    }
    // Nearest valid index to the left and to the right of each position.
    let mut prev = vec![None; n];
    let mut last = None;
    for i in 0..n {
        if samples[i].1.is_some() {
            last = Some(i);
        }
        prev[i] = last;
    }
    let mut next = vec![None; n];
    last = None;
    for i in (0..n).rev() {
        if samples[i].1.is_some() {
            last = Some(i);
        }
        next[i] = last;
    }
    let out = (0..n)
        .map(|i| {
            let (s, z) = samples[i];
            if let Some(z) = z {
                return (s, z);
            }
            let pick = match (prev[i], next[i]) {
                (Some(p), Some(q)) => {
                    if s - samples[p].0 <= samples[q].0 - s {
                        p
                    } else {
                        q
                    }
                }
                (Some(p), None) => p,
                (None, Some(q)) => q,
                (None, None) => unreachable!("at least one valid sample"),
            };
            (s, samples[pick].1.unwrap())
        })
        .collect();
    FilledProfile { samples: out, all_missing: false }
}
