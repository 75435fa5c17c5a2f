//! Occupancy grids over a box in exponential coordinates.
//!
//! Cells are numbered in lexicographic order of their lattice indices, axis 0
//! most significant, so iterating cell numbers is already the stable export
//! order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-size bitset over cell numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    words: Vec<u64>,
    len: usize,
}

impl CellSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Returns `true` when the cell was not present before.
    pub fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        let fresh = self.words[w] >> b & 1 == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect(),
            len: self.len,
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

/// Axis-aligned box split into a regular lattice of cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub bounds: Vec<(f64, f64)>,
    pub cells: Vec<usize>,
}

impl GridLayout {
    pub fn new(bounds: Vec<(f64, f64)>, cells: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() || bounds.len() != cells.len() {
            return Err(Error::invalid("grid needs one (bounds, cells) pair per axis"));
        }
        for (&(lo, hi), &n) in bounds.iter().zip(&cells) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(format!("empty or non-finite axis [{lo}, {hi}]")));
            }
            if n == 0 {
                return Err(Error::invalid("cells per axis must be positive"));
            }
        }
        let total = cells.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        if total.is_none_or(|t| t > 1 << 31) {
            return Err(Error::invalid("grid has too many cells"));
        }
        Ok(Self { bounds, cells })
    }

    /// The same `cells` and symmetric bounds `[-half, half]` on every axis.
    pub fn cube(dim: usize, half: f64, cells: usize) -> Result<Self> {
        Self::new(vec![(-half, half); dim], vec![cells; dim])
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn total(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn width(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / self.cells[axis] as f64
    }

    /// Length of a cell diagonal.
    pub fn diagonal(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Cell holding `x`, or `None` outside the box. The upper face belongs
    /// to the last cell.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0usize;
        for (k, v) in x.iter().enumerate() {
            let (lo, hi) = self.bounds[k];
            if !(*v >= lo && *v <= hi) {
                return None;
            }
            let n = self.cells[k];
            let i = (((v - lo) / (hi - lo)) * n as f64).floor() as usize;
            idx = idx * n + i.min(n - 1);
        }
        Some(idx)
    }

    pub fn unravel(&self, mut cell: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = cell % self.cells[k];
            cell /= self.cells[k];
        }
        out
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.cells)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn center(&self, cell: usize) -> Vec<f64> {
        self.unravel(cell)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.bounds[k].0 + (i as f64 + 0.5) * self.width(k))
            .collect()
    }

    /// True for cells in the outermost layer of the lattice.
    pub fn on_boundary_layer(&self, cell: usize) -> bool {
        self.unravel(cell)
            .iter()
            .zip(&self.cells)
            .any(|(&i, &n)| i == 0 || i + 1 == n)
    }

    /// Face neighbours (differ by one in a single index).
    pub fn face_neighbors(&self, cell: usize) -> Vec<usize> {
        let idx = self.unravel(cell);
        let mut out = Vec::with_capacity(2 * self.dim());
        for k in 0..self.dim() {
            let mut j = idx.clone();
            if idx[k] > 0 {
                j[k] = idx[k] - 1;
                out.push(self.ravel(&j));
            }
            if idx[k] + 1 < self.cells[k] {
                j[k] = idx[k] + 1;
                out.push(self.ravel(&j));
            }
        }
        out
    }
}

/// What an occupancy grid approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Reachable,
    Controllable,
    ControlSet,
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Reachable => "reachable",
            GridKind::Controllable => "controllable",
            GridKind::ControlSet => "control_set",
        })
    }
}

impl std::str::FromStr for GridKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reachable" => Ok(GridKind::Reachable),
            "controllable" => Ok(GridKind::Controllable),
            "control_set" => Ok(GridKind::ControlSet),
            other => Err(Error::invalid(format!("unknown grid kind {other:?}"))),
        }
    }
}

/// Boolean lattice marking the cells of a set, plus the cells from which a
/// trajectory left the box within the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    pub layout: GridLayout,
    pub occupied: CellSet,
    pub escapes: CellSet,
    pub horizon: f64,
    pub kind: GridKind,
}

impl OccupancyGrid {
    pub fn empty(layout: GridLayout, horizon: f64, kind: GridKind) -> Self {
        let n = layout.total();
        Self {
            layout,
            occupied: CellSet::new(n),
            escapes: CellSet::new(n),
            horizon,
            kind,
        }
    }

    pub fn count(&self) -> usize {
        self.occupied.count()
    }

    /// Fraction of all box cells that are occupied.
    pub fn coverage(&self) -> f64 {
        self.count() as f64 / self.layout.total() as f64
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.layout.cell_of(x).is_some_and(|c| self.occupied.contains(c))
    }

    pub fn has_boundary_hits(&self) -> bool {
        !self.escapes.is_empty()
    }

    /// Adds every cell within one lattice step (in each index) of an
    /// occupied cell.
    pub fn dilate(&self) -> Self {
        let d = self.layout.dim();
        let mut out = CellSet::new(self.layout.total());
        let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
            .map(|mut m| {
                (0..d)
                    .map(|_| {
                        let o = (m % 3) as i64 - 1;
                        m /= 3;
                        o
                    })
                    .collect()
            })
            .collect();
        for c in self.occupied.iter() {
            let idx = self.layout.unravel(c);
            'offset: for off in &offsets {
                let mut j = Vec::with_capacity(d);
                for k in 0..d {
                    let v = idx[k] as i64 + off[k];
                    if v < 0 || v >= self.layout.cells[k] as i64 {
                        continue 'offset;
                    }
                    j.push(v as usize);
                }
                out.insert(self.layout.ravel(&j));
            }
        }
        Self {
            occupied: out,
            ..self.clone()
        }
    }

    /// `|A xor B| / |A or B|`, zero when both are empty.
    pub fn symmetric_difference_ratio(&self, other: &Self) -> f64 {
        let union = self.occupied.union(&other.occupied).count();
        if union == 0 {
            return 0.0;
        }
        self.occupied.symmetric_difference(&other.occupied).count() as f64 / union as f64
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.occupied.is_subset(&other.occupied)
    }

    /// Number of face-connected components of the occupied cells.
    pub fn components(&self) -> usize {
        let mut seen = CellSet::new(self.layout.total());
        let mut count = 0;
        let mut stack = Vec::new();
        for c in self.occupied.iter() {
            if !seen.insert(c) {
                continue;
            }
            count += 1;
            stack.push(c);
            while let Some(x) = stack.pop() {
                for y in self.layout.face_neighbors(x) {
                    if self.occupied.contains(y) && seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
        }
        count
    }

    /// Occupied cells whose centre lies within half a cell diagonal of the
    /// subspace spanned by the orthonormal columns of `basis`.
    pub fn slice_near(&self, basis: &nalgebra::DMatrix<f64>) -> Vec<usize> {
        let reach = 0.5 * self.layout.diagonal();
        self.occupied
            .iter()
            .filter(|&c| {
                let x = nalgebra::DVector::from_vec(self.layout.center(c));
                let proj = if basis.ncols() == 0 {
                    nalgebra::DVector::zeros(x.len())
                } else {
                    basis * basis.tr_mul(&x)
                };
                (x - proj).norm() < reach
            })
            .collect()
    }

    /// True when a set of cells stays away from the box: no cell in the
    /// outer layer and no escape recorded from any of them.
    pub fn cells_inside_box(&self, cells: &[usize]) -> bool {
        cells
            .iter()
            .all(|&c| !self.layout.on_boundary_layer(c) && !self.escapes.contains(c))
    }

    /// CSV export: a metadata header row and value row, then one row of
    /// lattice indices per occupied cell in lexicographic order.
    pub fn to_csv(&self) -> String {
        let bounds: Vec<String> = self.layout.bounds.iter().map(|(lo, hi)| format!("{lo}:{hi}")).collect();
        let cells: Vec<String> = self.layout.cells.iter().map(|n| n.to_string()).collect();
        let mut s = String::from("axis_bounds,cells,kind,horizon\n");
        s.push_str(&format!("{},{},{},{}\n", bounds.join(";"), cells.join(";"), self.kind, self.horizon));
        let cols: Vec<String> = (1..=self.layout.dim()).map(|k| format!("i{k}")).collect();
        s.push_str(&cols.join(","));
        s.push('\n');
        for c in self.occupied.iter() {
            let idx: Vec<String> = self.layout.unravel(c).iter().map(|i| i.to_string()).collect();
            s.push_str(&idx.join(","));
            s.push('\n');
        }
        s
    }

    /// Inverse of [`OccupancyGrid::to_csv`]; escape cells are not stored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let bad = |m: &str| Error::invalid(format!("grid CSV: {m}"));
        if lines.next() != Some("axis_bounds,cells,kind,horizon") {
            return Err(bad("missing header"));
        }
        let meta: Vec<&str> = lines.next().ok_or_else(|| bad("missing metadata"))?.split(',').collect();
        if meta.len() != 4 {
            return Err(bad("metadata row needs four fields"));
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let bounds = meta[0]
            .split(';')
            .map(|b| {
                let (lo, hi) = b.split_once(':').ok_or_else(|| bad("bad bounds"))?;
                Ok((parse_f(lo)?, parse_f(hi)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let cells = meta[1]
            .split(';')
            .map(|n| n.parse::<usize>().map_err(|_| bad("bad cell count")))
            .collect::<Result<Vec<_>>>()?;
        let kind: GridKind = meta[2].parse()?;
        let horizon = parse_f(meta[3])?;
        let layout = GridLayout::new(bounds, cells)?;
        lines.next().ok_or_else(|| bad("missing column header"))?;
        let mut grid = OccupancyGrid::empty(layout, horizon, kind);
        for line in lines.filter(|l| !l.is_empty()) {
            let idx = line
                .split(',')
                .map(|i| i.parse::<usize>().map_err(|_| bad("bad index")))
                .collect::<Result<Vec<_>>>()?;
            if idx.len() != grid.layout.dim() || idx.iter().zip(&grid.layout.cells).any(|(i, n)| i >= n) {
                return Err(bad("index out of range"));
            }
            let c = grid.layout.ravel(&idx);
            grid.occupied.insert(c);
        }
        Ok(grid)
    }
}
