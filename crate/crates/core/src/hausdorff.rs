//! Directed set distance and the Pompeiu–Hausdorff metric.
//!
//! `u(A, B) = max_{x ∈ A} ρ(x, B)` and `ρ_H(A, B) = max(u(A, B), u(B, A))`.
//!
//! [`hausdorff_distance`] is the accelerated path: every point's scan stops
//! as soon as its running minimum can no longer raise the current maximum,
//! and for the built-in metrics the target set is bucketed into a uniform
//! grid searched in rings of growing Chebyshev radius. Both shortcuts only
//! skip work whose outcome is already decided, so the results equal those of
//! [`hausdorff_distance_oracle`] bit for bit.

use serde::Serialize;

use crate::error::Result;
use crate::metric::{nearest_index, Metric, Point, PointSet};

/// Both directed distances, the Hausdorff distance and the points of each
/// set that realize the directed distances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceBreakdown {
    pub u_ab: f64,
    pub u_ba: f64,
    pub rho_h: f64,
    /// Lowest-index point `x` of `A` with `ρ(x, B) = u_ab`.
    pub witness_ab: Point,
    /// Lowest-index point `y` of `B` with `ρ(y, A) = u_ba`.
    pub witness_ba: Point,
}

/// u(A, B).
pub fn directed_distance(a: &PointSet, b: &PointSet, metric: &Metric) -> Result<f64> {
    a.check_dim(b.dim())?;
    let index = SetIndex::new(b, metric);
    Ok(directed_scan(a, &index).0)
}

pub fn hausdorff_distance(a: &PointSet, b: &PointSet, metric: &Metric) -> Result<DistanceBreakdown> {
    a.check_dim(b.dim())?;
    let (u_ab, i_ab) = directed_scan(a, &SetIndex::new(b, metric));
    let (u_ba, i_ba) = directed_scan(b, &SetIndex::new(a, metric));
    Ok(breakdown(a, b, (u_ab, i_ab), (u_ba, i_ba)))
}

/// Reference implementation: full pairwise scan, no shortcuts.
pub fn hausdorff_distance_oracle(
    a: &PointSet,
    b: &PointSet,
    metric: &Metric,
) -> Result<DistanceBreakdown> {
    a.check_dim(b.dim())?;
    let ab = oracle_scan(a, b, metric);
    let ba = oracle_scan(b, a, metric);
    Ok(breakdown(a, b, ab, ba))
}

fn breakdown(a: &PointSet, b: &PointSet, ab: (f64, usize), ba: (f64, usize)) -> DistanceBreakdown {
    DistanceBreakdown {
        u_ab: ab.0,
        u_ba: ba.0,
        rho_h: ab.0.max(ba.0),
        witness_ab: a.points()[ab.1].clone(),
        witness_ba: b.points()[ba.1].clone(),
    }
}

fn oracle_scan(a: &PointSet, b: &PointSet, metric: &Metric) -> (f64, usize) {
    let mut best = (0.0, 0);
    for (i, x) in a.iter().enumerate() {
        let d = nearest_index(x.coords(), b.points(), metric).1;
        if d > best.0 {
            best = (d, i);
        }
    }
    best
}

fn directed_scan(a: &PointSet, index: &SetIndex<'_>) -> (f64, usize) {
    let mut best = (0.0, 0);
    for (i, x) in a.iter().enumerate() {
        let d = index.nearest_bounded(x.coords(), best.0);
        if d > best.0 {
            best = (d, i);
        }
    }
    best
}

const GRID_MIN_POINTS: usize = 32;
const GRID_MAX_DIM: usize = 4;

/// Exact nearest-distance queries against one point set.
pub(crate) struct SetIndex<'a> {
    set: &'a PointSet,
    metric: &'a Metric,
    grid: Option<Grid>,
}

impl<'a> SetIndex<'a> {
    pub(crate) fn new(set: &'a PointSet, metric: &'a Metric) -> Self {
        let grid = if set.len() >= GRID_MIN_POINTS
            && set.dim() <= GRID_MAX_DIM
            && metric.dominates_chebyshev()
        {
            Grid::build(set)
        } else {
            None
        };
        SetIndex { set, metric, grid }
    }

    /// ρ(x, set), exactly.
    pub(crate) fn distance(&self, x: &[f64]) -> f64 {
        self.nearest_bounded(x, f64::NEG_INFINITY)
    }

    /// Returns the exact minimum when it exceeds `floor`; otherwise returns
    /// some distance `<= floor` and stops searching.
    pub(crate) fn nearest_bounded(&self, x: &[f64], floor: f64) -> f64 {
        match &self.grid {
            Some(grid) => grid.nearest_bounded(x, floor, self.set.points(), self.metric),
            None => {
                let mut best = f64::INFINITY;
                for p in self.set.points() {
                    let d = self.metric.raw(x, p.coords());
                    if d < best {
                        best = d;
                        if best <= floor {
                            break;
                        }
                    }
                }
                best
            }
        }
    }
}

/// Uniform grid in compressed-row layout: `entries[starts[c]..starts[c + 1]]`
/// are the point indices of cell `c`.
struct Grid {
    origin: Vec<f64>,
    cell: f64,
    dims: Vec<i64>,
    strides: Vec<usize>,
    starts: Vec<usize>,
    entries: Vec<usize>,
    scale: f64,
}

impl Grid {
    fn build(set: &PointSet) -> Option<Grid> {
        let d = set.dim();
        let (lo, hi) = set.bounding_box();
        let diag = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt();
        let per_axis = (set.len() as f64).powf(1.0 / d as f64).ceil().max(1.0);
        let mut cell = diag / per_axis;
        if cell.is_nan() || cell <= 0.0 {
            cell = 1.0;
        }
        if !cell.is_finite() {
            return None;
        }
        let dims: Vec<i64> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| ((h - l) / cell).floor() as i64 + 1)
            .collect();
        let mut strides = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1] as usize;
        }
        let total = strides[0] * dims[0] as usize;

        let mut grid = Grid {
            origin: lo.clone(),
            cell,
            dims,
            strides,
            starts: vec![0; total + 1],
            entries: vec![0; set.len()],
            scale: lo.iter().chain(&hi).fold(0.0, |m: f64, c| m.max(c.abs())),
        };
        let cells: Vec<usize> = set
            .iter()
            .map(|p| grid.flat(&grid.cell_of(p.coords())))
            .collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..total {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.entries[fill[c]] = i;
            fill[c] += 1;
        }
        Some(grid)
    }

    /// Cell coordinates of `x`; may lie outside the grid.
    fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        const LIMIT: f64 = (1u64 << 52) as f64;
        x.iter()
            .zip(&self.origin)
            .map(|(c, o)| ((c - o) / self.cell).floor().clamp(-LIMIT, LIMIT) as i64)
            .collect()
    }

    fn flat(&self, cell: &[i64]) -> usize {
        cell.iter()
            .zip(&self.dims)
            .zip(&self.strides)
            .map(|((c, n), s)| (*c).clamp(0, n - 1) as usize * s)
            .sum()
    }

    fn nearest_bounded(&self, x: &[f64], floor: f64, points: &[Point], metric: &Metric) -> f64 {
        let center = self.cell_of(x);
        let mut r_min = 0i64;
        let mut r_max = 0i64;
        for (c, n) in center.iter().zip(&self.dims) {
            r_min = r_min.max(-c).max(c - (n - 1));
            r_max = r_max.max(*c).max(n - 1 - c);
        }
        let x_scale = x.iter().fold(self.scale, |m: f64, c| m.max(c.abs()));
        let slack = 1e-9 * self.cell + 1e-12 * x_scale;

        let mut best = f64::INFINITY;
        let mut idx = vec![0i64; center.len()];
        for r in r_min..=r_max {
            // Every point in ring r differs from x by more than (r - 1) cells
            // along some axis, and all built-in metrics dominate that gap.
            if r >= 1 && (r - 1) as f64 * self.cell - slack > best {
                break;
            }
            let done = self.visit_ring(&center, r, &mut idx, &mut |i| {
                let d = metric.raw(x, points[i].coords());
                if d < best {
                    best = d;
                }
                best <= floor
            });
            if done {
                break;
            }
        }
        best
    }

    /// Calls `f` on every point index in cells at Chebyshev cell distance
    /// exactly `r` from `center`. Stops and returns true once `f` does.
    fn visit_ring(
        &self,
        center: &[i64],
        r: i64,
        idx: &mut [i64],
        f: &mut dyn FnMut(usize) -> bool,
    ) -> bool {
        let d = center.len();
        let lo: Vec<i64> = center.iter().map(|c| (c - r).max(0)).collect();
        let hi: Vec<i64> = center
            .iter()
            .zip(&self.dims)
            .map(|(c, n)| (c + r).min(n - 1))
            .collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return false;
        }
        let last = d - 1;
        idx[..last].copy_from_slice(&lo[..last]);
        loop {
            let on_shell = (0..last).any(|k| (idx[k] - center[k]).abs() == r);
            let mut visit_cell = |j: i64, idx: &mut [i64]| -> bool {
                idx[last] = j;
                let c = self.flat(idx);
                self.entries[self.starts[c]..self.starts[c + 1]]
                    .iter()
                    .any(|&i| f(i))
            };
            if on_shell || r == 0 {
                for j in lo[last]..=hi[last] {
                    if visit_cell(j, idx) {
                        return true;
                    }
                }
            } else {
                for j in [center[last] - r, center[last] + r] {
                    if j >= lo[last] && j <= hi[last] && visit_cell(j, idx) {
                        return true;
                    }
                }
            }
            // advance the odometer over the leading axes
            let mut k = last;
            loop {
                if k == 0 {
                    return false;
                }
                k -= 1;
                if idx[k] < hi[k] {
                    idx[k] += 1;
                    break;
                }
                idx[k] = lo[k];
            }
        }
    }
}
