//! Iterated function systems and the Hutchinson operator.
//!
//! `F(A) = ⋃_k f_k(A)` is a contraction of the hyperspace with the same
//! factor as the worst map, so iterating it from any seed produces a Cauchy
//! sequence of sets converging to the attractor.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hausdorff::hausdorff_distance;
use crate::hyperspace::SetSequence;
use crate::metric::{Metric, Point, PointSet};

/// `x ↦ L x + t` with `L` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    dim: usize,
    linear: Vec<f64>,
    offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(dim: usize, linear: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if linear.len() != dim * dim {
            return Err(Error::Format(format!(
                "linear part has {} entries, expected {} for dim {dim}",
                linear.len(),
                dim * dim
            )));
        }
        if offset.len() != dim {
            return Err(Error::Format(format!(
                "offset has {} entries, expected {dim}",
                offset.len()
            )));
        }
        if let Some((position, &value)) = linear
            .iter()
            .chain(&offset)
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(Error::NonFinite { position, value });
        }
        Ok(AffineMap {
            dim,
            linear,
            offset,
        })
    }

    /// `x ↦ s x + t`.
    pub fn similarity(scale: f64, offset: Vec<f64>) -> Result<Self> {
        let dim = offset.len();
        let mut linear = vec![0.0; dim * dim];
        for k in 0..dim {
            linear[k * dim + k] = scale;
        }
        AffineMap::new(dim, linear, offset)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.linear
            .chunks_exact(self.dim)
            .zip(&self.offset)
            .map(|(row, t)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + t)
            .collect()
    }

    /// Largest singular value of the linear part.
    pub fn contraction_factor(&self) -> f64 {
        DMatrix::from_row_slice(self.dim, self.dim, &self.linear)
            .singular_values()
            .max()
    }
}

/// Operator norm of the linear part of `f`: its Euclidean Lipschitz constant.
pub fn contraction_factor(f: &AffineMap) -> f64 {
    f.contraction_factor()
}

/// A non-empty list of affine maps of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Ifs {
    maps: Vec<AffineMap>,
    dim: usize,
    contraction: f64,
}

/// On-disk form: `{"dim": d, "maps": [{"linear": [d·d row-major], "offset": [d]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfsFile {
    pub dim: usize,
    pub maps: Vec<MapFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub linear: Vec<f64>,
    pub offset: Vec<f64>,
}

impl Ifs {
    pub fn new(maps: Vec<AffineMap>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::Format("an IFS needs at least one map".into()))?;
        let dim = first.dim;
        if let Some(bad) = maps.iter().find(|f| f.dim != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim,
            });
        }
        let contraction = maps
            .iter()
            .map(AffineMap::contraction_factor)
            .fold(0.0, f64::max);
        Ok(Ifs {
            maps,
            dim,
            contraction,
        })
    }

    pub fn from_file(file: IfsFile) -> Result<Self> {
        let maps = file
            .maps
            .into_iter()
            .map(|m| AffineMap::new(file.dim, m.linear, m.offset))
            .collect::<Result<Vec<_>>>()?;
        Ifs::new(maps)
    }

    pub fn to_file(&self) -> IfsFile {
        IfsFile {
            dim: self.dim,
            maps: self
                .maps
                .iter()
                .map(|m| MapFile {
                    linear: m.linear.clone(),
                    offset: m.offset.clone(),
                })
                .collect(),
        }
    }

    /// Middle-thirds Cantor set: `x/3` and `x/3 + 2/3`.
    pub fn cantor() -> Self {
        let third = 1.0 / 3.0;
        Ifs::new(vec![
            AffineMap::similarity(third, vec![0.0]).unwrap(),
            AffineMap::similarity(third, vec![2.0 * third]).unwrap(),
        ])
        .unwrap()
    }

    /// Sierpinski triangle on the vertices (0,0), (1,0), (1/2, √3/2).
    pub fn sierpinski() -> Self {
        let h = 3f64.sqrt() / 4.0;
        Ifs::new(vec![
            AffineMap::similarity(0.5, vec![0.0, 0.0]).unwrap(),
            AffineMap::similarity(0.5, vec![0.5, 0.0]).unwrap(),
            AffineMap::similarity(0.5, vec![0.25, h]).unwrap(),
        ])
        .unwrap()
    }

    /// The four-map fern with the usual published coefficients.
    pub fn fern() -> Self {
        let map = |l: [f64; 4], t: [f64; 2]| AffineMap::new(2, l.to_vec(), t.to_vec()).unwrap();
        Ifs::new(vec![
            map([0.0, 0.0, 0.0, 0.16], [0.0, 0.0]),
            map([0.85, 0.04, -0.04, 0.85], [0.0, 1.6]),
            map([0.2, -0.26, 0.23, 0.22], [0.0, 1.6]),
            map([-0.15, 0.28, 0.26, 0.24], [0.0, 0.44]),
        ])
        .unwrap()
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "cantor" => Some(Ifs::cantor()),
            "sierpinski" => Some(Ifs::sierpinski()),
            "fern" => Some(Ifs::fern()),
            _ => None,
        }
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest contraction factor over the maps.
    pub fn contraction(&self) -> f64 {
        self.contraction
    }
}

/// `F(A) = ⋃_k f_k(A)`, deduplicated; images are listed map by map.
pub fn hutchinson_step(set: &PointSet, sys: &Ifs) -> Result<PointSet> {
    set.check_dim(sys.dim)?;
    let images = sys
        .maps
        .iter()
        .flat_map(|f| set.iter().map(move |p| Point::new(f.apply(p.coords()))))
        .collect::<Result<Vec<_>>>()?;
    PointSet::new(images)
}

/// Greedy δ-net: scans `set` in storage order and keeps a point only if it
/// is farther than `delta` from every point kept so far. The result is a
/// subset within Hausdorff distance `delta` of `set`.
pub fn decimate(set: &PointSet, delta: f64, metric: &Metric) -> Result<PointSet> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(set.clone());
    }
    let kept = if metric.dominates_chebyshev() && set.dim() <= 6 {
        net_on_grid(set, delta, metric)
    } else {
        let mut kept: Vec<&Point> = Vec::new();
        for p in set {
            if kept
                .iter()
                .all(|k| metric.raw(k.coords(), p.coords()) > delta)
            {
                kept.push(p);
            }
        }
        kept
    };
    PointSet::new(kept.into_iter().cloned().collect())
}

/// Same scan as the brute-force net, with kept points bucketed in cells of
/// width 2δ: any kept point within δ lies in one of the 3^d adjacent cells.
fn net_on_grid<'a>(set: &'a PointSet, delta: f64, metric: &Metric) -> Vec<&'a Point> {
    let (origin, _) = set.bounding_box();
    let width = 2.0 * delta;
    let cell_of = |p: &Point| -> Vec<i64> {
        p.coords()
            .iter()
            .zip(&origin)
            .map(|(c, o)| ((c - o) / width).floor() as i64)
            .collect()
    };
    let d = set.dim();
    let neighbors = 3usize.pow(d as u32);
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut kept: Vec<&Point> = Vec::new();
    let mut probe = vec![0i64; d];
    for p in set {
        let home = cell_of(p);
        let mut clear = true;
        'search: for code in 0..neighbors {
            let mut rest = code;
            for k in 0..d {
                probe[k] = home[k] + (rest % 3) as i64 - 1;
                rest /= 3;
            }
            if let Some(bucket) = cells.get(&probe) {
                for &i in bucket {
                    if metric.raw(kept[i].coords(), p.coords()) <= delta {
                        clear = false;
                        break 'search;
                    }
                }
            }
        }
        if clear {
            cells.entry(home).or_default().push(kept.len());
            kept.push(p);
        }
    }
    kept
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    /// `n`, counting the seed as step 0.
    pub step: usize,
    /// `|A_n|`.
    pub size: usize,
    /// `ρ_H(A_n, A_{n+1})`.
    pub gap: f64,
    /// Decimation radius applied when producing `A_{n+1}`.
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct AttractorTrace {
    pub contraction: f64,
    pub steps: Vec<StepRecord>,
    /// `A_0 … A_K`, seed first.
    pub iterates: Vec<PointSet>,
}

impl AttractorTrace {
    pub fn final_set(&self) -> &PointSet {
        self.iterates.last().expect("trace holds the seed")
    }

    /// Sum of all decimation radii: the total distortion budget control
    /// added on top of exact Hutchinson iteration.
    pub fn total_decimation(&self) -> f64 {
        self.steps.iter().map(|s| s.delta).sum()
    }

    /// The iterates as a sequence; `A_0` becomes index 1.
    pub fn to_sequence(&self, metric: Metric) -> Result<SetSequence> {
        SetSequence::new(self.iterates.clone(), metric)
    }
}

/// Iterates the Hutchinson operator `iters` times from `seed`, decimating
/// whenever an iterate would exceed `budget` points.
pub fn attractor(
    sys: &Ifs,
    seed: &PointSet,
    iters: usize,
    budget: usize,
    metric: &Metric,
) -> Result<AttractorTrace> {
    if sys.contraction.is_nan() || sys.contraction >= 1.0 {
        return Err(Error::NotContractive {
            factor: sys.contraction,
        });
    }
    seed.check_dim(sys.dim)?;
    if budget < seed.len() {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} is smaller than the seed ({} points)",
            seed.len()
        )));
    }
    let mut iterates = vec![seed.clone()];
    let mut steps = Vec::with_capacity(iters);
    for step in 0..iters {
        let current = iterates.last().expect("seed present");
        let image = hutchinson_step(current, sys)?;
        let (next, delta) = fit_budget(image, budget, metric)?;
        let gap = hausdorff_distance(current, &next, metric)?.rho_h;
        steps.push(StepRecord {
            step,
            size: current.len(),
            gap,
            delta,
        });
        iterates.push(next);
    }
    Ok(AttractorTrace {
        contraction: sys.contraction,
        steps,
        iterates,
    })
}

/// Smallest δ (to bisection resolution) whose δ-net fits in `budget`.
fn fit_budget(set: PointSet, budget: usize, metric: &Metric) -> Result<(PointSet, f64)> {
    if set.len() <= budget {
        return Ok((set, 0.0));
    }
    // every pairwise distance is at most twice the largest distance to p0
    let p0 = set.points()[0].coords();
    let radius = set
        .iter()
        .map(|p| metric.raw(p0, p.coords()))
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    let mut hi = 2.0 * radius;
    let mut best = decimate(&set, hi, metric)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let net = decimate(&set, mid, metric)?;
        if net.len() <= budget {
            hi = mid;
            best = net;
        } else {
            lo = mid;
        }
    }
    Ok((best, hi))
}
