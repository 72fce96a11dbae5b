//! Points, finite point sets and the base distance function.
//!
//! A [`PointSet`] is the representable member of the hyperspace: finite,
//! non-empty and therefore closed and bounded. Every supremum and infimum
//! over a set becomes an exact max/min over its stored points.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A point of the base space, stored as `d` finite coordinates.
///
/// Negative zero is normalized to positive zero on construction, so
/// equality, hashing and the lexicographic order all agree.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let mut coords = coords;
        for (position, c) in coords.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite {
                    position,
                    value: *c,
                });
            }
            if *c == 0.0 {
                *c = 0.0;
            }
        }
        Ok(Point { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl Eq for Point {}

impl Hash for Point {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for c in &self.coords {
            c.to_bits().hash(state);
        }
    }
}

impl Ord for Point {
    /// Lexicographic by coordinate; shorter points sort first on a common prefix.
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

type DistanceFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// The base distance function.
#[derive(Clone, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
    /// A caller-supplied distance, trusted to satisfy the metric axioms.
    Custom {
        name: String,
        func: Arc<DistanceFn>,
    },
}

impl Metric {
    pub fn custom<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Metric::Custom {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Chebyshev => "chebyshev",
            Metric::Custom { name, .. } => name,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "euclidean" => Some(Metric::Euclidean),
            "manhattan" => Some(Metric::Manhattan),
            "chebyshev" => Some(Metric::Chebyshev),
            _ => None,
        }
    }

    /// Whether the distance never falls below the largest coordinate gap.
    /// Grid acceleration relies on this.
    pub(crate) fn dominates_chebyshev(&self) -> bool {
        !matches!(self, Metric::Custom { .. })
    }

    /// Distance between two points of equal dimension.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        Ok(self.raw(&x.coords, &y.coords))
    }

    /// Distance on raw coordinate slices; callers guarantee equal lengths.
    #[inline]
    pub(crate) fn raw(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Metric::Chebyshev => x
                .iter()
                .zip(y)
                .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs())),
            Metric::Custom { func, .. } => func(x, y),
        }
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric({})", self.name())
    }
}

/// A finite, non-empty set of points of a common dimension.
///
/// Points keep their insertion order; duplicates are dropped on the way in,
/// keeping the first occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<Point>,
    dim: usize,
}

impl PointSet {
    /// Builds a set with exact deduplication.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = check_dims(&points)?;
        let mut seen = HashSet::with_capacity(points.len());
        let points: Vec<Point> = points
            .into_iter()
            .filter(|p| seen.insert(p.clone()))
            .collect();
        Ok(PointSet { points, dim })
    }

    /// Builds a set in which no two stored points are within `tol` of each
    /// other: a point is kept only if it is farther than `tol` from every
    /// point kept before it.
    pub fn with_tolerance(points: Vec<Point>, tol: f64, metric: &Metric) -> Result<Self> {
        if tol.is_nan() || tol < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dedup tolerance must be >= 0, got {tol}"
            )));
        }
        let set = PointSet::new(points)?;
        if tol == 0.0 {
            return Ok(set);
        }
        let mut kept: Vec<Point> = Vec::new();
        for p in set.points {
            if kept.iter().all(|k| metric.raw(&k.coords, &p.coords) > tol) {
                kept.push(p);
            }
        }
        Ok(PointSet {
            points: kept,
            dim: set.dim,
        })
    }

    pub fn from_coords(rows: Vec<Vec<f64>>) -> Result<Self> {
        let points = rows
            .into_iter()
            .map(Point::new)
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(points)
    }

    pub fn singleton(point: Point) -> Self {
        let dim = point.dim();
        PointSet {
            points: vec![point],
            dim,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.iter().any(|q| q == p)
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Union with exact deduplication; points of `self` come first.
    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        self.check_dim(other.dim)?;
        let mut all = self.points.clone();
        all.extend(other.points.iter().cloned());
        PointSet::new(all)
    }

    /// The same set with points reordered lexicographically.
    pub fn sorted(mut self) -> PointSet {
        self.points.sort();
        self
    }

    /// Componentwise minimum and maximum corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.points[0].coords.clone();
        let mut hi = lo.clone();
        for p in &self.points[1..] {
            for (k, c) in p.coords.iter().enumerate() {
                lo[k] = lo[k].min(*c);
                hi[k] = hi[k].max(*c);
            }
        }
        (lo, hi)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        Ok(())
    }
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.points.serialize(serializer)
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

fn check_dims(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptySet)?;
    let dim = first.dim();
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }
    Ok(dim)
}

/// ρ(x, y).
pub fn distance(x: &Point, y: &Point, metric: &Metric) -> Result<f64> {
    metric.distance(x, y)
}

/// ρ(x, A) = min over a ∈ A of ρ(x, a).
pub fn point_set_distance(x: &Point, set: &PointSet, metric: &Metric) -> Result<f64> {
    set.check_dim(x.dim())?;
    Ok(nearest_index(x.coords(), set.points(), metric).1)
}

/// A point of `set` closest to `x`, with its distance. Ties go to the
/// lowest storage index.
pub fn nearest_point<'a>(
    x: &Point,
    set: &'a PointSet,
    metric: &Metric,
) -> Result<(&'a Point, f64)> {
    set.check_dim(x.dim())?;
    let (i, d) = nearest_index(x.coords(), set.points(), metric);
    Ok((&set.points[i], d))
}

/// Linear scan; `points` must be non-empty.
#[inline]
pub(crate) fn nearest_index(x: &[f64], points: &[Point], metric: &Metric) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = metric.raw(x, &p.coords);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}
