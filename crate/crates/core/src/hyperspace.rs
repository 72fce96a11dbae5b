//! Analysis of finite prefixes `A_1 … A_N` of sequences of point sets.
//!
//! Every "for all i > m" over an infinite sequence ranges over `m < i <= N`
//! here, and the topological closure of a tail union is replaced by
//! ε-proximity to the (finite, hence closed) tail union itself. Sequence
//! indices are 1-based throughout.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hausdorff::{hausdorff_distance, SetIndex};
use crate::metric::{nearest_point, point_set_distance, Metric, Point, PointSet};

/// Finite surrogates for the infinite-sequence quantifiers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Truncation {
    /// Tails starting after `⌊N · tail_fraction⌋` are too short to inspect.
    pub tail_fraction: f64,
    /// Fraction of the inspected tail that stands in for "infinitely many".
    pub subseq_fraction: f64,
    /// Indices that must remain after a Cauchy modulus or chain index.
    pub min_margin: usize,
    /// Shortest witness chain accepted before reporting an exhausted prefix.
    pub min_chain_points: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            tail_fraction: 0.5,
            subseq_fraction: 0.2,
            min_margin: 5,
            min_chain_points: 2,
        }
    }
}

/// The prefix `A_1 … A_N` (N >= 2) of a sequence of point sets.
#[derive(Clone, Debug)]
pub struct SetSequence {
    sets: Vec<PointSet>,
    metric: Metric,
    truncation: Truncation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyReport {
    pub epsilon: f64,
    pub is_cauchy: bool,
    /// Smallest m with `sup_{i,j > m} ρ_H(A_i, A_j) < ε` that leaves at
    /// least `min_margin` indices after it.
    pub m_star: Option<usize>,
    /// The supremum at `m_star`, or at the last admissible m when absent.
    pub tail_sup: f64,
}

/// A set of points approximating the limit `⋂ₙ cl(⋃_{i≥n} A_i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitApprox {
    pub points: PointSet,
    pub epsilon: f64,
    pub candidates_examined: usize,
    /// Candidates that passed the tail test before clustering.
    pub qualifying: usize,
    /// Set when the sequence is not Cauchy at scale `epsilon`.
    pub cauchy_warning: bool,
}

impl LimitApprox {
    /// Wraps a known limit, e.g. one computed by hand.
    pub fn from_points(points: PointSet, epsilon: f64) -> Self {
        LimitApprox {
            candidates_examined: points.len(),
            qualifying: points.len(),
            points,
            epsilon,
            cauchy_warning: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaVerdict {
    pub x: Point,
    pub epsilon: f64,
    pub m: usize,
    /// `max_{m < i <= N} ρ(x, A_i)`, strictly below `epsilon`.
    pub hypothesis_max: f64,
    /// ρ(x, limit).
    pub distance: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Points `z_i ∈ A_{n_i}` with `ρ(x, z_1) < ε` and `ρ(z_i, z_{i+1}) < ε / b^i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessChain {
    pub b: f64,
    pub epsilon: f64,
    pub x: Point,
    pub indices: Vec<usize>,
    pub points: Vec<Point>,
    /// `gaps[i - 1] = ρ(z_i, z_{i+1})`.
    pub gaps: Vec<f64>,
    pub start_distance: f64,
    pub total_length: f64,
    pub y_estimate: Point,
    pub estimate_distance: f64,
}

impl WitnessChain {
    /// ε(b + 1)/(b − 1), the bound on ρ(x, y).
    pub fn limit_bound(&self) -> f64 {
        self.epsilon * (self.b + 1.0) / (self.b - 1.0)
    }

    /// ε/(b − 1), the bound on the chain length.
    pub fn length_bound(&self) -> f64 {
        self.epsilon / (self.b - 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub u_limit_to_set: f64,
    pub u_set_to_limit: f64,
    pub rho_h: f64,
}

/// The three limit characterizations evaluated on one candidate pool.
/// Distances are `None` when one side is empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub epsilon: f64,
    pub limit: Vec<Point>,
    pub liminf: Vec<Point>,
    pub limsup: Vec<Point>,
    pub limit_liminf: Option<f64>,
    pub limit_limsup: Option<f64>,
    pub liminf_limsup: Option<f64>,
    pub agree: bool,
    pub cauchy_warning: bool,
}

impl SetSequence {
    pub fn new(sets: Vec<PointSet>, metric: Metric) -> Result<Self> {
        if sets.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a sequence needs at least 2 sets, got {}",
                sets.len()
            )));
        }
        let dim = sets[0].dim();
        for s in &sets {
            s.check_dim(dim)?;
        }
        Ok(SetSequence {
            sets,
            metric,
            truncation: Truncation::default(),
        })
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Result<Self> {
        let frac_ok = |f: f64| f > 0.0 && f < 1.0;
        if !frac_ok(truncation.tail_fraction) || !(truncation.subseq_fraction > 0.0 && truncation.subseq_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_fraction must be in (0, 1) and subseq_fraction in (0, 1], got {} and {}",
                truncation.tail_fraction, truncation.subseq_fraction
            )));
        }
        if truncation.min_margin == 0 || truncation.min_chain_points == 0 {
            return Err(Error::InvalidArgument(
                "min_margin and min_chain_points must be positive".into(),
            ));
        }
        self.truncation = truncation;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    /// `A_n`, 1-based.
    pub fn get(&self, n: usize) -> Result<&PointSet> {
        self.check_index(n)?;
        Ok(&self.sets[n - 1])
    }

    /// `N_check = ⌊N · tail_fraction⌋`, at least 1.
    pub fn n_check(&self) -> usize {
        let n = self.len();
        ((n as f64 * self.truncation.tail_fraction).floor() as usize).clamp(1, n - 1)
    }

    fn margin(&self) -> usize {
        self.truncation.min_margin.min(self.len())
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// `S[m] = sup_{m < i, j <= N} ρ_H(A_i, A_j)` for `m = 0 … N-1`.
    fn tail_sups(&self) -> Vec<f64> {
        let n = self.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let dists: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| {
                hausdorff_distance(&self.sets[i], &self.sets[j], &self.metric)
                    .map(|r| r.rho_h)
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        // row_max[i] = max_{j > i} ρ_H(A_{i+1}, A_{j+1}) in 0-based storage
        let mut row_max = vec![0.0f64; n];
        for (&(i, _), d) in pairs.iter().zip(&dists) {
            row_max[i] = row_max[i].max(*d);
        }
        let mut sups = vec![0.0f64; n + 1];
        for m in (0..n - 1).rev() {
            // sets with 1-based index > m start at storage index m
            sups[m] = sups[m + 1].max(row_max[m]);
        }
        sups
    }

    /// Cauchy verdict at scale `epsilon` over the available prefix.
    pub fn is_cauchy(&self, epsilon: f64) -> Result<CauchyReport> {
        check_positive("epsilon", epsilon)?;
        let sups = self.tail_sups();
        let last = self.len() - self.margin();
        let found = (0..=last).find(|&m| sups[m] < epsilon);
        Ok(match found {
            Some(m) => CauchyReport {
                epsilon,
                is_cauchy: true,
                m_star: Some(m),
                tail_sup: sups[m],
            },
            None => CauchyReport {
                epsilon,
                is_cauchy: false,
                m_star: None,
                tail_sup: sups[last],
            },
        })
    }

    /// `A_n ∪ … ∪ A_N`, deduplicated.
    pub fn tail_union(&self, n: usize) -> Result<PointSet> {
        self.check_index(n)?;
        let points: Vec<Point> = self.sets[n - 1..]
            .iter()
            .flat_map(|s| s.iter().cloned())
            .collect();
        PointSet::new(points)
    }

    /// Caller extras first, then every point of every `A_i`, deduplicated.
    /// Returns the pool and how many leading entries came from `extra`.
    fn candidate_pool(&self, extra: Option<&PointSet>) -> Result<(Vec<Point>, usize)> {
        let mut seen = HashSet::new();
        let mut pool = Vec::new();
        if let Some(extra) = extra {
            extra.check_dim(self.dim())?;
            pool.extend(extra.iter().filter(|p| seen.insert((*p).clone())).cloned());
        }
        let n_extra = pool.len();
        for s in &self.sets {
            pool.extend(s.iter().filter(|p| seen.insert((*p).clone())).cloned());
        }
        Ok((pool, n_extra))
    }

    /// `extra` together with every point of the sequence.
    pub fn pool(&self, extra: Option<&PointSet>) -> Result<PointSet> {
        PointSet::new(self.candidate_pool(extra)?.0)
    }

    /// Scores every pool point by `max_{n <= N_check} ρ(x, ⋃_{i≥n} A_i)`.
    /// Tails are nested, so the maximum is attained at `n = N_check`.
    fn score_pool(&self, pool: &[Point]) -> Result<Vec<f64>> {
        let tail = self.tail_union(self.n_check())?;
        let index = SetIndex::new(&tail, &self.metric);
        Ok(pool.par_iter().map(|x| index.distance(x.coords())).collect())
    }

    /// Every pool candidate passing the ε-thickened tail test, before
    /// clustering, sorted lexicographically.
    pub fn limit_candidates(&self, epsilon: f64, extra: Option<&PointSet>) -> Result<Vec<Point>> {
        check_nonnegative("epsilon", epsilon)?;
        let (pool, _) = self.candidate_pool(extra)?;
        let scores = self.score_pool(&pool)?;
        let mut out: Vec<Point> = pool
            .into_iter()
            .zip(scores)
            .filter(|(_, s)| *s <= epsilon)
            .map(|(p, _)| p)
            .collect();
        out.sort();
        Ok(out)
    }

    /// Approximates the limit set at scale `epsilon`.
    ///
    /// Qualifying candidates are merged into an ε-net. Caller-supplied
    /// candidates are visited before sequence members so that cluster points
    /// outside every `A_i` (the limit 0 of `{1/n}`) represent their cluster;
    /// within each group lower tail scores come first, then lexicographic
    /// order. The result is sorted lexicographically.
    pub fn limit_set(&self, epsilon: f64, extra: Option<&PointSet>) -> Result<LimitApprox> {
        check_nonnegative("epsilon", epsilon)?;
        let (pool, n_extra) = self.candidate_pool(extra)?;
        let scores = self.score_pool(&pool)?;
        let mut qualifying: Vec<(bool, f64, &Point)> = pool
            .iter()
            .zip(&scores)
            .enumerate()
            .filter(|(_, (_, s))| **s <= epsilon)
            .map(|(i, (p, s))| (i >= n_extra, *s, p))
            .collect();
        if qualifying.is_empty() {
            return Err(Error::EmptyLimit);
        }
        qualifying.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then_with(|| a.2.cmp(b.2))
        });
        let mut reps: Vec<Point> = Vec::new();
        for (_, _, p) in &qualifying {
            if reps
                .iter()
                .all(|r| self.metric.raw(r.coords(), p.coords()) > epsilon)
            {
                reps.push((*p).clone());
            }
        }
        reps.sort();
        let cauchy_warning = epsilon <= 0.0 || !self.is_cauchy(epsilon)?.is_cauchy;
        Ok(LimitApprox {
            points: PointSet::new(reps)?,
            epsilon,
            candidates_examined: pool.len(),
            qualifying: qualifying.len(),
            cauchy_warning,
        })
    }

    /// Candidates with `ρ(x, A_n) <= ε` for every `n` in `N_check ..= N`:
    /// the nearest points `y_n ∈ A_n` stay within ε of `x` along the tail.
    pub fn liminf_set(&self, epsilon: f64, candidates: &PointSet) -> Result<Vec<Point>> {
        check_nonnegative("epsilon", epsilon)?;
        candidates.check_dim(self.dim())?;
        let window = &self.sets[self.n_check() - 1..];
        let indices: Vec<SetIndex<'_>> = window
            .iter()
            .map(|s| SetIndex::new(s, &self.metric))
            .collect();
        let mut out: Vec<Point> = candidates
            .points()
            .par_iter()
            .filter(|x| {
                indices
                    .iter()
                    .all(|ix| ix.nearest_bounded(x.coords(), epsilon) <= epsilon)
            })
            .cloned()
            .collect();
        out.sort();
        Ok(out)
    }

    /// Candidates within ε of `A_n` for at least
    /// `⌈subseq_fraction · (N − N_check)⌉` indices `n` in `N_check+1 ..= N`.
    pub fn limsup_set(&self, epsilon: f64, candidates: &PointSet) -> Result<Vec<Point>> {
        check_nonnegative("epsilon", epsilon)?;
        candidates.check_dim(self.dim())?;
        let window = &self.sets[self.n_check()..];
        let needed = ((self.truncation.subseq_fraction * window.len() as f64).ceil() as usize).max(1);
        let indices: Vec<SetIndex<'_>> = window
            .iter()
            .map(|s| SetIndex::new(s, &self.metric))
            .collect();
        let mut out: Vec<Point> = candidates
            .points()
            .par_iter()
            .filter(|x| {
                indices
                    .iter()
                    .filter(|ix| ix.nearest_bounded(x.coords(), epsilon) <= epsilon)
                    .count()
                    >= needed
            })
            .cloned()
            .collect();
        out.sort();
        Ok(out)
    }

    /// Checks `ρ(x, A_i) < ε` for `m < i <= N`; returns the largest value.
    fn check_hypothesis(&self, x: &Point, epsilon: f64, m: usize) -> Result<f64> {
        check_positive("epsilon", epsilon)?;
        if m >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.len(),
            });
        }
        let mut worst = 0.0f64;
        for i in m + 1..=self.len() {
            let d = point_set_distance(x, &self.sets[i - 1], &self.metric)?;
            if d.is_nan() || d >= epsilon {
                return Err(Error::HypothesisViolated {
                    index: i,
                    distance: d,
                    epsilon,
                });
            }
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// If `ρ(x, A_i) < ε` for all `i > m` then `ρ(x, A) <= ε`; checks the
    /// conclusion against `limit`, allowing its own scale plus `tol`.
    pub fn main_lemma_check(
        &self,
        x: &Point,
        epsilon: f64,
        m: usize,
        limit: &LimitApprox,
        tol: f64,
    ) -> Result<LemmaVerdict> {
        check_nonnegative("tol", tol)?;
        let hypothesis_max = self.check_hypothesis(x, epsilon, m)?;
        let distance = point_set_distance(x, &limit.points, &self.metric)?;
        let bound = epsilon + limit.epsilon + tol;
        Ok(LemmaVerdict {
            x: x.clone(),
            epsilon,
            m,
            hypothesis_max,
            distance,
            bound,
            holds: distance <= bound,
        })
    }

    /// Builds the chain `z_1, z_2, …` behind the lemma.
    ///
    /// Level `i` uses the smallest index `n_i` after `n_{i-1}` (after `m` for
    /// `i = 1`) with `u(A_{n_i}, A_j) < ε / b^i` for all later `j`, and only
    /// indices leaving `min_margin` sets after them are considered. Each
    /// `z_{i+1}` is the nearest point to `z_i` in `A_{n_{i+1}}`. The chain
    /// ends at the first level without an admissible index.
    pub fn witness_chain(&self, x: &Point, epsilon: f64, m: usize, b: f64) -> Result<WitnessChain> {
        if !(b > 1.0 && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("b must be > 1, got {b}")));
        }
        self.check_hypothesis(x, epsilon, m)?;
        let n = self.len();
        let last = n - self.truncation.min_margin.min(n - 1);
        let indices: Vec<SetIndex<'_>> = self
            .sets
            .iter()
            .map(|s| SetIndex::new(s, &self.metric))
            .collect();
        // reach[n] = max_{n < j <= N} u(A_n, A_j), filled on demand
        let mut reach: Vec<Option<f64>> = vec![None; n + 1];
        let mut reach_of = |k: usize| -> f64 {
            *reach[k].get_or_insert_with(|| {
                let mut worst = 0.0f64;
                for ix in &indices[k..] {
                    for z in self.sets[k - 1].iter() {
                        worst = worst.max(ix.nearest_bounded(z.coords(), worst));
                    }
                }
                worst
            })
        };

        let mut chain_indices = Vec::new();
        let mut points: Vec<Point> = Vec::new();
        let mut gaps = Vec::new();
        let mut prev = m;
        let mut level = 1i32;
        loop {
            let threshold = epsilon / b.powi(level);
            let Some(next) = (prev + 1..=last).find(|&k| reach_of(k) < threshold) else {
                break;
            };
            let from = points.last().unwrap_or(x);
            let (z, d) = nearest_point(from, &self.sets[next - 1], &self.metric)?;
            if !points.is_empty() {
                gaps.push(d);
            }
            chain_indices.push(next);
            points.push(z.clone());
            prev = next;
            level += 1;
        }
        if points.len() < self.truncation.min_chain_points {
            return Err(Error::PrefixExhausted {
                level: points.len() + 1,
            });
        }
        let start_distance = self.metric.distance(x, &points[0])?;
        let y_estimate = points.last().cloned().expect("chain is non-empty");
        let estimate_distance = self.metric.distance(x, &y_estimate)?;
        Ok(WitnessChain {
            b,
            epsilon,
            x: x.clone(),
            indices: chain_indices,
            total_length: gaps.iter().sum(),
            gaps,
            points,
            start_distance,
            y_estimate,
            estimate_distance,
        })
    }

    /// `(n, u(limit, A_n), u(A_n, limit), ρ_H)` for every index.
    pub fn convergence_trace(&self, limit: &LimitApprox) -> Result<Vec<TraceRow>> {
        limit.points.check_dim(self.dim())?;
        self.sets
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let r = hausdorff_distance(&limit.points, s, &self.metric)?;
                Ok(TraceRow {
                    n: i + 1,
                    u_limit_to_set: r.u_ab,
                    u_set_to_limit: r.u_ba,
                    rho_h: r.rho_h,
                })
            })
            .collect()
    }

    /// Compares limit, lower limit and upper limit on the pool made of
    /// `candidates` plus every point of the sequence. They agree when all
    /// pairwise Hausdorff distances are at most 2ε.
    pub fn limit_characterization_agreement(
        &self,
        epsilon: f64,
        candidates: Option<&PointSet>,
    ) -> Result<Agreement> {
        let limit = self.limit_set(epsilon, candidates)?;
        let (pool, _) = self.candidate_pool(candidates)?;
        let pool = PointSet::new(pool)?;
        let liminf = self.liminf_set(epsilon, &pool)?;
        let limsup = self.limsup_set(epsilon, &pool)?;
        let limit_points = limit.points.points().to_vec();
        let between = |a: &[Point], b: &[Point]| -> Result<Option<f64>> {
            if a.is_empty() || b.is_empty() {
                return Ok(None);
            }
            let a = PointSet::new(a.to_vec())?;
            let b = PointSet::new(b.to_vec())?;
            Ok(Some(hausdorff_distance(&a, &b, &self.metric)?.rho_h))
        };
        let limit_liminf = between(&limit_points, &liminf)?;
        let limit_limsup = between(&limit_points, &limsup)?;
        let liminf_limsup = between(&liminf, &limsup)?;
        let agree = [limit_liminf, limit_limsup, liminf_limsup]
            .iter()
            .all(|d| matches!(d, Some(v) if *v <= 2.0 * epsilon));
        Ok(Agreement {
            epsilon,
            limit: limit_points,
            liminf,
            limsup,
            limit_liminf,
            limit_limsup,
            liminf_limsup,
            agree,
            cauchy_warning: limit.cauchy_warning,
        })
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")))
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be >= 0, got {v}")))
    }
}
