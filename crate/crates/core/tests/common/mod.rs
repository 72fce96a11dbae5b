//! Generators and brute-force oracles shared by the integration tests. The
//! oracles use nothing from the crate beyond the data types.

#![allow(dead_code)]

use hyperspace_core::{Point, PointSet, SetSequence};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn point(coords: &[f64]) -> Point {
    Point::new(coords.to_vec()).unwrap()
}

pub fn cloud_1d(values: &[f64]) -> PointSet {
    PointSet::from_coords(values.iter().map(|&v| vec![v]).collect()).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize, spread: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-spread..spread)).collect()
}

pub fn random_cloud(rng: &mut ChaCha8Rng, d: usize, n: usize, spread: f64) -> PointSet {
    PointSet::from_coords((0..n).map(|_| random_point(rng, d, spread)).collect()).unwrap()
}

/// Points on the integer lattice `{-k..k}^d`: many exact distance ties.
pub fn lattice_cloud(rng: &mut ChaCha8Rng, d: usize, n: usize, k: i32) -> PointSet {
    PointSet::from_coords(
        (0..n)
            .map(|_| (0..d).map(|_| f64::from(rng.gen_range(-k..=k))).collect())
            .collect(),
    )
    .unwrap()
}

/// ρ(x, A) by exhaustive minimum.
pub fn brute_point_set(x: &[f64], a: &PointSet) -> f64 {
    a.iter().map(|p| euclid(x, p.coords())).fold(f64::INFINITY, f64::min)
}

/// ρ_H(A, B) by exhaustive max-min in both directions.
pub fn brute_hausdorff(a: &PointSet, b: &PointSet) -> f64 {
    let ab = a.iter().map(|p| brute_point_set(p.coords(), b)).fold(0.0, f64::max);
    let ba = b.iter().map(|p| brute_point_set(p.coords(), a)).fold(0.0, f64::max);
    ab.max(ba)
}

/// `A_n = {b + r qⁿ u_{n,b}}` over a fixed base cloud, with `u` uniform in
/// the unit cube: ρ_H(A_i, A_j) <= √d · r (qⁱ + qʲ), so the sequence is Cauchy.
pub fn shrinking_noise_sequence(
    rng: &mut ChaCha8Rng,
    d: usize,
    base_size: usize,
    len: usize,
    r: f64,
    q: f64,
) -> Vec<PointSet> {
    let base: Vec<Vec<f64>> = (0..base_size).map(|_| random_point(rng, d, 1.0)).collect();
    (1..=len)
        .map(|n| {
            let scale = r * q.powi(n as i32);
            PointSet::from_coords(
                base.iter()
                    .map(|b| b.iter().map(|c| c + scale * rng.gen_range(-1.0..1.0)).collect())
                    .collect(),
            )
            .unwrap()
        })
        .collect()
}

/// Candidates `x` with `max_{1 <= n <= N_check} ρ(x, A_n ∪ … ∪ A_N) <= ε`,
/// every tail distance taken by exhaustive scan.
pub fn brute_limit_candidates(seq: &SetSequence, epsilon: f64, pool: &[Point]) -> Vec<Point> {
    let sets = seq.sets();
    let mut out: Vec<Point> = pool
        .iter()
        .filter(|x| {
            (1..=seq.n_check()).all(|n| {
                let tail_dist = sets[n - 1..]
                    .iter()
                    .map(|s| brute_point_set(x.coords(), s))
                    .fold(f64::INFINITY, f64::min);
                tail_dist <= epsilon
            })
        })
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Every point of every set, first occurrence order.
pub fn all_points(sets: &[PointSet]) -> Vec<Point> {
    let mut seen = std::collections::HashSet::new();
    sets.iter()
        .flat_map(|s| s.iter())
        .filter(|p| seen.insert((*p).clone()))
        .cloned()
        .collect()
}

/// Greedy δ-net in storage order, checking every kept point.
pub fn brute_decimate(a: &PointSet, delta: f64) -> Vec<Point> {
    let mut kept: Vec<Point> = Vec::new();
    for p in a.iter() {
        if kept.iter().all(|k| euclid(k.coords(), p.coords()) > delta) {
            kept.push(p.clone());
        }
    }
    kept
}

/// Largest singular value of a row-major `d × d` matrix by power iteration
/// on `MᵀM`.
pub fn power_iteration_norm(m: &[f64], d: usize) -> f64 {
    let mut v = vec![1.0; d];
    let mut sigma = 0.0;
    for _ in 0..500 {
        let mv: Vec<f64> = (0..d).map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum()).collect();
        let mtmv: Vec<f64> = (0..d).map(|j| (0..d).map(|i| m[i * d + j] * mv[i]).sum()).collect();
        let norm = mtmv.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = mtmv.iter().map(|x| x / norm).collect();
        let mv: Vec<f64> = (0..d).map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum()).collect();
        sigma = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    sigma
}

/// Level-`n` endpoints of the middle-thirds construction, from ternary
/// expansions with digits 0 and 2.
pub fn cantor_endpoints(n: u32) -> Vec<f64> {
    let scale = 3f64.powi(n as i32);
    let mut out = Vec::new();
    for word in 0u64..(1 << n) {
        let mut left = 0u64;
        for k in 0..n {
            left = left * 3 + if word >> (n - 1 - k) & 1 == 1 { 2 } else { 0 };
        }
        out.push(left as f64 / scale);
        out.push((left + 1) as f64 / scale);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
