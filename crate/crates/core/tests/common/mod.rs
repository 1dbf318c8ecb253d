//! Oracles shared by the integration tests.
#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// `x ≺ y` iff `x = D y` for a doubly stochastic `D`, i.e. (Birkhoff) `x` is
/// a convex combination of permutations of `y`. Decided as LP feasibility.
pub fn majorized_by_lp(x: &[f64], y: &[f64]) -> bool {
    let n = x.len().max(y.len());
    let pad = |v: &[f64]| {
        let mut v = v.to_vec();
        v.resize(n, 0.0);
        v
    };
    let (x, y) = (pad(x), pad(y));
    let perms = permutations(n);
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = perms.iter().map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
    p.add_constraint(w.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    for i in 0..n {
        let row: Vec<_> = perms.iter().zip(&w).map(|(s, &v)| (v, y[s[i]])).collect();
        p.add_constraint(row, ComparisonOp::Eq, x[i]);
    }
    p.solve().is_ok()
}

/// Threshold form: `x ≺ y` iff equal sums and `Σ (x_i - t)_+ ≤ Σ (y_i - t)_+`
/// for every `t`; checking `t` at the entries of both vectors suffices.
pub fn majorized_by_thresholds(x: &[f64], y: &[f64], tol: f64) -> bool {
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    if (sx - sy).abs() > tol {
        return false;
    }
    let n = x.len().max(y.len());
    let pad = |v: &[f64]| {
        let mut v = v.to_vec();
        v.resize(n, 0.0);
        v
    };
    let (x, y) = (pad(x), pad(y));
    x.iter().chain(&y).all(|&t| {
        let fx: f64 = x.iter().map(|&a| (a - t).max(0.0)).sum();
        let fy: f64 = y.iter().map(|&a| (a - t).max(0.0)).sum();
        fx <= fy + tol
    })
}

pub fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Random `y ∈ [0,1]^n` and `x = D y` with `D` a random convex combination of
/// permutation matrices, so `x ≺ y` holds by construction.
pub fn random_majorized_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let terms = rng.random_range(1..=4);
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut x = vec![0.0; n];
    for w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for i in 0..n {
            x[i] += w / total * y[perm[i]];
        }
    }
    (sorted_desc(x), sorted_desc(y))
}

/// Random pair with equal sums that may or may not be majorization-ordered.
pub fn random_equal_sum_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let x = x.iter().map(|v| v * sy / sx).collect();
    (sorted_desc(x), sorted_desc(y))
}
