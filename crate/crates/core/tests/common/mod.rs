//! Brute-force reference computations shared by the integration tests.
//!
//! Nothing here goes through the library's complexes, operators or
//! reductions. Complexes are enumerated subset by subset from the raw samples,
//! and persistent Betti numbers come from exact integer ranks via
//! `beta = n_k(eps) - rank d_k(eps) - rank d_{k+1}(eps') + rank Y`, where `Y`
//! holds the rows of `d_{k+1}(eps')` indexed by `k`-simplices missing from
//! `S^eps`. The last two terms give `dim(Z_k(eps) ∩ B_k(eps'))`, since the
//! chains whose boundary stays inside `S^eps` form `ker Y`.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Delay vectors of `x` with `n = T - (d-1) tau` rows.
pub fn embed(x: &[f64], d: usize, tau: usize) -> Vec<Vec<f64>> {
    let span = (d - 1) * tau;
    if x.len() <= span {
        return Vec::new();
    }
    (0..x.len() - span)
        .map(|i| (0..d).map(|c| x[i + c * tau]).collect())
        .collect()
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// `k`-simplices (sorted vertex lists, lexicographic) of the VR complex at `eps`.
pub fn vr_simplices(points: &[Vec<f64>], k: usize, eps: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        points: &[Vec<f64>],
        k: usize,
        eps: f64,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k + 1 {
            out.push(current.clone());
            return;
        }
        for v in start..points.len() {
            if current.iter().all(|&u| linf(&points[u], &points[v]) <= eps) {
                current.push(v);
                rec(points, k, eps, v + 1, current, out);
                current.pop();
            }
        }
    }
    if n > 0 {
        rec(points, k, eps, 0, &mut current, &mut out);
    }
    out
}

/// Integer boundary matrix (rows = faces, columns = simplices); the face
/// omitting position `l` gets `(-1)^l`.
pub fn boundary(simplices: &[Vec<usize>], faces: &[Vec<usize>]) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; simplices.len()]; faces.len()];
    for (c, s) in simplices.iter().enumerate() {
        for l in 0..s.len() {
            let mut f = s.clone();
            f.remove(l);
            if let Some(r) = faces.iter().position(|x| *x == f) {
                m[r][c] = if l % 2 == 0 { 1 } else { -1 };
            }
        }
    }
    m
}

/// Rank over the rationals by fraction-free Gaussian elimination.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            let piv = m[r][c].clone();
            for j in 0..ncols {
                let v = &m[i][j] * &piv - &f * &m[r][j];
                m[i][j] = v;
            }
        }
        r += 1;
    }
    r
}

/// Exact persistent Betti number of the delay cloud `points`.
pub fn persistent_betti(points: &[Vec<f64>], k: usize, eps: f64, eps_prime: f64) -> usize {
    let sk = vr_simplices(points, k, eps);
    if sk.is_empty() {
        return 0;
    }
    let rank_down = if k == 0 {
        0
    } else {
        rank(&boundary(&sk, &vr_simplices(points, k - 1, eps)))
    };
    let sk_prime = vr_simplices(points, k, eps_prime);
    let up = vr_simplices(points, k + 1, eps_prime);
    let full = boundary(&up, &sk_prime);
    let leak: Vec<Vec<i64>> = sk_prime
        .iter()
        .zip(&full)
        .filter(|(s, _)| !sk.contains(s))
        .map(|(_, row)| row.clone())
        .collect();
    let beta = sk.len() as i64 - rank_down as i64 - rank(&full) as i64 + rank(&leak) as i64;
    assert!(beta >= 0, "negative Betti number from ranks");
    beta as usize
}

/// Betti table `rows[i][j]` (`j >= i`) on `grid`.
pub fn betti_table(points: &[Vec<f64>], k: usize, grid: &[f64]) -> Vec<Vec<Option<usize>>> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (j >= i).then(|| persistent_betti(points, k, grid[i], grid[j])))
                .collect()
        })
        .collect()
}

/// Uniform samples in `[0, 1)` of length drawn from `lengths`.
pub fn random_series(seed: u64, lengths: std::ops::RangeInclusive<usize>) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.random_range(lengths);
    (0..t).map(|_| rng.random::<f64>()).collect()
}

/// Eight scales `i / 7`.
pub fn unit_grid() -> Vec<f64> {
    (0..8).map(|i| i as f64 / 7.0).collect()
}

/// `sin(2 pi t)` at `t = 0, 1/4, ..., 1`, written out.
pub fn periodic_samples() -> Vec<f64> {
    vec![0.0, 1.0, 0.0, -1.0, 0.0]
}
