//! Classical persistent homology by exact column reduction.
//!
//! Simplices enter the Vietoris–Rips filtration at their diameter and are
//! ordered by `(diameter, dimension, vertex mask)`. The boundary matrix is
//! reduced over the rationals, so no coefficient field artefacts can creep in.
//! Columns are processed from the top dimension down so that every birth
//! column found along the way can be cleared without reduction.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::complex::{SimplexMask, MAX_VERTICES};
use crate::embedding::{delay_embed, distance_matrix, DistanceMatrix, EmbeddingParams, PointCloud};
use crate::error::{Error, Result};
use crate::ingest::TimeSeries;
use crate::persistence::{BettiTable, ScaleGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredSimplex {
    pub simplex: SimplexMask,
    pub value: f64,
}

/// All simplices of dimension at most `max_dim` with diameter at most `cap`,
/// in filtration order.
pub fn vr_filtration(dm: &DistanceMatrix, max_dim: usize, cap: f64) -> Result<Vec<FilteredSimplex>> {
    let n = dm.len();
    if n > MAX_VERTICES {
        return Err(Error::TooManyVertices(n));
    }
    let mut out = Vec::new();
    let mut stack: Vec<(SimplexMask, usize, f64)> = (0..n)
        .rev()
        .map(|v| (SimplexMask::vertex(v), v, 0.0))
        .collect();
    while let Some((simplex, last, value)) = stack.pop() {
        out.push(FilteredSimplex { simplex, value });
        if simplex.dim() == max_dim {
            continue;
        }
        for next in last + 1..n {
            let diam = simplex
                .vertices()
                .map(|v| dm.get(v, next))
                .fold(value, f64::max);
            if diam <= cap {
                let bits = simplex.bits() | (1u64 << next);
                let grown = SimplexMask::from_bits(bits).expect("nonzero mask");
                stack.push((grown, next, diam));
            }
        }
    }
    out.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.simplex.dim().cmp(&b.simplex.dim()))
            .then(a.simplex.bits().cmp(&b.simplex.bits()))
    });
    Ok(out)
}

/// A `dim`-class born at `birth` and killed at `death` (`None` if it never
/// dies within the filtration).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: Option<f64>,
}

type Column = Vec<(usize, BigRational)>;

/// `col - factor * other`, both sorted by row.
fn axpy(col: &Column, factor: &BigRational, other: &Column) -> Column {
    let mut out = Vec::with_capacity(col.len() + other.len());
    let (mut a, mut b) = (col.iter().peekable(), other.iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (Some((ra, va)), Some((rb, vb))) => {
                if ra < rb {
                    out.push((*ra, va.clone()));
                    a.next();
                } else if rb < ra {
                    out.push((*rb, -(factor * vb)));
                    b.next();
                } else {
                    let v = va - factor * vb;
                    if !v.is_zero() {
                        out.push((*ra, v));
                    }
                    a.next();
                    b.next();
                }
            }
            (Some((ra, va)), None) => {
                out.push((*ra, va.clone()));
                a.next();
            }
            (None, Some((rb, vb))) => {
                out.push((*rb, -(factor * vb)));
                b.next();
            }
            (None, None) => break,
        }
    }
    out
}

/// Pairs `(birth index, death index)` and the indices left unpaired.
pub fn reduce(filtration: &[FilteredSimplex]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let index: HashMap<u64, usize> = filtration
        .iter()
        .enumerate()
        .map(|(i, s)| (s.simplex.bits(), i))
        .collect();
    let top = filtration.iter().map(|s| s.simplex.dim()).max().unwrap_or(0);
    let one = BigRational::one();
    let minus_one = -BigRational::one();

    let mut cleared = vec![false; filtration.len()];
    let mut is_death = vec![false; filtration.len()];
    let mut pairs = Vec::new();
    for dim in (1..=top).rev() {
        let mut pivots: HashMap<usize, Column> = HashMap::new();
        for (j, s) in filtration.iter().enumerate() {
            if s.simplex.dim() != dim || cleared[j] {
                continue;
            }
            let mut col: Column = s
                .simplex
                .faces()
                .map(|(l, face)| {
                    let sign = if l % 2 == 0 { one.clone() } else { minus_one.clone() };
                    (index[&face.bits()], sign)
                })
                .collect();
            col.sort_by_key(|e| e.0);
            while let Some((low, value)) = col.last() {
                match pivots.get(low) {
                    Some(other) => {
                        let factor = value / &other.last().expect("pivot column").1;
                        col = axpy(&col, &factor, other);
                    }
                    None => break,
                }
            }
            if let Some(&(low, _)) = col.last() {
                pairs.push((low, j));
                cleared[low] = true;
                is_death[j] = true;
                pivots.insert(low, col);
            }
        }
    }
    pairs.sort_unstable();
    let unpaired = (0..filtration.len())
        .filter(|&i| !cleared[i] && !is_death[i])
        .collect();
    (pairs, unpaired)
}

/// Persistence pairs of dimensions `0..=kmax`, built from simplices up to
/// dimension `kmax + 1`. Zero-length pairs are dropped. With a `cap`, only
/// simplices of diameter at most `cap` are used and deaths beyond it show
/// up as `None`.
pub fn classical_persistence(
    cloud: &PointCloud,
    kmax: usize,
    cap: Option<f64>,
) -> Result<Vec<PersistencePair>> {
    let dm = distance_matrix(cloud);
    let filtration = vr_filtration(&dm, kmax + 1, cap.unwrap_or(f64::INFINITY))?;
    let (pairs, unpaired) = reduce(&filtration);
    let mut out: Vec<PersistencePair> = pairs
        .into_iter()
        .filter(|&(b, _)| filtration[b].simplex.dim() <= kmax)
        .filter(|&(b, d)| filtration[b].value < filtration[d].value)
        .map(|(b, d)| PersistencePair {
            dim: filtration[b].simplex.dim(),
            birth: filtration[b].value,
            death: Some(filtration[d].value),
        })
        .chain(
            unpaired
                .into_iter()
                .filter(|&i| filtration[i].simplex.dim() <= kmax)
                .map(|i| PersistencePair {
                    dim: filtration[i].simplex.dim(),
                    birth: filtration[i].value,
                    death: None,
                }),
        )
        .collect();
    out.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(
                a.death
                    .unwrap_or(f64::INFINITY)
                    .total_cmp(&b.death.unwrap_or(f64::INFINITY)),
            )
    });
    Ok(out)
}

/// Number of `dim`-classes born by `eps` and alive after `eps_prime`.
pub fn betti_from_pairs(pairs: &[PersistencePair], dim: usize, eps: f64, eps_prime: f64) -> usize {
    pairs
        .iter()
        .filter(|p| p.dim == dim && p.birth <= eps && p.death.map_or(true, |d| d > eps_prime))
        .count()
}

/// Exact tables for each dimension in `dims`.
pub fn classical_tables(
    ts: &TimeSeries,
    params: EmbeddingParams,
    grid: &ScaleGrid,
    dims: &[usize],
) -> Result<Vec<BettiTable>> {
    let cloud = delay_embed(ts, params)?;
    let kmax = dims.iter().copied().max().unwrap_or(0);
    let cap = grid.get(grid.len() - 1);
    let pairs = classical_persistence(&cloud, kmax, Some(cap))?;
    dims.iter()
        .map(|&k| {
            BettiTable::from_fn(k, grid, |i, j| {
                Ok(betti_from_pairs(&pairs, k, grid.get(i), grid.get(j)))
            })
        })
        .collect()
}

/// Exact rank of an integer matrix given as rows, by fraction-free
/// elimination.
pub fn exact_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = &*x * &pivot_row[c] - &f * y;
            }
        }
        rank += 1;
    }
    rank
}

/// One cell where two tables disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub eps: f64,
    pub eps_prime: f64,
    pub expected: usize,
    pub actual: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub cells_compared: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl DiscrepancyReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Cell-by-cell comparison of two sets of tables with matching dimensions
/// and grids.
pub fn compare_tables(expected: &[BettiTable], actual: &[BettiTable]) -> Result<DiscrepancyReport> {
    if expected.len() != actual.len() {
        return Err(Error::GridMismatch(format!(
            "{} tables vs {}",
            expected.len(),
            actual.len()
        )));
    }
    let mut report = DiscrepancyReport::default();
    for (e, a) in expected.iter().zip(actual) {
        if e.k() != a.k() {
            return Err(Error::GridMismatch(format!("dimension {} vs {}", e.k(), a.k())));
        }
        let grid = e.grid();
        if grid != a.grid() {
            return Err(Error::GridMismatch(format!(
                "grids differ for k = {}: {:?} vs {:?}",
                e.k(),
                grid,
                a.grid()
            )));
        }
        for i in 0..grid.len() {
            for j in i..grid.len() {
                report.cells_compared += 1;
                let (x, y) = (e.get(i, j).unwrap_or(0), a.get(i, j).unwrap_or(0));
                if x != y {
                    report.discrepancies.push(Discrepancy {
                        k: e.k(),
                        i,
                        j,
                        eps: grid[i],
                        eps_prime: grid[j],
                        expected: x,
                        actual: y,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_cloud() -> PointCloud {
        delay_embed(
            &TimeSeries::new(vec![0.0, 1.0, 0.0, -1.0, 0.0]),
            EmbeddingParams::new(2, 1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn filtration_order() {
        let dm = distance_matrix(&periodic_cloud());
        let f = vr_filtration(&dm, 2, f64::INFINITY).unwrap();
        assert_eq!(f.len(), 4 + 6 + 4);
        assert!(f[..4].iter().all(|s| s.value == 0.0 && s.simplex.dim() == 0));
        assert!(f.windows(2).all(|w| w[0].value <= w[1].value));
        // every face precedes its cofaces
        let pos: HashMap<u64, usize> = f.iter().enumerate().map(|(i, s)| (s.simplex.bits(), i)).collect();
        for (i, s) in f.iter().enumerate() {
            for (_, face) in s.simplex.faces() {
                assert!(pos[&face.bits()] < i);
            }
        }
        let capped = vr_filtration(&dm, 2, 1.0).unwrap();
        assert_eq!(capped.len(), 8);
    }

    #[test]
    fn periodic_pairs() {
        let pairs = classical_persistence(&periodic_cloud(), 1, None).unwrap();
        let h0: Vec<_> = pairs.iter().filter(|p| p.dim == 0).collect();
        assert_eq!(h0.len(), 4);
        assert_eq!(h0.iter().filter(|p| p.death == Some(1.0)).count(), 3);
        assert_eq!(h0.iter().filter(|p| p.death.is_none()).count(), 1);
        let h1: Vec<_> = pairs.iter().filter(|p| p.dim == 1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, Some(2.0)));
        assert_eq!(betti_from_pairs(&pairs, 0, 0.0, 0.0), 4);
        assert_eq!(betti_from_pairs(&pairs, 0, 1.0, 1.0), 1);
        assert_eq!(betti_from_pairs(&pairs, 1, 1.0, 1.0), 1);
        assert_eq!(betti_from_pairs(&pairs, 1, 1.0, 2.0), 0);
    }

    #[test]
    fn cap_turns_late_deaths_into_essentials() {
        let pairs = classical_persistence(&periodic_cloud(), 1, Some(1.5)).unwrap();
        let h1: Vec<_> = pairs.iter().filter(|p| p.dim == 1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!(h1[0].death, None);
    }

    #[test]
    fn single_point_and_identical_points() {
        let p = EmbeddingParams::new(1, 1).unwrap();
        let one = delay_embed(&TimeSeries::new(vec![3.0]), p).unwrap();
        let pairs = classical_persistence(&one, 1, None).unwrap();
        assert_eq!(pairs, vec![PersistencePair { dim: 0, birth: 0.0, death: None }]);
        // coincident points merge at scale 0 and the zero-length pairs vanish
        let same = delay_embed(&TimeSeries::new(vec![2.0; 4]), p).unwrap();
        let pairs = classical_persistence(&same, 1, None).unwrap();
        assert_eq!(pairs.len(), 1);
    }

    #[test]
    fn exact_rank_examples() {
        assert_eq!(exact_rank(&[]), 0);
        assert_eq!(exact_rank(&[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(exact_rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(exact_rank(&[vec![1, -1, 0], vec![0, 1, -1], vec![-1, 0, 1]]), 2);
        assert_eq!(exact_rank(&[vec![2, 0], vec![0, 3]]), 2);
    }

    #[test]
    fn comparison_reports_cells() {
        let grid = ScaleGrid::parse("0,1").unwrap();
        let a = BettiTable::from_fn(0, &grid, |i, j| Ok(2 - i.max(j))).unwrap();
        let b = BettiTable::from_fn(0, &grid, |i, _| Ok(2 - i)).unwrap();
        let r = compare_tables(std::slice::from_ref(&a), std::slice::from_ref(&a)).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.cells_compared, 3);
        let r = compare_tables(&[a.clone()], &[b]).unwrap();
        assert_eq!(r.discrepancies.len(), 1);
        assert_eq!((r.discrepancies[0].i, r.discrepancies[0].j), (0, 1));

        let other = ScaleGrid::parse("0,2").unwrap();
        let c = BettiTable::from_fn(0, &other, |_, _| Ok(0)).unwrap();
        assert!(matches!(compare_tables(&[a.clone()], &[c]), Err(Error::GridMismatch(_))));
        assert!(compare_tables(&[a], &[]).is_err());
    }
}
