//! Delay-coordinate embedding of a scalar series into a point cloud, and the
//! L∞ distance used for every scale comparison downstream.
//!
//! Point `i` (0-based) of a cloud built with dimension `d` and delay `tau` is
//! `(x_{i+1}, x_{i+1+tau}, ..., x_{i+1+(d-1)tau})` in 1-based series indices.
//! A series of length `T` yields `T - (d-1)*tau` points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingParams {
    dim: usize,
    delay: usize,
}

impl EmbeddingParams {
    pub fn new(dim: usize, delay: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if delay == 0 {
            return Err(Error::InvalidParams("delay must be at least 1".into()));
        }
        Ok(Self { dim, delay })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    /// Samples spanned by one embedded vector minus one, `(d-1)*tau`.
    pub fn window(&self) -> usize {
        (self.dim - 1) * self.delay
    }

    /// Number of points obtained from a series of length `len`, if any.
    pub fn point_count(&self, len: usize) -> Option<usize> {
        len.checked_sub(self.window()).filter(|&n| n > 0)
    }

    /// 1-based series index of coordinate `coord` of point `point`.
    pub fn time_index(&self, point: usize, coord: usize) -> usize {
        point + coord * self.delay + 1
    }
}

/// Delay-embedded vectors stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCloud {
    coords: Vec<f64>,
    params: EmbeddingParams,
}

impl PointCloud {
    /// Builds a cloud from explicit points; used mostly by tests.
    pub fn from_points(points: &[Vec<f64>], params: EmbeddingParams) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * params.dim);
        for p in points {
            if p.len() != params.dim {
                return Err(Error::DimensionMismatch {
                    left: p.len(),
                    right: params.dim,
                });
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { coords, params })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.params.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn params(&self) -> EmbeddingParams {
        self.params
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.params.dim;
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.params.dim)
    }
}

pub fn delay_embed(ts: &TimeSeries, params: EmbeddingParams) -> Result<PointCloud> {
    let n = params.point_count(ts.len()).ok_or(Error::EmptyEmbedding {
        len: ts.len(),
        dim: params.dim,
        delay: params.delay,
    })?;
    let x = ts.values();
    let mut coords = Vec::with_capacity(n * params.dim);
    for i in 0..n {
        coords.extend((0..params.dim).map(|t| x[i + t * params.delay]));
    }
    Ok(PointCloud { coords, params })
}

/// Largest coordinate-wise absolute difference.
pub fn chebyshev_distance(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch {
            left: v.len(),
            right: w.len(),
        });
    }
    Ok(v.iter()
        .zip(w)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest pairwise distance (0 for fewer than two points).
    pub fn diameter(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

pub fn distance_matrix(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            // dimensions agree by construction
            let dist = chebyshev_distance(cloud.point(i), cloud.point(j)).unwrap_or(f64::NAN);
            data[i * n + j] = dist;
            data[j * n + i] = dist;
        }
    }
    DistanceMatrix { n, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig2_series() -> TimeSeries {
        TimeSeries::new(vec![0.0, 1.0, 0.0, -1.0, 0.0])
    }

    #[test]
    fn embeds_periodic_samples_into_four_points() {
        let cloud = delay_embed(&fig2_series(), EmbeddingParams::new(2, 1).unwrap()).unwrap();
        let pts: Vec<&[f64]> = cloud.points().collect();
        assert_eq!(
            pts,
            vec![&[0.0, 1.0][..], &[1.0, 0.0], &[0.0, -1.0], &[-1.0, 0.0]]
        );
        assert_eq!(cloud.len(), 4);
    }

    #[test]
    fn constant_series() {
        let ts = TimeSeries::new(vec![5.0; 4]);
        let cloud = delay_embed(&ts, EmbeddingParams::new(2, 1).unwrap()).unwrap();
        assert_eq!(cloud.len(), 3);
        assert!(cloud.points().all(|p| p == [5.0, 5.0]));
        let dm = distance_matrix(&cloud);
        assert_eq!(dm.diameter(), 0.0);
    }

    #[test]
    fn dimension_one_is_identity() {
        let ts = fig2_series();
        let cloud = delay_embed(&ts, EmbeddingParams::new(1, 3).unwrap()).unwrap();
        let flat: Vec<f64> = cloud.points().map(|p| p[0]).collect();
        assert_eq!(flat, ts.values());
    }

    #[test]
    fn rejects_short_series_and_bad_params() {
        let ts = TimeSeries::new(vec![1.0, 2.0, 3.0]);
        let err = delay_embed(&ts, EmbeddingParams::new(2, 3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::EmptyEmbedding { len: 3, .. }));
        assert!(EmbeddingParams::new(0, 1).is_err());
        assert!(EmbeddingParams::new(2, 0).is_err());
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_distance(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(chebyshev_distance(&[0.0, 1.0], &[0.0, -1.0]).unwrap(), 2.0);
        assert_eq!(chebyshev_distance(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!(chebyshev_distance(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn fig2_distance_matrix() {
        let cloud = delay_embed(&fig2_series(), EmbeddingParams::new(2, 1).unwrap()).unwrap();
        let dm = distance_matrix(&cloud);
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i as i32 - j as i32).rem_euclid(4) {
                    0 => 0.0,
                    2 => 2.0,
                    _ => 1.0,
                };
                assert_eq!(dm.get(i, j), expected, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn single_point_matrix() {
        let ts = TimeSeries::new(vec![2.0]);
        let cloud = delay_embed(&ts, EmbeddingParams::new(1, 1).unwrap()).unwrap();
        let dm = distance_matrix(&cloud);
        assert_eq!(dm.len(), 1);
        assert_eq!(dm.get(0, 0), 0.0);
    }

    proptest! {
        #[test]
        fn point_count_and_coordinates(
            values in prop::collection::vec(-10.0f64..10.0, 1..40),
            dim in 1usize..5,
            delay in 1usize..5,
        ) {
            let ts = TimeSeries::new(values.clone());
            let params = EmbeddingParams::new(dim, delay).unwrap();
            match delay_embed(&ts, params) {
                Ok(cloud) => {
                    prop_assert_eq!(cloud.len(), values.len() - (dim - 1) * delay);
                    for i in 0..cloud.len() {
                        for t in 0..dim {
                            prop_assert_eq!(cloud.point(i)[t], ts.get(params.time_index(i, t)).unwrap());
                        }
                    }
                }
                Err(_) => prop_assert!(values.len() <= (dim - 1) * delay),
            }
        }

        #[test]
        fn metric_axioms(
            values in prop::collection::vec(-10.0f64..10.0, 3..20),
        ) {
            let cloud = delay_embed(&TimeSeries::new(values), EmbeddingParams::new(2, 1).unwrap()).unwrap();
            let dm = distance_matrix(&cloud);
            let n = dm.len();
            for i in 0..n {
                prop_assert_eq!(dm.get(i, i), 0.0);
                for j in 0..n {
                    prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                    for k in 0..n {
                        prop_assert!(dm.get(i, k) <= dm.get(i, j) + dm.get(j, k) + 1e-12);
                    }
                }
            }
        }

        #[test]
        fn shifting_series_shifts_cloud(
            values in prop::collection::vec(-10.0f64..10.0, 6..30),
            shift in 1usize..4,
        ) {
            let params = EmbeddingParams::new(2, 2).unwrap();
            let full = delay_embed(&TimeSeries::new(values.clone()), params).unwrap();
            let shifted = delay_embed(&TimeSeries::new(values[shift..].to_vec()), params).unwrap();
            for i in 0..shifted.len() {
                prop_assert_eq!(shifted.point(i), full.point(i + shift));
            }
        }
    }
}
