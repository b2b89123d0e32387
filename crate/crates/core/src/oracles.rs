//! Classical stand-ins for the quantum data access layer.
//!
//! [`QramModel`] answers `t -> x_t` lookups, the pairwise comparator decides
//! `|x_t1 - x_t2| <= eps`, and the membership oracle chains comparator calls
//! over every vertex pair and delay coordinate of a simplex. Nothing is
//! simulated at amplitude level; the model only keeps the function table and
//! counts how often each layer is invoked, so that resource estimates can be
//! read off a run.
//!
//! Counters live inside each model. Parallel callers [`fork`](QramModel::fork)
//! a private model per task and [`absorb`](QramModel::absorb) the results
//! afterwards, so no counter is ever shared mutably.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::SimplexMask;
use crate::embedding::EmbeddingParams;
use crate::error::{Error, Result};
use crate::ingest::TimeSeries;

/// Default comparator accuracy used for the modeled cost estimates.
pub const DEFAULT_ACCURACY: f64 = 0.01;

/// Worst-case comparator calls for one membership query on a `k`-simplex:
/// `d` coordinates for each of the `k(k+1)/2` vertex pairs.
pub fn membership_call_bound(dim: usize, k: usize) -> u64 {
    (dim * k * (k + 1) / 2) as u64
}

/// Optional perturbation of the comparator, for robustness experiments.
///
/// Each unordered pair of time indices gets one fixed offset drawn uniformly
/// from `[-amplitude, amplitude]`, so the perturbed comparator is still
/// monotone in the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparatorNoise {
    pub amplitude: f64,
    pub seed: u64,
}

impl ComparatorNoise {
    fn offset(&self, t1: usize, t2: usize) -> f64 {
        let (a, b) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((a as u64) << 32) | b as u64);
        rng.random_range(-self.amplitude..=self.amplitude)
    }
}

/// Per-dimension audit of membership queries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MembershipAudit {
    pub queries: u64,
    pub comparator_calls: u64,
    /// Sum of the per-query worst-case bounds.
    pub worst_case_calls: u64,
    pub max_calls_per_query: u64,
    pub bound: u64,
    /// Queries that exceeded `bound`; must stay zero.
    pub violations: u64,
}

impl MembershipAudit {
    fn merge(&mut self, other: &MembershipAudit) {
        self.queries += other.queries;
        self.comparator_calls += other.comparator_calls;
        self.worst_case_calls += other.worst_case_calls;
        self.max_calls_per_query = self.max_calls_per_query.max(other.max_calls_per_query);
        self.bound = self.bound.max(other.bound);
        self.violations += other.violations;
    }
}

/// Call counters, monotone over the lifetime of a model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OracleStats {
    pub qram_reads: u64,
    pub comparator_calls: u64,
    pub membership_calls: u64,
    /// Keyed by simplex dimension.
    pub membership: BTreeMap<usize, MembershipAudit>,
}

impl OracleStats {
    pub fn merge(&mut self, other: &OracleStats) {
        self.qram_reads += other.qram_reads;
        self.comparator_calls += other.comparator_calls;
        self.membership_calls += other.membership_calls;
        for (k, audit) in &other.membership {
            self.membership.entry(*k).or_default().merge(audit);
        }
    }

    pub fn bound_violations(&self) -> u64 {
        self.membership.values().map(|a| a.violations).sum()
    }
}

/// Counters plus the modeled cost of running the comparators at accuracy δ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    #[serde(flatten)]
    pub stats: OracleStats,
    pub accuracy: f64,
    pub series_len: usize,
    /// `comparator_calls * ceil(1/δ)` QRAM calls.
    pub estimated_qram_calls: u64,
    /// `comparator_calls * ceil(1/δ) * ceil(log2 T)^2` elementary operations.
    pub estimated_gate_cost: u64,
}

/// Exact lookup table over a series with call accounting.
#[derive(Debug, Clone)]
pub struct QramModel<'a> {
    series: &'a TimeSeries,
    noise: Option<ComparatorNoise>,
    accuracy: f64,
    stats: OracleStats,
}

impl<'a> QramModel<'a> {
    pub fn new(series: &'a TimeSeries) -> Self {
        Self {
            series,
            noise: None,
            accuracy: DEFAULT_ACCURACY,
            stats: OracleStats::default(),
        }
    }

    pub fn with_noise(mut self, noise: ComparatorNoise) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_accuracy(mut self, accuracy: f64) -> Result<Self> {
        if !(accuracy > 0.0 && accuracy.is_finite()) {
            return Err(Error::InvalidTolerance(accuracy));
        }
        self.accuracy = accuracy;
        Ok(self)
    }

    pub fn series(&self) -> &'a TimeSeries {
        self.series
    }

    pub fn stats(&self) -> &OracleStats {
        &self.stats
    }

    /// Fresh model over the same data with zeroed counters.
    pub fn fork(&self) -> Self {
        Self {
            series: self.series,
            noise: self.noise,
            accuracy: self.accuracy,
            stats: OracleStats::default(),
        }
    }

    /// Adds the counters of a forked model.
    pub fn absorb(&mut self, other: &OracleStats) {
        self.stats.merge(other);
    }

    /// `x_t` for a 1-based index.
    pub fn read(&mut self, t: usize) -> Result<f64> {
        let value = self.series.get(t).ok_or(Error::IndexOutOfRange {
            index: t,
            len: self.series.len(),
        })?;
        self.stats.qram_reads += 1;
        Ok(value)
    }

    /// Returns `true` iff `|x_t1 - x_t2| <= eps`.
    pub fn comparator(&mut self, t1: usize, t2: usize, eps: f64) -> Result<bool> {
        let a = self.read(t1)?;
        let b = self.read(t2)?;
        self.stats.comparator_calls += 1;
        let mut diff = (a - b).abs();
        if let Some(noise) = self.noise.filter(|_| t1 != t2) {
            diff = (diff + noise.offset(t1, t2)).max(0.0);
        }
        Ok(diff <= eps)
    }

    /// Decides whether `simplex` belongs to the Vietoris–Rips complex at
    /// `eps` of the cloud embedded with `params`. Stops at the first failed
    /// comparison.
    pub fn membership(
        &mut self,
        simplex: SimplexMask,
        eps: f64,
        params: EmbeddingParams,
    ) -> Result<bool> {
        let points = params
            .point_count(self.series.len())
            .ok_or(Error::EmptyEmbedding {
                len: self.series.len(),
                dim: params.dim(),
                delay: params.delay(),
            })?;
        let vertices: Vec<usize> = simplex.vertices().collect();
        if let Some(&bad) = vertices.iter().find(|&&v| v >= points) {
            return Err(Error::InvalidVertex { vertex: bad, points });
        }

        let before = self.stats.comparator_calls;
        let mut inside = true;
        'pairs: for (a, &i) in vertices.iter().enumerate() {
            for &j in &vertices[a + 1..] {
                for coord in 0..params.dim() {
                    let t1 = params.time_index(i, coord);
                    let t2 = params.time_index(j, coord);
                    if !self.comparator(t1, t2, eps)? {
                        inside = false;
                        break 'pairs;
                    }
                }
            }
        }

        let k = simplex.dim();
        let calls = self.stats.comparator_calls - before;
        let bound = membership_call_bound(params.dim(), k);
        self.stats.membership_calls += 1;
        let audit = self.stats.membership.entry(k).or_default();
        audit.queries += 1;
        audit.comparator_calls += calls;
        audit.worst_case_calls += bound;
        audit.max_calls_per_query = audit.max_calls_per_query.max(calls);
        audit.bound = bound;
        if calls > bound {
            audit.violations += 1;
        }
        Ok(inside)
    }

    pub fn call_report(&self) -> ResourceReport {
        let per_call = (1.0 / self.accuracy).ceil() as u64;
        let log_t = (self.series.len().max(2) as f64).log2().ceil() as u64;
        let qram = self.stats.comparator_calls.saturating_mul(per_call);
        ResourceReport {
            stats: self.stats.clone(),
            accuracy: self.accuracy,
            series_len: self.series.len(),
            estimated_qram_calls: qram,
            estimated_gate_cost: qram.saturating_mul(log_t * log_t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig2() -> TimeSeries {
        TimeSeries::new(vec![0.0, 1.0, 0.0, -1.0, 0.0])
    }

    fn params() -> EmbeddingParams {
        EmbeddingParams::new(2, 1).unwrap()
    }

    #[test]
    fn qram_reads() {
        let ts = fig2();
        let mut q = QramModel::new(&ts);
        assert_eq!(q.read(2).unwrap(), 1.0);
        assert_eq!(q.read(5).unwrap(), 0.0);
        assert!(matches!(
            q.read(6),
            Err(Error::IndexOutOfRange { index: 6, len: 5 })
        ));
        assert_eq!(q.stats().qram_reads, 2);
    }

    #[test]
    fn comparator_examples() {
        let ts = fig2();
        let mut q = QramModel::new(&ts);
        assert!(q.comparator(1, 2, 1.0).unwrap());
        assert!(!q.comparator(1, 2, 0.5).unwrap());
        assert!(q.comparator(3, 3, 0.0).unwrap());
        assert_eq!(q.stats().comparator_calls, 3);
        assert_eq!(q.stats().qram_reads, 6);
        assert!(q.comparator(0, 1, 1.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let ts = fig2();
        let mut q = QramModel::new(&ts);
        let v01 = SimplexMask::from_vertices(&[0, 1]).unwrap();
        let v02 = SimplexMask::from_vertices(&[0, 2]).unwrap();
        assert!(q.membership(v01, 1.0, params()).unwrap());
        assert!(!q.membership(v02, 1.0, params()).unwrap());
        let single = SimplexMask::vertex(3);
        assert!(q.membership(single, 0.0, params()).unwrap());
        let bad = SimplexMask::from_vertices(&[1, 4]).unwrap();
        assert!(matches!(
            q.membership(bad, 1.0, params()),
            Err(Error::InvalidVertex { vertex: 4, points: 4 })
        ));
    }

    #[test]
    fn call_report_counts_and_bounds() {
        let ts = fig2();
        let q = QramModel::new(&ts);
        let fresh = q.call_report();
        assert_eq!(fresh.stats, OracleStats::default());
        assert_eq!(fresh.estimated_qram_calls, 0);

        let mut q = QramModel::new(&ts);
        q.membership(SimplexMask::from_vertices(&[0, 1]).unwrap(), 1.0, params())
            .unwrap();
        assert!(q.stats().comparator_calls <= 2);
        let mut q = QramModel::new(&ts);
        q.membership(SimplexMask::from_vertices(&[0, 1, 3]).unwrap(), 5.0, params())
            .unwrap();
        assert!(q.stats().comparator_calls <= 6);
        assert_eq!(q.stats().membership[&2].bound, 6);
        assert_eq!(q.stats().membership[&2].comparator_calls, 6);
    }

    #[test]
    fn accuracy_scales_estimate() {
        let ts = fig2();
        let mut q = QramModel::new(&ts).with_accuracy(1.0).unwrap();
        q.comparator(1, 2, 1.0).unwrap();
        let coarse = q.call_report().estimated_qram_calls;
        let fine = q.clone().with_accuracy(0.01).unwrap().call_report();
        assert_eq!(fine.estimated_qram_calls, 100 * coarse);
        assert!(QramModel::new(&ts).with_accuracy(0.0).is_err());
    }

    #[test]
    fn bound_formula() {
        assert_eq!(membership_call_bound(2, 0), 0);
        assert_eq!(membership_call_bound(2, 1), 2);
        assert_eq!(membership_call_bound(2, 2), 6);
        assert_eq!(membership_call_bound(3, 3), 18);
    }

    #[test]
    fn fork_and_absorb() {
        let ts = fig2();
        let mut q = QramModel::new(&ts);
        let mut child = q.fork();
        child.comparator(1, 2, 1.0).unwrap();
        q.absorb(child.stats());
        assert_eq!(q.stats().comparator_calls, 1);
        assert_eq!(q.stats().qram_reads, 2);
    }

    #[test]
    fn noise_is_deterministic_per_pair() {
        let noise = ComparatorNoise {
            amplitude: 0.3,
            seed: 9,
        };
        assert_eq!(noise.offset(1, 4), noise.offset(4, 1));
        assert!(noise.offset(1, 4).abs() <= 0.3);
        let ts = fig2();
        let mut q = QramModel::new(&ts).with_noise(noise);
        assert!(q.comparator(2, 2, 0.0).unwrap());
    }

    proptest! {
        #[test]
        fn monotone_and_face_closed(
            values in prop::collection::vec(0.0f64..1.0, 4..9),
            bits in 1u64..256,
            eps in 0.0f64..1.0,
            extra in 0.0f64..0.5,
        ) {
            let ts = TimeSeries::new(values);
            let params = params();
            let n = params.point_count(ts.len()).unwrap();
            let mask = SimplexMask::from_bits(bits & ((1u64 << n) - 1));
            prop_assume!(mask.is_some());
            let mask = mask.unwrap();
            let mut q = QramModel::new(&ts);
            let here = q.membership(mask, eps, params).unwrap();
            if here {
                prop_assert!(q.membership(mask, eps + extra, params).unwrap());
                for (_, face) in mask.faces() {
                    prop_assert!(q.membership(face, eps, params).unwrap());
                }
            }
            for audit in q.stats().membership.values() {
                prop_assert!(audit.max_calls_per_query <= audit.bound);
                prop_assert_eq!(audit.violations, 0);
            }
        }
    }
}
