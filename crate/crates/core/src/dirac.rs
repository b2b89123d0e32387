//! Persistent Dirac operators and their eigenvalue readout.
//!
//! For a pair of scales `eps <= eps'` and a homology dimension `k`, the
//! operator is the symmetric block matrix
//!
//! ```text
//!     | -xi I     d_k        0        |
//! B = | d_kᵀ      xi I       d_{k+1}  |
//!     | 0         d_{k+1}ᵀ   -xi I    |
//! ```
//!
//! acting on `(k-1)`-chains of `S^eps`, `k`-chains of `S^eps` and
//! `(k+1)`-chains of `S^eps'`. Writing `B = xi S + D` with `S` the block sign
//! pattern, `S` and `D` anticommute, so `B² = xi² + D²`. Every eigenvector of
//! `B` for the eigenvalue `xi` lives in the middle block and spans the kernel
//! of `L = d_kᵀ d_k + d_{k+1} d_{k+1}ᵀ`; the multiplicity of `xi` is therefore
//! the persistent Betti number whenever `d_{k+1}` has the right image.
//!
//! The upper block comes in two flavours, see [`ConstructionMode`].

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::complex::{boundary_matrix, BoundaryMatrix, SimplexMask, VRComplex};
use crate::error::{Error, Result};

/// Absolute tolerance for counting eigenvalues equal to `xi`.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Phase differences below this (modulo the register size) count as exact.
pub const PHASE_MATCH_TOLERANCE: f64 = 1e-9;

/// Readouts further than this from an integer are flagged.
pub const READOUT_RESIDUE_LIMIT: f64 = 0.25;

/// Operators larger than this are diagonalised through the middle block.
pub const DENSE_SPECTRUM_LIMIT: usize = 320;

/// How the `(k+1)`-block couples the two scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionMode {
    /// `P^eps d_{k+1} P^eps'` over all `(k+1)`-simplices of `S^eps'`. Faces
    /// outside `S^eps` are simply dropped, so the image is not made of cycles
    /// of `S^eps` and the multiplicity of `xi` can undercount once
    /// `eps < eps'`.
    AsWritten,
    /// The same projected boundary restricted to `(k+1)`-chains of `S^eps'`
    /// whose full boundary already lies in `S^eps` (an orthonormal basis of
    /// that subspace is used). Its image is exactly `Z_k(eps) ∩ B_k(eps')`.
    #[default]
    Restricted,
}

impl fmt::Display for ConstructionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstructionMode::AsWritten => "as-written",
            ConstructionMode::Restricted => "restricted",
        })
    }
}

impl std::str::FromStr for ConstructionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "as-written" => Ok(Self::AsWritten),
            "restricted" => Ok(Self::Restricted),
            other => Err(format!("unknown construction mode {other:?}")),
        }
    }
}

/// Boundary blocks of a persistent Dirac operator with their bases.
#[derive(Debug, Clone)]
pub struct PersistentBoundary {
    k: usize,
    eps: f64,
    eps_prime: f64,
    /// `d_k` restricted to `S^eps`: middle -> lower.
    down: BoundaryMatrix,
    /// `P^eps d_{k+1}` on the `(k+1)`-simplices of `S^eps'`: upper -> middle.
    up: BoundaryMatrix,
    /// Rows of `d_{k+1}` for `k`-simplices of `S^eps'` missing from `S^eps`.
    leak: BoundaryMatrix,
}

impl PersistentBoundary {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn scales(&self) -> (f64, f64) {
        (self.eps, self.eps_prime)
    }

    pub fn down(&self) -> &BoundaryMatrix {
        &self.down
    }

    pub fn up(&self) -> &BoundaryMatrix {
        &self.up
    }

    pub fn lower_basis(&self) -> &[SimplexMask] {
        self.down.codomain()
    }

    pub fn middle_basis(&self) -> &[SimplexMask] {
        self.down.domain()
    }

    pub fn upper_basis(&self) -> &[SimplexMask] {
        self.up.domain()
    }
}

pub fn persistent_boundary(
    c_eps: &VRComplex,
    c_eps_prime: &VRComplex,
    k: usize,
) -> Result<PersistentBoundary> {
    if c_eps.scale() > c_eps_prime.scale() {
        return Err(Error::ScaleOrder {
            eps: c_eps.scale(),
            eps_prime: c_eps_prime.scale(),
        });
    }
    c_eps.require_dim(k)?;
    c_eps_prime.require_dim(k + 1)?;

    let lower: &[SimplexMask] = if k == 0 { &[] } else { c_eps.simplices(k - 1) };
    let down = boundary_matrix(c_eps.simplices(k), lower)?;
    let full = boundary_matrix(c_eps_prime.simplices(k + 1), c_eps_prime.simplices(k))?;
    let up = full.select_rows(|s| c_eps.contains(s));
    let leak = full.select_rows(|s| !c_eps.contains(s));
    Ok(PersistentBoundary {
        k,
        eps: c_eps.scale(),
        eps_prime: c_eps_prime.scale(),
        down,
        up,
        leak,
    })
}

fn rank_threshold(max_eigenvalue: f64) -> f64 {
    1e-9 * max_eigenvalue.max(1.0)
}

fn sym_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.symmetric_eigenvalues().iter().copied().collect()
}

#[derive(Debug, Clone)]
enum UpperBlock {
    Projected,
    Restricted {
        /// `dim` of the admissible `(k+1)`-chains.
        width: usize,
        /// `C Cᵀ`, the Schur complement of the leaking rows.
        gram: DMatrix<f64>,
    },
}

/// The assembled operator. Blocks are kept separately; [`matrix`](Self::matrix)
/// materialises the full square matrix on demand.
#[derive(Debug, Clone)]
pub struct DiracOperator {
    xi: i64,
    mode: ConstructionMode,
    pb: PersistentBoundary,
    upper: UpperBlock,
}

pub fn assemble_dirac(
    pb: &PersistentBoundary,
    xi: i64,
    mode: ConstructionMode,
) -> Result<DiracOperator> {
    if xi == 0 {
        return Err(Error::ZeroXi);
    }
    let upper = match mode {
        ConstructionMode::AsWritten => UpperBlock::Projected,
        ConstructionMode::Restricted => {
            // Gram of the rows of d_{k+1}, ordered [inside S^eps | leaking].
            let x = &pb.up;
            let y = &pb.leak;
            let b = x.nrows();
            let r = y.nrows();
            let mut joint = DMatrix::<f64>::zeros(b + r, b + r);
            for (cx, cy) in x.columns().zip(y.columns()) {
                let entries: Vec<(usize, f64)> = cx
                    .iter()
                    .map(|&(i, s)| (i, f64::from(s)))
                    .chain(cy.iter().map(|&(i, s)| (b + i, f64::from(s))))
                    .collect();
                for &(i, si) in &entries {
                    for &(j, sj) in &entries {
                        joint[(i, j)] += si * sj;
                    }
                }
            }
            let xx = joint.view((0, 0), (b, b)).into_owned();
            if r == 0 {
                UpperBlock::Restricted {
                    width: x.ncols(),
                    gram: xx,
                }
            } else {
                let xy = joint.view((0, b), (b, r)).into_owned();
                let yy = joint.view((b, b), (r, r)).into_owned();
                let eig = SymmetricEigen::new(yy);
                let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
                let thresh = rank_threshold(top);
                let mut pinv = DMatrix::<f64>::zeros(r, r);
                let mut rank = 0;
                for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
                    if lambda > thresh {
                        rank += 1;
                        let v = eig.eigenvectors.column(idx);
                        pinv += (v * v.transpose()) / lambda;
                    }
                }
                let mut gram = &xx - &xy * pinv * xy.transpose();
                gram = (&gram + gram.transpose()) * 0.5;
                UpperBlock::Restricted {
                    width: x.ncols() - rank,
                    gram,
                }
            }
        }
    };
    Ok(DiracOperator {
        xi,
        mode,
        pb: pb.clone(),
        upper,
    })
}

/// Orthonormal basis (as columns) of the null space of `m`.
fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    let eig = SymmetricEigen::new(m.transpose() * m);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let thresh = rank_threshold(top);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= thresh).collect();
    DMatrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])])
}

impl DiracOperator {
    pub fn xi(&self) -> i64 {
        self.xi
    }

    pub fn mode(&self) -> ConstructionMode {
        self.mode
    }

    pub fn boundary(&self) -> &PersistentBoundary {
        &self.pb
    }

    /// Sizes of the `(k-1)`, `k` and `(k+1)` blocks.
    pub fn block_dims(&self) -> [usize; 3] {
        let upper = match &self.upper {
            UpperBlock::Projected => self.pb.up.ncols(),
            UpperBlock::Restricted { width, .. } => *width,
        };
        [self.pb.down.nrows(), self.pb.down.ncols(), upper]
    }

    /// Side length `N` of the square operator.
    pub fn size(&self) -> usize {
        self.block_dims().iter().sum()
    }

    /// Dense upper coupling block, middle rows by upper columns.
    pub fn upper_block(&self) -> DMatrix<f64> {
        let x = self.pb.up.to_dense();
        match self.mode {
            ConstructionMode::AsWritten => x,
            ConstructionMode::Restricted => x * null_space(&self.pb.leak.to_dense()),
        }
    }

    /// The full symmetric matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let [a, b, c] = self.block_dims();
        let xi = self.xi as f64;
        let mut m = DMatrix::zeros(a + b + c, a + b + c);
        for i in 0..a {
            m[(i, i)] = -xi;
        }
        for i in a..a + b {
            m[(i, i)] = xi;
        }
        for i in a + b..a + b + c {
            m[(i, i)] = -xi;
        }
        for (j, col) in self.pb.down.columns().enumerate() {
            for &(i, s) in col {
                m[(i, a + j)] = f64::from(s);
                m[(a + j, i)] = f64::from(s);
            }
        }
        let up = self.upper_block();
        for i in 0..b {
            for j in 0..c {
                m[(a + i, a + b + j)] = up[(i, j)];
                m[(a + b + j, a + i)] = up[(i, j)];
            }
        }
        m
    }

    /// `d_kᵀ d_k + C Cᵀ` on the middle block.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let down = self.pb.down.to_dense();
        let upper_gram = match &self.upper {
            UpperBlock::Projected => self.pb.up.gram_rows(),
            UpperBlock::Restricted { gram, .. } => gram.clone(),
        };
        down.transpose() * down + upper_gram
    }

    /// Sorted spectrum, choosing the cheaper of the two routes.
    pub fn spectrum(&self) -> Spectrum {
        if self.size() <= DENSE_SPECTRUM_LIMIT {
            self.spectrum_dense()
        } else {
            self.spectrum_blocks()
        }
    }

    /// Eigenvalues of the materialised matrix.
    pub fn spectrum_dense(&self) -> Spectrum {
        Spectrum::new(sym_eigenvalues(self.matrix()))
    }

    /// Eigenvalues from the middle-block Laplacian alone: each eigenvalue
    /// `mu > 0` of `L` contributes `±sqrt(xi² + mu)`, the kernel of `L`
    /// contributes `xi`, and the remaining outer dimensions contribute `-xi`.
    pub fn spectrum_blocks(&self) -> Spectrum {
        let [a, b, c] = self.block_dims();
        let xi = self.xi as f64;
        let mu = sym_eigenvalues(self.laplacian());
        let top = mu.iter().copied().fold(0.0, f64::max);
        let thresh = rank_threshold(top);
        let mut values = Vec::with_capacity(a + b + c);
        let mut rank = 0;
        for &m in &mu {
            if m > thresh {
                rank += 1;
                let r = (xi * xi + m).sqrt();
                values.push(r);
                values.push(-r);
            } else {
                values.push(xi);
            }
        }
        values.extend(std::iter::repeat(-xi).take((a + c).saturating_sub(rank)));
        Spectrum::new(values)
    }
}

/// Eigenvalues in ascending order, with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Distance from `xi` to the closest eigenvalue further than `tol` away.
    pub fn gap(&self, xi: i64, tol: f64) -> Option<f64> {
        let xi = xi as f64;
        self.values
            .iter()
            .map(|v| (v - xi).abs())
            .filter(|&d| d > tol)
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// An eigenvalue sits just outside the multiplicity window.
    AmbiguousGap { distance: f64 },
    /// The phase-estimation readout is far from an integer.
    CoarseReadout { estimate: f64, residue: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::AmbiguousGap { distance } => {
                write!(f, "eigenvalue within {distance:e} of xi is outside the tolerance")
            }
            Warning::CoarseReadout { estimate, residue } => {
                write!(f, "readout {estimate:.4} is {residue:.4} away from an integer")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityReadout {
    pub betti: usize,
    pub warning: Option<Warning>,
}

/// Counts eigenvalues within `tol` of `xi`.
pub fn betti_by_multiplicity(s: &Spectrum, xi: i64, tol: f64) -> Result<MultiplicityReadout> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let x = xi as f64;
    let betti = s.values.iter().filter(|v| (*v - x).abs() <= tol).count();
    let warning = s
        .gap(xi, tol)
        .filter(|&d| d <= 10.0 * tol)
        .map(|distance| Warning::AmbiguousGap { distance });
    Ok(MultiplicityReadout { betti, warning })
}

/// How eigenphases are laid out in the phase register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseRegister {
    /// `M > 2 l max|lambda|`: negative and positive phases occupy disjoint
    /// halves of the register, so no eigenvalue aliases onto `l xi`.
    #[default]
    Signed,
    /// `M > l max|lambda|`: the smallest register holding the magnitudes.
    /// Negative phases wrap around and may alias onto `l xi`.
    Wrapped,
}

impl fmt::Display for PhaseRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseRegister::Signed => "signed",
            PhaseRegister::Wrapped => "wrapped",
        })
    }
}

impl std::str::FromStr for PhaseRegister {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "signed" => Ok(Self::Signed),
            "wrapped" => Ok(Self::Wrapped),
            other => Err(format!("unknown phase register {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QpeParams {
    /// Evolution-time multiplier.
    pub l: u64,
    /// Register size, a power of two.
    pub m: u64,
}

/// `l = ceil(1/g)` for the gap `g` around `xi` (1 without a gap), and `M` the
/// smallest power of two above `l max|lambda|` (doubled for a signed register).
pub fn choose_qpe_params(s: &Spectrum, xi: i64, tol: f64, register: PhaseRegister) -> QpeParams {
    let l = s
        .gap(xi, tol)
        .map_or(1.0, |g| (1.0 / g).ceil())
        .max(1.0);
    let span = match register {
        PhaseRegister::Signed => 2.0 * l * s.max_abs(),
        PhaseRegister::Wrapped => l * s.max_abs(),
    };
    let mut m: u64 = 1;
    while (m as f64) <= span {
        m <<= 1;
    }
    QpeParams { l: l as u64, m }
}

/// Probability of reading `p` from the phase register, averaged over the
/// eigenvectors of the operator:
/// `(1/N) Σ_s sin²(π l λ_s) / (M² sin²(π (l λ_s - p) / M))`,
/// with exact phase matches (modulo `M`) contributing 1.
pub fn qpe_distribution(s: &Spectrum, params: QpeParams, p: u64) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let l = params.l as f64;
    let m = params.m as f64;
    let total: f64 = s
        .values
        .iter()
        .map(|&lambda| {
            let phase = l * lambda;
            let diff = phase - p as f64;
            let wrapped = diff.rem_euclid(m);
            if wrapped < PHASE_MATCH_TOLERANCE || m - wrapped < PHASE_MATCH_TOLERANCE {
                1.0
            } else {
                let num = (std::f64::consts::PI * phase).sin().powi(2);
                let den = (std::f64::consts::PI * diff / m).sin().powi(2);
                num / (m * m * den)
            }
        })
        .sum();
    total / s.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpeReadout {
    pub betti: usize,
    /// `N * P(l xi)` before rounding.
    pub estimate: f64,
    pub residue: f64,
    pub params: QpeParams,
    pub warning: Option<Warning>,
}

/// Reads the Betti number as `N * P(l xi mod M)`, rounded.
pub fn betti_by_qpe(s: &Spectrum, xi: i64, tol: f64, register: PhaseRegister) -> QpeReadout {
    let params = choose_qpe_params(s, xi, tol, register);
    if s.is_empty() {
        return QpeReadout {
            betti: 0,
            estimate: 0.0,
            residue: 0.0,
            params,
            warning: None,
        };
    }
    let p = (params.l as i128 * xi as i128).rem_euclid(params.m as i128) as u64;
    let estimate = s.len() as f64 * qpe_distribution(s, params, p);
    let rounded = estimate.round().max(0.0);
    let residue = (estimate - rounded).abs();
    let warning = (residue > READOUT_RESIDUE_LIMIT)
        .then_some(Warning::CoarseReadout { estimate, residue });
    QpeReadout {
        betti: rounded as usize,
        estimate,
        residue,
        params,
        warning,
    }
}
