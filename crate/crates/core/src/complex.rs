//! Simplices as vertex bitmasks, Vietoris–Rips complexes, boundary matrices
//! and scale projectors.
//!
//! Bit `i` of a [`SimplexMask`] marks point `i` of the cloud. Simplices are
//! oriented by increasing vertex index and every basis is sorted by mask
//! value, which fixes all signs.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::embedding::EmbeddingParams;
use crate::error::{Error, Result};
use crate::oracles::QramModel;

/// Largest cloud a mask can address.
pub const MAX_VERTICES: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexMask(u64);

impl SimplexMask {
    /// `None` for the empty mask.
    pub fn from_bits(bits: u64) -> Option<Self> {
        (bits != 0).then_some(Self(bits))
    }

    pub fn vertex(i: usize) -> Self {
        assert!(i < MAX_VERTICES, "vertex {i} exceeds the mask width");
        Self(1 << i)
    }

    pub fn from_vertices(vertices: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &v in vertices {
            if v >= MAX_VERTICES {
                return Err(Error::TooManyVertices(v + 1));
            }
            bits |= 1 << v;
        }
        Self::from_bits(bits).ok_or(Error::InvalidParams("simplex needs a vertex".into()))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn vertex_count(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Number of vertices minus one.
    pub fn dim(self) -> usize {
        self.vertex_count() - 1
    }

    pub fn max_vertex(self) -> usize {
        63 - self.0.leading_zeros() as usize
    }

    pub fn contains_vertex(self, v: usize) -> bool {
        v < MAX_VERTICES && self.0 & (1 << v) != 0
    }

    /// Whether every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(self, other: SimplexMask) -> bool {
        self.0 & other.0 == self.0
    }

    /// Vertices in increasing order.
    pub fn vertices(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            (rest != 0).then(|| {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                v
            })
        })
    }

    /// Codimension-one faces `(l, face)` where `face` drops the `l`-th
    /// smallest vertex. A vertex has no faces.
    pub fn faces(self) -> impl Iterator<Item = (usize, SimplexMask)> {
        let bits = self.0;
        let has_faces = self.vertex_count() > 1;
        self.vertices()
            .enumerate()
            .filter(move |_| has_faces)
            .map(move |(l, v)| (l, SimplexMask(bits & !(1 << v))))
    }
}

impl fmt::Debug for SimplexMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.vertices()).finish()
    }
}

/// All `k`-simplices on `n` vertices in ascending mask order.
pub fn enumerate_simplices(n: usize, k: usize) -> Result<Vec<SimplexMask>> {
    if n > MAX_VERTICES {
        return Err(Error::TooManyVertices(n));
    }
    if k >= n {
        return Err(Error::DimensionTooLarge { k, n });
    }
    let size = k + 1;
    let limit: u128 = 1 << n;
    let mut out = Vec::new();
    // Gosper's hack over u128 so that n = 64 does not overflow.
    let mut x: u128 = (1 << size) - 1;
    while x < limit {
        out.push(SimplexMask(x as u64));
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    Ok(out)
}

/// The Vietoris–Rips complex at one scale, truncated at `kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct VRComplex {
    scale: f64,
    simplices: Vec<Vec<SimplexMask>>,
}

impl VRComplex {
    /// Assembles a complex from per-dimension lists, sorting each list.
    pub fn from_simplices(scale: f64, mut simplices: Vec<Vec<SimplexMask>>) -> Self {
        for list in &mut simplices {
            list.sort_unstable();
            list.dedup();
        }
        Self { scale, simplices }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kmax(&self) -> usize {
        self.simplices.len() - 1
    }

    /// Sorted `k`-simplices; empty above `kmax`.
    pub fn simplices(&self, k: usize) -> &[SimplexMask] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn index_of(&self, simplex: SimplexMask) -> Option<usize> {
        self.simplices(simplex.dim()).binary_search(&simplex).ok()
    }

    pub fn contains(&self, simplex: SimplexMask) -> bool {
        self.index_of(simplex).is_some()
    }

    /// Errors unless dimensions up to `k` are tracked.
    pub fn require_dim(&self, k: usize) -> Result<()> {
        if k > self.kmax() {
            return Err(Error::UntrackedDimension {
                scale: self.scale,
                tracked: self.kmax(),
                needed: k,
            });
        }
        Ok(())
    }

    pub fn is_subcomplex_of(&self, other: &VRComplex) -> bool {
        (0..=self.kmax()).all(|k| self.simplices(k).iter().all(|s| other.contains(*s)))
    }

    /// Every face of every tracked simplex is present.
    pub fn is_face_closed(&self) -> bool {
        (1..=self.kmax()).all(|k| {
            self.simplices(k)
                .iter()
                .all(|s| s.faces().all(|(_, f)| self.contains(f)))
        })
    }

    /// Whether both complexes hold the same simplices.
    pub fn same_simplices(&self, other: &VRComplex) -> bool {
        self.simplices == other.simplices
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump {
            epsilon: f64,
            simplices: BTreeMap<usize, Vec<Vec<usize>>>,
        }
        let simplices = self
            .simplices
            .iter()
            .enumerate()
            .map(|(k, list)| (k, list.iter().map(|s| s.vertices().collect()).collect()))
            .collect();
        serde_json::to_value(Dump {
            epsilon: self.scale,
            simplices,
        })
        .expect("complex dump is plain data")
    }
}

/// Builds the complex at `eps` through the membership oracle.
///
/// Vertices and edges are queried directly. A candidate `k`-simplex for
/// `k >= 2` is formed only when all of its edges are present (extending a
/// `(k-1)`-simplex by a larger common neighbour) and is then confirmed by its
/// own membership query, so the oracle accounting reflects one query per
/// simplex in the result plus one per candidate edge.
pub fn build_vr(
    q: &mut QramModel<'_>,
    params: EmbeddingParams,
    eps: f64,
    kmax: usize,
) -> Result<VRComplex> {
    let series_len = q.series().len();
    let n = params.point_count(series_len).ok_or(Error::EmptyEmbedding {
        len: series_len,
        dim: params.dim(),
        delay: params.delay(),
    })?;
    if n > MAX_VERTICES {
        return Err(Error::TooManyVertices(n));
    }

    let mut levels: Vec<Vec<SimplexMask>> = Vec::with_capacity(kmax + 1);
    let mut vertices = Vec::with_capacity(n);
    for v in 0..n {
        let s = SimplexMask::vertex(v);
        if q.membership(s, eps, params)? {
            vertices.push(s);
        }
    }
    levels.push(vertices);

    let mut neighbours = vec![0u64; n];
    if kmax >= 1 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let e = SimplexMask((1 << i) | (1 << j));
                if q.membership(e, eps, params)? {
                    neighbours[i] |= 1 << j;
                    neighbours[j] |= 1 << i;
                    edges.push(e);
                }
            }
        }
        levels.push(edges);
    }

    for _ in 2..=kmax {
        let prev = levels.last().expect("at least the vertex level");
        let mut next = Vec::new();
        for &s in prev {
            let common = s
                .vertices()
                .fold(u64::MAX, |acc, v| acc & neighbours[v]);
            let above = if s.max_vertex() >= 63 {
                0
            } else {
                !((1u64 << (s.max_vertex() + 1)) - 1)
            };
            let mut ext = common & above;
            while ext != 0 {
                let v = ext.trailing_zeros();
                ext &= ext - 1;
                let candidate = SimplexMask(s.0 | (1 << v));
                if q.membership(candidate, eps, params)? {
                    next.push(candidate);
                }
            }
        }
        levels.push(next);
    }

    Ok(VRComplex::from_simplices(eps, levels))
}

/// Sparse signed incidence between two simplex bases.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    domain: Vec<SimplexMask>,
    codomain: Vec<SimplexMask>,
    columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn nrows(&self) -> usize {
        self.codomain.len()
    }

    pub fn ncols(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[SimplexMask] {
        &self.domain
    }

    pub fn codomain(&self) -> &[SimplexMask] {
        &self.codomain
    }

    /// Nonzero `(row, sign)` entries of column `j`, rows ascending.
    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[(usize, i8)]> {
        self.columns.iter().map(Vec::as_slice)
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.columns[j]
            .iter()
            .find(|(r, _)| *r == i)
            .map_or(0, |(_, s)| *s)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                m[(i, j)] = f64::from(s);
            }
        }
        m
    }

    /// `self * selfᵀ`, computed sparsely.
    pub fn gram_rows(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.nrows(), self.nrows());
        for col in &self.columns {
            for &(a, sa) in col {
                for &(b, sb) in col {
                    g[(a, b)] += f64::from(sa * sb);
                }
            }
        }
        g
    }

    /// Keeps the rows whose codomain simplex satisfies `keep`.
    pub fn select_rows<F: Fn(SimplexMask) -> bool>(&self, keep: F) -> BoundaryMatrix {
        let mut remap = vec![usize::MAX; self.codomain.len()];
        let mut codomain = Vec::new();
        for (i, &s) in self.codomain.iter().enumerate() {
            if keep(s) {
                remap[i] = codomain.len();
                codomain.push(s);
            }
        }
        let columns = self
            .columns
            .iter()
            .map(|col| {
                col.iter()
                    .filter(|(i, _)| remap[*i] != usize::MAX)
                    .map(|&(i, s)| (remap[i], s))
                    .collect()
            })
            .collect();
        BoundaryMatrix {
            domain: self.domain.clone(),
            codomain,
            columns,
        }
    }
}

fn check_dims(list: &[SimplexMask], k: usize) -> Result<()> {
    match list.iter().find(|s| s.dim() != k) {
        Some(s) => Err(Error::DimensionMismatch {
            left: s.dim(),
            right: k,
        }),
        None => Ok(()),
    }
}

fn assemble(
    domain: &[SimplexMask],
    codomain: &[SimplexMask],
    strict: bool,
) -> Result<BoundaryMatrix> {
    if let Some(first) = domain.first() {
        let k = first.dim();
        check_dims(domain, k)?;
        if k > 0 {
            check_dims(codomain, k - 1)?;
        }
    }
    let mut columns = Vec::with_capacity(domain.len());
    for &s in domain {
        let mut col = Vec::with_capacity(s.vertex_count());
        for (l, face) in s.faces() {
            match codomain.binary_search(&face) {
                Ok(row) => col.push((row, if l % 2 == 0 { 1 } else { -1 })),
                Err(_) if strict => {
                    return Err(Error::MissingFace {
                        simplex: s.vertices().collect(),
                        face: face.vertices().collect(),
                    })
                }
                Err(_) => {}
            }
        }
        col.sort_unstable_by_key(|e| e.0);
        columns.push(col);
    }
    Ok(BoundaryMatrix {
        domain: domain.to_vec(),
        codomain: codomain.to_vec(),
        columns,
    })
}

/// Boundary map from `k`-simplices to `(k-1)`-simplices. Both lists must be
/// sorted; every face of the domain must appear in the codomain. On vertices
/// the map is zero.
pub fn boundary_matrix(
    domain: &[SimplexMask],
    codomain: &[SimplexMask],
) -> Result<BoundaryMatrix> {
    assemble(domain, codomain, true)
}

/// Boundary map followed by projection onto `codomain`: faces outside the
/// codomain are dropped instead of rejected.
pub fn projected_boundary(
    domain: &[SimplexMask],
    codomain: &[SimplexMask],
) -> Result<BoundaryMatrix> {
    assemble(domain, codomain, false)
}

/// Diagonal 0/1 selection of the simplices of a complex within a larger basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projector {
    diagonal: Vec<bool>,
}

impl Projector {
    pub fn diagonal(&self) -> &[bool] {
        &self.diagonal
    }

    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|&&b| b).count()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.diagonal)
            .map(|(x, &keep)| if keep { *x } else { 0.0 })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.diagonal.len(),
            self.diagonal.iter().map(|&b| if b { 1.0 } else { 0.0 }),
        ))
    }
}

pub fn projector(c: &VRComplex, k: usize, full_basis: &[SimplexMask]) -> Result<Projector> {
    c.require_dim(k)?;
    check_dims(full_basis, k)?;
    Ok(Projector {
        diagonal: full_basis.iter().map(|s| c.contains(*s)).collect(),
    })
}
