//! Bipartite pure vectors, their coordinate matrices, Schmidt data, partial
//! traces and transposes, and the local-support subspaces built from them.
//!
//! Flattening convention: the basis vector `e_i ⊗ f_j` (0-based `i`, `j`)
//! sits at flat index `i * d2 + j`.

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartiteDims {
    d1: usize,
    d2: usize,
}

impl BipartiteDims {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d1 > d2 {
            return Err(Error::InvalidDims { d1, d2 });
        }
        Ok(BipartiteDims { d1, d2 })
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    /// Total dimension `d1 * d2`.
    pub fn total(&self) -> usize {
        self.d1 * self.d2
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.d2 + j
    }

    /// Dimension `(d1 - k)(d2 - k)` of the largest subspace free of
    /// Schmidt-rank-`<= k` vectors.
    pub fn max_entangled_dim(&self, k: usize) -> usize {
        self.d1.saturating_sub(k) * self.d2.saturating_sub(k)
    }

    /// Default numerical-rank tolerance `max(d1, d2) * eps`.
    pub fn default_rank_tol(&self) -> f64 {
        self.d2 as f64 * f64::EPSILON
    }

    pub(crate) fn check_square(&self, m: &CMatrix) -> Result<()> {
        let n = self.total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        Ok(())
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.d1 {
            return Err(Error::KOutOfRange { k, d1: self.d1 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureVector {
    dims: BipartiteDims,
    coords: CVector,
}

impl PureVector {
    pub fn new(dims: BipartiteDims, coords: CVector) -> Result<Self> {
        if coords.len() != dims.total() {
            return Err(Error::Shape {
                expected: format!("length d1*d2 = {}", dims.total()),
                got: format!("length {}", coords.len()),
            });
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(PureVector { dims, coords })
    }

    /// `e_i ⊗ f_j` with 0-based indices.
    pub fn basis(dims: BipartiteDims, i: usize, j: usize) -> Self {
        let mut coords = CVector::zeros(dims.total());
        coords[dims.index(i, j)] = cr(1.0);
        PureVector { dims, coords }
    }

    pub fn product(dims: BipartiteDims, x: &CVector, y: &CVector) -> Result<Self> {
        if x.len() != dims.d1() || y.len() != dims.d2() {
            return Err(Error::Shape {
                expected: format!("factors of length {} and {}", dims.d1(), dims.d2()),
                got: format!("{} and {}", x.len(), y.len()),
            });
        }
        PureVector::new(dims, linalg::kron_vec(x, y))
    }

    /// `(1/sqrt(d1)) Σ_i e_i ⊗ f_i`, the unit-norm maximally entangled vector.
    pub fn max_entangled(dims: BipartiteDims) -> Self {
        let mut coords = CVector::zeros(dims.total());
        let amp = 1.0 / (dims.d1() as f64).sqrt();
        for i in 0..dims.d1() {
            coords[dims.index(i, i)] = cr(amp);
        }
        PureVector { dims, coords }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn coords(&self) -> &CVector {
        &self.coords
    }

    pub fn into_coords(self) -> CVector {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(PureVector { dims: self.dims, coords: &self.coords / cr(n) })
    }

    pub fn inner(&self, other: &PureVector) -> linalg::C64 {
        self.coords.dotc(&other.coords)
    }

    /// Rank-one operator `|Ψ⟩⟨Ψ|`.
    pub fn projector(&self) -> CMatrix {
        &self.coords * self.coords.adjoint()
    }

    pub fn schmidt_rank(&self, tol: f64) -> Result<usize> {
        Ok(schmidt(self, tol)?.rank)
    }
}

/// The `d1 × d2` coordinate matrix of a bipartite vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordMatrix {
    dims: BipartiteDims,
    entries: CMatrix,
}

impl CoordMatrix {
    pub fn new(dims: BipartiteDims, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != dims.d1() || entries.ncols() != dims.d2() {
            return Err(Error::Shape {
                expected: format!("{}x{}", dims.d1(), dims.d2()),
                got: format!("{}x{}", entries.nrows(), entries.ncols()),
            });
        }
        Ok(CoordMatrix { dims, entries })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

pub fn coord_matrix(psi: &PureVector) -> CoordMatrix {
    let d = psi.dims;
    let entries = CMatrix::from_fn(d.d1(), d.d2(), |i, j| psi.coords[d.index(i, j)]);
    CoordMatrix { dims: d, entries }
}

pub fn vector_from_matrix(m: &CoordMatrix) -> PureVector {
    PureVector { dims: m.dims, coords: flatten(m.dims, &m.entries) }
}

/// Reshape a flat coordinate vector into its `d1 × d2` matrix without
/// wrapping it in the checked types.
pub(crate) fn reshape(dims: BipartiteDims, v: &CVector) -> CMatrix {
    CMatrix::from_fn(dims.d1(), dims.d2(), |i, j| v[dims.index(i, j)])
}

pub(crate) fn flatten(dims: BipartiteDims, m: &CMatrix) -> CVector {
    CVector::from_fn(dims.total(), |idx, _| m[(idx / dims.d2(), idx % dims.d2())])
}

#[derive(Debug, Clone)]
pub struct SchmidtData {
    /// Descending, one per retained term.
    pub coefficients: Vec<f64>,
    /// Columns are the `α_i` in `C^{d1}`.
    pub left_vectors: CMatrix,
    /// Columns are the `β_i` in `C^{d2}`.
    pub right_vectors: CMatrix,
    pub rank: usize,
}

impl SchmidtData {
    /// `Σ λ_i α_i ⊗ β_i`.
    pub fn reconstruct(&self, dims: BipartiteDims) -> PureVector {
        let mut m = CMatrix::zeros(dims.d1(), dims.d2());
        for (i, &l) in self.coefficients.iter().enumerate() {
            m += self.left_vectors.column(i) * self.right_vectors.column(i).transpose() * cr(l);
        }
        vector_from_matrix(&CoordMatrix { dims, entries: m })
    }
}

/// Schmidt decomposition from the SVD of the coordinate matrix. Terms with
/// `λ_i <= tol * λ_max` are dropped; the first non-negligible component of
/// every left vector is made real and non-negative.
pub fn schmidt(psi: &PureVector, tol: f64) -> Result<SchmidtData> {
    if psi.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dims = psi.dims;
    let m = reshape(dims, &psi.coords);
    let dec = linalg::svd(&m);
    let top = dec.s[0];
    let rank = dec.s.iter().filter(|&&s| s > tol * top).count();
    let mut left = CMatrix::zeros(dims.d1(), rank);
    let mut right = CMatrix::zeros(dims.d2(), rank);
    for i in 0..rank {
        let mut a = dec.u.column(i).into_owned();
        let mut b = dec.v.column(i).map(|z| z.conj());
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(z) = a.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
            let ph = z.conj() / z.norm();
            a *= ph;
            b *= ph.conj();
        }
        left.set_column(i, &a);
        right.set_column(i, &b);
    }
    Ok(SchmidtData { coefficients: dec.s[..rank].to_vec(), left_vectors: left, right_vectors: right, rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Subsystem::First),
            2 => Ok(Subsystem::Second),
            _ => Err(Error::InvalidArgument(format!("subsystem must be 1 or 2, got {i}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: BipartiteDims, matrix: CMatrix) -> Result<Self> {
        dims.check_square(&matrix)?;
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::NotDensity(format!("trace {tr} != 1")));
        }
        let lmin = linalg::eigvalsh(&matrix)[0];
        if lmin < -1e-10 {
            return Err(Error::NotDensity(format!("smallest eigenvalue {lmin:e} < 0")));
        }
        Ok(DensityMatrix { dims, matrix })
    }

    pub fn pure(psi: &PureVector) -> Result<Self> {
        let u = psi.normalized()?;
        Ok(DensityMatrix { dims: psi.dims, matrix: u.projector() })
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        DensityMatrix { dims, matrix: CMatrix::identity(n, n).scale(1.0 / n as f64) }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Partial trace over `subsystem` of an operator on `C^{d1} ⊗ C^{d2}`.
/// Tracing out the first factor yields a `d2 × d2` matrix, the second a
/// `d1 × d1` matrix.
pub fn partial_trace_op(x: &CMatrix, dims: BipartiteDims, subsystem: Subsystem) -> Result<CMatrix> {
    dims.check_square(x)?;
    let (d1, d2) = (dims.d1(), dims.d2());
    Ok(match subsystem {
        Subsystem::First => CMatrix::from_fn(d2, d2, |j, l| {
            (0..d1).map(|i| x[(dims.index(i, j), dims.index(i, l))]).sum()
        }),
        Subsystem::Second => CMatrix::from_fn(d1, d1, |i, k| {
            (0..d2).map(|j| x[(dims.index(i, j), dims.index(k, j))]).sum()
        }),
    })
}

pub fn partial_trace(rho: &DensityMatrix, subsystem: Subsystem) -> CMatrix {
    partial_trace_op(&rho.matrix, rho.dims, subsystem).expect("density matrix shape is checked on construction")
}

/// Partial transpose: swaps the row/column index on the chosen factor.
pub fn partial_transpose(x: &CMatrix, subsystem: Subsystem, dims: BipartiteDims) -> Result<CMatrix> {
    dims.check_square(x)?;
    let n = dims.total();
    let (d2,) = (dims.d2(),);
    Ok(CMatrix::from_fn(n, n, |r, s| {
        let (i, j) = (r / d2, r % d2);
        let (k, l) = (s / d2, s % d2);
        match subsystem {
            Subsystem::First => x[(dims.index(k, j), dims.index(i, l))],
            Subsystem::Second => x[(dims.index(i, l), dims.index(k, j))],
        }
    }))
}

/// An orthonormal basis (stored as matrix columns) of a subspace of
/// `C^{d1} ⊗ C^{d2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    dims: BipartiteDims,
    basis: CMatrix,
}

impl Subspace {
    /// Wraps an already orthonormal basis, checking orthonormality to 1e-10.
    pub fn new(dims: BipartiteDims, basis: CMatrix) -> Result<Self> {
        if basis.nrows() != dims.total() {
            return Err(Error::Shape {
                expected: format!("{} rows", dims.total()),
                got: format!("{} rows", basis.nrows()),
            });
        }
        let dev = linalg::orthonormality_deviation(&basis);
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Subspace { dims, basis })
    }

    /// Orthonormalized span of arbitrary vectors (sequential Gram-Schmidt in
    /// the given order).
    pub fn span(dims: BipartiteDims, vectors: &[PureVector], tol: f64) -> Result<Self> {
        let cols: Vec<CVector> = vectors.iter().map(|v| v.coords.clone()).collect();
        for v in vectors {
            if v.dims != dims {
                return Err(Error::Shape { expected: format!("{dims:?}"), got: format!("{:?}", v.dims) });
            }
        }
        Self::span_columns(dims, &linalg::columns_to_matrix(dims.total(), &cols), tol)
    }

    pub(crate) fn span_columns(dims: BipartiteDims, m: &CMatrix, tol: f64) -> Result<Self> {
        Ok(Subspace { dims, basis: linalg::orthonormalize(m, tol) })
    }

    pub(crate) fn from_orthonormal(dims: BipartiteDims, basis: CMatrix) -> Self {
        debug_assert!(linalg::orthonormality_deviation(&basis) < 1e-8);
        Subspace { dims, basis }
    }

    pub fn whole(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Subspace { dims, basis: CMatrix::identity(n, n) }
    }

    pub fn zero(dims: BipartiteDims) -> Self {
        Subspace { dims, basis: CMatrix::zeros(dims.total(), 0) }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn vector(&self, i: usize) -> PureVector {
        PureVector { dims: self.dims, coords: self.basis.column(i).into_owned() }
    }

    pub fn vectors(&self) -> Vec<PureVector> {
        (0..self.dim()).map(|i| self.vector(i)).collect()
    }

    pub fn projector(&self) -> CMatrix {
        linalg::projector(&self.basis)
    }

    pub fn project(&self, psi: &PureVector) -> PureVector {
        let coords = &self.basis * (self.basis.adjoint() * &psi.coords);
        PureVector { dims: self.dims, coords }
    }

    /// Norm of the component of `psi` orthogonal to the subspace.
    pub fn residual(&self, psi: &PureVector) -> f64 {
        (&psi.coords - self.project(psi).coords).norm()
    }

    pub fn contains(&self, psi: &PureVector, tol: f64) -> bool {
        self.residual(psi) <= tol * psi.norm().max(1.0)
    }

    /// Whether every basis vector of `other` lies in `self` within `tol`.
    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> bool {
        other.vectors().iter().all(|v| self.residual(v) <= tol)
    }

    pub fn complement(&self) -> Subspace {
        Subspace { dims: self.dims, basis: linalg::complement(&self.basis, self.dims.total()) }
    }

    /// Span of the union; the result is re-orthonormalized.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        let m = linalg::hstack(&self.basis, &other.basis);
        Subspace { dims: self.dims, basis: linalg::orthonormalize(&m, 1e-10) }
    }

    pub fn intersection(&self, other: &Subspace, tol: f64) -> Subspace {
        Subspace { dims: self.dims, basis: linalg::intersection(&self.basis, &other.basis, tol) }
    }

    /// Largest overlap between the two bases, used to test orthogonality.
    pub fn max_overlap(&self, other: &Subspace) -> f64 {
        linalg::max_abs(&(self.basis.adjoint() * &other.basis))
    }

    /// Combine basis coefficients into a vector of the ambient space.
    pub fn combine(&self, coeffs: &CVector) -> PureVector {
        PureVector { dims: self.dims, coords: &self.basis * coeffs }
    }
}

/// Local supports `A_Ψ = Im Tr_2 |Ψ⟩⟨Ψ|` and `B_Ψ = Im Tr_1 |Ψ⟩⟨Ψ|` as
/// orthonormal columns. These coincide with the column space of `𝔄(Ψ)`
/// and of its transpose; both are read off the SVD of the coordinate matrix.
pub fn local_supports(psi: &PureVector, tol: f64) -> Result<(CMatrix, CMatrix)> {
    let s = schmidt(psi, tol)?;
    let b = s.right_vectors.clone();
    Ok((s.left_vectors, b))
}

/// Like [`local_supports`] but keeps at most `k` Schmidt terms; used for
/// optimizer-found vectors that are only numerically of rank `<= k`.
pub(crate) fn truncated_supports(psi: &PureVector, k: usize, tol: f64) -> Result<(CMatrix, CMatrix)> {
    let s = schmidt(psi, tol)?;
    let r = s.rank.min(k);
    Ok((s.left_vectors.columns(0, r).into_owned(), s.right_vectors.columns(0, r).into_owned()))
}

fn tilde_from_supports(dims: BipartiteDims, a: &CMatrix, b: &CMatrix) -> Subspace {
    let (d1, d2) = (dims.d1(), dims.d2());
    let mut gens = Vec::new();
    for i in 0..a.ncols() {
        let ai = a.column(i).into_owned();
        for j in 0..d2 {
            let mut f = CVector::zeros(d2);
            f[j] = cr(1.0);
            gens.push(linalg::kron_vec(&ai, &f));
        }
    }
    for j in 0..b.ncols() {
        let bj = b.column(j).into_owned();
        for i in 0..d1 {
            let mut e = CVector::zeros(d1);
            e[i] = cr(1.0);
            gens.push(linalg::kron_vec(&e, &bj));
        }
    }
    let m = linalg::columns_to_matrix(dims.total(), &gens);
    Subspace { dims, basis: linalg::range_basis(&m, 1e-10) }
}

/// `span{A_Ψ ⊗ C^{d2} ∪ C^{d1} ⊗ B_Ψ}`.
pub fn tilde_subspace(psi: &PureVector, tol: f64) -> Result<Subspace> {
    let (a, b) = local_supports(psi, tol)?;
    Ok(tilde_from_supports(psi.dims, &a, &b))
}

pub(crate) fn tilde_subspace_truncated(psi: &PureVector, k: usize, tol: f64) -> Result<Subspace> {
    let (a, b) = truncated_supports(psi, k, tol)?;
    Ok(tilde_from_supports(psi.dims, &a, &b))
}

/// The product subspace `V̂ = V̂1 ⊗ V̂2` orthogonal to `Ṽ_Ψ` for every input vector.
#[derive(Debug, Clone)]
pub struct ProductSubspace {
    pub full: Subspace,
    /// Orthonormal columns in `C^{d1}`.
    pub first: CMatrix,
    /// Orthonormal columns in `C^{d2}`.
    pub second: CMatrix,
}

/// Requires every input to have Schmidt rank `<= k` at tolerance `tol`.
pub fn v_hat(dims: BipartiteDims, kernel_vectors: &[PureVector], k: usize, tol: f64) -> Result<ProductSubspace> {
    v_hat_impl(dims, kernel_vectors, k, tol, false)
}

/// Variant for optimizer-found vectors: keeps only the top `k` Schmidt terms
/// of each input instead of rejecting numerically higher ranks.
pub(crate) fn v_hat_truncated(
    dims: BipartiteDims,
    kernel_vectors: &[PureVector],
    k: usize,
    tol: f64,
) -> Result<ProductSubspace> {
    v_hat_impl(dims, kernel_vectors, k, tol, true)
}

fn v_hat_impl(
    dims: BipartiteDims,
    kernel_vectors: &[PureVector],
    k: usize,
    tol: f64,
    truncate: bool,
) -> Result<ProductSubspace> {
    let (d1, d2) = (dims.d1(), dims.d2());
    let mut a_cols = Vec::new();
    let mut b_cols = Vec::new();
    for psi in kernel_vectors {
        if psi.dims != dims {
            return Err(Error::Shape { expected: format!("{dims:?}"), got: format!("{:?}", psi.dims) });
        }
        let (a, b) = if truncate {
            truncated_supports(psi, k, tol)?
        } else {
            let s = schmidt(psi, tol)?;
            if s.rank > k {
                return Err(Error::RankTooLarge { rank: s.rank, k });
            }
            (s.left_vectors, s.right_vectors)
        };
        a_cols.extend(a.column_iter().map(|c| c.into_owned()));
        b_cols.extend(b.column_iter().map(|c| c.into_owned()));
    }
    // spans of numerically approximate supports: a loose relative cut keeps
    // optimizer noise from inflating their rank
    let span_a = linalg::range_basis(&linalg::columns_to_matrix(d1, &a_cols), 1e-6);
    let span_b = linalg::range_basis(&linalg::columns_to_matrix(d2, &b_cols), 1e-6);
    let first = linalg::complement(&span_a, d1);
    let second = linalg::complement(&span_b, d2);
    let full = Subspace { dims, basis: linalg::kron(&first, &second) };
    Ok(ProductSubspace { full, first, second })
}
