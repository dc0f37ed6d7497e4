//! Jamiołkowski correspondence between bipartite observables and
//! hermiticity-preserving maps `M_{d1} -> M_{d2}` in Kraus-Choi form.
//!
//! The reference vector is `Ψ⁺ = (1/d1) Σ_i e_i ⊗ f_i`, so that
//! `W = [I ⊗ Λ] |Ψ⁺⟩⟨Ψ⁺| = (1/d1²) Σ_ij E_ij ⊗ Λ(E_ij)`. With
//! [`Normalization::Unit`] the reference vector has unit norm instead and
//! the prefactor becomes `1/d1`.

use crate::bipartite::{self, BipartiteDims, PureVector};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix, CVector};
use crate::optim::OptimizerConfig;
use crate::witness::{self, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `‖Ψ⁺‖² = 1/d1`.
    #[default]
    Paper,
    /// `‖Ψ⁺‖ = 1`.
    Unit,
}

impl Normalization {
    fn witness_prefactor(self, d1: usize) -> f64 {
        match self {
            Normalization::Paper => 1.0 / (d1 * d1) as f64,
            Normalization::Unit => 1.0 / d1 as f64,
        }
    }
}

/// The reference vector of the correspondence. For `d1 < d2` the identity
/// is padded with zero columns.
#[derive(Debug, Clone)]
pub struct MaxEntangledRef {
    pub dims: BipartiteDims,
    pub vector: PureVector,
}

impl MaxEntangledRef {
    pub fn new(dims: BipartiteDims, normalization: Normalization) -> Self {
        let amp = normalization.witness_prefactor(dims.d1()).sqrt();
        let mut coords = CVector::zeros(dims.total());
        for i in 0..dims.d1() {
            coords[dims.index(i, i)] = cr(amp);
        }
        let vector = PureVector::new(dims, coords).expect("finite coordinates");
        MaxEntangledRef { dims, vector }
    }

    pub fn projector(&self) -> CMatrix {
        self.vector.projector()
    }
}

/// `Λ(ρ) = Σ A_i ρ A_i† − Σ B_i ρ B_i†` with `A_i, B_i` of shape `d2 × d1`.
#[derive(Debug, Clone)]
pub struct HermPreservingMap {
    pub input_dim: usize,
    pub output_dim: usize,
    pub kraus_plus: Vec<CMatrix>,
    pub kraus_minus: Vec<CMatrix>,
    pub normalization: Normalization,
}

impl HermPreservingMap {
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        kraus_plus: Vec<CMatrix>,
        kraus_minus: Vec<CMatrix>,
        normalization: Normalization,
    ) -> Result<Self> {
        BipartiteDims::new(input_dim, output_dim)?;
        for a in kraus_plus.iter().chain(&kraus_minus) {
            if a.shape() != (output_dim, input_dim) {
                return Err(Error::Shape {
                    expected: format!("{output_dim}x{input_dim} Kraus operator"),
                    got: format!("{}x{}", a.nrows(), a.ncols()),
                });
            }
        }
        Ok(HermPreservingMap { input_dim, output_dim, kraus_plus, kraus_minus, normalization })
    }

    /// Identity channel on `M_d` as a single Kraus operator.
    pub fn identity(d: usize, normalization: Normalization) -> Result<Self> {
        Self::new(d, d, vec![CMatrix::identity(d, d)], Vec::new(), normalization)
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.kraus_plus.len(), self.kraus_minus.len())
    }

    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims::new(self.input_dim, self.output_dim).expect("validated on construction")
    }

    /// Trace inner products `Tr(K_i† K_j)` over `kraus_plus ++ kraus_minus`.
    pub fn gram(&self) -> CMatrix {
        let all: Vec<&CMatrix> = self.kraus_plus.iter().chain(&self.kraus_minus).collect();
        CMatrix::from_fn(all.len(), all.len(), |i, j| all[i].dotc(all[j]))
    }
}

/// Kraus-Choi form of the map whose Jamiołkowski image is `w`. Kraus
/// operators are `c · √|λ_i| · 𝔄(ψ_i)ᵀ` for the eigenpairs of `w` outside the
/// zero band, with `c = d1` (paper normalization) or `√d1` (unit).
pub fn to_map(w: &CMatrix, dims: BipartiteDims, tol: f64, normalization: Normalization) -> Result<HermPreservingMap> {
    let split = witness::spectral_split(w, dims, tol)?;
    let c = 1.0 / normalization.witness_prefactor(dims.d1()).sqrt();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (lam, psi) in split.eigenvalues.iter().zip(&split.eigenvectors) {
        let kraus = || bipartite::reshape(dims, psi.coords()).transpose() * cr(c * lam.abs().sqrt());
        if *lam > split.zero_threshold {
            plus.push(kraus());
        } else if *lam < -split.zero_threshold {
            minus.push(kraus());
        }
    }
    // largest eigenvalues first
    plus.reverse();
    HermPreservingMap::new(dims.d1(), dims.d2(), plus, minus, normalization)
}

pub fn apply_map(map: &HermPreservingMap, x: &CMatrix) -> Result<CMatrix> {
    if x.shape() != (map.input_dim, map.input_dim) {
        return Err(Error::Shape {
            expected: format!("{0}x{0}", map.input_dim),
            got: format!("{}x{}", x.nrows(), x.ncols()),
        });
    }
    let n = map.output_dim;
    let mut out = CMatrix::zeros(n, n);
    for a in &map.kraus_plus {
        out += a * x * a.adjoint();
    }
    for b in &map.kraus_minus {
        out -= b * x * b.adjoint();
    }
    Ok(out)
}

/// `[I ⊗ Λ] |Ψ⁺⟩⟨Ψ⁺|`.
pub fn to_witness(map: &HermPreservingMap) -> Result<CMatrix> {
    let dims = BipartiteDims::new(map.input_dim, map.output_dim)?;
    let (d1, d2) = (dims.d1(), dims.d2());
    let pref = cr(map.normalization.witness_prefactor(d1));
    let mut w = CMatrix::zeros(dims.total(), dims.total());
    for i in 0..d1 {
        for j in 0..d1 {
            let mut e = CMatrix::zeros(d1, d1);
            e[(i, j)] = cr(1.0);
            let block = apply_map(map, &e)? * pref;
            for a in 0..d2 {
                for b in 0..d2 {
                    w[(dims.index(i, a), dims.index(j, b))] = block[(a, b)];
                }
            }
        }
    }
    Ok(w)
}

#[derive(Debug, Clone)]
pub struct KPositivity {
    pub k: usize,
    pub k_positive: bool,
    /// The Jamiołkowski image has no eigenvalue below `-witness_tol`.
    pub completely_positive: bool,
    /// Witness-engine report on the Jamiołkowski image; `is_witness` is
    /// true exactly when the map is `k`-positive but not completely positive.
    pub report: WitnessReport,
}

pub fn is_k_positive(map: &HermPreservingMap, k: usize, cfg: &OptimizerConfig) -> Result<KPositivity> {
    let w = to_witness(map)?;
    let report = witness::is_k_witness(&w, map.dims(), k, cfg)?;
    Ok(KPositivity {
        k,
        k_positive: report.min_over_sk >= -cfg.witness_tol,
        completely_positive: report.lambda_min >= -cfg.witness_tol,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct SignatureBounds {
    pub p: usize,
    pub q: usize,
    pub k_positive: bool,
    /// `q <= (d1-k)(d2-k)`, vacuously true for maps that are not `k`-positive.
    pub prop4_holds: bool,
    /// `k`-positive and no vector of Schmidt rank `<= k` found in the kernel
    /// of the Jamiołkowski image.
    pub prop5_applicable: bool,
    /// `p >= d1 d2 - (d1-k)(d2-k)`, vacuously true when not applicable.
    pub prop5_holds: bool,
}

/// Dimension bounds on the signature of a `k`-positive map. The Kraus set
/// must be linearly independent.
pub fn check_signature_bounds(map: &HermPreservingMap, k: usize, cfg: &OptimizerConfig) -> Result<SignatureBounds> {
    let gram = map.gram();
    let n = gram.nrows();
    if n > 0 && linalg::rank(&gram, 1e-10) < n {
        return Err(Error::DependentKraus);
    }
    let dims = map.dims();
    dims.check_k(k)?;
    let (p, q) = map.signature();
    let w = to_witness(map)?;
    let positivity = witness::min_over_sk(&w, dims, k, cfg)?;
    let k_positive = positivity.value >= -cfg.witness_tol;
    let bound = (dims.d1() - k) * (dims.d2() - k);
    let split = witness::spectral_split(&w, dims, cfg.zero_band)?;
    let prop5_applicable = k_positive && witness::kernel_ksep_vectors(&split.v_zero, k, cfg).is_empty();
    Ok(SignatureBounds {
        p,
        q,
        k_positive,
        prop4_holds: !k_positive || q <= bound,
        prop5_applicable,
        prop5_holds: !prop5_applicable || p >= dims.total() - bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn d(d1: usize, d2: usize) -> BipartiteDims {
        BipartiteDims::new(d1, d2).unwrap()
    }

    fn cfg() -> OptimizerConfig {
        OptimizerConfig { starts: 8, ..OptimizerConfig::default() }
    }

    fn swap_quarter() -> CMatrix {
        let dims = d(2, 2);
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(dims.index(i, j), dims.index(j, i))] = cr(0.25);
            }
        }
        m
    }

    #[test]
    fn reference_vector() {
        let r = MaxEntangledRef::new(d(2, 3), Normalization::Paper);
        let m = bipartite::reshape(r.dims, r.vector.coords());
        assert_eq!(m[(0, 0)], cr(0.5));
        assert_eq!(m[(1, 1)], cr(0.5));
        assert_eq!(m[(0, 2)], cr(0.0));
        assert!((r.vector.norm().powi(2) - 0.5).abs() < 1e-15);
        let u = MaxEntangledRef::new(d(2, 2), Normalization::Unit);
        assert!((u.vector.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_map_witness_is_reference_projector() {
        let id = HermPreservingMap::identity(2, Normalization::Paper).unwrap();
        let w = to_witness(&id).unwrap();
        let p = MaxEntangledRef::new(d(2, 2), Normalization::Paper).projector();
        assert!(max_abs(&(w - p)) < 1e-15);
    }

    #[test]
    fn projector_maps_to_identity_channel() {
        let p = MaxEntangledRef::new(d(2, 2), Normalization::Paper).projector();
        let map = to_map(&p, d(2, 2), 1e-9, Normalization::Paper).unwrap();
        assert_eq!(map.signature(), (1, 0));
        let rho = CMatrix::from_row_slice(2, 2, &[cr(0.3), linalg::c(0.1, 0.2), linalg::c(0.1, -0.2), cr(0.7)]);
        assert!(max_abs(&(apply_map(&map, &rho).unwrap() - &rho)) < 1e-14);
    }

    #[test]
    fn swap_is_transposition() {
        let map = to_map(&swap_quarter(), d(2, 2), 1e-9, Normalization::Paper).unwrap();
        assert_eq!(map.signature(), (3, 1));
        let rho = CMatrix::from_row_slice(2, 2, &[cr(0.3), linalg::c(0.1, 0.2), linalg::c(0.1, -0.2), cr(0.7)]);
        assert!(max_abs(&(apply_map(&map, &rho).unwrap() - rho.transpose())) < 1e-14);
        let g = map.gram();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(g[(i, j)].norm() < 1e-12);
                }
            }
        }
        assert!(max_abs(&(to_witness(&map).unwrap() - swap_quarter())) < 1e-14);
    }

    #[test]
    fn unit_normalization_roundtrip() {
        let w = swap_quarter() * cr(2.0);
        let map = to_map(&w, d(2, 2), 1e-9, Normalization::Unit).unwrap();
        assert!(max_abs(&(to_witness(&map).unwrap() - w)) < 1e-14);
    }

    #[test]
    fn zero_observable_has_no_kraus() {
        let map = to_map(&CMatrix::zeros(6, 6), d(2, 3), 1e-9, Normalization::Paper).unwrap();
        assert_eq!(map.signature(), (0, 0));
        assert_eq!(max_abs(&to_witness(&map).unwrap()), 0.0);
    }

    #[test]
    fn apply_map_shape_error() {
        let id = HermPreservingMap::identity(2, Normalization::Paper).unwrap();
        assert!(matches!(apply_map(&id, &CMatrix::zeros(3, 3)), Err(Error::Shape { .. })));
    }

    #[test]
    fn transposition_positivity() {
        let map = to_map(&swap_quarter(), d(2, 2), 1e-9, Normalization::Paper).unwrap();
        let one = is_k_positive(&map, 1, &cfg()).unwrap();
        assert!(one.k_positive && !one.completely_positive);
        assert!(one.report.is_witness);
        assert!(!is_k_positive(&map, 2, &cfg()).unwrap().k_positive);
        let b = check_signature_bounds(&map, 1, &cfg()).unwrap();
        assert!(b.prop4_holds && b.prop5_applicable && b.prop5_holds);
        assert_eq!((b.p, b.q), (3, 1));
    }

    #[test]
    fn identity_bounds() {
        let id = HermPreservingMap::identity(3, Normalization::Paper).unwrap();
        let b = check_signature_bounds(&id, 3, &cfg()).unwrap();
        assert!(b.k_positive && b.prop4_holds);
        assert_eq!(b.q, 0);
    }

    #[test]
    fn dependent_kraus_rejected() {
        let a = CMatrix::identity(2, 2);
        let map = HermPreservingMap::new(2, 2, vec![a.clone(), a * cr(2.0)], Vec::new(), Normalization::Paper).unwrap();
        assert!(matches!(check_signature_bounds(&map, 1, &cfg()), Err(Error::DependentKraus)));
    }
}
