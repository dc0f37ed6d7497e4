//! Random samplers, detection statistics, the PPT test, the two-qubit
//! signature experiment and a generator of candidate witnesses.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bipartite::{self, BipartiteDims, DensityMatrix, PureVector, Subspace, Subsystem};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix, CVector};
use crate::optim::OptimizerConfig;
use crate::witness;

pub fn random_product_vector(dims: BipartiteDims, seed: u64) -> PureVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    product_from(&mut rng, dims)
}

fn product_from(rng: &mut impl Rng, dims: BipartiteDims) -> PureVector {
    let a = linalg::haar_vector(rng, dims.d1());
    let b = linalg::haar_vector(rng, dims.d2());
    PureVector::product(dims, &a, &b).expect("factor lengths match")
}

/// Normalized sum of `k` random product vectors, redrawn until the Schmidt
/// rank is exactly `k`.
pub fn random_rank_k_vector(dims: BipartiteDims, k: usize, seed: u64) -> Result<PureVector> {
    dims.check_k(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut v = CVector::zeros(dims.total());
        for _ in 0..k {
            v += product_from(&mut rng, dims).into_coords();
        }
        let psi = PureVector::new(dims, v)?;
        if psi.norm() > 1e-12 && psi.schmidt_rank(1e-8)? == k {
            return psi.normalized();
        }
    }
}

/// `Tr(ρ W)`.
pub fn detection_value(rho: &DensityMatrix, w: &CMatrix) -> Result<f64> {
    rho.dims().check_square(w)?;
    Ok((rho.matrix() * w).trace().re)
}

/// True when the partial transpose on the second factor has no eigenvalue
/// below `-tol`.
pub fn ppt_check(rho: &DensityMatrix, tol: f64) -> bool {
    let pt = bipartite::partial_transpose(rho.matrix(), Subsystem::Second, rho.dims())
        .expect("density matrix shape is consistent");
    linalg::eigvalsh(&pt)[0] >= -tol
}

/// Counts of positive, negative and zero eigenvalues, with zero meaning
/// `|λ| <= tol * max|λ|`.
pub fn signature_of(m: &CMatrix, tol: f64) -> (usize, usize, usize) {
    let vals = linalg::eigvalsh(m);
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thr = tol * top;
    let p = vals.iter().filter(|&&v| v > thr).count();
    let q = vals.iter().filter(|&&v| v < -thr).count();
    (p, q, vals.len() - p - q)
}

/// Signature of the partial transpose of `|ψ⟩⟨ψ|`.
pub fn pure_state_pt_signature(psi: &PureVector, tol: f64) -> (usize, usize, usize) {
    let pt = bipartite::partial_transpose(&psi.projector(), Subsystem::Second, psi.dims())
        .expect("projector shape is consistent");
    signature_of(&pt, tol)
}

/// `Γ₂(|η⟩⟨η|)` for the eigenvector `η` of the most negative eigenvalue of
/// `Γ₂ ρ`; `None` when `ρ` is PPT at `tol`.
pub fn decomposable_witness(rho: &DensityMatrix, tol: f64) -> Option<CMatrix> {
    let pt = bipartite::partial_transpose(rho.matrix(), Subsystem::Second, rho.dims()).ok()?;
    let (vals, vecs) = linalg::eigh(&pt);
    if vals[0] >= -tol {
        return None;
    }
    let eta = vecs.column(0).into_owned();
    bipartite::partial_transpose(&(&eta * eta.adjoint()), Subsystem::Second, rho.dims()).ok()
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub trials: usize,
    pub seed: u64,
    /// `(p, q, z)` eigenvalue sign counts of `Γ₂|ψ⟩⟨ψ|`.
    pub signature_histogram: BTreeMap<(usize, usize, usize), usize>,
    /// Per-trial seeds whose signature differed from `(3, 1, 0)`.
    pub failures: Vec<u64>,
    pub zero_band: f64,
    /// Samples whose smallest Schmidt coefficient falls below this are redrawn.
    pub min_schmidt_coefficient: f64,
}

pub const MIN_SCHMIDT_COEFFICIENT: f64 = 1e-3;

/// Seed of trial `index` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn entangled_two_qubit_state(seed: u64) -> PureVector {
    let dims = BipartiteDims::new(2, 2).expect("2x2 is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let psi = PureVector::new(dims, linalg::haar_vector(&mut rng, 4)).expect("finite sample");
        let s = linalg::singular_values(&bipartite::reshape(dims, psi.coords()));
        if s[1] >= MIN_SCHMIDT_COEFFICIENT {
            return psi;
        }
    }
}

pub fn two_qubit_signature_experiment(n_trials: usize, seed: u64, tol: f64) -> Result<ExperimentReport> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let outcomes: Vec<(u64, (usize, usize, usize))> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            (s, pure_state_pt_signature(&entangled_two_qubit_state(s), tol))
        })
        .collect();
    let mut signature_histogram = BTreeMap::new();
    let mut failures = Vec::new();
    for (s, sig) in outcomes {
        *signature_histogram.entry(sig).or_insert(0) += 1;
        if sig != (3, 1, 0) {
            failures.push(s);
        }
    }
    Ok(ExperimentReport {
        trials: n_trials,
        seed,
        signature_histogram,
        failures,
        zero_band: tol,
        min_schmidt_coefficient: MIN_SCHMIDT_COEFFICIENT,
    })
}

/// An observable produced by one of the corpus families; not yet certified.
#[derive(Debug, Clone)]
pub struct CorpusCandidate {
    pub dims: BipartiteDims,
    pub k: usize,
    pub family: &'static str,
    pub seed: u64,
    pub w: CMatrix,
}

fn random_subspace(rng: &mut impl Rng, dims: BipartiteDims, m: usize) -> Subspace {
    let g = CMatrix::from_fn(dims.total(), m, |_, _| linalg::gaussian_vector(rng, 1)[0]);
    let q = linalg::orthonormalize(&g, 1e-10);
    Subspace::new(dims, q).expect("orthonormalized columns")
}

/// `max_{Ψ ∈ S_k} ‖P_V Ψ‖²` estimated by the seesaw on `-P_V`.
fn max_overlap_sk(v: &Subspace, k: usize, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(-witness::min_over_sk(&(-v.projector()), v.dims(), k, cfg)?.value)
}

fn projector_family(rng: &mut impl Rng, dims: BipartiteDims, k: usize, cfg: &OptimizerConfig) -> Result<Option<CMatrix>> {
    let m = rng.random_range(1..=(dims.d1() - k) * (dims.d2() - k));
    let v = random_subspace(rng, dims, m);
    let eps = max_overlap_sk(&v, k, cfg)?;
    let margin: f64 = rng.random_range(0.0..0.05);
    let eps = eps + margin * (1.0 - eps);
    if eps >= 1.0 - 1e-6 {
        return Ok(None);
    }
    witness::projector_witness(&v, eps).map(Some)
}

/// `λ W₊ − W₋` on a random eigenbasis with `λ` set from the sufficient
/// fraction bound, so that positivity on `S_k` holds by construction.
fn scaled_family(rng: &mut impl Rng, dims: BipartiteDims, k: usize, cfg: &OptimizerConfig) -> Result<Option<CMatrix>> {
    let n = dims.total();
    let u = linalg::haar_unitary(rng, n);
    let m = rng.random_range(1..=((dims.d1() - k) * (dims.d2() - k)).min(2));
    let v_minus = Subspace::new(dims, u.columns(0, m).into_owned())?;
    let eps = max_overlap_sk(&v_minus, k, cfg)?;
    if eps >= 1.0 - 1e-6 {
        return Ok(None);
    }
    let neg: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..2.0)).collect();
    let pos: Vec<f64> = (m..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let neg_max = neg.iter().copied().fold(0.0, f64::max);
    let pos_min = pos.iter().copied().fold(f64::INFINITY, f64::min);
    let lam = eps / (1.0 - eps) * neg_max / pos_min * rng.random_range(1.01..1.2);
    let mut w = CMatrix::zeros(n, n);
    for i in 0..n {
        let l = if i < m { -neg[i] } else { lam * pos[i - m] };
        let col = u.column(i).into_owned();
        w += &col * col.adjoint() * cr(l);
    }
    Ok(Some(w))
}

/// Kernel spanned by one random product vector `x ⊗ y`, a random negative
/// vector inside `x^⊥ ⊗ y^⊥`, the tight positive eigenvalue on the rest of
/// that product subspace and random nonnegative eigenvalues elsewhere.
fn kernel_product_family(rng: &mut impl Rng, dims: BipartiteDims) -> Result<Option<CMatrix>> {
    let x = linalg::haar_vector(rng, dims.d1());
    let y = linalg::haar_vector(rng, dims.d2());
    let xp = linalg::complement(&CMatrix::from_column_slice(dims.d1(), 1, x.as_slice()), dims.d1());
    let yp = linalg::complement(&CMatrix::from_column_slice(dims.d2(), 1, y.as_slice()), dims.d2());
    let hat = Subspace::new(dims, linalg::kron(&xp, &yp))?;
    let coeffs = linalg::haar_vector(rng, hat.dim());
    let psi = hat.combine(&coeffs);
    let s = linalg::singular_values(&bipartite::reshape(dims, psi.coords()));
    let eps = s[0] * s[0];
    if eps >= 1.0 - 1e-6 {
        return Ok(None);
    }
    let psi_sub = Subspace::span(dims, &[psi.clone()], 1e-12)?;
    let k_part = hat.intersection(&psi_sub.complement(), 1e-10);
    let kernel = Subspace::span(dims, &[PureVector::product(dims, &x, &y)?], 1e-12)?;
    let rest = kernel.sum(&hat).complement();
    let tight = eps / (1.0 - eps) * rng.random_range(1.0..1.1);
    let mut w = k_part.projector() * cr(tight) - psi.projector();
    for v in rest.vectors() {
        let l: f64 = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.1..3.0) };
        w += v.projector() * cr(l);
    }
    Ok(Some(w))
}

/// `Γ₂(|η⟩⟨η|) + t |r⟩⟨r|` for a random entangled `η` and small random `t`.
fn decomposable_family(rng: &mut impl Rng, dims: BipartiteDims) -> Result<Option<CMatrix>> {
    let eta = linalg::haar_vector(rng, dims.total());
    let mut w = bipartite::partial_transpose(&(&eta * eta.adjoint()), Subsystem::Second, dims)?;
    if rng.random_bool(0.5) {
        let r = linalg::haar_vector(rng, dims.total());
        w += &r * r.adjoint() * cr(rng.random_range(0.0..0.05));
    }
    Ok(Some(w))
}

/// Candidate witnesses over `(2,2)`, `(2,3)`, `(3,3)`, `(2,4)` and `(3,4)`
/// for `k = 1`, plus `(3,3)` and `(3,4)` for `k = 2`. `per_family` samples
/// are drawn per applicable family and size.
pub fn corpus_candidates(seed: u64, per_family: usize, cfg: &OptimizerConfig) -> Result<Vec<CorpusCandidate>> {
    let sizes: [(usize, usize, usize); 7] = [(2, 2, 1), (2, 3, 1), (3, 3, 1), (2, 4, 1), (3, 4, 1), (3, 3, 2), (3, 4, 2)];
    let mut jobs = Vec::new();
    for (si, &(d1, d2, k)) in sizes.iter().enumerate() {
        for family in 0..4 {
            if k > 1 && family >= 2 {
                continue;
            }
            for i in 0..per_family {
                jobs.push((d1, d2, k, family, trial_seed(seed, (si * 4 + family) * 100_000 + i)));
            }
        }
    }
    let out: Vec<Result<Option<CorpusCandidate>>> = jobs
        .into_par_iter()
        .map(|(d1, d2, k, family, s)| {
            let dims = BipartiteDims::new(d1, d2)?;
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (name, w) = match family {
                0 => ("projector", projector_family(&mut rng, dims, k, cfg)?),
                1 => ("scaled", scaled_family(&mut rng, dims, k, cfg)?),
                2 => ("kernel-product", kernel_product_family(&mut rng, dims)?),
                _ => ("decomposable", decomposable_family(&mut rng, dims)?),
            };
            Ok(w.map(|w| CorpusCandidate { dims, k, family: name, seed: s, w }))
        })
        .collect();
    let mut candidates = Vec::new();
    for r in out {
        if let Some(c) = r? {
            candidates.push(c);
        }
    }
    Ok(candidates)
}
