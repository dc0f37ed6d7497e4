//! Spectral splitting of observables, witness certification over `S_k`,
//! the necessary spectral conditions, the subspace sup norm `ε_min`, and
//! the `λ W₊ − W₋` construction.

use crate::bipartite::{self, BipartiteDims, PureVector, Subspace};
use crate::error::{Error, Result, WitnessCondition};
use crate::linalg::{self, cr, CMatrix, CVector};
use crate::optim::{self, OptimizerConfig, TracePoint};
use crate::subspace;

/// An observable split along the signs of its eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub dims: BipartiteDims,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<PureVector>,
    pub v_plus: Subspace,
    pub v_minus: Subspace,
    pub v_zero: Subspace,
    pub w_plus: CMatrix,
    pub w_minus: CMatrix,
    /// Extremes of the positive eigenvalues.
    pub lambda_plus_max: Option<f64>,
    pub lambda_plus_min: Option<f64>,
    /// Extremes of the magnitudes of the negative eigenvalues.
    pub lambda_minus_max: Option<f64>,
    pub lambda_minus_min: Option<f64>,
    /// Absolute half-width of the zero band that was applied.
    pub zero_threshold: f64,
}

impl SpectralSplit {
    pub fn observable(&self) -> CMatrix {
        &self.w_plus - &self.w_minus
    }

    /// `(dim V₊, dim V₋, dim V₀)`.
    pub fn signature(&self) -> (usize, usize, usize) {
        (self.v_plus.dim(), self.v_minus.dim(), self.v_zero.dim())
    }
}

fn check_hermitian(w: &CMatrix, dims: BipartiteDims, tol: f64) -> Result<()> {
    dims.check_square(w)?;
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("observable has non-finite entries".into()));
    }
    let dev = linalg::hermitian_deviation(w);
    if dev > tol.max(1e-10) * linalg::max_abs(w).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Eigenvalues with `|λ| <= tol * max|λ|` go to `V₀`.
pub fn spectral_split(w: &CMatrix, dims: BipartiteDims, tol: f64) -> Result<SpectralSplit> {
    check_hermitian(w, dims, tol)?;
    let (values, vectors) = linalg::eigh(w);
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = tol * top;
    let n = dims.total();
    let (mut plus, mut minus, mut zero) = (Vec::new(), Vec::new(), Vec::new());
    let mut w_plus = CMatrix::zeros(n, n);
    let mut w_minus = CMatrix::zeros(n, n);
    for (i, &lam) in values.iter().enumerate() {
        let col = vectors.column(i).into_owned();
        let outer = &col * col.adjoint();
        if lam > thr {
            w_plus += outer * cr(lam);
            plus.push(col);
        } else if lam < -thr {
            w_minus += outer * cr(-lam);
            minus.push(col);
        } else {
            zero.push(col);
        }
    }
    let pos: Vec<f64> = values.iter().copied().filter(|&v| v > thr).collect();
    let neg: Vec<f64> = values.iter().filter(|&&v| v < -thr).map(|v| -v).collect();
    let max = |v: &[f64]| v.iter().copied().reduce(f64::max);
    let min = |v: &[f64]| v.iter().copied().reduce(f64::min);
    let sub = |cols: &[CVector]| Subspace::from_orthonormal(dims, linalg::columns_to_matrix(n, cols));
    Ok(SpectralSplit {
        dims,
        eigenvectors: (0..n)
            .map(|i| PureVector::new(dims, vectors.column(i).into_owned()).expect("finite eigenvector"))
            .collect(),
        eigenvalues: values,
        v_plus: sub(&plus),
        v_minus: sub(&minus),
        v_zero: sub(&zero),
        w_plus,
        w_minus,
        lambda_plus_max: max(&pos),
        lambda_plus_min: min(&pos),
        lambda_minus_max: max(&neg),
        lambda_minus_min: min(&neg),
        zero_threshold: thr,
    })
}

/// `⟨Ψ|W|Ψ⟩ / ⟨Ψ|Ψ⟩`.
pub fn expectation(w: &CMatrix, psi: &PureVector) -> f64 {
    let v = psi.coords();
    (v.adjoint() * w * v)[(0, 0)].re / v.norm_squared()
}

/// Smallest expectation value found over unit vectors of Schmidt rank `<= k`.
#[derive(Debug, Clone)]
pub struct SkMinimum {
    pub value: f64,
    pub argmin: PureVector,
    pub starts: usize,
    pub converged_starts: usize,
    pub trace: Vec<TracePoint>,
}

struct SeesawRun {
    psi: CVector,
    value: f64,
    converged: bool,
    history: Vec<f64>,
}

fn orthonormal_columns(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

/// Columns `e_a ⊗ y_i` at position `a*k + i`.
fn lift_first(dims: BipartiteDims, y: &CMatrix) -> CMatrix {
    let k = y.ncols();
    let mut l = CMatrix::zeros(dims.total(), dims.d1() * k);
    for a in 0..dims.d1() {
        for i in 0..k {
            for b in 0..dims.d2() {
                l[(dims.index(a, b), a * k + i)] = y[(b, i)];
            }
        }
    }
    l
}

/// Columns `x_i ⊗ f_b` at position `b*k + i`.
fn lift_second(dims: BipartiteDims, x: &CMatrix) -> CMatrix {
    let k = x.ncols();
    let mut l = CMatrix::zeros(dims.total(), dims.d2() * k);
    for b in 0..dims.d2() {
        for i in 0..k {
            for a in 0..dims.d1() {
                l[(dims.index(a, b), b * k + i)] = x[(a, i)];
            }
        }
    }
    l
}

fn lowest_eigvec(l: &CMatrix, w: &CMatrix) -> (f64, CVector) {
    let eff = l.adjoint() * w * l;
    let (vals, vecs) = linalg::eigh(&eff);
    (vals[0], vecs.column(0).into_owned())
}

fn seesaw(w: &CMatrix, dims: BipartiteDims, k: usize, cfg: &OptimizerConfig, rng: &mut impl rand::Rng) -> SeesawRun {
    let (d1, d2) = (dims.d1(), dims.d2());
    let scale = linalg::max_abs(w).max(f64::MIN_POSITIVE);
    let g = CMatrix::from_fn(d2, k, |_, _| linalg::gaussian_vector(rng, 1)[0]);
    let mut y = orthonormal_columns(&g).0;
    let mut history = Vec::new();
    let mut prev = f64::INFINITY;
    let mut psi = CVector::zeros(dims.total());
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        let (_, xv) = lowest_eigvec(&lift_first(dims, &y), w);
        let x = CMatrix::from_fn(d1, k, |a, i| xv[a * k + i]);
        let x = orthonormal_columns(&x).0;
        let l2 = lift_second(dims, &x);
        let (value, yv) = lowest_eigvec(&l2, w);
        psi = &l2 * &yv;
        history.push(value);
        let ynew = CMatrix::from_fn(d2, k, |b, i| yv[b * k + i]);
        y = orthonormal_columns(&ynew).0;
        if prev - value <= cfg.convergence_tol * scale {
            converged = true;
            break;
        }
        prev = value;
    }
    let n = psi.norm();
    let psi = psi / cr(n);
    let value = (psi.adjoint() * w * &psi)[(0, 0)].re;
    SeesawRun { psi, value, converged, history }
}

/// Seesaw minimization of `⟨Ψ|W|Ψ⟩` over unit `Ψ = Σ_{i<k} x_i ⊗ y_i`.
/// Each half step solves a Hermitian eigenproblem on the `d1·k` (resp.
/// `d2·k`) dimensional space obtained by freezing the other factor block.
pub fn min_over_sk(w: &CMatrix, dims: BipartiteDims, k: usize, cfg: &OptimizerConfig) -> Result<SkMinimum> {
    cfg.validate()?;
    check_hermitian(w, dims, cfg.zero_band)?;
    dims.check_k(k)?;
    if k == dims.d1() {
        let (vals, vecs) = linalg::eigh(w);
        return Ok(SkMinimum {
            value: vals[0],
            argmin: PureVector::new(dims, vecs.column(0).into_owned())?,
            starts: 1,
            converged_starts: 1,
            trace: Vec::new(),
        });
    }
    let runs = optim::run_starts(cfg, |_, rng| seesaw(w, dims, k, cfg, rng));
    let best = optim::argmin_by_value(&runs, |r| r.value).expect("at least one start");
    let trace = if cfg.record_trace {
        runs.iter().enumerate().flat_map(|(i, r)| optim::trace_points(i, &r.history)).collect()
    } else {
        Vec::new()
    };
    Ok(SkMinimum {
        value: runs[best].value,
        argmin: PureVector::new(dims, runs[best].psi.clone())?,
        starts: runs.len(),
        converged_starts: runs.iter().filter(|r| r.converged).count(),
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub holds: bool,
    pub counterexample: Option<PureVector>,
}

impl ConditionCheck {
    fn holds() -> Self {
        ConditionCheck { holds: true, counterexample: None }
    }

    fn fails(v: Option<PureVector>) -> Self {
        ConditionCheck { holds: false, counterexample: v }
    }
}

#[derive(Debug, Clone)]
pub struct NecessaryChecks {
    pub condition1: ConditionCheck,
    pub condition2: ConditionCheck,
    pub condition3: ConditionCheck,
    /// Kernel vectors of Schmidt rank `<= k` that the search turned up.
    pub kernel_ksep: Vec<PureVector>,
}

const MIN_NEGATIVE_WEIGHT: f64 = 1e-3;
const PROJECTION_TOL: f64 = 1e-6;

fn negative_then_zero(v_minus: &Subspace, v_zero: &Subspace) -> CMatrix {
    linalg::hstack(v_minus.basis(), v_zero.basis())
}

pub(crate) fn condition2_check(
    v_minus: &Subspace,
    v_zero: &Subspace,
    k: usize,
    cfg: &OptimizerConfig,
) -> ConditionCheck {
    if v_minus.is_empty() {
        return ConditionCheck::holds();
    }
    let dims = v_minus.dims();
    if k >= dims.d1() {
        return ConditionCheck::fails(Some(v_minus.vector(0)));
    }
    let basis = negative_then_zero(v_minus, v_zero);
    let mask: Vec<bool> = (0..basis.ncols()).map(|j| j < v_minus.dim()).collect();
    let mut runs = subspace::defect_search(dims, &basis, k, Some(&mask), cfg);
    if !v_zero.is_empty() {
        runs.extend(subspace::defect_search(dims, &basis, k, None, cfg));
    }
    let mut best: Option<(f64, PureVector)> = None;
    for r in runs {
        let weight = r.coeffs.rows(0, v_minus.dim()).norm();
        if weight <= MIN_NEGATIVE_WEIGHT {
            continue;
        }
        let ratio = r.defect / weight;
        if ratio < cfg.defect_tol && best.as_ref().map_or(true, |(b, _)| ratio < *b) {
            let psi = PureVector::new(dims, &basis * &r.coeffs).expect("finite optimizer output");
            best = Some((ratio, psi));
        }
    }
    match best {
        Some((_, psi)) => ConditionCheck::fails(Some(psi)),
        None => ConditionCheck::holds(),
    }
}

/// Unit vectors of Schmidt rank `<= k` (up to `defect_tol`) found in `v_zero`.
pub fn kernel_ksep_vectors(v_zero: &Subspace, k: usize, cfg: &OptimizerConfig) -> Vec<PureVector> {
    if v_zero.is_empty() {
        return Vec::new();
    }
    let dims = v_zero.dims();
    if k >= dims.d1() {
        return v_zero.vectors();
    }
    let mut found: Vec<PureVector> = Vec::new();
    for r in subspace::defect_search(dims, v_zero.basis(), k, None, cfg) {
        if r.defect >= cfg.defect_tol {
            continue;
        }
        let psi = v_zero.combine(&r.coeffs);
        if found.iter().all(|f| f.inner(&psi).norm() < 1.0 - 1e-8) {
            found.push(psi);
        }
    }
    found
}

pub(crate) fn condition3_check(
    v_minus: &Subspace,
    v_zero: &Subspace,
    kernel: &[PureVector],
    k: usize,
) -> ConditionCheck {
    if v_minus.is_empty() {
        return ConditionCheck::holds();
    }
    let dims = v_minus.dims();
    let both = Subspace::from_orthonormal(dims, negative_then_zero(v_minus, v_zero));
    for psi in kernel {
        let Ok(tilde) = bipartite::tilde_subspace_truncated(psi, k, 1e-8) else {
            continue;
        };
        let shared = tilde.intersection(&both, 1e-8);
        for t in shared.vectors() {
            if v_minus.project(&t).norm() > PROJECTION_TOL {
                return ConditionCheck::fails(Some(t));
            }
        }
    }
    ConditionCheck::holds()
}

/// The three necessary spectral conditions for a `k`-Schmidt witness.
/// Condition (iii) is checked only against the kernel vectors the search
/// finds, so "holds" is relative to that sample.
pub fn check_necessary(split: &SpectralSplit, k: usize, cfg: &OptimizerConfig) -> NecessaryChecks {
    let condition1 = if split.v_minus.is_empty() { ConditionCheck::fails(None) } else { ConditionCheck::holds() };
    let condition2 = condition2_check(&split.v_minus, &split.v_zero, k, cfg);
    let kernel_ksep = kernel_ksep_vectors(&split.v_zero, k, cfg);
    let condition3 = condition3_check(&split.v_minus, &split.v_zero, &kernel_ksep, k);
    NecessaryChecks { condition1, condition2, condition3, kernel_ksep }
}

/// Outcome of the sup-norm search over a subspace.
#[derive(Debug, Clone)]
pub struct EpsilonMin {
    /// `max |⟨φ⊗χ|Φ⟩|²` over unit `Φ` in the subspace and unit product vectors.
    pub value: f64,
    pub argmax: PureVector,
    pub starts: usize,
    pub converged_starts: usize,
    pub trace: Vec<TracePoint>,
}

/// Squared sup norm of the coordinate matrices of a subspace. Alternates
/// between projecting a product vector onto `v` and taking the top singular
/// pair of the projected vector's coordinate matrix.
pub fn epsilon_min(v: &Subspace, cfg: &OptimizerConfig) -> Result<EpsilonMin> {
    cfg.validate()?;
    if v.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let dims = v.dims();
    let p = v.projector();
    let runs = optim::run_starts(cfg, |_, rng| {
        let mut prod = loop {
            let a = linalg::haar_vector(rng, dims.d1());
            let b = linalg::haar_vector(rng, dims.d2());
            let pv = linalg::kron_vec(&a, &b);
            if (&p * &pv).norm() > 1e-8 {
                break pv;
            }
        };
        let mut history = Vec::new();
        let mut best = (-1.0, CVector::zeros(dims.total()));
        let mut converged = false;
        for _ in 0..cfg.max_iterations {
            let phi = &p * &prod;
            let phi = &phi / cr(phi.norm());
            let dec = linalg::svd(&bipartite::reshape(dims, &phi));
            let value = dec.s[0] * dec.s[0];
            history.push(value);
            let gain = value - best.0;
            if value > best.0 {
                best = (value, phi);
            }
            if gain <= cfg.convergence_tol {
                converged = true;
                break;
            }
            let a = dec.u.column(0).into_owned();
            let b = dec.v.column(0).map(|z| z.conj());
            prod = linalg::kron_vec(&a, &b);
        }
        (best.0, best.1, converged, history)
    });
    let best = optim::argmin_by_value(&runs, |r| -r.0).expect("at least one start");
    let trace = if cfg.record_trace {
        runs.iter().enumerate().flat_map(|(i, r)| optim::trace_points(i, &r.3)).collect()
    } else {
        Vec::new()
    };
    Ok(EpsilonMin {
        value: runs[best].0,
        argmax: PureVector::new(dims, runs[best].1.clone())?,
        starts: runs.len(),
        converged_starts: runs.iter().filter(|r| r.2).count(),
        trace,
    })
}

/// `ε·I − P_V`.
pub fn projector_witness(v_minus: &Subspace, epsilon: f64) -> Result<CMatrix> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let n = v_minus.dims().total();
    Ok(CMatrix::identity(n, n) * cr(epsilon) - v_minus.projector())
}

#[derive(Debug, Clone)]
pub struct EigenvalueConditions {
    pub necessary_holds: bool,
    pub sufficient_holds: bool,
    /// `λ₊max / (λ₊max + λ₋min)`.
    pub necessary_fraction: f64,
    /// `λ₊min / (λ₊min + λ₋max)`.
    pub sufficient_fraction: f64,
    pub eps_minus: f64,
    pub eps_minus_zero: f64,
    pub reason: Option<String>,
}

/// Eigenvalue-fraction tests against the sup norms of `V₋` and `V₋ ⊕ V₀`
/// (product vectors, i.e. `k = 1`).
pub fn eigenvalue_conditions(split: &SpectralSplit, cfg: &OptimizerConfig) -> Result<EigenvalueConditions> {
    let (Some(pmax), Some(pmin)) = (split.lambda_plus_max, split.lambda_plus_min) else {
        return Err(Error::EmptyPositive);
    };
    let (Some(mmax), Some(mmin)) = (split.lambda_minus_max, split.lambda_minus_min) else {
        return Err(Error::EmptyNegative);
    };
    let necessary_fraction = pmax / (pmax + mmin);
    let sufficient_fraction = pmin / (pmin + mmax);
    let eps_minus = epsilon_min(&split.v_minus, cfg)?.value;
    let eps_minus_zero = if split.v_zero.is_empty() {
        eps_minus
    } else {
        epsilon_min(&split.v_minus.sum(&split.v_zero), cfg)?.value
    };
    let kernel_has_product = !split.v_zero.is_empty() && eps_minus_zero >= 1.0 - cfg.defect_tol;
    let necessary_holds = necessary_fraction >= eps_minus - cfg.witness_tol;
    let sufficient_holds = !kernel_has_product && sufficient_fraction >= eps_minus_zero - cfg.witness_tol;
    let reason = if kernel_has_product {
        Some("kernel contains a product vector; sup norm of V- + V0 is 1".to_string())
    } else {
        None
    };
    Ok(EigenvalueConditions {
        necessary_holds,
        sufficient_holds,
        necessary_fraction,
        sufficient_fraction,
        eps_minus,
        eps_minus_zero,
        reason,
    })
}

/// Verdict of the `S_k` positivity test alone.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub is_witness: bool,
    pub lambda_min: f64,
    pub minimum: SkMinimum,
}

/// Certified when `min_{S_k} ⟨Ψ|W|Ψ⟩ >= -witness_tol` and
/// `λ_min(W) < -witness_tol`.
pub fn certify(w: &CMatrix, dims: BipartiteDims, k: usize, cfg: &OptimizerConfig) -> Result<Certificate> {
    let minimum = min_over_sk(w, dims, k, cfg)?;
    let lambda_min = linalg::eigvalsh(w)[0];
    let is_witness = minimum.value >= -cfg.witness_tol && lambda_min < -cfg.witness_tol;
    Ok(Certificate { is_witness, lambda_min, minimum })
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub k: usize,
    pub is_witness: bool,
    pub min_over_sk: f64,
    pub minimizer: PureVector,
    pub lambda_min: f64,
    /// Eigenvector of the most negative eigenvalue.
    pub detecting_vector: Option<PureVector>,
    /// Vector of Schmidt rank `<= k` with negative expectation.
    pub violating_vector: Option<PureVector>,
    pub reason: Option<String>,
    pub condition1: ConditionCheck,
    pub condition2: ConditionCheck,
    pub condition3: ConditionCheck,
    /// Evaluated for `k = 1` when both `V₊` and `V₋` are nonempty.
    pub necessary_eig_holds: Option<bool>,
    pub sufficient_eig_holds: Option<bool>,
    pub signature: (usize, usize, usize),
    pub starts: usize,
    pub converged_starts: usize,
    pub trace: Vec<TracePoint>,
}

impl WitnessReport {
    /// No start of the `S_k` search met the convergence criterion.
    pub fn inconclusive(&self) -> bool {
        self.converged_starts == 0
    }
}

pub fn is_k_witness(w: &CMatrix, dims: BipartiteDims, k: usize, cfg: &OptimizerConfig) -> Result<WitnessReport> {
    let split = spectral_split(w, dims, cfg.zero_band)?;
    let cert = certify(w, dims, k, cfg)?;
    let checks = check_necessary(&split, k, cfg);
    let has_negative = cert.lambda_min < -cfg.witness_tol;
    let violated = cert.minimum.value < -cfg.witness_tol;
    let reason = if !has_negative {
        Some("no negative eigenvalue".to_string())
    } else if violated {
        Some(format!("negative expectation on a vector of Schmidt rank <= {k}"))
    } else {
        None
    };
    let (necessary_eig_holds, sufficient_eig_holds) =
        if k == 1 && !split.v_plus.is_empty() && !split.v_minus.is_empty() {
            let e = eigenvalue_conditions(&split, cfg)?;
            (Some(e.necessary_holds), Some(e.sufficient_holds))
        } else {
            (None, None)
        };
    Ok(WitnessReport {
        k,
        is_witness: cert.is_witness,
        min_over_sk: cert.minimum.value,
        minimizer: cert.minimum.argmin.clone(),
        lambda_min: cert.lambda_min,
        detecting_vector: has_negative.then(|| split.eigenvectors[0].clone()),
        violating_vector: violated.then(|| cert.minimum.argmin.clone()),
        reason,
        condition1: checks.condition1,
        condition2: checks.condition2,
        condition3: checks.condition3,
        necessary_eig_holds,
        sufficient_eig_holds,
        signature: split.signature(),
        starts: cert.minimum.starts,
        converged_starts: cert.minimum.converged_starts,
        trace: cert.minimum.trace,
    })
}

#[derive(Debug, Clone)]
pub struct BuiltWitness {
    pub lambda_star: f64,
    pub witness: CMatrix,
    /// Number of `S_k` certifications run during the search.
    pub evaluations: usize,
}

fn check_psd_on(m: &CMatrix, v: &Subspace, name: &str) -> Result<()> {
    let dims = v.dims();
    dims.check_square(m)?;
    let scale = linalg::max_abs(m).max(1.0);
    if linalg::hermitian_deviation(m) > 1e-10 * scale {
        return Err(Error::InvalidSplit(format!("{name} is not Hermitian")));
    }
    let p = v.projector();
    let outside = m - &p * m * &p;
    if linalg::max_abs(&outside) > 1e-10 * scale {
        return Err(Error::InvalidSplit(format!("{name} is not supported on its subspace")));
    }
    if !v.is_empty() {
        let restricted = v.basis().adjoint() * m * v.basis();
        if linalg::eigvalsh(&restricted)[0] <= 1e-12 * scale {
            return Err(Error::InvalidSplit(format!("{name} is not positive definite on its subspace")));
        }
    }
    Ok(())
}

/// Smallest `λ` (to relative width `1e-6`) for which `λ W₊ − W₋` certifies
/// as a `k`-Schmidt witness, after checking the three hypotheses of the
/// construction.
pub fn build_witness(
    v_plus: &Subspace,
    v_zero: &Subspace,
    v_minus: &Subspace,
    w_plus: &CMatrix,
    w_minus: &CMatrix,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<BuiltWitness> {
    cfg.validate()?;
    let dims = v_plus.dims();
    if v_zero.dims() != dims || v_minus.dims() != dims {
        return Err(Error::InvalidSplit("subspaces live in different spaces".into()));
    }
    dims.check_k(k)?;
    if v_plus.dim() + v_zero.dim() + v_minus.dim() != dims.total() {
        return Err(Error::InvalidSplit("subspace dimensions do not add up to d1*d2".into()));
    }
    let pairs = [(v_plus, v_zero), (v_plus, v_minus), (v_zero, v_minus)];
    if pairs.iter().any(|(a, b)| a.max_overlap(b) > 1e-8) {
        return Err(Error::InvalidSplit("subspaces are not mutually orthogonal".into()));
    }
    check_psd_on(w_plus, v_plus, "w_plus")?;
    check_psd_on(w_minus, v_minus, "w_minus")?;

    if v_minus.is_empty() {
        return Err(Error::Hypothesis(WitnessCondition::NonTrivialNegative));
    }
    if !condition2_check(v_minus, v_zero, k, cfg).holds {
        return Err(Error::Hypothesis(WitnessCondition::NoSeparableInNegative));
    }
    let kernel = kernel_ksep_vectors(v_zero, k, cfg);
    let hat = bipartite::v_hat_truncated(dims, &kernel, k, 1e-8)?;
    if !hat.full.contains_subspace(v_minus, 1e-6) {
        return Err(Error::Hypothesis(WitnessCondition::NegativeInsideProductSubspace));
    }

    let mut evaluations = 0;
    let mut certified = |lam: f64| -> Result<bool> {
        evaluations += 1;
        let w = w_plus * cr(lam) - w_minus;
        Ok(certify(&w, dims, k, cfg)?.is_witness)
    };
    const LIMIT: f64 = 18446744073709551616.0; // 2^64
    let (mut lo, mut hi);
    if certified(1.0)? {
        hi = 1.0;
        lo = 0.5;
        while certified(lo)? {
            hi = lo;
            lo *= 0.5;
            if lo < 1.0 / LIMIT {
                lo = 0.0;
                break;
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        while !certified(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > LIMIT {
                return Err(Error::NoWitnessFound);
            }
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if certified(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BuiltWitness { lambda_star: hi, witness: w_plus * cr(hi) - w_minus, evaluations })
}

/// Inputs of the `C^3 ⊗ C^4` construction.
#[derive(Debug, Clone)]
pub struct C3C4Params {
    /// Coefficients of `ψ₋` on `{e2, e3} ⊗ {f3, f4}` (row = first factor).
    pub psi_block: CMatrix,
    /// Eigenvalue placed on the six vectors outside the kernel and `V̂`.
    pub free_eigenvalue: f64,
}

impl Default for C3C4Params {
    fn default() -> Self {
        let s = 1.0 / 2f64.sqrt();
        C3C4Params {
            psi_block: CMatrix::from_row_slice(2, 2, &[cr(s), cr(0.0), cr(0.0), cr(s)]),
            free_eigenvalue: 0.0,
        }
    }
}

/// Witness on `C^3 ⊗ C^4` with kernel `span{e1⊗f1, e1⊗f2}`, eigenvalue `-1`
/// on `ψ₋`, `ε/(1-ε)` on the rest of `V̂ = span{e2,e3} ⊗ span{f3,f4}` and
/// `free_eigenvalue` on the remaining six directions, where `ε` is the
/// squared top Schmidt coefficient of `ψ₋`.
pub fn example_c3c4(params: &C3C4Params) -> Result<(CMatrix, f64)> {
    let dims = BipartiteDims::new(3, 4)?;
    if params.psi_block.shape() != (2, 2) {
        return Err(Error::Shape { expected: "2x2".into(), got: format!("{:?}", params.psi_block.shape()) });
    }
    if !(params.free_eigenvalue >= 0.0) || !params.free_eigenvalue.is_finite() {
        return Err(Error::InvalidArgument("free eigenvalue must be finite and nonnegative".into()));
    }
    let mut coords = CVector::zeros(dims.total());
    for a in 0..2 {
        for b in 0..2 {
            coords[dims.index(a + 1, b + 2)] = params.psi_block[(a, b)];
        }
    }
    let psi = PureVector::new(dims, coords)?.normalized()?;
    let s = linalg::singular_values(&params.psi_block);
    let top_sq = s[0] * s[0] / (s[0] * s[0] + s[1] * s[1]);
    if top_sq >= 1.0 - 1e-12 {
        return Err(Error::InvalidArgument("psi must have Schmidt rank 2".into()));
    }
    let eps = top_sq;
    let gens = |pairs: &[(usize, usize)]| {
        let vs: Vec<PureVector> = pairs.iter().map(|&(a, b)| PureVector::basis(dims, a, b)).collect();
        Subspace::span(dims, &vs, 1e-12)
    };
    let kernel = gens(&[(0, 0), (0, 1)])?;
    let hat = gens(&[(1, 2), (1, 3), (2, 2), (2, 3)])?;
    let psi_sub = Subspace::span(dims, &[psi.clone()], 1e-12)?;
    let k_part = hat.intersection(&psi_sub.complement(), 1e-10);
    let l_part = kernel.sum(&hat).complement();
    let w = k_part.projector() * cr(eps / (1.0 - eps)) + l_part.projector() * cr(params.free_eigenvalue)
        - psi.projector();
    Ok((w, eps))
}
