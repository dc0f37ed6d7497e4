//! Subspaces free of low Schmidt rank vectors: the explicit diagonal
//! construction, UPB complements, and numerical certificates for the
//! absence (or presence) of Schmidt-rank-`<= k` vectors.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::bipartite::{self, BipartiteDims, CoordMatrix, PureVector, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMatrix, CVector, C64};
use crate::optim::{self, OptimizerConfig, TracePoint};

/// Best (smallest) trailing singular value found over the unit sphere of a
/// subspace.
#[derive(Debug, Clone)]
pub struct DefectCertificate {
    /// `min σ_{k+1}(𝔄(Ψ))` over the sampled unit vectors.
    pub value: f64,
    pub argmin: PureVector,
    pub starts: usize,
    pub converged_starts: usize,
    pub trace: Vec<TracePoint>,
}

/// `σ_{k+1}` of the coordinate matrix of `psi / ‖psi‖`; zero when `k >= d1`.
pub fn schmidt_defect(psi: &PureVector, k: usize) -> f64 {
    let s = linalg::singular_values(&bipartite::reshape(psi.dims(), psi.coords()));
    let n = psi.norm();
    if n == 0.0 {
        return 0.0;
    }
    s.get(k).copied().unwrap_or(0.0) / n
}

/// Span of the `(d1-k)(d2-k)` diagonal generators
/// `g_{m,n} = Σ_{i=0..=k} e_{m+i} ⊗ f_{n+i}` (0-based), orthonormalized in
/// lexicographic `(m, n)` order.
///
/// For `k >= 2` and `d1 >= k + 2` the span contains `g_{0,0} - g_{1,1}`,
/// which has Schmidt rank 2, so the result is not k-entangled there.
pub fn vmax_subspace(dims: BipartiteDims, k: usize) -> Result<Subspace> {
    if k == 0 {
        return Err(Error::KOutOfRange { k, d1: dims.d1() });
    }
    if k >= dims.d1() {
        return Err(Error::WholeSpace { k, d1: dims.d1() });
    }
    let mut gens = Vec::new();
    for m in 0..dims.d1() - k {
        for n in 0..dims.d2() - k {
            let mut v = CVector::zeros(dims.total());
            for i in 0..=k {
                v[dims.index(m + i, n + i)] = cr(1.0);
            }
            gens.push(v);
        }
    }
    Subspace::span_columns(dims, &linalg::columns_to_matrix(dims.total(), &gens), 1e-12)
}

pub(crate) struct DefectRun {
    pub coeffs: CVector,
    /// Trailing singular value of the unit vector built from `coeffs`.
    pub defect: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Multistart BFGS on `σ_{k+1}(𝔄(Q c)) / ‖c_S‖` over complex coefficient
/// vectors `c`, where `S` is `mask` (all coordinates when `None`). The
/// objective is invariant under scaling of `c`, so no sphere constraint is
/// needed during the descent.
pub(crate) fn defect_search(
    dims: BipartiteDims,
    basis: &CMatrix,
    k: usize,
    mask: Option<&[bool]>,
    cfg: &OptimizerConfig,
) -> Vec<DefectRun> {
    let m = basis.ncols();
    let objective = |x: &[f64]| -> (f64, Vec<f64>) {
        let coeffs = CVector::from_fn(m, |j, _| c(x[j], x[m + j]));
        let psi = basis * &coeffs;
        let mat = bipartite::reshape(dims, &psi);
        let dec = linalg::svd(&mat);
        let sigma = dec.s.get(k).copied().unwrap_or(0.0);
        let denom_sq: f64 = coeffs
            .iter()
            .enumerate()
            .filter(|(j, _)| mask.map_or(true, |s| s[*j]))
            .map(|(_, z)| z.norm_sqr())
            .sum();
        let denom = denom_sq.sqrt();
        if denom == 0.0 {
            return (f64::INFINITY, vec![0.0; 2 * m]);
        }
        let f = sigma / denom;
        // z_j = u† 𝔄(b_j) v = Σ_idx conj(u_a) v_b Q[idx, j]
        let mut grad = vec![0.0; 2 * m];
        if k < dec.s.len() {
            let u = dec.u.column(k);
            let v = dec.v.column(k);
            for j in 0..m {
                let mut z = C64::new(0.0, 0.0);
                for a in 0..dims.d1() {
                    let ua = u[a].conj();
                    for b in 0..dims.d2() {
                        z += ua * v[b] * basis[(dims.index(a, b), j)];
                    }
                }
                let in_mask = mask.map_or(true, |s| s[j]);
                let cj = if in_mask { coeffs[j] } else { cr(0.0) };
                let gj = z.conj() / denom - cj * (sigma / (denom * denom * denom));
                grad[j] = gj.re;
                grad[m + j] = gj.im;
            }
        }
        (f, grad)
    };
    optim::run_starts(cfg, |_, rng| {
        let start = linalg::gaussian_vector(rng, m);
        let x0: Vec<f64> = start.iter().map(|z| z.re).chain(start.iter().map(|z| z.im)).collect();
        let res = optim::bfgs(&objective, x0, cfg.max_iterations, cfg.convergence_tol, 1e-15);
        let coeffs = CVector::from_fn(m, |j, _| c(res.x[j], res.x[m + j]));
        let nc = coeffs.norm();
        let coeffs = if nc > 0.0 { coeffs / cr(nc) } else { coeffs };
        let psi = PureVector::new(dims, basis * &coeffs).expect("finite optimizer output");
        DefectRun {
            defect: schmidt_defect(&psi, k),
            coeffs,
            converged: res.converged,
            history: res.history,
        }
    })
}

fn check_k_for_defect(dims: BipartiteDims, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::KOutOfRange { k, d1: dims.d1() });
    }
    if k >= dims.d1() {
        return Err(Error::WholeSpace { k, d1: dims.d1() });
    }
    Ok(())
}

/// Multistart local minimization of `σ_{k+1}` over unit vectors of `v`.
/// Deterministic in `cfg.seed`; ties between starts go to the lowest index.
pub fn min_schmidt_defect(v: &Subspace, k: usize, cfg: &OptimizerConfig) -> Result<DefectCertificate> {
    cfg.validate()?;
    if v.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let dims = v.dims();
    check_k_for_defect(dims, k)?;
    let runs = defect_search(dims, v.basis(), k, None, cfg);
    let best = optim::argmin_by_value(&runs, |r| r.defect).expect("at least one start");
    let trace = if cfg.record_trace {
        runs.iter().enumerate().flat_map(|(i, r)| optim::trace_points(i, &r.history)).collect()
    } else {
        Vec::new()
    };
    Ok(DefectCertificate {
        value: runs[best].defect,
        argmin: v.combine(&runs[best].coeffs),
        starts: runs.len(),
        converged_starts: runs.iter().filter(|r| r.converged).count(),
        trace,
    })
}

/// Grid oracle: minimum of `σ_{k+1}` over a deterministic angular grid on
/// the unit sphere of a subspace of dimension at most 3 (global phase
/// removed). Only an upper bound on the true minimum.
pub fn brute_force_defect(v: &Subspace, k: usize, grid_resolution: usize) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptySubspace);
    }
    if v.dim() > 3 {
        return Err(Error::OracleTooLarge(v.dim()));
    }
    if grid_resolution < 16 {
        return Err(Error::GridTooCoarse(grid_resolution));
    }
    check_k_for_defect(v.dims(), k)?;
    let mut best = f64::INFINITY;
    for_each_grid_point(v.dim(), grid_resolution, |coeffs| {
        best = best.min(schmidt_defect(&v.combine(coeffs), k));
    });
    Ok(best)
}

/// Visits unit coefficient vectors in `C^m` (`m <= 3`) on a grid of
/// hyperspherical angles: polar angles on `[0, π/2]` inclusive, phases on
/// `[0, 2π)`.
pub(crate) fn for_each_grid_point(m: usize, res: usize, mut visit: impl FnMut(&CVector)) {
    let polar = |i: usize| 0.5 * PI * i as f64 / (res - 1) as f64;
    let phase = |i: usize| C64::from_polar(1.0, 2.0 * PI * i as f64 / res as f64);
    match m {
        1 => visit(&CVector::from_vec(vec![cr(1.0)])),
        2 => {
            for i in 0..res {
                let t = polar(i);
                for j in 0..res {
                    visit(&CVector::from_vec(vec![cr(t.cos()), phase(j) * t.sin()]));
                }
            }
        }
        3 => {
            for i in 0..res {
                let t1 = polar(i);
                for i2 in 0..res {
                    let t2 = polar(i2);
                    for j in 0..res {
                        for j2 in 0..res {
                            visit(&CVector::from_vec(vec![
                                cr(t1.cos()),
                                phase(j) * (t1.sin() * t2.cos()),
                                phase(j2) * (t1.sin() * t2.sin()),
                            ]));
                        }
                    }
                }
            }
        }
        _ => unreachable!("grid oracle is limited to dim <= 3"),
    }
}

#[derive(Debug, Clone)]
pub struct KsepSearch {
    pub found: bool,
    /// Unit vector with `σ_{k+1} < defect_tol` when `found`.
    pub vector: Option<PureVector>,
    pub certificate: DefectCertificate,
}

/// Looks for a vector of Schmidt rank `<= k` inside `v`. Any subspace of
/// dimension above `(d1-k)(d2-k)` is guaranteed to contain one.
pub fn contains_ksep(v: &Subspace, k: usize, cfg: &OptimizerConfig) -> Result<KsepSearch> {
    let cert = min_schmidt_defect(v, k, cfg)?;
    let found = cert.value < cfg.defect_tol;
    Ok(KsepSearch { found, vector: found.then(|| cert.argmin.clone()), certificate: cert })
}

/// A set of mutually orthogonal product vectors.
#[derive(Debug, Clone)]
pub struct UpbFamily {
    pub dims: BipartiteDims,
    pub vectors: Vec<PureVector>,
}

/// The five-element "Tiles" unextendible product basis of `C^3 ⊗ C^3`.
pub fn tiles_upb() -> UpbFamily {
    let dims = BipartiteDims::new(3, 3).expect("3x3 is valid");
    let s = 1.0 / 2f64.sqrt();
    let e = |i: usize| {
        let mut v = CVector::zeros(3);
        v[i] = cr(1.0);
        v
    };
    let lin = |a: CVector, b: CVector, scale: f64| (a + b).map(|z| z * scale);
    let neg = |v: CVector| v.map(|z| -z);
    let all = CVector::from_element(3, cr(1.0 / 3f64.sqrt()));
    let pairs = [
        (e(0), lin(e(0), neg(e(1)), s)),
        (e(2), lin(e(1), neg(e(2)), s)),
        (lin(e(0), neg(e(1)), s), e(2)),
        (lin(e(1), neg(e(2)), s), e(0)),
        (all.clone(), all),
    ];
    let vectors = pairs
        .iter()
        .map(|(x, y)| PureVector::product(dims, x, y).expect("factor lengths match"))
        .collect();
    UpbFamily { dims, vectors }
}

/// Orthonormal basis of the orthogonal complement of the span of a UPB.
pub fn upb_complement(upb: &UpbFamily, tol: f64) -> Result<Subspace> {
    let span = Subspace::span(upb.dims, &upb.vectors, tol)?;
    Ok(span.complement())
}

/// All `(k+1)`-element index subsets of `0..n` in lexicographic order.
fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn det(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return cr(1.0);
    }
    m.clone().determinant()
}

/// Real Jacobian of all `(k+1) × (k+1)` minors of a `d1 × d2` matrix at
/// `point`. Rows come in (Re, Im) pairs per minor; columns in (Re, Im)
/// pairs per entry in row-major order, i.e. the real coordinates of the
/// flattened vector.
pub fn minor_jacobian(point: &CoordMatrix, k: usize) -> DMatrix<f64> {
    let dims = point.dims();
    let m = point.entries();
    let rows = combinations(dims.d1(), k + 1);
    let cols = combinations(dims.d2(), k + 1);
    let n_minors = rows.len() * cols.len();
    let mut jac = DMatrix::<f64>::zeros(2 * n_minors, 2 * dims.total());
    let mut r = 0;
    for rs in &rows {
        for cs in &cols {
            for (p, &a) in rs.iter().enumerate() {
                for (q, &b) in cs.iter().enumerate() {
                    let rr: Vec<usize> = rs.iter().copied().filter(|&x| x != a).collect();
                    let cc: Vec<usize> = cs.iter().copied().filter(|&x| x != b).collect();
                    let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                    let cof = det(&submatrix(m, &rr, &cc)) * sign;
                    let col = 2 * dims.index(a, b);
                    // holomorphic: ∂/∂x = cof, ∂/∂y = i cof
                    jac[(2 * r, col)] = cof.re;
                    jac[(2 * r, col + 1)] = -cof.im;
                    jac[(2 * r + 1, col)] = cof.im;
                    jac[(2 * r + 1, col + 1)] = cof.re;
                }
            }
            r += 1;
        }
    }
    jac
}

/// Complex rank of the minor Jacobian at a rank-`k` point, i.e. the local
/// number of independent rank conditions. Computed as half the rank of the
/// real Jacobian.
pub fn variety_jacobian_rank(dims: BipartiteDims, k: usize, point: &CoordMatrix, tol: f64) -> Result<usize> {
    if point.dims() != dims {
        return Err(Error::Shape { expected: format!("{dims:?}"), got: format!("{:?}", point.dims()) });
    }
    if k == 0 || k >= dims.d1() {
        return Err(Error::KOutOfRange { k, d1: dims.d1() });
    }
    let rank = linalg::rank(point.entries(), tol);
    if rank != k {
        return Err(Error::NotRegular { rank, k });
    }
    let jac = minor_jacobian(point, k);
    let s = jac.singular_values();
    let top = s.iter().copied().fold(0.0, f64::max);
    let real_rank = s.iter().filter(|&&x| x > tol * top).count();
    Ok(real_rank / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::vector_from_matrix;

    fn dims(d1: usize, d2: usize) -> BipartiteDims {
        BipartiteDims::new(d1, d2).unwrap()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig { starts: 8, ..OptimizerConfig::default() }
    }

    #[test]
    fn vmax_examples() {
        let v = vmax_subspace(dims(2, 2), 1).unwrap();
        assert_eq!(v.dim(), 1);
        let bell = PureVector::max_entangled(dims(2, 2));
        assert!((v.vector(0).inner(&bell).norm() - 1.0).abs() < 1e-14);
        assert_eq!(vmax_subspace(dims(3, 3), 1).unwrap().dim(), 4);
        let v = vmax_subspace(dims(3, 3), 2).unwrap();
        assert_eq!(v.dim(), 1);
        assert!((schmidt_defect(&v.vector(0), 2) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(matches!(vmax_subspace(dims(2, 3), 2), Err(Error::WholeSpace { .. })));
    }

    #[test]
    fn vmax_dimensions_up_to_five() {
        for d1 in 2..=5 {
            for d2 in d1..=5 {
                for k in 1..d1 {
                    assert_eq!(vmax_subspace(dims(d1, d2), k).unwrap().dim(), (d1 - k) * (d2 - k));
                }
            }
        }
    }

    #[test]
    fn defect_of_bell_span() {
        let d = dims(2, 2);
        let v = Subspace::span(d, &[PureVector::max_entangled(d)], 1e-12).unwrap();
        let cert = min_schmidt_defect(&v, 1, &quick()).unwrap();
        assert!((cert.value - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((brute_force_defect(&v, 1, 16).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn defect_vanishes_on_product_containing_span() {
        let d = dims(2, 2);
        let v = Subspace::span(d, &[PureVector::basis(d, 0, 0), PureVector::max_entangled(d)], 1e-12).unwrap();
        let cert = min_schmidt_defect(&v, 1, &quick()).unwrap();
        assert!(cert.value < 1e-6);
        assert!(brute_force_defect(&v, 1, 16).unwrap() < 1e-12);
        assert!((cert.argmin.norm() - 1.0).abs() < 1e-12);
        assert!(v.contains(&cert.argmin, 1e-10));
    }

    #[test]
    fn singlet_bell_span_contains_a_product_vector() {
        // any 2-dim subspace of C^2 ⊗ C^2 meets the product vectors
        let d = dims(2, 2);
        let s = 1.0 / 2f64.sqrt();
        let singlet =
            PureVector::new(d, CVector::from_vec(vec![cr(0.0), cr(s), cr(-s), cr(0.0)])).unwrap();
        let v = Subspace::span(d, &[singlet, PureVector::max_entangled(d)], 1e-12).unwrap();
        let opt = min_schmidt_defect(&v, 1, &quick()).unwrap().value;
        let grid = brute_force_defect(&v, 1, 64).unwrap();
        assert!(opt < 1e-6, "{opt}");
        assert!(grid >= opt - 1e-6);
        assert!(grid < 0.05);
    }

    #[test]
    fn oracle_limits() {
        let d = dims(2, 2);
        assert!(matches!(brute_force_defect(&Subspace::whole(d), 1, 16), Err(Error::OracleTooLarge(4))));
        let v = vmax_subspace(d, 1).unwrap();
        assert!(matches!(brute_force_defect(&v, 1, 8), Err(Error::GridTooCoarse(8))));
        assert!(matches!(min_schmidt_defect(&Subspace::zero(d), 1, &quick()), Err(Error::EmptySubspace)));
    }

    #[test]
    fn contains_ksep_examples() {
        let cfg = quick();
        let whole = contains_ksep(&Subspace::whole(dims(2, 2)), 1, &cfg).unwrap();
        assert!(whole.found);
        assert!(schmidt_defect(whole.vector.as_ref().unwrap(), 1) < 1e-6);
        let vmax = contains_ksep(&vmax_subspace(dims(3, 3), 1).unwrap(), 1, &cfg).unwrap();
        assert!(!vmax.found);
        assert!(vmax.vector.is_none());
    }

    #[test]
    fn defect_search_is_deterministic() {
        let v = vmax_subspace(dims(3, 3), 1).unwrap();
        let a = min_schmidt_defect(&v, 1, &quick()).unwrap();
        let b = min_schmidt_defect(&v, 1, &quick()).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.argmin, b.argmin);
    }

    #[test]
    fn tiles_structure() {
        let upb = tiles_upb();
        assert_eq!(upb.vectors.len(), 5);
        for (i, a) in upb.vectors.iter().enumerate() {
            assert!((a.norm() - 1.0).abs() < 1e-14);
            assert_eq!(a.schmidt_rank(1e-12).unwrap(), 1);
            for b in &upb.vectors[i + 1..] {
                assert!(a.inner(b).norm() < 1e-12);
            }
        }
        let comp = upb_complement(&upb, 1e-12).unwrap();
        assert_eq!(comp.dim(), 4);
        for u in &upb.vectors {
            assert!(comp.vectors().iter().all(|v| v.inner(u).norm() < 1e-10));
        }
    }

    #[test]
    fn jacobian_single_minor() {
        let d = dims(2, 2);
        let p = CoordMatrix::new(d, CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)])).unwrap();
        let jac = minor_jacobian(&p, 1);
        // only the (2,2) entry carries a nonzero derivative
        for col in 0..8 {
            let nonzero = jac.column(col).iter().any(|x| x.abs() > 0.0);
            assert_eq!(nonzero, col / 2 == d.index(1, 1), "column {col}");
        }
        assert_eq!(variety_jacobian_rank(d, 1, &p, 1e-10).unwrap(), 1);
        let p3 = CoordMatrix::new(dims(3, 3), {
            let mut m = CMatrix::zeros(3, 3);
            m[(0, 0)] = cr(1.0);
            m
        })
        .unwrap();
        assert_eq!(variety_jacobian_rank(dims(3, 3), 1, &p3, 1e-10).unwrap(), 4);
    }

    #[test]
    fn jacobian_rejects_off_variety_points() {
        let d = dims(2, 2);
        let p = coord_of(&PureVector::max_entangled(d));
        assert!(matches!(variety_jacobian_rank(d, 1, &p, 1e-10), Err(Error::NotRegular { rank: 2, k: 1 })));
    }

    fn coord_of(v: &PureVector) -> CoordMatrix {
        bipartite::coord_matrix(v)
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 3).len(), 10);
        assert_eq!(combinations(4, 2)[0], vec![0, 1]);
        let _ = vector_from_matrix;
    }
}
