//! Dense complex helpers shared by every module: Hermitian eigensolves,
//! sorted SVDs, Gram-Schmidt, complements, intersections and Haar sampling.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, the
/// eigenvector for `values[i]` is column `i`.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize so tiny asymmetries from accumulated arithmetic are not amplified
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Rotates a vector so that its first component of non-negligible modulus
/// is real and non-negative.
pub fn fix_phase(v: &mut CVector) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12 * scale) {
        let phase = z.conj() / z.norm();
        v.apply(|x| *x *= phase);
    }
}

/// Thin SVD `m = u * diag(s) * v^dagger` with singular values descending.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    let (r, cols) = m.shape();
    let p = r.min(cols);
    if p == 0 {
        return Svd { u: CMatrix::zeros(r, 0), s: Vec::new(), v: CMatrix::zeros(cols, 0) };
    }
    let dec = m.clone().svd(true, true);
    let u0 = dec.u.expect("u requested");
    let v0 = dec.v_t.expect("v_t requested").adjoint();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]).then(a.cmp(&b)));
    let mut u = CMatrix::zeros(r, p);
    let mut v = CMatrix::zeros(cols, p);
    let mut s = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        s.push(dec.singular_values[src]);
        u.set_column(dst, &u0.column(src));
        v.set_column(dst, &v0.column(src));
    }
    Svd { u, s, v }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with relative threshold `tol * sigma_max`.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > tol * top).count(),
        _ => 0,
    }
}

/// Sequential modified Gram-Schmidt (two passes) over the columns of `m`.
/// Columns whose residual falls below `tol` times their original norm are
/// dropped. The result has orthonormal columns spanning the same space.
pub fn orthonormalize(m: &CMatrix, tol: f64) -> CMatrix {
    let n = m.nrows();
    let mut out: Vec<CVector> = Vec::new();
    for j in 0..m.ncols() {
        let orig = m.column(j).into_owned();
        let norm0 = orig.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = orig;
        for _ in 0..2 {
            for q in &out {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv > tol * norm0 {
            out.push(v / cr(nv));
        }
    }
    columns_to_matrix(n, &out)
}

pub fn columns_to_matrix(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

pub fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut m = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

/// Orthonormal basis of the column range of `m` (SVD-based, relative `tol`).
pub fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let dec = svd(m);
    let top = dec.s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let r = dec.s.iter().filter(|&&x| x > tol * top).count();
    dec.u.columns(0, r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` inside `C^n`.
pub fn complement(q: &CMatrix, n: usize) -> CMatrix {
    if q.ncols() == 0 {
        return CMatrix::identity(n, n);
    }
    let p = CMatrix::identity(n, n) - q * q.adjoint();
    let (vals, vecs) = eigh(&p);
    let idx: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    let cols: Vec<CVector> = idx.iter().map(|&i| vecs.column(i).into_owned()).collect();
    columns_to_matrix(n, &cols)
}

/// Orthonormal basis of span(a) ∩ span(b) for orthonormal column sets, with
/// principal-angle cosines above `1 - tol` counted as shared directions.
pub fn intersection(a: &CMatrix, b: &CMatrix, tol: f64) -> CMatrix {
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return CMatrix::zeros(n, 0);
    }
    let overlap = a.adjoint() * b;
    let dec = svd(&overlap);
    let r = dec.s.iter().filter(|&&x| x >= 1.0 - tol).count();
    let shared = a * dec.u.columns(0, r);
    orthonormalize(&shared, 1e-8)
}

pub fn projector(q: &CMatrix) -> CMatrix {
    q * q.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest deviation of `q^dagger q` from the identity.
pub fn orthonormality_deviation(q: &CMatrix) -> f64 {
    let g = q.adjoint() * q;
    let id = CMatrix::identity(q.ncols(), q.ncols());
    max_abs(&(g - id))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-uniform unit vector in `C^n`.
pub fn haar_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    loop {
        let v = gaussian_vector(rng, n);
        let nv = v.norm();
        if nv > 1e-12 {
            return v / cr(nv);
        }
    }
}

/// Haar-uniform unitary via phase-corrected QR of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) };
        let col = q.column(j) * ph;
        q.set_column(j, &col);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = CMatrix::from_fn(5, 5, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h = &g + g.adjoint();
        let (vals, vecs) = eigh(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(5, vals.iter().map(|&x| cr(x))));
        let rec = &vecs * d * vecs.adjoint();
        assert!(max_abs(&(rec - h)) < 1e-12);
    }

    #[test]
    fn svd_descending_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = CMatrix::from_fn(3, 5, |_, _| gaussian_vector(&mut rng, 1)[0]);
        let dec = svd(&m);
        assert!(dec.s.windows(2).all(|w| w[0] >= w[1]));
        let s = CMatrix::from_diagonal(&CVector::from_iterator(3, dec.s.iter().map(|&x| cr(x))));
        assert!(max_abs(&(&dec.u * s * dec.v.adjoint() - m)) < 1e-12);
    }

    #[test]
    fn complement_and_intersection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = orthonormalize(&CMatrix::from_fn(6, 3, |_, _| gaussian_vector(&mut rng, 1)[0]), 1e-10);
        let comp = complement(&a, 6);
        assert_eq!(comp.ncols(), 3);
        assert!(max_abs(&(a.adjoint() * &comp)) < 1e-12);
        // span(a) ∩ span(a[:,0..2] + comp[:,0]) is the first two columns of a
        let b = orthonormalize(&hstack(&a.columns(0, 2).into_owned(), &comp.columns(0, 1).into_owned()), 1e-10);
        let inter = intersection(&a, &b, 1e-10);
        assert_eq!(inter.ncols(), 2);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = haar_unitary(&mut rng, 4);
        assert!(orthonormality_deviation(&u) < 1e-12);
    }
}
