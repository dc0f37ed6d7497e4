use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_witness::bipartite::{self, CoordMatrix};
use spectral_witness::detect;
use spectral_witness::linalg::{self, c, cr, CMatrix};
use spectral_witness::maps::{self, Normalization};
use spectral_witness::subspace;
use spectral_witness::witness::{self, C3C4Params};
use spectral_witness::{BipartiteDims, OptimizerConfig, PureVector, Subspace};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn dims(d1: usize, d2: usize) -> BipartiteDims {
    BipartiteDims::new(d1, d2).unwrap()
}

fn span1(v: PureVector) -> Subspace {
    let d = v.dims();
    Subspace::span(d, &[v], 1e-12).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    (&g + g.adjoint()) * cr(0.5)
}

fn criterion_1() -> Outcome {
    let r = detect::two_qubit_signature_experiment(500, 2024, 1e-9).unwrap();
    let hits = r.signature_histogram.get(&(3, 1, 0)).copied().unwrap_or(0);
    outcome(hits == 500 && r.signature_histogram.len() == 1, format!("histogram {:?}", r.signature_histogram))
}

fn criterion_2() -> Outcome {
    let cfg = OptimizerConfig::default();
    let e2 = witness::epsilon_min(&span1(PureVector::max_entangled(dims(2, 2))), &cfg).unwrap().value;
    let e3 = witness::epsilon_min(&span1(PureVector::max_entangled(dims(3, 3))), &cfg).unwrap().value;
    let pass = (e2 - 0.5).abs() <= 1e-6 && (e3 - 1.0 / 3.0).abs() <= 1e-6;
    outcome(pass, format!("eps(Bell2) = {e2:.12}, eps(max-ent 3x3) = {e3:.12}"))
}

fn bell_witness(eps: f64) -> CMatrix {
    CMatrix::identity(4, 4) * cr(eps) - PureVector::max_entangled(dims(2, 2)).projector()
}

fn criterion_3() -> Outcome {
    let cfg = OptimizerConfig::default();
    let d = dims(2, 2);
    let certified = |e: f64| witness::is_k_witness(&bell_witness(e), d, 1, &cfg).unwrap().is_witness;
    let (mut lo, mut hi) = (0.3, 0.7);
    let bracket = !certified(lo) && certified(hi);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if certified(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let flip = 0.5 * (lo + hi);
    let at_half = witness::min_over_sk(&bell_witness(0.5), d, 1, &cfg).unwrap().value;
    let pass = bracket && (flip - 0.5).abs() <= 1e-4 && at_half.abs() <= 1e-6;
    outcome(pass, format!("flip at eps = {flip:.8}, min over S_1 at 0.5 = {at_half:.3e}"))
}

fn criterion_4() -> Outcome {
    let v = subspace::vmax_subspace(dims(3, 3), 1).unwrap();
    let values: Vec<f64> = (0..50)
        .map(|s| {
            let cfg = OptimizerConfig::default().with_seed(s).with_starts(4);
            subspace::min_schmidt_defect(&v, 1, &cfg).unwrap().value
        })
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let g22 = subspace::brute_force_defect(&subspace::vmax_subspace(dims(2, 2), 1).unwrap(), 1, 16).unwrap();
    let g33 = subspace::brute_force_defect(&subspace::vmax_subspace(dims(3, 3), 2).unwrap(), 2, 16).unwrap();
    let pass = v.dim() == 4
        && lo > 1e-3
        && spread < 1e-6
        && (g22 - 1.0 / 2f64.sqrt()).abs() <= 1e-9
        && (g33 - 1.0 / 3f64.sqrt()).abs() <= 1e-9;
    outcome(
        pass,
        format!("dim {}, defect in [{lo:.12}, {hi:.12}] (rel spread {spread:.1e}), grid {g22:.12} / {g33:.12}", v.dim()),
    )
}

fn criterion_5() -> Outcome {
    let d = dims(3, 3);
    let mut failures = Vec::new();
    let mut cleared = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let g = CMatrix::from_fn(9, 5, |_, _| linalg::gaussian_vector(&mut rng, 1)[0]);
        let v = Subspace::new(d, linalg::orthonormalize(&g, 1e-10)).unwrap();
        let cfg = OptimizerConfig::default().with_seed(seed);
        let r = subspace::contains_ksep(&v, 1, &cfg).unwrap();
        if !(r.found && r.certificate.value < 1e-6) {
            failures.push(seed);
            let retry = subspace::contains_ksep(&v, 1, &cfg.clone().with_starts(128)).unwrap();
            if retry.found {
                cleared += 1;
            }
        }
    }
    let pass = failures.len() <= 1 && cleared == failures.len();
    outcome(pass, format!("{} / 100 found, failing seeds {failures:?}, cleared on retry {cleared}", 100 - failures.len()))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d1, d2) in [(2, 2), (2, 3), (3, 3)] {
        let d = dims(d1, d2);
        let mut rng = ChaCha8Rng::seed_from_u64(6 + d1 as u64 * 10 + d2 as u64);
        for _ in 0..100 {
            let w = random_hermitian(&mut rng, d.total());
            let map = maps::to_map(&w, d, 1e-12, Normalization::Paper).unwrap();
            let back = maps::to_witness(&map).unwrap();
            worst = worst.max(linalg::max_abs(&(back - w)));
        }
    }
    outcome(worst < 1e-10, format!("max roundtrip error {worst:.2e}"))
}

/// `(1/d1²) Σ_ij E_ij ⊗ Λ(E_ij)` assembled from Kraus sums written out here.
fn choi_oracle(map: &maps::HermPreservingMap) -> CMatrix {
    let (d1, d2) = (map.input_dim, map.output_dim);
    let mut w = CMatrix::zeros(d1 * d2, d1 * d2);
    for i in 0..d1 {
        for j in 0..d1 {
            for a in 0..d2 {
                for b in 0..d2 {
                    let mut z = cr(0.0);
                    for k in &map.kraus_plus {
                        z += k[(a, i)] * k[(b, j)].conj();
                    }
                    for k in &map.kraus_minus {
                        z -= k[(a, i)] * k[(b, j)].conj();
                    }
                    w[(i * d2 + a, j * d2 + b)] = z / cr((d1 * d1) as f64);
                }
            }
        }
    }
    w
}

fn criterion_7() -> Outcome {
    let mut worst_gram: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for (d1, d2) in [(2, 2), (2, 3), (3, 3)] {
        let d = dims(d1, d2);
        let mut rng = ChaCha8Rng::seed_from_u64(70 + d1 as u64 * 10 + d2 as u64);
        for _ in 0..30 {
            let w = random_hermitian(&mut rng, d.total());
            let map = maps::to_map(&w, d, 1e-12, Normalization::Paper).unwrap();
            let g = map.gram();
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    if i != j {
                        worst_gram = worst_gram.max(g[(i, j)].norm());
                    }
                }
            }
            worst_rec = worst_rec.max(linalg::max_abs(&(choi_oracle(&map) - &w)));
        }
    }
    outcome(
        worst_gram < 1e-10 && worst_rec < 1e-10,
        format!("max off-diagonal Gram {worst_gram:.2e}, max reconstruction error {worst_rec:.2e}"),
    )
}

/// One negative eigenvalue on a random vector, an optional zero eigenvalue
/// and positive eigenvalues scaled around the tight fraction bound, so that
/// both witnesses and non-witnesses are drawn.
fn random_configuration(rng: &mut ChaCha8Rng, d: BipartiteDims) -> CMatrix {
    let n = d.total();
    let u = linalg::haar_unitary(rng, n);
    let zeros = if rng.random_bool(0.3) { 1 } else { 0 };
    let neg = rng.random_range(0.5..1.5);
    let m = CMatrix::from_fn(d.d1(), d.d2(), |i, j| u[(i * d.d2() + j, 0)]);
    let top = linalg::singular_values(&m)[0].powi(2);
    let tight = top / (1.0 - top) * neg;
    let scale = tight * 2f64.powf(rng.random_range(-1.5..1.5));
    let mut w = CMatrix::zeros(n, n);
    for i in 0..n {
        let lam = if i == 0 {
            -neg
        } else if i <= zeros {
            0.0
        } else {
            scale * rng.random_range(0.7..1.3)
        };
        let col = u.column(i).into_owned();
        w += &col * col.adjoint() * cr(lam);
    }
    w
}

fn criterion_8() -> Outcome {
    let cfg = OptimizerConfig::default();
    let (mut certified, mut nec_bad, mut suff_bad, mut suff_true) = (0, 0, 0, 0);
    for (d1, d2) in [(2, 2), (2, 3)] {
        let d = dims(d1, d2);
        let mut rng = ChaCha8Rng::seed_from_u64(800 + d2 as u64);
        for _ in 0..100 {
            let w = random_configuration(&mut rng, d);
            let r = witness::is_k_witness(&w, d, 1, &cfg).unwrap();
            let (nec, suff) = (r.necessary_eig_holds.unwrap(), r.sufficient_eig_holds.unwrap());
            if r.is_witness {
                certified += 1;
                if !nec {
                    nec_bad += 1;
                }
            }
            if suff {
                suff_true += 1;
                if !r.is_witness {
                    suff_bad += 1;
                }
            }
        }
    }
    outcome(
        nec_bad == 0 && suff_bad == 0,
        format!(
            "{certified} certified of 200; necessary-condition counterexamples {nec_bad}; \
             sufficient true {suff_true} times with {suff_bad} uncertified"
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = OptimizerConfig::default();
    let upb = subspace::tiles_upb();
    let mut worst: f64 = 0.0;
    for (i, a) in upb.vectors.iter().enumerate() {
        for b in &upb.vectors[i + 1..] {
            worst = worst.max(a.inner(b).norm());
        }
    }
    let comp = subspace::upb_complement(&upb, 1e-12).unwrap();
    let defect = subspace::min_schmidt_defect(&comp, 1, &cfg).unwrap().value;
    let eps_min = witness::epsilon_min(&comp, &cfg).unwrap().value;
    let n = 9;
    let w = CMatrix::identity(n, n) - comp.projector() * cr(1.1);
    let cert = witness::certify(&w, comp.dims(), 1, &cfg).unwrap();
    let threshold = 1.0 / eps_min - 1.0;
    let pass = upb.vectors.len() == 5 && worst < 1e-12 && comp.dim() == 4 && defect > 1e-3 && cert.is_witness;
    outcome(
        pass,
        format!(
            "max overlap {worst:.1e}, complement dim {}, defect {defect:.6}, eps_min {eps_min:.6}, \
             min over S_1 of I - 1.1 P = {:.6}; certifiable only for eps <= {threshold:.6}",
            comp.dim(),
            cert.minimum.value
        ),
    )
}

/// Criterion 9 cannot hold at eps = 0.1: the complement's sup norm exceeds
/// 1/1.1. Checks that the refutation is an explicit product vector and that
/// the family does certify below the computed threshold.
fn criterion_9_refutation_is_explicit() -> bool {
    let cfg = OptimizerConfig::default();
    let comp = subspace::upb_complement(&subspace::tiles_upb(), 1e-12).unwrap();
    let w = CMatrix::identity(9, 9) - comp.projector() * cr(1.1);
    let cert = witness::certify(&w, comp.dims(), 1, &cfg).unwrap();
    let v = &cert.minimum.argmin;
    let product = bipartite::schmidt(v, 1e-8).unwrap().rank == 1;
    let negative = witness::expectation(&w, v) < -0.05;
    let below = CMatrix::identity(9, 9) - comp.projector() * cr(1.02);
    let certifies_below = witness::certify(&below, comp.dims(), 1, &cfg).unwrap().is_witness;
    product && negative && certifies_below
}

fn leibniz_det(m: &CMatrix) -> linalg::C64 {
    let n = m.nrows();
    if n == 0 {
        return cr(1.0);
    }
    let mut total = cr(0.0);
    for j in 0..n {
        let minor = m.clone().remove_row(0).remove_column(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += m[(0, j)] * leibniz_det(&minor) * sign;
    }
    total
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    if n < r {
        return vec![];
    }
    let mut out = subsets(n - 1, r);
    for mut s in subsets(n - 1, r - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.sort();
    out
}

/// Real and imaginary parts of every `(k+1)`-minor, ordered like the
/// library's Jacobian rows.
fn minor_values(m: &CMatrix, k: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for rs in subsets(m.nrows(), k + 1) {
        for cs in subsets(m.ncols(), k + 1) {
            let sub = CMatrix::from_fn(k + 1, k + 1, |i, j| m[(rs[i], cs[j])]);
            let det = leibniz_det(&sub);
            out.push(det.re);
            out.push(det.im);
        }
    }
    out
}

fn fd_jacobian(m: &CMatrix, k: usize) -> DMatrix<f64> {
    let (d1, d2) = m.shape();
    let h = 1e-6;
    let rows = minor_values(m, k).len();
    let mut jac = DMatrix::zeros(rows, 2 * d1 * d2);
    for idx in 0..d1 * d2 {
        for part in 0..2 {
            let step = if part == 0 { cr(h) } else { c(0.0, h) };
            let mut plus = m.clone();
            let mut minus = m.clone();
            plus[(idx / d2, idx % d2)] += step;
            minus[(idx / d2, idx % d2)] -= step;
            let (fp, fm) = (minor_values(&plus, k), minor_values(&minus, k));
            for r in 0..rows {
                jac[(r, 2 * idx + part)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
    }
    jac
}

fn criterion_10() -> Outcome {
    let mut rank_failures = Vec::new();
    let mut worst_rel: f64 = 0.0;
    let mut checked = 0;
    for d1 in 2..=4 {
        for d2 in d1..=5 {
            for k in 1..d1 {
                let d = dims(d1, d2);
                let mut rng = ChaCha8Rng::seed_from_u64((100 * d1 + 10 * d2 + k) as u64);
                for _ in 0..20 {
                    let x = CMatrix::from_fn(d1, k, |_, _| linalg::gaussian_vector(&mut rng, 1)[0]);
                    let y = CMatrix::from_fn(k, d2, |_, _| linalg::gaussian_vector(&mut rng, 1)[0]);
                    let point = CoordMatrix::new(d, x * y).unwrap();
                    let r = subspace::variety_jacobian_rank(d, k, &point, 1e-8).unwrap();
                    if r != (d1 - k) * (d2 - k) {
                        rank_failures.push((d1, d2, k, r));
                    }
                    let an = subspace::minor_jacobian(&point, k);
                    let fd = fd_jacobian(point.entries(), k);
                    worst_rel = worst_rel.max((&an - &fd).norm() / an.norm());
                    checked += 1;
                }
            }
        }
    }
    outcome(
        rank_failures.is_empty() && worst_rel < 1e-5,
        format!("{checked} points; rank mismatches {rank_failures:?}; max relative Jacobian gap {worst_rel:.2e}"),
    )
}

fn criterion_11() -> Outcome {
    let cfg = OptimizerConfig::default();
    let mut details = Vec::new();
    let mut pass = true;
    for (d, expect) in [(dims(2, 2), 1.0), (dims(3, 3), 0.5)] {
        let vm = span1(PureVector::max_entangled(d));
        let vp = vm.complement();
        let b = witness::build_witness(&vp, &Subspace::zero(d), &vm, &vp.projector(), &vm.projector(), 1, &cfg)
            .unwrap();
        let below = vp.projector() * cr(b.lambda_star * (1.0 - 1e-4)) - vm.projector();
        let fails_below = !witness::certify(&below, d, 1, &cfg).unwrap().is_witness;
        pass &= (b.lambda_star - expect).abs() <= 1e-4 && fails_below;
        details.push(format!("lambda* = {:.8} (fails below: {fails_below})", b.lambda_star));
    }
    outcome(pass, details.join(", "))
}

fn criterion_12() -> Outcome {
    let cfg = OptimizerConfig::default();
    let d = dims(3, 4);
    let (w0, eps) = witness::example_c3c4(&C3C4Params::default()).unwrap();
    let r0 = witness::is_k_witness(&w0, d, 1, &cfg).unwrap();
    let raised = C3C4Params { free_eigenvalue: 5.0, ..C3C4Params::default() };
    let (w5, _) = witness::example_c3c4(&raised).unwrap();
    let r5 = witness::is_k_witness(&w5, d, 1, &cfg).unwrap();
    outcome(
        r0.is_witness && r5.is_witness && (eps - 0.5).abs() <= 1e-6,
        format!("eps = {eps}, certified (free 0) {}, certified (free 5) {}", r0.is_witness, r5.is_witness),
    )
}

fn criterion_13() -> Outcome {
    let cfg = OptimizerConfig::default();
    let candidates = detect::corpus_candidates(13, 12, &cfg).unwrap();
    let mut certified = 0;
    let mut violations: Vec<String> = Vec::new();
    for cand in &candidates {
        let (d, k) = (cand.dims, cand.k);
        let r = witness::is_k_witness(&cand.w, d, k, &cfg).unwrap();
        if !r.is_witness {
            continue;
        }
        certified += 1;
        let split = witness::spectral_split(&cand.w, d, cfg.zero_band).unwrap();
        let tag = format!("{}:{}x{} k={} seed {}", cand.family, d.d1(), d.d2(), k, cand.seed);
        let bound = (d.d1() - k) * (d.d2() - k);
        // Prop 1: no vector of the negative eigenspace has Schmidt rank <= k
        let neg_defect = subspace::min_schmidt_defect(&split.v_minus, k, &cfg).unwrap().value;
        if neg_defect < cfg.defect_tol {
            violations.push(format!("P1 {tag}"));
        }
        let (p, q, _) = split.signature();
        if !(1 <= q && q <= bound) {
            violations.push(format!("P2 {tag}"));
        }
        let kernel = witness::kernel_ksep_vectors(&split.v_zero, k, &cfg);
        if kernel.is_empty() && p < k * (d.d1() + d.d2()) - k * k {
            violations.push(format!("P3 {tag}"));
        }
        let map = maps::to_map(&cand.w, d, cfg.zero_band, Normalization::Paper).unwrap();
        let b = maps::check_signature_bounds(&map, k, &cfg).unwrap();
        if !b.prop4_holds {
            violations.push(format!("P4 {tag}"));
        }
        if !b.prop5_holds {
            violations.push(format!("P5 {tag}"));
        }
    }
    outcome(
        certified >= 200 && violations.is_empty(),
        format!("{certified} certified of {} candidates; violations {violations:?}", candidates.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("two-qubit signature", criterion_1),
        ("epsilon_min fixed points", criterion_2),
        ("tight witness boundary", criterion_3),
        ("V_max certification", criterion_4),
        ("dimension bound forces k-separable vectors", criterion_5),
        ("Jamiolkowski roundtrip", criterion_6),
        ("Kraus-Choi orthogonality and reconstruction", criterion_7),
        ("eigenvalue conditions", criterion_8),
        ("Tiles UPB witness", criterion_9),
        ("variety Jacobian rank", criterion_10),
        ("lambda-scaling builder", criterion_11),
        ("C3 x C4 construction", criterion_12),
        ("corpus sweeps", criterion_13),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let line = format!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        writeln!(std::io::stdout(), "{line}").unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    // 9 is unattainable as stated (see criterion_9_refutation_is_explicit);
    // it stays red in the report and is held to its documented failure mode
    assert!(criterion_9_refutation_is_explicit(), "criterion 9 failure is not the documented one");
    failed.retain(|&c| c != 9);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
