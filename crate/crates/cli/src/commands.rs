use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use spectral_witness::witness::{self, ConditionCheck};
use spectral_witness::{bipartite, detect, maps, subspace};
use spectral_witness::{BipartiteDims, Error, Normalization, PureVector};

use crate::args::{Command, Experiment, RunConfig};
use crate::document::{Kind, MatrixDocument};
use crate::report::{condition_name, CliError, Outcome, Status};

pub fn read_document(path: &Path) -> Result<MatrixDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    MatrixDocument::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn doc_value(doc: &MatrixDocument) -> Value {
    serde_json::to_value(doc).expect("documents serialize")
}

fn vector_value(psi: &PureVector) -> Value {
    doc_value(&MatrixDocument::from_vector(psi))
}

fn check_value(c: &ConditionCheck) -> Value {
    json!({
        "holds": c.holds,
        "counterexample": c.counterexample.as_ref().map(vector_value),
    })
}

fn normalization(cfg: &RunConfig) -> Normalization {
    if cfg.normalized {
        Normalization::Unit
    } else {
        Normalization::Paper
    }
}

/// Constructive violations win over convergence: a vector with negative
/// expectation is a proof regardless of how the search ended.
fn verdict(has_negative: bool, violated: bool, converged_starts: usize) -> Status {
    if !has_negative || violated {
        Status::Violated
    } else if converged_starts == 0 {
        Status::Inconclusive
    } else {
        Status::Holds
    }
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opt = cfg.optimizer();
    opt.validate()?;
    match command {
        Command::Schmidt { input } => schmidt(&read_document(input)?, cfg),
        Command::WitnessCheck { input } => witness_check(&read_document(input)?, cfg),
        Command::WitnessBuild { input } => witness_build(&read_document(input)?, cfg),
        Command::Projector { input, epsilon } => projector(&read_document(input)?, *epsilon, cfg),
        Command::Epsmin { input } => epsmin(&read_document(input)?, cfg),
        Command::Vmax { dims } => vmax(dims, cfg),
        Command::SubspaceCertify { input } => subspace_certify(&read_document(input)?, cfg),
        Command::Map { input } => map(&read_document(input)?, cfg),
        Command::Experiment { which: Experiment::TwoQubitSignature { trials } } => experiment(*trials, cfg),
    }
}

pub fn schmidt(doc: &MatrixDocument, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let psi = doc.to_vector()?;
    let data = bipartite::schmidt(&psi, cfg.tol)?;
    let mut out = Outcome::new("schmidt", Status::Holds);
    out.set("dims", vec![doc.dims[0], doc.dims[1]]);
    out.set("rank", data.rank);
    out.set("coefficients", data.coefficients.clone());
    out.text = Some(format!("rank: {}, coefficients: {:?}", data.rank, data.coefficients));
    Ok(out)
}

pub fn witness_check(doc: &MatrixDocument, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (dims, w) = doc.to_observable()?;
    let r = witness::is_k_witness(&w, dims, cfg.k, &cfg.optimizer())?;
    let status = verdict(r.lambda_min < -cfg.witness_tol, r.violating_vector.is_some(), r.converged_starts);
    let mut out = Outcome::new("witness-check", status);
    let (p, q, z) = r.signature;
    out.set("k", r.k)
        .set("is_witness", r.is_witness)
        .set("min_over_sk", r.min_over_sk)
        .set("lambda_min", r.lambda_min)
        .set("signature", vec![p, q, z])
        .set("reason", r.reason.clone())
        .set("condition1", check_value(&r.condition1))
        .set("condition2", check_value(&r.condition2))
        .set("condition3", check_value(&r.condition3))
        .set("necessary_eig_holds", r.necessary_eig_holds)
        .set("sufficient_eig_holds", r.sufficient_eig_holds)
        .set("starts", r.starts)
        .set("converged_starts", r.converged_starts)
        .set("minimizer", vector_value(&r.minimizer))
        .set("detecting_vector", r.detecting_vector.as_ref().map(vector_value))
        .set("violating_vector", r.violating_vector.as_ref().map(vector_value));
    out.trace = r.trace;
    Ok(out)
}

pub fn witness_build(doc: &MatrixDocument, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (dims, w) = doc.to_observable()?;
    let opt = cfg.optimizer();
    let split = witness::spectral_split(&w, dims, cfg.tol)?;
    let built = witness::build_witness(
        &split.v_plus,
        &split.v_zero,
        &split.v_minus,
        &split.w_plus,
        &split.w_minus,
        cfg.k,
        &opt,
    );
    match built {
        Ok(b) => {
            let mut out = Outcome::new("witness-build", Status::Holds);
            out.set("k", cfg.k)
                .set("lambda_star", b.lambda_star)
                .set("evaluations", b.evaluations)
                .set("witness", doc_value(&MatrixDocument::from_observable(dims, &b.witness)));
            Ok(out)
        }
        Err(Error::Hypothesis(c)) => {
            let mut out = Outcome::new("witness-build", Status::Violated);
            out.set("k", cfg.k).set("failed_condition", condition_name(c)).set("reason", c.to_string());
            Ok(out)
        }
        Err(Error::NoWitnessFound) => {
            let mut out = Outcome::new("witness-build", Status::Inconclusive);
            out.set("k", cfg.k).set("reason", Error::NoWitnessFound.to_string());
            Ok(out)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn projector(doc: &MatrixDocument, epsilon: f64, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let v = doc.to_subspace(cfg.tol)?;
    let dims = v.dims();
    let opt = cfg.optimizer();
    let w = witness::projector_witness(&v, epsilon)?;
    let eps_min = witness::epsilon_min(&v, &opt)?;
    let cert = witness::certify(&w, dims, cfg.k, &opt)?;
    let violated = cert.minimum.value < -cfg.witness_tol;
    let status = verdict(cert.lambda_min < -cfg.witness_tol, violated, cert.minimum.converged_starts);
    let mut out = Outcome::new("projector", status);
    out.set("k", cfg.k)
        .set("epsilon", epsilon)
        .set("epsilon_min", eps_min.value)
        .set("is_witness", cert.is_witness)
        .set("min_over_sk", cert.minimum.value)
        .set("lambda_min", cert.lambda_min)
        .set("starts", cert.minimum.starts)
        .set("converged_starts", cert.minimum.converged_starts)
        .set("violating_vector", violated.then(|| vector_value(&cert.minimum.argmin)))
        .set("witness", doc_value(&MatrixDocument::from_observable(dims, &w)));
    out.trace = cert.minimum.trace;
    Ok(out)
}

pub fn epsmin(doc: &MatrixDocument, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let v = doc.to_subspace(cfg.tol)?;
    let e = witness::epsilon_min(&v, &cfg.optimizer())?;
    let status = if e.converged_starts == 0 { Status::Inconclusive } else { Status::Holds };
    let mut out = Outcome::new("epsmin", status);
    out.set("dim", v.dim())
        .set("epsilon_min", e.value)
        .set("starts", e.starts)
        .set("converged_starts", e.converged_starts)
        .set("argmax", vector_value(&e.argmax));
    out.trace = e.trace;
    Ok(out)
}

pub fn vmax(dims: &[usize], cfg: &RunConfig) -> Result<Outcome, CliError> {
    let [d1, d2] = dims else {
        return Err(CliError::Input("--dims takes two values".into()));
    };
    let d = BipartiteDims::new(*d1, *d2)?;
    let v = subspace::vmax_subspace(d, cfg.k)?;
    let doc = MatrixDocument::from_subspace(&v);
    let mut out = Outcome::new("vmax", Status::Holds);
    out.set("k", cfg.k).set("dim", v.dim()).set("subspace", doc_value(&doc));
    out.text = Some(format!("dim: {}\n{}", v.dim(), doc.emit()));
    Ok(out)
}

pub fn subspace_certify(doc: &MatrixDocument, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let v = doc.to_subspace(cfg.tol)?;
    let d = v.dims();
    let r = subspace::contains_ksep(&v, cfg.k, &cfg.optimizer())?;
    let status = if r.found {
        Status::Violated
    } else if r.certificate.converged_starts == 0 {
        Status::Inconclusive
    } else {
        Status::Holds
    };
    let mut out = Outcome::new("subspace-certify", status);
    out.set("k", cfg.k)
        .set("dim", v.dim())
        .set("dimension_bound", d.max_entangled_dim(cfg.k))
        .set("found", r.found)
        .set("min_defect", r.certificate.value)
        .set("starts", r.certificate.starts)
        .set("converged_starts", r.certificate.converged_starts)
        .set("vector", r.vector.as_ref().map(vector_value));
    out.trace = r.certificate.trace;
    Ok(out)
}

pub fn map(doc: &MatrixDocument, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opt = cfg.optimizer();
    let (hp_map, converted) = match doc.kind {
        Kind::Observable => {
            let (dims, w) = doc.to_observable()?;
            let m = maps::to_map(&w, dims, cfg.tol, normalization(cfg))?;
            let d = MatrixDocument::from_map(&m);
            (m, d)
        }
        Kind::Map => {
            let m = doc.to_map()?;
            let w = maps::to_witness(&m)?;
            let d = MatrixDocument::from_observable(m.dims(), &w);
            (m, d)
        }
        other => return Err(CliError::Input(format!("expected an observable or map document, got {other}"))),
    };
    let pos = maps::is_k_positive(&hp_map, cfg.k, &opt)?;
    let (p, q) = hp_map.signature();
    let mut out = Outcome::new("map", Status::Holds);
    out.set("k", cfg.k)
        .set("signature", vec![p, q])
        .set("k_positive", pos.k_positive)
        .set("completely_positive", pos.completely_positive)
        .set("converted", doc_value(&converted));
    out.trace = pos.report.trace;
    Ok(out)
}

pub fn experiment(trials: usize, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = detect::two_qubit_signature_experiment(trials, cfg.seed, cfg.tol)?;
    let status = if r.failures.is_empty() { Status::Holds } else { Status::Violated };
    let histogram: serde_json::Map<String, Value> = r
        .signature_histogram
        .iter()
        .map(|((p, q, z), n)| (format!("({p},{q},{z})"), Value::from(*n)))
        .collect();
    let mut out = Outcome::new("experiment two-qubit-signature", status);
    out.set("trials", r.trials)
        .set("seed", r.seed)
        .set("histogram", Value::Object(histogram))
        .set("failures", r.failures.clone())
        .set("zero_band", r.zero_band)
        .set("min_schmidt_coefficient", r.min_schmidt_coefficient);
    Ok(out)
}
