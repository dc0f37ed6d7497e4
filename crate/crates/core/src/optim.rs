//! Optimizer configuration, per-start seeding, a BFGS local solver that
//! tolerates kinks, and the deterministic multistart driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Knobs shared by every multistart search in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub starts: usize,
    pub max_iterations: usize,
    /// Relative change in objective below which a local run counts as converged.
    pub convergence_tol: f64,
    /// Threshold below which a trailing singular value counts as zero.
    pub defect_tol: f64,
    /// Slack allowed on `min ⟨Ψ|W|Ψ⟩ >= 0` before a violation is reported.
    pub witness_tol: f64,
    /// Relative half-width of the band of eigenvalues treated as zero.
    pub zero_band: f64,
    /// Keep per-iteration objective values for trace output.
    pub record_trace: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 42,
            starts: 32,
            max_iterations: 500,
            convergence_tol: 1e-10,
            defect_tol: 1e-6,
            witness_tol: 1e-7,
            zero_band: 1e-9,
            record_trace: false,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.starts > 0
            && self.max_iterations > 0
            && self.convergence_tol > 0.0
            && self.defect_tol > 0.0
            && self.witness_tol > 0.0
            && self.zero_band > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidArgument("optimizer settings must all be positive".into()))
        }
    }
}

/// One objective value recorded during a local run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub start: usize,
    pub iteration: usize,
    pub value: f64,
}

/// Independent ChaCha8 stream for start `index` of a run seeded with `seed`.
pub fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Runs `f(start_index, rng)` for every start in parallel and returns the
/// results in start order.
pub(crate) fn run_starts<T, F>(cfg: &OptimizerConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..cfg.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = start_rng(cfg.seed, i);
            f(i, &mut rng)
        })
        .collect()
}

/// Index of the smallest value, ties broken by the lowest index.
pub(crate) fn argmin_by_value<T>(items: &[T], value: impl Fn(&T) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, it) in items.iter().enumerate() {
        let v = value(it);
        match best {
            Some((_, bv)) if !(v < bv) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn trace_points(start: usize, values: &[f64]) -> Vec<TracePoint> {
    values.iter().enumerate().map(|(iteration, &value)| TracePoint { start, iteration, value }).collect()
}

#[derive(Debug, Clone)]
pub(crate) struct LocalResult {
    pub x: Vec<f64>,
    pub converged: bool,
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with a weak-Wolfe bracketing line search. On nonsmooth objectives
/// (the trailing singular values we minimize are kinked where they
/// coalesce) this still drives the iterates to the kink; a failed line
/// search is treated as having reached numerical stationarity.
pub(crate) fn bfgs<F>(objective: F, x0: Vec<f64>, max_iter: usize, tol: f64, floor: f64) -> LocalResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut g) = objective(&x);
    let mut history = vec![f];
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    let mut first = true;
    let mut small_steps = 0;
    let mut converged = false;

    for _ in 0..max_iter {
        if f <= floor || !f.is_finite() {
            converged = f.is_finite();
            break;
        }
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            converged = true;
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>()).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            first = true;
        }

        let mut t = 1.0;
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (ft, gt) = objective(&xt);
            if !ft.is_finite() || ft > f + C1 * t * slope {
                hi = t;
            } else if dot(&gt, &d) < C2 * slope {
                lo = t;
            } else {
                accepted = Some((xt, ft, gt));
                break;
            }
            t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo.max(t) };
            if hi.is_finite() && (hi - lo) < 1e-16 * (1.0 + lo) {
                break;
            }
        }
        let (xn, fnew, gn) = match accepted {
            Some(a) => a,
            None => {
                converged = true;
                break;
            }
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if first {
                let scale = sy / dot(&y, &y);
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] = if i == j { scale } else { 0.0 };
                    }
                }
                first = false;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }

        let decrease = f - fnew;
        x = xn;
        g = gn;
        let prev = f;
        f = fnew;
        history.push(f);
        if decrease <= tol * prev.abs().max(1e-300) {
            small_steps += 1;
            if small_steps >= 3 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    LocalResult { x, converged, history }
}
