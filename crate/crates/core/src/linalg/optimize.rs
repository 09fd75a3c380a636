use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A residual map `R^n -> R^m` whose norm is driven to zero.
pub trait DefectObjective {
    fn residual(&self, params: &DVector<f64>) -> DVector<f64>;

    /// Jacobian of [`residual`](Self::residual); central differences by default.
    fn jacobian(&self, params: &DVector<f64>) -> DMatrix<f64> {
        let r0 = self.residual(params);
        let mut jac = DMatrix::zeros(r0.len(), params.len());
        for k in 0..params.len() {
            let h = 1e-7 * (1.0 + params[k].abs());
            let mut plus = params.clone();
            plus[k] += h;
            let mut minus = params.clone();
            minus[k] -= h;
            let diff = (self.residual(&plus) - self.residual(&minus)) / (2.0 * h);
            jac.set_column(k, &diff);
        }
        jac
    }
}

impl<F> DefectObjective for F
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn residual(&self, params: &DVector<f64>) -> DVector<f64> {
        self(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Number of additional randomly perturbed starts after the first.
    pub restarts: usize,
    /// Target residual norm.
    pub tolerance: f64,
    /// Residual norm at which no further restarts are tried; the larger of
    /// this and `tolerance` applies.
    pub acceptable: f64,
    /// Relative size of restart perturbations.
    pub perturbation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 200,
            restarts: 10,
            tolerance: 1e-8,
            acceptable: 0.0,
            perturbation: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcome {
    pub params: DVector<f64>,
    pub residual: f64,
    /// Iterations summed over all starts.
    pub iterations: usize,
    /// Index of the start that produced `params` (0 = the given init).
    pub start: usize,
    /// Residual norms after each accepted step of the winning start.
    pub history: Vec<f64>,
}

struct Run {
    params: DVector<f64>,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
}

/// A run stops once the residual fails to halve over this many steps.
const STALL_WINDOW: usize = 10;

fn least_squares_step(jac: &DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    let (jac, r) = if jac.nrows() > jac.ncols() {
        let qr = jac.clone().qr();
        let mut qr_r = r.clone();
        qr.q_tr_mul(&mut qr_r);
        (qr.r(), qr_r.rows(0, jac.ncols()).into_owned())
    } else {
        (jac.clone(), r.clone())
    };
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return None;
    }
    svd.solve(&(-r), 1e-12 * smax).ok()
}

fn damped_step(jac: &DMatrix<f64>, r: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let jt = jac.transpose();
    let mut normal = &jt * jac;
    for k in 0..normal.nrows() {
        normal[(k, k)] += lambda;
    }
    let rhs = -(&jt * r);
    normal.cholesky().map(|ch| ch.solve(&rhs))
}

fn run_from<O: DefectObjective + ?Sized>(
    objective: &O,
    init: DVector<f64>,
    options: &SolverOptions,
) -> Run {
    let mut x = init;
    let mut r = objective.residual(&x);
    let mut f = r.norm();
    let mut history = vec![f];
    let mut iterations = 0;
    while iterations < options.max_iterations && f > options.tolerance && f.is_finite() {
        iterations += 1;
        let jac = objective.jacobian(&x);
        let mut accepted = None;

        if let Some(step) = least_squares_step(&jac, &r) {
            let mut alpha = 1.0;
            for _ in 0..12 {
                let candidate = &x + &step * alpha;
                let rc = objective.residual(&candidate);
                let fc = rc.norm();
                if fc.is_finite() && fc < f {
                    accepted = Some((candidate, rc, fc));
                    break;
                }
                alpha *= 0.5;
            }
        }
        if accepted.is_none() {
            let gram_scale = jac.column_iter().map(|c| c.norm_squared()).fold(0.0, f64::max);
            let mut lambda = 1e-3 * gram_scale.max(1e-300);
            for _ in 0..12 {
                if let Some(step) = damped_step(&jac, &r, lambda) {
                    let candidate = &x + &step;
                    let rc = objective.residual(&candidate);
                    let fc = rc.norm();
                    if fc.is_finite() && fc < f {
                        accepted = Some((candidate, rc, fc));
                        break;
                    }
                }
                lambda *= 10.0;
            }
        }
        match accepted {
            Some((xn, rn, fnew)) => {
                x = xn;
                r = rn;
                f = fnew;
                history.push(f);
            }
            None => break,
        }
        let n = history.len();
        if n > STALL_WINDOW && f > 0.5 * history[n - 1 - STALL_WINDOW] {
            break;
        }
    }
    Run {
        params: x,
        residual: f,
        iterations,
        history,
    }
}

/// Gauss-Newton minimization of `||residual(x)||` with backtracking line
/// search, Levenberg damping when the Gauss-Newton direction fails, and seeded
/// random restarts.
///
/// Accepted steps strictly decrease the residual norm. The result is
/// deterministic for a fixed `seed`. When no start reaches
/// `options.tolerance`, [`Error::SolverFailed`] carries the best residual.
pub fn minimize_defect<O: DefectObjective + ?Sized>(
    objective: &O,
    init: &DVector<f64>,
    seed: u64,
    options: &SolverOptions,
) -> Result<SolverOutcome> {
    let outcome = minimize_defect_best(objective, init, seed, options)?;
    if outcome.residual > options.tolerance {
        return Err(Error::SolverFailed {
            residual: outcome.residual,
            restarts: options.restarts,
            iterations: outcome.iterations,
        });
    }
    Ok(outcome)
}

/// Like [`minimize_defect`] but returns the best point even when the target
/// tolerance is not reached.
pub(crate) fn minimize_defect_best<O: DefectObjective + ?Sized>(
    objective: &O,
    init: &DVector<f64>,
    seed: u64,
    options: &SolverOptions,
) -> Result<SolverOutcome> {
    let r0 = objective.residual(init);
    if !r0.iter().all(|v| v.is_finite()) || !init.iter().all(|v| v.is_finite()) {
        return Err(Error::Precondition(
            "objective is not finite at the initial point".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Run, usize)> = None;
    let mut total_iterations = 0;
    for start in 0..=options.restarts {
        let start_point = if start == 0 {
            init.clone()
        } else {
            let scale = options.perturbation * (start as f64).sqrt();
            DVector::from_fn(init.len(), |k, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                init[k] + scale * (1.0 + init[k].abs()) * z
            })
        };
        let run = run_from(objective, start_point, options);
        log::debug!(
            "start {start}: residual {:e} after {} iterations, history {:?}",
            run.residual,
            run.iterations,
            &run.history[run.history.len().saturating_sub(4)..]
        );
        total_iterations += run.iterations;
        let better = match &best {
            None => true,
            Some((b, _)) => run.residual < b.residual,
        };
        if better {
            best = Some((run, start));
        }
        let limit = options.tolerance.max(options.acceptable);
        if best.as_ref().map_or(false, |(b, _)| b.residual <= limit) {
            break;
        }
    }
    let (run, start) = best.expect("at least one start");
    Ok(SolverOutcome {
        params: run.params,
        residual: run.residual,
        iterations: total_iterations,
        start,
        history: run.history,
    })
}
