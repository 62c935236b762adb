//! Max-norm constrained least squares by factored projected gradient.
//!
//! Minimizes `½‖L Rᵀ − A‖_F²` over `L ∈ ℝ^{d₁×k}`, `R ∈ ℝ^{d₂×k}` with every
//! row of `L` and `R` of Euclidean norm at most `√radius`. Any such product has
//! `‖L Rᵀ‖_max ≤ radius`, so each iterate is feasible for the max-norm ball.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{check_inputs, Estimate, EstimatorConfig, EstimatorError, Method, ObservationMatrix};
use crate::linalg::{DenseMatrix, RngSeed};
use crate::pattern::SamplePattern;
use crate::weight::WeightMatrix;

/// Rejected steps in a row that count as divergence.
const MAX_CONSECUTIVE_INCREASES: usize = 10;
/// Step growth after an accepted step.
const STEP_GROWTH: f64 = 1.2;
/// Upper limit on the step, relative to the initial one.
const STEP_CAP: f64 = 1e3;
/// Relative slack on the row-norm bound after projection.
const FEASIBILITY_SLACK: f64 = 1e-12;

/// One attempted step of the solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective at the candidate point.
    pub objective: f64,
    pub step: f64,
    /// `‖L‖_{2,∞} · ‖R‖_{2,∞}` at the candidate point.
    pub feasibility: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxNormOptions {
    pub radius: f64,
    /// Factor width `k`; clipped to `min(d₁, d₂)`.
    pub width: usize,
    /// Attempted steps allowed, accepted or not.
    pub iterations: usize,
    /// The first step is `step / (max(d₁, d₂) · radius)`, roughly the inverse
    /// Lipschitz constant of the gradient over the feasible set.
    pub step: f64,
    /// Stop once an accepted step improves the objective by less than this
    /// fraction.
    pub rel_tol: f64,
    pub seed: RngSeed,
}

impl MaxNormOptions {
    pub fn new(radius: f64, rank: usize) -> Self {
        Self {
            radius,
            width: 2 * rank + 2,
            iterations: 500,
            step: 1.0,
            rel_tol: 1e-12,
            seed: RngSeed(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxNormSolution {
    pub x: DenseMatrix,
    /// `½‖x − A‖_F²` at the returned point.
    pub objective: f64,
    /// True if the stopping rule fired before the iteration budget ran out.
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
}

/// Approximately solves `min ½‖X − A‖_F²` subject to `‖X‖_max ≤ radius`.
///
/// The objective is nonincreasing over accepted steps. A zero target
/// returns the zero matrix, which is its exact minimizer.
pub fn maxnorm_solve(target: &DenseMatrix, opts: &MaxNormOptions) -> Result<MaxNormSolution, EstimatorError> {
    if !(opts.radius > 0.0 && opts.radius.is_finite()) {
        return Err(EstimatorError::InvalidConfig(format!(
            "max-norm radius must be positive, got {}",
            opts.radius
        )));
    }
    if opts.width == 0 || opts.iterations == 0 || !(opts.step > 0.0) || !(opts.rel_tol >= 0.0) {
        return Err(EstimatorError::InvalidConfig(format!(
            "need width, iterations, step > 0; got {}, {}, {}",
            opts.width, opts.iterations, opts.step
        )));
    }
    let (d1, d2) = target.shape();
    if d1 == 0 || d2 == 0 || target.max_abs() == 0.0 {
        return Ok(MaxNormSolution {
            x: DenseMatrix::zeros(d1, d2),
            objective: 0.0,
            converged: true,
            trace: Vec::new(),
        });
    }
    let k = opts.width.min(d1.min(d2));
    let bound = opts.radius.sqrt();

    let mut rng = opts.seed.rng();
    let normal = Normal::new(0.0, (opts.radius / (2.0 * k as f64)).sqrt()).expect("valid std");
    let mut l = Factor::random(d1, k, &normal, &mut rng);
    let mut r = Factor::random(d2, k, &normal, &mut rng);
    l.project(bound);
    r.project(bound);

    let a = target.as_slice();
    let mut resid = residual(&l, &r, a);
    let mut f = half_sq(&resid);
    let eta0 = opts.step / (d1.max(d2) as f64 * opts.radius);
    let mut eta = eta0;
    let mut trace = Vec::new();
    let mut consecutive = 0;
    let mut grad_l = Factor::zeros(d1, k);
    let mut grad_r = Factor::zeros(d2, k);
    let mut fresh_gradient = false;
    let mut converged = false;

    for iteration in 1..=opts.iterations {
        if !fresh_gradient {
            gradients(&resid, &l, &r, &mut grad_l, &mut grad_r);
            fresh_gradient = true;
        }
        let mut lc = l.stepped(&grad_l, eta);
        let mut rc = r.stepped(&grad_r, eta);
        lc.project(bound);
        rc.project(bound);
        let feasibility = lc.max_row_norm() * rc.max_row_norm();
        assert!(
            feasibility <= opts.radius * (1.0 + FEASIBILITY_SLACK),
            "projection left ‖L‖·‖R‖ = {feasibility} above radius {}",
            opts.radius
        );
        let resid_c = residual(&lc, &rc, a);
        let fc = half_sq(&resid_c);
        let accepted = fc <= f;
        trace.push(IterationRecord {
            iteration,
            objective: fc,
            step: eta,
            feasibility,
            accepted,
        });
        if accepted {
            let improvement = f - fc;
            l = lc;
            r = rc;
            resid = resid_c;
            f = fc;
            fresh_gradient = false;
            consecutive = 0;
            eta = (eta * STEP_GROWTH).min(STEP_CAP * eta0);
            if improvement <= opts.rel_tol * f || f == 0.0 {
                converged = true;
                break;
            }
        } else {
            consecutive += 1;
            eta *= 0.5;
            if consecutive >= MAX_CONSECUTIVE_INCREASES {
                // a rise at rounding level means the iterate is stationary
                if fc.is_finite() && fc - f <= 1e-12 * f.max(f64::MIN_POSITIVE) {
                    converged = true;
                    break;
                }
                return Err(EstimatorError::Divergence {
                    consecutive_increases: consecutive,
                    trace,
                });
            }
        }
    }

    let x: Vec<f64> = resid.iter().zip(a).map(|(g, t)| g + t).collect();
    Ok(MaxNormSolution {
        x: DenseMatrix::from_row_major(d1, d2, x)?,
        objective: f,
        converged,
        trace,
    })
}

/// `M̂ = W^(−1/2) ∘ argmin_{‖X‖_max ≤ radius} ‖X − W^(−1/2) ∘ Y_Ω‖_F`.
pub fn debiased_maxnorm_projection(
    y_omega: &ObservationMatrix,
    omega: &SamplePattern,
    w: &WeightMatrix,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    check_inputs(y_omega, omega, Some(w))?;
    cfg.check_rank(omega.shape())?;
    let inv_sqrt = w.inv_sqrt().ok_or(EstimatorError::WeightNotPositive)?;
    let a = inv_sqrt.hadamard_dense(y_omega.values())?;
    let opts = MaxNormOptions {
        radius: cfg.maxnorm_radius,
        width: 2 * cfg.rank + 2,
        iterations: cfg.maxnorm_iterations,
        step: cfg.maxnorm_step,
        rel_tol: MaxNormOptions::new(1.0, 1).rel_tol,
        seed: cfg.seed,
    };
    let solution = maxnorm_solve(&a, &opts)?;
    Ok(Estimate {
        m_hat: inv_sqrt.hadamard_dense(&solution.x)?,
        method: Method::DebiasedMaxNorm,
        diagnostics_used: None,
        solver: Some(solution),
    })
}

/// Row-major `n × k` factor.
#[derive(Clone)]
struct Factor {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl Factor {
    fn zeros(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            data: vec![0.0; n * k],
        }
    }

    fn random(n: usize, k: usize, normal: &Normal<f64>, rng: &mut impl rand::Rng) -> Self {
        Self {
            n,
            k,
            data: (0..n * k).map(|_| normal.sample(rng)).collect(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    fn stepped(&self, grad: &Factor, eta: f64) -> Factor {
        Factor {
            n: self.n,
            k: self.k,
            data: self.data.iter().zip(&grad.data).map(|(x, g)| x - eta * g).collect(),
        }
    }

    /// Scales down rows whose norm exceeds `bound`.
    fn project(&mut self, bound: f64) {
        for row in self.data.chunks_mut(self.k) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > bound {
                let c = bound / norm;
                row.iter_mut().for_each(|x| *x *= c);
            }
        }
    }

    fn max_row_norm(&self) -> f64 {
        self.data
            .chunks(self.k)
            .map(|row| row.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// `L Rᵀ − A`, row-major.
fn residual(l: &Factor, r: &Factor, a: &[f64]) -> Vec<f64> {
    let (d1, d2) = (l.n, r.n);
    let mut out = vec![0.0; d1 * d2];
    for i in 0..d1 {
        let li = l.row(i);
        let orow = &mut out[i * d2..(i + 1) * d2];
        for (j, o) in orow.iter_mut().enumerate() {
            let rj = r.row(j);
            let mut s = 0.0;
            for c in 0..li.len() {
                s += li[c] * rj[c];
            }
            *o = s - a[i * d2 + j];
        }
    }
    out
}

fn half_sq(g: &[f64]) -> f64 {
    0.5 * g.iter().map(|x| x * x).sum::<f64>()
}

/// `∇_L = G R`, `∇_R = Gᵀ L`.
fn gradients(g: &[f64], l: &Factor, r: &Factor, gl: &mut Factor, gr: &mut Factor) {
    let (d1, d2, k) = (l.n, r.n, l.k);
    gl.data.iter_mut().for_each(|x| *x = 0.0);
    gr.data.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..d1 {
        let grow = &g[i * d2..(i + 1) * d2];
        let li = &l.data[i * k..(i + 1) * k];
        let gli = &mut gl.data[i * k..(i + 1) * k];
        for (j, &gij) in grow.iter().enumerate() {
            if gij == 0.0 {
                continue;
            }
            let rj = &r.data[j * k..(j + 1) * k];
            let grj = &mut gr.data[j * k..(j + 1) * k];
            for c in 0..k {
                gli[c] += gij * rj[c];
                grj[c] += gij * li[c];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;

    #[test]
    fn zero_target_gives_zero() {
        let sol = maxnorm_solve(&DenseMatrix::zeros(5, 4), &MaxNormOptions::new(1.0, 1)).unwrap();
        assert_eq!(sol.x, DenseMatrix::zeros(5, 4));
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn sign_matrix_is_reached() {
        let d = 30;
        let u: Vec<f64> = (0..d).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let v: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let target = DenseMatrix::from_fn(d, d, |i, j| u[i] * v[j]);
        let mut opts = MaxNormOptions::new(1.0, 1);
        opts.iterations = 5000;
        let sol = maxnorm_solve(&target, &opts).unwrap();
        assert!(sol.objective <= 1e-6, "objective {}", sol.objective);
    }

    #[test]
    fn trace_is_feasible_and_monotone() {
        let target = gaussian_matrix(25, 20, 1.0, RngSeed(3)).unwrap();
        let mut opts = MaxNormOptions::new(0.5, 2);
        opts.seed = RngSeed(9);
        let sol = maxnorm_solve(&target, &opts).unwrap();
        let mut last = f64::INFINITY;
        for rec in sol.trace.iter().filter(|r| r.accepted) {
            assert!(rec.feasibility <= 0.5 * (1.0 + 1e-12));
            assert!(rec.objective <= last);
            last = rec.objective;
        }
        let direct = 0.5 * sol.x.sub(&target).unwrap().frobenius_norm().powi(2);
        assert!((direct - sol.objective).abs() <= 1e-9 * direct);
    }

    #[test]
    fn rejects_bad_radius() {
        let t = DenseMatrix::identity(3);
        assert!(maxnorm_solve(&t, &MaxNormOptions::new(0.0, 1)).is_err());
        assert!(maxnorm_solve(&t, &MaxNormOptions::new(f64::NAN, 1)).is_err());
    }
}
