//! The weighted-sum baseline `½ Σ_{r<s} ‖w_r − w_s‖² + C Φ_D(p)` with all
//! offsets held at zero (the Crammer–Singer machine), solved by the
//! Condat–Vũ forward–backward primal–dual iteration.
//!
//! Primal variable `w ∈ R^{KN}`, dual variable `y ∈ R^{KM}`:
//!
//! ```text
//! w⁺ = w − τ (∇F(w) + A_wᵀ y)
//! y⁺ = prox_{σ (C h)*}(y + σ A_w (2w⁺ − w))
//! ```
//!
//! where `prox_{σ (C h_i)*}(v) = C · P_Δ((v + σ r_i) / C)`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{evaluate, hinge_loss, ClassifierParams, Dataset};
use crate::prox::{project_simplex_in_place, DataOperator};
use crate::report::{HistoryRecord, SolverKind, SolverReport};

/// Power-iteration estimates of `‖A_w‖` are inflated by this factor before
/// they enter the step-size rule, since the iteration approaches from below.
pub const NORM_SAFETY: f64 = 1.01;

#[derive(Clone, Debug, PartialEq)]
pub struct NcrConfig {
    pub c: f64,
    /// Primal step; `None` picks `0.99 / (√C ‖A_w‖ + K/2)`.
    pub tau: Option<f64>,
    /// Dual step; `None` picks `√C / ‖A_w‖`. The dual iterate lives in
    /// `C·Δ`, so the default tilts the step ratio towards the dual.
    pub sigma: Option<f64>,
    pub max_iterations: usize,
    /// Stop once the relative primal and dual changes both fall below this.
    pub tol: f64,
    /// Record a history row every this many iterations (0 disables).
    pub log_every: usize,
}

impl Default for NcrConfig {
    fn default() -> Self {
        NcrConfig {
            c: 1024.0,
            tau: None,
            sigma: None,
            max_iterations: 1_000_000,
            tol: 1e-10,
            log_every: 1000,
        }
    }
}

impl NcrConfig {
    pub fn with_c(c: f64) -> Self {
        NcrConfig {
            c,
            ..NcrConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::config(format!("C must be positive and finite, got {}", self.c)));
        }
        for (name, v) in [("tau", self.tau), ("sigma", self.sigma)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::config("tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// Gradient of `½ Σ_{r<s} ‖w_r − w_s‖²`: block `j` is `K w_j − Σ_s w_s`,
/// offsets get zero.
pub fn quadratic_term_gradient(p: &ClassifierParams) -> ClassifierParams {
    let n = p.n_features();
    let k = p.n_classes();
    let mut sum = vec![0.0; n];
    for j in 1..=k {
        linalg::axpy(1.0, p.w(j), &mut sum);
    }
    let mut g = ClassifierParams::zeros(n, k);
    for j in 1..=k {
        let block = g.w_mut(j);
        for ((gi, &wi), &si) in block.iter_mut().zip(p.w(j)).zip(&sum) {
            *gi = k as f64 * wi - si;
        }
    }
    g
}

/// `½ Σ_{r<s} ‖w_r − w_s‖² + C Φ_D(p)`.
pub fn objective_ncr(p: &ClassifierParams, c: f64, d: &Dataset) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::config(format!("C must be positive, got {c}")));
    }
    Ok(quadratic_term(p) + c * hinge_loss(p, d)?)
}

fn quadratic_term(p: &ClassifierParams) -> f64 {
    let k = p.n_classes();
    let mut q = 0.0;
    for r in 1..=k {
        for s in r + 1..=k {
            q += linalg::dist_sq(p.w(r), p.w(s));
        }
    }
    0.5 * q
}

/// Zeroes the offset coordinates of a flat parameter vector.
fn clear_offsets(p: &mut [f64], n_features: usize) {
    for block in p.chunks_exact_mut(n_features + 1) {
        block[n_features] = 0.0;
    }
}

/// `‖A_w‖`, the data operator restricted to zero offsets.
pub fn weight_operator_norm(ops: &DataOperator) -> f64 {
    let n = ops.n_features();
    let mut image = vec![0.0; ops.stacked_dim()];
    linalg::power_iteration_norm(
        ops.param_dim(),
        |v, out| {
            let mut v = v.to_vec();
            clear_offsets(&mut v, n);
            ops.apply_into(&v, &mut image);
            ops.adjoint_into(&image, out);
            clear_offsets(out, n);
        },
        linalg::POWER_MAX_STEPS,
        linalg::POWER_TOL,
    )
}

#[derive(Clone, Debug)]
pub struct NcrSolver<'a> {
    data: &'a Dataset,
    ops: DataOperator,
    cfg: NcrConfig,
    tau: f64,
    sigma: f64,
    operator_norm: f64,
}

impl<'a> NcrSolver<'a> {
    /// Fixes the step sizes and checks `τ (σ ‖A_w‖² + L/2) < 1` with `L = K`.
    pub fn new(data: &'a Dataset, cfg: NcrConfig) -> Result<Self> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::input("cannot train on an empty dataset"));
        }
        let ops = DataOperator::new(data)?;
        let norm = NORM_SAFETY * weight_operator_norm(&ops);
        let lipschitz = data.n_classes() as f64;
        let tilt = cfg.c.sqrt();
        let sigma = cfg.sigma.unwrap_or(if norm > 0.0 { tilt / norm } else { 1.0 });
        let tau = cfg.tau.unwrap_or(0.99 / (tilt * norm + 0.5 * lipschitz));
        let bound = tau * (sigma * norm * norm + 0.5 * lipschitz);
        if bound >= 1.0 {
            return Err(Error::config(format!(
                "step sizes tau = {tau}, sigma = {sigma} violate tau (sigma ‖A‖² + L/2) < 1 \
                 (value {bound:.4}, ‖A‖ ≈ {norm:.4}, L = {lipschitz})"
            )));
        }
        Ok(NcrSolver {
            data,
            ops,
            cfg,
            tau,
            sigma,
            operator_norm: norm,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The (safety-inflated) estimate of `‖A_w‖` used for the steps.
    pub fn operator_norm(&self) -> f64 {
        self.operator_norm
    }

    pub fn solve(&self) -> Result<(ClassifierParams, SolverReport)> {
        let started = Instant::now();
        let cfg = &self.cfg;
        let ops = &self.ops;
        let (n, k) = (self.data.n_features(), self.data.n_classes());
        let c = cfg.c;

        let mut w = ClassifierParams::zeros(n, k);
        let mut w_old = w.clone();
        let mut y = vec![0.0; ops.stacked_dim()];
        let mut y_old = y.clone();
        let mut grad = vec![0.0; ops.param_dim()];
        let mut extrap = vec![0.0; ops.param_dim()];
        let mut image = vec![0.0; ops.stacked_dim()];
        let mut scratch = Vec::with_capacity(k);

        let initial = objective_ncr(&w, c, self.data)?;
        let mut history = Vec::new();
        let mut residual = f64::INFINITY;
        let mut converged = false;
        let mut it = 0;
        while it < cfg.max_iterations {
            w_old.clone_from(&w);
            y_old.copy_from_slice(&y);

            // primal
            ops.adjoint_into(&y, &mut grad);
            linalg::axpy(1.0, quadratic_term_gradient(&w).as_slice(), &mut grad);
            clear_offsets(&mut grad, n);
            linalg::axpy(-self.tau, &grad, w.as_mut_slice());

            // dual
            for ((e, &wn), &wo) in extrap.iter_mut().zip(w.as_slice()).zip(w_old.as_slice()) {
                *e = 2.0 * wn - wo;
            }
            ops.apply_into(&extrap, &mut image);
            linalg::axpy(self.sigma, &image, &mut y);
            for (i, block) in y.chunks_exact_mut(k).enumerate() {
                let label = ops.label0(i);
                for (j, v) in block.iter_mut().enumerate() {
                    let shift = if j == label { 0.0 } else { 1.0 };
                    *v = (*v + self.sigma * shift) / c;
                }
                project_simplex_in_place(block, &mut scratch);
                linalg::scale(c, block);
            }

            it += 1;
            let dw = linalg::dist_sq(w.as_slice(), w_old.as_slice()).sqrt();
            let dy = linalg::dist_sq(&y, &y_old).sqrt();
            let primal = dw / linalg::norm(w.as_slice()).max(1.0);
            let dual = dy / linalg::norm(&y).max(1.0);
            residual = primal.max(dual);
            if !residual.is_finite() {
                return Err(Error::Divergence {
                    iteration: it,
                    reason: "non-finite primal-dual iterate".into(),
                });
            }
            let logging = cfg.log_every > 0 && it % cfg.log_every == 0;
            if logging || it % 100 == 0 {
                let obj = objective_ncr(&w, c, self.data)?;
                if obj > 10.0 * initial {
                    return Err(Error::Divergence {
                        iteration: it,
                        reason: format!("objective {obj:.6e} exceeds ten times its initial value {initial:.6e}"),
                    });
                }
                if logging {
                    history.push(HistoryRecord {
                        n: it,
                        t: 0.0,
                        hinge_loss: hinge_loss(&w, self.data)?,
                        residual,
                    });
                }
            }
            if residual < cfg.tol {
                converged = true;
                break;
            }
        }

        let evaluation = evaluate(&w, self.data)?;
        let mut warnings = Vec::new();
        if !converged {
            warnings.push(format!(
                "stopping rule not met after {it} iterations (primal-dual residual {residual:.3e})"
            ));
        }
        Ok((
            w,
            SolverReport {
                solver: SolverKind::Ncr,
                iterations: it,
                converged,
                final_residual: residual,
                final_t: None,
                evaluation,
                history,
                wall_time_secs: started.elapsed().as_secs_f64(),
                warnings,
            },
        ))
    }
}

/// Trains the baseline on `d`.
pub fn solve_ncr(d: &Dataset, cfg: &NcrConfig) -> Result<(ClassifierParams, SolverReport)> {
    NcrSolver::new(d, cfg.clone())?.solve()
}
