//! Douglas–Rachford characterization of the least-hinge-loss classifiers.
//!
//! With `f(p, u) = Σ_i h_i(u_i)` and `g` the indicator of the graph
//! `{u = A p}`, the minimizers of `Φ_D` are exactly
//! `Q P_graph(Fix T_DRS)` where
//! `T_DRS = (2 prox_f − Id)(2 prox_g − Id)` and `Q(p, u) = p`.

use crate::error::{Error, Result};
use crate::model::{hinge_loss, ClassifierParams, Dataset};
use crate::point::{ProductPoint, SplitPoint};
use crate::prox::{prox_f_in_place, DataOperator};

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Scratch buffers for one DRS evaluation.
#[derive(Clone, Debug)]
pub(crate) struct DrsWorkspace {
    p_hat: Vec<f64>,
    u_hat: Vec<f64>,
    prox_u: Vec<f64>,
    prox: (Vec<f64>, Vec<f64>),
}

impl DrsWorkspace {
    pub(crate) fn new(ops: &DataOperator) -> Self {
        DrsWorkspace {
            p_hat: vec![0.0; ops.param_dim()],
            u_hat: vec![0.0; ops.stacked_dim()],
            prox_u: vec![0.0; ops.stacked_dim()],
            prox: (
                Vec::with_capacity(ops.n_classes()),
                Vec::with_capacity(ops.n_classes()),
            ),
        }
    }
}

/// Replaces `(p, u)` by `(1 − α)(p, u) + α T_DRS(p, u)`.
pub(crate) fn relaxed_drs_in_place(
    p: &mut [f64],
    u: &mut [f64],
    alpha: f64,
    ops: &DataOperator,
    ws: &mut DrsWorkspace,
) {
    // (2 prox_g − Id)(p, u)
    ops.project_graph_into(p, u, &mut ws.p_hat, &mut ws.u_hat);
    for (ph, &pi) in ws.p_hat.iter_mut().zip(p.iter()) {
        *ph = 2.0 * *ph - pi;
    }
    for (uh, &ui) in ws.u_hat.iter_mut().zip(u.iter()) {
        *uh = 2.0 * *uh - ui;
    }
    // (2 prox_f − Id) acts on the u block only.
    ws.prox_u.copy_from_slice(&ws.u_hat);
    prox_f_in_place(&mut ws.prox_u, ops, &mut ws.prox);
    for (pi, &rp) in p.iter_mut().zip(&ws.p_hat) {
        *pi = (1.0 - alpha) * *pi + alpha * rp;
    }
    for ((ui, &vi), &ri) in u.iter_mut().zip(&ws.prox_u).zip(&ws.u_hat) {
        *ui = (1.0 - alpha) * *ui + alpha * (2.0 * vi - ri);
    }
}

fn check_split(x: &SplitPoint, ops: &DataOperator) -> Result<()> {
    if x.p.dim() != ops.param_dim() || x.u.len() != ops.stacked_dim() {
        return Err(Error::Input(format!(
            "split point dimensions ({}, {}) do not match the operator ({}, {})",
            x.p.dim(),
            x.u.len(),
            ops.param_dim(),
            ops.stacked_dim()
        )));
    }
    if !x.p.as_slice().iter().chain(&x.u).all(|v| v.is_finite()) {
        return Err(Error::Input("split point is not finite".into()));
    }
    Ok(())
}

/// `T_DRS(x)`.
pub fn apply_t_drs(x: &SplitPoint, ops: &DataOperator) -> Result<SplitPoint> {
    check_split(x, ops)?;
    let mut out = x.clone();
    let mut ws = DrsWorkspace::new(ops);
    relaxed_drs_in_place(out.p.as_mut_slice(), &mut out.u, 1.0, ops, &mut ws);
    Ok(out)
}

/// `T̃_{DRS_α}`: averages the `(p, u)` block, passes `ω` and `t` through.
pub fn apply_t_drs_relaxed(z: &ProductPoint, alpha: f64, ops: &DataOperator) -> Result<ProductPoint> {
    check_alpha(alpha)?;
    ops.check_point(z)?;
    if !z.is_finite() {
        return Err(Error::Input("product point is not finite".into()));
    }
    let mut out = z.clone();
    let mut ws = DrsWorkspace::new(ops);
    relaxed_drs_in_place(out.p.as_mut_slice(), &mut out.u, alpha, ops, &mut ws);
    Ok(out)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `Q P_graph(x)`: the classifier encoded by a (near-)fixed point.
pub fn extract_minimizer(x: &SplitPoint, ops: &DataOperator) -> ClassifierParams {
    let mut ph = vec![0.0; ops.param_dim()];
    ops.project_graph_params(x.p.as_slice(), &x.u, &mut ph);
    ClassifierParams::from_flat(x.p.n_features(), x.p.n_classes(), ph)
        .expect("operator dimensions match the split point")
}

/// `‖T_DRS(x) − x‖`.
pub fn fixed_point_residual(x: &SplitPoint, ops: &DataOperator) -> Result<f64> {
    let tx = apply_t_drs(x, ops)?;
    Ok(tx.distance(x))
}

/// Settings for [`minimize_hinge`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrsConfig {
    pub alpha: f64,
    pub max_iterations: usize,
    /// Stop once `‖T_DRS(x) − x‖` falls below this.
    pub fixed_point_tol: f64,
}

impl Default for DrsConfig {
    fn default() -> Self {
        DrsConfig {
            alpha: DEFAULT_ALPHA,
            max_iterations: 200_000,
            fixed_point_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DrsOutcome {
    pub point: SplitPoint,
    pub params: ClassifierParams,
    pub hinge_loss: f64,
    pub iterations: usize,
    /// Final `‖T_DRS(x) − x‖`.
    pub residual: f64,
}

/// Runs Krasnosel'skiĭ–Mann iterations of `T̃_{DRS_α}` from `x = 0` and
/// extracts a least-hinge-loss classifier.
pub fn minimize_hinge(d: &Dataset, cfg: &DrsConfig) -> Result<DrsOutcome> {
    let ops = DataOperator::new(d)?;
    minimize_hinge_with(&ops, d, SplitPoint::zeros(d.n_features(), d.n_classes(), d.len()), cfg)
}

pub fn minimize_hinge_with(
    ops: &DataOperator,
    d: &Dataset,
    start: SplitPoint,
    cfg: &DrsConfig,
) -> Result<DrsOutcome> {
    check_alpha(cfg.alpha)?;
    check_split(&start, ops)?;
    let mut x = start;
    let mut prev = x.clone();
    let mut ws = DrsWorkspace::new(ops);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        prev.p.as_mut_slice().copy_from_slice(x.p.as_slice());
        prev.u.copy_from_slice(&x.u);
        relaxed_drs_in_place(x.p.as_mut_slice(), &mut x.u, cfg.alpha, ops, &mut ws);
        iterations += 1;
        // ‖T x − x‖ = ‖x⁺ − x‖ / α for the averaged step.
        residual = x.distance(&prev) / cfg.alpha;
        if !residual.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations,
                reason: "non-finite DRS iterate".into(),
            });
        }
        if residual < cfg.fixed_point_tol {
            break;
        }
    }
    let params = extract_minimizer(&x, ops);
    let loss = hinge_loss(&params, d)?;
    Ok(DrsOutcome {
        point: x,
        params,
        hinge_loss: loss,
        iterations,
        residual,
    })
}
