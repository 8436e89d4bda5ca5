//! Hybrid steepest descent over the fixed-point set of the composed operator
//! `T = P_B ∘ T̃_DRS ∘ P_E ∘ P_L`, minimizing `Θ(p, u, ω, t) = t`.
//!
//! `Fix(T)` is the set of points whose `(p, u)` block encodes a
//! least-hinge-loss classifier, whose `ω` blocks equal the corresponding
//! `w_r − w_s` and for which `t ≥ max ‖ω_rs‖`. Driving `t` down over that
//! set therefore selects, among the least-hinge-loss classifiers, one with
//! the largest smallest pairwise margin.

use std::collections::VecDeque;
use std::time::Instant;

use crate::drs::{check_alpha, extract_minimizer, relaxed_drs_in_place, DrsWorkspace, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{evaluate, hinge_loss, ClassifierParams, Dataset};
use crate::point::{ProductPoint, SplitPoint};
use crate::prox::{
    compute_radii, project_bounding_box_in_place, project_soc_in_place, BoundingBox, DataOperator,
    LinkScratch,
};
use crate::report::{HistoryRecord, SolverKind, SolverReport};

/// Default `ρ1` is this multiple of the largest sample norm.
pub const DEFAULT_RHO1_SCALE: f64 = 100.0;

/// A warning is issued when `‖p**‖` reaches this fraction of `ρ1`.
pub const BOX_WARNING_FRACTION: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct HsdmConfig {
    /// Radius of the `H1` ball; `None` picks `100 · max_i ‖x_i‖`.
    pub rho1: Option<f64>,
    /// DRS averaging constant in `(0, 1)`.
    pub alpha: f64,
    /// `λ_n = λ1 / n^γ`.
    pub lambda1: f64,
    /// The exponent `γ ∈ (0, 1]`.
    pub decay: f64,
    pub max_iterations: usize,
    /// Stop once `‖T(z_n) − z_n‖` is below this ...
    pub residual_tol: f64,
    /// ... and the relative change of `t` over the last `drift_window`
    /// iterations is below this.
    pub drift_tol: f64,
    pub drift_window: usize,
    /// Record a history row every this many iterations (0 disables).
    pub log_every: usize,
}

impl Default for HsdmConfig {
    fn default() -> Self {
        HsdmConfig {
            rho1: None,
            alpha: DEFAULT_ALPHA,
            lambda1: 1.0,
            decay: 1.0,
            max_iterations: 200_000,
            residual_tol: 1e-7,
            drift_tol: 1e-9,
            drift_window: 100,
            log_every: 1000,
        }
    }
}

impl HsdmConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(rho1) = self.rho1 {
            if !(rho1 > 0.0 && rho1.is_finite()) {
                return Err(Error::config(format!("rho1 must be positive and finite, got {rho1}")));
            }
        }
        check_alpha(self.alpha)?;
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(Error::config(format!("lambda1 must be nonnegative, got {}", self.lambda1)));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::config(format!(
                "decay exponent must lie in (0, 1], got {}",
                self.decay
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        if !(self.residual_tol >= 0.0) || !(self.drift_tol >= 0.0) {
            return Err(Error::config("tolerances must be nonnegative"));
        }
        if self.drift_window == 0 {
            return Err(Error::config("drift_window must be at least 1"));
        }
        Ok(())
    }

    /// The `ρ1` actually used on `d`.
    pub fn effective_rho1(&self, d: &Dataset) -> f64 {
        self.rho1
            .unwrap_or_else(|| DEFAULT_RHO1_SCALE * d.max_sample_norm().max(1.0))
    }
}

/// `λ_n = λ1 / n^γ` for `n ≥ 1`.
pub fn lambda_schedule(n: usize, cfg: &HsdmConfig) -> f64 {
    debug_assert!(n >= 1, "the schedule starts at n = 1");
    let n = n.max(1) as f64;
    if cfg.decay == 1.0 {
        cfg.lambda1 / n
    } else {
        cfg.lambda1 / n.powf(cfg.decay)
    }
}

/// Scratch buffers for one application of `T`.
#[derive(Clone, Debug)]
struct TWorkspace {
    link: LinkScratch,
    drs: DrsWorkspace,
}

impl TWorkspace {
    fn new(ops: &DataOperator) -> Self {
        TWorkspace {
            link: LinkScratch::new(ops),
            drs: DrsWorkspace::new(ops),
        }
    }
}

fn apply_t_in_place(
    z: &mut ProductPoint,
    ops: &DataOperator,
    bbox: &BoundingBox,
    alpha: f64,
    ws: &mut TWorkspace,
) {
    let n_pairs = ops.pairs().len();
    for k in 0..n_pairs {
        ops.project_pair_link_in_place(z, k, &mut ws.link);
    }
    for k in 0..n_pairs {
        let n = ops.n_features();
        let (omega, t) = (&mut z.omega[k * n..(k + 1) * n], &mut z.t);
        project_soc_in_place(omega, t);
    }
    relaxed_drs_in_place(z.p.as_mut_slice(), &mut z.u, alpha, ops, &mut ws.drs);
    project_bounding_box_in_place(z, bbox);
}

fn check_inputs(z: &ProductPoint, ops: &DataOperator, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    ops.check_point(z)?;
    if !z.is_finite() {
        return Err(Error::input("product point is not finite"));
    }
    Ok(())
}

/// `T(z)`: pair links, then cones, then relaxed DRS, then the box.
pub fn apply_t(
    z: &ProductPoint,
    ops: &DataOperator,
    bbox: &BoundingBox,
    alpha: f64,
) -> Result<ProductPoint> {
    check_inputs(z, ops, alpha)?;
    let mut out = z.clone();
    apply_t_in_place(&mut out, ops, bbox, alpha, &mut TWorkspace::new(ops));
    Ok(out)
}

/// `T(z) − λ ∇Θ(T(z))`, i.e. `T(z)` with `t` lowered by `λ`.
pub fn hsdm_step(
    z: &ProductPoint,
    lambda: f64,
    ops: &DataOperator,
    bbox: &BoundingBox,
    alpha: f64,
) -> Result<ProductPoint> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!("step size must be nonnegative, got {lambda}")));
    }
    let mut out = apply_t(z, ops, bbox, alpha)?;
    out.t -= lambda;
    Ok(out)
}

/// How far a point is from each constraint set of the intersection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintResiduals {
    /// `max_rs ‖ω_rs − Ω_rs P_graph(p, u)‖`.
    pub link: f64,
    /// `max_rs max(0, ‖ω_rs‖ − t)`.
    pub cone: f64,
    /// `‖T_DRS(p, u) − (p, u)‖`.
    pub drs: f64,
}

pub fn constraint_residuals(z: &ProductPoint, ops: &DataOperator) -> Result<ConstraintResiduals> {
    ops.check_point(z)?;
    let mut link: f64 = 0.0;
    let mut cone: f64 = 0.0;
    for (k, &(r, s)) in ops.pairs().iter().enumerate() {
        let m = ops.pair_link_map(z.p.as_slice(), &z.u, r, s);
        let block = z.omega_block(k);
        link = link.max(linalg::dist_sq(block, &m).sqrt());
        cone = cone.max(linalg::norm(block) - z.t);
    }
    let drs = crate::drs::fixed_point_residual(&z.split(), ops)?;
    Ok(ConstraintResiduals { link, cone, drs })
}

/// Raw outcome of [`RhcSolver::iterate`].
#[derive(Clone, Debug)]
pub struct HsdmRun {
    pub point: ProductPoint,
    pub iterations: usize,
    pub converged: bool,
    /// Last `‖T(z_{n−1}) − z_{n−1}‖`.
    pub residual: f64,
    pub history: Vec<HistoryRecord>,
    pub wall_time_secs: f64,
}

/// The hierarchical solver bound to one dataset.
#[derive(Clone, Debug)]
pub struct RhcSolver<'a> {
    data: &'a Dataset,
    ops: DataOperator,
    bbox: BoundingBox,
    cfg: HsdmConfig,
}

impl<'a> RhcSolver<'a> {
    pub fn new(data: &'a Dataset, cfg: HsdmConfig) -> Result<Self> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::input("cannot train on an empty dataset"));
        }
        let ops = DataOperator::new(data)?;
        let bbox = compute_radii(data, cfg.effective_rho1(data))?;
        Ok(RhcSolver {
            data,
            ops,
            bbox,
            cfg,
        })
    }

    pub fn ops(&self) -> &DataOperator {
        &self.ops
    }

    pub fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn config(&self) -> &HsdmConfig {
        &self.cfg
    }

    pub fn zero_point(&self) -> ProductPoint {
        ProductPoint::zeros(self.data.n_features(), self.data.n_classes(), self.data.len())
    }

    pub fn solve(&self) -> Result<(ClassifierParams, SolverReport)> {
        self.solve_from(self.zero_point())
    }

    /// Runs the iteration from `z0` and returns `p**` with its report.
    pub fn solve_from(&self, z0: ProductPoint) -> Result<(ClassifierParams, SolverReport)> {
        let run = self.iterate(z0)?;
        let params = extract_minimizer(&run.point.split(), &self.ops);
        let mut report = SolverReport {
            solver: SolverKind::Rhc,
            iterations: run.iterations,
            converged: run.converged,
            final_residual: run.residual,
            final_t: Some(run.point.t),
            evaluation: evaluate(&params, self.data)?,
            history: run.history,
            wall_time_secs: run.wall_time_secs,
            warnings: Vec::new(),
        };
        if !run.converged {
            report.warnings.push(format!(
                "stopping rule not met after {} iterations (T-residual {:.3e})",
                run.iterations, run.residual
            ));
        }
        let p_norm = linalg::norm(params.as_slice());
        if p_norm >= BOX_WARNING_FRACTION * self.bbox.rho1 {
            report.warnings.push(format!(
                "‖p**‖ = {p_norm:.6e} is at least {BOX_WARNING_FRACTION} ρ1 (ρ1 = {:.6e}); \
                 the box may bind, consider a larger rho1",
                self.bbox.rho1
            ));
        }
        Ok((params, report))
    }

    /// Runs the iteration and returns the final iterate.
    pub fn iterate(&self, z0: ProductPoint) -> Result<HsdmRun> {
        check_inputs(&z0, &self.ops, self.cfg.alpha)?;
        let started = Instant::now();
        let cfg = &self.cfg;
        let mut ws = TWorkspace::new(&self.ops);
        let mut z = z0;
        let mut prev = z.clone();
        let mut window: VecDeque<f64> = VecDeque::with_capacity(cfg.drift_window + 1);
        let mut history = Vec::new();
        let mut residual = f64::INFINITY;
        let mut converged = false;
        let mut n = 0;
        while n < cfg.max_iterations {
            prev.clone_from(&z);
            apply_t_in_place(&mut z, &self.ops, &self.bbox, cfg.alpha, &mut ws);
            residual = z.distance(&prev);
            n += 1;
            z.t -= lambda_schedule(n, cfg);
            if !residual.is_finite() || !z.t.is_finite() {
                return Err(Error::Divergence {
                    iteration: n,
                    reason: "non-finite iterate".into(),
                });
            }
            if cfg.log_every > 0 && n % cfg.log_every == 0 {
                history.push(self.record(n, &z, residual)?);
            }
            window.push_back(z.t);
            if window.len() > cfg.drift_window {
                let old = window.pop_front().expect("window is nonempty");
                let drift = (z.t - old).abs() / z.t.abs().max(1.0);
                if residual < cfg.residual_tol && drift < cfg.drift_tol {
                    converged = true;
                    break;
                }
            }
        }
        Ok(HsdmRun {
            point: z,
            iterations: n,
            converged,
            residual,
            history,
            wall_time_secs: started.elapsed().as_secs_f64(),
        })
    }

    fn record(&self, n: usize, z: &ProductPoint, residual: f64) -> Result<HistoryRecord> {
        let split = SplitPoint {
            p: z.p.clone(),
            u: z.u.clone(),
        };
        let p = extract_minimizer(&split, &self.ops);
        Ok(HistoryRecord {
            n,
            t: z.t,
            hinge_loss: hinge_loss(&p, self.data)?,
            residual,
        })
    }
}

/// Trains the hierarchical classifier on `d` from `z0 = 0`.
pub fn solve_rhc(d: &Dataset, cfg: &HsdmConfig) -> Result<(ClassifierParams, SolverReport)> {
    RhcSolver::new(d, cfg.clone())?.solve()
}
