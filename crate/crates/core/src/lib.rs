//! Hierarchical convex multiclass support vector machines.
//!
//! A linear `K`-class classifier `p = (w_j, b_j)_{j=1..K}` assigns `x` to
//! `argmax_j w_jᵀx + b_j`. Among all classifiers that minimize the
//! generalized hinge loss `Φ_D`, [`solve_rhc`] finds one whose smallest
//! pairwise margin `1/‖w_r − w_s‖` is as large as possible. It does so with
//! a hybrid steepest descent iteration over the fixed points of a composed
//! nonexpansive operator built entirely from closed-form projections.
//!
//! [`solve_ncr`] solves the classical weighted-sum relaxation
//! `½ Σ ‖w_r − w_s‖² + C Φ_D` (with `b = 0`) for comparison.
//!
//! ```
//! use rhc_msvm::{evaluate, solve_rhc, Dataset, HsdmConfig};
//!
//! let d = Dataset::new(
//!     vec![vec![0.0], vec![1.0], vec![3.0], vec![4.0]],
//!     vec![1, 1, 2, 2],
//!     2,
//! )?;
//! let cfg = HsdmConfig { max_iterations: 20_000, ..HsdmConfig::default() };
//! let (p, report) = solve_rhc(&d, &cfg)?;
//! assert_eq!(report.evaluation.risk_count, 0);
//! assert!(evaluate(&p, &d)?.hinge_loss < 1e-6);
//! # Ok::<(), rhc_msvm::Error>(())
//! ```

pub mod data;
pub mod drs;
mod error;
pub mod hsdm;
pub mod linalg;
pub mod model;
pub mod ncr;
pub mod point;
pub mod prox;
pub mod report;

pub use data::{load_delimited, make_subset, parse_delimited, FeatureRef, Schema, SubsetSpec};
pub use drs::{
    apply_t_drs, apply_t_drs_relaxed, extract_minimizer, fixed_point_residual, minimize_hinge,
    DrsConfig, DrsOutcome,
};
pub use error::{Error, Result};
pub use hsdm::{
    apply_t, constraint_residuals, hsdm_step, lambda_schedule, solve_rhc, HsdmConfig, RhcSolver,
};
pub use model::{
    check_margin_witness, class_pairs, classify, evaluate, evaluate_with, halfspace_distance,
    hinge_loss, pairwise_margin, worst_pair_objective, ClassifierParams, Dataset, EvalOptions,
    EvaluationReport, PairMargin,
};
pub use ncr::{objective_ncr, quadratic_term_gradient, solve_ncr, NcrConfig, NcrSolver};
pub use point::{ProductPoint, SplitPoint};
pub use prox::{
    compute_radii, project_bounding_box, project_nullspace_graph, project_pair_link,
    project_simplex, project_soc, prox_f, prox_h, BoundingBox, DataOperator, HingeShift,
};
pub use report::{HistoryRecord, ModelDocument, SolverKind, SolverReport};

/// The guide under `book/src`, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/prox.md")]
    mod prox {}
    #[doc = include_str!("../../../book/src/drs.md")]
    mod drs {}
    #[doc = include_str!("../../../book/src/hsdm.md")]
    mod hsdm {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    mod baseline {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
