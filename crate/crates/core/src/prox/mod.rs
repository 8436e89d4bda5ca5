//! Proximity operators and projections used by the splitting solvers.

mod bbox;
mod cone;
mod graph;
mod simplex;

pub use bbox::{compute_radii, project_bounding_box, BoundingBox};
pub use cone::project_soc;
pub use graph::{project_nullspace_graph, project_pair_link, DataOperator};
pub use simplex::{project_simplex, prox_h, shifted_max, HingeShift};

pub(crate) use bbox::project_bounding_box_in_place;
pub(crate) use cone::project_soc_in_place;
pub(crate) use graph::LinkScratch;
pub(crate) use simplex::{project_simplex_in_place, prox_h_in_place};

use crate::error::{ensure_finite, Error, Result};
use crate::model::{ClassifierParams, Dataset};

/// `prox_f(p, u) = (p, (prox_{h_1}(u_1), …, prox_{h_M}(u_M)))`.
pub fn prox_f(
    p: &ClassifierParams,
    u: &[f64],
    d: &Dataset,
) -> Result<(ClassifierParams, Vec<f64>)> {
    let k = d.n_classes();
    if u.len() != k * d.len() {
        return Err(Error::Input(format!(
            "u has {} entries, expected {} blocks of length {k}",
            u.len(),
            d.len()
        )));
    }
    ensure_finite(u, "prox_f input")?;
    let mut out = u.to_vec();
    let mut scratch = (Vec::with_capacity(k), Vec::with_capacity(k));
    for (i, block) in out.chunks_exact_mut(k).enumerate() {
        prox_h_in_place(block, d.label(i) - 1, &mut scratch);
    }
    Ok((p.clone(), out))
}

/// In-place `u_i ← prox_{h_i}(u_i)` using the labels held by `ops`.
pub(crate) fn prox_f_in_place(u: &mut [f64], ops: &DataOperator, scratch: &mut (Vec<f64>, Vec<f64>)) {
    let k = ops.n_classes();
    for (i, block) in u.chunks_exact_mut(k).enumerate() {
        prox_h_in_place(block, ops.label0(i), scratch);
    }
}

/// `Σ_i h_i(u_i)`, the function `f` of the splitting (independent of `p`).
pub fn stacked_hinge(u: &[f64], d: &Dataset) -> f64 {
    let k = d.n_classes();
    u.chunks_exact(k)
        .enumerate()
        .map(|(i, block)| shifted_max(block, HingeShift::new(d.label(i), k)))
        .sum()
}
