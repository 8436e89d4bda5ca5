//! Euclidean projection onto the unit simplex and the prox of the shifted
//! max functions built from it.

use crate::error::{ensure_finite, Result};

/// Threshold `θ` such that `P_Δ(v) = max(v − θ, 0)`.
///
/// Sort-and-threshold: with `v` sorted decreasingly, `θ` is fixed by the
/// largest prefix whose last element stays above the running average excess.
pub(crate) fn simplex_threshold(v: &[f64], sorted: &mut Vec<f64>) -> f64 {
    sorted.clear();
    sorted.extend_from_slice(v);
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = sorted[0] - 1.0;
    for (k, &value) in sorted.iter().enumerate() {
        cumulative += value;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if value - candidate > 0.0 {
            theta = candidate;
        }
    }
    theta
}

pub(crate) fn project_simplex_in_place(v: &mut [f64], scratch: &mut Vec<f64>) {
    let theta = simplex_threshold(v, scratch);
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Projection of `v` onto `{u : u ≥ 0, Σu = 1}`.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    ensure_finite(v, "simplex projection input")?;
    let mut out = v.to_vec();
    project_simplex_in_place(&mut out, &mut Vec::with_capacity(v.len()));
    Ok(out)
}

/// The shift `r^{(j)} = 0` if `j = y`, else `1`, of the hinge term of a
/// sample with label `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HingeShift {
    label: usize,
    n_classes: usize,
}

impl HingeShift {
    /// `label` is 1-based.
    pub fn new(label: usize, n_classes: usize) -> Self {
        debug_assert!(label >= 1 && label <= n_classes);
        HingeShift { label, n_classes }
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn len(&self) -> usize {
        self.n_classes
    }

    pub fn is_empty(&self) -> bool {
        self.n_classes == 0
    }

    /// Entry `j` (1-based).
    pub fn value(&self, j: usize) -> f64 {
        if j == self.label {
            0.0
        } else {
            1.0
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (1..=self.n_classes).map(|j| self.value(j)).collect()
    }
}

/// `h(ξ) = max_j (r^{(j)} + ξ_j)`.
pub fn shifted_max(xi: &[f64], shift: HingeShift) -> f64 {
    xi.iter()
        .enumerate()
        .map(|(j, v)| shift.value(j + 1) + v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// In place `v ← v − P_Δ(v + r)`; `scratch` holds two length-`K` buffers.
pub(crate) fn prox_h_in_place(v: &mut [f64], label0: usize, scratch: &mut (Vec<f64>, Vec<f64>)) {
    let (shifted, sorted) = scratch;
    shifted.clear();
    shifted.extend(v.iter().enumerate().map(|(j, &x)| if j == label0 { x } else { x + 1.0 }));
    let theta = simplex_threshold(shifted, sorted);
    for (x, s) in v.iter_mut().zip(shifted.iter()) {
        *x -= (s - theta).max(0.0);
    }
}

/// `prox_h(v) = v − P_Δ(v + r)` by Moreau decomposition: `h` is the support
/// function of the simplex evaluated at `ξ + r`.
pub fn prox_h(v: &[f64], shift: HingeShift) -> Result<Vec<f64>> {
    ensure_finite(v, "prox_h input")?;
    if v.len() != shift.len() {
        return Err(crate::Error::Input(format!(
            "prox_h input of length {} for a {}-class shift",
            v.len(),
            shift.len()
        )));
    }
    let mut out = v.to_vec();
    let mut scratch = (Vec::with_capacity(v.len()), Vec::with_capacity(v.len()));
    prox_h_in_place(&mut out, shift.label() - 1, &mut scratch);
    Ok(out)
}
