//! Projection onto the second-order cone `{(ω, t) : ‖ω‖ ≤ t}`.

use crate::error::{ensure_finite, Result};
use crate::linalg;

pub(crate) fn project_soc_in_place(omega: &mut [f64], t: &mut f64) {
    let norm = linalg::norm(omega);
    if norm <= *t {
        return;
    }
    if norm <= -*t {
        omega.iter_mut().for_each(|v| *v = 0.0);
        *t = 0.0;
        return;
    }
    let level = 0.5 * (*t + norm);
    linalg::scale(level / norm, omega);
    *t = level;
}

/// Projects `(ω, t)` onto the second-order cone.
pub fn project_soc(omega: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
    ensure_finite(omega, "cone projection input")?;
    ensure_finite(&[t], "cone projection level")?;
    let mut w = omega.to_vec();
    let mut level = t;
    project_soc_in_place(&mut w, &mut level);
    Ok((w, level))
}
