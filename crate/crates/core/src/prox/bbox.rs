//! The bounded box `B = B̄(0,ρ1) × B̄(0,ρ2) × B̄(0,ρ3) × [−ρ4, ρ4]` that keeps
//! the hierarchical iterates bounded.

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Dataset;
use crate::point::ProductPoint;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    /// Bound on the sample norms, `Υ ≥ max_i ‖x_i‖`.
    pub upsilon: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
}

impl BoundingBox {
    /// Radii for a given `ρ1` and `Υ`:
    /// `ρ2 = 2ρ1√(KM(Υ²+1))`, `ρ3 = ρ1 K(K−1)`, `ρ4 = 2ρ1`.
    pub fn from_parts(rho1: f64, upsilon: f64, n_classes: usize, n_samples: usize) -> Result<Self> {
        if !(rho1 > 0.0 && rho1.is_finite()) {
            return Err(Error::config(format!("rho1 must be positive and finite, got {rho1}")));
        }
        if !(upsilon >= 0.0 && upsilon.is_finite()) {
            return Err(Error::config(format!("upsilon must be nonnegative, got {upsilon}")));
        }
        let k = n_classes as f64;
        let m = n_samples as f64;
        Ok(BoundingBox {
            upsilon,
            rho1,
            rho2: 2.0 * rho1 * (k * m * (upsilon * upsilon + 1.0)).sqrt(),
            rho3: rho1 * k * (k - 1.0),
            rho4: 2.0 * rho1,
        })
    }

    /// Same as [`compute_radii`] but with a caller-chosen `Υ`, which must
    /// bound every sample norm.
    pub fn with_upsilon(d: &Dataset, rho1: f64, upsilon: f64) -> Result<Self> {
        let tight = d.max_sample_norm();
        if upsilon < tight {
            return Err(Error::config(format!(
                "upsilon {upsilon} is below the largest sample norm {tight}"
            )));
        }
        Self::from_parts(rho1, upsilon, d.n_classes(), d.len())
    }

    pub fn contains(&self, z: &ProductPoint) -> bool {
        linalg::norm(z.p.as_slice()) <= self.rho1
            && linalg::norm(&z.u) <= self.rho2
            && linalg::norm(&z.omega) <= self.rho3
            && z.t.abs() <= self.rho4
    }
}

/// Radii with the tight `Υ = max_i ‖x_i‖`.
pub fn compute_radii(d: &Dataset, rho1: f64) -> Result<BoundingBox> {
    if d.is_empty() {
        return Err(Error::input("cannot size a box for an empty dataset"));
    }
    BoundingBox::from_parts(rho1, d.max_sample_norm(), d.n_classes(), d.len())
}

pub(crate) fn project_bounding_box_in_place(z: &mut ProductPoint, b: &BoundingBox) {
    linalg::project_ball(z.p.as_mut_slice(), b.rho1);
    linalg::project_ball(&mut z.u, b.rho2);
    linalg::project_ball(&mut z.omega, b.rho3);
    z.t = z.t.clamp(-b.rho4, b.rho4);
}

/// Block-wise projection onto `B`.
pub fn project_bounding_box(z: &ProductPoint, b: &BoundingBox) -> ProductPoint {
    let mut out = z.clone();
    project_bounding_box_in_place(&mut out, b);
    out
}
