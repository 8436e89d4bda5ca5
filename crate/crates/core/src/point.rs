//! Iterates of the splitting and hierarchical solvers.

use crate::linalg;
use crate::model::ClassifierParams;

/// A point `(p, u)` of `X = H1 × H2`, with `u` stacked as `M` blocks of
/// length `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPoint {
    pub p: ClassifierParams,
    pub u: Vec<f64>,
}

impl SplitPoint {
    pub fn zeros(n_features: usize, n_classes: usize, n_samples: usize) -> Self {
        SplitPoint {
            p: ClassifierParams::zeros(n_features, n_classes),
            u: vec![0.0; n_classes * n_samples],
        }
    }

    pub fn norm_sq(&self) -> f64 {
        linalg::norm_sq(self.p.as_slice()) + linalg::norm_sq(&self.u)
    }

    /// Product-norm distance.
    pub fn distance(&self, other: &SplitPoint) -> f64 {
        (linalg::dist_sq(self.p.as_slice(), other.p.as_slice())
            + linalg::dist_sq(&self.u, &other.u))
        .sqrt()
    }

    pub fn inner(&self, other: &SplitPoint) -> f64 {
        linalg::dot(self.p.as_slice(), other.p.as_slice()) + linalg::dot(&self.u, &other.u)
    }
}

/// A point `z = (p, u, ω, t)` of `H = H1 × H2 × H3 × R`.
///
/// `ω` holds one length-`N` block per class pair `r < s`, in lexicographic
/// pair order (see [`crate::model::class_pairs`]).
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    pub p: ClassifierParams,
    pub u: Vec<f64>,
    pub omega: Vec<f64>,
    pub t: f64,
}

impl ProductPoint {
    pub fn zeros(n_features: usize, n_classes: usize, n_samples: usize) -> Self {
        let n_pairs = n_classes * (n_classes - 1) / 2;
        ProductPoint {
            p: ClassifierParams::zeros(n_features, n_classes),
            u: vec![0.0; n_classes * n_samples],
            omega: vec![0.0; n_pairs * n_features],
            t: 0.0,
        }
    }

    pub fn from_split(x: SplitPoint, omega: Vec<f64>, t: f64) -> Self {
        ProductPoint {
            p: x.p,
            u: x.u,
            omega,
            t,
        }
    }

    pub fn split(&self) -> SplitPoint {
        SplitPoint {
            p: self.p.clone(),
            u: self.u.clone(),
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.omega.len() / self.p.n_features()
    }

    /// Total dimension `(N+1)K + KM + K(K−1)N/2 + 1`.
    pub fn dim(&self) -> usize {
        self.p.dim() + self.u.len() + self.omega.len() + 1
    }

    /// The `ω` block of the pair with index `k`.
    pub fn omega_block(&self, k: usize) -> &[f64] {
        let n = self.p.n_features();
        &self.omega[k * n..(k + 1) * n]
    }

    pub fn omega_block_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.p.n_features();
        &mut self.omega[k * n..(k + 1) * n]
    }

    pub fn norm_sq(&self) -> f64 {
        linalg::norm_sq(self.p.as_slice())
            + linalg::norm_sq(&self.u)
            + linalg::norm_sq(&self.omega)
            + self.t * self.t
    }

    pub fn distance(&self, other: &ProductPoint) -> f64 {
        (linalg::dist_sq(self.p.as_slice(), other.p.as_slice())
            + linalg::dist_sq(&self.u, &other.u)
            + linalg::dist_sq(&self.omega, &other.omega)
            + (self.t - other.t).powi(2))
        .sqrt()
    }

    pub fn inner(&self, other: &ProductPoint) -> f64 {
        linalg::dot(self.p.as_slice(), other.p.as_slice())
            + linalg::dot(&self.u, &other.u)
            + linalg::dot(&self.omega, &other.omega)
            + self.t * other.t
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.p.as_slice().iter().all(|v| v.is_finite())
            && self.u.iter().all(|v| v.is_finite())
            && self.omega.iter().all(|v| v.is_finite())
    }

    /// All coordinates flattened in the canonical block order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(self.p.as_slice());
        v.extend_from_slice(&self.u);
        v.extend_from_slice(&self.omega);
        v.push(self.t);
        v
    }
}
