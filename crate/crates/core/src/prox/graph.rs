//! The stacked data operator `A : H1 → R^{KM}` and the projections that
//! involve it: onto the graph `{(p, u) : u = A p}` (the null space of
//! `(p, u) ↦ A p − u`) and onto the pair-link subspaces
//! `L_{r,s} = {ω_rs = Ω_{r,s} P_graph(p, u)}`.
//!
//! Sample `i` contributes the `K` outputs
//! `(A_i p)_j = (w_j − w_{y_i})ᵀ x_i + (b_j − b_{y_i})`, so that
//! `Σ_i h_i(A_i p)` equals the generalized hinge loss.

use nalgebra::{Cholesky, DMatrix, DVectorViewMut, Dyn};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg;
use crate::model::{class_pairs, ClassifierParams, Dataset};
use crate::point::ProductPoint;

/// Matrix-free `A` plus the factorizations every projection needs.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct DataOperator {
    n_features: usize,
    n_classes: usize,
    n_samples: usize,
    features: Vec<f64>,
    /// 0-based labels.
    labels: Vec<usize>,
    /// Cholesky factor of `I + AᵀA`.
    normal: Cholesky<f64, Dyn>,
    /// One Cholesky factor of `I_N + Ω_{rs} P Ω_{rs}ᵀ` per pair (lexicographic).
    links: Vec<Cholesky<f64, Dyn>>,
    pairs: Vec<(usize, usize)>,
}

impl DataOperator {
    pub fn new(d: &Dataset) -> Result<Self> {
        let n_features = d.n_features();
        let n_classes = d.n_classes();
        let n_samples = d.len();
        let dim = (n_features + 1) * n_classes;
        let mut op = DataOperator {
            n_features,
            n_classes,
            n_samples,
            features: d.features().to_vec(),
            labels: d.labels().iter().map(|y| y - 1).collect(),
            normal: Cholesky::new(DMatrix::identity(1, 1)).expect("1x1 identity"),
            links: Vec::new(),
            pairs: class_pairs(n_classes),
        };

        let mut gram = DMatrix::<f64>::identity(dim, dim);
        let mut basis = vec![0.0; dim];
        let mut image = vec![0.0; n_classes * n_samples];
        let mut back = vec![0.0; dim];
        for c in 0..dim {
            basis.iter_mut().for_each(|v| *v = 0.0);
            basis[c] = 1.0;
            op.apply_into(&basis, &mut image);
            op.adjoint_into(&image, &mut back);
            for r in 0..dim {
                gram[(r, c)] += back[r];
            }
        }
        op.normal = Cholesky::new(gram)
            .ok_or_else(|| Error::Numerical("I + AᵀA is not positive definite".into()))?;

        let mut links = Vec::with_capacity(op.pairs.len());
        for &(r, s) in &op.pairs {
            let mut link = DMatrix::<f64>::identity(n_features, n_features);
            let mut q = vec![0.0; dim];
            for l in 0..n_features {
                q.iter_mut().for_each(|v| *v = 0.0);
                op.embed_pair(r, s, l, 1.0, &mut q);
                op.solve_normal_in_place(&mut q);
                for k in 0..n_features {
                    link[(k, l)] += op.pair_difference(&q, r, s, k);
                }
            }
            links.push(Cholesky::new(link).ok_or_else(|| {
                Error::Numerical(format!("pair-link system for ({r}, {s}) is not positive definite"))
            })?);
        }
        op.links = links;
        Ok(op)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Dimension of `H1`, `(N+1)K`.
    pub fn param_dim(&self) -> usize {
        (self.n_features + 1) * self.n_classes
    }

    /// Dimension of `H2`, `KM`.
    pub fn stacked_dim(&self) -> usize {
        self.n_classes * self.n_samples
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// 0-based label of sample `i`.
    pub(crate) fn label0(&self, i: usize) -> usize {
        self.labels[i]
    }

    fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    fn score(&self, p: &[f64], j: usize, x: &[f64]) -> f64 {
        let stride = self.n_features + 1;
        let block = &p[j * stride..(j + 1) * stride];
        linalg::dot(&block[..self.n_features], x) + block[self.n_features]
    }

    /// `A_i p` written into `out` (length `K`).
    pub fn apply_sample(&self, i: usize, p: &[f64], out: &mut [f64]) {
        let x = self.sample(i);
        let y = self.labels[i];
        let own = self.score(p, y, x);
        for (j, o) in out.iter_mut().enumerate() {
            *o = if j == y { 0.0 } else { self.score(p, j, x) - own };
        }
    }

    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        debug_assert_eq!(p.len(), self.param_dim());
        debug_assert_eq!(out.len(), self.stacked_dim());
        let k = self.n_classes;
        for i in 0..self.n_samples {
            self.apply_sample(i, p, &mut out[i * k..(i + 1) * k]);
        }
    }

    /// `A p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.stacked_dim()];
        self.apply_into(p, &mut out);
        out
    }

    pub fn adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.stacked_dim());
        debug_assert_eq!(out.len(), self.param_dim());
        out.iter_mut().for_each(|v| *v = 0.0);
        let k = self.n_classes;
        let n = self.n_features;
        let stride = n + 1;
        for i in 0..self.n_samples {
            let x = self.sample(i);
            let y = self.labels[i];
            let block = &u[i * k..(i + 1) * k];
            let mut total = 0.0;
            for (j, &uj) in block.iter().enumerate() {
                if j == y {
                    continue;
                }
                total += uj;
                let dst = &mut out[j * stride..(j + 1) * stride];
                linalg::axpy(uj, x, &mut dst[..n]);
                dst[n] += uj;
            }
            let dst = &mut out[y * stride..(y + 1) * stride];
            linalg::axpy(-total, x, &mut dst[..n]);
            dst[n] -= total;
        }
    }

    /// `Aᵀ u`.
    pub fn adjoint(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.param_dim()];
        self.adjoint_into(u, &mut out);
        out
    }

    /// Solves `(I + AᵀA) q = rhs` in place.
    pub fn solve_normal_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut view = DVectorViewMut::from_slice(rhs, n);
        self.normal.solve_mut(&mut view);
    }

    /// Dense copy of `A` (rows `i·K + j`). Intended for checks at small sizes.
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let dim = self.param_dim();
        let mut a = DMatrix::zeros(self.stacked_dim(), dim);
        let mut basis = vec![0.0; dim];
        let mut col = vec![0.0; self.stacked_dim()];
        for c in 0..dim {
            basis.iter_mut().for_each(|v| *v = 0.0);
            basis[c] = 1.0;
            self.apply_into(&basis, &mut col);
            for (r, v) in col.iter().enumerate() {
                a[(r, c)] = *v;
            }
        }
        a
    }

    /// Power-iteration estimate of `‖A‖`.
    pub fn norm_estimate(&self) -> f64 {
        let mut image = vec![0.0; self.stacked_dim()];
        linalg::power_iteration_norm(
            self.param_dim(),
            |v, out| {
                self.apply_into(v, &mut image);
                self.adjoint_into(&image, out);
            },
            linalg::POWER_MAX_STEPS,
            linalg::POWER_TOL,
        )
    }

    /// Adds `scale · e_l` to the `w_r` block and subtracts it from `w_s`
    /// (the adjoint `Ω_{rs}ᵀ` applied to a coordinate vector).
    fn embed_pair(&self, r: usize, s: usize, l: usize, scale: f64, q: &mut [f64]) {
        let stride = self.n_features + 1;
        q[(r - 1) * stride + l] += scale;
        q[(s - 1) * stride + l] -= scale;
    }

    /// Coordinate `k` of `w_r − w_s` for a flat parameter vector.
    fn pair_difference(&self, p: &[f64], r: usize, s: usize, k: usize) -> f64 {
        let stride = self.n_features + 1;
        p[(r - 1) * stride + k] - p[(s - 1) * stride + k]
    }

    /// Graph projection of `(p, u)` computed into `(p_out, u_out)`.
    pub(crate) fn project_graph_into(
        &self,
        p: &[f64],
        u: &[f64],
        p_out: &mut [f64],
        u_out: &mut [f64],
    ) {
        self.adjoint_into(u, p_out);
        linalg::axpy(1.0, p, p_out);
        self.solve_normal_in_place(p_out);
        self.apply_into(p_out, u_out);
    }

    /// Only the `p̂` part of the graph projection.
    pub(crate) fn project_graph_params(&self, p: &[f64], u: &[f64], p_out: &mut [f64]) {
        self.adjoint_into(u, p_out);
        linalg::axpy(1.0, p, p_out);
        self.solve_normal_in_place(p_out);
    }

    /// `M_rs(p, u) = Ω_{rs} P_graph(p, u)`, i.e. `ŵ_r − ŵ_s`.
    pub fn pair_link_map(&self, p: &[f64], u: &[f64], r: usize, s: usize) -> Vec<f64> {
        let mut ph = vec![0.0; self.param_dim()];
        self.project_graph_params(p, u, &mut ph);
        (0..self.n_features)
            .map(|k| self.pair_difference(&ph, r, s, k))
            .collect()
    }

    /// In-place projection onto `L_{r,s}` for the pair with index `k`.
    pub(crate) fn project_pair_link_in_place(
        &self,
        z: &mut ProductPoint,
        k: usize,
        scratch: &mut LinkScratch,
    ) {
        let (r, s) = self.pairs[k];
        let n = self.n_features;
        // p̂ = P_graph(p, u); y = (I + Ω G Ωᵀ)⁻¹ (ω_rs − Ω p̂)
        self.project_graph_params(z.p.as_slice(), &z.u, &mut scratch.graph);
        scratch.dual.clear();
        for (l, &w) in z.omega_block(k).iter().enumerate() {
            scratch.dual.push(w - self.pair_difference(&scratch.graph, r, s, l));
        }
        {
            let mut view = DVectorViewMut::from_slice(&mut scratch.dual, n);
            self.links[k].solve_mut(&mut view);
        }
        // (p, u) += P_graph(Ωᵀ y, 0) = (c, A c) with c = G Ωᵀ y; ω_rs −= y
        scratch.params.iter_mut().for_each(|v| *v = 0.0);
        for l in 0..n {
            self.embed_pair(r, s, l, scratch.dual[l], &mut scratch.params);
        }
        self.solve_normal_in_place(&mut scratch.params);
        self.apply_into(&scratch.params, &mut scratch.stacked);
        linalg::axpy(1.0, &scratch.params, z.p.as_mut_slice());
        linalg::axpy(1.0, &scratch.stacked, &mut z.u);
        linalg::axpy(-1.0, &scratch.dual, z.omega_block_mut(k));
    }

    pub(crate) fn check_point(&self, z: &ProductPoint) -> Result<()> {
        if z.p.n_features() != self.n_features
            || z.p.n_classes() != self.n_classes
            || z.u.len() != self.stacked_dim()
            || z.omega.len() != self.pairs.len() * self.n_features
        {
            return Err(Error::input(
                "product point dimensions do not match the data operator",
            ));
        }
        Ok(())
    }
}

/// Reusable buffers for [`DataOperator::project_pair_link_in_place`].
#[derive(Clone, Debug)]
pub(crate) struct LinkScratch {
    graph: Vec<f64>,
    params: Vec<f64>,
    stacked: Vec<f64>,
    dual: Vec<f64>,
}

impl LinkScratch {
    pub(crate) fn new(ops: &DataOperator) -> Self {
        LinkScratch {
            graph: vec![0.0; ops.param_dim()],
            params: vec![0.0; ops.param_dim()],
            stacked: vec![0.0; ops.stacked_dim()],
            dual: Vec::with_capacity(ops.n_features()),
        }
    }
}

/// Projection onto the graph `{(p, u) : u = A p}`:
/// `p̂ = (I + AᵀA)⁻¹ (p + Aᵀu)`, `û = A p̂`.
pub fn project_nullspace_graph(
    p: &ClassifierParams,
    u: &[f64],
    ops: &DataOperator,
) -> Result<(ClassifierParams, Vec<f64>)> {
    if p.dim() != ops.param_dim() || u.len() != ops.stacked_dim() {
        return Err(Error::input(format!(
            "graph projection expects dimensions ({}, {}), got ({}, {})",
            ops.param_dim(),
            ops.stacked_dim(),
            p.dim(),
            u.len()
        )));
    }
    ensure_finite(p.as_slice(), "graph projection p")?;
    ensure_finite(u, "graph projection u")?;
    let mut ph = vec![0.0; ops.param_dim()];
    let mut uh = vec![0.0; ops.stacked_dim()];
    ops.project_graph_into(p.as_slice(), u, &mut ph, &mut uh);
    Ok((
        ClassifierParams::from_flat(p.n_features(), p.n_classes(), ph)?,
        uh,
    ))
}

/// Projection of `z` onto `L_{r,s}`; only `(p, u)` and the `(r, s)` block of
/// `ω` move.
pub fn project_pair_link(
    z: &ProductPoint,
    r: usize,
    s: usize,
    ops: &DataOperator,
) -> Result<ProductPoint> {
    ops.check_point(z)?;
    let k = ops
        .pairs
        .iter()
        .position(|&pair| pair == (r, s))
        .ok_or_else(|| Error::input(format!("({r}, {s}) is not a pair r < s of 1..={}", ops.n_classes)))?;
    if !z.is_finite() {
        return Err(Error::input("pair-link projection input is not finite"));
    }
    let mut out = z.clone();
    ops.project_pair_link_in_place(&mut out, k, &mut LinkScratch::new(ops));
    Ok(out)
}
