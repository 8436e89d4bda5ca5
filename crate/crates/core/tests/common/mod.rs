//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the solvers; the only library items used are the
//! plain data containers and the evaluation functions.

#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhc_msvm::{ClassifierParams, Dataset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// A one-dimensional dataset with every class present. With `sorted`, labels
/// increase with `x`, which makes the data separable.
pub fn tiny_instance(rng: &mut ChaCha8Rng, k: usize, m: usize, sorted: bool) -> Dataset {
    assert!(m >= k);
    let mut xs: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut labels: Vec<usize> = (1..=k).collect();
    while labels.len() < m {
        labels.push(rng.gen_range(1..=k));
    }
    if sorted {
        xs.sort_by(f64::total_cmp);
        labels.sort();
    } else {
        labels.shuffle(rng);
    }
    Dataset::new(xs.into_iter().map(|x| vec![x]).collect(), labels, k).unwrap()
}

/// Plain re-implementation of the generalized hinge loss.
pub fn hinge(p: &ClassifierParams, d: &Dataset) -> f64 {
    let k = d.n_classes();
    let mut total = 0.0;
    for (x, y) in d.iter() {
        let score = |j: usize| -> f64 {
            p.w(j).iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + p.b(j)
        };
        let sy = score(y);
        let mut worst: f64 = 0.0;
        for j in (1..=k).filter(|&j| j != y) {
            worst = worst.max(1.0 - (sy - score(j)));
        }
        total += worst;
    }
    total
}

pub fn psi(p: &ClassifierParams) -> f64 {
    let k = p.n_classes();
    let mut m: f64 = 0.0;
    for r in 1..=k {
        for s in r + 1..=k {
            let d: f64 = p.w(r).iter().zip(p.w(s)).map(|(a, b)| (a - b) * (a - b)).sum();
            m = m.max(d.sqrt());
        }
    }
    m
}

/// For `N = 1` the hinge loss depends only on
/// `θ = (w_1 − w_K, …, w_{K−1} − w_K, b_1 − b_K, …, b_{K−1} − b_K)`.
pub fn params_from_theta(theta: &[f64], k: usize) -> ClassifierParams {
    let mut w = vec![vec![0.0]; k];
    let mut b = vec![0.0; k];
    for j in 0..k - 1 {
        w[j][0] = theta[j];
        b[j] = theta[k - 1 + j];
    }
    ClassifierParams::from_parts(&w, &b).unwrap()
}

pub fn theta_from_params(p: &ClassifierParams) -> Vec<f64> {
    let k = p.n_classes();
    let mut theta = vec![0.0; 2 * (k - 1)];
    for j in 0..k - 1 {
        theta[j] = p.w(j + 1)[0] - p.w(k)[0];
        theta[k - 1 + j] = p.b(j + 1) - p.b(k);
    }
    theta
}

/// Affine piece `j` of sample `i` as `(gradient in θ, constant)`.
fn piece(x: f64, y: usize, j: usize, k: usize) -> (Vec<f64>, f64) {
    let dim = 2 * (k - 1);
    let mut g = vec![0.0; dim];
    // (w_j − w_y) x + (b_j − b_y) + [j ≠ y]
    if j < k {
        g[j - 1] += x;
        g[k - 1 + j - 1] += 1.0;
    }
    if y < k {
        g[y - 1] -= x;
        g[k - 1 + y - 1] -= 1.0;
    }
    (g, if j == y { 0.0 } else { 1.0 })
}

/// Every hyperplane on which two affine pieces of one sample coincide.
fn kink_hyperplanes(d: &Dataset) -> Vec<(Vec<f64>, f64)> {
    let k = d.n_classes();
    let mut planes = Vec::new();
    for (x, y) in d.iter() {
        for j in 1..=k {
            for l in j + 1..=k {
                let (gj, cj) = piece(x[0], y, j, k);
                let (gl, cl) = piece(x[0], y, l, k);
                let normal: Vec<f64> = gj.iter().zip(&gl).map(|(a, b)| a - b).collect();
                planes.push((normal, cl - cj));
            }
        }
    }
    planes
}

fn for_each_combination(n: usize, r: usize, f: &mut impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..r).collect();
    if r > n {
        return;
    }
    loop {
        f(&idx);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub struct HingeOracle {
    pub min: f64,
    /// Every vertex of the piecewise-linear structure attaining the minimum
    /// within `1e−9`.
    pub minimizers: Vec<Vec<f64>>,
}

/// Exact minimum of the hinge loss of an `N = 1` dataset.
///
/// The loss is convex and piecewise linear in `θ`, so (when its minimum set
/// contains no line, which holds whenever every class pair is represented by
/// two distinct abscissae) the minimum is attained at a vertex of the
/// arrangement of kink hyperplanes. All vertices are enumerated.
pub fn hinge_min_vertices(d: &Dataset) -> HingeOracle {
    assert_eq!(d.n_features(), 1);
    let k = d.n_classes();
    let dim = 2 * (k - 1);
    let planes = kink_hyperplanes(d);
    let mut values: Vec<(f64, Vec<f64>)> = Vec::new();
    for_each_combination(planes.len(), dim, &mut |sel| {
        let a = DMatrix::from_fn(dim, dim, |r, c| planes[sel[r]].0[c]);
        let rhs = DVector::from_fn(dim, |r, _| planes[sel[r]].1);
        let svd = a.clone().svd(false, false);
        let smin = svd.singular_values.min();
        if smin < 1e-9 {
            return;
        }
        if let Some(sol) = a.lu().solve(&rhs) {
            let theta: Vec<f64> = sol.iter().copied().collect();
            let v = hinge(&params_from_theta(&theta, k), d);
            values.push((v, theta));
        }
    });
    let min = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let minimizers = values
        .into_iter()
        .filter(|(v, _)| *v <= min + 1e-9)
        .map(|(_, t)| t)
        .collect();
    HingeOracle { min, minimizers }
}

/// Points of a regular grid over the box `[−radius, radius]^dim`.
pub fn grid_points(dim: usize, per_axis: usize, radius: f64) -> impl Iterator<Item = Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    let step = 2.0 * radius / (per_axis - 1) as f64;
    (0..total).map(move |mut idx| {
        let mut theta = vec![0.0; dim];
        for t in theta.iter_mut() {
            *t = -radius + (idx % per_axis) as f64 * step;
            idx /= per_axis;
        }
        theta
    })
}

/// Hard-margin binary SVM `min ½‖w‖²` s.t. `s_i (wᵀx_i + b) ≥ 1`, by
/// enumerating candidate support sets and solving their KKT systems.
/// Class 1 is `s = +1`, class 2 is `s = −1`. Returns `None` when no support
/// set yields a feasible point (non-separable data).
pub fn hard_margin_svm(d: &Dataset) -> Option<(Vec<f64>, f64)> {
    assert_eq!(d.n_classes(), 2);
    let n = d.n_features();
    let m = d.len();
    let sign: Vec<f64> = d.labels().iter().map(|&y| if y == 1 { 1.0 } else { -1.0 }).collect();
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    for size in 2..=(n + 1).min(m) {
        for_each_combination(m, size, &mut |sel| {
            if !sel.iter().any(|&i| sign[i] > 0.0) || !sel.iter().any(|&i| sign[i] < 0.0) {
                return;
            }
            // Unknowns (α_S, b):  Σ_k α_k s_k s_i x_kᵀx_i + s_i b = 1,  Σ α_k s_k = 0.
            let q = size + 1;
            let mut a = DMatrix::<f64>::zeros(q, q);
            let mut rhs = DVector::<f64>::zeros(q);
            for (r, &i) in sel.iter().enumerate() {
                for (c, &kk) in sel.iter().enumerate() {
                    let dot: f64 = d.sample(kk).iter().zip(d.sample(i)).map(|(u, v)| u * v).sum();
                    a[(r, c)] = sign[kk] * sign[i] * dot;
                }
                a[(r, size)] = sign[i];
                rhs[r] = 1.0;
                a[(size, r)] = sign[i];
            }
            let Some(sol) = a.lu().solve(&rhs) else { return };
            if sol.iter().take(size).any(|&al| al < -1e-12) || !sol.iter().all(|v| v.is_finite()) {
                return;
            }
            let mut w = vec![0.0; n];
            for (r, &kk) in sel.iter().enumerate() {
                for (wl, xl) in w.iter_mut().zip(d.sample(kk)) {
                    *wl += sol[r] * sign[kk] * xl;
                }
            }
            let b = sol[size];
            let feasible = (0..m).all(|i| {
                let v: f64 = w.iter().zip(d.sample(i)).map(|(u, v)| u * v).sum::<f64>() + b;
                sign[i] * v >= 1.0 - 1e-9
            });
            if !feasible {
                return;
            }
            let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(_, _, bn)| norm < *bn) {
                best = Some((w, b, norm));
            }
        });
    }
    best.map(|(w, b, _)| (w, b))
}

/// Separable two-class data in `R^n`: two Gaussian-like blobs pushed apart
/// along a random direction.
pub fn separable_binary(rng: &mut ChaCha8Rng, n: usize, per_class: usize) -> Dataset {
    let dir = random_vec(rng, n, 1.0);
    let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (label, side) in [(1usize, 1.0f64), (2, -1.0)] {
        let mut made = 0;
        while made < per_class {
            let x = random_vec(rng, n, 2.0);
            let proj: f64 = x.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() / norm;
            if side * proj > 0.3 {
                samples.push(x);
                labels.push(label);
                made += 1;
            }
        }
    }
    Dataset::new(samples, labels, 2).unwrap()
}

/// Worst-pair objective of the `θ` parametrization (`w_K = 0`).
pub fn psi_theta(theta: &[f64], k: usize) -> f64 {
    psi(&params_from_theta(theta, k))
}

/// Exact two-stage solution of the hierarchy at `N = 1` by linear
/// programming: first `min Φ_D`, then `min Ψ` over `{Φ_D ≤ min + slack}`.
/// Returns `(min Φ_D, min Ψ over the minimizers)`.
pub fn hierarchy_lp(d: &Dataset, slack: f64) -> (f64, f64) {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    assert_eq!(d.n_features(), 1);
    let k = d.n_classes();
    let dim = 2 * (k - 1);
    let free = (f64::NEG_INFINITY, f64::INFINITY);

    let build = |stage2: Option<f64>| {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let hinge_weight = if stage2.is_some() { 0.0 } else { 1.0 };
        let theta: Vec<_> = (0..dim).map(|_| lp.add_var(0.0, free)).collect();
        let xi: Vec<_> = (0..d.len()).map(|_| lp.add_var(hinge_weight, (0.0, f64::INFINITY))).collect();
        for (i, (x, y)) in d.iter().enumerate() {
            for j in (1..=k).filter(|&j| j != y) {
                // ξ_i ≥ gᵀθ + 1
                let (g, c) = piece(x[0], y, j, k);
                let mut expr = vec![(xi[i], 1.0)];
                for (l, &gl) in g.iter().enumerate() {
                    if gl != 0.0 {
                        expr.push((theta[l], -gl));
                    }
                }
                lp.add_constraint(&expr[..], ComparisonOp::Ge, c);
            }
        }
        let mut s_var = None;
        if let Some(bound) = stage2 {
            let s = lp.add_var(1.0, free);
            let all: Vec<_> = xi.iter().map(|&v| (v, 1.0)).collect();
            lp.add_constraint(&all[..], ComparisonOp::Le, bound);
            for r in 1..=k {
                for q in r + 1..=k {
                    // ω_rq = θ_r − θ_q, with θ_K = 0.
                    for sign in [1.0, -1.0] {
                        let mut expr = vec![(s, 1.0), (theta[r - 1], -sign)];
                        if q < k {
                            expr.push((theta[q - 1], sign));
                        }
                        lp.add_constraint(&expr[..], ComparisonOp::Ge, 0.0);
                    }
                }
            }
            s_var = Some(s);
        }
        (lp, s_var)
    };

    let (lp1, _) = build(None);
    let min = lp1.solve().expect("stage 1 LP").objective();
    let (lp2, s) = build(Some(min + slack));
    let sol = lp2.solve().expect("stage 2 LP");
    let psi_min = sol[s.unwrap()];
    (min, psi_min)
}

/// `A` written out from its definition, independent of the library:
/// row `i·K + j` maps `p` to `(w_j − w_{y_i})ᵀx_i + (b_j − b_{y_i})`.
pub fn dense_operator(d: &Dataset) -> DMatrix<f64> {
    let (n, k, m) = (d.n_features(), d.n_classes(), d.len());
    let stride = n + 1;
    let mut a = DMatrix::zeros(k * m, k * stride);
    for (i, (x, y)) in d.iter().enumerate() {
        for j in 1..=k {
            if j == y {
                continue;
            }
            let row = i * k + j - 1;
            for l in 0..n {
                a[(row, (j - 1) * stride + l)] += x[l];
                a[(row, (y - 1) * stride + l)] -= x[l];
            }
            a[(row, (j - 1) * stride + n)] += 1.0;
            a[(row, (y - 1) * stride + n)] -= 1.0;
        }
    }
    a
}

/// Minimizes `½‖x − x0‖²` subject to `C x = 0` through the dense KKT system.
pub fn project_onto_kernel(c: &DMatrix<f64>, x0: &[f64]) -> Vec<f64> {
    let (rows, dim) = c.shape();
    let mut kkt = DMatrix::<f64>::zeros(dim + rows, dim + rows);
    let mut rhs = DVector::<f64>::zeros(dim + rows);
    for i in 0..dim {
        kkt[(i, i)] = 1.0;
        rhs[i] = x0[i];
    }
    for r in 0..rows {
        for cidx in 0..dim {
            kkt[(dim + r, cidx)] = c[(r, cidx)];
            kkt[(cidx, dim + r)] = c[(r, cidx)];
        }
    }
    let sol = kkt.lu().solve(&rhs).expect("KKT system is nonsingular");
    sol.iter().take(dim).copied().collect()
}

/// Simplex projection by enumerating supports.
pub fn simplex_brute_force(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut y = vec![0.0; n];
        let mut ok = true;
        for &i in &support {
            y[i] = v[i] - shift;
            ok &= y[i] >= -1e-15;
        }
        if !ok {
            continue;
        }
        let dist: f64 = y.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, y));
        }
    }
    best.unwrap().1
}

/// `h(y) = max_j y_j + r_j`.
pub fn shifted_max(y: &[f64], r: &[f64]) -> f64 {
    y.iter().zip(r).map(|(a, b)| a + b).fold(f64::NEG_INFINITY, f64::max)
}

/// `argmin_y h(y) + ½‖y − v‖²` by enumerating the active set `S` of the
/// max: on `S`, `y_j = s − r_j` with a common level `s`; elsewhere `y_j = v_j`.
pub fn prox_max_brute_force(v: &[f64], r: &[f64]) -> Vec<f64> {
    let n = v.len();
    let obj = |y: &[f64]| {
        shifted_max(y, r) + 0.5 * y.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let level = (set.iter().map(|&j| v[j] + r[j]).sum::<f64>() - 1.0) / set.len() as f64;
        let mut y = v.to_vec();
        for &j in &set {
            y[j] = level - r[j];
        }
        let value = obj(&y);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, y));
        }
    }
    best.unwrap().1
}

/// Projection onto `{‖ω‖ ≤ t}` for `ω ∈ R²` by scanning boundary rays.
pub fn soc2_brute_force(omega: [f64; 2], t: f64) -> ([f64; 2], f64) {
    if (omega[0] * omega[0] + omega[1] * omega[1]).sqrt() <= t {
        return (omega, t);
    }
    let dist = |phi: f64| {
        let e = [phi.cos(), phi.sin()];
        let tau = ((omega[0] * e[0] + omega[1] * e[1] + t) / 2.0).max(0.0);
        let q = [tau * e[0], tau * e[1]];
        let dd = (q[0] - omega[0]).powi(2) + (q[1] - omega[1]).powi(2) + (tau - t).powi(2);
        (dd, q, tau)
    };
    let steps = 20_000;
    let mut best_phi = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..steps {
        let phi = i as f64 / steps as f64 * std::f64::consts::TAU;
        let (dd, _, _) = dist(phi);
        if dd < best {
            best = dd;
            best_phi = phi;
        }
    }
    // golden-section polish around the best ray
    let h = std::f64::consts::TAU / steps as f64;
    let (mut lo, mut hi) = (best_phi - h, best_phi + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if dist(a).0 < dist(b).0 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let (_, q, tau) = dist(0.5 * (lo + hi));
    (q, tau)
}

/// Projection onto `{|ω| ≤ t}` in `R × R`, a polyhedral cone: enumerate
/// the interior, the two faces `t = ±ω` and the apex.
pub fn soc1_brute_force(omega: f64, t: f64) -> (f64, f64) {
    let mut cands = vec![(0.0, 0.0)];
    if omega.abs() <= t {
        cands.push((omega, t));
    }
    for sign in [1.0, -1.0] {
        // face t = sign·ω, parametrized by ω = sign·τ, τ ≥ 0
        let tau: f64 = ((sign * omega + t) / 2.0).max(0.0);
        cands.push((sign * tau, tau));
    }
    cands
        .into_iter()
        .min_by(|a, b| {
            let da = (a.0 - omega).powi(2) + (a.1 - t).powi(2);
            let db = (b.0 - omega).powi(2) + (b.1 - t).powi(2);
            da.total_cmp(&db)
        })
        .unwrap()
}

/// Independent `½ Σ_{r<s} ‖w_r − w_s‖²`.
pub fn quadratic_term(p: &ClassifierParams) -> f64 {
    let k = p.n_classes();
    let mut q = 0.0;
    for r in 1..=k {
        for s in r + 1..=k {
            q += p.w(r).iter().zip(p.w(s)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
    }
    0.5 * q
}

/// A random dataset with every class present.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, k: usize, m: usize) -> Dataset {
    let samples = (0..m).map(|_| random_vec(rng, n, 2.0)).collect();
    let mut labels: Vec<usize> = (1..=k).collect();
    while labels.len() < m {
        labels.push(rng.gen_range(1..=k));
    }
    labels.shuffle(rng);
    Dataset::new(samples, labels, k).unwrap()
}

pub fn unit_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = random_vec(rng, n, 1.0);
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}
