//! Small dense helpers over `f64` slices.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Radial projection of `x` onto the closed ball of the given radius around 0.
pub fn project_ball(x: &mut [f64], radius: f64) {
    let n = norm(x);
    if n > radius {
        scale(radius / n, x);
    }
}

/// Step cap and relative tolerance used for every operator-norm estimate.
pub const POWER_MAX_STEPS: usize = 1000;
pub const POWER_TOL: f64 = 1e-8;

/// Estimates the operator norm `‖A‖` by power iteration on `AᵀA`.
///
/// `normal` must write `AᵀA v` into its second argument. The start vector is
/// a fixed low-discrepancy sequence, so the estimate is deterministic and
/// the start is not trapped in a structured null space (such as the
/// constant vectors). Iteration stops
/// after `max_steps` or when the Rayleigh quotient moves by less than `tol`
/// relative.
pub fn power_iteration_norm<F>(dim: usize, mut normal: F, max_steps: usize, tol: f64) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + (i as f64 * 0.618_033_988_749_895).fract())
        .collect();
    let n0 = norm(&v);
    scale(1.0 / n0, &mut v);
    let mut w = vec![0.0; dim];
    let mut estimate = 0.0;
    for _ in 0..max_steps {
        normal(&v, &mut w);
        let rayleigh = dot(&v, &w);
        let n = norm(&w);
        if n == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / n;
        }
        let converged = (rayleigh - estimate).abs() <= tol * rayleigh.abs();
        estimate = rayleigh;
        if converged {
            break;
        }
    }
    // One more product so the quotient corresponds to the final direction.
    normal(&v, &mut w);
    dot(&v, &w).max(estimate).sqrt()
}
