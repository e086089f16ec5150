use log::warn;
use rand::Rng;

use crate::graph::Graph;
use crate::rng::stream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_steps: usize,
    /// Stop once the Ritz residual `beta_k |y_k|` falls below this.
    pub tolerance: f64,
    pub check_every: usize,
    pub start_seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_steps: 100_000,
            tolerance: 1e-8,
            check_every: 8,
            start_seed: 0x1a2c_3e4f,
        }
    }
}

/// Smallest nonzero eigenvalue of the normalized Laplacian
/// `I - D^-1/2 A D^-1/2` of a connected graph.
pub fn spectral_gap(g: &Graph) -> Result<f64> {
    spectral_gap_with(g, &LanczosOptions::default())
}

/// Lanczos with full reorthogonalization on `N = D^-1/2 A D^-1/2`, started
/// orthogonal to its top eigenvector `d^1/2`. The largest Ritz value of the
/// deflated operator is the second eigenvalue `mu_2` of `N`, and the gap is
/// `1 - mu_2`.
pub fn spectral_gap_with(g: &Graph, opts: &LanczosOptions) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::domain("spectral gap needs at least two nodes"));
    }
    if !g.is_connected() {
        return Err(Error::domain("graph is disconnected; its spectral gap is 0"));
    }
    let inv_sqrt_d: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let mut top: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
    normalize(&mut top);
    let apply = |x: &[f64], y: &mut [f64]| {
        for v in 0..n {
            let s: f64 = g.neighbors(v).iter().map(|&u| x[u] * inv_sqrt_d[u]).sum();
            y[v] = s * inv_sqrt_d[v];
        }
    };

    let mut rng = stream(opts.start_seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_out(&mut q, &top);
    normalize(&mut q);

    let limit = opts.max_steps.min(n - 1).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut theta = f64::NAN;
    for k in 0..limit {
        apply(&q, &mut w);
        let a = dot(&w, &q);
        for i in 0..n {
            w[i] -= a * q[i];
        }
        if let Some(prev) = basis.last() {
            let b = *beta.last().unwrap();
            for i in 0..n {
                w[i] -= b * prev[i];
            }
        }
        // Two passes of classical Gram-Schmidt against everything so far.
        for _ in 0..2 {
            project_out(&mut w, &top);
            project_out(&mut w, &q);
            for prev in &basis {
                project_out(&mut w, prev);
            }
        }
        alpha.push(a);
        let b = dot(&w, &w).sqrt();
        basis.push(std::mem::take(&mut q));
        let breakdown = b < 1e-12;
        let last = k + 1 == limit || breakdown;
        if last || (k + 1) % opts.check_every == 0 {
            theta = largest_tridiagonal_eigenvalue(&alpha, &beta);
            let residual = b * last_eigenvector_component(&alpha, &beta, theta).abs();
            if residual < opts.tolerance || breakdown {
                break;
            }
            if last {
                if limit < n - 1 {
                    warn!("Lanczos stopped at {limit} steps with residual {residual}");
                }
                break;
            }
        }
        beta.push(b);
        q = w.iter().map(|x| x / b).collect();
    }
    Ok(1.0 - theta)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let norm = dot(x, x).sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}

fn project_out(x: &mut [f64], unit: &[f64]) {
    let c = dot(x, unit);
    for (a, b) in x.iter_mut().zip(unit) {
        *a -= c * b;
    }
}

/// Number of eigenvalues of the tridiagonal matrix below `x` (Sturm count).
fn count_below(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = alpha[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (alpha[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn largest_tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    // Gershgorin bounds.
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let beta = &beta[..k - 1];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(alpha, beta, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Last component of the unit eigenvector for `theta`, by inverse iteration
/// with a shift just above `theta`, where `T - sigma I` is negative definite.
fn last_eigenvector_component(alpha: &[f64], beta: &[f64], theta: f64) -> f64 {
    let k = alpha.len();
    if k == 1 {
        return 1.0;
    }
    let sigma = theta + 1e-13 * theta.abs().max(1.0);
    let mut z = vec![1.0; k];
    for _ in 0..3 {
        // Tridiagonal solve (Thomas) of (T - sigma I) y = z.
        let mut diag: Vec<f64> = alpha.iter().map(|a| a - sigma).collect();
        let mut rhs = z.clone();
        for i in 1..k {
            let m = beta[i - 1] / diag[i - 1];
            diag[i] -= m * beta[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        let mut y = vec![0.0; k];
        y[k - 1] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            y[i] = (rhs[i] - beta[i] * y[i + 1]) / diag[i];
        }
        normalize(&mut y);
        z = y;
    }
    z[k - 1]
}
