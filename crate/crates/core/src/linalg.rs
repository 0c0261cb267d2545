//! Small dense linear algebra: one-sided Jacobi SVD, Moore–Penrose
//! pseudoinverse, and Gram–Schmidt orthonormalisation.
//!
//! Sized for the theory verifier (matrices of a few dozen entries), not for
//! training workloads.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::tensor::{matmul, Tensor};

/// Thin singular value decomposition `a = u · diag(s) · vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × r` with orthonormal columns (columns for zero singular values are zero).
    pub u: Tensor,
    /// Singular values, descending.
    pub s: Vec<f64>,
    /// `n × r` with orthonormal columns.
    pub v: Tensor,
}

pub fn svd(a: &Tensor) -> Result<Svd> {
    let (m, n) = match a.shape() {
        [m, n] => (*m, *n),
        s => {
            return Err(Error::Rank {
                op: "svd",
                expected: 2,
                shape: s.to_vec(),
            })
        }
    };
    if m < n {
        let t = svd(&a.transpose()?)?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    // Column-major working copies.
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a.data()[i * n + j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = u
        .iter()
        .enumerate()
        .map(|(j, col)| (math::sqrt(col.iter().map(|x| x * x).sum()), j))
        .collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut ud = vec![0.0; m * n];
    let mut vd = vec![0.0; n * n];
    let mut s = Vec::with_capacity(n);
    for (k, &(sigma, j)) in order.iter().enumerate() {
        s.push(sigma);
        for i in 0..m {
            ud[i * n + k] = if sigma > 0.0 { u[j][i] / sigma } else { 0.0 };
        }
        for i in 0..n {
            vd[i * n + k] = v[j][i];
        }
    }
    Ok(Svd {
        u: Tensor::matrix(m, n, ud)?,
        s,
        v: Tensor::matrix(n, n, vd)?,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let len = cols[p].len();
    for i in 0..len {
        let x = cols[p][i];
        let y = cols[q][i];
        cols[p][i] = c * x - s * y;
        cols[q][i] = s * x + c * y;
    }
}

/// Moore–Penrose pseudoinverse; singular values below `1e-10 · σ_max`
/// count as zero.
pub fn pinv(a: &Tensor) -> Result<Tensor> {
    let d = svd(a)?;
    let (m, n) = (a.shape()[0], a.shape()[1]);
    let r = d.s.len();
    let smax = d.s.first().copied().unwrap_or(0.0);
    let cutoff = 1e-10 * smax;
    let mut out = vec![0.0; n * m];
    for k in 0..r {
        let sigma = d.s[k];
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = d.v.data()[i * r + k] / sigma;
            for j in 0..m {
                out[i * m + j] += vik * d.u.data()[j * r + k];
            }
        }
    }
    Tensor::matrix(n, m, out)
}

/// Largest violation of the four Moore–Penrose conditions for `p = a⁺`.
pub fn penrose_residual(a: &Tensor, p: &Tensor) -> Result<f64> {
    let ap = matmul(a, p)?;
    let pa = matmul(p, a)?;
    let c1 = matmul(&ap, a)?.max_abs_diff(a);
    let c2 = matmul(&pa, p)?.max_abs_diff(p);
    let c3 = ap.transpose()?.max_abs_diff(&ap);
    let c4 = pa.transpose()?.max_abs_diff(&pa);
    Ok(c1.max(c2).max(c3).max(c4))
}

/// Random `rows × cols` matrix with orthonormal columns (`AᵀA = I`), built
/// by modified Gram–Schmidt on Gaussian columns.
pub fn random_orthonormal_columns(rows: usize, cols: usize, rng: &mut Rng) -> Result<Tensor> {
    if rows < cols {
        return Err(Error::Config(alloc::format!(
            "orthonormal columns need rows >= cols, got {rows} x {cols}"
        )));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut c: Vec<f64> = (0..rows).map(|_| rng.normal()).collect();
        for b in &basis {
            let proj: f64 = c.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in c.iter_mut().zip(b) {
                *x -= proj * y;
            }
        }
        let norm = math::sqrt(c.iter().map(|x| x * x).sum());
        if norm < 1e-8 {
            continue;
        }
        c.iter_mut().for_each(|x| *x /= norm);
        basis.push(c);
    }
    let mut data = vec![0.0; rows * cols];
    for (j, col) in basis.iter().enumerate() {
        for i in 0..rows {
            data[i * cols + j] = col[i];
        }
    }
    Tensor::matrix(rows, cols, data)
}
