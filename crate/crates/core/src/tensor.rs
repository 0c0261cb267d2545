//! Dense row-major `f64` tensors and the handful of kernels the training
//! rules need.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::network::Activation;
use crate::rng::Rng;

/// Dense row-major array with an explicit shape.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if shape.contains(&0) || expected != data.len() {
            return Err(Error::dim("Tensor::new", &shape, &[data.len()]));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Tensor {
            shape: vec![rows.len(), cols],
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// Entries drawn i.i.d. from `N(0, std²)`.
    pub fn randn(shape: &[usize], std: f64, rng: &mut Rng) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| std * rng.normal()).collect();
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn uniform(shape: &[usize], lo: f64, hi: f64, rng: &mut Rng) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.uniform_range(lo, hi)).collect();
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Number of rows when viewed as a matrix (a vector is one row).
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            1 => 1,
            _ => self.shape[0],
        }
    }

    /// Row width when viewed as a matrix: product of all trailing dims.
    pub fn cols(&self) -> usize {
        match self.shape.len() {
            1 => self.shape[0],
            _ => self.shape[1..].iter().product(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len(), "index rank");
        let mut o = 0;
        for (i, (&k, &d)) in idx.iter().zip(&self.shape).enumerate() {
            assert!(k < d, "index {k} out of bounds for axis {i} of size {d}");
            o = o * d + k;
        }
        o
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        Tensor::new(shape.to_vec(), self.data.clone())
    }

    pub fn into_shape(self, shape: &[usize]) -> Result<Tensor> {
        Tensor::new(shape.to_vec(), self.data)
    }

    /// Rank-1 view of the same values.
    pub fn flatten(&self) -> Tensor {
        Tensor::vector(self.data.clone())
    }

    /// Promotes a vector to a single-row matrix; matrices are returned as-is.
    pub fn as_matrix(&self) -> Tensor {
        Tensor {
            shape: vec![self.rows(), self.cols()],
            data: self.data.clone(),
        }
    }

    pub fn transpose(&self) -> Result<Tensor> {
        let (r, c) = match self.shape.as_slice() {
            [n] => (1, *n),
            [r, c] => (*r, *c),
            _ => {
                return Err(Error::Rank {
                    op: "transpose",
                    expected: 2,
                    shape: self.shape.clone(),
                })
            }
        };
        const TILE: usize = 32;
        let mut out = vec![0.0; r * c];
        for i0 in (0..r).step_by(TILE) {
            for j0 in (0..c).step_by(TILE) {
                for i in i0..(i0 + TILE).min(r) {
                    for j in j0..(j0 + TILE).min(c) {
                        out[j * r + i] = self.data[i * c + j];
                    }
                }
            }
        }
        Ok(Tensor {
            shape: vec![c, r],
            data: out,
        })
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.data.len() != other.data.len() || self.cols() != other.cols() {
            return Err(Error::dim(op, &self.shape, &other.shape));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, "sub", |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, "hadamard", |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        self.map(|v| c * v)
    }

    /// `self += c * other`, elementwise.
    pub fn axpy(&mut self, c: f64, other: &Tensor) -> Result<()> {
        if self.data.len() != other.data.len() {
            return Err(Error::dim("axpy", &self.shape, &other.shape));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        if self.data.len() != other.data.len() {
            return Err(Error::dim("dot", &self.shape, &other.shape));
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(dot(&self.data, &self.data))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| if v.abs() > m { v.abs() } else { m })
    }

    /// Largest absolute elementwise difference; shapes must hold the same
    /// number of values.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "max_abs_diff length");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| if (a - b).abs() > m { (a - b).abs() } else { m })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Index of the largest entry of row `i`; ties go to the lowest index.
    pub fn argmax_row(&self, i: usize) -> usize {
        argmax(self.row(i))
    }

    /// Gathers the listed rows into a new `[idx.len() × cols]` matrix,
    /// keeping any trailing dimensions.
    pub fn select_rows(&self, idx: &[usize]) -> Tensor {
        let c = self.cols();
        let mut data = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        let mut shape = self.shape.clone();
        if shape.len() == 1 {
            shape = vec![idx.len(), c];
        } else {
            shape[0] = idx.len();
        }
        Tensor { shape, data }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Matrix product `a · b`.
///
/// Every output element is accumulated left to right over the inner index,
/// starting from `0.0`, so the result is bit-identical to the textbook
/// triple loop regardless of blocking.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = as_2d(a, "matmul")?;
    let (k2, n) = as_2d(b, "matmul")?;
    if k != k2 {
        return Err(Error::dim("matmul", &a.shape, &b.shape));
    }
    let mut out = vec![0.0; m * n];
    gemm(m, k, n, &a.data, &b.data, &mut out);
    Ok(Tensor {
        shape: vec![m, n],
        data: out,
    })
}

/// `a · bᵀ` without the caller materialising the transpose.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (_, k) = as_2d(a, "matmul_nt")?;
    let (_, kb) = as_2d(b, "matmul_nt")?;
    if k != kb {
        return Err(Error::dim("matmul_nt", &a.shape, &b.shape));
    }
    let (m, n) = (a.rows(), b.rows());
    let mut out = vec![0.0; m * n];
    gemm_with(m, k, n, &a.data, &mut out, |j0, w, panel| {
        for j in 0..w {
            let row = &b.data[(j0 + j) * k..(j0 + j + 1) * k];
            for (kk, &v) in row.iter().enumerate() {
                panel[kk * NR + j] = v;
            }
        }
    });
    Ok(Tensor {
        shape: vec![m, n],
        data: out,
    })
}

/// `aᵀ · b`.
pub fn matmul_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (ra, _) = as_2d(a, "matmul_tn")?;
    let (rb, _) = as_2d(b, "matmul_tn")?;
    if ra != rb {
        return Err(Error::dim("matmul_tn", &a.shape, &b.shape));
    }
    matmul(&a.transpose()?, b)
}

/// Matrix-vector product `a · v` for a rank-1 `v`, returned as rank-1.
pub fn matvec(a: &Tensor, v: &Tensor) -> Result<Tensor> {
    if v.rank() != 1 {
        return Err(Error::Rank {
            op: "matvec",
            expected: 1,
            shape: v.shape.clone(),
        });
    }
    let (m, k) = as_2d(a, "matvec")?;
    if k != v.len() {
        return Err(Error::dim("matvec", &a.shape, &v.shape));
    }
    let data = (0..m).map(|i| dot(&a.data[i * k..(i + 1) * k], &v.data)).collect();
    Ok(Tensor::vector(data))
}

fn as_2d(t: &Tensor, op: &'static str) -> Result<(usize, usize)> {
    match t.shape.as_slice() {
        [r, c] => Ok((*r, *c)),
        _ => Err(Error::Rank {
            op,
            expected: 2,
            shape: t.shape.clone(),
        }),
    }
}

const MR: usize = 4;
const NR: usize = 16;

/// `c = a · b` for row-major `a: m×k`, `b: k×n`. Register-blocked over
/// `MR × NR` output tiles with `b` packed per column panel; the inner index
/// is always walked in ascending order.
pub(crate) fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert_eq!(b.len(), k * n);
    gemm_with(m, k, n, a, c, |j0, w, panel| {
        for kk in 0..k {
            panel[kk * NR..kk * NR + w].copy_from_slice(&b[kk * n + j0..kk * n + j0 + w]);
        }
    });
}

/// Blocked product where `pack(j0, w, panel)` writes columns `j0 .. j0 + w`
/// of the right operand into `panel[kk·NR + j]`. Columns `w .. NR` are
/// zeroed beforehand.
fn gemm_with(m: usize, k: usize, n: usize, a: &[f64], c: &mut [f64], pack: impl Fn(usize, usize, &mut [f64])) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut panel = vec![0.0; k * NR];
    let mut j0 = 0;
    while j0 < n {
        let w = NR.min(n - j0);
        if w < NR {
            panel.iter_mut().for_each(|v| *v = 0.0);
        }
        pack(j0, w, &mut panel);
        let mut i0 = 0;
        while i0 + MR <= m {
            let mut acc = [[0.0f64; NR]; MR];
            let rows: [&[f64]; MR] = core::array::from_fn(|r| &a[(i0 + r) * k..(i0 + r + 1) * k]);
            for kk in 0..k {
                let bp: &[f64; NR] = panel[kk * NR..kk * NR + NR].try_into().unwrap();
                for r in 0..MR {
                    let x = rows[r][kk];
                    for j in 0..NR {
                        acc[r][j] += x * bp[j];
                    }
                }
            }
            for (r, row) in acc.iter().enumerate() {
                c[(i0 + r) * n + j0..(i0 + r) * n + j0 + w].copy_from_slice(&row[..w]);
            }
            i0 += MR;
        }
        while i0 < m {
            let mut acc = [0.0f64; NR];
            let ar = &a[i0 * k..(i0 + 1) * k];
            for kk in 0..k {
                let bp: &[f64; NR] = panel[kk * NR..kk * NR + NR].try_into().unwrap();
                let x = ar[kk];
                for j in 0..NR {
                    acc[j] += x * bp[j];
                }
            }
            c[i0 * n + j0..i0 * n + j0 + w].copy_from_slice(&acc[..w]);
            i0 += 1;
        }
        j0 += NR;
    }
}

/// Outer product of two vectors: `result[i][j] = u[i]·v[j]`.
pub fn outer(u: &Tensor, v: &Tensor) -> Result<Tensor> {
    for t in [u, v] {
        if t.rank() != 1 {
            return Err(Error::Rank {
                op: "outer",
                expected: 1,
                shape: t.shape.clone(),
            });
        }
    }
    let mut data = Vec::with_capacity(u.len() * v.len());
    for &a in &u.data {
        for &b in &v.data {
            data.push(a * b);
        }
    }
    Ok(Tensor {
        shape: vec![u.len(), v.len()],
        data,
    })
}

/// Applies an activation elementwise; softmax is applied per row.
pub fn activate(x: &Tensor, kind: Activation) -> Tensor {
    match kind {
        Activation::Linear => x.clone(),
        Activation::Tanh => x.map(math::tanh),
        Activation::Sigmoid => x.map(math::sigmoid),
        Activation::Softmax => {
            let mut out = x.clone();
            let c = x.cols();
            for row in out.data.chunks_mut(c) {
                softmax_in_place(row);
            }
            out
        }
    }
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in row.iter_mut() {
        *v = math::exp(*v - max);
        s += *v;
    }
    for v in row.iter_mut() {
        *v /= s;
    }
}

/// Angle in degrees between two tensors after flattening.
pub fn cosine_angle_deg(u: &Tensor, v: &Tensor) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dim("cosine_angle_deg", &u.shape, &v.shape));
    }
    angle_deg(&u.data, &v.data)
}

pub(crate) fn angle_deg(u: &[f64], v: &[f64]) -> Result<f64> {
    let nu = math::sqrt(dot(u, u));
    let nv = math::sqrt(dot(v, v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    // nu·nv can differ from ⟨u,u⟩ by an ulp; identical inputs are exactly aligned.
    if u == v {
        return Ok(0.0);
    }
    let c = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(math::acos(c).to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn naive(a: &Tensor, b: &Tensor) -> Tensor {
        let (m, k) = (a.shape[0], a.shape[1]);
        let n = b.shape[1];
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for t in 0..k {
                    s += a.data[i * k + t] * b.data[t * n + j];
                }
                out[i * n + j] = s;
            }
        }
        Tensor::matrix(m, n, out).unwrap()
    }

    #[test]
    fn identity_times_matrix() {
        let a = Tensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(matmul(&Tensor::identity(2), &a).unwrap(), a);
    }

    #[test]
    fn row_times_column() {
        let a = Tensor::from_rows(&[&[1.0, 2.0]]);
        let b = Tensor::from_rows(&[&[3.0], &[4.0]]);
        assert_eq!(matmul(&a, &b).unwrap().data(), &[11.0]);
    }

    #[test]
    fn zeros_annihilate() {
        let mut rng = Rng::new(1);
        let b = Tensor::randn(&[4, 2], 1.0, &mut rng);
        let c = matmul(&Tensor::zeros(&[3, 4]), &b).unwrap();
        assert_eq!(c, Tensor::zeros(&[3, 2]));
    }

    #[test]
    fn shape_mismatch_names_both_shapes() {
        let err = matmul(&Tensor::zeros(&[2, 3]), &Tensor::zeros(&[2, 3])).unwrap_err();
        match err {
            Error::Dimension { left, right, .. } => {
                assert_eq!(left, vec![2, 3]);
                assert_eq!(right, vec![2, 3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blocked_kernel_is_bit_identical_to_naive() {
        let mut rng = Rng::new(9);
        for &(m, k, n) in &[(1, 1, 1), (5, 7, 3), (4, 16, 16), (9, 33, 37), (64, 100, 20)] {
            let a = Tensor::randn(&[m, k], 1.0, &mut rng);
            let b = Tensor::randn(&[k, n], 1.0, &mut rng);
            assert_eq!(matmul(&a, &b).unwrap(), naive(&a, &b), "{m}x{k}x{n}");
        }
    }

    #[test]
    fn transposed_variants_agree() {
        let mut rng = Rng::new(4);
        let a = Tensor::randn(&[6, 5], 1.0, &mut rng);
        let b = Tensor::randn(&[7, 5], 1.0, &mut rng);
        let c = Tensor::randn(&[6, 3], 1.0, &mut rng);
        assert_eq!(matmul_nt(&a, &b).unwrap(), naive(&a, &b.transpose().unwrap()));
        assert_eq!(matmul_tn(&a, &c).unwrap(), naive(&a.transpose().unwrap(), &c));
        // Several full and one partial column panel; transposes span tiles.
        let a = Tensor::randn(&[9, 70], 1.0, &mut rng);
        let b = Tensor::randn(&[37, 70], 1.0, &mut rng);
        let bt = b.transpose().unwrap();
        for i in 0..37 {
            for j in 0..70 {
                assert_eq!(bt.get(&[j, i]), b.get(&[i, j]));
            }
        }
        assert_eq!(matmul_nt(&a, &b).unwrap(), naive(&a, &bt));
    }

    #[test]
    fn outer_examples() {
        let r = outer(&Tensor::vector(vec![1.0, 0.0]), &Tensor::vector(vec![2.0, 3.0])).unwrap();
        assert_eq!(r, Tensor::from_rows(&[&[2.0, 3.0], &[0.0, 0.0]]));
        let z = outer(&Tensor::vector(vec![0.0, 0.0]), &Tensor::vector(vec![5.0, -1.0, 2.0])).unwrap();
        assert_eq!(z, Tensor::zeros(&[2, 3]));
        let one = outer(&Tensor::vector(vec![1.0]), &Tensor::vector(vec![1.0])).unwrap();
        assert_eq!(one, Tensor::from_rows(&[&[1.0]]));
        assert!(matches!(
            outer(&Tensor::zeros(&[2, 2]), &Tensor::vector(vec![1.0])),
            Err(Error::Rank { .. })
        ));
    }

    #[test]
    fn activation_examples() {
        assert_eq!(activate(&Tensor::vector(vec![0.0]), Activation::Tanh).data(), &[0.0]);
        let s = activate(&Tensor::vector(vec![0.0, 0.0]), Activation::Softmax);
        assert_eq!(s.data(), &[0.5, 0.5]);
        let sig = activate(&Tensor::vector(vec![-30.0]), Activation::Sigmoid).data()[0];
        assert!(sig > 0.0 && sig < 1e-6, "{sig}");
        let rows = Tensor::from_rows(&[&[1.0, 2.0, 3.0], &[-500.0, 0.0, 700.0]]);
        let p = activate(&rows, Activation::Softmax);
        for i in 0..2 {
            assert!((p.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.row(i).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn angle_examples() {
        let v = Tensor::vector(vec![0.3, -1.2, 2.0]);
        assert!(cosine_angle_deg(&v, &v).unwrap().abs() < 1e-6);
        let e1 = Tensor::vector(vec![1.0, 0.0]);
        let e2 = Tensor::vector(vec![0.0, 1.0]);
        assert!((cosine_angle_deg(&e1, &e2).unwrap() - 90.0).abs() < 1e-12);
        assert!((cosine_angle_deg(&v, &v.scale(-1.0)).unwrap() - 180.0).abs() < 1e-6);
        assert_eq!(
            cosine_angle_deg(&Tensor::zeros(&[2]), &e1).unwrap_err(),
            Error::UndefinedAngle
        );
    }

    proptest! {
        #[test]
        fn matmul_is_associative(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let a = Tensor::uniform(&[8, 8], -1.0, 1.0, &mut rng);
            let b = Tensor::uniform(&[8, 8], -1.0, 1.0, &mut rng);
            let c = Tensor::uniform(&[8, 8], -1.0, 1.0, &mut rng);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right) <= 1e-9);
        }

        #[test]
        fn angle_is_scale_invariant(seed in any::<u64>(), c in 1e-3f64..1e3) {
            let mut rng = Rng::new(seed);
            let u = Tensor::randn(&[12], 1.0, &mut rng);
            let v = Tensor::randn(&[12], 1.0, &mut rng);
            let a = cosine_angle_deg(&u, &v).unwrap();
            let b = cosine_angle_deg(&u.scale(c), &v).unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        }

        #[test]
        fn softmax_rows_sum_to_one(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let x = Tensor::randn(&[4, 7], 20.0, &mut rng);
            let p = activate(&x, Activation::Softmax);
            for i in 0..4 {
                prop_assert!((p.row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
