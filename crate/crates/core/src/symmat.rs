//! Dense symmetric-matrix kernel.
//!
//! Three storage shapes are used throughout the crate:
//!
//! * [`Sym2`] is a single symmetric 2×2 block, stored as `(a, b, c)` for
//!   `[[a, b], [b, c]]`.
//! * [`BlockSymMatrix`] is a block-diagonal element of `S^{4n-2}` made of
//!   `2n - 1` such blocks. PSD projection of a block-diagonal matrix splits
//!   over the blocks, so the hot path only ever needs the 2×2 closed form.
//! * [`SymMatrix`] is a general `d × d` symmetric matrix in packed lower
//!   triangular storage, projected onto `S^d_+` through a cyclic Jacobi
//!   eigensolver.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::space::{fmt_f64, parse_f64, Euclidean};
use crate::{Error, Result};

/// Symmetric 2×2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { a: 0.0, b: 0.0, c: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { a: 1.0, b: 0.0, c: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Sym2 { a, b, c }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// Frobenius inner product; the off-diagonal entry counts twice.
    pub fn dot(&self, other: &Sym2) -> f64 {
        self.a * other.a + 2.0 * self.b * other.b + self.c * other.c
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.a + self.c);
        mean - (0.5 * (self.a - self.c)).hypot(self.b)
    }
}

/// Spectral decomposition `Q diag(eig1, eig2) Qᵀ` of a [`Sym2`], where the
/// first column of `Q` is `(cos angle, sin angle)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectral2 {
    pub eig1: f64,
    pub eig2: f64,
    /// Rotation angle in `(-π/2, π/2]`.
    pub angle: f64,
}

impl Spectral2 {
    /// Unit eigenvector belonging to `eig1`.
    pub fn major_axis(&self) -> (f64, f64) {
        (self.angle.cos(), self.angle.sin())
    }

    pub fn reconstruct(&self) -> Sym2 {
        self.map_eigenvalues(|e| e)
    }

    /// `Q diag(f(eig1), f(eig2)) Qᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Sym2 {
        let (c, s) = self.major_axis();
        let (l1, l2) = (f(self.eig1), f(self.eig2));
        Sym2 {
            a: l1 * c * c + l2 * s * s,
            b: (l1 - l2) * c * s,
            c: l1 * s * s + l2 * c * c,
        }
    }
}

/// Closed-form eigendecomposition of a symmetric 2×2 matrix.
///
/// The root of larger magnitude is formed first as `mean ± r`; the other one
/// is recovered from the determinant, which avoids the cancellation in
/// `mean ∓ r` when both eigenvalues have the same sign.
pub fn eig2(m: &Sym2) -> Result<Spectral2> {
    if !m.is_finite() {
        return Err(Error::invalid(format!("non-finite 2x2 block {m:?}")));
    }
    let mean = 0.5 * (m.a + m.c);
    let r = (0.5 * (m.a - m.c)).hypot(m.b);
    let big = if mean >= 0.0 { mean + r } else { mean - r };
    let small = if big != 0.0 { m.det() / big } else { 0.0 };
    let (eig1, eig2) = if big >= small { (big, small) } else { (small, big) };

    let mut angle = 0.5 * (2.0 * m.b).atan2(m.a - m.c);
    if angle <= -FRAC_PI_2 {
        angle += std::f64::consts::PI;
    }
    Ok(Spectral2 { eig1, eig2, angle })
}

/// Nearest PSD matrix to `m` in the Frobenius norm.
pub fn psd_project_2(m: &Sym2) -> Result<Sym2> {
    let s = eig2(m)?;
    if s.eig2 >= 0.0 {
        return Ok(*m);
    }
    if s.eig1 <= 0.0 {
        return Ok(Sym2::ZERO);
    }
    // One positive eigenvalue: eig1 · uuᵀ = eig1 / (eig1 - eig2) · (m - eig2 I).
    let f = s.eig1 / (s.eig1 - s.eig2);
    Ok(Sym2 {
        a: (m.a - s.eig2) * f,
        b: m.b * f,
        c: (m.c - s.eig2) * f,
    })
}

impl Euclidean for Sym2 {
    fn inner(&self, other: &Self) -> f64 {
        self.dot(other)
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        self.a += alpha * x.a;
        self.b += alpha * x.b;
        self.c += alpha * x.c;
    }

    fn scale(&mut self, alpha: f64) {
        self.a *= alpha;
        self.b *= alpha;
        self.c *= alpha;
    }
}

/// Block-diagonal symmetric matrix of order `4n - 2` built from `2n - 1`
/// blocks laid out as `(M_0, Y_1, …, Y_{n-1}, Z_1, …, Z_{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSymMatrix {
    n: usize,
    blocks: Vec<Sym2>,
}

impl BlockSymMatrix {
    pub fn new(n: usize, blocks: Vec<Sym2>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("block matrix index n must be ≥ 2, got {n}")));
        }
        if blocks.len() != 2 * n - 1 {
            return Err(Error::DimensionMismatch { expected: 2 * n - 1, found: blocks.len() });
        }
        Ok(BlockSymMatrix { n, blocks })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "block matrix index n must be ≥ 2");
        BlockSymMatrix { n, blocks: vec![Sym2::ZERO; 2 * n - 1] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Order of the assembled matrix, `4n - 2`.
    pub fn order(&self) -> usize {
        2 * self.blocks.len()
    }

    pub fn blocks(&self) -> &[Sym2] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Sym2] {
        &mut self.blocks
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(Sym2::min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(Sym2::is_finite)
    }

    pub fn to_sym_matrix(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.order());
        for (k, blk) in self.blocks.iter().enumerate() {
            let i = 2 * k;
            m.set(i, i, blk.a);
            m.set(i + 1, i, blk.b);
            m.set(i + 1, i + 1, blk.c);
        }
        m
    }

    /// Keeps the diagonal 2×2 blocks of a full symmetric matrix of order
    /// `4n - 2`, which is its orthogonal projection onto block-diagonal form.
    pub fn from_block_diagonal_part(n: usize, m: &SymMatrix) -> Result<Self> {
        if m.dim() != 4 * n - 2 {
            return Err(Error::DimensionMismatch { expected: 4 * n - 2, found: m.dim() });
        }
        let blocks = (0..2 * n - 1)
            .map(|k| {
                let i = 2 * k;
                Sym2::new(m.get(i, i), m.get(i + 1, i), m.get(i + 1, i + 1))
            })
            .collect();
        BlockSymMatrix::new(n, blocks)
    }
}

/// Blockwise PSD projection; equals the projection of the assembled matrix.
pub fn psd_project_block(m: &BlockSymMatrix) -> Result<BlockSymMatrix> {
    let blocks = m.blocks.iter().map(psd_project_2).collect::<Result<Vec<_>>>()?;
    Ok(BlockSymMatrix { n: m.n, blocks })
}

impl Euclidean for BlockSymMatrix {
    fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.blocks.iter().zip(&other.blocks).map(|(x, y)| x.dot(y)).sum()
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        debug_assert_eq!(self.n, x.n);
        for (s, o) in self.blocks.iter_mut().zip(&x.blocks) {
            s.axpy(alpha, o);
        }
    }

    fn scale(&mut self, alpha: f64) {
        self.blocks.iter_mut().for_each(|b| b.scale(alpha));
    }
}

impl fmt::Display for BlockSymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for b in &self.blocks {
            writeln!(f, "{} {} {}", fmt_f64(b.a), fmt_f64(b.b), fmt_f64(b.c))?;
        }
        Ok(())
    }
}

impl FromStr for BlockSymMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut toks = s.split_whitespace();
        let n: usize = toks
            .next()
            .ok_or_else(|| Error::Parse("empty block matrix input".into()))?
            .parse()
            .map_err(|_| Error::Parse("first token must be the cone index n".into()))?;
        if n < 2 {
            return Err(Error::Parse(format!("cone index n must be ≥ 2, got {n}")));
        }
        let vals = toks.map(parse_f64).collect::<Result<Vec<_>>>()?;
        let want = 3 * (2 * n - 1);
        if vals.len() != want {
            return Err(Error::Parse(format!(
                "expected {want} block entries for n = {n}, found {}",
                vals.len()
            )));
        }
        let blocks = vals.chunks_exact(3).map(|c| Sym2::new(c[0], c[1], c[2])).collect();
        BlockSymMatrix::new(n, blocks)
    }
}

/// General symmetric matrix; packed lower triangle, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    packed: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, packed: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_packed(dim: usize, packed: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if packed.len() != dim * (dim + 1) / 2 {
            return Err(Error::DimensionMismatch { expected: dim * (dim + 1) / 2, found: packed.len() });
        }
        Ok(SymMatrix { dim, packed })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the lower triangle.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                packed.push(f(i, j));
            }
        }
        SymMatrix { dim, packed }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[packed_index(i, j)] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.packed.iter().all(|x| x.is_finite())
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let v = self.get(i, j);
                out[i * d + j] = v;
                out[j * d + i] = v;
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::factor(self)
    }
}

impl Euclidean for SymMatrix {
    fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                s += w * self.get(i, j) * other.get(i, j);
            }
        }
        s
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        debug_assert_eq!(self.dim, x.dim);
        for (s, o) in self.packed.iter_mut().zip(&x.packed) {
            *s += alpha * o;
        }
    }

    fn scale(&mut self, alpha: f64) {
        self.packed.iter_mut().for_each(|v| *v *= alpha);
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..=i).map(|j| fmt_f64(self.get(i, j))).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for SymMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut toks = s.split_whitespace();
        let dim: usize = toks
            .next()
            .ok_or_else(|| Error::Parse("empty matrix input".into()))?
            .parse()
            .map_err(|_| Error::Parse("first token must be the matrix dimension".into()))?;
        let vals = toks.map(parse_f64).collect::<Result<Vec<_>>>()?;
        SymMatrix::from_packed(dim, vals).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Lower Cholesky factor `L` with `M = L Lᵀ`, row-major dense.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &SymMatrix) -> Result<Self> {
        let d = m.dim();
        let mut l = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NumericFailure(format!(
                            "matrix is not positive definite (pivot {i} = {s:e})"
                        )));
                    }
                    l[i * d + i] = s.sqrt();
                } else {
                    l[i * d + j] = s / l[j * d + j];
                }
            }
        }
        Ok(Cholesky { dim: d, l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let d = self.dim;
        assert_eq!(rhs.len(), d);
        let mut y = rhs.to_vec();
        for i in 0..d {
            for k in 0..i {
                y[i] -= self.l[i * d + k] * y[k];
            }
            y[i] /= self.l[i * d + i];
        }
        for i in (0..d).rev() {
            for k in i + 1..d {
                y[i] -= self.l[k * d + i] * y[k];
            }
            y[i] /= self.l[i * d + i];
        }
        y
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Row-major `d × d`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.vectors[i * d + k]).collect()
    }

    /// `V diag(f(λ)) Vᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.dim();
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        SymMatrix::from_fn(d, |i, j| {
            (0..d)
                .map(|k| mapped[k] * self.vectors[i * d + k] * self.vectors[j * d + k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_eigenvalues(|l| l)
    }
}

pub const JACOBI_MAX_SWEEPS: usize = 50;
pub const JACOBI_MAX_DIM: usize = 200;

fn off_diagonal_norm(a: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[i * d + j] * a[i * d + j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic-by-row Jacobi eigensolver.
///
/// During the first three sweeps rotations are skipped for entries below
/// `0.2 · off / d²`, where `off` is the off-diagonal norm at the start of the
/// sweep; afterwards entries negligible against both diagonal entries are
/// zeroed outright.
pub fn jacobi_eig(m: &SymMatrix) -> Result<SymEigen> {
    jacobi_eig_with(m, JACOBI_MAX_SWEEPS)
}

pub fn jacobi_eig_with(m: &SymMatrix, max_sweeps: usize) -> Result<SymEigen> {
    let d = m.dim();
    if d > JACOBI_MAX_DIM {
        return Err(Error::invalid(format!("jacobi_eig supports d ≤ {JACOBI_MAX_DIM}, got {d}")));
    }
    if !m.is_finite() {
        return Err(Error::invalid("non-finite matrix entry"));
    }
    let scale = m.frobenius_norm();
    let mut a = m.to_dense();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }

    let mut sweeps = 0;
    let mut converged = scale == 0.0;
    while !converged {
        let off = off_diagonal_norm(&a, d);
        if off <= f64::EPSILON * scale {
            converged = true;
            break;
        }
        if sweeps == max_sweeps {
            break;
        }
        let threshold = if sweeps < 3 { 0.2 * off / (d * d) as f64 } else { 0.0 };
        for p in 0..d - 1 {
            for q in p + 1..d {
                let apq = a[p * d + q];
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let g = 100.0 * apq.abs();
                if sweeps >= 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * d + q] = 0.0;
                    a[q * d + p] = 0.0;
                    continue;
                }
                if apq == 0.0 || apq.abs() <= threshold {
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
    }
    if !converged {
        return Err(Error::NumericFailure(format!(
            "jacobi_eig did not converge in {max_sweeps} sweeps (dim {d})"
        )));
    }

    // Stable sort keeps ties in original column order.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j * d + j].total_cmp(&a[i * d + i]));
    let values = order.iter().map(|&k| a[k * d + k]).collect();
    let mut vectors = vec![0.0; d * d];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..d {
            vectors[i * d + col] = v[i * d + k];
        }
    }
    Ok(SymEigen { values, vectors, sweeps })
}

/// Nearest PSD matrix through a full eigendecomposition.
pub fn psd_project_full(m: &SymMatrix) -> Result<SymMatrix> {
    Ok(jacobi_eig(m)?.map_eigenvalues(|l| l.max(0.0)))
}
