//! The cone family `K_n`, its LMI representation, the polar link set and the
//! counterexample curves `v(t)`, `w(t)`.
//!
//! A point of `K_n` lives in `R^{2n+1}` with coordinates
//! `(x1, x2, x3, y_1 … y_{n-1}, z_1 … z_{n-1})` and must satisfy
//!
//! ```text
//! x3 ≥ 0,  x3² ≥ y1² + z1²,
//! x3·y_i ≥ y_{i+1}²  (i < n-1),   x3·y_{n-1} ≥ x1²,
//! x3·z_i ≥ z_{i+1}²  (i < n-1),   x3·z_{n-1} ≥ x2².
//! ```
//!
//! Each inequality is a 2×2 PSD condition, so `K_n = {p : A p ⪰ 0}` with `A`
//! mapping into block-diagonal matrices of order `4n - 2`.

use std::fmt;
use std::str::FromStr;

use crate::space::{fmt_f64, parse_f64, Euclidean};
use crate::symmat::{jacobi_eig, BlockSymMatrix, Cholesky, Sym2, SymMatrix};
use crate::{Error, Result};

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 12;

/// Default additive slack for the scalar inequalities of `K_n`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A point of `R^{2n+1}` in the ambient space of `K_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    n: usize,
    coords: Vec<f64>,
}

impl ConePoint {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= MIN_N, "cone index n must be ≥ {MIN_N}");
        ConePoint { n, coords: vec![0.0; 2 * n + 1] }
    }

    pub fn from_coords(n: usize, coords: Vec<f64>) -> Result<Self> {
        if n < MIN_N {
            return Err(Error::invalid(format!("n must be ≥ {MIN_N}")));
        }
        if coords.len() != 2 * n + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * n + 1, found: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("cone point coordinates must be finite"));
        }
        Ok(ConePoint { n, coords })
    }

    pub fn from_parts(x1: f64, x2: f64, x3: f64, y: &[f64], z: &[f64]) -> Result<Self> {
        if y.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), found: z.len() });
        }
        let n = y.len() + 1;
        let mut coords = vec![x1, x2, x3];
        coords.extend_from_slice(y);
        coords.extend_from_slice(z);
        ConePoint::from_coords(n, coords)
    }

    /// Standard basis vector `e_k`, `k` indexing the flat coordinate order.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut p = ConePoint::zeros(n);
        p.coords[k] = 1.0;
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn x1(&self) -> f64 {
        self.coords[0]
    }

    pub fn x2(&self) -> f64 {
        self.coords[1]
    }

    pub fn x3(&self) -> f64 {
        self.coords[2]
    }

    /// `y_1 … y_{n-1}`.
    pub fn y(&self) -> &[f64] {
        &self.coords[3..self.n + 2]
    }

    /// `z_1 … z_{n-1}`.
    pub fn z(&self) -> &[f64] {
        &self.coords[self.n + 2..]
    }

    fn y_mut(&mut self) -> &mut [f64] {
        let n = self.n;
        &mut self.coords[3..n + 2]
    }

    fn z_mut(&mut self) -> &mut [f64] {
        let n = self.n;
        &mut self.coords[n + 2..]
    }
}

impl Euclidean for ConePoint {
    fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        debug_assert_eq!(self.n, x.n);
        for (s, o) in self.coords.iter_mut().zip(&x.coords) {
            *s += alpha * o;
        }
    }

    fn scale(&mut self, alpha: f64) {
        self.coords.iter_mut().for_each(|c| *c *= alpha);
    }
}

impl fmt::Display for ConePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        let row: Vec<String> = self.coords.iter().map(|&c| fmt_f64(c)).collect();
        writeln!(f, "{}", row.join(" "))
    }
}

impl FromStr for ConePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut toks = s.split_whitespace();
        let n: usize = toks
            .next()
            .ok_or_else(|| Error::Parse("empty cone point input".into()))?
            .parse()
            .map_err(|_| Error::Parse("first token must be the cone index n".into()))?;
        let coords = toks.map(parse_f64).collect::<Result<Vec<_>>>()?;
        ConePoint::from_coords(n, coords).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `(1 - u)^e` through `ln_1p`, accurate for small `u`.
pub fn pow_one_minus(u: f64, e: f64) -> f64 {
    (e * (-u).ln_1p()).exp()
}

/// `1 - (1 - u)^e` without the subtraction, via `expm1`.
pub fn one_minus_pow_one_minus(u: f64, e: f64) -> f64 {
    -(e * (-u).ln_1p()).exp_m1()
}

/// Which scalar inequality of `K_n` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `x3 ≥ 0`
    Apex,
    /// `x3² ≥ y1² + z1²`
    Disk,
    /// `x3·y_i ≥ y_{i+1}²` (1-based `i`)
    ChainY(usize),
    /// `x3·y_{n-1} ≥ x1²`
    TailY,
    ChainZ(usize),
    TailZ,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Apex => write!(f, "x3 >= 0"),
            Constraint::Disk => write!(f, "x3^2 >= y1^2 + z1^2"),
            Constraint::ChainY(i) => write!(f, "x3*y{i} >= y{}^2", i + 1),
            Constraint::TailY => write!(f, "x3*y_(n-1) >= x1^2"),
            Constraint::ChainZ(i) => write!(f, "x3*z{i} >= z{}^2", i + 1),
            Constraint::TailZ => write!(f, "x3*z_(n-1) >= x2^2"),
        }
    }
}

/// Outcome of an inequality-based membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// Largest amount by which any inequality fails (0 when all hold).
    pub worst_violation: f64,
    pub worst: Option<Constraint>,
}

/// Everything that only depends on `n`.
#[derive(Debug, Clone)]
pub struct ConeModel {
    n: usize,
    kappa: f64,
    lambda: f64,
    gram: SymMatrix,
    gram_factor: Cholesky,
    gram_eig_min: f64,
    gram_eig_max: f64,
    gamma: f64,
    shifted_factor: Cholesky,
}

/// Fraction of `1/λ_max(A*A)` used for the default fixed-point step.
pub const DEFAULT_GAMMA_FRAC: f64 = 0.9;

impl ConeModel {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_N {
            return Err(Error::invalid(format!("n must be ≥ {MIN_N}")));
        }
        if n > MAX_N {
            return Err(Error::invalid(format!("n must be ≤ {MAX_N}")));
        }
        let kappa = 2f64.powi(n as i32);
        let lambda = kappa / (kappa - 1.0);

        let dim = 2 * n + 1;
        let columns: Vec<ConePoint> = (0..dim)
            .map(|k| adjoint_raw(&apply_raw(&ConePoint::basis(n, k))))
            .collect();
        let gram = SymMatrix::from_fn(dim, |i, j| columns[j].coords[i]);
        let eig = jacobi_eig(&gram)?;
        let gram_eig_max = eig.values[0];
        let gram_eig_min = eig.values[dim - 1];
        if gram_eig_min <= 0.0 {
            return Err(Error::NumericFailure(format!(
                "LMI map is not injective for n = {n} (λ_min(A*A) = {gram_eig_min:e})"
            )));
        }
        let gram_factor = gram.cholesky()?;
        let mut shifted = gram.clone();
        for i in 0..dim {
            shifted.set(i, i, shifted.get(i, i) + 1.0);
        }
        let shifted_factor = shifted.cholesky()?;
        Ok(ConeModel {
            n,
            kappa,
            lambda,
            gram,
            gram_factor,
            gram_eig_min,
            gram_eig_max,
            gamma: DEFAULT_GAMMA_FRAC / gram_eig_max,
            shifted_factor,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `κ_n = 2^n`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `λ_n = 2^n / (2^n - 1)`, the Hölder conjugate of `κ_n`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.n + 1
    }

    /// `A*A`.
    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }

    pub fn gram_factor(&self) -> &Cholesky {
        &self.gram_factor
    }

    /// Factor of `I + A*A`, the ADMM system matrix at unit penalty.
    pub fn shifted_gram_factor(&self) -> &Cholesky {
        &self.shifted_factor
    }

    pub fn gram_eig_min(&self) -> f64 {
        self.gram_eig_min
    }

    pub fn gram_eig_max(&self) -> f64 {
        self.gram_eig_max
    }

    /// Default fixed-point step, `0.9 / λ_max(A*A)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn check_point(&self, p: &ConePoint) -> Result<()> {
        if p.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: p.dim() });
        }
        Ok(())
    }

    fn check_blocks(&self, m: &BlockSymMatrix) -> Result<()> {
        if m.n() != self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n - 1, found: m.blocks().len() });
        }
        Ok(())
    }

    /// `A p`.
    pub fn lmi_apply(&self, p: &ConePoint) -> Result<BlockSymMatrix> {
        self.check_point(p)?;
        Ok(apply_raw(p))
    }

    /// `A* M`, the adjoint under the Frobenius inner product.
    pub fn lmi_adjoint(&self, m: &BlockSymMatrix) -> Result<ConePoint> {
        self.check_blocks(m)?;
        Ok(adjoint_raw(m))
    }

    /// Checks every scalar inequality of `K_n` with additive slack `tol`.
    pub fn membership(&self, p: &ConePoint, tol: f64) -> Membership {
        let (x1, x2, x3) = (p.x1(), p.x2(), p.x3());
        let (y, z) = (p.y(), p.z());
        let k = self.n - 1;
        let mut slacks = Vec::with_capacity(2 * self.n);
        slacks.push((Constraint::Apex, x3));
        slacks.push((Constraint::Disk, x3 * x3 - y[0] * y[0] - z[0] * z[0]));
        for i in 0..k - 1 {
            slacks.push((Constraint::ChainY(i + 1), x3 * y[i] - y[i + 1] * y[i + 1]));
        }
        slacks.push((Constraint::TailY, x3 * y[k - 1] - x1 * x1));
        for i in 0..k - 1 {
            slacks.push((Constraint::ChainZ(i + 1), x3 * z[i] - z[i + 1] * z[i + 1]));
        }
        slacks.push((Constraint::TailZ, x3 * z[k - 1] - x2 * x2));

        let (worst, slack) = slacks
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least two constraints");
        let violation = (-slack).max(0.0);
        Membership {
            inside: slack >= -tol,
            worst_violation: violation,
            worst: (violation > 0.0).then_some(worst),
        }
    }

    pub fn contains(&self, p: &ConePoint, tol: f64) -> bool {
        self.membership(p, tol).inside
    }

    /// Smallest eigenvalue of `A p`; nonnegative exactly on `K_n`.
    pub fn lmi_min_eigenvalue(&self, p: &ConePoint) -> f64 {
        apply_raw(p).min_eigenvalue()
    }

    /// Membership in the polar of the link set,
    /// `|u1|^λ + |u2|^λ ≤ |u3|^λ` with `u3 ≤ 0`, up to additive slack `tol`.
    pub fn polar_link_contains(&self, u: [f64; 3], tol: f64) -> bool {
        let l = self.lambda;
        u[2] <= tol && u[0].abs().powf(l) + u[1].abs().powf(l) <= u[2].abs().powf(l) + tol
    }

    /// Membership in the link set `S_n`, `|x1|^κ + |x2|^κ ≤ x3^κ`, `x3 ≥ 0`.
    pub fn link_contains(&self, x: [f64; 3], tol: f64) -> bool {
        let k = self.kappa;
        x[2] >= -tol && x[0].abs().powf(k) + x[1].abs().powf(k) <= x[2].abs().powf(k) + tol
    }

    fn check_t(t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("curve parameter t must lie in [0, 1], got {t}")));
        }
        Ok(())
    }

    /// `v(t) = (t, (1 - t^λ)^{1/λ}, -1, 0, …, 0)`, a boundary point of `K_n°`.
    pub fn curve_v(&self, t: f64) -> Result<ConePoint> {
        Self::check_t(t)?;
        let tl = t.powf(self.lambda);
        let mut p = ConePoint::zeros(self.n);
        p.coords[0] = t;
        p.coords[1] = pow_one_minus(tl, 1.0 / self.lambda);
        p.coords[2] = -1.0;
        Ok(p)
    }

    /// `w(t)`, the generator of the normal cone of `K_n°` at `v(t)`:
    /// `(t^{λ/κ}, (1-t^λ)^{1/κ}, 1, t^{λ/2}, …, t^{λ/2^{n-1}}, (1-t^λ)^{1/2}, …)`.
    pub fn curve_w(&self, t: f64) -> Result<ConePoint> {
        Self::check_t(t)?;
        let l = self.lambda;
        let tl = t.powf(l);
        let mut p = ConePoint::zeros(self.n);
        p.coords[0] = t.powf(l / self.kappa);
        p.coords[1] = pow_one_minus(tl, 1.0 / self.kappa);
        p.coords[2] = 1.0;
        let mut denom = 1.0;
        for i in 0..self.n - 1 {
            denom *= 2.0;
            p.y_mut()[i] = t.powf(l / denom);
            p.z_mut()[i] = pow_one_minus(tl, 1.0 / denom);
        }
        Ok(p)
    }

    /// `h(t) = v(t) - v(0)`, with the second coordinate
    /// `(1 - t^λ)^{1/λ} - 1` formed without cancellation.
    pub fn curve_step(&self, t: f64) -> Result<ConePoint> {
        Self::check_t(t)?;
        let mut h = ConePoint::zeros(self.n);
        h.coords[0] = t;
        h.coords[1] = -one_minus_pow_one_minus(t.powf(self.lambda), 1.0 / self.lambda);
        Ok(h)
    }

    /// `⟨v(t) - v(0), w(t)⟩ = 1 - (1 - t^λ)^{1/κ}`, evaluated with `expm1`.
    pub fn curve_inner_closed_form(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        Ok(one_minus_pow_one_minus(t.powf(self.lambda), 1.0 / self.kappa))
    }

    pub fn normal_ray(&self, t: f64) -> Result<NormalRay> {
        Ok(NormalRay { base: self.curve_v(t)?, generator: self.curve_w(t)? })
    }
}

fn apply_raw(p: &ConePoint) -> BlockSymMatrix {
    let n = p.n;
    let (x1, x2, x3) = (p.x1(), p.x2(), p.x3());
    let (y, z) = (p.y(), p.z());
    let mut blocks = Vec::with_capacity(2 * n - 1);
    blocks.push(Sym2::new(x3 + y[0], z[0], x3 - y[0]));
    for (chain, tail) in [(y, x1), (z, x2)] {
        for i in 0..n - 2 {
            blocks.push(Sym2::new(x3, chain[i + 1], chain[i]));
        }
        blocks.push(Sym2::new(x3, tail, chain[n - 2]));
    }
    BlockSymMatrix::new(n, blocks).expect("block count is 2n-1 by construction")
}

fn adjoint_raw(m: &BlockSymMatrix) -> ConePoint {
    let n = m.n();
    let b = m.blocks();
    let mut p = ConePoint::zeros(n);
    p.coords[2] += b[0].a + b[0].c;
    p.y_mut()[0] += b[0].a - b[0].c;
    p.z_mut()[0] += 2.0 * b[0].b;
    for (side, tail_idx) in [(0usize, 0usize), (1, 1)] {
        let off = 1 + side * (n - 1);
        for i in 0..n - 1 {
            let blk = b[off + i];
            p.coords[2] += blk.a;
            let chain = if side == 0 { p.y_mut() } else { p.z_mut() };
            chain[i] += blk.c;
            if i + 1 < n - 1 {
                chain[i + 1] += 2.0 * blk.b;
            } else {
                p.coords[tail_idx] += 2.0 * blk.b;
            }
        }
    }
    p
}

pub(crate) fn lmi_apply_unchecked(p: &ConePoint) -> BlockSymMatrix {
    apply_raw(p)
}

pub(crate) fn lmi_adjoint_unchecked(m: &BlockSymMatrix) -> ConePoint {
    adjoint_raw(m)
}

/// A boundary point `v` of `K_n°` together with `w`, where `N_{K_n°}(v) = cone(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalRay {
    pub base: ConePoint,
    pub generator: ConePoint,
}

impl NormalRay {
    /// Projects `d` onto the tangent cone of `K_n°` at `base`, which is the
    /// half-space `{d : ⟨d, w⟩ ≤ 0}`.
    pub fn tangent_project(&self, d: &ConePoint) -> Result<ConePoint> {
        let w = &self.generator;
        if d.n != w.n {
            return Err(Error::DimensionMismatch { expected: w.dim(), found: d.dim() });
        }
        let ww = w.inner(w);
        if ww == 0.0 {
            return Err(Error::invalid("normal ray has a zero generator"));
        }
        let dw = d.inner(w);
        let mut out = d.clone();
        if dw > 0.0 {
            out.axpy(-dw / ww, w);
        }
        Ok(out)
    }
}

/// `(Σ|x_i|^p)^{1/p} (Σ|y_i|^q)^{1/q} - Σ|x_i y_i|` with `1/p + 1/q = 1`.
pub fn holder_gap(x: &[f64], y: &[f64], p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("Hölder exponent must exceed 1, got {p}")));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let q = p / (p - 1.0);
    let lhs: f64 = x.iter().zip(y).map(|(a, b)| (a * b).abs()).sum();
    let norm_p = x.iter().map(|a| a.abs().powf(p)).sum::<f64>().powf(1.0 / p);
    let norm_q = y.iter().map(|b| b.abs().powf(q)).sum::<f64>().powf(1.0 / q);
    Ok(norm_p * norm_q - lhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmat::eig2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(n: usize, c: &[f64]) -> ConePoint {
        ConePoint::from_coords(n, c.to_vec()).unwrap()
    }

    #[test]
    fn exponents() {
        let m2 = ConeModel::new(2).unwrap();
        assert_eq!(m2.kappa(), 4.0);
        assert_eq!(m2.lambda(), 4.0 / 3.0);
        let m3 = ConeModel::new(3).unwrap();
        assert_eq!(m3.kappa(), 8.0);
        assert_eq!(m3.lambda(), 8.0 / 7.0);
        for n in MIN_N..=MAX_N {
            let m = ConeModel::new(n).unwrap();
            assert!((1.0 / m.kappa() + 1.0 / m.lambda() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn n_out_of_range() {
        assert!(matches!(ConeModel::new(1), Err(Error::InvalidInput(m)) if m.contains("n must be ≥ 2")));
        assert!(ConeModel::new(13).is_err());
    }

    #[test]
    fn gram_is_positive_definite_and_gamma_admissible() {
        for n in 2..=8 {
            let m = ConeModel::new(n).unwrap();
            assert!(m.gram_eig_min() > 0.0);
            assert!(m.gamma() > 0.0 && m.gamma() < 1.0 / m.gram_eig_max());
        }
    }

    #[test]
    fn lmi_apply_examples() {
        let m = ConeModel::new(2).unwrap();
        let a = m.lmi_apply(&pt(2, &[0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(
            a.blocks(),
            &[Sym2::new(1.0, 0.0, 1.0), Sym2::new(1.0, 0.0, 0.0), Sym2::new(1.0, 0.0, 0.0)]
        );
        let w0 = m.curve_w(0.0).unwrap();
        assert_eq!(w0.coords(), &[0.0, 1.0, 1.0, 0.0, 1.0]);
        let a = m.lmi_apply(&w0).unwrap();
        assert_eq!(
            a.blocks(),
            &[Sym2::new(1.0, 1.0, 1.0), Sym2::new(1.0, 0.0, 0.0), Sym2::new(1.0, 1.0, 1.0)]
        );
        for blk in a.blocks() {
            assert!(eig2(blk).unwrap().eig2 >= -1e-15);
        }
    }

    #[test]
    fn lmi_block_layout_n4() {
        let m = ConeModel::new(4).unwrap();
        // x1 x2 x3 | y1 y2 y3 | z1 z2 z3
        let p = pt(4, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let b = m.lmi_apply(&p).unwrap();
        let want = [
            Sym2::new(7.0, 7.0, -1.0),
            Sym2::new(3.0, 5.0, 4.0),
            Sym2::new(3.0, 6.0, 5.0),
            Sym2::new(3.0, 1.0, 6.0),
            Sym2::new(3.0, 8.0, 7.0),
            Sym2::new(3.0, 9.0, 8.0),
            Sym2::new(3.0, 2.0, 9.0),
        ];
        assert_eq!(b.blocks(), &want);
    }

    #[test]
    fn lmi_apply_is_linear() {
        let m = ConeModel::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = pt(3, &(0..7).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let q = pt(3, &(0..7).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let (a, b) = (0.7, -1.3);
        let mut comb = p.scaled(a);
        comb.axpy(b, &q);
        let lhs = m.lmi_apply(&comb).unwrap();
        let mut rhs = m.lmi_apply(&p).unwrap().scaled(a);
        rhs.axpy(b, &m.lmi_apply(&q).unwrap());
        assert!(lhs.dist(&rhs) <= 1e-15);
    }

    #[test]
    fn adjoint_of_zero_and_gram_columns() {
        let m = ConeModel::new(3).unwrap();
        assert_eq!(m.lmi_adjoint(&BlockSymMatrix::zeros(3)).unwrap(), ConePoint::zeros(3));
        // Gram entries computed independently as ⟨A e_i, A e_j⟩.
        for i in 0..7 {
            for j in 0..7 {
                let ai = m.lmi_apply(&ConePoint::basis(3, i)).unwrap();
                let aj = m.lmi_apply(&ConePoint::basis(3, j)).unwrap();
                assert_eq!(m.gram().get(i, j), ai.inner(&aj));
            }
        }
        // x3 appears twice in M_0 and once in each of the 2n-2 chain blocks.
        assert_eq!(m.gram().get(2, 2), 6.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = ConeModel::new(3).unwrap();
        assert!(matches!(m.lmi_apply(&ConePoint::zeros(2)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.lmi_adjoint(&BlockSymMatrix::zeros(4)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn membership_examples() {
        let m = ConeModel::new(3).unwrap();
        let apex_dir = pt(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(m.contains(&apex_dir, MEMBERSHIP_TOL));
        let below = pt(3, &[0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let r = m.membership(&below, MEMBERSHIP_TOL);
        assert!(!r.inside);
        assert_eq!(r.worst, Some(Constraint::Apex));
        assert_eq!(r.worst_violation, 1.0);
        for t in [0.01, 0.3, 0.5, 0.77, 0.99] {
            assert!(m.contains(&m.curve_w(t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn polar_link_examples() {
        let m = ConeModel::new(2).unwrap();
        assert!(m.polar_link_contains([0.0, 0.0, -1.0], 0.0));
        assert!(!m.polar_link_contains([1.0, 1.0, -1.0], 1e-9));
        assert!(!m.polar_link_contains([0.0, 0.0, 1.0], 1e-9));
        for t in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let v = m.curve_v(t).unwrap();
            let u = [v.x1(), v.x2(), v.x3()];
            assert!(m.polar_link_contains(u, 1e-14));
            let l = m.lambda();
            let eq = u[0].abs().powf(l) + u[1].abs().powf(l) - 1.0;
            assert!(eq.abs() <= 1e-14);
        }
    }

    #[test]
    fn curve_endpoints() {
        let m = ConeModel::new(2).unwrap();
        assert_eq!(m.curve_v(0.0).unwrap().coords(), &[0.0, 1.0, -1.0, 0.0, 0.0]);
        assert_eq!(m.curve_v(1.0).unwrap().coords(), &[1.0, 0.0, -1.0, 0.0, 0.0]);
        assert_eq!(m.curve_w(0.0).unwrap().coords(), &[0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(m.curve_w(1.0).unwrap().coords(), &[1.0, 0.0, 1.0, 1.0, 0.0]);
        assert!(m.curve_v(-0.1).is_err());
        assert!(m.curve_w(1.5).is_err());
    }

    #[test]
    fn curve_orthogonality() {
        for n in 2..=6 {
            let m = ConeModel::new(n).unwrap();
            for i in 0..=50 {
                let t = i as f64 / 50.0;
                let r = m.normal_ray(t).unwrap();
                assert!(r.base.inner(&r.generator).abs() <= 1e-12, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn inner_closed_form_matches_direct_dot() {
        for n in 2..=6 {
            let m = ConeModel::new(n).unwrap();
            for t in [1e-4, 1e-3, 0.01, 0.1, 0.5, 0.9] {
                let h = m.curve_step(t).unwrap();
                let w = m.curve_w(t).unwrap();
                let direct = h.inner(&w);
                let closed = m.curve_inner_closed_form(t).unwrap();
                assert!((direct - closed).abs() <= 1e-13 * closed, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn inner_closed_form_value_n2() {
        // 1 - (1 - 0.5^{4/3})^{1/4}, evaluated in 50-digit arithmetic.
        let m = ConeModel::new(2).unwrap();
        let v = m.curve_inner_closed_form(0.5).unwrap();
        assert!((v - 0.118_735_479_872_030_23).abs() <= 1e-15);
    }

    #[test]
    fn tangent_projection_examples() {
        let m = ConeModel::new(2).unwrap();
        let ray = m.normal_ray(0.5).unwrap();
        let w = ray.generator.clone();
        let inside = w.scaled(-2.0);
        assert_eq!(ray.tangent_project(&inside).unwrap(), inside);
        assert!(ray.tangent_project(&w).unwrap().norm() <= 1e-15);

        let t: f64 = 0.5;
        let d = m.curve_v(t).unwrap().sub(&m.curve_v(0.0).unwrap());
        let got = ray.tangent_project(&d).unwrap();
        let coef = (1.0 - (1.0 - t.powf(4.0 / 3.0)).powf(0.25)) / w.inner(&w);
        let mut want = d.clone();
        want.axpy(-coef, &w);
        assert!(got.dist(&want) <= 1e-15);

        let bad = NormalRay { base: ray.base.clone(), generator: ConePoint::zeros(2) };
        assert!(bad.tangent_project(&d).is_err());
    }

    #[test]
    fn holder_examples() {
        let x = [0.3, -1.2, 2.0];
        assert!(holder_gap(&x, &x, 2.0).unwrap().abs() <= 1e-14);
        assert_eq!(holder_gap(&[1.0, 0.0], &[0.0, 1.0], 3.0).unwrap(), 1.0);
        assert!(holder_gap(&x, &x, 1.0).is_err());
        assert!(holder_gap(&x, &[1.0], 2.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = ConeModel::new(3).unwrap();
        let w = m.curve_w(0.37).unwrap();
        let back: ConePoint = w.to_string().parse().unwrap();
        assert_eq!(back, w);
        assert!("3\n1 2 3".parse::<ConePoint>().is_err());
        assert!("3\n1 2 3 4 5 6 nan".parse::<ConePoint>().is_err());
    }
}
