//! High-accuracy `Π_{K_n}` through an augmented Lagrangian on `A p ∈ S_+`.
//!
//! Each outer step minimizes
//! `φ(p) = ½‖p - q‖² + σ/2 ‖Π_{-S_+}(A p + Λ/σ)‖²`
//! by semismooth Newton, then sets `Λ ← σ Π_{-S_+}(A p + Λ/σ)`.
//!
//! Near degenerate solutions the natural residual only controls the error
//! in `p` up to a square root, so once the residual is moderate the iterate
//! is handed to [`polish`], which runs Newton on the KKT system of the
//! active face: `λ_min(A_i p) = 0` for the active blocks with multipliers
//! `Y_i = μ_i u_i u_iᵀ`. A polished point is only accepted after its KKT
//! conditions have been verified, which for this convex problem certifies
//! it as the projection.

use nalgebra::{DMatrix, DVector};

use crate::cones::{lmi_adjoint_unchecked, lmi_apply_unchecked, ConeModel, ConePoint};
use crate::project::{SolveStats, SolverConfig};
use crate::space::Euclidean;
use crate::symmat::{eig2, psd_project_block, BlockSymMatrix, Cholesky, Sym2, SymMatrix};
use crate::Result;

const SIGMA_GROWTH: f64 = 10.0;
const SIGMA_MAX: f64 = 1e12;
const MAX_OUTER: usize = 60;
const MAX_INNER: usize = 100;
/// Outer steps allowed past `tol` while waiting for a verified polish.
const EXTRA_OUTER: usize = 4;
/// Relative natural residual below which polishing is attempted.
const POLISH_START: f64 = 1e-5;
const POLISH_MAX_ITER: usize = 40;
/// Newton restarts after rescaling `τ` to the current iterate.
const POLISH_ROUNDS: usize = 3;
const KKT_TOL: f64 = 1e-13;

/// `Π_{-S_+}` blockwise.
fn project_nsd(x: &BlockSymMatrix) -> Result<BlockSymMatrix> {
    Ok(x.sub(&psd_project_block(x)?))
}

/// Directional derivative of `Π_{S_+}` at `x` along `h`, using the
/// generalized Jacobian element that vanishes on the zero eigenspace.
fn psd_projection_jvp(x: &Sym2, h: &Sym2) -> Result<Sym2> {
    let s = eig2(x)?;
    if s.eig2 >= 0.0 {
        return Ok(*h);
    }
    if s.eig1 <= 0.0 {
        return Ok(Sym2::ZERO);
    }
    let (c, sn) = s.major_axis();
    let (u, v) = ((c, sn), (-sn, c));
    let quad = |l: (f64, f64), r: (f64, f64)| {
        l.0 * (h.a * r.0 + h.b * r.1) + l.1 * (h.b * r.0 + h.c * r.1)
    };
    let h11 = quad(u, u);
    let k = s.eig1 / (s.eig1 - s.eig2) * quad(u, v);
    Ok(Sym2::new(
        h11 * u.0 * u.0 + 2.0 * k * u.0 * v.0,
        h11 * u.0 * u.1 + k * (u.0 * v.1 + v.0 * u.1),
        h11 * u.1 * u.1 + 2.0 * k * u.1 * v.1,
    ))
}

/// `‖A p - Π_{S_+}(A p + Λ)‖` for a multiplier `Λ ⪯ 0`.
fn natural_residual(p: &ConePoint, lam: &BlockSymMatrix) -> Result<f64> {
    let ap = lmi_apply_unchecked(p);
    Ok(ap.dist(&psd_project_block(&ap.add(lam))?))
}

struct Inner<'a> {
    q: &'a ConePoint,
    basis_images: &'a [BlockSymMatrix],
    lam: &'a BlockSymMatrix,
    sigma: f64,
}

impl Inner<'_> {
    fn shifted(&self, p: &ConePoint) -> BlockSymMatrix {
        let mut x = lmi_apply_unchecked(p);
        x.axpy(1.0 / self.sigma, self.lam);
        x
    }

    fn value(&self, p: &ConePoint) -> Result<f64> {
        let n = project_nsd(&self.shifted(p))?;
        Ok(0.5 * p.dist(self.q).powi(2) + 0.5 * self.sigma * n.inner(&n))
    }

    fn gradient(&self, p: &ConePoint) -> Result<ConePoint> {
        let mut g = p.sub(self.q);
        g.axpy(
            self.sigma,
            &lmi_adjoint_unchecked(&project_nsd(&self.shifted(p))?),
        );
        Ok(g)
    }

    /// `I + σ A* (I - D) A` with `D` the PSD projection Jacobian at `A p + Λ/σ`.
    fn hessian(&self, p: &ConePoint) -> Result<Cholesky> {
        let x = self.shifted(p);
        let d = p.dim();
        let mut cols = Vec::with_capacity(d);
        for (k, ae) in self.basis_images.iter().enumerate() {
            let mut blocks = Vec::with_capacity(ae.blocks().len());
            for (xb, hb) in x.blocks().iter().zip(ae.blocks()) {
                blocks.push(hb.sub(&psd_projection_jvp(xb, hb)?));
            }
            let mut col = lmi_adjoint_unchecked(&BlockSymMatrix::new(p.n(), blocks)?);
            col.scale(self.sigma);
            col.coords_mut()[k] += 1.0;
            cols.push(col);
        }
        SymMatrix::from_fn(d, |i, j| 0.5 * (cols[j].coords()[i] + cols[i].coords()[j])).cholesky()
    }

    /// Damped semismooth Newton on `∇φ = 0`; returns the steps taken.
    fn solve(&self, p: &mut ConePoint, tol: f64, budget: usize) -> Result<usize> {
        let mut g = self.gradient(p)?;
        for it in 0..budget.min(MAX_INNER) {
            let gn = g.norm();
            if gn <= tol {
                return Ok(it);
            }
            let step = self.hessian(p)?.solve(g.coords());
            let dir = ConePoint::from_coords(p.n(), step.into_iter().map(|v| -v).collect())?;
            let slope = g.inner(&dir);

            let full = p.add(&dir);
            let g_full = self.gradient(&full)?;
            if g_full.norm() < gn {
                *p = full;
                g = g_full;
                continue;
            }
            let f0 = self.value(p)?;
            let mut t = 0.5;
            loop {
                let cand = p.add(&dir.scaled(t));
                if self.value(&cand)? <= f0 + 1e-4 * t * slope {
                    *p = cand;
                    g = self.gradient(p)?;
                    break;
                }
                t *= 0.5;
                if t < 1e-10 {
                    return Ok(it + 1);
                }
            }
        }
        Ok(budget.min(MAX_INNER))
    }
}

/// `Π_{K_n}(q)` by the augmented Lagrangian with face polishing.
pub(crate) fn project(
    model: &ConeModel,
    q: &ConePoint,
    cfg: &SolverConfig,
) -> Result<(ConePoint, SolveStats)> {
    let n = model.n();
    let scale = q.norm().max(1.0);
    let basis_images: Vec<BlockSymMatrix> = (0..q.dim())
        .map(|k| lmi_apply_unchecked(&ConePoint::basis(n, k)))
        .collect();

    let mut p = q.clone();
    let mut lam = BlockSymMatrix::zeros(n);
    let mut sigma = cfg.rho;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut past_tol = 0;
    for _ in 0..MAX_OUTER {
        let inner = Inner {
            q,
            basis_images: &basis_images,
            lam: &lam,
            sigma,
        };
        let inner_tol = (1e-3 * cfg.tol).max(1e2 * f64::EPSILON * scale);
        iterations += inner.solve(
            &mut p,
            inner_tol,
            cfg.max_iter.saturating_sub(iterations).max(1),
        )?;
        let mut next = inner.shifted(&p);
        next = project_nsd(&next)?;
        next.scale(sigma);
        lam = next;
        residual = natural_residual(&p, &lam)?;

        if residual <= POLISH_START * scale {
            if let Some(polished) = polish(model, q, &p, &lam)? {
                iterations += polished.iterations;
                log::debug!(
                    "face polish accepted after {iterations} steps, KKT residual {:.3e}",
                    polished.residual
                );
                let stats = SolveStats {
                    iterations,
                    final_residual: polished.residual,
                    converged: true,
                };
                return Ok((polished.point, stats));
            }
        }
        if residual <= cfg.tol {
            past_tol += 1;
            if past_tol > EXTRA_OUTER {
                break;
            }
        }
        if iterations >= cfg.max_iter {
            break;
        }
        sigma = (sigma * SIGMA_GROWTH).min(SIGMA_MAX);
    }
    let converged = residual <= cfg.tol;
    if !converged {
        log::warn!("projection onto K_{n} stopped after {iterations} Newton steps, residual {residual:.3e}");
    }
    Ok((
        p,
        SolveStats {
            iterations,
            final_residual: residual,
            converged,
        },
    ))
}

struct Polished {
    point: ConePoint,
    residual: f64,
    iterations: usize,
}

/// `λ_min` of a 2×2 block with its gradient `u uᵀ` (Frobenius metric).
fn min_eig_with_gradient(m: &Sym2) -> Result<(f64, Sym2)> {
    let s = eig2(m)?;
    let rho = (0.5 * (m.a - m.c)).hypot(m.b);
    let (re, rb) = if rho > 0.0 {
        (0.5 * (m.a - m.c) / rho, m.b / rho)
    } else {
        (1.0, 0.0)
    };
    Ok((
        s.eig2,
        Sym2::new(0.5 * (1.0 - re), -0.5 * rb, 0.5 * (1.0 + re)),
    ))
}

/// Second derivative of `λ_min` at `m` along `h`, as a gradient-shaped block.
fn min_eig_curvature(m: &Sym2, h: &Sym2) -> Sym2 {
    let e = 0.5 * (m.a - m.c);
    let rho = e.hypot(m.b);
    let (re, rb) = (e / rho, m.b / rho);
    let (de, db) = (0.5 * (h.a - h.c), h.b);
    let along = re * de + rb * db;
    let (ge, gb) = ((de - along * re) / rho, (db - along * rb) / rho);
    Sym2::new(-0.5 * ge, -0.5 * gb, 0.5 * ge)
}

fn single_block(n: usize, i: usize, s: Sym2) -> BlockSymMatrix {
    let mut b = BlockSymMatrix::zeros(n);
    b.blocks_mut()[i] = s;
    b
}

/// Newton on the active-face KKT system in the scaled variable `p = τ p̂`,
/// `τ = ‖p0‖`, which keeps every Jacobian entry of order one even when the
/// projection is tiny compared with `q`.
fn polish(
    model: &ConeModel,
    q: &ConePoint,
    p0: &ConePoint,
    lam: &BlockSymMatrix,
) -> Result<Option<Polished>> {
    let n = model.n();
    let d = q.dim();
    let mut tau = p0.norm();
    if tau == 0.0 {
        return Ok(None);
    }
    let mut ph = p0.scaled(1.0 / tau);
    let z = lmi_apply_unchecked(&ph);
    let (z_norm, y_norm) = (z.norm(), lam.norm());
    if y_norm == 0.0 {
        return Ok(None);
    }
    let mut active = Vec::new();
    let mut mu = Vec::new();
    for (i, (zb, lb)) in z.blocks().iter().zip(lam.blocks()).enumerate() {
        let s = eig2(zb)?;
        let y_rel = lb.frobenius_norm() / y_norm;
        if s.eig2.max(0.0) / z_norm < y_rel {
            if s.eig1 - s.eig2 < 1e-8 * z_norm {
                return Ok(None);
            }
            let (_, g) = min_eig_with_gradient(zb)?;
            active.push(i);
            mu.push(-lb.dot(&g));
        }
    }
    let m = active.len();
    if m == 0 {
        return Ok(None);
    }

    let basis_images: Vec<BlockSymMatrix> = (0..d)
        .map(|k| lmi_apply_unchecked(&ConePoint::basis(n, k)))
        .collect();
    let residuals =
        |ph: &ConePoint, mu: &[f64], tau: f64| -> Result<(ConePoint, Vec<f64>, Vec<ConePoint>)> {
            let zb = lmi_apply_unchecked(ph);
            let mut f1 = ph.scaled(tau);
            f1.axpy(-1.0, q);
            let mut f2 = Vec::with_capacity(m);
            let mut grads = Vec::with_capacity(m);
            for (j, &i) in active.iter().enumerate() {
                let (l, g) = min_eig_with_gradient(&zb.blocks()[i])?;
                let grad = lmi_adjoint_unchecked(&single_block(n, i, g));
                f1.axpy(-mu[j], &grad);
                f2.push(l);
                grads.push(grad);
            }
            Ok((f1, f2, grads))
        };

    let mut iterations = 0;
    for _ in 0..POLISH_ROUNDS {
        for _ in 0..POLISH_MAX_ITER {
            iterations += 1;
            let (f1, f2, grads) = residuals(&ph, &mu, tau)?;
            if !f1.coords().iter().chain(&f2).all(|v| v.is_finite()) {
                return Ok(None);
            }
            let zb = lmi_apply_unchecked(&ph);
            let mut jac = DMatrix::zeros(d + m, d + m);
            let mut rhs = DVector::zeros(d + m);
            for k in 0..d {
                let mut col = ConePoint::basis(n, k).scaled(tau);
                for (j, &i) in active.iter().enumerate() {
                    let curv = min_eig_curvature(&zb.blocks()[i], &basis_images[k].blocks()[i]);
                    col.axpy(-mu[j], &lmi_adjoint_unchecked(&single_block(n, i, curv)));
                }
                for r in 0..d {
                    jac[(r, k)] = col.coords()[r];
                }
                for j in 0..m {
                    jac[(d + j, k)] = grads[j].coords()[k];
                }
                rhs[k] = -f1.coords()[k];
            }
            for j in 0..m {
                for r in 0..d {
                    jac[(r, d + j)] = -grads[j].coords()[r];
                }
                rhs[d + j] = -f2[j];
            }
            let Some(step) = jac.full_piv_lu().solve(&rhs) else {
                return Ok(None);
            };
            for k in 0..d {
                ph.coords_mut()[k] += step[k];
            }
            for j in 0..m {
                mu[j] += step[d + j];
            }
            let size = step.rows(0, d).norm();
            if !size.is_finite() {
                return Ok(None);
            }
            if size <= 1e-15 {
                break;
            }
        }
        let r = ph.norm();
        if !(r > 0.0) || (0.5..=2.0).contains(&r) {
            break;
        }
        tau *= r;
        ph.scale(1.0 / r);
    }

    let (f1, f2, _) = residuals(&ph, &mu, tau)?;
    let scale = q.norm().max(1.0);
    let mu_floor = -1e-10 * mu.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let zb = lmi_apply_unchecked(&ph);
    let feasible = zb.blocks().iter().all(|b| b.min_eigenvalue() >= -KKT_TOL);
    let verified = (0.5..=2.0).contains(&ph.norm())
        && f1.norm() <= KKT_TOL * scale
        && f2.iter().all(|l| l.abs() <= KKT_TOL)
        && mu.iter().all(|&v| v >= mu_floor)
        && feasible;
    if !verified {
        log::debug!(
            "face polish rejected: stationarity {:.3e}, min multiplier {:.3e}",
            f1.norm(),
            mu.iter().cloned().fold(f64::INFINITY, f64::min)
        );
        return Ok(None);
    }

    let point = ph.scaled(tau);
    let mut y = BlockSymMatrix::zeros(n);
    for (j, &i) in active.iter().enumerate() {
        let (_, g) = min_eig_with_gradient(&zb.blocks()[i])?;
        y.blocks_mut()[i] = g.scaled(mu[j].max(0.0));
    }
    let ap = lmi_apply_unchecked(&point);
    let complementarity = ap.dist(&psd_project_block(&ap.sub(&y))?);
    let mut stationarity = point.sub(q);
    stationarity.axpy(-1.0, &lmi_adjoint_unchecked(&y));
    let residual = complementarity.max(stationarity.norm());
    Ok(Some(Polished {
        point,
        residual,
        iterations,
    }))
}
