//! Metric projections onto `K_n`, its polar, and the PSD slice `T_n = A K_n`.
//!
//! * [`project_k`] runs an augmented Lagrangian with semismooth Newton inner
//!   solves and a final Newton polish on the active face.
//! * [`project_k_admm`] runs plain ADMM on the split `A p = Z`, `Z ⪰ 0`; it is
//!   slower and far less accurate near degenerate points, and is kept as an
//!   independent cross-check.
//! * [`project_polar`] is the Moreau complement `q - Π_K(q)`.
//! * [`project_slice_dykstra`] alternates between `S_+^{4n-2}` and `range(A)`.
//! * [`project_slice_fixedpoint`] iterates `z ← Π_K[z - γ(A*A z - A*X)]` and
//!   returns `A z`; it shares no code path with Dykstra beyond the 2×2
//!   kernel, which makes the two slice projectors usable as mutual oracles.

use serde::{Deserialize, Serialize};

use crate::cones::{lmi_adjoint_unchecked, lmi_apply_unchecked, ConeModel, ConePoint};
use crate::space::Euclidean;
use crate::symmat::{psd_project_block, psd_project_full, BlockSymMatrix, Cholesky, SymMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Threshold on the solver's stopping residual.
    pub tol: f64,
    pub max_iter: usize,
    /// ADMM penalty; also the initial augmented Lagrangian penalty.
    pub rho: f64,
    /// ADMM over-relaxation in `[1, 1.8]`.
    pub over_relax: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-9, max_iter: 200_000, rho: 1.0, over_relax: 1.0 }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        SolverConfig { tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if !(1.0..=1.8).contains(&self.over_relax) {
            return Err(Error::invalid(format!(
                "over_relax must lie in [1, 1.8], got {}",
                self.over_relax
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

impl SolveStats {
    fn trivial() -> Self {
        SolveStats { iterations: 0, final_residual: 0.0, converged: true }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

fn factor_for(model: &ConeModel, rho: f64) -> Result<Cholesky> {
    let mut shifted = model.gram().clone();
    shifted.scale(rho);
    for i in 0..shifted.dim() {
        shifted.set(i, i, shifted.get(i, i) + 1.0);
    }
    shifted.cholesky()
}

fn admm_project(
    model: &ConeModel,
    factor: &Cholesky,
    q: &ConePoint,
    cfg: &SolverConfig,
) -> Result<(ConePoint, SolveStats)> {
    let n = model.n();
    let rho = cfg.rho;
    let alpha = cfg.over_relax;
    let mut z = psd_project_block(&lmi_apply_unchecked(q))?;
    let mut u = BlockSymMatrix::zeros(n);

    let mut best: Option<(ConePoint, f64)> = None;
    let mut p = q.clone();
    for it in 1..=cfg.max_iter {
        let mut zu = z.clone();
        zu.axpy(-1.0, &u);
        let mut rhs = lmi_adjoint_unchecked(&zu);
        rhs.scale(rho);
        rhs.axpy(1.0, q);
        p = ConePoint::from_coords(n, factor.solve(rhs.coords()))?;

        let ap = lmi_apply_unchecked(&p);
        let mut ap_hat = ap.scaled(alpha);
        ap_hat.axpy(1.0 - alpha, &z);
        let z_prev = std::mem::replace(&mut z, psd_project_block(&ap_hat.add(&u))?);
        u.axpy(1.0, &ap_hat);
        u.axpy(-1.0, &z);

        let primal = ap.dist(&z);
        let dual = rho * lmi_adjoint_unchecked(&z.sub(&z_prev)).norm();
        let residual = primal.max(dual);
        if residual <= cfg.tol {
            return Ok((p, SolveStats { iterations: it, final_residual: residual, converged: true }));
        }
        if best.as_ref().map_or(true, |(_, r)| residual < *r) {
            best = Some((p.clone(), residual));
        }
    }
    let (p, r) = best.unwrap_or((p, f64::INFINITY));
    log::warn!("ADMM projection onto K_{n} stopped at max_iter with residual {r:.3e}");
    Ok((p, SolveStats { iterations: cfg.max_iter, final_residual: r, converged: false }))
}

fn check_point(model: &ConeModel, q: &ConePoint) -> Result<()> {
    if q.n() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.ambient_dim(), found: q.dim() });
    }
    Ok(())
}

fn check_blocks(model: &ConeModel, x: &BlockSymMatrix) -> Result<()> {
    if x.n() != model.n() {
        return Err(Error::DimensionMismatch { expected: 2 * model.n() - 1, found: x.blocks().len() });
    }
    if !x.is_finite() {
        return Err(Error::invalid("non-finite matrix entry"));
    }
    Ok(())
}

/// `Π_{K_n}(q)`.
///
/// The outer loop stops once the natural residual
/// `‖A p - Π_{S_+}(A p - Y)‖` drops below `cfg.tol`, or earlier when the
/// face polish produces a point whose KKT conditions verify to roughly
/// machine precision. Running out of iterations is not an error: the last
/// iterate is returned with `converged = false`.
pub fn project_k(model: &ConeModel, q: &ConePoint, cfg: &SolverConfig) -> Result<(ConePoint, SolveStats)> {
    cfg.validate()?;
    check_point(model, q)?;
    if q.coords().iter().all(|&c| c == 0.0) {
        return Ok((q.clone(), SolveStats::trivial()));
    }
    crate::alm::project(model, q, cfg)
}

/// `Π_{K_n}(q)` by ADMM with fixed penalty `cfg.rho`. The `p`-update solves
/// `(I + ρA*A) p = q + ρA*(Z - U)` and the `Z`-update is a blockwise PSD
/// projection; iteration stops when both the primal residual `‖A p - Z‖`
/// and the dual residual `ρ‖A*(Z - Z_prev)‖` are below `cfg.tol`.
pub fn project_k_admm(model: &ConeModel, q: &ConePoint, cfg: &SolverConfig) -> Result<(ConePoint, SolveStats)> {
    cfg.validate()?;
    check_point(model, q)?;
    if q.coords().iter().all(|&c| c == 0.0) {
        return Ok((q.clone(), SolveStats::trivial()));
    }
    let factor = if cfg.rho == 1.0 { model.shifted_gram_factor().clone() } else { factor_for(model, cfg.rho)? };
    admm_project(model, &factor, q, cfg)
}

/// `Π_{K_n°}(q) = q - Π_{K_n}(q)`.
pub fn project_polar(model: &ConeModel, q: &ConePoint, cfg: &SolverConfig) -> Result<(ConePoint, SolveStats)> {
    let (pk, stats) = project_k(model, q, cfg)?;
    Ok((q.sub(&pk), stats))
}

/// Both halves of the Moreau decomposition `q = Π_K(q) + Π_{K°}(q)`.
pub fn moreau_split(
    model: &ConeModel,
    q: &ConePoint,
    cfg: &SolverConfig,
) -> Result<(ConePoint, ConePoint, SolveStats)> {
    let (pk, stats) = project_k(model, q, cfg)?;
    let polar = q.sub(&pk);
    Ok((pk, polar, stats))
}

/// Orthogonal projection onto `range(A)`: `A (A*A)^{-1} A* X`.
pub fn project_subspace_range(model: &ConeModel, x: &BlockSymMatrix) -> Result<BlockSymMatrix> {
    check_blocks(model, x)?;
    Ok(range_projection(model, x))
}

fn range_projection(model: &ConeModel, x: &BlockSymMatrix) -> BlockSymMatrix {
    let rhs = lmi_adjoint_unchecked(x);
    let c = model.gram_factor().solve(rhs.coords());
    let c = ConePoint::from_coords(model.n(), c).expect("gram solve keeps dimension");
    lmi_apply_unchecked(&c)
}

/// Dykstra's alternating projection between a cone (with correction term)
/// and a linear subspace (without).
fn dykstra<T: Euclidean>(
    x0: &T,
    cfg: &SolverConfig,
    project_cone: impl Fn(&T) -> Result<T>,
    project_subspace: impl Fn(&T) -> T,
) -> Result<(T, SolveStats)> {
    let mut x = x0.clone();
    let mut corr = x0.scaled(0.0);
    let mut best: Option<(T, f64)> = None;
    for it in 1..=cfg.max_iter {
        let shifted = x.add(&corr);
        let y = project_cone(&shifted)?;
        corr = shifted.sub(&y);
        let x_next = project_subspace(&y);
        let residual = x_next.dist(&y).max(x_next.dist(&x));
        x = x_next;
        if residual <= cfg.tol {
            return Ok((x, SolveStats { iterations: it, final_residual: residual, converged: true }));
        }
        if best.as_ref().map_or(true, |(_, r)| residual < *r) {
            best = Some((x.clone(), residual));
        }
    }
    let (x, r) = best.unwrap_or((x, f64::INFINITY));
    log::warn!("Dykstra stopped at max_iter with residual {r:.3e}");
    Ok((x, SolveStats { iterations: cfg.max_iter, final_residual: r, converged: false }))
}

/// `Π_{T_n}(X)` for block-diagonal `X` by Dykstra between `S_+` and `range(A)`.
pub fn project_slice_dykstra(
    model: &ConeModel,
    x: &BlockSymMatrix,
    cfg: &SolverConfig,
) -> Result<(BlockSymMatrix, SolveStats)> {
    cfg.validate()?;
    check_blocks(model, x)?;
    if x.norm() == 0.0 {
        return Ok((x.clone(), SolveStats::trivial()));
    }
    dykstra(x, cfg, psd_project_block, |m| range_projection(model, m))
}

/// `Π_{T_n}(X)` for a full symmetric `X` of order `4n - 2`; the PSD step goes
/// through the Jacobi eigensolver.
pub fn project_slice_dykstra_full(
    model: &ConeModel,
    x: &SymMatrix,
    cfg: &SolverConfig,
) -> Result<(SymMatrix, SolveStats)> {
    cfg.validate()?;
    let n = model.n();
    if x.dim() != 4 * n - 2 {
        return Err(Error::DimensionMismatch { expected: 4 * n - 2, found: x.dim() });
    }
    if !x.is_finite() {
        return Err(Error::invalid("non-finite matrix entry"));
    }
    if x.frobenius_norm() == 0.0 {
        return Ok((x.clone(), SolveStats::trivial()));
    }
    dykstra(x, cfg, psd_project_full, |m| {
        let blocks = BlockSymMatrix::from_block_diagonal_part(n, m).expect("order checked above");
        range_projection(model, &blocks).to_sym_matrix()
    })
}

/// Ratio between the outer tolerance and the inner `Π_K` tolerance.
pub const INNER_TOL_RATIO: f64 = 100.0;

/// `Π_{A K_n}(X) = A z(X)` with `z(X)` the fixed point of
/// `F(z, X) = z - Π_K[z - γ(A*A z - A*X)]`, using `γ = model.gamma()`.
pub fn project_slice_fixedpoint(
    model: &ConeModel,
    x: &BlockSymMatrix,
    cfg: &SolverConfig,
) -> Result<(BlockSymMatrix, SolveStats)> {
    let (z, stats) = fixedpoint_preimage(model, x, cfg, model.gamma())?;
    Ok((lmi_apply_unchecked(&z), stats))
}

/// As [`project_slice_fixedpoint`] with `γ = gamma_frac / λ_max(A*A)`.
pub fn project_slice_fixedpoint_with_step(
    model: &ConeModel,
    x: &BlockSymMatrix,
    cfg: &SolverConfig,
    gamma_frac: f64,
) -> Result<(BlockSymMatrix, SolveStats)> {
    if !(gamma_frac > 0.0 && gamma_frac < 1.0) {
        return Err(Error::invalid(format!("gamma fraction must lie in (0, 1), got {gamma_frac}")));
    }
    let (z, stats) = fixedpoint_preimage(model, x, cfg, gamma_frac / model.gram_eig_max())?;
    Ok((lmi_apply_unchecked(&z), stats))
}

/// The preimage `z(X) ∈ K_n` with `Π_{A K_n}(X) = A z(X)`.
pub fn fixedpoint_preimage(
    model: &ConeModel,
    x: &BlockSymMatrix,
    cfg: &SolverConfig,
    gamma: f64,
) -> Result<(ConePoint, SolveStats)> {
    cfg.validate()?;
    check_blocks(model, x)?;
    let n = model.n();
    if !(gamma > 0.0 && gamma < 1.0 / model.gram_eig_max()) {
        return Err(Error::invalid(format!(
            "step γ = {gamma} outside (0, 1/λ_max = {})",
            1.0 / model.gram_eig_max()
        )));
    }
    if x.norm() == 0.0 {
        return Ok((ConePoint::zeros(n), SolveStats::trivial()));
    }
    let inner = SolverConfig { tol: cfg.tol / INNER_TOL_RATIO, ..*cfg };
    let atx = lmi_adjoint_unchecked(x);

    let least_squares = ConePoint::from_coords(n, model.gram_factor().solve(atx.coords()))?;
    let (mut z, first) = project_k(model, &least_squares, &inner)?;
    if !first.converged {
        return Ok((z, SolveStats { iterations: 0, final_residual: f64::INFINITY, converged: false }));
    }

    let mut last = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let mut grad = ConePoint::from_coords(n, model.gram().mul_vec(z.coords()))?;
        grad.axpy(-1.0, &atx);
        let mut step = z.clone();
        step.axpy(-gamma, &grad);
        let (z_next, inner_stats) = project_k(model, &step, &inner)?;
        last = z.dist(&z_next);
        z = z_next;
        if !inner_stats.converged {
            log::warn!("inner projection failed at outer iteration {it}");
            return Ok((z, SolveStats { iterations: it, final_residual: last, converged: false }));
        }
        if last <= cfg.tol {
            return Ok((z, SolveStats { iterations: it, final_residual: last, converged: true }));
        }
    }
    Ok((z, SolveStats { iterations: cfg.max_iter, final_residual: last, converged: false }))
}

/// `‖F(z, X)‖` for the fixed-point map, with `Π_K` evaluated at `cfg`.
pub fn fixedpoint_residual(
    model: &ConeModel,
    z: &ConePoint,
    x: &BlockSymMatrix,
    gamma: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let mut grad = ConePoint::from_coords(model.n(), model.gram().mul_vec(z.coords()))?;
    grad.axpy(-1.0, &model.lmi_adjoint(x)?);
    let mut step = z.clone();
    step.axpy(-gamma, &grad);
    let (proj, _) = project_k(model, &step, cfg)?;
    Ok(z.dist(&proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmat::Sym2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> ConePoint {
        ConePoint::from_coords(n, (0..2 * n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn random_blocks(rng: &mut ChaCha8Rng, n: usize) -> BlockSymMatrix {
        let blocks = (0..2 * n - 1)
            .map(|_| Sym2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        BlockSymMatrix::new(n, blocks).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(SolverConfig { tol: 0.0, ..cfg() }.validate().is_err());
        assert!(SolverConfig { max_iter: 0, ..cfg() }.validate().is_err());
        assert!(SolverConfig { rho: -1.0, ..cfg() }.validate().is_err());
        assert!(SolverConfig { over_relax: 2.0, ..cfg() }.validate().is_err());
    }

    #[test]
    fn stats_json_shape() {
        let s = SolveStats { iterations: 3, final_residual: 1e-10, converged: true };
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["iterations"], 3);
        assert_eq!(v["converged"], true);
    }

    #[test]
    fn project_k_fixes_points_of_k() {
        let m = ConeModel::new(3).unwrap();
        let e3 = ConePoint::basis(3, 2);
        let (p, s) = project_k(&m, &e3, &cfg()).unwrap();
        assert!(s.converged);
        assert!(p.dist(&e3) <= 10.0 * cfg().tol);
    }

    #[test]
    fn project_k_zero_short_circuits() {
        let m = ConeModel::new(2).unwrap();
        let (p, s) = project_k(&m, &ConePoint::zeros(2), &cfg()).unwrap();
        assert_eq!(p, ConePoint::zeros(2));
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn negated_generator_projects_to_apex() {
        let m = ConeModel::new(2).unwrap();
        let q = m.curve_w(0.5).unwrap().scaled(-1.0);
        let (p, s) = project_k(&m, &q, &cfg()).unwrap();
        assert!(s.converged);
        assert!(p.norm() <= 10.0 * cfg().tol);
    }

    #[test]
    fn polar_curve_points_project_to_apex() {
        for n in 2..=4 {
            let m = ConeModel::new(n).unwrap();
            for t in [0.05, 0.3, 0.6, 0.95] {
                let v = m.curve_v(t).unwrap();
                let (p, _) = project_k(&m, &v, &cfg()).unwrap();
                assert!(p.norm() <= 10.0 * cfg().tol, "n={n} t={t} |p|={}", p.norm());
                let (pv, _) = project_polar(&m, &v, &cfg()).unwrap();
                assert!(pv.dist(&v) <= 10.0 * cfg().tol);
            }
        }
    }

    #[test]
    fn project_k_result_is_feasible_and_optimal() {
        let m = ConeModel::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tol = cfg().tol;
        for _ in 0..20 {
            let q = random_point(&mut rng, 3);
            let (p, s) = project_k(&m, &q, &cfg()).unwrap();
            assert!(s.converged);
            assert!(m.lmi_min_eigenvalue(&p) >= -10.0 * tol);
            let qp = q.sub(&p);
            for t in [0.0, 0.2, 0.7, 1.0] {
                let c = m.curve_w(t).unwrap().scaled(rng.gen_range(0.1..2.0));
                let cp = c.sub(&p);
                assert!(qp.inner(&cp) <= 10.0 * tol * qp.norm() * cp.norm() + 1e-12);
            }
        }
    }

    #[test]
    fn project_k_rejects_bad_inputs() {
        let m = ConeModel::new(3).unwrap();
        assert!(project_k(&m, &ConePoint::zeros(2), &cfg()).is_err());
        let bad = SolverConfig { rho: 0.0, ..cfg() };
        assert!(project_k(&m, &ConePoint::basis(3, 0), &bad).is_err());
    }

    #[test]
    fn max_iter_returns_best_iterate_unconverged() {
        let m = ConeModel::new(3).unwrap();
        let q = m.curve_w(0.4).unwrap().add(&m.curve_v(0.4).unwrap());
        let tight = SolverConfig { max_iter: 3, tol: 1e-14, ..cfg() };
        let (p, s) = project_k_admm(&m, &q, &tight).unwrap();
        assert!(!s.converged);
        assert_eq!(s.iterations, 3);
        let (p2, s2) = project_k(&m, &q, &SolverConfig { max_iter: 1, ..tight }).unwrap();
        assert!(s2.iterations <= 2);
        assert!(p2.coords().iter().all(|c| c.is_finite()));
        assert!(p.coords().iter().all(|c| c.is_finite()));
    }

    #[test]
    fn admm_variants_agree_with_newton_projection() {
        let m = ConeModel::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_point(&mut rng, 2);
        let (a, _) = project_k(&m, &q, &cfg()).unwrap();
        let (b, sb) = project_k_admm(&m, &q, &SolverConfig { over_relax: 1.6, ..cfg() }).unwrap();
        let (c, sc) = project_k_admm(&m, &q, &SolverConfig { rho: 2.5, ..cfg() }).unwrap();
        assert!(sb.converged && sc.converged);
        assert!(a.dist(&b) <= 1e-7 && a.dist(&c) <= 1e-7);
    }

    #[test]
    fn range_projection_properties() {
        let m = ConeModel::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_point(&mut rng, 3);
        let ap = m.lmi_apply(&p).unwrap();
        assert!(project_subspace_range(&m, &ap).unwrap().dist(&ap) <= 1e-14);

        let ident = BlockSymMatrix::new(3, vec![Sym2::IDENTITY; 5]).unwrap();
        let once = project_subspace_range(&m, &ident).unwrap();
        let twice = project_subspace_range(&m, &once).unwrap();
        assert!(once.dist(&twice) <= 1e-14);

        let x = random_blocks(&mut rng, 3);
        let px = project_subspace_range(&m, &x).unwrap();
        let resid = x.sub(&px);
        assert!(m.lmi_adjoint(&resid).unwrap().norm() <= 1e-11);
        assert!(resid.inner(&ap).abs() <= 1e-13);
    }

    #[test]
    fn dykstra_examples() {
        let m = ConeModel::new(2).unwrap();
        let inside = m.lmi_apply(&m.curve_w(0.5).unwrap()).unwrap();
        let (out, s) = project_slice_dykstra(&m, &inside, &cfg()).unwrap();
        assert!(s.converged);
        assert!(out.dist(&inside) <= 10.0 * cfg().tol);
        let (zero, s) = project_slice_dykstra(&m, &BlockSymMatrix::zeros(2), &cfg()).unwrap();
        assert_eq!(zero, BlockSymMatrix::zeros(2));
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn dykstra_and_fixedpoint_agree_on_polar_like_input() {
        let m = ConeModel::new(2).unwrap();
        let q = m.curve_v(0.4).unwrap().add(&m.curve_w(0.4).unwrap().scaled(0.3));
        let x = m.lmi_apply(&q).unwrap();
        let (a, sa) = project_slice_dykstra(&m, &x, &cfg()).unwrap();
        let (b, sb) = project_slice_fixedpoint(&m, &x, &cfg()).unwrap();
        assert!(sa.converged && sb.converged);
        assert!(a.dist(&b) <= 1e-5, "dist {}", a.dist(&b));
        assert!(a.min_eigenvalue() >= -10.0 * cfg().tol);
    }

    #[test]
    fn fixedpoint_examples() {
        let m = ConeModel::new(3).unwrap();
        let inside = m.lmi_apply(&m.curve_w(0.3).unwrap()).unwrap();
        let (out, s) = project_slice_fixedpoint(&m, &inside, &cfg()).unwrap();
        assert!(s.converged);
        assert!(out.dist(&inside) <= 1e-7);
        assert!(project_slice_fixedpoint_with_step(&m, &inside, &cfg(), 1.0).is_err());
        assert!(fixedpoint_preimage(&m, &inside, &cfg(), 1.0).is_err());
    }

    #[test]
    fn fixedpoint_residual_small_at_solution() {
        let m = ConeModel::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let x = random_blocks(&mut rng, 2);
        let (z, s) = fixedpoint_preimage(&m, &x, &cfg(), m.gamma()).unwrap();
        assert!(s.converged);
        let tight = SolverConfig::with_tol(1e-12);
        assert!(fixedpoint_residual(&m, &z, &x, m.gamma(), &tight).unwrap() <= 10.0 * cfg().tol);
    }

    #[test]
    fn full_dykstra_reduces_to_block_part() {
        let m = ConeModel::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let full = SymMatrix::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
        let blocks = BlockSymMatrix::from_block_diagonal_part(2, &full).unwrap();
        let (a, sa) = project_slice_dykstra_full(&m, &full, &cfg()).unwrap();
        let (b, _) = project_slice_dykstra(&m, &blocks, &cfg()).unwrap();
        assert!(sa.converged);
        assert!(a.dist(&b.to_sym_matrix()) <= 1e-6, "dist {}", a.dist(&b.to_sym_matrix()));
    }
}
