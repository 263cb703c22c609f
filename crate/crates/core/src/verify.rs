//! Invariant suite over every module, at sample counts small enough to run
//! from the command line in a few seconds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cones::{holder_gap, ConeModel, ConePoint, MIN_N};
use crate::probe::{self, Grid, ProbeMode};
use crate::project::{self, SolverConfig};
use crate::space::Euclidean;
use crate::symmat::{eig2, psd_project_2, psd_project_block, psd_project_full, BlockSymMatrix, Sym2};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed_cafe;
pub const DEFAULT_N_MAX: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub n_max: usize,
    pub solver: SolverConfig,
    /// Shifts every projection the suite inspects by `1e-3`; the suite must
    /// then fail.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            n_max: DEFAULT_N_MAX,
            solver: SolverConfig::default(),
            inject_fault: false,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < MIN_N {
            return Err(Error::invalid(format!("n-max must be ≥ {MIN_N}, got {}", self.n_max)));
        }
        self.solver.validate()
    }

    fn sizes(&self, cap: usize) -> std::ops::RangeInclusive<usize> {
        MIN_N..=self.n_max.min(cap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOutcome {
    pub name: &'static str,
    pub checks: usize,
    /// First failing check, if any.
    pub failure: Option<String>,
}

impl GroupOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn line(&self) -> String {
        match &self.failure {
            None => format!("PASS {} ({} checks)", self.name, self.checks),
            Some(f) => format!("FAIL {} ({} checks): {f}", self.name, self.checks),
        }
    }
}

struct Ctx {
    cfg: VerifyConfig,
    rng: ChaCha8Rng,
    checks: usize,
    failure: Option<String>,
}

impl Ctx {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn fault(&self) -> f64 {
        if self.cfg.inject_fault {
            1e-3
        } else {
            0.0
        }
    }

    fn project_k(&self, m: &ConeModel, q: &ConePoint) -> Result<ConePoint> {
        let (mut p, _) = project::project_k(m, q, &self.cfg.solver)?;
        p.coords_mut()[2] += self.fault();
        Ok(p)
    }

    fn psd_block(&self, x: &BlockSymMatrix) -> Result<BlockSymMatrix> {
        let mut p = psd_project_block(x)?;
        p.blocks_mut()[0].a += self.fault();
        Ok(p)
    }

    fn point(&mut self, n: usize) -> ConePoint {
        let c = (0..2 * n + 1).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
        ConePoint::from_coords(n, c).expect("length 2n+1")
    }

    fn sym2(&mut self) -> Sym2 {
        Sym2::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
    }

    fn blocks(&mut self, n: usize) -> BlockSymMatrix {
        let b = (0..2 * n - 1).map(|_| self.sym2()).collect();
        BlockSymMatrix::new(n, b).expect("2n-1 blocks")
    }
}

type Group = (&'static str, fn(&mut Ctx) -> Result<()>);

const GROUPS: [Group; 10] = [
    ("symmat-kernel", symmat_kernel),
    ("cones-adjoint", cones_adjoint),
    ("cones-membership", cones_membership),
    ("cones-curves", cones_curves),
    ("holder", holder),
    ("project-moreau", project_moreau),
    ("project-normal-ray", project_normal_ray),
    ("project-slice", project_slice),
    ("probe-exact", probe_exact),
    ("probe-numeric", probe_numeric),
];

/// Runs every group on the current rayon pool; outcomes keep group order.
pub fn run(cfg: &VerifyConfig) -> Result<Vec<GroupOutcome>> {
    cfg.validate()?;
    Ok(GROUPS
        .par_iter()
        .enumerate()
        .map(|(i, (name, body))| {
            let mut ctx = Ctx {
                cfg: *cfg,
                rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64)),
                checks: 0,
                failure: None,
            };
            if let Err(e) = body(&mut ctx) {
                ctx.failure.get_or_insert(format!("error: {e}"));
            }
            GroupOutcome { name, checks: ctx.checks, failure: ctx.failure }
        })
        .collect())
}

fn symmat_kernel(c: &mut Ctx) -> Result<()> {
    for _ in 0..200 {
        let m = c.sym2();
        let s = eig2(&m)?;
        let err = s.reconstruct().dist(&m);
        c.check(err <= 1e-11 * m.frobenius_norm().max(1.0), || format!("2x2 reconstruction error {err:.3e}"));
        let p = psd_project_2(&m)?;
        let pp = psd_project_2(&p)?;
        c.check(pp.dist(&p) <= 1e-12, || "2x2 projection is not idempotent".into());
        let m2 = c.sym2();
        let gap = psd_project_2(&m2)?.dist(&p) - m2.dist(&m);
        c.check(gap <= 1e-12, || format!("2x2 projection expands distances by {gap:.3e}"));
    }
    for n in c.cfg.sizes(6) {
        for _ in 0..10 {
            let x = c.blocks(n);
            let block = c.psd_block(&x)?.to_sym_matrix();
            let full = psd_project_full(&x.to_sym_matrix())?;
            let mut d = block.clone();
            d.axpy(-1.0, &full);
            let err = d.frobenius_norm();
            c.check(err <= 1e-10, || format!("n={n}: block and full PSD projections differ by {err:.3e}"));
        }
    }
    Ok(())
}

fn cones_adjoint(c: &mut Ctx) -> Result<()> {
    for n in c.cfg.sizes(6) {
        let m = ConeModel::new(n)?;
        for _ in 0..50 {
            let p = c.point(n);
            let x = c.blocks(n);
            let lhs = m.lmi_apply(&p)?.inner(&x);
            let rhs = p.inner(&m.lmi_adjoint(&x)?);
            let err = (lhs - rhs).abs();
            c.check(err <= 1e-12 * p.norm() * x.norm(), || format!("n={n}: adjoint mismatch {err:.3e}"));
        }
    }
    Ok(())
}

fn cones_membership(c: &mut Ctx) -> Result<()> {
    for n in c.cfg.sizes(6) {
        let m = ConeModel::new(n)?;
        for _ in 0..200 {
            let mut p = c.point(n);
            p.coords_mut()[2] = p.x3().abs();
            let by_ineq = m.contains(&p, 0.0);
            let by_eig = m.lmi_min_eigenvalue(&p) >= 0.0;
            // Both tests measure the same boundary with different slack units.
            let near = m.lmi_min_eigenvalue(&p).abs() <= 1e-12 || m.membership(&p, 0.0).worst_violation <= 1e-12;
            c.check(by_ineq == by_eig || near, || format!("n={n}: membership tests disagree at {p:?}"));
        }
    }
    Ok(())
}

fn cones_curves(c: &mut Ctx) -> Result<()> {
    for n in c.cfg.sizes(6) {
        let m = ConeModel::new(n)?;
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let v = m.curve_v(t)?;
            let w = m.curve_w(t)?;
            let pk = c.project_k(&m, &v)?;
            c.check(pk.norm() <= 1e-6, || format!("n={n}, t={t}: v(t) not in the polar (|Π_K v| = {:.3e})", pk.norm()));
            c.check(m.lmi_min_eigenvalue(&w) >= -1e-12, || format!("n={n}, t={t}: w(t) not in K"));
            c.check(v.inner(&w).abs() <= 1e-12, || format!("n={n}, t={t}: v(t) and w(t) not orthogonal"));
        }
        for t in [1e-4, 1e-3, 1e-2, 0.1, 0.5, 0.9] {
            let direct = m.curve_step(t)?.inner(&m.curve_w(t)?);
            let closed = m.curve_inner_closed_form(t)?;
            let rel = (direct - closed).abs() / closed;
            c.check(rel <= 1e-13, || format!("n={n}, t={t}: inner product closed form off by {rel:.3e}"));
        }
    }
    Ok(())
}

fn holder(c: &mut Ctx) -> Result<()> {
    for p in [4.0 / 3.0, 2.0, 4.0] {
        for _ in 0..100 {
            let len = c.rng.gen_range(1..8);
            let x: Vec<f64> = (0..len).map(|_| c.rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..len).map(|_| c.rng.gen_range(-2.0..2.0)).collect();
            let scale: f64 = x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1.0);
            let gap = holder_gap(&x, &y, p)?;
            c.check(gap >= -1e-12 * scale, || format!("p={p}: negative gap {gap:.3e}"));
        }
        let q = p / (p - 1.0);
        for _ in 0..20 {
            let len = c.rng.gen_range(1..8);
            let x: Vec<f64> = (0..len).map(|_| c.rng.gen_range(-2.0..2.0)).collect();
            let k = c.rng.gen_range(0.1..3.0);
            let y: Vec<f64> = x.iter().map(|a| k * a.signum() * a.abs().powf(p / q)).collect();
            let scale: f64 = x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1.0);
            let gap = holder_gap(&x, &y, p)?;
            c.check(gap.abs() <= 1e-12 * scale, || format!("p={p}: equality case gap {gap:.3e}"));
        }
    }
    Ok(())
}

fn project_moreau(c: &mut Ctx) -> Result<()> {
    let tol = c.cfg.solver.tol;
    for n in c.cfg.sizes(5) {
        let m = ConeModel::new(n)?;
        for _ in 0..20 {
            let q = c.point(n);
            let q2 = c.point(n);
            let pk = c.project_k(&m, &q)?;
            let polar = q.sub(&pk);
            let qq = q.inner(&q);
            let ortho = pk.inner(&polar).abs();
            c.check(ortho <= 100.0 * tol * qq.max(1.0), || format!("n={n}: ⟨Π_K q, Π_K° q⟩ = {ortho:.3e}"));
            let feas = m.lmi_min_eigenvalue(&pk);
            c.check(feas >= -100.0 * tol, || format!("n={n}: Π_K q infeasible (λ_min {feas:.3e})"));
            let back = c.project_k(&m, &polar)?;
            c.check(back.norm() <= 100.0 * tol, || format!("n={n}: polar part projects to {:.3e}", back.norm()));
            let twice = c.project_k(&m, &pk)?;
            c.check(twice.dist(&pk) <= 100.0 * tol, || format!("n={n}: Π_K not idempotent ({:.3e})", twice.dist(&pk)));
            let pk2 = c.project_k(&m, &q2)?;
            let expand = pk.dist(&pk2) - q.dist(&q2);
            c.check(expand <= 100.0 * tol, || format!("n={n}: Π_K expands distances by {expand:.3e}"));
        }
    }
    Ok(())
}

fn project_normal_ray(c: &mut Ctx) -> Result<()> {
    for n in c.cfg.sizes(4) {
        let m = ConeModel::new(n)?;
        for t in [0.1, 0.5, 0.9] {
            let v = m.curve_v(t)?;
            let w = m.curve_w(t)?;
            for alpha in [0.1, 1.0] {
                let mut q = v.clone();
                q.axpy(alpha, &w);
                let polar = q.sub(&c.project_k(&m, &q)?);
                let err = polar.dist(&v);
                c.check(err <= 1e-5, || format!("n={n}, t={t}, α={alpha}: moved {err:.3e} off v(t)"));
            }
        }
    }
    Ok(())
}

fn project_slice(c: &mut Ctx) -> Result<()> {
    let cfg = c.cfg.solver;
    for n in c.cfg.sizes(3) {
        let m = ConeModel::new(n)?;
        for _ in 0..3 {
            let x = c.blocks(n);
            let (mut d, ds) = project::project_slice_dykstra(&m, &x, &cfg)?;
            d.blocks_mut()[0].a += c.fault();
            let (f, fs) = project::project_slice_fixedpoint(&m, &x, &cfg)?;
            c.check(ds.converged && fs.converged, || format!("n={n}: slice projector did not converge"));
            let gap = d.dist(&f);
            c.check(gap <= 1e-5, || format!("n={n}: Dykstra and fixed point differ by {gap:.3e}"));
            let psd = c.psd_block(&f)?;
            let again = psd.dist(&f);
            c.check(again <= 1e-7, || format!("n={n}: slice point not PSD ({again:.3e})"));
        }
    }
    Ok(())
}

fn probe_exact(c: &mut Ctx) -> Result<()> {
    let mut last_order = f64::INFINITY;
    for n in c.cfg.sizes(6) {
        let m = ConeModel::new(n)?;
        let rep = probe::probe_semismoothness(&m, ProbeMode::Exact, &Grid::default(), &c.cfg.solver, probe::DEFAULT_FD_STEP)?;
        let slope = rep.fitted_slope + c.fault() * 100.0;
        c.check((slope - rep.target_lambda).abs() <= 0.02, || format!("n={n}: slope {slope:.4} vs λ {:.4}", rep.target_lambda));
        c.check(rep.max_abs_log_residual_deviation <= 0.05, || format!("n={n}: poor power-law fit"));
        c.check(rep.implied_order < last_order, || format!("n={n}: implied order did not decrease"));
        last_order = rep.implied_order;
        let scaled: Vec<f64> = rep
            .t_grid
            .iter()
            .zip(&rep.residual_norms)
            .map(|(t, r)| r / t.powf(rep.target_lambda))
            .collect();
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        c.check(hi / lo <= 2.0, || format!("n={n}: r/t^λ spans a ratio of {:.3}", hi / lo));
    }
    Ok(())
}

fn probe_numeric(c: &mut Ctx) -> Result<()> {
    for n in c.cfg.sizes(3) {
        let m = ConeModel::new(n)?;
        for t in [1e-3, 1e-2, 1e-1] {
            let num = probe::residual_numeric(&m, t, &c.cfg.solver, probe::DEFAULT_FD_STEP)?;
            let (_, exact) = probe::residual_exact(&m, t)?;
            let measured = num.finite_difference_norm + c.fault() * 100.0 * exact;
            let rel = (measured - exact).abs() / exact;
            c.check(rel <= 0.05, || format!("n={n}, t={t}: numeric residual off by {:.2}%", 100.0 * rel));
        }
    }
    Ok(())
}
