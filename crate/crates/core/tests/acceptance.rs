//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sliceproj::cones::holder_gap;
use sliceproj::probe::{probe_semismoothness, residual_exact, residual_numeric, Grid, DEFAULT_FD_STEP};
use sliceproj::project::{
    project_k, project_polar, project_slice_dykstra, project_slice_fixedpoint_with_step,
};
use sliceproj::symmat::{psd_project_block, psd_project_full};
use sliceproj::{BlockSymMatrix, ConeModel, ConePoint, Euclidean, ProbeMode, Sym2, SolverConfig};

const SLOPE_TOL_EXACT: f64 = 0.02;
const SLOPE_TOL_NUMERIC: f64 = 0.05;
const ORDER_CAP_N6: f64 = 0.05;
const NUMERIC_REL_TOL: f64 = 0.05;
const NORMAL_RAY_TOL: f64 = 1e-5;
const SLICE_AGREE_TOL: f64 = 1e-5;
const GAMMA_AGREE_TOL: f64 = 1e-6;
const HOLDER_TOL: f64 = 1e-12;
const KERNEL_TOL: f64 = 1e-10;
const SOLVER_TOL: f64 = 1e-9;

type Verdict = Result<String, String>;

fn cfg() -> SolverConfig {
    SolverConfig::with_tol(SOLVER_TOL)
}

fn lambdas() -> [(usize, f64); 5] {
    [(2, 4.0 / 3.0), (3, 8.0 / 7.0), (4, 16.0 / 15.0), (5, 32.0 / 31.0), (6, 64.0 / 63.0)]
}

fn exponent_recovery() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (n, lambda) in lambdas() {
        let m = ConeModel::new(n).map_err(|e| e.to_string())?;
        let rep = probe_semismoothness(&m, ProbeMode::Exact, &Grid::default(), &cfg(), DEFAULT_FD_STEP)
            .map_err(|e| e.to_string())?;
        let gap = (rep.fitted_slope - lambda).abs();
        worst = worst.max(gap);
        if gap > SLOPE_TOL_EXACT {
            return Err(format!("n={n}: slope {:.5} vs λ {lambda:.5}", rep.fitted_slope));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("max |slope - λ| = {worst:.4}, {elapsed:?}"))
}

fn order_collapse() -> Verdict {
    let mut orders = Vec::new();
    for (n, _) in lambdas() {
        let m = ConeModel::new(n).map_err(|e| e.to_string())?;
        let rep = probe_semismoothness(&m, ProbeMode::Exact, &Grid::default(), &cfg(), DEFAULT_FD_STEP)
            .map_err(|e| e.to_string())?;
        orders.push(rep.implied_order);
    }
    if orders.windows(2).any(|w| w[1] >= w[0]) {
        return Err(format!("implied orders not strictly decreasing: {orders:?}"));
    }
    let last = *orders.last().unwrap();
    if last > ORDER_CAP_N6 {
        return Err(format!("n=6 implied order {last:.4}"));
    }
    Ok(format!("orders {:?}", orders.iter().map(|o| format!("{o:.4}")).collect::<Vec<_>>()))
}

fn numeric_agreement() -> Verdict {
    let start = Instant::now();
    let mut worst_rel: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    for (n, lambda) in &lambdas()[..2] {
        let m = ConeModel::new(*n).map_err(|e| e.to_string())?;
        for t in [1e-3, 1e-2, 1e-1] {
            let num = residual_numeric(&m, t, &cfg(), DEFAULT_FD_STEP).map_err(|e| e.to_string())?;
            let (_, exact) = residual_exact(&m, t).map_err(|e| e.to_string())?;
            let rel = (num.finite_difference_norm - exact).abs() / exact;
            worst_rel = worst_rel.max(rel);
            if rel > NUMERIC_REL_TOL {
                return Err(format!("n={n}, t={t}: relative error {rel:.3e}"));
            }
        }
        let rep = probe_semismoothness(&m, ProbeMode::Numeric, &Grid::default(), &cfg(), DEFAULT_FD_STEP)
            .map_err(|e| e.to_string())?;
        let gap = (rep.fitted_slope - lambda).abs();
        worst_slope = worst_slope.max(gap);
        if gap > SLOPE_TOL_NUMERIC {
            return Err(format!("n={n}: numeric slope {:.5} vs λ {lambda:.5}", rep.fitted_slope));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(120) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("max rel err {worst_rel:.2e}, max |slope - λ| = {worst_slope:.4}, {elapsed:?}"))
}

fn normal_ray() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        let m = ConeModel::new(n).map_err(|e| e.to_string())?;
        for t in [0.1, 0.5, 0.9] {
            let v = m.curve_v(t).unwrap();
            let w = m.curve_w(t).unwrap();
            for alpha in [0.1, 1.0] {
                let mut q = v.clone();
                q.axpy(alpha, &w);
                let (p, _) = project_polar(&m, &q, &cfg()).map_err(|e| e.to_string())?;
                let err = p.dist(&v);
                worst = worst.max(err);
                if err > NORMAL_RAY_TOL {
                    return Err(format!("n={n}, t={t}, α={alpha}: error {err:.3e}"));
                }
            }
        }
    }
    Ok(format!("max error {worst:.2e}"))
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> ConePoint {
    ConePoint::from_coords(n, (0..2 * n + 1).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

fn random_blocks(rng: &mut ChaCha8Rng, n: usize) -> BlockSymMatrix {
    let b = (0..2 * n - 1)
        .map(|_| Sym2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    BlockSymMatrix::new(n, b).unwrap()
}

fn moreau_suite() -> Verdict {
    let tol = 100.0 * SOLVER_TOL;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = [0.0f64; 4];
    for n in 2..=5 {
        let m = ConeModel::new(n).map_err(|e| e.to_string())?;
        let mut prev: Option<(ConePoint, ConePoint)> = None;
        for _ in 0..200 {
            let q = random_point(&mut rng, n);
            let (pk, _) = project_k(&m, &q, &cfg()).map_err(|e| e.to_string())?;
            let (polar, _) = project_polar(&m, &q, &cfg()).map_err(|e| e.to_string())?;
            let scale = q.inner(&q).max(1.0);
            let decomposition = q.dist(&pk.add(&polar));
            let orthogonality = pk.inner(&polar).abs() / scale;
            let (twice, _) = project_k(&m, &pk, &cfg()).map_err(|e| e.to_string())?;
            let idempotence = twice.dist(&pk);
            let expansion = match &prev {
                Some((q0, p0)) => (pk.dist(p0) - q.dist(q0)).max(0.0),
                None => 0.0,
            };
            for (w, x) in worst.iter_mut().zip([decomposition, orthogonality, idempotence, expansion]) {
                *w = w.max(x);
            }
            if m.lmi_min_eigenvalue(&pk) < -tol {
                return Err(format!("n={n}: Π_K(q) infeasible"));
            }
            prev = Some((q, pk));
        }
    }
    let names = ["decomposition", "orthogonality", "idempotence", "nonexpansiveness"];
    if let Some(i) = worst.iter().position(|w| *w > tol) {
        return Err(format!("{} violated by {:.3e}", names[i], worst[i]));
    }
    Ok(format!("worst {:?}", worst.iter().map(|w| format!("{w:.1e}")).collect::<Vec<_>>()))
}

fn slice_cross_validation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_agree, mut worst_gamma) = (0.0f64, 0.0f64);
    for n in 2..=3 {
        let m = ConeModel::new(n).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let x = random_blocks(&mut rng, n);
            let (d, ds) = project_slice_dykstra(&m, &x, &cfg()).map_err(|e| e.to_string())?;
            let (f, fs) = project_slice_fixedpoint_with_step(&m, &x, &cfg(), 0.9).map_err(|e| e.to_string())?;
            let (g, gs) = project_slice_fixedpoint_with_step(&m, &x, &cfg(), 0.5).map_err(|e| e.to_string())?;
            if !(ds.converged && fs.converged && gs.converged) {
                return Err(format!("n={n}: a slice projector did not converge"));
            }
            worst_agree = worst_agree.max(d.dist(&f));
            worst_gamma = worst_gamma.max(f.dist(&g));
        }
    }
    if worst_agree > SLICE_AGREE_TOL {
        return Err(format!("Dykstra vs fixed point {worst_agree:.3e}"));
    }
    if worst_gamma > GAMMA_AGREE_TOL {
        return Err(format!("γ dependence {worst_gamma:.3e}"));
    }
    Ok(format!("agreement {worst_agree:.2e}, γ spread {worst_gamma:.2e}"))
}

fn holder_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_neg: f64 = 0.0;
    for _ in 0..1000 {
        let len = rng.gen_range(1..10);
        let p = rng.gen_range(1.05..6.0);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let scale = x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1.0);
        let gap = holder_gap(&x, &y, p).map_err(|e| e.to_string())?;
        worst_neg = worst_neg.min(gap / scale);
    }
    if worst_neg < -HOLDER_TOL {
        return Err(format!("negative gap {worst_neg:.3e}"));
    }
    let mut worst_eq: f64 = 0.0;
    for _ in 0..100 {
        let len = rng.gen_range(1..10);
        let p = rng.gen_range(1.05..6.0);
        let q = p / (p - 1.0);
        let c = rng.gen_range(0.1..4.0);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x.iter().map(|a| c * a.signum() * a.abs().powf(p / q)).collect();
        let scale = x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1.0);
        let gap = holder_gap(&x, &y, p).map_err(|e| e.to_string())?;
        worst_eq = worst_eq.max(gap.abs() / scale);
    }
    if worst_eq > HOLDER_TOL {
        return Err(format!("equality case gap {worst_eq:.3e}"));
    }
    Ok(format!("min scaled gap {worst_neg:.1e}, equality gap {worst_eq:.1e}"))
}

fn kernel_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = 2 + i % 5;
        let x = random_blocks(&mut rng, n);
        let block = psd_project_block(&x).map_err(|e| e.to_string())?.to_sym_matrix();
        let mut full = psd_project_full(&x.to_sym_matrix()).map_err(|e| e.to_string())?;
        full.axpy(-1.0, &block);
        worst = worst.max(full.frobenius_norm());
    }
    if worst > KERNEL_TOL {
        return Err(format!("block vs full {worst:.3e}"));
    }
    Ok(format!("max difference {worst:.2e} (dims 6..22)"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 exponent recovery", exponent_recovery),
        ("2 order collapse", order_collapse),
        ("3 numeric agreement", numeric_agreement),
        ("4 normal ray", normal_ray),
        ("5 Moreau suite", moreau_suite),
        ("6 slice cross-validation", slice_cross_validation),
        ("7 Hölder suite", holder_suite),
        ("8 kernel correctness", kernel_correctness),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
