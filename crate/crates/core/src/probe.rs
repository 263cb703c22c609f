//! Semismoothness probes for `Π_{K_n°}` along the curve `v(t)`.
//!
//! With `h = v(t) - v(0)` the residual `Π(v(0) + h) - Π(v(0)) - Π'(v(0) + h; h)`
//! collapses to `h - Π_{T(v(t))}(h)`, the component of `h` along the normal
//! generator `w(t)`. It scales like `t^λ` while `‖h‖` scales like `t`, so the
//! fitted slope of `log ‖r‖` against `log t`, minus one, bounds the order.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{ConeModel, ConePoint};
use crate::project::{project_k, project_polar, SolveStats, SolverConfig};
use crate::space::{fmt_f64, Euclidean};
use crate::{Error, Result};

pub const DEFAULT_T_MIN: f64 = 1e-4;
pub const DEFAULT_T_MAX: f64 = 1e-1;
pub const DEFAULT_POINTS: usize = 20;
pub const DEFAULT_FD_STEP: f64 = 1e-6;
pub const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeMode {
    Exact,
    Numeric,
}

impl FromStr for ProbeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ProbeMode::Exact),
            "numeric" => Ok(ProbeMode::Numeric),
            other => Err(Error::invalid(format!("mode must be exact or numeric, got {other:?}"))),
        }
    }
}

/// Log-spaced grid of curve parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { t_min: DEFAULT_T_MIN, t_max: DEFAULT_T_MAX, points: DEFAULT_POINTS }
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let open = |t: f64| t > 0.0 && t < 1.0;
        if !open(self.t_min) || !open(self.t_max) {
            return Err(Error::invalid(format!(
                "t-min and t-max must lie in (0, 1), got {} and {}",
                self.t_min, self.t_max
            )));
        }
        if !(self.t_min < self.t_max) {
            return Err(Error::invalid(format!(
                "t-min must be below t-max, got {} >= {}",
                self.t_min, self.t_max
            )));
        }
        if self.points < MIN_POINTS {
            return Err(Error::invalid(format!(
                "points must be at least {MIN_POINTS}, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// Grid values, strictly increasing, with both endpoints hit exactly.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let m = self.points - 1;
        let mut ts: Vec<f64> =
            (0..=m).map(|i| (a + (b - a) * i as f64 / m as f64).exp()).collect();
        ts[0] = self.t_min;
        ts[m] = self.t_max;
        Ok(ts)
    }
}

/// `r(t) = (⟨h, w⟩ / ‖w‖²) w` with the inner product in closed form.
/// Returns the vector and its norm `⟨h, w⟩ / ‖w‖`.
pub fn residual_exact(model: &ConeModel, t: f64) -> Result<(ConePoint, f64)> {
    check_open(t)?;
    let w = model.curve_w(t)?;
    let inner = model.curve_inner_closed_form(t)?;
    let ww = w.inner(&w);
    Ok((w.scaled(inner / ww), inner / ww.sqrt()))
}

/// Both numeric evaluations of the residual at one curve point.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericResidual {
    /// `h - Π_T(h)` with the tangent cone taken from the normal ray.
    pub tangent: ConePoint,
    pub tangent_norm: f64,
    /// `h - (Π_{K°}(v + s h) - v) / s`.
    pub finite_difference: ConePoint,
    pub finite_difference_norm: f64,
    /// `‖tangent - finite_difference‖`.
    pub discrepancy: f64,
    /// Stats of the projection at `v + s h`.
    pub stats: SolveStats,
}

fn converged(stats: SolveStats) -> Result<SolveStats> {
    if stats.converged {
        Ok(stats)
    } else {
        Err(Error::NotConverged(stats))
    }
}

fn assert_fixed_point(model: &ConeModel, v: &ConePoint, cfg: &SolverConfig) -> Result<()> {
    let (p, stats) = project_polar(model, v, cfg)?;
    converged(stats)?;
    let gap = p.dist(v);
    if gap > 10.0 * cfg.tol {
        return Err(Error::NumericFailure(format!(
            "curve point is not a fixed point of the polar projection (moved by {gap:.3e})"
        )));
    }
    Ok(())
}

/// Residual through the solver. The finite difference is evaluated in the
/// algebraically equal form `Π_K(v + s h) / s`, which avoids subtracting
/// two O(1) vectors before dividing by `s`.
pub fn residual_numeric(
    model: &ConeModel,
    t: f64,
    cfg: &SolverConfig,
    fd_step: f64,
) -> Result<NumericResidual> {
    check_open(t)?;
    if !(fd_step > 0.0) || !fd_step.is_finite() {
        return Err(Error::invalid(format!("fd-step must be positive, got {fd_step}")));
    }
    cfg.validate()?;
    let v0 = model.curve_v(0.0)?;
    let v = model.curve_v(t)?;
    let h = model.curve_step(t)?;
    assert_fixed_point(model, &v0, cfg)?;
    assert_fixed_point(model, &v, cfg)?;

    let ray = model.normal_ray(t)?;
    let tangent = h.sub(&ray.tangent_project(&h)?);

    let mut shifted = v.clone();
    shifted.axpy(fd_step, &h);
    let (pk, stats) = project_k(model, &shifted, cfg)?;
    let stats = converged(stats)?;
    let finite_difference = pk.scaled(1.0 / fd_step);

    Ok(NumericResidual {
        tangent_norm: tangent.norm(),
        finite_difference_norm: finite_difference.norm(),
        discrepancy: tangent.dist(&finite_difference),
        tangent,
        finite_difference,
        stats,
    })
}

fn check_open(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("t must lie strictly inside (0, 1), got {t}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_abs_log_residual_deviation: f64,
}

/// Least-squares line through `(log t, log r)`.
pub fn fit_exponent(t_grid: &[f64], residual_norms: &[f64]) -> Result<PowerFit> {
    if t_grid.len() != residual_norms.len() {
        return Err(Error::DimensionMismatch { expected: t_grid.len(), found: residual_norms.len() });
    }
    if t_grid.len() < MIN_POINTS {
        return Err(Error::invalid(format!(
            "need at least {MIN_POINTS} points to fit, got {}",
            t_grid.len()
        )));
    }
    if let Some(r) = residual_norms.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::invalid(format!("residual norms must be positive, got {r}")));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid(format!("grid values must be positive, got {t}")));
    }
    let xs: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = residual_norms.iter().map(|r| r.ln()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("grid values must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let max_abs_log_residual_deviation = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(PowerFit { slope, intercept, max_abs_log_residual_deviation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n: usize,
    pub mode: ProbeMode,
    pub t_grid: Vec<f64>,
    pub h_norms: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub implied_order: f64,
    pub target_lambda: f64,
    pub max_abs_log_residual_deviation: f64,
}

impl ProbeReport {
    /// `|fitted_slope - λ_n|`.
    pub fn gap(&self) -> f64 {
        (self.fitted_slope - self.target_lambda).abs()
    }

    pub fn target_order(&self) -> f64 {
        self.target_lambda - 1.0
    }

    pub fn summary_line(&self) -> String {
        format!(
            "n={} slope={:.6} implied_order={:.6} target={:.6} |Δ|={:.6}",
            self.n,
            self.fitted_slope,
            self.implied_order,
            self.target_order(),
            self.gap()
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,h_norm,residual_norm\n");
        for ((t, h), r) in self.t_grid.iter().zip(&self.h_norms).zip(&self.residual_norms) {
            let _ = writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*h), fmt_f64(*r));
        }
        let _ = writeln!(
            out,
            "# slope={} implied_order={} target={}",
            fmt_f64(self.fitted_slope),
            fmt_f64(self.implied_order),
            fmt_f64(self.target_order())
        );
        out
    }
}

/// Runs the probe over `grid`. Grid points are evaluated in parallel on the
/// current rayon pool; results keep grid order.
pub fn probe_semismoothness(
    model: &ConeModel,
    mode: ProbeMode,
    grid: &Grid,
    cfg: &SolverConfig,
    fd_step: f64,
) -> Result<ProbeReport> {
    let t_grid = grid.values()?;
    let rows: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let h = model.curve_step(t)?.norm();
            let r = match mode {
                ProbeMode::Exact => residual_exact(model, t)?.1,
                ProbeMode::Numeric => residual_numeric(model, t, cfg, fd_step)?.finite_difference_norm,
            };
            Ok((h, r))
        })
        .collect::<Result<_>>()?;
    let (h_norms, residual_norms): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let fit = fit_exponent(&t_grid, &residual_norms)?;
    Ok(ProbeReport {
        n: model.n(),
        mode,
        t_grid,
        h_norms,
        residual_norms,
        fitted_slope: fit.slope,
        intercept: fit.intercept,
        implied_order: fit.slope - 1.0,
        target_lambda: model.lambda(),
        max_abs_log_residual_deviation: fit.max_abs_log_residual_deviation,
    })
}
