//! Numerical studies on top of the solver and model layers: directional
//! derivative checks, translation identities, maximum principles, the
//! auxiliary comparison bound, mollification convergence with and without
//! renormalization, and the law of the solution at a point.
//!
//! Every study returns a [`StudyReport`]: a list of named metrics, each
//! either informational or checked against a bound. Reports serialize to
//! JSON so the command line can persist them verbatim.

use std::f64::consts::SQRT_2;
use std::fmt::Display;

use gpam_algebra::{StructureParams, Symbol};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fields::{mollify, white_noise, Fft2, Field, FieldError, Grid2D};
use crate::kernel;
use crate::models::{canonical_model, renorm_constant_grid, ModelError};
use crate::solver::{
    max_stable_dt, solve_auxiliary_w, solve_gpam, solve_gpam_shifted, solve_tangent,
    solve_tangent_hom, Nonlinearity, PdeConfig, SaveRule, SolverError,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("bad study configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtMost,
    AtLeast,
    Above,
}

/// One named number, optionally checked against a bound.
#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<Direction>,
    pub pass: bool,
}

impl Metric {
    pub fn info(name: &str, value: f64) -> Metric {
        Metric {
            name: name.into(),
            value,
            bound: None,
            dir: None,
            pass: true,
        }
    }

    pub fn at_most(name: &str, value: f64, bound: f64) -> Metric {
        Metric {
            name: name.into(),
            value,
            bound: Some(bound),
            dir: Some(Direction::AtMost),
            pass: value.is_finite() && value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Metric {
        Metric {
            name: name.into(),
            value,
            bound: Some(bound),
            dir: Some(Direction::AtLeast),
            pass: value.is_finite() && value >= bound,
        }
    }

    /// Strict positivity check (bound recorded as zero).
    pub fn positive(name: &str, value: f64) -> Metric {
        Metric {
            name: name.into(),
            value,
            bound: Some(0.0),
            dir: Some(Direction::Above),
            pass: value.is_finite() && value > 0.0,
        }
    }
}

/// Outcome of one study: input parameters echoed as strings plus the
/// metric list. `pass` is the conjunction of the checked metrics.
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub params: Vec<(String, String)>,
    pub metrics: Vec<Metric>,
}

impl StudyReport {
    fn new(study: &str) -> StudyReport {
        StudyReport {
            study: study.into(),
            params: Vec::new(),
            metrics: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Display) {
        self.params.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, m: Metric) {
        self.metrics.push(m);
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn pass(&self) -> bool {
        self.metrics.iter().all(|m| m.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// One line per metric in the shape the command line prints.
    pub fn render_lines(&self) -> String {
        let mut out = String::new();
        for m in &self.metrics {
            let tag = if m.pass { "pass" } else { "FAIL" };
            let detail = match (m.bound, m.dir) {
                (Some(b), Some(Direction::AtMost)) => format!("{:.6e} <= {:.6e}", m.value, b),
                (Some(b), Some(Direction::AtLeast)) => format!("{:.6e} >= {:.6e}", m.value, b),
                (Some(b), Some(Direction::Above)) => format!("{:.6e} > {:.6e}", m.value, b),
                _ => format!("{:.6e}", m.value),
            };
            out.push_str(&format!("[{tag}] {}: {detail}\n", m.name));
        }
        out
    }
}

/// Least squares line through `(xs, ys)`: slope, intercept, r^2.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Smooth default initial condition, sup norm 1.5.
pub fn standard_initial(grid: Grid2D) -> Field {
    Field::from_fn(grid, |x, y| x.sin() + 0.5 * (2.0 * y).cos())
}

/// Smooth default shift direction, independent of [`standard_initial`].
pub fn standard_shift(grid: Grid2D) -> Field {
    Field::from_fn(grid, |x, y| (x - 2.0 * y).cos() + 0.3 * (3.0 * x).sin())
}

/// Plateau bump: exactly 1 on the closed ball of radius `inner` around
/// the grid point `center`, 0 outside radius `outer`, with the classic
/// smooth-partition ramp in between.
pub fn plateau_bump(grid: Grid2D, center: (usize, usize), inner: f64, outer: f64) -> Field {
    assert!(0.0 < inner && inner < outer, "need 0 < inner < outer");
    fn ramp(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    let n = grid.n();
    let mut f = Field::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            let r = grid.node_dist((i, j), center);
            let v = if r <= inner {
                1.0
            } else if r >= outer {
                0.0
            } else {
                let s = (r - inner) / (outer - inner);
                ramp(1.0 - s) / (ramp(1.0 - s) + ramp(s))
            };
            f.set(i, j, v);
        }
    }
    f
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT_2))
}

/// One-sample Kolmogorov-Smirnov statistic against `N(0, sigma^2)`.
/// Sorts the slice in place.
pub fn ks_normal(samples: &mut [f64], sigma: f64) -> f64 {
    assert!(!samples.is_empty() && sigma > 0.0);
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = normal_cdf(x / sigma);
        ks = ks.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    ks
}

/// Largest empirical atom: maximal tie multiplicity over sample count.
/// Sorts the slice in place.
pub fn max_jump(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = 1usize;
    let mut run = 1usize;
    for w in samples.windows(2) {
        if w[0] == w[1] {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
        }
    }
    best as f64 / samples.len() as f64
}

fn check_same_grid(fft: &Fft2, fields: &[&Field]) -> Result<(), AnalysisError> {
    let n = fft.grid().n();
    for f in fields {
        if f.n() != n {
            return Err(AnalysisError::Config(format!(
                "field on a {} grid, expected {}",
                f.n(),
                n
            )));
        }
    }
    Ok(())
}

fn default_params() -> StructureParams {
    StructureParams::new(0.05, 1.1, 0.5).expect("default parameters are valid")
}

/// Cauchy statistics for a gap sequence: the gaps themselves, the count
/// of monotonicity violations excluding the finest pair, and the sweep
/// contraction factor checked against `0.7^{pairs-1}`.
fn push_cauchy_metrics(rep: &mut StudyReport, prefix: &str, gaps: &[f64]) {
    for (k, gap) in gaps.iter().enumerate() {
        rep.push(Metric::info(&format!("{prefix}_gap_{k}"), *gap));
    }
    let mut violations = 0.0;
    for j in 1..gaps.len().saturating_sub(1) {
        if gaps[j] >= gaps[j - 1] {
            violations += 1.0;
        }
    }
    rep.push(Metric::at_most(
        &format!("{prefix}_gap_increases"),
        violations,
        0.0,
    ));
    if gaps.len() >= 2 && gaps[0] > 0.0 {
        let factor = gaps[gaps.len() - 1] / gaps[0];
        let bound = 0.7_f64.powi(gaps.len() as i32 - 1);
        rep.push(Metric::at_most(
            &format!("{prefix}_contraction"),
            factor,
            bound,
        ));
    }
}

/// Directional derivative check. Solves the renormalized equation from a
/// fixed smooth state, the tangent equation in direction `h`, and the
/// shifted equation for each `delta * h`; the Taylor remainder
/// `u^{delta h}(T) - u(T) - delta v(T)` must shrink at second order in
/// `delta` (exactly, not asymptotically, for affine reaction terms).
/// Also checks that `h -> v^h` is linear on a two-direction combination.
#[allow(clippy::too_many_arguments)]
pub fn gateaux_check(
    fft: &Fft2,
    g: Nonlinearity,
    eps: f64,
    xi_eps: &Field,
    h: &Field,
    deltas: &[f64],
    t_probe: f64,
    x_probe: (usize, usize),
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[xi_eps, h])?;
    if deltas.len() < 2 {
        return Err(AnalysisError::Config("need at least two deltas".into()));
    }
    let grid = fft.grid();
    let c = renorm_constant_grid(fft, eps)?;
    let dt = max_stable_dt(xi_eps);
    let cfg = PdeConfig::new(standard_initial(grid), eps, c, dt, t_probe)?;

    let mut rep = StudyReport::new("gateaux");
    rep.param("g", g.name());
    rep.param("eps", eps);
    rep.param("n", grid.n());
    rep.param("t_probe", t_probe);
    rep.param("dt", cfg.dt_eff());

    let base = solve_gpam(fft, &cfg, g, xi_eps)?;
    let mut blowups = if base.blowup().is_some() { 1.0 } else { 0.0 };
    if base.blowup().is_some() {
        rep.push(Metric::at_most("blowup_count", blowups, 0.0));
        return Ok(rep);
    }
    let v = solve_tangent(fft, &cfg, g, xi_eps, h, &base)?;
    rep.push(Metric::info("tangent_sup", v.last().linf()));
    rep.push(Metric::info(
        "tangent_at_probe",
        v.last().get(x_probe.0, x_probe.1),
    ));

    let h2 = standard_shift(grid);
    let v2 = solve_tangent(fft, &cfg, g, xi_eps, &h2, &base)?;
    let mut combo = h.clone();
    combo.scale(1.25);
    combo.axpy(-0.5, &h2);
    let v_combo = solve_tangent(fft, &cfg, g, xi_eps, &combo, &base)?;
    let mut expect = v.last().clone();
    expect.scale(1.25);
    expect.axpy(-0.5, v2.last());
    let lin_err = v_combo.last().zip_with(&expect, |a, b| a - b).linf();
    rep.push(Metric::at_most("linearity_error", lin_err, 1e-8));

    let mut rems = Vec::with_capacity(deltas.len());
    for (k, &delta) in deltas.iter().enumerate() {
        if !(delta > 0.0) {
            return Err(AnalysisError::Config(format!("delta {delta} not positive")));
        }
        let mut dh = h.clone();
        dh.scale(delta);
        let shifted = solve_gpam_shifted(fft, &cfg, g, xi_eps, &dh)?;
        if shifted.blowup().is_some() {
            blowups += 1.0;
            continue;
        }
        let rem = shifted
            .last()
            .zip_with(base.last(), |a, b| a - b)
            .zip_with(v.last(), |d, vv| d - delta * vv)
            .linf();
        rep.push(Metric::info(&format!("remainder_{k}"), rem));
        rems.push((delta, rem));
    }
    rep.push(Metric::at_most("blowup_count", blowups, 0.0));

    match g {
        Nonlinearity::Zero | Nonlinearity::One => {
            let worst = rems.iter().fold(0.0_f64, |a, &(_, r)| a.max(r));
            rep.push(Metric::at_most("affine_remainder_sup", worst, 1e-10));
        }
        _ => {
            let xs: Vec<f64> = rems.iter().map(|&(d, _)| d.ln()).collect();
            let ys: Vec<f64> = rems.iter().map(|&(_, r)| r.max(1e-300).ln()).collect();
            let (slope, _, r2) = linear_fit(&xs, &ys);
            rep.push(Metric::at_least("fd_order", slope, 1.8));
            rep.push(Metric::info("fd_fit_r2", r2));
        }
    }
    Ok(rep)
}

/// Translation identities. The translated model must coincide with the
/// canonical model of the pre-shifted noise, translation must compose
/// additively, and the shifted solver must reproduce the plain solver on
/// the pre-shifted noise bitwise.
pub fn translation_consistency(
    fft: &Fft2,
    g: Nonlinearity,
    eps: f64,
    xi_eps: &Field,
    h: &Field,
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[xi_eps, h])?;
    let grid = fft.grid();
    let params = default_params();

    let mut rep = StudyReport::new("translation");
    rep.param("g", g.name());
    rep.param("eps", eps);
    rep.param("n", grid.n());

    let base = canonical_model(fft, xi_eps.clone(), eps, params);
    let translated = base.translate(fft, h.clone())?;
    let shifted_noise = xi_eps.zip_with(h, |a, b| a + b);
    let shifted = canonical_model(fft, shifted_noise, eps, params);
    let d_model = translated.max_realization_diff(&shifted, 64, 2024)?;
    rep.push(Metric::at_most("model_vs_shifted_noise", d_model, 1e-10));

    let h2 = standard_shift(grid);
    let once = canonical_model(fft, xi_eps.zip_with(h, |a, b| a + b), eps, params)
        .translate(fft, h2.clone())?;
    let sum = h.zip_with(&h2, |a, b| a + b);
    let joint = base.translate(fft, sum)?;
    let d_add = once.max_realization_diff(&joint, 64, 2025)?;
    rep.push(Metric::at_most("translation_additivity", d_add, 1e-10));

    let c = renorm_constant_grid(fft, eps)?;
    let dt = max_stable_dt(&xi_eps.zip_with(h, |a, b| a + b));
    let cfg = PdeConfig::new(standard_initial(grid), eps, c, dt, 0.2)?;
    let a = solve_gpam_shifted(fft, &cfg, g, xi_eps, h)?;
    let pre = xi_eps.zip_with(h, |x, y| x + y);
    let b = solve_gpam(fft, &cfg, g, &pre)?;
    let mut d_solver = 0.0_f64;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        d_solver = d_solver.max(fa.zip_with(fb, |p, q| p - q).linf());
    }
    rep.push(Metric::at_most("solver_shift_identity", d_solver, 0.0));
    Ok(rep)
}

/// Heat kernel lower bound behind the strong maximum principle: data
/// `>= 1` on the ball `B(center, delta)` keeps the heat evolution
/// `>= 1/4` on the grown ball `B(center, delta + t rho)` for all
/// `t <= t_rho`, for some positive window `t_rho` depending only on the
/// growth rate. The scan walks a geometric time grid and reports the
/// largest prefix on which the bound holds; the window must reach an
/// eighth of the flat-boundary Gaussian prediction `(0.674 / rho)^2`
/// (which overshoots at small rates, where ball curvature bites) and
/// must grow the ball by at least one lattice cell.
pub fn heat_kernel_lower_bound(
    fft: &Fft2,
    delta: f64,
    rhos: &[f64],
    t_samples: usize,
) -> Result<StudyReport, AnalysisError> {
    if !(delta > 0.0) || rhos.is_empty() || t_samples < 4 {
        return Err(AnalysisError::Config(
            "need positive radius, growth rates and at least 4 time samples".into(),
        ));
    }
    let grid = fft.grid();
    let n = grid.n();
    let center = (n / 2, n / 2);
    let mut ind = Field::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            if grid.node_dist((i, j), center) <= delta {
                ind.set(i, j, 1.0);
            }
        }
    }

    let mut rep = StudyReport::new("heat_lower_bound");
    rep.param("n", n);
    rep.param("delta", delta);

    let t_lo = 1e-3;
    let ratio = (1.0_f64 / t_lo).powf(1.0 / t_samples as f64);
    for &rho in rhos {
        let t_theory = (0.674 / rho) * (0.674 / rho);
        let mut t_star = 0.0_f64;
        for k in 0..=t_samples {
            let t = t_lo * ratio.powi(k as i32);
            let evolved = fft.heat_semigroup(&ind, t);
            let radius = delta + t * rho;
            let mut min_on_ball = f64::INFINITY;
            for i in 0..n {
                for j in 0..n {
                    if grid.node_dist((i, j), center) <= radius {
                        min_on_ball = min_on_ball.min(evolved.get(i, j));
                    }
                }
            }
            if min_on_ball >= 0.25 {
                t_star = t;
            } else {
                break;
            }
        }
        rep.push(Metric::at_least(
            &format!("t_star_rho_{rho}"),
            t_star,
            0.125 * t_theory,
        ));
        rep.push(Metric::at_least(
            &format!("grown_cells_rho_{rho}"),
            t_star * rho / grid.spacing(),
            1.0,
        ));
        rep.push(Metric::info(&format!("t_theory_rho_{rho}"), t_theory));
    }
    Ok(rep)
}

/// Band-limited nonnegative profile, `0.25 (1 + cos x)(1 + cos y)`.
/// Exactly representable on any grid, so the spectral resolvent moves it
/// without truncation undershoot; the natural data for positivity runs.
pub fn cosine_bump(grid: Grid2D) -> Field {
    Field::from_fn(grid, |x, y| 0.25 * (1.0 + x.cos()) * (1.0 + y.cos()))
}

/// Weak maximum principle for the homogeneous tangent flow: nonnegative
/// initial data keeps the solution above a tiny negative floor for every
/// seed in the ensemble. Blown-up base runs are excluded and counted.
/// Initial data should be band limited (see [`cosine_bump`]); sharp or
/// under-resolved profiles pick up spectral truncation lobes.
pub fn weak_maximum_principle(
    fft: &Fft2,
    g: Nonlinearity,
    eps: f64,
    v0: &Field,
    seeds: &[u64],
    t_end: f64,
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[v0])?;
    if seeds.is_empty() {
        return Err(AnalysisError::Config("need at least one seed".into()));
    }
    if v0.min() < 0.0 {
        return Err(AnalysisError::Config("initial data must be nonnegative".into()));
    }
    let grid = fft.grid();
    let c = renorm_constant_grid(fft, eps)?;

    let mut rep = StudyReport::new("weak_maximum_principle");
    rep.param("g", g.name());
    rep.param("eps", eps);
    rep.param("n", grid.n());
    rep.param("t_end", t_end);
    rep.param("seeds", seeds.len());

    let runs: Result<Vec<(bool, f64)>, AnalysisError> = seeds
        .par_iter()
        .map(|&seed| {
            let xi = mollify(fft, &white_noise(grid, seed), eps)?;
            let dt = max_stable_dt(&xi);
            let cfg = PdeConfig::new(standard_initial(grid), eps, c, dt, t_end)?;
            let base = solve_gpam(fft, &cfg, g, &xi)?;
            if base.blowup().is_some() {
                return Ok((true, f64::INFINITY));
            }
            let v = solve_tangent_hom(fft, &cfg, g, &xi, &base, v0.clone())?;
            let floor = v
                .frames()
                .iter()
                .map(|f| f.min())
                .fold(f64::INFINITY, f64::min);
            Ok((false, floor))
        })
        .collect();
    let runs = runs?;
    let blown = runs.iter().filter(|r| r.0).count();
    let floor = runs
        .iter()
        .filter(|r| !r.0)
        .map(|r| r.1)
        .fold(f64::INFINITY, f64::min);
    rep.push(Metric::info("blowup_count", blown as f64));
    rep.push(Metric::at_least(
        "checked_seeds",
        (runs.len() - blown) as f64,
        1.0,
    ));
    rep.push(Metric::at_least("min_over_seeds", floor, -1e-8));
    Ok(rep)
}

/// Strong maximum principle for the homogeneous tangent flow: from
/// nonnegative plateau data supported in a small ball, the solution at
/// the final time must be strictly positive everywhere on the torus.
pub fn strong_maximum_principle_check(
    fft: &Fft2,
    g: Nonlinearity,
    eps: f64,
    xi_eps: &Field,
    v0: &Field,
    t_end: f64,
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[xi_eps, v0])?;
    let grid = fft.grid();
    let c = renorm_constant_grid(fft, eps)?;
    let dt = max_stable_dt(xi_eps);
    let cfg = PdeConfig::new(standard_initial(grid), eps, c, dt, t_end)?;

    let mut rep = StudyReport::new("strong_max_principle");
    rep.param("g", g.name());
    rep.param("eps", eps);
    rep.param("n", grid.n());
    rep.param("t_end", t_end);

    if v0.min() < 0.0 {
        return Err(AnalysisError::Config("plateau data must be nonnegative".into()));
    }
    rep.push(Metric::info("v0_mass", v0.integral()));

    let base = solve_gpam(fft, &cfg, g, xi_eps)?;
    let blow = if base.blowup().is_some() { 1.0 } else { 0.0 };
    rep.push(Metric::at_most("blowup_count", blow, 0.0));
    if base.blowup().is_some() {
        return Ok(rep);
    }
    let v = solve_tangent_hom(fft, &cfg, g, xi_eps, &base, v0.clone())?;
    let half = v.at_time(0.5 * t_end);
    rep.push(Metric::positive("v_min_half_time", half.min()));
    rep.push(Metric::positive("v_min_final", v.last().min()));
    rep.push(Metric::info("v_max_final", v.last().max()));
    Ok(rep)
}

/// Comparison bound for the tangent solution through the auxiliary
/// equation: `|v(t, x)|` is controlled by
/// `log(T / (T - t)) * sqrt(w(t, x)) * ||h||_{L^2}` where `w` solves the
/// auxiliary flow along the time-reversed base path. The largest observed
/// ratio is checked against the calibrated constant, the ratio must be
/// invariant under scaling of `h`, and `w` must stay nonnegative.
pub fn feynman_kac_bound_check(
    fft: &Fft2,
    g: Nonlinearity,
    eps: f64,
    xi_eps: &Field,
    h: &Field,
    t_probe: f64,
    t_final: f64,
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[xi_eps, h])?;
    if !(t_probe > 0.0 && t_probe < t_final) {
        return Err(AnalysisError::Config("need 0 < t_probe < t_final".into()));
    }
    let grid = fft.grid();
    let c = renorm_constant_grid(fft, eps)?;
    let dt = max_stable_dt(xi_eps);

    let mut rep = StudyReport::new("feynman_kac");
    rep.param("g", g.name());
    rep.param("eps", eps);
    rep.param("n", grid.n());
    rep.param("t_probe", t_probe);
    rep.param("t_final", t_final);

    let cfg_full = PdeConfig::new(standard_initial(grid), eps, c, dt, t_final)?
        .with_save(SaveRule::Stride(1));
    let base = solve_gpam(fft, &cfg_full, g, xi_eps)?;
    let blow = if base.blowup().is_some() { 1.0 } else { 0.0 };
    rep.push(Metric::at_most("blowup_count", blow, 0.0));
    if base.blowup().is_some() {
        return Ok(rep);
    }

    let cfg_probe = PdeConfig::new(standard_initial(grid), eps, c, base.dt(), t_probe)?;
    let v = solve_tangent(fft, &cfg_probe, g, xi_eps, h, &base)?;
    let w = solve_auxiliary_w(fft, &cfg_probe, g, xi_eps, &base.reversed())?;
    let w_t = w.last();
    rep.push(Metric::at_least("w_min", w_t.min(), -1e-8));

    let log_factor = (t_final / (t_final - t_probe)).ln();
    let h_l2 = h.l2();
    let n = grid.n();
    let mut max_ratio = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let denom = log_factor * w_t.get(i, j).max(0.0).sqrt() * h_l2;
            if denom > 1e-12 {
                max_ratio = max_ratio.max(v.last().get(i, j).abs() / denom);
            }
        }
    }
    rep.push(Metric::info("max_ratio", max_ratio));
    rep.push(Metric::at_most("max_ratio_bounded", max_ratio, 10.0));

    let mut h10 = h.clone();
    h10.scale(10.0);
    let v10 = solve_tangent(fft, &cfg_probe, g, xi_eps, &h10, &base)?;
    let mut max_ratio_10 = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let denom = log_factor * w_t.get(i, j).max(0.0).sqrt() * (10.0 * h_l2);
            if denom > 1e-12 {
                max_ratio_10 = max_ratio_10.max(v10.last().get(i, j).abs() / denom);
            }
        }
    }
    let drift = if max_ratio > 0.0 {
        (max_ratio_10 / max_ratio - 1.0).abs()
    } else {
        0.0
    };
    rep.push(Metric::at_most("ratio_scale_invariance", drift, 0.1));

    let zero = Field::zeros(grid);
    let v0 = solve_tangent(fft, &cfg_probe, g, xi_eps, &zero, &base)?;
    rep.push(Metric::at_most("zero_shift_tangent", v0.last().linf(), 0.0));
    Ok(rep)
}

/// Mollification convergence on a single frozen noise sample. The same
/// white noise is mollified at every scale in `eps_list` (ordered coarse
/// to fine), the equation is solved with a common step size, and the
/// successive gaps `d_k = ||u_k - u_{k+1}||_inf` are the Cauchy
/// statistics. Two things are asserted about them: monotone decrease
/// excluding the finest pair, and a total contraction factor
/// `d_last / d_first <= 0.7^{pairs-1}`. The factor is the load-bearing
/// half: coupled renormalized solutions contract roughly linearly in the
/// scale (measured factor about 0.55 per halving), while without the
/// constant the gaps plateau at the drift increment `c * log 2` per
/// halving and the sweep factor lands above 0.65 per step, so the bare
/// run fails the criterion on the same seed. Tangent gaps get the same
/// treatment. Distances between the renormalized rough-symbol
/// realizations are recorded as golden values and checked for
/// boundedness only: their theoretical Cauchy rate is `eps^theta` with
/// `theta` below `2 kappa = 0.1`, a few percent per halving, which a
/// single-sample sup statistic cannot resolve. The report also fits the
/// continuum renormalization constant against `log(1/eps)`.
pub fn epsilon_convergence_study(
    fft: &Fft2,
    g: Nonlinearity,
    seed: u64,
    eps_list: &[f64],
    h: &Field,
    t_end: f64,
    renormalized: bool,
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[h])?;
    if eps_list.len() < 3 {
        return Err(AnalysisError::Config("need at least three scales".into()));
    }
    for w in eps_list.windows(2) {
        if w[1] >= w[0] {
            return Err(AnalysisError::Config("scales must decrease".into()));
        }
    }
    let grid = fft.grid();
    let raw = white_noise(grid, seed);

    let mut rep = StudyReport::new("eps_convergence");
    rep.param("g", g.name());
    rep.param("n", grid.n());
    rep.param("seed", seed);
    rep.param("t_end", t_end);
    rep.param("renormalized", renormalized);

    let mut mollified = Vec::with_capacity(eps_list.len());
    let mut dt = f64::INFINITY;
    for &eps in eps_list {
        let xi = mollify(fft, &raw, eps)?;
        dt = dt.min(max_stable_dt(&xi));
        mollified.push((eps, xi));
    }

    let mut finals: Vec<Field> = Vec::with_capacity(eps_list.len());
    let mut tangent_finals: Vec<Field> = Vec::with_capacity(eps_list.len());
    let mut blowups = 0.0;
    for (eps, xi) in &mollified {
        let c = if renormalized {
            renorm_constant_grid(fft, *eps)?
        } else {
            0.0
        };
        rep.push(Metric::info(&format!("c_eps_{eps}"), c));
        let cfg = PdeConfig::new(standard_initial(grid), *eps, c, dt, t_end)?;
        let traj = solve_gpam(fft, &cfg, g, xi)?;
        if traj.blowup().is_some() {
            blowups += 1.0;
        }
        if renormalized && traj.blowup().is_none() {
            let v = solve_tangent(fft, &cfg, g, xi, h, &traj)?;
            tangent_finals.push(v.last().clone());
        }
        finals.push(traj.last().clone());
    }
    rep.push(Metric::at_most("blowup_count", blowups, 0.0));

    let u_gaps: Vec<f64> = finals
        .windows(2)
        .map(|w| w[0].zip_with(&w[1], |a, b| a - b).linf())
        .collect();
    push_cauchy_metrics(&mut rep, "u", &u_gaps);

    if renormalized && tangent_finals.len() == eps_list.len() {
        let v_gaps: Vec<f64> = tangent_finals
            .windows(2)
            .map(|w| w[0].zip_with(&w[1], |a, b| a - b).linf())
            .collect();
        push_cauchy_metrics(&mut rep, "v", &v_gaps);

        let params = default_params();
        let tau = Symbol::prod([Symbol::integ(Symbol::Xi), Symbol::Xi]);
        let levels = (grid.n().trailing_zeros() as usize).saturating_sub(4).min(3);
        let mut model_gaps = Vec::new();
        for w in mollified.windows(2) {
            let ma = canonical_model(fft, w[0].1.clone(), w[0].0, params)
                .renormalize(renorm_constant_grid(fft, w[0].0)?);
            let mb = canonical_model(fft, w[1].1.clone(), w[1].0, params)
                .renormalize(renorm_constant_grid(fft, w[1].0)?);
            let ca = ma.level_coefficients(&tau, levels)?;
            let cb = mb.level_coefficients(&tau, levels)?;
            let hom = tau.homogeneity(&params);
            let mut worst = 0.0_f64;
            for (lev, (va, vb)) in ca.iter().zip(&cb).enumerate() {
                let sup = va
                    .iter()
                    .zip(vb)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                worst = worst.max(2.0_f64.powf(lev as f64 * (hom + 1.0)) * sup);
            }
            model_gaps.push(worst);
        }
        let mut worst_gap = 0.0_f64;
        for (k, gap) in model_gaps.iter().enumerate() {
            rep.push(Metric::info(&format!("model_gap_{k}"), *gap));
            worst_gap = worst_gap.max(*gap);
        }
        rep.push(Metric::at_most("model_gap_bounded", worst_gap, 10.0));
    }

    let fit_eps: Vec<f64> = (2..=7).map(|k| 2.0_f64.powi(-k)).collect();
    let xs: Vec<f64> = fit_eps.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = fit_eps.iter().map(|&e| kernel::renorm_constant(e)).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    rep.push(Metric::info("renorm_log_slope", slope));
    rep.push(Metric::at_least("renorm_log_fit_r2", r2, 0.99));
    Ok(rep)
}

/// Law of the solution at one point over a seed ensemble. For the
/// constant reaction term started from zero the discrete solution is an
/// explicit Gaussian functional of the noise, so the empirical law is
/// tested against that exact law with a Kolmogorov-Smirnov statistic at
/// the 95 percent level. For other reaction terms the study reports
/// spread and the largest empirical atom.
#[allow(clippy::too_many_arguments)]
pub fn density_nondegeneracy(
    fft: &Fft2,
    g: Nonlinearity,
    eps: f64,
    u0: &Field,
    t: f64,
    x: (usize, usize),
    seeds: &[u64],
    dt: f64,
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[u0])?;
    if seeds.len() < 10 {
        return Err(AnalysisError::Config("need at least 10 seeds".into()));
    }
    let grid = fft.grid();
    let c = renorm_constant_grid(fft, eps)?;

    let mut rep = StudyReport::new("density");
    rep.param("g", g.name());
    rep.param("eps", eps);
    rep.param("n", grid.n());
    rep.param("t", t);
    rep.param("seeds", seeds.len());

    let cfg = PdeConfig::new(u0.clone(), eps, c, dt, t)?;
    let results: Vec<Result<(f64, bool), AnalysisError>> = seeds
        .par_iter()
        .map(|&seed| {
            let xi = mollify(fft, &white_noise(grid, seed), eps)?;
            let traj = solve_gpam(fft, &cfg, g, &xi)?;
            Ok((traj.last().get(x.0, x.1), traj.blowup().is_some()))
        })
        .collect();
    let mut samples = Vec::with_capacity(seeds.len());
    let mut blowups = 0.0;
    for r in results {
        let (val, blew) = r?;
        if blew {
            blowups += 1.0;
        } else {
            samples.push(val);
        }
    }
    rep.push(Metric::at_most("blowup_count", blowups, 0.0));
    if samples.len() < 10 {
        return Ok(rep);
    }

    let n_s = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n_s;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n_s - 1.0);
    rep.push(Metric::info("sample_mean", mean));
    rep.push(Metric::info("sample_std", var.sqrt()));
    rep.push(Metric::positive("spread", var.sqrt()));

    if g == Nonlinearity::One && u0.linf() == 0.0 {
        let sigma = exact_constant_source_std(fft, &cfg, eps, x)?;
        rep.push(Metric::info("exact_std", sigma));
        let ks = ks_normal(&mut samples, sigma);
        let ks_bound = 1.36 / n_s.sqrt();
        rep.push(Metric::at_most("ks_distance", ks, ks_bound));
    } else {
        let jump = max_jump(&mut samples);
        rep.push(Metric::at_most("max_ecdf_jump", jump, 3.0 / n_s));
    }
    Ok(rep)
}

/// Exact standard deviation of the discrete solution value at `x` for
/// the constant reaction term and zero initial data: the time stepping
/// is a linear filter of the mollified noise, so the representer of the
/// point evaluation is computed by pushing a unit impulse through the
/// mollifier and the closed-form filter
/// `(1 - (1 + dt |k|^2)^{-M}) / |k|^2`.
fn exact_constant_source_std(
    fft: &Fft2,
    cfg: &PdeConfig,
    eps: f64,
    x: (usize, usize),
) -> Result<f64, AnalysisError> {
    let grid = fft.grid();
    let steps = cfg.steps();
    let dt = cfg.dt_eff();
    let mut impulse = Field::zeros(grid);
    impulse.set(x.0, x.1, 1.0);
    let smoothed = mollify(fft, &impulse, eps)?;
    let filtered = fft.apply_multiplier(&smoothed, |k1, k2| {
        let k2sum = (k1 * k1 + k2 * k2) as f64;
        if k2sum == 0.0 {
            steps as f64 * dt
        } else {
            (1.0 - (1.0 + dt * k2sum).powi(-(steps as i32))) / k2sum
        }
    });
    let delta = grid.spacing();
    let sum_sq: f64 = filtered.as_slice().iter().map(|v| v * v).sum();
    Ok((sum_sq / (delta * delta)).sqrt())
}

/// Positivity of the sourced tangent solution in the constant direction
/// `h = 1` over a seed ensemble: on every seed that does not blow up the
/// value `v(t, x)` must be strictly positive. Reaction terms bounded
/// away from zero make the source strictly positive, which is the
/// mechanism behind nondegeneracy of the law.
pub fn tangent_positivity(
    fft: &Fft2,
    g: Nonlinearity,
    eps: f64,
    u0: &Field,
    t: f64,
    x: (usize, usize),
    seeds: &[u64],
    dt: f64,
) -> Result<StudyReport, AnalysisError> {
    check_same_grid(fft, &[u0])?;
    let grid = fft.grid();
    let c = renorm_constant_grid(fft, eps)?;

    let mut rep = StudyReport::new("tangent_positivity");
    rep.param("g", g.name());
    rep.param("eps", eps);
    rep.param("n", grid.n());
    rep.param("t", t);
    rep.param("seeds", seeds.len());

    let cfg = PdeConfig::new(u0.clone(), eps, c, dt, t)?;
    let ones = Field::constant(grid, 1.0);
    let results: Vec<Result<Option<f64>, AnalysisError>> = seeds
        .par_iter()
        .map(|&seed| {
            let xi = mollify(fft, &white_noise(grid, seed), eps)?;
            let traj = solve_gpam(fft, &cfg, g, &xi)?;
            if traj.blowup().is_some() {
                return Ok(None);
            }
            let v = solve_tangent(fft, &cfg, g, &xi, &ones, &traj)?;
            Ok(Some(v.last().get(x.0, x.1)))
        })
        .collect();
    let mut min_val = f64::INFINITY;
    let mut checked = 0.0;
    let mut blowups = 0.0;
    for r in results {
        match r? {
            Some(v) => {
                min_val = min_val.min(v);
                checked += 1.0;
            }
            None => blowups += 1.0,
        }
    }
    rep.push(Metric::info("blowup_count", blowups));
    rep.push(Metric::at_least("checked_seeds", checked, 1.0));
    if checked > 0.0 {
        rep.push(Metric::positive("min_tangent_value", min_val));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fft(n: usize) -> Fft2 {
        Fft2::new(Grid2D::new(n).unwrap())
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 0.5).collect();
        let (s, b, r2) = linear_fit(&xs, &ys);
        assert!((s - 3.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plateau_bump_is_flat_inside_and_zero_outside() {
        let grid = Grid2D::new(64).unwrap();
        let c = (32, 32);
        let b = plateau_bump(grid, c, 0.4, 0.9);
        assert_eq!(b.get(32, 32), 1.0);
        assert_eq!(b.get(0, 0), 0.0);
        assert!(b.min() >= 0.0 && b.max() <= 1.0);
        let r = 0.65;
        let i = 32 + (r / grid.spacing()) as usize;
        let v = b.get(i, 32);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn ks_statistic_accepts_true_gaussians_and_rejects_shifted_ones() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let mut good: Vec<f64> = (0..2000)
            .map(|_| {
                let u: f64 = rng.gen::<f64>().max(1e-12);
                let v: f64 = rng.gen();
                2.0 * (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
            })
            .collect();
        let ks = ks_normal(&mut good, 2.0);
        assert!(ks < 1.36 / (2000.0_f64).sqrt(), "ks={ks}");
        let mut bad: Vec<f64> = good.iter().map(|v| v + 1.0).collect();
        let ks_bad = ks_normal(&mut bad, 2.0);
        assert!(ks_bad > 1.36 / (2000.0_f64).sqrt());
    }

    #[test]
    fn gateaux_remainder_is_second_order_for_smooth_reaction() {
        let fft = fft(64);
        let grid = fft.grid();
        let xi = mollify(&fft, &white_noise(grid, 11), 0.25).unwrap();
        let h = standard_shift(grid);
        let deltas = [0.25, 0.125, 0.0625, 0.03125];
        let rep = gateaux_check(
            &fft,
            Nonlinearity::Sin,
            0.25,
            &xi,
            &h,
            &deltas,
            0.25,
            (5, 9),
        )
        .unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
        let order = rep.metric("fd_order").unwrap().value;
        assert!((1.8..=2.3).contains(&order), "order {order}");
    }

    #[test]
    fn gateaux_remainder_vanishes_for_affine_reaction() {
        let fft = fft(32);
        let grid = fft.grid();
        let xi = mollify(&fft, &white_noise(grid, 3), 0.5).unwrap();
        let h = standard_shift(grid);
        let rep = gateaux_check(
            &fft,
            Nonlinearity::One,
            0.5,
            &xi,
            &h,
            &[0.5, 0.25, 0.125],
            0.2,
            (1, 1),
        )
        .unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
        assert!(rep.metric("affine_remainder_sup").unwrap().value < 1e-12);
    }

    #[test]
    fn translation_identities_hold_on_a_small_grid() {
        let fft = fft(64);
        let grid = fft.grid();
        let xi = mollify(&fft, &white_noise(grid, 21), 0.25).unwrap();
        let h = Field::from_fn(grid, |x, y| 0.4 * (x + y).sin());
        let rep = translation_consistency(&fft, Nonlinearity::Sin, 0.25, &xi, &h).unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
    }

    #[test]
    fn heat_flow_keeps_a_quarter_on_growing_balls() {
        let fft = fft(128);
        let rep = heat_kernel_lower_bound(&fft, 0.5, &[1.0, 2.0, 4.0], 16).unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
    }

    #[test]
    fn plateau_data_spreads_to_strict_positivity() {
        let fft = fft(64);
        let grid = fft.grid();
        let xi = mollify(&fft, &white_noise(grid, 5), 0.25).unwrap();
        let v0 = plateau_bump(grid, (16, 48), 0.3, 0.8);
        let rep =
            strong_maximum_principle_check(&fft, Nonlinearity::Sin, 0.25, &xi, &v0, 1.0).unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
    }

    #[test]
    fn auxiliary_bound_controls_the_tangent_flow() {
        let fft = fft(64);
        let grid = fft.grid();
        let xi = mollify(&fft, &white_noise(grid, 17), 0.25).unwrap();
        let h = standard_shift(grid);
        let rep =
            feynman_kac_bound_check(&fft, Nonlinearity::Sin, 0.25, &xi, &h, 0.3, 0.5).unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
    }

    #[test]
    fn renormalized_scales_contract_and_bare_scales_do_not() {
        let fft = fft(512);
        let grid = fft.grid();
        let h = standard_shift(grid);
        let eps = [0.25, 0.125, 0.0625, 0.03125];
        let on = epsilon_convergence_study(&fft, Nonlinearity::Sin, 40, &eps, &h, 1.0, true)
            .unwrap();
        assert!(on.pass(), "{}", on.render_lines());
        let off = epsilon_convergence_study(&fft, Nonlinearity::Sin, 40, &eps, &h, 1.0, false)
            .unwrap();
        assert!(!off.pass(), "{}", off.render_lines());
        let factor = off.metric("u_contraction").unwrap();
        assert!(factor.value > factor.bound.unwrap());
    }

    #[test]
    fn constant_source_law_matches_the_exact_gaussian() {
        let fft = fft(32);
        let grid = fft.grid();
        let u0 = Field::zeros(grid);
        let seeds: Vec<u64> = (0..1000).collect();
        let rep = density_nondegeneracy(
            &fft,
            Nonlinearity::One,
            0.5,
            &u0,
            0.25,
            (7, 20),
            &seeds,
            1e-3,
        )
        .unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
        let ks = rep.metric("ks_distance").unwrap();
        assert!(ks.value < ks.bound.unwrap());
    }

    #[test]
    fn lifted_reaction_keeps_the_tangent_value_positive() {
        let fft = fft(32);
        let grid = fft.grid();
        let u0 = Field::zeros(grid);
        let seeds: Vec<u64> = (0..20).collect();
        let rep = tangent_positivity(
            &fft,
            Nonlinearity::SinPlus2,
            0.5,
            &u0,
            0.25,
            (9, 3),
            &seeds,
            2e-3,
        )
        .unwrap();
        assert!(rep.pass(), "{}", rep.render_lines());
    }

    #[test]
    fn reports_serialize_with_bounds_and_directions() {
        let mut rep = StudyReport::new("demo");
        rep.param("n", 64);
        rep.push(Metric::at_most("err", 0.5, 1.0));
        rep.push(Metric::info("note", 2.0));
        let json = rep.to_json();
        assert!(json.contains("\"study\": \"demo\""));
        assert!(json.contains("\"at_most\""));
        assert!(rep.pass());
        rep.push(Metric::positive("must_be_positive", -1.0));
        assert!(!rep.pass());
    }
}
