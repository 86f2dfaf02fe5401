//! Semi-implicit spectral time stepping for the renormalized equations.
//!
//! Every equation here is integrated by the same first-order IMEX scheme:
//! the heat part is inverted exactly in Fourier space, the reaction part
//! is explicit,
//!
//! `state_{m+1} = (I - dt Lap)^{-1} (state_m + dt * reaction(state_m))`.
//!
//! The linear part is unconditionally stable; the step size is limited by
//! the noise product through [`max_stable_dt`]. The tangent solvers
//! re-integrate the base trajectory step for step from its initial frame,
//! so the frozen coefficients match the original run bitwise without
//! storing dense frames.

use crate::fields::{Fft2, Field, FieldError};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("trajectory does not match the configuration: {0}")]
    TrajectoryMismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Reaction nonlinearity g with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nonlinearity {
    Zero,
    One,
    Sin,
    Cos,
    SinPlus2,
    /// g(u) = 1 / (1 + u^2)
    Rational,
}

impl Nonlinearity {
    pub fn g(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::One => 1.0,
            Nonlinearity::Sin => u.sin(),
            Nonlinearity::Cos => u.cos(),
            Nonlinearity::SinPlus2 => u.sin() + 2.0,
            Nonlinearity::Rational => 1.0 / (1.0 + u * u),
        }
    }

    pub fn dg(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Zero | Nonlinearity::One => 0.0,
            Nonlinearity::Sin | Nonlinearity::SinPlus2 => u.cos(),
            Nonlinearity::Cos => -u.sin(),
            Nonlinearity::Rational => {
                let d = 1.0 + u * u;
                -2.0 * u / (d * d)
            }
        }
    }

    pub fn d2g(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Zero | Nonlinearity::One => 0.0,
            Nonlinearity::Sin | Nonlinearity::SinPlus2 => -u.sin(),
            Nonlinearity::Cos => -u.cos(),
            Nonlinearity::Rational => {
                let d = 1.0 + u * u;
                (6.0 * u * u - 2.0) / (d * d * d)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Zero => "0",
            Nonlinearity::One => "1",
            Nonlinearity::Sin => "sin",
            Nonlinearity::Cos => "cos",
            Nonlinearity::SinPlus2 => "sin+2",
            Nonlinearity::Rational => "1/(1+u^2)",
        }
    }
}

impl core::str::FromStr for Nonlinearity {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, SolverError> {
        match s {
            "0" | "zero" => Ok(Nonlinearity::Zero),
            "1" | "one" => Ok(Nonlinearity::One),
            "sin" => Ok(Nonlinearity::Sin),
            "cos" => Ok(Nonlinearity::Cos),
            "sin+2" | "sin2" => Ok(Nonlinearity::SinPlus2),
            "rational" | "1/(1+u^2)" => Ok(Nonlinearity::Rational),
            other => Err(SolverError::Config(format!("unknown nonlinearity {other:?}"))),
        }
    }
}

impl core::fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which time steps a run keeps in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaveRule {
    /// Initial frame, final frame, and the dyadic step indices in between.
    Dyadic,
    /// Every k-th step plus the final frame.
    Stride(usize),
}

/// Noise-product CFL rule: dt = 0.1 / max(1, sup |xi|).
pub fn max_stable_dt(xi: &Field) -> f64 {
    0.1 / xi.linf().max(1.0)
}

#[derive(Clone, Debug)]
pub struct PdeConfig {
    pub eps: f64,
    /// Renormalization constant subtracted through the reaction term.
    pub c: f64,
    /// Requested step cap; the run uses t_end / ceil(t_end / dt).
    pub dt: f64,
    pub t_end: f64,
    pub u0: Field,
    pub blowup_threshold: f64,
    pub save: SaveRule,
}

impl PdeConfig {
    pub fn new(u0: Field, eps: f64, c: f64, dt: f64, t_end: f64) -> Result<PdeConfig, SolverError> {
        let cfg = PdeConfig {
            eps,
            c,
            dt,
            t_end,
            u0,
            blowup_threshold: 1e6,
            save: SaveRule::Dyadic,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_save(mut self, save: SaveRule) -> PdeConfig {
        self.save = save;
        self
    }

    pub fn with_blowup_threshold(mut self, thr: f64) -> PdeConfig {
        self.blowup_threshold = thr;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SolverError::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(SolverError::Config(format!(
                "t_end = {} must be positive",
                self.t_end
            )));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(SolverError::Config("blow-up threshold must be positive".into()));
        }
        if !self.u0.is_finite() {
            return Err(SolverError::Config("initial data contains non-finite values".into()));
        }
        Ok(())
    }

    /// Number of steps actually taken; the effective step is `t_end / steps`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt - 1e-12).ceil() as usize).max(1)
    }

    pub fn dt_eff(&self) -> f64 {
        self.t_end / self.steps() as f64
    }
}

/// A completed run: saved frames at increasing times, plus the blow-up
/// time if the threshold was crossed (the offending frame is kept last).
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    frames: Vec<Field>,
    dt: f64,
    blowup: Option<f64>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn blowup(&self) -> Option<f64> {
        self.blowup
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("a trajectory always has frames")
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("a trajectory always has frames")
    }

    /// Frame at time t, linearly interpolated between saved frames and
    /// clamped to the recorded range.
    pub fn at_time(&self, t: f64) -> Field {
        if t <= self.times[0] {
            return self.frames[0].clone();
        }
        if t >= self.last_time() {
            return self.last().clone();
        }
        let hi = self.times.partition_point(|&s| s < t);
        let (t0, t1) = (self.times[hi - 1], self.times[hi]);
        if t == t1 {
            return self.frames[hi].clone();
        }
        let w = (t - t0) / (t1 - t0);
        let mut out = self.frames[hi - 1].clone();
        out.scale(1.0 - w);
        out.axpy(w, &self.frames[hi]);
        out
    }

    /// Same frames traversed backwards, with time measured from the end;
    /// feeds the auxiliary equation, which runs along the reversed base
    /// solution.
    pub fn reversed(&self) -> Trajectory {
        let total = self.last_time();
        let times = self.times.iter().rev().map(|t| total - t).collect();
        let frames = self.frames.iter().rev().cloned().collect();
        Trajectory {
            times,
            frames,
            dt: self.dt,
            blowup: None,
        }
    }
}

struct Recorder {
    idx: Vec<usize>,
    at: usize,
    times: Vec<f64>,
    frames: Vec<Field>,
}

impl Recorder {
    fn new(m_total: usize, rule: SaveRule) -> Recorder {
        let mut idx: Vec<usize> = match rule {
            SaveRule::Dyadic => {
                let mut v = vec![0usize];
                let mut j = 0;
                while (m_total >> j) > 0 {
                    v.push(m_total >> j);
                    j += 1;
                }
                v
            }
            SaveRule::Stride(k) => {
                let k = k.max(1);
                let mut v: Vec<usize> = (0..=m_total).step_by(k).collect();
                v.push(m_total);
                v
            }
        };
        idx.sort_unstable();
        idx.dedup();
        Recorder {
            idx,
            at: 0,
            times: Vec::new(),
            frames: Vec::new(),
        }
    }

    fn maybe(&mut self, m: usize, t: f64, f: &Field) {
        if self.at < self.idx.len() && self.idx[self.at] == m {
            self.times.push(t);
            self.frames.push(f.clone());
            self.at += 1;
        }
    }

    /// Records the frame regardless of the save rule (blow-up frame).
    fn force(&mut self, t: f64, f: &Field) {
        if self.times.last() != Some(&t) {
            self.times.push(t);
            self.frames.push(f.clone());
        }
    }

    fn finish(self, dt: f64, blowup: Option<f64>) -> Trajectory {
        Trajectory {
            times: self.times,
            frames: self.frames,
            dt,
            blowup,
        }
    }

}

/// One implicit heat step: divides each Fourier mode by `1 + dt |k|^2`.
pub fn implicit_heat(fft: &Fft2, f: &Field, dt: f64) -> Field {
    fft.apply_multiplier(f, |a, b| 1.0 / (1.0 + dt * ((a * a + b * b) as f64)))
}

/// Exact mild solution of the constant-coefficient additive equation
/// `du = Lap u + force`, i.e. `e^{t Lap} u0 + int_0^t e^{(t-s) Lap} force ds`,
/// evaluated mode by mode.
pub fn duhamel_additive(fft: &Fft2, u0: &Field, force: &Field, t: f64) -> Field {
    let mut out = fft.heat_semigroup(u0, t);
    let forced = fft.apply_multiplier(force, |a, b| {
        let k2 = (a * a + b * b) as f64;
        if k2 == 0.0 {
            t
        } else {
            (1.0 - (-k2 * t).exp()) / k2
        }
    });
    out.axpy(1.0, &forced);
    out
}

fn check_grids(cfg: &PdeConfig, others: &[&Field]) -> Result<(), SolverError> {
    let want = cfg.u0.n();
    for f in others {
        if f.n() != want {
            return Err(SolverError::Field(FieldError::GridMismatch(want, f.n())));
        }
    }
    Ok(())
}

fn exploded(f: &Field, threshold: f64) -> bool {
    !f.is_finite() || f.linf() > threshold
}

/// Renormalized reaction `g(u) (xi - C g'(u))`.
fn gpam_reaction(g: Nonlinearity, u: &Field, xi: &Field, c: f64) -> Field {
    u.zip_with(xi, |uv, xv| g.g(uv) * (xv - c * g.dg(uv)))
}

/// Renormalized tangent potential `g'(u) xi - C ((g'(u))^2 + g''(u) g(u))`.
fn tangent_potential(g: Nonlinearity, u: &Field, xi: &Field, c: f64) -> Field {
    u.zip_with(xi, |uv, xv| {
        let d = g.dg(uv);
        d * xv - c * (d * d + g.d2g(uv) * g.g(uv))
    })
}

/// Integrates the renormalized equation
/// `du = Lap u + g(u) (xi - C g'(u))` from `cfg.u0`.
pub fn solve_gpam(
    fft: &Fft2,
    cfg: &PdeConfig,
    g: Nonlinearity,
    xi: &Field,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    check_grids(cfg, &[xi])?;
    let m_total = cfg.steps();
    let dt = cfg.dt_eff();
    let mut rec = Recorder::new(m_total, cfg.save);
    let mut u = cfg.u0.clone();
    if exploded(&u, cfg.blowup_threshold) {
        rec.force(0.0, &u);
        return Ok(rec.finish(dt, Some(0.0)));
    }
    rec.maybe(0, 0.0, &u);
    for m in 0..m_total {
        let mut work = u.clone();
        work.axpy(dt, &gpam_reaction(g, &u, xi, cfg.c));
        u = implicit_heat(fft, &work, dt);
        let t = (m + 1) as f64 * dt;
        if exploded(&u, cfg.blowup_threshold) {
            rec.force(t, &u);
            return Ok(rec.finish(dt, Some(t)));
        }
        rec.maybe(m + 1, t, &u);
    }
    Ok(rec.finish(dt, None))
}

/// Same equation driven by the shifted noise `xi + h`; mirrors the
/// translation pipeline, so given the same config the result is bitwise
/// the plain solve of the pre-shifted field.
pub fn solve_gpam_shifted(
    fft: &Fft2,
    cfg: &PdeConfig,
    g: Nonlinearity,
    xi: &Field,
    h: &Field,
) -> Result<Trajectory, SolverError> {
    check_grids(cfg, &[xi, h])?;
    let mut shifted = xi.clone();
    shifted.axpy(1.0, h);
    solve_gpam(fft, cfg, g, &shifted)
}

/// Shared driver for the linear equations along a frozen base trajectory:
/// `dv = Lap v + pot(u_m) v + src(u_m)`. The base path is re-integrated
/// from the trajectory's first frame so it matches the original run
/// bitwise; saved frames of `u_traj` are checked on the way.
fn solve_linear_along(
    fft: &Fft2,
    cfg: &PdeConfig,
    g: Nonlinearity,
    xi: &Field,
    u_traj: &Trajectory,
    v0: Field,
    src: impl Fn(&Field) -> Option<Field>,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    check_grids(cfg, &[xi, &v0])?;
    if u_traj.frames().is_empty() {
        return Err(SolverError::TrajectoryMismatch("empty base trajectory".into()));
    }
    check_grids(cfg, &[&u_traj.frames()[0]])?;
    let t_stop = match u_traj.blowup() {
        Some(tb) => tb.min(cfg.t_end),
        None => {
            if cfg.t_end > u_traj.last_time() + 1e-12 {
                return Err(SolverError::TrajectoryMismatch(format!(
                    "base trajectory ends at {} but t_end is {}",
                    u_traj.last_time(),
                    cfg.t_end
                )));
            }
            cfg.t_end
        }
    };
    let dt = u_traj.dt();
    if !(dt > 0.0) {
        return Err(SolverError::TrajectoryMismatch("base trajectory has no step".into()));
    }
    let m_total = ((t_stop / dt) + 0.5).floor() as usize;
    if m_total == 0 {
        return Err(SolverError::Config("horizon shorter than one step".into()));
    }

    let mut rec = Recorder::new(m_total, cfg.save);
    let mut u = u_traj.frames()[0].clone();
    let mut v = v0;
    if exploded(&v, cfg.blowup_threshold) {
        rec.force(0.0, &v);
        return Ok(rec.finish(dt, Some(0.0)));
    }
    rec.maybe(0, 0.0, &v);
    for m in 0..m_total {
        let pot = tangent_potential(g, &u, xi, cfg.c);
        let mut work = v.clone();
        work.axpy(dt, &v.zip_with(&pot, |a, b| a * b));
        if let Some(s) = src(&u) {
            work.axpy(dt, &s);
        }
        v = implicit_heat(fft, &work, dt);

        let mut uw = u.clone();
        uw.axpy(dt, &gpam_reaction(g, &u, xi, cfg.c));
        u = implicit_heat(fft, &uw, dt);

        let t = (m + 1) as f64 * dt;
        if exploded(&v, cfg.blowup_threshold) {
            rec.force(t, &v);
            return Ok(rec.finish(dt, Some(t)));
        }
        rec.maybe(m + 1, t, &v);
    }
    Ok(rec.finish(dt, None))
}

/// Tangent equation in direction h along a frozen base solution:
/// `dv = Lap v + g(u) h + v (g'(u) xi - C ((g'(u))^2 + g''(u) g(u)))`,
/// v(0) = 0.
pub fn solve_tangent(
    fft: &Fft2,
    cfg: &PdeConfig,
    g: Nonlinearity,
    xi: &Field,
    h: &Field,
    u_traj: &Trajectory,
) -> Result<Trajectory, SolverError> {
    check_grids(cfg, &[h])?;
    let v0 = Field::zeros(cfg.u0.grid());
    solve_linear_along(fft, cfg, g, xi, u_traj, v0, |u| {
        Some(u.zip_with(h, |uv, hv| g.g(uv) * hv))
    })
}

/// Homogeneous version: no source, initial data v0.
pub fn solve_tangent_hom(
    fft: &Fft2,
    cfg: &PdeConfig,
    g: Nonlinearity,
    xi: &Field,
    u_traj: &Trajectory,
    v0: Field,
) -> Result<Trajectory, SolverError> {
    solve_linear_along(fft, cfg, g, xi, u_traj, v0, |_| None)
}

/// Auxiliary comparison equation along the reversed base solution:
/// `dw = Lap w + g(u_rev)^2 + 2 w (g'(u_rev) xi - C ((g'(u_rev))^2 + g''(u_rev) g(u_rev)))`,
/// w(0) = 0. The reversed trajectory is sampled by linear interpolation
/// between its saved frames.
pub fn solve_auxiliary_w(
    fft: &Fft2,
    cfg: &PdeConfig,
    g: Nonlinearity,
    xi: &Field,
    u_rev: &Trajectory,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    check_grids(cfg, &[xi])?;
    if u_rev.frames().is_empty() {
        return Err(SolverError::TrajectoryMismatch("empty base trajectory".into()));
    }
    check_grids(cfg, &[&u_rev.frames()[0]])?;
    if cfg.t_end > u_rev.last_time() + 1e-12 {
        return Err(SolverError::TrajectoryMismatch(format!(
            "reversed trajectory covers {} but t_end is {}",
            u_rev.last_time(),
            cfg.t_end
        )));
    }
    let m_total = cfg.steps();
    let dt = cfg.dt_eff();
    let mut rec = Recorder::new(m_total, cfg.save);
    let mut w = Field::zeros(cfg.u0.grid());
    rec.maybe(0, 0.0, &w);
    for m in 0..m_total {
        let t = m as f64 * dt;
        let u = u_rev.at_time(t);
        let pot = tangent_potential(g, &u, xi, cfg.c);
        let mut work = w.clone();
        work.axpy(2.0 * dt, &w.zip_with(&pot, |a, b| a * b));
        work.axpy(dt, &u.map(|uv| g.g(uv) * g.g(uv)));
        w = implicit_heat(fft, &work, dt);
        let t1 = (m + 1) as f64 * dt;
        if exploded(&w, cfg.blowup_threshold) {
            rec.force(t1, &w);
            return Ok(rec.finish(dt, Some(t1)));
        }
        rec.maybe(m + 1, t1, &w);
    }
    Ok(rec.finish(dt, None))
}
