//! Concrete admissible models on the torus grid.
//!
//! A model holds the handful of base fields (the smooth noise, its kernel
//! convolution, and optionally a shift channel) and realizes every basis
//! symbol lazily from the algebraic recipe, so memory stays `O(n^2)` while
//! the realization `Pi_x tau` is available for every base point `x`.
//!
//! Polynomial symbols use plain coordinate differences, never wrapped, so
//! the reexpansion identity `Pi_x Gamma_xy = Pi_y` holds exactly on the
//! grid; the wavelet norm scan treats the coordinate fields in the same
//! chart, which is the documented approximation at coarse levels.

use gpam_algebra::{
    enumerate_basis, gamma_matrix, renorm::renorm_target, translate::translate_symbol, Basis,
    Character, GammaMatrix, Structure, StructureParams, Symbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::fields::{
    mollifier_with, mollify, white_noise, Fft2, Field, FieldError, Grid2D,
};
use crate::kernel::Green;
use crate::wavelets::{Dwt2, WaveletError};

/// Number of coarse pyramid bands skipped by the norm scan. On the
/// 2pi-torus the top three bands have lattice spacing above one radian,
/// i.e. test-function scale outside (0, 1], so the dyadic scan anchors
/// its level 0 at spacing `2pi / 8`, the first unit-or-smaller scale.
pub const SCALE_SKIP: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("field lives on a {found}-grid, model on a {want}-grid")]
    GridMismatch { want: usize, found: usize },
    #[error("operation needs a plain noise-only model")]
    NotBaseModel,
    #[error("symbol {0} is not realizable in this model")]
    Unrealizable(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// Canonical or renormalized model driven by the noise alone.
    Plain,
    /// Extension: the shift channel is realized as its own symbol.
    Extended,
    /// Translation: evaluated by expanding symbols through the shift map
    /// and realizing the expansion in the underlying extended model.
    Translated,
}

/// An admissible model: base fields plus the renormalization constant.
#[derive(Clone)]
pub struct Model {
    kind: Kind,
    params: StructureParams,
    basis: Basis,
    grid: Grid2D,
    eps: f64,
    c: f64,
    xi: Field,
    kxi: Field,
    h: Option<Field>,
    nh: Option<Field>,
}

/// Canonical model of a smooth (mollified) noise realization; the constant
/// starts at zero.
pub fn canonical_model(fft: &Fft2, xi: Field, eps: f64, params: StructureParams) -> Model {
    let kxi = Green::get().convolve(fft, &xi);
    Model {
        kind: Kind::Plain,
        basis: enumerate_basis(Structure::Base, &params),
        params,
        grid: xi.grid(),
        eps,
        c: 0.0,
        xi,
        kxi,
        h: None,
        nh: None,
    }
}

/// Convenience constructor: sample, mollify and build in one step.
pub fn canonical_model_from_seed(
    fft: &Fft2,
    seed: u64,
    eps: f64,
    params: StructureParams,
) -> Result<Model, ModelError> {
    let xi = mollify(fft, &white_noise(fft.grid(), seed), eps)?;
    Ok(canonical_model(fft, xi, eps, params))
}

impl Model {
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn structure(&self) -> Structure {
        match self.kind {
            Kind::Extended => Structure::Extended,
            _ => Structure::Base,
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn params(&self) -> &StructureParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn noise(&self) -> &Field {
        &self.xi
    }

    pub fn kernel_noise(&self) -> &Field {
        &self.kxi
    }

    pub fn shift(&self) -> Option<&Field> {
        self.h.as_ref()
    }

    /// Renormalization: only the realization of the noise-square symbol
    /// changes, by the added constant; composing adds constants.
    pub fn renormalize(&self, c: f64) -> Model {
        let mut m = self.clone();
        m.c += c;
        m
    }

    /// Extension by a shift field: the second channel becomes a symbol of
    /// the enlarged structure, realized base-point free.
    pub fn extend(&self, fft: &Fft2, h: Field) -> Result<Model, ModelError> {
        self.check_shift(&h)?;
        let nh = Green::get().convolve(fft, &h);
        let mut m = self.clone();
        m.kind = Kind::Extended;
        m.basis = enumerate_basis(Structure::Extended, &self.params);
        m.h = Some(h);
        m.nh = Some(nh);
        Ok(m)
    }

    /// Translation by a shift field: the model of the shifted noise,
    /// evaluated through the extension.
    pub fn translate(&self, fft: &Fft2, h: Field) -> Result<Model, ModelError> {
        self.check_shift(&h)?;
        let nh = Green::get().convolve(fft, &h);
        let mut m = self.clone();
        m.kind = Kind::Translated;
        m.h = Some(h);
        m.nh = Some(nh);
        Ok(m)
    }

    fn check_shift(&self, h: &Field) -> Result<(), ModelError> {
        if self.kind != Kind::Plain {
            return Err(ModelError::NotBaseModel);
        }
        if h.n() != self.grid.n() {
            return Err(ModelError::GridMismatch {
                want: self.grid.n(),
                found: h.n(),
            });
        }
        Ok(())
    }

    /// The realization `Pi_x tau` as a grid field in `y`.
    pub fn eval_pi(&self, x: (usize, usize), tau: &Symbol) -> Result<Field, ModelError> {
        if self.kind == Kind::Translated {
            let mut out = Field::zeros(self.grid);
            for (s, c) in translate_symbol(tau) {
                let w = *c.numer() as f64 / *c.denom() as f64;
                out.axpy(w, &self.eval_pi_direct(x, &s)?);
            }
            return Ok(out);
        }
        self.eval_pi_direct(x, tau)
    }

    fn eval_pi_direct(&self, x: (usize, usize), tau: &Symbol) -> Result<Field, ModelError> {
        let mut out = match tau {
            Symbol::Prod(fs) => {
                let mut acc = self.factor(x, &fs[0])?;
                for f in &fs[1..] {
                    acc = acc.zip_with(&self.factor(x, f)?, |a, b| a * b);
                }
                acc
            }
            other => self.factor(x, other)?,
        };
        if *tau == renorm_target() && self.c != 0.0 {
            let c = self.c;
            out = out.map(|v| v - c);
        }
        Ok(out)
    }

    fn factor(&self, x: (usize, usize), s: &Symbol) -> Result<Field, ModelError> {
        match s {
            Symbol::One => Ok(Field::constant(self.grid, 1.0)),
            Symbol::Xi => Ok(self.xi.clone()),
            Symbol::H => self
                .h
                .clone()
                .ok_or_else(|| ModelError::Unrealizable(alloc_name(s))),
            Symbol::X { axis, power } => {
                let x0 = self.grid.coord(if *axis == 1 { x.0 } else { x.1 });
                let p = *power as i32;
                let horizontal = *axis == 2;
                Ok(Field::from_fn(self.grid, |a, b| {
                    let y = if horizontal { b } else { a };
                    (y - x0).powi(p)
                }))
            }
            Symbol::Integ(inner) => {
                let f = match inner.as_ref() {
                    Symbol::Xi => &self.kxi,
                    Symbol::H => self
                        .nh
                        .as_ref()
                        .ok_or_else(|| ModelError::Unrealizable(alloc_name(s)))?,
                    _ => return Err(ModelError::Unrealizable(alloc_name(s))),
                };
                let at_x = f.get(x.0, x.1);
                Ok(f.map(|v| v - at_x))
            }
            Symbol::Prod(_) => Err(ModelError::Unrealizable(alloc_name(s))),
        }
    }

    /// Character of the base point: values of the integration labels and
    /// the (negated) coordinates.
    pub fn f_char(&self, x: (usize, usize)) -> Character {
        let j_xi = match self.kind {
            Kind::Translated => {
                -(self.kxi.get(x.0, x.1) + self.nh.as_ref().expect("shift").get(x.0, x.1))
            }
            _ => -self.kxi.get(x.0, x.1),
        };
        let j_h = match self.kind {
            Kind::Extended => -self.nh.as_ref().expect("shift").get(x.0, x.1),
            _ => 0.0,
        };
        Character::new(j_xi, j_h, -self.grid.coord(x.0), -self.grid.coord(x.1))
    }

    /// Reexpansion matrix between two base points.
    pub fn gamma(&self, x: (usize, usize), y: (usize, usize)) -> GammaMatrix {
        let f = self.f_char(x).invert().compose(&self.f_char(y));
        gamma_matrix(&f, &self.basis)
    }

    /// Worst grid sup error of `Pi_x Gamma_xy tau - Pi_y tau` over sampled
    /// base-point pairs and every basis symbol.
    pub fn admissibility_error(&self, pairs: usize, seed: u64) -> Result<f64, ModelError> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let x = (rng.gen_range(0..n), rng.gen_range(0..n));
            let y = (rng.gen_range(0..n), rng.gen_range(0..n));
            let gm = self.gamma(x, y);
            let at_x: Vec<Field> = self
                .basis
                .symbols()
                .iter()
                .map(|s| self.eval_pi(x, s))
                .collect::<Result<_, _>>()?;
            for (col, tau) in self.basis.symbols().iter().enumerate() {
                let mut lhs = Field::zeros(self.grid);
                for (row, px) in at_x.iter().enumerate() {
                    let w = gm.get(row, col);
                    if w != 0.0 {
                        lhs.axpy(w, px);
                    }
                }
                let rhs = self.eval_pi(y, tau)?;
                let diff = lhs
                    .as_slice()
                    .iter()
                    .zip(rhs.as_slice())
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                worst = worst.max(diff);
            }
        }
        Ok(worst)
    }

    /// Sup over grid points of `|Pi_x tau - other's Pi_x tau|` for every
    /// symbol of the (smaller) common basis, at sampled base points.
    pub fn max_realization_diff(
        &self,
        other: &Model,
        points: usize,
        seed: u64,
    ) -> Result<f64, ModelError> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n = self.grid.n();
        let symbols = if self.basis.len() <= other.basis.len() {
            self.basis.symbols()
        } else {
            other.basis.symbols()
        };
        let mut worst = 0.0f64;
        for _ in 0..points {
            let x = (rng.gen_range(0..n), rng.gen_range(0..n));
            for tau in symbols {
                let a = self.eval_pi(x, tau)?;
                let b = other.eval_pi(x, tau)?;
                let d = a
                    .as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs()));
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// L2-normalized wavelet coefficients `<Pi_x tau, psi^n_x>` for dyadic
    /// levels `n = 0..=max_level`, with the wavelet's own lattice point as
    /// the base point x. Level n uses the pyramid band whose lattice spacing
    /// is `2pi * 2^-(n + SCALE_SKIP)`, about `2^-n`, so every scanned test
    /// function has scale in (0, 1] and level 0 already carries a populated
    /// lattice of positions.
    pub fn level_coefficients(
        &self,
        tau: &Symbol,
        max_level: usize,
    ) -> Result<Vec<Vec<f64>>, ModelError> {
        let n = self.grid.n();
        let j = n.trailing_zeros() as usize;
        if max_level + SCALE_SKIP + 1 > j {
            return Err(ModelError::Wavelet(WaveletError::BadDepth {
                n,
                depth: j,
            }));
        }
        let parts = self.decompose(tau)?;
        let dwt = Dwt2::full(self.grid);
        let analyzed: Vec<(Option<Field>, crate::wavelets::Coeffs2)> = parts
            .into_iter()
            .map(|(scalar, field)| (scalar, dwt.analyze(&field)))
            .collect();
        let delta = self.grid.spacing();
        let mut out = Vec::with_capacity(max_level + 1);
        for lev in 0..=max_level {
            let ell = j - SCALE_SKIP - lev;
            let side = n >> ell;
            let peaks = [
                dwt.band_peak(ell, 0),
                dwt.band_peak(ell, 1),
                dwt.band_peak(ell, 2),
            ];
            let mut vals = Vec::with_capacity(3 * side * side);
            for bi in 0..side {
                for bj in 0..side {
                    for band in 0..3 {
                        let cx = ((bi << ell) + peaks[band].0) & (n - 1);
                        let cy = ((bj << ell) + peaks[band].1) & (n - 1);
                        let mut v = 0.0;
                        for (scalar, coeffs) in &analyzed {
                            let c = coeffs.detail(ell)[band][bi * side + bj];
                            v += match scalar {
                                Some(s) => -s.get(cx, cy) * c,
                                None => c,
                            };
                        }
                        vals.push(delta * v);
                    }
                }
            }
            out.push(vals);
        }
        Ok(out)
    }

    /// Scale-weighted sup statistics `s_m = 2^{m(|tau| + d/2)} sup |coeff|`
    /// per level; bounded `s_m` across `m` is the testable model bound.
    pub fn measure_model_norm(
        &self,
        tau: &Symbol,
        max_level: usize,
    ) -> Result<Vec<f64>, ModelError> {
        let hom = tau.homogeneity(&self.params);
        let coeffs = self.level_coefficients(tau, max_level)?;
        Ok(weighted_sups(&coeffs, hom))
    }

    /// Splits `Pi_x tau(y)` into terms that are either base-point free or
    /// a base-point scalar times a fixed field:
    /// `Pi_x tau = sum_k [B_k(y)  or  -S_k(x) B_k(y)]`.
    fn decompose(&self, tau: &Symbol) -> Result<Vec<(Option<Field>, Field)>, ModelError> {
        if self.kind == Kind::Translated {
            let mut parts = Vec::new();
            for (s, c) in translate_symbol(tau) {
                let w = *c.numer() as f64 / *c.denom() as f64;
                for (scalar, mut field) in self.decompose_direct(&s)? {
                    field.scale(w);
                    parts.push((scalar, field));
                }
            }
            return Ok(parts);
        }
        self.decompose_direct(tau)
    }

    fn decompose_direct(&self, tau: &Symbol) -> Result<Vec<(Option<Field>, Field)>, ModelError> {
        let factors: &[Symbol] = match tau {
            Symbol::Prod(fs) => fs,
            other => core::slice::from_ref(other),
        };
        let mut plain = Field::constant(self.grid, 1.0);
        let mut pivot: Option<&Symbol> = None;
        for f in factors {
            match f {
                Symbol::One => {}
                Symbol::Xi => plain = plain.zip_with(&self.xi, |a, b| a * b),
                Symbol::H => {
                    let h = self
                        .h
                        .as_ref()
                        .ok_or_else(|| ModelError::Unrealizable(alloc_name(tau)))?;
                    plain = plain.zip_with(h, |a, b| a * b);
                }
                Symbol::X { .. } | Symbol::Integ(_) => {
                    if pivot.replace(f).is_some() {
                        return Err(ModelError::Unrealizable(alloc_name(tau)));
                    }
                }
                Symbol::Prod(_) => return Err(ModelError::Unrealizable(alloc_name(tau))),
            }
        }
        let c = if *tau == renorm_target() { self.c } else { 0.0 };
        match pivot {
            None => {
                if c != 0.0 {
                    plain = plain.map(|v| v - c);
                }
                Ok(vec![(None, plain)])
            }
            Some(Symbol::X { axis, power }) => {
                if *power != 1 {
                    return Err(ModelError::Unrealizable(alloc_name(tau)));
                }
                let horizontal = *axis == 2;
                let coords =
                    Field::from_fn(self.grid, |a, b| if horizontal { b } else { a });
                let lead = plain.zip_with(&coords, |a, y| a * y);
                Ok(vec![(None, lead), (Some(coords), plain)])
            }
            Some(Symbol::Integ(inner)) => {
                let f = match inner.as_ref() {
                    Symbol::Xi => &self.kxi,
                    Symbol::H => self
                        .nh
                        .as_ref()
                        .ok_or_else(|| ModelError::Unrealizable(alloc_name(tau)))?,
                    _ => return Err(ModelError::Unrealizable(alloc_name(tau))),
                };
                let mut lead = plain.zip_with(f, |a, v| a * v);
                if c != 0.0 {
                    lead = lead.map(|v| v - c);
                }
                Ok(vec![(None, lead), (Some(f.clone()), plain)])
            }
            _ => unreachable!("pivot is X or Integ"),
        }
    }
}

fn alloc_name(s: &Symbol) -> String {
    format!("{s}")
}

/// Applies the homogeneity weights `2^{m(|tau| + d/2)}` (d = 2) to raw
/// per-level coefficient lists and returns the per-level sups.
pub fn weighted_sups(coeffs: &[Vec<f64>], homogeneity: f64) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(m, vals)| {
            let w = 2.0f64.powf((homogeneity + 1.0) * m as f64);
            vals.iter().fold(0.0f64, |acc, v| acc.max(w * v.abs()))
        })
        .collect()
}

/// Deterministic grid value of the renormalization constant: the exact
/// expectation of `(N * xi_eps)(x) xi_eps(x)` under the discrete noise,
/// computed as `sum_z N(z) (rho * rho)(z) h^2` with the same spectral
/// kernel the models use.
pub fn renorm_constant_grid(fft: &Fft2, eps: f64) -> Result<f64, ModelError> {
    renorm_constant_grid_with(fft, eps, crate::fields::bump_profile)
}

/// Same quadrature with a caller-supplied mollifier profile.
pub fn renorm_constant_grid_with(
    fft: &Fft2,
    eps: f64,
    profile: impl Fn(f64) -> f64,
) -> Result<f64, ModelError> {
    let rho = mollifier_with(fft.grid(), eps, profile)?;
    let q = fft.convolve(&rho, &rho);
    Ok(Green::get().convolve(fft, &q).get(0, 0))
}

/// Monte-Carlo estimate of `E[(N * xi_eps)(x0) xi_eps(x0)]` over seeds;
/// returns the sample mean and its standard error.
pub fn mc_renorm_estimate(
    fft: &Fft2,
    eps: f64,
    seeds: core::ops::Range<u64>,
) -> Result<(f64, f64), ModelError> {
    let rho = mollifier_with(fft.grid(), eps, crate::fields::bump_profile)?;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut count = 0usize;
    for seed in seeds {
        let xi = fft.convolve(&white_noise(fft.grid(), seed), &rho);
        let v = Green::get().convolve(fft, &xi).get(0, 0) * xi.get(0, 0);
        count += 1;
        let d = v - mean;
        mean += d / count as f64;
        m2 += d * (v - mean);
    }
    let var = m2 / (count as f64 - 1.0);
    Ok((mean, (var / count as f64).sqrt()))
}
