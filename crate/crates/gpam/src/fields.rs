//! Sampled scalar fields on the square torus and their spectral transforms.
//!
//! The torus is `[0, 2pi)^2` sampled on an `n x n` grid, `n` a power of
//! two. Convolutions, Fourier multipliers and the heat semigroup all run
//! through a cached real-to-complex FFT pair; quadrature on the grid uses
//! the plain `spacing^2` weight throughout, so discrete identities (mass of
//! the mollifier, Parseval) hold exactly rather than up to quadrature
//! error.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid size must be a power of two and at least 16, got {0}")]
    BadGridSize(usize),
    #[error("grid sizes differ: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("under-resolved mollifier: eps = {eps} needs at least two grid cells ({min})")]
    UnderResolved { eps: f64, min: f64 },
    #[error("mollifier width must lie in (0, pi], got {0}")]
    BadWidth(f64),
}

/// Uniform grid on the square torus of side `2pi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid2D {
    n: usize,
}

impl Grid2D {
    pub fn new(n: usize) -> Result<Grid2D, FieldError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(FieldError::BadGridSize(n));
        }
        Ok(Grid2D { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2pi / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Coordinate of index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Signed displacement `coord(i) - coord(j)` folded to `(-pi, pi]`.
    pub fn min_image(&self, d: f64) -> f64 {
        let mut d = d % (2.0 * PI);
        if d > PI {
            d -= 2.0 * PI;
        } else if d <= -PI {
            d += 2.0 * PI;
        }
        d
    }

    /// Torus distance between grid nodes `(i1, j1)` and `(i2, j2)`.
    pub fn node_dist(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        let dx = self.min_image(self.coord(a.0) - self.coord(b.0));
        let dy = self.min_image(self.coord(a.1) - self.coord(b.1));
        (dx * dx + dy * dy).sqrt()
    }
}

/// Scalar field sampled on a [`Grid2D`], row-major with `x1` as the slow
/// index: `data[i * n + j] = f(i * h, j * h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid2D,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid2D) -> Field {
        Field {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Field {
        Field {
            grid,
            data: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Field {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                data.push(f(grid.coord(i), grid.coord(j)));
            }
        }
        Field { grid, data }
    }

    pub fn from_vec(grid: Grid2D, data: Vec<f64>) -> Field {
        assert_eq!(data.len(), grid.len());
        Field { grid, data }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.grid.n() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.grid.n() + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// In-place `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Field) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in &mut self.data {
            *a *= c;
        }
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Discrete `L^2` norm with the `spacing^2` quadrature weight.
    pub fn l2(&self) -> f64 {
        let h = self.grid.spacing();
        (self.data.iter().map(|v| v * v).sum::<f64>()).sqrt() * h
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Integral over the torus under grid quadrature.
    pub fn integral(&self) -> f64 {
        let h = self.grid.spacing();
        self.data.iter().sum::<f64>() * h * h
    }

    pub fn min(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Half-plane spectrum of a real field: `n` rows by `n/2 + 1` columns,
/// with the second wavenumber truncated to `0..=n/2`.
#[derive(Clone, Debug)]
pub struct HalfSpectrum {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl HalfSpectrum {
    pub fn cols(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols() + j]
    }
}

/// Signed wavenumber of row or column index `i` on an `n`-grid.
pub fn wavenum(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Cached FFT plans for one grid size.
pub struct Fft2 {
    grid: Grid2D,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(grid: Grid2D) -> Fft2 {
        let n = grid.n();
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Fft2 {
            grid,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            col_fwd: cp.plan_fft_forward(n),
            col_inv: cp.plan_fft_inverse(n),
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Unnormalized forward transform of a real field.
    pub fn forward(&self, f: &Field) -> HalfSpectrum {
        assert_eq!(f.grid(), self.grid);
        let n = self.grid.n();
        let cols = n / 2 + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); n * cols];
        let mut row = vec![0.0; n];
        for i in 0..n {
            row.copy_from_slice(&f.as_slice()[i * n..(i + 1) * n]);
            self.r2c
                .process(&mut row, &mut out[i * cols..(i + 1) * cols])
                .expect("row FFT");
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..cols {
            for i in 0..n {
                col[i] = out[i * cols + j];
            }
            self.col_fwd.process(&mut col);
            for i in 0..n {
                out[i * cols + j] = col[i];
            }
        }
        HalfSpectrum { n, data: out }
    }

    /// Inverse of [`Fft2::forward`], including the `1/n^2` normalization.
    pub fn inverse(&self, s: &HalfSpectrum) -> Field {
        assert_eq!(s.n, self.grid.n());
        let n = s.n;
        let cols = n / 2 + 1;
        let mut work = s.data.clone();
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..cols {
            for i in 0..n {
                col[i] = work[i * cols + j];
            }
            self.col_inv.process(&mut col);
            for i in 0..n {
                work[i * cols + j] = col[i];
            }
        }
        let mut out = vec![0.0; n * n];
        let mut row = vec![Complex64::new(0.0, 0.0); cols];
        for i in 0..n {
            row.copy_from_slice(&work[i * cols..(i + 1) * cols]);
            // realfft requires the imaginary parts of the self-conjugate
            // entries to vanish; they only carry rounding noise here
            row[0].im = 0.0;
            row[cols - 1].im = 0.0;
            self.c2r
                .process(&mut row, &mut out[i * n..(i + 1) * n])
                .expect("row inverse FFT");
        }
        let scale = 1.0 / (n * n) as f64;
        for v in &mut out {
            *v *= scale;
        }
        Field::from_vec(self.grid, out)
    }

    /// Applies a real Fourier multiplier `m(k1, k2)`; the multiplier must
    /// be even under `k -> -k`, which holds for every multiplier used here
    /// since they depend on the wavenumbers through their squares.
    pub fn apply_multiplier(&self, f: &Field, m: impl Fn(i64, i64) -> f64) -> Field {
        let n = self.grid.n();
        let mut s = self.forward(f);
        let cols = s.cols();
        for i in 0..n {
            let k1 = wavenum(i, n);
            for j in 0..cols {
                let k2 = j as i64;
                s.data[i * cols + j] *= m(k1, k2);
            }
        }
        self.inverse(&s)
    }

    /// Periodic convolution with continuum normalization: approximates
    /// `(f * g)(x) = \int f(y) g(x - y) dy` via the grid quadrature weight.
    pub fn convolve(&self, f: &Field, g: &Field) -> Field {
        let n = self.grid.n();
        let sf = self.forward(f);
        let sg = self.forward(g);
        let cols = sf.cols();
        let h2 = self.grid.spacing() * self.grid.spacing();
        let mut out = sf;
        for i in 0..n {
            for j in 0..cols {
                let idx = i * cols + j;
                out.data[idx] *= sg.data[idx] * h2;
            }
        }
        self.inverse(&out)
    }

    /// Heat semigroup at time `t >= 0`: multiplier `exp(-t |k|^2)`.
    pub fn heat_semigroup(&self, f: &Field, t: f64) -> Field {
        assert!(t >= 0.0, "heat semigroup needs t >= 0");
        if t == 0.0 {
            return f.clone();
        }
        self.apply_multiplier(f, |k1, k2| (-t * (k1 * k1 + k2 * k2) as f64).exp())
    }
}

/// Samples spatial white noise by Fourier synthesis: independent complex
/// standard Gaussians on a Hermitian half-plane, real Gaussians on the
/// four self-conjugate modes, scaled so grid values are iid
/// `N(0, 1/spacing^2)`.
pub fn white_noise(grid: Grid2D, seed: u64) -> Field {
    let n = grid.n();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let sigma = n as f64 / grid.spacing();
    let mut spec = vec![Complex64::new(0.0, 0.0); n * n];
    for k1 in 0..n {
        for k2 in 0..n {
            let p1 = (n - k1) % n;
            let p2 = (n - k2) % n;
            if (p1, p2) == (k1, k2) {
                let a: f64 = normal.sample(&mut rng);
                spec[k1 * n + k2] = Complex64::new(sigma * a, 0.0);
            } else if (k1, k2) < (p1, p2) {
                let a: f64 = normal.sample(&mut rng);
                let b: f64 = normal.sample(&mut rng);
                let z = Complex64::new(a, b) * (sigma / 2f64.sqrt());
                spec[k1 * n + k2] = z;
                spec[p1 * n + p2] = z.conj();
            }
        }
    }
    // full complex inverse transform of the Hermitian spectrum
    let mut cp = FftPlanner::<f64>::new();
    let inv = cp.plan_fft_inverse(n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = spec[i * n + j];
        }
        inv.process(&mut col);
        for i in 0..n {
            spec[i * n + j] = col[i];
        }
    }
    let mut data = vec![0.0; n * n];
    let scale = 1.0 / (n * n) as f64;
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        row.copy_from_slice(&spec[i * n..(i + 1) * n]);
        inv.process(&mut row);
        for j in 0..n {
            debug_assert!(row[j].im.abs() < 1e-6 * sigma * n as f64);
            data[i * n + j] = row[j].re * scale;
        }
    }
    Field::from_vec(grid, data)
}

/// Smooth radial bump of unit mass supported in the ball of radius `eps`,
/// sampled on the grid and normalized so its discrete integral is exactly
/// one (constants are then preserved exactly by mollification).
pub fn mollifier(grid: Grid2D, eps: f64) -> Result<Field, FieldError> {
    mollifier_with(grid, eps, bump_profile)
}

/// Mollifier with a caller-supplied radial profile of `r^2 / eps^2`; the
/// profile must vanish for arguments `>= 1` and is renormalized to unit
/// discrete mass.
pub fn mollifier_with(
    grid: Grid2D,
    eps: f64,
    profile: impl Fn(f64) -> f64,
) -> Result<Field, FieldError> {
    if !(eps > 0.0 && eps <= PI) {
        return Err(FieldError::BadWidth(eps));
    }
    let h = grid.spacing();
    if eps < 2.0 * h {
        return Err(FieldError::UnderResolved { eps, min: 2.0 * h });
    }
    let n = grid.n();
    let mut f = Field::zeros(grid);
    for i in 0..n {
        let dx = grid.min_image(grid.coord(i));
        for j in 0..n {
            let dy = grid.min_image(grid.coord(j));
            let r2 = (dx * dx + dy * dy) / (eps * eps);
            if r2 < 1.0 {
                f.set(i, j, profile(r2));
            }
        }
    }
    let mass = f.integral();
    f.scale(1.0 / mass);
    Ok(f)
}

/// Unnormalized bump profile `exp(-1 / (1 - r^2))` as a function of `r^2`.
pub fn bump_profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Convolves a field with the mollifier of width `eps`.
pub fn mollify(fft: &Fft2, f: &Field, eps: f64) -> Result<Field, FieldError> {
    let rho = mollifier(fft.grid(), eps)?;
    Ok(fft.convolve(f, &rho))
}
