//! Compactly supported heat-type kernel with vanishing moments, the radial
//! table of its time integral, and the logarithmically divergent constant.
//!
//! The kernel is the heat Gaussian times a smooth cutoff in `t + |x|^2`,
//! minus three shell-supported corrections chosen so the integrals against
//! `1`, `t` and `|x|^2` vanish (odd and mixed spatial moments vanish by
//! radial symmetry). Everything downstream consumes either pointwise kernel
//! values or the radial profile `N(r)` of its integral over time, which is
//! tabulated once per process.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::fields::{bump_profile, Fft2, Field, HalfSpectrum};
use crate::quad::{gauss_legendre, integrate_gl, integrate_gl_with, simpson};

/// Smooth transition: 1 for `u <= 0`, 0 for `u >= 1`.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - u)).exp();
        let b = (-1.0 / u).exp();
        a / (a + b)
    }
}

/// Support cutoff in the parabolic radius: identically 1 on `s <= 1/2`,
/// identically 0 on `s >= 1`.
pub fn cutoff_chi(s: f64) -> f64 {
    smooth_step(2.0 * s - 1.0)
}

/// Bump supported in the parabolic shell `0.55 < s < 0.95`.
fn shell_bump(s: f64) -> f64 {
    let v = (s - 0.75) / 0.2;
    bump_profile(v * v)
}

/// Flat factor vanishing to all orders at `t = 0`.
fn eta_flat(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Free heat kernel on the plane as a function of `t` and `r^2`.
pub fn heat_gaussian(t: f64, r2: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-r2 / (4.0 * t)).exp() / (4.0 * PI * t)
    }
}

/// Correction shapes: `{1, t, r^2}` times the shell bump.
fn correction_basis(i: usize, t: f64, rho: f64) -> f64 {
    let m = match i {
        0 => 1.0,
        1 => t,
        2 => rho,
        _ => unreachable!(),
    };
    m * eta_flat(t) * shell_bump(t + rho)
}

/// The moment test functions `{1, t, r^2}`.
fn moment_poly(j: usize, t: f64, rho: f64) -> f64 {
    match j {
        0 => 1.0,
        1 => t,
        2 => rho,
        _ => unreachable!(),
    }
}

/// The corrected kernel.
#[derive(Clone, Debug)]
pub struct Kernel {
    coeffs: [f64; 3],
}

impl Kernel {
    /// Shared instance; building solves the 3x3 moment system once.
    pub fn get() -> &'static Kernel {
        static CELL: OnceLock<Kernel> = OnceLock::new();
        CELL.get_or_init(Kernel::build)
    }

    fn build() -> Kernel {
        let raw: Vec<f64> = (0..3).map(|j| raw_moment_gl(j, 256, 320)).collect();
        let mut a = [[0.0; 3]; 3];
        for (j, row) in a.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                *v = correction_moment_gl(j, i, 256);
            }
        }
        let coeffs = solve3(a, [raw[0], raw[1], raw[2]]);
        Kernel { coeffs }
    }

    pub fn coeffs(&self) -> [f64; 3] {
        self.coeffs
    }

    /// Kernel value at time `t` and spatial offset `x`.
    pub fn eval(&self, t: f64, x1: f64, x2: f64) -> f64 {
        self.eval_radial(t, x1 * x1 + x2 * x2)
    }

    /// Kernel value as a function of `t` and `r^2`.
    pub fn eval_radial(&self, t: f64, r2: f64) -> f64 {
        if t <= 0.0 || t + r2 >= 1.0 {
            return 0.0;
        }
        let mut v = cutoff_chi(t + r2) * heat_gaussian(t, r2);
        for i in 0..3 {
            v -= self.coeffs[i] * correction_basis(i, t, r2);
        }
        v
    }
}

/// Moment of the uncorrected kernel against `p_j`, by Gauss rules on the
/// substitution `u = r^2 / (4t)` which removes the short-time singularity.
/// The cutoff argument `t (1 + 4u)` crosses its plateau edges at
/// `u_a = (1/(2t) - 1)/4` and `u_b = (1/t - 1)/4`; the inner integral is
/// split there so each rule sees an analytic integrand, and the outer axis
/// is split at `t = 1/2` where the plateau piece disappears.
fn raw_moment_gl(j: usize, nt: usize, nu: usize) -> f64 {
    let rule_plat = gauss_legendre(96);
    let rule_u = gauss_legendre(nu);
    let inner = |t: f64| {
        let u_a = ((0.5 / t - 1.0) / 4.0).max(0.0);
        let u_b = (1.0 / t - 1.0) / 4.0;
        let mut v = 0.0;
        if u_a > 0.0 {
            v += integrate_gl_with(&rule_plat, 0.0, u_a.min(45.0), |u| {
                (-u).exp() * moment_poly(j, t, 4.0 * t * u)
            });
        }
        if u_a < 45.0 {
            v += integrate_gl_with(&rule_u, u_a, u_b.min(u_a + 45.0), |u| {
                (-u).exp() * moment_poly(j, t, 4.0 * t * u) * cutoff_chi(t * (1.0 + 4.0 * u))
            });
        }
        v
    };
    integrate_gl(nt / 2, 0.0, 0.5, inner) + integrate_gl(nt / 2, 0.5, 1.0, inner)
}

/// Same moment by composite Simpson rules, as an independent cross-check.
/// The integrand extends continuously to `t = 0`, so the endpoint is
/// evaluated just inside the domain rather than zeroed.
pub fn raw_moment_simpson(j: usize, mt: usize, mu: usize) -> f64 {
    simpson(0.0, 1.0, mt, |t| {
        let t = t.max(1e-13);
        if t >= 1.0 {
            return 0.0;
        }
        let upper = ((1.0 / t - 1.0) / 4.0).min(40.0).max(0.0);
        if upper == 0.0 {
            return 0.0;
        }
        simpson(0.0, upper, mu, |u| {
            (-u).exp() * moment_poly(j, t, 4.0 * t * u) * cutoff_chi(t * (1.0 + 4.0 * u))
        })
    })
}

/// Exponential integral `E1(x)` for `x > 0`: power series below 1,
/// modified-Lentz continued fraction above.
pub fn exp_e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        const EULER: f64 = 0.577_215_664_901_532_9;
        let mut sum = -EULER - x.ln();
        let mut term = 1.0;
        for k in 1..=60 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        let mut b = x + 1.0;
        let mut c = 1e308;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..300 {
            let a = -(i as f64) * (i as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Moment of a correction shape: `int p_j phi_i` with `dx = pi d(rho)` for
/// radial integrands. The outer axis splits at `t = 0.55`, where the lower
/// limit of the shell stops tracking `t`.
fn correction_moment_gl(j: usize, i: usize, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let outer = |t: f64| {
        let lo = (0.55 - t).max(0.0);
        let hi = 0.95 - t;
        integrate_gl_with(&rule, lo, hi, |rho| {
            moment_poly(j, t, rho) * correction_basis(i, t, rho)
        })
    };
    PI * (integrate_gl_with(&rule, 0.0, 0.55, outer) + integrate_gl_with(&rule, 0.55, 0.95, outer))
}

/// Simpson version of the correction moments.
pub fn correction_moment_simpson(j: usize, i: usize, m: usize) -> f64 {
    PI * simpson(0.0, 0.95, m, |t| {
        let lo = (0.55 - t).max(0.0);
        let hi = 0.95 - t;
        if hi <= lo {
            return 0.0;
        }
        simpson(lo, hi, m, |rho| {
            moment_poly(j, t, rho) * correction_basis(i, t, rho)
        })
    })
}

/// Moment of the corrected kernel against `p_j` by the independent Simpson
/// rules; must vanish.
pub fn corrected_moment_independent(kernel: &Kernel, j: usize) -> f64 {
    let raw = raw_moment_simpson(j, 2048, 1024);
    let mut v = raw;
    for i in 0..3 {
        v -= kernel.coeffs[i] * correction_moment_simpson(j, i, 1024);
    }
    v
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        assert!(a[col][col].abs() > 1e-14, "singular moment system");
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in (col + 1)..3 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    x
}

/// Radial profile of the time integral of the kernel, with the logarithmic
/// singularity split off: the table stores the smooth part
/// `N(r) + ln(r) / (2 pi)` on a uniform grid in `ln r`.
pub struct Green {
    kernel: Kernel,
    s_min: f64,
    ds: f64,
    smooth: Vec<f64>,
    grids: Mutex<HashMap<usize, Arc<GreenOnGrid>>>,
}

/// The radial profile sampled on a torus grid, with its spectrum.
pub struct GreenOnGrid {
    pub field: Field,
    pub spectrum: HalfSpectrum,
}

const GREEN_S_MIN: f64 = -20.8; // ln(1e-9) and change
const GREEN_S_MAX: f64 = 0.10;
const GREEN_NODES: usize = 18001;

impl Green {
    pub fn get() -> &'static Green {
        static CELL: OnceLock<Green> = OnceLock::new();
        CELL.get_or_init(Green::build)
    }

    fn build() -> Green {
        let kernel = Kernel::get().clone();
        let ds = (GREEN_S_MAX - GREEN_S_MIN) / (GREEN_NODES - 1) as f64;
        let rule_u = gauss_legendre(400);
        let rule_t = gauss_legendre(128);
        let mut smooth = Vec::with_capacity(GREEN_NODES);
        for k in 0..GREEN_NODES {
            let s = GREEN_S_MIN + k as f64 * ds;
            let r = s.exp();
            let n = if r >= 1.0 {
                0.0
            } else {
                radial_direct(&kernel, r, &rule_u, &rule_t)
            };
            smooth.push(n + s / (2.0 * PI));
        }
        Green {
            kernel,
            s_min: GREEN_S_MIN,
            ds,
            smooth,
            grids: Mutex::new(HashMap::new()),
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Smooth part `N(r) + ln(r) / (2 pi)` by cubic interpolation in `ln r`.
    fn smooth_part(&self, s: f64) -> f64 {
        let pos = (s - self.s_min) / self.ds;
        let k = (pos.floor() as isize).clamp(1, self.smooth.len() as isize - 3) as usize;
        let t = pos - k as f64;
        // 4-point Lagrange on nodes k-1 .. k+2
        let (ym1, y0, y1, y2) = (
            self.smooth[k - 1],
            self.smooth[k],
            self.smooth[k + 1],
            self.smooth[k + 2],
        );
        let a = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let b = (t * t - 1.0) * (t - 2.0) / 2.0;
        let c = -t * (t + 1.0) * (t - 2.0) / 2.0;
        let d = t * (t * t - 1.0) / 6.0;
        a * ym1 + b * y0 + c * y1 + d * y2
    }

    /// `N(r)` for `r > 0`; identically zero for `r >= 1`. Below the table
    /// range the smooth part is constant to working precision, so only the
    /// logarithm extends.
    pub fn radial(&self, r: f64) -> f64 {
        assert!(r > 0.0, "radial profile needs r > 0; grid code uses cell_average at the origin");
        if r >= 1.0 {
            return 0.0;
        }
        let s = r.ln();
        let smooth = self.smooth_part(s.max(self.s_min));
        smooth - s / (2.0 * PI)
    }

    /// Average of `N` over the square cell of side `h` centered at the
    /// origin, used as the on-grid stand-in for the singular value at 0.
    pub fn cell_average(&self, h: f64) -> f64 {
        let g0 = self.smooth_part((1e-6f64).ln());
        g0 - avg_log_over_cell(h) / (2.0 * PI)
    }

    /// The radial profile sampled on the grid of the given transform, with
    /// the zero mode removed exactly, cached per grid size.
    pub fn on_grid(&self, fft: &Fft2) -> Arc<GreenOnGrid> {
        let n = fft.grid().n();
        if let Some(g) = self.grids.lock().unwrap().get(&n) {
            return g.clone();
        }
        let grid = fft.grid();
        let mut f = Field::zeros(grid);
        for i in 0..n {
            for j in 0..n {
                let r = grid.node_dist((i, j), (0, 0));
                let v = if i == 0 && j == 0 {
                    self.cell_average(grid.spacing())
                } else {
                    self.radial(r)
                };
                f.set(i, j, v);
            }
        }
        let mut spectrum = fft.forward(&f);
        spectrum.data[0] = num_complex::Complex64::new(0.0, 0.0);
        let g = Arc::new(GreenOnGrid { field: f, spectrum });
        self.grids.lock().unwrap().insert(n, g.clone());
        g
    }

    /// Convolution with the radial profile: `(N * f)` with the zero mode of
    /// `N` removed, so the output always has exactly zero mean.
    pub fn convolve(&self, fft: &Fft2, f: &Field) -> Field {
        let g = self.on_grid(fft);
        let n = fft.grid().n();
        let cols = n / 2 + 1;
        let h2 = fft.grid().spacing().powi(2);
        let mut s = fft.forward(f);
        for i in 0..n {
            for j in 0..cols {
                let idx = i * cols + j;
                s.data[idx] *= g.spectrum.data[idx] * h2;
            }
        }
        fft.inverse(&s)
    }
}

///// Direct evaluation of `N(r)` by quadrature, also used to build the table.
/// Substituting `u = r^2/(4t)` turns the heat part into
/// `(1/4pi) int_{u_lo}^inf exp(-u) chi(r^2 (1 + 1/(4u))) du/u` with
/// `u_lo = r^2/(4(1-r^2))`. The cutoff argument drops below 1/2 once
/// `u >= u_split = r^2/(4(1/2 - r^2))`, so the tail is an exponential
/// integral in closed form and only the short transition piece between
/// the two plateau boundaries needs quadrature.
fn radial_direct(
    kernel: &Kernel,
    r: f64,
    rule_u: &(Vec<f64>, Vec<f64>),
    rule_t: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let r2 = r * r;
    let u_lo = r2 / (4.0 * (1.0 - r2));
    let heat = if r2 < 0.5 {
        let u_split = r2 / (4.0 * (0.5 - r2));
        let u_top = u_split.min(u_lo + 45.0);
        let trans = integrate_gl_with(rule_u, u_lo.ln(), u_top.ln(), |v| {
            let u = v.exp();
            (-u).exp() * cutoff_chi(r2 * (1.0 + 1.0 / (4.0 * u)))
        });
        let tail = if u_split < u_lo + 45.0 {
            exp_e1(u_split)
        } else {
            0.0
        };
        (trans + tail) / (4.0 * PI)
    } else {
        // no plateau, but u_lo >= 1/4 keeps 1/u tame on a plain axis
        integrate_gl_with(rule_u, u_lo, u_lo + 45.0, |u| {
            (-u).exp() * cutoff_chi(r2 * (1.0 + 1.0 / (4.0 * u))) / u
        }) / (4.0 * PI)
    };
    let mut corr = 0.0;
    let lo = (0.55 - r2).max(0.0);
    let hi = 0.95 - r2;
    if hi > lo {
        for i in 0..3 {
            corr += kernel.coeffs()[i]
                * integrate_gl_with(rule_t, lo, hi, |t| correction_basis(i, t, r2));
        }
    }
    heat - corr
}

/// Average of `ln r` over the square of side `h` centered at the origin,
/// by exact radial integration over the eight congruent triangles.
fn avg_log_over_cell(h: f64) -> f64 {
    let a = h / 2.0;
    let tri = integrate_gl(64, 0.0, PI / 4.0, |theta| {
        let rr = a / theta.cos();
        0.5 * rr * rr * (rr.ln() - 0.5)
    });
    8.0 * tri / (h * h)
}

/// Continuum-normalized bump and its self-convolution profile, tabulated
/// once; feeds the quadrature for the divergent constant.
struct SelfConv {
    values: Vec<f64>, // q(s) on s in [0, 2], uniform
    ds: f64,
}

impl SelfConv {
    fn get() -> &'static SelfConv {
        static CELL: OnceLock<SelfConv> = OnceLock::new();
        CELL.get_or_init(SelfConv::build)
    }

    fn build() -> SelfConv {
        // continuum normalization of the bump
        let mass = 2.0 * PI * integrate_gl(200, 0.0, 1.0, |r| bump_profile(r * r) * r);
        let c = 1.0 / mass;
        let rule = gauss_legendre(96);
        let nodes = 513;
        let ds = 2.0 / (nodes - 1) as f64;
        let mut values = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let s = k as f64 * ds;
            let q = integrate_gl_with(&rule, -1.0, 1.0, |a| {
                integrate_gl_with(&rule, -1.0, 1.0, |b| {
                    let first = bump_profile(a * a + b * b);
                    if first == 0.0 {
                        return 0.0;
                    }
                    first * bump_profile((a - s) * (a - s) + b * b)
                })
            });
            values.push(c * c * q);
        }
        SelfConv { values, ds }
    }

    fn eval(&self, s: f64) -> f64 {
        if !(0.0..2.0).contains(&s) {
            return 0.0;
        }
        let pos = s / self.ds;
        let k = (pos.floor() as isize).clamp(1, self.values.len() as isize - 3) as usize;
        let t = pos - k as f64;
        let (ym1, y0, y1, y2) = (
            self.values[k - 1],
            self.values[k],
            self.values[k + 1],
            self.values[k + 2],
        );
        let a = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let b = (t * t - 1.0) * (t - 2.0) / 2.0;
        let cc = -t * (t + 1.0) * (t - 2.0) / 2.0;
        let d = t * (t * t - 1.0) / 6.0;
        a * ym1 + b * y0 + cc * y1 + d * y2
    }
}

/// The divergent constant: integral of the radial profile against the
/// self-convolution of the width-`eps` mollifier, evaluated by radial
/// quadrature with the logarithmic part handled in closed form.
pub fn renorm_constant(eps: f64) -> f64 {
    assert!(eps > 0.0);
    let q = SelfConv::get();
    let green = Green::get();
    // A = int q s ds = 1/(2 pi) up to quadrature error; B carries ln s
    let a = integrate_gl(512, 0.0, 2.0, |s| q.eval(s) * s);
    let b = integrate_gl(512, -20.0, 2.0f64.ln(), |v| {
        let s = v.exp();
        q.eval(s) * s * s * v
    });
    let d = 2.0
        * PI
        * integrate_gl(512, 0.0, 2.0, |s| {
            if s == 0.0 {
                return 0.0;
            }
            let r = eps * s;
            let smooth = if r >= 1.0 {
                // profile vanishes; undo the log split consistently
                r.ln() / (2.0 * PI)
            } else {
                green.smooth_part(r.ln().max(GREEN_S_MIN))
            };
            smooth * q.eval(s) * s
        });
    -(a * eps.ln() + b) + d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid2D;

    #[test]
    fn cutoff_plateaus() {
        assert_eq!(cutoff_chi(0.0), 1.0);
        assert_eq!(cutoff_chi(0.5), 1.0);
        assert_eq!(cutoff_chi(1.0), 0.0);
        assert_eq!(cutoff_chi(1.5), 0.0);
        let v = cutoff_chi(0.75);
        assert!(v > 0.0 && v < 1.0);
        // continuous at the plateau edges, monotone between, and oriented
        // the right way round
        assert!(cutoff_chi(0.500001) > 1.0 - 1e-9);
        assert!(cutoff_chi(0.999999) < 1e-9);
        let mut prev = 1.0;
        for k in 1..100 {
            let v = cutoff_chi(0.5 + 0.005 * k as f64);
            assert!(v <= prev);
            prev = v;
        }
        assert!(cutoff_chi(0.6) > 0.9);
        assert!(cutoff_chi(0.6) > cutoff_chi(0.75));
        assert!(cutoff_chi(0.75) > cutoff_chi(0.9));
        assert!(cutoff_chi(0.9) < 0.1);
    }

    #[test]
    fn kernel_equals_heat_gaussian_near_origin() {
        let k = Kernel::get();
        for &(t, x1, x2) in &[
            (0.1, 0.2, 0.1),
            (0.01, 0.05, -0.3),
            (0.4, 0.2, 0.0),
            (0.25, -0.4, 0.25),
            (1e-4, 0.01, 0.02),
        ] {
            let r2: f64 = x1 * x1 + x2 * x2;
            assert!(t + r2 < 0.5);
            let want = heat_gaussian(t, r2);
            let got = k.eval(t, x1, x2);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs(),
                "mismatch at t={t} x=({x1},{x2}): {got} vs {want}"
            );
        }
    }

    #[test]
    fn kernel_supported_in_parabolic_ball() {
        let k = Kernel::get();
        assert_eq!(k.eval(-0.1, 0.1, 0.0), 0.0);
        assert_eq!(k.eval(0.0, 0.1, 0.0), 0.0);
        assert_eq!(k.eval(1.01, 0.0, 0.0), 0.0);
        assert_eq!(k.eval(0.5, 0.8, 0.0), 0.0);
        assert_eq!(k.eval(0.2, 1.0, 0.3), 0.0);
    }

    #[test]
    fn corrected_moments_vanish_independent_quadrature() {
        let k = Kernel::get();
        for j in 0..3 {
            let m = corrected_moment_independent(k, j);
            assert!(m.abs() < 1e-8, "moment {j} = {m}");
        }
    }

    #[test]
    fn odd_moments_vanish_by_symmetry() {
        let k = Kernel::get();
        // the kernel is radial in x, so K(t, x) = K(t, -x) pointwise
        for &(t, x1, x2) in &[(0.1, 0.3, 0.2), (0.6, 0.1, -0.4)] {
            assert_eq!(k.eval(t, x1, x2), k.eval(t, -x1, -x2));
            assert_eq!(k.eval(t, x1, x2), k.eval(t, x2, x1));
        }
    }

    #[test]
    fn radial_profile_log_asymptote() {
        let g = Green::get();
        // N(r) + ln(r)/(2 pi) tends to a constant
        let a = g.radial(1e-4) + (1e-4f64).ln() / (2.0 * PI);
        let b = g.radial(1e-5) + (1e-5f64).ln() / (2.0 * PI);
        assert!((a - b).abs() < 1e-7, "smooth parts {a} vs {b}");
        let c = g.radial(1e-7) + (1e-7f64).ln() / (2.0 * PI);
        assert!((b - c).abs() < 1e-8);
    }

    #[test]
    fn radial_profile_table_matches_direct_quadrature() {
        let g = Green::get();
        let rule_u = gauss_legendre(600);
        let rule_t = gauss_legendre(200);
        for &r in &[0.003, 0.05, 0.3, 0.7, 0.9] {
            let direct = radial_direct(g.kernel(), r, &rule_u, &rule_t);
            let table = g.radial(r);
            assert!(
                (direct - table).abs() < 1e-9,
                "r={r}: direct {direct} vs table {table}"
            );
        }
        assert_eq!(g.radial(1.0), 0.0);
        assert_eq!(g.radial(2.5), 0.0);
    }

    #[test]
    fn green_grid_mean_removed() {
        let g = Green::get();
        let grid = Grid2D::new(64).unwrap();
        let fft = Fft2::new(grid);
        let og = g.on_grid(&fft);
        assert_eq!(og.spectrum.data[0].re, 0.0);
        // convolution output has exactly zero DC
        let f = Field::from_fn(grid, |x, y| x.sin() + 0.5 * y.cos() + 1.0);
        let c = g.convolve(&fft, &f);
        assert!(c.mean().abs() < 1e-12);
    }

    #[test]
    fn self_convolution_total_mass() {
        // 2 pi int q(s) s ds = 1 since the bump has unit mass
        let q = SelfConv::get();
        let a = integrate_gl(512, 0.0, 2.0, |s| q.eval(s) * s);
        assert!(
            (2.0 * PI * a - 1.0).abs() < 1e-6,
            "self-convolution mass {}",
            2.0 * PI * a
        );
    }

    #[test]
    fn renorm_constant_log_slope() {
        // the smooth remainder still moves at order eps^2, so the local
        // slope settles onto 1/(2 pi) at that rate as eps shrinks
        let c2 = renorm_constant(0.25);
        let c3 = renorm_constant(0.125);
        let c5 = renorm_constant(0.03125);
        let c6 = renorm_constant(0.015625);
        let s_coarse = (c3 - c2) / (2.0f64.ln());
        let s_fine = (c6 - c5) / (2.0f64.ln());
        let want = 1.0 / (2.0 * PI);
        assert!((s_coarse - want).abs() < 0.30 * want, "slope {s_coarse} vs {want}");
        assert!((s_fine - want).abs() < 0.01 * want, "slope {s_fine} vs {want}");
        assert!(c6 > c5 && c5 > c3 && c3 > c2);
    }

            }
