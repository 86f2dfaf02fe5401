//! One-dimensional quadrature rules used by the kernel tabulation.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_deriv(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre integral of `f` over `[a, b]` with `n` nodes.
pub fn integrate_gl(n: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Same rule with precomputed nodes, for inner loops.
pub fn integrate_gl_with(
    rule: &(Vec<f64>, Vec<f64>),
    a: f64,
    b: f64,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite Simpson rule with `m` intervals (`m` even), used as the
/// independent cross-check against the Gauss rules.
pub fn simpson(a: f64, b: f64, m: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    assert!(m >= 2 && m % 2 == 0);
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_on_polynomials() {
        // n-point rule is exact to degree 2n - 1
        let v = integrate_gl(4, -1.0, 1.0, |x| x.powi(6));
        assert!((v - 2.0 / 7.0).abs() < 1e-14);
        let v = integrate_gl(8, 0.0, 2.0, |x| 3.0 * x * x - x + 1.0);
        assert!((v - (8.0 - 2.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn gl_on_smooth_transcendental() {
        let v = integrate_gl(32, 0.0, PI, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-14);
        let v = integrate_gl(64, 0.0, 10.0, |x| (-x).exp());
        assert!((v - (1.0 - (-10.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn simpson_agrees_with_gl() {
        let f = |x: f64| (x * x).sin() + 0.5 * x;
        let a = integrate_gl(64, 0.0, 2.0, f);
        let b = simpson(0.0, 2.0, 4096, f);
        assert!((a - b).abs() < 1e-11);
    }

    #[test]
    fn large_rules_stay_accurate() {
        let v = integrate_gl(512, 0.0, 1.0, |x| (4.0 * x).cos());
        assert!((v - (4.0f64).sin() / 4.0).abs() < 1e-13);
    }
}
