//! Scaled complementary error function and closed-form one-dimensional
//! integrals of Gaussian and Laplace profiles.

use std::f64::consts::PI;

use libm::erfc;

/// `exp(x^2) * erfc(x)`, accurate for all finite `x`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        if x < -26.0 {
            return f64::INFINITY;
        }
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 25.0 {
        return (x * x).exp() * erfc(x);
    }
    // Asymptotic series; six terms reach double precision beyond x = 25.
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..=6 {
        term *= -((2 * n - 1) as f64) * inv;
        sum += term;
    }
    sum / (x * PI.sqrt())
}

/// `∫ exp(-(u-mu)^2/a - u^2/b) du` over the real line, for `a, b > 0`.
pub fn gauss_gauss(mu: f64, a: f64, b: f64) -> f64 {
    (PI * a * b / (a + b)).sqrt() * (-mu * mu / (a + b)).exp()
}

/// Split of `∫ exp(-(u-mu)^2/a - |u|/l) du` into its `u > 0` and `u < 0` parts.
fn gauss_laplace_parts(mu: f64, a: f64, l: f64) -> (f64, f64) {
    let s = (0.5 * a).sqrt();
    let lam = 1.0 / l;
    let pref = (2.0 * PI).sqrt() * s * 0.5;
    let base = -mu * mu / (2.0 * s * s);
    let part = |alpha: f64, shift: f64| -> f64 {
        if alpha >= 0.0 {
            base.exp() * erfcx(alpha)
        } else {
            // alpha < 0 forces the exponent below to be negative.
            2.0 * (0.5 * lam * lam * s * s + shift).exp() - base.exp() * erfcx(-alpha)
        }
    };
    let sq2s = std::f64::consts::SQRT_2 * s;
    let pos = part((lam * s * s - mu) / sq2s, -lam * mu);
    let neg = part((lam * s * s + mu) / sq2s, lam * mu);
    (pref * pos, pref * neg)
}

/// `∫ exp(-(u-mu)^2/a - |u|/l) du` over the real line, for `a, l > 0`.
pub fn gauss_laplace(mu: f64, a: f64, l: f64) -> f64 {
    let (p, n) = gauss_laplace_parts(mu, a, l);
    p + n
}

/// Derivative of [`gauss_laplace`] with respect to `mu`.
pub fn gauss_laplace_dmu(mu: f64, a: f64, l: f64) -> f64 {
    let (p, n) = gauss_laplace_parts(mu, a, l);
    -(p - n) / l
}

/// Derivative of [`gauss_gauss`] with respect to `mu`.
pub fn gauss_gauss_dmu(mu: f64, a: f64, b: f64) -> f64 {
    -2.0 * mu / (a + b) * gauss_gauss(mu, a, b)
}

/// `∫ exp(-|u-mu|/l1 - |u|/l2) du` over the real line.
pub fn laplace_laplace(mu: f64, l1: f64, l2: f64) -> f64 {
    let m = mu.abs();
    if (l1 - l2).abs() <= 1e-12 * l1.max(l2) {
        let l = 0.5 * (l1 + l2);
        return (l + m) * (-m / l).exp();
    }
    // Outer tails plus the segment between the two cusps.
    let outer = (l1 * l2 / (l1 + l2)) * ((-m / l1).exp() + (-m / l2).exp());
    let k = 1.0 / l1 - 1.0 / l2;
    let inner = ((-m / l2).exp() - (-m / l1).exp()) / k;
    outer + inner
}
