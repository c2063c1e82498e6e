//! Independent numerical oracles for the closed-form kernels: finite
//! differences and tensor Gauss-Legendre quadrature.

use super::green::{green2_unchecked, green3_unchecked, shear_factor};
use super::KernelQuery;
use crate::quad::{composite_rule, integrate, Tolerance};

/// Richardson-extrapolated central first derivative.
pub fn fd_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Richardson-extrapolated central second derivative.
pub fn fd_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let fx = f(x);
    let d = |h: f64| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Residual of `∂t G + A y ∂x G - ΔG` for the 3-D kernel by finite
/// differences, together with the sum of magnitudes of its terms.
pub fn pde_residual_3d(q: &KernelQuery, rel_step: f64) -> (f64, f64) {
    let t = q.t;
    let b = shear_factor(q.shear, t);
    let wx = (2.0 * t * b).sqrt();
    let wz = (2.0 * t).sqrt();
    let wy = if q.shear > 0.0 {
        wz.min(wx / (0.5 * q.shear * t))
    } else {
        wz
    };
    // Each closure replaces one coordinate.
    let gt = |v: f64| green3_unchecked(&KernelQuery { t: v, ..*q });
    let gx = |v: f64| green3_unchecked(&KernelQuery { x: v, ..*q });
    let gy = |v: f64| green3_unchecked(&KernelQuery { y: v, ..*q });
    let gz = |v: f64| green3_unchecked(&KernelQuery { z: v, ..*q });
    let dt = fd_first(gt, t, rel_step * t);
    let dx = fd_first(gx, q.x, rel_step * wx);
    let dxx = fd_second(gx, q.x, rel_step * wx);
    let dyy = fd_second(gy, q.y, rel_step * wy);
    let dzz = fd_second(gz, q.z, rel_step * wz);
    let adv = q.shear * q.y * dx;
    let res = dt + adv - dxx - dyy - dzz;
    let scale = dt.abs() + adv.abs() + dxx.abs() + dyy.abs() + dzz.abs();
    (res, scale)
}

/// Tensor rule covering `±pad` standard deviations of a centered Gaussian of
/// standard deviation `sd`.
fn padded_rule(center: f64, sd: f64, pad: f64) -> (Vec<f64>, Vec<f64>) {
    composite_rule(center - pad * sd, center + pad * sd, 24, 10)
}

/// `∭ G dx dy dz` by tensor quadrature in coordinates aligned with the shear.
pub fn mass_3d(t: f64, shear: f64, y0: f64) -> f64 {
    let b = shear_factor(shear, t);
    let (us, uw) = padded_rule(0.0, (2.0 * t * b).sqrt(), 12.0);
    let (ys, yw) = padded_rule(y0, (2.0 * t).sqrt(), 12.0);
    let (zs, zw) = padded_rule(0.0, (2.0 * t).sqrt(), 12.0);
    let mut total = 0.0;
    for (y, wy) in ys.iter().zip(&yw) {
        let shift = 0.5 * shear * t * (y + y0);
        for (u, wu) in us.iter().zip(&uw) {
            for (z, wz) in zs.iter().zip(&zw) {
                let q = KernelQuery::new(u + shift, *y, *z, t, y0, shear);
                total += wy * wu * wz * green3_unchecked(&q);
            }
        }
    }
    total
}

/// `∬ G dx dy` for the 2-D kernel.
pub fn mass_2d(t: f64, shear: f64, y0: f64) -> f64 {
    let b = shear_factor(shear, t);
    let (us, uw) = padded_rule(0.0, (2.0 * t * b).sqrt(), 12.0);
    let (ys, yw) = padded_rule(y0, (2.0 * t).sqrt(), 12.0);
    let mut total = 0.0;
    for (y, wy) in ys.iter().zip(&yw) {
        let shift = 0.5 * shear * t * (y + y0);
        for (u, wu) in us.iter().zip(&uw) {
            let q = KernelQuery::new(u + shift, *y, 0.0, t, y0, shear);
            total += wy * wu * green2_unchecked(&q);
        }
    }
    total
}

/// `∫ G2 dx` at fixed `(y, t, y0)`.
pub fn marginal_x_2d(y: f64, t: f64, y0: f64, shear: f64) -> f64 {
    let b = shear_factor(shear, t);
    let center = 0.5 * shear * t * (y + y0);
    let (xs, xw) = padded_rule(center, (2.0 * t * b).sqrt(), 12.0);
    xs.iter()
        .zip(&xw)
        .map(|(x, w)| w * green2_unchecked(&KernelQuery::new(*x, y, 0.0, t, y0, shear)))
        .sum()
}

/// Chapman-Kolmogorov composition of the 2-D kernel: propagates a unit
/// source at `(x0, y0)` for time `s`, then for time `t`, by quadrature over
/// the intermediate point. Returns `(composed, direct)` at `(x, y)`.
pub fn semigroup_2d(x: f64, y: f64, x0: f64, y0: f64, s: f64, t: f64, shear: f64) -> (f64, f64) {
    let bs = shear_factor(shear, s);
    let ysd = (2.0 * s).sqrt();
    let inner = |yp: f64| -> f64 {
        let center = x0 + 0.5 * shear * s * (yp + y0);
        let (xs, xw) = padded_rule(center, (2.0 * s * bs).sqrt(), 10.0);
        xs.iter()
            .zip(&xw)
            .map(|(xp, w)| {
                let later = green2_unchecked(&KernelQuery::new(x - xp, y, 0.0, t, yp, shear));
                let earlier = green2_unchecked(&KernelQuery::new(xp - x0, yp, 0.0, s, y0, shear));
                w * later * earlier
            })
            .sum()
    };
    let composed = integrate(
        inner,
        y0 - 12.0 * ysd,
        y0 + 12.0 * ysd,
        &[y0, y],
        Tolerance::rel(1e-9),
    )
    .value;
    let direct = green2_unchecked(&KernelQuery::new(x - x0, y, 0.0, t + s, y0, shear));
    (composed, direct)
}
