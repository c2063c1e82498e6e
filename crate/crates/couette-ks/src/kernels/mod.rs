//! Closed-form kernels, wave-pattern functions and time envelopes.

mod envelope;
mod green;
mod params;
mod wave;

pub mod checks;

pub(crate) use envelope::regime;
pub(crate) use wave::{wave_envelope_unchecked, wave_o_unchecked, wave_x_unchecked};
pub use envelope::{chi, envelope_a, envelope_a1, envelope_a2, envelope_a3, lp_decay_exponent};
pub use green::{
    green_c_parabolic, green_couette_2d, green_couette_3d, grad_green_couette, shear_factor,
    yukawa, yukawa_gradient_bound, GreenGradient,
};
pub use params::{AppendixWitness, EnvelopeParams, Model, WaveParams};
pub use wave::{
    green_wave, green_wave_xy, wave_envelope, wave_envelope_2d, wave_o, wave_x,
};

use crate::error::{Error, Result};

/// A point, time, source ordinate and shear rate at which kernels are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelQuery {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
    /// Ordinate of the source point.
    pub y0: f64,
    /// Couette shear rate `A`.
    pub shear: f64,
}

impl KernelQuery {
    pub fn new(x: f64, y: f64, z: f64, t: f64, y0: f64, shear: f64) -> Self {
        KernelQuery {
            x,
            y,
            z,
            t,
            y0,
            shear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::domain(format!("time must be positive, got {}", self.t)));
        }
        if !(self.shear >= 0.0) || !self.shear.is_finite() {
            return Err(Error::domain(format!(
                "shear must be nonnegative, got {}",
                self.shear
            )));
        }
        Ok(())
    }

    /// Offset of `x` from the sheared characteristic through the source.
    pub fn sheared_offset(&self) -> f64 {
        self.x - 0.5 * self.shear * self.t * (self.y + self.y0)
    }
}
