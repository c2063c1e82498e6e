use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model variant: `epsilon = 1` (parabolic-parabolic) or `epsilon = 0`
/// (parabolic-elliptic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ParabolicParabolic,
    ParabolicElliptic,
}

impl Model {
    pub fn from_epsilon(eps: u8) -> Result<Self> {
        match eps {
            0 => Ok(Model::ParabolicElliptic),
            1 => Ok(Model::ParabolicParabolic),
            _ => Err(Error::param(format!("epsilon must be 0 or 1, got {eps}"))),
        }
    }

    pub fn epsilon(self) -> u8 {
        match self {
            Model::ParabolicElliptic => 0,
            Model::ParabolicParabolic => 1,
        }
    }
}

/// Constants of the pointwise envelope and its ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub model: Model,
    pub shear: f64,
    pub theta: f64,
    pub gamma: f64,
    /// Amplitude of the initial density.
    pub c0: f64,
    /// Decay width of the initial data.
    pub c_star: f64,
    /// Gradient smallness of the initial chemo-attractant.
    pub c0_star: f64,
    /// Derivative-envelope constant of the kernel.
    pub c1: f64,
    pub c1_prime: f64,
    pub c1_dblprime: f64,
}

impl EnvelopeParams {
    /// Parameters with the smallest admissible envelope widths.
    pub fn new(model: Model, shear: f64, theta: f64, gamma: f64) -> Self {
        let c1 = 2.0;
        let c_star = 2.0;
        let w = Self::min_width(c1, c_star);
        EnvelopeParams {
            model,
            shear,
            theta,
            gamma,
            c0: 2.0,
            c_star,
            c0_star: 0.0,
            c1,
            c1_prime: w,
            c1_dblprime: w,
        }
    }

    /// `max{16 C1, 9 C*, 60}`.
    pub fn min_width(c1: f64, c_star: f64) -> f64 {
        (16.0 * c1).max(9.0 * c_star).max(60.0)
    }

    pub fn epsilon0(&self) -> f64 {
        (1.0 + self.gamma) * (1.5 * self.theta - 1.0) / 2.0
    }

    /// Exponent ranges shared by every estimate: `θ ∈ (2/3, 1)`, `γ ∈ (0, 1)`.
    pub fn check_exponents(&self) -> Result<()> {
        if !(self.shear >= 0.0) || !self.shear.is_finite() {
            return Err(Error::param(format!("shear must be nonnegative, got {}", self.shear)));
        }
        if !(self.theta > 2.0 / 3.0 && self.theta < 1.0) {
            return Err(Error::param(format!("theta must lie in (2/3, 1), got {}", self.theta)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::param(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        Ok(())
    }

    /// Full validation of the admissible ranges. Returns advisory warnings for the
    /// parabolic-parabolic shear window, which is never an error.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.check_exponents()?;
        match self.model {
            Model::ParabolicParabolic => {
                if !(self.gamma > 1.0 / 3.0 && self.gamma <= 0.5) {
                    return Err(Error::param(format!(
                        "parabolic-parabolic gamma must lie in (1/3, 1/2], got {}",
                        self.gamma
                    )));
                }
            }
            Model::ParabolicElliptic => {
                if !(self.gamma > 0.0 && self.gamma <= 0.5) {
                    return Err(Error::param(format!(
                        "parabolic-elliptic gamma must lie in (0, 1/2], got {}",
                        self.gamma
                    )));
                }
            }
        }
        if !(self.c0 > 1.0) {
            return Err(Error::param(format!("C0 must exceed 1, got {}", self.c0)));
        }
        if !(self.c_star > 1.0) {
            return Err(Error::param(format!("C* must exceed 1, got {}", self.c_star)));
        }
        if !(self.c1 > 1.0) {
            return Err(Error::param(format!("C1 must exceed 1, got {}", self.c1)));
        }
        let w = Self::min_width(self.c1, self.c_star);
        if self.c1_prime < w || self.c1_dblprime < w {
            return Err(Error::param(format!(
                "envelope widths ({}, {}) below max{{16 C1, 9 C*, 60}} = {w}",
                self.c1_prime, self.c1_dblprime
            )));
        }
        let mut warnings = Vec::new();
        if self.model == Model::ParabolicParabolic {
            if self.shear * self.c0_star >= self.c0 {
                warnings.push(format!(
                    "shear window violated: A*C0* = {} >= C0 = {}",
                    self.shear * self.c0_star,
                    self.c0
                ));
            }
            if self.shear <= self.c0 {
                warnings.push(format!(
                    "shear window violated: A = {} does not dominate C0 = {}",
                    self.shear, self.c0
                ));
            }
        }
        Ok(warnings)
    }
}

/// Splitting parameters certifying the interaction-lemma constraint systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixWitness {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

/// Shape constants for kernel and interaction envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub c1: f64,
    pub c_prime: f64,
    pub c_dblprime: f64,
    /// Broadening factor of the interaction lemmas, in `(1, 3/2]`.
    pub broadening: f64,
}

fn ratio_sq(theta: f64) -> f64 {
    let r = theta / (theta - 1.0);
    r * r
}

impl WaveParams {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [
            ("D1", self.d1),
            ("D2", self.d2),
            ("D3", self.d3),
            ("C'", self.c_prime),
            ("C''", self.c_dblprime),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{n} must be positive, got {v}")));
            }
        }
        if !(self.c1 > 1.0) {
            return Err(Error::param(format!("C1 must exceed 1, got {}", self.c1)));
        }
        if !(self.broadening > 1.0 && self.broadening <= 1.5) {
            return Err(Error::param(format!(
                "broadening must lie in (1, 3/2], got {}",
                self.broadening
            )));
        }
        Ok(())
    }

    /// Gaussian-Gaussian constraint system (θ2², θ3² ≤ 4/3).
    pub fn gaussian_system_holds(&self, w: AppendixWitness) -> bool {
        let lim = 1.5 * self.c_prime;
        let q2 = ratio_sq(w.theta2);
        w.theta1 > 1.0
            && w.theta2 > 1.0
            && w.theta3 > 1.0
            && w.theta2 * w.theta2 <= 4.0 / 3.0 + 1e-12
            && w.theta3 * w.theta3 <= 4.0 / 3.0 + 1e-12
            && 4.0 * self.c1 * ratio_sq(w.theta1) * q2 <= lim
            && 9.0 * self.c_dblprime * w.theta1 * w.theta1 * q2 <= lim
            && 8.0 * self.c1 * ratio_sq(w.theta3) <= 1.5 * self.c_dblprime
    }

    /// Exponential-exponential constraint system (θ2, θ3 ≤ 6/5).
    pub fn exponential_system_holds(&self, w: AppendixWitness) -> bool {
        let lim = 1.5 * self.c_prime;
        let q2 = ratio_sq(w.theta2);
        w.theta1 > 1.0
            && w.theta2 > 1.0
            && w.theta3 > 1.0
            && w.theta2 <= 1.2 + 1e-12
            && w.theta3 <= 1.2 + 1e-12
            && 4.0 * self.c1 * ratio_sq(w.theta1) * q2 <= lim
            && 8.0 * self.c1 * w.theta1 * w.theta1 * q2 <= lim
            && 10.0 * self.c_dblprime * w.theta1 * w.theta2 / (w.theta2 - 1.0) <= lim
            && 8.0 * self.c1 * ratio_sq(w.theta3) <= 1.5 * self.c_dblprime
    }

    /// Searches the splitting parameters for witnesses of both systems.
    pub fn find_witnesses(&self) -> Option<(AppendixWitness, AppendixWitness)> {
        let search = |t23: f64, holds: &dyn Fn(AppendixWitness) -> bool| {
            (1..4000).find_map(|i| {
                let w = AppendixWitness {
                    theta1: 1.0 + i as f64 * 0.005,
                    theta2: t23,
                    theta3: t23,
                };
                holds(w).then_some(w)
            })
        };
        let g = search((4.0f64 / 3.0).sqrt(), &|w| self.gaussian_system_holds(w))?;
        let e = search(1.2, &|w| self.exponential_system_holds(w))?;
        Some((g, e))
    }

    /// Whether the spanwise interaction requirement `C'' > 90 C1` holds.
    pub fn spanwise_requirement_holds(&self) -> bool {
        self.c_dblprime > 90.0 * self.c1
    }

    /// Smallest `(C', C'')` on a 1% grid meeting every interaction requirement
    /// for the given `C1`, with unit kernel diffusivities and `B = 3/2`.
    pub fn admissible(c1: f64) -> Self {
        let mut p = WaveParams {
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            c1,
            c_prime: 1.0,
            c_dblprime: 90.0 * c1 * 1.01,
            broadening: 1.5,
        };
        let q3g = ratio_sq((4.0f64 / 3.0).sqrt());
        let q3e = ratio_sq(1.2);
        p.c_dblprime = p.c_dblprime.max(8.0 * c1 * q3g.max(q3e) / 1.5 * 1.01);
        p.c_prime = p.c_dblprime;
        while p.find_witnesses().is_none() {
            p.c_prime *= 1.01;
        }
        p
    }
}
