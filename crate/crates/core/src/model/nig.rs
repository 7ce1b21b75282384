//! Normal–inverse-gamma parameters for univariate normal components.
//!
//! A component `N(μ, 1/ζ)` has prior `μ | ζ ~ N(ρ, ν/ζ)` and
//! `ζ ~ Gamma(a, b)` (shape `a`, rate `b`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::{check_observation, check_weight, Conjugate, Density, SuffStats, WEIGHT_EPSILON};
use crate::error::{check_finite, check_positive, DpmError, Result};

/// Which form of the rate recursion to apply in [`NigParams::update_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BUpdate {
    /// `b + ½{w y² + ρ²/ν − ρ'²/ν'}`, which agrees with the exact batch
    /// posterior at `w = 1`.
    #[default]
    Conjugate,
    /// `b + ½{w y² + ρ'²/ν' − ρ²/ν}`. Kept only to reproduce the
    /// discrepancy it causes; it is not a valid posterior update.
    SwappedSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    rho: f64,
    nu: f64,
    a: f64,
    b: f64,
}

impl NigParams {
    pub fn new(rho: f64, nu: f64, a: f64, b: f64) -> Result<Self> {
        let params = Self { rho, nu, a, b };
        params.validate()?;
        Ok(params)
    }

    /// Checks the invariants; useful after deserialization.
    pub fn validate(&self) -> Result<()> {
        check_finite("rho", self.rho)?;
        check_positive("nu", self.nu)?;
        check_positive("a", self.a)?;
        check_positive("b", self.b)?;
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Returns `(ρ, ν, a, b)`.
    pub fn params(&self) -> (f64, f64, f64, f64) {
        (self.rho, self.nu, self.a, self.b)
    }

    /// Absorbs observation `y` with allocation weight `w`.
    ///
    /// ```
    /// use dpm_seq::model::NigParams;
    ///
    /// let prior = NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
    /// let post = prior.update(2.0, 1.0).unwrap();
    /// assert_eq!(post.params(), (1.0, 0.5, 1.5, 2.0));
    /// ```
    pub fn update(&self, y: f64, w: f64) -> Result<Self> {
        self.update_with(y, w, BUpdate::Conjugate)
    }

    pub fn update_with(&self, y: f64, w: f64, form: BUpdate) -> Result<Self> {
        check_weight(w)?;
        if !y.is_finite() {
            return Err(DpmError::NonFiniteObservation);
        }
        if w < WEIGHT_EPSILON {
            return Ok(*self);
        }
        let prec = 1.0 / self.nu;
        let nu = 1.0 / (prec + w);
        let rho = nu * (prec * self.rho + w * y);
        let a = self.a + 0.5 * w;
        let b = match form {
            // Same quantity as ½{w y² + ρ²/ν − ρ'²/ν'}, without the cancellation.
            BUpdate::Conjugate => {
                let dev = y - self.rho;
                self.b + 0.5 * w * prec * dev * dev / (prec + w)
            }
            BUpdate::SwappedSign => {
                self.b + 0.5 * (w * y * y + rho * rho / nu - self.rho * self.rho / self.nu)
            }
        };
        Ok(Self { rho, nu, a, b })
    }

    /// Student-t predictive with `2a` degrees of freedom, location `ρ` and
    /// squared scale `b(ν + 1)/a`.
    pub fn predictive(&self) -> StudentT {
        StudentT::new(2.0 * self.a, self.rho, self.b * (self.nu + 1.0) / self.a)
    }

    pub fn predictive_density(&self, y: f64) -> f64 {
        self.predictive().density_at(y)
    }
}

impl Conjugate for NigParams {
    type Predictive = StudentT;

    fn dim(&self) -> usize {
        1
    }

    fn predictive(&self) -> StudentT {
        NigParams::predictive(self)
    }

    fn weighted_update(&self, y: &[f64], w: f64) -> Result<Self> {
        check_observation(y, 1)?;
        self.update(y[0], w)
    }

    fn posterior(&self, stats: &SuffStats) -> Result<Self> {
        if stats.dim() != 1 {
            return Err(DpmError::DimensionMismatch {
                expected: 1,
                found: stats.dim(),
            });
        }
        let n = stats.weight();
        if n <= 0.0 {
            return Ok(*self);
        }
        let prec = 1.0 / self.nu;
        let mean = stats.sum()[0] / n;
        let centered = (stats.outer()[0] - n * mean * mean).max(0.0);
        let dev = mean - self.rho;
        let post = Self {
            rho: (prec * self.rho + stats.sum()[0]) / (prec + n),
            nu: 1.0 / (prec + n),
            a: self.a + 0.5 * n,
            b: self.b + 0.5 * centered + 0.5 * prec * n * dev * dev / (prec + n),
        };
        post.validate()?;
        Ok(post)
    }

    fn kl_divergence(&self, reference: &Self) -> f64 {
        let (a1, b1, a0, b0) = (self.a, self.b, reference.a, reference.b);
        let gamma_part = (a1 - a0) * digamma(a1) - ln_gamma(a1)
            + ln_gamma(a0)
            + a0 * (b1.ln() - b0.ln())
            + a1 * (b0 - b1) / b1;
        let ratio = self.nu / reference.nu;
        let shift = self.rho - reference.rho;
        let normal_part = shift * shift / (2.0 * reference.nu) * a1 / b1
            + 0.5 * (ratio - 1.0 - ratio.ln());
        gamma_part + normal_part
    }

    fn expected_ln_likelihood(&self, y: &[f64]) -> f64 {
        let dev = y[0] - self.rho;
        0.5 * digamma(self.a)
            - 0.5 * self.b.ln()
            - 0.5 * (2.0 * PI).ln()
            - 0.5 * (self.nu + dev * dev * self.a / self.b)
    }
}

/// Univariate Student-t density with cached normalizing constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    dof: f64,
    loc: f64,
    scale2: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(dof: f64, loc: f64, scale2: f64) -> Self {
        let ln_norm = ln_gamma(0.5 * (dof + 1.0))
            - ln_gamma(0.5 * dof)
            - 0.5 * (dof * PI * scale2).ln();
        Self {
            dof,
            loc,
            scale2,
            ln_norm,
        }
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn loc(&self) -> f64 {
        self.loc
    }

    pub fn scale2(&self) -> f64 {
        self.scale2
    }

    pub fn ln_density_at(&self, y: f64) -> f64 {
        let z = y - self.loc;
        self.ln_norm - 0.5 * (self.dof + 1.0) * (z * z / (self.dof * self.scale2)).ln_1p()
    }

    pub fn density_at(&self, y: f64) -> f64 {
        self.ln_density_at(y).exp()
    }
}

impl Density for StudentT {
    fn ln_density(&self, y: &[f64]) -> f64 {
        self.ln_density_at(y[0])
    }
}
