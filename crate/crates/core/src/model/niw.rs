//! Normal–inverse-Wishart parameters for multivariate normal components.
//!
//! A component `N(μ, Σ)` has prior `Σ ~ IW(Ψ, df)` and `μ | Σ ~ N(m, Σ/κ)`.
//! In one dimension this reduces to [`NigParams`](super::NigParams) under
//! `κ = 1/ν`, `df = 2a`, `Ψ = 2b`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::{check_observation, check_weight, Conjugate, Density, SuffStats, WEIGHT_EPSILON};
use crate::error::{check_positive, DpmError, Result};

#[derive(Debug, Clone)]
struct Base {
    mean: DVector<f64>,
    kappa: f64,
    psi: DMatrix<f64>,
    df: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "NiwRepr", into = "NiwRepr")]
pub struct NiwParams {
    mean: DVector<f64>,
    kappa: f64,
    psi: DMatrix<f64>,
    df: f64,
    chol: Cholesky<f64, Dyn>,
    // Parameters these were derived from, and the weighted statistics
    // absorbed since; used to rebuild `psi` if the factor update degrades.
    base: Arc<Base>,
    stats: SuffStats,
}

#[derive(Serialize, Deserialize)]
struct NiwRepr {
    mean: Vec<f64>,
    kappa: f64,
    psi: Vec<Vec<f64>>,
    df: f64,
}

impl TryFrom<NiwRepr> for NiwParams {
    type Error = DpmError;

    fn try_from(r: NiwRepr) -> Result<Self> {
        let psi: Vec<f64> = r.psi.into_iter().flatten().collect();
        NiwParams::new(r.mean, r.kappa, psi, r.df)
    }
}

impl From<NiwParams> for NiwRepr {
    fn from(p: NiwParams) -> Self {
        let d = p.dim();
        NiwRepr {
            mean: p.mean.iter().copied().collect(),
            kappa: p.kappa,
            psi: (0..d)
                .map(|r| (0..d).map(|c| p.psi[(r, c)]).collect())
                .collect(),
            df: p.df,
        }
    }
}

impl PartialEq for NiwParams {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean
            && self.kappa == other.kappa
            && self.psi == other.psi
            && self.df == other.df
    }
}

impl NiwParams {
    /// `psi` is row-major `d × d`, symmetric positive-definite.
    pub fn new(mean: Vec<f64>, kappa: f64, psi: Vec<f64>, df: f64) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(DpmError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if psi.len() != d * d {
            return Err(DpmError::DimensionMismatch {
                expected: d * d,
                found: psi.len(),
            });
        }
        if mean.iter().chain(&psi).any(|v| !v.is_finite()) {
            return Err(DpmError::InvalidParameter {
                name: "mean/psi",
                value: f64::NAN,
                reason: "must be finite",
            });
        }
        check_positive("kappa", kappa)?;
        check_positive("df", df)?;
        if df <= d as f64 - 1.0 {
            return Err(DpmError::InvalidParameter {
                name: "df",
                value: df,
                reason: "must exceed dimension - 1",
            });
        }
        let psi = DMatrix::from_row_slice(d, d, &psi);
        let asym = (&psi - psi.transpose()).abs().max();
        if asym > 1e-12 * psi.abs().max().max(1.0) {
            return Err(DpmError::InvalidParameter {
                name: "psi",
                value: asym,
                reason: "must be symmetric",
            });
        }
        let chol = Cholesky::new(psi.clone()).ok_or(DpmError::NotPositiveDefinite)?;
        let mean = DVector::from_vec(mean);
        let base = Arc::new(Base {
            mean: mean.clone(),
            kappa,
            psi: psi.clone(),
            df,
        });
        Ok(Self {
            mean,
            kappa,
            psi,
            df,
            chol,
            base,
            stats: SuffStats::new(d),
        })
    }

    /// Isotropic prior `Ψ = scale · I`.
    pub fn isotropic(mean: Vec<f64>, kappa: f64, scale: f64, df: f64) -> Result<Self> {
        let d = mean.len();
        let mut psi = vec![0.0; d * d];
        for i in 0..d {
            psi[i * d + i] = scale;
        }
        Self::new(mean, kappa, psi, df)
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    /// Row-major copy of the scale matrix.
    pub fn psi(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|k| self.psi[(k / d, k % d)]).collect()
    }

    fn ln_det_psi(&self) -> f64 {
        2.0 * self.chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    fn from_base(base: &Arc<Base>, stats: SuffStats) -> Result<Self> {
        let d = base.mean.len();
        let w = stats.weight();
        let kappa = base.kappa + w;
        let mut psi = base.psi.clone();
        let mut mean = base.mean.clone();
        if w > 0.0 {
            let ybar = DVector::from_iterator(d, stats.sum().iter().map(|s| s / w));
            let outer = DMatrix::from_row_slice(d, d, stats.outer());
            let scatter = outer - &ybar * ybar.transpose() * w;
            let dev = &ybar - &base.mean;
            psi += scatter + &dev * dev.transpose() * (base.kappa * w / kappa);
            psi = (&psi + psi.transpose()) * 0.5;
            mean = (&base.mean * base.kappa + &ybar * w) / kappa;
        }
        let chol = Cholesky::new(psi.clone()).ok_or(DpmError::NotPositiveDefinite)?;
        Ok(Self {
            mean,
            kappa,
            psi,
            df: base.df + w,
            chol,
            base: Arc::clone(base),
            stats,
        })
    }

    fn as_base(&self) -> Arc<Base> {
        Arc::new(Base {
            mean: self.mean.clone(),
            kappa: self.kappa,
            psi: self.psi.clone(),
            df: self.df,
        })
    }

    fn quad_inv_psi(&self, v: &DVector<f64>) -> f64 {
        let z = self.chol.l_dirty().solve_lower_triangular(v).expect("nonsingular factor");
        z.norm_squared()
    }
}

fn ln_mv_gamma(d: usize, x: f64) -> f64 {
    let df = d as f64;
    df * (df - 1.0) / 4.0 * PI.ln()
        + (1..=d).map(|i| ln_gamma(x + (1.0 - i as f64) / 2.0)).sum::<f64>()
}

fn mv_digamma(d: usize, x: f64) -> f64 {
    (1..=d).map(|i| digamma(x + (1.0 - i as f64) / 2.0)).sum()
}

impl Conjugate for NiwParams {
    type Predictive = MvStudentT;

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn predictive(&self) -> MvStudentT {
        let d = self.dim();
        let dof = self.df - d as f64 + 1.0;
        let c = (self.kappa + 1.0) / (self.kappa * dof);
        let l = self.chol.l() * c.sqrt();
        MvStudentT::from_factor(dof, self.mean.as_slice().to_vec(), &l)
    }

    fn weighted_update(&self, y: &[f64], w: f64) -> Result<Self> {
        check_weight(w)?;
        check_observation(y, self.dim())?;
        if w < WEIGHT_EPSILON {
            return Ok(self.clone());
        }
        let yv = DVector::from_column_slice(y);
        let kappa = self.kappa + w;
        let dev = &yv - &self.mean;
        let sigma = self.kappa * w / kappa;
        let mut stats = self.stats.clone();
        stats.add(y, w);

        let mut chol = self.chol.clone();
        chol.rank_one_update(&dev, sigma);
        let healthy = chol
            .l_dirty()
            .diagonal()
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !healthy {
            return Self::from_base(&self.base, stats);
        }
        let mut psi = &self.psi + &dev * dev.transpose() * sigma;
        psi = (&psi + psi.transpose()) * 0.5;
        Ok(Self {
            mean: &self.mean + dev * (w / kappa),
            kappa,
            psi,
            df: self.df + w,
            chol,
            base: Arc::clone(&self.base),
            stats,
        })
    }

    fn posterior(&self, stats: &SuffStats) -> Result<Self> {
        if stats.dim() != self.dim() {
            return Err(DpmError::DimensionMismatch {
                expected: self.dim(),
                found: stats.dim(),
            });
        }
        Self::from_base(&self.as_base(), stats.clone())
    }

    fn kl_divergence(&self, reference: &Self) -> f64 {
        let d = self.dim();
        let df_d = d as f64;
        let (n1, n0) = (self.df, reference.df);
        // Inverse-Wishart part, tr(Ψ₀ Ψ₁⁻¹) through the factor of Ψ₁.
        let trace = self.chol.solve(&reference.psi).trace();
        let iw = 0.5 * n0 * (self.ln_det_psi() - reference.ln_det_psi())
            + 0.5 * n1 * (trace - df_d)
            + ln_mv_gamma(d, 0.5 * n0)
            - ln_mv_gamma(d, 0.5 * n1)
            + 0.5 * (n1 - n0) * mv_digamma(d, 0.5 * n1);
        let ratio = reference.kappa / self.kappa;
        let shift = &self.mean - &reference.mean;
        let normal = 0.5
            * (df_d * ratio - df_d - df_d * ratio.ln()
                + reference.kappa * n1 * self.quad_inv_psi(&shift));
        iw + normal
    }

    fn expected_ln_likelihood(&self, y: &[f64]) -> f64 {
        let d = self.dim();
        let df_d = d as f64;
        let e_ln_det_sigma = self.ln_det_psi() - df_d * 2f64.ln() - mv_digamma(d, 0.5 * self.df);
        let dev = DVector::from_column_slice(y) - &self.mean;
        let e_quad = df_d / self.kappa + self.df * self.quad_inv_psi(&dev);
        -0.5 * df_d * (2.0 * PI).ln() - 0.5 * e_ln_det_sigma - 0.5 * e_quad
    }
}

/// Multivariate Student-t density with a cached lower-triangular scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MvStudentT {
    dof: f64,
    loc: Vec<f64>,
    // Row-major lower factor of the scale matrix.
    factor: Vec<f64>,
    ln_norm: f64,
}

impl MvStudentT {
    fn from_factor(dof: f64, loc: Vec<f64>, l: &DMatrix<f64>) -> Self {
        let d = loc.len();
        let df_d = d as f64;
        let factor: Vec<f64> = (0..d * d).map(|k| l[(k / d, k % d)]).collect();
        let ln_det_half: f64 = (0..d).map(|i| l[(i, i)].ln()).sum();
        let ln_norm = ln_gamma(0.5 * (dof + df_d))
            - ln_gamma(0.5 * dof)
            - 0.5 * df_d * (dof * PI).ln()
            - ln_det_half;
        Self {
            dof,
            loc,
            factor,
            ln_norm,
        }
    }

    /// Builds the density from a row-major positive-definite scale matrix.
    pub fn new(dof: f64, loc: Vec<f64>, scale: &[f64]) -> Result<Self> {
        let d = loc.len();
        check_positive("dof", dof)?;
        let m = DMatrix::from_row_slice(d, d, scale);
        let chol = Cholesky::new(m).ok_or(DpmError::NotPositiveDefinite)?;
        Ok(Self::from_factor(dof, loc, &chol.l()))
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn loc(&self) -> &[f64] {
        &self.loc
    }
}

impl Density for MvStudentT {
    fn ln_density(&self, y: &[f64]) -> f64 {
        let d = self.loc.len();
        let mut z = [0.0f64; 8];
        let mut heap;
        let z: &mut [f64] = if d <= z.len() {
            &mut z[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut quad = 0.0;
        for r in 0..d {
            let row = &self.factor[r * d..r * d + r];
            let acc: f64 = row.iter().zip(z.iter()).map(|(l, v)| l * v).sum();
            z[r] = (y[r] - self.loc[r] - acc) / self.factor[r * d + r];
            quad += z[r] * z[r];
        }
        self.ln_norm - 0.5 * (self.dof + d as f64) * (quad / self.dof).ln_1p()
    }
}
