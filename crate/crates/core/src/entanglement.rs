//! Entanglement diagnostics: how much the optimal seed state is entangled
//! across channel uses, and where the two-use environment stops being
//! separable.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{env_local_covariance, omega_spectrum, to_local_basis, ChannelConfig, OmegaSpectrum};
use crate::entropic::EncodingParams;
use crate::error::{Error, Result};
use crate::gaussian::{
    ppt_min_symplectic, reduce_to_mode, single_mode_entropy, GeneralCov, TwoModeCov,
    VACUUM_VARIANCE,
};
use crate::solve::find_root;

/// Seed state of an encoding: a product of squeezed thermal states in the
/// global basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedState {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub spectrum: OmegaSpectrum,
}

impl SeedState {
    pub fn new(t: Vec<f64>, r: Vec<f64>, spectrum: OmegaSpectrum) -> Result<Self> {
        let n = spectrum.len();
        if t.len() != n || r.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: t.len().min(r.len()),
            });
        }
        if let Some(&bad) = t.iter().find(|&&x| x.is_nan() || x < 0.0) {
            return Err(Error::Domain {
                what: "seed excitation",
                value: bad,
            });
        }
        if let Some(&bad) = r.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain {
                what: "seed squeezing",
                value: bad,
            });
        }
        Ok(Self { t, r, spectrum })
    }

    /// Seed of `params` with the standard tridiagonal basis for its size.
    pub fn from_params(params: &EncodingParams) -> Result<Self> {
        let spectrum = omega_spectrum(params.modes.len());
        Self::new(
            params.modes.iter().map(|m| m.t).collect(),
            params.modes.iter().map(|m| m.r).collect(),
            spectrum,
        )
    }

    /// Block-diagonal covariance in the global basis.
    pub fn global_covariance(&self) -> GeneralCov {
        let n = self.t.len();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            let scale = self.t[j] + VACUUM_VARIANCE;
            m[(j, j)] = scale * self.r[j].exp();
            m[(n + j, n + j)] = scale * (-self.r[j]).exp();
        }
        GeneralCov { modes: n, matrix: m }
    }
}

/// Covariance of the seed in the local (per-use) basis.
pub fn seed_local_covariance(seed: &SeedState) -> Result<GeneralCov> {
    to_local_basis(&seed.global_covariance(), &seed.spectrum)
}

/// Mean von Neumann entropy of the single-use marginals of the seed.
pub fn mean_reduced_entropy(seed: &SeedState) -> Result<f64> {
    let cov = seed_local_covariance(seed)?;
    let mut total = 0.0;
    for k in 0..cov.modes {
        total += single_mode_entropy(&reduce_to_mode(&cov, k)?)?;
    }
    Ok(total / cov.modes as f64)
}

/// Smallest symplectic eigenvalue of the partially transposed two-use
/// environment; below 1/2 the environment is entangled.
pub fn env_ppt_eigenvalue(s: f64, temp: f64) -> Result<f64> {
    let cfg = ChannelConfig::new(2, 1.0, s, temp, 0.0)?;
    let cov = TwoModeCov::from_general(&env_local_covariance(&cfg))?;
    ppt_min_symplectic(&cov)
}

/// Closed form of the separability boundary, `T = (e^{|s|} − 1)/2`.
pub fn separability_boundary_closed_form(s: f64) -> f64 {
    0.5 * (s.abs().exp() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityPoint {
    pub s: f64,
    pub temp: f64,
    pub ppt_eigenvalue: f64,
    pub separable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub s: f64,
    /// Temperature where the PPT eigenvalue crosses 1/2, found numerically.
    pub temp: f64,
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityScan {
    pub points: Vec<SeparabilityPoint>,
    pub boundary: Vec<BoundaryPoint>,
}

/// Temperature at which the two-use environment with squeezing `s` becomes
/// separable.
pub fn separability_boundary(s: f64) -> Result<f64> {
    let excess = |temp: f64| env_ppt_eigenvalue(s, temp).map(|nu| nu - VACUUM_VARIANCE);
    let f0 = excess(0.0)?;
    if f0 >= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut f_hi = excess(hi)?;
    while f_hi < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Convergence(format!(
                "no separable temperature found for s = {s}"
            )));
        }
        f_hi = excess(hi)?;
    }
    let mut failure = None;
    let mut f = |temp: f64| match excess(temp) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let root = find_root(&mut f, 0.0, hi, f0, f_hi, 1e-14, 200);
    match failure {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

/// PPT verdict on an `s × T` grid plus the boundary curve at every `s`.
pub fn env_separability_scan(s_grid: &[f64], temp_grid: &[f64]) -> Result<SeparabilityScan> {
    if s_grid.is_empty() || temp_grid.is_empty() {
        return Err(Error::InvalidScan("separability grids must be non-empty".into()));
    }
    let mut points = Vec::with_capacity(s_grid.len() * temp_grid.len());
    for &s in s_grid {
        for &temp in temp_grid {
            let nu = env_ppt_eigenvalue(s, temp)?;
            points.push(SeparabilityPoint {
                s,
                temp,
                ppt_eigenvalue: nu,
                separable: nu >= VACUUM_VARIANCE,
            });
        }
    }
    let boundary = s_grid
        .iter()
        .map(|&s| {
            Ok(BoundaryPoint {
                s,
                temp: separability_boundary(s)?,
                closed_form: separability_boundary_closed_form(s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparabilityScan { points, boundary })
}
