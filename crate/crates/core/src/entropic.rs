//! Entropic quantities of one global mode of the channel.
//!
//! Every global mode is an independent lossy channel whose environment is the
//! squeezed thermal state `(T + 1/2) diag(e^s, e^-s)`. The input seed is
//! `(t + 1/2) diag(e^r, e^-r)`; for classical communication it is displaced
//! with Gaussian noise `diag(c_q, c_p)`.

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::channel::GlobalEnvMode;
use crate::error::{Error, Result};
use crate::gaussian::{
    g, g_derivative, single_mode_entropy, von_neumann_entropy, TwoModeCov, PHYSICALITY_TOL,
    VACUUM_VARIANCE,
};

/// Tolerance on the per-mode energy identity.
pub const ENERGY_TOL: f64 = 1e-9;

/// Encoding of one global mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEncoding {
    /// Seed thermal excitation.
    pub t: f64,
    /// Seed squeezing.
    pub r: f64,
    /// Displacement noise variance along q.
    pub c_q: f64,
    /// Displacement noise variance along p.
    pub c_p: f64,
    /// Photons allocated to the mode.
    pub photons: f64,
}

impl ModeEncoding {
    /// Seed-only encoding using its whole allocation, `(t+1/2) cosh r = N_j + 1/2`.
    pub fn seed(t: f64, r: f64) -> Self {
        Self {
            t,
            r,
            c_q: 0.0,
            c_p: 0.0,
            photons: (t + VACUUM_VARIANCE) * r.cosh() - VACUUM_VARIANCE,
        }
    }

    /// Mean photon number actually carried by the ensemble.
    pub fn energy(&self) -> f64 {
        0.5 * (self.c_q + self.c_p) + (self.t + VACUUM_VARIANCE) * self.r.cosh() - VACUUM_VARIANCE
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.is_nan() || self.t < 0.0 || !self.r.is_finite() {
            return Err(Error::Constraint(format!(
                "seed (t = {}, r = {}) is not admissible",
                self.t, self.r
            )));
        }
        if !(self.c_q >= 0.0 && self.c_p >= 0.0) {
            return Err(Error::Constraint(format!(
                "noise variances ({}, {}) must be non-negative",
                self.c_q, self.c_p
            )));
        }
        let gap = self.energy() - self.photons;
        if gap.abs() > ENERGY_TOL * self.photons.max(1.0) {
            return Err(Error::Constraint(format!(
                "energy {} differs from allocation {}",
                self.energy(),
                self.photons
            )));
        }
        Ok(())
    }

    /// The same encoding seen by the mirrored environment `s → −s`.
    pub fn mirrored(&self) -> Self {
        Self {
            r: -self.r,
            c_q: self.c_p,
            c_p: self.c_q,
            ..*self
        }
    }
}

/// Encoding of all global modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingParams {
    pub modes: Vec<ModeEncoding>,
}

impl EncodingParams {
    pub fn mean_photons(&self) -> f64 {
        if self.modes.is_empty() {
            return 0.0;
        }
        self.modes.iter().map(|m| m.photons).sum::<f64>() / self.modes.len() as f64
    }

    /// Checks every per-mode identity and, if given, the budget `(1/n) Σ N_j ≤ N`.
    pub fn validate(&self, nbar: Option<f64>) -> Result<()> {
        for m in &self.modes {
            m.validate()?;
        }
        if let Some(nbar) = nbar {
            let mean = self.mean_photons();
            if mean > nbar + ENERGY_TOL * nbar.max(1.0) {
                return Err(Error::Constraint(format!(
                    "mean allocation {mean} exceeds the budget {nbar}"
                )));
            }
        }
        Ok(())
    }
}

/// Output entropy of a single mode with covariance determinant `det`.
fn entropy_of_det(det: f64) -> f64 {
    g(det.max(0.0).sqrt() - VACUUM_VARIANCE)
}

fn entropy_of_det_derivative(det: f64) -> f64 {
    let nu = det.sqrt();
    g_derivative(nu - VACUUM_VARIANCE) / (2.0 * nu)
}

/// Diagonal of the channel output for a seed `(a, b)`: `η σ + (1 − η) V`.
fn output_diagonal(a: f64, b: f64, mode: &GlobalEnvMode, eta: f64) -> (f64, f64) {
    (
        eta * a + (1.0 - eta) * mode.q_variance(),
        eta * b + (1.0 - eta) * mode.p_variance(),
    )
}

/// Holevo information of one mode (bits).
pub fn holevo_chi_mode(enc: &ModeEncoding, mode: &GlobalEnvMode, eta: f64) -> f64 {
    let scale = enc.t + VACUUM_VARIANCE;
    let (a, b) = (scale * enc.r.exp(), scale * (-enc.r).exp());
    let (x, y) = output_diagonal(a, b, mode, eta);
    let ensemble = (x + eta * enc.c_q) * (y + eta * enc.c_p);
    entropy_of_det(ensemble) - entropy_of_det(x * y)
}

/// Holevo information summed over the global modes (bits per block of `n` uses).
pub fn holevo_chi(params: &EncodingParams, env: &[GlobalEnvMode], eta: f64) -> Result<f64> {
    if params.modes.len() != env.len() {
        return Err(Error::Dimension {
            expected: env.len(),
            got: params.modes.len(),
        });
    }
    check_eta(eta)?;
    params.validate(None)?;
    Ok(params
        .modes
        .iter()
        .zip(env)
        .map(|(enc, mode)| holevo_chi_mode(enc, mode, eta))
        .sum())
}

/// Gradient of [`holevo_chi_mode`] with respect to `(t, r, c_q, c_p)`.
pub fn holevo_chi_gradient(enc: &ModeEncoding, mode: &GlobalEnvMode, eta: f64) -> [f64; 4] {
    let (er, emr) = (enc.r.exp(), (-enc.r).exp());
    let scale = enc.t + VACUUM_VARIANCE;
    let (a, b) = (scale * er, scale * emr);
    let (x, y) = output_diagonal(a, b, mode, eta);
    let (xb, yb) = (x + eta * enc.c_q, y + eta * enc.c_p);

    let (dx_dt, dx_dr) = (eta * er, eta * a);
    let (dy_dt, dy_dr) = (eta * emr, -eta * b);

    let det = x * y;
    let det_bar = xb * yb;
    let h = entropy_of_det_derivative(det);
    let h_bar = entropy_of_det_derivative(det_bar);

    let d_dt = h_bar * (dx_dt * yb + xb * dy_dt) - h * (dx_dt * y + x * dy_dt);
    let d_dr = h_bar * (dx_dr * yb + xb * dy_dr) - h * (dx_dr * y + x * dy_dr);
    [d_dt, d_dr, h_bar * eta * yb, h_bar * eta * xb]
}

/// Invariants of the seed purification after the channel.
struct PurifiedOutput {
    det_out: f64,
    nu_plus: f64,
    nu_minus: f64,
}

/// Intermediate terms shared by the value and its gradient.
struct PurifiedTerms {
    a: f64,
    b: f64,
    x: f64,
    y: f64,
    p: f64,
    q: f64,
    inv: f64,
    disc: f64,
}

fn purified_terms(t: f64, r: f64, mode: &GlobalEnvMode, eta: f64) -> PurifiedTerms {
    let scale = t + VACUUM_VARIANCE;
    let (a, b) = (scale * r.exp(), scale * (-r).exp());
    let (x, y) = output_diagonal(a, b, mode, eta);
    // x_j^2 = ab - 1/4 = t(t+1); det C = -η x_j^2
    let x2 = t * (t + 1.0);
    // q-q and p-p sectors decouple: det τ' = (x b - η x_j²)(y a - η x_j²)
    let p = x * b - eta * x2;
    let q = y * a - eta * x2;
    let inv = x * y + scale * scale - 2.0 * eta * x2;
    // inv² − 4pq rewritten without the cancellation that costs √ε near ν₊ = ν₋
    let disc_sq = (x * y - a * b).powi(2)
        + 4.0 * eta * x2 * (1.0 - eta).powi(2) * (a - mode.q_variance()) * (mode.p_variance() - b);
    let disc = disc_sq.max(0.0).sqrt();
    PurifiedTerms {
        a,
        b,
        x,
        y,
        p,
        q,
        inv,
        disc,
    }
}

fn purified_output(terms: &PurifiedTerms) -> PurifiedOutput {
    let det = (terms.p * terms.q).max(0.0);
    let nu_plus = (0.5 * (terms.inv + terms.disc)).max(0.0).sqrt();
    let nu_minus = if nu_plus > 0.0 { det.sqrt() / nu_plus } else { 0.0 };
    PurifiedOutput {
        det_out: terms.x * terms.y,
        nu_plus,
        nu_minus,
    }
}

/// Coherent information without physicality checks.
pub fn coherent_information_unchecked(t: f64, r: f64, mode: &GlobalEnvMode, eta: f64) -> f64 {
    // a pure seed has exchange entropy equal to the output entropy
    if t == 0.0 {
        return 0.0;
    }
    let out = purified_output(&purified_terms(t, r, mode, eta));
    entropy_of_det(out.det_out)
        - g(out.nu_plus - VACUUM_VARIANCE)
        - g(out.nu_minus - VACUUM_VARIANCE)
}

/// Coherent information `J = S(output) − S(exchange)` of one global mode.
/// May be negative.
pub fn coherent_information(t: f64, r: f64, mode: &GlobalEnvMode, eta: f64) -> Result<f64> {
    check_seed(t, r)?;
    check_eta(eta)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let out = purified_output(&purified_terms(t, r, mode, eta));
    if out.nu_minus < VACUUM_VARIANCE - PHYSICALITY_TOL {
        return Err(Error::Internal(format!(
            "entropy-exchange state is unphysical (nu_- = {})",
            out.nu_minus
        )));
    }
    Ok(entropy_of_det(out.det_out)
        - g(out.nu_plus - VACUUM_VARIANCE)
        - g(out.nu_minus - VACUUM_VARIANCE))
}

/// Gradient of the coherent information with respect to `(t, r)`.
pub fn coherent_information_gradient(t: f64, r: f64, mode: &GlobalEnvMode, eta: f64) -> [f64; 2] {
    let tm = purified_terms(t, r, mode, eta);
    let out = purified_output(&tm);
    let (er, emr) = (r.exp(), (-r).exp());
    let scale = t + VACUUM_VARIANCE;

    // (d/dt, d/dr) of each building block
    let da = [er, tm.a];
    let db = [emr, -tm.b];
    let dx = [eta * da[0], eta * da[1]];
    let dy = [eta * db[0], eta * db[1]];
    let dx2 = [2.0 * t + 1.0, 0.0];

    let h = entropy_of_det_derivative(out.det_out);
    let gp = g_derivative(out.nu_plus - VACUUM_VARIANCE);
    let gm = g_derivative(out.nu_minus - VACUUM_VARIANCE);

    let mut grad = [0.0; 2];
    for i in 0..2 {
        let d_det = dx[i] * tm.y + tm.x * dy[i];
        let dp = dx[i] * tm.b + tm.x * db[i] - eta * dx2[i];
        let dq = dy[i] * tm.a + tm.y * da[i] - eta * dx2[i];
        let d_delta = dp * tm.q + tm.p * dq;
        let d_scale_sq = if i == 0 { 2.0 * scale } else { 0.0 };
        let d_inv = d_det + d_scale_sq - 2.0 * eta * dx2[i];
        let d_disc = if tm.disc > 0.0 {
            (tm.inv * d_inv - 2.0 * d_delta) / tm.disc
        } else {
            0.0
        };
        let d_nu_plus = 0.25 * (d_inv + d_disc) / out.nu_plus;
        let d_nu_minus = 0.25 * (d_inv - d_disc) / out.nu_minus;
        grad[i] = h * d_det - gp * d_nu_plus - gm * d_nu_minus;
    }
    grad
}

/// Quantum mutual information `I = g(t) + J`.
pub fn quantum_mutual_information(t: f64, r: f64, mode: &GlobalEnvMode, eta: f64) -> Result<f64> {
    Ok(g(t) + coherent_information(t, r, mode, eta)?)
}

pub fn quantum_mutual_information_unchecked(t: f64, r: f64, mode: &GlobalEnvMode, eta: f64) -> f64 {
    g(t) + coherent_information_unchecked(t, r, mode, eta)
}

/// Gradient of the quantum mutual information with respect to `(t, r)`.
pub fn quantum_mutual_information_gradient(
    t: f64,
    r: f64,
    mode: &GlobalEnvMode,
    eta: f64,
) -> [f64; 2] {
    let [dt, dr] = coherent_information_gradient(t, r, mode, eta);
    [dt + g_derivative(t), dr]
}

/// Single-mode covariance with squeezing axis rotated by `phi`, giving a
/// `q–p` correlation term.
pub fn rotated_seed(t: f64, r: f64, phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    let rot = Matrix2::new(c, -s, s, c);
    let scale = t + VACUUM_VARIANCE;
    rot * Matrix2::new(scale * r.exp(), 0.0, 0.0, scale * (-r).exp()) * rot.transpose()
}

/// Coherent information of an arbitrary single-mode input covariance, computed
/// by purifying it and eigensolving the 4×4 output numerically.
pub fn coherent_information_numeric(
    sigma: &Matrix2<f64>,
    mode: &GlobalEnvMode,
    eta: f64,
) -> Result<f64> {
    check_eta(eta)?;
    let nu = sigma.determinant().max(0.0).sqrt();
    if nu < VACUUM_VARIANCE - PHYSICALITY_TOL {
        return Err(Error::Unphysical { nu });
    }
    // σ = ν S Sᵀ with S = (σ/ν)^{1/2}, symplectic since det = 1
    let eig = SymmetricEigen::new(sigma / nu);
    let root = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(|e| e.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let x = (nu * nu - 0.25).max(0.0).sqrt();
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let env = mode.cov().matrix();
    let out = TwoModeCov::new(
        sigma * eta + env * (1.0 - eta),
        Matrix2::identity() * nu,
        z * root.transpose() * (x * eta.sqrt()),
    );
    let s_out = single_mode_entropy(&out.a)?;
    let s_exchange = von_neumann_entropy(&out.to_general())?;
    Ok(s_out - s_exchange)
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "transmissivity",
            value: eta,
        })
    }
}

fn check_seed(t: f64, r: f64) -> Result<()> {
    if t >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "seed excitation",
            value: t,
        })
    }
}
