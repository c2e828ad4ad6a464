//! Closed-form capacity bounds, their optimal parameters, validity ranges and
//! the infinite-memory limits.

use serde::{Deserialize, Serialize};

use crate::allocation::{allocate_photons, ModeValue};
use crate::channel::{env_global_modes, local_effective_temperatures, ChannelConfig};
use crate::error::{Error, Result};
use crate::gaussian::{g, g_derivative, VACUUM_VARIANCE};

/// Optimal parameters of one global mode for an analytic bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticModeParams {
    pub photons: f64,
    pub t: f64,
    pub r: f64,
    pub c_q: f64,
    pub c_p: f64,
}

/// An analytic bound with its validity flag. Outside the validity range the
/// value is still reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBound {
    pub value: f64,
    pub valid: bool,
    pub per_mode: Vec<AnalyticModeParams>,
}

/// `M(s, T) = (1/n)(T + 1/2) Σ_k cosh(s_k) − 1/2`.
pub fn m_parameter(cfg: &ChannelConfig) -> f64 {
    let modes = env_global_modes(cfg);
    let mean_cosh = modes.iter().map(|m| m.s.cosh()).sum::<f64>() / modes.len() as f64;
    (cfg.temp + VACUUM_VARIANCE) * mean_cosh - VACUUM_VARIANCE
}

/// Water-filling allocation of the analytic regime:
/// `N_j = N − k(T+1/2)cosh s_j + k(M+1/2)` with `k = (1−η)/η`.
pub fn optimal_photons(cfg: &ChannelConfig) -> Vec<f64> {
    let k = (1.0 - cfg.eta) / cfg.eta;
    let m = m_parameter(cfg);
    let scale = cfg.temp + VACUUM_VARIANCE;
    env_global_modes(cfg)
        .iter()
        .map(|mode| cfg.nbar - k * scale * mode.s.cosh() + k * (m + VACUUM_VARIANCE))
        .collect()
}

fn uniform_params(cfg: &ChannelConfig, t: f64, noise: f64) -> Vec<AnalyticModeParams> {
    vec![
        AnalyticModeParams {
            photons: cfg.nbar,
            t,
            r: 0.0,
            c_q: noise,
            c_p: noise,
        };
        cfg.n
    ]
}

/// Maximum-output-entropy upper bound `C^> = g[ηN + (1−η)M]`.
pub fn classical_upper_bound(cfg: &ChannelConfig) -> AnalyticBound {
    if cfg.eta == 0.0 {
        return AnalyticBound {
            value: 0.0,
            valid: true,
            per_mode: uniform_params(cfg, 0.0, 0.0),
        };
    }
    if cfg.eta == 1.0 {
        return AnalyticBound {
            value: g(cfg.nbar),
            valid: true,
            per_mode: uniform_params(cfg, cfg.nbar, 0.0),
        };
    }
    let k = (1.0 - cfg.eta) / cfg.eta;
    let scale = cfg.temp + VACUUM_VARIANCE;
    let m = m_parameter(cfg);
    let mut valid = true;
    let per_mode = env_global_modes(cfg)
        .iter()
        .zip(optimal_photons(cfg))
        .map(|(mode, photons)| {
            let shift = k * scale * mode.s.sinh();
            // (t + 1/2) e^{±r} = N_j + 1/2 ∓ shift
            let plus = photons + VACUUM_VARIANCE - shift;
            let minus = photons + VACUUM_VARIANCE + shift;
            let in_range = (photons + VACUUM_VARIANCE).powi(2) - shift * shift >= 0.25;
            valid &= photons >= 0.0 && in_range;
            let (t, r) = if plus > 0.0 && minus > 0.0 {
                ((plus * minus).sqrt() - VACUUM_VARIANCE, 0.5 * (plus / minus).ln())
            } else {
                (f64::NAN, f64::NAN)
            };
            AnalyticModeParams {
                photons,
                t,
                r,
                c_q: 0.0,
                c_p: 0.0,
            }
        })
        .collect();
    AnalyticBound {
        value: g(cfg.eta * cfg.nbar + (1.0 - cfg.eta) * m),
        valid,
        per_mode,
    }
}

/// Analytic Holevo lower bound `C^< = g[ηN + (1−η)M] − g[(1−η)T]`, valid when
/// every optimal noise variance is non-negative.
pub fn classical_lower_analytic(cfg: &ChannelConfig) -> AnalyticBound {
    if cfg.eta == 0.0 {
        return AnalyticBound {
            value: 0.0,
            valid: true,
            per_mode: uniform_params(cfg, 0.0, 0.0),
        };
    }
    if cfg.eta == 1.0 {
        return AnalyticBound {
            value: g(cfg.nbar),
            valid: true,
            per_mode: uniform_params(cfg, 0.0, cfg.nbar),
        };
    }
    let k = (1.0 - cfg.eta) / cfg.eta;
    let scale = cfg.temp + VACUUM_VARIANCE;
    let m = m_parameter(cfg);
    let mut valid = true;
    let per_mode = env_global_modes(cfg)
        .iter()
        .zip(optimal_photons(cfg))
        .map(|(mode, photons)| {
            let shift = k * scale * mode.s.sinh();
            let c_q = photons + VACUUM_VARIANCE - 0.5 * mode.s.exp() - shift;
            let c_p = photons + VACUUM_VARIANCE - 0.5 * (-mode.s).exp() + shift;
            valid &= photons >= 0.0 && c_q >= 0.0 && c_p >= 0.0;
            AnalyticModeParams {
                photons,
                t: 0.0,
                r: mode.s,
                c_q,
                c_p,
            }
        })
        .collect();
    AnalyticBound {
        value: g(cfg.eta * cfg.nbar + (1.0 - cfg.eta) * m) - g((1.0 - cfg.eta) * cfg.temp),
        valid,
        per_mode,
    }
}

/// Holevo lower bound in the limit of infinite memory.
pub fn classical_lower_asymptotic(n: usize, nbar: f64, eta: f64, temp: f64) -> f64 {
    let squeezed = (2.0 * nbar + 1.0).log2();
    if n.is_multiple_of(2) {
        squeezed
    } else {
        let nf = n as f64;
        let memoryless = g(eta * nbar + (1.0 - eta) * temp) - g((1.0 - eta) * temp);
        (nf - 1.0) / nf * squeezed + memoryless / nf
    }
}

/// Per-mode optimum of the asymptotic Holevo term at allocation `photons`:
/// `t = 0`, `r = ln(2N_j + 1)`, `c_q = 0`, `c_p = sinh r`.
pub fn asymptotic_mode_params(photons: f64) -> AnalyticModeParams {
    let r = (2.0 * photons + 1.0).ln();
    AnalyticModeParams {
        photons,
        t: 0.0,
        r,
        c_q: 0.0,
        c_p: r.sinh(),
    }
}

/// One local use with thermal noise `T_eff`: `g[ηN + (1−η)T_eff] − g[(1−η)T_eff]`.
struct LocalThermalUse {
    eta: f64,
    temp: f64,
}

impl ModeValue for LocalThermalUse {
    fn value(&self, photons: f64) -> f64 {
        g(self.eta * photons + (1.0 - self.eta) * self.temp) - g((1.0 - self.eta) * self.temp)
    }

    fn marginal(&self, photons: f64) -> f64 {
        self.eta * g_derivative(self.eta * photons + (1.0 - self.eta) * self.temp)
    }
}

/// Holevo bound per use when encoding and decoding act on single uses, each
/// seeing a thermal environment at its effective temperature.
pub fn local_classical_lower(cfg: &ChannelConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.eta == 0.0 || cfg.nbar == 0.0 {
        return Ok(0.0);
    }
    let uses: Vec<LocalThermalUse> = local_effective_temperatures(cfg)
        .into_iter()
        .map(|temp| LocalThermalUse { eta: cfg.eta, temp })
        .collect();
    let alloc = allocate_photons(&uses, cfg.nbar)?;
    if !alloc.converged {
        return Err(Error::Convergence(format!(
            "local water-filling: KKT residual {:e} after {} iterations",
            alloc.kkt_residual, alloc.iterations
        )));
    }
    let total: f64 = uses
        .iter()
        .zip(&alloc.photons)
        .map(|(u, &p)| u.value(p))
        .sum();
    Ok(total / cfg.n as f64)
}

/// Coherent information of the memoryless lossy channel with a thermal input
/// of `N` photons:
/// `δ = g(N') − g((D+N'−N−1)/2) − g((D−N'+N−1)/2)`,
/// `N' = ηN + (1−η)T`, `D = √((N+N'+1)² − 4ηN(N+1))`.
pub fn delta_term(nbar: f64, eta: f64, temp: f64) -> Result<f64> {
    let np = eta * nbar + (1.0 - eta) * temp;
    let radicand = (nbar + np + 1.0).powi(2) - 4.0 * eta * nbar * (nbar + 1.0);
    if radicand < 0.0 {
        return Err(Error::Internal(format!("negative radicand {radicand} in delta term")));
    }
    let d = radicand.sqrt();
    Ok(g(np) - g(0.5 * (d + np - nbar - 1.0)) - g(0.5 * (d - np + nbar - 1.0)))
}

/// Quantum capacity per use in the limit of infinite memory.
pub fn asymptotic_quantum(n: usize, nbar: f64, eta: f64, temp: f64) -> Result<f64> {
    if eta < 0.5 || n.is_multiple_of(2) {
        return Ok(0.0);
    }
    Ok(delta_term(nbar, eta, temp)? / n as f64)
}

/// Entanglement-assisted capacity per use in the limit of infinite memory.
pub fn asymptotic_ent_assisted(n: usize, nbar: f64, eta: f64, temp: f64) -> Result<f64> {
    if n.is_multiple_of(2) {
        return Ok(g(nbar));
    }
    Ok(g(nbar) + delta_term(nbar, eta, temp)? / n as f64)
}
