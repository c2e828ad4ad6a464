//! Brute-force grid maximization for one or two channel uses, used to check
//! the optimizers.
//!
//! Every free parameter is scanned on a coarse grid, then on successively
//! finer grids centred on the best point. The result is a value actually
//! attained by a feasible encoding, hence a lower envelope of the optimum.

use crate::channel::{env_global_modes, ChannelConfig, GlobalEnvMode};
use crate::entropic::{
    coherent_information_unchecked, holevo_chi_mode, quantum_mutual_information_unchecked,
    ModeEncoding,
};
use crate::error::{Error, Result};
use crate::gaussian::VACUUM_VARIANCE;
use crate::optimize::Capacity;

const ZOOM_STAGES: usize = 4;
const ZOOM_FACTOR: f64 = 0.25;

/// Grid over `[lo, hi]` with `points` samples (including both ends).
fn linspace(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
}

/// Zoomed window of relative half-width `half` around `center` in `[lo, hi]`.
fn window(center: f64, half: f64, lo: f64, hi: f64) -> (f64, f64) {
    ((center - half).max(lo), (center + half).min(hi))
}

/// Best Holevo information of one mode at `photons`, scanning seed squeezing
/// `r`, seed excitation `t` and the fraction `u` of the remaining energy put
/// into `c_q`.
fn classical_mode(mode: &GlobalEnvMode, eta: f64, photons: f64) -> f64 {
    let r_max = (2.0 * photons + 1.0).acosh();
    let eval = |r: f64, tf: f64, u: f64| {
        let t_max = ((photons + VACUUM_VARIANCE) / r.cosh() - VACUUM_VARIANCE).max(0.0);
        let t = tf * t_max;
        let noise = (2.0 * (photons + VACUUM_VARIANCE - (t + VACUUM_VARIANCE) * r.cosh())).max(0.0);
        let enc = ModeEncoding {
            t,
            r,
            c_q: u * noise,
            c_p: (1.0 - u) * noise,
            photons,
        };
        holevo_chi_mode(&enc, mode, eta)
    };
    let mut best = (eval(0.0, 0.0, 0.5), 0.0, 0.0, 0.5);
    let (mut r_lo, mut r_hi) = (-r_max, r_max);
    let (mut t_lo, mut t_hi) = (0.0, 1.0);
    let (mut u_lo, mut u_hi) = (0.0, 1.0);
    let mut points = (41, 11, 41);
    for stage in 0..=ZOOM_STAGES {
        for r in linspace(r_lo, r_hi, points.0) {
            for tf in linspace(t_lo, t_hi, points.1) {
                for u in linspace(u_lo, u_hi, points.2) {
                    let v = eval(r, tf, u);
                    if v > best.0 {
                        best = (v, r, tf, u);
                    }
                }
            }
        }
        if stage == ZOOM_STAGES {
            break;
        }
        let shrink = ZOOM_FACTOR.powi(stage as i32 + 1);
        (r_lo, r_hi) = window(best.1, r_max * shrink * 2.0, -r_max, r_max);
        (t_lo, t_hi) = window(best.2, shrink, 0.0, 1.0);
        (u_lo, u_hi) = window(best.3, shrink, 0.0, 1.0);
        points = (21, 11, 21);
    }
    best.0
}

/// Best coherent information (or mutual information) of one mode using at
/// most `photons`, scanning `r` and `t` with `(t + 1/2) cosh r ≤ photons + 1/2`.
fn seed_mode(mode: &GlobalEnvMode, eta: f64, photons: f64, assisted: bool) -> f64 {
    let r_max = (2.0 * photons + 1.0).acosh();
    let eval = |r: f64, tf: f64| {
        let t_max = ((photons + VACUUM_VARIANCE) / r.cosh() - VACUUM_VARIANCE).max(0.0);
        let t = tf * t_max;
        if assisted {
            quantum_mutual_information_unchecked(t, r, mode, eta)
        } else {
            coherent_information_unchecked(t, r, mode, eta)
        }
    };
    let mut best = (eval(0.0, 0.0), 0.0, 0.0);
    let (mut r_lo, mut r_hi) = (-r_max, r_max);
    let (mut t_lo, mut t_hi) = (0.0, 1.0);
    for stage in 0..=ZOOM_STAGES {
        for r in linspace(r_lo, r_hi, 81) {
            for tf in linspace(t_lo, t_hi, 41) {
                let v = eval(r, tf);
                if v > best.0 {
                    best = (v, r, tf);
                }
            }
        }
        if stage == ZOOM_STAGES {
            break;
        }
        let shrink = ZOOM_FACTOR.powi(stage as i32 + 1);
        (r_lo, r_hi) = window(best.1, r_max * shrink * 2.0, -r_max, r_max);
        (t_lo, t_hi) = window(best.2, shrink, 0.0, 1.0);
    }
    best.0
}

fn mode_value(mode: &GlobalEnvMode, eta: f64, photons: f64, capacity: Capacity) -> f64 {
    match capacity {
        Capacity::Classical => classical_mode(mode, eta, photons),
        Capacity::Quantum => seed_mode(mode, eta, photons, false),
        Capacity::EntAssisted => seed_mode(mode, eta, photons, true),
    }
}

/// Grid estimate of the capacity per use for `n ≤ 2`. Quantum values are
/// clamped at zero; no degradability shortcut is taken.
pub fn brute_force_oracle(cfg: &ChannelConfig, capacity: Capacity) -> Result<f64> {
    cfg.validate()?;
    if cfg.n > 2 {
        return Err(Error::InvalidConfig(format!(
            "the grid oracle handles at most 2 modes, got {}",
            cfg.n
        )));
    }
    let modes = env_global_modes(cfg);
    let budget = cfg.nbar * cfg.n as f64;
    let total = if modes.len() == 1 {
        mode_value(&modes[0], cfg.eta, budget, capacity)
    } else {
        let split = |x: f64| {
            mode_value(&modes[0], cfg.eta, x, capacity)
                + mode_value(&modes[1], cfg.eta, budget - x, capacity)
        };
        let mut best = (split(0.5 * budget), 0.5 * budget);
        let (mut lo, mut hi) = (0.0, budget);
        for stage in 0..=ZOOM_STAGES {
            for x in linspace(lo, hi, 11) {
                let v = split(x);
                if v > best.0 {
                    best = (v, x);
                }
            }
            if stage == ZOOM_STAGES {
                break;
            }
            let shrink = ZOOM_FACTOR.powi(stage as i32 + 1);
            (lo, hi) = window(best.1, budget * shrink, 0.0, budget);
        }
        best.0
    };
    let per_use = total / cfg.n as f64;
    Ok(match capacity {
        Capacity::Quantum => per_use.max(0.0),
        _ => per_use,
    })
}
