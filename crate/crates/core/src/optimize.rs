//! Numerical capacities: maximization of the Holevo information, coherent
//! information and quantum mutual information over Gaussian encodings of the
//! global modes.
//!
//! The problem is nested. The outer level water-fills the photon budget
//! across global modes; the inner level maximizes one mode at a fixed photon
//! number. The inner search runs over a box:
//!
//! - `r = ρ · acosh(2N + 1)` with `ρ ∈ [−1, 1]`,
//! - `t = w (N + 1/2 − cosh(r)/2) / cosh r` with `w ∈ [0, 1]`.
//!
//! Energy not spent on the seed becomes displacement noise for classical
//! communication, split between the quadratures to maximize the ensemble
//! output determinant; for quantum and assisted communication it is left
//! unused.

use serde::{Deserialize, Serialize};

use crate::allocation::{allocate_photons_grouped, ModeValue};
use crate::analytic::classical_lower_analytic;
use crate::channel::{env_global_modes, local_effective_temperatures, ChannelConfig, GlobalEnvMode};
use crate::entropic::{
    coherent_information_numeric, coherent_information_unchecked, holevo_chi, holevo_chi_mode,
    quantum_mutual_information_unchecked, rotated_seed, EncodingParams, ModeEncoding,
};
use crate::error::{Error, Result};
use crate::gaussian::VACUUM_VARIANCE;
use crate::solve::maximize_bounded;

/// Communication task whose capacity is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Capacity {
    /// Holevo information of displaced-seed ensembles.
    Classical,
    /// Coherent information.
    Quantum,
    /// Quantum mutual information.
    EntAssisted,
}

/// Result of a numerical capacity maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    /// Bits per channel use.
    pub value: f64,
    pub params: EncodingParams,
    pub converged: bool,
    /// Inner objective evaluations.
    pub iterations: usize,
    /// Difference to the analytic lower bound when that bound is valid.
    pub gap_to_analytic: Option<f64>,
    /// False when a non-concave per-mode value forced the fallback allocation.
    pub concave_allocation: bool,
}

impl OptResult {
    fn trivial(n: usize, value: f64) -> Self {
        Self {
            value,
            params: EncodingParams {
                modes: vec![ModeEncoding::seed(0.0, 0.0); n],
            },
            converged: true,
            iterations: 0,
            gap_to_analytic: None,
            concave_allocation: true,
        }
    }
}

const GRID_RHO: usize = 32;
const GRID_W: [f64; 3] = [0.0, 0.5, 1.0];
const MAX_SWEEPS: usize = 80;
const STARTS: usize = 3;

/// One global mode, oriented so that `s ≥ 0`.
#[derive(Debug, Clone, Copy)]
pub struct ModeProblem {
    mode: GlobalEnvMode,
    eta: f64,
    capacity: Capacity,
}

/// Inner optimum of one mode at a fixed photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOptimum {
    pub value: f64,
    pub rho: f64,
    pub w: f64,
    pub evaluations: usize,
}

impl ModeProblem {
    /// `mode` with negative squeezing is replaced by its mirror image; the
    /// caller mirrors the resulting encoding back.
    pub fn new(mode: &GlobalEnvMode, eta: f64, capacity: Capacity) -> Self {
        Self {
            mode: GlobalEnvMode::new(mode.index, mode.s.abs(), mode.temp),
            eta,
            capacity,
        }
    }

    /// Encoding at box coordinates `(rho, w)`, in the orientation `s ≥ 0`.
    pub fn encoding(&self, photons: f64, rho: f64, w: f64) -> ModeEncoding {
        let span = (2.0 * photons + 1.0).acosh();
        let r = rho * span;
        let ch = r.cosh();
        let spare = (photons + VACUUM_VARIANCE - 0.5 * ch).max(0.0);
        let t = w * spare / ch;
        match self.capacity {
            Capacity::Classical => {
                let noise = 2.0 * (1.0 - w) * spare;
                let (c_q, c_p) = self.split_noise(t, r, noise);
                ModeEncoding {
                    t,
                    r,
                    c_q,
                    c_p,
                    photons,
                }
            }
            Capacity::Quantum | Capacity::EntAssisted => ModeEncoding::seed(t, r),
        }
    }

    /// Splits total noise `c_q + c_p = noise` to equalize the ensemble output
    /// variances, which maximizes their product.
    fn split_noise(&self, t: f64, r: f64, noise: f64) -> (f64, f64) {
        if noise <= 0.0 || self.eta == 0.0 {
            return (0.5 * noise, 0.5 * noise);
        }
        let scale = t + VACUUM_VARIANCE;
        let x = self.eta * scale * r.exp() + (1.0 - self.eta) * self.mode.q_variance();
        let y = self.eta * scale * (-r).exp() + (1.0 - self.eta) * self.mode.p_variance();
        let u = ((y - x + self.eta * noise) / (2.0 * self.eta * noise)).clamp(0.0, 1.0);
        (u * noise, (1.0 - u) * noise)
    }

    pub fn evaluate(&self, photons: f64, rho: f64, w: f64) -> f64 {
        let enc = self.encoding(photons, rho, w);
        match self.capacity {
            Capacity::Classical => holevo_chi_mode(&enc, &self.mode, self.eta),
            Capacity::Quantum => coherent_information_unchecked(enc.t, enc.r, &self.mode, self.eta),
            Capacity::EntAssisted => {
                quantum_mutual_information_unchecked(enc.t, enc.r, &self.mode, self.eta)
            }
        }
    }

    /// Starting points: the analytic optimum `r = s`, the large-memory
    /// optimum `r = ln(2N + 1)`, and the unsqueezed seed.
    fn seeds(&self, photons: f64) -> Vec<(f64, f64)> {
        let span = (2.0 * photons + 1.0).acosh();
        let w = match self.capacity {
            Capacity::Classical => 0.0,
            Capacity::Quantum | Capacity::EntAssisted => 1.0,
        };
        let clip = |r: f64| (r / span).clamp(-1.0, 1.0);
        vec![
            (clip(self.mode.s), w),
            (clip((2.0 * photons + 1.0).ln()), w),
            (0.0, w),
        ]
    }

    /// Maximizes the mode's objective at `photons`.
    pub fn solve(&self, photons: f64) -> ModeOptimum {
        let mut evaluations = 0usize;
        if photons <= 0.0 {
            return ModeOptimum {
                value: self.evaluate(0.0, 0.0, 0.0),
                rho: 0.0,
                w: 0.0,
                evaluations: 1,
            };
        }
        let mut f = |rho: f64, w: f64| {
            evaluations += 1;
            self.evaluate(photons, rho, w)
        };

        let mut candidates: Vec<(f64, f64, f64)> = Vec::new();
        for i in 0..=GRID_RHO {
            let rho = -1.0 + 2.0 * i as f64 / GRID_RHO as f64;
            for &w in &GRID_W {
                candidates.push((f(rho, w), rho, w));
            }
        }
        for (rho, w) in self.seeds(photons) {
            candidates.push((f(rho, w), rho, w));
        }
        // highest value first; ties keep generation order
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut starts: Vec<(f64, f64, f64)> = Vec::new();
        for c in candidates {
            let distinct = starts
                .iter()
                .all(|s| (s.1 - c.1).abs() > 1e-9 || (s.2 - c.2).abs() > 1e-9);
            if distinct {
                starts.push(c);
            }
            if starts.len() == STARTS {
                break;
            }
        }

        let mut best = starts[0];
        for start in starts {
            let found = coordinate_ascent(&mut f, start);
            if found.0 > best.0 {
                best = found;
            }
        }
        ModeOptimum {
            value: best.0,
            rho: best.1,
            w: best.2,
            evaluations,
        }
    }

    /// Marginal value `d/dN` at the optimum, by the envelope theorem: the
    /// box does not depend on `N`, so the derivative is taken at fixed
    /// `(ρ, w)`.
    pub fn marginal_at(&self, photons: f64, opt: &ModeOptimum) -> f64 {
        let h = 1e-6 * photons.max(1e-3);
        let hi = self.evaluate(photons + h, opt.rho, opt.w);
        if photons > h {
            (hi - self.evaluate(photons - h, opt.rho, opt.w)) / (2.0 * h)
        } else {
            (hi - self.evaluate(photons, opt.rho, opt.w)) / h
        }
    }
}

/// Coordinate ascent over `(ρ, w) ∈ [−1, 1] × [0, 1]` with bounded line
/// searches around the current point.
fn coordinate_ascent(
    f: &mut impl FnMut(f64, f64) -> f64,
    start: (f64, f64, f64),
) -> (f64, f64, f64) {
    let (mut value, mut rho, mut w) = start;
    let mut step_rho = 2.0 / GRID_RHO as f64;
    let mut step_w = 0.5;
    for _ in 0..MAX_SWEEPS {
        let (old_rho, old_w, old_value) = (rho, w, value);

        let lo = (rho - step_rho).max(-1.0);
        let hi = (rho + step_rho).min(1.0);
        let (r_new, v_new) = maximize_bounded(&mut |x| f(x, w), lo, hi, 1e-11, 200);
        if v_new > value {
            rho = r_new;
            value = v_new;
        }

        let lo = (w - step_w).max(0.0);
        let hi = (w + step_w).min(1.0);
        let (w_new, v_new) = maximize_bounded(&mut |x| f(rho, x), lo, hi, 1e-11, 200);
        if v_new > value {
            w = w_new;
            value = v_new;
        }

        let moved = (rho - old_rho).abs().max((w - old_w).abs());
        if value - old_value <= 1e-15 * value.abs().max(1.0) && moved < 1e-10 {
            break;
        }
        // keep the bracket wide enough to follow a ridge, narrow enough to
        // stay in the basin
        step_rho = (4.0 * (rho - old_rho).abs()).clamp(1e-6, 2.0 / GRID_RHO as f64);
        step_w = (4.0 * (w - old_w).abs()).clamp(1e-6, 0.5);
    }
    (value, rho, w)
}

impl ModeValue for ModeProblem {
    fn value(&self, photons: f64) -> f64 {
        self.solve(photons).value
    }

    fn marginal(&self, photons: f64) -> f64 {
        // at zero photons every box point is the vacuum, so take the
        // optimum just above it
        let photons = photons.max(1e-12);
        let opt = self.solve(photons);
        let m = self.marginal_at(photons, &opt);
        match self.capacity {
            Capacity::Classical => m,
            // energy may be wasted, so the value never decreases
            Capacity::Quantum | Capacity::EntAssisted => m.max(0.0),
        }
    }
}

/// Global modes with identical `(|s|, T)` grouped together.
fn group_modes(modes: &[GlobalEnvMode]) -> (Vec<GlobalEnvMode>, Vec<Vec<usize>>) {
    let mut reps: Vec<GlobalEnvMode> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, m) in modes.iter().enumerate() {
        let same = |r: &GlobalEnvMode| {
            (r.s.abs() - m.s.abs()).abs() <= 1e-13 * m.s.abs().max(1.0)
                && (r.temp - m.temp).abs() <= 1e-13 * m.temp.max(1.0)
        };
        match reps.iter().position(same) {
            Some(k) => members[k].push(i),
            None => {
                reps.push(*m);
                members.push(vec![i]);
            }
        }
    }
    (reps, members)
}

/// Maximizes the total objective over `modes` with mean photon number `nbar`
/// and returns the per-use value (before any clamping).
pub fn maximize_modes(
    modes: &[GlobalEnvMode],
    eta: f64,
    nbar: f64,
    capacity: Capacity,
) -> Result<OptResult> {
    if modes.is_empty() {
        return Err(Error::InvalidConfig("no modes to optimize".into()));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain {
            what: "transmissivity",
            value: eta,
        });
    }
    let n = modes.len();
    let (reps, members) = group_modes(modes);
    let problems: Vec<ModeProblem> = reps
        .iter()
        .map(|m| ModeProblem::new(m, eta, capacity))
        .collect();
    let weights: Vec<usize> = members.iter().map(Vec::len).collect();
    let alloc = allocate_photons_grouped(&problems, &weights, nbar)?;

    let mut encodings = vec![ModeEncoding::seed(0.0, 0.0); n];
    let mut total = 0.0;
    let mut iterations = alloc.iterations;
    for ((problem, group), shares) in problems.iter().zip(&members).zip(&alloc.members) {
        let mut solved: Option<(f64, ModeOptimum)> = None;
        for (&i, &photons) in group.iter().zip(shares) {
            let opt = match &solved {
                Some((x, opt)) if *x == photons => *opt,
                _ => {
                    let opt = problem.solve(photons);
                    iterations += opt.evaluations;
                    solved = Some((photons, opt));
                    opt
                }
            };
            total += opt.value;
            let enc = problem.encoding(photons, opt.rho, opt.w);
            encodings[i] = if modes[i].s < 0.0 { enc.mirrored() } else { enc };
        }
    }
    Ok(OptResult {
        value: total / n as f64,
        params: EncodingParams { modes: encodings },
        converged: alloc.converged,
        iterations,
        gap_to_analytic: None,
        concave_allocation: alloc.concave,
    })
}

/// Classical capacity lower bound per use: maximal Holevo information of
/// Gaussian displaced-seed encodings in the global basis.
pub fn maximize_classical(cfg: &ChannelConfig) -> Result<OptResult> {
    cfg.validate()?;
    let modes = env_global_modes(cfg);
    maximize_classical_modes(&modes, cfg.eta, cfg.nbar, Some(cfg))
}

/// [`maximize_classical`] for an arbitrary list of global environment modes.
/// With `cfg`, the closed-form optimum is also tried and the gap reported.
pub fn maximize_classical_modes(
    modes: &[GlobalEnvMode],
    eta: f64,
    nbar: f64,
    cfg: Option<&ChannelConfig>,
) -> Result<OptResult> {
    if eta == 0.0 || nbar == 0.0 {
        return Ok(OptResult::trivial(modes.len(), 0.0));
    }
    let mut result = maximize_modes(modes, eta, nbar, Capacity::Classical)?;
    if let Some(cfg) = cfg {
        let analytic = classical_lower_analytic(cfg);
        if analytic.valid {
            let params = EncodingParams {
                modes: analytic
                    .per_mode
                    .iter()
                    .map(|p| ModeEncoding {
                        t: p.t,
                        r: p.r,
                        c_q: p.c_q,
                        c_p: p.c_p,
                        photons: p.photons,
                    })
                    .collect(),
            };
            let value = holevo_chi(&params, modes, eta)? / modes.len() as f64;
            if value > result.value {
                result.value = value;
                result.params = params;
            }
            result.gap_to_analytic = Some(result.value - analytic.value);
        }
    }
    Ok(result)
}

/// Quantum capacity per use: maximal total coherent information, clamped at
/// zero. Vanishes for `η < 1/2`.
pub fn maximize_quantum(cfg: &ChannelConfig) -> Result<OptResult> {
    cfg.validate()?;
    maximize_quantum_modes(&env_global_modes(cfg), cfg.eta, cfg.nbar)
}

pub fn maximize_quantum_modes(modes: &[GlobalEnvMode], eta: f64, nbar: f64) -> Result<OptResult> {
    if eta < 0.5 || nbar == 0.0 {
        return Ok(OptResult::trivial(modes.len(), 0.0));
    }
    let mut result = maximize_modes(modes, eta, nbar, Capacity::Quantum)?;
    if result.value <= 0.0 {
        result.value = 0.0;
        result.params = EncodingParams {
            modes: vec![ModeEncoding::seed(0.0, 0.0); modes.len()],
        };
    }
    Ok(result)
}

/// Entanglement-assisted classical capacity per use: maximal total quantum
/// mutual information.
pub fn maximize_ent_assisted(cfg: &ChannelConfig) -> Result<OptResult> {
    cfg.validate()?;
    maximize_ent_assisted_modes(&env_global_modes(cfg), cfg.eta, cfg.nbar)
}

pub fn maximize_ent_assisted_modes(
    modes: &[GlobalEnvMode],
    eta: f64,
    nbar: f64,
) -> Result<OptResult> {
    if eta == 0.0 || nbar == 0.0 {
        return Ok(OptResult::trivial(modes.len(), 0.0));
    }
    maximize_modes(modes, eta, nbar, Capacity::EntAssisted)
}

/// Local-scenario environment: use `k` sees a thermal state at `T_eff(k)`.
pub fn local_modes(cfg: &ChannelConfig) -> Vec<GlobalEnvMode> {
    local_effective_temperatures(cfg)
        .into_iter()
        .enumerate()
        .map(|(k, temp)| GlobalEnvMode::new(k, 0.0, temp))
        .collect()
}

/// Quantum capacity per use with encoding and decoding on single uses.
pub fn maximize_quantum_local(cfg: &ChannelConfig) -> Result<OptResult> {
    cfg.validate()?;
    maximize_quantum_modes(&local_modes(cfg), cfg.eta, cfg.nbar)
}

/// Entanglement-assisted capacity per use with encoding and decoding on
/// single uses.
pub fn maximize_ent_assisted_local(cfg: &ChannelConfig) -> Result<OptResult> {
    cfg.validate()?;
    maximize_ent_assisted_modes(&local_modes(cfg), cfg.eta, cfg.nbar)
}

/// Coherent information of one mode maximized with and without a `q–p`
/// correlation in the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationCheck {
    pub restricted: f64,
    pub rotated: f64,
    pub angle: f64,
}

/// Re-optimizes the coherent information of one mode at fixed photon number
/// allowing the seed's squeezing axis to rotate, using the numerical 4×4
/// route. A positive `rotated − restricted` would mean the diagonal seed is
/// not optimal.
pub fn coherent_information_rotation_check(
    mode: &GlobalEnvMode,
    eta: f64,
    photons: f64,
) -> Result<RotationCheck> {
    let problem = ModeProblem::new(mode, eta, Capacity::Quantum);
    let opt = problem.solve(photons);
    let restricted = opt.value;

    let canonical = GlobalEnvMode::new(mode.index, mode.s.abs(), mode.temp);
    let objective = |rho: f64, w: f64, phi: f64| -> f64 {
        let enc = problem.encoding(photons, rho, w);
        coherent_information_numeric(&rotated_seed(enc.t, enc.r, phi), &canonical, eta)
            .unwrap_or(f64::NEG_INFINITY)
    };

    let mut best = (objective(opt.rho, opt.w, 0.0), opt.rho, opt.w, 0.0);
    const ANGLES: usize = 12;
    for k in 0..ANGLES {
        let phi = std::f64::consts::PI * k as f64 / ANGLES as f64;
        for i in 0..=8 {
            let rho = -1.0 + 0.25 * i as f64;
            for &w in &GRID_W {
                let v = objective(rho, w, phi);
                if v > best.0 {
                    best = (v, rho, w, phi);
                }
            }
        }
    }
    // refine by cyclic line searches over the three coordinates
    let (mut value, mut rho, mut w, mut phi) = best;
    for _ in 0..30 {
        let before = value;
        let (x, v) = maximize_bounded(&mut |x| objective(x, w, phi), -1.0, 1.0, 1e-9, 200);
        if v > value {
            (rho, value) = (x, v);
        }
        let (x, v) = maximize_bounded(&mut |x| objective(rho, x, phi), 0.0, 1.0, 1e-9, 200);
        if v > value {
            (w, value) = (x, v);
        }
        let (x, v) = maximize_bounded(
            &mut |x| objective(rho, w, x),
            phi - 0.3,
            phi + 0.3,
            1e-9,
            200,
        );
        if v > value {
            (phi, value) = (x, v);
        }
        if value - before < 1e-13 {
            break;
        }
    }
    Ok(RotationCheck {
        restricted,
        rotated: value,
        angle: phi,
    })
}
