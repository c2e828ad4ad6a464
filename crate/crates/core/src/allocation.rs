//! Water-filling of a photon budget across independent modes.
//!
//! Each mode contributes a nondecreasing value `f_j(N_j)`. For concave values
//! the optimum equalizes marginals `f_j'(N_j) = μ` on the modes that receive
//! photons; `μ` is found by root-finding the total demand against the budget.
//! Non-concave values fall back to a dynamic-programming grid search.

use crate::error::{Error, Result};
use crate::solve::find_root;

/// Relative KKT residual below which an allocation counts as converged.
pub const KKT_TOL: f64 = 1e-5;

/// Value of one mode as a function of the photons it receives.
pub trait ModeValue {
    fn value(&self, photons: f64) -> f64;
    fn marginal(&self, photons: f64) -> f64;
}

impl<M: ModeValue + ?Sized> ModeValue for &M {
    fn value(&self, photons: f64) -> f64 {
        (**self).value(photons)
    }

    fn marginal(&self, photons: f64) -> f64 {
        (**self).marginal(photons)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Photons per mode; for grouped modes, the mean over members.
    pub photons: Vec<f64>,
    /// Photons of each member of each group. Members of a group may differ
    /// when the values are not concave.
    pub members: Vec<Vec<f64>>,
    /// Common marginal value on active modes.
    pub multiplier: f64,
    pub kkt_residual: f64,
    pub converged: bool,
    /// False when a non-concave value forced the grid fallback.
    pub concave: bool,
    pub iterations: usize,
}

/// Splits `n · nbar` photons among `modes`.
pub fn allocate_photons<M: ModeValue>(modes: &[M], nbar: f64) -> Result<Allocation> {
    let weights = vec![1; modes.len()];
    allocate_photons_grouped(modes, &weights, nbar)
}

/// As [`allocate_photons`], where `modes[i]` stands for `weights[i]`
/// identical modes that receive identical allocations.
pub fn allocate_photons_grouped<M: ModeValue>(
    modes: &[M],
    weights: &[usize],
    nbar: f64,
) -> Result<Allocation> {
    if modes.is_empty() || modes.len() != weights.len() || weights.contains(&0) {
        return Err(Error::InvalidConfig(format!(
            "allocation needs matching non-empty modes and positive weights ({} modes, {} weights)",
            modes.len(),
            weights.len()
        )));
    }
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::Domain {
            what: "mean photon number",
            value: nbar,
        });
    }
    let total_weight: usize = weights.iter().sum();
    let budget = nbar * total_weight as f64;
    if budget == 0.0 {
        return Ok(Allocation {
            photons: vec![0.0; modes.len()],
            members: weights.iter().map(|&w| vec![0.0; w]).collect(),
            multiplier: 0.0,
            kkt_residual: 0.0,
            converged: true,
            concave: true,
            iterations: 0,
        });
    }
    if weights == [1] {
        return Ok(Allocation {
            photons: vec![nbar],
            members: vec![vec![nbar]],
            multiplier: modes[0].marginal(nbar),
            kkt_residual: 0.0,
            converged: true,
            concave: true,
            iterations: 0,
        });
    }
    if modes.iter().all(|m| marginals_nonincreasing(m, budget)) {
        Ok(water_fill(modes, weights, budget))
    } else {
        Ok(dp_search(modes, weights, budget))
    }
}

fn marginals_nonincreasing<M: ModeValue>(mode: &M, budget: f64) -> bool {
    const SAMPLES: usize = 12;
    let mut prev = f64::INFINITY;
    for i in 0..=SAMPLES {
        let x = budget * (i as f64 / SAMPLES as f64).powi(2);
        let m = mode.marginal(x);
        if m.is_nan() || m > prev * (1.0 + 1e-6) + 1e-9 {
            return false;
        }
        prev = m;
    }
    true
}

/// Water-filling with mode `j` confined to `[lo_j, hi_j]`, assumed concave
/// there.
struct BoxedFill<'a, M> {
    modes: &'a [M],
    weights: &'a [usize],
    lo: Vec<f64>,
    hi: Vec<f64>,
    // marginals at the box ends, the lower end lifted off zero
    m_lo: Vec<f64>,
    m_hi: Vec<f64>,
    floor: f64,
    evals: usize,
}

impl<'a, M: ModeValue> BoxedFill<'a, M> {
    fn new(modes: &'a [M], weights: &'a [usize], lo: Vec<f64>, hi: Vec<f64>, floor: f64) -> Self {
        let m_lo = modes
            .iter()
            .zip(&lo)
            .map(|(m, &l)| m.marginal(l.max(floor)))
            .collect();
        let m_hi = modes.iter().zip(&hi).map(|(m, &h)| m.marginal(h)).collect();
        Self {
            modes,
            weights,
            lo,
            hi,
            m_lo,
            m_hi,
            floor,
            evals: 2 * modes.len(),
        }
    }

    /// Photons mode `j` takes at multiplier `mu`.
    fn demand(&mut self, j: usize, mu: f64) -> f64 {
        let (lo, hi) = (self.lo[j].max(self.floor), self.hi[j]);
        if self.m_lo[j] <= mu || hi <= lo {
            return self.lo[j];
        }
        if self.m_hi[j] >= mu {
            return hi;
        }
        let mode = &self.modes[j];
        let evals = &mut self.evals;
        let mut f = |x: f64| {
            *evals += 1;
            mode.marginal(x) - mu
        };
        let (f_lo, f_hi) = (self.m_lo[j] - mu, self.m_hi[j] - mu);
        find_root(&mut f, lo, hi, f_lo, f_hi, 1e-13 * hi.max(1.0), 200)
    }

    fn weighted(&self, photons: &[f64]) -> f64 {
        photons
            .iter()
            .zip(self.weights)
            .map(|(x, &w)| x * w as f64)
            .sum()
    }

    fn total(&mut self, mu: f64) -> (f64, Vec<f64>) {
        let photons: Vec<f64> = (0..self.modes.len()).map(|j| self.demand(j, mu)).collect();
        (self.weighted(&photons), photons)
    }

    fn solve(mut self, budget: f64) -> Allocation {
        let mu_hi = self.m_lo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // modes that are flat at the top of their box never set the level
        let mu_lo = self
            .m_hi
            .iter()
            .copied()
            .filter(|&m| m > 0.0)
            .fold(f64::INFINITY, f64::min);

        let mu = if !mu_lo.is_finite() {
            0.0
        } else if mu_hi.is_nan() || mu_lo.is_nan() || mu_hi <= mu_lo {
            mu_lo
        } else {
            let f_lo = self.total(mu_lo).0 - budget;
            let f_hi = self.total(mu_hi).0 - budget;
            if f_lo <= 0.0 {
                mu_lo
            } else if f_hi >= 0.0 {
                mu_hi
            } else {
                let mut excess = |l: f64| self.total(l.exp()).0 - budget;
                find_root(&mut excess, mu_lo.ln(), mu_hi.ln(), f_lo, f_hi, 1e-12, 300).exp()
            }
        };
        let mut photons = if mu > 0.0 {
            self.total(mu).1
        } else {
            self.lo.clone()
        };

        // leftover goes to modes with room, interior ones first
        let mut residual = budget - self.weighted(&photons);
        for pass in 0..2 {
            if residual == 0.0 {
                break;
            }
            let room: Vec<f64> = photons
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    let interior = x > self.lo[j] && x < self.hi[j];
                    if pass == 0 && !interior {
                        0.0
                    } else if residual > 0.0 {
                        (self.hi[j] - x) * self.weights[j] as f64
                    } else {
                        (x - self.lo[j]) * self.weights[j] as f64
                    }
                })
                .collect();
            let capacity: f64 = room.iter().sum();
            if capacity <= 0.0 {
                continue;
            }
            let share = (residual.abs() / capacity).min(1.0);
            for (j, x) in photons.iter_mut().enumerate() {
                let step = share * room[j] / self.weights[j] as f64;
                *x = (*x + step.copysign(residual)).clamp(self.lo[j], self.hi[j]);
            }
            residual = budget - self.weighted(&photons);
        }

        let kkt_residual = self.kkt_residual(&photons, mu);
        Allocation {
            members: self
                .weights
                .iter()
                .zip(&photons)
                .map(|(&w, &x)| vec![x; w])
                .collect(),
            photons,
            multiplier: mu,
            kkt_residual,
            converged: kkt_residual <= KKT_TOL,
            concave: true,
            iterations: self.evals,
        }
    }

    fn kkt_residual(&mut self, photons: &[f64], mu: f64) -> f64 {
        // absolute floor: marginals below 1e-9 bits per photon count as flat
        let scale = mu.abs().max(1e-3);
        let mut worst: f64 = 0.0;
        for (j, &x) in photons.iter().enumerate() {
            let m = self.modes[j].marginal(x.max(self.floor));
            self.evals += 1;
            let gap = if x <= self.lo[j] {
                (m - mu).max(0.0)
            } else if x >= self.hi[j] {
                (mu - m).max(0.0)
            } else {
                (m - mu).abs()
            };
            worst = worst.max(gap / scale);
        }
        worst
    }
}

fn water_fill<M: ModeValue>(modes: &[M], weights: &[usize], budget: f64) -> Allocation {
    let lo = vec![0.0; modes.len()];
    let hi = vec![budget; modes.len()];
    BoxedFill::new(modes, weights, lo, hi, 1e-12 * budget).solve(budget)
}

/// Budget resolution of the non-concave search.
const DP_UNITS: usize = 256;

/// Non-concave fallback: exact optimum on a uniform grid of the budget by
/// dynamic programming over individual modes, polished by water-filling the
/// active modes within one grid cell of their grid value.
fn dp_search<M: ModeValue>(modes: &[M], weights: &[usize], budget: f64) -> Allocation {
    let unit = budget / DP_UNITS as f64;
    let table: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| (0..=DP_UNITS).map(|k| m.value(k as f64 * unit)).collect())
        .collect();
    let mut evals = modes.len() * (DP_UNITS + 1);

    let members_of: Vec<usize> = weights
        .iter()
        .enumerate()
        .flat_map(|(i, &w)| std::iter::repeat_n(i, w))
        .collect();
    // best[u]: best value of the members so far using exactly u units
    let mut best = vec![f64::NEG_INFINITY; DP_UNITS + 1];
    best[0] = 0.0;
    let mut choice = Vec::with_capacity(members_of.len());
    for &g in &members_of {
        let mut next = vec![f64::NEG_INFINITY; DP_UNITS + 1];
        let mut pick = vec![0usize; DP_UNITS + 1];
        for u in 0..=DP_UNITS {
            for k in 0..=u {
                let v = best[u - k] + table[g][k];
                if v > next[u] {
                    next[u] = v;
                    pick[u] = k;
                }
            }
        }
        best = next;
        choice.push(pick);
    }
    let mut units = vec![0usize; members_of.len()];
    let mut left = DP_UNITS;
    for (i, pick) in choice.iter().enumerate().rev() {
        units[i] = pick[left];
        left -= pick[left];
    }
    let grid_value = best[DP_UNITS];

    // active members of a group share one allocation in the polish
    let mut group_active = vec![0usize; modes.len()];
    let mut group_units = vec![0usize; modes.len()];
    for (&g, &k) in members_of.iter().zip(&units) {
        if k > 0 {
            group_active[g] += 1;
            group_units[g] += k;
        }
    }
    let active: Vec<usize> = (0..modes.len()).filter(|&g| group_active[g] > 0).collect();
    let sub_modes: Vec<&M> = active.iter().map(|&g| &modes[g]).collect();
    let sub_weights: Vec<usize> = active.iter().map(|&g| group_active[g]).collect();
    let centre: Vec<f64> = active
        .iter()
        .map(|&g| group_units[g] as f64 * unit / group_active[g] as f64)
        .collect();
    let lo = centre.iter().map(|&c| (c - unit).max(0.0)).collect();
    let hi = centre.iter().map(|&c| (c + unit).min(budget)).collect();
    let polished = BoxedFill::new(&sub_modes, &sub_weights, lo, hi, 1e-12 * budget).solve(budget);
    evals += polished.iterations + active.len();
    let polished_value: f64 = sub_modes
        .iter()
        .zip(&sub_weights)
        .zip(&polished.photons)
        .map(|((m, &w), &x)| w as f64 * m.value(x))
        .sum();

    let use_polished = polished_value >= grid_value;
    let mut members = vec![Vec::new(); modes.len()];
    for (&g, &k) in members_of.iter().zip(&units) {
        let x = if k == 0 {
            0.0
        } else {
            let a = active.binary_search(&g).expect("active group");
            if use_polished {
                polished.photons[a]
            } else {
                centre[a]
            }
        };
        members[g].push(x);
    }
    Allocation {
        photons: members.iter().map(|m| m.iter().sum::<f64>() / m.len() as f64).collect(),
        members,
        multiplier: polished.multiplier,
        kkt_residual: polished.kkt_residual,
        converged: use_polished && polished.converged,
        concave: false,
        iterations: evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{g, g_derivative};

    struct Thermal {
        eta: f64,
        temp: f64,
    }

    impl ModeValue for Thermal {
        fn value(&self, x: f64) -> f64 {
            g(self.eta * x + (1.0 - self.eta) * self.temp) - g((1.0 - self.eta) * self.temp)
        }
        fn marginal(&self, x: f64) -> f64 {
            self.eta * g_derivative(self.eta * x + (1.0 - self.eta) * self.temp)
        }
    }

    struct Log {
        gain: f64,
    }

    impl ModeValue for Log {
        fn value(&self, x: f64) -> f64 {
            (1.0 + self.gain * x).ln()
        }
        fn marginal(&self, x: f64) -> f64 {
            self.gain / (1.0 + self.gain * x)
        }
    }

    #[test]
    fn identical_modes_share_equally() {
        let modes: Vec<Thermal> = (0..5).map(|_| Thermal { eta: 0.7, temp: 1.0 }).collect();
        let a = allocate_photons(&modes, 3.0).unwrap();
        assert!(a.converged && a.concave);
        for x in &a.photons {
            assert!((x - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn classic_water_filling() {
        // ln(1 + g x): water level 1/μ − 1/g
        let modes = [Log { gain: 1.0 }, Log { gain: 4.0 }, Log { gain: 0.05 }];
        let a = allocate_photons(&modes, 1.0).unwrap();
        assert!(a.converged);
        assert_eq!(a.photons[2], 0.0);
        assert!((a.photons[0] - 1.125).abs() < 1e-9);
        assert!((a.photons[1] - 1.875).abs() < 1e-9);
        assert!((a.photons.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_scan_for_two_modes() {
        let modes = [Thermal { eta: 0.9, temp: 0.1 }, Thermal { eta: 0.9, temp: 2.5 }];
        let nbar = 2.0;
        let a = allocate_photons(&modes, nbar).unwrap();
        let value = modes[0].value(a.photons[0]) + modes[1].value(a.photons[1]);
        let budget = 2.0 * nbar;
        let dense = (0..=400_000)
            .map(|i| {
                let x = budget * i as f64 / 400_000.0;
                modes[0].value(x) + modes[1].value(budget - x)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(value >= dense - 1e-12);
        assert!((value - dense).abs() < 1e-6);
    }

    #[test]
    fn grouped_matches_expanded() {
        let groups = [Thermal { eta: 0.8, temp: 0.3 }, Thermal { eta: 0.8, temp: 1.7 }];
        let a = allocate_photons_grouped(&groups, &[3, 2], 1.5).unwrap();
        let expanded = [
            Thermal { eta: 0.8, temp: 0.3 },
            Thermal { eta: 0.8, temp: 0.3 },
            Thermal { eta: 0.8, temp: 0.3 },
            Thermal { eta: 0.8, temp: 1.7 },
            Thermal { eta: 0.8, temp: 1.7 },
        ];
        let b = allocate_photons(&expanded, 1.5).unwrap();
        assert!((a.photons[0] - b.photons[0]).abs() < 1e-9);
        assert!((a.photons[1] - b.photons[4]).abs() < 1e-9);
        assert!((3.0 * a.photons[0] + 2.0 * a.photons[1] - 7.5).abs() < 1e-12);
    }

    struct Threshold;

    impl ModeValue for Threshold {
        // zero until one photon, then linear: not concave
        fn value(&self, x: f64) -> f64 {
            (x - 1.0).max(0.0)
        }
        fn marginal(&self, x: f64) -> f64 {
            if x > 1.0 {
                1.0
            } else {
                0.0
            }
        }
    }

    #[test]
    fn non_concave_falls_back() {
        let modes = [Threshold, Threshold];
        let a = allocate_photons(&modes, 0.75).unwrap();
        assert!(!a.concave);
        // pooling the budget in one mode beats splitting it
        let v: f64 = a.photons.iter().map(|&x| Threshold.value(x)).sum();
        assert!((v - 0.5).abs() < 1e-9);
    }

    #[test]
    fn grouped_non_concave_splits_members() {
        let a = allocate_photons_grouped(&[Threshold], &[3], 1.0).unwrap();
        let v: f64 = a.members[0].iter().map(|&x| Threshold.value(x)).sum();
        assert!((v - 2.0).abs() < 1e-9);
        assert!((a.members[0].iter().sum::<f64>() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_budget_and_bad_input() {
        let modes = [Log { gain: 1.0 }, Log { gain: 2.0 }];
        assert_eq!(allocate_photons(&modes, 0.0).unwrap().photons, vec![0.0, 0.0]);
        assert!(allocate_photons(&modes, -1.0).is_err());
        assert!(allocate_photons::<Log>(&[], 1.0).is_err());
    }
}
