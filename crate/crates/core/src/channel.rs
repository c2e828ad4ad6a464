//! The lossy channel with a correlated environment.
//!
//! The environment of `n` uses is the squeezed thermal state with covariance
//! `(T + 1/2) (e^{sΩ} ⊕ e^{-sΩ})`, `Ω` being the nearest-neighbour coupling
//! matrix. Rotating to the eigenbasis of `Ω` (the *global* modes) turns it into
//! a product of single-mode squeezed thermal states with squeezing `s·λ_j`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GeneralCov, SingleModeCov, VACUUM_VARIANCE};

/// Default upper limit on the number of channel uses `n`.
pub const DEFAULT_MAX_MODES: usize = 64;

/// Parameters of the memory channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Correlation length (number of channel uses).
    pub n: usize,
    /// Beam-splitter transmissivity.
    pub eta: f64,
    /// Memory (multimode squeezing) parameter.
    pub s: f64,
    /// Thermal excitation of the environment.
    pub temp: f64,
    /// Input photon budget per use.
    pub nbar: f64,
}

impl ChannelConfig {
    pub fn new(n: usize, eta: f64, s: f64, temp: f64, nbar: f64) -> Result<Self> {
        let cfg = Self {
            n,
            eta,
            s,
            temp,
            nbar,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_limit(DEFAULT_MAX_MODES)
    }

    pub fn validate_with_limit(&self, max_modes: usize) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.n > max_modes {
            return Err(Error::InvalidConfig(format!(
                "n = {} exceeds the limit of {max_modes}",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidConfig(format!(
                "eta = {} is outside [0, 1]",
                self.eta
            )));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidConfig(format!("s = {} is not finite", self.s)));
        }
        if !(self.temp >= 0.0 && self.temp.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "T = {} must be finite and non-negative",
                self.temp
            )));
        }
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "N = {} must be finite and non-negative",
                self.nbar
            )));
        }
        Ok(())
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn with_temp(self, temp: f64) -> Self {
        Self { temp, ..self }
    }
}

/// Eigen-decomposition of the coupling matrix `Ω`.
///
/// `vectors[(j, k)]` is component `k` of eigenvector `j`, so the rows are the
/// eigenvectors and `vectors` maps local to global quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSpectrum {
    pub lambda: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl OmegaSpectrum {
    /// Spectrum of an arbitrary symmetric coupling matrix, eigenvalues descending.
    pub fn from_symmetric(omega: &DMatrix<f64>) -> Result<Self> {
        if omega.nrows() != omega.ncols() {
            return Err(Error::Dimension {
                expected: omega.nrows(),
                got: omega.ncols(),
            });
        }
        let asym = (omega - omega.transpose()).amax();
        if asym > 1e-12 * omega.amax().max(1.0) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let eig = SymmetricEigen::new((omega + omega.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..omega.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let n = omega.nrows();
        let mut vectors = DMatrix::zeros(n, n);
        for (row, &col) in order.iter().enumerate() {
            for k in 0..n {
                vectors[(row, k)] = eig.eigenvectors[(k, col)];
            }
        }
        Ok(Self {
            lambda: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// `f(Ω) = vᵀ diag(f(λ)) v`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.len(),
            self.lambda.iter().map(|&l| f(l)),
        ));
        self.vectors.transpose() * diag * &self.vectors
    }
}

/// Nearest-neighbour coupling matrix: ones on the first off-diagonals.
pub fn omega_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 })
}

/// Analytic spectrum of the tridiagonal `Ω`: `λ_j = 2cos(πj/(n+1))`,
/// `v_{j,k} = √(2/(n+1)) sin(jkπ/(n+1))`.
///
/// The sign symmetry `λ_{n+1-j} = -λ_j` is imposed exactly, and the middle
/// eigenvalue of odd `n` is exactly zero.
pub fn omega_spectrum(n: usize) -> OmegaSpectrum {
    let np1 = (n + 1) as f64;
    let mut lambda = vec![0.0; n];
    for j in 1..=n {
        lambda[j - 1] = if 2 * j == n + 1 {
            0.0
        } else if 2 * j > n + 1 {
            -lambda[n - j]
        } else {
            2.0 * (std::f64::consts::PI * j as f64 / np1).cos()
        };
    }
    let norm = (2.0 / np1).sqrt();
    let vectors = DMatrix::from_fn(n, n, |j, k| {
        norm * (((j + 1) * (k + 1)) as f64 * std::f64::consts::PI / np1).sin()
    });
    OmegaSpectrum { lambda, vectors }
}

/// One environment mode in the global basis: `(T + 1/2) diag(e^s, e^-s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalEnvMode {
    pub index: usize,
    pub s: f64,
    pub temp: f64,
}

impl GlobalEnvMode {
    pub fn new(index: usize, s: f64, temp: f64) -> Self {
        Self { index, s, temp }
    }

    pub fn cov(&self) -> SingleModeCov {
        SingleModeCov::new(self.temp, self.s)
    }

    pub fn q_variance(&self) -> f64 {
        (self.temp + VACUUM_VARIANCE) * self.s.exp()
    }

    pub fn p_variance(&self) -> f64 {
        (self.temp + VACUUM_VARIANCE) * (-self.s).exp()
    }
}

pub fn env_global_modes(cfg: &ChannelConfig) -> Vec<GlobalEnvMode> {
    global_modes_from_spectrum(&omega_spectrum(cfg.n), cfg.s, cfg.temp)
}

pub fn global_modes_from_spectrum(
    spectrum: &OmegaSpectrum,
    s: f64,
    temp: f64,
) -> Vec<GlobalEnvMode> {
    spectrum
        .lambda
        .iter()
        .enumerate()
        .map(|(j, &l)| GlobalEnvMode::new(j, s * l, temp))
        .collect()
}

/// Environment covariance in the local basis, `(T+1/2)(e^{sΩ} ⊕ e^{-sΩ})`.
pub fn env_local_covariance(cfg: &ChannelConfig) -> GeneralCov {
    local_covariance_from_spectrum(&omega_spectrum(cfg.n), cfg.s, cfg.temp)
}

pub fn local_covariance_from_spectrum(spectrum: &OmegaSpectrum, s: f64, temp: f64) -> GeneralCov {
    let n = spectrum.len();
    let scale = temp + VACUUM_VARIANCE;
    let q = spectrum.apply_function(|l| scale * (s * l).exp());
    let p = spectrum.apply_function(|l| scale * (-s * l).exp());
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&q);
    m.view_mut((n, n), (n, n)).copy_from(&p);
    GeneralCov { modes: n, matrix: m }
}

/// Thermal excitation seen by use `k` (zero-based) when cross-use correlations
/// are ignored: `(T+1/2) Σ_j v_{j,k}² e^{s_j} − 1/2`.
pub fn local_effective_temperature(cfg: &ChannelConfig, k: usize) -> Result<f64> {
    let spectrum = omega_spectrum(cfg.n);
    effective_temperature_from_spectrum(&spectrum, cfg.s, cfg.temp, k)
}

pub fn effective_temperature_from_spectrum(
    spectrum: &OmegaSpectrum,
    s: f64,
    temp: f64,
    k: usize,
) -> Result<f64> {
    let n = spectrum.len();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, modes: n });
    }
    let sum: f64 = (0..n)
        .map(|j| spectrum.vectors[(j, k)].powi(2) * (s * spectrum.lambda[j]).exp())
        .sum();
    Ok((temp + VACUUM_VARIANCE) * sum - VACUUM_VARIANCE)
}

pub fn local_effective_temperatures(cfg: &ChannelConfig) -> Vec<f64> {
    let spectrum = omega_spectrum(cfg.n);
    (0..cfg.n)
        .map(|k| {
            effective_temperature_from_spectrum(&spectrum, cfg.s, cfg.temp, k)
                .expect("index in range")
        })
        .collect()
}

/// Paired form of the effective temperature, summing `cosh(s_j)` over the
/// positive half of the spectrum (plus the zero mode for odd `n`).
pub fn local_effective_temperature_paired(cfg: &ChannelConfig, k: usize) -> Result<f64> {
    let n = cfg.n;
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, modes: n });
    }
    let spectrum = omega_spectrum(n);
    let scale = cfg.temp + VACUUM_VARIANCE;
    let half = n / 2;
    let paired: f64 = (0..half)
        .map(|j| spectrum.vectors[(j, k)].powi(2) * (cfg.s * spectrum.lambda[j]).cosh())
        .sum();
    let middle = if n % 2 == 1 {
        scale * spectrum.vectors[(half, k)].powi(2)
    } else {
        0.0
    };
    Ok(2.0 * scale * paired + middle - VACUUM_VARIANCE)
}

/// Beam-splitter action on covariance matrices: `η σ + (1 − η) V`.
pub fn beamsplitter_output(sigma_in: &GeneralCov, env: &GeneralCov, eta: f64) -> Result<GeneralCov> {
    if sigma_in.modes != env.modes {
        return Err(Error::Dimension {
            expected: sigma_in.modes,
            got: env.modes,
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain {
            what: "beamsplitter_output",
            value: eta,
        });
    }
    Ok(GeneralCov {
        modes: sigma_in.modes,
        matrix: &sigma_in.matrix * eta + &env.matrix * (1.0 - eta),
    })
}

fn doubled(v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    o.view_mut((0, 0), (n, n)).copy_from(v);
    o.view_mut((n, n), (n, n)).copy_from(v);
    o
}

/// Rotates a local-basis covariance into the global basis of `spectrum`.
pub fn to_global_basis(cov: &GeneralCov, spectrum: &OmegaSpectrum) -> Result<GeneralCov> {
    if cov.modes != spectrum.len() {
        return Err(Error::Dimension {
            expected: spectrum.len(),
            got: cov.modes,
        });
    }
    let o = doubled(&spectrum.vectors);
    Ok(GeneralCov {
        modes: cov.modes,
        matrix: &o * &cov.matrix * o.transpose(),
    })
}

/// Inverse of [`to_global_basis`].
pub fn to_local_basis(cov: &GeneralCov, spectrum: &OmegaSpectrum) -> Result<GeneralCov> {
    if cov.modes != spectrum.len() {
        return Err(Error::Dimension {
            expected: spectrum.len(),
            got: cov.modes,
        });
    }
    let o = doubled(&spectrum.vectors);
    Ok(GeneralCov {
        modes: cov.modes,
        matrix: o.transpose() * &cov.matrix * o,
    })
}

/// Environment diagonalized by a passive (orthogonal symplectic) transformation
/// `O = [[X, Y], [-Y, X]]`: `V = O (D_Q ⊕ D_P) Oᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveEnvSpec {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub d_q: Vec<f64>,
    pub d_p: Vec<f64>,
}

const PASSIVE_TOL: f64 = 1e-10;

impl PassiveEnvSpec {
    /// The squeezed thermal environment of `cfg`, written in passive form.
    pub fn from_config(cfg: &ChannelConfig) -> Self {
        let spectrum = omega_spectrum(cfg.n);
        let scale = cfg.temp + VACUUM_VARIANCE;
        Self {
            x: spectrum.vectors.transpose(),
            y: DMatrix::zeros(cfg.n, cfg.n),
            d_q: spectrum.lambda.iter().map(|l| scale * (cfg.s * l).exp()).collect(),
            d_p: spectrum.lambda.iter().map(|l| scale * (-cfg.s * l).exp()).collect(),
        }
    }

    pub fn modes(&self) -> usize {
        self.d_q.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.modes();
        for (name, m) in [("X", &self.x), ("Y", &self.y)] {
            if m.shape() != (n, n) {
                return Err(Error::InvalidPassiveEnv(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if self.d_p.len() != n {
            return Err(Error::InvalidPassiveEnv(format!(
                "D_P has {} entries, expected {n}",
                self.d_p.len()
            )));
        }
        let unit = &self.x * self.x.transpose() + &self.y * self.y.transpose()
            - DMatrix::<f64>::identity(n, n);
        if unit.amax() > PASSIVE_TOL {
            return Err(Error::InvalidPassiveEnv(format!(
                "X Xᵀ + Y Yᵀ = I violated by {:e}",
                unit.amax()
            )));
        }
        let sym = &self.x * self.y.transpose() - &self.y * self.x.transpose();
        if sym.amax() > PASSIVE_TOL {
            return Err(Error::InvalidPassiveEnv(format!(
                "X Yᵀ − Y Xᵀ = 0 violated by {:e}",
                sym.amax()
            )));
        }
        for (j, (&q, &p)) in self.d_q.iter().zip(&self.d_p).enumerate() {
            if !(q > 0.0 && p > 0.0) {
                return Err(Error::InvalidPassiveEnv(format!(
                    "D_Q, D_P must be positive (entry {j}: {q}, {p})"
                )));
            }
            if q * p < 0.25 * (1.0 - 1e-12) {
                return Err(Error::InvalidPassiveEnv(format!(
                    "D_Q D_P ≥ 1/4 violated at entry {j}: {}",
                    q * p
                )));
            }
        }
        Ok(())
    }

    /// `O = [[X, Y], [-Y, X]]`.
    pub fn orthogonal_symplectic(&self) -> DMatrix<f64> {
        let n = self.modes();
        let mut o = DMatrix::zeros(2 * n, 2 * n);
        o.view_mut((0, 0), (n, n)).copy_from(&self.x);
        o.view_mut((0, n), (n, n)).copy_from(&self.y);
        o.view_mut((n, 0), (n, n)).copy_from(&(-&self.y));
        o.view_mut((n, n), (n, n)).copy_from(&self.x);
        o
    }

    /// The diagonal blocks read as squeezed thermal modes:
    /// `T_j + 1/2 = √(D_Q D_P)`, `e^{2 s_j} = D_Q / D_P`.
    pub fn global_modes(&self) -> Vec<GlobalEnvMode> {
        self.d_q
            .iter()
            .zip(&self.d_p)
            .enumerate()
            .map(|(j, (&q, &p))| {
                GlobalEnvMode::new(
                    j,
                    0.5 * (q / p).ln(),
                    ((q * p).sqrt() - VACUUM_VARIANCE).max(0.0),
                )
            })
            .collect()
    }
}

/// Assembles the local-basis covariance of a passive-diagonalizable environment.
pub fn build_passive_env(spec: &PassiveEnvSpec) -> Result<GeneralCov> {
    spec.validate()?;
    let n = spec.modes();
    let dq = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(spec.d_q.clone()));
    let dp = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(spec.d_p.clone()));
    let (x, y) = (&spec.x, &spec.y);
    let (xt, yt) = (x.transpose(), y.transpose());
    let qq = x * &dq * &xt + y * &dp * &yt;
    let qp = y * &dp * &xt - x * &dq * &yt;
    let pq = x * &dp * &yt - y * &dq * &xt;
    let pp = x * &dp * &xt + y * &dq * &yt;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&qq);
    m.view_mut((0, n), (n, n)).copy_from(&qp);
    m.view_mut((n, 0), (n, n)).copy_from(&pq);
    m.view_mut((n, n), (n, n)).copy_from(&pp);
    Ok(GeneralCov { modes: n, matrix: m })
}
