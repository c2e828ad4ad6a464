//! Entropy and symplectic primitives for bosonic Gaussian states.
//!
//! Conventions: ħ = 1 and the vacuum has quadrature variance 1/2. An `m`-mode
//! covariance matrix is stored in `(q_1, …, q_m, p_1, …, p_m)` ordering, except
//! for [`TwoModeCov`], which keeps the per-mode block layout `(q_1, p_1, q_2, p_2)`.
//! All entropies are in bits.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance of a vacuum quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Symplectic eigenvalues down to `1/2 - PHYSICALITY_TOL` are accepted as physical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Below this argument `g` is evaluated from its leading-order series.
const G_SERIES_CUTOFF: f64 = 1e-12;

/// Symplectic eigenvalues within this of 1/2 count as vacuum in entropies.
const SPECTRAL_FLOOR: f64 = 1e-13;

/// Entropy (bits) of a thermal state with mean excitation `x`:
/// `g(x) = (x+1) log2(x+1) - x log2 x`.
///
/// Negative arguments within [`PHYSICALITY_TOL`] are treated as zero.
pub fn g_entropy(x: f64) -> Result<f64> {
    if x.is_nan() || x < -PHYSICALITY_TOL {
        return Err(Error::Domain {
            what: "g_entropy",
            value: x,
        });
    }
    Ok(g(x))
}

/// `g` without the domain check; negative arguments are clamped to zero.
pub fn g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < G_SERIES_CUTOFF {
        // (x+1)ln(x+1) = x + O(x^2)
        x * (1.0 - x.ln()) / std::f64::consts::LN_2
    } else {
        // (x+1)ln(1+x) - x ln x = ln(1+x) + x ln(1+1/x), stable for large x
        (x.ln_1p() + x * (1.0 / x).ln_1p()) / std::f64::consts::LN_2
    }
}

/// `g'(x) = log2(1 + 1/x)`; infinite at zero.
pub fn g_derivative(x: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else {
        (1.0 / x).ln_1p() / std::f64::consts::LN_2
    }
}

/// Single-mode covariance `(t + 1/2) diag(e^r, e^-r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleModeCov {
    /// Mean thermal excitation.
    pub t: f64,
    /// Squeezing parameter.
    pub r: f64,
}

impl SingleModeCov {
    pub fn new(t: f64, r: f64) -> Self {
        Self { t, r }
    }

    pub fn q_variance(&self) -> f64 {
        (self.t + VACUUM_VARIANCE) * self.r.exp()
    }

    pub fn p_variance(&self) -> f64 {
        (self.t + VACUUM_VARIANCE) * (-self.r).exp()
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.q_variance(), 0.0, 0.0, self.p_variance())
    }

    pub fn det(&self) -> f64 {
        let nu = self.symplectic_eigenvalue();
        nu * nu
    }

    pub fn symplectic_eigenvalue(&self) -> f64 {
        self.t + VACUUM_VARIANCE
    }

    pub fn entropy(&self) -> f64 {
        g(self.t)
    }
}

/// Two-mode covariance matrix in block form `[[A, Cᵀ], [C, B]]`, with `A` the
/// first mode, `B` the second mode and `C` the cross block `⟨mode2 · mode1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCov {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

impl TwoModeCov {
    pub fn new(a: Matrix2<f64>, b: Matrix2<f64>, c: Matrix2<f64>) -> Self {
        Self { a, b, c }
    }

    pub fn product(a: Matrix2<f64>, b: Matrix2<f64>) -> Self {
        Self::new(a, b, Matrix2::zeros())
    }

    /// 4×4 matrix in `(q_1, p_1, q_2, p_2)` ordering.
    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.b);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.c);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.c.transpose());
        m
    }

    /// Converts to the `(q_1, q_2, p_1, p_2)` ordering used by [`GeneralCov`].
    pub fn to_general(&self) -> GeneralCov {
        let m = self.matrix();
        // block index -> general index
        let perm = [0usize, 2, 1, 3];
        let mut out = DMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                out[(perm[i], perm[j])] = m[(i, j)];
            }
        }
        GeneralCov {
            modes: 2,
            matrix: out,
        }
    }

    pub fn from_general(cov: &GeneralCov) -> Result<Self> {
        if cov.modes != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: cov.modes,
            });
        }
        let m = &cov.matrix;
        let block = |r: usize, c: usize| {
            // mode r rows (q_r, p_r) = general rows (r, 2 + r)
            Matrix2::new(
                m[(r, c)],
                m[(r, 2 + c)],
                m[(2 + r, c)],
                m[(2 + r, 2 + c)],
            )
        };
        Ok(Self::new(block(0, 0), block(1, 1), block(1, 0)))
    }

    /// The two symplectic eigenvalues `(ν₊, ν₋)` from the invariants
    /// `Δ = det A + det B + 2 det C` and `det V`. Accuracy drops to about
    /// `√ε` when `ν₊ ≈ ν₋`; [`symplectic_eigenvalues`] does not have that
    /// problem.
    pub fn symplectic_pair(&self) -> (f64, f64) {
        let delta = self.a.determinant() + self.b.determinant() + 2.0 * self.c.determinant();
        let det = self.matrix().determinant().max(0.0);
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        let plus_sq = 0.5 * (delta + disc);
        let nu_plus = plus_sq.max(0.0).sqrt();
        let nu_minus = if nu_plus > 0.0 { det.sqrt() / nu_plus } else { 0.0 };
        (nu_plus, nu_minus)
    }
}

/// Covariance matrix of `modes` modes in `(Q…, P…)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralCov {
    pub modes: usize,
    pub matrix: DMatrix<f64>,
}

impl GeneralCov {
    /// Wraps a `2m × 2m` matrix, checking shape and symmetry.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::Dimension {
                expected: rows,
                got: cols,
            });
        }
        if rows % 2 != 0 {
            return Err(Error::Dimension {
                expected: rows + 1,
                got: rows,
            });
        }
        let asym = max_asymmetry(&matrix);
        if asym > symmetry_tolerance(&matrix) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self {
            modes: rows / 2,
            matrix,
        })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::thermal(modes, 0.0)
    }

    pub fn thermal(modes: usize, t: f64) -> Self {
        Self {
            modes,
            matrix: DMatrix::identity(2 * modes, 2 * modes) * (t + VACUUM_VARIANCE),
        }
    }

    /// Product state of single-mode blocks (each in `(q, p)` ordering).
    pub fn from_single_modes(blocks: &[Matrix2<f64>]) -> Self {
        let m = blocks.len();
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        for (k, b) in blocks.iter().enumerate() {
            out[(k, k)] = b[(0, 0)];
            out[(k, m + k)] = b[(0, 1)];
            out[(m + k, k)] = b[(1, 0)];
            out[(m + k, m + k)] = b[(1, 1)];
        }
        Self {
            modes: m,
            matrix: out,
        }
    }

    /// Direct sum, keeping the `(Q…, P…)` ordering of the result.
    pub fn direct_sum(&self, other: &GeneralCov) -> GeneralCov {
        let (m1, m2) = (self.modes, other.modes);
        let m = m1 + m2;
        let map1 = |i: usize| if i < m1 { i } else { m + (i - m1) };
        let map2 = |i: usize| if i < m2 { m1 + i } else { m + m1 + (i - m2) };
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..2 * m1 {
            for j in 0..2 * m1 {
                out[(map1(i), map1(j))] = self.matrix[(i, j)];
            }
        }
        for i in 0..2 * m2 {
            for j in 0..2 * m2 {
                out[(map2(i), map2(j))] = other.matrix[(i, j)];
            }
        }
        GeneralCov {
            modes: m,
            matrix: out,
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Symplectic form `[[0, I], [-I, 0]]` for `modes` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        s[(k, modes + k)] = 1.0;
        s[(modes + k, k)] = -1.0;
    }
    s
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn symmetry_tolerance(m: &DMatrix<f64>) -> f64 {
    1e-12 * m.amax().max(1.0)
}

/// Symplectic eigenvalues, sorted descending.
///
/// Computed as the singular spectrum of the antisymmetric matrix `V^½ Σ V^½`,
/// which only needs symmetric eigensolves.
pub fn symplectic_eigenvalues(cov: &GeneralCov) -> Result<Vec<f64>> {
    let v = &cov.matrix;
    let asym = max_asymmetry(v);
    if asym > symmetry_tolerance(v) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let sym = (v + v.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_ev = eig.eigenvalues.min();
    if min_ev < -1e-12 * eig.eigenvalues.amax().max(1.0) {
        return Err(Error::NotPositive {
            min_eigenvalue: min_ev,
        });
    }
    let sqrt_diag = eig.eigenvalues.map(|e| e.max(0.0).sqrt());
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&sqrt_diag)
        * eig.eigenvectors.transpose();
    let k = &root * symplectic_form(cov.modes) * &root;
    let ktk = k.transpose() * &k;
    let ktk = (&ktk + ktk.transpose()) * 0.5;
    let mut sq: Vec<f64> = SymmetricEigen::new(ktk)
        .eigenvalues
        .iter()
        .map(|e| e.max(0.0).sqrt())
        .collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    Ok(sq.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Von Neumann entropy `Σ g(ν − 1/2)` in bits.
pub fn von_neumann_entropy(cov: &GeneralCov) -> Result<f64> {
    let nus = symplectic_eigenvalues(cov)?;
    entropy_from_symplectic(&nus)
}

pub(crate) fn entropy_from_symplectic(nus: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &nu in nus {
        if nu < VACUUM_VARIANCE - PHYSICALITY_TOL {
            return Err(Error::Unphysical { nu });
        }
        // excitations at roundoff level would otherwise feed g's infinite slope
        let x = nu - VACUUM_VARIANCE;
        total += if x < SPECTRAL_FLOOR { 0.0 } else { g(x) };
    }
    Ok(total)
}

/// Two-mode pure state whose first-mode marginal is `SingleModeCov(t, r)`.
///
/// The ancilla carries the swapped diagonal `(b, a)` and the cross block is
/// `diag(x, -x)` with `x = √(ab − 1/4)`.
pub fn purify_single_mode(t: f64, r: f64) -> Result<TwoModeCov> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain {
            what: "purify_single_mode",
            value: t,
        });
    }
    let cov = SingleModeCov::new(t, r);
    let (a, b) = (cov.q_variance(), cov.p_variance());
    // ab - 1/4 = t(t+1), exact for t >= 0
    let radicand = t * (t + 1.0);
    if radicand < 0.0 {
        return Err(Error::Internal(format!(
            "purification radicand {radicand} is negative"
        )));
    }
    let x = radicand.sqrt();
    Ok(TwoModeCov::new(
        Matrix2::new(a, 0.0, 0.0, b),
        Matrix2::new(b, 0.0, 0.0, a),
        Matrix2::new(x, 0.0, 0.0, -x),
    ))
}

/// Smallest symplectic eigenvalue of the partial transpose (momentum of the
/// second mode flipped). The state is separable iff the result is ≥ 1/2.
pub fn ppt_min_symplectic(cov: &TwoModeCov) -> Result<f64> {
    let general = cov.to_general();
    let nus = symplectic_eigenvalues(&general)?;
    if let Some(&nu) = nus.iter().find(|&&nu| nu < VACUUM_VARIANCE - PHYSICALITY_TOL) {
        return Err(Error::Unphysical { nu });
    }
    let flip = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let transposed = TwoModeCov::new(cov.a, flip * cov.b * flip, flip * cov.c);
    let nus = symplectic_eigenvalues(&transposed.to_general())?;
    Ok(nus.into_iter().fold(f64::INFINITY, f64::min))
}

/// Marginal of mode `k` (zero-based) as a 2×2 `(q, p)` block.
pub fn reduce_to_mode(cov: &GeneralCov, k: usize) -> Result<Matrix2<f64>> {
    let m = cov.modes;
    if k >= m {
        return Err(Error::IndexOutOfRange { index: k, modes: m });
    }
    let v = &cov.matrix;
    Ok(Matrix2::new(
        v[(k, k)],
        v[(k, m + k)],
        v[(m + k, k)],
        v[(m + k, m + k)],
    ))
}

/// Entropy of a single-mode 2×2 covariance, via `ν = √det`.
pub fn single_mode_entropy(block: &Matrix2<f64>) -> Result<f64> {
    let nu = block.determinant().max(0.0).sqrt();
    entropy_from_symplectic(&[nu])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_entropy(0.0).unwrap(), 0.0);
        assert!(close(g_entropy(1.0).unwrap(), 2.0, 1e-15));
        // 50-digit evaluation of the closed form
        assert!(close(g_entropy(7.2).unwrap(), 4.386_538_332_596_275, 1e-13));
        assert!(close(g(2.0), 2.754_887_502_163_468_5, 1e-14));
        assert!(close(g(8.0), 4.529_325_012_980_811, 1e-13));
    }

    #[test]
    fn g_domain() {
        assert!(g_entropy(-1e-3).is_err());
        assert!(g_entropy(f64::NAN).is_err());
        assert_eq!(g_entropy(-1e-12).unwrap(), 0.0);
        let tiny = g(1e-14);
        assert!(tiny > 0.0 && tiny < 1e-11);
        // series and closed form agree across the cutoff
        let below = g(0.999e-12);
        let above = g(1.001e-12);
        assert!(below < above && (above - below) / above < 1e-2);
    }

    #[test]
    fn g_monotone_and_concave_on_grid() {
        let h = 1e-3;
        let xs: Vec<f64> = (0..2000).map(|i| 0.01 + i as f64 * 0.01).collect();
        for &x in &xs {
            assert!(g(x + h) > g(x));
            let second = g(x + h) - 2.0 * g(x) + g(x - h);
            assert!(second < 0.0, "not concave at {x}");
        }
    }

    #[test]
    fn g_derivative_matches_difference() {
        for &x in &[0.05, 0.5, 3.0, 40.0] {
            let h = 1e-6 * x;
            let fd = (g(x + h) - g(x - h)) / (2.0 * h);
            assert!((fd - g_derivative(x)).abs() < 1e-7 * g_derivative(x));
        }
    }

    #[test]
    fn vacuum_spectrum() {
        let nus = symplectic_eigenvalues(&GeneralCov::vacuum(2)).unwrap();
        assert_eq!(nus.len(), 2);
        for nu in nus {
            assert!(close(nu, 0.5, 1e-14));
        }
        assert!(close(von_neumann_entropy(&GeneralCov::vacuum(3)).unwrap(), 0.0, 1e-14));
    }

    #[test]
    fn squeezed_thermal_spectrum() {
        let cov = SingleModeCov::new(1.3, 0.7);
        let general = GeneralCov::from_single_modes(&[cov.matrix()]);
        let nus = symplectic_eigenvalues(&general).unwrap();
        assert!(close(nus[0], 1.8, 1e-13));
        assert!(close(cov.det(), 1.8 * 1.8, 1e-13));
        assert!(close(von_neumann_entropy(&GeneralCov::thermal(1, 1.0)).unwrap(), 2.0, 1e-13));
    }

    #[test]
    fn non_symmetric_rejected() {
        let mut m = DMatrix::identity(2, 2) * 0.5;
        m[(0, 1)] = 0.1;
        let cov = GeneralCov {
            modes: 1,
            matrix: m.clone(),
        };
        assert!(matches!(
            symplectic_eigenvalues(&cov),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(GeneralCov::new(m).is_err());
    }

    #[test]
    fn unphysical_rejected() {
        let cov = GeneralCov::from_single_modes(&[Matrix2::new(0.3, 0.0, 0.0, 0.3)]);
        assert!(matches!(
            von_neumann_entropy(&cov),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn purification_examples() {
        let vac = purify_single_mode(0.0, 0.0).unwrap();
        assert_eq!(vac.c, Matrix2::zeros());
        assert_eq!(vac.a, Matrix2::identity() * 0.5);

        let p = purify_single_mode(1.0, 0.0).unwrap();
        assert!(close(p.c[(0, 0)], 2f64.sqrt(), 1e-15));
        assert!(close(p.c[(1, 1)], -(2f64.sqrt()), 1e-15));

        for &(t, r) in &[(1.0, 0.0), (1.0, 1.0), (0.3, -2.0), (7.0, 0.4)] {
            let p = purify_single_mode(t, r).unwrap();
            let nus = symplectic_eigenvalues(&p.to_general()).unwrap();
            for nu in nus {
                assert!(close(nu, 0.5, 1e-10), "t={t} r={r} nu={nu}");
            }
            let marginal = reduce_to_mode(&p.to_general(), 0).unwrap();
            let expect = SingleModeCov::new(t, r).matrix();
            assert!((marginal - expect).amax() < 1e-14);
        }
        assert!(purify_single_mode(-0.1, 0.0).is_err());
    }

    #[test]
    fn two_mode_squeezed_vacuum_is_pure() {
        let p = purify_single_mode(2.5, 0.0).unwrap();
        assert!(von_neumann_entropy(&p.to_general()).unwrap() < 1e-9);
        let (plus, minus) = p.symplectic_pair();
        assert!(close(plus, 0.5, 1e-7) && close(minus, 0.5, 1e-7));
    }

    #[test]
    fn ordering_round_trip() {
        let p = purify_single_mode(1.2, 0.3).unwrap();
        let back = TwoModeCov::from_general(&p.to_general()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn ppt_of_products() {
        let vac = TwoModeCov::product(Matrix2::identity() * 0.5, Matrix2::identity() * 0.5);
        assert!(close(ppt_min_symplectic(&vac).unwrap(), 0.5, 1e-14));
        let th = TwoModeCov::product(Matrix2::identity() * 3.5, Matrix2::identity() * 3.5);
        assert!(close(ppt_min_symplectic(&th).unwrap(), 3.5, 1e-13));
        // two-mode squeezed vacuum is entangled
        let p = purify_single_mode(1.0, 0.0).unwrap();
        assert!(ppt_min_symplectic(&p).unwrap() < 0.5);
    }

    #[test]
    fn reduce_bounds() {
        let v = GeneralCov::vacuum(3);
        assert_eq!(reduce_to_mode(&v, 2).unwrap(), Matrix2::identity() * 0.5);
        assert!(matches!(
            reduce_to_mode(&v, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn direct_sum_layout() {
        let a = GeneralCov::from_single_modes(&[Matrix2::new(1.0, 0.2, 0.2, 2.0)]);
        let b = GeneralCov::from_single_modes(&[
            Matrix2::new(3.0, 0.0, 0.0, 4.0),
            Matrix2::new(5.0, 0.1, 0.1, 6.0),
        ]);
        let s = a.direct_sum(&b);
        assert_eq!(reduce_to_mode(&s, 0).unwrap(), Matrix2::new(1.0, 0.2, 0.2, 2.0));
        assert_eq!(reduce_to_mode(&s, 2).unwrap(), Matrix2::new(5.0, 0.1, 0.1, 6.0));
        let whole = von_neumann_entropy(&s).unwrap();
        let parts = von_neumann_entropy(&a).unwrap() + von_neumann_entropy(&b).unwrap();
        assert!(close(whole, parts, 1e-12));
    }
}
