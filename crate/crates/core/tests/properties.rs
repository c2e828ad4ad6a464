use nalgebra::DMatrix;
use proptest::prelude::*;

use corrnoise::analytic::{classical_lower_analytic, classical_upper_bound};
use corrnoise::channel::local_effective_temperature;
use corrnoise::gaussian::{
    g, g_derivative, ppt_min_symplectic, purify_single_mode, symplectic_eigenvalues,
    von_neumann_entropy, GeneralCov, SingleModeCov, TwoModeCov,
};
use corrnoise::scan::{round_sig, Dataset, Quantity, Row};
use corrnoise::ChannelConfig;

/// Beam splitter of angle `theta` between modes `i` and `j`, `(Q…, P…)` order.
fn beam_splitter(modes: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    let (c, sn) = (theta.cos(), theta.sin());
    for off in [0, modes] {
        s[(off + i, off + i)] = c;
        s[(off + j, off + j)] = c;
        s[(off + i, off + j)] = sn;
        s[(off + j, off + i)] = -sn;
    }
    s
}

fn squeezer(modes: usize, k: usize, r: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    s[(k, k)] = (r / 2.0).exp();
    s[(modes + k, modes + k)] = (-r / 2.0).exp();
    s
}

fn thermal_blocks(ts: &[f64]) -> GeneralCov {
    let blocks: Vec<_> = ts.iter().map(|&t| SingleModeCov::new(t, 0.0).matrix()).collect();
    GeneralCov::from_single_modes(&blocks)
}

proptest! {
    #[test]
    fn g_is_increasing_and_concave(x in 0.0f64..50.0, h in 1e-3f64..1.0) {
        prop_assert!(g(x + h) > g(x));
        prop_assert!(g(x) + g(x + 2.0 * h) <= 2.0 * g(x + h) + 1e-12);
    }

    #[test]
    fn g_derivative_matches_difference(x in 0.01f64..50.0) {
        let h = 1e-5 * x.max(1.0);
        let fd = (g(x + h) - g(x - h)) / (2.0 * h);
        prop_assert!((g_derivative(x) - fd).abs() <= 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn symplectic_spectrum_is_invariant(
        ts in prop::collection::vec(0.0f64..5.0, 2..6),
        r in -2.0f64..2.0,
        theta in 0.0f64..6.3,
    ) {
        let m = ts.len();
        let s = beam_splitter(m, 0, m - 1, theta) * squeezer(m, 0, r) * beam_splitter(m, 0, 1, 0.7);
        let base = thermal_blocks(&ts);
        let moved = GeneralCov::new(&s * &base.matrix * s.transpose()).unwrap();
        let mut want: Vec<f64> = ts.iter().map(|t| t + 0.5).collect();
        want.sort_by(f64::total_cmp);
        let mut got = symplectic_eigenvalues(&moved).unwrap();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9 * b.max(1.0), "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn entropy_is_additive(
        a in prop::collection::vec(0.0f64..4.0, 1..4),
        b in prop::collection::vec(0.0f64..4.0, 1..4),
    ) {
        let (x, y) = (thermal_blocks(&a), thermal_blocks(&b));
        let joint = von_neumann_entropy(&x.direct_sum(&y)).unwrap();
        let sum = von_neumann_entropy(&x).unwrap() + von_neumann_entropy(&y).unwrap();
        prop_assert!((joint - sum).abs() < 1e-9);
    }

    #[test]
    fn purification_is_pure(t in 0.0f64..20.0, r in -4.0f64..4.0) {
        let pure = purify_single_mode(t, r).unwrap();
        let general = pure.to_general();
        for nu in symplectic_eigenvalues(&general).unwrap() {
            prop_assert!((nu - 0.5).abs() < 1e-9 * (1.0 + t));
        }
        prop_assert!(von_neumann_entropy(&general).unwrap().abs() < 1e-6);
    }

    #[test]
    fn product_states_are_ppt(t1 in 0.0f64..5.0, r1 in -3.0f64..3.0, t2 in 0.0f64..5.0, r2 in -3.0f64..3.0) {
        let cov = TwoModeCov::product(
            SingleModeCov::new(t1, r1).matrix(),
            SingleModeCov::new(t2, r2).matrix(),
        );
        prop_assert!(ppt_min_symplectic(&cov).unwrap() >= 0.5 - 1e-9);
    }

    #[test]
    fn effective_temperature_grows_with_squeezing(
        n in 2usize..9,
        temp in 0.0f64..3.0,
        s in 0.0f64..2.5,
        ds in 0.01f64..0.5,
        flip in any::<bool>(),
    ) {
        let sign = if flip { -1.0 } else { 1.0 };
        let cfg = ChannelConfig::new(n, 0.5, sign * s, temp, 1.0).unwrap();
        let wider = cfg.with_s(sign * (s + ds));
        for k in 0..n {
            let a = local_effective_temperature(&cfg, k).unwrap();
            let b = local_effective_temperature(&wider, k).unwrap();
            prop_assert!(a >= temp - 1e-12);
            prop_assert!(b >= a - 1e-12);
        }
    }

    #[test]
    fn closed_form_bounds_are_ordered(
        n in 1usize..12,
        eta in 0.02f64..0.98,
        s in -3.0f64..3.0,
        temp in 0.0f64..3.0,
        nbar in 0.1f64..10.0,
    ) {
        let cfg = ChannelConfig::new(n, eta, s, temp, nbar).unwrap();
        let (lower, upper) = (classical_lower_analytic(&cfg), classical_upper_bound(&cfg));
        prop_assert!(lower.value <= upper.value + 1e-12);
        prop_assert!(lower.value >= -1e-12);
    }

    #[test]
    fn csv_round_trips(
        points in prop::collection::vec(
            (1usize..20, 0.0f64..1.0, -5.0f64..5.0, 0.0f64..5.0, 0.0f64..20.0, 0usize..11, -1e3f64..1e3, any::<bool>()),
            1..20,
        ),
    ) {
        let rows: Vec<Row> = points
            .into_iter()
            .map(|(n, eta, s, temp, nbar, q, value, converged)| Row {
                n,
                eta: round_sig(eta),
                s: round_sig(s),
                temp: round_sig(temp),
                nbar: round_sig(nbar),
                quantity: Quantity::ALL[q],
                value_bits: round_sig(value),
                analytic_valid: converged.then_some(q % 2 == 0),
                converged,
            })
            .collect();
        let data = Dataset { rows };
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, data);
    }
}
