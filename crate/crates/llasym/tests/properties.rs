use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use llasym::asymptote::{evaluate_rho, expansion_from_dressed, ExpansionReport};
use llasym::dressing::{dress_all, DressedSet};
use llasym::excitations::{default_scan_range, find_saddle, special_shift, u_prime, u_second, ShiftKind};
use llasym::fflab::{lagrange_closed_form, lagrange_series, xn_bruteforce, xn_determinant, FFLabInstance, QuadraticPhase, TestNu};
use llasym::model::{bare_phase, bare_phase_c, lieb_kernel, ModelParams};
use llasym::specfun::{barnes_g_log, c0_double_integral, cauchy_transform, ln_gamma, Entire};

fn dressed(c: f64, h: f64) -> DressedSet {
    dress_all(&ModelParams::new(c, h).unwrap(), 64, 1e-12).unwrap()
}

fn frozen_report() -> &'static ExpansionReport {
    static R: OnceLock<ExpansionReport> = OnceLock::new();
    R.get_or_init(|| expansion_from_dressed(&dressed(2.0, 1.0), 0.2, 1, 128).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phase_is_odd(l in -50.0..50.0f64, c in 0.1..20.0f64) {
        let p = ModelParams::new(c, 1.0).unwrap();
        prop_assert!((bare_phase(l, &p) + bare_phase(-l, &p)).abs() < 1e-12);
        let z = bare_phase_c(Complex64::new(l, 0.0), &p).unwrap();
        prop_assert!((z.re - bare_phase(l, &p)).abs() < 1e-12 && z.im.abs() < 1e-12);
    }

    #[test]
    fn kernel_is_phase_derivative(l in -5.0..5.0f64, c in 0.5..10.0f64) {
        let p = ModelParams::new(c, 1.0).unwrap();
        let h = 1e-4;
        let fd = (bare_phase(l + h, &p) - bare_phase(l - h, &p)) / (2.0 * h);
        prop_assert!((fd - lieb_kernel(l, &p)).abs() < 1e-7);
    }

    #[test]
    fn barnes_recurrence(r in 0.0..0.99f64, a in 0.0..std::f64::consts::TAU) {
        let z = Complex64::new(2.0, 0.0) + Complex64::from_polar(r, a);
        let lhs = barnes_g_log(z + 1.0).unwrap() - barnes_g_log(z).unwrap() - ln_gamma(z);
        // equality of logarithms up to a multiple of 2 i pi
        prop_assert!((lhs.exp() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn z_phi_identities(c in 0.5..20.0f64, h in 0.3..3.0f64) {
        let d = dressed(c, h);
        prop_assert!(d.z_identity_residual().unwrap() < 1e-7);
        prop_assert!(d.z_inverse_identity_residual().unwrap() < 1e-7);
        let zq = d.charge(d.q);
        let empty = special_shift(ShiftKind::Empty, &d, 0.0).unwrap();
        prop_assert!((empty.at_minus_q + 0.5 / zq).abs() < 1e-7);
        let mq = special_shift(ShiftKind::MinusQ, &d, 0.0).unwrap();
        prop_assert!((mq.at_minus_q - 1.0 + 0.5 / zq + zq).abs() < 1e-7);
    }

    #[test]
    fn saddle_is_a_maximum(c in 0.5..20.0f64, r in 0.02..0.3f64) {
        let d = dressed(c, 1.0);
        let s = find_saddle(r, &d, default_scan_range(r, d.q)).unwrap();
        prop_assert!(u_prime(s.lambda0, r, &d).abs() < 1e-10);
        prop_assert!(u_second(s.lambda0, r, &d) < 0.0);
    }

    #[test]
    fn cauchy_transform_is_linear(a in -3.0..3.0f64, re in -3.0..3.0f64, im in 0.2..2.0f64) {
        let d = dressed(2.0, 1.0);
        let nu = Entire(|z: Complex64| 0.2 + 0.1 * z - 0.05 * z * z);
        let anu = Entire(move |z: Complex64| a * (0.2 + 0.1 * z - 0.05 * z * z));
        let l = Complex64::new(re, im);
        let one = cauchy_transform(&nu, l, &d).unwrap();
        prop_assert!((cauchy_transform(&anu, l, &d).unwrap() - a * one).norm() < 1e-12 * (1.0 + one.norm()));
        let c0 = c0_double_integral(&nu, &d, &d.params);
        prop_assert!((c0_double_integral(&anu, &d, &d.params) - a * a * c0).norm() < 1e-12 * (1.0 + a * a * c0.norm()));
    }

    #[test]
    fn resummation_identity(n in 1usize..=3, extra in 0i64..=2, amp in -0.3..0.3f64, kind in 0usize..3, x in 0.5..6.0f64) {
        let nu = [TestNu::Constant(amp), TestNu::Gaussian(amp), TestNu::Rational(amp)][kind];
        let inst = FFLabInstance::standard(n, 10.0, n as i64 + 2 + extra, nu, QuadraticPhase { x, tau: 0.25 }).unwrap();
        let b = xn_bruteforce(&inst).unwrap();
        let d = xn_determinant(&inst).unwrap();
        prop_assert!((b - d).norm() < 1e-10 * (1.0 + b.norm()), "{b} vs {d}");
    }

    #[test]
    fn lagrange_sum_matches_closed_form(a in -0.3..0.3f64, beta in -0.4..0.4f64) {
        let phi = move |z: &[Complex64]| a + beta * z[0];
        let f = |z: &[Complex64]| z[0].exp();
        let sums = lagrange_series(&[&phi], &f, &[1.0], 40).unwrap();
        let closed = lagrange_closed_form(&[&phi], &f).unwrap();
        prop_assert!((sums[40] - closed).norm() < 1e-10);
    }

    #[test]
    fn lagrange_increments_shrink(beta in 0.05..0.9f64, gamma in -2.0..2.0f64) {
        let phi = move |z: &[Complex64]| beta * z[0];
        let f = move |z: &[Complex64]| (gamma * z[0]).exp();
        let sums = lagrange_series(&[&phi], &f, &[1.0], 12).unwrap();
        for k in 3..12 {
            prop_assert!((sums[k + 1] - sums[k]).norm() < (sums[k] - sums[k - 1]).norm());
        }
    }

    #[test]
    fn scale_covariance(x in 5.0..50.0f64, s in 1.5..8.0f64) {
        let rep = frozen_report();
        let r = rep.ratio_t_over_x;
        let a = evaluate_rho(rep, x, r * x).unwrap();
        let b = evaluate_rho(rep, s * x, r * s * x).unwrap();
        for ((ta, tb), term) in a.breakdown.iter().zip(&b.breakdown).zip(&rep.terms) {
            if ta.modulus == 0.0 {
                continue;
            }
            let expected = s.powf(-term.total_exponent());
            prop_assert!((tb.modulus / ta.modulus / expected - 1.0).abs() < 1e-10, "{:?}", term.label);
        }
    }
}
