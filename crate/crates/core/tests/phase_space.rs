use core::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use wigmaj_core::gaussian_algebra::{CovarianceMatrix, GaussianStateSpec};
use wigmaj_core::phase_space::*;
use wigmaj_core::symplectic::{beam_splitter, rotation, squeezer, Matrix};
use wigmaj_core::Error;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// |W_1| integral from the antiderivative -(2u+1)e^{-u} of (2u-1)e^{-u}.
fn fock1_abs_oracle() -> f64 {
    let anti = |u: f64| -(2.0 * u + 1.0) * (-u).exp();
    let inner = -(anti(0.5) - anti(0.0));
    let outer = 0.0 - anti(0.5);
    inner + outer
}

/// Explicit sum, together with the sum of absolute terms that bounds its
/// cancellation error.
fn laguerre_direct(n: usize, x: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut mag = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n + 1 - k) as f64 / k as f64;
            fact *= k as f64;
        }
        let term = binom * x.powi(k as i32) / fact;
        s += if k % 2 == 0 { term } else { -term };
        mag += term;
    }
    (s, mag)
}

fn gaussian(sigma: f64) -> WignerEvaluable {
    gaussian_wigner(&GaussianStateSpec::centered(CovarianceMatrix::thermal(1, sigma).unwrap()))
}

#[test]
fn gaussian_spot_values() {
    assert_relative_eq!(gaussian(0.5).eval(&[0.0, 0.0]), 1.0 / PI, epsilon = 1e-15);
    assert_relative_eq!(gaussian(1.0).eval(&[0.0, 0.0]), 1.0 / (2.0 * PI), epsilon = 1e-15);
    let r2: f64 = 0.3 * 0.3 + 1.1 * 1.1;
    assert_relative_eq!(gaussian(0.5).eval(&[0.3, -1.1]), (-r2).exp() / PI, epsilon = 1e-15);
}

#[test]
fn displaced_gaussian_peaks_at_mean() {
    let spec = GaussianStateSpec::new(vec![1.5, -0.5], CovarianceMatrix::vacuum(1)).unwrap();
    let w = gaussian_wigner(&spec);
    assert_relative_eq!(w.eval(&[1.5, -0.5]), 1.0 / PI, epsilon = 1e-15);
    assert!(w.is_normalized() && w.finite_negativity());
    assert!(!w.is_radial());
    assert_relative_eq!(integrate(&w, Transform::Identity, &cfg()).unwrap().value, 1.0, epsilon = 1e-8);
}

#[test]
fn fock_spot_values() {
    assert_relative_eq!(fock_wigner(0).eval(&[0.0, 0.0]), 1.0 / PI, epsilon = 1e-15);
    assert_relative_eq!(fock_wigner(1).eval(&[0.0, 0.0]), -1.0 / PI, epsilon = 1e-15);
    let w = fock_wigner(2);
    assert!(w.is_radial() && w.finite_negativity() && w.is_normalized());
    assert_eq!(w.kind(), &WignerKind::Fock(2));
}

#[test]
fn fock_abs_integral_matches_closed_form() {
    let want = fock1_abs_oracle();
    assert_relative_eq!(want, 4.0 * (-0.5f64).exp() - 1.0, epsilon = 1e-15);
    let got = integrate(&fock_wigner(1), Transform::Abs, &cfg()).unwrap();
    assert_relative_eq!(got.value, want, epsilon = 1e-8);
    assert!(got.error < 1e-8);
}

#[test]
fn fock_states_are_normalized() {
    for n in 0..=15 {
        let got = integrate(&fock_wigner(n), Transform::Identity, &cfg()).unwrap();
        assert_relative_eq!(got.value, 1.0, epsilon = 1e-8);
    }
}

#[test]
fn laguerre_recurrence_matches_direct_sum() {
    for n in 0..=15 {
        for k in 0..40 {
            let x = 0.2 * k as f64;
            let (want, mag) = laguerre_direct(n, x);
            assert!((laguerre(n, x) - want).abs() <= 1e-14 * mag + 1e-15, "n = {n}, x = {x}");
        }
    }
}

#[test]
fn fock_wigner_via_recurrence_matches_polynomial() {
    for n in 0..=15 {
        let w = fock_wigner(n);
        for (q, p) in [(0.1, 0.2), (0.7, -0.4), (1.3, 0.9), (-2.0, 0.5)] {
            let r2: f64 = q * q + p * p;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let (l, mag) = laguerre_direct(n, 2.0 * r2);
            let want = sign / PI * (-r2).exp() * l;
            let tol = 1e-14 * (-r2).exp() * mag / PI + 1e-15;
            assert!((w.eval(&[q, p]) - want).abs() <= tol, "n = {n}");
        }
    }
}

#[test]
fn fock_and_cat_are_symmetric() {
    let cat = cat_wigner(&[1.3, -0.4], Parity::Odd).unwrap();
    for (q, p) in [(0.3, 0.1), (-1.2, 0.8), (2.5, -1.5)] {
        for n in [1, 4, 9] {
            let w = fock_wigner(n);
            assert!((w.eval(&[q, p]) - w.eval(&[-q, -p])).abs() < 1e-14);
        }
        assert_eq!(cat.eval(&[q, p]), cat.eval(&[-q, -p]));
    }
}

#[test]
fn fock_mixture_examples() {
    let w = fock_mixture(0.0, FockPair::ZeroOne).unwrap();
    let vac = fock_wigner(0);
    for (q, p) in [(0.0, 0.0), (0.5, 0.5), (1.5, -0.2)] {
        assert_relative_eq!(w.eval(&[q, p]), vac.eval(&[q, p]), epsilon = 1e-16);
    }
    let half = fock_mixture(0.5, FockPair::ZeroOne).unwrap();
    for i in -40..=40 {
        for j in -40..=40 {
            assert!(half.eval(&[0.1 * i as f64, 0.1 * j as f64]) >= 0.0);
        }
    }
    let w = fock_mixture(0.6, FockPair::ZeroOne).unwrap();
    assert_relative_eq!(w.eval(&[0.0, 0.0]), -1.0 / (5.0 * PI), epsilon = 1e-15);
    assert!(w.finite_negativity() && w.is_radial());
    let mix12 = fock_mixture(0.3, FockPair::OneTwo).unwrap();
    let want = 0.7 * fock_wigner(1).eval(&[0.4, 0.2]) + 0.3 * fock_wigner(2).eval(&[0.4, 0.2]);
    assert_relative_eq!(mix12.eval(&[0.4, 0.2]), want, epsilon = 1e-15);
    assert!(matches!(fock_mixture(1.2, FockPair::ZeroOne), Err(Error::ParamOutOfRange(_))));
}

#[test]
fn cat_examples() {
    let even0 = cat_wigner(&[0.0, 0.0], Parity::Even).unwrap();
    let vac = fock_wigner(0);
    for (q, p) in [(0.0, 0.0), (0.8, -0.3), (2.0, 1.0)] {
        assert_relative_eq!(even0.eval(&[q, p]), vac.eval(&[q, p]), epsilon = 1e-16);
    }
    let odd = cat_wigner(&[2.0, 0.0], Parity::Odd).unwrap();
    assert_relative_eq!(odd.eval(&[0.0, 0.0]), -1.0 / PI, epsilon = 1e-15);
    assert!(!odd.is_radial());
    assert!(matches!(cat_wigner(&[0.0, 0.0], Parity::Odd), Err(Error::ParamOutOfRange(_))));
    assert!(matches!(cat_wigner(&[1.0, 0.0, 1.0], Parity::Even), Err(Error::DimensionMismatch(_))));
}

#[test]
fn cats_are_normalized() {
    for parity in [Parity::Even, Parity::Odd] {
        for alpha in [[2.0, 0.0], [1.2, 0.5], [0.3, -0.2]] {
            let w = cat_wigner(&alpha, parity).unwrap();
            let got = integrate(&w, Transform::Identity, &cfg()).unwrap();
            assert_relative_eq!(got.value, 1.0, epsilon = 1e-8);
        }
    }
}

#[test]
fn box_state_examples() {
    let b = box_state_wigner();
    assert_relative_eq!(b.eval(&[0.0, 0.0]), 1.0 / PI, epsilon = 1e-15);
    assert_relative_eq!(b.eval(&[0.0, 1e-9]), 1.0 / PI, epsilon = 1e-12);
    assert_eq!(b.eval(&[0.6, 0.3]), 0.0);
    assert_eq!(b.eval(&[-0.51, 2.0]), 0.0);
    assert!(!b.finite_negativity());
    assert!(matches!(integrate(&b, Transform::Abs, &cfg()), Err(Error::NotIntegrable)));
    assert_relative_eq!(integrate(&b, Transform::Identity, &cfg()).unwrap().value, 1.0, epsilon = 1e-12);
}

#[test]
fn box_state_abs_integral_diverges_logarithmically() {
    let mut prev = box_state_abs_integral(4.0);
    let mut cutoff = 4.0;
    for _ in 0..5 {
        cutoff *= 2.0;
        let next = box_state_abs_integral(cutoff);
        assert!(next - prev > 0.1, "cutoff {cutoff}: {prev} -> {next}");
        prev = next;
    }
}

#[test]
fn shifted_plus_above_maximum_is_zero() {
    for w in
        [fock_wigner(3), fock_mixture(0.6, FockPair::ZeroOne).unwrap(), cat_wigner(&[1.0, 1.0], Parity::Even).unwrap()]
    {
        assert_eq!(integrate(&w, Transform::ShiftedPlus(10.0), &cfg()).unwrap().value, 0.0);
    }
}

#[test]
fn shifted_plus_on_vacuum() {
    // pi * int_0^{ln 2} (e^{-u}/pi - 1/(2 pi)) du = (1 - ln 2) / 2
    let got = integrate(&fock_wigner(0), Transform::ShiftedPlus(0.5 / PI), &cfg()).unwrap();
    assert_relative_eq!(got.value, 0.5 * (1.0 - 2f64.ln()), epsilon = 1e-12);
    assert!(matches!(integrate(&fock_wigner(0), Transform::ShiftedPlus(-0.1), &cfg()), Err(Error::DomainError(_))));
}

#[test]
fn power_transform_on_vacuum() {
    // int W_0^2 = 1 / (2 pi)
    let got = integrate(&fock_wigner(0), Transform::Power(2.0), &cfg()).unwrap();
    assert_relative_eq!(got.value, 1.0 / (2.0 * PI), epsilon = 1e-12);
}

#[test]
fn radial_path_agrees_with_grid_quadrature() {
    let c = cfg();
    let cases: Vec<(WignerEvaluable, Transform)> = vec![
        (fock_wigner(2), Transform::Identity),
        (fock_wigner(1), Transform::Abs),
        (fock_wigner(0), Transform::Power(2.0)),
        (fock_mixture(0.75, FockPair::ZeroOne).unwrap(), Transform::ShiftedPlus(0.05)),
        (fock_mixture(0.6, FockPair::ZeroOne).unwrap(), Transform::Abs),
        (fock_mixture(0.4, FockPair::OneTwo).unwrap(), Transform::Power(4.0 / 3.0)),
    ];
    for (w, tr) in cases {
        let radial = PreparedIntegrator::new(&w, &c).unwrap();
        let grid = PreparedIntegrator::grid(&w, &c).unwrap();
        assert!(radial.is_radial() && !grid.is_radial());
        let a = radial.integrate(tr).unwrap();
        let b = grid.integrate(tr).unwrap();
        let tol = 5.0 * (a.error + b.error) + 1e-12;
        assert!((a.value - b.value).abs() <= tol, "{tr:?}: {} vs {} (tol {tol})", a.value, b.value);
    }
}

#[test]
fn multimode_gaussians_are_normalized() {
    let s = rotation(3, 0, 0.4) * squeezer(3, 1, 0.3) * beam_splitter(3, 0, 2, 0.8) * squeezer(3, 2, -0.5);
    let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 1.2, 2.0, 0.5, 1.2, 2.0]));
    let cov = CovarianceMatrix::new(&s * d * s.transpose()).unwrap();
    let w = gaussian_wigner(&GaussianStateSpec::centered(cov));
    assert_eq!(w.n_modes(), 3);
    let got = integrate(&w, Transform::Identity, &cfg()).unwrap();
    assert_relative_eq!(got.value, 1.0, epsilon = 1e-8);
    // int W^2 = 1 / (4^N pi^N sqrt(det gamma))
    let det: f64 = [0.5f64, 1.2, 2.0].iter().map(|s| s * s).product();
    let want = 1.0 / (64.0 * PI.powi(3) * det.sqrt());
    let got = integrate(&w, Transform::Power(2.0), &cfg()).unwrap();
    assert_relative_eq!(got.value, want, max_relative = 1e-9);
}

#[test]
fn gaussian_mixtures() {
    let specs = vec![
        GaussianStateSpec::centered(CovarianceMatrix::thermal(1, 0.5).unwrap()),
        GaussianStateSpec::centered(CovarianceMatrix::thermal(1, 2.0).unwrap()),
    ];
    let w = gaussian_mixture(&[0.3, 0.7], &specs).unwrap();
    assert!(w.is_radial());
    assert_relative_eq!(w.eval(&[0.0, 0.0]), 0.3 / PI + 0.7 / (4.0 * PI), epsilon = 1e-15);
    assert_relative_eq!(integrate(&w, Transform::Identity, &cfg()).unwrap().value, 1.0, epsilon = 1e-8);

    let shifted = vec![
        GaussianStateSpec::new(vec![1.0, 0.0], CovarianceMatrix::vacuum(1)).unwrap(),
        GaussianStateSpec::new(vec![-2.0, 1.0], CovarianceMatrix::thermal(1, 1.5).unwrap()).unwrap(),
    ];
    let w = gaussian_mixture(&[0.5, 0.5], &shifted).unwrap();
    assert!(!w.is_radial());
    assert_relative_eq!(integrate(&w, Transform::Identity, &cfg()).unwrap().value, 1.0, epsilon = 1e-8);
    assert!(matches!(gaussian_mixture(&[0.5, 0.6], &shifted), Err(Error::ParamOutOfRange(_))));
    assert!(matches!(gaussian_mixture(&[1.0], &shifted), Err(Error::DimensionMismatch(_))));
}

#[test]
fn grid_function_interpolates_bilinearly() {
    // f(x, p) = 1 + x + 2p + x p is reproduced exactly by bilinear interpolation.
    let f = |x: f64, p: f64| 1.0 + x + 2.0 * p + x * p;
    let g = GridFunction::from_fn(-1.0, 1.0, 5, -2.0, 2.0, 9, f).unwrap();
    assert_relative_eq!(g.eval(0.5, 1.0), f(0.5, 1.0), epsilon = 1e-14);
    assert_relative_eq!(g.eval(0.3, -1.7), f(0.3, -1.7), epsilon = 1e-14);
    assert_eq!(g.eval(1.5, 0.0), 0.0);
    // trapezoid integral of a bilinear function is exact: area 8 times mean 1
    let w = grid_wigner(g, false);
    let got = integrate(&w, Transform::Identity, &cfg()).unwrap();
    assert_relative_eq!(got.value, 8.0, epsilon = 1e-12);
    assert!(GridFunction::from_fn(-1.0, 1.0, 4, -1.0, 1.0, 5, f).is_err());
}

#[test]
fn tolerance_exceeded_is_reported() {
    let mut c = cfg();
    c.tolerance = 1e-14;
    let w = cat_wigner(&[2.0, 0.0, 1.0, 0.0], Parity::Odd).unwrap();
    assert!(matches!(integrate(&w, Transform::Abs, &c), Err(Error::TolExceeded { .. })));
}

#[test]
fn cutoffs_pass_doubling_test() {
    assert!(cutoff_doubling_check(&fock_wigner(15), &cfg()).is_ok());
    let mut c = cfg();
    c.radial_cutoff = 2.0;
    assert!(matches!(cutoff_doubling_check(&fock_wigner(3), &c), Err(Error::TolExceeded { .. })));
}

#[test]
fn extrema_are_reported() {
    let w = fock_mixture(0.6, FockPair::ZeroOne).unwrap();
    let p = PreparedIntegrator::new(&w, &cfg()).unwrap();
    assert_relative_eq!(p.min(), -0.2 / PI, epsilon = 1e-12);
    // positive ring maximum at r^2 = 7/6: 1.2 e^{-7/6} / pi
    assert_relative_eq!(p.max(), 1.2 * (-7.0f64 / 6.0).exp() / PI, epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_fock_mixtures_are_normalized(ws in proptest::collection::vec(0.0f64..1.0, 1..8)) {
        let total: f64 = ws.iter().sum();
        prop_assume!(total > 1e-3);
        let weights: Vec<f64> = ws.iter().map(|w| w / total).collect();
        let w = fock_mixture_weights(&weights).unwrap();
        let got = integrate(&w, Transform::Identity, &cfg()).unwrap();
        prop_assert!((got.value - 1.0).abs() < 1e-8);
        let abs = integrate(&w, Transform::Abs, &cfg()).unwrap();
        prop_assert!(abs.value >= 1.0 - 1e-10);
    }

    #[test]
    fn random_single_mode_gaussians_are_normalized(
        sigma in 0.5f64..4.0, theta in 0.0f64..6.3, r in -1.0f64..1.0,
        q in -3.0f64..3.0, p in -3.0f64..3.0,
    ) {
        let s = rotation(1, 0, theta) * squeezer(1, 0, r);
        let cov = CovarianceMatrix::new(&s * Matrix::identity(2, 2) * sigma * s.transpose()).unwrap();
        let w = gaussian_wigner(&GaussianStateSpec::new(vec![q, p], cov).unwrap());
        let got = integrate(&w, Transform::Identity, &cfg()).unwrap();
        prop_assert!((got.value - 1.0).abs() < 1e-8);
        prop_assert!(w.eval(&[q + 0.3, p - 0.2]) > 0.0);
    }
}
