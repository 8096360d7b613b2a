use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use wave_lab_core::energy::{eta_of_t, gronwall_bound, m_norm, m_norm_difference};
use wave_lab_core::functions::{Forcing, Profile};
use wave_lab_core::galerkin::GalerkinSystem;
use wave_lab_core::singular::{loglog_fit, Mollifier, MollifierShape};
use wave_lab_core::spectral::{norm, EigenBasis, Field, GridFunction, Interval, Norm, SpectralCoeffs};

fn basis(length: f64, m: usize) -> Arc<EigenBasis> {
    Arc::new(EigenBasis::build(Interval::with_default_quadrature(length).unwrap(), m).unwrap())
}

fn coeffs(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, m)
}

/// Nonnegative potential `(c0 + c1 cos x + c2 sin 2x)^2`.
fn potential_profile(c: [f64; 3]) -> Profile {
    Profile::new(move |x: f64| (c[0] + c[1] * x.cos() + c[2] * (2.0 * x).sin()).powi(2))
}

fn system(b: &Arc<EigenBasis>, c: [f64; 3]) -> GalerkinSystem {
    let v = potential_profile(c).sample(b.interval());
    GalerkinSystem::assemble(&v, Forcing::zero(), b.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_roundtrip(d in coeffs(16), length in 0.5f64..5.0) {
        let b = basis(length, 16);
        let d = SpectralCoeffs::from_slice(&d);
        let back = b.project(&b.reconstruct(&d).unwrap()).unwrap();
        for (x, y) in back.as_slice().iter().zip(d.as_slice()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn poincare_inequality(d in coeffs(12), length in 0.5f64..5.0) {
        let b = basis(length, 12);
        let d = SpectralCoeffs::from_slice(&d);
        let l2 = norm(Norm::L2, Field::Spectral(&d), &b).unwrap();
        let h1 = norm(Norm::H10, Field::Spectral(&d), &b).unwrap();
        prop_assert!(l2 <= length / PI * h1 * (1.0 + 1e-12));
    }

    #[test]
    fn negative_and_positive_norms_are_dual(d in coeffs(12)) {
        let b = basis(PI, 12);
        let d = SpectralCoeffs::from_slice(&d);
        let hm1 = norm(Norm::HMinus1, Field::Spectral(&d), &b).unwrap();
        let h1 = norm(Norm::H10, Field::Spectral(&d), &b).unwrap();
        let l2 = norm(Norm::L2, Field::Spectral(&d), &b).unwrap();
        prop_assert!(hm1 * h1 >= l2 * l2 * (1.0 - 1e-12));
    }

    #[test]
    fn potential_matrix_is_symmetric_psd(c in prop::array::uniform3(-1.0f64..1.0), x in coeffs(10)) {
        let b = basis(PI, 10);
        let s = system(&b, c);
        let g = s.potential_matrix();
        for i in 0..10 {
            for j in 0..10 {
                prop_assert!((g[(i, j)] - g[(j, i)]).abs() <= 1e-12);
            }
        }
        let x = nalgebra::DVector::from_vec(x);
        prop_assert!(x.dot(&(g * &x)) >= -1e-10 * x.norm_squared());
    }

    /// Four modes with `V <= 9` keep `lambda_max + ||V|| <= 25`, where the
    /// flat `10 dt^2` drift allowance applies.
    #[test]
    fn energy_is_conserved_without_source(c in prop::array::uniform3(-1.0f64..1.0), d0 in coeffs(4), d1 in coeffs(4)) {
        let b = basis(PI, 4);
        let s = system(&b, c);
        let dt = 0.01;
        let traj = s
            .integrate(&SpectralCoeffs::from_slice(&d0), &SpectralCoeffs::from_slice(&d1), 2.0, dt)
            .unwrap();
        let e0 = s.energy(&traj.d()[0], &traj.dprime()[0]);
        for (d, v) in traj.d().iter().zip(traj.dprime()) {
            prop_assert!((s.energy(d, v) - e0).abs() <= 10.0 * dt * dt * (1.0 + e0));
        }
        let eta = eta_of_t(&traj, &s);
        for e in &eta {
            prop_assert!((e - eta[0]).abs() <= 10.0 * dt * dt * (1.0 + eta[0]));
        }
    }

    /// Verlet conserves `E - (dt^2/8) |(E + G) d|^2` exactly, so the plain
    /// energy wanders by at most `(w dt)^2 / 2` relative, `w^2 <= lambda_max + ||V||`.
    #[test]
    fn energy_drift_scales_with_top_frequency(c in prop::array::uniform3(-1.0f64..1.0), d0 in coeffs(12), d1 in coeffs(12)) {
        let b = basis(PI, 12);
        let s = system(&b, c);
        let dt = 0.02;
        let traj = s
            .integrate(&SpectralCoeffs::from_slice(&d0), &SpectralCoeffs::from_slice(&d1), 2.0, dt)
            .unwrap();
        let z = dt * dt * (b.lambda_max() + s.potential_sup());
        let e0 = s.energy(&traj.d()[0], &traj.dprime()[0]);
        let allowed = z / 2.0 * e0 / (1.0 - z / 4.0).powi(2) + 1e-12;
        for (d, v) in traj.d().iter().zip(traj.dprime()) {
            prop_assert!((s.energy(d, v) - e0).abs() <= allowed);
        }
    }

    #[test]
    fn solutions_superpose(c in prop::array::uniform3(-1.0f64..1.0), u in coeffs(8), v in coeffs(8), a in -2.0f64..2.0, bb in -2.0f64..2.0) {
        let b = basis(PI, 8);
        let s = system(&b, c);
        let zero = SpectralCoeffs::zeros(8);
        let (u, v) = (SpectralCoeffs::from_slice(&u), SpectralCoeffs::from_slice(&v));
        let tu = s.integrate(&u, &zero, 1.0, 0.01).unwrap();
        let tv = s.integrate(&v, &zero, 1.0, 0.01).unwrap();
        let tw = s.integrate(&u.combine(a, &v, bb), &zero, 1.0, 0.01).unwrap();
        let expected = tu.combine(a, &tv, bb).unwrap();
        for (x, y) in tw.d().iter().zip(expected.d()) {
            let scale = 1.0 + y.as_vector().norm();
            prop_assert!((x.as_vector() - y.as_vector()).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn m_norm_is_a_norm(c in prop::array::uniform3(-1.0f64..1.0), u in coeffs(6), v in coeffs(6), a in -3.0f64..3.0) {
        let b = basis(PI, 6);
        let s = system(&b, c);
        let zero = SpectralCoeffs::zeros(6);
        let (u, v) = (SpectralCoeffs::from_slice(&u), SpectralCoeffs::from_slice(&v));
        let tu = s.integrate(&u, &zero, 1.0, 0.01).unwrap();
        let tv = s.integrate(&zero, &v, 1.0, 0.01).unwrap();
        let nu = m_norm(&tu, &s);
        let scaled = tu.combine(a, &tu, 0.0).unwrap();
        prop_assert!((m_norm(&scaled, &s) - a.abs() * nu).abs() <= 1e-10 * (1.0 + nu));
        let sum = tu.combine(1.0, &tv, 1.0).unwrap();
        prop_assert!(m_norm(&sum, &s) <= nu + m_norm(&tv, &s) + 1e-10);
        let d = m_norm_difference((&tu, &s), (&tu, &s), &s).unwrap();
        prop_assert_eq!(d.total(), 0.0);
    }

    #[test]
    fn gronwall_bound_is_nondecreasing(eta0 in 0.0f64..10.0, xi in prop::collection::vec(0.0f64..5.0, 2..40)) {
        let times: Vec<f64> = (0..xi.len()).map(|i| i as f64 * 0.05).collect();
        let g = gronwall_bound(eta0, &xi, &times).unwrap();
        prop_assert!(g.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn mollifiers_are_even_and_supported(s in -1.5f64..1.5, shape in 0usize..3) {
        let shapes = [MollifierShape::StandardBump, MollifierShape::Triangle, MollifierShape::QuadraticSpline];
        let psi = Mollifier::new(shapes[shape]);
        prop_assert_eq!(psi.reference(s), psi.reference(-s));
        prop_assert!(psi.reference(s) >= 0.0);
        if s.abs() >= 1.0 {
            prop_assert_eq!(psi.reference(s), 0.0);
        }
    }

    #[test]
    fn power_laws_are_recovered(n in -3.0f64..3.0, c in 0.1f64..10.0) {
        let grid: Vec<f64> = (3..=10).map(|j| 2f64.powi(-j)).collect();
        let values: Vec<f64> = grid.iter().map(|e| c * e.powf(-n)).collect();
        let fit = loglog_fit(&grid, &values).unwrap();
        prop_assert!((fit.fitted_n - n).abs() < 1e-10);
        prop_assert!((fit.fitted_log_c - c.ln()).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-10);
    }
}

#[test]
fn zero_data_give_zero_trajectory() {
    let b = basis(PI, 8);
    let s = system(&b, [0.3, 0.5, -0.2]);
    let traj = s.integrate(&SpectralCoeffs::zeros(8), &SpectralCoeffs::zeros(8), 1.0, 0.01).unwrap();
    assert!(traj.d().iter().chain(traj.dprime()).all(|d| d.as_slice().iter().all(|&x| x == 0.0)));
}

#[test]
fn weighted_term_vanishes_without_potential() {
    let b = basis(PI, 8);
    let v = GridFunction::new(vec![0.0; b.interval().node_count()]);
    let s = GalerkinSystem::assemble(&v, Forcing::zero(), b).unwrap();
    let traj = s.integrate(&SpectralCoeffs::unit(8, 2), &SpectralCoeffs::unit(8, 3), 1.0, 0.01).unwrap();
    let parts = wave_lab_core::energy::m_norm_parts(&traj, &s);
    assert_eq!(parts.weighted_sq, 0.0);
}

#[test]
fn poincare_is_sharp_on_first_mode() {
    let b = basis(2.0, 8);
    let d = SpectralCoeffs::unit(8, 1);
    let l2 = norm(Norm::L2, Field::Spectral(&d), &b).unwrap();
    let h1 = norm(Norm::H10, Field::Spectral(&d), &b).unwrap();
    assert!((l2 - 2.0 / PI * h1).abs() < 1e-14);
}
