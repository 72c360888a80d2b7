use std::f64::consts::PI;

use fiberphase::evolution::{evolve_state, geometric_phase_between};
use fiberphase::geometry::{trajectory_from_path, FiberPath, FramePolicy};
use fiberphase::helicity::{helicity_expectation_closed, k_vector, zeta};
use fiberphase::spin_algebra::{build_rep, build_v, mat_exp, ComplexMatrix};
use fiberphase::Tolerances;
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

fn spin() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.5, 1.0, 1.5, 2.0])
}

fn anti_hermitian(j: f64, seed: Vec<f64>) -> ComplexMatrix {
    let dim = (2.0 * j) as usize + 1;
    let mut it = seed.into_iter().cycle();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        entries[r * dim + r] = Complex64::new(0.0, it.next().unwrap());
        for c in r + 1..dim {
            let z = Complex64::new(it.next().unwrap(), it.next().unwrap());
            entries[r * dim + c] = z;
            entries[c * dim + r] = -z.conj();
        }
    }
    ComplexMatrix::from_row_major(dim, &entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_of_negation_is_inverse(j in spin(), seed in prop::collection::vec(-3.0f64..3.0, 25)) {
        let m = anti_hermitian(j, seed);
        let product = &mat_exp(&m).unwrap() * &mat_exp(&m.scale_real(-1.0)).unwrap();
        prop_assert!((&product - &ComplexMatrix::identity(m.dim())).max_abs() < 1e-11);
        prop_assert!(mat_exp(&m).unwrap().unitarity_defect() < 1e-11);
    }

    #[test]
    fn v_diagonalizes_direction_operator(j in spin(), lambda in 0.0f64..PI, gamma in -PI..PI) {
        let rep = build_rep(j).unwrap();
        let v = build_v(&rep, lambda, gamma).unwrap();
        prop_assert!(v.unitarity_defect() < 1e-12);
        let n = Vector3::new(lambda.sin() * gamma.cos(), lambda.sin() * gamma.sin(), lambda.cos());
        let conj = &(&v.adjoint() * &rep.dot(&n)) * &v;
        prop_assert!((&conj - &rep.j3).max_abs() < 1e-10);
    }

    #[test]
    fn k_vector_norm_is_zeta(lambda in 0.0f64..PI, gamma in -PI..PI, log_x in -6.0f64..6.0, k in 0.1f64..1e4) {
        let gamma_dot = 10f64.powf(log_x) * k;
        let kv = k_vector(lambda, gamma, gamma_dot, k).unwrap();
        let z = zeta(lambda, gamma_dot, k).unwrap();
        prop_assert!((kv.norm() / k - z).abs() <= 1e-12 * z.max(1.0));
    }

    #[test]
    fn helicity_is_odd_in_sigma(lambda in 0.001f64..3.1, log_x in -6.0f64..6.0) {
        let x = 10f64.powf(log_x);
        let plus = helicity_expectation_closed(lambda, x, 1.0).unwrap();
        let minus = helicity_expectation_closed(lambda, x, -1.0).unwrap();
        prop_assert_eq!(plus, -minus);
        prop_assert!(plus.abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn phase_is_additive(a in 0.1f64..3.0, d in 0.1f64..5.0, split in 0.05f64..0.95) {
        let traj = trajectory_from_path(&FiberPath::helix(a, d, 1.0), 256, FramePolicy::Native).unwrap();
        let tol = Tolerances::default();
        let t = traj.duration();
        let whole = geometric_phase_between(&traj, 0.0, t, &tol).unwrap();
        let parts = geometric_phase_between(&traj, 0.0, split * t, &tol).unwrap()
            + geometric_phase_between(&traj, split * t, t, &tol).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9);
    }

    #[test]
    fn evolution_preserves_norm(j in spin(), frac in 0.0f64..1.0, phase in -PI..PI) {
        let rep = build_rep(j).unwrap();
        let traj = trajectory_from_path(&FiberPath::helix(1.0, 2.0, 1.5), 256, FramePolicy::AlignInitialTangent).unwrap();
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let initial = [(j, Complex64::new(amp, 0.0)), (-j, Complex64::from_polar(amp, phase))];
        let psi = evolve_state(&rep, &traj, &initial, frac * traj.duration()).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }
}
