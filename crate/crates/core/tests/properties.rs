use proptest::prelude::*;

use phaseret::algebraic::recover;
use phaseret::bench::{run_bench, BenchConfig, Method};
use phaseret::certificates::{build_certificate, constrained_entry, nullspace_basis};
use phaseret::numerics::{dft, eig2_hermitian, eig_hermitian, gaussian_complex, project_psd};
use phaseret::sdp::{project_affine, solve_phaselift, SdpConfig};
use phaseret::{
    aligned_error, standard_frame, Complex64, ComplexVector, Ensemble, EnsembleKind, HermitianMatrix, IntensityVector,
    Rng,
};

fn hermitian(rng: &mut Rng, n: usize) -> HermitianMatrix {
    let g = gaussian_complex(rng, n * n, 1.0);
    HermitianMatrix::from_fn(n, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Equal => Complex64::new(g[r * n + c].re, 0.0),
        std::cmp::Ordering::Less => g[r * n + c],
        std::cmp::Ordering::Greater => g[c * n + r].conj(),
    })
    .unwrap()
}

fn in_set(kind: EnsembleKind, rng: &mut Rng, n: usize) -> ComplexVector {
    loop {
        let x = gaussian_complex(rng, n, 1.0);
        if phaseret::measurements::in_recoverable_set(kind, &x, 1e-3) {
            return x;
        }
    }
}

fn kinds() -> impl Strategy<Value = EnsembleKind> {
    prop_oneof![Just(EnsembleKind::Phi), Just(EnsembleKind::Psi)]
}

fn unit(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(seed: u64, n in 1usize..40) {
        let x = gaussian_complex(&mut Rng::new(seed, 0), n, 1.0);
        let lhs = dft(&x).norm_sqr();
        let rhs = n as f64 * x.norm_sqr();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn eig_reconstructs(seed: u64, n in 2usize..16) {
        let x = hermitian(&mut Rng::new(seed, 0), n);
        let e = eig_hermitian(&x).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let err = (&e.reconstruct() - &x).frobenius_norm() / x.frobenius_norm();
        prop_assert!(err <= 1e-9, "err {}", err);
    }

    #[test]
    fn eig2_matches_general_solver(seed: u64) {
        let x = hermitian(&mut Rng::new(seed, 0), 2);
        let a = eig2_hermitian(&x);
        let b = eig_hermitian(&x).unwrap();
        let scale = x.frobenius_norm().max(1e-300);
        for k in 0..2 {
            prop_assert!((a.values[k] - b.values[k]).abs() <= 1e-10 * scale);
        }
        // eigenvectors agree up to phase when the eigenvalues are separated
        if a.values[0] - a.values[1] > 1e-6 * scale {
            let ip = a.vectors[0].inner(&b.vectors[0]).unwrap().norm();
            prop_assert!((ip - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn psd_projection_is_idempotent(seed: u64, n in 2usize..10) {
        let x = hermitian(&mut Rng::new(seed, 0), n);
        let p = project_psd(&x).unwrap();
        let pp = project_psd(&p).unwrap();
        prop_assert!((&pp - &p).frobenius_norm() <= 1e-10 * x.frobenius_norm().max(1.0));
        prop_assert!(eig_hermitian(&p).unwrap().values.iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn frame_round_trip(seed: u64) {
        let f = standard_frame();
        let x = gaussian_complex(&mut Rng::new(seed, 0), 2, 1.0);
        let q = HermitianMatrix::outer(&x);
        let scale = q.frobenius_norm();
        let back = f.reconstruct_rank1(&f.measure([x[0], x[1]]));
        prop_assert!((&back - &q).frobenius_norm() <= 1e-12 * scale);
        let syn = f.synthesize(&f.dual_coefficients(&q));
        prop_assert!((&syn - &q).frobenius_norm() <= 1e-12 * scale);
    }

    #[test]
    fn dual_inner_products(m in 0usize..4, k in 0usize..4) {
        let f = standard_frame();
        let ip = f.dual(m).inner(f.dual(k)).unwrap();
        let expect = if m == k { 5.0 / 9.0 } else { -1.0 / 9.0 };
        prop_assert!((ip - expect).abs() <= 1e-12);
    }

    #[test]
    fn measurements_ignore_global_phase(seed: u64, kind in kinds(), n in 2usize..20, theta in -3.2f64..3.2) {
        let e = Ensemble::build(kind, n).unwrap();
        let x = gaussian_complex(&mut Rng::new(seed, 0), n, 1.0);
        let a = e.measure(&x).unwrap();
        let b = e.measure(&x.scale(unit(theta))).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            prop_assert!((u - v).abs() <= 1e-14 * (1.0 + u.abs()) * 10.0);
        }
    }

    #[test]
    fn lifted_measurements_agree(seed: u64, kind in kinds(), n in 2usize..12) {
        let mut rng = Rng::new(seed, 0);
        let x = gaussian_complex(&mut rng, n, 1.0);
        for e in [Ensemble::build(kind, n).unwrap(), Ensemble::random(&mut rng, n, 3 * n).unwrap()] {
            let a = e.measure(&x).unwrap();
            let b = e.measure_lifted(&HermitianMatrix::outer(&x)).unwrap();
            for (u, v) in a.values().iter().zip(b.values()) {
                prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
            }
        }
    }

    #[test]
    fn distinct_signals_give_distinct_intensities(seed: u64, kind in kinds(), n in 2usize..5) {
        let mut rng = Rng::new(seed, 0);
        let e = Ensemble::build(kind, n).unwrap();
        let x = in_set(kind, &mut rng, n);
        let y = in_set(kind, &mut rng, n);
        prop_assume!(aligned_error(&x, &y).unwrap() > 1e-6);
        let (a, b) = (e.measure(&x).unwrap(), e.measure(&y).unwrap());
        let gap = a.values().iter().zip(b.values()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        prop_assert!(gap > 1e-8);
    }

    #[test]
    fn algebraic_recovery_is_exact(seed: u64, kind in kinds(), n in 2usize..64) {
        let x = in_set(kind, &mut Rng::new(seed, 0), n);
        let e = Ensemble::build(kind, n).unwrap();
        let r = recover(kind, &e.measure(&x).unwrap(), n).unwrap();
        prop_assert_eq!(r.degenerate_count, 0);
        prop_assert!(aligned_error(&x, &r.x_hat).unwrap() <= 1e-18 * x.norm_sqr().max(1.0));
    }

    #[test]
    fn recovery_is_phase_equivariant(seed: u64, kind in kinds(), n in 2usize..32, theta in -3.2f64..3.2) {
        let x = in_set(kind, &mut Rng::new(seed, 0), n);
        let e = Ensemble::build(kind, n).unwrap();
        let a = recover(kind, &e.measure(&x).unwrap(), n).unwrap();
        let b = recover(kind, &e.measure(&x.scale(unit(theta))).unwrap(), n).unwrap();
        prop_assert!(aligned_error(&a.x_hat, &b.x_hat).unwrap() <= 1e-18 * x.norm_sqr().max(1.0));
        // bit-identical intensities give bit-identical estimates
        let again = recover(kind, &e.measure(&x).unwrap(), n).unwrap();
        prop_assert_eq!(a.x_hat, again.x_hat);
    }

    #[test]
    fn pattern_matrices_are_invisible(seed: u64, kind in kinds(), n in 2usize..10) {
        let mut rng = Rng::new(seed, 0);
        let e = Ensemble::build(kind, n).unwrap();
        let g = hermitian(&mut rng, n);
        let z = HermitianMatrix::from_fn(n, |r, c| {
            if constrained_entry(kind, r, c) { Complex64::new(0.0, 0.0) } else { g.get(r, c) }
        })
        .unwrap();
        let b = e.measure_lifted(&z).unwrap();
        prop_assert!(b.norm() <= 1e-10 * z.frobenius_norm().max(1.0));
        // a single constrained entry is visible
        let bump = HermitianMatrix::from_fn(n, |i, j| {
            if (i, j) == (0, 1) || (i, j) == (1, 0) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        })
        .unwrap();
        prop_assert!(e.measure_lifted(&bump).unwrap().norm() > 1e-3);
    }

    #[test]
    fn affine_projection_is_orthogonal(seed: u64, kind in kinds(), n in 2usize..8) {
        let mut rng = Rng::new(seed, 0);
        let e = Ensemble::build(kind, n).unwrap();
        let x = hermitian(&mut rng, n);
        let b = IntensityVector::new(e.measure(&gaussian_complex(&mut rng, n, 1.0)).unwrap().into_values());
        let p = project_affine(&e, &x, &b, 0.0).unwrap();
        let d = &x - &p;
        for z in nullspace_basis(kind, n).unwrap() {
            prop_assert!(d.inner(&z).unwrap().abs() <= 1e-9 * x.frobenius_norm().max(1.0));
        }
        let r: f64 = e.measure_lifted(&p).unwrap().values().iter().zip(b.values()).map(|(u, v)| (u - v).powi(2)).sum();
        prop_assert!(r.sqrt() <= 1e-9 * b.norm().max(1.0));
    }

    #[test]
    fn certificate_spectrum_ignores_phase(seed: u64, kind in kinds(), n in 3usize..10, theta in -3.2f64..3.2) {
        let x = in_set(kind, &mut Rng::new(seed, 0), n);
        let a = build_certificate(kind, &x).unwrap();
        let b = build_certificate(kind, &x.scale(unit(theta))).unwrap();
        for (u, v) in a.spectrum.iter().zip(&b.spectrum) {
            prop_assert!((u - v).abs() <= 1e-9 * a.spectrum[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sdp_steps_never_increase(seed: u64, kind in kinds(), n in 3usize..7) {
        let mut rng = Rng::new(seed, 0);
        let x = in_set(kind, &mut rng, n);
        let e = Ensemble::build(kind, n).unwrap();
        let r = solve_phaselift(&e, &e.measure(&x).unwrap(), &SdpConfig::default()).unwrap();
        for w in r.steps.windows(2).skip(10) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-14);
        }
        if r.converged {
            let xx = HermitianMatrix::outer(&x);
            prop_assert!((&r.x - &xx).frobenius_norm() <= 1e-5 * xx.frobenius_norm());
        }
    }

    #[test]
    fn bench_is_reproducible(seed: u64, jobs in 1usize..4) {
        let cfg = BenchConfig {
            snr_grid_db: vec![10.0, 30.0],
            trials: 20,
            seed,
            jobs,
            ..BenchConfig::new(EnsembleKind::Psi, Method::Algebraic, 8)
        };
        let reference = BenchConfig { jobs: 1, ..cfg.clone() };
        prop_assert_eq!(run_bench(&cfg).unwrap().to_csv(), run_bench(&reference).unwrap().to_csv());
    }
}
