use kicked_duo::classical::{free_flight, step, Particle};
use kicked_duo::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(w: f64) -> ModelParams {
    ModelParams::from_com(1.0, 5.0, 1.0, 0.25, w, 32, 8, 1).unwrap()
}

fn particle(w: f64) -> impl Strategy<Value = Particle> {
    (0.0..std::f64::consts::TAU, -50.0..50.0f64, -1.0..1.0f64, -20.0..20.0f64).prop_map(
        move |(angle, momentum, x, rel_momentum)| Particle {
            angle,
            momentum,
            separation: x * w,
            rel_momentum,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(seed in any::<u64>(), w in 0.05..3.0f64) {
        let p = params(w);
        let basis = SpectralBasis::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = QuantumState::random(&p, Representation::PosPos, &mut rng);
        let mut t = s.clone();
        basis.to_mom_level(&mut t).unwrap();
        prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
        basis.to_pos_pos(&mut t).unwrap();
        prop_assert!(t.max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn transform_is_linear(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let p = params(0.5);
        let basis = SpectralBasis::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = QuantumState::random(&p, Representation::PosPos, &mut rng);
        let y = QuantumState::random(&p, Representation::PosPos, &mut rng);
        let mut z = x.clone();
        for (zi, yi) in z.coeffs.iter_mut().zip(&y.coeffs) {
            *zi = *zi * a + *yi * Complex64::new(0.0, b);
        }
        let (mut tx, mut ty) = (x, y);
        basis.to_mom_level(&mut tx).unwrap();
        basis.to_mom_level(&mut ty).unwrap();
        basis.to_mom_level(&mut z).unwrap();
        for ((zi, xi), yi) in z.coeffs.iter().zip(&tx.coeffs).zip(&ty.coeffs) {
            prop_assert!((*zi - (*xi * a + *yi * Complex64::new(0.0, b))).norm() < 1e-12);
        }
    }

    #[test]
    fn floquet_step_preserves_norm(seed in any::<u64>(), w in 0.05..3.0f64, k in 0.0..20.0f64) {
        let p = params(w).with_kick(k).unwrap();
        let prop = Propagator::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = QuantumState::random(&p, Representation::MomLevel, &mut rng);
        for _ in 0..5 {
            prop.floquet_step(&mut s).unwrap();
        }
        prop.basis().to_mom_level(&mut s).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separation_stays_in_well(w in 0.01..3.0f64, q in particle(1.0)) {
        let p = params(w);
        let q = Particle { separation: q.separation * w, ..q };
        let mut x = q;
        for _ in 0..20 {
            x = step(x, &p);
            prop_assert!(x.separation.abs() <= w);
            prop_assert!((0.0..std::f64::consts::TAU).contains(&x.angle));
        }
    }

    #[test]
    fn reflection_conserves_speed(q in particle(0.5)) {
        let p = params(0.5);
        let x = free_flight(q, &p);
        prop_assert_eq!(x.rel_momentum.abs(), q.rel_momentum.abs());
        prop_assert_eq!(x.momentum, q.momentum);
    }

    #[test]
    fn entropies_bounded(seed in any::<u64>()) {
        let p = params(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = QuantumState::random(&p, Representation::MomLevel, &mut rng);
        let g = GramMatrix::from_state(&s).unwrap();
        let lin = g.linear_entropy();
        let vn = g.von_neumann_entropy(1e-14);
        prop_assert!((0.0..=1.0 - 1.0 / 8.0 + 1e-12).contains(&lin));
        prop_assert!(vn >= lin - 1e-12);
        prop_assert!(vn <= (8f64).ln() + 1e-12);
    }
}
