use nalgebra::{DMatrix, DVector};
use precosym::checks::random_cosymplectic;
use precosym::{flat_map, orthogonal_complement, poisson_sharp, reeb, Subspace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_of_sharp_removes_the_reeb_component(seed in any::<u64>(), nh in 1usize..4, a in prop::collection::vec(-3.0f64..3.0, 7)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_cosymplectic(&mut rng, nh);
        let p = &t.point;
        let n = p.dim();
        let alpha = DVector::from_column_slice(&a[..n]);
        let r = reeb(p).unwrap();
        let s = poisson_sharp(p, &alpha).unwrap();
        let back = flat_map(p, &s).unwrap();
        let expect = &alpha - p.eta() * alpha.dot(&r);
        prop_assert!((back - expect).norm() <= 1e-9 * alpha.norm().max(1.0));
        prop_assert!(p.eta().dot(&s).abs() <= 1e-9 * s.norm().max(1.0));
    }

    #[test]
    fn double_complement_returns_the_subspace(seed in any::<u64>(), nh in 1usize..4, k in 0usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_cosymplectic(&mut rng, nh);
        let p = &t.point;
        let n = p.dim();
        let k = k.min(n);
        let cols: Vec<DVector<f64>> = (0..k).map(|_| precosym::checks::gaussian_vector(&mut rng, n)).collect();
        let ks = if k == 0 { Subspace::zero(n) } else { Subspace::span(n, &cols) };
        let kp = orthogonal_complement(p, &ks);
        prop_assert_eq!(kp.dim() + ks.dim(), n);
        // ♭ is invertible, so (K⊥)⊥ is K for the transpose form; compare through ♭ᵀ
        let flat = p.flat_matrix();
        let kpp = Subspace::from_matrix(&precosym::linalg::null_space(&DMatrix::from_fn(kp.dim(), n, |i, j| (flat.transpose() * kp.vectors()[i].clone())[j])));
        prop_assert!(kpp.same_as(&ks) || (ks.dim() == 0 && kpp.dim() == 0));
    }
}
