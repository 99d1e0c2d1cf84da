use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trimap_core::blinding::{rho_from, BlindingKey};
use trimap_core::field::{Fe, Field};
use trimap_core::linalg::Matrix;
use trimap_core::poly::MultiPoly;

fn setup(q: u64, d: usize, seed: u64) -> (Field, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = Field::setup(q, d, &mut rng).unwrap();
    (f, rng)
}

#[test]
fn round_trip_and_membership_n3() {
    let (f, mut rng) = setup(101, 2, 1);
    for twisted in [false, true] {
        let key = BlindingKey::keygen(3, &f, twisted, &mut rng).unwrap();
        for _ in 0..1000 {
            let (v, w) = key.sample_w(&f, &mut rng);
            assert!(key.is_on_w(&w, &f));
            assert_eq!(key.rho(&w, &f).unwrap(), v);
        }
    }
}

#[test]
fn components_are_quadratic() {
    let (f, mut rng) = setup(31, 1, 2);
    let key = BlindingKey::keygen(2, &f, false, &mut rng).unwrap();
    for i in 0..2 {
        for p in key.big_f(i) {
            assert_eq!(p.nvars(), 6);
            assert!(p.total_degree() <= 2);
        }
    }
}

#[test]
fn off_w_points_are_rejected_and_lift_is_injective() {
    let (f, mut rng) = setup(31, 1, 3);
    let key = BlindingKey::keygen(2, &f, false, &mut rng).unwrap();
    let (v, mut w) = key.sample_w(&f, &mut rng);
    let (v2, w2) = key.sample_w(&f, &mut rng);
    if v != v2 {
        assert_ne!(w, w2);
    }
    w[0] = f.add(w[0], f.one());
    // moving one coordinate leaves W unless the generator values happen to agree
    if !key.is_on_w(&w, &f) {
        assert_eq!(key.rho(&w, &f), Err(trimap_core::Error::OffVariety));
    }
    assert!(key.rho(&key.lift(&v, &f), &f).is_ok());
}

#[test]
fn d_alpha_variants_leave_rho_unchanged() {
    let (f, mut rng) = setup(30011, 1, 4);
    let key = BlindingKey::keygen(2, &f, false, &mut rng).unwrap();
    assert_eq!(key.d_alpha_variant(1, f.zero(), &f).unwrap(), key);
    let variants: Vec<BlindingKey> =
        (0..20).map(|_| key.d_alpha_variant(rng.gen_range(0..2), f.random_nonzero(&mut rng), &f).unwrap()).collect();
    for _ in 0..100 {
        let (v, w) = key.sample_w(&f, &mut rng);
        for k in &variants {
            assert!(k.is_on_w(&w, &f));
            assert_eq!(k.rho(&w, &f).unwrap(), v);
        }
    }
}

#[test]
fn ambivalent_representatives_agree_on_w() {
    let (f, mut rng) = setup(30011, 1, 5);
    let key = BlindingKey::keygen(2, &f, false, &mut rng).unwrap();
    let gens = key.ideal(&f).generators;
    let zero = vec![vec![vec![f.zero(); 2]; 3]; 2];
    let original = key.representative(&zero, &gens, &f);
    for i in 0..2 {
        assert_eq!(&original[i], key.big_f(i));
    }
    let reps = key.ambivalent_representatives(20, &f, &mut rng).unwrap();
    for a in 0..reps.len() {
        for b in a + 1..reps.len() {
            assert_ne!(reps[a], reps[b]);
        }
    }
    for _ in 0..100 {
        let (v, w) = key.sample_w(&f, &mut rng);
        for r in &reps {
            assert_eq!(rho_from(r, &w, &f), v);
        }
    }
}

#[test]
fn block_diagonal_action_preserves_semi_local_values() {
    // (g o A^{-1}) o (A o rho) = g o rho for block-diagonal A with 2 x 2 blocks
    let (f, mut rng) = setup(30011, 1, 6);
    let key = BlindingKey::keygen(2, &f, false, &mut rng).unwrap();
    let mut a = Matrix::zero(4, 4);
    for blk in 0..2 {
        let (m, _) = Matrix::random_invertible(2, &f, &mut rng);
        for i in 0..2 {
            for j in 0..2 {
                a.set(2 * blk + i, 2 * blk + j, m.get(i, j));
            }
        }
    }
    let a_inv = a.inverse(&f).unwrap();
    let g = MultiPoly::from_terms(
        4,
        [(vec![1, 1, 0, 0], f.random(&mut rng)), (vec![0, 0, 2, 0], f.random(&mut rng)), (vec![0, 0, 0, 1], f.one())],
        &f,
    );
    let g_moved = g.compose(&a_inv.linear_forms(), &f);
    for _ in 0..50 {
        let (v, _) = key.sample_w(&f, &mut rng);
        let flat: Vec<Fe> = v.iter().flat_map(|&(x, y)| [x, y]).collect();
        assert_eq!(g_moved.evaluate(&a.apply(&flat, &f), &f), g.evaluate(&flat, &f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_inverts_lift(seed in any::<u64>(), twisted in any::<bool>()) {
        let (f, mut rng) = setup(7, 2, seed);
        let key = BlindingKey::keygen(2, &f, twisted, &mut rng).unwrap();
        let (v, w) = key.sample_w(&f, &mut rng);
        prop_assert!(key.is_on_w(&w, &f));
        prop_assert_eq!(key.rho(&w, &f).unwrap(), v);
        for g in key.ideal(&f).generators {
            prop_assert!(g.evaluate(&w, &f).is_zero());
        }
    }
}
