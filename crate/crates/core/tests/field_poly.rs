use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trimap_core::blinding::BlindingKey;
use trimap_core::field::{Fe, Field};
use trimap_core::poly::*;
use trimap_core::Error;

fn field(q: u64, d: usize, seed: u64) -> Field {
    Field::setup(q, d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn setup_examples() {
    let f7 = field(7, 1, 1);
    assert_eq!(f7.order(), 7);
    assert_eq!(f7.theta(), &[f7.one()]);
    let f25 = field(5, 2, 2);
    // monic quadratic without a root in F_5
    let m = f25.modulus();
    assert_eq!(m.len(), 3);
    for x in 0..5u64 {
        assert_ne!((m[0] + m[1] * x + m[2] * x * x) % 5, 0);
    }
    assert_eq!(Field::setup(4, 2, &mut ChaCha8Rng::seed_from_u64(0)), Err(Error::NotPrime(4)));
}

#[test]
fn frobenius_examples() {
    let f = field(5, 2, 3);
    for x in f.elements() {
        assert_eq!(f.frobenius(x, 0), x);
        assert_eq!(f.frobenius(x, 2), x);
        let x5 = (0..4).fold(x, |acc, _| f.mul(acc, x));
        assert_eq!(f.frobenius(x, 1), x5);
    }
}

#[test]
fn descent_examples() {
    let f = field(3, 3, 4);
    assert_eq!(f.descend(f.zero()), vec![0, 0, 0]);
    assert_eq!(f.descend(f.theta()[0]), vec![1, 0, 0]);
    let all: Vec<Fe> = f.elements().collect();
    assert_eq!(all.len(), 27);
    for x in all {
        assert_eq!(f.recompose(&f.descend(x)), x);
    }
}

#[test]
fn evaluate_examples() {
    let f = field(7, 1, 5);
    let c = MultiPoly::constant(2, f.from_int(3));
    assert_eq!(c.evaluate(&[f.from_int(5), f.from_int(6)], &f), f.from_int(3));
    let p = MultiPoly::var(2, 0).mul(&MultiPoly::var(2, 1), &f).add(&MultiPoly::constant(2, f.one()), &f);
    assert_eq!(p.evaluate(&[f.from_int(2), f.from_int(3)], &f), f.zero());
}

#[test]
fn compose_examples() {
    let f = field(7, 1, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let l = MultiPoly::linear(3, &[f.from_int(1), f.from_int(4), f.from_int(2)], f.from_int(5));
    let sum = MultiPoly::var(2, 0).add(&MultiPoly::var(2, 1), &f);
    assert_eq!(sum.compose(&[l.clone(), l.clone()], &f), l.scale(f.from_int(2), &f));
    let vars: Vec<MultiPoly> = (0..2).map(|i| MultiPoly::var(2, i)).collect();
    let q = MultiPoly::from_terms(2, [(vec![2, 0], f.one()), (vec![1, 1], f.from_int(3)), (vec![0, 0], f.one())], &f);
    assert_eq!(q.compose(&vars, &f), q);
    let f1 = field(30011, 1, 7);
    let lins: Vec<MultiPoly> = (0..2)
        .map(|_| MultiPoly::linear(4, &(0..4).map(|_| f1.random(&mut rng)).collect::<Vec<_>>(), f1.random(&mut rng)))
        .collect();
    let q1 = MultiPoly::from_terms(2, [(vec![1, 1], f1.from_int(3)), (vec![0, 2], f1.from_int(7))], &f1);
    let c = q1.compose(&lins, &f1);
    assert!(c.total_degree() <= 2);
    for _ in 0..100 {
        let pt: Vec<Fe> = (0..4).map(|_| f1.random(&mut rng)).collect();
        let inner: Vec<Fe> = lins.iter().map(|l| l.evaluate(&pt, &f1)).collect();
        assert_eq!(c.evaluate(&pt, &f1), q1.evaluate(&inner, &f1));
    }
}

#[test]
fn coset_samples_agree_on_w() {
    let f = field(30011, 1, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let key = BlindingKey::keygen(2, &f, false, &mut rng).unwrap();
    let ideal = key.ideal(&f);
    let h = MultiPoly::linear(6, &(0..6).map(|_| f.random(&mut rng)).collect::<Vec<_>>(), f.one());
    assert_eq!(coset_sample(&h, &AmbivalenceIdeal::new(Vec::new()), 3, &mut rng, &f).unwrap(), h);
    let (p2, terms) = coset_sample_recorded(&h, &ideal, 2, 3, &mut rng, &f).unwrap();
    assert!(terms.iter().all(|t| t.multiplier.total_degree() == 0));
    assert_eq!(p2.sub(&h, &f), ideal.combination(&terms, 6, &f));
    let z = coset_sample(&MultiPoly::zero(6), &ideal, 4, &mut rng, &f).unwrap();
    assert!(!z.is_zero());
    for _ in 0..50 {
        let (_, w) = key.sample_w(&f, &mut rng);
        assert_eq!(p2.evaluate(&w, &f), h.evaluate(&w, &f));
        assert_eq!(z.evaluate(&w, &f), f.zero());
        for g in &ideal.generators {
            assert_eq!(g.evaluate(&w, &f), f.zero());
        }
    }
}

#[test]
fn descent_reduce_examples() {
    let f = field(3, 2, 9);
    let x1 = MultiPoly::var(2, 0);
    let d0 = descent_reduce(&x1, &[0, 0], &f).unwrap();
    assert_eq!(d0.poly, descent_linear(0, 0, 2, &f));
    let d1 = descent_reduce(&x1, &[1, 0], &f).unwrap();
    for x in f.elements() {
        let pt = [x, f.zero()];
        assert_eq!(d1.evaluate(&descent_point(&pt, &f), &f), f.frobenius(x, 1));
    }
    let f2 = field(5, 2, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let prod = MultiPoly::var(2, 0).mul(&MultiPoly::var(2, 1), &f2);
    let dp = descent_reduce(&prod, &[0, 0], &f2).unwrap();
    assert!(dp.max_var_degree() < 5);
    for _ in 0..100 {
        let pt = [f2.random(&mut rng), f2.random(&mut rng)];
        assert_eq!(dp.evaluate(&descent_point(&pt, &f2), &f2), f2.mul(pt[0], pt[1]));
    }
}

fn f_big() -> Field {
    field(30011, 1, 11)
}

fn f_ext() -> Field {
    field(7, 3, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms(a in 0u64..343, b in 0u64..343, c in 0u64..343) {
        let f = f_ext();
        let (a, b, c) = (f.from_raw(a).unwrap(), f.from_raw(b).unwrap(), f.from_raw(c).unwrap());
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        if !a.is_zero() {
            prop_assert_eq!(f.mul(f.inv(a).unwrap(), a), f.one());
        }
        prop_assert_eq!(f.mul(a, b), f.mul_slow(a, b));
    }

    #[test]
    fn frobenius_is_a_field_automorphism(a in 0u64..343, b in 0u64..343, k in 0usize..3) {
        let f = f_ext();
        let (a, b) = (f.from_raw(a).unwrap(), f.from_raw(b).unwrap());
        prop_assert_eq!(f.frobenius(f.mul(a, b), k), f.mul(f.frobenius(a, k), f.frobenius(b, k)));
        prop_assert_eq!(f.frobenius(f.add(a, b), k), f.add(f.frobenius(a, k), f.frobenius(b, k)));
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(seed in any::<u64>()) {
        let f = f_big();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mk = |rng: &mut ChaCha8Rng| {
            MultiPoly::from_terms(3, (0..4).map(|i| (vec![i % 2, i / 2, 1], f.random(rng))), &f)
        };
        let (p, r) = (mk(&mut rng), mk(&mut rng));
        let v: Vec<Fe> = (0..3).map(|_| f.random(&mut rng)).collect();
        prop_assert_eq!(p.add(&r, &f).evaluate(&v, &f), f.add(p.evaluate(&v, &f), r.evaluate(&v, &f)));
        prop_assert_eq!(p.mul(&r, &f).evaluate(&v, &f), f.mul(p.evaluate(&v, &f), r.evaluate(&v, &f)));
    }

    #[test]
    fn descent_reduction_commutes_with_ring_operations(seed in any::<u64>()) {
        let f = field(3, 2, 13);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mk = |rng: &mut ChaCha8Rng| MultiPoly::linear(2, &[f.random(rng), f.random(rng)], f.random(rng));
        let (p, r) = (mk(&mut rng), mk(&mut rng));
        let tw = [1, 0];
        let (dp, dr) = (descent_reduce(&p, &tw, &f).unwrap(), descent_reduce(&r, &tw, &f).unwrap());
        let dprod = descent_reduce(&p.mul(&r, &f), &tw, &f).unwrap();
        let dsum = descent_reduce(&p.add(&r, &f), &tw, &f).unwrap();
        for x in f.elements() {
            for y in f.elements() {
                let c = descent_point(&[x, y], &f);
                let (a, b) = (dp.evaluate(&c, &f), dr.evaluate(&c, &f));
                prop_assert_eq!(dprod.evaluate(&c, &f), f.mul(a, b));
                prop_assert_eq!(dsum.evaluate(&c, &f), f.add(a, b));
            }
        }
    }
}
