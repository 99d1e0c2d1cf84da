use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trimap_core::curve::{find_desk_params, Curve, Point};
use trimap_core::field::{Fe, Field};
use trimap_core::poly::FieldArith;
use trimap_core::pairing::*;

fn desk(ell: u64, seed: u64) -> (Field, Curve, (Point, Point), ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f, e) = find_desk_params(ell, 2000, 2, 100, &mut rng).unwrap();
    let basis = e.torsion_basis(&f, &mut rng);
    (f, e, basis, rng)
}

fn proj(p: &Point, f: &Field) -> [Fe; 3] {
    let (x, y) = p.coords().unwrap();
    [x, y, f.one()]
}

#[test]
fn weil_is_bilinear_alternating_and_nondegenerate() {
    let (f, e, (p, q), _) = desk(5, 1);
    let z = weil(&e, &p, &q, &f).unwrap();
    assert_ne!(z, f.one());
    assert_eq!(f.pow(z, 5), f.one());
    assert_eq!(f.mul(z, weil(&e, &q, &p, &f).unwrap()), f.one());
    for a in 0..5 {
        let pa = e.scalar_mul(a, &p, &f);
        assert_eq!(weil(&e, &pa, &pa, &f).unwrap(), f.one());
        for b in 0..5 {
            let qb = e.scalar_mul(b, &q, &f);
            assert_eq!(weil(&e, &pa, &qb, &f).unwrap(), f.pow(z, a * b));
        }
    }
    // every nonzero combination pairs nontrivially with some basis vector
    for s in 0..5 {
        for t in 0..5 {
            let x = e.add(&e.scalar_mul(s, &p, &f), &e.scalar_mul(t, &q, &f), &f);
            let trivial = weil(&e, &x, &p, &f).unwrap() == f.one() && weil(&e, &x, &q, &f).unwrap() == f.one();
            assert_eq!(trivial, s == 0 && t == 0);
        }
    }
}

#[test]
fn squaring_trick_matches_naive_miller() {
    for (ell, seed) in [(5, 2), (7, 3)] {
        let (f, e, _, mut rng) = desk(ell, seed);
        let mut checked = 0;
        while checked < 50 {
            let p = e.torsion_point(&f, &mut rng);
            let q = e.random_point(&f, &mut rng);
            let (Ok(a), Ok(b)) = (miller_f(&e, &p, &q, &f), naive_miller(&e, &p, &q, &f)) else { continue };
            assert_eq!(a, b);
            checked += 1;
        }
    }
}

#[test]
fn chord_examples() {
    let (f, e, (p, q), mut rng) = desk(7, 4);
    // the third intersection lies on the chord (and on the vertical at P + Q)
    let third = e.neg(&e.add(&p, &q, &f), &f);
    let (num, den) = chord_fraction(&mut FieldArith(&f), proj(&p, &f), proj(&q, &f), proj(&third, &f));
    assert_eq!((num, den), (f.zero(), f.zero()));
    let (num, den) = chord_fraction(&mut FieldArith(&f), proj(&p, &f), proj(&q, &f), proj(&p, &f));
    assert!(num.is_zero() && !den.is_zero());
    for _ in 0..20 {
        let r = e.random_point(&f, &mut rng);
        if let (Ok(a), Ok(b)) = (line_g(&e, &p, &q, &r, &f), line_g(&e, &q, &p, &r, &f)) {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn tangent_examples() {
    let (f, e, (p, _), mut rng) = desk(5, 5);
    // the tangent at P meets E again at -2P
    let contact = e.neg(&e.double(&p, &f), &f);
    let (num, _) = tangent_fraction(&mut FieldArith(&f), e.a, proj(&p, &f), proj(&contact, &f));
    assert!(num.is_zero());
    assert_eq!(line_h(&e, &p, &p, &f).unwrap(), f.zero());
    let two = find_desk_params(2, 50, 1, 5, &mut rng).unwrap();
    let t = two.1.torsion_point(&two.0, &mut rng);
    assert!(line_h(&two.1, &t, &t, &two.0).is_err());
}

#[test]
fn two_torsion_uses_the_vertical() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (f, e) = find_desk_params(2, 50, 1, 5, &mut rng).unwrap();
    let p = e.torsion_point(&f, &mut rng);
    let q = e.random_point(&f, &mut rng);
    if let (Some((xp, _)), Some((xq, _))) = (p.coords(), q.coords()) {
        assert_eq!(miller_f(&e, &p, &q, &f).unwrap(), f.sub(xq, xp));
    }
}

#[test]
fn weil_survives_shifted_evaluation() {
    let (f, e, (p, q), mut rng) = desk(7, 7);
    let z = weil(&e, &p, &q, &f).unwrap();
    for _ in 0..20 {
        let (a, b) = (rng.gen_range(1..7), rng.gen_range(1..7));
        let v = weil(&e, &e.scalar_mul(a, &p, &f), &e.scalar_mul(b, &q, &f), &f).unwrap();
        assert_eq!(v, f.pow(z, a * b));
    }
}
