use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use trimap_core::curve::Point;
use trimap_core::field::Field;
use trimap_core::publisher::{hidden_map_value, hidden_value, Mode};
use trimap_core::trimap::*;
use trimap_core::Error;

fn instance() -> &'static Instance {
    static INST: OnceLock<Instance> = OnceLock::new();
    INST.get_or_init(|| setup(&SetupParams::desk(2, 5), &mut ChaCha8Rng::seed_from_u64(2024)).unwrap())
}

fn ddh_instance() -> &'static Instance {
    static INST: OnceLock<Instance> = OnceLock::new();
    INST.get_or_init(|| {
        let p = SetupParams { ddh: true, ..SetupParams::desk(2, 5) };
        setup(&p, &mut ChaCha8Rng::seed_from_u64(77)).unwrap()
    })
}

/// Uniform point of `E[ell]^n` with no identity block.
fn torsion_vector(inst: &Instance, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let s = &inst.secret;
    let f = inst.field();
    let (p, q) = s.basis;
    (0..s.n())
        .map(|_| loop {
            let (a, b) = (rng.gen_range(0..s.ell()), rng.gen_range(0..s.ell()));
            let pt = s.curve.add(&s.curve.scalar_mul(a, &p, f), &s.curve.scalar_mul(b, &q, f), f);
            if !pt.is_infinity() {
                break pt;
            }
        })
        .collect()
}

fn add_points(inst: &Instance, x: &[Point], y: &[Point]) -> Vec<Point> {
    x.iter().zip(y).map(|(a, b)| inst.secret.curve.add(a, b, inst.field())).collect()
}

#[test]
fn generator_spanning_and_obstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g1 = gen_generators(1, 2, 5, &mut rng).unwrap();
    assert_eq!(span_rank(&g1, 5), 1);
    assert!(g1.iter().all(|g| g.rows()[0].j1 == 0 && g.rows()[0].j2 == 0));
    let g2 = gen_generators(2, 5, 5, &mut rng).unwrap();
    assert_eq!(span_rank(&g2, 5), 4);
    for g in &g2 {
        for (j, row) in g.matrix().iter().enumerate() {
            assert_eq!(row.iter().filter(|&&x| x != 0).count(), 2);
            assert!(row.contains(&1));
            assert_eq!(row[g.rows()[j].j1], 1);
        }
    }
    for n in [2, 3] {
        assert_eq!(gen_generators_with(n, 3 * n * n, 5, &[1], &mut rng), Err(Error::SpanFailure));
        let ones = gen_generators_with(n, 3 * n * n, 5, &[1, 2], &mut rng).unwrap();
        // rebuild each matrix with every companion coefficient set to 1
        let forced: Vec<GeneratorMatrix> = ones
            .iter()
            .filter_map(|g| {
                let rows = g.rows().iter().map(|r| GeneratorRow { c: 1, ..*r }).collect();
                GeneratorMatrix::new(rows, 5).ok()
            })
            .collect();
        assert!(span_rank(&forced, 5) <= n * n - n + 1);
    }
    let bad = vec![GeneratorRow { j1: 0, j2: 0, c: 1 }, GeneratorRow { j1: 1, j2: 0, c: 1 }];
    assert!(GeneratorMatrix::new(bad, 5).is_err());
}

#[test]
fn encodings_are_scalar_and_admissible() {
    let inst = instance();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ell = inst.public.ell;
    for a in 0..ell {
        let f = inst.encode(a, &mut rng).unwrap();
        assert!(f.is_admissible(2, inst.public.num_gens()));
        assert_eq!(inst.secret.lambda(&f).unwrap(), {
            let mut m = ell_identity(2);
            m.iter_mut().for_each(|r| r.iter_mut().for_each(|x| *x = *x * a % ell));
            m
        });
        assert_eq!(inst.trapdoor_solve(&f).unwrap(), a);
    }
    let mut one = NCPoly::new();
    one.add_term(Vec::new(), 1, ell);
    assert_eq!(scalar_of(&inst.secret.lambda(&one).unwrap()), Some(1));
    assert!(!one.is_admissible(2, inst.public.num_gens()));
    let mut ev = Evaluator::new(&inst.public).unwrap();
    let pp = &inst.public;
    assert!(matches!(ev.tri_eval(&pp.alpha_hat, &pp.beta_hat, &one), Err(Error::InvalidInput(_))));
}

#[test]
fn phi_hat_commutes_with_phi() {
    let inst = instance();
    let (f, s) = (inst.field(), &inst.secret);
    let ev = Evaluator::new(&inst.public).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..inst.public.num_gens() {
        for _ in 0..50 {
            let v = torsion_vector(inst, &mut rng);
            let y = s.lift_g2(&v, f).unwrap();
            let img = ev.apply_phi(i, &y).unwrap();
            assert_eq!(s.unblind_g2(&img, f).unwrap(), s.apply_gen_points(&s.gens[i], &v, f));
        }
    }
    // composition follows the matrix product
    for _ in 0..10 {
        let (i, j) = (rng.gen_range(0..5), rng.gen_range(0..5));
        // identity blocks are outside the domain of the published maps
        let v = loop {
            let v = torsion_vector(inst, &mut rng);
            if s.apply_gen_points(&s.gens[j], &v, f).iter().all(|p| !p.is_infinity()) {
                break v;
            }
        };
        let img = ev.apply_phi(i, &ev.apply_phi(j, &s.lift_g2(&v, f).unwrap()).unwrap()).unwrap();
        let m = ell_mul(s.gens[i].matrix(), s.gens[j].matrix(), s.ell());
        assert_eq!(s.unblind_g2(&img, f).unwrap(), s.apply_matrix_points(&m, &v, f));
    }
}

#[test]
fn add_hat_matches_the_hidden_group_law() {
    let inst = instance();
    let (f, s, pp) = (inst.field(), &inst.secret, &inst.public);
    let ev = Evaluator::new(pp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut done = 0;
    for _ in 0..100 {
        let (x, y) = (torsion_vector(inst, &mut rng), torsion_vector(inst, &mut rng));
        let sum = ev.add_g2(&s.lift_g2(&x, f).unwrap(), &s.lift_g2(&y, f).unwrap()).unwrap();
        assert_eq!(s.unblind_g2(&sum, f).unwrap(), add_points(inst, &x, &y));
        done += 1;
    }
    assert_eq!(done, 100);
    let x = torsion_vector(inst, &mut rng);
    let neg: Vec<Point> = x.iter().map(|p| s.curve.neg(p, f)).collect();
    let zero = ev.add_g2(&s.lift_g2(&x, f).unwrap(), &s.lift_g2(&neg, f).unwrap()).unwrap();
    assert_eq!(zero, ev.identity_g2());
    assert_eq!(zero, s.lift_g2(&[Point::Infinity, Point::Infinity], f).unwrap());
    assert_eq!(ev.mul_g1(5, &pp.alpha_hat).unwrap(), ev.identity_g1());
    assert_eq!(ev.mul_g2(5, &pp.beta_hat).unwrap(), ev.identity_g2());
    // doubling chain stays over the doubled torsion points
    let mut p = pp.beta_hat.clone();
    let mut v = s.beta.clone();
    for _ in 0..3 {
        p = ev.add_g2(&p, &p).unwrap();
        v = add_points(inst, &v, &v);
        assert_eq!(s.unblind_g2(&p, f).unwrap(), v);
    }
}

#[test]
fn published_maps_match_hidden_targets() {
    let inst = instance();
    let (f, s, pp) = (inst.field(), &inst.secret, &inst.public);
    let key = &s.key;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (add_blocks, dbl_blocks, phi_blocks) = (s.add_blocks(f), s.dbl_blocks(f), s.phi_blocks(0, f));
    let (tangent, chord) = (s.tangent_pieces(), s.chord_pieces());
    let mut compared = 0;
    for _ in 0..100 {
        let (w1, w2, w3) = (key.sample_w(f, &mut rng).1, key.sample_w(f, &mut rng).1, key.sample_w(f, &mut rng).1);
        let w12 = [w1.clone(), w2.clone()].concat();
        let w123 = [w1.clone(), w2.clone(), w3].concat();
        if let Ok(h) = hidden_map_value(&add_blocks, &[key, key], key, &w12, f) {
            assert_eq!(pp.law.add.evaluate(&w12, f).unwrap(), h);
            assert!(key.is_on_w(&h, f));
            compared += 1;
        }
        if let Ok(h) = hidden_map_value(&dbl_blocks, &[key], key, &w1, f) {
            assert_eq!(pp.law.dbl.evaluate(&w1, f).unwrap(), h);
        }
        if let Ok(h) = hidden_map_value(&phi_blocks, &[key], key, &w1, f) {
            assert_eq!(pp.phi[0].evaluate(&w1, f).unwrap(), h);
        }
        if let Ok(h) = hidden_value(Mode::Product, &tangent, &[key, key], &w12, f) {
            assert_eq!(pp.lines.tangent.evaluate(&w12, f).unwrap(), h);
        }
        if let Ok(h) = hidden_value(Mode::Product, &chord, &[key, key, key], &w123, f) {
            assert_eq!(pp.lines.chord.evaluate(&w123, f).unwrap(), h);
        }
    }
    assert!(compared >= 95);
}

#[test]
fn blinded_pairing_matches_unblinded_product() {
    let inst = instance();
    let (f, s, pp) = (inst.field(), &inst.secret, &inst.public);
    let mut ev = Evaluator::new(pp).unwrap();
    let zeta = s.zeta(f).unwrap();
    assert_ne!(zeta, f.one());
    assert_eq!(ev.pair(&pp.alpha_hat, &pp.beta_hat).unwrap(), zeta);
    assert_eq!(ev.pair(&pp.alpha_hat, &pp.g1_as_g2(&pp.alpha_hat).unwrap()).unwrap(), f.one());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let (x, y) = (torsion_vector(inst, &mut rng), torsion_vector(inst, &mut rng));
        let got = ev.pair(&s.lift_g1(&x, f).unwrap(), &s.lift_g2(&y, f).unwrap()).unwrap();
        assert_eq!(got, s.pair_points(&x, &y, f).unwrap());
    }
    for a in 0..5 {
        let x = ev.mul_g1(a, &pp.alpha_hat).unwrap();
        for b in 0..5 {
            let y = ev.mul_g2(b, &pp.beta_hat).unwrap();
            assert_eq!(ev.pair(&x, &y).unwrap(), f.pow(zeta, a * b));
        }
    }
}

#[test]
fn trilinear_evaluation_samples() {
    let inst = instance();
    let (f, pp) = (inst.field(), &inst.public);
    let mut ev = Evaluator::new(pp).unwrap();
    let zeta = inst.secret.zeta(f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let one = inst.encode(1, &mut rng).unwrap();
    assert_eq!(ev.tri_eval(&pp.alpha_hat, &pp.beta_hat, &one).unwrap(), zeta);
    for _ in 0..12 {
        let (a, b, c) = (rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
        let x = ev.mul_g1(a, &pp.alpha_hat).unwrap();
        let y = ev.mul_g2(b, &pp.beta_hat).unwrap();
        let enc = inst.encode(c, &mut rng).unwrap();
        assert_eq!(ev.tri_eval(&x, &y, &enc).unwrap(), f.pow(zeta, a * b * c));
        let again = inst.encode(c, &mut rng).unwrap();
        assert_eq!(ev.tri_eval(&x, &y, &again).unwrap(), f.pow(zeta, a * b * c));
    }
}

#[test]
fn encodings_act_through_the_matrices() {
    let inst = instance();
    let (f, s, pp) = (inst.field(), &inst.secret, &inst.public);
    let ev = Evaluator::new(pp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let c = rng.gen_range(0..5);
        let enc = inst.encode(c, &mut rng).unwrap();
        let b = rng.gen_range(1..5);
        let y = ev.mul_g2(b, &pp.beta_hat).unwrap();
        let img = ev.eval_ncpoly(&enc, &y).unwrap();
        let expect: Vec<Point> = s.beta.iter().map(|p| s.curve.scalar_mul(b * c, p, f)).collect();
        assert_eq!(s.unblind_g2(&img, f).unwrap(), expect);
    }
}

#[test]
fn kernel_samples_act_trivially() {
    let inst = instance();
    let (f, s, pp) = (inst.field(), &inst.secret, &inst.public);
    let mut ev = Evaluator::new(pp).unwrap();
    assert_eq!(pp.kernel.len(), 4);
    for (i, k) in pp.kernel.iter().enumerate() {
        assert!(s.lambda(k).unwrap().iter().all(|r| r.iter().all(|&x| x == 0)));
        assert_eq!(ev.eval_ncpoly(k, &pp.beta_hat).unwrap(), ev.identity_g2());
        assert_eq!(ev.tri_eval(&pp.alpha_hat, &pp.beta_hat, k).unwrap(), f.one());
        for other in &pp.kernel[i + 1..] {
            assert_ne!(k, other);
        }
    }
}

#[test]
fn dlp_challenges_round_trip() {
    let inst = instance();
    let pp = &inst.public;
    let mut ev = Evaluator::new(pp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in 0..20 {
        let (f, a) = inst.dlp_challenge(&mut rng).unwrap();
        assert_eq!(inst.trapdoor_solve(&f).unwrap(), a);
        if t < 5 {
            assert!(ev.dlp_check(&f, a).unwrap());
            assert!(!ev.dlp_check(&f, (a + 1) % 5).unwrap());
            assert_eq!(ev.dlp_brute_force(&f).unwrap(), Some(a));
            assert_eq!(ev.dlp_pairing_solve(&f).unwrap(), a);
        }
    }
}

#[test]
fn self_pairing_identity_without_ddh() {
    let inst = instance();
    let pp = &inst.public;
    let mut ev = Evaluator::new(pp).unwrap();
    let i = 0;
    for a in 0..5 {
        for b in 0..5 {
            let left = ev.mul_g1(a, &pp.alpha_hat).unwrap();
            let inner = pp.g1_as_g2(&ev.mul_g1(b, &pp.alpha_hat).unwrap()).unwrap();
            let lhs = ev.pair(&left, &ev.apply_phi(i, &inner).unwrap()).unwrap();
            let inner = pp.g1_as_g2(&ev.mul_g1(a * b, &pp.alpha_hat).unwrap()).unwrap();
            let rhs = ev.pair(&pp.alpha_hat, &ev.apply_phi(i, &inner).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn ddh_mode_separates_the_groups() {
    let inst = ddh_instance();
    let (f, s, pp) = (inst.field(), &inst.secret, &inst.public);
    assert!(pp.is_ddh());
    assert!(s.key1.is_some() && s.key1.as_ref() != Some(&s.key));
    assert!(pp.g1_as_g2(&pp.alpha_hat).is_err());
    let mut ev = Evaluator::new(pp).unwrap();
    let zeta = s.zeta(f).unwrap();
    assert_eq!(ev.pair(&pp.alpha_hat, &pp.beta_hat).unwrap(), zeta);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let (x, y) = (torsion_vector(inst, &mut rng), torsion_vector(inst, &mut rng));
        let got = ev.pair(&s.lift_g1(&x, f).unwrap(), &s.lift_g2(&y, f).unwrap()).unwrap();
        assert_eq!(got, s.pair_points(&x, &y, f).unwrap());
    }
    for _ in 0..4 {
        let (a, b, c) = (rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
        let x = ev.mul_g1(a, &pp.alpha_hat).unwrap();
        let y = ev.mul_g2(b, &pp.beta_hat).unwrap();
        let enc = inst.encode(c, &mut rng).unwrap();
        assert_eq!(ev.tri_eval(&x, &y, &enc).unwrap(), f.pow(zeta, a * b * c));
    }
    // alpha-hat lives on the other blinded curve
    assert!(!s.key.is_on_w(pp.alpha_hat.coords(), f));
}

#[test]
fn larger_instance_n3_ell7() {
    let p = SetupParams { kernel_samples: 1, ..SetupParams::desk(3, 7) };
    let inst = setup(&p, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    let (f, pp) = (inst.field(), &inst.public);
    assert_eq!(span_rank(&inst.secret.gens, 7), 9);
    let mut ev = Evaluator::new(pp).unwrap();
    let zeta = inst.secret.zeta(f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3 {
        let (a, b, c) = (rng.gen_range(0..7), rng.gen_range(0..7), rng.gen_range(0..7));
        let x = ev.mul_g1(a, &pp.alpha_hat).unwrap();
        let y = ev.mul_g2(b, &pp.beta_hat).unwrap();
        let enc = inst.encode(c, &mut rng).unwrap();
        assert_eq!(ev.tri_eval(&x, &y, &enc).unwrap(), f.pow(zeta, a * b * c));
    }
}

#[test]
fn discrete_log_search() {
    let f = Field::setup(11, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let z = f.from_int(3); // order 5 in F_11
    for k in 0..5 {
        assert_eq!(discrete_log(z, f.pow(z, k), 5, &f), Some(k));
    }
    assert_eq!(discrete_log(z, f.from_int(2), 5, &f), None);
}
