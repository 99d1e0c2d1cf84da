use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use trimap::format::*;
use trimap_core::field::{Fe, Field};
use trimap_core::poly::{CircuitBuilder, MultiPoly};
use trimap_core::publisher::{Mode, PublishedFunction};
use trimap_core::trimap::{setup, Instance, NCPoly, SetupParams};

fn instance() -> &'static Instance {
    static INST: OnceLock<Instance> = OnceLock::new();
    INST.get_or_init(|| {
        let p = SetupParams { ddh: true, kernel_samples: 2, ..SetupParams::desk(2, 5) };
        setup(&p, &mut ChaCha8Rng::seed_from_u64(5)).unwrap()
    })
}

#[test]
fn instance_files_round_trip() {
    let inst = instance();
    let text = public_to_string(&inst.public);
    let back = public_from_str(&text).unwrap();
    assert_eq!(back, inst.public);
    assert_eq!(public_to_string(&back), text);
    assert!(back.is_ddh() && back.lines_rev.is_some());
    let sec = secret_to_string(&inst.secret, inst.field());
    let (s, f) = secret_from_str(&sec).unwrap();
    assert_eq!(s, inst.secret);
    assert_eq!(&f, inst.field());
    assert!(public_from_str(&sec).is_err());
    assert!(secret_from_str(&text).is_err());
}

#[test]
fn truncated_files_are_errors() {
    let inst = instance();
    let text = public_to_string(&inst.public);
    let lines: Vec<&str> = text.lines().collect();
    for cut in [1, 5, lines.len() / 3, lines.len() - 1] {
        assert!(public_from_str(&lines[..cut].join("\n")).is_err());
    }
    let sec = secret_to_string(&inst.secret, inst.field());
    let lines: Vec<&str> = sec.lines().collect();
    for cut in 0..lines.len() {
        assert!(secret_from_str(&lines[..cut].join("\n")).is_err());
    }
}

#[test]
fn encoding_examples() {
    let mut p = NCPoly::new();
    p.add_term(Vec::new(), 3, 5);
    p.add_term(vec![2, 1], 4, 5);
    let text = encoding_to_string(&p, 5);
    assert_eq!(text, "trimap-encoding 1\nell 5\nencoding 2\n3 :\n4 : 2.1\n");
    assert_eq!(encoding_from_str(&text).unwrap(), (p, 5));
    assert!(encoding_from_str("trimap-encoding 1\nell 5\nencoding 1\n5 : 1\n").is_err());
    assert!(encoding_from_str("trimap-encoding 1\nell 5\nencoding 2\n1 : 1\n2 : 1\n").is_err());
}

fn word() -> impl Strategy<Value = Vec<u16>> {
    prop::collection::vec(1u16..6, 0..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encodings_round_trip(terms in prop::collection::btree_map(word(), 1u64..7, 0..8)) {
        let mut p = NCPoly::new();
        for (w, c) in terms {
            p.add_term(w, c, 7);
        }
        let text = encoding_to_string(&p, 7);
        prop_assert_eq!(encoding_from_str(&text).unwrap(), (p, 7));
    }

    #[test]
    fn functions_round_trip(seed in any::<u64>(), coeffs in prop::collection::vec(0u64..101, 1..6)) {
        let f = Field::setup(101, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let fe = |c: u64| f.from_raw(c * 97 % f.order()).unwrap();
        let terms: Vec<(Vec<u32>, Fe)> =
            coeffs.iter().enumerate().map(|(i, &c)| (vec![i as u32 % 3, (i as u32 + 1) % 2, 0], fe(c))).collect();
        let poly = MultiPoly::from_terms(3, terms, &f);
        let mut b = CircuitBuilder::new(3);
        let ins = b.inputs(0..3);
        let g = b.poly(poly, &ins);
        let k = b.constant(fe(coeffs[0] + 1));
        let prod = b.mul(g, k);
        let num = b.sub(prod, ins[0]);
        let den = b.neg(ins[1]);
        let piece = b.finish_rational(num, den);
        let pf = PublishedFunction { mode: Mode::Product, arity: 1, n: 1, descent: None, pieces: vec![piece.clone(), piece] };
        let mut w = Writer::new();
        write_function(&mut w, &pf);
        write_field(&mut w, &f);
        let text = w.finish();
        let mut r = Reader::new(&text);
        let back = read_function(&mut r, &f).unwrap();
        prop_assert_eq!(&back, &pf);
        let g2 = read_field(&mut r).unwrap();
        prop_assert_eq!(&g2, &f);
        prop_assert!(r.at_end());
    }

    #[test]
    fn mutated_secret_files_never_panic(line in 0usize..40, junk in "[a-z0-9:,. ]{0,12}") {
        let inst = instance();
        let sec = secret_to_string(&inst.secret, inst.field());
        let mut lines: Vec<String> = sec.lines().map(String::from).collect();
        let i = line % lines.len();
        lines[i] = junk;
        let _ = secret_from_str(&lines.join("\n"));
    }
}
