//! Invariant suites behind `trimap verify`. Each suite reports how many
//! samples it compared and how many evaluator retries it spent. Suites that
//! compare against hidden values need the secret file and are skipped
//! without it.

use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use trimap_core::curve::Point;
use trimap_core::field::Field;
use trimap_core::publisher::{hidden_map_value, hidden_value, Mode};
use trimap_core::trimap::{ell_mul, span_rank, Evaluator, Instance, PublicParams};

use crate::format;

pub const SUITES: [&str; 8] =
    ["roundtrip", "group", "pairing", "soundness", "commutation", "trilinearity", "kernel", "dlp"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The suite needs the secret file.
    Skipped,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub status: Status,
    pub samples: usize,
    pub retries: usize,
    pub detail: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        write!(f, "{:<13} {s}  samples={} retries={}", self.name, self.samples, self.retries)?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

/// Everything a suite may look at. `pub_text` is the file as read, for the
/// serialization round trip.
pub struct Subject<'a> {
    pub public: &'a PublicParams,
    pub pub_text: &'a str,
    pub instance: Option<&'a Instance>,
    pub budget: usize,
    pub seed: u64,
}

/// Parses a `--checks` list; empty or `all` selects every suite.
pub fn select(checks: Option<&str>) -> Result<Vec<&'static str>> {
    let Some(list) = checks.filter(|c| !c.is_empty() && *c != "all") else {
        return Ok(SUITES.to_vec());
    };
    list.split(',')
        .map(|c| SUITES.iter().copied().find(|s| *s == c.trim()).ok_or_else(|| anyhow!("unknown suite `{c}`")))
        .collect()
}

pub fn run(name: &'static str, s: &Subject) -> SuiteReport {
    let mut tally = Tally { samples: 0, retries: 0 };
    let outcome = match name {
        "roundtrip" => roundtrip(s, &mut tally),
        "group" => group(s, &mut tally),
        "pairing" => pairing(s, &mut tally),
        "soundness" => soundness(s, &mut tally),
        "commutation" => commutation(s, &mut tally),
        "trilinearity" => trilinearity(s, &mut tally),
        "kernel" => kernel(s, &mut tally),
        "dlp" => dlp(s, &mut tally),
        _ => Err(Outcome::Fail(format!("unknown suite `{name}`"))),
    };
    let (status, detail) = match outcome {
        Ok(()) => (Status::Pass, String::new()),
        Err(Outcome::Skip) => (Status::Skipped, "needs the secret file".into()),
        Err(Outcome::Fail(d)) => (Status::Fail, d),
    };
    SuiteReport { name, status, samples: tally.samples, retries: tally.retries, detail }
}

struct Tally {
    samples: usize,
    retries: usize,
}

enum Outcome {
    Skip,
    Fail(String),
}

impl<E: fmt::Display> From<E> for Outcome {
    fn from(e: E) -> Outcome {
        Outcome::Fail(e.to_string())
    }
}

type SuiteResult = std::result::Result<(), Outcome>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(Outcome::Fail(format!($($msg)+)));
        }
    };
}

fn secret<'a>(s: &Subject<'a>) -> std::result::Result<&'a Instance, Outcome> {
    s.instance.ok_or(Outcome::Skip)
}

fn evaluator<'a>(s: &Subject<'a>) -> Result<Evaluator<'a>> {
    Ok(Evaluator::with_budget(s.public, s.budget)?)
}

fn rng(s: &Subject, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(s.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Uniform point of `E[ell]^n` with no identity block.
pub fn torsion_vector(inst: &Instance, rng: &mut impl Rng) -> Vec<Point> {
    let (s, f) = (&inst.secret, inst.field());
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

/// Serialization is a fixed point; with the secret, lift and unblind invert each other.
fn roundtrip(s: &Subject, t: &mut Tally) -> SuiteResult {
    let again = format::public_to_string(s.public);
    check!(again == s.pub_text, "public file does not re-serialize byte-identically");
    t.samples += 1;
    let Some(inst) = s.instance else { return Ok(()) };
    let f = inst.field();
    let text = format::secret_to_string(&inst.secret, f);
    let (back, _) = format::secret_from_str(&text)?;
    check!(back == inst.secret, "secret file does not round-trip");
    let mut rng = rng(s, 1);
    for _ in 0..100 {
        let v = torsion_vector(inst, &mut rng);
        let y = inst.secret.lift_g2(&v, f)?;
        check!(inst.secret.key.is_on_w(y.coords(), f), "lift left W");
        check!(inst.secret.unblind_g2(&y, f)? == v, "unblind(lift(v)) != v");
        t.samples += 1;
    }
    Ok(())
}

/// Public group-law consistency, and agreement with the hidden law given the secret.
fn group(s: &Subject, t: &mut Tally) -> SuiteResult {
    let ev = evaluator(s)?;
    let pp = s.public;
    let (b1, b2) = (pp.beta_hat.clone(), ev.mul_g2(2, &pp.beta_hat)?);
    check!(ev.add_g2(&b1, &b2)? == ev.add_g2(&b2, &b1)?, "addition is not commutative");
    check!(ev.add_g2(&b1, &b1)? == b2, "doubling disagrees with addition");
    check!(ev.mul_g2(pp.ell, &b1)? == ev.identity_g2(), "[ell] beta-hat is not the identity");
    check!(ev.mul_g1(pp.ell, &pp.alpha_hat)? == ev.identity_g1(), "[ell] alpha-hat is not the identity");
    let b3 = ev.mul_g2(3, &b1)?;
    check!(ev.add_g2(&ev.add_g2(&b1, &b2)?, &b3)? == ev.add_g2(&b1, &ev.add_g2(&b2, &b3)?)?, "addition is not associative");
    t.samples += 5;
    if let Some(inst) = s.instance {
        let f = inst.field();
        let mut rng = rng(s, 2);
        for _ in 0..50 {
            let (x, y) = (torsion_vector(inst, &mut rng), torsion_vector(inst, &mut rng));
            let sum = ev.add_g2(&inst.secret.lift_g2(&x, f)?, &inst.secret.lift_g2(&y, f)?)?;
            check!(inst.secret.unblind_g2(&sum, f)? == add_points(inst, &x, &y), "m-hat disagrees with the hidden law");
            t.samples += 1;
        }
    }
    t.retries += ev.retries();
    Ok(())
}

/// Bilinearity over `F_ell^2` on the public generators; the secret oracle on random pairs.
fn pairing(s: &Subject, t: &mut Tally) -> SuiteResult {
    let mut ev = evaluator(s)?;
    let (pp, f) = (s.public, &s.public.field);
    let zeta = ev.pair(&pp.alpha_hat, &pp.beta_hat)?;
    check!(zeta != f.one() && f.pow(zeta, pp.ell) == f.one(), "e-hat(alpha-hat, beta-hat) is not a primitive ell-th root");
    for a in 0..pp.ell {
        let x = ev.mul_g1(a, &pp.alpha_hat)?;
        for b in 0..pp.ell {
            let y = ev.mul_g2(b, &pp.beta_hat)?;
            check!(ev.pair(&x, &y)? == f.pow(zeta, a * b), "e-hat([{a}] alpha-hat, [{b}] beta-hat) != zeta^{}", a * b);
            t.samples += 1;
        }
    }
    if let Some(inst) = s.instance {
        check!(inst.secret.zeta(f)? == zeta, "public zeta differs from the secret zeta");
        let mut rng = rng(s, 3);
        for _ in 0..20 {
            let (x, y) = (torsion_vector(inst, &mut rng), torsion_vector(inst, &mut rng));
            let got = ev.pair(&inst.secret.lift_g1(&x, f)?, &inst.secret.lift_g2(&y, f)?)?;
            check!(got == inst.secret.pair_points(&x, &y, f)?, "blinded pairing disagrees with the unblinded product");
            t.samples += 1;
        }
    }
    t.retries += ev.retries();
    Ok(())
}

/// Every published function agrees with its hidden target on sampled `W` points.
fn soundness(s: &Subject, t: &mut Tally) -> SuiteResult {
    let inst = secret(s)?;
    let (f, sec, pp) = (inst.field(), &inst.secret, s.public);
    let key = &sec.key;
    let mut rng = rng(s, 4);
    let (add, dbl) = (sec.add_blocks(f), sec.dbl_blocks(f));
    let phi: Vec<_> = (0..pp.num_gens()).map(|i| sec.phi_blocks(i, f)).collect();
    let (tangent, chord) = (sec.tangent_pieces(), sec.chord_pieces());
    let differs = |what: &str| Outcome::Fail(format!("published {what} disagrees with its hidden target"));
    for _ in 0..30 {
        let ws: Vec<Vec<_>> = (0..3).map(|_| key.sample_w(f, &mut rng).1).collect();
        let (w12, w123) = ([ws[0].clone(), ws[1].clone()].concat(), ws.concat());
        if let Ok(h) = hidden_map_value(&add, &[key, key], key, &w12, f) {
            if pp.law.add.evaluate(&w12, f).ok() != Some(h) {
                return Err(differs("addition"));
            }
            t.samples += 1;
        }
        if let Ok(h) = hidden_map_value(&dbl, &[key], key, &ws[0], f) {
            if pp.law.dbl.evaluate(&ws[0], f).ok() != Some(h) {
                return Err(differs("doubling"));
            }
            t.samples += 1;
        }
        for (i, blocks) in phi.iter().enumerate() {
            if let Ok(h) = hidden_map_value(blocks, &[key], key, &ws[0], f) {
                if pp.phi[i].evaluate(&ws[0], f).ok() != Some(h) {
                    return Err(differs(&format!("phi-hat {}", i + 1)));
                }
                t.samples += 1;
            }
        }
        if !pp.is_ddh() {
            if let Ok(h) = hidden_value(Mode::Product, &tangent, &[key, key], &w12, f) {
                if pp.lines.tangent.evaluate(&w12, f).ok() != Some(h) {
                    return Err(differs("tangent function"));
                }
                t.samples += 1;
            }
            if let Ok(h) = hidden_value(Mode::Product, &chord, &[key, key, key], &w123, f) {
                if pp.lines.chord.evaluate(&w123, f).ok() != Some(h) {
                    return Err(differs("chord function"));
                }
                t.samples += 1;
            }
        }
    }
    check!(t.samples > 0, "no comparable samples");
    // end to end through the pairing
    let mut ev = evaluator(s)?;
    check!(ev.pair(&pp.alpha_hat, &pp.beta_hat)? == sec.zeta(f)?, "e-hat(alpha-hat, beta-hat) != zeta");
    t.retries += ev.retries();
    Ok(())
}

/// `rho o phi-hat_i = M_i o rho` and `rho o m-hat = m o (rho, rho)` on torsion inputs.
fn commutation(s: &Subject, t: &mut Tally) -> SuiteResult {
    let inst = secret(s)?;
    let (f, sec) = (inst.field(), &inst.secret);
    let ev = evaluator(s)?;
    let mut rng = rng(s, 5);
    for i in 0..s.public.num_gens() {
        for _ in 0..20 {
            let v = torsion_vector(inst, &mut rng);
            let img = ev.apply_phi(i, &sec.lift_g2(&v, f)?)?;
            check!(sec.unblind_g2(&img, f)? == sec.apply_gen_points(&sec.gens[i], &v, f), "phi-hat {} does not commute", i + 1);
            t.samples += 1;
        }
    }
    for _ in 0..10 {
        let (i, j) = (rng.gen_range(0..sec.gens.len()), rng.gen_range(0..sec.gens.len()));
        // identity blocks are outside the domain of the published maps
        let v = loop {
            let v = torsion_vector(inst, &mut rng);
            if sec.apply_gen_points(&sec.gens[j], &v, f).iter().all(|p| !p.is_infinity()) {
                break v;
            }
        };
        let img = ev.apply_phi(i, &ev.apply_phi(j, &sec.lift_g2(&v, f)?)?)?;
        let m = ell_mul(sec.gens[i].matrix(), sec.gens[j].matrix(), sec.ell());
        check!(sec.unblind_g2(&img, f)? == sec.apply_matrix_points(&m, &v, f), "composition disagrees with M_i M_j");
        t.samples += 1;
    }
    t.retries += ev.retries();
    Ok(())
}

/// Exhaustive `e-hat([a] alpha-hat, f([b] beta-hat)) = zeta^{abc}` over `F_ell^3`.
fn trilinearity(s: &Subject, t: &mut Tally) -> SuiteResult {
    let inst = secret(s)?;
    let (pp, f) = (s.public, inst.field());
    let ell = pp.ell;
    let mut ev = evaluator(s)?;
    let mut rng = rng(s, 6);
    let zeta = inst.secret.zeta(f)?;
    let xs: Vec<_> = (0..ell).map(|a| ev.mul_g1(a, &pp.alpha_hat)).collect::<Result<_, _>>()?;
    let ys: Vec<_> = (0..ell).map(|b| ev.mul_g2(b, &pp.beta_hat)).collect::<Result<_, _>>()?;
    for c in 0..ell {
        let enc = inst.encode(c, &mut rng)?;
        for a in 0..ell {
            for b in 0..ell {
                let got = ev.tri_eval(&xs[a as usize], &ys[b as usize], &enc)?;
                check!(got == f.pow(zeta, a * b * c), "tri_eval({a}, {b}, encode({c})) != zeta^{}", a * b * c);
                t.samples += 1;
            }
        }
    }
    t.retries += ev.retries();
    Ok(())
}

/// Kernel samples act trivially; with the secret, `lambda(f) = 0` and the generators span.
fn kernel(s: &Subject, t: &mut Tally) -> SuiteResult {
    let pp = s.public;
    let mut ev = evaluator(s)?;
    for k in &pp.kernel {
        check!(k.is_admissible(pp.n, pp.num_gens()), "kernel sample is not admissible");
        check!(ev.eval_ncpoly(k, &pp.beta_hat)? == ev.identity_g2(), "kernel sample moves beta-hat");
        check!(ev.tri_eval(&pp.alpha_hat, &pp.beta_hat, k)? == pp.field.one(), "kernel sample pairs nontrivially");
        t.samples += 1;
    }
    if let Some(inst) = s.instance {
        for k in &pp.kernel {
            check!(inst.secret.lambda(k)?.iter().flatten().all(|&x| x == 0), "lambda(kernel sample) != 0");
        }
        let rank = span_rank(&inst.secret.gens, pp.ell);
        check!(rank == pp.n * pp.n, "span rank {rank} != n^2");
    }
    t.retries += ev.retries();
    Ok(())
}

/// Trapdoor and pairing-assisted solves recover fresh challenges.
fn dlp(s: &Subject, t: &mut Tally) -> SuiteResult {
    let inst = secret(s)?;
    let mut ev = evaluator(s)?;
    let mut rng = rng(s, 7);
    for i in 0..10 {
        let (p, a) = inst.dlp_challenge(&mut rng)?;
        check!(inst.trapdoor_solve(&p)? == a, "trapdoor solve missed the challenge");
        if i < 3 {
            check!(ev.dlp_pairing_solve(&p)? == a, "pairing-assisted solve missed the challenge");
        }
        t.samples += 1;
    }
    t.retries += ev.retries();
    Ok(())
}

/// Joins a parsed public and secret file into one instance.
pub fn join(public: PublicParams, secret: (trimap_core::trimap::SecretParams, Field)) -> Result<Instance> {
    let (secret, f) = secret;
    if f != public.field {
        bail!("the public and secret files describe different fields");
    }
    if secret.n() != public.n || secret.ell() != public.ell || secret.gens.len() != public.num_gens() {
        bail!("the public and secret files describe different instances");
    }
    Ok(Instance { public, secret })
}
