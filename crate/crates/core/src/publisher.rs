//! Publication of hidden semi-local functions as random-looking systems of
//! rational functions on `W`.
//!
//! A sum `sum_i g_i / h_i` is published as pieces
//! `g_i/h_i + l_{i,1}/l_{i,2} - l_{i+1,1}/l_{i+1,2}` (indices mod `m`), each
//! numerator and denominator then moved by a random element of the ideal of
//! ambivalence of degree at most `deg + 2`. A product is published as
//! `(g_i l_i) / (h_i l_{i+1})` with noise of degree at most `deg + 1`. The
//! linear-form ratios telescope to zero (sum) or one (product).
//!
//! Inputs of a publication are `arity` points of `W`, concatenated; point `p`
//! uses its own blinding key, which is how the two-key variant is served.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::blinding::BlindingKey;
use crate::field::{Fe, Field};
use crate::poly::{
    descent_point, descent_reduce, AmbivalenceIdeal, CircuitBuilder, DescentPoly, MultiPoly, RationalCircuit,
    RationalFn, Wire, COSET_SPARSITY,
};
use crate::{Error, Result};

/// Coordinate plane `block` of input point `point`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub point: usize,
    pub block: usize,
}

/// Hidden piece `f o (rho_{b_1}(w_{p_1}), rho_{b_2}(w_{p_2}), ...)`; slot `s`
/// supplies the local variables `2s, 2s + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiLocal {
    pub f: RationalCircuit,
    pub slots: Vec<Slot>,
}

impl SemiLocal {
    pub fn new(f: RationalCircuit, slots: Vec<Slot>) -> Result<SemiLocal> {
        if f.nvars() != 2 * slots.len() {
            return Err(Error::InvalidInput("local arity must be two per slot".into()));
        }
        Ok(SemiLocal { f, slots })
    }

    pub fn from_rational(f: RationalFn, slots: Vec<Slot>) -> Result<SemiLocal> {
        SemiLocal::new(f.into(), slots)
    }

    /// Secret-side value: the local function at the unblinded coordinates.
    pub fn evaluate_hidden(&self, keys: &[&BlindingKey], w: &[Fe], f: &Field) -> Result<Fe> {
        let local = local_values(&self.slots, keys, w, f);
        self.f.evaluate(&local, f)
    }
}

fn local_values(slots: &[Slot], keys: &[&BlindingKey], w: &[Fe], f: &Field) -> Vec<Fe> {
    let width = 3 * keys[0].n();
    let mut out = Vec::with_capacity(2 * slots.len());
    for s in slots {
        let key = keys[s.point];
        let pt = &w[s.point * width..(s.point + 1) * width];
        let fi = key.big_f(s.block);
        let (a, b) = key.twists()[s.block];
        out.push(f.frobenius(fi[0].evaluate(pt, f), a));
        out.push(f.frobenius(fi[1].evaluate(pt, f), b));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sum,
    Product,
}

/// Public pieces `g''_i / h''_i`. With `descent = Some(d)` the pieces are
/// polynomials in the descent coordinates of the inputs, reduced mod `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublishedFunction {
    pub mode: Mode,
    pub arity: usize,
    /// Blocks per input point.
    pub n: usize,
    pub descent: Option<usize>,
    pub pieces: Vec<RationalCircuit>,
}

impl PublishedFunction {
    /// Number of `K`-valued inputs: `arity * 3n`.
    pub fn nvars(&self) -> usize {
        self.arity * 3 * self.n
    }

    pub fn piece_values(&self, w: &[Fe], f: &Field) -> Result<Vec<Fe>> {
        if w.len() != self.nvars() {
            return Err(Error::InvalidInput("published function: wrong input length".into()));
        }
        let input;
        let w = match self.descent {
            Some(_) => {
                input = descent_point(w, f);
                &input[..]
            }
            None => w,
        };
        self.pieces.iter().map(|p| p.evaluate(w, f)).collect()
    }

    pub fn evaluate(&self, w: &[Fe], f: &Field) -> Result<Fe> {
        let vals = self.piece_values(w, f)?;
        Ok(match self.mode {
            Mode::Sum => vals.into_iter().fold(f.zero(), |a, v| f.add(a, v)),
            Mode::Product => vals.into_iter().fold(f.one(), |a, v| f.mul(a, v)),
        })
    }

    /// Same function with every piece expanded into one polynomial gate each
    /// for numerator and denominator.
    pub fn expanded(&self, f: &Field) -> PublishedFunction {
        let reduce = self.descent.map(|_| f.q());
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let num = p.num_circuit().expand(f, reduce);
                let den = p.den_circuit().expand(f, reduce);
                RationalCircuit::from(RationalFn { num, den })
            })
            .collect();
        PublishedFunction { pieces, ..self.clone() }
    }

    /// Pieces of a descent publication as descent polynomials `(num, den)`.
    pub fn descent_polys(&self, f: &Field) -> Option<Vec<(DescentPoly, DescentPoly)>> {
        let d = self.descent?;
        let wrap = |poly: MultiPoly| DescentPoly { q: f.q(), d, poly };
        Some(
            self.pieces
                .iter()
                .map(|p| (wrap(p.num_circuit().expand(f, Some(f.q()))), wrap(p.den_circuit().expand(f, Some(f.q())))))
                .collect(),
        )
    }
}

/// A blinded map `W^arity -> W`: one published sum per output coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublishedMap {
    pub coords: Vec<PublishedFunction>,
}

impl PublishedMap {
    pub fn arity(&self) -> usize {
        self.coords[0].arity
    }

    pub fn evaluate(&self, w: &[Fe], f: &Field) -> Result<Vec<Fe>> {
        self.coords.iter().map(|c| c.evaluate(w, f)).collect()
    }
}

/// Secret by-products of a publication, kept for verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    /// `(l_{i,1}, l_{i,2})` for sums; `(l_i, 0)` for products.
    pub forms: Vec<(MultiPoly, MultiPoly)>,
    /// `(g'_i, h'_i)` before noise.
    pub clean: Vec<RationalCircuit>,
    /// Noise added to numerator and denominator.
    pub noise: Vec<(MultiPoly, MultiPoly)>,
}

impl Trace {
    /// Numerator of `sum_i (l_{i,1}/l_{i,2} - l_{i+1,1}/l_{i+1,2})` over `prod_i l_{i,2}`;
    /// zero as a polynomial.
    pub fn sum_telescoping_numerator(&self, f: &Field) -> MultiPoly {
        let m = self.forms.len();
        let nv = self.forms[0].0.nvars();
        let term = |i: usize| {
            let mut t = self.forms[i].0.clone();
            for (k, fk) in self.forms.iter().enumerate() {
                if k != i {
                    t = t.mul(&fk.1, f);
                }
            }
            t
        };
        let mut acc = MultiPoly::zero(nv);
        for i in 0..m {
            acc = acc.add(&term(i), f).sub(&term((i + 1) % m), f);
        }
        acc
    }

    /// `prod_i l_i - prod_i l_{i+1}`; zero as a polynomial.
    pub fn product_telescoping_difference(&self, f: &Field) -> MultiPoly {
        let m = self.forms.len();
        let nv = self.forms[0].0.nvars();
        let mut a = MultiPoly::constant(nv, f.one());
        let mut b = MultiPoly::constant(nv, f.one());
        for i in 0..m {
            a = a.mul(&self.forms[i].0, f);
            b = b.mul(&self.forms[(i + 1) % m].0, f);
        }
        a.sub(&b, f)
    }
}

/// Test points for linear-form genericity.
const FORM_TEST_POINTS: usize = 100;
/// A form is rejected when it vanishes at more than 1% of the test points
/// beyond twice the rate `1/|K|` expected of any nonconstant affine form.
fn form_max_zeros(f: &Field) -> usize {
    FORM_TEST_POINTS / 100 + (2 * FORM_TEST_POINTS as u64 / f.order()) as usize
}
const FORM_RESAMPLES: usize = 16;

struct Ctx<'a> {
    keys: &'a [&'a BlindingKey],
    n: usize,
    nvars: usize,
    sample: Vec<Vec<Fe>>,
    ideal: AmbivalenceIdeal,
}

impl<'a> Ctx<'a> {
    fn new<R: Rng + ?Sized>(keys: &'a [&'a BlindingKey], f: &Field, rng: &mut R) -> Result<Ctx<'a>> {
        let n = keys.first().ok_or(Error::InvalidInput("at least one input point".into()))?.n();
        if keys.iter().any(|k| k.n() != n) {
            return Err(Error::InvalidInput("keys disagree on n".into()));
        }
        let width = 3 * n;
        let nvars = keys.len() * width;
        let sample = (0..FORM_TEST_POINTS)
            .map(|_| keys.iter().flat_map(|k| k.sample_w(f, rng).1).collect())
            .collect();
        let mut gens = Vec::new();
        for (p, k) in keys.iter().enumerate() {
            gens.extend(k.ideal(f).generators.iter().map(|g| g.embed(p * width, nvars)));
        }
        Ok(Ctx { keys, n, nvars, sample, ideal: AmbivalenceIdeal::new(gens) })
    }

    /// Random affine form with a nonzero linear part that vanishes at no more
    /// than [`form_max_zeros`] of the `W` test points.
    fn form<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R) -> Result<MultiPoly> {
        for _ in 0..FORM_RESAMPLES {
            let coeffs: Vec<Fe> = (0..self.nvars).map(|_| f.random(rng)).collect();
            if coeffs.iter().all(|c| c.is_zero()) {
                continue;
            }
            let l = MultiPoly::linear(self.nvars, &coeffs, f.random(rng));
            let zeros = self.sample.iter().filter(|w| l.evaluate(w, f).is_zero()).count();
            if zeros <= form_max_zeros(f) {
                return Ok(l);
            } else {
                log::debug!("linear form vanishes at {zeros} test points; resampling");
            }
        }
        Err(Error::LinearFormDegenerate)
    }

    fn noise<R: Rng + ?Sized>(&self, dmax: u32, f: &Field, rng: &mut R) -> Result<MultiPoly> {
        let terms = self.ideal.sample_noise(self.nvars, dmax.max(2), COSET_SPARSITY, rng, f)?;
        Ok(self.ideal.combination(&terms, self.nvars, f))
    }

    fn check_slots(&self, hidden: &[SemiLocal]) -> Result<()> {
        let ok = hidden.iter().all(|h| h.slots.iter().all(|s| s.point < self.keys.len() && s.block < self.n));
        if hidden.is_empty() || !ok {
            return Err(Error::InvalidInput("hidden pieces: empty or slot out of range".into()));
        }
        if self.keys.iter().any(|k| k.is_twisted()) {
            return Err(Error::InvalidInput("twisted keys publish through publish_twisted".into()));
        }
        Ok(())
    }

    /// Local arguments `(F_{b,1}(w_p), F_{b,2}(w_p))` per slot as gates.
    fn local_args(&self, b: &mut CircuitBuilder, slots: &[Slot]) -> Vec<Wire> {
        let width = 3 * self.n;
        let mut args = Vec::with_capacity(2 * slots.len());
        for s in slots {
            let pt = b.inputs(s.point * width..(s.point + 1) * width);
            let fi = self.keys[s.point].big_f(s.block);
            args.push(b.poly(fi[0].clone(), &pt));
            args.push(b.poly(fi[1].clone(), &pt));
        }
        args
    }
}

fn finish_with_noise<R: Rng + ?Sized>(
    ctx: &Ctx<'_>,
    mut b: CircuitBuilder,
    num: Wire,
    den: Wire,
    f: &Field,
    rng: &mut R,
) -> Result<(RationalCircuit, RationalCircuit, (MultiPoly, MultiPoly))> {
    let clean = b.clone().finish_rational(num, den);
    let (dn, dd) = clean.degrees();
    let dmax = dn.max(dd);
    let ng = ctx.noise(dmax, f, rng)?;
    let nh = ctx.noise(dmax, f, rng)?;
    let all = b.inputs(0..ctx.nvars);
    let wg = b.poly(ng.clone(), &all);
    let wh = b.poly(nh.clone(), &all);
    let g2 = b.add(num, wg);
    let h2 = b.add(den, wh);
    Ok((b.finish_rational(g2, h2), clean, (ng, nh)))
}

/// Publishes `sum_i hidden_i`.
pub fn publish_sum<R: Rng + ?Sized>(
    hidden: &[SemiLocal],
    keys: &[&BlindingKey],
    f: &Field,
    rng: &mut R,
) -> Result<(PublishedFunction, Trace)> {
    let ctx = Ctx::new(keys, f, rng)?;
    ctx.check_slots(hidden)?;
    let m = hidden.len();
    let forms: Vec<(MultiPoly, MultiPoly)> =
        (0..m).map(|_| Ok((ctx.form(f, rng)?, ctx.form(f, rng)?))).collect::<Result<_>>()?;
    let mut trace = Trace { forms: forms.clone(), clean: Vec::new(), noise: Vec::new() };
    let mut pieces = Vec::with_capacity(m);
    for (i, h) in hidden.iter().enumerate() {
        let j = (i + 1) % m;
        let mut b = CircuitBuilder::new(ctx.nvars);
        let args = ctx.local_args(&mut b, &h.slots);
        let (g, hh) = b.inline_rational(&h.f, &args);
        let all = b.inputs(0..ctx.nvars);
        let l1i = b.poly(forms[i].0.clone(), &all);
        let l2i = b.poly(forms[i].1.clone(), &all);
        let l1j = b.poly(forms[j].0.clone(), &all);
        let l2j = b.poly(forms[j].1.clone(), &all);
        // g' = g l2i l2j + l1i h l2j - l1j h l2i,  h' = h l2i l2j
        let l2ij = b.mul(l2i, l2j);
        let t1 = b.mul(g, l2ij);
        let hl2j = b.mul(hh, l2j);
        let t2 = b.mul(l1i, hl2j);
        let hl2i = b.mul(hh, l2i);
        let t3 = b.mul(l1j, hl2i);
        let s = b.add(t1, t2);
        let gp = b.sub(s, t3);
        let hp = b.mul(hh, l2ij);
        let (piece, clean, noise) = finish_with_noise(&ctx, b, gp, hp, f, rng)?;
        pieces.push(piece);
        trace.clean.push(clean);
        trace.noise.push(noise);
    }
    Ok((PublishedFunction { mode: Mode::Sum, arity: keys.len(), n: ctx.n, descent: None, pieces }, trace))
}

/// Publishes `prod_i hidden_i`.
pub fn publish_product<R: Rng + ?Sized>(
    hidden: &[SemiLocal],
    keys: &[&BlindingKey],
    f: &Field,
    rng: &mut R,
) -> Result<(PublishedFunction, Trace)> {
    let ctx = Ctx::new(keys, f, rng)?;
    ctx.check_slots(hidden)?;
    let m = hidden.len();
    let forms: Vec<MultiPoly> = (0..m).map(|_| ctx.form(f, rng)).collect::<Result<_>>()?;
    let zero = MultiPoly::zero(ctx.nvars);
    let mut trace = Trace { forms: forms.iter().map(|l| (l.clone(), zero.clone())).collect(), clean: Vec::new(), noise: Vec::new() };
    let mut pieces = Vec::with_capacity(m);
    for (i, h) in hidden.iter().enumerate() {
        let mut b = CircuitBuilder::new(ctx.nvars);
        let args = ctx.local_args(&mut b, &h.slots);
        let (g, hh) = b.inline_rational(&h.f, &args);
        let all = b.inputs(0..ctx.nvars);
        let li = b.poly(forms[i].clone(), &all);
        let lj = b.poly(forms[(i + 1) % m].clone(), &all);
        let gp = b.mul(g, li);
        let hp = b.mul(hh, lj);
        let (piece, clean, noise) = finish_with_noise(&ctx, b, gp, hp, f, rng)?;
        pieces.push(piece);
        trace.clean.push(clean);
        trace.noise.push(noise);
    }
    Ok((PublishedFunction { mode: Mode::Product, arity: keys.len(), n: ctx.n, descent: None, pieces }, trace))
}

/// Value of the hidden sum or product, computed through `rho`.
pub fn hidden_value(mode: Mode, hidden: &[SemiLocal], keys: &[&BlindingKey], w: &[Fe], f: &Field) -> Result<Fe> {
    let mut acc = match mode {
        Mode::Sum => f.zero(),
        Mode::Product => f.one(),
    };
    for h in hidden {
        let v = h.evaluate_hidden(keys, w, f)?;
        acc = match mode {
            Mode::Sum => f.add(acc, v),
            Mode::Product => f.mul(acc, v),
        };
    }
    Ok(acc)
}

/// Gate emitter for one output block of a local map: given the local inputs
/// (two per slot), returns `(num_u, den_u)` and `(num_v, den_v)`.
pub type Emit<'a> = Box<dyn Fn(&mut CircuitBuilder, &[Wire]) -> [(Wire, Wire); 2] + 'a>;

/// Output block of a map of bounded locality.
pub struct LocalBlock<'a> {
    pub slots: Vec<Slot>,
    pub emit: Emit<'a>,
}

impl LocalBlock<'_> {
    /// The local map as two rational circuits `(u, v)`.
    pub fn circuits(&self) -> [RationalCircuit; 2] {
        let mut b = CircuitBuilder::new(2 * self.slots.len());
        let ins = b.inputs(0..2 * self.slots.len());
        let [(nu, du), (nv, dv)] = (self.emit)(&mut b, &ins);
        [b.clone().finish_rational(nu, du), b.finish_rational(nv, dv)]
    }
}

/// Fraction `p(nu/du, nv/dv)` over the common denominator `du^Du dv^Dv`.
fn compose_fraction(b: &mut CircuitBuilder, p: &MultiPoly, u: (Wire, Wire), v: (Wire, Wire), f: &Field) -> (Wire, Wire) {
    let du_max = p.degree_in(0);
    let dv_max = p.degree_in(1);
    let mut hom = MultiPoly::zero(4);
    for (m, c) in p.terms() {
        let (i, j) = (m.exps()[0], m.exps()[1]);
        hom = hom.add(&MultiPoly::from_terms(4, [(vec![i, du_max - i, j, dv_max - j], c)], f), f);
    }
    let num = b.poly(hom, &[u.0, u.1, v.0, v.1]);
    let den_poly = MultiPoly::from_terms(2, [(vec![du_max, dv_max], f.one())], f);
    let den = b.poly(den_poly, &[u.1, v.1]);
    (num, den)
}

/// Publishes the blinded map `w -> lift_out(phi(rho(w)))`: output coordinate
/// `i` is `sum_t (delta^{-1})_{i t} v_t` with `v_{3j + k} = (mu_tilde_j)_k o phi_j`,
/// a sum of `3n` semi-local functions.
pub fn publish_local_map<R: Rng + ?Sized>(
    blocks: &[LocalBlock<'_>],
    in_keys: &[&BlindingKey],
    out_key: &BlindingKey,
    f: &Field,
    rng: &mut R,
) -> Result<(PublishedMap, Vec<Trace>)> {
    let n = out_key.n();
    if blocks.len() != n {
        return Err(Error::InvalidInput("one local block per output block".into()));
    }
    // v_t as a semi-local rational function of block j's slots
    let mut v_pieces: Vec<(RationalCircuit, Vec<Slot>)> = Vec::with_capacity(3 * n);
    for (j, blk) in blocks.iter().enumerate() {
        let mu = out_key.mu_tilde(j);
        for k in 0..3 {
            let mut b = CircuitBuilder::new(2 * blk.slots.len());
            let ins = b.inputs(0..2 * blk.slots.len());
            let [u, v] = (blk.emit)(&mut b, &ins);
            let (num, den) = compose_fraction(&mut b, &mu[k], u, v, f);
            v_pieces.push((b.finish_rational(num, den), blk.slots.clone()));
        }
    }
    check_not_identically_zero(&v_pieces, in_keys, f, rng)?;
    let dinv = out_key.delta_inv();
    let mut coords = Vec::with_capacity(3 * n);
    let mut traces = Vec::with_capacity(3 * n);
    for i in 0..3 * n {
        let hidden: Vec<SemiLocal> = v_pieces
            .iter()
            .enumerate()
            .map(|(t, (rc, slots))| SemiLocal { f: scale_rational(rc, dinv.get(i, t)), slots: slots.clone() })
            .collect();
        let (pf, tr) = publish_sum(&hidden, in_keys, f, rng)?;
        coords.push(pf);
        traces.push(tr);
    }
    Ok((PublishedMap { coords }, traces))
}

/// Rejects hidden pieces whose denominator vanishes at every sampled input.
fn check_not_identically_zero<R: Rng + ?Sized>(
    pieces: &[(RationalCircuit, Vec<Slot>)],
    keys: &[&BlindingKey],
    f: &Field,
    rng: &mut R,
) -> Result<()> {
    let samples: Vec<Vec<Fe>> = (0..8).map(|_| keys.iter().flat_map(|k| k.sample_w(f, rng).1).collect()).collect();
    for (rc, slots) in pieces {
        let dead = samples.iter().all(|w| rc.evaluate_parts(&local_values(slots, keys, w, f), f).1.is_zero());
        if dead {
            return Err(Error::DenominatorZero);
        }
    }
    Ok(())
}

fn scale_rational(rc: &RationalCircuit, c: Fe) -> RationalCircuit {
    let mut b = CircuitBuilder::new(rc.nvars());
    let ins = b.inputs(0..rc.nvars());
    let (num, den) = b.inline_rational(rc, &ins);
    let k = b.constant(c);
    let num = b.mul(k, num);
    b.finish_rational(num, den)
}

/// Secret-side value of a local map at `w`: `lift_out(phi(rho(w)))`.
pub fn hidden_map_value(
    blocks: &[LocalBlock<'_>],
    in_keys: &[&BlindingKey],
    out_key: &BlindingKey,
    w: &[Fe],
    f: &Field,
) -> Result<Vec<Fe>> {
    let mut v = Vec::with_capacity(blocks.len());
    for blk in blocks {
        let local = local_values(&blk.slots, in_keys, w, f);
        let [cu, cv] = blk.circuits();
        v.push((cu.evaluate(&local, f)?, cv.evaluate(&local, f)?));
    }
    Ok(out_key.lift(&v, f))
}

/// Hidden piece for a descent publication: polynomial numerator and denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiLocalPoly {
    pub f: RationalFn,
    pub slots: Vec<Slot>,
}

impl SemiLocalPoly {
    pub fn evaluate_hidden(&self, keys: &[&BlindingKey], w: &[Fe], f: &Field) -> Result<Fe> {
        self.f.evaluate(&local_values(&self.slots, keys, w, f), f)
    }
}

/// Publishes `sum_i hidden_i` or `prod_i hidden_i` for possibly twisted keys.
/// The twist `x -> x^{q^a}` is carried by descent coordinates: `F(w)^{q^a}`
/// becomes `F^{sigma^a}` evaluated at `sum_j x_{ij} theta_j^{q^a}`, reduced by
/// `x^q = x`. Pieces are polynomials in the `arity * 3n * d` descent variables.
pub fn publish_twisted<R: Rng + ?Sized>(
    mode: Mode,
    hidden: &[SemiLocalPoly],
    keys: &[&BlindingKey],
    f: &Field,
    rng: &mut R,
) -> Result<(PublishedFunction, Trace)> {
    let n = keys.first().ok_or(Error::InvalidInput("at least one input point".into()))?.n();
    if hidden.is_empty() || keys.iter().any(|k| k.n() != n) {
        return Err(Error::InvalidInput("twisted publication: empty or mismatched keys".into()));
    }
    let (q, d) = (f.q(), f.d());
    let width = 3 * n;
    let nvars = keys.len() * width;
    let nhat = nvars * d;
    let red = Some(q);
    // twisted local inputs per (point, block)
    let mut local_cache: Vec<Vec<[MultiPoly; 2]>> = Vec::with_capacity(keys.len());
    let mut gens = Vec::new();
    for (p, k) in keys.iter().enumerate() {
        let mut per_block = Vec::with_capacity(n);
        for blk in 0..n {
            let fi = k.big_f(blk);
            let (a, b) = k.twists()[blk];
            let tw = |poly: &MultiPoly, e: usize| -> Result<MultiPoly> {
                Ok(descent_reduce(&poly.embed(p * width, nvars).frobenius_coeffs(e, f), &vec![e; nvars], f)?.poly)
            };
            per_block.push([tw(&fi[0], a)?, tw(&fi[1], b)?]);
        }
        local_cache.push(per_block);
        for g in k.ideal(f).generators {
            gens.push(descent_reduce(&g.embed(p * width, nvars), &vec![0; nvars], f)?.poly);
        }
    }
    let ideal = AmbivalenceIdeal::new(gens);
    let sample: Vec<Vec<Fe>> = (0..FORM_TEST_POINTS)
        .map(|_| descent_point(&keys.iter().flat_map(|k| k.sample_w(f, rng).1).collect::<Vec<_>>(), f))
        .collect();
    let form = |rng: &mut R| -> Result<MultiPoly> {
        for _ in 0..FORM_RESAMPLES {
            let coeffs: Vec<Fe> = (0..nhat).map(|_| f.random(rng)).collect();
            if coeffs.iter().all(|c| c.is_zero()) {
                continue;
            }
            let l = MultiPoly::linear(nhat, &coeffs, f.random(rng));
            if sample.iter().filter(|w| l.evaluate(w, f).is_zero()).count() <= form_max_zeros(f) {
                return Ok(l);
            }
        }
        Err(Error::LinearFormDegenerate)
    };
    let m = hidden.len();
    let forms: Vec<(MultiPoly, MultiPoly)> = match mode {
        Mode::Sum => (0..m).map(|_| Ok((form(rng)?, form(rng)?))).collect::<Result<_>>()?,
        Mode::Product => (0..m).map(|_| Ok((form(rng)?, MultiPoly::zero(nhat)))).collect::<Result<_>>()?,
    };
    let mut trace = Trace { forms: forms.clone(), clean: Vec::new(), noise: Vec::new() };
    let mut pieces = Vec::with_capacity(m);
    for (i, h) in hidden.iter().enumerate() {
        if h.f.num.nvars() != 2 * h.slots.len() || h.slots.iter().any(|s| s.point >= keys.len() || s.block >= n) {
            return Err(Error::InvalidInput("hidden piece: slot mismatch".into()));
        }
        let args: Vec<MultiPoly> =
            h.slots.iter().flat_map(|s| local_cache[s.point][s.block].iter().cloned()).collect();
        let g = h.f.num.compose_reduced(&args, f, red);
        let hh = h.f.den.compose_reduced(&args, f, red);
        let j = (i + 1) % m;
        let (gp, hp) = match mode {
            Mode::Sum => {
                let (l1i, l2i) = &forms[i];
                let (l1j, l2j) = &forms[j];
                let l2ij = l2i.mul_reduced(l2j, f, red);
                let gp = g
                    .mul_reduced(&l2ij, f, red)
                    .add(&l1i.mul_reduced(&hh, f, red).mul_reduced(l2j, f, red), f)
                    .sub(&l1j.mul_reduced(&hh, f, red).mul_reduced(l2i, f, red), f);
                (gp, hh.mul_reduced(&l2ij, f, red))
            }
            Mode::Product => (g.mul_reduced(&forms[i].0, f, red), hh.mul_reduced(&forms[j].0, f, red)),
        };
        let dmax = gp.total_degree().max(hp.total_degree()).max(2);
        let mut noise = || -> Result<MultiPoly> {
            let terms = ideal.sample_noise(nhat, dmax, COSET_SPARSITY, rng, f)?;
            Ok(ideal.combination(&terms, nhat, f).reduce_mod_j(q, f))
        };
        let (ng, nh) = (noise()?, noise()?);
        let num = gp.add(&ng, f);
        let den = hp.add(&nh, f);
        if den.is_zero() {
            return Err(Error::DenominatorZero);
        }
        trace.clean.push(RationalCircuit::from(RationalFn { num: gp, den: hp }));
        trace.noise.push((ng, nh));
        pieces.push(RationalCircuit::from(RationalFn { num, den }));
    }
    Ok((PublishedFunction { mode, arity: keys.len(), n, descent: Some(d), pieces }, trace))
}

/// Secret-side value of a descent publication's target.
pub fn hidden_value_poly(mode: Mode, hidden: &[SemiLocalPoly], keys: &[&BlindingKey], w: &[Fe], f: &Field) -> Result<Fe> {
    let mut acc = match mode {
        Mode::Sum => f.zero(),
        Mode::Product => f.one(),
    };
    for h in hidden {
        let v = h.evaluate_hidden(keys, w, f)?;
        acc = match mode {
            Mode::Sum => f.add(acc, v),
            Mode::Product => f.mul(acc, v),
        };
    }
    Ok(acc)
}
