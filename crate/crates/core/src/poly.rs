//! Sparse multivariate polynomials over `K`, straight-line circuits, the ideal
//! of ambivalence and descent reduction modulo `J = (x_ij^q - x_ij)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::field::{Fe, Field};
use crate::{Error, Result};

/// Exponent vector with cached total degree. The derived order compares total
/// degree first, then exponents lexicographically (graded-lex).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    deg: u32,
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Monomial {
        Monomial { deg: exps.iter().sum(), exps }
    }

    pub fn one(nvars: usize) -> Monomial {
        Monomial { deg: 0, exps: vec![0; nvars] }
    }

    pub fn var(nvars: usize, i: usize) -> Monomial {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { deg: 1, exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let exps = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        Monomial { deg: self.deg + other.deg, exps }
    }

    /// Exponents reduced by `x^q = x`.
    fn reduce(self, q: u64) -> Monomial {
        let r = |e: u32| if e == 0 { 0 } else { ((e as u64 - 1) % (q - 1)) as u32 + 1 };
        Monomial::new(self.exps.into_iter().map(r).collect())
    }
}

/// Sparse polynomial; no zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Fe>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> MultiPoly {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Fe) -> MultiPoly {
        let mut p = MultiPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> MultiPoly {
        let mut p = MultiPoly::zero(nvars);
        p.terms.insert(Monomial::var(nvars, i), Fe::ONE);
        p
    }

    /// `sum_i coeffs[i] x_i + constant`.
    pub fn linear(nvars: usize, coeffs: &[Fe], constant: Fe) -> MultiPoly {
        let mut p = MultiPoly::constant(nvars, constant);
        for (i, &c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                p.terms.insert(Monomial::var(nvars, i), c);
            }
        }
        p
    }

    /// Sums duplicate exponent vectors and drops zeros.
    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, Fe)>>(nvars: usize, terms: I, f: &Field) -> MultiPoly {
        let mut p = MultiPoly::zero(nvars);
        for (e, c) in terms {
            debug_assert_eq!(e.len(), nvars);
            p.add_term(Monomial::new(e), c, f);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Fe, f: &Field) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = f.add(*v, c);
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Fe)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, exps: &[u32]) -> Fe {
        self.terms.get(&Monomial::new(exps.to_vec())).copied().unwrap_or(Fe::ZERO)
    }

    /// Total degree; zero for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, |m| m.deg)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exps[var]).max().unwrap_or(0)
    }

    pub fn add(&self, other: &MultiPoly, f: &Field) -> MultiPoly {
        let mut r = self.clone();
        r.add_assign(other, f);
        r
    }

    pub fn add_assign(&mut self, other: &MultiPoly, f: &Field) {
        debug_assert_eq!(self.nvars, other.nvars);
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), c, f);
        }
    }

    pub fn sub(&self, other: &MultiPoly, f: &Field) -> MultiPoly {
        self.add(&other.neg(f), f)
    }

    pub fn neg(&self, f: &Field) -> MultiPoly {
        self.map_coeffs(|c| f.neg(c))
    }

    pub fn scale(&self, s: Fe, f: &Field) -> MultiPoly {
        self.map_coeffs(|c| f.mul(c, s))
    }

    /// Applies `g` to every coefficient, dropping results that become zero.
    pub fn map_coeffs<G: Fn(Fe) -> Fe>(&self, g: G) -> MultiPoly {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, &c)| {
                let v = g(c);
                (!v.is_zero()).then(|| (m.clone(), v))
            })
            .collect();
        MultiPoly { nvars: self.nvars, terms }
    }

    pub fn mul(&self, other: &MultiPoly, f: &Field) -> MultiPoly {
        self.mul_reduced(other, f, None)
    }

    /// Product, with exponents reduced by `x^q = x` when `reduce = Some(q)`.
    pub fn mul_reduced(&self, other: &MultiPoly, f: &Field, reduce: Option<u64>) -> MultiPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut r = MultiPoly::zero(self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let mut m = ma.mul(mb);
                if let Some(q) = reduce {
                    m = m.reduce(q);
                }
                r.add_term(m, f.mul(ca, cb), f);
            }
        }
        r
    }

    pub fn pow(&self, e: u32, f: &Field) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.nvars, f.one());
        for _ in 0..e {
            acc = acc.mul(self, f);
        }
        acc
    }

    pub fn evaluate(&self, point: &[Fe], f: &Field) -> Fe {
        debug_assert_eq!(point.len(), self.nvars);
        // powers[i][k] = point[i]^k, built up to the largest exponent in use
        let mut maxe = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (i, &e) in m.exps.iter().enumerate() {
                maxe[i] = maxe[i].max(e);
            }
        }
        let powers: Vec<Vec<Fe>> = (0..self.nvars)
            .map(|i| {
                let mut v = Vec::with_capacity(maxe[i] as usize + 1);
                v.push(f.one());
                for k in 0..maxe[i] as usize {
                    v.push(f.mul(v[k], point[i]));
                }
                v
            })
            .collect();
        let mut acc = Fe::ZERO;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    t = f.mul(t, powers[i][e as usize]);
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// `self(inner_1, ..., inner_m)`.
    pub fn compose(&self, inner: &[MultiPoly], f: &Field) -> MultiPoly {
        self.compose_reduced(inner, f, None)
    }

    pub fn compose_reduced(&self, inner: &[MultiPoly], f: &Field, reduce: Option<u64>) -> MultiPoly {
        assert_eq!(inner.len(), self.nvars, "compose: arity mismatch");
        let n = inner.first().map_or(0, |p| p.nvars);
        let mut cache: Vec<Vec<MultiPoly>> = inner.iter().map(|p| vec![MultiPoly::constant(n, f.one()), p.clone()]).collect();
        let mut acc = MultiPoly::zero(n);
        for (m, &c) in &self.terms {
            let mut t = MultiPoly::constant(n, c);
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap().mul_reduced(&inner[i], f, reduce);
                    cache[i].push(next);
                }
                t = t.mul_reduced(&cache[i][e as usize], f, reduce);
            }
            acc.add_assign(&t, f);
        }
        acc
    }

    /// Same polynomial in `new_nvars` variables, variable `i` renamed to `i + offset`.
    pub fn embed(&self, offset: usize, new_nvars: usize) -> MultiPoly {
        assert!(offset + self.nvars <= new_nvars);
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| {
                let mut e = vec![0; new_nvars];
                e[offset..offset + self.nvars].copy_from_slice(&m.exps);
                (Monomial { deg: m.deg, exps: e }, c)
            })
            .collect();
        MultiPoly { nvars: new_nvars, terms }
    }

    /// Applies `tau^a` to every coefficient.
    pub fn frobenius_coeffs(&self, a: usize, f: &Field) -> MultiPoly {
        self.map_coeffs(|c| f.frobenius(c, a))
    }

    /// Reduction modulo `J = (x_i^q - x_i)`.
    pub fn reduce_mod_j(&self, q: u64, f: &Field) -> MultiPoly {
        let mut r = MultiPoly::zero(self.nvars);
        for (m, &c) in &self.terms {
            r.add_term(m.clone().reduce(q), c, f);
        }
        r
    }
}

/// Quotient of two polynomials, never reduced to lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFn {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RationalFn {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<RationalFn> {
        if den.is_zero() {
            return Err(Error::InvalidInput("denominator is the zero polynomial".into()));
        }
        Ok(RationalFn { num, den })
    }

    pub fn from_poly(num: MultiPoly, f: &Field) -> RationalFn {
        let den = MultiPoly::constant(num.nvars(), f.one());
        RationalFn { num, den }
    }

    pub fn evaluate(&self, point: &[Fe], f: &Field) -> Result<Fe> {
        let d = self.den.evaluate(point, f);
        let n = self.num.evaluate(point, f);
        f.div(n, d).ok_or(Error::DenominatorZero)
    }
}

/// Generators `F_{i2} - F_{i3}` of the ideal of polynomials vanishing on `W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbivalenceIdeal {
    pub generators: Vec<MultiPoly>,
}

/// One recorded summand `multiplier * generators[generator]` of a coset sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetTerm {
    pub generator: usize,
    pub multiplier: MultiPoly,
}

/// Number of random monomials per generator in [`coset_sample`].
pub const COSET_SPARSITY: usize = 3;

impl AmbivalenceIdeal {
    pub fn new(generators: Vec<MultiPoly>) -> AmbivalenceIdeal {
        AmbivalenceIdeal { generators }
    }

    /// `sum_s multiplier_s * generator_s`.
    pub fn combination(&self, terms: &[CosetTerm], nvars: usize, f: &Field) -> MultiPoly {
        let mut acc = MultiPoly::zero(nvars);
        for t in terms {
            acc.add_assign(&t.multiplier.mul(&self.generators[t.generator], f), f);
        }
        acc
    }

    /// Random element of `I_dmax`: per generator, `sparsity` random monomials
    /// of degree at most `dmax - 2` with random nonzero coefficients.
    pub fn sample_noise<R: Rng + ?Sized>(
        &self,
        nvars: usize,
        dmax: u32,
        sparsity: usize,
        rng: &mut R,
        f: &Field,
    ) -> Result<Vec<CosetTerm>> {
        if dmax < 2 {
            return Err(Error::InvalidInput("coset degree bound must be at least 2".into()));
        }
        let mut out = Vec::with_capacity(self.generators.len());
        for (s, g) in self.generators.iter().enumerate() {
            assert_eq!(g.nvars(), nvars, "generator lives in a different ring");
            let mut t = MultiPoly::zero(nvars);
            for _ in 0..sparsity {
                let e = random_monomial(nvars, dmax - 2, rng);
                t.add_term(e, f.random_nonzero(rng), f);
            }
            out.push(CosetTerm { generator: s, multiplier: t });
        }
        Ok(out)
    }
}

fn random_monomial<R: Rng + ?Sized>(nvars: usize, max_deg: u32, rng: &mut R) -> Monomial {
    let deg = rng.gen_range(0..=max_deg);
    let mut exps = vec![0u32; nvars];
    for _ in 0..deg {
        exps[rng.gen_range(0..nvars)] += 1;
    }
    Monomial::new(exps)
}

/// `h + sum_s t_s (F_{s2} - F_{s3})` together with the recorded multipliers.
pub fn coset_sample_recorded<R: Rng + ?Sized>(
    h: &MultiPoly,
    ideal: &AmbivalenceIdeal,
    dmax: u32,
    sparsity: usize,
    rng: &mut R,
    f: &Field,
) -> Result<(MultiPoly, Vec<CosetTerm>)> {
    let terms = ideal.sample_noise(h.nvars(), dmax, sparsity, rng, f)?;
    let noise = ideal.combination(&terms, h.nvars(), f);
    Ok((h.add(&noise, f), terms))
}

/// Random element of `h + I_dmax` with the default sparsity.
pub fn coset_sample<R: Rng + ?Sized>(
    h: &MultiPoly,
    ideal: &AmbivalenceIdeal,
    dmax: u32,
    rng: &mut R,
    f: &Field,
) -> Result<MultiPoly> {
    coset_sample_recorded(h, ideal, dmax, COSET_SPARSITY, rng, f).map(|(p, _)| p)
}

/// Polynomial in the `nvars * d` descent variables `x_ij` (index `i * d + j`),
/// reduced modulo `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentPoly {
    pub q: u64,
    pub d: usize,
    pub poly: MultiPoly,
}

impl DescentPoly {
    pub fn nvars_hat(&self) -> usize {
        self.poly.nvars()
    }

    /// Largest exponent of any single descent variable.
    pub fn max_var_degree(&self) -> u32 {
        (0..self.poly.nvars()).map(|v| self.poly.degree_in(v)).max().unwrap_or(0)
    }

    /// Evaluates at descent coordinates (base-field values embedded in `K`).
    pub fn evaluate(&self, coords: &[Fe], f: &Field) -> Fe {
        self.poly.evaluate(coords, f)
    }
}

/// Descent coordinates of a `K`-point, as base-field elements embedded in `K`.
pub fn descent_point(point: &[Fe], f: &Field) -> Vec<Fe> {
    point.iter().flat_map(|&x| f.descend(x).into_iter().map(|c| f.from_int(c as i64))).collect()
}

/// The linear form `sum_j theta_j^{tau^a} x_{ij}` in `nvars * d` variables.
pub fn descent_linear(i: usize, a: usize, nvars: usize, f: &Field) -> MultiPoly {
    let d = f.d();
    let mut coeffs = vec![Fe::ZERO; nvars * d];
    for (j, &t) in f.theta().iter().enumerate() {
        coeffs[i * d + j] = f.frobenius(t, a);
    }
    MultiPoly::linear(nvars * d, &coeffs, Fe::ZERO)
}

/// Substitutes `x_i -> sum_j x_ij theta_j^{tau^{a_i}}` and reduces mod `J`.
/// For a `K`-point `alpha`, the result at `descent_point(alpha)` equals
/// `F(alpha_i^{q^{a_i}})`.
pub fn descent_reduce(poly: &MultiPoly, twists: &[usize], f: &Field) -> Result<DescentPoly> {
    let n = poly.nvars();
    if twists.len() != n || twists.iter().any(|&a| a >= f.d()) {
        return Err(Error::InvalidInput("one twist exponent in [0, d) per variable".into()));
    }
    let inner: Vec<MultiPoly> = (0..n).map(|i| descent_linear(i, twists[i], n, f)).collect();
    let reduced = if n == 0 { poly.clone() } else { poly.compose_reduced(&inner, f, Some(f.q())) };
    Ok(DescentPoly { q: f.q(), d: f.d(), poly: reduced })
}

/// Handle to a gate output inside a [`CircuitBuilder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Wire(u32);

impl Wire {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Straight-line program gate. `Poly` evaluates a sparse polynomial whose
/// variable `k` is bound to the wire `args[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    Input(usize),
    Const(Fe),
    Poly { poly: MultiPoly, args: Vec<u32> },
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Neg(u32),
}

/// Polynomial presented as a straight-line program over sparse-polynomial
/// leaves. Gates only reference earlier gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    nvars: usize,
    gates: Vec<Gate>,
    out: u32,
}

#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    nvars: usize,
    gates: Vec<Gate>,
    inputs: Vec<Option<Wire>>,
}

impl CircuitBuilder {
    pub fn new(nvars: usize) -> CircuitBuilder {
        CircuitBuilder { nvars, gates: Vec::new(), inputs: vec![None; nvars] }
    }

    fn push(&mut self, g: Gate) -> Wire {
        self.gates.push(g);
        Wire(self.gates.len() as u32 - 1)
    }

    pub fn input(&mut self, i: usize) -> Wire {
        assert!(i < self.nvars, "input index out of range");
        if let Some(w) = self.inputs[i] {
            return w;
        }
        let w = self.push(Gate::Input(i));
        self.inputs[i] = Some(w);
        w
    }

    pub fn inputs(&mut self, range: core::ops::Range<usize>) -> Vec<Wire> {
        range.map(|i| self.input(i)).collect()
    }

    pub fn constant(&mut self, c: Fe) -> Wire {
        self.push(Gate::Const(c))
    }

    pub fn poly(&mut self, poly: MultiPoly, args: &[Wire]) -> Wire {
        assert_eq!(poly.nvars(), args.len(), "poly gate arity mismatch");
        self.push(Gate::Poly { poly, args: args.iter().map(|w| w.0).collect() })
    }

    pub fn add(&mut self, a: Wire, b: Wire) -> Wire {
        self.push(Gate::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: Wire, b: Wire) -> Wire {
        self.push(Gate::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: Wire, b: Wire) -> Wire {
        self.push(Gate::Mul(a.0, b.0))
    }

    pub fn neg(&mut self, a: Wire) -> Wire {
        self.push(Gate::Neg(a.0))
    }

    pub fn scale(&mut self, c: Fe, a: Wire) -> Wire {
        let k = self.constant(c);
        self.mul(k, a)
    }

    pub fn square(&mut self, a: Wire) -> Wire {
        self.mul(a, a)
    }

    pub fn pow(&mut self, a: Wire, e: u32) -> Wire {
        assert!(e >= 1);
        let mut acc: Option<Wire> = None;
        let mut base = a;
        let mut k = e;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    Some(x) => self.mul(x, base),
                    None => base,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = self.square(base);
        }
        acc.unwrap()
    }

    /// Copies `c` into this builder with its inputs bound to `args`.
    pub fn inline(&mut self, c: &Circuit, args: &[Wire]) -> Wire {
        assert_eq!(c.nvars, args.len(), "inline arity mismatch");
        let map = self.inline_gates(&c.gates, args);
        Wire(map[c.out as usize])
    }

    /// Copies a rational circuit; returns the numerator and denominator wires.
    pub fn inline_rational(&mut self, c: &RationalCircuit, args: &[Wire]) -> (Wire, Wire) {
        assert_eq!(c.nvars, args.len(), "inline arity mismatch");
        let map = self.inline_gates(&c.gates, args);
        (Wire(map[c.num as usize]), Wire(map[c.den as usize]))
    }

    fn inline_gates(&mut self, gates: &[Gate], args: &[Wire]) -> Vec<u32> {
        let mut map: Vec<u32> = Vec::with_capacity(gates.len());
        for g in gates {
            let r = |k: &u32| map[*k as usize];
            let w = match g {
                Gate::Input(i) => args[*i].0,
                Gate::Const(x) => self.push(Gate::Const(*x)).0,
                Gate::Poly { poly, args: a } => self.push(Gate::Poly { poly: poly.clone(), args: a.iter().map(r).collect() }).0,
                Gate::Add(a, b) => self.push(Gate::Add(r(a), r(b))).0,
                Gate::Sub(a, b) => self.push(Gate::Sub(r(a), r(b))).0,
                Gate::Mul(a, b) => self.push(Gate::Mul(r(a), r(b))).0,
                Gate::Neg(a) => self.push(Gate::Neg(r(a))).0,
            };
            map.push(w);
        }
        map
    }

    pub fn finish(self, out: Wire) -> Circuit {
        Circuit { nvars: self.nvars, gates: self.gates, out: out.0 }
    }

    pub fn finish_rational(self, num: Wire, den: Wire) -> RationalCircuit {
        RationalCircuit { nvars: self.nvars, gates: self.gates, num: num.0, den: den.0 }
    }
}

impl Circuit {
    /// Single-gate circuit over the inputs `0..p.nvars()`.
    pub fn from_poly(p: MultiPoly) -> Circuit {
        let n = p.nvars();
        let mut b = CircuitBuilder::new(n);
        let args = b.inputs(0..n);
        let w = b.poly(p, &args);
        b.finish(w)
    }

    pub fn constant(nvars: usize, c: Fe) -> Circuit {
        let mut b = CircuitBuilder::new(nvars);
        let w = b.constant(c);
        b.finish(w)
    }

    /// Rebuilds a circuit from parsed parts, checking that gates only look back.
    pub fn from_parts(nvars: usize, gates: Vec<Gate>, out: u32) -> Result<Circuit> {
        let bad = || Error::InvalidInput("malformed circuit".into());
        for (k, g) in gates.iter().enumerate() {
            let k = k as u32;
            let ok = match g {
                Gate::Input(i) => *i < nvars,
                Gate::Const(_) => true,
                Gate::Poly { poly, args } => poly.nvars() == args.len() && args.iter().all(|&a| a < k),
                Gate::Add(a, b) | Gate::Sub(a, b) | Gate::Mul(a, b) => *a < k && *b < k,
                Gate::Neg(a) => *a < k,
            };
            if !ok {
                return Err(bad());
            }
        }
        if out as usize >= gates.len() {
            return Err(bad());
        }
        Ok(Circuit { nvars, gates, out })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn out(&self) -> u32 {
        self.out
    }

    /// The polynomial if this is a single `Poly` gate over the identity inputs.
    pub fn as_poly(&self) -> Option<&MultiPoly> {
        match self.gates.get(self.out as usize) {
            Some(Gate::Poly { poly, args }) if poly.nvars() == self.nvars => {
                let ident = args.iter().enumerate().all(|(k, &a)| matches!(self.gates[a as usize], Gate::Input(i) if i == k));
                ident.then_some(poly)
            }
            _ => None,
        }
    }

    pub fn evaluate(&self, point: &[Fe], f: &Field) -> Fe {
        debug_assert_eq!(point.len(), self.nvars);
        eval_gates(&self.gates, point, f)[self.out as usize]
    }

    /// Upper bound on the total degree of the represented polynomial.
    pub fn degree(&self) -> u32 {
        gate_degrees(&self.gates)[self.out as usize]
    }

    /// Expands to a sparse polynomial, reducing by `x^q = x` when `reduce = Some(q)`.
    pub fn expand(&self, f: &Field, reduce: Option<u64>) -> MultiPoly {
        let n = self.nvars;
        let mut v: Vec<Option<MultiPoly>> = Vec::with_capacity(self.gates.len());
        // free intermediate expansions after their last use
        let mut last_use = vec![0usize; self.gates.len()];
        for (k, g) in self.gates.iter().enumerate() {
            match g {
                Gate::Poly { args, .. } => args.iter().for_each(|&a| last_use[a as usize] = k),
                Gate::Add(a, b) | Gate::Sub(a, b) | Gate::Mul(a, b) => {
                    last_use[*a as usize] = k;
                    last_use[*b as usize] = k;
                }
                Gate::Neg(a) => last_use[*a as usize] = k,
                _ => {}
            }
        }
        last_use[self.out as usize] = usize::MAX;
        for (k, g) in self.gates.iter().enumerate() {
            let get = |v: &Vec<Option<MultiPoly>>, a: u32| v[a as usize].clone().expect("operand already released");
            let x = match g {
                Gate::Input(i) => MultiPoly::var(n, *i),
                Gate::Const(c) => MultiPoly::constant(n, *c),
                Gate::Poly { poly, args } => {
                    let inner: Vec<MultiPoly> = args.iter().map(|&a| get(&v, a)).collect();
                    if inner.is_empty() {
                        MultiPoly::constant(n, poly.coeff(&[]))
                    } else {
                        poly.compose_reduced(&inner, f, reduce)
                    }
                }
                Gate::Add(a, b) => get(&v, *a).add(&get(&v, *b), f),
                Gate::Sub(a, b) => get(&v, *a).sub(&get(&v, *b), f),
                Gate::Mul(a, b) => get(&v, *a).mul_reduced(&get(&v, *b), f, reduce),
                Gate::Neg(a) => get(&v, *a).neg(f),
            };
            v.push(Some(x));
            for (j, slot) in v.iter_mut().enumerate().take(k + 1) {
                if last_use[j] == k && j != k {
                    *slot = None;
                }
            }
        }
        let out = v[self.out as usize].take().unwrap();
        match reduce {
            Some(q) => out.reduce_mod_j(q, f),
            None => out,
        }
    }
}

/// Numerator and denominator outputs of one shared gate list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCircuit {
    nvars: usize,
    gates: Vec<Gate>,
    num: u32,
    den: u32,
}

impl RationalCircuit {
    pub fn from_parts(nvars: usize, gates: Vec<Gate>, num: u32, den: u32) -> Result<RationalCircuit> {
        let c = Circuit::from_parts(nvars, gates, num)?;
        if den as usize >= c.gates.len() {
            return Err(Error::InvalidInput("denominator wire out of range".into()));
        }
        Ok(RationalCircuit { nvars, gates: c.gates, num, den })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_wire(&self) -> u32 {
        self.num
    }

    pub fn den_wire(&self) -> u32 {
        self.den
    }

    /// `(numerator, denominator)` values.
    pub fn evaluate_parts(&self, point: &[Fe], f: &Field) -> (Fe, Fe) {
        debug_assert_eq!(point.len(), self.nvars);
        let v = eval_gates(&self.gates, point, f);
        (v[self.num as usize], v[self.den as usize])
    }

    pub fn evaluate(&self, point: &[Fe], f: &Field) -> Result<Fe> {
        let (n, d) = self.evaluate_parts(point, f);
        f.div(n, d).ok_or(Error::DenominatorZero)
    }

    /// Formal degrees of numerator and denominator.
    pub fn degrees(&self) -> (u32, u32) {
        let d = gate_degrees(&self.gates);
        (d[self.num as usize], d[self.den as usize])
    }

    pub fn num_circuit(&self) -> Circuit {
        Circuit { nvars: self.nvars, gates: self.gates.clone(), out: self.num }
    }

    pub fn den_circuit(&self) -> Circuit {
        Circuit { nvars: self.nvars, gates: self.gates.clone(), out: self.den }
    }
}

impl From<RationalFn> for RationalCircuit {
    fn from(r: RationalFn) -> RationalCircuit {
        let n = r.num.nvars();
        let mut b = CircuitBuilder::new(n);
        let args = b.inputs(0..n);
        let num = b.poly(r.num, &args);
        let den = b.poly(r.den, &args);
        b.finish_rational(num, den)
    }
}

/// Ring operations over some value type: field elements or circuit wires.
pub trait Arith {
    type V: Copy;
    fn constant(&mut self, c: Fe) -> Self::V;
    fn add(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn sub(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn mul(&mut self, a: Self::V, b: Self::V) -> Self::V;
}

/// Direct evaluation in `K`.
pub struct FieldArith<'a>(pub &'a Field);

impl Arith for FieldArith<'_> {
    type V = Fe;
    fn constant(&mut self, c: Fe) -> Fe {
        c
    }
    fn add(&mut self, a: Fe, b: Fe) -> Fe {
        self.0.add(a, b)
    }
    fn sub(&mut self, a: Fe, b: Fe) -> Fe {
        self.0.sub(a, b)
    }
    fn mul(&mut self, a: Fe, b: Fe) -> Fe {
        self.0.mul(a, b)
    }
}

/// Gate emission.
impl Arith for CircuitBuilder {
    type V = Wire;
    fn constant(&mut self, c: Fe) -> Wire {
        CircuitBuilder::constant(self, c)
    }
    fn add(&mut self, a: Wire, b: Wire) -> Wire {
        CircuitBuilder::add(self, a, b)
    }
    fn sub(&mut self, a: Wire, b: Wire) -> Wire {
        CircuitBuilder::sub(self, a, b)
    }
    fn mul(&mut self, a: Wire, b: Wire) -> Wire {
        CircuitBuilder::mul(self, a, b)
    }
}

/// Formal degree of every gate output.
fn gate_degrees(gates: &[Gate]) -> Vec<u32> {
    let mut deg: Vec<u32> = Vec::with_capacity(gates.len());
    for g in gates {
        let x = match g {
            Gate::Input(_) => 1,
            Gate::Const(_) => 0,
            Gate::Poly { poly, args } => poly
                .terms()
                .map(|(m, _)| m.exps().iter().zip(args).map(|(&e, &a)| e * deg[a as usize]).sum::<u32>())
                .max()
                .unwrap_or(0),
            Gate::Add(a, b) | Gate::Sub(a, b) => deg[*a as usize].max(deg[*b as usize]),
            Gate::Mul(a, b) => deg[*a as usize] + deg[*b as usize],
            Gate::Neg(a) => deg[*a as usize],
        };
        deg.push(x);
    }
    deg
}

fn eval_gates(gates: &[Gate], point: &[Fe], f: &Field) -> Vec<Fe> {
    let mut v: Vec<Fe> = Vec::with_capacity(gates.len());
    let mut buf: Vec<Fe> = Vec::new();
    for g in gates {
        let x = match g {
            Gate::Input(i) => point[*i],
            Gate::Const(c) => *c,
            Gate::Poly { poly, args } => {
                buf.clear();
                buf.extend(args.iter().map(|&a| v[a as usize]));
                poly.evaluate(&buf, f)
            }
            Gate::Add(a, b) => f.add(v[*a as usize], v[*b as usize]),
            Gate::Sub(a, b) => f.sub(v[*a as usize], v[*b as usize]),
            Gate::Mul(a, b) => f.mul(v[*a as usize], v[*b as usize]),
            Gate::Neg(a) => f.neg(v[*a as usize]),
        };
        v.push(x);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f7() -> Field {
        Field::setup(7, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    fn random_poly(n: usize, deg: u32, terms: usize, f: &Field, rng: &mut ChaCha8Rng) -> MultiPoly {
        MultiPoly::from_terms(
            n,
            (0..terms).map(|_| (random_monomial(n, deg, rng).exps, f.random(rng))),
            f,
        )
    }

    #[test]
    fn evaluate_hand_examples() {
        let f = f7();
        let c = MultiPoly::constant(2, f.from_int(3));
        assert_eq!(c.evaluate(&[f.from_int(5), f.from_int(6)], &f), f.from_int(3));
        let p = MultiPoly::from_terms(2, [(vec![1, 1], f.one()), (vec![0, 0], f.one())], &f);
        assert_eq!(p.evaluate(&[f.from_int(2), f.from_int(3)], &f), f.zero());
    }

    #[test]
    fn compose_identity_and_linearity() {
        let f = f7();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_poly(3, 3, 6, &f, &mut rng);
        let ids: Vec<MultiPoly> = (0..3).map(|i| MultiPoly::var(3, i)).collect();
        assert_eq!(p.compose(&ids, &f), p);
        let sum = MultiPoly::linear(2, &[f.one(), f.one()], f.zero());
        let l = random_poly(3, 1, 3, &f, &mut rng);
        assert_eq!(sum.compose(&[l.clone(), l.clone()], &f), l.scale(f.from_int(2), &f));
    }

    #[test]
    fn grlex_order_is_degree_first() {
        let a = Monomial::new(vec![0, 2]);
        let b = Monomial::new(vec![1, 0]);
        let c = Monomial::new(vec![1, 1]);
        assert!(b < a && b < c && c > a);
    }

    #[test]
    fn circuit_expand_matches_evaluation() {
        let f = Field::setup(11, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_poly(3, 2, 5, &f, &mut rng);
        let q = random_poly(2, 2, 4, &f, &mut rng);
        let mut b = CircuitBuilder::new(3);
        let x = b.inputs(0..3);
        let pw = b.poly(p.clone(), &x);
        let qw = b.poly(q.clone(), &[x[2], pw]);
        let s = b.sub(qw, x[0]);
        let cube = b.pow(s, 3);
        let out = b.mul(cube, pw);
        let c = b.finish(out);
        let e = c.expand(&f, None);
        assert!(e.total_degree() <= c.degree());
        for _ in 0..50 {
            let pt: Vec<Fe> = (0..3).map(|_| f.random(&mut rng)).collect();
            assert_eq!(c.evaluate(&pt, &f), e.evaluate(&pt, &f));
        }
        let mut b2 = CircuitBuilder::new(3);
        let y = b2.inputs(0..3);
        let w = b2.inline(&c, &[y[1], y[0], y[2]]);
        let c2 = b2.finish(w);
        let pt: Vec<Fe> = (0..3).map(|_| f.random(&mut rng)).collect();
        assert_eq!(c2.evaluate(&pt, &f), c.evaluate(&[pt[1], pt[0], pt[2]], &f));
    }

    #[test]
    fn descent_linear_case() {
        let f = Field::setup(3, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let x = MultiPoly::var(1, 0);
        let g = descent_reduce(&x, &[0], &f).unwrap();
        let expect = MultiPoly::linear(2, f.theta(), Fe::ZERO);
        assert_eq!(g.poly, expect);
        let g1 = descent_reduce(&x, &[1], &f).unwrap();
        for a in f.elements() {
            assert_eq!(g1.evaluate(&descent_point(&[a], &f), &f), f.frobenius(a, 1));
        }
    }

    #[test]
    fn reduction_keeps_values_on_base_points() {
        let f = Field::setup(3, 1, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_poly(2, 7, 8, &f, &mut rng);
        let r = p.reduce_mod_j(3, &f);
        assert!(r.degree_in(0) < 3 && r.degree_in(1) < 3);
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(p.evaluate(&[a, b], &f), r.evaluate(&[a, b], &f));
            }
        }
    }
}
