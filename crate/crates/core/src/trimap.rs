//! The trilinear map `G1 x G2 x G3 -> mu_ell`.
//!
//! Secret: the curve `E`, transports `T_j` of `E` onto the planes
//! `E_j = j-hat(E^{A_j})`, the blinding keys, the generator matrices `M_i` and
//! the torsion vectors `alpha`, `beta`. Public: `alpha-hat`, `beta-hat`, the
//! blinded addition and doubling maps, the blinded endomorphisms `phi-hat_i`,
//! the line functions `h-hat`, `g-hat` of the Miller loop, and samples of `[0]`.
//!
//! `G3 = F_ell` lives in `R = F_ell<z_1, ..., z_N>`: `f` encodes `a` when
//! `lambda(f) = a I` for `lambda(z_i) = M_i`.
//!
//! Every published map is `0/0` when an input block sits at the identity
//! `(0, 0)`, so public evaluation never feeds such points back in: sums are
//! accumulated on top of a multiple of `beta-hat`, and that offset is removed
//! inside the pairing by bilinearity.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;
use rand::Rng;

use crate::blinding::BlindingKey;
use crate::curve::{find_desk_params, projective_add, Curve, CurveTransform, Point};
use crate::field::{inv_mod, is_prime, Fe, Field};
use crate::pairing::{blinded_pair, chord_fraction, tangent_fraction, weil, MillerSteps};
use crate::poly::{CircuitBuilder, Wire};
use crate::publisher::{publish_local_map, publish_product, LocalBlock, PublishedFunction, PublishedMap, SemiLocal, Slot};
use crate::{Error, Result, DEFAULT_RETRY_BUDGET};

/// Matrix over `F_ell` with entries in `[0, ell)`.
pub type EllMatrix = Vec<Vec<u64>>;

pub fn ell_identity(n: usize) -> EllMatrix {
    (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect()
}

pub fn ell_mul(a: &EllMatrix, b: &EllMatrix, ell: u64) -> EllMatrix {
    let k = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter().map(|row| (0..cols).map(|j| (0..k).fold(0, |acc, t| (acc + row[t] * b[t][j]) % ell)).collect()).collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<u64>], ell: u64) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        let inv = inv_mod(m[r][c], ell);
        for x in m[r].iter_mut() {
            *x = *x * inv % ell;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            let k = row[c];
            if i != r && k != 0 {
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + (ell - k) * p) % ell;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn ell_rank(rows: &[Vec<u64>], ell: u64) -> usize {
    rref(&mut rows.to_vec(), ell).len()
}

/// Uniform solution of `a x = b`, or `None` when inconsistent.
fn solve_random<R: Rng + ?Sized>(a: &[Vec<u64>], b: &[u64], ell: u64, rng: &mut R) -> Option<Vec<u64>> {
    let k = a.first()?.len();
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi % ell);
            r
        })
        .collect();
    let pivots = rref(&mut m, ell);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut x: Vec<u64> = (0..k).map(|_| rng.gen_range(0..ell)).collect();
    for (r, &c) in pivots.iter().enumerate() {
        let mut v = m[r][k];
        for j in (0..k).filter(|j| !pivots.contains(j)) {
            v = (v + ell - m[r][j] * x[j] % ell) % ell;
        }
        x[c] = v;
    }
    Some(x)
}

/// Row `j` of a generator matrix: `1` in column `j1`, `c` in column `j2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorRow {
    pub j1: usize,
    pub j2: usize,
    pub c: u64,
}

/// `M_i`: every row has two nonzero entries, one of them `1`. Row `j` is the
/// local map `(alpha_{j1}, alpha_{j2}) -> m(alpha_{j1}, [c] alpha_{j2})`.
/// For `n = 1` the single row has `j1 = j2 = 0` and entry `1 + c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMatrix {
    rows: Vec<GeneratorRow>,
    dense: EllMatrix,
}

impl GeneratorMatrix {
    pub fn new(rows: Vec<GeneratorRow>, ell: u64) -> Result<GeneratorMatrix> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("generator matrix needs a row".into()));
        }
        let mut dense = vec![vec![0u64; n]; n];
        for (j, r) in rows.iter().enumerate() {
            let shape = if n == 1 { r.j1 == 0 && r.j2 == 0 } else { r.j1 < n && r.j2 < n && r.j1 != r.j2 };
            if !shape || r.c == 0 || r.c >= ell {
                return Err(Error::InvalidInput("generator row shape".into()));
            }
            dense[j][r.j1] = (dense[j][r.j1] + 1) % ell;
            dense[j][r.j2] = (dense[j][r.j2] + r.c) % ell;
        }
        if ell_rank(&dense, ell) < n {
            return Err(Error::Singular);
        }
        Ok(GeneratorMatrix { rows, dense })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[GeneratorRow] {
        &self.rows
    }

    pub fn matrix(&self) -> &EllMatrix {
        &self.dense
    }
}

/// Companion coefficients drawn by [`gen_generators`]. With `c = 1` alone every
/// `M_i` and `I` has constant row sums, which confines the span to a subspace
/// of dimension `n^2 - n + 1`.
pub const COMPANION_COEFFS: [u64; 2] = [1, 2];

const GEN_ATTEMPTS: usize = 64;

/// `count` generator matrices that together with `I` span `Mat_n(F_ell)`.
pub fn gen_generators<R: Rng + ?Sized>(n: usize, count: usize, ell: u64, rng: &mut R) -> Result<Vec<GeneratorMatrix>> {
    gen_generators_with(n, count, ell, &COMPANION_COEFFS, rng)
}

/// [`gen_generators`] with an explicit coefficient set.
pub fn gen_generators_with<R: Rng + ?Sized>(
    n: usize,
    count: usize,
    ell: u64,
    coeffs: &[u64],
    rng: &mut R,
) -> Result<Vec<GeneratorMatrix>> {
    if n == 0 || count == 0 || ell < 3 || !is_prime(ell) || coeffs.is_empty() {
        return Err(Error::InvalidInput("generators need n, N >= 1, an odd prime ell and coefficients".into()));
    }
    for attempt in 0..GEN_ATTEMPTS {
        let mut mats = Vec::with_capacity(count);
        let mut draws = 0;
        while mats.len() < count && draws < GEN_ATTEMPTS * count {
            draws += 1;
            let rows = (0..n)
                .map(|_| {
                    let c = coeffs[rng.gen_range(0..coeffs.len())];
                    if n == 1 {
                        return GeneratorRow { j1: 0, j2: 0, c };
                    }
                    let j1 = rng.gen_range(0..n);
                    let mut j2 = rng.gen_range(0..n - 1);
                    if j2 >= j1 {
                        j2 += 1;
                    }
                    GeneratorRow { j1, j2, c }
                })
                .collect();
            if let Ok(m) = GeneratorMatrix::new(rows, ell) {
                mats.push(m);
            }
        }
        if mats.len() == count && span_rank(&mats, ell) == n * n {
            return Ok(mats);
        }
        log::debug!("generator set {attempt} does not span; resampling");
    }
    Err(Error::SpanFailure)
}

/// Rank of the vectorized set `{I, M_1, ..., M_N}`.
pub fn span_rank(gens: &[GeneratorMatrix], ell: u64) -> usize {
    let Some(n) = gens.first().map(|g| g.n()) else { return 0 };
    let mut rows: Vec<Vec<u64>> = vec![ell_identity(n).concat()];
    rows.extend(gens.iter().map(|g| g.dense.concat()));
    ell_rank(&rows, ell)
}

/// `M_{w_1} M_{w_2} ... M_{w_k}`; letters are `1..=N`.
pub fn word_matrix(gens: &[GeneratorMatrix], word: &[u16], ell: u64) -> Result<EllMatrix> {
    let n = gens.first().ok_or(Error::InvalidInput("no generators".into()))?.n();
    let mut m = ell_identity(n);
    for &z in word {
        let g = gens.get(usize::from(z).wrapping_sub(1)).ok_or(Error::InvalidInput("letter out of range".into()))?;
        m = ell_mul(&m, &g.dense, ell);
    }
    Ok(m)
}

/// Element of `F_ell<z_1, ..., z_N>`. Words list generator indices `1..=N`
/// left to right; the empty word is `1`. No zero coefficients are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct NCPoly {
    terms: BTreeMap<Vec<u16>, u64>,
}

impl NCPoly {
    pub fn new() -> NCPoly {
        NCPoly::default()
    }

    pub fn add_term(&mut self, word: Vec<u16>, c: u64, ell: u64) {
        let e = self.terms.entry(word).or_insert(0);
        *e = (*e + c % ell) % ell;
        self.terms.retain(|_, c| *c != 0);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], u64)> {
        self.terms.iter().map(|(w, &c)| (&w[..], c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Support inside `{1, z_1, ..., z_N}` plus exactly one word of length `n`.
    pub fn is_admissible(&self, n: usize, count: usize) -> bool {
        let letters_ok = self.terms.keys().all(|w| w.iter().all(|&z| z >= 1 && usize::from(z) <= count));
        let long = self.terms.keys().filter(|w| w.len() == n).count();
        let short = self.terms.keys().all(|w| w.len() <= 1 || w.len() == n);
        letters_ok && short && (long == 1 || (n == 1 && long >= 1))
    }

    /// `lambda(f) = sum_w c_w M_w`.
    pub fn lambda(&self, gens: &[GeneratorMatrix], ell: u64) -> Result<EllMatrix> {
        let n = gens.first().ok_or(Error::InvalidInput("no generators".into()))?.n();
        let mut acc = vec![vec![0u64; n]; n];
        for (w, c) in self.terms() {
            let m = word_matrix(gens, w, ell)?;
            for (ar, mr) in acc.iter_mut().zip(&m) {
                for (a, &x) in ar.iter_mut().zip(mr) {
                    *a = (*a + c * x) % ell;
                }
            }
        }
        Ok(acc)
    }
}

/// `a` when `m = a I`.
pub fn scalar_of(m: &EllMatrix) -> Option<u64> {
    let a = m.first()?.first().copied()?;
    let ok = m.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == if i == j { a } else { 0 }));
    ok.then_some(a)
}

const ENCODE_ATTEMPTS: usize = 256;

/// `c z_w + sum_{i=0}^N b_i z_i` with `lambda = a I`, `c != 0` and `w` a random
/// word of length `n` accepted by `word_ok`; `z_0 = 1`.
pub fn encode_with<R: Rng + ?Sized>(
    gens: &[GeneratorMatrix],
    ell: u64,
    a: u64,
    word_ok: &dyn Fn(&[u16]) -> bool,
    rng: &mut R,
) -> Result<NCPoly> {
    let n = gens.first().ok_or(Error::InvalidInput("no generators".into()))?.n();
    let count = gens.len();
    let mut columns = vec![ell_identity(n).concat()];
    columns.extend(gens.iter().map(|g| g.dense.concat()));
    let eqs: Vec<Vec<u64>> = (0..n * n).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    let target = ell_identity(n).concat();
    for _ in 0..ENCODE_ATTEMPTS {
        let word: Vec<u16> = (0..n).map(|_| rng.gen_range(1..=count) as u16).collect();
        if !word_ok(&word) {
            continue;
        }
        let mw = word_matrix(gens, &word, ell)?.concat();
        let c = rng.gen_range(1..ell);
        let rhs: Vec<u64> = (0..n * n).map(|r| (a % ell * target[r] + ell - c * mw[r] % ell) % ell).collect();
        let Some(b) = solve_random(&eqs, &rhs, ell, rng) else { continue };
        let mut f = NCPoly::new();
        f.add_term(word, c, ell);
        f.add_term(Vec::new(), b[0], ell);
        for (i, &bi) in b.iter().enumerate().skip(1) {
            f.add_term(vec![i as u16], bi, ell);
        }
        return Ok(f);
    }
    Err(Error::SolveFailure)
}

/// `z = a z_1 + b z_2` for an `ell`-torsion basis, `(a, b) != (0, 0)` unless the caller allows it.
fn torsion_points(e: &Curve, basis: &(Point, Point), f: &Field) -> Vec<Point> {
    let mut out = Vec::with_capacity((e.ell * e.ell) as usize);
    for s in 0..e.ell {
        for t in 0..e.ell {
            out.push(e.add(&e.scalar_mul(s, &basis.0, f), &e.scalar_mul(t, &basis.1, f), f));
        }
    }
    out
}

/// Point of the curve carrying `G1` (`E-hat'` in DDH mode, else `E-hat`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G1Point(Vec<Fe>);

/// Point of `E-hat`, the curve carrying `G2` and the maps `phi-hat_i`.
///
/// `G1` points are a different type, so a `G1` point cannot reach the
/// endomorphisms of `E-hat` without the explicit single-key conversion:
///
/// ```compile_fail
/// # use trimap_core::trimap::{Evaluator, G1Point};
/// fn self_pairing(ev: &mut Evaluator<'_>, a: &G1Point) {
///     let _ = ev.apply_phi(0, a);
/// }
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G2Point(Vec<Fe>);

impl G1Point {
    pub fn from_coords(v: Vec<Fe>) -> G1Point {
        G1Point(v)
    }

    pub fn coords(&self) -> &[Fe] {
        &self.0
    }
}

impl G2Point {
    pub fn from_coords(v: Vec<Fe>) -> G2Point {
        G2Point(v)
    }

    pub fn coords(&self) -> &[Fe] {
        &self.0
    }
}

/// Blinded addition `m-hat` (two points) and doubling `d-hat` (one point).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLaw {
    pub add: PublishedMap,
    pub dbl: PublishedMap,
}

/// `h-hat(P, Q)` and `g-hat(P1, P2, Q)`: products over the blocks of the
/// tangent and chord functions, chain points first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineFunctions {
    pub tangent: PublishedFunction,
    pub chord: PublishedFunction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams {
    pub field: Field,
    pub n: usize,
    pub ell: u64,
    pub alpha_hat: G1Point,
    pub beta_hat: G2Point,
    /// Group law of `E-hat`.
    pub law: GroupLaw,
    /// Group law of `E-hat'`; present exactly in DDH mode.
    pub law1: Option<GroupLaw>,
    pub phi: Vec<PublishedMap>,
    /// Chains on `G1` evaluated at `G2` points.
    pub lines: LineFunctions,
    /// Chains on `G2` evaluated at `G1` points; `None` means `lines` serves both.
    pub lines_rev: Option<LineFunctions>,
    pub kernel: Vec<NCPoly>,
}

impl PublicParams {
    pub fn is_ddh(&self) -> bool {
        self.law1.is_some()
    }

    pub fn num_gens(&self) -> usize {
        self.phi.len()
    }

    /// The same point viewed in `G2`; only possible when one key blinds both groups.
    pub fn g1_as_g2(&self, p: &G1Point) -> Result<G2Point> {
        if self.is_ddh() {
            return Err(Error::InvalidInput("G1 and G2 live on differently blinded curves".into()));
        }
        Ok(G2Point(p.0.clone()))
    }

    fn law_for(&self, side: Side) -> &GroupLaw {
        match side {
            Side::G1 => self.law1.as_ref().unwrap_or(&self.law),
            Side::G2 => &self.law,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretParams {
    pub curve: Curve,
    pub basis: (Point, Point),
    pub transforms: Vec<CurveTransform>,
    /// Key of `E-hat`.
    pub key: BlindingKey,
    /// Key of `E-hat'` in DDH mode.
    pub key1: Option<BlindingKey>,
    pub gens: Vec<GeneratorMatrix>,
    pub alpha: Vec<Point>,
    pub beta: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub public: PublicParams,
    pub secret: SecretParams,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetupParams {
    pub n: usize,
    pub ell: u64,
    /// `N`, the number of generator matrices.
    pub num_gens: usize,
    pub q_max: u64,
    pub d_max: usize,
    /// Lower bound on `|K|`.
    pub k_min: u64,
    pub ddh: bool,
    pub kernel_samples: usize,
}

impl SetupParams {
    /// `N = n^2 + 1` over a prime field of size at least `3 * 10^4`.
    pub fn desk(n: usize, ell: u64) -> SetupParams {
        SetupParams { n, ell, num_gens: n * n + 1, q_max: 200_000, d_max: 2, k_min: 30_000, ddh: false, kernel_samples: 4 }
    }
}

const SETUP_ATTEMPTS: usize = 256;

/// Builds an instance: parameters, transports, keys, generators, torsion
/// vectors with `e(alpha_j, beta_j) != 1` for every block, and the publications.
pub fn setup<R: Rng + ?Sized>(p: &SetupParams, rng: &mut R) -> Result<Instance> {
    if p.n == 0 || p.num_gens == 0 || p.ell < 3 || !is_prime(p.ell) {
        return Err(Error::InvalidInput("setup needs n, N >= 1 and an odd prime ell".into()));
    }
    let (f, e) = find_desk_params(p.ell, p.q_max, p.d_max, p.k_min, rng)?;
    let basis = e.torsion_basis(&f, rng);
    let torsion = torsion_points(&e, &basis, &f);
    let transforms: Vec<CurveTransform> =
        (0..p.n).map(|_| CurveTransform::random_avoiding(true, &torsion, &f, rng)).collect();
    let key = BlindingKey::keygen(p.n, &f, false, rng)?;
    let key1 = if p.ddh { Some(BlindingKey::keygen(p.n, &f, false, rng)?) } else { None };
    let gens = gen_generators(p.n, p.num_gens, p.ell, rng)?;
    let mut secret = SecretParams { curve: e, basis, transforms, key, key1, gens, alpha: Vec::new(), beta: Vec::new() };
    choose_alpha_beta(&mut secret, &torsion, p.ddh, &f, rng)?;

    let public = publish_instance(&secret, f, p.kernel_samples, rng)?;
    Ok(Instance { public, secret })
}

/// Fresh publication of an instance's secret data: group laws, `phi-hat_i`,
/// line functions, `alpha-hat`, `beta-hat` and `kernel_samples` samples of `[0]`.
pub fn publish_instance<R: Rng + ?Sized>(
    secret: &SecretParams,
    f: Field,
    kernel_samples: usize,
    rng: &mut R,
) -> Result<PublicParams> {
    let law = publish_law(secret, &secret.key, &f, rng)?;
    let law1 = match &secret.key1 {
        Some(k1) => Some(publish_law(secret, k1, &f, rng)?),
        None => None,
    };
    let phi = (0..secret.gens.len())
        .map(|i| Ok(publish_local_map(&secret.phi_blocks(i, &f), &[&secret.key], &secret.key, &f, rng)?.0))
        .collect::<Result<Vec<_>>>()?;
    let k1 = secret.key_g1();
    let k2 = &secret.key;
    let lines = publish_lines(secret, [k1, k2], [k1, k1, k2], &f, rng)?;
    let lines_rev = match secret.key1 {
        Some(_) => Some(publish_lines(secret, [k2, k1], [k2, k2, k1], &f, rng)?),
        None => None,
    };
    let alpha_hat = G1Point(secret.lift(k1, &secret.alpha, &f)?);
    let beta_hat = G2Point(secret.lift(k2, &secret.beta, &f)?);
    let kernel = (0..kernel_samples).map(|_| secret.encode(0, &f, rng)).collect::<Result<Vec<_>>>()?;
    Ok(PublicParams {
        n: secret.n(),
        ell: secret.ell(),
        field: f,
        alpha_hat,
        beta_hat,
        law,
        law1,
        phi,
        lines,
        lines_rev,
        kernel,
    })
}

/// Samples `alpha`, `beta` with nonzero blocks, `e(alpha_j, beta_j) != 1`,
/// `zeta != 1`, and no identity block in any `phi_i(beta)` (nor `phi_i(alpha)`
/// when one key blinds both groups).
fn choose_alpha_beta<R: Rng + ?Sized>(
    s: &mut SecretParams,
    torsion: &[Point],
    ddh: bool,
    f: &Field,
    rng: &mut R,
) -> Result<()> {
    let e = &s.curve;
    let n = s.transforms.len();
    let nonzero: Vec<&Point> = torsion.iter().filter(|p| !p.is_infinity()).collect();
    for _ in 0..SETUP_ATTEMPTS {
        let alpha: Vec<Point> = (0..n).map(|_| *nonzero[rng.gen_range(0..nonzero.len())]).collect();
        let beta: Vec<Point> = (0..n).map(|_| *nonzero[rng.gen_range(0..nonzero.len())]).collect();
        let mut zeta = f.one();
        let mut blocks_ok = true;
        for (a, b) in alpha.iter().zip(&beta) {
            let w = weil(e, a, b, f)?;
            blocks_ok &= w != f.one();
            zeta = f.mul(zeta, w);
        }
        if !blocks_ok || zeta == f.one() {
            continue;
        }
        let clean = |v: &[Point]| s.gens.iter().all(|g| s.apply_gen_points(g, v, f).iter().all(|p| !p.is_infinity()));
        if !clean(&beta) || (!ddh && !clean(&alpha)) {
            continue;
        }
        s.alpha = alpha;
        s.beta = beta;
        return Ok(());
    }
    Err(Error::RetryBudgetExhausted { op: "setup" })
}

fn publish_law<R: Rng + ?Sized>(s: &SecretParams, key: &BlindingKey, f: &Field, rng: &mut R) -> Result<GroupLaw> {
    let (add, _) = publish_local_map(&s.add_blocks(f), &[key, key], key, f, rng)?;
    let (dbl, _) = publish_local_map(&s.dbl_blocks(f), &[key], key, f, rng)?;
    Ok(GroupLaw { add, dbl })
}

fn publish_lines<R: Rng + ?Sized>(
    s: &SecretParams,
    tangent_keys: [&BlindingKey; 2],
    chord_keys: [&BlindingKey; 3],
    f: &Field,
    rng: &mut R,
) -> Result<LineFunctions> {
    let (tangent, _) = publish_product(&s.tangent_pieces(), &tangent_keys, f, rng)?;
    let (chord, _) = publish_product(&s.chord_pieces(), &chord_keys, f, rng)?;
    Ok(LineFunctions { tangent, chord })
}

fn slot(point: usize, block: usize) -> Slot {
    Slot { point, block }
}

/// `[c] q` by repeated complete addition.
fn small_mul(b: &mut CircuitBuilder, e: &Curve, f: &Field, c: u64, q: [Wire; 3]) -> [Wire; 3] {
    let mut acc = q;
    for _ in 1..c {
        acc = projective_add(b, e.a, e.b, f, acc, q);
    }
    acc
}

impl SecretParams {
    pub fn n(&self) -> usize {
        self.transforms.len()
    }

    pub fn ell(&self) -> u64 {
        self.curve.ell
    }

    /// Key of the curve carrying `G1`.
    pub fn key_g1(&self) -> &BlindingKey {
        self.key1.as_ref().unwrap_or(&self.key)
    }

    /// Blocks of the addition map: block `j` adds the two inputs' `j`-th planes on `E`.
    pub fn add_blocks<'a>(&'a self, f: &'a Field) -> Vec<LocalBlock<'a>> {
        (0..self.n())
            .map(|j| {
                let t = &self.transforms[j];
                let e = &self.curve;
                LocalBlock {
                    slots: vec![slot(0, j), slot(1, j)],
                    emit: Box::new(move |b: &mut CircuitBuilder, ins: &[Wire]| {
                        let p = t.local_to_projective(b, ins[0], ins[1]);
                        let q = t.local_to_projective(b, ins[2], ins[3]);
                        let r = projective_add(b, e.a, e.b, f, p, q);
                        t.projective_to_local(b, r)
                    }),
                }
            })
            .collect()
    }

    /// Blocks of the doubling map.
    pub fn dbl_blocks<'a>(&'a self, f: &'a Field) -> Vec<LocalBlock<'a>> {
        (0..self.n())
            .map(|j| {
                let t = &self.transforms[j];
                let e = &self.curve;
                LocalBlock {
                    slots: vec![slot(0, j)],
                    emit: Box::new(move |b: &mut CircuitBuilder, ins: &[Wire]| {
                        let p = t.local_to_projective(b, ins[0], ins[1]);
                        let r = projective_add(b, e.a, e.b, f, p, p);
                        t.projective_to_local(b, r)
                    }),
                }
            })
            .collect()
    }

    /// Blocks of `phi_i`: block `j` is `m(alpha_{j1}, [c_j] alpha_{j2})` through `T_j`.
    pub fn phi_blocks<'a>(&'a self, i: usize, f: &'a Field) -> Vec<LocalBlock<'a>> {
        self.gens[i]
            .rows()
            .iter()
            .enumerate()
            .map(|(j, &GeneratorRow { j1, j2, c })| {
                let (t1, t2, out) = (&self.transforms[j1], &self.transforms[j2], &self.transforms[j]);
                let e = &self.curve;
                let same = j1 == j2;
                let slots = if same { vec![slot(0, j1)] } else { vec![slot(0, j1), slot(0, j2)] };
                LocalBlock {
                    slots,
                    emit: Box::new(move |b: &mut CircuitBuilder, ins: &[Wire]| {
                        let p = t1.local_to_projective(b, ins[0], ins[1]);
                        let q = if same { p } else { t2.local_to_projective(b, ins[2], ins[3]) };
                        let q = small_mul(b, e, f, c, q);
                        let r = projective_add(b, e.a, e.b, f, p, q);
                        out.projective_to_local(b, r)
                    }),
                }
            })
            .collect()
    }

    /// Hidden pieces of `h-hat`: the tangent at the chain point over the
    /// vertical at its double, evaluated at the second point, per block.
    pub fn tangent_pieces(&self) -> Vec<SemiLocal> {
        (0..self.n())
            .map(|j| {
                let t = &self.transforms[j];
                let mut b = CircuitBuilder::new(4);
                let ins = b.inputs(0..4);
                let p = t.local_to_projective(&mut b, ins[0], ins[1]);
                let q = t.local_to_projective(&mut b, ins[2], ins[3]);
                let (num, den) = tangent_fraction(&mut b, self.curve.a, p, q);
                SemiLocal { f: b.finish_rational(num, den), slots: vec![slot(0, j), slot(1, j)] }
            })
            .collect()
    }

    /// Hidden pieces of `g-hat`: the chord through two chain points over the
    /// vertical at their sum, evaluated at the third point, per block.
    pub fn chord_pieces(&self) -> Vec<SemiLocal> {
        (0..self.n())
            .map(|j| {
                let t = &self.transforms[j];
                let mut b = CircuitBuilder::new(6);
                let ins = b.inputs(0..6);
                let p1 = t.local_to_projective(&mut b, ins[0], ins[1]);
                let p2 = t.local_to_projective(&mut b, ins[2], ins[3]);
                let q = t.local_to_projective(&mut b, ins[4], ins[5]);
                let (num, den) = chord_fraction(&mut b, p1, p2, q);
                SemiLocal { f: b.finish_rational(num, den), slots: vec![slot(0, j), slot(1, j), slot(2, j)] }
            })
            .collect()
    }

    /// `M v` on `E^n`, computed row by row as `m(v_{j1}, [c] v_{j2})`.
    pub fn apply_gen_points(&self, g: &GeneratorMatrix, v: &[Point], f: &Field) -> Vec<Point> {
        let e = &self.curve;
        g.rows().iter().map(|r| e.add(&v[r.j1], &e.scalar_mul(r.c, &v[r.j2], f), f)).collect()
    }

    /// `M v` for an arbitrary matrix over `F_ell`.
    pub fn apply_matrix_points(&self, m: &EllMatrix, v: &[Point], f: &Field) -> Vec<Point> {
        let e = &self.curve;
        m.iter()
            .map(|row| row.iter().zip(v).fold(Point::Infinity, |acc, (&c, p)| e.add(&acc, &e.scalar_mul(c, p, f), f)))
            .collect()
    }

    /// `W`-point of `key` over the `E^n` point `v`.
    pub fn lift(&self, key: &BlindingKey, v: &[Point], f: &Field) -> Result<Vec<Fe>> {
        let local = v.iter().zip(&self.transforms).map(|(p, t)| t.to_local(p, f)).collect::<Result<Vec<_>>>()?;
        Ok(key.lift(&local, f))
    }

    /// `E^n` point of a `W`-point of `key`.
    pub fn unblind(&self, key: &BlindingKey, w: &[Fe], f: &Field) -> Result<Vec<Point>> {
        let local = key.rho(w, f)?;
        local.into_iter().zip(&self.transforms).map(|(v, t)| t.from_local(v, f)).collect()
    }

    pub fn lift_g1(&self, v: &[Point], f: &Field) -> Result<G1Point> {
        Ok(G1Point(self.lift(self.key_g1(), v, f)?))
    }

    pub fn lift_g2(&self, v: &[Point], f: &Field) -> Result<G2Point> {
        Ok(G2Point(self.lift(&self.key, v, f)?))
    }

    pub fn unblind_g1(&self, p: &G1Point, f: &Field) -> Result<Vec<Point>> {
        self.unblind(self.key_g1(), &p.0, f)
    }

    pub fn unblind_g2(&self, p: &G2Point, f: &Field) -> Result<Vec<Point>> {
        self.unblind(&self.key, &p.0, f)
    }

    /// `prod_j e_E(x_j, y_j)`.
    pub fn pair_points(&self, x: &[Point], y: &[Point], f: &Field) -> Result<Fe> {
        x.iter().zip(y).try_fold(f.one(), |acc, (a, b)| Ok(f.mul(acc, weil(&self.curve, a, b, f)?)))
    }

    /// `zeta = e(alpha, beta)`.
    pub fn zeta(&self, f: &Field) -> Result<Fe> {
        self.pair_points(&self.alpha, &self.beta, f)
    }

    /// A word is usable on `G2` when no suffix sends `beta` to a point with an
    /// identity block: public evaluation applies the suffixes one by one.
    pub fn word_is_clean(&self, word: &[u16], f: &Field) -> bool {
        let mut v = self.beta.clone();
        for &z in word.iter().rev() {
            v = self.apply_gen_points(&self.gens[usize::from(z) - 1], &v, f);
            if v.iter().any(|p| p.is_infinity()) {
                return false;
            }
        }
        true
    }

    pub fn lambda(&self, p: &NCPoly) -> Result<EllMatrix> {
        p.lambda(&self.gens, self.ell())
    }

    /// Private encoding of `a` (see [`encode_with`]) over a clean word.
    pub fn encode<R: Rng + ?Sized>(&self, a: u64, f: &Field, rng: &mut R) -> Result<NCPoly> {
        encode_with(&self.gens, self.ell(), a, &|w: &[u16]| self.word_is_clean(w, f), rng)
    }

    /// `(f, a)` with `f in [a]` for a uniform secret `a`.
    pub fn dlp_challenge<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R) -> Result<(NCPoly, u64)> {
        let a = rng.gen_range(0..self.ell());
        Ok((self.encode(a, f, rng)?, a))
    }

    /// Reads `a` off `lambda(f) = a I`.
    pub fn trapdoor_solve(&self, p: &NCPoly) -> Result<u64> {
        scalar_of(&self.lambda(p)?).ok_or(Error::InvalidInput("lambda(f) is not scalar".into()))
    }
}

impl Instance {
    pub fn field(&self) -> &Field {
        &self.public.field
    }

    pub fn encode<R: Rng + ?Sized>(&self, a: u64, rng: &mut R) -> Result<NCPoly> {
        self.secret.encode(a, &self.public.field, rng)
    }

    pub fn kernel_samples<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<NCPoly>> {
        (0..count).map(|_| self.encode(0, rng)).collect()
    }

    /// `(f, a)` with `f in [a]` for a uniform secret `a`.
    pub fn dlp_challenge<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(NCPoly, u64)> {
        self.secret.dlp_challenge(&self.public.field, rng)
    }

    pub fn trapdoor_solve(&self, f: &NCPoly) -> Result<u64> {
        self.secret.trapdoor_solve(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    G1,
    G2,
}

fn cat(parts: &[&[Fe]]) -> Vec<Fe> {
    parts.concat()
}

/// Public evaluation over the published maps, with re-randomized retries.
pub struct Evaluator<'a> {
    pp: &'a PublicParams,
    budget: usize,
    id1: Vec<Fe>,
    id2: Vec<Fe>,
    /// `[r] beta-hat` at index `r - 1`, `1 <= r < ell`.
    beta_mults: Vec<Vec<Fe>>,
    /// `[r] phi-hat_k(beta-hat)`, filled on demand by the pairing fallback.
    phi_beta_mults: Vec<Option<Vec<Vec<Fe>>>>,
    /// Results are deterministic in the inputs, so both are memoized.
    materialized: BTreeMap<(NCPoly, Vec<Fe>), (Vec<Fe>, u64)>,
    paired: BTreeMap<(Vec<Fe>, Vec<Fe>), Fe>,
    /// Re-randomized attempts taken so far.
    retries: Cell<usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(pp: &'a PublicParams) -> Result<Evaluator<'a>> {
        Evaluator::with_budget(pp, DEFAULT_RETRY_BUDGET)
    }

    /// Precomputes the multiples of `beta-hat` and the identity on both curves.
    pub fn with_budget(pp: &'a PublicParams, budget: usize) -> Result<Evaluator<'a>> {
        let mut ev = Evaluator {
            pp,
            budget,
            id1: Vec::new(),
            id2: Vec::new(),
            beta_mults: Vec::new(),
            phi_beta_mults: vec![None; pp.phi.len()],
            materialized: BTreeMap::new(),
            paired: BTreeMap::new(),
            retries: Cell::new(0),
        };
        let (mults, id2) = ev.multiples(Side::G2, &pp.beta_hat.0)?;
        ev.beta_mults = mults;
        ev.id2 = id2;
        ev.id1 = if pp.is_ddh() { ev.multiples(Side::G1, &pp.alpha_hat.0)?.1 } else { ev.id2.clone() };
        Ok(ev)
    }

    /// `([1]p, ..., [ell - 1]p)` and `[ell]p`.
    fn multiples(&self, side: Side, p: &[Fe]) -> Result<(Vec<Vec<Fe>>, Vec<Fe>)> {
        let mut out = vec![p.to_vec()];
        for _ in 2..self.pp.ell {
            let next = self.raw_add(side, out.last().expect("nonempty"), p)?;
            out.push(next);
        }
        let id = self.raw_add(side, out.last().expect("nonempty"), p)?;
        Ok((out, id))
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn retries(&self) -> usize {
        self.retries.get()
    }

    fn retry(&self) {
        self.retries.set(self.retries.get() + 1);
    }

    pub fn identity_g1(&self) -> G1Point {
        G1Point(self.id1.clone())
    }

    pub fn identity_g2(&self) -> G2Point {
        G2Point(self.id2.clone())
    }

    fn identity(&self, side: Side) -> &[Fe] {
        match side {
            Side::G1 => &self.id1,
            Side::G2 => &self.id2,
        }
    }

    /// `m-hat(x, y)`, or `d-hat(x)` when `x = y`; the identity is handled
    /// without evaluation, and the swapped or undispatched form is the fallback.
    fn raw_add(&self, side: Side, x: &[Fe], y: &[Fe]) -> Result<Vec<Fe>> {
        let id = self.identity(side);
        if x == id {
            return Ok(y.to_vec());
        }
        if y == id {
            return Ok(x.to_vec());
        }
        let law = self.pp.law_for(side);
        let f = &self.pp.field;
        let out = if x == y {
            law.dbl.evaluate(x, f).or_else(|_| {
                self.retry();
                law.add.evaluate(&cat(&[x, x]), f)
            })
        } else {
            law.add.evaluate(&cat(&[x, y]), f).or_else(|_| {
                self.retry();
                law.add.evaluate(&cat(&[y, x]), f)
            })
        };
        out.map_err(|_| Error::ExceptionalPoint)
    }

    /// `[k] x` by double-and-add; intermediate multiples of a point of order
    /// `ell` never reach the identity.
    fn raw_mul(&self, side: Side, k: u64, x: &[Fe]) -> Result<Vec<Fe>> {
        let k = k % self.pp.ell;
        if k == 0 {
            return Ok(self.identity(side).to_vec());
        }
        let mut acc = x.to_vec();
        for i in (0..63 - k.leading_zeros()).rev() {
            acc = self.raw_add(side, &acc, &acc)?;
            if (k >> i) & 1 == 1 {
                acc = self.raw_add(side, &acc, x)?;
            }
        }
        Ok(acc)
    }

    /// Whether `p` is usable as a map input: the identity, or a point whose
    /// doubling evaluates.
    fn probe(&self, side: Side, p: &[Fe]) -> bool {
        if p == self.identity(side) {
            return true;
        }
        let law = self.pp.law_for(side);
        let f = &self.pp.field;
        law.dbl.evaluate(p, f).is_ok() || law.add.evaluate(&cat(&[p, p]), f).is_ok()
    }

    pub fn add_g1(&self, x: &G1Point, y: &G1Point) -> Result<G1Point> {
        self.raw_add(Side::G1, &x.0, &y.0).map(G1Point)
    }

    /// `add_hat` on `E-hat`; doubling goes through `d-hat`.
    pub fn add_g2(&self, x: &G2Point, y: &G2Point) -> Result<G2Point> {
        self.raw_add(Side::G2, &x.0, &y.0).map(G2Point)
    }

    pub fn mul_g1(&self, k: u64, x: &G1Point) -> Result<G1Point> {
        self.raw_mul(Side::G1, k, &x.0).map(G1Point)
    }

    pub fn mul_g2(&self, k: u64, x: &G2Point) -> Result<G2Point> {
        self.raw_mul(Side::G2, k, &x.0).map(G2Point)
    }

    /// `phi-hat_i(y)`; on failure `phi-hat_i(y + D) + phi-hat_i(-D)` for `D = [r] beta-hat`.
    pub fn apply_phi(&self, i: usize, y: &G2Point) -> Result<G2Point> {
        self.phi_raw(i, &y.0).map(G2Point)
    }

    fn phi_raw(&self, i: usize, y: &[Fe]) -> Result<Vec<Fe>> {
        let phi = self.pp.phi.get(i).ok_or(Error::InvalidInput("phi index out of range".into()))?;
        let f = &self.pp.field;
        if y == self.id2 {
            return Ok(y.to_vec());
        }
        if let Ok(v) = phi.evaluate(y, f) {
            return Ok(v);
        }
        let ell = self.pp.ell as usize;
        for t in 0..self.budget {
            self.retry();
            let r = 1 + t % (ell - 1);
            let attempt = || -> Result<Vec<Fe>> {
                let z = self.raw_add(Side::G2, y, &self.beta_mults[r - 1])?;
                let u = phi.evaluate(&z, f)?;
                let v = phi.evaluate(&self.beta_mults[ell - r - 1], f)?;
                self.raw_add(Side::G2, &u, &v)
            };
            match attempt() {
                Ok(v) => return Ok(v),
                Err(e) => log::debug!("apply_phi retry {t}: {e}"),
            }
        }
        Err(Error::RetryBudgetExhausted { op: "apply_phi" })
    }

    /// `w(y)` for a word, applying the letters right to left.
    fn word_image(&self, word: &[u16], y: &[Fe], memo: &mut BTreeMap<Vec<u16>, Vec<Fe>>) -> Result<Vec<Fe>> {
        if word.is_empty() {
            return Ok(y.to_vec());
        }
        if let Some(p) = memo.get(word) {
            return Ok(p.clone());
        }
        let inner = self.word_image(&word[1..], y, memo)?;
        let out = self.phi_raw(usize::from(word[0]) - 1, &inner)?;
        memo.insert(word.to_vec(), out.clone());
        Ok(out)
    }

    /// `(f(y) + [off] beta-hat, off)` with the first component a usable map input.
    /// Terms are added one copy at a time; when a step fails, the accumulator
    /// moves by another multiple of `beta-hat`.
    fn materialize(&self, p: &NCPoly, y: &[Fe]) -> Result<(Vec<Fe>, u64)> {
        let ell = self.pp.ell;
        let mut memo = BTreeMap::new();
        let mut queue = Vec::new();
        for (w, c) in p.terms() {
            let img = self.word_image(w, y, &mut memo)?;
            queue.extend(core::iter::repeat(img).take(c as usize));
        }
        let mut acc = self.beta_mults[0].clone();
        let mut off = 1u64;
        let mut shift = 0u64;
        for t in &queue {
            let mut failures = 0;
            loop {
                if let Ok(c) = self.raw_add(Side::G2, &acc, t) {
                    if self.probe(Side::G2, &c) {
                        acc = c;
                        break;
                    }
                }
                failures += 1;
                self.retry();
                if failures > self.budget {
                    return Err(Error::RetryBudgetExhausted { op: "materialize" });
                }
                let r = 1 + shift % (ell - 1);
                shift += 1;
                if let Ok(c) = self.raw_add(Side::G2, &acc, &self.beta_mults[r as usize - 1]) {
                    if self.probe(Side::G2, &c) {
                        acc = c;
                        off = (off + r) % ell;
                    }
                }
            }
        }
        Ok((acc, off))
    }

    /// `f(y)` as a point; the result may have identity blocks.
    pub fn eval_ncpoly(&self, p: &NCPoly, y: &G2Point) -> Result<G2Point> {
        if y.0 == self.id2 {
            return Ok(y.clone());
        }
        let (s, off) = self.materialize(p, &y.0)?;
        if off == 0 {
            return Ok(G2Point(s));
        }
        let back = &self.beta_mults[(self.pp.ell - off - 1) as usize];
        self.raw_add(Side::G2, &s, back).map(G2Point)
    }

    fn miller(&self, x: &[Fe], y: &[Fe]) -> Result<Fe> {
        let lines_rev = self.pp.lines_rev.as_ref().unwrap_or(&self.pp.lines);
        let mut sx = ChainSteps { ev: self, side: Side::G1, lines: &self.pp.lines, at: y };
        let mut sy = ChainSteps { ev: self, side: Side::G2, lines: lines_rev, at: x };
        blinded_pair(self.pp.ell, &x.to_vec(), &mut sx, &y.to_vec(), &mut sy)
    }

    /// `([r] B, [ell - r] B)` for `B = beta-hat` (`k = 0`) or `phi-hat_{k-1}(beta-hat)`.
    fn offset_pair(&mut self, k: usize, r: usize) -> Option<(Vec<Fe>, Vec<Fe>)> {
        let ell = self.pp.ell as usize;
        if k == 0 {
            return Some((self.beta_mults[r - 1].clone(), self.beta_mults[ell - r - 1].clone()));
        }
        let i = (k - 1) % self.pp.phi.len();
        if self.phi_beta_mults[i].is_none() {
            let base = self.phi_raw(i, &self.pp.beta_hat.0).ok()?;
            let (mults, _) = self.multiples(Side::G2, &base).ok()?;
            self.phi_beta_mults[i] = Some(mults);
        }
        let m = self.phi_beta_mults[i].as_ref()?;
        Some((m[r - 1].clone(), m[ell - r - 1].clone()))
    }

    fn pair_raw(&mut self, x: &[Fe], y: &[Fe]) -> Result<Fe> {
        let key = (x.to_vec(), y.to_vec());
        if let Some(&v) = self.paired.get(&key) {
            return Ok(v);
        }
        let v = self.pair_uncached(x, y)?;
        self.paired.insert(key, v);
        Ok(v)
    }

    fn pair_uncached(&mut self, x: &[Fe], y: &[Fe]) -> Result<Fe> {
        let f = &self.pp.field;
        if x == self.id1 || y == self.id2 {
            return Ok(f.one());
        }
        match self.miller(x, y) {
            Ok(v) => return Ok(v),
            Err(e) => log::debug!("direct pairing failed ({e}); splitting the second argument"),
        }
        let ell = self.pp.ell as usize;
        for t in 0..self.budget {
            self.retry();
            let (k, r) = (t / (ell - 1), 1 + t % (ell - 1));
            let Some((d, dn)) = self.offset_pair(k, r) else { continue };
            let attempt = || -> Result<Fe> {
                let z = self.raw_add(Side::G2, y, &d)?;
                let a = self.miller(x, &z)?;
                let b = self.miller(x, &dn)?;
                Ok(self.pp.field.mul(a, b))
            };
            match attempt() {
                Ok(v) => return Ok(v),
                Err(e) => log::debug!("pairing split {t} failed: {e}"),
            }
        }
        Err(Error::DegeneratePair)
    }

    /// `e-hat(x, y)` from the published line functions.
    pub fn pair(&mut self, x: &G1Point, y: &G2Point) -> Result<Fe> {
        self.pair_raw(&x.0, &y.0)
    }

    /// `e-hat(x, f(y))`; equals `zeta^{abc}` for `x = [a] alpha-hat`,
    /// `y = [b] beta-hat` and `f in [c]`.
    pub fn tri_eval(&mut self, x: &G1Point, y: &G2Point, p: &NCPoly) -> Result<Fe> {
        if !p.is_admissible(self.pp.n, self.pp.num_gens()) {
            return Err(Error::InvalidInput("encoding outside the admissible support".into()));
        }
        let f = &self.pp.field;
        if x.0 == self.id1 || y.0 == self.id2 {
            return Ok(f.one());
        }
        let key = (p.clone(), y.0.clone());
        let (s, off) = match self.materialized.get(&key) {
            Some(m) => m.clone(),
            None => {
                let m = self.materialize(p, &y.0)?;
                self.materialized.insert(key, m.clone());
                m
            }
        };
        let mut v = self.pair_raw(&x.0, &s)?;
        if off != 0 {
            let back = self.beta_mults[(self.pp.ell - off - 1) as usize].clone();
            let w = self.pair_raw(&x.0, &back)?;
            v = self.pp.field.mul(v, w);
        }
        Ok(v)
    }

    /// Whether `f(beta-hat) = [a] beta-hat`.
    pub fn dlp_check(&self, p: &NCPoly, a: u64) -> Result<bool> {
        let (s, off) = self.materialize(p, &self.pp.beta_hat.0)?;
        Ok(s == self.beta_multiple((a + off) % self.pp.ell))
    }

    /// Exhaustive search for `a` with `f(beta-hat) = [a] beta-hat`.
    pub fn dlp_brute_force(&self, p: &NCPoly) -> Result<Option<u64>> {
        let (s, off) = self.materialize(p, &self.pp.beta_hat.0)?;
        let ell = self.pp.ell;
        Ok((0..ell).find(|&a| s == self.beta_multiple((a + off) % ell)))
    }

    /// `a` from `e-hat(alpha-hat, f(beta-hat)) = zeta^a`.
    pub fn dlp_pairing_solve(&mut self, p: &NCPoly) -> Result<u64> {
        let (alpha, beta) = (self.pp.alpha_hat.clone(), self.pp.beta_hat.clone());
        let zeta = self.pair(&alpha, &beta)?;
        let v = self.tri_eval(&alpha, &beta, p)?;
        discrete_log(zeta, v, self.pp.ell, &self.pp.field).ok_or(Error::InvalidInput("value outside <zeta>".into()))
    }

    fn beta_multiple(&self, r: u64) -> &[Fe] {
        if r == 0 {
            &self.id2
        } else {
            &self.beta_mults[r as usize - 1]
        }
    }
}

/// `k in [0, ell)` with `zeta^k = v`.
pub fn discrete_log(zeta: Fe, v: Fe, ell: u64, f: &Field) -> Option<u64> {
    let mut acc = f.one();
    for k in 0..ell {
        if acc == v {
            return Some(k);
        }
        acc = f.mul(acc, zeta);
    }
    None
}

/// Miller steps over the published maps: the chain lives on `side`, the
/// line functions are evaluated at the fixed point `at`.
struct ChainSteps<'e, 'a> {
    ev: &'e Evaluator<'a>,
    side: Side,
    lines: &'e LineFunctions,
    at: &'e [Fe],
}

impl MillerSteps for ChainSteps<'_, '_> {
    type Pt = Vec<Fe>;

    fn double(&mut self, p: &Vec<Fe>) -> Result<Vec<Fe>> {
        self.ev.raw_add(self.side, p, p)
    }

    fn add(&mut self, p1: &Vec<Fe>, p2: &Vec<Fe>) -> Result<Vec<Fe>> {
        self.ev.raw_add(self.side, p1, p2)
    }

    fn tangent(&mut self, p: &Vec<Fe>) -> Result<Fe> {
        self.lines.tangent.evaluate(&cat(&[p, self.at]), &self.ev.pp.field)
    }

    fn chord(&mut self, p1: &Vec<Fe>, p2: &Vec<Fe>) -> Result<Fe> {
        self.lines.chord.evaluate(&cat(&[p1, p2, self.at]), &self.ev.pp.field)
    }

    fn field(&self) -> &Field {
        &self.ev.pp.field
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_ones_cannot_span_but_mixed_coefficients_do() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 3;
        assert_eq!(gen_generators_with(n, 20, 5, &[1], &mut rng), Err(Error::SpanFailure));
        let mats: Vec<GeneratorMatrix> = (0..20)
            .filter_map(|_| {
                let rows = (0..n).map(|j| GeneratorRow { j1: j, j2: (j + 1 + rng.gen_range(0..n - 1)) % n, c: 1 }).collect();
                GeneratorMatrix::new(rows, 5).ok()
            })
            .collect();
        assert!(span_rank(&mats, 5) <= n * n - n + 1);
        let gens = gen_generators(2, 5, 5, &mut rng).unwrap();
        assert_eq!(span_rank(&gens, 5), 4);
    }

    #[test]
    fn encodings_evaluate_to_scalars() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gens = gen_generators(2, 5, 5, &mut rng).unwrap();
        for a in 0..5 {
            let f = encode_with(&gens, 5, a, &|_: &[u16]| true, &mut rng).unwrap();
            assert!(f.is_admissible(2, 5));
            assert_eq!(scalar_of(&f.lambda(&gens, 5).unwrap()), Some(a));
        }
    }

    #[test]
    fn random_solution_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = vec![vec![1, 2, 3], vec![2, 4, 1]];
        for _ in 0..20 {
            let x = solve_random(&a, &[4, 2], 7, &mut rng).unwrap();
            for (row, b) in a.iter().zip([4, 2]) {
                assert_eq!(row.iter().zip(&x).map(|(p, q)| p * q).sum::<u64>() % 7, b);
            }
        }
        assert!(solve_random(&[vec![1, 1], vec![2, 2]], &[1, 3], 7, &mut rng).is_none());
    }
}
