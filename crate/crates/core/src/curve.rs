//! Short Weierstrass curves `y^2 = x^3 + a x + b` over `K`, torsion bases,
//! parameter search and the transformed curves `E^A` with optional `j-hat`.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::field::{is_prime, Fe, Field};
use crate::pairing;
use crate::poly::Arith;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(Fe, Fe),
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn coords(&self) -> Option<(Fe, Fe)> {
        match *self {
            Point::Infinity => None,
            Point::Affine(x, y) => Some((x, y)),
        }
    }
}

/// Curve coefficients with the point count and the prime `ell`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub a: Fe,
    pub b: Fe,
    pub ell: u64,
    /// `#E(K)`.
    pub order: u64,
    /// `#E(K) / ell^2`.
    pub cofactor: u64,
}

pub type CurveParams = Curve;

impl Curve {
    /// Counts points and checks the torsion conditions `ell^2 | #E`, `ell | q^d - 1`.
    pub fn new(a: Fe, b: Fe, ell: u64, f: &Field) -> Result<Curve> {
        if f.q() <= 3 {
            return Err(Error::InvalidInput("characteristic must exceed 3".into()));
        }
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if discriminant(a, b, f).is_zero() {
            return Err(Error::Singular);
        }
        let order = count_points(a, b, f);
        if order % (ell * ell) != 0 || (f.order() - 1) % ell != 0 {
            return Err(Error::InvalidInput("ell-torsion is not fully rational".into()));
        }
        Ok(Curve { a, b, ell, order, cofactor: order / (ell * ell) })
    }

    pub fn is_on(&self, p: &Point, f: &Field) -> bool {
        match *p {
            Point::Infinity => true,
            Point::Affine(x, y) => f.square(y) == rhs(self.a, self.b, x, f),
        }
    }

    pub fn neg(&self, p: &Point, f: &Field) -> Point {
        match *p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x, f.neg(y)),
        }
    }

    /// Chord-and-tangent addition.
    pub fn add(&self, p: &Point, q: &Point, f: &Field) -> Point {
        let (x1, y1, x2, y2) = match (*p, *q) {
            (Point::Infinity, _) => return *q,
            (_, Point::Infinity) => return *p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 != x2 {
            f.div(f.sub(y2, y1), f.sub(x2, x1)).expect("x1 != x2")
        } else if y1 == y2 && !y1.is_zero() {
            let num = f.add(f.mul(f.from_int(3), f.square(x1)), self.a);
            f.div(num, f.add(y1, y1)).expect("y1 != 0")
        } else {
            return Point::Infinity;
        };
        // line y = lambda x + nu
        let nu = f.sub(y1, f.mul(lambda, x1));
        let x3 = f.sub(f.sub(f.square(lambda), x1), x2);
        let y3 = f.neg(f.add(f.mul(lambda, x3), nu));
        Point::Affine(x3, y3)
    }

    pub fn double(&self, p: &Point, f: &Field) -> Point {
        self.add(p, p, f)
    }

    /// `[m]P` by double-and-add.
    pub fn scalar_mul(&self, m: u64, p: &Point, f: &Field) -> Point {
        let mut acc = Point::Infinity;
        for bit in (0..64).rev() {
            acc = self.double(&acc, f);
            if (m >> bit) & 1 == 1 {
                acc = self.add(&acc, p, f);
            }
        }
        acc
    }

    /// Uniform affine point: random `x` until the right-hand side is a square.
    pub fn random_point<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R) -> Point {
        loop {
            let x = f.random(rng);
            if let Some(y) = f.sqrt(rhs(self.a, self.b, x, f)) {
                let y = if rng.gen::<bool>() { y } else { f.neg(y) };
                return Point::Affine(x, y);
            }
        }
    }

    /// All points, `O` first.
    pub fn points(&self, f: &Field) -> Vec<Point> {
        let mut out = vec![Point::Infinity];
        for x in f.elements() {
            let r = rhs(self.a, self.b, x, f);
            if r.is_zero() {
                out.push(Point::Affine(x, r));
            } else if let Some(y) = f.sqrt(r) {
                out.push(Point::Affine(x, y));
                out.push(Point::Affine(x, f.neg(y)));
            }
        }
        out
    }

    /// Random point of exact order `ell`: the `ell`-primary part of a random
    /// point, multiplied down by `ell` until the next step would vanish.
    pub fn torsion_point<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R) -> Point {
        let mut prime_to = self.order;
        while prime_to % self.ell == 0 {
            prime_to /= self.ell;
        }
        loop {
            let mut p = self.scalar_mul(prime_to, &self.random_point(f, rng), f);
            if p.is_infinity() {
                continue;
            }
            loop {
                let next = self.scalar_mul(self.ell, &p, f);
                if next.is_infinity() {
                    return p;
                }
                p = next;
            }
        }
    }

    /// Two torsion points with a Weil pairing of order `ell`.
    pub fn torsion_basis<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R) -> (Point, Point) {
        loop {
            if let Some(b) = self.try_torsion_basis(f, rng, 64) {
                return b;
            }
        }
    }

    fn try_torsion_basis<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R, tries: usize) -> Option<(Point, Point)> {
        let p1 = self.torsion_point(f, rng);
        for _ in 0..tries {
            let p2 = self.torsion_point(f, rng);
            if matches!(pairing::weil(self, &p1, &p2, f), Ok(z) if z != f.one()) {
                return Some((p1, p2));
            }
        }
        None
    }
}

fn rhs(a: Fe, b: Fe, x: Fe, f: &Field) -> Fe {
    f.add(f.mul(x, f.add(f.square(x), a)), b)
}

/// `4 a^3 + 27 b^2`.
pub fn discriminant(a: Fe, b: Fe, f: &Field) -> Fe {
    f.add(f.mul(f.from_int(4), f.mul(a, f.square(a))), f.mul(f.from_int(27), f.square(b)))
}

/// `#E(K)` by enumerating `x`.
pub fn count_points(a: Fe, b: Fe, f: &Field) -> u64 {
    let mut n = 1u64;
    for x in f.elements() {
        let r = rhs(a, b, x, f);
        if r.is_zero() {
            n += 1;
        } else if f.is_square(r) {
            n += 2;
        }
    }
    n
}

/// Random curves tried per candidate field in [`find_desk_params`].
pub const CURVES_PER_FIELD: usize = 256;

/// Largest `q^d` the search enumerates; point counting is exhaustive.
pub const SEARCH_ORDER_LIMIT: u64 = 1 << 20;

/// Search over `K = F_{q^d}` in ascending order, `q <= q_max`, `d <= d_max`,
/// `q^d >= k_min`, for a curve with `E[ell]` of rank two over `K`.
pub fn find_desk_params<R: Rng + ?Sized>(
    ell: u64,
    q_max: u64,
    d_max: usize,
    k_min: u64,
    rng: &mut R,
) -> Result<(Field, Curve)> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let mut cands: Vec<(u64, u64, usize)> = Vec::new();
    for q in (5..=q_max).filter(|&q| is_prime(q)) {
        let mut order = 1u64;
        for d in 1..=d_max {
            order = match order.checked_mul(q) {
                Some(o) if o <= SEARCH_ORDER_LIMIT => o,
                _ => break,
            };
            let hasse_max = order + 1 + 2 * order.isqrt() + 1;
            if order >= k_min && (order - 1) % ell == 0 && ell * ell <= hasse_max {
                cands.push((order, q, d));
            }
        }
    }
    cands.sort_unstable();
    for (_, q, d) in cands {
        let f = Field::setup(q, d, rng)?;
        for _ in 0..CURVES_PER_FIELD {
            let (a, b) = (f.random(rng), f.random(rng));
            if discriminant(a, b, &f).is_zero() {
                continue;
            }
            if count_points(a, b, &f) % (ell * ell) != 0 {
                continue;
            }
            let e = Curve::new(a, b, ell, &f)?;
            if e.try_torsion_basis(&f, rng, 32).is_some() {
                log::debug!("desk parameters: q = {q}, d = {d}, #E = {}", e.order);
                return Ok((f, e));
            }
        }
    }
    Err(Error::SearchExhausted { ell, q_max, d_max })
}


/// `v -> A v`, optionally followed by `j-hat: (x, y) -> (1/x, 1/y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveTransform {
    /// Row-major `[a, b, c, d]`.
    m: [Fe; 4],
    m_inv: [Fe; 4],
    includes_j: bool,
}

impl CurveTransform {
    pub fn new(m: [Fe; 4], includes_j: bool, f: &Field) -> Result<CurveTransform> {
        let det = f.sub(f.mul(m[0], m[3]), f.mul(m[1], m[2]));
        let di = f.inv(det).ok_or(Error::Singular)?;
        let m_inv = [f.mul(m[3], di), f.neg(f.mul(m[1], di)), f.neg(f.mul(m[2], di)), f.mul(m[0], di)];
        Ok(CurveTransform { m, m_inv, includes_j })
    }

    pub fn identity(f: &Field) -> CurveTransform {
        CurveTransform::new([f.one(), f.zero(), f.zero(), f.one()], false, f).expect("identity")
    }

    /// Random `A` with all entries nonzero such that every point of `avoid`
    /// transports to nonzero coordinates.
    pub fn random_avoiding<R: Rng + ?Sized>(
        includes_j: bool,
        avoid: &[Point],
        f: &Field,
        rng: &mut R,
    ) -> CurveTransform {
        loop {
            let m = [f.random_nonzero(rng), f.random_nonzero(rng), f.random_nonzero(rng), f.random_nonzero(rng)];
            let Ok(t) = CurveTransform::new(m, includes_j, f) else { continue };
            let ok = avoid.iter().all(|p| match p.coords() {
                None => true,
                Some((x, y)) => {
                    let (u, v) = t.apply_matrix(x, y, f);
                    !u.is_zero() && !v.is_zero()
                }
            });
            if ok {
                return t;
            }
        }
    }

    pub fn matrix(&self) -> [Fe; 4] {
        self.m
    }

    pub fn matrix_inv(&self) -> [Fe; 4] {
        self.m_inv
    }

    pub fn includes_j(&self) -> bool {
        self.includes_j
    }

    fn apply_matrix(&self, x: Fe, y: Fe, f: &Field) -> (Fe, Fe) {
        let m = &self.m;
        (f.add(f.mul(m[0], x), f.mul(m[1], y)), f.add(f.mul(m[2], x), f.mul(m[3], y)))
    }

    /// `E -> E^A`; `O` and zero coordinates under `j-hat` are exceptional.
    pub fn transport(&self, p: &Point, f: &Field) -> Result<(Fe, Fe)> {
        let (x, y) = p.coords().ok_or(Error::ExceptionalPoint)?;
        let (u, v) = self.apply_matrix(x, y, f);
        if self.includes_j {
            Ok((f.inv(u).ok_or(Error::ExceptionalPoint)?, f.inv(v).ok_or(Error::ExceptionalPoint)?))
        } else {
            Ok((u, v))
        }
    }

    pub fn transport_inv(&self, v: (Fe, Fe), f: &Field) -> Result<Point> {
        let (mut x, mut y) = v;
        if self.includes_j {
            x = f.inv(x).ok_or(Error::ExceptionalPoint)?;
            y = f.inv(y).ok_or(Error::ExceptionalPoint)?;
        }
        let m = &self.m_inv;
        Ok(Point::Affine(f.add(f.mul(m[0], x), f.mul(m[1], y)), f.add(f.mul(m[2], x), f.mul(m[3], y))))
    }

    /// Local coordinates of a point with `O -> (0, 0)` under `j-hat`.
    pub fn to_local(&self, p: &Point, f: &Field) -> Result<(Fe, Fe)> {
        match p {
            Point::Infinity if self.includes_j => Ok((f.zero(), f.zero())),
            _ => self.transport(p, f),
        }
    }

    /// Inverse of [`CurveTransform::to_local`].
    pub fn from_local(&self, v: (Fe, Fe), f: &Field) -> Result<Point> {
        if self.includes_j && v.0.is_zero() && v.1.is_zero() {
            return Ok(Point::Infinity);
        }
        self.transport_inv(v, f)
    }

    /// Projective `E`-point `(X : Y : Z)` over local coordinates `(u, v)`.
    /// Under `j-hat` this is `(a'v + b'u : c'v + d'u : uv)`, which is `(0 : 0 : 0)`
    /// at `(0, 0)`; `O` is never a valid input.
    pub fn local_to_projective<A: Arith>(&self, ar: &mut A, u: A::V, v: A::V) -> [A::V; 3] {
        let [a, b, c, d] = self.m_inv.map(|x| ar.constant(x));
        if self.includes_j {
            let av = ar.mul(a, v);
            let bu = ar.mul(b, u);
            let cv = ar.mul(c, v);
            let du = ar.mul(d, u);
            [ar.add(av, bu), ar.add(cv, du), ar.mul(u, v)]
        } else {
            let au = ar.mul(a, u);
            let bv = ar.mul(b, v);
            let cu = ar.mul(c, u);
            let dv = ar.mul(d, v);
            [ar.add(au, bv), ar.add(cu, dv), ar.constant(Fe::ONE)]
        }
    }

    /// Local coordinates of `(X : Y : Z)` as fractions `[(num_u, den_u), (num_v, den_v)]`.
    /// Under `j-hat`, `O = (0 : 1 : 0)` lands on `(0, 0)` since all entries of `A` are nonzero.
    pub fn projective_to_local<A: Arith>(&self, ar: &mut A, p: [A::V; 3]) -> [(A::V, A::V); 2] {
        let [a, b, c, d] = self.m.map(|x| ar.constant(x));
        let [x, y, z] = p;
        let ax = ar.mul(a, x);
        let by = ar.mul(b, y);
        let cx = ar.mul(c, x);
        let dy = ar.mul(d, y);
        let l1 = ar.add(ax, by);
        let l2 = ar.add(cx, dy);
        if self.includes_j {
            [(z, l1), (z, l2)]
        } else {
            [(l1, z), (l2, z)]
        }
    }
}

/// Complete projective addition (Renes-Costello-Batina, general `a`).
/// Exceptional only when `P - Q` has order two, so complete on `E[ell]` for odd `ell`.
pub fn projective_add<A: Arith>(ar: &mut A, a: Fe, b: Fe, f: &Field, p: [A::V; 3], q: [A::V; 3]) -> [A::V; 3] {
    let [x1, y1, z1] = p;
    let [x2, y2, z2] = q;
    let ca = ar.constant(a);
    let b3 = ar.constant(f.mul(f.from_int(3), b));
    let t0 = ar.mul(x1, x2);
    let t1 = ar.mul(y1, y2);
    let t2 = ar.mul(z1, z2);
    let t3 = cross(ar, x1, y1, x2, y2, t0, t1);
    let t4 = cross(ar, x1, z1, x2, z2, t0, t2);
    let t5 = cross(ar, y1, z1, y2, z2, t1, t2);
    let z3 = ar.mul(ca, t4);
    let x3 = ar.mul(b3, t2);
    let z3 = ar.add(x3, z3);
    let x3 = ar.sub(t1, z3);
    let z3 = ar.add(t1, z3);
    let y3 = ar.mul(x3, z3);
    let t0x2 = ar.add(t0, t0);
    let t1 = ar.add(t0x2, t0);
    let t2 = ar.mul(ca, t2);
    let t4 = ar.mul(b3, t4);
    let t1 = ar.add(t1, t2);
    let t2 = ar.sub(t0, t2);
    let t2 = ar.mul(ca, t2);
    let t4 = ar.add(t4, t2);
    let t0 = ar.mul(t1, t4);
    let y3 = ar.add(y3, t0);
    let t0 = ar.mul(t5, t4);
    let x3 = ar.mul(t3, x3);
    let x3 = ar.sub(x3, t0);
    let t0 = ar.mul(t3, t1);
    let z3 = ar.mul(t5, z3);
    let z3 = ar.add(z3, t0);
    [x3, y3, z3]
}

/// `u1 v2 + u2 v1` as `(u1 + v1)(u2 + v2) - (u1 u2 + v1 v2)`.
fn cross<A: Arith>(ar: &mut A, u1: A::V, v1: A::V, u2: A::V, v2: A::V, uu: A::V, vv: A::V) -> A::V {
    let s1 = ar.add(u1, v1);
    let s2 = ar.add(u2, v2);
    let p = ar.mul(s1, s2);
    let s = ar.add(uu, vv);
    ar.sub(p, s)
}

/// Affine point of a projective triple; `None` at `Z = 0`.
pub fn projective_to_affine(p: [Fe; 3], f: &Field) -> Option<Point> {
    let zi = f.inv(p[2])?;
    Some(Point::Affine(f.mul(p[0], zi), f.mul(p[1], zi)))
}

/// Outcome of the exhaustive `j-hat` conjugation probe over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JProbeReport {
    pub q: u64,
    /// Invertible matrices examined.
    pub total: usize,
    /// Matrices `A` for which `j A j` equals a linear map as a rational map.
    pub linear: Vec<[u64; 4]>,
    /// Matrices whose linearity disagrees with `b = c = 0 or a = d = 0`.
    pub mismatches: Vec<[u64; 4]>,
    /// Matrices with no valid point at all, where a pointwise test is vacuous.
    pub vacuous_pointwise: usize,
}

/// For every invertible `A = [[a, b], [c, d]]` over `F_q`, decides whether
/// `j A j (x, y) = (xy / (a y + b x), xy / (c y + d x))` is a linear map: a
/// candidate `L` must satisfy `xy = (a y + b x)(l1 x + l2 y)` coefficientwise
/// (and the same for the second row), and agree at every valid point.
pub fn j_conjugation_probe(q: u64) -> Result<JProbeReport> {
    if !is_prime(q) || q > 13 {
        return Err(Error::InvalidInput("probe needs a prime q <= 13".into()));
    }
    let md = |x: u64| x % q;
    let inv = |x: u64| crate::field::inv_mod(x, q);
    let mut report = JProbeReport { q, total: 0, linear: Vec::new(), mismatches: Vec::new(), vacuous_pointwise: 0 };
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if (a * d + q - b * c % q) % q == 0 {
                        continue;
                    }
                    report.total += 1;
                    let valid: Vec<(u64, u64)> = (1..q)
                        .flat_map(|x| (1..q).map(move |y| (x, y)))
                        .filter(|&(x, y)| md(a * y + b * x) != 0 && md(c * y + d * x) != 0)
                        .collect();
                    if valid.is_empty() {
                        report.vacuous_pointwise += 1;
                    }
                    // row (r, s) of A yields component xy / (r y + s x)
                    let row_linear = |r: u64, s: u64| {
                        (0..q).any(|l1| {
                            (0..q).any(|l2| {
                                // (r y + s x)(l1 x + l2 y) = s l1 x^2 + (r l1 + s l2) xy + r l2 y^2
                                let ident = md(s * l1) == 0 && md(r * l2) == 0 && md(r * l1 + s * l2) == 1;
                                let pointwise = valid.iter().all(|&(x, y)| {
                                    let val = md(x * y * inv(md(r * y + s * x)));
                                    val == md(l1 * x + l2 * y)
                                });
                                ident && pointwise
                            })
                        })
                    };
                    let linear = row_linear(a, b) && row_linear(c, d);
                    let lemma = (b == 0 && c == 0) || (a == 0 && d == 0);
                    if linear {
                        report.linear.push([a, b, c, d]);
                    }
                    if linear != lemma {
                        report.mismatches.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::FieldArith;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> (Field, Curve, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (f, e) = find_desk_params(5, 200, 3, 0, &mut rng).unwrap();
        (f, e, rng)
    }

    #[test]
    fn identity_and_inverse() {
        let (f, e, mut rng) = small();
        let p = e.random_point(&f, &mut rng);
        assert_eq!(e.add(&p, &Point::Infinity, &f), p);
        assert_eq!(e.add(&p, &e.neg(&p, &f), &f), Point::Infinity);
        assert_eq!(e.scalar_mul(0, &p, &f), Point::Infinity);
        assert_eq!(e.scalar_mul(1, &p, &f), p);
    }

    #[test]
    fn scalar_mul_matches_repeated_addition() {
        let (f, e, mut rng) = small();
        let p = e.random_point(&f, &mut rng);
        let mut acc = Point::Infinity;
        for m in 0..=64 {
            assert_eq!(e.scalar_mul(m, &p, &f), acc);
            acc = e.add(&acc, &p, &f);
        }
    }

    #[test]
    fn projective_add_matches_affine() {
        let (f, e, mut rng) = small();
        let mut ar = FieldArith(&f);
        for _ in 0..200 {
            let p = e.random_point(&f, &mut rng);
            let q = if rng.gen_bool(0.2) { p } else { e.random_point(&f, &mut rng) };
            let lift = |pt: &Point, s: Fe| {
                let (x, y) = pt.coords().unwrap();
                [f.mul(x, s), f.mul(y, s), s]
            };
            let s1 = f.random_nonzero(&mut rng);
            let s2 = f.random_nonzero(&mut rng);
            let r = projective_add(&mut ar, e.a, e.b, &f, lift(&p, s1), lift(&q, s2));
            match e.add(&p, &q, &f) {
                Point::Infinity => assert!(r[2].is_zero() && !r[1].is_zero()),
                s => assert_eq!(projective_to_affine(r, &f), Some(s)),
            }
        }
    }

    #[test]
    fn transport_round_trip_and_involution() {
        let (f, e, mut rng) = small();
        let t = CurveTransform::identity(&f);
        let p = e.random_point(&f, &mut rng);
        assert_eq!(t.transport(&p, &f).unwrap(), p.coords().unwrap());
        let t = CurveTransform::random_avoiding(true, &[], &f, &mut rng);
        let mut done = 0;
        while done < 100 {
            let p = e.random_point(&f, &mut rng);
            if let Ok(v) = t.transport(&p, &f) {
                assert_eq!(t.transport_inv(v, &f).unwrap(), p);
                done += 1;
            }
        }
        assert_eq!(t.transport(&Point::Infinity, &f), Err(Error::ExceptionalPoint));
        assert_eq!(t.from_local(t.to_local(&Point::Infinity, &f).unwrap(), &f).unwrap(), Point::Infinity);
    }

    #[test]
    fn search_exhaustion_under_hasse_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(find_desk_params(5, 7, 1, 0, &mut rng), Err(Error::SearchExhausted { .. })));
    }

    #[test]
    fn torsion_basis_orders() {
        let (f, e, mut rng) = small();
        assert_eq!(e.order % 25, 0);
        let (p1, p2) = e.torsion_basis(&f, &mut rng);
        for p in [p1, p2] {
            assert_eq!(e.scalar_mul(5, &p, &f), Point::Infinity);
            for m in 1..5 {
                assert_ne!(e.scalar_mul(m, &p, &f), Point::Infinity);
            }
        }
    }
}
