//! Miller functions with the squaring trick, the Weil pairing on `E[ell]`,
//! and the blinded pairing driven by abstract Miller steps.
//!
//! Line conventions: the line through `P1`, `P2` is `y - lambda x - nu`, and the
//! chord (tangent) function is that line divided by the vertical `x - x3` at
//! `P1 + P2` (`2 P1`). `f_P` has divisor `ell (P) - ell (O)` and is monic at `O`.

use alloc::vec::Vec;

use crate::curve::{Curve, Point};
use crate::field::{Fe, Field};
use crate::poly::{Arith, FieldArith};
use crate::{Error, Result};

/// Tangent at projective `P` over the vertical at `2P`, at projective `Q`,
/// as `(numerator, denominator)`.
pub fn tangent_fraction<A: Arith>(ar: &mut A, a: Fe, p: [A::V; 3], q: [A::V; 3]) -> (A::V, A::V) {
    let [x1, y1, z1] = p;
    let [xq, _, zq] = q;
    let ca = ar.constant(a);
    let x1sq = ar.mul(x1, x1);
    let z1sq = ar.mul(z1, z1);
    let t = ar.add(x1sq, x1sq);
    let t = ar.add(t, x1sq);
    let az = ar.mul(ca, z1sq);
    let ln = ar.add(t, az);
    let yz = ar.mul(y1, z1);
    let ld = ar.add(yz, yz);
    let (dx, dy) = offsets(ar, p, q);
    // numL = (Yq Z1 - Y1 Zq) Ld - Ln (Xq Z1 - X1 Zq)
    let l1 = ar.mul(dy, ld);
    let l2 = ar.mul(ln, dx);
    let num_l = ar.sub(l1, l2);
    // numV = Xq Ld^2 Z1 - Zq (Ln^2 Z1 - 2 X1 Ld^2)
    let ld2 = ar.mul(ld, ld);
    let ln2 = ar.mul(ln, ln);
    let xq_ld2 = ar.mul(xq, ld2);
    let v1 = ar.mul(xq_ld2, z1);
    let ln2z1 = ar.mul(ln2, z1);
    let x1ld2 = ar.mul(x1, ld2);
    let two_x1ld2 = ar.add(x1ld2, x1ld2);
    let inner = ar.sub(ln2z1, two_x1ld2);
    let v2 = ar.mul(zq, inner);
    let num_v = ar.sub(v1, v2);
    (ar.mul(num_l, ld), num_v)
}

/// Chord through projective `P1`, `P2` over the vertical at `P1 + P2`, at `Q`.
pub fn chord_fraction<A: Arith>(ar: &mut A, p1: [A::V; 3], p2: [A::V; 3], q: [A::V; 3]) -> (A::V, A::V) {
    let [x1, y1, z1] = p1;
    let [x2, y2, z2] = p2;
    let [xq, _, zq] = q;
    let a = ar.mul(y2, z1);
    let b = ar.mul(y1, z2);
    let en = ar.sub(a, b);
    let a = ar.mul(x2, z1);
    let b = ar.mul(x1, z2);
    let dn = ar.sub(a, b);
    let sx = ar.add(a, b);
    let (dx, dy) = offsets(ar, p1, q);
    // numL = (Yq Z1 - Y1 Zq) Dn - En (Xq Z1 - X1 Zq)
    let l1 = ar.mul(dy, dn);
    let l2 = ar.mul(en, dx);
    let num_l = ar.sub(l1, l2);
    // numV = Xq Dn^2 Z1 Z2 - Zq (En^2 Z1 Z2 - (X1 Z2 + X2 Z1) Dn^2)
    let z12 = ar.mul(z1, z2);
    let dn2 = ar.mul(dn, dn);
    let en2 = ar.mul(en, en);
    let t = ar.mul(xq, dn2);
    let v1 = ar.mul(t, z12);
    let t = ar.mul(en2, z12);
    let u = ar.mul(sx, dn2);
    let inner = ar.sub(t, u);
    let v2 = ar.mul(zq, inner);
    let num_v = ar.sub(v1, v2);
    let t = ar.mul(num_l, dn);
    (ar.mul(t, z2), num_v)
}

/// `(Xq Z1 - X1 Zq, Yq Z1 - Y1 Zq)`.
fn offsets<A: Arith>(ar: &mut A, p: [A::V; 3], q: [A::V; 3]) -> (A::V, A::V) {
    let [x1, y1, z1] = p;
    let [xq, yq, zq] = q;
    let a = ar.mul(xq, z1);
    let b = ar.mul(x1, zq);
    let dx = ar.sub(a, b);
    let a = ar.mul(yq, z1);
    let b = ar.mul(y1, zq);
    (dx, ar.sub(a, b))
}

fn affine3(p: &Point, f: &Field) -> Result<[Fe; 3]> {
    let (x, y) = p.coords().ok_or(Error::ExceptionalPoint)?;
    Ok([x, y, f.one()])
}

fn ratio(num: Fe, den: Fe, step: usize, f: &Field) -> Result<Fe> {
    f.div(num, den).ok_or(Error::PoleHit { step })
}

/// Chord function `g_{P1,P2}` at `Q`; requires `x1 != x2`.
pub fn line_g(_e: &Curve, p1: &Point, p2: &Point, q: &Point, f: &Field) -> Result<Fe> {
    let (a, b, c) = (affine3(p1, f)?, affine3(p2, f)?, affine3(q, f)?);
    if a[0] == b[0] {
        return Err(Error::InvalidInput("chord needs distinct x-coordinates".into()));
    }
    let (n, d) = chord_fraction(&mut FieldArith(f), a, b, c);
    ratio(n, d, 0, f)
}

/// Tangent function `h_P` at `Q`; requires `y1 != 0`.
pub fn line_h(e: &Curve, p: &Point, q: &Point, f: &Field) -> Result<Fe> {
    let (a, c) = (affine3(p, f)?, affine3(q, f)?);
    if a[1].is_zero() {
        return Err(Error::InvalidInput("tangent at a two-torsion point".into()));
    }
    let (n, d) = tangent_fraction(&mut FieldArith(f), e.a, a, c);
    ratio(n, d, 0, f)
}

/// One Miller run: point arithmetic on the chain and line values at a fixed
/// second argument.
pub trait MillerSteps {
    type Pt: Clone;
    fn double(&mut self, p: &Self::Pt) -> Result<Self::Pt>;
    fn add(&mut self, p1: &Self::Pt, p2: &Self::Pt) -> Result<Self::Pt>;
    /// Tangent-over-vertical at `p`.
    fn tangent(&mut self, p: &Self::Pt) -> Result<Fe>;
    /// Chord-over-vertical through `p1`, `p2`.
    fn chord(&mut self, p1: &Self::Pt, p2: &Self::Pt) -> Result<Fe>;
    fn field(&self) -> &Field;
}

/// `f_P` without its final vertical `x - x_P`, for odd `ell`, by the squaring
/// trick `H_{t+1} = H_t^2 h_{2^t P}` and chords over the set bits of `ell`
/// from the top down. The last chord joins `-P` and `P`; it is the vertical
/// and is omitted.
pub fn reduced_miller<S: MillerSteps>(ell: u64, p: &S::Pt, steps: &mut S) -> Result<Fe> {
    if ell < 3 || ell % 2 == 0 {
        return Err(Error::InvalidInput("reduced Miller loop needs odd ell".into()));
    }
    let top = 63 - ell.leading_zeros() as usize;
    let mut chain: Vec<S::Pt> = Vec::with_capacity(top + 1);
    let mut h: Vec<Fe> = Vec::with_capacity(top + 1);
    chain.push(p.clone());
    h.push(Fe::ONE);
    for t in 0..top {
        let ht = steps.tangent(&chain[t])?;
        let f = steps.field();
        let next = f.mul(f.square(h[t]), ht);
        if next.is_zero() {
            return Err(Error::PoleHit { step: t });
        }
        h.push(next);
        let d = steps.double(&chain[t])?;
        chain.push(d);
    }
    let mut acc = h[top];
    let mut s = chain[top].clone();
    let bits: Vec<usize> = (0..top).rev().filter(|&i| (ell >> i) & 1 == 1).collect();
    for (k, &i) in bits.iter().enumerate() {
        let f = steps.field();
        acc = f.mul(acc, h[i]);
        if k + 1 < bits.len() {
            let g = steps.chord(&s, &chain[i])?;
            let f = steps.field();
            acc = f.mul(acc, g);
            if acc.is_zero() {
                return Err(Error::PoleHit { step: top + k });
            }
            s = steps.add(&s, &chain[i])?;
        }
    }
    Ok(acc)
}

/// Affine Miller steps on `E` evaluated at a fixed point.
pub struct AffineSteps<'a> {
    pub curve: &'a Curve,
    pub field: &'a Field,
    pub at: [Fe; 3],
}

impl MillerSteps for AffineSteps<'_> {
    type Pt = Point;
    fn double(&mut self, p: &Point) -> Result<Point> {
        Ok(self.curve.double(p, self.field))
    }
    fn add(&mut self, p1: &Point, p2: &Point) -> Result<Point> {
        Ok(self.curve.add(p1, p2, self.field))
    }
    fn tangent(&mut self, p: &Point) -> Result<Fe> {
        let (n, d) = tangent_fraction(&mut FieldArith(self.field), self.curve.a, affine3(p, self.field)?, self.at);
        ratio(n, d, 0, self.field)
    }
    fn chord(&mut self, p1: &Point, p2: &Point) -> Result<Fe> {
        let (a, b) = (affine3(p1, self.field)?, affine3(p2, self.field)?);
        let (n, d) = chord_fraction(&mut FieldArith(self.field), a, b, self.at);
        ratio(n, d, 0, self.field)
    }
    fn field(&self) -> &Field {
        self.field
    }
}

/// `f_P(Q)` by the squaring trick; `ell = 2` uses `f_P = x - x_P`.
pub fn miller_f(e: &Curve, p: &Point, q: &Point, f: &Field) -> Result<Fe> {
    let (xp, _) = p.coords().ok_or(Error::ExceptionalPoint)?;
    let at = affine3(q, f)?;
    let vertical = f.sub(at[0], xp);
    if e.ell == 2 {
        return Ok(vertical);
    }
    let mut steps = AffineSteps { curve: e, field: f, at };
    let reduced = reduced_miller(e.ell, p, &mut steps)?;
    Ok(f.mul(reduced, vertical))
}

/// `f_P(Q)` by `ell - 1` successive additions of `P`, with affine slopes.
pub fn naive_miller(e: &Curve, p: &Point, q: &Point, f: &Field) -> Result<Fe> {
    let (xp, yp) = p.coords().ok_or(Error::ExceptionalPoint)?;
    let (xq, yq) = q.coords().ok_or(Error::ExceptionalPoint)?;
    let mut acc = f.one();
    let mut s = *p;
    for i in 1..e.ell {
        let (xs, ys) = s.coords().ok_or(Error::ExceptionalPoint)?;
        let next = e.add(&s, p, f);
        let Point::Affine(x3, _) = next else {
            // s = -P: the line through s and P is the vertical x - x_P
            acc = f.mul(acc, f.sub(xq, xp));
            break;
        };
        let lambda = if xs != xp {
            f.div(f.sub(ys, yp), f.sub(xs, xp)).expect("distinct x")
        } else {
            f.div(f.add(f.mul(f.from_int(3), f.square(xs)), e.a), f.add(ys, ys)).ok_or(Error::ExceptionalPoint)?
        };
        let nu = f.sub(ys, f.mul(lambda, xs));
        let line = f.sub(f.sub(yq, f.mul(lambda, xq)), nu);
        let vert = f.sub(xq, x3);
        acc = f.mul(acc, f.div(line, vert).ok_or(Error::PoleHit { step: i as usize })?);
        s = next;
    }
    Ok(acc)
}

/// Maximum number of auxiliary shifts tried by [`weil`].
pub const WEIL_SHIFTS: usize = 16;

/// `e(P, Q) = (-1)^ell f_P(Q) / f_Q(P)`, falling back to
/// `f_P(Q + S) / f_P(S) * f_Q(-S) / f_Q(P - S)` when the direct form hits a pole.
pub fn weil(e: &Curve, p: &Point, q: &Point, f: &Field) -> Result<Fe> {
    if p.is_infinity() || q.is_infinity() {
        return Ok(f.one());
    }
    if let Ok(v) = weil_direct(e, p, q, f) {
        return Ok(v);
    }
    let mut tried = 0;
    for x in f.elements().skip(1) {
        if tried == WEIL_SHIFTS {
            break;
        }
        let rhs = f.add(f.mul(x, f.add(f.square(x), e.a)), e.b);
        let Some(y) = f.sqrt(rhs) else { continue };
        tried += 1;
        let s = Point::Affine(x, y);
        if let Ok(v) = weil_shifted(e, p, q, &s, f) {
            return Ok(v);
        }
    }
    Err(Error::DegeneratePair)
}

fn nonzero(v: Fe) -> Result<Fe> {
    if v.is_zero() {
        Err(Error::PoleHit { step: 0 })
    } else {
        Ok(v)
    }
}

fn weil_direct(e: &Curve, p: &Point, q: &Point, f: &Field) -> Result<Fe> {
    let num = nonzero(miller_f(e, p, q, f)?)?;
    let den = nonzero(miller_f(e, q, p, f)?)?;
    let v = f.div(num, den).expect("nonzero");
    Ok(if e.ell % 2 == 1 { f.neg(v) } else { v })
}

fn weil_shifted(e: &Curve, p: &Point, q: &Point, s: &Point, f: &Field) -> Result<Fe> {
    let qs = e.add(q, s, f);
    let ms = e.neg(s, f);
    let ps = e.add(p, &ms, f);
    let a = nonzero(miller_f(e, p, &qs, f)?)?;
    let b = nonzero(miller_f(e, p, s, f)?)?;
    let c = nonzero(miller_f(e, q, &ms, f)?)?;
    let d = nonzero(miller_f(e, q, &ps, f)?)?;
    Ok(f.div(f.mul(a, c), f.mul(b, d)).expect("nonzero"))
}

/// `prod_j f'_{x_j}(y_j) / prod_j f'_{y_j}(x_j)` from two Miller runs, one along
/// the chain of `x` evaluated at `y` and one the other way round. For odd `ell`
/// the dropped verticals and the sign `(-1)^ell` cancel.
pub fn blinded_pair<S: MillerSteps, T: MillerSteps>(
    ell: u64,
    x: &S::Pt,
    x_at_y: &mut S,
    y: &T::Pt,
    y_at_x: &mut T,
) -> Result<Fe> {
    let num = reduced_miller(ell, x, x_at_y)?;
    let den = reduced_miller(ell, y, y_at_x)?;
    let f = x_at_y.field();
    f.div(num, den).ok_or(Error::PoleHit { step: usize::MAX })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::find_desk_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shifted_and_direct_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (f, e) = find_desk_params(5, 200, 3, 0, &mut rng).unwrap();
        let mut agreed = 0;
        for _ in 0..40 {
            let p = e.torsion_point(&f, &mut rng);
            let q = e.torsion_point(&f, &mut rng);
            let s = e.random_point(&f, &mut rng);
            if let (Ok(a), Ok(b)) = (weil_direct(&e, &p, &q, &f), weil_shifted(&e, &p, &q, &s, &f)) {
                assert_eq!(a, b);
                agreed += 1;
            }
        }
        assert!(agreed > 10);
    }

    #[test]
    fn tangent_divisor_zero_and_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (f, e) = find_desk_params(5, 200, 3, 0, &mut rng).unwrap();
        let p = e.torsion_point(&f, &mut rng);
        // div h_P = 2(P) - (2P) - (O)
        assert_eq!(line_h(&e, &p, &p, &f).unwrap(), f.zero());
        assert!(matches!(line_h(&e, &p, &e.double(&p, &f), &f), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn squaring_trick_matches_naive_and_is_bilinear() {
        for ell in [5u64, 7] {
            let mut rng = ChaCha8Rng::seed_from_u64(ell);
            let (f, e) = find_desk_params(ell, 400, 3, 0, &mut rng).unwrap();
            let mut compared = 0;
            while compared < 50 {
                let p = e.torsion_point(&f, &mut rng);
                let q = e.random_point(&f, &mut rng);
                if let (Ok(a), Ok(b)) = (miller_f(&e, &p, &q, &f), naive_miller(&e, &p, &q, &f)) {
                    assert_eq!(a, b);
                    compared += 1;
                }
            }
            let (p, q) = e.torsion_basis(&f, &mut rng);
            let z = weil(&e, &p, &q, &f).unwrap();
            assert_ne!(z, f.one());
            assert_eq!(f.pow(z, ell), f.one());
            for a in 0..ell {
                for b in 0..ell {
                    let v = weil(&e, &e.scalar_mul(a, &p, &f), &e.scalar_mul(b, &q, &f), &f).unwrap();
                    assert_eq!(v, f.pow(z, a * b));
                }
            }
            assert_eq!(weil(&e, &p, &p, &f).unwrap(), f.one());
        }
    }
}
