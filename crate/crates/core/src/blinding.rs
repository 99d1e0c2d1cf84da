//! Local quadratic isomorphisms, the blinding space `W` and the basic blinding
//! map `rho: W -> K^{2n}` with its inverse `lift`.
//!
//! `lambda_i = B_i o lambda_{p,q} o A_i` with
//! `lambda_{p,q}(x, y, z) = (x, y + p(x), z + q(x, y))`, and
//! `F_ij = f_ij o delta_i` where `f_ij` are the components of `lambda_i` and
//! `delta_i` is the `i`-th block of three rows of `delta`. `W` is cut out by
//! `F_i2 = F_i3`; on `W`, `rho_i = tau_{a_i,b_i}(F_i1, F_i2)`.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::field::{Fe, Field};
use crate::linalg::Matrix;
use crate::poly::{AmbivalenceIdeal, MultiPoly};
use crate::{Error, Result};

/// `B o lambda_{p,q} o A`, with `p` univariate and `q2` bivariate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalQuadIso {
    pub a: Matrix,
    pub b: Matrix,
    /// Polynomial in one variable.
    pub p: MultiPoly,
    /// Polynomial in two variables.
    pub q2: MultiPoly,
}

impl LocalQuadIso {
    /// Random invertible `A`, `B` and quadratics `p`, `q2` of exact degree two.
    pub fn random<R: Rng + ?Sized>(f: &Field, rng: &mut R) -> LocalQuadIso {
        let (a, _) = Matrix::random_invertible(3, f, rng);
        let (b, _) = Matrix::random_invertible(3, f, rng);
        let p = MultiPoly::from_terms(
            1,
            [(vec![0], f.random(rng)), (vec![1], f.random(rng)), (vec![2], f.random_nonzero(rng))],
            f,
        );
        let mut terms = vec![(vec![2, 0], f.random_nonzero(rng))];
        for e in [[1, 1], [0, 2], [1, 0], [0, 1], [0, 0]] {
            terms.push((e.to_vec(), f.random(rng)));
        }
        let q2 = MultiPoly::from_terms(2, terms, f);
        LocalQuadIso { a, b, p, q2 }
    }

    /// `A = B = I`, `p = q = 0`.
    pub fn identity() -> LocalQuadIso {
        LocalQuadIso { a: Matrix::identity(3), b: Matrix::identity(3), p: MultiPoly::zero(1), q2: MultiPoly::zero(2) }
    }

    /// Components of `lambda` as polynomials in `(x, y, z)`.
    pub fn forward_polys(&self, f: &Field) -> [MultiPoly; 3] {
        let a = self.a.linear_forms();
        let x = a[0].clone();
        let y = a[1].add(&self.p.compose(&[a[0].clone()], f), f);
        let z = a[2].add(&self.q2.compose(&[a[0].clone(), a[1].clone()], f), f);
        let mid = [x, y, z];
        let b = self.b.linear_forms();
        [b[0].compose(&mid, f), b[1].compose(&mid, f), b[2].compose(&mid, f)]
    }

    /// Components of `mu = lambda^{-1}` as polynomials in `(x, y, z)`:
    /// `A^{-1}(X, Y - p(X), Z - q(X, Y - p(X)))` with `(X, Y, Z) = B^{-1}(x, y, z)`.
    pub fn inverse_polys(&self, f: &Field) -> [MultiPoly; 3] {
        let binv = self.b.inverse(f).expect("B invertible").linear_forms();
        let ainv = self.a.inverse(f).expect("A invertible").linear_forms();
        let x = binv[0].clone();
        let y = binv[1].sub(&self.p.compose(&[x.clone()], f), f);
        let z = binv[2].sub(&self.q2.compose(&[x.clone(), y.clone()], f), f);
        let mid = [x, y, z];
        [ainv[0].compose(&mid, f), ainv[1].compose(&mid, f), ainv[2].compose(&mid, f)]
    }

    pub fn apply(&self, v: [Fe; 3], f: &Field) -> [Fe; 3] {
        let u = self.a.apply(&v, f);
        let y = f.add(u[1], self.p.evaluate(&[u[0]], f));
        let z = f.add(u[2], self.q2.evaluate(&[u[0], u[1]], f));
        let r = self.b.apply(&[u[0], y, z], f);
        [r[0], r[1], r[2]]
    }

    pub fn apply_inverse(&self, v: [Fe; 3], f: &Field) -> [Fe; 3] {
        let u = self.b.inverse(f).expect("B invertible").apply(&v, f);
        let y = f.sub(u[1], self.p.evaluate(&[u[0]], f));
        let z = f.sub(u[2], self.q2.evaluate(&[u[0], y], f));
        let r = self.a.inverse(f).expect("A invertible").apply(&[u[0], y, z], f);
        [r[0], r[1], r[2]]
    }
}

/// Secret blinding parameters and the derived polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindingKey {
    n: usize,
    delta: Matrix,
    delta_inv: Matrix,
    lambdas: Vec<LocalQuadIso>,
    twists: Vec<(usize, usize)>,
    /// `big_f[i][j] = F_{i,j+1}`, quadratics in `3n` variables.
    big_f: Vec<[MultiPoly; 3]>,
    /// `mu_tilde[i]`: `mu_i(x, y, y)` as three polynomials in two variables.
    mu_tilde: Vec<[MultiPoly; 3]>,
    /// Inverses of the `A_i`, `B_i`, cached for numeric `mu`.
    a_inv: Vec<Matrix>,
    b_inv: Vec<Matrix>,
}

impl BlindingKey {
    /// Builds a key from its parameters and derives `F_ij` and `mu_tilde_i`.
    pub fn from_parts(
        f: &Field,
        delta: Matrix,
        lambdas: Vec<LocalQuadIso>,
        twists: Vec<(usize, usize)>,
    ) -> Result<BlindingKey> {
        let n = lambdas.len();
        if n == 0 || delta.rows() != 3 * n || delta.cols() != 3 * n || twists.len() != n {
            return Err(Error::InvalidInput("blinding key dimensions".into()));
        }
        if twists.iter().any(|&(a, b)| a >= f.d() || b >= f.d()) {
            return Err(Error::InvalidInput("twist exponents must lie in [0, d)".into()));
        }
        let delta_inv = delta.inverse(f).ok_or(Error::Singular)?;
        let mut a_inv = Vec::with_capacity(n);
        let mut b_inv = Vec::with_capacity(n);
        for l in &lambdas {
            a_inv.push(l.a.inverse(f).ok_or(Error::Singular)?);
            b_inv.push(l.b.inverse(f).ok_or(Error::Singular)?);
        }
        let rows = delta.linear_forms();
        let big_f = lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let block = &rows[3 * i..3 * i + 3];
                let fwd = l.forward_polys(f);
                [fwd[0].compose(block, f), fwd[1].compose(block, f), fwd[2].compose(block, f)]
            })
            .collect();
        let diag = [MultiPoly::var(2, 0), MultiPoly::var(2, 1), MultiPoly::var(2, 1)];
        let mu_tilde = lambdas
            .iter()
            .map(|l| {
                let inv = l.inverse_polys(f);
                [inv[0].compose(&diag, f), inv[1].compose(&diag, f), inv[2].compose(&diag, f)]
            })
            .collect();
        Ok(BlindingKey { n, delta, delta_inv, lambdas, twists, big_f, mu_tilde, a_inv, b_inv })
    }

    /// Random key. Twist exponents are uniform in `[0, d)` when `twisted`.
    pub fn keygen<R: Rng + ?Sized>(n: usize, f: &Field, twisted: bool, rng: &mut R) -> Result<BlindingKey> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        let (delta, _) = Matrix::random_invertible(3 * n, f, rng);
        let lambdas = (0..n).map(|_| LocalQuadIso::random(f, rng)).collect();
        let twists = (0..n)
            .map(|_| if twisted { (rng.gen_range(0..f.d()), rng.gen_range(0..f.d())) } else { (0, 0) })
            .collect();
        BlindingKey::from_parts(f, delta, lambdas, twists)
    }

    /// `A = B = delta = I`, `p = q = 0`: `rho` is `(x, y, z) -> (x, y)` per block.
    pub fn identity(n: usize, f: &Field) -> BlindingKey {
        let lambdas = (0..n).map(|_| LocalQuadIso::identity()).collect();
        BlindingKey::from_parts(f, Matrix::identity(3 * n), lambdas, vec![(0, 0); n]).expect("identity key")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> &Matrix {
        &self.delta
    }

    pub fn delta_inv(&self) -> &Matrix {
        &self.delta_inv
    }

    pub fn lambdas(&self) -> &[LocalQuadIso] {
        &self.lambdas
    }

    pub fn twists(&self) -> &[(usize, usize)] {
        &self.twists
    }

    pub fn is_twisted(&self) -> bool {
        self.twists.iter().any(|&t| t != (0, 0))
    }

    /// `F_{i,j+1}` for block `i`, `j` in `0..3`.
    pub fn big_f(&self, i: usize) -> &[MultiPoly; 3] {
        &self.big_f[i]
    }

    pub fn mu_tilde(&self, i: usize) -> &[MultiPoly; 3] {
        &self.mu_tilde[i]
    }

    /// Generators `F_i2 - F_i3`.
    pub fn ideal(&self, f: &Field) -> AmbivalenceIdeal {
        AmbivalenceIdeal::new(self.big_f.iter().map(|fi| fi[1].sub(&fi[2], f)).collect())
    }

    pub fn is_on_w(&self, w: &[Fe], f: &Field) -> bool {
        w.len() == 3 * self.n && self.big_f.iter().all(|fi| fi[1].evaluate(w, f) == fi[2].evaluate(w, f))
    }

    /// `rho_i(w) = tau_{a_i,b_i}(F_i1(w), F_i2(w))`; rejects points off `W`.
    pub fn rho(&self, w: &[Fe], f: &Field) -> Result<Vec<(Fe, Fe)>> {
        if !self.is_on_w(w, f) {
            return Err(Error::OffVariety);
        }
        Ok(self.rho_unchecked(w, f))
    }

    /// `rho` without the membership test; meaningful only on `W`.
    pub fn rho_unchecked(&self, w: &[Fe], f: &Field) -> Vec<(Fe, Fe)> {
        self.big_f
            .iter()
            .zip(&self.twists)
            .map(|(fi, &(a, b))| (f.frobenius(fi[0].evaluate(w, f), a), f.frobenius(fi[1].evaluate(w, f), b)))
            .collect()
    }

    /// `mu_i(x, y, y)` evaluated numerically.
    pub fn mu_tilde_apply(&self, i: usize, x: Fe, y: Fe, f: &Field) -> [Fe; 3] {
        let l = &self.lambdas[i];
        let u = self.b_inv[i].apply(&[x, y, y], f);
        let y2 = f.sub(u[1], l.p.evaluate(&[u[0]], f));
        let z2 = f.sub(u[2], l.q2.evaluate(&[u[0], y2], f));
        let r = self.a_inv[i].apply(&[u[0], y2, z2], f);
        [r[0], r[1], r[2]]
    }

    /// `delta^{-1}(mu_tilde_i(tau_{a_i,b_i}^{-1}(v_i)))_i`; the unique `W`-point over `v`.
    pub fn lift(&self, v: &[(Fe, Fe)], f: &Field) -> Vec<Fe> {
        assert_eq!(v.len(), self.n, "lift expects n points");
        let d = f.d();
        let mut u = Vec::with_capacity(3 * self.n);
        for (i, (&(x, y), &(a, b))) in v.iter().zip(&self.twists).enumerate() {
            let (x, y) = (f.frobenius(x, (d - a) % d), f.frobenius(y, (d - b) % d));
            u.extend_from_slice(&self.mu_tilde_apply(i, x, y, f));
        }
        self.delta_inv.apply(&u, f)
    }

    /// Uniform `W`-point together with its image under `rho`.
    pub fn sample_w<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R) -> (Vec<(Fe, Fe)>, Vec<Fe>) {
        let v: Vec<(Fe, Fe)> = (0..self.n).map(|_| (f.random(rng), f.random(rng))).collect();
        let w = self.lift(&v, f);
        (v, w)
    }

    /// Replaces `B_i` by `D_alpha B_i`, `D_alpha = [[1, a, -a], [0, 1, 0], [0, 0, 1]]`.
    /// `W` and `rho` are unchanged.
    pub fn d_alpha_variant(&self, i: usize, alpha: Fe, f: &Field) -> Result<BlindingKey> {
        if i >= self.n {
            return Err(Error::InvalidInput("block index out of range".into()));
        }
        let d = Matrix::from_rows(vec![
            vec![f.one(), alpha, f.neg(alpha)],
            vec![f.zero(), f.one(), f.zero()],
            vec![f.zero(), f.zero(), f.one()],
        ]);
        let mut lambdas = self.lambdas.clone();
        lambdas[i].b = d.mul(&lambdas[i].b, f);
        BlindingKey::from_parts(f, self.delta.clone(), lambdas, self.twists.clone())
    }

    /// `count` tuples `H_ij = F_ij + sum_k c_ijk (F_k2 - F_k3)` with random `c_ijk`.
    pub fn ambivalent_representatives<R: Rng + ?Sized>(
        &self,
        count: usize,
        f: &Field,
        rng: &mut R,
    ) -> Result<Vec<Vec<[MultiPoly; 3]>>> {
        if self.is_twisted() {
            return Err(Error::InvalidInput("ambivalent representatives need a basic key".into()));
        }
        let gens = self.ideal(f).generators;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let coeffs: Vec<Vec<Vec<Fe>>> =
                (0..self.n).map(|_| (0..3).map(|_| (0..self.n).map(|_| f.random(rng)).collect()).collect()).collect();
            out.push(self.representative(&coeffs, &gens, f));
        }
        Ok(out)
    }

    /// `H_ij = F_ij + sum_k coeffs[i][j][k] (F_k2 - F_k3)`.
    pub fn representative(&self, coeffs: &[Vec<Vec<Fe>>], gens: &[MultiPoly], f: &Field) -> Vec<[MultiPoly; 3]> {
        (0..self.n)
            .map(|i| {
                let h = |j: usize| {
                    gens.iter().zip(&coeffs[i][j]).fold(self.big_f[i][j].clone(), |acc, (g, &c)| acc.add(&g.scale(c, f), f))
                };
                [h(0), h(1), h(2)]
            })
            .collect()
    }
}

/// `rho` computed from an alternative tuple `H_ij` (basic keys only).
pub fn rho_from(reps: &[[MultiPoly; 3]], w: &[Fe], f: &Field) -> Vec<(Fe, Fe)> {
    reps.iter().map(|h| (h[0].evaluate(w, f), h[1].evaluate(w, f))).collect()
}
