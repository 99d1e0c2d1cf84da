//! Arithmetic in `k = F_q` and `K = F_{q^d}`.
//!
//! Elements are stored packed: the power-basis coordinates `c_0 + c_1 x + ...`
//! are the base-`q` digits of a single `u64`. A published basis `theta` of
//! `K/k` is kept alongside and used only for descent coordinates and
//! serialization.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::{Error, Result};

/// Element of `K` as packed power-basis digits. Always reduced below `q^d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    /// The packed encoding of 1 is the same in every field.
    pub const ONE: Fe = Fe(1);

    /// Packed integer encoding; `raw() < q^d`.
    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Unchecked packed value; only for data that a `Field` validates next.
    pub fn from_packed(raw: u64) -> Fe {
        Fe(raw)
    }
}

/// Fields up to this order get log/exp tables.
const TABLE_LIMIT: u64 = 1 << 21;

#[derive(Clone, Debug)]
struct Tables {
    /// `exp[i] = g^i`, doubled in length so sums of two logs need no reduction.
    exp: Vec<u32>,
    /// `log[x]` for `x != 0`; `log[0]` is unused.
    log: Vec<u32>,
}

/// Field parameters: `q`, `d`, the defining modulus and the published basis.
#[derive(Clone, Debug)]
pub struct Field {
    q: u64,
    d: usize,
    order: u64,
    modulus: Vec<u64>,
    theta: Vec<Fe>,
    theta_inv: Vec<Vec<u64>>,
    tables: Option<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.d == other.d && self.modulus == other.modulus && self.theta == other.theta
    }
}
impl Eq for Field {}

pub type FieldParams = Field;

impl Field {
    /// Random irreducible modulus and random basis `theta`. For `d = 1` the
    /// modulus is `x` and `theta = (1)`.
    pub fn setup<R: Rng + ?Sized>(q: u64, d: usize, rng: &mut R) -> Result<Field> {
        check_params(q, d)?;
        let modulus = if d == 1 {
            vec![0, 1]
        } else {
            loop {
                let mut m: Vec<u64> = (0..d).map(|_| rng.gen_range(0..q)).collect();
                m.push(1);
                if m[0] != 0 && is_irreducible(&m, q) {
                    break m;
                }
            }
        };
        let mut field = Field::bare(q, d, modulus);
        let theta = if d == 1 {
            vec![Fe(1)]
        } else {
            loop {
                let t: Vec<Fe> = (0..d).map(|_| field.random(rng)).collect();
                if field.basis_inverse(&t).is_some() {
                    break t;
                }
            }
        };
        field.set_theta(theta)?;
        Ok(field)
    }

    /// Rebuilds a field from serialized parts, re-checking every invariant.
    pub fn from_parts(q: u64, d: usize, modulus: Vec<u64>, theta: Vec<Fe>) -> Result<Field> {
        check_params(q, d)?;
        if modulus.len() != d + 1 || modulus[d] != 1 || modulus.iter().any(|&c| c >= q) {
            return Err(Error::InvalidInput("modulus must be monic of degree d".into()));
        }
        if d > 1 && !is_irreducible(&modulus, q) {
            return Err(Error::InvalidInput("modulus is reducible".into()));
        }
        if d == 1 && modulus != [0, 1] {
            return Err(Error::InvalidInput("degree-1 modulus must be x".into()));
        }
        let mut field = Field::bare(q, d, modulus);
        if theta.len() != d || theta.iter().any(|t| t.0 >= field.order) {
            return Err(Error::InvalidInput("theta must hold d field elements".into()));
        }
        field.set_theta(theta)?;
        Ok(field)
    }

    fn bare(q: u64, d: usize, modulus: Vec<u64>) -> Field {
        let order = q.pow(d as u32);
        let mut field = Field { q, d, order, modulus, theta: Vec::new(), theta_inv: Vec::new(), tables: None };
        if order <= TABLE_LIMIT && order > 2 {
            field.tables = Some(field.build_tables());
        }
        field
    }

    fn set_theta(&mut self, theta: Vec<Fe>) -> Result<()> {
        let inv = self.basis_inverse(&theta).ok_or(Error::Singular)?;
        self.theta = theta;
        self.theta_inv = inv;
        Ok(())
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn d(&self) -> usize {
        self.d
    }
    /// `|K| = q^d`.
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn theta(&self) -> &[Fe] {
        &self.theta
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }
    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, v: i64) -> Fe {
        Fe(v.rem_euclid(self.q as i64) as u64)
    }

    /// Element from packed encoding; `None` if out of range.
    pub fn from_raw(&self, raw: u64) -> Option<Fe> {
        (raw < self.order).then_some(Fe(raw))
    }

    /// Power-basis coordinates, constant term first.
    pub fn coords(&self, x: Fe) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.d);
        let mut r = x.0;
        for _ in 0..self.d {
            v.push(r % self.q);
            r /= self.q;
        }
        v
    }

    pub fn from_coords(&self, c: &[u64]) -> Fe {
        let mut r = 0u64;
        for &ci in c.iter().rev() {
            r = r * self.q + ci % self.q;
        }
        Fe(r)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.d == 1 {
            let s = a.0 as u128 + b.0 as u128;
            return Fe(if s >= self.q as u128 { (s - self.q as u128) as u64 } else { s as u64 });
        }
        let (mut x, mut y, mut r, mut pw) = (a.0, b.0, 0u64, 1u64);
        for _ in 0..self.d {
            let s = x % self.q + y % self.q;
            r += (if s >= self.q { s - self.q } else { s }) * pw;
            x /= self.q;
            y /= self.q;
            pw = pw.wrapping_mul(self.q);
        }
        Fe(r)
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if self.d == 1 {
            return Fe(if a.0 == 0 { 0 } else { self.q - a.0 });
        }
        let (mut x, mut r, mut pw) = (a.0, 0u64, 1u64);
        for _ in 0..self.d {
            let c = x % self.q;
            r += (if c == 0 { 0 } else { self.q - c }) * pw;
            x /= self.q;
            pw = pw.wrapping_mul(self.q);
        }
        Fe(r)
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        if self.d == 1 {
            return Fe(if a.0 >= b.0 { a.0 - b.0 } else { self.q - (b.0 - a.0) });
        }
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if self.d == 1 {
            return Fe(((a.0 as u128 * b.0 as u128) % self.q as u128) as u64);
        }
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        match &self.tables {
            Some(t) => Fe(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize] as u64),
            None => self.mul_slow(a, b),
        }
    }

    /// Schoolbook product modulo the modulus; independent of the tables.
    pub fn mul_slow(&self, a: Fe, b: Fe) -> Fe {
        if self.d == 1 {
            return Fe(((a.0 as u128 * b.0 as u128) % self.q as u128) as u64);
        }
        let (x, y) = (self.coords(a), self.coords(b));
        let q = self.q as u128;
        let mut prod = vec![0u128; 2 * self.d - 1];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + xi as u128 * yj as u128) % q;
            }
        }
        for k in (self.d..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..self.d {
                let m = self.modulus[i] as u128;
                prod[k - self.d + i] = (prod[k - self.d + i] + (q - c) * m) % q;
            }
        }
        let c: Vec<u64> = prod[..self.d].iter().map(|&v| v as u64).collect();
        self.from_coords(&c)
    }

    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe(1);
        }
        if a.0 == 0 {
            return Fe(0);
        }
        if let Some(t) = &self.tables {
            let n = (self.order - 1) as u128;
            let k = (t.log[a.0 as usize] as u128 * (e as u128 % n)) % n;
            return Fe(t.exp[k as usize] as u64);
        }
        self.pow_slow(a, e)
    }

    fn pow_slow(&self, a: Fe, mut e: u64) -> Fe {
        let (mut base, mut acc) = (a, Fe(1));
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        if self.d == 1 {
            return Some(Fe(inv_mod(a.0, self.q)));
        }
        if let Some(t) = &self.tables {
            let n = (self.order - 1) as u32;
            let l = t.log[a.0 as usize];
            return Some(Fe(t.exp[((n - l) % n) as usize] as u64));
        }
        Some(self.pow_slow(a, self.order - 2))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// `x^{q^a}`.
    pub fn frobenius(&self, x: Fe, a: usize) -> Fe {
        let a = a % self.d;
        if a == 0 {
            return x;
        }
        self.pow(x, self.q.pow(a as u32))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(0..self.order))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(1..self.order))
    }

    /// All elements in packed order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order).map(Fe)
    }

    pub fn is_square(&self, a: Fe) -> bool {
        if a.0 == 0 || self.order % 2 == 0 {
            return true;
        }
        if let Some(t) = &self.tables {
            return t.log[a.0 as usize] % 2 == 0;
        }
        self.pow(a, (self.order - 1) / 2) == Fe(1)
    }

    /// A square root, or `None` for non-squares. Odd order only.
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return Some(Fe(0));
        }
        if !self.is_square(a) {
            return None;
        }
        if let Some(t) = &self.tables {
            return Some(Fe(t.exp[(t.log[a.0 as usize] / 2) as usize] as u64));
        }
        // Tonelli-Shanks over the cyclic group K*.
        let n = self.order - 1;
        let s = n.trailing_zeros();
        let odd = n >> s;
        // prime-field constants are all squares once d is even, so start past them
        let start = if self.d > 1 { self.q } else { 2 };
        let z = (start..self.order).map(Fe).find(|&z| !self.is_square(z))?;
        let mut m = s;
        let mut c = self.pow(z, odd);
        let mut tt = self.pow(a, odd);
        let mut r = self.pow(a, (odd + 1) / 2);
        while tt != Fe(1) {
            let mut i = 0;
            let mut t2 = tt;
            while t2 != Fe(1) {
                t2 = self.square(t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.square(b);
            }
            m = i;
            c = self.square(b);
            tt = self.mul(tt, c);
            r = self.mul(r, b);
        }
        Some(r)
    }

    /// Coordinates of `x` with respect to the published basis `theta`.
    pub fn descend(&self, x: Fe) -> Vec<u64> {
        let c = self.coords(x);
        self.theta_inv
            .iter()
            .map(|row| {
                let s: u128 = row.iter().zip(&c).map(|(&r, &ci)| r as u128 * ci as u128).sum();
                (s % self.q as u128) as u64
            })
            .collect()
    }

    /// Inverse of [`Field::descend`]: `sum_j v_j theta_j`.
    pub fn recompose(&self, v: &[u64]) -> Fe {
        let mut acc = Fe(0);
        for (&vj, &tj) in v.iter().zip(&self.theta) {
            acc = self.add(acc, self.mul(Fe(vj % self.q), tj));
        }
        acc
    }

    fn build_tables(&self) -> Tables {
        let n = self.order - 1;
        let primes = prime_factors(n);
        let g = (1..self.order)
            .map(Fe)
            .find(|&g| primes.iter().all(|&p| self.pow_slow(g, n / p) != Fe(1)))
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; 2 * n as usize];
        let mut log = vec![0u32; self.order as usize];
        let mut x = Fe(1);
        for i in 0..n as usize {
            exp[i] = x.0 as u32;
            log[x.0 as usize] = i as u32;
            x = self.mul_slow(x, g);
        }
        for i in n as usize..2 * n as usize {
            exp[i] = exp[i - n as usize];
        }
        Tables { exp, log }
    }

    /// Inverse of the matrix whose columns are the power coordinates of `t`.
    fn basis_inverse(&self, t: &[Fe]) -> Option<Vec<Vec<u64>>> {
        let d = self.d;
        let mut m = vec![vec![0u64; d]; d];
        for (j, &tj) in t.iter().enumerate() {
            for (i, c) in self.coords(tj).into_iter().enumerate() {
                m[i][j] = c;
            }
        }
        mat_inverse_mod(&m, self.q)
    }
}

fn check_params(q: u64, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::ZeroDegree);
    }
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let mut order: u128 = 1;
    for _ in 0..d {
        order *= q as u128;
        if order >= 1u128 << 62 {
            return Err(Error::FieldTooLarge { q, d });
        }
    }
    Ok(())
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut dd, mut s) = (n - 1, 0);
    while dd % 2 == 0 {
        dd /= 2;
        s += 1;
    }
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powm = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulm(r, b);
            }
            b = mulm(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powm(a, dd);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulm(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `a^{-1} mod m` for `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut t, mut nt) = (0i128, 1i128);
    let (mut r, mut nr) = (m as i128, (a % m) as i128);
    while nr != 0 {
        let qt = r / nr;
        (t, nt) = (nt, t - qt * nt);
        (r, nr) = (nr, r - qt * nr);
    }
    t.rem_euclid(m as i128) as u64
}

/// Gauss-Jordan inverse over `F_p`; `None` if singular.
pub fn mat_inverse_mod(m: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let n = m.len();
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let mut a: Vec<Vec<u64>> = m.to_vec();
    let mut inv: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] % p != 0)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let s = inv_mod(a[col][col], p);
        for j in 0..n {
            a[col][j] = mul(a[col][j], s);
            inv[col][j] = mul(inv[col][j], s);
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] = (a[r][j] + p - mul(f, a[col][j])) % p;
                    inv[r][j] = (inv[r][j] + p - mul(f, inv[col][j])) % p;
                }
            }
        }
    }
    Some(inv)
}

// Univariate polynomials over F_p, constant term first, used only for the
// irreducibility test.

fn upoly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn upoly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = upoly_trim(a.to_vec());
    let m = upoly_trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1;
        let c = ((r[k] as u128 * lead_inv as u128) % p as u128) as u64;
        for i in 0..=dm {
            let t = ((c as u128 * m[i] as u128) % p as u128) as u64;
            r[k - dm + i] = (r[k - dm + i] + p - t) % p;
        }
        r = upoly_trim(r);
    }
    r
}

fn upoly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    upoly_rem(&prod, m, p)
}

fn upoly_powmod(a: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut base = upoly_rem(a, m, p);
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = upoly_mulmod(&acc, &base, m, p);
        }
        base = upoly_mulmod(&base, &base, m, p);
        e >>= 1;
    }
    acc
}

fn upoly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut x, mut y) = (upoly_trim(a.to_vec()), upoly_trim(b.to_vec()));
    while !y.is_empty() {
        let r = upoly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn upoly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let r = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    upoly_trim(r)
}

/// Rabin's test: `f | x^{p^d} - x` and `gcd(x^{p^{d/r}} - x, f) = 1` for primes `r | d`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let x = [0u64, 1];
    // frob[k] = x^{p^k} mod f
    let mut frob = vec![upoly_rem(&x, f, p)];
    for k in 1..=d {
        let next = upoly_powmod(&frob[k - 1], p, f, p);
        frob.push(next);
    }
    if !upoly_sub(&frob[d], &x, p).is_empty() {
        return false;
    }
    prime_factors(d as u64).into_iter().all(|r| {
        let h = upoly_sub(&frob[d / r as usize], &x, p);
        upoly_gcd(f, &h, p).len() == 1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn degree_one_field_uses_unit_basis() {
        let f = Field::setup(7, 1, &mut rng()).unwrap();
        assert_eq!(f.order(), 7);
        assert_eq!(f.theta(), &[Fe(1)]);
        assert_eq!(f.descend(f.from_int(5)), vec![5]);
    }

    #[test]
    fn modulus_over_f5_has_no_root() {
        for seed in 0..20 {
            let f = Field::setup(5, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let m = f.modulus();
            for r in 0..5u64 {
                let v = (m[0] + m[1] * r + m[2] * r * r) % 5;
                assert_ne!(v, 0, "modulus {m:?} has root {r}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Field::setup(4, 2, &mut rng()), Err(Error::NotPrime(4)));
        assert_eq!(Field::setup(5, 0, &mut rng()), Err(Error::ZeroDegree));
    }

    #[test]
    fn frobenius_matches_repeated_multiplication() {
        let f = Field::setup(5, 2, &mut rng()).unwrap();
        for x in f.elements() {
            let mut p = f.one();
            for _ in 0..5 {
                p = f.mul_slow(p, x);
            }
            assert_eq!(f.frobenius(x, 1), p);
            assert_eq!(f.frobenius(x, 0), x);
            assert_eq!(f.frobenius(x, 2), x);
        }
    }

    #[test]
    fn descent_round_trip_exhaustive() {
        let f = Field::setup(3, 3, &mut rng()).unwrap();
        assert_eq!(f.descend(f.zero()), vec![0, 0, 0]);
        assert_eq!(f.descend(f.theta()[0]), vec![1, 0, 0]);
        for x in f.elements() {
            assert_eq!(f.recompose(&f.descend(x)), x);
        }
    }

    #[test]
    fn table_and_schoolbook_products_agree() {
        let f = Field::setup(7, 3, &mut rng()).unwrap();
        let mut r = rng();
        for _ in 0..2000 {
            let (a, b) = (f.random(&mut r), f.random(&mut r));
            assert_eq!(f.mul(a, b), f.mul_slow(a, b));
        }
    }

    #[test]
    fn sqrt_paths_agree() {
        let f = Field::setup(13, 2, &mut rng()).unwrap();
        for x in f.elements() {
            match f.sqrt(x) {
                Some(r) => assert_eq!(f.mul(r, r), x),
                None => assert!(!f.is_square(x)),
            }
        }
        let squares = f.elements().filter(|&x| f.is_square(x)).count();
        assert_eq!(squares as u64, (f.order() + 1) / 2);
    }

    #[test]
    fn large_field_without_tables() {
        let f = Field::setup(1_000_003, 2, &mut rng()).unwrap();
        assert!(f.tables.is_none());
        let mut r = rng();
        for _ in 0..200 {
            let a = f.random_nonzero(&mut r);
            assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            let s = f.square(a);
            let root = f.sqrt(s).unwrap();
            assert_eq!(f.square(root), s);
        }
    }

    #[test]
    fn primality_and_factoring() {
        assert!(is_prime(2) && is_prime(65537) && is_prime(1_000_000_007));
        assert!(!is_prime(1) && !is_prime(561) && !is_prime(65535));
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
    }
}
