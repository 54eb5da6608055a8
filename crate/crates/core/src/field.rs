//! Exact ground fields: the rationals, finite fields GF(p^k) with q <= 2^16,
//! and multiquadratic extensions Q(sqrt d_1, ..., sqrt d_r).
//!
//! Elements carry a handle to their field so that arithmetic can be written
//! with ordinary operators.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::arith;
use crate::error::{invalid, Error, Result};

/// Largest supported finite field order.
pub const MAX_FINITE_ORDER: u64 = 1 << 16;

/// Finite field GF(p^k). Elements are encoded as integers sum c_i p^i, where
/// c_i are the coefficients of a polynomial in the generator x of
/// GF(p)[x]/(modulus).
pub struct Gf {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let k = m.len() - 1;
    let mut r = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    // reduce by the monic modulus
    for d in (k..r.len()).rev() {
        let c = r[d];
        if c == 0 {
            continue;
        }
        for (i, &mi) in m.iter().enumerate() {
            let idx = d - k + i;
            r[idx] = (r[idx] + (p as u64 - c) * mi as u64) % p as u64;
        }
    }
    r.truncate(k);
    r.resize(k, 0);
    r.into_iter().map(|x| x as u32).collect()
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    // m need not be monic; p prime.
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let dm = m.iter().rposition(|&c| c != 0).unwrap();
    let lead_inv = modinv(m[dm] as u64, p as u64);
    for d in (dm..r.len()).rev() {
        let c = r[d] * lead_inv % p as u64;
        if c == 0 {
            continue;
        }
        for i in 0..=dm {
            let idx = d - dm + i;
            r[idx] = (r[idx] + (p as u64 - c) * m[i] as u64 % p as u64) % p as u64;
        }
    }
    r.truncate(dm);
    r.into_iter().map(|x| x as u32).collect()
}

fn modinv(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn digits(mut x: u32, p: u32, k: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(k as usize);
    for _ in 0..k {
        d.push(x % p);
        x /= p;
    }
    d
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let k = m.len() - 1;
    if k <= 1 {
        return true;
    }
    for deg in 1..=k / 2 {
        let count = (p as u64).pow(deg as u32);
        for low in 0..count {
            let mut f = digits(low as u32, p, deg as u32);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Gf {
    /// GF(p^k) with the smallest irreducible monic modulus (in the integer
    /// encoding order of its lower coefficients).
    pub fn new(p: u32, k: u32) -> Result<Gf> {
        if k == 0 {
            return invalid("extension degree must be positive");
        }
        if !arith::is_prime_u64(p as u64) {
            return invalid(format!("{p} is not prime"));
        }
        if (p as u64).checked_pow(k).map_or(true, |q| q > MAX_FINITE_ORDER) {
            return invalid(format!("GF({p}^{k}) exceeds the supported order 2^16"));
        }
        if k == 1 {
            return Gf::with_modulus(p, vec![0, 1]);
        }
        let count = p.pow(k);
        for low in 0..count {
            let mut m = digits(low, p, k);
            m.push(1);
            if m[0] != 0 && is_irreducible(&m, p) {
                return Gf::with_modulus(p, m);
            }
        }
        Err(Error::Consistency("no irreducible polynomial found".into()))
    }

    /// GF(p)[x]/(modulus), with the modulus given low degree first. Monic and
    /// irreducible are checked.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Gf> {
        if !arith::is_prime_u64(p as u64) {
            return invalid(format!("{p} is not prime"));
        }
        let k = modulus.len() as u32 - 1;
        if k == 0 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return invalid("modulus must be monic of positive degree with coefficients below p");
        }
        if (p as u64).checked_pow(k).map_or(true, |q| q > MAX_FINITE_ORDER) {
            return invalid(format!("GF({p}^{k}) exceeds the supported order 2^16"));
        }
        if !is_irreducible(&modulus, p) {
            return invalid("modulus is reducible");
        }
        let q = p.pow(k);
        let mut exp = vec![0u32; q as usize];
        let mut log = vec![0u32; q as usize];
        let mut found = false;
        'cand: for g in 1..q {
            let gd = digits(g, p, k);
            let mut cur = digits(1, p, k);
            for e in 0..(q - 1) {
                let enc = undigits(&cur, p);
                if e > 0 && enc == 1 {
                    continue 'cand;
                }
                exp[e as usize] = enc;
                log[enc as usize] = e;
                cur = poly_mulmod(&cur, &gd, &modulus, p);
            }
            found = true;
            break;
        }
        if !found {
            return Err(Error::Consistency("no primitive element".into()));
        }
        exp[(q - 1) as usize] = 1;
        Ok(Gf { p, k, q, modulus, exp, log })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn order(&self) -> u32 {
        self.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    /// The primitive element used for the log tables.
    pub fn generator(&self) -> u32 {
        self.exp[1 % (self.q as usize - 1).max(1)]
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut r, mut pw) = (a, b, 0u32, 1u32);
        for _ in 0..self.k {
            r += ((a % self.p + b % self.p) % self.p) * pw;
            a /= self.p;
            b /= self.p;
            pw *= self.p;
        }
        r
    }

    fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let (mut a, mut r, mut pw) = (a, 0u32, 1u32);
        for _ in 0..self.k {
            r += ((self.p - a % self.p) % self.p) * pw;
            a /= self.p;
            pw *= self.p;
        }
        r
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % (self.q as u64 - 1);
        self.exp[e as usize]
    }

    fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let l = self.log[a as usize];
        Some(self.exp[((self.q - 1 - l) % (self.q - 1)) as usize])
    }

    fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize] as u64;
        let m = self.q as u64 - 1;
        if self.p == 2 {
            return Some(self.exp[((l * (self.q as u64 / 2)) % m) as usize]);
        }
        if l % 2 == 0 {
            Some(self.exp[(l / 2) as usize])
        } else {
            None
        }
    }

    fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e % (self.q as u64 - 1))) % (self.q as u64 - 1)) as usize]
    }

    /// Absolute trace to the prime field, as an integer below p.
    pub fn abs_trace(&self, a: u32) -> u32 {
        let mut t = 0;
        let mut x = a;
        for _ in 0..self.k {
            t = self.add(t, x);
            x = self.pow(x, self.p as u64);
        }
        t
    }

    // t^2 + t is GF(2)-linear on the bit encoding; solve by elimination.
    fn as_root(&self, c: u32) -> Option<u32> {
        let k = self.k as usize;
        // rows: (image bits, preimage bits)
        let mut rows: Vec<(u32, u32)> = (0..k)
            .map(|i| {
                let t = 1u32 << i;
                (self.mul(t, t) ^ t, t)
            })
            .collect();
        let mut target = (c, 0u32);
        let mut r = 0;
        for bit in 0..k {
            let Some(p) = (r..k).find(|&i| rows[i].0 >> bit & 1 == 1) else { continue };
            rows.swap(r, p);
            let piv = rows[r];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.0 >> bit & 1 == 1 {
                    row.0 ^= piv.0;
                    row.1 ^= piv.1;
                }
            }
            if target.0 >> bit & 1 == 1 {
                target.0 ^= piv.0;
                target.1 ^= piv.1;
            }
            r += 1;
        }
        (target.0 == 0).then_some(target.1)
    }

    fn from_int(&self, n: &BigInt) -> u32 {
        n.mod_floor(&BigInt::from(self.p)).to_u32().unwrap()
    }
}

/// Multiquadratic extension Q(sqrt d_1, ..., sqrt d_r). Coordinates are on the
/// monomials prod_{i in S} sqrt d_i, indexed by the bitmask of S.
#[derive(Debug, PartialEq)]
pub struct Mq {
    radicands: Vec<BigInt>,
    // products of radicands over each mask
    mask_prod: Vec<BigInt>,
}

impl Mq {
    pub fn new(radicands: Vec<BigInt>) -> Result<Mq> {
        for d in &radicands {
            if d.is_zero() || arith::squarefree(d) != *d || d.is_one() {
                return invalid(format!("radicand {d} is not a square-free integer other than 1"));
            }
        }
        let r = radicands.len();
        if r > 4 {
            return invalid("at most four radicands are supported");
        }
        let mut mask_prod = Vec::with_capacity(1 << r);
        for m in 0..(1usize << r) {
            let mut p = BigInt::one();
            for (i, d) in radicands.iter().enumerate() {
                if m >> i & 1 == 1 {
                    p *= d;
                }
            }
            if m > 0 && arith::squarefree(&p).is_one() {
                return invalid("radicands are not independent modulo squares");
            }
            mask_prod.push(p);
        }
        Ok(Mq { radicands, mask_prod })
    }

    pub fn radicands(&self) -> &[BigInt] {
        &self.radicands
    }

    pub fn dim(&self) -> usize {
        1 << self.radicands.len()
    }
}

fn mq_mul(a: &[BigRational], b: &[BigRational], rads: &[BigInt]) -> Vec<BigRational> {
    let n = a.len();
    let mut r = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let common = i & j;
            let mut c = x * y;
            for (t, d) in rads.iter().enumerate() {
                if common >> t & 1 == 1 {
                    c *= BigRational::from_integer(d.clone());
                }
            }
            r[i ^ j] += c;
        }
    }
    r
}

fn mq_inv(a: &[BigRational], rads: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = a.len();
    // regular representation: column j is a * e_j
    let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n + 1]; n];
    for j in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[j] = BigRational::one();
        let col = mq_mul(a, &e, rads);
        for i in 0..n {
            m[i][j] = col[i].clone();
        }
    }
    m[0][n] = BigRational::one();
    for c in 0..n {
        let piv = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, piv);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in c..=n {
                    let t = &m[c][k] * &f;
                    m[r][k] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

fn mq_sqrt(a: &[BigRational], rads: &[BigInt]) -> Option<Vec<BigRational>> {
    let r = rads.len();
    if r == 0 {
        return arith::sqrt_rat(&a[0]).map(|x| vec![x]);
    }
    let half = 1usize << (r - 1);
    let sub = &rads[..r - 1];
    let d = BigRational::from_integer(rads[r - 1].clone());
    let alpha = &a[..half];
    let beta = &a[half..];
    let join = |x: Vec<BigRational>, y: Vec<BigRational>| {
        let mut v = x;
        v.extend(y);
        v
    };
    let zero = vec![BigRational::zero(); half];
    if beta.iter().all(|x| x.is_zero()) {
        if let Some(s) = mq_sqrt(alpha, sub) {
            return Some(join(s, zero));
        }
        let scaled: Vec<BigRational> = alpha.iter().map(|x| x / &d).collect();
        return mq_sqrt(&scaled, sub).map(|s| join(zero.clone(), s));
    }
    // (x + y sqrt d)^2 = alpha + beta sqrt d  =>  x^2 = (alpha +- sqrt(alpha^2 - d beta^2))/2
    let a2 = mq_mul(alpha, alpha, sub);
    let b2 = mq_mul(beta, beta, sub);
    let norm: Vec<BigRational> = a2.iter().zip(&b2).map(|(x, y)| x - &d * y).collect();
    let n = mq_sqrt(&norm, sub)?;
    let two = BigRational::from_integer(BigInt::from(2));
    for sign in [1i32, -1] {
        let t: Vec<BigRational> = alpha
            .iter()
            .zip(&n)
            .map(|(x, y)| if sign == 1 { (x + y) / &two } else { (x - y) / &two })
            .collect();
        if t.iter().all(|x| x.is_zero()) {
            continue;
        }
        if let Some(x) = mq_sqrt(&t, sub) {
            let x2inv = mq_inv(&x.iter().map(|c| c * &two).collect::<Vec<_>>(), sub)?;
            let y = mq_mul(beta, &x2inv, sub);
            return Some(join(x, y));
        }
    }
    None
}

/// A ground field.
#[derive(Clone, Debug)]
pub enum Field {
    Rational,
    Finite(Arc<Gf>),
    Multiquadratic(Arc<Mq>),
}

impl PartialEq for Field {
    fn eq(&self, other: &Field) -> bool {
        match (self, other) {
            (Field::Rational, Field::Rational) => true,
            (Field::Finite(a), Field::Finite(b)) => a.p == b.p && a.modulus == b.modulus,
            (Field::Multiquadratic(a), Field::Multiquadratic(b)) => a.radicands == b.radicands,
            _ => false,
        }
    }
}

/// An element of a ground field.
#[derive(Clone)]
pub enum Elem {
    Q(BigRational),
    F(u32, Arc<Gf>),
    M(Vec<BigRational>, Arc<Mq>),
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Q(x) => write!(f, "{x}"),
            Elem::F(x, _) => write!(f, "{x}"),
            Elem::M(c, _) => {
                let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", s.join(","))
            }
        }
    }
}

impl PartialEq for Elem {
    fn eq(&self, other: &Elem) -> bool {
        match (self, other) {
            (Elem::Q(a), Elem::Q(b)) => a == b,
            (Elem::F(a, _), Elem::F(b, _)) => a == b,
            (Elem::M(a, _), Elem::M(b, _)) => a == b,
            _ => panic!("comparing elements of different fields"),
        }
    }
}
impl Eq for Elem {}

impl Elem {
    pub fn is_zero(&self) -> bool {
        match self {
            Elem::Q(x) => x.is_zero(),
            Elem::F(x, _) => *x == 0,
            Elem::M(c, _) => c.iter().all(|x| x.is_zero()),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Elem::Q(x) => x.is_one(),
            Elem::F(x, _) => *x == 1,
            Elem::M(c, _) => c[0].is_one() && c[1..].iter().all(|x| x.is_zero()),
        }
    }

    pub fn add(&self, o: &Elem) -> Elem {
        match (self, o) {
            (Elem::Q(a), Elem::Q(b)) => Elem::Q(a + b),
            (Elem::F(a, g), Elem::F(b, _)) => Elem::F(g.add(*a, *b), g.clone()),
            (Elem::M(a, m), Elem::M(b, _)) => Elem::M(a.iter().zip(b).map(|(x, y)| x + y).collect(), m.clone()),
            _ => panic!("mixed-field arithmetic"),
        }
    }

    pub fn neg(&self) -> Elem {
        match self {
            Elem::Q(a) => Elem::Q(-a),
            Elem::F(a, g) => Elem::F(g.neg(*a), g.clone()),
            Elem::M(a, m) => Elem::M(a.iter().map(|x| -x).collect(), m.clone()),
        }
    }

    pub fn sub(&self, o: &Elem) -> Elem {
        match (self, o) {
            (Elem::Q(a), Elem::Q(b)) => Elem::Q(a - b),
            (Elem::M(a, m), Elem::M(b, _)) => Elem::M(a.iter().zip(b).map(|(x, y)| x - y).collect(), m.clone()),
            _ => self.add(&o.neg()),
        }
    }

    pub fn mul(&self, o: &Elem) -> Elem {
        match (self, o) {
            (Elem::Q(a), Elem::Q(b)) => Elem::Q(a * b),
            (Elem::F(a, g), Elem::F(b, _)) => Elem::F(g.mul(*a, *b), g.clone()),
            (Elem::M(a, m), Elem::M(b, _)) => Elem::M(mq_mul(a, b, &m.radicands), m.clone()),
            _ => panic!("mixed-field arithmetic"),
        }
    }

    pub fn inv(&self) -> Option<Elem> {
        match self {
            Elem::Q(a) => (!a.is_zero()).then(|| Elem::Q(a.recip())),
            Elem::F(a, g) => g.inv(*a).map(|x| Elem::F(x, g.clone())),
            Elem::M(a, m) => {
                if self.is_zero() {
                    None
                } else {
                    mq_inv(a, &m.radicands).map(|x| Elem::M(x, m.clone()))
                }
            }
        }
    }

    pub fn div(&self, o: &Elem) -> Option<Elem> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn square(&self) -> Elem {
        self.mul(self)
    }

    pub fn pow(&self, e: u64) -> Elem {
        if let Elem::F(a, g) = self {
            return Elem::F(g.pow(*a, e), g.clone());
        }
        let mut r = self.field().one();
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.square();
            e >>= 1;
        }
        r
    }

    /// The field this element lives in.
    pub fn field(&self) -> Field {
        match self {
            Elem::Q(_) => Field::Rational,
            Elem::F(_, g) => Field::Finite(g.clone()),
            Elem::M(_, m) => Field::Multiquadratic(m.clone()),
        }
    }

    /// Rational value, when the element lies in the prime field Q.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Elem::Q(a) => Some(a.clone()),
            Elem::F(..) => None,
            Elem::M(c, _) => c[1..].iter().all(|x| x.is_zero()).then(|| c[0].clone()),
        }
    }

    /// Coordinates over the prime field, as rationals (finite fields: digits).
    pub fn coordinates(&self) -> Vec<BigRational> {
        match self {
            Elem::Q(a) => vec![a.clone()],
            Elem::F(a, g) => digits(*a, g.p, g.k).into_iter().map(|d| BigRational::from_integer(d.into())).collect(),
            Elem::M(c, _) => c.clone(),
        }
    }

    /// Finite field encoding, if any.
    pub fn to_gf(&self) -> Option<u32> {
        match self {
            Elem::F(a, _) => Some(*a),
            _ => None,
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Elem> for &Elem {
            type Output = Elem;
            fn $m(self, o: &Elem) -> Elem {
                Elem::$f(self, o)
            }
        }
        impl std::ops::$tr<Elem> for Elem {
            type Output = Elem;
            fn $m(self, o: Elem) -> Elem {
                Elem::$f(&self, &o)
            }
        }
        impl std::ops::$tr<&Elem> for Elem {
            type Output = Elem;
            fn $m(self, o: &Elem) -> Elem {
                Elem::$f(&self, o)
            }
        }
    };
}
binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for &Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        Elem::neg(self)
    }
}
impl std::ops::Neg for Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        Elem::neg(&self)
    }
}

/// A place of Q.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Real,
    Prime(BigInt),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

/// Result of adjoining a square root.
#[derive(Clone, Debug)]
pub struct Extension {
    pub field: Field,
    /// True when the radicand was already a square and nothing was adjoined.
    pub identity: bool,
    source: Field,
}

impl Extension {
    /// Image of an element of the source field.
    pub fn embed(&self, x: &Elem) -> Elem {
        if self.identity {
            return x.clone();
        }
        let Field::Multiquadratic(m) = &self.field else { unreachable!() };
        let mut c = vec![BigRational::zero(); m.dim()];
        match x {
            Elem::Q(a) => c[0] = a.clone(),
            Elem::M(a, _) => c[..a.len()].clone_from_slice(a),
            Elem::F(..) => panic!("finite fields are not extended"),
        }
        let _ = &self.source;
        Elem::M(c, m.clone())
    }
}

impl Field {
    pub fn rational() -> Field {
        Field::Rational
    }

    pub fn finite(p: u32, k: u32) -> Result<Field> {
        Ok(Field::Finite(Arc::new(Gf::new(p, k)?)))
    }

    pub fn multiquadratic(radicands: &[i64]) -> Result<Field> {
        Field::multiquadratic_big(radicands.iter().map(|&d| BigInt::from(d)).collect())
    }

    pub fn multiquadratic_big(radicands: Vec<BigInt>) -> Result<Field> {
        if radicands.is_empty() {
            return Ok(Field::Rational);
        }
        Ok(Field::Multiquadratic(Arc::new(Mq::new(radicands)?)))
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            Field::Finite(g) => g.p,
            _ => 0,
        }
    }

    /// Dimension over the prime field.
    pub fn prime_degree(&self) -> usize {
        match self {
            Field::Rational => 1,
            Field::Finite(g) => g.k as usize,
            Field::Multiquadratic(m) => m.dim(),
        }
    }

    pub fn is_char2(&self) -> bool {
        self.characteristic() == 2
    }

    pub fn zero(&self) -> Elem {
        match self {
            Field::Rational => Elem::Q(BigRational::zero()),
            Field::Finite(g) => Elem::F(0, g.clone()),
            Field::Multiquadratic(m) => Elem::M(vec![BigRational::zero(); m.dim()], m.clone()),
        }
    }

    pub fn one(&self) -> Elem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Elem {
        self.from_int(&BigInt::from(n))
    }

    pub fn from_int(&self, n: &BigInt) -> Elem {
        match self {
            Field::Rational => Elem::Q(BigRational::from_integer(n.clone())),
            Field::Finite(g) => Elem::F(g.from_int(n), g.clone()),
            Field::Multiquadratic(m) => {
                let mut c = vec![BigRational::zero(); m.dim()];
                c[0] = BigRational::from_integer(n.clone());
                Elem::M(c, m.clone())
            }
        }
    }

    /// Image of a rational number; None when the denominator vanishes in the field.
    pub fn from_rational(&self, x: &BigRational) -> Option<Elem> {
        match self {
            Field::Rational => Some(Elem::Q(x.clone())),
            Field::Finite(_) => self.from_int(x.numer()).div(&self.from_int(x.denom())),
            Field::Multiquadratic(m) => {
                let mut c = vec![BigRational::zero(); m.dim()];
                c[0] = x.clone();
                Some(Elem::M(c, m.clone()))
            }
        }
    }

    /// Finite field element from its integer encoding.
    pub fn from_gf(&self, x: u32) -> Option<Elem> {
        match self {
            Field::Finite(g) if x < g.q => Some(Elem::F(x, g.clone())),
            _ => None,
        }
    }

    /// All elements of a finite field, in encoding order.
    pub fn elements(&self) -> Option<Vec<Elem>> {
        match self {
            Field::Finite(g) => Some((0..g.q).map(|x| Elem::F(x, g.clone())).collect()),
            _ => None,
        }
    }

    pub fn order(&self) -> Option<u32> {
        match self {
            Field::Finite(g) => Some(g.q),
            _ => None,
        }
    }

    /// Square root in the field, if one exists.
    pub fn sqrt(&self, a: &Elem) -> Option<Elem> {
        match a {
            Elem::Q(x) => arith::sqrt_rat(x).map(Elem::Q),
            Elem::F(x, g) => g.sqrt(*x).map(|y| Elem::F(y, g.clone())),
            Elem::M(c, m) => mq_sqrt(c, &m.radicands).map(|y| Elem::M(y, m.clone())),
        }
    }

    pub fn is_square(&self, a: &Elem) -> bool {
        self.sqrt(a).is_some()
    }

    /// True iff a/b is a square.
    pub fn square_class_equal(&self, a: &Elem, b: &Elem) -> Result<bool> {
        if a.is_zero() || b.is_zero() {
            return invalid("square classes of zero are undefined");
        }
        match (a, b) {
            (Elem::Q(x), Elem::Q(y)) => Ok(arith::squarefree_rat(x) == arith::squarefree_rat(y)),
            (Elem::F(_, g), _) if g.p == 2 => Ok(true),
            _ => Ok(self.is_square(&a.div(b).unwrap())),
        }
    }

    /// Absolute trace to the prime field (finite fields only).
    pub fn abs_trace(&self, a: &Elem) -> Option<u32> {
        match a {
            Elem::F(x, g) => Some(g.abs_trace(*x)),
            _ => None,
        }
    }

    /// Solve t^2 + t = c in a field of characteristic 2.
    pub fn artin_schreier_root(&self, c: &Elem) -> Option<Elem> {
        match c {
            Elem::F(x, g) if g.p == 2 => g.as_root(*x).map(|t| Elem::F(t, g.clone())),
            _ => None,
        }
    }

    /// Roots of a t^2 + b t + c = 0 with a nonzero (finite fields and Q).
    pub fn solve_quadratic(&self, a: &Elem, b: &Elem, c: &Elem) -> Option<Elem> {
        let ainv = a.inv()?;
        let b = b * &ainv;
        let c = c * &ainv;
        if self.is_char2() {
            if b.is_zero() {
                return self.sqrt(&c);
            }
            // t = b s with s^2 + s = c / b^2
            let s = self.artin_schreier_root(&c.div(&b.square()).unwrap())?;
            return Some(&b * &s);
        }
        let two = self.from_i64(2);
        let disc = b.square() - self.from_i64(4) * &c;
        let r = self.sqrt(&disc)?;
        (r - &b).div(&two)
    }

    /// Adjoin sqrt(d) to Q or a multiquadratic field.
    pub fn extend_scalars(&self, d: &BigInt) -> Result<Extension> {
        let de = self.from_int(d);
        if d.is_zero() {
            return invalid("cannot adjoin sqrt(0)");
        }
        match self {
            Field::Finite(_) => Err(Error::Unsupported("scalar extension of finite fields".into())),
            _ if self.is_square(&de) => Ok(Extension { field: self.clone(), identity: true, source: self.clone() }),
            Field::Rational => Ok(Extension {
                field: Field::multiquadratic_big(vec![arith::squarefree(d)])?,
                identity: false,
                source: self.clone(),
            }),
            Field::Multiquadratic(m) => {
                let mut r = m.radicands.clone();
                r.push(arith::squarefree(d));
                Ok(Extension { field: Field::multiquadratic_big(r)?, identity: false, source: self.clone() })
            }
        }
    }

    /// JSON descriptor of the field.
    pub fn to_json(&self) -> Value {
        match self {
            Field::Rational => serde_json::json!({"kind": "rational"}),
            Field::Finite(g) => {
                let mut v = serde_json::json!({"kind": "finite", "p": g.p, "k": g.k});
                if g.k > 1 {
                    v["modulus"] = serde_json::json!(g.modulus);
                }
                v
            }
            Field::Multiquadratic(m) => {
                let r: Vec<Value> = m.radicands.iter().map(|d| Value::String(d.to_string())).collect();
                serde_json::json!({"kind": "multiquadratic", "radicands": r})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Field> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Invalid("field.kind missing".into()))?;
        match kind {
            "rational" => Ok(Field::Rational),
            "finite" => {
                let p = v.get("p").and_then(Value::as_u64).ok_or_else(|| Error::Invalid("field.p missing".into()))?;
                let k = v.get("k").and_then(Value::as_u64).unwrap_or(1);
                if p > u32::MAX as u64 || k > 32 {
                    return invalid("field.p or field.k out of range");
                }
                match v.get("modulus") {
                    Some(m) => {
                        let coeffs: Option<Vec<u32>> =
                            m.as_array().map(|a| a.iter().filter_map(|c| c.as_u64().map(|x| x as u32)).collect());
                        let coeffs = coeffs.ok_or_else(|| Error::Invalid("field.modulus must be a list".into()))?;
                        if coeffs.len() != k as usize + 1 {
                            return invalid("field.modulus length must be k+1");
                        }
                        Ok(Field::Finite(Arc::new(Gf::with_modulus(p as u32, coeffs)?)))
                    }
                    None => Field::finite(p as u32, k as u32),
                }
            }
            "multiquadratic" => {
                let r = v
                    .get("radicands")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Invalid("field.radicands missing".into()))?;
                let mut rads = Vec::new();
                for x in r {
                    rads.push(parse_bigint(x)?);
                }
                Field::multiquadratic_big(rads)
            }
            other => invalid(format!("unknown field kind {other:?}")),
        }
    }

    /// JSON encoding of an element: rationals as "n/d" strings, finite field
    /// elements by their integer encoding (as a string), multiquadratic
    /// elements as lists of rational strings.
    pub fn elem_to_json(&self, x: &Elem) -> Value {
        match x {
            Elem::Q(a) => Value::String(rat_string(a)),
            Elem::F(a, _) => Value::String(a.to_string()),
            Elem::M(c, _) => Value::Array(c.iter().map(|a| Value::String(rat_string(a))).collect()),
        }
    }

    pub fn elem_from_json(&self, v: &Value) -> Result<Elem> {
        match self {
            Field::Rational => Ok(Elem::Q(parse_rational(v)?)),
            Field::Finite(g) => {
                let s = match v {
                    Value::String(s) => s.trim().to_string(),
                    Value::Number(n) => n.to_string(),
                    _ => return invalid(format!("expected a finite field element, got {v}")),
                };
                if let Ok(n) = s.parse::<i64>() {
                    if n >= 0 && (n as u64) < g.q as u64 {
                        return Ok(Elem::F(n as u32, g.clone()));
                    }
                    if g.k == 1 {
                        return Ok(self.from_i64(n));
                    }
                }
                invalid(format!("bad finite field element {s:?}"))
            }
            Field::Multiquadratic(m) => match v {
                Value::Array(a) if a.len() == m.dim() => {
                    let c: Result<Vec<BigRational>> = a.iter().map(parse_rational).collect();
                    Ok(Elem::M(c?, m.clone()))
                }
                _ => {
                    let r = parse_rational(v)?;
                    Ok(self.from_rational(&r).unwrap())
                }
            },
        }
    }
}

/// "n/d" rendering used throughout the JSON interfaces.
pub fn rat_string(a: &BigRational) -> String {
    format!("{}/{}", a.numer(), a.denom())
}

pub fn parse_bigint(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| Error::Invalid(format!("bad integer {n}"))),
        Value::String(s) => s.trim().parse::<BigInt>().map_err(|_| Error::Invalid(format!("bad integer {s:?}"))),
        _ => invalid(format!("expected an integer, got {v}")),
    }
}

pub fn parse_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            n.as_i64().map(|x| BigRational::from_integer(x.into())).ok_or_else(|| Error::Invalid(format!("bad number {n}")))
        }
        Value::String(s) => {
            let s = s.trim();
            let bad = || Error::Invalid(format!("bad rational {s:?}"));
            match s.split_once('/') {
                Some((n, d)) => {
                    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(bad());
                    }
                    Ok(BigRational::new(n, d))
                }
                None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
            }
        }
        _ => invalid(format!("expected a rational, got {v}")),
    }
}

/// Hilbert symbol (a, b) at a place of Q.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: &Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return invalid("Hilbert symbol of zero");
    }
    let a = a.numer() * a.denom();
    let b = b.numer() * b.denom();
    Ok(hilbert_int(&a, &b, place))
}

pub(crate) fn hilbert_int(a: &BigInt, b: &BigInt, place: &Place) -> i32 {
    match place {
        Place::Real => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Prime(p) => {
            let al = arith::valuation(a, p);
            let be = arith::valuation(b, p);
            let u = a / p.pow(al);
            let v = b / p.pow(be);
            let two = BigInt::from(2);
            if *p == two {
                let m8 = |x: &BigInt| x.mod_floor(&BigInt::from(8)).to_u32().unwrap();
                let eps = |x: u32| ((x as i64 - 1) / 2).rem_euclid(2) as u32;
                let omega = |x: u32| (((x * x) as i64 - 1) / 8).rem_euclid(2) as u32;
                let (u8_, v8) = (m8(&u), m8(&v));
                let e = eps(u8_) * eps(v8) + al * omega(v8) + be * omega(u8_);
                if e % 2 == 0 {
                    1
                } else {
                    -1
                }
            } else {
                let ep = ((p - 1u32) / 2u32).is_odd();
                let mut s = 1;
                if ep && (al * be) % 2 == 1 {
                    s = -s;
                }
                if be % 2 == 1 {
                    s *= arith::legendre(&u, p);
                }
                if al % 2 == 1 {
                    s *= arith::legendre(&v, p);
                }
                s
            }
        }
    }
}

/// True iff the integer x (nonzero) is a square in Q_p (or R).
pub(crate) fn is_local_square(x: &BigInt, place: &Place) -> bool {
    match place {
        Place::Real => x.is_positive(),
        Place::Prime(p) => {
            let v = arith::valuation(x, p);
            if v % 2 == 1 {
                return false;
            }
            let u = x / p.pow(v);
            if *p == BigInt::from(2) {
                u.mod_floor(&BigInt::from(8)) == BigInt::one()
            } else {
                arith::legendre(&u, p) == 1
            }
        }
    }
}

/// Representatives of Q_v^x / Q_v^x2.
pub(crate) fn local_square_classes(place: &Place) -> Vec<BigInt> {
    match place {
        Place::Real => vec![BigInt::one(), -BigInt::one()],
        Place::Prime(p) if *p == BigInt::from(2) => [1, 3, 5, 7, 2, 6, 10, 14].iter().map(|&x| BigInt::from(x)).collect(),
        Place::Prime(p) => {
            let mut u = BigInt::from(2);
            while arith::legendre(&u, p) != -1 {
                u += 1;
            }
            vec![BigInt::one(), u.clone(), p.clone(), &u * p]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn rational_square_classes() {
        let f = Field::rational();
        assert!(f.square_class_equal(&f.from_i64(8), &f.from_i64(2)).unwrap());
        assert!(!f.square_class_equal(&f.from_i64(7), &f.from_i64(-7)).unwrap());
        assert!(f.square_class_equal(&f.zero(), &f.one()).is_err());
    }

    #[test]
    fn gf9_square_classes_against_exhaustive_squares() {
        let f = Field::finite(3, 2).unwrap();
        let elems = f.elements().unwrap();
        let squares: Vec<Elem> = elems.iter().map(|x| x.square()).collect();
        let Field::Finite(gf) = &f else { unreachable!() };
        let g = f.from_gf(gf.generator()).unwrap();
        let g3 = g.pow(3);
        let g2 = g.square();
        let oracle = |a: &Elem, b: &Elem| squares.contains(&a.div(b).unwrap());
        assert_eq!(f.square_class_equal(&g, &g3).unwrap(), oracle(&g, &g3));
        assert!(f.square_class_equal(&g, &g3).unwrap());
        assert!(!f.square_class_equal(&g, &g2).unwrap());
        for a in &elems[1..] {
            for b in &elems[1..] {
                assert_eq!(f.square_class_equal(a, b).unwrap(), oracle(a, b));
            }
        }
    }

    #[test]
    fn gf_field_axioms() {
        for (p, k) in [(2, 1), (2, 2), (2, 4), (3, 2), (5, 1), (7, 2)] {
            let f = Field::finite(p, k).unwrap();
            let el = f.elements().unwrap();
            for a in &el {
                assert!((a + &a.neg()).is_zero());
                if !a.is_zero() {
                    assert!((a * &a.inv().unwrap()).is_one());
                }
                for b in el.iter().take(9) {
                    assert_eq!(a * b, b * a);
                    for c in el.iter().take(5) {
                        assert_eq!(a * &(b + c), a * b + a * c);
                    }
                }
            }
        }
    }

    #[test]
    fn artin_schreier_and_quadratics() {
        for k in [1, 2, 3, 4, 8] {
            let f = Field::finite(2, k).unwrap();
            for c in f.elements().unwrap() {
                let brute = f.elements().unwrap().into_iter().any(|t| (t.square() + &t - &c).is_zero());
                match f.artin_schreier_root(&c) {
                    Some(t) => assert!((t.square() + &t - &c).is_zero()),
                    None => assert!(!brute),
                }
                assert_eq!(brute, f.abs_trace(&c) == Some(0));
            }
        }
        let f = Field::finite(7, 1).unwrap();
        let r = f.solve_quadratic(&f.one(), &f.from_i64(3), &f.from_i64(2)).unwrap();
        assert!((r.square() + f.from_i64(3) * &r + f.from_i64(2)).is_zero());
    }

    #[test]
    fn gf_rejects_reducible_modulus() {
        assert!(Gf::with_modulus(2, vec![1, 0, 1]).is_err());
        assert!(Gf::with_modulus(2, vec![1, 1, 1]).is_ok());
        assert!(Field::finite(2, 17).is_err());
    }

    #[test]
    fn hilbert_examples() {
        let h = |a: i64, b: i64, p: Place| hilbert_symbol(&q(a), &q(b), &p).unwrap();
        assert_eq!(h(-1, -1, Place::Real), -1);
        assert_eq!(h(-1, -1, Place::Prime(2.into())), -1);
        assert_eq!(h(2, 7, Place::Prime(7.into())), 1);
    }

    // Independent oracle: (a,b)_p = 1 iff ax^2 + by^2 = z^2 has a primitive
    // solution modulo p^k for large enough k (here p^3, or 2^5 at p = 2).
    fn hilbert_oracle(a: i64, b: i64, p: i64) -> i32 {
        let m = if p == 2 { 32 } else { p * p * p };
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    if x % p == 0 && y % p == 0 && z % p == 0 {
                        continue;
                    }
                    if (a * x * x + b * y * y - z * z).rem_euclid(m) == 0 {
                        return 1;
                    }
                }
            }
        }
        -1
    }

    #[test]
    fn hilbert_matches_modular_oracle() {
        for p in [2i64, 3, 5] {
            for a in [-6i64, -3, -2, -1, 1, 2, 3, 5, 6, 10] {
                for b in [-5i64, -2, -1, 2, 3, 7] {
                    let s = hilbert_symbol(&q(a), &q(b), &Place::Prime(p.into())).unwrap();
                    assert_eq!(s, hilbert_oracle(a, b, p), "({a},{b})_{p}");
                }
            }
        }
    }

    #[test]
    fn multiquadratic_sqrt_and_inverse() {
        let f = Field::multiquadratic(&[2, 3]).unwrap();
        let Field::Multiquadratic(m) = &f else { unreachable!() };
        let x = Elem::M(vec![q(1), q(2), q(-1), q(3)], m.clone());
        let y = x.square();
        let r = f.sqrt(&y).unwrap();
        assert_eq!(r.square(), y);
        assert!((&x * &x.inv().unwrap()).is_one());
        assert!(f.is_square(&f.from_i64(6)));
        assert!(!f.is_square(&f.from_i64(5)));
        assert!(!f.is_square(&f.from_i64(-1)));
    }

    #[test]
    fn extend_scalars_cases() {
        let e = Field::rational().extend_scalars(&5.into()).unwrap();
        assert!(!e.identity);
        let e2 = e.field.extend_scalars(&3.into()).unwrap();
        assert_eq!(e2.field, Field::multiquadratic(&[5, 3]).unwrap());
        assert!(Field::rational().extend_scalars(&4.into()).unwrap().identity);
        let f = Field::multiquadratic(&[2]).unwrap();
        assert!(f.extend_scalars(&8.into()).unwrap().identity);
        assert!(Field::multiquadratic(&[2, 8]).is_err());
    }
}
