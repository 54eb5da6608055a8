//! Integer helpers: factorisation, square-free parts, Legendre symbols.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn rho_u64(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_u64_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = rho_u64(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

/// Prime factorisation of a positive 64-bit integer, sorted ascending.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut ps = Vec::new();
    let mut m = n;
    for p in 2u64..1000 {
        if p * p > m {
            break;
        }
        while m % p == 0 {
            ps.push(p);
            m /= p;
        }
    }
    factor_u64_into(m, &mut ps);
    ps.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in ps {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

fn is_probable_prime_big(n: &BigInt) -> bool {
    if let Some(m) = n.to_u64() {
        return is_prime_u64(m);
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'outer: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn rho_big(n: &BigInt) -> BigInt {
    let mut c = BigInt::one();
    loop {
        let f = |x: &BigInt| (x * x + &c) % n;
        let mut x = BigInt::from(2);
        let mut y = BigInt::from(2);
        let mut d = BigInt::one();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_big_into(n: &BigInt, out: &mut Vec<BigInt>) {
    if n.is_one() {
        return;
    }
    if let Some(m) = n.to_u64() {
        out.extend(factor_u64(m).into_iter().flat_map(|(p, e)| std::iter::repeat(BigInt::from(p)).take(e as usize)));
        return;
    }
    if is_probable_prime_big(n) {
        out.push(n.clone());
        return;
    }
    let d = rho_big(n);
    factor_big_into(&d, out);
    factor_big_into(&(n / &d), out);
}

/// Prime factorisation of |n| (n nonzero), sorted ascending.
pub fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    assert!(!n.is_zero(), "factor of zero");
    let mut ps = Vec::new();
    let mut m = n.abs();
    for p in 2u32..2000 {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            break;
        }
        while (&m % &pb).is_zero() {
            ps.push(pb.clone());
            m /= &pb;
        }
    }
    factor_big_into(&m, &mut ps);
    ps.sort();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for p in ps {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Distinct primes dividing |n|.
pub fn prime_divisors(n: &BigInt) -> Vec<BigInt> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// Square-free part of a nonzero integer, sign preserved.
pub fn squarefree(n: &BigInt) -> BigInt {
    let mut r = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
    for (p, e) in factor(n) {
        if e % 2 == 1 {
            r *= p;
        }
    }
    r
}

/// Square-free integer representing the square class of a nonzero rational.
pub fn squarefree_rat(x: &BigRational) -> BigInt {
    squarefree(&(x.numer() * x.denom()))
}

/// Exact square root of a non-negative integer, if it is a perfect square.
pub fn sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Exact square root of a rational, if it is a square.
pub fn sqrt_rat(x: &BigRational) -> Option<BigRational> {
    let n = sqrt_exact(x.numer())?;
    let d = sqrt_exact(x.denom())?;
    Some(BigRational::new(n, d))
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    let mut m = n.clone();
    let mut v = 0;
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    v
}

/// Legendre symbol (a|p) for an odd prime p; returns 0 when p divides a.
pub fn legendre(a: &BigInt, p: &BigInt) -> i32 {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return 0;
    }
    let e = (p - 1) / 2;
    if a.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small() {
        assert_eq!(factor_u64(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor_u64(1_000_000_007), vec![(1_000_000_007, 1)]);
        let n = BigInt::from(600851475143u64);
        let f: Vec<_> = factor(&n).into_iter().map(|(p, _)| p.to_u64().unwrap()).collect();
        assert_eq!(f, vec![71, 839, 1471, 6857]);
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree(&BigInt::from(-72)), BigInt::from(-2));
        assert_eq!(squarefree(&BigInt::from(49)), BigInt::from(1));
        let r = BigRational::new(BigInt::from(3), BigInt::from(12));
        assert_eq!(squarefree_rat(&r), BigInt::from(1));
    }

    #[test]
    fn legendre_matches_brute_force() {
        for p in [3i64, 5, 7, 11, 13] {
            let pb = BigInt::from(p);
            for a in 1..p {
                let is_sq = (1..p).any(|x| (x * x) % p == a);
                assert_eq!(legendre(&BigInt::from(a), &pb), if is_sq { 1 } else { -1 });
            }
        }
    }
}
