//! Forms over Q: local invariants, Hasse-Minkowski decisions, bounded
//! witness search and slot recovery.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{pfister_from_slots, PfisterForm, QuadForm};
use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::field::{hilbert_int, is_local_square, local_square_classes, Elem, Field, Place};
use crate::linalg::{self, Matrix, Vector};

/// Cap on the number of lattice points visited by one witness search.
pub const MAX_SEARCH_POINTS: u64 = 4_000_000;

/// Diagonal form with square-free integer entries, plus the basis realizing it.
#[derive(Clone, Debug)]
pub(crate) struct RatDiag {
    pub entries: Vec<BigInt>,
    pub basis: Matrix,
}

/// Local invariants of a diagonal form at one place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalData {
    pub n: usize,
    pub d: BigInt,
    pub eps: i32,
    pub pos: usize,
    pub neg: usize,
}

impl LocalData {
    pub fn of(entries: &[BigInt], place: &Place) -> LocalData {
        let mut eps = 1;
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                eps *= hilbert_int(&entries[i], &entries[j], place);
            }
        }
        let d = entries.iter().fold(BigInt::one(), |a, x| a * x);
        let pos = entries.iter().filter(|x| x.is_positive()).count();
        LocalData { n: entries.len(), d, eps, pos, neg: entries.len() - pos }
    }

    pub fn isotropic(&self, place: &Place) -> bool {
        if *place == Place::Real {
            return self.pos > 0 && self.neg > 0;
        }
        match self.n {
            0 | 1 => false,
            2 => is_local_square(&-&self.d, place),
            3 => hilbert_int(&-BigInt::one(), &-&self.d, place) == self.eps,
            4 => !is_local_square(&self.d, place) || self.eps == hilbert_int(&-BigInt::one(), &-BigInt::one(), place),
            _ => true,
        }
    }

    /// Split off a hyperbolic plane (caller checked isotropy).
    fn split(&self, place: &Place) -> LocalData {
        LocalData {
            n: self.n - 2,
            d: -&self.d,
            eps: self.eps * hilbert_int(&-BigInt::one(), &-&self.d, place),
            pos: self.pos.saturating_sub(1),
            neg: self.neg.saturating_sub(1),
        }
    }

    pub fn witt_index(&self, place: &Place) -> usize {
        if *place == Place::Real {
            return self.pos.min(self.neg);
        }
        let mut l = self.clone();
        let mut w = 0;
        while l.isotropic(place) {
            l = l.split(place);
            w += 1;
        }
        w
    }
}

/// Real place plus 2 and the primes dividing some entry.
pub fn hasse_places(entries: &[BigInt]) -> Vec<Place> {
    let mut primes: Vec<BigInt> = vec![BigInt::from(2)];
    for e in entries {
        primes.extend(arith::prime_divisors(e));
    }
    primes.sort();
    primes.dedup();
    let mut v = vec![Place::Real];
    v.extend(primes.into_iter().map(Place::Prime));
    v
}

impl RatDiag {
    pub fn of(q: &QuadForm) -> Result<RatDiag> {
        let f = &q.field;
        let dg = q.diagonalize();
        let mut entries = Vec::new();
        let mut basis = Vec::new();
        for (a, row) in dg.entries.iter().zip(dg.basis) {
            let a = a.to_rational().unwrap();
            if a.is_zero() {
                return Err(Error::Degenerate("form is not regular".into()));
            }
            let nd = a.numer() * a.denom();
            let m = arith::squarefree(&nd);
            let k = arith::sqrt_exact(&(&nd / &m)).unwrap();
            let s = f.from_rational(&BigRational::new(a.denom().clone(), k)).unwrap();
            entries.push(m);
            basis.push(linalg::scale_vec(&s, &row));
        }
        Ok(RatDiag { entries, basis })
    }

    pub fn from_entries(entries: Vec<BigInt>) -> RatDiag {
        RatDiag { entries, basis: Vec::new() }
    }

    pub fn places(&self) -> Vec<Place> {
        hasse_places(&self.entries)
    }

    pub fn local(&self, place: &Place) -> LocalData {
        LocalData::of(&self.entries, place)
    }

    pub fn det_class(&self) -> BigInt {
        arith::squarefree(&self.entries.iter().fold(BigInt::one(), |a, x| a * x))
    }

    pub fn signature(&self) -> (usize, usize) {
        let pos = self.entries.iter().filter(|x| x.is_positive()).count();
        (pos, self.entries.len() - pos)
    }

    /// Global Witt index: the minimum of the local indices, with the binary
    /// case decided globally.
    pub fn witt_index(&self) -> usize {
        let places = self.places();
        let mut locals: Vec<LocalData> = places.iter().map(|p| self.local(p)).collect();
        let mut m = self.entries.len();
        let mut d = self.entries.iter().fold(BigInt::one(), |a, x| a * x);
        let mut w = 0;
        while m >= 2 {
            let iso = if m == 2 {
                arith::squarefree(&-&d).is_one()
            } else {
                locals.iter().zip(&places).all(|(l, p)| l.isotropic(p))
            };
            if !iso {
                break;
            }
            locals = locals.iter().zip(&places).map(|(l, p)| l.split(p)).collect();
            w += 1;
            m -= 2;
            d = -d;
        }
        w
    }

    pub fn isometric(&self, other: &RatDiag) -> bool {
        if self.entries.len() != other.entries.len()
            || self.det_class() != other.det_class()
            || self.signature() != other.signature()
        {
            return false;
        }
        let mut all = self.entries.clone();
        all.extend(other.entries.iter().cloned());
        hasse_places(&all).iter().all(|p| self.local(p).eps == other.local(p).eps)
    }
}

/// Square classes c that could make c*a isometric to b: products of subsets of
/// {-1} and the primes dividing 2 and the entries of either form. A prime
/// outside this set at which c has odd valuation would move one unimodular
/// Jordan component to a p-modular one, which no isometry can undo.
pub(crate) fn similarity_candidates(a: &RatDiag, b: &RatDiag) -> Vec<BigInt> {
    let mut all = a.entries.clone();
    all.extend(b.entries.iter().cloned());
    let mut gens: Vec<BigInt> = vec![-BigInt::one()];
    for p in hasse_places(&all) {
        if let Place::Prime(p) = p {
            gens.push(p);
        }
    }
    let mut out = subset_products(&gens, 1 << 14);
    sort_classes(&mut out);
    out
}

fn subset_products(gens: &[BigInt], cap: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    for g in gens {
        if out.len() * 2 > cap {
            break;
        }
        let more: Vec<BigInt> = out.iter().map(|x| x * g).collect();
        out.extend(more);
    }
    out
}

fn sort_classes(v: &mut [BigInt]) {
    v.sort_by(|x, y| x.abs().cmp(&y.abs()).then(x.cmp(y)));
}

pub(crate) fn quadratic_ext_isotropy(q: &QuadForm, d: &BigInt) -> Result<bool> {
    if d.is_zero() || arith::squarefree(d).is_one() {
        return invalid(format!("{d} is a rational square"));
    }
    let d = arith::squarefree(d);
    let rd = RatDiag::of(q)?;
    let n = rd.entries.len();
    if n <= 1 {
        return Ok(false);
    }
    let det = rd.entries.iter().fold(BigInt::one(), |a, x| a * x);
    if n == 2 {
        let c = arith::squarefree(&-det);
        return Ok(c.is_one() || c == d);
    }
    if rd.witt_index() > 0 {
        return Ok(true);
    }
    let mut all = rd.entries.clone();
    all.push(d.clone());
    for place in hasse_places(&all) {
        if is_local_square(&d, &place) {
            if !rd.local(&place).isotropic(&place) {
                return Ok(false);
            }
            continue;
        }
        // q contains a local copy of a<1,-d>
        let ok = local_square_classes(&place).iter().any(|a| {
            let mut e = rd.entries.clone();
            e.push(-a);
            e.push(a * &d);
            LocalData::of(&e, &place).witt_index(&place) >= 2
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn isqrt_u128(n: u128) -> Option<u128> {
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Search x in Z^(k-1) by max-norm shells, solving for the last coordinate.
/// Returns rational coordinates (numerators with common denominator |m_k|).
fn shell_search(m: &[i128], height: u64, budget: &mut u64) -> Option<Vec<(i128, i128)>> {
    let k = m.len();
    let r = k - 1;
    let mk = m[r];
    let mut x = vec![0i128; r];
    for h in 1..=height as i128 {
        // j = first coordinate with |x_j| = h
        for j in 0..r {
            for sign in [1i128, -1] {
                // odometer over coords before j in [-(h-1), h-1], after j in [-h, h]
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = if i < j { -(h - 1) } else { -h };
                }
                x[j] = sign * h;
                loop {
                    if *budget == 0 {
                        return None;
                    }
                    *budget -= 1;
                    let s: i128 = m[..r].iter().zip(&x).map(|(a, b)| a * b * b).sum();
                    let nn = -s;
                    // x_k^2 = nn / mk, rational square iff nn * mk is a square
                    let prod = nn.checked_mul(mk)?;
                    if prod >= 0 {
                        if let Some(root) = isqrt_u128(prod as u128) {
                            let mut out: Vec<(i128, i128)> = x.iter().map(|&v| (v * mk.abs(), mk.abs())).collect();
                            out.push((root as i128, mk.abs()));
                            return Some(out);
                        }
                    }
                    // advance odometer, skipping j
                    let mut i = 0;
                    loop {
                        if i == r {
                            break;
                        }
                        if i == j {
                            i += 1;
                            continue;
                        }
                        let hi = if i < j { h - 1 } else { h };
                        if x[i] < hi {
                            x[i] += 1;
                            break;
                        }
                        x[i] = -hi;
                        i += 1;
                    }
                    if i == r {
                        break;
                    }
                }
            }
        }
    }
    None
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub(crate) fn isotropic_vector(q: &QuadForm, height_bound: u64) -> Result<Vector> {
    let f = &q.field;
    let n = q.dim();
    let dg = q.diagonalize();
    if let Some(i) = dg.entries.iter().position(Elem::is_zero) {
        return Ok(dg.basis[i].clone());
    }
    let rd = RatDiag::of(q)?;
    let limit = BigInt::from(1u64 << 40);
    if rd.entries.iter().any(|e| e.abs() > limit) || height_bound > 1_000_000 {
        return Err(Error::NotFound("coefficients too large for the bounded search".into()));
    }
    let m: Vec<i128> = rd.entries.iter().map(|e| e.to_i128().unwrap()).collect();
    let mut budget = MAX_SEARCH_POINTS;
    for k in 2..=n.min(5) {
        for sub in subsets(n, k) {
            let ents: Vec<BigInt> = sub.iter().map(|&i| rd.entries[i].clone()).collect();
            if RatDiag::from_entries(ents).witt_index() == 0 {
                continue;
            }
            let ms: Vec<i128> = sub.iter().map(|&i| m[i]).collect();
            if let Some(sol) = shell_search(&ms, height_bound, &mut budget) {
                let mut coeffs = vec![f.zero(); n];
                for (&i, (num, den)) in sub.iter().zip(sol) {
                    coeffs[i] = f.from_rational(&BigRational::new(num.into(), den.into())).unwrap();
                }
                let v = linalg::combine(f, n, &coeffs, &rd.basis);
                debug_assert!(q.eval(&v).is_zero());
                return Ok(v);
            }
            if budget == 0 {
                return Err(Error::NotFound("search budget exhausted".into()));
            }
        }
    }
    Err(Error::NotFound(format!("no isotropic vector up to height {height_bound}")))
}

pub(crate) fn pfister_slots(p: &PfisterForm, height_bound: u64) -> Result<Vec<Elem>> {
    let f = &p.form.field;
    if !matches!(f, Field::Rational) {
        return Err(Error::Unsupported("slot search is implemented over Q".into()));
    }
    if p.form.is_isotropic()? {
        return Ok(vec![f.one(); p.n]);
    }
    let rd = RatDiag::of(&p.form)?;
    let mut gens: Vec<BigInt> = vec![-BigInt::one(), BigInt::from(2)];
    for e in &rd.entries {
        gens.extend(arith::prime_divisors(e));
    }
    gens.sort();
    gens.dedup();
    let mut cands = subset_products(&gens, 1 << 12);
    cands.retain(|c| !c.is_one() && c.abs() <= BigInt::from(height_bound.max(2)));
    sort_classes(&mut cands);
    // p represents -a
    cands.retain(|a| {
        let mut e = rd.entries.clone();
        e.push(a.clone());
        RatDiag::from_entries(e).witt_index() > 0
    });
    let target = rd;
    let mut idx = vec![0usize; p.n];
    if cands.is_empty() {
        return Err(Error::NotFound("no slot candidates".into()));
    }
    let mut tries = 0u64;
    loop {
        tries += 1;
        if tries > 200_000 {
            return Err(Error::NotFound("slot search budget exhausted".into()));
        }
        let slots: Vec<Elem> = idx.iter().map(|&i| f.from_int(&cands[i])).collect();
        let cand = pfister_from_slots(f, &slots);
        if RatDiag::of(&cand)?.isometric(&target) {
            return Ok(slots);
        }
        // next non-decreasing tuple
        let mut i = p.n;
        loop {
            if i == 0 {
                return Err(Error::NotFound("no slots among the candidates".into()));
            }
            i -= 1;
            if idx[i] + 1 < cands.len() {
                idx[i] += 1;
                for j in (i + 1)..p.n {
                    idx[j] = idx[i];
                }
                break;
            }
        }
    }
}
