//! Etale subalgebras: etaleness, biquadratic Galois groups, neatness and
//! the search for neat biquadratic subalgebras of symmetric elements.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{normalize_quadratic, Algebra, Provenance};
use crate::error::{invalid, Error, Result};
use crate::field::Elem;
use crate::involution::{InvProvenance, Involution};
use crate::linalg::{self, Vector};

/// A commutative subalgebra given by a basis containing 1 in its span.
#[derive(Clone, Debug)]
pub struct EtaleSub {
    pub basis: Vec<Vector>,
    pub idempotents: Vec<Vector>,
}

/// A biquadratic etale subalgebra with its Galois group.
///
/// `gens[0]`, `gens[1]` are normalized quadratic generators: k^2 in F
/// (characteristic not 2) or k^2 = k + c (characteristic 2). The
/// automorphism gamma_i fixes K_i = F[k_i] with k_3 = k_1 k_2 or k_1 + k_2.
#[derive(Clone, Debug)]
pub struct Biquadratic {
    pub basis: Vec<Vector>,
    pub gens: [Vector; 2],
    pub fixed_gens: [Vector; 3],
    pub idempotents: Vec<Vector>,
    prod: Vec<Vector>,
}

/// Is span(basis) a commutative subalgebra with nondegenerate trace form?
pub fn is_etale(a: &Algebra, basis: &[Vector]) -> Result<bool> {
    let f = &a.field;
    let basis = linalg::span_basis(basis, a.dim());
    for x in &basis {
        for y in &basis {
            if !linalg::is_zero_vec(&a.commutator(x, y)) {
                return invalid("subalgebra is not commutative");
            }
        }
    }
    if !a.is_subalgebra(&basis) {
        return invalid("span is not a subalgebra");
    }
    let k = basis.len();
    let trace = |x: &Vector| -> Result<Elem> {
        let m = crate::algebra::restrict(f, &basis, |v| a.mul(x, v))?;
        let mut t = f.zero();
        for (i, r) in m.iter().enumerate() {
            t = t + &r[i];
        }
        Ok(t)
    };
    let mut gram = vec![vec![f.zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = trace(&a.mul(&basis[i], &basis[j]))?;
        }
    }
    Ok(!linalg::det(f, &gram).is_zero())
}

/// x^2 in F + F x with x not in F.
pub fn is_quadratic(a: &Algebra, x: &[Elem]) -> bool {
    if a.as_scalar(x).is_some() {
        return false;
    }
    let basis = vec![a.unit().clone(), x.to_vec()];
    linalg::in_span(&a.field, &basis, &a.square(x))
}

/// Normalized generator of the etale algebra F[x] for a quadratic x.
pub fn normalize_generator(a: &Algebra, x: &[Elem]) -> Result<Option<(Vector, Elem)>> {
    let (k, c) = normalize_quadratic(a, x).or_else(|e| match e {
        Error::Invalid(_) => Ok((Vec::new(), a.field.zero())),
        e => Err(e),
    })?;
    if k.is_empty() {
        return Ok(None);
    }
    Ok(Some((k, c)))
}

/// Idempotent e in F[k] with e != 0, 1 when F[k] is split.
fn split_idempotent(a: &Algebra, k: &[Elem], c: &Elem) -> Option<Vector> {
    let f = &a.field;
    if f.is_char2() {
        let r = f.artin_schreier_root(c)?;
        Some(linalg::add_vec(k, &a.scalar(&r)))
    } else {
        let r = f.sqrt(c)?;
        let half = f.from_i64(2).inv().unwrap();
        let kr = linalg::scale_vec(&r.inv().unwrap(), k);
        Some(linalg::scale_vec(&half, &linalg::add_vec(a.unit(), &kr)))
    }
}

/// Primitive idempotents of the etale algebra generated by normalized
/// quadratic generators (all of its quadratic subalgebras must be listed).
fn primitive_idempotents(a: &Algebra, quads: &[(Vector, Elem)]) -> Vec<Vector> {
    let mut es = vec![a.unit().clone()];
    for (k, c) in quads {
        if let Some(e) = split_idempotent(a, k, c) {
            let e2 = linalg::sub_vec(a.unit(), &e);
            let mut next = Vec::new();
            for x in &es {
                for y in [&e, &e2] {
                    let p = a.mul(x, y);
                    if !linalg::is_zero_vec(&p) && !next.contains(&p) {
                        next.push(p);
                    }
                }
            }
            es = next;
        }
    }
    es
}

impl EtaleSub {
    /// Quadratic etale subalgebra F[x].
    pub fn quadratic(a: &Algebra, x: &[Elem]) -> Result<EtaleSub> {
        let (k, c) = normalize_generator(a, x)?.ok_or_else(|| Error::Invalid("generator is not separable quadratic".into()))?;
        let basis = linalg::span_basis(&[a.unit().clone(), k.clone()], a.dim());
        if !is_etale(a, &basis)? {
            return invalid("quadratic subalgebra is not etale");
        }
        let idempotents = primitive_idempotents(a, &[(k, c)]);
        Ok(EtaleSub { basis, idempotents })
    }
}

impl Biquadratic {
    /// Biquadratic algebra F[x, y] from commuting quadratic elements.
    pub fn from_quadratic_gens(a: &Algebra, x: &[Elem], y: &[Elem]) -> Result<Biquadratic> {
        let f = &a.field;
        if !linalg::is_zero_vec(&a.commutator(x, y)) {
            return invalid("generators do not commute");
        }
        let (k1, c1) = normalize_generator(a, x)?.ok_or_else(|| Error::Invalid("first generator is not separable quadratic".into()))?;
        let (k2, c2) = normalize_generator(a, y)?.ok_or_else(|| Error::Invalid("second generator is not separable quadratic".into()))?;
        let k12 = a.mul(&k1, &k2);
        let prod = vec![a.unit().clone(), k1.clone(), k2.clone(), k12.clone()];
        if linalg::rank(&prod, a.dim()) != 4 {
            return invalid("generators span a subalgebra of dimension below 4");
        }
        let basis = linalg::span_basis(&prod, a.dim());
        if !is_etale(a, &basis)? {
            return invalid("subalgebra is not etale");
        }
        let k3 = if f.is_char2() { linalg::add_vec(&k1, &k2) } else { k12.clone() };
        let (_, c3) = normalize_quadratic(a, &k3)?;
        let idempotents = primitive_idempotents(a, &[(k1.clone(), c1), (k2.clone(), c2), (k3.clone(), c3)]);
        Ok(Biquadratic { basis, gens: [k1.clone(), k2.clone()], fixed_gens: [k1, k2, k3], idempotents, prod })
    }

    /// Galois data for a 4-dimensional etale subalgebra given by any spanning
    /// set: finds one quadratic subalgebra by a bounded search, then the
    /// others by solving a binary quadratic equation exactly.
    pub fn galois(a: &Algebra, span: &[Vector], height: i64) -> Result<Biquadratic> {
        let basis = linalg::span_basis(&[vec![a.unit().clone()], span.to_vec()].concat(), a.dim());
        if basis.len() != 4 {
            return invalid("algebra is not 4-dimensional");
        }
        if !is_etale(a, &basis)? {
            return invalid("algebra is not etale");
        }
        let k = find_quadratic_in(a, &basis, height)?;
        let (k, _) = normalize_generator(a, &k)?.ok_or_else(|| Error::Consistency("quadratic element is inseparable".into()))?;
        let y = second_quadratic(a, &basis, &k)?.ok_or_else(|| Error::Invalid("not biquadratic: only one quadratic subalgebra".into()))?;
        Biquadratic::from_quadratic_gens(a, &k, &y)
    }

    pub fn dim(&self) -> usize {
        4
    }

    /// gamma_i for i in 1..=3 applied to an element of L.
    pub fn gamma(&self, a: &Algebra, i: usize, x: &[Elem]) -> Result<Vector> {
        let f = &a.field;
        let c = linalg::coords_in(f, &self.prod, x).ok_or_else(|| Error::Invalid("element is not in L".into()))?;
        let flip = |k: &Vector| -> Vector {
            if f.is_char2() {
                linalg::add_vec(k, a.unit())
            } else {
                linalg::neg_vec(k)
            }
        };
        let (g1, g2) = match i {
            1 => (self.gens[0].clone(), flip(&self.gens[1])),
            2 => (flip(&self.gens[0]), self.gens[1].clone()),
            3 => (flip(&self.gens[0]), flip(&self.gens[1])),
            _ => return invalid("Galois index must be 1, 2 or 3"),
        };
        let imgs = [a.unit().clone(), g1.clone(), g2.clone(), a.mul(&g1, &g2)];
        Ok(linalg::combine(f, a.dim(), &c, &imgs))
    }

    /// Basis (1, k_i) of the fixed algebra of gamma_i.
    pub fn fixed(&self, a: &Algebra, i: usize) -> [Vector; 2] {
        [a.unit().clone(), self.fixed_gens[i - 1].clone()]
    }

    /// s_i(a + b k_i) = b; for characteristic 2 this is the trace.
    pub fn s_functional(&self, a: &Algebra, i: usize, x: &[Elem]) -> Result<Elem> {
        let basis = self.fixed(a, i);
        let c = linalg::coords_in(&a.field, &basis, x).ok_or_else(|| Error::Consistency(format!("element is not in the fixed algebra of gamma_{i}")))?;
        Ok(c[1].clone())
    }

    /// The biquadratic algebra with the roles of the three quadratic
    /// subalgebras permuted so that K_1 is the given one (1-based).
    pub fn reorder(&self, a: &Algebra, first: usize) -> Result<Biquadratic> {
        let others: Vec<usize> = (1..=3).filter(|&j| j != first).collect();
        Biquadratic::from_quadratic_gens(a, &self.fixed_gens[first - 1], &self.fixed_gens[others[0] - 1])
    }
}

// L is free of rank 2 over F[k]
fn rank_two_over(a: &Algebra, basis: &[Vector], k: &[Elem]) -> bool {
    let Ok(Some((k, c))) = normalize_generator(a, k) else { return false };
    let kb = vec![a.unit().clone(), k.clone()];
    let idem = primitive_idempotents(a, &[(k, c)]);
    idem.iter().all(|e| {
        let el: Vec<Vector> = basis.iter().map(|b| a.mul(e, b)).collect();
        let ek: Vec<Vector> = kb.iter().map(|b| a.mul(e, b)).collect();
        linalg::rank(&el, a.dim()) == 2 * linalg::rank(&ek, a.dim())
    })
}

fn find_quadratic_in(a: &Algebra, basis: &[Vector], height: i64) -> Result<Vector> {
    let f = &a.field;
    let n = a.dim();
    let good = |x: &Vector| is_quadratic(a, x) && rank_two_over(a, basis, x);
    for b in basis {
        if good(b) {
            return Ok(b.clone());
        }
    }
    // small integer combinations in increasing height
    let k = basis.len();
    let h = height.clamp(1, 6);
    let mut coeffs = vec![-h; k];
    loop {
        let c: Vec<Elem> = coeffs.iter().map(|&x| f.from_i64(x)).collect();
        let x = linalg::combine(f, n, &c, basis);
        if good(&x) {
            return Ok(x);
        }
        let mut i = 0;
        loop {
            if i == k {
                return Err(Error::NotFound("no quadratic element found in the subalgebra".into()));
            }
            coeffs[i] += 1;
            if coeffs[i] <= h {
                break;
            }
            coeffs[i] = -h;
            i += 1;
        }
    }
}

// A quadratic element of L outside F[k], or None when none exists.
fn second_quadratic(a: &Algebra, basis: &[Vector], k: &[Elem]) -> Result<Option<Vector>> {
    let f = &a.field;
    let n = a.dim();
    let kbasis = vec![a.unit().clone(), k.to_vec()];
    // gamma_K: the nontrivial F[k]-automorphism of L. Pick y0 outside F[k].
    let mut tries: Vec<Vector> = basis.to_vec();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            tries.push(linalg::add_vec(&basis[i], &basis[j]));
        }
    }
    tries.push(basis.iter().fold(a.zero(), |s, b| linalg::add_vec(&s, b)));
    let frame = |y: &Vector| vec![a.unit().clone(), k.to_vec(), y.clone(), a.mul(k, y)];
    let y0 = tries
        .into_iter()
        .find(|y| linalg::rank(&frame(y), n) == 4)
        .ok_or_else(|| Error::Consistency("no F[k]-basis of L found".into()))?;
    let lb = frame(&y0);
    // y0^2 = alpha + beta y0 with alpha, beta in F[k]
    let sq = linalg::coords_in(f, &lb, &a.square(&y0)).ok_or_else(|| Error::Consistency("L is not closed".into()))?;
    let beta = linalg::add_vec(&linalg::scale_vec(&sq[2], a.unit()), &linalg::scale_vec(&sq[3], k));
    if f.is_char2() {
        // y with gamma(y) = y + 1: y = y0 / beta' where gamma(y0) = beta - y0
        let binv = match a.inverse(&beta) {
            crate::algebra::Inverse::Unit(b) => b,
            crate::algebra::Inverse::Singular(_) => return Err(Error::Consistency("L is not etale over F[k]".into())),
        };
        let y = a.mul(&binv, &y0);
        // m = y^2 + y in F[k]; adjust by c1 k with c1^2 + c1 = m_1
        let m = linalg::add_vec(&a.square(&y), &y);
        let mc = linalg::coords_in(f, &kbasis, &m).ok_or_else(|| Error::Consistency("y^2 + y outside F[k]".into()))?;
        return Ok(f.artin_schreier_root(&mc[1]).map(|c1| linalg::add_vec(&y, &linalg::scale_vec(&c1, k))));
    }
    // characteristic not 2: K^- = {x : gamma(x) = -x} = span(z, z k) with z = y0 - beta/2
    let half = f.from_i64(2).inv().unwrap();
    let z = linalg::sub_vec(&y0, &linalg::scale_vec(&half, &beta));
    let zk = a.mul(&z, k);
    // (p z + q z k)^2 = Q0 + Q1 k; find (p : q) with Q1 = 0
    let part = |x: &Vector| -> Result<Elem> {
        let cc = linalg::coords_in(f, &kbasis, x).ok_or_else(|| Error::Consistency("square outside F[k]".into()))?;
        Ok(cc[1].clone())
    };
    let a11 = part(&a.square(&z))?;
    let a22 = part(&a.square(&zk))?;
    let a12 = part(&linalg::add_vec(&a.mul(&z, &zk), &a.mul(&zk, &z)))?;
    // a11 p^2 + a12 p q + a22 q^2 = 0
    let cand = if a11.is_zero() {
        Some(z.clone())
    } else {
        f.solve_quadratic(&a11, &a12, &a22).map(|t| linalg::add_vec(&linalg::scale_vec(&t, &z), &zk))
    };
    Ok(cand.filter(|x| is_quadratic(a, x)))
}

impl Biquadratic {
    /// Neat in (A, sigma): symmetric, etale and A free over L.
    pub fn is_neat(&self, s: &Involution) -> Result<bool> {
        let a = &s.algebra;
        for b in &self.basis {
            if !s.is_symmetric(b) {
                return invalid("L is not contained in Symm");
            }
        }
        Ok(free_over(a, &self.basis, &self.idempotents))
    }
}

impl EtaleSub {
    pub fn is_neat(&self, s: &Involution) -> Result<bool> {
        let a = &s.algebra;
        for b in &self.basis {
            if !s.is_symmetric(b) {
                return invalid("subalgebra is not contained in Symm");
            }
        }
        Ok(free_over(a, &self.basis, &self.idempotents))
    }
}

// dim(e A) / dim(e S) equal for all primitive idempotents e of S
fn free_over(a: &Algebra, sbasis: &[Vector], idem: &[Vector]) -> bool {
    let mut ratio: Option<(usize, usize)> = None;
    for e in idem {
        let ea: Vec<Vector> = (0..a.dim()).map(|i| a.mul(e, &a.basis(i))).collect();
        let es: Vec<Vector> = sbasis.iter().map(|b| a.mul(e, b)).collect();
        let (da, ds) = (linalg::rank(&ea, a.dim()), linalg::rank(&es, a.dim()));
        if ds == 0 || da % ds != 0 {
            return false;
        }
        match ratio {
            None => ratio = Some((da, ds)),
            Some((pa, ps)) => {
                if pa * ds != da * ps {
                    return false;
                }
            }
        }
    }
    true
}

/// Quadratic elements of one tensor factor, used to build candidates.
fn factor_candidates(alg: &Arc<Algebra>) -> Vec<Vector> {
    let f = &alg.field;
    match &alg.provenance {
        Provenance::Quaternion { .. } => (1..4).map(|i| alg.basis(i)).collect(),
        Provenance::Etale { .. } => vec![alg.basis(1)],
        Provenance::Matrix { n } => {
            let n = *n;
            let mut out = Vec::new();
            // diagonal idempotents and sign matrices
            for mask in 1..(1u32 << n) - 1 {
                let mut e = alg.zero();
                let mut sgn = alg.zero();
                for i in 0..n {
                    let on = mask >> i & 1 == 1;
                    if on {
                        e[i * n + i] = f.one();
                    }
                    sgn[i * n + i] = if on { f.one() } else { -f.one() };
                }
                out.push(e);
                if !f.is_char2() && mask & 1 == 1 {
                    out.push(sgn);
                }
            }
            out
        }
        Provenance::Double { base } => {
            let inner = factor_candidates(base);
            inner.into_iter().map(|x| [x.clone(), x].concat()).collect()
        }
        _ => Vec::new(),
    }
}

/// Candidate quadratic symmetric elements from construction data.
pub fn provenance_candidates(s: &Involution) -> Vec<Vector> {
    let a = &s.algebra;
    let f = &a.field;
    let factors: Vec<Arc<Algebra>> = match &s.provenance {
        InvProvenance::Tensor(fs) => fs.iter().map(|x| x.algebra.clone()).collect(),
        _ => vec![a.clone()],
    };
    let mut per: Vec<Vec<Vector>> = Vec::new();
    for (i, fa) in factors.iter().enumerate() {
        let mut c = vec![fa.unit().clone()];
        c.extend(factor_candidates(fa));
        per.push(c.into_iter().map(|x| if factors.len() == 1 { x } else { a.embed_factor(&factors, i, &x) }).collect());
    }
    // products of one element per factor (characteristic not 2), sums of
    // two embedded elements (characteristic 2)
    let mut out: Vec<Vector> = Vec::new();
    let mut push = |x: Vector| {
        if is_quadratic(a, &x) && s.is_symmetric(&x) && !out.contains(&x) {
            out.push(x);
        }
    };
    let mut idx = vec![0usize; per.len()];
    'outer: loop {
        let mut x = a.unit().clone();
        for (j, &i) in idx.iter().enumerate() {
            if i != 0 {
                x = a.mul(&x, &per[j][i]);
            }
        }
        push(x);
        let mut j = 0;
        loop {
            if j == per.len() {
                break 'outer;
            }
            idx[j] += 1;
            if idx[j] < per[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
    if f.is_char2() {
        let flat: Vec<Vector> = per.iter().flat_map(|p| p.iter().skip(1).cloned()).collect();
        for i in 0..flat.len() {
            for j in i + 1..flat.len() {
                push(linalg::add_vec(&flat[i], &flat[j]));
            }
        }
    }
    out
}

/// Search for neat biquadratic subalgebras of (A, sigma) of capacity 4.
/// Returns up to `count` distinct ones; order depends on `seed` only.
pub fn find_neat_biquadratics(s: &Involution, height: i64, seed: u64, count: usize) -> Result<Vec<Biquadratic>> {
    if s.class.capacity != 4 {
        return Err(Error::Capacity(s.class.capacity));
    }
    s.require_symd_gate()?;
    let a = &s.algebra;
    let f = &a.field;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = provenance_candidates(s);
    pool.shuffle(&mut rng);
    // random symmetric elements that happen to be quadratic
    let symm = &s.spaces.symm;
    for _ in 0..(height.max(1) as usize).min(400) {
        let x = linalg::random_combination(f, &mut rng, symm, a.dim(), 2);
        if is_quadratic(a, &x) && !pool.contains(&x) {
            pool.push(x);
        }
    }
    let mut found: Vec<Biquadratic> = Vec::new();
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let (x, y) = (&pool[i], &pool[j]);
            if !linalg::is_zero_vec(&a.commutator(x, y)) {
                continue;
            }
            let Ok(l) = Biquadratic::from_quadratic_gens(a, x, y) else { continue };
            if found.iter().any(|m| m.basis == l.basis) {
                continue;
            }
            if l.is_neat(s)? {
                found.push(l);
                if found.len() >= count {
                    return Ok(found);
                }
            }
        }
    }
    if found.is_empty() {
        Err(Error::NotFound("no neat biquadratic subalgebra within the search budget".into()))
    } else {
        Ok(found)
    }
}

pub fn find_neat_biquadratic(s: &Involution, height: i64, seed: u64) -> Result<Biquadratic> {
    Ok(find_neat_biquadratics(s, height, seed, 1)?.remove(0))
}
