//! Finite-dimensional associative algebras given by structure constants.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::{self, Matrix, Vector};

/// How an algebra was built. Later stages read this to find splitting data,
/// candidate square roots and formula shapes.
#[derive(Clone, Debug)]
pub enum Provenance {
    /// Quaternion algebra on 1, u, v, uv with u^2 = a, v^2 = b, uv + vu = t
    /// (t = 0, or t = 1 in characteristic 2).
    Quaternion { a: Elem, b: Elem },
    Matrix { n: usize },
    /// F[z] with z^2 = d (or z^2 = z + d in characteristic 2).
    Etale { d: Elem },
    Double { base: Arc<Algebra> },
    Tensor(Vec<Arc<Algebra>>),
    Raw,
}

#[derive(Clone, Debug)]
pub struct Algebra {
    pub field: Field,
    dim: usize,
    // table[i][j]: sparse expansion of e_i e_j
    table: Vec<Vec<Vec<(usize, Elem)>>>,
    unit: Vector,
    pub labels: Vec<String>,
    pub provenance: Provenance,
}

/// Outcome of inverting an element.
#[derive(Clone, Debug)]
pub enum Inverse {
    Unit(Vector),
    /// Nonzero y with x y = 0.
    Singular(Vector),
}

fn sparse(v: &[Elem]) -> Vec<(usize, Elem)> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

impl Algebra {
    fn build(field: &Field, dim: usize, table: Vec<Vec<Vec<(usize, Elem)>>>, unit: Vector, labels: Vec<String>, provenance: Provenance) -> Algebra {
        Algebra { field: field.clone(), dim, table, unit, labels, provenance }
    }

    /// Quaternion algebra (a, b). In characteristic 2 the relations are
    /// u^2 = a, v^2 = b, uv + vu = 1.
    pub fn quaternion(field: &Field, a: &Elem, b: &Elem) -> Result<Algebra> {
        if a.is_zero() || b.is_zero() {
            return invalid("quaternion parameters must be nonzero");
        }
        let f = field;
        let t = if f.is_char2() { f.one() } else { f.zero() };
        let ab = a * b;
        // basis 0 = 1, 1 = u, 2 = v, 3 = uv
        let mut m = vec![vec![vec![f.zero(); 4]; 4]; 4];
        for i in 0..4 {
            m[0][i][i] = f.one();
            m[i][0][i] = f.one();
        }
        m[1][1][0] = a.clone();
        m[2][2][0] = b.clone();
        m[1][2][3] = f.one();
        m[2][1][0] = t.clone();
        m[2][1][3] = -f.one();
        m[1][3][2] = a.clone();
        m[3][1][1] = t.clone();
        m[3][1][2] = -a;
        m[2][3][2] = t.clone();
        m[2][3][1] = -b;
        m[3][2][1] = b.clone();
        m[3][3][3] = t.clone();
        m[3][3][0] = -ab;
        let table = m.iter().map(|r| r.iter().map(|v| sparse(v)).collect()).collect();
        let alg = Algebra::build(
            f,
            4,
            table,
            linalg::unit_vec(f, 4, 0),
            ["1", "u", "v", "uv"].iter().map(|s| s.to_string()).collect(),
            Provenance::Quaternion { a: a.clone(), b: b.clone() },
        );
        alg.check_axioms()?;
        Ok(alg)
    }

    /// M_n(F) on matrix units e_ij (index i*n + j).
    pub fn matrix(field: &Field, n: usize) -> Result<Algebra> {
        if n == 0 {
            return invalid("matrix size must be positive");
        }
        let dim = n * n;
        let mut table = vec![vec![Vec::new(); dim]; dim];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    table[i * n + j][j * n + l] = vec![(i * n + l, field.one())];
                }
            }
        }
        let mut unit = linalg::zero_vec(field, dim);
        for i in 0..n {
            unit[i * n + i] = field.one();
        }
        let labels = (0..dim).map(|k| format!("e{}{}", k / n + 1, k % n + 1)).collect();
        let alg = Algebra::build(field, dim, table, unit, labels, Provenance::Matrix { n });
        if n <= 3 {
            alg.check_axioms()?;
        }
        Ok(alg)
    }

    /// Quadratic etale algebra F[z], z^2 = d (char not 2) or z^2 = z + d (char 2).
    pub fn etale(field: &Field, d: &Elem) -> Result<Algebra> {
        let f = field;
        let mut table = vec![vec![Vec::new(); 2]; 2];
        table[0][0] = vec![(0, f.one())];
        table[0][1] = vec![(1, f.one())];
        table[1][0] = vec![(1, f.one())];
        if f.is_char2() {
            table[1][1] = sparse(&[d.clone(), f.one()]);
        } else {
            if d.is_zero() {
                return invalid("F[z]/(z^2) is not etale");
            }
            table[1][1] = sparse(&[d.clone(), f.zero()]);
        }
        let alg = Algebra::build(f, 2, table, linalg::unit_vec(f, 2, 0), vec!["1".into(), "z".into()], Provenance::Etale { d: d.clone() });
        Ok(alg)
    }

    /// A0 x A0^op with componentwise operations.
    pub fn double(base: &Arc<Algebra>) -> Algebra {
        let n = base.dim;
        let f = &base.field;
        let mut table = vec![vec![Vec::new(); 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                table[i][j] = base.table[i][j].clone();
                table[n + i][n + j] = base.table[j][i].iter().map(|(k, c)| (n + k, c.clone())).collect();
            }
        }
        let mut unit = base.unit.clone();
        unit.extend(base.unit.iter().cloned());
        let mut labels: Vec<String> = base.labels.iter().map(|l| format!("({l},0)")).collect();
        labels.extend(base.labels.iter().map(|l| format!("(0,{l})")));
        Algebra::build(f, 2 * n, table, unit, labels, Provenance::Double { base: base.clone() })
    }

    pub fn tensor(a: &Arc<Algebra>, b: &Arc<Algebra>) -> Result<Algebra> {
        if a.field != b.field {
            return Err(Error::FieldMismatch);
        }
        let f = &a.field;
        let (n, m) = (a.dim, b.dim);
        let mut table = vec![vec![Vec::new(); n * m]; n * m];
        for i in 0..n {
            for j in 0..m {
                for k in 0..n {
                    for l in 0..m {
                        let mut out = Vec::new();
                        for (p, c) in &a.table[i][k] {
                            for (q, d) in &b.table[j][l] {
                                out.push((p * m + q, c * d));
                            }
                        }
                        table[i * m + j][k * m + l] = out;
                    }
                }
            }
        }
        let mut unit = linalg::zero_vec(f, n * m);
        for i in 0..n {
            for j in 0..m {
                if !a.unit[i].is_zero() && !b.unit[j].is_zero() {
                    unit[i * m + j] = &a.unit[i] * &b.unit[j];
                }
            }
        }
        let mut labels = Vec::with_capacity(n * m);
        for la in &a.labels {
            for lb in &b.labels {
                labels.push(format!("{la}⊗{lb}"));
            }
        }
        let mut factors = a.factors();
        factors.extend(b.factors());
        Ok(Algebra::build(f, n * m, table, unit, labels, Provenance::Tensor(factors)))
    }

    /// Structure constants mult[i][j] = coordinates of e_i e_j.
    pub fn raw(field: &Field, mult: Vec<Vec<Vector>>, unit: Vector) -> Result<Algebra> {
        let dim = unit.len();
        if mult.len() != dim || mult.iter().any(|r| r.len() != dim || r.iter().any(|v| v.len() != dim)) {
            return invalid("structure constants must be dim x dim x dim");
        }
        let table = mult.iter().map(|r| r.iter().map(|v| sparse(v)).collect()).collect();
        let labels = (0..dim).map(|i| format!("e{i}")).collect();
        let alg = Algebra::build(field, dim, table, unit, labels, Provenance::Raw);
        alg.check_axioms()?;
        Ok(alg)
    }

    /// Associativity on basis triples and two-sided unit.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            let e = self.basis(i);
            if self.mul(&self.unit, &e) != e || self.mul(&e, &self.unit) != e {
                return Err(Error::Invalid(format!("unit fails on basis element {i}")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let ij = self.basis_mul(i, j);
                for k in 0..n {
                    let left = self.mul(&ij, &self.basis(k));
                    let right = self.mul(&self.basis(i), &self.basis_mul(j, k));
                    if left != right {
                        return Err(Error::Invalid(format!("associativity fails on basis triple ({i},{j},{k})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> &Vector {
        &self.unit
    }

    pub fn zero(&self) -> Vector {
        linalg::zero_vec(&self.field, self.dim)
    }

    pub fn basis(&self, i: usize) -> Vector {
        linalg::unit_vec(&self.field, self.dim, i)
    }

    pub fn scalar(&self, c: &Elem) -> Vector {
        linalg::scale_vec(c, &self.unit)
    }

    /// c if x = c * 1.
    pub fn as_scalar(&self, x: &[Elem]) -> Option<Elem> {
        let i = self.unit.iter().position(|c| !c.is_zero())?;
        let c = x[i].div(&self.unit[i])?;
        (linalg::scale_vec(&c, &self.unit) == x).then_some(c)
    }

    pub fn basis_mul(&self, i: usize, j: usize) -> Vector {
        let mut v = self.zero();
        for (k, c) in &self.table[i][j] {
            v[*k] = &v[*k] + c;
        }
        v
    }

    pub fn mul(&self, x: &[Elem], y: &[Elem]) -> Vector {
        let mut r = self.zero();
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in &self.table[i][j] {
                    r[*k] = &r[*k] + &(&ab * c);
                }
            }
        }
        r
    }

    pub fn square(&self, x: &[Elem]) -> Vector {
        self.mul(x, x)
    }

    pub fn commutator(&self, x: &[Elem], y: &[Elem]) -> Vector {
        linalg::sub_vec(&self.mul(x, y), &self.mul(y, x))
    }

    /// Matrix of y -> x y (column j = x e_j).
    pub fn left_mult_matrix(&self, x: &[Elem]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim).map(|j| self.mul(x, &self.basis(j))).collect();
        linalg::transpose(&self.field, &cols, self.dim)
    }

    /// Matrix of y -> y x.
    pub fn right_mult_matrix(&self, x: &[Elem]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim).map(|j| self.mul(&self.basis(j), x)).collect();
        linalg::transpose(&self.field, &cols, self.dim)
    }

    /// Basis of {x : x s = s x for all s in gens}.
    pub fn centralizer(&self, gens: &[Vector]) -> Vec<Vector> {
        if gens.is_empty() {
            return linalg::identity(&self.field, self.dim);
        }
        let mut rows = Vec::new();
        for s in gens {
            let l = self.left_mult_matrix(s);
            let r = self.right_mult_matrix(s);
            // x s - s x = (R_s - L_s) x
            for (lr, rr) in l.iter().zip(&r) {
                rows.push(linalg::sub_vec(rr, lr));
            }
        }
        linalg::span_basis(&linalg::nullspace(&self.field, &rows, self.dim), self.dim)
    }

    pub fn center(&self) -> Vec<Vector> {
        let all: Vec<Vector> = (0..self.dim).map(|i| self.basis(i)).collect();
        self.centralizer(&all)
    }

    /// Two-sided inverse, or a nonzero right annihilator witness.
    pub fn inverse(&self, x: &[Elem]) -> Inverse {
        let l = self.left_mult_matrix(x);
        match linalg::solve(&self.field, &l, self.dim, &self.unit) {
            Some(y) => Inverse::Unit(y),
            None => Inverse::Singular(linalg::nullspace(&self.field, &l, self.dim).remove(0)),
        }
    }

    pub fn is_unit(&self, x: &[Elem]) -> bool {
        matches!(self.inverse(x), Inverse::Unit(_))
    }

    /// Multiplicatively closed span containing 1.
    pub fn is_subalgebra(&self, basis: &[Vector]) -> bool {
        let f = &self.field;
        if !linalg::in_span(f, basis, &self.unit) {
            return false;
        }
        let sb = linalg::span_basis(basis, self.dim);
        for x in basis {
            for y in basis {
                if !linalg::in_span(f, &sb, &self.mul(x, y)) {
                    return false;
                }
            }
        }
        true
    }

    /// Subalgebra generated by `gens`: canonical basis.
    pub fn generated(&self, gens: &[Vector]) -> Vec<Vector> {
        let mut basis = linalg::span_basis(&[vec![self.unit.clone()], gens.to_vec()].concat(), self.dim);
        loop {
            let mut more = basis.clone();
            for x in &basis {
                for g in gens {
                    more.push(self.mul(x, g));
                }
            }
            let nb = linalg::span_basis(&more, self.dim);
            if nb.len() == basis.len() {
                return nb;
            }
            basis = nb;
        }
    }

    /// Primitive tensor factors (the algebra itself when not a tensor product).
    pub fn factors(self: &Arc<Self>) -> Vec<Arc<Algebra>> {
        match &self.provenance {
            Provenance::Tensor(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Image of an element of factor `i` under the inclusion into the tensor
    /// product of `factors` (basis index in mixed radix, first factor slowest).
    pub fn embed_factor(&self, factors: &[Arc<Algebra>], i: usize, x: &[Elem]) -> Vector {
        let dims: Vec<usize> = factors.iter().map(|a| a.dim).collect();
        let mut v = self.zero();
        let total: usize = dims.iter().product();
        assert_eq!(total, self.dim);
        for idx in 0..total {
            // digits
            let mut rem = idx;
            let mut coeff = self.field.one();
            for k in (0..dims.len()).rev() {
                let d = rem % dims[k];
                rem /= dims[k];
                let c = if k == i { &x[d] } else { &factors[k].unit[d] };
                if c.is_zero() {
                    coeff = self.field.zero();
                    break;
                }
                coeff = &coeff * c;
            }
            v[idx] = coeff;
        }
        v
    }

    /// Reduced norm over the center. Central simple: the deg-th root of the
    /// characteristic polynomial of left multiplication. Quadratic center:
    /// computed on a component (split center) or after adjoining a square root
    /// of the center's discriminant (Q and multiquadratic fields), and
    /// returned as an element of the center.
    pub fn reduced_norm(&self, x: &[Elem]) -> Result<Vector> {
        let f = &self.field;
        let z = self.center();
        match z.len() {
            1 => {
                let deg = isqrt_exact(self.dim).ok_or_else(|| Error::Invalid("dimension is not a square".into()))?;
                let all: Vec<Vector> = (0..self.dim).map(|i| self.basis(i)).collect();
                let nrd = self.norm_on(f, &all, x, deg)?;
                Ok(self.scalar(&nrd))
            }
            2 => self.reduced_norm_quadratic_center(x, &z),
            c => Err(Error::Unsupported(format!("center of dimension {c}"))),
        }
    }

    // Nrd from L_x restricted to an invariant subspace of dimension k*deg.
    fn norm_on(&self, f: &Field, sub: &[Vector], x: &[Elem], deg: usize) -> Result<Elem> {
        let m = restrict(f, sub, |v| self.mul(x, v))?;
        let cp = linalg::charpoly(f, &m);
        let k = sub.len() / deg;
        let prd = poly_root(f, &cp, k)?;
        let c0 = prd[0].clone();
        Ok(if deg % 2 == 1 { -c0 } else { c0 })
    }

    fn reduced_norm_quadratic_center(&self, x: &[Elem], z: &[Vector]) -> Result<Vector> {
        let f = &self.field;
        let deg = isqrt_exact(self.dim / 2).ok_or_else(|| Error::Invalid("dimension is not 2 d^2".into()))?;
        // generator of Z with z^2 = delta (char not 2) or z^2 = z + delta (char 2)
        let zg = z.iter().find(|v| self.as_scalar(v).is_none()).unwrap().clone();
        let (zg, delta) = normalize_quadratic(self, &zg)?;
        // split center: idempotents
        let idem = if f.is_char2() {
            f.artin_schreier_root(&delta)
        } else {
            f.sqrt(&delta)
        };
        if let Some(r) = idem {
            // e = (1 + z/r)/2 or e = z + r (char 2)
            let e = if f.is_char2() {
                linalg::add_vec(&zg, &self.scalar(&r))
            } else {
                let half = f.from_i64(2).inv().unwrap();
                linalg::scale_vec(&half, &linalg::add_vec(&self.unit, &linalg::scale_vec(&r.inv().unwrap(), &zg)))
            };
            let e2 = linalg::sub_vec(&self.unit, &e);
            let mut out = self.zero();
            for idem in [&e, &e2] {
                let all: Vec<Vector> = (0..self.dim).map(|i| self.mul(idem, &self.basis(i))).collect();
                let sub = linalg::span_basis(&all, self.dim);
                let ex = self.mul(idem, x);
                let n = self.norm_on(f, &sub, &ex, deg)?;
                out = linalg::add_vec(&out, &linalg::scale_vec(&n, idem));
            }
            return Ok(out);
        }
        if f.is_char2() || matches!(f, Field::Finite(_)) {
            return Err(Error::Unsupported("reduced norm over a nonsplit center of a finite field".into()));
        }
        // adjoin sqrt(delta); on the eigenspace z = +sqrt(delta) the algebra is central simple
        let dq = delta.to_rational().ok_or_else(|| Error::Unsupported("center discriminant outside Q".into()))?;
        let dint = dq.numer() * dq.denom();
        let ext = f.extend_scalars(&crate::arith::squarefree(&dint))?;
        let g = &ext.field;
        let s = g.sqrt(&ext.embed(&delta)).ok_or_else(|| Error::Consistency("no square root after extension".into()))?;
        let lift = |v: &[Elem]| -> Vector { v.iter().map(|c| ext.embed(c)).collect() };
        let big = self.extend(&ext)?;
        let lz = big.left_mult_matrix(&lift(&zg));
        let shifted: Matrix =
            lz.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(j, c)| if i == j { c - &s } else { c.clone() }).collect()).collect();
        let eig = linalg::span_basis(&linalg::nullspace(g, &shifted, self.dim), self.dim);
        let n = big.norm_on(g, &eig, &lift(x), deg)?;
                let (a, b) = split_over(&n, &s)?;
        let a = pull(&a)?;
        let b = pull(&b)?;
        let av = f.from_rational(&a).unwrap();
        let bv = f.from_rational(&b).unwrap();
        Ok(linalg::add_vec(&self.scalar(&av), &linalg::scale_vec(&bv, &zg)))
    }

    /// Same structure constants over an extension field.
    pub fn extend(&self, ext: &crate::field::Extension) -> Result<Algebra> {
        let table = self.table.iter().map(|r| r.iter().map(|v| v.iter().map(|(k, c)| (*k, ext.embed(c))).collect()).collect()).collect();
        let unit = self.unit.iter().map(|c| ext.embed(c)).collect();
        Ok(Algebra::build(&ext.field, self.dim, table, unit, self.labels.clone(), Provenance::Raw))
    }

    /// The subalgebra spanned by `basis` as an algebra in its own right.
    pub fn subalgebra(&self, basis: &[Vector]) -> Result<Algebra> {
        let f = &self.field;
        let k = basis.len();
        let coords = |v: &Vector| linalg::coords_in(f, basis, v).ok_or_else(|| Error::Invalid("span is not multiplicatively closed".into()));
        let mut mult = vec![Vec::with_capacity(k); k];
        for (i, x) in basis.iter().enumerate() {
            for y in basis {
                mult[i].push(coords(&self.mul(x, y))?);
            }
        }
        let unit = coords(&self.unit)?;
        Algebra::raw(f, mult, unit)
    }

    /// Coordinates of e_i e_j for serialization.
    pub fn structure_constants(&self) -> Vec<Vec<Vector>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.basis_mul(i, j)).collect()).collect()
    }
}

fn isqrt_exact(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Matrix of a linear map restricted to an invariant subspace (columns are
/// coordinates of the images in the subspace basis).
pub fn restrict(f: &Field, sub: &[Vector], map: impl Fn(&Vector) -> Vector) -> Result<Matrix> {
    let k = sub.len();
    let mut cols = Vec::with_capacity(k);
    for v in sub {
        let img = map(v);
        let c = linalg::coords_in(f, sub, &img).ok_or_else(|| Error::Consistency("subspace is not invariant".into()))?;
        cols.push(c);
    }
    Ok(linalg::transpose(f, &cols, k))
}

/// Given z in a 2-dimensional center, a generator with z^2 = delta (char not 2)
/// or z^2 = z + delta (char 2).
pub fn normalize_quadratic(a: &Algebra, z: &[Elem]) -> Result<(Vector, Elem)> {
    let f = &a.field;
    // z^2 = alpha + beta z
    let z2 = a.square(z);
    let basis = vec![a.unit().clone(), z.to_vec()];
    let c = linalg::coords_in(f, &basis, &z2).ok_or_else(|| Error::Consistency("center element is not quadratic".into()))?;
    let (alpha, beta) = (c[0].clone(), c[1].clone());
    if f.is_char2() {
        if beta.is_zero() {
            return Err(Error::Invalid("inseparable quadratic center".into()));
        }
        // w = z / beta: w^2 = alpha/beta^2 + w
        let binv = beta.inv().unwrap();
        let w = linalg::scale_vec(&binv, z);
        Ok((w, &alpha * &binv.square()))
    } else {
        // w = z - beta/2: w^2 = alpha + beta^2/4
        let half = f.from_i64(2).inv().unwrap();
        let w = linalg::sub_vec(z, &a.scalar(&(&beta * &half)));
        let delta = alpha + (&beta * &half).square();
        if delta.is_zero() {
            return Err(Error::Invalid("center is not etale".into()));
        }
        Ok((w, delta))
    }
}

// x = a + b s with a, b in the subfield not containing s (the last radicand)
fn split_over(x: &Elem, s: &Elem) -> Result<(Elem, Elem)> {
    // s is a rational multiple of the top monomial; coordinates on masks
    let (Elem::M(c, m), Elem::M(sc, _)) = (x, s) else { return Err(Error::Consistency("expected a multiquadratic element".into())) };
    let top = m.dim() / 2;
    let sidx = sc.iter().position(|v| !num_traits::Zero::is_zero(v)).unwrap();
    if sidx != top || sc.iter().filter(|v| !num_traits::Zero::is_zero(*v)).count() != 1 {
        return Err(Error::Consistency("unexpected square root shape".into()));
    }
    let mut a = vec![num_rational::BigRational::from_integer(0.into()); m.dim()];
    let mut b = a.clone();
    for (i, v) in c.iter().enumerate() {
        if i & top == 0 {
            a[i] = v.clone();
        } else {
            b[i ^ top] = v / &sc[top];
        }
    }
    Ok((Elem::M(a, m.clone()), Elem::M(b, m.clone())))
}

fn pull(x: &Elem) -> Result<num_rational::BigRational> {
    x.to_rational().ok_or_else(|| Error::Unsupported("reduced norm outside the rational subfield".into()))
}

/// Monic P with P^k = Q (Q monic, coefficients low to high).
pub fn poly_root(f: &Field, q: &[Elem], k: usize) -> Result<Vec<Elem>> {
    let p = f.characteristic() as usize;
    if k == 1 {
        return Ok(q.to_vec());
    }
    if p != 0 && k % p == 0 {
        // Q = R^p = sum r_i^p t^{p i}
        if p != 2 {
            return Err(Error::Unsupported("Frobenius roots in odd characteristic".into()));
        }
        let mut r = Vec::new();
        for (i, c) in q.iter().enumerate() {
            if i % 2 == 1 {
                if !c.is_zero() {
                    return Err(Error::Consistency("polynomial is not a square".into()));
                }
            } else {
                r.push(f.sqrt(c).unwrap());
            }
        }
        return poly_root(f, &r, k / 2);
    }
    let n = q.len() - 1;
    if n % k != 0 {
        return Err(Error::Consistency("degree not divisible".into()));
    }
    let d = n / k;
    let kinv = f.from_i64(k as i64).inv().unwrap();
    let mut pc = vec![f.zero(); d + 1];
    pc[d] = f.one();
    for j in 1..=d {
        let pw = poly_pow(f, &pc, k);
        let c = &pw[n - j];
        pc[d - j] = &(&q[n - j] - c) * &kinv;
    }
    if poly_pow(f, &pc, k) != q {
        return Err(Error::Consistency("characteristic polynomial is not a perfect power".into()));
    }
    Ok(pc)
}

fn poly_mul(f: &Field, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut r = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] = &r[i + j] + &(x * y);
        }
    }
    r
}

fn poly_pow(f: &Field, a: &[Elem], k: usize) -> Vec<Elem> {
    let mut r = vec![f.one()];
    for _ in 0..k {
        r = poly_mul(f, &r, a);
    }
    r
}
