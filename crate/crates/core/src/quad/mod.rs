//! Quadratic forms q(x) = sum_{i<=j} c_ij x_i x_j with upper-triangular
//! coefficient matrices, over any supported field.

mod rational;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::{self, Matrix, Vector};

pub use rational::{hasse_places, LocalData, MAX_SEARCH_POINTS};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadForm {
    pub field: Field,
    coeffs: Matrix,
}

/// Classifying invariants. Over Q: dimension, determinant class, Hasse
/// symbols and signature. Finite odd: dimension and determinant class.
/// Characteristic 2: dimension and Arf invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormInvariants {
    pub dim: usize,
    /// Square-free integer over Q; 1 or the chosen non-square class marker -1
    /// over finite fields of odd characteristic.
    pub det_class: Option<BigInt>,
    pub arf: Option<u32>,
    pub hasse: BTreeMap<String, i32>,
    pub signature: Option<(usize, usize)>,
}

impl FormInvariants {
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "dim": self.dim });
        if let Some(d) = &self.det_class {
            v["det_class"] = json!(d.to_string());
        }
        if let Some(a) = self.arf {
            v["arf"] = json!(a);
        }
        if !self.hasse.is_empty() {
            v["hasse"] = json!(self.hasse);
        }
        if let Some((p, n)) = self.signature {
            v["signature"] = json!([p, n]);
        }
        v
    }
}

/// Char 2 normal form: [a_i, b_i] blocks on a symplectic basis plus an
/// optional one-dimensional radical value.
#[derive(Clone, Debug)]
pub struct Char2Normal {
    pub blocks: Vec<(Elem, Elem)>,
    pub radical: Option<Elem>,
    /// Rows: the new basis in old coordinates (block pairs, then radical).
    pub basis: Matrix,
}

/// Diagonal form with the change of basis realizing it.
#[derive(Clone, Debug)]
pub struct Diagonal {
    pub entries: Vec<Elem>,
    pub basis: Matrix,
}

/// A Pfister form, optionally with known slots.
#[derive(Clone, Debug)]
pub struct PfisterForm {
    pub n: usize,
    pub form: QuadForm,
    pub slots: Option<Vec<Elem>>,
}

impl QuadForm {
    /// From a coefficient matrix; entries below the diagonal are folded into
    /// the upper triangle.
    pub fn new(field: &Field, coeffs: Matrix) -> Result<QuadForm> {
        let n = coeffs.len();
        if n == 0 || coeffs.iter().any(|r| r.len() != n) {
            return invalid("coefficient matrix must be square and nonempty");
        }
        let mut c = linalg::zeros(field, n, n);
        for i in 0..n {
            for j in 0..n {
                if coeffs[i][j].field() != *field {
                    return Err(Error::FieldMismatch);
                }
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                c[a][b] = &c[a][b] + &coeffs[i][j];
            }
        }
        Ok(QuadForm { field: field.clone(), coeffs: c })
    }

    pub fn diagonal(field: &Field, entries: &[Elem]) -> QuadForm {
        let n = entries.len();
        let mut c = linalg::zeros(field, n, n);
        for (i, e) in entries.iter().enumerate() {
            c[i][i] = e.clone();
        }
        QuadForm { field: field.clone(), coeffs: c }
    }

    pub fn diagonal_i64(field: &Field, entries: &[i64]) -> QuadForm {
        let e: Vec<Elem> = entries.iter().map(|&x| field.from_i64(x)).collect();
        QuadForm::diagonal(field, &e)
    }

    /// Binary form a x^2 + x y + b y^2, the char 2 building block [a, b].
    pub fn binary_block(field: &Field, a: &Elem, b: &Elem) -> QuadForm {
        let mut c = linalg::zeros(field, 2, 2);
        c[0][0] = a.clone();
        c[0][1] = field.one();
        c[1][1] = b.clone();
        QuadForm { field: field.clone(), coeffs: c }
    }

    /// Hyperbolic n-fold Pfister form.
    pub fn hyperbolic_pfister(field: &Field, n: usize) -> QuadForm {
        if field.is_char2() {
            let mut q = QuadForm::binary_block(field, &field.one(), &field.zero());
            for _ in 1..n {
                q = q.orth_sum(&q);
            }
            return q;
        }
        let mut e = vec![field.one()];
        for _ in 0..n {
            let neg: Vec<Elem> = e.iter().map(|x| -x).collect();
            e.extend(neg);
        }
        QuadForm::diagonal(field, &e)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &Matrix {
        &self.coeffs
    }

    pub fn eval(&self, x: &[Elem]) -> Elem {
        let mut s = self.field.zero();
        for i in 0..self.dim() {
            if x[i].is_zero() {
                continue;
            }
            for j in i..self.dim() {
                if !self.coeffs[i][j].is_zero() && !x[j].is_zero() {
                    s = s + &self.coeffs[i][j] * &(&x[i] * &x[j]);
                }
            }
        }
        s
    }

    /// Polar form b_q(x, y) = q(x + y) - q(x) - q(y).
    pub fn polar(&self, x: &[Elem], y: &[Elem]) -> Elem {
        let p = self.polar_matrix();
        linalg::dot(&self.field, x, &linalg::mat_vec(&self.field, &p, y))
    }

    pub fn polar_matrix(&self) -> Matrix {
        let n = self.dim();
        let mut p = linalg::zeros(&self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                p[i][j] = if i == j {
                    &self.coeffs[i][i] + &self.coeffs[i][i]
                } else if i < j {
                    self.coeffs[i][j].clone()
                } else {
                    self.coeffs[j][i].clone()
                };
            }
        }
        p
    }

    pub fn scale(&self, c: &Elem) -> QuadForm {
        let coeffs = self.coeffs.iter().map(|r| linalg::scale_vec(c, r)).collect();
        QuadForm { field: self.field.clone(), coeffs }
    }

    pub fn orth_sum(&self, other: &QuadForm) -> QuadForm {
        let (n, m) = (self.dim(), other.dim());
        let mut c = linalg::zeros(&self.field, n + m, n + m);
        for i in 0..n {
            c[i][..n].clone_from_slice(&self.coeffs[i]);
        }
        for i in 0..m {
            c[n + i][n..].clone_from_slice(&other.coeffs[i]);
        }
        QuadForm { field: self.field.clone(), coeffs: c }
    }

    /// Diagonal bilinear form <b_1, ..., b_k> tensored with this form.
    pub fn bilinear_tensor(&self, b: &[Elem]) -> QuadForm {
        let mut it = b.iter().map(|x| self.scale(x));
        let first = it.next().expect("empty bilinear factor");
        it.fold(first, |acc, q| acc.orth_sum(&q))
    }

    /// Tensor product of two forms (characteristic not 2), via diagonalization.
    pub fn tensor(&self, other: &QuadForm) -> Result<QuadForm> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.field.is_char2() {
            let d = self.diagonalize_bilinear()?;
            return Ok(other.bilinear_tensor(&d));
        }
        let a = self.diagonalize().entries;
        Ok(other.bilinear_tensor(&a))
    }

    // char 2 only: a diagonal form is its own diagonal bilinear form
    fn diagonalize_bilinear(&self) -> Result<Vec<Elem>> {
        let n = self.dim();
        for i in 0..n {
            for j in (i + 1)..n {
                if !self.coeffs[i][j].is_zero() {
                    return invalid("characteristic 2 tensor needs a diagonal bilinear left factor");
                }
            }
        }
        Ok((0..n).map(|i| self.coeffs[i][i].clone()).collect())
    }

    /// Change of basis: rows of `p` are the new basis vectors.
    pub fn transform(&self, p: &Matrix) -> QuadForm {
        let n = p.len();
        let b = self.polar_matrix();
        let mut c = linalg::zeros(&self.field, n, n);
        for i in 0..n {
            c[i][i] = self.eval(&p[i]);
            let bi = linalg::mat_vec(&self.field, &b, &p[i]);
            for j in (i + 1)..n {
                c[i][j] = linalg::dot(&self.field, &p[j], &bi);
            }
        }
        QuadForm { field: self.field.clone(), coeffs: c }
    }

    /// Orthogonal diagonalization (characteristic not 2). Zero entries appear
    /// for degenerate forms.
    pub fn diagonalize(&self) -> Diagonal {
        assert!(!self.field.is_char2(), "diagonalize in characteristic 2");
        let f = &self.field;
        let n = self.dim();
        let two_inv = f.from_i64(2).inv().unwrap();
        // symmetric Gram matrix G with q(x) = x^T G x
        let pm = self.polar_matrix();
        let mut g: Matrix = pm.iter().map(|r| linalg::scale_vec(&two_inv, r)).collect();
        let mut basis = linalg::identity(f, n);
        let mut entries = Vec::with_capacity(n);
        for i in 0..n {
            if g[i][i].is_zero() {
                if let Some(j) = ((i + 1)..n).find(|&j| !g[j][j].is_zero()) {
                    swap_sym(&mut g, &mut basis, i, j);
                } else if let Some(j) = ((i + 1)..n).find(|&j| !g[i][j].is_zero()) {
                    // e_i <- e_i + e_j
                    add_sym(f, &mut g, &mut basis, i, j, &f.one());
                }
            }
            if g[i][i].is_zero() {
                entries.push(f.zero());
                continue;
            }
            let inv = g[i][i].inv().unwrap();
            for k in (i + 1)..n {
                if g[k][i].is_zero() {
                    continue;
                }
                let c = -(&g[k][i] * &inv);
                add_sym(f, &mut g, &mut basis, k, i, &c);
            }
            entries.push(g[i][i].clone());
        }
        Diagonal { entries, basis }
    }

    /// Symplectic-basis normal form in characteristic 2.
    pub fn char2_normal(&self) -> Result<Char2Normal> {
        let f = &self.field;
        let n = self.dim();
        let b = self.polar_matrix();
        let bil = |x: &Vector, y: &Vector| linalg::dot(f, x, &linalg::mat_vec(f, &b, y));
        let mut rest: Vec<Vector> = linalg::identity(f, n);
        let mut blocks = Vec::new();
        let mut basis = Vec::new();
        loop {
            let mut pair = None;
            'find: for i in 0..rest.len() {
                for j in (i + 1)..rest.len() {
                    if !bil(&rest[i], &rest[j]).is_zero() {
                        pair = Some((i, j));
                        break 'find;
                    }
                }
            }
            let Some((i, j)) = pair else { break };
            let x = rest[i].clone();
            let s = bil(&x, &rest[j]).inv().unwrap();
            let y = linalg::scale_vec(&s, &rest[j]);
            rest.remove(j);
            rest.remove(i);
            for v in rest.iter_mut() {
                // v <- v + b(v,y) x + b(v,x) y
                let cy = bil(v, &y);
                let cx = bil(v, &x);
                *v = linalg::add_vec(v, &linalg::add_vec(&linalg::scale_vec(&cy, &x), &linalg::scale_vec(&cx, &y)));
            }
            blocks.push((self.eval(&x), self.eval(&y)));
            basis.push(x);
            basis.push(y);
        }
        let radical = match rest.len() {
            0 => None,
            1 => {
                let c = self.eval(&rest[0]);
                if c.is_zero() {
                    return Err(Error::Degenerate("q vanishes on the polar radical".into()));
                }
                basis.push(rest[0].clone());
                Some(c)
            }
            _ => return Err(Error::Degenerate("polar radical of dimension > 1".into())),
        };
        Ok(Char2Normal { blocks, radical, basis })
    }

    /// Regular: nondegenerate polar form (char not 2), or rad(q) = 0 with
    /// dim rad(b_q) <= 1 (char 2).
    pub fn is_regular(&self) -> bool {
        if self.field.is_char2() {
            self.char2_normal().is_ok()
        } else {
            !linalg::det(&self.field, &self.polar_matrix()).is_zero()
        }
    }

    fn require_regular(&self) -> Result<()> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(Error::Degenerate("form is not regular".into()))
        }
    }

    /// Arf invariant (characteristic 2 finite fields, even dimension).
    pub fn arf(&self) -> Result<u32> {
        let nf = self.char2_normal()?;
        if nf.radical.is_some() {
            return invalid("Arf invariant needs a nonsingular form");
        }
        let mut s = self.field.zero();
        for (a, b) in &nf.blocks {
            s = s + a * b;
        }
        self.field.abs_trace(&s).ok_or_else(|| Error::Unsupported("Arf invariant outside finite fields".into()))
    }

    pub fn invariants(&self) -> Result<FormInvariants> {
        self.require_regular()?;
        let n = self.dim();
        let mut inv = FormInvariants { dim: n, det_class: None, arf: None, hasse: BTreeMap::new(), signature: None };
        match &self.field {
            Field::Rational => {
                let ld = rational::RatDiag::of(self)?;
                inv.det_class = Some(ld.det_class());
                inv.signature = Some(ld.signature());
                for place in ld.places() {
                    inv.hasse.insert(place.to_string(), ld.local(&place).eps);
                }
            }
            Field::Finite(_) if self.field.is_char2() => {
                if n % 2 == 0 {
                    inv.arf = Some(self.arf()?);
                }
            }
            Field::Finite(_) => {
                let det = self.diagonalize().entries.iter().fold(self.field.one(), |a, x| a * x);
                inv.det_class = Some(if self.field.is_square(&det) { 1.into() } else { (-1).into() });
            }
            Field::Multiquadratic(_) => {
                return Err(Error::Unsupported("invariants over multiquadratic fields".into()));
            }
        }
        Ok(inv)
    }

    fn require_decidable(&self) -> Result<()> {
        match self.field {
            Field::Multiquadratic(_) => Err(Error::Unsupported(
                "isotropy decisions over multiquadratic fields (use quadratic_ext_isotropy)".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn witt_index(&self) -> Result<usize> {
        self.require_decidable()?;
        self.require_regular()?;
        let n = self.dim();
        match &self.field {
            Field::Rational => Ok(rational::RatDiag::of(self)?.witt_index()),
            Field::Finite(_) if self.field.is_char2() => {
                if n % 2 == 1 {
                    Ok((n - 1) / 2)
                } else if self.arf()? == 0 {
                    Ok(n / 2)
                } else {
                    Ok(n / 2 - 1)
                }
            }
            _ => {
                let entries = self.diagonalize().entries;
                let mut det = entries.iter().fold(self.field.one(), |a, x| a * x);
                let mut m = n;
                let mut w = 0;
                while m >= 2 {
                    if m == 2 && !self.field.is_square(&-&det) {
                        break;
                    }
                    w += 1;
                    m -= 2;
                    det = -det;
                }
                Ok(w)
            }
        }
    }

    pub fn is_isotropic(&self) -> Result<bool> {
        Ok(self.witt_index()? > 0)
    }

    /// A nonzero isotropic vector, or NotFound. Never a proof of anisotropy.
    pub fn isotropic_vector(&self, height_bound: u64) -> Result<Vector> {
        match &self.field {
            Field::Rational => rational::isotropic_vector(self, height_bound),
            Field::Finite(_) => self.isotropic_vector_finite(),
            Field::Multiquadratic(_) => {
                // only radical / basis witnesses
                (0..self.dim())
                    .map(|i| linalg::unit_vec(&self.field, self.dim(), i))
                    .find(|v| self.eval(v).is_zero())
                    .ok_or_else(|| Error::NotFound("no basis isotropic vector".into()))
            }
        }
    }

    fn isotropic_vector_finite(&self) -> Result<Vector> {
        let f = &self.field;
        let n = self.dim();
        let e = |i: usize| linalg::unit_vec(f, n, i);
        for i in 0..n {
            if self.eval(&e(i)).is_zero() {
                return Ok(e(i));
            }
        }
        // q(v + t w) = q(v) + t b(v,w) + t^2 q(w), with q(w) != 0
        let line = |v: &Vector, w: &Vector| -> Option<Vector> {
            let t = f.solve_quadratic(&self.eval(w), &self.polar(v, w), &self.eval(v))?;
            Some(linalg::add_vec(v, &linalg::scale_vec(&t, w)))
        };
        if n >= 2 {
            if let Some(v) = line(&e(0), &e(1)) {
                return Ok(v);
            }
        }
        if n >= 3 {
            for s in f.elements().unwrap() {
                let v = linalg::add_vec(&e(0), &linalg::scale_vec(&s, &e(1)));
                if let Some(x) = line(&v, &e(2)) {
                    return Ok(x);
                }
            }
        }
        Err(Error::NotFound("form is anisotropic".into()))
    }

    pub fn is_isometric(&self, other: &QuadForm) -> Result<bool> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        self.require_decidable()?;
        if self.dim() != other.dim() {
            return Ok(false);
        }
        if let Field::Rational = self.field {
            let a = rational::RatDiag::of(self)?;
            let b = rational::RatDiag::of(other)?;
            return Ok(a.isometric(&b));
        }
        Ok(self.invariants()? == other.invariants()?)
    }

    /// Some c with c * self isometric to other.
    pub fn is_similar(&self, other: &QuadForm) -> Result<Option<Elem>> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        self.require_decidable()?;
        if self.dim() != other.dim() {
            return Ok(None);
        }
        let f = &self.field;
        let candidates: Vec<Elem> = match f {
            Field::Rational => {
                let a = rational::RatDiag::of(self)?;
                let b = rational::RatDiag::of(other)?;
                rational::similarity_candidates(&a, &b).into_iter().map(|c| f.from_int(&c)).collect()
            }
            _ if f.is_char2() => vec![f.one()],
            _ => {
                let ns = f.elements().unwrap().into_iter().find(|x| !x.is_zero() && !f.is_square(x)).unwrap();
                vec![f.one(), ns]
            }
        };
        for c in candidates {
            if self.scale(&c).is_isometric(other)? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    /// A nonzero value represented by the form (first nonzero basis value).
    pub fn some_value(&self) -> Option<Elem> {
        let n = self.dim();
        if !self.field.is_char2() {
            return self.diagonalize().entries.into_iter().find(|x| !x.is_zero());
        }
        (0..n).map(|i| self.coeffs[i][i].clone()).find(|x| !x.is_zero()).or_else(|| {
            // q(e_i + e_j) = c_ij when the diagonal vanishes
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| self.coeffs[i][j].clone()).find(|x| !x.is_zero())
        })
    }

    /// The Pfister form similar to this one.
    pub fn pfister_normalize(&self, n: usize) -> Result<PfisterForm> {
        if self.dim() != 1 << n {
            return invalid(format!("dimension {} is not 2^{n}", self.dim()));
        }
        if self.is_isotropic()? {
            return Ok(PfisterForm {
                n,
                form: QuadForm::hyperbolic_pfister(&self.field, n),
                slots: Some(vec![self.field.one(); n]),
            });
        }
        let c = self.some_value().ok_or_else(|| Error::Degenerate("zero form".into()))?;
        Ok(PfisterForm { n, form: self.scale(&c.inv().unwrap()), slots: None })
    }

    /// Isotropy over Q(sqrt d) of a form over Q.
    pub fn quadratic_ext_isotropy(&self, d: &BigInt) -> Result<bool> {
        if !matches!(self.field, Field::Rational) {
            return Err(Error::Unsupported("quadratic_ext_isotropy needs a form over Q".into()));
        }
        rational::quadratic_ext_isotropy(self, d)
    }

    /// Slots a_i with the form isometric to <<a_1, ..., a_n>> = tensor of <1, -a_i>.
    pub fn pfister_slots(p: &PfisterForm, height_bound: u64) -> Result<Vec<Elem>> {
        rational::pfister_slots(p, height_bound)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> =
            self.coeffs.iter().map(|r| Value::Array(r.iter().map(|x| self.field.elem_to_json(x)).collect())).collect();
        json!({ "ctx": self.field.to_json(), "coeffs": rows })
    }

    pub fn from_json(v: &Value) -> Result<QuadForm> {
        let field = Field::from_json(v.get("ctx").ok_or_else(|| Error::Invalid("form.ctx missing".into()))?)?;
        let rows = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| Error::Invalid("form.coeffs missing".into()))?;
        let mut m = Vec::new();
        for r in rows {
            let r = r.as_array().ok_or_else(|| Error::Invalid("form.coeffs rows must be lists".into()))?;
            m.push(r.iter().map(|x| field.elem_from_json(x)).collect::<Result<Vec<_>>>()?);
        }
        QuadForm::new(&field, m)
    }
}

/// The Pfister form <<a_1, ..., a_n>> = <1,-a_1> x ... x <1,-a_n>.
pub fn pfister_from_slots(field: &Field, slots: &[Elem]) -> QuadForm {
    let mut e = vec![field.one()];
    for a in slots {
        let scaled: Vec<Elem> = e.iter().map(|x| -(x * a)).collect();
        e.extend(scaled);
    }
    QuadForm::diagonal(field, &e)
}

/// Rational entries helper.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn swap_sym(g: &mut Matrix, basis: &mut Matrix, i: usize, j: usize) {
    g.swap(i, j);
    for row in g.iter_mut() {
        row.swap(i, j);
    }
    basis.swap(i, j);
}

// e_k <- e_k + c e_i, updating the Gram matrix by congruence.
fn add_sym(f: &Field, g: &mut Matrix, basis: &mut Matrix, k: usize, i: usize, c: &Elem) {
    let n = g.len();
    let row_i = g[i].clone();
    for j in 0..n {
        g[k][j] = &g[k][j] + &(c * &row_i[j]);
    }
    for r in g.iter_mut() {
        let t = c * &r[i];
        r[k] = &r[k] + &t;
    }
    let bi = basis[i].clone();
    basis[k] = linalg::add_vec(&basis[k], &linalg::scale_vec(c, &bi));
    let _ = f;
}

#[cfg(test)]
mod tests;
