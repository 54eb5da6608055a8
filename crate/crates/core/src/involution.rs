//! Involutions as verified linear maps, their symmetric spaces and types.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{normalize_quadratic, Algebra, Inverse, Provenance};
use crate::error::{invalid, Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::{self, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InvType {
    Orthogonal,
    Unitary,
    Symplectic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    #[serde(rename = "type")]
    pub ty: InvType,
    pub degree: usize,
    pub capacity: usize,
    pub center_dim: usize,
    /// Unitary with split center.
    pub inner_type: bool,
    pub one_in_symd: bool,
}

#[derive(Clone, Debug)]
pub struct SymSpaces {
    pub symm: Vec<Vector>,
    pub skew: Vec<Vector>,
    pub symd: Vec<Vector>,
    pub alt: Vec<Vector>,
}

impl SymSpaces {
    /// Symd when it contains 1, otherwise Symm.
    pub fn syms<'a>(&'a self, one_in_symd: bool) -> &'a [Vector] {
        if one_in_symd {
            &self.symd
        } else {
            &self.symm
        }
    }
}

/// Construction data carried along for formula recognition and searches.
#[derive(Clone, Debug)]
pub enum InvProvenance {
    /// can_Q, can_K or the identity on F.
    Canonical,
    /// Int(s) o can on a quaternion algebra.
    Orthogonal { s: Vector },
    /// Adjoint involution of a diagonal bilinear form on M_n.
    Adjoint { diag: Vec<Elem> },
    Switch,
    /// Int(u+v) o t on M_2.
    Metabolic,
    Explicit,
    Tensor(Vec<Arc<Involution>>),
    Restricted,
}

#[derive(Clone, Debug)]
pub struct Involution {
    pub algebra: Arc<Algebra>,
    // column j = sigma(e_j)
    matrix: Matrix,
    images: Vec<Vector>,
    pub class: Classification,
    pub spaces: SymSpaces,
    pub center: Vec<Vector>,
    pub provenance: InvProvenance,
}

impl Involution {
    /// Involution from the images of the basis vectors, checking all axioms.
    pub fn from_images(algebra: &Arc<Algebra>, images: Vec<Vector>) -> Result<Involution> {
        Self::build(algebra, images, InvProvenance::Explicit, true)
    }

    /// Involution from a matrix acting on coordinates (column j = sigma(e_j)).
    pub fn from_matrix(algebra: &Arc<Algebra>, m: &Matrix) -> Result<Involution> {
        let n = algebra.dim();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return invalid("involution matrix has the wrong shape");
        }
        let images = linalg::transpose(&algebra.field, m, n);
        Self::from_images(algebra, images)
    }

    fn build(algebra: &Arc<Algebra>, images: Vec<Vector>, provenance: InvProvenance, full_check: bool) -> Result<Involution> {
        let a = algebra;
        let f = &a.field;
        let n = a.dim();
        if images.len() != n || images.iter().any(|v| v.len() != n) {
            return invalid("involution images have the wrong shape");
        }
        let apply = |x: &[Elem]| linalg::combine(f, n, x, &images);
        if apply(a.unit()) != *a.unit() {
            return invalid("involution does not fix 1");
        }
        for (j, img) in images.iter().enumerate() {
            if apply(img) != a.basis(j) {
                return Err(Error::Invalid(format!("involution does not square to the identity on basis element {j}")));
            }
        }
        if full_check {
            for i in 0..n {
                for j in 0..n {
                    let lhs = apply(&a.basis_mul(i, j));
                    let rhs = a.mul(&images[j], &images[i]);
                    if lhs != rhs {
                        return Err(Error::Invalid(format!("not an anti-automorphism on basis pair ({i},{j})")));
                    }
                }
            }
        }
        let matrix = linalg::transpose(f, &images, n);
        let center = a.center();
        let spaces = sym_spaces_of(f, &matrix, n);
        let mut inv = Involution {
            algebra: a.clone(),
            matrix,
            images,
            class: Classification {
                kind: Kind::First,
                ty: InvType::Orthogonal,
                degree: 0,
                capacity: 0,
                center_dim: 0,
                inner_type: false,
                one_in_symd: false,
            },
            spaces,
            center,
            provenance,
        };
        inv.class = inv.compute_class()?;
        Ok(inv)
    }

    pub fn field(&self) -> &Field {
        &self.algebra.field
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn apply(&self, x: &[Elem]) -> Vector {
        linalg::combine(self.field(), self.dim(), x, &self.images)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn images(&self) -> &[Vector] {
        &self.images
    }

    pub fn is_symmetric(&self, x: &[Elem]) -> bool {
        self.apply(x) == x
    }

    fn compute_class(&self) -> Result<Classification> {
        let a = &self.algebra;
        let f = self.field();
        let c = self.center.len();
        let sym_center = linalg::intersect(f, &self.center, &self.spaces.symm, a.dim());
        if sym_center.len() != 1 {
            return Err(Error::Invalid("the symmetric part of the center is not the ground field".into()));
        }
        let (kind, degree) = match c {
            1 => (Kind::First, isqrt(a.dim())),
            2 => (Kind::Second, isqrt(a.dim() / 2)),
            _ => return Err(Error::Invalid(format!("center of dimension {c} is neither F nor quadratic"))),
        };
        let degree = degree.filter(|d| c * d * d == a.dim()).ok_or_else(|| Error::Invalid("dimension is not [Z:F] d^2".into()))?;
        let one_in_symd = linalg::in_span(f, &self.spaces.symd, a.unit());
        let syms = self.spaces.syms(one_in_symd).len();
        let half2 = a.dim();
        let ty = match (2 * syms).cmp(&half2) {
            std::cmp::Ordering::Greater => InvType::Orthogonal,
            std::cmp::Ordering::Equal => InvType::Unitary,
            std::cmp::Ordering::Less => InvType::Symplectic,
        };
        let expected = match ty {
            InvType::Orthogonal => degree * (degree + 1) / 2,
            InvType::Unitary => degree * degree,
            InvType::Symplectic => degree * (degree - 1) / 2,
        };
        if syms != expected || (ty == InvType::Unitary) != (kind == Kind::Second) {
            return Err(Error::Invalid(format!("dimension of Syms ({syms}) matches no type for degree {degree}")));
        }
        let capacity = if ty == InvType::Symplectic { degree / 2 } else { degree };
        let inner_type = kind == Kind::Second && self.center_is_split()?;
        Ok(Classification { kind, ty, degree, capacity, center_dim: c, inner_type, one_in_symd })
    }

    fn center_is_split(&self) -> Result<bool> {
        let a = &self.algebra;
        let f = self.field();
        let z = self.center.iter().find(|v| a.as_scalar(v).is_none()).unwrap();
        let (_, delta) = normalize_quadratic(a, z)?;
        Ok(if f.is_char2() { f.artin_schreier_root(&delta).is_some() } else { f.is_square(&delta) })
    }

    /// The same involution after extending scalars.
    pub fn extend(&self, ext: &crate::field::Extension) -> Result<Involution> {
        let a = Arc::new(self.algebra.extend(ext)?);
        let images = self.images.iter().map(|v| v.iter().map(|c| ext.embed(c)).collect()).collect();
        Self::build(&a, images, InvProvenance::Restricted, false)
    }

    /// Rejects instances with 1 outside Symd (orthogonal in characteristic 2).
    pub fn require_symd_gate(&self) -> Result<()> {
        if self.class.one_in_symd {
            Ok(())
        } else {
            Err(Error::SymdGate)
        }
    }

    /// Tensor product involution on the tensor product algebra.
    pub fn tensor(s1: &Arc<Involution>, s2: &Arc<Involution>) -> Result<Involution> {
        let a = Arc::new(Algebra::tensor(&s1.algebra, &s2.algebra)?);
        let (n, m) = (s1.dim(), s2.dim());
        let f = &a.field;
        let mut images = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                let mut v = linalg::zero_vec(f, n * m);
                for (p, x) in s1.images[i].iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (q, y) in s2.images[j].iter().enumerate() {
                        if !y.is_zero() {
                            v[p * m + q] = x * y;
                        }
                    }
                }
                images.push(v);
            }
        }
        let mut factors = s1.factors();
        factors.extend(s2.factors());
        Self::build(&a, images, InvProvenance::Tensor(factors), a.dim() <= 16)
    }

    /// Tensor product of a list of involutions (left to right).
    pub fn tensor_all(list: &[Arc<Involution>]) -> Result<Involution> {
        let mut it = list.iter();
        let first = it.next().ok_or_else(|| Error::Invalid("empty factor list".into()))?;
        let mut acc = first.clone();
        for s in it {
            acc = Arc::new(Involution::tensor(&acc, s)?);
        }
        Ok(Arc::try_unwrap(acc).unwrap_or_else(|a| (*a).clone()))
    }

    /// Primitive tensor factors.
    pub fn factors(self: &Arc<Self>) -> Vec<Arc<Involution>> {
        match &self.provenance {
            InvProvenance::Tensor(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Restriction to a sigma-stable subalgebra given by a basis.
    pub fn restrict(&self, basis: &[Vector]) -> Result<Involution> {
        let f = self.field();
        let sub = Arc::new(self.algebra.subalgebra(basis)?);
        let mut images = Vec::with_capacity(basis.len());
        for b in basis {
            let img = self.apply(b);
            images.push(linalg::coords_in(f, basis, &img).ok_or_else(|| Error::Invalid("subalgebra is not stable under the involution".into()))?);
        }
        Self::build(&sub, images, InvProvenance::Restricted, true)
    }

    /// x -> g sigma(g^-1 x g) g^-1, the conjugate of sigma by Int(g).
    pub fn conjugate(&self, g: &[Elem]) -> Result<Involution> {
        let a = &self.algebra;
        let ginv = match a.inverse(g) {
            Inverse::Unit(y) => y,
            Inverse::Singular(_) => return invalid("conjugating element is not invertible"),
        };
        let images = (0..a.dim())
            .map(|j| {
                let x = a.mul(&a.mul(&ginv, &a.basis(j)), g);
                a.mul(&a.mul(g, &self.apply(&x)), &ginv)
            })
            .collect();
        Self::build(a, images, InvProvenance::Explicit, false)
    }

    /// Discriminant (-1)^m Nrd(y) of an orthogonal involution of degree 2m,
    /// for an invertible alternating y; a second sample is checked to agree.
    pub fn orth_discriminant(&self, seed: u64) -> Result<Elem> {
        if self.class.ty != InvType::Orthogonal || self.class.degree % 2 != 0 {
            return invalid("discriminant requires an orthogonal involution of even degree");
        }
        let a = &self.algebra;
        let f = self.field();
        let m = self.class.degree / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut found: Vec<Elem> = Vec::new();
        let candidates = self.spaces.alt.clone();
        for attempt in 0..400 {
            let y = if attempt < candidates.len() {
                candidates[attempt].clone()
            } else {
                linalg::random_combination(f, &mut rng, &self.spaces.alt, a.dim(), 3)
            };
            let nrd = a.reduced_norm(&y)?;
            let nrd = a.as_scalar(&nrd).ok_or_else(|| Error::Consistency("reduced norm outside F".into()))?;
            if nrd.is_zero() {
                continue;
            }
            let d = if m % 2 == 1 { -nrd } else { nrd };
            if let Some(prev) = found.first() {
                if !f.square_class_equal(prev, &d)? {
                    return Err(Error::Consistency("discriminant depends on the alternating element".into()));
                }
                if attempt >= candidates.len() {
                    return Ok(prev.clone());
                }
            } else {
                found.push(d);
            }
        }
        found.pop().ok_or_else(|| Error::NotFound("no invertible alternating element".into()))
    }
}

fn isqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

fn sym_spaces_of(f: &Field, m: &Matrix, n: usize) -> SymSpaces {
    let one = f.one();
    let shift = |sign: &Elem| -> Matrix {
        m.iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, c)| if i == j { c + sign } else { c.clone() }).collect())
            .collect()
    };
    let minus = shift(&(-&one)); // sigma - id
    let plus = shift(&one); // sigma + id
    let cols = |mat: &Matrix| linalg::span_basis(&linalg::transpose(f, mat, n), n);
    SymSpaces {
        symm: linalg::span_basis(&linalg::nullspace(f, &minus, n), n),
        skew: linalg::span_basis(&linalg::nullspace(f, &plus, n), n),
        symd: cols(&plus),
        alt: cols(&minus),
    }
}

/// can_Q on a quaternion algebra, can_K on a quadratic etale algebra.
pub fn canonical(a: &Arc<Algebra>) -> Result<Involution> {
    let images: Vec<Vector> = match &a.provenance {
        Provenance::Quaternion { .. } | Provenance::Etale { .. } => (0..a.dim()).map(|j| trd_minus(a, &a.basis(j))).collect(),
        _ if a.dim() == 1 => vec![a.unit().clone()],
        _ => return invalid("canonical involution needs a quaternion or quadratic etale algebra"),
    };
    Involution::build(a, images, InvProvenance::Canonical, true)
}

// Trd(x) - x for quaternion or quadratic algebras: x + xbar = Trd(x)
fn trd_minus(a: &Algebra, x: &[Elem]) -> Vector {
    let f = &a.field;
    let l = a.left_mult_matrix(x);
    let mut tr = f.zero();
    for (i, r) in l.iter().enumerate() {
        tr = tr + &r[i];
    }
    let trd = if a.dim() == 2 {
        tr
    } else if f.is_char2() {
        // Tr(L_x) = 2 Trd(x) vanishes; on 1, u, v, uv only Trd(uv) = 1 survives
        x[3].clone()
    } else {
        &tr * &f.from_i64(2).inv().unwrap()
    };
    linalg::sub_vec(&a.scalar(&trd), x)
}

/// Int(s) o can_Q; orthogonal when s is invertible and pure.
pub fn quaternion_orthogonal(a: &Arc<Algebra>, s: &[Elem]) -> Result<Involution> {
    let sinv = match a.inverse(s) {
        Inverse::Unit(y) => y,
        Inverse::Singular(_) => return invalid("s is not invertible"),
    };
    let can = canonical(a)?;
    if can.apply(s) != linalg::neg_vec(s) {
        return invalid("s must have reduced trace zero");
    }
    let images = (0..4).map(|j| a.mul(&a.mul(s, &can.apply(&a.basis(j))), &sinv)).collect();
    Involution::build(a, images, InvProvenance::Orthogonal { s: s.to_vec() }, true)
}

/// ad_beta on M_n for beta = <b_1, ..., b_n>: e_ij -> (b_i / b_j) e_ji.
pub fn adjoint_diagonal(a: &Arc<Algebra>, diag: &[Elem]) -> Result<Involution> {
    let n = diag.len();
    if !matches!(a.provenance, Provenance::Matrix { n: m } if m == n) {
        return invalid("adjoint involution needs M_n with n diagonal entries");
    }
    if diag.iter().any(Elem::is_zero) {
        return invalid("bilinear form is degenerate");
    }
    let f = &a.field;
    let mut images = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let c = diag[i].div(&diag[j]).unwrap();
            images.push(linalg::scale_vec(&c, &linalg::unit_vec(f, n * n, j * n + i)));
        }
    }
    Involution::build(a, images, InvProvenance::Adjoint { diag: diag.to_vec() }, n <= 4)
}

/// The switch involution on A0 x A0^op.
pub fn switch(a: &Arc<Algebra>) -> Result<Involution> {
    let Provenance::Double { base } = &a.provenance else { return invalid("switch needs a double algebra") };
    let n = base.dim();
    let f = &a.field;
    let images = (0..2 * n).map(|k| linalg::unit_vec(f, 2 * n, if k < n { k + n } else { k - n })).collect();
    Involution::build(a, images, InvProvenance::Switch, n <= 16)
}

/// Int(u+v) o t on M_2 with u = e22, v = e12 + e21.
pub fn metabolic_m2(a: &Arc<Algebra>) -> Result<Involution> {
    if !matches!(a.provenance, Provenance::Matrix { n: 2 }) {
        return invalid("metabolic model needs M_2");
    }
    let f = &a.field;
    let g: Vector = [0, 1, 1, 1].iter().map(|&c| f.from_i64(c)).collect();
    let Inverse::Unit(ginv) = a.inverse(&g) else { unreachable!() };
    let t = |x: &Vector| vec![x[0].clone(), x[2].clone(), x[1].clone(), x[3].clone()];
    let images = (0..4).map(|j| a.mul(&a.mul(&g, &t(&a.basis(j))), &ginv)).collect();
    Involution::build(a, images, InvProvenance::Metabolic, true)
}
