//! Closed-form discriminant Pfister forms for orthogonal, unitary and
//! symplectic instances built from a degree-4 orthogonal factor.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{Algebra, Provenance};
use crate::disc::{DiscPfister, Options};
use crate::error::{Error, Result};
use crate::etale::{normalize_generator, EtaleSub};
use crate::field::{Elem, Field};
use crate::involution::{InvProvenance, InvType, Involution};
use crate::linalg::{self, Vector};
use crate::quad::{pfister_from_slots, QuadForm};

#[derive(Clone, Debug)]
pub enum Cap4Shape {
    Orthogonal { d: Elem },
    /// (B, tau) x (Z, can); `norm` is N_{Z/F}.
    Unitary { d: Elem, norm: QuadForm },
    /// (B, tau) x (Q, can); `norm` is Nrd_Q.
    Symplectic { d: Elem, norm: QuadForm },
    Generic,
}

impl Cap4Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Cap4Shape::Orthogonal { .. } => "orthogonal",
            Cap4Shape::Unitary { .. } => "unitary",
            Cap4Shape::Symplectic { .. } => "symplectic",
            Cap4Shape::Generic => "generic",
        }
    }
}

/// The quadratic form x -> x conj(x) on span(basis); x conj(x) must lie in F.
pub fn norm_form(a: &Algebra, basis: &[Vector], conj: impl Fn(&Vector) -> Vector) -> Result<QuadForm> {
    let f = &a.field;
    let q = |x: &Vector| -> Result<Elem> {
        a.as_scalar(&a.mul(x, &conj(x))).ok_or_else(|| Error::Consistency("norm leaves F".into()))
    };
    let k = basis.len();
    let diag: Vec<Elem> = basis.iter().map(q).collect::<Result<_>>()?;
    let mut m = linalg::zeros(f, k, k);
    for i in 0..k {
        m[i][i] = diag[i].clone();
        for j in i + 1..k {
            m[i][j] = q(&linalg::add_vec(&basis[i], &basis[j]))? - &diag[i] - &diag[j];
        }
    }
    QuadForm::new(f, m)
}

/// <1, -d> x N written as N + (-d) N, valid in every characteristic.
fn times_binary(d: &Elem, n: &QuadForm) -> QuadForm {
    n.orth_sum(&n.scale(&-d.clone()))
}

fn factor_norm(x: &Involution) -> Result<QuadForm> {
    let a = &x.algebra;
    let basis: Vec<Vector> = (0..a.dim()).map(|i| a.basis(i)).collect();
    norm_form(a, &basis, |v| x.apply(v))
}

fn orthogonal_degree_four(b: &Involution) -> bool {
    b.class.ty == InvType::Orthogonal && b.class.degree == 4 && b.class.center_dim == 1
}

/// Shape of an instance, read off its construction.
pub fn recognize(s: &Arc<Involution>) -> Result<Cap4Shape> {
    let f = s.field();
    if orthogonal_degree_four(s) && !f.is_char2() {
        return Ok(Cap4Shape::Orthogonal { d: s.orth_discriminant(0)? });
    }
    let factors = s.factors();
    if factors.len() < 2 {
        return Ok(Cap4Shape::Generic);
    }
    for idx in (0..factors.len()).rev() {
        let x = &factors[idx];
        if !matches!(x.provenance, InvProvenance::Canonical) {
            continue;
        }
        let unitary = match x.algebra.provenance {
            Provenance::Etale { .. } => true,
            Provenance::Quaternion { .. } => false,
            _ => continue,
        };
        let rest: Vec<Arc<Involution>> = factors.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, y)| y.clone()).collect();
        let b = if rest.len() == 1 { rest[0].clone() } else { Arc::new(Involution::tensor_all(&rest)?) };
        if !orthogonal_degree_four(&b) {
            continue;
        }
        let d = b.orth_discriminant(0)?;
        let norm = factor_norm(x)?;
        return Ok(if unitary { Cap4Shape::Unitary { d, norm } } else { Cap4Shape::Symplectic { d, norm } });
    }
    Ok(Cap4Shape::Generic)
}

pub fn formula_orthogonal(s: &Involution) -> Result<QuadForm> {
    let f = s.field();
    if f.is_char2() {
        return Err(Error::Unsupported("the orthogonal formula needs characteristic not 2".into()));
    }
    if !orthogonal_degree_four(s) {
        return Err(Error::Invalid("not an orthogonal involution of degree 4".into()));
    }
    let d = s.orth_discriminant(0)?;
    Ok(QuadForm::diagonal(&f, &[f.one(), -d]))
}

/// Formula for a recognized shape.
pub fn formula_form(s: &Arc<Involution>, shape: &Cap4Shape) -> Result<QuadForm> {
    match shape {
        Cap4Shape::Orthogonal { .. } => formula_orthogonal(s),
        Cap4Shape::Unitary { d, norm } | Cap4Shape::Symplectic { d, norm } => Ok(times_binary(d, norm)),
        Cap4Shape::Generic => Err(Error::Unsupported("no closed formula for this construction".into())),
    }
}

#[derive(Clone, Debug)]
pub struct WVariant {
    pub w: Vector,
    pub nrd: Elem,
    /// Basis of N = (L^g2 Z)^(g1 x sigma|Z).
    pub n_basis: Vec<Vector>,
    pub form: QuadForm,
}

/// <1, -Nrd(w)> x N_{N/F} from a symmetric unit w with w l = g1(l) w on L.
pub fn formula_unitary_w(s: &Involution, disc: &DiscPfister, opts: &Options) -> Result<WVariant> {
    let a = &s.algebra;
    let f = &a.field;
    let n = a.dim();
    if s.class.ty != InvType::Unitary {
        return Err(Error::Invalid("the w-construction needs a unitary involution".into()));
    }
    let l = &disc.l;
    let symm = &s.spaces.symm;
    let mut cols: Vec<Vector> = symm.iter().map(|_| Vec::new()).collect();
    for g in &l.gens {
        let gg = l.gamma(a, 1, g)?;
        for (c, x) in cols.iter_mut().zip(symm) {
            c.extend(linalg::sub_vec(&a.mul(x, g), &a.mul(&gg, x)));
        }
    }
    let null = linalg::nullspace(f, &linalg::transpose(f, &cols, 2 * n), symm.len());
    let space: Vec<Vector> = null.iter().map(|c| linalg::combine(f, n, c, symm)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let w = space
        .iter()
        .cloned()
        .chain((0..200).map(|_| linalg::random_combination(f, &mut rng, &space, n, 3)))
        .find(|x| a.is_unit(x))
        .ok_or_else(|| Error::NotFound("no invertible w within the search bound".into()))?;
    let nrd = a.as_scalar(&a.reduced_norm(&w)?).ok_or_else(|| Error::Consistency("Nrd(w) outside F".into()))?;
    // N inside L^g2 Z
    let k2 = &l.fixed_gens[1];
    let lg2 = [a.unit().clone(), k2.clone()];
    let mut prods = Vec::new();
    let mut moved = Vec::new();
    for li in &lg2 {
        for z in &s.center {
            prods.push(a.mul(li, z));
            moved.push(a.mul(&l.gamma(a, 1, li)?, &s.apply(z)));
        }
    }
    let diff: Vec<Vector> = prods.iter().zip(&moved).map(|(p, m)| linalg::sub_vec(m, p)).collect();
    let fixed = linalg::nullspace(f, &linalg::transpose(f, &diff, n), diff.len());
    let n_basis: Vec<Vector> = fixed.iter().map(|c| linalg::combine(f, n, c, &prods)).collect();
    if n_basis.len() != 2 {
        return Err(Error::Consistency(format!("fixed algebra N has dimension {}", n_basis.len())));
    }
    let t = n_basis.iter().find(|x| a.as_scalar(x).is_none()).ok_or_else(|| Error::Consistency("N is scalar".into()))?;
    let (k, _) = normalize_generator(a, t)?.ok_or_else(|| Error::Consistency("N is not quadratic etale".into()))?;
    let nb = vec![a.unit().clone(), k];
    let norm = norm_form(a, &nb, |x| s.apply(x))?;
    Ok(WVariant { w, nrd: nrd.clone(), n_basis: nb, form: times_binary(&nrd, &norm) })
}

/// Is the discriminant d of (B, tau) represented by the norm form of the neat quadratic F[e]?
pub fn neat_norm_represents_disc(tau: &Involution, e: &[Elem]) -> Result<bool> {
    let a = &tau.algebra;
    let f = &a.field;
    if !orthogonal_degree_four(tau) {
        return Err(Error::Invalid("needs an orthogonal involution of degree 4".into()));
    }
    let sub = EtaleSub::quadratic(a, e)?;
    if !sub.is_neat(tau)? {
        return Err(Error::Invalid("E is not neat".into()));
    }
    let (k, _) = normalize_generator(a, e)?.ok_or_else(|| Error::Invalid("E is not quadratic etale".into()))?;
    let gk = if f.is_char2() { linalg::add_vec(&k, a.unit()) } else { linalg::neg_vec(&k) };
    let nb = [a.unit().clone(), k.clone()];
    // conjugation on F[k]: x + y k -> x + y g(k)
    let conj = |v: &Vector| -> Vector {
        let c = linalg::coords_in(f, &nb, v).expect("element of E");
        linalg::add_vec(&a.scalar(&c[0]), &linalg::scale_vec(&c[1], &gk))
    };
    let norm = norm_form(a, &nb, conj)?;
    let d = tau.orth_discriminant(0)?;
    norm.orth_sum(&QuadForm::diagonal(f, &[-d])).is_isotropic()
}

#[derive(Clone, Debug)]
pub struct TwoFold {
    pub dim_ok: bool,
    pub represents_one: bool,
    /// (a, b) with the form isometric to <<a, b>>, the norm form of (a, b)_F.
    pub slots: Option<Vec<Elem>>,
    pub reconstruction_ok: Option<bool>,
}

impl TwoFold {
    pub fn ok(&self) -> bool {
        self.dim_ok && self.represents_one && self.reconstruction_ok != Some(false)
    }
}

pub fn unitary_two_fold_shape(s: &Involution, disc: &DiscPfister, opts: &Options) -> Result<TwoFold> {
    let f = s.field();
    if s.class.ty != InvType::Unitary {
        return Err(Error::Invalid("needs a unitary involution".into()));
    }
    let form = &disc.pfister.form;
    let dim_ok = disc.n == 2 && form.dim() == 4;
    let represents_one = form.orth_sum(&QuadForm::diagonal(&f, &[-f.one()])).is_isotropic()?;
    let slots = match QuadForm::pfister_slots(&disc.pfister, opts.height_bound) {
        Ok(v) => Some(v),
        Err(Error::NotFound(_) | Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let reconstruction_ok = match &slots {
        Some(v) => Some(pfister_from_slots(&f, v).is_isometric(form)?),
        None => None,
    };
    Ok(TwoFold { dim_ok, represents_one, slots, reconstruction_ok })
}

#[derive(Clone, Debug)]
pub struct Crosscheck {
    pub shape: Cap4Shape,
    pub formula: Option<QuadForm>,
    pub pipeline: QuadForm,
    pub agree: Option<bool>,
    pub w_variant: Option<WVariant>,
    pub w_agree: Option<bool>,
}

pub fn crosscheck(s: &Arc<Involution>, disc: &DiscPfister, opts: &Options) -> Result<Crosscheck> {
    let shape = recognize(s)?;
    let pipeline = disc.pfister.form.clone();
    let formula = match shape {
        Cap4Shape::Generic => None,
        _ => Some(formula_form(s, &shape)?),
    };
    let agree = formula.as_ref().map(|q| q.is_isometric(&pipeline)).transpose()?;
    let (w_variant, w_agree) = if s.class.ty == InvType::Unitary {
        match formula_unitary_w(s, disc, opts) {
            Ok(w) => {
                let ok = w.form.is_isometric(&pipeline)?;
                (Some(w), Some(ok))
            }
            Err(Error::NotFound(_) | Error::Unsupported(_)) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    Ok(Crosscheck { shape, formula, pipeline, agree, w_variant, w_agree })
}

impl Crosscheck {
    pub fn ok(&self) -> bool {
        self.agree != Some(false) && self.w_agree != Some(false)
    }

    pub fn to_json(&self, f: &Field) -> Value {
        json!({
            "shape": self.shape.name(),
            "formula_form": self.formula.as_ref().map(QuadForm::to_json),
            "pipeline_form": self.pipeline.to_json(),
            "agree": self.agree,
            "w_form": self.w_variant.as_ref().map(|w| w.form.to_json()),
            "w_nrd": self.w_variant.as_ref().map(|w| f.elem_to_json(&w.nrd)),
            "w_agree": self.w_agree,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::discriminant_pfister;
    use crate::involution::{adjoint_diagonal, canonical};

    fn adj(f: &Field, d: &[i64]) -> Arc<Involution> {
        let m = Arc::new(Algebra::matrix(f, d.len()).unwrap());
        let diag: Vec<Elem> = d.iter().map(|&x| f.from_i64(x)).collect();
        Arc::new(adjoint_diagonal(&m, &diag).unwrap())
    }

    fn can(a: Algebra) -> Arc<Involution> {
        Arc::new(canonical(&Arc::new(a)).unwrap())
    }

    fn check(s: &Arc<Involution>) -> Crosscheck {
        let disc = discriminant_pfister(s, None, &Options::default()).unwrap();
        crosscheck(s, &disc, &Options::default()).unwrap()
    }

    #[test]
    fn orthogonal_formula() {
        let f = Field::rational();
        for (d, hyp) in [([1, 1, 1, 1], true), ([1, 1, 1, -1], false), ([1, 1, 1, 7], false)] {
            let s = adj(&f, &d);
            let c = check(&s);
            assert_eq!(c.shape.name(), "orthogonal");
            assert_eq!(c.agree, Some(true));
            assert_eq!(c.pipeline.is_isotropic().unwrap(), hyp);
        }
        let q = formula_orthogonal(&adj(&f, &[1, 1, 1, 7])).unwrap();
        assert!(q.is_isometric(&QuadForm::diagonal_i64(&f, &[1, -7])).unwrap());
    }

    #[test]
    fn unitary_formula_and_w_variant() {
        let f = Field::rational();
        let gi = can(Algebra::etale(&f, &f.from_i64(-1)).unwrap());
        let s = Arc::new(Involution::tensor(&adj(&f, &[1, 1, 1, -1]), &gi).unwrap());
        let c = check(&s);
        assert_eq!(c.shape.name(), "unitary");
        assert_eq!(c.agree, Some(true));
        assert_eq!(c.w_agree, Some(true));
        assert!(c.pipeline.is_isometric(&QuadForm::diagonal_i64(&f, &[1, 1, 1, 1])).unwrap());
        let disc = discriminant_pfister(&s, None, &Options::default()).unwrap();
        let t = unitary_two_fold_shape(&s, &disc, &Options::default()).unwrap();
        assert!(t.ok());
        assert_eq!(t.reconstruction_ok, Some(true));

        let g3 = can(Algebra::etale(&f, &f.from_i64(3)).unwrap());
        let s = Arc::new(Involution::tensor(&adj(&f, &[1, 1, 1, 1]), &g3).unwrap());
        let c = check(&s);
        assert_eq!((c.agree, c.w_agree), (Some(true), Some(true)));
        assert!(c.pipeline.is_isotropic().unwrap());
    }

    #[test]
    fn symplectic_formula() {
        let f = Field::rational();
        let h = can(Algebra::quaternion(&f, &f.from_i64(-1), &f.from_i64(-1)).unwrap());
        for (d, hyp) in [([1, 1, 1, -1], false), ([1, 1, 1, 7], true), ([1, 1, 1, 1], true)] {
            let s = Arc::new(Involution::tensor(&adj(&f, &d), &h).unwrap());
            let c = check(&s);
            assert_eq!(c.shape.name(), "symplectic");
            assert_eq!(c.agree, Some(true), "{d:?}");
            assert_eq!(c.pipeline.is_isotropic().unwrap(), hyp, "{d:?}");
        }
    }

    #[test]
    fn neat_norms_represent_the_discriminant() {
        let f = Field::rational();
        let s = adj(&f, &[1, 1, 1, -1]);
        let a = &s.algebra;
        // E = Q x Q via the idempotent e11 + e22
        let mut e = a.zero();
        e[0] = f.one();
        e[5] = f.one();
        assert!(neat_norm_represents_disc(&s, &e).unwrap());
        let s = adj(&f, &[1, 2, 3, 6]);
        assert!(neat_norm_represents_disc(&s, &e).unwrap());
    }
}
