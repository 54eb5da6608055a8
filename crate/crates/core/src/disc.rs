//! The discriminant Pfister form of a capacity-4 algebra with involution.

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::etale::{find_neat_biquadratics, Biquadratic};
use crate::field::{Elem, Field};
use crate::involution::Involution;
use crate::linalg::{self, Vector};
use crate::quad::{PfisterForm, QuadForm};

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub height_bound: u64,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { height_bound: 200, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct WSpace {
    pub index: usize,
    pub basis: Vec<Vector>,
    pub form: QuadForm,
}

#[derive(Clone, Debug, Default)]
pub struct CompositionReport {
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

impl CompositionReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct DiscPfister {
    pub n: usize,
    pub pfister: PfisterForm,
    pub l: Biquadratic,
    pub w: Vec<WSpace>,
    pub u: [Vector; 2],
    pub c: Elem,
    /// Pairwise similarity of q_1, q_2, q_3; None over undecidable fields.
    pub similar: Option<bool>,
    pub composition: CompositionReport,
    pub direct_sum: bool,
}

/// n with dim A = 2^(n+3), for capacity 4 with 1 in Symd.
pub fn level(s: &Involution) -> Result<usize> {
    if s.class.capacity != 4 {
        return Err(Error::Capacity(s.class.capacity));
    }
    s.require_symd_gate()?;
    let d = s.dim();
    if !d.is_power_of_two() || d < 16 {
        return Err(Error::Invalid(format!("dimension {d} is not 2^(n+3)")));
    }
    Ok(d.trailing_zeros() as usize - 3)
}

/// W_i = {x in Symd : y x = x gamma_i(y) for y in L}.
pub fn w_space(s: &Involution, l: &Biquadratic, i: usize) -> Result<Vec<Vector>> {
    let n = level(s)?;
    let a = &s.algebra;
    let f = &a.field;
    let symd = &s.spaces.symd;
    let twisted: Vec<(Vector, Vector)> = l.gens.iter().map(|g| Ok((g.clone(), l.gamma(a, i, g)?))).collect::<Result<_>>()?;
    let cols: Vec<Vector> = symd
        .iter()
        .map(|x| twisted.iter().flat_map(|(g, gg)| linalg::sub_vec(&a.mul(g, x), &a.mul(x, gg))).collect())
        .collect();
    let m = linalg::transpose(f, &cols, 2 * a.dim());
    let null = linalg::nullspace(f, &m, symd.len());
    let basis: Vec<Vector> = null.iter().map(|c| linalg::combine(f, a.dim(), c, symd)).collect();
    if basis.len() != 1 << n {
        return Err(Error::Consistency(format!("dim W_{i} = {} but 2^n = {}", basis.len(), 1 << n)));
    }
    Ok(basis)
}

/// c = s_3(gamma_1(u_1 u_2) + gamma_2(u_1 u_2)); checks the normalized
/// identity s_3(gamma_1(xy) + gamma_2(xy)) / c = s_1(x) s_2(y) on basis pairs.
pub fn normalize_c(a: &Algebra, l: &Biquadratic) -> Result<Elem> {
    let term = |x: &Vector, y: &Vector| -> Result<Elem> {
        let xy = a.mul(x, y);
        l.s_functional(a, 3, &linalg::add_vec(&l.gamma(a, 1, &xy)?, &l.gamma(a, 2, &xy)?))
    };
    let [u1, u2] = &l.gens;
    let c = term(u1, u2)?;
    if c.is_zero() {
        return Err(Error::Consistency("normalization constant c vanishes".into()));
    }
    let cinv = c.inv().unwrap();
    let one = a.unit().clone();
    for x in [&one, u1] {
        for y in [&one, u2] {
            let lhs = &term(x, y)? * &cinv;
            let rhs = &l.s_functional(a, 1, x)? * &l.s_functional(a, 2, y)?;
            if lhs != rhs {
                return Err(Error::Consistency("normalized bilinear identity fails".into()));
            }
        }
    }
    Ok(c)
}

/// Quadratic form x -> s(x^2) on a basis, by polarization.
pub fn form_on(a: &Algebra, basis: &[Vector], s: impl Fn(&Vector) -> Result<Elem>) -> Result<QuadForm> {
    let f = &a.field;
    let k = basis.len();
    let mut m = linalg::zeros(f, k, k);
    for i in 0..k {
        m[i][i] = s(&a.square(&basis[i]))?;
        for j in i + 1..k {
            m[i][j] = s(&star(a, &basis[i], &basis[j]))?;
        }
    }
    QuadForm::new(f, m)
}

/// x * y = xy + yx.
pub fn star(a: &Algebra, x: &[Elem], y: &[Elem]) -> Vector {
    linalg::add_vec(&a.mul(x, y), &a.mul(y, x))
}

/// s_i with s_3 divided by c.
pub fn s_normalized(a: &Algebra, l: &Biquadratic, c: &Elem, i: usize, x: &[Elem]) -> Result<Elem> {
    let v = l.s_functional(a, i, x)?;
    Ok(if i == 3 { v.div(c).unwrap() } else { v })
}

/// s_3((x*y)^2) = s_1(x^2) s_2(y^2) and x*y in W_3 on all basis pairs.
pub fn verify_composition(a: &Algebra, l: &Biquadratic, w: &[Vec<Vector>], c: &Elem) -> Result<CompositionReport> {
    let f = &a.field;
    let mut rep = CompositionReport::default();
    for (i, x) in w[0].iter().enumerate() {
        let sx = s_normalized(a, l, c, 1, &a.square(x))?;
        for (j, y) in w[1].iter().enumerate() {
            rep.pairs_checked += 1;
            let z = star(a, x, y);
            if !linalg::in_span(f, &w[2], &z) {
                rep.failures.push(format!("x{i}*y{j} is not in W_3"));
                continue;
            }
            let lhs = s_normalized(a, l, c, 3, &a.square(&z))?;
            let rhs = &sx * &s_normalized(a, l, c, 2, &a.square(y))?;
            if lhs != rhs {
                rep.failures.push(format!("identity fails on pair ({i},{j})"));
            }
        }
    }
    Ok(rep)
}

/// Symd = L + W_1 + W_2 + W_3 with the sum direct.
pub fn direct_sum_check(s: &Involution, l: &Biquadratic, w: &[Vec<Vector>]) -> bool {
    let mut all = l.basis.clone();
    for b in w {
        all.extend(b.iter().cloned());
    }
    let total = all.len();
    total == s.spaces.symd.len() && linalg::rank(&all, s.dim()) == total
}

fn decidable(f: &Field) -> bool {
    !matches!(f, Field::Multiquadratic(_))
}

/// Pfister form similar to q: q scaled by the inverse of a represented value,
/// or the hyperbolic form when q is isotropic and that can be decided.
fn pfister_of(q: &QuadForm, n: usize) -> Result<PfisterForm> {
    if decidable(&q.field) {
        return q.pfister_normalize(n);
    }
    let c = q.some_value().ok_or_else(|| Error::Degenerate("zero form".into()))?;
    Ok(PfisterForm { n, form: q.scale(&c.inv().unwrap()), slots: None })
}

/// The full pipeline along L (searched when not supplied).
pub fn discriminant_pfister(s: &Involution, l: Option<&Biquadratic>, opts: &Options) -> Result<DiscPfister> {
    let n = level(s)?;
    let l = match l {
        Some(l) => {
            if !l.is_neat(s)? {
                return Err(Error::Invalid("supplied L is not neat".into()));
            }
            l.clone()
        }
        None => find_neat_biquadratics(s, opts.height_bound as i64, opts.seed, 1)?.remove(0),
    };
    along(s, &l, n)
}

fn along(s: &Involution, l: &Biquadratic, n: usize) -> Result<DiscPfister> {
    let a = &s.algebra;
    let ws: Vec<Vec<Vector>> = (1..=3).map(|i| w_space(s, l, i)).collect::<Result<_>>()?;
    let c = normalize_c(a, l)?;
    let forms: Vec<QuadForm> =
        (1..=3).map(|i| form_on(a, &ws[i - 1], |x| s_normalized(a, l, &c, i, x))).collect::<Result<_>>()?;
    let composition = verify_composition(a, l, &ws, &c)?;
    let direct_sum = direct_sum_check(s, l, &ws);
    let similar = if decidable(&a.field) {
        Some(forms[0].is_similar(&forms[1])?.is_some() && forms[0].is_similar(&forms[2])?.is_some())
    } else {
        None
    };
    let pfister = pfister_of(&forms[0], n)?;
    let w = ws.into_iter().zip(forms).enumerate().map(|(i, (basis, form))| WSpace { index: i + 1, basis, form }).collect();
    Ok(DiscPfister { n, pfister, u: l.gens.clone(), l: l.clone(), w, c, similar, composition, direct_sum })
}

/// Pipelines along up to `count` distinct neat L and whether their Pfister
/// forms agree up to isometry.
pub fn independence_check(s: &Involution, opts: &Options, count: usize) -> Result<(Vec<DiscPfister>, Option<bool>)> {
    let n = level(s)?;
    let ls = find_neat_biquadratics(s, opts.height_bound as i64, opts.seed, count)?;
    let ds: Vec<DiscPfister> = ls.iter().map(|l| along(s, l, n)).collect::<Result<_>>()?;
    if !decidable(s.field()) {
        return Ok((ds, None));
    }
    let mut agree = true;
    for d in &ds[1..] {
        agree &= d.pfister.form.is_isometric(&ds[0].pfister.form)?;
    }
    Ok((ds, Some(agree)))
}

impl DiscPfister {
    pub fn q(&self, i: usize) -> &QuadForm {
        &self.w[i - 1].form
    }

    /// Hyperbolicity of the Pfister form; None when undecidable.
    pub fn hyperbolic(&self) -> Result<Option<bool>> {
        if !decidable(&self.pfister.form.field) {
            return Ok(None);
        }
        Ok(Some(self.pfister.form.is_isotropic()?))
    }

    pub fn to_json(&self, a: &Algebra) -> Result<Value> {
        let f = &a.field;
        let vecs = |vs: &[Vector]| Value::Array(vs.iter().map(|v| Value::Array(v.iter().map(|x| f.elem_to_json(x)).collect())).collect());
        Ok(json!({
            "pfister": self.pfister.form.to_json(),
            "n": self.n,
            "hyperbolic": self.hyperbolic()?,
            "witnesses": {
                "L": vecs(&self.l.basis),
                "u": vecs(&self.u),
                "c": f.elem_to_json(&self.c),
                "q": self.w.iter().map(|w| w.form.to_json()).collect::<Vec<_>>(),
                "dims": self.w.iter().map(|w| w.basis.len()).collect::<Vec<_>>(),
                "similar": self.similar,
                "composition_pairs": self.composition.pairs_checked,
                "composition_ok": self.composition.ok(),
                "direct_sum": self.direct_sum,
            }
        }))
    }
}

#[derive(Clone, Debug)]
pub struct BaseChange {
    pub trivial: bool,
    pub gram_match: bool,
    pub composition_ok: bool,
    /// Isotropy of the Pfister form over the extension, when decidable.
    pub hyperbolic: Option<bool>,
}

/// Re-runs the construction over F(sqrt d) with L and u_i extended and
/// compares q_1 entrywise with the extension of the original.
pub fn base_change_check(s: &Involution, disc: &DiscPfister, d: &BigInt) -> Result<BaseChange> {
    let f = s.field();
    let ext = f.extend_scalars(d)?;
    let t = s.extend(&ext)?;
    let a2 = &t.algebra;
    let emb = |v: &Vector| -> Vector { v.iter().map(|x| ext.embed(x)).collect() };
    let l2 = Biquadratic::from_quadratic_gens(a2, &emb(&disc.l.gens[0]), &emb(&disc.l.gens[1]))?;
    level(&t)?;
    let ws: Vec<Vec<Vector>> = (1..=3).map(|i| w_space(&t, &l2, i)).collect::<Result<_>>()?;
    let c = normalize_c(a2, &l2)?;
    let w1_ext: Vec<Vector> = disc.w[0].basis.iter().map(emb).collect();
    let same_space = linalg::rank(&[ws[0].clone(), w1_ext.clone()].concat(), a2.dim()) == ws[0].len();
    let q1 = form_on(a2, &w1_ext, |x| s_normalized(a2, &l2, &c, 1, x))?;
    let expected: Vec<Vec<Elem>> = disc.q(1).coeffs().iter().map(|r| r.iter().map(|x| ext.embed(x)).collect()).collect();
    let gram_match = same_space && *q1.coeffs() == expected && ext.embed(&disc.c) == c;
    let composition_ok = verify_composition(a2, &l2, &ws, &c)?.ok();
    let hyperbolic = match f {
        Field::Rational => Some(disc.pfister.form.quadratic_ext_isotropy(d)?),
        _ => None,
    };
    Ok(BaseChange { trivial: ext.identity, gram_match, composition_ok, hyperbolic })
}
