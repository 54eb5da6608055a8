//! Constructive decompositions, certificates and hyperbolic / metabolic witnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::Algebra;
use crate::disc::{discriminant_pfister, form_on, DiscPfister, Options};
use crate::error::{Error, Result};
use crate::etale::{is_etale, is_quadratic, normalize_generator, Biquadratic};
use crate::field::{Elem, Field};
use crate::involution::{InvType, Involution};
use crate::linalg::{self, Vector};
use crate::quad::QuadForm;

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub quaternions: Vec<Vec<Vector>>,
    /// Centralizer of all quaternions: F, the centre, or a further quaternion.
    pub complement: Vec<Vector>,
    pub aligned_l: Option<Vec<Vector>>,
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub failures: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn vec_json(f: &Field, v: &[Elem]) -> Value {
    Value::Array(v.iter().map(|x| f.elem_to_json(x)).collect())
}

fn vecs_json(f: &Field, vs: &[Vector]) -> Value {
    Value::Array(vs.iter().map(|v| vec_json(f, v)).collect())
}

fn vecs_from_json(f: &Field, v: &Value, what: &str) -> Result<Vec<Vector>> {
    let arr = v.as_array().ok_or_else(|| Error::Invalid(format!("{what} must be a list of vectors")))?;
    arr.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Invalid(format!("{what} entries must be lists")))?
                .iter()
                .map(|x| f.elem_from_json(x))
                .collect::<Result<Vector>>()
        })
        .collect()
}

impl Certificate {
    pub fn to_json(&self, f: &Field) -> Value {
        json!({
            "ctx": f.to_json(),
            "quaternions": self.quaternions.iter().map(|q| vecs_json(f, q)).collect::<Vec<_>>(),
            "complement": vecs_json(f, &self.complement),
            "aligned_L": self.aligned_l.as_ref().map(|l| vecs_json(f, l)),
        })
    }

    pub fn from_json(v: &Value) -> Result<Certificate> {
        let f = Field::from_json(v.get("ctx").ok_or_else(|| Error::Invalid("certificate.ctx missing".into()))?)?;
        let qs = v.get("quaternions").and_then(Value::as_array).ok_or_else(|| Error::Invalid("certificate.quaternions missing".into()))?;
        let quaternions = qs.iter().map(|q| vecs_from_json(&f, q, "quaternion basis")).collect::<Result<_>>()?;
        let complement = vecs_from_json(&f, v.get("complement").ok_or_else(|| Error::Invalid("certificate.complement missing".into()))?, "complement")?;
        let aligned_l = match v.get("aligned_L") {
            None | Some(Value::Null) => None,
            Some(l) => Some(vecs_from_json(&f, l, "aligned_L")?),
        };
        Ok(Certificate { quaternions, complement, aligned_l })
    }
}

/// Is the 4-dimensional algebra with structure given by `basis` central simple?
/// Checks that the maps x -> a x b span all of End(Q).
fn quaternion_is_central_simple(a: &Algebra, basis: &[Vector]) -> bool {
    let f = &a.field;
    let Ok(sub) = a.subalgebra(basis) else { return false };
    let mut ops: Vec<Vector> = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let (bi, bj) = (sub.basis(i), sub.basis(j));
            let m: Vector = (0..4).flat_map(|k| sub.mul(&sub.mul(&bi, &sub.basis(k)), &bj)).collect();
            ops.push(m);
        }
    }
    let _ = f;
    linalg::rank(&ops, 16) == 16
}

/// Recheck every claim of a certificate from scratch.
pub fn verify_certificate(s: &Involution, cert: &Certificate) -> Verification {
    let a = &s.algebra;
    let f = &a.field;
    let n = a.dim();
    let mut fail = Vec::new();
    let shape_ok = |vs: &[Vector]| vs.iter().all(|v| v.len() == n && v.iter().all(|x| x.field() == *f));
    if cert.quaternions.is_empty() || !cert.quaternions.iter().all(|q| q.len() == 4 && shape_ok(q)) || !shape_ok(&cert.complement) {
        return Verification { failures: vec!["shape: malformed bases".into()] };
    }
    for (i, q) in cert.quaternions.iter().enumerate() {
        if linalg::rank(q, n) != 4 || !linalg::in_span(f, q, a.unit()) || !a.is_subalgebra(q) {
            fail.push(format!("closure: Q{} is not a 4-dimensional subalgebra containing 1", i + 1));
            continue;
        }
        if !quaternion_is_central_simple(a, q) {
            fail.push(format!("central simple: Q{} is not a quaternion algebra", i + 1));
        }
        if !q.iter().all(|v| linalg::in_span(f, q, &s.apply(v))) {
            fail.push(format!("stability: Q{} is not sigma-stable", i + 1));
        }
    }
    if !fail.is_empty() {
        return Verification { failures: fail };
    }
    let r = cert.quaternions.len();
    for i in 0..r {
        for j in i + 1..r {
            let commute = cert.quaternions[i].iter().all(|x| cert.quaternions[j].iter().all(|y| linalg::is_zero_vec(&a.commutator(x, y))));
            if !commute {
                fail.push(format!("independence: Q{} and Q{} do not commute", i + 1, j + 1));
            }
        }
    }
    let mut prods = vec![a.unit().clone()];
    for q in &cert.quaternions {
        prods = prods.iter().flat_map(|p| q.iter().map(move |x| (p.clone(), x.clone()))).map(|(p, x)| a.mul(&p, &x)).collect();
    }
    if fail.is_empty() && linalg::rank(&prods, n) != prods.len() {
        fail.push("independence: the product map from the tensor product is not injective".into());
    }
    // complement: centralizer of the quaternions, sigma-stable, filling A
    let gens: Vec<Vector> = cert.quaternions.iter().flatten().cloned().collect();
    let cent = a.centralizer(&gens);
    let comp_ok = linalg::rank(&cert.complement, n) == cent.len()
        && cert.complement.len() == cent.len()
        && cert.complement.iter().all(|v| linalg::in_span(f, &cent, v))
        && cert.complement.iter().all(|v| linalg::in_span(f, &cert.complement, &s.apply(v)));
    if !comp_ok {
        fail.push("complement: not the sigma-stable centralizer of the quaternions".into());
    } else {
        let full: Vec<Vector> = prods.iter().flat_map(|p| cert.complement.iter().map(move |c| a.mul(p, c))).collect();
        if linalg::rank(&full, n) != n {
            fail.push("independence: quaternions and complement do not generate A".into());
        }
    }
    if let Some(l) = &cert.aligned_l {
        if l.len() != 4 || !shape_ok(l) || linalg::rank(l, n) != 4 {
            fail.push("L alignment: L is not 4-dimensional".into());
        } else {
            for (i, q) in cert.quaternions.iter().enumerate() {
                if linalg::intersect(f, q, l, n).len() != 2 {
                    fail.push(format!("L alignment: Q{} meets L in a subspace of dimension other than 2", i + 1));
                }
            }
        }
    }
    Verification { failures: fail }
}

/// Some x in span(basis) with x^2 in F^x, given that x -> s(x^2) is isotropic.
pub fn quaternionize(
    a: &Algebra,
    basis: &[Vector],
    s: impl Fn(&Vector) -> Result<Elem>,
    opts: &Options,
) -> Result<Vector> {
    let f = &a.field;
    let n = a.dim();
    let unit_square = |x: &Vector| a.as_scalar(&a.square(x)).filter(|c| !c.is_zero());
    if basis.is_empty() {
        return Err(Error::NotFound("empty search space".into()));
    }
    for b in basis {
        if unit_square(b).is_some() {
            return Ok(b.clone());
        }
    }
    let q = form_on(a, basis, &s)?;
    let elem = |c: &[Elem]| linalg::combine(f, n, c, basis);
    let y = if q.coeffs().iter().all(|r| r.iter().all(Elem::is_zero)) {
        linalg::unit_vec(f, basis.len(), 0)
    } else {
        q.isotropic_vector(opts.height_bound)?
    };
    let yv = elem(&y);
    if unit_square(&yv).is_some() {
        return Ok(yv);
    }
    if a.as_scalar(&a.square(&yv)).is_none() {
        return Err(Error::Consistency("isotropic vector does not square into F".into()));
    }
    // y^2 = 0: find z with yz + zy = 1, then ((1 - z^2) y + z)^2 = 1
    let cols: Vec<Vector> = basis.iter().map(|b| crate::disc::star(a, &yv, b)).collect();
    let m = linalg::transpose(f, &cols, n);
    if let Some(c) = linalg::solve(f, &m, basis.len(), a.unit()) {
        let z = elem(&c);
        let t = a.square(&z);
        let x = linalg::add_vec(&a.mul(&linalg::sub_vec(a.unit(), &t), &yv), &z);
        if unit_square(&x).is_some() {
            return Ok(x);
        }
    }
    // other isotropic vectors q(v) y - b(y, v) v
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    for _ in 0..200 {
        let v: Vector = (0..basis.len()).map(|_| linalg::random_scalar(f, &mut rng, 5)).collect();
        let w = linalg::sub_vec(&linalg::scale_vec(&q.eval(&v), &y), &linalg::scale_vec(&q.polar(&y, &v), &v));
        let x = elem(&w);
        if unit_square(&x).is_some() {
            return Ok(x);
        }
    }
    Err(Error::NotFound("no element with invertible scalar square found".into()))
}

/// Two independent sigma-stable quaternions aligned with L (P hyperbolic).
pub fn decompose_along_l(s: &Involution, disc: &DiscPfister, opts: &Options) -> Result<Certificate> {
    if disc.hyperbolic()? != Some(true) {
        return Err(Error::Invalid("precondition: the discriminant Pfister form is not hyperbolic".into()));
    }
    let a = &s.algebra;
    let f = &a.field;
    let l = &disc.l;
    let [k1, k2, _] = &l.fixed_gens;
    let x = quaternionize(a, &disc.w[0].basis, |v| l.s_functional(a, 1, v), opts)?;
    let q2 = vec![a.unit().clone(), k2.clone(), x.clone(), a.mul(k2, &x)];
    // y in W_2 commuting with x
    let w2 = &disc.w[1].basis;
    let cols: Vec<Vector> = w2.iter().map(|b| a.commutator(&x, b)).collect();
    let null = linalg::nullspace(f, &linalg::transpose(f, &cols, a.dim()), w2.len());
    let w2x: Vec<Vector> = null.iter().map(|c| linalg::combine(f, a.dim(), c, w2)).collect();
    let y = quaternionize(a, &w2x, |v| l.s_functional(a, 2, v), opts)?;
    let q1 = vec![a.unit().clone(), k1.clone(), y.clone(), a.mul(k1, &y)];
    let complement = a.centralizer(&[k1.clone(), y, k2.clone(), x]);
    let cert = Certificate { quaternions: vec![q1, q2], complement, aligned_l: Some(l.basis.clone()) };
    let v = verify_certificate(s, &cert);
    if !v.ok() {
        return Err(Error::Consistency(format!("constructed certificate fails: {}", v.failures.join("; "))));
    }
    Ok(cert)
}

/// A quaternion K + K z inside the sigma-stable subalgebra `d` containing the
/// quadratic symmetric element k, with z symmetric, z k = gamma(k) z, z^2 in F^x.
pub fn quaternion_containing(s: &Involution, d: &[Vector], k: &[Elem], opts: &Options) -> Result<Vec<Vector>> {
    let a = &s.algebra;
    let f = &a.field;
    let n = a.dim();
    let (k, _) = normalize_generator(a, k)?.ok_or_else(|| Error::Invalid("k is not separable quadratic".into()))?;
    let gk = if f.is_char2() { linalg::add_vec(&k, a.unit()) } else { linalg::neg_vec(&k) };
    let sym = linalg::intersect(f, d, &s.spaces.symm, n);
    let cols: Vec<Vector> = sym.iter().map(|z| linalg::sub_vec(&a.mul(&k, z), &a.mul(z, &gk))).collect();
    let null = linalg::nullspace(f, &linalg::transpose(f, &cols, n), sym.len());
    let tw: Vec<Vector> = null.iter().map(|c| linalg::combine(f, n, c, &sym)).collect();
    let kb = vec![a.unit().clone(), k.clone()];
    let sfun = |x: &Vector| -> Result<Elem> {
        let c = linalg::coords_in(f, &kb, x).ok_or_else(|| Error::NotFound("square leaves F[k]".into()))?;
        Ok(c[1].clone())
    };
    let z = quaternionize(a, &tw, sfun, opts)?;
    Ok(vec![a.unit().clone(), k.clone(), z.clone(), a.mul(&k, &z)])
}

/// e^2 = e and sigma(e) = 1 - e.
pub fn verify_hyperbolic_witness(s: &Involution, e: &[Elem]) -> bool {
    let a = &s.algebra;
    a.square(e) == e && s.apply(e) == linalg::sub_vec(a.unit(), e)
}

/// e^2 = e, sigma(e) e = 0 and dim eA = dim A / 2.
pub fn verify_metabolic_witness(s: &Involution, e: &[Elem]) -> bool {
    let a = &s.algebra;
    if a.square(e) != e || !linalg::is_zero_vec(&a.mul(&s.apply(e), e)) {
        return false;
    }
    let ea: Vec<Vector> = (0..a.dim()).map(|i| a.mul(e, &a.basis(i))).collect();
    2 * linalg::rank(&ea, a.dim()) == a.dim()
}

/// Q = span(1, u, v, uv) from the relations u^2 = u, v^2 = 1, uv + vu = v,
/// sigma(u) = 1 - u + uv, sigma(v) = -1 + 2u + v - uv.
pub fn metabolic_quat_from_uv(s: &Involution, u: &[Elem], v: &[Elem]) -> Result<Vec<Vector>> {
    let a = &s.algebra;
    let f = &a.field;
    let one = a.unit().clone();
    let uv = a.mul(u, v);
    let two = f.from_i64(2);
    let checks = [
        ("u^2 = u", a.square(u) == u),
        ("v^2 = 1", a.square(v) == one),
        ("uv + vu = v", crate::disc::star(a, u, v) == v),
        ("sigma(u) = 1 - u + uv", s.apply(u) == linalg::add_vec(&linalg::sub_vec(&one, u), &uv)),
        (
            "sigma(v) = -1 + 2u + v - uv",
            s.apply(v) == linalg::sub_vec(&linalg::add_vec(&linalg::add_vec(&linalg::neg_vec(&one), &linalg::scale_vec(&two, u)), v), &uv),
        ),
    ];
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(Error::Invalid(format!("relation {name} fails")));
    }
    let q = vec![one, u.to_vec(), v.to_vec(), uv];
    if linalg::rank(&q, a.dim()) != 4 || !a.is_subalgebra(&q) {
        return Err(Error::Invalid("u, v do not span a quaternion algebra".into()));
    }
    if !linalg::is_zero_vec(&a.mul(&s.apply(u), u)) {
        return Err(Error::Consistency("sigma(u) u != 0".into()));
    }
    let r = s.restrict(&q)?;
    if r.class.ty != InvType::Orthogonal {
        return Err(Error::Consistency("restriction is not orthogonal".into()));
    }
    Ok(q)
}

#[derive(Clone, Debug)]
pub enum ExistMetabolic {
    Quaternion { basis: Vec<Vector>, wv: Vector },
    /// sigma restricted to C_A(K) is isotropic: x != 0 in C with sigma(x) x = 0.
    Isotropic { x: Vector },
}

/// Q = K + K w v' from a hyperbolic idempotent e = v + w, v in C_A(K), w in C'.
pub fn existmetabolic_construct(s: &Involution, k: &[Elem], e: &[Elem]) -> Result<ExistMetabolic> {
    let a = &s.algebra;
    let f = &a.field;
    let n = a.dim();
    if !verify_hyperbolic_witness(s, e) {
        return Err(Error::Invalid("e is not a hyperbolic idempotent".into()));
    }
    if !s.is_symmetric(k) {
        return Err(Error::Invalid("K is not symmetric".into()));
    }
    let (k, _) = normalize_generator(a, k)?.ok_or_else(|| Error::Invalid("K is not separable quadratic".into()))?;
    let gk = if f.is_char2() { linalg::add_vec(&k, a.unit()) } else { linalg::neg_vec(&k) };
    let c = a.centralizer(&[k.clone()]);
    let cols: Vec<Vector> = (0..n).map(|i| linalg::sub_vec(&a.mul(&a.basis(i), &k), &a.mul(&gk, &a.basis(i)))).collect();
    let cp: Vec<Vector> = linalg::nullspace(f, &linalg::transpose(f, &cols, n), n);
    if c.len() + cp.len() != n {
        return Err(Error::Consistency("A is not C + C'".into()));
    }
    let all = [c.clone(), cp.clone()].concat();
    let coords = linalg::coords_in(f, &all, e).ok_or_else(|| Error::Consistency("e outside C + C'".into()))?;
    let v = linalg::combine(f, n, &coords[..c.len()], &c);
    let w = linalg::combine(f, n, &coords[c.len()..], &cp);
    // v v' = 1 inside C
    let vc: Vec<Vector> = c.iter().map(|b| a.mul(&v, b)).collect();
    let m = linalg::transpose(f, &vc, n);
    let Some(vinv) = linalg::solve(f, &m, c.len(), a.unit()) else {
        let ker = linalg::nullspace(f, &m, c.len());
        let x = linalg::combine(f, n, &ker[0], &c);
        if !linalg::is_zero_vec(&a.mul(&s.apply(&x), &x)) {
            return Err(Error::Consistency("kernel element is not isotropic".into()));
        }
        return Ok(ExistMetabolic::Isotropic { x });
    };
    let vp = linalg::combine(f, n, &vinv, &c);
    let wv = a.mul(&w, &vp);
    if s.apply(&wv) != linalg::neg_vec(&wv) || a.square(&wv) != *a.unit() {
        return Err(Error::Consistency("w v' fails sigma(wv') = -wv' or (wv')^2 = 1".into()));
    }
    let basis = vec![a.unit().clone(), k.clone(), wv.clone(), a.mul(&k, &wv)];
    if !a.is_subalgebra(&basis) || !quaternion_is_central_simple(a, &basis) {
        return Err(Error::Consistency("K + K wv' is not a quaternion algebra".into()));
    }
    let r = s.restrict(&basis)?;
    if r.class.ty != InvType::Orthogonal {
        return Err(Error::Consistency("restriction is not orthogonal".into()));
    }
    let p = linalg::add_vec(a.unit(), &wv);
    if !linalg::is_zero_vec(&a.mul(&s.apply(&p), &p)) {
        return Err(Error::Consistency("sigma(1 + wv')(1 + wv') != 0".into()));
    }
    Ok(ExistMetabolic::Quaternion { basis, wv })
}

/// Hyperbolic idempotent of (M_n, ad_b) for a hyperbolic diagonal form b:
/// projection onto a Lagrangian along a complementary Lagrangian.
pub fn adjoint_hyperbolic_idempotent(f: &Field, diag: &[Elem], opts: &Options) -> Result<Vector> {
    let n = diag.len();
    if n % 2 != 0 || f.is_char2() {
        return Err(Error::Unsupported("hyperbolic idempotents need even n and characteristic not 2".into()));
    }
    let b = QuadForm::diagonal(f, diag);
    let bil = |x: &Vector, y: &Vector| -> Elem {
        let mut s = f.zero();
        for i in 0..n {
            s = s + &(&diag[i] * &(&x[i] * &y[i]));
        }
        s
    };
    let mut space: Vec<Vector> = (0..n).map(|i| linalg::unit_vec(f, n, i)).collect();
    let (mut us, mut ups) = (Vec::new(), Vec::new());
    while !space.is_empty() {
        let g: Vec<Vec<Elem>> = space.iter().map(|x| space.iter().map(|y| bil(x, y)).collect()).collect();
        let mut c = linalg::zeros(f, space.len(), space.len());
        for i in 0..space.len() {
            c[i][i] = g[i][i].clone();
            for j in i + 1..space.len() {
                c[i][j] = &g[i][j] + &g[i][j];
            }
        }
        let _ = &b;
        let sub = QuadForm::new(f, c)?;
        let iso = sub.isotropic_vector(opts.height_bound).map_err(|_| Error::Invalid("form is not hyperbolic".into()))?;
        let w = linalg::combine(f, n, &iso, &space);
        let partner = space.iter().find(|y| !bil(&w, y).is_zero()).ok_or_else(|| Error::Degenerate("degenerate form".into()))?;
        let mut wp = linalg::scale_vec(&bil(&w, partner).inv().unwrap(), partner);
        // make the partner isotropic: wp - b(wp,wp)/2 w
        let half = f.from_i64(2).inv().unwrap();
        wp = linalg::sub_vec(&wp, &linalg::scale_vec(&(&bil(&wp, &wp) * &half), &w));
        let pair = [w.clone(), wp.clone()];
        // orthogonal complement of the pair inside the current space
        let cols: Vec<Vector> = space.iter().map(|x| pair.iter().map(|p| bil(x, p)).collect()).collect();
        let null = linalg::nullspace(f, &linalg::transpose(f, &cols, 2), space.len());
        space = null.iter().map(|c| linalg::combine(f, n, c, &space)).collect();
        us.push(w);
        ups.push(wp);
    }
    // P = M diag(1,..,1,0,..,0) M^-1 with M = [U | U'] as columns
    let mcols: Vec<Vector> = us.iter().chain(ups.iter()).cloned().collect();
    let m = linalg::transpose(f, &mcols, n);
    let minv = linalg::inverse(f, &m).ok_or_else(|| Error::Consistency("Lagrangians are not complementary".into()))?;
    let mut d = linalg::zeros(f, n, n);
    for i in 0..n / 2 {
        d[i][i] = f.one();
    }
    let p = linalg::mat_mul(f, &linalg::mat_mul(f, &m, &d, n), &minv, n);
    Ok(p.into_iter().flatten().collect())
}

/// A split quaternion with orthogonal metabolic restriction from a hyperbolic
/// idempotent e: f = p + r with p symmetric in eA(1-e), r its inverse in (1-e)Ae.
/// Returns the basis of Q together with (u, v) satisfying the metabolic relations.
pub fn metabolic_factor(s: &Involution, e: &[Elem], opts: &Options) -> Result<(Vec<Vector>, Vector, Vector)> {
    let a = &s.algebra;
    let f = &a.field;
    let n = a.dim();
    if f.is_char2() {
        return Err(Error::Unsupported("metabolic factor construction needs characteristic not 2".into()));
    }
    if !verify_hyperbolic_witness(s, e) {
        return Err(Error::Invalid("e is not a hyperbolic idempotent".into()));
    }
    let one_e = linalg::sub_vec(a.unit(), e);
    let corner = |l: &Vector, r: &Vector| -> Vec<Vector> {
        let imgs: Vec<Vector> = (0..n).map(|i| a.mul(&a.mul(l, &a.basis(i)), r)).collect();
        linalg::span_basis(&imgs, n)
    };
    let p_space = linalg::intersect(f, &corner(&e.to_vec(), &one_e), &s.spaces.symm, n);
    let r_space = corner(&one_e, &e.to_vec());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..50 {
        let p = linalg::random_combination(f, &mut rng, &p_space, n, 3);
        let cols: Vec<Vector> = r_space.iter().map(|r| a.mul(&p, r)).collect();
        let Some(c) = linalg::solve(f, &linalg::transpose(f, &cols, n), r_space.len(), e) else { continue };
        let r = linalg::combine(f, n, &c, &r_space);
        if a.mul(&r, &p) != one_e {
            continue;
        }
        let fv = linalg::add_vec(&p, &r);
        let ef = a.mul(e, &fv);
        // u = 1 - e - f + ef, v = -1/2 + e - 3/2 f + ef
        let u = linalg::add_vec(&linalg::sub_vec(&linalg::sub_vec(a.unit(), e), &fv), &ef);
        let half = f.from_i64(2).inv().unwrap();
        let v = linalg::add_vec(
            &linalg::sub_vec(&linalg::sub_vec(e, &a.scalar(&half)), &linalg::scale_vec(&(f.from_i64(3) * &half), &fv)),
            &ef,
        );
        let q = metabolic_quat_from_uv(s, &u, &v)?;
        return Ok((q, u, v));
    }
    Err(Error::NotFound("no invertible symmetric element in eA(1-e)".into()))
}

/// Decomposition of a hyperbolic capacity-4 instance containing a split
/// quaternion with orthogonal metabolic restriction.
pub fn split_metabolic_decomposition(s: &Involution, e: &[Elem], opts: &Options) -> Result<Certificate> {
    let a = &s.algebra;
    let f = &a.field;
    let n = a.dim();
    let (q, _, _) = metabolic_factor(s, e, opts)?;
    let d = a.centralizer(&q);
    let dsym = linalg::intersect(f, &d, &s.spaces.symd, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    for _ in 0..40 {
        let k = linalg::random_combination(f, &mut rng, &dsym, n, 3);
        if !is_quadratic(a, &k) || normalize_generator(a, &k)?.is_none() || !is_etale(a, &[a.unit().clone(), k.clone()])? {
            continue;
        }
        let Ok(q2) = quaternion_containing(s, &d, &k, opts) else { continue };
        let complement = a.centralizer(&[q.clone(), q2.clone()].concat());
        let cert = Certificate { quaternions: vec![q.clone(), q2], complement, aligned_l: None };
        if verify_certificate(s, &cert).ok() {
            return Ok(cert);
        }
    }
    Err(Error::NotFound("no second quaternion found in the centralizer of the metabolic factor".into()))
}

/// Is Q (4 vectors) split with sigma|Q orthogonal and metabolic?
/// In degree 2 an orthogonal involution is metabolic iff its discriminant is trivial.
pub fn is_split_orthogonal_metabolic(s: &Involution, q: &[Vector]) -> Result<bool> {
    let f = s.field();
    if f.is_char2() {
        return Err(Error::Unsupported("metabolic test needs characteristic not 2".into()));
    }
    let r = s.restrict(q)?;
    if r.class.ty != InvType::Orthogonal {
        return Ok(false);
    }
    let d = r.orth_discriminant(0)?;
    Ok(f.is_square(&d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Decomposable,
    Indecomposable,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: Verdict,
    pub disc: DiscPfister,
    pub certificate: Option<Certificate>,
    pub note: Option<String>,
}

/// Totally decomposable iff the discriminant Pfister form is hyperbolic.
pub fn main_theorem_decide(s: &Involution, l: Option<&Biquadratic>, opts: &Options) -> Result<Decision> {
    let disc = discriminant_pfister(s, l, opts)?;
    match disc.hyperbolic()? {
        None => Ok(Decision {
            verdict: Verdict::Undecided,
            disc,
            certificate: None,
            note: Some("hyperbolicity is not decidable over this field".into()),
        }),
        Some(false) => Ok(Decision { verdict: Verdict::Indecomposable, disc, certificate: None, note: None }),
        Some(true) => match decompose_along_l(s, &disc, opts) {
            Ok(cert) => Ok(Decision { verdict: Verdict::Decomposable, disc, certificate: Some(cert), note: None }),
            Err(Error::NotFound(m)) => Ok(Decision {
                verdict: Verdict::Decomposable,
                disc,
                certificate: None,
                note: Some(format!("witness search exhausted: {m}")),
            }),
            Err(e) => Err(e),
        },
    }
}

impl Decision {
    pub fn to_json(&self, a: &Algebra) -> Result<Value> {
        let f = &a.field;
        let mut v = self.disc.to_json(a)?;
        v["verdict"] = serde_json::to_value(self.verdict).unwrap();
        v["certificate"] = self.certificate.as_ref().map(|c| c.to_json(f)).unwrap_or(Value::Null);
        v["note"] = self.note.clone().map(Value::String).unwrap_or(Value::Null);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::involution::{adjoint_diagonal, canonical, metabolic_m2};
    use std::sync::Arc;

    fn hamilton(f: &Field) -> Arc<Involution> {
        let h = Arc::new(Algebra::quaternion(f, &f.from_i64(-1), &f.from_i64(-1)).unwrap());
        Arc::new(canonical(&h).unwrap())
    }

    fn adj(f: &Field, d: &[i64]) -> Arc<Involution> {
        let m = Arc::new(Algebra::matrix(f, d.len()).unwrap());
        let diag: Vec<Elem> = d.iter().map(|&x| f.from_i64(x)).collect();
        Arc::new(adjoint_diagonal(&m, &diag).unwrap())
    }

    #[test]
    fn hamilton_cube_decomposes_and_round_trips() {
        let f = Field::rational();
        let h = hamilton(&f);
        let s = Involution::tensor_all(&[h.clone(), h.clone(), h]).unwrap();
        let d = main_theorem_decide(&s, None, &Options::default()).unwrap();
        assert_eq!(d.verdict, Verdict::Decomposable);
        let cert = d.certificate.unwrap();
        assert_eq!(cert.quaternions.len(), 2);
        assert_eq!(cert.complement.len(), 4);
        assert!(verify_certificate(&s, &cert).ok());
        let back = Certificate::from_json(&cert.to_json(&f)).unwrap();
        assert_eq!(back, cert);
        let mut bad = cert.clone();
        bad.quaternions[0][2] = vec![f.zero(); 64];
        let v = verify_certificate(&s, &bad);
        assert!(v.failures.iter().any(|m| m.starts_with("closure")));
    }

    #[test]
    fn indecomposable_symplectic() {
        let f = Field::rational();
        let s = Involution::tensor(&adj(&f, &[1, 1, 1, -1]), &hamilton(&f)).unwrap();
        let d = main_theorem_decide(&s, None, &Options::default()).unwrap();
        assert_eq!(d.verdict, Verdict::Indecomposable);
        assert!(matches!(decompose_along_l(&s, &d.disc, &Options::default()), Err(Error::Invalid(_))));
    }

    #[test]
    fn orthogonal_and_unitary_certificates() {
        let f = Field::rational();
        for d in [[1, 1, 1, 1], [1, -1, 2, -2], [1, 2, 3, 6]] {
            let s = adj(&f, &d);
            let dec = main_theorem_decide(&s, None, &Options::default()).unwrap();
            assert_eq!(dec.verdict, Verdict::Decomposable, "{d:?}");
            assert_eq!(dec.certificate.unwrap().complement.len(), 1);
        }
        let z = Arc::new(Algebra::etale(&f, &f.from_i64(3)).unwrap());
        let cz = Arc::new(canonical(&z).unwrap());
        let s = Involution::tensor(&adj(&f, &[1, 1, 1, 1]), &cz).unwrap();
        let dec = main_theorem_decide(&s, None, &Options::default()).unwrap();
        assert_eq!(dec.verdict, Verdict::Decomposable);
        assert_eq!(dec.certificate.unwrap().complement.len(), 2);
    }

    #[test]
    fn non_commuting_quaternions_are_rejected() {
        let f = Field::rational();
        let s = adj(&f, &[1, 1, 1, 1]);
        let dec = main_theorem_decide(&s, None, &Options::default()).unwrap();
        let mut cert = dec.certificate.unwrap();
        cert.quaternions[1] = cert.quaternions[0].clone();
        let v = verify_certificate(&s, &cert);
        assert!(v.failures.iter().any(|m| m.starts_with("independence")), "{:?}", v.failures);
    }

    #[test]
    fn witnesses() {
        let f = Field::rational();
        let m2 = Arc::new(Algebra::matrix(&f, 2).unwrap());
        let met = metabolic_m2(&m2).unwrap();
        assert!(verify_metabolic_witness(&met, &m2.basis(3)));
        assert!(!verify_metabolic_witness(&met, &m2.basis(0)));
        let t = adjoint_diagonal(&m2, &[f.one(), f.one()]).unwrap();
        assert!(!verify_hyperbolic_witness(&t, &m2.basis(0)));
        // e = (1 + w)/2 with sigma(w) = -w, w^2 = 1 for ad_<1,-1>
        let h = adjoint_diagonal(&m2, &[f.one(), -f.one()]).unwrap();
        let w = vec![f.zero(), f.one(), f.one(), f.zero()];
        assert_eq!(h.apply(&w), linalg::neg_vec(&w));
        let half = f.from_i64(2).inv().unwrap();
        let e = linalg::scale_vec(&half, &linalg::add_vec(m2.unit(), &w));
        assert!(verify_hyperbolic_witness(&h, &e));
        // the model u, v
        let u = m2.basis(3);
        let v = linalg::add_vec(&m2.basis(1), &m2.basis(2));
        let q = metabolic_quat_from_uv(&met, &u, &v).unwrap();
        assert_eq!(q.len(), 4);
        assert!(metabolic_quat_from_uv(&met, &m2.zero(), &v).is_err());
    }

    #[test]
    fn existmetabolic_on_matrix_model() {
        let f = Field::rational();
        for (d, alpha) in [(2, 3), (2, 11), (3, 7), (5, 6), (7, 8)] {
            // b = trace form of <1, -alpha> over Q(sqrt d); k = multiplication by sqrt d
            let s = adj(&f, &[1, d, -alpha, -alpha * d]);
            let a = &s.algebra;
            let mut k = a.zero();
            for blk in [0, 2] {
                k[blk * 4 + blk + 1] = f.from_i64(d);
                k[(blk + 1) * 4 + blk] = f.one();
            }
            let diag: Vec<Elem> = [1, d, -alpha, -alpha * d].iter().map(|&x| f.from_i64(x)).collect();
            let e = adjoint_hyperbolic_idempotent(&f, &diag, &Options::default()).unwrap();
            match existmetabolic_construct(&s, &k, &e).unwrap() {
                ExistMetabolic::Quaternion { basis, wv } => {
                    assert_eq!(a.square(&wv), *a.unit());
                    assert!(is_split_orthogonal_metabolic(&s, &basis).unwrap());
                }
                ExistMetabolic::Isotropic { .. } => panic!("sigma|C is anisotropic for d = {d}"),
            }
        }
        // sigma|C isotropic: the kernel witness comes back
        let s = adj(&f, &[1, 2, -1, -2]);
        let a = &s.algebra;
        let mut k = a.zero();
        for blk in [0, 2] {
            k[blk * 4 + blk + 1] = f.from_i64(2);
            k[(blk + 1) * 4 + blk] = f.one();
        }
        let diag: Vec<Elem> = [1, 2, -1, -2].iter().map(|&x| f.from_i64(x)).collect();
        let e = adjoint_hyperbolic_idempotent(&f, &diag, &Options::default()).unwrap();
        if let ExistMetabolic::Isotropic { x } = existmetabolic_construct(&s, &k, &e).unwrap() {
            assert!(linalg::is_zero_vec(&a.mul(&s.apply(&x), &x)));
        }
    }

    #[test]
    fn metabolic_factor_from_adjoint_idempotent() {
        let f = Field::rational();
        for d in [[1, 1, -2, -2], [1, -1, 1, -1], [1, 3, -1, -3]] {
            let diag: Vec<Elem> = d.iter().map(|&x| f.from_i64(x)).collect();
            let s = adj(&f, &d);
            let e = adjoint_hyperbolic_idempotent(&f, &diag, &Options::default()).unwrap();
            assert!(verify_hyperbolic_witness(&s, &e));
            let cert = split_metabolic_decomposition(&s, &e, &Options::default()).unwrap();
            assert!(is_split_orthogonal_metabolic(&s, &cert.quaternions[0]).unwrap());
        }
    }

    #[test]
    fn char2_cubes_decompose() {
        for (q, k) in [(2u32, 1u32), (2, 2)] {
            let g = Field::finite(q, k).unwrap();
            let h = Arc::new(canonical(&Arc::new(Algebra::quaternion(&g, &g.one(), &g.one()).unwrap())).unwrap());
            let s = Involution::tensor_all(&[h.clone(), h.clone(), h]).unwrap();
            let d = main_theorem_decide(&s, None, &Options::default()).unwrap();
            assert!(d.disc.c.is_one());
            assert_eq!(d.verdict, Verdict::Decomposable);
            assert!(verify_certificate(&s, d.certificate.as_ref().unwrap()).ok());
        }
    }
}
