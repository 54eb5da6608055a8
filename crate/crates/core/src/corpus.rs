//! Built-in instance corpus shared by the self-test and the acceptance suite.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::algebra::Algebra;
use crate::decompose::adjoint_hyperbolic_idempotent;
use crate::disc::Options;
use crate::error::Result;
use crate::field::{Elem, Field};
use crate::instance::Instance;
use crate::involution::{adjoint_diagonal, Involution};
use crate::linalg::Vector;

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub spec: Value,
    /// Expected verdict when known from the construction.
    pub decomposable: Option<bool>,
}

impl Entry {
    pub fn load(&self) -> Result<Instance> {
        Instance::from_json(&self.spec)
    }
}

#[derive(Clone, Copy)]
enum Inv {
    Can,
    Orth(usize),
}

fn quat(a: i64, b: i64, inv: Inv) -> Value {
    let tok = match inv {
        Inv::Can => json!("canonical"),
        Inv::Orth(i) => {
            let mut s = vec!["0"; 4];
            s[i] = "1";
            json!({ "orthogonal_s": s })
        }
    };
    json!({"kind": "quaternion", "a": a.to_string(), "b": b.to_string(), "involution": tok})
}

fn adj(diag: &[i64]) -> Value {
    let d: Vec<String> = diag.iter().map(i64::to_string).collect();
    json!({"kind": "matrix", "n": diag.len(), "involution": {"adjoint_diag": d}})
}

fn center(d: i64) -> Value {
    json!({"kind": "etale_center", "d": d.to_string(), "involution": "canonical"})
}

fn rational(name: String, factors: Vec<Value>, dec: Option<bool>) -> Entry {
    let spec = json!({"name": name, "field": {"kind": "rational"}, "factors": factors});
    Entry { name, spec, decomposable: dec }
}

const U: Inv = Inv::Orth(1);
const V: Inv = Inv::Orth(2);
const UV: Inv = Inv::Orth(3);
const C: Inv = Inv::Can;

/// Tensor products of quaternions with involution over Q: orthogonal degree 4,
/// unitary degree 4 and symplectic degree 8.
pub fn decomposable_rational() -> Vec<Entry> {
    let orth: [[(i64, i64, Inv); 2]; 7] = [
        [(-1, -1, C), (-1, -1, C)],
        [(2, 5, C), (-1, 3, C)],
        [(-1, -1, U), (-1, -1, V)],
        [(2, 3, U), (-2, 5, UV)],
        [(-1, 7, C), (3, -5, C)],
        [(1, 1, U), (-1, -1, U)],
        [(-3, -7, V), (2, -1, V)],
    ];
    let unit: [([(i64, i64, Inv); 2], i64); 7] = [
        ([(-1, -1, C), (-1, -1, C)], -1),
        ([(2, 5, U), (-1, 3, V)], 3),
        ([(-1, -1, C), (2, 3, U)], -3),
        ([(3, -5, UV), (-2, -2, U)], 2),
        ([(1, 1, C), (-1, 7, V)], 5),
        ([(-1, 7, U), (-3, -1, C)], -1),
        ([(2, -7, V), (5, 3, UV)], 1),
    ];
    let symp: [[(i64, i64, Inv); 3]; 7] = [
        [(-1, -1, C), (-1, -1, C), (-1, -1, C)],
        [(2, 5, C), (-1, 3, C), (-2, -5, C)],
        [(-1, -1, U), (2, 3, V), (-1, -1, C)],
        [(3, -5, C), (-1, 7, U), (2, 2, UV)],
        [(-1, -1, C), (-1, -1, U), (-1, -1, V)],
        [(1, 1, U), (-3, -7, V), (5, -2, C)],
        [(-2, -3, V), (-1, -5, UV), (3, 3, C)],
    ];
    let mut out = Vec::new();
    for (i, qs) in orth.iter().enumerate() {
        out.push(rational(format!("orthogonal-tensor-{i}"), qs.iter().map(|&(a, b, t)| quat(a, b, t)).collect(), Some(true)));
    }
    for (i, (qs, d)) in unit.iter().enumerate() {
        let mut f: Vec<Value> = qs.iter().map(|&(a, b, t)| quat(a, b, t)).collect();
        f.push(center(*d));
        out.push(rational(format!("unitary-tensor-{i}"), f, Some(true)));
    }
    for (i, qs) in symp.iter().enumerate() {
        out.push(rational(format!("symplectic-tensor-{i}"), qs.iter().map(|&(a, b, t)| quat(a, b, t)).collect(), Some(true)));
    }
    out
}

const BETAS: [[i64; 4]; 10] = [
    [1, 1, 1, 1],
    [1, 1, 1, -1],
    [1, 1, 1, 7],
    [1, 2, 3, 6],
    [1, -1, 2, -2],
    [1, 1, 1, 2],
    [1, 3, 5, 7],
    [2, 3, -5, 7],
    [1, 1, -1, 3],
    [-1, -2, -3, 5],
];

/// Orthogonal, unitary and symplectic instances built on ad_beta, ten of each.
pub fn formula_shapes() -> Vec<Entry> {
    let deltas = [-1, 3, 2, -3, 5, -2, -7, 6, 7, -5];
    let quats = [(-1, -1), (-1, 3), (2, 5), (-2, -3), (3, -7), (-1, -1), (2, -1), (5, 7), (-3, -3), (1, 1)];
    let mut out = Vec::new();
    for (i, b) in BETAS.iter().enumerate() {
        out.push(rational(format!("formula-orthogonal-{i}"), vec![adj(b)], None));
    }
    for (i, b) in BETAS.iter().enumerate() {
        out.push(rational(format!("formula-unitary-{i}"), vec![adj(b), center(deltas[i])], None));
    }
    for (i, b) in BETAS.iter().enumerate() {
        let (qa, qb) = quats[i];
        out.push(rational(format!("formula-symplectic-{i}"), vec![adj(b), quat(qa, qb, C)], None));
    }
    out
}

/// ad<1,1,1,-1> x ((-1,-1), can): the discriminant Pfister form is the sum of eight squares.
pub fn eight_squares() -> Entry {
    rational("eight-squares".into(), vec![adj(&[1, 1, 1, -1]), quat(-1, -1, C)], Some(false))
}

/// Symplectic degree-8 tensor cubes of characteristic-2 quaternions u^2 = a, v^2 = b, uv + vu = 1.
pub fn char2_symplectic() -> Vec<Entry> {
    let gf2 = json!({"kind": "finite", "p": 2, "k": 1});
    let gf4 = json!({"kind": "finite", "p": 2, "k": 2});
    let q = |a: u32, b: u32| json!({"kind": "quaternion", "a": a.to_string(), "b": b.to_string(), "involution": "canonical"});
    let cases = [
        ("gf2-cube", &gf2, [(1, 1), (1, 1), (1, 1)]),
        ("gf4-cube-a", &gf4, [(1, 1), (2, 1), (3, 2)]),
        ("gf4-cube-b", &gf4, [(2, 3), (3, 3), (1, 2)]),
        ("gf4-cube-c", &gf4, [(3, 1), (1, 3), (2, 2)]),
    ];
    cases
        .iter()
        .map(|(name, field, qs)| Entry {
            name: name.to_string(),
            spec: json!({"name": name, "field": field, "factors": qs.iter().map(|&(a, b)| q(a, b)).collect::<Vec<_>>()}),
            decomposable: Some(true),
        })
        .collect()
}

/// Further indecomposable or structurally distinct instances for the self-test.
pub fn extras() -> Vec<Entry> {
    vec![
        eight_squares(),
        rational("orthogonal-disc-7".into(), vec![adj(&[1, 1, 1, 7])], Some(false)),
        rational("unitary-disc-minus-1".into(), vec![adj(&[1, 1, 1, -1]), center(-1)], Some(false)),
        Entry {
            name: "switch-m4".into(),
            spec: json!({"name": "switch-m4", "field": {"kind": "rational"}, "factors": [{"kind": "double", "base": {"kind": "matrix", "n": 4}, "involution": "switch"}]}),
            decomposable: Some(true),
        },
    ]
}

/// Everything the self-test runs.
pub fn selftest() -> Vec<Entry> {
    let mut v = decomposable_rational();
    v.extend(extras());
    v.extend(char2_symplectic());
    v
}

/// Hyperbolic ad_b on M_4 with b the trace form of <1, -alpha> over Q(sqrt d),
/// k = multiplication by sqrt d and a hyperbolic idempotent e. Here
/// alpha = x^2 + d y^2 is not in Q^2 or d Q^2, so sigma restricted to the
/// centralizer of k is anisotropic.
pub struct ExistMetabolicCase {
    pub d: i64,
    pub alpha: i64,
    pub s: Arc<Involution>,
    pub k: Vector,
    pub e: Vector,
}

pub fn existmetabolic_cases() -> Result<Vec<ExistMetabolicCase>> {
    let f = Field::rational();
    let mut out = Vec::new();
    for (d, alpha) in [(2, 3), (2, 11), (3, 7), (5, 6), (7, 8), (3, 13)] {
        let diag: Vec<Elem> = [1, d, -alpha, -alpha * d].iter().map(|&x| f.from_i64(x)).collect();
        let m = Arc::new(Algebra::matrix(&f, 4)?);
        let s = Arc::new(adjoint_diagonal(&m, &diag)?);
        let mut k = m.zero();
        for blk in [0, 2] {
            k[blk * 4 + blk + 1] = f.from_i64(d);
            k[(blk + 1) * 4 + blk] = f.one();
        }
        let e = adjoint_hyperbolic_idempotent(&f, &diag, &Options::default())?;
        out.push(ExistMetabolicCase { d, alpha, s, k, e });
    }
    Ok(out)
}

/// Hyperbolic instances of even coindex with a hyperbolic idempotent:
/// ad_b for hyperbolic b, alone and tensored with a quadratic centre or a quaternion.
pub struct HyperbolicCase {
    pub name: String,
    pub s: Arc<Involution>,
    pub e: Vector,
}

pub fn hyperbolic_cases() -> Result<Vec<HyperbolicCase>> {
    let f = Field::rational();
    let forms: [[i64; 4]; 4] = [[1, -1, 1, -1], [1, 1, -2, -2], [1, 3, -1, -3], [2, -2, 5, -5]];
    let mut out = Vec::new();
    for b in forms {
        let spec = json!({"field": {"kind": "rational"}, "factors": [adj(&b)]});
        let base = Instance::from_json(&spec)?.involution;
        let diag: Vec<Elem> = b.iter().map(|&x| f.from_i64(x)).collect();
        let e = adjoint_hyperbolic_idempotent(&f, &diag, &Options::default())?;
        out.push(HyperbolicCase { name: format!("ad{b:?}"), s: base.clone(), e: e.clone() });
        for (tag, extra) in [("unitary", center(-1)), ("symplectic", quat(-1, -1, C))] {
            let spec = json!({"field": {"kind": "rational"}, "factors": [adj(&b), extra]});
            let s = Instance::from_json(&spec)?.involution;
            // e x 1 in (M_4 x X)
            let m = s.algebra.dim() / 16;
            let mut ee = s.algebra.zero();
            for (p, x) in e.iter().enumerate() {
                ee[p * m] = x.clone();
            }
            out.push(HyperbolicCase { name: format!("ad{b:?}-{tag}"), s, e: ee });
        }
    }
    Ok(out)
}
