//! Instance files: field, tensor factors with involutions, optional L and options.

use std::sync::Arc;

use serde_json::Value;

use crate::algebra::Algebra;
use crate::disc::Options;
use crate::error::{Error, Result};
use crate::etale::Biquadratic;
use crate::field::{Elem, Field};
use crate::involution::{adjoint_diagonal, canonical, metabolic_m2, quaternion_orthogonal, switch, Involution};
use crate::linalg::Vector;

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: Option<String>,
    pub field: Field,
    pub involution: Arc<Involution>,
    pub l: Option<Biquadratic>,
    pub options: Options,
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Invalid(m) => Error::Invalid(format!("{path}: {m}")),
        e => e,
    })
}

fn need<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Invalid(format!("{path}.{key}: missing")))
}

fn elem(f: &Field, v: &Value, path: &str) -> Result<Elem> {
    at(path, f.elem_from_json(v))
}

fn elems(f: &Field, v: &Value, path: &str) -> Result<Vector> {
    let arr = v.as_array().ok_or_else(|| Error::Invalid(format!("{path}: expected a list")))?;
    arr.iter().enumerate().map(|(i, x)| elem(f, x, &format!("{path}[{i}]"))).collect()
}

fn algebra(f: &Field, v: &Value, path: &str) -> Result<Arc<Algebra>> {
    let kind = need(v, "kind", path)?.as_str().ok_or_else(|| Error::Invalid(format!("{path}.kind: expected a string")))?;
    let a = match kind {
        "quaternion" => {
            let a = elem(f, need(v, "a", path)?, &format!("{path}.a"))?;
            let b = elem(f, need(v, "b", path)?, &format!("{path}.b"))?;
            at(path, Algebra::quaternion(f, &a, &b))?
        }
        "matrix" => {
            let n = need(v, "n", path)?.as_u64().filter(|&n| (1..=16).contains(&n)).ok_or_else(|| Error::Invalid(format!("{path}.n: expected an integer in 1..=16")))?;
            at(path, Algebra::matrix(f, n as usize))?
        }
        "etale_center" => {
            let d = elem(f, need(v, "d", path)?, &format!("{path}.d"))?;
            at(path, Algebra::etale(f, &d))?
        }
        "double" => {
            let base = algebra(f, need(v, "base", path)?, &format!("{path}.base"))?;
            Algebra::double(&base)
        }
        "raw" => {
            let dim = need(v, "dim", path)?.as_u64().ok_or_else(|| Error::Invalid(format!("{path}.dim: expected an integer")))? as usize;
            let rows = need(v, "mult", path)?.as_array().ok_or_else(|| Error::Invalid(format!("{path}.mult: expected a list")))?;
            let mut mult = Vec::with_capacity(dim);
            for (i, r) in rows.iter().enumerate() {
                let r = r.as_array().ok_or_else(|| Error::Invalid(format!("{path}.mult[{i}]: expected a list")))?;
                mult.push(r.iter().enumerate().map(|(j, x)| elems(f, x, &format!("{path}.mult[{i}][{j}]"))).collect::<Result<Vec<_>>>()?);
            }
            let unit = elems(f, need(v, "unit", path)?, &format!("{path}.unit"))?;
            if unit.len() != dim {
                return Err(Error::Invalid(format!("{path}.unit: length {} differs from dim {dim}", unit.len())));
            }
            at(path, Algebra::raw(f, mult, unit))?
        }
        k => return Err(Error::Invalid(format!("{path}.kind: unknown factor kind {k:?}"))),
    };
    Ok(Arc::new(a))
}

fn involution(a: &Arc<Algebra>, kind: &str, v: &Value, path: &str) -> Result<Involution> {
    let f = &a.field;
    let tok = match v.get("involution") {
        Some(t) => t,
        None if kind == "etale_center" => &Value::Null,
        None => return Err(Error::Invalid(format!("{path}.involution: missing"))),
    };
    let p = format!("{path}.involution");
    match tok {
        Value::Null => at(&p, canonical(a)),
        Value::String(s) => match s.as_str() {
            "canonical" => at(&p, canonical(a)),
            "switch" => at(&p, switch(a)),
            "metabolic" => at(&p, metabolic_m2(a)),
            "transpose" => {
                let n = (a.dim() as f64).sqrt() as usize;
                at(&p, adjoint_diagonal(a, &vec![f.one(); n]))
            }
            t => Err(Error::Invalid(format!("{p}: unknown involution token {t:?}"))),
        },
        Value::Object(o) if o.len() == 1 => {
            let (k, x) = o.iter().next().unwrap();
            let q = format!("{p}.{k}");
            match k.as_str() {
                "orthogonal_s" => at(&q, quaternion_orthogonal(a, &elems(f, x, &q)?)),
                "adjoint_diag" => at(&q, adjoint_diagonal(a, &elems(f, x, &q)?)),
                "unitary_center" => {
                    if kind != "etale_center" || elem(f, x, &q)? != elem(f, need(v, "d", path)?, &format!("{path}.d"))? {
                        return Err(Error::Invalid(format!("{q}: only valid on an etale_center factor with the same d")));
                    }
                    at(&q, canonical(a))
                }
                "matrix" => {
                    let rows = x.as_array().ok_or_else(|| Error::Invalid(format!("{q}: expected a list of rows")))?;
                    let m = rows.iter().enumerate().map(|(i, r)| elems(f, r, &format!("{q}[{i}]"))).collect::<Result<Vec<_>>>()?;
                    at(&q, Involution::from_matrix(a, &m))
                }
                t => Err(Error::Invalid(format!("{p}: unknown involution {t:?}"))),
            }
        }
        _ => Err(Error::Invalid(format!("{p}: expected a token or a single-key object"))),
    }
}

impl Instance {
    pub fn from_str(text: &str) -> Result<Instance> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("line {} column {}: {e}", e.line(), e.column())))?;
        Instance::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Instance> {
        let field = at("field", Field::from_json(need(v, "field", "instance")?))?;
        let facs = need(v, "factors", "instance")?.as_array().ok_or_else(|| Error::Invalid("factors: expected a list".into()))?;
        if facs.is_empty() {
            return Err(Error::Invalid("factors: empty".into()));
        }
        let mut invs = Vec::with_capacity(facs.len());
        for (i, fv) in facs.iter().enumerate() {
            let path = format!("factors[{i}]");
            let a = algebra(&field, fv, &path)?;
            let kind = fv["kind"].as_str().unwrap_or_default();
            invs.push(Arc::new(involution(&a, kind, fv, &path)?));
        }
        let involution = if invs.len() == 1 { invs.pop().unwrap() } else { Arc::new(at("factors", Involution::tensor_all(&invs))?) };
        let mut options = Options::default();
        if let Some(o) = v.get("options") {
            if let Some(h) = o.get("height_bound") {
                options.height_bound = h.as_u64().ok_or_else(|| Error::Invalid("options.height_bound: expected an integer".into()))?;
            }
            if let Some(s) = o.get("seed") {
                options.seed = s.as_u64().ok_or_else(|| Error::Invalid("options.seed: expected an integer".into()))?;
            }
        }
        let l = match v.get("L") {
            None | Some(Value::Null) => None,
            Some(lv) => {
                let gens = need(lv, "generators", "L")?.as_array().filter(|g| g.len() == 2).ok_or_else(|| Error::Invalid("L.generators: expected two coordinate vectors".into()))?;
                let x = elems(&field, &gens[0], "L.generators[0]")?;
                let y = elems(&field, &gens[1], "L.generators[1]")?;
                let a = &involution.algebra;
                if x.len() != a.dim() || y.len() != a.dim() {
                    return Err(Error::Invalid(format!("L.generators: vectors must have length {}", a.dim())));
                }
                Some(at("L", Biquadratic::from_quadratic_gens(a, &x, &y))?)
            }
        };
        let name = v.get("name").and_then(Value::as_str).map(str::to_string);
        Ok(Instance { name, field, involution, l, options })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::involution::InvType;
    use serde_json::json;

    #[test]
    fn loads_tensor_instances() {
        let v = json!({
            "field": {"kind": "rational"},
            "factors": [
                {"kind": "matrix", "n": 4, "involution": {"adjoint_diag": ["1", "1", "1", "-1"]}},
                {"kind": "quaternion", "a": "-1", "b": "-1", "involution": "canonical"}
            ],
            "options": {"seed": 3}
        });
        let inst = Instance::from_json(&v).unwrap();
        assert_eq!(inst.involution.class.ty, InvType::Symplectic);
        assert_eq!(inst.involution.class.capacity, 4);
        assert_eq!(inst.options.seed, 3);
        assert_eq!(inst.options.height_bound, 200);

        let v = json!({
            "field": {"kind": "finite", "p": 2, "k": 2},
            "factors": [{"kind": "double", "base": {"kind": "matrix", "n": 4}, "involution": "switch"}]
        });
        let inst = Instance::from_json(&v).unwrap();
        assert_eq!(inst.involution.class.ty, InvType::Unitary);
        assert_eq!(inst.involution.class.capacity, 4);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = r#"{"field": {"kind": "rational"}, "factors": [{"kind": "matrix", "n": 2, "involution": {"adjoint_diag": ["1", "0"]}}]}"#;
        let e = Instance::from_str(bad).unwrap_err().to_string();
        assert!(e.contains("factors[0].involution.adjoint_diag"), "{e}");
        let e = Instance::from_str("{\"field\": \n 3,}").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = Instance::from_str(r#"{"field": {"kind": "rational"}, "factors": [{"kind": "octonion"}]}"#).unwrap_err().to_string();
        assert!(e.contains("factors[0].kind"), "{e}");
    }
}
