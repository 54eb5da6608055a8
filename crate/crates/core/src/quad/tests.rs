use super::*;
use crate::field::Field;

fn q_i64(f: &Field, e: &[i64]) -> QuadForm {
    QuadForm::diagonal_i64(f, e)
}

fn ivec(f: &Field, v: &[i64]) -> Vector {
    v.iter().map(|&x| f.from_i64(x)).collect()
}

#[test]
fn invariant_examples() {
    let f = Field::rational();
    let h = q_i64(&f, &[1, -1]).invariants().unwrap();
    assert_eq!(h.det_class, Some((-1).into()));
    assert!(h.hasse.values().all(|&e| e == 1));
    assert_eq!(h.signature, Some((1, 1)));
    let s = q_i64(&f, &[1, 1, 1, 1]).invariants().unwrap();
    assert_eq!((s.det_class, s.signature), (Some(1.into()), Some((4, 0))));
    let g2 = Field::finite(2, 1).unwrap();
    let b = QuadForm::binary_block(&g2, &g2.one(), &g2.one());
    assert_eq!(b.invariants().unwrap().arf, Some(1));
    // oracle: x^2+xy+y^2 has no nonzero root over GF(2)
    let roots = (0..4).filter(|m| {
        let v = vec![g2.from_i64(m & 1), g2.from_i64(m >> 1)];
        m != &0 && b.eval(&v).is_zero()
    });
    assert_eq!(roots.count(), 0);
}

// no primitive solution mod 8 means anisotropic at 2
fn primitive_zero_mod(e: &[i64], m: i64) -> bool {
    let n = e.len();
    let total = (m as u64).pow(n as u32);
    (1..total).any(|code| {
        let mut c = code;
        let mut s = 0i64;
        let mut prim = false;
        for a in e {
            let x = (c % m as u64) as i64;
            c /= m as u64;
            prim |= x % 2 == 1;
            s += a * x * x;
        }
        prim && s.rem_euclid(m) == 0
    })
}

#[test]
fn isotropy_examples() {
    let f = Field::rational();
    let a = q_i64(&f, &[1, 1, 1, -7]);
    assert!(!a.is_isotropic().unwrap());
    assert!(!primitive_zero_mod(&[1, 1, 1, -7], 8));
    let b = q_i64(&f, &[1, 1, 1, 1, -7]);
    assert!(b.is_isotropic().unwrap());
    assert!(b.eval(&ivec(&f, &[2, 1, 1, 1, 1])).is_zero());
    let v = b.isotropic_vector(200).unwrap();
    assert!(b.eval(&v).is_zero() && !linalg::is_zero_vec(&v));
    let g3 = Field::finite(3, 1).unwrap();
    let c = q_i64(&g3, &[1, 1]);
    assert!(!c.is_isotropic().unwrap());
    let brute = (1..9).any(|m| c.eval(&ivec(&g3, &[m % 3, m / 3])).is_zero());
    assert!(!brute);
    assert!(matches!(q_i64(&f, &[1, 1]).isotropic_vector(50), Err(Error::NotFound(_))));
    let h = q_i64(&f, &[1, -1]).isotropic_vector(5).unwrap();
    assert!(q_i64(&f, &[1, -1]).eval(&h).is_zero());
    let m = Field::multiquadratic(&[2]).unwrap();
    assert!(matches!(q_i64(&m, &[1, 1, 1]).is_isotropic(), Err(Error::Unsupported(_))));
}

#[test]
fn witt_index_examples() {
    let f = Field::rational();
    assert_eq!(q_i64(&f, &[1, -1, 1, -1]).witt_index().unwrap(), 2);
    assert_eq!(q_i64(&f, &[1; 8]).witt_index().unwrap(), 0);
    let q = q_i64(&f, &[1, 1, 1, -7, -7, -7]);
    let w = q.witt_index().unwrap();
    // oracle: two orthogonal independent isotropic vectors of small height,
    // and the determinant class -7 rules out index 3
    let e = [1i64, 1, 1, -7, -7, -7];
    let r = 4i64;
    let side = 2 * r + 1;
    let mut iso: Vec<Vec<i64>> = Vec::new();
    for code in 0..side.pow(6) {
        let mut c = code;
        let v: Vec<i64> = (0..6).map(|_| { let x = c % side - r; c /= side; x }).collect();
        if v.iter().any(|&t| t != 0) && e.iter().zip(&v).map(|(a, x)| a * x * x).sum::<i64>() == 0 {
            iso.push(v);
        }
    }
    let indep = |x: &[i64], y: &[i64]| (0..6).any(|i| (0..6).any(|j| x[i] * y[j] != x[j] * y[i]));
    let pair = iso.iter().any(|x| {
        iso.iter().any(|y| e.iter().zip(x.iter().zip(y)).map(|(a, (s, t))| a * s * t).sum::<i64>() == 0 && indep(x, y))
    });
    assert!(pair);
    assert_eq!(q.invariants().unwrap().det_class, Some((-7).into()));
    assert_eq!(w, 2);
}

#[test]
fn isometry_with_explicit_basis_change() {
    let f = Field::rational();
    let a = q_i64(&f, &[1, 1, 1, 1]);
    let b = q_i64(&f, &[3, 3, 3, 3]);
    assert!(a.is_isometric(&b).unwrap());
    // left multiplication by 1+i+j on Hamilton quaternions scales the norm by 3
    let lq: Vec<Vec<i64>> = vec![vec![1, -1, -1, 0], vec![1, 1, 0, 1], vec![1, 0, 1, -1], vec![0, -1, 1, 1]];
    let p: Matrix = (0..4).map(|j| (0..4).map(|i| f.from_i64(lq[i][j])).collect()).collect();
    let t = a.transform(&p);
    assert!(t.is_isometric(&b).unwrap());
    assert_eq!(t.coeffs(), b.coeffs());
    assert!(!q_i64(&f, &[1, 1]).is_isometric(&q_i64(&f, &[1, -1])).unwrap());
    assert!(a.is_isometric(&a).unwrap());
}

#[test]
fn similarity_examples() {
    let f = Field::rational();
    let c = q_i64(&f, &[1, 1]).is_similar(&q_i64(&f, &[2, 2])).unwrap().unwrap();
    assert!(q_i64(&f, &[1, 1]).scale(&c).is_isometric(&q_i64(&f, &[2, 2])).unwrap());
    assert!(q_i64(&f, &[1, 1]).is_similar(&q_i64(&f, &[1, -1])).unwrap().is_none());
    assert!(q_i64(&f, &[7, 7, 7, 7]).is_similar(&q_i64(&f, &[1, 1, 1, 1])).unwrap().is_some());
    // square determinant but similarity needs the prime 11
    assert!(q_i64(&f, &[1, 1]).is_similar(&q_i64(&f, &[11, 11])).unwrap().is_some());
}

#[test]
fn pfister_normalize_examples() {
    let f = Field::rational();
    let p = q_i64(&f, &[3, 3, 3, 3]).pfister_normalize(2).unwrap();
    assert_eq!(p.form.coeffs(), q_i64(&f, &[1, 1, 1, 1]).coeffs());
    let h = q_i64(&f, &[1, 1, 1, 1, -7, -7, -7, -7]).pfister_normalize(3).unwrap();
    assert_eq!(h.form.witt_index().unwrap(), 4);
    let b = q_i64(&f, &[2, -14]).pfister_normalize(1).unwrap();
    assert!(b.form.is_isometric(&q_i64(&f, &[1, -7])).unwrap());
    assert!(q_i64(&f, &[1, 1, 1]).pfister_normalize(2).is_err());
}

// oracle: q(x + sqrt(d) y) = q(x) + d q(y) + sqrt(d) b(x, y)
fn ext_witness(e: &[i64], d: i64, r: i64) -> bool {
    let n = e.len();
    let side = 2 * r + 1;
    let total = side.pow(2 * n as u32);
    (1..total).any(|code| {
        let mut c = code;
        let v: Vec<i64> = (0..2 * n).map(|_| { let x = c % side - r; c /= side; x }).collect();
        let (x, y) = v.split_at(n);
        let qx: i64 = e.iter().zip(x).map(|(a, b)| a * b * b).sum();
        let qy: i64 = e.iter().zip(y).map(|(a, b)| a * b * b).sum();
        let bxy: i64 = e.iter().zip(x.iter().zip(y)).map(|(a, (b, c))| a * b * c).sum();
        v.iter().any(|&t| t != 0) && bxy == 0 && qx + d * qy == 0
    })
}

#[test]
fn quadratic_extension_examples() {
    let f = Field::rational();
    assert!(q_i64(&f, &[1, 1]).quadratic_ext_isotropy(&(-1).into()).unwrap());
    assert!(!q_i64(&f, &[1, 1]).quadratic_ext_isotropy(&2.into()).unwrap());
    assert!(q_i64(&f, &[1, -7]).quadratic_ext_isotropy(&7.into()).unwrap());
    assert!(q_i64(&f, &[1, 1]).quadratic_ext_isotropy(&4.into()).is_err());
    for (e, d) in [(vec![1, 1, 1], -1), (vec![1, 1, 1], -7), (vec![1, 1, -3], 5), (vec![1, 2, 5], -2), (vec![1, 1, 7], 2), (vec![1, 3, -11], 7)] {
        let got = q_i64(&f, &e).quadratic_ext_isotropy(&d.into()).unwrap();
        if ext_witness(&e, d, 2) {
            assert!(got, "{e:?} over Q(sqrt {d})");
        }
        if d > 0 && e.iter().all(|&x| x > 0) {
            assert!(!got);
        }
    }
    // level of Q(sqrt -7) is 4, while Q(sqrt -2) has -1 = 1 + (sqrt -2)^2
    assert!(!q_i64(&f, &[1, 1, 1]).quadratic_ext_isotropy(&(-7).into()).unwrap());
    assert!(q_i64(&f, &[1, 1, 1]).quadratic_ext_isotropy(&(-2).into()).unwrap());
    assert!(ext_witness(&[1, 1, 1], -2, 1));
}

#[test]
fn tensor_examples() {
    let f = Field::rational();
    let t = q_i64(&f, &[1, -5]).tensor(&q_i64(&f, &[1, 1, 1, 1])).unwrap();
    assert_eq!(t.coeffs(), q_i64(&f, &[1, 1, 1, 1, -5, -5, -5, -5]).coeffs());
    let q = q_i64(&f, &[2, 3]);
    assert_eq!(q_i64(&f, &[1]).tensor(&q).unwrap().coeffs(), q.coeffs());
    let g2 = Field::finite(2, 1).unwrap();
    let b = QuadForm::binary_block(&g2, &g2.one(), &g2.one());
    let t2 = b.bilinear_tensor(&[g2.one(), g2.one()]);
    assert_eq!(t2.coeffs(), b.orth_sum(&b).coeffs());
    assert_eq!(t2.arf().unwrap(), 0);
}

#[test]
fn slots_examples() {
    let f = Field::rational();
    let p = q_i64(&f, &[1, 1]).tensor(&q_i64(&f, &[1, 1, 1, 1])).unwrap().pfister_normalize(3).unwrap();
    let s = QuadForm::pfister_slots(&p, 200).unwrap();
    assert!(pfister_from_slots(&f, &s).is_isometric(&p.form).unwrap());
    assert_eq!(s, vec![f.from_i64(-1); 3]);
    let h = QuadForm::hyperbolic_pfister(&f, 2).pfister_normalize(2).unwrap();
    assert_eq!(QuadForm::pfister_slots(&h, 10).unwrap(), vec![f.one(); 2]);
    let h3 = q_i64(&f, &[1, -7]).tensor(&q_i64(&f, &[1, 1, 1, 1])).unwrap().pfister_normalize(3).unwrap();
    assert_eq!(QuadForm::pfister_slots(&h3, 10).unwrap(), vec![f.one(); 3]);
}

#[test]
fn finite_field_witnesses() {
    for (p, k) in [(2, 1), (2, 2), (2, 4), (3, 1), (5, 2), (7, 1)] {
        let f = Field::finite(p, k).unwrap();
        let g = f.elements().unwrap();
        let q = if f.is_char2() {
            QuadForm::binary_block(&f, &g[1], &g[g.len() - 1]).orth_sum(&QuadForm::diagonal(&f, &[g[g.len() - 1].clone()]))
        } else {
            QuadForm::diagonal(&f, &[g[1].clone(), g[2 % g.len()].clone(), g[g.len() - 1].clone()])
        };
        let v = q.isotropic_vector(0).unwrap();
        assert!(q.eval(&v).is_zero() && !linalg::is_zero_vec(&v));
    }
}

#[test]
fn char2_normal_form_and_regularity() {
    let f = Field::finite(2, 2).unwrap();
    let g: Vec<Elem> = f.elements().unwrap();
    let mut c = linalg::zeros(&f, 3, 3);
    c[0][0] = g[2].clone();
    c[0][1] = g[3].clone();
    c[1][2] = g[1].clone();
    c[2][2] = g[2].clone();
    let q = QuadForm::new(&f, c).unwrap();
    let nf = q.char2_normal().unwrap();
    assert_eq!(nf.blocks.len(), 1);
    assert!(nf.radical.is_some());
    assert_eq!(q.witt_index().unwrap(), 1);
    // <1> + <1> is degenerate in characteristic 2
    assert!(!QuadForm::diagonal(&f, &[f.one(), f.one()]).is_regular());
}
