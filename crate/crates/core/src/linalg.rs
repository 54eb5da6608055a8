//! Exact dense linear algebra over a `Field`. Matrices are row-major
//! `Vec<Vec<Elem>>`; vectors are `Vec<Elem>`.

use crate::field::{Elem, Field};

pub type Vector = Vec<Elem>;
pub type Matrix = Vec<Vec<Elem>>;

pub fn zero_vec(f: &Field, n: usize) -> Vector {
    vec![f.zero(); n]
}

pub fn unit_vec(f: &Field, n: usize, i: usize) -> Vector {
    let mut v = zero_vec(f, n);
    v[i] = f.one();
    v
}

pub fn zeros(f: &Field, r: usize, c: usize) -> Matrix {
    vec![zero_vec(f, c); r]
}

pub fn identity(f: &Field, n: usize) -> Matrix {
    (0..n).map(|i| unit_vec(f, n, i)).collect()
}

pub fn is_zero_vec(v: &[Elem]) -> bool {
    v.iter().all(Elem::is_zero)
}

pub fn add_vec(a: &[Elem], b: &[Elem]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Elem], b: &[Elem]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(c: &Elem, a: &[Elem]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn neg_vec(a: &[Elem]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn dot(f: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    let mut s = f.zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s = s + x * y;
        }
    }
    s
}

/// Linear combination sum c_i v_i.
pub fn combine(f: &Field, n: usize, coeffs: &[Elem], vecs: &[Vector]) -> Vector {
    let mut r = zero_vec(f, n);
    for (c, v) in coeffs.iter().zip(vecs) {
        if c.is_zero() {
            continue;
        }
        for (ri, vi) in r.iter_mut().zip(v) {
            if !vi.is_zero() {
                *ri = &*ri + &(c * vi);
            }
        }
    }
    r
}

pub fn transpose(f: &Field, m: &Matrix, cols: usize) -> Matrix {
    let mut t = zeros(f, cols, m.len());
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            t[j][i] = x.clone();
        }
    }
    t
}

pub fn mat_mul(f: &Field, a: &Matrix, b: &Matrix, b_cols: usize) -> Matrix {
    a.iter()
        .map(|row| {
            let mut r = zero_vec(f, b_cols);
            for (k, x) in row.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b[k].iter().enumerate() {
                    if !y.is_zero() {
                        r[j] = &r[j] + &(x * y);
                    }
                }
            }
            r
        })
        .collect()
}

pub fn mat_vec(f: &Field, a: &Matrix, v: &[Elem]) -> Vector {
    a.iter().map(|row| dot(f, row, v)).collect()
}

/// Reduced row echelon form, returning the nonzero rows and pivot columns.
pub fn rref(m: &Matrix, cols: usize) -> (Matrix, Vec<usize>) {
    let mut a: Matrix = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].inv().unwrap();
        if !inv.is_one() {
            for x in a[r].iter_mut().skip(c) {
                *x = &*x * &inv;
            }
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !y.is_zero() {
                    *x = &*x - &(&factor * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(m: &Matrix, cols: usize) -> usize {
    rref(m, cols).1.len()
}

/// Basis of {x : m x = 0}.
pub fn nullspace(f: &Field, m: &Matrix, cols: usize) -> Vec<Vector> {
    let (r, pivots) = rref(m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = unit_vec(f, cols, fc);
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = -&row[fc];
            }
            v
        })
        .collect()
}

/// A solution of m x = b, if any.
pub fn solve(f: &Field, m: &Matrix, cols: usize, b: &[Elem]) -> Option<Vector> {
    let aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, cols + 1);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = zero_vec(f, cols);
    for (row, &pc) in r.iter().zip(&pivots) {
        x[pc] = row[cols].clone();
    }
    Some(x)
}

/// Canonical basis (RREF rows) of the span of `vecs`.
pub fn span_basis(vecs: &[Vector], n: usize) -> Vec<Vector> {
    rref(&vecs.to_vec(), n).0
}

/// Coordinates of v in terms of `basis` (assumed independent), if v is in the span.
pub fn coords_in(f: &Field, basis: &[Vector], v: &[Elem]) -> Option<Vector> {
    let n = v.len();
    let m = transpose(f, &basis.to_vec(), n);
    solve(f, &m, basis.len(), v)
}

pub fn in_span(f: &Field, basis: &[Vector], v: &[Elem]) -> bool {
    is_zero_vec(v) || coords_in(f, basis, v).is_some()
}

/// Basis of the intersection of span(u) and span(v).
pub fn intersect(f: &Field, u: &[Vector], v: &[Vector], n: usize) -> Vec<Vector> {
    if u.is_empty() || v.is_empty() {
        return Vec::new();
    }
    // sum a_i u_i - sum b_j v_j = 0
    let mut cols: Vec<Vector> = u.to_vec();
    cols.extend(v.iter().map(|x| neg_vec(x)));
    let m = transpose(f, &cols, n);
    let ker = nullspace(f, &m, cols.len());
    let vecs: Vec<Vector> = ker.iter().map(|k| combine(f, n, &k[..u.len()], u)).collect();
    span_basis(&vecs, n)
}

pub fn det(f: &Field, m: &Matrix) -> Elem {
    let n = m.len();
    let mut a = m.clone();
    let mut d = f.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return f.zero() };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d = &d * &a[c][c];
        let inv = a[c][c].inv().unwrap();
        for i in (c + 1)..n {
            if a[i][c].is_zero() {
                continue;
            }
            let factor = &a[i][c] * &inv;
            for j in c..n {
                if !a[c][j].is_zero() {
                    a[i][j] = &a[i][j] - &(&factor * &a[c][j]);
                }
            }
        }
    }
    d
}

pub fn inverse(f: &Field, m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(unit_vec(f, n, i));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Characteristic polynomial det(tI - m), coefficients from degree 0 upward
/// (monic). Hessenberg reduction, valid over any field.
pub fn charpoly(f: &Field, m: &Matrix) -> Vec<Elem> {
    let n = m.len();
    let mut h = m.clone();
    for mcol in 1..n.saturating_sub(1) {
        let Some(i) = (mcol..n).find(|&i| !h[i][mcol - 1].is_zero()) else { continue };
        if i != mcol {
            h.swap(i, mcol);
            for row in h.iter_mut() {
                row.swap(i, mcol);
            }
        }
        let inv = h[mcol][mcol - 1].inv().unwrap();
        for i in (mcol + 1)..n {
            if h[i][mcol - 1].is_zero() {
                continue;
            }
            let u = &h[i][mcol - 1] * &inv;
            for j in 0..n {
                if !h[mcol][j].is_zero() {
                    h[i][j] = &h[i][j] - &(&u * &h[mcol][j]);
                }
            }
            for row in h.iter_mut() {
                if !row[i].is_zero() {
                    let t = &u * &row[i];
                    row[mcol] = &row[mcol] + &t;
                }
            }
        }
    }
    // p_k = (t - h_kk) p_{k-1} - sum_{i<k} h_{ik} prod_{j=i+1}^{k} h_{j,j-1} p_{i-1}
    let mut polys: Vec<Vec<Elem>> = vec![vec![f.one()]];
    for k in 0..n {
        let prev = &polys[k];
        let mut p = vec![f.zero(); k + 2];
        for (d, c) in prev.iter().enumerate() {
            p[d + 1] = &p[d + 1] + c;
            p[d] = &p[d] - &(c * &h[k][k]);
        }
        let mut prod = f.one();
        for i in (0..k).rev() {
            prod = &prod * &h[i + 1][i];
            if prod.is_zero() {
                break;
            }
            let t = &prod * &h[i][k];
            if t.is_zero() {
                continue;
            }
            for (d, c) in polys[i].iter().enumerate() {
                p[d] = &p[d] - &(&t * c);
            }
        }
        polys.push(p);
    }
    polys.pop().unwrap()
}

/// A random scalar of height at most `h` (any element for finite fields).
pub fn random_scalar(f: &Field, rng: &mut impl rand::Rng, h: i64) -> Elem {
    match f.order() {
        Some(q) => f.from_gf(rng.gen_range(0..q)).unwrap(),
        None => f.from_i64(rng.gen_range(-h..=h)),
    }
}

/// Random combination of `basis` with small coefficients.
pub fn random_combination(f: &Field, rng: &mut impl rand::Rng, basis: &[Vector], n: usize, h: i64) -> Vector {
    let coeffs: Vec<Elem> = basis.iter().map(|_| random_scalar(f, rng, h)).collect();
    combine(f, n, &coeffs, basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(f: &Field, rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()).collect()
    }

    // Oracle: det(tI - M) evaluated at integer points via elimination.
    fn eval_poly(f: &Field, p: &[Elem], t: i64) -> Elem {
        p.iter().rev().fold(f.zero(), |acc, c| acc * f.from_i64(t) + c)
    }

    #[test]
    fn charpoly_matches_determinants() {
        let f = Field::rational();
        let a = m(&f, &[&[2, 1, 0, 3], &[0, 1, 4, 1], &[5, 0, 0, 2], &[1, 1, 1, 1]]);
        let p = charpoly(&f, &a);
        assert_eq!(p.len(), 5);
        for t in -3..4 {
            let mut b = a.clone();
            for (i, row) in b.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = if i == j { f.from_i64(t) - &*x } else { -&*x };
                }
            }
            assert_eq!(det(&f, &b), eval_poly(&f, &p, t));
        }
    }

    #[test]
    fn charpoly_zero_subdiagonal_and_gf2() {
        let f = Field::finite(2, 1).unwrap();
        let a = m(&f, &[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]);
        let p = charpoly(&f, &a);
        for t in 0..2 {
            let mut b = a.clone();
            for (i, row) in b.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = if i == j { f.from_i64(t) - &*x } else { -&*x };
                }
            }
            assert_eq!(det(&f, &b), eval_poly(&f, &p, t));
        }
    }

    #[test]
    fn solve_and_nullspace() {
        let f = Field::rational();
        let a = m(&f, &[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let ns = nullspace(&f, &a, 3);
        assert_eq!(ns.len(), 1);
        assert!(is_zero_vec(&mat_vec(&f, &a, &ns[0])));
        let b: Vector = [6, 12, 2].iter().map(|&x| f.from_i64(x)).collect();
        let x = solve(&f, &a, 3, &b).unwrap();
        assert_eq!(mat_vec(&f, &a, &x), b);
        let bad: Vector = [6, 11, 2].iter().map(|&x| f.from_i64(x)).collect();
        assert!(solve(&f, &a, 3, &bad).is_none());
    }

    #[test]
    fn inverse_and_intersection() {
        let f = Field::rational();
        let a = m(&f, &[&[2, 1], &[7, 4]]);
        let ai = inverse(&f, &a).unwrap();
        assert_eq!(mat_mul(&f, &a, &ai, 2), identity(&f, 2));
        assert!(inverse(&f, &m(&f, &[&[1, 2], &[2, 4]])).is_none());
        let u = m(&f, &[&[1, 0, 0], &[0, 1, 0]]);
        let v = m(&f, &[&[0, 1, 1], &[1, 1, 0]]);
        let w = intersect(&f, &u, &v, 3);
        assert_eq!(w.len(), 1);
        assert!(w[0][2].is_zero());
    }
}
