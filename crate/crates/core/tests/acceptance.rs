use std::process::ExitCode;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use pfdisc::corpus::{self, Entry};
use pfdisc::decompose::{
    existmetabolic_construct, is_split_orthogonal_metabolic, main_theorem_decide, split_metabolic_decomposition,
    verify_certificate, Certificate, ExistMetabolic, Verdict,
};
use pfdisc::disc::{discriminant_pfister, independence_check, level, DiscPfister, Options};
use pfdisc::field::{hilbert_symbol, Field, Place};
use pfdisc::formulas::crosscheck;
use pfdisc::involution::{InvType, Involution};
use pfdisc::linalg;
use pfdisc::quad::QuadForm;

/// Lattice points examined per form by the brute-force isotropy oracle.
const ORACLE_POINTS: usize = 250_000;
const ORACLE_HEIGHT: i64 = 500;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn run(f: impl FnOnce() -> Result<Outcome, String>) -> Outcome {
    f().unwrap_or_else(|e| outcome(false, format!("error: {e}")))
}

fn load(e: &Entry) -> Result<Arc<Involution>, String> {
    e.load().map(|i| i.involution).map_err(|err| format!("{}: {err}", e.name))
}

fn disc_of(s: &Involution) -> Result<DiscPfister, String> {
    discriminant_pfister(s, None, &Options::default()).map_err(|e| e.to_string())
}

fn criterion1() -> (Outcome, Vec<(Arc<Involution>, Certificate)>) {
    let entries = corpus::decomposable_rational();
    let res: Vec<_> = entries
        .par_iter()
        .map(|e| -> Result<_, String> {
            let s = load(e)?;
            let d = main_theorem_decide(&s, None, &Options::default()).map_err(|err| format!("{}: {err}", e.name))?;
            Ok((e.name.clone(), d.disc.n, s, d))
        })
        .collect();
    let mut bad = Vec::new();
    let mut certs = Vec::new();
    let mut levels = [0usize; 4];
    for r in res {
        match r {
            Err(e) => bad.push(e),
            Ok((name, n, s, d)) => {
                levels[n] += 1;
                let hyp = d.disc.hyperbolic().ok().flatten() == Some(true);
                if d.verdict != Verdict::Decomposable || !hyp {
                    bad.push(format!("{name}: verdict {:?}, hyperbolic {hyp}", d.verdict));
                }
                if let Some(c) = d.certificate {
                    certs.push((s, c));
                }
            }
        }
    }
    let ok = bad.is_empty() && entries.len() >= 20 && levels[1] > 0 && levels[2] > 0 && levels[3] > 0;
    let detail = format!(
        "{} instances (n=1: {}, n=2: {}, n=3: {}), all decomposable with hyperbolic form{}",
        entries.len(),
        levels[1],
        levels[2],
        levels[3],
        if bad.is_empty() { String::new() } else { format!("; failures: {bad:?}") }
    );
    (outcome(ok, detail), certs)
}

fn criterion2() -> Result<Outcome, String> {
    let s = load(&corpus::eight_squares())?;
    let d = main_theorem_decide(&s, None, &Options::default()).map_err(|e| e.to_string())?;
    let q = &d.disc.pfister.form;
    let f = Field::rational();
    let sig = q.invariants().map_err(|e| e.to_string())?.signature;
    let iso = q.is_isometric(&QuadForm::diagonal_i64(&f, &[1; 8])).map_err(|e| e.to_string())?;
    let ok = q.dim() == 8 && sig == Some((8, 0)) && iso && d.verdict == Verdict::Indecomposable;
    Ok(outcome(ok, format!("dim {}, signature {:?}, isometric to <1,1>x<1,1,1,1>: {iso}, verdict {:?}", q.dim(), sig, d.verdict)))
}

fn criterion3() -> Result<Outcome, String> {
    let entries = corpus::formula_shapes();
    let res: Vec<Result<(String, Option<bool>, Option<bool>), String>> = entries
        .par_iter()
        .map(|e| {
            let s = load(e)?;
            let d = disc_of(&s)?;
            let c = crosscheck(&s, &d, &Options::default()).map_err(|err| format!("{}: {err}", e.name))?;
            Ok((c.shape.name().to_string(), c.agree, c.w_agree))
        })
        .collect();
    let (mut orth, mut unit, mut unit_w, mut symp) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    for (r, e) in res.into_iter().zip(&entries) {
        match r {
            Err(err) => bad.push(err),
            Ok((shape, agree, w)) => {
                if agree != Some(true) {
                    bad.push(format!("{}: formula agreement {agree:?}", e.name));
                    continue;
                }
                match shape.as_str() {
                    "orthogonal" => orth += 1,
                    "symplectic" => symp += 1,
                    "unitary" => {
                        unit += 1;
                        match w {
                            Some(true) => unit_w += 1,
                            other => bad.push(format!("{}: w-variant agreement {other:?}", e.name)),
                        }
                    }
                    s => bad.push(format!("{}: shape {s}", e.name)),
                }
            }
        }
    }
    let ok = bad.is_empty() && orth >= 10 && unit >= 10 && unit_w >= 10 && symp >= 10;
    Ok(outcome(ok, format!("isometric: orthogonal {orth}, unitary {unit}, unitary w-variant {unit_w}, symplectic {symp}; failures {bad:?}")))
}

fn structure_corpus() -> Vec<Entry> {
    let mut v = corpus::selftest();
    v.extend(corpus::formula_shapes());
    v
}

fn criteria4and5() -> (Outcome, Outcome) {
    let entries = structure_corpus();
    let res: Vec<Result<(usize, usize, bool, bool), String>> = entries
        .par_iter()
        .map(|e| {
            let s = load(e)?;
            let d = disc_of(&s).map_err(|err| format!("{}: {err}", e.name))?;
            let n = d.n;
            let pairs_ok = d.composition.ok() && d.composition.pairs_checked == 1 << (2 * n);
            let dims_ok = d.w.iter().all(|w| w.basis.len() == 1 << n) && s.spaces.symd.len() == 4 + 3 * (1 << n) && d.direct_sum;
            Ok((n, d.composition.pairs_checked, pairs_ok, dims_ok))
        })
        .collect();
    let (mut c4, mut c5, mut pairs, mut errs) = (Vec::new(), Vec::new(), 0usize, Vec::new());
    for (r, e) in res.into_iter().zip(&entries) {
        match r {
            Err(err) => errs.push(err),
            Ok((_, p, a, b)) => {
                pairs += p;
                if !a {
                    c4.push(e.name.clone());
                }
                if !b {
                    c5.push(e.name.clone());
                }
            }
        }
    }
    let n = entries.len();
    (
        outcome(c4.is_empty() && errs.is_empty(), format!("{n} instances, {pairs} basis pairs, composition failures {c4:?}, errors {errs:?}")),
        outcome(c5.is_empty() && errs.is_empty(), format!("{n} instances, dim W_i = 2^n and dim Symd = 4 + 3*2^n; failures {c5:?}")),
    )
}

fn criterion6() -> Result<Outcome, String> {
    let mut entries = corpus::decomposable_rational();
    entries.extend(corpus::formula_shapes());
    entries.push(corpus::eight_squares());
    let res: Vec<Result<(usize, Option<bool>), String>> = entries
        .par_iter()
        .map(|e| {
            let s = load(e)?;
            let (ds, agree) = independence_check(&s, &Options::default(), 2).map_err(|err| format!("{}: {err}", e.name))?;
            Ok((ds.len(), agree))
        })
        .collect();
    let (mut two, mut bad) = (0, Vec::new());
    for (r, e) in res.into_iter().zip(&entries) {
        match r? {
            (k, Some(true)) if k >= 2 => two += 1,
            (k, Some(false)) => bad.push(format!("{} ({k} L's)", e.name)),
            _ => {}
        }
    }
    Ok(outcome(bad.is_empty() && two >= 5, format!("{two} instances with two distinct neat L, all isometric; disagreements {bad:?}")))
}

fn mutate(cert: &Certificate, field: &Field, rng: &mut ChaCha8Rng) -> Certificate {
    let mut c = cert.clone();
    let slots = c.quaternions.len() * 4 + c.complement.len();
    let pick = rng.gen_range(0..slots);
    let target = if pick < c.quaternions.len() * 4 { &mut c.quaternions[pick / 4][pick % 4] } else { &mut c.complement[pick - c.quaternions.len() * 4] };
    loop {
        let delta: Vec<_> = (0..target.len()).map(|_| field.from_i64(rng.gen_range(-3..=3))).collect();
        if !linalg::is_zero_vec(&delta) {
            *target = linalg::add_vec(target, &delta);
            return c;
        }
    }
}

fn criterion7(certs: &[(Arc<Involution>, Certificate)]) -> Outcome {
    let verified = certs.par_iter().filter(|(s, c)| verify_certificate(s, c).ok()).count();
    let round_trip = certs.iter().all(|(s, c)| Certificate::from_json(&c.to_json(&s.field())).ok().as_ref() == Some(c));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials: Vec<(usize, Certificate)> = (0..100)
        .map(|_| {
            let i = rng.gen_range(0..certs.len());
            (i, mutate(&certs[i].1, &certs[i].0.field(), &mut rng))
        })
        .collect();
    let rejected = trials.par_iter().filter(|(i, m)| !verify_certificate(&certs[*i].0, m).ok()).count();
    let ok = !certs.is_empty() && verified == certs.len() && round_trip && rejected == 100;
    outcome(ok, format!("{verified}/{} certificates verify, JSON round trip {round_trip}, {rejected}/100 mutations rejected", certs.len()))
}

fn criterion8() -> Result<Outcome, String> {
    let cases = corpus::existmetabolic_cases().map_err(|e| e.to_string())?;
    let mut good = 0;
    let mut notes = Vec::new();
    for c in &cases {
        let a = &c.s.algebra;
        match existmetabolic_construct(&c.s, &c.k, &c.e).map_err(|e| e.to_string())? {
            ExistMetabolic::Quaternion { basis, wv } => {
                let sq = a.square(&wv) == *a.unit();
                let anti = c.s.apply(&wv) == linalg::neg_vec(&wv);
                let orth = c.s.restrict(&basis).map_err(|e| e.to_string())?.class.ty == InvType::Orthogonal;
                let p = linalg::add_vec(a.unit(), &wv);
                let iso = linalg::is_zero_vec(&a.mul(&c.s.apply(&p), &p));
                let meta = is_split_orthogonal_metabolic(&c.s, &basis).map_err(|e| e.to_string())?;
                if sq && anti && orth && iso && meta {
                    good += 1;
                } else {
                    notes.push(format!("d={} alpha={}: sq {sq} anti {anti} orth {orth} iso {iso} metabolic {meta}", c.d, c.alpha));
                }
            }
            ExistMetabolic::Isotropic { .. } => notes.push(format!("d={} alpha={}: sigma|C isotropic", c.d, c.alpha)),
        }
    }
    Ok(outcome(good >= 5 && notes.is_empty(), format!("{good}/{} instances: (wv')^2 = 1, sigma(wv') = -wv', orthogonal, metabolic; {notes:?}", cases.len())))
}

fn int_form(rng: &mut ChaCha8Rng, f: &Field) -> (Vec<Vec<i64>>, QuadForm) {
    loop {
        let d = rng.gen_range(2..=5);
        let mut c = vec![vec![0i64; d]; d];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                if j >= i && rng.gen_bool(if i == j { 0.95 } else { 0.3 }) {
                    *x = rng.gen_range(-6..=6);
                }
            }
        }
        let m = c.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()).collect();
        let q = QuadForm::new(f, m).unwrap();
        if q.invariants().is_ok() {
            return (c, q);
        }
    }
}

/// Points with the first d-1 coordinates of height <= 500 (smallest first,
/// at most ORACLE_POINTS of them), solving exactly for the last coordinate.
fn brute_isotropic(c: &[Vec<i64>]) -> bool {
    let d = c.len();
    let eval = |x: &[i128]| -> (i128, i128, i128) {
        // q(x', t) = a t^2 + b t + k
        let last = d - 1;
        let a = c[last][last] as i128;
        let mut b = 0i128;
        let mut k = 0i128;
        for i in 0..last {
            b += c[i][last] as i128 * x[i];
            for j in i..last {
                k += c[i][j] as i128 * x[i] * x[j];
            }
        }
        (a, b, k)
    };
    let has_root = |(a, b, k): (i128, i128, i128)| -> bool {
        if a == 0 {
            return b != 0 || k == 0;
        }
        let disc = b * b - 4 * a * k;
        disc >= 0 && { let r = disc.sqrt(); r * r == disc }
    };
    let m = d - 1;
    let mut seen = 0usize;
    for h in 1..=ORACLE_HEIGHT {
        // points of max-norm exactly h
        let mut x = vec![-(h as i128); m];
        loop {
            if x.iter().any(|v| v.abs() == h as i128) {
                seen += 1;
                if has_root(eval(&x)) {
                    return true;
                }
                if seen >= ORACLE_POINTS {
                    return false;
                }
            }
            let mut i = 0;
            loop {
                if i == m {
                    break;
                }
                x[i] += 1;
                if x[i] <= h as i128 {
                    break;
                }
                x[i] = -(h as i128);
                i += 1;
            }
            if i == m {
                break;
            }
        }
    }
    false
}

fn criterion9() -> Result<Outcome, String> {
    let f = Field::rational();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let forms: Vec<_> = (0..200).map(|_| int_form(&mut rng, &f)).collect();
    let res: Vec<(bool, bool)> = forms.par_iter().map(|(c, q)| (brute_isotropic(c), q.is_isotropic().unwrap_or(false))).collect();
    let witnesses = res.iter().filter(|r| r.0).count();
    let disagree = res.iter().filter(|r| r.0 && !r.1).count();
    let engine_iso = res.iter().filter(|r| r.1).count();
    let mut product_ok = 0;
    for _ in 0..200 {
        let rnd = |rng: &mut ChaCha8Rng| loop {
            let n: i64 = rng.gen_range(-400..=400);
            let d: i64 = rng.gen_range(1..=60);
            if n != 0 {
                return BigRational::new(BigInt::from(n), BigInt::from(d));
            }
        };
        let (a, b) = (rnd(&mut rng), rnd(&mut rng));
        let mut places = vec![Place::Real];
        let mut primes: Vec<BigInt> = vec![BigInt::from(2)];
        for x in [a.numer(), a.denom(), b.numer(), b.denom()] {
            primes.extend(pfdisc::arith::prime_divisors(&x.abs()));
        }
        primes.sort();
        primes.dedup();
        places.extend(primes.into_iter().map(Place::Prime));
        let mut prod = 1;
        for p in &places {
            prod *= hilbert_symbol(&a, &b, p).map_err(|e| e.to_string())?;
        }
        if prod == 1 {
            product_ok += 1;
        }
    }
    Ok(outcome(
        disagree == 0 && product_ok == 200,
        format!("{witnesses}/200 forms with a brute-force witness (engine isotropic on {engine_iso}), {disagree} disagreements; product formula {product_ok}/200"),
    ))
}

fn criterion10() -> Result<Outcome, String> {
    let entries = corpus::char2_symplectic();
    let mut fields = std::collections::BTreeSet::new();
    let mut bad = Vec::new();
    for e in &entries {
        let inst = e.load().map_err(|err| err.to_string())?;
        let s = &inst.involution;
        fields.insert(format!("{:?}", inst.field.to_json()));
        let d = disc_of(s)?;
        let n = level(s).map_err(|err| err.to_string())?;
        let hyp = d.hyperbolic().map_err(|err| err.to_string())?;
        let checks = [
            ("symplectic degree 8", s.class.ty == InvType::Symplectic && s.class.degree == 8),
            ("c = 1", d.c.is_one()),
            ("hyperbolic", hyp == Some(true)),
            ("composition", d.composition.ok() && d.composition.pairs_checked == 1 << (2 * n)),
            ("dimensions", d.w.iter().all(|w| w.basis.len() == 1 << n) && s.spaces.symd.len() == 4 + 3 * (1 << n)),
        ];
        for (name, ok) in checks {
            if !ok {
                bad.push(format!("{}: {name}", e.name));
            }
        }
    }
    Ok(outcome(bad.is_empty() && fields.len() == 2, format!("{} instances over GF(2) and GF(4); failures {bad:?}", entries.len())))
}

fn criterion11() -> Result<Outcome, String> {
    let cases = corpus::hyperbolic_cases().map_err(|e| e.to_string())?;
    let res: Vec<Result<(), String>> = cases
        .par_iter()
        .map(|c| {
            let d = disc_of(&c.s)?;
            if d.hyperbolic().map_err(|e| e.to_string())? != Some(true) {
                return Err(format!("{}: not hyperbolic", c.name));
            }
            let cert = split_metabolic_decomposition(&c.s, &c.e, &Options::default()).map_err(|e| format!("{}: {e}", c.name))?;
            let v = verify_certificate(&c.s, &cert);
            if !v.ok() {
                return Err(format!("{}: {:?}", c.name, v.failures));
            }
            if !is_split_orthogonal_metabolic(&c.s, &cert.quaternions[0]).map_err(|e| e.to_string())? {
                return Err(format!("{}: first factor not split orthogonal metabolic", c.name));
            }
            Ok(())
        })
        .collect();
    let bad: Vec<String> = res.into_iter().filter_map(|r| r.err()).collect();
    Ok(outcome(bad.is_empty(), format!("{} hyperbolic instances (orthogonal, unitary, symplectic); failures {bad:?}", cases.len())))
}

fn main() -> ExitCode {
    let (c1, certs) = criterion1();
    let mut certs = certs;
    for e in corpus::char2_symplectic() {
        if let Ok(inst) = e.load() {
            if let Ok(d) = main_theorem_decide(&inst.involution, None, &Options::default()) {
                if let Some(c) = d.certificate {
                    certs.push((inst.involution.clone(), c));
                }
            }
        }
    }
    let (c4, c5) = criteria4and5();
    let results = vec![
        (1, "decomposable tensor corpus", c1),
        (2, "sum of eight squares is indecomposable", run(criterion2)),
        (3, "closed formulas agree with the pipeline", run(criterion3)),
        (4, "composition identity on basis pairs", c4),
        (5, "structure dimensions", c5),
        (6, "independence of L", run(criterion6)),
        (7, "certificate soundness and mutation rejection", criterion7(&certs)),
        (8, "metabolic quaternion construction", run(criterion8)),
        (9, "isotropy oracle and Hilbert product formula", run(criterion9)),
        (10, "characteristic 2 symplectic cubes", run(criterion10)),
        (11, "split metabolic factor", run(criterion11)),
    ];
    let mut all = true;
    for (n, name, o) in &results {
        all &= o.ok;
        println!("{} criterion {n} ({name}): {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
