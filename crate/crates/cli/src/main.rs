use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use pfdisc::corpus;
use pfdisc::decompose::{decompose_along_l, main_theorem_decide, verify_certificate, Certificate, Verdict};
use pfdisc::disc::{base_change_check, discriminant_pfister, level};
use pfdisc::formulas::{crosscheck, unitary_two_fold_shape};
use pfdisc::instance::Instance;
use pfdisc::involution::InvType;
use pfdisc::Error;

#[derive(Parser)]
#[command(name = "pfdisc", version, about = "Discriminant Pfister forms of capacity-4 algebras with involution")]
struct Cli {
    /// Height bound for isotropic vector and witness searches.
    #[arg(long, global = true)]
    height_bound: Option<u64>,
    /// Seed for the randomized searches.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Worker threads for selftest.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kind, type, capacity and symmetric-space dimensions.
    Analyze { instance: PathBuf },
    /// The discriminant Pfister form with its witnesses.
    Pfister { instance: PathBuf },
    /// Total decomposability verdict, with a certificate when decomposable.
    Decide { instance: PathBuf },
    /// A decomposition certificate aligned with L.
    Decompose { instance: PathBuf },
    /// Re-verify a certificate (or a decompose report) against an instance.
    Verify { instance: PathBuf, certificate: PathBuf },
    /// Closed formulas against the pipeline.
    Crosscheck { instance: PathBuf },
    /// Extend scalars to F(sqrt d) and re-run the construction.
    Basechange {
        instance: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Run the built-in corpus.
    Selftest,
}

enum Status {
    Ok,
    NotFound,
    Failed,
}

fn load(path: &Path, cli: &Cli) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut inst = Instance::from_str(&text).with_context(|| format!("instance {}", path.display()))?;
    if let Some(h) = cli.height_bound {
        inst.options.height_bound = h;
    }
    if let Some(s) = cli.seed {
        inst.options.seed = s;
    }
    Ok(inst)
}

fn analyze(inst: &Instance) -> anyhow::Result<Value> {
    let s = &inst.involution;
    let sp = &s.spaces;
    Ok(json!({
        "dim": s.algebra.dim(),
        "classification": serde_json::to_value(&s.class)?,
        "spaces": {"symm": sp.symm.len(), "skew": sp.skew.len(), "symd": sp.symd.len(), "alt": sp.alt.len()},
        "n": level(s).ok(),
    }))
}

fn decide_report(inst: &Instance) -> anyhow::Result<(Value, Status)> {
    let s = &inst.involution;
    let d = main_theorem_decide(s, inst.l.as_ref(), &inst.options)?;
    let status = if d.verdict == Verdict::Decomposable && d.certificate.is_none() { Status::NotFound } else { Status::Ok };
    Ok((d.to_json(&s.algebra)?, status))
}

fn decompose_report(inst: &Instance) -> anyhow::Result<(Value, Status)> {
    let s = &inst.involution;
    let disc = discriminant_pfister(s, inst.l.as_ref(), &inst.options)?;
    let f = &s.algebra.field;
    match disc.hyperbolic()? {
        Some(true) => match decompose_along_l(s, &disc, &inst.options) {
            Ok(c) => Ok((json!({"verdict": "decomposable", "certificate": c.to_json(f)}), Status::Ok)),
            Err(Error::NotFound(m)) => Ok((json!({"verdict": "decomposable", "certificate": null, "note": m}), Status::NotFound)),
            Err(e) => Err(e.into()),
        },
        Some(false) => Ok((json!({"verdict": "indecomposable", "certificate": null}), Status::NotFound)),
        None => Ok((json!({"verdict": "undecided", "certificate": null}), Status::NotFound)),
    }
}

fn verify_report(inst: &Instance, cert_path: &Path) -> anyhow::Result<(Value, Status)> {
    let text = fs::read_to_string(cert_path).with_context(|| format!("reading {}", cert_path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("certificate {}", cert_path.display()))?;
    let cv = match v.get("certificate") {
        Some(Value::Null) => return Err(anyhow!("the report contains no certificate")),
        Some(c) => c,
        None => &v,
    };
    let cert = Certificate::from_json(cv)?;
    let ver = verify_certificate(&inst.involution, &cert);
    let status = if ver.ok() { Status::Ok } else { Status::Failed };
    Ok((json!({"valid": ver.ok(), "failures": ver.failures}), status))
}

fn crosscheck_report(inst: &Instance) -> anyhow::Result<Value> {
    let s = &inst.involution;
    let disc = discriminant_pfister(s, inst.l.as_ref(), &inst.options)?;
    let c = crosscheck(s, &disc, &inst.options)?;
    let mut v = c.to_json(&s.algebra.field);
    if s.class.ty == InvType::Unitary {
        let t = unitary_two_fold_shape(s, &disc, &inst.options)?;
        v["two_fold"] = json!({
            "dim_ok": t.dim_ok,
            "represents_one": t.represents_one,
            "slots": t.slots.as_ref().map(|sl| sl.iter().map(|x| s.algebra.field.elem_to_json(x)).collect::<Vec<_>>()),
            "reconstruction_ok": t.reconstruction_ok,
        });
    }
    Ok(v)
}

fn basechange_report(inst: &Instance, d: &str) -> anyhow::Result<Value> {
    let d: num_bigint::BigInt = d.trim().parse().map_err(|_| anyhow!("--d must be an integer, got {d:?}"))?;
    let s = &inst.involution;
    let disc = discriminant_pfister(s, inst.l.as_ref(), &inst.options)?;
    let b = base_change_check(s, &disc, &d)?;
    Ok(json!({
        "d": d.to_string(),
        "hyperbolic_before": disc.hyperbolic()?,
        "trivial": b.trivial,
        "gram_match": b.gram_match,
        "composition_ok": b.composition_ok,
        "hyperbolic_after": b.hyperbolic,
    }))
}

fn selftest(cli: &Cli) -> anyhow::Result<(Value, Status)> {
    let entries = corpus::selftest();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(1).max(1)).build()?;
    let rows: Vec<Value> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let run = || -> anyhow::Result<Value> {
                    let mut inst = e.load()?;
                    if let Some(h) = cli.height_bound {
                        inst.options.height_bound = h;
                    }
                    if let Some(s) = cli.seed {
                        inst.options.seed = s;
                    }
                    let s = &inst.involution;
                    let d = main_theorem_decide(s, inst.l.as_ref(), &inst.options)?;
                    let cert_ok = d.certificate.as_ref().map(|c| verify_certificate(s, c).ok());
                    let expected = e.decomposable.map(|b| if b { "decomposable" } else { "indecomposable" });
                    let verdict = serde_json::to_value(d.verdict)?;
                    let ok = expected.map_or(true, |x| verdict == x)
                        && cert_ok != Some(false)
                        && d.disc.composition.ok()
                        && d.disc.direct_sum
                        && (d.verdict != Verdict::Decomposable || cert_ok == Some(true));
                    Ok(json!({"name": e.name, "verdict": verdict, "expected": expected, "certificate_ok": cert_ok, "ok": ok}))
                };
                run().unwrap_or_else(|err| json!({"name": e.name, "error": format!("{err:#}"), "ok": false}))
            })
            .collect()
    });
    let passed = rows.iter().filter(|r| r["ok"] == true).count();
    let status = if passed == rows.len() { Status::Ok } else { Status::Failed };
    Ok((json!({"total": rows.len(), "passed": passed, "instances": rows}), status))
}

fn execute(cli: &Cli) -> anyhow::Result<(Value, Status)> {
    match &cli.command {
        Command::Analyze { instance } => Ok((analyze(&load(instance, cli)?)?, Status::Ok)),
        Command::Pfister { instance } => {
            let inst = load(instance, cli)?;
            let d = discriminant_pfister(&inst.involution, inst.l.as_ref(), &inst.options)?;
            Ok((d.to_json(&inst.involution.algebra)?, Status::Ok))
        }
        Command::Decide { instance } => decide_report(&load(instance, cli)?),
        Command::Decompose { instance } => decompose_report(&load(instance, cli)?),
        Command::Verify { instance, certificate } => verify_report(&load(instance, cli)?, certificate),
        Command::Crosscheck { instance } => Ok((crosscheck_report(&load(instance, cli)?)?, Status::Ok)),
        Command::Basechange { instance, d } => Ok((basechange_report(&load(instance, cli)?, d)?, Status::Ok)),
        Command::Selftest => selftest(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, status) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            let not_found = e.downcast_ref::<Error>().is_some_and(|e| matches!(e, Error::NotFound(_)));
            eprintln!("error: {e:#}");
            return ExitCode::from(if not_found { 2 } else { 1 });
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    {
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        if let Err(e) = writeln!(out, "{text}") {
            if e.kind() != std::io::ErrorKind::BrokenPipe {
                eprintln!("error: writing the report: {e}");
                return ExitCode::from(1);
            }
        }
    }
    if let Some(p) = &cli.json_out {
        if let Err(e) = fs::write(p, format!("{text}\n")) {
            eprintln!("error: writing {}: {e}", p.display());
            return ExitCode::from(1);
        }
    }
    match status {
        Status::Ok => ExitCode::SUCCESS,
        Status::NotFound => ExitCode::from(2),
        Status::Failed => ExitCode::from(1),
    }
}
