//! The five commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use relay_rates::optimizer::{
    default_box, evaluate_scheme, gnuplot_data, gnuplot_script, optimize_all, sweep, sweep_json, write_csv,
};
use relay_rates::regions::verify_fm;
use relay_rates::schemes::{SchemeId, SchemeRecord};
use relay_rates::selftest::run_selftest;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::Status;

/// Creates `dir` and checks that a file can be written in it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let probe = dir.join(".relay-rates-write-test");
    fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", dir.display()))?;
    fs::remove_file(&probe)?;
    Ok(())
}

fn out_path(cfg: &RunConfig, file: &str) -> Option<PathBuf> {
    cfg.out.as_ref().map(|d| d.join(file))
}

fn write_json(cfg: &RunConfig, file: &str, value: &Value) -> Result<()> {
    if let Some(p) = out_path(cfg, file) {
        fs::write(&p, serde_json::to_string_pretty(value)? + "\n")?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn param_json(names: &[String], x: &[f64]) -> Value {
    let m: serde_json::Map<String, Value> = names
        .iter()
        .zip(x)
        .map(|(n, &v)| (n.clone(), if v.is_finite() { json!(v) } else { json!("inf") }))
        .collect();
    Value::Object(m)
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Status> {
    match cmd {
        Command::Rates => rates(cfg),
        Command::Optimize => optimize(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::VerifyFm => fm(cfg),
        Command::Selftest => selftest(cfg),
    }
}

fn rates(cfg: &RunConfig) -> Result<Status> {
    let ch = cfg.channel()?;
    let explicit = !cfg.schemes.is_empty();
    let mut records = vec![];
    for s in cfg.schemes_or_all() {
        let names = default_box(s).names();
        let vals: Vec<Option<f64>> = names.iter().map(|n| cfg.param(n)).collect::<Result<_>>()?;
        if vals.iter().any(Option::is_none) {
            if explicit {
                bail!("scheme {s} needs params {}", names.join(", "));
            }
            continue;
        }
        let x: Vec<f64> = vals.into_iter().flatten().collect();
        let e = evaluate_scheme(&ch, s, &x).with_context(|| format!("evaluating {s}"))?;
        println!("{s}  rate = {:.9} bits/use  binding = {}", e.rate, e.binding);
        for b in e.bounds.iter() {
            println!("  {:<10} {}R <= {:.9}", b.name, b.multiplier, b.value);
        }
        records.push(SchemeRecord {
            scheme: s,
            params: param_json(&names, &x),
            bounds: e.bounds,
            rate: e.rate,
        });
    }
    if records.is_empty() {
        bail!("config `params` does not cover any scheme");
    }
    write_json(cfg, "rates.json", &serde_json::to_value(&records)?)?;
    Ok(Status::Ok)
}

fn optimize(cfg: &RunConfig) -> Result<Status> {
    let ch = cfg.channel()?;
    let boxes = |s: SchemeId| {
        cfg.boxes.get(&s).cloned().map(|mut b| {
            b.seed = cfg.seed;
            b
        })
    };
    let results = optimize_all(&ch, &cfg.schemes_or_all(), &boxes)?;
    let mut out = vec![];
    for (s, r) in &results {
        let e = evaluate_scheme(&ch, *s, &r.params)?;
        let params = param_json(&r.names, &r.params);
        println!(
            "{s:<20} rate = {:.9}  binding = {:<10} params = {params}",
            r.rate,
            r.binding.as_deref().unwrap_or("")
        );
        out.push(json!({
            "scheme": s,
            "params": params,
            "bounds": e.bounds,
            "rate": r.rate,
            "binding": r.binding,
            "evaluations": r.evaluations,
            "grid_rate": r.grid_rate,
            "improvement": r.improvement,
        }));
    }
    write_json(cfg, "optimize.json", &Value::Array(out))?;
    Ok(Status::Ok)
}

fn run_sweep(cfg: &RunConfig) -> Result<Status> {
    let spec = cfg.sweep_spec()?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    ensure_writable(&dir)?;
    let rows = sweep(&spec)?;
    let mut csv = vec![];
    write_csv(&rows, &mut csv)?;
    fs::write(dir.join("sweep.csv"), &csv)?;
    fs::write(
        dir.join("sweep.json"),
        serde_json::to_string_pretty(&sweep_json(&spec, &rows)?)? + "\n",
    )?;
    fs::write(dir.join("sweep.dat"), gnuplot_data(&spec, &rows))?;
    fs::write(dir.join("sweep.gp"), gnuplot_script(&spec, "sweep.dat", "sweep.png"))?;
    let invalid = rows.iter().filter(|r| r.rate.is_none()).count();
    println!(
        "{} rows ({invalid} invalid) written to {}: sweep.csv sweep.json sweep.dat sweep.gp",
        rows.len(),
        dir.display()
    );
    Ok(Status::Ok)
}

fn fm(cfg: &RunConfig) -> Result<Status> {
    let r = verify_fm(cfg.seed, cfg.fm_valuations, cfg.tolerance.fm)?;
    println!("verify-fm: {}", if r.pass { "PASS" } else { "FAIL" });
    println!(
        "  equivalence: worst gap {:.3e} over {} valuations (tolerance {:e})",
        r.equivalence.worst_gap, r.equivalence.valuations, r.equivalence.tolerance
    );
    if let Some(p) = &r.equivalence.worst_provenance {
        println!("  worst at: {p}");
    }
    for m in &r.mutations {
        println!(
            "  without {:<5} {} ({} valuations disagree)",
            m.removed,
            if m.detected { "detected" } else { "NOT detected" },
            m.failing_valuations
        );
    }
    println!(
        "  condition violated at {} valuations; five-bound rate within fallback: {}",
        r.omission.violating, r.omission.five_bound_within_fallback
    );
    println!(
        "  projection onto R: {} constraints, irredundant form:",
        r.projected_constraints
    );
    for line in r.reduced_system.lines() {
        println!("    {line}");
    }
    write_json(cfg, "verify_fm.json", &serde_json::to_value(&r)?)?;
    Ok(if r.pass { Status::Ok } else { Status::VerificationFailed })
}

fn selftest(cfg: &RunConfig) -> Result<Status> {
    let r = run_selftest(cfg.seed)?;
    for c in &r.criteria {
        println!("{}", c.line());
    }
    println!("selftest: {}", if r.pass { "PASS" } else { "FAIL" });
    write_json(cfg, "selftest.json", &serde_json::to_value(&r)?)?;
    Ok(if r.pass { Status::Ok } else { Status::VerificationFailed })
}
