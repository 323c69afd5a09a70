use crate::config::{Command, Format, RunConfig};
use crate::error::{CliError, CliResult};
use serde_json::{json, Value};
use softcover::exponents::{self, Selection};
use softcover::simulator::{self, CodebookKind, SimConfig};
use softcover::typespace::{self, TypeDescriptor};
use softcover::{
    bounds, measures, Certificate, Channel64, Distribution64, ExponentResult64, LogBase,
};

/// What a command produced: the data document, an optional diagnostics
/// sidecar, and the exit code to finish with.
#[derive(Debug)]
pub struct Outcome {
    pub data: String,
    pub sidecar: Option<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn json(v: Value, exit_code: i32) -> Self {
        Outcome {
            data: serde_json::to_string_pretty(&v).expect("serializable") + "\n",
            sidecar: None,
            exit_code,
        }
    }
}

/// JSON has no infinities; non-finite values become `null`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn rows(m: Vec<Vec<f64>>) -> Value {
    Value::Array(
        m.into_iter()
            .map(|r| Value::Array(r.into_iter().map(num).collect()))
            .collect(),
    )
}

fn certificate_json(c: &Certificate<f64>) -> Value {
    match c {
        Certificate::Joint(j) => json!({ "type": "joint", "matrix": rows(j.to_rows()) }),
        Certificate::Conditional(q) => {
            json!({ "type": "conditional", "matrix": rows(q.to_rows()) })
        }
        Certificate::Output(s) => json!({ "type": "output", "probs": s.probs() }),
    }
}

pub fn result_json(sel: Selection, r: &ExponentResult64, base: LogBase) -> Value {
    json!({
        "exponent": sel.column(),
        "rate": num(base.from_nats(r.rate)),
        "base": base.name(),
        "value": num(sel.report(r.value_in(base))),
        "lambda_star": r.optimizer_param.map(num),
        "lambda_prime_star": r.secondary_param.map(num),
        "certificate": r.certificate.as_ref().map(certificate_json),
        "output_law": r.output_law.as_ref().map(|s| s.probs().to_vec()),
        "diagnostics": {
            "method": r.diagnostics.method,
            "iterations": r.diagnostics.iterations,
            "residual": num(r.diagnostics.residual),
            "warnings": r.diagnostics.warnings,
        },
    })
}

fn error_json(sel: Selection, e: &softcover::Error) -> Value {
    json!({ "exponent": sel.column(), "error": e.to_string(), "convergence_failure": e.is_convergence() })
}

pub fn execute(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::Exponent => exponent(cfg),
        Command::Sweep => sweep(cfg),
        Command::Mi => mi(cfg),
        Command::FiniteN => finite_n(cfg),
        Command::Simulate => simulate(cfg),
        Command::CheckBounds => check_bounds(cfg),
    }
}

fn exponent(cfg: &RunConfig) -> CliResult<Outcome> {
    let base = cfg.base()?;
    let (p, w) = cfg.channel()?;
    let rate = base.to_nats(cfg.single_rate()?);
    let mut results = Vec::new();
    let mut exit_code = 0;
    for sel in cfg.selections()? {
        match sel.kind.compute(&p, &w, rate) {
            Ok(r) => results.push(result_json(sel, &r, base)),
            Err(e) if e.is_convergence() => {
                exit_code = 3;
                results.push(error_json(sel, &e));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome::json(
        json!({ "config": cfg, "results": results }),
        exit_code,
    ))
}

/// Twelve significant digits, locale independent.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

fn sweep(cfg: &RunConfig) -> CliResult<Outcome> {
    let base = cfg.base()?;
    let (p, w) = cfg.channel()?;
    let rates: Vec<f64> = cfg.rates.iter().map(|&r| base.to_nats(r)).collect();
    let table = exponents::rate_sweep(&p, &w, &rates, &cfg.selections()?)
        .map_err(|e| CliError::validation("--rates", e.to_string()))?;
    let mut failures = Vec::new();
    let mut exit_code = 0;
    for (row, &rate) in table.iter().zip(&cfg.rates) {
        for cell in &row.cells {
            if let Some(e) = &cell.error {
                if e.is_convergence() {
                    exit_code = 3;
                }
                failures.push(json!({ "rate": rate, "exponent": cell.selection.column(), "error": e.to_string() }));
            } else if let Some(d) = cell.diagnostics.as_ref().filter(|d| !d.warnings.is_empty()) {
                failures.push(json!({ "rate": rate, "exponent": cell.selection.column(), "warnings": d.warnings }));
            }
        }
    }
    let columns: Vec<String> = table
        .first()
        .map(|r| r.cells.iter().map(|c| c.selection.column()).collect())
        .unwrap_or_default();
    match cfg.format {
        Format::Csv => {
            let mut data = String::from("rate");
            for c in &columns {
                data.push(',');
                data.push_str(c);
            }
            data.push('\n');
            for (row, &rate) in table.iter().zip(&cfg.rates) {
                data.push_str(&format_value(rate));
                for cell in &row.cells {
                    data.push(',');
                    if let Some(v) = cell.value {
                        data.push_str(&format_value(base.from_nats(v)));
                    }
                }
                data.push('\n');
            }
            let sidecar = json!({ "config": cfg, "base": base.name(), "cells": failures });
            Ok(Outcome {
                data,
                sidecar: Some(serde_json::to_string_pretty(&sidecar).expect("serializable") + "\n"),
                exit_code,
            })
        }
        Format::Json => {
            let body: Vec<Value> = table
                .iter()
                .zip(&cfg.rates)
                .map(|(row, &rate)| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("rate".into(), num(rate));
                    for cell in &row.cells {
                        obj.insert(
                            cell.selection.column(),
                            cell.value
                                .map(|v| num(base.from_nats(v)))
                                .unwrap_or(Value::Null),
                        );
                    }
                    Value::Object(obj)
                })
                .collect();
            Ok(Outcome::json(
                json!({ "config": cfg, "columns": columns, "rows": body, "diagnostics": failures }),
                exit_code,
            ))
        }
    }
}

fn mi(cfg: &RunConfig) -> CliResult<Outcome> {
    let base = cfg.base()?;
    let (p, w) = cfg.channel()?;
    let py = w.output(&p)?;
    let to_base = |x: f64| num(base.from_nats(x));
    let scale = base.from_nats(1.0);
    let mut doc = json!({
        "config": cfg,
        "base": base.name(),
        "mutual_information": to_base(measures::mutual_information(&p, &w)?),
        "mutual_varentropy": num(measures::mutual_varentropy(&p, &w)? * scale * scale),
        "input_entropy": to_base(measures::entropy(&p)),
        "output_entropy": to_base(measures::entropy(&py)),
        "output_distribution": py.probs(),
        "degenerate": w.is_degenerate(&p)?,
    });
    if let Some(order) = cfg.order {
        let csiszar = measures::csiszar_mi(&p, &w, order)?;
        doc["order"] = json!(order);
        doc["sibson"] = to_base(measures::sibson_mi(&p, &w, order)?);
        doc["csiszar"] = to_base(csiszar.value);
        doc["csiszar_minimizer"] = json!(csiszar.minimizer.probs());
    }
    Ok(Outcome::json(doc, 0))
}

/// Default `r`: the midpoint of `(exponent, R/2)`.
fn default_r(exponent: f64, rate: f64) -> f64 {
    0.5 * (exponent + rate / 2.0)
}

fn finite_n(cfg: &RunConfig) -> CliResult<Outcome> {
    let base = cfg.base()?;
    let (p, w) = cfg.channel()?;
    let rate = base.to_nats(cfg.single_rate()?);
    let n = cfg.require_n()?;
    let delta = cfg.delta.unwrap_or(0.5);
    let kind = cfg.kind()?;
    let (nx, ny) = (w.input_size(), w.output_size());
    let (label, asymptotic, fin, constants) = match kind {
        CodebookKind::Iid => {
            let asym = exponents::alpha_dual(&p, &w, rate)?.value;
            let fin = typespace::alpha_finite_n(&p, &w, rate, n)?;
            let r = cfg
                .r
                .map(|r| base.to_nats(r))
                .unwrap_or_else(|| default_r(asym, rate));
            let c =
                typespace::finite_n_constants(n, nx, ny, rate, fin.value, delta, r, cfg.integer_m)?;
            ("alpha", asym, fin, c)
        }
        CodebookKind::ConstantComposition => {
            let t = TypeDescriptor::denominator_of(&p, n)?;
            let asym = exponents::aleph_dual(&p, &w, rate)?.value;
            let fin = typespace::aleph_finite_n(&t, &w, rate, n)?;
            let r = cfg
                .r
                .map(|r| base.to_nats(r))
                .unwrap_or_else(|| default_r(asym, rate));
            let c = typespace::cc_finite_n_constants(n, nx, ny, rate, fin.value, delta, r)?;
            ("aleph", asym, fin, c)
        }
    };
    let b = |x: f64| num(base.from_nats(x));
    let mut doc = json!({
        "config": cfg,
        "base": base.name(),
        "ensemble": kind.name(),
        "n": n,
        "kappa_n": b(constants.kappa_n),
        "rho_n": b(constants.rho_n),
        "phi_n": num(constants.phi_n),
        "upsilon_n": b(constants.upsilon_n),
        "upsilon_vacuous": constants.upsilon_vacuous,
        "a_eps": num(constants.a_eps),
        "mu_n": num(constants.mu_n),
        "delta": delta,
        "r": b(constants.r),
        "minimizing_type": fin.minimizing_type.to_rows(),
        "types_examined": fin.types_examined,
    });
    doc[format!("{label}_n")] = b(fin.value);
    doc[label] = b(asymptotic);
    Ok(Outcome::json(doc, 0))
}

fn simulate(cfg: &RunConfig) -> CliResult<Outcome> {
    let base = cfg.base()?;
    let (p, w) = cfg.channel()?;
    let sim = SimConfig {
        n: cfg.require_n()? as usize,
        rate: cfg.single_rate()?,
        base,
        replicas: cfg.replicas.unwrap_or(200),
        seed: cfg.seed.unwrap_or(0),
        kind: cfg.kind()?,
        poisson: cfg.poisson,
    };
    let run = simulator::estimate_exponent(&p, &w, &sim)?;
    let e = &run.estimate;
    let mut doc = json!({
        "config": cfg,
        "estimate": {
            "n": e.n,
            "m": e.m,
            "replicas": e.replicas,
            "mean_tv": num(e.mean_tv),
            "std_tv": num(e.std_tv),
            "std_error": num(e.std_error),
            "empirical_exponent": num(e.empirical_exponent),
            "exponent_infinite": e.empirical_exponent.is_infinite(),
            "ci95_low": num(e.ci95_low),
            "ci95_high": num(e.ci95_high),
            "base": base.name(),
        },
        "samples": run.samples.iter().map(|s| json!({ "tv": s.tv, "seed": s.codebook_seed, "m": s.m })).collect::<Vec<_>>(),
    });
    if let Some(bound) = finite_n_bound(&p, &w, &sim)? {
        doc["finite_n_bound"] = bound;
    }
    if !cfg.t_grid.is_empty() {
        let table = simulator::concentration_table(&run.samples, e.m, &cfg.t_grid);
        doc["concentration"] = Value::Array(
            table
                .iter()
                .map(|r| {
                    json!({ "t": r.t, "fraction": r.fraction, "bound": num(r.bound), "sampling_slack": r.sampling_slack, "holds": r.holds })
                })
                .collect(),
        );
    }
    Ok(Outcome::json(doc, 0))
}

/// `exp(-n(α_n - κ_n))` (or its constant-composition twin), reported when
/// the type enumeration is small enough and the channel is nondegenerate.
fn finite_n_bound(p: &Distribution64, w: &Channel64, sim: &SimConfig) -> CliResult<Option<Value>> {
    if w.is_degenerate(p)? {
        return Ok(None);
    }
    let rate = sim.base.to_nats(sim.rate);
    let n = sim.n as u32;
    let (nx, ny) = (w.input_size(), w.output_size());
    let (value, kappa) = match sim.kind {
        CodebookKind::Iid => match typespace::alpha_finite_n(p, w, rate, n) {
            Ok(f) => (f.value, typespace::kappa_n(n, nx, ny, true)),
            Err(_) => return Ok(None),
        },
        CodebookKind::ConstantComposition => {
            let t = TypeDescriptor::from_distribution(p, n)?;
            match typespace::aleph_finite_n(&t, w, rate, n) {
                Ok(f) => (f.value, typespace::eta_n(n, nx, ny)),
                Err(_) => return Ok(None),
            }
        }
    };
    let b = |x: f64| num(sim.base.from_nats(x));
    Ok(Some(json!({
        "exponent_n": b(value),
        "kappa_n": b(kappa),
        "mean_tv_upper": num((-(n as f64) * (value - kappa)).exp()),
    })))
}

fn check_bounds(cfg: &RunConfig) -> CliResult<Outcome> {
    let suite = bounds::bounds_suite();
    let failures: Vec<Value> = suite
        .iter()
        .filter(|e| !e.report.holds)
        .map(|e| json!({ "lemma": e.lemma, "params": e.params, "lhs": num(e.report.lhs), "rhs": num(e.report.rhs) }))
        .collect();
    let mut by_lemma = serde_json::Map::new();
    for e in &suite {
        let entry = by_lemma
            .entry(e.lemma)
            .or_insert_with(|| json!({ "checked": 0, "passed": 0 }));
        entry["checked"] = json!(entry["checked"].as_u64().unwrap_or(0) + 1);
        if e.report.holds {
            entry["passed"] = json!(entry["passed"].as_u64().unwrap_or(0) + 1);
        }
    }
    let failed = failures.len();
    let doc = json!({
        "config": cfg,
        "total": suite.len(),
        "passed": suite.len() - failed,
        "failed": failed,
        "all_pass": failed == 0,
        "lemmas": by_lemma,
        "failures": failures,
    });
    Ok(Outcome::json(doc, if failed == 0 { 0 } else { 1 }))
}
