//! JSON reports and plot-ready CSV exports.
//!
//! Reports carry no timestamps; object keys are sorted, so equal runs give
//! byte-identical output. Non-finite numbers are written as `null`.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};
use testbf_core::bayes_factors::{max_dbf_linear, max_tbf, tbf_bias_correction, GPrior};
use testbf_core::linmod::{Covariate, Family};
use testbf_core::model_space::{ModelEntry, ModelPosterior};
use testbf_core::posterior::{GSummary, PredictiveSummary};
use testbf_core::validation::{BootstrapReport, MetricSummary, ScoreReport};

use crate::config::RunConfig;
use crate::error::{AppError, AppResult};
use crate::ingest::Ingested;
use crate::run::{SampleRun, SearchStats, SelectRun};

/// A rendered report with its CSV exports (file name, contents).
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub exports: Vec<(String, String)>,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values always serialize");
        s.push('\n');
        s
    }

    /// Write the JSON to `report` (stdout when `None`) and exports into
    /// `exports` when given.
    pub fn write(&self, report: Option<&Path>, exports: Option<&Path>) -> AppResult<()> {
        let text = self.to_json_string();
        match report {
            Some(p) => std::fs::write(p, text).map_err(|e| AppError::io(p.display(), e))?,
            None => print!("{text}"),
        }
        if let Some(dir) = exports {
            std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir.display(), e))?;
            for (name, body) in &self.exports {
                let p = dir.join(name);
                std::fs::write(&p, body).map_err(|e| AppError::io(p.display(), e))?;
            }
        }
        Ok(())
    }
}

pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

fn csv_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "NA".into()
    } else if v > 0.0 {
        "Inf".into()
    } else {
        "-Inf".into()
    }
}

fn csv_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), csv_num)
}

/// RFC 4180 quoting when needed.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn header(command: &str, cfg: &RunConfig, ing: &Ingested) -> Map<String, Value> {
    let ds = &ing.dataset;
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m.insert(
        "data".into(),
        json!({
            "family": ds.family().name(),
            "rows_read": ing.rows_read,
            "rows_dropped": ing.dropped,
            "n": ds.n(),
            "n_obs": ds.n_obs(),
            "n_eff": num(ds.n_eff()),
            "covariates": ds.covariates().iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
            "design_columns": ing.column_names,
        }),
    );
    m
}

fn g_prior_json(prior: GPrior, n_eff: f64) -> Value {
    let (kind, params) = match prior {
        GPrior::FixedG(g) => ("fixed-g", json!({ "g": num(g) })),
        GPrior::LocalEb { bias_correction } => ("local-eb", json!({ "bias_correction": bias_correction })),
        GPrior::GlobalEb => ("global-eb", json!({})),
        GPrior::IncIg { a, b } => ("incig", json!({ "a": num(a), "b": num(b) })),
        GPrior::ZellnerSiow => ("zellner-siow", json!({})),
        GPrior::HyperGOverN => ("hyper-g-n", json!({})),
    };
    json!({ "kind": kind, "parameters": params, "n_eff": num(n_eff) })
}

fn entry_json(e: &ModelEntry, covs: &[Covariate]) -> Value {
    json!({
        "spec": e.spec.display(covs),
        "z": num(e.z),
        "d": e.d,
        "log_tbf": num(e.log_tbf),
        "log_prior": num(e.log_prior),
        "post_prob": num(e.post_prob),
        "failure": e.failure.as_ref().map(|f| f.to_string()),
    })
}

fn g_summary_json(g: &Option<GSummary>) -> Value {
    match g {
        None => Value::Null,
        Some(g) => json!({
            "mean_t": num(g.mean_t),
            "mode_t": opt(g.mode_t),
            "median_g": num(g.median_g),
            "lower_g": num(g.lower_g),
            "upper_g": num(g.upper_g),
            "level": num(g.level),
        }),
    }
}

fn predictive_json(p: &PredictiveSummary) -> Value {
    let arr = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>();
    json!({
        "mean": arr(&p.mean),
        "median": arr(&p.median),
        "lower": arr(&p.lower),
        "upper": arr(&p.upper),
        "level": num(p.level),
    })
}

fn inclusion_rows(post: &ModelPosterior, covs: &[Covariate]) -> Vec<(String, f64)> {
    let mut rows: Vec<(String, f64)> =
        covs.iter().map(|c| c.name.clone()).zip(post.inclusion().iter().copied()).collect();
    // bar-chart order: most probable first, then by name
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}

fn select_sections(m: &mut Map<String, Value>, cfg: &RunConfig, run: &SelectRun, ing: &Ingested) {
    let covs = ing.dataset.covariates();
    let post = &run.posterior;
    m.insert("g_prior".into(), g_prior_json(run.gspec.prior, run.gspec.n_eff));
    m.insert(
        "global_eb".into(),
        post.global_eb()
            .map_or(Value::Null, |g| json!({ "g": num(g.g), "objective": num(g.objective), "flat": g.flat })),
    );
    m.insert(
        "search".into(),
        match &run.stats {
            SearchStats::Exhaustive { models } => json!({ "kind": "exhaustive", "models": models }),
            SearchStats::Mcmc { chains } => json!({
                "kind": "mcmc",
                "chains": chains.iter().map(|(v, a, e)| json!({ "visited": v, "accepted": a, "evaluated": e })).collect::<Vec<_>>(),
            }),
        },
    );
    m.insert("log_normalizer".into(), num(post.log_normalizer()));
    let models: Vec<Value> = post
        .ranked()
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let mut v = entry_json(&post.entries()[i], covs);
            v["rank"] = json!(rank + 1);
            v
        })
        .collect();
    m.insert("models".into(), Value::Array(models));
    m.insert(
        "inclusion".into(),
        Value::Array(
            inclusion_rows(post, covs)
                .into_iter()
                .map(|(c, p)| json!({ "covariate": c, "probability": num(p) }))
                .collect(),
        ),
    );
    let map = &post.entries()[run.map];
    m.insert(
        "selection".into(),
        json!({
            "map": { "spec": map.spec.display(covs), "post_prob": num(map.post_prob) },
            "mpm": {
                "spec": run.mpm.spec.display(covs),
                "included": covs.iter().zip(&run.mpm.included).filter(|(_, i)| **i).map(|(c, _)| c.name.clone()).collect::<Vec<_>>(),
            },
            "rule": serde_json::to_value(cfg.selection).expect("rule serializes"),
            "models": run.chosen.iter().zip(&run.g_summaries).map(|((e, w), g)| json!({
                "spec": e.spec.display(covs),
                "weight": num(*w),
                "post_prob": num(e.post_prob),
                "g_posterior": g_summary_json(g),
            })).collect::<Vec<_>>(),
        }),
    );
}

/// `models.csv`, `inclusion.csv` and the deviance/log-BF table behind the
/// approximation-error scatter (`logbf_error.csv`).
fn select_exports(run: &SelectRun, ing: &Ingested) -> Vec<(String, String)> {
    let ds = &ing.dataset;
    let covs = ds.covariates();
    let post = &run.posterior;
    let mut models = String::from("rank,spec,z,d,log_tbf,log_prior,post_prob\n");
    for (rank, i) in post.ranked().into_iter().enumerate() {
        let e = &post.entries()[i];
        let _ = writeln!(
            models,
            "{},{},{},{},{},{},{}",
            rank + 1,
            csv_field(&e.spec.display(covs)),
            csv_num(e.z),
            e.d,
            csv_num(e.log_tbf),
            csv_num(e.log_prior),
            csv_num(e.post_prob)
        );
    }
    let mut inclusion = String::from("covariate,probability\n");
    for (c, p) in inclusion_rows(post, covs) {
        let _ = writeln!(inclusion, "{},{}", csv_field(&c), csv_num(p));
    }
    // exact minimum-DBF error only exists for the Gaussian family
    let n = ds.n_eff();
    let gaussian = ds.family() == Family::Gaussian;
    let mut err = String::from("spec,z,d,log_max_tbf,delta_tilde,log_max_dbf,delta\n");
    for e in post.entries().iter().filter(|e| e.d > 0 && e.failure.is_none() && e.z > 0.0) {
        let log_mtbf = max_tbf(e.z, e.d).ok();
        let delta_tilde = tbf_bias_correction(e.z, e.d, n).ok().map(|b| b.delta);
        let log_mdbf = if gaussian { max_dbf_linear(1.0 - (-e.z / n).exp(), n, e.d).ok() } else { None };
        let delta = log_mtbf.zip(log_mdbf).map(|(a, b)| a - b);
        let _ = writeln!(
            err,
            "{},{},{},{},{},{},{}",
            csv_field(&e.spec.display(covs)),
            csv_num(e.z),
            e.d,
            csv_opt(log_mtbf),
            csv_opt(delta_tilde),
            csv_opt(log_mdbf),
            csv_opt(delta)
        );
    }
    vec![("models.csv".into(), models), ("inclusion.csv".into(), inclusion), ("logbf_error.csv".into(), err)]
}

pub fn select_report(cfg: &RunConfig, ing: &Ingested, run: &SelectRun) -> Report {
    let mut m = header("select", cfg, ing);
    select_sections(&mut m, cfg, run, ing);
    Report { json: Value::Object(m), exports: select_exports(run, ing) }
}

pub fn sample_report(cfg: &RunConfig, ing: &Ingested, run: &SampleRun) -> Report {
    let covs = ing.dataset.covariates();
    let mut m = header("sample", cfg, ing);
    select_sections(&mut m, cfg, &run.select, ing);
    let mut coef_csv = String::from("spec,weight,term,mean,sd,median,lower,upper\n");
    let members: Vec<Value> = run
        .members
        .iter()
        .map(|mem| {
            let spec = mem.entry.spec.display(covs);
            for c in &mem.coefficients {
                let _ = writeln!(
                    coef_csv,
                    "{},{},{},{},{},{},{},{}",
                    csv_field(&spec),
                    csv_num(mem.weight),
                    csv_field(&c.label),
                    csv_num(c.mean),
                    csv_num(c.sd),
                    csv_num(c.median),
                    csv_num(c.lower),
                    csv_num(c.upper)
                );
            }
            json!({
                "spec": spec,
                "weight": num(mem.weight),
                "draws": mem.draws,
                "g_posterior": g_summary_json(&mem.g),
                "coefficients": mem.coefficients.iter().map(|c| json!({
                    "term": c.label,
                    "mean": num(c.mean),
                    "sd": num(c.sd),
                    "median": num(c.median),
                    "lower": num(c.lower),
                    "upper": num(c.upper),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    m.insert("samples".into(), Value::Array(members));
    let pred = run.prediction.as_ref().map_or(Value::Null, |p| {
        let mut v = predictive_json(p);
        if ing.dataset.family() == Family::Cox {
            v["times"] = json!(run.times.iter().map(|t| num(*t)).collect::<Vec<_>>());
            v["quantity"] = json!("survival at covariate means");
        } else {
            v["quantity"] = json!("mean response at covariate means");
        }
        v
    });
    m.insert("prediction".into(), pred);
    let mut exports = select_exports(&run.select, ing);
    exports.push(("coefficients.csv".into(), coef_csv));
    Report { json: Value::Object(m), exports }
}

fn metric_json(s: &MetricSummary) -> Value {
    json!({ "mean": num(s.mean), "se": num(s.se), "count": s.count })
}

pub fn validate_report(cfg: &RunConfig, ing: &Ingested, rep: &BootstrapReport) -> Report {
    let mut m = header("validate", cfg, ing);
    m.insert(
        "scores".into(),
        json!({
            "auc": metric_json(&rep.auc),
            "cs": metric_json(&rep.cs),
            "ls": metric_json(&rep.ls),
            "replicates": rep.replicates.len(),
            "single_class": rep.single_class,
            "failed": rep.failed,
        }),
    );
    let mut csv = String::from("index,in_bag,oob,auc,cs,ls,failure\n");
    for r in &rep.replicates {
        let s = r.score.as_ref();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.index,
            r.in_bag,
            r.oob,
            csv_opt(s.and_then(|s| s.auc)),
            csv_opt(s.and_then(|s| s.cs)),
            csv_opt(s.map(|s| s.ls)),
            csv_field(&r.failure.as_ref().map(|f| f.to_string()).unwrap_or_default())
        );
    }
    Report { json: Value::Object(m), exports: vec![("replicates.csv".into(), csv)] }
}

pub fn scores_report(score: &ScoreReport) -> Report {
    Report {
        json: json!({
            "command": "scores",
            "auc": opt(score.auc),
            "cs": opt(score.cs),
            "ls": num(score.ls),
            "m": score.m,
        }),
        exports: Vec::new(),
    }
}
