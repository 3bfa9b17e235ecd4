use ait_core::pipeline::classify_spec;
use ait_core::{
    end_to_end_report, generate_family, validate_op_axioms, EndToEndReport, FamilyKind, FamilyParams,
    GrowthClassification, OperatorSpec, Thresholds, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, SweepConfig};
use crate::error::CliError;
use crate::output::{load_text, tag, OutDir};

pub fn load_spec(cfg: &RunConfig) -> Result<OperatorSpec, CliError> {
    let spec = match (&cfg.spec_path, cfg.family) {
        (Some(path), _) => {
            OperatorSpec::from_json(&load_text(path)?).map_err(|e| e.at_stage(format!("loading {}", path.display())))?
        }
        (None, Some(kind)) => {
            generate_family(kind, &cfg.family_params()).map_err(|e| e.at_stage("family generation"))?
        }
        (None, None) => return Err(CliError::config("either --spec or --family is required")),
    };
    let report = validate_op_axioms(&spec);
    let failed: Vec<String> =
        report.failures().map(|c| format!("{} ({})", c.name, c.note.as_deref().unwrap_or("failed"))).collect();
    if !failed.is_empty() {
        return Err(CliError::Spec(failed.join("; ")));
    }
    Ok(spec)
}

pub fn generate(cfg: &RunConfig, out: Option<&mut OutDir>) -> Result<(), CliError> {
    let kind = cfg.family.ok_or_else(|| CliError::config("generate needs --family"))?;
    let spec = generate_family(kind, &cfg.family_params()).map_err(|e| e.at_stage("family generation"))?;
    match out {
        Some(out) => {
            let path = out.write_text("spec.json", &(spec.to_json() + "\n"))?;
            println!("wrote {} ({kind}, dimension {})", path.display(), spec.dimension());
        }
        None => println!("{}", spec.to_json()),
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig, out: &mut OutDir) -> Result<(), CliError> {
    let spec = load_spec(cfg)?;
    let format = cfg.format();
    let mut failed = Vec::new();
    for q in cfg.qs() {
        let report = end_to_end_report(&spec, &cfg.end_to_end(q)).map_err(|e| e.at_stage(format!("verify q={q}")))?;
        write_report(out, &format!("report-q{}", tag(q)), &report, format)?;
        let failures = report.failures();
        let checks: usize = report.op_axioms.checks.len()
            + report
                .windows
                .iter()
                .map(|w| 1 + w.reports().iter().map(|r| r.checks.len()).sum::<usize>())
                .sum::<usize>();
        println!(
            "q={q}: {} windows, {checks} checks, {} failed; verdict {} at Y={}",
            report.windows.len(),
            failures.len(),
            report.verdict.verdict,
            report.verdict_y
        );
        for f in &failures {
            println!("  FAIL {f}");
        }
        failed.extend(failures.into_iter().map(|f| format!("q={q} {f}")));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(format!("{} checks failed, first: {}", failed.len(), failed[0])))
    }
}

fn write_report(
    out: &mut OutDir,
    stem: &str,
    report: &EndToEndReport,
    format: crate::config::Format,
) -> Result<(), CliError> {
    if format.json() {
        out.write_json(&format!("{stem}.json"), report)?;
    }
    if format.csv() {
        for w in &report.windows {
            if let Some(seq) = &w.growth_sequence {
                out.write_text(&format!("{stem}-Y{}.csv", tag(w.y)), &seq.to_csv())?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassificationArtifact<'a> {
    q: f64,
    #[serde(rename = "Y")]
    y: f64,
    n_max: usize,
    classification: &'a GrowthClassification,
}

pub fn classify(cfg: &RunConfig, out: &mut OutDir) -> Result<(), CliError> {
    let spec = load_spec(cfg)?;
    let selection = cfg.y.clone().unwrap_or_else(ait_core::YSelection::auto);
    let ys = selection.resolve(&spec).map_err(|e| e.at_stage("window selection"))?;
    let y = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n_max = cfg.n_max.unwrap_or(512);
    let format = cfg.format();
    for q in cfg.qs() {
        let (classification, seq) = classify_spec(&spec, y, q, n_max, &Thresholds::default())
            .map_err(|e| e.at_stage(format!("classify q={q}")))?;
        let stem = format!("classification-q{}", tag(q));
        if format.json() {
            out.write_json(
                &format!("{stem}.json"),
                &ClassificationArtifact { q, y, n_max, classification: &classification },
            )?;
        }
        if format.csv() {
            out.write_text(&format!("growth-q{}.csv", tag(q)), &seq.to_csv())?;
        }
        let m = match classification.m_n_estimate {
            Some(m) => format!(", m_N={m}"),
            None => String::new(),
        };
        println!(
            "q={q} Y={y}: verdict {}{m} (a_hat={:.5}, b_hat={:.4}, standard model exists: {})",
            classification.verdict, classification.a_hat, classification.b_hat, classification.standard_model_exists
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScenarioSummary {
    scenario: String,
    family: FamilyKind,
    q: f64,
    verdict: Option<Verdict>,
    a_hat: Option<f64>,
    b_hat: Option<f64>,
    m_n_estimate: Option<usize>,
    failed_checks: Vec<String>,
    error: Option<String>,
    exit_code: i32,
}

struct Scenario {
    name: String,
    kind: FamilyKind,
    params: FamilyParams,
    q: f64,
}

pub fn sweep(
    sweep: &SweepConfig,
    jobs: usize,
    format: crate::config::Format,
    out: &mut OutDir,
) -> Result<(), CliError> {
    if sweep.families.is_empty() {
        return Err(CliError::config("sweep needs at least one family"));
    }
    let base = sweep.run_config();
    base.validate()?;
    let mut scenarios = Vec::new();
    for entry in &sweep.families {
        let (kind, params) = entry.resolve();
        for q in base.qs() {
            scenarios.push(Scenario {
                name: format!("scenario-{:03}-{kind}-q{}", scenarios.len(), tag(q)),
                kind,
                params: params.clone(),
                q,
            });
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let results: Vec<Result<EndToEndReport, CliError>> = pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| {
                let spec = generate_family(s.kind, &s.params).map_err(|e| e.at_stage("family generation"))?;
                let cfg = RunConfig { seed: base.seed.or(Some(s.params.seed)), ..base.clone() };
                end_to_end_report(&spec, &cfg.end_to_end(s.q)).map_err(CliError::from)
            })
            .collect()
    });

    let mut summaries = Vec::with_capacity(scenarios.len());
    let mut worst_code = 0;
    for (s, result) in scenarios.iter().zip(results) {
        let summary = match result {
            Ok(report) => {
                write_report(out, &s.name, &report, format)?;
                println!("{}: verdict {}, {} failed checks", s.name, report.verdict.verdict, report.failures().len());
                ScenarioSummary {
                    scenario: s.name.clone(),
                    family: s.kind,
                    q: s.q,
                    verdict: Some(report.verdict.verdict),
                    a_hat: Some(report.verdict.a_hat),
                    b_hat: Some(report.verdict.b_hat),
                    m_n_estimate: report.verdict.m_n_estimate,
                    failed_checks: report.failures(),
                    error: None,
                    exit_code: 0,
                }
            }
            Err(e) => {
                let code = e.exit_code();
                worst_code = worst_code.max(code);
                eprintln!("{}: error: {e}", s.name);
                ScenarioSummary {
                    scenario: s.name.clone(),
                    family: s.kind,
                    q: s.q,
                    verdict: None,
                    a_hat: None,
                    b_hat: None,
                    m_n_estimate: None,
                    failed_checks: Vec::new(),
                    error: Some(e.to_string()),
                    exit_code: code,
                }
            }
        };
        summaries.push(summary);
    }
    out.write_json("sweep.json", &summaries)?;
    match worst_code {
        0 => Ok(()),
        code => {
            Err(CliError::Scenarios { code, first: summaries.iter().find_map(|s| s.error.clone()).unwrap_or_default() })
        }
    }
}
