//! Runs every construction and check for one operator spec over a list of windows.

use serde::{Deserialize, Serialize};

use crate::classifier::{
    classify, dominant_term_witnesses, fit_growth, growth_sequence, trace_power_sums, GrowthClassification,
    GrowthSequence, Thresholds, Verdict, WitnessSummary,
};
use crate::error::{Error, Result, StageExt};
use crate::frobenius::{
    check_frob_axioms, frobenius_adaptive, frobenius_via_exponential, q_power, spectral_window, SpectralWindow,
};
use crate::linalg::{fro, Cx};
use crate::operator_lab::{build_jordan_operator, parameter_space, validate_op_axioms, EigenvalueSpec, OperatorSpec};
use crate::report::{Check, Report};
use crate::resolvent::{functional_calculus, riesz_index, Contour, QuadratureSettings};
use crate::standard_model::{build_standard_model, TRACE_TOL};

/// `"auto"` or an explicit list of windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YSelection {
    List(Vec<f64>),
    Keyword(String),
}

impl YSelection {
    pub fn auto() -> Self {
        YSelection::Keyword("auto".into())
    }

    /// Explicit windows, or every midpoint window plus one beyond the largest ordinate.
    pub fn resolve(&self, spec: &OperatorSpec) -> Result<Vec<f64>> {
        match self {
            YSelection::List(ys) if ys.is_empty() => Err(Error::InvalidArgument("empty Y list".into())),
            YSelection::List(ys) => Ok(ys.clone()),
            YSelection::Keyword(k) if k == "auto" => {
                let excluded = crate::operator_lab::excluded_ordinates(spec);
                let top = excluded.iter().copied().fold(0.0, f64::max);
                let space = parameter_space(spec, excluded.len() + 1)?;
                let mut ys: Vec<f64> = space.admissible_y.iter().copied().filter(|&y| y < top).collect();
                ys.extend(space.admissible_y.iter().copied().find(|&y| y > top));
                ys.dedup();
                Ok(ys)
            }
            YSelection::Keyword(k) => Err(Error::InvalidArgument(format!("Y must be \"auto\" or a list, got \"{k}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndToEndConfig {
    #[serde(rename = "Y")]
    pub y: YSelection,
    pub q: f64,
    /// Range of the growth sequences and the classifier fit.
    pub n_max: usize,
    /// Range of the trace identities.
    pub trace_n_max: usize,
    pub quadrature: QuadratureSettings,
    pub thresholds: Thresholds,
    pub hodge_samples: usize,
    pub pair_samples: usize,
    pub seed: u64,
}

impl Default for EndToEndConfig {
    fn default() -> Self {
        EndToEndConfig {
            y: YSelection::auto(),
            q: 2.0,
            n_max: 512,
            trace_n_max: 30,
            quadrature: QuadratureSettings::default(),
            thresholds: Thresholds::default(),
            hodge_samples: 10_000,
            pair_samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub y: f64,
    pub q: f64,
    pub two_g: usize,
    pub sigma_y: Vec<EigenvalueSpec>,
    pub nodes_used: usize,
    pub cross_oracle: Check,
    pub frob_contour: Report,
    pub frob_exponential: Report,
    pub calculus: Report,
    pub ait1: Report,
    pub ait2: Report,
    pub ait3: Report,
    pub ip: Report,
    pub castelnuovo_severi: Report,
    pub cauchy_schwarz: Report,
    pub lefschetz: Report,
    pub growth: GrowthClassification,
    pub dominant_terms: WitnessSummary,
    #[serde(skip)]
    pub growth_sequence: Option<GrowthSequence>,
}

impl WindowReport {
    pub fn reports(&self) -> [&Report; 10] {
        [
            &self.frob_contour,
            &self.frob_exponential,
            &self.calculus,
            &self.ait1,
            &self.ait2,
            &self.ait3,
            &self.ip,
            &self.castelnuovo_severi,
            &self.cauchy_schwarz,
            &self.lefschetz,
        ]
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.cross_oracle.pass {
            out.push(format!("Y={}: {}", self.y, self.cross_oracle.name));
        }
        for r in self.reports() {
            for check in r.failures() {
                out.push(format!("Y={}: {} / {}", self.y, r.subject, check.name));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEndReport {
    pub spec: OperatorSpec,
    pub op_axioms: Report,
    pub windows: Vec<WindowReport>,
    /// Classification of the largest window.
    pub verdict: GrowthClassification,
    pub verdict_y: f64,
}

impl EndToEndReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.op_axioms.failures().map(|c| format!("{} / {}", self.op_axioms.subject, c.name)).collect();
        for w in &self.windows {
            out.extend(w.failures());
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

fn run_window(
    spec: &OperatorSpec,
    a: &crate::operator_lab::RealizedOperator,
    y: f64,
    config: &EndToEndConfig,
) -> Result<WindowReport> {
    let w = spectral_window(spec, y, config.q).stage("spectral window")?;
    let exact = frobenius_via_exponential(a, &w).stage("closed-form Frobenius")?;
    let quad = frobenius_adaptive(a, &w, &config.quadrature).stage("contour quadrature")?;
    let nodes_used = quad.nodes_used.unwrap_or(0);

    let cross = fro(&(&quad.full - &exact.full)) / fro(&exact.full).max(1.0);
    let cross_oracle = Check::within("contour vs closed form", cross, config.quadrature.tol)
        .with_note("||F_contour - F_exponential|| / max(1, ||F||)");

    let calculus = calculus_report(a, &w, nodes_used, &config.quadrature).stage("functional calculus")?;

    let model = build_standard_model(&exact, &w);
    let ait1 = model.verify_ait1(config.n_max);
    let ait2 = model.verify_ait2_hodge(config.hodge_samples, config.seed);
    let ait3 = model.verify_ait3_trace(config.trace_n_max);
    let ip = model.verify_ip(config.n_max, config.seed);
    let castelnuovo_severi = model.castelnuovo_severi_sweep(config.pair_samples, config.seed.wrapping_add(1));
    let cauchy_schwarz = model.cauchy_schwarz_sweep(config.pair_samples, config.seed.wrapping_add(2));
    let lefschetz = model.lefschetz_range(config.trace_n_max);

    let seq = growth_sequence(&model, config.n_max);
    let fit = fit_growth(&seq).stage("growth fit")?;
    let growth = classify(&fit, &config.thresholds);
    let dominant_terms = dominant_term_witnesses(&w.lambdas(), config.n_max);

    let ip_bounded = ip.check("IP-g").map(|c| c.pass).unwrap_or(false);
    if ip_bounded != (growth.verdict == Verdict::RhAndSemisimple) {
        return Err(Error::InternalInconsistency(format!(
            "IP-g boundedness says {ip_bounded} but the growth fit gives {} (a_hat = {:.4}, b_hat = {:.4})",
            growth.verdict, growth.a_hat, growth.b_hat
        ))
        .at_stage("classification"));
    }

    Ok(WindowReport {
        y,
        q: w.q,
        two_g: exact.two_g,
        sigma_y: w.sigma_y.clone(),
        nodes_used,
        cross_oracle,
        frob_contour: check_frob_axioms(&quad, &w),
        frob_exponential: check_frob_axioms(&exact, &w),
        calculus,
        ait1,
        ait2,
        ait3,
        ip,
        castelnuovo_severi,
        cauchy_schwarz,
        lefschetz,
        growth,
        dominant_terms,
        growth_sequence: Some(seq),
    })
}

/// Trace identities of the functional calculus, Riesz indices, and power sums against traces.
fn calculus_report(
    a: &crate::operator_lab::RealizedOperator,
    w: &SpectralWindow,
    nodes: usize,
    settings: &QuadratureSettings,
) -> Result<Report> {
    let mut report = Report::new("functional calculus");
    let contour = Contour::new(w.y, nodes)?.with_min_gap(settings.min_gap);
    let t = w.t;
    let identity_symbol = |s: Cx| s;
    let q_symbol = move |s: Cx| q_power(t, s);
    let symbols: [(&str, &(dyn Fn(Cx) -> Cx + Sync)); 2] =
        [("phi(s) = s", &identity_symbol), ("phi(s) = q^s", &q_symbol)];
    for (label, phi) in symbols {
        let m = functional_calculus(a, phi, &contour)?;
        let expected: Cx = w.sigma_y.iter().map(|b| phi(b.s()) * b.jordan_size as f64).sum();
        let r = (m.trace() - expected).norm() / expected.norm().max(1.0);
        report.push(Check::within(format!("trace {label}"), r, TRACE_TOL).with_note("tr(phi(A) P) = sum m_i phi(s_i)"));
    }

    let mut worst_index = 0usize;
    let mut index_ok = true;
    for (i, b) in a.truth.blocks.iter().enumerate() {
        if !w.contains(b.s()) {
            continue;
        }
        let k = riesz_index(a, b.s(), &a.block_projection(i))?;
        worst_index = worst_index.max(k.abs_diff(b.jordan_size));
        index_ok &= k == b.jordan_size;
    }
    report.push(Check::flag(
        "Riesz index",
        index_ok,
        format!("index equals Jordan size for every eigenvalue in the window (max mismatch {worst_index})"),
    ));

    let f = frobenius_via_exponential(a, w)?;
    let nu = trace_power_sums(w, 30);
    let mut power = crate::linalg::identity(f.two_g);
    let mut worst: f64 = 0.0;
    for (n, v) in nu.iter().enumerate() {
        if n > 0 {
            power = &power * &f.window;
        }
        let scale: f64 = w.lambdas().iter().map(|l| l.norm().powi(n as i32)).sum();
        worst = worst.max((power.trace() - v).norm() / scale.max(1e-300));
    }
    report.push(
        Check::within("power sums", worst, TRACE_TOL)
            .with_note("tr(F^n) = sum m_i q^{n s_i}, n <= 30, relative to sum m_i |q^{s_i}|^n"),
    );
    Ok(report)
}

/// Every check for every requested window; the verdict comes from the largest window.
pub fn end_to_end_report(spec: &OperatorSpec, config: &EndToEndConfig) -> Result<EndToEndReport> {
    crate::frobenius::check_q(config.q).stage("configuration")?;
    let op_axioms = validate_op_axioms(spec);
    let a = build_jordan_operator(spec).stage("operator construction")?;
    let mut ys = config.y.resolve(spec).stage("window selection")?;
    ys.sort_by(f64::total_cmp);
    let mut windows = Vec::with_capacity(ys.len());
    for &y in &ys {
        windows.push(run_window(spec, &a, y, config).stage(&format!("window Y={y}"))?);
    }
    let last = windows.last().expect("at least one window");
    Ok(EndToEndReport { spec: spec.clone(), op_axioms, verdict: last.growth.clone(), verdict_y: last.y, windows })
}

/// Classification alone, from the closed-form path on the largest requested window.
pub fn classify_spec(
    spec: &OperatorSpec,
    y: f64,
    q: f64,
    n_max: usize,
    thresholds: &Thresholds,
) -> Result<(GrowthClassification, GrowthSequence)> {
    let a = build_jordan_operator(spec).stage("operator construction")?;
    let w = spectral_window(spec, y, q).stage("spectral window")?;
    let f = frobenius_via_exponential(&a, &w).stage("closed-form Frobenius")?;
    let model = build_standard_model(&f, &w);
    let seq = growth_sequence(&model, n_max);
    let fit = fit_growth(&seq).stage("growth fit")?;
    Ok((classify(&fit, thresholds), seq))
}

/// Largest auto window: one unit beyond the largest ordinate.
pub fn outer_window(spec: &OperatorSpec) -> Result<f64> {
    let ys = YSelection::auto().resolve(spec)?;
    Ok(*ys.last().expect("auto selection is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_lab::{generate_family, FamilyKind, FamilyParams};

    fn quick() -> EndToEndConfig {
        EndToEndConfig { n_max: 256, hodge_samples: 500, pair_samples: 500, ..EndToEndConfig::default() }
    }

    #[test]
    fn auto_windows() {
        let spec = generate_family(FamilyKind::RhSemisimple, &FamilyParams::new(vec![1.0, -1.0, 3.0])).unwrap();
        assert_eq!(YSelection::auto().resolve(&spec).unwrap(), vec![2.0, 4.0]);
        assert!(YSelection::Keyword("all".into()).resolve(&spec).is_err());
        assert_eq!(outer_window(&spec).unwrap(), 4.0);
    }

    #[test]
    fn semisimple_spec_passes_everything() {
        let spec =
            generate_family(FamilyKind::RhSemisimple, &FamilyParams::new(vec![1.0, -1.0, 3.0, -3.0]).with_seed(2))
                .unwrap();
        let r = end_to_end_report(&spec, &quick()).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(r.verdict.verdict, Verdict::RhAndSemisimple);
        assert_eq!(r.verdict_y, 4.0);
    }

    #[test]
    fn non_rh_spec_fails_growth_axioms() {
        let spec =
            generate_family(FamilyKind::NonRh, &FamilyParams::new(vec![1.0]).with_delta(0.1).with_seed(3)).unwrap();
        let r = end_to_end_report(&spec, &quick()).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::RhViolated);
        let failures = r.failures();
        assert!(failures.iter().any(|f| f.ends_with("IP-g")));
        assert!(failures.iter().any(|f| f.ends_with("AIT1-g")));
        assert!(failures.iter().all(|f| f.ends_with("IP-g") || f.ends_with("AIT1-g")), "{failures:?}");
    }

    #[test]
    fn jordan_spec_is_not_semisimple() {
        let spec =
            generate_family(FamilyKind::RhJordan, &FamilyParams::new(vec![1.0, 3.0]).with_m(2).with_seed(4)).unwrap();
        let r = end_to_end_report(&spec, &quick()).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::NotSemisimple);
        assert_eq!(r.verdict.m_n_estimate, Some(2));
    }

    #[test]
    fn errors_carry_their_stage() {
        let spec = generate_family(FamilyKind::RhSemisimple, &FamilyParams::new(vec![1.0])).unwrap();
        let config = EndToEndConfig { y: YSelection::List(vec![1.0]), ..quick() };
        let e = end_to_end_report(&spec, &config).unwrap_err();
        assert!(matches!(e.root(), Error::InvalidWindow(_)));
        assert!(e.to_string().contains("window Y=1"));
    }
}
