//! Power sums of the window eigenvalues, brute-force dominant-term witnesses,
//! and the growth-law classifier.
//!
//! For a window with eigenvalues `lambda_i = q^{s_i}` the quadratic form
//! `g_n = <Phi^n v_delta, Phi^n v_delta> = sum_i ||F^n e_i||^2` behaves like
//! `C q^n n^{2(m-1)}` when every `Re s_i = 1/2` and the largest Jordan block has size `m`,
//! and grows geometrically faster than `q^n` otherwise. Fitting
//! `ln g_n - n ln q ~ a n + b ln n + c` separates the three cases.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::SpectralWindow;
use crate::linalg::{c, Cx, ZERO};
use crate::standard_model::StandardModel;

/// Smallest `n_max` accepted by [`fit_growth`].
pub const MIN_FIT_N: usize = 64;

/// `nu_n = sum_i m_i q^{n s_i}` for `n = 0..=n_max`.
pub fn trace_power_sums(w: &SpectralWindow, n_max: usize) -> Vec<Cx> {
    (0..=n_max)
        .map(|n| w.sigma_y.iter().map(|b| (b.s() * (n as f64 * w.t)).exp() * b.jordan_size as f64).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub n_max: usize,
    pub witnesses: Vec<usize>,
    pub density: f64,
}

/// All `1 <= n <= n_max` with `|lambda_1|^n <= |sum_i lambda_i^n| + 1e-12`, where
/// `lambda_1` has maximal modulus.
///
/// Evaluated after dividing by `|lambda_1|^n` so that large `n` neither overflow nor
/// underflow; each `(lambda_i / |lambda_1|)^n` is formed in polar form.
pub fn dominant_term_witnesses(lambdas: &[Cx], n_max: usize) -> WitnessSummary {
    let top = lambdas.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let witnesses: Vec<usize> = if top == 0.0 {
        (1..=n_max).collect()
    } else {
        let polar: Vec<(f64, f64)> =
            lambdas.iter().filter(|z| z.norm() > 0.0).map(|z| ((z.norm() / top).ln(), z.arg())).collect();
        (1..=n_max)
            .filter(|&n| {
                let nf = n as f64;
                let sum: Cx = polar.iter().map(|&(log_r, theta)| Cx::from_polar((log_r * nf).exp(), theta * nf)).sum();
                sum.norm() >= 1.0 - 1e-12
            })
            .collect()
    };
    let density = if n_max == 0 { 0.0 } else { witnesses.len() as f64 / n_max as f64 };
    WitnessSummary { n_max, witnesses, density }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSequence {
    pub n_values: Vec<usize>,
    pub log_g: Vec<f64>,
    pub log_q: f64,
}

impl GrowthSequence {
    pub fn log_g_minus_nlogq(&self) -> Vec<f64> {
        self.n_values.iter().zip(&self.log_g).map(|(&n, &lg)| lg - n as f64 * self.log_q).collect()
    }

    /// CSV with columns `n,log_g,log_g_minus_nlogq`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,log_g,log_g_minus_nlogq\n");
        for ((n, lg), ex) in self.n_values.iter().zip(&self.log_g).zip(self.log_g_minus_nlogq()) {
            out.push_str(&format!("{n},{lg:.17e},{ex:.17e}\n"));
        }
        out
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// `ln g_n` for `n = 1..=n_max`, propagating each basis column with per-step renormalization.
pub fn growth_sequence(model: &StandardModel, n_max: usize) -> GrowthSequence {
    let d = model.two_g;
    let f = &model.window;
    let mut logs = vec![vec![0.0; d]; n_max];
    for col in 0..d {
        let mut v = nalgebra::DVector::from_fn(d, |i, _| if i == col { c(1.0, 0.0) } else { ZERO });
        let mut log = 0.0;
        for row in logs.iter_mut() {
            v = f * v;
            let k = v.norm();
            if k == 0.0 {
                log = f64::NEG_INFINITY;
            } else {
                v /= c(k, 0.0);
                log += k.ln();
            }
            row[col] = 2.0 * log;
        }
    }
    GrowthSequence {
        n_values: (1..=n_max).collect(),
        log_g: logs.iter().map(|row| log_sum_exp(row)).collect(),
        log_q: model.q.ln(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub residual: f64,
    pub fit_window: (usize, usize),
}

/// Least squares `ln g_n - n ln q ~ a n + b ln n + c` over `n in [n_max/2, n_max]`.
///
/// Columns are centred and scaled before the SVD solve; `n` and `ln n` are nearly collinear
/// on the window and the raw design is badly conditioned.
pub fn fit_growth(seq: &GrowthSequence) -> Result<GrowthFit> {
    let n_max = seq.n_values.last().copied().unwrap_or(0);
    if n_max < MIN_FIT_N {
        return Err(Error::InvalidArgument(format!("growth fit needs n_max >= {MIN_FIT_N}, got {n_max}")));
    }
    let lo = n_max / 2;
    let excess = seq.log_g_minus_nlogq();
    let rows: Vec<(f64, f64)> =
        seq.n_values.iter().zip(&excess).filter(|(&n, _)| n >= lo).map(|(&n, &y)| (n as f64, y)).collect();
    if rows.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::InvalidArgument("growth sequence has non-finite entries in the fit window".into()));
    }
    let m = rows.len();
    let mean = |f: &dyn Fn(f64) -> f64| rows.iter().map(|&(n, _)| f(n)).sum::<f64>() / m as f64;
    let (mu_n, mu_l) = (mean(&|n| n), mean(&|n| n.ln()));
    let spread = |f: &dyn Fn(f64) -> f64, mu: f64| {
        (rows.iter().map(|&(n, _)| (f(n) - mu).powi(2)).sum::<f64>() / m as f64).sqrt()
    };
    let (sd_n, sd_l) = (spread(&|n| n, mu_n), spread(&|n| n.ln(), mu_l));
    let design = DMatrix::from_fn(m, 3, |i, j| {
        let n = rows[i].0;
        match j {
            0 => (n - mu_n) / sd_n,
            1 => (n.ln() - mu_l) / sd_l,
            _ => 1.0,
        }
    });
    let rhs = DVector::from_iterator(m, rows.iter().map(|&(_, y)| y));
    let svd = design.clone().svd(true, true);
    let sv_max = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * sv_max {
        return Err(Error::InvalidArgument("degenerate growth-fit design".into()));
    }
    let coef = svd.solve(&rhs, 0.0).map_err(|e| Error::InvalidArgument(format!("growth fit: {e}")))?;
    let a_hat = coef[0] / sd_n;
    let b_hat = coef[1] / sd_l;
    let c_hat = coef[2] - a_hat * mu_n - b_hat * mu_l;
    let misfit = &design * &coef - &rhs;
    Ok(GrowthFit { a_hat, b_hat, c_hat, residual: (misfit.norm_squared() / m as f64).sqrt(), fit_window: (lo, n_max) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub a: f64,
    pub b: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { a: 0.01, b: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RhAndSemisimple,
    RhViolated,
    NotSemisimple,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::RhAndSemisimple => "rh_and_semisimple",
            Verdict::RhViolated => "rh_violated",
            Verdict::NotSemisimple => "not_semisimple",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthClassification {
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub verdict: Verdict,
    pub m_n_estimate: Option<usize>,
    pub fit_window: (usize, usize),
    pub residual: f64,
    pub thresholds: Thresholds,
    /// A standard model with bounded growth exists exactly for `rh_and_semisimple`.
    pub standard_model_exists: bool,
    pub note: String,
}

pub fn classify(fit: &GrowthFit, thresholds: &Thresholds) -> GrowthClassification {
    let (verdict, m_n_estimate, note) = if fit.a_hat > thresholds.a {
        (Verdict::RhViolated, None, format!("geometric excess over q^n: a_hat = {:.6} > {}", fit.a_hat, thresholds.a))
    } else if fit.b_hat > thresholds.b {
        let m = (fit.b_hat / 2.0 + 1.0).round().max(2.0) as usize;
        (
            Verdict::NotSemisimple,
            Some(m),
            format!(
                "polynomial excess n^{:.3}; the estimate is the largest Jordan size in the window, smaller blocks are not resolved",
                fit.b_hat
            ),
        )
    } else {
        (Verdict::RhAndSemisimple, None, "g_n / q^n bounded: critical line and semi-simple".to_string())
    };
    GrowthClassification {
        a_hat: fit.a_hat,
        b_hat: fit.b_hat,
        c_hat: fit.c_hat,
        verdict,
        m_n_estimate,
        fit_window: fit.fit_window,
        residual: fit.residual,
        thresholds: *thresholds,
        standard_model_exists: verdict == Verdict::RhAndSemisimple,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{frobenius_via_exponential, spectral_window};
    use crate::linalg::{fro, mat_pow};
    use crate::operator_lab::{build_jordan_operator, EigenvalueSpec, OperatorSpec};
    use crate::standard_model::build_standard_model;

    fn window_model(blocks: &[(f64, f64, usize)], seed: u64, y: f64, q: f64) -> (SpectralWindow, StandardModel) {
        let spec = OperatorSpec::new(blocks.iter().map(|&(re, im, m)| EigenvalueSpec::new(c(re, im), m)).collect())
            .with_seed(seed);
        let a = build_jordan_operator(&spec).unwrap();
        let w = spectral_window(&spec, y, q).unwrap();
        let model = build_standard_model(&frobenius_via_exponential(&a, &w).unwrap(), &w);
        (w, model)
    }

    fn synthetic(n_max: usize, f: impl Fn(f64) -> f64) -> GrowthSequence {
        GrowthSequence {
            n_values: (1..=n_max).collect(),
            log_g: (1..=n_max).map(|n| f(n as f64)).collect(),
            log_q: 2f64.ln(),
        }
    }

    #[test]
    fn power_sum_examples() {
        let (w, _) = window_model(&[(0.5, 1.0, 1), (0.5, -1.0, 1)], 0, 2.0, 2.0);
        let nu = trace_power_sums(&w, 3);
        assert!((nu[1] - c(2.0 * 2f64.sqrt() * 2f64.ln().cos(), 0.0)).norm() < 1e-12);
        assert!((nu[1].re - 2.175736174027818).abs() < 1e-12);
        assert_eq!(nu[0], c(2.0, 0.0));
        let (w, _) = window_model(&[(0.5, 0.0, 1)], 0, 1.0, 3.0);
        for (n, v) in trace_power_sums(&w, 10).iter().enumerate() {
            assert!((v.re - 3f64.powf(n as f64 / 2.0)).abs() < 1e-12 * v.re);
        }
    }

    #[test]
    fn power_sums_match_window_traces_including_jordan_blocks() {
        let (w, m) = window_model(&[(0.5, 1.0, 3), (0.4, 0.5, 1), (0.6, 0.5, 1)], 5, 2.0, 2.0);
        let nu = trace_power_sums(&w, 30);
        for (n, v) in nu.iter().enumerate() {
            let tr = mat_pow(&m.window, n).trace();
            assert!((tr - v).norm() <= 1e-9 * v.norm().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn witness_examples() {
        let alt = dominant_term_witnesses(&[c(1.0, 0.0), c(-1.0, 0.0)], 10);
        assert_eq!(alt.witnesses, vec![2, 4, 6, 8, 10]);
        assert!((alt.density - 0.5).abs() < 1e-15);
        let single = dominant_term_witnesses(&[c(2.0, 0.0)], 25);
        assert_eq!(single.witnesses, (1..=25).collect::<Vec<_>>());
        let t = 2f64.ln();
        let pair = [(c(0.6, 1.0) * t).exp(), (c(0.4, 1.0) * t).exp()];
        assert!(!dominant_term_witnesses(&pair, 200).witnesses.is_empty());
        assert_eq!(dominant_term_witnesses(&[ZERO], 4).witnesses, vec![1, 2, 3, 4]);
    }

    #[test]
    fn growth_examples() {
        let (_, m) = window_model(&[(0.5, 1.0, 1), (0.5, -1.0, 1)], 0, 2.0, 2.0);
        let seq = growth_sequence(&m, 300);
        for (n, ex) in seq.log_g_minus_nlogq().iter().enumerate() {
            assert!((ex - 2f64.ln()).abs() < 1e-12, "n = {}", n + 1);
        }

        let (_, m) = window_model(&[(0.4, 1.0, 1), (0.6, 1.0, 1)], 0, 2.0, 2.0);
        let fit = fit_growth(&growth_sequence(&m, 512)).unwrap();
        assert!((fit.a_hat - 0.2 * 2f64.ln()).abs() < 1e-6);

        let (_, m) = window_model(&[(0.5, 1.0, 2)], 0, 2.0, 2.0);
        let fit = fit_growth(&growth_sequence(&m, 512)).unwrap();
        assert!((fit.b_hat - 2.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn growth_matches_direct_powers_for_small_n() {
        let (_, m) = window_model(&[(0.5, 1.0, 2), (0.45, 2.5, 1), (0.55, 2.5, 1)], 8, 3.0, 2.0);
        let seq = growth_sequence(&m, 40);
        for (k, lg) in seq.log_g.iter().enumerate() {
            let p = mat_pow(&m.window, k + 1);
            let direct = fro(&p).powi(2);
            assert!((lg.exp() - direct).abs() <= 1e-9 * direct);
        }
    }

    #[test]
    fn fit_examples() {
        let exact = fit_growth(&synthetic(128, |n| n * 2f64.ln() + 2f64.ln())).unwrap();
        assert!(exact.a_hat.abs() < 1e-9 && exact.b_hat.abs() < 1e-9);
        assert!((exact.c_hat - 2f64.ln()).abs() < 1e-9);
        let poly = fit_growth(&synthetic(512, |n| n * 2f64.ln() + 2.0 * n.ln() + 1.0)).unwrap();
        assert!(poly.a_hat.abs() < 1e-6 && (poly.b_hat - 2.0).abs() < 1e-6);
        assert_eq!(poly.fit_window, (256, 512));
        assert!(matches!(fit_growth(&synthetic(63, |n| n)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn jordan_three_exponent() {
        let (_, m) = window_model(&[(0.5, 1.0, 3), (0.5, -1.0, 1)], 0, 2.0, 2.0);
        let fit = fit_growth(&growth_sequence(&m, 512)).unwrap();
        assert!((3.8..=4.2).contains(&fit.b_hat), "{fit:?}");
    }

    #[test]
    fn classify_thresholds() {
        let t = Thresholds::default();
        let fit = |a, b| GrowthFit { a_hat: a, b_hat: b, c_hat: 0.0, residual: 0.0, fit_window: (256, 512) };
        let rh = classify(&fit(0.0, 0.0), &t);
        assert_eq!(rh.verdict, Verdict::RhAndSemisimple);
        assert!(rh.standard_model_exists);
        let v = classify(&fit(0.1386, 0.0), &t);
        assert_eq!(v.verdict, Verdict::RhViolated);
        assert!(!v.standard_model_exists);
        let j = classify(&fit(0.0, 2.05), &t);
        assert_eq!((j.verdict, j.m_n_estimate), (Verdict::NotSemisimple, Some(2)));
        assert_eq!(classify(&fit(0.0, 5.9), &t).m_n_estimate, Some(4));
    }
}
