//! The Frobenius analogue `F = (1/2 pi i) \oint q^s (sI - A)^-1 ds` on a spectral window,
//! built both by quadrature and from the Jordan data, plus its scalar extension to the
//! one-dimensional pieces `H^0 = C f` and `H^2 = C g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, fro, identity, CMatrix, CVector, Cx, ZERO};
use crate::operator_lab::{check_admissible, EigenvalueSpec, OperatorSpec, RealizedOperator};
use crate::report::{Check, Report};
use crate::resolvent::{contour_integrals, idempotency_defect, refine_integrals, Contour, QuadratureSettings};

/// Rank cut-off for the range of a projection, relative to its largest singular value.
const RANGE_REL_TOL: f64 = 1e-6;
/// Tolerance for the multiset comparison of window eigenvalues.
pub const EIGENVALUE_TOL: f64 = 1e-6;
/// Relative tolerance for the block-structure checks on `F`.
pub const STRUCTURE_TOL: f64 = 1e-8;

/// A window `Y` of the parameter space together with `q(Y)` and `t = ln q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub y: f64,
    pub sigma_y: Vec<EigenvalueSpec>,
    pub q: f64,
    pub t: f64,
}

impl SpectralWindow {
    /// `dim H_m(Y) = sum of Jordan sizes inside the window`.
    pub fn dimension(&self) -> usize {
        self.sigma_y.iter().map(|b| b.jordan_size).sum()
    }

    /// `q^s` for each eigenvalue in the window, repeated by Jordan size.
    pub fn lambdas(&self) -> Vec<Cx> {
        self.sigma_y.iter().flat_map(|b| std::iter::repeat_n(q_power(self.t, b.s()), b.jordan_size)).collect()
    }

    pub fn contains(&self, s: Cx) -> bool {
        self.sigma_y.iter().any(|b| b.s() == s)
    }
}

/// `q^s = e^{t s}`.
pub fn q_power(t: f64, s: Cx) -> Cx {
    (s * t).exp()
}

pub fn check_q(q: f64) -> Result<()> {
    if q.is_nan() || q <= 0.0 || q == 1.0 || !q.is_finite() {
        return Err(Error::InvalidQ(q));
    }
    Ok(())
}

pub fn spectral_window(spec: &OperatorSpec, y: f64, q: f64) -> Result<SpectralWindow> {
    check_q(q)?;
    check_admissible(spec, y)?;
    Ok(SpectralWindow { y, sigma_y: spec.blocks.iter().filter(|b| b.im.abs() < y).copied().collect(), q, t: q.ln() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionPath {
    Contour,
    Exponential,
}

/// `F` on `H`, its restriction to the window subspace, and its action on `f` and `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusOperator {
    #[serde(with = "linalg::matrix_serde")]
    pub projection: CMatrix,
    /// Orthonormal columns spanning the image of `projection`.
    #[serde(with = "linalg::matrix_serde")]
    pub basis: CMatrix,
    #[serde(with = "linalg::matrix_serde")]
    pub full: CMatrix,
    /// `basis^H full basis`.
    #[serde(with = "linalg::matrix_serde")]
    pub window: CMatrix,
    pub ext_f: Cx,
    pub ext_g: Cx,
    pub two_g: usize,
    /// Idempotency defect (exponential path) or quadrature residual (contour path).
    pub residual: f64,
    pub nodes_used: Option<usize>,
    pub path: ConstructionPath,
}

impl FrobeniusOperator {
    fn assemble(
        projection: CMatrix,
        full: CMatrix,
        w: &SpectralWindow,
        residual: f64,
        nodes_used: Option<usize>,
        path: ConstructionPath,
    ) -> Result<Self> {
        let basis = projection_range(&projection);
        let expected = w.dimension();
        if basis.ncols() != expected {
            return Err(Error::InvalidProjection(format!(
                "projection has numerical rank {}, expected {expected} from the window",
                basis.ncols()
            )));
        }
        let window = basis.adjoint() * &full * &basis;
        Ok(FrobeniusOperator {
            projection,
            basis,
            full,
            window,
            ext_f: c(1.0, 0.0),
            ext_g: c(w.q, 0.0),
            two_g: expected,
            residual,
            nodes_used,
            path,
        })
    }

    pub fn dim(&self) -> usize {
        self.full.nrows()
    }

    /// Same operator expressed in the basis `basis * u` for a unitary `u`.
    pub fn rebased(&self, u: &CMatrix) -> Self {
        let mut out = self.clone();
        out.basis = &self.basis * u;
        out.window = u.adjoint() * &self.window * u;
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator serializes")
    }
}

fn projection_range(p: &CMatrix) -> CMatrix {
    let sv = linalg::singular_values(p);
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANGE_REL_TOL * top.max(1.0)).count();
    linalg::leading_range(p, rank)
}

/// `N(s_i) = e^{t M(s_i)}`: upper Toeplitz with `t^k e^{t s_i} / k!` on the `k`-th superdiagonal.
pub fn jordan_exponential_block(s_i: Cx, m: usize, t: f64) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("Jordan block size must be >= 1".into()));
    }
    let base = (s_i * t).exp();
    let mut coeff = vec![base; m];
    for k in 1..m {
        coeff[k] = coeff[k - 1] * (t / k as f64);
    }
    Ok(CMatrix::from_fn(m, m, |i, j| if j >= i { coeff[j - i] } else { ZERO }))
}

/// `sum_{s_i in window} e^{t A|H(s_i)} P_{s_i}` from the Jordan data, mapped through `W`.
pub fn frobenius_via_exponential(a: &RealizedOperator, w: &SpectralWindow) -> Result<FrobeniusOperator> {
    let n = a.dim();
    let mut f_j = CMatrix::zeros(n, n);
    let mut p_j = CMatrix::zeros(n, n);
    for (b, off) in a.truth.blocks.iter().zip(a.block_offsets()) {
        if !w.contains(b.s()) {
            continue;
        }
        let m = b.jordan_size;
        f_j.view_mut((off, off), (m, m)).copy_from(&jordan_exponential_block(b.s(), m, w.t)?);
        p_j.view_mut((off, off), (m, m)).copy_from(&identity(m));
    }
    let projection = a.conjugate(&p_j);
    let full = a.conjugate(&f_j);
    let residual = idempotency_defect(&projection);
    FrobeniusOperator::assemble(projection, full, w, residual, None, ConstructionPath::Exponential)
}

/// Quadrature of `q^s (sI - A)^-1` on a fixed contour.
pub fn frobenius_via_contour(a: &RealizedOperator, w: &SpectralWindow, contour: &Contour) -> Result<FrobeniusOperator> {
    let t = w.t;
    let one = |_: Cx| c(1.0, 0.0);
    let qs = move |s: Cx| q_power(t, s);
    let mut ints = contour_integrals(a, contour, &[&one, &qs])?;
    let full = ints.pop().expect("F integral");
    let projection = ints.pop().expect("P integral");
    let residual = idempotency_defect(&projection);
    FrobeniusOperator::assemble(projection, full, w, residual, Some(contour.nodes_per_side), ConstructionPath::Contour)
}

/// Quadrature with node doubling until both `P` and `F` are converged to `settings.tol`.
pub fn frobenius_adaptive(
    a: &RealizedOperator,
    w: &SpectralWindow,
    settings: &QuadratureSettings,
) -> Result<FrobeniusOperator> {
    let t = w.t;
    let qs = move |s: Cx| q_power(t, s);
    let refined = refine_integrals(a, w.y, &[&qs], settings)?;
    let mut ints = refined.integrals;
    let full = ints.pop().expect("F integral");
    let projection = ints.pop().expect("P integral");
    FrobeniusOperator::assemble(
        projection,
        full,
        w,
        refined.residual,
        Some(refined.contour.nodes_per_side),
        ConstructionPath::Contour,
    )
}

/// Outcome of pairing computed eigenvalues with the expected multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMatch {
    /// Largest `|cluster mean - target| / max(1, |target|)` over distinct targets.
    pub cluster_deviation: f64,
    /// Largest individual `|computed - target| / max(1, |target|)` after pairing.
    pub max_deviation: f64,
}

/// Greedy global pairing by increasing distance, then comparison of per-target means.
///
/// Eigenvalues of a defective block of size `m` move by `O(eps^(1/m))` under rounding, while
/// their mean (a trace) stays accurate, so clusters are compared through their means.
pub fn match_spectrum(computed: &[Cx], targets: &[Cx]) -> Option<SpectrumMatch> {
    if computed.len() != targets.len() {
        return None;
    }
    let n = targets.len();
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| ((computed[i] - targets[j]).norm(), i, j))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_c = vec![false; n];
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    for (_, i, j) in pairs {
        if !used_c[i] && assigned[j].is_none() {
            used_c[i] = true;
            assigned[j] = Some(i);
        }
    }
    let mut max_deviation: f64 = 0.0;
    for (j, slot) in assigned.iter().enumerate() {
        let i = slot.expect("complete pairing");
        max_deviation = max_deviation.max((computed[i] - targets[j]).norm() / targets[j].norm().max(1.0));
    }
    let mut cluster_deviation: f64 = 0.0;
    let mut seen = vec![false; n];
    for j in 0..n {
        if seen[j] {
            continue;
        }
        let members: Vec<usize> = (j..n).filter(|&k| targets[k] == targets[j]).collect();
        let mean = members.iter().map(|&k| computed[assigned[k].expect("complete pairing")]).sum::<Cx>()
            / members.len() as f64;
        for &k in &members {
            seen[k] = true;
        }
        cluster_deviation = cluster_deviation.max((mean - targets[j]).norm() / targets[j].norm().max(1.0));
    }
    Some(SpectrumMatch { cluster_deviation, max_deviation })
}

/// Block structure, invariance, spectrum and extension checks for `F` on window `w`.
pub fn check_frob_axioms(f: &FrobeniusOperator, w: &SpectralWindow) -> Report {
    let mut report = Report::new("frobenius axioms");
    let n = f.dim();
    let p = &f.projection;
    let scale = fro(&f.full).max(1.0) * fro(p).max(1.0);
    let tol = STRUCTURE_TOL * scale;

    report.push(Check::within("F vanishes off window", fro(&(&f.full * p - &f.full)), tol));
    let leak = (identity(n) - p) * &f.full * p;
    report.push(Check::within("FROB-a", fro(&leak), tol));

    let targets = w.lambdas();
    let frob_b = match linalg::eigenvalues(&f.window) {
        Ok(computed) => match match_spectrum(&computed, &targets) {
            Some(m) => Check::within("FROB-b", m.cluster_deviation, EIGENVALUE_TOL)
                .with_note(format!(
                    "largest individual eigenvalue deviation {:.3e} (defective clusters spread as eps^(1/m))",
                    m.max_deviation
                ))
                .with_witness(Some(computed.iter().map(|z| [z.re, z.im]).collect())),
            None => Check::flag(
                "FROB-b",
                false,
                format!("window has {} eigenvalues, expected {}", computed.len(), targets.len()),
            ),
        },
        Err(e) => Check::flag("FROB-b", false, e.to_string()),
    };
    report.push(frob_b);

    if n > f.two_g {
        let rank = linalg::numerical_rank(&f.full, 1e-8 * fro(&f.full).max(1.0));
        report.push(Check::flag(
            "zero eigenvalue",
            rank == f.two_g,
            format!("rank(F) = {rank} on a space of dimension {n}, window dimension {}", f.two_g),
        ));
    } else {
        report.push(Check::flag("zero eigenvalue", true, "vacuous: window is the whole space"));
    }

    report.push(Check::flag(
        "window dimension",
        f.two_g == w.dimension(),
        format!("dim = {}, sum of Jordan sizes in window = {}", f.two_g, w.dimension()),
    ));
    let ext = (f.ext_f - c(1.0, 0.0)).norm().max((f.ext_g - c(w.q, 0.0)).norm() / w.q);
    report.push(Check::within("extension to f and g", ext, 1e-15).with_note("F f = f, F g = q g"));
    report
}

/// Direction and log-norm of `m^n x`, renormalizing after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub direction: CVector,
    pub log_magnitude: f64,
}

pub fn power_apply_matrix(m: &CMatrix, x: &CVector, n: usize) -> PowerResult {
    let norm = x.norm();
    if norm == 0.0 {
        return PowerResult { direction: x.clone(), log_magnitude: f64::NEG_INFINITY };
    }
    let mut v = x / c(norm, 0.0);
    let mut log = norm.ln();
    for _ in 0..n {
        v = m * v;
        let k = v.norm();
        if k == 0.0 {
            return PowerResult { direction: v, log_magnitude: f64::NEG_INFINITY };
        }
        v /= c(k, 0.0);
        log += k.ln();
    }
    PowerResult { direction: v, log_magnitude: log }
}

/// `F^n x` on `H` in log-magnitude form.
pub fn power_apply(f: &FrobeniusOperator, x: &CVector, n: usize) -> PowerResult {
    power_apply_matrix(&f.full, x, n)
}
