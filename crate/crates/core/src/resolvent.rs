//! Resolvents, rectangle-contour quadrature, Riesz projections and the holomorphic
//! functional calculus on the window `Omega_Y = {0 < Re s < 1, |Im s| < Y}`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, fro, identity, CMatrix, Cx, ZERO};
use crate::operator_lab::RealizedOperator;
use crate::quadrature::gauss_legendre;

pub const DEFAULT_MIN_GAP: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_NODE_CAP: usize = 4096;
pub const MIN_NODES_PER_SIDE: usize = 8;
/// Largest Gauss–Legendre panel order; longer sides are split into panels.
const MAX_PANEL_ORDER: usize = 16;

/// Boundary of `Omega_Y`, traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub y: f64,
    pub nodes_per_side: usize,
    pub min_gap: f64,
}

impl Contour {
    pub fn new(y: f64, nodes_per_side: usize) -> Result<Self> {
        if !y.is_finite() || y <= 0.0 {
            return Err(Error::InvalidArgument(format!("contour height Y = {y} must be positive")));
        }
        if nodes_per_side < MIN_NODES_PER_SIDE {
            return Err(Error::InvalidArgument(format!(
                "nodes_per_side = {nodes_per_side} is below the minimum of {MIN_NODES_PER_SIDE}"
            )));
        }
        Ok(Contour { y, nodes_per_side, min_gap: DEFAULT_MIN_GAP })
    }

    pub fn with_min_gap(mut self, min_gap: f64) -> Self {
        self.min_gap = min_gap;
        self
    }

    /// Oriented sides `(start, end)`: bottom, right, top, left.
    pub fn sides(&self) -> [(Cx, Cx); 4] {
        let y = self.y;
        [(c(0.0, -y), c(1.0, -y)), (c(1.0, -y), c(1.0, y)), (c(1.0, y), c(0.0, y)), (c(0.0, y), c(0.0, -y))]
    }

    /// Distance from `z` to the rectangle boundary.
    pub fn boundary_distance(&self, z: Cx) -> f64 {
        self.sides().iter().map(|&(a, b)| segment_distance(z, a, b)).fold(f64::INFINITY, f64::min)
    }

    pub fn encloses(&self, z: Cx) -> bool {
        z.re > 0.0 && z.re < 1.0 && z.im.abs() < self.y
    }

    fn panel_layout(&self) -> (usize, usize) {
        let order = self.nodes_per_side.min(MAX_PANEL_ORDER);
        (order, self.nodes_per_side.div_ceil(order))
    }

    /// Fails with `NearSingular` when an eigenvalue of `a` is within `min_gap` of the boundary.
    pub fn check_clearance(&self, a: &RealizedOperator) -> Result<()> {
        for s in a.truth.eigenvalues() {
            let d = self.boundary_distance(s);
            if d < self.min_gap {
                return Err(Error::NearSingular {
                    point: format!("{}{:+}i", s.re, s.im),
                    distance: d,
                    min_gap: self.min_gap,
                });
            }
        }
        Ok(())
    }
}

fn segment_distance(z: Cx, a: Cx, b: Cx) -> f64 {
    let d = b - a;
    let t = ((z - a) * d.conj()).re / d.norm_sqr();
    (z - (a + d * t.clamp(0.0, 1.0))).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub tol: f64,
    pub node_cap: usize,
    pub min_gap: f64,
    pub initial_nodes: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            tol: DEFAULT_TOL,
            node_cap: DEFAULT_NODE_CAP,
            min_gap: DEFAULT_MIN_GAP,
            initial_nodes: MIN_NODES_PER_SIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    #[serde(with = "linalg::matrix_serde")]
    pub matrix: CMatrix,
    pub residual: f64,
    pub nodes_used: usize,
}

/// `(sI - A)^-1`, refusing points within `min_gap` of the spectrum.
pub fn resolvent(a: &RealizedOperator, s: Cx, min_gap: f64) -> Result<CMatrix> {
    let d = a.spectral_distance(s);
    if d < min_gap {
        return Err(Error::NearSingular { point: format!("{}{:+}i", s.re, s.im), distance: d, min_gap });
    }
    shifted_inverse(&a.matrix, s)
}

fn shifted_inverse(a: &CMatrix, s: Cx) -> Result<CMatrix> {
    let n = a.nrows();
    let shifted = identity(n) * s - a;
    linalg::inverse(&shifted)
}

/// Exact resolvent of a single Jordan block: upper Toeplitz with `1/(s - s_i)^(k+1)` on the
/// `k`-th superdiagonal.
pub fn jordan_resolvent_closed_form(s_i: Cx, m: usize, s: Cx) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("Jordan block size must be >= 1".into()));
    }
    if s == s_i {
        return Err(Error::Singular(format!("resolvent evaluated at the eigenvalue {}{:+}i", s_i.re, s_i.im)));
    }
    let r = (s - s_i).inv();
    let powers: Vec<Cx> = std::iter::successors(Some(r), |p| Some(p * r)).take(m).collect();
    Ok(CMatrix::from_fn(m, m, |i, j| if j >= i { powers[j - i] } else { ZERO }))
}

/// Analytic scalar symbol usable on the contour.
pub type Symbol<'a> = &'a (dyn Fn(Cx) -> Cx + Sync);

/// `(1/2 pi i) \oint phi_k(s) (sI - A)^-1 ds` for every symbol, sharing one resolvent per node.
///
/// Panels are evaluated in parallel and summed in a fixed order, so results are bitwise
/// reproducible for a given contour.
pub fn contour_integrals(a: &RealizedOperator, contour: &Contour, symbols: &[Symbol<'_>]) -> Result<Vec<CMatrix>> {
    contour.check_clearance(a)?;
    let n = a.dim();
    let (order, panels) = contour.panel_layout();
    let (nodes, weights) = gauss_legendre(order);
    let jobs: Vec<(Cx, Cx)> = contour
        .sides()
        .iter()
        .flat_map(|&(start, end)| {
            let step = (end - start) / panels as f64;
            (0..panels).map(move |p| (start + step * p as f64, start + step * (p + 1) as f64))
        })
        .collect();
    let partials: Vec<Vec<CMatrix>> = jobs
        .par_iter()
        .map(|&(lo, hi)| {
            let half = (hi - lo) * 0.5;
            let mid = (hi + lo) * 0.5;
            let mut acc = vec![CMatrix::zeros(n, n); symbols.len()];
            for (x, w) in nodes.iter().zip(&weights) {
                let s = mid + half * *x;
                let r = shifted_inverse(&a.matrix, s)?;
                for (out, phi) in acc.iter_mut().zip(symbols) {
                    *out += &r * (phi(s) * half * *w);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let scale = c(0.0, 2.0 * PI).inv();
    let mut totals = vec![CMatrix::zeros(n, n); symbols.len()];
    for part in partials {
        for (t, p) in totals.iter_mut().zip(part) {
            *t += p;
        }
    }
    for t in &mut totals {
        *t *= scale;
    }
    Ok(totals)
}

/// `||P^2 - P|| / max(1, ||P||)`.
pub fn idempotency_defect(p: &CMatrix) -> f64 {
    fro(&(p * p - p)) / fro(p).max(1.0)
}

/// Riesz projection onto the generalized eigenspaces enclosed by `contour`.
///
/// The residual is the relative idempotency defect; the caller decides whether it is small
/// enough (see [`adaptive_contour`] for refinement to a tolerance).
pub fn riesz_projection(a: &RealizedOperator, contour: &Contour) -> Result<QuadratureResult> {
    let one = |_: Cx| c(1.0, 0.0);
    let p = contour_integrals(a, contour, &[&one])?.remove(0);
    Ok(QuadratureResult { residual: idempotency_defect(&p), matrix: p, nodes_used: contour.nodes_per_side })
}

/// `phi(A) P = (1/2 pi i) \oint phi(s) (sI - A)^-1 ds` over the window.
pub fn functional_calculus(a: &RealizedOperator, phi: Symbol<'_>, contour: &Contour) -> Result<CMatrix> {
    Ok(contour_integrals(a, contour, &[phi])?.remove(0))
}

/// Outcome of node doubling: the accepted contour and the integrals computed on it.
#[derive(Debug, Clone)]
pub struct Refined {
    pub contour: Contour,
    /// One matrix per symbol, the first being the projection.
    pub integrals: Vec<CMatrix>,
    pub residual: f64,
}

/// Doubles nodes per side until the projection's idempotency defect and the refinement
/// change of every symbol's integral are both within `settings.tol`.
///
/// The constant symbol `1` is always integrated first, so `integrals[0]` is the projection.
pub fn refine_integrals(
    a: &RealizedOperator,
    y: f64,
    extra: &[Symbol<'_>],
    settings: &QuadratureSettings,
) -> Result<Refined> {
    let one = |_: Cx| c(1.0, 0.0);
    let mut symbols: Vec<Symbol<'_>> = vec![&one];
    symbols.extend_from_slice(extra);
    let mut nodes = settings.initial_nodes.max(MIN_NODES_PER_SIDE);
    let mut previous: Option<Vec<CMatrix>> = None;
    let mut best = f64::INFINITY;
    loop {
        let contour = Contour::new(y, nodes)?.with_min_gap(settings.min_gap);
        let integrals = contour_integrals(a, &contour, &symbols)?;
        let mut residual = idempotency_defect(&integrals[0]);
        match &previous {
            Some(prev) => {
                for (now, before) in integrals.iter().zip(prev) {
                    residual = residual.max(fro(&(now - before)) / fro(now).max(1.0));
                }
            }
            None => residual = f64::INFINITY,
        }
        best = best.min(residual);
        if residual <= settings.tol {
            return Ok(Refined { contour, integrals, residual });
        }
        if nodes * 2 > settings.node_cap {
            if previous.is_none() {
                // A single level gives no refinement estimate; fall back to idempotency.
                best = idempotency_defect(&integrals[0]);
            }
            return Err(Error::NoConvergence { nodes, best_residual: best, tol: settings.tol });
        }
        previous = Some(integrals);
        nodes *= 2;
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveContour {
    pub contour: Contour,
    pub projection: QuadratureResult,
}

/// Smallest doubling of nodes per side (from 8) whose Riesz projection meets `settings.tol`.
pub fn adaptive_contour(a: &RealizedOperator, y: f64, settings: &QuadratureSettings) -> Result<AdaptiveContour> {
    let refined = refine_integrals(a, y, &[], settings)?;
    let nodes_used = refined.contour.nodes_per_side;
    Ok(AdaptiveContour {
        contour: refined.contour,
        projection: QuadratureResult {
            matrix: refined.integrals.into_iter().next().expect("projection integral"),
            residual: refined.residual,
            nodes_used,
        },
    })
}

/// Riesz index of `s_i`: the smallest `k` with `(s_i I - A)^k P_i = 0` numerically.
pub fn riesz_index(a: &RealizedOperator, s_i: Cx, p_i: &CMatrix) -> Result<usize> {
    let n = a.dim();
    if p_i.nrows() != n || p_i.ncols() != n {
        return Err(Error::InvalidProjection(format!(
            "projection is {}x{}, operator is {n}x{n}",
            p_i.nrows(),
            p_i.ncols()
        )));
    }
    let p_norm = fro(p_i);
    let defect = fro(&(p_i * p_i - p_i));
    if defect > 1e-6 * p_norm.max(1.0) {
        return Err(Error::InvalidProjection(format!("||P^2 - P|| = {defect:.3e} exceeds 1e-6 * max(1, ||P||)")));
    }
    if linalg::numerical_rank(p_i, 1e-8 * p_norm.max(1.0)) == 0 {
        return Err(Error::InvalidProjection("projection is zero".into()));
    }
    let a_norm = fro(&a.matrix).max(1.0);
    let shifted = identity(n) * s_i - &a.matrix;
    let mut power = p_i.clone();
    for k in 1..=n {
        power = &shifted * power;
        let threshold = 1e-8 * a_norm.powi(k as i32) * p_norm.max(1.0);
        if linalg::numerical_rank(&power, threshold) == 0 {
            return Ok(k);
        }
    }
    Err(Error::InvalidProjection(format!(
        "(s_i I - A)^k P stays nonzero up to k = {n}; P is not the projection of {}{:+}i",
        s_i.re, s_i.im
    )))
}

/// Resolvent of the Jordan form `J` of `a`, assembled block by block from the closed form.
pub fn jordan_form_resolvent(a: &RealizedOperator, s: Cx) -> Result<CMatrix> {
    let n = a.dim();
    let mut out = CMatrix::zeros(n, n);
    for (b, off) in a.truth.blocks.iter().zip(a.block_offsets()) {
        let r = jordan_resolvent_closed_form(b.s(), b.jordan_size, s)?;
        out.view_mut((off, off), (b.jordan_size, b.jordan_size)).copy_from(&r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_lab::{build_jordan_operator, EigenvalueSpec, OperatorSpec};

    fn op(blocks: &[(f64, f64, usize)], seed: u64) -> RealizedOperator {
        let spec = OperatorSpec::new(blocks.iter().map(|&(re, im, m)| EigenvalueSpec::new(c(re, im), m)).collect())
            .with_seed(seed);
        build_jordan_operator(&spec).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        fro(&(a - b)) <= tol * fro(b).max(1.0)
    }

    #[test]
    fn scalar_resolvent() {
        let a = op(&[(0.5, 0.0, 1)], 0);
        let r = resolvent(&a, c(1.5, 0.0), DEFAULT_MIN_GAP).unwrap();
        assert!((r[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jordan_resolvent_examples() {
        let a = op(&[(0.5, 1.0, 2)], 0);
        let r = resolvent(&a, c(1.5, 1.0), DEFAULT_MIN_GAP).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), ZERO, c(1.0, 0.0)]);
        assert!(close(&r, &expected, 1e-15));

        let r = jordan_resolvent_closed_form(ZERO, 1, c(2.0, 0.0)).unwrap();
        assert_eq!(r[(0, 0)], c(0.5, 0.0));
        let r = jordan_resolvent_closed_form(c(0.5, 1.0), 3, c(1.5, 1.0)).unwrap();
        assert!(close(&r, &CMatrix::from_fn(3, 3, |i, j| if j >= i { c(1.0, 0.0) } else { ZERO }), 1e-15));
        let r = jordan_resolvent_closed_form(c(0.5, 0.0), 2, c(0.5, 2.0)).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.0, -0.5), c(-0.25, 0.0), ZERO, c(0.0, -0.5)]);
        assert!(close(&r, &expected, 1e-15));
        assert!(matches!(jordan_resolvent_closed_form(c(0.5, 0.0), 2, c(0.5, 0.0)), Err(Error::Singular(_))));
    }

    #[test]
    fn resolvent_refuses_points_near_the_spectrum() {
        let a = op(&[(0.5, 1.0, 1)], 0);
        let e = resolvent(&a, c(0.5, 1.0 + 1e-6), DEFAULT_MIN_GAP).unwrap_err();
        assert!(matches!(e, Error::NearSingular { .. }));
    }

    #[test]
    fn resolvent_matches_closed_form_on_single_blocks() {
        for m in 1..=4 {
            let a = op(&[(0.5, 1.0, m)], 0);
            let s = c(0.9, -0.3);
            let r = resolvent(&a, s, DEFAULT_MIN_GAP).unwrap();
            let closed = jordan_resolvent_closed_form(c(0.5, 1.0), m, s).unwrap();
            assert!(close(&r, &closed, 1e-12));
        }
    }

    #[test]
    fn projection_examples() {
        let a = op(&[(0.5, 1.0, 1), (0.5, 5.0, 1)], 0);
        let got = adaptive_contour(&a, 2.0, &QuadratureSettings::default()).unwrap();
        let mut expected = CMatrix::zeros(2, 2);
        expected[(0, 0)] = c(1.0, 0.0);
        assert!(close(&got.projection.matrix, &expected, 1e-8));
        assert!(got.projection.residual <= 1e-8);

        let j = op(&[(0.5, 1.0, 2)], 0);
        let got = adaptive_contour(&j, 2.0, &QuadratureSettings::default()).unwrap();
        assert!(close(&got.projection.matrix, &identity(2), 1e-8));

        let w = op(&[(0.5, 1.0, 1), (0.5, 5.0, 1)], 7);
        let got = adaptive_contour(&w, 2.0, &QuadratureSettings::default()).unwrap();
        assert!(close(&got.projection.matrix, &w.block_projection(0), 1e-8));
    }

    #[test]
    fn tight_boundary_is_near_singular() {
        let a = op(&[(0.5, 1.0, 1)], 0);
        let e = adaptive_contour(&a, 1.0 + 1e-6, &QuadratureSettings::default()).unwrap_err();
        assert!(matches!(e, Error::NearSingular { .. }));
    }

    #[test]
    fn unreachable_tolerance_reports_best_residual() {
        let a = op(&[(0.3, 0.5, 3), (0.7, 0.5, 2), (0.5, 1.5, 2), (0.5, 3.0, 1)], 5);
        let settings = QuadratureSettings { tol: 1e-20, node_cap: 64, ..QuadratureSettings::default() };
        match adaptive_contour(&a, 2.0, &settings) {
            Err(Error::NoConvergence { best_residual, nodes, .. }) => {
                assert!(best_residual.is_finite() && best_residual > 1e-20);
                assert_eq!(nodes, 64);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn functional_calculus_examples() {
        let a = op(&[(0.5, 0.0, 1)], 0);
        let contour = Contour::new(1.0, 64).unwrap();
        let four = |s: Cx| c(4.0, 0.0).powc(s);
        let f = functional_calculus(&a, &four, &contour).unwrap();
        assert!((f[(0, 0)] - c(2.0, 0.0)).norm() < 1e-10);

        let d = op(&[(0.5, 1.0, 1), (0.5, 5.0, 1)], 0);
        let contour = Contour::new(2.0, 256).unwrap();
        let id = |s: Cx| s;
        let f = functional_calculus(&d, &id, &contour).unwrap();
        let mut expected = CMatrix::zeros(2, 2);
        expected[(0, 0)] = c(0.5, 1.0);
        assert!(close(&f, &expected, 1e-10));
    }

    #[test]
    fn riesz_index_examples() {
        let a = op(&[(0.5, 1.0, 1)], 0);
        assert_eq!(riesz_index(&a, c(0.5, 1.0), &identity(1)).unwrap(), 1);
        let j = op(&[(0.5, 1.0, 3)], 0);
        assert_eq!(riesz_index(&j, c(0.5, 1.0), &identity(3)).unwrap(), 3);
        let w = op(&[(0.5, 1.0, 2)], 7);
        assert_eq!(riesz_index(&w, c(0.5, 1.0), &identity(2)).unwrap(), 2);
        let bad = CMatrix::from_element(1, 1, c(0.5, 0.0));
        assert!(matches!(riesz_index(&a, c(0.5, 1.0), &bad), Err(Error::InvalidProjection(_))));
    }

    #[test]
    fn fixed_contour_results_are_bitwise_reproducible() {
        let a = op(&[(0.4, 1.0, 2), (0.6, 1.0, 1), (0.5, 2.5, 1)], 11);
        let contour = Contour::new(2.0, 128).unwrap();
        let first = riesz_projection(&a, &contour).unwrap();
        let second = riesz_projection(&a, &contour).unwrap();
        assert_eq!(first, second);
    }
}
