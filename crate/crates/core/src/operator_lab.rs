//! Finite-dimensional test operators with prescribed spectrum and Jordan structure.
//!
//! An [`OperatorSpec`] lists eigenvalues in the open strip `0 < Re s < 1`, each carrying
//! exactly one Jordan block. [`build_jordan_operator`] realizes it as a dense matrix
//! `A = W J W^-1` with a seeded, conditioning-bounded change of basis `W`, keeping the
//! spec as ground truth for every downstream oracle.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, condition_number, CMatrix, Cx, ONE};
use crate::report::{Check, Report};

/// Tolerance for deciding that an eigenvalue sits on the critical line.
pub const CRITICAL_LINE_TOL: f64 = 1e-12;
/// Default bound on cond(W).
pub const DEFAULT_CONDITIONING: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueSpec {
    pub re: f64,
    pub im: f64,
    pub jordan_size: usize,
}

impl EigenvalueSpec {
    pub fn new(s: Cx, jordan_size: usize) -> Self {
        EigenvalueSpec { re: s.re, im: s.im, jordan_size }
    }

    pub fn s(&self) -> Cx {
        c(self.re, self.im)
    }
}

/// Prescribed spectral data plus the similarity parameters of its realization.
///
/// Serializes as `{"blocks":[{"re":..,"im":..,"jordan_size":..}],"seed":..,"conditioning":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub blocks: Vec<EigenvalueSpec>,
    #[serde(rename = "seed", default)]
    pub similarity_seed: u64,
    #[serde(rename = "conditioning", default = "default_conditioning")]
    pub similarity_conditioning: f64,
}

fn default_conditioning() -> f64 {
    DEFAULT_CONDITIONING
}

impl OperatorSpec {
    pub fn new(blocks: Vec<EigenvalueSpec>) -> Self {
        OperatorSpec { blocks, similarity_seed: 0, similarity_conditioning: DEFAULT_CONDITIONING }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.similarity_seed = seed;
        self
    }

    pub fn with_conditioning(mut self, conditioning: f64) -> Self {
        self.similarity_conditioning = conditioning;
        self
    }

    /// `N = sum m_i`.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.jordan_size).sum()
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = Cx> + '_ {
        self.blocks.iter().map(EigenvalueSpec::s)
    }

    pub fn max_jordan_size(&self) -> usize {
        self.blocks.iter().map(|b| b.jordan_size).max().unwrap_or(0)
    }

    pub fn satisfies_rh(&self) -> bool {
        self.blocks.iter().all(|b| (b.re - 0.5).abs() <= CRITICAL_LINE_TOL)
    }

    pub fn is_semisimple(&self) -> bool {
        self.blocks.iter().all(|b| b.jordan_size == 1)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("operator spec JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("operator spec serializes")
    }
}

/// Dense realization `matrix = W J W^-1` of an [`OperatorSpec`].
#[derive(Debug, Clone)]
pub struct RealizedOperator {
    pub matrix: CMatrix,
    pub basis_change: CMatrix,
    basis_change_inv: CMatrix,
    pub truth: OperatorSpec,
}

impl RealizedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis_change_inverse(&self) -> &CMatrix {
        &self.basis_change_inv
    }

    /// Block-diagonal Jordan matrix `diag(M(s_1), ..., M(s_k))` in spec order.
    pub fn jordan_form(&self) -> CMatrix {
        jordan_matrix(&self.truth)
    }

    /// Row offset of each block inside the Jordan form.
    pub fn block_offsets(&self) -> Vec<usize> {
        block_offsets(&self.truth)
    }

    /// Maps a Jordan-basis matrix `X` to `W X W^-1`.
    pub fn conjugate(&self, jordan_basis: &CMatrix) -> CMatrix {
        &self.basis_change * jordan_basis * &self.basis_change_inv
    }

    /// Distance from `z` to the nearest prescribed eigenvalue.
    pub fn spectral_distance(&self, z: Cx) -> f64 {
        self.truth.eigenvalues().map(|s| (s - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Riesz projection onto the generalized eigenspace of block `index`, from ground truth.
    pub fn block_projection(&self, index: usize) -> CMatrix {
        let n = self.dim();
        let offsets = self.block_offsets();
        let mut e = CMatrix::zeros(n, n);
        for k in 0..self.truth.blocks[index].jordan_size {
            e[(offsets[index] + k, offsets[index] + k)] = ONE;
        }
        self.conjugate(&e)
    }
}

fn block_offsets(spec: &OperatorSpec) -> Vec<usize> {
    spec.blocks
        .iter()
        .scan(0, |acc, b| {
            let start = *acc;
            *acc += b.jordan_size;
            Some(start)
        })
        .collect()
}

/// `M(s)`: `s` on the diagonal, `1` on the superdiagonal.
pub fn jordan_block(s: Cx, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |i, j| {
        if i == j {
            s
        } else if j == i + 1 {
            ONE
        } else {
            linalg::ZERO
        }
    })
}

fn jordan_matrix(spec: &OperatorSpec) -> CMatrix {
    let n = spec.dimension();
    let mut j = CMatrix::zeros(n, n);
    for (b, off) in spec.blocks.iter().zip(block_offsets(spec)) {
        j.view_mut((off, off), (b.jordan_size, b.jordan_size)).copy_from(&jordan_block(b.s(), b.jordan_size));
    }
    j
}

fn check_strip(spec: &OperatorSpec) -> Result<()> {
    for b in &spec.blocks {
        if !(b.re > 0.0 && b.re < 1.0) || !b.im.is_finite() {
            return Err(Error::SpecViolation {
                axiom: "OP4",
                detail: format!("eigenvalue {}{:+}i lies outside the open strip 0 < Re(s) < 1", b.re, b.im),
            });
        }
    }
    Ok(())
}

fn duplicate_pair(spec: &OperatorSpec) -> Option<(usize, usize)> {
    for i in 0..spec.blocks.len() {
        for j in i + 1..spec.blocks.len() {
            if spec.blocks[i].s() == spec.blocks[j].s() {
                return Some((i, j));
            }
        }
    }
    None
}

fn check_distinct(spec: &OperatorSpec) -> Result<()> {
    if let Some((i, j)) = duplicate_pair(spec) {
        let s = spec.blocks[i].s();
        return Err(Error::SpecViolation {
            axiom: "OP3-b",
            detail: format!(
                "eigenvalue {}{:+}i appears in blocks {i} and {j}; each eigenvalue must carry a single Jordan block",
                s.re, s.im
            ),
        });
    }
    Ok(())
}

/// Seeded `W` with `cond(W) <= bound`; identity for seed 0.
///
/// Draws `R` with uniform complex entries and returns `I + alpha R`, halving `alpha` from 1
/// until the conditioning bound holds.
pub fn similarity_transform(n: usize, seed: u64, bound: f64) -> Result<CMatrix> {
    if bound.is_nan() || bound < 1.0 {
        return Err(Error::InvalidArgument(format!("similarity conditioning bound must be >= 1, got {bound}")));
    }
    if seed == 0 || n == 0 {
        return Ok(linalg::identity(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = linalg::random_complex(n, n, &mut rng);
    let mut alpha = 1.0;
    for _ in 0..64 {
        let w = linalg::identity(n) + &r * c(alpha, 0.0);
        if condition_number(&w) <= bound {
            return Ok(w);
        }
        alpha *= 0.5;
    }
    Ok(linalg::identity(n))
}

pub fn build_jordan_operator(spec: &OperatorSpec) -> Result<RealizedOperator> {
    check_strip(spec)?;
    check_distinct(spec)?;
    if spec.blocks.iter().any(|b| b.jordan_size == 0) {
        return Err(Error::InvalidArgument("jordan_size must be >= 1".into()));
    }
    let n = spec.dimension();
    let w = similarity_transform(n, spec.similarity_seed, spec.similarity_conditioning)?;
    let w_inv = linalg::inverse(&w)?;
    let j = jordan_matrix(spec);
    let matrix = if spec.similarity_seed == 0 { j } else { &w * j * &w_inv };
    Ok(RealizedOperator { matrix, basis_change: w, basis_change_inv: w_inv, truth: spec.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    RhSemisimple,
    RhJordan,
    NonRh,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rh_semisimple" => Ok(FamilyKind::RhSemisimple),
            "rh_jordan" => Ok(FamilyKind::RhJordan),
            "non_rh" => Ok(FamilyKind::NonRh),
            other => Err(Error::InvalidArgument(format!(
                "unknown family '{other}' (expected rh_semisimple, rh_jordan or non_rh)"
            ))),
        }
    }
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FamilyKind::RhSemisimple => "rh_semisimple",
            FamilyKind::RhJordan => "rh_jordan",
            FamilyKind::NonRh => "non_rh",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    /// Imaginary parts, one eigenvalue (or mirrored pair, for `non_rh`) each.
    pub gammas: Vec<f64>,
    /// Jordan size of the single non-trivial block (`rh_jordan`).
    #[serde(default = "default_jordan")]
    pub m: usize,
    /// Offset from the critical line (`non_rh`).
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_conditioning")]
    pub conditioning: f64,
}

fn default_jordan() -> usize {
    2
}

fn default_delta() -> f64 {
    0.1
}

impl FamilyParams {
    pub fn new(gammas: Vec<f64>) -> Self {
        FamilyParams {
            gammas,
            m: default_jordan(),
            delta: default_delta(),
            seed: 0,
            conditioning: DEFAULT_CONDITIONING,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_conditioning(mut self, conditioning: f64) -> Self {
        self.conditioning = conditioning;
        self
    }
}

/// Build an [`OperatorSpec`] for one of the three labelled families.
pub fn generate_family(kind: FamilyKind, params: &FamilyParams) -> Result<OperatorSpec> {
    if params.gammas.is_empty() {
        return Err(Error::InvalidArgument("at least one imaginary part is required".into()));
    }
    let blocks = match kind {
        FamilyKind::RhSemisimple => params.gammas.iter().map(|&g| EigenvalueSpec::new(c(0.5, g), 1)).collect(),
        FamilyKind::RhJordan => {
            if params.m < 2 {
                return Err(Error::InvalidArgument(format!("rh_jordan needs a Jordan size m >= 2, got {}", params.m)));
            }
            let top =
                params
                    .gammas
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, g)| if g.abs() > params.gammas[best].abs() { i } else { best });
            params
                .gammas
                .iter()
                .enumerate()
                .map(|(i, &g)| EigenvalueSpec::new(c(0.5, g), if i == top { params.m } else { 1 }))
                .collect()
        }
        FamilyKind::NonRh => {
            if !(params.delta > 0.0 && params.delta < 0.5) {
                return Err(Error::SpecViolation {
                    axiom: "OP4",
                    detail: format!("offset delta = {} must lie in (0, 1/2)", params.delta),
                });
            }
            params
                .gammas
                .iter()
                .flat_map(|&g| {
                    let s = c(0.5 - params.delta, g);
                    let mirror = ONE - s.conj();
                    [EigenvalueSpec::new(s, 1), EigenvalueSpec::new(mirror, 1)]
                })
                .collect()
        }
    };
    let spec = OperatorSpec { blocks, similarity_seed: params.seed, similarity_conditioning: params.conditioning };
    check_distinct(&spec)?;
    Ok(spec)
}

/// Per-axiom report for (OP1)-(OP5). Never fails; violations are carried in the report.
pub fn validate_op_axioms(spec: &OperatorSpec) -> Report {
    let mut report = Report::new("operator axioms");
    report.push(Check::flag("OP1", true, "vacuous: every finite-dimensional operator is closed"));
    report.push(Check::flag("OP2", true, "vacuous: finite spectrum consisting of eigenvalues, no accumulation"));
    let empty = spec.blocks.iter().position(|b| b.jordan_size == 0);
    report.push(match empty {
        None => Check::flag("OP3-a", true, "vacuous: generalized eigenspaces are finite-dimensional"),
        Some(i) => Check::flag("OP3-a", false, format!("block {i} has jordan_size 0")),
    });
    report.push(match duplicate_pair(spec) {
        None => Check::flag("OP3-b", true, "eigenvalues pairwise distinct: one Jordan block each"),
        Some((i, j)) => Check::flag(
            "OP3-b",
            false,
            format!("blocks {i} and {j} share an eigenvalue (two Jordan blocks for one eigenvalue)"),
        ),
    });
    report.push(match check_strip(spec) {
        Ok(()) => Check::flag("OP4", true, "spectrum inside 0 < Re(s) < 1"),
        Err(e) => Check::flag("OP4", false, e.to_string()),
    });
    let left = spec.blocks.iter().any(|b| b.re < 0.5 - CRITICAL_LINE_TOL);
    let right = spec.blocks.iter().any(|b| b.re > 0.5 + CRITICAL_LINE_TOL);
    report.push(Check::flag(
        "OP5",
        left == right,
        match (left, right) {
            (false, false) => "all eigenvalues on the critical line",
            (true, true) => "eigenvalues on both sides of the critical line",
            (true, false) => "some Re(s) < 1/2 but none > 1/2",
            (false, true) => "some Re(s) > 1/2 but none < 1/2",
        },
    ));
    report
}

/// Finite sample of the parameter space `{Y > 0 : sigma_Y != {}} minus {|Im s|}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub admissible_y: Vec<f64>,
    pub excluded: Vec<f64>,
}

/// Sorted distinct `|Im s_i|`.
pub fn excluded_ordinates(spec: &OperatorSpec) -> Vec<f64> {
    let mut ims: Vec<f64> = spec.blocks.iter().map(|b| b.im.abs()).collect();
    ims.sort_by(f64::total_cmp);
    ims.dedup();
    ims
}

/// `Ok(())` iff `y` belongs to the parameter space of `spec`.
pub fn check_admissible(spec: &OperatorSpec, y: f64) -> Result<()> {
    if !y.is_finite() || y <= 0.0 {
        return Err(Error::InvalidWindow(format!("Y = {y} must be a positive real")));
    }
    if spec.blocks.iter().any(|b| b.im.abs() == y) {
        return Err(Error::InvalidWindow(format!(
            "Y = {y} equals |Im(s)| of an eigenvalue; such values are excluded from the parameter space"
        )));
    }
    if !spec.blocks.iter().any(|b| b.im.abs() < y) {
        return Err(Error::InvalidWindow(format!(
            "Y = {y} leaves sigma_Y(A) empty; the parameter space requires at least one eigenvalue with |Im(s)| < Y"
        )));
    }
    Ok(())
}

/// `count` admissible windows: midpoints between consecutive values of `{0} u {|Im s_i|}`
/// that capture at least one eigenvalue, then `max|Im| + 1, max|Im| + 2, ...`.
pub fn parameter_space(spec: &OperatorSpec, count: usize) -> Result<ParameterSpace> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    if spec.blocks.is_empty() {
        return Err(Error::InvalidArgument("spec has no eigenvalues".into()));
    }
    let excluded = excluded_ordinates(spec);
    let mut levels = vec![0.0];
    levels.extend(excluded.iter().copied().filter(|&v| v > 0.0));
    let top = *levels.last().expect("levels nonempty");
    let mut ys: Vec<f64> =
        levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).filter(|&y| check_admissible(spec, y).is_ok()).collect();
    let mut k = 1.0;
    while ys.len() < count {
        ys.push(top + k);
        k += 1.0;
    }
    ys.truncate(count);
    Ok(ParameterSpace { admissible_y: ys, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(blocks: &[(f64, f64, usize)]) -> OperatorSpec {
        OperatorSpec::new(blocks.iter().map(|&(re, im, m)| EigenvalueSpec::new(c(re, im), m)).collect())
    }

    #[test]
    fn single_scalar_block() {
        let a = build_jordan_operator(&spec(&[(0.5, 1.0, 1)])).unwrap();
        assert_eq!(a.matrix, CMatrix::from_element(1, 1, c(0.5, 1.0)));
    }

    #[test]
    fn seed_zero_is_exact_jordan_block() {
        let a = build_jordan_operator(&spec(&[(0.5, 1.0, 2)])).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.5, 1.0), ONE, linalg::ZERO, c(0.5, 1.0)]);
        assert_eq!(a.matrix, expected);
    }

    #[test]
    fn seeded_realization_is_dense_and_conditioned() {
        let a = build_jordan_operator(&spec(&[(0.4, 1.0, 1), (0.6, 1.0, 1)]).with_seed(7)).unwrap();
        assert!(a.matrix.iter().all(|z| z.norm() > 0.0));
        assert!(condition_number(&a.basis_change) <= 1e3);
        let j = a.jordan_form();
        let back = a.basis_change_inverse() * &a.matrix * &a.basis_change;
        assert!(linalg::fro(&(back - j)) < 1e-12);
    }

    #[test]
    fn conditioning_bound_is_enforced() {
        for seed in 1..20 {
            let w = similarity_transform(12, seed, 5.0).unwrap();
            assert!(condition_number(&w) <= 5.0);
        }
        assert!(similarity_transform(3, 1, 0.5).is_err());
    }

    #[test]
    fn build_rejects_duplicates_and_strip_violations() {
        let dup = build_jordan_operator(&spec(&[(0.5, 1.0, 1), (0.5, 1.0, 1)])).unwrap_err();
        assert!(matches!(dup, Error::SpecViolation { axiom: "OP3-b", .. }));
        let out = build_jordan_operator(&spec(&[(1.0, 1.0, 1)])).unwrap_err();
        assert!(matches!(out, Error::SpecViolation { axiom: "OP4", .. }));
        let out = build_jordan_operator(&spec(&[(0.0, 1.0, 1)])).unwrap_err();
        assert!(matches!(out, Error::SpecViolation { axiom: "OP4", .. }));
    }

    #[test]
    fn family_examples() {
        let rh = generate_family(FamilyKind::RhSemisimple, &FamilyParams::new(vec![1.0, 2.0])).unwrap();
        assert_eq!(rh.blocks, vec![EigenvalueSpec::new(c(0.5, 1.0), 1), EigenvalueSpec::new(c(0.5, 2.0), 1)]);

        let non = generate_family(FamilyKind::NonRh, &FamilyParams::new(vec![1.0]).with_delta(0.1)).unwrap();
        assert_eq!(non.blocks.len(), 2);
        assert!((non.blocks[0].s() - c(0.4, 1.0)).norm() < 1e-15);
        assert!((non.blocks[1].s() - c(0.6, 1.0)).norm() < 1e-15);

        let jor = generate_family(FamilyKind::RhJordan, &FamilyParams::new(vec![1.0, 3.0]).with_m(2)).unwrap();
        assert_eq!(jor.blocks, vec![EigenvalueSpec::new(c(0.5, 1.0), 1), EigenvalueSpec::new(c(0.5, 3.0), 2)]);
    }

    #[test]
    fn non_rh_delta_bounds() {
        for delta in [0.0, 0.5, 0.7, -0.1] {
            let e = generate_family(FamilyKind::NonRh, &FamilyParams::new(vec![1.0]).with_delta(delta)).unwrap_err();
            assert!(matches!(e, Error::SpecViolation { axiom: "OP4", .. }));
        }
    }

    #[test]
    fn axiom_report_examples() {
        assert!(validate_op_axioms(&spec(&[(0.5, 1.0, 1)])).passed());
        let lonely = validate_op_axioms(&spec(&[(0.4, 1.0, 1)]));
        assert!(!lonely.check("OP5").unwrap().pass);
        assert!(lonely.check("OP4").unwrap().pass);
        let dup = validate_op_axioms(&spec(&[(0.5, 1.0, 1), (0.5, 1.0, 1)]));
        assert!(!dup.check("OP3-b").unwrap().pass);
    }

    #[test]
    fn parameter_space_examples() {
        let s = spec(&[(0.5, 1.0, 1), (0.5, 3.0, 1)]);
        assert_eq!(parameter_space(&s, 2).unwrap().admissible_y, vec![2.0, 4.0]);
        let s1 = spec(&[(0.5, 1.0, 1)]);
        assert_eq!(parameter_space(&s1, 1).unwrap().admissible_y, vec![2.0]);
        assert!(matches!(check_admissible(&s1, 1.0), Err(Error::InvalidWindow(_))));
        assert!(matches!(check_admissible(&s1, 0.5), Err(Error::InvalidWindow(_))));
        assert!(matches!(parameter_space(&s1, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn spec_json_round_trip_uses_interchange_names() {
        let s = spec(&[(0.5, 1.0, 2)]).with_seed(3);
        let text = s.to_json();
        assert!(text.contains("\"jordan_size\"") && text.contains("\"seed\"") && text.contains("\"conditioning\""));
        assert_eq!(OperatorSpec::from_json(&text).unwrap(), s);
        let minimal = OperatorSpec::from_json(r#"{"blocks":[{"re":0.5,"im":1.0,"jordan_size":1}]}"#).unwrap();
        assert_eq!(minimal.similarity_seed, 0);
        assert_eq!(minimal.similarity_conditioning, DEFAULT_CONDITIONING);
    }
}
