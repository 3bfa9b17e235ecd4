//! Fixtures shared by the criterion benches.

use ait_core::{
    build_jordan_operator, build_standard_model, frobenius_via_exponential, generate_family, spectral_window,
    FamilyKind, FamilyParams, OperatorSpec, RealizedOperator, SpectralWindow, StandardModel,
};

/// Jordan family with `count` ordinates spaced by one, block of size `m` at the top.
pub fn jordan_spec(count: usize, m: usize) -> OperatorSpec {
    let gammas = (1..=count).map(|k| k as f64).collect();
    generate_family(FamilyKind::RhJordan, &FamilyParams::new(gammas).with_m(m).with_seed(3)).expect("valid family")
}

pub struct Fixture {
    pub spec: OperatorSpec,
    pub operator: RealizedOperator,
    pub window: SpectralWindow,
    pub model: StandardModel,
}

/// Everything up to the standard model on the outermost window.
pub fn fixture(count: usize, m: usize, q: f64) -> Fixture {
    let spec = jordan_spec(count, m);
    let operator = build_jordan_operator(&spec).expect("spec builds");
    let window = spectral_window(&spec, count as f64 + 0.5, q).expect("window admissible");
    let f = frobenius_via_exponential(&operator, &window).expect("closed form");
    let model = build_standard_model(&f, &window);
    Fixture { spec, operator, window, model }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_dimensions() {
        let f = fixture(4, 3, 2.0);
        assert_eq!(f.spec.dimension(), 4 + 2);
        assert_eq!(f.window.dimension(), 6);
        assert_eq!(f.model.dim_v(), 6 * 6 + 2);
    }
}
