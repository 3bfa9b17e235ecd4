//! Finite-dimensional operators with prescribed spectrum in the critical strip, their
//! Frobenius analogue on spectral windows, the associated standard intersection model, and a
//! growth-based classifier for the critical-line and semi-simplicity properties.

pub mod classifier;
pub mod error;
pub mod frobenius;
pub mod linalg;
pub mod operator_lab;
pub mod pipeline;
pub mod quadrature;
pub mod report;
pub mod resolvent;
pub mod standard_model;

pub use classifier::{
    classify, dominant_term_witnesses, fit_growth, growth_sequence, trace_power_sums, GrowthClassification, GrowthFit,
    GrowthSequence, Thresholds, Verdict, WitnessSummary,
};
pub use error::{Error, Result};
pub use frobenius::{
    check_frob_axioms, frobenius_adaptive, frobenius_via_contour, frobenius_via_exponential, jordan_exponential_block,
    power_apply, spectral_window, FrobeniusOperator, PowerResult, SpectralWindow,
};
pub use linalg::{CMatrix, CVector, Cx, MatrixJson};
pub use operator_lab::{
    build_jordan_operator, generate_family, parameter_space, validate_op_axioms, EigenvalueSpec, FamilyKind,
    FamilyParams, OperatorSpec, ParameterSpace, RealizedOperator,
};
pub use pipeline::{end_to_end_report, EndToEndConfig, EndToEndReport, WindowReport, YSelection};
pub use report::{Check, Report, Sequence, SequencePoint};
pub use resolvent::{
    adaptive_contour, functional_calculus, jordan_resolvent_closed_form, resolvent, riesz_index, riesz_projection,
    Contour, QuadratureResult, QuadratureSettings,
};
pub use standard_model::{build_standard_model, ScaledVector, StandardModel};
