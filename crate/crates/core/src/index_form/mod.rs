//! Stretch matrices, the localized index form and conjugate-point searches.

mod conjugate;
mod diagnostics;
mod form;
mod stretch;

pub use conjugate::{
    axis_sine_trial, boundary_lobe_trial, curvature_gap_sum, find_conjugate, ConjugateReport,
    ConjugateSearchParams, ConjugateStatus, LogParams, TrialFamily,
};
pub use diagnostics::{
    aligned_permutation, cumulative_integral, fredholm_diagnostics, fredholm_from_stretch,
    laplacian_identity_odd, DiagnosticReport, DIAGNOSTIC_POINTS_PER_UNIT, DiagnosticSeries,
};
pub use form::{completed_square_axis, index_form, simpson, IndexFormResult, VariationField, ENDPOINT_TOL};
pub use stretch::{build_stretch, StretchMatrix};
