//! Quantities of the localization-dichotomy argument: the split of the
//! reduced-position commutator, mass estimates, series bounds, trace
//! bounds, transport of Wannier bases under perturbations and end-to-end
//! experiments.

mod decomposition;
mod experiment;
mod series;
mod transport;

pub use decomposition::{
    commutator_decomposition, mass_estimates, trace_bound_check, trs_defect, DecompositionReport, MassEstimates,
    TraceBoundReport, AREA_NOISE_FLOOR, MASS_NOISE_FLOOR, PERIMETER_NOISE_FLOOR, TRACE_EXPONENT_LIMIT,
};
pub use experiment::{
    dichotomy_experiment, stability_sweep, CheckMode, Claim, DichotomyConfig, DichotomyReport, SizeEvidence,
    StabilityPoint, StabilityReport, Verdict, STABILITY_TOLERANCE,
};
pub use series::{check_radial_monotonicity, gauss_legendre, integrate_rectangle, maclaurin_cauchy_check, MaclaurinCauchyReport};
pub use transport::{kato_nagy_transport, TransportResult, TransportSummary};
