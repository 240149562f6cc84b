//! Generalized Wannier bases built from reduced position operators, their
//! localization moments and the auxiliary operators of the localization
//! argument (`Gamma_i` and the off-diagonal profile).

mod analysis;
mod construct;
mod localization;

pub use analysis::{
    fit_localization, gamma_commutator_defect, gamma_operator, linf_bound_check, off_diagonal_profile,
    EnvelopeFit, GammaOperator, LinfReport, LocalizationReport, MomentSweep, OffDiagonalProfile, COMPLETENESS_TOL,
};
pub use construct::{
    construct_gwb, construct_gwb_1d, construct_gwb_2d, default_cluster_tol, localization_moment, GwbSet, GwbSummary,
    WannierFunction,
};
pub use localization::{LocalizationFunction, LocalizationKind};
