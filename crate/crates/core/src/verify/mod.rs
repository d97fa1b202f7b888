//! Numerical verification of the inequalities and limit statements about
//! `m_p`, `ρ_p` and `B_p`, with machine-readable reports.

mod diagnostics;
mod inequalities;
pub mod quad1d;
mod report;
mod suites;

pub use diagnostics::{
    boundary_diagnostics, check_disk_mass, check_disk_minimizer, check_holder, check_invariance, check_metric_axioms,
    check_p2_oracle, check_product_metric, check_product_subadditivity, check_reproducing, holder_exponent,
    p_continuity_sweep, BoundaryDiagnostics, BoundarySetup, Mobius, SweepResult, SweepRow, HOLDER_SCALES,
};
pub use inequalities::{
    appendix_constants, check_application_inequality, check_main_inequality, check_taylor_inequalities,
    taylor_remainder, AppendixConstants, INEQUALITY_TOLERANCE, TAYLOR_TOLERANCE,
};
pub use report::{Params, Summary, SummaryRow, VerificationReport, Verdict};
pub use suites::{sample_disk, Suite, SuiteSettings, Verifier};
