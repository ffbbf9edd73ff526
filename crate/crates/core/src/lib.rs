//! Semiclassical phase-integral quantization.
//!
//! Bound-state spectra follow from `∫√(P² − U) dx = πħ(n + ½)` (two turning
//! points) or its multi-cut generalization with a Maslov index. The crate also
//! builds the piecewise "classical" wavefunction obtained from the turning-point
//! connection formulas, evaluates the relativistic Cornell spectrum in closed
//! form and by quadrature, and carries an independent Numerov shooting solver
//! used to check all of the above.

pub mod action;
pub mod cornell;
pub mod error;
pub mod expr;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod quantizer;
pub mod wavefunction;

pub use action::{action, phase_integral, turning_points, PhaseIntegral, TurningPointSet};
pub use error::{Error, ErrorKind, Result};
pub use expr::{parse, ExprAst};
pub use model::{Domain, Potential, PotentialKind, QuantProblem, SpectrumEntry, Tolerances};
pub use quantizer::{quantize_2tp, quantize_mtp, spectrum, QuantizationTarget, SpectrumError};
pub use cornell::{
    contour_identity, contour_identity_residual, cornell_p_squared, cornell_quantize_numeric,
    cornell_spectrum_closed_form, identity_sweep, regge_table, CornellLevel, CornellParams,
};
pub use oracle::{compare_report, numerov_solve, oracle_spectrum, CompareReport, GridSpec, OracleLevel};
pub use wavefunction::{build_classical_wf, connect, standing_wave, PiecewiseWavefunction, StandingWave};
