//! Jacobi polynomials and the normalized eigenfunction profiles.

pub mod envelope;
pub mod jacobi;
pub mod oracle;
pub mod profile;

pub use envelope::{envelope_bound, EnvelopeCalibration, EnvelopeParams};
pub use jacobi::{jacobi_eval, jacobi_eval_with_derivative, JacobiIndex};
pub use oracle::jacobi_oracle;
pub use profile::{
    lower_recurrence_coeff, norm_constant, profile_eval, recurrence_coeff, xtilde_eval,
    ProfileIndex, XtildeLadder,
};
