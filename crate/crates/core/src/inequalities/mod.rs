//! Parameter admissibility, closed-form constants and numerical verifiers.

mod bilinear;
mod constants;
mod integral_hardy;
mod kind;
mod params;
mod radial;
mod report;

pub use bilinear::{verify_reverse_hls, verify_stein_weiss};
pub use constants::{
    analytic_a1, analytic_a2, constant_bracket, hardy_weight_constant, kappa, stein_weiss_lower_constant,
    ConstantBracket, HardyVariant,
};
pub use integral_hardy::{integral_hardy_weights, verify_reverse_integral_hardy};
pub use kind::{verify, InequalityKind};
pub use params::*;
pub use radial::{
    verify_forward_ckn, verify_forward_hardy, verify_forward_sobolev, verify_reverse_ckn, verify_reverse_hardy,
    verify_reverse_sobolev,
};
pub use report::{Direction, ReportParams, ReportView, VerificationReport};
