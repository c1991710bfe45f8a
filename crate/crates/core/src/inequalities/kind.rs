//! Name-addressable dispatch over every verifier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bilinear::{verify_reverse_hls, verify_stein_weiss};
use super::constants::HardyVariant;
use super::integral_hardy::{integral_hardy_weights, verify_reverse_integral_hardy};
use super::params::InequalityParams;
use super::radial::{
    verify_forward_ckn, verify_forward_hardy, verify_forward_sobolev, verify_reverse_ckn, verify_reverse_hardy,
    verify_reverse_sobolev,
};
use super::report::{Direction, VerificationReport};
use crate::error::{Error, Origin, Result};
use crate::group::QuasiNorm;
use crate::operators::RadialProfile;
use crate::quadrature::QuadratureSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    ReverseHardy,
    ReverseSobolev,
    ReverseCkn,
    ReverseSteinWeiss,
    ReverseHls,
    ReverseIntegralHardyBall,
    ReverseIntegralHardyComplement,
    ForwardHardy,
    ForwardSobolev,
    ForwardCkn,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 10] = [
        Self::ReverseHardy,
        Self::ReverseSobolev,
        Self::ReverseCkn,
        Self::ReverseSteinWeiss,
        Self::ReverseHls,
        Self::ReverseIntegralHardyBall,
        Self::ReverseIntegralHardyComplement,
        Self::ForwardHardy,
        Self::ForwardSobolev,
        Self::ForwardCkn,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ReverseHardy => "reverse_hardy",
            Self::ReverseSobolev => "reverse_sobolev",
            Self::ReverseCkn => "reverse_ckn",
            Self::ReverseSteinWeiss => "reverse_stein_weiss",
            Self::ReverseHls => "reverse_hls",
            Self::ReverseIntegralHardyBall => "reverse_integral_hardy_ball",
            Self::ReverseIntegralHardyComplement => "reverse_integral_hardy_complement",
            Self::ForwardHardy => "forward_hardy",
            Self::ForwardSobolev => "forward_sobolev",
            Self::ForwardCkn => "forward_ckn",
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Self::ForwardHardy | Self::ForwardSobolev | Self::ForwardCkn => Direction::Forward,
            _ => Direction::Reverse,
        }
    }

    /// Number of trial profiles the inequality takes.
    pub fn arity(&self) -> usize {
        match self {
            Self::ReverseSteinWeiss | Self::ReverseHls => 2,
            _ => 1,
        }
    }

    /// Whether the bilinear admissibility conditions apply to the parameters.
    pub fn uses_bilinear_params(&self) -> bool {
        matches!(
            self,
            Self::ReverseSteinWeiss
                | Self::ReverseHls
                | Self::ReverseIntegralHardyBall
                | Self::ReverseIntegralHardyComplement
        )
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.as_str()).collect();
            Error::parameter(
                Origin::new("inequalities", "InequalityKind::from_str"),
                format!("unknown inequality `{s}`, expected one of {}", names.join(", ")),
            )
        })
    }
}

/// Runs the verifier for `kind`. Single-profile inequalities read `p`, and
/// the CKN ones also `alpha` and `beta`, from `params`; `h` is required
/// exactly for the bilinear forms.
pub fn verify(
    kind: InequalityKind,
    f: &RadialProfile,
    h: Option<&RadialProfile>,
    params: &InequalityParams,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    let origin = Origin::new("inequalities", "verify");
    if kind.arity() == 1 && h.is_some() {
        return Err(Error::parameter(origin, format!("{kind} takes one profile")));
    }
    let second = || h.ok_or_else(|| Error::parameter(origin, format!("{kind} needs a second profile h")));
    let p = params.p;
    match kind {
        InequalityKind::ReverseHardy => verify_reverse_hardy(f, p, norm, spec),
        InequalityKind::ReverseSobolev => verify_reverse_sobolev(f, p, norm, spec),
        InequalityKind::ReverseCkn => verify_reverse_ckn(f, p, params.alpha, params.beta, norm, spec),
        InequalityKind::ReverseSteinWeiss => verify_stein_weiss(f, second()?, params, norm, spec),
        InequalityKind::ReverseHls => verify_reverse_hls(f, second()?, params, norm, spec),
        InequalityKind::ReverseIntegralHardyBall | InequalityKind::ReverseIntegralHardyComplement => {
            let variant = if kind == InequalityKind::ReverseIntegralHardyBall {
                HardyVariant::Ball
            } else {
                HardyVariant::Complement
            };
            let (w, u) = integral_hardy_weights(variant, params)?;
            verify_reverse_integral_hardy(variant, w, u, f, p, params.q()?, norm, spec)
        }
        InequalityKind::ForwardHardy => verify_forward_hardy(f, p, norm, spec),
        InequalityKind::ForwardSobolev => verify_forward_sobolev(f, p, norm, spec),
        InequalityKind::ForwardCkn => verify_forward_ckn(f, p, params.alpha, params.beta, norm, spec),
    }
}
