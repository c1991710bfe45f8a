use serde::{Deserialize, Serialize};

use super::params::{validate_params, InequalityParams, Variant};
use crate::error::{Error, Origin, Result};

const MODULE: &str = "inequalities";

/// Interval `[kappa A, A]` known to contain the biggest constant of a
/// reverse integral Hardy inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantBracket {
    pub a: f64,
    pub kappa: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `kappa = (p'/(p'+q))^{-1/q} (q/(p'+q))^{-1/p'}` for `p', q < 0`.
pub fn kappa(p_conj: f64, q: f64) -> Result<f64> {
    if !(p_conj < 0.0) || !(q < 0.0) {
        return Err(Error::parameter(
            Origin::new(MODULE, "constant_bracket"),
            format!("need p' < 0 and q < 0, got p' = {p_conj}, q = {q}"),
        ));
    }
    let s = p_conj + q;
    Ok((p_conj / s).powf(-1.0 / q) * (q / s).powf(-1.0 / p_conj))
}

pub fn constant_bracket(a: f64, p_conj: f64, q: f64) -> Result<ConstantBracket> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::parameter(
            Origin::new(MODULE, "constant_bracket"),
            format!("A must be positive and finite, got {a}"),
        ));
    }
    let kappa = kappa(p_conj, q)?;
    Ok(ConstantBracket {
        a,
        kappa,
        lower: kappa * a,
        upper: a,
    })
}

/// Which radial region the inner integral of the integral Hardy inequality
/// covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyVariant {
    /// Inner integral over the ball `B(0, |x|)`.
    Ball,
    /// Inner integral over its complement.
    Complement,
}

/// `A` for power weights `W = |x|^a`, `U = |y|^b`:
/// `inf_R (int_{outer} W)^{1/q} (int_{inner} U^{1-p'})^{1/p'}` where the
/// outer region is `|x| >= R` for the ball variant and `|x| <= R` for the
/// complement. The infimum is only positive and finite when the power of `R`
/// vanishes, which is enforced here.
pub fn hardy_weight_constant(
    variant: HardyVariant,
    a: f64,
    b: f64,
    p: f64,
    q: f64,
    q_dim: f64,
    sphere: f64,
) -> Result<f64> {
    let origin = Origin::new(MODULE, "hardy_weight_constant");
    if !(sphere > 0.0) {
        return Err(Error::parameter(origin, format!("|S| must be positive, got {sphere}")));
    }
    let pp = super::params::conjugate_exponent(p)?;
    let outer = q_dim + a;
    let inner = q_dim + b * (1.0 - pp);
    let (outer_ok, inner_ok) = match variant {
        HardyVariant::Ball => (outer < 0.0, inner > 0.0),
        HardyVariant::Complement => (outer > 0.0, inner < 0.0),
    };
    if !outer_ok {
        return Err(Error::parameter(
            origin,
            format!("outer weight integral is infinite: Q + a = {outer} has the wrong sign"),
        ));
    }
    if !inner_ok {
        return Err(Error::parameter(
            origin,
            format!("inner weight integral is infinite: Q + b(1 - p') = {inner} has the wrong sign"),
        ));
    }
    let power = outer / q + inner / pp;
    if power.abs() > 1e-10 * (outer / q).abs().max(1.0) {
        return Err(Error::parameter(
            origin,
            format!("weights are not scale-balanced: the infimum over R has exponent {power}, so A is 0"),
        ));
    }
    Ok((sphere / outer.abs()).powf(1.0 / q) * (sphere / inner.abs()).powf(1.0 / pp))
}

fn conj_pair(params: &InequalityParams) -> Result<(f64, f64)> {
    Ok((params.p_conj()?, params.q()?))
}

/// `A_1 = (|S|/|Q+(alpha+lambda)q|)^{1/q} (|S|/(Q - beta p (1-p')))^{1/p'}`.
pub fn analytic_a1(params: &InequalityParams, sphere: f64) -> Result<f64> {
    let origin = Origin::new(MODULE, "analytic_A1");
    let (pp, q) = conj_pair(params)?;
    let InequalityParams { q_dim, p, alpha, beta, lambda, .. } = *params;
    if !(q_dim + beta * pp > 0.0) || !(beta >= 0.0) {
        return Err(Error::parameter(
            origin,
            format!("A1 needs 0 <= beta < -Q/p' (beta = {beta}, -Q/p' = {})", -q_dim / pp),
        ));
    }
    let outer = q_dim + (alpha + lambda) * q;
    if outer == 0.0 || !(sphere > 0.0) {
        return Err(Error::parameter(origin, "A1 is undefined: Q + (alpha + lambda) q = 0"));
    }
    let inner = q_dim - beta * p * (1.0 - pp);
    Ok((sphere / outer.abs()).powf(1.0 / q) * (sphere / inner).powf(1.0 / pp))
}

/// `A_2 = (|S|/(Q + alpha q))^{1/q} (|S|/|Q+(beta+lambda)p'|)^{1/p'}`.
pub fn analytic_a2(params: &InequalityParams, sphere: f64) -> Result<f64> {
    let origin = Origin::new(MODULE, "analytic_A2");
    let (pp, q) = conj_pair(params)?;
    let InequalityParams { q_dim, alpha, beta, lambda, .. } = *params;
    if !(q_dim + alpha * q > 0.0) || !(alpha >= 0.0) {
        return Err(Error::parameter(
            origin,
            format!("A2 needs 0 <= alpha < -Q/q (alpha = {alpha}, -Q/q = {})", -q_dim / q),
        ));
    }
    let inner = q_dim + (beta + lambda) * pp;
    if inner == 0.0 || !(sphere > 0.0) {
        return Err(Error::parameter(origin, "A2 is undefined: Q + (beta + lambda) p' = 0"));
    }
    Ok((sphere / (q_dim + alpha * q)).powf(1.0 / q) * (sphere / inner.abs()).powf(1.0 / pp))
}

/// Certified lower constant `L` with `B(f, h) >= L ||f||_{q'} ||h||_p`:
/// `2^{-lambda-1} kappa (A_1 + A_2)` for the full variant and
/// `2^{-lambda} kappa A_i` when only one weight condition is available.
pub fn stein_weiss_lower_constant(params: &InequalityParams, sphere: f64) -> Result<f64> {
    validate_params(params).require(Origin::new(MODULE, "stein_weiss_lower_constant"))?;
    let (pp, q) = conj_pair(params)?;
    let k = kappa(pp, q)?;
    let scale = 2f64.powf(-params.lambda);
    Ok(match params.variant {
        Variant::Full => 0.5 * scale * k * (analytic_a1(params, sphere)? + analytic_a2(params, sphere)?),
        Variant::ImprovedA => scale * k * analytic_a2(params, sphere)?,
        Variant::ImprovedB => scale * k * analytic_a1(params, sphere)?,
    })
}
