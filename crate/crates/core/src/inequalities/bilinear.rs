//! Reverse Stein-Weiss and Hardy-Littlewood-Sobolev inequalities.

use super::constants::stein_weiss_lower_constant;
use super::params::{validate_params, InequalityParams, Variant};
use super::report::{Direction, ReportParams, VerificationReport};
use crate::error::{Error, Origin, Result};
use crate::group::QuasiNorm;
use crate::operators::{power_mass, stein_weiss_form, RadialProfile};
use crate::quadrature::{sphere_measure, QuadratureSpec};

const MODULE: &str = "inequalities";

fn require_nonnegative(f: &RadialProfile, name: &str, origin: Origin) -> Result<()> {
    for r in f.sample_radii(200) {
        let v = f.value(r);
        if !(v >= 0.0) {
            return Err(Error::precondition(origin, format!("{name} must be nonnegative, {name}({r}) = {v}")));
        }
    }
    Ok(())
}

fn bilinear_report(
    name: &str,
    f: &RadialProfile,
    h: &RadialProfile,
    params: &InequalityParams,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
    origin: Origin,
) -> Result<VerificationReport> {
    let mut params = *params;
    params.q_dim = norm.q();
    let admissibility = validate_params(&params);
    admissibility.require(origin)?;
    require_nonnegative(f, "f", origin)?;
    require_nonnegative(h, "h", origin)?;
    let p = params.p;
    let qp = params.q_prime;
    let q = params.q()?;
    let pp = params.p_conj()?;
    let sphere = sphere_measure(norm, spec)?;
    let s = sphere.value;
    let f_int = power_mass(f, qp, params.q_dim, spec, origin)?;
    let h_int = power_mass(h, p, params.q_dim, spec, origin)?;
    if !(f_int > 0.0) || !(h_int > 0.0) {
        return Err(Error::degenerate(
            origin,
            "right-hand side is zero (a trial function vanishes); the ratio is undefined",
        ));
    }
    let b = stein_weiss_form(f, h, params.alpha, params.beta, params.lambda, norm, spec)?;
    let rhs = (s * f_int).powf(1.0 / qp) * (s * h_int).powf(1.0 / p);
    let rel_s = sphere.stderr / s;
    let rhs_rel = rel_s * (1.0 / qp + 1.0 / p);
    let ratio = b.value / rhs;
    let constant = stein_weiss_lower_constant(&params, s)?;
    let mut notes = Vec::new();
    if params.variant != Variant::Full {
        for c in admissibility.conditions.iter().filter(|c| !c.required) {
            notes.push(format!("{}: {}", c.name, c.detail));
        }
    }
    Ok(VerificationReport {
        inequality: name.to_string(),
        direction: Direction::Reverse,
        params: ReportParams {
            q_dim: params.q_dim,
            p,
            q_prime: Some(qp),
            q: Some(q),
            alpha: Some(params.alpha),
            beta: Some(params.beta),
            lambda: Some(params.lambda),
            gamma: None,
        },
        lhs: b.value,
        rhs,
        lhs_stderr: b.stderr,
        rhs_stderr: rhs * rhs_rel,
        ratio,
        ratio_stderr: ratio.abs() * (b.stderr / b.value.abs()).hypot(rhs_rel),
        analytic_constant: constant,
        constant_stderr: constant * rel_s * (1.0 / q + 1.0 / pp).abs(),
        sphere_measure: s,
        sphere_stderr: sphere.stderr,
        samples_used: b.samples_used,
        notes,
    })
}

/// `B(f, h) >= L ||f||_{q'} ||h||_p` with the certified lower constant `L`.
pub fn verify_stein_weiss(
    f: &RadialProfile,
    h: &RadialProfile,
    params: &InequalityParams,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    bilinear_report("reverse_stein_weiss", f, h, params, norm, spec, Origin::new(MODULE, "verify_stein_weiss"))
}

/// The unweighted case `alpha = beta = 0`.
pub fn verify_reverse_hls(
    f: &RadialProfile,
    h: &RadialProfile,
    params: &InequalityParams,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_reverse_hls");
    if params.alpha != 0.0 || params.beta != 0.0 {
        return Err(Error::parameter(
            origin,
            format!("HLS needs alpha = beta = 0, got alpha = {}, beta = {}", params.alpha, params.beta),
        ));
    }
    bilinear_report("reverse_hls", f, h, params, norm, spec, origin)
}
