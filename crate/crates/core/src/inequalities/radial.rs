//! Hardy, Sobolev and CKN inequalities for radial profiles, in reverse and
//! forward form. All three norms in each ratio carry the same power of
//! `|S|`, so the ratios are exact radial computations.

use super::report::{Direction, ReportParams, VerificationReport};
use crate::error::{Error, Origin, Result};
use crate::group::QuasiNorm;
use crate::operators::{radial_mass, radial_region, RadialProfile};
use crate::quadrature::{sphere_measure, IntegralResult, QuadratureSpec};

const MODULE: &str = "inequalities";

/// `int |g(r)|^p r^c r^{Q-1} dr` over the profile's region.
fn moment<G: Fn(f64) -> f64>(
    g: G,
    p: f64,
    c: f64,
    q: f64,
    f: &RadialProfile,
    spec: &QuadratureSpec,
    origin: Origin,
) -> Result<f64> {
    let (lo, hi) = radial_region(spec, f.support_end());
    let breaks = f.support_end().into_iter().collect();
    radial_mass(
        |r| {
            let v = g(r).abs();
            if v == 0.0 {
                0.0
            } else {
                v.powf(p) * r.powf(c)
            }
        },
        q,
        lo,
        hi,
        breaks,
        origin,
    )
}

fn require_reverse_exponent(p: f64, origin: Origin) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::parameter(origin, format!("reverse inequalities need p in (0, 1), got {p}")));
    }
    Ok(())
}

fn require_admissible_profile(f: &RadialProfile, origin: Origin) -> Result<()> {
    for r in f.sample_radii(1000) {
        let v = f.value(r);
        if !(v >= 0.0) {
            return Err(Error::precondition(origin, format!("profile must be nonnegative, f({r}) = {v}")));
        }
    }
    f.check_decreasing(1000).map_err(|e| e.with_origin(origin))
}

fn nonzero(v: f64, what: &str, origin: Origin) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::degenerate(origin, format!("{what} is {v}; the ratio is undefined")))
    }
}

/// Report for `||A||_p ? C ||B||_p` where `a_int`, `b_int` are the radial
/// parts of the p-th powers.
#[allow(clippy::too_many_arguments)]
fn norm_ratio_report(
    name: &str,
    direction: Direction,
    params: ReportParams,
    a_int: f64,
    b_int: f64,
    p: f64,
    constant: f64,
    sphere: IntegralResult,
    origin: Origin,
) -> Result<VerificationReport> {
    let b_int = nonzero(b_int, "right-hand side", origin)?;
    let s = sphere.value;
    let rel = sphere.stderr / s / p;
    let lhs = (s * a_int).powf(1.0 / p);
    let rhs = (s * b_int).powf(1.0 / p);
    Ok(VerificationReport {
        inequality: name.to_string(),
        direction,
        params,
        lhs,
        rhs,
        lhs_stderr: lhs * rel,
        rhs_stderr: rhs * rel,
        ratio: (a_int / b_int).powf(1.0 / p),
        ratio_stderr: 0.0,
        analytic_constant: constant,
        constant_stderr: 0.0,
        sphere_measure: s,
        sphere_stderr: sphere.stderr,
        samples_used: sphere.samples_used,
        notes: vec!["|S| cancels in the ratio".to_string()],
    })
}

/// `||f/|x|||_p >= p/(Q-p) ||R f||_p` for decreasing `f >= 0`, `0 < p < 1`.
pub fn verify_reverse_hardy(f: &RadialProfile, p: f64, norm: &QuasiNorm, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_reverse_hardy");
    require_reverse_exponent(p, origin)?;
    require_admissible_profile(f, origin)?;
    let q = norm.q();
    let a = moment(|r| f.value(r), p, -p, q, f, spec, origin)?;
    let b = moment(|r| f.derivative(r), p, 0.0, q, f, spec, origin)?;
    let sphere = sphere_measure(norm, spec)?;
    let params = ReportParams { q_dim: q, p, ..ReportParams::default() };
    norm_ratio_report("reverse_hardy", Direction::Reverse, params, a, b, p, p / (q - p), sphere, origin)
}

/// `||f||_p >= p/Q ||E f||_p` for decreasing `f >= 0`, `0 < p < 1`.
pub fn verify_reverse_sobolev(f: &RadialProfile, p: f64, norm: &QuasiNorm, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_reverse_sobolev");
    require_reverse_exponent(p, origin)?;
    require_admissible_profile(f, origin)?;
    let q = norm.q();
    let a = moment(|r| f.value(r), p, 0.0, q, f, spec, origin)?;
    let b = moment(|r| r * f.derivative(r), p, 0.0, q, f, spec, origin)?;
    let sphere = sphere_measure(norm, spec)?;
    let params = ReportParams { q_dim: q, p, ..ReportParams::default() };
    norm_ratio_report("reverse_sobolev", Direction::Reverse, params, a, b, p, p / q, sphere, origin)
}

/// Shared CKN computation. The ratio is
/// `||f/|x|^{gamma/p}||_p^p / (||R f/|x|^alpha||_p ||f/|x|^{beta/(p-1)}||_p^{p-1})`.
#[allow(clippy::too_many_arguments)]
fn ckn_report(
    name: &str,
    direction: Direction,
    f: &RadialProfile,
    p: f64,
    alpha: f64,
    beta: f64,
    constant: f64,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
    origin: Origin,
) -> Result<VerificationReport> {
    let q = norm.q();
    let gamma = alpha + beta + 1.0;
    let l_int = moment(|r| f.value(r), p, -gamma, q, f, spec, origin)?;
    let x_int = moment(|r| f.derivative(r), p, -alpha * p, q, f, spec, origin)?;
    let y_int = moment(|r| f.value(r), p, -beta * p / (p - 1.0), q, f, spec, origin)?;
    let x_int = nonzero(x_int, "derivative term", origin)?;
    let y_int = nonzero(y_int, "weighted norm term", origin)?;
    let sphere = sphere_measure(norm, spec)?;
    let s = sphere.value;
    let rel = sphere.stderr / s;
    let lhs = s * l_int;
    let rhs = (s * x_int).powf(1.0 / p) * (s * y_int).powf((p - 1.0) / p);
    Ok(VerificationReport {
        inequality: name.to_string(),
        direction,
        params: ReportParams {
            q_dim: q,
            p,
            alpha: Some(alpha),
            beta: Some(beta),
            gamma: Some(gamma),
            ..ReportParams::default()
        },
        lhs,
        rhs,
        lhs_stderr: lhs * rel,
        rhs_stderr: rhs * rel,
        ratio: l_int / (x_int.powf(1.0 / p) * y_int.powf((p - 1.0) / p)),
        ratio_stderr: 0.0,
        analytic_constant: constant,
        constant_stderr: 0.0,
        sphere_measure: s,
        sphere_stderr: sphere.stderr,
        samples_used: sphere.samples_used,
        notes: vec!["|S| cancels in the ratio".to_string()],
    })
}

/// Reverse CKN with `gamma = alpha + beta + 1 < Q`.
pub fn verify_reverse_ckn(
    f: &RadialProfile,
    p: f64,
    alpha: f64,
    beta: f64,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_reverse_ckn");
    require_reverse_exponent(p, origin)?;
    let q = norm.q();
    let gamma = alpha + beta + 1.0;
    if !(gamma < q) {
        return Err(Error::parameter(origin, format!("need gamma = alpha + beta + 1 < Q, got gamma = {gamma}, Q = {q}")));
    }
    require_admissible_profile(f, origin)?;
    ckn_report("reverse_ckn", Direction::Reverse, f, p, alpha, beta, p / (q - gamma), norm, spec, origin)
}

/// `||f/|x|||_p <= p/(Q-p) ||R f||_p` for `1 < p < Q`.
pub fn verify_forward_hardy(f: &RadialProfile, p: f64, norm: &QuasiNorm, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_forward_hardy");
    let q = norm.q();
    if !(p > 1.0 && p < q) {
        return Err(Error::parameter(origin, format!("forward Hardy needs 1 < p < Q, got p = {p}, Q = {q}")));
    }
    let a = moment(|r| f.value(r), p, -p, q, f, spec, origin)?;
    let b = moment(|r| f.derivative(r), p, 0.0, q, f, spec, origin)?;
    let sphere = sphere_measure(norm, spec)?;
    let params = ReportParams { q_dim: q, p, ..ReportParams::default() };
    norm_ratio_report("forward_hardy", Direction::Forward, params, a, b, p, p / (q - p), sphere, origin)
}

/// `||f||_p <= p/Q ||E f||_p` for `1 < p < inf`.
pub fn verify_forward_sobolev(f: &RadialProfile, p: f64, norm: &QuasiNorm, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_forward_sobolev");
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::parameter(origin, format!("forward Sobolev needs 1 < p < inf, got {p}")));
    }
    let q = norm.q();
    let a = moment(|r| f.value(r), p, 0.0, q, f, spec, origin)?;
    let b = moment(|r| r * f.derivative(r), p, 0.0, q, f, spec, origin)?;
    let sphere = sphere_measure(norm, spec)?;
    let params = ReportParams { q_dim: q, p, ..ReportParams::default() };
    norm_ratio_report("forward_sobolev", Direction::Forward, params, a, b, p, p / q, sphere, origin)
}

/// Forward CKN: the ratio is at most `p/|Q - gamma|`, `gamma != Q`.
pub fn verify_forward_ckn(
    f: &RadialProfile,
    p: f64,
    alpha: f64,
    beta: f64,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_forward_ckn");
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::parameter(origin, format!("forward CKN needs 1 < p < inf, got {p}")));
    }
    let q = norm.q();
    let gamma = alpha + beta + 1.0;
    if gamma == q {
        return Err(Error::parameter(origin, "forward CKN needs gamma != Q"));
    }
    ckn_report("forward_ckn", Direction::Forward, f, p, alpha, beta, p / (q - gamma).abs(), norm, spec, origin)
}
