//! Reverse integral Hardy inequalities with power weights:
//!
//! ball:       (int (int_{B(0,|x|)} f)^q W(x) dx)^{1/q} >= C (int f^p U)^{1/p}
//! complement: the same with the inner integral over the complement of the ball.

use std::cell::Cell;

use super::constants::{constant_bracket, hardy_weight_constant, HardyVariant};
use super::params::{conjugate_exponent, InequalityParams};
use super::report::{Direction, ReportParams, VerificationReport};
use crate::error::{Error, Origin, Result};
use crate::group::QuasiNorm;
use crate::operators::{radial_mass, radial_region, RadialProfile, WeightRole, WeightSpec};
use crate::quadrature::{sphere_measure, QuadratureSpec};

const MODULE: &str = "inequalities";

/// The power weights of each half of the bilinear lower bound:
/// `W = |x|^{(alpha+lambda)q}, U = |y|^{-beta p}` for the ball and
/// `W = |x|^{alpha q}, U = |y|^{-(beta+lambda)p}` for the complement.
pub fn integral_hardy_weights(variant: HardyVariant, params: &InequalityParams) -> Result<(WeightSpec, WeightSpec)> {
    let q = params.q()?;
    let p = params.p;
    let (a, b) = match variant {
        HardyVariant::Ball => ((params.alpha + params.lambda) * q, -params.beta * p),
        HardyVariant::Complement => (params.alpha * q, -(params.beta + params.lambda) * p),
    };
    Ok((WeightSpec::new(a, WeightRole::Outer)?, WeightSpec::new(b, WeightRole::Inner)?))
}

/// Verifies the reverse integral Hardy inequality with the certified
/// constant `kappa A`. When the outer integral is infinite the left side is
/// `(+inf)^{1/q} = 0`, which is reported rather than treated as an error.
#[allow(clippy::too_many_arguments)]
pub fn verify_reverse_integral_hardy(
    variant: HardyVariant,
    w: WeightSpec,
    u: WeightSpec,
    f: &RadialProfile,
    p: f64,
    q: f64,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    let origin = Origin::new(MODULE, "verify_reverse_integral_hardy");
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::parameter(origin, format!("need p in (0, 1), got {p}")));
    }
    if !(q < 0.0) || !q.is_finite() {
        return Err(Error::parameter(origin, format!("need q < 0, got {q}")));
    }
    if let Some(end) = f.support_end() {
        return Err(Error::degenerate(
            origin,
            format!("profile vanishes beyond r = {end}; a strictly positive profile is required"),
        ));
    }
    for r in f.sample_radii(1000) {
        // Exact zeros far out are floating point underflow, not support.
        let v = f.value(r);
        if v < 0.0 || !v.is_finite() || (v == 0.0 && r < 1.0) {
            return Err(Error::degenerate(origin, format!("profile must be strictly positive, f({r}) = {v}")));
        }
    }
    let q_dim = norm.q();
    let pp = conjugate_exponent(p)?;
    let sphere = sphere_measure(norm, spec)?;
    let s = sphere.value;
    let a = hardy_weight_constant(variant, w.exponent, u.exponent, p, q, q_dim, s)?;
    let bracket = constant_bracket(a, pp, q)?;

    let (lo, hi) = radial_region(spec, None);
    let rhs_int = radial_mass(|r| f.value(r).powf(p) * u.eval(r), q_dim, lo, hi, Vec::new(), origin).map_err(|e| match e {
        Error::Divergence { origin, message } => Error::Divergence {
            origin,
            message: format!("right-hand integral with U = |y|^{} diverges: {message}", u.exponent),
        },
        e => e,
    })?;
    let rhs_int = if rhs_int > 0.0 && rhs_int.is_finite() {
        rhs_int
    } else {
        return Err(Error::degenerate(origin, format!("right-hand integral is {rhs_int}")));
    };
    let rhs = (s * rhs_int).powf(1.0 / p);

    // Inner integral F(rho) = |S| int f r^{Q-1} over the ball or its complement.
    let vanished: Cell<Option<f64>> = Cell::new(None);
    let inner = |rho: f64| -> f64 {
        let (a, b) = match variant {
            HardyVariant::Ball => (lo, rho),
            HardyVariant::Complement => (rho, hi),
        };
        match radial_mass(|r| f.value(r), q_dim, a, b, Vec::new(), origin) {
            Ok(v) => s * v,
            Err(_) => f64::NAN,
        }
    };
    let outer = radial_mass(
        |rho| {
            let big_f = inner(rho);
            if big_f == 0.0 {
                vanished.set(Some(rho));
                return f64::INFINITY;
            }
            big_f.powf(q) * w.eval(rho)
        },
        q_dim,
        lo,
        hi,
        Vec::new(),
        origin,
    );
    let mut notes = vec![format!("certified constant kappa A with kappa = {}, A = {}", bracket.kappa, bracket.a)];
    let lhs = match outer {
        Ok(v) if v.is_finite() && v > 0.0 => (s * v).powf(1.0 / q),
        Ok(v) => {
            return Err(Error::degenerate(origin, format!("outer integral is {v}")));
        }
        Err(Error::Divergence { message, .. }) => {
            notes.push(format!(
                "outer integral diverges ({message}); left side is (+inf)^(1/q) = 0"
            ));
            0.0
        }
        Err(Error::Evaluation { .. }) if vanished.get().is_some() => {
            notes.push(format!(
                "inner integral underflows at rho = {}, so its power q < 0 overflows; outer integral is +inf and the left side is 0",
                vanished.get().unwrap()
            ));
            0.0
        }
        Err(e) => return Err(e),
    };
    let rel = sphere.stderr / s;
    // lhs ~ S^{1 + 1/q}, rhs ~ S^{1/p}, A ~ S^{1/q + 1/p'}.
    let ratio = lhs / rhs;
    let name = match variant {
        HardyVariant::Ball => "reverse_integral_hardy_ball",
        HardyVariant::Complement => "reverse_integral_hardy_complement",
    };
    Ok(VerificationReport {
        inequality: name.to_string(),
        direction: Direction::Reverse,
        params: ReportParams {
            q_dim,
            p,
            q: Some(q),
            ..ReportParams::default()
        },
        lhs,
        rhs,
        lhs_stderr: lhs * rel * (1.0 + 1.0 / q).abs(),
        rhs_stderr: rhs * rel / p,
        ratio,
        ratio_stderr: ratio * rel * (1.0 + 1.0 / q - 1.0 / p).abs(),
        analytic_constant: bracket.lower,
        constant_stderr: bracket.lower * rel * (1.0 / q + 1.0 / pp).abs(),
        sphere_measure: s,
        sphere_stderr: sphere.stderr,
        samples_used: sphere.samples_used,
        notes,
    })
}
