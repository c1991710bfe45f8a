//! Functionals and integral operators on radial data.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Origin, Result};
use crate::group::{GroupPoint, QuasiNorm};
use crate::quadrature::radial::radial_integral;
use crate::quadrature::rules::{gauss_legendre, mean_and_stderr, pairwise_sum};
use crate::quadrature::{
    sphere_integral, sphere_measure, DirectionRule, IntegralResult, QuadratureSpec, RadialOptions,
    Scheme,
};

const MODULE: &str = "operators";

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function of `r = |x|` on (0, inf).
#[derive(Clone)]
pub struct RadialProfile {
    value: RealFn,
    derivative: Option<RealFn>,
    family_tag: String,
    params: Vec<f64>,
    support_end: Option<f64>,
    decreasing: bool,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("family_tag", &self.family_tag)
            .field("params", &self.params)
            .field("support_end", &self.support_end)
            .field("decreasing", &self.decreasing)
            .finish()
    }
}

impl RadialProfile {
    pub fn new(
        family_tag: impl Into<String>,
        params: Vec<f64>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: None,
            family_tag: family_tag.into(),
            params,
            support_end: None,
            decreasing: false,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Declares that the profile vanishes for `r >= end`.
    pub fn with_support(mut self, end: f64) -> Self {
        self.support_end = Some(end);
        self
    }

    pub fn tagged_decreasing(mut self, decreasing: bool) -> Self {
        self.decreasing = decreasing;
        self
    }

    pub fn zero() -> Self {
        Self::new("zero", Vec::new(), |_| 0.0).with_derivative(|_| 0.0)
    }

    /// Indicator of `[0, radius]`.
    pub fn indicator(radius: f64) -> Self {
        Self::new("indicator", vec![radius], move |r| if r < radius { 1.0 } else { 0.0 })
            .with_derivative(|_| 0.0)
            .with_support(radius)
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(r),
            None => {
                let h = r * 1e-6 + 1e-9;
                if r - h > 0.0 {
                    (self.value(r + h) - self.value(r - h)) / (2.0 * h)
                } else {
                    (self.value(r + h) - self.value(r)) / h
                }
            }
        }
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn family_tag(&self) -> &str {
        &self.family_tag
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn support_end(&self) -> Option<f64> {
        self.support_end
    }

    pub fn is_tagged_decreasing(&self) -> bool {
        self.decreasing
    }

    /// `r -> f(s r)`, the radial profile of `f o D_s`.
    pub fn dilated(&self, s: f64) -> Self {
        let v = Arc::clone(&self.value);
        let mut out = Self {
            value: Arc::new(move |r| v(s * r)),
            derivative: None,
            family_tag: self.family_tag.clone(),
            params: self.params.clone(),
            support_end: self.support_end.map(|e| e / s),
            decreasing: self.decreasing,
        };
        if let Some(d) = &self.derivative {
            let d = Arc::clone(d);
            out.derivative = Some(Arc::new(move |r| s * d(s * r)));
        }
        out
    }

    /// `r -> c f(r)`.
    pub fn scaled(&self, c: f64) -> Self {
        let v = Arc::clone(&self.value);
        let mut out = Self {
            value: Arc::new(move |r| c * v(r)),
            derivative: None,
            family_tag: self.family_tag.clone(),
            params: self.params.clone(),
            support_end: self.support_end,
            decreasing: self.decreasing && c >= 0.0,
        };
        if let Some(d) = &self.derivative {
            let d = Arc::clone(d);
            out.derivative = Some(Arc::new(move |r| c * d(r)));
        }
        out
    }

    /// Log-spaced radii covering the region where the profile lives.
    pub fn sample_radii(&self, count: usize) -> Vec<f64> {
        let hi = self.support_end.unwrap_or(1e3);
        let lo = hi * 1e-6;
        let count = count.max(2);
        (0..count)
            .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
            .map(|r| r.min(hi * (1.0 - 1e-9)))
            .collect()
    }

    /// Checks `f' <= 0` on a log grid.
    pub fn check_decreasing(&self, count: usize) -> Result<()> {
        let origin = Origin::new(MODULE, "check_decreasing");
        for r in self.sample_radii(count) {
            let d = self.derivative(r);
            let scale = self.value(r).abs().max(1e-300) / r;
            if !d.is_finite() {
                return Err(Error::evaluation(origin, format!("derivative is {d} at r = {r}")));
            }
            if d > 1e-9 * scale {
                return Err(Error::precondition(
                    origin,
                    format!(
                        "profile '{}' is not radially decreasing: derivative {d:e} > 0 at r = {r}",
                        self.family_tag
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Radial derivative `R f = df/d|x|`.
pub fn radial_derivative(profile: &RadialProfile) -> Result<RadialProfile> {
    check_finite_derivative(profile, "radial_derivative")?;
    let p = profile.clone();
    let mut out = RadialProfile::new(
        format!("d({})", profile.family_tag),
        profile.params.clone(),
        move |r| p.derivative(r),
    );
    out.support_end = profile.support_end;
    Ok(out)
}

/// Euler operator `E f = |x| df/d|x|`.
pub fn euler_apply(profile: &RadialProfile) -> Result<RadialProfile> {
    check_finite_derivative(profile, "euler_apply")?;
    let p = profile.clone();
    let mut out = RadialProfile::new(
        format!("E({})", profile.family_tag),
        profile.params.clone(),
        move |r| r * p.derivative(r),
    );
    out.support_end = profile.support_end;
    Ok(out)
}

fn check_finite_derivative(profile: &RadialProfile, op: &'static str) -> Result<()> {
    for r in profile.sample_radii(200) {
        let d = profile.derivative(r);
        if !d.is_finite() {
            return Err(Error::evaluation(
                Origin::new(MODULE, op),
                format!("derivative is {d} at r = {r}"),
            ));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRole {
    /// Weight on the outer variable `x`.
    Outer,
    /// Weight on the inner variable `y`.
    Inner,
}

/// Power weight `|x|^a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub exponent: f64,
    pub role: WeightRole,
}

impl WeightSpec {
    pub fn new(exponent: f64, role: WeightRole) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::parameter(
                Origin::new(MODULE, "WeightSpec"),
                format!("weight exponent must be finite, got {exponent}"),
            ));
        }
        Ok(Self { exponent, role })
    }

    pub fn eval(&self, r: f64) -> f64 {
        r.powf(self.exponent)
    }
}

/// Radial range of an integral: `[inner_cutoff, min(r_max, support)]`.
pub(crate) fn radial_region(spec: &QuadratureSpec, support: Option<f64>) -> (f64, f64) {
    let hi = spec.r_max.unwrap_or(f64::INFINITY);
    let hi = support.map_or(hi, |s| s.min(hi));
    (spec.inner_cutoff, hi)
}

/// `int g(r) r^{Q-1} dr` over `[lo, hi]`, with kinks at `breakpoints`.
pub(crate) fn radial_mass<G: Fn(f64) -> f64>(
    g: G,
    q: f64,
    lo: f64,
    hi: f64,
    breakpoints: Vec<f64>,
    origin: Origin,
) -> Result<f64> {
    radial_mass_tol(g, q, lo, hi, breakpoints, RadialOptions::default().rel_tol, origin)
}

fn radial_mass_tol<G: Fn(f64) -> f64>(
    g: G,
    q: f64,
    lo: f64,
    hi: f64,
    breakpoints: Vec<f64>,
    rel_tol: f64,
    origin: Origin,
) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let opts = RadialOptions {
        rel_tol,
        breakpoints,
        ..RadialOptions::default()
    };
    radial_integral(
        |r| {
            let v = g(r);
            if v == 0.0 {
                0.0
            } else {
                v * r.powf(q - 1.0)
            }
        },
        lo,
        hi,
        &opts,
    )
    .map(|r| r.value)
    .map_err(|e| e.with_origin(origin))
}

/// `int f(r)^p r^{Q-1} dr`, enforcing the convention that zeros are not
/// admissible for negative exponents.
pub(crate) fn power_mass(profile: &RadialProfile, p: f64, q: f64, spec: &QuadratureSpec, origin: Origin) -> Result<f64> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::parameter(origin, format!("exponent must be finite and nonzero, got {p}")));
    }
    let support = if p > 0.0 { profile.support_end } else { None };
    let (lo, hi) = radial_region(spec, support);
    let zero_at: Cell<Option<f64>> = Cell::new(None);
    let breaks = profile.support_end.into_iter().collect();
    let res = radial_mass(
        |r| {
            let v = profile.value(r);
            if v < 0.0 {
                return f64::NAN;
            }
            if v == 0.0 {
                if p < 0.0 && zero_at.get().is_none() {
                    zero_at.set(Some(r));
                }
                return if p < 0.0 { 1.0 } else { 0.0 };
            }
            v.powf(p)
        },
        q,
        lo,
        hi,
        breaks,
        origin,
    );
    if let Some(r) = zero_at.get() {
        return Err(Error::degenerate(
            origin,
            format!(
                "profile vanishes at r = {r} but exponent {p} < 0; under the convention 0^q = +inf for q < 0 the functional is not finite"
            ),
        ));
    }
    match res {
        Err(Error::Evaluation { message, .. }) if message.contains("NaN") => Err(Error::degenerate(
            origin,
            "profile takes negative values; L^p functionals need f >= 0",
        )),
        other => other,
    }
}

/// `(|S| int f(r)^p r^{Q-1} dr)^{1/p}` with the error of `|S|` propagated.
pub fn lp_functional(profile: &RadialProfile, p: f64, norm: &QuasiNorm, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let origin = Origin::new(MODULE, "lp_functional");
    let mass = power_mass(profile, p, norm.q(), spec, origin)?;
    let s = sphere_measure(norm, spec)?;
    let value = (s.value * mass).powf(1.0 / p);
    Ok(IntegralResult {
        value,
        stderr: value * (s.stderr / s.value) / p.abs(),
        samples_used: s.samples_used,
    })
}

/// `I_lambda u(x) = int |y^{-1} x|^lambda u(|y|) dy`.
pub fn riesz_potential(
    norm: &QuasiNorm,
    u: &RadialProfile,
    lambda: f64,
    x: &GroupPoint,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let origin = Origin::new(MODULE, "riesz_potential");
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::parameter(origin, format!("lambda must be positive, got {lambda}")));
    }
    let x = norm.eval(x).map(|_| x.coords().to_vec())?;
    let q = norm.q();
    let x_norm = norm.eval_slice(&x);
    let (lo, hi) = radial_region(spec, u.support_end);
    let mut breaks: Vec<f64> = u.support_end.into_iter().collect();
    if x_norm > 0.0 {
        breaks.push(x_norm);
    }
    sphere_integral(norm.dim(), spec, |eta: &[f64]| {
        let eta_norm = norm.eval_slice(eta);
        let mut y = vec![0.0; eta.len()];
        let mut scratch = vec![0.0; eta.len()];
        let y = std::cell::RefCell::new((&mut y, &mut scratch));
        let radial = radial_mass(
            |r| {
                let v = u.value(r);
                if v == 0.0 {
                    return 0.0;
                }
                let mut guard = y.borrow_mut();
                let (y, scratch) = &mut *guard;
                norm.group().dilate_into(r / eta_norm, eta, y);
                v * norm.distance_slice(y, &x, scratch).powf(lambda)
            },
            q,
            lo,
            hi,
            breaks.clone(),
            origin,
        )?;
        Ok(norm.sphere_density(eta) * radial)
    })
}

/// Number of Gauss-Legendre nodes per dyadic panel of the ratio variable.
const T_NODES: usize = 8;
/// Tolerance of the inner radial integrals `G(t)`.
const G_REL_TOL: f64 = 1e-10;
const T_MAX_PANELS: i32 = 400;

struct TRule {
    /// Ratio nodes `t = |y| / |x|`.
    t: Vec<f64>,
    /// Quadrature weight times `t^{beta+Q-1} G(t)`.
    c: Vec<f64>,
}

/// Builds the one-dimensional rule in `t` for the reduced bilinear form.
/// Panels `[2^k, 2^{k+1}]` are added outward from `t = 1` until the bound
/// `(1+t)^lambda t^{beta+Q-1} G(t)` has negligible remaining mass.
fn ratio_rule(f: &RadialProfile, h: &RadialProfile, alpha: f64, beta: f64, lambda: f64, q: f64) -> Result<TRule> {
    let origin = Origin::new(MODULE, "stein_weiss_form");
    let (gx, gw) = gauss_legendre(T_NODES);
    let q_eff = alpha + beta + lambda + 2.0 * q;
    let breaks: Vec<f64> = f.support_end.into_iter().collect();
    let g_of = |t: f64| -> Result<f64> {
        let mut b = breaks.clone();
        if let Some(e) = h.support_end {
            b.push(e / t);
        }
        radial_mass_tol(
            |r| f.value(r) * h.value(t * r),
            q_eff,
            0.0,
            f.support_end.unwrap_or(f64::INFINITY),
            b,
            G_REL_TOL,
            origin,
        )
    };
    let panel = |k: i32| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let (a, b) = ((k as f64) * std::f64::consts::LN_2, ((k + 1) as f64) * std::f64::consts::LN_2);
        let nodes: Vec<(f64, f64)> = gx
            .iter()
            .zip(&gw)
            .map(|(x, w)| {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
                (s.exp(), 0.5 * (b - a) * w)
            })
            .collect();
        let vals: Vec<Result<(f64, f64)>> = nodes
            .par_iter()
            .map(|&(t, w)| {
                let g = g_of(t)?;
                let c = w * t * t.powf(beta + q - 1.0) * g;
                Ok((c, c * (1.0 + t).powf(lambda)))
            })
            .collect();
        let mut ts = Vec::with_capacity(T_NODES);
        let mut cs = Vec::with_capacity(T_NODES);
        let mut bound = 0.0;
        for ((t, _), v) in nodes.iter().zip(vals) {
            let (c, b) = v?;
            ts.push(*t);
            cs.push(c);
            bound += b;
        }
        Ok((ts, cs, bound))
    };
    let mut t = Vec::new();
    let mut c = Vec::new();
    let mut total = 0.0;
    for dir in [-1i32, 1] {
        let mut k: i32 = if dir < 0 { -1 } else { 0 };
        let mut quiet = 0;
        let mut prev = f64::INFINITY;
        loop {
            if k.abs() > T_MAX_PANELS {
                return Err(Error::divergence(
                    origin,
                    format!(
                        "bilinear form does not converge: ratio integrand still significant at t = 2^{k}"
                    ),
                ));
            }
            let (ts, cs, bound) = panel(k)?;
            if !bound.is_finite() {
                return Err(Error::divergence(origin, format!("bilinear form overflows near t = 2^{k}")));
            }
            total += bound;
            t.extend(ts);
            c.extend(cs);
            if total == 0.0 && k.abs() >= 64 {
                break;
            }
            if total > 0.0 && bound <= 1e-14 * total && bound <= prev {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
            prev = bound;
            k += dir;
        }
    }
    Ok(TRule { t, c })
}

/// `B(f, h) = int int |x|^alpha |y^{-1} x|^lambda f(|x|) h(|y|) |y|^beta dx dy`.
///
/// Homogeneity reduces the form to an integral over pairs of directions and
/// the ratio `t = |y|/|x|`; the radial part is deterministic and only the
/// direction pairs are sampled.
#[allow(clippy::too_many_arguments)]
pub fn stein_weiss_form(
    f: &RadialProfile,
    h: &RadialProfile,
    alpha: f64,
    beta: f64,
    lambda: f64,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let origin = Origin::new(MODULE, "stein_weiss_form");
    spec.validate()?;
    for (name, v) in [("alpha", alpha), ("beta", beta), ("lambda", lambda)] {
        if !v.is_finite() {
            return Err(Error::parameter(origin, format!("{name} must be finite, got {v}")));
        }
    }
    let q = norm.q();
    if !(alpha + q > 0.0) || !(beta + q > 0.0) || !(alpha + beta + lambda + 2.0 * q > 0.0) {
        return Err(Error::parameter(
            origin,
            "weights make the form diverge at the origin (need alpha + Q > 0, beta + Q > 0)",
        ));
    }
    let rule = ratio_rule(f, h, alpha, beta, lambda, q)?;
    let dim = norm.dim();
    let pair_value = |w: &[f64], v: &[f64]| -> f64 {
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        let mut bt = vec![0.0; dim];
        let mut scratch = vec![0.0; dim];
        let wn = norm.eval_slice(w);
        let vn = norm.eval_slice(v);
        norm.group().dilate_into(1.0 / wn, w, &mut a);
        norm.group().dilate_into(1.0 / vn, v, &mut b);
        let mut s = 0.0;
        for (t, c) in rule.t.iter().zip(&rule.c) {
            if *c == 0.0 {
                continue;
            }
            norm.group().dilate_into(*t, &b, &mut bt);
            s += c * norm.distance_slice(&bt, &a, &mut scratch).powf(lambda);
        }
        norm.sphere_density(w) * norm.sphere_density(v) * s
    };
    let result = if dim == 1 {
        let line = DirectionRule::exact_line();
        let mut vals = Vec::with_capacity(4);
        for i in 0..2 {
            for j in 0..2 {
                vals.push(pair_value(line.point(i), line.point(j)));
            }
        }
        IntegralResult {
            value: pairwise_sum(&vals),
            stderr: 0.0,
            samples_used: 4,
        }
    } else {
        match spec.scheme {
            Scheme::MonteCarlo => {
                let n = spec.samples;
                let xs = DirectionRule::random(dim, n, spec.seed, 0);
                let ys = DirectionRule::random(dim, n, spec.seed, 1 << 32);
                let area2 = (xs.weights[0] * n as f64).powi(2);
                let terms: Vec<f64> = (0..n)
                    .into_par_iter()
                    .map(|i| area2 * pair_value(xs.point(i), ys.point(i)))
                    .collect();
                let (value, stderr) = mean_and_stderr(&terms);
                IntegralResult {
                    value,
                    stderr,
                    samples_used: n,
                }
            }
            Scheme::TensorGrid => {
                let product = |r: &DirectionRule| -> f64 {
                    let rows: Vec<f64> = (0..r.len())
                        .into_par_iter()
                        .map(|i| {
                            let row: Vec<f64> = (0..r.len())
                                .map(|j| r.weights[i] * r.weights[j] * pair_value(r.point(i), r.point(j)))
                                .collect();
                            pairwise_sum(&row)
                        })
                        .collect();
                    pairwise_sum(&rows)
                };
                let n = spec.nodes_per_axis;
                let fine = DirectionRule::grid(dim, n);
                let coarse = DirectionRule::grid(dim, (n / 2).max(1));
                let value = product(&fine);
                IntegralResult {
                    value,
                    stderr: (value - product(&coarse)).abs(),
                    samples_used: fine.len().pow(2) + coarse.len().pow(2),
                }
            }
        }
    };
    if !result.value.is_finite() {
        return Err(Error::divergence(origin, "bilinear form overflowed"));
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

fn holder_exponents(p: f64, origin: Origin) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::parameter(origin, format!("reverse Holder needs p in (0, 1), got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// Discrete form: `sum m f g - (sum m f^p)^{1/p} (sum m g^{p'})^{1/p'}`
/// with positive masses `m`.
pub fn reverse_holder_gap_discrete(f: &[f64], g: &[f64], mass: &[f64], p: f64) -> Result<HolderGap> {
    let origin = Origin::new(MODULE, "reverse_holder_gap");
    let pp = holder_exponents(p, origin)?;
    if f.len() != g.len() || f.len() != mass.len() {
        return Err(Error::Shape {
            origin,
            expected: f.len(),
            actual: if g.len() != f.len() { g.len() } else { mass.len() },
        });
    }
    if let Some(i) = g.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::degenerate(origin, format!("g must be strictly positive, g[{i}] = {}", g[i])));
    }
    if let Some(i) = f.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::degenerate(origin, format!("f must be nonnegative, f[{i}] = {}", f[i])));
    }
    let fg: Vec<f64> = f.iter().zip(g).zip(mass).map(|((a, b), m)| m * a * b).collect();
    let fp: Vec<f64> = f.iter().zip(mass).map(|(a, m)| m * a.powf(p)).collect();
    let gp: Vec<f64> = g.iter().zip(mass).map(|(b, m)| m * b.powf(pp)).collect();
    let lhs = pairwise_sum(&fg);
    let rhs = pairwise_sum(&fp).powf(1.0 / p) * pairwise_sum(&gp).powf(1.0 / pp);
    Ok(HolderGap { lhs, rhs, gap: lhs - rhs })
}

/// Profile form over the group. The `|S|` factors of the three integrals
/// combine to a single factor, so the gap is `|S|` times the radial gap.
pub fn reverse_holder_gap(
    f: &RadialProfile,
    g: &RadialProfile,
    p: f64,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<HolderGap> {
    let origin = Origin::new(MODULE, "reverse_holder_gap");
    let pp = holder_exponents(p, origin)?;
    let q = norm.q();
    let (lo, hi) = radial_region(spec, None);
    let breaks: Vec<f64> = f.support_end.into_iter().chain(g.support_end).collect();
    let fg = radial_mass(|r| f.value(r) * g.value(r), q, lo, hi, breaks, origin)?;
    let fp = power_mass(f, p, q, spec, origin)?;
    let gp = power_mass(g, pp, q, spec, origin)?;
    let s = sphere_measure(norm, spec)?.value;
    let lhs = s * fg;
    let rhs = s * fp.powf(1.0 / p) * gp.powf(1.0 / pp);
    Ok(HolderGap { lhs, rhs, gap: lhs - rhs })
}
