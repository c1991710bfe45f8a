//! Integration of functions of a group point, and the quasi-sphere measure.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::directions::{
    combine, evaluate_rule, random_direction, unit_sphere_area, DirectionRule, CHUNK,
};
use super::radial::{integrate_radial_with, radial_integral, RadialOptions};
use super::rules::{gauss_kronrod21, mean_and_stderr, pairwise_sum};
use super::{IntegralResult, QuadratureSpec, Scheme};
use crate::error::{Error, Origin, Result};
use crate::group::QuasiNorm;

const MODULE: &str = "quadrature";
/// Envelope mass allowed beyond the automatic truncation radius.
const TAIL_FRACTION: f64 = 1e-12;
const CELLS: usize = 2048;
/// Share of the radial proposal spread by volume, so that every cell of the
/// truncated region is sampled.
const DEFENSIVE: f64 = 0.01;

/// A radial decay envelope `e(r)` declared by the caller. It shapes the
/// radial proposal and fixes the automatic truncation radius.
#[derive(Clone)]
pub struct Envelope {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Option<f64>,
    label: String,
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Envelope").field("label", &self.label).finish()
    }
}

impl Envelope {
    pub fn custom(
        label: impl Into<String>,
        support: Option<f64>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            support,
            label: label.into(),
        }
    }

    /// `e^{-c r}`
    pub fn exponential(c: f64) -> Self {
        Self::custom(format!("exp({c})"), None, move |r| (-c * r).exp())
    }

    /// `e^{-c r^2}`
    pub fn gaussian(c: f64) -> Self {
        Self::custom(format!("gauss({c})"), None, move |r| (-c * r * r).exp())
    }

    /// `(1 + r)^{-s}`
    pub fn power(s: f64) -> Self {
        Self::custom(format!("power({s})"), None, move |r| (1.0 + r).powf(-s))
    }

    /// Indicator of `[0, radius]`.
    pub fn compact(radius: f64) -> Self {
        Self::custom(format!("ball({radius})"), Some(radius), move |r| {
            if r <= radius {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Radial range `[eps, R]` of the truncated integration region.
pub(crate) fn truncation(q: f64, envelope: &Envelope, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let origin = Origin::new(MODULE, "truncation");
    let eps = spec.inner_cutoff;
    if let Some(r) = spec.r_max {
        return Ok((eps, envelope.support.map_or(r, |s| s.min(r)).max(eps)));
    }
    if let Some(s) = envelope.support {
        if s <= eps {
            return Err(Error::parameter(
                origin,
                format!("envelope support {s} lies inside the inner cutoff {eps}"),
            ));
        }
        return Ok((eps, s));
    }
    let env = |r: f64| envelope.eval(r);
    let total = integrate_radial_with(env, q, eps, f64::INFINITY, &RadialOptions::default())
        .map_err(|e| e.with_origin(origin))?
        .value;
    if !(total > 0.0) {
        return Err(Error::degenerate(origin, "envelope has zero mass"));
    }
    let tail = |r: f64| -> Result<f64> {
        Ok(integrate_radial_with(env, q, r, f64::INFINITY, &RadialOptions::default())?.value)
    };
    let mut lo = eps.max(1e-300);
    let mut hi = eps.max(1.0);
    while tail(hi)? > TAIL_FRACTION * total {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::divergence(origin, "envelope tail never becomes negligible"));
        }
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if tail(mid)? > TAIL_FRACTION * total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((eps, hi))
}

/// Piecewise-constant density on `[eps, R]` roughly proportional to
/// `r^{Q-1} e(r)`.
struct Proposal {
    edges: Vec<f64>,
    cdf: Vec<f64>,
    density: Vec<f64>,
}

impl Proposal {
    fn new(q: f64, envelope: &Envelope, eps: f64, r_max: f64) -> Result<Self> {
        let mut edges = Vec::with_capacity(CELLS + 2);
        let first = if eps > 0.0 { eps } else { r_max * 2f64.powi(-20) };
        if eps == 0.0 {
            edges.push(0.0);
        }
        let ratio = (r_max / first).powf(1.0 / CELLS as f64);
        for k in 0..CELLS {
            edges.push(first * ratio.powi(k as i32));
        }
        edges.push(r_max);
        let mut env_mass = Vec::with_capacity(edges.len() - 1);
        let mut vol_mass = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (m, _) = gauss_kronrod21(&mut |r: f64| r.powf(q - 1.0) * envelope.eval(r), w[0], w[1]);
            env_mass.push(m.max(0.0));
            vol_mass.push((w[1].powf(q) - w[0].powf(q)) / q);
        }
        let env_total = pairwise_sum(&env_mass);
        let vol_total = pairwise_sum(&vol_mass);
        if !(env_total > 0.0) || !env_total.is_finite() {
            return Err(Error::degenerate(
                Origin::new(MODULE, "integrate_cartesian"),
                format!("envelope '{}' has no usable mass on [{eps}, {r_max}]", envelope.label),
            ));
        }
        let mut cdf = Vec::with_capacity(env_mass.len());
        let mut density = Vec::with_capacity(env_mass.len());
        let mut acc = 0.0;
        for (k, w) in edges.windows(2).enumerate() {
            let m = (1.0 - DEFENSIVE) * env_mass[k] / env_total + DEFENSIVE * vol_mass[k] / vol_total;
            acc += m;
            cdf.push(acc);
            density.push(m / (w[1] - w[0]));
        }
        let last = *cdf.last().unwrap();
        cdf.iter_mut().for_each(|c| *c /= last);
        density.iter_mut().for_each(|d| *d /= last);
        Ok(Self { edges, cdf, density })
    }

    /// Returns a radius and the proposal density there.
    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        let v: f64 = rng.random();
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        ((a + v * (b - a)).max(f64::MIN_POSITIVE), self.density[k])
    }
}

/// Writes `D_{r/|w|}(w)` into `out`.
pub(crate) fn ray_point(norm: &QuasiNorm, w: &[f64], w_norm: f64, r: f64, out: &mut [f64]) {
    norm.group().dilate_into(r / w_norm, w, out);
}

fn nonfinite_error(x: &[f64], v: f64) -> Error {
    Error::evaluation(
        Origin::new(MODULE, "integrate_cartesian"),
        format!("integrand is {v} at x = {x:?}"),
    )
}

/// `int F(x) dx` over the truncated region `eps <= |x| <= R`.
///
/// Monte Carlo draws directions uniformly on the Euclidean sphere and radii
/// from a proposal proportional to `r^{Q-1} e(r)`. The tensor grid applies
/// an angular product rule with adaptive radial integration along each ray.
pub fn integrate_cartesian<F>(
    norm: &QuasiNorm,
    integrand: F,
    envelope: &Envelope,
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    let q = norm.q();
    let dim = norm.dim();
    let (eps, r_max) = truncation(q, envelope, spec)?;
    // Two directions only on the line, so the ray integrals are exact.
    let result = match spec.scheme {
        Scheme::MonteCarlo if dim > 1 => monte_carlo(norm, &integrand, envelope, spec, eps, r_max)?,
        _ => {
            let (rule, coarse) = DirectionRule::for_spec(dim, spec, 0);
            let ray = |w: &[f64]| ray_integral(norm, &integrand, w, eps, r_max);
            let fine = evaluate_rule(&rule, &ray)?;
            let coarse_value = match &coarse {
                Some(c) => Some(pairwise_sum(&evaluate_rule(c, &ray)?)),
                None => None,
            };
            combine(&rule, &fine, coarse_value)
        }
    };
    if !result.value.is_finite() {
        return Err(Error::divergence(
            Origin::new(MODULE, "integrate_cartesian"),
            "estimate overflowed",
        ));
    }
    Ok(result)
}

/// `J(w) int_eps^R F(D_{r/|w|} w) r^{Q-1} dr` for one Euclidean unit vector.
fn ray_integral<F>(norm: &QuasiNorm, integrand: &F, w: &[f64], eps: f64, r_max: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let w_norm = norm.eval_slice(w);
    let q = norm.q();
    let mut x = vec![0.0; w.len()];
    let cell = std::cell::RefCell::new(&mut x);
    let opts = RadialOptions {
        rel_tol: 1e-10,
        ..RadialOptions::default()
    };
    let g = |r: f64| {
        let mut x = cell.borrow_mut();
        ray_point(norm, w, w_norm, r, &mut x);
        let v = integrand(&x);
        if v == 0.0 {
            0.0
        } else {
            v * r.powf(q - 1.0)
        }
    };
    let res = radial_integral(g, eps, r_max, &opts).map_err(|e| {
        e.with_origin(Origin::new(MODULE, "integrate_cartesian"))
    })?;
    Ok(norm.sphere_density(w) * res.value)
}

fn monte_carlo<F>(
    norm: &QuasiNorm,
    integrand: &F,
    envelope: &Envelope,
    spec: &QuadratureSpec,
    eps: f64,
    r_max: f64,
) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let q = norm.q();
    let dim = norm.dim();
    let area = unit_sphere_area(dim);
    let proposal = Proposal::new(q, envelope, eps, r_max)?;
    let n = spec.samples;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(c as u64);
            let take = CHUNK.min(n - c * CHUNK);
            let mut out = Vec::with_capacity(take);
            let mut w = Vec::with_capacity(dim);
            let mut x = vec![0.0; dim];
            for _ in 0..take {
                let (r, density) = proposal.sample(&mut rng);
                let radial = r.powf(q - 1.0) / density;
                let mut term = 0.0;
                if dim == 1 {
                    for s in [1.0, -1.0] {
                        x[0] = s * r;
                        let v = integrand(&x);
                        if !v.is_finite() {
                            return Err(nonfinite_error(&x, v));
                        }
                        term += v * radial;
                    }
                } else {
                    w.clear();
                    random_direction(&mut rng, dim, &mut w);
                    let w_norm = norm.eval_slice(&w);
                    ray_point(norm, &w, w_norm, r, &mut x);
                    let v = integrand(&x);
                    if !v.is_finite() {
                        return Err(nonfinite_error(&x, v));
                    }
                    if v != 0.0 {
                        term = area * norm.sphere_density(&w) * v * radial;
                    }
                }
                out.push(term);
            }
            Ok(out)
        })
        .collect();
    let mut terms = Vec::with_capacity(n);
    for p in parts {
        terms.extend(p?);
    }
    let (value, stderr) = mean_and_stderr(&terms);
    Ok(IntegralResult {
        value,
        stderr,
        samples_used: n,
    })
}

type MeasureCache = Mutex<HashMap<(String, String), IntegralResult>>;

fn measure_cache() -> &'static MeasureCache {
    static CACHE: OnceLock<MeasureCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `|S|`, the total mass of the quasi-sphere measure, from
/// `int e^{-|x|} dx` divided by the matching truncated Gamma integral.
/// Results are cached per (norm, spec).
pub fn sphere_measure(norm: &QuasiNorm, spec: &QuadratureSpec) -> Result<IntegralResult> {
    spec.validate()?;
    let key = (norm.label(), spec.cache_key());
    if let Some(hit) = measure_cache().lock().unwrap().get(&key) {
        return Ok(*hit);
    }
    let origin = Origin::new(MODULE, "sphere_measure");
    let q = norm.q();
    let envelope = Envelope::exponential(1.0);
    let (eps, r_max) = truncation(q, &envelope, spec)?;
    let mass = integrate_cartesian(norm, |x| (-norm.eval_slice(x)).exp(), &envelope, spec)
        .map_err(|e| e.with_origin(origin))?;
    let gamma = integrate_radial_with(|r| (-r).exp(), q, eps, r_max, &RadialOptions::default())
        .map_err(|e| e.with_origin(origin))?
        .value;
    let result = IntegralResult {
        value: mass.value / gamma,
        stderr: mass.stderr / gamma,
        samples_used: mass.samples_used,
    };
    measure_cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert(result);
    Ok(result)
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarConsistency {
    pub cartesian: IntegralResult,
    pub sphere: IntegralResult,
    pub radial: f64,
    pub polar: f64,
    pub relative_discrepancy: f64,
    pub combined_stderr: f64,
    pub consistent: bool,
}

/// Compares `int g(|x|) dx` computed in the chart against
/// `|S| int g(r) r^{Q-1} dr`.
pub fn polar_consistency_check<G>(
    norm: &QuasiNorm,
    g: G,
    envelope: &Envelope,
    spec: &QuadratureSpec,
) -> Result<PolarConsistency>
where
    G: Fn(f64) -> f64 + Sync,
{
    let q = norm.q();
    let cartesian = integrate_cartesian(norm, |x| g(norm.eval_slice(x)), envelope, spec)?;
    let sphere = sphere_measure(norm, spec)?;
    let (eps, r_max) = truncation(q, envelope, spec)?;
    let opts = RadialOptions {
        breakpoints: envelope.support().into_iter().collect(),
        ..RadialOptions::default()
    };
    let radial = integrate_radial_with(&g, q, eps, r_max, &opts)?.value;
    let polar = sphere.value * radial;
    let combined_stderr = cartesian.stderr.hypot(sphere.stderr * radial.abs());
    let diff = (cartesian.value - polar).abs();
    Ok(PolarConsistency {
        cartesian,
        sphere,
        radial,
        polar,
        relative_discrepancy: diff / polar.abs(),
        combined_stderr,
        consistent: diff <= 3.0 * combined_stderr + 1e-9 * polar.abs(),
    })
}
