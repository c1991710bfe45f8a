//! One-dimensional radial integration on (r_min, r_max), 0 <= r_min < r_max <= inf.
//!
//! The range is cut into geometric shells [c 2^k, c 2^{k+1}]. Each shell is
//! integrated with adaptive Gauss-Kronrod; shells are added outward from the
//! finite end(s) until the contributions become negligible. When successive
//! shell contributions settle into a geometric sequence (power-law behaviour
//! at 0 or at infinity) the remaining tail is summed in closed form.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Origin, Result};
use crate::quadrature::rules::gauss_kronrod21;

const MODULE: &str = "quadrature";

#[derive(Clone, Debug)]
pub struct RadialOptions {
    pub rel_tol: f64,
    /// Points where the integrand may have a kink or jump.
    pub breakpoints: Vec<f64>,
    /// The integrand vanishes beyond this radius.
    pub support_end: Option<f64>,
    pub max_shells: usize,
    pub max_subdivisions: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            breakpoints: Vec::new(),
            support_end: None,
            max_shells: 2200,
            max_subdivisions: 400,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialIntegral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod on a finite interval.
fn adaptive_panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
    evaluations: &mut usize,
) -> Result<(f64, f64)> {
    let origin = Origin::new(MODULE, "integrate_radial");
    let bad: Cell<Option<(f64, f64)>> = Cell::new(None);
    let mut g = |x: f64| {
        let v = f(x);
        if !v.is_finite() && bad.get().is_none() {
            bad.set(Some((x, v)));
        }
        v
    };
    let (value, error) = gauss_kronrod21(&mut g, a, b);
    *evaluations += 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let (mut total, mut total_err) = (value, error);
    let mut count = 1;
    while total_err > abs_tol.max(rel_tol * total.abs()) && count < max_subdivisions {
        if let Some((x, v)) = bad.get() {
            return Err(Error::evaluation(
                origin,
                format!("integrand is {v} at r = {x}"),
            ));
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            heap.push(seg);
            break;
        }
        let (v1, e1) = gauss_kronrod21(&mut g, seg.a, mid);
        let (v2, e2) = gauss_kronrod21(&mut g, mid, seg.b);
        *evaluations += 42;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        count += 1;
    }
    if let Some((x, v)) = bad.get() {
        return Err(Error::evaluation(origin, format!("integrand is {v} at r = {x}")));
    }
    // Re-sum the leaves to shed accumulated update rounding.
    let mut leaves: Vec<Segment> = heap.into_vec();
    leaves.sort_by(|s, t| s.a.total_cmp(&t.a));
    let value = leaves.iter().map(|s| s.value).sum();
    let error = leaves.iter().map(|s| s.error).sum();
    Ok((value, error))
}

/// Integrates `f` over the finite interval [a, b], splitting at breakpoints.
fn integrate_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: &RadialOptions,
    evaluations: &mut usize,
) -> Result<(f64, f64)> {
    let mut cuts = vec![a];
    cuts.extend(opts.breakpoints.iter().copied().filter(|&p| p > a && p < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let mut value = 0.0;
    let mut error = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            let (v, e) = adaptive_panel(
                f,
                w[0],
                w[1],
                opts.rel_tol,
                1e-300,
                opts.max_subdivisions,
                evaluations,
            )?;
            value += v;
            error += e;
        }
    }
    Ok((value, error))
}

enum Walk {
    Down,
    Up,
}

/// Adds shells from `start` toward 0 (`Down`) or infinity (`Up`) until the
/// remainder is negligible relative to `base + accumulated`.
fn walk_shells<F: Fn(f64) -> f64>(
    f: &F,
    start: f64,
    walk: Walk,
    base: f64,
    opts: &RadialOptions,
    evaluations: &mut usize,
) -> Result<(f64, f64)> {
    let origin = Origin::new(MODULE, "integrate_radial");
    let mut acc = 0.0;
    let mut err = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut growing = 0usize;
    let mut edge = start;
    for _ in 0..opts.max_shells {
        let (a, b) = match walk {
            Walk::Down => (edge * 0.5, edge),
            Walk::Up => (edge, edge * 2.0),
        };
        if !(a > 0.0) || !b.is_finite() {
            // Reached the end of the floating point range.
            return Ok((acc, err));
        }
        let (c, e) = integrate_finite(f, a, b, opts, evaluations)?;
        acc += c;
        err += e;
        edge = match walk {
            Walk::Down => a,
            Walk::Up => b,
        };
        if !acc.is_finite() {
            return Err(Error::divergence(
                origin,
                format!("partial sums overflow near r = {edge:e}"),
            ));
        }
        let total = (base + acc).abs();
        let ratio = prev.and_then(|p| (p != 0.0).then(|| c / p));
        prev = Some(c);
        if let Some(rho) = ratio {
            if rho >= 1.0 && c.abs() > opts.rel_tol * total {
                growing += 1;
                if growing >= 40 {
                    let end = match walk {
                        Walk::Down => "0",
                        Walk::Up => "infinity",
                    };
                    return Err(Error::divergence(
                        origin,
                        format!("shell contributions do not decay toward {end} (ratio {rho:.4})"),
                    ));
                }
            } else {
                growing = 0;
            }
        }
        if total == 0.0 {
            continue;
        }
        if c == 0.0 {
            // Past the support of the integrand.
            return Ok((acc, err));
        }
        if let Some(rho) = ratio {
            if (0.0..1.0).contains(&rho) {
                let tail = c * rho / (1.0 - rho);
                if c.abs() + tail.abs() <= opts.rel_tol * total {
                    return Ok((acc + tail, err + tail.abs()));
                }
                if let Some(pr) = prev_ratio {
                    if (rho - pr).abs() <= 1e-11 && tail.abs() <= 1e3 * total {
                        return Ok((acc + tail, err + tail.abs() * (rho - pr).abs().max(1e-16) / (1.0 - rho)));
                    }
                }
            }
        }
        prev_ratio = ratio;
    }
    if prev.is_some_and(|c| c.abs() <= 1e-6 * (base + acc).abs()) {
        return Ok((acc, err));
    }
    Err(Error::divergence(
        origin,
        "shell budget exhausted before the integral settled",
    ))
}

/// Integrates a full integrand `f(r)` (any radial weight already included)
/// over (r_min, r_max).
pub fn radial_integral<F: Fn(f64) -> f64>(
    f: F,
    r_min: f64,
    r_max: f64,
    opts: &RadialOptions,
) -> Result<RadialIntegral> {
    let origin = Origin::new(MODULE, "integrate_radial");
    if !(r_min >= 0.0) || !(r_max > r_min) {
        return Err(Error::parameter(
            origin,
            format!("need 0 <= r_min < r_max, got [{r_min}, {r_max}]"),
        ));
    }
    let r_max = match opts.support_end {
        Some(s) if s < r_max => s,
        _ => r_max,
    };
    if r_max <= r_min {
        return Ok(RadialIntegral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut evaluations = 0;
    let (value, error) = match (r_min > 0.0, r_max.is_finite()) {
        (true, true) => {
            // Geometric cuts keep each panel's dynamic range bounded.
            let mut cuts = vec![r_min];
            let mut x = r_min * 2.0;
            while x < r_max {
                cuts.push(x);
                x *= 2.0;
            }
            cuts.push(r_max);
            let mut v = 0.0;
            let mut e = 0.0;
            for w in cuts.windows(2) {
                let (a, b) = integrate_finite(&f, w[0], w[1], opts, &mut evaluations)?;
                v += a;
                e += b;
            }
            (v, e)
        }
        (false, true) => walk_shells(&f, r_max, Walk::Down, 0.0, opts, &mut evaluations)?,
        (true, false) => walk_shells(&f, r_min, Walk::Up, 0.0, opts, &mut evaluations)?,
        (false, false) => {
            let (down, e1) = walk_shells(&f, 1.0, Walk::Down, 0.0, opts, &mut evaluations)?;
            let (up, e2) = walk_shells(&f, 1.0, Walk::Up, down, opts, &mut evaluations)?;
            (down + up, e1 + e2)
        }
    };
    Ok(RadialIntegral { value, error, evaluations })
}

/// `int_{r_min}^{r_max} profile(r) r^{Q-1} dr`.
pub fn integrate_radial<F: Fn(f64) -> f64>(profile: F, q: f64, r_min: f64, r_max: f64) -> Result<f64> {
    integrate_radial_with(profile, q, r_min, r_max, &RadialOptions::default()).map(|r| r.value)
}

pub fn integrate_radial_with<F: Fn(f64) -> f64>(
    profile: F,
    q: f64,
    r_min: f64,
    r_max: f64,
    opts: &RadialOptions,
) -> Result<RadialIntegral> {
    if !(q > 0.0) {
        return Err(Error::parameter(
            Origin::new(MODULE, "integrate_radial"),
            format!("radial weight exponent Q must be positive, got {q}"),
        ));
    }
    let qm1 = q - 1.0;
    radial_integral(
        move |r: f64| {
            let v = profile(r);
            if v == 0.0 {
                0.0
            } else if qm1 == 0.0 {
                v
            } else {
                v * r.powf(qm1)
            }
        },
        r_min,
        r_max,
        opts,
    )
}
