#![allow(dead_code)]

use std::sync::Arc;

use revineq::group::{GroupPoint, HomogeneousGroup, NormKind, QuasiNorm, Weight};
use revineq::quadrature::{integrate_cartesian, Envelope, IntegralResult, QuadratureSpec};
use statrs::function::beta::beta;
use statrs::function::gamma::gamma;

pub fn norm(group: HomogeneousGroup, kind: NormKind) -> QuasiNorm {
    QuasiNorm::new(Arc::new(group), kind).unwrap()
}

pub fn heisenberg(kind: NormKind) -> QuasiNorm {
    norm(HomogeneousGroup::heisenberg(1).unwrap(), kind)
}

pub fn abelian(n: usize) -> QuasiNorm {
    norm(HomogeneousGroup::abelian(n).unwrap(), NormKind::Euclidean)
}

/// Every built-in group with every norm it supports.
pub fn builtin_norms() -> Vec<QuasiNorm> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push(abelian(n));
        out.push(norm(HomogeneousGroup::abelian(n).unwrap(), NormKind::Anisotropic));
    }
    for n in 1..=2 {
        for kind in [NormKind::Koranyi, NormKind::Cygan] {
            out.push(norm(HomogeneousGroup::heisenberg(n).unwrap(), kind));
        }
    }
    let graded = |w: Vec<Weight>| norm(HomogeneousGroup::graded(w).unwrap(), NormKind::Anisotropic);
    out.push(graded(vec![Weight::one(), Weight::two()]));
    out.push(graded(vec![Weight::one(), Weight::one(), Weight::new(3, 1).unwrap()]));
    out.push(graded(vec![Weight::new(1, 2).unwrap(), Weight::new(3, 2).unwrap()]));
    out
}

/// Reverse Hardy ratio of `e^{-r}`:
/// `(int e^{-pr} r^{Q-1-p} dr / int e^{-pr} r^{Q-1} dr)^{1/p}`.
pub fn hardy_ratio_exp(q: f64, p: f64) -> f64 {
    let a = gamma(q - p) / p.powf(q - p);
    let b = gamma(q) / p.powf(q);
    (a / b).powf(1.0 / p)
}

/// Reverse Sobolev ratio of `e^{-r}`:
/// `(int e^{-pr} r^{Q-1} dr / int r^p e^{-pr} r^{Q-1} dr)^{1/p}`.
pub fn sobolev_ratio_exp(q: f64, p: f64) -> f64 {
    let a = gamma(q) / p.powf(q);
    let b = gamma(q + p) / p.powf(q + p);
    (a / b).powf(1.0 / p)
}

/// Forward Hardy ratio of `(1 + r)^{-s}` through Beta integrals
/// `int r^{a-1} (1+r)^{-(a+b)} dr = B(a, b)`.
pub fn forward_hardy_ratio_power(q: f64, p: f64, s: f64) -> f64 {
    let a = beta(q - p, s * p - q + p);
    let b = s.powf(p) * beta(q, (s + 1.0) * p - q);
    (a / b).powf(1.0 / p)
}

fn gaussian_of(n: &QuasiNorm, p: &GroupPoint) -> f64 {
    (-n.eval(p).unwrap().powi(2)).exp()
}

/// `int phi(a x) dx`, `int phi(x a) dx` and `s^Q int phi(D_s x) dx` against
/// `int phi(x) dx` for `phi = e^{-|x|^2}`.
pub fn haar_checks(n: &QuasiNorm, spec: &QuadratureSpec) -> Vec<(&'static str, IntegralResult, IntegralResult)> {
    let g = n.group();
    let a = GroupPoint::new([0.5, -0.3, 0.2, 0.1, -0.4][..n.dim()].to_vec()).unwrap();
    let point = |x: &[f64]| GroupPoint::new(x.to_vec()).unwrap();
    let base = integrate_cartesian(n, |x: &[f64]| gaussian_of(n, &point(x)), &Envelope::gaussian(1.0), spec).unwrap();
    let left = integrate_cartesian(
        n,
        |x: &[f64]| gaussian_of(n, &g.mul(&a, &point(x)).unwrap()),
        &Envelope::gaussian(0.3),
        spec,
    )
    .unwrap();
    let right = integrate_cartesian(
        n,
        |x: &[f64]| gaussian_of(n, &g.mul(&point(x), &a).unwrap()),
        &Envelope::gaussian(0.3),
        spec,
    )
    .unwrap();
    let s: f64 = 0.5;
    let dil = integrate_cartesian(
        n,
        |x: &[f64]| gaussian_of(n, &g.dilate(s, &point(x)).unwrap()),
        &Envelope::gaussian(s * s),
        spec,
    )
    .unwrap();
    let scale = s.powf(n.q());
    let dil = IntegralResult {
        value: dil.value * scale,
        stderr: dil.stderr * scale,
        samples_used: dil.samples_used,
    };
    vec![("left translation", base, left), ("right translation", base, right), ("dilation", base, dil)]
}

pub fn haar_norms() -> Vec<QuasiNorm> {
    vec![
        heisenberg(NormKind::Koranyi),
        heisenberg(NormKind::Cygan),
        abelian(2),
        norm(HomogeneousGroup::graded(vec![Weight::one(), Weight::two()]).unwrap(), NormKind::Anisotropic),
    ]
}
