//! Quadrature over the Euclidean unit sphere S^{N-1}.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::rules::{gauss_legendre, mean_and_stderr, pairwise_sum};
use super::{IntegralResult, QuadratureSpec, Scheme};
use crate::error::Result;

/// Samples drawn from one random stream.
pub(crate) const CHUNK: usize = 1024;

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "unit_sphere_area needs n >= 1");
    let mut a = if n % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        a *= 2.0 * PI / k as f64;
        k += 2;
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RuleKind {
    /// The two points of S^0.
    Exact,
    Random,
    Grid,
}

/// Weighted points on S^{N-1}; `sum w_i g(p_i)` approximates the surface
/// integral of `g`.
#[derive(Clone, Debug)]
pub(crate) struct DirectionRule {
    pub dim: usize,
    pub kind: RuleKind,
    points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DirectionRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn exact_line() -> Self {
        Self {
            dim: 1,
            kind: RuleKind::Exact,
            points: vec![1.0, -1.0],
            weights: vec![1.0, 1.0],
        }
    }

    /// `count` independent uniform directions; stream `stream_base + c`
    /// feeds chunk `c`, so the sequence does not depend on thread count.
    pub fn random(dim: usize, count: usize, seed: u64, stream_base: u64) -> Self {
        if dim == 1 {
            return Self::exact_line();
        }
        let mut points = Vec::with_capacity(count * dim);
        let mut chunk = 0u64;
        while points.len() < count * dim {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + chunk);
            let take = CHUNK.min(count - points.len() / dim);
            for _ in 0..take {
                random_direction(&mut rng, dim, &mut points);
            }
            chunk += 1;
        }
        let w = unit_sphere_area(dim) / count as f64;
        Self {
            dim,
            kind: RuleKind::Random,
            points,
            weights: vec![w; count],
        }
    }

    /// Product rule in hyperspherical angles: Gauss-Legendre in each polar
    /// angle and `2n` equispaced nodes in the azimuth.
    pub fn grid(dim: usize, n: usize) -> Self {
        if dim == 1 {
            return Self::exact_line();
        }
        let (gx, gw) = gauss_legendre(n);
        let polar = dim - 2;
        let n_phi = 2 * n;
        let total = n.pow(polar as u32) * n_phi;
        let mut points = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; polar];
        loop {
            let mut w = 1.0;
            let mut sin_prod = 1.0;
            let mut head = Vec::with_capacity(dim);
            for (k, &i) in idx.iter().enumerate() {
                let theta = 0.5 * PI * (gx[i] + 1.0);
                let wt = 0.5 * PI * gw[i];
                // Surface element sin^{dim-2-k}(theta_k).
                w *= wt * theta.sin().powi((dim - 2 - k) as i32);
                head.push(sin_prod * theta.cos());
                sin_prod *= theta.sin();
            }
            for j in 0..n_phi {
                let phi = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
                points.extend_from_slice(&head);
                points.push(sin_prod * phi.cos());
                points.push(sin_prod * phi.sin());
                weights.push(w * 2.0 * PI / n_phi as f64);
            }
            // Advance the mixed-radix counter over polar angle indices.
            let mut k = 0;
            while k < polar {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == polar {
                break;
            }
        }
        Self {
            dim,
            kind: RuleKind::Grid,
            points,
            weights,
        }
    }

    /// The main rule for `spec` and, for the grid scheme, the half-resolution
    /// companion used for the error estimate.
    pub fn for_spec(dim: usize, spec: &QuadratureSpec, stream_base: u64) -> (Self, Option<Self>) {
        if dim == 1 {
            return (Self::exact_line(), None);
        }
        match spec.scheme {
            Scheme::MonteCarlo => (Self::random(dim, spec.samples, spec.seed, stream_base), None),
            Scheme::TensorGrid => {
                let n = spec.nodes_per_axis;
                (Self::grid(dim, n), Some(Self::grid(dim, (n / 2).max(1))))
            }
        }
    }
}

pub(crate) fn random_direction(rng: &mut ChaCha8Rng, dim: usize, out: &mut Vec<f64>) {
    loop {
        let start = out.len();
        let mut s = 0.0;
        for _ in 0..dim {
            let g: f64 = StandardNormal.sample(rng);
            s += g * g;
            out.push(g);
        }
        if s > 1e-300 {
            let inv = 1.0 / s.sqrt();
            out[start..].iter_mut().for_each(|v| *v *= inv);
            return;
        }
        out.truncate(start);
    }
}

/// Evaluates `f` on every point of the rule, in parallel, keeping the
/// first error in rule order.
pub(crate) fn evaluate_rule<F>(rule: &DirectionRule, f: &F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let values: Vec<Result<f64>> = (0..rule.len())
        .into_par_iter()
        .map(|i| f(rule.point(i)).map(|v| v * rule.weights[i]))
        .collect();
    values.into_iter().collect()
}

/// Combines weighted rule values into an estimate with an error bar.
pub(crate) fn combine(rule: &DirectionRule, weighted: &[f64], coarse: Option<f64>) -> IntegralResult {
    match rule.kind {
        RuleKind::Random => {
            // Each weighted value is area * g / n; rescale to per-sample terms.
            let n = weighted.len() as f64;
            let terms: Vec<f64> = weighted.iter().map(|v| v * n).collect();
            let (mean, se) = mean_and_stderr(&terms);
            IntegralResult {
                value: mean,
                stderr: se,
                samples_used: weighted.len(),
            }
        }
        RuleKind::Exact | RuleKind::Grid => {
            let value = pairwise_sum(weighted);
            IntegralResult {
                value,
                stderr: coarse.map_or(0.0, |c| (value - c).abs()),
                samples_used: weighted.len(),
            }
        }
    }
}

/// `int_{S^{N-1}} f(w) dS(w)` with the scheme of `spec`.
pub fn sphere_integral<F>(dim: usize, spec: &QuadratureSpec, f: F) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    spec.validate()?;
    let (rule, coarse) = DirectionRule::for_spec(dim, spec, 0);
    let fine = evaluate_rule(&rule, &f)?;
    let coarse_value = match &coarse {
        Some(c) => Some(pairwise_sum(&evaluate_rule(c, &f)?)),
        None => None,
    };
    let mut out = combine(&rule, &fine, coarse_value);
    if let Some(c) = &coarse {
        out.samples_used += c.len();
    }
    Ok(out)
}
