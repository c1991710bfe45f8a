//! Homogeneous groups on R^N in a fixed global chart, their dilations and
//! homogeneous quasi-norms.
//!
//! A group is described by its dilation weights and a group law. Three
//! families are built in:
//!
//! * `abelian(n)`: (R^n, +) with unit weights.
//! * `graded(weights)`: (R^N, +) with anisotropic rational weights.
//! * `heisenberg(n)`: H^n with coordinates (x, y, t), x, y in R^n, weights
//!   (1, ..., 1, 2) and the polarized law
//!   `(x, y, t)(x', y', t') = (x + x', y + y', t + t' + (x.y' - y.x') / 2)`,
//!   whose inverse is plain negation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Origin, Result};

const MODULE: &str = "group_core";

/// A point of the group, in global chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupPoint(Vec<f64>);

impl GroupPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::parameter(
                Origin::new(MODULE, "GroupPoint::new"),
                format!("non-finite coordinate {bad}"),
            ));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl From<GroupPoint> for Vec<f64> {
    fn from(p: GroupPoint) -> Self {
        p.0
    }
}

/// A positive rational dilation weight `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Weight {
    num: u64,
    den: u64,
}

impl Weight {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::parameter(
                Origin::new(MODULE, "Weight::new"),
                format!("weights must be positive rationals, got {num}/{den}"),
            ));
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub const fn one() -> Self {
        Self { num: 1, den: 1 }
    }

    pub const fn two() -> Self {
        Self { num: 2, den: 1 }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let origin = Origin::new(MODULE, "Weight::from_str");
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::parameter(origin, format!("invalid weight `{s}`")))
        };
        match s.split_once('/') {
            Some((n, d)) => Weight::new(parse(n)?, parse(d)?),
            None => Weight::new(parse(s)?, 1),
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(n) => Weight::new(n, 1).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupLaw {
    Abelian,
    /// H^n; the chart has dimension 2n + 1.
    Heisenberg { n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousGroup {
    name: String,
    weights: Vec<Weight>,
    weight_values: Vec<f64>,
    law: GroupLaw,
}

impl HomogeneousGroup {
    fn build(name: String, weights: Vec<Weight>, law: GroupLaw) -> Self {
        let weight_values = weights.iter().map(Weight::value).collect();
        Self {
            name,
            weights,
            weight_values,
            law,
        }
    }

    pub fn abelian(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter(
                Origin::new(MODULE, "HomogeneousGroup::abelian"),
                "dimension must be positive",
            ));
        }
        Ok(Self::build(
            format!("abelian_r{n}"),
            vec![Weight::one(); n],
            GroupLaw::Abelian,
        ))
    }

    pub fn graded(weights: Vec<Weight>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::parameter(
                Origin::new(MODULE, "HomogeneousGroup::graded"),
                "at least one weight is required",
            ));
        }
        let label = weights
            .iter()
            .map(|w| w.to_string().replace('/', "_"))
            .collect::<Vec<_>>()
            .join("-");
        Ok(Self::build(
            format!("graded_{label}"),
            weights,
            GroupLaw::Abelian,
        ))
    }

    pub fn heisenberg(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter(
                Origin::new(MODULE, "HomogeneousGroup::heisenberg"),
                "H^n needs n >= 1",
            ));
        }
        let mut weights = vec![Weight::one(); 2 * n];
        weights.push(Weight::two());
        Ok(Self::build(
            format!("heisenberg_h{n}"),
            weights,
            GroupLaw::Heisenberg { n },
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn weight_values(&self) -> &[f64] {
        &self.weight_values
    }

    pub fn law(&self) -> GroupLaw {
        self.law
    }

    /// Homogeneous dimension Q, the sum of the weights.
    pub fn homogeneous_dimension(&self) -> f64 {
        let (num, den) = self.weights.iter().fold((0u64, 1u64), |(n, d), w| {
            let l = d.lcm(&w.den);
            (n * (l / d) + w.num * (l / w.den), l)
        });
        num as f64 / den as f64
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|w| *w == Weight::one())
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::origin(self.dim())
    }

    fn check_dim(&self, op: &'static str, x: &GroupPoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::Shape {
                origin: Origin::new(MODULE, op),
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(())
    }

    /// Anisotropic dilation `D_s x`.
    pub fn dilate(&self, s: f64, x: &GroupPoint) -> Result<GroupPoint> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::parameter(
                Origin::new(MODULE, "dilate"),
                format!("dilation factor must be positive and finite, got {s}"),
            ));
        }
        self.check_dim("dilate", x)?;
        let mut out = vec![0.0; self.dim()];
        self.dilate_into(s, x.coords(), &mut out);
        Ok(GroupPoint(out))
    }

    pub fn mul(&self, x: &GroupPoint, y: &GroupPoint) -> Result<GroupPoint> {
        self.check_dim("group_mul", x)?;
        self.check_dim("group_mul", y)?;
        let mut out = vec![0.0; self.dim()];
        self.mul_into(x.coords(), y.coords(), &mut out);
        Ok(GroupPoint(out))
    }

    pub fn inv(&self, x: &GroupPoint) -> Result<GroupPoint> {
        self.check_dim("group_inv", x)?;
        let mut out = vec![0.0; self.dim()];
        self.inv_into(x.coords(), &mut out);
        Ok(GroupPoint(out))
    }

    pub(crate) fn dilate_into(&self, s: f64, x: &[f64], out: &mut [f64]) {
        for ((o, xi), nu) in out.iter_mut().zip(x).zip(&self.weight_values) {
            *o = if *nu == 1.0 {
                s * xi
            } else if *nu == 2.0 {
                s * s * xi
            } else {
                s.powf(*nu) * xi
            };
        }
    }

    pub(crate) fn mul_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
            *o = a + b;
        }
        if let GroupLaw::Heisenberg { n } = self.law {
            let mut symp = 0.0;
            for i in 0..n {
                symp += x[i] * y[n + i] - x[n + i] * y[i];
            }
            out[2 * n] += 0.5 * symp;
        }
    }

    pub(crate) fn inv_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(x) {
            *o = -a;
        }
    }

    /// `y^{-1} x`, the argument of the convolution kernel `|y^{-1} x|`.
    pub(crate) fn left_quotient_into(&self, y: &[f64], x: &[f64], out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
            *o = a - b;
        }
        if let GroupLaw::Heisenberg { n } = self.law {
            let mut symp = 0.0;
            for i in 0..n {
                symp += -y[i] * x[n + i] + y[n + i] * x[i];
            }
            out[2 * n] += 0.5 * symp;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Euclidean norm; homogeneous only when every weight is 1.
    Euclidean,
    /// `(|z|^4 + t^2)^{1/4}` on H^n.
    Koranyi,
    /// `(|z|^4 + 16 t^2)^{1/4}` on H^n; satisfies the triangle inequality for
    /// the polarized law.
    Cygan,
    /// `(sum |x_i|^{2M/nu_i})^{1/(2M)}` with M the least common multiple of
    /// the weights.
    Anisotropic,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::Euclidean => "euclidean",
            NormKind::Koranyi => "koranyi",
            NormKind::Cygan => "cygan",
            NormKind::Anisotropic => "anisotropic",
        }
    }
}

/// A homogeneous quasi-norm bound to its group.
#[derive(Clone, Debug)]
pub struct QuasiNorm {
    group: Arc<HomogeneousGroup>,
    kind: NormKind,
    /// Anisotropic gauge exponents 2M/nu_i.
    exponents: Vec<i32>,
    two_m: f64,
}

impl QuasiNorm {
    pub fn new(group: Arc<HomogeneousGroup>, kind: NormKind) -> Result<Self> {
        let origin = Origin::new(MODULE, "QuasiNorm::new");
        let mut exponents = Vec::new();
        let mut two_m = 2.0;
        match kind {
            NormKind::Euclidean => {
                if !group.has_unit_weights() || group.law() != GroupLaw::Abelian {
                    return Err(Error::parameter(
                        origin,
                        "euclidean norm is homogeneous only on abelian groups with unit weights",
                    ));
                }
            }
            NormKind::Koranyi | NormKind::Cygan => {
                if !matches!(group.law(), GroupLaw::Heisenberg { .. }) {
                    return Err(Error::parameter(
                        origin,
                        format!("{} gauge requires a Heisenberg group", kind.as_str()),
                    ));
                }
            }
            NormKind::Anisotropic => {
                // M = lcm(numerators) / gcd(denominators) makes every M / nu_i
                // a positive integer.
                let l = group.weights().iter().fold(1u64, |acc, w| acc.lcm(&w.numer()));
                let g = group.weights().iter().fold(0u64, |acc, w| acc.gcd(&w.denom()));
                for w in group.weights() {
                    let e = 2 * (l / w.numer()) * (w.denom() / g);
                    exponents.push(i32::try_from(e).map_err(|_| {
                        Error::parameter(origin, "anisotropic gauge exponent overflows")
                    })?);
                }
                two_m = 2.0 * l as f64 / g as f64;
            }
        }
        Ok(Self {
            group,
            kind,
            exponents,
            two_m,
        })
    }

    pub fn group(&self) -> &HomogeneousGroup {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<HomogeneousGroup> {
        &self.group
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn is_true_norm(&self) -> bool {
        match self.kind {
            NormKind::Euclidean | NormKind::Cygan => true,
            NormKind::Koranyi => false,
            NormKind::Anisotropic => self.group.has_unit_weights() && self.two_m == 2.0,
        }
    }

    /// Homogeneous dimension of the underlying group.
    pub fn q(&self) -> f64 {
        self.group.homogeneous_dimension()
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.group.name(), self.kind.as_str())
    }

    pub fn eval(&self, x: &GroupPoint) -> Result<f64> {
        self.group.check_dim("quasi_norm", x)?;
        Ok(self.eval_slice(x.coords()))
    }

    pub(crate) fn eval_slice(&self, x: &[f64]) -> f64 {
        match self.kind {
            NormKind::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::Koranyi | NormKind::Cygan => {
                let last = x.len() - 1;
                let z2: f64 = x[..last].iter().map(|v| v * v).sum();
                let t = x[last];
                let c = if self.kind == NormKind::Cygan { 16.0 } else { 1.0 };
                (z2 * z2 + c * t * t).sqrt().sqrt()
            }
            NormKind::Anisotropic => {
                // Factor out the largest term to avoid overflow in high powers.
                let scale = x
                    .iter()
                    .zip(self.group.weight_values())
                    .map(|(v, nu)| v.abs().powf(1.0 / nu))
                    .fold(0.0_f64, f64::max);
                if scale == 0.0 {
                    return 0.0;
                }
                let sum: f64 = x
                    .iter()
                    .zip(self.group.weight_values())
                    .zip(&self.exponents)
                    .map(|((v, nu), e)| (v.abs() / scale.powf(*nu)).powi(*e))
                    .sum();
                scale * sum.powf(1.0 / self.two_m)
            }
        }
    }

    /// Kernel value `|y^{-1} x|`.
    pub(crate) fn distance_slice(&self, y: &[f64], x: &[f64], scratch: &mut [f64]) -> f64 {
        self.group.left_quotient_into(y, x, scratch);
        self.eval_slice(scratch)
    }

    /// Density of the quasi-sphere measure with respect to the Euclidean
    /// surface measure, expressed at a Euclidean unit vector `w`:
    /// `(sum nu_i w_i^2) |w|^{-Q}`.
    pub(crate) fn sphere_density(&self, w: &[f64]) -> f64 {
        let radial: f64 = w
            .iter()
            .zip(self.group.weight_values())
            .map(|(v, nu)| nu * v * v)
            .sum();
        radial * self.eval_slice(w).powf(-self.q())
    }

    /// Membership in the quasi-ball `B(center, radius) = {y : |center^{-1} y| < radius}`.
    pub fn ball_contains(&self, center: &GroupPoint, radius: f64, y: &GroupPoint) -> Result<bool> {
        self.group.check_dim("quasi_ball", center)?;
        self.group.check_dim("quasi_ball", y)?;
        let mut scratch = vec![0.0; self.dim()];
        Ok(self.distance_slice(center.coords(), y.coords(), &mut scratch) < radius)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupAxiomReport {
    pub group: String,
    pub samples: usize,
    pub identity_residual: f64,
    pub inverse_residual: f64,
    pub associativity_residual: f64,
    pub automorphism_residual: f64,
}

impl GroupAxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.identity_residual
            .max(self.inverse_residual)
            .max(self.associativity_residual)
            .max(self.automorphism_residual)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TriangleCheck {
    NotAsserted,
    Checked { max_excess: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct NormAxiomReport {
    pub norm: String,
    pub samples: usize,
    pub homogeneity_max_rel: f64,
    pub symmetry_max_rel: f64,
    pub vanishes_at_origin: bool,
    pub positive_off_origin: bool,
    pub triangle: TriangleCheck,
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Samples the group axioms and the automorphism property of the dilations.
/// Residuals are measured relative to the coordinate scale of the inputs.
pub fn check_group_axioms(group: &HomogeneousGroup, sample_count: usize, seed: u64) -> GroupAxiomReport {
    let n = group.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = vec![0.0; n];
    let (mut a, mut b, mut c, mut d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut report = GroupAxiomReport {
        group: group.name().to_string(),
        samples: sample_count,
        identity_residual: 0.0,
        inverse_residual: 0.0,
        associativity_residual: 0.0,
        automorphism_residual: 0.0,
    };
    for _ in 0..sample_count {
        let x = random_point(&mut rng, n);
        let y = random_point(&mut rng, n);
        let z = random_point(&mut rng, n);
        let s = 10f64.powf(rng.random_range(-3.0..3.0));
        let scale = 1.0 + max_abs(&x).max(max_abs(&y)).max(max_abs(&z));

        group.mul_into(&x, &e, &mut a);
        group.mul_into(&e, &x, &mut b);
        report.identity_residual = report
            .identity_residual
            .max(max_abs_diff(&a, &x) / scale)
            .max(max_abs_diff(&b, &x) / scale);

        group.inv_into(&x, &mut a);
        group.mul_into(&x, &a, &mut b);
        group.mul_into(&a, &x, &mut c);
        report.inverse_residual = report
            .inverse_residual
            .max(max_abs(&b) / scale)
            .max(max_abs(&c) / scale);

        group.mul_into(&x, &y, &mut a);
        group.mul_into(&a, &z, &mut b);
        group.mul_into(&y, &z, &mut c);
        group.mul_into(&x, &c, &mut d);
        report.associativity_residual = report
            .associativity_residual
            .max(max_abs_diff(&b, &d) / (scale * scale));

        // D_s(xy) against D_s(x) D_s(y), compared after undoing the dilation.
        group.mul_into(&x, &y, &mut a);
        group.dilate_into(s, &a, &mut b);
        group.dilate_into(s, &x, &mut c);
        group.dilate_into(s, &y, &mut d);
        group.mul_into(&c, &d, &mut a);
        let mut back_lhs = vec![0.0; n];
        let mut back_rhs = vec![0.0; n];
        group.dilate_into(1.0 / s, &b, &mut back_lhs);
        group.dilate_into(1.0 / s, &a, &mut back_rhs);
        report.automorphism_residual = report
            .automorphism_residual
            .max(max_abs_diff(&back_lhs, &back_rhs) / (scale * scale));
    }
    report
}

/// Samples homogeneity, symmetry, nondegeneracy and, for true norms, the
/// triangle inequality. Deterministic per seed.
pub fn check_quasi_norm_axioms(norm: &QuasiNorm, sample_count: usize, seed: u64) -> NormAxiomReport {
    let group = norm.group();
    let n = group.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    let mut homogeneity: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    let mut positive = true;
    let mut excess: f64 = 0.0;
    for _ in 0..sample_count.max(1) {
        let x = random_point(&mut rng, n);
        let y = random_point(&mut rng, n);
        let s = 10f64.powf(rng.random_range(-3.0..3.0));
        let nx = norm.eval_slice(&x);
        positive &= nx > 0.0;

        group.dilate_into(s, &x, &mut a);
        let nsx = norm.eval_slice(&a);
        homogeneity = homogeneity.max(((nsx - s * nx) / (s * nx)).abs());

        group.inv_into(&x, &mut a);
        symmetry = symmetry.max(((norm.eval_slice(&a) - nx) / nx).abs());

        if norm.is_true_norm() {
            group.mul_into(&x, &y, &mut b);
            let ny = norm.eval_slice(&y);
            let nxy = norm.eval_slice(&b);
            excess = excess.max((nxy - nx - ny) / (nx + ny));
        }
    }
    NormAxiomReport {
        norm: norm.label(),
        samples: sample_count,
        homogeneity_max_rel: homogeneity,
        symmetry_max_rel: symmetry,
        vanishes_at_origin: norm.eval_slice(&vec![0.0; n]) == 0.0,
        positive_off_origin: positive,
        triangle: if norm.is_true_norm() {
            TriangleCheck::Checked { max_excess: excess }
        } else {
            TriangleCheck::NotAsserted
        },
    }
}
