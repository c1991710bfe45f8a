//! Parametric trial profiles and a derivative-free search for the smallest
//! inequality ratio.
//!
//! Searches work in unit coordinates `u in [0, 1]^d` mapped onto the
//! parameter box log-uniformly. Every evaluation
//! reuses the quadrature seed of the caller, so ratios at different
//! parameters share their random numbers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorClass, Origin, Result};
use crate::group::QuasiNorm;
use crate::inequalities::{validate_params, verify, Direction, InequalityKind, InequalityParams};
use crate::operators::RadialProfile;
use crate::quadrature::QuadratureSpec;

const MODULE: &str = "trials";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    /// `e^{-c r}`
    ExpDecay,
    /// `(1 + r)^{-s}`
    PowerDecay,
    /// `e^{-c r^2}`
    Gaussian,
    /// `exp(-1 / (1 - (r/R)^2))` on `[0, R)`, zero beyond.
    SmoothBump,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 4] = [Self::ExpDecay, Self::PowerDecay, Self::Gaussian, Self::SmoothBump];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExpDecay => "exp_decay",
            Self::PowerDecay => "power_decay",
            Self::Gaussian => "gaussian",
            Self::SmoothBump => "smooth_bump",
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Self::ExpDecay | Self::Gaussian => &["c"],
            Self::PowerDecay => &["s"],
            Self::SmoothBump => &["R"],
        }
    }

    pub fn default_box(&self) -> Vec<(f64, f64)> {
        match self {
            Self::ExpDecay | Self::Gaussian => vec![(0.1, 10.0)],
            Self::PowerDecay => vec![(0.5, 50.0)],
            Self::SmoothBump => vec![(0.1, 10.0)],
        }
    }

    /// Parameters used when a single representative is needed.
    pub fn default_params(&self) -> Vec<f64> {
        match self {
            Self::ExpDecay | Self::Gaussian | Self::SmoothBump => vec![1.0],
            Self::PowerDecay => vec![40.0],
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| {
            Error::parameter(
                Origin::new(MODULE, "FamilyTag::from_str"),
                format!("unknown family `{s}`, expected exp_decay, power_decay, gaussian or smooth_bump"),
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialFamily {
    pub family_tag: FamilyTag,
    pub param_box: Vec<(f64, f64)>,
    #[serde(default = "default_true")]
    pub monotone_decreasing: bool,
}

fn default_true() -> bool {
    true
}

impl TrialFamily {
    pub fn new(tag: FamilyTag) -> Self {
        Self {
            family_tag: tag,
            param_box: tag.default_box(),
            monotone_decreasing: true,
        }
    }

    pub fn with_box(mut self, param_box: Vec<(f64, f64)>) -> Result<Self> {
        self.param_box = param_box;
        self.validate()?;
        Ok(self)
    }

    /// The four built-in families with their default boxes.
    pub fn defaults() -> Vec<Self> {
        FamilyTag::ALL.into_iter().map(Self::new).collect()
    }

    pub fn dim(&self) -> usize {
        self.param_box.len()
    }

    pub fn validate(&self) -> Result<()> {
        let origin = Origin::new(MODULE, "TrialFamily::validate");
        let want = self.family_tag.param_names().len();
        if self.param_box.len() != want {
            return Err(Error::parameter(
                origin,
                format!("{} takes {want} parameter(s), box has {}", self.family_tag, self.param_box.len()),
            ));
        }
        for &(lo, hi) in &self.param_box {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::parameter(origin, format!("box [{lo}, {hi}] must satisfy 0 < lo <= hi < inf")));
            }
        }
        Ok(())
    }

    fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        self.param_box
            .iter()
            .zip(u)
            .map(|(&(lo, hi), &t)| {
                let t = t.clamp(0.0, 1.0);
                let v = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
                v.clamp(lo, hi)
            })
            .collect()
    }
}

/// Instantiates `family` at `params`, with its analytic derivative.
pub fn make_profile(family: &TrialFamily, params: &[f64]) -> Result<RadialProfile> {
    let origin = Origin::new(MODULE, "make_profile");
    family.validate()?;
    if params.len() != family.dim() {
        return Err(Error::parameter(
            origin,
            format!("{} takes {} parameter(s), got {}", family.family_tag, family.dim(), params.len()),
        ));
    }
    for ((&v, &(lo, hi)), name) in params.iter().zip(&family.param_box).zip(family.family_tag.param_names()) {
        if !(v >= lo && v <= hi) {
            return Err(Error::parameter(
                origin,
                format!("{} parameter {name} = {v} outside [{lo}, {hi}]", family.family_tag),
            ));
        }
    }
    let tag = family.family_tag.as_str();
    let a = params[0];
    let profile = match family.family_tag {
        FamilyTag::ExpDecay => {
            RadialProfile::new(tag, vec![a], move |r| (-a * r).exp()).with_derivative(move |r| -a * (-a * r).exp())
        }
        FamilyTag::PowerDecay => RadialProfile::new(tag, vec![a], move |r| (1.0 + r).powf(-a))
            .with_derivative(move |r| -a * (1.0 + r).powf(-a - 1.0)),
        FamilyTag::Gaussian => RadialProfile::new(tag, vec![a], move |r| (-a * r * r).exp())
            .with_derivative(move |r| -2.0 * a * r * (-a * r * r).exp()),
        FamilyTag::SmoothBump => RadialProfile::new(tag, vec![a], move |r| bump(r / a))
            .with_derivative(move |r| {
                let u = r / a;
                if u >= 1.0 {
                    0.0
                } else {
                    let d = 1.0 - u * u;
                    bump(u) * (-2.0 * u / (d * d)) / a
                }
            })
            .with_support(a),
    };
    Ok(profile.tagged_decreasing(family.monotone_decreasing))
}

fn bump(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    /// Low-discrepancy (Halton) points over the box, starting at its centre.
    Grid,
    /// Nelder-Mead simplex with restarts.
    NelderMead,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpec {
    pub method: SearchMethod,
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            method: SearchMethod::NelderMead,
            budget: 60,
            seed: 20_240_601,
            restarts: 3,
        }
    }
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        let origin = Origin::new(MODULE, "SearchSpec::validate");
        if self.budget < 1 {
            return Err(Error::parameter(origin, "budget must be at least 1"));
        }
        if self.method == SearchMethod::NelderMead && self.restarts < 1 {
            return Err(Error::parameter(origin, "restarts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    /// Parameter or precondition failure at this point.
    Rejected,
    /// Divergent, degenerate or non-finite evaluation.
    Numerical,
}

/// One ratio evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialEvaluation {
    pub index: usize,
    pub restart: usize,
    pub params: Vec<f64>,
    pub status: TrialStatus,
    pub ratio: Option<f64>,
    pub ratio_stderr: Option<f64>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestConstantEstimate {
    pub inequality: InequalityKind,
    pub families: Vec<FamilyTag>,
    pub param_names: Vec<String>,
    pub min_ratio: f64,
    pub min_ratio_stderr: f64,
    pub argmin: Vec<f64>,
    pub analytic_constant: f64,
    pub evaluations: usize,
    pub trace: Vec<TrialEvaluation>,
}

/// Minimizes the ratio of a reverse inequality over the parameters of one
/// family, or of a pair `(f, h)` for the bilinear forms.
///
/// Restarts run in parallel; restart `k` receives `budget / restarts`
/// evaluations plus one if `k < budget % restarts`. Each restart's sequence
/// of points does not depend on the budget, so a larger budget only extends
/// it and can never raise the reported minimum.
pub fn estimate_best_constant(
    inequality: InequalityKind,
    params: &InequalityParams,
    families: &[TrialFamily],
    search: &SearchSpec,
    norm: &QuasiNorm,
    spec: &QuadratureSpec,
) -> Result<BestConstantEstimate> {
    let origin = Origin::new(MODULE, "estimate_best_constant");
    search.validate()?;
    spec.validate()?;
    if inequality.direction() != Direction::Reverse {
        return Err(Error::parameter(
            origin,
            format!("{inequality} is a forward inequality; only reverse constants are estimated"),
        ));
    }
    if families.len() != inequality.arity() {
        return Err(Error::parameter(
            origin,
            format!("{inequality} takes {} family(ies), got {}", inequality.arity(), families.len()),
        ));
    }
    for fam in families {
        fam.validate()?;
    }
    if inequality.uses_bilinear_params() {
        validate_params(params).require(origin)?;
    }
    let problem = Problem {
        inequality,
        params,
        families,
        norm,
        spec,
    };
    let dim: usize = families.iter().map(TrialFamily::dim).sum();
    let runs: Vec<Vec<(Vec<f64>, Outcome)>> = match search.method {
        SearchMethod::Grid => {
            let points: Vec<Vec<f64>> = (0..search.budget).map(|k| halton(k, dim)).collect();
            vec![points.par_iter().map(|u| problem.eval(u)).collect()]
        }
        SearchMethod::NelderMead => (0..search.restarts)
            .into_par_iter()
            .map(|k| {
                let share = search.budget / search.restarts + usize::from(k < search.budget % search.restarts);
                let start = if k == 0 {
                    vec![0.5; dim]
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
                    rng.set_stream(k as u64);
                    (0..dim).map(|_| rng.random::<f64>()).collect()
                };
                nelder_mead(&|u: &[f64]| problem.eval(u), start, share)
            })
            .collect(),
    };

    let mut trace = Vec::new();
    for (restart, run) in runs.into_iter().enumerate() {
        for (params, outcome) in run {
            let index = trace.len();
            trace.push(outcome.into_evaluation(index, restart, params));
        }
    }
    let best = trace
        .iter()
        .filter(|e| e.status == TrialStatus::Ok)
        .min_by(|a, b| {
            a.ratio
                .partial_cmp(&b.ratio)
                .unwrap_or(Ordering::Equal)
                .then_with(|| lexicographic(&a.params, &b.params))
        })
        .cloned();
    let Some(best) = best else {
        let first = trace.first().and_then(|e| e.message.clone()).unwrap_or_default();
        return Err(Error::Estimation {
            origin,
            message: format!("all {} evaluations failed; first: {first}", trace.len()),
        });
    };
    let (f, h) = problem.profiles_at(&best.params)?;
    let report = verify(inequality, &f, h.as_ref(), params, norm, spec)?;
    Ok(BestConstantEstimate {
        inequality,
        families: families.iter().map(|f| f.family_tag).collect(),
        param_names: param_names(families),
        min_ratio: best.ratio.unwrap_or(f64::NAN),
        min_ratio_stderr: best.ratio_stderr.unwrap_or(f64::NAN),
        argmin: best.params,
        analytic_constant: report.analytic_constant,
        evaluations: trace.len(),
        trace,
    })
}

/// Column names of the parameter vector, prefixed `f.` and `h.` for pairs.
pub fn param_names(families: &[TrialFamily]) -> Vec<String> {
    let prefixes = ["f", "h"];
    families
        .iter()
        .enumerate()
        .flat_map(|(i, fam)| {
            fam.family_tag.param_names().iter().map(move |n| {
                if families.len() == 1 {
                    (*n).to_string()
                } else {
                    format!("{}.{n}", prefixes[i.min(1)])
                }
            })
        })
        .collect()
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

struct Problem<'a> {
    inequality: InequalityKind,
    params: &'a InequalityParams,
    families: &'a [TrialFamily],
    norm: &'a QuasiNorm,
    spec: &'a QuadratureSpec,
}

#[derive(Clone, Debug)]
enum Outcome {
    Ratio(f64, f64),
    Failed(TrialStatus, String),
}

impl Outcome {
    /// Value minimized by the simplex; failures rank last.
    fn objective(&self) -> f64 {
        match self {
            Outcome::Ratio(r, _) => *r,
            Outcome::Failed(..) => f64::INFINITY,
        }
    }

    fn into_evaluation(self, index: usize, restart: usize, params: Vec<f64>) -> TrialEvaluation {
        let (status, ratio, ratio_stderr, message) = match self {
            Outcome::Ratio(r, se) => (TrialStatus::Ok, Some(r), Some(se), None),
            Outcome::Failed(s, m) => (s, None, None, Some(m)),
        };
        TrialEvaluation {
            index,
            restart,
            params,
            status,
            ratio,
            ratio_stderr,
            message,
        }
    }
}

impl Problem<'_> {
    fn split_params(&self, all: &[f64]) -> Vec<Vec<f64>> {
        let mut rest = all;
        self.families
            .iter()
            .map(|f| {
                let (head, tail) = rest.split_at(f.dim());
                rest = tail;
                head.to_vec()
            })
            .collect()
    }

    fn profiles_at(&self, all: &[f64]) -> Result<(RadialProfile, Option<RadialProfile>)> {
        let parts = self.split_params(all);
        let f = make_profile(&self.families[0], &parts[0])?;
        let h = match self.families.get(1) {
            Some(fam) => Some(make_profile(fam, &parts[1])?),
            None => None,
        };
        Ok((f, h))
    }

    fn eval(&self, u: &[f64]) -> (Vec<f64>, Outcome) {
        let mut params = Vec::with_capacity(u.len());
        let mut offset = 0;
        for fam in self.families {
            params.extend(fam.from_unit(&u[offset..offset + fam.dim()]));
            offset += fam.dim();
        }
        let outcome = self
            .profiles_at(&params)
            .and_then(|(f, h)| verify(self.inequality, &f, h.as_ref(), self.params, self.norm, self.spec));
        let outcome = match outcome {
            Ok(rep) if rep.ratio.is_finite() => Outcome::Ratio(rep.ratio, rep.ratio_stderr),
            Ok(rep) => Outcome::Failed(TrialStatus::Numerical, format!("ratio is {}", rep.ratio)),
            Err(e) => {
                let status = match e.class() {
                    ErrorClass::Input => TrialStatus::Rejected,
                    ErrorClass::Numerical => TrialStatus::Numerical,
                };
                Outcome::Failed(status, e.to_string())
            }
        };
        (params, outcome)
    }
}

/// Point `k` of the Halton sequence in `[0, 1]^dim`, shifted by 1/2 mod 1
/// so that `k = 0` is the centre.
fn halton(k: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..dim)
        .map(|d| {
            let base = PRIMES[d % PRIMES.len()];
            let mut f = 1.0;
            let mut r = 0.0;
            let mut i = k;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            (r + 0.5) % 1.0
        })
        .collect()
}

/// Nelder-Mead on `[0, 1]^d` with points clamped to the cube. Returns every
/// evaluation in order; stops at `budget` evaluations or when the simplex
/// has collapsed.
fn nelder_mead<F>(f: &F, start: Vec<f64>, budget: usize) -> Vec<(Vec<f64>, Outcome)>
where
    F: Fn(&[f64]) -> (Vec<f64>, Outcome),
{
    const STEP: f64 = 0.25;
    let dim = start.len();
    let mut log: Vec<(Vec<f64>, Outcome)> = Vec::new();
    let eval = |x: &[f64], log: &mut Vec<(Vec<f64>, Outcome)>| -> Option<f64> {
        if log.len() >= budget {
            return None;
        }
        let (p, o) = f(x);
        let v = o.objective();
        log.push((p, o));
        Some(v)
    };
    let clamp = |x: Vec<f64>| -> Vec<f64> { x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect() };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let Some(v0) = eval(&start, &mut log) else { return log };
    simplex.push((start.clone(), v0));
    for i in 0..dim {
        let mut x = start.clone();
        x[i] = if x[i] + STEP <= 1.0 { x[i] + STEP } else { x[i] - STEP };
        let Some(v) = eval(&x, &mut log) else { return log };
        simplex.push((x, v));
    }
    if dim == 0 {
        return log;
    }
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lexicographic(&a.0, &b.0)));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let size = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let flat = best.is_finite() && (worst - best).abs() <= 1e-10 * best.abs().max(1e-300);
        if size < 1e-6 || flat {
            return log;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            clamp(centroid.iter().zip(&simplex[dim].0).map(|(c, w)| c + t * (w - c)).collect())
        };
        let xr = along(-1.0);
        let Some(fr) = eval(&xr, &mut log) else { return log };
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let Some(fe) = eval(&xe, &mut log) else { return log };
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let xc = if fr < worst { along(-0.5) } else { along(0.5) };
            let Some(fc) = eval(&xc, &mut log) else { return log };
            if fc < fr.min(worst) {
                simplex[dim] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let xs: Vec<f64> = x0.iter().zip(&item.0).map(|(a, b)| a + 0.5 * (b - a)).collect();
                    let Some(v) = eval(&xs, &mut log) else { return log };
                    *item = (xs, v);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_match_their_formulas() {
        let e = make_profile(&TrialFamily::new(FamilyTag::ExpDecay), &[1.0]).unwrap();
        assert_eq!(e.value(2.0), (-2.0f64).exp());
        assert_eq!(e.derivative(2.0), -(-2.0f64).exp());
        let p = make_profile(&TrialFamily::new(FamilyTag::PowerDecay), &[6.0]).unwrap();
        assert!((p.value(1.0) - 2f64.powi(-6)).abs() < 1e-16);
        let b = make_profile(&TrialFamily::new(FamilyTag::SmoothBump), &[2.0]).unwrap();
        assert_eq!(b.value(2.0), 0.0);
        assert_eq!(b.value(3.0), 0.0);
        assert!(b.value(1.0) > 0.0);
        assert_eq!(b.support_end(), Some(2.0));
    }

    #[test]
    fn analytic_derivatives_agree_with_differences() {
        for fam in TrialFamily::defaults() {
            let prof = make_profile(&fam, &[1.7]).unwrap();
            for r in [0.1, 0.5, 0.9, 1.5] {
                let h = 1e-6;
                let fd = (prof.value(r + h) - prof.value(r - h)) / (2.0 * h);
                assert!((fd - prof.derivative(r)).abs() < 1e-7, "{} at {r}", fam.family_tag);
            }
            prof.check_decreasing(1000).unwrap();
        }
    }

    #[test]
    fn out_of_box_is_a_parameter_error() {
        let err = make_profile(&TrialFamily::new(FamilyTag::Gaussian), &[20.0]).unwrap_err();
        assert!(matches!(err, Error::Parameter { .. }));
        assert!(make_profile(&TrialFamily::new(FamilyTag::Gaussian), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn halton_starts_at_centre() {
        assert_eq!(halton(0, 3), vec![0.5; 3]);
        assert_eq!(halton(1, 2), vec![0.0, 0.5 + 1.0 / 3.0]);
    }

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let f = |u: &[f64]| {
            let v = (u[0] - 0.3).powi(2) + (u[1] - 0.7).powi(2);
            (u.to_vec(), Outcome::Ratio(v, 0.0))
        };
        let log = nelder_mead(&f, vec![0.5, 0.5], 400);
        let best = log.iter().map(|(_, o)| o.objective()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8, "{best}");
    }
}
