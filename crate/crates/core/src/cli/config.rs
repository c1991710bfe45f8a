//! Run configuration. One TOML (or JSON) document with sections; unknown
//! keys are rejected and every error names the offending key path.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{HomogeneousGroup, NormKind, QuasiNorm, Weight};
use crate::inequalities::{balanced_lambda, InequalityKind, InequalityParams, Variant};
use crate::operators::RadialProfile;
use crate::quadrature::QuadratureSpec;
use crate::trials::{make_profile, FamilyTag, SearchSpec, TrialFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupName {
    /// R^n with the Euclidean law and unit weights.
    Abelian,
    /// H^n.
    Heisenberg,
    /// R^N with the Euclidean law and the listed weights.
    Graded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: GroupName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Weight>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    /// Defaults to euclidean, koranyi or anisotropic by group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<NormKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityConfig {
    pub name: InequalityKind,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<f64>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    /// Solved from the balance condition when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub variant: Variant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub family: FamilyTag,
    /// Profile parameters for `verify` and `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    /// Search box for `estimate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_box: Option<Vec<(f64, f64)>>,
    #[serde(default = "yes")]
    pub monotone_decreasing: bool,
}

fn yes() -> bool {
    true
}

impl TrialConfig {
    pub fn family(&self) -> Result<TrialFamily> {
        let fam = TrialFamily {
            family_tag: self.family,
            param_box: self.param_box.clone().unwrap_or_else(|| self.family.default_box()),
            monotone_decreasing: self.monotone_decreasing,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn profile(&self) -> Result<RadialProfile> {
        let params = self.params.clone().unwrap_or_else(|| self.family.default_params());
        make_profile(&self.family()?, &params)
    }
}

/// Cartesian grid of parameter points; `lambda` defaults to the balanced
/// value at each point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<Vec<f64>>,
    #[serde(default = "zero_list")]
    pub alpha: Vec<f64>,
    #[serde(default = "zero_list")]
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxiomsConfig {
    pub samples: usize,
}

impl Default for AxiomsConfig {
    fn default() -> Self {
        Self { samples: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the quadrature and search seeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub group: GroupConfig,
    #[serde(default)]
    pub norm: NormConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequality: Option<InequalityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<TrialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_h: Option<TrialConfig>,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub axioms: AxiomsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn config_error(message: impl Into<String>) -> Error {
    Error::Config { message: message.into() }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| {
            let line = e.span().map(|s| format!(" (line {})", line_of(text, s.start))).unwrap_or_default();
            config_error(format!("syntax: {}{line}", e.message().trim()))
        })?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.inner();
            let line = inner.span().map(|s| format!(" (line {})", line_of(text, s.start))).unwrap_or_default();
            config_error(format!("key `{path}`: {}{line}", inner.message().trim()))
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.inner();
            config_error(format!("key `{path}`: {inner}"))
        })
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    /// Applies the seed override and fills every defaulted choice so that
    /// the serialized config reproduces the run exactly.
    pub fn resolve(mut self, seed_override: Option<u64>) -> Result<Self> {
        if seed_override.is_some() {
            self.seed = seed_override;
        }
        if let Some(seed) = self.seed {
            self.quadrature.seed = seed;
            self.search.seed = seed;
        }
        let group = self.build_group()?;
        if self.norm.kind.is_none() {
            self.norm.kind = Some(match self.group.name {
                GroupName::Abelian => NormKind::Euclidean,
                GroupName::Heisenberg => NormKind::Koranyi,
                GroupName::Graded => NormKind::Anisotropic,
            });
        }
        let q_dim = group.homogeneous_dimension();
        if let Some(ineq) = &mut self.inequality {
            if ineq.name.uses_bilinear_params() {
                let q_prime = ineq
                    .q_prime
                    .ok_or_else(|| config_error(format!("key `inequality.q_prime`: required by {}", ineq.name)))?;
                if ineq.lambda.is_none() && self.sweep.is_none() {
                    ineq.lambda = Some(balanced_lambda(q_dim, ineq.p, q_prime, ineq.alpha, ineq.beta));
                }
            }
        }
        self.quadrature.validate()?;
        self.search.validate()?;
        Ok(self)
    }

    pub fn build_group(&self) -> Result<HomogeneousGroup> {
        let g = &self.group;
        let need_n = || g.n.ok_or_else(|| config_error("key `group.n`: required for this group"));
        match g.name {
            GroupName::Abelian => HomogeneousGroup::abelian(need_n()?),
            GroupName::Heisenberg => HomogeneousGroup::heisenberg(need_n()?),
            GroupName::Graded => HomogeneousGroup::graded(
                g.weights
                    .clone()
                    .ok_or_else(|| config_error("key `group.weights`: required for a graded group"))?,
            ),
        }
    }

    pub fn build_norm(&self) -> Result<QuasiNorm> {
        let group = Arc::new(self.build_group()?);
        let kind = self.norm.kind.unwrap_or(NormKind::Euclidean);
        QuasiNorm::new(group, kind)
    }

    pub fn inequality(&self) -> Result<&InequalityConfig> {
        self.inequality
            .as_ref()
            .ok_or_else(|| config_error("key `inequality`: section required for this command"))
    }

    /// Parameters at the configured point. `q_prime` defaults to `p` for the
    /// single-profile inequalities, which never read it.
    pub fn params(&self, q_dim: f64) -> Result<InequalityParams> {
        let ineq = self.inequality()?;
        Ok(point_params(ineq, q_dim, ineq.p, ineq.q_prime.unwrap_or(ineq.p), ineq.alpha, ineq.beta, ineq.lambda))
    }

    pub fn trial(&self) -> Result<&TrialConfig> {
        self.trial.as_ref().ok_or_else(|| config_error("key `trial`: section required for this command"))
    }

    /// `trial_h` when present; otherwise the `trial` section for the bilinear
    /// forms.
    pub fn second_trial(&self, kind: InequalityKind) -> Result<Option<&TrialConfig>> {
        if kind.arity() == 1 {
            if self.trial_h.is_some() {
                return Err(config_error(format!("key `trial_h`: {kind} takes one profile")));
            }
            return Ok(None);
        }
        Ok(Some(self.trial_h.as_ref().map_or_else(|| self.trial(), Ok)?))
    }
}

pub(crate) fn point_params(
    ineq: &InequalityConfig,
    q_dim: f64,
    p: f64,
    q_prime: f64,
    alpha: f64,
    beta: f64,
    lambda: Option<f64>,
) -> InequalityParams {
    let lambda = lambda.unwrap_or_else(|| {
        if ineq.name.uses_bilinear_params() {
            balanced_lambda(q_dim, p, q_prime, alpha, beta)
        } else {
            0.0
        }
    });
    InequalityParams::new(q_dim, p, q_prime, alpha, beta, lambda).with_variant(ineq.variant)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[group]
name = "heisenberg"
n = 1

[inequality]
name = "reverse_hardy"
p = 0.5

[trial]
family = "exp_decay"
params = [1.0]
"#;

    #[test]
    fn parses_and_resolves() {
        let cfg = RunConfig::from_toml_str(BASIC).unwrap().resolve(Some(9)).unwrap();
        assert_eq!(cfg.norm.kind, Some(NormKind::Koranyi));
        assert_eq!(cfg.quadrature.seed, 9);
        assert_eq!(cfg.search.seed, 9);
        assert_eq!(cfg.build_norm().unwrap().q(), 4.0);
    }

    #[test]
    fn unknown_key_names_its_path_and_line() {
        let text = BASIC.replace("p = 0.5", "p = 0.5\nlambada = 1.0");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("inequality"), "{err}");
        assert!(err.contains("lambada"), "{err}");
        assert!(err.contains("line 9"), "{err}");
    }

    #[test]
    fn wrong_type_names_its_path() {
        let text = BASIC.replace("n = 1", "n = \"one\"");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("group.n"), "{err}");
    }

    #[test]
    fn json_and_toml_agree() {
        let a = RunConfig::from_toml_str(BASIC).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(RunConfig::from_json_str(&json).unwrap(), a);
    }

    #[test]
    fn bilinear_lambda_is_balanced() {
        let text = BASIC
            .replace("reverse_hardy", "reverse_stein_weiss")
            .replace("p = 0.5", "p = 0.5\nq_prime = 0.5");
        let cfg = RunConfig::from_toml_str(&text).unwrap().resolve(None).unwrap();
        assert_eq!(cfg.inequality.unwrap().lambda, Some(8.0));
    }
}
