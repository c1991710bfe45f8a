use serde::{Deserialize, Serialize};

use crate::error::{Error, Origin, Result};

const MODULE: &str = "inequalities";
const BALANCE_TOL: f64 = 1e-12;

/// `p' = p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    let origin = Origin::new(MODULE, "conjugate_exponent");
    if !p.is_finite() {
        return Err(Error::parameter(origin, format!("exponent must be finite, got {p}")));
    }
    if p == 1.0 {
        return Err(Error::parameter(origin, "p = 1 has no finite conjugate exponent"));
    }
    Ok(p / (p - 1.0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Both weight conditions.
    #[default]
    Full,
    /// Only the condition on `alpha`.
    ImprovedA,
    /// Only the condition on `beta`.
    ImprovedB,
}

/// Exponents of the bilinear inequalities. The conjugates `p'` and `q` are
/// always derived from `p` and `q'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityParams {
    #[serde(rename = "Q")]
    pub q_dim: f64,
    pub p: f64,
    pub q_prime: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub lambda: f64,
    #[serde(default)]
    pub variant: Variant,
}

impl InequalityParams {
    pub fn new(q_dim: f64, p: f64, q_prime: f64, alpha: f64, beta: f64, lambda: f64) -> Self {
        Self {
            q_dim,
            p,
            q_prime,
            alpha,
            beta,
            lambda,
            variant: Variant::Full,
        }
    }

    /// Parameters with `lambda` solved from the balance condition.
    pub fn balanced(q_dim: f64, p: f64, q_prime: f64, alpha: f64, beta: f64) -> Self {
        let lambda = balanced_lambda(q_dim, p, q_prime, alpha, beta);
        Self::new(q_dim, p, q_prime, alpha, beta, lambda)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn p_conj(&self) -> Result<f64> {
        conjugate_exponent(self.p)
    }

    /// `q = q' / (q' - 1)`.
    pub fn q(&self) -> Result<f64> {
        conjugate_exponent(self.q_prime)
    }

    /// `gamma = alpha + beta + 1`.
    pub fn gamma(&self) -> f64 {
        self.alpha + self.beta + 1.0
    }

    /// `1/q' + 1/p - (alpha + beta + lambda)/Q - 2`.
    pub fn balance_residual(&self) -> f64 {
        1.0 / self.q_prime + 1.0 / self.p - (self.alpha + self.beta + self.lambda) / self.q_dim - 2.0
    }
}

/// `lambda = Q (1/q' + 1/p - 2) - alpha - beta`.
pub fn balanced_lambda(q_dim: f64, p: f64, q_prime: f64, alpha: f64, beta: f64) -> f64 {
    q_dim * (1.0 / q_prime + 1.0 / p - 2.0) - alpha - beta
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub holds: bool,
    /// False for hypotheses dropped by an improved variant; those are
    /// reported but not enforced.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub conditions: Vec<ConditionCheck>,
    /// Consequences used by the two halves of the lower bound.
    pub derived: Vec<ConditionCheck>,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.conditions.iter().all(|c| c.holds || !c.required)
    }

    pub fn failures(&self) -> Vec<&ConditionCheck> {
        self.conditions.iter().filter(|c| c.required && !c.holds).collect()
    }

    pub fn holds(&self, name: &str) -> bool {
        self.conditions
            .iter()
            .chain(&self.derived)
            .any(|c| c.name == name && c.holds)
    }

    /// Parameter error naming every violated condition.
    pub fn require(&self, origin: Origin) -> Result<()> {
        let failed = self.failures();
        if failed.is_empty() {
            return Ok(());
        }
        let names: Vec<String> = failed.iter().map(|c| format!("{} ({})", c.name, c.detail)).collect();
        Err(Error::parameter(origin, format!("inadmissible parameters: {}", names.join("; "))))
    }
}

fn check(name: &str, holds: bool, required: bool, detail: String) -> ConditionCheck {
    ConditionCheck {
        name: name.to_string(),
        holds,
        required,
        detail,
    }
}

pub const COND_LAMBDA: &str = "lambda > 0";
pub const COND_P: &str = "0 < p < 1";
pub const COND_Q_PRIME: &str = "0 < q' < 1";
pub const COND_ALPHA_LOW: &str = "0 <= alpha";
pub const COND_ALPHA_HIGH: &str = "alpha < -Q/q";
pub const COND_BETA_LOW: &str = "0 <= beta";
pub const COND_BETA_HIGH: &str = "beta < -Q/p'";
pub const COND_BALANCE: &str = "balance condition";
pub const FACT_OUTER_BALL: &str = "Q + (alpha + lambda) q < 0";
pub const FACT_INNER_BALL: &str = "Q + beta p' > 0";
pub const FACT_OUTER_COMPLEMENT: &str = "Q + alpha q > 0";
pub const FACT_INNER_COMPLEMENT: &str = "Q + (beta + lambda) p' < 0";

/// Checks every hypothesis of the reverse bilinear inequality and lists the
/// derived facts. Never fails; unusable exponents show up as failed checks.
pub fn validate_params(params: &InequalityParams) -> AdmissibilityReport {
    let InequalityParams {
        q_dim,
        p,
        q_prime,
        alpha,
        beta,
        lambda,
        variant,
    } = *params;
    let pp = conjugate_exponent(p).unwrap_or(f64::NAN);
    let q = conjugate_exponent(q_prime).unwrap_or(f64::NAN);
    let need_alpha = variant != Variant::ImprovedB;
    let need_beta = variant != Variant::ImprovedA;
    let dropped = |need: bool, s: String| {
        if need {
            s
        } else {
            format!("{s}; not required by this variant (unverified hypothesis)")
        }
    };
    let alpha_max = -q_dim / q;
    let beta_max = -q_dim / pp;
    let residual = params.balance_residual();
    let lhs = 1.0 / q_prime + 1.0 / p;
    let conditions = vec![
        check(COND_LAMBDA, lambda > 0.0, true, format!("lambda = {lambda}")),
        check(COND_P, p > 0.0 && p < 1.0, true, format!("p = {p}")),
        check(COND_Q_PRIME, q_prime > 0.0 && q_prime < 1.0, true, format!("q' = {q_prime}")),
        check(COND_ALPHA_LOW, alpha >= 0.0, need_alpha, dropped(need_alpha, format!("alpha = {alpha}"))),
        check(
            COND_ALPHA_HIGH,
            alpha < alpha_max,
            need_alpha,
            dropped(need_alpha, format!("alpha = {alpha}, -Q/q = {alpha_max}")),
        ),
        check(COND_BETA_LOW, beta >= 0.0, need_beta, dropped(need_beta, format!("beta = {beta}"))),
        check(
            COND_BETA_HIGH,
            beta < beta_max,
            need_beta,
            dropped(need_beta, format!("beta = {beta}, -Q/p' = {beta_max}")),
        ),
        check(
            COND_BALANCE,
            residual.abs() <= BALANCE_TOL * lhs.abs().max(1.0),
            true,
            if residual.abs() <= BALANCE_TOL * lhs.abs().max(1.0) {
                format!("1/q' + 1/p = {lhs}")
            } else {
                format!(
                    "balance condition failed: 1/q' + 1/p = {lhs} but (alpha + beta + lambda)/Q + 2 = {}",
                    lhs - residual
                )
            },
        ),
    ];
    let outer_ball = q_dim + (alpha + lambda) * q;
    let inner_ball = q_dim + beta * pp;
    let outer_comp = q_dim + alpha * q;
    let inner_comp = q_dim + (beta + lambda) * pp;
    let derived = vec![
        check(FACT_OUTER_BALL, outer_ball < 0.0, true, format!("value {outer_ball}")),
        check(FACT_INNER_BALL, inner_ball > 0.0, true, format!("value {inner_ball}")),
        check(FACT_OUTER_COMPLEMENT, outer_comp > 0.0, true, format!("value {outer_comp}")),
        check(FACT_INNER_COMPLEMENT, inner_comp < 0.0, true, format!("value {inner_comp}")),
    ];
    AdmissibilityReport { conditions, derived }
}
