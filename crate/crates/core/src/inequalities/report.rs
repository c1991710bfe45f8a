use serde::Serialize;

/// Which way the inequality points once written as `ratio ? constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `ratio >= constant`
    Reverse,
    /// `ratio <= constant`
    Forward,
}

/// Parameters recorded with a report; absent ones are not applicable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ReportParams {
    #[serde(rename = "Q")]
    pub q_dim: f64,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl ReportParams {
    /// The `lambda` column, or `gamma` for the CKN family.
    pub fn lambda_or_gamma(&self) -> Option<f64> {
        self.lambda.or(self.gamma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub inequality: String,
    pub direction: Direction,
    pub params: ReportParams,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub analytic_constant: f64,
    pub constant_stderr: f64,
    pub sphere_measure: f64,
    pub sphere_stderr: f64,
    pub samples_used: usize,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn margin(&self) -> f64 {
        self.ratio - self.analytic_constant
    }

    pub fn combined_stderr(&self) -> f64 {
        self.ratio_stderr.hypot(self.constant_stderr)
    }

    /// Allowed violation of the inequality: three combined standard errors
    /// plus an absolute floor.
    pub fn tolerance(&self) -> f64 {
        3.0 * self.combined_stderr() + 1e-9
    }

    pub fn pass(&self) -> bool {
        let m = self.margin();
        if !m.is_finite() {
            return false;
        }
        match self.direction {
            Direction::Reverse => m >= -self.tolerance(),
            Direction::Forward => m <= self.tolerance(),
        }
    }

    pub fn view(&self) -> ReportView<'_> {
        ReportView {
            inequality: &self.inequality,
            direction: self.direction,
            params: &self.params,
            lhs: self.lhs,
            rhs: self.rhs,
            lhs_stderr: self.lhs_stderr,
            rhs_stderr: self.rhs_stderr,
            ratio: self.ratio,
            ratio_stderr: self.ratio_stderr,
            analytic_constant: self.analytic_constant,
            constant_stderr: self.constant_stderr,
            margin: self.margin(),
            combined_stderr: self.combined_stderr(),
            pass: self.pass(),
            sphere_measure: self.sphere_measure,
            sphere_stderr: self.sphere_stderr,
            samples_used: self.samples_used,
            notes: &self.notes,
        }
    }
}

impl Serialize for VerificationReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.view().serialize(serializer)
    }
}

/// Serialized form of a report, including the derived margin and verdict.
#[derive(Serialize)]
pub struct ReportView<'a> {
    pub inequality: &'a str,
    pub direction: Direction,
    pub params: &'a ReportParams,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub analytic_constant: f64,
    pub constant_stderr: f64,
    pub margin: f64,
    pub combined_stderr: f64,
    pub pass: bool,
    pub sphere_measure: f64,
    pub sphere_stderr: f64,
    pub samples_used: usize,
    pub notes: &'a [String],
}
