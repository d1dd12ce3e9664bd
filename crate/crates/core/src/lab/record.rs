use serde::Serialize;

use super::classify::Verdict;

/// One experiment datum; every row carries its full parameter tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub r: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Cone aperture in degrees.
    pub cone_theta: Option<f64>,
    pub u_lambda: Option<Vec<f64>>,
    pub quantity: String,
    pub value: f64,
    pub slope: Option<f64>,
    pub verdict: Verdict,
    pub seed: u64,
}

impl ResultRecord {
    pub fn new(experiment: &str, quantity: &str, value: f64, verdict: Verdict, seed: u64) -> Self {
        ResultRecord {
            experiment: experiment.to_string(),
            p: None,
            s: None,
            t: None,
            r: None,
            n: None,
            cone_theta: None,
            u_lambda: None,
            quantity: quantity.to_string(),
            value,
            slope: None,
            verdict,
            seed,
        }
    }

    pub fn with_pst(mut self, p: Option<f64>, s: Option<f64>, t: Option<f64>, r: Option<f64>) -> Self {
        self.p = p;
        self.s = s;
        self.t = t;
        self.r = r;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_slope(mut self, slope: f64) -> Self {
        self.slope = Some(slope);
        self
    }

    pub fn with_geometry(mut self, theta_deg: Option<f64>, u: Option<Vec<f64>>) -> Self {
        self.cone_theta = theta_deg;
        self.u_lambda = u;
        self
    }

    /// Pass/fail rows that failed.
    pub fn is_failure(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}
