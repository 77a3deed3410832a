use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameter counts, weight-norm bounds and output bound of the branch and trunk
/// classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionClassSpec {
    pub d_b: u64,
    pub d_t: u64,
    pub w_b: f64,
    pub w_t: f64,
    /// Sup-norm bound `C` on branch and trunk outputs.
    #[serde(default = "one")]
    pub c: f64,
    /// Input-Lipschitz constants; carried as metadata only.
    #[serde(default)]
    pub l_b: Option<f64>,
    #[serde(default)]
    pub l_t: Option<f64>,
    /// Output dimension of the class under study, if one is fixed.
    #[serde(default)]
    pub q: Option<u64>,
}

fn one() -> f64 {
    1.0
}

impl FunctionClassSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d_b == 0 || self.d_t == 0 {
            return Err(Error::input(
                "parameter counts d_B and d_T must be positive",
            ));
        }
        if !(self.w_b >= 1.0) || !(self.w_t >= 1.0) {
            return Err(Error::input("weight bounds W_B and W_T must be at least 1"));
        }
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return Err(Error::input("output bound C must be a finite value >= 1"));
        }
        if let Some(q) = self.q {
            if q == 0 || q > self.d_b.min(self.d_t) {
                return Err(Error::input(format!(
                    "q = {q} must lie in [1, min(d_B, d_T)] = [1, {}]",
                    self.d_b.min(self.d_t)
                )));
            }
        }
        Ok(())
    }

    pub fn total_params(&self) -> u64 {
        self.d_b + self.d_t
    }
}

/// Where the weight-Lipschitz constant `J` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JSource {
    /// Monte Carlo maximum; optimistic.
    Estimated,
    /// Closed-form bound; conservative.
    Analytic,
    /// Supplied by the user without provenance.
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// Any output bound `C >= 1` and separate weight bounds.
    General,
    /// Sigmoid-gated outputs (`C = 1`) and a common weight bound.
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Training-set size.
    pub n: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Label bound `B`.
    #[serde(alias = "B")]
    pub label_bound: f64,
    pub class: FunctionClassSpec,
    /// Weight-Lipschitz constant.
    #[serde(alias = "J")]
    pub j: f64,
    #[serde(default = "default_j_source")]
    pub j_source: JSource,
    /// Label-noise level.
    #[serde(default)]
    pub sigma2: f64,
    /// Fraction of parameters in the branch net; defaults to `d_B / (d_B + d_T)`.
    #[serde(default)]
    pub alpha: Option<f64>,
}

fn default_j_source() -> JSource {
    JSource::User
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 1.0) || !self.n.is_finite() {
            return Err(Error::input("n must be a finite value >= 1"));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::input("epsilon must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!(
                "delta = {} is not in (0, 1)",
                self.delta
            )));
        }
        if !(self.label_bound > 0.0) || !self.label_bound.is_finite() {
            return Err(Error::input("label bound B must be positive"));
        }
        if !(self.j > 0.0) {
            return Err(Error::input("J must be positive"));
        }
        if !(self.sigma2 >= 0.0) {
            return Err(Error::input("sigma^2 must be non-negative"));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::input(format!("alpha = {a} is not in (0, 1)")));
            }
        }
        self.class.validate()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
            .unwrap_or(self.class.d_b as f64 / self.class.total_params() as f64)
    }
}

/// Breakdown of the logarithm in the denominator of the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCoverTerms {
    /// `(d_B + d_T) ln(4 min(d_B, d_T)^2 / epsilon)`
    pub scale_term: f64,
    /// `d_B ln(W_B sqrt(d_B))`, or `s ln(W sqrt(s))` for the sigmoid variant.
    pub branch_weight_term: f64,
    /// `d_T ln(W_T sqrt(d_T))`; zero for the sigmoid variant.
    pub trunk_weight_term: f64,
    /// `-s alpha'` for the sigmoid variant; zero otherwise.
    pub entropy_term: f64,
    /// Logarithm of the cover-size product (sum of the terms above).
    pub log_product: f64,
    /// `ln(product + 2)`.
    pub log_cover: f64,
    /// `ln(2 / (1 - delta))`.
    pub log_confidence: f64,
    /// `log_cover + log_confidence`.
    pub denominator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub which_theorem: Theorem,
    /// Real-valued lower bound on `q`.
    pub q_lower: f64,
    /// Smallest integer `q` satisfying the bound (`ceil(q_lower)`).
    pub q_required: u64,
    /// Training-error threshold `sigma^2 - epsilon (1 + C J (B + 2 C^2))`.
    pub threshold: f64,
    pub log_cover_terms: LogCoverTerms,
    pub j_source: JSource,
    pub inputs: BoundInputs,
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `alpha' = (alpha/2) ln(1/alpha) + ((1 - alpha)/2) ln(1/(1 - alpha))`
pub fn alpha_prime(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!("alpha = {alpha} is not in (0, 1)")));
    }
    let beta = 1.0 - alpha;
    Ok(-0.5 * (alpha * alpha.ln() + beta * beta.ln()))
}

/// Risk increase from moving each net's weights by at most `theta / 2`:
/// `q C J theta (B + 2 q C^2)`.
pub fn perturbation_bound(q: f64, c: f64, j: f64, theta: f64, label_bound: f64) -> f64 {
    q * c * j * theta * (label_bound + 2.0 * q * c * c)
}

/// `n^(1/4) (epsilon^2 / (288 B^2) / denominator)^(1/4)`, using square roots so
/// that scaling `n` by 16 scales the result by exactly 2.
fn q_from_denominator(inputs: &BoundInputs, denominator: f64) -> f64 {
    if !denominator.is_finite() {
        return 0.0;
    }
    let b = inputs.label_bound;
    let inner = inputs.epsilon * inputs.epsilon / (288.0 * b * b) / denominator;
    inputs.n.sqrt().sqrt() * inner.sqrt().sqrt()
}

fn log_confidence(delta: f64) -> f64 {
    // ln(2 / (1 - delta)) = ln 2 - ln(1 - delta)
    std::f64::consts::LN_2 - (-delta).ln_1p()
}

fn finish(
    inputs: &BoundInputs,
    which: Theorem,
    terms_without_total: [f64; 4],
    threshold: f64,
) -> BoundReport {
    let [scale_term, branch_weight_term, trunk_weight_term, entropy_term] = terms_without_total;
    let log_product = scale_term + branch_weight_term + trunk_weight_term + entropy_term;
    let log_cover = log_add_exp(log_product, std::f64::consts::LN_2);
    let log_confidence = log_confidence(inputs.delta);
    let denominator = log_cover + log_confidence;
    let q_lower = q_from_denominator(inputs, denominator);
    BoundReport {
        which_theorem: which,
        q_lower,
        q_required: q_lower.ceil() as u64,
        threshold,
        log_cover_terms: LogCoverTerms {
            scale_term,
            branch_weight_term,
            trunk_weight_term,
            entropy_term,
            log_product,
            log_cover,
            log_confidence,
            denominator,
        },
        j_source: inputs.j_source,
        inputs: inputs.clone(),
    }
}

/// Lower bound on `q` for a general output bound `C >= 1`:
///
/// `q >= n^(1/4) (eps^2 / (288 B^2) / (ln(P + 2) + ln(2 / (1 - delta))))^(1/4)`
///
/// with `P = (4 min(d_B, d_T)^2 / eps)^(d_B + d_T) (W_B sqrt(d_B))^d_B
/// (W_T sqrt(d_T))^d_T`.
pub fn q_lower_bound_general(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let class = &inputs.class;
    let (db, dt) = (class.d_b as f64, class.d_t as f64);
    let min_d = db.min(dt);
    let scale_term = (db + dt) * (4.0f64.ln() + 2.0 * min_d.ln() - inputs.epsilon.ln());
    let branch = db * (class.w_b.ln() + 0.5 * db.ln());
    let trunk = dt * (class.w_t.ln() + 0.5 * dt.ln());
    let c = class.c;
    let threshold =
        inputs.sigma2 - inputs.epsilon * (1.0 + c * inputs.j * (inputs.label_bound + 2.0 * c * c));
    Ok(finish(
        inputs,
        Theorem::General,
        [scale_term, branch, trunk, 0.0],
        threshold,
    ))
}

/// Lower bound on `q` for sigmoid-gated branch and trunk (`C = 1`) with a common
/// weight bound `W` and `s = d_B + d_T` parameters:
///
/// `q >= n^(1/4) (eps^2 / (288 B^2) / (ln(2 + e^(-s alpha') (4 min(d_B, d_T)^2 W
/// sqrt(s) / eps)^s) + ln(2 / (1 - delta))))^(1/4)`
pub fn q_lower_bound_sigmoid(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let class = &inputs.class;
    if class.c != 1.0 {
        return Err(Error::input(format!(
            "the sigmoid-gate bound assumes C = 1, got C = {}",
            class.c
        )));
    }
    if class.w_b != class.w_t {
        return Err(Error::input(
            "the sigmoid-gate bound assumes a common weight bound W_B = W_T",
        ));
    }
    let w = class.w_b;
    let (db, dt) = (class.d_b as f64, class.d_t as f64);
    let s = db + dt;
    let min_d = db.min(dt);
    let scale_term = s * (4.0f64.ln() + 2.0 * min_d.ln() - inputs.epsilon.ln());
    let weight_term = s * (w.ln() + 0.5 * s.ln());
    let entropy_term = -s * alpha_prime(inputs.alpha())?;
    let threshold = inputs.sigma2 - inputs.epsilon * (1.0 + inputs.j * (inputs.label_bound + 2.0));
    Ok(finish(
        inputs,
        Theorem::Sigmoid,
        [scale_term, weight_term, 0.0, entropy_term],
        threshold,
    ))
}

pub fn evaluate(inputs: &BoundInputs, which: Theorem) -> Result<BoundReport> {
    match which {
        Theorem::General => q_lower_bound_general(inputs),
        Theorem::Sigmoid => q_lower_bound_sigmoid(inputs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record() -> BoundInputs {
        BoundInputs {
            n: 1e6,
            epsilon: 1.0,
            delta: 0.5,
            label_bound: 1.0,
            class: FunctionClassSpec {
                d_b: 10,
                d_t: 10,
                w_b: 1.0,
                w_t: 1.0,
                c: 1.0,
                l_b: None,
                l_t: None,
                q: None,
            },
            j: 1.0,
            j_source: JSource::User,
            sigma2: 0.0,
            alpha: Some(0.5),
        }
    }

    #[test]
    fn alpha_prime_values() {
        assert!((alpha_prime(0.5).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((alpha_prime(0.5).unwrap() - 0.34657).abs() < 1e-5);
        let a = 0.25;
        let expected = 0.125 * 4f64.ln() + 0.375 * (4.0f64 / 3.0).ln();
        assert!((alpha_prime(a).unwrap() - expected).abs() < 1e-15);
        assert!((alpha_prime(0.3).unwrap() - alpha_prime(0.7).unwrap()).abs() < 1e-15);
        assert!(alpha_prime(0.0).is_err());
        assert!(alpha_prime(1.0).is_err());
    }

    #[test]
    fn perturbation_bound_values() {
        assert_eq!(perturbation_bound(1.0, 1.0, 1.0, 1.0, 1.0), 3.0);
        assert_eq!(perturbation_bound(3.0, 1.0, 2.0, 0.0, 5.0), 0.0);
        let one = perturbation_bound(2.0, 1.5, 3.0, 0.1, 2.0);
        assert!((perturbation_bound(2.0, 1.5, 6.0, 0.1, 2.0) - 2.0 * one).abs() < 1e-12);
        assert!((perturbation_bound(2.0, 1.5, 3.0, 0.3, 2.0) - 3.0 * one).abs() < 1e-12);
    }

    #[test]
    fn sixteen_n_doubles_q() {
        let base = record();
        let mut big = base.clone();
        big.n *= 16.0;
        for which in [Theorem::General, Theorem::Sigmoid] {
            let a = evaluate(&base, which).unwrap().q_lower;
            let b = evaluate(&big, which).unwrap().q_lower;
            assert_eq!(b, 2.0 * a);
        }
    }

    #[test]
    fn delta_near_one_drives_q_to_zero() {
        let mut prev = f64::INFINITY;
        for delta in [0.5, 0.9, 0.99, 0.999_999, 1.0 - 1e-15] {
            let mut r = record();
            r.delta = delta;
            let q = q_lower_bound_general(&r).unwrap().q_lower;
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn invalid_inputs() {
        let mut r = record();
        r.delta = 1.0;
        assert!(matches!(q_lower_bound_general(&r), Err(Error::Input(_))));
        let mut r = record();
        r.class.c = 2.0;
        assert!(q_lower_bound_general(&r).is_ok());
        assert!(matches!(q_lower_bound_sigmoid(&r), Err(Error::Input(_))));
        let mut r = record();
        r.class.w_t = 2.0;
        assert!(matches!(q_lower_bound_sigmoid(&r), Err(Error::Input(_))));
        let mut r = record();
        r.class.q = Some(11);
        assert!(matches!(q_lower_bound_general(&r), Err(Error::Input(_))));
    }

    #[test]
    fn thresholds() {
        let mut r = record();
        r.sigma2 = 2.0;
        r.epsilon = 0.1;
        r.j = 3.0;
        r.label_bound = 2.0;
        // 2 - 0.1 (1 + 3 (2 + 2)) = 0.7
        let g = q_lower_bound_general(&r).unwrap();
        let s = q_lower_bound_sigmoid(&r).unwrap();
        assert!((g.threshold - 0.7).abs() < 1e-12);
        assert!((s.threshold - 0.7).abs() < 1e-12);
        r.class.c = 2.0;
        // 2 - 0.1 (1 + 2 * 3 (2 + 8)) = -4.1
        assert!((q_lower_bound_general(&r).unwrap().threshold + 4.1).abs() < 1e-12);
    }

    #[test]
    fn huge_classes_stay_finite() {
        let mut r = record();
        r.class.d_b = 500_000;
        r.class.d_t = 500_000;
        r.class.w_b = 1e6;
        r.class.w_t = 1e6;
        for which in [Theorem::General, Theorem::Sigmoid] {
            let rep = evaluate(&r, which).unwrap();
            assert!(rep.log_cover_terms.denominator.is_finite());
            assert!(rep.q_lower.is_finite() && rep.q_lower > 0.0);
        }
    }

    #[test]
    fn log_add_exp_is_stable() {
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(1e6, 2f64.ln()), 1e6);
        assert!((log_add_exp(-800.0, 2f64.ln()) - 2f64.ln()).abs() < 1e-15);
    }
}
