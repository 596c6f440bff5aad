use statrs::function::erf::erfc;

use super::{check_finite, StatError, TestOutcome};

/// `P(|Z| >= |z|)` for a standard normal `Z`.
pub fn two_sided_normal_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-sample z-test for a difference in means with a known, shared `sigma`,
/// gated by a minimum effect size `practical_delta`.
///
/// With enough samples any nonzero gap becomes statistically significant;
/// `practically_significant` additionally requires `|mean_a - mean_b| >= practical_delta`.
pub fn mean_difference_test(
    a: &[f64],
    b: &[f64],
    sigma: f64,
    alpha: f64,
    practical_delta: f64,
) -> Result<TestOutcome, StatError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(StatError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if a.is_empty() || b.is_empty() {
        return Err(StatError::NoSamples);
    }
    check_finite(a)?;
    check_finite(b)?;
    let (na, nb) = (a.len(), b.len());
    let gap = mean(a) - mean(b);
    let se = sigma * (1.0 / na as f64 + 1.0 / nb as f64).sqrt();
    let z = gap / se;
    let p = two_sided_normal_p(z);
    let mut outcome = TestOutcome::new(z, p, na, nb, alpha);
    outcome.practically_significant = Some(outcome.significant && gap.abs() >= practical_delta);
    Ok(outcome)
}

/// Conservative calibration of a p-value onto the evidence scale:
/// `min(1, -e p ln p)` for `p < 1/e`, otherwise 1.
pub fn calibrate_p_value(p: f64) -> Result<f64, StatError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(StatError::InvalidArgument(format!("p must lie in (0, 1], got {p}")));
    }
    let e = std::f64::consts::E;
    if p < 1.0 / e {
        Ok((-e * p * p.ln()).min(1.0))
    } else {
        Ok(1.0)
    }
}
