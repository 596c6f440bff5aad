use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_finite, EmpiricalCdf, StatError, TestOutcome};

const SERIES_EPS: f64 = 1e-12;
const MAX_SERIES_TERMS: usize = 100_000;
/// Slack used when comparing permuted statistics against the observed one;
/// statistics are differences of rationals and can differ in the last ulp.
const TIE_EPS: f64 = 1e-12;

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
///
/// The supremum is evaluated exactly at every distinct point of the pooled
/// sample, after both step functions have absorbed all samples equal to it.
pub fn ks_statistic(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    ks_sorted(a.samples(), b.samples())
}

fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    // Once one side is exhausted its CDF is 1; the other only moves toward 1.
    d
}

/// Asymptotic two-sample p-value, `Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)`
/// with `lambda = d * sqrt(n m / (n + m))`.
pub fn ks_p_value(d: f64, n: usize, m: usize) -> Result<f64, StatError> {
    if !d.is_finite() {
        return Err(StatError::InvalidArgument(format!("statistic must be finite, got {d}")));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(StatError::InvalidArgument(format!("statistic must lie in [0, 1], got {d}")));
    }
    if n == 0 || m == 0 {
        return Err(StatError::InvalidArgument("sample counts must be positive".into()));
    }
    let (n, m) = (n as f64, m as f64);
    let lambda = d * (n * m / (n + m)).sqrt();
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=MAX_SERIES_TERMS {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < SERIES_EPS {
            break;
        }
        sign = -sign;
    }
    Ok((2.0 * sum).clamp(0.0, 1.0))
}

/// KS statistic plus asymptotic p-value, with `significant` judged at `level`.
pub fn ks_test(a: &[f64], b: &[f64], level: f64) -> Result<TestOutcome, StatError> {
    let fa = EmpiricalCdf::new(a)?;
    let fb = EmpiricalCdf::new(b)?;
    let d = ks_statistic(&fa, &fb);
    let p = ks_p_value(d, fa.len(), fb.len())?;
    Ok(TestOutcome::new(d, p, fa.len(), fb.len(), level))
}

/// Monte Carlo permutation p-value for the KS statistic:
/// `(1 + #{permuted D >= observed D}) / (n_perm + 1)`.
pub fn permutation_p_value(a: &[f64], b: &[f64], n_perm: usize, rng_seed: u64) -> Result<f64, StatError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatError::NoSamples);
    }
    if n_perm == 0 {
        return Err(StatError::InvalidArgument("n_perm must be at least 1".into()));
    }
    check_finite(a)?;
    check_finite(b)?;

    let observed = {
        let mut sa = a.to_vec();
        let mut sb = b.to_vec();
        sa.sort_by(f64::total_cmp);
        sb.sort_by(f64::total_cmp);
        ks_sorted(&sa, &sb)
    };

    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut exceed = 0usize;
    for _ in 0..n_perm {
        pooled.shuffle(&mut rng);
        let (left, right) = pooled.split_at_mut(a.len());
        left.sort_by(f64::total_cmp);
        right.sort_by(f64::total_cmp);
        if ks_sorted(left, right) >= observed - TIE_EPS {
            exceed += 1;
        }
    }
    Ok((1 + exceed) as f64 / (n_perm + 1) as f64)
}
