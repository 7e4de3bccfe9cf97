//! Small-sample statistics for the experiment aggregates.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Student-t quantile, computed numerically from the inverse CDF.
pub fn t_quantile(p: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof)
        .expect("valid t distribution")
        .inverse_cdf(p)
}

/// Half-width of the two-sided 95% confidence interval for the mean:
/// `t_{0.975, n-1} * s / sqrt(n)`. Undefined below two samples.
pub fn ci95_half(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    Some(t_quantile(0.975, n - 1.0) * sample_std(values) / n.sqrt())
}

/// One-sided paired comparison: true when the mean of `diffs` is
/// significantly greater than zero at the given confidence level.
pub fn paired_greater_than_zero(diffs: &[f64], confidence: f64) -> bool {
    if diffs.len() < 2 {
        return false;
    }
    let n = diffs.len() as f64;
    let lower = mean(diffs) - t_quantile(confidence, n - 1.0) * sample_std(diffs) / n.sqrt();
    lower > 0.0
}

/// One-sided paired non-inferiority: true unless the mean of `diffs` is
/// significantly below zero at the given confidence level, i.e. the data
/// stay consistent with "at least as good".
pub fn paired_not_below_zero(diffs: &[f64], confidence: f64) -> bool {
    if diffs.len() < 2 {
        return mean(diffs) >= 0.0;
    }
    let n = diffs.len() as f64;
    let upper = mean(diffs) + t_quantile(confidence, n - 1.0) * sample_std(diffs) / n.sqrt();
    upper >= 0.0
}

/// One-sided two-sample (Welch) comparison: true when `mean(a) > mean(b)`
/// is significant at the given confidence level.
pub fn welch_greater(a: &[f64], b: &[f64], confidence: f64) -> bool {
    if a.len() < 2 || b.len() < 2 {
        return false;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_std(a).powi(2), sample_std(b).powi(2));
    let se = (va / na + vb / nb).sqrt();
    if se == 0.0 {
        return mean(a) > mean(b);
    }
    let dof = (va / na + vb / nb).powi(2)
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let t = (mean(a) - mean(b)) / se;
    t > t_quantile(confidence, dof)
}
