//! Sample-moment and Kolmogorov-Smirnov diagnostics for the scaled-error
//! distributions.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("sample is degenerate (zero variance)")]
    DegenerateDistribution,
}

/// Moment and KS summary of one sample.
#[derive(Debug, Clone, Serialize)]
pub struct NormalityReport {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// One-sample KS statistic against the normal law with matched mean and
    /// variance.
    pub ks_statistic: f64,
}

/// Mean, standard deviation, skewness, excess kurtosis and the KS statistic
/// against N(mean, std²). Requires at least 100 samples.
pub fn normality_diagnostics(samples: &[f64]) -> Result<NormalityReport, DiagnosticsError> {
    const REQUIRED: usize = 100;
    let n = samples.len();
    if n < REQUIRED {
        return Err(DiagnosticsError::TooFewSamples {
            required: REQUIRED,
            got: n,
        });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 || !m2.is_finite() {
        return Err(DiagnosticsError::DegenerateDistribution);
    }
    let std = m2.sqrt();
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;

    let normal = Normal::new(mean, std).expect("positive std");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ks = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(x);
        let upper = (i + 1) as f64 / nf - cdf;
        let lower = cdf - i as f64 / nf;
        ks = ks.max(upper).max(lower);
    }

    Ok(NormalityReport {
        n,
        mean,
        std,
        skewness,
        excess_kurtosis,
        ks_statistic: ks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{standard_normal, Stream};

    #[test]
    fn calibration_on_standard_normal_pseudo_samples() {
        let samples: Vec<f64> = (0..100_000)
            .map(|i| standard_normal(2024, 0, i, Stream::B1))
            .collect();
        let report = normality_diagnostics(&samples).unwrap();
        assert!(report.skewness.abs() < 0.03, "skew {}", report.skewness);
        assert!(
            report.excess_kurtosis.abs() < 0.06,
            "excess kurtosis {}",
            report.excess_kurtosis
        );
        assert!(report.ks_statistic < 0.01, "ks {}", report.ks_statistic);
        assert!(report.mean.abs() < 0.02);
        assert!((report.std - 1.0).abs() < 0.02);
    }

    #[test]
    fn constant_samples_are_degenerate() {
        let samples = vec![1.5; 500];
        assert!(matches!(
            normality_diagnostics(&samples),
            Err(DiagnosticsError::DegenerateDistribution)
        ));
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let samples = vec![0.0; 99];
        assert!(matches!(
            normality_diagnostics(&samples),
            Err(DiagnosticsError::TooFewSamples { got: 99, .. })
        ));
    }

    #[test]
    fn skewed_sample_is_flagged() {
        // Exponential variates are strongly skewed.
        let samples: Vec<f64> = (0..10_000)
            .map(|i| {
                let z = standard_normal(9, 0, i, Stream::B2);
                (z * z) / 2.0
            })
            .collect();
        let report = normality_diagnostics(&samples).unwrap();
        assert!(report.skewness > 1.0);
        assert!(report.ks_statistic > 0.08);
    }
}
