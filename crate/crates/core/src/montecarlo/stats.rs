use super::MonteCarloError;
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided standard normal quantile for `confidence`.
pub fn normal_quantile(confidence: f64) -> Result<f64, MonteCarloError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(MonteCarloError::Parameter(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(std.inverse_cdf(0.5 + confidence / 2.0))
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(
    successes: u64,
    trials: u64,
    confidence: f64,
) -> Result<(f64, f64), MonteCarloError> {
    if trials == 0 {
        return Err(MonteCarloError::Parameter("no trials".into()));
    }
    if successes > trials {
        return Err(MonteCarloError::Parameter(format!(
            "{successes} successes in {trials} trials"
        )));
    }
    let z = normal_quantile(confidence)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Clamp so the interval always brackets the point estimate.
    Ok((
        (centre - half).max(0.0).min(p),
        (centre + half).min(1.0).max(p),
    ))
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `%g`-style rendering with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.5, 10), "0.5");
        assert_eq!(format_sig(1.0, 10), "1");
        assert_eq!(format_sig(2.0 / 3.0, 10), "0.6666666667");
        assert_eq!(format_sig(1234.5, 10), "1234.5");
        assert_eq!(format_sig(1e-7, 10), "1e-07");
        assert_eq!(format_sig(9.99999999999, 10), "10");
        assert_eq!(format_sig(12345678901.0, 10), "1.23456789e+10");
        assert_eq!(format_sig(0.0001, 10), "0.0001");
        assert_eq!(format_sig(-0.25, 10), "-0.25");
    }

    #[test]
    fn wilson_brackets_the_point() {
        let (lo, hi) = wilson_interval(0, 100, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!((normal_quantile(0.95).unwrap() - 1.959963985).abs() < 1e-8);
    }
}
