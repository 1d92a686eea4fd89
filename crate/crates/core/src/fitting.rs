//! Exponential decay-rate fitting for energy ledgers and shock traces.

use crate::error::{Error, Result};

/// Minimum number of usable samples for a fit.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Result of a least-squares fit of `y ~ C exp(-lambda t)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpFit {
    /// Decay rate (positive for decay, negative for growth).
    pub lambda: f64,
    /// Fitted amplitude `C`.
    pub amplitude: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r_squared: f64,
    pub n_samples: usize,
    /// Time span actually used.
    pub t_range: (f64, f64),
}

/// Least-squares fit of `log y` against `t`.
///
/// Samples with non-positive or non-finite `y` are skipped; fewer than
/// [`MIN_FIT_SAMPLES`] usable samples is an error.
pub fn decay_fit(samples: &[(f64, f64)]) -> Result<ExpFit> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, y)| t.is_finite() && *y > 0.0 && y.is_finite())
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    let n = usable.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::FitWindowEmpty(format!(
            "{n} usable samples, need >= {MIN_FIT_SAMPLES}"
        )));
    }

    let nf = n as f64;
    let mean_t = usable.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_l = usable.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut stt = 0.0;
    let mut stl = 0.0;
    let mut sll = 0.0;
    for &(t, l) in &usable {
        stt += (t - mean_t) * (t - mean_t);
        stl += (t - mean_t) * (l - mean_l);
        sll += (l - mean_l) * (l - mean_l);
    }
    if stt == 0.0 {
        return Err(Error::FitWindowEmpty("zero time spread".into()));
    }
    let slope = stl / stt;
    let intercept = mean_l - slope * mean_t;
    let r_squared = if sll == 0.0 {
        1.0 // constant data: exactly fit by lambda = 0
    } else {
        (stl * stl) / (stt * sll)
    };
    let t_lo = usable.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_hi = usable.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExpFit {
        lambda: -slope,
        amplitude: intercept.exp(),
        r_squared,
        n_samples: n,
        t_range: (t_lo, t_hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let t = t_end * i as f64 / (n - 1) as f64;
                (t, f(t))
            })
            .collect()
    }

    #[test]
    fn exact_exponential() {
        let fit = decay_fit(&series(|t| (-2.0 * t).exp(), 3.0, 50)).unwrap();
        assert!((fit.lambda - 2.0).abs() < 1e-10);
        assert!((fit.amplitude - 1.0).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn oscillating_envelope_within_five_percent() {
        let fit =
            decay_fit(&series(|t| (-2.0 * t).exp() * (1.0 + 0.1 * (10.0 * t).sin()), 5.0, 200))
                .unwrap();
        assert!((fit.lambda - 2.0).abs() / 2.0 < 0.05, "lambda = {}", fit.lambda);
    }

    #[test]
    fn constant_series_gives_zero_rate() {
        let fit = decay_fit(&series(|_| 3.7, 1.0, 20)).unwrap();
        assert!(fit.lambda.abs() < 1e-13);
    }

    #[test]
    fn growth_gives_negative_lambda() {
        let fit = decay_fit(&series(|t| (0.5 * t).exp(), 4.0, 40)).unwrap();
        assert!((fit.lambda + 0.5).abs() < 1e-10);
    }

    #[test]
    fn too_few_samples_is_empty_window() {
        let r = decay_fit(&series(|t| (-t).exp(), 1.0, 5));
        assert!(matches!(r, Err(Error::FitWindowEmpty(_))));
    }

    #[test]
    fn nonpositive_values_are_skipped() {
        let mut s = series(|t| (-t).exp(), 2.0, 30);
        s.push((2.1, 0.0));
        s.push((2.2, -1.0));
        let fit = decay_fit(&s).unwrap();
        assert_eq!(fit.n_samples, 30);
        assert!((fit.lambda - 1.0).abs() < 1e-10);
    }
}
