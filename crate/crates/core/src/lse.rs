//! Log-domain helpers shared by the estimators.

use crate::error::{Error, Result};

/// `ln Σ exp(t)` by max-subtraction. Exact `-inf` entries contribute nothing.
///
/// Fails with a domain error when every term is `-inf` (empty support).
pub fn log_sum_exp(terms: &[f64]) -> Result<f64> {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Domain(
            "log_sum_exp over an empty or all -inf set".into(),
        ));
    }
    if max == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    Ok(max + sum.ln())
}

/// `ln(e^a + e^b)`, tolerating `-inf` on either side.
#[inline]
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_term() {
        assert_eq!(log_sum_exp(&[-3.5]).unwrap(), -3.5);
    }

    #[test]
    fn repeated_terms() {
        let v = log_sum_exp(&[0.7; 5]).unwrap();
        assert!((v - (0.7 + 5f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn neg_inf_contributes_nothing() {
        assert_eq!(log_sum_exp(&[0.0, f64::NEG_INFINITY]).unwrap(), 0.0);
    }

    #[test]
    fn all_neg_inf_is_domain_error() {
        assert!(matches!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            Err(Error::Domain(_))
        ));
        assert!(log_sum_exp(&[]).is_err());
    }

    #[test]
    fn no_overflow_at_large_magnitudes() {
        let v = log_sum_exp(&[1000.0, 1000.0]).unwrap();
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp(&[-1e6, -1e6 - 1.0]).unwrap();
        assert!((v - (-1e6 + (-1f64).exp().ln_1p())).abs() < 1e-9);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = compensated_sum([1e16, 1.0, -1e16, 1.0]);
        assert_eq!(v, 2.0);
    }

    proptest! {
        #[test]
        fn shift_equivariance(ts in prop::collection::vec(-50.0f64..50.0, 1..20), c in -100.0f64..100.0) {
            let base = log_sum_exp(&ts).unwrap();
            let shifted: Vec<f64> = ts.iter().map(|t| t + c).collect();
            prop_assert!((log_sum_exp(&shifted).unwrap() - (base + c)).abs() < 1e-10);
        }

        #[test]
        fn pairwise_matches_slice(a in -60.0f64..60.0, b in -60.0f64..60.0) {
            prop_assert!((ln_add_exp(a, b) - log_sum_exp(&[a, b]).unwrap()).abs() < 1e-12);
        }
    }
}
