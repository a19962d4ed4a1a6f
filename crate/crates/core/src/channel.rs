//! The additive exponential noise channel `y = x + n`.
//!
//! Noise is exponential with mean `E_n`; the signal mean is fixed to one so
//! the linear SNR is `γ = 1/E_n`. Densities are handled in the natural-log
//! domain wherever they feed the estimators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10·log10(γ)`.
pub fn linear_to_db(gamma: f64) -> f64 {
    10.0 * gamma.log10()
}

/// Channel operating point. Only `γ` is stored; `E_n` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    gamma: f64,
}

impl ChannelParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!(
                "SNR must be positive and finite, got {gamma}"
            )));
        }
        Ok(ChannelParams { gamma })
    }

    pub fn from_db(snr_db: f64) -> Result<Self> {
        Self::new(db_to_linear(snr_db))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.gamma)
    }

    /// Mean noise value `E_n = 1/γ`.
    pub fn noise_mean(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// Exponential noise density `(1/E_n)·e^{−n/E_n}·u(n)`.
pub fn noise_pdf(n: f64, noise_mean: f64) -> Result<f64> {
    if noise_mean.is_nan() || noise_mean <= 0.0 {
        return Err(invalid(format!(
            "noise mean must be positive, got {noise_mean}"
        )));
    }
    if n < 0.0 {
        return Ok(0.0);
    }
    Ok((-n / noise_mean).exp() / noise_mean)
}

/// Inverse-CDF draw `−E_n·ln(1−U)` for a uniform `U ∈ [0, 1)`.
#[inline]
pub fn noise_from_uniform(u: f64, noise_mean: f64) -> f64 {
    -noise_mean * (-u).ln_1p()
}

/// One exponential noise sample with mean `noise_mean`.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, noise_mean: f64) -> f64 {
    noise_from_uniform(rng.random::<f64>(), noise_mean)
}

/// `ln p(y|x) = ln γ − γ(y−x)` for `y ≥ x`, `−∞` otherwise.
#[inline]
pub fn transition_log_density(y: f64, x: f64, gamma: f64) -> f64 {
    if y >= x {
        gamma.ln() - gamma * (y - x)
    } else {
        f64::NEG_INFINITY
    }
}

/// AEN capacity `log2(1+γ)` in bits per channel use.
pub fn capacity(gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(invalid(format!("SNR must be non-negative, got {gamma}")));
    }
    Ok(gamma.ln_1p() / std::f64::consts::LN_2)
}

/// Linear SNR at which capacity equals `rate`, `2^rate − 1`.
pub fn capacity_snr(rate: f64) -> Result<f64> {
    if rate.is_nan() || rate < 0.0 {
        return Err(invalid(format!("rate must be non-negative, got {rate}")));
    }
    Ok((rate * std::f64::consts::LN_2).exp_m1())
}

/// A mixed input law on `x ≥ 0`: a point mass at zero plus an exponential
/// density `scale·e^{−decay·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDistribution {
    point_mass_at_zero: f64,
    scale: f64,
    decay: f64,
}

impl InputDistribution {
    pub fn point_mass_at_zero(&self) -> f64 {
        self.point_mass_at_zero
    }

    /// Continuous part of the law; zero for `x < 0`.
    pub fn continuous_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.scale * (-self.decay * x).exp()
        }
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }
}

/// Capacity-achieving input at SNR `γ`: mass `1/(γ+1)` at zero and density
/// `(γ/(γ+1))²·e^{−γx/(γ+1)}`.
pub fn optimal_input(gamma: f64) -> Result<InputDistribution> {
    ChannelParams::new(gamma)?;
    let r = gamma / (gamma + 1.0);
    Ok(InputDistribution {
        point_mass_at_zero: 1.0 / (gamma + 1.0),
        scale: r * r,
        decay: r,
    })
}

/// Even Laplace-like surrogate of the optimal input,
/// `γ/(2(γ+1))·e^{−γ|x|/(γ+1)}`.
pub fn surrogate_pdf(x: f64, gamma: f64) -> Result<f64> {
    ChannelParams::new(gamma)?;
    let r = gamma / (gamma + 1.0);
    Ok(0.5 * r * (-r * x.abs()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `∫_0^∞ f` with the tail truncated where the integrand is ~e^{-60·rate}.
    fn half_line(rate: f64, f: impl FnMut(f64) -> f64) -> f64 {
        GaussLegendre::new(32).integrate_composite(0.0, 60.0 / rate, 60, f)
    }

    #[test]
    fn noise_pdf_values() {
        assert_eq!(noise_pdf(-1.0, 0.3).unwrap(), 0.0);
        assert_eq!(noise_pdf(0.0, 1.0).unwrap(), 1.0);
        assert!(noise_pdf(1.0, 0.0).is_err());
        assert!(noise_pdf(1.0, -2.0).is_err());
        for en in [0.1, 1.0, 7.0] {
            let total = half_line(1.0 / en, |n| noise_pdf(n, en).unwrap());
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_cdf_points() {
        assert_eq!(noise_from_uniform(0.0, 2.0), 0.0);
        let u = 1.0 - (-1f64).exp();
        assert!((noise_from_uniform(u, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampler_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000_000;
        let en = 0.5;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let v = sample_noise(&mut rng, en);
            assert!(v >= 0.0);
            sum += v;
            sq += v * v;
        }
        let mean = sum / n as f64;
        let sd = (sq / n as f64 - mean * mean).sqrt();
        assert!((mean - en).abs() < 4.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn sampler_kolmogorov_smirnov() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let en = 0.25;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_noise(&mut rng, en)).collect();
        draws.sort_by(f64::total_cmp);
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = -(-x / en).exp_m1();
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        // asymptotic critical value at significance 1e-3
        let critical = 1.949_5 / (n as f64).sqrt();
        assert!(d < critical, "D = {d}, critical = {critical}");
    }

    #[test]
    fn transition_density_points() {
        assert_eq!(transition_log_density(0.4, 0.4, 1.0), 0.0);
        assert_eq!(transition_log_density(0.1, 0.4, 5.0), f64::NEG_INFINITY);
        let v = transition_log_density(2.5, 0.5, 3.0);
        assert!((v - (3f64.ln() - 6.0)).abs() < 1e-15);
    }

    #[test]
    fn transition_density_normalized() {
        for (x, gamma) in [(0.0, 1.0), (0.7, 10.0), (2.3, 100.0), (1.0, 0.05)] {
            let total = half_line(gamma, |n| transition_log_density(x + n, x, gamma).exp());
            assert!((total - 1.0).abs() < 1e-9, "x={x} γ={gamma}: {total}");
        }
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(0.0).unwrap(), 0.0);
        assert_eq!(capacity(1.0).unwrap(), 1.0);
        assert!((capacity(15.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(capacity(-1.0).is_err());
        assert_eq!(capacity_snr(0.0).unwrap(), 0.0);
        assert!((capacity_snr(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((capacity_snr(4.0).unwrap() - 15.0).abs() < 1e-13);
        assert!((linear_to_db(capacity_snr(4.0).unwrap()) - 11.760_912_590_556_813).abs() < 1e-12);
        assert!(capacity_snr(-0.5).is_err());
    }

    #[test]
    fn capacity_inverse_grid() {
        for i in 0..=1200 {
            let rate = i as f64 * 0.01;
            let back = capacity(capacity_snr(rate).unwrap()).unwrap();
            assert!((back - rate).abs() <= 1e-12, "rate {rate}: {back}");
        }
    }

    #[test]
    fn optimal_input_mass_and_mean() {
        let d = optimal_input(1.0).unwrap();
        assert_eq!(d.point_mass_at_zero(), 0.5);
        for gamma in [0.1, 1.0, 15.0, 1000.0] {
            let d = optimal_input(gamma).unwrap();
            let rate = d.decay();
            let mass = d.point_mass_at_zero() + half_line(rate, |x| d.continuous_density(x));
            let mean = half_line(rate, |x| x * d.continuous_density(x));
            assert!((mass - 1.0).abs() < 1e-9);
            assert!((mean - 1.0).abs() < 1e-9);
        }
        assert!(optimal_input(0.0).is_err());
    }

    #[test]
    fn surrogate_is_even_and_normalized() {
        assert!((surrogate_pdf(0.0, 1.0).unwrap() - 0.25).abs() < 1e-16);
        for gamma in [0.5, 3.0, 100.0] {
            for x in [0.1, 1.0, 5.5] {
                assert_eq!(
                    surrogate_pdf(x, gamma).unwrap(),
                    surrogate_pdf(-x, gamma).unwrap()
                );
            }
            let rate = gamma / (gamma + 1.0);
            let half = half_line(rate, |x| surrogate_pdf(x, gamma).unwrap());
            assert!((2.0 * half - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn params_roundtrip() {
        let p = ChannelParams::from_db(10.0).unwrap();
        assert!((p.gamma() - 10.0).abs() < 1e-12);
        assert!((p.noise_mean() * p.gamma() - 1.0).abs() < 1e-15);
        assert!(ChannelParams::new(0.0).is_err());
        assert!(ChannelParams::new(f64::NAN).is_err());
    }
}
