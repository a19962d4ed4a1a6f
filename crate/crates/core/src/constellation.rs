//! Equiprobable one-dimensional signal sets for the AEN channel.
//!
//! Three families are supported:
//!
//! - **uniform**: equally spaced amplitudes `β(i−1)`;
//! - **martinez**: power-law amplitudes `β(i−1)^λ`, near-optimal at the
//!   golden ratio λ ≈ 1.618;
//! - **log**: centroids of equal-probability intervals of the Laplace-like
//!   surrogate density `½·e^{−|x|}`, keeping the non-negative half.
//!
//! Every generator normalizes so the mean amplitude is exactly one. The log
//! family is SNR-independent: the `(γ+1)/γ` scale of the surrogate density is
//! absorbed by the normalization, so no generator takes an SNR argument.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lse::compensated_sum;

/// Largest supported constellation size.
pub const MAX_SYMBOLS: usize = 4096;

/// Power-law exponent for the Martinez family, 1.618 ≈ (1 + √5) / 2.
pub const GOLDEN_LAMBDA: f64 = 1.618;

/// Tolerance on the unit-mean invariant.
pub const MEAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Uniform,
    Martinez,
    Log,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Martinez => "martinez",
            Family::Log => "log",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Family::Uniform),
            "martinez" => Ok(Family::Martinez),
            "log" => Ok(Family::Log),
            other => Err(invalid(format!("unknown constellation family `{other}`"))),
        }
    }
}

/// An ordered set of `M` non-negative, strictly increasing amplitudes with
/// unit mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstellation", into = "RawConstellation")]
pub struct Constellation {
    family: Family,
    lambda: Option<f64>,
    beta: f64,
    symbols: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawConstellation {
    family: Family,
    #[serde(rename = "M")]
    m: usize,
    lambda: Option<f64>,
    beta: f64,
    symbols: Vec<f64>,
}

impl TryFrom<RawConstellation> for Constellation {
    type Error = Error;

    fn try_from(raw: RawConstellation) -> Result<Self> {
        if raw.m != raw.symbols.len() {
            return Err(invalid(format!(
                "M = {} but {} symbols given",
                raw.m,
                raw.symbols.len()
            )));
        }
        if (raw.family == Family::Martinez) != raw.lambda.is_some() {
            return Err(invalid(
                "lambda must be present exactly for the martinez family",
            ));
        }
        let cons = Constellation {
            family: raw.family,
            lambda: raw.lambda,
            beta: raw.beta,
            symbols: raw.symbols,
        };
        cons.validate()?;
        Ok(cons)
    }
}

impl From<Constellation> for RawConstellation {
    fn from(c: Constellation) -> Self {
        RawConstellation {
            family: c.family,
            m: c.symbols.len(),
            lambda: c.lambda,
            beta: c.beta,
            symbols: c.symbols,
        }
    }
}

impl Constellation {
    /// Normalizes `raw` (non-negative, strictly increasing, `raw[0] = 0`) to
    /// unit mean. The applied scale is recorded as `beta`.
    pub fn from_unnormalized(family: Family, lambda: Option<f64>, raw: &[f64]) -> Result<Self> {
        check_size(raw.len())?;
        let total = compensated_sum(raw.iter().copied());
        if !(total.is_finite() && total > 0.0) {
            return Err(invalid(
                "unnormalized symbols must have a positive finite sum",
            ));
        }
        let beta = raw.len() as f64 / total;
        let symbols = raw.iter().map(|&r| r * beta).collect();
        let cons = Constellation {
            family,
            lambda,
            beta,
            symbols,
        };
        cons.validate()?;
        Ok(cons)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        check_size(self.symbols.len())?;
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid(format!("lambda must be positive, got {l}")));
            }
        }
        if self.symbols[0] != 0.0 {
            return Err(invalid("first symbol must be 0"));
        }
        if self.symbols.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(invalid("symbols must be finite and non-negative"));
        }
        if self.symbols.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("symbols must be strictly increasing"));
        }
        let mean = self.mean();
        if (mean - 1.0).abs() > MEAN_TOLERANCE {
            return Err(invalid(format!("mean amplitude {mean} is not 1")));
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    /// Number of symbols, `M`.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Bits per symbol when `M` is a power of two.
    pub fn bits(&self) -> Option<usize> {
        let m = self.len();
        m.is_power_of_two().then(|| m.trailing_zeros() as usize)
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.symbols.iter().copied()) / self.len() as f64
    }
}

fn check_size(m: usize) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!("constellation needs M >= 2, got {m}")));
    }
    if m > MAX_SYMBOLS {
        return Err(invalid(format!(
            "M = {m} exceeds the supported maximum {MAX_SYMBOLS}"
        )));
    }
    Ok(())
}

/// Equally spaced amplitudes `{0, β, 2β, …}` with `β = 2/(M−1)`.
pub fn gen_uniform(m: usize) -> Result<Constellation> {
    check_size(m)?;
    let raw: Vec<f64> = (0..m).map(|i| i as f64).collect();
    Constellation::from_unnormalized(Family::Uniform, None, &raw)
}

/// Power-law amplitudes `β(i−1)^λ`.
pub fn gen_martinez(m: usize, lambda: f64) -> Result<Constellation> {
    check_size(m)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let raw: Vec<f64> = (0..m).map(|i| (i as f64).powf(lambda)).collect();
    Constellation::from_unnormalized(Family::Martinez, Some(lambda), &raw)
}

/// Log constellation: `x_1 = 0`, `x_i = β(g(i) − g(i+1))` for `i = 2..M`.
pub fn gen_log(m: usize) -> Result<Constellation> {
    check_size(m)?;
    let mut raw = Vec::with_capacity(m);
    raw.push(0.0);
    for i in 2..=m {
        let x = i as f64;
        raw.push(log_g(m, x) - log_g(m, x + 1.0));
    }
    Constellation::from_unnormalized(Family::Log, None, &raw)
}

/// `g(x) = (M+1−x)·ln(e(2M−1) / (2(M+1−x)))`, continued by its limit 0 at
/// `x = M+1`.
pub fn log_g(m: usize, x: f64) -> f64 {
    let t = m as f64 + 1.0 - x;
    t_ln_term(m, t)
}

/// `f(x) = (2M−x)·ln(e(2M−1) / (2(2M−x)))`, the same kernel indexed over the
/// full two-sided set of `2M−1` centroids; `g(i) = f(i+M−1)`.
pub fn log_f(m: usize, x: f64) -> f64 {
    let t = 2.0 * m as f64 - x;
    t_ln_term(m, t)
}

fn t_ln_term(m: usize, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let c = (2 * m - 1) as f64;
    t * (1.0 + (c / (2.0 * t)).ln())
}

/// Equal-mass breakpoints `α_1..α_{2M}` of the unit-scale surrogate density
/// `½·e^{−|x|}`; `α_1 = −∞`, `α_{2M} = +∞`. Index 0 holds `α_1`.
pub fn alpha_breakpoints(m: usize) -> Result<Vec<f64>> {
    check_size(m)?;
    let c = (2 * m - 1) as f64;
    let mut alpha = Vec::with_capacity(2 * m);
    alpha.push(f64::NEG_INFINITY);
    for k in 2..=m {
        alpha.push((2.0 * (k - 1) as f64 / c).ln());
    }
    for k in (m + 1)..=(2 * m - 1) {
        alpha.push(-(2.0 * (2 * m - k) as f64 / c).ln());
    }
    alpha.push(f64::INFINITY);
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn uniform_small_sets() {
        assert_eq!(gen_uniform(2).unwrap().symbols(), &[0.0, 2.0]);
        close(gen_uniform(3).unwrap().symbols(), &[0.0, 1.0, 2.0], 1e-15);
        close(
            gen_uniform(4).unwrap().symbols(),
            &[0.0, 2.0 / 3.0, 4.0 / 3.0, 2.0],
            1e-15,
        );
        assert_relative_eq!(gen_uniform(9).unwrap().beta(), 0.25);
    }

    #[test]
    fn uniform_rejects_tiny_m() {
        assert!(matches!(gen_uniform(1), Err(Error::InvalidArgument(_))));
        assert!(gen_uniform(0).is_err());
        assert!(gen_uniform(MAX_SYMBOLS + 1).is_err());
    }

    #[test]
    fn martinez_reduces_to_uniform() {
        close(
            gen_martinez(4, 1.0).unwrap().symbols(),
            gen_uniform(4).unwrap().symbols(),
            1e-15,
        );
        for l in [0.3, 1.618, 4.0] {
            close(gen_martinez(2, l).unwrap().symbols(), &[0.0, 2.0], 1e-15);
        }
    }

    #[test]
    fn martinez_golden_m4() {
        // 40-digit evaluation of β·(i−1)^1.618 with unit mean
        let c = gen_martinez(4, 1.618).unwrap();
        close(
            c.symbols(),
            &[
                0.0,
                0.400_606_279_673_337_5,
                1.229_657_847_524_188_2,
                2.369_735_872_802_474,
            ],
            1e-14,
        );
        assert_eq!(c.lambda(), Some(1.618));
    }

    #[test]
    fn martinez_rejects_bad_lambda() {
        assert!(gen_martinez(4, 0.0).is_err());
        assert!(gen_martinez(4, -1.0).is_err());
        assert!(gen_martinez(4, f64::NAN).is_err());
    }

    #[test]
    fn breakpoints_m2() {
        let a = alpha_breakpoints(2).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a[0], f64::NEG_INFINITY);
        assert_eq!(a[3], f64::INFINITY);
        assert!((a[1] + 0.405_465_108_108_164_4).abs() < 1e-12);
        assert!((a[2] - 0.405_465_108_108_164_4).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_are_antisymmetric_and_increasing() {
        for m in [2, 3, 7, 64, 2048] {
            let a = alpha_breakpoints(m).unwrap();
            assert_eq!(a.len(), 2 * m);
            for k in 0..2 * m {
                assert_eq!(a[k], -a[2 * m - 1 - k]);
            }
            assert!(a.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn log_small_sets() {
        assert_eq!(gen_log(2).unwrap().symbols(), &[0.0, 2.0]);
        close(
            gen_log(4).unwrap().symbols(),
            &[
                0.0,
                0.396_505_666_732_411_2,
                1.000_988_429_581_438_1,
                2.602_505_903_686_150_6,
            ],
            1e-14,
        );
    }

    #[test]
    fn reindex_identity() {
        for m in [2usize, 3, 8, 100, 4096] {
            for i in 2..=m + 1 {
                let g = log_g(m, i as f64);
                let f = log_f(m, (i + m - 1) as f64);
                assert!((g - f).abs() <= 1e-12 * g.abs().max(1.0));
            }
        }
        assert_eq!(log_g(5, 6.0), 0.0);
    }

    #[test]
    fn scale_invariance() {
        let raw: Vec<f64> = (0..16).map(|i| (i as f64).powf(1.3)).collect();
        let a = Constellation::from_unnormalized(Family::Martinez, Some(1.3), &raw).unwrap();
        for c in [1e-3, 0.7, 3.0, 1e6] {
            let scaled: Vec<f64> = raw.iter().map(|r| r * c).collect();
            let b = Constellation::from_unnormalized(Family::Martinez, Some(1.3), &scaled).unwrap();
            for (x, y) in a.symbols().iter().zip(b.symbols()) {
                assert!((x - y).abs() <= 1e-14 * x.max(1.0));
            }
        }
    }

    #[test]
    fn bits_only_for_powers_of_two() {
        assert_eq!(gen_log(8).unwrap().bits(), Some(3));
        assert_eq!(gen_log(6).unwrap().bits(), None);
    }

    #[test]
    fn json_rejects_invalid_symbols() {
        let bad = r#"{"family":"uniform","M":3,"lambda":null,"beta":1.0,"symbols":[0.0,2.0,1.0]}"#;
        assert!(serde_json::from_str::<Constellation>(bad).is_err());
        let bad = r#"{"family":"uniform","M":2,"lambda":null,"beta":1.0,"symbols":[0.0,1.0]}"#;
        assert!(serde_json::from_str::<Constellation>(bad).is_err());
    }

    fn any_constellation() -> impl Strategy<Value = Constellation> {
        (2usize..=2048, 0usize..3, 0.2f64..4.0).prop_map(|(m, fam, l)| match fam {
            0 => gen_uniform(m).unwrap(),
            1 => gen_martinez(m, l).unwrap(),
            _ => gen_log(m).unwrap(),
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn structural_invariants(c in any_constellation()) {
            prop_assert_eq!(c.symbols()[0], 0.0);
            prop_assert!(c.symbols().windows(2).all(|w| w[0] < w[1]));
            prop_assert!((c.mean() - 1.0).abs() <= MEAN_TOLERANCE);
        }

        #[test]
        fn json_roundtrip_is_lossless(c in any_constellation()) {
            let s = serde_json::to_string(&c).unwrap();
            let back: Constellation = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
