//! SNR sweeps, SNR required for a target rate, dB gap to capacity and
//! best-in-family comparisons.
//!
//! Every curve is seen through [`MiCurve`]. Monte Carlo curves reuse one
//! seed at every SNR they are probed at, so the same `(symbol, uniform)`
//! pairs drive every probe and the curve seen by the bisection is a fixed
//! function of SNR.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{capacity, capacity_snr, db_to_linear, linear_to_db};
use crate::constellation::{gen_log, gen_martinez, gen_uniform, Constellation, Family};
use crate::error::{invalid, Error, Result};
use crate::labeling::{gray_labels, BitLabeling};
use crate::mi::{Estimator, Method, MiEstimate, Scheme};

/// Identifies the curve a result belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDescriptor {
    /// `capacity`, `uniform`, `martinez` or `log`.
    pub family: String,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub lambda: Option<f64>,
}

impl CurveDescriptor {
    pub fn capacity() -> Self {
        CurveDescriptor {
            family: "capacity".into(),
            m: None,
            lambda: None,
        }
    }

    pub fn of(cons: &Constellation) -> Self {
        CurveDescriptor {
            family: cons.family().as_str().into(),
            m: Some(cons.len()),
            lambda: cons.lambda(),
        }
    }
}

/// Mutual information as a function of SNR in dB.
pub trait MiCurve: Sync {
    fn mi_at(&self, snr_db: f64) -> Result<MiEstimate>;

    /// Supremum of the rates the curve approaches.
    fn ceiling(&self) -> f64;

    fn scheme(&self) -> Scheme;

    fn descriptor(&self) -> CurveDescriptor;
}

/// `log2(1+γ)`, evaluated in closed form.
#[derive(Debug, Clone, Copy)]
pub struct CapacityCurve {
    pub scheme: Scheme,
}

impl MiCurve for CapacityCurve {
    fn mi_at(&self, snr_db: f64) -> Result<MiEstimate> {
        Ok(MiEstimate {
            value: capacity(db_to_linear(snr_db))?,
            std_error: 0.0,
            n_samples: 0,
            seed: 0,
            scheme: self.scheme,
            method: Method::ClosedForm,
        })
    }

    fn ceiling(&self) -> f64 {
        f64::INFINITY
    }

    fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn descriptor(&self) -> CurveDescriptor {
        CurveDescriptor::capacity()
    }
}

/// A constellation under a scheme and estimator.
#[derive(Debug, Clone, Copy)]
pub struct ConstellationCurve<'a> {
    scheme: Scheme,
    cons: &'a Constellation,
    labeling: Option<&'a BitLabeling>,
    estimator: Estimator,
}

impl<'a> ConstellationCurve<'a> {
    /// `labeling` is required exactly when `scheme` is BICM.
    pub fn new(
        scheme: Scheme,
        cons: &'a Constellation,
        labeling: Option<&'a BitLabeling>,
        estimator: Estimator,
    ) -> Result<Self> {
        match (scheme, labeling) {
            (Scheme::Cm, Some(_)) => return Err(invalid("CM curves take no labeling")),
            (Scheme::Bicm, None) => return Err(invalid("BICM curves need a labeling")),
            (Scheme::Bicm, Some(l)) => {
                if cons.bits().is_none() {
                    return Err(invalid(format!(
                        "BICM needs M to be a power of two, got {}",
                        cons.len()
                    )));
                }
                l.check_matches(cons.len())?;
            }
            _ => {}
        }
        Ok(ConstellationCurve {
            scheme,
            cons,
            labeling,
            estimator,
        })
    }
}

impl MiCurve for ConstellationCurve<'_> {
    fn mi_at(&self, snr_db: f64) -> Result<MiEstimate> {
        self.estimator
            .estimate(self.scheme, self.cons, self.labeling, db_to_linear(snr_db))
    }

    fn ceiling(&self) -> f64 {
        (self.cons.len() as f64).log2()
    }

    fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn descriptor(&self) -> CurveDescriptor {
        CurveDescriptor::of(self.cons)
    }
}

/// Builds a member of a constellation family. `lambda` is used only for
/// the Martinez family.
pub fn build_constellation(family: Family, m: usize, lambda: f64) -> Result<Constellation> {
    match family {
        Family::Uniform => gen_uniform(m),
        Family::Martinez => gen_martinez(m, lambda),
        Family::Log => gen_log(m),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub mi: MiEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub curve: CurveDescriptor,
    pub rows: Vec<SweepRow>,
}

/// One estimate per grid point (strictly increasing, dB).
pub fn sweep(curve: &dyn MiCurve, snr_db_grid: &[f64]) -> Result<SweepResult> {
    if snr_db_grid.is_empty() {
        return Err(invalid("empty SNR grid"));
    }
    if snr_db_grid.iter().any(|v| !v.is_finite()) {
        return Err(invalid("SNR grid must be finite"));
    }
    if snr_db_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("SNR grid must be strictly increasing"));
    }
    let rows = snr_db_grid
        .par_iter()
        .map(|&snr_db| curve.mi_at(snr_db).map(|mi| SweepRow { snr_db, mi }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        scheme: curve.scheme(),
        curve: curve.descriptor(),
        rows,
    })
}

/// Bisection settings for SNR-at-rate searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Final bracket width in dB.
    pub tol_db: f64,
    /// Largest distance from the capacity SNR explored while bracketing.
    pub span_db: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            tol_db: 0.01,
            span_db: 60.0,
        }
    }
}

/// `10·log10(2^rate − 1)`.
pub fn capacity_snr_db(rate: f64) -> Result<f64> {
    Ok(linear_to_db(capacity_snr(rate)?))
}

/// SNR (dB) at which `curve` reaches `target` bits per channel use.
///
/// The bracket starts at the capacity SNR, which no finite constellation can
/// beat, and grows upward in doubling steps. Bisection then stops once the
/// bracket is at most `tol_db` wide and returns its midpoint.
pub fn snr_at_target_mi(curve: &dyn MiCurve, target: f64, settings: SearchSettings) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(invalid(format!(
            "target rate must be positive, got {target}"
        )));
    }
    if settings.tol_db.is_nan()
        || settings.tol_db <= 0.0
        || settings.span_db.is_nan()
        || settings.span_db <= 0.0
    {
        return Err(invalid("tol_db and span_db must be positive"));
    }
    let ceiling = curve.ceiling();
    if target >= ceiling {
        return Err(Error::UnattainableRate { target, ceiling });
    }
    let start = capacity_snr_db(target)?;

    let mut lo = start;
    let mut step = 1.0;
    while curve.mi_at(lo)?.value >= target {
        if step > settings.span_db {
            return Err(Error::SearchFailure(format!(
                "rate {target} already exceeded {} dB below capacity SNR",
                settings.span_db
            )));
        }
        lo = start - step;
        step *= 2.0;
    }

    let top = start + settings.span_db;
    let mut step = 1.0;
    let mut hi;
    loop {
        hi = (start + step).min(top);
        let est = curve.mi_at(hi)?;
        if est.value >= target {
            break;
        }
        if hi >= top {
            if target >= ceiling - 3.0 * est.std_error {
                return Err(Error::UnattainableRate { target, ceiling });
            }
            return Err(Error::SearchFailure(format!(
                "rate {target} not reached within {} dB of capacity SNR (got {})",
                settings.span_db, est.value
            )));
        }
        lo = hi;
        step *= 2.0;
    }

    while hi - lo > settings.tol_db {
        let mid = 0.5 * (lo + hi);
        if curve.mi_at(mid)?.value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub scheme: Scheme,
    pub curve: CurveDescriptor,
    pub target_rate: f64,
    pub snr_at_rate_db: f64,
    pub capacity_snr_db: f64,
    pub gap_db: f64,
}

/// dB distance between the SNR `curve` needs for `target` and the SNR at
/// which capacity equals `target`.
pub fn gap_to_capacity_db(
    curve: &dyn MiCurve,
    target: f64,
    settings: SearchSettings,
) -> Result<GapReport> {
    let snr = snr_at_target_mi(curve, target, settings)?;
    let cap = capacity_snr_db(target)?;
    Ok(GapReport {
        scheme: curve.scheme(),
        curve: curve.descriptor(),
        target_rate: target,
        snr_at_rate_db: snr,
        capacity_snr_db: cap,
        gap_db: snr - cap,
    })
}

/// Outcome of one family member in a best-in-family search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(rename = "M")]
    pub m: usize,
    /// `None` when the target is unattainable for this member.
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestInFamily {
    pub family: Family,
    pub scheme: Scheme,
    pub target_rate: f64,
    #[serde(rename = "best_M")]
    pub best_m: usize,
    pub snr_db: f64,
    pub candidates: Vec<Candidate>,
}

/// Minimizes the SNR needed for `target` over the sizes in `m_set`.
/// Members that cannot reach the target are skipped.
pub fn best_in_family(
    family: Family,
    m_set: &[usize],
    lambda: f64,
    scheme: Scheme,
    target: f64,
    estimator: Estimator,
    settings: SearchSettings,
) -> Result<BestInFamily> {
    if m_set.is_empty() {
        return Err(invalid("empty constellation size set"));
    }
    let mut candidates = Vec::with_capacity(m_set.len());
    for &m in m_set {
        let cons = build_constellation(family, m, lambda)?;
        let labeling = match scheme {
            Scheme::Bicm => Some(gray_labels(m)?),
            Scheme::Cm => None,
        };
        let curve = ConstellationCurve::new(scheme, &cons, labeling.as_ref(), estimator)?;
        let snr_db = match snr_at_target_mi(&curve, target, settings) {
            Ok(v) => Some(v),
            Err(Error::UnattainableRate { .. }) | Err(Error::SearchFailure(_)) => None,
            Err(e) => return Err(e),
        };
        candidates.push(Candidate { m, snr_db });
    }
    let best = candidates
        .iter()
        .filter_map(|c| c.snr_db.map(|s| (c.m, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let Some((best_m, snr_db)) = best else {
        let ceiling = m_set.iter().map(|&m| (m as f64).log2()).fold(0.0, f64::max);
        return Err(Error::UnattainableRate { target, ceiling });
    };
    Ok(BestInFamily {
        family,
        scheme,
        target_rate: target,
        best_m,
        snr_db,
        candidates,
    })
}

/// Best log member against best Martinez member at one target rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyComparison {
    pub target_rate: f64,
    pub log: BestInFamily,
    pub martinez: BestInFamily,
    /// Martinez SNR minus log SNR; positive favours the log family.
    pub delta_db: f64,
}

pub fn compare_families(
    targets: &[f64],
    scheme: Scheme,
    m_set: &[usize],
    lambda: f64,
    estimator: Estimator,
    settings: SearchSettings,
) -> Result<Vec<FamilyComparison>> {
    if targets.is_empty() {
        return Err(invalid("no target rates given"));
    }
    targets
        .iter()
        .map(|&t| {
            let log = best_in_family(Family::Log, m_set, lambda, scheme, t, estimator, settings)?;
            let martinez = best_in_family(
                Family::Martinez,
                m_set,
                lambda,
                scheme,
                t,
                estimator,
                settings,
            )?;
            Ok(FamilyComparison {
                target_rate: t,
                delta_db: martinez.snr_db - log.snr_db,
                log,
                martinez,
            })
        })
        .collect()
}
