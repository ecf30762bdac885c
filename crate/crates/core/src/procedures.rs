//! Step-up engine and the mean-testing catalog: BH, BY, GSBH1-6, SBH1,
//! SBH2 (fractional and `lambda_min` variants), plus Storey's `pi0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corr::{select_tau, ShiftProfile, TauRule};
use crate::dist::DistributionKind;
use crate::error::{domain, Error, Result};
use crate::shift::{self, BoundFunction, CalibrationMethod, CriticalConstants};

/// Default fraction of `lambda_min` used by the original SBH2.
pub const SBH2_DEFAULT_FRACTION: f64 = 0.9;
/// Default Storey threshold.
pub const STOREY_DEFAULT_LAMBDA: f64 = 0.5;

/// Outcome of a step-up test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepUpResult {
    /// Number of rejections `R`.
    pub rejections: usize,
    /// Rejected indices, ascending.
    pub rejected: Vec<usize>,
    /// `P_(R)`, or zero when nothing is rejected.
    pub threshold: f64,
}

impl StepUpResult {
    pub fn none() -> Self {
        StepUpResult {
            rejections: 0,
            rejected: Vec::new(),
            threshold: 0.0,
        }
    }

    /// Indicator vector of length `d`.
    pub fn mask(&self, d: usize) -> Vec<bool> {
        let mut m = vec![false; d];
        for &i in &self.rejected {
            m[i] = true;
        }
        m
    }
}

/// Generic step-up: with `v_(1) <= ... <= v_(d)`, `R = max{i : v_(i) <= c_i}`
/// and every index with `v_j <= v_(R)` is rejected.
pub fn step_up(values: &[f64], constants: &[f64]) -> Result<StepUpResult> {
    let d = values.len();
    if constants.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: constants.len(),
        });
    }
    if constants.windows(2).any(|w| w[1] < w[0]) {
        return domain("critical constants must be nondecreasing");
    }
    if values.iter().any(|v| v.is_nan()) {
        return domain("step-up values must not be NaN");
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let r = (0..d)
        .rev()
        .find(|&k| values[order[k]] <= constants[k])
        .map(|k| k + 1);
    let Some(r) = r else {
        return Ok(StepUpResult::none());
    };
    let threshold = values[order[r - 1]];
    let rejected: Vec<usize> = (0..d).filter(|&i| values[i] <= threshold).collect();
    Ok(StepUpResult {
        rejections: rejected.len(),
        rejected,
        threshold,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha = {alpha} must lie in (0, 1)"))
    }
}

/// `alpha_i = i * alpha / d`.
pub fn bh_constants(d: usize, alpha: f64) -> CriticalConstants {
    CriticalConstants::linear(d, alpha / d as f64, alpha)
}

/// `alpha_i = i * alpha / (d * H_d)`, `H_d` the d-th harmonic number.
pub fn by_constants(d: usize, alpha: f64) -> CriticalConstants {
    let harmonic: f64 = (1..=d).map(|j| 1.0 / j as f64).sum();
    CriticalConstants::linear(d, alpha / (d as f64 * harmonic), alpha)
}

pub fn bh(p: &[f64], alpha: f64) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    step_up(p, &bh_constants(p.len(), alpha).alphas)
}

pub fn by(p: &[f64], alpha: f64) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    step_up(p, &by_constants(p.len(), alpha).alphas)
}

/// Storey's estimate `min(1, (1 + #{p > lambda}) / (d (1 - lambda)))`.
pub fn storey_pi0(p: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return domain(format!("storey lambda = {lambda} must lie in (0, 1)"));
    }
    if p.is_empty() {
        return domain("storey_pi0 needs at least one p-value");
    }
    let above = p.iter().filter(|&&v| v > lambda).count();
    Ok(((1 + above) as f64 / (p.len() as f64 * (1.0 - lambda))).min(1.0))
}

/// How the data were observed, which fixes the null law of the p-values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "snake_case")]
pub enum Setting {
    /// Unit variance: `P_i = Psi1bar(X_i^2)`.
    Known,
    /// Independent `V ~ chi2_nu`: `P_i = Psi1nu_bar(X_i^2 / V)`.
    Unknown { v: f64, nu: u32 },
}

impl Setting {
    pub fn dist(&self) -> DistributionKind {
        match *self {
            Setting::Known => DistributionKind::ChiSq1,
            Setting::Unknown { nu, .. } => DistributionKind::ScaledF { nu },
        }
    }
}

/// Two-sided p-values of the coordinates of `x`.
pub fn pvalues_from_observations(x: &[f64], setting: Setting) -> Result<Vec<f64>> {
    match setting {
        Setting::Known => Ok(x.iter().map(|v| crate::dist::chi2_sf(v * v, 1.0)).collect()),
        Setting::Unknown { v, nu } => {
            if !(v > 0.0) || nu < 1 {
                return domain(format!(
                    "unknown-variance setting needs V > 0 and nu >= 1 (V = {v}, nu = {nu})"
                ));
            }
            Ok(x.iter()
                .map(|t| crate::dist::ratio_sf(t * t / v, 1.0, nu as f64))
                .collect())
        }
    }
}

/// Mean-testing procedure catalog; the string forms are the config and
/// CLI vocabulary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcedureId {
    Bh,
    By,
    /// GSBH with the shift rule numbered 1..=6.
    Gsbh(u8),
    Sbh1,
    /// Original SBH2: `tau = c * lambda_min`.
    Sbh2Orig(f64),
    /// `tau = lambda_min`.
    Sbh2New,
}

impl ProcedureId {
    /// Every catalog member with default parameters.
    pub fn catalog() -> Vec<ProcedureId> {
        let mut v = vec![ProcedureId::Bh, ProcedureId::By];
        v.extend((1..=6).map(ProcedureId::Gsbh));
        v.extend([
            ProcedureId::Sbh1,
            ProcedureId::Sbh2Orig(SBH2_DEFAULT_FRACTION),
            ProcedureId::Sbh2New,
        ]);
        v
    }

    /// The shift-based members (everything except BH and BY).
    pub fn shifted_catalog() -> Vec<ProcedureId> {
        Self::catalog()
            .into_iter()
            .filter(|p| p.is_shifted())
            .collect()
    }

    pub fn is_shifted(&self) -> bool {
        !matches!(self, ProcedureId::Bh | ProcedureId::By)
    }

    /// Global shift rule for GSBH-type members.
    pub fn tau_rule(&self) -> Option<TauRule> {
        match *self {
            ProcedureId::Gsbh(k) => Some(match k {
                1 => TauRule::Min,
                2 => TauRule::Max,
                3 => TauRule::Median,
                4 => TauRule::ArithMean,
                5 => TauRule::GeoMean,
                _ => TauRule::HarmMean,
            }),
            ProcedureId::Sbh2Orig(c) => Some(TauRule::LambdaMinFraction(c)),
            ProcedureId::Sbh2New => Some(TauRule::LambdaMin),
            ProcedureId::Bh | ProcedureId::By | ProcedureId::Sbh1 => None,
        }
    }
}

impl fmt::Display for ProcedureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProcedureId::Bh => write!(f, "bh"),
            ProcedureId::By => write!(f, "by"),
            ProcedureId::Gsbh(k) => write!(f, "gsbh{k}"),
            ProcedureId::Sbh1 => write!(f, "sbh1"),
            ProcedureId::Sbh2Orig(c) if c == SBH2_DEFAULT_FRACTION => write!(f, "sbh2"),
            ProcedureId::Sbh2Orig(c) => write!(f, "sbh2:{c}"),
            ProcedureId::Sbh2New => write!(f, "sbh2new"),
        }
    }
}

impl FromStr for ProcedureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "bh" => ProcedureId::Bh,
            "by" => ProcedureId::By,
            "sbh1" => ProcedureId::Sbh1,
            "sbh2" => ProcedureId::Sbh2Orig(SBH2_DEFAULT_FRACTION),
            "sbh2new" => ProcedureId::Sbh2New,
            _ => {
                if let Some(k) = s.strip_prefix("gsbh") {
                    match k.parse::<u8>() {
                        Ok(k @ 1..=6) => ProcedureId::Gsbh(k),
                        _ => return Err(Error::Config(format!("unknown procedure `{s}`"))),
                    }
                } else if let Some(c) = s.strip_prefix("sbh2:") {
                    let c: f64 = c
                        .parse()
                        .map_err(|_| Error::Config(format!("bad SBH2 fraction in `{s}`")))?;
                    if !(c > 0.0 && c < 1.0) {
                        return Err(Error::Config(format!(
                            "SBH2 fraction {c} must lie in (0, 1)"
                        )));
                    }
                    ProcedureId::Sbh2Orig(c)
                } else {
                    return Err(Error::Config(format!("unknown procedure `{s}`")));
                }
            }
        })
    }
}

impl Serialize for ProcedureId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ProcedureId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A procedure with its shift and critical constants resolved for one
/// `(Sigma, alpha, null law)`. Immutable; share freely across workers.
#[derive(Debug, Clone)]
pub struct PreparedProcedure {
    pub id: ProcedureId,
    pub dist: DistributionKind,
    pub shift: Option<shift::ShiftMode>,
    pub constants: CriticalConstants,
}

impl PreparedProcedure {
    pub fn prepare(
        id: ProcedureId,
        profile: &ShiftProfile,
        alpha: f64,
        dist: DistributionKind,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let d = profile.dim();
        let (shift, constants) = match id {
            ProcedureId::Bh => (None, bh_constants(d, alpha)),
            ProcedureId::By => (None, by_constants(d, alpha)),
            ProcedureId::Sbh1 => {
                let bound = BoundFunction::new(profile, 1.0, dist, CalibrationMethod::Sbh1)?;
                let c = shift::calibrate_with(alpha, &bound)?;
                (
                    Some(shift::ShiftMode::PerCoordinate(profile.tau.clone())),
                    c,
                )
            }
            _ => {
                let rule = id.tau_rule().expect("shifted procedure has a tau rule");
                let tau = select_tau(profile, rule)?;
                let bound = BoundFunction::new(profile, tau, dist, CalibrationMethod::Gsbh)?;
                (
                    Some(shift::ShiftMode::Global(tau)),
                    shift::calibrate_with(alpha, &bound)?,
                )
            }
        };
        Ok(PreparedProcedure {
            id,
            dist,
            shift,
            constants,
        })
    }

    pub fn dim(&self) -> usize {
        self.constants.len()
    }

    /// True when no coordinate is shifted.
    fn unshifted(&self) -> bool {
        match &self.shift {
            None => true,
            Some(shift::ShiftMode::Global(t)) => *t == 1.0,
            Some(shift::ShiftMode::PerCoordinate(t)) => t.iter().all(|&v| v == 1.0),
        }
    }

    fn check_len(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return domain("p-values must lie in [0, 1]");
        }
        Ok(())
    }

    /// `ln` of the shifted p-values (the raw ones for BH and BY).
    pub fn transform_ln(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p)?;
        Ok(match &self.shift {
            None => p.iter().map(|v| v.ln()).collect(),
            Some(shift::ShiftMode::Global(tau)) => p
                .iter()
                .map(|v| shift::ln_shift_raw(v.ln(), *tau, self.dist))
                .collect(),
            Some(shift::ShiftMode::PerCoordinate(taus)) => p
                .iter()
                .zip(taus)
                .map(|(v, &t)| shift::ln_shift_raw(v.ln(), t, self.dist))
                .collect(),
        })
    }

    /// Shifted p-values; entries may underflow to zero for strong shifts.
    pub fn transform(&self, p: &[f64]) -> Result<Vec<f64>> {
        if self.unshifted() {
            self.check_len(p)?;
            return Ok(p.to_vec());
        }
        Ok(self.transform_ln(p)?.into_iter().map(f64::exp).collect())
    }

    /// Runs the step-up. Unshifted procedures compare raw p-values with the
    /// constants directly; shifted ones compare logarithms, which is the
    /// same test but immune to underflow.
    pub fn apply(&self, p: &[f64]) -> Result<StepUpResult> {
        if self.unshifted() {
            self.check_len(p)?;
            return step_up(p, &self.constants.alphas);
        }
        let mut r = step_up(&self.transform_ln(p)?, &self.constants.ln_alphas())?;
        if r.rejections > 0 {
            r.threshold = r.threshold.exp();
        }
        Ok(r)
    }

    /// Global shift actually used, if any.
    pub fn tau(&self) -> Option<f64> {
        match self.shift {
            Some(shift::ShiftMode::Global(t)) => Some(t),
            _ => None,
        }
    }
}

/// Runs any catalog member once.
pub fn run_procedure(
    id: ProcedureId,
    p: &[f64],
    profile: &ShiftProfile,
    alpha: f64,
    dist: DistributionKind,
) -> Result<StepUpResult> {
    if p.len() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: p.len(),
        });
    }
    match id {
        ProcedureId::Bh => bh(p, alpha),
        ProcedureId::By => by(p, alpha),
        _ => PreparedProcedure::prepare(id, profile, alpha, dist)?.apply(p),
    }
}

/// GSBH with an arbitrary shift rule.
pub fn gsbh(
    p: &[f64],
    profile: &ShiftProfile,
    alpha: f64,
    rule: TauRule,
    dist: DistributionKind,
) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    if p.len() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: p.len(),
        });
    }
    let tau = select_tau(profile, rule)?;
    let constants = shift::calibrate(alpha, profile, tau, dist, CalibrationMethod::Gsbh)?;
    step_up(&shift::shift_all(p, tau, dist)?, &constants.alphas)
}

pub fn sbh1(
    p: &[f64],
    profile: &ShiftProfile,
    alpha: f64,
    dist: DistributionKind,
) -> Result<StepUpResult> {
    run_procedure(ProcedureId::Sbh1, p, profile, alpha, dist)
}

/// Which SBH2 shift to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sbh2Variant {
    Orig(f64),
    New,
}

pub fn sbh2(
    p: &[f64],
    profile: &ShiftProfile,
    alpha: f64,
    variant: Sbh2Variant,
    dist: DistributionKind,
) -> Result<StepUpResult> {
    let id = match variant {
        Sbh2Variant::Orig(c) => ProcedureId::Sbh2Orig(c),
        Sbh2Variant::New => ProcedureId::Sbh2New,
    };
    run_procedure(id, p, profile, alpha, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::{make_correlation, tau_profile, StructureKind, StructureSpec};
    use proptest::prelude::*;

    const CHI: DistributionKind = DistributionKind::ChiSq1;

    /// Checks every `i` from `d` down to 1 against the unsorted data.
    fn brute_force(values: &[f64], constants: &[f64]) -> Vec<usize> {
        let d = values.len();
        for i in (1..=d).rev() {
            // the i-th smallest value: some v with #{w < v} < i <= #{w <= v}
            let kth = values.iter().copied().find(|&v| {
                let below = values.iter().filter(|&&w| w < v).count();
                let at = values.iter().filter(|&&w| w <= v).count();
                below < i && i <= at
            });
            if let Some(v) = kth {
                if v <= constants[i - 1] {
                    return (0..d).filter(|&j| values[j] <= v).collect();
                }
            }
        }
        Vec::new()
    }

    #[test]
    fn step_up_examples() {
        let r = step_up(&[0.01, 0.02, 0.5], &[0.0167, 0.0333, 0.05]).unwrap();
        assert_eq!(r.rejections, 2);
        assert_eq!(r.rejected, vec![0, 1]);
        assert_eq!(r.threshold, 0.02);
        assert_eq!(
            step_up(&[1.0; 4], &bh_constants(4, 0.05).alphas).unwrap(),
            StepUpResult::none()
        );
        assert_eq!(
            step_up(&[0.0; 4], &bh_constants(4, 0.05).alphas)
                .unwrap()
                .rejections,
            4
        );
        assert!(step_up(&[0.1, 0.2], &[0.05]).is_err());
        assert!(step_up(&[0.1, 0.2], &[0.05, 0.01]).is_err());
    }

    #[test]
    fn bh_and_by_examples() {
        let r = bh(&[0.01, 0.02, 0.5], 0.05).unwrap();
        assert_eq!(r.rejected, vec![0, 1]);
        assert_eq!(bh(&[0.04], 0.05).unwrap().rejections, 1);
        assert_eq!(bh(&[0.06], 0.05).unwrap().rejections, 0);
        let c = by_constants(3, 0.05);
        assert!((c.alphas[0] - 0.05 / (3.0 * (1.0 + 0.5 + 1.0 / 3.0))).abs() < 1e-17);
        assert!((c.alphas[0] - 0.0090909).abs() < 1e-7);
        for p in [0.01, 0.3, 0.049] {
            assert_eq!(by(&[p], 0.05).unwrap(), bh(&[p], 0.05).unwrap());
        }
    }

    #[test]
    fn storey_examples() {
        assert_eq!(storey_pi0(&[0.9; 10], 0.5).unwrap(), 1.0);
        assert_eq!(storey_pi0(&[0.9, 0.9, 0.1, 0.1], 0.5).unwrap(), 1.0);
        assert!((storey_pi0(&[0.1; 10], 0.5).unwrap() - 0.2).abs() < 1e-15);
        assert!(storey_pi0(&[0.1], 1.0).is_err());
    }

    #[test]
    fn procedure_names_roundtrip() {
        for id in ProcedureId::catalog() {
            let s = id.to_string();
            assert_eq!(s.parse::<ProcedureId>().unwrap(), id);
        }
        assert_eq!(
            "sbh2:0.5".parse::<ProcedureId>().unwrap(),
            ProcedureId::Sbh2Orig(0.5)
        );
        assert!("gsbh7".parse::<ProcedureId>().is_err());
        assert!("sbh3".parse::<ProcedureId>().is_err());
        let names: Vec<String> = ProcedureId::catalog()
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(
            names,
            [
                "bh", "by", "gsbh1", "gsbh2", "gsbh3", "gsbh4", "gsbh5", "gsbh6", "sbh1", "sbh2",
                "sbh2new"
            ]
        );
    }

    #[test]
    fn observation_pvalues() {
        let p = pvalues_from_observations(&[0.0, 1.959963984540054], Setting::Known).unwrap();
        assert_eq!(p[0], 1.0);
        assert!((p[1] - 0.05).abs() < 1e-12);
        let p = pvalues_from_observations(&[1.0], Setting::Unknown { v: 1.0, nu: 1 }).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-14);
        assert!(pvalues_from_observations(&[1.0], Setting::Unknown { v: 0.0, nu: 3 }).is_err());
    }

    #[test]
    fn catalog_reduces_to_bh_under_independence() {
        let profile = ShiftProfile::independent(8);
        let p = [0.001, 0.004, 0.0062, 0.02, 0.03, 0.2, 0.6, 0.9];
        let reference = bh(&p, 0.05).unwrap();
        for id in ProcedureId::shifted_catalog() {
            if matches!(id, ProcedureId::Sbh2Orig(_)) {
                continue;
            }
            for dist in [CHI, DistributionKind::ScaledF { nu: 12 }] {
                assert_eq!(
                    run_procedure(id, &p, &profile, 0.05, dist).unwrap(),
                    reference,
                    "{id}"
                );
            }
        }
    }

    #[test]
    fn equal_taus_make_sbh1_equal_to_gsbh() {
        let profile = ShiftProfile {
            tau: vec![0.6; 6],
            lambda_min: 0.4,
        };
        let p = [0.0005, 0.002, 0.011, 0.015, 0.4, 0.8];
        let a = sbh1(&p, &profile, 0.1, CHI).unwrap();
        for k in 1..=6 {
            let b = run_procedure(ProcedureId::Gsbh(k), &p, &profile, 0.1, CHI).unwrap();
            assert_eq!(a.rejected, b.rejected);
            assert!((a.threshold - b.threshold).abs() <= 1e-14 * b.threshold);
        }
    }

    #[test]
    fn gsbh_rule_matches_catalog_member() {
        let s = make_correlation(&StructureSpec::new(StructureKind::Ar1 { rho: 0.5 }, 10)).unwrap();
        let profile = tau_profile(&s).unwrap();
        let p: Vec<f64> = (0..10).map(|i| 0.0007 * (i * i) as f64).collect();
        let a = gsbh(&p, &profile, 0.05, TauRule::Median, CHI).unwrap();
        let b = run_procedure(ProcedureId::Gsbh(3), &p, &profile, 0.05, CHI).unwrap();
        assert_eq!(a, b);
        let c = sbh2(&p, &profile, 0.05, Sbh2Variant::New, CHI).unwrap();
        assert_eq!(
            c,
            run_procedure(ProcedureId::Sbh2New, &p, &profile, 0.05, CHI).unwrap()
        );
        assert!(sbh2(&p, &profile, 0.05, Sbh2Variant::Orig(0.9), CHI).is_ok());
    }

    proptest! {
        #[test]
        fn step_up_matches_brute_force(values in prop::collection::vec(0.0f64..0.2, 1..=6), alpha in 0.01f64..0.3) {
            let c = bh_constants(values.len(), alpha);
            let r = step_up(&values, &c.alphas).unwrap();
            prop_assert_eq!(r.rejected, brute_force(&values, &c.alphas));
        }

        #[test]
        fn step_up_handles_ties(raw in prop::collection::vec(0usize..5, 1..=6)) {
            let values: Vec<f64> = raw.iter().map(|&k| k as f64 * 0.01).collect();
            let c = bh_constants(values.len(), 0.1);
            let r = step_up(&values, &c.alphas).unwrap();
            prop_assert_eq!(&r.rejected, &brute_force(&values, &c.alphas));
            prop_assert_eq!(r.rejections, r.rejected.len());
        }

        #[test]
        fn decreasing_a_value_never_shrinks(values in prop::collection::vec(0.0f64..0.3, 2..12), k in 0usize..12, f in 0.0f64..1.0) {
            let k = k % values.len();
            let before = bh(&values, 0.1).unwrap();
            let mut lowered = values.clone();
            lowered[k] *= f;
            let after = bh(&lowered, 0.1).unwrap();
            prop_assert!(before.rejected.iter().all(|i| after.rejected.contains(i)));
        }

        #[test]
        fn by_is_subset_of_bh(values in prop::collection::vec(0.0f64..0.2, 1..20)) {
            let a = by(&values, 0.1).unwrap();
            let b = bh(&values, 0.1).unwrap();
            prop_assert!(a.rejected.iter().all(|i| b.rejected.contains(i)));
        }
    }

    #[test]
    fn larger_alpha_never_rejects_less() {
        let s =
            make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 0.4 }, 12)).unwrap();
        let profile = tau_profile(&s).unwrap();
        let p: Vec<f64> = (0..12)
            .map(|i| 0.00025 * ((i * 7) % 13 + 1) as f64 * (i + 1) as f64)
            .collect();
        for id in ProcedureId::catalog() {
            let mut prev = 0;
            for k in 1..=10 {
                let r = run_procedure(id, &p, &profile, k as f64 * 0.02, CHI).unwrap();
                assert!(r.rejections >= prev, "{id}");
                prev = r.rejections;
            }
        }
    }
}
