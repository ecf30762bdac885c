//! Shift transforms and critical-constant calibration.
//!
//! With `Psi_bar` the null survival function selected by
//! [`DistributionKind`]:
//!
//! * `H_tau(u) = Psi_bar(tau * Psi_bar^{-1}(u))` is the null CDF of a
//!   p-value shifted by `tau`;
//! * a shifted p-value is `Psi_bar(Psi_bar^{-1}(p) / tau)`;
//! * the GSBH bound mixes `H_tau` over coordinates with `tau_i >= tau`
//!   and the minorant law `H_{tau_i}(H_{tau/tau_i}(d u) / d)` over the
//!   rest. Critical constants are `alpha_i = i * H^{-1}(alpha / d)`.

use serde::{Deserialize, Serialize};

use crate::corr::ShiftProfile;
use crate::dist::DistributionKind;
use crate::error::{domain, Error, Result};

const BISECTION_MAX: usize = 200;

/// `ln H_tau(e^{ln_u})` without argument checks; `tau` may exceed one.
/// Working in log space keeps strongly shifted values (`tau` near zero)
/// away from underflow.
#[inline]
pub(crate) fn ln_h_tau_raw(ln_u: f64, tau: f64, dist: DistributionKind) -> f64 {
    if ln_u >= 0.0 {
        return 0.0;
    }
    if ln_u == f64::NEG_INFINITY || tau == 1.0 {
        return ln_u;
    }
    dist.ln_survival(tau * dist.quantile_upper_ln(ln_u))
}

/// `ln Psi_bar(Psi_bar^{-1}(p) / tau)` from `ln p`.
#[inline]
pub(crate) fn ln_shift_raw(ln_p: f64, tau: f64, dist: DistributionKind) -> f64 {
    if ln_p >= 0.0 {
        return 0.0;
    }
    if ln_p == f64::NEG_INFINITY || tau == 1.0 {
        return ln_p;
    }
    dist.ln_survival(dist.quantile_upper_ln(ln_p) / tau)
}

/// `H_tau(u)` without argument checks; `tau` may exceed one.
#[inline]
pub(crate) fn h_tau_raw(u: f64, tau: f64, dist: DistributionKind) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    if tau == 1.0 {
        return u;
    }
    ln_h_tau_raw(u.ln(), tau, dist).exp()
}

/// `Psi_bar(Psi_bar^{-1}(p) / tau)`; exact zero and one are fixed points.
#[inline]
pub(crate) fn shift_raw(p: f64, tau: f64, dist: DistributionKind) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if tau == 1.0 {
        return p;
    }
    ln_shift_raw(p.ln(), tau, dist).exp()
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        domain(format!("tau = {tau} must lie in (0, 1]"))
    }
}

/// Null CDF of a p-value shifted by `tau`.
pub fn h_tau(u: f64, tau: f64, dist: DistributionKind) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("h_tau: u = {u} must lie in (0, 1)"));
    }
    check_tau(tau)?;
    dist.validate()?;
    Ok(h_tau_raw(u, tau, dist))
}

/// Left-shifts a two-sided p-value by `tau`.
pub fn shift_pvalue(p: f64, tau: f64, dist: DistributionKind) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("shift_pvalue: p = {p} must lie in [0, 1]"));
    }
    check_tau(tau)?;
    dist.validate()?;
    Ok(shift_raw(p, tau, dist))
}

/// Shifts every p-value by the same `tau`.
pub fn shift_all(p: &[f64], tau: f64, dist: DistributionKind) -> Result<Vec<f64>> {
    p.iter().map(|&v| shift_pvalue(v, tau, dist)).collect()
}

/// Shifts coordinate `i` by its own `tau_i`.
pub fn per_i_shifted(
    p: &[f64],
    profile: &ShiftProfile,
    dist: DistributionKind,
) -> Result<Vec<f64>> {
    if p.len() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: p.len(),
        });
    }
    p.iter()
        .zip(&profile.tau)
        .map(|(&v, &t)| shift_pvalue(v, t, dist))
        .collect()
}

/// How coordinates are shifted before the step-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShiftMode {
    /// One global `tau`.
    Global(f64),
    /// Coordinate `i` uses its own `tau_i`.
    PerCoordinate(Vec<f64>),
}

/// Raw p-values together with their shifted counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPValues {
    pub raw: Vec<f64>,
    pub shifted: Vec<f64>,
    pub mode: ShiftMode,
    pub dist: DistributionKind,
}

impl ShiftedPValues {
    pub fn global(raw: Vec<f64>, tau: f64, dist: DistributionKind) -> Result<Self> {
        let shifted = shift_all(&raw, tau, dist)?;
        Ok(ShiftedPValues {
            raw,
            shifted,
            mode: ShiftMode::Global(tau),
            dist,
        })
    }

    pub fn per_coordinate(
        raw: Vec<f64>,
        profile: &ShiftProfile,
        dist: DistributionKind,
    ) -> Result<Self> {
        let shifted = per_i_shifted(&raw, profile, dist)?;
        Ok(ShiftedPValues {
            raw,
            shifted,
            mode: ShiftMode::PerCoordinate(profile.tau.clone()),
            dist,
        })
    }
}

/// Which bound the critical constants are calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMethod {
    /// Global shift with the mixture bound `H`.
    Gsbh,
    /// Per-coordinate shifts with `(1/d) sum_i H_{tau_i}(u)`.
    Sbh1,
}

/// The bound function `H` for one profile, global shift and null law.
#[derive(Debug, Clone)]
pub struct BoundFunction {
    d: usize,
    tau: f64,
    dist: DistributionKind,
    method: CalibrationMethod,
    /// Coordinates whose `tau_i` is at least the global `tau` (GSBH only).
    at_or_above: usize,
    /// Distinct `tau_i` values with their multiplicities.
    groups: Vec<(f64, usize)>,
}

fn group_values(values: impl Iterator<Item = f64>) -> Vec<(f64, usize)> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for t in v {
        match groups.last_mut() {
            Some((last, n)) if *last == t => *n += 1,
            _ => groups.push((t, 1)),
        }
    }
    groups
}

impl BoundFunction {
    pub fn new(
        profile: &ShiftProfile,
        tau: f64,
        dist: DistributionKind,
        method: CalibrationMethod,
    ) -> Result<Self> {
        dist.validate()?;
        if profile.tau.is_empty() {
            return domain("empty shift profile");
        }
        if profile.tau.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return domain("shift profile entries must lie in (0, 1]");
        }
        let d = profile.dim();
        let (at_or_above, groups) = match method {
            CalibrationMethod::Gsbh => {
                check_tau(tau)?;
                let above = profile.tau.iter().filter(|&&t| t >= tau).count();
                (
                    above,
                    group_values(profile.tau.iter().copied().filter(|&t| t < tau)),
                )
            }
            CalibrationMethod::Sbh1 => (0, group_values(profile.tau.iter().copied())),
        };
        Ok(BoundFunction {
            d,
            tau,
            dist,
            method,
            at_or_above,
            groups,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// True when `H` collapses to a single `H_t` and can be inverted in
    /// closed form.
    fn single_shift(&self) -> Option<f64> {
        match self.method {
            CalibrationMethod::Gsbh if self.groups.is_empty() => Some(self.tau),
            CalibrationMethod::Sbh1 if self.groups.len() == 1 => Some(self.groups[0].0),
            _ => None,
        }
    }

    /// `H(u)` for `u` in `(0, 1/d]`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        let d = self.d as f64;
        if !(u > 0.0) || u * d > 1.0 + 1e-12 {
            return domain(format!(
                "H: u = {u} must lie in (0, 1/d] with d = {}",
                self.d
            ));
        }
        Ok(self.eval_raw(u.min(1.0 / d)))
    }

    fn eval_raw(&self, u: f64) -> f64 {
        match self.single_shift() {
            Some(t) => h_tau_raw(u, t, self.dist),
            None => self.eval_ln_u(u.ln()),
        }
    }

    /// `H(e^{ln_u})`.
    fn eval_ln_u(&self, ln_u: f64) -> f64 {
        let d = self.d as f64;
        let dist = self.dist;
        let h = |ln_v: f64, t: f64| ln_h_tau_raw(ln_v, t, dist).exp();
        match self.method {
            CalibrationMethod::Gsbh => {
                let mut total = 0.0;
                if self.at_or_above > 0 {
                    total += self.at_or_above as f64 * h(ln_u, self.tau);
                }
                let ln_d = d.ln();
                let ln_du = (ln_d + ln_u).min(0.0);
                for &(ti, count) in &self.groups {
                    let inner = ln_h_tau_raw(ln_du, self.tau / ti, dist) - ln_d;
                    total += count as f64 * h(inner, ti);
                }
                total / d
            }
            CalibrationMethod::Sbh1 => {
                self.groups
                    .iter()
                    .map(|&(ti, count)| count as f64 * h(ln_u, ti))
                    .sum::<f64>()
                    / d
            }
        }
    }

    /// The `u` in `(0, 1/d]` with `H(u) = target`.
    pub fn inverse(&self, target: f64) -> Result<f64> {
        if self.single_shift() == Some(1.0) {
            check_target(target)?;
            if target > 1.0 / self.d as f64 {
                return Err(Error::Unattainable {
                    target,
                    upper: 1.0 / self.d as f64,
                });
            }
            return Ok(target);
        }
        Ok(self.ln_inverse(target)?.exp())
    }

    /// `ln H^{-1}(target)`; finite even when the root underflows.
    pub fn ln_inverse(&self, target: f64) -> Result<f64> {
        check_target(target)?;
        let ln_cap = -(self.d as f64).ln();
        if let Some(t) = self.single_shift() {
            // H = H_t, inverted directly
            let ln_u = ln_shift_raw(target.ln(), t, self.dist);
            if ln_u > ln_cap {
                return Err(Error::Unattainable {
                    target,
                    upper: self.eval_ln_u(ln_cap),
                });
            }
            return Ok(ln_u);
        }
        let upper = self.eval_ln_u(ln_cap);
        if target > upper {
            return Err(Error::Unattainable { target, upper });
        }
        let mut hi = ln_cap;
        let mut lo = target.ln().min(ln_cap) - 1.0;
        while self.eval_ln_u(lo) >= target {
            hi = lo;
            lo *= 2.0;
            if !lo.is_finite() {
                return domain(format!("H^-1: no bracket found for target {target}"));
            }
        }
        for _ in 0..BISECTION_MAX {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_ln_u(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        domain(format!("H^-1: target = {target} must lie in (0, 1)"))
    }
}

/// Free-function form of [`BoundFunction::eval`] for the GSBH bound.
pub fn h_mixture(u: f64, profile: &ShiftProfile, tau: f64, dist: DistributionKind) -> Result<f64> {
    BoundFunction::new(profile, tau, dist, CalibrationMethod::Gsbh)?.eval(u)
}

/// Free-function form of [`BoundFunction::inverse`] for the GSBH bound.
pub fn h_inverse(
    target: f64,
    profile: &ShiftProfile,
    tau: f64,
    dist: DistributionKind,
) -> Result<f64> {
    BoundFunction::new(profile, tau, dist, CalibrationMethod::Gsbh)?.inverse(target)
}

/// Linear step-up constants `alpha_i = i * alpha_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalConstants {
    pub alphas: Vec<f64>,
    /// Nominal FDR level the constants were calibrated for.
    pub alpha_target: f64,
    /// `d * alpha_1`.
    pub tilde_alpha: f64,
    /// `ln alpha_1`, kept separately because `alpha_1` may underflow.
    pub ln_unit: f64,
}

impl CriticalConstants {
    /// `alpha_i = i * unit` for `i = 1..=d`.
    pub fn linear(d: usize, unit: f64, alpha_target: f64) -> Self {
        let alphas = (1..=d).map(|i| i as f64 * unit).collect();
        CriticalConstants {
            alphas,
            alpha_target,
            tilde_alpha: d as f64 * unit,
            ln_unit: unit.ln(),
        }
    }

    /// `alpha_i = i * exp(ln_unit)`.
    pub fn linear_ln(d: usize, ln_unit: f64, alpha_target: f64) -> Self {
        CriticalConstants {
            ln_unit,
            ..Self::linear(d, ln_unit.exp(), alpha_target)
        }
    }

    /// `ln alpha_i`.
    pub fn ln_alphas(&self) -> Vec<f64> {
        (1..=self.alphas.len())
            .map(|i| (i as f64).ln() + self.ln_unit)
            .collect()
    }

    /// `ln tilde_alpha`.
    pub fn ln_tilde_alpha(&self) -> f64 {
        (self.alphas.len() as f64).ln() + self.ln_unit
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// Calibrates the step-up constants so that `d * H(tilde_alpha / d) = alpha`.
pub fn calibrate(
    alpha: f64,
    profile: &ShiftProfile,
    tau: f64,
    dist: DistributionKind,
    method: CalibrationMethod,
) -> Result<CriticalConstants> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha = {alpha} must lie in (0, 1)"));
    }
    let bound = BoundFunction::new(profile, tau, dist, method)?;
    calibrate_with(alpha, &bound)
}

pub fn calibrate_with(alpha: f64, bound: &BoundFunction) -> Result<CriticalConstants> {
    let d = bound.dim();
    let target = alpha / d as f64;
    if bound.single_shift() == Some(1.0) {
        return Ok(CriticalConstants::linear(d, bound.inverse(target)?, alpha));
    }
    Ok(CriticalConstants::linear_ln(
        d,
        bound.ln_inverse(target)?,
        alpha,
    ))
}

/// `tilde_alpha * p / Psi_bar((tau / tau_i) Psi_bar^{-1}(tilde_alpha))`, the
/// stochastic minorant used for coordinates with `tau_i < tau`.
pub fn minorant_pvalue(
    p_ddot: f64,
    tau_i: f64,
    tau: f64,
    tilde_alpha: f64,
    dist: DistributionKind,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_ddot) {
        return domain(format!("minorant: p = {p_ddot} must lie in [0, 1]"));
    }
    check_tau(tau)?;
    check_tau(tau_i)?;
    if tau_i > tau {
        return domain(format!(
            "minorant needs tau_i <= tau (tau_i = {tau_i}, tau = {tau})"
        ));
    }
    if !(tilde_alpha > 0.0 && tilde_alpha < 1.0) {
        return domain(format!("tilde_alpha = {tilde_alpha} must lie in (0, 1)"));
    }
    let scale = h_tau_raw(tilde_alpha, tau / tau_i, dist);
    Ok(tilde_alpha * p_ddot / scale)
}

/// Marginal null probability `Pr(P_i <= u)` entering the FDR bound for a
/// coordinate with shrinkage `tau_i` under a global shift `tau`: `H_tau(u)`
/// when `tau_i >= tau`, otherwise the law of the minorant.
pub fn null_tail_probability(
    u: f64,
    tau_i: f64,
    tau: f64,
    tilde_alpha: f64,
    dist: DistributionKind,
) -> f64 {
    if tau_i >= tau {
        h_tau_raw(u, tau, dist)
    } else {
        null_tail_probability_ln(u.ln(), tau_i, tau, tilde_alpha.ln(), dist)
    }
}

/// [`null_tail_probability`] taking `ln u` and `ln tilde_alpha`.
pub fn null_tail_probability_ln(
    ln_u: f64,
    tau_i: f64,
    tau: f64,
    ln_tilde_alpha: f64,
    dist: DistributionKind,
) -> f64 {
    if tau_i >= tau {
        ln_h_tau_raw(ln_u, tau, dist).exp()
    } else {
        let inner = ln_u - ln_tilde_alpha + ln_h_tau_raw(ln_tilde_alpha, tau / tau_i, dist);
        ln_h_tau_raw(inner, tau_i, dist).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{chi2_quantile_upper, chi2_survival};

    const CHI: DistributionKind = DistributionKind::ChiSq1;

    fn sf1(x: f64) -> f64 {
        libm::erfc((x / 2.0).sqrt())
    }

    /// Bisection on the erfc closed form, independent of the gamma kernels.
    fn isf1(u: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 2000.0_f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if sf1(mid) > u {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn h_tau_identity_and_inverse_direction() {
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert_eq!(h_tau(u, 1.0, CHI).unwrap(), u);
        }
        assert!((h_tau(0.005574, 0.5, CHI).unwrap() - 0.05).abs() < 1e-4);
        assert!(h_tau(0.0, 0.5, CHI).is_err());
        assert!(h_tau(0.5, 1.5, CHI).is_err());
        assert!(h_tau(0.5, 0.0, CHI).is_err());
    }

    #[test]
    fn h_tau_concave_on_grid() {
        for tau in [0.2, 0.5, 0.9] {
            let n = 1000;
            let vals: Vec<f64> = (1..n)
                .map(|i| h_tau(i as f64 / n as f64, tau, CHI).unwrap())
                .collect();
            for w in vals.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-9);
            }
        }
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_pvalue(0.05, 1.0, CHI).unwrap(), 0.05);
        let v = shift_pvalue(0.05, 0.5, CHI).unwrap();
        assert!((v - 0.005574).abs() < 1e-5);
        assert!((v - sf1(isf1(0.05) / 0.5)).abs() < 1e-12);
        let f = DistributionKind::ScaledF { nu: 10 };
        let s = shift_pvalue(0.05, 0.5, f).unwrap();
        assert!(s < 0.05);
        assert!((h_tau(s, 0.5, f).unwrap() - 0.05).abs() < 1e-9);
        assert_eq!(shift_pvalue(0.0, 0.3, CHI).unwrap(), 0.0);
        assert_eq!(shift_pvalue(1.0, 0.3, CHI).unwrap(), 1.0);
        assert!(shift_pvalue(1.2, 0.3, CHI).is_err());
    }

    #[test]
    fn per_i_examples() {
        let ones = ShiftProfile::independent(3);
        let p = vec![0.01, 0.2, 0.7];
        assert_eq!(per_i_shifted(&p, &ones, CHI).unwrap(), p);
        let prof = ShiftProfile {
            tau: vec![0.5, 1.0],
            lambda_min: 0.5,
        };
        let s = per_i_shifted(&[0.05, 0.05], &prof, CHI).unwrap();
        assert!((s[0] - 0.005574).abs() < 1e-5);
        assert_eq!(s[1], 0.05);
        assert!(per_i_shifted(&[0.1], &prof, CHI).is_err());
    }

    #[test]
    fn shift_monotone_in_p_and_tau() {
        let mut prev = 0.0;
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let s = shift_pvalue(p, 0.4, CHI).unwrap();
            assert!(s > prev && s <= p);
            prev = s;
        }
        let mut prev = 0.0;
        for i in 1..=20 {
            let tau = i as f64 / 20.0;
            let s = shift_pvalue(0.3, tau, CHI).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn mixture_reductions() {
        let ind = ShiftProfile::independent(5);
        for u in [1e-4, 0.01, 0.1, 0.2] {
            assert_eq!(h_mixture(u, &ind, 1.0, CHI).unwrap(), u);
        }
        let prof = ShiftProfile {
            tau: vec![0.6, 0.7, 0.9],
            lambda_min: 0.5,
        };
        for u in [1e-3, 0.05, 0.3] {
            assert_eq!(
                h_mixture(u, &prof, 0.6, CHI).unwrap(),
                h_tau(u, 0.6, CHI).unwrap()
            );
        }
        assert!(h_mixture(0.5, &prof, 0.6, CHI).is_err());
    }

    #[test]
    fn mixture_matches_composition_oracle() {
        // tau = (0.3, 0.8), global 0.5, d = 2, u = 0.01
        let prof = ShiftProfile {
            tau: vec![0.3, 0.8],
            lambda_min: 0.3,
        };
        let u = 0.01;
        let first = sf1(0.5 * isf1(u));
        let inner = sf1(0.5 / 0.3 * isf1(2.0 * u)) / 2.0;
        let second = sf1(0.3 * isf1(inner));
        let oracle = 0.5 * (first + second);
        let got = h_mixture(u, &prof, 0.5, CHI).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
    }

    #[test]
    fn inverse_roundtrip() {
        let prof = ShiftProfile {
            tau: vec![0.3, 0.45, 0.8, 0.95],
            lambda_min: 0.2,
        };
        let bound = BoundFunction::new(&prof, 0.5, CHI, CalibrationMethod::Gsbh).unwrap();
        for i in 1..50 {
            let target = i as f64 * 0.004;
            let u = bound.inverse(target).unwrap();
            assert!((bound.eval(u).unwrap() - target).abs() < 1e-10);
        }
        let upper = bound.eval(0.25).unwrap();
        assert!(matches!(
            bound.inverse(upper * 1.01),
            Err(Error::Unattainable { .. })
        ));
        assert_eq!(
            h_inverse(0.003, &ShiftProfile::independent(4), 1.0, CHI).unwrap(),
            0.003
        );
    }

    #[test]
    fn calibrate_reduces_to_bh_and_is_monotone() {
        let ind = ShiftProfile::independent(4);
        let c = calibrate(0.05, &ind, 1.0, CHI, CalibrationMethod::Gsbh).unwrap();
        for (i, a) in c.alphas.iter().enumerate() {
            assert_eq!(*a, (i + 1) as f64 * (0.05 / 4.0));
        }
        let c = calibrate(0.05, &ind, 1.0, CHI, CalibrationMethod::Sbh1).unwrap();
        assert!((c.tilde_alpha - 0.05).abs() < 1e-17);

        let prof = ShiftProfile {
            tau: vec![0.3, 0.5, 0.7, 0.9],
            lambda_min: 0.25,
        };
        let mut prev: Option<CriticalConstants> = None;
        for k in 1..10 {
            let c = calibrate(k as f64 * 0.02, &prof, 0.6, CHI, CalibrationMethod::Gsbh).unwrap();
            if let Some(p) = &prev {
                assert!(c.alphas.iter().zip(&p.alphas).all(|(a, b)| a > b));
            }
            // identity the calibration enforces
            let b = BoundFunction::new(&prof, 0.6, CHI, CalibrationMethod::Gsbh).unwrap();
            assert!((4.0 * b.eval(c.tilde_alpha / 4.0).unwrap() - c.alpha_target).abs() < 1e-9);
            prev = Some(c);
        }
        assert!(calibrate(1.0, &prof, 0.6, CHI, CalibrationMethod::Gsbh).is_err());
    }

    #[test]
    fn minorant_examples() {
        let a = minorant_pvalue(0.01, 0.5, 0.5, 0.1, CHI).unwrap();
        assert!((a - 0.01).abs() < 1e-15);
        let x = minorant_pvalue(0.01, 0.3, 0.5, 0.1, CHI).unwrap();
        let y = minorant_pvalue(0.02, 0.3, 0.5, 0.1, CHI).unwrap();
        assert!((y - 2.0 * x).abs() < 1e-15);
        let q = chi2_quantile_upper(0.1, 1).unwrap();
        let oracle = 0.1 * 0.01 / chi2_survival(0.5 / 0.3 * q, 1).unwrap();
        assert!((x - oracle).abs() < 1e-14);
        assert!((x - 0.1 * 0.01 / sf1(0.5 / 0.3 * isf1(0.1))).abs() < 1e-12);
        assert!(minorant_pvalue(0.01, 0.6, 0.5, 0.1, CHI).is_err());
    }

    #[test]
    fn strong_shifts_calibrate_in_log_space() {
        let prof = ShiftProfile {
            tau: vec![1e-3, 0.004, 0.01, 0.2, 0.5],
            lambda_min: 3e-4,
        };
        for dist in [CHI, DistributionKind::ScaledF { nu: 60 }] {
            for method in [CalibrationMethod::Gsbh, CalibrationMethod::Sbh1] {
                let tau = if method == CalibrationMethod::Gsbh {
                    0.004
                } else {
                    1.0
                };
                let lo = calibrate(0.05, &prof, tau, dist, method).unwrap();
                let hi = calibrate(0.2, &prof, tau, dist, method).unwrap();
                assert!(
                    lo.ln_unit.is_finite() && lo.ln_unit < hi.ln_unit,
                    "{method:?} {dist:?}"
                );
                if method == CalibrationMethod::Gsbh {
                    // the closed-form tail probabilities sum back to alpha
                    let sum: f64 = prof
                        .tau
                        .iter()
                        .map(|&ti| {
                            null_tail_probability_ln(lo.ln_unit, ti, tau, lo.ln_tilde_alpha(), dist)
                        })
                        .sum();
                    assert!((sum - 0.05).abs() < 1e-9, "{sum}");
                }
            }
        }
        // a shift far past the double range still orders p-values
        let a = ln_shift_raw(0.01f64.ln(), 1e-3, CHI);
        let b = ln_shift_raw(0.02f64.ln(), 1e-3, CHI);
        assert!(a < b && a < -1000.0 && b.is_finite());
    }
}
