//! Survival and inverse-survival kernels for the chi-square family, the
//! scaled-F family and the noncentral chi-square.
//!
//! The "scaled F" law used throughout is that of a ratio of independent
//! chi-squares, `chi2_m / chi2_nu`. For `m = 1` this is exactly
//! `F(1, nu) / nu`, the law of `T^2` when `T = X / sqrt(V)` with
//! `V ~ chi2_nu`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const FPMIN: f64 = 1e-300;
const CF_EPS: f64 = 1e-16;
const MAX_ITER: usize = 20_000;

/// Which null law the two-sided p-values are computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    /// Known variance: `P = Psi1bar(X^2)`.
    ChiSq1,
    /// Unknown variance with an independent `V ~ chi2_nu`: `P = Psi1nu_bar(X^2 / V)`.
    ScaledF { nu: u32 },
}

impl DistributionKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionKind::ChiSq1 => Ok(()),
            DistributionKind::ScaledF { nu } if nu >= 1 => Ok(()),
            DistributionKind::ScaledF { .. } => domain("scaled-F degrees of freedom must be >= 1"),
        }
    }

    /// Survival function of the one-degree-of-freedom member.
    #[inline]
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            DistributionKind::ChiSq1 => chi2_sf(x, 1.0),
            DistributionKind::ScaledF { nu } => ratio_sf(x, 1.0, nu as f64),
        }
    }

    /// Inverse survival function of the one-degree-of-freedom member.
    /// `u` must lie in `(0, 1)`; boundary values are not checked here.
    #[inline]
    pub fn quantile_upper(&self, u: f64) -> f64 {
        match *self {
            DistributionKind::ChiSq1 => chi2_isf(u, 1.0),
            DistributionKind::ScaledF { nu } => ratio_isf(u, 1.0, nu as f64),
        }
    }

    /// `ln` of [`survival`](Self::survival), accurate far into the tail.
    #[inline]
    pub fn ln_survival(&self, x: f64) -> f64 {
        match *self {
            DistributionKind::ChiSq1 => chi2_ln_sf(x, 1.0),
            DistributionKind::ScaledF { nu } => ratio_ln_sf(x, 1.0, nu as f64),
        }
    }

    /// Inverse survival function taking `ln u`, for `u` below the smallest
    /// normal double.
    #[inline]
    pub fn quantile_upper_ln(&self, ln_u: f64) -> f64 {
        match *self {
            DistributionKind::ChiSq1 => chi2_isf_ln(ln_u, 1.0),
            DistributionKind::ScaledF { nu } => ratio_isf_ln(ln_u, 1.0, nu as f64),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            DistributionKind::ChiSq1 => "chisq1".to_string(),
            DistributionKind::ScaledF { nu } => format!("scaledf({nu})"),
        }
    }
}

/// `Pr(chi2_m >= x)`.
pub fn chi2_survival(x: f64, m: u32) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("chi2_survival: x = {x} must be >= 0"));
    }
    if m < 1 {
        return domain("chi2_survival: degrees of freedom must be >= 1");
    }
    Ok(chi2_sf(x, m as f64))
}

/// The `x` with `Pr(chi2_m >= x) = u`.
pub fn chi2_quantile_upper(u: f64, m: u32) -> Result<f64> {
    check_open_unit(u, "chi2_quantile_upper")?;
    if m < 1 {
        return domain("chi2_quantile_upper: degrees of freedom must be >= 1");
    }
    Ok(chi2_isf(u, m as f64))
}

/// `Pr(chi2_m / chi2_nu >= x)`; for `m = 1` this is `Pr(F(1,nu)/nu >= x)`.
pub fn scaled_f_survival(x: f64, m: u32, nu: u32) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("scaled_f_survival: x = {x} must be >= 0"));
    }
    if m < 1 || nu < 1 {
        return domain("scaled_f_survival: degrees of freedom must be >= 1");
    }
    Ok(ratio_sf(x, m as f64, nu as f64))
}

pub fn scaled_f_quantile_upper(u: f64, m: u32, nu: u32) -> Result<f64> {
    check_open_unit(u, "scaled_f_quantile_upper")?;
    if m < 1 || nu < 1 {
        return domain("scaled_f_quantile_upper: degrees of freedom must be >= 1");
    }
    Ok(ratio_isf(u, m as f64, nu as f64))
}

/// Survival function of the noncentral chi-square with `m` degrees of
/// freedom and noncentrality `lambda`, as the Poisson(`lambda/2`) mixture
/// of central `chi2_{m+2j}` survival functions.
pub fn noncentral_chi2_survival(x: f64, m: u32, lambda: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("noncentral_chi2_survival: x = {x} must be >= 0"));
    }
    if m < 1 {
        return domain("noncentral_chi2_survival: degrees of freedom must be >= 1");
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return domain(format!(
            "noncentral_chi2_survival: lambda = {lambda} must be >= 0"
        ));
    }
    if lambda == 0.0 {
        return Ok(chi2_sf(x, m as f64));
    }
    if x == 0.0 {
        return Ok(1.0);
    }

    const TAIL: f64 = 1e-14;
    const MAX_TERMS: usize = 10_000;

    let mean = lambda / 2.0;
    let z = x / 2.0;
    let ln_z = z.ln();
    let ln_mean = mean.ln();
    // Q(a + 1, z) = Q(a, z) + z^a e^{-z} / Gamma(a + 1)
    let mut a = m as f64 / 2.0;
    let mut q = gamma_q(a, z);
    let mut mass = 0.0;
    let mut total = 0.0;
    for j in 0..MAX_TERMS {
        let ln_w = -mean + j as f64 * ln_mean - ln_gamma(j as f64 + 1.0);
        let w = ln_w.exp();
        total += w * q;
        mass += w;
        if mass >= 1.0 - TAIL {
            break;
        }
        q += (a * ln_z - z - ln_gamma(a + 1.0)).exp();
        a += 1.0;
    }
    Ok(total.clamp(0.0, 1.0))
}

fn check_open_unit(u: f64, what: &str) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        domain(format!("{what}: u = {u} must lie in (0, 1)"))
    }
}

// ---------------------------------------------------------------------------
// unchecked kernels

#[inline]
pub(crate) fn chi2_sf(x: f64, m: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_q(m / 2.0, x / 2.0)
}

/// `ln Pr(chi2_m >= x)`.
pub(crate) fn chi2_ln_sf(x: f64, m: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let (a, h) = (m / 2.0, x / 2.0);
    if h < a + 1.0 {
        // Q is bounded away from zero here
        (1.0 - gamma_p_series(a, h)).ln()
    } else {
        gamma_q_cf_ln(a, h)
    }
}

#[inline]
fn chi2_ln_pdf(x: f64, m: f64) -> f64 {
    let a = m / 2.0;
    (a - 1.0) * x.ln() - x / 2.0 - a * std::f64::consts::LN_2 - ln_gamma(a)
}

#[inline]
pub(crate) fn ratio_sf(x: f64, m: f64, nu: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let y = 1.0 / (1.0 + x);
    let yc = x / (1.0 + x);
    beta_inc_pair(nu / 2.0, m / 2.0, y, yc).0
}

/// `ln Pr(chi2_m / chi2_nu >= x)`.
pub(crate) fn ratio_ln_sf(x: f64, m: f64, nu: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let (a, b) = (nu / 2.0, m / 2.0);
    let y = 1.0 / (1.0 + x);
    if y < (a + 1.0) / (a + b + 2.0) {
        let ln_y = -x.ln_1p();
        let ln_yc = x.ln() - x.ln_1p();
        let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * ln_y + b * ln_yc;
        ln_front + beta_cf(a, b, y).ln() - a.ln()
    } else {
        ratio_sf(x, m, nu).ln()
    }
}

#[inline]
fn ratio_ln_pdf(x: f64, m: f64, nu: f64) -> f64 {
    let (a, b) = (m / 2.0, nu / 2.0);
    (a - 1.0) * x.ln() - (a + b) * x.ln_1p() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

pub(crate) fn chi2_isf(u: f64, m: f64) -> f64 {
    let guess = (-2.0 * u.ln()).max(m * 0.5).max(1e-3);
    invert_survival(u, guess, |x| chi2_sf(x, m), |x| chi2_ln_pdf(x, m))
}

pub(crate) fn ratio_isf(u: f64, m: f64, nu: f64) -> f64 {
    let guess = ((-2.0 * u.ln()).max(m * 0.5) / nu).max(1e-6);
    invert_survival(u, guess, |x| ratio_sf(x, m, nu), |x| ratio_ln_pdf(x, m, nu))
}

pub(crate) fn chi2_isf_ln(ln_u: f64, m: f64) -> f64 {
    let guess = (-2.0 * ln_u).max(m * 0.5).max(1e-3);
    invert_ln_survival(ln_u, guess, |x| chi2_ln_sf(x, m), |x| chi2_ln_pdf(x, m))
}

pub(crate) fn ratio_isf_ln(ln_u: f64, m: f64, nu: f64) -> f64 {
    let guess = ((-2.0 * ln_u).max(m * 0.5) / nu).max(1e-6);
    invert_ln_survival(
        ln_u,
        guess,
        |x| ratio_ln_sf(x, m, nu),
        |x| ratio_ln_pdf(x, m, nu),
    )
}

/// Solves `ln sf(x) = ln_u` by safeguarded Newton steps, as
/// [`invert_survival`] but without ever leaving log space.
fn invert_ln_survival<S, D>(ln_u: f64, guess: f64, ln_sf: S, ln_pdf: D) -> f64
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if ln_u >= 0.0 {
        return 0.0;
    }
    if ln_u == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    let mut lo = 0.0_f64;
    let mut hi = 1e3_f64;
    while ln_sf(hi) > ln_u {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..400 {
        let s = ln_sf(x);
        if s == ln_u {
            return x;
        }
        if s > ln_u {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        // d ln sf / dx = -pdf / sf
        let hazard = (ln_pdf(x) - s).exp();
        let mut next = if hazard.is_finite() && hazard > 0.0 {
            x + (s - ln_u) / hazard
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = if lo > 0.0 && hi / lo > 16.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// Solves `sf(x) = u` for a continuous, strictly decreasing survival
/// function on `[0, inf)`. Newton steps on `ln sf`, falling back to
/// bisection whenever a step leaves the current bracket.
fn invert_survival<S, D>(u: f64, guess: f64, sf: S, ln_pdf: D) -> f64
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = 0.0_f64;
    let mut hi = 1e3_f64;
    while sf(hi) > u {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let ln_u = u.ln();
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..400 {
        let s = sf(x);
        if s == u {
            return x;
        }
        if s > u {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mut next = f64::NAN;
        if s > 0.0 {
            let pdf = ln_pdf(x).exp();
            if pdf.is_finite() && pdf > 0.0 {
                next = x + (s.ln() - ln_u) * s / pdf;
            }
        }
        if !(next > lo && next < hi) {
            next = if lo > 0.0 && hi / lo > 16.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x {
            x = next;
            break;
        }
        x = next;
    }
    x
}

// ---------------------------------------------------------------------------
// special functions

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)` for `z > 0`.
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * CF_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_cf(a: f64, x: f64) -> f64 {
    gamma_q_cf_ln(a, x).exp()
}

fn gamma_q_cf_ln(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    -x + a * x.ln() - ln_gamma(a) + h.ln()
}

/// Regularized incomplete beta `I_x(a, b)` together with its complement.
/// `xc` must equal `1 - x`; passing it separately keeps the small tail
/// accurate when `x` is close to one.
pub fn beta_inc_pair(a: f64, b: f64, x: f64, xc: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if xc <= 0.0 {
        return (1.0, 0.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * xc.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        let v = (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0);
        (v, 1.0 - v)
    } else {
        let w = (ln_front.exp() * beta_cf(b, a, xc) / b).clamp(0.0, 1.0);
        (1.0 - w, w)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}
