//! Numeric invariant suite: kernel accuracy against closed forms, shape
//! properties of the shifted survival maps, left-tail dependence grids,
//! knockoff algebra and bound-function roundtrips.
//!
//! Every check reports its worst observed violation next to the tolerance
//! it was held to. Tolerances are multiplied by a common scale so a caller
//! (or the `SHIFTFDR_CHECK_TOL_SCALE` variable) can tighten them and
//! provoke a controlled failure.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::corr::{
    make_correlation, select_tau, tau_profile, MvnSampler, StructureKind, StructureSpec, TauRule,
};
use crate::dist::{
    chi2_quantile_upper, chi2_survival, noncentral_chi2_survival, scaled_f_quantile_upper,
    scaled_f_survival, DistributionKind,
};
use crate::error::{Error, Result};
use crate::regression::{construct_knockoffs, fission, RegressionData, SRule};
use crate::rng::stream;
use crate::shift::{BoundFunction, CalibrationMethod};

pub const TOL_SCALE_ENV: &str = "SHIFTFDR_CHECK_TOL_SCALE";

pub const KERNEL_TOL: f64 = 1e-9;
pub const ROUNDTRIP_TOL: f64 = 1e-10;
pub const SECOND_DIFF_TOL: f64 = 1e-9;
pub const MONOTONE_TOL: f64 = 1e-9;
pub const ALGEBRA_TOL: f64 = 1e-8;

const GRID: usize = 1000;

type Oracle = fn(f64) -> f64;
const PLTDN_GRID: usize = 200;

/// One row of the pass/fail table.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Largest violation seen; compared against `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    /// Number of grid points, designs or replications examined.
    pub points: usize,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, worst: f64, tolerance: f64, points: usize) -> Self {
        // NaN never passes
        let pass = worst <= tolerance;
        CheckResult {
            name: name.into(),
            worst,
            tolerance,
            points,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub scale: f64,
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn table(&self) -> String {
        let width = self
            .results
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>12}  {:>12}  status",
            "check", "points", "worst", "tolerance"
        );
        for r in &self.results {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>12.3e}  {:>12.3e}  {}",
                r.name,
                r.points,
                r.worst,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        out
    }
}

/// Reads the tolerance scale from the environment; 1 when unset.
pub fn tolerance_scale_from_env() -> Result<f64> {
    match std::env::var(TOL_SCALE_ENV) {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
            _ => Err(Error::Config(format!(
                "{TOL_SCALE_ENV} = `{s}` is not a nonnegative number"
            ))),
        },
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `k / (n + 1)` for `k = 1..=n`.
fn open_unit_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs()
    }
}

fn max_over(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, v| if v.is_nan() || v > m { v } else { m })
}

/// `Pr(chi2_1 >= x)` through `erfc`.
fn chi2_1_oracle(x: f64) -> f64 {
    libm::erfc((0.5 * x).sqrt())
}

fn chi2_2_oracle(x: f64) -> f64 {
    (-0.5 * x).exp()
}

fn chi2_3_oracle(x: f64) -> f64 {
    libm::erfc((0.5 * x).sqrt()) + (2.0 * x / std::f64::consts::PI).sqrt() * (-0.5 * x).exp()
}

/// `Pr(chi2_1 / chi2_1 >= x)`: the square of a standard Cauchy.
fn ratio_1_1_oracle(x: f64) -> f64 {
    std::f64::consts::FRAC_2_PI * (1.0 / x.sqrt()).atan()
}

/// `Pr(chi2_1 / chi2_2 >= x) = Pr(|t_2| >= sqrt(2x))`, written without cancellation.
fn ratio_1_2_oracle(x: f64) -> f64 {
    let t = (2.0 * x).sqrt();
    let s = (t * t + 2.0).sqrt();
    2.0 / (s * (s + t))
}

/// `Pr(chi2_2 / chi2_2 >= x)`: the ratio of two unit exponentials.
fn ratio_2_2_oracle(x: f64) -> f64 {
    1.0 / (1.0 + x)
}

/// Survival functions and quantiles against closed forms built from `erfc`,
/// `exp` and `atan`, relative error over 10^3 points each.
pub fn kernel_accuracy(scale: f64) -> Vec<CheckResult> {
    let tol = KERNEL_TOL * scale;
    let mut out = Vec::new();

    let chi_x = log_grid(1e-8, 1300.0, GRID);
    let chi_cases: [(u32, Oracle); 3] =
        [(1, chi2_1_oracle), (2, chi2_2_oracle), (3, chi2_3_oracle)];
    for (m, oracle) in chi_cases {
        let worst = max_over(
            chi_x
                .iter()
                .map(|&x| rel_err(chi2_survival(x, m).unwrap_or(f64::NAN), oracle(x))),
        );
        out.push(CheckResult::new(
            format!("chi2_{m} survival vs closed form"),
            worst,
            tol,
            chi_x.len(),
        ));
    }

    let ratio_x = log_grid(1e-8, 1e12, GRID);
    let ratio_cases: [(u32, u32, Oracle); 3] = [
        (1, 1, ratio_1_1_oracle),
        (1, 2, ratio_1_2_oracle),
        (2, 2, ratio_2_2_oracle),
    ];
    for (m, nu, oracle) in ratio_cases {
        let worst = max_over(
            ratio_x
                .iter()
                .map(|&x| rel_err(scaled_f_survival(x, m, nu).unwrap_or(f64::NAN), oracle(x))),
        );
        out.push(CheckResult::new(
            format!("scaled-F({m},{nu}) survival vs closed form"),
            worst,
            tol,
            ratio_x.len(),
        ));
    }

    // quantiles: the oracle survival at the returned point must give back u
    let u_chi = log_grid(1e-300, 0.999, GRID);
    let worst = max_over(u_chi.iter().map(|&u| {
        rel_err(
            chi2_1_oracle(chi2_quantile_upper(u, 1).unwrap_or(f64::NAN)),
            u,
        )
    }));
    out.push(CheckResult::new(
        "chi2_1 quantile roundtrip via erfc",
        worst,
        tol,
        u_chi.len(),
    ));

    let u_cauchy = log_grid(1e-150, 0.999, GRID);
    let worst = max_over(u_cauchy.iter().map(|&u| {
        rel_err(
            ratio_1_1_oracle(scaled_f_quantile_upper(u, 1, 1).unwrap_or(f64::NAN)),
            u,
        )
    }));
    out.push(CheckResult::new(
        "scaled-F(1,1) quantile roundtrip via atan",
        worst,
        tol,
        u_cauchy.len(),
    ));

    let u_t2 = log_grid(1e-250, 0.999, GRID);
    let worst = max_over(u_t2.iter().map(|&u| {
        rel_err(
            ratio_1_2_oracle(scaled_f_quantile_upper(u, 1, 2).unwrap_or(f64::NAN)),
            u,
        )
    }));
    out.push(CheckResult::new(
        "scaled-F(1,2) quantile roundtrip",
        worst,
        tol,
        u_t2.len(),
    ));
    out
}

/// Largest positive second difference of `f` over a uniform grid.
fn worst_convexity(grid: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let v: Vec<f64> = grid.iter().map(|&u| f(u)).collect();
    max_over(v.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]))
}

/// `u -> Psi_{m+h}(theta Psi_m^{-1}(u))` is concave for `theta <= 1`.
pub fn concavity_chi2(scale: f64) -> CheckResult {
    let grid = open_unit_grid(GRID);
    let mut worst = 0.0f64;
    let mut points = 0;
    for m in [1u32, 2, 3] {
        for h in [0u32, 1, 2, 4] {
            for theta in [0.1, 0.5, 0.9, 1.0] {
                let f = |u: f64| {
                    let q = chi2_quantile_upper(u, m).unwrap_or(f64::NAN);
                    chi2_survival(theta * q, m + h).unwrap_or(f64::NAN)
                };
                worst = max_over([worst, worst_convexity(&grid, f)].into_iter());
                points += grid.len();
            }
        }
    }
    CheckResult::new(
        "chi2 shifted survival is concave",
        worst,
        SECOND_DIFF_TOL * scale,
        points,
    )
}

/// The same shape property for the scaled-F pair `chi2_{m+h}/chi2_nu`.
pub fn concavity_scaled_f(scale: f64) -> CheckResult {
    let grid = open_unit_grid(GRID);
    let mut worst = 0.0f64;
    let mut points = 0;
    for (m, nu) in [(1u32, 5u32), (1, 20), (3, 10)] {
        for h in [0u32, 2] {
            for theta in [0.2, 0.7, 1.0] {
                let f = |u: f64| {
                    let q = scaled_f_quantile_upper(u, m, nu).unwrap_or(f64::NAN);
                    scaled_f_survival(theta * q, m + h, nu).unwrap_or(f64::NAN)
                };
                worst = max_over([worst, worst_convexity(&grid, f)].into_iter());
                points += grid.len();
            }
        }
    }
    CheckResult::new(
        "scaled-F shifted survival is concave",
        worst,
        SECOND_DIFF_TOL * scale,
        points,
    )
}

/// For `u < u'`, `x -> Psi_m(x q_u) / Psi_m(x q_u')` is nonincreasing.
/// Reports the largest relative increase between neighbouring grid points.
pub fn tp2_ratio(scale: f64) -> CheckResult {
    let x_grid: Vec<f64> = (1..=GRID).map(|k| 3.0 * k as f64 / GRID as f64).collect();
    let pairs = [(0.01, 0.05), (0.05, 0.5), (0.2, 0.8), (0.5, 0.95)];
    let mut worst = 0.0f64;
    let mut points = 0;
    for m in [1u32, 3, 5] {
        for &(u, u2) in &pairs {
            let q = chi2_quantile_upper(u, m).unwrap_or(f64::NAN);
            let q2 = chi2_quantile_upper(u2, m).unwrap_or(f64::NAN);
            let r: Vec<f64> = x_grid
                .iter()
                .map(|&x| {
                    chi2_survival(x * q, m).unwrap_or(f64::NAN)
                        / chi2_survival(x * q2, m).unwrap_or(f64::NAN)
                })
                .collect();
            worst =
                max_over([worst, max_over(r.windows(2).map(|w| (w[1] - w[0]) / w[0]))].into_iter());
            points += x_grid.len();
        }
    }
    CheckResult::new(
        "chi2 survival ratio is monotone (TP2)",
        worst,
        MONOTONE_TOL * scale,
        points,
    )
}

/// Bivariate null with correlation `rho`: `Pr(P1 <= u | X2 = x) / u` is
/// nonincreasing in `u`. The conditional law of `X1^2 / (1 - rho^2)` is a
/// noncentral chi-square with one degree of freedom.
pub fn pltdn_grid(scale: f64) -> CheckResult {
    let grid = open_unit_grid(PLTDN_GRID);
    let mut worst = 0.0f64;
    let mut points = 0;
    for rho in [0.3f64, 0.7] {
        for x in [0.0f64, 1.0, 2.0] {
            let lambda = (rho * x).powi(2) / (1.0 - rho * rho);
            let g: Vec<f64> = grid
                .iter()
                .map(|&u| {
                    let q = chi2_quantile_upper(u, 1).unwrap_or(f64::NAN);
                    noncentral_chi2_survival(q, 1, lambda).unwrap_or(f64::NAN) / u
                })
                .collect();
            worst =
                max_over([worst, max_over(g.windows(2).map(|w| (w[1] - w[0]) / w[0]))].into_iter());
            points += grid.len();
        }
    }
    CheckResult::new(
        "conditional tail ratio is nonincreasing",
        worst,
        MONOTONE_TOL * scale,
        points,
    )
}

/// `H(H^{-1}(t)) = t` over log-spaced targets for GSBH and per-coordinate
/// bounds on two dependence structures, both null laws.
pub fn bound_roundtrip(scale: f64) -> Result<CheckResult> {
    let d = 40;
    let per_bound = GRID / 8;
    let mut worst = 0.0f64;
    let mut points = 0;
    for kind in [
        StructureKind::Equi { rho: 0.5 },
        StructureKind::Ar1 { rho: 0.7 },
    ] {
        let profile = tau_profile(&make_correlation(&StructureSpec::new(kind, d))?)?;
        let tau = select_tau(&profile, TauRule::Median)?;
        for dist in [
            DistributionKind::ChiSq1,
            DistributionKind::ScaledF { nu: 60 },
        ] {
            for method in [CalibrationMethod::Gsbh, CalibrationMethod::Sbh1] {
                let bound = BoundFunction::new(&profile, tau, dist, method)?;
                let top = bound.eval(1.0 / d as f64)?;
                for t in log_grid(1e-7 * top, 0.999 * top, per_bound) {
                    let u = bound.inverse(t)?;
                    worst = max_over([worst, rel_err(bound.eval(u)?, t)].into_iter());
                    points += 1;
                }
            }
        }
    }
    Ok(CheckResult::new(
        "bound function inverse roundtrip",
        worst,
        ROUNDTRIP_TOL * scale,
        points,
    ))
}

fn random_design(
    kind: StructureKind,
    n: usize,
    d: usize,
    seed: u64,
    index: u64,
) -> Result<RegressionData> {
    let sigma = make_correlation(&StructureSpec::new(kind, d))?;
    let sampler = MvnSampler::new(&sigma)?;
    let mut rng = stream(seed, index);
    let x = sampler.sample_rows(n, &mut rng);
    RegressionData::new(x, DVector::zeros(n))
}

/// Knockoff Gram identities and the fission orthogonality certificate
/// (Frobenius norms) on `designs` random designs.
pub fn knockoff_algebra(
    designs: usize,
    n: usize,
    d: usize,
    seed: u64,
    scale: f64,
) -> Result<CheckResult> {
    let kinds = [
        StructureKind::Equi { rho: 0.0 },
        StructureKind::Equi { rho: 0.3 },
        StructureKind::Ar1 { rho: 0.5 },
        StructureKind::BlockDiagonal { within_rho: 0.5 },
    ];
    let mut worst = 0.0f64;
    for k in 0..designs {
        let data = random_design(kinds[k % kinds.len()], n, d, seed, k as u64)?;
        let v = match construct_knockoffs(&data, &SRule::Equi) {
            Ok(aug) => {
                let (r1, r2) = aug.gram_residuals(&data);
                max_over([r1, r2, aug.fission_certificate(&data)].into_iter())
            }
            Err(_) => f64::INFINITY,
        };
        worst = max_over([worst, v].into_iter());
    }
    Ok(CheckResult::new(
        format!("knockoff algebra (n={n}, d={d})"),
        worst,
        ALGEBRA_TOL * scale,
        designs,
    ))
}

/// Sample correlation of `beta1_j` and `beta2_j` across `reps` noise draws
/// on one fixed design; the largest `|corr|` over `j` is held to `4/sqrt(reps)`.
pub fn fission_independence(
    reps: usize,
    n: usize,
    d: usize,
    seed: u64,
    scale: f64,
) -> Result<CheckResult> {
    if reps < 2 {
        return Err(Error::Domain(
            "fission independence needs at least two replications".into(),
        ));
    }
    let data = random_design(StructureKind::Equi { rho: 0.3 }, n, d, seed, u64::MAX)?;
    let aug = construct_knockoffs(&data, &SRule::Equi)?;
    let mut b1 = DMatrix::zeros(reps, d);
    let mut b2 = DMatrix::zeros(reps, d);
    let mut rng = stream(seed, u64::MAX - 1);
    for r in 0..reps {
        let y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let pair = fission(&data.with_response(y)?, &aug)?;
        for j in 0..d {
            b1[(r, j)] = pair.beta1[j];
            b2[(r, j)] = pair.beta2[j];
        }
    }
    let worst = max_over(
        (0..d).map(|j| sample_corr(b1.column(j).as_slice(), b2.column(j).as_slice()).abs()),
    );
    let tol = 4.0 / (reps as f64).sqrt() * scale;
    Ok(CheckResult::new(
        "fission halves are uncorrelated",
        worst,
        tol,
        reps,
    ))
}

fn sample_corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// The full suite as run by `shiftfdr check`.
pub fn run_all(scale: f64) -> Result<CheckReport> {
    let mut results = kernel_accuracy(scale);
    results.push(bound_roundtrip(scale)?);
    results.push(concavity_chi2(scale));
    results.push(concavity_scaled_f(scale));
    results.push(tp2_ratio(scale));
    results.push(pltdn_grid(scale));
    results.push(knockoff_algebra(100, 100, 40, 2024, scale)?);
    results.push(fission_independence(10_000, 100, 40, 2024, scale)?);
    Ok(CheckReport { scale, results })
}
