//! Fixed-design variable selection: OLS p-values, knockoff augmentation,
//! estimator fission into independent halves, and the paired procedures
//! built on top of them (BBH, Adapt-BBH, SBBH1-5, Rev-BBH, BBY, knockoff
//! filter).
//!
//! With `A = X'X` and a knockoff `X~` satisfying `X~'X~ = A` and
//! `X'X~ = A - D`, the estimators
//!
//! ```text
//! beta1 = (2A - D)^{-1} (X + X~)' Y      cov 2 eta^2 (2A - D)^{-1}
//! beta2 = D^{-1} (X - X~)' Y             cov 2 eta^2 D^{-1}
//! ```
//!
//! are independent because `(X + X~)'(X - X~) = 0`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corr::{tau_profile, CorrelationMatrix, ShiftProfile};
use crate::dist::{chi2_sf, ratio_sf, DistributionKind};
use crate::error::{domain, Error, Result};
use crate::procedures::{self, PreparedProcedure, ProcedureId, StepUpResult};

/// Largest accepted condition number of `A`.
const MAX_GRAM_CONDITION: f64 = 1e12;
/// Tolerance on the knockoff Gram identities and the fission certificate.
pub const ALGEBRA_TOL: f64 = 1e-8;
/// Safety factor of the equicorrelated `s` rule.
pub const EQUI_S_FACTOR: f64 = 0.999;

/// A design with unit-norm columns and its Gram matrix.
#[derive(Debug, Clone)]
pub struct RegressionData {
    x: DMatrix<f64>,
    y: DVector<f64>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    lambda_min: f64,
    scales: Vec<f64>,
}

impl RegressionData {
    /// Scales every column of `x` to unit Euclidean norm (no centering) and
    /// checks that the result has full column rank.
    pub fn new(mut x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, d) = x.shape();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if d == 0 {
            return domain("design needs at least one column");
        }
        if n <= d {
            return Err(Error::RankDeficient(format!("n = {n} must exceed d = {d}")));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return domain("design and response must be finite");
        }
        let mut scales = Vec::with_capacity(d);
        for j in 0..d {
            let norm = x.column(j).norm();
            if norm == 0.0 {
                return Err(Error::RankDeficient(format!(
                    "column {j} is identically zero"
                )));
            }
            x.column_mut(j).unscale_mut(norm);
            scales.push(norm);
        }
        let gram = x.tr_mul(&x);
        let ev = SymmetricEigen::new(gram.clone()).eigenvalues;
        let lo = ev.min();
        let hi = ev.max();
        if !(lo > 0.0) || hi / lo > MAX_GRAM_CONDITION {
            return Err(Error::RankDeficient(format!(
                "X'X has condition number {:.3e}",
                if lo > 0.0 { hi / lo } else { f64::INFINITY }
            )));
        }
        let gram_inv = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::RankDeficient("Cholesky factorization of X'X failed".into()))?
            .inverse();
        Ok(RegressionData {
            x,
            y,
            gram,
            gram_inv,
            lambda_min: lo,
            scales,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// `A = X'X`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inverse(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Original column norms; coefficient `j` on the input scale is
    /// `beta_j / scales[j]`.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Same design with a different response.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        Ok(RegressionData { y, ..self.clone() })
    }
}

/// OLS estimate, residual variance estimate and its degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub beta: Vec<f64>,
    pub eta2: f64,
    pub nu: u32,
}

pub fn ols_fit(data: &RegressionData) -> OlsFit {
    let xty = data.x.tr_mul(&data.y);
    let beta = &data.gram_inv * xty;
    let resid = &data.y - &data.x * &beta;
    let nu = data.n() - data.d();
    OlsFit {
        beta: beta.iter().copied().collect(),
        eta2: resid.norm_squared() / nu as f64,
        nu: nu as u32,
    }
}

/// Whether the noise level is treated as known (`eta = 1`) or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    #[default]
    Known,
    Estimated,
}

impl FromStr for VarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "known" => Ok(VarianceMode::Known),
            "estimated" | "unknown" => Ok(VarianceMode::Estimated),
            other => Err(Error::Config(format!(
                "unknown variance mode `{other}` (known | estimated)"
            ))),
        }
    }
}

/// Noise information attached to a set of estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseScale {
    Known,
    Estimated { eta2: f64, nu: u32 },
}

impl NoiseScale {
    pub fn dist(&self) -> DistributionKind {
        match *self {
            NoiseScale::Known => DistributionKind::ChiSq1,
            NoiseScale::Estimated { nu, .. } => DistributionKind::ScaledF { nu },
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            NoiseScale::Known => Ok(()),
            NoiseScale::Estimated { eta2, nu } if eta2 > 0.0 && nu >= 1 => Ok(()),
            NoiseScale::Estimated { eta2, nu } => domain(format!(
                "estimated noise needs eta2 > 0 and nu >= 1 (eta2 = {eta2}, nu = {nu})"
            )),
        }
    }

    /// Two-sided p-value of an estimate with squared value `b2` whose
    /// variance is `eta^2 * var`.
    fn pvalue(&self, b2: f64, var: f64) -> f64 {
        match *self {
            NoiseScale::Known => chi2_sf(b2 / var, 1.0),
            NoiseScale::Estimated { eta2, nu } => {
                ratio_sf(b2 / (var * nu as f64 * eta2), 1.0, nu as f64)
            }
        }
    }
}

/// `P_i = Psi1bar(beta_i^2 / (A^{-1})_ii)` with known noise, or the
/// `Psi1nu_bar(beta_i^2 / ((A^{-1})_ii nu eta2))` analogue.
pub fn coefficient_pvalues(
    beta: &[f64],
    gram_inv_diag: &[f64],
    noise: NoiseScale,
) -> Result<Vec<f64>> {
    if beta.len() != gram_inv_diag.len() {
        return Err(Error::DimensionMismatch {
            expected: gram_inv_diag.len(),
            got: beta.len(),
        });
    }
    noise.check()?;
    if gram_inv_diag.iter().any(|&v| !(v > 0.0)) {
        return domain("coefficient variances must be positive");
    }
    Ok(beta
        .iter()
        .zip(gram_inv_diag)
        .map(|(b, v)| noise.pvalue(b * b, *v))
        .collect())
}

/// How the knockoff gaps `s_j` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SRule {
    /// `s_j = min(2 lambda_min(A), 1) * 0.999` for every `j`.
    Equi,
    Custom(Vec<f64>),
}

/// Knockoff copy of a design together with the pieces used to build it.
#[derive(Debug, Clone)]
pub struct KnockoffAugmentation {
    pub x_tilde: DMatrix<f64>,
    pub s: Vec<f64>,
    /// Orthonormal columns orthogonal to `col(X)`.
    pub u_tilde: DMatrix<f64>,
    /// Upper-triangular `C` with `C'C = 2D - D A^{-1} D`.
    pub c: DMatrix<f64>,
    /// Orthonormal basis of `col([X, X~])`.
    basis: DMatrix<f64>,
}

impl KnockoffAugmentation {
    pub fn d_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.s))
    }

    /// `(||X~'X~ - A||_F, ||X'X~ - (A - D)||_F)`.
    pub fn gram_residuals(&self, data: &RegressionData) -> (f64, f64) {
        let a = data.gram();
        let r1 = (self.x_tilde.tr_mul(&self.x_tilde) - a).norm();
        let r2 = (data.x().tr_mul(&self.x_tilde) - (a - self.d_matrix())).norm();
        (r1, r2)
    }

    /// `||(X + X~)'(X - X~)||_F`.
    pub fn fission_certificate(&self, data: &RegressionData) -> f64 {
        let plus = data.x() + &self.x_tilde;
        let minus = data.x() - &self.x_tilde;
        plus.tr_mul(&minus).norm()
    }
}

/// `X~ = X A^{-1}(A - D) + U~ C`. `U~` is read off a Householder QR of
/// `[X | I_n]`, so the construction is deterministic given `X`.
pub fn construct_knockoffs(data: &RegressionData, rule: &SRule) -> Result<KnockoffAugmentation> {
    let (n, d) = (data.n(), data.d());
    if n < 2 * d {
        return Err(Error::InsufficientRows { n, d });
    }
    let s = match rule {
        SRule::Equi => vec![(2.0 * data.lambda_min).min(1.0) * EQUI_S_FACTOR; d],
        SRule::Custom(s) => {
            if s.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.len(),
                });
            }
            if s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return domain("knockoff gaps s_j must be positive");
            }
            s.clone()
        }
    };
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(&s));
    let a = data.gram();
    let ainv = data.gram_inverse();
    let mut inner = 2.0 * &dm - &dm * ainv * &dm;
    inner = 0.5 * (&inner + inner.transpose());
    let chol = inner.clone().cholesky().ok_or_else(|| {
        Error::NotPositiveDefinite("2D - D A^{-1} D (knockoff gaps s too large)".into())
    })?;
    let c = chol.l().transpose();

    let mut aug = DMatrix::zeros(n, n + d);
    aug.columns_mut(0, d).copy_from(data.x());
    for i in 0..n {
        aug[(i, d + i)] = 1.0;
    }
    let q = aug.qr().q();
    let u_tilde = q.columns(d, d).into_owned();
    let basis = q.columns(0, 2 * d).into_owned();

    let x_tilde = data.x() * (ainv * (a - &dm)) + &u_tilde * &c;
    let out = KnockoffAugmentation {
        x_tilde,
        s,
        u_tilde,
        c,
        basis,
    };
    let (r1, r2) = out.gram_residuals(data);
    if r1 > ALGEBRA_TOL || r2 > ALGEBRA_TOL {
        return Err(Error::Domain(format!(
            "knockoff Gram identities violated ({r1:.3e}, {r2:.3e})"
        )));
    }
    Ok(out)
}

/// The two independent halves of the OLS estimator.
#[derive(Debug, Clone)]
pub struct FissionPair {
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    /// `(2A - D)^{-1}`; `cov(beta1) = 2 eta^2 cov1`.
    pub cov1: DMatrix<f64>,
    pub s: Vec<f64>,
    /// Residual variance after regressing `Y` on `[X, X~]`; `None` when `n = 2d`.
    pub eta2_hat: Option<f64>,
    /// Degrees of freedom of `eta2_hat`, `n - 2d`.
    pub nu: u32,
    /// `||(X + X~)'(X - X~)||_F`.
    pub certificate: f64,
}

pub fn fission(data: &RegressionData, aug: &KnockoffAugmentation) -> Result<FissionPair> {
    let (n, d) = (data.n(), data.d());
    if aug.x_tilde.shape() != (n, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: aug.x_tilde.ncols(),
        });
    }
    let certificate = aug.fission_certificate(data);
    if certificate > ALGEBRA_TOL {
        return Err(Error::Domain(format!(
            "fission certificate {certificate:.3e} exceeds {ALGEBRA_TOL:e}"
        )));
    }
    let dm = aug.d_matrix();
    let two_a_minus_d = 2.0 * data.gram() - &dm;
    let cov1 = two_a_minus_d
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("2A - D".into()))?
        .inverse();
    let y = data.y();
    let plus = (data.x() + &aug.x_tilde).tr_mul(y);
    let minus = (data.x() - &aug.x_tilde).tr_mul(y);
    let beta1 = &cov1 * plus;
    let beta2: Vec<f64> = minus.iter().zip(&aug.s).map(|(m, s)| m / s).collect();

    let nu = n - 2 * d;
    let eta2_hat = (nu > 0).then(|| {
        let fitted = &aug.basis * aug.basis.tr_mul(y);
        (y - fitted).norm_squared() / nu as f64
    });
    Ok(FissionPair {
        beta1: beta1.iter().copied().collect(),
        beta2,
        cov1,
        s: aug.s.clone(),
        eta2_hat,
        nu: nu as u32,
        certificate,
    })
}

/// Null law used for `P2` in the estimated-variance mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P2Law {
    /// `Psi1nu_bar`, matching `P1`.
    #[default]
    ScaledF,
    /// `Psi1bar` applied to the `nu`-scaled statistic, taken literally.
    ChiSqLiteral,
}

/// `P1` (dependent, from `beta1`) and `P2` (independent, from `beta2`).
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPValues {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub noise: NoiseScale,
}

impl PairedPValues {
    pub fn dim(&self) -> usize {
        self.p1.len()
    }
}

pub fn paired_pvalues(
    pair: &FissionPair,
    mode: VarianceMode,
    p2_law: P2Law,
) -> Result<PairedPValues> {
    let noise = match mode {
        VarianceMode::Known => NoiseScale::Known,
        VarianceMode::Estimated => match pair.eta2_hat {
            Some(eta2) if eta2 > 0.0 => NoiseScale::Estimated { eta2, nu: pair.nu },
            _ => return domain("estimated-variance mode needs n > 2d and a nonzero residual"),
        },
    };
    let p1 = pair
        .beta1
        .iter()
        .enumerate()
        .map(|(i, b)| noise.pvalue(b * b, 2.0 * pair.cov1[(i, i)]))
        .collect();
    let p2 = pair
        .beta2
        .iter()
        .zip(&pair.s)
        .map(|(b, s)| match (noise, p2_law) {
            (NoiseScale::Estimated { eta2, nu }, P2Law::ChiSqLiteral) => {
                chi2_sf(s * b * b / (2.0 * nu as f64 * eta2), 1.0)
            }
            _ => noise.pvalue(b * b, 2.0 / s),
        })
        .collect();
    Ok(PairedPValues { p1, p2, noise })
}

/// `1(screen_i > t) + 1(screen_i <= t) * test_i`.
fn screened(screen: &[f64], test: &[f64], t: f64) -> Vec<f64> {
    screen
        .iter()
        .zip(test)
        .map(|(&s, &v)| if s > t { 1.0 } else { v })
        .collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha = {alpha} must lie in (0, 1)"))
    }
}

/// Screen on `P1` at `sqrt(alpha)`, then BH at `sqrt(alpha)` on `P2`.
pub fn bbh(pp: &PairedPValues, alpha: f64) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    let t = alpha.sqrt();
    procedures::bh(&screened(&pp.p1, &pp.p2, t), t)
}

/// BBH with `P2` replaced by `pi0_hat * P2`, `pi0_hat` Storey's estimate from `P2`.
pub fn adapt_bbh(pp: &PairedPValues, alpha: f64, lambda: f64) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    let pi0 = procedures::storey_pi0(&pp.p2, lambda)?;
    let scaled = PairedPValues {
        p1: pp.p1.clone(),
        p2: pp.p2.iter().map(|p| pi0 * p).collect(),
        noise: pp.noise,
    };
    bbh(&scaled, alpha)
}

/// Screen on `P2` at `sqrt(alpha)`, then BH at `sqrt(alpha)` on `P1`.
/// `RevBbhRoles::ScreenDependent` swaps the roles back, which is BBH.
pub fn rev_bbh(pp: &PairedPValues, alpha: f64, roles: RevBbhRoles) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    let t = alpha.sqrt();
    match roles {
        RevBbhRoles::ScreenIndependent => procedures::bh(&screened(&pp.p2, &pp.p1, t), t),
        RevBbhRoles::ScreenDependent => bbh(pp, alpha),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevBbhRoles {
    #[default]
    ScreenIndependent,
    ScreenDependent,
}

/// BBH screen with BY replacing BH.
pub fn bby(pp: &PairedPValues, alpha: f64) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    let t = alpha.sqrt();
    procedures::by(&screened(&pp.p1, &pp.p2, t), t)
}

/// Shift used by SBBH1..SBBH5.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbbhVariant {
    /// Per-coordinate `tau_i`.
    PerCoordinate,
    /// `tau = lambda_min`.
    LambdaMin,
    Min,
    Median,
    HarmMean,
}

impl SbbhVariant {
    pub fn from_index(k: u8) -> Option<Self> {
        Some(match k {
            1 => SbbhVariant::PerCoordinate,
            2 => SbbhVariant::LambdaMin,
            3 => SbbhVariant::Min,
            4 => SbbhVariant::Median,
            5 => SbbhVariant::HarmMean,
            _ => return None,
        })
    }

    pub fn index(&self) -> u8 {
        match self {
            SbbhVariant::PerCoordinate => 1,
            SbbhVariant::LambdaMin => 2,
            SbbhVariant::Min => 3,
            SbbhVariant::Median => 4,
            SbbhVariant::HarmMean => 5,
        }
    }

    /// The mean-testing member with the same shift.
    pub fn procedure(&self) -> ProcedureId {
        match self {
            SbbhVariant::PerCoordinate => ProcedureId::Sbh1,
            SbbhVariant::LambdaMin => ProcedureId::Sbh2New,
            SbbhVariant::Min => ProcedureId::Gsbh(1),
            SbbhVariant::Median => ProcedureId::Gsbh(3),
            SbbhVariant::HarmMean => ProcedureId::Gsbh(6),
        }
    }
}

/// Shift profile of `beta1`: `tau_profile` of the correlation matrix of `(2A - D)^{-1}`.
pub fn beta1_profile(pair: &FissionPair) -> Result<ShiftProfile> {
    tau_profile(&CorrelationMatrix::from_covariance(&pair.cov1)?)
}

/// Screen on `P2` at `sqrt(alpha)`, shift `P1`, and step up with
/// `alpha_i = i H^{-1}(sqrt(alpha) / d)`.
pub fn sbbh(
    pp: &PairedPValues,
    alpha: f64,
    profile: &ShiftProfile,
    variant: SbbhVariant,
) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    let t = alpha.sqrt();
    let prepared = PreparedProcedure::prepare(variant.procedure(), profile, t, pp.noise.dist())?;
    // 1 is a fixed point of every shift, so screening before shifting is exact
    prepared.apply(&screened(&pp.p2, &pp.p1, t))
}

/// Knockoff statistic `W_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnockoffStatistic {
    /// `|X_j'Y| - |X~_j'Y|`.
    #[default]
    MarginalCorrDiff,
}

pub fn knockoff_statistics(
    data: &RegressionData,
    aug: &KnockoffAugmentation,
    rule: KnockoffStatistic,
) -> Vec<f64> {
    match rule {
        KnockoffStatistic::MarginalCorrDiff => {
            let a = data.x().tr_mul(data.y());
            let b = aug.x_tilde.tr_mul(data.y());
            a.iter()
                .zip(b.iter())
                .map(|(u, v)| u.abs() - v.abs())
                .collect()
        }
    }
}

/// Smallest `t` among the nonzero `|W_j|` with
/// `(plus + #{W_j <= -t}) / max(#{W_j >= t}, 1) <= alpha`.
pub fn knockoff_threshold(w: &[f64], alpha: f64, plus: bool) -> Option<f64> {
    let mut cands: Vec<f64> = w.iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
    cands.sort_by(|a, b| a.total_cmp(b));
    cands.dedup();
    let offset = if plus { 1.0 } else { 0.0 };
    cands.into_iter().find(|&t| {
        let neg = w.iter().filter(|&&v| v <= -t).count() as f64;
        let pos = w.iter().filter(|&&v| v >= t).count().max(1) as f64;
        (offset + neg) / pos <= alpha
    })
}

/// Selected indices `{j : W_j >= T}`; `threshold` in the result is `T`.
pub fn knockoff_select(w: &[f64], alpha: f64, plus: bool) -> StepUpResult {
    match knockoff_threshold(w, alpha, plus) {
        None => StepUpResult::none(),
        Some(t) => {
            let rejected: Vec<usize> = (0..w.len()).filter(|&j| w[j] >= t).collect();
            StepUpResult {
                rejections: rejected.len(),
                rejected,
                threshold: t,
            }
        }
    }
}

pub fn knockoff_filter(
    data: &RegressionData,
    aug: &KnockoffAugmentation,
    alpha: f64,
    rule: KnockoffStatistic,
    plus: bool,
) -> Result<StepUpResult> {
    check_alpha(alpha)?;
    Ok(knockoff_select(
        &knockoff_statistics(data, aug, rule),
        alpha,
        plus,
    ))
}

/// Procedures available on a knockoff-augmented design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairedProcedure {
    /// BH at level `alpha` on the independent set `P2` alone.
    BhIndependent,
    Bbh,
    AdaptBbh,
    Sbbh(SbbhVariant),
    RevBbh,
    Bby,
    Knockoff,
    KnockoffPlus,
}

impl PairedProcedure {
    pub fn catalog() -> Vec<PairedProcedure> {
        let mut v = vec![
            PairedProcedure::BhIndependent,
            PairedProcedure::Bbh,
            PairedProcedure::AdaptBbh,
        ];
        v.extend((1..=5).map(|k| PairedProcedure::Sbbh(SbbhVariant::from_index(k).unwrap())));
        v.extend([
            PairedProcedure::RevBbh,
            PairedProcedure::Bby,
            PairedProcedure::Knockoff,
            PairedProcedure::KnockoffPlus,
        ]);
        v
    }

    pub fn needs_beta1_profile(&self) -> bool {
        matches!(self, PairedProcedure::Sbbh(_))
    }
}

impl fmt::Display for PairedProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairedProcedure::BhIndependent => write!(f, "bh_p2"),
            PairedProcedure::Bbh => write!(f, "bbh"),
            PairedProcedure::AdaptBbh => write!(f, "adapt_bbh"),
            PairedProcedure::Sbbh(v) => write!(f, "sbbh{}", v.index()),
            PairedProcedure::RevBbh => write!(f, "rev_bbh"),
            PairedProcedure::Bby => write!(f, "bby"),
            PairedProcedure::Knockoff => write!(f, "knockoff"),
            PairedProcedure::KnockoffPlus => write!(f, "knockoff_plus"),
        }
    }
}

impl FromStr for PairedProcedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match s.as_str() {
            "bh_p2" => PairedProcedure::BhIndependent,
            "bbh" => PairedProcedure::Bbh,
            "adapt_bbh" => PairedProcedure::AdaptBbh,
            "rev_bbh" => PairedProcedure::RevBbh,
            "bby" => PairedProcedure::Bby,
            "knockoff" => PairedProcedure::Knockoff,
            "knockoff_plus" | "knockoff+" => PairedProcedure::KnockoffPlus,
            _ => {
                let v = s
                    .strip_prefix("sbbh")
                    .and_then(|k| k.parse::<u8>().ok())
                    .and_then(SbbhVariant::from_index)
                    .ok_or_else(|| Error::Config(format!("unknown paired procedure `{s}`")))?;
                PairedProcedure::Sbbh(v)
            }
        })
    }
}

impl Serialize for PairedProcedure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PairedProcedure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Options shared by the paired procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairedOptions {
    pub variance: VarianceMode,
    pub p2_law: P2Law,
    pub storey_lambda: f64,
    pub rev_bbh_roles: RevBbhRoles,
    pub statistic: KnockoffStatistic,
}

impl Default for PairedOptions {
    fn default() -> Self {
        PairedOptions {
            variance: VarianceMode::Known,
            p2_law: P2Law::ScaledF,
            storey_lambda: procedures::STOREY_DEFAULT_LAMBDA,
            rev_bbh_roles: RevBbhRoles::ScreenIndependent,
            statistic: KnockoffStatistic::MarginalCorrDiff,
        }
    }
}

/// Everything the paired procedures need from one design and response.
#[derive(Debug, Clone)]
pub struct KnockoffAnalysis {
    pub aug: KnockoffAugmentation,
    pub pair: FissionPair,
    pub pvalues: PairedPValues,
    /// Filled lazily; only SBBH needs it.
    profile: Option<ShiftProfile>,
    w: Vec<f64>,
    options: PairedOptions,
}

impl KnockoffAnalysis {
    pub fn new(data: &RegressionData, rule: &SRule, options: PairedOptions) -> Result<Self> {
        let aug = construct_knockoffs(data, rule)?;
        let pair = fission(data, &aug)?;
        let pvalues = paired_pvalues(&pair, options.variance, options.p2_law)?;
        let w = knockoff_statistics(data, &aug, options.statistic);
        Ok(KnockoffAnalysis {
            aug,
            pair,
            pvalues,
            profile: None,
            w,
            options,
        })
    }

    /// Computes the `beta1` shift profile now rather than on first use.
    pub fn with_profile(mut self) -> Result<Self> {
        if self.profile.is_none() {
            self.profile = Some(beta1_profile(&self.pair)?);
        }
        Ok(self)
    }

    pub fn profile(&self) -> Option<&ShiftProfile> {
        self.profile.as_ref()
    }

    pub fn statistics(&self) -> &[f64] {
        &self.w
    }

    pub fn run(&self, procedure: PairedProcedure, alpha: f64) -> Result<StepUpResult> {
        let pp = &self.pvalues;
        match procedure {
            PairedProcedure::BhIndependent => procedures::bh(&pp.p2, alpha),
            PairedProcedure::Bbh => bbh(pp, alpha),
            PairedProcedure::AdaptBbh => adapt_bbh(pp, alpha, self.options.storey_lambda),
            PairedProcedure::RevBbh => rev_bbh(pp, alpha, self.options.rev_bbh_roles),
            PairedProcedure::Bby => bby(pp, alpha),
            PairedProcedure::Knockoff | PairedProcedure::KnockoffPlus => {
                check_alpha(alpha)?;
                Ok(knockoff_select(
                    &self.w,
                    alpha,
                    procedure == PairedProcedure::KnockoffPlus,
                ))
            }
            PairedProcedure::Sbbh(v) => match &self.profile {
                Some(profile) => sbbh(pp, alpha, profile, v),
                None => sbbh(pp, alpha, &beta1_profile(&self.pair)?, v),
            },
        }
    }
}

/// OLS inference feeding the mean-testing catalog: p-values from `beta_hat`
/// and the shift profile of `corr(A^{-1})`.
#[derive(Debug, Clone)]
pub struct OlsAnalysis {
    pub fit: OlsFit,
    pub pvalues: Vec<f64>,
    pub noise: NoiseScale,
    pub profile: ShiftProfile,
}

impl OlsAnalysis {
    pub fn new(data: &RegressionData, mode: VarianceMode) -> Result<Self> {
        let fit = ols_fit(data);
        let noise = match mode {
            VarianceMode::Known => NoiseScale::Known,
            VarianceMode::Estimated => NoiseScale::Estimated {
                eta2: fit.eta2,
                nu: fit.nu,
            },
        };
        let diag: Vec<f64> = (0..data.d()).map(|i| data.gram_inverse()[(i, i)]).collect();
        let pvalues = coefficient_pvalues(&fit.beta, &diag, noise)?;
        let profile = tau_profile(&CorrelationMatrix::from_covariance(data.gram_inverse())?)?;
        Ok(OlsAnalysis {
            fit,
            pvalues,
            noise,
            profile,
        })
    }

    pub fn run(&self, id: ProcedureId, alpha: f64) -> Result<StepUpResult> {
        procedures::run_procedure(id, &self.pvalues, &self.profile, alpha, self.noise.dist())
    }
}
