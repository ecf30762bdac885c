//! Correlation structures, shift profiles and multivariate normal sampling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e12;
/// Smallest eigenvalue a repaired random structure is lifted to.
const REPAIR_FLOOR: f64 = 0.05;

/// A symmetric positive-definite matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    m: DMatrix<f64>,
}

impl CorrelationMatrix {
    /// Validates `m`: square, unit diagonal, symmetric to 1e-12 and
    /// Cholesky-factorizable.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Domain("correlation matrix must have d >= 1".into()));
        }
        let d = m.nrows();
        for i in 0..d {
            if (m[(i, i)] - 1.0).abs() > SYMMETRY_TOL {
                return Err(Error::Domain(format!(
                    "diagonal entry {i} is {} (must be 1)",
                    m[(i, i)]
                )));
            }
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::Domain(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut m = m;
        // exact unit diagonal and exact symmetry from here on
        for i in 0..d {
            m[(i, i)] = 1.0;
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        if m.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite(
                "Cholesky factorization failed".into(),
            ));
        }
        Ok(CorrelationMatrix { m })
    }

    pub fn identity(d: usize) -> Self {
        CorrelationMatrix {
            m: DMatrix::identity(d, d),
        }
    }

    /// Rescales a covariance (or any SPD) matrix to unit diagonal,
    /// `D^{-1/2} M D^{-1/2}`.
    pub fn from_covariance(cov: &DMatrix<f64>) -> Result<Self> {
        let d = cov.nrows();
        if cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cov.ncols(),
            });
        }
        let scale: Vec<f64> = (0..d)
            .map(|i| {
                let v = cov[(i, i)];
                if v > 0.0 {
                    Ok(1.0 / v.sqrt())
                } else {
                    Err(Error::NotPositiveDefinite(format!(
                        "non-positive diagonal at {i}"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        let mut m = cov.clone();
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] *= scale[i] * scale[j];
            }
            m[(i, i)] = 1.0;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn is_identity(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.m[(i, j)] == 0.0))
    }

    /// Lower Cholesky factor `L` with `L L' = Sigma`.
    pub fn cholesky_lower(&self) -> Result<DMatrix<f64>> {
        self.m
            .clone()
            .cholesky()
            .map(|c| c.l())
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Fraction of nonzero off-diagonal entries.
    pub fn off_diagonal_density(&self) -> f64 {
        let d = self.dim();
        if d < 2 {
            return 0.0;
        }
        let nonzero = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.m[(i, j)] != 0.0)
            .count();
        nonzero as f64 / (d * (d - 1)) as f64
    }
}

/// The six dependence families used by the simulation studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureKind {
    /// All off-diagonal entries equal to `rho`.
    Equi { rho: f64 },
    /// `rho^|i-j|`.
    Ar1 { rho: f64 },
    /// Inverse of the AR(1) matrix, rescaled to unit diagonal.
    Iar1 { rho: f64 },
    /// `d/4` equicorrelated blocks of size four.
    BlockDiagonal {
        #[serde(default = "default_within_rho")]
        within_rho: f64,
    },
    /// Random symmetric support over the off-diagonal entries.
    Sparse {
        #[serde(default = "default_density")]
        density: f64,
        #[serde(default)]
        seed: u64,
    },
    /// A random subset of variables correlated with every other variable.
    Prefixed {
        #[serde(default = "default_fraction")]
        fraction: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_within_rho() -> f64 {
    0.5
}
fn default_density() -> f64 {
    0.2
}
fn default_fraction() -> f64 {
    0.25
}

impl StructureKind {
    /// Short label used in result tables.
    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::Equi { .. } => "equi",
            StructureKind::Ar1 { .. } => "ar1",
            StructureKind::Iar1 { .. } => "iar1",
            StructureKind::BlockDiagonal { .. } => "block",
            StructureKind::Sparse { .. } => "sparse",
            StructureKind::Prefixed { .. } => "prefixed",
        }
    }

    /// The correlation parameter, if the family has one.
    pub fn rho(&self) -> Option<f64> {
        match *self {
            StructureKind::Equi { rho }
            | StructureKind::Ar1 { rho }
            | StructureKind::Iar1 { rho } => Some(rho),
            StructureKind::BlockDiagonal { within_rho } => Some(within_rho),
            StructureKind::Sparse { .. } | StructureKind::Prefixed { .. } => None,
        }
    }

    /// Same family with its random seed replaced; no-op for deterministic
    /// families.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            StructureKind::Sparse { density, .. } => StructureKind::Sparse {
                density,
                seed: new_seed,
            },
            StructureKind::Prefixed { fraction, .. } => StructureKind::Prefixed {
                fraction,
                seed: new_seed,
            },
            other => other,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            StructureKind::Sparse { .. } | StructureKind::Prefixed { .. }
        )
    }

    /// Parses `name` plus an optional `rho`, e.g. `("ar1", Some(0.7))`.
    pub fn from_name(name: &str, rho: Option<f64>) -> Result<Self> {
        let need_rho = || rho.ok_or_else(|| Error::Config(format!("structure `{name}` needs rho")));
        Ok(match name.to_ascii_lowercase().as_str() {
            "identity" | "indep" => StructureKind::Equi { rho: 0.0 },
            "equi" => StructureKind::Equi { rho: need_rho()? },
            "ar1" | "ar" => StructureKind::Ar1 { rho: need_rho()? },
            "iar1" | "iar" => StructureKind::Iar1 { rho: need_rho()? },
            "block" | "blockdiagonal" | "block_diagonal" | "cluster" => {
                StructureKind::BlockDiagonal {
                    within_rho: rho.unwrap_or_else(default_within_rho),
                }
            }
            "sparse" => StructureKind::Sparse {
                density: default_density(),
                seed: 0,
            },
            "prefixed" => StructureKind::Prefixed {
                fraction: default_fraction(),
                seed: 0,
            },
            other => return Err(Error::Config(format!("unknown structure `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    #[serde(flatten)]
    pub kind: StructureKind,
    pub d: usize,
}

impl StructureSpec {
    pub fn new(kind: StructureKind, d: usize) -> Self {
        StructureSpec { kind, d }
    }
}

/// Builds the correlation matrix described by `spec`. Deterministic given
/// the spec (including the seed of the random families).
pub fn make_correlation(spec: &StructureSpec) -> Result<CorrelationMatrix> {
    let d = spec.d;
    if d < 2 {
        return Err(Error::Domain(format!("structure needs d >= 2, got {d}")));
    }
    let check_rho = |rho: f64| {
        if rho > -1.0 && rho < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("rho = {rho} must lie in (-1, 1)")))
        }
    };
    let m = match spec.kind {
        StructureKind::Equi { rho } => {
            check_rho(rho)?;
            equicorrelated(d, rho)
        }
        StructureKind::Ar1 { rho } => {
            check_rho(rho)?;
            ar1(d, rho)
        }
        StructureKind::Iar1 { rho } => {
            check_rho(rho)?;
            inverse_ar1(d, rho)
        }
        StructureKind::BlockDiagonal { within_rho } => {
            check_rho(within_rho)?;
            let mut m = DMatrix::identity(d, d);
            for i in 0..d {
                for j in 0..d {
                    if i != j && i / 4 == j / 4 {
                        m[(i, j)] = within_rho;
                    }
                }
            }
            m
        }
        StructureKind::Sparse { density, seed } => {
            if !(density > 0.0 && density <= 1.0) {
                return Err(Error::Domain(format!(
                    "sparse density {density} must lie in (0, 1]"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs: Vec<(usize, usize)> = (0..d)
                .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                .collect();
            let count = ((density * pairs.len() as f64).round() as usize).clamp(1, pairs.len());
            let mut m = DMatrix::identity(d, d);
            for idx in sample_indices(&mut rng, pairs.len(), count).into_vec() {
                let (i, j) = pairs[idx];
                let v = nonzero_uniform(&mut rng);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            repair(m)
        }
        StructureKind::Prefixed { fraction, seed } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::Domain(format!(
                    "prefixed fraction {fraction} must lie in (0, 1]"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = prefixed_count(d, fraction);
            let mut chosen = sample_indices(&mut rng, d, k).into_vec();
            chosen.sort_unstable();
            let mut m = DMatrix::identity(d, d);
            let mut in_set = vec![false; d];
            for &i in &chosen {
                in_set[i] = true;
            }
            for i in 0..d {
                for j in i + 1..d {
                    if in_set[i] || in_set[j] {
                        let v = nonzero_uniform(&mut rng);
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
            repair(m)
        }
    };
    CorrelationMatrix::new(m)
}

/// Number of variables correlated with everything in the prefixed family.
pub fn prefixed_count(d: usize, fraction: f64) -> usize {
    ((fraction * d as f64).ceil() as usize).clamp(1, d)
}

fn nonzero_uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random_range(-0.5..0.5);
        if v != 0.0 {
            return v;
        }
    }
}

/// Lifts the spectrum to at least `REPAIR_FLOOR` and renormalizes the
/// diagonal; the support is left unchanged.
fn repair(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let lambda = SymmetricEigen::new(m.clone()).eigenvalues.min();
    let delta = (REPAIR_FLOOR - lambda).max(0.0);
    if delta > 0.0 {
        let d = m.nrows();
        for i in 0..d {
            m[(i, i)] += delta;
        }
        let s = 1.0 / (1.0 + delta);
        m *= s;
        for i in 0..d {
            m[(i, i)] = 1.0;
        }
    }
    m
}

fn equicorrelated(d: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { rho })
}

fn ar1(d: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

fn inverse_ar1(d: usize, rho: f64) -> DMatrix<f64> {
    // tridiagonal AR(1) precision, then rescale to unit diagonal
    let r2 = rho * rho;
    let diag = |i: usize| if i == 0 || i == d - 1 { 1.0 } else { 1.0 + r2 };
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else if i.abs_diff(j) == 1 {
            -rho / (diag(i) * diag(j)).sqrt()
        } else {
            0.0
        }
    })
}

/// Per-coordinate shrinkage `tau_i = 1 - R_i^2` and the smallest eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftProfile {
    pub tau: Vec<f64>,
    pub lambda_min: f64,
}

impl ShiftProfile {
    pub fn dim(&self) -> usize {
        self.tau.len()
    }

    /// The profile of an identity matrix.
    pub fn independent(d: usize) -> Self {
        ShiftProfile {
            tau: vec![1.0; d],
            lambda_min: 1.0,
        }
    }

    pub fn uniform(d: usize, tau: f64) -> Self {
        ShiftProfile {
            tau: vec![tau; d],
            lambda_min: tau,
        }
    }
}

/// `tau_i = 1 / (Sigma^{-1})_{ii}` and `lambda_min(Sigma)`.
pub fn tau_profile(sigma: &CorrelationMatrix) -> Result<ShiftProfile> {
    let ev = sigma.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo <= 0.0 || hi / lo > MAX_CONDITION {
        return Err(Error::Singular {
            condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }
    let chol = sigma
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
    let precision = chol.inverse();
    let tau = (0..sigma.dim())
        .map(|i| (1.0 / precision[(i, i)]).min(1.0))
        .collect();
    Ok(ShiftProfile {
        tau,
        lambda_min: lo,
    })
}

/// How the global shift is chosen from a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "c", rename_all = "snake_case")]
pub enum TauRule {
    Min,
    Max,
    Median,
    ArithMean,
    GeoMean,
    HarmMean,
    /// `lambda_min(Sigma)`.
    LambdaMin,
    /// `c * lambda_min(Sigma)` for a fixed `c` in (0, 1).
    LambdaMinFraction(f64),
}

pub fn select_tau(profile: &ShiftProfile, rule: TauRule) -> Result<f64> {
    let tau = &profile.tau;
    if tau.is_empty() {
        return Err(Error::Domain("empty shift profile".into()));
    }
    if tau.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Domain(
            "shift profile entries must lie in (0, 1]".into(),
        ));
    }
    let n = tau.len() as f64;
    let v = match rule {
        TauRule::Min => tau.iter().copied().fold(f64::INFINITY, f64::min),
        TauRule::Max => tau.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        TauRule::Median => {
            let mut s = tau.clone();
            s.sort_by(|a, b| a.total_cmp(b));
            let k = s.len();
            if k % 2 == 1 {
                s[k / 2]
            } else {
                0.5 * (s[k / 2 - 1] + s[k / 2])
            }
        }
        TauRule::ArithMean => tau.iter().sum::<f64>() / n,
        TauRule::GeoMean => (tau.iter().map(|t| t.ln()).sum::<f64>() / n).exp(),
        TauRule::HarmMean => n / tau.iter().map(|t| 1.0 / t).sum::<f64>(),
        TauRule::LambdaMin => profile.lambda_min,
        TauRule::LambdaMinFraction(c) => {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Domain(format!(
                    "lambda_min fraction {c} must lie in (0, 1)"
                )));
            }
            c * profile.lambda_min
        }
    };
    // means of values in (0, 1] can drift past 1 by an ulp
    Ok(v.min(1.0))
}

/// Draws `mu + L z` with `L` the cached lower Cholesky factor of `Sigma`.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    lower: DMatrix<f64>,
}

impl MvnSampler {
    pub fn new(sigma: &CorrelationMatrix) -> Result<Self> {
        Ok(MvnSampler {
            lower: sigma.cholesky_lower()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn sample(&self, mean: &[f64], rng: &mut Stream) -> Result<Vec<f64>> {
        let d = self.dim();
        if mean.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mean.len(),
            });
        }
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &self.lower * z;
        Ok(x.iter().zip(mean).map(|(a, b)| a + b).collect())
    }

    /// `rows` independent zero-mean draws stacked as an `rows x d` matrix.
    pub fn sample_rows(&self, rows: usize, rng: &mut Stream) -> DMatrix<f64> {
        let d = self.dim();
        let z = DMatrix::from_fn(rows, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        z * self.lower.transpose()
    }
}

/// Convenience wrapper matching the one-shot form.
pub fn sample_mvn(sigma: &CorrelationMatrix, mean: &[f64], rng: &mut Stream) -> Result<Vec<f64>> {
    MvnSampler::new(sigma)?.sample(mean, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn equi_tau(rho: f64, d: usize) -> f64 {
        let d = d as f64;
        1.0 - rho * rho * (d - 1.0) / (1.0 + (d - 2.0) * rho)
    }

    /// `1 - s' S^{-1} s` with one solve per coordinate.
    fn tau_by_regression(sigma: &CorrelationMatrix) -> Vec<f64> {
        let d = sigma.dim();
        let m = sigma.matrix();
        (0..d)
            .map(|i| {
                let rest: Vec<usize> = (0..d).filter(|&j| j != i).collect();
                let sub = DMatrix::from_fn(d - 1, d - 1, |a, b| m[(rest[a], rest[b])]);
                let s = DVector::from_fn(d - 1, |a, _| m[(rest[a], i)]);
                let w = sub.lu().solve(&s).unwrap();
                1.0 - s.dot(&w)
            })
            .collect()
    }

    #[test]
    fn equi_entries() {
        let s = make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 0.3 }, 3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.get(i, j), if i == j { 1.0 } else { 0.3 });
            }
        }
        let id =
            make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 0.0 }, 5)).unwrap();
        assert_eq!(id.matrix(), &DMatrix::<f64>::identity(5, 5));
        assert!(id.is_identity());
    }

    #[test]
    fn ar1_entries_and_pd() {
        let s =
            make_correlation(&StructureSpec::new(StructureKind::Ar1 { rho: 0.7 }, 100)).unwrap();
        assert!((s.get(3, 7) - 0.7f64.powi(4)).abs() < 1e-15);
        assert!(s.cholesky_lower().is_ok());
    }

    #[test]
    fn iar1_is_normalized_inverse_of_ar1() {
        let d = 12;
        let a = ar1(d, 0.6);
        let inv = a.try_inverse().unwrap();
        let expected = CorrelationMatrix::from_covariance(&inv).unwrap();
        let got =
            make_correlation(&StructureSpec::new(StructureKind::Iar1 { rho: 0.6 }, d)).unwrap();
        assert!((expected.matrix() - got.matrix()).amax() < 1e-12);
    }

    #[test]
    fn block_diagonal_layout() {
        let s = make_correlation(&StructureSpec::new(
            StructureKind::BlockDiagonal { within_rho: 0.5 },
            8,
        ))
        .unwrap();
        assert_eq!(s.get(0, 3), 0.5);
        assert_eq!(s.get(3, 4), 0.0);
        assert_eq!(s.get(5, 7), 0.5);
    }

    #[test]
    fn random_structures_are_reproducible_with_declared_support() {
        let d = 40;
        let spec = StructureSpec::new(
            StructureKind::Sparse {
                density: 0.2,
                seed: 11,
            },
            d,
        );
        let a = make_correlation(&spec).unwrap();
        let b = make_correlation(&spec).unwrap();
        assert_eq!(a, b);
        let pairs = (d * (d - 1) / 2) as f64;
        assert!((a.off_diagonal_density() - (0.2 * pairs).round() / pairs).abs() < 1e-12);
        assert!(a.min_eigenvalue() > 0.0);

        let spec = StructureSpec::new(
            StructureKind::Prefixed {
                fraction: 0.25,
                seed: 5,
            },
            d,
        );
        let p = make_correlation(&spec).unwrap();
        assert_eq!(p, make_correlation(&spec).unwrap());
        // rows with a full off-diagonal support are exactly the chosen ones
        let full = (0..d)
            .filter(|&i| (0..d).all(|j| j == i || p.get(i, j) != 0.0))
            .count();
        assert_eq!(full, prefixed_count(d, 0.25));
        assert_eq!(prefixed_count(40, 0.25), 10);
        let other = make_correlation(&StructureSpec::new(
            StructureKind::Prefixed {
                fraction: 0.25,
                seed: 6,
            },
            d,
        ))
        .unwrap();
        assert_ne!(p, other);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(
            make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 1.0 }, 3)).is_err()
        );
        assert!(
            make_correlation(&StructureSpec::new(StructureKind::Equi { rho: -0.6 }, 3)).is_err()
        );
        assert!(make_correlation(&StructureSpec::new(StructureKind::Ar1 { rho: 0.3 }, 1)).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.4;
        assert!(CorrelationMatrix::new(m).is_err());
    }

    #[test]
    fn tau_identity_and_equi_closed_form() {
        let p = tau_profile(&CorrelationMatrix::identity(6)).unwrap();
        assert!(p.tau.iter().all(|&t| t == 1.0));
        assert!((p.lambda_min - 1.0).abs() < 1e-14);

        let s = make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 0.5 }, 3)).unwrap();
        let p = tau_profile(&s).unwrap();
        for t in &p.tau {
            assert!((t - 2.0 / 3.0).abs() < 1e-12);
        }
        for rho in [0.3, 0.7] {
            for d in [3, 40, 100] {
                let s =
                    make_correlation(&StructureSpec::new(StructureKind::Equi { rho }, d)).unwrap();
                let p = tau_profile(&s).unwrap();
                for t in &p.tau {
                    assert!((t - equi_tau(rho, d)).abs() < 1e-10);
                }
                assert!((p.lambda_min - (1.0 - rho)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tau_precision_route_matches_regression_route() {
        for kind in [
            StructureKind::Ar1 { rho: 0.7 },
            StructureKind::Iar1 { rho: 0.3 },
            StructureKind::Sparse {
                density: 0.2,
                seed: 3,
            },
            StructureKind::Prefixed {
                fraction: 0.25,
                seed: 9,
            },
        ] {
            let s = make_correlation(&StructureSpec::new(kind, 20)).unwrap();
            let p = tau_profile(&s).unwrap();
            let r = tau_by_regression(&s);
            for (a, b) in p.tau.iter().zip(&r) {
                assert!((a - b).abs() < 1e-10, "{kind:?}");
                assert!(*a > 0.0 && *a <= 1.0);
            }
        }
    }

    #[test]
    fn select_tau_rules() {
        let p = ShiftProfile {
            tau: vec![0.2, 0.4, 0.9],
            lambda_min: 0.1,
        };
        assert_eq!(select_tau(&p, TauRule::Min).unwrap(), 0.2);
        assert_eq!(select_tau(&p, TauRule::Max).unwrap(), 0.9);
        assert_eq!(select_tau(&p, TauRule::Median).unwrap(), 0.4);
        assert!((select_tau(&p, TauRule::ArithMean).unwrap() - 0.5).abs() < 1e-15);
        assert!(
            (select_tau(&p, TauRule::GeoMean).unwrap() - (0.2f64 * 0.4 * 0.9).cbrt()).abs() < 1e-15
        );
        let h = select_tau(&p, TauRule::HarmMean).unwrap();
        assert!((h - 3.0 / (5.0 + 2.5 + 1.0 / 0.9)).abs() < 1e-15);
        assert!((h - 0.34839).abs() < 1e-5);
        assert_eq!(select_tau(&p, TauRule::LambdaMin).unwrap(), 0.1);
        assert!((select_tau(&p, TauRule::LambdaMinFraction(0.9)).unwrap() - 0.09).abs() < 1e-15);
        assert!(select_tau(&p, TauRule::LambdaMinFraction(1.0)).is_err());

        let flat = ShiftProfile {
            tau: vec![0.6; 5],
            lambda_min: 0.3,
        };
        for rule in [
            TauRule::Min,
            TauRule::Max,
            TauRule::Median,
            TauRule::ArithMean,
            TauRule::GeoMean,
            TauRule::HarmMean,
        ] {
            assert!((select_tau(&flat, rule).unwrap() - 0.6).abs() < 1e-15);
        }
        let ind = ShiftProfile::independent(4);
        for rule in [
            TauRule::Min,
            TauRule::Median,
            TauRule::HarmMean,
            TauRule::LambdaMin,
        ] {
            assert_eq!(select_tau(&ind, rule).unwrap(), 1.0);
        }
    }

    #[test]
    fn mvn_moments_identity() {
        let d = 3;
        let sampler = MvnSampler::new(&CorrelationMatrix::identity(d)).unwrap();
        let mut rng = stream(42, 0);
        let n = 100_000;
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for _ in 0..n {
            let x = sampler.sample(&[0.0; 3], &mut rng).unwrap();
            for k in 0..d {
                sum[k] += x[k];
                sq[k] += x[k] * x[k];
            }
        }
        for k in 0..d {
            let mean = sum[k] / n as f64;
            let var = sq[k] / n as f64 - mean * mean;
            assert!(mean.abs() < 4.0 / (n as f64).sqrt());
            assert!((var - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn mvn_correlation_and_determinism() {
        let s = make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 0.7 }, 2)).unwrap();
        let sampler = MvnSampler::new(&s).unwrap();
        let mut rng = stream(1, 0);
        let n = 100_000;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = sampler.sample(&[0.0, 0.0], &mut rng).unwrap();
            sxy += x[0] * x[1];
            sxx += x[0] * x[0];
            syy += x[1] * x[1];
        }
        assert!((sxy / (sxx * syy).sqrt() - 0.7).abs() < 0.02);

        let a = sampler.sample(&[1.0, 2.0], &mut stream(9, 4)).unwrap();
        let b = sampler.sample(&[1.0, 2.0], &mut stream(9, 4)).unwrap();
        assert_eq!(a, b);
        assert!(sampler.sample(&[0.0], &mut stream(9, 4)).is_err());
    }
}
