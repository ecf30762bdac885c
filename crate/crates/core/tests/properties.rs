//! Distributional properties and Monte Carlo checks against exact laws.

use proptest::prelude::*;
use rand::Rng;
use rand_distr::{ChiSquared, StandardNormal};
use shiftfdr::corr::{
    make_correlation, sample_mvn, tau_profile, MvnSampler, ShiftProfile, StructureKind,
    StructureSpec,
};
use shiftfdr::dist::{
    chi2_survival, noncentral_chi2_survival, scaled_f_survival, DistributionKind,
};
use shiftfdr::harness::{run_experiment, ExperimentConfig, Regime, Scenario};
use shiftfdr::procedures::{pvalues_from_observations, Setting};
use shiftfdr::regression::{construct_knockoffs, knockoff_select, RegressionData, SRule};
use shiftfdr::rng::stream;
use shiftfdr::shift::{calibrate_with, h_tau, shift_pvalue, BoundFunction, CalibrationMethod};

fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}

#[test]
fn null_pvalues_are_uniform() {
    let n = 10_000;
    // 1% critical value of the one-sample KS statistic
    let crit = 1.628 / (n as f64).sqrt();
    let mut rng = stream(1, 0);
    let known: Vec<f64> = (0..n)
        .map(|_| {
            pvalues_from_observations(&[rng.sample(StandardNormal)], Setting::Known).unwrap()[0]
        })
        .collect();
    assert!(ks_uniform(known) < crit);

    let nu = 7;
    let chi = ChiSquared::new(nu as f64).unwrap();
    let estimated: Vec<f64> = (0..n)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(chi);
            pvalues_from_observations(&[x], Setting::Unknown { v, nu }).unwrap()[0]
        })
        .collect();
    assert!(ks_uniform(estimated) < crit);
}

#[test]
fn shifted_null_has_the_h_tau_law() {
    let reps = 100_000;
    let sigma = make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 0.5 }, 4)).unwrap();
    let tau = tau_profile(&sigma).unwrap().tau[0];
    let dist = DistributionKind::ChiSq1;
    let mut rng = stream(2, 0);
    let shifted: Vec<f64> = (0..reps)
        .map(|_| {
            let x = sample_mvn(&sigma, &[0.0; 4], &mut rng).unwrap();
            let p = pvalues_from_observations(&x, Setting::Known).unwrap()[0];
            shift_pvalue(p, tau, dist).unwrap()
        })
        .collect();
    for u in [1e-3, 1e-2, 5e-2, 0.2] {
        let want = h_tau(u, tau, dist).unwrap();
        let got = shifted.iter().filter(|&&v| v <= u).count() as f64 / reps as f64;
        let se = (want * (1.0 - want) / reps as f64).sqrt();
        assert!((got - want).abs() <= 3.0 * se, "u = {u}: {got} vs {want}");
    }
}

#[test]
fn noncentral_survival_matches_simulation() {
    let draws = 10_000_000u64;
    let mut rng = stream(3, 0);
    let hits = (0..draws)
        .filter(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (z + 2.0) * (z + 2.0) >= 2.0
        })
        .count() as f64;
    let p_hat = hits / draws as f64;
    let want = noncentral_chi2_survival(2.0, 1, 4.0).unwrap();
    let se = (want * (1.0 - want) / draws as f64).sqrt();
    assert!((p_hat - want).abs() <= 3.0 * se, "{p_hat} vs {want}");
}

#[test]
fn bh_controls_fdr_under_independence() {
    let mut c = ExperimentConfig::new(Scenario::Means, 20, StructureKind::Equi { rho: 0.0 });
    c.k = Some(0);
    c.regime = Some(Regime::FixedNull {
        null_frac: 0.75,
        mu_grid: vec![0.0],
    });
    c.procedures = vec!["bh".into()];
    c.replications = 10_000;
    c.seed = 4;
    let cell = &run_experiment(&c, None).unwrap().cells[0];
    assert!(cell.fdr_hat <= 0.05 + 3.0 * cell.fdr_se, "{cell:?}");
    assert_eq!(cell.power_hat, 0.0);
}

#[test]
fn regression_null_models_control_fdr() {
    let mut varsel = ExperimentConfig::new(Scenario::Varsel, 40, StructureKind::Equi { rho: 0.3 });
    varsel.n = Some(100);
    varsel.k = Some(0);
    varsel.regime = Some(Regime::FixedNull {
        null_frac: 0.75,
        mu_grid: vec![0.0],
    });
    varsel.procedures = vec!["gsbh3".into()];
    varsel.replications = 400;
    varsel.seed = 5;
    for cell in run_experiment(&varsel, None).unwrap().cells {
        assert!(cell.fdr_hat <= cell.alpha + 3.0 * cell.fdr_se, "{cell:?}");
    }

    let mut ko = ExperimentConfig::new(Scenario::Knockoff, 40, StructureKind::Ar1 { rho: 0.5 });
    ko.n = Some(100);
    ko.k = Some(0);
    ko.regime = Some(Regime::FixedNull {
        null_frac: 0.8,
        mu_grid: vec![0.0],
    });
    ko.procedures = vec!["bbh".into(), "sbbh4".into()];
    ko.alphas = vec![0.2];
    ko.replications = 300;
    ko.seed = 6;
    for cell in run_experiment(&ko, None).unwrap().cells {
        assert!(cell.fdr_hat <= cell.alpha + 3.0 * cell.fdr_se, "{cell:?}");
    }
}

#[test]
fn knockoff_plus_controls_fdr_on_symmetric_nulls() {
    // 30 null statistics with symmetric signs, 10 large positive signals
    let reps = 4000;
    let alpha = 0.2;
    let mut rng = stream(7, 0);
    let fdps: Vec<f64> = (0..reps)
        .map(|_| {
            let w: Vec<f64> = (0..40)
                .map(|j| {
                    let m: f64 = rng.sample::<f64, _>(StandardNormal).abs();
                    if j < 10 {
                        m + 3.0
                    } else if rng.random_bool(0.5) {
                        m
                    } else {
                        -m
                    }
                })
                .collect();
            let r = knockoff_select(&w, alpha, true);
            let v = r.rejected.iter().filter(|&&j| j >= 10).count();
            v as f64 / r.rejections.max(1) as f64
        })
        .collect();
    let mean = fdps.iter().sum::<f64>() / reps as f64;
    let sd = (fdps.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    assert!(mean <= alpha + 3.0 * sd / (reps as f64).sqrt(), "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_is_increasing_in_p_and_decreasing_in_tau(
        p in 1e-12f64..0.999,
        q in 1e-12f64..0.999,
        tau in 0.05f64..0.95,
        dt in 0.01f64..0.05,
    ) {
        let dist = DistributionKind::ChiSq1;
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        prop_assume!(hi - lo > 1e-9 * hi);
        prop_assert!(shift_pvalue(lo, tau, dist).unwrap() < shift_pvalue(hi, tau, dist).unwrap());
        prop_assert!(shift_pvalue(p, tau + dt, dist).unwrap() > shift_pvalue(p, tau, dist).unwrap());
        prop_assert!(shift_pvalue(p, tau, dist).unwrap() <= p);
    }

    #[test]
    fn h_tau_inverts_the_shift(p in 1e-10f64..0.99, tau in 0.05f64..1.0, nu in 2u32..80) {
        for dist in [DistributionKind::ChiSq1, DistributionKind::ScaledF { nu }] {
            let back = h_tau(shift_pvalue(p, tau, dist).unwrap(), tau, dist).unwrap();
            prop_assert!((back - p).abs() <= 1e-9 * p, "{} vs {}", back, p);
        }
    }

    #[test]
    fn survival_functions_are_valid(x in 0.0f64..200.0, dx in 0.0f64..5.0, m in 1u32..8, nu in 1u32..50) {
        for s in [chi2_survival(x, m).unwrap(), scaled_f_survival(x, m, nu).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&s));
        }
        prop_assert!(chi2_survival(x + dx, m).unwrap() <= chi2_survival(x, m).unwrap());
        prop_assert!(scaled_f_survival(x + dx, m, nu).unwrap() <= scaled_f_survival(x, m, nu).unwrap());
    }

    #[test]
    fn calibration_hits_the_target(
        taus in prop::collection::vec(0.05f64..1.0, 2..30),
        pick in 0usize..30,
        alpha in 0.01f64..0.3,
        per_coordinate in any::<bool>(),
    ) {
        let tau = taus[pick % taus.len()];
        let d = taus.len();
        let profile = ShiftProfile { lambda_min: 0.05, tau: taus };
        let method = if per_coordinate { CalibrationMethod::Sbh1 } else { CalibrationMethod::Gsbh };
        let bound = BoundFunction::new(&profile, tau, DistributionKind::ChiSq1, method).unwrap();
        let c = calibrate_with(alpha, &bound).unwrap();
        let achieved = d as f64 * bound.eval(c.alphas[0]).unwrap();
        prop_assert!((achieved - alpha).abs() <= 1e-9, "{} vs {}", achieved, alpha);
    }

    #[test]
    fn knockoffs_satisfy_their_identities(seed in any::<u64>(), d in 2usize..8, extra in 0usize..10, rho in 0.0f64..0.6) {
        let n = 2 * d + extra;
        let sigma = make_correlation(&StructureSpec::new(StructureKind::Equi { rho }, d)).unwrap();
        let x = MvnSampler::new(&sigma).unwrap().sample_rows(n, &mut stream(seed, 0));
        let data = RegressionData::new(x, nalgebra::DVector::zeros(n)).unwrap();
        let aug = construct_knockoffs(&data, &SRule::Equi).unwrap();
        let (r1, r2) = aug.gram_residuals(&data);
        prop_assert!(r1 <= 1e-8 && r2 <= 1e-8);
        prop_assert!(aug.fission_certificate(&data) <= 1e-8);
        prop_assert!((aug.u_tilde.transpose() * data.x()).norm() <= 1e-8);
    }
}
