//! Every mean-testing procedure on one correlated sample.
//!
//! Run with `cargo run --example procedure_catalog`.

use shiftfdr::corr::{make_correlation, sample_mvn, tau_profile, StructureKind, StructureSpec};
use shiftfdr::procedures::{pvalues_from_observations, PreparedProcedure, ProcedureId, Setting};
use shiftfdr::rng::stream;

fn main() -> shiftfdr::Result<()> {
    let d = 40;
    let alpha = 0.05;
    let sigma = make_correlation(&StructureSpec::new(StructureKind::Equi { rho: 0.5 }, d))?;
    let profile = tau_profile(&sigma)?;

    // first 10 coordinates carry a mean of 3
    let mean: Vec<f64> = (0..d).map(|i| if i < 10 { 3.0 } else { 0.0 }).collect();
    let x = sample_mvn(&sigma, &mean, &mut stream(7, 0))?;
    let p = pvalues_from_observations(&x, Setting::Known)?;

    println!(
        "{:<10} {:>8} {:>10} {:>6} {:>6}",
        "procedure", "tau", "threshold", "R", "V"
    );
    for id in ProcedureId::catalog() {
        let prepared = PreparedProcedure::prepare(id, &profile, alpha, Setting::Known.dist())?;
        let result = prepared.apply(&p)?;
        let false_rejections = result.rejected.iter().filter(|&&i| i >= 10).count();
        let tau = prepared
            .tau()
            .map(|t| format!("{t:.4}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<10} {:>8} {:>10.3e} {:>6} {:>6}",
            id.to_string(),
            tau,
            result.threshold,
            result.rejections,
            false_rejections
        );
    }
    Ok(())
}
