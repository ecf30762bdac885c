//! Critical constants of GSBH against BH: H^{-1}(alpha/d) on a dependent
//! profile, and the exact reduction to BH under independence.
//!
//! Run with `cargo run --example calibration`.

use shiftfdr::corr::{
    make_correlation, select_tau, tau_profile, ShiftProfile, StructureKind, StructureSpec, TauRule,
};
use shiftfdr::dist::DistributionKind;
use shiftfdr::shift::{calibrate_with, BoundFunction, CalibrationMethod};

fn main() -> shiftfdr::Result<()> {
    let d = 40;
    let alpha = 0.05;
    let dist = DistributionKind::ChiSq1;

    let independent = ShiftProfile::independent(d);
    let bh = calibrate_with(
        alpha,
        &BoundFunction::new(&independent, 1.0, dist, CalibrationMethod::Gsbh)?,
    )?;
    println!(
        "independent: unit = {:.6e} (alpha/d = {:.6e})",
        bh.alphas[0],
        alpha / d as f64
    );

    for kind in [
        StructureKind::Ar1 { rho: 0.7 },
        StructureKind::Prefixed {
            fraction: 0.25,
            seed: 1,
        },
    ] {
        let profile = tau_profile(&make_correlation(&StructureSpec::new(kind, d))?)?;
        for rule in [TauRule::Min, TauRule::Median, TauRule::HarmMean] {
            let tau = select_tau(&profile, rule)?;
            let bound = BoundFunction::new(&profile, tau, dist, CalibrationMethod::Gsbh)?;
            let c = calibrate_with(alpha, &bound)?;
            // d * H(unit) recovers alpha
            let check = d as f64 * bound.eval(c.alphas[0])?;
            println!(
                "{:<8} {:<9} tau = {tau:.4}  unit = {:.6e}  d*H(unit) = {check:.6}",
                kind.name(),
                format!("{rule:?}"),
                c.alphas[0]
            );
        }
    }
    Ok(())
}
