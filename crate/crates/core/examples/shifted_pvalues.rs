//! Shifting two-sided p-values toward zero and the maps behind it.
//!
//! Run with `cargo run --example shifted_pvalues`.

use shiftfdr::dist::DistributionKind;
use shiftfdr::shift::{h_tau, shift_all, shift_pvalue};

fn main() -> shiftfdr::Result<()> {
    let known = DistributionKind::ChiSq1;
    let estimated = DistributionKind::ScaledF { nu: 30 };

    println!("p = 0.05 shifted with tau = 0.5");
    println!(
        "  known variance:     {:.6}",
        shift_pvalue(0.05, 0.5, known)?
    );
    println!(
        "  estimated (nu=30):  {:.6}",
        shift_pvalue(0.05, 0.5, estimated)?
    );

    // h_tau undoes the shift: h_tau(shift(p)) = p
    let shifted = shift_pvalue(0.05, 0.5, known)?;
    println!("  h_tau(shifted) =    {:.6}", h_tau(shifted, 0.5, known)?);

    let p = [0.001, 0.01, 0.04, 0.2, 0.7];
    println!(
        "\n{:>8} {:>12} {:>12} {:>12}",
        "p", "tau=0.9", "tau=0.5", "tau=0.1"
    );
    let columns: Vec<Vec<f64>> = [0.9, 0.5, 0.1]
        .iter()
        .map(|&t| shift_all(&p, t, known))
        .collect::<Result<_, _>>()?;
    for (i, pi) in p.iter().enumerate() {
        println!(
            "{pi:>8} {:>12.4e} {:>12.4e} {:>12.4e}",
            columns[0][i], columns[1][i], columns[2][i]
        );
    }
    Ok(())
}
