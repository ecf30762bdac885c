//! The numeric invariant suite behind `shiftfdr check`, at a reduced size.
//!
//! Run with `cargo run --release --example invariant_check`.

use shiftfdr::check::{self, CheckReport};

fn main() -> shiftfdr::Result<()> {
    let mut results = check::kernel_accuracy(1.0);
    results.push(check::bound_roundtrip(1.0)?);
    results.push(check::concavity_chi2(1.0));
    results.push(check::tp2_ratio(1.0));
    results.push(check::pltdn_grid(1.0));
    results.push(check::knockoff_algebra(10, 100, 40, 1, 1.0)?);
    results.push(check::fission_independence(2_000, 100, 40, 1, 1.0)?);
    let report = CheckReport {
        scale: 1.0,
        results,
    };
    print!("{}", report.table());
    println!("all pass: {}", report.all_pass());
    Ok(())
}
