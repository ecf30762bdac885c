//! The six dependence families and the shift profile each one induces.
//!
//! Run with `cargo run --example correlation_structures`.

use shiftfdr::corr::{
    make_correlation, select_tau, tau_profile, StructureKind, StructureSpec, TauRule,
};

fn main() -> shiftfdr::Result<()> {
    let d = 40;
    let kinds = [
        StructureKind::Equi { rho: 0.3 },
        StructureKind::Ar1 { rho: 0.7 },
        StructureKind::Iar1 { rho: 0.7 },
        StructureKind::BlockDiagonal { within_rho: 0.5 },
        StructureKind::Sparse {
            density: 0.2,
            seed: 1,
        },
        StructureKind::Prefixed {
            fraction: 0.25,
            seed: 1,
        },
    ];
    println!(
        "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "structure", "density", "lambda_min", "tau_min", "tau_med", "tau_max"
    );
    for kind in kinds {
        let sigma = make_correlation(&StructureSpec::new(kind, d))?;
        let profile = tau_profile(&sigma)?;
        println!(
            "{:<10} {:>10.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            kind.name(),
            sigma.off_diagonal_density(),
            profile.lambda_min,
            select_tau(&profile, TauRule::Min)?,
            select_tau(&profile, TauRule::Median)?,
            select_tau(&profile, TauRule::Max)?,
        );
    }
    Ok(())
}
