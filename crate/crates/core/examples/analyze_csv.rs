//! Variable selection on a CSV dataset: parse, standardize, run a shifted
//! procedure and a knockoff-assisted one.
//!
//! Run with `cargo run --example analyze_csv [path.csv]`; without a path a
//! synthetic dataset with three planted signals is used.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use shiftfdr::cli::{analyze_dataset, read_dataset, render_report};
use shiftfdr::regression::VarianceMode;
use shiftfdr::rng::stream;

fn synthetic_csv(n: usize, d: usize) -> String {
    let mut rng = stream(42, 0);
    let mut s = String::new();
    let names: Vec<String> = (0..d).map(|j| format!("g{j}")).collect();
    let _ = writeln!(s, "{},y", names.join(","));
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let noise: f64 = rng.sample(StandardNormal);
        let y = 0.9 * x[0] - 0.7 * x[3] + 0.6 * x[7] + noise;
        let row: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(s, "{},{y:.6}", row.join(","));
    }
    s
}

fn main() -> shiftfdr::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => synthetic_csv(120, 20),
    };
    let data = read_dataset(text.as_bytes(), "y")?;
    for procedure in ["gsbh3", "sbbh2", "knockoff_plus"] {
        let report = analyze_dataset(&data, procedure, 0.2, VarianceMode::Estimated)?;
        println!("{}", render_report(&report));
    }
    Ok(())
}
