//! Command-line front end: experiment configs in, CSV tables and resolved
//! config sidecars out, plus dataset analysis and the invariant suite.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::check;
use crate::corr::StructureKind;
use crate::error::{Error, Result};
use crate::harness::{
    run_experiment, AnyProcedure, CellRecord, ExperimentConfig, Regime, Scenario, SignMode,
};
use crate::procedures::StepUpResult;
use crate::regression::{
    KnockoffAnalysis, OlsAnalysis, PairedOptions, RegressionData, SRule, VarianceMode,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_RANK: i32 = 5;
pub const EXIT_ROWS: i32 = 6;

/// Column order of every results table.
pub const CSV_HEADER: [&str; 16] = [
    "scenario",
    "procedure",
    "structure",
    "rho",
    "d",
    "n",
    "mu",
    "null_frac",
    "alpha",
    "fdr_hat",
    "fdr_se",
    "power_hat",
    "power_se",
    "mean_rejections",
    "replications",
    "seed",
];

const CONFIG_HELP: &str = "\
CONFIG FILE (TOML; a resolved .json sidecar is accepted too)
  scenario            means | varsel | knockoff (defaults to the subcommand)
  d                   number of hypotheses / columns (required)
  n                   sample size (varsel: n > d, knockoff: n >= 2d)
  [structure]         kind = equi | ar1 | iar1 | block_diagonal | sparse | prefixed
                      rho (equi, ar1, iar1), within_rho = 0.5 (block_diagonal),
                      density = 0.2 and seed = 0 (sparse), fraction = 0.25 and seed = 0 (prefixed)
  [regime]            kind = fixed_null: null_frac = 0.75, mu_grid = [1, 2, 3, 4, 5]
                      kind = fixed_signal: mu = 2, null_frac_grid = [0.5, 0.6, 0.7, 0.8, 0.9]
                      default: fixed_null (null_frac = 0.8 for knockoff)
  k                   signal count, overrides null_frac
  procedures          list of names; default: the whole catalog for the scenario
  alphas = [0.05]     target levels
  replications = 500
  seed = 0
  variance = known    known | estimated
  nu                  df of the variance estimate (means; default 2d when estimated)
  signs = positive    positive | random
  resample_structure = false   redraw sparse/prefixed structures per replication
  [paired]            variance, p2_law = scaled_f | chi_sq_literal, storey_lambda = 0.5,
                      rev_bbh_roles = screen_independent | screen_dependent,
                      statistic = marginal_corr_diff

Flags override the file. The resolved configuration is written next to
the CSV as <out>.config.json.

EXIT CODES
  0 success, 2 configuration error, 3 numeric failure (names the cell)";

const ANALYZE_HELP: &str = "\
The data file is a CSV with a header row. The response column (default `y`)
is regressed on every other column; columns are scaled to unit norm.
Mean-testing procedures use OLS p-values; paired procedures (bbh, sbbh1..5,
knockoff_plus, ...) build fixed-design knockoffs and need n >= 2d.

EXIT CODES
  0 success, 2 bad arguments, 3 numeric failure, 4 unreadable or
  malformed data, 5 rank-deficient design, 6 too few rows for knockoffs";

#[derive(Debug, Parser)]
#[command(
    name = "shiftfdr",
    version,
    about = "Dependence-aware FDR control: shifted BH procedures, knockoff fission, simulation harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate mean testing with correlated Gaussian test statistics.
    #[command(after_help = CONFIG_HELP)]
    Means(SimArgs),
    /// Simulate variable selection from OLS coefficients.
    #[command(after_help = CONFIG_HELP)]
    Varsel(SimArgs),
    /// Simulate knockoff-assisted paired procedures.
    #[command(after_help = CONFIG_HELP)]
    Knockoff(SimArgs),
    /// Run one procedure on a regression dataset.
    #[command(after_help = ANALYZE_HELP)]
    Analyze(AnalyzeArgs),
    /// Run the numeric invariant suite; exits 1 if any check fails.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Experiment configuration (TOML, or a resolved JSON sidecar).
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replications per cell.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Target FDR level; repeat for several.
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    /// Comma-separated procedure names.
    #[arg(long, value_delimiter = ',')]
    pub procedures: Vec<String>,
    /// identity | equi | ar1 | iar1 | block | sparse | prefixed
    #[arg(long)]
    pub structure: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long = "d")]
    pub d: Option<usize>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// known | estimated
    #[arg(long)]
    pub variance: Option<VarianceMode>,
    /// CSV destination; stdout when absent (no sidecar is written then).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when absent. Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// CSV with a header row.
    pub data: PathBuf,
    /// Procedure name from either catalog, e.g. gsbh3, sbh1, bh, sbbh2, knockoff_plus.
    #[arg(long, default_value = "gsbh3")]
    pub procedure: String,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// known (unit noise variance) | estimated
    #[arg(long, default_value = "estimated")]
    pub variance: VarianceMode,
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Also write the selection as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Also write the table as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Data(_) | Error::Io(_) | Error::DimensionMismatch { .. } => EXIT_DATA,
        Error::RankDeficient(_) => EXIT_RANK,
        Error::InsufficientRows { .. } => EXIT_ROWS,
        Error::Domain(_)
        | Error::NotPositiveDefinite(_)
        | Error::Singular { .. }
        | Error::Unattainable { .. } => EXIT_NUMERIC,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Means(a) => simulate(Scenario::Means, &a),
        Command::Varsel(a) => simulate(Scenario::Varsel, &a),
        Command::Knockoff(a) => simulate(Scenario::Knockoff, &a),
        Command::Analyze(a) => analyze(&a),
        Command::Check(a) => run_check(&a),
    }
}

/// Every config key optional, so flags can fill the gaps before validation.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<Scenario>,
    d: Option<usize>,
    n: Option<usize>,
    structure: Option<StructureKind>,
    regime: Option<Regime>,
    k: Option<usize>,
    procedures: Option<Vec<String>>,
    alphas: Option<Vec<f64>>,
    replications: Option<usize>,
    seed: Option<u64>,
    variance: Option<VarianceMode>,
    nu: Option<u32>,
    signs: Option<SignMode>,
    resample_structure: Option<bool>,
    paired: Option<PairedOptions>,
}

fn read_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: cannot read: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Merges a config file (if any) with command-line overrides and resolves
/// the result for `scenario`.
pub fn build_config(scenario: Scenario, args: &SimArgs) -> Result<ExperimentConfig> {
    let raw = match &args.config {
        Some(p) => read_raw(p)?,
        None => RawConfig::default(),
    };
    if let Some(s) = raw.scenario {
        if s != scenario {
            return Err(Error::Config(format!(
                "config declares scenario `{}` but the `{}` command was used",
                s.name(),
                scenario.name()
            )));
        }
    }
    let d = args
        .d
        .or(raw.d)
        .ok_or_else(|| Error::Config("missing field `d`".into()))?;
    let structure = match (&args.structure, args.rho, raw.structure) {
        (Some(name), rho, existing) => {
            StructureKind::from_name(name, rho.or(existing.and_then(|s| s.rho())))?
        }
        (None, Some(rho), Some(existing)) => with_rho(existing, rho)?,
        (None, None, Some(existing)) => existing,
        (None, _, None) => return Err(Error::Config("missing field `structure`".into())),
    };
    let mut c = ExperimentConfig::new(scenario, d, structure);
    c.n = args.n.or(raw.n);
    c.regime = raw.regime;
    c.k = raw.k;
    if !args.procedures.is_empty() {
        c.procedures = args
            .procedures
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
    } else if let Some(p) = raw.procedures {
        c.procedures = p;
    }
    if !args.alphas.is_empty() {
        c.alphas = args.alphas.clone();
    } else if let Some(a) = raw.alphas {
        c.alphas = a;
    }
    c.replications = args.reps.or(raw.replications).unwrap_or(c.replications);
    c.seed = args.seed.or(raw.seed).unwrap_or(0);
    c.nu = raw.nu;
    c.signs = raw.signs.unwrap_or_default();
    c.resample_structure = raw.resample_structure.unwrap_or(false);
    c.paired = raw.paired.unwrap_or_default();
    c.variance = args.variance.or(raw.variance).unwrap_or(c.paired.variance);
    c.paired.variance = c.variance;
    c.resolve()
}

fn with_rho(kind: StructureKind, rho: f64) -> Result<StructureKind> {
    Ok(match kind {
        StructureKind::Equi { .. } => StructureKind::Equi { rho },
        StructureKind::Ar1 { .. } => StructureKind::Ar1 { rho },
        StructureKind::Iar1 { .. } => StructureKind::Iar1 { rho },
        StructureKind::BlockDiagonal { .. } => StructureKind::BlockDiagonal { within_rho: rho },
        other => {
            return Err(Error::Config(format!(
                "structure `{}` has no rho parameter",
                other.name()
            )))
        }
    })
}

/// Decimal rendering with at least six significant digits that also
/// round-trips exactly.
pub fn format_number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let shortest = format!("{x}");
    let significant = shortest
        .trim_start_matches('-')
        .trim_start_matches(['0', '.'])
        .chars()
        .filter(char::is_ascii_digit)
        .count();
    if significant >= 6 {
        return shortest;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn csv_row(c: &CellRecord) -> [String; 16] {
    [
        c.scenario.clone(),
        c.procedure.clone(),
        c.structure.clone(),
        c.rho.map(format_number).unwrap_or_default(),
        c.d.to_string(),
        c.n.map(|n| n.to_string()).unwrap_or_default(),
        format_number(c.mu),
        format_number(c.null_frac),
        format_number(c.alpha),
        format_number(c.fdr_hat),
        format_number(c.fdr_se),
        format_number(c.power_hat),
        format_number(c.power_se),
        format_number(c.mean_rejections),
        c.replications.to_string(),
        c.seed.to_string(),
    ]
}

/// Writes the results table.
pub fn write_csv<W: std::io::Write>(cells: &[CellRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(CSV_HEADER).map_err(io)?;
    for c in cells {
        out.write_record(csv_row(c)).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// `<out>.config.json` next to the CSV.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

fn simulate(scenario: Scenario, args: &SimArgs) -> Result<i32> {
    let config = build_config(scenario, args)?;
    let summary = run_experiment(&config, args.threads)?;
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_csv(&summary.cells, std::io::BufWriter::new(file))?;
            let json = serde_json::to_string_pretty(&summary.config)
                .map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(sidecar_path(path), json + "\n")?;
            eprintln!("wrote {} cells to {}", summary.cells.len(), path.display());
        }
        None => write_csv(&summary.cells, std::io::stdout().lock())?,
    }
    Ok(EXIT_OK)
}

/// A regression dataset read from CSV.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

/// Reads a CSV with a header row; `response` names the outcome column and
/// every other column becomes a predictor. Missing or non-numeric cells are
/// rejected with their row and column.
pub fn read_dataset<R: std::io::Read>(reader: R, response: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let data_err = |e: csv::Error| Error::Data(e.to_string());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(data_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let yi = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::Data(format!("no response column named `{response}`")))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != yi)
        .map(|(_, h)| h.clone())
        .collect();
    if names.is_empty() {
        return Err(Error::Data("no predictor columns".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(data_err)?;
        let line = r + 2;
        for (j, field) in rec.iter().enumerate() {
            if field.is_empty() {
                return Err(Error::Data(format!(
                    "line {line}, column `{}`: missing value",
                    headers[j]
                )));
            }
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    Error::Data(format!(
                        "line {line}, column `{}`: `{field}` is not a finite number",
                        headers[j]
                    ))
                })?;
            if j == yi {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    if ys.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    let n = ys.len();
    Ok(Dataset {
        x: DMatrix::from_row_slice(n, names.len(), &xs),
        y: DVector::from_vec(ys),
        names,
    })
}

/// One selected variable.
#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub name: String,
    pub column: usize,
    /// The p-value the procedure tests (`P1` for paired procedures).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    /// The independent screening p-value `P2` of paired procedures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value_2: Option<f64>,
    /// Knockoff statistic `W`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub procedure: String,
    pub alpha: f64,
    pub variance: VarianceMode,
    pub n: usize,
    pub d: usize,
    pub threshold: f64,
    /// Whether the procedure works on knockoff-paired p-values.
    pub paired: bool,
    pub selected: Vec<Selection>,
}

/// Standardizes `data` and runs `procedure` at level `alpha`.
pub fn analyze_dataset(
    data: &Dataset,
    procedure: &str,
    alpha: f64,
    variance: VarianceMode,
) -> Result<AnalysisReport> {
    let proc: AnyProcedure = procedure.parse()?;
    let reg = RegressionData::new(data.x.clone(), data.y.clone())?;
    let pick = |r: &StepUpResult, f: &dyn Fn(usize) -> Selection| {
        r.rejected.iter().map(|&j| f(j)).collect::<Vec<_>>()
    };
    let (result, selected) = match proc {
        AnyProcedure::Mean(id) => {
            let ols = OlsAnalysis::new(&reg, variance)?;
            let r = ols.run(id, alpha)?;
            let sel = pick(&r, &|j| Selection {
                name: data.names[j].clone(),
                column: j,
                p_value: Some(ols.pvalues[j]),
                p_value_2: None,
                w: None,
            });
            (r, sel)
        }
        AnyProcedure::Paired(p) => {
            let opts = PairedOptions {
                variance,
                ..PairedOptions::default()
            };
            let ko = KnockoffAnalysis::new(&reg, &SRule::Equi, opts)?;
            let r = ko.run(p, alpha)?;
            let sel = pick(&r, &|j| Selection {
                name: data.names[j].clone(),
                column: j,
                p_value: Some(ko.pvalues.p1[j]),
                p_value_2: Some(ko.pvalues.p2[j]),
                w: Some(ko.statistics()[j]),
            });
            (r, sel)
        }
    };
    Ok(AnalysisReport {
        procedure: proc.to_string(),
        alpha,
        variance,
        n: reg.n(),
        d: reg.d(),
        threshold: result.threshold,
        paired: matches!(proc, AnyProcedure::Paired(_)),
        selected,
    })
}

/// Plain-text rendering of an analysis.
pub fn render_report(report: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "procedure {} at alpha {} (n = {}, d = {}, variance {}): {} selected",
        report.procedure,
        report.alpha,
        report.n,
        report.d,
        match report.variance {
            VarianceMode::Known => "known",
            VarianceMode::Estimated => "estimated",
        },
        report.selected.len()
    );
    let paired = report.paired;
    if paired {
        let _ = writeln!(s, "variable\tp1\tp2\tw");
    } else {
        let _ = writeln!(s, "variable\tp_value");
    }
    for v in &report.selected {
        let p = v.p_value.map(|p| format!("{p:.6e}")).unwrap_or_default();
        if paired {
            let p2 = v.p_value_2.map(|p| format!("{p:.6e}")).unwrap_or_default();
            let w = v.w.map(|w| format!("{w:.6e}")).unwrap_or_default();
            let _ = writeln!(s, "{}\t{p}\t{p2}\t{w}", v.name);
        } else {
            let _ = writeln!(s, "{}\t{p}", v.name);
        }
    }
    s
}

fn analyze(args: &AnalyzeArgs) -> Result<i32> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha = {} must lie in (0, 1)",
            args.alpha
        )));
    }
    // validate the name before touching the data
    args.procedure.parse::<AnyProcedure>()?;
    let file = std::fs::File::open(&args.data)
        .map_err(|e| Error::Data(format!("{}: cannot open: {e}", args.data.display())))?;
    let data = read_dataset(std::io::BufReader::new(file), &args.response)?;
    let report = analyze_dataset(&data, &args.procedure, args.alpha, args.variance)?;
    print!("{}", render_report(&report));
    if let Some(path) = &args.json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, json + "\n")?;
    }
    Ok(EXIT_OK)
}

fn run_check(args: &CheckArgs) -> Result<i32> {
    let scale = check::tolerance_scale_from_env()?;
    let report = check::run_all(scale)?;
    let mut out = std::io::stdout().lock();
    write!(out, "{}", report.table())?;
    let failed = report.results.iter().filter(|r| !r.pass).count();
    writeln!(
        out,
        "{} checks, {} failed (tolerance scale {})",
        report.results.len(),
        failed,
        scale
    )?;
    if let Some(path) = &args.json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, json + "\n")?;
    }
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_six_significant_digits() {
        assert_eq!(format_number(0.05), "0.0500000");
        assert_eq!(format_number(3.0), "3.00000");
        assert_eq!(format_number(1.0 / 3.0), "0.3333333333333333");
        assert_eq!(format_number(123456.0), "123456");
        assert_eq!(format_number(1234567.0), "1234567");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.25), "-0.250000");
        for x in [0.05, 3.0, 1.0 / 3.0, 2.5e-7, 12.5] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn exit_codes_are_distinct_per_failure_class() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Data("x".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::RankDeficient("x".into())), EXIT_RANK);
        assert_eq!(
            exit_code(&Error::InsufficientRows { n: 3, d: 2 }),
            EXIT_ROWS
        );
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_NUMERIC);
    }

    #[test]
    fn dataset_parsing_rejects_bad_cells() {
        let ok = read_dataset("a,b,y\n1,2,3\n4,5,6\n".as_bytes(), "y").unwrap();
        assert_eq!(ok.names, ["a", "b"]);
        assert_eq!(ok.x[(1, 0)], 4.0);
        assert_eq!(ok.y[1], 6.0);
        let missing = read_dataset("a,y\n1,\n".as_bytes(), "y").unwrap_err();
        assert!(missing.to_string().contains("line 2"), "{missing}");
        assert!(matches!(
            read_dataset("a,y\n1,x\n".as_bytes(), "y"),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            read_dataset("a,b\n1,2\n".as_bytes(), "y"),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn flags_fill_and_override_the_config() {
        let args = SimArgs {
            d: Some(10),
            structure: Some("ar1".into()),
            rho: Some(0.4),
            reps: Some(3),
            alphas: vec![0.1, 0.2],
            procedures: vec!["bh".into(), "gsbh3".into()],
            ..SimArgs::default()
        };
        let c = build_config(Scenario::Means, &args).unwrap();
        assert_eq!(c.structure, StructureKind::Ar1 { rho: 0.4 });
        assert_eq!(c.alphas, [0.1, 0.2]);
        assert_eq!(c.replications, 3);
        let missing = build_config(
            Scenario::Means,
            &SimArgs {
                d: Some(10),
                ..SimArgs::default()
            },
        )
        .unwrap_err();
        assert!(missing.to_string().contains("structure"));
    }
}
