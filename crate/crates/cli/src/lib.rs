//! `rootmirror` command-line interface: configuration ingestion, command
//! dispatch, and exact-output emission.
//!
//! Exit codes: 0 success, 1 contract/config error, 2 property-check failure.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use rootmirror_core::exactalg::CurveClass;
use rootmirror_core::mirror::run_pipeline;

use commands::{
    build_series, default_order, default_psi_max, default_r_list, invariants_table, kernel_table,
    pipeline_theory, series_table, validate_s, verify, TheoryChoice,
};
use config::{apply_overrides, digest, resolve, to_geometry, Overrides};
use report::{BoundsOut, RunReport};

/// A contract or configuration error (exit code 1). Property-check failures
/// are reported in-band and signalled by exit code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl CliError {
    pub fn config(msg: String) -> CliError {
        CliError(msg)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

impl From<rootmirror_core::Error> for CliError {
    fn from(e: rootmirror_core::Error) -> CliError {
        CliError(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "rootmirror",
    version,
    about = "Exact Givental I-functions of root stacks, relative pairs, and local theories, \
             with mirror-map inversion and invariant extraction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the coefficient table of the selected I-function.
    Ifun(RunArgs),
    /// Run the mirror pipeline and extract one-point invariants.
    Invariants(RunArgs),
    /// Run the full property suite (exit 2 on any failure).
    Verify(RunArgs),
    /// Pretty-print one degree's coefficients, factored and expanded.
    Expand(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ifun(_) => "ifun",
            Command::Invariants(_) => "invariants",
            Command::Verify(_) => "verify",
            Command::Expand(_) => "expand",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Ifun(a) | Command::Invariants(a) | Command::Verify(a) | Command::Expand(a) => {
                a
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Path to a JSON config, or a builtin alias (p2-cubic, p3-cubic-surface).
    pub config: String,
    /// Root index override: a single value N, or an inclusive range A..B
    /// (range form is only meaningful for verify).
    #[arg(long)]
    pub r: Option<String>,
    /// Override every per-generator degree cap.
    #[arg(long)]
    pub dmax: Option<u64>,
    /// Override the total extension-order cap |k|.
    #[arg(long)]
    pub kmax: Option<u64>,
    /// Mirror-map inversion order in (Q, x).
    #[arg(long)]
    pub order: Option<u64>,
    /// Theory: absolute | root-stack | root-stack-extended | relative |
    /// relative-extended | ambient | local | toric | gerbe | gerbe-twisted.
    #[arg(long)]
    pub theory: Option<String>,
    /// Output format.
    #[arg(long, default_value = "text")]
    pub format: String,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Degree selector (comma-separated Mori coordinates), e.g. --d 2.
    #[arg(long)]
    pub d: Option<String>,
    /// Highest ψ-power extracted by `invariants`.
    #[arg(long)]
    pub psi_max: Option<u32>,
}

#[derive(Clone, Copy, Debug)]
enum RArg {
    Single(u64),
    Range(u64, u64),
}

fn parse_r(s: &str) -> Result<RArg, CliError> {
    if let Some((a, b)) = s.split_once("..") {
        let lo: u64 = a
            .trim()
            .parse()
            .map_err(|e| CliError::config(format!("--r range start '{a}': {e}")))?;
        let hi: u64 =
            b.trim().parse().map_err(|e| CliError::config(format!("--r range end '{b}': {e}")))?;
        if lo == 0 || hi < lo {
            return Err(CliError::config(format!("--r range {lo}..{hi} is empty or invalid")));
        }
        Ok(RArg::Range(lo, hi))
    } else {
        let v: u64 = s.trim().parse().map_err(|e| CliError::config(format!("--r '{s}': {e}")))?;
        if v == 0 {
            return Err(CliError::config("--r must be positive".into()));
        }
        Ok(RArg::Single(v))
    }
}

fn parse_degree(s: &str, num_gens: usize) -> Result<CurveClass, CliError> {
    let coords = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| CliError::config(format!("--d '{s}': {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != num_gens {
        return Err(CliError::config(format!(
            "--d '{s}': expected {num_gens} coordinates, got {}",
            coords.len()
        )));
    }
    Ok(CurveClass::new(coords))
}

/// Execute a parsed command and build its report.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let args = cli.command.args();
    let command = cli.command.name();

    if args.format != "text" && args.format != "json" {
        return Err(CliError::config(format!(
            "--format must be 'text' or 'json', got '{}'",
            args.format
        )));
    }

    let r_arg = args.r.as_deref().map(parse_r).transpose()?;
    if matches!(r_arg, Some(RArg::Range(..))) && command != "verify" {
        return Err(CliError::config(
            "--r A..B ranges are only supported by the verify command".into(),
        ));
    }

    let file = resolve(&args.config)?;
    let overrides = Overrides {
        r: match r_arg {
            Some(RArg::Single(v)) => Some(v),
            _ => None,
        },
        dmax: args.dmax,
        kmax: args.kmax,
    };
    let effective = apply_overrides(&file, &overrides);
    let cfg = to_geometry(&effective)?;

    let theory = match &args.theory {
        Some(t) => TheoryChoice::parse(t)?,
        None => match command {
            "invariants" => TheoryChoice::Relative,
            _ => TheoryChoice::RootStack,
        },
    };
    // verify spans both sides of the correspondence with its own r-list, so
    // the root-side S-range is checked there against each listed r instead.
    if command != "verify" {
        validate_s(&cfg, theory)?;
    }

    let order = args.order.unwrap_or_else(|| default_order(&cfg));
    let mut report = RunReport {
        command: command.to_string(),
        config_digest: digest(&effective),
        bounds: BoundsOut {
            d_max: cfg.bounds.d_max.clone(),
            k_total_max: cfg.bounds.k_total_max,
            z_min: cfg.bounds.z_min,
            r: cfg.r,
            order,
        },
        theory: Some(theory.render().to_string()),
        tables: Vec::new(),
        checks: Vec::new(),
    };

    match command {
        "ifun" => {
            let series = build_series(&cfg, theory)?;
            let degree = args
                .d
                .as_deref()
                .map(|s| parse_degree(s, cfg.ring.num_curve_generators()))
                .transpose()?;
            let mut table = series_table(
                format!("I-function coefficients, theory {}", theory.render()),
                &series,
            );
            if let Some(d) = &degree {
                table.rows.retain(|row| row[0] == format!("{:?}", d.coords));
                report.tables.push(kernel_table(&cfg, theory, d)?);
            }
            report.tables.push(table);
        }
        "expand" => {
            let d = args
                .d
                .as_deref()
                .ok_or_else(|| CliError::config("expand requires --d <degree>".into()))
                .and_then(|s| parse_degree(s, cfg.ring.num_curve_generators()))?;
            report.tables.push(kernel_table(&cfg, theory, &d)?);
        }
        "invariants" => {
            let t = pipeline_theory(theory)?;
            let psi_max = args.psi_max.unwrap_or_else(|| default_psi_max(&cfg));
            let (_, records) = run_pipeline(&cfg, t, order, psi_max)?;
            report
                .tables
                .push(invariants_table(format!("{} invariants", theory.render()), &records));
        }
        "verify" => {
            report.theory = None;
            let r_list = match r_arg {
                Some(RArg::Single(v)) => vec![v],
                Some(RArg::Range(a, b)) => (a..=b).collect(),
                None => default_r_list(&cfg)?,
            };
            let (tables, checks) = verify(&cfg, &r_list, order)?;
            report.tables = tables;
            report.checks = checks;
        }
        _ => unreachable!("clap enforces the command set"),
    }
    Ok(report)
}

/// Full entry point: run, emit, and map outcomes to exit codes.
pub fn main_impl(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(report) => {
            let body = match cli.command.args().format.as_str() {
                "json" => report.to_json(),
                _ => report.to_text(),
            };
            if let Some(path) = &cli.command.args().out {
                if let Err(e) = std::fs::write(path, &body) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 1;
                }
            } else {
                print!("{body}");
            }
            if report.any_failure() {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use commands::TheoryChoice;

    fn args(cmd: &str, extra: &[&str]) -> Cli {
        let mut v = vec!["rootmirror", cmd];
        v.extend_from_slice(extra);
        Cli::parse_from(v)
    }

    #[test]
    fn r_argument_forms() {
        assert!(matches!(parse_r("5"), Ok(RArg::Single(5))));
        assert!(matches!(parse_r("13..20"), Ok(RArg::Range(13, 20))));
        assert!(parse_r("0").is_err());
        assert!(parse_r("9..3").is_err());
        assert!(parse_r("x").is_err());
    }

    #[test]
    fn s_out_of_range_is_rejected() {
        // S={7} with r=5 in root-stack mode.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"base":{"kind":"projective-space","n":2},"divisor":["0","3","0"],
               "r":5,"s":[7],"bounds":{"d-max":[1],"k-total-max":1}}"#,
        )
        .unwrap();
        let cli = args(
            "ifun",
            &["--theory", "root-stack-extended", path.to_str().unwrap()],
        );
        let err = run(&cli).unwrap_err();
        assert!(err.0.contains("outside"), "{err}");
    }

    #[test]
    fn deterministic_output_bytes() {
        let cli = args("invariants", &["p2-cubic", "--theory", "relative", "--dmax", "2"]);
        let a = run(&cli).unwrap();
        let b = run(&cli).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_text(), b.to_text());
        assert!(a.to_text().contains("135/4"));
    }

    #[test]
    fn theory_names_parse() {
        assert_eq!(
            TheoryChoice::parse("extended").unwrap(),
            TheoryChoice::RootStackExtended
        );
        assert!(TheoryChoice::parse("nonsense").is_err());
    }

    #[test]
    fn range_r_rejected_outside_verify() {
        let cli = args("ifun", &["p2-cubic", "--r", "3..5"]);
        assert!(run(&cli).is_err());
    }
}
