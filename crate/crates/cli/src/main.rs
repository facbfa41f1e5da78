//! Command-line front end for the verification engine: case sweeps over the
//! two hypersurface families, the finite matrix-group lemmas, exact age
//! classification, invariant-ring surveys, and expression parsing, emitting
//! deterministic structured or human-readable reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use wildquot::field::Field;
use wildquot::parse::parse_poly;
use wildquot::poly::{MonomialOrder, PolyRing};
use wildquot::report::VerificationReport;
use wildquot::scenario::{
    run_invariants, run_lemmas, run_rst, run_verify, suggested_exit_code, CaseKind, RunConfig,
};

const GROEBNER_BUDGET_ENV: &str = "WILDQUOT_GROEBNER_BUDGET";

#[derive(Parser)]
#[command(
    name = "wildquot",
    version,
    about = "Exact verification of the order-9 wild quotient hypersurfaces in characteristic 3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline (group, invariants, relation, tower, ledger)
    /// for one or both cases across the configured specializations.
    Verify(VerifyArgs),
    /// Brute-force checks of the centralizer and 3-subgroup structure
    /// lemmas over GF(3).
    Lemmas(CommonArgs),
    /// Exact ages and classification of the cyclic group generated by one
    /// diagonalized element.
    Rst(RstArgs),
    /// Invariant-ring survey: generator degrees and graded dimensions.
    Invariants(InvariantsArgs),
    /// Parse a polynomial expression and print its canonical form.
    Parse(ParseArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    B0,
    Bne0,
    Both,
}

impl CaseArg {
    fn kinds(self) -> Vec<CaseKind> {
        match self {
            CaseArg::B0 => vec![CaseKind::BZero],
            CaseArg::Bne0 => vec![CaseKind::BNonzero],
            CaseArg::Both => vec![CaseKind::BZero, CaseKind::BNonzero],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    #[value(name = "structured")]
    Structured,
    #[value(name = "human_text")]
    HumanText,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strictness {
    #[value(name = "report_typos")]
    ReportTypos,
    #[value(name = "fail_on_mismatch")]
    FailOnMismatch,
}

#[derive(Args)]
struct CommonArgs {
    /// Optional key=value configuration file (flags take precedence).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    format: Format,
    #[arg(long)]
    prime: Option<u64>,
    #[arg(long)]
    extension_degree: Option<usize>,
    /// Comma-separated explicit seeds (overrides num-specializations).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    num_specializations: Option<usize>,
    /// Degree cap for the minimal-generator search.
    #[arg(long)]
    generator_cap: Option<u32>,
    /// Weighted-degree cap for the relation fit.
    #[arg(long)]
    relation_cap: Option<u64>,
    #[arg(long)]
    groebner_budget: Option<u64>,
    #[arg(long, value_enum)]
    strictness: Option<Strictness>,
    /// Force the packed value of the parameter a in every specialization.
    #[arg(long)]
    forced_a: Option<u64>,
    /// Force the packed value of the parameter b in every specialization.
    #[arg(long)]
    forced_b: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    case: CaseArg,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct RstArgs {
    /// Order of the group element.
    #[arg(long)]
    order: i64,
    /// Comma-separated diagonal exponents.
    #[arg(long)]
    exps: String,
    /// Force identity elements into the age test (diagnostic).
    #[arg(long)]
    include_identity: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct InvariantsArgs {
    /// Degree cap for the generator search and dimension table.
    #[arg(long, default_value_t = 12)]
    cap: u32,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ParseArgs {
    /// Comma-separated ring variable names.
    #[arg(long)]
    ring: String,
    /// Expression to parse.
    expr: String,
    #[arg(long, default_value_t = 3)]
    prime: u64,
    #[arg(long, default_value_t = 1)]
    extension_degree: usize,
    /// Write the canonical form to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seed_list(text: &str) -> Result<Vec<u64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|e| format!("seed `{s}`: {e}")))
        .collect()
}

fn parse_strictness(text: &str) -> Result<bool, String> {
    match text {
        "report_typos" => Ok(false),
        "fail_on_mismatch" => Ok(true),
        other => Err(format!(
            "strictness must be report_typos or fail_on_mismatch, found `{other}`"
        )),
    }
}

fn apply_config_file(cfg: &mut RunConfig, path: &PathBuf) -> Result<(), String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("config file {}: {e}", path.display()))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |e: std::num::ParseIntError| format!("config key {key}: {e}");
        match key {
            "prime" | "p" => cfg.prime = value.parse().map_err(bad)?,
            "extension_degree" => cfg.extension_degree = value.parse().map_err(bad)?,
            "num_specializations" => cfg.num_specializations = value.parse().map_err(bad)?,
            "seeds" => cfg.seeds = parse_seed_list(value)?,
            "generator_cap" => cfg.generator_cap = value.parse().map_err(bad)?,
            "relation_cap" => cfg.relation_cap = value.parse().map_err(bad)?,
            "groebner_budget" => cfg.groebner_budget = value.parse().map_err(bad)?,
            "strictness" => cfg.fail_on_anomalies = parse_strictness(value)?,
            "forced_a" => cfg.forced_a = Some(value.parse().map_err(bad)?),
            "forced_b" => cfg.forced_b = Some(value.parse().map_err(bad)?),
            other => return Err(format!("config line {}: unknown key `{other}`", lineno + 1)),
        }
    }
    Ok(())
}

/// Defaults, then the config file, then the budget environment override,
/// then explicit flags.
fn build_config(common: &CommonArgs) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        apply_config_file(&mut cfg, path)?;
    }
    if let Ok(v) = std::env::var(GROEBNER_BUDGET_ENV) {
        cfg.groebner_budget = v
            .trim()
            .parse()
            .map_err(|e| format!("{GROEBNER_BUDGET_ENV}: {e}"))?;
    }
    if let Some(p) = common.prime {
        cfg.prime = p;
    }
    if let Some(k) = common.extension_degree {
        cfg.extension_degree = k;
    }
    if let Some(n) = common.num_specializations {
        cfg.num_specializations = n;
    }
    if let Some(s) = &common.seeds {
        cfg.seeds = parse_seed_list(s)?;
    }
    if let Some(c) = common.generator_cap {
        cfg.generator_cap = c;
    }
    if let Some(c) = common.relation_cap {
        cfg.relation_cap = c;
    }
    if let Some(b) = common.groebner_budget {
        cfg.groebner_budget = b;
    }
    if let Some(s) = common.strictness {
        cfg.fail_on_anomalies = s == Strictness::FailOnMismatch;
    }
    if let Some(a) = common.forced_a {
        cfg.forced_a = Some(a);
    }
    if let Some(b) = common.forced_b {
        cfg.forced_b = Some(b);
    }
    if cfg.num_specializations == 0 && cfg.seeds.is_empty() {
        return Err("num_specializations must be at least 1".to_string());
    }
    if cfg.generator_cap == 0 || cfg.relation_cap == 0 {
        return Err("degree caps must be at least 1".to_string());
    }
    Ok(cfg)
}

fn emit(report: &VerificationReport, format: Format, out: Option<&PathBuf>) -> Result<(), String> {
    let text = match format {
        Format::Structured => report.to_json(),
        Format::HumanText => report.to_text(),
    };
    write_output(&text, out)
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, String> {
    let cfg = build_config(&args.common)?;
    let report = run_verify(&cfg, &args.case.kinds());
    emit(&report, args.common.format, args.common.out.as_ref())?;
    Ok(suggested_exit_code(&report, cfg.fail_on_anomalies) as u8)
}

fn cmd_lemmas(common: &CommonArgs) -> Result<u8, String> {
    let cfg = build_config(common)?;
    let mut report = VerificationReport::new(cfg.echo());
    let lemmas = run_lemmas().map_err(|e| format!("{e}"))?;
    let centralizer_ok = lemmas.centralizer.centralizer_order == 9
        && lemmas.centralizer.equals_span_form
        && lemmas.centralizer.abelian;
    report.verdicts.insert(
        "centralizer".to_string(),
        if centralizer_ok {
            format!(
                "verified: order 9, abelian, equals the span form (SL3 order {})",
                lemmas.centralizer.sl3_order
            )
        } else {
            "failed".to_string()
        },
    );
    let subgroups_ok = lemmas
        .subgroup_sections
        .iter()
        .all(|s| s.all_small_elementary_abelian && s.all_enumerated_elementary_abelian);
    report.verdicts.insert(
        "small_3subgroups".to_string(),
        if subgroups_ok {
            "verified: every enumerated 3-subgroup is elementary abelian".to_string()
        } else {
            "failed".to_string()
        },
    );
    report.lemmas = Some(lemmas);
    emit(&report, common.format, common.out.as_ref())?;
    Ok(suggested_exit_code(&report, cfg.fail_on_anomalies) as u8)
}

fn cmd_rst(args: &RstArgs) -> Result<u8, String> {
    let cfg = build_config(&args.common)?;
    let exps: Vec<i64> = args
        .exps
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|e| format!("exponent `{s}`: {e}")))
        .collect::<Result<_, _>>()?;
    let mut report = VerificationReport::new(cfg.echo());
    let rst = run_rst(args.order, &exps, args.include_identity).map_err(|e| format!("{e}"))?;
    report.verdicts.insert("rst_classification".to_string(), rst.classification.clone());
    report.rst = Some(rst);
    emit(&report, args.common.format, args.common.out.as_ref())?;
    Ok(0)
}

fn cmd_invariants(args: &InvariantsArgs) -> Result<u8, String> {
    let cfg = build_config(&args.common)?;
    let mut report = VerificationReport::new(cfg.echo());
    report.invariants = run_invariants(&cfg, args.cap)?;
    for section in &report.invariants {
        report.verdicts.insert(
            format!("invariants_{}", section.case),
            format!(
                "{} generators of degrees {:?}",
                section.generator_degrees.len(),
                section.generator_degrees
            ),
        );
    }
    emit(&report, args.common.format, args.common.out.as_ref())?;
    Ok(0)
}

fn cmd_parse(args: &ParseArgs) -> Result<u8, String> {
    let field = Field::new(args.prime, args.extension_degree, 0).map_err(|e| format!("{e}"))?;
    let names: Vec<&str> = args
        .ring
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err("the ring needs at least one variable".to_string());
    }
    let ring = PolyRing::new(field, &names, MonomialOrder::Grevlex);
    let consts = BTreeMap::new();
    let poly = parse_poly(&ring, &args.expr, &consts).map_err(|e| format!("{e}"))?;
    write_output(&format!("{}\n", poly.render()), args.out.as_ref())?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Lemmas(common) => cmd_lemmas(common),
        Command::Rst(args) => cmd_rst(args),
        Command::Invariants(args) => cmd_invariants(args),
        Command::Parse(args) => cmd_parse(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_strictness_parse() {
        assert_eq!(parse_seed_list("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seed_list("1,x").is_err());
        assert!(!parse_strictness("report_typos").unwrap());
        assert!(parse_strictness("fail_on_mismatch").unwrap());
        assert!(parse_strictness("loose").is_err());
    }

    #[test]
    fn config_file_overrides_defaults_and_rejects_unknown_keys() {
        let dir = std::env::temp_dir();
        let path = dir.join("wildquot_cli_config_test.txt");
        fs::write(
            &path,
            "# comment\nnum_specializations = 3\nseeds=7,9\nstrictness=fail_on_mismatch\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        apply_config_file(&mut cfg, &path).unwrap();
        assert_eq!(cfg.num_specializations, 3);
        assert_eq!(cfg.seeds, vec![7, 9]);
        assert!(cfg.fail_on_anomalies);
        fs::write(&path, "budget = 5\n").unwrap();
        assert!(apply_config_file(&mut cfg, &path).is_err());
        let _ = fs::remove_file(&path);
    }

    #[test]
    fn case_selector_expands_to_the_case_kinds() {
        assert_eq!(CaseArg::B0.kinds(), vec![CaseKind::BZero]);
        assert_eq!(CaseArg::Bne0.kinds(), vec![CaseKind::BNonzero]);
        assert_eq!(CaseArg::Both.kinds(), vec![CaseKind::BZero, CaseKind::BNonzero]);
    }
}
