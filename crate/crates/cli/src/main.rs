//! Command line front end. Exit codes follow the verdict so CI can gate
//! on them: 0 for none/patch, 2 for minor, 3 for major, 1 for errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use semvercalc::analysis::{analyze, classify};
use semvercalc::contract::parse_decimal;
use semvercalc::diff::{diff, DiffConfig};
use semvercalc::facts::FactSet;
use semvercalc::model::{surface_report, ComponentModel, ExportSpec};
use semvercalc::policy::{pessimistic, Policy};
use semvercalc::provenance::{self, DerivationNode, RenderFormat};
use semvercalc::registry::{self, RegistryIndex};
use semvercalc::sdl::parse_sdl;
use semvercalc::surface::{surface_names, UsageProfile, WorldMode};
use semvercalc::version::{bump, ImpactLevel, SemVer, VersionReq};

#[derive(Parser)]
#[command(
    name = "semvercalc",
    version,
    about = "Semantic version calculator: diff two interface descriptions, \
             classify the changes under a policy, and recommend the next version"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare two descriptions and report verdict, facts, and recommendation
    Check(CheckArgs),
    /// Print the change facts between two descriptions
    Facts(FactsArgs),
    /// Evaluate a pre-extracted facts file under a policy
    Classify(ClassifyArgs),
    /// Apply an impact level to a version
    Bump(BumpArgs),
    /// Summarize one description's API surface
    Surface(SurfaceArgs),
    /// Pick the greatest registry version matching a requirement
    Resolve(ResolveArgs),
    /// Pre-classify registry upgrades above a current version
    Advise(AdviseArgs),
    /// Pretty-print a stored provenance record
    Explain(ExplainArgs),
    /// Report unsatisfiable contracts and ineffective exports (exit 1 if any)
    Lint(LintArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Every public declaration is client-reachable
    Open,
    /// Only the declared export list is reachable
    Exports,
    /// Only exported names that known clients use are reachable
    Closed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Text,
    Structured,
}

#[derive(Args)]
struct PolicyOpt {
    /// Policy rule file (default: the bundled pessimistic policy)
    #[arg(long, env = "SEMVERCALC_POLICY", value_name = "PATH")]
    policy: Option<PathBuf>,
}

#[derive(Args)]
struct ScopeOpts {
    /// World assumption for the change surface
    #[arg(long, value_enum, default_value_t = ModeArg::Open)]
    mode: ModeArg,
    /// Client usage file, one identifier per line; repeatable, unioned.
    /// Required by closed mode, ignored by the others
    #[arg(long = "usage", value_name = "PATH")]
    usage: Vec<PathBuf>,
}

#[derive(Args)]
struct ThresholdOpts {
    /// Runtime growth ratio above which a resourcing fact fires (default 1.25)
    #[arg(long, value_name = "RATIO")]
    runtime_threshold: Option<String>,
    /// Memory growth ratio above which a resourcing fact fires (default 1.25)
    #[arg(long, value_name = "RATIO")]
    memory_threshold: Option<String>,
}

#[derive(Args)]
struct OutputOpt {
    /// Report format on stdout
    #[arg(long, value_enum, default_value_t = OutputArg::Text, value_name = "FORMAT")]
    output: OutputArg,
}

#[derive(Args)]
struct CheckArgs {
    /// Old-version description
    old: PathBuf,
    /// New-version description
    new: PathBuf,
    #[command(flatten)]
    policy: PolicyOpt,
    #[command(flatten)]
    scope: ScopeOpts,
    #[command(flatten)]
    thresholds: ThresholdOpts,
    #[command(flatten)]
    output: OutputOpt,
    /// Also write the structured provenance record to this path
    #[arg(long, value_name = "PATH")]
    prov_out: Option<PathBuf>,
    /// Exit 0 even when the verdict asks for a bump
    #[arg(long)]
    exit_zero: bool,
}

#[derive(Args)]
struct FactsArgs {
    old: PathBuf,
    new: PathBuf,
    #[command(flatten)]
    scope: ScopeOpts,
    #[command(flatten)]
    thresholds: ThresholdOpts,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Facts file as printed by `facts`
    facts: PathBuf,
    #[command(flatten)]
    policy: PolicyOpt,
    #[command(flatten)]
    output: OutputOpt,
    /// Exit 0 even when the verdict asks for a bump
    #[arg(long)]
    exit_zero: bool,
}

#[derive(Args)]
struct BumpArgs {
    /// Version to bump, e.g. 1.2.3
    #[arg(value_parser = parse_version)]
    version: SemVer,
    /// none, patch, minor, or major
    #[arg(value_parser = parse_level)]
    level: ImpactLevel,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Description to summarize
    sdl: PathBuf,
    /// Client usage file; repeatable, unioned
    #[arg(long = "usage", value_name = "PATH")]
    usage: Vec<PathBuf>,
    #[command(flatten)]
    output: OutputOpt,
}

#[derive(Args)]
struct ResolveArgs {
    /// Registry directory of <name>-<version>.sdl files
    registry: PathBuf,
    /// Component name
    name: String,
    /// Version requirement, e.g. 1.2.3, 1.2.*, 1.*, or ">=1.0.0 <2.0.0"
    #[arg(value_parser = parse_req)]
    req: VersionReq,
    #[command(flatten)]
    output: OutputOpt,
}

#[derive(Args)]
struct AdviseArgs {
    /// Registry directory of <name>-<version>.sdl files
    registry: PathBuf,
    /// Component name
    name: String,
    /// Version currently in use (must be in the registry)
    #[arg(value_parser = parse_version)]
    current: SemVer,
    /// Requirement the candidates must match
    #[arg(value_parser = parse_req)]
    req: VersionReq,
    #[command(flatten)]
    policy: PolicyOpt,
    #[command(flatten)]
    scope: ScopeOpts,
    #[command(flatten)]
    thresholds: ThresholdOpts,
    #[command(flatten)]
    output: OutputOpt,
}

#[derive(Args)]
struct ExplainArgs {
    /// Structured provenance record (.prov)
    prov: PathBuf,
}

#[derive(Args)]
struct LintArgs {
    /// Description to lint
    sdl: PathBuf,
}

fn parse_version(text: &str) -> Result<SemVer, String> {
    SemVer::from_str(text).map_err(|e| e.to_string())
}

fn parse_level(text: &str) -> Result<ImpactLevel, String> {
    ImpactLevel::from_str(text).map_err(|e| e.to_string())
}

fn parse_req(text: &str) -> Result<VersionReq, String> {
    VersionReq::from_str(text).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_model(path: &Path) -> Result<ComponentModel> {
    let text = read(path)?;
    parse_sdl(&text).with_context(|| format!("{}: invalid component description", path.display()))
}

fn load_policy(opt: &PolicyOpt) -> Result<Policy> {
    match &opt.policy {
        Some(path) => {
            let text = read(path)?;
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("policy");
            Policy::parse(id, &text).with_context(|| format!("{}: invalid policy", path.display()))
        }
        None => Ok(pessimistic()),
    }
}

fn build_mode(scope: &ScopeOpts) -> Result<WorldMode> {
    match scope.mode {
        ModeArg::Open => Ok(WorldMode::OpenWorld),
        ModeArg::Exports => Ok(WorldMode::DeclaredExports),
        ModeArg::Closed => {
            if scope.usage.is_empty() {
                bail!("closed mode needs at least one --usage file");
            }
            Ok(WorldMode::ClosedWorld(load_usage(&scope.usage)?))
        }
    }
}

fn load_usage(paths: &[PathBuf]) -> Result<UsageProfile> {
    let mut profiles = Vec::new();
    for path in paths {
        let text = read(path)?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("client");
        let profile = UsageProfile::parse(name, &text)
            .with_context(|| format!("{}: invalid usage file", path.display()))?;
        profiles.push(profile);
    }
    Ok(UsageProfile::merge(profiles))
}

fn build_config(thresholds: &ThresholdOpts) -> Result<DiffConfig> {
    let mut config = DiffConfig::default();
    if let Some(text) = &thresholds.runtime_threshold {
        config.runtime_ratio_threshold =
            parse_decimal(text).ok_or_else(|| anyhow!("`{text}` is not a decimal ratio"))?;
    }
    if let Some(text) = &thresholds.memory_threshold {
        config.memory_ratio_threshold =
            parse_decimal(text).ok_or_else(|| anyhow!("`{text}` is not a decimal ratio"))?;
    }
    config.validate().map_err(|message| anyhow!(message))?;
    Ok(config)
}

fn verdict_exit(level: ImpactLevel, exit_zero: bool) -> u8 {
    if exit_zero {
        return 0;
    }
    match level {
        ImpactLevel::None | ImpactLevel::Patch => 0,
        ImpactLevel::Minor => 2,
        ImpactLevel::Major => 3,
    }
}

fn load_registry(path: &Path) -> Result<RegistryIndex> {
    let index = registry::load_index(path)?;
    for (path, reason) in &index.skipped {
        eprintln!("note: skipped {}: {reason}", path.display());
    }
    Ok(index)
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

fn cmd_check(args: CheckArgs) -> Result<u8> {
    let old = load_model(&args.old)?;
    let new = load_model(&args.new)?;
    let policy = load_policy(&args.policy)?;
    let mode = build_mode(&args.scope)?;
    let config = build_config(&args.thresholds)?;
    let analysis = analyze(&old, &new, &policy, &mode, &config)?;
    let record = provenance::assemble(&old, &new, &analysis, &policy, &mode, &config)?;
    if let Some(path) = &args.prov_out {
        let structured = provenance::render_record(&record, RenderFormat::Structured);
        fs::write(path, structured).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let format = match args.output.output {
        OutputArg::Text => RenderFormat::Text,
        OutputArg::Structured => RenderFormat::Structured,
    };
    print!("{}", provenance::render_record(&record, format));
    Ok(verdict_exit(analysis.verdict, args.exit_zero))
}

fn cmd_facts(args: FactsArgs) -> Result<u8> {
    let old = load_model(&args.old)?;
    let new = load_model(&args.new)?;
    let mode = build_mode(&args.scope)?;
    let config = build_config(&args.thresholds)?;
    let facts = FactSet::new(diff(&old, &new, &config), surface_names(&old, &new, &mode));
    print!("{}", facts.to_text());
    Ok(0)
}

fn cmd_classify(args: ClassifyArgs) -> Result<u8> {
    let text = read(&args.facts)?;
    let facts = FactSet::parse(&text)
        .with_context(|| format!("{}: invalid facts file", args.facts.display()))?;
    let policy = load_policy(&args.policy)?;
    let classification = classify(&facts, &policy.rules)?;
    let nodes: Vec<DerivationNode> = classification
        .supporting
        .iter()
        .map(DerivationNode::from_derivation)
        .collect();
    match args.output.output {
        OutputArg::Text => {
            println!("verdict: {}", classification.verdict);
            for node in &nodes {
                print!("{}", node.render_text(0));
            }
        }
        OutputArg::Structured => print_json(&serde_json::json!({
            "verdict": classification.verdict.as_str(),
            "supporting_derivations": nodes,
        })),
    }
    Ok(verdict_exit(classification.verdict, args.exit_zero))
}

fn cmd_bump(args: BumpArgs) -> Result<u8> {
    println!("{}", bump(args.version, args.level));
    Ok(0)
}

fn cmd_surface(args: SurfaceArgs) -> Result<u8> {
    let model = load_model(&args.sdl)?;
    let usage = if args.usage.is_empty() {
        None
    } else {
        Some(load_usage(&args.usage)?)
    };
    let report = surface_report(&model, usage.as_ref().map(|u| &u.used));
    match args.output.output {
        OutputArg::Text => {
            println!("component: {} {}", model.name, model.version);
            println!("total functions: {}", report.total_functions);
            println!("public functions: {}", report.public_functions);
            println!("exported functions: {}", report.exported_functions);
            if let Some(used) = report.used_functions {
                println!("used functions: {used}");
            }
        }
        OutputArg::Structured => print_json(&serde_json::json!({
            "component": model.name,
            "version": model.version.to_string(),
            "total_functions": report.total_functions,
            "public_functions": report.public_functions,
            "exported_functions": report.exported_functions,
            "used_functions": report.used_functions,
        })),
    }
    Ok(0)
}

fn cmd_resolve(args: ResolveArgs) -> Result<u8> {
    let index = load_registry(&args.registry)?;
    let version = index.resolve(&args.name, &args.req)?;
    match args.output.output {
        OutputArg::Text => println!("{version}"),
        OutputArg::Structured => print_json(&serde_json::json!({
            "name": args.name,
            "req": args.req.to_string(),
            "resolved": version.to_string(),
        })),
    }
    Ok(0)
}

fn cmd_advise(args: AdviseArgs) -> Result<u8> {
    let index = load_registry(&args.registry)?;
    let policy = load_policy(&args.policy)?;
    let mode = build_mode(&args.scope)?;
    let config = build_config(&args.thresholds)?;
    let advice = index.advise(
        &args.name,
        args.current,
        &args.req,
        &policy.rules,
        &mode,
        &config,
    )?;
    match args.output.output {
        OutputArg::Text => {
            if advice.is_empty() {
                println!("no upgrade candidates");
            }
            for entry in &advice {
                let note = if entry.agreement {
                    "agreement"
                } else {
                    "DISAGREEMENT"
                };
                println!(
                    "{} -> {}  declared {}, computed {}: {note}",
                    entry.from, entry.to, entry.declared_bump, entry.verdict
                );
            }
        }
        OutputArg::Structured => {
            let entries: Vec<serde_json::Value> = advice
                .iter()
                .map(|entry| {
                    serde_json::json!({
                        "from": entry.from.to_string(),
                        "to": entry.to.to_string(),
                        "declared_bump": entry.declared_bump.as_str(),
                        "verdict": entry.verdict.as_str(),
                        "agreement": entry.agreement,
                    })
                })
                .collect();
            print_json(&serde_json::Value::Array(entries));
        }
    }
    Ok(0)
}

fn cmd_explain(args: ExplainArgs) -> Result<u8> {
    let text = read(&args.prov)?;
    let record = provenance::parse_structured(&text)
        .with_context(|| format!("{}: invalid provenance record", args.prov.display()))?;
    print!("{}", provenance::render_record(&record, RenderFormat::Text));
    Ok(0)
}

fn cmd_lint(args: LintArgs) -> Result<u8> {
    let model = load_model(&args.sdl)?;
    let mut findings = Vec::new();
    for func in &model.functions {
        if !func.precondition.is_satisfiable() {
            findings.push(format!("fn {}: precondition is unsatisfiable", func.name));
        }
        if !func.postcondition.is_satisfiable() {
            findings.push(format!("fn {}: postcondition is unsatisfiable", func.name));
        }
    }
    if let ExportSpec::Named(names) = &model.exports {
        let public = model.public_names();
        for name in names {
            if !public.contains(name) {
                findings.push(format!(
                    "export {name} names an internal declaration and exposes nothing"
                ));
            }
        }
    }
    if findings.is_empty() {
        println!("no findings");
        return Ok(0);
    }
    for finding in &findings {
        println!("{finding}");
    }
    Ok(1)
}

fn run() -> Result<u8> {
    match Cli::parse().command {
        Command::Check(args) => cmd_check(args),
        Command::Facts(args) => cmd_facts(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Bump(args) => cmd_bump(args),
        Command::Surface(args) => cmd_surface(args),
        Command::Resolve(args) => cmd_resolve(args),
        Command::Advise(args) => cmd_advise(args),
        Command::Explain(args) => cmd_explain(args),
        Command::Lint(args) => cmd_lint(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
