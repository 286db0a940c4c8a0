//! `admit-audit` command line.
//!
//! Exit codes: 0 success, 1 operational error, 2 at least one audited cell
//! flagged a subgroup difference.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::audit::{
    policy_impact, run_grid, AuditGrid, AuditReport, AuditSpec, GridEntry, ModelSettings, PolicyImpact, PolicyThresholds,
    DEFAULT_THRESHOLD,
};
use crate::cohort::{
    load_cohort, slice_cohort, write_cohort, ApplicantTable, CohortGroup, CohortSchema, Concordance, FeatureScenario,
    SensitiveVariable,
};
use crate::error::{AuditError, Result};
use crate::report::{self, GridSummaryRow};
use crate::synth::{describe, generate, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "admit-audit", version, about = "Subgroup bias audits for admissions classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic applicant cohort as CSV.
    Synth(SynthArgs),
    /// Run the audit grid described by a run config.
    Audit(AuditArgs),
    /// `audit` with repeated trials (100 unless more are requested).
    Aggregate(AuditArgs),
    /// Admission-threshold impact: quadrant scatter and demographic shares.
    Policy(PolicyArgs),
    /// Re-render a JSON report as Markdown.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator config JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "AUDIT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Override the number of records.
    #[arg(long)]
    pub n: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Run config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides AUDIT_SEED and the config.
    #[arg(long, env = "AUDIT_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of json, markdown, csv.
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    /// Worker threads for trials; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Cohort CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Restrict to one admission-regime cohort.
    #[arg(long, default_value = "all-years")]
    pub group: CohortGroup,
    #[arg(long, value_delimiter = ',', default_value = "json,markdown,csv")]
    pub format: Vec<Format>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Audit report, policy or summary JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Markdown output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Markdown,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSelection {
    /// `"standard"` or `"full"`.
    Named(String),
    Custom(AuditGrid),
}

impl GridSelection {
    pub fn resolve(&self) -> Result<AuditGrid> {
        match self {
            GridSelection::Named(n) if n == "standard" => Ok(AuditGrid::standard()),
            GridSelection::Named(n) if n == "full" => Ok(AuditGrid::full()),
            GridSelection::Named(n) => Err(AuditError::config("grid", format!("unknown grid `{n}`"))),
            GridSelection::Custom(g) => Ok(g.clone()),
        }
    }
}

/// Audit run description. Relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Cohort CSV.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Generator config JSON used instead of `input`.
    #[serde(default)]
    pub synth: Option<PathBuf>,
    /// Seed for the synthetic cohort.
    #[serde(default)]
    pub synth_seed: u64,
    /// Header renames for `input`.
    #[serde(default)]
    pub columns: CohortSchema,
    /// ACT to SAT table; the bundled table when omitted.
    #[serde(default)]
    pub concordance: Option<PathBuf>,
    #[serde(default = "default_grid")]
    pub grid: GridSelection,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub model: ModelSettings,
}

fn default_grid() -> GridSelection {
    GridSelection::Named("standard".into())
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_trials() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("reports")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Markdown, Format::Csv]
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AuditError::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.synth, &mut cfg.concordance].into_iter().flatten() {
            *p = base.join(&*p);
        }
        cfg.out = base.join(&cfg.out);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input, &self.synth) {
            (Some(_), Some(_)) => Err(AuditError::config("input", "give either `input` or `synth`, not both")),
            (None, None) => Err(AuditError::config("input", "one of `input` or `synth` is required")),
            _ => Ok(()),
        }?;
        if self.formats.is_empty() {
            return Err(AuditError::config("formats", "at least one format is required"));
        }
        self.grid.resolve().map(|_| ())
    }

    pub fn concordance(&self) -> Result<Concordance> {
        match &self.concordance {
            Some(p) => Concordance::load(p),
            None => Ok(Concordance::bundled()),
        }
    }

    /// The cohort named by `input`, or generated from `synth`.
    pub fn cohort(&self) -> Result<ApplicantTable> {
        if let Some(path) = &self.input {
            let loaded = load_cohort(path, &self.columns)?;
            for r in &loaded.rejects {
                eprintln!("{}: line {}: {}", path.display(), r.line, r.reason);
            }
            Ok(loaded.table)
        } else {
            let path = self.synth.as_ref().expect("validated");
            generate(&SynthConfig::load(path)?, self.synth_seed)
        }
    }

    pub fn template(&self) -> AuditSpec {
        let mut spec = AuditSpec::new(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::Gender)
            .with_trials(self.n_trials)
            .with_seed(self.master_seed)
            .with_threshold(self.threshold);
        spec.model = self.model.clone();
        spec
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Audit(a) => cmd_audit(&a, false),
        Command::Aggregate(a) => cmd_audit(&a, true),
        Command::Policy(a) => cmd_policy(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| AuditError::io(path, e))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| AuditError::io(path, e))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<i32> {
    let mut config = match &args.config {
        Some(p) => SynthConfig::load(p)?,
        None => SynthConfig::default(),
    };
    if let Some(n) = args.n {
        config.n = n;
    }
    let table = generate(&config, args.seed)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AuditError::io(dir, e))?;
    }
    write_cohort(&table, create(&args.out)?)?;
    let summary = describe(&table, &Concordance::bundled())?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(EXIT_OK)
}

/// Resolves flag overrides, runs the grid and writes every requested
/// artifact. Returns the exit code.
pub fn cmd_audit(args: &AuditArgs, aggregate: bool) -> Result<i32> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(t) = args.trials {
        cfg.n_trials = t;
    }
    if aggregate && cfg.n_trials <= 1 {
        cfg.n_trials = 100;
    }
    if let Some(t) = args.threshold {
        cfg.threshold = t;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    if let Some(f) = &args.format {
        cfg.formats = f.clone();
    }
    cfg.validate()?;
    let template = cfg.template();
    template.validate()?;

    let concordance = cfg.concordance()?;
    let table = cfg.cohort()?;
    let grid = cfg.grid.resolve()?;
    let entries = match args.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| AuditError::InvalidArgument(e.to_string()))?
            .install(|| run_grid(&table, &grid, &template, &concordance)),
        None => run_grid(&table, &grid, &template, &concordance),
    };
    write_grid(&cfg.out, &entries, &cfg.formats)?;

    let mut flagged = false;
    for e in &entries {
        match (&e.report, &e.skipped) {
            (Some(r), _) => {
                let names: Vec<&str> = r.flagged().iter().map(|m| m.key()).collect();
                flagged |= !names.is_empty();
                if names.is_empty() {
                    println!("{}: no flags", e.cell.stem());
                } else {
                    println!("{}: flagged {}", e.cell.stem(), names.join(", "));
                }
            }
            (None, reason) => println!("{}: skipped ({})", e.cell.stem(), reason.as_deref().unwrap_or("")),
        }
    }
    Ok(if flagged { EXIT_FLAGGED } else { EXIT_OK })
}

/// `{stem}.json`, `{stem}.model.json`, `{stem}.md` and `{stem}.csv` per
/// audited cell, plus `summary.json` / `summary.md`.
pub fn write_grid(out: &Path, entries: &[GridEntry], formats: &[Format]) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| AuditError::io(out, e))?;
    for e in entries {
        let Some(r) = &e.report else { continue };
        let stem = e.cell.stem();
        write_report(out, &stem, r, formats)?;
    }
    let rows = report::grid_summary(entries);
    if formats.contains(&Format::Json) {
        write(&out.join("summary.json"), &report::to_json(&rows)?)?;
    }
    if formats.contains(&Format::Markdown) {
        write(&out.join("summary.md"), &report::grid_markdown(&rows))?;
    }
    Ok(())
}

pub fn write_report(out: &Path, stem: &str, r: &AuditReport, formats: &[Format]) -> Result<()> {
    if formats.contains(&Format::Json) {
        write(&out.join(format!("{stem}.json")), &report::to_json(r)?)?;
        write(&out.join(format!("{stem}.model.json")), &report::to_json(&r.model)?)?;
    }
    if formats.contains(&Format::Markdown) {
        write(&out.join(format!("{stem}.md")), &report::audit_markdown(r))?;
    }
    if formats.contains(&Format::Csv) {
        report::audit_csv(r, create(&out.join(format!("{stem}.csv")))?)?;
    }
    Ok(())
}

pub fn cmd_policy(args: &PolicyArgs) -> Result<i32> {
    let concordance = Concordance::bundled();
    let loaded = load_cohort(&args.input, &CohortSchema::default())?;
    let table = slice_cohort(&loaded.table, args.group);
    let impact = policy_impact(&table, PolicyThresholds::default(), &concordance);
    if impact.scatter.is_empty() {
        return Err(AuditError::InvalidArgument("policy analysis requires test scores".into()));
    }
    write_policy(&args.out, &impact, &args.format)?;
    println!(
        "{} records, {} excluded; admitted {} (test-required) vs {} (test-optional)",
        impact.n_records, impact.n_excluded, impact.admitted_required, impact.admitted_optional
    );
    Ok(EXIT_OK)
}

/// `policy.json`, `policy.md` and `scatter.csv`.
pub fn write_policy(out: &Path, impact: &PolicyImpact, formats: &[Format]) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| AuditError::io(out, e))?;
    if formats.contains(&Format::Json) {
        write(&out.join("policy.json"), &report::to_json(impact)?)?;
    }
    if formats.contains(&Format::Markdown) {
        write(&out.join("policy.md"), &report::policy_markdown(impact))?;
    }
    if formats.contains(&Format::Csv) {
        report::scatter_csv(impact, create(&out.join("scatter.csv"))?)?;
    }
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.input).map_err(|e| AuditError::io(&args.input, e))?;
    let md = render_any(&text)?;
    match &args.out {
        Some(p) => write(p, &md)?,
        None => print!("{md}"),
    }
    Ok(EXIT_OK)
}

/// Markdown for an audit report, policy impact or grid summary document.
pub fn render_any(json: &str) -> Result<String> {
    if let Ok(r) = serde_json::from_str::<AuditReport>(json) {
        return Ok(report::audit_markdown(&r));
    }
    if let Ok(p) = serde_json::from_str::<PolicyImpact>(json) {
        return Ok(report::policy_markdown(&p));
    }
    if let Ok(rows) = serde_json::from_str::<Vec<GridSummaryRow>>(json) {
        return Ok(report::grid_markdown(&rows));
    }
    Err(report::audit_from_json(json).err().unwrap_or_else(|| {
        AuditError::InvalidArgument("not an audit report, policy or summary document".into())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_requires_one_source() {
        let both: RunConfig = serde_json::from_str(r#"{"input": "a.csv", "synth": "s.json"}"#).unwrap();
        assert!(both.validate().is_err());
        let neither: RunConfig = serde_json::from_str("{}").unwrap();
        assert!(neither.validate().is_err());
        let ok: RunConfig = serde_json::from_str(r#"{"synth": "s.json", "grid": "full"}"#).unwrap();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.formats.len(), 3);
    }

    #[test]
    fn custom_grid() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"input": "a.csv", "grid": {"cells": [["test-required", "gpa-test"]], "sensitives": ["race"]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.grid.resolve().unwrap().expand().len(), 1);
        let bad: RunConfig = serde_json::from_str(r#"{"input": "a.csv", "grid": "nine"}"#).unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["admit-audit", "audit", "--config", "c.json", "--format", "json,csv", "--seed", "4"]).unwrap();
        match cli.command {
            Command::Audit(a) => {
                assert_eq!(a.format, Some(vec![Format::Json, Format::Csv]));
                assert_eq!(a.seed, Some(4));
            }
            _ => panic!("wrong command"),
        }
    }
}
