//! Command-line surface: reproducible, scriptable runs over rank files.
//!
//! Every output starts with a run manifest (tool version, command,
//! flags, seed, input digests) so results can be traced back to their
//! inputs; nothing time-dependent is emitted, so identical commands
//! with identical seeds produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{error_report, winner_table, ErrorReport, WinnerTable};
use crate::mapping::{FitConfig, FitTrace, MappingSpec, MappingTable};
use crate::metrics::{
    expected_shr_curve, hr_curve, mix_seed, sample_all_ranks, shr_curve_monte_carlo,
    simulate_profile, MonteCarloConfig, SamplingScheme,
};
use crate::profile::{
    histogram, load_extended_rank_profile, load_rank_profile, load_sampled_ranks,
    read_catalog_sidecar, CatalogSpec, HitRatioCurve, RankProfile, SampledRankRecord,
};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hitsample",
    version,
    about = "Global and sampled top-k hit-ratio curves, aligned by mapping functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Global hit-ratio curve HR@K from a rank file
    Hr(HrArgs),
    /// Sampled hit-ratio curve SHR@k by seeded Monte Carlo
    Shr(ShrArgs),
    /// Exact expected sampled hit-ratio curve E[SHR@k]
    Eshr(EshrArgs),
    /// Evaluate a mapping function f(k) as a table
    Map(MapArgs),
    /// Fit the Beta shape parameter from sampled ranks
    Fit(FitArgs),
    /// Compare algorithms: winner table plus alignment errors
    Compare(CompareArgs),
    /// Generate a synthetic rank file from a Beta(a,1) rank model
    Simulate(SimulateArgs),
}

#[derive(clap::Args)]
struct HrArgs {
    /// Rank file (CSV: user_id,rank)
    #[arg(long)]
    ranks: PathBuf,
    /// Catalog size; falls back to a `<ranks>.json` sidecar
    #[arg(long = "N")]
    total_items: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    /// with replacement
    Binom,
    /// without replacement
    Hyper,
    /// without replacement over only irrelevant items
    Actual,
}

#[derive(clap::Args)]
struct ShrArgs {
    #[arg(long)]
    ranks: PathBuf,
    #[arg(long = "N")]
    total_items: Option<usize>,
    /// Sample-set size including the target item
    #[arg(long = "n")]
    sample_size: usize,
    #[arg(long, value_enum, default_value = "binom")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EshrArgs {
    #[arg(long)]
    ranks: PathBuf,
    #[arg(long = "N")]
    total_items: Option<usize>,
    #[arg(long = "n")]
    sample_size: usize,
    #[arg(long, value_enum, default_value = "binom")]
    scheme: SchemeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MapKind {
    Linear,
    Bound,
    Beta,
}

#[derive(clap::Args)]
struct MapArgs {
    /// Mapping family
    #[arg(long = "f", value_enum)]
    family: MapKind,
    /// Beta shape parameter (required for --f beta)
    #[arg(long)]
    a: Option<f64>,
    #[arg(long = "N")]
    total_items: usize,
    #[arg(long = "n")]
    sample_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct FitArgs {
    /// Sampled-rank file (CSV: user_id,rank with ranks in [1, n])
    #[arg(long)]
    sampled_ranks: PathBuf,
    #[arg(long = "N")]
    total_items: usize,
    #[arg(long = "n")]
    sample_size: usize,
    #[arg(long, default_value_t = 0.5)]
    init: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    /// One rank file per algorithm; labels are the file stems
    #[arg(long, num_args = 1.., required = true)]
    ranks: Vec<PathBuf>,
    #[arg(long = "N")]
    total_items: Option<usize>,
    #[arg(long = "n")]
    sample_size: usize,
    /// Cutoffs to report, comma-separated
    #[arg(long = "k", default_value = "1,2,5,10,20,50")]
    cutoffs: String,
    /// Mapping labels, comma-separated (linear, bound, beta@<a>, beta@P)
    #[arg(long = "f", default_value = "bound,beta@0.5")]
    mappings: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Beta shape parameter of the rank model
    #[arg(long)]
    a: f64,
    /// Number of users
    #[arg(long = "M")]
    users: usize,
    #[arg(long = "N")]
    total_items: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Clone)]
struct InputDigest {
    path: String,
    sha256: String,
}

/// Provenance block stamped into every output artifact.
#[derive(Serialize, Clone)]
pub struct RunManifest {
    tool: String,
    version: String,
    command: String,
    args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    inputs: Vec<InputDigest>,
}

impl RunManifest {
    fn new(command: &str, args: &[String], seed: Option<u64>) -> Self {
        RunManifest {
            tool: "hitsample".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args: args.to_vec(),
            seed,
            inputs: Vec::new(),
        }
    }

    fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    fn comment_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool: {} {}", self.tool, self.version);
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# args: {}", self.args.join(" "));
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        for input in &self.inputs {
            let _ = writeln!(s, "# input: {} sha256={}", input.path, input.sha256);
        }
        s
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_output(out: &Option<PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, contents)?,
        None => print!("{contents}"),
    }
    Ok(())
}

fn resolve_catalog_size(flag: Option<usize>, ranks: &Path) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    if let Some(n) = read_catalog_sidecar(ranks)? {
        return Ok(n);
    }
    Err(Error::Config(format!(
        "catalog size unknown: pass --N or provide a sidecar {}.json",
        ranks.display()
    )))
}

fn curve_csv(manifest: &RunManifest, curve: &HitRatioCurve, stderr: Option<&[f64]>) -> String {
    let mut s = manifest.comment_header();
    match stderr {
        Some(se) => {
            s.push_str("k,value,stderr\n");
            for (i, (v, e)) in curve.values().iter().zip(se).enumerate() {
                let _ = writeln!(s, "{},{},{}", i + 1, fmt_g17(*v), fmt_g17(*e));
            }
        }
        None => {
            s.push_str("k,value\n");
            for (i, v) in curve.values().iter().enumerate() {
                let _ = writeln!(s, "{},{}", i + 1, fmt_g17(*v));
            }
        }
    }
    s
}

fn mapping_csv(manifest: &RunManifest, table: &MappingTable) -> String {
    let mut s = manifest.comment_header();
    s.push_str("k,f_k\n");
    for (i, v) in table.values().iter().enumerate() {
        let _ = writeln!(s, "{},{}", i + 1, fmt_g17(*v));
    }
    s
}

fn scheme_for(
    arg: SchemeArg,
    ranks: &Path,
    total_items: usize,
) -> Result<(RankProfile, SamplingScheme)> {
    match arg {
        SchemeArg::Binom => Ok((
            load_rank_profile(ranks, total_items)?,
            SamplingScheme::WithReplacement,
        )),
        SchemeArg::Hyper => Ok((
            load_rank_profile(ranks, total_items)?,
            SamplingScheme::WithoutReplacement,
        )),
        SchemeArg::Actual => {
            let (profile, per_user_catalog) = load_extended_rank_profile(ranks, total_items)?;
            Ok((profile, SamplingScheme::IrrelevantOnly { per_user_catalog }))
        }
    }
}

fn cmd_hr(args: &HrArgs, raw: &[String]) -> Result<()> {
    let total = resolve_catalog_size(args.total_items, &args.ranks)?;
    let mut manifest = RunManifest::new("hr", raw, None);
    manifest.add_input(&args.ranks)?;
    let profile = load_rank_profile(&args.ranks, total)?;
    let curve = hr_curve(&profile);
    write_output(&args.out, &curve_csv(&manifest, &curve, None))
}

fn cmd_shr(args: &ShrArgs, raw: &[String]) -> Result<()> {
    let total = resolve_catalog_size(args.total_items, &args.ranks)?;
    let mut manifest = RunManifest::new("shr", raw, Some(args.seed));
    manifest.add_input(&args.ranks)?;
    let (profile, scheme) = scheme_for(args.scheme, &args.ranks, total)?;
    let catalog = CatalogSpec::new(total, args.sample_size)?;
    let cfg = MonteCarloConfig {
        seed: args.seed,
        runs: args.runs,
    };
    let mc = shr_curve_monte_carlo(&profile, &scheme, &catalog, &cfg)?;
    write_output(
        &args.out,
        &curve_csv(&manifest, &mc.mean, mc.stderr.as_deref()),
    )
}

fn cmd_eshr(args: &EshrArgs, raw: &[String]) -> Result<()> {
    let total = resolve_catalog_size(args.total_items, &args.ranks)?;
    let mut manifest = RunManifest::new("eshr", raw, None);
    manifest.add_input(&args.ranks)?;
    let (profile, scheme) = scheme_for(args.scheme, &args.ranks, total)?;
    let catalog = CatalogSpec::new(total, args.sample_size)?;
    let curve = expected_shr_curve(&histogram(&profile), &scheme, &catalog)?;
    write_output(&args.out, &curve_csv(&manifest, &curve, None))
}

fn cmd_map(args: &MapArgs, raw: &[String]) -> Result<()> {
    let manifest = RunManifest::new("map", raw, None);
    let catalog = CatalogSpec::new(args.total_items, args.sample_size)?;
    let spec = match args.family {
        MapKind::Linear => MappingSpec::Linear,
        MapKind::Bound => MappingSpec::Bound,
        MapKind::Beta => MappingSpec::BetaFixed {
            a: args.a.ok_or_else(|| {
                Error::Config("--f beta requires a shape via --a".into())
            })?,
        },
    };
    let (table, _) = spec.build(&catalog, None)?;
    write_output(&args.out, &mapping_csv(&manifest, &table))
}

#[derive(Serialize)]
struct FitOutput {
    manifest: RunManifest,
    iterates: Vec<f64>,
    converged: bool,
    final_a: f64,
}

fn cmd_fit(args: &FitArgs, raw: &[String]) -> Result<()> {
    let mut manifest = RunManifest::new("fit", raw, None);
    manifest.add_input(&args.sampled_ranks)?;
    let catalog = CatalogSpec::new(args.total_items, args.sample_size)?;
    let sampled = load_sampled_ranks(&args.sampled_ranks, args.sample_size)?;
    let cfg = FitConfig {
        init_a: args.init,
        tol: args.tol,
        max_iter: args.max_iter,
    };
    let trace = crate::mapping::fit_beta_param(&sampled, &catalog, &cfg)?;
    let output = FitOutput {
        manifest,
        iterates: trace.iterates,
        converged: trace.converged,
        final_a: trace.final_a,
    };
    let mut json = serde_json::to_string_pretty(&output).expect("fit output serializes");
    json.push('\n');
    write_output(&args.out, &json)
}

#[derive(Serialize)]
struct AlgorithmErrorReport {
    algorithm: String,
    mapping: String,
    report: ErrorReport,
}

#[derive(Serialize)]
struct MappingFit {
    mapping: String,
    fitted_on: String,
    trace: FitTrace,
}

#[derive(Serialize)]
struct CompareOutput {
    manifest: RunManifest,
    winners: WinnerTable,
    error_reports: Vec<AlgorithmErrorReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fits: Vec<MappingFit>,
}

fn parse_cutoffs(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|piece| {
            piece.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!("cannot parse cutoff `{piece}` in --k list"))
            })
        })
        .collect()
}

fn cmd_compare(args: &CompareArgs, raw: &[String]) -> Result<()> {
    let total = resolve_catalog_size(args.total_items, &args.ranks[0])?;
    let catalog = CatalogSpec::new(total, args.sample_size)?;
    let ks = parse_cutoffs(&args.cutoffs)?;
    let specs: Vec<MappingSpec> = args
        .mappings
        .split(',')
        .map(|label| MappingSpec::parse(label.trim()))
        .collect::<Result<_>>()?;

    let mut manifest = RunManifest::new("compare", raw, Some(args.seed));
    let mut labels: Vec<String> = Vec::with_capacity(args.ranks.len());
    for path in &args.ranks {
        manifest.add_input(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        if labels.contains(&label) {
            return Err(Error::Config(format!("duplicate algorithm label `{label}`")));
        }
        labels.push(label);
    }

    // One sampled curve per algorithm, each on its own derived seed.
    let sampling = SamplingScheme::WithReplacement;
    let mut curves = Vec::with_capacity(args.ranks.len());
    let mut profiles = Vec::with_capacity(args.ranks.len());
    for (i, path) in args.ranks.iter().enumerate() {
        let profile = load_rank_profile(path, total)?;
        let global = hr_curve(&profile);
        let cfg = MonteCarloConfig {
            seed: mix_seed(args.seed, i as u64),
            runs: args.runs,
        };
        let mc = shr_curve_monte_carlo(&profile, &sampling, &catalog, &cfg)?;
        curves.push((labels[i].clone(), global, mc.mean));
        profiles.push(profile);
    }

    // Fitted mappings share one shape fitted on the first algorithm's
    // sampled ranks (run 0 of its Monte Carlo seed), which keeps a
    // single table per mapping label across algorithms.
    let needs_fit = specs
        .iter()
        .any(|s| matches!(s, MappingSpec::BetaFitted { .. }));
    let fit_record: Option<SampledRankRecord> = if needs_fit {
        let rs = sample_all_ranks(
            &profiles[0],
            &sampling,
            &catalog,
            mix_seed(args.seed, 0),
            0,
        )?;
        Some(SampledRankRecord::new(rs, args.sample_size)?)
    } else {
        None
    };

    let mut tables: Vec<(String, MappingTable)> = Vec::with_capacity(specs.len());
    let mut fits = Vec::new();
    for spec in &specs {
        let label = spec.label();
        if tables.iter().any(|(l, _)| l == &label) {
            return Err(Error::Config(format!("duplicate mapping label `{label}`")));
        }
        let (table, trace) = spec.build(&catalog, fit_record.as_ref())?;
        if let Some(trace) = trace {
            fits.push(MappingFit {
                mapping: label.clone(),
                fitted_on: labels[0].clone(),
                trace,
            });
        }
        tables.push((label, table));
    }

    let winners = winner_table(&curves, &tables, &ks)?;
    let mut error_reports = Vec::new();
    for (label, global, sampled) in &curves {
        for (mapping, table) in &tables {
            error_reports.push(AlgorithmErrorReport {
                algorithm: label.clone(),
                mapping: mapping.clone(),
                report: error_report(global, sampled, table)?,
            });
        }
    }

    let output = CompareOutput {
        manifest,
        winners,
        error_reports,
        fits,
    };
    let mut json = serde_json::to_string_pretty(&output).expect("compare output serializes");
    json.push('\n');
    write_output(&args.out, &json)
}

fn cmd_simulate(args: &SimulateArgs, raw: &[String]) -> Result<()> {
    let manifest = RunManifest::new("simulate", raw, Some(args.seed));
    let profile = simulate_profile(args.a, args.users, args.total_items, args.seed)?;
    let mut s = manifest.comment_header();
    s.push_str("user_id,rank\n");
    for (i, r) in profile.ranks().iter().enumerate() {
        let _ = writeln!(s, "u{},{}", i + 1, r);
    }
    write_output(&args.out, &s)
}

/// Parses argv and runs the selected command, returning the process
/// exit code: 0 on success, 1 for computation-class failures, 2 for
/// usage and configuration problems.
pub fn main_entry() -> i32 {
    let raw: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version, 2 for usage errors
            e.exit();
        }
    };
    let tail = &raw[2.min(raw.len())..];
    let result = match &cli.command {
        Command::Hr(args) => cmd_hr(args, tail),
        Command::Shr(args) => cmd_shr(args, tail),
        Command::Eshr(args) => cmd_eshr(args, tail),
        Command::Map(args) => cmd_map(args, tail),
        Command::Fit(args) => cmd_fit(args, tail),
        Command::Compare(args) => cmd_compare(args, tail),
        Command::Simulate(args) => cmd_simulate(args, tail),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_significant_digits() {
        assert_eq!(fmt_g17(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(fmt_g17(19.0), "1.9000000000000000e1");
        let v = 0.12345678901234567;
        let round_trip: f64 = fmt_g17(v).parse().unwrap();
        assert_eq!(v, round_trip);
    }

    #[test]
    fn cutoff_parsing() {
        assert_eq!(parse_cutoffs("1,2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_cutoffs("1, 2, 5").unwrap(), vec![1, 2, 5]);
        assert!(parse_cutoffs("1,x").is_err());
    }

    #[test]
    fn manifest_header_shape() {
        let m = RunManifest::new("map", &["--f".into(), "bound".into()], Some(7));
        let header = m.comment_header();
        assert!(header.starts_with("# tool: hitsample "));
        assert!(header.contains("# command: map\n"));
        assert!(header.contains("# args: --f bound\n"));
        assert!(header.contains("# seed: 7\n"));
        assert!(header.lines().all(|l| l.starts_with('#')));
    }
}
