//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or validation
//! error. Every command is a pure function of its arguments, input files and
//! seed; the thread count only changes wall-clock time.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    self, DEFAULT_ENTROPY_BINS, EntropyPair, EntropyReport, IouItem, delta_entropy,
    expected_delta_entropy,
};
use crate::dataset::{Domain, ImageRecord, Manifest, load_manifest};
use crate::error::Error;
use crate::histogram::InverseMode;
use crate::raster::{Image, load_image, load_mask, save_image};
use crate::rhm::{
    AugmentConfig, AugmentDetail, AugmentMethod, SeedPolicy, TargetPool, augment_batch,
    build_target_pool, rhm_augment,
};
use crate::standardize::{gray_world, hist_equalize};
use crate::synthetic::{SyntheticConfig, write_dataset};

pub const THREADS_ENV: &str = "SPECTRAL_SHIFT_THREADS";
pub const AUDIT_LOG: &str = "audit.jsonl";

#[derive(Debug, Parser)]
#[command(name = "spectral-shift", version, about = "Randomized histogram matching and spectral augmentation")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment every source record and write `<id>.png` plus an audit log.
    Augment(AugmentArgs),
    /// Apply a per-image standardization to one or both domains.
    Standardize(StandardizeArgs),
    /// Report the entropy change between source images and augmented copies.
    Entropy(EntropyArgs),
    /// Score predicted masks against manifest labels.
    Iou(IouArgs),
    /// Invariance gap between two rewards.
    Gap(GapArgs),
    /// Match one source image against each of several target images.
    Demo(DemoArgs),
    /// Write a small synthetic two-domain dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub method: AugmentMethod,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub epoch: u32,
    #[arg(long, value_enum, default_value_t = InverseMode::Paper)]
    pub inverse: InverseMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StandardizeMethod {
    HistEq,
    GrayWorld,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Source,
    Target,
    Both,
}

#[derive(Debug, Args)]
pub struct StandardizeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub method: StandardizeMethod,
    #[arg(long, value_enum, default_value_t = Split::Both)]
    pub split: Split,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl ReportFormat {
    fn json(self) -> bool {
        matches!(self, ReportFormat::Json | ReportFormat::Both)
    }

    fn csv(self) -> bool {
        matches!(self, ReportFormat::Csv | ReportFormat::Both)
    }
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of `<id>.png` augmented images; repeat to compare methods.
    #[arg(long, required = true)]
    pub augmented: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
    pub format: ReportFormat,
    #[arg(long, default_value_t = DEFAULT_ENTROPY_BINS)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct IouArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of `<id>.png` predicted masks.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub r_star: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub r_zero: f64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long, required = true)]
    pub target: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = InverseMode::Paper)]
    pub inverse: InverseMode,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Images per domain.
    #[arg(long, default_value_t = 5)]
    pub per_domain: usize,
    #[arg(long, default_value_t = 64)]
    pub size: u32,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            // library errors already render their sources inline
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingPool(_)
            | Error::EmptyPool
            | Error::DuplicateId(_)
            | Error::EmptyManifest
            | Error::Parse { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments and runs a command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
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
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(Error::Report(format!("thread pool: {e}"))))?;
    pool.install(|| match &cli.command {
        Command::Augment(a) => cmd_augment(a),
        Command::Standardize(a) => cmd_standardize(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Iou(a) => cmd_iou(a),
        Command::Gap(a) => cmd_gap(a),
        Command::Demo(a) => cmd_demo(a),
        Command::Synth(a) => cmd_synth(a),
    })
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| {
        CliError::Runtime(Error::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| {
        CliError::Runtime(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

#[derive(Serialize)]
struct AuditLine<'a> {
    id: &'a str,
    seed: u64,
    epoch: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    inverse: Option<InverseMode>,
    #[serde(flatten)]
    detail: &'a AugmentDetail,
}

pub fn cmd_augment(args: &AugmentArgs) -> CliResult<()> {
    let manifest = load_manifest(&args.manifest)?;
    let pool = if args.method.needs_pool() {
        if manifest.records_in(Domain::Target).next().is_none() {
            return Err(CliError::Usage(format!(
                "method `{}` needs a target pool, but the manifest has no target records",
                args.method
            )));
        }
        Some(TargetPool::from_manifest(&manifest)?)
    } else {
        None
    };
    let cfg = AugmentConfig {
        method: args.method,
        pool: pool.as_ref(),
        policy: SeedPolicy::new(args.seed),
        epoch: args.epoch as u64,
        mode: args.inverse,
    };
    let sources = manifest.source_records();
    let outputs = augment_batch(&sources, &cfg)?;

    create_dir(&args.out)?;
    let mut audit = Vec::new();
    for a in &outputs {
        save_image(args.out.join(format!("{}.png", a.id)), &a.image)?;
        let line = AuditLine {
            id: &a.id,
            seed: a.seed,
            epoch: args.epoch,
            inverse: args.method.needs_pool().then_some(args.inverse),
            detail: &a.detail,
        };
        serde_json::to_writer(&mut audit, &line).map_err(|e| Error::Report(e.to_string()))?;
        audit.push(b'\n');
    }
    write_file(&args.out.join(AUDIT_LOG), &audit)?;
    log::info!("augmented {} images with {}", outputs.len(), args.method);
    Ok(())
}

fn collect_results<T>(results: Vec<crate::Result<T>>) -> CliResult<Vec<T>> {
    results
        .into_iter()
        .collect::<crate::Result<Vec<T>>>()
        .map_err(CliError::from)
}

pub fn cmd_standardize(args: &StandardizeArgs) -> CliResult<()> {
    use rayon::prelude::*;

    let manifest = load_manifest(&args.manifest)?;
    let records: Vec<&ImageRecord> = manifest
        .records
        .iter()
        .filter(|r| match args.split {
            Split::Source => r.domain == Domain::Source,
            Split::Target => r.domain == Domain::Target,
            Split::Both => true,
        })
        .collect();
    if records.is_empty() {
        return Err(CliError::Usage(format!(
            "no records in split {:?}",
            args.split
        )));
    }
    create_dir(&args.out)?;
    let method = args.method;
    let out_dir = &args.out;
    let results: Vec<crate::Result<()>> = records
        .par_iter()
        .map(|r| {
            let img = r.load_image()?;
            let out = match method {
                StandardizeMethod::HistEq => hist_equalize(&img),
                StandardizeMethod::GrayWorld => {
                    let g = gray_world(&img);
                    if !g.skipped_channels.is_empty() {
                        log::warn!("{}: zero-mean channels {:?} left unchanged", r.id, g.skipped_channels);
                    }
                    g.image
                }
            };
            save_image(out_dir.join(format!("{}.png", r.id)), &out)
                .map_err(|e| Error::for_record(&r.id, e))
        })
        .collect();
    collect_results(results)?;
    Ok(())
}

fn label_for(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .filter(|n| !n.is_empty())
        .unwrap_or_else(|| "augmented".to_string())
}

#[derive(Serialize)]
struct ComparisonRow {
    label: String,
    pairs: usize,
    mean_delta_h: f64,
}

fn entropy_report_for(
    sources: &[(String, Image)],
    dir: &Path,
    bins: usize,
) -> CliResult<EntropyReport> {
    use rayon::prelude::*;

    for (id, _) in sources {
        let p = dir.join(format!("{id}.png"));
        if !p.exists() {
            return Err(CliError::Runtime(Error::for_record(id, Error::NotFound(p))));
        }
    }
    let loaded: Vec<crate::Result<Image>> = sources
        .par_iter()
        .map(|(id, _)| load_image(dir.join(format!("{id}.png"))).map_err(|e| Error::for_record(id, e)))
        .collect();
    let augmented = collect_results(loaded)?;
    let pairs: Vec<EntropyPair<'_>> = sources
        .iter()
        .zip(&augmented)
        .map(|((id, src), aug)| EntropyPair {
            id,
            source: src,
            augmented: aug,
        })
        .collect();
    Ok(expected_delta_entropy(&pairs, bins)?)
}

pub fn cmd_entropy(args: &EntropyArgs) -> CliResult<()> {
    use rayon::prelude::*;

    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let manifest = load_manifest(&args.manifest)?;
    let labels: Vec<String> = args.augmented.iter().map(|d| label_for(d)).collect();
    if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
        return Err(CliError::Usage(
            "augmented directories must have distinct names".into(),
        ));
    }
    let sources = manifest.source_records();
    if sources.is_empty() {
        return Err(CliError::Usage("manifest has no source records".into()));
    }
    let loaded: Vec<crate::Result<(String, Image)>> = sources
        .par_iter()
        .map(|r| Ok((r.id.clone(), r.load_image()?)))
        .collect();
    let sources = collect_results(loaded)?;

    create_dir(&args.out)?;
    let mut rows = Vec::new();
    for (dir, label) in args.augmented.iter().zip(&labels) {
        let report = entropy_report_for(&sources, dir, args.bins)?;
        if args.format.json() {
            report.write_json(&args.out.join(format!("{label}.entropy.json")))?;
        }
        if args.format.csv() {
            report.write_csv(&args.out.join(format!("{label}.entropy.csv")))?;
            report.write_histogram_csv(&args.out.join(format!("{label}.entropy-hist.csv")))?;
        }
        rows.push(ComparisonRow {
            label: label.clone(),
            pairs: report.per_pair.len(),
            mean_delta_h: report.mean_delta_h,
        });
    }
    if rows.len() > 1 {
        if args.format.json() {
            analysis::write_json(&args.out.join("comparison.json"), &rows)?;
        }
        if args.format.csv() {
            let path = args.out.join("comparison.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Report(e.to_string()))?;
            for r in &rows {
                w.serialize(r).map_err(|e| Error::Report(e.to_string()))?;
            }
            w.flush().map_err(|source| Error::Io { path, source })?;
        }
    }
    Ok(())
}

pub fn cmd_iou(args: &IouArgs) -> CliResult<()> {
    use rayon::prelude::*;

    let manifest = load_manifest(&args.manifest)?;
    let labeled: Vec<&ImageRecord> = manifest
        .records
        .iter()
        .filter(|r| r.label_path.is_some())
        .collect();
    if labeled.is_empty() {
        return Err(CliError::Usage("manifest has no labeled records".into()));
    }
    for r in &labeled {
        let p = args.pred.join(format!("{}.png", r.id));
        if !p.exists() {
            return Err(CliError::Runtime(Error::for_record(&r.id, Error::NotFound(p))));
        }
    }
    let loaded: Vec<crate::Result<_>> = labeled
        .par_iter()
        .map(|r| {
            let truth = r.load_label()?.expect("filtered to labeled records");
            let pred = load_mask(args.pred.join(format!("{}.png", r.id)))
                .map_err(|e| Error::for_record(&r.id, e))?;
            Ok((pred, truth))
        })
        .collect();
    let masks = collect_results(loaded)?;
    let items: Vec<IouItem<'_>> = labeled
        .iter()
        .zip(&masks)
        .map(|(r, (pred, truth))| IouItem {
            id: &r.id,
            group: &r.group,
            pred,
            truth,
        })
        .collect();
    let report = analysis::aggregate_iou(&items).map_err(CliError::Runtime)?;
    create_dir(&args.out)?;
    if args.format.json() {
        report.write_json(&args.out.join("iou.json"))?;
    }
    if args.format.csv() {
        report.write_csv(&args.out.join("iou.csv"))?;
    }
    Ok(())
}

pub fn cmd_gap(args: &GapArgs) -> CliResult<()> {
    let report = analysis::invariance_gap(args.r_star, args.r_zero)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let json = serde_json::to_string(&report).map_err(|e| Error::Report(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{json}");
    Ok(())
}

#[derive(Serialize)]
struct DemoRow {
    target: String,
    output: String,
    delta_h: f64,
}

pub fn cmd_demo(args: &DemoArgs) -> CliResult<()> {
    let source = load_image(&args.source)?;
    create_dir(&args.out)?;
    save_image(args.out.join("source.png"), &source)?;
    let mut rows = Vec::new();
    for (k, path) in args.target.iter().enumerate() {
        let target = load_image(path)?;
        let id = path.display().to_string();
        let pool = build_target_pool([(id.as_str(), &target)])?;
        let (matched, _) = rhm_augment(&source, &pool, 0, args.inverse);
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("target{k}"));
        let name = format!("matched_{k:02}_{stem}.png");
        save_image(args.out.join(&name), &matched)?;
        save_image(args.out.join(format!("target_{k:02}_{stem}.png")), &target)?;
        rows.push(DemoRow {
            target: id,
            output: name,
            delta_h: delta_entropy(&source, &matched)?,
        });
    }
    analysis::write_json(&args.out.join("demo.json"), &rows)?;
    for r in &rows {
        println!("{}\t{}\tdelta_h={:.4}", r.output, r.target, r.delta_h);
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    if args.per_domain == 0 || args.size < 8 {
        return Err(CliError::Usage(
            "--per-domain must be positive and --size at least 8".into(),
        ));
    }
    let cfg = SyntheticConfig {
        width: args.size,
        height: args.size,
        per_domain: args.per_domain,
        seed: args.seed,
    };
    let manifest: Manifest = write_dataset(&cfg, &args.out)?;
    println!(
        "wrote {} records to {}",
        manifest.records.len(),
        args.out.join("manifest.json").display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_method_is_a_usage_error() {
        let code = run(["spectral-shift", "augment", "--manifest", "m.json", "--method", "blur", "--out", "o"]);
        assert_eq!(code, 2);
        let code = run(["spectral-shift", "standardize", "--manifest", "m.json", "--method", "retinex", "--out", "o"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn missing_manifest_is_a_runtime_error() {
        let code = run(["spectral-shift", "augment", "--manifest", "/nonexistent/m.json", "--method", "none", "--out", "/tmp/x"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn gap_accepts_negative_rewards() {
        assert_eq!(run(["spectral-shift", "gap", "--r-star", "-0.5", "--r-zero", "0.2"]), 0);
    }
}
