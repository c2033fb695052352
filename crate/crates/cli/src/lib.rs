//! Batch front end for `wpset-core`: every operation as a subcommand writing
//! JSON or CSV artifacts plus a run manifest that can be replayed.

pub mod artifact;
mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod parse;
pub mod seqexpr;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::{invalid, CliError};
use crate::manifest::{sha256_hex, Run, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "wpset", version, about = "Sparse Fourier spectra, Riesz-type products and Wiener-Pitt set constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rudin-Shapiro pair P_n, Q_n with flatness checks.
    RudinShapiro(RudinShapiroArgs),
    /// Partial Riesz product prod (1 + a_k cos(n_k t)).
    Riesz(RieszArgs),
    /// Riesz-Rudin-Shapiro products and their singularity witnesses.
    #[command(subcommand)]
    Rrs(RrsCommand),
    /// Spectral idempotents and convolution-power bounds.
    #[command(subcommand)]
    Spectra(SpectraCommand),
    /// L1-minimal interpolation of 1 on a frequency set.
    Bpb(BpbArgs),
    /// ||f||_1 / ln #f over a polynomial family.
    Littlewood(LittlewoodArgs),
    /// The set U: build components, test membership.
    #[command(subcommand)]
    SetU(SetUCommand),
    /// Finite subset-sum approximation of a Cantor set with differences in given balls.
    Cantor(CantorArgs),
    /// Rerun a manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
enum RrsCommand {
    /// Materialize the partial product f_N.
    Build(RrsBuildArgs),
    /// Per-block witness norms against f_N.
    Witness(RrsWitnessArgs),
}

#[derive(Debug, Subcommand)]
enum SpectraCommand {
    /// Run one of the checks on a polynomial file.
    Check(SpectraCheckArgs),
}

#[derive(Debug, Subcommand)]
enum SetUCommand {
    Build(SetUBuildArgs),
    Member(SetUMemberArgs),
}

#[derive(Debug, Args)]
struct ManifestArg {
    /// Manifest path; defaults to `<output stem>.manifest.json` next to the output.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RudinShapiroArgs {
    #[arg(long)]
    pub level: u32,
    #[arg(long, default_value_t = 64)]
    pub oversample: usize,
    #[arg(long, default_value = "coeffs.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Debug, Args)]
pub struct RieszArgs {
    /// Amplitudes a_k, e.g. "1/k" or "0.5".
    #[arg(long, allow_hyphen_values = true)]
    pub a_spec: String,
    /// Integer frequencies n_k, e.g. "3^k".
    #[arg(long, default_value = "3^k")]
    pub n_spec: String,
    #[arg(long)]
    pub levels: usize,
    #[arg(long, default_value = "riesz.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpacingArg {
    Separated,
    Minimal,
}

#[derive(Debug, Args)]
pub struct RrsBuildArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eps_spec: String,
    /// Rudin-Shapiro levels n_k; derived from eps_k when omitted.
    #[arg(long)]
    pub n_spec: Option<String>,
    #[arg(long)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Separated)]
    pub spacing: SpacingArg,
    #[arg(long, default_value = "product.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WeightRuleArg {
    LeastSquares,
    Uniform,
}

#[derive(Debug, Args)]
pub struct RrsWitnessArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "0.3535*0.366^k")]
    pub eps_spec: String,
    /// Levels N of the product the witnesses are measured against.
    #[arg(long)]
    pub levels: usize,
    #[arg(long)]
    pub blocks: usize,
    #[arg(long, value_enum, default_value_t = WeightRuleArg::LeastSquares)]
    pub rule: WeightRuleArg,
    /// Least-squares rule: a block closes once its mass exceeds this times the previous one.
    #[arg(long, default_value_t = 1.0)]
    pub growth: f64,
    /// Skip the term-by-term mu sums for blocks with more frequencies than this.
    #[arg(long, default_value_t = 4096)]
    pub brute_max_support: usize,
    #[arg(long, default_value = "witness.csv")]
    pub report: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpectraMode {
    Power,
    Perturbed,
    Annihilate,
}

#[derive(Debug, Args)]
pub struct SpectraCheckArgs {
    /// JSON with a `coefficients` list of {n, re, im}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: SpectraMode,
    /// Power mode: largest convolution power.
    #[arg(long, default_value_t = 6)]
    pub m_max: u32,
    /// Perturbed mode: the value set, containing 0, e.g. "0,1,-0.5+1i".
    #[arg(long, value_parser = parse::complex_list, allow_hyphen_values = true)]
    pub lambda: Option<parse::ComplexList>,
    /// Perturbed mode: snapping distance.
    #[arg(long, default_value_t = 0.0)]
    pub snap_eps: f64,
    /// Perturbed mode: convolution power, larger than #lambda - 1.
    #[arg(long, default_value_t = 4)]
    pub k: u32,
    #[arg(long, default_value_t = 64)]
    pub oversample: usize,
    #[arg(long, default_value = "spectra.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Debug, Args)]
pub struct BpbArgs {
    #[arg(long, value_parser = parse::int_set_arg, allow_hyphen_values = true)]
    pub lambda: parse::IntSet,
    /// Candidate support, e.g. "-16..16".
    #[arg(long, value_parser = parse::int_set_arg, allow_hyphen_values = true)]
    pub support: parse::IntSet,
    /// Target: ||f||_1 <= 1 + eps.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value = "bpb.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Dirichlet,
    RudinShapiro,
}

#[derive(Debug, Args)]
pub struct LittlewoodArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Dirichlet)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 256)]
    pub min_n: u64,
    #[arg(long, default_value_t = 16384)]
    pub max_n: u64,
    #[arg(long, default_value_t = 64)]
    pub oversample: usize,
    #[arg(long, default_value = "ratios.csv")]
    pub csv: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Debug, Args)]
pub struct SetUBuildArgs {
    /// Number of components.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// TOML or JSON config; the WPSET_CONFIG environment variable overrides it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "setu.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Debug, Args)]
pub struct SetUMemberArgs {
    #[arg(long, value_parser = parse::complex, allow_hyphen_values = true)]
    pub z: Complex64,
    #[arg(long, default_value = "setu.json")]
    pub spec: PathBuf,
    #[arg(long, default_value = "member.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Debug, Args)]
pub struct CantorArgs {
    /// JSON `{"balls": [{"center": {"re", "im"}, "radius"}]}`; without it a
    /// geometric family `center = ratio^k e^{i angle}`, `radius = center^power` is used.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value_t = 2.0)]
    pub power: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub angle: f64,
    #[arg(long, default_value_t = 64)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value = "cantor.json")]
    pub out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write the rerun's outputs and manifest into this directory instead of the recorded paths.
    #[arg(long)]
    pub into: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match cli.command {
        Command::Replay(r) => replay(&r),
        command => dispatch(command, args, true).map(|_| ()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, args: Vec<String>, use_env: bool) -> Result<RunManifest, CliError> {
    let (name, manifest) = match &command {
        Command::RudinShapiro(a) => ("rudin-shapiro", &a.manifest),
        Command::Riesz(a) => ("riesz", &a.manifest),
        Command::Rrs(RrsCommand::Build(a)) => ("rrs build", &a.manifest),
        Command::Rrs(RrsCommand::Witness(a)) => ("rrs witness", &a.manifest),
        Command::Spectra(SpectraCommand::Check(a)) => ("spectra check", &a.manifest),
        Command::Bpb(a) => ("bpb", &a.manifest),
        Command::Littlewood(a) => ("littlewood", &a.manifest),
        Command::SetU(SetUCommand::Build(a)) => ("set-u build", &a.manifest),
        Command::SetU(SetUCommand::Member(a)) => ("set-u member", &a.manifest),
        Command::Cantor(a) => ("cantor", &a.manifest),
        Command::Replay(_) => return Err(CliError::Internal("nested replay".into())),
    };
    let manifest_path = manifest.manifest.clone();
    let mut run = Run::new(name, args);
    match &command {
        Command::RudinShapiro(a) => commands::rudin_shapiro(a, &mut run),
        Command::Riesz(a) => commands::riesz(a, &mut run),
        Command::Rrs(RrsCommand::Build(a)) => commands::rrs_build(a, &mut run),
        Command::Rrs(RrsCommand::Witness(a)) => commands::rrs_witness(a, &mut run),
        Command::Spectra(SpectraCommand::Check(a)) => commands::spectra_check(a, &mut run),
        Command::Bpb(a) => commands::bpb(a, &mut run),
        Command::Littlewood(a) => commands::littlewood(a, &mut run),
        Command::SetU(SetUCommand::Build(a)) => commands::set_u_build(a, &mut run, use_env),
        Command::SetU(SetUCommand::Member(a)) => commands::set_u_member(a, &mut run),
        Command::Cantor(a) => commands::cantor(a, &mut run),
        Command::Replay(_) => unreachable!(),
    }?;
    for o in run.outputs() {
        println!("wrote {}", o.path);
    }
    let (path, m) = run.finish(manifest_path)?;
    println!("wrote {}", path.display());
    Ok(m)
}

fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.manifest)
        .map_err(|e| invalid(format!("cannot read {}: {e}", args.manifest.display())))?;
    let recorded: RunManifest =
        serde_json::from_slice(&bytes).map_err(|e| invalid(format!("{}: {e}", args.manifest.display())))?;
    for input in &recorded.inputs {
        let now = std::fs::read(&input.path).map_err(|e| invalid(format!("input {} is gone: {e}", input.path)))?;
        if sha256_hex(&now) != input.sha256 {
            return Err(invalid(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let mut argv = recorded.args.clone();
    if let Some(dir) = &args.into {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
        for out in &recorded.outputs {
            let name = Path::new(&out.path).file_name().ok_or_else(|| invalid(format!("bad output path {}", out.path)))?;
            manifest::set_flag(&mut argv, &out.flag, &dir.join(name).display().to_string());
        }
        let name = args.manifest.file_name().map(PathBuf::from).unwrap_or_else(|| "manifest.json".into());
        manifest::set_flag(&mut argv, "--manifest", &dir.join(name).display().to_string());
    }
    let full: Vec<String> = std::iter::once("wpset".to_string()).chain(argv.iter().cloned()).collect();
    let cli = Cli::try_parse_from(&full).map_err(|e| invalid(format!("recorded arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(invalid("a manifest cannot replay a replay"));
    }
    let rerun = dispatch(cli.command, argv, false)?;
    let mut same = rerun.outputs.len() == recorded.outputs.len();
    for (old, new) in recorded.outputs.iter().zip(&rerun.outputs) {
        let ok = old.sha256 == new.sha256;
        println!("{} {} -> {}", if ok { "identical" } else { "DIFFERS" }, old.path, new.path);
        same &= ok;
    }
    if same {
        Ok(())
    } else {
        Err(invalid("replayed outputs differ from the manifest"))
    }
}
