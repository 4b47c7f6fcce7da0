use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use witnesskit::closest::closest_ppt;
use witnesskit::densop::{ComplexMatrix, DensityOperator, MatrixJson};
use witnesskit::incremental::{make_plan, run_exact, run_sampled, OrderPolicy, RunVerdict, ShotModel};
use witnesskit::states::FamilySpec;
use witnesskit::sweep::{
    detect, quadratic_for, resolve_reference, run_sweep, write_sweep_csv, Mode, Reference, ScanRange,
};
use witnesskit::tomo::{state_to_tensor, Convention};
use witnesskit::witness::{SeeSawConfig, Verdict};

/// Entanglement witnesses and quadratic identifiers from correlation tensors.
///
/// States are given either as a matrix JSON file (`{"dims", "re", "im"}`) or as
/// a family such as `family:werner?p=0.5`. Tolerances can be overridden with
/// the WITNESSKIT_TOL environment variable.
#[derive(Parser)]
#[command(name = "witnesskit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the density matrix of a state as JSON.
    Export(Common),
    /// Write the correlation tensor as CSV (`mu_1,...,mu_N,value`).
    Tomography {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ConventionArg::Raw)]
        convention: ConventionArg,
    },
    /// Project a state onto the PPT set by clipping its partial transpose.
    ClosestPpt {
        #[command(flatten)]
        common: Common,
        /// Party whose partial transpose is clipped; defaults to the last one.
        #[arg(long)]
        party: Option<usize>,
    },
    /// Build an identifier against a reference state and evaluate it.
    #[command(visible_alias = "witness")]
    Detect(DetectArgs),
    /// Detection along a one-parameter family, as CSV `param,value,bound,detected`.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "quadratic")]
        mode: Mode,
        /// Grid as `name=lo:hi:n`.
        #[arg(long)]
        scan: ScanRange,
    },
}

#[derive(Args)]
struct Common {
    /// Matrix JSON file, or `family:...`.
    #[arg(long)]
    state: Option<String>,
    /// State family, e.g. `family:colored?p=0.66`.
    #[arg(long, conflicts_with = "state")]
    family: Option<FamilySpec>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    common: Common,
    /// Reference state: matrix JSON file, `family:...`, `closest-ppt` or `auto`.
    #[arg(long, default_value = "auto")]
    rho0: String,
    #[arg(long, default_value = "quadratic")]
    mode: Mode,
    /// Measure settings one at a time and write the step log as CSV.
    #[arg(long)]
    incremental: bool,
    /// Simulated shots per setting; exact expectation values when absent.
    #[arg(long, requires = "incremental")]
    shots: Option<u64>,
    /// Standard errors subtracted from each estimate.
    #[arg(long, default_value_t = 3.0)]
    z: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exit with status 2 when the verdict is not Entangled.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Raw,
    Scaled,
}

impl Common {
    fn source(&self) -> Result<(DensityOperator, Option<FamilySpec>)> {
        match (&self.state, &self.family) {
            (_, Some(f)) => Ok((f.state()?, Some(f.clone()))),
            (Some(s), None) => load_state(s),
            (None, None) => bail!("give --state or --family"),
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
        }
    }

    fn json(&self, value: &impl serde::Serialize) -> Result<String> {
        let mut s = if self.pretty { serde_json::to_string_pretty(value)? } else { serde_json::to_string(value)? };
        s.push('\n');
        Ok(s)
    }
}

fn load_state(s: &str) -> Result<(DensityOperator, Option<FamilySpec>)> {
    if s.starts_with("family:") {
        let f: FamilySpec = s.parse()?;
        return Ok((f.state()?, Some(f)));
    }
    let text = fs::read_to_string(s).with_context(|| format!("reading {s}"))?;
    Ok((DensityOperator::from_json_str(&text).with_context(|| format!("parsing {s}"))?, None))
}

fn load_matrix(s: &str) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(s).with_context(|| format!("reading {s}"))?;
    MatrixJson::parse(&text).and_then(|m| m.to_matrix()).with_context(|| format!("parsing {s}"))
}

fn reference(arg: &str) -> Result<Reference> {
    Ok(match arg {
        "auto" => Reference::Auto,
        "closest-ppt" => Reference::ClosestPpt,
        s if s.starts_with("family:") => Reference::Family(s.parse()?),
        path => Reference::Matrix(load_matrix(path)?),
    })
}

fn run_detect(args: &DetectArgs) -> Result<ExitCode> {
    let (rho, family) = args.common.source()?;
    let cfg = SeeSawConfig::default();
    let reference = reference(&args.rho0)?;
    let entangled = if args.incremental {
        if args.mode != Mode::Quadratic {
            bail!("--incremental works with --mode quadratic");
        }
        let resolved = resolve_reference(&rho, family.as_ref(), &reference)?;
        let q = quadratic_for(&rho, &resolved, &cfg)?;
        let plan = make_plan(&q, &OrderPolicy::DescendingWeight);
        let run = match args.shots {
            Some(n) => run_sampled(&plan, &rho, &ShotModel::new(n, args.seed, args.z)?)?,
            None => run_exact(&plan, &rho)?,
        };
        let mut buf = Vec::new();
        run.write_csv(&mut buf)?;
        args.common.emit(&String::from_utf8(buf)?)?;
        run.verdict == RunVerdict::Entangled
    } else {
        let report = detect(&rho, family.as_ref(), &reference, args.mode, &cfg)?;
        args.common.emit(&(report.to_json(args.common.pretty) + "\n"))?;
        report.verdict == Verdict::Entangled
    };
    Ok(if args.strict && !entangled { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Export(common) => {
            let (rho, _) = common.source()?;
            common.emit(&common.json(&rho.to_json())?)?;
        }
        Command::Tomography { common, convention } => {
            let (rho, _) = common.source()?;
            let convention = match convention {
                ConventionArg::Raw => Convention::RawMoment,
                ConventionArg::Scaled => Convention::QuditScaled,
            };
            let t = state_to_tensor(&rho, convention)?;
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            common.emit(&String::from_utf8(buf)?)?;
        }
        Command::ClosestPpt { common, party } => {
            let (rho, _) = common.source()?;
            let party = party.unwrap_or(rho.parties() - 1);
            let r = closest_ppt(&rho, party)?;
            common.emit(&common.json(&r.to_json())?)?;
        }
        Command::Detect(args) => return run_detect(&args),
        Command::Scan { common, mode, scan } => {
            let Some(family) = &common.family else { bail!("scan needs --family") };
            let rows = run_sweep(family, &scan, mode, &SeeSawConfig::default())?;
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            common.emit(&String::from_utf8(buf)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // clap reports usage errors with status 2, which is reserved for --strict
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
