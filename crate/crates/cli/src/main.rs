use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sel_cli::acceptance::{self, Selection, DEFAULT_SEED};
use sel_cli::commands::{self, Output};
use sel_cli::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sel", version, about = "Sofic and amenable entropy estimates for symbolic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate one entropy quantity.
    Estimate(Common),
    /// Expansiveness verdict with h-expansive evidence.
    Classify(Common),
    /// Sofic against amenable topological entropy.
    Compare(Common),
    /// Run the acceptance suite.
    Acceptance {
        /// `all`, a criterion number or name, or a property suite.
        #[arg(long, default_value = "all")]
        only: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Directory for report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the microstates of one space.
    DumpMicrostates {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in name or system JSON file.
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    quantity: Option<String>,
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    f_radii: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    folner: Vec<u64>,
    #[arg(long)]
    cover: Option<String>,
    #[arg(long)]
    given: Option<String>,
    #[arg(long)]
    family_radius: Option<u64>,
    #[arg(long)]
    v_radius: Option<u64>,
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    sep_eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and cells.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let set = |dst: &mut String, src: &Option<String>| {
            if let Some(s) = src {
                dst.clone_from(s);
            }
        };
        set(&mut c.system, &self.system);
        set(&mut c.quantity, &self.quantity);
        set(&mut c.cover, &self.cover);
        set(&mut c.given, &self.given);
        set(&mut c.measure, &self.measure);
        list(&mut c.d, &self.d);
        list(&mut c.f_radii, &self.f_radii);
        list(&mut c.folner, &self.folner);
        list(&mut c.delta, &self.delta);
        list(&mut c.eps, &self.eps);
        c.r = self.r.or(c.r);
        c.sep_eps = self.sep_eps.or(c.sep_eps);
        c.seed = self.seed.unwrap_or(c.seed);
        c.family_radius = self.family_radius.unwrap_or(c.family_radius);
        c.v_radius = self.v_radius.unwrap_or(c.v_radius);
        Ok(c)
    }
}

fn list<T: Clone>(dst: &mut Vec<T>, src: &[T]) {
    if !src.is_empty() {
        *dst = src.to_vec();
    }
}

fn emit(out: Output, dir: &Path) -> Result<i32, CliError> {
    out.write(dir)?;
    println!("{}", out.summary);
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Estimate(c) => emit(commands::estimate(&c.config()?)?, &c.out),
        Command::Classify(c) => emit(commands::classify_system(&c.config()?)?, &c.out),
        Command::Compare(c) => emit(commands::compare(&c.config()?)?, &c.out),
        Command::DumpMicrostates { common, limit } => {
            print!("{}", commands::dump_microstates(&common.config()?, limit)?);
            Ok(0)
        }
        Command::Acceptance { only, seed, out } => {
            let sel = Selection::parse(&only).ok_or_else(|| CliError::Config(format!("unknown suite {only:?}")))?;
            let report = acceptance::run(&sel, seed);
            print!("{}", report.table());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("report.json"), report.to_json())?;
            }
            Ok(if report.all_pass() { 0 } else { 1 })
        }
    }
}

fn threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SEL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Config(format!("SEL_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = threads().and_then(|_| run(cli)).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
