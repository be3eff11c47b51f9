use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dimer_cli::config::{parse_grid, CachePolicy, StateSelector};
use dimer_cli::{commands, parse_config, verify, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "dimer", version, about = "Floquet states and mean-field dynamics of the driven Bose-Hubbard dimer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Floquet state by simplicity label, or `top` / `bottom`.
    #[arg(long, global = true)]
    state: Option<StateSelector>,
    /// Husimi grid as `PxQ` (rows in p, columns in phi).
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// File of `p,phi` seed lines for the Poincare section.
    #[arg(long, global = true)]
    seeds: Option<PathBuf>,
    /// Map iterations per seed.
    #[arg(long, global = true)]
    iterations: Option<usize>,
    /// Highest quantum number attempted by `ebk`.
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include the N = 10000 regression in `verify` (hours).
    #[arg(long, global = true)]
    long: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Stroboscopic mean-field section.
    Poincare,
    /// Floquet spectrum and quasienergy table.
    Floquet,
    /// Degree of simplicity of every Floquet state.
    Eta,
    /// Husimi distribution of one Floquet state.
    Husimi,
    /// Periodic orbit of the stroboscopic map.
    Orbit,
    /// Semiclassical quantization of the island around the periodic orbit.
    Ebk,
    /// Acceptance suite.
    Verify,
}

impl Cli {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.state {
            cfg.quantum.state = s;
        }
        if let Some(g) = self.grid {
            cfg.output.husimi_grid = g;
        }
        if let Some(s) = &self.seeds {
            cfg.meanfield.seeds = Some(s.clone());
        }
        if let Some(k) = self.iterations {
            cfg.meanfield.iterations = k;
        }
        if let Some(k) = self.kmax {
            cfg.meanfield.kmax = k;
        }
        if let Some(d) = &self.cache_dir {
            cfg.output.cache_dir = Some(d.clone());
        }
        if self.no_cache {
            cfg.output.cache = CachePolicy::Off;
        }
        if let Some(d) = &self.out {
            cfg.output.dir = d.clone();
        }
    }

    fn load_config(&self) -> Result<RunConfig, CliError> {
        let path = self.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = parse_config(&text)?;
        self.apply(&mut cfg);
        // flags may have set values the file could not; re-validate
        Ok(parse_config(&cfg.render())?)
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    if cli.command == Command::Verify {
        let outcomes = verify::run_all(cli.long, |o| println!("{o}"));
        let failed = outcomes.iter().filter(|o| !o.passed).count();
        println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
        return Ok(failed == 0);
    }
    let cfg = cli.load_config()?;
    let files = match cli.command {
        Command::Poincare => commands::poincare(&cfg)?,
        Command::Floquet => commands::floquet(&cfg)?,
        Command::Eta => commands::eta(&cfg)?,
        Command::Husimi => commands::husimi_state(&cfg)?,
        Command::Orbit => commands::orbit(&cfg)?,
        Command::Ebk => commands::ebk(&cfg)?,
        Command::Verify => unreachable!(),
    };
    for f in files {
        println!("{}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
