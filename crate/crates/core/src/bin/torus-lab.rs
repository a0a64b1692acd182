use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use torus_lab::harness::{preset, run_task, ExperimentConfig, ExperimentKind, ResultRecord, RunOptions, Task, PRESETS};

#[derive(Parser)]
#[command(name = "torus-lab", version, about = "Quantised torus maps: spectra, Egorov defects and ergodicity rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the propagator and quantise the observables; report unitarity and trace checks.
    Quantize(Common),
    /// Diagonalise the propagator and write eigenphases with residuals.
    Spectrum(Common),
    /// Eigenfunction variance S2(N) over the N-list.
    Variance(Common),
    /// Egorov defect growth and quantum/classical autocorrelations.
    Egorov(Common),
    /// Windowed classical correlation sums over the window scales.
    Classical(Common),
    /// Off-diagonal window sums at the configured shift.
    Offdiag(Common),
    /// Run whatever experiment kind the config names.
    Sweep(Common),
    /// Check the windowed variance inequality; fails on any violation.
    Audit(Common),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Replace the N-list (repeatable).
    #[arg(long = "N", value_name = "N")]
    n: Vec<usize>,
    /// Output directory (results go to <out>/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long)]
    no_cache: bool,
    /// Worker threads for per-N tasks (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => bail!(torus_lab::Error::Config("either --config or --preset is required".into())),
        };
        if !self.n.is_empty() {
            let mut n = self.n.clone();
            n.sort_unstable();
            n.dedup();
            cfg.n_list = n;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if self.no_cache {
            cfg.cache.enabled = false;
        }
        Ok(cfg)
    }
}

fn report(rec: &ResultRecord) {
    println!("{} ({}) config {}", rec.name, rec.task.as_str(), &rec.config_hash[..16]);
    for d in &rec.diagnostics {
        let mut line = format!("  N = {:>5}  unitarity {:.1e}", d.n, d.unitarity_defect);
        if let Some(r) = d.max_residual {
            line += &format!("  residual {r:.1e}  clusters {}", d.n_clusters.unwrap_or(0));
        }
        if d.eigensystem_cached || d.propagator_cached {
            line += "  (cached)";
        }
        println!("{line}");
    }
    for f in &rec.fits {
        let at = f.n.map(|n| format!(" N = {n}")).unwrap_or_default();
        match f.rate {
            Some(r) => println!(
                "  fit {} {}{at}: {} rate {r:.4}, constant {:.4e}, residual {:.2e}",
                f.observable, f.quantity, f.model, f.constant, f.residual
            ),
            None => println!("  fit {} {}{at}: {} constant {:.4e}, residual {:.2e}", f.observable, f.quantity, f.model, f.constant, f.residual),
        }
    }
    if !rec.files.is_empty() {
        println!("  wrote {} files to {} in {:.1}s", rec.files.len(), rec.out_dir.display(), rec.wall_clock);
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (task, common) = match &cli.command {
        Command::Presets => {
            for (name, _) in PRESETS {
                let cfg = preset(name)?;
                println!("{name:<34} {}", cfg.kind.as_str());
            }
            return Ok(());
        }
        Command::Quantize(c) => (Some(Task::Quantize), c),
        Command::Spectrum(c) => (Some(Task::Spectrum), c),
        Command::Variance(c) => (Some(Task::Experiment(ExperimentKind::VarianceSweep)), c),
        Command::Egorov(c) => (Some(Task::Experiment(ExperimentKind::EgorovGrowth)), c),
        Command::Classical(c) => (Some(Task::Experiment(ExperimentKind::ClassicalRate)), c),
        Command::Offdiag(c) => (Some(Task::Experiment(ExperimentKind::Offdiagonal)), c),
        Command::Audit(c) => (Some(Task::Experiment(ExperimentKind::InequalityAudit)), c),
        Command::Sweep(c) => (None, c),
    };
    let mut cfg = common.load()?;
    let task = match task {
        Some(Task::Experiment(kind)) => {
            cfg.kind = kind;
            Task::Experiment(kind)
        }
        Some(t) => t,
        None => Task::Experiment(cfg.kind),
    };
    let rec = run_task(&cfg, task, &RunOptions { jobs: common.jobs, dry_run: false })
        .with_context(|| format!("{} failed for '{}'", task.as_str(), cfg.name))?;
    report(&rec);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.chain().find_map(|c| c.downcast_ref::<torus_lab::Error>()).map_or(1, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
