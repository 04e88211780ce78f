mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kcsm_core::models::{BoundaryChoice, ModelDescriptor};

use commands::{CheckFailed, Run};
use config::{parse_sizes, parse_values, ExperimentConfig, StartKind};

#[derive(Parser)]
#[command(name = "kcsm", version, about = "Kinetically constrained spin models: spectra, simulation, bootstrap")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact spectral gap over a grid of sizes and densities.
    Gap(Common),
    /// Persistence curves from equilibrium, next to the gap bound.
    Persistence(Common),
    /// Emptying frequencies of the bootstrap closure and a q_bp estimate.
    BootstrapScan(Common),
    /// Mean time until the origin's constraint is first satisfied.
    Hitting {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        start: Option<StartKind>,
        /// Censoring cap on each run.
        #[arg(long)]
        t_cap: Option<f64>,
    },
    /// Gaps of the interacting generator for random or given interactions.
    GibbsGap {
        #[command(flatten)]
        common: Common,
        /// Interaction file; replaces the random draws.
        #[arg(long)]
        interaction: Option<PathBuf>,
        /// Interaction norms, as a list or `a..b:step`.
        #[arg(long)]
        norm: Option<String>,
        #[arg(long)]
        range: Option<usize>,
        /// Random interactions per norm.
        #[arg(long)]
        count: Option<usize>,
        /// Constant boundary condition on the collar.
        #[arg(long)]
        tau: Option<u8>,
    },
    /// Runs the inequality suite on random small graphs.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        graphs: Option<usize>,
        #[arg(long)]
        max_vertices: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog model name.
    #[arg(long)]
    model: Option<String>,
    /// Sizes: `n`, `a..b` or `a,b,c`.
    #[arg(long)]
    n: Option<String>,
    /// Densities: a list or `a..b:step`.
    #[arg(long)]
    q: Option<String>,
    /// Facilitation threshold for FA-jf.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, value_parser = ["minimal", "maximal", "none"])]
    boundary: Option<String>,
    /// Edge-list file for graph models.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    root: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_points: Option<usize>,
    /// Relative eigensolver tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// CSV output file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(self, name: &str) -> Result<Run> {
        let (mut cfg, base_dir) = match &self.config {
            Some(path) => {
                let cfg = ExperimentConfig::load(path)?;
                (cfg, path.parent().map(|p| p.to_path_buf()))
            }
            None => (ExperimentConfig::default(), None),
        };
        match &cfg.command {
            Some(c) if c != name => bail!("config is for `{c}`, not `{name}`"),
            _ => cfg.command = Some(name.to_string()),
        }
        if let Some(m) = &self.model {
            if cfg.model.as_ref().is_none_or(|d| &d.name != m) {
                cfg.model = Some(ModelDescriptor::named(m, 0.5));
            }
        }
        let touches_model = self.j.is_some() || self.boundary.is_some() || self.graph.is_some() || self.root.is_some();
        if touches_model {
            let Some(d) = cfg.model.as_mut() else { bail!("`--j`, `--boundary`, `--graph` and `--root` need a model") };
            if self.j.is_some() {
                d.j = self.j;
            }
            if let Some(b) = &self.boundary {
                d.boundary = match b.as_str() {
                    "maximal" => BoundaryChoice::Maximal,
                    "none" => BoundaryChoice::None,
                    _ => BoundaryChoice::Minimal,
                };
            }
            if let Some(g) = &self.graph {
                // flag paths are relative to the working directory
                d.graph = Some(std::path::absolute(g)?);
                d.edges = None;
            }
            if self.root.is_some() {
                d.root = self.root;
            }
        }
        if let Some(n) = &self.n {
            cfg.grid.n = parse_sizes(n)?;
        }
        if let Some(q) = &self.q {
            cfg.grid.q = parse_values(q)?;
        }
        let s = &mut cfg.sampling;
        s.samples = self.samples.or(s.samples);
        s.seed = self.seed.or(s.seed);
        s.t_max = self.t_max.or(s.t_max);
        s.t_points = self.t_points.or(s.t_points);
        cfg.solver.tolerance = self.tolerance.or(cfg.solver.tolerance);
        cfg.output.csv = self.out.or(cfg.output.csv);
        Ok(Run { cfg, base_dir })
    }
}

fn build_run(command: Command) -> Result<Run> {
    let run = match command {
        Command::Gap(c) => c.apply("gap")?,
        Command::Persistence(c) => c.apply("persistence")?,
        Command::BootstrapScan(c) => c.apply("bootstrap-scan")?,
        Command::Hitting { common, start, t_cap } => {
            let mut run = common.apply("hitting")?;
            let h = &mut run.cfg.hitting;
            h.start = start.or(h.start);
            h.t_cap = t_cap.or(h.t_cap);
            run
        }
        Command::GibbsGap { common, interaction, norm, range, count, tau } => {
            let mut run = common.apply("gibbs-gap")?;
            let g = &mut run.cfg.gibbs;
            if let Some(path) = interaction {
                g.interaction = Some(std::path::absolute(path)?);
            }
            if let Some(norm) = norm {
                g.norms = parse_values(&norm)?;
            }
            g.range = range.or(g.range);
            g.count = count.or(g.count);
            g.tau = tau.or(g.tau);
            run
        }
        Command::Check { common, graphs, max_vertices } => {
            let mut run = common.apply("check")?;
            let c = &mut run.cfg.check;
            c.graphs = graphs.or(c.graphs);
            c.max_vertices = max_vertices.or(c.max_vertices);
            run
        }
    };
    run.cfg.validate()?;
    Ok(run)
}

fn init_workers() -> Result<()> {
    let Ok(value) = std::env::var("KCSM_WORKERS") else { return Ok(()) };
    let n: usize = value.trim().parse().ok().filter(|&n| n > 0).with_context(|| {
        format!("KCSM_WORKERS must be a positive integer, got `{value}`")
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<CheckFailed>().is_some() {
        1
    } else if let Some(kcsm_core::Error::NoConvergence { .. }) = e.downcast_ref::<kcsm_core::Error>() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_workers().and_then(|_| build_run(cli.command)).and_then(|run| commands::dispatch(&run));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kcsm: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
