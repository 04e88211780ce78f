//! One function per subcommand, each producing a table.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kcsm_core::bootstrap::estimate_qbp;
use kcsm_core::dynamics::{hitting_time, persistence, Start};
use kcsm_core::gibbs::{build_interacting_generator, model_volume, BoundaryCondition, Interaction};
use kcsm_core::models::ModelDescriptor;
use kcsm_core::spectra::{chain_gap, model_gap, solver_failure, Method, SpectralReport};
use kcsm_core::suite::{self, run_suite, Relation, SuiteOptions};
use kcsm_core::{ModelSpec, SpinConfig};

use crate::config::{size_of, with_size, ExperimentConfig, StartKind};
use crate::output::{emit, num, render, Table};

/// Raised when the check suite finds a violated inequality.
#[derive(Debug)]
pub struct CheckFailed {
    pub failed: usize,
    pub total: usize,
}

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} checks failed", self.failed, self.total)
    }
}

impl std::error::Error for CheckFailed {}

pub struct Run {
    pub cfg: ExperimentConfig,
    /// Directory that relative paths in the config are resolved against.
    pub base_dir: Option<PathBuf>,
}

impl Run {
    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn build(&self, desc: &ModelDescriptor) -> Result<ModelSpec> {
        desc.build(self.base_dir.as_deref())
            .with_context(|| format!("building model `{}`", desc.name))
    }

    /// Descriptors for every `(n, q)` of the grid, sizes outermost.
    fn points(&self) -> Result<Vec<ModelDescriptor>> {
        let base = self.cfg.model()?;
        let sizes: Vec<Option<usize>> =
            if self.cfg.grid.n.is_empty() { vec![None] } else { self.cfg.grid.n.iter().map(|&n| Some(n)).collect() };
        let qs = if self.cfg.grid.q.is_empty() { vec![base.q] } else { self.cfg.grid.q.clone() };
        let mut out = Vec::new();
        for n in &sizes {
            for &q in &qs {
                let mut d = match n {
                    Some(n) => with_size(base, *n),
                    None => base.clone(),
                };
                d.q = q;
                out.push(d);
            }
        }
        Ok(out)
    }
}

fn size_label(desc: &ModelDescriptor, model: &ModelSpec) -> String {
    size_of(desc).unwrap_or(model.len()).to_string()
}

fn method_label(r: &SpectralReport) -> &'static str {
    match r.method {
        Some(Method::Dense) => "dense",
        Some(Method::Lanczos) => "lanczos",
        None => "none",
    }
}

fn checked_gap(model: &ModelSpec, run: &Run) -> Result<SpectralReport> {
    let r = model_gap(model, &run.cfg.solver.options())?;
    solver_failure(&r).with_context(|| format!("spectral gap of {} (q = {})", model.name(), model.q()))?;
    Ok(r)
}

pub fn gap(run: &Run) -> Result<Table> {
    let mut t = Table::new(&[
        "model", "n", "q", "gap", "relaxation_time", "residual", "components", "dimension", "method", "iterations",
    ]);
    for d in run.points()? {
        let m = run.build(&d)?;
        let r = checked_gap(&m, run)?;
        t.push(vec![
            m.name().to_string(),
            size_label(&d, &m),
            num(d.q),
            num(r.gap),
            num(r.relaxation_time),
            num(r.residual),
            r.zero_multiplicity.to_string(),
            r.dimension.to_string(),
            method_label(&r).to_string(),
            r.iterations.to_string(),
        ]);
    }
    Ok(t)
}

pub fn persistence_curves(run: &Run) -> Result<Table> {
    let seed = run.cfg.seed()?;
    let samples = run.cfg.sampling.samples.unwrap_or(10_000);
    let points = run.cfg.sampling.t_points.unwrap_or(41);
    let mut t = Table::new(&["model", "n", "q", "samples", "t", "F_hat", "stderr", "F0_hat", "F1_hat", "bound", "gap"]);
    for d in run.points()? {
        let m = run.build(&d)?;
        let g = checked_gap(&m, run)?.gap;
        let (q, p) = (m.q(), 1.0 - m.q());
        let horizon = match run.cfg.sampling.t_max {
            Some(h) => h,
            None if g > 0.0 && q > 0.0 && p > 0.0 => 4.0 / (q.min(p) * g),
            None => bail!("cannot choose a time horizon for gap {g} and q {q}; give `--t-max`"),
        };
        let grid = suite::time_grid(horizon, points);
        let curve = persistence(&m, &grid, samples, seed)?;
        for (i, &time) in grid.iter().enumerate() {
            let bound = (-q * g * time).exp() + (-p * g * time).exp();
            t.push(vec![
                m.name().to_string(),
                size_label(&d, &m),
                num(q),
                curve.samples.to_string(),
                num(time),
                num(curve.f[i]),
                num(curve.stderr[i]),
                num(curve.f0[i]),
                num(curve.f1[i]),
                num(bound),
                num(g),
            ]);
        }
    }
    Ok(t)
}

pub fn bootstrap_scan(run: &Run) -> Result<Table> {
    let seed = run.cfg.seed()?;
    let base = run.cfg.model()?;
    let sizes = if run.cfg.grid.n.is_empty() {
        vec![size_of(base).ok_or_else(|| anyhow::anyhow!("no sizes: give `--n` or `grid.n`"))?]
    } else {
        run.cfg.grid.n.clone()
    };
    if run.cfg.grid.q.is_empty() {
        bail!("bootstrap-scan needs a q grid: give `--q a..b:step` or `grid.q`");
    }
    let samples = run.cfg.sampling.samples.unwrap_or(1000);
    let family = |s: usize| with_size(base, s).build(run.base_dir.as_deref());
    let est = estimate_qbp(family, &sizes, &run.cfg.grid.q, samples, seed)?;
    let mut t = Table::new(&["size", "q", "samples", "emptied", "emptied_fraction", "stderr"]);
    for r in &est.rows {
        t.push(vec![
            r.size.to_string(),
            num(r.q),
            r.samples.to_string(),
            r.emptied.to_string(),
            num(r.fraction()),
            num(r.stderr()),
        ]);
    }
    t.notes.push(format!(
        "q_bp estimate {} interval [{}, {}] at size {} (bracketed: {})",
        num(est.q_bp),
        num(est.lo),
        num(est.hi),
        sizes.iter().max().unwrap(),
        est.bracketed
    ));
    Ok(t)
}

pub fn hitting(run: &Run) -> Result<Table> {
    let seed = run.cfg.seed()?;
    let samples = run.cfg.sampling.samples.unwrap_or(1000);
    let start_kind = run.cfg.hitting.start.unwrap_or_default();
    let mut t = Table::new(&[
        "model", "n", "q", "start", "samples", "mean", "stderr", "censored", "t_cap", "gap", "lower_bound",
        "upper_scale",
    ]);
    let models: Vec<(String, ModelSpec)> = match &run.cfg.model {
        Some(_) => run
            .points()?
            .iter()
            .map(|d| run.build(d).map(|m| (size_label(d, &m), m)))
            .collect::<Result<_>>()?,
        None => {
            let qs = if run.cfg.grid.q.is_empty() { vec![0.3, 0.5] } else { run.cfg.grid.q.clone() };
            qs.iter()
                .map(|&q| suite::hitting_interval(q).map(|m| (m.len().to_string(), m.with_name("east-interval"))))
                .collect::<kcsm_core::Result<_>>()?
        }
    };
    for (size, m) in models {
        let g = checked_gap(&m, run)?.gap;
        let start = match start_kind {
            StartKind::Ones => Start::Fixed(SpinConfig::ones(m.len())),
            StartKind::Equilibrium => Start::Equilibrium,
        };
        let origin = m.origin();
        let s = hitting_time(&m, &start, |c| m.constraint(c, origin), samples, seed, run.cfg.hitting.t_cap)?;
        if !s.reliable() {
            eprintln!("warning: {} of {samples} samples hit the cap at q = {}", s.censored_count(), m.q());
        }
        t.push(vec![
            m.name().to_string(),
            size,
            num(m.q()),
            format!("{start_kind:?}").to_lowercase(),
            samples.to_string(),
            num(s.mean()),
            num(s.stderr()),
            s.censored_count().to_string(),
            num(s.t_cap),
            num(g),
            num((-1.0f64).exp() / g),
            num(1.0 / (m.q() * g)),
        ]);
    }
    Ok(t)
}

pub fn gibbs_gap(run: &Run) -> Result<Table> {
    let g = &run.cfg.gibbs;
    let tau_value = g.tau.unwrap_or(1);
    let fixed = match &g.interaction {
        Some(path) => {
            let full = run.resolve(path);
            let text = std::fs::read_to_string(&full).with_context(|| format!("reading {}", full.display()))?;
            Some(Interaction::parse(&text).with_context(|| format!("in interaction file {}", full.display()))?)
        }
        None => None,
    };
    let seed = if fixed.is_none() { run.cfg.seed()? } else { 0 };
    let norms = if g.norms.is_empty() { vec![0.0, 0.05, 0.1] } else { g.norms.clone() };
    let count = g.count.unwrap_or(5);
    let range = g.range.unwrap_or(2);
    let mut t = Table::new(&["model", "n", "q", "norm", "index", "gap", "residual", "components"]);
    for d in run.points()? {
        let m = run.build(&d)?;
        let vol = model_volume(&m)?;
        let draws: Vec<(usize, Interaction)> = match &fixed {
            Some(phi) => vec![(0, phi.clone())],
            None => {
                let mut v = Vec::new();
                for &norm in &norms {
                    // every draw is the zero interaction at norm 0
                    let draws = if norm == 0.0 { count.min(1) } else { count };
                    for k in 0..draws {
                        // the same draw at every norm, rescaled
                        v.push((k, Interaction::random(&vol, range, norm, seed.wrapping_add(k as u64))?));
                    }
                }
                v
            }
        };
        for (k, phi) in draws {
            let tau = BoundaryCondition::constant(&vol, phi.range(), tau_value);
            let gen = build_interacting_generator(&m, &phi, &tau)?;
            let r = chain_gap(&gen, &run.cfg.solver.options())?;
            solver_failure(&r).with_context(|| format!("interacting gap of {} (q = {})", m.name(), m.q()))?;
            t.push(vec![
                m.name().to_string(),
                size_label(&d, &m),
                num(m.q()),
                num(phi.norm()),
                k.to_string(),
                num(r.gap),
                num(r.residual),
                r.zero_multiplicity.to_string(),
            ]);
        }
    }
    Ok(t)
}

/// Runs the suite, prints the pass/fail table and writes the CSV only when
/// an output file is configured.
pub fn check(run: &Run) -> Result<()> {
    let c = &run.cfg.check;
    let d = SuiteOptions::default();
    let opts = SuiteOptions {
        seed: run.cfg.seed()?,
        graphs: c.graphs.unwrap_or(d.graphs),
        min_vertices: c.min_vertices.unwrap_or(d.min_vertices),
        max_vertices: c.max_vertices.unwrap_or(d.max_vertices),
        q: run.cfg.grid.q.first().copied().unwrap_or(d.q),
        persistence_samples: c.persistence_samples.unwrap_or(d.persistence_samples),
        hitting_samples: c.hitting_samples.unwrap_or(d.hitting_samples),
        solver: run.cfg.solver.options(),
    };
    if opts.min_vertices < 2 || opts.min_vertices > opts.max_vertices {
        bail!("vertex range {}..={} is empty or too small", opts.min_vertices, opts.max_vertices);
    }
    let rows = run_suite(&opts)?;
    let mut t = Table::new(&["check", "case", "lhs", "relation", "rhs", "tolerance", "holds"]);
    for r in &rows {
        println!("{r}");
        t.push(vec![
            r.check.to_string(),
            r.case.clone(),
            num(r.lhs),
            match r.relation {
                Relation::AtMost => "<=".into(),
                Relation::AtLeast => ">=".into(),
            },
            num(r.rhs),
            num(r.tolerance),
            r.holds.to_string(),
        ]);
    }
    let failed = rows.iter().filter(|r| !r.holds).count();
    println!("{} of {} checks passed", rows.len() - failed, rows.len());
    if let Some(path) = &run.cfg.output.csv {
        std::fs::write(path, render(&run.cfg, &t)?).with_context(|| format!("writing {}", path.display()))?;
    }
    if failed > 0 {
        return Err(CheckFailed { failed, total: rows.len() }.into());
    }
    Ok(())
}

pub fn dispatch(run: &Run) -> Result<()> {
    let table = match run.cfg.command.as_deref() {
        Some("gap") => gap(run)?,
        Some("persistence") => persistence_curves(run)?,
        Some("bootstrap-scan") => bootstrap_scan(run)?,
        Some("hitting") => hitting(run)?,
        Some("gibbs-gap") => gibbs_gap(run)?,
        Some("check") => return check(run),
        other => bail!("unknown subcommand {other:?}"),
    };
    emit(&run.cfg, &table)
}
