//! Inequality checks drawn from the theory, evaluated exactly or by
//! simulation on small instances. `run_suite` runs the default collection.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bootstrap::closure;
use crate::dynamics::{hitting_time, persistence, HittingSamples, Start};
use crate::error::{Error, Result};
use crate::gibbs::{build_interacting_generator, dlr_residual, model_volume, BoundaryCondition, Interaction};
use crate::models::{east, fa, fa1f_graph, north_east, tree_east, ModelSpec, SpinConfig};
use crate::spectra::{
    build_generator, chain_gap, dense_eigenvalues, dirichlet_eigenvalue, dirichlet_form, ergodic_components,
    gap_plus, plus_probability, solver_failure, variance, Generator, SolverOptions,
};
use crate::topology::{spanning_tree, Graph, Rectangle, RootedTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs ≤ rhs + tolerance`.
    AtMost,
    /// `lhs ≥ rhs − tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: &'static str,
    pub case: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl CheckRow {
    pub fn new(check: &'static str, case: impl Into<String>, lhs: f64, relation: Relation, rhs: f64, tolerance: f64) -> Self {
        let holds = match relation {
            Relation::AtMost => lhs <= rhs + tolerance,
            Relation::AtLeast => lhs >= rhs - tolerance,
        };
        CheckRow { check, case: case.into(), lhs, relation, rhs, tolerance, holds }
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        write!(
            f,
            "{:<4} {:<22} {:<34} {:.6e} {rel} {:.6e} (tol {:.0e})",
            if self.holds { "PASS" } else { "FAIL" },
            self.check,
            self.case,
            self.lhs,
            self.rhs,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random graphs for the graph checks.
    pub graphs: usize,
    /// Vertex count range of the random graphs.
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub q: f64,
    pub persistence_samples: usize,
    pub hitting_samples: usize,
    pub solver: SolverOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 1,
            graphs: 6,
            min_vertices: 4,
            max_vertices: 8,
            q: 0.5,
            persistence_samples: 4000,
            hitting_samples: 500,
            solver: SolverOptions::default(),
        }
    }
}

fn gap_of(gen: &Generator, opts: &SolverOptions) -> Result<f64> {
    let r = chain_gap(gen, opts)?;
    solver_failure(&r)?;
    Ok(r.gap)
}

fn model_gap_checked(model: &ModelSpec, opts: &SolverOptions) -> Result<f64> {
    gap_of(&build_generator(model)?, opts)
}

/// Row sums, detailed balance and `𝓓(f)/Var(f) ≥ gap` for `functions`
/// random test functions, with `𝓓` evaluated from the constraints.
pub fn generator_checks(model: &ModelSpec, functions: usize, seed: u64, opts: &SolverOptions) -> Result<Vec<CheckRow>> {
    let gen = build_generator(model)?;
    let case = format!("{} n={} q={}", model.name(), model.len(), model.q());
    let gap = gap_of(&gen, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratio = f64::INFINITY;
    for _ in 0..functions {
        let f: Vec<f64> = (0..gen.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let var = variance(gen.measure(), &f, None);
        if var > 0.0 {
            ratio = ratio.min(dirichlet_form(model, gen.space(), &f) / var);
        }
    }
    Ok(vec![
        CheckRow::new("row-sums", case.clone(), gen.max_row_sum(), Relation::AtMost, 0.0, 1e-12),
        CheckRow::new("detailed-balance", case.clone(), gen.detailed_balance_residual(), Relation::AtMost, 0.0, 1e-12),
        CheckRow::new("variational", case, ratio, Relation::AtLeast, gap, 1e-8),
    ])
}

/// Number of eigenvalues of `−𝓛` within `10⁻⁹ ‖𝓛‖` of zero, from a dense
/// solve of the full symmetrized generator.
pub fn dense_zero_multiplicity(gen: &Generator) -> usize {
    let all: Vec<u32> = (0..gen.dim() as u32).collect();
    let h = gen.symmetrized(&all);
    let scale = h.norm_bound().max(1.0);
    dense_eigenvalues(&h).iter().filter(|v| v.abs() <= 1e-9 * scale).count()
}

pub fn ergodicity_check(model: &ModelSpec) -> Result<CheckRow> {
    let gen = build_generator(model)?;
    let comps = ergodic_components(&gen).count();
    let zeros = dense_zero_multiplicity(&gen);
    let case = format!("{} n={}", model.name(), model.len());
    let mut row = CheckRow::new("ergodic-components", case, zeros as f64, Relation::AtMost, comps as f64, 0.0);
    row.holds = zeros == comps;
    Ok(row)
}

/// `λ_A ≥ q·gap` for `A = {η_origin = 0}`.
pub fn dirichlet_check(model: &ModelSpec, opts: &SolverOptions) -> Result<CheckRow> {
    let gen = build_generator(model)?;
    let gap = gap_of(&gen, opts)?;
    let origin = model.origin();
    let space = gen.space();
    let lambda = dirichlet_eigenvalue(&gen, |i| space.site_state(i, origin) == 0, opts)?;
    if !lambda.converged {
        return Err(Error::NoConvergence { iterations: 0, residual: lambda.residual });
    }
    Ok(CheckRow::new(
        "dirichlet",
        format!("{} n={} q={}", model.name(), model.len(), model.q()),
        lambda.value,
        Relation::AtLeast,
        model.q() * gap,
        1e-9,
    ))
}

/// Seeded connected random graph with a vertex count in
/// `min_vertices..=max_vertices` and a random root.
pub fn random_graph(min_vertices: usize, max_vertices: usize, seed: u64) -> Result<(Graph, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(min_vertices..=max_vertices);
    let p = rng.random_range(0.15..0.6);
    let g = Graph::erdos_renyi_connected(n, p, &mut rng)?;
    let root = rng.random_range(0..n);
    Ok((g, root))
}

/// Split of a tree into `A = Γ_v ∪ T_a` and `B = T ∖ T_a`, where `v` is the
/// root when it has at least two children and otherwise the first vertex of
/// degree at least three below it, and `a` is the first child of `v`.
/// `None` for a path rooted at an end.
pub fn branch_split(tree: &RootedTree) -> Option<(Vec<usize>, Vec<usize>)> {
    let r = tree.root();
    let mut path = vec![r];
    let mut v = r;
    loop {
        let children = tree.children(v);
        let degree = children.len() + usize::from(v != r);
        if (v == r && degree >= 2) || (v != r && degree >= 3) {
            break;
        }
        match children.first() {
            Some(&c) => {
                v = c;
                path.push(c);
            }
            None => return None,
        }
    }
    let a = tree.children(v)[0];
    let mut subtree = vec![a];
    let mut i = 0;
    while i < subtree.len() {
        subtree.extend(tree.children(subtree[i]));
        i += 1;
    }
    let mut set_a: Vec<usize> = path.into_iter().chain(subtree.iter().copied()).collect();
    set_a.sort_unstable();
    let set_b: Vec<usize> = (0..tree.len()).filter(|x| !subtree.contains(x)).collect();
    Some((set_a, set_b))
}

/// The subtree induced on `vertices`, relabeled in increasing order.
pub fn induced_tree(tree: &RootedTree, vertices: &[usize]) -> Result<RootedTree> {
    let index = |x: usize| vertices.iter().position(|&y| y == x);
    let root = index(tree.root()).ok_or_else(|| Error::Precondition("subtree misses the root".into()))?;
    let parent = vertices
        .iter()
        .map(|&x| match tree.parent(x) {
            None => Ok(None),
            Some(p) => index(p)
                .map(Some)
                .ok_or_else(|| Error::Precondition(format!("vertex {x} is cut off from its parent"))),
        })
        .collect::<Result<Vec<_>>>()?;
    RootedTree::from_parents(root, parent)
}

fn east_on_tree(tree: &RootedTree, q: f64) -> Result<ModelSpec> {
    tree_east(tree.tree(), tree, q)
}

/// The graph inequalities for FA-1f on `g` with root `root`:
/// domination by East on a breadth-first spanning tree, the comparison with
/// the East interval of the same size, the tree-splitting bound and the
/// bound on `Ω⁺`.
pub fn graph_checks(g: &Graph, root: usize, q: f64, opts: &SolverOptions) -> Result<Vec<CheckRow>> {
    let n = g.len();
    let case = format!("n={n} m={} r={root} q={q}", g.edges().count());
    let fa1f = fa1f_graph(g, Some(root), q)?;
    let tree = spanning_tree(g, root)?;
    let tree_model = tree_east(g, &tree, q)?;
    let mut rows = Vec::new();

    let dominated = crate::models::dominates(&fa1f, &tree_model)?;
    rows.push(CheckRow::new("dominance", case.clone(), f64::from(u8::from(dominated)), Relation::AtLeast, 1.0, 0.0));
    let gap_fa = model_gap_checked(&fa1f, opts)?;
    let gap_tree = model_gap_checked(&tree_model, opts)?;
    rows.push(CheckRow::new("domination-gap", case.clone(), gap_tree, Relation::AtMost, gap_fa, 1e-9));

    let gap_east = model_gap_checked(&east(n, q)?, opts)?;
    rows.push(CheckRow::new("fa1f-vs-east", case.clone(), gap_fa, Relation::AtLeast, gap_east, 1e-9));
    rows.push(CheckRow::new("tree-east-vs-east", case.clone(), gap_tree, Relation::AtLeast, gap_east, 1e-9));

    if let Some((a, b)) = branch_split(&tree) {
        let gap_a = model_gap_checked(&east_on_tree(&induced_tree(&tree, &a)?, q)?, opts)?;
        let gap_b = model_gap_checked(&east_on_tree(&induced_tree(&tree, &b)?, q)?, opts)?;
        rows.push(CheckRow::new("tree-split", case.clone(), gap_tree, Relation::AtLeast, gap_a.min(gap_b), 1e-9));
    }

    let free = fa1f_graph(g, None, q)?;
    let plus = gap_plus(&free, opts)?;
    solver_failure(&plus)?;
    let bound = 0.5 * gap_east * plus_probability(&free);
    rows.push(CheckRow::new("omega-plus", case, plus.gap, Relation::AtLeast, bound, 1e-9));
    Ok(rows)
}

/// `gap(East_n) ≤ gap(East_{n−1})` for `n = 2..=n_max`.
pub fn east_monotonicity(q: f64, n_max: usize, opts: &SolverOptions) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut previous = model_gap_checked(&east(1, q)?, opts)?;
    for n in 2..=n_max {
        let gap = model_gap_checked(&east(n, q)?, opts)?;
        rows.push(CheckRow::new("east-monotone", format!("n={n} q={q}"), gap, Relation::AtMost, previous, 1e-9));
        previous = gap;
    }
    Ok(rows)
}

/// Time grid `0, Δ, …` up to `horizon` with `points` entries.
pub fn time_grid(horizon: f64, points: usize) -> Vec<f64> {
    let steps = points.saturating_sub(1).max(1);
    (0..points).map(|k| horizon * k as f64 / steps as f64).collect()
}

/// `F̂(t) − 3·stderr ≤ e^{−q·gap·t} + e^{−p·gap·t}` at the grid point where
/// the margin is smallest.
pub fn persistence_check(model: &ModelSpec, samples: usize, seed: u64, opts: &SolverOptions) -> Result<CheckRow> {
    let gap = model_gap_checked(model, opts)?;
    let (q, p) = (model.q(), 1.0 - model.q());
    let grid = time_grid(4.0 / (q.min(p) * gap), 41);
    let curve = persistence(model, &grid, samples, seed)?;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for (k, &t) in grid.iter().enumerate() {
        let bound = (-q * gap * t).exp() + (-p * gap * t).exp();
        let lower = curve.f[k] - 3.0 * curve.stderr[k];
        if lower - bound > worst.0 {
            worst = (lower - bound, lower, bound, t);
        }
    }
    Ok(CheckRow::new(
        "persistence-bound",
        format!("{} n={} q={q} t={:.3}", model.name(), model.len(), worst.3),
        worst.1,
        Relation::AtMost,
        worst.2,
        0.0,
    ))
}

/// East on `[0, ⌈1/q⌉]` with the last site free.
pub fn hitting_interval(q: f64) -> Result<ModelSpec> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParams(format!("q = {q} must lie in (0, 1]")));
    }
    east((1.0 / q).ceil() as usize + 1, q)
}

/// Time for the origin of an East interval to become unconstrained, from
/// the all-occupied configuration.
pub fn east_origin_unlock(model: &ModelSpec, samples: usize, seed: u64) -> Result<HittingSamples> {
    let start = Start::Fixed(SpinConfig::ones(model.len()));
    let origin = model.origin();
    hitting_time(model, &start, |c| model.constraint(c, origin), samples, seed, None)
}

/// `Ê(T) + 3·stderr ≥ e^{−1}/gap` on [`hitting_interval`].
pub fn hitting_check(q: f64, samples: usize, seed: u64, opts: &SolverOptions) -> Result<CheckRow> {
    let model = hitting_interval(q)?;
    let gap = model_gap_checked(&model, opts)?;
    let t = east_origin_unlock(&model, samples, seed)?;
    Ok(CheckRow::new(
        "hitting-lower",
        format!("east n={} q={q} censored={}", model.len(), t.censored_count()),
        t.mean() + 3.0 * t.stderr(),
        Relation::AtLeast,
        (-1.0f64).exp() / gap,
        0.0,
    ))
}

/// Number of configurations with a vacancy that the FA-1f closure on `g`
/// fails to empty, over all `2^n − 1` of them.
pub fn fa1f_closure_failures(g: &Graph) -> Result<usize> {
    let model = fa1f_graph(g, None, 0.5)?;
    model.require_exact_size("exhaustive closure check")?;
    let n = g.len();
    let full = (1u64 << n) - 1;
    let mut failures = 0;
    for bits in 0..full {
        if !closure(&model, &SpinConfig::from_bits(n, bits))?.is_all_zero() {
            failures += 1;
        }
    }
    Ok(failures)
}

/// DLR residual on a `2×3` volume, the `Φ = 0` generator comparison and the
/// interacting North-East gap at `q = 0.9`.
pub fn gibbs_checks(seed: u64, opts: &SolverOptions) -> Result<Vec<CheckRow>> {
    let rect = Rectangle::with_sides(&[2, 3])?;
    let ne = north_east(&rect, 0.9)?;
    let vol = model_volume(&ne)?;
    let nu = ne.measure().clone();
    let phi = Interaction::random(&vol, 2, 0.2, seed)?;
    let tau = BoundaryCondition::constant(&vol, 2, 1);
    let dlr = [vec![0], vec![2, 3], vec![1, 4, 5]]
        .iter()
        .map(|v| dlr_residual(&phi, &vol, &tau, &nu, v))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut rows = vec![CheckRow::new("dlr", "2x3 r=2 M=0.2", dlr, Relation::AtMost, 0.0, 1e-12)];

    let plain = build_generator(&ne)?;
    let zero = build_interacting_generator(&ne, &Interaction::zero(2), &tau)?;
    rows.push(CheckRow::new("gibbs-zero", "north-east 2x3", max_entry_difference(&plain, &zero), Relation::AtMost, 0.0, 1e-12));

    let interacting = build_interacting_generator(&ne, &phi, &tau)?;
    let gap = gap_of(&interacting, opts)?;
    rows.push(CheckRow::new("gibbs-gap", "north-east 2x3 q=0.9 M=0.2", gap, Relation::AtLeast, 1e-6, 0.0));
    Ok(rows)
}

/// `max |𝓛₁(i,j) − 𝓛₂(i,j)|` over all entries.
pub fn max_entry_difference(a: &Generator, b: &Generator) -> f64 {
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..a.dim() {
        worst = worst.max((a.diagonal(i) - b.diagonal(i)).abs());
        for (j, r) in a.row(i) {
            worst = worst.max((r - b.rate(i, j)).abs());
        }
        for (j, r) in b.row(i) {
            worst = worst.max((r - a.rate(i, j)).abs());
        }
    }
    worst
}

/// The default suite at `opts`' sizes.
pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<CheckRow>> {
    let solver = &opts.solver;
    let q = opts.q;
    let mut rows = Vec::new();
    let square = Rectangle::with_sides(&[3, 3])?;
    let small = [
        east(8, q)?,
        fa(1, &Rectangle::with_sides(&[8])?, q)?,
        fa(2, &square, q)?.with_maximal_boundary(),
        north_east(&square, q)?,
    ];
    for (k, m) in small.iter().enumerate() {
        rows.extend(generator_checks(m, 20, opts.seed.wrapping_add(k as u64), solver)?);
        rows.push(ergodicity_check(m)?);
    }
    // reducible: no boundary help and no free vertex
    rows.push(ergodicity_check(&fa(2, &square, q)?.with_good_boundary(&[])?)?);
    rows.push(ergodicity_check(&fa1f_graph(&Graph::path(6)?, None, q)?)?);

    for m in [east(8, q)?, fa(1, &Rectangle::with_sides(&[8])?, q)?] {
        rows.push(dirichlet_check(&m, solver)?);
    }
    for k in 0..opts.graphs {
        let (g, root) = random_graph(opts.min_vertices, opts.max_vertices, opts.seed.wrapping_add(1000 + k as u64))?;
        rows.extend(graph_checks(&g, root, q, solver)?);
        let failures = fa1f_closure_failures(&g)?;
        rows.push(CheckRow::new("fa1f-closure", format!("n={}", g.len()), failures as f64, Relation::AtMost, 0.0, 0.0));
    }
    rows.extend(east_monotonicity(q, 10, solver)?);
    rows.push(persistence_check(&east(6, q)?, opts.persistence_samples, opts.seed, solver)?);
    rows.push(hitting_check(q, opts.hitting_samples, opts.seed, solver)?);
    rows.extend(gibbs_checks(opts.seed, solver)?);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_of_a_spider() {
        // root 0 - 1, then 1 branches into 2 and 3, and 3 - 4
        let t = RootedTree::from_parents(0, vec![None, Some(0), Some(1), Some(1), Some(3)]).unwrap();
        let (a, b) = branch_split(&t).unwrap();
        assert_eq!(a, vec![0, 1, 2]);
        assert_eq!(b, vec![0, 1, 3, 4]);
        let sub = induced_tree(&t, &b).unwrap();
        assert_eq!(sub.parents(), &[None, Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn paths_do_not_split() {
        let t = RootedTree::from_parents(0, vec![None, Some(0), Some(1)]).unwrap();
        assert!(branch_split(&t).is_none());
        let star = RootedTree::from_parents(0, vec![None, Some(0), Some(0)]).unwrap();
        assert_eq!(branch_split(&star).unwrap(), (vec![0, 1], vec![0, 2]));
    }

    #[test]
    fn check_rows_compare_with_tolerance() {
        assert!(CheckRow::new("x", "", 1.0, Relation::AtMost, 1.0 - 1e-10, 1e-9).holds);
        assert!(!CheckRow::new("x", "", 1.0, Relation::AtLeast, 1.1, 1e-9).holds);
    }

    #[test]
    fn hitting_interval_sizes() {
        assert_eq!(hitting_interval(0.3).unwrap().len(), 5);
        assert_eq!(hitting_interval(0.5).unwrap().len(), 3);
    }

    #[test]
    fn graph_checks_on_a_small_graph() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
        let rows = graph_checks(&g, 0, 0.5, &SolverOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.holds), "{rows:#?}");
        assert_eq!(rows.len(), 6);
    }
}
