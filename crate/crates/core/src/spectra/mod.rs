//! Exact finite-volume spectra of the constrained generator.
//!
//! Configurations are enumerated as integers: site `x` is digit `x` in base
//! `|S|`, so for 0-1 models the index is the bit pattern of the
//! configuration. The generator is self-adjoint in `L²(μ)`; every solver
//! works with the flat-symmetric `H = −D^{1/2} 𝓛 D^{−1/2}`, `D = diag μ`,
//! whose off-diagonal entries are `−√(𝓛(η,η′) 𝓛(η′,η))`.

mod eigen;

pub use eigen::{dense_eigenvalues, lowest, lowest_dense, lowest_lanczos, EigenPair, Method, SolverOptions, SymCsr};

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{dominates, GeneralConfig, ModelSpec};

/// Hard cap on the number of enumerated configurations.
pub const STATE_CAP: usize = 1 << 24;

/// Enumeration of `Ω = S^V` with product weights.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    sites: usize,
    states: usize,
    weights: Vec<f64>,
}

impl StateSpace {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        model.require_exact_size("exact state space")?;
        let nu = model.measure();
        if !nu.is_nondegenerate() {
            return Err(Error::InvalidMeasure("exact spectra need ν(s) > 0 for every state".into()));
        }
        let k = nu.num_states();
        let size = checked_size(k, model.len())?;
        let weights: Vec<f64> = (0..size)
            .into_par_iter()
            .map(|i| {
                let mut w = 1.0;
                let mut rest = i;
                for _ in 0..model.len() {
                    w *= nu.prob((rest % k) as u8);
                    rest /= k;
                }
                w
            })
            .collect();
        Ok(StateSpace { sites: model.len(), states: k, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn states_per_site(&self) -> usize {
        self.states
    }

    /// `μ(η)` for every index.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn decode(&self, index: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.sites);
        let mut rest = index;
        for _ in 0..self.sites {
            out.push((rest % self.states) as u8);
            rest /= self.states;
        }
        out
    }

    pub fn encode(&self, states: &[u8]) -> usize {
        states.iter().rev().fold(0, |acc, &s| acc * self.states + s as usize)
    }

    /// `k^x`.
    pub fn stride(&self, x: usize) -> usize {
        self.states.pow(x as u32)
    }

    pub fn site_state(&self, index: usize, x: usize) -> u8 {
        ((index / self.stride(x)) % self.states) as u8
    }
}

fn checked_size(k: usize, n: usize) -> Result<usize> {
    let mut size: usize = 1;
    for _ in 0..n {
        size = size.checked_mul(k).filter(|&s| s <= STATE_CAP).ok_or(Error::CapExceeded {
            what: "configurations",
            got: usize::MAX,
            cap: STATE_CAP,
        })?;
    }
    Ok(size)
}

/// Sparse generator: off-diagonal rates in compressed rows, diagonal equal to
/// minus the row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    space: StateSpace,
    /// Reversible measure; the product measure unless built otherwise.
    measure: Vec<f64>,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
    diag: Vec<f64>,
}

/// Heat-bath generator with rates `c_x(η) ν(η′_x)`.
pub fn build_generator(model: &ModelSpec) -> Result<Generator> {
    let space = StateSpace::new(model)?;
    let nu = model.measure().clone();
    let measure = space.weights().to_vec();
    Generator::assemble(model, space, measure, |_, _, s, _| nu.prob(s))
}

impl Generator {
    /// Builds a generator whose rate from `η` (index `i`) to `η^{x,s}`
    /// (index `j`) is `rate(i, x, s, j)` whenever `c_x(η) = 1`, and zero
    /// otherwise. `measure` is the intended reversible measure.
    pub fn assemble(
        model: &ModelSpec,
        space: StateSpace,
        measure: Vec<f64>,
        rate: impl Fn(usize, usize, u8, usize) -> f64 + Sync,
    ) -> Result<Generator> {
        if measure.len() != space.len() {
            return Err(Error::Mismatch("measure length differs from the state space".into()));
        }
        let n = model.len();
        let k = space.states_per_site();
        let binary = k == 2 && model.supports_bits();
        let rows: Vec<Vec<(u32, f64)>> = (0..space.len())
            .into_par_iter()
            .map(|i| {
                let config = (!binary).then(|| GeneralConfig { states: space.decode(i) });
                let mut row = Vec::new();
                for x in 0..n {
                    let c = match &config {
                        None => model.constraint_bits(i as u64, x),
                        Some(cfg) => model.constraint(cfg, x),
                    };
                    if !c {
                        continue;
                    }
                    let stride = space.stride(x);
                    let cur = (i / stride) % k;
                    let base = i - cur * stride;
                    for s in 0..k {
                        if s != cur {
                            let j = base + s * stride;
                            let r = rate(i, x, s as u8, j);
                            if r > 0.0 {
                                row.push((j as u32, r));
                            }
                        }
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut col = Vec::with_capacity(nnz);
        let mut val = Vec::with_capacity(nnz);
        let mut diag = Vec::with_capacity(rows.len());
        for row in rows {
            let mut sum = 0.0;
            for (j, r) in row {
                col.push(j);
                val.push(r);
                sum += r;
            }
            diag.push(-sum);
            row_ptr.push(col.len());
        }
        Ok(Generator { space, measure, row_ptr, col, val, diag })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// Off-diagonal entries of row `i` as `(j, rate)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().zip(&self.val[r]).map(|(&j, &v)| (j as usize, v))
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    /// `𝓛(i, j)`, including the diagonal.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// `(𝓛 f)(η)` for every `η`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .into_par_iter()
            .map(|i| self.diag[i] * f[i] + self.row(i).map(|(j, r)| r * f[j]).sum::<f64>())
            .collect()
    }

    /// `−⟨f, 𝓛f⟩_μ`, which equals the Dirichlet form for a reversible chain.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        let lf = self.apply(f);
        -(0..self.dim()).map(|i| self.measure[i] * f[i] * lf[i]).sum::<f64>()
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.diag[i] + self.row(i).map(|(_, r)| r).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    /// `max |μ(η)𝓛(η,η′) − μ(η′)𝓛(η′,η)|` over pairs.
    pub fn detailed_balance_residual(&self) -> f64 {
        (0..self.dim())
            .into_par_iter()
            .map(|i| {
                self.row(i)
                    .map(|(j, r)| (self.measure[i] * r - self.measure[j] * self.rate(j, i)).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Dense copy of `𝓛` (small spaces only).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for (j, r) in self.row(i) {
                m[(i, j)] = r;
            }
        }
        m
    }

    /// `H` restricted to `states` (a principal submatrix, diagonal kept in
    /// full), in the local order of `states`.
    pub fn symmetrized(&self, states: &[u32]) -> SymCsr {
        let mut local = vec![u32::MAX; self.dim()];
        for (l, &g) in states.iter().enumerate() {
            local[g as usize] = l as u32;
        }
        let rows: Vec<Vec<(u32, f64)>> = states
            .par_iter()
            .map(|&g| {
                let i = g as usize;
                let mut row: Vec<(u32, f64)> = self
                    .row(i)
                    .filter(|&(j, _)| local[j] != u32::MAX)
                    .map(|(j, r)| (local[j], -(r * self.rate(j, i)).sqrt()))
                    .collect();
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for row in rows {
            for (j, v) in row {
                col.push(j);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        let diag = states.iter().map(|&g| -self.diag[g as usize]).collect();
        SymCsr { diag, row_ptr, col, val }
    }
}

/// Ergodic classes: connected components of the move graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component id of every state.
    pub labels: Vec<u32>,
    /// Members of each component, ascending; components ordered by their
    /// smallest member.
    pub members: Vec<Vec<u32>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Component containing `state`.
    pub fn of(&self, state: usize) -> &[u32] {
        &self.members[self.labels[state] as usize]
    }
}

pub fn ergodic_components(gen: &Generator) -> Components {
    let n = gen.dim();
    let mut labels = vec![u32::MAX; n];
    let mut members = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if labels[s] != u32::MAX {
            continue;
        }
        let id = members.len() as u32;
        let mut comp = vec![s as u32];
        labels[s] = id;
        queue.push_back(s);
        while let Some(i) = queue.pop_front() {
            for (j, _) in gen.row(i) {
                if labels[j] == u32::MAX {
                    labels[j] = id;
                    comp.push(j as u32);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        members.push(comp);
    }
    Components { labels, members }
}

/// Spectral data of one ergodic class, or of the whole chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub gap: f64,
    /// `1/gap`, infinite for a reducible chain.
    pub relaxation_time: f64,
    /// Multiplicity of the eigenvalue zero, equal to the number of ergodic
    /// classes of the analyzed states.
    pub zero_multiplicity: usize,
    pub component_sizes: Vec<usize>,
    pub dimension: usize,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub method: Option<Method>,
}

impl SpectralReport {
    fn reducible(components: &Components) -> Self {
        SpectralReport {
            gap: 0.0,
            relaxation_time: f64::INFINITY,
            zero_multiplicity: components.count(),
            component_sizes: components.sizes(),
            dimension: components.labels.len(),
            residual: 0.0,
            converged: true,
            iterations: 0,
            method: None,
        }
    }

    /// `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let sizes: Vec<String> = self.component_sizes.iter().map(|s| s.to_string()).collect();
        let method = match self.method {
            Some(Method::Dense) => "dense",
            Some(Method::Lanczos) => "lanczos",
            None => "none",
        };
        format!(
            "gap={}\nrelaxation_time={}\nzero_multiplicity={}\ncomponent_sizes={}\ndimension={}\nresidual={:e}\nconverged={}\niterations={}\nmethod={}\n",
            self.gap,
            self.relaxation_time,
            self.zero_multiplicity,
            sizes.join(","),
            self.dimension,
            self.residual,
            self.converged,
            self.iterations,
            method
        )
    }
}

impl fmt::Display for SpectralReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_value())
    }
}

/// `√μ` restricted to `states`, normalized.
fn sqrt_weights(gen: &Generator, states: &[u32]) -> Vec<f64> {
    let mut v: Vec<f64> = states.iter().map(|&s| gen.measure[s as usize].sqrt()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Gap of the chain restricted to one ergodic class, under `μ(·|class)`.
pub fn spectral_gap(gen: &Generator, component: &[u32], opts: &SolverOptions) -> Result<SpectralReport> {
    if component.len() < 2 {
        return Err(Error::Precondition(format!(
            "a class with {} state(s) has no spectral gap",
            component.len()
        )));
    }
    let sub = gen.symmetrized(component);
    let null = sqrt_weights(gen, component);
    let pair = lowest(&sub, Some(&null), opts);
    Ok(SpectralReport {
        gap: pair.value.max(0.0),
        relaxation_time: 1.0 / pair.value,
        zero_multiplicity: 1,
        component_sizes: vec![component.len()],
        dimension: component.len(),
        residual: pair.residual,
        converged: pair.converged,
        iterations: pair.iterations,
        method: Some(pair.method),
    })
}

/// Gap of the whole finite chain: zero (with the class count) when it is
/// reducible, and the gap of its single class otherwise.
pub fn chain_gap(gen: &Generator, opts: &SolverOptions) -> Result<SpectralReport> {
    let comps = ergodic_components(gen);
    if comps.count() > 1 {
        return Ok(SpectralReport::reducible(&comps));
    }
    spectral_gap(gen, &comps.members[0], opts)
}

/// Builds the generator of `model` and returns its [`chain_gap`].
pub fn model_gap(model: &ModelSpec, opts: &SolverOptions) -> Result<SpectralReport> {
    chain_gap(&build_generator(model)?, opts)
}

pub fn solver_failure(report: &SpectralReport) -> Result<()> {
    if report.converged {
        Ok(())
    } else {
        Err(Error::NoConvergence { iterations: report.iterations, residual: report.residual })
    }
}

/// Result of a Dirichlet eigenvalue computation.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletReport {
    pub value: f64,
    pub residual: f64,
    pub converged: bool,
    /// Number of states outside `A`.
    pub dimension: usize,
}

/// `λ_A`: the smallest eigenvalue of `−𝓛` with the states of `A` removed
/// (zero boundary condition on `A`).
pub fn dirichlet_eigenvalue(
    gen: &Generator,
    in_a: impl Fn(usize) -> bool,
    opts: &SolverOptions,
) -> Result<DirichletReport> {
    let outside: Vec<u32> = (0..gen.dim() as u32).filter(|&s| !in_a(s as usize)).collect();
    if outside.len() == gen.dim() {
        return Err(Error::Precondition("the set A is empty".into()));
    }
    if outside.is_empty() {
        return Err(Error::Precondition("the set A covers every configuration".into()));
    }
    let sub = gen.symmetrized(&outside);
    let pair = lowest(&sub, None, opts);
    Ok(DirichletReport {
        value: pair.value,
        residual: pair.residual,
        converged: pair.converged,
        dimension: outside.len(),
    })
}

/// Gap on `Ω⁺`, the configurations with at least one good site, under
/// `μ⁺ = μ(·|Ω⁺)`.
pub fn gap_plus(model: &ModelSpec, opts: &SolverOptions) -> Result<SpectralReport> {
    let gen = build_generator(model)?;
    let space = gen.space();
    let nu = model.measure();
    let in_plus = |i: usize| (0..space.sites()).any(|x| nu.is_good(space.site_state(i, x)));
    let plus: Vec<u32> = (0..gen.dim() as u32).filter(|&i| in_plus(i as usize)).collect();
    let comps = ergodic_components(&gen);
    let first = plus.first().copied().ok_or_else(|| Error::Precondition("Ω⁺ is empty".into()))?;
    let class = comps.of(first as usize);
    if class != plus.as_slice() {
        let touched: Vec<usize> = {
            let mut ids: Vec<u32> = plus.iter().map(|&s| comps.labels[s as usize]).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.iter().map(|&c| comps.members[c as usize].len()).collect()
        };
        return Err(Error::Precondition(format!(
            "Ω⁺ is not a single ergodic class: it meets classes of sizes {touched:?} \
             and has {} states",
            plus.len()
        )));
    }
    spectral_gap(&gen, &plus, opts)
}

/// `μ(Ω⁺)`.
pub fn plus_probability(model: &ModelSpec) -> f64 {
    let nu = model.measure();
    let bad: f64 = (0..nu.num_states() as u8).filter(|&s| !nu.is_good(s)).map(|s| nu.prob(s)).sum();
    1.0 - bad.powi(model.len() as i32)
}

/// Both gaps of a domination pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationGapReport {
    pub gap_a: f64,
    pub gap_b: f64,
    /// `gap_b ≤ gap_a + tolerance`.
    pub holds: bool,
}

/// Checks `gap(b) ≤ gap(a)` for a pair where `b`'s constraints are pointwise
/// below `a`'s.
pub fn check_domination_gap(
    a: &ModelSpec,
    b: &ModelSpec,
    tolerance: f64,
    opts: &SolverOptions,
) -> Result<DominationGapReport> {
    if !dominates(a, b)? {
        return Err(Error::Precondition(format!(
            "{} does not dominate {}: some constraint of the second exceeds the first",
            a.name(),
            b.name()
        )));
    }
    let ga = single_class_gap(a, opts)?;
    let gb = single_class_gap(b, opts)?;
    Ok(DominationGapReport { gap_a: ga, gap_b: gb, holds: gb <= ga + tolerance })
}

fn single_class_gap(model: &ModelSpec, opts: &SolverOptions) -> Result<f64> {
    let report = model_gap(model, opts)?;
    if report.zero_multiplicity != 1 {
        return Err(Error::Precondition(format!(
            "{} has {} ergodic classes",
            model.name(),
            report.zero_multiplicity
        )));
    }
    solver_failure(&report)?;
    Ok(report.gap)
}

/// `Σ_x μ(c_x Var_x f)` evaluated from the constraints and `ν` directly.
pub fn dirichlet_form(model: &ModelSpec, space: &StateSpace, f: &[f64]) -> f64 {
    let nu = model.measure();
    let k = space.states_per_site();
    (0..space.len())
        .into_par_iter()
        .map(|i| {
            let cfg = GeneralConfig { states: space.decode(i) };
            let mut total = 0.0;
            for x in 0..space.sites() {
                if !model.constraint(&cfg, x) {
                    continue;
                }
                let stride = space.stride(x);
                let base = i - (i / stride % k) * stride;
                let (mut m1, mut m2) = (0.0, 0.0);
                for s in 0..k {
                    let v = f[base + s * stride];
                    m1 += nu.prob(s as u8) * v;
                    m2 += nu.prob(s as u8) * v * v;
                }
                total += m2 - m1 * m1;
            }
            space.weights()[i] * total
        })
        // summed in index order so the value does not depend on the thread count
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// `Var_μ(f)` over the states listed (the whole space when `None`), with
/// `μ` conditioned on them.
pub fn variance(weights: &[f64], f: &[f64], states: Option<&[u32]>) -> f64 {
    let all: Vec<u32>;
    let states = match states {
        Some(s) => s,
        None => {
            all = (0..weights.len() as u32).collect();
            &all
        }
    };
    let z: f64 = states.iter().map(|&s| weights[s as usize]).sum();
    let m1: f64 = states.iter().map(|&s| weights[s as usize] * f[s as usize]).sum::<f64>() / z;
    let m2: f64 = states.iter().map(|&s| weights[s as usize] * f[s as usize].powi(2)).sum::<f64>() / z;
    m2 - m1 * m1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{east, fa, fa1f_graph, Rule, SiteMeasure};
    use crate::topology::{Graph, Rectangle};

    fn spin(q: f64) -> ModelSpec {
        ModelSpec::new("spin", Graph::path(1).unwrap(), vec![Rule::Free], vec![], SiteMeasure::bernoulli(q).unwrap())
            .unwrap()
    }

    #[test]
    fn single_spin_generator() {
        let g = build_generator(&spin(0.3)).unwrap();
        // state 1 (occupied) empties at rate q, state 0 fills at rate p
        assert!((g.rate(1, 0) - 0.3).abs() < 1e-15);
        assert!((g.rate(0, 1) - 0.7).abs() < 1e-15);
        assert!((g.diagonal(1) + 0.3).abs() < 1e-15);
        let r = chain_gap(&g, &SolverOptions::default()).unwrap();
        assert!((r.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn east_pair_generator_by_hand() {
        let g = build_generator(&east(2, 0.5).unwrap()).unwrap();
        assert_eq!(g.dim(), 4);
        // from (1,1) = index 3 only site 1 may update, to (1,0) = index 1
        let moves: Vec<usize> = g.row(3).map(|(j, _)| j).collect();
        assert_eq!(moves, vec![1]);
        // from (1,0) = index 1 both sites may update
        let moves: Vec<usize> = g.row(1).map(|(j, _)| j).collect();
        assert_eq!(moves, vec![0, 3]);
        assert!(g.max_row_sum() < 1e-15);
        assert!(g.detailed_balance_residual() < 1e-15);
    }

    #[test]
    fn blocked_model_has_singleton_classes() {
        let m = ModelSpec::new(
            "blocked",
            Graph::path(3).unwrap(),
            vec![Rule::AnyOf(vec![]); 3],
            vec![],
            SiteMeasure::bernoulli(0.5).unwrap(),
        )
        .unwrap();
        let g = build_generator(&m).unwrap();
        assert_eq!(g.nnz(), 0);
        assert_eq!(ergodic_components(&g).count(), 8);
        let r = chain_gap(&g, &SolverOptions::default()).unwrap();
        assert_eq!((r.gap, r.zero_multiplicity), (0.0, 8));
    }

    #[test]
    fn fa1f_path_splits_off_all_ones() {
        let m = fa(1, &Rectangle::with_sides(&[4]).unwrap(), 0.5).unwrap().with_good_boundary(&[]).unwrap();
        let g = build_generator(&m).unwrap();
        let c = ergodic_components(&g);
        assert_eq!(c.count(), 2);
        assert_eq!(c.of(15), &[15]);
        assert_eq!(c.of(0).len(), 15);
        let east_minimal = build_generator(&east(5, 0.5).unwrap()).unwrap();
        assert_eq!(ergodic_components(&east_minimal).sizes(), vec![32]);
    }

    #[test]
    fn dirichlet_single_spin() {
        let q = 0.3;
        let g = build_generator(&spin(q)).unwrap();
        let r = dirichlet_eigenvalue(&g, |i| i == 0, &SolverOptions::default()).unwrap();
        assert!((r.value - q).abs() < 1e-14);
        assert!(dirichlet_eigenvalue(&g, |_| true, &SolverOptions::default()).is_err());
        assert!(dirichlet_eigenvalue(&g, |_| false, &SolverOptions::default()).is_err());
    }

    #[test]
    fn gap_plus_on_a_pair() {
        let m = fa1f_graph(&Graph::path(2).unwrap(), None, 0.5).unwrap();
        let r = gap_plus(&m, &SolverOptions::default()).unwrap();
        assert_eq!(r.dimension, 3);
        // dense oracle on the three states (0,0), (1,0), (0,1)
        let g = build_generator(&m).unwrap();
        let ev = dense_eigenvalues(&g.symmetrized(&[0, 1, 2]));
        assert!(ev[0].abs() < 1e-12);
        assert!((r.gap - ev[1]).abs() < 1e-12);
        // with an unconstrained site the chain is irreducible and Ω⁺ is not closed
        let rooted = fa1f_graph(&Graph::path(2).unwrap(), Some(0), 0.5).unwrap();
        assert!(matches!(gap_plus(&rooted, &SolverOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn dirichlet_form_matches_quadratic_form() {
        let m = fa(2, &Rectangle::with_sides(&[2, 3]).unwrap(), 0.35).unwrap();
        let g = build_generator(&m).unwrap();
        let f: Vec<f64> = (0..g.dim()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let a = dirichlet_form(&m, g.space(), &f);
        let b = g.quadratic_form(&f);
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn general_state_space_is_reversible() {
        let rules = vec![
            Rule::AnyOf(vec![vec![crate::models::Site::Vertex(1)]]),
            Rule::Free,
            Rule::AtLeast { sites: vec![crate::models::Site::Vertex(1)], j: 1 },
        ];
        let nu = SiteMeasure::new(vec![0.2, 0.3, 0.5], &[0, 2]).unwrap();
        let m = ModelSpec::new("three", Graph::path(3).unwrap(), rules, vec![], nu).unwrap();
        let g = build_generator(&m).unwrap();
        assert_eq!(g.dim(), 27);
        assert!(g.max_row_sum() < 1e-15);
        assert!(g.detailed_balance_residual() < 1e-15);
        let r = chain_gap(&g, &SolverOptions::default()).unwrap();
        assert!(r.gap > 0.0 && r.converged);
    }

    #[test]
    fn cap_is_enforced() {
        let m = fa1f_graph(&Graph::path(25).unwrap(), None, 0.5).unwrap();
        assert!(matches!(build_generator(&m), Err(Error::CapExceeded { .. })));
    }
}
