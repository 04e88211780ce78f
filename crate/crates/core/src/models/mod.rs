//! Constraint families, single-site measures and boundary conditions.
//!
//! A model is a graph, one influence class per vertex, a single-site measure
//! `ν` with good set `G`, and a good boundary set `𝓜 ⊆ 𝓑`. The constraint at
//! `x` is satisfied when some set of its influence class is entirely good;
//! boundary sites count as good exactly when they belong to `𝓜`.

mod catalog;
mod config;
mod descriptor;

pub use catalog::{
    binary_tree, catalog, east, fa, fa1f_graph, fa_graph, north_east, north_east_torus, spiral,
    tree_east, BoundaryChoice, CatalogParams,
};
pub use config::{Configuration, GeneralConfig, SpinConfig};
pub use descriptor::ModelDescriptor;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::topology::{Graph, Point};

/// Exhaustive checks and exact spectra enumerate `2^|V|` configurations.
pub const EXACT_VERTEX_CAP: usize = 24;

/// Finite single-site probability space `(S, ν)` with good set `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMeasure {
    probabilities: Vec<f64>,
    good: Vec<bool>,
    q: f64,
}

impl SiteMeasure {
    /// General measure on `S = {0, …, k-1}`. All weights must be positive.
    pub fn new(probabilities: Vec<f64>, good_states: &[usize]) -> Result<Self> {
        if probabilities.len() < 2 || probabilities.len() > 256 {
            return Err(Error::InvalidMeasure("need between 2 and 256 states".into()));
        }
        if probabilities.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidMeasure("every state needs positive probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("probabilities sum to {total}")));
        }
        let mut good = vec![false; probabilities.len()];
        for &s in good_states {
            if s >= good.len() {
                return Err(Error::InvalidMeasure(format!("good state {s} out of range")));
            }
            good[s] = true;
        }
        let q = probabilities.iter().zip(&good).filter(|(_, g)| **g).map(|(p, _)| p).sum();
        Ok(SiteMeasure { probabilities, good, q })
    }

    /// 0-1 measure with `ν(0) = q`, `G = {0}`.
    ///
    /// The endpoints `q ∈ {0, 1}` are accepted so that samplers and bootstrap
    /// scans can use them; [`SiteMeasure::is_nondegenerate`] reports whether
    /// every state has positive mass, which the exact spectra require.
    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidMeasure(format!("q = {q} is not in [0, 1]")));
        }
        Ok(SiteMeasure { probabilities: vec![q, 1.0 - q], good: vec![true, false], q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        1.0 - self.q
    }

    pub fn num_states(&self) -> usize {
        self.probabilities.len()
    }

    pub fn prob(&self, s: u8) -> f64 {
        self.probabilities[s as usize]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    #[inline]
    pub fn is_good(&self, s: u8) -> bool {
        self.good[s as usize]
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.probabilities.iter().all(|&p| p > 0.0)
    }

    /// `S = {0, 1}` with `G = {0}`.
    pub fn is_zero_one(&self) -> bool {
        self.probabilities.len() == 2 && self.good == [true, false]
    }

    /// Inverse-CDF sample from a uniform `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> u8 {
        let mut acc = 0.0;
        for (s, &p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return s as u8;
            }
        }
        // rounding: land on the last state with positive mass
        self.probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u8
    }
}

/// A member of an influence set: a vertex of the graph or a boundary site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Vertex(usize),
    /// Index into the model's boundary set `𝓑`.
    Boundary(usize),
}

/// Influence class of one vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// Constraint identically one.
    Free,
    /// Satisfied when some listed set is entirely good. An empty list is the
    /// constraint identically zero.
    AnyOf(Vec<Vec<Site>>),
    /// Satisfied when at least `j` of the listed sites are good; this is the
    /// class of all `j`-subsets without materializing it.
    AtLeast { sites: Vec<Site>, j: usize },
}

impl Rule {
    fn sites(&self) -> Vec<Site> {
        match self {
            Rule::Free => Vec::new(),
            Rule::AnyOf(sets) => sets.iter().flatten().copied().collect(),
            Rule::AtLeast { sites, .. } => sites.clone(),
        }
    }
}

/// Per-vertex influence classes together with their range.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFamily {
    rules: Vec<Rule>,
    range: usize,
}

impl ConstraintFamily {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, x: usize) -> &Rule {
        &self.rules[x]
    }

    /// `r = max_x max_{A ∈ 𝓒_x} max_{y ∈ A} d(x, y)`.
    pub fn range(&self) -> usize {
        self.range
    }
}

/// How the good boundary set `𝓜` was chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundaryMode {
    /// `𝓜 = ∅`.
    None,
    /// Explicit `𝓜`, as indices into `𝓑`.
    Good(Vec<usize>),
    /// `𝓜 = 𝓑`.
    Maximal,
    /// The catalog's documented minimal choice.
    Minimal,
}

#[derive(Debug, Clone, PartialEq)]
enum CompiledRule {
    Free,
    Never,
    AnyOf(Vec<Vec<u32>>),
    AtLeast { sites: Vec<u32>, need: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum MaskRule {
    Free,
    Never,
    AnyOf(Vec<u64>),
    AtLeast { mask: u64, need: u32 },
}

/// A fully specified kinetically constrained model on a finite graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    name: String,
    graph: Graph,
    family: ConstraintFamily,
    measure: SiteMeasure,
    boundary_sites: Vec<Point>,
    mode: BoundaryMode,
    good_boundary: Vec<bool>,
    unconstrained: Vec<usize>,
    origin: usize,
    compiled: Vec<CompiledRule>,
    masks: Option<Vec<MaskRule>>,
    dependents: Vec<Vec<u32>>,
}

impl ModelSpec {
    /// Validates `rules` against Hp1/Hp2 and builds a model with `𝓜 = ∅`.
    ///
    /// `boundary_sites` lists the coordinates of the sites referenced by
    /// [`Site::Boundary`]; it may be empty for models without a boundary.
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        rules: Vec<Rule>,
        boundary_sites: Vec<Point>,
        measure: SiteMeasure,
    ) -> Result<Self> {
        if rules.len() != graph.len() {
            return Err(Error::InvalidParams(format!(
                "{} rules for {} vertices",
                rules.len(),
                graph.len()
            )));
        }
        let range = validate_rules(&graph, &rules, &boundary_sites)?;
        let mut spec = ModelSpec {
            name: name.into(),
            good_boundary: vec![false; boundary_sites.len()],
            graph,
            family: ConstraintFamily { rules, range },
            measure,
            boundary_sites,
            mode: BoundaryMode::None,
            unconstrained: Vec::new(),
            origin: 0,
            compiled: Vec::new(),
            masks: None,
            dependents: Vec::new(),
        };
        spec.compile();
        Ok(spec)
    }

    /// Sets `𝓜` explicitly (indices into `𝓑`).
    pub fn with_good_boundary(mut self, good: &[usize]) -> Result<Self> {
        let mut flags = vec![false; self.boundary_sites.len()];
        for &b in good {
            if b >= flags.len() {
                return Err(Error::InvalidParams(format!("boundary index {b} not in 𝓑")));
            }
            flags[b] = true;
        }
        self.good_boundary = flags;
        self.mode = BoundaryMode::Good(good.to_vec());
        self.compile();
        Ok(self)
    }

    /// `𝓜 = 𝓑`.
    pub fn with_maximal_boundary(mut self) -> Self {
        self.good_boundary = vec![true; self.boundary_sites.len()];
        self.mode = BoundaryMode::Maximal;
        self.compile();
        self
    }

    /// Derives `𝓜` from a boundary configuration `τ`, given as the predicate
    /// "`τ_z ∈ G`" on boundary coordinates.
    pub fn with_boundary_config(mut self, tau_good: impl Fn(&Point) -> bool) -> Self {
        let good: Vec<usize> =
            (0..self.boundary_sites.len()).filter(|&b| tau_good(&self.boundary_sites[b])).collect();
        self.good_boundary = vec![false; self.boundary_sites.len()];
        for &b in &good {
            self.good_boundary[b] = true;
        }
        self.mode = BoundaryMode::Good(good);
        self.compile();
        self
    }

    pub(crate) fn with_mode_label(mut self, mode: BoundaryMode) -> Self {
        self.mode = mode;
        self
    }

    /// Declares vertices whose constraint is identically one.
    pub fn with_unconstrained(mut self, xs: &[usize]) -> Result<Self> {
        for &x in xs {
            if x >= self.graph.len() {
                return Err(Error::VertexOutOfRange { vertex: x, len: self.graph.len() });
            }
        }
        let mut xs = xs.to_vec();
        xs.sort_unstable();
        xs.dedup();
        self.unconstrained = xs;
        self.compile();
        Ok(self)
    }

    /// Vertex observed by persistence and hitting-time experiments.
    pub fn with_origin(mut self, x: usize) -> Result<Self> {
        if x >= self.graph.len() {
            return Err(Error::VertexOutOfRange { vertex: x, len: self.graph.len() });
        }
        self.origin = x;
        Ok(self)
    }

    pub fn with_measure(mut self, measure: SiteMeasure) -> Self {
        self.measure = measure;
        self
    }

    /// Same constraints, 0-1 measure with vacancy probability `q`.
    pub fn with_q(self, q: f64) -> Result<Self> {
        Ok(self.with_measure(SiteMeasure::bernoulli(q)?))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn family(&self) -> &ConstraintFamily {
        &self.family
    }

    pub fn measure(&self) -> &SiteMeasure {
        &self.measure
    }

    pub fn q(&self) -> f64 {
        self.measure.q()
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    /// The boundary set `𝓑`.
    pub fn boundary_sites(&self) -> &[Point] {
        &self.boundary_sites
    }

    /// Indicator of `𝓜` over `𝓑`.
    pub fn good_boundary(&self) -> &[bool] {
        &self.good_boundary
    }

    pub fn boundary_mode(&self) -> &BoundaryMode {
        &self.mode
    }

    pub fn unconstrained(&self) -> &[usize] {
        &self.unconstrained
    }

    fn compile(&mut self) {
        let n = self.graph.len();
        let good_boundary = &self.good_boundary;
        self.compiled = self
            .family
            .rules
            .iter()
            .enumerate()
            .map(|(x, rule)| {
                if self.unconstrained.binary_search(&x).is_ok() {
                    return CompiledRule::Free;
                }
                compile_rule(rule, good_boundary)
            })
            .collect();
        self.masks = (n <= 64).then(|| self.compiled.iter().map(mask_rule).collect());
        let mut dependents = vec![Vec::new(); n];
        for (x, rule) in self.compiled.iter().enumerate() {
            let mut sites: Vec<u32> = match rule {
                CompiledRule::Free | CompiledRule::Never => Vec::new(),
                CompiledRule::AnyOf(sets) => sets.iter().flatten().copied().collect(),
                CompiledRule::AtLeast { sites, .. } => sites.clone(),
            };
            sites.sort_unstable();
            sites.dedup();
            for y in sites {
                dependents[y as usize].push(x as u32);
            }
        }
        self.dependents = dependents;
    }

    /// `c_x(ω)` with boundary sites in `𝓜` counted as good and those in
    /// `𝓑 \ 𝓜` as not good.
    #[inline]
    pub fn constraint<C: Configuration + ?Sized>(&self, config: &C, x: usize) -> bool {
        let good = |y: u32| config.is_good(y as usize, &self.measure);
        match &self.compiled[x] {
            CompiledRule::Free => true,
            CompiledRule::Never => false,
            CompiledRule::AnyOf(sets) => sets.iter().any(|a| a.iter().all(|&y| good(y))),
            CompiledRule::AtLeast { sites, need } => {
                let mut count = 0;
                for &y in sites {
                    if good(y) {
                        count += 1;
                        if count >= *need {
                            return true;
                        }
                    }
                }
                false
            }
        }
    }

    /// Fast path for 0-1 models with at most 64 vertices: `occupied` has bit
    /// `y` set when `y` is not good.
    #[inline]
    pub fn constraint_bits(&self, occupied: u64, x: usize) -> bool {
        let masks = self.masks.as_ref().expect("bit evaluation needs at most 64 vertices");
        match &masks[x] {
            MaskRule::Free => true,
            MaskRule::Never => false,
            MaskRule::AnyOf(ms) => ms.iter().any(|&m| occupied & m == 0),
            MaskRule::AtLeast { mask, need } => (mask & !occupied).count_ones() >= *need,
        }
    }

    pub fn supports_bits(&self) -> bool {
        self.masks.is_some()
    }

    /// `true` when the constraint at `x` is identically one.
    pub fn is_free(&self, x: usize) -> bool {
        matches!(self.compiled[x], CompiledRule::Free)
    }

    /// `true` when the constraint at `x` is identically zero.
    pub fn is_blocked(&self, x: usize) -> bool {
        matches!(self.compiled[x], CompiledRule::Never)
    }

    /// Vertices whose constraint reads vertex `y`.
    pub fn dependents(&self, y: usize) -> &[u32] {
        &self.dependents[y]
    }

    pub(crate) fn require_zero_one(&self) -> Result<()> {
        if self.measure.is_zero_one() {
            Ok(())
        } else {
            Err(Error::NonBinary)
        }
    }

    pub(crate) fn require_exact_size(&self, what: &'static str) -> Result<()> {
        if self.len() > EXACT_VERTEX_CAP {
            Err(Error::CapExceeded { what, got: self.len(), cap: EXACT_VERTEX_CAP })
        } else {
            Ok(())
        }
    }
}

fn compile_rule(rule: &Rule, good_boundary: &[bool]) -> CompiledRule {
    match rule {
        Rule::Free => CompiledRule::Free,
        Rule::AnyOf(sets) => {
            let mut out = Vec::new();
            for set in sets {
                let mut inside = Vec::new();
                let mut feasible = true;
                for site in set {
                    match *site {
                        Site::Vertex(y) => inside.push(y as u32),
                        Site::Boundary(b) if good_boundary[b] => {}
                        Site::Boundary(_) => feasible = false,
                    }
                }
                if !feasible {
                    continue;
                }
                if inside.is_empty() {
                    return CompiledRule::Free;
                }
                inside.sort_unstable();
                inside.dedup();
                out.push(inside);
            }
            if out.is_empty() {
                CompiledRule::Never
            } else {
                CompiledRule::AnyOf(out)
            }
        }
        Rule::AtLeast { sites, j } => {
            let mut inside = Vec::new();
            let mut helped = 0;
            for site in sites {
                match *site {
                    Site::Vertex(y) => inside.push(y as u32),
                    Site::Boundary(b) if good_boundary[b] => helped += 1,
                    Site::Boundary(_) => {}
                }
            }
            let need = j.saturating_sub(helped);
            if need == 0 {
                CompiledRule::Free
            } else if inside.len() < need {
                CompiledRule::Never
            } else {
                CompiledRule::AtLeast { sites: inside, need }
            }
        }
    }
}

fn mask_rule(rule: &CompiledRule) -> MaskRule {
    let mask = |sites: &[u32]| sites.iter().fold(0u64, |m, &y| m | (1 << y));
    match rule {
        CompiledRule::Free => MaskRule::Free,
        CompiledRule::Never => MaskRule::Never,
        CompiledRule::AnyOf(sets) => MaskRule::AnyOf(sets.iter().map(|s| mask(s)).collect()),
        CompiledRule::AtLeast { sites, need } => {
            MaskRule::AtLeast { mask: mask(sites), need: *need as u32 }
        }
    }
}

/// Checks Hp1 and Hp2 and returns the range.
fn validate_rules(graph: &Graph, rules: &[Rule], boundary_sites: &[Point]) -> Result<usize> {
    let emb = graph.embedding();
    let lattice_metric = emb.is_some_and(|e| e.period().is_none());
    let mut range = 0;
    for (x, rule) in rules.iter().enumerate() {
        let sites = rule.sites();
        if sites.is_empty() {
            continue;
        }
        if let Rule::AtLeast { j, .. } = rule {
            if *j == 0 {
                return Err(Error::InvalidParams(format!("threshold zero at vertex {x}")));
            }
        }
        let bfs = (!lattice_metric).then(|| graph.distances_from(x));
        for site in sites {
            let d = match site {
                Site::Vertex(y) if y == x => {
                    return Err(Error::Hypothesis { hypothesis: "Hp1", vertex: x })
                }
                Site::Vertex(y) if y >= graph.len() => {
                    return Err(Error::VertexOutOfRange { vertex: y, len: graph.len() })
                }
                Site::Vertex(y) => match (&bfs, emb) {
                    (Some(dist), _) => dist[y],
                    (None, Some(e)) => l1(e.coord(x), e.coord(y)),
                    (None, None) => unreachable!(),
                },
                Site::Boundary(b) => {
                    let p = boundary_sites.get(b).ok_or_else(|| {
                        Error::InvalidParams(format!("boundary index {b} out of range"))
                    })?;
                    match emb {
                        Some(e) => l1(e.coord(x), p),
                        None => return Err(Error::Hypothesis { hypothesis: "Hp2", vertex: x }),
                    }
                }
            };
            if d == usize::MAX {
                return Err(Error::Hypothesis { hypothesis: "Hp2", vertex: x });
            }
            range = range.max(d);
        }
    }
    Ok(range)
}

fn l1(a: &[i64], b: &[i64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x - y).unsigned_abs() as usize).sum()
}

/// Outcome of a domination check.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceCheck {
    pub holds: bool,
    pub checked: usize,
    /// A configuration and vertex with `c_b > c_a`, if one was found.
    pub counterexample: Option<(SpinConfig, usize)>,
}

fn check_comparable(a: &ModelSpec, b: &ModelSpec) -> Result<()> {
    let same_graph =
        a.len() == b.len() && (0..a.len()).all(|x| a.graph.neighbors(x) == b.graph.neighbors(x));
    if !same_graph {
        return Err(Error::Mismatch("models live on different graphs".into()));
    }
    if a.measure != b.measure {
        return Err(Error::Mismatch("models use different site measures".into()));
    }
    a.require_zero_one()
}

/// `true` iff `c_b(ω) ≤ c_a(ω)` for every configuration and vertex, i.e. `b`
/// is at least as constrained as `a`. Exhaustive over `2^|V|` configurations.
pub fn dominates(a: &ModelSpec, b: &ModelSpec) -> Result<bool> {
    Ok(dominance_check(a, b)?.holds)
}

/// Exhaustive domination check reporting the first counterexample.
pub fn dominance_check(a: &ModelSpec, b: &ModelSpec) -> Result<DominanceCheck> {
    check_comparable(a, b)?;
    a.require_exact_size("exhaustive domination check")?;
    let n = a.len();
    for bits in 0..(1u64 << n) {
        for x in 0..n {
            if b.constraint_bits(bits, x) && !a.constraint_bits(bits, x) {
                return Ok(DominanceCheck {
                    holds: false,
                    checked: bits as usize + 1,
                    counterexample: Some((SpinConfig::from_bits(n, bits), x)),
                });
            }
        }
    }
    Ok(DominanceCheck { holds: true, checked: 1 << n, counterexample: None })
}

/// Domination check over `samples` uniformly random configurations.
pub fn dominates_sampled(
    a: &ModelSpec,
    b: &ModelSpec,
    samples: usize,
    seed: u64,
) -> Result<DominanceCheck> {
    check_comparable(a, b)?;
    let n = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let mut c = SpinConfig::zeros(n);
        for x in 0..n {
            c.set(x, rng.random::<bool>());
        }
        for x in 0..n {
            if b.constraint(&c, x) && !a.constraint(&c, x) {
                return Ok(DominanceCheck {
                    holds: false,
                    checked: i + 1,
                    counterexample: Some((c, x)),
                });
            }
        }
    }
    Ok(DominanceCheck { holds: true, checked: samples, counterexample: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Rectangle;
    use proptest::prelude::*;

    fn cfg(states: &[u8]) -> SpinConfig {
        SpinConfig::from_states(states)
    }

    #[test]
    fn site_measure_validation() {
        assert!(SiteMeasure::new(vec![0.5, 0.5], &[0]).is_ok());
        assert!(SiteMeasure::new(vec![0.0, 1.0], &[0]).is_err());
        assert!(SiteMeasure::new(vec![0.3, 0.3], &[0]).is_err());
        let m = SiteMeasure::new(vec![0.2, 0.3, 0.5], &[0, 2]).unwrap();
        assert!((m.q() - 0.7).abs() < 1e-15);
        assert!(!m.is_zero_one());
        assert_eq!(m.sample(0.1), 0);
        assert_eq!(m.sample(0.4), 1);
        assert_eq!(m.sample(0.99), 2);
        assert!(SiteMeasure::bernoulli(1.5).is_err());
        assert!(!SiteMeasure::bernoulli(1.0).unwrap().is_nondegenerate());
    }

    #[test]
    fn east_constraints() {
        let m = east(4, 0.5).unwrap();
        let w = cfg(&[1, 1, 0, 1]);
        let c: Vec<bool> = (0..4).map(|x| m.constraint(&w, x)).collect();
        assert_eq!(c, vec![false, true, false, true]);
        assert_eq!(m.family().range(), 1);
    }

    #[test]
    fn fa1f_all_ones_interior_blocked() {
        let m = fa(1, &Rectangle::with_sides(&[5]).unwrap(), 0.5).unwrap();
        assert!(!m.constraint(&SpinConfig::ones(5), 2));
    }

    #[test]
    fn spiral_pair_union() {
        let rect = Rectangle::new(vec![-2, -2], vec![2, 2]).unwrap();
        let m = spiral(&rect, 0.5).unwrap().with_good_boundary(&[]).unwrap();
        let idx = |p: [i64; 2]| rect.index_of(&p).unwrap();
        let mut w = SpinConfig::ones(rect.len());
        // NE = {x+e2, x+e1+e2}, NW = {x-e1, x-e1+e2}
        for p in [[0, 1], [1, 1], [-1, 0], [-1, 1]] {
            w.set(idx(p), false);
        }
        assert!(m.constraint(&w, idx([0, 0])));
        // NE alone is not enough
        w.set(idx([-1, 0]), true);
        assert!(!m.constraint(&w, idx([0, 0])));
    }

    #[test]
    fn constraint_bits_agree_with_generic_path() {
        let m = fa(2, &Rectangle::with_sides(&[3, 3]).unwrap(), 0.4).unwrap();
        for bits in 0..512u64 {
            let c = SpinConfig::from_bits(9, bits);
            for x in 0..9 {
                assert_eq!(m.constraint(&c, x), m.constraint_bits(bits, x));
            }
        }
    }

    #[test]
    fn hp1_rejected() {
        let g = Graph::path(2).unwrap();
        let rules = vec![Rule::AnyOf(vec![vec![Site::Vertex(0)]]), Rule::Free];
        let err = ModelSpec::new("bad", g, rules, vec![], SiteMeasure::bernoulli(0.5).unwrap());
        assert_eq!(err.unwrap_err(), Error::Hypothesis { hypothesis: "Hp1", vertex: 0 });
    }

    #[test]
    fn general_state_space_constraint() {
        let g = Graph::path(3).unwrap();
        let rules = vec![
            Rule::AnyOf(vec![vec![Site::Vertex(1)]]),
            Rule::AtLeast { sites: vec![Site::Vertex(0), Site::Vertex(2)], j: 2 },
            Rule::Free,
        ];
        let nu = SiteMeasure::new(vec![0.2, 0.3, 0.5], &[2]).unwrap();
        let m = ModelSpec::new("three-state", g, rules, vec![], nu).unwrap();
        let w = GeneralConfig { states: vec![2, 0, 2] };
        assert!(!m.constraint(&w, 0));
        assert!(m.constraint(&w, 1));
        assert!(m.constraint(&w, 2));
    }

    #[test]
    fn domination_examples() {
        let e = east(6, 0.5).unwrap();
        let f = fa(1, &Rectangle::with_sides(&[6]).unwrap(), 0.5).unwrap();
        assert!(dominates(&f, &e).unwrap());
        assert!(!dominates(&e, &f).unwrap());
        assert!(dominates(&e, &e).unwrap());

        let sq = Rectangle::with_sides(&[3, 3]).unwrap();
        let f1 = fa(1, &sq, 0.5).unwrap().with_maximal_boundary();
        let f2 = fa(2, &sq, 0.5).unwrap().with_maximal_boundary();
        assert!(dominates(&f1, &f2).unwrap());
        let check = dominance_check(&f2, &f1).unwrap();
        let (w, x) = check.counterexample.unwrap();
        assert!(f1.constraint(&w, x) && !f2.constraint(&w, x));

        let sampled = dominates_sampled(&f1, &f2, 2000, 3).unwrap();
        assert!(sampled.holds);
        assert!(!dominates_sampled(&f2, &f1, 2000, 3).unwrap().holds);
    }

    #[test]
    fn domination_requires_same_graph() {
        let e = east(4, 0.5).unwrap();
        let e5 = east(5, 0.5).unwrap();
        assert!(matches!(dominates(&e, &e5), Err(Error::Mismatch(_))));
        let e_other_q = east(4, 0.3).unwrap();
        assert!(matches!(dominates(&e, &e_other_q), Err(Error::Mismatch(_))));
    }

    #[test]
    fn boundary_enters_only_through_indicators() {
        let rect = Rectangle::with_sides(&[2, 2]).unwrap();
        let base = north_east(&rect, 0.5).unwrap();
        // two different τ with identical good-set indicators on 𝓑
        let tau_a = |p: &Point| p[0] >= 2;
        let tau_b = |p: &Point| p[0] >= 2 && p[1] < 10;
        let a = base.clone().with_boundary_config(tau_a);
        let b = base.with_boundary_config(tau_b);
        for bits in 0..16 {
            for x in 0..4 {
                assert_eq!(a.constraint_bits(bits, x), b.constraint_bits(bits, x));
            }
        }
    }

    fn catalog_zoo() -> Vec<ModelSpec> {
        let sq = Rectangle::with_sides(&[3, 3]).unwrap();
        vec![
            east(6, 0.5).unwrap(),
            fa(1, &Rectangle::with_sides(&[6]).unwrap(), 0.5).unwrap(),
            fa(2, &sq, 0.5).unwrap(),
            north_east(&sq, 0.5).unwrap(),
            spiral(&sq, 0.5).unwrap(),
            binary_tree(3, 0.5).unwrap(),
            fa1f_graph(&Graph::star(4).unwrap(), Some(0), 0.5).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn constraints_ignore_own_site(bits in any::<u64>(), which in 0usize..7) {
            let m = &catalog_zoo()[which];
            let n = m.len();
            let bits = bits & ((1u64 << n) - 1);
            for x in 0..n {
                prop_assert_eq!(m.constraint_bits(bits, x), m.constraint_bits(bits ^ (1 << x), x));
            }
        }

        #[test]
        fn constraints_increase_with_vacancies(bits in any::<u64>(), extra in any::<u64>(), which in 0usize..7) {
            let m = &catalog_zoo()[which];
            let n = m.len();
            let full = (1u64 << n) - 1;
            let w = bits & full;
            let w2 = w & !(extra & full); // more vacancies: w ≤ w2
            for x in 0..n {
                prop_assert!(!m.constraint_bits(w, x) || m.constraint_bits(w2, x));
            }
        }
    }

    #[test]
    fn domination_is_a_partial_order_on_the_zoo() {
        let sq = Rectangle::with_sides(&[2, 3]).unwrap();
        let ms = [
            fa(1, &sq, 0.5).unwrap().with_maximal_boundary(),
            fa(2, &sq, 0.5).unwrap().with_maximal_boundary(),
            fa(2, &sq, 0.5).unwrap(),
            fa(3, &sq, 0.5).unwrap(),
        ];
        let rel: Vec<Vec<bool>> =
            ms.iter().map(|a| ms.iter().map(|b| dominates(a, b).unwrap()).collect()).collect();
        for i in 0..ms.len() {
            assert!(rel[i][i]);
            for j in 0..ms.len() {
                for k in 0..ms.len() {
                    if rel[i][j] && rel[j][k] {
                        assert!(rel[i][k]);
                    }
                }
            }
        }
    }
}
