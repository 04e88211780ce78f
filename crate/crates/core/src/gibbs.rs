//! Finite-range interactions, finite-volume Gibbs measures and the
//! interacting constrained generator.
//!
//! Sites are lattice points. A volume is an ordered list of points, the
//! vertices of a lattice model in index order; configurations on it are
//! indexed as in [`crate::spectra::StateSpace`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, SiteMeasure};
use crate::spectra::{Generator, StateSpace, STATE_CAP};
use crate::topology::Point;

/// `Φ_A` as a table over configurations of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    /// Sorted, distinct sites.
    pub sites: Vec<Point>,
    /// Values in lexicographic order of the configuration on `sites`, first
    /// site most significant.
    pub table: Vec<f64>,
}

impl Potential {
    fn index(&self, states: usize, values: impl Iterator<Item = u8>) -> usize {
        values.fold(0, |acc, s| acc * states + s as usize)
    }

    pub fn sup_norm(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max d(y, z)` over pairs of sites (L1 distance).
    pub fn diameter(&self) -> usize {
        let mut d = 0;
        for a in &self.sites {
            for b in &self.sites {
                d = d.max(l1(a, b));
            }
        }
        d
    }
}

fn l1(a: &[i64], b: &[i64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x - y).unsigned_abs() as usize).sum()
}

/// Finite-range potential `Φ = {Φ_A}`; absent sets have `Φ_A = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    potentials: Vec<Potential>,
    range: usize,
    states: usize,
    dim: usize,
}

impl Interaction {
    /// Validates `diam(A) < range`, table sizes and dimensions. Potentials on
    /// the same set are summed.
    pub fn new(potentials: Vec<Potential>, range: usize, states: usize) -> Result<Self> {
        if states < 2 {
            return Err(Error::InvalidInteraction("need at least two single-site states".into()));
        }
        let dim = potentials.first().and_then(|p| p.sites.first()).map_or(0, |s| s.len());
        let mut merged: BTreeMap<Vec<Point>, Vec<f64>> = BTreeMap::new();
        for mut p in potentials {
            if p.sites.is_empty() {
                return Err(Error::InvalidInteraction("a potential needs a nonempty support".into()));
            }
            if p.sites.iter().any(|s| s.len() != dim) {
                return Err(Error::InvalidInteraction("sites of different dimensions".into()));
            }
            let mut order: Vec<usize> = (0..p.sites.len()).collect();
            order.sort_by(|&a, &b| p.sites[a].cmp(&p.sites[b]));
            if order.windows(2).any(|w| p.sites[w[0]] == p.sites[w[1]]) {
                return Err(Error::InvalidInteraction(format!("repeated site in {:?}", p.sites)));
            }
            let expected = states.checked_pow(p.sites.len() as u32).unwrap_or(usize::MAX);
            if p.table.len() != expected {
                return Err(Error::InvalidInteraction(format!(
                    "support {:?} needs {expected} table entries, got {}",
                    p.sites,
                    p.table.len()
                )));
            }
            if p.table.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInteraction("table values must be finite".into()));
            }
            if !order.windows(2).all(|w| w[0] < w[1]) {
                p = reorder(&p, &order, states);
            }
            if p.diameter() >= range {
                return Err(Error::InvalidInteraction(format!(
                    "support {:?} has diameter {} but the range is {range}",
                    p.sites,
                    p.diameter()
                )));
            }
            match merged.get_mut(&p.sites) {
                Some(t) => t.iter_mut().zip(&p.table).for_each(|(a, b)| *a += b),
                None => {
                    merged.insert(p.sites, p.table);
                }
            }
        }
        let potentials = merged.into_iter().map(|(sites, table)| Potential { sites, table }).collect();
        Ok(Interaction { potentials, range, states, dim })
    }

    pub fn zero(range: usize) -> Self {
        Interaction { potentials: Vec::new(), range, states: 2, dim: 0 }
    }

    pub fn potentials(&self) -> &[Potential] {
        &self.potentials
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn is_zero(&self) -> bool {
        self.potentials.iter().all(|p| p.table.iter().all(|&v| v == 0.0))
    }

    /// `‖Φ‖ = sup_x Σ_{A∋x} ‖Φ_A‖_∞`.
    pub fn norm(&self) -> f64 {
        let mut per_site: HashMap<&Point, f64> = HashMap::new();
        for p in &self.potentials {
            let s = p.sup_norm();
            for x in &p.sites {
                *per_site.entry(x).or_insert(0.0) += s;
            }
        }
        per_site.values().fold(0.0, |m, &v| m.max(v))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.potentials {
            p.table.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }

    /// Random 0-1 interaction made of single-site fields and nearest-neighbor
    /// pairs touching `volume`, scaled so that `‖Φ‖ = norm`.
    pub fn random(volume: &[Point], range: usize, norm: f64, seed: u64) -> Result<Self> {
        if range == 0 {
            return Err(Error::InvalidInteraction("range must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut potentials = Vec::new();
        let mut pairs = BTreeSet::new();
        for x in volume {
            potentials.push(Potential { sites: vec![x.clone()], table: vec![0.0, rng.random_range(-1.0..1.0)] });
            if range >= 2 {
                for axis in 0..x.len() {
                    for delta in [-1, 1] {
                        let mut y = x.clone();
                        y[axis] += delta;
                        let pair = if *x < y { (x.clone(), y) } else { (y, x.clone()) };
                        pairs.insert(pair);
                    }
                }
            }
        }
        for (a, b) in pairs {
            let table = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            potentials.push(Potential { sites: vec![a, b], table });
        }
        let phi = Interaction::new(potentials, range, 2)?;
        let current = phi.norm();
        Ok(if current > 0.0 { phi.scaled(norm / current) } else { phi })
    }

    /// Parses the interaction file format:
    ///
    /// ```text
    /// # comments and blank lines are ignored
    /// range: 2
    /// states: 2
    /// A: (0 0),(1 0) ; table: 0, 0, 0, 0.1
    /// A: 3 ; table: 0, -0.2
    /// ```
    ///
    /// A site is a parenthesized coordinate tuple or a bare integer (d = 1).
    /// `range` defaults to one more than the largest support diameter.
    pub fn parse(text: &str) -> Result<Self> {
        let mut range = None;
        let mut states = 2;
        let mut norm_bound = None;
        let mut potentials = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            let (key, rest) =
                line.split_once(':').ok_or_else(|| err(format!("expected `key: value`, got `{line}`")))?;
            let number = |s: &str| s.trim().parse::<f64>().map_err(|e| err(format!("{e}: `{}`", s.trim())));
            match key.trim() {
                "range" => range = Some(number(rest)? as usize),
                "states" => states = number(rest)? as usize,
                "norm" => norm_bound = Some(number(rest)?),
                "A" => {
                    let (sites, table) = rest
                        .split_once(';')
                        .ok_or_else(|| err("expected `A: sites ; table: values`".into()))?;
                    let table = table
                        .trim()
                        .strip_prefix("table:")
                        .ok_or_else(|| err("expected `table:` after `;`".into()))?;
                    let sites = parse_sites(sites).map_err(err)?;
                    let table = table.split(',').map(number).collect::<Result<Vec<f64>>>()?;
                    potentials.push(Potential { sites, table });
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let range = match range {
            Some(r) => r,
            None => potentials
                .iter()
                .map(|p| {
                    let mut s = p.sites.clone();
                    s.sort();
                    Potential { sites: s, table: Vec::new() }.diameter() + 1
                })
                .max()
                .unwrap_or(1),
        };
        let phi = Interaction::new(potentials, range, states)?;
        if let Some(m) = norm_bound {
            if phi.norm() > m + 1e-12 {
                return Err(Error::InvalidInteraction(format!(
                    "‖Φ‖ = {} exceeds the declared bound {m}",
                    phi.norm()
                )));
            }
        }
        Ok(phi)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("range: {}\nstates: {}\n", self.range, self.states);
        for p in &self.potentials {
            let sites: Vec<String> = p
                .sites
                .iter()
                .map(|s| {
                    let c: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                    format!("({})", c.join(" "))
                })
                .collect();
            let vals: Vec<String> = p.table.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&format!("A: {} ; table: {}\n", sites.join(","), vals.join(", ")));
        }
        out
    }

    fn check_volume(&self, volume: &[Point]) -> Result<()> {
        if !self.potentials.is_empty() && volume.iter().any(|x| x.len() != self.dim) {
            return Err(Error::InvalidInteraction(format!(
                "interaction lives in dimension {}, volume does not",
                self.dim
            )));
        }
        Ok(())
    }
}

fn reorder(p: &Potential, order: &[usize], states: usize) -> Potential {
    let m = p.sites.len();
    let sites: Vec<Point> = order.iter().map(|&i| p.sites[i].clone()).collect();
    let mut table = vec![0.0; p.table.len()];
    for (old_index, &v) in p.table.iter().enumerate() {
        // digits of the old index, first site most significant
        let mut digits = vec![0usize; m];
        let mut rest = old_index;
        for d in (0..m).rev() {
            digits[d] = rest % states;
            rest /= states;
        }
        let new_index = order.iter().fold(0, |acc, &i| acc * states + digits[i]);
        table[new_index] = v;
    }
    Potential { sites, table }
}

fn parse_sites(text: &str) -> std::result::Result<Vec<Point>, String> {
    let mut sites = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix('(') {
            let close = after.find(')').ok_or("unclosed `(`")?;
            let coords = after[..close]
                .split([' ', ','])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<i64>().map_err(|e| format!("{e}: `{s}`")))
                .collect::<std::result::Result<Vec<i64>, String>>()?;
            sites.push(coords);
            rest = after[close + 1..].trim_start();
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            let token = rest[..end].trim();
            sites.push(vec![token.parse::<i64>().map_err(|e| format!("{e}: `{token}`"))?]);
            rest = &rest[end..];
        }
        rest = rest.trim_start().strip_prefix(',').unwrap_or(rest).trim_start();
    }
    if sites.is_empty() {
        return Err("empty support".into());
    }
    Ok(sites)
}

/// Points outside `volume` within L1 distance `width` of it.
pub fn collar(volume: &[Point], width: usize) -> Vec<Point> {
    let inside: BTreeSet<&Point> = volume.iter().collect();
    let mut out = BTreeSet::new();
    let Some(dim) = volume.first().map(|p| p.len()) else {
        return Vec::new();
    };
    let offsets = l1_ball(dim, width as i64);
    for x in volume {
        for o in &offsets {
            let y: Point = x.iter().zip(o).map(|(a, b)| a + b).collect();
            if !inside.contains(&y) {
                out.insert(y);
            }
        }
    }
    out.into_iter().collect()
}

fn l1_ball(dim: usize, r: i64) -> Vec<Point> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for p in &out {
            let used: i64 = p.iter().map(|v: &i64| v.abs()).sum();
            for v in -(r - used)..=(r - used) {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Boundary condition `τ`: single-site states on sites outside the volume.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundaryCondition {
    values: BTreeMap<Point, u8>,
}

impl BoundaryCondition {
    /// `τ ≡ state` on the collar of width `width`.
    pub fn constant(volume: &[Point], width: usize, state: u8) -> Self {
        Self::from_fn(volume, width, |_| state)
    }

    pub fn from_fn(volume: &[Point], width: usize, mut f: impl FnMut(&Point) -> u8) -> Self {
        BoundaryCondition { values: collar(volume, width).into_iter().map(|p| { let s = f(&p); (p, s) }).collect() }
    }

    pub fn get(&self, p: &Point) -> Option<u8> {
        self.values.get(p).copied()
    }

    pub fn set(&mut self, p: Point, state: u8) {
        self.values.insert(p, state);
    }

    pub fn sites(&self) -> impl Iterator<Item = (&Point, u8)> {
        self.values.iter().map(|(p, &s)| (p, s))
    }
}

/// One relevant potential with each support site resolved to a volume
/// position or a fixed boundary value.
struct Resolved<'a> {
    potential: &'a Potential,
    slots: Vec<Slot>,
}

#[derive(Clone, Copy)]
enum Slot {
    Inside(usize),
    Fixed(u8),
}

fn resolve<'a>(
    phi: &'a Interaction,
    volume: &[Point],
    tau: &BoundaryCondition,
) -> Result<Vec<Resolved<'a>>> {
    phi.check_volume(volume)?;
    let thin: Vec<Point> =
        collar(volume, phi.range()).into_iter().filter(|p| tau.get(p).is_none()).collect();
    if let Some(p) = thin.first() {
        return Err(Error::CollarTooThin(p.clone()));
    }
    let position: HashMap<&Point, usize> = volume.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut out = Vec::new();
    for p in phi.potentials() {
        if !p.sites.iter().any(|s| position.contains_key(s)) {
            continue;
        }
        let slots = p
            .sites
            .iter()
            .map(|s| match position.get(s) {
                Some(&i) => Slot::Inside(i),
                None => Slot::Fixed(tau.get(s).expect("collar covers every relevant site")),
            })
            .collect();
        out.push(Resolved { potential: p, slots });
    }
    Ok(out)
}

fn resolved_energy(resolved: &[Resolved], states: usize, sigma: impl Fn(usize) -> u8) -> f64 {
    resolved
        .iter()
        .map(|r| {
            let idx = r.potential.index(
                states,
                r.slots.iter().map(|s| match *s {
                    Slot::Inside(i) => sigma(i),
                    Slot::Fixed(v) => v,
                }),
            );
            r.potential.table[idx]
        })
        .sum()
}

/// `H_Λ^τ(σ) = Σ_{A∩Λ≠∅} Φ_A(σ·τ)`.
pub fn energy(phi: &Interaction, volume: &[Point], tau: &BoundaryCondition, sigma: &[u8]) -> Result<f64> {
    if sigma.len() != volume.len() {
        return Err(Error::Mismatch("σ and the volume differ in length".into()));
    }
    let resolved = resolve(phi, volume, tau)?;
    Ok(resolved_energy(&resolved, phi.states(), |i| sigma[i]))
}

/// Explicit `μ_Λ^{Φ,τ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMeasure {
    pub volume: Vec<Point>,
    pub tau: BoundaryCondition,
    pub states: usize,
    pub probabilities: Vec<f64>,
    pub log_partition: f64,
}

pub fn gibbs_measure(
    phi: &Interaction,
    volume: &[Point],
    tau: &BoundaryCondition,
    nu: &SiteMeasure,
) -> Result<GibbsMeasure> {
    let k = nu.num_states();
    if !phi.potentials().is_empty() && phi.states() != k {
        return Err(Error::Mismatch("interaction and measure use different state spaces".into()));
    }
    if volume.len() > crate::models::EXACT_VERTEX_CAP {
        return Err(Error::CapExceeded {
            what: "Gibbs volume",
            got: volume.len(),
            cap: crate::models::EXACT_VERTEX_CAP,
        });
    }
    let size = (0..volume.len()).try_fold(1usize, |s, _| s.checked_mul(k).filter(|&s| s <= STATE_CAP));
    let size = size.ok_or(Error::CapExceeded { what: "configurations", got: usize::MAX, cap: STATE_CAP })?;
    let resolved = resolve(phi, volume, tau)?;
    let n = volume.len();
    let log_w: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|i| {
            let digit = |x: usize| ((i / k.pow(x as u32)) % k) as u8;
            let h = resolved_energy(&resolved, k, digit);
            let log_nu: f64 = (0..n).map(|x| nu.prob(digit(x)).ln()).sum();
            log_nu - h
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = log_w.iter().map(|l| (l - max).exp()).sum();
    let log_partition = max + z.ln();
    let probabilities = log_w.iter().map(|l| (l - log_partition).exp()).collect();
    Ok(GibbsMeasure { volume: volume.to_vec(), tau: tau.clone(), states: k, probabilities, log_partition })
}

impl GibbsMeasure {
    fn digit(&self, i: usize, x: usize) -> usize {
        (i / self.states.pow(x as u32)) % self.states
    }

    /// Marginal on the volume positions `delta`, indexed with `delta[0]` as
    /// the least significant digit.
    pub fn marginal(&self, delta: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.states.pow(delta.len() as u32)];
        for (i, &p) in self.probabilities.iter().enumerate() {
            let j = delta.iter().rev().fold(0, |acc, &x| acc * self.states + self.digit(i, x));
            out[j] += p;
        }
        out
    }

    /// Conditional law of the positions not fixed by `given`, indexed with the
    /// free positions in increasing order, least significant first.
    pub fn conditional(&self, given: &[(usize, u8)]) -> Vec<f64> {
        let fixed: BTreeMap<usize, u8> = given.iter().copied().collect();
        let free: Vec<usize> = (0..self.volume.len()).filter(|x| !fixed.contains_key(x)).collect();
        let mut out = vec![0.0; self.states.pow(free.len() as u32)];
        for (i, &p) in self.probabilities.iter().enumerate() {
            if fixed.iter().all(|(&x, &s)| self.digit(i, x) == s as usize) {
                let j = free.iter().rev().fold(0, |acc, &x| acc * self.states + self.digit(i, x));
                out[j] += p;
            }
        }
        let z: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= z);
        out
    }
}

/// Coordinates of the model's vertices, in index order.
pub fn model_volume(model: &ModelSpec) -> Result<Vec<Point>> {
    let emb = model.graph().embedding().ok_or_else(|| {
        Error::UnsupportedTopology("interactions need a lattice embedding".into())
    })?;
    if emb.period().is_some() {
        return Err(Error::UnsupportedTopology("interactions on a torus are not supported".into()));
    }
    Ok(emb.coords().to_vec())
}

/// Constrained heat-bath generator whose refresh law at `x` is the
/// single-site conditional of `μ_Λ^{Φ,τ}`, reversible for that measure.
pub fn build_interacting_generator(
    model: &ModelSpec,
    phi: &Interaction,
    tau: &BoundaryCondition,
) -> Result<Generator> {
    model.require_exact_size("interacting generator")?;
    let volume = model_volume(model)?;
    let gibbs = gibbs_measure(phi, &volume, tau, model.measure())?;
    let space = StateSpace::new(model)?;
    let k = space.states_per_site();
    let pi = gibbs.probabilities;
    let rate = |i: usize, x: usize, _s: u8, j: usize| {
        let stride = space.stride(x);
        let base = i - (i / stride % k) * stride;
        let z: f64 = (0..k).map(|t| pi[base + t * stride]).sum();
        pi[j] / z
    };
    let gen = Generator::assemble(model, space.clone(), pi.clone(), rate)?;
    Ok(gen)
}

/// `max_{σ_Δ} |μ_Λ^{Φ,τ′}(σ_Δ) / μ_Λ^{Φ,τ}(σ_Δ) − 1|`.
pub fn strong_mixing_ratio(
    phi: &Interaction,
    volume: &[Point],
    delta: &[usize],
    tau: &BoundaryCondition,
    tau_prime: &BoundaryCondition,
    nu: &SiteMeasure,
) -> Result<f64> {
    if let Some(&x) = delta.iter().find(|&&x| x >= volume.len()) {
        return Err(Error::VertexOutOfRange { vertex: x, len: volume.len() });
    }
    let a = gibbs_measure(phi, volume, tau, nu)?.marginal(delta);
    let b = gibbs_measure(phi, volume, tau_prime, nu)?.marginal(delta);
    Ok(a.iter().zip(&b).map(|(pa, pb)| (pb / pa - 1.0).abs()).fold(0.0, f64::max))
}

/// Largest entrywise gap between `μ_Λ^{Φ,τ}(·|σ_{Λ∖V} = ξ)` and
/// `μ_V^{Φ,τ·ξ}` over every `ξ`. `sub` lists the positions of `V`.
pub fn dlr_residual(
    phi: &Interaction,
    volume: &[Point],
    tau: &BoundaryCondition,
    nu: &SiteMeasure,
    sub: &[usize],
) -> Result<f64> {
    let mut sub = sub.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if sub.is_empty() || sub.iter().any(|&x| x >= volume.len()) {
        return Err(Error::Precondition("V must be a nonempty subset of the volume".into()));
    }
    let full = gibbs_measure(phi, volume, tau, nu)?;
    let rest: Vec<usize> = (0..volume.len()).filter(|x| sub.binary_search(x).is_err()).collect();
    let v_points: Vec<Point> = sub.iter().map(|&x| volume[x].clone()).collect();
    let k = nu.num_states();
    let mut worst: f64 = 0.0;
    for xi in 0..k.pow(rest.len() as u32) {
        let given: Vec<(usize, u8)> =
            rest.iter().enumerate().map(|(i, &x)| (x, ((xi / k.pow(i as u32)) % k) as u8)).collect();
        let glued = BoundaryCondition::from_fn(&v_points, phi.range(), |p| {
            match volume.iter().position(|y| y == p) {
                Some(x) => given.iter().find(|g| g.0 == x).expect("outside V").1,
                None => tau.get(p).unwrap_or(0),
            }
        });
        let expected = gibbs_measure(phi, &v_points, &glued, nu)?;
        let got = full.conditional(&given);
        for (a, b) in got.iter().zip(&expected.probabilities) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{east, north_east};
    use crate::spectra::build_generator;
    use crate::topology::Rectangle;

    fn pts(rect: &Rectangle) -> Vec<Point> {
        rect.points()
    }

    #[test]
    fn empty_interaction_has_zero_energy() {
        let vol = pts(&Rectangle::with_sides(&[3]).unwrap());
        let tau = BoundaryCondition::constant(&vol, 1, 1);
        let phi = Interaction::zero(1);
        assert_eq!(energy(&phi, &vol, &tau, &[1, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn nearest_neighbor_pair_energy_by_hand() {
        // 1×2 volume {(0,0), (1,0)}, β = 0.1 on every nearest-neighbor pair
        let vol = pts(&Rectangle::with_sides(&[2, 1]).unwrap());
        let beta = 0.1;
        let mut pairs = Vec::new();
        for a in &vol {
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let b = vec![a[0] + dx, a[1] + dy];
                pairs.push(Potential { sites: vec![a.clone(), b], table: vec![0.0, 0.0, 0.0, beta] });
            }
        }
        // the interior pair appears twice above; keep it once
        let mut seen = BTreeSet::new();
        pairs.retain(|p| {
            let mut s = p.sites.clone();
            s.sort();
            seen.insert(s)
        });
        assert_eq!(pairs.len(), 7);
        let phi = Interaction::new(pairs, 2, 2).unwrap();
        let tau = BoundaryCondition::constant(&vol, 2, 1);
        // every pair meeting Λ has both ends occupied: 7 · β
        let h = energy(&phi, &vol, &tau, &[1, 1]).unwrap();
        assert!((h - 7.0 * beta).abs() < 1e-15);
        // with a vacancy at (0,0) only the pairs through (1,0) avoiding (0,0) count
        let h = energy(&phi, &vol, &tau, &[0, 1]).unwrap();
        assert!((h - 3.0 * beta).abs() < 1e-15);
    }

    #[test]
    fn single_site_fields_add_up() {
        let vol = pts(&Rectangle::with_sides(&[5]).unwrap());
        let h = 0.25;
        let fields = vol.iter().map(|x| Potential { sites: vec![x.clone()], table: vec![0.0, h] }).collect();
        let phi = Interaction::new(fields, 1, 2).unwrap();
        let tau = BoundaryCondition::constant(&vol, 1, 0);
        let e = energy(&phi, &vol, &tau, &[1, 0, 1, 1, 0]).unwrap();
        assert!((e - 3.0 * h).abs() < 1e-15);
    }

    #[test]
    fn collar_too_thin_is_refused() {
        let vol = pts(&Rectangle::with_sides(&[2, 2]).unwrap());
        let phi = Interaction::random(&vol, 2, 0.1, 1).unwrap();
        let thin = BoundaryCondition::constant(&vol, 1, 1);
        assert!(matches!(energy(&phi, &vol, &thin, &[0; 4]), Err(Error::CollarTooThin(_))));
    }

    #[test]
    fn single_site_gibbs_measure() {
        let (q, h) = (0.3, 0.7);
        let vol = vec![vec![0i64]];
        let phi = Interaction::new(vec![Potential { sites: vol.clone(), table: vec![0.0, h] }], 1, 2).unwrap();
        let tau = BoundaryCondition::constant(&vol, 1, 0);
        let g = gibbs_measure(&phi, &vol, &tau, &SiteMeasure::bernoulli(q).unwrap()).unwrap();
        let p = 1.0 - q;
        let expected = p * (-h).exp() / (p * (-h).exp() + q);
        assert!((g.probabilities[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_interaction_gives_the_product_measure() {
        let vol = pts(&Rectangle::with_sides(&[2, 2]).unwrap());
        let nu = SiteMeasure::bernoulli(0.4).unwrap();
        let tau = BoundaryCondition::constant(&vol, 1, 1);
        let g = gibbs_measure(&Interaction::zero(1), &vol, &tau, &nu).unwrap();
        for (i, &pr) in g.probabilities.iter().enumerate() {
            let ones = (i as u32).count_ones() as i32;
            assert!((pr - 0.6f64.powi(ones) * 0.4f64.powi(4 - ones)).abs() < 1e-15);
        }
    }

    #[test]
    fn probability_ratios_follow_energy_differences() {
        let vol = pts(&Rectangle::with_sides(&[2, 3]).unwrap());
        let phi = Interaction::random(&vol, 2, 0.2, 4).unwrap();
        let tau = BoundaryCondition::constant(&vol, 2, 1);
        let nu = SiteMeasure::bernoulli(0.4).unwrap();
        let g = gibbs_measure(&phi, &vol, &tau, &nu).unwrap();
        let (a, b) = (5usize, 42usize);
        let cfg = |i: usize| -> Vec<u8> { (0..6).map(|x| ((i >> x) & 1) as u8).collect() };
        let ha = energy(&phi, &vol, &tau, &cfg(a)).unwrap();
        let hb = energy(&phi, &vol, &tau, &cfg(b)).unwrap();
        let nu_ratio = |i: usize| {
            let ones = (i as u32).count_ones() as i32;
            0.6f64.powi(ones) * 0.4f64.powi(6 - ones)
        };
        let expected = (hb - ha).exp() * nu_ratio(a) / nu_ratio(b);
        assert!((g.probabilities[a] / g.probabilities[b] - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn parse_round_trip() {
        let text = "# pair and field\nrange: 2\nA: (0 0),(1 0) ; table: 0, 0, 0, 0.1\nA: (1 0) ; table: 0, -0.2\n";
        let phi = Interaction::parse(text).unwrap();
        assert_eq!(phi.potentials().len(), 2);
        assert!((phi.norm() - 0.3).abs() < 1e-15);
        assert_eq!(Interaction::parse(&phi.to_text()).unwrap(), phi);

        let one_d = Interaction::parse("A: 3,4 ; table: 0, 1, 1, 0\n").unwrap();
        assert_eq!(one_d.range(), 2);
        assert!(Interaction::parse("range: 1\nA: 3,4 ; table: 0, 1, 1, 0\n").is_err());
        assert!(Interaction::parse("A: 3 ; table: 0, 1, 2\n").is_err());
        assert!(Interaction::parse("norm: 0.5\nA: 3 ; table: 0, 1\n").is_err());
        assert!(matches!(Interaction::parse("bogus line"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn reordered_supports_keep_their_tables() {
        // Φ on ((1 0),(0 0)) with value only when the first listed site is 1
        let p = Potential { sites: vec![vec![1, 0], vec![0, 0]], table: vec![0.0, 0.0, 1.0, 0.0] };
        let phi = Interaction::new(vec![p], 2, 2).unwrap();
        let q = &phi.potentials()[0];
        assert_eq!(q.sites, vec![vec![0, 0], vec![1, 0]]);
        // now (0 0) is first: value when (1 0) = 1 and (0 0) = 0, index 0b01
        assert_eq!(q.table, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn interacting_generator_reduces_to_the_product_case() {
        let m = north_east(&Rectangle::with_sides(&[2, 3]).unwrap(), 0.4).unwrap();
        let vol = model_volume(&m).unwrap();
        let tau = BoundaryCondition::constant(&vol, 1, 1);
        let a = build_interacting_generator(&m, &Interaction::zero(1), &tau).unwrap();
        let b = build_generator(&m).unwrap();
        for i in 0..a.dim() {
            assert!((a.diagonal(i) - b.diagonal(i)).abs() < 1e-12);
            let ra: Vec<(usize, f64)> = a.row(i).collect();
            let rb: Vec<(usize, f64)> = b.row(i).collect();
            assert_eq!(ra.len(), rb.len());
            for ((ja, va), (jb, vb)) in ra.iter().zip(&rb) {
                assert_eq!(ja, jb);
                assert!((va - vb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interacting_generator_is_reversible() {
        let m = north_east(&Rectangle::with_sides(&[2, 3]).unwrap(), 0.4).unwrap();
        let vol = model_volume(&m).unwrap();
        let phi = Interaction::random(&vol, 2, 0.2, 9).unwrap();
        let tau = BoundaryCondition::constant(&vol, 2, 1);
        let g = build_interacting_generator(&m, &phi, &tau).unwrap();
        assert!(g.max_row_sum() < 1e-12);
        assert!(g.detailed_balance_residual() < 1e-12);
    }

    #[test]
    fn mixing_ratio_trivial_cases() {
        let vol = pts(&Rectangle::with_sides(&[3, 3]).unwrap());
        let nu = SiteMeasure::bernoulli(0.5).unwrap();
        let tau = BoundaryCondition::constant(&vol, 2, 1);
        let tau2 = BoundaryCondition::constant(&vol, 2, 0);
        let phi = Interaction::random(&vol, 2, 0.1, 2).unwrap();
        assert_eq!(strong_mixing_ratio(&phi, &vol, &[0], &tau, &tau, &nu).unwrap(), 0.0);
        let r0 = strong_mixing_ratio(&Interaction::zero(2), &vol, &[0], &tau, &tau2, &nu).unwrap();
        assert!(r0 < 1e-12);
        assert!(strong_mixing_ratio(&phi, &vol, &[0], &tau, &tau2, &nu).unwrap() > 0.0);
    }

    #[test]
    fn dlr_consistency_on_a_small_volume() {
        let vol = pts(&Rectangle::with_sides(&[2, 2]).unwrap());
        let phi = Interaction::random(&vol, 2, 0.2, 3).unwrap();
        let tau = BoundaryCondition::from_fn(&vol, 2, |p| ((p[0] + p[1]).rem_euclid(2)) as u8);
        let nu = SiteMeasure::bernoulli(0.35).unwrap();
        for sub in [vec![0], vec![1, 2], vec![0, 1, 3]] {
            assert!(dlr_residual(&phi, &vol, &tau, &nu, &sub).unwrap() < 1e-12);
        }
    }

    #[test]
    fn east_volume_is_one_dimensional() {
        let m = east(4, 0.5).unwrap();
        assert_eq!(model_volume(&m).unwrap(), vec![vec![0], vec![1], vec![2], vec![3]]);
    }
}
