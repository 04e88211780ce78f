//! Continuous-time constrained heat-bath dynamics.
//!
//! Each vertex carries a rate-one Poisson clock. When it rings and the
//! constraint holds in the current configuration, the site is refreshed from
//! `ν`; the refresh may return the old value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{self, Read, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, SiteMeasure, SpinConfig};
use crate::rng::{stream, LANE_INIT, LANE_SCHEDULER};

/// How ring times are generated. Both realize the same process.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Scheduler {
    /// One exponential clock per vertex in a priority queue; vertex `x`
    /// draws from its own stream.
    #[default]
    EventQueue,
    /// A single rate-`n` clock choosing a uniform vertex at each ring.
    Uniformization,
}

/// One clock ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub vertex: u32,
    /// State of the vertex after the ring.
    pub state: u8,
    /// Whether the constraint held, i.e. whether a refresh took place.
    pub legal: bool,
}

/// Size of one record of the binary event log.
pub const EVENT_RECORD_BYTES: usize = 14;

impl Event {
    /// Little-endian `f64` time, `u32` vertex, `u8` state, `u8` flags with bit
    /// 0 set for legal rings.
    pub fn to_bytes(&self) -> [u8; EVENT_RECORD_BYTES] {
        let mut b = [0u8; EVENT_RECORD_BYTES];
        b[..8].copy_from_slice(&self.time.to_le_bytes());
        b[8..12].copy_from_slice(&self.vertex.to_le_bytes());
        b[12] = self.state;
        b[13] = self.legal as u8;
        b
    }

    pub fn from_bytes(b: &[u8; EVENT_RECORD_BYTES]) -> Self {
        Event {
            time: f64::from_le_bytes(b[..8].try_into().unwrap()),
            vertex: u32::from_le_bytes(b[8..12].try_into().unwrap()),
            state: b[12],
            legal: b[13] & 1 == 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Ring {
    time: f64,
    vertex: u32,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ring {}

impl PartialOrd for Ring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// reversed so that `BinaryHeap` pops the earliest ring
impl Ord for Ring {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.vertex.cmp(&self.vertex))
    }
}

enum Engine {
    Queue { heap: BinaryHeap<Ring>, clocks: Vec<ChaCha8Rng> },
    Uniform { rng: ChaCha8Rng, next: f64 },
}

/// A single trajectory of the dynamics.
pub struct Simulator<'m> {
    model: &'m ModelSpec,
    config: SpinConfig,
    time: f64,
    engine: Engine,
}

impl<'m> Simulator<'m> {
    pub fn new(
        model: &'m ModelSpec,
        initial: SpinConfig,
        seed: u64,
        replica: u64,
        scheduler: Scheduler,
    ) -> Result<Self> {
        model.require_zero_one()?;
        if initial.len() != model.len() {
            return Err(Error::Mismatch(format!(
                "configuration has {} sites, model has {}",
                initial.len(),
                model.len()
            )));
        }
        let n = model.len();
        let engine = match scheduler {
            Scheduler::EventQueue => {
                let mut clocks: Vec<ChaCha8Rng> =
                    (0..n as u64).map(|x| stream(seed, replica, x)).collect();
                let heap = clocks
                    .iter_mut()
                    .enumerate()
                    .map(|(x, rng)| Ring { time: rng.sample(Exp1), vertex: x as u32 })
                    .collect();
                Engine::Queue { heap, clocks }
            }
            Scheduler::Uniformization => {
                let mut rng = stream(seed, replica, LANE_SCHEDULER);
                let next = rng.sample::<f64, _>(Exp1) / n as f64;
                Engine::Uniform { rng, next }
            }
        };
        Ok(Simulator { model, config: initial, time: 0.0, engine })
    }

    pub fn config(&self) -> &SpinConfig {
        &self.config
    }

    /// Time of the last processed ring.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Time of the next ring.
    pub fn peek_time(&self) -> f64 {
        match &self.engine {
            Engine::Queue { heap, .. } => heap.peek().map_or(f64::INFINITY, |r| r.time),
            Engine::Uniform { next, .. } => *next,
        }
    }

    /// Processes the next ring.
    pub fn step(&mut self) -> Event {
        let n = self.model.len();
        let (time, x, rng) = match &mut self.engine {
            Engine::Queue { heap, clocks } => {
                let ring = heap.pop().expect("every vertex has a pending ring");
                let x = ring.vertex as usize;
                let rng = &mut clocks[x];
                heap.push(Ring { time: ring.time + rng.sample::<f64, _>(Exp1), vertex: ring.vertex });
                (ring.time, x, rng)
            }
            Engine::Uniform { rng, next } => {
                let time = *next;
                let x = rng.random_range(0..n);
                *next = time + rng.sample::<f64, _>(Exp1) / n as f64;
                (time, x, rng)
            }
        };
        self.time = time;
        let legal = if self.model.supports_bits() {
            self.model.constraint_bits(self.config.bits(), x)
        } else {
            self.model.constraint(&self.config, x)
        };
        if legal {
            let s = self.model.measure().sample(rng.random::<f64>());
            self.config.set(x, s != 0);
        }
        Event { time, vertex: x as u32, state: self.config.state(x), legal }
    }

    /// Processes every ring up to `t_max`, calling `observe` after each one;
    /// stops early when `observe` returns `false`.
    pub fn run_until(&mut self, t_max: f64, mut observe: impl FnMut(&Event, &SpinConfig) -> bool) {
        while self.peek_time() <= t_max {
            let e = self.step();
            if !observe(&e, &self.config) {
                return;
            }
        }
    }
}

/// Recorded trajectory; `events` holds every ring, legal or not.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: SpinConfig,
    pub events: Vec<Event>,
    pub seed: u64,
    pub replica: u64,
    pub t_max: f64,
    pub final_config: SpinConfig,
}

impl Trajectory {
    /// Applies the recorded events to the initial configuration.
    pub fn replay(&self) -> SpinConfig {
        let mut c = self.initial.clone();
        for e in self.events.iter().filter(|e| e.legal) {
            c.set(e.vertex as usize, e.state != 0);
        }
        c
    }

    pub fn write_log<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.events {
            w.write_all(&e.to_bytes())?;
        }
        Ok(())
    }

    pub fn read_log<R: Read>(mut r: R) -> io::Result<Vec<Event>> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() % EVENT_RECORD_BYTES != 0 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "truncated event record"));
        }
        Ok(bytes
            .chunks_exact(EVENT_RECORD_BYTES)
            .map(|c| Event::from_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn simulate(model: &ModelSpec, initial: &SpinConfig, t_max: f64, seed: u64) -> Result<Trajectory> {
    simulate_with(model, initial, t_max, seed, 0, Scheduler::EventQueue)
}

pub fn simulate_with(
    model: &ModelSpec,
    initial: &SpinConfig,
    t_max: f64,
    seed: u64,
    replica: u64,
    scheduler: Scheduler,
) -> Result<Trajectory> {
    if !(t_max >= 0.0) {
        return Err(Error::InvalidParams(format!("t_max = {t_max} must be nonnegative")));
    }
    let mut sim = Simulator::new(model, initial.clone(), seed, replica, scheduler)?;
    let mut events = Vec::new();
    sim.run_until(t_max, |e, _| {
        events.push(*e);
        true
    });
    Ok(Trajectory {
        initial: initial.clone(),
        events,
        seed,
        replica,
        t_max,
        final_config: sim.config().clone(),
    })
}

/// I.i.d. draw from the product of `measure` over `n` sites (0-1 measures).
pub fn sample_equilibrium(measure: &SiteMeasure, n: usize, seed: u64) -> Result<SpinConfig> {
    sample_equilibrium_replica(measure, n, seed, 0)
}

pub fn sample_equilibrium_replica(
    measure: &SiteMeasure,
    n: usize,
    seed: u64,
    replica: u64,
) -> Result<SpinConfig> {
    if measure.num_states() != 2 {
        return Err(Error::NonBinary);
    }
    let mut rng = stream(seed, replica, LANE_INIT);
    let mut c = SpinConfig::zeros(n);
    for x in 0..n {
        c.set(x, measure.sample(rng.random::<f64>()) != 0);
    }
    Ok(c)
}

/// Outcome of one persistence replica.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistenceSample {
    /// Initial value at the origin.
    pub initial: u8,
    /// First time the origin changed value; infinite if it did not by `t_max`.
    pub time: f64,
}

/// Runs `n_samples` equilibrium replicas until the origin first changes value
/// or `t_max` passes.
pub fn persistence_times(
    model: &ModelSpec,
    t_max: f64,
    n_samples: usize,
    seed: u64,
    scheduler: Scheduler,
) -> Result<Vec<PersistenceSample>> {
    model.require_zero_one()?;
    let origin = model.origin();
    (0..n_samples as u64)
        .into_par_iter()
        .map(|replica| {
            let eta = sample_equilibrium_replica(model.measure(), model.len(), seed, replica)?;
            let initial = eta.state(origin);
            let mut sim = Simulator::new(model, eta, seed, replica, scheduler)?;
            let mut time = f64::INFINITY;
            sim.run_until(t_max, |e, _| {
                if e.vertex as usize == origin && e.state != initial {
                    time = e.time;
                    false
                } else {
                    true
                }
            });
            Ok(PersistenceSample { initial, time })
        })
        .collect()
}

/// Empirical persistence function split by the initial value at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceCurve {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
    /// Binomial standard errors of `f`, `f0` and `f1`.
    pub stderr: Vec<f64>,
    pub stderr0: Vec<f64>,
    pub stderr1: Vec<f64>,
    pub samples: usize,
    /// Fraction of replicas with an occupied origin at time zero.
    pub occupied_fraction: f64,
}

impl PersistenceCurve {
    pub fn from_samples(t_grid: &[f64], samples: &[PersistenceSample]) -> Self {
        let n = samples.len();
        let se = |f: f64| (f * (1.0 - f) / n as f64).sqrt();
        let frac = |pred: &dyn Fn(&PersistenceSample) -> bool| {
            samples.iter().filter(|s| pred(s)).count() as f64 / n as f64
        };
        let mut curve = PersistenceCurve {
            t: t_grid.to_vec(),
            f: Vec::new(),
            f0: Vec::new(),
            f1: Vec::new(),
            stderr: Vec::new(),
            stderr0: Vec::new(),
            stderr1: Vec::new(),
            samples: n,
            occupied_fraction: frac(&|s| s.initial == 1),
        };
        for &t in t_grid {
            let f0 = frac(&|s| s.initial == 0 && s.time > t);
            let f1 = frac(&|s| s.initial == 1 && s.time > t);
            curve.f.push(f0 + f1);
            curve.f0.push(f0);
            curve.f1.push(f1);
            curve.stderr.push(se(f0 + f1));
            curve.stderr0.push(se(f0));
            curve.stderr1.push(se(f1));
        }
        curve
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    let ok = t_grid.iter().all(|t| t.is_finite() && *t >= 0.0)
        && t_grid.windows(2).all(|w| w[0] <= w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParams("t grid must be finite, nonnegative and sorted".into()))
    }
}

pub fn persistence(
    model: &ModelSpec,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<PersistenceCurve> {
    persistence_with(model, t_grid, n_samples, seed, Scheduler::EventQueue)
}

pub fn persistence_with(
    model: &ModelSpec,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
    scheduler: Scheduler,
) -> Result<PersistenceCurve> {
    check_grid(t_grid)?;
    if n_samples == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    let t_max = t_grid.last().copied().unwrap_or(0.0);
    let samples = persistence_times(model, t_max, n_samples, seed, scheduler)?;
    Ok(PersistenceCurve::from_samples(t_grid, &samples))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Fixed(SpinConfig),
    Equilibrium,
}

/// Hitting-time samples; censored runs report `t_cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingSamples {
    pub times: Vec<f64>,
    pub censored: Vec<bool>,
    pub t_cap: f64,
}

impl HittingSamples {
    /// Sample mean of `min(T, t_cap)`.
    pub fn mean(&self) -> f64 {
        self.times.iter().sum::<f64>() / self.times.len() as f64
    }

    pub fn stderr(&self) -> f64 {
        let n = self.times.len() as f64;
        if n < 2.0 {
            return f64::INFINITY;
        }
        let m = self.mean();
        let var = self.times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }

    pub fn censored_count(&self) -> usize {
        self.censored.iter().filter(|&&c| c).count()
    }

    /// `false` when every run hit the cap.
    pub fn reliable(&self) -> bool {
        self.censored_count() < self.times.len()
    }
}

/// Default censoring cap `10⁴ / (q n)`.
pub fn default_t_cap(model: &ModelSpec) -> f64 {
    1e4 / (model.q() * model.len() as f64)
}

pub fn hitting_time(
    model: &ModelSpec,
    start: &Start,
    target: impl Fn(&SpinConfig) -> bool + Sync,
    n_samples: usize,
    seed: u64,
    t_cap: Option<f64>,
) -> Result<HittingSamples> {
    model.require_zero_one()?;
    if n_samples == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    let t_cap = t_cap.unwrap_or_else(|| default_t_cap(model));
    if !(t_cap.is_finite() && t_cap >= 0.0) {
        return Err(Error::InvalidParams(format!("censoring cap {t_cap} must be finite")));
    }
    let results: Vec<(f64, bool)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|replica| {
            let initial = match start {
                Start::Fixed(c) => c.clone(),
                Start::Equilibrium => {
                    sample_equilibrium_replica(model.measure(), model.len(), seed, replica)?
                }
            };
            if target(&initial) {
                return Ok((0.0, false));
            }
            let mut sim = Simulator::new(model, initial, seed, replica, Scheduler::EventQueue)?;
            let mut hit = None;
            sim.run_until(t_cap, |e, c| {
                if e.legal && target(c) {
                    hit = Some(e.time);
                    false
                } else {
                    true
                }
            });
            Ok(match hit {
                Some(t) => (t, false),
                None => (t_cap, true),
            })
        })
        .collect::<Result<_>>()?;
    let (times, censored) = results.into_iter().unzip();
    Ok(HittingSamples { times, censored, t_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{east, fa1f_graph, Rule};
    use crate::topology::Graph;

    fn single_spin(q: f64) -> ModelSpec {
        ModelSpec::new("spin", Graph::path(1).unwrap(), vec![Rule::Free], vec![], SiteMeasure::bernoulli(q).unwrap())
            .unwrap()
    }

    fn blocked(n: usize) -> ModelSpec {
        let rules = vec![Rule::AnyOf(vec![]); n];
        ModelSpec::new("blocked", Graph::path(n).unwrap(), rules, vec![], SiteMeasure::bernoulli(0.5).unwrap())
            .unwrap()
    }

    #[test]
    fn blocked_model_never_moves() {
        let m = blocked(5);
        let c = SpinConfig::from_states(&[1, 0, 1, 1, 0]);
        let tr = simulate(&m, &c, 50.0, 1).unwrap();
        assert!(!tr.events.is_empty());
        assert!(tr.events.iter().all(|e| !e.legal));
        assert_eq!(tr.final_config, c);
    }

    #[test]
    fn unconstrained_spin_rings_at_rate_one() {
        let m = single_spin(0.3);
        let tr = simulate(&m, &SpinConfig::ones(1), 10_000.0, 2).unwrap();
        let n = tr.events.len() as f64;
        let mean_gap = tr.events.last().unwrap().time / n;
        // mean of n Exp(1) variables has standard deviation 1/√n
        assert!((mean_gap - 1.0).abs() < 3.0 / n.sqrt(), "mean gap {mean_gap}");
    }

    #[test]
    fn trajectory_invariants() {
        let m = east(6, 0.4).unwrap();
        let c = SpinConfig::ones(6);
        for scheduler in [Scheduler::EventQueue, Scheduler::Uniformization] {
            let tr = simulate_with(&m, &c, 30.0, 3, 0, scheduler).unwrap();
            assert!(tr.events.windows(2).all(|w| w[0].time < w[1].time));
            assert!(tr.events.iter().all(|e| e.time <= 30.0));
            assert_eq!(tr.replay(), tr.final_config);
            // recompute legality along the trajectory
            let mut cur = c.clone();
            for e in &tr.events {
                assert_eq!(m.constraint(&cur, e.vertex as usize), e.legal);
                if e.legal {
                    cur.set(e.vertex as usize, e.state != 0);
                } else {
                    assert_eq!(cur.state(e.vertex as usize), e.state);
                }
            }
        }
    }

    #[test]
    fn east_pair_orders_its_flips() {
        let m = east(2, 0.5).unwrap();
        for seed in 0..1000 {
            let tr = simulate(&m, &SpinConfig::ones(2), 20.0, seed).unwrap();
            let first_zero_1 = tr.events.iter().find(|e| e.vertex == 1 && e.state == 0).map(|e| e.time);
            let first_legal_0 = tr.events.iter().find(|e| e.vertex == 0 && e.legal).map(|e| e.time);
            if let Some(t0) = first_legal_0 {
                assert!(first_zero_1.is_some_and(|t1| t1 < t0));
            }
        }
    }

    #[test]
    fn reproducible_and_replica_dependent() {
        let m = fa1f_graph(&Graph::star(4).unwrap(), None, 0.5).unwrap();
        let c = SpinConfig::from_states(&[0, 1, 1, 1, 1]);
        let a = simulate_with(&m, &c, 20.0, 9, 4, Scheduler::EventQueue).unwrap();
        let b = simulate_with(&m, &c, 20.0, 9, 4, Scheduler::EventQueue).unwrap();
        let other = simulate_with(&m, &c, 20.0, 9, 5, Scheduler::EventQueue).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.events, other.events);
    }

    #[test]
    fn event_log_round_trip() {
        let m = east(4, 0.5).unwrap();
        let tr = simulate(&m, &SpinConfig::ones(4), 5.0, 4).unwrap();
        let mut buf = Vec::new();
        tr.write_log(&mut buf).unwrap();
        assert_eq!(buf.len(), tr.events.len() * EVENT_RECORD_BYTES);
        assert_eq!(Trajectory::read_log(&buf[..]).unwrap(), tr.events);
        assert!(Trajectory::read_log(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn equilibrium_samples() {
        assert!(sample_equilibrium(&SiteMeasure::bernoulli(1.0).unwrap(), 100, 1).unwrap().is_all_zero());
        assert_eq!(sample_equilibrium(&SiteMeasure::bernoulli(0.0).unwrap(), 100, 1).unwrap().count_ones(), 100);
        let c = sample_equilibrium(&SiteMeasure::bernoulli(0.5).unwrap(), 10_000, 7).unwrap();
        let frac = c.count_zeros() as f64 / 1e4;
        assert!((frac - 0.5).abs() < 3.0 * 0.005);
    }

    #[test]
    fn persistence_basic_properties() {
        let m = east(6, 0.5).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let curve = persistence(&m, &grid, 2000, 5).unwrap();
        assert_eq!(curve.f[0], 1.0);
        for i in 0..grid.len() {
            assert!((curve.f[i] - curve.f0[i] - curve.f1[i]).abs() < 1e-15);
            assert!(curve.f1[i] <= curve.occupied_fraction);
        }
        assert!(curve.f.windows(2).all(|w| w[1] <= w[0]));
        assert!(persistence(&m, &[1.0, 0.5], 10, 1).is_err());
    }

    #[test]
    fn single_spin_persistence_matches_two_state_solution() {
        let q = 0.3;
        let p = 1.0 - q;
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.4).collect();
        let curve = persistence(&single_spin(q), &grid, 20_000, 6).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let exact = p * (-q * t).exp() + q * (-p * t).exp();
            assert!((curve.f[i] - exact).abs() <= 3.0 * curve.stderr[i] + 1e-12, "t = {t}");
        }
    }

    #[test]
    fn single_spin_hitting_time_is_exponential() {
        let q = 0.4;
        let m = single_spin(q);
        let vacant = |c: &SpinConfig| !c.get(0);
        let h = hitting_time(&m, &Start::Fixed(SpinConfig::ones(1)), vacant, 4000, 8, None).unwrap();
        assert_eq!(h.censored_count(), 0);
        assert!((h.mean() - 1.0 / q).abs() < 3.0 * h.stderr());
        let at_target = hitting_time(&m, &Start::Fixed(SpinConfig::zeros(1)), vacant, 10, 8, None).unwrap();
        assert!(at_target.times.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn censoring_is_reported() {
        let m = blocked(3);
        let h = hitting_time(&m, &Start::Fixed(SpinConfig::ones(3)), |c| c.is_all_zero(), 5, 1, Some(10.0))
            .unwrap();
        assert_eq!(h.censored_count(), 5);
        assert!(!h.reliable());
        assert!(h.times.iter().all(|&t| t == 10.0));
    }
}
