//! The bootstrap map, closures, internal spanning, threshold scans and
//! extremal vacant crossings.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, SpinConfig};
use crate::rng::stream;
use crate::topology::Rectangle;

/// One synchronous application of `T`: every occupied site whose constraint
/// holds in `config` is emptied.
pub fn bootstrap_step(model: &ModelSpec, config: &SpinConfig) -> Result<SpinConfig> {
    model.require_zero_one()?;
    check_len(model, config)?;
    let mut out = config.clone();
    for x in 0..config.len() {
        if config.get(x) && model.constraint(config, x) {
            out.set(x, false);
        }
    }
    Ok(out)
}

/// Fixed point of `T` reached from `config`.
///
/// Constraints only grow as sites empty, so emptying one site at a time in
/// any order reaches the same fixed point as the synchronous iteration.
pub fn closure(model: &ModelSpec, config: &SpinConfig) -> Result<SpinConfig> {
    model.require_zero_one()?;
    check_len(model, config)?;
    let mut c = config.clone();
    empty_from(model, &mut c, |_| true);
    Ok(c)
}

/// Number of synchronous sweeps of `T` before the configuration stops
/// changing, together with the fixed point.
pub fn closure_sweeps(model: &ModelSpec, config: &SpinConfig) -> Result<(SpinConfig, usize)> {
    let mut c = config.clone();
    let mut sweeps = 0;
    loop {
        let next = bootstrap_step(model, &c)?;
        if next == c {
            return Ok((c, sweeps));
        }
        c = next;
        sweeps += 1;
    }
}

/// `true` when the region can be emptied from inside: the closure of
/// `config` on `region`, with every other vertex held occupied and frozen,
/// vacates all of `region`.
pub fn internally_spanned(model: &ModelSpec, region: &[usize], config: &SpinConfig) -> Result<bool> {
    model.require_zero_one()?;
    check_len(model, config)?;
    let n = model.len();
    let mut inside = vec![false; n];
    for &x in region {
        if x >= n {
            return Err(Error::VertexOutOfRange { vertex: x, len: n });
        }
        inside[x] = true;
    }
    let mut c = SpinConfig::ones(n);
    for &x in region {
        c.set(x, config.get(x));
    }
    empty_from(model, &mut c, |x| inside[x]);
    Ok(region.iter().all(|&x| !c.get(x)))
}

fn check_len(model: &ModelSpec, config: &SpinConfig) -> Result<()> {
    if config.len() != model.len() {
        return Err(Error::Mismatch(format!(
            "configuration has {} sites, model has {}",
            config.len(),
            model.len()
        )));
    }
    Ok(())
}

/// Work-queue closure restricted to vertices accepted by `active`.
fn empty_from(model: &ModelSpec, c: &mut SpinConfig, active: impl Fn(usize) -> bool) {
    let n = c.len();
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    for x in 0..n {
        if c.get(x) && active(x) {
            queued[x] = true;
            queue.push_back(x);
        }
    }
    while let Some(x) = queue.pop_front() {
        queued[x] = false;
        if !c.get(x) || !model.constraint(&*c, x) {
            continue;
        }
        c.set(x, false);
        for &y in model.dependents(x) {
            let y = y as usize;
            if c.get(y) && !queued[y] && active(y) {
                queued[y] = true;
                queue.push_back(y);
            }
        }
    }
}

/// Emptying frequency at one `(size, q)` grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub size: usize,
    pub q: f64,
    pub samples: usize,
    pub emptied: usize,
}

impl FrequencyRow {
    pub fn fraction(&self) -> f64 {
        self.emptied as f64 / self.samples as f64
    }

    /// Binomial standard error of [`FrequencyRow::fraction`].
    pub fn stderr(&self) -> f64 {
        let f = self.fraction();
        (f * (1.0 - f) / self.samples as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    pub q_bp: f64,
    pub lo: f64,
    pub hi: f64,
    /// Rows in grid order: sizes as given, `q` ascending within each size.
    pub rows: Vec<FrequencyRow>,
    pub seed: u64,
    /// `false` when the largest size never crosses frequency 1/2 inside the
    /// grid; the estimate is then clamped to the grid edge.
    pub bracketed: bool,
}

/// Scans emptying frequencies of i.i.d. vacancy samples.
///
/// `family(size)` builds the model at each size; only its constraints are
/// used. Sample `k` at a given size draws one uniform `u_x` per site and
/// declares `x` vacant when `u_x < q`, so the samples are coupled across the
/// whole `q` grid and the frequencies are monotone in `q`.
pub fn estimate_qbp<F>(
    family: F,
    sizes: &[usize],
    q_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ThresholdEstimate>
where
    F: Fn(usize) -> Result<ModelSpec> + Sync,
{
    if sizes.is_empty() || q_grid.is_empty() || samples == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut qs = q_grid.to_vec();
    if qs.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(Error::InvalidParams("q grid must lie in [0, 1]".into()));
    }
    qs.sort_by(f64::total_cmp);
    qs.dedup();

    let mut rows = Vec::new();
    for &size in sizes {
        let model = family(size)?;
        model.require_zero_one()?;
        // index of the smallest q at which sample k empties (qs.len() if none)
        let first_emptying: Vec<usize> = (0..samples as u64)
            .into_par_iter()
            .map(|k| {
                let u: Vec<f64> = {
                    let mut rng = stream(seed, k, size as u64);
                    (0..model.len()).map(|_| rng.random::<f64>()).collect()
                };
                let empties = |q: f64| {
                    let mut c = SpinConfig::zeros(model.len());
                    for (x, &ux) in u.iter().enumerate() {
                        c.set(x, ux >= q);
                    }
                    empty_from(&model, &mut c, |_| true);
                    c.is_all_zero()
                };
                // emptying is monotone in q for a fixed sample
                let (mut lo, mut hi) = (0, qs.len());
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if empties(qs[mid]) {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                lo
            })
            .collect();
        for (i, &q) in qs.iter().enumerate() {
            let emptied = first_emptying.iter().filter(|&&f| f <= i).count();
            rows.push(FrequencyRow { size, q, samples, emptied });
        }
    }

    let largest = *sizes.iter().max().unwrap();
    let curve: Vec<&FrequencyRow> = rows.iter().filter(|r| r.size == largest).collect();
    let (q_bp, lo, hi, bracketed) = half_crossing(&curve);
    Ok(ThresholdEstimate { q_bp, lo, hi, rows, seed, bracketed })
}

/// Linear interpolation of the frequency-1/2 crossing; the interval is the
/// binomial error at the crossing divided by the local slope.
fn half_crossing(curve: &[&FrequencyRow]) -> (f64, f64, f64, bool) {
    let first = curve[0];
    let last = curve[curve.len() - 1];
    if first.fraction() >= 0.5 {
        return (first.q, 0.0, first.q, false);
    }
    if last.fraction() < 0.5 {
        return (last.q, last.q, 1.0, false);
    }
    let i = curve.iter().position(|r| r.fraction() >= 0.5).unwrap();
    let (a, b) = (curve[i - 1], curve[i]);
    let (fa, fb) = (a.fraction(), b.fraction());
    let t = (0.5 - fa) / (fb - fa);
    let q = a.q + t * (b.q - a.q);
    let slope = (fb - fa) / (b.q - a.q);
    let sigma = (0.25 / a.samples as f64).sqrt();
    let half_width = (sigma / slope).max(b.q - a.q);
    (q, (q - half_width).max(0.0), (q + half_width).min(1.0), true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    TopBottom,
    LeftRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremality {
    Rightmost,
    Lowermost,
}

/// A vacant nearest-neighbor path between opposite faces of a rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    /// Vertex indices in the rectangle's order; top to bottom or left to
    /// right.
    pub path: Vec<usize>,
    pub direction: CrossingDirection,
    pub extremality: Extremality,
}

/// Extremal vacant crossing of a 2-d rectangle: the rightmost top-bottom
/// crossing or the lowermost left-right one.
///
/// Axis 0 is horizontal and axis 1 vertical with the top face at the largest
/// coordinate. `config` is indexed like [`Rectangle::points`].
pub fn find_crossing(
    config: &SpinConfig,
    rect: &Rectangle,
    direction: CrossingDirection,
) -> Result<Option<Crossing>> {
    if rect.dim() != 2 {
        return Err(Error::UnsupportedTopology(format!(
            "crossings need a 2-d rectangle, got dimension {}",
            rect.dim()
        )));
    }
    if config.len() != rect.len() {
        return Err(Error::Mismatch(format!(
            "configuration has {} sites, rectangle has {}",
            config.len(),
            rect.len()
        )));
    }
    let (w, h) = (rect.side(0) as i64, rect.side(1) as i64);
    let index = |x: i64, y: i64| (x + y * w) as usize;
    let path = match direction {
        CrossingDirection::TopBottom => {
            rightmost_top_bottom(w, h, |x, y| !config.get(index(x, y)))
                .map(|p| p.into_iter().map(|(x, y)| index(x, y)).collect())
        }
        // reflect so that the left face becomes the top and the bottom face
        // becomes the right one
        CrossingDirection::LeftRight => {
            rightmost_top_bottom(h, w, |x, y| !config.get(index(w - 1 - y, h - 1 - x)))
                .map(|p| p.into_iter().map(|(x, y)| index(w - 1 - y, h - 1 - x)).collect())
        }
    };
    let extremality = match direction {
        CrossingDirection::TopBottom => Extremality::Rightmost,
        CrossingDirection::LeftRight => Extremality::Lowermost,
    };
    Ok(path.map(|path| Crossing { path, direction, extremality }))
}

/// Left-hand wall follower on a `w × h` grid, entering from a virtual row
/// above the top face at its east end and heading west, so the followed wall
/// is the east face together with every occupied site attached to it. The
/// trace is loop-erased and starts at its last top-row site.
fn rightmost_top_bottom(
    w: i64,
    h: i64,
    vacant: impl Fn(i64, i64) -> bool,
) -> Option<Vec<(i64, i64)>> {
    // headings: 0 = north, 1 = east, 2 = south, 3 = west
    const STEP: [(i64, i64); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
    let passable = |x: i64, y: i64| {
        if x < 0 || x >= w || y < 0 {
            false
        } else if y == h {
            true
        } else if y > h {
            false
        } else {
            vacant(x, y)
        }
    };
    let (mut x, mut y, mut heading) = (w - 1, h, 3usize);
    let mut trace: Vec<(i64, i64)> = Vec::new();
    let mut seen: HashMap<(i64, i64), usize> = HashMap::new();
    let cap = 16 * (w + 1) * (h + 1) + 16;
    for _ in 0..cap {
        // try left, straight, right, back
        let mut moved = false;
        for turn in [3usize, 0, 1, 2] {
            let d = (heading + turn) % 4;
            let (nx, ny) = (x + STEP[d].0, y + STEP[d].1);
            if y == h && ny == h && nx < 0 {
                return None;
            }
            if passable(nx, ny) {
                x = nx;
                y = ny;
                heading = d;
                moved = true;
                break;
            }
        }
        if !moved {
            return None;
        }
        if y == h {
            trace.clear();
            seen.clear();
            continue;
        }
        if let Some(&i) = seen.get(&(x, y)) {
            for p in trace.drain(i + 1..) {
                seen.remove(&p);
            }
        } else {
            seen.insert((x, y), trace.len());
            trace.push((x, y));
        }
        if y == 0 {
            let start = trace.iter().rposition(|&(_, ty)| ty == h - 1).unwrap_or(0);
            return Some(trace.split_off(start));
        }
    }
    unreachable!("wall follower exceeded its step bound")
}
