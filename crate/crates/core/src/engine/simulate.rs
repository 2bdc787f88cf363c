use serde::{Deserialize, Serialize};

use super::exposure::{
    clone_exposure_unchecked, clone_total_exposure, delta_to_next_split, invert_clone_exposure, splits_between,
};
use super::sampling::{clone_type2_from_draw, draw_stem, generation_from_uniform, StemDraws, StemEvent};
use crate::error::SimError;
use crate::model::{validate_config, CryptConfig, Location, Path, RngStream, SimOutcome, Status, Variant};

// Child streams of a replicate stream.
const STEM_STREAM: u64 = 0;
const ARRIVAL_STREAM: u64 = 1;
const CELL_STREAM: u64 = 2;

/// Knobs for [`simulate_fast_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FastOptions {
    /// Stop generating daughter type-1 arrivals once they start after the best
    /// candidate found so far. Disabling it runs arrivals out to `max_time`.
    pub stopping_rule: bool,
}

impl Default for FastOptions {
    fn default() -> Self {
        FastOptions { stopping_rule: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Winner {
    None,
    Stem(StemEvent),
    Clone {
        time: f64,
        birth: f64,
        generation: u32,
        hit_generation: u32,
    },
}

impl Winner {
    fn time(&self) -> f64 {
        match *self {
            Winner::None => f64::INFINITY,
            Winner::Stem(ev) => ev.time,
            Winner::Clone { time, .. } => time,
        }
    }

    fn offer(&mut self, other: Winner) {
        if other.time() < self.time() {
            *self = other;
        }
    }

    fn outcome(&self, l: u32, horizon: f64, stem_type1_time: f64) -> SimOutcome {
        let tau = self.time();
        let stem_t1 = stem_type1_time.is_finite().then_some(stem_type1_time);
        if !(tau <= horizon) {
            return SimOutcome::timed_out(horizon, stem_t1);
        }
        match *self {
            Winner::None => unreachable!("infinite tau within horizon"),
            Winner::Stem(ev) => SimOutcome {
                status: Status::Type2Occurred,
                tau,
                sigma: Some(Location::stem(l)),
                rho: Some(Location::new(ev.generation, l)),
                path: Some(ev.kind),
                stem_type1_time: stem_t1,
                cancer_type1_time: stem_t1,
            },
            Winner::Clone {
                birth,
                generation,
                hit_generation,
                ..
            } => SimOutcome {
                status: Status::Type2Occurred,
                tau,
                sigma: Some(Location::new(generation, l)),
                rho: Some(Location::new(hit_generation, l)),
                path: Some(Path::Dd),
                stem_type1_time: stem_t1.filter(|&t| t <= tau),
                cancer_type1_time: Some(birth),
            },
        }
    }
}

fn stem_winner(draws: &StemDraws, variant: Variant) -> Winner {
    let mut w = Winner::None;
    if matches!(variant, Variant::H2 | Variant::M3) {
        if let Some(ev) = draws.ss {
            w.offer(Winner::Stem(ev));
        }
    }
    if matches!(variant, Variant::H2 | Variant::M2) {
        if let Some(ev) = draws.sd {
            w.offer(Winner::Stem(ev));
        }
    }
    w
}

/// In the counter model a daughter type-1 mark is discarded when it lands
/// inside the stem-inherited front (generations `1..=m` after `m` splits).
fn inside_front(stem_type1_time: f64, t: f64, generation: u32, l: u32) -> bool {
    stem_type1_time < t && u64::from(generation) <= splits_between(stem_type1_time, t).min(u64::from(l))
}

/// One daughter type-1 arrival.
#[derive(Debug, Clone, Copy)]
struct Arrival {
    time: f64,
    generation: u32,
    /// Unit-exponential draw setting the clone's type-2 hit.
    draw: f64,
}

struct Arrivals {
    stream: RngStream,
    rate: f64,
    l: u32,
    t: f64,
}

impl Arrivals {
    fn new(stream: RngStream, rate: f64, l: u32) -> Self {
        Arrivals { stream, rate, l, t: 0.0 }
    }

    /// Next arrival if it starts no later than `limit`.
    fn next_before(&mut self, limit: f64) -> Option<Arrival> {
        if !(self.rate > 0.0) {
            return None;
        }
        self.t += self.stream.exponential(self.rate);
        if self.t > limit {
            return None;
        }
        let generation = generation_from_uniform(self.l, self.stream.uniform());
        let draw = self.stream.exp1();
        Some(Arrival {
            time: self.t,
            generation,
            draw,
        })
    }
}

fn clone_winner(l: u32, v2: f64, a: &Arrival) -> Winner {
    let delta = delta_to_next_split(a.time);
    match clone_type2_from_draw(l, a.generation, delta, v2, a.draw) {
        Some((s, hit_generation)) => Winner::Clone {
            time: a.time + s,
            birth: a.time,
            generation: a.generation,
            hit_generation,
        },
        None => Winner::None,
    }
}

/// Event-driven simulation of `variant` (one of H2, M1, M2, M3) without
/// per-cell state.
pub fn simulate_fast(config: &CryptConfig, variant: Variant, stream: &RngStream) -> Result<SimOutcome, SimError> {
    simulate_fast_with(config, variant, stream, FastOptions::default())
}

pub fn simulate_fast_with(
    config: &CryptConfig,
    variant: Variant,
    stream: &RngStream,
    options: FastOptions,
) -> Result<SimOutcome, SimError> {
    if variant == Variant::H1 {
        return Err(SimError::UnsupportedVariant(variant));
    }
    let config = validate_config(config, variant)?;
    let horizon = config.horizon();
    if !options.stopping_rule && !horizon.is_finite() {
        return Err(SimError::UnboundedExhaustiveRun);
    }
    let l = config.l;
    let rates = config.rates_for(variant);
    let draws = draw_stem(l, &rates, &mut stream.split(STEM_STREAM));
    let mut best = stem_winner(&draws, variant);

    let mut arrivals = Arrivals::new(stream.split(ARRIVAL_STREAM), rates.v1 * config.daughters() as f64, l);
    loop {
        let limit = if options.stopping_rule {
            best.time().min(horizon)
        } else {
            horizon
        };
        let Some(a) = arrivals.next_before(limit) else { break };
        if variant == Variant::H2 && inside_front(draws.type1_time, a.time, a.generation, l) {
            continue;
        }
        best.offer(clone_winner(l, rates.v2, &a));
    }
    Ok(best.outcome(l, horizon, draws.type1_time))
}

/// Outcomes of the counter model and its three sub-models driven by shared
/// randomness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledOutcome {
    pub h2: SimOutcome,
    pub m1: SimOutcome,
    pub m2: SimOutcome,
    pub m3: SimOutcome,
}

impl CoupledOutcome {
    /// Whether `tau(h2) == min(tau(m1), tau(m2), tau(m3))` holds exactly.
    pub fn decomposition_holds(&self) -> bool {
        self.h2.tau == self.m1.tau.min(self.m2.tau).min(self.m3.tau)
    }
}

/// Daughter type-1 mark discarded by the counter model because it hit the
/// stem-inherited front, tracked by cell so the daughter-only model can share
/// the front's type-2 marks.
#[derive(Debug, Clone, Copy)]
struct FrontClone {
    birth: f64,
    generation: u32,
    index: u64,
}

impl FrontClone {
    /// Whether the cell `(generation, index)` at time `t` descends from this
    /// clone's founding cell.
    fn covers(&self, t: f64, generation: u32, index: u64) -> bool {
        if t < self.birth {
            return false;
        }
        let splits = splits_between(self.birth, t);
        u64::from(self.generation) + splits == u64::from(generation) && (index >> splits) == self.index
    }
}

/// Runs H2, M1, M2 and M3 on one set of Poisson marks.
///
/// Stem marks are shared by H2, M2 and M3, daughter type-1 marks by H2 and
/// M1, and type-2 marks on the stem-inherited front by H2, M2 and any M1
/// clone founded inside the front. Each sub-model runs until its own type-2
/// or `max_time`, even past the H2 winner. The H2 outcome is identical to
/// [`simulate_fast`] on the same stream.
pub fn simulate_coupled(config: &CryptConfig, stream: &RngStream) -> Result<CoupledOutcome, SimError> {
    let config = validate_config(config, Variant::H2)?;
    let horizon = config.horizon();
    let l = config.l;
    let rates = config.rates_for(Variant::H2);
    let draws = draw_stem(l, &rates, &mut stream.split(STEM_STREAM));
    let mut cells = stream.split(CELL_STREAM);

    // the front's first type-2 mark, pinned to a cell
    let front_hit = draws
        .sd
        .map(|ev| (ev, cells.below(1u64 << (ev.generation - 1))));

    let mut h2 = stem_winner(&draws, Variant::H2);
    let mut m1 = Winner::None;
    let m2 = stem_winner(&draws, Variant::M2);
    let m3 = stem_winner(&draws, Variant::M3);
    let mut front_clones: Vec<FrontClone> = Vec::new();

    let mut arrivals = Arrivals::new(stream.split(ARRIVAL_STREAM), rates.v1 * config.daughters() as f64, l);
    loop {
        let limit = h2.time().max(m1.time()).min(horizon);
        let Some(a) = arrivals.next_before(limit) else { break };
        if !inside_front(draws.type1_time, a.time, a.generation, l) {
            let w = clone_winner(l, rates.v2, &a);
            h2.offer(w);
            m1.offer(w);
            continue;
        }
        let clone = FrontClone {
            birth: a.time,
            generation: a.generation,
            index: cells.below(1u64 << (a.generation - 1)),
        };
        let nested = front_clones
            .iter()
            .any(|outer| outer.covers(clone.birth, clone.generation, clone.index));
        let w = if nested {
            // a second type-1 on the lineage unlocks an independent process
            clone_winner(l, rates.v2, &a)
        } else {
            front_clone_winner(l, rates.v2, &a, &clone, front_hit)
        };
        m1.offer(w);
        front_clones.push(clone);
    }

    let t1 = draws.type1_time;
    Ok(CoupledOutcome {
        h2: h2.outcome(l, horizon, t1),
        m1: m1.outcome(l, horizon, f64::INFINITY),
        m2: m2.outcome(l, horizon, t1),
        m3: m3.outcome(l, horizon, t1),
    })
}

/// First type-2 mark on a clone founded inside the front, given that the
/// front's first mark is `front_hit`. Marks before `front_hit` cannot exist;
/// after it the clone's subtree sees fresh marks.
fn front_clone_winner(
    l: u32,
    v2: f64,
    a: &Arrival,
    clone: &FrontClone,
    front_hit: Option<(StemEvent, u64)>,
) -> Winner {
    let Some((hit, hit_index)) = front_hit.filter(|(hit, _)| hit.time > a.time) else {
        return clone_winner(l, v2, a);
    };
    if clone.covers(hit.time, hit.generation, hit_index) {
        return Winner::Clone {
            time: hit.time,
            birth: a.time,
            generation: a.generation,
            hit_generation: hit.generation,
        };
    }
    let delta = delta_to_next_split(a.time);
    let elapsed = hit.time - a.time;
    let target = clone_exposure_unchecked(l, a.generation, delta, elapsed) + a.draw / v2;
    if target >= clone_total_exposure(l, a.generation, delta) {
        return Winner::None;
    }
    match invert_clone_exposure(l, a.generation, delta, target) {
        Some((s, splits)) => Winner::Clone {
            // never earlier than the front's own first mark
            time: (a.time + s).max(hit.time),
            birth: a.time,
            generation: a.generation,
            hit_generation: a.generation + splits,
        },
        None => Winner::None,
    }
}
