use super::state::{step_crypt, CellState, CryptState, Origin};
use crate::error::SimError;
use crate::model::{
    generation_of_daughter, validate_config, CryptConfig, Location, Path, Rates, RngStream, SimOutcome, Status,
    Variant,
};

/// Largest `l` accepted without [`OracleOptions::allow_large`].
pub const SOFT_L_LIMIT: u32 = 12;
/// Largest `l` accepted at all.
pub const HARD_L_LIMIT: u32 = 20;

// Child streams of a replicate stream. The stem stream is laid out like the
// fast engine's, so both produce the same stem times.
const STEM_STREAM: u64 = 0;
const MARK_STREAM: u64 = 1;
const EXTRA_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleOptions {
    /// Lift the soft limit on `l` up to [`HARD_L_LIMIT`].
    pub allow_large: bool,
}

/// Per-cell simulation of any variant. H1 uses the rejection rules, every
/// other variant uses counters with its zeroed rates.
pub fn simulate_exact(config: &CryptConfig, variant: Variant, stream: &RngStream) -> Result<SimOutcome, SimError> {
    simulate_exact_with(config, variant, stream, OracleOptions::default())
}

pub fn simulate_exact_with(
    config: &CryptConfig,
    variant: Variant,
    stream: &RngStream,
    options: OracleOptions,
) -> Result<SimOutcome, SimError> {
    let config = validate_config(config, variant)?;
    let limit = if options.allow_large {
        HARD_L_LIMIT
    } else {
        SOFT_L_LIMIT
    };
    if config.l > limit {
        return Err(SimError::ResourceLimit { l: config.l, limit });
    }
    let rules = if variant == Variant::H1 {
        Rules::Rejection
    } else {
        Rules::Counter
    };
    Ok(Run::new(&config, config.rates_for(variant), rules, stream).run())
}

/// H1 and H2 driven by the same marks.
///
/// Every mark is a function of the stream alone, never of the crypt state:
/// stem times come from one child stream, the shared daughter marks from
/// another, and the counter model's extra type-2 processes from a third that
/// H1 never touches. Running both rule sets on the same stream is therefore
/// the coupling itself.
pub fn simulate_coupled_h1_h2(
    config: &CryptConfig,
    stream: &RngStream,
    options: OracleOptions,
) -> Result<(SimOutcome, SimOutcome), SimError> {
    let h1 = simulate_exact_with(config, Variant::H1, stream, options)?;
    let h2 = simulate_exact_with(config, Variant::H2, stream, options)?;
    Ok((h1, h2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rules {
    Rejection,
    Counter,
}

enum Event {
    StemType2,
    StemType1,
    Mark,
    Extra,
}

struct Run {
    l: u32,
    rates: Rates,
    rules: Rules,
    horizon: f64,
    state: CryptState,
    clean: bool,
    t: f64,
    next_split: f64,
    type1_time: f64,
    ss_time: f64,
    marks: RngStream,
    mark_rate: f64,
    next_mark: f64,
    extra: RngStream,
    /// Sum over daughters of `counter - 1`, the number of extra type-2
    /// processes unlocked by repeated type-1 marks.
    extra_weight: u64,
    /// Unit-exponential hazard budget left before the next extra mark.
    extra_budget: f64,
}

impl Run {
    fn new(config: &CryptConfig, rates: Rates, rules: Rules, stream: &RngStream) -> Self {
        let mut stem = stream.split(STEM_STREAM);
        let type1_time = stem.exponential(rates.u1);
        let ss_time = type1_time + stem.exponential(rates.u2);
        let mut marks = stream.split(MARK_STREAM);
        let mark_rate = config.daughters() as f64 * (rates.v1 + rates.v2);
        let next_mark = marks.exponential(mark_rate);
        let mut extra = stream.split(EXTRA_STREAM);
        let extra_budget = extra.exp1();
        Run {
            l: config.l,
            rates,
            rules,
            horizon: config.horizon(),
            state: CryptState::new(config.l),
            clean: true,
            t: 0.0,
            next_split: 1.0,
            type1_time,
            ss_time,
            marks,
            mark_rate,
            next_mark,
            extra,
            extra_weight: 0,
            extra_budget,
        }
    }

    fn extra_rate(&self) -> f64 {
        self.rates.v2 * self.extra_weight as f64
    }

    fn advance(&mut self, to: f64) {
        if self.extra_weight > 0 {
            self.extra_budget -= self.extra_rate() * (to - self.t);
        }
        self.t = to;
    }

    fn next_event(&self) -> (f64, Event) {
        let mut best = (self.ss_time, Event::StemType2);
        if self.state.stem.ty == 0 && self.type1_time < best.0 {
            best = (self.type1_time, Event::StemType1);
        }
        if self.next_mark < best.0 {
            best = (self.next_mark, Event::Mark);
        }
        if self.extra_weight > 0 {
            let te = self.t + self.extra_budget.max(0.0) / self.extra_rate();
            if te < best.0 {
                best = (te, Event::Extra);
            }
        }
        best
    }

    fn run(mut self) -> SimOutcome {
        // with no daughter mutation rates the daughters never matter
        let inert = self.rates.v1 == 0.0 && self.rates.v2 == 0.0;
        loop {
            let (te, event) = self.next_event();
            let skip_splits = self.clean || inert;
            if !skip_splits && self.next_split <= te && self.next_split <= self.horizon {
                self.advance(self.next_split);
                self.state = step_crypt(&self.state);
                self.clean = self.state.is_clean();
                self.extra_weight = self.state.daughters().map(|c| u64::from(c.counter.saturating_sub(1))).sum();
                self.next_split += 1.0;
                continue;
            }
            if !(te <= self.horizon) || te.is_infinite() {
                return SimOutcome::timed_out(self.horizon, self.stem_time(self.horizon));
            }
            self.advance(te);
            if skip_splits {
                // splits of a clean crypt are identities
                self.next_split = self.next_split.max(te.floor() + 1.0);
            }
            let hit = match event {
                Event::StemType2 => Some(self.stem_hit(Path::Ss, 0)),
                Event::StemType1 => {
                    self.state.stem.ty = 1;
                    self.clean = false;
                    None
                }
                Event::Mark => self.mark(),
                Event::Extra => Some(self.extra_hit()),
            };
            if let Some(outcome) = hit {
                return outcome;
            }
        }
    }

    fn stem_time(&self, by: f64) -> Option<f64> {
        (self.type1_time <= by).then_some(self.type1_time)
    }

    fn stem_hit(&self, path: Path, generation: u32) -> SimOutcome {
        SimOutcome {
            status: Status::Type2Occurred,
            tau: self.t,
            sigma: Some(Location::stem(self.l)),
            rho: Some(Location::new(generation, self.l)),
            path: Some(path),
            stem_type1_time: Some(self.type1_time),
            cancer_type1_time: Some(self.type1_time),
        }
    }

    fn daughter_hit(&self, origin: Origin, generation: u32) -> SimOutcome {
        SimOutcome {
            status: Status::Type2Occurred,
            tau: self.t,
            sigma: Some(Location::new(origin.generation, self.l)),
            rho: Some(Location::new(generation, self.l)),
            path: Some(Path::Dd),
            stem_type1_time: self.stem_time(self.t),
            cancer_type1_time: Some(origin.time),
        }
    }

    /// Handles one shared daughter mark; returns the outcome if it is the
    /// first accepted type-2.
    fn mark(&mut self) -> Option<SimOutcome> {
        let is_type1 = self.marks.uniform() * (self.rates.v1 + self.rates.v2) < self.rates.v1;
        let (generation, index) = generation_of_daughter(self.marks.below(daughters(self.l)));
        self.next_mark = self.t + self.marks.exponential(self.mark_rate);
        let t = self.t;
        let rules = self.rules;
        let cell = self.state.cell_mut(generation, index);
        if is_type1 {
            let accept = match rules {
                Rules::Rejection => cell.ty == 0,
                Rules::Counter => !cell.inherited_from_stem,
            };
            if accept {
                cell.ty = 1;
                cell.counter += 1;
                cell.origins.push(Origin { generation, time: t });
                if cell.counter >= 2 {
                    self.extra_weight += 1;
                }
                self.clean = false;
            }
            return None;
        }
        let (ty, inherited, first) = (cell.ty, cell.inherited_from_stem, cell.origins.first().copied());
        if ty == 0 {
            return None;
        }
        if inherited {
            Some(self.stem_hit(Path::Sd, generation))
        } else {
            let origin = first.expect("marked cell has an origin");
            Some(self.daughter_hit(origin, generation))
        }
    }

    /// Fires one of the counter model's extra type-2 processes, chosen with
    /// weight `counter - 1` per cell and then uniformly among that cell's
    /// processes `2..=counter`.
    fn extra_hit(&mut self) -> SimOutcome {
        let mut target = self.extra.below(self.extra_weight);
        let cell: &CellState = self
            .state
            .daughters()
            .find(|c| {
                let w = u64::from(c.counter.saturating_sub(1));
                if target < w {
                    true
                } else {
                    target -= w;
                    false
                }
            })
            .expect("extra weight matches the crypt");
        let n = 2 + self.extra.below(u64::from(cell.counter) - 1) as usize;
        let (origin, generation) = (cell.origins[n - 1], cell.generation);
        self.daughter_hit(origin, generation)
    }
}

fn daughters(l: u32) -> u64 {
    (1u64 << l) - 1
}
