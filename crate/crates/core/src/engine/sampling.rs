use serde::{Deserialize, Serialize};

use super::exposure::{clone_total_exposure, invert_clone_exposure, invert_stem_lineage_exposure};
use crate::model::{Path, Rates, RngStream};

/// Generation `i` of a uniformly chosen daughter among generations `1..=l`,
/// i.e. with probability `2^(i-1) / (2^l - 1)`, from a uniform `u` in (0, 1).
///
/// Inverts the cumulative `(2^i - 1) / (2^l - 1)` in closed form.
pub fn generation_from_uniform(l: u32, u: f64) -> u32 {
    let y = u * ((1u64 << l) - 1) as f64;
    let below = |g: u32| ((1u64 << g) - 1) as f64;
    let mut g = ((y + 1.0).log2().ceil() as i64).clamp(1, i64::from(l)) as u32;
    // float rounding can leave the estimate one off
    while g < l && below(g) < y {
        g += 1;
    }
    while g > 1 && below(g - 1) >= y {
        g -= 1;
    }
    g
}

/// Draws the generation of a daughter type-1 mutation.
pub fn sample_type1_generation(l: u32, stream: &mut RngStream) -> u32 {
    generation_from_uniform(l, stream.uniform())
}

/// A clone's type-2 hit given its unit-exponential draw `e`: the waiting time
/// since birth and the generation hit, or `None` when the clone is swept
/// first.
pub fn clone_type2_from_draw(l: u32, i: u32, delta: f64, v2: f64, e: f64) -> Option<(f64, u32)> {
    if !(v2 > 0.0) || e > v2 * clone_total_exposure(l, i, delta) {
        return None;
    }
    invert_clone_exposure(l, i, delta, e / v2).map(|(s, splits)| (s, i + splits))
}

/// Type-2 hit of a clone born in generation `i` with `delta` time to its
/// first split. Consumes one draw.
pub fn sample_clone_type2(l: u32, i: u32, delta: f64, v2: f64, stream: &mut RngStream) -> Option<(f64, u32)> {
    let e = stream.exp1();
    clone_type2_from_draw(l, i, delta, v2, e)
}

/// Candidate type-2 event seeded by the stem type-1 mutation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StemEvent {
    pub time: f64,
    /// [`Path::Ss`] for a stem type-2, [`Path::Sd`] for a hit on the front.
    pub kind: Path,
    pub generation: u32,
    /// Splits elapsed since the stem type-1 mutation.
    pub splits: u64,
}

/// Raw stem draws. Always four values, so that every variant consumes the
/// stem stream identically.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StemDraws {
    pub type1_time: f64,
    pub ss: Option<StemEvent>,
    pub sd: Option<StemEvent>,
}

pub(crate) fn draw_stem(l: u32, rates: &Rates, stream: &mut RngStream) -> StemDraws {
    let type1_time = stream.exponential(rates.u1);
    let (ss, sd) = stem_events_after(l, rates, type1_time, stream);
    StemDraws { type1_time, ss, sd }
}

fn stem_events_after(l: u32, rates: &Rates, t: f64, stream: &mut RngStream) -> (Option<StemEvent>, Option<StemEvent>) {
    let wait_ss = stream.exponential(rates.u2);
    let e_sd = stream.exp1();
    let u_gen = stream.uniform();
    if !t.is_finite() {
        return (None, None);
    }
    let ss = wait_ss.is_finite().then_some(StemEvent {
        time: t + wait_ss,
        kind: Path::Ss,
        generation: 0,
        splits: 0,
    });
    let sd = if rates.v2 > 0.0 {
        let delta = super::exposure::delta_to_next_split(t);
        invert_stem_lineage_exposure(l, delta, e_sd / rates.v2).map(|(s, splits)| {
            let filled = splits.min(u64::from(l)) as u32;
            StemEvent {
                time: t + s,
                kind: Path::Sd,
                generation: generation_from_uniform(filled, u_gen),
                splits,
            }
        })
    } else {
        None
    };
    (ss, sd)
}

/// Candidate type-2 events after a stem type-1 mutation at time `t`.
///
/// The `ss` candidate is `t + Exp(u2)`; the `sd` candidate inverts the
/// front hazard `v2 * stem_lineage_exposure` and places the hit in
/// generation `j` with probability proportional to `2^(j-1)` among the
/// generations the front has filled.
pub fn sample_stem_events(l: u32, rates: &Rates, t: f64, stream: &mut RngStream) -> Vec<StemEvent> {
    let (ss, sd) = stem_events_after(l, rates, t, stream);
    ss.into_iter().chain(sd).collect()
}
