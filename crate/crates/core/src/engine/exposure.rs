//! Piecewise-linear cumulative exposures (cell-time) of a daughter clone and
//! of the stem-inherited front, with closed-form inverses.
//!
//! A clone born in generation `i` at `delta` time units before the next split
//! is a single cell on `[0, delta)`, then `2^j` cells on
//! `[delta + j - 1, delta + j)` for `j = 1..=l-i`, and is swept afterwards.
//! The stem front holds no cells until the first split after the stem type-1
//! mutation, then `min(2^m - 1, N - 1)` cells during its `m`-th unit.

use crate::error::StructureError;
use crate::model::MAX_L;

fn pow2(k: u32) -> f64 {
    (1u64 << k) as f64
}

fn check_clone_args(l: u32, i: u32, delta: f64) -> Result<(), StructureError> {
    if l == 0 || l > MAX_L || i == 0 || i > l {
        return Err(StructureError::GenerationOutOfRange { l, k: i });
    }
    check_delta(delta)
}

fn check_delta(delta: f64) -> Result<(), StructureError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(StructureError::ArgumentOutOfRange { name: "delta", value: delta });
    }
    Ok(())
}

fn check_time(s: f64) -> Result<(), StructureError> {
    if !(s >= 0.0) {
        return Err(StructureError::ArgumentOutOfRange { name: "s", value: s });
    }
    Ok(())
}

/// Time from `t` to the next split; a full unit when `t` is itself a split
/// time.
pub fn delta_to_next_split(t: f64) -> f64 {
    let c = t.ceil();
    if c == t {
        1.0
    } else {
        c - t
    }
}

/// Number of splits in `(from, to]`.
pub fn splits_between(from: f64, to: f64) -> u64 {
    if to <= from {
        0
    } else {
        (to.floor() - from.floor()) as u64
    }
}

/// Total exposure of a clone, `delta + 2^(l-i+1) - 2`.
pub fn clone_total_exposure(l: u32, i: u32, delta: f64) -> f64 {
    delta + ((1u64 << (l - i + 1)) - 2) as f64
}

/// Integral of the clone size over `[0, s]` after its birth.
pub fn clone_exposure(l: u32, i: u32, delta: f64, s: f64) -> Result<f64, StructureError> {
    check_clone_args(l, i, delta)?;
    check_time(s)?;
    Ok(clone_exposure_unchecked(l, i, delta, s))
}

pub(crate) fn clone_exposure_unchecked(l: u32, i: u32, delta: f64, s: f64) -> f64 {
    if s <= delta {
        return s;
    }
    let doublings = l - i;
    let r = s - delta;
    if r >= doublings as f64 {
        return clone_total_exposure(l, i, delta);
    }
    let k = r.floor() as u32;
    delta + (pow2(k + 1) - 2.0) + pow2(k + 1) * (r - k as f64)
}

/// Solves `clone_exposure(s) = x` for `0 <= x < total`.
///
/// Returns the time since birth and the number of splits the clone has been
/// through at that time (so the hit lands in generation `i + splits`).
pub fn invert_clone_exposure(l: u32, i: u32, delta: f64, x: f64) -> Option<(f64, u32)> {
    if !(x >= 0.0) || x >= clone_total_exposure(l, i, delta) {
        return None;
    }
    if x < delta {
        return Some((x, 0));
    }
    let doublings = l - i;
    // doublings >= 1 here, otherwise x < total = delta
    let y = x - delta;
    let mut k = ((y + 2.0).log2().floor() as i64 - 1).clamp(0, doublings as i64 - 1) as u32;
    while k + 1 < doublings && pow2(k + 2) - 2.0 <= y {
        k += 1;
    }
    while k > 0 && pow2(k + 1) - 2.0 > y {
        k -= 1;
    }
    let s = delta + k as f64 + (y - (pow2(k + 1) - 2.0)) / pow2(k + 1);
    Some((s, k + 1))
}

/// Number of type-1 daughters in the stem front during its `m`-th unit.
fn front_count(l: u32, m: u64) -> f64 {
    if m >= u64::from(l) {
        pow2(l) - 1.0
    } else {
        pow2(m as u32) - 1.0
    }
}

/// Exposure accumulated by the front over its first `k` complete units.
fn front_cumulative(l: u32, k: u64) -> f64 {
    if k <= u64::from(l) {
        pow2(k as u32 + 1) - 2.0 - k as f64
    } else {
        front_cumulative(l, u64::from(l)) + (pow2(l) - 1.0) * (k - u64::from(l)) as f64
    }
}

/// Integral of the stem-front size over `[0, s]` after the stem type-1 time.
pub fn stem_lineage_exposure(l: u32, delta: f64, s: f64) -> Result<f64, StructureError> {
    if l == 0 || l > MAX_L {
        return Err(StructureError::GenerationOutOfRange { l, k: 0 });
    }
    check_delta(delta)?;
    check_time(s)?;
    Ok(stem_lineage_exposure_unchecked(l, delta, s))
}

pub(crate) fn stem_lineage_exposure_unchecked(l: u32, delta: f64, s: f64) -> f64 {
    if s <= delta {
        return 0.0;
    }
    if s.is_infinite() {
        return f64::INFINITY;
    }
    let r = s - delta;
    let k = r.floor() as u64;
    front_cumulative(l, k) + front_count(l, k + 1) * (r - k as f64)
}

/// Solves `stem_lineage_exposure(s) = x` for `x > 0`.
///
/// Returns the time since the stem type-1 mutation and the number of splits
/// elapsed since then (at least 1).
pub fn invert_stem_lineage_exposure(l: u32, delta: f64, x: f64) -> Option<(f64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let full = front_cumulative(l, u64::from(l));
    let k = if x >= full {
        let mut k = u64::from(l) + ((x - full) / (pow2(l) - 1.0)).floor() as u64;
        while front_cumulative(l, k) > x {
            k -= 1;
        }
        while front_cumulative(l, k + 1) <= x {
            k += 1;
        }
        k
    } else {
        // cumulative is 2^(k+1) - 2 - k, within a factor of two of 2^(k+1)
        let mut k = ((x + 2.0).log2().floor() as i64 - 1).clamp(0, i64::from(l) - 1) as u64;
        while k < u64::from(l) && front_cumulative(l, k + 1) <= x {
            k += 1;
        }
        while k > 0 && front_cumulative(l, k) > x {
            k -= 1;
        }
        k
    };
    let s = delta + k as f64 + (x - front_cumulative(l, k)) / front_count(l, k + 1);
    Some((s, k + 1))
}
