//! Exact event-driven simulation of the counter model and its sub-models.
//!
//! Daughter type-1 mutations arrive as one homogeneous Poisson stream of rate
//! `v1 (N - 1)` over the whole population. Each arrival founds a clone whose
//! type-2 time is drawn by inverting the clone's piecewise-linear cumulative
//! hazard, so no per-cell state is ever materialized. The stem cell
//! contributes its own two candidates: a stem type-2 and a hit on the front
//! of daughters that inherited the stem's type-1 mutation.

mod exposure;
mod sampling;
mod simulate;

pub use exposure::{
    clone_exposure, clone_total_exposure, delta_to_next_split, invert_clone_exposure,
    invert_stem_lineage_exposure, splits_between, stem_lineage_exposure,
};
pub use sampling::{
    clone_type2_from_draw, generation_from_uniform, sample_clone_type2, sample_stem_events, sample_type1_generation,
    StemEvent,
};
pub use simulate::{simulate_coupled, simulate_fast, simulate_fast_with, CoupledOutcome, FastOptions};
