//! Brute-force per-cell simulation of the crypt for small `l`, used as ground
//! truth for the fast engine.

mod simulate;
mod state;

pub use simulate::{
    simulate_coupled_h1_h2, simulate_exact, simulate_exact_with, OracleOptions, HARD_L_LIMIT, SOFT_L_LIMIT,
};
pub use state::{step_crypt, CellState, CryptState, Origin};
