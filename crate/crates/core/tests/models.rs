use crypt_regimes::model::derive_replicate_stream;
use crypt_regimes::oracle::{simulate_coupled_h1_h2, OracleOptions};
use crypt_regimes::stats::{run_ensemble, Engine, EnsembleResult};
use crypt_regimes::{CryptConfig, Variant};

/// Exact law of rho's generation in M2: after the stem's type-1, the `k`-th
/// split leaves `2^k - 1` type-1 daughters spread over generations `1..=k`
/// for one time unit each, then the whole crypt once `k = l`.
fn m2_generation_pmf(l: u32, v2: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; l as usize + 1];
    let mut survive = 1.0;
    for k in 1..=l {
        let cells = ((1u64 << k) - 1) as f64;
        let hit = survive * (1.0 - (-v2 * cells).exp());
        for g in 1..=k {
            pmf[g as usize] += hit * (1u64 << (g - 1)) as f64 / cells;
        }
        survive *= (-v2 * cells).exp();
    }
    let all = ((1u64 << l) - 1) as f64;
    for g in 1..=l {
        pmf[g as usize] += survive * (1u64 << (g - 1)) as f64 / all;
    }
    pmf
}

fn generation_counts(r: &EnsembleResult, l: u32) -> Vec<u64> {
    let mut counts = vec![0u64; l as usize + 1];
    for o in r.outcomes.iter().filter(|o| o.occurred()) {
        counts[o.rho.unwrap().generation as usize] += 1;
    }
    counts
}

#[test]
fn m2_rho_matches_its_exact_law() {
    let l = 10;
    let v2 = (-0.6 * f64::from(l)).exp2();
    let config = CryptConfig::new(l, 1e-3, 0.0, 0.0, v2).with_max_time(None);
    let pmf = m2_generation_pmf(l, v2);
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for (engine, reps) in [(Engine::Fast, 40_000u64), (Engine::Exact, 8_000)] {
        let r = run_ensemble(&config, Variant::M2, engine, reps, 17).unwrap();
        let counts = generation_counts(&r, l);
        let n = r.replicates as f64;
        for g in 1..=l as usize {
            let p = pmf[g];
            let se = (p * (1.0 - p) / n).sqrt();
            let observed = counts[g] as f64 / n;
            assert!((observed - p).abs() <= 4.0 * se + 1e-4, "{engine} generation {g}: {observed} vs {p}");
        }
    }
}

#[test]
fn depth_bound_holds_on_the_exact_simulator() {
    let l = 6;
    let n = 2f64.powi(6);
    let config = CryptConfig::new(l, 0.0, 0.0, n.powf(-1.2), n.powf(-0.5)).with_max_time(None);
    let r = run_ensemble(&config, Variant::M1, Engine::Exact, 5_000, 23).unwrap();
    let total = r.rho.len() as f64;
    for k in 1..l {
        let cut = f64::from(l - k) / f64::from(l);
        let p = r.rho.iter().filter(|&&x| x >= cut).count() as f64 / total;
        let se = (p * (1.0 - p) / total).sqrt();
        assert!(p >= 1.0 - (-f64::from(k)).exp2() - 3.0 * se, "k={k}: {p}");
    }
}

fn coupling_disagreement(config: &CryptConfig, seeds: u64) -> f64 {
    let differ = (0..seeds)
        .filter(|&s| {
            let (h1, h2) = simulate_coupled_h1_h2(config, &derive_replicate_stream(5, s), OracleOptions::default()).unwrap();
            h1.tau != h2.tau
        })
        .count();
    differ as f64 / seeds as f64
}

#[test]
fn rejection_and_counter_models_mostly_agree() {
    let config = CryptConfig::new(6, 0.001, 0.001, 0.01, 0.01);
    let disagree = coupling_disagreement(&config, 10_000);
    assert!(1.0 - disagree >= 0.95, "agreement {}", 1.0 - disagree);
}

#[test]
fn disagreement_shrinks_with_the_type1_rate() {
    let rates = [0.04, 0.01, 0.0025];
    let fractions: Vec<f64> = rates
        .iter()
        .map(|&v1| coupling_disagreement(&CryptConfig::new(6, 0.001, 0.001, v1, 0.04), 4_000))
        .collect();
    assert!(fractions.windows(2).all(|w| w[1] < w[0]), "{fractions:?}");
    assert!(fractions[2] < 0.02, "{fractions:?}");
}
