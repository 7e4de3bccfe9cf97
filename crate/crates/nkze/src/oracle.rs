//! Independent recomputation of fitness from first principles, and the
//! verification suite built on it.
//!
//! Everything here re-derives interaction structure, row indices, and
//! contribution values from the landscape seed alone, through code paths
//! written separately from [`crate::landscape`]. Do not refactor the two
//! modules to share helpers: a bug in either side must surface as a
//! mismatch, not vanish into common code.

use crate::bits::BitString;
use crate::engine;
use crate::landscape::{pack_index, Landscape, LandscapeConfig};
use crate::population::{Population, Role, TurnAction};
use crate::standard;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str) -> Self {
        CheckResult {
            name,
            passed: true,
            detail: String::new(),
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: false,
            detail,
        }
    }
}

// --- independent re-derivation -------------------------------------------
// Mirrors the documented generation contract with its own code.

fn scramble(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

fn draw_below(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    let wide = rng.next_u64() as u128 * bound as u128;
    (wide >> 64) as usize
}

fn pick_distinct(rng: &mut ChaCha8Rng, mut candidates: Vec<usize>, count: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(count);
    for step in 0..count {
        let offset = draw_below(rng, candidates.len() - step);
        candidates.swap(step, step + offset);
        chosen.push(candidates[step]);
    }
    chosen
}

/// Neighbor lists re-derived from the seed: per locus, the coupled search
/// loci and shape bits in sampled order.
pub fn rederive_neighbors(cfg: &LandscapeConfig) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut search = Vec::with_capacity(cfg.n);
    let mut shape = Vec::with_capacity(cfg.n);
    for locus in 0..cfg.n {
        let others: Vec<usize> = (0..cfg.n).filter(|&j| j != locus).collect();
        search.push(pick_distinct(&mut rng, others, cfg.k));
        shape.push(pick_distinct(&mut rng, (0..cfg.z).collect(), cfg.e));
    }
    (search, shape)
}

fn variate(seed: u64, locus: u64, row: u64) -> f64 {
    let mut h = seed;
    h = scramble(h ^ scramble(locus.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    h = scramble(h ^ scramble(row.wrapping_add(0xd1b5_4a32_d192_ed03)));
    (h >> 11) as f64 / 9_007_199_254_740_992.0 // 2^53
}

fn evaluate_with_lists(
    cfg: &LandscapeConfig,
    search: &[Vec<usize>],
    shape: &[Vec<usize>],
    g: &BitString,
    e: &BitString,
) -> f64 {
    let mut total = 0.0;
    for locus in 0..cfg.n {
        let mut digits: Vec<bool> = vec![g.get(locus)];
        digits.extend(search[locus].iter().map(|&j| g.get(j)));
        digits.extend(shape[locus].iter().map(|&j| e.get(j)));
        let mut row: u64 = 0;
        for d in digits {
            row = row * 2 + d as u64;
        }
        total += variate(cfg.seed, locus as u64, row);
    }
    total / cfg.n as f64
}

/// Fitness recomputed from scratch: neighbor lists from the seed, the bit
/// tuple assembled digit by digit, values from the counter hash, mean of
/// the N contributions.
pub fn evaluate_from_scratch(cfg: &LandscapeConfig, g: &BitString, e: &BitString) -> f64 {
    let (search, shape) = rederive_neighbors(cfg);
    evaluate_with_lists(cfg, &search, &shape, g, e)
}

/// Local optima counted through the independent evaluation path.
pub fn count_local_optima_from_scratch(cfg: &LandscapeConfig, e: &BitString) -> usize {
    let (search, shape) = rederive_neighbors(cfg);
    let mut count = 0;
    for value in 0..1u64 << cfg.n {
        let g = BitString::from_index(value, cfg.n);
        let f = evaluate_with_lists(cfg, &search, &shape, &g, e);
        let optimum =
            (0..cfg.n).all(|i| f > evaluate_with_lists(cfg, &search, &shape, &g.flipped(i), e));
        if optimum {
            count += 1;
        }
    }
    count
}

/// Exhaustive equality of `Landscape::evaluate` against the independent
/// recomputation over every `(g, e)` pair. Returns the first mismatch.
pub fn exhaustive_equivalence(cfg: &LandscapeConfig) -> Result<(), String> {
    let landscape = Landscape::generate(*cfg).map_err(|e| e.to_string())?;
    let (search, shape) = rederive_neighbors(cfg);
    for ev in 0..1u64 << cfg.z {
        let e = BitString::from_index(ev, cfg.z);
        for gv in 0..1u64 << cfg.n {
            let g = BitString::from_index(gv, cfg.n);
            let direct = landscape.evaluate(&g, &e);
            let scratch = evaluate_with_lists(cfg, &search, &shape, &g, &e);
            if direct.to_bits() != scratch.to_bits() {
                return Err(format!(
                    "mismatch at seed={} N={} K={} Z={} E={} g={g} e={e}: {direct} vs {scratch}",
                    cfg.seed, cfg.n, cfg.k, cfg.z, cfg.e
                ));
            }
        }
    }
    Ok(())
}

// --- verification suite ---------------------------------------------------

fn check_packing() -> CheckResult {
    let name = "index packing";
    let bits = |s: &str| -> Vec<bool> { s.chars().map(|c| c == '1').collect() };
    if pack_index(false, &bits("110"), &[]) != 6 {
        return CheckResult::fail(name, "4-bit example did not pack to 6".into());
    }
    if pack_index(false, &bits("101"), &bits("010")) != 42 {
        return CheckResult::fail(name, "7-bit example did not pack to 42".into());
    }
    // Bijection over every 7-bit tuple.
    let mut seen = [false; 128];
    for v in 0..128u64 {
        let t = BitString::from_index(v, 7);
        let tuple: Vec<bool> = t.iter().collect();
        let row = pack_index(tuple[0], &tuple[1..4], &tuple[4..]) as usize;
        if row >= 128 || seen[row] {
            return CheckResult::fail(name, format!("packing not bijective at tuple {t}"));
        }
        seen[row] = true;
    }
    CheckResult::pass(name)
}

fn check_equivalence(seed: u64) -> CheckResult {
    let name = "fitness equivalence (exhaustive)";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for probe in 0..5 {
        let n = rng.gen_range(2..=6);
        let cfg = LandscapeConfig {
            n,
            k: rng.gen_range(0..n),
            z: rng.gen_range(0..=4),
            e: 0,
            seed: rng.gen(),
        };
        let cfg = LandscapeConfig {
            e: rng.gen_range(0..=cfg.z),
            ..cfg
        };
        if let Err(detail) = exhaustive_equivalence(&cfg) {
            return CheckResult::fail(name, format!("probe {probe}: {detail}"));
        }
    }
    CheckResult::pass(name)
}

fn check_equivalence_sampled(seed: u64) -> CheckResult {
    let name = "fitness equivalence (sampled, full size)";
    let cfg = LandscapeConfig {
        n: 12,
        k: 5,
        z: 12,
        e: 6,
        seed,
    };
    let landscape = match Landscape::generate(cfg) {
        Ok(l) => l,
        Err(e) => return CheckResult::fail(name, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    for _ in 0..500 {
        let g = BitString::random(12, &mut rng);
        let e = BitString::random(12, &mut rng);
        let direct = landscape.evaluate(&g, &e);
        let scratch = evaluate_from_scratch(&cfg, &g, &e);
        if direct.to_bits() != scratch.to_bits() {
            return CheckResult::fail(
                name,
                format!("seed={seed} g={g} e={e}: {direct} vs {scratch}"),
            );
        }
    }
    CheckResult::pass(name)
}

fn check_determinism(seed: u64) -> CheckResult {
    let name = "landscape determinism";
    let cfg = LandscapeConfig {
        n: 6,
        k: 3,
        z: 6,
        e: 3,
        seed,
    };
    let a = match Landscape::generate(cfg) {
        Ok(l) => l,
        Err(e) => return CheckResult::fail(name, e.to_string()),
    };
    let b = Landscape::generate(cfg).expect("validated config");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd00d);
    for _ in 0..1000 {
        let i = rng.gen_range(0..6);
        let g = BitString::random(6, &mut rng);
        let e = BitString::random(6, &mut rng);
        if a.contribution(i, &g, &e).to_bits() != b.contribution(i, &g, &e).to_bits() {
            return CheckResult::fail(name, format!("seed={seed} locus={i} g={g} e={e}"));
        }
    }
    CheckResult::pass(name)
}

fn check_local_optima(seed: u64) -> CheckResult {
    let name = "local optima enumeration";
    for offset in 0..3u64 {
        let cfg = LandscapeConfig {
            n: 8,
            k: 3,
            z: 4,
            e: 2,
            seed: seed.wrapping_add(offset),
        };
        let landscape = match Landscape::generate(cfg) {
            Ok(l) => l,
            Err(e) => return CheckResult::fail(name, e.to_string()),
        };
        let e = BitString::from_index(offset % 16, 4);
        let direct = landscape.count_local_optima(&e).expect("within guard");
        let scratch = count_local_optima_from_scratch(&cfg, &e);
        if direct != scratch {
            return CheckResult::fail(name, format!("seed={}: {direct} vs {scratch}", cfg.seed));
        }
    }
    // Additive landscapes have exactly one optimum.
    let cfg = LandscapeConfig {
        n: 8,
        k: 0,
        z: 0,
        e: 0,
        seed,
    };
    let landscape = Landscape::generate(cfg).expect("valid");
    let count = landscape
        .count_local_optima(&BitString::zeros(0))
        .expect("within guard");
    if count != 1 {
        return CheckResult::fail(name, format!("K=0 seed={seed} gave {count} optima"));
    }
    CheckResult::pass(name)
}

fn check_replay(seed: u64) -> CheckResult {
    let name = "standard dynamics replay";
    let cfg = LandscapeConfig {
        n: 6,
        k: 2,
        z: 6,
        e: 3,
        seed,
    };
    let landscape = match Landscape::generate(cfg) {
        Ok(l) => l,
        Err(e) => return CheckResult::fail(name, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
    let mut pop = Population::init_random(6, 0.5, &landscape, &mut rng);
    for step in 0..300 {
        let idx = rng.gen_range(0..6);
        let mut probe = rng.clone();
        let before = pop.firms[idx].fitness;
        let expected = match pop.firms[idx].role {
            Role::Searcher => {
                let bit = probe.gen_range(0..cfg.n);
                let f =
                    evaluate_from_scratch(&cfg, &pop.firms[idx].search.flipped(bit), &pop.shape);
                if f > before {
                    TurnAction::SearchFlip(bit)
                } else {
                    TurnAction::NoChange
                }
            }
            Role::Shaper => {
                let s_bit = probe.gen_range(0..cfg.n);
                let z_bit = probe.gen_range(0..cfg.z);
                let f_search =
                    evaluate_from_scratch(&cfg, &pop.firms[idx].search.flipped(s_bit), &pop.shape);
                let f_shape =
                    evaluate_from_scratch(&cfg, &pop.firms[idx].search, &pop.shape.flipped(z_bit));
                if f_search >= f_shape && f_search > before {
                    TurnAction::SearchFlip(s_bit)
                } else if f_shape > f_search && f_shape > before {
                    TurnAction::ShapeFlip(z_bit)
                } else {
                    TurnAction::NoChange
                }
            }
        };
        let outcome = match pop.firms[idx].role {
            Role::Searcher => standard::searcher_step(idx, &mut pop, &landscape, &mut rng),
            Role::Shaper => standard::shaper_step(idx, &mut pop, &landscape, &mut rng),
        };
        if outcome.action != expected {
            return CheckResult::fail(
                name,
                format!(
                    "seed={seed} step={step}: {:?} vs expected {:?}",
                    outcome.action, expected
                ),
            );
        }
        let truth = evaluate_from_scratch(&cfg, &pop.firms[idx].search, &pop.shape);
        if truth.to_bits() != pop.firms[idx].fitness.to_bits() {
            return CheckResult::fail(
                name,
                format!("seed={seed} step={step}: cached fitness drifted"),
            );
        }
    }
    CheckResult::pass(name)
}

fn check_replication_determinism(seed: u64) -> CheckResult {
    let name = "replication determinism";
    for model in [
        engine::Model::Standard,
        engine::Model::StealthLearning,
        engine::Model::StructuredCooperation,
    ] {
        let cfg = engine::SimulationConfig {
            model,
            k: 3,
            e: 4,
            iterations: 10,
            runs: 1,
            master_seed: seed,
            groups: if model == engine::Model::StructuredCooperation {
                engine::GroupScheme::Random
            } else {
                engine::GroupScheme::None
            },
            ..engine::SimulationConfig::default()
        };
        let a = match engine::run_replication(&cfg, 0) {
            Ok(log) => log,
            Err(e) => return CheckResult::fail(name, e.to_string()),
        };
        let b = engine::run_replication(&cfg, 0).expect("validated");
        let same = a
            .records
            .iter()
            .zip(&b.records)
            .all(|(x, y)| x.fitness.to_bits() == y.fitness.to_bits() && x.firm == y.firm);
        if !(same && a.records.len() == b.records.len()) {
            return CheckResult::fail(name, format!("model {model} diverged at seed={seed}"));
        }
    }
    CheckResult::pass(name)
}

fn check_fault_sensitivity(seed: u64) -> CheckResult {
    // An off-by-one in row indexing must be caught by the equivalence
    // probe; this guards the suite itself against going blind.
    let name = "fault sensitivity";
    let cfg = LandscapeConfig {
        n: 4,
        k: 1,
        z: 2,
        e: 1,
        seed,
    };
    let landscape = match Landscape::generate(cfg) {
        Ok(l) => l,
        Err(e) => return CheckResult::fail(name, e.to_string()),
    };
    let rows = landscape.rows_per_locus();
    let mut saw_mismatch = false;
    for gv in 0..1u64 << cfg.n {
        let g = BitString::from_index(gv, cfg.n);
        for ev in 0..1u64 << cfg.z {
            let e = BitString::from_index(ev, cfg.z);
            // Deliberately corrupted evaluation: every row index shifted by one.
            let corrupted: f64 = (0..cfg.n)
                .map(|i| {
                    let row = (landscape.row_index(i, &g, &e) + 1) % rows;
                    let mut h = cfg.seed;
                    h = scramble(h ^ scramble((i as u64).wrapping_add(0x9e37_79b9_7f4a_7c15)));
                    h = scramble(h ^ scramble(row.wrapping_add(0xd1b5_4a32_d192_ed03)));
                    (h >> 11) as f64 / 9_007_199_254_740_992.0
                })
                .sum::<f64>()
                / cfg.n as f64;
            if corrupted.to_bits() != evaluate_from_scratch(&cfg, &g, &e).to_bits() {
                saw_mismatch = true;
            }
        }
    }
    if saw_mismatch {
        CheckResult::pass(name)
    } else {
        CheckResult::fail(name, format!("seed={seed}: off-by-one went undetected"))
    }
}

/// Runs the whole verification suite. Deterministic for a fixed seed.
pub fn run_suite(seed: u64) -> Vec<CheckResult> {
    vec![
        check_packing(),
        check_equivalence(seed),
        check_equivalence_sampled(seed),
        check_determinism(seed),
        check_local_optima(seed),
        check_replay(seed),
        check_replication_determinism(seed),
        check_fault_sensitivity(seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_fresh_state() {
        for check in run_suite(7) {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn suite_is_reproducible() {
        let a: Vec<bool> = run_suite(7).iter().map(|c| c.passed).collect();
        let b: Vec<bool> = run_suite(7).iter().map(|c| c.passed).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn scratch_evaluation_matches_direct_on_random_probes() {
        let cfg = LandscapeConfig {
            n: 4,
            k: 2,
            z: 3,
            e: 1,
            seed: 77,
        };
        let landscape = Landscape::generate(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..200 {
            let g = BitString::random(4, &mut rng);
            let e = BitString::random(3, &mut rng);
            assert_eq!(
                landscape.evaluate(&g, &e).to_bits(),
                evaluate_from_scratch(&cfg, &g, &e).to_bits()
            );
        }
    }
}
