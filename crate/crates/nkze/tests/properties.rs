//! Property tests for the structural invariants of the simulator.

use nkze::bits::BitString;
use nkze::coop::{self, CoopRng, CoopState, GroupComposition};
use nkze::engine::{self, Model, SimulationConfig};
use nkze::landscape::{Landscape, LandscapeConfig};
use nkze::oracle;
use nkze::population::{Population, TurnAction};
use nkze::standard;
use nkze::stealth::{
    EpsilonSchedule, GuidingVector, LearningParams, MemoryDb, MemoryEntry, P_CEIL, P_FLOOR,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lp(theta: usize, eps0: f64, gamma: f64, alpha: f64) -> LearningParams {
    LearningParams {
        theta,
        eps0,
        gamma,
        alpha,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn guiding_vector_stays_clamped_under_any_update_sequence(
        seed in 0..10_000u64,
        alphas in proptest::collection::vec(0.0..=1.0f64, 1..40),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = GuidingVector::random(8, &mut rng);
        prop_assert!(v.probs().iter().all(|&p| (P_FLOOR..=P_CEIL).contains(&p)));
        for alpha in alphas {
            let target = BitString::random(8, &mut rng);
            v.learn_towards(&target, alpha);
            prop_assert!(v.probs().iter().all(|&p| (P_FLOOR..=P_CEIL).contains(&p)));
        }
    }

    #[test]
    fn memory_obeys_capacity_uniqueness_and_monotone_worst(
        seed in 0..10_000u64,
        offers in 1..200usize,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut db = MemoryDb::new(8);
        let mut prev_worst: Option<f64> = None;
        for _ in 0..offers {
            db.offer(MemoryEntry {
                search: BitString::random(6, &mut rng),
                shape: BitString::random(4, &mut rng),
                fitness: rand::Rng::gen(&mut rng),
            });
            prop_assert!(db.len() <= 8);
            let mut shapes: Vec<u64> = db.entries().iter().map(|m| m.shape.to_index()).collect();
            shapes.sort_unstable();
            let unique = shapes.len();
            shapes.dedup();
            prop_assert_eq!(unique, shapes.len());
            if db.len() == 8 {
                let worst = db.worst_fitness().unwrap();
                if let Some(p) = prev_worst {
                    prop_assert!(worst >= p);
                }
                prev_worst = Some(worst);
            }
        }
    }

    #[test]
    fn epsilon_equals_gamma_power_t(gamma in 0.5..0.9999f64, steps in 0..300u32) {
        let mut s = EpsilonSchedule::new(1.0, gamma);
        for _ in 0..steps {
            s.decay();
        }
        prop_assert_eq!(s.current(), gamma.powi(steps as i32));
    }

    #[test]
    fn packing_is_a_bijection(width in 1..12usize) {
        let mut seen = vec![false; 1 << width];
        for v in 0..1u64 << width {
            let tuple = BitString::from_index(v, width);
            let bits: Vec<bool> = tuple.iter().collect();
            let row = nkze::landscape::pack_index(bits[0], &bits[1..], &[]) as usize;
            prop_assert!(!seen[row]);
            seen[row] = true;
        }
        prop_assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn evaluation_matches_independent_recomputation(
        n in 2..6usize,
        z in 0..4usize,
        seed in 0..50_000u64,
    ) {
        let k = (seed as usize) % n;
        let e = if z == 0 { 0 } else { (seed as usize / 7) % (z + 1) };
        let cfg = LandscapeConfig { n, k, z, e, seed };
        let landscape = Landscape::generate(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        for _ in 0..20 {
            let g = BitString::random(n, &mut rng);
            let ev = BitString::random(z, &mut rng);
            let direct = landscape.evaluate(&g, &ev);
            prop_assert!((0.0..=1.0).contains(&direct));
            prop_assert_eq!(
                direct.to_bits(),
                oracle::evaluate_from_scratch(&cfg, &g, &ev).to_bits()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn accepted_standard_moves_have_hamming_distance_one(seed in 0..10_000u64) {
        let ls = Landscape::generate(LandscapeConfig { n: 8, k: 3, z: 6, e: 3, seed }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let mut pop = Population::init_random(8, 0.5, &ls, &mut rng);
        for _ in 0..30 {
            let before: Vec<BitString> = pop.firms.iter().map(|f| f.search.clone()).collect();
            let shape_before = pop.shape.clone();
            let order = pop.draw_turn_order(&mut rng);
            for idx in order {
                let g_pre = pop.firms[idx].search.clone();
                let e_pre = pop.shape.clone();
                let out = match pop.firms[idx].role {
                    nkze::Role::Searcher => standard::searcher_step(idx, &mut pop, &ls, &mut rng),
                    nkze::Role::Shaper => standard::shaper_step(idx, &mut pop, &ls, &mut rng),
                };
                match out.action {
                    TurnAction::SearchFlip(_) =>
                        prop_assert_eq!(g_pre.hamming(&pop.firms[idx].search), 1),
                    TurnAction::ShapeFlip(_) =>
                        prop_assert_eq!(e_pre.hamming(&pop.shape), 1),
                    TurnAction::NoChange => {
                        prop_assert_eq!(&g_pre, &pop.firms[idx].search);
                        prop_assert_eq!(&e_pre, &pop.shape);
                    }
                    other => prop_assert!(false, "unexpected action {:?}", other),
                }
            }
            drop(before);
            drop(shape_before);
        }
    }

    #[test]
    fn accepted_coop_moves_have_hamming_distance_one(seed in 0..10_000u64) {
        let ls = Landscape::generate(LandscapeConfig { n: 8, k: 3, z: 6, e: 3, seed }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e7e);
        let comps = [
            GroupComposition::new(4, 2),
            GroupComposition::new(3, 1),
            GroupComposition::new(1, 0),
        ];
        let (mut state, roles) =
            CoopState::init(8, 8, 4, &comps, lp(50, 1.0, 0.98, 0.2), &mut rng).unwrap();
        let mut pop = Population::init_with_roles(&roles, &ls, &mut rng);
        let mut streams = CoopRng::Shared(rng);
        for _ in 0..30 {
            let pre: Vec<BitString> = pop.firms.iter().map(|f| f.search.clone()).collect();
            let outcomes = coop::run_iteration(&mut pop, &ls, &mut state, &mut streams);
            for out in outcomes {
                if let TurnAction::SearchFlip(_) = out.action {
                    prop_assert_eq!(pre[out.firm].hamming(&pop.firms[out.firm].search), 1);
                }
            }
        }
    }

    #[test]
    fn group_partition_holds_for_the_whole_run(seed in 0..10_000u64) {
        let cfg = SimulationConfig {
            model: Model::StructuredCooperation,
            groups: engine::GroupScheme::Random,
            iterations: 12,
            runs: 1,
            master_seed: seed,
            ..SimulationConfig::default()
        };
        let log = engine::run_replication(&cfg, 0).unwrap();
        // Group assignment constant over time, every firm in exactly one group.
        for t in 1..=12 {
            let mut seen = vec![false; cfg.m];
            for r in log.records.iter().filter(|r| r.iteration == t) {
                prop_assert!(!seen[r.firm]);
                seen[r.firm] = true;
                prop_assert!(r.group.is_some());
            }
            prop_assert!(seen.into_iter().all(|s| s));
        }
        for firm in 0..cfg.m {
            let mut ids = log
                .records
                .iter()
                .filter(|r| r.firm == firm)
                .map(|r| r.group.unwrap().id);
            let first = ids.next().unwrap();
            prop_assert!(ids.all(|id| id == first));
        }
    }

    #[test]
    fn records_are_conserved_and_reruns_bit_identical(
        seed in 0..10_000u64,
        model_id in 0..3usize,
    ) {
        let model = [Model::Standard, Model::StealthLearning, Model::StructuredCooperation][model_id];
        let cfg = SimulationConfig {
            model,
            k: 2,
            e: 3,
            m: 6,
            iterations: 8,
            runs: 2,
            master_seed: seed,
            groups: if model == Model::StructuredCooperation {
                engine::GroupScheme::Random
            } else {
                engine::GroupScheme::None
            },
            ..SimulationConfig::default()
        };
        let a = engine::run_cell(&cfg).unwrap();
        let b = engine::run_cell(&cfg).unwrap();
        let mut total = 0;
        for (la, lb) in a.iter().zip(&b) {
            prop_assert_eq!(la.records.len(), 8 * 6);
            total += la.records.len();
            for (ra, rb) in la.records.iter().zip(&lb.records) {
                prop_assert_eq!(ra.fitness.to_bits(), rb.fitness.to_bits());
                prop_assert_eq!(ra.firm, rb.firm);
                prop_assert_eq!(ra.iteration, rb.iteration);
            }
        }
        prop_assert_eq!(total, 2 * 8 * 6);
    }
}
