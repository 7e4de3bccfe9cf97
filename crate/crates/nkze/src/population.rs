//! Firms, the shared shape policy, and per-turn action records.

use crate::bits::BitString;
use crate::landscape::Landscape;
use rand::seq::SliceRandom;
use rand::Rng;
use std::fmt;

/// What a firm is allowed to do. Fixed for the lifetime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// May only mutate its private search policy.
    Searcher,
    /// May alternatively mutate the globally shared shape policy.
    Shaper,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Searcher => write!(f, "searcher"),
            Role::Shaper => write!(f, "shaper"),
        }
    }
}

/// One agent: a role, a private search policy, and its cached fitness
/// under the population's current shape policy.
#[derive(Debug, Clone)]
pub struct Firm {
    pub id: usize,
    pub role: Role,
    pub search: BitString,
    pub fitness: f64,
}

/// All firms of one replication plus the single shared shape policy.
#[derive(Debug, Clone)]
pub struct Population {
    pub firms: Vec<Firm>,
    /// The one shape policy in existence for this run.
    pub shape: BitString,
}

/// Rounds half-up; used for the shaper head-count so results do not
/// depend on platform rounding of beta * M.
pub(crate) fn shaper_count(m: usize, beta: f64) -> usize {
    (beta * m as f64).round() as usize
}

impl Population {
    /// Random initial population: `round(beta * M)` shapers (chosen by
    /// shuffling firm ids), uniform random search policies and shape
    /// policy, fitness computed against the fresh shape policy.
    pub fn init_random<R: Rng>(
        m: usize,
        beta: f64,
        landscape: &Landscape,
        rng: &mut R,
    ) -> Population {
        let shapers = shaper_count(m, beta);
        let mut ids: Vec<usize> = (0..m).collect();
        ids.shuffle(rng);
        let mut roles = vec![Role::Searcher; m];
        for &id in ids.iter().take(shapers) {
            roles[id] = Role::Shaper;
        }
        Self::init_with_roles(&roles, landscape, rng)
    }

    /// Random policies with an explicit role per firm id.
    pub fn init_with_roles<R: Rng>(
        roles: &[Role],
        landscape: &Landscape,
        rng: &mut R,
    ) -> Population {
        let firms: Vec<Firm> = roles
            .iter()
            .enumerate()
            .map(|(id, &role)| Firm {
                id,
                role,
                search: BitString::random(landscape.n(), rng),
                fitness: 0.0,
            })
            .collect();
        let shape = BitString::random(landscape.z(), rng);
        let mut pop = Population { firms, shape };
        pop.refresh_all_fitness(landscape);
        pop
    }

    pub fn len(&self) -> usize {
        self.firms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firms.is_empty()
    }

    /// Recomputes every firm's cached fitness; call after any change to
    /// the shared shape policy.
    pub fn refresh_all_fitness(&mut self, landscape: &Landscape) {
        for firm in &mut self.firms {
            firm.fitness = landscape.evaluate(&firm.search, &self.shape);
        }
    }

    /// Id of the fittest firm right now; ties go to the lowest id.
    pub fn best_firm(&self) -> usize {
        let mut best = 0;
        for firm in &self.firms[1..] {
            if firm.fitness > self.firms[best].fitness {
                best = firm.id;
            }
        }
        best
    }

    /// Fresh uniformly random acting order for one iteration.
    pub fn draw_turn_order<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.firms.len()).collect();
        order.shuffle(rng);
        order
    }
}

/// The state change a firm's turn produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TurnAction {
    /// No candidate improved on the current policy.
    NoChange,
    /// Adopted a search policy differing in exactly this bit.
    SearchFlip(usize),
    /// Adopted a guided resample of the whole search policy.
    SearchResample,
    /// Mutated this bit of the shared shape policy.
    ShapeFlip(usize),
    /// Unconditionally copied policies out of a memory entry.
    MemoryAdopt {
        /// True when the shape policy was overwritten too (shapers only).
        adopted_shape: bool,
    },
}

/// Record of one firm turn, used by metrics and by the replay checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnOutcome {
    pub firm: usize,
    pub action: TurnAction,
    pub fitness_before: f64,
    pub fitness_after: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::LandscapeConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn landscape() -> Landscape {
        Landscape::generate(LandscapeConfig {
            n: 6,
            k: 2,
            z: 4,
            e: 2,
            seed: 9,
        })
        .unwrap()
    }

    #[test]
    fn shaper_count_rounds_half_up() {
        assert_eq!(shaper_count(10, 0.5), 5);
        assert_eq!(shaper_count(10, 0.0), 0);
        assert_eq!(shaper_count(10, 1.0), 10);
        assert_eq!(shaper_count(3, 0.5), 2);
        assert_eq!(shaper_count(5, 0.1), 1);
    }

    #[test]
    fn init_respects_shaper_proportion() {
        let ls = landscape();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = Population::init_random(10, 0.5, &ls, &mut rng);
        let shapers = pop.firms.iter().filter(|f| f.role == Role::Shaper).count();
        assert_eq!(shapers, 5);

        let all_searchers = Population::init_random(7, 0.0, &ls, &mut rng);
        assert!(all_searchers.firms.iter().all(|f| f.role == Role::Searcher));
        let all_shapers = Population::init_random(7, 1.0, &ls, &mut rng);
        assert!(all_shapers.firms.iter().all(|f| f.role == Role::Shaper));
    }

    #[test]
    fn equal_seeds_give_identical_populations() {
        let ls = landscape();
        let a = Population::init_random(10, 0.5, &ls, &mut ChaCha8Rng::seed_from_u64(3));
        let b = Population::init_random(10, 0.5, &ls, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a.shape, b.shape);
        for (fa, fb) in a.firms.iter().zip(&b.firms) {
            assert_eq!(fa.role, fb.role);
            assert_eq!(fa.search, fb.search);
            assert_eq!(fa.fitness.to_bits(), fb.fitness.to_bits());
        }
    }

    #[test]
    fn cached_fitness_matches_evaluation() {
        let ls = landscape();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = Population::init_random(8, 0.25, &ls, &mut rng);
        for firm in &pop.firms {
            assert_eq!(firm.fitness, ls.evaluate(&firm.search, &pop.shape));
        }
    }

    #[test]
    fn best_firm_breaks_ties_by_lowest_id() {
        let ls = landscape();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut pop = Population::init_random(4, 0.0, &ls, &mut rng);
        for firm in &mut pop.firms {
            firm.fitness = 0.5;
        }
        assert_eq!(pop.best_firm(), 0);
        pop.firms[2].fitness = 0.9;
        assert_eq!(pop.best_firm(), 2);
    }
}
