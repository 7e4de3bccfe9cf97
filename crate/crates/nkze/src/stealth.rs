//! Stealthy global learning: guided multi-bit search mutation toward the
//! population's current best firm, plus a bounded memory of elite
//! aggregated policies exploited on a decaying epsilon schedule.
//!
//! Per-turn behaviour: with probability `1 - epsilon` the firm skips
//! exploration and copies the best memory entry outright (searchers copy
//! its search policy; shapers copy search and shape). Otherwise the firm
//! updates its guiding vector toward the current global best firm,
//! resamples its whole search policy from the vector, and — for shapers —
//! also weighs a single random shape-bit flip; any adoption still requires
//! a strict improvement, exactly as in the standard model.
//!
//! Draw order per turn (relied on by replay checks): the exploit draw;
//! then on exploration N variates for the policy resample, then the
//! shaper's shape-candidate bit (no shape draw when Z = 0).

use crate::bits::BitString;
use crate::landscape::Landscape;
use crate::population::{Population, Role, TurnAction, TurnOutcome};
use rand::Rng;

/// Smallest admissible per-bit probability; keeps 5% residual mutation
/// after convergence.
pub const P_FLOOR: f64 = 0.05;
/// Largest admissible per-bit probability.
pub const P_CEIL: f64 = 0.95;

/// Per-firm vector of probabilities that each search bit samples to 1.
/// Every element stays within [`P_FLOOR`, `P_CEIL`].
#[derive(Debug, Clone, PartialEq)]
pub struct GuidingVector(Vec<f64>);

impl GuidingVector {
    /// Uniform [0,1] initialization, clamped into the admissible band.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        GuidingVector(
            (0..n)
                .map(|_| rng.gen::<f64>().clamp(P_FLOOR, P_CEIL))
                .collect(),
        )
    }

    pub fn from_probs(probs: Vec<f64>) -> Self {
        GuidingVector(
            probs
                .into_iter()
                .map(|p| p.clamp(P_FLOOR, P_CEIL))
                .collect(),
        )
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Moves each probability a fraction `alpha` toward the target bit,
    /// then clamps back into the admissible band.
    pub fn learn_towards(&mut self, target: &BitString, alpha: f64) {
        debug_assert_eq!(self.0.len(), target.len());
        debug_assert!((0.0..=1.0).contains(&alpha));
        for (p, bit) in self.0.iter_mut().zip(target.iter()) {
            *p = ((1.0 - alpha) * *p + alpha * bit as u8 as f64).clamp(P_FLOOR, P_CEIL);
        }
    }

    /// Draws a fresh search policy: bit i is 1 iff a uniform variate falls
    /// below p_i. Consumes exactly `len` draws.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> BitString {
        self.0
            .iter()
            .map(|&p| rng.gen::<f64>() < p)
            .collect::<Vec<_>>()
            .into()
    }
}

/// An elite aggregated policy: search string, shape string, and the
/// fitness it had when memorized.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub search: BitString,
    pub shape: BitString,
    pub fitness: f64,
}

/// Bounded archive of elite policies, keyed by unique shape strings.
///
/// Entries are held in insertion order; the "best" accessor breaks exact
/// fitness ties toward the earliest insertion.
#[derive(Debug, Clone)]
pub struct MemoryDb {
    entries: Vec<MemoryEntry>,
    capacity: usize,
}

impl MemoryDb {
    pub fn new(capacity: usize) -> Self {
        MemoryDb {
            entries: Vec::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    /// Offers a candidate to the archive. An entry with the same shape
    /// string keeps whichever of the pair is fitter. Otherwise the
    /// candidate is inserted while below capacity, or replaces the worst
    /// entry if strictly fitter than it. Returns true when the archive
    /// changed.
    pub fn offer(&mut self, candidate: MemoryEntry) -> bool {
        if let Some(idx) = self.entries.iter().position(|m| m.shape == candidate.shape) {
            if candidate.fitness > self.entries[idx].fitness {
                self.entries[idx] = candidate;
                return true;
            }
            return false;
        }
        if self.entries.len() < self.capacity {
            self.entries.push(candidate);
            return true;
        }
        let worst = self.worst_index();
        if candidate.fitness > self.entries[worst].fitness {
            self.entries.remove(worst);
            self.entries.push(candidate);
            return true;
        }
        false
    }

    /// Best entry by fitness; exact ties go to the earliest inserted.
    pub fn best(&self) -> Option<&MemoryEntry> {
        let mut best: Option<&MemoryEntry> = None;
        for m in &self.entries {
            if best.is_none_or(|b| m.fitness > b.fitness) {
                best = Some(m);
            }
        }
        best
    }

    /// Lowest fitness across the archive, if non-empty.
    pub fn worst_fitness(&self) -> Option<f64> {
        self.entries
            .iter()
            .map(|m| m.fitness)
            .fold(None, |acc, f| Some(acc.map_or(f, |a: f64| a.min(f))))
    }

    fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (i, m) in self.entries.iter().enumerate().skip(1) {
            if m.fitness < self.entries[worst].fitness {
                worst = i;
            }
        }
        worst
    }
}

/// Geometric exploration-retention schedule: epsilon after t decays is
/// `eps0 * gamma^t`.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonSchedule {
    eps0: f64,
    gamma: f64,
    steps: u32,
}

impl EpsilonSchedule {
    pub fn new(eps0: f64, gamma: f64) -> Self {
        EpsilonSchedule {
            eps0,
            gamma,
            steps: 0,
        }
    }

    pub fn current(&self) -> f64 {
        self.eps0 * self.gamma.powi(self.steps as i32)
    }

    pub fn decay(&mut self) {
        self.steps += 1;
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }
}

/// True (exploit the memory) iff a uniform variate exceeds epsilon, i.e.
/// with probability `1 - epsilon`.
pub fn exploit_decision<R: Rng>(epsilon: f64, rng: &mut R) -> bool {
    rng.gen::<f64>() > epsilon
}

/// Knobs shared by the learning models: memory capacity, the epsilon
/// schedule, and the learning rate.
#[derive(Debug, Clone, Copy)]
pub struct LearningParams {
    pub theta: usize,
    pub eps0: f64,
    pub gamma: f64,
    pub alpha: f64,
}

/// Per-replication learning state for the stealth model.
#[derive(Debug, Clone)]
pub struct StealthState {
    pub vectors: Vec<GuidingVector>,
    pub memory: MemoryDb,
    pub schedule: EpsilonSchedule,
    pub alpha: f64,
}

impl StealthState {
    pub fn init<R: Rng>(m: usize, n: usize, params: LearningParams, rng: &mut R) -> Self {
        StealthState {
            vectors: (0..m).map(|_| GuidingVector::random(n, rng)).collect(),
            memory: MemoryDb::new(params.theta),
            schedule: EpsilonSchedule::new(params.eps0, params.gamma),
            alpha: params.alpha,
        }
    }
}

/// Copies the best memory entry into the firm: searchers take the search
/// policy only; shapers take both and thereby overwrite the shared shape
/// policy. Adoption is unconditional.
pub fn adopt_from_memory(
    firm_idx: usize,
    pop: &mut Population,
    landscape: &Landscape,
    memory: &MemoryDb,
) -> Option<TurnAction> {
    let entry = memory.best()?.clone();
    let role = pop.firms[firm_idx].role;
    pop.firms[firm_idx].search = entry.search;
    match role {
        Role::Searcher => {
            pop.firms[firm_idx].fitness =
                landscape.evaluate(&pop.firms[firm_idx].search, &pop.shape);
            Some(TurnAction::MemoryAdopt {
                adopted_shape: false,
            })
        }
        Role::Shaper => {
            pop.shape = entry.shape;
            pop.refresh_all_fitness(landscape);
            Some(TurnAction::MemoryAdopt {
                adopted_shape: true,
            })
        }
    }
}

/// One stealth-model turn for the firm at `firm_idx`.
pub fn firm_turn<R: Rng>(
    firm_idx: usize,
    pop: &mut Population,
    landscape: &Landscape,
    state: &mut StealthState,
    rng: &mut R,
) -> TurnOutcome {
    let before = pop.firms[firm_idx].fitness;
    if exploit_decision(state.schedule.current(), rng) {
        // Empty memory falls back to exploration so the turn is not lost.
        if let Some(action) = adopt_from_memory(firm_idx, pop, landscape, &state.memory) {
            return TurnOutcome {
                firm: firm_idx,
                action,
                fitness_before: before,
                fitness_after: pop.firms[firm_idx].fitness,
            };
        }
    }

    // Learning persists even when the sampled candidate is rejected.
    let target = pop.firms[pop.best_firm()].search.clone();
    state.vectors[firm_idx].learn_towards(&target, state.alpha);
    let candidate = state.vectors[firm_idx].sample(rng);
    let f_search = landscape.evaluate(&candidate, &pop.shape);

    let shape_option = if pop.firms[firm_idx].role == Role::Shaper && landscape.z() > 0 {
        let bit = rng.gen_range(0..landscape.z());
        let shape_candidate = pop.shape.flipped(bit);
        let f = landscape.evaluate(&pop.firms[firm_idx].search, &shape_candidate);
        Some((bit, shape_candidate, f))
    } else {
        None
    };

    match shape_option {
        Some((bit, shape_candidate, f_shape)) if f_shape > f_search && f_shape > before => {
            pop.shape = shape_candidate;
            pop.refresh_all_fitness(landscape);
            TurnOutcome {
                firm: firm_idx,
                action: TurnAction::ShapeFlip(bit),
                fitness_before: before,
                fitness_after: pop.firms[firm_idx].fitness,
            }
        }
        _ if f_search > before => {
            let firm = &mut pop.firms[firm_idx];
            firm.search = candidate;
            firm.fitness = f_search;
            TurnOutcome {
                firm: firm_idx,
                action: TurnAction::SearchResample,
                fitness_before: before,
                fitness_after: f_search,
            }
        }
        _ => TurnOutcome {
            firm: firm_idx,
            action: TurnAction::NoChange,
            fitness_before: before,
            fitness_after: before,
        },
    }
}

/// One full stealth iteration: random firm order, one turn each, then the
/// iteration's best firm is offered to the memory and epsilon decays.
pub fn run_iteration<R: Rng>(
    pop: &mut Population,
    landscape: &Landscape,
    state: &mut StealthState,
    rng: &mut R,
) -> Vec<TurnOutcome> {
    let order = pop.draw_turn_order(rng);
    let outcomes: Vec<TurnOutcome> = order
        .into_iter()
        .map(|idx| firm_turn(idx, pop, landscape, state, rng))
        .collect();

    let elite = &pop.firms[pop.best_firm()];
    state.memory.offer(MemoryEntry {
        search: elite.search.clone(),
        shape: pop.shape.clone(),
        fitness: elite.fitness,
    });
    state.schedule.decay();
    outcomes
}
