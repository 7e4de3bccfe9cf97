//! Structured cooperation: the stealth-learning mechanics scoped to fixed
//! collaboration groups.
//!
//! Firms are partitioned into groups of at most `omega_max` members for
//! the whole run. A firm learns toward the best policy *within its group*,
//! each group keeps its own bounded memory, and the guided search mutation
//! is restricted to the single bit with the highest probability of
//! changing value (ties broken uniformly at random). Shape moves and the
//! strict-improvement acceptance rule are unchanged from the other models;
//! one epsilon schedule is shared by all groups.

use crate::bits::BitString;
use crate::landscape::Landscape;
use crate::population::{Population, Role, TurnAction, TurnOutcome};
use crate::stealth::{
    exploit_decision, EpsilonSchedule, GuidingVector, LearningParams, MemoryDb, MemoryEntry,
};
use crate::ConfigError;
use rand::Rng;

/// A group's size and how many of its members are shapers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupComposition {
    pub size: usize,
    pub shapers: usize,
}

impl GroupComposition {
    pub fn new(size: usize, shapers: usize) -> Self {
        GroupComposition { size, shapers }
    }

    pub fn validate(&self, omega_max: usize) -> Result<(), ConfigError> {
        if self.size == 0 || self.size > omega_max {
            return Err(ConfigError::CompositionSizeOutOfRange {
                size: self.size,
                omega_max,
            });
        }
        if self.shapers > self.size {
            return Err(ConfigError::CompositionShapersOutOfRange {
                shapers: self.shapers,
                size: self.size,
            });
        }
        Ok(())
    }
}

/// Every composition with size in `1..=omega_max` and any shaper count,
/// ordered by (size, shapers). For `omega_max = 4` this is the full
/// 14-entry roster of group make-ups.
pub fn all_compositions(omega_max: usize) -> Vec<GroupComposition> {
    let mut out = Vec::new();
    for size in 1..=omega_max {
        for shapers in 0..=size {
            out.push(GroupComposition::new(size, shapers));
        }
    }
    out
}

/// A collaboration group: member firm ids and a private memory.
#[derive(Debug, Clone)]
pub struct Group {
    pub id: usize,
    pub members: Vec<usize>,
    pub composition: GroupComposition,
    pub memory: MemoryDb,
}

/// Per-replication state for the cooperation model.
#[derive(Debug, Clone)]
pub struct CoopState {
    pub groups: Vec<Group>,
    /// Firm id -> index into `groups`.
    pub firm_group: Vec<usize>,
    pub vectors: Vec<GuidingVector>,
    pub schedule: EpsilonSchedule,
    pub alpha: f64,
}

/// Samples group compositions until `m` firms are placed: sizes uniform on
/// `1..=omega_max` (the final group truncated to fit), shaper counts
/// uniform on `0..=size`.
pub fn sample_compositions<R: Rng>(
    m: usize,
    omega_max: usize,
    rng: &mut R,
) -> Vec<GroupComposition> {
    let mut out = Vec::new();
    let mut placed = 0;
    while placed < m {
        let mut size = rng.gen_range(1..=omega_max);
        size = size.min(m - placed);
        let shapers = rng.gen_range(0..=size);
        out.push(GroupComposition::new(size, shapers));
        placed += size;
    }
    out
}

/// Builds groups (and the role roster) from explicit compositions. Firm
/// ids are assigned sequentially; within a group the first `shapers`
/// members are shapers.
pub fn form_groups(
    m: usize,
    omega_max: usize,
    compositions: &[GroupComposition],
    theta: usize,
) -> Result<(Vec<Group>, Vec<Role>), ConfigError> {
    let sum: usize = compositions.iter().map(|c| c.size).sum();
    if sum != m {
        return Err(ConfigError::CompositionSumMismatch { sum, m });
    }
    let mut groups = Vec::with_capacity(compositions.len());
    let mut roles = Vec::with_capacity(m);
    let mut next_id = 0;
    for (gid, comp) in compositions.iter().enumerate() {
        comp.validate(omega_max)?;
        let members: Vec<usize> = (next_id..next_id + comp.size).collect();
        next_id += comp.size;
        for (slot, _) in members.iter().enumerate() {
            roles.push(if slot < comp.shapers {
                Role::Shaper
            } else {
                Role::Searcher
            });
        }
        groups.push(Group {
            id: gid,
            members,
            composition: *comp,
            memory: MemoryDb::new(theta),
        });
    }
    Ok((groups, roles))
}

impl CoopState {
    pub fn init<R: Rng>(
        m: usize,
        n: usize,
        omega_max: usize,
        compositions: &[GroupComposition],
        params: LearningParams,
        rng: &mut R,
    ) -> Result<(Self, Vec<Role>), ConfigError> {
        let (groups, roles) = form_groups(m, omega_max, compositions, params.theta)?;
        let mut firm_group = vec![0; m];
        for group in &groups {
            for &member in &group.members {
                firm_group[member] = group.id;
            }
        }
        Ok((
            CoopState {
                groups,
                firm_group,
                vectors: (0..m).map(|_| GuidingVector::random(n, rng)).collect(),
                schedule: EpsilonSchedule::new(params.eps0, params.gamma),
                alpha: params.alpha,
            },
            roles,
        ))
    }

    pub fn group_of(&self, firm: usize) -> &Group {
        &self.groups[self.firm_group[firm]]
    }
}

/// The group member with the highest current fitness; ties go to the
/// lowest firm id. A lone firm is its own best.
pub fn group_best(group: &Group, pop: &Population) -> usize {
    let mut best = group.members[0];
    for &member in &group.members[1..] {
        if pop.firms[member].fitness > pop.firms[best].fitness {
            best = member;
        }
    }
    best
}

/// Flips the one bit with the highest probability of changing value under
/// the guiding vector: flip probability is `p_i` where the bit is 0 and
/// `1 - p_i` where it is 1. Among exactly tied bits one is chosen
/// uniformly at random. Exactly one bit changes.
pub fn restricted_mutation<R: Rng>(
    vector: &GuidingVector,
    g: &BitString,
    rng: &mut R,
) -> BitString {
    debug_assert_eq!(vector.len(), g.len());
    let flip_prob = |i: usize| {
        if g.get(i) {
            1.0 - vector.probs()[i]
        } else {
            vector.probs()[i]
        }
    };
    let mut best = flip_prob(0);
    let mut ties = vec![0];
    for i in 1..g.len() {
        let q = flip_prob(i);
        if q > best {
            best = q;
            ties.clear();
            ties.push(i);
        } else if q == best {
            ties.push(i);
        }
    }
    let bit = ties[rng.gen_range(0..ties.len())];
    g.flipped(bit)
}

/// One cooperation-model turn. Identical to the stealth turn except the
/// learning target is the group's best member, exploration uses the
/// single-bit restricted mutation, and memory traffic stays inside the
/// firm's group.
pub fn firm_turn<R: Rng>(
    firm_idx: usize,
    pop: &mut Population,
    landscape: &Landscape,
    state: &mut CoopState,
    rng: &mut R,
) -> TurnOutcome {
    let before = pop.firms[firm_idx].fitness;
    let gid = state.firm_group[firm_idx];

    if exploit_decision(state.schedule.current(), rng) {
        if let Some(action) =
            crate::stealth::adopt_from_memory(firm_idx, pop, landscape, &state.groups[gid].memory)
        {
            return TurnOutcome {
                firm: firm_idx,
                action,
                fitness_before: before,
                fitness_after: pop.firms[firm_idx].fitness,
            };
        }
    }

    let target = pop.firms[group_best(&state.groups[gid], pop)]
        .search
        .clone();
    state.vectors[firm_idx].learn_towards(&target, state.alpha);
    let candidate = restricted_mutation(&state.vectors[firm_idx], &pop.firms[firm_idx].search, rng);
    let flipped_bit = (0..candidate.len())
        .find(|&i| candidate.get(i) != pop.firms[firm_idx].search.get(i))
        .expect("restricted mutation flips one bit");
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
                action: TurnAction::SearchFlip(flipped_bit),
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

/// RNG wiring for one cooperation iteration. The default is one shared
/// stream; per-group streams keep groups' draw sequences independent and
/// exist for isolation testing.
pub enum CoopRng<R: Rng> {
    Shared(R),
    PerGroup { order: R, groups: Vec<R> },
}

impl<R: Rng> CoopRng<R> {
    fn order_rng(&mut self) -> &mut R {
        match self {
            CoopRng::Shared(rng) => rng,
            CoopRng::PerGroup { order, .. } => order,
        }
    }
}

/// One full cooperation iteration: random global firm order, one turn
/// each; then each group's best member is offered to that group's memory,
/// and the shared epsilon decays once.
pub fn run_iteration<R: Rng>(
    pop: &mut Population,
    landscape: &Landscape,
    state: &mut CoopState,
    rng: &mut CoopRng<R>,
) -> Vec<TurnOutcome> {
    let order = pop.draw_turn_order(rng.order_rng());
    let outcomes: Vec<TurnOutcome> = order
        .into_iter()
        .map(|idx| {
            let gid = state.firm_group[idx];
            // Split the borrow: take the group rng, then run the turn.
            match rng {
                CoopRng::Shared(r) => firm_turn(idx, pop, landscape, state, r),
                CoopRng::PerGroup { groups, .. } => {
                    firm_turn(idx, pop, landscape, state, &mut groups[gid])
                }
            }
        })
        .collect();

    for gid in 0..state.groups.len() {
        let best = group_best(&state.groups[gid], pop);
        let entry = MemoryEntry {
            search: pop.firms[best].search.clone(),
            shape: pop.shape.clone(),
            fitness: pop.firms[best].fitness,
        };
        state.groups[gid].memory.offer(entry);
    }
    state.schedule.decay();
    outcomes
}
