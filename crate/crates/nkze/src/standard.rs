//! The baseline adaptation model: myopic single-bit hill climbing on the
//! shared landscape.
//!
//! Each iteration re-orders the firms uniformly at random and gives every
//! firm exactly one action. A searcher proposes one random search-bit flip
//! and adopts it only on a strict fitness improvement. A shaper weighs two
//! candidates — one random search-bit flip versus one random shape-bit flip
//! evaluated with its unchanged search policy — adopts the better of the
//! two if it strictly beats its current fitness, and otherwise ends its
//! turn unchanged. An adopted shape flip restructures fitness for every
//! firm immediately.
//!
//! Draw order per turn (relied on by the replay checks): a searcher draws
//! its candidate bit; a shaper draws its search-candidate bit, then its
//! shape-candidate bit (no shape draw when Z = 0).

use crate::landscape::Landscape;
use crate::population::{Population, Role, TurnAction, TurnOutcome};
use rand::Rng;

/// One searcher action: propose a single random bit flip, keep it only if
/// strictly fitter.
pub fn searcher_step<R: Rng>(
    firm_idx: usize,
    pop: &mut Population,
    landscape: &Landscape,
    rng: &mut R,
) -> TurnOutcome {
    let before = pop.firms[firm_idx].fitness;
    let bit = rng.gen_range(0..landscape.n());
    let candidate = pop.firms[firm_idx].search.flipped(bit);
    let f = landscape.evaluate(&candidate, &pop.shape);
    if f > before {
        let firm = &mut pop.firms[firm_idx];
        firm.search = candidate;
        firm.fitness = f;
        TurnOutcome {
            firm: firm_idx,
            action: TurnAction::SearchFlip(bit),
            fitness_before: before,
            fitness_after: f,
        }
    } else {
        TurnOutcome {
            firm: firm_idx,
            action: TurnAction::NoChange,
            fitness_before: before,
            fitness_after: before,
        }
    }
}

/// One shaper action: the better of a single search-bit flip and a single
/// shape-bit flip, adopted only on strict improvement. Adopting the shape
/// flip mutates the shared shape policy and refreshes every firm's
/// fitness. With Z = 0 the shape option does not exist and the shaper
/// acts as a searcher.
pub fn shaper_step<R: Rng>(
    firm_idx: usize,
    pop: &mut Population,
    landscape: &Landscape,
    rng: &mut R,
) -> TurnOutcome {
    debug_assert_eq!(pop.firms[firm_idx].role, Role::Shaper);
    if landscape.z() == 0 {
        return searcher_step(firm_idx, pop, landscape, rng);
    }
    let before = pop.firms[firm_idx].fitness;

    let search_bit = rng.gen_range(0..landscape.n());
    let search_candidate = pop.firms[firm_idx].search.flipped(search_bit);
    let f_search = landscape.evaluate(&search_candidate, &pop.shape);

    let shape_bit = rng.gen_range(0..landscape.z());
    let shape_candidate = pop.shape.flipped(shape_bit);
    let f_shape = landscape.evaluate(&pop.firms[firm_idx].search, &shape_candidate);

    // Exact candidate ties (measure zero) resolve to the search move.
    if f_search >= f_shape && f_search > before {
        let firm = &mut pop.firms[firm_idx];
        firm.search = search_candidate;
        firm.fitness = f_search;
        TurnOutcome {
            firm: firm_idx,
            action: TurnAction::SearchFlip(search_bit),
            fitness_before: before,
            fitness_after: f_search,
        }
    } else if f_shape > f_search && f_shape > before {
        pop.shape = shape_candidate;
        pop.refresh_all_fitness(landscape);
        TurnOutcome {
            firm: firm_idx,
            action: TurnAction::ShapeFlip(shape_bit),
            fitness_before: before,
            fitness_after: pop.firms[firm_idx].fitness,
        }
    } else {
        TurnOutcome {
            firm: firm_idx,
            action: TurnAction::NoChange,
            fitness_before: before,
            fitness_after: before,
        }
    }
}

/// One full iteration: every firm acts exactly once, in a fresh uniform
/// random order. Returns the turn records in acting order.
pub fn run_iteration<R: Rng>(
    pop: &mut Population,
    landscape: &Landscape,
    rng: &mut R,
) -> Vec<TurnOutcome> {
    let order = pop.draw_turn_order(rng);
    order
        .into_iter()
        .map(|idx| match pop.firms[idx].role {
            Role::Searcher => searcher_step(idx, pop, landscape, rng),
            Role::Shaper => shaper_step(idx, pop, landscape, rng),
        })
        .collect()
}
