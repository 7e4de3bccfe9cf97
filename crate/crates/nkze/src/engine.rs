//! Replication orchestration, seed derivation, metrics collection, and
//! aggregate statistics.
//!
//! A whole experiment is a pure function of its configuration and master
//! seed: replications derive their landscape seed from `(master_seed,
//! run_index)` only — so every model sees the same landscape per run index
//! — and their dynamics seed additionally from the model id. Replications
//! are independent and run in parallel; results are merged in run order,
//! so output never depends on scheduling.

use crate::coop::{self, CoopRng, CoopState, GroupComposition};
use crate::landscape::{Landscape, LandscapeConfig};
use crate::population::{Population, Role};
use crate::standard;
use crate::stats;
use crate::stealth::{self, LearningParams, StealthState};
use crate::ConfigError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;

/// The three adaptation models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Myopic single-bit hill climbing.
    Standard,
    /// Stealthy global learning with guiding vectors and memory.
    StealthLearning,
    /// Stealth mechanics scoped to fixed collaboration groups.
    StructuredCooperation,
}

impl Model {
    pub fn id(self) -> u64 {
        match self {
            Model::Standard => 0,
            Model::StealthLearning => 1,
            Model::StructuredCooperation => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Standard => "standard",
            Model::StealthLearning => "stealthl",
            Model::StructuredCooperation => "structc",
        }
    }

    pub fn parse(s: &str) -> Option<Model> {
        match s {
            "standard" => Some(Model::Standard),
            "stealthl" => Some(Model::StealthLearning),
            "structc" => Some(Model::StructuredCooperation),
            _ => None,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How cooperation groups are formed, per run.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupScheme {
    /// Not a grouped model.
    None,
    /// Sizes and shaper counts sampled from the run's dynamics stream.
    Random,
    /// The same explicit composition list every run.
    Explicit(Vec<GroupComposition>),
    /// Deterministic rotation through packed blocks of the full
    /// composition roster, so every composition appears equally often
    /// across the experiment.
    Balanced,
}

/// Full configuration of one experiment cell.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub model: Model,
    pub n: usize,
    pub k: usize,
    pub z: usize,
    pub e: usize,
    pub m: usize,
    pub beta: f64,
    pub alpha: f64,
    pub theta: usize,
    pub eps0: f64,
    pub gamma: f64,
    pub omega_max: usize,
    pub iterations: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub groups: GroupScheme,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            model: Model::Standard,
            n: 12,
            k: 0,
            z: 12,
            e: 0,
            m: 10,
            beta: 0.5,
            alpha: 0.2,
            theta: 50,
            eps0: 1.0,
            gamma: 0.999,
            omega_max: 4,
            iterations: 100,
            runs: 50,
            master_seed: 42,
            groups: GroupScheme::None,
        }
    }
}

impl SimulationConfig {
    pub fn landscape_config(&self, seed: u64) -> LandscapeConfig {
        LandscapeConfig {
            n: self.n,
            k: self.k,
            z: self.z,
            e: self.e,
            seed,
        }
    }

    pub fn learning_params(&self) -> LearningParams {
        LearningParams {
            theta: self.theta,
            eps0: self.eps0,
            gamma: self.gamma,
            alpha: self.alpha,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.landscape_config(0).validate()?;
        if self.m == 0 {
            return Err(ConfigError::EmptyPopulation);
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(ConfigError::BetaOutOfRange(self.beta));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::AlphaOutOfRange(self.alpha));
        }
        if self.theta == 0 {
            return Err(ConfigError::ZeroMemoryCapacity);
        }
        if !(0.0..=1.0).contains(&self.eps0) {
            return Err(ConfigError::EpsilonOutOfRange(self.eps0));
        }
        if self.gamma <= 0.0 || self.gamma >= 1.0 {
            return Err(ConfigError::GammaOutOfRange(self.gamma));
        }
        if self.omega_max == 0 {
            return Err(ConfigError::ZeroGroupSize);
        }
        if self.iterations == 0 {
            return Err(ConfigError::ZeroIterations);
        }
        if self.runs == 0 {
            return Err(ConfigError::ZeroRuns);
        }
        match (&self.groups, self.model) {
            (GroupScheme::None, Model::StructuredCooperation) => Ok(()),
            (GroupScheme::None, _) => Ok(()),
            (_, Model::StructuredCooperation) => {
                if let GroupScheme::Explicit(comps) = &self.groups {
                    let sum: usize = comps.iter().map(|c| c.size).sum();
                    if sum != self.m {
                        return Err(ConfigError::CompositionSumMismatch { sum, m: self.m });
                    }
                    for c in comps {
                        c.validate(self.omega_max)?;
                    }
                }
                if self.groups == GroupScheme::Balanced {
                    let cycle_len = balanced_cycle_len(self.omega_max, self.m)?;
                    if !self.runs.is_multiple_of(cycle_len) {
                        return Err(ConfigError::UnbalancedRuns {
                            runs: self.runs,
                            blocks: cycle_len,
                        });
                    }
                }
                Ok(())
            }
            _ => Err(ConfigError::GroupsWithoutCooperation),
        }
    }
}

/// SplitMix64 finalizer used by the seed-mixing function.
fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

const LANDSCAPE_TAG: u64 = 0x6c61_6e64;
const DYNAMICS_TAG: u64 = 0x6479_6e73;

/// Derives the per-run seeds. The landscape seed depends only on
/// `(master_seed, run_index)`, so all models replay on identical
/// landscapes; the dynamics seed additionally mixes the model id.
pub fn derive_seeds(master_seed: u64, run_index: usize, model: Model) -> (u64, u64) {
    let landscape_seed = mix64(master_seed ^ mix64((run_index as u64) ^ LANDSCAPE_TAG));
    let dynamics_seed =
        mix64(master_seed ^ mix64((run_index as u64) ^ DYNAMICS_TAG) ^ mix64(model.id() ^ 0xabcd));
    (landscape_seed, dynamics_seed)
}

/// Group membership attached to a firm record (cooperation model only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupInfo {
    pub id: usize,
    pub size: usize,
    pub shapers: usize,
}

/// One firm's fitness at the end of one iteration.
#[derive(Debug, Clone)]
pub struct FirmRecord {
    pub run: usize,
    /// 1-based iteration index.
    pub iteration: usize,
    pub firm: usize,
    pub role: Role,
    pub group: Option<GroupInfo>,
    pub fitness: f64,
}

/// All records of one replication, in (iteration, firm) order.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub run: usize,
    pub records: Vec<FirmRecord>,
}

/// Number of runs one full composition roster occupies, or an error when
/// the roster total is not a multiple of M.
pub fn balanced_cycle_len(omega_max: usize, m: usize) -> Result<usize, ConfigError> {
    let sum: usize = coop::all_compositions(omega_max)
        .iter()
        .map(|c| c.size)
        .sum();
    if m == 0 || !sum.is_multiple_of(m) {
        return Err(ConfigError::UnbalancedCompositions { sum, m });
    }
    Ok(sum / m)
}

/// Exact bin packing by depth-first search over the given item order.
/// Bins with equal load are interchangeable, so only the first of each
/// load is tried.
fn pack_exact(
    items: &[GroupComposition],
    loads: &mut [usize],
    bins: &mut Vec<Vec<GroupComposition>>,
    cap: usize,
) -> bool {
    let Some((&item, rest)) = items.split_first() else {
        return loads.iter().all(|&l| l == cap);
    };
    let mut tried = Vec::new();
    for b in 0..loads.len() {
        if loads[b] + item.size <= cap && !tried.contains(&loads[b]) {
            tried.push(loads[b]);
            loads[b] += item.size;
            bins[b].push(item);
            if pack_exact(rest, loads, bins, cap) {
                return true;
            }
            loads[b] -= item.size;
            bins[b].pop();
        }
    }
    false
}

/// Splits one randomly shuffled copy of the composition roster into
/// run-sized groups-of-groups. Every composition appears exactly once per
/// cycle, while its run companions vary from cycle to cycle, mirroring
/// random sampling under an exact balance constraint.
pub fn balanced_cycle(
    omega_max: usize,
    m: usize,
    cycle_seed: u64,
) -> Result<Vec<Vec<GroupComposition>>, ConfigError> {
    let runs = balanced_cycle_len(omega_max, m)?;
    let mut roster = coop::all_compositions(omega_max);
    let mut rng = ChaCha8Rng::seed_from_u64(cycle_seed);
    use rand::seq::SliceRandom;
    roster.shuffle(&mut rng);
    let mut loads = vec![0usize; runs];
    let mut bins: Vec<Vec<GroupComposition>> = vec![Vec::new(); runs];
    if !pack_exact(&roster, &mut loads, &mut bins, m) {
        let sum: usize = coop::all_compositions(omega_max)
            .iter()
            .map(|c| c.size)
            .sum();
        return Err(ConfigError::UnbalancedCompositions { sum, m });
    }
    bins.shuffle(&mut rng);
    Ok(bins)
}

const CYCLE_TAG: u64 = 0x6379_636c;

/// Resolves the composition list for one run under the configured scheme.
fn run_compositions<R: Rng>(
    cfg: &SimulationConfig,
    run_index: usize,
    rng: &mut R,
) -> Result<Vec<GroupComposition>, ConfigError> {
    match &cfg.groups {
        GroupScheme::Explicit(comps) => Ok(comps.clone()),
        GroupScheme::Balanced => {
            let cycle_len = balanced_cycle_len(cfg.omega_max, cfg.m)?;
            let cycle = run_index / cycle_len;
            let seed = mix64(cfg.master_seed ^ mix64(cycle as u64 ^ CYCLE_TAG));
            let bins = balanced_cycle(cfg.omega_max, cfg.m, seed)?;
            Ok(bins[run_index % cycle_len].clone())
        }
        GroupScheme::None | GroupScheme::Random => {
            Ok(coop::sample_compositions(cfg.m, cfg.omega_max, rng))
        }
    }
}

/// Executes one replication and returns its full per-iteration log.
pub fn run_replication(cfg: &SimulationConfig, run_index: usize) -> Result<RunLog, ConfigError> {
    cfg.validate()?;
    let (landscape_seed, dynamics_seed) = derive_seeds(cfg.master_seed, run_index, cfg.model);
    let landscape = Landscape::generate(cfg.landscape_config(landscape_seed))?;
    let mut rng = ChaCha8Rng::seed_from_u64(dynamics_seed);
    let mut records = Vec::with_capacity(cfg.iterations * cfg.m);

    let push_records =
        |records: &mut Vec<FirmRecord>, pop: &Population, groups: Option<&CoopState>, t: usize| {
            for firm in &pop.firms {
                let group = groups.map(|st| {
                    let g = st.group_of(firm.id);
                    GroupInfo {
                        id: g.id,
                        size: g.composition.size,
                        shapers: g.composition.shapers,
                    }
                });
                records.push(FirmRecord {
                    run: run_index,
                    iteration: t,
                    firm: firm.id,
                    role: firm.role,
                    group,
                    fitness: firm.fitness,
                });
            }
        };

    match cfg.model {
        Model::Standard => {
            let mut pop = Population::init_random(cfg.m, cfg.beta, &landscape, &mut rng);
            for t in 1..=cfg.iterations {
                standard::run_iteration(&mut pop, &landscape, &mut rng);
                push_records(&mut records, &pop, None, t);
            }
        }
        Model::StealthLearning => {
            let mut pop = Population::init_random(cfg.m, cfg.beta, &landscape, &mut rng);
            let mut state = StealthState::init(cfg.m, cfg.n, cfg.learning_params(), &mut rng);
            for t in 1..=cfg.iterations {
                stealth::run_iteration(&mut pop, &landscape, &mut state, &mut rng);
                push_records(&mut records, &pop, None, t);
            }
        }
        Model::StructuredCooperation => {
            let comps = run_compositions(cfg, run_index, &mut rng)?;
            let (mut state, roles) = CoopState::init(
                cfg.m,
                cfg.n,
                cfg.omega_max,
                &comps,
                cfg.learning_params(),
                &mut rng,
            )?;
            let mut pop = Population::init_with_roles(&roles, &landscape, &mut rng);
            for t in 1..=cfg.iterations {
                let mut streams = CoopRng::Shared(&mut rng);
                coop::run_iteration(&mut pop, &landscape, &mut state, &mut streams);
                push_records(&mut records, &pop, Some(&state), t);
            }
        }
    }

    Ok(RunLog {
        run: run_index,
        records,
    })
}

/// Runs every replication of a cell, in parallel, merged in run order.
pub fn run_cell(cfg: &SimulationConfig) -> Result<Vec<RunLog>, ConfigError> {
    cfg.validate()?;
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| run_replication(cfg, run))
        .collect()
}

/// One experiment cell: a stable id and its configuration.
#[derive(Debug, Clone)]
pub struct ExperimentCell {
    pub id: String,
    pub config: SimulationConfig,
}

/// A completed cell: raw logs plus the default aggregate set.
#[derive(Debug, Clone)]
pub struct CellOutput {
    pub cell: ExperimentCell,
    pub logs: Vec<RunLog>,
    pub aggregates: Vec<AggregateSeries>,
}

/// Runs a grid of cells. A failing cell reports its named error without
/// affecting the other cells.
pub fn run_experiment(
    cells: Vec<ExperimentCell>,
) -> Vec<Result<CellOutput, (String, ConfigError)>> {
    cells
        .into_iter()
        .map(|cell| match run_cell(&cell.config) {
            Ok(logs) => {
                let aggregates = default_selectors(&cell.config)
                    .into_iter()
                    .map(|sel| aggregate(&logs, sel, cell.config.iterations))
                    .collect();
                Ok(CellOutput {
                    cell,
                    logs,
                    aggregates,
                })
            }
            Err(e) => Err((cell.id, e)),
        })
        .collect()
}

/// A per-iteration statistic to aggregate across runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Selector {
    /// Best fitness over the whole population (per run).
    PopulationBest,
    /// Best fitness over the firms of one role (per run).
    RoleBest(Role),
    /// Mean fitness over the firms of one role (per run).
    RoleMean(Role),
    /// Mean fitness over one role inside groups of one composition
    /// (per group appearance).
    CompositionRoleMean(GroupComposition, Role),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::PopulationBest => write!(f, "population_best"),
            Selector::RoleBest(r) => write!(f, "{r}_best"),
            Selector::RoleMean(r) => write!(f, "{r}_mean"),
            Selector::CompositionRoleMean(c, r) => {
                write!(f, "comp_{}_{}_{r}_mean", c.size, c.shapers)
            }
        }
    }
}

/// Per-sample values of a selector at one iteration. For run-level
/// selectors the samples sit in run order (absent when a run has no firm
/// matching the selector); for composition selectors there is one sample
/// per group appearance, ordered by (run, group id).
pub fn samples_at(logs: &[RunLog], selector: &Selector, iteration: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for log in logs {
        let iter_records: Vec<&FirmRecord> = log
            .records
            .iter()
            .filter(|r| r.iteration == iteration)
            .collect();
        match selector {
            Selector::PopulationBest => {
                if let Some(best) = iter_records.iter().map(|r| r.fitness).fold(None, fold_max) {
                    out.push(best);
                }
            }
            Selector::RoleBest(role) => {
                if let Some(best) = iter_records
                    .iter()
                    .filter(|r| r.role == *role)
                    .map(|r| r.fitness)
                    .fold(None, fold_max)
                {
                    out.push(best);
                }
            }
            Selector::RoleMean(role) => {
                let values: Vec<f64> = iter_records
                    .iter()
                    .filter(|r| r.role == *role)
                    .map(|r| r.fitness)
                    .collect();
                if !values.is_empty() {
                    out.push(stats::mean(&values));
                }
            }
            Selector::CompositionRoleMean(comp, role) => {
                let mut group_ids: Vec<usize> = iter_records
                    .iter()
                    .filter_map(|r| r.group)
                    .filter(|g| g.size == comp.size && g.shapers == comp.shapers)
                    .map(|g| g.id)
                    .collect();
                group_ids.sort_unstable();
                group_ids.dedup();
                for gid in group_ids {
                    let values: Vec<f64> = iter_records
                        .iter()
                        .filter(|r| r.role == *role && r.group.is_some_and(|g| g.id == gid))
                        .map(|r| r.fitness)
                        .collect();
                    if !values.is_empty() {
                        out.push(stats::mean(&values));
                    }
                }
            }
        }
    }
    out
}

fn fold_max(acc: Option<f64>, f: f64) -> Option<f64> {
    Some(acc.map_or(f, |a| a.max(f)))
}

/// Aggregate of one selector at one iteration.
#[derive(Debug, Clone)]
pub struct AggregatePoint {
    pub iteration: usize,
    pub mean: f64,
    pub std: f64,
    /// Absent below two samples.
    pub ci95_half: Option<f64>,
    pub samples: usize,
}

/// Aggregate series of one selector over all iterations.
#[derive(Debug, Clone)]
pub struct AggregateSeries {
    pub selector: Selector,
    pub points: Vec<AggregatePoint>,
}

/// Mean, sample std, and t-based 95% half-width per iteration.
pub fn aggregate(logs: &[RunLog], selector: Selector, iterations: usize) -> AggregateSeries {
    let points = (1..=iterations)
        .filter_map(|t| {
            let values = samples_at(logs, &selector, t);
            if values.is_empty() {
                return None;
            }
            Some(AggregatePoint {
                iteration: t,
                mean: stats::mean(&values),
                std: if values.len() > 1 {
                    stats::sample_std(&values)
                } else {
                    0.0
                },
                ci95_half: stats::ci95_half(&values),
                samples: values.len(),
            })
        })
        .collect();
    AggregateSeries { selector, points }
}

/// The selectors emitted for a cell: population best plus per-role best
/// and mean, and per-composition role means for grouped runs.
pub fn default_selectors(cfg: &SimulationConfig) -> Vec<Selector> {
    let mut out = vec![
        Selector::PopulationBest,
        Selector::RoleBest(Role::Searcher),
        Selector::RoleBest(Role::Shaper),
        Selector::RoleMean(Role::Searcher),
        Selector::RoleMean(Role::Shaper),
    ];
    if cfg.model == Model::StructuredCooperation {
        for comp in coop::all_compositions(cfg.omega_max) {
            if comp.shapers < comp.size {
                out.push(Selector::CompositionRoleMean(comp, Role::Searcher));
            }
            if comp.shapers > 0 {
                out.push(Selector::CompositionRoleMean(comp, Role::Shaper));
            }
        }
    }
    out
}
