//! Canned experiment grids for the comparison plots.

use nkze::engine::{ExperimentCell, GroupScheme, Model, SimulationConfig};

/// Learning rates swept by the alpha presets.
const ALPHA_SWEEP: [f64; 4] = [0.1, 0.2, 0.5, 0.9];

fn base() -> SimulationConfig {
    SimulationConfig::default()
}

fn cell(id: String, config: SimulationConfig) -> ExperimentCell {
    ExperimentCell { id, config }
}

/// Ruggedness/malleability grid comparing the standard model against
/// stealth learning: (K, E) in {(0,0), (5,6), (11,12)}.
fn fig1() -> Vec<ExperimentCell> {
    let mut cells = Vec::new();
    for model in [Model::Standard, Model::StealthLearning] {
        for (k, e) in [(0, 0), (5, 6), (11, 12)] {
            cells.push(cell(
                format!("{}-k{k}-e{e}", model.name()),
                SimulationConfig {
                    model,
                    k,
                    e,
                    ..base()
                },
            ));
        }
    }
    cells
}

/// Stealth learning-rate sweep at extreme malleability (E = 12) across
/// minimal, intermediate, and high ruggedness.
fn fig2() -> Vec<ExperimentCell> {
    let mut cells = Vec::new();
    for k in [0, 5, 11] {
        for alpha in ALPHA_SWEEP {
            cells.push(cell(
                format!("stealthl-k{k}-e12-a{alpha}"),
                SimulationConfig {
                    model: Model::StealthLearning,
                    k,
                    e: 12,
                    alpha,
                    ..base()
                },
            ));
        }
    }
    cells
}

/// Stealth learning-rate sweep at extreme ruggedness (K = 11) across
/// minimal, intermediate, and high malleability.
fn fig3() -> Vec<ExperimentCell> {
    let mut cells = Vec::new();
    for e in [0, 6, 12] {
        for alpha in ALPHA_SWEEP {
            cells.push(cell(
                format!("stealthl-k11-e{e}-a{alpha}"),
                SimulationConfig {
                    model: Model::StealthLearning,
                    k: 11,
                    e,
                    alpha,
                    ..base()
                },
            ));
        }
    }
    cells
}

/// Structured cooperation over the balanced composition roster. 200 runs
/// give each of the 14 compositions exactly 50 appearances.
fn coop_cell(k: usize, e: usize) -> Vec<ExperimentCell> {
    vec![cell(
        format!("structc-k{k}-e{e}"),
        SimulationConfig {
            model: Model::StructuredCooperation,
            k,
            e,
            runs: 200,
            groups: GroupScheme::Balanced,
            ..base()
        },
    )]
}

pub fn by_name(name: &str) -> Option<Vec<ExperimentCell>> {
    match name {
        "fig1" => Some(fig1()),
        "fig2" => Some(fig2()),
        "fig3" => Some(fig3()),
        "fig4" => Some(coop_cell(0, 0)),
        "fig5" => Some(coop_cell(11, 12)),
        _ => None,
    }
}
