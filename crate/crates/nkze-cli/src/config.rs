//! Experiment configuration: flat `key = value` files with one optional
//! `[cell <id>]` section per experiment cell, plus command-line overrides.
//!
//! Keys before the first section apply to every cell; section keys and
//! command-line overrides win, in that order. Omitted keys fall back to
//! the library defaults.

use nkze::coop::GroupComposition;
use nkze::engine::{ExperimentCell, GroupScheme, Model, SimulationConfig};

/// A fully resolved experiment: the grid of cells to run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub cells: Vec<ExperimentCell>,
}

fn parse_key<T: std::str::FromStr>(key: &str, value: &str, kind: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("key '{key}': expected {kind}, got '{value}'"))
}

fn parse_compositions(key: &str, value: &str) -> Result<Vec<GroupComposition>, String> {
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            let (size, shapers) = item
                .split_once(':')
                .ok_or_else(|| format!("key '{key}': expected size:shapers, got '{item}'"))?;
            Ok(GroupComposition::new(
                parse_key(key, size.trim(), "an integer group size")?,
                parse_key(key, shapers.trim(), "an integer shaper count")?,
            ))
        })
        .collect()
}

/// Applies one `key = value` assignment onto a config under construction.
pub fn apply_assignment(cfg: &mut SimulationConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "model" => {
            cfg.model = Model::parse(value).ok_or_else(|| {
                format!("key 'model': expected standard|stealthl|structc, got '{value}'")
            })?;
            if cfg.model == Model::StructuredCooperation && cfg.groups == GroupScheme::None {
                cfg.groups = GroupScheme::Random;
            }
            if cfg.model != Model::StructuredCooperation {
                cfg.groups = GroupScheme::None;
            }
        }
        "n" => cfg.n = parse_key(key, value, "a positive integer")?,
        "k" => cfg.k = parse_key(key, value, "a non-negative integer")?,
        "z" => cfg.z = parse_key(key, value, "a non-negative integer")?,
        "e" => cfg.e = parse_key(key, value, "a non-negative integer")?,
        "m" => cfg.m = parse_key(key, value, "a positive integer")?,
        "beta" => cfg.beta = parse_key(key, value, "a number in [0,1]")?,
        "alpha" => cfg.alpha = parse_key(key, value, "a number in [0,1]")?,
        "theta" => cfg.theta = parse_key(key, value, "a positive integer")?,
        "epsilon0" => cfg.eps0 = parse_key(key, value, "a number in [0,1]")?,
        "gamma" => cfg.gamma = parse_key(key, value, "a number in (0,1)")?,
        "omega_max" => cfg.omega_max = parse_key(key, value, "a positive integer")?,
        "iterations" => cfg.iterations = parse_key(key, value, "a positive integer")?,
        "runs" => cfg.runs = parse_key(key, value, "a positive integer")?,
        "seed" => cfg.master_seed = parse_key(key, value, "a 64-bit unsigned integer")?,
        "groups" => {
            cfg.groups = match value {
                "random" => GroupScheme::Random,
                "balanced" => GroupScheme::Balanced,
                "none" => GroupScheme::None,
                _ => {
                    return Err(format!(
                        "key 'groups': expected random|balanced|none, got '{value}'"
                    ))
                }
            }
        }
        "compositions" => cfg.groups = GroupScheme::Explicit(parse_compositions(key, value)?),
        _ => return Err(format!("unknown key '{key}'")),
    }
    Ok(())
}

fn split_assignment(line: &str) -> Result<(&str, &str), String> {
    let (key, value) = line
        .split_once('=')
        .ok_or_else(|| format!("expected 'key = value', got '{line}'"))?;
    Ok((key.trim(), value.trim()))
}

type Assignments = Vec<(String, String)>;

/// Parses a config file into (global assignments, per-cell assignments).
fn parse_sections(text: &str) -> Result<(Assignments, Vec<(String, Assignments)>), String> {
    let mut globals = Assignments::new();
    let mut cells: Vec<(String, Assignments)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| format!("line {}: unterminated section header", lineno + 1))?
                .trim();
            let id = header
                .strip_prefix("cell")
                .map(str::trim)
                .filter(|id| !id.is_empty())
                .ok_or_else(|| {
                    format!("line {}: section must look like [cell <id>]", lineno + 1)
                })?;
            if cells.iter().any(|(existing, _)| existing == id) {
                return Err(format!("line {}: duplicate cell id '{id}'", lineno + 1));
            }
            cells.push((id.to_string(), Vec::new()));
            continue;
        }
        let (key, value) =
            split_assignment(line).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        let slot = match cells.last_mut() {
            Some((_, assignments)) => assignments,
            None => &mut globals,
        };
        slot.push((key.to_string(), value.to_string()));
    }
    Ok((globals, cells))
}

/// Resolves file text plus overrides into the cell grid. `overrides`
/// apply to every cell, after its own assignments.
pub fn resolve(
    file_text: Option<&str>,
    preset_cells: Option<Vec<ExperimentCell>>,
    overrides: &[(String, String)],
) -> Result<ExperimentSpec, String> {
    let mut cells: Vec<ExperimentCell> = match (file_text, preset_cells) {
        (Some(text), None) => {
            let (globals, sections) = parse_sections(text)?;
            let mut base = SimulationConfig::default();
            for (key, value) in &globals {
                apply_assignment(&mut base, key, value)?;
            }
            if sections.is_empty() {
                vec![ExperimentCell {
                    id: "default".into(),
                    config: base,
                }]
            } else {
                let mut out = Vec::new();
                for (id, assignments) in sections {
                    let mut config = base.clone();
                    for (key, value) in &assignments {
                        apply_assignment(&mut config, key, value)
                            .map_err(|e| format!("cell '{id}': {e}"))?;
                    }
                    out.push(ExperimentCell { id, config });
                }
                out
            }
        }
        (None, Some(cells)) => cells,
        (None, None) => {
            vec![ExperimentCell {
                id: "default".into(),
                config: SimulationConfig::default(),
            }]
        }
        (Some(_), Some(_)) => {
            return Err("--config and --preset are mutually exclusive".into());
        }
    };

    for cell in &mut cells {
        for (key, value) in overrides {
            apply_assignment(&mut cell.config, key, value)
                .map_err(|e| format!("cell '{}': {e}", cell.id))?;
        }
        cell.config
            .validate()
            .map_err(|e| format!("cell '{}': {e}", cell.id))?;
    }
    Ok(ExperimentSpec { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_pure_defaults() {
        let spec = resolve(None, None, &[]).unwrap();
        assert_eq!(spec.cells.len(), 1);
        let cfg = &spec.cells[0].config;
        assert_eq!(cfg.model, Model::Standard);
        assert_eq!((cfg.n, cfg.z, cfg.m), (12, 12, 10));
        assert_eq!((cfg.beta, cfg.alpha, cfg.gamma), (0.5, 0.2, 0.999));
        assert_eq!((cfg.theta, cfg.omega_max), (50, 4));
        assert_eq!(cfg.eps0, 1.0);
        assert_eq!((cfg.iterations, cfg.runs), (100, 50));
    }

    #[test]
    fn sections_inherit_globals_and_override_them() {
        let text = "
            runs = 5
            k = 2
            [cell a]
            model = stealthl
            [cell b]
            k = 7   # trailing comment
        ";
        let spec = resolve(Some(text), None, &[]).unwrap();
        assert_eq!(spec.cells.len(), 2);
        assert_eq!(spec.cells[0].config.model, Model::StealthLearning);
        assert_eq!(spec.cells[0].config.k, 2);
        assert_eq!(spec.cells[1].config.k, 7);
        assert_eq!(spec.cells[1].config.runs, 5);
    }

    #[test]
    fn unknown_keys_and_bad_types_are_named() {
        let err = resolve(Some("wat = 1"), None, &[]).unwrap_err();
        assert!(err.contains("unknown key 'wat'"), "{err}");
        let err = resolve(Some("k = banana"), None, &[]).unwrap_err();
        assert!(err.contains("key 'k'") && err.contains("banana"), "{err}");
    }

    #[test]
    fn bound_violations_are_rejected_with_the_bound() {
        let err = resolve(None, None, &[("k".into(), "13".into())]).unwrap_err();
        assert!(err.contains("K must be <= N-1"), "{err}");
    }

    #[test]
    fn overrides_beat_file_values() {
        let spec = resolve(Some("k = 2"), None, &[("k".into(), "5".into())]).unwrap();
        assert_eq!(spec.cells[0].config.k, 5);
    }

    #[test]
    fn compositions_parse_and_require_structc() {
        let text = "
            model = structc
            m = 10
            compositions = 4:3, 3:1, 2:0, 1:1
        ";
        let spec = resolve(Some(text), None, &[]).unwrap();
        match &spec.cells[0].config.groups {
            GroupScheme::Explicit(comps) => {
                assert_eq!(comps.len(), 4);
                assert_eq!(comps[0], GroupComposition::new(4, 3));
            }
            other => panic!("unexpected scheme {other:?}"),
        }
        let err = resolve(Some("compositions = 4:0"), None, &[]).unwrap_err();
        assert!(err.contains("structured cooperation"), "{err}");
    }

    #[test]
    fn balanced_groups_need_divisible_runs() {
        let text = "
            model = structc
            groups = balanced
            runs = 10
        ";
        let err = resolve(Some(text), None, &[]).unwrap_err();
        assert!(err.contains("divisible"), "{err}");
    }
}
