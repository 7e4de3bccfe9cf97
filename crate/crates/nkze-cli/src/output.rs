//! CSV emission and the console summary table. Output is byte-for-byte
//! deterministic for a fixed spec and seed.

use nkze::engine::{AggregateSeries, CellOutput, Selector};
use nkze::population::Role;
use std::io::{self, Write};

pub fn write_raw_csv<W: Write>(mut w: W, results: &[CellOutput]) -> io::Result<()> {
    writeln!(
        w,
        "model,cell_id,run,iteration,firm_id,role,group_id,group_size,group_shapers,fitness"
    )?;
    for res in results {
        let model = res.cell.config.model.name();
        for log in &res.logs {
            for r in &log.records {
                let (gid, gsize, gshapers) = match r.group {
                    Some(g) => (g.id.to_string(), g.size.to_string(), g.shapers.to_string()),
                    None => (String::new(), String::new(), String::new()),
                };
                writeln!(
                    w,
                    "{model},{},{},{},{},{},{gid},{gsize},{gshapers},{}",
                    res.cell.id, r.run, r.iteration, r.firm, r.role, r.fitness
                )?;
            }
        }
    }
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(mut w: W, results: &[CellOutput]) -> io::Result<()> {
    writeln!(
        w,
        "model,cell_id,selector,iteration,mean,std,ci95_half,runs"
    )?;
    for res in results {
        let model = res.cell.config.model.name();
        for series in &res.aggregates {
            for p in &series.points {
                let ci = p.ci95_half.map(|h| h.to_string()).unwrap_or_default();
                writeln!(
                    w,
                    "{model},{},{},{},{},{},{ci},{}",
                    res.cell.id, series.selector, p.iteration, p.mean, p.std, p.samples
                )?;
            }
        }
    }
    Ok(())
}

fn final_point(series: &AggregateSeries) -> Option<(f64, Option<f64>, usize)> {
    series
        .points
        .last()
        .map(|p| (p.mean, p.ci95_half, p.samples))
}

/// Final-iteration means with confidence half-widths, one block per cell.
pub fn print_summary<W: Write>(mut w: W, results: &[CellOutput]) -> io::Result<()> {
    writeln!(
        w,
        "{:<24} {:<22} {:>10} {:>10} {:>6}",
        "cell", "selector", "mean", "ci95", "n"
    )?;
    for res in results {
        let wanted = [
            Selector::PopulationBest,
            Selector::RoleMean(Role::Searcher),
            Selector::RoleMean(Role::Shaper),
        ];
        for series in res
            .aggregates
            .iter()
            .filter(|s| wanted.contains(&s.selector))
        {
            if let Some((mean, ci, n)) = final_point(series) {
                let ci_text = ci.map(|h| format!("{h:.4}")).unwrap_or_else(|| "-".into());
                writeln!(
                    w,
                    "{:<24} {:<22} {:>10.4} {:>10} {:>6}",
                    res.cell.id,
                    series.selector.to_string(),
                    mean,
                    ci_text,
                    n
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nkze::engine::{self, SimulationConfig};

    fn tiny_result() -> CellOutput {
        let cell = engine::ExperimentCell {
            id: "t".into(),
            config: SimulationConfig {
                runs: 2,
                iterations: 3,
                ..SimulationConfig::default()
            },
        };
        engine::run_experiment(vec![cell]).pop().unwrap().unwrap()
    }

    #[test]
    fn raw_csv_has_expected_shape() {
        let res = tiny_result();
        let mut buf = Vec::new();
        write_raw_csv(&mut buf, std::slice::from_ref(&res)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "model,cell_id,run,iteration,firm_id,role,group_id,group_size,group_shapers,fitness"
        );
        assert_eq!(lines.count(), 2 * 3 * 10);
    }

    #[test]
    fn csv_output_is_deterministic() {
        let (a, b) = (tiny_result(), tiny_result());
        let render = |r: &CellOutput| {
            let mut raw = Vec::new();
            write_raw_csv(&mut raw, std::slice::from_ref(r)).unwrap();
            let mut agg = Vec::new();
            write_aggregate_csv(&mut agg, std::slice::from_ref(r)).unwrap();
            (raw, agg)
        };
        assert_eq!(render(&a), render(&b));
    }

    #[test]
    fn summary_covers_each_emitted_cell() {
        let res = tiny_result();
        let mut buf = Vec::new();
        print_summary(&mut buf, std::slice::from_ref(&res)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("population_best"));
        assert!(text.contains("searcher_mean"));
    }
}
