//! CSV and PGM writers.
//!
//! CSV files are comma-separated with a header row and LF line endings;
//! floats use Rust's shortest round-trip formatting. PGM heatmaps are binary
//! P5 with maxval 255, value 0 black and 1 white, `p1` increasing down the
//! rows and `p2` across the columns.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::feedback::FeedbackTrace;
use crate::kernel::{CoupleKernel, IndividualKernel};
use crate::markov::Distribution16;
use crate::monte_carlo::Trajectory;
use crate::state::{CoupleState, IndividualState, Model};
use crate::sweep::{Field, SweepGrid};

fn distribution_header() -> String {
    CoupleState::all().map(|s| format!("p_{}_{}", s.s1, s.s2)).collect::<Vec<_>>().join(",")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Nonzero individual-table entries: `s,s_partner,s_next,probability`.
pub fn write_individual_kernel_csv<W: Write>(kernel: &IndividualKernel, mut w: W) -> io::Result<()> {
    writeln!(w, "s,s_partner,s_next,probability")?;
    for me in IndividualState::ALL {
        for partner in IndividualState::ALL {
            for next in IndividualState::ALL {
                let p = kernel.prob(next, me, partner);
                if p > 0.0 {
                    writeln!(w, "{me},{partner},{next},{p}")?;
                }
            }
        }
    }
    Ok(())
}

/// Nonzero couple-kernel entries: `s1,s2,s1_next,s2_next,probability`.
pub fn write_couple_kernel_csv<W: Write>(kernel: &CoupleKernel, mut w: W) -> io::Result<()> {
    writeln!(w, "s1,s2,s1_next,s2_next,probability")?;
    for t in kernel.transitions() {
        writeln!(w, "{},{},{},{},{}", t.from.s1, t.from.s2, t.to.s1, t.to.s2, t.prob)?;
    }
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "t,s1,s2")?;
    for (t, s) in trajectory.states.iter().enumerate() {
        writeln!(w, "{t},{},{}", s.s1, s.s2)?;
    }
    Ok(())
}

/// One row per time step: `t` then the sixteen probabilities.
pub fn write_distribution_trace_csv<W: Write>(trace: &[Distribution16], mut w: W) -> io::Result<()> {
    writeln!(w, "t,{}", distribution_header())?;
    for (t, d) in trace.iter().enumerate() {
        writeln!(w, "{t},{}", join(d.probs()))?;
    }
    Ok(())
}

pub fn write_feedback_trace_csv<W: Write>(trace: &FeedbackTrace, mut w: W) -> io::Result<()> {
    let model = trace.initial().params.model;
    let observables = Field::phases(model).iter().map(|f| f.name()).collect::<Vec<_>>().join(",");
    writeln!(w, "turn,p1,p2,v1,v2,{observables}")?;
    for r in &trace.records {
        let obs = match model {
            Model::Model1 => {
                let b = r.basins();
                vec![b.normal, b.separation, b.male_violence, b.female_violence]
            }
            Model::Model2 => {
                let o = r.model2();
                vec![o.normal, o.threshold, o.recovering, o.violence_cycle, o.mutual_violence, o.separation]
            }
        };
        writeln!(w, "{},{},{},{},{},{}", r.turn, r.params.p1, r.params.p2, r.violence.v1, r.violence.v2, join(&obs))?;
    }
    Ok(())
}

/// Matrix form of one field: header `p1,<p2 values>`, then one row per `p1`.
pub fn write_field_matrix_csv<W: Write>(grid: &SweepGrid, field: Field, mut w: W) -> io::Result<()> {
    let matrix = grid.field_matrix(field).ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, format!("field {field} not in grid")))?;
    let n = grid.resolution();
    let axis: Vec<f64> = (0..n).map(|k| grid.spec.axis_value(k)).collect();
    writeln!(w, "p1,{}", join(&axis))?;
    for (i, row) in matrix.iter().enumerate() {
        writeln!(w, "{},{}", axis[i], join(row))?;
    }
    Ok(())
}

/// Long format: `p1,p2,field,value`, cells row-major, fields in record order.
pub fn write_long_csv<W: Write>(grid: &SweepGrid, mut w: W) -> io::Result<()> {
    writeln!(w, "p1,p2,field,value")?;
    for (i, j) in grid.cells() {
        let (p1, p2) = (grid.spec.axis_value(i), grid.spec.axis_value(j));
        for (f, v) in grid.fields().iter().zip(grid.cell(i, j)) {
            writeln!(w, "{p1},{p2},{f},{v}")?;
        }
    }
    Ok(())
}

pub fn gray_level(value: f64) -> u8 {
    (value.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn write_pgm<W: Write>(grid: &SweepGrid, field: Field, mut w: W) -> io::Result<()> {
    let matrix = grid.field_matrix(field).ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, format!("field {field} not in grid")))?;
    let n = grid.resolution();
    write!(w, "P5\n{n} {n}\n255\n")?;
    let pixels: Vec<u8> = matrix.iter().flatten().map(|&v| gray_level(v)).collect();
    w.write_all(&pixels)
}

/// Writes `<field>.csv` (and `<field>.pgm` when asked) for every recorded
/// field plus `long.csv`. Returns the paths written, in order.
pub fn write_grid_outputs(grid: &SweepGrid, dir: &Path, pgm: bool) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for &field in grid.fields() {
        let path = dir.join(format!("{field}.csv"));
        let mut buf = Vec::new();
        write_field_matrix_csv(grid, field, &mut buf)?;
        fs::write(&path, buf)?;
        written.push(path);
        if pgm {
            let path = dir.join(format!("{field}.pgm"));
            let mut buf = Vec::new();
            write_pgm(grid, field, &mut buf)?;
            fs::write(&path, buf)?;
            written.push(path);
        }
    }
    let path = dir.join("long.csv");
    let mut buf = Vec::new();
    write_long_csv(grid, &mut buf)?;
    fs::write(&path, buf)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_couple_kernel;
    use crate::markov::{delta_distribution, evolve_trace};
    use crate::state::{ModelParams, MALE_UPSET};
    use crate::sweep::{run_sweep, Scenario, SweepSpec};

    #[test]
    fn individual_audit_row() {
        let k = IndividualKernel::new(Model::Model1, 0.3).unwrap();
        let mut buf = Vec::new();
        write_individual_kernel_csv(&k, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("1,0,")).collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].starts_with("1,0,-1,0.7"));
        assert!(rows[1].starts_with("1,0,1,0.075"));
        assert!(rows[2].starts_with("1,0,2,0.22"));
    }

    #[test]
    fn couple_audit_rows_sum_to_one() {
        let k = build_couple_kernel(ModelParams::model2(0.35, 0.8).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_couple_kernel_csv(&k, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut sums = std::collections::BTreeMap::new();
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            *sums.entry((cols[0].to_string(), cols[1].to_string())).or_insert(0.0) += cols[4].parse::<f64>().unwrap();
        }
        assert_eq!(sums.len(), 16);
        assert!(sums.values().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn distribution_trace_layout() {
        let k = build_couple_kernel(ModelParams::model1(0.0, 0.0).unwrap()).unwrap();
        let trace = evolve_trace(&delta_distribution(MALE_UPSET), &k, 3);
        let mut buf = Vec::new();
        write_distribution_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("t,p_-1_-1,p_-1_0,"));
        assert_eq!(lines[0].split(',').count(), 17);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn pgm_header_and_levels() {
        let grid = run_sweep(&SweepSpec::new(Scenario::Model1Plain).with_resolution(3)).unwrap();
        let mut buf = Vec::new();
        write_pgm(&grid, Field::Normal, &mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(buf.len(), b"P5\n3 3\n255\n".len() + 9);
        // (0,0) cell is pure normal
        assert_eq!(buf[b"P5\n3 3\n255\n".len()], 255);
        assert_eq!(gray_level(-0.3), 0);
        assert_eq!(gray_level(0.5), 128);
    }

    #[test]
    fn matrix_and_long_csv() {
        let grid = run_sweep(&SweepSpec::new(Scenario::Model2Plain).with_resolution(3)).unwrap();
        let mut buf = Vec::new();
        write_field_matrix_csv(&grid, Field::Normal, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "p1,0,0.5,1");
        assert_eq!(text.lines().count(), 4);

        let mut buf = Vec::new();
        write_long_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 9 * 8);
        assert!(write_field_matrix_csv(&grid, Field::MaleViolence, Vec::new()).is_err());
    }
}
