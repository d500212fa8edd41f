//! Long-format `series,x,y,lo,hi` table built from the CSV artifacts of a run.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub const PLOT_FILE: &str = "plot_data.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub lo: f64,
    pub hi: f64,
}

impl PlotRow {
    fn point(series: String, x: f64, y: f64) -> Self {
        Self { series, x, y, lo: y, hi: y }
    }
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().with_context(|| format!("not a number: {s:?}"))
}

/// Rows of one artifact, recognized by its header; `None` for unknown files.
fn rows_for(stem: &str, text: &str) -> Result<Option<Vec<PlotRow>>> {
    let mut lines = text.lines();
    let Some(header) = lines.next() else { return Ok(None) };
    let records: Vec<Vec<&str>> = lines.filter(|l| !l.is_empty()).map(|l| l.split(',').collect()).collect();
    let mut out = Vec::new();
    match header {
        "eps,time,metric,estimate,ci_lo,ci_hi,noise_floor" => {
            for r in &records {
                let series = format!("{stem}:{}:t={}", r[2], r[1]);
                out.push(PlotRow { series, x: num(r[0])?, y: num(r[3])?, lo: num(r[4])?, hi: num(r[5])? });
                out.push(PlotRow::point(format!("{stem}:noise_floor:t={}", r[1]), num(r[0])?, num(r[6])?));
            }
        }
        "time,estimate,ci_lo,ci_hi,noise_floor" => {
            for r in &records {
                out.push(PlotRow { series: stem.into(), x: num(r[0])?, y: num(r[1])?, lo: num(r[2])?, hi: num(r[3])? });
                out.push(PlotRow::point(format!("{stem}:noise_floor"), num(r[0])?, num(r[4])?));
            }
        }
        "delta,estimate,se" => {
            for r in &records {
                let (y, se) = (num(r[1])?, num(r[2])?);
                out.push(PlotRow { series: stem.into(), x: num(r[0])?, y, lo: y - 1.96 * se, hi: y + 1.96 * se });
            }
        }
        "time,k,mean,se" => {
            for r in &records {
                let (y, se) = (num(r[2])?, num(r[3])?);
                out.push(PlotRow { series: format!("{stem}:k={}", r[1]), x: num(r[0])?, y, lo: y - 1.96 * se, hi: y + 1.96 * se });
            }
        }
        "path,seg_index,kind,start_time,end_time" => {
            for r in &records {
                let (a, b) = (num(r[3])?, num(r[4])?);
                out.push(PlotRow::point(format!("{stem}:{}", r[2]), a, b - a));
            }
        }
        _ => return Ok(None),
    }
    Ok(Some(out))
}

/// Rows from every recognized CSV in `dir`, in file-name order.
pub fn collect_rows(dir: &Path) -> Result<Vec<PlotRow>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.file_type()?.is_file() && name.ends_with(".csv") && name != PLOT_FILE {
            names.push(name);
        }
    }
    names.sort();
    let mut rows = Vec::new();
    for name in names {
        let text = fs::read_to_string(dir.join(&name))?;
        let stem = name.trim_end_matches(".csv");
        if let Some(r) = rows_for(stem, &text).with_context(|| format!("parsing {name}"))? {
            rows.extend(r);
        }
    }
    Ok(rows)
}

pub fn write_rows(rows: &[PlotRow], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "series,x,y,lo,hi")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.series, r.x, r.y, r.lo, r.hi)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `plot_data.csv` for `run_dir` into `out`; fails on a directory without artifacts.
pub fn emit_plot_data(run_dir: &Path, out: &Path) -> Result<usize> {
    let rows = collect_rows(run_dir)?;
    if rows.is_empty() {
        return Err(crate::usage(format!("no plottable artifacts in {}", run_dir.display())));
    }
    write_rows(&rows, &out.join(PLOT_FILE))?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupation_rows_carry_normal_bands() {
        let rows = rows_for("occupation", "delta,estimate,se\n0.1,0.5,0.1\n").unwrap().unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].lo - 0.304).abs() < 1e-12 && (rows[0].hi - 0.696).abs() < 1e-12);
    }

    #[test]
    fn convergence_rows_split_by_time() {
        let text = "eps,time,metric,estimate,ci_lo,ci_hi,noise_floor\n0.2,1,bl_action,0.3,0.2,0.4,0.01\n";
        let rows = rows_for("convergence", text).unwrap().unwrap();
        assert_eq!(rows[0].series, "convergence:bl_action:t=1");
        assert_eq!((rows[0].x, rows[0].y, rows[0].lo, rows[0].hi), (0.2, 0.3, 0.2, 0.4));
        assert_eq!(rows[1].y, 0.01);
    }

    #[test]
    fn unknown_files_are_skipped_and_empty_dirs_rejected() {
        assert!(rows_for("x", "a,b\n1,2\n").unwrap().is_none());
        let dir = tempfile::tempdir().unwrap();
        let err = emit_plot_data(dir.path(), dir.path()).unwrap_err();
        assert_eq!(crate::exit_code(&err), crate::EXIT_CONFIG);
    }
}
