//! File output. Every file is written to a temporary file in the target
//! directory and renamed into place, so readers never observe partial files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::scheme::SchemeState;
use crate::verify::{MonitorRecord, Report};

/// Writes `path` atomically through `fill`.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// `monitors.csv`: one row per time level, columns in field order.
pub fn write_monitors(path: &Path, records: &[MonitorRecord]) -> Result<()> {
    write_atomic(path, |w| {
        let mut c = csv::Writer::from_writer(w);
        if records.is_empty() {
            c.write_record([
                "t",
                "total_mass",
                "energy",
                "norm_v_v0",
                "norm_v_v0star",
                "norm_mu_v",
                "l1_xi_bulk",
                "l1_xi_surf",
                "envelope_integral_bulk",
                "envelope_integral_surf",
                "omega",
                "newton_iters",
            ])
            .map_err(csv_err)?;
        }
        for r in records {
            c.serialize(r).map_err(csv_err)?;
        }
        c.flush()
    })
}

/// Snapshot of `u` and `mu` at the bulk nodes (`node,x,y,u,mu`).
pub fn write_snapshot(path: &Path, dom: &DiscreteDomain, state: &SchemeState) -> Result<()> {
    let u = state.u();
    write_atomic(path, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["node", "x", "y", "u", "mu"]).map_err(csv_err)?;
        for (i, [x, y]) in dom.coords().iter().enumerate() {
            c.write_record([
                i.to_string(),
                x.to_string(),
                y.to_string(),
                u.bulk[i].to_string(),
                state.mu.bulk[i].to_string(),
            ])
            .map_err(csv_err)?;
        }
        c.flush()
    })
}

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step}.csv")
}

pub fn write_mesh(path: &Path, dom: &DiscreteDomain) -> Result<()> {
    write_atomic(path, |w| dom.write_mesh(w))
}

/// `report.txt` and `report.csv` in `dir`.
pub fn write_report(dir: &Path, report: &dyn Report) -> Result<()> {
    let text = report.text();
    write_atomic(&dir.join("report.txt"), |w| w.write_all(text.as_bytes()))?;
    let (header, rows) = report.csv();
    write_atomic(&dir.join("report.csv"), |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(&header).map_err(csv_err)?;
        for r in &rows {
            c.write_record(r).map_err(csv_err)?;
        }
        c.flush()
    })
}
