//! Writes the report and the CSV artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qclab::io::{self as qio, WindowSidecar};

use crate::pipeline::Run;

pub const REPORT: &str = "report.json";
pub const ZEROS: &str = "zeros.csv";
pub const MEASURE: &str = "measure.csv";
pub const REBUILT: &str = "rebuilt.csv";
pub const G_WINDOWS: &str = "g_windows.csv";
pub const GROWTH: &str = "growth.csv";
pub const POISSON_VS_T: &str = "poisson_vs_T.csv";

/// Creates `dir` and checks that a file can be created in it.
pub fn prepare_dir(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".qclab-write-probe");
    File::create(&probe)?;
    fs::remove_file(&probe)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> std::io::Error {
    std::io::Error::other(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn write_pairs(path: &Path, header: &str, rows: &[(f64, f64)]) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{header}")?;
    for (x, y) in rows {
        writeln!(w, "{x:?},{y:?}")?;
    }
    w.flush()
}

/// Writes every artifact the run produced and returns the paths, report
/// last.
pub fn emit_outputs(run: &Run, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let a = &run.artifacts;
    if let Some(z) = &a.zeros {
        let p = dir.join(ZEROS);
        qio::write_zero_set(create(&p)?, z).map_err(|e| io_err(&p, e))?;
        let side = qio::sidecar_path(&p);
        let json = serde_json::to_string(&WindowSidecar { window: z.window() })
            .map_err(|e| io_err(&side, e))?;
        fs::write(&side, json + "\n").map_err(|e| io_err(&side, e))?;
        written.push(p);
        written.push(side);
    }
    if let Some(mu) = &a.measure {
        let p = dir.join(MEASURE);
        qio::write_measure(create(&p)?, mu).map_err(|e| io_err(&p, e))?;
        written.push(p);
    }
    if let Some(f) = &a.rebuilt {
        let p = dir.join(REBUILT);
        qio::write_exp_sum(create(&p)?, f).map_err(|e| io_err(&p, e))?;
        written.push(p);
    }
    for (name, header, rows) in [
        (G_WINDOWS, "X,sup_abs_g", &a.g_windows),
        (GROWTH, "s,m", &a.growth),
        (POISSON_VS_T, "T,residual", &a.poisson_vs_t),
    ] {
        if let Some(rows) = rows {
            let p = dir.join(name);
            write_pairs(&p, header, rows)?;
            written.push(p);
        }
    }
    let p = dir.join(REPORT);
    let json = serde_json::to_string_pretty(&run.report).map_err(|e| io_err(&p, e))?;
    fs::write(&p, json + "\n").map_err(|e| io_err(&p, e))?;
    written.push(p);
    Ok(written)
}
