use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{svg, ExperimentResult};
use crate::csvio::fmt_real;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub verdicts: PathBuf,
}

/// Tidy CSV with a commented config echo (including every check's expected
/// value and tolerance) ahead of the header row.
pub fn render_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# experiment = {}", result.name);
    for (k, v) in result.config.iter() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    for v in &result.verdicts {
        let _ = writeln!(out, "# check {} expected {} tolerance {}", v.check, fmt_real(v.expected), v.tolerance);
    }
    out.push_str("n,eps,replicate,statistic,value\n");
    for r in &result.rows {
        let n = r.n.map(|v| v.to_string()).unwrap_or_default();
        let eps = r.eps.map(fmt_real).unwrap_or_default();
        let rep = r.replicate.map_or_else(|| "all".to_string(), |v| v.to_string());
        let _ = writeln!(out, "{n},{eps},{rep},{},{}", r.statistic, fmt_real(r.value));
    }
    out
}

pub fn render_verdicts(result: &ExperimentResult) -> String {
    let mut out = String::new();
    for v in &result.verdicts {
        let _ = writeln!(
            out,
            "{} {} observed={} expected={} tolerance={}",
            if v.pass { "PASS" } else { "FAIL" },
            v.check,
            fmt_real(v.observed),
            fmt_real(v.expected),
            v.tolerance
        );
    }
    out
}

/// Writes `<name>.csv`, `<name>.svg` and `<name>.verdicts.txt` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir)?;
    let paths = OutputPaths {
        csv: dir.join(format!("{}.csv", result.name)),
        svg: dir.join(format!("{}.svg", result.name)),
        verdicts: dir.join(format!("{}.verdicts.txt", result.name)),
    };
    std::fs::write(&paths.csv, render_csv(result))?;
    std::fs::write(&paths.svg, svg::render(&result.plot))?;
    std::fs::write(&paths.verdicts, render_verdicts(result))?;
    Ok(paths)
}
