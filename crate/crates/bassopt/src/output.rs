//! CSV and JSON artifacts. Numbers are written with 17 significant digits so
//! reruns compare byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bassopt_core::OptimalSolution;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::montecarlo::{SimResult, ValidationReport};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` and `rows` as CSV.
pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e| CliError::io(path.display(), e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let io = |e| CliError::io(path.display(), e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path.display(), e.into()))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=n).map(|i| format!("{prefix}_{i}")).collect()
    }
}

/// `t, sp, sq, sp_plus_sq, f_opt, f0` and one column per costate component.
/// Group-targeted policies get one `sp_i`/`sq_i` pair per group.
pub fn write_solution(path: &Path, sol: &OptimalSolution) -> Result<()> {
    let c = sol.policy.channels();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(labels("sp", c));
    header.extend(labels("sq", c));
    header.extend(["sp_plus_sq", "f_opt", "f0"].map(String::from));
    header.extend(sol.costate_labels.iter().cloned());
    let grid = sol.grid();
    let total = sol.total_spend();
    let rows = (0..grid.len()).map(|k| {
        let mut row = vec![num(grid.time(k))];
        row.extend((0..c).map(|ch| num(sol.policy.sp(ch)[k])));
        row.extend((0..c).map(|ch| num(sol.policy.sq(ch)[k])));
        row.push(num(total[k]));
        row.push(num(sol.f_opt()[k]));
        row.push(num(sol.f0()[k]));
        row.extend(sol.costate.row(k).iter().map(|x| num(*x)));
        row
    });
    write_csv(path, &header, rows)
}

pub fn write_simulation(path: &Path, sim: &SimResult) -> Result<()> {
    let header = ["t", "f_mean", "f_stderr"].map(String::from);
    let rows = (0..sim.grid.len()).map(|k| vec![num(sim.grid.time(k)), num(sim.f_mean[k]), num(sim.f_stderr[k])]);
    write_csv(path, &header, rows)
}

pub fn write_validation(path: &Path, rep: &ValidationReport) -> Result<()> {
    let header = ["t", "reference", "f_mean", "f_stderr", "z"].map(String::from);
    let s = &rep.sim;
    let rows = (0..s.grid.len())
        .map(|k| vec![num(s.grid.time(k)), num(rep.reference[k]), num(s.f_mean[k]), num(s.f_stderr[k]), num(rep.z[k])]);
    write_csv(path, &header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0), "1.0000000000000000e0");
        let x = 0.123_456_789_012_345_68_f64;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_with_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_csv(&p, &["a".into(), "b".into()], std::iter::empty()).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n");
    }
}
