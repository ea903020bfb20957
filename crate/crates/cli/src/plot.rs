//! gnuplot script emission for sweep CSVs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use qfree_core::kg::sweep::CSV_HEADER;

use crate::CliError;

/// A plot script plus any warnings worth printing.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotScript {
    pub script: String,
    pub warnings: Vec<String>,
}

/// Builds a log–log plot of `hs_1mQdQ` against mass, one curve per
/// `(n_basis, grid_points)`. `data_ref` is how the script names the CSV.
pub fn gnuplot_script(csv: &str, data_ref: &str) -> Result<PlotScript, CliError> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or("").trim();
    if header != CSV_HEADER {
        return Err(CliError::Input(format!("malformed sweep CSV header: expected `{CSV_HEADER}`, found `{header}`")));
    }
    let mut curves = BTreeSet::new();
    let mut warnings = Vec::new();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            warnings.push(format!("line {}: {line}", i + 2));
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(CliError::Input(format!("line {}: expected 11 fields, found {}", i + 2, fields.len())));
        }
        let parse = |k: usize| {
            fields[k]
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("line {}: bad integer `{}`", i + 2, fields[k])))
        };
        curves.insert((parse(2)?, parse(3)?));
        rows += 1;
    }
    if rows == 0 {
        warnings.push("CSV has no data rows; the script plots an empty dataset".into());
    }

    let mut s = String::new();
    writeln!(s, "# gnuplot script: HS norm of 1 - Q^dagger Q against mass").unwrap();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set datafile commentschars '#'").unwrap();
    writeln!(s, "set logscale xy").unwrap();
    writeln!(s, "set xlabel 'mass'").unwrap();
    writeln!(s, "set ylabel '||1 - Q^dagger Q||_2'").unwrap();
    writeln!(s, "set key left top").unwrap();
    writeln!(s, "data = '{data_ref}'").unwrap();
    if curves.is_empty() {
        writeln!(s, "set xrange [0.01:1]").unwrap();
        writeln!(s, "set yrange [0.01:1]").unwrap();
        writeln!(s, "plot NaN notitle").unwrap();
    } else {
        let clauses: Vec<String> = curves
            .iter()
            .map(|(n, m)| {
                format!(
                    "data every ::1 using ($3 == {n} && $4 == {m} ? $2 : 1/0):5 with linespoints title 'n={n}, M={m}'"
                )
            })
            .collect();
        writeln!(s, "plot {}", clauses.join(", \\\n     ")).unwrap();
    }
    Ok(PlotScript { script: s, warnings })
}

/// Writes `<csv stem>.gp` next to the CSV and returns its path.
pub fn emit_plot(csv_path: &Path, out: Option<&Path>) -> Result<(std::path::PathBuf, Vec<String>), CliError> {
    let csv = std::fs::read_to_string(csv_path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", csv_path.display())))?;
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| csv_path.with_extension("gp"));
    let data_ref = relative_to(csv_path, &target);
    let plot = gnuplot_script(&csv, &data_ref)?;
    std::fs::write(&target, plot.script)?;
    Ok((target, plot.warnings))
}

/// Path of `csv` as seen from the directory of `script`, falling back to
/// the path as given.
fn relative_to(csv: &Path, script: &Path) -> String {
    let csv_dir = csv.parent().unwrap_or(Path::new(""));
    let script_dir = script.parent().unwrap_or(Path::new(""));
    match csv.file_name() {
        Some(name) if csv_dir == script_dir => name.to_string_lossy().into_owned(),
        _ => csv.to_string_lossy().into_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_curve_per_size() {
        let csv =
            format!("{CSV_HEADER}\n2,1,8,128,0.4,0,0,0,0,0,3\n2,0.5,8,128,0.2,0,0,0,0,0,3\n2,1,4,64,0.3,0,0,0,0,0,1\n");
        let p = gnuplot_script(&csv, "sweep.csv").unwrap();
        assert!(p.warnings.is_empty());
        assert!(p.script.contains("data = 'sweep.csv'"));
        assert!(p.script.contains("title 'n=4, M=64'"));
        assert!(p.script.contains("title 'n=8, M=128'"));
    }

    #[test]
    fn header_only_warns() {
        let p = gnuplot_script(&format!("{CSV_HEADER}\n"), "x.csv").unwrap();
        assert!(p.script.contains("plot NaN"));
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn malformed_header_is_input_error() {
        let err = gnuplot_script("dim,mass\n", "x.csv").unwrap_err();
        assert_eq!(err.exit_code(), crate::exit::INPUT_ERROR);
    }

    #[test]
    fn script_sits_next_to_csv() {
        assert_eq!(relative_to(Path::new("out/a.csv"), Path::new("out/a.gp")), "a.csv");
    }
}
