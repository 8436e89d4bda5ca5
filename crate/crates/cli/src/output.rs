//! Writers for the artifacts the commands produce.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rhc_msvm::{class_pairs, ClassifierParams, Dataset, EvaluationReport};

use crate::error::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `x_1,…,x_N,label` with a header.
pub fn dataset_csv(d: &Dataset) -> String {
    let mut s = String::new();
    for j in 1..=d.n_features() {
        let _ = write!(s, "x{j},");
    }
    s.push_str("label\n");
    for (x, y) in d.iter() {
        for v in x {
            let _ = write!(s, "{v},");
        }
        let _ = writeln!(s, "{y}");
    }
    s
}

/// Rows `metric,<name a>,<name b>,…` for the given evaluations.
pub fn comparison_csv(names: &[&str], reports: &[&EvaluationReport]) -> String {
    let mut rows: Vec<(String, Vec<String>)> = vec![
        ("hinge_loss".into(), reports.iter().map(|r| r.hinge_loss.to_string()).collect()),
        ("risk_count".into(), reports.iter().map(|r| r.risk_count.to_string()).collect()),
    ];
    for (i, pm) in reports[0].pairwise_margins.iter().enumerate() {
        rows.push((
            format!("margin_{}_{}", pm.r, pm.s),
            reports
                .iter()
                .map(|r| r.pairwise_margins[i].margin.to_string())
                .collect(),
        ));
    }
    rows.push((
        "smallest_margin".into(),
        reports.iter().map(|r| r.smallest_margin().margin.to_string()).collect(),
    ));
    rows.push((
        "smallest_margin_pair".into(),
        reports
            .iter()
            .map(|r| {
                let sm = r.smallest_margin();
                format!("({} {})", sm.r, sm.s)
            })
            .collect(),
    ));
    rows.push((
        "worst_pair_objective".into(),
        reports.iter().map(|r| r.worst_pair_objective.to_string()).collect(),
    ));
    let mut s = String::from("metric");
    for n in names {
        let _ = write!(s, ",{n}");
    }
    s.push('\n');
    for (metric, values) in rows {
        s.push_str(&metric);
        for v in values {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Renders a CSV table with aligned columns for the terminal.
pub fn pretty_table(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|v| v.len()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for row in &rows {
        for (c, v) in row.iter().enumerate() {
            let _ = write!(s, "{v:<w$}  ", w = widths[c]);
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
    }
    s
}

/// One row per pair and level: the line `omega_1 x_1 + omega_2 x_2 + beta = level`.
pub fn boundaries_csv(p: &ClassifierParams) -> String {
    let mut s = String::from("r,s,level,omega_1,omega_2,beta\n");
    for (r, sp) in class_pairs(p.n_classes()) {
        let omega = p.omega(r, sp);
        let beta = p.beta(r, sp);
        for level in [-1, 0, 1] {
            let _ = writeln!(s, "{r},{sp},{level},{},{},{beta}", omega[0], omega[1]);
        }
    }
    s
}

pub fn samples_csv(d: &Dataset) -> String {
    let mut s = String::from("index,x_1,x_2,label\n");
    for (i, (x, y)) in d.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{y}", i + 1, x[0], x[1]);
    }
    s
}
