//! Contingency-table CSV ingestion.
//!
//! Layout: header row gives the `x` labels; the first column of each data
//! row is the `w` label; cells are integer counts. A trailing `Total` column
//! and/or `Total` row is accepted and checked against the counts rather than
//! ingested.

use std::path::Path;

use crossclass::prob::JointWX;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct CountsCsv {
    pub w_labels: Vec<String>,
    pub x_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl CountsCsv {
    pub fn to_joint(&self) -> Result<JointWX, CliError> {
        JointWX::from_counts(&self.counts)
            .map_err(|e| CliError::Validation(format!("counts csv: {e}")))
    }
}

fn is_total(label: &str) -> bool {
    label.trim().eq_ignore_ascii_case("total")
}

fn parse_count(cell: &str, context: &str) -> Result<u64, CliError> {
    cell.trim().parse::<u64>().map_err(|_| {
        CliError::Validation(format!("{context}: '{cell}' is not a nonnegative integer"))
    })
}

pub fn load_counts_csv(path: &Path) -> Result<CountsCsv, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("csv header: {e}")))?
        .clone();
    if headers.len() < 2 {
        return Err(CliError::Validation(
            "counts csv needs a label column and at least one x column".into(),
        ));
    }
    let mut x_labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let has_total_col = x_labels.last().map(|l| is_total(l)).unwrap_or(false);
    if has_total_col {
        x_labels.pop();
    }

    let mut w_labels = Vec::new();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    let mut totals_row: Option<Vec<u64>> = None;
    for (line, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::Validation(format!("csv row {}: {e}", line + 2)))?;
        let label = record.get(0).unwrap_or("").to_string();
        let cells: Vec<u64> = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(i, c)| parse_count(c, &format!("row '{label}' column {}", i + 1)))
            .collect::<Result<_, _>>()?;
        if cells.len() != x_labels.len() + usize::from(has_total_col) {
            return Err(CliError::Validation(format!(
                "row '{label}' has {} cells, expected {}",
                cells.len(),
                x_labels.len() + usize::from(has_total_col)
            )));
        }
        if is_total(&label) {
            if totals_row.is_some() {
                return Err(CliError::Validation("duplicate Total row".into()));
            }
            totals_row = Some(cells);
            continue;
        }
        if totals_row.is_some() {
            return Err(CliError::Validation("data rows after the Total row".into()));
        }
        if has_total_col {
            let (body, total) = cells.split_at(x_labels.len());
            let sum: u64 = body.iter().sum();
            if sum != total[0] {
                return Err(CliError::Validation(format!(
                    "row '{label}' sums to {sum}, Total column says {}",
                    total[0]
                )));
            }
            w_labels.push(label);
            counts.push(body.to_vec());
        } else {
            w_labels.push(label);
            counts.push(cells);
        }
    }

    if counts.is_empty() {
        return Err(CliError::Validation("counts csv has no data rows".into()));
    }
    if let Some(totals) = totals_row {
        for (j, x) in x_labels.iter().enumerate() {
            let sum: u64 = counts.iter().map(|row| row[j]).sum();
            if sum != totals[j] {
                return Err(CliError::Validation(format!(
                    "column '{x}' sums to {sum}, Total row says {}",
                    totals[j]
                )));
            }
        }
        if has_total_col {
            let grand: u64 = counts.iter().flatten().sum();
            let stated = totals[x_labels.len()];
            if grand != stated {
                return Err(CliError::Validation(format!(
                    "counts sum to {grand}, grand total says {stated}"
                )));
            }
        }
    }

    Ok(CountsCsv {
        w_labels,
        x_labels,
        counts,
    })
}
