//! Text and CSV rendering: one row per criterion plus the average, one
//! column per document or corpus, cells as `score (CT+WT)`.

use std::fmt::Write;

use super::{Criterion, CriterionResult, ScoreReport};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusColumn {
    pub name: String,
    pub report: ScoreReport,
}

fn cell(r: &CriterionResult) -> String {
    match r.score {
        Some(s) => format!("{s:.1} ({})", r.total()),
        None => "- (0)".to_string(),
    }
}

fn average_cell(report: &ScoreReport) -> String {
    report.average.map_or_else(|| "-".to_string(), |a| format!("{a:.1}"))
}

fn grid(columns: &[CorpusColumn]) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(Criterion::ALL.len() + 2);
    let mut header = vec!["Criteria".to_string()];
    header.extend(columns.iter().map(|c| c.name.clone()));
    rows.push(header);
    for c in Criterion::ALL {
        let mut row = vec![c.label().to_string()];
        row.extend(columns.iter().map(|col| cell(col.report.get(c))));
        rows.push(row);
    }
    let mut avg = vec!["Average Score".to_string()];
    avg.extend(columns.iter().map(|c| average_cell(&c.report)));
    rows.push(avg);
    rows
}

/// Aligned plain-text table.
pub fn render_table(columns: &[CorpusColumn]) -> String {
    let rows = grid(columns);
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (n, row) in rows.iter().enumerate() {
        let mut line = String::new();
        for (i, text) in row.iter().enumerate() {
            if i == 0 {
                let _ = write!(line, "{text:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {text:>w$}", w = widths[i]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
        if n == 0 || n == rows.len() - 2 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV with the same layout as [`render_table`].
pub fn render_csv(columns: &[CorpusColumn]) -> String {
    grid(columns)
        .iter()
        .map(|row| row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}
