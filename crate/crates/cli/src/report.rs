//! Fixed-layout text tables with full-precision CSV twins.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub title: String,
    columns: Vec<String>,
    text: Vec<Vec<String>>,
    csv: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    /// Adds a row with display cells and their machine-readable values.
    pub fn row(&mut self, text: Vec<String>, csv: Vec<String>) {
        debug_assert_eq!(text.len(), self.columns.len());
        debug_assert_eq!(csv.len(), self.columns.len());
        self.text.push(text);
        self.csv.push(csv);
    }

    /// A row whose display and CSV cells coincide.
    pub fn plain_row(&mut self, cells: Vec<String>) {
        self.row(cells.clone(), cells);
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &self.text {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let header = line(&self.columns);
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{}", "-".repeat(header.chars().count()));
        for row in &self.text {
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let escape = |c: &String| {
            if c.contains([',', '"', '\n']) {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.columns.iter().map(escape).collect::<Vec<_>>().join(","));
        for row in &self.csv {
            let _ = writeln!(out, "{}", row.iter().map(escape).collect::<Vec<_>>().join(","));
        }
        out
    }

    /// Writes `<stem>.txt` and `<stem>.csv` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), CliError> {
        write(&dir.join(format!("{stem}.txt")), &self.to_text())?;
        write(&dir.join(format!("{stem}.csv")), &self.to_csv())
    }
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Shortest round-trip representation.
pub fn full(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_text_and_csv() {
        let mut t = Table::new("Demo", &["State", "MAE"]);
        t.row(vec!["NSW".into(), "1724".into()], vec!["NSW".into(), "1724.25".into()]);
        t.plain_row(vec!["SA, east".into(), "5".into()]);
        assert_eq!(t.to_text(), "Demo\nState      MAE\n--------------\nNSW       1724\nSA, east     5\n");
        assert_eq!(t.to_csv(), "State,MAE\nNSW,1724.25\n\"SA, east\",5\n");
    }
}
