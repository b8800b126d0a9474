//! Report model and renderers.
//!
//! Every command produces one or more [`Report`] values carrying full-
//! precision numbers next to their display strings; the renderers decide
//! nothing. Text and JSON show the display rounding, CSV always emits full
//! precision (shortest round-trip form), and provenance rides on every
//! report so identical invocations are byte-identical.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    Table,
    MetricSet,
    Comparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    /// Short SHA-256 of the input the report was computed from.
    pub scenario: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(scenario_hash: String, seed: Option<u64>) -> Self {
        Provenance {
            scenario: scenario_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }

    fn line(&self) -> String {
        match self.seed {
            Some(seed) => format!(
                "provenance: scenario {} version {} seed {}",
                self.scenario, self.version, seed
            ),
            None => format!("provenance: scenario {} version {}", self.scenario, self.version),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl Column {
    pub fn new(label: &str) -> Self {
        Column {
            label: label.to_string(),
            unit: None,
        }
    }

    fn header(&self) -> String {
        match &self.unit {
            Some(unit) => format!("{} [{}]", self.label, unit),
            None => self.label.clone(),
        }
    }
}

/// One table cell: the exact value plus how to show it.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub value: CellValue,
    pub display: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CellValue {
    Number(f64),
    Text(String),
}

impl Cell {
    /// Number shown with a fixed number of decimals.
    pub fn rounded(value: f64, decimals: usize) -> Self {
        Cell {
            display: format!("{value:.decimals$}"),
            value: CellValue::Number(value),
        }
    }

    pub fn text(value: impl Into<String>) -> Self {
        let value = value.into();
        Cell {
            display: value.clone(),
            value: CellValue::Text(value),
        }
    }

    /// Full-precision form for CSV output.
    pub fn csv_field(&self) -> String {
        match &self.value {
            CellValue::Number(n) => format!("{n}"),
            CellValue::Text(t) => t.replace(',', ";"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub kind: ReportKind,
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(kind: ReportKind, title: impl Into<String>, provenance: Provenance) -> Self {
        Report {
            kind,
            title: title.into(),
            columns: Vec::new(),
            rows: Vec::new(),
            notes: Vec::new(),
            provenance,
        }
    }

    pub fn push_metric(&mut self, name: &str, cell: Cell, unit: &str) {
        self.rows.push(vec![
            Cell::text(name),
            cell,
            Cell::text(unit),
        ]);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.title));
        if self.rows.is_empty() && self.columns.is_empty() {
            // Flag-only report (e.g. an empty sub-queue table).
        } else {
            let headers: Vec<String> = self.columns.iter().map(Column::header).collect();
            let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
            for row in &self.rows {
                for (i, cell) in row.iter().enumerate() {
                    if i < widths.len() {
                        widths[i] = widths[i].max(cell.display.len());
                    }
                }
            }
            let header_line: Vec<String> = headers
                .iter()
                .zip(&widths)
                .map(|(h, w)| format!("{h:>w$}"))
                .collect();
            out.push_str(&header_line.join("  "));
            out.push('\n');
            for row in &self.rows {
                let line: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{:>w$}", c.display))
                    .collect();
                out.push_str(&line.join("  "));
                out.push('\n');
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push_str(&self.provenance.line());
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.columns.iter().map(|c| c.label.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Renders a batch of reports in the chosen output format, ready to print.
pub fn render(reports: &[Report], format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => {
            let blocks: Vec<String> = reports.iter().map(Report::to_text).collect();
            blocks.join("\n")
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let blocks: Vec<String> = reports.iter().map(Report::to_csv).collect();
            blocks.join("\n")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}
