//! Result tables with deterministic formatting.
//!
//! Rows are ordered lexicographically on their keys and numbers are emitted
//! at 17 significant digits (plus "p/q" where the value is exact), so two
//! identical invocations produce byte-identical files.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub mf: String,
    pub pipeline: String,
    pub t: String,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub g: u32,
    pub n: usize,
    pub channels: Vec<String>,
    pub degrees: Vec<i64>,
    pub value: [String; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultTable {
    pub fn new(metadata: Metadata) -> Self {
        ResultTable { metadata, rows: Vec::new() }
    }

    pub fn push(&mut self, mut row: Row) {
        row.channels.shrink_to_fit();
        self.rows.push(row);
    }

    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.g, a.n, &a.channels, &a.degrees).cmp(&(b.g, b.n, &b.channels, &b.degrees))
        });
    }

    pub fn to_json(&mut self) -> String {
        self.sort();
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn to_csv(&mut self) -> String {
        self.sort();
        let mut out = String::from("g,n,channels,degrees,re,im,exact\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.g,
                r.n,
                r.channels.join(";"),
                r.degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(";"),
                r.value[0],
                r.value[1],
                r.exact.clone().unwrap_or_default()
            ));
        }
        out
    }

    pub fn render(&mut self, format: &str) -> String {
        match format {
            "csv" => self.to_csv(),
            _ => self.to_json(),
        }
    }
}
