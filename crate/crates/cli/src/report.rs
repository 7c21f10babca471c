//! Plain reports rendered as key/value lines, aligned tables or CSV.

use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Kv,
    Table,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kv" => Ok(Format::Kv),
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (kv, table, csv)")),
        }
    }
}

enum Section {
    Fields(Vec<(String, String)>),
    Table { name: String, headers: Vec<String>, rows: Vec<Vec<String>> },
}

#[derive(Default)]
pub struct Report {
    sections: Vec<Section>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        if let Some(Section::Fields(fields)) = self.sections.last_mut() {
            fields.push((key.into(), value.to_string()));
        } else {
            self.sections.push(Section::Fields(vec![(key.into(), value.to_string())]));
        }
        self
    }

    pub fn table(&mut self, name: &str, headers: &[&str], rows: Vec<Vec<String>>) -> &mut Self {
        self.sections.push(Section::Table {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows,
        });
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Kv => self.render_kv(),
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_kv(&self) -> String {
        let mut out = String::new();
        for section in &self.sections {
            match section {
                Section::Fields(fields) => {
                    for (k, v) in fields {
                        let _ = writeln!(out, "{k}: {v}");
                    }
                }
                Section::Table { name, headers, rows } => {
                    let _ = writeln!(out, "{name}:");
                    for row in rows {
                        let cells: Vec<String> =
                            headers.iter().zip(row).map(|(h, c)| format!("{h}={c}")).collect();
                        let _ = writeln!(out, "  {}", cells.join(" "));
                    }
                }
            }
        }
        out
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            match section {
                Section::Fields(fields) => {
                    let rows = fields.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
                    aligned(&mut out, None, &rows);
                }
                Section::Table { name, headers, rows } => {
                    let _ = writeln!(out, "{name}");
                    aligned(&mut out, Some(headers), rows);
                }
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = Vec::new();
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push(b'\n');
            }
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(&mut out);
            match section {
                Section::Fields(fields) => {
                    let _ = w.write_record(["key", "value"]);
                    for (k, v) in fields {
                        let _ = w.write_record([k, v]);
                    }
                }
                Section::Table { headers, rows, .. } => {
                    let _ = w.write_record(headers);
                    for row in rows {
                        let _ = w.write_record(row);
                    }
                }
            }
            let _ = w.flush();
        }
        String::from_utf8(out).expect("csv output is UTF-8")
    }
}

fn aligned(out: &mut String, headers: Option<&Vec<String>>, rows: &Vec<Vec<String>>) {
    let columns = headers.map_or_else(|| rows.first().map_or(0, Vec::len), Vec::len);
    let mut widths = vec![0; columns];
    for row in headers.into_iter().chain(rows) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |row: &Vec<String>| {
        let cells: Vec<String> =
            row.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        cells.join("  ").trim_end().to_string()
    };
    if let Some(h) = headers {
        let _ = writeln!(out, "{}", line(h));
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
    }
    for row in rows {
        let _ = writeln!(out, "{}", line(row));
    }
}
