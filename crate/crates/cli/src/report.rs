//! Run reports: exact tables and property-check verdicts, serialized as JSON
//! (machine) or aligned-column text (human). All numbers are "p/q" strings;
//! output bytes are deterministic for identical inputs.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_digest: String,
    pub bounds: BoundsOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory: Option<String>,
    pub tables: Vec<Table>,
    pub checks: Vec<CheckVerdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsOut {
    pub d_max: Vec<u64>,
    pub k_total_max: u64,
    pub z_min: i64,
    pub r: u64,
    pub order: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckVerdict {
    pub name: String,
    pub status: CheckStatus,
    /// First-failure witness (or skip reason).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckVerdict {
    pub fn pass(name: impl Into<String>) -> CheckVerdict {
        CheckVerdict { name: name.into(), status: CheckStatus::Pass, witness: None }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> CheckVerdict {
        CheckVerdict {
            name: name.into(),
            status: CheckStatus::Fail,
            witness: Some(witness.into()),
        }
    }

    pub fn skip(name: impl Into<String>, reason: impl Into<String>) -> CheckVerdict {
        CheckVerdict { name: name.into(), status: CheckStatus::Skip, witness: Some(reason.into()) }
    }
}

impl RunReport {
    pub fn any_failure(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("rootmirror {}\n", self.command));
        out.push_str(&format!("config digest: {}\n", self.config_digest));
        out.push_str(&format!(
            "bounds: d_max={:?} k_total_max={} z_min={} r={} order={}\n",
            self.bounds.d_max,
            self.bounds.k_total_max,
            self.bounds.z_min,
            self.bounds.r,
            self.bounds.order,
        ));
        if let Some(t) = &self.theory {
            out.push_str(&format!("theory: {t}\n"));
        }
        for table in &self.tables {
            out.push('\n');
            out.push_str(&render_table(table));
        }
        if !self.checks.is_empty() {
            out.push('\n');
            for c in &self.checks {
                let status = match c.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skip => "SKIP",
                };
                match &c.witness {
                    Some(w) => out.push_str(&format!("CHECK {}: {status} ({w})\n", c.name)),
                    None => out.push_str(&format!("CHECK {}: {status}\n", c.name)),
                }
            }
        }
        out
    }
}

fn render_table(table: &Table) -> String {
    let mut widths: Vec<usize> = table.columns.iter().map(String::len).collect();
    for row in &table.rows {
        for (i, cell) in row.iter().enumerate() {
            if i < widths.len() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
    }
    let mut out = format!("{}\n", table.title);
    let fmt_row = |cells: &[String]| -> String {
        let mut line = String::from("  ");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            if i + 1 < cells.len() {
                let pad = widths[i].saturating_sub(cell.chars().count());
                line.push_str(&" ".repeat(pad));
            }
        }
        line.push('\n');
        line
    };
    out.push_str(&fmt_row(&table.columns));
    let rule: usize = widths.iter().sum::<usize>() + 2 * widths.len();
    out.push_str(&format!("  {}\n", "-".repeat(rule)));
    for row in &table.rows {
        out.push_str(&fmt_row(row));
    }
    out
}
