//! Machine-readable sweep output.
//!
//! CSV carries the fixed header `param,energy_per_site,w,Ev,method,status`
//! preceded by `# key = value` metadata comment lines; JSON wraps the same
//! rows in a `records` array next to a `metadata` object. Numbers are
//! serialized with 17 significant digits by default (override through the
//! `HUBBARD_ENT_SIG_DIGITS` environment variable), which makes parsing and
//! re-serializing an emitted file byte-identical.

use hubbard_ent::scans::{PointStatus, ScanRecord};

pub const CSV_HEADER: &str = "param,energy_per_site,w,Ev,method,status";

/// Environment variable overriding the output precision (3..=17).
pub const SIG_DIGITS_ENV: &str = "HUBBARD_ENT_SIG_DIGITS";

pub fn sig_digits() -> usize {
    std::env::var(SIG_DIGITS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|n| n.clamp(3, 17))
        .unwrap_or(17)
}

/// Run metadata attached to every output stream.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputMeta {
    pub tool: String,
    pub command: String,
    pub grid: String,
    pub abs_tol: f64,
    pub sig_digits: usize,
}

impl OutputMeta {
    pub fn new(command: impl Into<String>, grid: impl Into<String>, abs_tol: f64) -> Self {
        OutputMeta {
            tool: format!("hubbard-ent {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            grid: grid.into(),
            abs_tol,
            sig_digits: sig_digits(),
        }
    }
}

/// One serialized row; numeric fields stay optional so failed points keep
/// empty cells.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputRow {
    pub param: f64,
    pub energy_per_site: Option<f64>,
    pub double_occupancy: Option<f64>,
    pub entanglement: Option<f64>,
    pub method: String,
    pub status: String,
}

impl OutputRow {
    pub fn from_record(record: &ScanRecord) -> Self {
        let status = match &record.status {
            PointStatus::Ok => "ok".to_string(),
            // commas and newlines would break the fixed six-column layout
            PointStatus::Failed(reason) => format!(
                "error: {}",
                reason.replace([',', '\n'], ";").trim().to_string()
            ),
        };
        OutputRow {
            param: record.parameter,
            energy_per_site: record.energy_per_site,
            double_occupancy: record.double_occupancy,
            entanglement: record.entanglement,
            method: record.method.to_string(),
            status,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Scientific notation with a fixed number of significant digits.
pub fn format_float(value: f64, sig: usize) -> String {
    format!("{:.*e}", sig.saturating_sub(1), value)
}

fn format_opt(value: Option<f64>, sig: usize) -> String {
    value.map(|v| format_float(v, sig)).unwrap_or_default()
}

pub fn write_csv(meta: &OutputMeta, rows: &[OutputRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tool = {}\n", meta.tool));
    out.push_str(&format!("# command = {}\n", meta.command));
    out.push_str(&format!("# grid = {}\n", meta.grid));
    out.push_str(&format!(
        "# abs_tol = {}\n",
        format_float(meta.abs_tol, meta.sig_digits)
    ));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let sig = meta.sig_digits;
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(row.param, sig),
            format_opt(row.energy_per_site, sig),
            format_opt(row.double_occupancy, sig),
            format_opt(row.entanglement, sig),
            row.method,
            row.status
        ));
    }
    out
}

/// Parse a CSV stream produced by [`write_csv`] back into metadata comments
/// and rows. Comment lines are preserved verbatim.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<OutputRow>), String> {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            comments.push(line.to_string());
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                return Err(format!("line {}: expected header, got `{line}`", lineno + 1));
            }
            saw_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(6, ',').collect();
        if fields.len() != 6 {
            return Err(format!("line {}: expected 6 fields", lineno + 1));
        }
        let number = |s: &str| -> Result<Option<f64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| format!("line {}: bad number `{s}`: {e}", lineno + 1))
            }
        };
        rows.push(OutputRow {
            param: number(fields[0])?.ok_or_else(|| format!("line {}: empty param", lineno + 1))?,
            energy_per_site: number(fields[1])?,
            double_occupancy: number(fields[2])?,
            entanglement: number(fields[3])?,
            method: fields[4].to_string(),
            status: fields[5].to_string(),
        });
    }
    if !saw_header {
        return Err("missing header row".to_string());
    }
    Ok((comments, rows))
}

/// Re-serialize parsed content: comments verbatim, then header and rows at
/// the given precision.
pub fn reserialize_csv(comments: &[String], rows: &[OutputRow], sig: usize) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(row.param, sig),
            format_opt(row.energy_per_site, sig),
            format_opt(row.double_occupancy, sig),
            format_opt(row.entanglement, sig),
            row.method,
            row.status
        ));
    }
    out
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn json_opt(value: Option<f64>, sig: usize) -> String {
    value
        .map(|v| format_float(v, sig))
        .unwrap_or_else(|| "null".to_string())
}

pub fn write_json(meta: &OutputMeta, rows: &[OutputRow]) -> String {
    let sig = meta.sig_digits;
    let mut out = String::from("{\n  \"metadata\": {\n");
    out.push_str(&format!("    \"tool\": \"{}\",\n", json_escape(&meta.tool)));
    out.push_str(&format!(
        "    \"command\": \"{}\",\n",
        json_escape(&meta.command)
    ));
    out.push_str(&format!("    \"grid\": \"{}\",\n", json_escape(&meta.grid)));
    out.push_str(&format!(
        "    \"abs_tol\": {},\n",
        format_float(meta.abs_tol, sig)
    ));
    out.push_str(&format!("    \"sig_digits\": {}\n  }},\n", sig));
    out.push_str("  \"records\": [\n");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&format!(
            "    {{\"param\": {}, \"energy_per_site\": {}, \"w\": {}, \"Ev\": {}, \
             \"method\": \"{}\", \"status\": \"{}\"}}{}\n",
            format_float(row.param, sig),
            json_opt(row.energy_per_site, sig),
            json_opt(row.double_occupancy, sig),
            json_opt(row.entanglement, sig),
            json_escape(&row.method),
            json_escape(&row.status),
            if i + 1 == rows.len() { "" } else { "," }
        ));
    }
    out.push_str("  ]\n}\n");
    out
}
