//! Report files: CSV rows preceded by one JSON metadata header line.
//! The error column is recomputed on load; a file whose stored errors
//! disagree with its own value/limit columns refuses to load.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub schema: String,
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub wall_ms: u128,
    /// Operator window actually used (hull over the sweep).
    pub window: Option<(f64, f64)>,
    /// Window-doubling insensitivity of the limit column.
    pub window_check: Option<f64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// One sweep row: a value, the limit it is compared against, and
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Sweep key: particle count, lattice size, or gap radius.
    pub key: f64,
    pub value: f64,
    pub limit: f64,
    pub abs_error: f64,
    /// `det(I - sigma K)` diagnostic (1 when no deformation).
    pub det_sigma: f64,
    /// Disagreement between the two generating-functional routes.
    pub route_gap: f64,
    /// Scenario-specific extra (kernel sup error, tail bound, z-score...).
    pub extra: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub meta: ReportMeta,
    /// Column names, `key` first.
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl Report {
    pub fn new(meta: ReportMeta, key_name: &str, extra_name: &str) -> Self {
        Self {
            meta,
            columns: vec![
                key_name.to_string(),
                "value".into(),
                "limit".into(),
                "abs_error".into(),
                "det_sigma".into(),
                "route_gap".into(),
                extra_name.to_string(),
            ],
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: SweepRow) {
        self.rows.push(row);
    }

    pub fn to_string_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&serde_json::to_string(&self.meta).expect("meta serializes"));
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.key, r.value, r.limit, r.abs_error, r.det_sigma, r.route_gap, r.extra
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string_csv())
            .with_context(|| format!("cannot write report {}", path.display()))
    }

    /// Parse and self-validate: the error column must equal
    /// `|value - limit|` recomputed from the stored columns.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read report {}", path.display()))?;
        Self::from_str_csv(&text)
    }

    pub fn from_str_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().context("empty report")?;
        let json = header
            .strip_prefix("# ")
            .context("report must start with a JSON metadata line")?;
        let meta: ReportMeta = serde_json::from_str(json).context("bad metadata line")?;
        if meta.schema != SCHEMA {
            bail!("unknown report schema {:?}", meta.schema);
        }
        let columns: Vec<String> = lines
            .next()
            .context("missing column header")?
            .split(',')
            .map(str::to_string)
            .collect();
        if columns.len() != 7 {
            bail!("expected 7 columns, got {}", columns.len());
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("bad numeric field in row {}", i + 1))?;
            if fields.len() != 7 {
                bail!("row {} has {} fields, expected 7", i + 1, fields.len());
            }
            let row = SweepRow {
                key: fields[0],
                value: fields[1],
                limit: fields[2],
                abs_error: fields[3],
                det_sigma: fields[4],
                route_gap: fields[5],
                extra: fields[6],
            };
            let recomputed = (row.value - row.limit).abs();
            if (recomputed - row.abs_error).abs() > 1e-15 * (1.0 + recomputed) {
                bail!(
                    "row {}: stored error {} disagrees with |value - limit| = {}; refusing to load",
                    i + 1,
                    row.abs_error,
                    recomputed
                );
            }
            rows.push(row);
        }
        Ok(Self {
            meta,
            columns,
            rows,
        })
    }
}

pub const SCHEMA: &str = "detform-report-v1";

pub fn meta_now(scenario: &str, config_hash: String, seed: u64) -> ReportMeta {
    ReportMeta {
        schema: SCHEMA.to_string(),
        scenario: scenario.to_string(),
        config_hash,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_ms: 0,
        window: None,
        window_check: None,
        notes: Vec::new(),
    }
}
