use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    /// Edge list such as `1-2,2-3`, or `single`.
    pub tree: String,
    pub n: Vec<usize>,
    pub n_external: usize,
    pub perturbative: Option<f64>,
    pub standard: Option<f64>,
    pub theorem1: Option<f64>,
    pub theorem2: Option<f64>,
    pub loop_bound: Option<f64>,
    /// `|A(T;𝐧)|` when the amplitude was computed.
    pub amplitude: Option<f64>,
    pub alpha_coupling: Option<f64>,
    pub branches: Option<usize>,
    pub frak_c: Option<f64>,
    pub volume: f64,
}

impl BoundRow {
    pub fn bound_only(&self) -> bool {
        self.amplitude.is_none()
    }

    /// Names of bounds that fall below the computed amplitude.
    pub fn violations(&self, rel_tol: f64) -> Vec<&'static str> {
        let Some(a) = self.amplitude else { return Vec::new() };
        [("theorem1", self.theorem1), ("theorem2", self.theorem2), ("loop", self.loop_bound)]
            .into_iter()
            .filter_map(|(name, b)| match b {
                Some(b) if b * (1.0 + rel_tol) < a => Some(name),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema_version: u32,
    pub rows: Vec<BoundRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema_version: u32,
    tree: &'a str,
    n: String,
    n_external: usize,
    perturbative: Option<f64>,
    standard: Option<f64>,
    theorem1: Option<f64>,
    theorem2: Option<f64>,
    loop_bound: Option<f64>,
    amplitude: Option<f64>,
    status: &'static str,
    alpha_coupling: Option<f64>,
    branches: Option<usize>,
    frak_c: Option<f64>,
    volume: f64,
}

impl BoundReport {
    pub fn new(rows: Vec<BoundRow>) -> Self {
        BoundReport { schema_version: REPORT_SCHEMA_VERSION, rows }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: BoundReport = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported report schema {}", r.schema_version)));
        }
        Ok(r)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            let n = r.n.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-");
            w.serialize(CsvRow {
                schema_version: self.schema_version,
                tree: &r.tree,
                n,
                n_external: r.n_external,
                perturbative: r.perturbative,
                standard: r.standard,
                theorem1: r.theorem1,
                theorem2: r.theorem2,
                loop_bound: r.loop_bound,
                amplitude: r.amplitude,
                status: if r.bound_only() { "bound-only" } else { "validated" },
                alpha_coupling: r.alpha_coupling,
                branches: r.branches,
                frak_c: r.frak_c,
                volume: r.volume,
            })
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn tree_id(tree: &crate::trees::Tree) -> String {
    if tree.edges().is_empty() {
        return "single".into();
    }
    tree.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(",")
}
