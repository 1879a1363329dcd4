//! Seeded verification suites comparing fast paths against oracles.
//!
//! Every suite owns one ChaCha8 generator family: instance `i` of suite `s`
//! draws from the stream `(s, i)` of the generator seeded with the run seed,
//! so an instance can be regenerated from `(seed, spec, index)` alone and the
//! rows do not depend on the number of worker threads.

mod suites;

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use suites::{case_specs, run_case, KernelPool};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Recursion,
    Pfaffian,
    FreeEnergy,
    Gram,
    Ibp,
    Submult,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Recursion, Suite::Pfaffian, Suite::FreeEnergy, Suite::Gram, Suite::Ibp, Suite::Submult];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Recursion => "recursion",
            Suite::Pfaffian => "pfaffian",
            Suite::FreeEnergy => "free-energy",
            Suite::Gram => "gram",
            Suite::Ibp => "ibp",
            Suite::Submult => "submult",
        }
    }

    fn id(self) -> u64 {
        self as u64 + 1
    }

    /// Tolerance used when the caller gives none.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Recursion => 1e-10,
            Suite::Pfaffian => 1e-9,
            Suite::FreeEnergy => 1e-8,
            Suite::Gram => 1e-12,
            Suite::Ibp => 1e-12,
            Suite::Submult => 1e-12,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Generator for instance `index` of `suite`.
pub fn instance_rng(seed: u64, suite: Suite, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.id() << 40 | index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    pub seed: u64,
    /// Overrides every suite's default tolerance.
    pub tol: Option<f64>,
    /// Largest tree size in the recursion suite.
    pub m_max: usize,
    /// Largest external leg count `n(𝐧,m)` in the recursion suite.
    pub n_max: usize,
    /// Momentum configurations per `(T, 𝐧, |Σ|)` in the recursion suite.
    pub configs: usize,
    /// Lattice length of the recursion suite.
    pub lattice: usize,
    /// Leading instances per suite, all if `None`.
    pub limit: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suites: Suite::ALL.to_vec(),
            seed: 0,
            tol: None,
            m_max: 4,
            n_max: 6,
            configs: 20,
            lattice: 8,
            limit: None,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(Error::InvalidParameter("no suite selected".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {t}")));
            }
        }
        if !(1..=6).contains(&self.m_max) {
            return Err(Error::InvalidParameter(format!("m must lie in 1..=6, got {}", self.m_max)));
        }
        if self.lattice == 0 || self.configs == 0 {
            return Err(Error::InvalidParameter("empty lattice or configuration count".into()));
        }
        Ok(())
    }

    pub fn tol_for(&self, suite: Suite) -> f64 {
        self.tol.unwrap_or(suite.default_tol())
    }
}

/// Description of one instance; together with the seed it regenerates the case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CaseSpec {
    Recursion { edges: Vec<(usize, usize)>, m: usize, root: usize, n: Vec<usize>, nspin: usize, lattice: usize, config: usize },
    Pfaffian { dim: usize },
    FreeEnergy { generators: usize, order: usize },
    Gram { arity: usize, sites: usize },
    Ibp { len: usize, nspin: usize },
    Submult { universe: usize, check: SubmultCheck },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubmultCheck {
    Shuffle,
    RankOne,
    Ccr,
}

/// Bound-domination data attached to the first configuration of each
/// recursion combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub amplitude: f64,
    pub theorem1: f64,
    /// `None` when the `Â` table was too large to tabulate.
    pub loop_bound: Option<f64>,
}

impl Domination {
    pub fn holds(&self) -> bool {
        self.amplitude <= self.theorem1 && self.loop_bound.map_or(true, |b| self.amplitude <= b * (1.0 + 1e-12))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub suite: Suite,
    pub index: usize,
    pub seed: u64,
    pub spec: CaseSpec,
    /// Relative discrepancy (or bound excess) of the case; infinite when
    /// the case could not be evaluated, written as `null`.
    #[serde(deserialize_with = "infinite_if_null")]
    pub error: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domination: Option<Domination>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn infinite_if_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub rows: Vec<CaseRow>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CaseRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    /// One JSON object per line, ordered by suite and index.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }

    /// `suite,instances,failures,max_error` per suite.
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "instances", "failures", "max_error"]).map_err(|e| Error::Format(e.to_string()))?;
        for suite in Suite::ALL {
            let rows: Vec<&CaseRow> = self.rows.iter().filter(|r| r.suite == suite).collect();
            if rows.is_empty() {
                continue;
            }
            let fails = rows.iter().filter(|r| !r.passed).count();
            let max = rows.iter().map(|r| r.error).fold(0.0f64, f64::max);
            w.write_record([suite.name().to_string(), rows.len().to_string(), fails.to_string(), format!("{max:e}")])
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Worker count from `FERMITREE_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("FERMITREE_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Run the selected suites on a pool of `threads` workers.
pub fn run(config: &VerifyConfig, threads: usize) -> Result<VerifyReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    pool.install(|| {
        let mut suites = config.suites.clone();
        suites.sort();
        suites.dedup();
        let mut rows = Vec::new();
        for suite in suites {
            let specs = case_specs(suite, config);
            let take = config.limit.unwrap_or(specs.len()).min(specs.len());
            let pool = KernelPool::for_suite(suite, config)?;
            let tol = config.tol_for(suite);
            let out: Vec<CaseRow> = specs[..take]
                .par_iter()
                .enumerate()
                .map(|(i, spec)| run_case(suite, config.seed, i, spec, tol, &pool))
                .collect();
            rows.extend(out);
        }
        Ok(VerifyReport { rows })
    })
}

/// Re-run a single row in isolation.
pub fn replay(row: &CaseRow) -> CaseRow {
    let pool = match &row.spec {
        CaseSpec::Recursion { lattice, .. } => KernelPool::recursion(row.seed, *lattice),
        _ => KernelPool::empty(),
    };
    run_case(row.suite, row.seed, row.index, &row.spec, row.tol, &pool)
}
