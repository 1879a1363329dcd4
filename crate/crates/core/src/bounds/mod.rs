//! Bound evaluators, covariance norms, the single-scale model and
//! power-counting fits.

mod fit;
mod formulas;
mod model;
mod norms;
mod report;
mod table;

pub use fit::{power_counting_fit, PowerCountingFit, ScaleSample, SlopeEstimate};
pub use formulas::{
    corollary_effective_norm, gram_prefactor, loop_bound, loop_count, loop_prefactor, perturbative_bound,
    standard_bound, theorem1_bound, theorem2_bound, EffectiveNorms,
};
pub use model::{bump, build_single_scale, smooth_step, synthetic_scale_covariant, ScaleModel, BUMP_EPS, MODEL_SPINS};
pub use norms::{covariance_norms, CovarianceNorms};
pub use report::{tree_id, BoundReport, BoundRow, REPORT_SCHEMA_VERSION};
pub use table::{bound_table, BoundTableConfig, AMPLITUDE_BUDGET, LOOP_TABLE_BUDGET};
