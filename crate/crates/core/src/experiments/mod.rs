//! Monte Carlo studies: risk tables over noise laws and sample sizes, the
//! oracle inequality, normalized efficiency, and the Bayes lower bound.
//! Every replicate draws from its own substream, so results do not depend
//! on the worker count.

mod config;
mod presets;
mod report;
mod risk;
mod studies;

pub use config::{EstimatorSpec, ExperimentConfig, Preset, TestFunctionSpec};
pub use presets::{bump, preset_ball, preset_function, resolve_test_function, sobolev_energy, TestFunction};
pub use report::{csv_string, write_csv, write_json};
pub use risk::{mc_risk, EstimatorRisk, Instance, ReplicateLoss, RiskContext, RiskEstimate, RiskRow};
pub use studies::{
    efficiency_study, estimate_dataset, log_log_slope, lower_bound_study, oracle_coefficient, oracle_study,
    risk_study, EfficiencyReport, EfficiencyTrend, LowerBoundReport, LowerBoundRow, OracleReport, OracleRow,
    OracleTrend, RiskStudy, MENU_MAX,
};
