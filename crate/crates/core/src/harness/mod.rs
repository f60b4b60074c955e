//! Scenario runner: solves configured problems, evaluates the certified
//! bounds on them and reports the margins.

mod report;
mod run;
mod scenario;
mod studies;

pub use report::{CheckKind, CheckRecord, MarginReport, Relation, SuiteReport, CACCIOPPOLI_SLACK, CERTIFIED_SLACK};
pub use run::{load_suite, run_scenario, run_suite, verify_dir};
pub use scenario::{
    BallSpec, BoundarySpec, ChecksSpec, CoefficientKind, CoefficientSpec, ConvergenceSpec, DataFns, DataSpec, KernelSpec,
    LevelDecaySpec, MeshKind, MeshSpec, Scenario, SolaSpec,
};
pub use studies::{
    convergence_study, level_decay_study, richardson, sola_study, solve_data, transfer, uniform_levels, DecayTable, Manufactured,
    NormCalculator, RateRow, RateTable, SolaReport, SolaRow, NORM_INFLATION,
};
