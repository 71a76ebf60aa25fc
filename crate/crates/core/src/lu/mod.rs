//! Blocked LU factorization, the processor maps, and cycle-level schedules
//! for the bus machine, the link machine and a mesh baseline.

pub mod dense;
pub mod machine;
pub mod reference;
pub mod route;
pub mod routed;
pub mod schedule;
pub mod scheme2;
pub mod simulate;

use serde::Serialize;

pub use machine::PgMachine;
pub use reference::{block_cholesky_reference, block_lu_reference, factor_residual, BlockFactors, BlockLUProblem};
pub use routed::{mesh_schedule, scheme1_schedule};
pub use schedule::{normalized_time, BlockKey, Category, Cycle, Event, Medium, Op, Phase, Schedule, Scheme, Topology};
pub use scheme2::scheme2_schedule;
pub use simulate::{simulate, CycleLog, SimOutcome};

use crate::error::{invalid, Result};

/// Builds the schedule of `scheme` for `nb` block rows.
pub fn build_schedule(scheme: Scheme, nb: usize) -> Result<Schedule> {
    match scheme {
        Scheme::Pg1 => scheme1_schedule(&PgMachine::new()?, nb),
        Scheme::Pg2 => scheme2_schedule(&PgMachine::new()?, nb),
        Scheme::Mesh { q } => mesh_schedule(nb, q as usize),
    }
}

/// Totals, per-processor averages and normalized times of one category.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryReport {
    pub category: Category,
    pub cycles: usize,
    pub normalized_time: f64,
    pub average_cycles: f64,
    pub max_processor_cycles: usize,
    pub utilization: f64,
}

/// Outcome of simulating one scheme on one problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LuRun {
    pub scheme: Scheme,
    pub order: usize,
    pub block_size: usize,
    pub block_rows: usize,
    pub processors: usize,
    pub categories: Vec<CategoryReport>,
    pub overall_utilization: f64,
    /// Relative Frobenius distance of the simulated factors from the
    /// sequential reference.
    pub factor_error: f64,
    /// `‖A − LU‖_F / ‖A‖_F` of the simulated factors.
    pub residual: f64,
}

impl LuRun {
    pub fn category(&self, c: Category) -> &CategoryReport {
        &self.categories[c.index()]
    }
}

pub fn summarize(scheme: Scheme, problem: &BlockLUProblem, log: &CycleLog, factor_error: f64, residual: f64) -> LuRun {
    let b = problem.block_size();
    LuRun {
        scheme,
        order: problem.order(),
        block_size: b,
        block_rows: problem.blocks(),
        processors: log.processors,
        categories: Category::ALL
            .iter()
            .map(|&c| CategoryReport {
                category: c,
                cycles: log.total(c),
                normalized_time: normalized_time(log.total(c), b, c.order()),
                average_cycles: log.average(c),
                max_processor_cycles: log.max_active(c),
                utilization: log.utilization(c),
            })
            .collect(),
        overall_utilization: log.overall_utilization(),
        factor_error,
        residual,
    }
}

/// Builds, simulates and checks `scheme` on `problem`.
pub fn run_scheme(scheme: Scheme, problem: &BlockLUProblem) -> Result<LuRun> {
    if let Scheme::Mesh { q: 0 } = scheme {
        return invalid("mesh grid must have at least one processor");
    }
    let schedule = build_schedule(scheme, problem.blocks())?;
    let out = simulate(&schedule, problem)?;
    let reference = block_lu_reference(problem)?;
    let err = out.factors.relative_difference(&reference);
    let res = factor_residual(problem, &out.factors);
    Ok(summarize(scheme, problem, &out.log, err, res))
}
