//! Column generation over the restricted master.
//!
//! Each iteration solves the master, prices every non-skipped nurse (in
//! parallel), and adds the negative reduced-cost schedules. A nurse whose
//! best reduced cost was non-negative is skipped until the next full sweep;
//! convergence is only declared after a sweep over every nurse finds no
//! improving column.

use crate::graph::{build_graph, BranchConstraintSet, DualValues, GraphError};
use crate::instance::Instance;
use crate::labeling::{solve_pricing, PricingConfig, PricingError, PricingResult};
use crate::lp::{solve_rmp, Basis, LpError, RmpModel, RmpSolution, ScheduleColumn};
use crate::oracle::penalty_terms;
use crate::scalar::Real;
use std::collections::BTreeSet;
use std::fmt::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Iterations without objective progress after which skipped nurses are
/// priced again.
const STALL_RESET: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CgConfig {
    pub pricing: PricingConfig,
    pub skip_heuristic: bool,
    pub workers: usize,
    pub deadline: Option<Instant>,
    pub max_iterations: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            pricing: PricingConfig::default(),
            skip_heuristic: true,
            workers: 1,
            deadline: None,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub rmp_objective: f64,
    pub columns_added: usize,
    pub nurses_skipped: usize,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub columns_added: usize,
    pub pricing_calls: usize,
    /// Total pricing time per nurse.
    pub pricing_time: Vec<Duration>,
    pub trace: Vec<TraceRow>,
}

impl CgStats {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,rmpObjective,columnsAdded,nursesSkipped,elapsedMs\n");
        for r in &self.trace {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.iteration, r.rmp_objective, r.columns_added, r.nurses_skipped, r.elapsed_ms
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CgError {
    #[error("nurse {0} has no schedule satisfying the branching constraints")]
    Infeasible(usize),
    #[error("time limit reached")]
    Timeout,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("pricing label limit of {0} reached")]
    LabelLimit(u64),
    #[error(transparent)]
    Lp(#[from] LpError),
}

fn price_one<F: Real>(
    instance: &Instance,
    nurse: usize,
    duals: &DualValues<F>,
    branching: &BranchConstraintSet,
    cfg: &CgConfig,
) -> Result<PricingResult<F>, CgError> {
    let graph = match build_graph(instance, nurse, duals, branching) {
        Ok(g) => g,
        Err(GraphError::InfeasibleDay { .. }) => return Err(CgError::Infeasible(nurse)),
    };
    let mut pcfg = cfg.pricing.clone();
    if let Some(deadline) = cfg.deadline {
        let left = deadline.saturating_duration_since(Instant::now());
        pcfg.time_limit = Some(pcfg.time_limit.map_or(left, |t| t.min(left)));
    }
    solve_pricing(instance, &graph, duals.nurse[nurse], &pcfg).map_err(|e| match e {
        PricingError::Timeout { .. } => CgError::Timeout,
        PricingError::LabelLimit { limit, .. } => CgError::LabelLimit(limit),
        PricingError::Infeasible => CgError::Infeasible(nurse),
    })
}

/// Prices `nurses` on `workers` threads; results come back in the order
/// of `nurses` whatever the completion order.
fn price_all<F: Real>(
    instance: &Instance,
    nurses: &[usize],
    duals: &DualValues<F>,
    branching: &BranchConstraintSet,
    cfg: &CgConfig,
) -> Vec<Result<PricingResult<F>, CgError>> {
    let workers = cfg.workers.max(1).min(nurses.len().max(1));
    if workers == 1 {
        return nurses
            .iter()
            .map(|&n| price_one(instance, n, duals, branching, cfg))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let mut results: Vec<(usize, Result<PricingResult<F>, CgError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= nurses.len() {
                            break;
                        }
                        local.push((i, price_one(instance, nurses[i], duals, branching, cfg)));
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("pricing worker panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

fn column_of<F: Real>(instance: &Instance, nurse: usize, schedule: crate::instance::Schedule, cfg: &CgConfig) -> ScheduleColumn {
    let cost = penalty_terms(instance, nurse, &schedule, &cfg.pricing.eval).total();
    ScheduleColumn::new(instance, nurse, schedule, cost)
}

/// Solves the master restricted by `branching` to optimality, adding
/// columns to `model`. Nurses without any column are seeded by pricing
/// with zero duals.
pub fn run_column_generation<F: Real>(
    instance: &Instance,
    model: &mut RmpModel<F>,
    branching: &BranchConstraintSet,
    cfg: &CgConfig,
) -> Result<(RmpSolution<F>, CgStats), CgError> {
    let start = Instant::now();
    let n = instance.num_nurses();
    let mut stats = CgStats {
        pricing_time: vec![Duration::ZERO; n],
        ..Default::default()
    };

    let mut has_column = vec![false; n];
    for col in model.columns() {
        has_column[col.nurse] = true;
    }
    let missing: Vec<usize> = (0..n).filter(|&i| !has_column[i]).collect();
    if !missing.is_empty() {
        let zero = DualValues::<F>::zeros(instance);
        for (&nurse, res) in missing.iter().zip(price_all(instance, &missing, &zero, branching, cfg)) {
            let res = res?;
            stats.pricing_calls += 1;
            stats.pricing_time[nurse] += res.wall_time;
            let schedule = res.best().schedule.clone();
            model.add_column(column_of::<F>(instance, nurse, schedule, cfg));
        }
    }

    let mut skip: BTreeSet<usize> = BTreeSet::new();
    let mut basis: Option<Basis> = None;
    let mut best_obj: Option<F> = None;
    let mut stall = 0;
    loop {
        if stats.iterations >= cfg.max_iterations {
            return Err(CgError::IterationLimit);
        }
        if cfg.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(CgError::Timeout);
        }
        stats.iterations += 1;
        let sol = solve_rmp(model, basis.as_ref())?;
        basis = Some(sol.basis.clone());

        let candidates: Vec<usize> = (0..n).filter(|i| !skip.contains(i)).collect();
        let full_sweep = candidates.len() == n;
        let results = price_all(instance, &candidates, &sol.duals, branching, cfg);
        let mut added = 0;
        for (&nurse, res) in candidates.iter().zip(results) {
            let res = res?;
            stats.pricing_calls += 1;
            stats.pricing_time[nurse] += res.wall_time;
            let mut improving = false;
            for col in &res.columns {
                if col.reduced_cost < -F::opt_tol() {
                    improving = true;
                    let column = column_of::<F>(instance, nurse, col.schedule.clone(), cfg);
                    if model.add_column(column).is_some() {
                        added += 1;
                    }
                }
            }
            if !improving && cfg.skip_heuristic {
                skip.insert(nurse);
            }
        }
        stats.columns_added += added;
        let row = TraceRow {
            iteration: stats.iterations,
            rmp_objective: sol.objective.to_f64_lossy(),
            columns_added: added,
            nurses_skipped: n - candidates.len(),
            elapsed_ms: start.elapsed().as_millis(),
        };
        log::debug!(
            "cg iter {} obj {} added {} skipped {}",
            row.iteration,
            row.rmp_objective,
            row.columns_added,
            row.nurses_skipped
        );
        stats.trace.push(row);

        if added == 0 {
            if full_sweep {
                return Ok((sol, stats));
            }
            skip.clear();
            continue;
        }
        match best_obj {
            Some(b) if sol.objective >= b - F::opt_tol() => {
                stall += 1;
                if stall >= STALL_RESET {
                    skip.clear();
                    stall = 0;
                }
            }
            _ => {
                best_obj = Some(sol.objective);
                stall = 0;
            }
        }
    }
}
