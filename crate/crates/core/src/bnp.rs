//! Branch-and-price tree search.
//!
//! Nodes are explored best-first on their parent's LP bound (deeper nodes
//! first at equal bounds). Branching fixes one fractional nurse-day-unit-
//! shift assignment to 1 in one child and to 0 in the other. Since every
//! penalty is an integer, a node is pruned once its bound cannot beat the
//! incumbent by at least 1.

use crate::colgen::{run_column_generation, CgConfig, CgError, CgStats};
use crate::graph::{AssignmentKey, BranchConstraintSet};
use crate::instance::{
    validate_roster, Assignment, Instance, Penalty, Roster, Schedule,
};
use crate::lp::{RmpModel, RmpSolution, ScheduleColumn};
use crate::oracle::{penalty_terms, EvalOptions};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::time::{Duration, Instant};
use thiserror::Error;

const FRACTIONAL: f64 = 1e-6;
const PRUNE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Nurses may work in every unit they are skilled for.
    #[default]
    Full,
    /// Nurses only work in their preferred units.
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnpConfig {
    pub cg: CgConfig,
    pub time_limit: Option<Duration>,
    pub mode: Mode,
}

impl Default for BnpConfig {
    fn default() -> Self {
        BnpConfig {
            cg: CgConfig::default(),
            time_limit: None,
            mode: Mode::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub best_roster: Roster,
    pub upper_bound: Penalty,
    /// Global lower bound; equals `upper_bound` when proved.
    pub lower_bound: f64,
    /// Master LP optimum at the root node.
    pub root_lower_bound: f64,
    pub nodes_explored: usize,
    pub proved: bool,
    pub columns: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Error)]
pub enum BnpError {
    #[error(transparent)]
    ColumnGeneration(#[from] CgError),
}

/// Greedy roster: day by day, each nurse in turn takes the most
/// understaffed (unit, shift) among its skilled units, unless the
/// rotation is forbidden or its current work stint already reached `dMax`.
pub fn initial_roster(instance: &Instance) -> Vec<Schedule> {
    let mut schedules = vec![Schedule::all_off(instance.num_days); instance.num_nurses()];
    let mut stint = vec![0u32; instance.num_nurses()];
    for day in 0..instance.num_days {
        let mut missing: Vec<i64> = (0..instance.num_units())
            .flat_map(|u| (0..instance.num_shifts()).map(move |s| (u, s)))
            .map(|(u, s)| instance.cover_at(day, u, s).required as i64)
            .collect();
        for (n, contract) in instance.nurses.iter().enumerate() {
            let prev = if day > 0 { schedules[n].days[day - 1].shift() } else { None };
            let mut pick: Option<(i64, usize, usize)> = None;
            if stint[n] < contract.consec_work.d_max {
                for u in contract.required_units.iter().copied() {
                    for s in 0..instance.num_shifts() {
                        if prev.is_some_and(|p| instance.is_forbidden(p, s)) {
                            continue;
                        }
                        let m = missing[u * instance.num_shifts() + s];
                        if m > 0 && pick.map_or(true, |(best, _, _)| m > best) {
                            pick = Some((m, u, s));
                        }
                    }
                }
            }
            match pick {
                Some((_, unit, shift)) => {
                    schedules[n].days[day] = Assignment::Work { unit, shift };
                    missing[unit * instance.num_shifts() + shift] -= 1;
                    stint[n] += 1;
                }
                None => stint[n] = 0,
            }
        }
    }
    schedules
}

/// `θ_ndus = Σ_l x_nl a_nldus` for every assignment with positive value.
pub fn assignment_values(model: &RmpModel<f64>, sol: &RmpSolution<f64>) -> BTreeMap<AssignmentKey, f64> {
    let mut theta = BTreeMap::new();
    for (j, col) in model.columns().iter().enumerate() {
        let x = sol.x[j];
        if x <= 1e-12 {
            continue;
        }
        for (day, a) in col.schedule.days.iter().enumerate() {
            if let Assignment::Work { unit, shift } = *a {
                *theta
                    .entry(AssignmentKey {
                        nurse: col.nurse,
                        day,
                        unit,
                        shift,
                    })
                    .or_insert(0.0) += x;
            }
        }
    }
    theta
}

/// The fractional assignment with the largest value, ties to the
/// lexicographically smallest; `None` when every value is integral.
pub fn select_branch(theta: &BTreeMap<AssignmentKey, f64>) -> Option<AssignmentKey> {
    let mut best: Option<(AssignmentKey, f64)> = None;
    for (&key, &v) in theta {
        if v <= FRACTIONAL || v >= 1.0 - FRACTIONAL {
            continue;
        }
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((key, v));
        }
    }
    best.map(|(k, _)| k)
}

struct Node {
    branching: BranchConstraintSet,
    bound: f64,
    depth: usize,
    forced_child: bool,
    seq: usize,
    columns: Vec<usize>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    /// Max-heap order: lowest bound, then deepest, then forced child, then
    /// most recent.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.forced_child.cmp(&other.forced_child))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Append-only store of every column generated in the tree.
struct ColumnStore {
    columns: Vec<ScheduleColumn>,
    index: HashMap<(usize, Schedule), usize>,
}

impl ColumnStore {
    fn insert(&mut self, col: &ScheduleColumn) -> usize {
        let key = (col.nurse, col.schedule.clone());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.columns.len();
        self.columns.push(col.clone());
        self.index.insert(key, i);
        i
    }
}

fn roster_of(instance: &Instance, model: &RmpModel<f64>, sol: &RmpSolution<f64>) -> Roster {
    let mut schedules = vec![Schedule::all_off(instance.num_days); instance.num_nurses()];
    let mut weight = vec![0.0; instance.num_nurses()];
    for (j, col) in model.columns().iter().enumerate() {
        if sol.x[j] > weight[col.nurse] {
            weight[col.nurse] = sol.x[j];
            schedules[col.nurse] = col.schedule.clone();
        }
    }
    Roster::from_schedules(schedules)
}

pub fn solve(instance: &Instance, cfg: &BnpConfig) -> Result<SolveOutcome, BnpError> {
    match cfg.mode {
        Mode::Full => branch_and_price(instance, cfg),
        Mode::Single => branch_and_price(&instance.restricted_to_preferred(), cfg),
    }
}

pub fn branch_and_price(instance: &Instance, cfg: &BnpConfig) -> Result<SolveOutcome, BnpError> {
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let mut cg = cfg.cg.clone();
    cg.deadline = match (cg.deadline, deadline) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let eval: EvalOptions = cg.pricing.eval;

    let mut store = ColumnStore {
        columns: Vec::new(),
        index: HashMap::new(),
    };
    let greedy = initial_roster(instance);
    let mut root_columns = Vec::new();
    for (n, s) in greedy.iter().enumerate() {
        let cost = penalty_terms(instance, n, s, &eval).total();
        root_columns.push(store.insert(&ScheduleColumn::new(instance, n, s.clone(), cost)));
    }
    let greedy_roster = Roster::from_schedules(greedy);
    let report = validate_roster(instance, &greedy_roster, &eval).expect("complete roster");
    debug_assert!(report.is_feasible());
    let mut best_roster = greedy_roster;
    let mut upper = report.objective;
    let step = instance.objective_step() as f64;
    let prunable = |bound: f64, upper: Penalty| bound > upper as f64 - step + PRUNE_EPS;

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        branching: BranchConstraintSet::default(),
        bound: f64::NEG_INFINITY,
        depth: 0,
        forced_child: false,
        seq: 0,
        columns: root_columns,
    });
    let mut seq = 1;
    let mut nodes = 0;
    let mut root_lb: Option<f64> = None;
    let mut timed_out = false;
    let mut open_bound = f64::INFINITY;

    while let Some(node) = heap.pop() {
        if prunable(node.bound, upper) {
            continue;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            open_bound = node.bound;
            break;
        }
        nodes += 1;
        let mut model = RmpModel::<f64>::new(instance);
        for &j in &node.columns {
            model.add_column(store.columns[j].clone());
        }
        let (sol, _stats): (RmpSolution<f64>, CgStats) =
            match run_column_generation(instance, &mut model, &node.branching, &cg) {
                Ok(r) => r,
                Err(CgError::Infeasible(_)) => continue,
                Err(CgError::Timeout) => {
                    timed_out = true;
                    open_bound = node.bound;
                    break;
                }
                Err(e) => return Err(e.into()),
            };
        let ids: Vec<usize> = model.columns().iter().map(|c| store.insert(c)).collect();
        let bound = sol.objective.max(node.bound);
        if root_lb.is_none() {
            root_lb = Some(sol.objective);
        }
        log::info!(
            "node {nodes} depth {} lp {:.4} ub {upper} open {}",
            node.depth,
            sol.objective,
            heap.len()
        );
        let roster = roster_of(instance, &model, &sol);
        let report = validate_roster(instance, &roster, &eval).expect("complete roster");
        if report.is_feasible() && report.objective < upper {
            upper = report.objective;
            best_roster = roster;
        }
        if prunable(bound, upper) {
            continue;
        }
        let theta = assignment_values(&model, &sol);
        let Some(key) = select_branch(&theta) else {
            continue;
        };
        for forced in [false, true] {
            let branching = if forced {
                node.branching.with_forced(key)
            } else {
                node.branching.with_forbidden(key)
            };
            let columns = ids
                .iter()
                .copied()
                .filter(|&j| {
                    let c = &store.columns[j];
                    branching.is_consistent(c.nurse, &c.schedule)
                })
                .collect();
            heap.push(Node {
                branching,
                bound,
                depth: node.depth + 1,
                forced_child: forced,
                seq,
                columns,
            });
            seq += 1;
        }
    }

    let proved = !timed_out;
    let lower_bound = if proved {
        upper as f64
    } else {
        let open = heap.iter().map(|n| n.bound).fold(open_bound, f64::min);
        open.max(root_lb.unwrap_or(f64::NEG_INFINITY)).min(upper as f64)
    };
    Ok(SolveOutcome {
        best_roster,
        upper_bound: upper,
        lower_bound,
        root_lower_bound: root_lb.unwrap_or(f64::NEG_INFINITY),
        nodes_explored: nodes,
        proved,
        columns: store.columns.len(),
        elapsed: start.elapsed(),
    })
}
