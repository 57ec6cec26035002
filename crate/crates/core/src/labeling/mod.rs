//! Labeling algorithm for the pricing subproblem.
//!
//! A [`Label`] records a partial source-to-node path: accumulated cost, the
//! counters for working days (total and per unit) and working weekends, and
//! the states of the consecutive-work and consecutive-rest automata. Counter
//! penalties are charged on the arc into the sink, when the counters are
//! final.

mod bounds;
mod dominance;
mod solve;

pub use bounds::{dfa_diff_bounds, penalty_diff_bounds, weekend_diff_bounds, DfaBoundTable};
pub use dominance::{PdSums, Verdict};
pub use solve::{solve_pricing, PricedColumn, PricingError, PricingResult};

use crate::dfa::{CostDfa, DfaState};
use crate::graph::{NodeId, NodeKind, SOURCE};
use crate::instance::{Instance, NurseContract, Penalty, DAYS_PER_WEEK};
use crate::oracle::EvalOptions;
use crate::scalar::Scalar;
use smallvec::SmallVec;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

/// Dominance rule used to prune labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Equal resource consumption required.
    Dpb,
    /// One-directional upper-bound test with non-negative penalty bounds.
    Dpu,
    /// Two-sided penalty-difference bounds.
    Dpp,
    /// [`Variant::Dpp`] plus comparison across same-day, same-shift nodes.
    Dppi,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Dpb, Variant::Dpu, Variant::Dpp, Variant::Dppi];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Dpb => "DPB",
            Variant::Dpu => "DPU",
            Variant::Dpp => "DPP",
            Variant::Dppi => "DPPI",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DPB" => Ok(Variant::Dpb),
            "DPU" => Ok(Variant::Dpu),
            "DPP" => Ok(Variant::Dpp),
            "DPPI" => Ok(Variant::Dppi),
            _ => Err(format!("unknown variant `{s}` (expected DPB, DPU, DPP or DPPI)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingConfig {
    pub variant: Variant,
    /// Compare labels in different automaton states using exact bounds;
    /// when off, such labels are incomparable.
    pub exact_dfa_bounds: bool,
    pub eval: EvalOptions,
    pub time_limit: Option<Duration>,
    /// Number of best sink labels returned as columns.
    pub columns: usize,
    /// Abort once this many labels have been created.
    pub label_limit: Option<u64>,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig {
            variant: Variant::Dppi,
            exact_dfa_bounds: true,
            eval: EvalOptions::default(),
            time_limit: None,
            columns: 1,
            label_limit: None,
        }
    }
}

impl PricingConfig {
    pub fn with_variant(variant: Variant) -> Self {
        PricingConfig {
            variant,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Label<T> {
    pub cost: T,
    pub work_days: u16,
    pub unit_days: SmallVec<[u16; 4]>,
    pub weekends: u16,
    pub work_state: DfaState,
    pub rest_state: DfaState,
    /// Set once the current weekend has been counted.
    pub worked_this_weekend: bool,
    pub node: NodeId,
    /// Creation order; also the label's slot in the path trail.
    pub id: u32,
}

/// Per-nurse data shared by every label of one pricing run.
#[derive(Debug, Clone)]
pub struct PricingContext<'a> {
    pub contract: &'a NurseContract,
    pub num_days: usize,
    pub num_weekends: usize,
    pub work_dfa: CostDfa,
    pub rest_dfa: CostDfa,
    skilled_units: Vec<usize>,
    work_bounds: DfaBoundTable,
    rest_bounds: DfaBoundTable,
    close: bool,
    exact_dfa_bounds: bool,
}

impl<'a> PricingContext<'a> {
    pub fn new(instance: &'a Instance, nurse: usize, cfg: &PricingConfig) -> Self {
        let contract = &instance.nurses[nurse];
        let close = cfg.eval.penalize_trailing_stints;
        let work_dfa = CostDfa::consecutive(&contract.consec_work);
        let rest_dfa = CostDfa::consecutive(&contract.consec_rest);
        PricingContext {
            contract,
            num_days: instance.num_days,
            num_weekends: instance.num_weekends(),
            work_bounds: DfaBoundTable::new(&work_dfa, instance.num_days, close),
            rest_bounds: DfaBoundTable::new(&rest_dfa, instance.num_days, close),
            work_dfa,
            rest_dfa,
            skilled_units: contract.required_units.iter().copied().collect(),
            close,
            exact_dfa_bounds: cfg.exact_dfa_bounds,
        }
    }

    pub fn initial_label<T: Scalar>(&self) -> Label<T> {
        Label {
            cost: T::zero(),
            work_days: 0,
            unit_days: SmallVec::from_elem(0, self.contract.unit_days.len()),
            weekends: 0,
            work_state: self.work_dfa.initial(),
            rest_state: self.rest_dfa.initial(),
            worked_this_weekend: false,
            node: SOURCE,
            id: 0,
        }
    }

    /// Label reached by following an arc of cost `arc_cost` into a day node.
    pub fn extend<T: Scalar>(&self, label: &Label<T>, to: NodeId, kind: NodeKind, arc_cost: T, id: u32) -> Label<T> {
        let day = kind.day().expect("extension into a day node");
        let worked = kind.is_work();
        let (work_state, wc) = self.work_dfa.step(label.work_state, worked);
        let (rest_state, rc) = self.rest_dfa.step(label.rest_state, !worked);
        let mut out = Label {
            cost: label.cost + arc_cost + T::from_penalty(wc + rc),
            work_days: label.work_days + worked as u16,
            unit_days: label.unit_days.clone(),
            weekends: label.weekends,
            work_state,
            rest_state,
            worked_this_weekend: label.worked_this_weekend,
            node: to,
            id,
        };
        if let Some(u) = kind.unit() {
            out.unit_days[u] += 1;
        }
        match day % DAYS_PER_WEEK {
            5 => {
                out.worked_this_weekend = worked;
                out.weekends += worked as u16;
            }
            6 => {
                if worked && !label.worked_this_weekend {
                    out.weekends += 1;
                }
                out.worked_this_weekend |= worked;
            }
            _ => out.worked_this_weekend = false,
        }
        out
    }

    /// Penalties charged on the arc into the sink.
    pub fn sink_penalty<T: Scalar>(&self, label: &Label<T>) -> Penalty {
        let c = self.contract;
        let mut p = c.total_days.penalty(label.work_days as u32)
            + c.weekends.penalty_for(label.weekends as u32);
        for (spec, &x) in c.unit_days.iter().zip(&label.unit_days) {
            p += spec.penalty(x as u32);
        }
        if self.close {
            p += self.work_dfa.closure_cost(label.work_state) + self.rest_dfa.closure_cost(label.rest_state);
        }
        p
    }

    /// Complete cost of a path ending with `label` at the last day.
    pub fn finish<T: Scalar>(&self, label: &Label<T>) -> T {
        label.cost + T::from_penalty(self.sink_penalty(label))
    }

    /// Days after `day` still to be assigned.
    pub fn remaining_days(&self, day: usize) -> usize {
        self.num_days - 1 - day
    }

    /// Weekends that can still be counted after `day` by a label whose
    /// weekend bit is `counted`.
    pub fn remaining_weekends(&self, day: usize, counted: bool) -> usize {
        let later = (0..self.num_weekends)
            .filter(|w| w * DAYS_PER_WEEK + 5 > day)
            .count();
        later + (day % DAYS_PER_WEEK == 5 && !counted) as usize
    }
}
