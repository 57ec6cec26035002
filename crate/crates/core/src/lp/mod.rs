//! Restricted master problem and the simplex engine that solves it.
//!
//! Rows: one `>=` cover row per (day, unit, shift) and one `= 1` convexity
//! row per nurse. Variables, in this order: one understaffing slack `v` per
//! cover row, one surplus per cover row (turning the cover rows into
//! equalities), then the schedule columns in insertion order.

mod simplex;

pub use simplex::solve_rmp;

use crate::graph::DualValues;
use crate::instance::{CellIndex, Instance, Penalty, Schedule};
use crate::scalar::Real;
use std::collections::HashMap;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScheduleColumn {
    pub nurse: usize,
    pub schedule: Schedule,
    /// Penalty `c_nl` of the schedule.
    pub cost: Penalty,
    /// Cover rows the schedule contributes to, ascending.
    pub cells: Vec<CellIndex>,
}

impl ScheduleColumn {
    pub fn new(instance: &Instance, nurse: usize, schedule: Schedule, cost: Penalty) -> Self {
        let cells = schedule.cells(instance);
        ScheduleColumn {
            nurse,
            schedule,
            cost,
            cells,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("nurse {0} has no schedule column")]
    MissingColumn(usize),
    #[error("basis matrix is singular")]
    Singular,
    #[error("simplex did not converge within {0} pivots")]
    IterationLimit(usize),
    #[error("problem is unbounded")]
    Unbounded,
}

/// Indices of the basic variables, one per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RmpModel<F> {
    num_nurses: usize,
    rhs: Vec<F>,
    under_cost: Vec<F>,
    columns: Vec<ScheduleColumn>,
    index: HashMap<(usize, Schedule), usize>,
}

impl<F: Real> RmpModel<F> {
    pub fn new(instance: &Instance) -> Self {
        RmpModel {
            num_nurses: instance.num_nurses(),
            rhs: instance.cover.iter().map(|c| F::lit(f64::from(c.required))).collect(),
            under_cost: instance.cover.iter().map(|c| F::from_penalty(c.under_penalty)).collect(),
            columns: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_nurses(&self) -> usize {
        self.num_nurses
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len() + self.num_nurses
    }

    /// Slacks, surpluses and schedule columns.
    pub fn num_vars(&self) -> usize {
        2 * self.rhs.len() + self.columns.len()
    }

    pub fn columns(&self) -> &[ScheduleColumn] {
        &self.columns
    }

    pub fn rhs(&self) -> &[F] {
        &self.rhs
    }

    pub fn under_cost(&self) -> &[F] {
        &self.under_cost
    }

    /// Adds `column` unless the same schedule is already present for that
    /// nurse. Returns the column index when added.
    pub fn add_column(&mut self, column: ScheduleColumn) -> Option<usize> {
        assert!(column.nurse < self.num_nurses, "unknown nurse {}", column.nurse);
        let key = (column.nurse, column.schedule.clone());
        if self.index.contains_key(&key) {
            return None;
        }
        let i = self.columns.len();
        self.index.insert(key, i);
        self.columns.push(column);
        Some(i)
    }

    pub fn contains(&self, nurse: usize, schedule: &Schedule) -> bool {
        self.index.contains_key(&(nurse, schedule.clone()))
    }

    /// `c_nl - sum of cover duals - nurse dual` of schedule column `j`.
    pub fn reduced_cost(&self, j: usize, duals: &DualValues<F>) -> F {
        let col = &self.columns[j];
        let mut rc = F::from_penalty(col.cost) - duals.nurse[col.nurse];
        for &c in &col.cells {
            rc = rc - duals.cover[c];
        }
        rc
    }

    pub(crate) fn var_cost(&self, j: usize) -> F {
        let c = self.rhs.len();
        if j < c {
            self.under_cost[j]
        } else if j < 2 * c {
            F::zero()
        } else {
            F::from_penalty(self.columns[j - 2 * c].cost)
        }
    }

    /// Calls `f(row, coefficient)` for every nonzero of variable `j`.
    pub(crate) fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, F)) {
        let c = self.rhs.len();
        if j < c {
            f(j, F::one());
        } else if j < 2 * c {
            f(j - c, -F::one());
        } else {
            let col = &self.columns[j - 2 * c];
            for &cell in &col.cells {
                f(cell, F::one());
            }
            f(c + col.nurse, F::one());
        }
    }

    /// The model in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let c = self.rhs.len();
        let mut out = String::from("\\ restricted master problem\nMinimize\n obj:");
        let mut first = true;
        let mut term = |out: &mut String, coef: F, name: String| {
            let sign = if first { "" } else { "+ " };
            first = false;
            write!(out, " {sign}{coef} {name}").unwrap();
        };
        for (i, &p) in self.under_cost.iter().enumerate() {
            term(&mut out, p, format!("v{i}"));
        }
        for (j, col) in self.columns.iter().enumerate() {
            term(&mut out, F::from_penalty(col.cost), format!("x{j}"));
        }
        out.push_str("\nSubject To\n");
        let mut rows: Vec<Vec<String>> = (0..self.num_rows()).map(|_| Vec::new()).collect();
        for i in 0..c {
            rows[i].push(format!("v{i}"));
        }
        for (j, col) in self.columns.iter().enumerate() {
            for &cell in &col.cells {
                rows[cell].push(format!("x{j}"));
            }
            rows[c + col.nurse].push(format!("x{j}"));
        }
        for (i, vars) in rows.iter().enumerate() {
            let lhs = if vars.is_empty() { "0 v0".to_string() } else { vars.join(" + ") };
            if i < c {
                writeln!(out, " cover{i}: {lhs} >= {}", self.rhs[i]).unwrap();
            } else {
                writeln!(out, " nurse{}: {lhs} = 1", i - c).unwrap();
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone)]
pub struct RmpSolution<F> {
    /// Snapped onto a fixed binary grid, see [`crate::scalar::snap`].
    pub objective: F,
    /// Value of every schedule column, by column index.
    pub x: Vec<F>,
    /// Understaffing per cover row.
    pub under: Vec<F>,
    pub duals: DualValues<F>,
    pub basis: Basis,
    pub pivots: usize,
}
