//! Cost-augmented automata for series constraints.
//!
//! A [`CostDfa`] built from a [`SeriesSpec`] has states `S_0..=S_dmax`, where
//! `S_i` means the current run of `1` inputs has length `i` (saturating at
//! `dmax`). Input `1` extends the run; input `0` ends it and returns to
//! `S_0`. Costs are charged on the transitions:
//!
//! | state            | input 1               | input 0                      |
//! |------------------|-----------------------|------------------------------|
//! | `S_0`            | `S_1` / 0             | `S_0` / 0                    |
//! | `S_i`, i < dmin  | `S_{i+1}` / 0         | `S_0` / (dmin - i) * cmin    |
//! | `S_i`, i >= dmin | `S_{i+1}` / 0         | `S_0` / 0                    |
//! | `S_dmax`         | `S_dmax` / cmax       | `S_0` / 0                    |
//!
//! The same automaton evaluates consecutive rest when fed the complemented
//! work sequence.

use crate::instance::{Penalty, SeriesSpec};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DfaState(pub u16);

impl DfaState {
    pub const START: DfaState = DfaState(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Transition {
    next: DfaState,
    cost: Penalty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostDfa {
    initial: DfaState,
    /// `table[state][input]`.
    table: Vec<[Transition; 2]>,
    /// Charged when the input ends while in the state.
    closure: Vec<Penalty>,
}

impl CostDfa {
    /// Automaton for "runs of 1s have length within `[dmin, dmax]`".
    pub fn consecutive(spec: &SeriesSpec) -> CostDfa {
        let d_min = spec.d_min as usize;
        let d_max = spec.d_max as usize;
        assert!(d_min >= 1 && d_min <= d_max, "invalid series spec {spec:?}");
        assert!(d_max < u16::MAX as usize);
        let shortfall = |i: usize| -> Penalty {
            if i > 0 && i < d_min {
                (d_min - i) as Penalty * spec.c_min
            } else {
                0
            }
        };
        let table = (0..=d_max)
            .map(|i| {
                let one = if i < d_max {
                    Transition {
                        next: DfaState(i as u16 + 1),
                        cost: 0,
                    }
                } else {
                    Transition {
                        next: DfaState(d_max as u16),
                        cost: spec.c_max,
                    }
                };
                let zero = Transition {
                    next: DfaState::START,
                    cost: shortfall(i),
                };
                [zero, one]
            })
            .collect();
        let closure = (0..=d_max).map(shortfall).collect();
        CostDfa {
            initial: DfaState::START,
            table,
            closure,
        }
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn initial(&self) -> DfaState {
        self.initial
    }

    #[inline]
    pub fn step(&self, state: DfaState, input: bool) -> (DfaState, Penalty) {
        let t = self.table[state.index()][input as usize];
        (t.next, t.cost)
    }

    #[inline]
    pub fn closure_cost(&self, state: DfaState) -> Penalty {
        self.closure[state.index()]
    }

    /// Total cost of running `bits` from the initial state, plus the closure
    /// cost of the final state when `close_at_end` is set.
    pub fn evaluate(&self, bits: &[bool], close_at_end: bool) -> Penalty {
        let (state, cost) = self.run_from(self.initial, bits);
        if close_at_end {
            cost + self.closure_cost(state)
        } else {
            cost
        }
    }

    pub fn run_from(&self, mut state: DfaState, bits: &[bool]) -> (DfaState, Penalty) {
        let mut total = 0;
        for &b in bits {
            let (next, c) = self.step(state, b);
            total += c;
            state = next;
        }
        (state, total)
    }

    /// Transition table as CSV `currentState,input,nextState,cost`, input `1`
    /// listed before input `0` for every state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("currentState,input,nextState,cost\n");
        for (i, row) in self.table.iter().enumerate() {
            for input in [1usize, 0] {
                let t = row[input];
                writeln!(out, "S{i},{input},S{},{}", t.next.0, t.cost).unwrap();
            }
        }
        out
    }
}
