//! Bounds on the future penalty difference between two partial paths.

use crate::dfa::{CostDfa, DfaState};
use crate::instance::{Penalty, RangedCounterSpec};

/// `(pdMin, pdMax)` of `f(e) = pen(r1 + e) - pen(r2 + e)` over
/// `e in [0, max_extra]`.
///
/// `pen` is convex, so `f` is monotone (non-increasing when `r1 < r2`) and
/// its extremes are attained at the two endpoints.
pub fn penalty_diff_bounds(spec: &RangedCounterSpec, r1: u32, r2: u32, max_extra: u32) -> (Penalty, Penalty) {
    let f = |e: u32| spec.penalty(r1 + e) - spec.penalty(r2 + e);
    match r1.cmp(&r2) {
        std::cmp::Ordering::Less => (f(max_extra), f(0)),
        std::cmp::Ordering::Greater => (f(0), f(max_extra)),
        std::cmp::Ordering::Equal => (0, 0),
    }
}

/// Same as [`penalty_diff_bounds`] for a max-only counter
/// `pen(x) = penalty * max(0, x - max)`.
pub fn weekend_diff_bounds(max: u32, penalty: Penalty, r1: u32, r2: u32, max_extra: u32) -> (Penalty, Penalty) {
    penalty_diff_bounds(&RangedCounterSpec::new(0, max, 0, penalty), r1, r2, max_extra)
}

/// Exact `(pdMin, pdMax)` of the difference in automaton cost between runs
/// started in `s1` and `s2` over every input sequence of length `max_extra`
/// (plus closure when `close_at_end`).
///
/// Both runs return to the start state at the first `0`, so only the number
/// of leading `1`s matters.
pub fn dfa_diff_bounds(
    dfa: &CostDfa,
    s1: DfaState,
    s2: DfaState,
    max_extra: u32,
    close_at_end: bool,
) -> (Penalty, Penalty) {
    if s1 == s2 {
        return (0, 0);
    }
    let (mut a, mut b, mut acc) = (s1, s2, 0);
    let (mut lo, mut hi) = (Penalty::MAX, Penalty::MIN);
    for _ in 0..max_extra {
        let brk = acc + dfa.step(a, false).1 - dfa.step(b, false).1;
        lo = lo.min(brk);
        hi = hi.max(brk);
        let (na, ca) = dfa.step(a, true);
        let (nb, cb) = dfa.step(b, true);
        acc += ca - cb;
        a = na;
        b = nb;
    }
    let never = if close_at_end {
        acc + dfa.closure_cost(a) - dfa.closure_cost(b)
    } else {
        acc
    };
    (lo.min(never), hi.max(never))
}

/// [`dfa_diff_bounds`] for every state pair and every `max_extra` up to a
/// horizon, computed once per pricing run.
#[derive(Debug, Clone)]
pub struct DfaBoundTable {
    states: usize,
    horizon: usize,
    table: Vec<(Penalty, Penalty)>,
}

impl DfaBoundTable {
    pub fn new(dfa: &CostDfa, horizon: usize, close_at_end: bool) -> Self {
        let states = dfa.num_states();
        let mut table = vec![(0, 0); states * states * (horizon + 1)];
        for i in 0..states {
            for j in 0..states {
                if i == j {
                    continue;
                }
                let (mut a, mut b, mut acc) = (DfaState(i as u16), DfaState(j as u16), 0);
                let (mut lo, mut hi) = (Penalty::MAX, Penalty::MIN);
                for m in 0..=horizon {
                    let never = if close_at_end {
                        acc + dfa.closure_cost(a) - dfa.closure_cost(b)
                    } else {
                        acc
                    };
                    table[(i * states + j) * (horizon + 1) + m] = (lo.min(never), hi.max(never));
                    let brk = acc + dfa.step(a, false).1 - dfa.step(b, false).1;
                    lo = lo.min(brk);
                    hi = hi.max(brk);
                    let (na, ca) = dfa.step(a, true);
                    let (nb, cb) = dfa.step(b, true);
                    acc += ca - cb;
                    a = na;
                    b = nb;
                }
            }
        }
        DfaBoundTable { states, horizon, table }
    }

    #[inline]
    pub fn get(&self, s1: DfaState, s2: DfaState, max_extra: usize) -> (Penalty, Penalty) {
        debug_assert!(max_extra <= self.horizon);
        self.table[(s1.index() * self.states + s2.index()) * (self.horizon + 1) + max_extra]
    }
}
