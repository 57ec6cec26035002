//! Ground-truth evaluation: exact penalty of a schedule, exhaustive pricing
//! and exhaustive roster search for tiny instances.

use crate::dfa::CostDfa;
use crate::graph::{BranchConstraintSet, DualValues};
use crate::instance::{
    check_hard, is_weekend, Assignment, HardViolation, Instance, Penalty, Roster, Schedule,
    SeriesSpec, DAYS_PER_WEEK,
};
use crate::scalar::Scalar;
use thiserror::Error;

/// Maximum number of candidate schedules [`enumerate_schedules`] will visit.
pub const PRICING_GUARD: u128 = 1_000_000;
/// Maximum number of rosters [`brute_force_roster`] will visit.
pub const ROSTER_GUARD: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Charge the shortfall of a run still open at the end of the horizon.
    pub penalize_trailing_stints: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            penalize_trailing_stints: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("schedule violates hard constraints: {0:?}")]
    HardInfeasible(Vec<HardViolation>),
    #[error("search space of {size} exceeds the guard of {guard}")]
    TooLarge { size: u128, guard: u128 },
    #[error("no schedule satisfies the branching constraints of nurse {0}")]
    NoFeasibleSchedule(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Violation {
    pub count: u32,
    pub penalty: Penalty,
}

/// Penalty of one individual schedule, split by soft constraint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PenaltyBreakdown {
    pub total_days: Violation,
    pub unit_days: Vec<Violation>,
    pub weekends: Violation,
    pub consec_work: Violation,
    pub consec_rest: Violation,
    pub day_requests: Violation,
    pub shift_requests: Violation,
    pub non_preferred: Violation,
}

impl PenaltyBreakdown {
    /// Counter penalties: working days, days per unit, working weekends.
    pub fn f_r(&self) -> Penalty {
        self.total_days.penalty
            + self.unit_days.iter().map(|v| v.penalty).sum::<Penalty>()
            + self.weekends.penalty
    }

    /// Consecutive work and rest penalties.
    pub fn f_o(&self) -> Penalty {
        self.consec_work.penalty + self.consec_rest.penalty
    }

    pub fn f_d(&self) -> Penalty {
        self.day_requests.penalty
    }

    pub fn f_s(&self) -> Penalty {
        self.shift_requests.penalty
    }

    pub fn f_p(&self) -> Penalty {
        self.non_preferred.penalty
    }

    pub fn total(&self) -> Penalty {
        self.f_r() + self.f_o() + self.f_d() + self.f_s() + self.f_p()
    }

    pub fn named_terms(&self, instance: &crate::instance::Instance) -> Vec<(String, Violation)> {
        let mut out = vec![("total_days".to_string(), self.total_days)];
        for (u, v) in self.unit_days.iter().enumerate() {
            out.push((format!("unit_days:{}", instance.units[u].name), *v));
        }
        out.extend([
            ("weekends".to_string(), self.weekends),
            ("consec_work".to_string(), self.consec_work),
            ("consec_rest".to_string(), self.consec_rest),
            ("day_requests".to_string(), self.day_requests),
            ("shift_requests".to_string(), self.shift_requests),
            ("non_preferred".to_string(), self.non_preferred),
        ]);
        out
    }
}

/// Exact penalty `c_nl` of a hard-feasible schedule.
pub fn schedule_penalty(
    instance: &Instance,
    nurse: usize,
    schedule: &Schedule,
    opts: &EvalOptions,
) -> Result<PenaltyBreakdown, OracleError> {
    let hard = check_hard(instance, nurse, schedule);
    if !hard.is_empty() {
        return Err(OracleError::HardInfeasible(hard));
    }
    Ok(penalty_terms(instance, nurse, schedule, opts))
}

/// Penalty terms without the hard-constraint check.
pub(crate) fn penalty_terms(
    instance: &Instance,
    nurse: usize,
    schedule: &Schedule,
    opts: &EvalOptions,
) -> PenaltyBreakdown {
    let c = &instance.nurses[nurse];
    let work = schedule.work_bits();
    let rest: Vec<bool> = work.iter().map(|w| !w).collect();
    let close = opts.penalize_trailing_stints;

    let worked = work.iter().filter(|&&w| w).count() as u32;
    let counter = |spec: &crate::instance::RangedCounterSpec, x: u32| Violation {
        count: spec.shortfall(x) + spec.excess(x),
        penalty: spec.penalty(x),
    };
    let unit_days = (0..instance.num_units())
        .map(|u| {
            let x = schedule.days.iter().filter(|a| a.unit() == Some(u)).count() as u32;
            counter(&c.unit_days[u], x)
        })
        .collect();
    let working_weekends = (0..instance.num_weekends())
        .filter(|w| (5..DAYS_PER_WEEK).any(|k| work[w * DAYS_PER_WEEK + k]))
        .count() as u32;
    debug_assert!(
        (0..instance.num_days).filter(|&d| is_weekend(d)).count() == 2 * instance.num_weekends()
    );

    let series = |spec: &SeriesSpec, bits: &[bool]| Violation {
        count: series_violation_days(spec, bits, close),
        penalty: CostDfa::consecutive(spec).evaluate(bits, close),
    };

    let mut day_requests = Violation::default();
    let mut shift_requests = Violation::default();
    let mut non_preferred = Violation::default();
    for (d, a) in schedule.days.iter().enumerate() {
        let req = c.day_requests[d];
        let p = if a.is_work() { req.off } else { req.on };
        if p > 0 {
            day_requests.count += 1;
            day_requests.penalty += p;
        }
        for (s, req) in c.shift_requests[d].iter().enumerate() {
            let p = if a.shift() == Some(s) { req.off } else { req.on };
            if p > 0 {
                shift_requests.count += 1;
                shift_requests.penalty += p;
            }
        }
        if let Assignment::Work { unit, .. } = *a {
            if !c.prefers(unit) && c.non_preferred[d][unit] > 0 {
                non_preferred.count += 1;
                non_preferred.penalty += c.non_preferred[d][unit];
            }
        }
    }

    PenaltyBreakdown {
        total_days: counter(&c.total_days, worked),
        unit_days,
        weekends: Violation {
            count: working_weekends.saturating_sub(c.weekends.max),
            penalty: c.weekends.penalty_for(working_weekends),
        },
        consec_work: series(&c.consec_work, &work),
        consec_rest: series(&c.consec_rest, &rest),
        day_requests,
        shift_requests,
        non_preferred,
    }
}

/// Missing plus excess days over all maximal runs of `true`.
fn series_violation_days(spec: &SeriesSpec, bits: &[bool], close_at_end: bool) -> u32 {
    let mut total = 0;
    let mut run = 0u32;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            run += 1;
        }
        let ends = !b || i + 1 == bits.len();
        if ends && run > 0 {
            let open = b;
            total += run.saturating_sub(spec.d_max);
            if !open || close_at_end {
                total += spec.d_min.saturating_sub(run);
            }
            run = 0;
        }
    }
    total
}

/// Options available to `nurse` on `day`, respecting skills and branching.
pub(crate) fn day_options(
    instance: &Instance,
    nurse: usize,
    day: usize,
    branching: &BranchConstraintSet,
) -> Vec<Assignment> {
    if let Some(k) = branching.forced_on(nurse, day) {
        return vec![Assignment::Work {
            unit: k.unit,
            shift: k.shift,
        }];
    }
    let contract = &instance.nurses[nurse];
    let mut out = vec![Assignment::Off];
    for u in 0..instance.num_units() {
        if !contract.can_work_in(u) {
            continue;
        }
        for s in 0..instance.num_shifts() {
            if !branching.is_forbidden(nurse, day, u, s) {
                out.push(Assignment::Work { unit: u, shift: s });
            }
        }
    }
    out
}

fn all_feasible_schedules(
    instance: &Instance,
    nurse: usize,
    branching: &BranchConstraintSet,
    mut visit: impl FnMut(&Schedule),
) {
    let options: Vec<Vec<Assignment>> = (0..instance.num_days)
        .map(|d| day_options(instance, nurse, d, branching))
        .collect();
    let mut schedule = Schedule::all_off(instance.num_days);
    fn rec(
        instance: &Instance,
        options: &[Vec<Assignment>],
        day: usize,
        schedule: &mut Schedule,
        visit: &mut dyn FnMut(&Schedule),
    ) {
        if day == options.len() {
            visit(schedule);
            return;
        }
        let prev = if day > 0 { schedule.days[day - 1].shift() } else { None };
        for &a in &options[day] {
            if let (Some(p), Some(s)) = (prev, a.shift()) {
                if instance.is_forbidden(p, s) {
                    continue;
                }
            }
            schedule.days[day] = a;
            rec(instance, options, day + 1, schedule, visit);
        }
        schedule.days[day] = Assignment::Off;
    }
    rec(instance, &options, 0, &mut schedule, &mut visit);
}

fn pricing_space(instance: &Instance) -> u128 {
    let per_day = (instance.num_units() * instance.num_shifts() + 1) as u128;
    per_day.saturating_pow(instance.num_days as u32)
}

/// Minimum reduced cost over every hard-feasible schedule of `nurse`,
/// found by exhaustive enumeration.
pub fn enumerate_schedules<T: Scalar>(
    instance: &Instance,
    nurse: usize,
    duals: &DualValues<T>,
    branching: &BranchConstraintSet,
    opts: &EvalOptions,
) -> Result<(T, Schedule), OracleError> {
    let size = pricing_space(instance);
    if size > PRICING_GUARD {
        return Err(OracleError::TooLarge {
            size,
            guard: PRICING_GUARD,
        });
    }
    let mut best: Option<(T, Schedule)> = None;
    all_feasible_schedules(instance, nurse, branching, |schedule| {
        let rc = reduced_cost(instance, nurse, schedule, duals, opts);
        if best.as_ref().map_or(true, |(b, _)| rc < *b) {
            best = Some((rc, schedule.clone()));
        }
    });
    best.ok_or(OracleError::NoFeasibleSchedule(nurse))
}

/// `c_nl - sum of cover duals over the assignments - nurse dual`.
pub fn reduced_cost<T: Scalar>(
    instance: &Instance,
    nurse: usize,
    schedule: &Schedule,
    duals: &DualValues<T>,
    opts: &EvalOptions,
) -> T {
    let penalty = penalty_terms(instance, nurse, schedule, opts).total();
    let mut rc = T::from_penalty(penalty) - duals.nurse[nurse];
    for cell in schedule.cells(instance) {
        rc = rc - duals.cover[cell];
    }
    rc
}

/// Exact integer optimum over all rosters.
pub fn brute_force_roster(instance: &Instance, opts: &EvalOptions) -> Result<(Penalty, Roster), OracleError> {
    let none = BranchConstraintSet::default();
    let mut per_nurse: Vec<Vec<(Penalty, Vec<usize>, Schedule)>> = Vec::new();
    let mut size: u128 = 1;
    for n in 0..instance.num_nurses() {
        if pricing_space(instance) > ROSTER_GUARD {
            return Err(OracleError::TooLarge {
                size: pricing_space(instance),
                guard: ROSTER_GUARD,
            });
        }
        let mut list = Vec::new();
        all_feasible_schedules(instance, n, &none, |s| {
            let p = penalty_terms(instance, n, s, opts).total();
            list.push((p, s.cells(instance), s.clone()));
        });
        list.sort_by_key(|(p, _, _)| *p);
        size = size.saturating_mul(list.len() as u128);
        if size > ROSTER_GUARD {
            return Err(OracleError::TooLarge {
                size,
                guard: ROSTER_GUARD,
            });
        }
        per_nurse.push(list);
    }
    // Cheapest possible penalty of nurses n.. (used for pruning).
    let mut tail_min = vec![0; per_nurse.len() + 1];
    for n in (0..per_nurse.len()).rev() {
        tail_min[n] = tail_min[n + 1] + per_nurse[n][0].0;
    }

    struct Search<'a> {
        instance: &'a Instance,
        per_nurse: &'a [Vec<(Penalty, Vec<usize>, Schedule)>],
        tail_min: &'a [Penalty],
        coverage: Vec<u32>,
        choice: Vec<usize>,
        best: Penalty,
        best_choice: Vec<usize>,
    }
    impl Search<'_> {
        fn rec(&mut self, n: usize, partial: Penalty) {
            if partial + self.tail_min[n] >= self.best {
                return;
            }
            if n == self.per_nurse.len() {
                let under: Penalty = self
                    .instance
                    .cover
                    .iter()
                    .zip(&self.coverage)
                    .map(|(c, &have)| c.required.saturating_sub(have) as Penalty * c.under_penalty)
                    .sum();
                if partial + under < self.best {
                    self.best = partial + under;
                    self.best_choice = self.choice.clone();
                }
                return;
            }
            for i in 0..self.per_nurse[n].len() {
                let (p, ref cells, _) = self.per_nurse[n][i];
                for &c in cells {
                    self.coverage[c] += 1;
                }
                self.choice[n] = i;
                self.rec(n + 1, partial + p);
                for &c in &self.per_nurse[n][i].1 {
                    self.coverage[c] -= 1;
                }
            }
        }
    }
    let mut search = Search {
        instance,
        per_nurse: &per_nurse,
        tail_min: &tail_min,
        coverage: vec![0; instance.num_cells()],
        choice: vec![0; per_nurse.len()],
        best: Penalty::MAX,
        best_choice: vec![0; per_nurse.len()],
    };
    search.rec(0, 0);
    let roster = Roster::from_schedules(
        search
            .best_choice
            .iter()
            .enumerate()
            .map(|(n, &i)| per_nurse[n][i].2.clone())
            .collect(),
    );
    Ok((search.best, roster))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AssignmentKey;
    use crate::instance::{CoverCell, NurseContract, RangedCounterSpec, ShiftSpec, UnitSpec};

    fn single_cell_instance(days: usize) -> Instance {
        Instance {
            num_days: days,
            units: vec![UnitSpec { name: "A".into() }],
            shifts: vec![ShiftSpec { name: "D".into() }],
            forbidden: Default::default(),
            cover: vec![CoverCell::default(); days],
            nurses: vec![NurseContract::relaxed("n", days, 1, 1)],
        }
    }

    #[test]
    fn all_off_with_minimum_days() {
        let mut inst = single_cell_instance(7);
        let n = &mut inst.nurses[0];
        n.total_days = RangedCounterSpec::new(5, 7, 20, 20);
        n.consec_rest = SeriesSpec::new(1, 7, 15, 15);
        n.day_requests[2].on = 10;
        n.day_requests[4].on = 10;
        let b = schedule_penalty(&inst, 0, &Schedule::all_off(7), &EvalOptions::default()).unwrap();
        assert_eq!(b.total_days.penalty, 100);
        assert_eq!(b.day_requests.penalty, 20);
        assert_eq!(b.total(), 120);
    }

    #[test]
    fn seven_day_stint_exceeds_six() {
        let mut inst = single_cell_instance(7);
        inst.nurses[0].consec_work = SeriesSpec::new(2, 6, 15, 15);
        let s = Schedule {
            days: vec![Assignment::Work { unit: 0, shift: 0 }; 7],
        };
        let b = schedule_penalty(&inst, 0, &s, &EvalOptions::default()).unwrap();
        assert_eq!(b.consec_work, Violation { count: 1, penalty: 15 });
        assert_eq!(b.f_o(), 15);
    }

    #[test]
    fn hard_infeasible_schedule_is_rejected() {
        let mut inst = single_cell_instance(7);
        inst.nurses[0].required_units.clear();
        inst.nurses[0].preferred_units.clear();
        let mut s = Schedule::all_off(7);
        s.days[0] = Assignment::Work { unit: 0, shift: 0 };
        assert!(matches!(
            schedule_penalty(&inst, 0, &s, &EvalOptions::default()),
            Err(OracleError::HardInfeasible(_))
        ));
    }

    #[test]
    fn trailing_stint_flag_controls_closure() {
        let mut inst = single_cell_instance(7);
        inst.nurses[0].consec_work = SeriesSpec::new(3, 6, 10, 10);
        let mut s = Schedule::all_off(7);
        s.days[6] = Assignment::Work { unit: 0, shift: 0 };
        let on = schedule_penalty(&inst, 0, &s, &EvalOptions::default()).unwrap();
        let off = schedule_penalty(
            &inst,
            0,
            &s,
            &EvalOptions {
                penalize_trailing_stints: false,
            },
        )
        .unwrap();
        assert_eq!(on.consec_work, Violation { count: 2, penalty: 20 });
        assert_eq!(off.consec_work, Violation::default());
    }

    #[test]
    fn enumeration_single_day_tie_is_zero() {
        let mut inst = single_cell_instance(7);
        inst.num_days = 1;
        inst.cover.truncate(1);
        inst.nurses = vec![NurseContract::relaxed("n", 1, 1, 1)];
        let duals = DualValues::<i64>::zeros(&inst);
        let (rc, _) =
            enumerate_schedules(&inst, 0, &duals, &Default::default(), &EvalOptions::default()).unwrap();
        assert_eq!(rc, 0);
    }

    #[test]
    fn enumeration_respects_forced_assignment() {
        let inst = crate::instance::generate_instance(1, 1, 1, 4);
        let duals = DualValues::<i64>::zeros(&inst);
        let key = AssignmentKey {
            nurse: 0,
            day: 3,
            unit: 0,
            shift: 2,
        };
        let branching = BranchConstraintSet::default().with_forced(key);
        let (_, s) = enumerate_schedules(&inst, 0, &duals, &branching, &EvalOptions::default()).unwrap();
        assert_eq!(s.days[3], Assignment::Work { unit: 0, shift: 2 });
    }

    #[test]
    fn enumeration_guard_refuses_large_spaces() {
        let inst = crate::instance::generate_instance(1, 2, 2, 0);
        let duals = DualValues::<i64>::zeros(&inst);
        assert!(matches!(
            enumerate_schedules(&inst, 0, &duals, &Default::default(), &EvalOptions::default()),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn zero_instance_brute_force_is_zero() {
        let mut inst = single_cell_instance(7);
        inst.num_days = 7;
        let (opt, roster) = brute_force_roster(&inst, &EvalOptions::default()).unwrap();
        assert_eq!(opt, 0);
        assert_eq!(roster.schedules.len(), 1);
    }

    #[test]
    fn two_day_brute_force_trades_understaffing_against_stint() {
        // 1 nurse, 2 days, cover 1 each day at 30; working both days
        // exceeds dmax = 1 by one day at cost 100.
        let mut inst = single_cell_instance(7);
        inst.num_days = 2;
        inst.cover = vec![
            CoverCell {
                required: 1,
                under_penalty: 30
            };
            2
        ];
        let mut n = NurseContract::relaxed("n", 2, 1, 1);
        n.consec_work = SeriesSpec::new(1, 1, 0, 100);
        inst.nurses = vec![n];
        let (opt, _) = brute_force_roster(&inst, &EvalOptions::default()).unwrap();
        // Work one day, miss the other: 30. Work both: 100. Work none: 60.
        assert_eq!(opt, 30);
    }
}
