//! Rosters: file format, hard-constraint checks and objective accounting.

use super::{Assignment, Instance, Penalty, Schedule};
use crate::oracle::{self, EvalOptions, PenaltyBreakdown};
use std::collections::BTreeMap;
use std::fmt::{self, Write};
use thiserror::Error;

/// One schedule per nurse, keyed by nurse index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Roster {
    pub schedules: BTreeMap<usize, Schedule>,
}

impl Roster {
    pub fn from_schedules(schedules: Vec<Schedule>) -> Self {
        Roster {
            schedules: schedules.into_iter().enumerate().collect(),
        }
    }

    pub fn all_off(instance: &Instance) -> Self {
        Roster::from_schedules(vec![Schedule::all_off(instance.num_days); instance.num_nurses()])
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RosterError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("no schedule for nurse {0}")]
    MissingSchedule(String),
    #[error("schedule for nurse {nurse} has {found} days, expected {expected}")]
    WrongLength {
        nurse: String,
        found: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HardViolation {
    /// Assignment to a unit the nurse lacks the required skill for.
    Skill { nurse: usize, day: usize, unit: usize },
    /// `to` on day `day + 1` may not follow `from` on day `day`.
    Rotation {
        nurse: usize,
        day: usize,
        from: usize,
        to: usize,
    },
}

impl fmt::Display for HardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HardViolation::Skill { nurse, day, unit } => {
                write!(f, "nurse {nurse} lacks the skill for unit {unit} on day {day}")
            }
            HardViolation::Rotation { nurse, day, from, to } => {
                write!(f, "nurse {nurse}: shift {to} on day {} follows shift {from}", day + 1)
            }
        }
    }
}

/// Hard-constraint violations of one schedule (skills and rotations).
pub fn check_hard(instance: &Instance, nurse: usize, schedule: &Schedule) -> Vec<HardViolation> {
    let contract = &instance.nurses[nurse];
    let mut out = Vec::new();
    for (day, a) in schedule.days.iter().enumerate() {
        if let Assignment::Work { unit, .. } = *a {
            if !contract.can_work_in(unit) {
                out.push(HardViolation::Skill { nurse, day, unit });
            }
        }
    }
    for (day, pair) in schedule.days.windows(2).enumerate() {
        if let (Some(from), Some(to)) = (pair[0].shift(), pair[1].shift()) {
            if instance.is_forbidden(from, to) {
                out.push(HardViolation::Rotation { nurse, day, from, to });
            }
        }
    }
    out
}

/// Understaffing of one (day, unit, shift).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Understaffing {
    pub day: usize,
    pub unit: usize,
    pub shift: usize,
    pub missing: u32,
    pub penalty: Penalty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterReport {
    pub objective: Penalty,
    /// Indexed by nurse.
    pub nurses: Vec<PenaltyBreakdown>,
    pub understaffing: Vec<Understaffing>,
    pub hard_violations: Vec<HardViolation>,
}

impl RosterReport {
    pub fn understaffing_penalty(&self) -> Penalty {
        self.understaffing.iter().map(|u| u.penalty).sum()
    }

    pub fn is_feasible(&self) -> bool {
        self.hard_violations.is_empty()
    }

    /// CSV with columns `constraint,nurse,violationCount,penalty`.
    pub fn to_csv(&self, instance: &Instance) -> String {
        let mut out = String::from("constraint,nurse,violationCount,penalty\n");
        for (n, b) in self.nurses.iter().enumerate() {
            let id = &instance.nurses[n].id;
            for (name, v) in b.named_terms(instance) {
                writeln!(out, "{name},{id},{},{}", v.count, v.penalty).unwrap();
            }
        }
        for u in &self.understaffing {
            writeln!(
                out,
                "understaffing:{}:{}:{},-,{},{}",
                u.day, instance.units[u.unit].name, instance.shifts[u.shift].name, u.missing, u.penalty
            )
            .unwrap();
        }
        for h in &self.hard_violations {
            let (kind, nurse) = match *h {
                HardViolation::Skill { nurse, .. } => ("hard:skill", nurse),
                HardViolation::Rotation { nurse, .. } => ("hard:rotation", nurse),
            };
            writeln!(out, "{kind},{},1,0", instance.nurses[nurse].id).unwrap();
        }
        writeln!(out, "total,-,{},{}", self.hard_violations.len(), self.objective).unwrap();
        out
    }
}

/// Objective of a complete roster: nurse penalties plus understaffing.
pub fn validate_roster(
    instance: &Instance,
    roster: &Roster,
    opts: &EvalOptions,
) -> Result<RosterReport, RosterError> {
    let mut coverage = vec![0u32; instance.num_cells()];
    let mut nurses = Vec::with_capacity(instance.num_nurses());
    let mut hard_violations = Vec::new();
    for (n, contract) in instance.nurses.iter().enumerate() {
        let schedule = roster
            .schedules
            .get(&n)
            .ok_or_else(|| RosterError::MissingSchedule(contract.id.clone()))?;
        if schedule.days.len() != instance.num_days {
            return Err(RosterError::WrongLength {
                nurse: contract.id.clone(),
                found: schedule.days.len(),
                expected: instance.num_days,
            });
        }
        hard_violations.extend(check_hard(instance, n, schedule));
        nurses.push(oracle::penalty_terms(instance, n, schedule, opts));
        for cell in schedule.cells(instance) {
            coverage[cell] += 1;
        }
    }
    let mut understaffing = Vec::new();
    for (cell, c) in instance.cover.iter().enumerate() {
        let missing = c.required.saturating_sub(coverage[cell]);
        if missing > 0 {
            let (day, unit, shift) = instance.cell_parts(cell);
            understaffing.push(Understaffing {
                day,
                unit,
                shift,
                missing,
                penalty: missing as Penalty * c.under_penalty,
            });
        }
    }
    let objective = nurses.iter().map(PenaltyBreakdown::total).sum::<Penalty>()
        + understaffing.iter().map(|u| u.penalty).sum::<Penalty>();
    Ok(RosterReport {
        objective,
        nurses,
        understaffing,
        hard_violations,
    })
}

/// Parses `nurseId day:unit/shift ...` lines; omitted days are Off.
pub fn parse_roster(instance: &Instance, text: &str) -> Result<Roster, RosterError> {
    let mut roster = Roster::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| RosterError::Syntax { line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let id = toks.next().expect("non-empty line");
        let nurse = instance
            .nurse_index(id)
            .ok_or_else(|| err(format!("unknown nurse `{id}`")))?;
        let mut schedule = Schedule::all_off(instance.num_days);
        for tok in toks {
            let (day, rest) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected `day:unit/shift`, found `{tok}`")))?;
            let (unit, shift) = rest
                .split_once('/')
                .ok_or_else(|| err(format!("expected `day:unit/shift`, found `{tok}`")))?;
            let day: usize = day.parse().map_err(|_| err(format!("bad day `{day}`")))?;
            if day >= instance.num_days {
                return Err(err(format!("day {day} outside horizon")));
            }
            let unit = instance
                .unit_index(unit)
                .ok_or_else(|| err(format!("unknown unit `{unit}`")))?;
            let shift = instance
                .shift_index(shift)
                .ok_or_else(|| err(format!("unknown shift `{shift}`")))?;
            schedule.days[day] = Assignment::Work { unit, shift };
        }
        if roster.schedules.insert(nurse, schedule).is_some() {
            return Err(err(format!("duplicate schedule for `{id}`")));
        }
    }
    Ok(roster)
}

pub fn serialize_roster(instance: &Instance, roster: &Roster) -> String {
    let mut out = String::new();
    for (&n, schedule) in &roster.schedules {
        out.push_str(&instance.nurses[n].id);
        for (d, a) in schedule.days.iter().enumerate() {
            if let Assignment::Work { unit, shift } = *a {
                write!(out, " {d}:{}/{}", instance.units[unit].name, instance.shifts[shift].name).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, CoverCell, NurseContract, ShiftSpec, UnitSpec};
    use std::collections::BTreeSet;

    fn three_shift_instance() -> Instance {
        let mut inst = Instance {
            num_days: 7,
            units: vec![UnitSpec { name: "A".into() }],
            shifts: ["Early", "Late", "Night"]
                .iter()
                .map(|s| ShiftSpec { name: s.to_string() })
                .collect(),
            forbidden: [(1, 0), (2, 0), (2, 1)].into_iter().collect::<BTreeSet<_>>(),
            cover: vec![CoverCell::default(); 21],
            nurses: vec![NurseContract::relaxed("n", 7, 1, 3)],
        };
        inst.nurses[0].consec_rest.d_max = 7;
        inst
    }

    #[test]
    fn night_then_early_is_a_hard_violation() {
        let inst = three_shift_instance();
        let text = "n 2:A/Night 3:A/Early\n";
        let roster = parse_roster(&inst, text).unwrap();
        let report = validate_roster(&inst, &roster, &EvalOptions::default()).unwrap();
        assert_eq!(
            report.hard_violations,
            vec![HardViolation::Rotation {
                nurse: 0,
                day: 2,
                from: 2,
                to: 0
            }]
        );
        assert!(report.to_csv(&inst).contains("hard:rotation,n,1,0"));
    }

    #[test]
    fn relaxed_roster_without_cover_costs_nothing() {
        let inst = three_shift_instance();
        let roster = parse_roster(&inst, "n 0:A/Early 1:A/Late\n").unwrap();
        let report = validate_roster(&inst, &roster, &EvalOptions::default()).unwrap();
        assert!(report.is_feasible());
        assert_eq!(report.objective, 0);
    }

    #[test]
    fn missing_nurse_is_an_error() {
        let inst = generate_instance(3, 1, 1, 0);
        let roster = parse_roster(&inst, "N0\nN1\n").unwrap();
        assert_eq!(
            validate_roster(&inst, &roster, &EvalOptions::default()),
            Err(RosterError::MissingSchedule("N2".into()))
        );
    }

    #[test]
    fn roster_text_round_trips() {
        let inst = generate_instance(4, 1, 2, 3);
        let text = "N0 0:U0/Early 1:U0/Early\nN1\nN2 6:U1/Night\nN3 2:U0/Late\n";
        let roster = parse_roster(&inst, text).unwrap();
        assert_eq!(serialize_roster(&inst, &roster), text);
    }

    #[test]
    fn understaffing_is_charged_per_missing_nurse() {
        let mut inst = three_shift_instance();
        let cell = inst.cell(0, 0, 0);
        inst.cover[cell] = CoverCell {
            required: 2,
            under_penalty: 30,
        };
        let roster = parse_roster(&inst, "n 0:A/Early\n").unwrap();
        let report = validate_roster(&inst, &roster, &EvalOptions::default()).unwrap();
        assert_eq!(report.understaffing_penalty(), 30);
        assert_eq!(report.objective, 30);
    }
}
