//! Problem data for nurse rostering with multiple units.
//!
//! Days are indexed from 0 and the horizon always starts on a Monday, so day
//! `d` falls on a weekend iff `d % 7` is 5 (Saturday) or 6 (Sunday).

mod format;
mod generate;
mod roster;

pub use format::{parse_instance, serialize_instance};
pub use generate::{generate_instance, generate_with, GeneratorConfig};
pub use roster::{
    check_hard, parse_roster, serialize_roster, validate_roster, HardViolation, Roster,
    RosterError, RosterReport,
};

use num_integer::Integer;
use std::collections::BTreeSet;
use thiserror::Error;

/// Integer penalty weight. All costs in an instance are integers.
pub type Penalty = i64;

pub const DAYS_PER_WEEK: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{location}: invalid {field}: {msg}")]
    Invalid {
        field: String,
        location: String,
        msg: String,
    },
}

impl InstanceError {
    pub(crate) fn invalid(field: &str, location: impl Into<String>, msg: impl Into<String>) -> Self {
        InstanceError::Invalid {
            field: field.to_string(),
            location: location.into(),
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitSpec {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShiftSpec {
    pub name: String,
}

/// Soft limit on a count with a minimum and a maximum, penalized linearly
/// per unit of shortfall or excess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RangedCounterSpec {
    pub min: u32,
    pub max: u32,
    pub p_min: Penalty,
    pub p_max: Penalty,
}

impl RangedCounterSpec {
    pub fn new(min: u32, max: u32, p_min: Penalty, p_max: Penalty) -> Self {
        RangedCounterSpec {
            min,
            max,
            p_min,
            p_max,
        }
    }

    /// A counter that never incurs a penalty.
    pub fn unconstrained(max: u32) -> Self {
        RangedCounterSpec::new(0, max, 0, 0)
    }

    pub fn shortfall(&self, x: u32) -> u32 {
        self.min.saturating_sub(x)
    }

    pub fn excess(&self, x: u32) -> u32 {
        x.saturating_sub(self.max)
    }

    pub fn penalty(&self, x: u32) -> Penalty {
        self.p_min * self.shortfall(x) as Penalty + self.p_max * self.excess(x) as Penalty
    }

    fn check(&self, field: &str, location: &str) -> Result<(), InstanceError> {
        if self.min > self.max {
            return Err(InstanceError::invalid(
                field,
                location,
                format!("min {} exceeds max {}", self.min, self.max),
            ));
        }
        if self.p_min < 0 || self.p_max < 0 {
            return Err(InstanceError::invalid(field, location, "negative penalty"));
        }
        Ok(())
    }
}

/// Soft limits on the length of consecutive runs (of work or of rest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeriesSpec {
    pub d_min: u32,
    pub d_max: u32,
    /// Cost per missing day when a run is shorter than `d_min`.
    pub c_min: Penalty,
    /// Cost per day beyond `d_max`.
    pub c_max: Penalty,
}

impl SeriesSpec {
    pub fn new(d_min: u32, d_max: u32, c_min: Penalty, c_max: Penalty) -> Self {
        SeriesSpec {
            d_min,
            d_max,
            c_min,
            c_max,
        }
    }

    fn check(&self, field: &str, location: &str) -> Result<(), InstanceError> {
        if self.d_min < 1 || self.d_min > self.d_max {
            return Err(InstanceError::invalid(
                field,
                location,
                format!("need 1 <= dmin <= dmax, got {} and {}", self.d_min, self.d_max),
            ));
        }
        if self.c_min < 0 || self.c_max < 0 {
            return Err(InstanceError::invalid(field, location, "negative penalty"));
        }
        Ok(())
    }
}

/// Maximum number of working weekends and the per-weekend excess penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeekendLimit {
    pub max: u32,
    pub penalty: Penalty,
}

impl WeekendLimit {
    pub fn penalty_for(&self, weekends: u32) -> Penalty {
        self.penalty * weekends.saturating_sub(self.max) as Penalty
    }
}

/// Penalties for an on-request (charged when not working) and an
/// off-request (charged when working).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RequestPenalty {
    pub on: Penalty,
    pub off: Penalty,
}

impl RequestPenalty {
    pub fn is_zero(&self) -> bool {
        self.on == 0 && self.off == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NurseContract {
    pub id: String,
    /// Units the nurse may be assigned to.
    pub required_units: BTreeSet<usize>,
    /// Units for which no non-preferred penalty applies; a subset of
    /// `required_units`.
    pub preferred_units: BTreeSet<usize>,
    pub total_days: RangedCounterSpec,
    /// One counter per unit of the instance.
    pub unit_days: Vec<RangedCounterSpec>,
    pub weekends: WeekendLimit,
    pub consec_work: SeriesSpec,
    pub consec_rest: SeriesSpec,
    /// Indexed by day.
    pub day_requests: Vec<RequestPenalty>,
    /// Indexed by `[day][shift]`.
    pub shift_requests: Vec<Vec<RequestPenalty>>,
    /// Indexed by `[day][unit]`; charged only for non-preferred units.
    pub non_preferred: Vec<Vec<Penalty>>,
}

impl NurseContract {
    /// A contract without any soft constraint pressure.
    pub fn relaxed(id: impl Into<String>, num_days: usize, num_units: usize, num_shifts: usize) -> Self {
        let all: BTreeSet<usize> = (0..num_units).collect();
        NurseContract {
            id: id.into(),
            required_units: all.clone(),
            preferred_units: all,
            total_days: RangedCounterSpec::unconstrained(num_days as u32),
            unit_days: vec![RangedCounterSpec::unconstrained(num_days as u32); num_units],
            weekends: WeekendLimit {
                max: (num_days / DAYS_PER_WEEK) as u32,
                penalty: 0,
            },
            consec_work: SeriesSpec::new(1, num_days.max(1) as u32, 0, 0),
            consec_rest: SeriesSpec::new(1, num_days.max(1) as u32, 0, 0),
            day_requests: vec![RequestPenalty::default(); num_days],
            shift_requests: vec![vec![RequestPenalty::default(); num_shifts]; num_days],
            non_preferred: vec![vec![0; num_units]; num_days],
        }
    }

    pub fn can_work_in(&self, unit: usize) -> bool {
        self.required_units.contains(&unit)
    }

    pub fn prefers(&self, unit: usize) -> bool {
        self.preferred_units.contains(&unit)
    }
}

/// Required staffing and understaffing cost for one (day, unit, shift).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CoverCell {
    pub required: u32,
    pub under_penalty: Penalty,
}

/// Index of a (day, unit, shift) triple in the flattened cover layout.
pub type CellIndex = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub num_days: usize,
    pub units: Vec<UnitSpec>,
    pub shifts: Vec<ShiftSpec>,
    /// Pairs `(s, t)`: shift `t` may not follow shift `s` on the next day.
    pub forbidden: BTreeSet<(usize, usize)>,
    /// Flattened `[day][unit][shift]`.
    pub cover: Vec<CoverCell>,
    pub nurses: Vec<NurseContract>,
}

impl Instance {
    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn num_shifts(&self) -> usize {
        self.shifts.len()
    }

    pub fn num_nurses(&self) -> usize {
        self.nurses.len()
    }

    pub fn num_cells(&self) -> usize {
        self.num_days * self.units.len() * self.shifts.len()
    }

    pub fn num_weekends(&self) -> usize {
        self.num_days / DAYS_PER_WEEK
    }

    pub fn cell(&self, day: usize, unit: usize, shift: usize) -> CellIndex {
        (day * self.units.len() + unit) * self.shifts.len() + shift
    }

    pub fn cell_parts(&self, cell: CellIndex) -> (usize, usize, usize) {
        let s = self.shifts.len();
        let u = self.units.len();
        (cell / (u * s), (cell / s) % u, cell % s)
    }

    pub fn cover_at(&self, day: usize, unit: usize, shift: usize) -> CoverCell {
        self.cover[self.cell(day, unit, shift)]
    }

    pub fn is_forbidden(&self, shift: usize, next: usize) -> bool {
        self.forbidden.contains(&(shift, next))
    }

    pub fn unit_index(&self, name: &str) -> Option<usize> {
        self.units.iter().position(|u| u.name == name)
    }

    pub fn shift_index(&self, name: &str) -> Option<usize> {
        self.shifts.iter().position(|s| s.name == name)
    }

    pub fn nurse_index(&self, id: &str) -> Option<usize> {
        self.nurses.iter().position(|n| n.id == id)
    }

    /// The "single" variant: every nurse may only work in preferred units.
    /// Greatest common divisor of every penalty weight: all objective
    /// values are multiples of it. 1 when the instance has no weights.
    pub fn objective_step(&self) -> Penalty {
        let mut g: Penalty = 0;
        let mut add = |p: Penalty| g = g.gcd(&p);
        for c in &self.cover {
            add(c.under_penalty);
        }
        for n in &self.nurses {
            for spec in std::iter::once(&n.total_days).chain(&n.unit_days) {
                add(spec.p_min);
                add(spec.p_max);
            }
            add(n.weekends.penalty);
            for s in [&n.consec_work, &n.consec_rest] {
                add(s.c_min);
                add(s.c_max);
            }
            for r in n.day_requests.iter().chain(n.shift_requests.iter().flatten()) {
                add(r.on);
                add(r.off);
            }
            for &p in n.non_preferred.iter().flatten() {
                add(p);
            }
        }
        g.max(1)
    }

    pub fn restricted_to_preferred(&self) -> Instance {
        let mut out = self.clone();
        for nurse in &mut out.nurses {
            nurse.required_units = nurse.preferred_units.clone();
        }
        out
    }

    /// Checks every invariant of the data model.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.num_days == 0 || self.num_days % DAYS_PER_WEEK != 0 {
            return Err(InstanceError::invalid(
                "days",
                "[horizon]",
                format!("{} is not a positive multiple of 7", self.num_days),
            ));
        }
        if self.units.is_empty() {
            return Err(InstanceError::invalid("units", "[units]", "no units"));
        }
        if self.shifts.is_empty() {
            return Err(InstanceError::invalid("shifts", "[shifts]", "no shifts"));
        }
        check_unique(self.units.iter().map(|u| u.name.as_str()), "units", "[units]")?;
        check_unique(self.shifts.iter().map(|s| s.name.as_str()), "shifts", "[shifts]")?;
        check_unique(self.nurses.iter().map(|n| n.id.as_str()), "nurse id", "[nurse]")?;
        for &(a, b) in &self.forbidden {
            if a >= self.num_shifts() || b >= self.num_shifts() {
                return Err(InstanceError::invalid("rotations", "[rotations]", "unknown shift"));
            }
        }
        if self.cover.len() != self.num_cells() {
            return Err(InstanceError::invalid("cover", "[cover]", "wrong number of cells"));
        }
        if self.cover.iter().any(|c| c.under_penalty < 0) {
            return Err(InstanceError::invalid("cover", "[cover]", "negative penalty"));
        }
        for nurse in &self.nurses {
            self.validate_nurse(nurse)?;
        }
        Ok(())
    }

    fn validate_nurse(&self, nurse: &NurseContract) -> Result<(), InstanceError> {
        let loc = format!("[nurse {}]", nurse.id);
        let (d, u, s) = (self.num_days, self.num_units(), self.num_shifts());
        if let Some(&bad) = nurse.required_units.iter().find(|&&x| x >= u) {
            return Err(InstanceError::invalid("required", &loc, format!("unknown unit {bad}")));
        }
        if !nurse.preferred_units.is_subset(&nurse.required_units) {
            return Err(InstanceError::invalid(
                "preferred",
                &loc,
                "preferred units must be a subset of required units",
            ));
        }
        nurse.total_days.check("total_days", &loc)?;
        if nurse.unit_days.len() != u {
            return Err(InstanceError::invalid("unit_days", &loc, "one counter per unit expected"));
        }
        for (unit, spec) in nurse.unit_days.iter().enumerate() {
            spec.check(&format!("unit_days {}", self.units[unit].name), &loc)?;
        }
        if nurse.weekends.penalty < 0 {
            return Err(InstanceError::invalid("weekends", &loc, "negative penalty"));
        }
        nurse.consec_work.check("consec_work", &loc)?;
        nurse.consec_rest.check("consec_rest", &loc)?;
        let dims_ok = nurse.day_requests.len() == d
            && nurse.shift_requests.len() == d
            && nurse.shift_requests.iter().all(|r| r.len() == s)
            && nurse.non_preferred.len() == d
            && nurse.non_preferred.iter().all(|r| r.len() == u);
        if !dims_ok {
            return Err(InstanceError::invalid("requests", &loc, "dimension mismatch"));
        }
        let negative = nurse.day_requests.iter().any(|r| r.on < 0 || r.off < 0)
            || nurse.shift_requests.iter().flatten().any(|r| r.on < 0 || r.off < 0)
            || nurse.non_preferred.iter().flatten().any(|&p| p < 0);
        if negative {
            return Err(InstanceError::invalid("requests", &loc, "negative penalty"));
        }
        Ok(())
    }
}

fn check_unique<'a>(
    names: impl Iterator<Item = &'a str>,
    field: &str,
    loc: &str,
) -> Result<(), InstanceError> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(InstanceError::invalid(field, loc, format!("duplicate name {name}")));
        }
    }
    Ok(())
}

pub fn is_weekend(day: usize) -> bool {
    day % DAYS_PER_WEEK >= 5
}

/// One day of an individual schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assignment {
    Off,
    Work { unit: usize, shift: usize },
}

impl Assignment {
    pub fn is_work(&self) -> bool {
        matches!(self, Assignment::Work { .. })
    }

    pub fn shift(&self) -> Option<usize> {
        match *self {
            Assignment::Work { shift, .. } => Some(shift),
            Assignment::Off => None,
        }
    }

    pub fn unit(&self) -> Option<usize> {
        match *self {
            Assignment::Work { unit, .. } => Some(unit),
            Assignment::Off => None,
        }
    }
}

/// One nurse's assignment for every day of the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schedule {
    pub days: Vec<Assignment>,
}

impl Schedule {
    pub fn all_off(num_days: usize) -> Self {
        Schedule {
            days: vec![Assignment::Off; num_days],
        }
    }

    pub fn work_bits(&self) -> Vec<bool> {
        self.days.iter().map(Assignment::is_work).collect()
    }

    pub fn work_days(&self) -> usize {
        self.days.iter().filter(|a| a.is_work()).count()
    }

    /// Cover cells this schedule contributes to.
    pub fn cells(&self, instance: &Instance) -> Vec<CellIndex> {
        self.days
            .iter()
            .enumerate()
            .filter_map(|(d, a)| match *a {
                Assignment::Work { unit, shift } => Some(instance.cell(d, unit, shift)),
                Assignment::Off => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_layout_round_trips() {
        let inst = generate_instance(3, 1, 2, 5);
        for d in 0..inst.num_days {
            for u in 0..2 {
                for s in 0..3 {
                    assert_eq!(inst.cell_parts(inst.cell(d, u, s)), (d, u, s));
                }
            }
        }
    }

    #[test]
    fn ranged_counter_penalty_is_linear_outside_range() {
        let spec = RangedCounterSpec::new(3, 6, 10, 20);
        assert_eq!(spec.penalty(0), 30);
        assert_eq!(spec.penalty(3), 0);
        assert_eq!(spec.penalty(6), 0);
        assert_eq!(spec.penalty(8), 40);
    }

    #[test]
    fn weekend_days_follow_monday_start() {
        let weekend: Vec<usize> = (0..14).filter(|&d| is_weekend(d)).collect();
        assert_eq!(weekend, vec![5, 6, 12, 13]);
    }

    #[test]
    fn preferred_must_be_subset() {
        let mut inst = generate_instance(2, 1, 2, 1);
        inst.nurses[0].required_units = [0].into_iter().collect();
        inst.nurses[0].preferred_units = [1].into_iter().collect();
        assert!(matches!(
            inst.validate(),
            Err(InstanceError::Invalid { ref field, .. }) if field == "preferred"
        ));
    }

    #[test]
    fn single_mode_restricts_skills() {
        let inst = generate_instance(6, 1, 3, 2);
        let single = inst.restricted_to_preferred();
        for n in &single.nurses {
            assert_eq!(n.required_units, n.preferred_units);
            assert_eq!(n.required_units.len(), 1);
        }
    }
}
