//! Plain-text instance format.
//!
//! ```text
//! # comment
//! [horizon]
//! days = 14
//!
//! [units]
//! ICU
//! Ward
//!
//! [shifts]
//! Early
//! Late
//! Night
//!
//! [rotations]            # "<shift> <forbidden next-day shift>"
//! Late Early
//!
//! [cover]                # "<day> <unit> <shift> <required> <understaff penalty>"
//! 0 ICU Early 2 30
//!
//! [nurse N0]
//! required = ICU Ward
//! preferred = ICU
//! total_days = 4 10 20 20          # min max penaltyBelow penaltyAbove
//! unit_days ICU = 0 10 10 10       # same layout, one line per unit
//! weekends = 1 30                  # max penalty
//! consec_work = 2 5 15 15          # dmin dmax cmin cmax
//! consec_rest = 1 3 15 15
//! day_request 3 = 0 10             # on-penalty off-penalty
//! shift_request 3 Early = 0 10     # on-penalty off-penalty
//! non_preferred 0 Ward = 5
//! ```
//!
//! Missing cover cells default to zero. Missing nurse entries default to an
//! unconstrained counter/series and zero request penalties.

use super::{
    CoverCell, Instance, InstanceError, NurseContract, RangedCounterSpec, RequestPenalty,
    SeriesSpec, ShiftSpec, UnitSpec, WeekendLimit,
};
use std::collections::BTreeSet;
use std::fmt::Write;

struct Line<'a> {
    number: usize,
    text: &'a str,
}

#[derive(Default)]
struct Sections<'a> {
    horizon: Vec<Line<'a>>,
    units: Vec<Line<'a>>,
    shifts: Vec<Line<'a>>,
    rotations: Vec<Line<'a>>,
    cover: Vec<Line<'a>>,
    nurses: Vec<(Line<'a>, Vec<Line<'a>>)>,
}

fn syntax(line: usize, msg: impl Into<String>) -> InstanceError {
    InstanceError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn split_sections(text: &str) -> Result<Sections<'_>, InstanceError> {
    #[derive(Clone, Copy)]
    enum Current {
        None,
        Horizon,
        Units,
        Shifts,
        Rotations,
        Cover,
        Nurse,
    }
    let mut out = Sections::default();
    let mut current = Current::None;
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        if let Some(header) = stripped.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| syntax(number, "unterminated section header"))?
                .trim();
            current = match header {
                "horizon" => Current::Horizon,
                "units" => Current::Units,
                "shifts" => Current::Shifts,
                "rotations" => Current::Rotations,
                "cover" => Current::Cover,
                h => match h.strip_prefix("nurse") {
                    Some(id) if !id.trim().is_empty() && id.starts_with(char::is_whitespace) => {
                        out.nurses.push((
                            Line {
                                number,
                                text: id.trim(),
                            },
                            Vec::new(),
                        ));
                        Current::Nurse
                    }
                    _ => return Err(syntax(number, format!("unknown section [{h}]"))),
                },
            };
            continue;
        }
        let line = Line {
            number,
            text: stripped,
        };
        match current {
            Current::None => return Err(syntax(number, "content outside of any section")),
            Current::Horizon => out.horizon.push(line),
            Current::Units => out.units.push(line),
            Current::Shifts => out.shifts.push(line),
            Current::Rotations => out.rotations.push(line),
            Current::Cover => out.cover.push(line),
            Current::Nurse => out.nurses.last_mut().expect("nurse section").1.push(line),
        }
    }
    Ok(out)
}

fn split_kv<'a>(line: &Line<'a>) -> Result<(Vec<&'a str>, Vec<&'a str>), InstanceError> {
    let (key, value) = line
        .text
        .split_once('=')
        .ok_or_else(|| syntax(line.number, "expected `key = value`"))?;
    Ok((key.split_whitespace().collect(), value.split_whitespace().collect()))
}

fn int<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, InstanceError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("expected an integer, found `{tok}`")))
}

fn ints<T: std::str::FromStr>(toks: &[&str], n: usize, line: usize) -> Result<Vec<T>, InstanceError> {
    if toks.len() != n {
        return Err(syntax(line, format!("expected {n} values, found {}", toks.len())));
    }
    toks.iter().map(|t| int(t, line)).collect()
}

struct Names<'a> {
    units: &'a [UnitSpec],
    shifts: &'a [ShiftSpec],
}

impl Names<'_> {
    fn unit(&self, name: &str, line: usize) -> Result<usize, InstanceError> {
        self.units
            .iter()
            .position(|u| u.name == name)
            .ok_or_else(|| syntax(line, format!("unknown unit `{name}`")))
    }

    fn shift(&self, name: &str, line: usize) -> Result<usize, InstanceError> {
        self.shifts
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| syntax(line, format!("unknown shift `{name}`")))
    }
}

fn single_names(lines: &[Line<'_>]) -> Result<Vec<String>, InstanceError> {
    lines
        .iter()
        .map(|l| {
            let mut toks = l.text.split_whitespace();
            let name = toks.next().expect("non-empty line");
            if toks.next().is_some() {
                return Err(syntax(l.number, "names may not contain whitespace"));
            }
            Ok(name.to_string())
        })
        .collect()
}

/// Parses and validates an instance.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let sections = split_sections(text)?;

    let mut num_days = None;
    for line in &sections.horizon {
        let (key, value) = split_kv(line)?;
        match key.as_slice() {
            ["days"] => num_days = Some(ints::<usize>(&value, 1, line.number)?[0]),
            _ => return Err(syntax(line.number, "unknown horizon key")),
        }
    }
    let num_days = num_days.ok_or_else(|| InstanceError::invalid("days", "[horizon]", "missing"))?;

    let units: Vec<UnitSpec> = single_names(&sections.units)?
        .into_iter()
        .map(|name| UnitSpec { name })
        .collect();
    let shifts: Vec<ShiftSpec> = single_names(&sections.shifts)?
        .into_iter()
        .map(|name| ShiftSpec { name })
        .collect();
    let names = Names {
        units: &units,
        shifts: &shifts,
    };

    let mut forbidden = BTreeSet::new();
    for line in &sections.rotations {
        let toks: Vec<&str> = line.text.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(syntax(line.number, "expected `<shift> <next shift>`"));
        }
        forbidden.insert((names.shift(toks[0], line.number)?, names.shift(toks[1], line.number)?));
    }

    let (nu, ns) = (units.len(), shifts.len());
    let mut cover = vec![CoverCell::default(); num_days * nu * ns];
    for line in &sections.cover {
        let toks: Vec<&str> = line.text.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(syntax(line.number, "expected `<day> <unit> <shift> <required> <penalty>`"));
        }
        let day: usize = int(toks[0], line.number)?;
        if day >= num_days {
            return Err(syntax(line.number, format!("day {day} outside horizon")));
        }
        let unit = names.unit(toks[1], line.number)?;
        let shift = names.shift(toks[2], line.number)?;
        cover[(day * nu + unit) * ns + shift] = CoverCell {
            required: int(toks[3], line.number)?,
            under_penalty: int(toks[4], line.number)?,
        };
    }

    let mut nurses = Vec::new();
    for (header, lines) in &sections.nurses {
        nurses.push(parse_nurse(header, lines, num_days, &names)?);
    }

    let instance = Instance {
        num_days,
        units,
        shifts,
        forbidden,
        cover,
        nurses,
    };
    instance.validate()?;
    Ok(instance)
}

fn parse_nurse(
    header: &Line<'_>,
    lines: &[Line<'_>],
    num_days: usize,
    names: &Names<'_>,
) -> Result<NurseContract, InstanceError> {
    let mut nurse = NurseContract::relaxed(header.text, num_days, names.units.len(), names.shifts.len());
    let mut saw_required = false;
    let day_of = |tok: &str, line: usize| -> Result<usize, InstanceError> {
        let day: usize = int(tok, line)?;
        if day >= num_days {
            return Err(syntax(line, format!("day {day} outside horizon")));
        }
        Ok(day)
    };
    for line in lines {
        let n = line.number;
        let (key, value) = split_kv(line)?;
        match key.as_slice() {
            ["required"] => {
                saw_required = true;
                nurse.required_units = value
                    .iter()
                    .map(|u| names.unit(u, n))
                    .collect::<Result<_, _>>()?;
            }
            ["preferred"] => {
                nurse.preferred_units = value
                    .iter()
                    .map(|u| names.unit(u, n))
                    .collect::<Result<_, _>>()?;
            }
            ["total_days"] => {
                let v = ints::<i64>(&value, 4, n)?;
                nurse.total_days = counter(&v, n)?;
            }
            ["unit_days", unit] => {
                let u = names.unit(unit, n)?;
                let v = ints::<i64>(&value, 4, n)?;
                nurse.unit_days[u] = counter(&v, n)?;
            }
            ["weekends"] => {
                let v = ints::<i64>(&value, 2, n)?;
                nurse.weekends = WeekendLimit {
                    max: to_count(v[0], n)?,
                    penalty: v[1],
                };
            }
            ["consec_work"] | ["consec_rest"] => {
                let v = ints::<i64>(&value, 4, n)?;
                let spec = SeriesSpec::new(to_count(v[0], n)?, to_count(v[1], n)?, v[2], v[3]);
                if key[0] == "consec_work" {
                    nurse.consec_work = spec;
                } else {
                    nurse.consec_rest = spec;
                }
            }
            ["day_request", day] => {
                let d = day_of(day, n)?;
                let v = ints::<i64>(&value, 2, n)?;
                nurse.day_requests[d] = RequestPenalty { on: v[0], off: v[1] };
            }
            ["shift_request", day, shift] => {
                let d = day_of(day, n)?;
                let s = names.shift(shift, n)?;
                let v = ints::<i64>(&value, 2, n)?;
                nurse.shift_requests[d][s] = RequestPenalty { on: v[0], off: v[1] };
            }
            ["non_preferred", day, unit] => {
                let d = day_of(day, n)?;
                let u = names.unit(unit, n)?;
                nurse.non_preferred[d][u] = ints::<i64>(&value, 1, n)?[0];
            }
            _ => return Err(syntax(n, format!("unknown nurse key `{}`", key.join(" ")))),
        }
    }
    if !saw_required {
        return Err(InstanceError::invalid(
            "required",
            format!("[nurse {}]", nurse.id),
            "missing",
        ));
    }
    Ok(nurse)
}

fn to_count(v: i64, line: usize) -> Result<u32, InstanceError> {
    u32::try_from(v).map_err(|_| syntax(line, format!("count {v} out of range")))
}

fn counter(v: &[i64], line: usize) -> Result<RangedCounterSpec, InstanceError> {
    Ok(RangedCounterSpec::new(to_count(v[0], line)?, to_count(v[1], line)?, v[2], v[3]))
}

/// Writes `instance` in the text format accepted by [`parse_instance`].
pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let unit = |u: usize| instance.units[u].name.as_str();
    let shift = |s: usize| instance.shifts[s].name.as_str();

    writeln!(out, "[horizon]\ndays = {}\n", instance.num_days).unwrap();
    out.push_str("[units]\n");
    for u in &instance.units {
        writeln!(out, "{}", u.name).unwrap();
    }
    out.push_str("\n[shifts]\n");
    for s in &instance.shifts {
        writeln!(out, "{}", s.name).unwrap();
    }
    out.push_str("\n[rotations]\n");
    for &(a, b) in &instance.forbidden {
        writeln!(out, "{} {}", shift(a), shift(b)).unwrap();
    }
    out.push_str("\n[cover]\n");
    for d in 0..instance.num_days {
        for u in 0..instance.num_units() {
            for s in 0..instance.num_shifts() {
                let c = instance.cover_at(d, u, s);
                writeln!(out, "{d} {} {} {} {}", unit(u), shift(s), c.required, c.under_penalty).unwrap();
            }
        }
    }
    for nurse in &instance.nurses {
        writeln!(out, "\n[nurse {}]", nurse.id).unwrap();
        let join = |set: &BTreeSet<usize>| set.iter().map(|&u| unit(u)).collect::<Vec<_>>().join(" ");
        writeln!(out, "required = {}", join(&nurse.required_units)).unwrap();
        writeln!(out, "preferred = {}", join(&nurse.preferred_units)).unwrap();
        let c = nurse.total_days;
        writeln!(out, "total_days = {} {} {} {}", c.min, c.max, c.p_min, c.p_max).unwrap();
        for (u, c) in nurse.unit_days.iter().enumerate() {
            writeln!(out, "unit_days {} = {} {} {} {}", unit(u), c.min, c.max, c.p_min, c.p_max).unwrap();
        }
        writeln!(out, "weekends = {} {}", nurse.weekends.max, nurse.weekends.penalty).unwrap();
        for (key, s) in [("consec_work", nurse.consec_work), ("consec_rest", nurse.consec_rest)] {
            writeln!(out, "{key} = {} {} {} {}", s.d_min, s.d_max, s.c_min, s.c_max).unwrap();
        }
        for (d, r) in nurse.day_requests.iter().enumerate() {
            if !r.is_zero() {
                writeln!(out, "day_request {d} = {} {}", r.on, r.off).unwrap();
            }
        }
        for (d, row) in nurse.shift_requests.iter().enumerate() {
            for (s, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    writeln!(out, "shift_request {d} {} = {} {}", shift(s), r.on, r.off).unwrap();
                }
            }
        }
        for (d, row) in nurse.non_preferred.iter().enumerate() {
            for (u, &p) in row.iter().enumerate() {
                if p != 0 {
                    writeln!(out, "non_preferred {d} {} = {p}", unit(u)).unwrap();
                }
            }
        }
    }
    out
}
