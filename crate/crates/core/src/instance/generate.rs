use super::{
    CoverCell, Instance, NurseContract, Penalty, RangedCounterSpec, RequestPenalty, SeriesSpec,
    ShiftSpec, UnitSpec, WeekendLimit, DAYS_PER_WEEK,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Penalty weights and demand level used by [`generate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub under_penalty: Penalty,
    pub total_days_penalty: Penalty,
    pub unit_days_penalty: Penalty,
    pub weekend_penalty: Penalty,
    pub consec_work_penalty: Penalty,
    pub consec_rest_penalty: Penalty,
    pub request_penalty: Penalty,
    pub non_preferred_penalty: Penalty,
    /// Expected weekly demand as a fraction of the weekly nurse supply.
    pub demand_ratio: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            under_penalty: 30,
            total_days_penalty: 20,
            unit_days_penalty: 10,
            weekend_penalty: 30,
            consec_work_penalty: 15,
            consec_rest_penalty: 15,
            request_penalty: 10,
            non_preferred_penalty: 5,
            demand_ratio: 0.7,
        }
    }
}

/// Seeded instance with three shifts (Early, Late, Night) per unit and the
/// Late-Early, Night-Early and Night-Late rotations forbidden.
pub fn generate_instance(nurses: usize, weeks: usize, units: usize, seed: u64) -> Instance {
    generate_with(&GeneratorConfig::default(), nurses, weeks, units, seed)
}

pub fn generate_with(
    cfg: &GeneratorConfig,
    num_nurses: usize,
    weeks: usize,
    num_units: usize,
    seed: u64,
) -> Instance {
    assert!(num_nurses >= 1 && weeks >= 1 && num_units >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_days = weeks * DAYS_PER_WEEK;
    let shifts: Vec<ShiftSpec> = ["Early", "Late", "Night"]
        .iter()
        .map(|s| ShiftSpec { name: s.to_string() })
        .collect();
    let units: Vec<UnitSpec> = (0..num_units)
        .map(|u| UnitSpec {
            name: format!("U{u}"),
        })
        .collect();
    let forbidden: BTreeSet<(usize, usize)> = [(1, 0), (2, 0), (2, 1)].into_iter().collect();

    let mut preferred: Vec<usize> = (0..num_nurses).map(|i| i % num_units).collect();
    preferred.shuffle(&mut rng);

    let w = weeks as u32;
    let mut nurses = Vec::with_capacity(num_nurses);
    for (i, &pref) in preferred.iter().enumerate() {
        let mut required: BTreeSet<usize> = [pref].into_iter().collect();
        for u in 0..num_units {
            if u != pref && rng.gen_bool(0.5) {
                required.insert(u);
            }
        }
        let full_time = rng.gen_bool(0.6);
        let (lo, hi) = if full_time { (4 * w, 5 * w) } else { (2 * w, 3 * w) };
        let total_days = RangedCounterSpec::new(lo, hi, cfg.total_days_penalty, cfg.total_days_penalty);
        let unit_days = (0..num_units)
            .map(|u| {
                if u == pref {
                    RangedCounterSpec::new(w, hi, cfg.unit_days_penalty, cfg.unit_days_penalty)
                } else if required.contains(&u) {
                    RangedCounterSpec::new(0, 2 * w, cfg.unit_days_penalty, cfg.unit_days_penalty)
                } else {
                    RangedCounterSpec::unconstrained(num_days as u32)
                }
            })
            .collect();
        let work_min = rng.gen_range(2..=3);
        let work_max = rng.gen_range(5..=6);
        let rest_min = rng.gen_range(1..=2);
        let rest_max = rng.gen_range(3..=4);

        let mut day_requests = vec![RequestPenalty::default(); num_days];
        let mut shift_requests = vec![vec![RequestPenalty::default(); shifts.len()]; num_days];
        for week in 0..weeks {
            let base = week * DAYS_PER_WEEK;
            let off_day = base + rng.gen_range(0..DAYS_PER_WEEK);
            day_requests[off_day].off = cfg.request_penalty;
            if rng.gen_bool(0.3) {
                let on_day = base + rng.gen_range(0..DAYS_PER_WEEK);
                if on_day != off_day {
                    day_requests[on_day].on = cfg.request_penalty;
                }
            }
            let d = base + rng.gen_range(0..DAYS_PER_WEEK);
            let s = rng.gen_range(0..shifts.len());
            shift_requests[d][s].off = cfg.request_penalty;
            if rng.gen_bool(0.3) {
                let d = base + rng.gen_range(0..DAYS_PER_WEEK);
                let s = rng.gen_range(0..shifts.len());
                if shift_requests[d][s].off == 0 {
                    shift_requests[d][s].on = cfg.request_penalty;
                }
            }
        }
        let non_preferred = (0..num_days)
            .map(|_| {
                (0..num_units)
                    .map(|u| {
                        if u != pref && required.contains(&u) {
                            cfg.non_preferred_penalty
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();

        nurses.push(NurseContract {
            id: format!("N{i}"),
            required_units: required,
            preferred_units: [pref].into_iter().collect(),
            total_days,
            unit_days,
            weekends: WeekendLimit {
                max: w.div_ceil(2),
                penalty: cfg.weekend_penalty,
            },
            consec_work: SeriesSpec::new(work_min, work_max, cfg.consec_work_penalty, cfg.consec_work_penalty),
            consec_rest: SeriesSpec::new(rest_min, rest_max, cfg.consec_rest_penalty, cfg.consec_rest_penalty),
            day_requests,
            shift_requests,
            non_preferred,
        });
    }

    let cover = generate_cover(cfg, &mut rng, &nurses, num_days, num_units, shifts.len());
    Instance {
        num_days,
        units,
        shifts,
        forbidden,
        cover,
        nurses,
    }
}

fn generate_cover(
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
    nurses: &[NurseContract],
    num_days: usize,
    num_units: usize,
    num_shifts: usize,
) -> Vec<CoverCell> {
    let weeks = (num_days / DAYS_PER_WEEK) as f64;
    let weekly_supply: f64 = nurses
        .iter()
        .map(|n| f64::from(n.total_days.min + n.total_days.max) / 2.0 / weeks)
        .sum();
    let cells_per_week = (DAYS_PER_WEEK * num_units * num_shifts) as f64;
    // E[draw] = 1 for a uniform draw from {0, 1, 2}.
    let scale = cfg.demand_ratio * weekly_supply / cells_per_week;

    let skilled: Vec<u32> = (0..num_units)
        .map(|u| nurses.iter().filter(|n| n.required_units.contains(&u)).count() as u32)
        .collect();
    let mut cover = vec![CoverCell::default(); num_days * num_units * num_shifts];
    for d in 0..num_days {
        let mut day_total = 0u32;
        for u in 0..num_units {
            let mut unit_total = 0u32;
            for s in 0..num_shifts {
                let draw = rng.gen_range(0..=2u32) as f64 * scale;
                let mut required = draw.floor() as u32;
                if rng.gen_bool(draw - draw.floor()) {
                    required += 1;
                }
                let room = skilled[u]
                    .saturating_sub(unit_total)
                    .min((nurses.len() as u32).saturating_sub(day_total));
                required = required.min(room);
                unit_total += required;
                day_total += required;
                cover[(d * num_units + u) * num_shifts + s] = CoverCell {
                    required,
                    under_penalty: cfg.under_penalty,
                };
            }
        }
    }
    cover
}
