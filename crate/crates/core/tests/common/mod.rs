#![allow(dead_code)]

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use nurse_bnp::instance::{
    CoverCell, Instance, NurseContract, Penalty, RangedCounterSpec, RequestPenalty, SeriesSpec, ShiftSpec, UnitSpec,
    WeekendLimit,
};
use nurse_bnp::lp::RmpModel;
use rand::Rng;
use std::collections::BTreeSet;

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// `min c.x` subject to `A x = b`, `x >= 0`, by a two-phase tableau simplex
/// over exact rationals with Bland's rule. `None` when infeasible or
/// unbounded.
pub fn tableau_minimize(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Option<BigRational> {
    let m = a.len();
    let n = c.len();
    // Columns: n structural, then m artificials, then the rhs.
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let sign = if b[i].is_negative() { -BigRational::one() } else { BigRational::one() };
            let mut row = vec![BigRational::zero(); width];
            for j in 0..n {
                row[j] = &a[i][j] * &sign;
            }
            row[n + i] = BigRational::one();
            row[n + m] = &b[i] * &sign;
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let phase1: Vec<BigRational> = (0..n + m).map(|j| if j >= n { q(1) } else { q(0) }).collect();
    let v = run_phase(&mut t, &mut basis, &phase1, n + m)?;
    if !v.is_zero() {
        return None;
    }
    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat(q(0)).take(m));
    // Artificials stay at zero: forbid them from entering.
    run_phase(&mut t, &mut basis, &cost, n)
}

fn pivot(t: &mut [Vec<BigRational>], basis: &mut [usize], r: usize, col: usize) {
    let p = t[r][col].clone();
    for x in t[r].iter_mut() {
        *x = &*x / &p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[col].is_zero() {
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &f * y;
            }
        }
    }
    basis[r] = col;
}

fn run_phase(
    t: &mut [Vec<BigRational>],
    basis: &mut [usize],
    cost: &[BigRational],
    enterable: usize,
) -> Option<BigRational> {
    let rhs = t[0].len() - 1;
    loop {
        let entering = (0..enterable).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut rc = cost[j].clone();
            for (i, row) in t.iter().enumerate() {
                rc -= &cost[basis[i]] * &row[j];
            }
            rc.is_negative()
        });
        let Some(j) = entering else {
            let mut obj = BigRational::zero();
            for (i, row) in t.iter().enumerate() {
                obj += &cost[basis[i]] * &row[rhs];
            }
            return Some(obj);
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = &row[rhs] / &row[j];
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave?;
        pivot(t, basis, r, j);
    }
}

/// Optimal value of the restricted master, from its public data only.
pub fn rmp_oracle(model: &RmpModel<f64>) -> f64 {
    let cells = model.num_cells();
    let rows = model.num_rows();
    let mut a: Vec<Vec<BigRational>> = vec![Vec::new(); rows];
    let mut c = Vec::new();
    let mut push = |entries: &[(usize, i64)], cost: BigRational, a: &mut Vec<Vec<BigRational>>| {
        for (r, row) in a.iter_mut().enumerate() {
            row.push(q(entries.iter().find(|e| e.0 == r).map_or(0, |e| e.1)));
        }
        c.push(cost);
    };
    for cell in 0..cells {
        let cost = BigRational::from_float(model.under_cost()[cell]).unwrap();
        push(&[(cell, 1)], cost, &mut a);
    }
    for cell in 0..cells {
        push(&[(cell, -1)], q(0), &mut a);
    }
    for col in model.columns() {
        let mut entries: Vec<(usize, i64)> = Vec::new();
        for &cell in &col.cells {
            match entries.iter_mut().find(|e| e.0 == cell) {
                Some(e) => e.1 += 1,
                None => entries.push((cell, 1)),
            }
        }
        entries.push((cells + col.nurse, 1));
        push(&entries, q(col.cost), &mut a);
    }
    let mut b: Vec<BigRational> = model.rhs().iter().map(|&x| BigRational::from_float(x).unwrap()).collect();
    b.extend(std::iter::repeat(q(1)).take(model.num_nurses()));
    tableau_minimize(&a, &b, &c)
        .expect("restricted master with a column per nurse is feasible and bounded")
        .to_f64()
        .unwrap()
}

/// Penalty of the runs of `true` in `bits` under `spec`, computed from the
/// run lengths. With `close_at_end` false a run still open at the end is
/// not charged for being short.
pub fn stint_penalty(bits: &[bool], spec: &SeriesSpec, close_at_end: bool) -> Penalty {
    let mut total = 0;
    let mut i = 0;
    while i < bits.len() {
        if !bits[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < bits.len() && bits[i] {
            i += 1;
        }
        let len = (i - start) as u32;
        let open = i == bits.len();
        if len < spec.d_min && (close_at_end || !open) {
            total += (spec.d_min - len) as Penalty * spec.c_min;
        }
        if len > spec.d_max {
            total += (len - spec.d_max) as Penalty * spec.c_max;
        }
    }
    total
}

fn weight(rng: &mut impl Rng) -> Penalty {
    rng.gen_range(0..=4) * 5
}

/// Random instance with arbitrary (small) limits and weights, for oracle
/// comparisons.
pub fn tiny_instance(rng: &mut impl Rng, nurses: usize, days: usize, units: usize, shifts: usize) -> Instance {
    let mut forbidden = BTreeSet::new();
    for a in 0..shifts {
        for b in 0..shifts {
            if a > b && rng.gen_bool(0.5) {
                forbidden.insert((a, b));
            }
        }
    }
    let cover = (0..days * units * shifts)
        .map(|_| CoverCell {
            required: rng.gen_range(0..=2),
            under_penalty: rng.gen_range(1..=6) * 5,
        })
        .collect();
    let nurses = (0..nurses)
        .map(|i| {
            let mut c = NurseContract::relaxed(format!("n{i}"), days, units, shifts);
            let pref = rng.gen_range(0..units);
            c.required_units = (0..units).filter(|&u| u == pref || rng.gen_bool(0.5)).collect();
            c.preferred_units = [pref].into_iter().collect();
            let lo = rng.gen_range(0..=days as u32);
            let hi = rng.gen_range(lo..=days as u32);
            c.total_days = RangedCounterSpec::new(lo, hi, weight(rng), weight(rng));
            for u in 0..units {
                let lo = rng.gen_range(0..=days as u32 / 2);
                let hi = rng.gen_range(lo..=days as u32);
                c.unit_days[u] = RangedCounterSpec::new(lo, hi, weight(rng), weight(rng));
            }
            c.weekends = WeekendLimit {
                max: rng.gen_range(0..=1),
                penalty: weight(rng),
            };
            let d_min = rng.gen_range(1..=3);
            c.consec_work = SeriesSpec::new(d_min, rng.gen_range(d_min..=5), weight(rng), weight(rng));
            let d_min = rng.gen_range(1..=2);
            c.consec_rest = SeriesSpec::new(d_min, rng.gen_range(d_min..=4), weight(rng), weight(rng));
            for d in 0..days {
                if rng.gen_bool(0.2) {
                    c.day_requests[d] = RequestPenalty {
                        on: weight(rng),
                        off: 0,
                    };
                } else if rng.gen_bool(0.2) {
                    c.day_requests[d] = RequestPenalty {
                        on: 0,
                        off: weight(rng),
                    };
                }
                for s in 0..shifts {
                    if rng.gen_bool(0.15) {
                        c.shift_requests[d][s].off = weight(rng);
                    }
                }
                for u in 0..units {
                    if u != pref && c.required_units.contains(&u) {
                        c.non_preferred[d][u] = 5;
                    }
                }
            }
            c
        })
        .collect();
    let inst = Instance {
        num_days: days,
        units: (0..units).map(|u| UnitSpec { name: format!("U{u}") }).collect(),
        shifts: (0..shifts).map(|s| ShiftSpec { name: format!("S{s}") }).collect(),
        forbidden,
        cover,
        nurses,
    };
    inst.validate().expect("tiny instance is valid");
    inst
}
