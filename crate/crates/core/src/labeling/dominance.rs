use super::{penalty_diff_bounds, weekend_diff_bounds, Label, PricingContext, Variant};
use crate::instance::Penalty;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    FirstDominates,
    SecondDominates,
    Incomparable,
}

/// Sums of the per-resource penalty-difference bounds of a label pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PdSums {
    pub min: Penalty,
    pub max: Penalty,
    /// `max` with every per-resource term clamped at zero.
    pub max_clamped: Penalty,
}

impl<'a> PricingContext<'a> {
    /// Bounds on the future penalty difference `l1 - l2` for labels at a
    /// node of `day`; `None` when the labels cannot be compared.
    pub fn pd_sums<T: Scalar>(&self, l1: &Label<T>, l2: &Label<T>, day: usize) -> Option<PdSums> {
        if l1.worked_this_weekend != l2.worked_this_weekend {
            return None;
        }
        if !self.exact_dfa_bounds && (l1.work_state != l2.work_state || l1.rest_state != l2.rest_state) {
            return None;
        }
        let c = self.contract;
        let m = self.remaining_days(day);
        let mut sums = PdSums {
            min: 0,
            max: 0,
            max_clamped: 0,
        };
        let mut add = |(lo, hi): (Penalty, Penalty)| {
            sums.min += lo;
            sums.max += hi;
            sums.max_clamped += hi.max(0);
        };
        add(penalty_diff_bounds(&c.total_days, l1.work_days as u32, l2.work_days as u32, m as u32));
        for (u, spec) in c.unit_days.iter().enumerate() {
            add(penalty_diff_bounds(spec, l1.unit_days[u] as u32, l2.unit_days[u] as u32, m as u32));
        }
        let mw = self.remaining_weekends(day, l1.worked_this_weekend);
        add(weekend_diff_bounds(
            c.weekends.max,
            c.weekends.penalty,
            l1.weekends as u32,
            l2.weekends as u32,
            mw as u32,
        ));
        add(self.work_bounds.get(l1.work_state, l2.work_state, m));
        add(self.rest_bounds.get(l1.rest_state, l2.rest_state, m));
        Some(sums)
    }

    /// `(Δmin, Δmax)`: bounds on the difference in completed cost between
    /// `l1` and `l2` over every common completion.
    pub fn delta_bounds<T: Scalar>(&self, l1: &Label<T>, l2: &Label<T>, day: usize) -> Option<(T, T)> {
        let pd = self.pd_sums(l1, l2, day)?;
        let dc = l1.cost - l2.cost;
        Some((dc + T::from_penalty(pd.min), dc + T::from_penalty(pd.max)))
    }

    pub fn dominates<T: Scalar>(&self, l1: &Label<T>, l2: &Label<T>, day: usize, variant: Variant) -> Verdict {
        let tie = || {
            if l1.id <= l2.id {
                Verdict::FirstDominates
            } else {
                Verdict::SecondDominates
            }
        };
        match variant {
            Variant::Dpb => {
                if !same_consumption(l1, l2) {
                    return Verdict::Incomparable;
                }
                let first = l1.cost <= l2.cost && l1.weekends <= l2.weekends;
                let second = l2.cost <= l1.cost && l2.weekends <= l1.weekends;
                match (first, second) {
                    (true, true) => tie(),
                    (true, false) => Verdict::FirstDominates,
                    (false, true) => Verdict::SecondDominates,
                    (false, false) => Verdict::Incomparable,
                }
            }
            Variant::Dpu => {
                if l1.cost > l2.cost {
                    return Verdict::Incomparable;
                }
                match self.pd_sums(l1, l2, day) {
                    Some(pd) if l1.cost - l2.cost + T::from_penalty(pd.max_clamped) <= T::zero() => {
                        Verdict::FirstDominates
                    }
                    _ => Verdict::Incomparable,
                }
            }
            Variant::Dpp | Variant::Dppi => {
                let Some((lo, hi)) = self.delta_bounds(l1, l2, day) else {
                    return Verdict::Incomparable;
                };
                match (hi <= T::zero(), lo >= T::zero()) {
                    (true, true) => tie(),
                    (true, false) => Verdict::FirstDominates,
                    (false, true) => Verdict::SecondDominates,
                    (false, false) => Verdict::Incomparable,
                }
            }
        }
    }
}

impl<'a> PricingContext<'a> {
    /// Number of values [`PricingContext::pen_key`] writes per label.
    pub fn key_len(&self) -> usize {
        2 * (self.skilled_units.len() + 2)
    }

    /// For every counter, its penalty now and after the maximal number of
    /// further increments. `pd` bounds of a pair are then the two
    /// differences of these values.
    pub fn pen_key<T>(&self, l: &Label<T>, day: usize, out: &mut Vec<Penalty>) {
        let c = self.contract;
        let m = self.remaining_days(day) as u32;
        let x = l.work_days as u32;
        out.push(c.total_days.penalty(x));
        out.push(c.total_days.penalty(x + m));
        for &u in &self.skilled_units {
            let x = l.unit_days[u] as u32;
            out.push(c.unit_days[u].penalty(x));
            out.push(c.unit_days[u].penalty(x + m));
        }
        let mw = self.remaining_weekends(day, l.worked_this_weekend) as u32;
        let x = l.weekends as u32;
        out.push(c.weekends.penalty_for(x));
        out.push(c.weekends.penalty_for(x + mw));
    }

    /// Same verdict as [`PricingContext::dominates`] for DPU, DPP and DPPI,
    /// from precomputed [`PricingContext::pen_key`] rows.
    pub fn dominates_keyed<T: Scalar>(
        &self,
        l1: &Label<T>,
        k1: &[Penalty],
        l2: &Label<T>,
        k2: &[Penalty],
        day: usize,
        variant: Variant,
    ) -> Verdict {
        debug_assert!(variant != Variant::Dpb);
        if l1.worked_this_weekend != l2.worked_this_weekend {
            return Verdict::Incomparable;
        }
        let dpu = variant == Variant::Dpu;
        if dpu && l1.cost > l2.cost {
            return Verdict::Incomparable;
        }
        let same_states = l1.work_state == l2.work_state && l1.rest_state == l2.rest_state;
        if !self.exact_dfa_bounds && !same_states {
            return Verdict::Incomparable;
        }
        let (mut lo, mut hi, mut hi_clamped) = (0, 0, 0);
        for (a, b) in k1.chunks_exact(2).zip(k2.chunks_exact(2)) {
            let d0 = a[0] - b[0];
            let dm = a[1] - b[1];
            let (x, y) = if d0 <= dm { (d0, dm) } else { (dm, d0) };
            lo += x;
            hi += y;
            hi_clamped += y.max(0);
        }
        if !same_states {
            let m = self.remaining_days(day);
            for (x, y) in [
                self.work_bounds.get(l1.work_state, l2.work_state, m),
                self.rest_bounds.get(l1.rest_state, l2.rest_state, m),
            ] {
                lo += x;
                hi += y;
                hi_clamped += y.max(0);
            }
        }
        let dc = l1.cost - l2.cost;
        if dpu {
            return if dc + T::from_penalty(hi_clamped) <= T::zero() {
                Verdict::FirstDominates
            } else {
                Verdict::Incomparable
            };
        }
        match (dc + T::from_penalty(hi) <= T::zero(), dc + T::from_penalty(lo) >= T::zero()) {
            (true, true) => {
                if l1.id <= l2.id {
                    Verdict::FirstDominates
                } else {
                    Verdict::SecondDominates
                }
            }
            (true, false) => Verdict::FirstDominates,
            (false, true) => Verdict::SecondDominates,
            (false, false) => Verdict::Incomparable,
        }
    }
}

/// Equal day counters, automaton states and weekend bit.
pub(super) fn same_consumption<T>(l1: &Label<T>, l2: &Label<T>) -> bool {
    l1.work_days == l2.work_days
        && l1.unit_days == l2.unit_days
        && l1.work_state == l2.work_state
        && l1.rest_state == l2.rest_state
        && l1.worked_this_weekend == l2.worked_this_weekend
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, Instance, NurseContract, RangedCounterSpec};
    use crate::labeling::PricingConfig;

    fn ctx_instance() -> Instance {
        let mut inst = generate_instance(1, 4, 1, 0);
        let mut c = NurseContract::relaxed("n", 28, 1, 3);
        c.total_days = RangedCounterSpec::new(3, 6, 10, 10);
        inst.nurses[0] = c;
        inst
    }

    fn label(ctx: &PricingContext, cost: i64, work_days: u16, id: u32) -> Label<i64> {
        let mut l = ctx.initial_label::<i64>();
        l.cost = cost;
        l.work_days = work_days;
        l.unit_days[0] = work_days;
        l.id = id;
        l
    }

    #[test]
    fn identical_labels_resolved_by_creation_order() {
        let inst = ctx_instance();
        let ctx = PricingContext::new(&inst, 0, &PricingConfig::default());
        let a = label(&ctx, 3, 2, 1);
        let b = label(&ctx, 3, 2, 2);
        for v in Variant::ALL {
            assert_eq!(ctx.dominates(&a, &b, 4, v), Verdict::FirstDominates, "{v}");
        }
        assert_eq!(ctx.dominates(&b, &a, 4, Variant::Dpp), Verdict::SecondDominates);
    }

    #[test]
    fn cheaper_equal_label_wins_except_reversed_dpu() {
        let inst = ctx_instance();
        let ctx = PricingContext::new(&inst, 0, &PricingConfig::default());
        let l1 = label(&ctx, 5, 2, 1);
        let l2 = label(&ctx, 0, 2, 2);
        assert_eq!(ctx.dominates(&l1, &l2, 4, Variant::Dpp), Verdict::SecondDominates);
        assert_eq!(ctx.dominates(&l1, &l2, 4, Variant::Dpu), Verdict::Incomparable);
        assert_eq!(ctx.dominates(&l2, &l1, 4, Variant::Dpu), Verdict::FirstDominates);
    }

    #[test]
    fn large_cost_gap_outweighs_counter_bound() {
        let inst = ctx_instance();
        let ctx = PricingContext::new(&inst, 0, &PricingConfig::default());
        let l1 = label(&ctx, 0, 4, 1);
        let l2 = label(&ctx, 100, 5, 2);
        let (_, hi) = ctx.delta_bounds(&l1, &l2, 10).unwrap();
        assert_eq!(hi, -100);
        assert_eq!(ctx.dominates(&l1, &l2, 10, Variant::Dpp), Verdict::FirstDominates);
        assert_eq!(ctx.dominates(&l1, &l2, 10, Variant::Dpu), Verdict::FirstDominates);
        assert_eq!(ctx.dominates(&l1, &l2, 10, Variant::Dpb), Verdict::Incomparable);
    }

    #[test]
    fn swapping_labels_negates_bounds() {
        let inst = ctx_instance();
        let ctx = PricingContext::new(&inst, 0, &PricingConfig::default());
        let l1 = label(&ctx, 7, 1, 1);
        let l2 = label(&ctx, 2, 5, 2);
        let (lo, hi) = ctx.delta_bounds(&l1, &l2, 6).unwrap();
        let (lo2, hi2) = ctx.delta_bounds(&l2, &l1, 6).unwrap();
        assert_eq!((lo, hi), (-hi2, -lo2));
    }

    #[test]
    fn keyed_verdicts_match_reference() {
        use rand::{Rng, SeedableRng};
        let inst = generate_instance(4, 4, 3, 11);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for nurse in 0..4 {
            for exact in [true, false] {
                let cfg = PricingConfig {
                    exact_dfa_bounds: exact,
                    ..Default::default()
                };
                let ctx = PricingContext::new(&inst, nurse, &cfg);
                for _ in 0..2000 {
                    let day = rng.gen_range(0..28);
                    let mk = |rng: &mut rand_chacha::ChaCha8Rng, id| {
                        let mut l = ctx.initial_label::<i64>();
                        l.cost = rng.gen_range(-40..40);
                        for &u in &ctx.contract.required_units {
                            l.unit_days[u] = rng.gen_range(0..=day as u16 / 2);
                        }
                        l.work_days = l.unit_days.iter().sum();
                        l.weekends = rng.gen_range(0..=(day as u16 / 7 + 1));
                        l.worked_this_weekend = day % 7 >= 5 && rng.gen_bool(0.5);
                        l.work_state = crate::dfa::DfaState(rng.gen_range(0..ctx.work_dfa.num_states() as u16));
                        l.rest_state = crate::dfa::DfaState(rng.gen_range(0..ctx.rest_dfa.num_states() as u16));
                        l.id = id;
                        l
                    };
                    let a = mk(&mut rng, 1);
                    let b = mk(&mut rng, 2);
                    let (mut ka, mut kb) = (Vec::new(), Vec::new());
                    ctx.pen_key(&a, day, &mut ka);
                    ctx.pen_key(&b, day, &mut kb);
                    for v in [Variant::Dpu, Variant::Dpp, Variant::Dppi] {
                        assert_eq!(
                            ctx.dominates_keyed(&a, &ka, &b, &kb, day, v),
                            ctx.dominates(&a, &b, day, v),
                            "{v} day {day}"
                        );
                    }
                }
            }
        }
    }
}
