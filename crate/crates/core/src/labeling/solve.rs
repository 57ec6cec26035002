use super::dominance::same_consumption;
use super::{Label, PricingConfig, PricingContext, Variant, Verdict};
use crate::dfa::DfaState;
use crate::graph::{NodeId, PricingGraph, SINK, SOURCE};
use crate::instance::{Assignment, Instance, Penalty, Schedule};
use crate::scalar::Scalar;
use smallvec::SmallVec;
use std::collections::HashMap;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PricingError {
    #[error("pricing exceeded its time limit after {elapsed:?}")]
    Timeout { elapsed: Duration, labels_extended: u64 },
    #[error("pricing created more than {limit} labels")]
    LabelLimit { limit: u64, labels_extended: u64 },
    #[error("pricing graph has no source-sink path")]
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedColumn<T> {
    pub schedule: Schedule,
    pub reduced_cost: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult<T> {
    /// Best first; never empty.
    pub columns: Vec<PricedColumn<T>>,
    pub labels_extended: u64,
    pub labels_dominated: u64,
    pub wall_time: Duration,
}

impl<T: Scalar> PricingResult<T> {
    pub fn best(&self) -> &PricedColumn<T> {
        &self.columns[0]
    }

    pub fn reduced_cost(&self) -> T {
        self.best().reduced_cost
    }
}

struct Run<'a, T> {
    ctx: PricingContext<'a>,
    graph: &'a PricingGraph<T>,
    variant: Variant,
    /// `(parent id, node)` per label id.
    trail: Vec<(u32, NodeId)>,
    deadline: Option<Instant>,
    label_limit: u64,
    start: Instant,
    extended: u64,
    dominated: u64,
}

impl<T: Scalar> Run<'_, T> {
    fn check_time(&self) -> Result<(), PricingError> {
        if self.trail.len() as u64 > self.label_limit {
            return Err(PricingError::LabelLimit {
                limit: self.label_limit,
                labels_extended: self.extended,
            });
        }
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(PricingError::Timeout {
                elapsed: self.start.elapsed(),
                labels_extended: self.extended,
            }),
            _ => Ok(()),
        }
    }

    fn push_extensions(&mut self, label: &Label<T>, buckets: &mut [Vec<Label<T>>], sink: &mut Vec<Label<T>>) {
        for arc in self.graph.arcs(label.node) {
            let id = self.trail.len() as u32;
            if arc.to == SINK {
                let mut done = label.clone();
                done.cost = self.ctx.finish(label);
                done.node = SINK;
                done.id = id;
                self.trail.push((label.id, SINK));
                sink.push(done);
            } else {
                let next = self.ctx.extend(label, arc.to, self.graph.kind(arc.to), arc.cost, id);
                self.trail.push((label.id, arc.to));
                buckets[arc.to as usize].push(next);
            }
        }
    }

    /// Sequential-insertion pairwise dominance over one group of labels.
    fn dmn(&mut self, labels: Vec<Label<T>>, day: usize) -> Result<Vec<Label<T>>, PricingError> {
        if self.variant == Variant::Dpb {
            return self.dmn_bucketed(labels, day);
        }
        let w = self.ctx.key_len();
        let mut keys = Vec::with_capacity(labels.len() * w);
        for l in &labels {
            self.ctx.pen_key(l, day, &mut keys);
        }
        let key = |i: usize| &keys[i * w..(i + 1) * w];
        let mut survivors: Vec<usize> = Vec::with_capacity(labels.len());
        let mut beaten = Vec::new();
        for i in 0..labels.len() {
            if i % 256 == 255 {
                self.check_time()?;
            }
            beaten.clear();
            let mut dropped = false;
            let cand = &labels[i];
            for (j, &s) in survivors.iter().enumerate() {
                match self.compare(&labels[s], key(s), cand, key(i), day) {
                    Verdict::FirstDominates => {
                        dropped = true;
                        break;
                    }
                    Verdict::SecondDominates => beaten.push(j),
                    Verdict::Incomparable => {}
                }
            }
            if dropped {
                self.dominated += 1;
                continue;
            }
            if !beaten.is_empty() {
                self.dominated += beaten.len() as u64;
                let mut k = 0;
                let mut idx = 0;
                survivors.retain(|_| {
                    let keep = beaten.get(k) != Some(&idx);
                    if !keep {
                        k += 1;
                    }
                    idx += 1;
                    keep
                });
            }
            survivors.push(i);
        }
        let mut slots: Vec<Option<Label<T>>> = labels.into_iter().map(Some).collect();
        Ok(survivors.into_iter().map(|i| slots[i].take().expect("survivor")).collect())
    }

    fn compare(&self, a: &Label<T>, ka: &[Penalty], b: &Label<T>, kb: &[Penalty], day: usize) -> Verdict {
        if self.variant == Variant::Dpu && b.cost < a.cost {
            return match self.ctx.dominates_keyed(b, kb, a, ka, day, Variant::Dpu) {
                Verdict::FirstDominates => Verdict::SecondDominates,
                _ => Verdict::Incomparable,
            };
        }
        self.ctx.dominates_keyed(a, ka, b, kb, day, self.variant)
    }

    /// DPB only compares labels with equal consumption, so labels are
    /// bucketed by that key first; the outcome equals the plain scan.
    fn dmn_bucketed(&mut self, labels: Vec<Label<T>>, day: usize) -> Result<Vec<Label<T>>, PricingError> {
        type Key = (u16, SmallVec<[u16; 4]>, DfaState, DfaState, bool);
        let mut groups: HashMap<Key, Vec<usize>> = HashMap::new();
        let mut slots: Vec<Option<Label<T>>> = Vec::with_capacity(labels.len());
        for (i, cand) in labels.into_iter().enumerate() {
            if i % 256 == 255 {
                self.check_time()?;
            }
            let key = (
                cand.work_days,
                cand.unit_days.clone(),
                cand.work_state,
                cand.rest_state,
                cand.worked_this_weekend,
            );
            let group = groups.entry(key).or_default();
            let mut dropped = false;
            let mut beaten = Vec::new();
            for (j, &slot) in group.iter().enumerate() {
                let s = slots[slot].as_ref().expect("live survivor");
                debug_assert!(same_consumption(s, &cand));
                match self.ctx.dominates(s, &cand, day, Variant::Dpb) {
                    Verdict::FirstDominates => {
                        dropped = true;
                        break;
                    }
                    Verdict::SecondDominates => beaten.push(j),
                    Verdict::Incomparable => {}
                }
            }
            if dropped {
                self.dominated += 1;
                continue;
            }
            for &j in beaten.iter().rev() {
                let slot = group.remove(j);
                slots[slot] = None;
                self.dominated += 1;
            }
            group.push(slots.len());
            slots.push(Some(cand));
        }
        Ok(slots.into_iter().flatten().collect())
    }

    fn schedule_of(&self, mut id: u32) -> Schedule {
        let mut days = vec![Assignment::Off; self.graph.num_days];
        loop {
            let (parent, node) = self.trail[id as usize];
            if node == SOURCE {
                break;
            }
            if let Some(a) = self.graph.kind(node).assignment() {
                let day = self.graph.kind(node).day().expect("day node");
                days[day] = a;
            }
            id = parent;
        }
        Schedule { days }
    }
}

/// Exact minimum reduced cost of the nurse's pricing problem on `graph`.
pub fn solve_pricing<T: Scalar>(
    instance: &Instance,
    graph: &PricingGraph<T>,
    nurse_dual: T,
    cfg: &PricingConfig,
) -> Result<PricingResult<T>, PricingError> {
    let start = Instant::now();
    let ctx = PricingContext::new(instance, graph.nurse, cfg);
    let source = ctx.initial_label::<T>();
    let mut run = Run {
        ctx,
        graph,
        variant: cfg.variant,
        trail: vec![(u32::MAX, SOURCE)],
        deadline: cfg.time_limit.map(|t| start + t),
        label_limit: cfg.label_limit.unwrap_or(u64::MAX),
        start,
        extended: 1,
        dominated: 0,
    };
    let mut buckets: Vec<Vec<Label<T>>> = vec![Vec::new(); graph.num_nodes()];
    let mut sink = Vec::new();
    run.push_extensions(&source, &mut buckets, &mut sink);

    for day in 0..graph.num_days {
        run.check_time()?;
        let layer = graph.layer(day);
        let groups: Vec<Vec<NodeId>> = if cfg.variant == Variant::Dppi {
            let mut by_shift: Vec<(Option<usize>, Vec<NodeId>)> = Vec::new();
            for &n in layer {
                let shift = graph.kind(n).shift();
                match by_shift.iter_mut().find(|(s, _)| *s == shift) {
                    Some((_, v)) => v.push(n),
                    None => by_shift.push((shift, vec![n])),
                }
            }
            by_shift.into_iter().map(|(_, v)| v).collect()
        } else {
            layer.iter().map(|&n| vec![n]).collect()
        };
        for group in groups {
            let mut labels = Vec::new();
            for &n in &group {
                labels.append(&mut buckets[n as usize]);
            }
            if labels.is_empty() {
                continue;
            }
            if group.len() > 1 {
                labels.sort_by_key(|l| l.id);
            }
            let survivors = run.dmn(labels, day)?;
            run.extended += survivors.len() as u64;
            for l in &survivors {
                run.push_extensions(l, &mut buckets, &mut sink);
            }
            run.check_time()?;
        }
    }

    if sink.is_empty() {
        return Err(PricingError::Infeasible);
    }
    sink.sort_by(|a, b| {
        a.cost
            .partial_cmp(&b.cost)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.id.cmp(&b.id))
    });
    let columns = sink
        .iter()
        .take(cfg.columns.max(1))
        .map(|l| PricedColumn {
            schedule: run.schedule_of(l.id),
            reduced_cost: l.cost - nurse_dual,
        })
        .collect();
    Ok(PricingResult {
        columns,
        labels_extended: run.extended,
        labels_dominated: run.dominated,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, DualValues};
    use crate::instance::{generate_instance, CoverCell, NurseContract, ShiftSpec, UnitSpec};
    use crate::oracle::{enumerate_schedules, reduced_cost, EvalOptions};

    #[test]
    fn single_negative_arc_is_taken() {
        let mut inst = Instance {
            num_days: 1,
            units: vec![UnitSpec { name: "A".into() }],
            shifts: vec![ShiftSpec { name: "D".into() }],
            forbidden: Default::default(),
            cover: vec![CoverCell::default()],
            nurses: vec![NurseContract::relaxed("n", 1, 1, 1)],
        };
        inst.nurses[0].consec_rest.d_max = 1;
        let mut duals = DualValues::<i64>::zeros(&inst);
        duals.cover[0] = 5;
        duals.nurse[0] = 2;
        let g = build_graph(&inst, 0, &duals, &Default::default()).unwrap();
        for v in Variant::ALL {
            let r = solve_pricing(&inst, &g, duals.nurse[0], &PricingConfig::with_variant(v)).unwrap();
            assert_eq!(r.reduced_cost(), -7);
            assert_eq!(r.best().schedule.days, vec![Assignment::Work { unit: 0, shift: 0 }]);
        }
    }

    #[test]
    fn variants_match_enumeration_on_one_week() {
        for seed in 0..6 {
            let inst = generate_instance(3, 1, 1, seed);
            let mut duals = DualValues::<i64>::zeros(&inst);
            for (i, d) in duals.cover.iter_mut().enumerate() {
                *d = ((i as i64 * 7 + seed as i64) % 23) - 3;
            }
            let n = (seed % 3) as usize;
            let (want, _) =
                enumerate_schedules(&inst, n, &duals, &Default::default(), &EvalOptions::default()).unwrap();
            let g = build_graph(&inst, n, &duals, &Default::default()).unwrap();
            for v in Variant::ALL {
                let r = solve_pricing(&inst, &g, 0, &PricingConfig::with_variant(v)).unwrap();
                assert_eq!(r.reduced_cost(), want, "seed {seed} {v}");
                let rc = reduced_cost(&inst, n, &r.best().schedule, &duals, &EvalOptions::default());
                assert_eq!(rc, want);
            }
        }
    }

    #[test]
    fn top_k_columns_are_sorted_and_distinct() {
        let inst = generate_instance(2, 1, 1, 3);
        let duals = DualValues::<i64>::zeros(&inst);
        let g = build_graph(&inst, 0, &duals, &Default::default()).unwrap();
        let cfg = PricingConfig {
            columns: 3,
            variant: Variant::Dpb,
            ..Default::default()
        };
        let r = solve_pricing(&inst, &g, 0, &cfg).unwrap();
        assert_eq!(r.columns.len(), 3);
        assert!(r.columns.windows(2).all(|w| w[0].reduced_cost <= w[1].reduced_cost));
        assert_ne!(r.columns[0].schedule, r.columns[1].schedule);
    }

    #[test]
    fn zero_time_limit_times_out() {
        let inst = generate_instance(2, 2, 2, 3);
        let duals = DualValues::<i64>::zeros(&inst);
        let g = build_graph(&inst, 0, &duals, &Default::default()).unwrap();
        let cfg = PricingConfig {
            time_limit: Some(Duration::ZERO),
            ..Default::default()
        };
        assert!(matches!(solve_pricing(&inst, &g, 0, &cfg), Err(PricingError::Timeout { .. })));
    }
}
