//! Per-nurse layered pricing graph.
//!
//! Layer `d` holds one `Off(d)` node and one `Work(d, u, s)` node per unit
//! the nurse is skilled for and per shift. All penalties that depend only on
//! the node entered (requests, non-preferred units, cover duals) sit on the
//! incoming arcs, so two nodes of the same day and shift have identical
//! outgoing arcs.

use crate::instance::{Assignment, Instance, Schedule};
use crate::scalar::Scalar;
use std::collections::BTreeSet;
use std::fmt::Write;
use thiserror::Error;

/// Dual values of the cover rows (flattened like `Instance::cover`) and of
/// the per-nurse convexity rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DualValues<T> {
    pub cover: Vec<T>,
    pub nurse: Vec<T>,
}

impl<T: Scalar> DualValues<T> {
    pub fn zeros(instance: &Instance) -> Self {
        DualValues {
            cover: vec![T::zero(); instance.num_cells()],
            nurse: vec![T::zero(); instance.num_nurses()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AssignmentKey {
    pub nurse: usize,
    pub day: usize,
    pub unit: usize,
    pub shift: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BranchError {
    #[error("{0:?} is both forced and forbidden")]
    Conflict(AssignmentKey),
    #[error("two assignments forced for nurse {nurse} on day {day}")]
    DoubleForce { nurse: usize, day: usize },
}

/// Assignments fixed to 1 (`forced`) or 0 (`forbidden`) by branching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BranchConstraintSet {
    forced: BTreeSet<AssignmentKey>,
    forbidden: BTreeSet<AssignmentKey>,
}

impl BranchConstraintSet {
    pub fn forced(&self) -> impl Iterator<Item = &AssignmentKey> {
        self.forced.iter()
    }

    pub fn forbidden(&self) -> impl Iterator<Item = &AssignmentKey> {
        self.forbidden.iter()
    }

    pub fn len(&self) -> usize {
        self.forced.len() + self.forbidden.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn force(&mut self, key: AssignmentKey) -> Result<(), BranchError> {
        if self.forbidden.contains(&key) {
            return Err(BranchError::Conflict(key));
        }
        match self.forced_on(key.nurse, key.day) {
            Some(k) if k != key => Err(BranchError::DoubleForce {
                nurse: key.nurse,
                day: key.day,
            }),
            _ => {
                self.forced.insert(key);
                Ok(())
            }
        }
    }

    pub fn forbid(&mut self, key: AssignmentKey) -> Result<(), BranchError> {
        if self.forced.contains(&key) {
            return Err(BranchError::Conflict(key));
        }
        self.forbidden.insert(key);
        Ok(())
    }

    /// Copy with `key` forced. Panics on a conflicting constraint.
    pub fn with_forced(&self, key: AssignmentKey) -> Self {
        let mut out = self.clone();
        out.force(key).expect("consistent branching");
        out
    }

    /// Copy with `key` forbidden. Panics on a conflicting constraint.
    pub fn with_forbidden(&self, key: AssignmentKey) -> Self {
        let mut out = self.clone();
        out.forbid(key).expect("consistent branching");
        out
    }

    pub fn forced_on(&self, nurse: usize, day: usize) -> Option<AssignmentKey> {
        let lo = AssignmentKey {
            nurse,
            day,
            unit: 0,
            shift: 0,
        };
        let hi = AssignmentKey {
            nurse,
            day,
            unit: usize::MAX,
            shift: usize::MAX,
        };
        self.forced.range(lo..=hi).next().copied()
    }

    pub fn is_forbidden(&self, nurse: usize, day: usize, unit: usize, shift: usize) -> bool {
        self.forbidden.contains(&AssignmentKey {
            nurse,
            day,
            unit,
            shift,
        })
    }

    /// Whether `schedule` respects every constraint on `nurse`.
    pub fn is_consistent(&self, nurse: usize, schedule: &Schedule) -> bool {
        let forced_ok = self
            .forced
            .iter()
            .filter(|k| k.nurse == nurse)
            .all(|k| schedule.days[k.day] == Assignment::Work { unit: k.unit, shift: k.shift });
        let forbidden_ok = self
            .forbidden
            .iter()
            .filter(|k| k.nurse == nurse)
            .all(|k| schedule.days[k.day] != Assignment::Work { unit: k.unit, shift: k.shift });
        forced_ok && forbidden_ok
    }
}

pub type NodeId = u32;

pub const SOURCE: NodeId = 0;
pub const SINK: NodeId = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Source,
    Sink,
    Off { day: usize },
    Work { day: usize, unit: usize, shift: usize },
}

impl NodeKind {
    pub fn day(&self) -> Option<usize> {
        match *self {
            NodeKind::Off { day } | NodeKind::Work { day, .. } => Some(day),
            _ => None,
        }
    }

    pub fn is_work(&self) -> bool {
        matches!(self, NodeKind::Work { .. })
    }

    pub fn unit(&self) -> Option<usize> {
        match *self {
            NodeKind::Work { unit, .. } => Some(unit),
            _ => None,
        }
    }

    pub fn shift(&self) -> Option<usize> {
        match *self {
            NodeKind::Work { shift, .. } => Some(shift),
            _ => None,
        }
    }

    pub fn assignment(&self) -> Option<Assignment> {
        match *self {
            NodeKind::Off { .. } => Some(Assignment::Off),
            NodeKind::Work { unit, shift, .. } => Some(Assignment::Work { unit, shift }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc<T> {
    pub to: NodeId,
    pub cost: T,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("no admissible assignment for nurse {nurse} on day {day}")]
    InfeasibleDay { nurse: usize, day: usize },
}

#[derive(Debug, Clone)]
pub struct PricingGraph<T> {
    pub nurse: usize,
    pub num_days: usize,
    nodes: Vec<NodeKind>,
    out: Vec<Vec<Arc<T>>>,
    layers: Vec<Vec<NodeId>>,
}

impl<T: Scalar> PricingGraph<T> {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn kind(&self, node: NodeId) -> NodeKind {
        self.nodes[node as usize]
    }

    pub fn arcs(&self, node: NodeId) -> &[Arc<T>] {
        &self.out[node as usize]
    }

    pub fn layer(&self, day: usize) -> &[NodeId] {
        &self.layers[day]
    }

    pub fn node_of(&self, day: usize, a: Assignment) -> Option<NodeId> {
        self.layers[day]
            .iter()
            .copied()
            .find(|&n| self.kind(n).assignment() == Some(a))
    }

    /// Sum of arc costs along the path encoding `schedule`, or `None` if the
    /// path does not exist in the graph.
    pub fn path_cost(&self, schedule: &Schedule) -> Option<T> {
        let mut at = SOURCE;
        let mut total = T::zero();
        for (d, &a) in schedule.days.iter().enumerate() {
            let next = self.node_of(d, a)?;
            total = total + self.arcs(at).iter().find(|arc| arc.to == next)?.cost;
            at = next;
        }
        let last = self.arcs(at).iter().find(|arc| arc.to == SINK)?;
        Some(total + last.cost)
    }

    /// Graphviz rendering for debugging.
    pub fn to_dot(&self, instance: &Instance) -> String {
        let mut out = format!("digraph pricing_{} {{\n  rankdir=LR;\n", self.nurse);
        for (i, kind) in self.nodes.iter().enumerate() {
            let label = match *kind {
                NodeKind::Source => "source".to_string(),
                NodeKind::Sink => "sink".to_string(),
                NodeKind::Off { day } => format!("d{day} off"),
                NodeKind::Work { day, unit, shift } => format!(
                    "d{day} {}/{}",
                    instance.units[unit].name, instance.shifts[shift].name
                ),
            };
            writeln!(out, "  n{i} [label=\"{label}\"];").unwrap();
        }
        for (from, arcs) in self.out.iter().enumerate() {
            for arc in arcs {
                writeln!(out, "  n{from} -> n{} [label=\"{}\"];", arc.to, arc.cost).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Pricing graph of `nurse` under `duals` and `branching`.
pub fn build_graph<T: Scalar>(
    instance: &Instance,
    nurse: usize,
    duals: &DualValues<T>,
    branching: &BranchConstraintSet,
) -> Result<PricingGraph<T>, GraphError> {
    let c = &instance.nurses[nurse];
    let mut nodes = vec![NodeKind::Source, NodeKind::Sink];
    let mut entry: Vec<T> = vec![T::zero(), T::zero()];
    let mut layers = Vec::with_capacity(instance.num_days);
    for day in 0..instance.num_days {
        let req = c.day_requests[day];
        let shift_reqs = &c.shift_requests[day];
        let all_on: i64 = shift_reqs.iter().map(|r| r.on).sum();
        let forced = branching.forced_on(nurse, day);
        let mut layer = Vec::new();
        if forced.is_none() {
            layer.push(nodes.len() as NodeId);
            nodes.push(NodeKind::Off { day });
            entry.push(T::from_penalty(req.on + all_on));
        }
        for unit in 0..instance.num_units() {
            if !c.can_work_in(unit) {
                continue;
            }
            for shift in 0..instance.num_shifts() {
                let allowed = match forced {
                    Some(k) => k.unit == unit && k.shift == shift,
                    None => !branching.is_forbidden(nurse, day, unit, shift),
                };
                if !allowed {
                    continue;
                }
                let np = if c.prefers(unit) { 0 } else { c.non_preferred[day][unit] };
                let penalty = req.off + all_on - shift_reqs[shift].on + shift_reqs[shift].off + np;
                layer.push(nodes.len() as NodeId);
                nodes.push(NodeKind::Work { day, unit, shift });
                entry.push(T::from_penalty(penalty) - duals.cover[instance.cell(day, unit, shift)]);
            }
        }
        if layer.is_empty() {
            return Err(GraphError::InfeasibleDay { nurse, day });
        }
        layers.push(layer);
    }

    let mut out: Vec<Vec<Arc<T>>> = vec![Vec::new(); nodes.len()];
    let arc = |to: NodeId| Arc {
        to,
        cost: entry[to as usize],
    };
    out[SOURCE as usize] = layers[0].iter().map(|&n| arc(n)).collect();
    for day in 0..instance.num_days {
        for &from in &layers[day] {
            let arcs = if day + 1 == instance.num_days {
                vec![Arc {
                    to: SINK,
                    cost: T::zero(),
                }]
            } else {
                let prev = nodes[from as usize].shift();
                layers[day + 1]
                    .iter()
                    .filter(|&&to| match (prev, nodes[to as usize].shift()) {
                        (Some(p), Some(s)) => !instance.is_forbidden(p, s),
                        _ => true,
                    })
                    .map(|&to| arc(to))
                    .collect()
            };
            out[from as usize] = arcs;
        }
    }
    Ok(PricingGraph {
        nurse,
        num_days: instance.num_days,
        nodes,
        out,
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, NurseContract, ShiftSpec, UnitSpec};

    fn relaxed_instance(days: usize, units: usize, shifts: usize) -> Instance {
        Instance {
            num_days: days,
            units: (0..units).map(|u| UnitSpec { name: format!("U{u}") }).collect(),
            shifts: (0..shifts).map(|s| ShiftSpec { name: format!("S{s}") }).collect(),
            forbidden: Default::default(),
            cover: vec![Default::default(); days * units * shifts],
            nurses: vec![NurseContract::relaxed("n", days, units, shifts)],
        }
    }

    #[test]
    fn relaxed_nurse_has_zero_arc_costs() {
        let inst = relaxed_instance(7, 2, 2);
        let g = build_graph(&inst, 0, &DualValues::<i64>::zeros(&inst), &Default::default()).unwrap();
        for n in 0..g.num_nodes() as NodeId {
            assert!(g.arcs(n).iter().all(|a| a.cost == 0));
        }
    }

    #[test]
    fn node_count_matches_layer_formula() {
        let inst = relaxed_instance(14, 2, 2);
        let g = build_graph(&inst, 0, &DualValues::<i64>::zeros(&inst), &Default::default()).unwrap();
        assert_eq!(g.num_nodes(), 14 * (2 * 2 + 1) + 2);
    }

    #[test]
    fn night_has_no_arc_to_early_or_late() {
        let mut inst = generate_instance(1, 1, 1, 0);
        inst.nurses[0].required_units = [0].into_iter().collect();
        let g = build_graph(&inst, 0, &DualValues::<i64>::zeros(&inst), &Default::default()).unwrap();
        let night = g.node_of(2, Assignment::Work { unit: 0, shift: 2 }).unwrap();
        let targets: Vec<_> = g.arcs(night).iter().map(|a| g.kind(a.to)).collect();
        assert_eq!(
            targets,
            vec![
                NodeKind::Off { day: 3 },
                NodeKind::Work {
                    day: 3,
                    unit: 0,
                    shift: 2
                }
            ]
        );
    }

    #[test]
    fn forced_assignment_empties_the_rest_of_the_day() {
        let inst = relaxed_instance(7, 2, 2);
        let key = AssignmentKey {
            nurse: 0,
            day: 3,
            unit: 1,
            shift: 0,
        };
        let b = BranchConstraintSet::default().with_forced(key);
        let g = build_graph(&inst, 0, &DualValues::<i64>::zeros(&inst), &b).unwrap();
        assert_eq!(g.layer(3).len(), 1);
        assert_eq!(g.layer(2).len(), 5);
    }

    #[test]
    fn forbidding_everything_is_infeasible() {
        let inst = relaxed_instance(7, 1, 1);
        let mut b = BranchConstraintSet::default();
        b.force(AssignmentKey {
            nurse: 0,
            day: 1,
            unit: 0,
            shift: 0,
        })
        .unwrap();
        assert!(b
            .forbid(AssignmentKey {
                nurse: 0,
                day: 1,
                unit: 0,
                shift: 0
            })
            .is_err());
        let mut inst2 = inst.clone();
        inst2.nurses[0].required_units.clear();
        inst2.nurses[0].preferred_units.clear();
        let b2 = BranchConstraintSet::default().with_forced(AssignmentKey {
            nurse: 0,
            day: 1,
            unit: 0,
            shift: 0,
        });
        assert_eq!(
            build_graph(&inst2, 0, &DualValues::<i64>::zeros(&inst2), &b2).unwrap_err(),
            GraphError::InfeasibleDay { nurse: 0, day: 1 }
        );
    }

    #[test]
    fn duals_lower_work_entry_cost() {
        let inst = relaxed_instance(7, 1, 1);
        let mut duals = DualValues::<f64>::zeros(&inst);
        duals.cover[inst.cell(0, 0, 0)] = 5.0;
        let g = build_graph(&inst, 0, &duals, &Default::default()).unwrap();
        let work = g.node_of(0, Assignment::Work { unit: 0, shift: 0 }).unwrap();
        let arc = g.arcs(SOURCE).iter().find(|a| a.to == work).unwrap();
        assert_eq!(arc.cost, -5.0);
        assert!(g.to_dot(&inst).contains("d0 U0/S0"));
    }
}
