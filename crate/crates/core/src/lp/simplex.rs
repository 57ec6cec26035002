//! Revised primal simplex with an explicit dense basis inverse.

use super::{Basis, LpError, RmpModel, RmpSolution};
use crate::graph::DualValues;
use crate::scalar::{snap, Real};

const REFACTOR_EVERY: usize = 100;

struct Simplex<'a, F> {
    model: &'a RmpModel<F>,
    m: usize,
    basis: Vec<usize>,
    /// Row position of each basic variable.
    position: Vec<Option<usize>>,
    /// Row-major `m x m`.
    binv: Vec<F>,
    xb: Vec<F>,
    pivots: usize,
    since_refactor: usize,
}

impl<'a, F: Real> Simplex<'a, F> {
    fn new(model: &'a RmpModel<F>, basis: Vec<usize>) -> Result<Self, LpError> {
        let m = model.num_rows();
        let mut position = vec![None; model.num_vars()];
        for (i, &j) in basis.iter().enumerate() {
            if j >= position.len() || position[j].is_some() {
                return Err(LpError::Singular);
            }
            position[j] = Some(i);
        }
        let mut s = Simplex {
            model,
            m,
            basis,
            position,
            binv: vec![F::zero(); m * m],
            xb: vec![F::zero(); m],
            pivots: 0,
            since_refactor: 0,
        };
        s.refactor()?;
        Ok(s)
    }

    /// Recomputes the inverse by Gauss-Jordan elimination with partial
    /// pivoting, then the basic values.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![F::zero(); m * m];
        for (col, &j) in self.basis.iter().enumerate() {
            self.model.for_each_entry(j, |row, v| a[row * m + col] = v);
        }
        let mut inv = vec![F::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = F::one();
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&r, &s| a[r * m + col].abs().partial_cmp(&a[s * m + col].abs()).unwrap())
                .expect("nonempty range");
            if a[piv * m + col].abs() <= F::pivot_tol() {
                return Err(LpError::Singular);
            }
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] = a[col * m + k] / d;
                inv[col * m + k] = inv[col * m + k] / d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == F::zero() {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] = a[r * m + k] - f * a[col * m + k];
                    inv[r * m + k] = inv[r * m + k] - f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        let rhs = self.rhs();
        for i in 0..m {
            let mut v = F::zero();
            for (k, &b) in rhs.iter().enumerate() {
                v = v + self.binv[i * m + k] * b;
            }
            self.xb[i] = if v.abs() < F::feas_tol() { F::zero() } else { v };
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn rhs(&self) -> Vec<F> {
        let mut b = self.model.rhs().to_vec();
        b.extend(std::iter::repeat(F::one()).take(self.model.num_nurses()));
        b
    }

    fn duals(&self) -> Vec<F> {
        let m = self.m;
        let mut y = vec![F::zero(); m];
        for (i, &j) in self.basis.iter().enumerate() {
            let c = self.model.var_cost(j);
            if c == F::zero() {
                continue;
            }
            for k in 0..m {
                y[k] = y[k] + c * self.binv[i * m + k];
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[F]) -> F {
        let mut d = self.model.var_cost(j);
        self.model.for_each_entry(j, |row, v| d = d - v * y[row]);
        d
    }

    fn direction(&self, j: usize) -> Vec<F> {
        let m = self.m;
        let mut w = vec![F::zero(); m];
        self.model.for_each_entry(j, |k, v| {
            for i in 0..m {
                w[i] = w[i] + self.binv[i * m + k] * v;
            }
        });
        w
    }

    fn pivot(&mut self, r: usize, entering: usize, w: &[F]) {
        let m = self.m;
        let theta = self.xb[r] / w[r];
        let wr = w[r];
        for k in 0..m {
            self.binv[r * m + k] = self.binv[r * m + k] / wr;
        }
        for i in 0..m {
            if i == r || w[i] == F::zero() {
                continue;
            }
            let f = w[i];
            for k in 0..m {
                self.binv[i * m + k] = self.binv[i * m + k] - f * self.binv[r * m + k];
            }
            let v = self.xb[i] - f * theta;
            self.xb[i] = if v.abs() < F::feas_tol() { F::zero() } else { v };
        }
        self.xb[r] = theta;
        self.position[self.basis[r]] = None;
        self.position[entering] = Some(r);
        self.basis[r] = entering;
        self.pivots += 1;
        self.since_refactor += 1;
    }

    fn run(&mut self) -> Result<(), LpError> {
        let n = self.model.num_vars();
        let limit = 50 * (self.m + n) + 1000;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.pivots > limit {
                return Err(LpError::IterationLimit(limit));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.duals();
            let mut entering = None;
            let mut best = -F::opt_tol();
            for j in 0..n {
                if self.position[j].is_some() {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Ok(());
            };
            let w = self.direction(q);
            let mut leave: Option<(usize, F)> = None;
            for i in 0..self.m {
                if w[i] <= F::pivot_tol() {
                    continue;
                }
                let ratio = self.xb[i] / w[i];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= F::feas_tol();
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                w[i] > w[r]
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, theta)) = leave else {
                return Err(LpError::Unbounded);
            };
            if theta <= F::feas_tol() {
                degenerate_run += 1;
                if degenerate_run >= 3 * self.m {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(r, q, &w);
        }
    }
}

/// Slack or surplus for every cover row plus the first column of every
/// nurse; primal feasible by construction.
fn initial_basis<F: Real>(model: &RmpModel<F>) -> Result<Vec<usize>, LpError> {
    let c = model.num_cells();
    let mut first = vec![None; model.num_nurses()];
    for (j, col) in model.columns().iter().enumerate() {
        first[col.nurse].get_or_insert(j);
    }
    let mut coverage = vec![F::zero(); c];
    let mut nurse_vars = Vec::with_capacity(model.num_nurses());
    for (n, j) in first.iter().enumerate() {
        let j = j.ok_or(LpError::MissingColumn(n))?;
        for &cell in &model.columns()[j].cells {
            coverage[cell] = coverage[cell] + F::one();
        }
        nurse_vars.push(2 * c + j);
    }
    let mut basis: Vec<usize> = (0..c)
        .map(|i| if coverage[i] < model.rhs()[i] { i } else { c + i })
        .collect();
    basis.extend(nurse_vars);
    Ok(basis)
}

/// Optimal basic solution of the restricted master, warm-started from
/// `warm` when it is a valid basis of `model`.
pub fn solve_rmp<F: Real>(model: &RmpModel<F>, warm: Option<&Basis>) -> Result<RmpSolution<F>, LpError> {
    let warm_simplex = warm
        .filter(|b| b.vars.len() == model.num_rows())
        .and_then(|b| Simplex::new(model, b.vars.clone()).ok())
        .filter(|s| s.xb.iter().all(|&v| v >= -F::feas_tol()));
    let mut s = match warm_simplex {
        Some(s) => s,
        None => Simplex::new(model, initial_basis(model)?)?,
    };
    s.run()?;
    s.refactor()?;
    let y = s.duals();
    let c = model.num_cells();
    let mut x = vec![F::zero(); model.columns().len()];
    let mut under = vec![F::zero(); c];
    let mut objective = F::zero();
    for (i, &j) in s.basis.iter().enumerate() {
        let v = s.xb[i].max(F::zero());
        objective = objective + model.var_cost(j) * v;
        if j < c {
            under[j] = v;
        } else if j >= 2 * c {
            x[j - 2 * c] = v;
        }
    }
    Ok(RmpSolution {
        objective: snap(objective),
        x,
        under,
        duals: DualValues {
            cover: y[..c].to_vec(),
            nurse: y[c..].to_vec(),
        },
        basis: Basis { vars: s.basis },
        pivots: s.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, CoverCell, Instance, NurseContract, Schedule, ShiftSpec, UnitSpec};
    use crate::lp::ScheduleColumn;

    fn one_cell(required: u32) -> Instance {
        Instance {
            num_days: 1,
            units: vec![UnitSpec { name: "A".into() }],
            shifts: vec![ShiftSpec { name: "D".into() }],
            forbidden: Default::default(),
            cover: vec![CoverCell {
                required,
                under_penalty: 30,
            }],
            nurses: vec![NurseContract::relaxed("n", 1, 1, 1)],
        }
    }

    #[test]
    fn zero_cover_zero_cost() {
        let inst = one_cell(0);
        let mut m = RmpModel::<f64>::new(&inst);
        m.add_column(ScheduleColumn::new(&inst, 0, Schedule::all_off(1), 0));
        let sol = solve_rmp(&m, None).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.x, vec![1.0]);
        assert_eq!(sol.duals.cover, vec![0.0]);
        assert_eq!(sol.duals.nurse, vec![0.0]);
    }

    #[test]
    fn uncovered_demand_uses_slack() {
        let inst = one_cell(2);
        let mut m = RmpModel::<f64>::new(&inst);
        m.add_column(ScheduleColumn::new(&inst, 0, Schedule::all_off(1), 0));
        let sol = solve_rmp(&m, None).unwrap();
        assert_eq!(sol.under, vec![2.0]);
        assert_eq!(sol.objective, 60.0);
        assert_eq!(sol.duals.cover, vec![30.0]);
    }

    #[test]
    fn working_column_lowers_objective() {
        let inst = one_cell(2);
        let mut m = RmpModel::<f64>::new(&inst);
        m.add_column(ScheduleColumn::new(&inst, 0, Schedule::all_off(1), 0));
        let first = solve_rmp(&m, None).unwrap();
        let mut s = Schedule::all_off(1);
        s.days[0] = crate::instance::Assignment::Work { unit: 0, shift: 0 };
        m.add_column(ScheduleColumn::new(&inst, 0, s, 5));
        let second = solve_rmp(&m, Some(&first.basis)).unwrap();
        assert_eq!(second.objective, 35.0);
        assert_eq!(second.x, vec![0.0, 1.0]);
    }

    #[test]
    fn generated_model_is_dual_feasible() {
        let inst = generate_instance(4, 1, 2, 9);
        let mut m = RmpModel::<f64>::new(&inst);
        for n in 0..4 {
            m.add_column(ScheduleColumn::new(&inst, n, Schedule::all_off(7), 40));
        }
        let sol = solve_rmp(&m, None).unwrap();
        for j in 0..m.columns().len() {
            assert!(m.reduced_cost(j, &sol.duals) >= -1e-7);
        }
        assert!(sol.duals.cover.iter().all(|&y| y >= -1e-7));
    }

    #[test]
    fn f32_engine_agrees_on_small_model() {
        let inst = one_cell(2);
        let mut m = RmpModel::<f32>::new(&inst);
        m.add_column(ScheduleColumn::new(&inst, 0, Schedule::all_off(1), 0));
        assert_eq!(solve_rmp(&m, None).unwrap().objective, 60.0f32);
    }
}
