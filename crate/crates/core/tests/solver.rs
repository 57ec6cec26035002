mod common;

use common::tiny_instance;
use nurse_bnp::benchmark::suite_instance;
use nurse_bnp::bnp::{solve, BnpConfig, Mode};
use nurse_bnp::colgen::{run_column_generation, CgConfig};
use nurse_bnp::graph::BranchConstraintSet;
use nurse_bnp::instance::validate_roster;
use nurse_bnp::lp::RmpModel;
use nurse_bnp::oracle::{brute_force_roster, EvalOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn proved_roster_reproduces_its_upper_bound() {
    let inst = suite_instance(1);
    for mode in [Mode::Full, Mode::Single] {
        let out = solve(&inst, &BnpConfig { mode, ..Default::default() }).unwrap();
        assert!(out.proved);
        assert!(out.root_lower_bound <= out.upper_bound as f64 + 1e-6);
        let report = validate_roster(&inst, &out.best_roster, &EvalOptions::default()).unwrap();
        assert!(report.is_feasible());
        assert_eq!(report.objective, out.upper_bound);
    }
}

#[test]
fn single_mode_never_uses_other_units() {
    let inst = suite_instance(2);
    let out = solve(&inst, &BnpConfig { mode: Mode::Single, ..Default::default() }).unwrap();
    for (&n, s) in &out.best_roster.schedules {
        for a in &s.days {
            if let Some(u) = a.unit() {
                assert!(inst.nurses[n].prefers(u));
            }
        }
    }
}

#[test]
fn root_bound_never_exceeds_integer_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let inst = tiny_instance(&mut rng, 2, 7, 1, 1);
        let (opt, _) = brute_force_roster(&inst, &EvalOptions::default()).unwrap();
        let mut model = RmpModel::<f64>::new(&inst);
        let (sol, _) = run_column_generation(&inst, &mut model, &BranchConstraintSet::default(), &CgConfig::default()).unwrap();
        assert!(sol.objective <= opt as f64 + 1e-6, "{} > {opt}", sol.objective);
    }
}
