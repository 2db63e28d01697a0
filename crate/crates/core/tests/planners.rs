mod common;

use std::time::Instant;

use common::*;
use fleetplan::mapf::{
    plan_cbs, plan_ecbs, suggest_highways, Objective, PlanError, SuboptimalityBound,
};
use fleetplan::tapf::plan_cbm;
use fleetplan::world::detect_conflicts;

#[test]
fn cbs_matches_joint_bfs_makespan() {
    let t0 = Instant::now();
    for seed in 0..200 {
        let inst = random_mapf(&mut rng(seed), 3, 12);
        match (
            joint_bfs_makespan(&inst),
            plan_cbs(&inst, Objective::Makespan),
        ) {
            (Some(o), Ok(plan)) => {
                assert!(detect_conflicts(&plan, &inst.graph).unwrap().is_empty());
                plan.check_endpoints(&inst.starts(), &inst.targets())
                    .unwrap();
                assert_eq!(plan.makespan(), o, "seed {seed}");
            }
            (None, Err(PlanError::Infeasible)) => {}
            (o, g) => panic!("seed {seed}: oracle {o:?} vs {g:?}"),
        }
    }
    assert!(t0.elapsed().as_secs() < 60);
}

#[test]
fn cbs_matches_joint_search_flowtime() {
    for seed in 1000..1100 {
        let inst = random_mapf(&mut rng(seed), 3, 10);
        match (joint_flowtime(&inst), plan_cbs(&inst, Objective::Flowtime)) {
            (Some(o), Ok(plan)) => assert_eq!(plan.flowtime(), o, "seed {seed}"),
            (None, Err(PlanError::Infeasible)) => {}
            (o, g) => panic!("seed {seed}: oracle {o:?} vs {g:?}"),
        }
    }
}

#[test]
fn ecbs_within_bound_of_oracle() {
    for (i, w) in [1.0, 1.2, 1.5, 2.0].into_iter().enumerate() {
        let bound = SuboptimalityBound::new(w).unwrap();
        for seed in 0..60 {
            let seed = 2000 + 100 * i as u64 + seed;
            let inst = random_mapf(&mut rng(seed), 3, 12);
            let Ok(hw) = suggest_highways(&inst) else {
                continue;
            };
            for highways in [None, Some(&hw)] {
                match (
                    joint_bfs_makespan(&inst),
                    plan_ecbs(&inst, Objective::Makespan, bound, highways),
                ) {
                    (Some(o), Ok(plan)) => {
                        assert!(detect_conflicts(&plan, &inst.graph).unwrap().is_empty());
                        assert!(
                            plan.makespan() as f64 <= w * o as f64 + 1e-9,
                            "seed {seed} w {w}"
                        );
                        if w == 1.0 {
                            assert_eq!(plan.makespan(), o);
                        }
                    }
                    (None, Err(PlanError::Infeasible)) => {}
                    (o, g) => panic!("seed {seed}: oracle {o:?} vs {g:?}"),
                }
            }
        }
    }
}

#[test]
fn cbm_matches_assignment_enumeration() {
    let t0 = Instant::now();
    for seed in 3000..3200 {
        let inst = random_tapf(&mut rng(seed), 3, 12);
        match (assignment_oracle(&inst), plan_cbm(&inst)) {
            (Some(o), Ok(plan)) => {
                assert!(detect_conflicts(&plan, &inst.graph).unwrap().is_empty());
                assert_eq!(plan.makespan(), o, "seed {seed}");
                let teams = inst.robot_teams();
                for (t, team) in inst.teams.iter().enumerate() {
                    let mut ends: Vec<_> = (0..plan.num_robots())
                        .filter(|&r| teams[r] == t)
                        .map(|r| *plan.paths()[r].last().unwrap())
                        .collect();
                    let mut want = team.targets.clone();
                    ends.sort();
                    want.sort();
                    assert_eq!(ends, want, "seed {seed}");
                }
            }
            (None, Err(PlanError::Infeasible)) => {}
            (o, g) => panic!("seed {seed}: oracle {o:?} vs {g:?}"),
        }
    }
    assert!(t0.elapsed().as_secs() < 60);
}
