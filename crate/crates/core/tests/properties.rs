mod common;

use common::*;
use fleetplan::mapf::{plan_cbs, plan_ecbs, HighwaySet, Objective, PlanError, SuboptimalityBound};
use fleetplan::post::{build_tpg, max_admissible_delta, schedule_at, Kinematics, PostConfig};
use fleetplan::tapf::plan_cbm;
use fleetplan::world::{detect_conflicts, Team};
use fleetplan::{MapfInstance, TapfInstance};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planners_are_deterministic(seed in any::<u64>()) {
        let inst = random_mapf(&mut rng(seed), 3, 12);
        prop_assert_eq!(plan_cbs(&inst, Objective::Makespan).ok(), plan_cbs(&inst, Objective::Makespan).ok());
        let w = SuboptimalityBound::new(1.5).unwrap();
        prop_assert_eq!(
            plan_ecbs(&inst, Objective::Makespan, w, None).ok(),
            plan_ecbs(&inst, Objective::Makespan, w, None).ok()
        );
        let tapf = random_tapf(&mut rng(seed), 3, 12);
        prop_assert_eq!(plan_cbm(&tapf).ok(), plan_cbm(&tapf).ok());
    }

    #[test]
    fn robot_order_does_not_change_cost(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_mapf(&mut r, 3, 12);
        let mut robots = inst.robots.clone();
        robots.shuffle(&mut r);
        let shuffled = MapfInstance::new(inst.graph.clone(), robots);
        let a = plan_cbs(&inst, Objective::Makespan).map(|p| p.makespan()).ok();
        let b = plan_cbs(&shuffled, Objective::Makespan).map(|p| p.makespan()).ok();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn team_members_are_exchangeable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_tapf(&mut r, 3, 12);
        let mut teams: Vec<Team> = inst
            .teams
            .iter()
            .map(|t| {
                let (mut s, mut g) = (t.starts.clone(), t.targets.clone());
                s.shuffle(&mut r);
                g.shuffle(&mut r);
                Team { starts: s, targets: g }
            })
            .collect();
        teams.shuffle(&mut r);
        let shuffled = TapfInstance { graph: inst.graph.clone(), teams };
        let a = plan_cbm(&inst).map(|p| p.makespan()).ok();
        let b = plan_cbm(&shuffled).map(|p| p.makespan()).ok();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn any_highways_keep_solvable_instances_solvable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_mapf(&mut r, 3, 12);
        let pairs: Vec<_> = inst
            .graph
            .edges()
            .iter()
            .filter_map(|e| match r.gen_range(0..4) {
                0 => Some((e.u, e.v)),
                1 => Some((e.v, e.u)),
                _ => None,
            })
            .collect();
        let hw = HighwaySet::new(&inst.graph, pairs).unwrap();
        let w = SuboptimalityBound::new(1.5).unwrap();
        match (joint_bfs_makespan(&inst), plan_ecbs(&inst, Objective::Makespan, w, Some(&hw))) {
            (Some(opt), Ok(plan)) => {
                prop_assert!(plan.makespan() as f64 <= 1.5 * opt as f64);
                prop_assert!(detect_conflicts(&plan, &inst.graph).unwrap().is_empty());
            }
            (None, Err(PlanError::Infeasible)) => {}
            (o, g) => prop_assert!(false, "oracle {:?} vs {:?}", o, g),
        }
    }

    #[test]
    fn dependency_graphs_are_acyclic(seed in any::<u64>(), delta in 0.0..0.5f64) {
        let inst = random_mapf(&mut rng(seed), 3, 12);
        let Ok(plan) = plan_cbs(&inst, Objective::Makespan) else { return Ok(()) };
        let tpg = build_tpg(&plan, &inst.graph).unwrap();
        prop_assert!(tpg.topological_order().is_some());
        let delta = delta.min(max_admissible_delta(&tpg, &inst.graph));
        let out = schedule_at(&tpg, delta, &Kinematics::uniform(plan.num_robots(), 1.0, None), &inst.graph, 0.1, None)
            .unwrap();
        prop_assert!(out.augmented.is_acyclic());
    }

    #[test]
    fn earliest_schedule_satisfies_its_network(seed in any::<u64>(), delta in 0.0..0.5f64, eps in 0.0..0.5f64) {
        let inst = random_tapf(&mut rng(seed), 3, 12);
        let Ok(plan) = plan_cbm(&inst) else { return Ok(()) };
        let config = PostConfig { delta, epsilon: eps, ..PostConfig::default() };
        let out = config.apply(&plan, &inst.graph).unwrap();
        prop_assert!(out.stn.check_times(out.schedule.event_times(), 1e-9).is_ok());
        for robot in out.schedule.robots() {
            prop_assert!(robot.windows(2).all(|w| w[0].time <= w[1].time + 1e-12));
        }
        // Unit edges at unit speed.
        let moves = plan.paths().iter().map(|p| p.windows(2).filter(|w| w[0] != w[1]).count()).max().unwrap_or(0);
        prop_assert!(out.schedule.makespan() >= moves as f64 - 1e-9);
    }

    #[test]
    fn makespan_grows_with_delta(seed in any::<u64>(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let inst = random_mapf(&mut rng(seed), 3, 12);
        let Ok(plan) = plan_cbs(&inst, Objective::Makespan) else { return Ok(()) };
        let tpg = build_tpg(&plan, &inst.graph).unwrap();
        let top = max_admissible_delta(&tpg, &inst.graph);
        let (lo, hi) = (a.min(b) * top, a.max(b) * top);
        let kin = Kinematics::uniform(plan.num_robots(), 1.0, None);
        let m = |d| schedule_at(&tpg, d, &kin, &inst.graph, 0.1, None).unwrap().schedule.makespan();
        prop_assert!(m(lo) <= m(hi) + 1e-9);
    }
}
