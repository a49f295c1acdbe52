use proptest::prelude::*;
use roboground_core::metrics::{completeness, match_actions, success, MatchConfig, MatchMode};
use roboground_core::sim::{Pose, Trajectory, Transition, TransitionKind};

fn traj(ts: Vec<Transition<f64>>) -> Trajectory<f64> {
    let mut t = Trajectory::empty("uav", Pose::origin());
    t.transitions = ts;
    t.final_pose = t.replay();
    t
}

fn action() -> impl Strategy<Value = Transition<f64>> {
    prop_oneof![
        (-3i32..=3, -3i32..=3, -3i32..=3).prop_map(|(a, b, c)| Transition::translate(a as f64, b as f64, c as f64)),
        (-5i32..=6).prop_map(|k| Transition::rotate(k as f64 * 30.0)),
        Just(Transition::marker(TransitionKind::Takeoff)),
    ]
}

proptest! {
    #[test]
    fn sr_iff_every_match(v in proptest::collection::vec(any::<bool>(), 1..32)) {
        let c = completeness(&v).unwrap();
        prop_assert_eq!(success(c) == 1, v.iter().all(|b| *b));
    }

    #[test]
    fn loosening_never_lowers_completeness(
        pred in proptest::collection::vec(action(), 0..6),
        gt in proptest::collection::vec(action(), 1..6),
        tight in 0.01f64..2.0,
        extra in 0.0f64..3.0,
    ) {
        prop_assume!(gt.iter().any(|t| t.kind != TransitionKind::Takeoff));
        let (p, g) = (traj(pred), traj(gt));
        let a = MatchConfig::with_tolerances(tight, tight * 10.0);
        let b = MatchConfig::with_tolerances(tight + extra, (tight + extra) * 10.0);
        let ca = completeness(&match_actions(&p, &g, &a).unwrap()).unwrap();
        let cb = completeness(&match_actions(&p, &g, &b).unwrap()).unwrap();
        prop_assert!(cb >= ca);
    }

    #[test]
    fn prefix_never_exceeds_per_index(
        pred in proptest::collection::vec(action(), 0..6),
        gt in proptest::collection::vec(action(), 1..6),
    ) {
        let (p, g) = (traj(pred), traj(gt));
        let per = match_actions(&p, &g, &MatchConfig::default()).unwrap();
        let pre = match_actions(&p, &g, &MatchConfig { mode: MatchMode::Prefix, ..MatchConfig::default() }).unwrap();
        for (a, b) in pre.iter().zip(&per) {
            prop_assert!(!*a || *b);
        }
    }
}

#[test]
fn reordering_distinct_actions_changes_matches() {
    let a = Transition::translate(5.0, 0.0, 0.0);
    let b = Transition::translate(0.0, 5.0, 0.0);
    let m = match_actions(&traj(vec![b, a]), &traj(vec![a, b]), &MatchConfig::default()).unwrap();
    assert_eq!(m, vec![false, false]);
}

#[test]
fn examples_from_the_metric_definition() {
    let gt = traj(vec![Transition::translate(0.0, 0.0, -5.0), Transition::translate(0.0, 0.0, 4.0)]);
    let pred = traj(vec![Transition::translate(0.0, 0.0, -5.0), Transition::translate(0.0, 0.0, 5.0)]);
    assert_eq!(match_actions(&pred, &gt, &MatchConfig::default()).unwrap(), vec![true, false]);

    let four: Vec<_> = (1..=4).map(|i| Transition::translate(i as f64, 0.0, 0.0)).collect();
    let mut five = four.clone();
    five.push(Transition::rotate(90.0));
    let m = match_actions(&traj(five), &traj(four), &MatchConfig::default()).unwrap();
    assert_eq!(m, vec![true; 4]);
    assert_eq!(completeness(&m).unwrap(), 1.0);
}

#[test]
fn rotations_coalesce_when_enabled() {
    let gt = traj(vec![Transition::rotate(90.0)]);
    let pred = traj(vec![Transition::rotate(60.0), Transition::rotate(30.0)]);
    let cfg = MatchConfig { coalesce_rotations: true, ..MatchConfig::default() };
    assert_eq!(match_actions(&pred, &gt, &cfg).unwrap(), vec![true]);
    assert_eq!(match_actions(&pred, &gt, &MatchConfig::default()).unwrap(), vec![false]);
}
