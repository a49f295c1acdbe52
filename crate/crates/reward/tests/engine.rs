use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use roboground_core::sim::ProfileRegistry;
use roboground_llm::{ChatRequest, ClientError, FnClient};
use roboground_reward::{guarded, Judge, MatchOverrides, RewardEngine, RewardError, RewardMode, RewardRequest};

const REFERENCE: &str = "\
aw.takeoff()
position = aw.get_drone_position()
aw.fly_to([position[0], position[1], position[2] - 5])
position = aw.get_drone_position()
aw.fly_to([position[0], position[1], position[2] + 4])
";

fn engine() -> RewardEngine {
    RewardEngine::new(Arc::new(ProfileRegistry::with_builtins()))
}

fn judged(reply: &'static str) -> (RewardEngine, Arc<AtomicUsize>) {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let client = FnClient::new("judge", move |_: &ChatRequest| {
        c.fetch_add(1, Ordering::SeqCst);
        Ok(reply.to_string())
    });
    (engine().with_judge(Judge::new(Arc::new(client))), calls)
}

#[test]
fn self_pair_scores_one() {
    let r = engine().evaluate(&RewardRequest::new(REFERENCE, REFERENCE)).unwrap();
    assert_eq!(r.reward, 1, "{}", r.reason);
    assert_eq!(r.mode, RewardMode::Deterministic);
    assert_eq!(r.candidate_trajectory.unwrap().transitions.len(), 3);
}

#[test]
fn renamed_variable_scores_one() {
    let renamed = REFERENCE.replace("position =", "base =").replace("position[", "base[");
    assert_eq!(engine().evaluate(&RewardRequest::new(renamed, REFERENCE)).unwrap().reward, 1);
}

#[test]
fn different_code_same_motion_scores_one() {
    let absolute = "aw.takeoff()\naw.fly_to([0, 0, -5])\naw.fly_to([0, 0, -1])\n";
    assert_eq!(engine().evaluate(&RewardRequest::new(absolute, REFERENCE)).unwrap().reward, 1);
}

#[test]
fn one_meter_off_scores_zero_both_ways() {
    let mutated = REFERENCE.replace("- 5", "- 4");
    let e = engine();
    let a = e.evaluate(&RewardRequest::new(mutated.clone(), REFERENCE)).unwrap();
    let b = e.evaluate(&RewardRequest::new(REFERENCE, mutated)).unwrap();
    assert_eq!((a.reward, b.reward), (0, 0));
    assert!(a.reason.contains("action 1"), "{}", a.reason);
}

#[test]
fn surplus_action_scores_zero() {
    let extra = format!("{REFERENCE}aw.set_yaw(90)\n");
    let r = engine().evaluate(&RewardRequest::new(extra, REFERENCE)).unwrap();
    assert_eq!(r.reward, 0);
    assert!(r.reason.contains("3 actions"), "{}", r.reason);
}

#[test]
fn candidate_errors_score_zero_with_reason() {
    let e = engine();
    let r = e.evaluate(&RewardRequest::new("aw.takeoff()\nx = 1/0\n", REFERENCE)).unwrap();
    assert_eq!(r.reward, 0);
    assert!(r.reason.contains("division by zero"), "{}", r.reason);
    let r = e.evaluate(&RewardRequest::new("import os\n", REFERENCE)).unwrap();
    assert!(r.reason.contains("line 1"), "{}", r.reason);
}

#[test]
fn code_wrapped_in_prose_is_extracted() {
    let reply = format!("Here is the program:\n```python\n{REFERENCE}```\nIt climbs then descends.");
    assert_eq!(engine().evaluate(&RewardRequest::new(reply, REFERENCE)).unwrap().reward, 1);
}

#[test]
fn broken_reference_is_a_server_error() {
    let err = engine().evaluate(&RewardRequest::new(REFERENCE, "aw.fly_to(3)\n")).unwrap_err();
    assert!(matches!(err, RewardError::Reference(_)));
    assert_eq!(err.status(), 500);
}

#[test]
fn request_validation() {
    let e = engine();
    let err = e.evaluate(&RewardRequest::new("  ", REFERENCE)).unwrap_err();
    assert_eq!((err.status(), err.to_string().starts_with("candidate_code")), (400, true));
    let mut req = RewardRequest::new(REFERENCE, REFERENCE);
    req.robot_profile = "submarine".into();
    assert_eq!(e.evaluate(&req).unwrap_err().status(), 422);
    let mut req = RewardRequest::new(REFERENCE, REFERENCE);
    req.match_config = Some(MatchOverrides { position_tolerance: Some(-1.0), ..Default::default() });
    assert_eq!(e.evaluate(&req).unwrap_err().status(), 400);
    let mut req = RewardRequest::new(REFERENCE, REFERENCE);
    req.mode = Some(RewardMode::Llm);
    assert_eq!(e.evaluate(&req).unwrap_err().status(), 400);
}

#[test]
fn tolerance_override_changes_the_verdict() {
    let mutated = REFERENCE.replace("- 5", "- 5.5");
    let mut req = RewardRequest::new(mutated, REFERENCE);
    assert_eq!(engine().evaluate(&req).unwrap().reward, 0);
    req.match_config = Some(MatchOverrides { position_tolerance: Some(0.6), ..Default::default() });
    assert_eq!(engine().evaluate(&req).unwrap().reward, 1);
}

#[test]
fn shaped_reward_is_opt_in() {
    let mutated = REFERENCE.replace("+ 4", "+ 3");
    let mut req = RewardRequest::new(mutated, REFERENCE);
    assert_eq!(engine().evaluate(&req).unwrap().shaped_reward, None);
    req.shaped = true;
    let r = engine().evaluate(&req).unwrap();
    assert_eq!((r.reward, r.shaped_reward), (0, Some(0.5)));
}

#[test]
fn ground_profile_requests() {
    let code = "aw.rotate(90)\naw.move_forward(2)\n";
    let mut req = RewardRequest::new(code, code);
    req.robot_profile = "ground".into();
    assert_eq!(engine().evaluate(&req).unwrap().reward, 1);
    let mut req = RewardRequest::new("aw.takeoff()\n", code);
    req.robot_profile = "ground".into();
    let r = engine().evaluate(&req).unwrap();
    assert_eq!(r.reward, 0);
    assert!(r.reason.contains("takeoff"), "{}", r.reason);
}

#[test]
fn llm_mode_reads_last_verdict_token() {
    let (e, calls) = judged("The code fully matches. 1");
    let mut req = RewardRequest::new("aw.takeoff()\n", REFERENCE);
    req.mode = Some(RewardMode::Llm);
    let r = e.evaluate(&req).unwrap();
    assert_eq!((r.reward, r.mode), (1, RewardMode::Llm));
    assert_eq!(calls.load(Ordering::SeqCst), 1);
}

#[test]
fn unparseable_judge_falls_back_to_zero_after_retries() {
    let (e, calls) = judged("I cannot decide.");
    let mut req = RewardRequest::new(REFERENCE, REFERENCE);
    req.mode = Some(RewardMode::Llm);
    let r = e.evaluate(&req).unwrap();
    assert_eq!((r.reward, r.reason.as_str()), (0, "judge_unparseable"));
    assert_eq!(calls.load(Ordering::SeqCst), 3);
}

#[test]
fn judge_transport_failure_is_surfaced() {
    let client = FnClient::new("down", |_: &ChatRequest| Err(ClientError::Transport("connection refused".into())));
    let e = engine().with_judge(Judge::new(Arc::new(client)));
    let mut req = RewardRequest::new(REFERENCE, REFERENCE);
    req.mode = Some(RewardMode::Llm);
    let err = e.evaluate(&req).unwrap_err();
    assert!(matches!(err, RewardError::Judge(_)));
    assert_eq!(err.status(), 503);
}

#[test]
fn hybrid_consults_judge_only_on_near_misses() {
    let (e, calls) = judged("1");
    let e = e.with_mode(RewardMode::Hybrid);
    // 0.15 m off: outside 0.1 m, inside 0.2 m.
    let near = REFERENCE.replace("- 5", "- 5.15");
    let r = e.evaluate(&RewardRequest::new(near, REFERENCE)).unwrap();
    assert_eq!((r.reward, calls.load(Ordering::SeqCst)), (1, 1));
    let far = REFERENCE.replace("- 5", "- 6");
    let r = e.evaluate(&RewardRequest::new(far, REFERENCE)).unwrap();
    assert_eq!((r.reward, calls.load(Ordering::SeqCst)), (0, 1));
    let r = e.evaluate(&RewardRequest::new(REFERENCE, REFERENCE)).unwrap();
    assert_eq!((r.reward, calls.load(Ordering::SeqCst)), (1, 1));
}

#[test]
fn panics_become_internal_errors() {
    let err = guarded::<()>(|| panic!("interpreter exploded")).unwrap_err();
    assert_eq!(err, RewardError::Internal("interpreter exploded".into()));
    assert_eq!(err.status(), 500);
}

#[test]
fn identical_requests_identical_rewards() {
    let e = engine();
    let req = RewardRequest::new(REFERENCE.replace("+ 4", "+ 2"), REFERENCE);
    let a = e.evaluate(&req).unwrap();
    let b = e.evaluate(&req).unwrap();
    assert_eq!((a.reward, &a.reason, &a.candidate_trajectory), (b.reward, &b.reason, &b.candidate_trajectory));
}
