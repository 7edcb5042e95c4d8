use super::library::{relay, send_input, trivial};
use super::*;
use crate::hilbert::{gates, ChannelOp, DensityOperator, JointDistribution, RegisterSystem};
use crate::linalg;
use crate::measures::trace_distance_full;
use crate::C64;

fn bit_input(x: usize, y: usize) -> ProtocolInput {
    let sys = RegisterSystem::new(
        vec![Register::new("xa", 2), Register::new("xb", 2)],
        vec![Holder::Alice, Holder::Bob],
    )
    .unwrap();
    ProtocolInput::pure(StateVector::basis(sys, &[x, y]).unwrap())
}

fn uniform_bit() -> ProtocolInput {
    let d = JointDistribution::new(2, 1, vec![0.5, 0.5]).unwrap();
    ProtocolInput::classical(&d, &[Register::new("x", 2)], &[], "R").unwrap()
}

#[test]
fn relay_is_valid() {
    assert!(relay(2, 2).validate().is_empty());
    assert!(send_input(2).validate().is_empty());
    assert!(trivial().validate().is_empty());
}

#[test]
fn dimension_mismatch_names_the_step() {
    let mut p = relay(2, 2);
    p.steps[1].ops[0] = UnitaryOp::relabel(vec![Register::new("c1", 3)], vec![Register::new("c2", 3)]).unwrap();
    let f = p.validate();
    assert!(!f.is_empty());
    assert!(f.iter().any(|x| x.location == "U_2" && x.message.contains("dimension")), "{f:?}");
}

#[test]
fn odd_message_count_rejected() {
    let mut p = relay(2, 2);
    p.steps.pop();
    let f = p.validate();
    assert!(f.iter().any(|x| x.location == "M" && x.message.contains("even")), "{f:?}");
}

#[test]
fn final_step_cannot_send() {
    let mut p = relay(2, 2);
    p.steps[2].message.push("ya".into());
    assert!(p.validate().iter().any(|x| x.location == "U_3"));
}

#[test]
fn acting_on_the_other_party_is_rejected() {
    let mut p = relay(2, 2);
    // Alice touching Bob's input at step 1.
    p.steps[0].ops.push(UnitaryOp::on(Register::new("xb", 2), gates::x()).unwrap());
    let f = p.validate();
    assert!(f.iter().any(|x| x.location == "U_1" && x.message.contains("held by bob")), "{f:?}");
}

#[test]
fn outputs_must_end_with_owner() {
    let mut p = relay(2, 2);
    std::mem::swap(&mut p.a_out, &mut p.b_out);
    assert!(p.validate().iter().any(|x| x.location == "outputs"));
}

#[test]
fn relay_moves_basis_input_to_outputs() {
    let t = run(&relay(2, 2), &bit_input(0, 1)).unwrap();
    let out = t.output.permute(&["ya", "yb"]).unwrap();
    // |01><01| has a single 1 at index 1.
    assert!((out.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    assert!((out.trace() - 1.0).abs() < 1e-12);
    assert_eq!(t.states.len(), 2);
    for s in &t.states {
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn trivial_protocol_outputs_the_scalar() {
    let t = run(&trivial(), &ProtocolInput::pure(StateVector::scalar())).unwrap();
    assert_eq!(t.output.dim(), 1);
    assert!((t.output.trace() - 1.0).abs() < 1e-12);
}

#[test]
fn message_holders_are_in_flight_between_steps() {
    let t = run(&relay(2, 2), &bit_input(1, 0)).unwrap();
    assert_eq!(t.states[0].system().holder("c1"), Some(Holder::InFlight));
    assert_eq!(t.states[1].system().holder("c2"), Some(Holder::InFlight));
    assert_eq!(t.states[1].system().holder("yb"), Some(Holder::Bob));
}

#[test]
fn qcc_values() {
    assert!((qcc(&relay(2, 2)).unwrap() - 2.0).abs() < 1e-12);
    assert!(qcc(&trivial()).unwrap().abs() < 1e-12);
    // Messages of dimension 2 then 3.
    let mut p = relay(2, 2);
    p.steps[1].ops[0] = UnitaryOp::relabel(vec![Register::new("c1", 2)], vec![Register::new("c2", 2)]).unwrap();
    let p = ProtocolSpec {
        a_in: vec![Register::new("xa", 2)],
        b_in: vec![Register::new("xb", 3)],
        preshared: StateVector::scalar(),
        steps: vec![
            Step::new(vec![UnitaryOp::relabel(vec![Register::new("xa", 2)], vec![Register::new("c1", 2)]).unwrap()], vec!["c1".into()]),
            Step::new(vec![UnitaryOp::relabel(vec![Register::new("xb", 3)], vec![Register::new("c2", 3)]).unwrap()], vec!["c2".into()]),
            Step::new(vec![], vec![]),
        ],
        a_out: vec![Register::new("c2", 3)],
        b_out: vec![Register::new("c1", 2)],
    };
    let oracle = 1.0 + 3f64.log2();
    assert!((qcc(&p).unwrap() - oracle).abs() < 1e-12);
    assert!((qcc(&p).unwrap() - 2.584963).abs() < 1e-6);
}

#[test]
fn qic_of_sending_a_correlated_bit_is_one() {
    let r = qic_report(&send_input(2), &uniform_bit(), &Tolerances::default()).unwrap();
    assert_eq!(r.terms.len(), 2);
    assert!((r.terms[0].value - 1.0).abs() < 1e-9);
    assert!(r.terms[1].value.abs() < 1e-9);
    assert!((r.total - 1.0).abs() < 1e-9);
}

#[test]
fn qic_of_pure_input_is_zero() {
    assert!(qic_with(&relay(2, 2), &bit_input(1, 1)).unwrap().abs() < 1e-9);
}

#[test]
fn qic_from_density_matches_classical_purification() {
    let d = JointDistribution::new(2, 1, vec![0.5, 0.5]).unwrap();
    let rho = d.density(&[Register::new("x", 2)], &[]).unwrap();
    assert!((qic(&send_input(2), &rho).unwrap() - 1.0).abs() < 1e-9);
}

fn identity_task(p: &ProtocolSpec, input: ProtocolInput) -> QuantumTask {
    let ch = ChannelOp::identity(
        vec![Register::new("xa", 2), Register::new("xb", 2)],
        vec![Register::new("ya", 2), Register::new("yb", 2)],
    )
    .unwrap();
    let _ = p;
    QuantumTask::new(ch, input, 0.0).unwrap()
}

fn correlated_input() -> ProtocolInput {
    let d = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    ProtocolInput::classical(&d, &[Register::new("xa", 2)], &[Register::new("xb", 2)], "R").unwrap()
}

#[test]
fn exact_protocol_has_zero_error() {
    let p = relay(2, 2);
    let t = identity_task(&p, correlated_input());
    assert!(protocol_error(&p, &t).unwrap() < 1e-10);
}

#[test]
fn flipped_outputs_have_error_two() {
    let p = library::post_process(&relay(2, 2), UnitaryOp::on(Register::new("ya", 2), gates::x()).unwrap(), true).unwrap();
    let t = identity_task(&p, correlated_input());
    assert!((protocol_error(&p, &t).unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn measurement_target_error_matches_dense_computation() {
    // Identity protocol against a target that measures Alice's output.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = StateVector::new(
        RegisterSystem::new(vec![Register::new("xa", 2), Register::new("xb", 2)], vec![Holder::Alice, Holder::Bob]).unwrap(),
        vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0), C64::new(0.0, 0.0)],
    )
    .unwrap();
    let rho = plus.density();
    let dephase: Vec<_> = (0..2)
        .map(|k| {
            let mut proj = linalg::identity(2) * C64::new(0.0, 0.0);
            proj[(k, k)] = C64::new(1.0, 0.0);
            linalg::kron(&proj, &linalg::identity(2))
        })
        .collect();
    let ch = ChannelOp::from_kraus(
        vec![Register::new("xa", 2), Register::new("xb", 2)],
        vec![Register::new("ya", 2), Register::new("yb", 2)],
        &dephase,
        "env",
        "anc",
    )
    .unwrap();
    let t = QuantumTask::from_density(ch, &rho, 1.0, "R").unwrap();
    let p = relay(2, 2);
    let err = protocol_error(&p, &t).unwrap();
    // Independent dense evaluation: |+>|0> purified by a trivial reference
    // (rank 1), so the comparison is between |+><+| and diag(1/2, 1/2).
    let plus_rho = DensityOperator::new(
        RegisterSystem::uniform(vec![Register::new("a", 2)], Holder::Alice).unwrap(),
        linalg::identity(2).map(|_| C64::new(0.5, 0.0)),
    )
    .unwrap();
    let mixed = DensityOperator::maximally_mixed(plus_rho.system().clone());
    let oracle = trace_distance_full(&plus_rho, &mixed).unwrap();
    assert!(err > 0.0);
    assert!((err - oracle).abs() < 1e-10, "{err} vs {oracle}");
    assert!((oracle - 1.0).abs() < 1e-12);
}

#[test]
fn nfold_of_parallel_copies() {
    let ch = ChannelOp::identity(vec![Register::new("x", 2)], vec![Register::new("y", 2)]).unwrap();
    let t = QuantumTask::new(ch.clone(), uniform_bit(), 0.1).unwrap();
    // Two copies run side by side by a single relay of dimension 4 would
    // not split, so build the two-copy protocol by hand.
    let p1 = send_input(2).with_prefix("a.").unwrap();
    let p2 = send_input(2).with_prefix("b.").unwrap();
    let mut steps = Vec::new();
    for (s1, s2) in p1.steps.iter().zip(&p2.steps) {
        let mut ops = s1.ops.clone();
        ops.extend(s2.ops.iter().cloned());
        let mut msg = s1.message.clone();
        msg.extend(s2.message.iter().cloned());
        steps.push(Step::new(ops, msg));
    }
    let two = ProtocolSpec {
        a_in: vec![Register::new("a.x", 2), Register::new("b.x", 2)],
        b_in: vec![],
        preshared: StateVector::scalar(),
        steps,
        a_out: vec![],
        b_out: vec![Register::new("a.y", 2), Register::new("b.y", 2)],
    };
    let copies = [CopySlots::suffixed(&ch, ""), CopySlots::suffixed(&ch, "")];
    let copies = [
        CopySlots { inputs: vec!["a.x".into()], outputs: vec!["a.y".into()] },
        CopySlots { inputs: vec!["b.x".into()], outputs: vec!["b.y".into()] },
        copies[0].clone(),
    ];
    let r = nfold_error_check(&two, &t, &copies[..2]).unwrap();
    assert!(r.success());
    assert!(r.distances.iter().all(|d| d.abs() < 1e-10));

    // Corrupt copy 1 with a final bit flip.
    let bad = library::post_process(&two, UnitaryOp::on(Register::new("a.y", 2), gates::x()).unwrap(), false).unwrap();
    let r = nfold_error_check(&bad, &t, &copies[..2]).unwrap();
    assert!(!r.success());
    assert!((r.distances[0] - 2.0).abs() < 1e-10);
    assert!(r.distances[1].abs() < 1e-10);

    // Relabeling copies permutes the entries.
    let swapped = [copies[1].clone(), copies[0].clone()];
    let r2 = nfold_error_check(&bad, &t, &swapped).unwrap();
    assert!((r2.distances[1] - r.distances[0]).abs() < 1e-12);
}

#[test]
fn size_guard_refuses_large_states() {
    let p = relay(2, 2);
    let r = Simulation::start_with_limit(&p, &bit_input(0, 0), 2);
    assert!(matches!(r, Err(Error::TooLarge { .. })));
}

#[test]
fn prefixing_keeps_validity() {
    let p = relay(2, 3).with_prefix("k.").unwrap();
    assert!(p.validate().is_empty());
    assert!(p.register_names().iter().all(|n| n.starts_with("k.")));
}
