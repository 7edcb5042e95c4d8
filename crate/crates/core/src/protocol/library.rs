//! Small hand-built protocols used as fixtures and by the command line.

use super::{ProtocolSpec, Step};
use crate::error::Result;
use crate::hilbert::{gates, Holder, Register, RegisterSystem, StateVector, UnitaryOp};

/// Unitary creating a fresh dimension-1 register.
pub fn create(name: &str) -> UnitaryOp {
    UnitaryOp::relabel(vec![], vec![Register::new(name, 1)]).expect("dimension 1")
}

/// Unitary discarding a dimension-1 register.
pub fn discard(name: &str) -> UnitaryOp {
    UnitaryOp::relabel(vec![Register::new(name, 1)], vec![]).expect("dimension 1")
}

fn rename(from: &str, to: &str, dim: usize) -> UnitaryOp {
    UnitaryOp::relabel(vec![Register::new(from, dim)], vec![Register::new(to, dim)]).expect("same dimension")
}

/// Two messages: Alice ships `xa` to Bob in `c1`, Bob ships it back in
/// `c2` and Alice stores it in `ya`. Bob copies `xb` to `yb`. Implements
/// the identity channel with cost `2 log2 da`.
pub fn relay(da: usize, db: usize) -> ProtocolSpec {
    ProtocolSpec {
        a_in: vec![Register::new("xa", da)],
        b_in: vec![Register::new("xb", db)],
        preshared: StateVector::scalar(),
        steps: vec![
            Step::new(vec![rename("xa", "c1", da)], vec!["c1".into()]),
            Step::new(vec![rename("c1", "c2", da), rename("xb", "yb", db)], vec!["c2".into()]),
            Step::new(vec![rename("c2", "ya", da)], vec![]),
        ],
        a_out: vec![Register::new("ya", da)],
        b_out: vec![Register::new("yb", db)],
    }
}

/// Alice sends her input `x` to Bob, who outputs it as `y`; the reply is
/// empty. On a uniformly random bit with a classical purification the
/// information cost is exactly one bit.
pub fn send_input(dim: usize) -> ProtocolSpec {
    ProtocolSpec {
        a_in: vec![Register::new("x", dim)],
        b_in: vec![],
        preshared: StateVector::scalar(),
        steps: vec![
            Step::new(vec![rename("x", "c1", dim)], vec!["c1".into()]),
            Step::new(vec![rename("c1", "y", dim), create("c2")], vec!["c2".into()]),
            Step::new(vec![discard("c2")], vec![]),
        ],
        a_out: vec![],
        b_out: vec![Register::new("y", dim)],
    }
}

/// Protocol with no inputs, outputs or communication.
pub fn trivial() -> ProtocolSpec {
    ProtocolSpec {
        a_in: vec![],
        b_in: vec![],
        preshared: StateVector::scalar(),
        steps: vec![
            Step::new(vec![create("c1")], vec!["c1".into()]),
            Step::new(vec![discard("c1"), create("c2")], vec!["c2".into()]),
            Step::new(vec![discard("c2")], vec![]),
        ],
        a_out: vec![],
        b_out: vec![],
    }
}

/// Alice sends `x`; Bob writes `x ∧ y` into a scratch bit, copies it
/// into `c2` and returns it. Scratch bits come from the preshared state.
pub fn and_bits() -> ProtocolSpec {
    let x = Register::new("x", 2);
    let y = Register::new("y", 2);
    let compute = UnitaryOp::from_basis_map(
        vec![Register::new("c1", 2), y.clone(), Register::new("fb", 2)],
        vec![Register::new("xb", 2), Register::new("yk", 2), Register::new("fb", 2)],
        |i| {
            let (xv, yv, a) = (i / 4, (i / 2) % 2, i % 2);
            xv * 4 + yv * 2 + (a ^ (xv & yv))
        },
    )
    .expect("fixed shapes");
    let fan = UnitaryOp::new(
        vec![Register::new("fb", 2), Register::new("c2", 2)],
        vec![Register::new("fb", 2), Register::new("c2", 2)],
        gates::cnot(),
    )
    .expect("fixed shapes");
    let scratch = StateVector::zeros(
        RegisterSystem::uniform(vec![Register::new("fb", 2), Register::new("c2", 2)], Holder::Bob).expect("fixed shapes"),
    );
    ProtocolSpec {
        a_in: vec![x.clone()],
        b_in: vec![y],
        preshared: scratch,
        steps: vec![
            Step::new(vec![UnitaryOp::relabel(vec![x], vec![Register::new("c1", 2)]).expect("fixed shapes")], vec!["c1".into()]),
            Step::new(vec![compute, fan], vec!["c2".into()]),
            Step::new(
                vec![UnitaryOp::relabel(vec![Register::new("c2", 2)], vec![Register::new("fa", 2)]).expect("fixed shapes")],
                vec![],
            ),
        ],
        a_out: vec![Register::new("fa", 2)],
        b_out: vec![Register::new("fb", 2)],
    }
}

/// Appends `u` (acting on output registers held by `alice`) to the last
/// step Alice or Bob speaks in; used to corrupt or rotate outputs.
pub fn post_process(p: &ProtocolSpec, u: UnitaryOp, alice: bool) -> Result<ProtocolSpec> {
    let mut q = p.clone();
    let m = q.steps.len();
    // Step M+1 is Alice's, step M is Bob's.
    let idx = if alice { m - 1 } else { m - 2 };
    q.steps[idx].ops.push(u);
    q.check()?;
    Ok(q)
}
