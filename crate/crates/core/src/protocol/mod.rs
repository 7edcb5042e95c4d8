//! Two-party protocols with pre-shared entanglement.
//!
//! A protocol has `M + 1` steps (M even). Odd steps (1, 3, ...) belong to
//! Alice, even steps to Bob. At the start of a step the speaker receives
//! whatever is in flight, applies local unitaries to registers it holds, and
//! hands the step's message registers to the channel. The last step emits
//! no message. Inputs start with their owners; the reference purifying the
//! input is held by nobody.

mod cost;
pub mod library;
mod sim;

use std::collections::HashSet;
use std::fmt;

pub use cost::{
    nfold_error_check, protocol_error, qcc, qic, qic_report, qic_with, CopySlots, NfoldReport,
    QicReport, QicTerm, QuantumTask,
};
pub(crate) use sim::fresh_name;
pub use sim::{run, MessagePartition, ProtocolInput, Simulation, Trajectory, DEFAULT_MAX_DIM};

use crate::error::{Error, Result};
use crate::hilbert::{Holder, Register, StateVector, UnitaryOp};
use crate::Tolerances;

/// One round: local unitaries of the speaker, then the registers sent.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub ops: Vec<UnitaryOp>,
    pub message: Vec<String>,
}

impl Step {
    pub fn new(ops: Vec<UnitaryOp>, message: Vec<String>) -> Self {
        Self { ops, message }
    }

    /// Step that forwards `message` without touching anything.
    pub fn relay(message: Vec<String>) -> Self {
        Self {
            ops: Vec::new(),
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub a_in: Vec<Register>,
    pub b_in: Vec<Register>,
    /// Pure state whose registers are tagged Alice or Bob.
    pub preshared: StateVector,
    /// `U_1 ... U_{M+1}`.
    pub steps: Vec<Step>,
    pub a_out: Vec<Register>,
    pub b_out: Vec<Register>,
}

/// A violated constraint, located by step (`U_i`) or by component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

fn finding(location: impl Into<String>, message: impl Into<String>) -> Finding {
    Finding {
        location: location.into(),
        message: message.into(),
    }
}

/// Who speaks at step `i` (1-based).
pub fn speaker(i: usize) -> Holder {
    if i % 2 == 1 {
        Holder::Alice
    } else {
        Holder::Bob
    }
}

pub(crate) fn other(h: Holder) -> Holder {
    match h {
        Holder::Alice => Holder::Bob,
        Holder::Bob => Holder::Alice,
        h => h,
    }
}

/// Register layout reached by symbolic execution.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Dimension of each message `C_1 ... C_M`.
    pub message_dims: Vec<usize>,
    /// Registers and holders after the last step.
    pub final_registers: Vec<(Register, Holder)>,
}

impl ProtocolSpec {
    /// Number of messages `M`.
    pub fn message_count(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn input_names(&self) -> Vec<String> {
        self.a_in.iter().chain(&self.b_in).map(|r| r.name.clone()).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.a_out.iter().chain(&self.b_out).map(|r| r.name.clone()).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.a_in.iter().chain(&self.b_in).map(|r| r.dim).product()
    }

    pub fn output_dim(&self) -> usize {
        self.a_out.iter().chain(&self.b_out).map(|r| r.dim).product()
    }

    /// Every register name that appears anywhere in the protocol.
    pub fn register_names(&self) -> HashSet<String> {
        let mut names: HashSet<String> = self.input_names().into_iter().collect();
        names.extend(self.output_names());
        names.extend(self.preshared.system().names());
        for step in &self.steps {
            for op in &step.ops {
                names.extend(op.input_names());
                names.extend(op.output_names());
            }
            names.extend(step.message.iter().cloned());
        }
        names
    }

    /// Applies `f` to every register name.
    pub fn map_names(&mut self, f: &impl Fn(&str) -> String) -> Result<()> {
        for r in self
            .a_in
            .iter_mut()
            .chain(self.b_in.iter_mut())
            .chain(self.a_out.iter_mut())
            .chain(self.b_out.iter_mut())
        {
            r.name = f(&r.name);
        }
        let names = self.preshared.system().names();
        // Two passes so that swaps of names do not collide midway.
        for (k, n) in names.iter().enumerate() {
            self.preshared.rename(n, &format!("\u{0}tmp{k}"))?;
        }
        for (k, n) in names.iter().enumerate() {
            self.preshared.rename(&format!("\u{0}tmp{k}"), &f(n))?;
        }
        for step in &mut self.steps {
            for op in &mut step.ops {
                op.map_names(f);
            }
            for m in &mut step.message {
                *m = f(m);
            }
        }
        Ok(())
    }

    /// Copy with every register name prefixed.
    pub fn with_prefix(&self, prefix: &str) -> Result<Self> {
        let mut p = self.clone();
        p.map_names(&|n| format!("{prefix}{n}"))?;
        Ok(p)
    }

    /// All constraint violations; empty iff the protocol is well formed.
    pub fn validate(&self) -> Vec<Finding> {
        self.validate_with(&Tolerances::default())
    }

    pub fn validate_with(&self, tol: &Tolerances) -> Vec<Finding> {
        self.trace(tol).0
    }

    /// Errors with every finding if validation fails.
    pub fn check(&self) -> Result<()> {
        self.check_with(&Tolerances::default())
    }

    pub fn check_with(&self, tol: &Tolerances) -> Result<()> {
        let f = self.validate_with(tol);
        if f.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProtocol(f.iter().map(|x| x.to_string()).collect()))
        }
    }

    /// Symbolic execution of a valid protocol.
    pub fn schedule(&self) -> Result<Schedule> {
        let (findings, sched) = self.trace(&Tolerances::default());
        if !findings.is_empty() {
            return Err(Error::InvalidProtocol(findings.iter().map(|x| x.to_string()).collect()));
        }
        Ok(sched)
    }

    fn trace(&self, tol: &Tolerances) -> (Vec<Finding>, Schedule) {
        let mut out = Vec::new();
        let m = self.message_count();
        if self.steps.len() < 3 || m % 2 != 0 {
            out.push(finding(
                "M",
                format!(
                    "{} steps give {} messages; protocols are defined with an even number of messages, at least 2",
                    self.steps.len(),
                    m
                ),
            ));
        }

        // Live registers in order of appearance.
        let mut live: Vec<(Register, Holder)> = Vec::new();
        let add = |live: &mut Vec<(Register, Holder)>, r: &Register, h: Holder, loc: &str, out: &mut Vec<Finding>| {
            if live.iter().any(|(x, _)| x.name == r.name) {
                out.push(finding(loc, format!("register {} is declared twice", r.name)));
            } else {
                live.push((r.clone(), h));
            }
        };
        for r in &self.a_in {
            add(&mut live, r, Holder::Alice, "inputs", &mut out);
        }
        for r in &self.b_in {
            add(&mut live, r, Holder::Bob, "inputs", &mut out);
        }
        let ps = self.preshared.system();
        for (r, &h) in ps.registers().iter().zip(ps.holders()) {
            if h != Holder::Alice && h != Holder::Bob {
                out.push(finding(
                    "preshared",
                    format!("register {} must be held by Alice or Bob, not {}", r.name, h.as_str()),
                ));
            }
            add(&mut live, r, h, "preshared", &mut out);
        }
        let norm = self.preshared.norm();
        if (norm - 1.0).abs() > tol.norm {
            out.push(finding("preshared", format!("state has norm {norm:.12} instead of 1")));
        }

        let mut message_dims = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            let i = k + 1;
            let loc = format!("U_{i}");
            let who = speaker(i);
            for (_, h) in live.iter_mut() {
                if *h == Holder::InFlight {
                    *h = who;
                }
            }
            for (j, op) in step.ops.iter().enumerate() {
                let dev = op.unitarity_deviation();
                if dev > tol.unit {
                    out.push(finding(&loc, format!("operation {j} is not unitary (deviation {dev:.3e})")));
                }
                let mut ok = true;
                for r in op.inputs() {
                    match live.iter().find(|(x, _)| x.name == r.name) {
                        None => {
                            out.push(finding(&loc, format!("acts on unknown register {}", r.name)));
                            ok = false;
                        }
                        Some((x, h)) => {
                            if *h != who {
                                out.push(finding(
                                    &loc,
                                    format!("acts on {} which is held by {}, not {}", r.name, h.as_str(), who.as_str()),
                                ));
                                ok = false;
                            }
                            if x.dim != r.dim {
                                out.push(finding(
                                    &loc,
                                    format!(
                                        "input {} has dimension {} in the protocol but {} in the unitary",
                                        r.name, x.dim, r.dim
                                    ),
                                ));
                                ok = false;
                            }
                        }
                    }
                }
                if !ok {
                    continue;
                }
                live.retain(|(x, _)| !op.inputs().iter().any(|r| r.name == x.name));
                for r in op.outputs() {
                    if live.iter().any(|(x, _)| x.name == r.name) {
                        out.push(finding(&loc, format!("output {} already exists", r.name)));
                    } else {
                        live.push((r.clone(), who));
                    }
                }
            }
            if i == self.steps.len() {
                if !step.message.is_empty() {
                    out.push(finding(&loc, "the final unitary cannot emit a message"));
                }
                continue;
            }
            let mut dim = 1usize;
            let mut msg_seen = HashSet::new();
            for name in &step.message {
                if !msg_seen.insert(name) {
                    out.push(finding(&loc, format!("message lists {name} twice")));
                    continue;
                }
                match live.iter_mut().find(|(x, _)| &x.name == name) {
                    None => out.push(finding(&loc, format!("message register {name} does not exist"))),
                    Some((x, h)) => {
                        if *h != who {
                            out.push(finding(
                                &loc,
                                format!("message register {name} is held by {}, not the speaker", h.as_str()),
                            ));
                        } else {
                            *h = Holder::InFlight;
                            dim = dim.saturating_mul(x.dim);
                        }
                    }
                }
            }
            message_dims.push(dim);
        }

        for (regs, want) in [(&self.a_out, Holder::Alice), (&self.b_out, Holder::Bob)] {
            for r in regs {
                match live.iter().find(|(x, _)| x.name == r.name) {
                    None => out.push(finding("outputs", format!("output {} does not exist at the end", r.name))),
                    Some((x, h)) => {
                        if *h != want {
                            out.push(finding(
                                "outputs",
                                format!("output {} must end with {}, found {}", r.name, want.as_str(), h.as_str()),
                            ));
                        }
                        if x.dim != r.dim {
                            out.push(finding(
                                "outputs",
                                format!("output {} has dimension {} but is declared {}", r.name, x.dim, r.dim),
                            ));
                        }
                    }
                }
            }
        }
        (
            out,
            Schedule {
                message_dims,
                final_registers: live,
            },
        )
    }
}

#[cfg(test)]
mod tests;
