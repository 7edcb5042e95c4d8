use std::collections::HashSet;

use super::{other, speaker, ProtocolSpec};
use crate::error::{Error, Result};
use crate::hilbert::{
    canonical_classical_purification, DensityOperator, Holder, JointDistribution, Register, StateVector,
};

/// Largest global dimension simulated unless overridden.
pub const DEFAULT_MAX_DIM: usize = 1 << 24;

/// A purified protocol input: the input registers plus any reference
/// registers (tagged [`Holder::Reference`]) that purify them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolInput {
    state: StateVector,
}

/// Picks `base`, or `base` with a numeric suffix, avoiding `taken`.
pub(crate) fn fresh_name(base: &str, taken: &HashSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded search")
}

impl ProtocolInput {
    /// Rank-minimal purification of a density operator on the input
    /// registers.
    pub fn from_density(rho: &DensityOperator, ref_name: &str) -> Result<Self> {
        Ok(Self {
            state: rho.purify(ref_name)?,
        })
    }

    /// Canonical purification of a classical distribution.
    pub fn classical(dist: &JointDistribution, a_in: &[Register], b_in: &[Register], ref_name: &str) -> Result<Self> {
        Ok(Self {
            state: canonical_classical_purification(dist, a_in, b_in, ref_name)?,
        })
    }

    /// A pure input with no reference.
    pub fn pure(state: StateVector) -> Self {
        let mut state = state;
        for n in state.system().held_by(Holder::Reference) {
            // Callers passing a pure input mean no reference at all.
            state.set_holder(&n, Holder::Alice).expect("name exists");
        }
        Self { state }
    }

    /// An already purified input; `references` name the purifying registers.
    pub fn purified<S: AsRef<str>>(state: StateVector, references: &[S]) -> Result<Self> {
        let mut state = state;
        for r in references {
            state.set_holder(r.as_ref(), Holder::Reference)?;
        }
        Ok(Self { state })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn references(&self) -> Vec<String> {
        self.state.system().held_by(Holder::Reference)
    }

    pub fn input_names(&self) -> Vec<String> {
        let sys = self.state.system();
        sys.names()
            .into_iter()
            .filter(|n| sys.holder(n) != Some(Holder::Reference))
            .collect()
    }

    /// Reduced state on the input registers.
    pub fn density(&self) -> Result<DensityOperator> {
        self.state.reduced_density(&self.input_names())
    }

    /// `self ⊗ other`; reference registers stay references.
    pub fn tensor(&self, other: &ProtocolInput) -> Result<Self> {
        Ok(Self {
            state: self.state.tensor(&other.state)?,
        })
    }

    pub fn map_names(&mut self, f: &impl Fn(&str) -> String) -> Result<()> {
        let names = self.state.system().names();
        for (k, n) in names.iter().enumerate() {
            self.state.rename(n, &format!("\u{0}tmp{k}"))?;
        }
        for (k, n) in names.iter().enumerate() {
            self.state.rename(&format!("\u{0}tmp{k}"), &f(n))?;
        }
        Ok(())
    }

    pub fn renamed(&self, f: &impl Fn(&str) -> String) -> Result<Self> {
        let mut c = self.clone();
        c.map_names(f)?;
        Ok(c)
    }
}

/// Registers at the moment message `step` has just been sent.
#[derive(Debug, Clone, PartialEq)]
pub struct MessagePartition {
    pub step: usize,
    pub sender: Holder,
    pub message: Vec<String>,
    /// Everything the sender keeps after sending.
    pub sender_holding: Vec<String>,
    /// Everything the receiver holds before receiving.
    pub receiver_holding: Vec<String>,
    pub reference: Vec<String>,
}

/// Step-by-step execution on a global pure state. Only the current state
/// is kept, so large protocols can be analysed one step at a time.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    spec: &'a ProtocolSpec,
    state: StateVector,
    done: usize,
}

impl<'a> Simulation<'a> {
    pub fn start(spec: &'a ProtocolSpec, input: &ProtocolInput) -> Result<Self> {
        Self::start_with_limit(spec, input, DEFAULT_MAX_DIM)
    }

    pub fn start_with_limit(spec: &'a ProtocolSpec, input: &ProtocolInput, max_dim: usize) -> Result<Self> {
        spec.check()?;
        let mut state = input.state.clone();
        let names = input.input_names();
        let expected: HashSet<String> = spec.input_names().into_iter().collect();
        let got: HashSet<String> = names.iter().cloned().collect();
        if expected != got {
            let mut e: Vec<_> = expected.into_iter().collect();
            let mut g: Vec<_> = got.into_iter().collect();
            e.sort();
            g.sort();
            return Err(Error::DimMismatch(format!(
                "protocol takes inputs {e:?} but was given {g:?}"
            )));
        }
        for (regs, h) in [(&spec.a_in, Holder::Alice), (&spec.b_in, Holder::Bob)] {
            for r in regs {
                let have = state.system().dim_of(&r.name)?;
                if have != r.dim {
                    return Err(Error::DimMismatch(format!(
                        "input {} has dimension {} but the protocol expects {}",
                        r.name, have, r.dim
                    )));
                }
                state.set_holder(&r.name, h)?;
            }
        }
        let total = (state.dim() as u128) * (spec.preshared.dim() as u128);
        if total > max_dim as u128 {
            return Err(Error::TooLarge {
                what: "global protocol state".into(),
                size: total,
                limit: max_dim as u128,
            });
        }
        let state = state.tensor(&spec.preshared)?;
        Ok(Self { spec, state, done: 0 })
    }

    pub fn spec(&self) -> &ProtocolSpec {
        self.spec
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn steps_done(&self) -> usize {
        self.done
    }

    pub fn is_finished(&self) -> bool {
        self.done == self.spec.steps.len()
    }

    /// Runs the next unitary step.
    pub fn advance(&mut self) -> Result<()> {
        let i = self.done + 1;
        let step = self
            .spec
            .steps
            .get(self.done)
            .ok_or_else(|| Error::Construction("protocol already finished".into()))?;
        let who = speaker(i);
        let mut state = std::mem::replace(&mut self.state, StateVector::scalar());
        state.system_mut().retag(Holder::InFlight, who);
        for op in &step.ops {
            state = state.apply(op)?;
            for r in op.outputs() {
                state.set_holder(&r.name, who)?;
            }
        }
        for m in &step.message {
            state.set_holder(m, Holder::InFlight)?;
        }
        self.state = state;
        self.done = i;
        Ok(())
    }

    /// Partition after the most recent step, if it sent a message.
    pub fn partition(&self) -> Option<MessagePartition> {
        let i = self.done;
        if i == 0 || i > self.spec.message_count() {
            return None;
        }
        let who = speaker(i);
        let sys = self.state.system();
        Some(MessagePartition {
            step: i,
            sender: who,
            message: self.spec.steps[i - 1].message.clone(),
            sender_holding: sys.held_by(who),
            receiver_holding: sys.held_by(other(who)),
            reference: sys.held_by(Holder::Reference),
        })
    }

    /// Runs to the end and returns the output reduced to
    /// `A_out ⊗ B_out ⊗ R`.
    pub fn finish(mut self) -> Result<DensityOperator> {
        while !self.is_finished() {
            self.advance()?;
        }
        self.output()
    }

    pub fn output(&self) -> Result<DensityOperator> {
        if !self.is_finished() {
            return Err(Error::Construction("protocol has not finished".into()));
        }
        let mut keep = self.spec.output_names();
        keep.extend(self.state.system().held_by(Holder::Reference));
        self.state.reduced_density(&keep)
    }
}

/// Global states after each message and the final output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `ρ_1 ... ρ_M`, pure, with holder tags as of each moment.
    pub states: Vec<StateVector>,
    /// Output on `A_out ⊗ B_out ⊗ R`.
    pub output: DensityOperator,
}

pub fn run(spec: &ProtocolSpec, input: &ProtocolInput) -> Result<Trajectory> {
    let mut sim = Simulation::start(spec, input)?;
    let mut states = Vec::new();
    while !sim.is_finished() {
        sim.advance()?;
        if sim.partition().is_some() {
            states.push(sim.state().clone());
        }
    }
    Ok(Trajectory {
        states,
        output: sim.output()?,
    })
}
