use std::collections::HashSet;

use super::sim::{fresh_name, ProtocolInput, Simulation};
use super::ProtocolSpec;
use crate::error::{Error, Result};
use crate::hilbert::{ChannelOp, DensityOperator, Holder};
use crate::measures::{cond_mutual_info_with, trace_distance_full};
use crate::Tolerances;

/// `Σ_i log2 dim C_i`.
pub fn qcc(p: &ProtocolSpec) -> Result<f64> {
    Ok(p.schedule()?.message_dims.iter().map(|&d| (d as f64).log2()).sum())
}

/// One message's contribution `½ I(C_i; R | receiver)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QicTerm {
    pub step: usize,
    pub sender: Holder,
    pub message: Vec<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QicReport {
    pub terms: Vec<QicTerm>,
    pub total: f64,
}

/// Information cost of `p` on an explicitly purified input.
pub fn qic_report(p: &ProtocolSpec, input: &ProtocolInput, tol: &Tolerances) -> Result<QicReport> {
    let mut sim = Simulation::start(p, input)?;
    let mut terms = Vec::new();
    while sim.steps_done() < p.message_count() {
        sim.advance()?;
        let part = sim.partition().expect("message step");
        let i = cond_mutual_info_with(
            sim.state(),
            &part.message,
            &part.reference,
            &part.receiver_holding,
            tol,
        )?;
        terms.push(QicTerm {
            step: part.step,
            sender: part.sender,
            message: part.message,
            value: 0.5 * i,
        });
    }
    let total = terms.iter().map(|t| t.value).sum();
    Ok(QicReport { terms, total })
}

pub fn qic_with(p: &ProtocolSpec, input: &ProtocolInput) -> Result<f64> {
    qic_report(p, input, &Tolerances::default()).map(|r| r.total)
}

/// Information cost on a density operator over the input registers,
/// purified with the rank-minimal purification.
pub fn qic(p: &ProtocolSpec, rho: &DensityOperator) -> Result<f64> {
    let input = ProtocolInput::from_density(rho, &reference_name(p))?;
    qic_with(p, &input)
}

pub(crate) fn reference_name(p: &ProtocolSpec) -> String {
    fresh_name("R", &p.register_names())
}

/// A channel, the input it is evaluated on, and the allowed error.
#[derive(Debug, Clone)]
pub struct QuantumTask {
    pub channel: ChannelOp,
    pub input: ProtocolInput,
    pub epsilon: f64,
}

impl QuantumTask {
    pub fn new(channel: ChannelOp, input: ProtocolInput, epsilon: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&epsilon) {
            return Err(Error::Construction(format!("error bound {epsilon} outside [0, 2]")));
        }
        let want: HashSet<String> = channel.input_names().into_iter().collect();
        let got: HashSet<String> = input.input_names().into_iter().collect();
        if want != got {
            return Err(Error::DimMismatch("channel inputs and task input registers differ".into()));
        }
        for r in channel.inputs() {
            if input.state().system().dim_of(&r.name)? != r.dim {
                return Err(Error::DimMismatch(format!("input {} has the wrong dimension", r.name)));
            }
        }
        Ok(Self {
            channel,
            input,
            epsilon,
        })
    }

    /// Task on a density operator, purified with reference `ref_name`.
    pub fn from_density(channel: ChannelOp, rho: &DensityOperator, epsilon: f64, ref_name: &str) -> Result<Self> {
        Self::new(channel, ProtocolInput::from_density(rho, ref_name)?, epsilon)
    }

    /// `(N ⊗ id_R)(ψ_ρ)` on the channel outputs and the reference.
    pub fn target_output(&self) -> Result<DensityOperator> {
        let out = self.channel.apply_dilation(self.input.state())?;
        let mut keep = self.channel.output_names();
        keep.extend(self.input.references());
        out.reduced_density(&keep)
    }
}

fn same_outputs(p: &ProtocolSpec, t: &QuantumTask) -> Result<()> {
    let mut a: Vec<_> = p.a_out.iter().chain(&p.b_out).cloned().collect();
    let mut b: Vec<_> = t.channel.outputs().to_vec();
    a.sort_by(|x, y| x.name.cmp(&y.name));
    b.sort_by(|x, y| x.name.cmp(&y.name));
    if a != b {
        return Err(Error::DimMismatch("protocol outputs differ from the channel outputs".into()));
    }
    Ok(())
}

/// Trace distance between `Π(ρ)` and `N(ρ)` on `A_out ⊗ B_out ⊗ R`.
pub fn protocol_error(p: &ProtocolSpec, t: &QuantumTask) -> Result<f64> {
    same_outputs(p, t)?;
    let got = Simulation::start(p, &t.input)?.finish()?;
    let want = t.target_output()?;
    trace_distance_full(&got, &want)
}

/// Where copy `i` of the task lives inside an n-copy protocol: names
/// aligned with the channel's input and output registers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopySlots {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl CopySlots {
    /// Slots named `{name}{suffix}` for every channel register.
    pub fn suffixed(channel: &ChannelOp, suffix: &str) -> Self {
        Self {
            inputs: channel.input_names().iter().map(|n| format!("{n}{suffix}")).collect(),
            outputs: channel.output_names().iter().map(|n| format!("{n}{suffix}")).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NfoldReport {
    pub distances: Vec<f64>,
    pub epsilon: f64,
}

impl NfoldReport {
    pub fn success(&self) -> bool {
        self.distances.iter().all(|&d| d <= self.epsilon)
    }
}

/// Per-copy errors of `p_n` on `ρ^{⊗n}`: copy `i` is compared with
/// `N(ρ)` on its own outputs and reference.
pub fn nfold_error_check(p_n: &ProtocolSpec, t: &QuantumTask, copies: &[CopySlots]) -> Result<NfoldReport> {
    if copies.is_empty() {
        return Err(Error::Construction("need at least one copy".into()));
    }
    let ch_in = t.channel.input_names();
    let ch_out = t.channel.output_names();
    let refs = t.input.references();
    let target = t.target_output()?;
    let mut joint: Option<ProtocolInput> = None;
    let mut renames = Vec::new();
    for (i, slots) in copies.iter().enumerate() {
        if slots.inputs.len() != ch_in.len() || slots.outputs.len() != ch_out.len() {
            return Err(Error::DimMismatch(format!("copy {} slots do not match the channel", i + 1)));
        }
        let map = |n: &str| -> String {
            if let Some(k) = ch_in.iter().position(|x| x == n) {
                slots.inputs[k].clone()
            } else if let Some(k) = ch_out.iter().position(|x| x == n) {
                slots.outputs[k].clone()
            } else {
                format!("{n}#{}", i + 1)
            }
        };
        let copy = t.input.renamed(&map)?;
        let copy_refs: Vec<String> = refs.iter().map(|r| map(r)).collect();
        let mut tgt = target.clone();
        for n in target.system().names() {
            tgt.rename(&n, &map(&n))?;
        }
        renames.push((copy_refs, tgt));
        joint = Some(match joint {
            None => copy,
            Some(j) => j.tensor(&copy)?,
        });
    }
    let joint = joint.expect("non-empty");
    let mut sim = Simulation::start(p_n, &joint)?;
    while !sim.is_finished() {
        sim.advance()?;
    }
    let mut distances = Vec::new();
    for (slots, (copy_refs, tgt)) in copies.iter().zip(renames) {
        let mut keep = slots.outputs.clone();
        keep.extend(copy_refs);
        let got = sim.state().reduced_density(&keep)?;
        distances.push(trace_distance_full(&got, &tgt)?);
    }
    Ok(NfoldReport {
        distances,
        epsilon: t.epsilon,
    })
}
