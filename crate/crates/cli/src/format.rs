//! JSON file formats. Every file holds one top-level object keyed by its
//! kind, e.g. `{"protocol": {...}}`. Complex numbers are `[re, im]` pairs
//! and matrices are lists of rows in the global basis order, where the
//! first listed register is the most significant digit.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use qicost_core::classical::{ClassicalFunctionPair, ClassicalProtocol, MessageKernel};
use qicost_core::hilbert::JointDistribution;
use qicost_core::linalg::CMatrix;
use qicost_core::protocol::Step;
use qicost_core::{
    ChannelOp, DensityOperator, Holder, ProtocolSpec, Register, RegisterSystem, StateVector, Tolerances, UnitaryOp,
    C64,
};

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterFile {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub registers: Vec<RegisterFile>,
    /// Pure state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Complex>>,
    /// Mixed state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpFile {
    pub inputs: Vec<RegisterFile>,
    pub outputs: Vec<RegisterFile>,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub ops: Vec<OpFile>,
    #[serde(default)]
    pub message: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub a_in: Vec<RegisterFile>,
    pub b_in: Vec<RegisterFile>,
    pub preshared: StateFile,
    pub steps: Vec<StepFile>,
    pub a_out: Vec<RegisterFile>,
    pub b_out: Vec<RegisterFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub inputs: Vec<RegisterFile>,
    pub outputs: Vec<RegisterFile>,
    pub kraus: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub nx: usize,
    pub ny: usize,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    pub alphabet: usize,
    pub table: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalProtocolFile {
    pub nx: usize,
    pub ny: usize,
    pub randomness: Vec<f64>,
    pub messages: Vec<KernelFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionPairFile {
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
    pub nb: usize,
    pub f_a: Vec<usize>,
    pub f_b: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Document {
    Protocol(ProtocolFile),
    State(StateFile),
    Channel(ChannelFile),
    Distribution(DistributionFile),
    ClassicalProtocol(ClassicalProtocolFile),
    FunctionPair(FunctionPairFile),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Protocol(_) => "protocol",
            Document::State(_) => "state",
            Document::Channel(_) => "channel",
            Document::Distribution(_) => "distribution",
            Document::ClassicalProtocol(_) => "classical_protocol",
            Document::FunctionPair(_) => "function_pair",
        }
    }
}

/// A state file holds either a pure vector or a density operator.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl AnyState {
    pub fn system(&self) -> &RegisterSystem {
        match self {
            AnyState::Pure(s) => s.system(),
            AnyState::Mixed(d) => d.system(),
        }
    }

    pub fn density(&self) -> DensityOperator {
        match self {
            AnyState::Pure(s) => s.density(),
            AnyState::Mixed(d) => d.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Conversions

fn c(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn z(c: &C64) -> Complex {
    [c.re, c.im]
}

fn matrix_from(m: &Matrix, what: &str) -> anyhow::Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if let Some(i) = m.iter().position(|r| r.len() != cols) {
        bail!("{what}: row {i} has {} entries, expected {cols}", m[i].len());
    }
    let flat: Vec<C64> = m.iter().flatten().copied().map(c).collect();
    Ok(CMatrix::from_row_slice(rows, cols, &flat))
}

fn matrix_to(m: &CMatrix) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| z(&m[(i, j)])).collect()).collect()
}

fn registers_from(rs: &[RegisterFile]) -> Vec<Register> {
    rs.iter().map(|r| Register::new(r.name.clone(), r.dim)).collect()
}

fn registers_to(rs: &[Register]) -> Vec<RegisterFile> {
    rs.iter()
        .map(|r| RegisterFile {
            name: r.name.clone(),
            dim: r.dim,
            holder: None,
        })
        .collect()
}

fn system_from(rs: &[RegisterFile]) -> anyhow::Result<RegisterSystem> {
    let holders = rs
        .iter()
        .map(|r| match &r.holder {
            None => Ok(Holder::Alice),
            Some(h) => Holder::parse(h).ok_or_else(|| anyhow!("register {}: unknown holder {h:?}", r.name)),
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(RegisterSystem::new(registers_from(rs), holders)?)
}

fn system_to(s: &RegisterSystem) -> Vec<RegisterFile> {
    s.registers()
        .iter()
        .zip(s.holders())
        .map(|(r, h)| RegisterFile {
            name: r.name.clone(),
            dim: r.dim,
            holder: Some(h.as_str().to_string()),
        })
        .collect()
}

pub fn state_from(f: &StateFile, tol: &Tolerances) -> anyhow::Result<AnyState> {
    let sys = system_from(&f.registers)?;
    match (&f.amplitudes, &f.matrix) {
        (Some(a), None) => {
            let amps = a.iter().copied().map(c).collect();
            Ok(AnyState::Pure(StateVector::with_tolerances(sys, amps, tol)?))
        }
        (None, Some(m)) => Ok(AnyState::Mixed(DensityOperator::with_tolerances(
            sys,
            matrix_from(m, "matrix")?,
            tol,
        )?)),
        _ => bail!("a state needs exactly one of `amplitudes` and `matrix`"),
    }
}

pub fn state_to(s: &AnyState) -> StateFile {
    match s {
        AnyState::Pure(v) => StateFile {
            registers: system_to(v.system()),
            amplitudes: Some(v.amplitudes().iter().map(z).collect()),
            matrix: None,
        },
        AnyState::Mixed(d) => StateFile {
            registers: system_to(d.system()),
            amplitudes: None,
            matrix: Some(matrix_to(d.matrix())),
        },
    }
}

pub fn protocol_from(f: &ProtocolFile, tol: &Tolerances) -> anyhow::Result<ProtocolSpec> {
    let preshared = match state_from(&f.preshared, tol).context("preshared")? {
        AnyState::Pure(s) => s,
        AnyState::Mixed(_) => bail!("preshared: the preshared state must be pure (give `amplitudes`)"),
    };
    let mut steps = Vec::with_capacity(f.steps.len());
    for (i, s) in f.steps.iter().enumerate() {
        let mut ops = Vec::with_capacity(s.ops.len());
        for (k, op) in s.ops.iter().enumerate() {
            let where_ = format!("steps[{i}].ops[{k}]");
            let m = matrix_from(&op.matrix, &where_)?;
            // Unitarity is reported by validation, with the step named.
            let u = UnitaryOp::unchecked(registers_from(&op.inputs), registers_from(&op.outputs), m)
                .with_context(|| where_.clone())?;
            ops.push(u);
        }
        steps.push(Step::new(ops, s.message.clone()));
    }
    let p = ProtocolSpec {
        a_in: registers_from(&f.a_in),
        b_in: registers_from(&f.b_in),
        preshared,
        steps,
        a_out: registers_from(&f.a_out),
        b_out: registers_from(&f.b_out),
    };
    Ok(p)
}

pub fn protocol_to(p: &ProtocolSpec) -> ProtocolFile {
    ProtocolFile {
        a_in: registers_to(&p.a_in),
        b_in: registers_to(&p.b_in),
        preshared: state_to(&AnyState::Pure(p.preshared.clone())),
        steps: p
            .steps
            .iter()
            .map(|s| StepFile {
                ops: s
                    .ops
                    .iter()
                    .map(|u| OpFile {
                        inputs: registers_to(u.inputs()),
                        outputs: registers_to(u.outputs()),
                        matrix: matrix_to(u.matrix()),
                    })
                    .collect(),
                message: s.message.clone(),
            })
            .collect(),
        a_out: registers_to(&p.a_out),
        b_out: registers_to(&p.b_out),
    }
}

pub fn channel_from(f: &ChannelFile, tol: &Tolerances) -> anyhow::Result<ChannelOp> {
    let kraus = f
        .kraus
        .iter()
        .enumerate()
        .map(|(i, k)| matrix_from(k, &format!("kraus[{i}]")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let inputs = registers_from(&f.inputs);
    let outputs = registers_from(&f.outputs);
    let taken: Vec<String> = inputs.iter().chain(&outputs).map(|r| r.name.clone()).collect();
    let pick = |base: &str| {
        let mut n = base.to_string();
        while taken.contains(&n) {
            n.push('\'');
        }
        n
    };
    Ok(ChannelOp::from_kraus_with(inputs, outputs, &kraus, &pick("env"), &pick("anc"), tol)?)
}

pub fn channel_to(ch: &ChannelOp) -> ChannelFile {
    ChannelFile {
        inputs: registers_to(ch.inputs()),
        outputs: registers_to(ch.outputs()),
        kraus: ch.kraus().iter().map(matrix_to).collect(),
    }
}

pub fn distribution_from(f: &DistributionFile, tol: &Tolerances) -> anyhow::Result<JointDistribution> {
    let d = JointDistribution::new(f.nx, f.ny, f.probs.clone())?;
    d.validate(tol.norm)?;
    Ok(d)
}

pub fn distribution_to(d: &JointDistribution) -> DistributionFile {
    DistributionFile {
        nx: d.nx,
        ny: d.ny,
        probs: d.probs.clone(),
    }
}

pub fn classical_from(f: &ClassicalProtocolFile) -> anyhow::Result<ClassicalProtocol> {
    let messages = f
        .messages
        .iter()
        .map(|k| MessageKernel {
            alphabet: k.alphabet,
            table: k.table.clone(),
            lengths: k.lengths.clone(),
        })
        .collect();
    Ok(ClassicalProtocol::new(f.nx, f.ny, f.randomness.clone(), messages)?)
}

pub fn classical_to(p: &ClassicalProtocol) -> ClassicalProtocolFile {
    ClassicalProtocolFile {
        nx: p.nx,
        ny: p.ny,
        randomness: p.randomness.clone(),
        messages: p
            .messages
            .iter()
            .map(|k| KernelFile {
                alphabet: k.alphabet,
                table: k.table.clone(),
                lengths: k.lengths.clone(),
            })
            .collect(),
    }
}

pub fn function_pair_from(f: &FunctionPairFile) -> anyhow::Result<ClassicalFunctionPair> {
    Ok(ClassicalFunctionPair::new(f.nx, f.ny, f.na, f.nb, f.f_a.clone(), f.f_b.clone())?)
}

pub fn function_pair_to(f: &ClassicalFunctionPair) -> FunctionPairFile {
    FunctionPairFile {
        nx: f.nx,
        ny: f.ny,
        na: f.na,
        nb: f.nb,
        f_a: f.f_a.clone(),
        f_b: f.f_b.clone(),
    }
}

// ---------------------------------------------------------------------------
// Files

/// Parses a document, reporting the JSON path and line of any error.
pub fn parse_document(text: &str) -> anyhow::Result<Document> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column())
    })
}

pub fn read_document(path: &Path) -> anyhow::Result<Document> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_document(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_document(path: &Path, doc: &Document) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn expect<'a>(doc: &'a Document, kind: &str, path: &Path) -> anyhow::Result<&'a Document> {
    if doc.kind() != kind {
        bail!("{} holds a {}, expected a {kind}", path.display(), doc.kind());
    }
    Ok(doc)
}

/// Loads and validates a protocol; validation findings become the error.
pub fn load_protocol(path: &Path, tol: &Tolerances) -> anyhow::Result<ProtocolSpec> {
    let doc = read_document(path)?;
    let Document::Protocol(f) = expect(&doc, "protocol", path)? else { unreachable!() };
    let p = protocol_from(f, tol).with_context(|| format!("loading {}", path.display()))?;
    let findings = p.validate_with(tol);
    if !findings.is_empty() {
        let list: Vec<String> = findings.iter().map(|f| f.to_string()).collect();
        bail!("{} is not a valid protocol:\n  {}", path.display(), list.join("\n  "));
    }
    Ok(p)
}

/// Loads a protocol without validating it.
pub fn load_protocol_unchecked(path: &Path, tol: &Tolerances) -> anyhow::Result<ProtocolSpec> {
    let doc = read_document(path)?;
    let Document::Protocol(f) = expect(&doc, "protocol", path)? else { unreachable!() };
    protocol_from(f, tol).with_context(|| format!("loading {}", path.display()))
}

pub fn load_state(path: &Path, tol: &Tolerances) -> anyhow::Result<AnyState> {
    let doc = read_document(path)?;
    let Document::State(f) = expect(&doc, "state", path)? else { unreachable!() };
    state_from(f, tol).with_context(|| format!("loading {}", path.display()))
}

pub fn load_channel(path: &Path, tol: &Tolerances) -> anyhow::Result<ChannelOp> {
    let doc = read_document(path)?;
    let Document::Channel(f) = expect(&doc, "channel", path)? else { unreachable!() };
    channel_from(f, tol).with_context(|| format!("loading {}", path.display()))
}

pub fn load_distribution(path: &Path, tol: &Tolerances) -> anyhow::Result<JointDistribution> {
    let doc = read_document(path)?;
    let Document::Distribution(f) = expect(&doc, "distribution", path)? else { unreachable!() };
    distribution_from(f, tol).with_context(|| format!("loading {}", path.display()))
}

pub fn load_classical_protocol(path: &Path) -> anyhow::Result<ClassicalProtocol> {
    let doc = read_document(path)?;
    let Document::ClassicalProtocol(f) = expect(&doc, "classical_protocol", path)? else { unreachable!() };
    classical_from(f).with_context(|| format!("loading {}", path.display()))
}

pub fn load_function_pair(path: &Path) -> anyhow::Result<ClassicalFunctionPair> {
    let doc = read_document(path)?;
    let Document::FunctionPair(f) = expect(&doc, "function_pair", path)? else { unreachable!() };
    function_pair_from(f).with_context(|| format!("loading {}", path.display()))
}

pub fn save_protocol(path: &Path, p: &ProtocolSpec) -> anyhow::Result<()> {
    write_document(path, &Document::Protocol(protocol_to(p)))
}

pub fn save_state(path: &Path, s: &AnyState) -> anyhow::Result<()> {
    write_document(path, &Document::State(state_to(s)))
}
