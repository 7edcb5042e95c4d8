//! Classical functions, classical protocols and their information cost.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hilbert::{ChannelOp, Holder, JointDistribution, Register, RegisterSystem, StateVector};
use crate::protocol::{ProtocolInput, ProtocolSpec, Simulation};

/// Largest joint table materialised by the information-cost routines.
pub const MAX_TABLE: usize = 1_000_000;

/// Pair of total functions `f_A, f_B : X × Y -> outputs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalFunctionPair {
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
    pub nb: usize,
    /// Row-major tables indexed by `x * ny + y`.
    pub f_a: Vec<usize>,
    pub f_b: Vec<usize>,
}

impl ClassicalFunctionPair {
    pub fn new(nx: usize, ny: usize, na: usize, nb: usize, f_a: Vec<usize>, f_b: Vec<usize>) -> Result<Self> {
        let n = nx * ny;
        if f_a.len() != n || f_b.len() != n {
            return Err(Error::InvalidChannel(format!(
                "function tables must have {n} entries, found {} and {}",
                f_a.len(),
                f_b.len()
            )));
        }
        if let Some(v) = f_a.iter().find(|&&v| v >= na) {
            return Err(Error::InvalidChannel(format!("f_A value {v} outside alphabet of size {na}")));
        }
        if let Some(v) = f_b.iter().find(|&&v| v >= nb) {
            return Err(Error::InvalidChannel(format!("f_B value {v} outside alphabet of size {nb}")));
        }
        Ok(Self { nx, ny, na, nb, f_a, f_b })
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        na: usize,
        nb: usize,
        fa: impl Fn(usize, usize) -> usize,
        fb: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let mut ta = Vec::with_capacity(nx * ny);
        let mut tb = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                ta.push(fa(x, y));
                tb.push(fb(x, y));
            }
        }
        Self::new(nx, ny, na, nb, ta, tb)
    }

    /// Both parties output the same single-valued function.
    pub fn symmetric(nx: usize, ny: usize, nout: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        Self::from_fn(nx, ny, nout, nout, &f, &f)
    }

    pub fn and() -> Self {
        Self::symmetric(2, 2, 2, |x, y| x & y).expect("bits")
    }

    /// `DISJ_n(x, y) = ¬ ∨_i (x_i ∧ y_i)` on n-bit strings read as integers.
    pub fn disjointness(n: usize) -> Result<Self> {
        let size = 1usize
            .checked_shl(n as u32)
            .filter(|&s| s * s <= MAX_TABLE)
            .ok_or_else(|| Error::TooLarge {
                what: format!("DISJ_{n} table"),
                size: 1u128 << (2 * n.min(60)),
                limit: MAX_TABLE as u128,
            })?;
        Self::symmetric(size, size, 2, |x, y| usize::from(x & y == 0))
    }

    pub fn constant(nx: usize, ny: usize, a: usize, b: usize) -> Result<Self> {
        Self::from_fn(nx, ny, a + 1, b + 1, |_, _| a, |_, _| b)
    }

    pub fn eval(&self, x: usize, y: usize) -> (usize, usize) {
        let i = x * self.ny + y;
        (self.f_a[i], self.f_b[i])
    }
}

fn product_dim(regs: &[Register]) -> usize {
    regs.iter().map(|r| r.dim).product()
}

/// Channel `|x,y> -> |f_A(x,y)> ⊗ |f_B(x,y)>` on basis inputs, dilated by
/// adding the value into zeroed outputs and moving `x, y` into a traced copy.
pub fn function_channel(
    f: &ClassicalFunctionPair,
    a_in: &[Register],
    b_in: &[Register],
    a_out: &[Register],
    b_out: &[Register],
) -> Result<ChannelOp> {
    if product_dim(a_in) != f.nx || product_dim(b_in) != f.ny {
        return Err(Error::DimMismatch("input registers do not match the function's domain".into()));
    }
    if product_dim(a_out) != f.na || product_dim(b_out) != f.nb {
        return Err(Error::DimMismatch("output registers do not match the function's range".into()));
    }
    let mut inputs = a_in.to_vec();
    inputs.extend(b_in.iter().cloned());
    let mut outputs = a_out.to_vec();
    outputs.extend(b_out.iter().cloned());
    let taken: std::collections::HashSet<String> =
        inputs.iter().chain(&outputs).map(|r| r.name.clone()).collect();
    let anc = crate::protocol::fresh_name("fanc", &taken);
    let copy = crate::protocol::fresh_name("fcopy", &taken);
    ChannelOp::from_basis_function(
        inputs,
        outputs,
        |i| {
            let (a, b) = f.eval(i / f.ny, i % f.ny);
            a * f.nb + b
        },
        &anc,
        &copy,
    )
}

/// Mixed-radix digits of `value`, most significant first.
pub fn digits(mut value: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = value % dims[k];
        value /= dims[k];
    }
    out
}

/// Basis input `|x>_{A_in} |y>_{B_in}` for a protocol.
pub fn basis_input(p: &ProtocolSpec, x: usize, y: usize) -> Result<ProtocolInput> {
    let mut regs = p.a_in.clone();
    regs.extend(p.b_in.iter().cloned());
    let mut holders = vec![Holder::Alice; p.a_in.len()];
    holders.extend(vec![Holder::Bob; p.b_in.len()]);
    let sys = RegisterSystem::new(regs, holders)?;
    let mut d = digits(x, &p.a_in.iter().map(|r| r.dim).collect::<Vec<_>>());
    d.extend(digits(y, &p.b_in.iter().map(|r| r.dim).collect::<Vec<_>>()));
    Ok(ProtocolInput::pure(StateVector::basis(sys, &d)?))
}

/// `Σ μ(x,y) Pr[measured outputs ≠ (f_A, f_B)]`, with outputs measured in
/// the computational basis of `A_out` and `B_out`.
pub fn failure_probability(p: &ProtocolSpec, f: &ClassicalFunctionPair, mu: &JointDistribution) -> Result<f64> {
    if product_dim(&p.a_in) != f.nx || product_dim(&p.b_in) != f.ny || mu.nx != f.nx || mu.ny != f.ny {
        return Err(Error::DimMismatch("input alphabets of protocol, function and distribution differ".into()));
    }
    if product_dim(&p.a_out) != f.na || product_dim(&p.b_out) != f.nb {
        return Err(Error::DimMismatch("protocol outputs do not match the function's alphabets".into()));
    }
    let mut fail = 0.0;
    for (x, y) in mu.support() {
        let out = Simulation::start(p, &basis_input(p, x, y)?)?.finish()?;
        let out = out.permute(&p.output_names())?;
        let (a, b) = f.eval(x, y);
        let correct = out.matrix()[(a * f.nb + b, a * f.nb + b)].re;
        fail += mu.p(x, y) * (1.0 - correct);
    }
    Ok(fail.clamp(0.0, 1.0))
}

/// One message of a classical protocol: a conditional distribution over
/// `alphabet` given the speaker's input, the public randomness and all
/// earlier messages.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageKernel {
    pub alphabet: usize,
    /// Indexed by `((input * n_r + r) * n_prior + prior) * alphabet + m`,
    /// where `prior` is the mixed-radix index of earlier messages.
    pub table: Vec<f64>,
    /// Bit length of each symbol; defaults to `ceil(log2 alphabet)`.
    pub lengths: Option<Vec<f64>>,
}

impl MessageKernel {
    pub fn symbol_length(&self, m: usize) -> f64 {
        match &self.lengths {
            Some(l) => l[m],
            None => (self.alphabet as f64).log2().ceil(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalProtocol {
    pub nx: usize,
    pub ny: usize,
    /// Distribution of the public randomness `R`.
    pub randomness: Vec<f64>,
    /// `M_1 ... M_N`; odd messages are Alice's.
    pub messages: Vec<MessageKernel>,
}

/// Communication cost, worst case and μ-average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunicationCost {
    pub max: f64,
    pub average: f64,
}

impl ClassicalProtocol {
    pub fn new(nx: usize, ny: usize, randomness: Vec<f64>, messages: Vec<MessageKernel>) -> Result<Self> {
        let p = Self {
            nx,
            ny,
            randomness,
            messages,
        };
        p.validate()?;
        Ok(p)
    }

    /// Protocol whose `i`-th message is a deterministic function of the
    /// speaker's input, randomness and prior messages.
    pub fn deterministic(
        nx: usize,
        ny: usize,
        randomness: Vec<f64>,
        alphabets: &[usize],
        f: impl Fn(usize, usize, usize, &[usize]) -> usize,
    ) -> Result<Self> {
        let nr = randomness.len();
        let mut messages = Vec::new();
        for (k, &alphabet) in alphabets.iter().enumerate() {
            let nin = if k % 2 == 0 { nx } else { ny };
            let prior_dims = &alphabets[..k];
            let n_prior: usize = prior_dims.iter().product();
            let mut table = vec![0.0; nin * nr * n_prior * alphabet];
            for input in 0..nin {
                for r in 0..nr {
                    for prior in 0..n_prior {
                        let m = f(k + 1, input, r, &digits(prior, prior_dims));
                        if m >= alphabet {
                            return Err(Error::InvalidDistribution(format!("message {} value {m} out of range", k + 1)));
                        }
                        table[((input * nr + r) * n_prior + prior) * alphabet + m] = 1.0;
                    }
                }
            }
            messages.push(MessageKernel {
                alphabet,
                table,
                lengths: None,
            });
        }
        Self::new(nx, ny, randomness, messages)
    }

    pub fn alphabets(&self) -> Vec<usize> {
        self.messages.iter().map(|m| m.alphabet).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let tol = 1e-12;
        let s: f64 = self.randomness.iter().sum();
        if self.randomness.is_empty() || self.randomness.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution("randomness is not a distribution".into()));
        }
        let nr = self.randomness.len();
        let mut n_prior = 1usize;
        for (k, m) in self.messages.iter().enumerate() {
            let nin = if k % 2 == 0 { self.nx } else { self.ny };
            let rows = nin * nr * n_prior;
            if m.alphabet == 0 || m.table.len() != rows * m.alphabet {
                return Err(Error::InvalidDistribution(format!(
                    "message {} kernel has {} entries, expected {}",
                    k + 1,
                    m.table.len(),
                    rows * m.alphabet
                )));
            }
            for (row, chunk) in m.table.chunks(m.alphabet).enumerate() {
                let s: f64 = chunk.iter().sum();
                if chunk.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > tol {
                    return Err(Error::InvalidDistribution(format!(
                        "message {} kernel row {row} sums to {s}",
                        k + 1
                    )));
                }
            }
            if let Some(l) = &m.lengths {
                if l.len() != m.alphabet {
                    return Err(Error::InvalidDistribution(format!("message {} has wrong length table", k + 1)));
                }
            }
            n_prior = n_prior.saturating_mul(m.alphabet);
        }
        Ok(())
    }

    /// Exact joint distribution over `(X, Y, R, M_1, ..., M_N)`.
    pub fn joint(&self, mu: &JointDistribution) -> Result<JointTable> {
        self.validate()?;
        if mu.nx != self.nx || mu.ny != self.ny {
            return Err(Error::DimMismatch("input distribution does not match the protocol".into()));
        }
        let nr = self.randomness.len();
        let size = self
            .messages
            .iter()
            .try_fold(self.nx * self.ny * nr, |acc, m| acc.checked_mul(m.alphabet))
            .filter(|&s| s <= MAX_TABLE);
        if size.is_none() {
            return Err(Error::TooLarge {
                what: "classical joint table".into(),
                size: u128::MAX,
                limit: MAX_TABLE as u128,
            });
        }
        let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
        for (x, y) in mu.support() {
            for (r, &pr) in self.randomness.iter().enumerate() {
                if pr > 0.0 {
                    rows.push((vec![x, y, r], mu.p(x, y) * pr));
                }
            }
        }
        for (k, m) in self.messages.iter().enumerate() {
            let n_prior: usize = self.messages[..k].iter().map(|m| m.alphabet).product();
            let mut next = Vec::with_capacity(rows.len() * m.alphabet);
            for (vals, p) in rows {
                let input = if k % 2 == 0 { vals[0] } else { vals[1] };
                let prior = vals[3..]
                    .iter()
                    .zip(&self.messages)
                    .fold(0usize, |acc, (&v, mm)| acc * mm.alphabet + v);
                let base = ((input * nr + vals[2]) * n_prior + prior) * m.alphabet;
                for sym in 0..m.alphabet {
                    let q = m.table[base + sym];
                    if q > 0.0 {
                        let mut v = vals.clone();
                        v.push(sym);
                        next.push((v, p * q));
                    }
                }
            }
            rows = next;
        }
        Ok(JointTable { rows })
    }

    /// `CC` as max and μ-average transcript length over events of
    /// non-zero probability.
    pub fn communication_cost(&self, mu: &JointDistribution) -> Result<CommunicationCost> {
        let t = self.joint(mu)?;
        let mut max: f64 = 0.0;
        let mut average = 0.0;
        for (vals, p) in &t.rows {
            let len: f64 = self
                .messages
                .iter()
                .zip(&vals[3..])
                .map(|(m, &s)| m.symbol_length(s))
                .sum();
            max = max.max(len);
            average += p * len;
        }
        Ok(CommunicationCost { max, average })
    }
}

/// Variable indices in a [`JointTable`].
pub const VAR_X: usize = 0;
pub const VAR_Y: usize = 1;
pub const VAR_R: usize = 2;

/// Index of message `i` (1-based).
pub fn var_message(i: usize) -> usize {
    2 + i
}

/// Sparse joint distribution: outcome tuples with positive probability.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub rows: Vec<(Vec<usize>, f64)>,
}

impl JointTable {
    /// Shannon entropy of the marginal on `vars` (duplicates ignored, so a
    /// copy of a variable can be named by its original index).
    pub fn entropy(&self, vars: &[usize]) -> f64 {
        let mut vs = vars.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if vs.is_empty() {
            return 0.0;
        }
        let mut marg: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (vals, p) in &self.rows {
            *marg.entry(vs.iter().map(|&v| vals[v]).collect()).or_insert(0.0) += p;
        }
        crate::linalg::shannon_bits(marg.into_values())
    }

    /// `I(A;B|C)` with each argument a list of variable indices.
    pub fn cond_mutual_info(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let join = |xs: &[&[usize]]| xs.iter().flat_map(|x| x.iter().copied()).collect::<Vec<_>>();
        self.entropy(&join(&[a, c])) + self.entropy(&join(&[b, c])) - self.entropy(c) - self.entropy(&join(&[a, b, c]))
    }
}

fn transcript_vars(n: usize) -> Vec<usize> {
    let mut v = vec![VAR_R];
    v.extend((1..=n).map(var_message));
    v
}

/// `IC_μ = I(Π; Y | X) + I(Π; X | Y)` with the transcript `Π` consisting of
/// the public randomness and all messages.
pub fn classical_ic(cp: &ClassicalProtocol, mu: &JointDistribution) -> Result<f64> {
    let t = cp.joint(mu)?;
    let pi = transcript_vars(cp.messages.len());
    Ok(t.cond_mutual_info(&pi, &[VAR_Y], &[VAR_X]) + t.cond_mutual_info(&pi, &[VAR_X], &[VAR_Y]))
}

/// Per-message terms of the message-local rewriting:
/// odd `i`: `I(M_i^B; X R^A M_{<i}^A | Y R^B M_{<i}^B)`, even `i` symmetric.
/// Copies held by the two parties alias their originals.
pub fn classical_ic_prime_terms(cp: &ClassicalProtocol, mu: &JointDistribution) -> Result<Vec<f64>> {
    let t = cp.joint(mu)?;
    let mut terms = Vec::new();
    for i in 1..=cp.messages.len() {
        let (sender_in, receiver_in) = if i % 2 == 1 { (VAR_X, VAR_Y) } else { (VAR_Y, VAR_X) };
        let mut sender = vec![sender_in, VAR_R];
        let mut receiver = vec![receiver_in, VAR_R];
        for j in 1..i {
            sender.push(var_message(j));
            receiver.push(var_message(j));
        }
        terms.push(t.cond_mutual_info(&[var_message(i)], &sender, &receiver));
    }
    Ok(terms)
}

pub fn classical_ic_prime(cp: &ClassicalProtocol, mu: &JointDistribution) -> Result<f64> {
    Ok(classical_ic_prime_terms(cp, mu)?.iter().sum())
}
