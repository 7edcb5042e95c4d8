//! Seeded random instances: protocols, states, distributions and
//! classical protocols. Everything here is deterministic given the RNG.

use rand::Rng;

use crate::classical::{ClassicalProtocol, MessageKernel};
use crate::error::{Error, Result};
use crate::hilbert::{
    complex_gaussian, ginibre, haar_unitary_matrix, DensityOperator, Holder, JointDistribution, Register,
    RegisterSystem, StateVector, UnitaryOp,
};
use crate::linalg::CMatrix;
use crate::protocol::{ProtocolSpec, Step};
use crate::C64;

/// Shape of a random protocol in the strict alternating schedule: each
/// step applies one Haar unitary to the speaker's entire holding.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProtocolConfig {
    pub a_in: Vec<Register>,
    pub b_in: Vec<Register>,
    pub a_out: Vec<Register>,
    pub b_out: Vec<Register>,
    /// Dimensions of Alice's and Bob's halves of the preshared state.
    pub t_a: usize,
    pub t_b: usize,
    /// `dim C_1 ... dim C_M`.
    pub message_dims: Vec<usize>,
    /// Prepended to every generated register name.
    pub prefix: String,
}

impl RandomProtocolConfig {
    /// Qubit registers throughout: one input and one output qubit per
    /// side, one qubit of entanglement per side, qubit messages.
    pub fn qubits(messages: usize) -> Self {
        Self {
            a_in: vec![Register::new("xa", 2)],
            b_in: vec![Register::new("xb", 2)],
            a_out: vec![Register::new("ya", 2)],
            b_out: vec![Register::new("yb", 2)],
            t_a: 2,
            t_b: 2,
            message_dims: vec![2; messages],
            prefix: String::new(),
        }
    }
}

fn dim(regs: &[Register]) -> usize {
    regs.iter().map(|r| r.dim).product()
}

fn divide(total: usize, part: usize, what: &str) -> Result<usize> {
    if part == 0 || total % part != 0 {
        return Err(Error::Construction(format!("{what}: {part} does not divide {total}")));
    }
    Ok(total / part)
}

/// Haar-random pure state on `system`.
pub fn random_pure_state<R: Rng + ?Sized>(system: RegisterSystem, rng: &mut R) -> StateVector {
    let amps: Vec<C64> = (0..system.total_dim()).map(|_| complex_gaussian(rng)).collect();
    StateVector::normalized(system, amps).expect("nonzero with probability one")
}

/// Random density operator of the given rank (`G G^† / Tr`, `G` Ginibre).
pub fn random_density<R: Rng + ?Sized>(system: RegisterSystem, rank: usize, rng: &mut R) -> DensityOperator {
    let d = system.total_dim();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = crate::linalg::trace(&m).re;
    DensityOperator::new(system, m * C64::new(1.0 / tr, 0.0)).expect("positive by construction")
}

/// Random distribution on `nx × ny`; with `support` given, zero elsewhere.
pub fn random_distribution<R: Rng + ?Sized>(
    nx: usize,
    ny: usize,
    support: Option<&[(usize, usize)]>,
    rng: &mut R,
) -> JointDistribution {
    let mut probs = vec![0.0; nx * ny];
    match support {
        Some(s) => {
            for &(x, y) in s {
                probs[x * ny + y] = rng.random::<f64>() + 0.05;
            }
        }
        None => {
            for p in probs.iter_mut() {
                *p = rng.random::<f64>() + 0.05;
            }
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    JointDistribution::new(nx, ny, probs).expect("normalised")
}

fn haar_op<R: Rng + ?Sized>(inputs: Vec<Register>, outputs: Vec<Register>, rng: &mut R) -> UnitaryOp {
    let d = dim(&inputs);
    let m: CMatrix = haar_unitary_matrix(d, rng);
    UnitaryOp::unchecked(inputs, outputs, m).expect("dimensions agree")
}

/// Random protocol with the register layout of `cfg`.
pub fn random_protocol<R: Rng + ?Sized>(cfg: &RandomProtocolConfig, rng: &mut R) -> Result<ProtocolSpec> {
    let m = cfg.message_dims.len();
    if m < 2 || m % 2 != 0 {
        return Err(Error::Construction(format!("random protocols need an even M ≥ 2, got {m}")));
    }
    let name = |s: String| format!("{}{s}", cfg.prefix);
    let ta = Register::new(name("ta".into()), cfg.t_a);
    let tb = Register::new(name("tb".into()), cfg.t_b);
    let preshared = random_pure_state(
        RegisterSystem::new(vec![ta.clone(), tb.clone()], vec![Holder::Alice, Holder::Bob])?,
        rng,
    );

    // Holdings just before each party's next step.
    let mut alice: Vec<Register> = cfg.a_in.iter().cloned().chain([ta]).collect();
    let mut bob: Vec<Register> = cfg.b_in.iter().cloned().chain([tb]).collect();
    let mut steps = Vec::with_capacity(m + 1);
    for i in 1..=m + 1 {
        let alice_turn = i % 2 == 1;
        let holding = if alice_turn { &mut alice } else { &mut bob };
        let total = dim(holding);
        let (outputs, message) = if i == m + 1 {
            let rest = divide(total, dim(&cfg.a_out), "Alice's final holding and A_out")?;
            let mut outs = cfg.a_out.clone();
            outs.push(Register::new(name("ap".into()), rest));
            (outs, None)
        } else if i == m {
            let c = Register::new(name(format!("c{i}")), cfg.message_dims[i - 1]);
            let rest = divide(total, dim(&cfg.b_out) * c.dim, "Bob's final holding, B_out and C_M")?;
            let mut outs = cfg.b_out.clone();
            outs.push(Register::new(name("bp".into()), rest));
            outs.push(c.clone());
            (outs, Some(c))
        } else {
            let c = Register::new(name(format!("c{i}")), cfg.message_dims[i - 1]);
            let mem_name = if alice_turn { format!("a{i}") } else { format!("b{i}") };
            let mem = Register::new(name(mem_name), divide(total, c.dim, "holding and message")?);
            (vec![mem, c.clone()], Some(c))
        };
        let op = haar_op(holding.clone(), outputs.clone(), rng);
        let kept: Vec<Register> = outputs
            .into_iter()
            .filter(|r| message.as_ref().map_or(true, |c| c.name != r.name))
            .collect();
        *holding = kept;
        if let Some(c) = &message {
            // The receiver gets the message before their next step.
            let other = if alice_turn { &mut bob } else { &mut alice };
            other.push(c.clone());
        }
        steps.push(Step::new(vec![op], message.into_iter().map(|c| c.name).collect()));
    }
    let p = ProtocolSpec {
        a_in: cfg.a_in.clone(),
        b_in: cfg.b_in.clone(),
        preshared,
        steps,
        a_out: cfg.a_out.clone(),
        b_out: cfg.b_out.clone(),
    };
    p.check()?;
    Ok(p)
}

/// Random classical protocol; each kernel row is deterministic with
/// probability `p_det`, otherwise a random distribution.
pub fn random_classical_protocol<R: Rng + ?Sized>(
    nx: usize,
    ny: usize,
    n_r: usize,
    alphabets: &[usize],
    p_det: f64,
    rng: &mut R,
) -> Result<ClassicalProtocol> {
    let mut randomness: Vec<f64> = (0..n_r.max(1)).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = randomness.iter().sum();
    randomness.iter_mut().for_each(|p| *p /= s);
    let nr = randomness.len();
    let mut messages = Vec::with_capacity(alphabets.len());
    let mut n_prior = 1usize;
    for (k, &a) in alphabets.iter().enumerate() {
        let nin = if k % 2 == 0 { nx } else { ny };
        let rows = nin * nr * n_prior;
        let mut table = Vec::with_capacity(rows * a);
        for _ in 0..rows {
            let mut row = vec![0.0; a];
            if rng.random::<f64>() < p_det {
                row[rng.random_range(0..a)] = 1.0;
            } else {
                row.iter_mut().for_each(|p| *p = rng.random::<f64>() + 0.01);
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= s);
            }
            table.extend(row);
        }
        messages.push(MessageKernel {
            alphabet: a,
            table,
            lengths: None,
        });
        n_prior *= a;
    }
    ClassicalProtocol::new(nx, ny, randomness, messages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::rng_from_seed;
    use crate::protocol::{qcc, run, ProtocolInput};

    #[test]
    fn random_protocols_validate_and_preserve_norm() {
        let mut rng = rng_from_seed(3);
        for m in [2, 4] {
            let p = random_protocol(&RandomProtocolConfig::qubits(m), &mut rng).unwrap();
            assert!(p.validate().is_empty());
            assert_eq!(p.message_count(), m);
            assert!((qcc(&p).unwrap() - m as f64).abs() < 1e-12);
            let sys = RegisterSystem::new(p.a_in.iter().chain(&p.b_in).cloned().collect(), vec![Holder::Alice, Holder::Bob])
                .unwrap();
            let rho = random_density(sys, 2, &mut rng);
            let t = run(&p, &ProtocolInput::from_density(&rho, "R").unwrap()).unwrap();
            for s in &t.states {
                assert!((s.norm() - 1.0).abs() < 1e-12);
            }
            assert!((t.output.trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_protocol(&RandomProtocolConfig::qubits(2), &mut rng_from_seed(9)).unwrap();
        let b = random_protocol(&RandomProtocolConfig::qubits(2), &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn classical_protocols_are_normalised() {
        let mut rng = rng_from_seed(5);
        let cp = random_classical_protocol(3, 2, 2, &[2, 3, 2], 0.3, &mut rng).unwrap();
        assert!(cp.validate().is_ok());
    }

    #[test]
    fn restricted_support() {
        let mut rng = rng_from_seed(1);
        let d = random_distribution(2, 2, Some(&[(0, 0), (1, 0)]), &mut rng);
        assert_eq!(d.support(), vec![(0, 0), (1, 0)]);
    }
}
