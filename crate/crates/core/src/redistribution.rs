//! Rates for state redistribution and the per-message compression budget.
//!
//! For a pure state on `A ⊗ B ⊗ C ⊗ R`, moving `C` from the holder of `A`
//! to the holder of `B` is possible at quantum rate above `½ I(C;R|B)` with
//! net entanglement `½ I(C;A) - ½ I(C;B)` (positive means consumed).

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::measures::{cond_entropy, cond_mutual_info_with, mutual_info};
use crate::protocol::{ProtocolInput, ProtocolSpec, Simulation};
use crate::Tolerances;

/// Rates for one message (empty when reporting a single redistribution).
#[derive(Debug, Clone, PartialEq)]
pub struct MessageRate {
    pub step: usize,
    pub message_dim: usize,
    /// `½ I(C_i; R | receiver)`.
    pub q_min: f64,
    /// `½ I(C_i; sender) - ½ I(C_i; receiver)`.
    pub e_net: f64,
    /// Quantum rate assigned to the message, `q_min + δ/(2M)`.
    pub q: f64,
    /// Entanglement assigned, `max(0, e_net) + δ/(2M)`.
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub q_min: f64,
    pub e_net: f64,
    pub h_c_given_b: f64,
    pub per_message: Vec<MessageRate>,
    /// `Σ_i Q_i`.
    pub q_sum: f64,
    /// Per-copy rounding loss `M/n` at the smallest blocklength
    /// `n = 2M/δ`, i.e. `δ/2`.
    pub rounding: f64,
    /// Communication rate per copy, `q_sum + rounding`; `q_min` for a
    /// single redistribution.
    pub total_rate: f64,
}

impl RateReport {
    /// Whether `(q, e)` lies in the achievable region `Q > q_min`,
    /// `Q + E > H(C|B)`.
    pub fn achievable(&self, q: f64, e: f64) -> bool {
        q > self.q_min && q + e > self.h_c_given_b
    }
}

fn names(xs: &[impl AsRef<str>]) -> Vec<String> {
    xs.iter().map(|x| x.as_ref().to_string()).collect()
}

/// Single-shot redistribution rates for a pure state split into `a, b, c, r`.
pub fn redist_rates<S: AsRef<str>>(s: &StateVector, a: &[S], b: &[S], c: &[S], r: &[S]) -> Result<RateReport> {
    redist_rates_with(s, a, b, c, r, &Tolerances::default())
}

pub fn redist_rates_with<S: AsRef<str>>(
    s: &StateVector,
    a: &[S],
    b: &[S],
    c: &[S],
    r: &[S],
    tol: &Tolerances,
) -> Result<RateReport> {
    let (a, b, c, r) = (names(a), names(b), names(c), names(r));
    if (s.norm() - 1.0).abs() > tol.norm {
        return Err(Error::InvalidState(format!("state has norm {} and is not pure", s.norm())));
    }
    let mut seen = HashSet::new();
    for n in a.iter().chain(&b).chain(&c).chain(&r) {
        if !s.system().contains(n) {
            return Err(Error::UnknownRegister(n.clone()));
        }
        if !seen.insert(n.clone()) {
            return Err(Error::Overlap(n.clone()));
        }
    }
    if let Some(missing) = s.system().names().into_iter().find(|n| !seen.contains(n)) {
        return Err(Error::UnknownRegister(format!("{missing} is not assigned to A, B, C or R")));
    }
    let q_min = 0.5 * cond_mutual_info_with(s, &c, &r, &b, tol)?;
    let e_net = 0.5 * mutual_info(s, &c, &a)? - 0.5 * mutual_info(s, &c, &b)?;
    let h_c_given_b = cond_entropy(s, &c, &b)?;
    Ok(RateReport {
        q_min,
        e_net,
        h_c_given_b,
        per_message: Vec::new(),
        q_sum: q_min,
        rounding: 0.0,
        total_rate: q_min,
    })
}

/// Budget for compressing each message of `p` by state redistribution:
/// `Q_i = ½ I(C_i;R|receiver) + δ/(2M)` and
/// `F_i = ½ max(0, I(C_i;sender) - I(C_i;receiver)) + δ/(2M)`.
/// The total rate adds the rounding loss, so it equals `QIC + δ`.
pub fn compression_budget(p: &ProtocolSpec, input: &ProtocolInput, delta: f64) -> Result<RateReport> {
    if !(delta > 0.0) {
        return Err(Error::Construction(format!("delta must be positive, got {delta}")));
    }
    let dims = p.schedule()?.message_dims;
    let m = p.message_count();
    let share = delta / (2.0 * m as f64);
    let mut sim = Simulation::start(p, input)?;
    let mut per_message = Vec::with_capacity(m);
    let mut h_total = 0.0;
    while sim.steps_done() < m {
        sim.advance()?;
        let part = sim.partition().expect("message step");
        let r = redist_rates(
            sim.state(),
            &part.sender_holding,
            &part.receiver_holding,
            &part.message,
            &part.reference,
        )?;
        h_total += r.h_c_given_b;
        per_message.push(MessageRate {
            step: part.step,
            message_dim: dims[part.step - 1],
            q_min: r.q_min,
            e_net: r.e_net,
            q: r.q_min + share,
            f: r.e_net.max(0.0) + share,
        });
    }
    let q_sum: f64 = per_message.iter().map(|x| x.q).sum();
    Ok(RateReport {
        q_min: per_message.iter().map(|x| x.q_min).sum(),
        e_net: per_message.iter().map(|x| x.e_net).sum(),
        h_c_given_b: h_total,
        per_message,
        q_sum,
        rounding: delta / 2.0,
        total_rate: q_sum + delta / 2.0,
    })
}
