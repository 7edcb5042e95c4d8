//! Derived protocols: parallel composition, input freezing, coherent
//! convex mixtures, and the averaging reduction from an n-slot protocol to
//! a single-slot one.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::hilbert::{
    canonical_classical_purification, DensityOperator, Holder, JointDistribution, Register, RegisterSystem,
    StateVector, UnitaryOp,
};
use crate::protocol::{fresh_name, qic, ProtocolSpec, Step};
use crate::C64;

/// Input and output registers belonging to one logical input slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Slot {
    pub a_in: Vec<String>,
    pub b_in: Vec<String>,
    pub a_out: Vec<String>,
    pub b_out: Vec<String>,
}

impl Slot {
    /// Every input and output of `p`.
    pub fn of(p: &ProtocolSpec) -> Self {
        let n = |rs: &[Register]| rs.iter().map(|r| r.name.clone()).collect();
        Self {
            a_in: n(&p.a_in),
            b_in: n(&p.b_in),
            a_out: n(&p.a_out),
            b_out: n(&p.b_out),
        }
    }

    pub fn inputs(&self) -> Vec<String> {
        self.a_in.iter().chain(&self.b_in).cloned().collect()
    }
}

/// Which slot of a two-slot protocol is frozen. Freezing the second slot
/// hands its purifier to Alice, freezing the first hands it to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotSide {
    First,
    Second,
}

impl SlotSide {
    pub fn purifier_holder(self) -> Holder {
        match self {
            SlotSide::First => Holder::Bob,
            SlotSide::Second => Holder::Alice,
        }
    }
}

fn disjoint_names(p1: &ProtocolSpec, p2: &ProtocolSpec) -> Result<()> {
    let a = p1.register_names();
    if let Some(n) = p2.register_names().iter().find(|n| a.contains(*n)) {
        return Err(Error::NameCollision(format!("{n} appears in both protocols")));
    }
    Ok(())
}

/// Runs `p1` and `p2` side by side. While both run, message `i` is the
/// union of their messages; after the shorter one ends only the longer one
/// speaks. Register names must be disjoint (use
/// [`ProtocolSpec::with_prefix`]). The roles are swapped internally when
/// `p1` is the shorter protocol, which does not change the channel.
pub fn parallel_compose(p1: &ProtocolSpec, p2: &ProtocolSpec) -> Result<ProtocolSpec> {
    p1.check()?;
    p2.check()?;
    disjoint_names(p1, p2)?;
    let (long, short) = if p1.message_count() >= p2.message_count() {
        (p1, p2)
    } else {
        (p2, p1)
    };
    let mut steps = Vec::with_capacity(long.steps.len());
    for (k, ls) in long.steps.iter().enumerate() {
        let mut step = ls.clone();
        if let Some(ss) = short.steps.get(k) {
            step.ops.extend(ss.ops.iter().cloned());
            step.message.extend(ss.message.iter().cloned());
        }
        steps.push(step);
    }
    let cat = |a: &[Register], b: &[Register]| a.iter().chain(b).cloned().collect::<Vec<_>>();
    let p = ProtocolSpec {
        a_in: cat(&p1.a_in, &p2.a_in),
        b_in: cat(&p1.b_in, &p2.b_in),
        preshared: p1.preshared.tensor(&p2.preshared)?,
        steps,
        a_out: cat(&p1.a_out, &p2.a_out),
        b_out: cat(&p1.b_out, &p2.b_out),
    };
    p.check()?;
    Ok(p)
}

/// Freezes `slot` with the pure state `purified`, whose registers are the
/// slot's inputs plus `references`. The slot inputs join the preshared
/// state with their owners; the references go to `purifier`; the slot's
/// outputs are dropped from the output list (they become local garbage).
pub fn fix_input_purified<S: AsRef<str>>(
    p: &ProtocolSpec,
    slot: &Slot,
    purifier: Holder,
    purified: &StateVector,
    references: &[S],
) -> Result<ProtocolSpec> {
    if purifier != Holder::Alice && purifier != Holder::Bob {
        return Err(Error::Construction("the purifier must go to Alice or Bob".into()));
    }
    let mut state = purified.clone();
    let refs: Vec<String> = references.iter().map(|r| r.as_ref().to_string()).collect();
    let mut expected: HashSet<String> = slot.inputs().into_iter().collect();
    expected.extend(refs.iter().cloned());
    let got: HashSet<String> = state.system().names().into_iter().collect();
    if expected != got {
        return Err(Error::DimMismatch(
            "frozen state must live on the slot inputs and its references".into(),
        ));
    }
    for (names, regs, holder) in [(&slot.a_in, &p.a_in, Holder::Alice), (&slot.b_in, &p.b_in, Holder::Bob)] {
        for n in names {
            let r = regs
                .iter()
                .find(|r| &r.name == n)
                .ok_or_else(|| Error::UnknownRegister(format!("{n} is not an input on that side")))?;
            if state.system().dim_of(n)? != r.dim {
                return Err(Error::DimMismatch(format!("frozen register {n} has the wrong dimension")));
            }
            state.set_holder(n, holder)?;
        }
    }
    let taken = p.register_names();
    for r in &refs {
        if taken.contains(r) {
            return Err(Error::NameCollision(r.clone()));
        }
        state.set_holder(r, purifier)?;
    }
    for n in slot.a_out.iter().chain(&slot.b_out) {
        if !p.a_out.iter().chain(&p.b_out).any(|r| &r.name == n) {
            return Err(Error::UnknownRegister(format!("{n} is not an output")));
        }
    }
    let keep = |regs: &[Register], drop: &[String]| {
        regs.iter().filter(|r| !drop.contains(&r.name)).cloned().collect::<Vec<_>>()
    };
    let q = ProtocolSpec {
        a_in: keep(&p.a_in, &slot.a_in),
        b_in: keep(&p.b_in, &slot.b_in),
        preshared: p.preshared.tensor(&state)?,
        steps: p.steps.clone(),
        a_out: keep(&p.a_out, &slot.a_out),
        b_out: keep(&p.b_out, &slot.b_out),
    };
    q.check()?;
    Ok(q)
}

/// Freezes `slot` with a density operator, purified with minimal rank.
pub fn fix_input(p: &ProtocolSpec, slot: &Slot, side: SlotSide, fixed: &DensityOperator) -> Result<ProtocolSpec> {
    let mut taken = p.register_names();
    taken.extend(fixed.system().names());
    let r = fresh_name("frozen.R", &taken);
    let purified = fixed.purify(&r)?;
    fix_input_purified(p, slot, side.purifier_holder(), &purified, &[r])
}

/// Selector pair `Σ_i sqrt(w_i) |i>_{sa} |i>_{sb}`.
fn selector(sa: &str, sb: &str, weights: &[f64]) -> Result<StateVector> {
    let n = weights.len();
    let sys = RegisterSystem::new(
        vec![Register::new(sa, n), Register::new(sb, n)],
        vec![Holder::Alice, Holder::Bob],
    )?;
    let mut amps = vec![C64::new(0.0, 0.0); n * n];
    for (i, w) in weights.iter().enumerate() {
        amps[i * n + i] = C64::new(w.sqrt(), 0.0);
    }
    StateVector::new(sys, amps)
}

fn zeros(regs: &[Register], holder: Holder) -> Result<StateVector> {
    Ok(StateVector::zeros(RegisterSystem::uniform(regs.to_vec(), holder)?))
}

fn renamed(regs: &[Register], f: impl Fn(&str) -> String) -> Vec<Register> {
    regs.iter().map(|r| Register::new(f(&r.name), r.dim)).collect()
}

/// Coherent mixture `prob Π¹ + (1 - prob) Π²`.
///
/// A selector `sqrt(p)|00> + sqrt(1-p)|11>` is shared. Alice (step 1) and
/// Bob (step 2) route their input into the selected protocol and zero
/// padding into the other; both run in parallel; Bob (step M) and Alice
/// (step M+1) route the selected outputs into the final output registers.
pub fn convex_mix(p1: &ProtocolSpec, p2: &ProtocolSpec, prob: f64) -> Result<ProtocolSpec> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Construction(format!("mixing weight {prob} outside [0, 1]")));
    }
    for (a, b) in [(&p1.a_in, &p2.a_in), (&p1.b_in, &p2.b_in), (&p1.a_out, &p2.a_out), (&p1.b_out, &p2.b_out)] {
        if a != b {
            return Err(Error::Construction("mixed protocols must share input and output registers".into()));
        }
    }
    let q1 = p1.with_prefix("mix1.")?;
    let q2 = p2.with_prefix("mix2.")?;
    let mut p = parallel_compose(&q1, &q2)?;
    let m = p.message_count();

    let taken: HashSet<String> = p
        .register_names()
        .into_iter()
        .chain(p1.register_names())
        .collect();
    for n in ["mix.sa", "mix.sb"] {
        if taken.contains(n) {
            return Err(Error::NameCollision(n.into()));
        }
    }
    let pad = |side: &str, regs: &[Register]| renamed(regs, |n| format!("mix.pad{side}.{n}"));
    let junk = |side: &str, regs: &[Register]| renamed(regs, |n| format!("mix.junk{side}.{n}"));
    let (pad_a, pad_b) = (pad("a", &p1.a_in), pad("b", &p1.b_in));
    let sel = selector("mix.sa", "mix.sb", &[prob, 1.0 - prob])?;
    let preshared = p
        .preshared
        .tensor(&sel)?
        .tensor(&zeros(&pad_a, Holder::Alice)?)?
        .tensor(&zeros(&pad_b, Holder::Bob)?)?;

    // Routing of the inputs: control 0 selects protocol 1.
    let route_in = |control: &str, x: &[Register], pad: &[Register], t1: &[Register], t2: &[Register]| {
        let k = x.len();
        let inputs: Vec<Register> = x.iter().chain(pad).cloned().collect();
        let outputs: Vec<Register> = t1.iter().chain(t2).cloned().collect();
        let first: Vec<usize> = (0..2 * k).collect();
        let second: Vec<usize> = (k..2 * k).chain(0..k).collect();
        UnitaryOp::controlled_routing(Register::new(control, 2), inputs, outputs, &[first, second])
    };
    let route_a = route_in("mix.sa", &p1.a_in, &pad_a, &q1.a_in, &q2.a_in)?;
    let route_b = route_in("mix.sb", &p1.b_in, &pad_b, &q1.b_in, &q2.b_in)?;
    // Output selection: control 0 keeps protocol 1's outputs.
    let select = |control: &str, o1: &[Register], o2: &[Register], out: &[Register], junk: &[Register]| {
        let k = out.len();
        let inputs: Vec<Register> = o1.iter().chain(o2).cloned().collect();
        let outputs: Vec<Register> = out.iter().chain(junk).cloned().collect();
        let first: Vec<usize> = (0..2 * k).collect();
        let second: Vec<usize> = (k..2 * k).chain(0..k).collect();
        UnitaryOp::controlled_routing(Register::new(control, 2), inputs, outputs, &[first, second])
    };
    let sel_b = select("mix.sb", &q1.b_out, &q2.b_out, &p1.b_out, &junk("b", &p1.b_out))?;
    let sel_a = select("mix.sa", &q1.a_out, &q2.a_out, &p1.a_out, &junk("a", &p1.a_out))?;

    p.steps[0].ops.insert(0, route_a);
    p.steps[1].ops.insert(0, route_b);
    p.steps[m - 1].ops.push(sel_b);
    p.steps[m].ops.push(sel_a);
    p.a_in = p1.a_in.clone();
    p.b_in = p1.b_in.clone();
    p.a_out = p1.a_out.clone();
    p.b_out = p1.b_out.clone();
    p.preshared = preshared;
    p.check()?;
    Ok(p)
}

/// Both sides of the input-concavity inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityReport {
    /// `QIC(Π, p ρ1 + (1-p) ρ2)`.
    pub lhs: f64,
    /// `p QIC(Π, ρ1) + (1-p) QIC(Π, ρ2)`.
    pub rhs: f64,
    pub slack: f64,
}

impl ConcavityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

pub fn concavity_check(
    p: &ProtocolSpec,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    prob: f64,
) -> Result<ConcavityReport> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Construction(format!("mixing weight {prob} outside [0, 1]")));
    }
    let mixed = rho1.mix(prob, rho2)?;
    let lhs = qic(p, &mixed)?;
    let rhs = prob * qic(p, rho1)? + (1.0 - prob) * qic(p, rho2)?;
    Ok(ConcavityReport {
        lhs,
        rhs,
        slack: lhs - rhs,
    })
}

/// Single-register slot shapes `(Alice register, Bob register)`.
fn slot_pair<'a>(p: &'a ProtocolSpec, s: &Slot) -> Result<(&'a Register, &'a Register)> {
    if s.a_in.len() != 1 || s.b_in.len() != 1 || !s.a_out.is_empty() || !s.b_out.is_empty() {
        return Err(Error::Construction(
            "averaging needs slots with one input register per side and no outputs".into(),
        ));
    }
    let a = p
        .a_in
        .iter()
        .find(|r| r.name == s.a_in[0])
        .ok_or_else(|| Error::UnknownRegister(s.a_in[0].clone()))?;
    let b = p
        .b_in
        .iter()
        .find(|r| r.name == s.b_in[0])
        .ok_or_else(|| Error::UnknownRegister(s.b_in[0].clone()))?;
    Ok((a, b))
}

fn check_slots(p: &ProtocolSpec, slots: &[Slot], mu: &JointDistribution) -> Result<(usize, usize)> {
    let n = slots.len();
    if n < 2 {
        return Err(Error::Construction(format!("averaging needs at least 2 slots, got {n}")));
    }
    let mut covered: Vec<String> = slots.iter().flat_map(|s| s.inputs()).collect();
    covered.sort();
    let mut all = p.input_names();
    all.sort();
    if covered != all {
        return Err(Error::Construction("slots must partition the protocol's inputs".into()));
    }
    let (a0, b0) = slot_pair(p, &slots[0])?;
    for s in slots {
        let (a, b) = slot_pair(p, s)?;
        if a.dim != a0.dim || b.dim != b0.dim {
            return Err(Error::Construction("all slots must have the same shape".into()));
        }
    }
    if mu.nx != a0.dim || mu.ny != b0.dim {
        return Err(Error::DimMismatch("distribution does not match the slot shape".into()));
    }
    Ok((a0.dim, b0.dim))
}

/// `Π_i`: slot `i` (0-based) stays open and is renamed to `x`, `y`; every
/// other slot `j` is frozen with the canonical purification of `μ`, its
/// purifier going to Alice for `j < i` and to Bob for `j > i`.
pub fn embed_slot(
    p: &ProtocolSpec,
    slots: &[Slot],
    i: usize,
    mu: &JointDistribution,
    x: &str,
    y: &str,
) -> Result<ProtocolSpec> {
    check_slots(p, slots, mu)?;
    if i >= slots.len() {
        return Err(Error::Construction(format!("slot {i} out of range")));
    }
    let mut q = p.clone();
    for (j, s) in slots.iter().enumerate() {
        if j == i {
            continue;
        }
        let (a, b) = slot_pair(&q, s)?;
        let (a, b) = (a.clone(), b.clone());
        let r = fresh_name(&format!("avg.r{}", j + 1), &q.register_names());
        let psi = canonical_classical_purification(mu, &[a], &[b], &r)?;
        let holder = if j < i { Holder::Alice } else { Holder::Bob };
        q = fix_input_purified(&q, s, holder, &psi, &[r])?;
    }
    let (ai, bi) = (slots[i].a_in[0].clone(), slots[i].b_in[0].clone());
    let rename = |n: &str| {
        if n == ai {
            x.to_string()
        } else if n == bi {
            y.to_string()
        } else {
            n.to_string()
        }
    };
    if q.register_names().iter().any(|n| (n == x && x != ai) || (n == y && y != bi)) {
        return Err(Error::NameCollision(format!("{x} or {y}")));
    }
    q.map_names(&rename)?;
    q.check()?;
    Ok(q)
}

/// The averaged protocol `Π_A` on a single slot `(x, y)`.
///
/// Preshared: the protocol's own state; `2n` canonical purifications of `μ`
/// with data registers `avg.da{k}` (Alice), `avg.db{k}` (Bob) and purifiers
/// `avg.dr{k}` held by Alice for `k ≤ n` and Bob for `k > n`; zero padding
/// `avg.pa{k}`, `avg.pb{k}` for `k < n`; the uniform selector
/// `Σ_i |i>_{avg.sa} |i>_{avg.sb} / sqrt(n)`.
///
/// Alice at step 1 and Bob at step 2, controlled on their selector value
/// `i`, put the real input into slot `i`, copy `j` into slot `j < i`, copy
/// `n + j` into slot `j > i`, and padding (in increasing order) into the
/// data registers thereby emptied. The result is `(1/n) Σ_i Π_i`.
pub fn and_average_protocol(
    p: &ProtocolSpec,
    slots: &[Slot],
    mu: &JointDistribution,
    x: &str,
    y: &str,
) -> Result<ProtocolSpec> {
    p.check()?;
    let (dx, dy) = check_slots(p, slots, mu)?;
    let n = slots.len();
    let taken = p.register_names();
    if let Some(bad) = taken.iter().find(|t| t.starts_with("avg.") || *t == x || *t == y) {
        return Err(Error::NameCollision(bad.clone()));
    }
    let reg = |name: String, d: usize| Register::new(name, d);

    let mut preshared = p.preshared.clone();
    for k in 1..=2 * n {
        let a = reg(format!("avg.da{k}"), dx);
        let b = reg(format!("avg.db{k}"), dy);
        let r = format!("avg.dr{k}");
        let mut copy = canonical_classical_purification(mu, &[a], &[b], &r)?;
        copy.set_holder(&r, if k <= n { Holder::Alice } else { Holder::Bob })?;
        preshared = preshared.tensor(&copy)?;
    }
    let pads_a: Vec<Register> = (1..n).map(|k| reg(format!("avg.pa{k}"), dx)).collect();
    let pads_b: Vec<Register> = (1..n).map(|k| reg(format!("avg.pb{k}"), dy)).collect();
    preshared = preshared
        .tensor(&zeros(&pads_a, Holder::Alice)?)?
        .tensor(&zeros(&pads_b, Holder::Bob)?)?
        .tensor(&selector("avg.sa", "avg.sb", &vec![1.0 / n as f64; n])?)?;

    let route = |control: &str, input: Register, data: &str, pads: &[Register], slot_regs: Vec<Register>, d: usize| {
        // Inputs: [input, data_1..data_2n, pads...]; outputs: [slots..., data_1..data_2n].
        let mut inputs = vec![input];
        inputs.extend((1..=2 * n).map(|k| reg(format!("avg.{data}{k}"), d)));
        inputs.extend(pads.iter().cloned());
        let mut outputs = slot_regs;
        outputs.extend((1..=2 * n).map(|k| reg(format!("avg.{data}{k}"), d)));
        // data_k sits at input index k (1-based)
        let data_idx = |k: usize| k;
        let routes: Vec<Vec<usize>> = (1..=n)
            .map(|i| {
                let mut r = Vec::with_capacity(3 * n);
                let mut used = Vec::new();
                for j in 1..=n {
                    if j == i {
                        r.push(0);
                    } else if j < i {
                        r.push(data_idx(j));
                        used.push(j);
                    } else {
                        r.push(data_idx(n + j));
                        used.push(n + j);
                    }
                }
                used.sort_unstable();
                let mut next_pad = 1 + 2 * n;
                for k in 1..=2 * n {
                    if used.contains(&k) {
                        r.push(next_pad);
                        next_pad += 1;
                    } else {
                        r.push(data_idx(k));
                    }
                }
                r
            })
            .collect();
        UnitaryOp::controlled_routing(Register::new(control, n), inputs, outputs, &routes)
    };
    let slot_a: Vec<Register> = slots.iter().map(|s| reg(s.a_in[0].clone(), dx)).collect();
    let slot_b: Vec<Register> = slots.iter().map(|s| reg(s.b_in[0].clone(), dy)).collect();
    let route_a = route("avg.sa", reg(x.into(), dx), "da", &pads_a, slot_a, dx)?;
    let route_b = route("avg.sb", reg(y.into(), dy), "db", &pads_b, slot_b, dy)?;

    let mut steps: Vec<Step> = p.steps.clone();
    steps[0].ops.insert(0, route_a);
    steps[1].ops.insert(0, route_b);
    let q = ProtocolSpec {
        a_in: vec![reg(x.into(), dx)],
        b_in: vec![reg(y.into(), dy)],
        preshared,
        steps,
        a_out: p.a_out.clone(),
        b_out: p.b_out.clone(),
    };
    q.check()?;
    Ok(q)
}

/// Global dimension `Π_A` simulates on a purified single-slot input with a
/// reference of dimension `ref_dim`.
pub fn and_average_dimension(p: &ProtocolSpec, slots: &[Slot], mu: &JointDistribution, ref_dim: usize) -> u128 {
    let n = slots.len() as u128;
    let (dx, dy) = (mu.nx as u128, mu.ny as u128);
    let s = mu.support().len() as u128;
    let copies = (dx * dy * s).pow(2 * n as u32);
    let pads = (dx * dy).pow((n - 1) as u32);
    dx * dy * ref_dim as u128 * p.preshared.dim() as u128 * copies * pads * n * n
}

/// `(1/n) Σ_i Π_i(ρ)` as a density operator on outputs and references.
pub fn average_output(outputs: &[DensityOperator]) -> Result<DensityOperator> {
    let first = outputs
        .first()
        .ok_or_else(|| Error::Construction("no outputs to average".into()))?;
    let names = first.system().names();
    let mut m = first.matrix().clone() * C64::new(0.0, 0.0);
    for o in outputs {
        m += o.permute(&names)?.matrix();
    }
    let w = 1.0 / outputs.len() as f64;
    DensityOperator::new(first.system().clone(), m * C64::new(w, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzz::{random_density, random_distribution, random_protocol, RandomProtocolConfig};
    use crate::hilbert::rng_from_seed;
    use crate::measures::trace_distance_full;
    use crate::protocol::library::relay;
    use crate::protocol::{qcc, qic_with, run, ProtocolInput};

    fn inputs_system(p: &ProtocolSpec) -> RegisterSystem {
        let regs: Vec<Register> = p.a_in.iter().chain(&p.b_in).cloned().collect();
        let holders = p
            .a_in
            .iter()
            .map(|_| Holder::Alice)
            .chain(p.b_in.iter().map(|_| Holder::Bob))
            .collect();
        RegisterSystem::new(regs, holders).unwrap()
    }

    fn two_slot_config() -> RandomProtocolConfig {
        RandomProtocolConfig {
            a_in: vec![Register::new("x1", 2), Register::new("x2", 2)],
            b_in: vec![Register::new("y1", 2), Register::new("y2", 2)],
            a_out: vec![Register::new("oa", 2)],
            b_out: vec![Register::new("ob", 2)],
            t_a: 1,
            t_b: 1,
            message_dims: vec![2, 2],
            prefix: String::new(),
        }
    }

    fn two_slots() -> Vec<Slot> {
        vec![
            Slot {
                a_in: vec!["x1".into()],
                b_in: vec!["y1".into()],
                ..Slot::default()
            },
            Slot {
                a_in: vec!["x2".into()],
                b_in: vec!["y2".into()],
                ..Slot::default()
            },
        ]
    }

    #[test]
    fn parallel_relays_add_cost_and_stay_identity() {
        let p1 = relay(2, 2);
        let p2 = relay(2, 3).with_prefix("q.").unwrap();
        let p = parallel_compose(&p1, &p2).unwrap();
        assert!((qcc(&p).unwrap() - 4.0).abs() < 1e-12);
        let s = StateVector::basis(inputs_system(&p), &[1, 0, 1, 2]).unwrap();
        let out = run(&p, &ProtocolInput::pure(s)).unwrap().output;
        let expect = StateVector::basis(
            RegisterSystem::uniform(
                vec![Register::new("ya", 2), Register::new("q.ya", 2), Register::new("yb", 2), Register::new("q.yb", 3)],
                Holder::Alice,
            )
            .unwrap(),
            &[1, 0, 1, 2],
        )
        .unwrap()
        .density();
        assert!(trace_distance_full(&out, &expect).unwrap() < 1e-10);
    }

    #[test]
    fn parallel_rejects_shared_names() {
        assert!(matches!(parallel_compose(&relay(2, 2), &relay(2, 2)), Err(Error::NameCollision(_))));
    }

    #[test]
    fn parallel_qic_is_additive_across_lengths() {
        let mut rng = rng_from_seed(11);
        let p1 = random_protocol(&RandomProtocolConfig::qubits(4), &mut rng).unwrap();
        let mut cfg = RandomProtocolConfig::qubits(2);
        cfg.prefix = "q.".into();
        cfg.a_in = vec![Register::new("q.xa", 2)];
        cfg.b_in = vec![Register::new("q.xb", 2)];
        cfg.a_out = vec![Register::new("q.ya", 2)];
        cfg.b_out = vec![Register::new("q.yb", 2)];
        let p2 = random_protocol(&cfg, &mut rng).unwrap();
        // Shorter protocol first exercises the swap.
        let p = parallel_compose(&p2, &p1).unwrap();
        assert_eq!(p.message_count(), 4);
        let r1 = random_density(inputs_system(&p1), 2, &mut rng);
        let r2 = random_density(inputs_system(&p2), 2, &mut rng);
        let i1 = ProtocolInput::from_density(&r1, "R1").unwrap();
        let i2 = ProtocolInput::from_density(&r2, "R2").unwrap();
        let joint = i2.tensor(&i1).unwrap();
        let lhs = qic_with(&p, &joint).unwrap();
        let rhs = qic_with(&p1, &i1).unwrap() + qic_with(&p2, &i2).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn freezing_both_slots_splits_qic() {
        let mut rng = rng_from_seed(21);
        let p = random_protocol(&two_slot_config(), &mut rng).unwrap();
        let slots = two_slots();
        let s1 = RegisterSystem::new(vec![Register::new("x1", 2), Register::new("y1", 2)], vec![Holder::Alice, Holder::Bob])
            .unwrap();
        let s2 = RegisterSystem::new(vec![Register::new("x2", 2), Register::new("y2", 2)], vec![Holder::Alice, Holder::Bob])
            .unwrap();
        let rho1 = random_density(s1, 3, &mut rng);
        let rho2 = random_density(s2, 2, &mut rng);
        let first = fix_input(&p, &slots[1], SlotSide::Second, &rho2).unwrap();
        let second = fix_input(&p, &slots[0], SlotSide::First, &rho1).unwrap();
        let lhs = qic(&first, &rho1).unwrap() + qic(&second, &rho2).unwrap();
        let rhs = qic(&p, &rho1.tensor(&rho2).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn frozen_protocol_matches_reduced_channel() {
        let mut rng = rng_from_seed(4);
        let p = random_protocol(&two_slot_config(), &mut rng).unwrap();
        let slots = two_slots();
        let s1 = RegisterSystem::new(vec![Register::new("x1", 2), Register::new("y1", 2)], vec![Holder::Alice, Holder::Bob])
            .unwrap();
        let s2 = RegisterSystem::new(vec![Register::new("x2", 2), Register::new("y2", 2)], vec![Holder::Alice, Holder::Bob])
            .unwrap();
        let rho2 = random_density(s2, 2, &mut rng);
        let frozen = fix_input(&p, &slots[1], SlotSide::Second, &rho2).unwrap();
        for _ in 0..5 {
            let rho1 = random_density(s1.clone(), 2, &mut rng);
            let i1 = ProtocolInput::from_density(&rho1, "R").unwrap();
            let got = run(&frozen, &i1).unwrap().output;
            let full = ProtocolInput::purified(
                i1.state().tensor(&rho2.purify("R2").unwrap()).unwrap(),
                &["R", "R2"],
            )
            .unwrap();
            let want = run(&p, &full).unwrap().output.reduced_density(&["oa", "ob", "R"]).unwrap();
            assert!(trace_distance_full(&got, &want).unwrap() < 1e-9);
        }
    }

    #[test]
    fn freezing_rejects_wrong_registers() {
        let p = relay(2, 2);
        let slot = Slot {
            a_in: vec!["xa".into()],
            ..Slot::default()
        };
        let wrong = DensityOperator::maximally_mixed(
            RegisterSystem::uniform(vec![Register::new("xb", 2)], Holder::Bob).unwrap(),
        );
        assert!(fix_input(&p, &slot, SlotSide::First, &wrong).is_err());
    }

    #[test]
    fn mixture_is_linear_in_channel_and_qic() {
        let mut rng = rng_from_seed(8);
        let p1 = random_protocol(&RandomProtocolConfig::qubits(2), &mut rng).unwrap();
        let p2 = random_protocol(&RandomProtocolConfig::qubits(4), &mut rng).unwrap();
        let prob = 0.3;
        let mix = convex_mix(&p1, &p2, prob).unwrap();
        assert!(mix.validate().is_empty());
        let rho = random_density(inputs_system(&p1), 2, &mut rng);
        let input = ProtocolInput::from_density(&rho, "R").unwrap();
        let o1 = run(&p1, &input).unwrap().output;
        let o2 = run(&p2, &input).unwrap().output;
        let om = run(&mix, &input).unwrap().output;
        let want = o1.mix(prob, &o2.permute(&o1.system().names()).unwrap()).unwrap();
        assert!(trace_distance_full(&om, &want).unwrap() < 1e-9);
        let lhs = qic_with(&mix, &input).unwrap();
        let rhs = prob * qic_with(&p1, &input).unwrap() + (1.0 - prob) * qic_with(&p2, &input).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn mixture_weight_is_checked() {
        assert!(convex_mix(&relay(2, 2), &relay(2, 2), 1.5).is_err());
        assert!(convex_mix(&relay(2, 2), &relay(3, 2), 0.5).is_err());
    }

    #[test]
    fn concavity_on_random_inputs() {
        let mut rng = rng_from_seed(13);
        let p = random_protocol(&RandomProtocolConfig::qubits(2), &mut rng).unwrap();
        for _ in 0..3 {
            let r1 = random_density(inputs_system(&p), 2, &mut rng);
            let r2 = random_density(inputs_system(&p), 1, &mut rng);
            let rep = concavity_check(&p, &r1, &r2, 0.4).unwrap();
            assert!(rep.holds(1e-8), "{rep:?}");
        }
    }

    #[test]
    fn averaged_protocol_matches_slot_average() {
        let mut rng = rng_from_seed(2);
        let pd = random_protocol(&two_slot_config(), &mut rng).unwrap();
        let slots = two_slots();
        let mu = random_distribution(2, 2, Some(&[(0, 0), (1, 0)]), &mut rng);
        let pa = and_average_protocol(&pd, &slots, &mu, "x", "y").unwrap();
        assert!(pa.validate().is_empty());
        let (xr, yr) = (Register::new("x", 2), Register::new("y", 2));
        let sigma = ProtocolInput::classical(&mu, &[xr.clone()], &[yr.clone()], "R").unwrap();
        let embedded: Vec<ProtocolSpec> =
            (0..2).map(|i| embed_slot(&pd, &slots, i, &mu, "x", "y").unwrap()).collect();

        let outs: Vec<DensityOperator> = embedded.iter().map(|e| run(e, &sigma).unwrap().output).collect();
        let want = average_output(&outs).unwrap();
        let got = run(&pa, &sigma).unwrap().output;
        assert!(trace_distance_full(&got, &want).unwrap() < 1e-8);

        let qa = qic_with(&pa, &sigma).unwrap();
        let avg: f64 = embedded.iter().map(|e| qic_with(e, &sigma).unwrap()).sum::<f64>() / 2.0;
        let joint = ProtocolInput::classical(
            &mu.product(&mu),
            &[Register::new("x1", 2), Register::new("x2", 2)],
            &[Register::new("y1", 2), Register::new("y2", 2)],
            "R",
        )
        .unwrap();
        assert!((qa - avg).abs() < 1e-8, "{qa} vs {avg}");
        let whole = qic_with(&pd, &joint).unwrap() / 2.0;
        assert!((qa - whole).abs() < 1e-8, "{qa} vs {whole}");
    }
}
