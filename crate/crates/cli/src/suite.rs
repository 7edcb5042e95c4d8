//! Registry of numerical checks. Each check draws seeded random instances,
//! evaluates one identity or inequality on every instance and reports the
//! worst one.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qicost_core::classical::{
    classical_ic, classical_ic_prime, failure_probability, function_channel, ClassicalFunctionPair,
};
use qicost_core::constructions::{
    and_average_dimension, and_average_protocol, concavity_check, convex_mix, fix_input, parallel_compose, Slot,
    SlotSide,
};
use qicost_core::fuzz::{
    random_classical_protocol, random_density, random_distribution, random_protocol, random_pure_state,
    RandomProtocolConfig,
};
use qicost_core::hilbert::{gates, haar_unitary_matrix, rng_from_seed, JointDistribution};
use qicost_core::measures::trace_distance_full;
use qicost_core::protocol::library::{and_bits, post_process, send_input};
use qicost_core::protocol::{protocol_error, qcc, qic_report, qic_with, run, DEFAULT_MAX_DIM};
use qicost_core::redistribution::compression_budget;
use qicost_core::{
    cond_mutual_info, entropy, mutual_info, trace_distance, DensityOperator, Holder, ProtocolInput, ProtocolSpec,
    QuantumTask, Register, RegisterSystem, Result, StateVector, Tolerances, UnitaryOp, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// How `lhs` and `rhs` of the reported instance are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtMost,
    AtLeast,
}

impl Relation {
    fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Equal => (lhs - rhs).abs(),
            Relation::AtMost => lhs - rhs,
            Relation::AtLeast => rhs - lhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Equal => "==",
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub check_id: String,
    /// The relation being checked, in words.
    pub anchor: String,
    pub status: Status,
    pub relation: Relation,
    /// Worst instance.
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub instances: usize,
    pub runtime_ms: u128,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl SuiteResult {
    /// Everything except the wall-clock time.
    pub fn same_outcome(&self, other: &SuiteResult) -> bool {
        let mut a = self.clone();
        a.runtime_ms = other.runtime_ms;
        a == *other
    }

    pub fn text_line(&self) -> String {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let mut line = format!(
            "{status} {id}: {anchor} | worst {lhs:.12e} {rel} {rhs:.12e} (tol {tol:.0e}, {n} instances, seed {seed}, {ms} ms)",
            id = self.check_id,
            anchor = self.anchor,
            lhs = self.lhs,
            rel = self.relation.symbol(),
            rhs = self.rhs,
            tol = self.tolerance,
            n = self.instances,
            seed = self.seed,
            ms = self.runtime_ms,
        );
        if !self.note.is_empty() {
            line.push_str(&format!(" [{}]", self.note));
        }
        line
    }
}

/// Settings shared by every check.
#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Replaces every check's own tolerance when set.
    pub tolerance: Option<f64>,
    pub max_dim: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 20240611,
            tolerance: None,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Worst-instance accumulator.
#[derive(Debug, Default)]
pub struct Tally {
    worst: Option<(Relation, f64, f64, f64)>,
    instances: usize,
    note: String,
}

impl Tally {
    fn push(&mut self, rel: Relation, lhs: f64, rhs: f64) {
        let v = rel.violation(lhs, rhs);
        // NaN must never look like a pass.
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if self.worst.is_none_or(|w| v > w.3) {
            self.worst = Some((rel, lhs, rhs, v));
        }
    }

    pub fn equal(&mut self, lhs: f64, rhs: f64) {
        self.push(Relation::Equal, lhs, rhs);
    }

    pub fn at_most(&mut self, lhs: f64, rhs: f64) {
        self.push(Relation::AtMost, lhs, rhs);
    }

    pub fn at_least(&mut self, lhs: f64, rhs: f64) {
        self.push(Relation::AtLeast, lhs, rhs);
    }

    /// Marks the end of one random instance.
    pub fn instance(&mut self) {
        self.instances += 1;
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.note = s.into();
    }
}

type CheckFn = fn(&mut ChaCha8Rng, &SuiteConfig, &mut Tally) -> Result<()>;

pub struct Check {
    pub id: &'static str,
    pub anchor: &'static str,
    pub tolerance: f64,
    run: CheckFn,
}

pub fn registry() -> Vec<Check> {
    let c = |id, anchor, tolerance, run| Check {
        id,
        anchor,
        tolerance,
        run,
    };
    vec![
        c("chain-rule", "I(A;BC) = I(A;B) + I(A;C|B)", 1e-8, chain_rule as CheckFn),
        c("strong-subadditivity", "I(A;B|C) >= 0", 1e-8, strong_subadditivity),
        c("data-processing", "I(A;B) >= I(A;N(B))", 1e-8, data_processing),
        c("product-additivity", "H(rho ⊗ sigma) = H(rho) + H(sigma)", 1e-8, product_additivity),
        c(
            "conditioning-average",
            "I(A;B|CX) = sum_x p(x) I(A;B|C)_x for classical X",
            1e-8,
            conditioning_average,
        ),
        c("pure-entropy-symmetry", "H(A) = H(BC) on pure ABC", 1e-8, pure_entropy_symmetry),
        c("trace-distance-range", "0 <= T(rho,sigma) <= 2 and T(rho,rho) = 0", 1e-8, td_range),
        c("trace-distance-symmetry", "T(rho,sigma) = T(sigma,rho)", 1e-8, td_symmetry),
        c("trace-distance-triangle", "T(rho,tau) <= T(rho,sigma) + T(sigma,tau)", 1e-8, td_triangle),
        c("trace-distance-monotonicity", "T(rho_A,sigma_A) <= T(rho,sigma)", 1e-8, td_monotone),
        c("qic-vs-qcc", "0 <= QIC <= QCC", 1e-8, qic_vs_qcc),
        c("pure-input-nullity", "QIC = 0 on pure inputs", 1e-9, pure_input_nullity),
        c(
            "parallel-additivity",
            "QIC(P1 ⊗ P2, rho1 ⊗ rho2) = QIC(P1, rho1) + QIC(P2, rho2)",
            1e-7,
            parallel_additivity,
        ),
        c(
            "slot-split",
            "QIC(P, rho1 ⊗ rho2) = QIC(P frozen at 2, rho1) + QIC(P frozen at 1, rho2)",
            1e-7,
            slot_split,
        ),
        c("mixture-channel", "mix(P1,P2,p)(rho) = p P1(rho) + (1-p) P2(rho)", 1e-9, mixture_channel),
        c("mixture-affinity", "QIC(mix) = p QIC(P1) + (1-p) QIC(P2)", 1e-7, mixture_affinity),
        c("mixture-degenerate", "mix at p in {0,1} equals the selected protocol", 1e-9, mixture_degenerate),
        c("input-concavity", "QIC(P, p rho1 + (1-p) rho2) >= p QIC(P, rho1) + (1-p) QIC(P, rho2)", 1e-8, input_concavity),
        c("and-average", "QIC(P_A, sigma_mu) = QIC(P_D, sigma_mu^⊗2) / 2", 1e-5, and_average),
        c("failure-bound", "failure probability <= protocol error / 2", 1e-9, failure_bound),
        c("ic-equivalence", "IC = IC' for classical protocols", 1e-10, ic_equivalence),
        c("budget-total", "compression total rate = QIC + delta", 1e-8, budget_total),
        c("e-net-bounds", "|½ I(C;A) - ½ I(C;B)| <= log2 dim C", 1e-9, e_net_bounds),
        c("redist-matches-qic", "redistribution q_min = QIC term per message", 1e-9, redist_matches_qic),
        c("known-values", "Bell, GHZ, |0> vs |+>, sending a uniform bit", 1e-9, known_values),
    ]
}

pub fn check_ids() -> Vec<&'static str> {
    registry().iter().map(|c| c.id).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown check id {0:?}")]
    UnknownCheck(String),
}

/// Runs the selected checks (all when `selection` is empty), concurrently,
/// and returns their results ordered by check id.
pub fn run_suite(selection: &[String], cfg: &SuiteConfig) -> std::result::Result<Vec<SuiteResult>, SuiteError> {
    let all = registry();
    if let Some(bad) = selection.iter().find(|s| !all.iter().any(|c| c.id == s.as_str())) {
        return Err(SuiteError::UnknownCheck(bad.clone()));
    }
    let chosen: Vec<&Check> = all
        .iter()
        .filter(|c| selection.is_empty() || selection.iter().any(|s| s == c.id))
        .collect();
    let mut results: Vec<SuiteResult> = chosen.par_iter().map(|c| run_check(c, cfg)).collect();
    results.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(results)
}

pub fn run_check(check: &Check, cfg: &SuiteConfig) -> SuiteResult {
    let tolerance = cfg.tolerance.unwrap_or(check.tolerance);
    let mut rng = rng_from_seed(cfg.seed);
    let mut tally = Tally::default();
    let start = Instant::now();
    let outcome = (check.run)(&mut rng, cfg, &mut tally);
    let runtime_ms = start.elapsed().as_millis();
    let (relation, lhs, rhs, violation) = tally.worst.unwrap_or((Relation::Equal, f64::NAN, f64::NAN, 0.0));
    let (status, note) = match outcome {
        Err(e) => (Status::Fail, format!("error: {e}")),
        Ok(()) if tally.worst.is_none() => (Status::Skip, tally.note.clone()),
        Ok(()) if violation <= tolerance => (Status::Pass, tally.note.clone()),
        Ok(()) => (Status::Fail, tally.note.clone()),
    };
    SuiteResult {
        check_id: check.id.to_string(),
        anchor: check.anchor.to_string(),
        status,
        relation,
        lhs,
        rhs,
        tolerance,
        instances: tally.instances,
        runtime_ms,
        seed: cfg.seed,
        note,
    }
}

// ---------------------------------------------------------------------------
// Instance generators

fn regs(names: &[&str], dims: &[usize]) -> Vec<Register> {
    names.iter().zip(dims).map(|(n, &d)| Register::new(*n, d)).collect()
}

fn dims_2_to_4(rng: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    (0..k).map(|_| rng.random_range(2..=4)).collect()
}

/// Random pure state on `a, b, c, e` (dims 2-4, `e` 1-4), so `abc` is mixed.
fn random_abce(rng: &mut ChaCha8Rng) -> StateVector {
    let mut d = dims_2_to_4(rng, 3);
    d.push(rng.random_range(1..=4));
    let sys = RegisterSystem::uniform(regs(&["a", "b", "c", "e"], &d), Holder::Alice).unwrap();
    random_pure_state(sys, rng)
}

fn random_ab_density(rng: &mut ChaCha8Rng, dims: &[usize]) -> DensityOperator {
    let sys = RegisterSystem::uniform(regs(&["a", "b"], dims), Holder::Alice).unwrap();
    let rank = rng.random_range(1..=dims.iter().product::<usize>());
    random_density(sys, rank, rng)
}

fn input_system(p: &ProtocolSpec) -> RegisterSystem {
    let regs: Vec<Register> = p.a_in.iter().chain(&p.b_in).cloned().collect();
    let holders = p
        .a_in
        .iter()
        .map(|_| Holder::Alice)
        .chain(p.b_in.iter().map(|_| Holder::Bob))
        .collect();
    RegisterSystem::new(regs, holders).unwrap()
}

fn random_input_density(p: &ProtocolSpec, rng: &mut ChaCha8Rng) -> DensityOperator {
    let sys = input_system(p);
    let rank = rng.random_range(1..=sys.total_dim());
    random_density(sys, rank, rng)
}

fn qubit_protocol(rng: &mut ChaCha8Rng, prefix: &str) -> Result<ProtocolSpec> {
    let m = if rng.random_bool(0.5) { 2 } else { 4 };
    let mut cfg = RandomProtocolConfig::qubits(m);
    if !prefix.is_empty() {
        let re = |rs: &mut Vec<Register>| rs.iter_mut().for_each(|r| r.name = format!("{prefix}{}", r.name));
        re(&mut cfg.a_in);
        re(&mut cfg.b_in);
        re(&mut cfg.a_out);
        re(&mut cfg.b_out);
        cfg.prefix = prefix.to_string();
    }
    random_protocol(&cfg, rng)
}

/// Two qubit slots per side, one output qubit per side, no entanglement.
fn two_slot_protocol(rng: &mut ChaCha8Rng) -> Result<ProtocolSpec> {
    let cfg = RandomProtocolConfig {
        a_in: regs(&["x1", "x2"], &[2, 2]),
        b_in: regs(&["y1", "y2"], &[2, 2]),
        a_out: regs(&["oa"], &[2]),
        b_out: regs(&["ob"], &[2]),
        t_a: 1,
        t_b: 1,
        message_dims: vec![2, 2],
        prefix: String::new(),
    };
    random_protocol(&cfg, rng)
}

fn two_slots() -> Vec<Slot> {
    (1..=2)
        .map(|i| Slot {
            a_in: vec![format!("x{i}")],
            b_in: vec![format!("y{i}")],
            ..Slot::default()
        })
        .collect()
}

fn slot_system(i: usize) -> RegisterSystem {
    RegisterSystem::new(
        regs(&[&format!("x{i}"), &format!("y{i}")], &[2, 2]),
        vec![Holder::Alice, Holder::Bob],
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Entropy and distance identities

const MEASURE_INSTANCES: usize = 100;

fn chain_rule(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let s = random_abce(rng);
        let lhs = mutual_info(&s, &["a"], &["b", "c"])?;
        let rhs = mutual_info(&s, &["a"], &["b"])? + cond_mutual_info(&s, &["a"], &["c"], &["b"])?;
        t.equal(lhs, rhs);
        t.instance();
    }
    Ok(())
}

fn strong_subadditivity(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let s = random_abce(rng);
        t.at_least(cond_mutual_info(&s, &["a"], &["b"], &["c"])?, 0.0);
        t.instance();
    }
    Ok(())
}

fn data_processing(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let s = random_abce(rng);
        let before = mutual_info(&s, &["a"], &["b"])?;
        // Channel on b: unitary with a fresh environment qubit, then trace it.
        let db = s.system().dim_of("b")?;
        let env = StateVector::zeros(RegisterSystem::uniform(vec![Register::new("f", 2)], Holder::Alice)?);
        let u = UnitaryOp::new(
            regs(&["b", "f"], &[db, 2]),
            regs(&["b2", "g"], &[db, 2]),
            haar_unitary_matrix(2 * db, rng),
        )?;
        let after = s.tensor(&env)?.apply(&u)?;
        t.at_least(before, mutual_info(&after, &["a"], &["b2"])?);
        t.instance();
    }
    Ok(())
}

fn product_additivity(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let d = dims_2_to_4(rng, 2);
        let rho = random_density(RegisterSystem::uniform(regs(&["a"], &d[..1]), Holder::Alice)?, rng.random_range(1..=d[0]), rng);
        let sigma = random_density(RegisterSystem::uniform(regs(&["b"], &d[1..]), Holder::Alice)?, rng.random_range(1..=d[1]), rng);
        let joint = rho.tensor(&sigma)?;
        t.equal(
            entropy(&joint, &["a", "b"])?,
            entropy(&rho, &["a"])? + entropy(&sigma, &["b"])?,
        );
        t.instance();
    }
    Ok(())
}

fn conditioning_average(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let k = rng.random_range(2..=3);
        let d = dims_2_to_4(rng, 3);
        let de = rng.random_range(1..=2);
        let dims = [d[0], d[1], d[2], de];
        let branch_sys = RegisterSystem::uniform(regs(&["a", "b", "c", "e"], &dims), Holder::Alice)?;
        let mut probs: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let branches: Vec<StateVector> = (0..k).map(|_| random_pure_state(branch_sys.clone(), rng)).collect();
        // Σ_x sqrt(p_x) |x>_X |x>_X' |ψ_x>.
        let inner = branch_sys.total_dim();
        let mut amps = vec![C64::new(0.0, 0.0); k * k * inner];
        for (x, (p, b)) in probs.iter().zip(&branches).enumerate() {
            let off = (x * k + x) * inner;
            for (j, a) in b.amplitudes().iter().enumerate() {
                amps[off + j] = a * p.sqrt();
            }
        }
        let mut all = regs(&["x", "xc"], &[k, k]);
        all.extend(branch_sys.registers().iter().cloned());
        let s = StateVector::new(RegisterSystem::uniform(all, Holder::Alice)?, amps)?;
        let lhs = cond_mutual_info(&s, &["a"], &["b"], &["c", "x"])?;
        let mut rhs = 0.0;
        for (p, b) in probs.iter().zip(&branches) {
            rhs += p * cond_mutual_info(b, &["a"], &["b"], &["c"])?;
        }
        t.equal(lhs, rhs);
        t.instance();
    }
    Ok(())
}

fn pure_entropy_symmetry(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let d = dims_2_to_4(rng, 3);
        let s = random_pure_state(RegisterSystem::uniform(regs(&["a", "b", "c"], &d), Holder::Alice)?, rng);
        // Explicit reductions on both sides, no pure-state shortcut.
        let ra = s.reduced_density(&["a"])?;
        let rbc = s.reduced_density(&["b", "c"])?;
        t.equal(entropy(&ra, &["a"])?, entropy(&rbc, &["b", "c"])?);
        t.instance();
    }
    Ok(())
}

fn density_triple(rng: &mut ChaCha8Rng) -> [DensityOperator; 3] {
    let d = dims_2_to_4(rng, 2);
    [
        random_ab_density(rng, &d),
        random_ab_density(rng, &d),
        random_ab_density(rng, &d),
    ]
}

fn td_range(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let [r, s, _] = density_triple(rng);
        let d = trace_distance_full(&r, &s)?;
        t.at_least(d, 0.0);
        t.at_most(d, 2.0);
        t.equal(trace_distance_full(&r, &r)?, 0.0);
        t.instance();
    }
    Ok(())
}

fn td_symmetry(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let [r, s, _] = density_triple(rng);
        t.equal(trace_distance_full(&r, &s)?, trace_distance_full(&s, &r)?);
        t.instance();
    }
    Ok(())
}

fn td_triangle(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let [r, s, u] = density_triple(rng);
        let lhs = trace_distance_full(&r, &u)?;
        t.at_most(lhs, trace_distance_full(&r, &s)? + trace_distance_full(&s, &u)?);
        t.instance();
    }
    Ok(())
}

fn td_monotone(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..MEASURE_INSTANCES {
        let [r, s, _] = density_triple(rng);
        t.at_most(trace_distance(&r, &s, &["a"])?, trace_distance_full(&r, &s)?);
        t.instance();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Protocol-level identities

fn qic_vs_qcc(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for i in 0..100 {
        let m = if i % 2 == 0 { 2 } else { 4 };
        let p = random_protocol(&RandomProtocolConfig::qubits(m), rng)?;
        let rho = random_input_density(&p, rng);
        let q = qic_with(&p, &ProtocolInput::from_density(&rho, "R")?)?;
        t.at_least(q, 0.0);
        t.at_most(q, qcc(&p)?);
        t.instance();
    }
    Ok(())
}

fn pure_input_nullity(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..50 {
        let p = qubit_protocol(rng, "")?;
        let psi = random_pure_state(input_system(&p), rng);
        t.at_most(qic_with(&p, &ProtocolInput::pure(psi))?, 0.0);
        t.instance();
    }
    Ok(())
}

fn parallel_additivity(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..25 {
        let p1 = qubit_protocol(rng, "")?;
        let p2 = qubit_protocol(rng, "q.")?;
        let p = parallel_compose(&p1, &p2)?;
        let i1 = ProtocolInput::from_density(&random_input_density(&p1, rng), "R1")?;
        let i2 = ProtocolInput::from_density(&random_input_density(&p2, rng), "R2")?;
        let lhs = qic_with(&p, &i1.tensor(&i2)?)?;
        t.equal(lhs, qic_with(&p1, &i1)? + qic_with(&p2, &i2)?);
        t.instance();
    }
    Ok(())
}

fn slot_split(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    let slots = two_slots();
    for _ in 0..25 {
        let p = two_slot_protocol(rng)?;
        let rho1 = random_density(slot_system(1), rng.random_range(1..=4), rng);
        let rho2 = random_density(slot_system(2), rng.random_range(1..=4), rng);
        let first = fix_input(&p, &slots[1], SlotSide::Second, &rho2)?;
        let second = fix_input(&p, &slots[0], SlotSide::First, &rho1)?;
        let lhs = qic_with(&p, &ProtocolInput::from_density(&rho1.tensor(&rho2)?, "R")?)?;
        let rhs = qic_with(&first, &ProtocolInput::from_density(&rho1, "R")?)?
            + qic_with(&second, &ProtocolInput::from_density(&rho2, "R")?)?;
        t.equal(lhs, rhs);
        t.instance();
    }
    Ok(())
}

/// `p Π1(ρ) + (1-p) Π2(ρ)` and `mix(Π1,Π2,p)(ρ)`.
fn mixture_outputs(p1: &ProtocolSpec, p2: &ProtocolSpec, mix: &ProtocolSpec, prob: f64, input: &ProtocolInput) -> Result<f64> {
    let o1 = run(p1, input)?.output;
    let o2 = run(p2, input)?.output.permute(&o1.system().names())?;
    let want = o1.mix(prob, &o2)?;
    trace_distance_full(&run(mix, input)?.output, &want)
}

fn mixture_channel(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..25 {
        let p1 = qubit_protocol(rng, "")?;
        let p2 = qubit_protocol(rng, "")?;
        let prob = rng.random::<f64>();
        let mix = convex_mix(&p1, &p2, prob)?;
        for _ in 0..2 {
            let input = ProtocolInput::from_density(&random_input_density(&p1, rng), "R")?;
            t.at_most(mixture_outputs(&p1, &p2, &mix, prob, &input)?, 0.0);
        }
        t.instance();
    }
    Ok(())
}

fn mixture_affinity(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for i in 0..25 {
        let p1 = qubit_protocol(rng, "")?;
        let p2 = qubit_protocol(rng, "")?;
        let prob = match i {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        };
        let mix = convex_mix(&p1, &p2, prob)?;
        let input = ProtocolInput::from_density(&random_input_density(&p1, rng), "R")?;
        let rhs = prob * qic_with(&p1, &input)? + (1.0 - prob) * qic_with(&p2, &input)?;
        t.equal(qic_with(&mix, &input)?, rhs);
        t.instance();
    }
    Ok(())
}

fn mixture_degenerate(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for i in 0..10 {
        let p1 = qubit_protocol(rng, "")?;
        let p2 = qubit_protocol(rng, "")?;
        let prob = (i % 2) as f64;
        let mix = convex_mix(&p1, &p2, prob)?;
        let input = ProtocolInput::from_density(&random_input_density(&p1, rng), "R")?;
        let chosen = if prob == 1.0 { &p1 } else { &p2 };
        t.equal(qic_with(&mix, &input)?, qic_with(chosen, &input)?);
        t.at_most(mixture_outputs(&p1, &p2, &mix, prob, &input)?, 0.0);
        t.instance();
    }
    Ok(())
}

fn input_concavity(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    let (a, b) = (vec![Register::new("xa", 2)], vec![Register::new("xb", 2)]);
    for i in 0..50 {
        let p = qubit_protocol(rng, "")?;
        let (r1, r2) = if i % 2 == 0 {
            (random_input_density(&p, rng), random_input_density(&p, rng))
        } else {
            // Orthogonal classical inputs: Alice's bit is 0 in one, 1 in the other.
            let d1 = random_distribution(2, 2, Some(&[(0, 0), (0, 1)]), rng);
            let d2 = random_distribution(2, 2, Some(&[(1, 0), (1, 1)]), rng);
            (d1.density(&a, &b)?, d2.density(&a, &b)?)
        };
        let rep = concavity_check(&p, &r1, &r2, rng.random::<f64>())?;
        t.at_least(rep.lhs, rep.rhs);
        t.instance();
    }
    Ok(())
}

/// Seeded random 2-message protocol on two slots of one bit per side,
/// averaged over its slots with `μ` uniform on `{00, 01, 10}`.
fn and_average(rng: &mut ChaCha8Rng, cfg: &SuiteConfig, t: &mut Tally) -> Result<()> {
    let pd = two_slot_protocol(rng)?;
    let slots = two_slots();
    let mu = JointDistribution::new(2, 2, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0])?;
    let need = and_average_dimension(&pd, &slots, &mu, mu.support().len());
    if need > cfg.max_dim as u128 {
        t.note(format!("needs global dimension {need}, above --max-dim {}", cfg.max_dim));
        return Ok(());
    }
    let pa = and_average_protocol(&pd, &slots, &mu, "x", "y")?;
    let sigma = ProtocolInput::classical(&mu, &[Register::new("x", 2)], &[Register::new("y", 2)], "R")?;
    let lhs = qic_with(&pa, &sigma)?;
    let joint = ProtocolInput::classical(
        &mu.product(&mu),
        &regs(&["x1", "x2"], &[2, 2]),
        &regs(&["y1", "y2"], &[2, 2]),
        "R",
    )?;
    let rhs = qic_with(&pd, &joint)? / 2.0;
    t.equal(lhs, rhs);
    t.instance();
    t.note(format!("global dimension {need}"));
    Ok(())
}

fn and_task(p: &ProtocolSpec, mu: &JointDistribution) -> Result<QuantumTask> {
    let f = ClassicalFunctionPair::and();
    let ch = function_channel(&f, &p.a_in, &p.b_in, &p.a_out, &p.b_out)?;
    QuantumTask::new(ch, ProtocolInput::classical(mu, &p.a_in, &p.b_in, "R")?, 2.0)
}

fn failure_bound(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    let f = ClassicalFunctionPair::and();
    for i in 0..20 {
        let mu = random_distribution(2, 2, None, rng);
        let p = match i {
            0 => and_bits(),
            1..=10 => {
                let theta = rng.random_range(0.0..std::f64::consts::PI);
                let alice = rng.random_bool(0.5);
                let reg = Register::new(if alice { "fa" } else { "fb" }, 2);
                post_process(&and_bits(), UnitaryOp::on(reg, gates::ry(theta))?, alice)?
            }
            _ => random_protocol(&RandomProtocolConfig::qubits(2), rng)?,
        };
        let fail = failure_probability(&p, &f, &mu)?;
        let err = protocol_error(&p, &and_task(&p, &mu)?)?;
        if i == 0 {
            t.at_most(fail, 0.0);
            t.at_most(err, 0.0);
        }
        t.at_most(fail, err / 2.0);
        t.instance();
    }
    Ok(())
}

fn ic_equivalence(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for _ in 0..200 {
        let nx = rng.random_range(2..=3);
        let ny = rng.random_range(2..=3);
        let n_r = rng.random_range(1..=2);
        let alphabets: Vec<usize> = (0..rng.random_range(1..=4)).map(|_| rng.random_range(2..=3)).collect();
        let cp = random_classical_protocol(nx, ny, n_r, &alphabets, 0.5, rng)?;
        let mu = random_distribution(nx, ny, None, rng);
        t.equal(classical_ic(&cp, &mu)?, classical_ic_prime(&cp, &mu)?);
        t.instance();
    }
    Ok(())
}

fn fuzzed_instances(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<(ProtocolSpec, ProtocolInput)>> {
    (0..n)
        .map(|_| {
            let p = qubit_protocol(rng, "")?;
            let input = ProtocolInput::from_density(&random_input_density(&p, rng), "R")?;
            Ok((p, input))
        })
        .collect()
}

fn budget_total(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for (p, input) in fuzzed_instances(rng, 25)? {
        let delta = rng.random_range(0.001..0.5);
        let rep = compression_budget(&p, &input, delta)?;
        t.equal(rep.total_rate - delta, qic_with(&p, &input)?);
        t.instance();
    }
    Ok(())
}

fn e_net_bounds(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for (p, input) in fuzzed_instances(rng, 25)? {
        for m in compression_budget(&p, &input, 0.1)?.per_message {
            let bound = (m.message_dim as f64).log2();
            t.at_most(m.e_net, bound);
            t.at_least(m.e_net, -bound);
        }
        t.instance();
    }
    Ok(())
}

fn redist_matches_qic(rng: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    for (p, input) in fuzzed_instances(rng, 25)? {
        let terms = qic_report(&p, &input, &Tolerances::default())?.terms;
        let rates = compression_budget(&p, &input, 0.1)?.per_message;
        for (term, rate) in terms.iter().zip(&rates) {
            t.equal(rate.q_min, term.value);
        }
        t.instance();
    }
    Ok(())
}

fn known_values(_: &mut ChaCha8Rng, _: &SuiteConfig, t: &mut Tally) -> Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| C64::new(x, 0.0);
    let qubits = |names: &[&str]| RegisterSystem::uniform(regs(names, &vec![2; names.len()]), Holder::Alice);

    let bell = StateVector::new(qubits(&["a", "b"])?, vec![c(h), c(0.0), c(0.0), c(h)])?;
    t.equal(mutual_info(&bell, &["a"], &["b"])?, 2.0);

    let mut g = vec![c(0.0); 8];
    g[0] = c(h);
    g[7] = c(h);
    let ghz = StateVector::new(qubits(&["a", "b", "c"])?, g)?;
    t.equal(cond_mutual_info(&ghz, &["a"], &["b"], &["c"])?, 1.0);

    let zero = StateVector::new(qubits(&["a"])?, vec![c(1.0), c(0.0)])?.density();
    let plus = StateVector::new(qubits(&["a"])?, vec![c(h), c(h)])?.density();
    t.equal(trace_distance_full(&zero, &plus)?, 2f64.sqrt());

    let uniform = JointDistribution::new(2, 1, vec![0.5, 0.5])?;
    let input = ProtocolInput::classical(&uniform, &[Register::new("x", 2)], &[], "R")?;
    t.equal(qic_with(&send_input(2), &input)?, 1.0);
    t.instance();
    Ok(())
}
