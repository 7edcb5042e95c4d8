//! Argument parsing and the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qicost_core::classical::{
    classical_ic, classical_ic_prime_terms, failure_probability,
};
use qicost_core::constructions::{
    and_average_dimension, and_average_protocol, concavity_check, convex_mix, fix_input, parallel_compose, Slot,
    SlotSide,
};
use qicost_core::protocol::{
    nfold_error_check, protocol_error, qcc, qic_report, CopySlots, Simulation, DEFAULT_MAX_DIM,
};
use qicost_core::redistribution::{compression_budget, redist_rates_with, RateReport};
use qicost_core::{entropy, Holder, ProtocolInput, ProtocolSpec, QuantumTask, Register, Tolerances};

use crate::format::{
    load_channel, load_classical_protocol, load_distribution, load_function_pair, load_protocol,
    load_protocol_unchecked, load_state, save_protocol, save_state, AnyState,
};
use crate::suite::{check_ids, registry, run_suite, Status, SuiteConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    /// One JSON record per line.
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Parser)]
#[command(name = "qicost", version, about = "Information and communication cost of two-party quantum protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Loosen every numerical gate (normalisation, unitarity, positivity, equality) to this value.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = SuiteConfig::default().seed)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,

    /// Largest global state dimension a simulation may reach.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a protocol file and list every finding.
    Validate { protocol: PathBuf },
    /// Run a protocol on an input state and report the output.
    Run {
        protocol: PathBuf,
        state: PathBuf,
        /// Write the output density operator here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantum communication cost.
    Qcc { protocol: PathBuf },
    /// Quantum information cost with per-message terms.
    Qic { protocol: PathBuf, state: PathBuf },
    /// Distance between the protocol's output and a channel's on an input.
    Error {
        protocol: PathBuf,
        channel: PathBuf,
        state: PathBuf,
        /// Fail when the error exceeds this.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Per-copy error of an n-copy protocol; copy i uses registers suffixed `_i`.
    NfoldError {
        protocol: PathBuf,
        channel: PathBuf,
        state: PathBuf,
        #[arg(long)]
        copies: usize,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Parallel composition of two protocols.
    Compose {
        first: PathBuf,
        second: PathBuf,
        /// Prefix for every register of the second protocol.
        #[arg(long)]
        prefix: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Freeze one input slot with a fixed state.
    FixInput {
        protocol: PathBuf,
        /// State on the slot's input registers.
        state: PathBuf,
        #[arg(long, value_delimiter = ',')]
        a_in: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        b_in: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        a_out: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        b_out: Vec<String>,
        /// Which slot is frozen; the second hands its purifier to Alice, the first to Bob.
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coherent mixture `p P1 + (1 - p) P2`.
    Mix {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare QIC on a mixture of inputs with the mixture of QICs.
    Concavity {
        protocol: PathBuf,
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// Average an n-slot protocol into a single-slot one.
    DisjAnd {
        protocol: PathBuf,
        /// Slot as `alice_register:bob_register`; repeat once per slot.
        #[arg(long = "slot", required = true)]
        slots: Vec<String>,
        /// Distribution of one slot's inputs.
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also evaluate both sides of the cost identity.
        #[arg(long)]
        check: bool,
    },
    /// Information cost of a classical protocol.
    Ic { protocol: PathBuf, distribution: PathBuf },
    /// Per-message form of the classical information cost.
    IcPrime { protocol: PathBuf, distribution: PathBuf },
    /// Failure probability of a protocol computing a classical function.
    FailureProb {
        protocol: PathBuf,
        function: PathBuf,
        distribution: PathBuf,
    },
    /// State redistribution rates for a pure state split into A, B, C, R.
    RedistRates {
        state: PathBuf,
        #[arg(long, value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        c: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<String>,
    },
    /// Per-message compression budget.
    Budget {
        protocol: PathBuf,
        state: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Run registered numerical checks (all by default).
    Suite {
        checks: Vec<String>,
        /// List check ids and exit.
        #[arg(long)]
        list: bool,
    },
}

/// What a command produced: text lines, structured records, and whether
/// every check it performed passed.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub records: Vec<Value>,
    pub ok: bool,
}

impl Report {
    fn new() -> Self {
        Self {
            ok: true,
            ..Self::default()
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn record(&mut self, v: Value) {
        self.records.push(v);
    }

    pub fn render(&self, format: ReportFormat) -> String {
        let mut out = String::new();
        match format {
            ReportFormat::Text => self.lines.iter().for_each(|l| {
                out.push_str(l);
                out.push('\n');
            }),
            ReportFormat::Structured => self.records.iter().for_each(|r| {
                out.push_str(&r.to_string());
                out.push('\n');
            }),
        }
        out
    }
}

struct Ctx {
    tol: Tolerances,
    max_dim: usize,
    seed: u64,
    tol_override: Option<f64>,
}

impl Ctx {
    fn guard(&self, p: &ProtocolSpec, input: &ProtocolInput) -> anyhow::Result<()> {
        let d = p.preshared.dim() as u128 * input.state().dim() as u128;
        if d > self.max_dim as u128 {
            bail!("simulation needs global dimension {d}, above --max-dim {}", self.max_dim);
        }
        Ok(())
    }
}

/// Input for a protocol: pure states are used as given (registers tagged
/// `reference` purify the rest), mixed states get a minimal purification.
pub fn protocol_input(state: AnyState, p: &ProtocolSpec) -> anyhow::Result<ProtocolInput> {
    match state {
        AnyState::Pure(s) => {
            let refs: Vec<String> = s
                .system()
                .names()
                .into_iter()
                .zip(s.system().holders())
                .filter(|(_, h)| **h == Holder::Reference)
                .map(|(n, _)| n)
                .collect();
            if refs.is_empty() {
                Ok(ProtocolInput::pure(s))
            } else {
                Ok(ProtocolInput::purified(s, &refs)?)
            }
        }
        AnyState::Mixed(rho) => {
            let mut taken = p.register_names();
            taken.extend(rho.system().names());
            let r = (0..)
                .map(|k| if k == 0 { "R".to_string() } else { format!("R{k}") })
                .find(|n| !taken.contains(n))
                .expect("unbounded");
            Ok(ProtocolInput::from_density(&rho, &r)?)
        }
    }
}

fn load_input(path: &Path, p: &ProtocolSpec, ctx: &Ctx) -> anyhow::Result<ProtocolInput> {
    let input = protocol_input(load_state(path, &ctx.tol)?, p)?;
    ctx.guard(p, &input)?;
    Ok(input)
}

fn rates_json(r: &RateReport) -> Value {
    json!({
        "q_min": r.q_min,
        "e_net": r.e_net,
        "h_c_given_b": r.h_c_given_b,
        "q_sum": r.q_sum,
        "rounding": r.rounding,
        "total_rate": r.total_rate,
        "per_message": r.per_message.iter().map(|m| json!({
            "step": m.step, "message_dim": m.message_dim, "q_min": m.q_min,
            "e_net": m.e_net, "q": m.q, "f": m.f,
        })).collect::<Vec<_>>(),
    })
}

fn parse_slot(s: &str) -> anyhow::Result<Slot> {
    let (a, b) = s
        .split_once(':')
        .with_context(|| format!("slot {s:?} should look like alice_register:bob_register"))?;
    Ok(Slot {
        a_in: vec![a.to_string()],
        b_in: vec![b.to_string()],
        ..Slot::default()
    })
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> anyhow::Result<Report> {
    let ctx = Ctx {
        tol: cli.tol.map(Tolerances::uniform).unwrap_or_default(),
        max_dim: cli.max_dim,
        seed: cli.seed,
        tol_override: cli.tol,
    };
    let mut rep = Report::new();
    match &cli.command {
        Command::Validate { protocol } => {
            let p = load_protocol_unchecked(protocol, &ctx.tol)?;
            let findings = p.validate_with(&ctx.tol);
            rep.ok = findings.is_empty();
            if rep.ok {
                rep.line(format!("valid: {} messages, QCC {}", p.message_count(), qcc(&p)?));
            }
            for f in &findings {
                rep.line(format!("finding {f}"));
            }
            rep.record(json!({
                "command": "validate",
                "valid": rep.ok,
                "findings": findings.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            }));
        }
        Command::Run { protocol, state, out } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let input = protocol_input(load_state(state, &ctx.tol)?, &p)?;
            let output = Simulation::start_with_limit(&p, &input, ctx.max_dim)?.finish()?;
            let names = output.system().names();
            let h = entropy(&output, &names)?;
            rep.line(format!("output registers: {}", names.join(", ")));
            rep.line(format!("trace {:.12}, entropy {:.12}", output.trace(), h));
            if let Some(path) = out {
                save_state(path, &AnyState::Mixed(output.clone()))?;
                rep.line(format!("wrote {}", path.display()));
            }
            rep.record(json!({"command": "run", "registers": names, "trace": output.trace(), "entropy": h}));
        }
        Command::Qcc { protocol } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let v = qcc(&p)?;
            rep.line(format!("QCC {v}"));
            rep.record(json!({"command": "qcc", "qcc": v, "messages": p.message_count()}));
        }
        Command::Qic { protocol, state } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let input = load_input(state, &p, &ctx)?;
            let r = qic_report(&p, &input, &ctx.tol)?;
            for t in &r.terms {
                rep.line(format!(
                    "message {} from {} [{}]: {:.12}",
                    t.step,
                    t.sender.as_str(),
                    t.message.join(", "),
                    t.value
                ));
            }
            rep.line(format!("QIC {:.12}", r.total));
            rep.record(json!({
                "command": "qic",
                "qic": r.total,
                "terms": r.terms.iter().map(|t| json!({"step": t.step, "value": t.value})).collect::<Vec<_>>(),
            }));
        }
        Command::Error {
            protocol,
            channel,
            state,
            epsilon,
        } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let ch = load_channel(channel, &ctx.tol)?;
            let input = load_input(state, &p, &ctx)?;
            let eps = epsilon.unwrap_or(2.0);
            let task = QuantumTask::new(ch, input, eps)?;
            let err = protocol_error(&p, &task)?;
            rep.ok = err <= eps;
            rep.line(format!("error {err:.12} (bound {eps})"));
            rep.record(json!({"command": "error", "error": err, "epsilon": eps, "within": rep.ok}));
        }
        Command::NfoldError {
            protocol,
            channel,
            state,
            copies,
            epsilon,
        } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let ch = load_channel(channel, &ctx.tol)?;
            let input = protocol_input(load_state(state, &ctx.tol)?, &p)?;
            let eps = epsilon.unwrap_or(2.0);
            let d = (input.state().dim() as u128).pow(*copies as u32) * p.preshared.dim() as u128;
            if d > ctx.max_dim as u128 {
                bail!("simulation needs global dimension {d}, above --max-dim {}", ctx.max_dim);
            }
            let slots: Vec<CopySlots> = (1..=*copies).map(|i| CopySlots::suffixed(&ch, &format!("_{i}"))).collect();
            let task = QuantumTask::new(ch, input, eps)?;
            let r = nfold_error_check(&p, &task, &slots)?;
            rep.ok = r.success();
            for (i, d) in r.distances.iter().enumerate() {
                rep.line(format!("copy {}: error {d:.12}", i + 1));
            }
            rep.line(format!("all within {eps}: {}", rep.ok));
            rep.record(json!({"command": "nfold-error", "distances": r.distances, "epsilon": eps, "within": rep.ok}));
        }
        Command::Compose {
            first,
            second,
            prefix,
            out,
        } => {
            let p1 = load_protocol(first, &ctx.tol)?;
            let mut p2 = load_protocol(second, &ctx.tol)?;
            if let Some(pre) = prefix {
                p2 = p2.with_prefix(pre)?;
            }
            let p = parallel_compose(&p1, &p2)?;
            save_protocol(out, &p)?;
            rep.line(format!("wrote {} ({} messages, QCC {})", out.display(), p.message_count(), qcc(&p)?));
            rep.record(json!({"command": "compose", "out": out, "messages": p.message_count(), "qcc": qcc(&p)?}));
        }
        Command::FixInput {
            protocol,
            state,
            a_in,
            b_in,
            a_out,
            b_out,
            side,
            out,
        } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let rho = load_state(state, &ctx.tol)?.density();
            let slot = Slot {
                a_in: a_in.clone(),
                b_in: b_in.clone(),
                a_out: a_out.clone(),
                b_out: b_out.clone(),
            };
            let side = match side {
                Side::First => SlotSide::First,
                Side::Second => SlotSide::Second,
            };
            let q = fix_input(&p, &slot, side, &rho)?;
            save_protocol(out, &q)?;
            rep.line(format!("wrote {}", out.display()));
            rep.record(json!({"command": "fix-input", "out": out}));
        }
        Command::Mix { first, second, p, out } => {
            let p1 = load_protocol(first, &ctx.tol)?;
            let p2 = load_protocol(second, &ctx.tol)?;
            let q = convex_mix(&p1, &p2, *p)?;
            save_protocol(out, &q)?;
            rep.line(format!("wrote {} ({} messages)", out.display(), q.message_count()));
            rep.record(json!({"command": "mix", "out": out, "messages": q.message_count()}));
        }
        Command::Concavity {
            protocol,
            first,
            second,
            p,
        } => {
            let proto = load_protocol(protocol, &ctx.tol)?;
            let r1 = load_state(first, &ctx.tol)?.density();
            let r2 = load_state(second, &ctx.tol)?.density();
            let r = concavity_check(&proto, &r1, &r2, *p)?;
            rep.ok = r.holds(ctx.tol.eq);
            rep.line(format!("lhs {:.12}  rhs {:.12}  slack {:.3e}", r.lhs, r.rhs, r.slack));
            rep.record(json!({"command": "concavity", "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack, "holds": rep.ok}));
        }
        Command::DisjAnd {
            protocol,
            slots,
            mu,
            out,
            check,
        } => {
            let pd = load_protocol(protocol, &ctx.tol)?;
            let slots = slots.iter().map(|s| parse_slot(s)).collect::<anyhow::Result<Vec<_>>>()?;
            let mu = load_distribution(mu, &ctx.tol)?;
            let pa = and_average_protocol(&pd, &slots, &mu, "x", "y")?;
            let dim = and_average_dimension(&pd, &slots, &mu, mu.support().len());
            rep.line(format!("averaged protocol: inputs x, y; simulation dimension {dim}"));
            if let Some(path) = out {
                save_protocol(path, &pa)?;
                rep.line(format!("wrote {}", path.display()));
            }
            let mut rec = json!({"command": "disj-and", "dimension": dim.to_string()});
            if *check {
                if dim > ctx.max_dim as u128 {
                    bail!("the check needs global dimension {dim}, above --max-dim {}", ctx.max_dim);
                }
                let (x, y) = (Register::new("x", mu.nx), Register::new("y", mu.ny));
                let sigma = ProtocolInput::classical(&mu, &[x], &[y], "R")?;
                let lhs = qic_report(&pa, &sigma, &ctx.tol)?.total;
                let mut joint_mu = mu.clone();
                for _ in 1..slots.len() {
                    joint_mu = joint_mu.product(&mu);
                }
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for s in &slots {
                    a.push(Register::new(s.a_in[0].clone(), mu.nx));
                    b.push(Register::new(s.b_in[0].clone(), mu.ny));
                }
                let joint = ProtocolInput::classical(&joint_mu, &a, &b, "R")?;
                let rhs = qic_report(&pd, &joint, &ctx.tol)?.total / slots.len() as f64;
                let tol = ctx.tol_override.unwrap_or(1e-5);
                rep.ok = (lhs - rhs).abs() <= tol;
                rep.line(format!("QIC averaged {lhs:.12}  QIC whole / n {rhs:.12}  difference {:.3e}", lhs - rhs));
                rec["lhs"] = json!(lhs);
                rec["rhs"] = json!(rhs);
                rec["equal"] = json!(rep.ok);
            }
            rep.record(rec);
        }
        Command::Ic { protocol, distribution } => {
            let cp = load_classical_protocol(protocol)?;
            let mu = load_distribution(distribution, &ctx.tol)?;
            let ic = classical_ic(&cp, &mu)?;
            let cc = cp.communication_cost(&mu)?;
            rep.line(format!("IC {ic:.12}"));
            rep.line(format!("CC max {}  average {:.12}", cc.max, cc.average));
            rep.record(json!({"command": "ic", "ic": ic, "cc_max": cc.max, "cc_average": cc.average}));
        }
        Command::IcPrime { protocol, distribution } => {
            let cp = load_classical_protocol(protocol)?;
            let mu = load_distribution(distribution, &ctx.tol)?;
            let terms = classical_ic_prime_terms(&cp, &mu)?;
            for (i, t) in terms.iter().enumerate() {
                rep.line(format!("message {}: {t:.12}", i + 1));
            }
            let total: f64 = terms.iter().sum();
            rep.line(format!("IC' {total:.12}"));
            rep.record(json!({"command": "ic-prime", "ic_prime": total, "terms": terms}));
        }
        Command::FailureProb {
            protocol,
            function,
            distribution,
        } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let f = load_function_pair(function)?;
            let mu = load_distribution(distribution, &ctx.tol)?;
            let v = failure_probability(&p, &f, &mu)?;
            rep.line(format!("failure probability {v:.12}"));
            rep.record(json!({"command": "failure-prob", "failure_probability": v}));
        }
        Command::RedistRates { state, a, b, c, r } => {
            let AnyState::Pure(s) = load_state(state, &ctx.tol)? else {
                bail!("redistribution rates need a pure state (give `amplitudes`)");
            };
            let rates = redist_rates_with(&s, a, b, c, r, &ctx.tol)?;
            rep.line(format!("q_min {:.12}", rates.q_min));
            rep.line(format!("e_net {:.12}", rates.e_net));
            rep.line(format!("H(C|B) {:.12}", rates.h_c_given_b));
            let mut v = rates_json(&rates);
            v["command"] = json!("redist-rates");
            rep.record(v);
        }
        Command::Budget { protocol, state, delta } => {
            let p = load_protocol(protocol, &ctx.tol)?;
            let input = load_input(state, &p, &ctx)?;
            let r = compression_budget(&p, &input, *delta)?;
            for m in &r.per_message {
                rep.line(format!(
                    "message {} (dim {}): q_min {:.9}  Q {:.9}  e_net {:.9}  F {:.9}",
                    m.step, m.message_dim, m.q_min, m.q, m.e_net, m.f
                ));
            }
            rep.line(format!("sum Q {:.12}  rounding {:.12}  total rate {:.12}", r.q_sum, r.rounding, r.total_rate));
            let mut v = rates_json(&r);
            v["command"] = json!("budget");
            v["delta"] = json!(delta);
            rep.record(v);
        }
        Command::Suite { checks, list } => {
            if *list {
                for c in registry() {
                    rep.line(format!("{:<30} {}", c.id, c.anchor));
                    rep.record(json!({"check_id": c.id, "anchor": c.anchor, "tolerance": c.tolerance}));
                }
                return Ok(rep);
            }
            let cfg = SuiteConfig {
                seed: ctx.seed,
                tolerance: ctx.tol_override,
                max_dim: ctx.max_dim,
            };
            let results = run_suite(checks, &cfg).with_context(|| format!("known checks: {}", check_ids().join(", ")))?;
            rep.ok = results.iter().all(|r| r.status != Status::Fail);
            for r in &results {
                rep.line(r.text_line());
                rep.record(to_value(r));
            }
            let failed = results.iter().filter(|r| r.status == Status::Fail).count();
            rep.line(format!("{} checks, {failed} failed (seed {})", results.len(), ctx.seed));
        }
    }
    Ok(rep)
}
