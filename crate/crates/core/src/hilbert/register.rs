use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// A named tensor factor of the global state space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        assert!(dim >= 1, "register dimension must be positive");
        Self {
            name: name.into(),
            dim,
        }
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.dim)
    }
}

/// Who currently holds a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Holder {
    Alice,
    Bob,
    InFlight,
    Reference,
}

impl Holder {
    pub fn as_str(self) -> &'static str {
        match self {
            Holder::Alice => "alice",
            Holder::Bob => "bob",
            Holder::InFlight => "in_flight",
            Holder::Reference => "reference",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alice" | "a" => Some(Holder::Alice),
            "bob" | "b" => Some(Holder::Bob),
            "in_flight" | "inflight" => Some(Holder::InFlight),
            "reference" | "ref" | "r" => Some(Holder::Reference),
            _ => None,
        }
    }
}

/// Ordered registers with holder tags. The leftmost register is the most
/// significant digit of the computational-basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterSystem {
    registers: Vec<Register>,
    holders: Vec<Holder>,
}

impl RegisterSystem {
    pub fn new(registers: Vec<Register>, holders: Vec<Holder>) -> Result<Self> {
        if registers.len() != holders.len() {
            return Err(Error::DimMismatch(format!(
                "{} registers but {} holder tags",
                registers.len(),
                holders.len()
            )));
        }
        let mut seen = HashSet::new();
        for r in &registers {
            if r.dim == 0 {
                return Err(Error::DimMismatch(format!("register {} has dimension 0", r.name)));
            }
            if !seen.insert(r.name.as_str()) {
                return Err(Error::NameCollision(r.name.clone()));
            }
        }
        Ok(Self { registers, holders })
    }

    /// All registers tagged with the same holder.
    pub fn uniform(registers: Vec<Register>, holder: Holder) -> Result<Self> {
        let holders = vec![holder; registers.len()];
        Self::new(registers, holders)
    }

    pub fn empty() -> Self {
        Self {
            registers: Vec::new(),
            holders: Vec::new(),
        }
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn holders(&self) -> &[Holder] {
        &self.holders
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.registers.iter().map(|r| r.name.clone()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn holder(&self, name: &str) -> Option<Holder> {
        self.position(name).map(|i| self.holders[i])
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        self.register(name)
            .map(|r| r.dim)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Product of the dimensions of the named registers.
    pub fn dim_of_all<S: AsRef<str>>(&self, names: &[S]) -> Result<usize> {
        names
            .iter()
            .map(|n| self.dim_of(n.as_ref()))
            .try_fold(1usize, |acc, d| d.map(|d| acc * d))
    }

    pub fn held_by(&self, holder: Holder) -> Vec<String> {
        self.registers
            .iter()
            .zip(&self.holders)
            .filter(|(_, h)| **h == holder)
            .map(|(r, _)| r.name.clone())
            .collect()
    }

    pub fn set_holder(&mut self, name: &str, holder: Holder) -> Result<()> {
        let i = self
            .position(name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))?;
        self.holders[i] = holder;
        Ok(())
    }

    /// Retag every register currently held by `from`.
    pub fn retag(&mut self, from: Holder, to: Holder) {
        for h in self.holders.iter_mut() {
            if *h == from {
                *h = to;
            }
        }
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &RegisterSystem) -> Result<Self> {
        for r in &other.registers {
            if self.contains(&r.name) {
                return Err(Error::NameCollision(r.name.clone()));
            }
        }
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        let mut holders = self.holders.clone();
        holders.extend(other.holders.iter().copied());
        Ok(Self { registers, holders })
    }

    /// Positions of the named registers, erroring on unknown or repeated names.
    pub fn positions<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self
                .position(n.as_ref())
                .ok_or_else(|| Error::UnknownRegister(n.as_ref().to_string()))?;
            if out.contains(&p) {
                return Err(Error::NameCollision(n.as_ref().to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Positions not listed in `positions`, in system order.
    pub fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !positions.contains(i)).collect()
    }

    /// Sub-system made of the given positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self {
            registers: positions.iter().map(|&i| self.registers[i].clone()).collect(),
            holders: positions.iter().map(|&i| self.holders[i]).collect(),
        }
    }

    /// Row-major strides: stride of the last register is 1.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.len()];
        for i in (0..self.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.registers[i + 1].dim;
        }
        strides
    }

    /// Linear offsets contributed by every basis configuration of the
    /// registers at `positions`, enumerated with the first listed register
    /// most significant.
    pub fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let dims: Vec<usize> = positions.iter().map(|&p| self.registers[p].dim).collect();
        let st: Vec<usize> = positions.iter().map(|&p| strides[p]).collect();
        offset_table(&dims, &st)
    }

    pub fn rename(&mut self, from: &str, to: &str) -> Result<()> {
        if from != to && self.contains(to) {
            return Err(Error::NameCollision(to.to_string()));
        }
        let i = self
            .position(from)
            .ok_or_else(|| Error::UnknownRegister(from.to_string()))?;
        self.registers[i].name = to.to_string();
        Ok(())
    }

    pub(crate) fn replace(&mut self, registers: Vec<Register>, holders: Vec<Holder>) {
        debug_assert_eq!(registers.len(), holders.len());
        self.registers = registers;
        self.holders = holders;
    }
}

/// Enumerates `Σ_k idx_k * strides_k` over the mixed-radix counter with
/// digits `dims`, first digit most significant.
pub(crate) fn offset_table(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    out.push(0usize);
    // Grow from the most significant digit: each pass multiplies the table.
    for (d, s) in dims.iter().zip(strides) {
        let prev = std::mem::take(&mut out);
        out.reserve(prev.len() * d);
        for base in prev {
            for k in 0..*d {
                out.push(base + k * s);
            }
        }
    }
    out
}
