//! Device configuration and machine state.
//!
//! Traps form a linear chain `T0 - T1 - ... - T{n-1}`. Inside a trap the ion
//! chain is ordered left to right: index 0 is the end facing trap `t-1`, the
//! last index faces trap `t+1`. With two traps the shuttle path joins the
//! right end of T0 to the left end of T1.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrapId(pub usize);

impl fmt::Display for TrapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

/// A physical ion: logical qubit `qubit` of tenant `tenant`.
///
/// Tenants are numbered in submission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IonId {
    pub tenant: usize,
    pub qubit: usize,
}

impl IonId {
    pub fn new(tenant: usize, qubit: usize) -> Self {
        IonId { tenant, qubit }
    }
}

impl fmt::Display for IonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tenant, self.qubit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum End {
    Left,
    Right,
}

impl End {
    /// The end of trap `from` that faces trap `to`.
    pub fn facing(from: TrapId, to: TrapId) -> End {
        if to.0 > from.0 {
            End::Right
        } else {
            End::Left
        }
    }
}

/// Parameters of the gate fidelity model and of chain heating.
///
/// The defaults are placeholders, not calibrated hardware values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// Trap heating rate.
    pub gamma: f64,
    /// Two-qubit gate time, in the inverse unit of `gamma`.
    pub tau_2q: f64,
    /// Calibration constant in `A = alpha * N / ln N`.
    pub alpha: f64,
    /// Motional quanta added to the destination chain per shuttle.
    pub dnbar_shuttle: f64,
    /// Motional quanta added to a chain per intra-trap swap.
    pub dnbar_swap: f64,
    /// Motional quanta added to the source chain when an ion splits away.
    pub dnbar_split: f64,
    pub nbar_initial: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            gamma: 1e-5,
            tau_2q: 100.0,
            alpha: 1e-2,
            dnbar_shuttle: 0.1,
            dnbar_swap: 0.0,
            dnbar_split: 0.0,
            nbar_initial: 0.0,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma", self.gamma),
            ("tau_2q", self.tau_2q),
            ("alpha", self.alpha),
            ("dnbar_shuttle", self.dnbar_shuttle),
            ("dnbar_swap", self.dnbar_swap),
            ("dnbar_split", self.dnbar_split),
            ("nbar_initial", self.nbar_initial),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.tau_2q <= 0.0 {
            return Err(Error::InvalidConfig("tau_2q must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub n_traps: usize,
    /// Ions a trap holds for computation.
    pub trap_capacity: usize,
    /// Extra slots per trap reserved for shuttled-in ions.
    pub comm_capacity: usize,
    pub physics: PhysicsParams,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        DeviceConfig {
            n_traps: 2,
            trap_capacity: 15,
            comm_capacity: 2,
            physics: PhysicsParams::default(),
        }
    }
}

impl DeviceConfig {
    pub fn with_capacity(trap_capacity: usize) -> Self {
        DeviceConfig {
            trap_capacity,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traps == 0 {
            return Err(Error::InvalidConfig("n_traps must be >= 1".into()));
        }
        if self.trap_capacity == 0 {
            return Err(Error::InvalidConfig("trap_capacity must be >= 1".into()));
        }
        self.physics.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: DeviceConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Absolute maximum number of ions one trap can hold.
    pub fn max_chain(&self) -> usize {
        self.trap_capacity + self.comm_capacity
    }

    /// Slots available for initial placement (communication slots excluded).
    pub fn total_capacity(&self) -> usize {
        self.n_traps * self.trap_capacity
    }
}

/// Per-trap ion chains, per-chain motional energy, and an ion index.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    chains: Vec<Vec<IonId>>,
    nbar: Vec<f64>,
    index: HashMap<IonId, (TrapId, usize)>,
    /// Ions split off a chain and not yet merged, with their current trap.
    transit: Vec<(IonId, TrapId)>,
}

impl MachineState {
    pub fn new(n_traps: usize, nbar_initial: f64) -> Self {
        MachineState {
            chains: vec![Vec::new(); n_traps],
            nbar: vec![nbar_initial; n_traps],
            index: HashMap::new(),
            transit: Vec::new(),
        }
    }

    /// Build a state from explicit chains. Fails on duplicate ions or a
    /// chain longer than `trap_capacity + comm_capacity`.
    pub fn from_chains(chains: Vec<Vec<IonId>>, cfg: &DeviceConfig) -> Result<Self> {
        if chains.len() != cfg.n_traps {
            return Err(Error::InvalidConfig(format!(
                "{} chains for a {}-trap device",
                chains.len(),
                cfg.n_traps
            )));
        }
        let mut st = MachineState {
            nbar: vec![cfg.physics.nbar_initial; chains.len()],
            chains,
            index: HashMap::new(),
            transit: Vec::new(),
        };
        for (t, chain) in st.chains.iter().enumerate() {
            if chain.len() > cfg.max_chain() {
                return Err(Error::Capacity {
                    needed: chain.len(),
                    available: cfg.max_chain(),
                });
            }
            for (pos, &ion) in chain.iter().enumerate() {
                if st.index.insert(ion, (TrapId(t), pos)).is_some() {
                    return Err(Error::InvalidConfig(format!("ion {ion} placed twice")));
                }
            }
        }
        Ok(st)
    }

    pub fn n_traps(&self) -> usize {
        self.chains.len()
    }

    pub fn chains(&self) -> &[Vec<IonId>] {
        &self.chains
    }

    pub fn chain(&self, trap: TrapId) -> Result<&[IonId]> {
        self.chains
            .get(trap.0)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownTrap(trap))
    }

    pub fn nbar(&self, trap: TrapId) -> Result<f64> {
        self.nbar.get(trap.0).copied().ok_or(Error::UnknownTrap(trap))
    }

    pub fn nbars(&self) -> &[f64] {
        &self.nbar
    }

    pub fn add_nbar(&mut self, trap: TrapId, delta: f64) -> Result<()> {
        let n = self.nbar.get_mut(trap.0).ok_or(Error::UnknownTrap(trap))?;
        *n += delta;
        Ok(())
    }

    pub fn locate(&self, ion: IonId) -> Result<(TrapId, usize)> {
        self.index.get(&ion).copied().ok_or(Error::UnknownIon(ion))
    }

    pub fn trap_of(&self, ion: IonId) -> Result<TrapId> {
        self.locate(ion).map(|(t, _)| t)
    }

    /// Ions in chains plus ions in transit.
    pub fn ion_count(&self) -> usize {
        self.chains.iter().map(Vec::len).sum::<usize>() + self.transit.len()
    }

    pub fn in_transit(&self) -> &[(IonId, TrapId)] {
        &self.transit
    }

    pub fn excess_capacity(&self, trap: TrapId, cfg: &DeviceConfig) -> Result<usize> {
        let len = self.chain(trap)?.len();
        Ok(cfg.max_chain().saturating_sub(len))
    }

    fn reindex(&mut self, trap: TrapId) {
        for (pos, &ion) in self.chains[trap.0].iter().enumerate() {
            self.index.insert(ion, (trap, pos));
        }
    }

    /// Swap the ions at `pos` and `pos + 1` of a chain.
    pub fn swap_adjacent(&mut self, trap: TrapId, pos: usize) -> Result<()> {
        let chain = self.chains.get_mut(trap.0).ok_or(Error::UnknownTrap(trap))?;
        if pos + 1 >= chain.len() {
            return Err(Error::IllegalEvent(format!(
                "swap at {trap}[{pos}] outside a chain of {}",
                chain.len()
            )));
        }
        chain.swap(pos, pos + 1);
        let (a, b) = (chain[pos], chain[pos + 1]);
        self.index.insert(a, (trap, pos));
        self.index.insert(b, (trap, pos + 1));
        Ok(())
    }

    /// Detach an ion sitting at one end of its chain.
    pub fn split(&mut self, ion: IonId) -> Result<TrapId> {
        let (trap, pos) = self.locate(ion)?;
        let chain = &mut self.chains[trap.0];
        if pos == chain.len() - 1 {
            chain.pop();
        } else if pos == 0 {
            chain.remove(0);
            self.index.remove(&ion);
            self.reindex(trap);
        } else {
            return Err(Error::IllegalEvent(format!(
                "split of {ion} from the middle of {trap} (position {pos})"
            )));
        }
        self.index.remove(&ion);
        self.transit.push((ion, trap));
        Ok(trap)
    }

    /// Move an in-transit ion to an adjacent trap.
    pub fn transport(&mut self, ion: IonId, to: TrapId) -> Result<()> {
        if to.0 >= self.chains.len() {
            return Err(Error::UnknownTrap(to));
        }
        let slot = self
            .transit
            .iter_mut()
            .find(|(i, _)| *i == ion)
            .ok_or_else(|| Error::IllegalEvent(format!("move of {ion}, which is not in transit")))?;
        if slot.1 .0.abs_diff(to.0) != 1 {
            return Err(Error::IllegalEvent(format!(
                "move of {ion} from {} to non-adjacent {to}",
                slot.1
            )));
        }
        slot.1 = to;
        Ok(())
    }

    /// Join an in-transit ion to the chain of the trap it sits at.
    ///
    /// Rejected when the chain is already at `trap_capacity + comm_capacity`.
    pub fn merge(&mut self, ion: IonId, end: End, cfg: &DeviceConfig) -> Result<TrapId> {
        let k = self
            .transit
            .iter()
            .position(|(i, _)| *i == ion)
            .ok_or_else(|| Error::IllegalEvent(format!("merge of {ion}, which is not in transit")))?;
        let trap = self.transit[k].1;
        if self.chains[trap.0].len() >= cfg.max_chain() {
            return Err(Error::IllegalEvent(format!("merge of {ion} into full trap {trap}")));
        }
        self.transit.swap_remove(k);
        match end {
            End::Right => {
                self.chains[trap.0].push(ion);
                let pos = self.chains[trap.0].len() - 1;
                self.index.insert(ion, (trap, pos));
            }
            End::Left => {
                self.chains[trap.0].insert(0, ion);
                self.reindex(trap);
            }
        }
        Ok(trap)
    }

    /// Check that the index agrees with the chains and no chain is over capacity.
    pub fn check_consistency(&self, cfg: &DeviceConfig) -> Result<()> {
        let mut seen = 0;
        for (t, chain) in self.chains.iter().enumerate() {
            if chain.len() > cfg.max_chain() {
                return Err(Error::IllegalEvent(format!("T{t} holds {} ions", chain.len())));
            }
            for (pos, ion) in chain.iter().enumerate() {
                if self.index.get(ion) != Some(&(TrapId(t), pos)) {
                    return Err(Error::IllegalEvent(format!("index out of sync for {ion}")));
                }
                seen += 1;
            }
        }
        if seen != self.index.len() {
            return Err(Error::IllegalEvent("stale index entries".into()));
        }
        Ok(())
    }
}
