//! Initial mapping of program qubits onto trap slots.
//!
//! Every trap offers `trap_capacity` slots for initial placement; the
//! communication slots stay free for shuttled ions. Slots are numbered along
//! the trap chain, `T0[0], T0[1], ..., T1[0], ...`. A program placed
//! `Forward` takes the lowest free slots, one placed `Backward` the highest,
//! so two tenants grow toward each other from opposite ends of the device
//! and never interleave.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::circuit::{edge_weights, Program, Qubit};
use crate::device::{DeviceConfig, IonId, MachineState, TrapId};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, sub_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// How far random mapping may scatter ions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomScope {
    /// Shuffle each tenant inside its own contiguous segment.
    #[default]
    Segment,
    /// Additionally shuffle all ions sharing a trap, mixing tenants.
    Trap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Greedy,
    Random(RandomScope),
}

/// Qubit allocation order of the greedy policy.
///
/// Edges sorted by weight (descending) then first appearance; each edge
/// contributes its not-yet-placed endpoints in the order they are listed in
/// the edge's first gate. Qubits without any MS gate come last, ascending.
pub fn greedy_order(p: &Program) -> Vec<Qubit> {
    let mut placed = vec![false; p.n_qubits];
    let mut order = Vec::with_capacity(p.n_qubits);
    for e in edge_weights(p).sorted() {
        for q in [e.first_listed.0, e.first_listed.1] {
            if !placed[q] {
                placed[q] = true;
                order.push(q);
            }
        }
    }
    order.extend((0..p.n_qubits).filter(|&q| !placed[q]));
    order
}

/// Initial-placement slot grid.
struct Slots<'a> {
    cfg: &'a DeviceConfig,
    cells: Vec<Option<IonId>>,
}

impl<'a> Slots<'a> {
    fn new(cfg: &'a DeviceConfig) -> Self {
        Slots {
            cfg,
            cells: vec![None; cfg.total_capacity()],
        }
    }

    fn free(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Free slots reachable from `start` walking in `dir`.
    fn run(&self, start: usize, dir: Direction) -> Vec<usize> {
        let free = |&s: &usize| self.cells[s].is_none();
        match dir {
            Direction::Forward => (start..self.cells.len()).filter(free).collect(),
            Direction::Backward => (0..=start).rev().filter(free).collect(),
        }
    }

    fn start_slot(&self, trap: TrapId, dir: Direction) -> Result<usize> {
        if trap.0 >= self.cfg.n_traps {
            return Err(Error::UnknownTrap(trap));
        }
        let cap = self.cfg.trap_capacity;
        Ok(match dir {
            Direction::Forward => trap.0 * cap,
            Direction::Backward => trap.0 * cap + cap - 1,
        })
    }

    /// Place `order` (qubits of `tenant`) one by one along the run.
    fn place(&mut self, tenant: usize, order: &[Qubit], start: usize, dir: Direction) -> Result<Vec<usize>> {
        let run = self.run(start, dir);
        if run.len() < order.len() {
            return Err(Error::Capacity {
                needed: order.len(),
                available: run.len(),
            });
        }
        for (&slot, &q) in run.iter().zip(order) {
            self.cells[slot] = Some(IonId::new(tenant, q));
        }
        Ok(run[..order.len()].to_vec())
    }

    fn into_state(self) -> Result<MachineState> {
        let cfg = self.cfg;
        let chains = self
            .cells
            .chunks(cfg.trap_capacity)
            .map(|trap| trap.iter().flatten().copied().collect())
            .collect();
        MachineState::from_chains(chains, cfg)
    }
}

fn shuffled_qubits(n: usize, seed: u64) -> Vec<Qubit> {
    let mut order: Vec<Qubit> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    order
}

/// Greedy placement of a single program (tenant 0).
pub fn greedy_map(p: &Program, cfg: &DeviceConfig, start_trap: TrapId, direction: Direction) -> Result<MachineState> {
    let mut slots = Slots::new(cfg);
    let start = slots.start_slot(start_trap, direction)?;
    slots.place(0, &greedy_order(p), start, direction)?;
    slots.into_state()
}

/// Uniformly random placement of a single program (tenant 0) over the
/// slots the greedy policy would occupy.
pub fn random_map(
    p: &Program,
    cfg: &DeviceConfig,
    start_trap: TrapId,
    direction: Direction,
    seed: u64,
) -> Result<MachineState> {
    let mut slots = Slots::new(cfg);
    let start = slots.start_slot(start_trap, direction)?;
    slots.place(0, &shuffled_qubits(p.n_qubits, seed), start, direction)?;
    slots.into_state()
}

/// Place several tenants on one device.
///
/// Tenant `i` grows forward from `T0` when `i` is even and backward from the
/// last trap when `i` is odd. Under random policy tenant `i` draws its order
/// from `sub_seed(seed, i)`; with [`RandomScope::Trap`] each trap `t` is then
/// shuffled again with `sub_seed(seed, 1 << 32 | t)`.
pub fn place_multi(programs: &[Program], policy: Policy, cfg: &DeviceConfig, seed: u64) -> Result<MachineState> {
    cfg.validate()?;
    let needed: usize = programs.iter().map(|p| p.n_qubits).sum();
    if needed > cfg.total_capacity() {
        return Err(Error::Capacity {
            needed,
            available: cfg.total_capacity(),
        });
    }
    let mut slots = Slots::new(cfg);
    let last = cfg.total_capacity().saturating_sub(1);
    for (tenant, p) in programs.iter().enumerate() {
        let order = match policy {
            Policy::Greedy => greedy_order(p),
            Policy::Random(_) => shuffled_qubits(p.n_qubits, sub_seed(seed, tenant as u64)),
        };
        let (start, dir) = if tenant % 2 == 0 {
            (0, Direction::Forward)
        } else {
            (last, Direction::Backward)
        };
        slots.place(tenant, &order, start, dir)?;
    }
    debug_assert_eq!(slots.free(), cfg.total_capacity() - needed);

    if policy == Policy::Random(RandomScope::Trap) {
        let cap = cfg.trap_capacity;
        for t in 0..cfg.n_traps {
            let cells = &mut slots.cells[t * cap..(t + 1) * cap];
            let mut ions: Vec<IonId> = cells.iter().flatten().copied().collect();
            ions.shuffle(&mut rng_from_seed(sub_seed(seed, 1 << 32 | t as u64)));
            let mut it = ions.into_iter();
            for c in cells.iter_mut().filter(|c| c.is_some()) {
                *c = it.next();
            }
        }
    }
    slots.into_state()
}
