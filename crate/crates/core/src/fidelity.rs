//! Two-qubit gate fidelity model and chain heating.
//!
//! `F = 1 - gamma * tau - A * (2 * nbar + 1)` with `A = alpha * N / ln N`,
//! where `N` is the number of ions in the chain executing the gate and `nbar`
//! its motional mode. Results are clamped to `[0, 1]`.

use crate::device::{MachineState, PhysicsParams};
use crate::error::{Error, Result};
use crate::scheduler::{Event, EventKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEnergy {
    pub nbar: f64,
    pub n_ions: usize,
}

/// Fidelity of one gate, and whether the raw value had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateFidelity {
    pub value: f64,
    pub clamped: bool,
}

pub fn scale_factor(n_ions: usize, alpha: f64) -> Result<f64> {
    if n_ions < 2 {
        return Err(Error::ChainTooShort(n_ions));
    }
    let n = n_ions as f64;
    Ok(alpha * n / n.ln())
}

pub fn gate_fidelity(pp: &PhysicsParams, chain: ChainEnergy) -> Result<GateFidelity> {
    let a = scale_factor(chain.n_ions, pp.alpha)?;
    let raw = 1.0 - pp.gamma * pp.tau_2q - a * (2.0 * chain.nbar + 1.0);
    Ok(GateFidelity {
        value: raw.clamp(0.0, 1.0),
        clamped: !(0.0..=1.0).contains(&raw),
    })
}

pub fn program_fidelity(fids: &[f64]) -> f64 {
    fids.iter().product()
}

/// Deposit the motional energy an event adds to the machine.
///
/// Merges heat the receiving chain, swaps heat their own chain, splits heat
/// the chain left behind. Other events leave `nbar` unchanged.
pub fn apply_heating(state: &mut MachineState, event: &Event, pp: &PhysicsParams) -> Result<()> {
    match event.kind {
        EventKind::Merge { trap, .. } => state.add_nbar(trap, pp.dnbar_shuttle),
        EventKind::Swap { trap, .. } => state.add_nbar(trap, pp.dnbar_swap),
        EventKind::Split { trap, .. } => state.add_nbar(trap, pp.dnbar_split),
        EventKind::GateExec { .. } | EventKind::Move { .. } => Ok(()),
    }
}
