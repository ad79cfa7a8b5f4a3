use thiserror::Error;

use crate::device::{IonId, TrapId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("line {line}: MS gate uses qubit {qubit} twice")]
    DuplicateQubit { line: usize, qubit: usize },

    #[error("line {line}: negative qubit index {index}")]
    NegativeIndex { line: usize, index: i64 },

    #[error("gate {gate}: qubit {qubit} out of range for a {n_qubits}-qubit program")]
    QubitOutOfRange {
        gate: usize,
        qubit: usize,
        n_qubits: usize,
    },

    #[error("invalid device config: {0}")]
    InvalidConfig(String),

    #[error("unknown trap {0}")]
    UnknownTrap(TrapId),

    #[error("unknown ion {0}")]
    UnknownIon(IonId),

    #[error("insufficient capacity: need {needed} slots, {available} available")]
    Capacity { needed: usize, available: usize },

    #[error("ions {0} and {1} are already in the same trap")]
    CoLocated(IonId, IonId),

    #[error("shuttle blocked: tenant {tenant} gate {gate_index} needs trap {trap} but it has no excess capacity")]
    ShuttleBlocked {
        tenant: usize,
        gate_index: usize,
        trap: TrapId,
    },

    #[error("shuttle of {ion} blocked: {trap} has no excess capacity")]
    Blocked { ion: IonId, trap: TrapId },

    #[error("illegal state transition: {0}")]
    IllegalEvent(String),

    #[error("chain length {0} too short for a two-qubit gate")]
    ChainTooShort(usize),

    #[error("no collision-free bridging gate between shuttle controller and mapping controller")]
    NoBridge,

    #[error("invalid attack parameters: {0}")]
    InvalidAttack(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
