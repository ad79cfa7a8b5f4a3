//! Multi-tenant compiler and simulator for two-trap trapped-ion (QCCD)
//! devices, with generators for shuttle-exploiting adversarial programs and
//! the countermeasures against them.
//!
//! Pipeline: [`circuit`] programs are placed by [`mapper`], compiled by
//! [`scheduler`] (shuttle insertion, heating, [`fidelity`]), and studied by
//! [`analysis`]. [`attack`] builds adversarial programs, [`defenses`]
//! implements the mitigations, [`bench`] generates benign workloads.

pub mod analysis;
pub mod attack;
pub mod bench;
pub mod circuit;
pub mod defenses;
pub mod device;
pub mod error;
pub mod fidelity;
pub mod mapper;
pub mod rng;
pub mod scheduler;

pub use circuit::{concat, edge_weights, emit_program, parse_program, EdgeWeights, Gate, Program, Qubit};
pub use device::{DeviceConfig, IonId, MachineState, PhysicsParams, TrapId};
pub use error::{Error, Result};
pub use mapper::{place_multi, Policy, RandomScope};
pub use scheduler::{compile, count_shuttles, Schedule};

#[cfg(test)]
pub(crate) mod fixtures {
    /// Sample six-qubit program: wt(0,3)=3, wt(1,2)=2, wt(0,1)=wt(4,5)=wt(1,5)=1.
    pub const SAMPLE6: &str = "\
MS q[0],q[3]
MS q[1],q[2]
MS q[0],q[3]
MS q[0],q[1]
MS q[1],q[2]
MS q[0],q[3]
MS q[4],q[5]
MS q[1],q[5]
";
}
