//! Countermeasures: hybrid mapping, dummy-qubit padding and max-shuttle
//! admission control.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Gate, Program};
use crate::device::{DeviceConfig, MachineState};
use crate::error::{Error, Result};
use crate::mapper::{place_multi, Policy, RandomScope};
use crate::scheduler::{compile, Schedule};

#[derive(Debug, Clone)]
pub struct HybridResult {
    pub state: MachineState,
    pub schedule: Schedule,
    pub chosen: Policy,
    /// Seed of the chosen random draw; `None` when greedy won.
    pub chosen_seed: Option<u64>,
    pub greedy_shuttles: usize,
    /// One entry per random draw.
    pub random_shuttles: Vec<usize>,
    pub shuttle_count: usize,
}

/// Seed of random draw `j`; draw 0 uses `seed` itself.
pub fn hybrid_draw_seed(seed: u64, j: usize) -> u64 {
    seed.wrapping_add(j as u64)
}

/// Compile under greedy mapping and under `draws` random mappings and keep
/// the one with the fewest shuttles. Ties go to greedy, then to the earlier
/// draw.
pub fn hybrid_map(programs: &[Program], cfg: &DeviceConfig, seed: u64, draws: usize) -> Result<HybridResult> {
    hybrid_map_scoped(programs, cfg, seed, draws, RandomScope::default())
}

pub fn hybrid_map_scoped(
    programs: &[Program],
    cfg: &DeviceConfig,
    seed: u64,
    draws: usize,
    scope: RandomScope,
) -> Result<HybridResult> {
    let run = |policy: Policy, s: u64| -> Result<(MachineState, Schedule)> {
        let st = place_multi(programs, policy, cfg, s)?;
        let sched = compile(programs, &st, cfg)?;
        Ok((st, sched))
    };
    let greedy = run(Policy::Greedy, seed)?;
    let randoms = (0..draws)
        .into_par_iter()
        .map(|j| run(Policy::Random(scope), hybrid_draw_seed(seed, j)))
        .collect::<Result<Vec<_>>>()?;
    let greedy_shuttles = greedy.1.shuttle_count;
    let random_shuttles: Vec<usize> = randoms.iter().map(|r| r.1.shuttle_count).collect();

    let mut best: Option<usize> = None;
    let mut best_count = greedy_shuttles;
    for (j, &c) in random_shuttles.iter().enumerate() {
        if c < best_count {
            best = Some(j);
            best_count = c;
        }
    }
    let (chosen, chosen_seed, (state, schedule)) = match best {
        None => (Policy::Greedy, None, greedy),
        Some(j) => (
            Policy::Random(scope),
            Some(hybrid_draw_seed(seed, j)),
            randoms.into_iter().nth(j).expect("draw index in range"),
        ),
    };
    Ok(HybridResult {
        state,
        schedule,
        chosen,
        chosen_seed,
        greedy_shuttles,
        random_shuttles,
        shuttle_count: best_count,
    })
}

/// Grow a program to `target_size` qubits. Each new qubit gets one virtual-Z
/// gate so it is allocated a slot; the MS gates are untouched.
pub fn pad_victim(p: &Program, target_size: usize) -> Result<Program> {
    if target_size < p.n_qubits {
        return Err(Error::InvalidArgument(format!(
            "pad target {target_size} is below program size {}",
            p.n_qubits
        )));
    }
    let mut gates = p.gates.clone();
    gates.extend((p.n_qubits..target_size).map(Gate::Vz));
    Ok(Program::new(target_size, gates)?.with_id(p.id.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Multi,
    Single,
}

#[derive(Debug, Clone, Serialize)]
pub struct Admission {
    pub program: String,
    pub n_qubits: usize,
    pub solo_shuttles: usize,
    pub mode: Mode,
    /// Qubit slots reserved: the whole device in single mode.
    pub cost_units: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissionReport {
    pub schema: &'static str,
    pub max_shuttles: usize,
    pub decisions: Vec<Admission>,
    /// Indices of programs sharing the device.
    pub multi: Vec<usize>,
    /// Shuttles of the shared run, when it fits and has tenants.
    pub multi_shuttles: Option<usize>,
}

/// Pre-compile each program alone and isolate those whose solo shuttle
/// count exceeds `max_shuttles`.
pub fn admit(programs: &[Program], cfg: &DeviceConfig, max_shuttles: usize) -> Result<AdmissionReport> {
    let solo = programs
        .par_iter()
        .map(|p| {
            let one = std::slice::from_ref(p);
            let st = place_multi(one, Policy::Greedy, cfg, 0)?;
            Ok(compile(one, &st, cfg)?.shuttle_count)
        })
        .collect::<Result<Vec<usize>>>()?;
    let decisions: Vec<Admission> = programs
        .iter()
        .zip(&solo)
        .map(|(p, &s)| {
            let mode = if s > max_shuttles { Mode::Single } else { Mode::Multi };
            Admission {
                program: p.id.clone(),
                n_qubits: p.n_qubits,
                solo_shuttles: s,
                mode,
                cost_units: match mode {
                    Mode::Single => cfg.total_capacity(),
                    Mode::Multi => p.n_qubits,
                },
            }
        })
        .collect();
    let multi: Vec<usize> = decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| d.mode == Mode::Multi)
        .map(|(i, _)| i)
        .collect();
    let multi_shuttles = if multi.is_empty() {
        None
    } else {
        let shared: Vec<Program> = multi.iter().map(|&i| programs[i].clone()).collect();
        match place_multi(&shared, Policy::Greedy, cfg, 0) {
            Ok(st) => Some(compile(&shared, &st, cfg)?.shuttle_count),
            Err(Error::Capacity { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(AdmissionReport {
        schema: "qccd.admit.v1",
        max_shuttles,
        decisions,
        multi,
        multi_shuttles,
    })
}
