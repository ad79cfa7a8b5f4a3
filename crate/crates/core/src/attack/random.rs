//! Black-box adversarial program search.
//!
//! A candidate holds one MS gate per qubit pair in a shuffled order. Many
//! candidates are compiled next to pseudo-victims (tenant programs the
//! adversary submits itself); the one with the highest mean shuttle count
//! wins and is then pruned gate by gate.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{co_run_shuttles, random_victim, VICTIM_LENGTH};
use crate::circuit::{Gate, Program};
use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::mapper::Policy;
use crate::rng::{rng_from_seed, sub_seed};

/// Stream offset separating pseudo-victim seeds from candidate seeds.
const PSEUDO_VICTIM_STREAM: u64 = 0x5053_4555_444f;

pub fn gen_candidate(n_qubits: usize, seed: u64) -> Result<Program> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!("candidate needs >= 2 qubits, got {n_qubits}")));
    }
    let mut gates: Vec<Gate> = (0..n_qubits)
        .flat_map(|a| (a + 1..n_qubits).map(move |b| Gate::Ms(a, b)))
        .collect();
    gates.shuffle(&mut rng_from_seed(seed));
    Ok(Program::new(n_qubits, gates)?.with_id("random-adversary"))
}

/// Pseudo-victim of `size` qubits used during the search.
pub fn pseudo_victim(size: usize, seed: u64) -> Result<Program> {
    random_victim(size, VICTIM_LENGTH, sub_seed(seed ^ PSEUDO_VICTIM_STREAM, size as u64))
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub best_index: usize,
    pub best: Program,
    pub victim_sizes: Vec<usize>,
    /// `shuttles[c][k]`: candidate `c` against the pseudo-victim of `victim_sizes[k]`.
    pub shuttles: Vec<Vec<usize>>,
    pub means: Vec<f64>,
}

impl SearchResult {
    pub fn best_row(&self) -> &[usize] {
        &self.shuttles[self.best_index]
    }
}

/// Generate `n_candidates` random programs over `adversary_size` qubits
/// and keep the one with the highest mean shuttle count across one
/// pseudo-victim per size. Ties go to the lower candidate index.
///
/// Candidate `i` is seeded with `sub_seed(seed, i)`.
pub fn search_best(
    n_candidates: usize,
    adversary_size: usize,
    victim_sizes: &[usize],
    cfg: &DeviceConfig,
    seed: u64,
) -> Result<SearchResult> {
    if n_candidates == 0 {
        return Err(Error::InvalidArgument("need at least one candidate".into()));
    }
    if victim_sizes.is_empty() {
        return Err(Error::Empty("victim sizes"));
    }
    let n = adversary_size;
    let victims = victim_sizes
        .iter()
        .map(|&s| pseudo_victim(s, seed))
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..n_candidates)
        .into_par_iter()
        .map(|i| {
            let cand = gen_candidate(n, sub_seed(seed, i as u64))?;
            let row = victims
                .iter()
                .map(|v| co_run_shuttles(&cand, v, cfg, Policy::Greedy, 0))
                .collect::<Result<Vec<usize>>>()?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let means: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().sum::<usize>() as f64 / r.len() as f64)
        .collect();
    let mut best_index = 0;
    for (i, &m) in means.iter().enumerate() {
        if m > means[best_index] {
            best_index = i;
        }
    }
    Ok(SearchResult {
        best_index,
        best: gen_candidate(n, sub_seed(seed, best_index as u64))?,
        victim_sizes: victim_sizes.to_vec(),
        shuttles: rows,
        means,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PruneStep {
    /// Index of the gate in the unpruned program.
    pub gate_index: usize,
    pub removed: bool,
    /// Total shuttles measured with the gate taken out.
    pub shuttles_without: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PruneResult {
    pub program: Program,
    pub baseline: usize,
    pub final_shuttles: usize,
    pub removed: usize,
    pub log: Vec<PruneStep>,
}

fn total_shuttles(p: &Program, victims: &[Program], cfg: &DeviceConfig) -> Result<usize> {
    victims
        .iter()
        .map(|v| co_run_shuttles(p, v, cfg, Policy::Greedy, 0))
        .sum()
}

/// One forward pass of gate removal against the summed shuttle count over
/// `victims`. A removal sticks when the count does not fall below the
/// unpruned baseline.
pub fn prune_against(p: &Program, victims: &[Program], cfg: &DeviceConfig) -> Result<PruneResult> {
    if victims.is_empty() {
        return Err(Error::Empty("pruning victims"));
    }
    let baseline = total_shuttles(p, victims, cfg)?;
    // (original index, gate) pairs still in the program
    let mut kept: Vec<(usize, Gate)> = p.gates.iter().copied().enumerate().collect();
    let mut log = Vec::with_capacity(kept.len());
    let mut current = baseline;
    let mut k = 0;
    while k < kept.len() {
        let (orig, _) = kept[k];
        let trial_gates: Vec<Gate> = kept
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &(_, g))| g)
            .collect();
        let trial = Program::new(p.n_qubits, trial_gates)?.with_id(p.id.clone());
        let s = total_shuttles(&trial, victims, cfg)?;
        let removed = s >= baseline;
        log.push(PruneStep {
            gate_index: orig,
            removed,
            shuttles_without: s,
        });
        if removed {
            kept.remove(k);
            current = s;
        } else {
            k += 1;
        }
    }
    let program = Program::new(p.n_qubits, kept.into_iter().map(|(_, g)| g).collect())?.with_id(p.id.clone());
    Ok(PruneResult {
        removed: p.gates.len() - program.gates.len(),
        program,
        baseline,
        final_shuttles: current,
        log,
    })
}

pub fn prune(p: &Program, victim: &Program, cfg: &DeviceConfig) -> Result<PruneResult> {
    prune_against(p, std::slice::from_ref(victim), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::edge_weights;

    #[test]
    fn candidate_has_every_pair_once() {
        let p = gen_candidate(18, 1).unwrap();
        assert_eq!(p.gates.len(), 153);
        let w = edge_weights(&p);
        assert_eq!(w.len(), 153);
        assert!(w.iter().all(|e| e.weight == 1));
    }

    #[test]
    fn small_candidate() {
        let p = gen_candidate(3, 4).unwrap();
        let mut pairs: Vec<_> = p
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Ms(a, b) => (a, b),
                Gate::Vz(_) => unreachable!(),
            })
            .collect();
        pairs.sort_unstable();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
        assert!(gen_candidate(1, 0).is_err());
    }

    #[test]
    fn candidate_seeded() {
        assert_eq!(gen_candidate(18, 9).unwrap(), gen_candidate(18, 9).unwrap());
        assert_ne!(gen_candidate(18, 9).unwrap(), gen_candidate(18, 10).unwrap());
    }

    #[test]
    fn single_candidate_search() {
        let cfg = DeviceConfig::default();
        let r = search_best(1, 18, &[2, 6], &cfg, 3).unwrap();
        assert_eq!(r.best_index, 0);
        assert_eq!(r.best, gen_candidate(18, sub_seed(3, 0)).unwrap());
    }

    #[test]
    fn identical_candidates_pick_first() {
        let cfg = DeviceConfig::default();
        // two-qubit adversary: every candidate is the single gate (0,1)
        assert_eq!(gen_candidate(2, 0).unwrap(), gen_candidate(2, 1).unwrap());
        let r = search_best(4, 2, &[2], &cfg, 0).unwrap();
        assert!(r.means.iter().all(|&m| m == 0.0));
        assert_eq!(r.best_index, 0);
    }

    #[test]
    fn zero_shuttle_program_prunes_to_empty() {
        let cfg = DeviceConfig::default();
        let p = Program::new(4, vec![Gate::Ms(0, 1), Gate::Ms(2, 3), Gate::Ms(1, 2)]).unwrap();
        let v = random_victim(4, 10, 0).unwrap();
        let r = prune(&p, &v, &cfg).unwrap();
        assert_eq!(r.baseline, 0);
        assert!(r.program.gates.is_empty());
        assert_eq!(r.removed, 3);
    }

    #[test]
    fn prune_keeps_shuttles() {
        let cfg = DeviceConfig::default();
        let p = gen_candidate(18, 77).unwrap();
        let v = pseudo_victim(12, 0).unwrap();
        let r = prune(&p, &v, &cfg).unwrap();
        assert!(r.final_shuttles >= r.baseline);
        assert_eq!(co_run_shuttles(&r.program, &v, &cfg, Policy::Greedy, 0).unwrap(), r.final_shuttles);
        assert_eq!(r.log.len(), 153);
        let again = prune(&r.program, &v, &cfg).unwrap();
        assert!(again.final_shuttles >= r.final_shuttles);
        assert!(again.program.gates.len() <= r.program.gates.len());
    }
}
