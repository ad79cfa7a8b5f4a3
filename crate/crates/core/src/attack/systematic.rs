//! White-box adversarial program generation.
//!
//! The program has three parts, emitted in this order:
//!
//! 1. **Shuttle controller (SC)**: every gate pairs ions that sit in
//!    different traps at the moment it runs, so each forces one shuttle.
//! 2. **Bridging gate**: ties the SC block to the IMC block without raising
//!    any edge weight above one.
//! 3. **Initial mapping controller (IMC)**: the chain `(0,1),(1,2),...`
//!    over ions `0..cap`, each pair twice. Weight-2 edges sort first under
//!    greedy mapping, so ions `0..cap` fill trap 0 and the rest spill into
//!    trap 1 next to the victim.
//!
//! The SC generator tracks trap occupancy with its own model of the shuttle
//! direction policy (not the compiler's), using the assumed victim size to
//! compute trap 1's excess capacity.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{concat, EdgeWeights, Gate, Program, Qubit};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub trap_capacity: usize,
    pub comm_capacity: usize,
    pub adversary_size: usize,
    pub assumed_victim_size: usize,
    pub sc_block_length: usize,
    pub seed: u64,
}

impl AttackSpec {
    /// Two-trap attack with communication capacity 2 and an adversary of
    /// `trap_capacity + 3` qubits.
    pub fn new(trap_capacity: usize, assumed_victim_size: usize, sc_block_length: usize, seed: u64) -> Self {
        AttackSpec {
            trap_capacity,
            comm_capacity: 2,
            adversary_size: trap_capacity + 3,
            assumed_victim_size,
            sc_block_length,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidAttack(m));
        if self.trap_capacity < 2 {
            return bad(format!("trap capacity {} < 2", self.trap_capacity));
        }
        if self.adversary_size <= self.trap_capacity {
            return bad(format!(
                "adversary of {} qubits does not span two traps of {}",
                self.adversary_size, self.trap_capacity
            ));
        }
        if self.assumed_victim_size < 2 {
            return bad("assumed victim size must be >= 2".into());
        }
        if self.sc_block_length < 1 {
            return bad("SC block length must be >= 1".into());
        }
        let spill = self.adversary_size - self.trap_capacity;
        if spill + self.assumed_victim_size > self.trap_capacity {
            return bad(format!(
                "{} adversary ions plus a {}-qubit victim exceed trap capacity {}",
                spill, self.assumed_victim_size, self.trap_capacity
            ));
        }
        Ok(())
    }

    /// Ion picked for the first SC gate.
    pub fn first_ion(&self) -> Qubit {
        rng_from_seed(self.seed).gen_range(0..self.adversary_size)
    }
}

/// IMC block: pairs `(i, i+1)` for `i < cap - 1`, each twice.
pub fn build_imc(trap_capacity: usize) -> Vec<Gate> {
    (1..trap_capacity)
        .flat_map(|b| [Gate::Ms(b - 1, b); 2])
        .collect()
}

fn weights_of(gates: &[Gate]) -> EdgeWeights {
    let mut w = EdgeWeights::default();
    for (i, g) in gates.iter().enumerate() {
        if let Gate::Ms(a, b) = *g {
            w.add(a, b, i);
        }
    }
    w
}

/// Trap occupancy after one SC gate, as predicted by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScStep {
    pub gate: (Qubit, Qubit),
    pub moved: Qubit,
    pub from: usize,
    pub to: usize,
    /// Excess capacity of T0 and T1 after the shuttle.
    pub ec: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScBlock {
    pub gates: Vec<Gate>,
    /// Excess capacities before the first gate.
    pub initial_ec: (usize, usize),
    pub steps: Vec<ScStep>,
    /// Set when no zero-weight partner remained and the block is shorter
    /// than requested.
    pub exhausted: bool,
}

/// The generator's own model of the two traps (adversary ions only, victim
/// counted as a block in T1).
#[derive(Clone)]
struct Tracker {
    chains: [Vec<Qubit>; 2],
    loc: Vec<usize>,
    victim: usize,
    max_chain: usize,
}

impl Tracker {
    fn new(spec: &AttackSpec) -> Self {
        Tracker {
            chains: [
                (0..spec.trap_capacity).collect(),
                (spec.trap_capacity..spec.adversary_size).collect(),
            ],
            loc: (0..spec.adversary_size).map(|q| usize::from(q >= spec.trap_capacity)).collect(),
            victim: spec.assumed_victim_size,
            max_chain: spec.trap_capacity + spec.comm_capacity,
        }
    }

    fn trap(&self, ion: Qubit) -> usize {
        self.loc[ion]
    }

    fn ec(&self, t: usize) -> usize {
        let occupied = self.chains[t].len() + if t == 1 { self.victim } else { 0 };
        self.max_chain.saturating_sub(occupied)
    }

    fn ecs(&self) -> (usize, usize) {
        (self.ec(0), self.ec(1))
    }

    /// Apply the shuttle for gate `(a, b)`, returning the moved ion and its route.
    fn shuttle(&mut self, a: Qubit, b: Qubit) -> (Qubit, usize, usize) {
        let (ta, tb) = (self.trap(a), self.trap(b));
        debug_assert_ne!(ta, tb);
        let (ion, from, to) = if self.ec(ta) <= self.ec(tb) { (a, ta, tb) } else { (b, tb, ta) };
        self.chains[from].retain(|&q| q != ion);
        // joins the end facing the shuttle path
        if to == 1 {
            self.chains[1].insert(0, ion);
        } else {
            self.chains[0].push(ion);
        }
        self.loc[ion] = to;
        (ion, from, to)
    }
}

/// Dense edge and node weights over the adversary's qubits.
struct Weights {
    n: usize,
    edge: Vec<u32>,
    node: Vec<u32>,
}

impl Weights {
    fn from_gates(n: usize, gates: &[Gate]) -> Self {
        let mut w = Weights {
            n,
            edge: vec![0; n * n],
            node: vec![0; n],
        };
        for g in gates {
            if let Gate::Ms(a, b) = *g {
                w.add(a, b, 1);
            }
        }
        w
    }

    fn get(&self, a: Qubit, b: Qubit) -> u32 {
        self.edge[a * self.n + b]
    }

    fn add(&mut self, a: Qubit, b: Qubit, d: i32) {
        for (i, j) in [(a, b), (b, a)] {
            self.edge[i * self.n + j] = self.edge[i * self.n + j].wrapping_add_signed(d);
        }
        self.node[a] = self.node[a].wrapping_add_signed(d);
        self.node[b] = self.node[b].wrapping_add_signed(d);
    }

    /// Zero-weight partners of `ion_a` in the opposite trap, lightest node
    /// weight first, chain order on ties.
    fn partners(&self, tr: &Tracker, ion_a: Qubit) -> Vec<Qubit> {
        let opposite = 1 - tr.trap(ion_a);
        let mut c: Vec<Qubit> = tr.chains[opposite]
            .iter()
            .copied()
            .filter(|&b| b != ion_a && self.get(ion_a, b) == 0)
            .collect();
        c.sort_by_key(|&b| self.node[b]);
        c
    }
}

/// Expansion limit of each backtracking pass in [`build_sc`].
pub const SC_SEARCH_BUDGET: usize = 50_000;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Bridge exists and the bridge and IMC gates need no shuttle.
    CleanTail,
    /// Bridge exists.
    Bridge,
}

struct Search<'a> {
    spec: &'a AttackSpec,
    imc: &'a [Gate],
    goal: Goal,
    budget: usize,
    weights: Weights,
    steps: Vec<ScStep>,
    best: Vec<ScStep>,
}

impl Search<'_> {
    /// `ion_a`: the moved ion of the last gate, or the non-moved
    /// one when the moved ion has no partner left.
    fn ion_a(&self, tr: &Tracker) -> (Qubit, Vec<Qubit>) {
        let Some(last) = self.steps.last() else {
            let a = self.spec.first_ion();
            return (a, self.weights.partners(tr, a));
        };
        let moved = last.moved;
        let cands = self.weights.partners(tr, moved);
        if !cands.is_empty() {
            return (moved, cands);
        }
        let other = if last.gate.0 == moved { last.gate.1 } else { last.gate.0 };
        (other, self.weights.partners(tr, other))
    }

    fn accepts(&self, tr: &Tracker) -> bool {
        let (Some(last), Some(&Gate::Ms(u, v))) = (self.steps.last(), self.imc.first()) else {
            return false;
        };
        let (x, y) = last.gate;
        // same candidates and order as `bridging_gate`
        let Some((p, q)) = [(y, u), (y, v), (x, u), (x, v)]
            .into_iter()
            .find(|&(p, q)| p != q && self.weights.get(p, q) == 0)
        else {
            return false;
        };
        self.goal == Goal::Bridge
            || (tr.trap(p) == tr.trap(q)
                && self.imc.iter().all(|g| match *g {
                    Gate::Ms(a, b) => tr.trap(a) == tr.trap(b),
                    Gate::Vz(_) => true,
                }))
    }

    fn run(&mut self, tr: &Tracker) -> bool {
        if self.steps.len() > self.best.len() {
            self.best = self.steps.clone();
        }
        if self.steps.len() == self.spec.sc_block_length {
            return self.accepts(tr);
        }
        let (ion_a, cands) = self.ion_a(tr);
        for ion_b in cands {
            if self.budget == 0 {
                return false;
            }
            self.budget -= 1;
            let mut next = tr.clone();
            let (moved, from, to) = next.shuttle(ion_a, ion_b);
            self.weights.add(ion_a, ion_b, 1);
            self.steps.push(ScStep {
                gate: (ion_a, ion_b),
                moved,
                from,
                to,
                ec: next.ecs(),
            });
            if self.run(&next) {
                return true;
            }
            self.steps.pop();
            self.weights.add(ion_a, ion_b, -1);
        }
        false
    }
}

/// Generate the shuttle controller block for `spec`.
///
/// Edge weights start from the IMC block so SC gates never repeat an IMC
/// pair. Partners are tried lightest node weight first (IMC and SC edges
/// counted), chain order on ties; when a choice leads to a dead end the
/// search backtracks and takes the next partner. A block is accepted once
/// it has the requested length, a bridging gate exists, and the bridge and
/// IMC gates would run without shuttles afterwards. Failing that, the first
/// full-length block with a bridging gate is taken; failing that, the
/// longest one found within [`SC_SEARCH_BUDGET`] expansions per pass, with
/// `exhausted` set.
pub fn build_sc(spec: &AttackSpec) -> Result<ScBlock> {
    spec.validate()?;
    let imc = build_imc(spec.trap_capacity);
    let tr = Tracker::new(spec);
    let mut best = Vec::new();
    for goal in [Goal::CleanTail, Goal::Bridge] {
        let mut search = Search {
            spec,
            imc: &imc,
            goal,
            budget: SC_SEARCH_BUDGET,
            weights: Weights::from_gates(spec.adversary_size, &imc),
            steps: Vec::with_capacity(spec.sc_block_length),
            best: Vec::new(),
        };
        if search.run(&tr) {
            return Ok(ScBlock {
                gates: search.steps.iter().map(|s| Gate::Ms(s.gate.0, s.gate.1)).collect(),
                initial_ec: tr.ecs(),
                steps: search.steps,
                exhausted: false,
            });
        }
        if search.best.len() > best.len() {
            best = search.best;
        }
    }
    Ok(ScBlock {
        gates: best.iter().map(|s| Gate::Ms(s.gate.0, s.gate.1)).collect(),
        initial_ec: tr.ecs(),
        steps: best,
        exhausted: true,
    })
}

/// Pick the gate linking the last SC gate to the first IMC gate.
///
/// Candidates are tried as (second SC ion, first IMC ion), (second, second),
/// (first, first), (first, second); the first pair absent from both blocks wins.
pub fn bridging_gate(sc: &[Gate], imc: &[Gate]) -> Result<Gate> {
    let (Some(&Gate::Ms(x, y)), Some(&Gate::Ms(u, v))) = (sc.last(), imc.first()) else {
        return Err(Error::InvalidAttack("bridging needs non-empty SC and IMC blocks".into()));
    };
    let used = weights_of(&[sc, imc].concat());
    [(y, u), (y, v), (x, u), (x, v)]
        .into_iter()
        .find(|&(p, q)| p != q && used.weight(p, q) == 0)
        .map(|(p, q)| Gate::Ms(p, q))
        .ok_or(Error::NoBridge)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackProgram {
    pub spec: AttackSpec,
    pub program: Program,
    pub sc: ScBlock,
    pub bridge: Gate,
    pub imc_len: usize,
    /// Shuttles expected against a victim of the assumed size.
    pub predicted_shuttles: usize,
}

/// Build the complete program: SC block, bridging gate, IMC block.
pub fn assemble(spec: &AttackSpec) -> Result<AttackProgram> {
    spec.validate()?;
    let imc = build_imc(spec.trap_capacity);
    let sc = build_sc(spec)?;
    let bridge = bridging_gate(&sc.gates, &imc)?;
    let gates = concat([sc.gates.as_slice(), &[bridge], imc.as_slice()]).gates;
    let program = Program::new(spec.adversary_size, gates)?.with_id("adversary");
    Ok(AttackProgram {
        spec: *spec,
        predicted_shuttles: sc.gates.len(),
        imc_len: imc.len(),
        program,
        sc,
        bridge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::edge_weights;

    fn seed_for_first_ion(spec: AttackSpec, ion: Qubit) -> AttackSpec {
        (0..10_000)
            .map(|seed| AttackSpec { seed, ..spec })
            .find(|s| s.first_ion() == ion)
            .unwrap()
    }

    #[test]
    fn imc_cap4() {
        assert_eq!(
            build_imc(4),
            vec![
                Gate::Ms(0, 1),
                Gate::Ms(0, 1),
                Gate::Ms(1, 2),
                Gate::Ms(1, 2),
                Gate::Ms(2, 3),
                Gate::Ms(2, 3)
            ]
        );
        assert_eq!(build_imc(2), vec![Gate::Ms(0, 1); 2]);
    }

    #[test]
    fn imc_cap15_weights() {
        let imc = build_imc(15);
        assert_eq!(imc.len(), 28);
        let w = edge_weights(&Program::from_gates(imc).unwrap());
        assert_eq!(w.len(), 14);
        assert!(w.iter().all(|e| e.weight == 2));
        for i in 0..14 {
            assert_eq!(w.weight(i, i + 1), 2);
        }
    }

    #[test]
    fn example_trace_cap15_victim12() {
        let spec = seed_for_first_ion(AttackSpec::new(15, 12, 80, 0), 14);
        let sc = build_sc(&spec).unwrap();
        assert_eq!(sc.initial_ec, (2, 2));
        assert_eq!(sc.steps[0].gate, (14, 15));
        assert_eq!((sc.steps[0].moved, sc.steps[0].from, sc.steps[0].to), (14, 0, 1));
        assert_eq!(sc.steps[0].ec, (3, 1));
        assert_eq!(sc.steps[1].gate.0, 14);
        assert_eq!((sc.steps[1].moved, sc.steps[1].from, sc.steps[1].to), (14, 1, 0));
        assert_eq!(sc.steps[1].ec, (2, 2));
    }

    #[test]
    fn full_length_and_unit_weights() {
        let spec = AttackSpec::new(15, 12, 80, 5);
        let sc = build_sc(&spec).unwrap();
        assert!(!sc.exhausted);
        assert_eq!(sc.gates.len(), 80);
        let w = edge_weights(&Program::from_gates(sc.gates.clone()).unwrap());
        assert!(w.iter().all(|e| e.weight == 1));
        let imc = edge_weights(&Program::from_gates(build_imc(15)).unwrap());
        assert!(w.iter().all(|e| imc.weight(e.key().0, e.key().1) == 0));
    }

    #[test]
    fn ends_with_imc_ions_home() {
        let spec = AttackSpec::new(15, 12, 80, 0);
        let sc = build_sc(&spec).unwrap();
        assert!(!sc.exhausted);
        let mut trap: Vec<usize> = (0..18).map(|q| usize::from(q >= 15)).collect();
        for s in &sc.steps {
            assert_eq!(trap[s.moved], s.from);
            trap[s.moved] = s.to;
        }
        assert!((0..15).all(|q| trap[q] == 0));
        assert_eq!(sc.steps.last().unwrap().ec, (2, 2));
    }

    #[test]
    fn length_one_block() {
        let sc = build_sc(&AttackSpec::new(15, 12, 1, 3)).unwrap();
        assert_eq!(sc.gates.len(), 1);
        assert_ne!(sc.steps[0].from, sc.steps[0].to);
    }

    #[test]
    fn exhaustion_stops_early() {
        // 4 ions in T0, 3 in T1: at most 12 cross pairs
        let spec = AttackSpec::new(4, 2, 1000, 1);
        spec.validate().unwrap_err();
        let spec = AttackSpec {
            comm_capacity: 2,
            ..AttackSpec::new(5, 2, 1000, 1)
        };
        let sc = build_sc(&spec).unwrap();
        assert!(sc.exhausted);
        assert!(sc.gates.len() < 1000);
        assert!(!sc.gates.is_empty());
    }

    #[test]
    fn invalid_specs() {
        assert!(AttackSpec::new(15, 12, 0, 0).validate().is_err());
        assert!(AttackSpec::new(15, 1, 80, 0).validate().is_err());
        assert!(AttackSpec::new(15, 13, 80, 0).validate().is_err());
        let narrow = AttackSpec {
            adversary_size: 15,
            ..AttackSpec::new(15, 8, 80, 0)
        };
        assert!(narrow.validate().is_err());
    }

    #[test]
    fn bridge_prefers_second_sc_ion() {
        let sc = [Gate::Ms(5, 9)];
        let imc = build_imc(4);
        assert_eq!(bridging_gate(&sc, &imc).unwrap(), Gate::Ms(9, 0));
    }

    #[test]
    fn bridge_skips_imc_pair() {
        // (1,0) and (1,1) are unusable, (2,0) is free
        let sc = [Gate::Ms(2, 1)];
        let imc = build_imc(4);
        assert_eq!(bridging_gate(&sc, &imc).unwrap(), Gate::Ms(2, 0));
    }

    #[test]
    fn bridge_exhausted() {
        let sc = [Gate::Ms(0, 2), Gate::Ms(1, 2), Gate::Ms(0, 1)];
        let imc = [Gate::Ms(0, 1), Gate::Ms(0, 1)];
        assert_eq!(bridging_gate(&sc, &imc), Err(Error::NoBridge));
    }

    #[test]
    fn assembled_counts_and_weights() {
        let spec = AttackSpec::new(15, 8, 80, 11);
        let atk = assemble(&spec).unwrap();
        assert_eq!(atk.program.gates.len(), 109);
        assert_eq!(atk.program.n_qubits, 18);
        let w = edge_weights(&atk.program);
        let imc: Vec<(usize, usize)> = (0..14).map(|i| (i, i + 1)).collect();
        for e in w.iter() {
            let expected = if imc.contains(&e.key()) { 2 } else { 1 };
            assert_eq!(e.weight, expected, "{:?}", e.key());
        }
        assert_eq!(w.total(), 109);
    }

    #[test]
    fn deterministic() {
        let spec = AttackSpec::new(20, 13, 80, 42);
        assert_eq!(assemble(&spec).unwrap(), assemble(&spec).unwrap());
    }
}
