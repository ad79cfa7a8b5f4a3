//! Multi-tenant compilation: gate interleaving, shuttle insertion, heating
//! and per-gate fidelity.
//!
//! Tenants are served round-robin, one MS gate per tenant per round, in
//! submission order. Within a tenant gates run strictly in program order.
//! A gate whose ions sit in different traps triggers a shuttle of one ion,
//! chosen by [`shuttle_direction`]: swap it to the chain end facing the
//! destination, split, move, merge at the facing end of the destination.
//!
//! Every state change is recorded as an [`Event`]; the compiler mutates the
//! machine only through [`apply_event`], so replaying a schedule's events on
//! the initial state reproduces the final state.

use std::io::{self, Write};

use serde::Serialize;

use crate::circuit::{Gate, Program};
use crate::device::{DeviceConfig, End, IonId, MachineState, TrapId};
use crate::error::{Error, Result};
use crate::fidelity::{apply_heating, gate_fidelity, program_fidelity, ChainEnergy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    GateExec {
        ions: [IonId; 2],
        trap: TrapId,
        fidelity: f64,
    },
    /// Exchange of the neighbours at `pos` and `pos + 1`; `ion` is the one
    /// walking toward the chain end.
    Swap {
        trap: TrapId,
        ion: IonId,
        with: IonId,
        pos: usize,
    },
    Split {
        ion: IonId,
        trap: TrapId,
    },
    Move {
        ion: IonId,
        from: TrapId,
        to: TrapId,
    },
    Merge {
        ion: IonId,
        trap: TrapId,
        end: End,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::GateExec { .. } => "GateExec",
            EventKind::Swap { .. } => "Swap",
            EventKind::Split { .. } => "Split",
            EventKind::Move { .. } => "Move",
            EventKind::Merge { .. } => "Merge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    /// Logical time. Gate executions and moves each take one tick; the
    /// swaps, split and merge of a shuttle share the tick of its move.
    pub tick: u64,
    /// Tenant whose gate caused the event.
    pub tenant: usize,
    /// Index of that gate in the tenant's program.
    pub gate_index: usize,
    #[serde(flatten)]
    pub kind: EventKind,
    /// Motional mode of the event's destination chain once it is applied.
    pub nbar_dst: f64,
}

impl Event {
    /// Trap whose chain the event changes or uses.
    pub fn dst_trap(&self) -> Option<TrapId> {
        match self.kind {
            EventKind::GateExec { trap, .. } | EventKind::Swap { trap, .. } => Some(trap),
            EventKind::Split { .. } => None,
            EventKind::Move { to, .. } => Some(to),
            EventKind::Merge { trap, .. } => Some(trap),
        }
    }

    pub fn src_trap(&self) -> Option<TrapId> {
        match self.kind {
            EventKind::GateExec { trap, .. } | EventKind::Swap { trap, .. } => Some(trap),
            EventKind::Split { trap, .. } => Some(trap),
            EventKind::Move { from, .. } => Some(from),
            EventKind::Merge { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateRecord {
    pub tenant: usize,
    pub gate_index: usize,
    pub trap: TrapId,
    pub n_ions: usize,
    pub nbar: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub events: Vec<Event>,
    pub shuttle_count: usize,
    /// Shuttles caused by each tenant's gates.
    pub tenant_shuttles: Vec<usize>,
    /// One record per executed MS gate, in execution order.
    pub gates: Vec<GateRecord>,
    /// Product of each tenant's gate fidelities.
    pub program_fidelity: Vec<f64>,
    /// Gates whose raw fidelity fell outside `[0, 1]`.
    pub clamp_count: usize,
    pub final_state: MachineState,
}

impl Schedule {
    pub fn gate_fidelities(&self, tenant: usize) -> Vec<f64> {
        self.gates
            .iter()
            .filter(|g| g.tenant == tenant)
            .map(|g| g.fidelity)
            .collect()
    }
}

pub fn count_shuttles(s: &Schedule) -> usize {
    s.events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Move { .. }))
        .count()
}

/// Which ion of a cross-trap gate moves, and where.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shuttle {
    pub ion: IonId,
    pub from: TrapId,
    pub to: TrapId,
}

/// Shuttle direction policy: the ion in the trap with less excess capacity
/// moves into the trap with more; on a tie the gate's first ion moves.
pub fn shuttle_direction(state: &MachineState, gate: (IonId, IonId), cfg: &DeviceConfig) -> Result<Shuttle> {
    let (a, b) = gate;
    let ta = state.trap_of(a)?;
    let tb = state.trap_of(b)?;
    if ta == tb {
        return Err(Error::CoLocated(a, b));
    }
    let ec_a = state.excess_capacity(ta, cfg)?;
    let ec_b = state.excess_capacity(tb, cfg)?;
    let sh = if ec_a <= ec_b {
        Shuttle { ion: a, from: ta, to: tb }
    } else {
        Shuttle { ion: b, from: tb, to: ta }
    };
    let dest_ec = if sh.to == ta { ec_a } else { ec_b };
    if dest_ec == 0 {
        return Err(Error::Blocked { ion: sh.ion, trap: sh.to });
    }
    Ok(sh)
}

/// Apply the structural effect of an event. Heating is separate
/// ([`apply_heating`]).
pub fn apply_event(state: &mut MachineState, event: &Event, cfg: &DeviceConfig) -> Result<()> {
    match event.kind {
        EventKind::GateExec { ions, trap, .. } => {
            for ion in ions {
                if state.trap_of(ion)? != trap {
                    return Err(Error::IllegalEvent(format!("gate on {ion}, which is not in {trap}")));
                }
            }
            Ok(())
        }
        EventKind::Swap { trap, ion, with, pos } => {
            let chain = state.chain(trap)?;
            let pair = (chain.get(pos).copied(), chain.get(pos + 1).copied());
            if pair != (Some(ion), Some(with)) && pair != (Some(with), Some(ion)) {
                return Err(Error::IllegalEvent(format!("swap of {ion}/{with} at {trap}[{pos}]")));
            }
            state.swap_adjacent(trap, pos)
        }
        EventKind::Split { ion, trap } => {
            if state.trap_of(ion)? != trap {
                return Err(Error::IllegalEvent(format!("split of {ion} from {trap}")));
            }
            state.split(ion).map(|_| ())
        }
        EventKind::Move { ion, to, .. } => state.transport(ion, to),
        EventKind::Merge { ion, trap, end } => {
            let at = state.merge(ion, end, cfg)?;
            if at != trap {
                return Err(Error::IllegalEvent(format!("merge of {ion} into {trap}, ion is at {at}")));
            }
            Ok(())
        }
    }
}

/// Re-run a list of events against a machine state.
pub fn replay(initial: &MachineState, events: &[Event], cfg: &DeviceConfig) -> Result<MachineState> {
    let mut st = initial.clone();
    for e in events {
        apply_event(&mut st, e, cfg)?;
        apply_heating(&mut st, e, &cfg.physics)?;
    }
    Ok(st)
}

struct Compiler<'a> {
    cfg: &'a DeviceConfig,
    state: MachineState,
    events: Vec<Event>,
    tick: u64,
    ions: usize,
}

impl Compiler<'_> {
    fn emit(&mut self, tenant: usize, gate_index: usize, kind: EventKind) -> Result<()> {
        let mut e = Event {
            tick: self.tick,
            tenant,
            gate_index,
            kind,
            nbar_dst: 0.0,
        };
        apply_event(&mut self.state, &e, self.cfg)?;
        apply_heating(&mut self.state, &e, &self.cfg.physics)?;
        if self.state.ion_count() != self.ions {
            return Err(Error::IllegalEvent(format!("ion count changed after {}", kind.name())));
        }
        e.nbar_dst = match e.dst_trap() {
            Some(t) => self.state.nbar(t)?,
            None => 0.0,
        };
        self.events.push(e);
        Ok(())
    }

    /// Carry `ion` one trap over, from `from` to the adjacent `to`.
    fn hop(&mut self, tenant: usize, gi: usize, ion: IonId, from: TrapId, to: TrapId) -> Result<()> {
        if self.state.excess_capacity(to, self.cfg)? == 0 {
            return Err(Error::ShuttleBlocked {
                tenant,
                gate_index: gi,
                trap: to,
            });
        }
        let facing = End::facing(from, to);
        loop {
            let (_, pos) = self.state.locate(ion)?;
            let chain = self.state.chain(from)?;
            let (swap_pos, with) = match facing {
                End::Right if pos + 1 < chain.len() => (pos, chain[pos + 1]),
                End::Left if pos > 0 => (pos - 1, chain[pos - 1]),
                _ => break,
            };
            self.emit(
                tenant,
                gi,
                EventKind::Swap {
                    trap: from,
                    ion,
                    with,
                    pos: swap_pos,
                },
            )?;
        }
        self.emit(tenant, gi, EventKind::Split { ion, trap: from })?;
        self.emit(tenant, gi, EventKind::Move { ion, from, to })?;
        self.emit(
            tenant,
            gi,
            EventKind::Merge {
                ion,
                trap: to,
                end: End::facing(to, from),
            },
        )?;
        self.tick += 1;
        Ok(())
    }

    fn shuttle(&mut self, tenant: usize, gi: usize, sh: Shuttle) -> Result<usize> {
        let mut at = sh.from;
        let mut hops = 0;
        while at != sh.to {
            let next = if sh.to > at { TrapId(at.0 + 1) } else { TrapId(at.0 - 1) };
            self.hop(tenant, gi, sh.ion, at, next)?;
            at = next;
            hops += 1;
        }
        Ok(hops)
    }
}

/// Compile tenants' programs on a mapped machine.
///
/// `programs[i]` is tenant `i`; `initial` must hold an ion for every qubit of
/// every program.
pub fn compile(programs: &[Program], initial: &MachineState, cfg: &DeviceConfig) -> Result<Schedule> {
    for (t, p) in programs.iter().enumerate() {
        for q in 0..p.n_qubits {
            initial.locate(IonId::new(t, q))?;
        }
    }
    let mut c = Compiler {
        cfg,
        state: initial.clone(),
        events: Vec::new(),
        tick: 0,
        ions: initial.ion_count(),
    };
    let mut cursor = vec![0usize; programs.len()];
    let mut tenant_shuttles = vec![0usize; programs.len()];
    let mut gates = Vec::new();
    let mut fids: Vec<Vec<f64>> = vec![Vec::new(); programs.len()];
    let mut clamp_count = 0;

    loop {
        let mut progressed = false;
        for (t, p) in programs.iter().enumerate() {
            let next = p.gates[cursor[t]..]
                .iter()
                .position(Gate::is_ms)
                .map(|off| cursor[t] + off);
            let Some(gi) = next else {
                cursor[t] = p.gates.len();
                continue;
            };
            cursor[t] = gi + 1;
            progressed = true;

            let Gate::Ms(qa, qb) = p.gates[gi] else { unreachable!() };
            let (a, b) = (IonId::new(t, qa), IonId::new(t, qb));
            if c.state.trap_of(a)? != c.state.trap_of(b)? {
                let sh = shuttle_direction(&c.state, (a, b), cfg).map_err(|e| match e {
                    Error::Blocked { trap, .. } => Error::ShuttleBlocked {
                        tenant: t,
                        gate_index: gi,
                        trap,
                    },
                    other => other,
                })?;
                tenant_shuttles[t] += c.shuttle(t, gi, sh)?;
            }

            let trap = c.state.trap_of(a)?;
            let energy = ChainEnergy {
                nbar: c.state.nbar(trap)?,
                n_ions: c.state.chain(trap)?.len(),
            };
            let f = gate_fidelity(&cfg.physics, energy)?;
            clamp_count += usize::from(f.clamped);
            c.emit(
                t,
                gi,
                EventKind::GateExec {
                    ions: [a, b],
                    trap,
                    fidelity: f.value,
                },
            )?;
            c.tick += 1;
            gates.push(GateRecord {
                tenant: t,
                gate_index: gi,
                trap,
                n_ions: energy.n_ions,
                nbar: energy.nbar,
                fidelity: f.value,
            });
            fids[t].push(f.value);
        }
        if !progressed {
            break;
        }
    }

    let shuttle_count = tenant_shuttles.iter().sum();
    Ok(Schedule {
        events: c.events,
        shuttle_count,
        tenant_shuttles,
        gates,
        program_fidelity: fids.iter().map(|f| program_fidelity(f)).collect(),
        clamp_count,
        final_state: c.state,
    })
}

pub const TRACE_HEADER: &str = "tick,kind,tenant,gate_index,ion,src_trap,dst_trap,nbar_dst,fidelity";

/// Write the schedule trace as CSV.
pub fn write_trace_csv<W: Write>(s: &Schedule, mut w: W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    let trap = |t: Option<TrapId>| t.map(|t| t.0.to_string()).unwrap_or_default();
    for e in &s.events {
        let (ion, fidelity) = match e.kind {
            EventKind::GateExec { ions, fidelity, .. } => (format!("{}|{}", ions[0], ions[1]), format!("{fidelity:.12}")),
            EventKind::Swap { ion, .. }
            | EventKind::Split { ion, .. }
            | EventKind::Move { ion, .. }
            | EventKind::Merge { ion, .. } => (ion.to_string(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{:.6},{}",
            e.tick,
            e.kind.name(),
            e.tenant,
            e.gate_index,
            ion,
            trap(e.src_trap()),
            trap(e.dst_trap()),
            e.nbar_dst,
            fidelity
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ProgramSummary {
    pub tenant: usize,
    pub id: String,
    pub n_qubits: usize,
    pub length: usize,
    pub shuttles: usize,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateSummary {
    pub tenant: usize,
    pub gate_index: usize,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleSummary {
    pub schema: &'static str,
    pub shuttle_count: usize,
    pub clamp_count: usize,
    pub programs: Vec<ProgramSummary>,
    pub per_gate_fidelity: Vec<GateSummary>,
}

pub fn summarize(programs: &[Program], s: &Schedule) -> ScheduleSummary {
    ScheduleSummary {
        schema: "qccd.compile.v1",
        shuttle_count: s.shuttle_count,
        clamp_count: s.clamp_count,
        programs: programs
            .iter()
            .enumerate()
            .map(|(t, p)| ProgramSummary {
                tenant: t,
                id: p.id.clone(),
                n_qubits: p.n_qubits,
                length: p.len(),
                shuttles: s.tenant_shuttles[t],
                fidelity: s.program_fidelity[t],
            })
            .collect(),
        per_gate_fidelity: s
            .gates
            .iter()
            .map(|g| GateSummary {
                tenant: g.tenant,
                gate_index: g.gate_index,
                fidelity: g.fidelity,
            })
            .collect(),
    }
}
