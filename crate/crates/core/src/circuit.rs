//! Circuit representation and the `.qprog` text format.
//!
//! A program is an ordered gate list over the logical qubits of one tenant.
//! The text format holds one gate per line:
//!
//! ```text
//! # comment
//! qubits 6
//! MS q[0],q[3]
//! GZ q[5]
//! ```
//!
//! `qubits N` is optional; without it the program size is one more than the
//! largest referenced index.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Qubit = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    /// Mølmer–Sørensen two-qubit entangling gate.
    Ms(Qubit, Qubit),
    /// Virtual-Z phase gate. Software only, never shuttles, perfect fidelity.
    Vz(Qubit),
}

impl Gate {
    pub fn is_ms(&self) -> bool {
        matches!(self, Gate::Ms(..))
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        let (a, b) = match *self {
            Gate::Ms(a, b) => (a, Some(b)),
            Gate::Vz(a) => (a, None),
        };
        std::iter::once(a).chain(b)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Ms(a, b) => write!(f, "MS q[{a}],q[{b}]"),
            Gate::Vz(a) => write!(f, "GZ q[{a}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Program {
    /// Tenant label. Not part of the text format.
    #[serde(default)]
    pub id: String,
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Program {
    /// Build a program, checking every gate against `n_qubits`.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let p = Program {
            id: String::new(),
            n_qubits,
            gates,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build a program sized to fit its gates.
    pub fn from_gates(gates: Vec<Gate>) -> Result<Self> {
        let n = gates
            .iter()
            .flat_map(Gate::qubits)
            .max()
            .map_or(0, |m| m + 1);
        Program::new(n, gates)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            if let Gate::Ms(a, b) = *g {
                if a == b {
                    return Err(Error::DuplicateQubit {
                        line: i + 1,
                        qubit: a,
                    });
                }
            }
            if let Some(q) = g.qubits().find(|&q| q >= self.n_qubits) {
                return Err(Error::QubitOutOfRange {
                    gate: i,
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        Ok(())
    }

    /// Program length: the number of MS gates.
    pub fn len(&self) -> usize {
        self.gates.iter().filter(|g| g.is_ms()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ms_gates(&self) -> impl Iterator<Item = (usize, Qubit, Qubit)> + '_ {
        self.gates.iter().enumerate().filter_map(|(i, g)| match *g {
            Gate::Ms(a, b) => Some((i, a, b)),
            Gate::Vz(_) => None,
        })
    }
}

/// One interaction-graph edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// The pair as listed in its first gate.
    pub first_listed: (Qubit, Qubit),
    pub weight: usize,
    /// Index in the gate list of the first gate on this pair.
    pub first_index: usize,
}

impl Edge {
    pub fn key(&self) -> (Qubit, Qubit) {
        pair_key(self.first_listed.0, self.first_listed.1)
    }
}

fn pair_key(a: Qubit, b: Qubit) -> (Qubit, Qubit) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Weighted interaction graph of a program: MS occurrence count per unordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeWeights {
    edges: HashMap<(Qubit, Qubit), Edge>,
}

impl EdgeWeights {
    pub fn weight(&self, a: Qubit, b: Qubit) -> usize {
        self.edges.get(&pair_key(a, b)).map_or(0, |e| e.weight)
    }

    pub fn get(&self, a: Qubit, b: Qubit) -> Option<&Edge> {
        self.edges.get(&pair_key(a, b))
    }

    pub fn add(&mut self, a: Qubit, b: Qubit, gate_index: usize) {
        self.edges
            .entry(pair_key(a, b))
            .and_modify(|e| e.weight += 1)
            .or_insert(Edge {
                first_listed: (a, b),
                weight: 1,
                first_index: gate_index,
            });
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total(&self) -> usize {
        self.edges.values().map(|e| e.weight).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    /// Edges by weight descending, then first appearance ascending.
    pub fn sorted(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.edges.values().copied().collect();
        v.sort_by(|x, y| {
            y.weight
                .cmp(&x.weight)
                .then(x.first_index.cmp(&y.first_index))
        });
        v
    }
}

pub fn edge_weights(p: &Program) -> EdgeWeights {
    let mut w = EdgeWeights::default();
    for (i, a, b) in p.ms_gates() {
        w.add(a, b, i);
    }
    w
}

/// Concatenate gate blocks that share one qubit index space.
pub fn concat<I, B>(blocks: I) -> Program
where
    I: IntoIterator<Item = B>,
    B: AsRef<[Gate]>,
{
    let gates: Vec<Gate> = blocks
        .into_iter()
        .flat_map(|b| b.as_ref().to_vec())
        .collect();
    Program::from_gates(gates).expect("blocks are made of valid gates")
}

fn parse_qubit(tok: &str, line: usize) -> Result<Qubit> {
    let tok = tok.trim();
    let inner = tok
        .strip_prefix("q[")
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Syntax {
            line,
            msg: format!("expected q[<index>], found `{tok}`"),
        })?
        .trim();
    let idx: i64 = inner.parse().map_err(|_| Error::Syntax {
        line,
        msg: format!("bad qubit index `{inner}`"),
    })?;
    if idx < 0 {
        return Err(Error::NegativeIndex { line, index: idx });
    }
    Ok(idx as Qubit)
}

pub fn parse_program(text: &str) -> Result<Program> {
    let mut gates = Vec::new();
    let mut declared: Option<(usize, usize)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let body = body.strip_suffix(';').unwrap_or(body).trim();
        if body.is_empty() {
            continue;
        }
        let (op, rest) = match body.split_once(char::is_whitespace) {
            Some((op, rest)) => (op, rest.trim()),
            None => (body, ""),
        };
        match op {
            "qubits" => {
                let n = rest.parse::<usize>().map_err(|_| Error::Syntax {
                    line,
                    msg: format!("bad qubit count `{rest}`"),
                })?;
                declared = Some((n, line));
            }
            "MS" => {
                let (a, b) = rest.split_once(',').ok_or_else(|| Error::Syntax {
                    line,
                    msg: "MS takes two operands".into(),
                })?;
                let (a, b) = (parse_qubit(a, line)?, parse_qubit(b, line)?);
                if a == b {
                    return Err(Error::DuplicateQubit { line, qubit: a });
                }
                gates.push(Gate::Ms(a, b));
            }
            "GZ" => gates.push(Gate::Vz(parse_qubit(rest, line)?)),
            other => {
                return Err(Error::Syntax {
                    line,
                    msg: format!("unknown gate `{other}`"),
                })
            }
        }
    }

    let used = gates
        .iter()
        .flat_map(Gate::qubits)
        .max()
        .map_or(0, |m| m + 1);
    let n_qubits = match declared {
        Some((n, line)) if n < used => {
            return Err(Error::Syntax {
                line,
                msg: format!("declared {n} qubits but gates reference qubit {}", used - 1),
            })
        }
        Some((n, _)) => n,
        None => used,
    };
    Ok(Program {
        id: String::new(),
        n_qubits,
        gates,
    })
}

pub fn emit_program(p: &Program) -> String {
    let mut out = format!("qubits {}\n", p.n_qubits);
    for g in &p.gates {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}
