//! Experiments: victim generation, victim-size assumption sweeps with the
//! inverse coefficient of variation, and fidelity reduction under attack.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::attack::random::{gen_candidate, prune, pseudo_victim};
use crate::attack::systematic::{assemble, AttackSpec};
use crate::circuit::{Gate, Program};
use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::mapper::{place_multi, Policy};
use crate::rng::{rng_from_seed, sub_seed};
use crate::scheduler::{compile, Schedule};

/// Default victim and pseudo-victim length (MS gates).
pub const VICTIM_LENGTH: usize = 80;

/// Victim program: `length` MS gates, each on a uniformly random pair.
pub fn random_victim(n_qubits: usize, length: usize, seed: u64) -> Result<Program> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!("victim needs >= 2 qubits, got {n_qubits}")));
    }
    let mut rng = rng_from_seed(seed);
    let gates = (0..length)
        .map(|_| {
            let a = rng.gen_range(0..n_qubits);
            let b = (a + rng.gen_range(1..n_qubits)) % n_qubits;
            Gate::Ms(a, b)
        })
        .collect();
    Ok(Program::new(n_qubits, gates)?.with_id("victim"))
}

/// Map and compile tenants together.
pub fn co_run(programs: &[Program], cfg: &DeviceConfig, policy: Policy, seed: u64) -> Result<Schedule> {
    let st = place_multi(programs, policy, cfg, seed)?;
    compile(programs, &st, cfg)
}

/// Shuttles of an adversary (tenant 0) and victim (tenant 1) pair.
pub fn co_run_shuttles(adversary: &Program, victim: &Program, cfg: &DeviceConfig, policy: Policy, seed: u64) -> Result<usize> {
    Ok(co_run(&[adversary.clone(), victim.clone()], cfg, policy, seed)?.shuttle_count)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("statistics input"));
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
    Ok((mu, var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IcvStats {
    pub mu: f64,
    pub sigma: f64,
    /// `(mu / mu_max) / (sigma / sigma_max)`; `+inf` when `sigma == 0`.
    pub icv: f64,
}

/// Inverse coefficient of variation for every row of a sweep, with `mu` and
/// `sigma` normalized by their maxima over all rows.
pub fn icv_rows(rows: &[Vec<f64>]) -> Result<Vec<IcvStats>> {
    let ms = rows.iter().map(|r| mean_std(r)).collect::<Result<Vec<_>>>()?;
    let mu_max = ms.iter().map(|m| m.0).fold(0.0, f64::max);
    let sigma_max = ms.iter().map(|m| m.1).fold(0.0, f64::max);
    Ok(ms
        .into_iter()
        .map(|(mu, sigma)| {
            let icv = if sigma == 0.0 {
                f64::INFINITY
            } else {
                let mu_n = if mu_max > 0.0 { mu / mu_max } else { 0.0 };
                mu_n / (sigma / sigma_max)
            };
            IcvStats { mu, sigma, icv }
        })
        .collect())
}

/// Statistics of a single list, normalized against itself.
pub fn icv(values: &[f64]) -> Result<IcvStats> {
    Ok(icv_rows(&[values.to_vec()])?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum SweepMethod {
    Systematic,
    /// Best of `candidates` random programs per assumed size, pruned against
    /// that size's pseudo-victim.
    Random { candidates: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub schema: &'static str,
    pub method: SweepMethod,
    pub trap_capacity: usize,
    pub sc_length: usize,
    pub seed: u64,
    pub sizes: Vec<usize>,
    /// `shuttles[i][j]`: attack built for `sizes[i]` against a victim of `sizes[j]`.
    pub shuttles: Vec<Vec<usize>>,
    pub rows: Vec<IcvStats>,
    /// Assumed size with the highest ICV (first on ties).
    pub best_assumed: usize,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("assumed");
        for s in &self.sizes {
            out.push_str(&format!(",{s}"));
        }
        out.push('\n');
        for (a, row) in self.sizes.iter().zip(&self.shuttles) {
            out.push_str(&a.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Victim used for actual size `size` in sweeps seeded with `seed`.
pub fn sweep_victim(size: usize, seed: u64) -> Result<Program> {
    random_victim(size, VICTIM_LENGTH, sub_seed(seed, size as u64))
}

/// Largest victim that fits next to a `cap + 3` adversary.
pub fn max_victim_size(cfg: &DeviceConfig) -> usize {
    cfg.trap_capacity.saturating_sub(3)
}

/// Build the attack for every assumed size and compile it against a victim
/// of every actual size.
pub fn sweep_assumptions(
    method: SweepMethod,
    cfg: &DeviceConfig,
    sizes: &[usize],
    sc_length: usize,
    seed: u64,
) -> Result<SweepTable> {
    if sizes.is_empty() {
        return Err(Error::Empty("sweep sizes"));
    }
    let hi = max_victim_size(cfg);
    if let Some(&bad) = sizes.iter().find(|&&s| s < 2 || s > hi) {
        return Err(Error::InvalidArgument(format!(
            "victim size {bad} outside feasible range 2..={hi} for trap capacity {}",
            cfg.trap_capacity
        )));
    }
    let adversary_size = cfg.trap_capacity + 3;
    let attacks = sizes
        .par_iter()
        .map(|&a| match method {
            SweepMethod::Systematic => {
                let spec = AttackSpec {
                    comm_capacity: cfg.comm_capacity,
                    ..AttackSpec::new(cfg.trap_capacity, a, sc_length, seed)
                };
                Ok(assemble(&spec)?.program)
            }
            SweepMethod::Random { candidates } => {
                let pv = pseudo_victim(a, seed)?;
                let mut best: Option<(usize, Program)> = None;
                for i in 0..candidates.max(1) {
                    let c = gen_candidate(adversary_size, sub_seed(seed, i as u64))?;
                    let s = co_run_shuttles(&c, &pv, cfg, Policy::Greedy, 0)?;
                    if best.as_ref().map_or(true, |(b, _)| s > *b) {
                        best = Some((s, c));
                    }
                }
                let (_, p) = best.expect("at least one candidate");
                Ok(prune(&p, &pv, cfg)?.program)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let victims = sizes
        .iter()
        .map(|&s| sweep_victim(s, seed))
        .collect::<Result<Vec<_>>>()?;
    let shuttles = attacks
        .par_iter()
        .map(|atk| {
            victims
                .iter()
                .map(|v| co_run_shuttles(atk, v, cfg, Policy::Greedy, 0))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let as_f64: Vec<Vec<f64>> = shuttles
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    let rows = icv_rows(&as_f64)?;
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.icv > rows[best].icv {
            best = i;
        }
    }
    Ok(SweepTable {
        schema: "qccd.sweep.v1",
        method,
        trap_capacity: cfg.trap_capacity,
        sc_length,
        seed,
        sizes: sizes.to_vec(),
        shuttles,
        rows,
        best_assumed: sizes[best],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityReduction {
    /// Victim fidelity compiled alone on the device.
    pub baseline: f64,
    /// Victim fidelity co-compiled with the attack.
    pub attacked: f64,
    /// `baseline / attacked`; `None` when the baseline fidelity is zero.
    pub ratio: Option<f64>,
    pub attack_shuttles: usize,
}

/// How much an attack program lowers a victim's fidelity.
///
/// The baseline is the victim compiled alone with the same policy.
pub fn fidelity_reduction(
    victim: &Program,
    attack: &Program,
    cfg: &DeviceConfig,
    policy: Policy,
    seed: u64,
) -> Result<FidelityReduction> {
    let solo = co_run(std::slice::from_ref(victim), cfg, policy, seed)?;
    let both = co_run(&[attack.clone(), victim.clone()], cfg, policy, seed)?;
    let baseline = solo.program_fidelity[0];
    let attacked = both.program_fidelity[1];
    let ratio = if baseline == 0.0 {
        None
    } else if attacked == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(baseline / attacked)
    };
    Ok(FidelityReduction {
        baseline,
        attacked,
        ratio,
        attack_shuttles: both.tenant_shuttles[0],
    })
}
