//! End-to-end checks of the headline behaviors. Prints one line per
//! criterion and exits nonzero when any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use qccd_core::analysis::{
    co_run, co_run_shuttles, fidelity_reduction, mean_std, random_victim, sweep_assumptions, sweep_victim, SweepMethod,
};
use qccd_core::attack::random::{prune, pseudo_victim, search_best};
use qccd_core::attack::systematic::{assemble, build_imc, build_sc, AttackSpec};
use qccd_core::circuit::{concat, edge_weights, emit_program, parse_program, Gate, Program};
use qccd_core::defenses::pad_victim;
use qccd_core::device::{DeviceConfig, PhysicsParams, TrapId};
use qccd_core::fidelity::{gate_fidelity, program_fidelity, ChainEnergy};
use qccd_core::mapper::{place_multi, Policy, RandomScope};
use qccd_core::scheduler::{apply_event, compile, replay, EventKind};
use qccd_core::Error;

const SAMPLE6: &str = "\
MS q[0],q[3]
MS q[1],q[2]
MS q[0],q[3]
MS q[0],q[1]
MS q[1],q[2]
MS q[0],q[3]
MS q[4],q[5]
MS q[1],q[5]
";

const SC_LENGTH: usize = 80;
/// Hand-computed: 1 - 0.001 - 3 * 0.02 / ln 2.
const F_HAND: f64 = 0.912_438_297_546_662_2;
const F_TOL: f64 = 1e-12;
const RANDOM_MEAN_BAND: (f64, f64) = (15.0, 45.0);
const MIN_PRUNED: usize = 20;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(t: Instant, limit: Duration, out: Outcome) -> Outcome {
    let el = t.elapsed();
    match out {
        Ok(d) if el <= limit => Ok(format!("{d} ({:.2}s)", el.as_secs_f64())),
        Ok(d) => Err(format!("{d}; took {:.2}s, limit {}s", el.as_secs_f64(), limit.as_secs())),
        Err(d) => Err(format!("{d} ({:.2}s)", el.as_secs_f64())),
    }
}

fn qubits(st: &qccd_core::MachineState, t: usize) -> Vec<usize> {
    st.chains()[t].iter().map(|i| i.qubit).collect()
}

fn c1() -> Outcome {
    let t = Instant::now();
    let p = parse_program(SAMPLE6).map_err(|e| e.to_string())?;
    let st = place_multi(&[p], Policy::Greedy, &DeviceConfig::with_capacity(4), 0).map_err(|e| e.to_string())?;
    let (t0, t1) = (qubits(&st, 0), qubits(&st, 1));
    let out = check(t0 == [0, 3, 1, 2] && t1 == [4, 5], format!("T0 {t0:?} T1 {t1:?}"));
    within(t, Duration::from_millis(50), out)
}

fn c2() -> Outcome {
    let base = AttackSpec::new(15, 12, SC_LENGTH, 0);
    let spec = (0..10_000u64)
        .map(|seed| AttackSpec { seed, ..base })
        .find(|s| s.first_ion() == 14)
        .ok_or("no seed starts at ion 14")?;
    let sc = build_sc(&spec).map_err(|e| e.to_string())?;
    let ecs = [sc.initial_ec, sc.steps[0].ec, sc.steps[1].ec];
    let route = [(sc.steps[0].moved, sc.steps[0].from, sc.steps[0].to), (sc.steps[1].moved, sc.steps[1].from, sc.steps[1].to)];
    let gen_ok = ecs == [(2, 2), (3, 1), (2, 2)] && route == [(14, 0, 1), (14, 1, 0)];

    // the compiler must agree with the generator's model
    let cfg = DeviceConfig::default();
    let atk = assemble(&spec).map_err(|e| e.to_string())?.program;
    let v = random_victim(12, SC_LENGTH, 1).map_err(|e| e.to_string())?;
    let progs = [atk, v];
    let init = place_multi(&progs, Policy::Greedy, &cfg, 0).map_err(|e| e.to_string())?;
    let s = compile(&progs, &init, &cfg).map_err(|e| e.to_string())?;
    let ec = |st: &qccd_core::MachineState| {
        (st.excess_capacity(TrapId(0), &cfg).unwrap(), st.excess_capacity(TrapId(1), &cfg).unwrap())
    };
    let mut compiled = vec![ec(&init)];
    let mut moved = Vec::new();
    for (k, e) in s.events.iter().enumerate() {
        if let EventKind::Merge { ion, .. } = e.kind {
            let st = replay(&init, &s.events[..=k], &cfg).map_err(|e| e.to_string())?;
            compiled.push(ec(&st));
            moved.push((ion.tenant, ion.qubit));
            if moved.len() == 2 {
                break;
            }
        }
    }
    let sched_ok = compiled == [(2, 2), (3, 1), (2, 2)] && moved == [(0, 14), (0, 14)];
    check(gen_ok && sched_ok, format!("seed {} generator {ecs:?} compiled {compiled:?} moved {moved:?}", spec.seed))
}

fn c3() -> Outcome {
    let t = Instant::now();
    let mut got = Vec::new();
    for (cap, v) in [(15, 12), (20, 17), (25, 22)] {
        let cfg = DeviceConfig::with_capacity(cap);
        let atk = assemble(&AttackSpec::new(cap, v, SC_LENGTH, 0)).map_err(|e| e.to_string())?.program;
        let victim = sweep_victim(v, 0).map_err(|e| e.to_string())?;
        got.push((cap, v, co_run_shuttles(&atk, &victim, &cfg, Policy::Greedy, 0).map_err(|e| e.to_string())?));
    }
    let out = check(got.iter().all(|g| g.2 == SC_LENGTH), format!("(cap, victim, shuttles) {got:?}"));
    within(t, Duration::from_secs(3), out)
}

fn c4() -> Outcome {
    let t = Instant::now();
    let cfg = DeviceConfig::default();
    let sizes: Vec<usize> = (2..=12).collect();
    let s = sweep_assumptions(SweepMethod::Systematic, &cfg, &sizes, SC_LENGTH, 0).map_err(|e| e.to_string())?;
    let diag: Vec<usize> = (0..sizes.len()).map(|i| s.shuttles[i][i]).collect();
    let row_max = (0..sizes.len()).all(|i| s.shuttles[i].iter().all(|&x| x <= diag[i]));
    let exact: Vec<usize> = sizes.iter().zip(&diag).filter(|(_, &d)| d != SC_LENGTH).map(|(&a, _)| a).collect();
    let out = check(
        row_max && exact.is_empty(),
        format!("diagonal {diag:?}; row maximum {row_max}; assumed sizes off {SC_LENGTH}: {exact:?}"),
    );
    within(t, Duration::from_secs(60), out)
}

fn criterion3_attack() -> Result<(Program, Program), Error> {
    let atk = assemble(&AttackSpec::new(15, 12, SC_LENGTH, 0))?.program;
    Ok((atk, sweep_victim(12, 0)?))
}

fn c5() -> Outcome {
    let t = Instant::now();
    let cfg = DeviceConfig::default();
    let (atk, v) = criterion3_attack().map_err(|e| e.to_string())?;
    let xs = (0..1000u64)
        .map(|s| co_run_shuttles(&atk, &v, &cfg, Policy::Random(RandomScope::Segment), s).map(|n| n as f64))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    let (m, sd) = mean_std(&xs).map_err(|e| e.to_string())?;
    let out = check(
        m < 40.0 && (RANDOM_MEAN_BAND.0..=RANDOM_MEAN_BAND.1).contains(&m),
        format!("mean {m:.2} sigma {sd:.2} over 1000 seeds"),
    );
    within(t, Duration::from_secs(120), out)
}

fn c6() -> Outcome {
    let t = Instant::now();
    let cfg = DeviceConfig::default();
    let sizes: Vec<usize> = (2..=12).collect();
    let r = search_best(1000, 18, &sizes, &cfg, 0).map_err(|e| e.to_string())?;
    let search_time = t.elapsed();
    let row = r.best_row();
    let top = *row.iter().max().unwrap();
    let size = sizes[row.iter().position(|&x| x == top).unwrap()];
    let v = pseudo_victim(size, 0).map_err(|e| e.to_string())?;
    let tp = Instant::now();
    let p = prune(&r.best, &v, &cfg).map_err(|e| e.to_string())?;
    let prune_time = tp.elapsed();
    let recheck = co_run_shuttles(&p.program, &v, &cfg, Policy::Greedy, 0).map_err(|e| e.to_string())?;
    let ok = p.final_shuttles == p.baseline
        && recheck == p.baseline
        && p.removed >= MIN_PRUNED
        && r.best.len() == 153
        && search_time <= Duration::from_secs(600)
        && prune_time <= Duration::from_secs(30);
    check(
        ok,
        format!(
            "candidate {} victim size {size}: {} -> {} shuttles, {} of 153 gates removed (search {:.1}s, prune {:.1}s)",
            r.best_index,
            p.baseline,
            recheck,
            p.removed,
            search_time.as_secs_f64(),
            prune_time.as_secs_f64()
        ),
    )
}

fn c7() -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for seed in 0..5u64 {
        let mut by_cap = Vec::new();
        for cap in [15, 25] {
            let cfg = DeviceConfig::with_capacity(cap);
            let atk = assemble(&AttackSpec::new(cap, 12, SC_LENGTH, 0)).map_err(|e| e.to_string())?.program;
            let mut ratios = Vec::new();
            for len in [60, 80, 100] {
                let v = random_victim(12, len, seed).map_err(|e| e.to_string())?;
                let f = fidelity_reduction(&v, &atk, &cfg, Policy::Greedy, 0).map_err(|e| e.to_string())?;
                ratios.push(f.ratio.ok_or("zero baseline fidelity")?);
            }
            ok &= ratios.windows(2).all(|w| w[0] < w[1]);
            by_cap.push(ratios);
        }
        ok &= by_cap[1].iter().zip(&by_cap[0]).all(|(a, b)| a > b);
        if seed == 0 {
            let fmt = |r: &[f64]| r.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" < ");
            notes.push(format!("cap 15 {}; cap 25 {}", fmt(&by_cap[0]), fmt(&by_cap[1])));
        }
    }
    let out = check(ok, format!("5 victim seeds; seed 0 ratios for lengths 60/80/100: {}", notes.join("")));
    within(t, Duration::from_secs(60), out)
}

fn c8() -> Outcome {
    let pp = PhysicsParams {
        gamma: 1e-5,
        tau_2q: 100.0,
        alpha: 0.01,
        ..Default::default()
    };
    let f = |nbar: f64, n_ions: usize| gate_fidelity(&pp, ChainEnergy { nbar, n_ions }).unwrap().value;
    let hand = f(1.0, 2);
    let hand_ok = (hand - F_HAND).abs() < F_TOL;
    let grid: Vec<f64> = (0..100).map(|i| f(i as f64 * 0.05, 10)).collect();
    let mono = grid.windows(2).all(|w| w[1] < w[0]);
    let gates: Vec<f64> = (0..20).map(|i| f(i as f64 * 0.1, 2 + i % 5)).collect();
    let mut prod = 1.0;
    for g in &gates {
        prod *= g;
    }
    let prod_ok = (program_fidelity(&gates) - prod).abs() < F_TOL;
    check(hand_ok && mono && prod_ok, format!("F = {hand:.15}; monotone {mono}; product {prod_ok}"))
}

fn c9() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let program = |max_q: usize| {
        (2..=max_q).prop_flat_map(|n| {
            prop::collection::vec((0..n, 1..n), 0..40)
                .prop_map(move |gs| Program::new(n, gs.into_iter().map(|(a, d)| Gate::Ms(a, (a + d) % n)).collect()).unwrap())
        })
    };
    let workload = (3usize..=15, any::<u64>()).prop_flat_map(move |(cap, seed)| (Just(cap), Just(seed), program(cap), program(cap)));
    let mut fails = Vec::new();

    let r = runner.run(&workload, |(cap, seed, a, b)| {
        let cfg = DeviceConfig::with_capacity(cap);
        let progs = [a, b];
        let init = place_multi(&progs, Policy::Random(RandomScope::Segment), &cfg, seed).unwrap();
        let s = compile(&progs, &init, &cfg).unwrap();
        let mut st = init.clone();
        for e in &s.events {
            apply_event(&mut st, e, &cfg).unwrap();
            prop_assert_eq!(st.ion_count(), init.ion_count());
            for t in 0..2 {
                prop_assert!(st.chains()[t].len() <= cfg.max_chain());
            }
        }
        Ok(())
    });
    if r.is_err() {
        fails.push("ion conservation / EC >= 0");
    }

    let r = runner.run(&(5usize..=15, any::<usize>(), any::<u64>()), |(cap, k, seed)| {
        let assumed = 2 + k % (cap - 4);
        let atk = assemble(&AttackSpec::new(cap, assumed, 40, seed)).unwrap();
        let imc = edge_weights(&Program::from_gates(build_imc(cap)).unwrap());
        for e in edge_weights(&atk.program).iter() {
            let want = if imc.weight(e.key().0, e.key().1) > 0 { 2 } else { 1 };
            prop_assert_eq!(e.weight, want);
        }
        Ok(())
    });
    if r.is_err() {
        fails.push("attack edge weights");
    }

    let r = runner.run(&(workload, 1e-7f64..1e-3, 1e-4f64..0.05, 0.0f64..2.0), |((cap, seed, a, b), g, al, dn)| {
        let base = DeviceConfig::with_capacity(cap);
        let other = DeviceConfig {
            physics: PhysicsParams {
                gamma: g,
                alpha: al,
                dnbar_shuttle: dn,
                ..Default::default()
            },
            ..base
        };
        let progs = [a, b];
        let x = co_run(&progs, &base, Policy::Greedy, seed).unwrap().shuttle_count;
        let y = co_run(&progs, &other, Policy::Greedy, seed).unwrap().shuttle_count;
        prop_assert_eq!(x, y);
        Ok(())
    });
    if r.is_err() {
        fails.push("physics invariance");
    }

    let r = runner.run(&program(20), |p| {
        let back = parse_program(&emit_program(&p)).unwrap();
        prop_assert_eq!(back.gates, p.gates.clone());
        prop_assert_eq!(concat([p.gates.as_slice()]).gates, p.gates);
        Ok(())
    });
    if r.is_err() {
        fails.push("parse/emit round trip");
    }
    check(fails.is_empty(), format!("4 properties x 1000 cases; failing: {fails:?}"))
}

fn c10() -> Outcome {
    let cfg = DeviceConfig::default();
    let atk = assemble(&AttackSpec::new(15, 10, SC_LENGTH, 0)).map_err(|e| e.to_string())?.program;
    let v = random_victim(10, SC_LENGTH, 0).map_err(|e| e.to_string())?;
    let padded = pad_victim(&v, 15).map_err(|e| e.to_string())?;
    let plain = place_multi(&[atk.clone(), v], Policy::Greedy, &cfg, 0);
    let pad = place_multi(&[atk, padded], Policy::Greedy, &cfg, 0);
    check(
        plain.is_ok() && matches!(pad, Err(Error::Capacity { .. })),
        format!("unpadded ok: {}; padded: {:?}", plain.is_ok(), pad.err().map(|e| e.to_string())),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("greedy mapping golden", c1),
        ("shuttle trace golden", c2),
        ("headline shuttle count", c3),
        ("diagonal dominance", c4),
        ("random mapping defense", c5),
        ("pruning soundness", c6),
        ("fidelity trend", c7),
        ("fidelity model", c8),
        ("invariants", c9),
        ("padding defense", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
