//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Set `ACCEPTANCE_STRICT=1` to turn any
//! failure into a non-zero exit.
//!
//! Pass a substring as the first argument to run only matching criteria,
//! e.g. `cargo test --test acceptance -- expert`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use cellsched::agent::{soft_update, DdpgAgent, Hyperparams, Mlp, OutputActivation, Transition};
use cellsched::harness::{run_baseline, train, Method, RunConfig, RunLog};
use cellsched::reward::{
    direct_reward, dual_reward, expert_reward, Comparison, ComparisonOutcome, RewardSnapshot,
    RewardWeights,
};
use cellsched::sched::{
    jain_index, kelly_aggregate_change, pf_select, sum_log_utility, SchedulerKind, ThroughputTracker,
};
use cellsched::sim::{select_mcs, CellEnv, McsTable, SimConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

// ---------------------------------------------------------------- 1

fn formula_oracles() -> Outcome {
    let mut bad = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if !close(got, want) {
            bad.push(format!("{name}: {got} != {want}"));
        }
    };

    // Average throughput update, W = 100.
    let mut tr = ThroughputTracker::from_averages(vec![1.0, 2.0, 50.0], 100.0).unwrap();
    tr.update(&[100.0, 0.0, 0.0]).unwrap();
    expect("T update scheduled", tr.averages()[0], 1.99);
    expect("T update idle", tr.averages()[1], 1.98);
    expect("T update idle large", tr.averages()[2], 49.5);

    // Jain's index.
    expect("JFI [1,2,3]", jain_index(&[1.0, 2.0, 3.0]).unwrap(), 36.0 / 42.0);
    expect("JFI one-hot", jain_index(&[5.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
    expect("JFI equal", jain_index(&[7.0; 6]).unwrap(), 1.0);

    // Weighted direct reward.
    let snap = RewardSnapshot {
        inst_throughput: 0.5 * 49_993.2,
        window_throughput: 0.0,
        jfi: 0.8,
    };
    let w = RewardWeights::new(1.0, 5.0).unwrap();
    expect("direct reward", direct_reward(&snap, &w, 49_993.2).unwrap(), 4.5);

    use Comparison::*;
    let oc = |throughput, jfi| ComparisonOutcome { throughput, jfi };

    // Two-agent table with alpha = 0.85, beta = 1.05.
    let w = RewardWeights::new(0.85, 1.05).unwrap();
    for (o, want) in [
        (oc(Greater, Greater), 1.90),
        (oc(Greater, Less), 0.85),
        (oc(Less, Greater), 1.05),
        (oc(Less, Less), 0.0),
    ] {
        expect(&format!("dual {o:?}"), dual_reward(o, &w), want);
    }

    // PF-reference table with alpha = 0.9, beta = 1.15.
    let w = RewardWeights::new(0.9, 1.15).unwrap();
    for (o, want) in [
        (oc(Greater, Greater), 2.05),
        (oc(Greater, Less), 0.9),
        (oc(Less, Greater), 1.15),
        (oc(Less, Less), 0.0),
        (oc(Greater, Equal), 1.475),
        (oc(Equal, Greater), 1.6),
        (oc(Equal, Equal), 1.025),
        (oc(Equal, Less), 0.45),
        (oc(Less, Equal), 0.575),
    ] {
        expect(&format!("expert {o:?}"), expert_reward(o, &w), want);
    }

    // Aggregate proportional change: x = (1, 2, 4), x* = (2, 1, 4)
    // gives 1 - 0.5 + 0 = 0.5.
    expect(
        "aggregate change",
        kelly_aggregate_change(&[1.0, 2.0, 4.0], &[2.0, 1.0, 4.0]).unwrap(),
        0.5,
    );
    // Sum of logs: ln 2 + ln 3 + ln 7 = ln 42.
    expect("sum-log", sum_log_utility(&[2.0, 3.0, 7.0]).unwrap(), 42f64.ln());

    let n = 3 + 3 + 1 + 4 + 9 + 1 + 1;
    outcome(bad.is_empty(), if bad.is_empty() { format!("{n} values exact to 1e-9") } else { bad.join("; ") })
}

// ---------------------------------------------------------------- 2

const BF_UES: usize = 3;
const BF_HORIZON: usize = 12;

fn bf_instance(seed: u64, table: &McsTable, cfg: &SimConfig) -> Vec<[f64; BF_UES]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let snr: Vec<f64> = (0..BF_UES).map(|_| rng.random_range(0.0..20.0)).collect();
    (0..BF_HORIZON)
        .map(|_| {
            let mut row = [0.0; BF_UES];
            for (n, r) in row.iter_mut().enumerate() {
                let p: f64 = Exp1.sample(&mut rng);
                let sinr = snr[n] + 10.0 * p.log10();
                *r = select_mcs(sinr, 0.0, table.entries()).spectral_efficiency * cfg.bits_per_se();
            }
            row
        })
        .collect()
}

fn ema_step(t: &[f64; BF_UES], ue: usize, rate: f64, w: f64) -> [f64; BF_UES] {
    let mut next = *t;
    for (n, v) in next.iter_mut().enumerate() {
        let delivered = if n == ue { rate } else { 0.0 };
        *v = (w - 1.0) / w * *v + delivered / w;
    }
    next
}

fn final_utility(rates: &[[f64; BF_UES]], choose: &mut dyn FnMut(usize, &[f64; BF_UES], &[f64; BF_UES]) -> usize, w: f64) -> f64 {
    let mut t = [1.0; BF_UES];
    for (k, row) in rates.iter().enumerate() {
        let ue = choose(k, row, &t);
        t = ema_step(&t, ue, row[ue], w);
    }
    sum_log_utility(&t).unwrap()
}

fn best_utility(rates: &[[f64; BF_UES]], k: usize, t: [f64; BF_UES], w: f64) -> f64 {
    if k == rates.len() {
        return t.iter().map(|x| x.ln()).sum();
    }
    (0..BF_UES)
        .map(|ue| best_utility(rates, k + 1, ema_step(&t, ue, rates[k][ue], w), w))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn pf_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut scale_ok = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let inst: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..1e4)).collect();
        let avg: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1e3)).collect();
        let c = rng.random_range(1e-3..1e3);
        let d = rng.random_range(1e-3..1e3);
        let scaled_i: Vec<f64> = inst.iter().map(|x| x * c).collect();
        let scaled_t: Vec<f64> = avg.iter().map(|x| x * d).collect();
        if pf_select(&inst, &avg).unwrap() == pf_select(&scaled_i, &scaled_t).unwrap() {
            scale_ok += 1;
        }
    }

    let ties_ok = (0..50).all(|_| {
        pf_select(&[3.0, 6.0, 6.0, 1.0], &[1.0, 2.0, 2.0, 1.0]).unwrap() == 0
            && pf_select(&[1.0, 4.0, 2.0, 4.0], &[1.0, 1.0, 1.0, 1.0]).unwrap() == 1
    });

    let cfg = SimConfig::default();
    let table = McsTable::lte_cqi();
    let w = cfg.pf_window;
    let mut worst: f64 = f64::INFINITY;
    let mut closed = 0;
    let mut pooled = (0.0, 0.0);
    for seed in 0..20 {
        let rates = bf_instance(seed, &table, &cfg);
        let opt = best_utility(&rates, 0, [1.0; BF_UES], w);
        let pf = final_utility(&rates, &mut |_, i, t| pf_select(i, t).unwrap(), w);
        let rr = final_utility(&rates, &mut |k, _, _| k % BF_UES, w);
        let ratio = if opt - rr <= 1e-12 { 1.0 } else { (pf - rr) / (opt - rr) };
        worst = worst.min(ratio);
        pooled.0 += pf - rr;
        pooled.1 += opt - rr;
        if ratio >= 0.98 {
            closed += 1;
        }
    }
    let pass = scale_ok == 100 && ties_ok && closed == 20;
    outcome(
        pass,
        format!(
            "scale invariance {scale_ok}/100, ties {}, gap closed >= 98% on {closed}/20 (worst {:.1}%, pooled {:.1}%)",
            if ties_ok { "ok" } else { "FAILED" },
            100.0 * worst,
            100.0 * pooled.0 / pooled.1
        ),
    )
}

// ---------------------------------------------------------------- 3

fn scheduler_ordering() -> Outcome {
    let table = McsTable::lte_cqi();
    let sim = SimConfig::default();
    let ttis = 100_000;
    let mut fails = Vec::new();
    let mut summary = Vec::new();
    for seed in 0..5 {
        let run = |k| run_baseline(&sim, &table, k, seed, ttis).unwrap();
        let (mc, pf, rr) = (run(SchedulerKind::MaxCi), run(SchedulerKind::Pf), run(SchedulerKind::RoundRobin));
        if !(mc.throughput >= pf.throughput && pf.throughput >= rr.throughput) {
            fails.push(format!("seed {seed} throughput {:.0}/{:.0}/{:.0}", mc.throughput, pf.throughput, rr.throughput));
        }
        if pf.jfi < mc.jfi {
            fails.push(format!("seed {seed} jfi pf {:.3} < maxci {:.3}", pf.jfi, mc.jfi));
        }
        summary.push(format!("{:.0}/{:.0}/{:.0}", mc.throughput, pf.throughput, rr.throughput));
    }
    let sym = SimConfig {
        avg_snr_range_db: [10.0, 10.0],
        ..SimConfig::default()
    };
    let mut share_range = (1.0f64, 0.0f64);
    for seed in 0..5 {
        let pf = run_baseline(&sym, &table, SchedulerKind::Pf, seed, ttis).unwrap();
        for &s in &pf.share {
            share_range = (share_range.0.min(s), share_range.1.max(s));
            if (s - 0.20).abs() > 0.02 {
                fails.push(format!("seed {seed} share {s:.4}"));
            }
        }
    }
    outcome(
        fails.is_empty(),
        if fails.is_empty() {
            format!(
                "maxci/pf/rr bits per TTI {}; symmetric PF shares {:.4}..{:.4}",
                summary.join(" "),
                share_range.0,
                share_range.1
            )
        } else {
            fails.join("; ")
        },
    )
}

// ---------------------------------------------------------------- 4

fn olla_bler() -> Outcome {
    let sim = SimConfig {
        n_ue: 2,
        avg_snr_range_db: [10.0, 10.0],
        ..SimConfig::default()
    };
    let mut env = CellEnv::with_default_table(sim).unwrap();
    env.reset(7);
    let n = 100_000;
    let mut nacks = 0u32;
    for _ in 0..n {
        let (res, _) = env.step(0).unwrap();
        nacks += u32::from(!res.ack);
    }
    let bler = f64::from(nacks) / n as f64;
    outcome((0.08..=0.12).contains(&bler), format!("realized BLER {bler:.4} over {n} TTIs"))
}

// ---------------------------------------------------------------- 5

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn gradient_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let sizes: Vec<usize> = if trial == 19 {
            vec![10, 32, 32, 5]
        } else {
            let depth = rng.random_range(1..=2);
            let mut s = vec![rng.random_range(2..=10)];
            s.extend((0..depth).map(|_| rng.random_range(2..=32)));
            s.push(rng.random_range(1..=5));
            s
        };
        let out = if trial % 2 == 0 { OutputActivation::Softmax } else { OutputActivation::Identity };
        let mut net = Mlp::new(&sizes, out, &mut rng).unwrap();
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dy: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |net: &Mlp, x: &[f64]| -> f64 {
            net.predict(x).unwrap().iter().zip(&dy).map(|(y, d)| y * d).sum()
        };
        let cache = net.forward(&x).unwrap();
        let mut grad = vec![0.0; net.n_params()];
        let dx = net.backward(&cache, &dy, Some(&mut grad)).unwrap();
        for k in 0..net.n_params() {
            let orig = net.params()[k];
            net.params_mut()[k] = orig + eps;
            let up = loss(&net, &x);
            net.params_mut()[k] = orig - eps;
            let down = loss(&net, &x);
            net.params_mut()[k] = orig;
            worst = worst.max(rel_err(grad[k], (up - down) / (2.0 * eps)));
        }
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp[i] += eps;
            let mut xm = x.clone();
            xm[i] -= eps;
            worst = worst.max(rel_err(dx[i], (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * eps)));
        }
    }
    outcome(worst < 1e-4, format!("max relative error {worst:.2e} over 20 nets"))
}

// ---------------------------------------------------------------- 6

fn ddpg_sanity() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // Critic regression on one transition with no bootstrap.
    let hp = Hyperparams {
        gamma: 0.0,
        hidden: vec![64, 64],
        ..Hyperparams::default()
    };
    let mut agent = DdpgAgent::new(3, hp, 1).unwrap();
    let t = Transition {
        s: vec![0.4, 1.0, 0.7, 1.0, 0.3, 0.8],
        a: vec![0.2, 0.5, 0.3],
        r: 1.37,
        s_next: vec![1.0, 0.6, 0.2, 0.9, 0.4, 1.0],
    };
    let batch = vec![&t; 64];
    let q = |agent: &DdpgAgent| {
        let mut x = t.s.clone();
        x.extend(&t.a);
        agent.critic().predict(&x).unwrap()[0]
    };
    let mut converged_at = None;
    for step in 1..=2000 {
        agent.train_step(&batch).unwrap();
        if (q(&agent) - t.r).abs() < 1e-2 {
            converged_at = Some(step);
            break;
        }
    }
    match converged_at {
        Some(k) => notes.push(format!("critic within 1e-2 of r after {k} steps")),
        None => {
            pass = false;
            notes.push(format!("critic at {:.4} after 2000 steps, target {}", q(&agent), t.r));
        }
    }

    // Actor ascent against a frozen critic.
    let mut worst_gain = f64::INFINITY;
    for seed in 0..20 {
        let hp = Hyperparams {
            actor_lr: 1e-5,
            ..Hyperparams::default()
        };
        let mut agent = DdpgAgent::new(4, hp, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
        let t = Transition {
            s: s.clone(),
            a: vec![0.25; 4],
            r: 0.0,
            s_next: s.clone(),
        };
        let value = |agent: &DdpgAgent| {
            let mut x = s.clone();
            x.extend(agent.actor().predict(&s).unwrap());
            agent.critic().predict(&x).unwrap()[0]
        };
        let critic_before = agent.critic().clone();
        let before = value(&agent);
        agent.networks_mut().actor_step(&[&t]).unwrap();
        if agent.critic() != &critic_before {
            pass = false;
            notes.push("actor step modified the critic".into());
        }
        worst_gain = worst_gain.min(value(&agent) - before);
    }
    if worst_gain < -1e-6 {
        pass = false;
    }
    notes.push(format!("worst critic change after actor step {worst_gain:+.2e}"));

    // Soft update is a small convex step.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let live = Mlp::new(&[6, 16, 3], OutputActivation::Softmax, &mut rng).unwrap();
    let mut target = Mlp::new(&[6, 16, 3], OutputActivation::Softmax, &mut rng).unwrap();
    let old = target.clone();
    soft_update(&live, &mut target, 0.005).unwrap();
    let bound_ok = target
        .params()
        .iter()
        .zip(old.params())
        .zip(live.params())
        .all(|((&new, &o), &l)| (new - o).abs() <= 0.005 * (l - o).abs() + 1e-9);
    if !bound_ok {
        pass = false;
    }
    notes.push(format!("soft-update bound {}", if bound_ok { "holds" } else { "VIOLATED" }));
    outcome(pass, notes.join("; "))
}

// ---------------------------------------------------------------- 7-9

const TRAIN_SEEDS: [u64; 3] = [0, 1, 2];

fn desk_config(method: Method, total_updates: u64) -> RunConfig {
    RunConfig {
        method,
        n_envs: 8,
        total_updates,
        sim: SimConfig {
            n_ue: 3,
            ..SimConfig::default()
        },
        hp: Hyperparams {
            hidden: vec![64, 64],
            ..Hyperparams::default()
        },
        ..RunConfig::default()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn final_diffs(log: &RunLog) -> (f64, f64) {
    let e = log.evals.last().unwrap();
    (e.tp_diff, e.jfi_diff)
}

fn expert_learning() -> Outcome {
    let cfg = desk_config(Method::Expert, 4000);
    let mut within = 0;
    let mut per_seed = Vec::new();
    let mut first = Vec::new();
    let mut last = Vec::new();
    for seed in TRAIN_SEEDS {
        let out = train(&cfg, seed).unwrap();
        let log = &out.logs[0];
        let (tp, jfi) = final_diffs(log);
        if tp.abs() <= 0.10 && jfi.abs() <= 0.10 {
            within += 1;
        }
        let r = &log.rewards;
        first.push(mean(&r[..500]));
        last.push(mean(&r[r.len() - 500..]));
        per_seed.push(format!("seed {seed}: tp {tp:+.3} jfi {jfi:+.3}"));
    }
    let ratio = mean(&last) / mean(&first);
    outcome(
        within >= 2 && ratio >= 1.2,
        format!(
            "{} | within 0.10 on {within}/3 seeds | reward last/first 500 = {:.3}/{:.3} = {ratio:.2}",
            per_seed.join(", "),
            mean(&last),
            mean(&first)
        ),
    )
}

fn direct_learning() -> Outcome {
    let run = |beta: f64| -> Vec<(f64, f64)> {
        let mut cfg = desk_config(Method::Direct, 4000);
        cfg.weights = Some(RewardWeights::new(1.0, beta).unwrap());
        TRAIN_SEEDS
            .iter()
            .map(|&seed| final_diffs(&train(&cfg, seed).unwrap().logs[0]))
            .collect()
    };
    let five = run(5.0);
    let ten = run(10.0);
    let directional = five.iter().all(|&(tp, jfi)| tp >= -0.05 && jfi <= 0.02);
    let jfi5 = mean(&five.iter().map(|d| d.1).collect::<Vec<_>>());
    let jfi10 = mean(&ten.iter().map(|d| d.1).collect::<Vec<_>>());
    let fmt = |v: &[(f64, f64)]| {
        v.iter()
            .map(|(t, j)| format!("({t:+.3},{j:+.3})"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        directional && jfi10 >= jfi5,
        format!(
            "ratio 5 (tp,jfi) {} | ratio 10 {} | mean jfi_diff {jfi5:+.3} -> {jfi10:+.3}",
            fmt(&five),
            fmt(&ten)
        ),
    )
}

fn dual_learning() -> Outcome {
    let cfg = desk_config(Method::Dual, 2000);
    let mut ok = true;
    let mut notes = Vec::new();
    for seed in TRAIN_SEEDS {
        // Mirror and freeze invariants are enforced inside the loop; a
        // breach surfaces as an error here.
        match train(&cfg, seed) {
            Ok(out) => {
                for log in &out.logs {
                    let (tp, jfi) = final_diffs(log);
                    ok &= tp.abs() <= 0.15 && jfi.abs() <= 0.15;
                    notes.push(format!("s{seed}a{}: ({tp:+.3},{jfi:+.3})", log.agent));
                }
            }
            Err(e) => {
                ok = false;
                notes.push(format!("seed {seed}: {e}"));
            }
        }
    }
    outcome(ok, notes.join(" "))
}

// ---------------------------------------------------------------- 10

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "total_updates = 150\neval_every = 50\neval_ttis = 500\neval_seeds = [77, 78]\n\
         [sim]\nn_ue = 3\n[hp]\nhidden = [16, 16]\n",
    )
    .unwrap();
    let mut csvs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("out{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_cellsched"))
            .args(["train", "--method", "expert", "--seeds", "3", "4", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("train failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        csvs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    let rows = csvs[0].iter().filter(|&&b| b == b'\n').count();
    outcome(
        csvs[0] == csvs[1],
        format!("two runs, {} bytes, {} lines, identical: {}", csvs[0].len(), rows, csvs[0] == csvs[1]),
    )
}

fn main() -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "formula oracles", formula_oracles),
        (2, "PF correctness suite", pf_suite),
        (3, "scheduler ordering", scheduler_ordering),
        (4, "link adaptation BLER", olla_bler),
        (5, "gradient checks", gradient_checks),
        (6, "DDPG sanity", ddpg_sanity),
        (7, "expert learning", expert_learning),
        (8, "direct learning", direct_learning),
        (9, "dual learning", dual_learning),
        (10, "end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        if let Some(pat) = &filter {
            if !name.contains(pat.as_str()) {
                continue;
            }
        }
        let t0 = Instant::now();
        let out = f();
        println!(
            "[{}] {id:>2} {name} ({:.1}s): {}",
            if out.pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64(),
            out.detail
        );
        if !out.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        return ExitCode::SUCCESS;
    }
    println!("{failed} criteria failed");
    if std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

