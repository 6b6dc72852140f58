use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cellsched::agent::checkpoint;
use cellsched::harness::{
    emit_results, evaluate_vs_pf, plot_svg, read_csv, run_baseline, train, write_rewards_csv, EvalSettings,
    GreedyActor, Method, RunConfig,
};
use cellsched::sched::SchedulerKind;
use cellsched::Result;

#[derive(Parser)]
#[command(name = "cellsched", version, about = "Single-cell downlink scheduling with PF and DDPG agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train agents and write evaluation CSVs, plots and checkpoints.
    Train {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's training seeds.
        #[arg(long, num_args = 1..)]
        seeds: Option<Vec<u64>>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a conventional scheduler and print long-run statistics.
    Baseline {
        #[arg(long)]
        scheduler: SchedulerKind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        ttis: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a checkpointed agent against PF.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render an evaluation CSV as an SVG plot.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        /// Defaults to the CSV path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn cmd_train(method: Method, config: &Path, seeds: Option<Vec<u64>>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    cfg.method = method;
    if let Some(seeds) = seeds {
        cfg.seeds = seeds;
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let n_agents = if method == Method::Dual { 2 } else { 1 };
    let mut logs = vec![Vec::new(); n_agents];
    for &seed in &cfg.seeds {
        log::info!("training {method} with seed {seed}");
        let out = train(&cfg, seed)?;
        for (i, (log, agent)) in out.logs.into_iter().zip(&out.agents).enumerate() {
            let last = log.evals.last().expect("initial evaluation");
            println!(
                "seed {seed} agent {i}: {} updates, tp_diff {:+.4}, jfi_diff {:+.4}",
                last.update_count, last.tp_diff, last.jfi_diff
            );
            let name = if n_agents == 1 {
                format!("agent_seed{seed}.ckpt")
            } else {
                format!("agent{i}_seed{seed}.ckpt")
            };
            checkpoint::save(agent, cfg.out_dir.join(name))?;
            logs[i].push(log);
        }
    }
    for (i, agent_logs) in logs.iter().enumerate() {
        let stem = if n_agents == 1 { "results".to_string() } else { format!("results_agent{i}") };
        let (csv, svg) = emit_results(agent_logs, &cfg.out_dir, &stem)?;
        write_rewards_csv(agent_logs, cfg.out_dir.join(format!("{}_rewards.csv", stem)))?;
        println!("wrote {} and {}", csv.display(), svg.display());
    }
    Ok(())
}

fn cmd_baseline(kind: SchedulerKind, config: Option<&Path>, ttis: u64, seed: u64) -> Result<()> {
    let cfg = load_config(config)?;
    let rep = run_baseline(&cfg.sim, &cfg.table()?, kind, seed, ttis)?;
    println!("scheduler   {}", rep.scheduler);
    println!("ttis        {}", rep.ttis);
    println!("throughput  {:.1} bits/TTI", rep.throughput);
    println!("jfi         {:.4}", rep.jfi);
    println!("bler        {:.4}", rep.bler);
    let shares: Vec<String> = rep.share.iter().map(|s| format!("{s:.3}")).collect();
    println!("share       {}", shares.join(" "));
    Ok(())
}

fn cmd_eval(path: &Path, config: Option<&Path>) -> Result<()> {
    let cfg = load_config(config)?;
    let agent = checkpoint::load(path, 0)?;
    if agent.n_ue() != cfg.sim.n_ue {
        return Err(cellsched::Error::Config(format!(
            "checkpoint schedules {} UEs but the config has {}",
            agent.n_ue(),
            cfg.sim.n_ue
        )));
    }
    let table = cfg.table()?;
    let settings = EvalSettings {
        sim: &cfg.sim,
        table: &table,
        seeds: &cfg.eval_seeds,
        ttis: cfg.eval_ttis,
    };
    let rec = evaluate_vs_pf(&mut GreedyActor(agent.actor()), &settings, agent.update_count())?;
    println!("update_count {}", rec.update_count);
    println!("tp_diff      {:+.4}", rec.tp_diff);
    println!("jfi_diff     {:+.4}", rec.jfi_diff);
    for s in &rec.per_seed {
        println!("  seed {}: tp_diff {:+.4} jfi_diff {:+.4}", s.seed, s.tp_diff(), s.jfi_diff());
    }
    Ok(())
}

fn cmd_plot(csv: &Path, out: Option<PathBuf>) -> Result<()> {
    let rows = read_csv(csv)?;
    let out = out.unwrap_or_else(|| csv.with_extension("svg"));
    let title = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    plot_svg(&rows, &out, title)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { method, config, seeds, out } => cmd_train(method, &config, seeds, out),
        Command::Baseline { scheduler, config, ttis, seed } => cmd_baseline(scheduler, config.as_deref(), ttis, seed),
        Command::Eval { checkpoint, config } => cmd_eval(&checkpoint, config.as_deref()),
        Command::Plot { csv, out } => cmd_plot(&csv, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
