use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ftp_core::cost::count_macs;
use ftp_core::network::{cnn_arch, fc_arch};
use ftp_core::Rule;
use ftp_lab::experiment::{
    evaluate_model, load_splits, run_experiment, run_hw_sweep, write_experiment, write_sweep,
};
use ftp_lab::model::Model;
use ftp_lab::report::{mac_text_table, write_csv, write_json, MacRow};
use ftp_lab::verify::verify_theory;
use ftp_lab::{ArchFamily, LabError, Overrides, Result, RunConfig};

#[derive(Parser)]
#[command(name = "ftp", version, about = "Train and analyse forward target propagation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train across seeds; writes metrics.csv, summary.json and model files.
    Train(Overrides),
    /// Train while recording FTP-vs-BP alignment every epoch.
    Align(Overrides),
    /// Per-example MAC counts for bp, ftp and pepita.
    Macs(Overrides),
    /// Train on an emulated analog device; writes sweep.csv.
    HwSim(Overrides),
    /// Check the linear two-hidden-layer analysis numerically.
    VerifyTheory(Overrides),
    /// Evaluate a saved model on the test split.
    Eval {
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        flags: Overrides,
    },
}

fn prepare(flags: &Overrides) -> Result<RunConfig> {
    let cfg = flags.resolve()?;
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn train(mut cfg: RunConfig, align: bool) -> Result<()> {
    if align && cfg.align_every == 0 {
        cfg.align_every = 1;
    }
    let splits = load_splits(&cfg)?;
    let exp = run_experiment(&cfg, &splits, &|r| {
        if r.split == "test" {
            let metric = match (r.accuracy, r.rrse, r.corr) {
                (Some(a), _, _) => format!("acc {:.4}", a),
                (None, Some(rrse), Some(corr)) => format!("rrse {rrse:.4} corr {corr:.4}"),
                _ => String::new(),
            };
            eprintln!("{} epoch {:>3}  loss {:.4}  {metric}  {:.1}s", r.run_id, r.epoch, r.loss, r.wall_seconds);
        }
    })?;
    for p in write_experiment(&exp, &cfg.out)? {
        println!("wrote {}", p.display());
    }
    let s = &exp.summary;
    if let Some(a) = s.test_accuracy {
        println!("test accuracy {:.2} ± {:.2} % over {} seeds", 100.0 * a.mean, 100.0 * a.std, a.n);
    }
    if let (Some(r), Some(c)) = (s.test_rrse, s.test_corr) {
        println!("test rrse {:.4} ± {:.4}, corr {:.4} ± {:.4} over {} seeds", r.mean, r.std, c.mean, c.std, r.n);
    }
    Ok(())
}

/// `(model, input, channels, height, width, classes)` for the MAC table.
fn mac_models(cfg: &RunConfig, explicit: bool) -> Vec<(&'static str, usize, usize, usize, usize)> {
    let all = [
        ("mnist", 1, 28, 28, 10),
        ("fmnist", 1, 28, 28, 10),
        ("cifar10", 3, 32, 32, 10),
        ("cifar100", 3, 32, 32, 100),
    ];
    if explicit {
        all.into_iter().filter(|m| m.0 == cfg.dataset).collect()
    } else {
        all.into_iter().filter(|m| m.0 != "fmnist").collect()
    }
}

fn macs(cfg: RunConfig, explicit_dataset: bool) -> Result<()> {
    let models = mac_models(&cfg, explicit_dataset);
    if models.is_empty() {
        return Err(LabError::Config(format!("no MAC model for dataset `{}`", cfg.dataset)));
    }
    let mut rows = Vec::new();
    for (name, c, h, w, classes) in models {
        let arch = match cfg.arch {
            ArchFamily::Fc => fc_arch(c * h * w, &cfg.hidden, classes, 0.0),
            ArchFamily::Cnn => cnn_arch(c, h, w, cfg.filters, classes),
            ArchFamily::Rnn => return Err(LabError::Config("MAC counts cover the fc and cnn families".into())),
        };
        let bp = count_macs(&arch, Rule::Bp)?;
        for rule in Rule::ALL {
            rows.push(MacRow::new(&format!("{}-{name}", cfg.arch.name()), &count_macs(&arch, rule)?, &bp)?);
        }
    }
    std::fs::create_dir_all(&cfg.out).map_err(|e| LabError::io(&cfg.out, e))?;
    let p = cfg.out.join("macs.csv");
    write_csv(&p, &rows)?;
    print!("{}", mac_text_table(&rows));
    println!("wrote {}", p.display());
    Ok(())
}

fn hw_sim(cfg: RunConfig) -> Result<()> {
    let splits = load_splits(&cfg)?;
    let rows = run_hw_sweep(&cfg, &splits, &mut |alpha, seed, stats| {
        eprintln!("alpha {alpha} seed {seed} epoch {:>3}  loss {:.4}", stats.epoch + 1, stats.loss);
    })?;
    for r in &rows {
        println!("{} bits {} alpha {} seed {}: {:.4}", r.rule, r.bits, r.alpha, r.seed, r.test_accuracy);
    }
    println!("wrote {}", write_sweep(&rows, &cfg.out)?.display());
    Ok(())
}

fn theory(cfg: RunConfig) -> Result<()> {
    let report = verify_theory(&cfg)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| LabError::io(&cfg.out, e))?;
    let p = cfg.out.join("theory.json");
    write_json(&p, &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    println!("wrote {}", p.display());
    if report.all_ok() {
        Ok(())
    } else {
        Err(LabError::Check("see theory.json for the violated properties".into()))
    }
}

fn eval(cfg: RunConfig, model: PathBuf) -> Result<()> {
    let m = Model::load(&model)?;
    let splits = load_splits(&cfg)?;
    let mut r = evaluate_model(&m, &splits.test, cfg.train_config(0).loss)?;
    r.seed = cfg.seeds[0];
    std::fs::create_dir_all(&cfg.out).map_err(|e| LabError::io(&cfg.out, e))?;
    let p = cfg.out.join("eval.json");
    write_json(&p, &r)?;
    println!("{}", serde_json::to_string(&r).expect("metrics serialize"));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(f) => train(prepare(&f)?, false),
        Command::Align(f) => train(prepare(&f)?, true),
        Command::Macs(f) => {
            let explicit = f.dataset.is_some();
            macs(prepare(&f)?, explicit)
        }
        Command::HwSim(f) => hw_sim(prepare(&f)?),
        Command::VerifyTheory(f) => theory(prepare(&f)?),
        Command::Eval { model, flags } => eval(prepare(&flags)?, model),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
