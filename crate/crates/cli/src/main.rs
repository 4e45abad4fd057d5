use std::path::PathBuf;
use std::process::ExitCode;

use biaslab::biasmeter::ContextScheme;
use biaslab::pipeline::{Experiment, ExperimentConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "biaslab", version, about = "Measure and reduce gender bias in LSTM language models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score the training corpus under each context scheme
    Analyze(Args),
    /// Train one model per λ
    Train(Args),
    /// Sample text from trained models
    Generate(Args),
    /// Score generated text against the training corpus, then write the report
    Evaluate(Args),
    /// Assemble the report from existing evaluations
    Report(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment file, TOML or JSON
    #[arg(long)]
    config: PathBuf,
    /// Run a single λ instead of the configured sweep
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Output directory, overriding the experiment file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Fixed,
    Exponential,
    Both,
}

fn select_schemes(configured: &[ContextScheme], arg: SchemeArg) -> Vec<ContextScheme> {
    let pick = |name: &str, default: ContextScheme| {
        configured.iter().copied().find(|s| s.name() == name).unwrap_or(default)
    };
    let fixed = pick("fixed", ContextScheme::fixed());
    let exponential = pick("exponential", ContextScheme::exponential());
    match arg {
        SchemeArg::Fixed => vec![fixed],
        SchemeArg::Exponential => vec![exponential],
        SchemeArg::Both => vec![fixed, exponential],
    }
}

fn experiment(args: &Args) -> biaslab::Result<Experiment> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(scheme) = args.scheme {
        config.schemes = select_schemes(&config.schemes, scheme);
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    Experiment::new(config)
}

fn lambdas(args: &Args, exp: &Experiment) -> Vec<f64> {
    match args.lambda {
        Some(l) => vec![l],
        None => exp.config.lambdas.clone(),
    }
}

fn run(command: Command) -> biaslab::Result<()> {
    match command {
        Command::Analyze(args) => {
            let exp = experiment(&args)?;
            for s in exp.analyze()? {
                println!("train {}: mu {:.4} sigma {:.4} n {}", s.scheme, s.mu, s.sigma, s.n);
            }
        }
        Command::Train(args) => {
            let exp = experiment(&args)?;
            for lambda in lambdas(&args, &exp) {
                let report = exp.train(lambda)?;
                let last = report.final_record();
                println!(
                    "lambda {lambda}: best epoch {} val_ppl {} test_ppl {} reg {:.4e} -> {}",
                    report.best_epoch,
                    last.val_ppl.map_or("-".into(), |p| format!("{p:.3}")),
                    report.test_ppl.map_or("-".into(), |p| format!("{p:.3}")),
                    last.reg_value,
                    exp.checkpoint_path(lambda).display()
                );
            }
        }
        Command::Generate(args) => {
            let exp = experiment(&args)?;
            for lambda in lambdas(&args, &exp) {
                let stream = exp.generate(lambda)?;
                println!("lambda {lambda}: {} tokens -> {}", stream.len(), exp.text_path(lambda).display());
            }
        }
        Command::Evaluate(args) => {
            let exp = experiment(&args)?;
            for record in exp.evaluate(&lambdas(&args, &exp))? {
                for s in &record.summaries {
                    println!(
                        "lambda {}: {}: mu {:.4} sigma {:.4} beta {:.4}",
                        record.lambda,
                        s.scheme,
                        s.mu,
                        s.sigma,
                        s.beta.unwrap_or(f64::NAN)
                    );
                }
            }
            if args.lambda.is_none() {
                exp.report()?;
                println!("report -> {}", exp.out(&format!("report_seed{}.json", exp.config.seed)).display());
            }
        }
        Command::Report(args) => {
            let exp = experiment(&args)?;
            print!("{}", exp.report()?.to_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
