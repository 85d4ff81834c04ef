//! `speller-lab` command-line runner.
//!
//! Exit status: 0 on success, 1 for invalid input, 2 for runtime failures.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use speller_lab::decoder::{selections_by_sequence, ModelDocument};
use speller_lab::experiment::{
    analyze_dir, simulate_experiment, simulate_subject_condition, simulate_trial, trial_seed, ExperimentConfig,
    Phase, TrialSeeds,
};
use speller_lab::paradigm::{generate_schedule, timeline, write_schedules};
use speller_lab::pipeline::{featurize, trial_epochs, write_features_csv};
use speller_lab::seed::derive_seed;
use speller_lab::smarthome::{run_closed_loop, write_decode_log, HomeState, Manifest};
use speller_lab::synth::{render_stream, TrialSpec};
use speller_lab::{Condition, Montage};

#[derive(Parser)]
#[command(name = "speller-lab", version, about = "Simulated ERP speller experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write randomized flash schedules
    Schedule(ScheduleArgs),
    /// Render one simulated trial to CSV
    Synth(SynthArgs),
    /// Train a discriminant on a simulated training phase
    Train(TrainArgs),
    /// Decode a simulated testing phase with a saved model
    Evaluate(EvaluateArgs),
    /// Run a full simulated study and write every table
    Run(RunArgs),
    /// Recompute summary and statistics tables from a finished run
    Analyze(AnalyzeArgs),
    /// Drive the smart home through a list of intended selections
    HomeSim(HomeSimArgs),
}

/// Options shared by the commands that simulate data.
#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON); flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (default: config value, else 0)
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of trials
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    subject: usize,
    #[arg(long, value_parser = parse_condition, default_value = "1")]
    condition: Condition,
    /// Trial index within the testing phase
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Stream CSV output
    #[arg(long)]
    out: PathBuf,
    /// Also write the flash schedule
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    /// Also write the feature matrix
    #[arg(long)]
    features_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    subject: usize,
    #[arg(long, value_parser = parse_condition, default_value = "1")]
    condition: Condition,
    /// Training-phase trials (default: config)
    #[arg(long)]
    trials: Option<usize>,
    /// Fixed shrinkage in [0, 1]
    #[arg(long)]
    lambda: Option<f64>,
    /// Model JSON output
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0)]
    subject: usize,
    #[arg(long, value_parser = parse_condition, default_value = "1")]
    condition: Condition,
    /// Testing-phase trials (default: config)
    #[arg(long)]
    trials: Option<usize>,
    /// Accuracy CSV output (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    subjects: Option<usize>,
    /// Trials per phase
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated condition ids, e.g. 1,3
    #[arg(long, value_delimiter = ',', value_parser = parse_condition)]
    conditions: Option<Vec<Condition>>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory written by `run`
    #[arg(long)]
    input: PathBuf,
    /// Where to write the tables (default: the input directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HomeSimArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated object ids the user attends to
    #[arg(long, value_delimiter = ',', required = true)]
    intents: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    subject: usize,
    #[arg(long, value_parser = parse_condition, default_value = "3")]
    condition: Condition,
    /// Saved model; trained on the simulated training phase when absent
    #[arg(long)]
    model: Option<PathBuf>,
    /// Device manifest JSON (default: bundled four-room home)
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Render without noise
    #[arg(long)]
    noise_free: bool,
    /// Decode log CSV (stdout when absent)
    #[arg(long)]
    log: Option<PathBuf>,
    /// Final home state as JSON
    #[arg(long)]
    state_out: Option<PathBuf>,
}

/// Input that is well-formed for clap but rejected by the command.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn parse_condition(s: &str) -> Result<Condition, String> {
    let id: u8 = s.trim().parse().map_err(|_| format!("`{s}` is not a condition id"))?;
    Condition::from_id(id).map_err(|e| e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn report_seed(cfg: &ExperimentConfig) {
    eprintln!("seed: {}", cfg.master_seed);
}

fn cmd_schedule(a: ScheduleArgs) -> Result<()> {
    let cfg = speller_lab::TimingConfig::default();
    let schedules = (0..a.trials)
        .map(|t| generate_schedule(derive_seed(a.seed, &[t]), &cfg).map(|s| (t, s)))
        .collect::<speller_lab::Result<Vec<_>>>()?;
    let refs: Vec<_> = schedules.iter().map(|(t, s)| (*t, s)).collect();
    let mut out = output(a.out.as_deref())?;
    write_schedules(&mut out, &refs)?;
    out.flush()?;
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let cfg = a.common.load()?;
    cfg.validate()?;
    report_seed(&cfg);
    let t = &cfg.timing;
    let seeds = TrialSeeds::derive(
        trial_seed(cfg.master_seed, a.subject, a.condition, Phase::Testing, a.trial),
        t.n_objects,
    );
    let profile = cfg.subject_profile(a.subject);
    let schedule = generate_schedule(seeds.schedule, t)?;
    let spec = TrialSpec {
        schedule: &schedule,
        condition: a.condition,
        true_target: seeds.target,
        noise_seed: seeds.noise,
    };
    let stream = render_stream(&spec, &profile, t);
    let mut out = create(&a.out)?;
    stream.write_csv(&mut out, &Montage::standard())?;
    out.flush()?;
    if let Some(p) = &a.schedule_out {
        let mut w = create(p)?;
        write_schedules(&mut w, &[(a.trial as u64, &schedule)])?;
        w.flush()?;
    }
    if let Some(p) = &a.features_out {
        let epochs = trial_epochs(&stream, &timeline(&schedule, t), a.trial as u64, a.condition, seeds.target, t)?;
        let mut w = create(p)?;
        write_features_csv(&mut w, &featurize(&epochs, t)?)?;
        w.flush()?;
    }
    eprintln!("target: {}", seeds.target);
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut cfg = a.common.load()?;
    if let Some(n) = a.trials {
        cfg.trials_per_phase = n;
    }
    if a.lambda.is_some() {
        cfg.lambda = a.lambda;
    }
    // the testing phase is not needed
    cfg.testing_trials = Some(1);
    cfg.validate()?;
    report_seed(&cfg);
    let res = simulate_subject_condition(&cfg, a.subject, a.condition)?;
    let doc = ModelDocument::new(&res.model, &cfg.timing)?;
    let mut w = create(&a.out)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    eprintln!("lambda: {}", res.model.lambda);
    Ok(())
}

fn load_model(path: &Path, cfg: &ExperimentConfig) -> Result<speller_lab::decoder::RldaModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ModelDocument = serde_json::from_str(&text).map_err(speller_lab::Error::from)?;
    Ok(doc.into_model(&cfg.timing)?)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let mut cfg = a.common.load()?;
    if let Some(n) = a.trials {
        cfg.testing_trials = Some(n);
    }
    cfg.validate()?;
    report_seed(&cfg);
    let model = load_model(&a.model, &cfg)?;
    let t = &cfg.timing;
    let profile = cfg.subject_profile(a.subject);
    let n = cfg.phase_trials(Phase::Testing);
    let mut hits = vec![0usize; t.sequences_per_trial];
    for i in 0..n {
        let seeds = TrialSeeds::derive(trial_seed(cfg.master_seed, a.subject, a.condition, Phase::Testing, i), t.n_objects);
        let trial = simulate_trial(i as u64, a.condition, seeds, &profile, t)?;
        for (k, s) in selections_by_sequence(&model, &trial.features, t)?.into_iter().enumerate() {
            hits[k] += (s == seeds.target) as usize;
        }
    }
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "sequence,accuracy,n_trials")?;
    for (k, h) in hits.iter().enumerate() {
        writeln!(out, "{},{},{n}", k + 1, 100.0 * *h as f64 / n as f64)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut cfg = a.common.load()?;
    if let Some(n) = a.subjects {
        cfg.n_subjects = n;
    }
    if let Some(n) = a.trials {
        cfg.trials_per_phase = n;
    }
    if let Some(c) = a.conditions {
        cfg.conditions = c;
    }
    if let Some(o) = a.out {
        cfg.output_dir = o;
    }
    cfg.validate()?;
    report_seed(&cfg);
    let res = simulate_experiment(&cfg)?;
    let written = res.write_outputs(&cfg.output_dir)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<()> {
    let out = a.out.unwrap_or_else(|| a.input.clone());
    for p in analyze_dir(&a.input, &out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_home_sim(a: HomeSimArgs) -> Result<()> {
    let cfg = a.common.load()?;
    cfg.validate()?;
    report_seed(&cfg);
    let manifest = match &a.manifest {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Manifest::from_json(&text)?
        }
        None => Manifest::default_home(),
    };
    if let Some(&bad) = a.intents.iter().find(|&&i| i >= cfg.timing.n_objects) {
        bail!(Invalid(format!("intent {bad} is not an object id (0..{})", cfg.timing.n_objects - 1)));
    }
    let model = match &a.model {
        Some(p) => load_model(p, &cfg)?,
        None => {
            let train_cfg = ExperimentConfig {
                testing_trials: Some(1),
                ..cfg.clone()
            };
            simulate_subject_condition(&train_cfg, a.subject, a.condition)?.model
        }
    };
    let mut profile = cfg.subject_profile(a.subject);
    if a.noise_free {
        profile = profile.noise_free();
    }
    let home = HomeState::new(&manifest);
    let loop_seed = derive_seed(cfg.master_seed, &[a.subject as u64, a.condition.id() as u64, 3]);
    let (state, log) = run_closed_loop(&home, &a.intents, &model, &profile, a.condition, &cfg.timing, loop_seed)?;
    let mut out = output(a.log.as_deref())?;
    write_decode_log(&mut out, &log)?;
    out.flush()?;
    if let Some(p) = &a.state_out {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &state)?;
        writeln!(w)?;
        w.flush()?;
    }
    let correct = log.iter().filter(|s| s.correct).count();
    eprintln!("correct: {correct}/{}", log.len());
    Ok(())
}

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<Invalid>().is_some()
            || e.downcast_ref::<speller_lab::Error>().is_some_and(|e| e.is_validation())
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Schedule(a) => cmd_schedule(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Run(a) => cmd_run(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::HomeSim(a) => cmd_home_sim(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_validation(&e) { 1 } else { 2 })
        }
    }
}

