//! Simulated two-phase experiments: seeding, per-subject runs and outputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    accuracy_table, bonferroni, kruskal_wallis, roc_auc, subject_accuracies, wilcoxon_rank_sum,
    AccuracyCell, ComponentWindow, ErpAverager, SelectionOutcome, ALPHA,
};
use crate::decoder::{selections_by_sequence, train_on, ModelDocument, RldaModel};
use crate::error::{Error, Result};
use crate::montage::{Montage, Region, N_CHANNELS};
use crate::paradigm::{generate_schedule, timeline, FlashSchedule};
use crate::pipeline::{baseline_correct_in_place, extract_features, trial_epochs, FeatureVector};
use crate::seed::derive_seed;
use crate::synth::{calibration, default_profile, n700_ladder, render_stream, Component, ErpTemplate, SubjectProfile, TrialSpec};
use crate::timing::TimingConfig;
use crate::trial::{Condition, Epoch, ObjectId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Training,
    Testing,
}

impl Phase {
    fn tag(self) -> u64 {
        match self {
            Phase::Training => 1,
            Phase::Testing => 2,
        }
    }
}

/// Seeds for one simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub schedule: u64,
    pub target: ObjectId,
    pub noise: u64,
}

impl TrialSeeds {
    pub fn derive(base: u64, n_objects: usize) -> Self {
        Self {
            schedule: derive_seed(base, &[0]),
            target: (derive_seed(base, &[1]) % n_objects as u64) as ObjectId,
            noise: derive_seed(base, &[2]),
        }
    }
}

/// Seed of trial `trial` of `phase` for `(subject, condition)`.
///
/// Every index enters the derivation, so adding subjects, conditions or
/// trials never changes the data of existing ones.
pub fn trial_seed(master: u64, subject: usize, condition: Condition, phase: Phase, trial: usize) -> u64 {
    derive_seed(master, &[subject as u64, condition.id() as u64, phase.tag(), trial as u64])
}

pub fn subject_seed(master: u64, subject: usize) -> u64 {
    derive_seed(master, &[subject as u64])
}

/// One rendered and epoched trial.
#[derive(Debug, Clone)]
pub struct SimulatedTrial {
    pub schedule: FlashSchedule,
    pub target: ObjectId,
    /// Baseline-corrected epochs in presentation order.
    pub epochs: Vec<Epoch>,
    pub features: Vec<FeatureVector>,
}

/// Schedules, renders, epochs and featurizes one trial.
pub fn simulate_trial(
    trial_id: u64,
    condition: Condition,
    seeds: TrialSeeds,
    profile: &SubjectProfile,
    cfg: &TimingConfig,
) -> Result<SimulatedTrial> {
    let schedule = generate_schedule(seeds.schedule, cfg)?;
    let spec = TrialSpec {
        schedule: &schedule,
        condition,
        true_target: seeds.target,
        noise_seed: seeds.noise,
    };
    let stream = render_stream(&spec, profile, cfg);
    let tl = timeline(&schedule, cfg);
    let mut epochs = trial_epochs(&stream, &tl, trial_id, condition, seeds.target, cfg)?;
    epochs.iter_mut().for_each(|e| baseline_correct_in_place(e, cfg));
    let features = epochs
        .iter()
        .map(|e| extract_features(e, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulatedTrial {
        schedule,
        target: seeds.target,
        epochs,
        features,
    })
}

/// Optional replacements for the calibrated generator parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileOverrides {
    pub p300_amplitude: Option<f64>,
    /// N700 magnitudes of conditions 1 and 3; condition 2 lies midway.
    pub n700_magnitude: Option<[f64; 2]>,
    pub white_sigma: Option<f64>,
    pub pink_sigma: Option<f64>,
    pub gain_log_sd: Option<f64>,
}

impl ProfileOverrides {
    pub fn noise_free() -> Self {
        Self {
            white_sigma: Some(0.0),
            pink_sigma: Some(0.0),
            ..Self::default()
        }
    }

    pub fn templates_off() -> Self {
        Self {
            p300_amplitude: Some(0.0),
            n700_magnitude: Some([0.0, 0.0]),
            ..Self::default()
        }
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    out.push(format!("profile.{name} must be a finite non-negative number"));
                }
            }
        };
        check("p300_amplitude", self.p300_amplitude);
        check("white_sigma", self.white_sigma);
        check("pink_sigma", self.pink_sigma);
        check("gain_log_sd", self.gain_log_sd);
        if let Some([a, b]) = self.n700_magnitude {
            check("n700_magnitude", Some(a));
            check("n700_magnitude", Some(b));
        }
        out
    }

    /// The calibrated profile of subject seed `seed` with overrides applied.
    pub fn profile(&self, seed: u64) -> SubjectProfile {
        let mut p = default_profile(seed);
        if let Some(sd) = self.gain_log_sd {
            // same standard normal draw, different spread
            let z = p.global_gain.ln() / calibration::GAIN_LOG_SD;
            p.global_gain = (sd * z).exp();
        }
        if let Some(a) = self.p300_amplitude {
            p.p300 = ErpTemplate::p300(a);
        }
        if let Some([c1, c3]) = self.n700_magnitude {
            p.n700 = ErpTemplate::n700(n700_ladder(c1, c3));
        }
        if let Some(s) = self.white_sigma {
            p.noise.white_sigma = s;
        }
        if let Some(s) = self.pink_sigma {
            p.noise.pink_sigma = s;
        }
        p
    }
}

fn default_conditions() -> Vec<Condition> {
    Condition::ALL.to_vec()
}

/// A complete simulated study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_subjects: usize,
    /// Trials in each of the training and testing phases.
    pub trials_per_phase: usize,
    /// Testing-phase size when it differs from `trials_per_phase`.
    pub testing_trials: Option<usize>,
    #[serde(default = "default_conditions")]
    pub conditions: Vec<Condition>,
    pub timing: TimingConfig,
    pub profile: ProfileOverrides,
    /// Fixed shrinkage; the analytic estimate is used when absent.
    pub lambda: Option<f64>,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_subjects: 8,
            trials_per_phase: 20,
            testing_trials: None,
            conditions: default_conditions(),
            timing: TimingConfig::default(),
            profile: ProfileOverrides::default(),
            lambda: None,
            master_seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks every field, reporting all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_subjects == 0 {
            problems.push("n_subjects must be at least 1".to_string());
        }
        if self.trials_per_phase == 0 {
            problems.push("trials_per_phase must be at least 1".to_string());
        }
        if self.testing_trials == Some(0) {
            problems.push("testing_trials must be at least 1 when given".to_string());
        }
        if self.conditions.is_empty() {
            problems.push("conditions must not be empty".to_string());
        }
        let mut seen = self.conditions.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.conditions.len() {
            problems.push("conditions must not repeat".to_string());
        }
        if let Err(e) = self.timing.validate() {
            problems.push(format!("timing: {e}"));
        }
        if let Some(l) = self.lambda {
            if !(0.0..=1.0).contains(&l) {
                problems.push(format!("lambda must lie in [0, 1], got {l}"));
            }
        }
        problems.extend(self.profile.problems());
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub fn phase_trials(&self, phase: Phase) -> usize {
        match phase {
            Phase::Training => self.trials_per_phase,
            Phase::Testing => self.testing_trials.unwrap_or(self.trials_per_phase),
        }
    }

    pub fn subject_profile(&self, subject: usize) -> SubjectProfile {
        self.profile.profile(subject_seed(self.master_seed, subject))
    }
}

/// Per-channel L2 distances of one subject and condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentL2 {
    pub p300: Vec<f64>,
    pub n700: Vec<f64>,
}

impl ComponentL2 {
    pub fn get(&self, c: Component) -> &[f64] {
        match c {
            Component::P300 => &self.p300,
            Component::N700 => &self.n700,
        }
    }

    /// Mean over the channels of a scalp region.
    pub fn region_mean(&self, c: Component, region: Region) -> f64 {
        let chans = Montage::standard().channels_in(region);
        chans.iter().map(|&ch| self.get(c)[ch]).sum::<f64>() / chans.len() as f64
    }

    pub fn from_averager(avg: &ErpAverager, cfg: &TimingConfig) -> Result<Self> {
        let per = |w: &ComponentWindow| {
            (0..N_CHANNELS)
                .map(|c| avg.component_l2(c, w, cfg))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            p300: per(&ComponentWindow::P300)?,
            n700: per(&ComponentWindow::N700)?,
        })
    }
}

/// Decision of one testing-phase trial after each sequence count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDecisions {
    pub trial: usize,
    pub target: ObjectId,
    pub selected: Vec<ObjectId>,
}

#[derive(Debug, Clone)]
pub struct SubjectConditionResult {
    pub subject: usize,
    pub condition: Condition,
    pub model: RldaModel,
    pub decisions: Vec<TrialDecisions>,
    /// Single-epoch AUC of testing-phase scores.
    pub auc: f64,
    /// Component distances over both phases.
    pub l2: ComponentL2,
}

impl SubjectConditionResult {
    pub fn outcomes(&self) -> impl Iterator<Item = SelectionOutcome> + '_ {
        self.decisions.iter().flat_map(move |d| {
            d.selected.iter().enumerate().map(move |(k, &s)| SelectionOutcome {
                subject: self.subject,
                condition: self.condition,
                sequences: k + 1,
                correct: s == d.target,
            })
        })
    }
}

/// Component distances of one subject and condition over both phases.
///
/// Renders the same trials as [`simulate_subject_condition`] but skips
/// featurization and decoding.
pub fn simulate_component_l2(cfg: &ExperimentConfig, subject: usize, condition: Condition) -> Result<ComponentL2> {
    let t = &cfg.timing;
    let profile = cfg.subject_profile(subject);
    let mut avg = ErpAverager::new(N_CHANNELS, t.epoch_len());
    for phase in [Phase::Training, Phase::Testing] {
        for i in 0..cfg.phase_trials(phase) {
            let seeds = TrialSeeds::derive(trial_seed(cfg.master_seed, subject, condition, phase, i), t.n_objects);
            let schedule = generate_schedule(seeds.schedule, t)?;
            let spec = TrialSpec {
                schedule: &schedule,
                condition,
                true_target: seeds.target,
                noise_seed: seeds.noise,
            };
            let stream = render_stream(&spec, &profile, t);
            for mut e in trial_epochs(&stream, &timeline(&schedule, t), i as u64, condition, seeds.target, t)? {
                baseline_correct_in_place(&mut e, t);
                avg.add(&e);
            }
        }
    }
    ComponentL2::from_averager(&avg, t)
}

/// Trains on the training phase and decodes the testing phase.
pub fn simulate_subject_condition(
    cfg: &ExperimentConfig,
    subject: usize,
    condition: Condition,
) -> Result<SubjectConditionResult> {
    let t = &cfg.timing;
    let profile = cfg.subject_profile(subject);
    let mut avg = ErpAverager::new(N_CHANNELS, t.epoch_len());
    let mut run_phase = |phase: Phase| -> Result<Vec<SimulatedTrial>> {
        (0..cfg.phase_trials(phase))
            .map(|i| {
                let seeds = TrialSeeds::derive(trial_seed(cfg.master_seed, subject, condition, phase, i), t.n_objects);
                let mut trial = simulate_trial(i as u64, condition, seeds, &profile, t)?;
                trial.epochs.iter().for_each(|e| avg.add(e));
                trial.epochs = Vec::new();
                Ok(trial)
            })
            .collect()
    };
    let training = run_phase(Phase::Training)?;
    let testing = run_phase(Phase::Testing)?;

    let train_features: Vec<FeatureVector> = training.into_iter().flat_map(|t| t.features).collect();
    let model = train_on(&train_features, cfg.lambda)?;

    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut decisions = Vec::with_capacity(testing.len());
    for (i, trial) in testing.iter().enumerate() {
        for f in &trial.features {
            scores.push(model.score(&f.values)?);
            labels.push(f.meta.is_target);
        }
        decisions.push(TrialDecisions {
            trial: i,
            target: trial.target,
            selected: selections_by_sequence(&model, &trial.features, t)?,
        });
    }
    Ok(SubjectConditionResult {
        subject,
        condition,
        model,
        decisions,
        auc: roc_auc(&scores, &labels),
        l2: ComponentL2::from_averager(&avg, t)?,
    })
}

/// Results of a full study, ordered by (subject, condition).
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub runs: Vec<SubjectConditionResult>,
}

pub fn simulate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, Condition)> = (0..cfg.n_subjects)
        .flat_map(|s| cfg.conditions.iter().map(move |&c| (s, c)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(s, c)| simulate_subject_condition(cfg, s, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        config: cfg.clone(),
        runs,
    })
}

impl ExperimentResult {
    pub fn outcomes(&self) -> Vec<SelectionOutcome> {
        self.runs.iter().flat_map(|r| r.outcomes()).collect()
    }

    pub fn accuracy(&self) -> Vec<AccuracyCell> {
        accuracy_table(&self.outcomes())
    }

    pub fn l2_rows(&self) -> Vec<L2Row> {
        let mut rows = Vec::new();
        for r in &self.runs {
            for comp in [Component::P300, Component::N700] {
                for (ch, &v) in r.l2.get(comp).iter().enumerate() {
                    rows.push(L2Row {
                        subject: r.subject,
                        condition: r.condition,
                        channel: ch,
                        component: comp,
                        l2: v,
                    });
                }
            }
        }
        rows
    }

    /// Writes every output table, the models and the effective config.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let t = &self.config.timing;
        fs::create_dir_all(dir.join("models")).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut emit = |name: &str, f: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| -> Result<()> {
            let path = dir.join(name);
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };

        let outcomes = self.outcomes();
        let cells = accuracy_table(&outcomes);
        let per_subject = subject_accuracies(&outcomes);
        emit("accuracy.csv", &|w| write_accuracy_csv(w, &cells))?;
        emit("subject_accuracy.csv", &|w| {
            writeln!(w, "subject,condition,sequence,accuracy")?;
            for ((c, k), subj) in &per_subject {
                for (s, acc) in subj {
                    writeln!(w, "{s},{},{k},{acc}", c.id())?;
                }
            }
            Ok(())
        })?;
        emit("selections.csv", &|w| {
            writeln!(w, "subject,condition,trial,target,sequence,selected,correct")?;
            for r in &self.runs {
                for d in &r.decisions {
                    for (k, s) in d.selected.iter().enumerate() {
                        writeln!(
                            w,
                            "{},{},{},{},{},{s},{}",
                            r.subject,
                            r.condition.id(),
                            d.trial,
                            d.target,
                            k + 1,
                            *s == d.target
                        )?;
                    }
                }
            }
            Ok(())
        })?;
        emit("models.csv", &|w| {
            writeln!(w, "subject,condition,lambda,nu,auc")?;
            for r in &self.runs {
                writeln!(w, "{},{},{},{},{}", r.subject, r.condition.id(), r.model.lambda, r.model.nu, r.auc)?;
            }
            Ok(())
        })?;
        let l2 = self.l2_rows();
        emit("peak_l2.csv", &|w| write_l2_csv(w, &l2))?;

        let tables = StatTables::compute(&per_subject, &l2)?;
        tables.write(&mut emit)?;

        for r in &self.runs {
            let doc = ModelDocument::new(&r.model, t)?;
            let name = format!("models/subject{}_condition{}.json", r.subject, r.condition.id());
            emit(&name, &|w| {
                serde_json::to_writer_pretty(&mut *w, &doc)?;
                writeln!(w)
            })?;
        }
        emit("config.json", &|w| {
            serde_json::to_writer_pretty(&mut *w, &self.config)?;
            writeln!(w)
        })?;
        Ok(written)
    }
}

/// Per-subject accuracy (percent) keyed by (condition, sequence count).
pub type SubjectAccuracies = BTreeMap<(Condition, usize), Vec<(usize, f64)>>;

/// One per-subject component distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Row {
    pub subject: usize,
    pub condition: Condition,
    pub channel: usize,
    pub component: Component,
    pub l2: f64,
}

pub fn write_accuracy_csv(w: &mut dyn Write, cells: &[AccuracyCell]) -> std::io::Result<()> {
    writeln!(w, "condition,sequence,mean,sd,n_subjects")?;
    for c in cells {
        writeln!(w, "{},{},{},{},{}", c.condition.id(), c.sequences, c.mean, c.sd, c.n_subjects)?;
    }
    Ok(())
}

pub fn write_l2_csv(w: &mut dyn Write, rows: &[L2Row]) -> std::io::Result<()> {
    let montage = Montage::standard();
    writeln!(w, "subject,condition,channel,label,region,component,l2")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.subject,
            r.condition.id(),
            r.channel,
            montage.label(r.channel),
            montage.region(r.channel).as_str(),
            r.component.as_str(),
            r.l2
        )?;
    }
    Ok(())
}

/// One row of a Kruskal-Wallis table across conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwRow {
    /// Sequence count or channel index, depending on the table.
    pub key: usize,
    pub chi_square: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub sequence: usize,
    pub a: Condition,
    pub b: Condition,
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Classification and component statistics across conditions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatTables {
    /// Accuracy by sequence count.
    pub classification: Vec<KwRow>,
    /// Bonferroni-corrected post-hoc comparisons per sequence count.
    pub pairwise: Vec<PairRow>,
    /// P300-window distances by channel.
    pub p300: Vec<KwRow>,
    /// N700-window distances by channel.
    pub n700: Vec<KwRow>,
}

impl StatTables {
    /// Empty tables when fewer than two conditions are present.
    pub fn compute(per: &SubjectAccuracies, l2: &[L2Row]) -> Result<Self> {
        let mut conditions: Vec<Condition> = per.keys().map(|k| k.0).collect();
        conditions.sort();
        conditions.dedup();
        if conditions.len() < 2 {
            return Ok(Self::default());
        }
        let mut out = Self::default();
        let max_k = per.keys().map(|k| k.1).max().unwrap_or(0);
        for k in 1..=max_k {
            let groups: Vec<Vec<f64>> = conditions
                .iter()
                .map(|&c| per.get(&(c, k)).map(|v| v.iter().map(|x| x.1).collect()).unwrap_or_default())
                .collect();
            if groups.iter().any(|g| g.is_empty()) {
                continue;
            }
            out.classification.push(kw_row(k, &groups)?);
            let pairs: Vec<(usize, usize)> = (0..conditions.len())
                .flat_map(|i| (i + 1..conditions.len()).map(move |j| (i, j)))
                .collect();
            let tests = pairs
                .iter()
                .map(|&(i, j)| wilcoxon_rank_sum(&groups[j], &groups[i]))
                .collect::<Result<Vec<_>>>()?;
            let p: Vec<f64> = tests.iter().map(|t| t.p_value).collect();
            for ((&(i, j), t), sig) in pairs.iter().zip(&tests).zip(bonferroni(&p, ALPHA)) {
                out.pairwise.push(PairRow {
                    sequence: k,
                    a: conditions[j],
                    b: conditions[i],
                    statistic: t.statistic,
                    p_value: t.p_value,
                    significant: sig,
                });
            }
        }
        for comp in [Component::P300, Component::N700] {
            let mut rows = Vec::new();
            for ch in 0..N_CHANNELS {
                let groups: Vec<Vec<f64>> = conditions
                    .iter()
                    .map(|&c| {
                        l2.iter()
                            .filter(|r| r.condition == c && r.channel == ch && r.component == comp)
                            .map(|r| r.l2)
                            .collect()
                    })
                    .collect();
                if groups.iter().any(|g| g.is_empty()) {
                    continue;
                }
                rows.push(kw_row(ch, &groups)?);
            }
            // channel-wise family: one Bonferroni correction over all channels
            let flags = bonferroni(&rows.iter().map(|r| r.p_value).collect::<Vec<_>>(), ALPHA);
            rows.iter_mut().zip(flags).for_each(|(r, f)| r.significant = f);
            match comp {
                Component::P300 => out.p300 = rows,
                Component::N700 => out.n700 = rows,
            }
        }
        Ok(out)
    }

    #[allow(clippy::type_complexity)]
    fn write(
        &self,
        emit: &mut dyn FnMut(&str, &dyn Fn(&mut dyn Write) -> std::io::Result<()>) -> Result<()>,
    ) -> Result<()> {
        emit("classification_stats.csv", &|w| {
            writeln!(w, "sequence,chi_square,p_value,significant")?;
            for r in &self.classification {
                writeln!(w, "{},{},{},{}", r.key, r.chi_square, r.p_value, r.significant)?;
            }
            Ok(())
        })?;
        emit("pairwise_stats.csv", &|w| {
            writeln!(w, "sequence,condition_a,condition_b,rank_sum,p_value,significant")?;
            for r in &self.pairwise {
                writeln!(w, "{},{},{},{},{},{}", r.sequence, r.a.id(), r.b.id(), r.statistic, r.p_value, r.significant)?;
            }
            Ok(())
        })?;
        let montage = Montage::standard();
        for (name, rows) in [("p300_stats.csv", &self.p300), ("n700_stats.csv", &self.n700)] {
            emit(name, &|w| {
                writeln!(w, "channel,label,chi_square,p_value,significant")?;
                for r in rows {
                    writeln!(w, "{},{},{},{},{}", r.key, montage.label(r.key), r.chi_square, r.p_value, r.significant)?;
                }
                Ok(())
            })?;
        }
        Ok(())
    }
}

fn kw_row(key: usize, groups: &[Vec<f64>]) -> Result<KwRow> {
    let refs: Vec<&[f64]> = groups.iter().map(|g| g.as_slice()).collect();
    let r = kruskal_wallis(&refs)?;
    Ok(KwRow {
        key,
        chi_square: r.statistic,
        p_value: r.p_value,
        significant: r.p_value < ALPHA,
    })
}

#[derive(Deserialize)]
struct SubjectAccuracyRecord {
    subject: usize,
    condition: u8,
    sequence: usize,
    accuracy: f64,
}

#[derive(Deserialize)]
struct L2Record {
    subject: usize,
    condition: u8,
    channel: usize,
    component: Component,
    l2: f64,
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        let rec: T = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: format!("{}: {e}", path.display()),
        })?;
        out.push((out.len() + 2, rec));
    }
    Ok(out)
}

fn condition_field(line: usize, id: u8) -> Result<Condition> {
    Condition::from_id(id).map_err(|_| Error::Parse {
        line,
        message: format!("unknown condition {id}"),
    })
}

/// Reads `subject_accuracy.csv` as written by [`ExperimentResult::write_outputs`].
pub fn read_subject_accuracy(path: &Path) -> Result<SubjectAccuracies> {
    let mut out = SubjectAccuracies::new();
    for (line, r) in read_records::<SubjectAccuracyRecord>(path)? {
        let cond = condition_field(line, r.condition)?;
        out.entry((cond, r.sequence)).or_default().push((r.subject, r.accuracy));
    }
    Ok(out)
}

/// Reads `peak_l2.csv` as written by [`ExperimentResult::write_outputs`].
pub fn read_l2(path: &Path) -> Result<Vec<L2Row>> {
    read_records::<L2Record>(path)?
        .into_iter()
        .map(|(line, r)| {
            if r.channel >= N_CHANNELS {
                return Err(Error::Parse {
                    line,
                    message: format!("channel {} out of range", r.channel),
                });
            }
            Ok(L2Row {
                subject: r.subject,
                condition: condition_field(line, r.condition)?,
                channel: r.channel,
                component: r.component,
                l2: r.l2,
            })
        })
        .collect()
}

/// Recomputes the accuracy summary and statistics tables of a finished run.
pub fn analyze_dir(dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let per = read_subject_accuracy(&dir.join("subject_accuracy.csv"))?;
    let l2 = read_l2(&dir.join("peak_l2.csv"))?;
    let cells: Vec<AccuracyCell> = per
        .iter()
        .map(|(&(condition, sequences), subj)| {
            let v: Vec<f64> = subj.iter().map(|s| s.1).collect();
            let (mean, sd) = crate::analysis::mean_sd(&v);
            AccuracyCell {
                condition,
                sequences,
                mean,
                sd,
                n_subjects: v.len(),
            }
        })
        .collect();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| -> Result<()> {
        let path = out_dir.join(name);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    emit("accuracy.csv", &|w| write_accuracy_csv(w, &cells))?;
    StatTables::compute(&per, &l2)?.write(&mut emit)?;
    Ok(written)
}
