//! Runs a simulated study and prints the numbers the generator is tuned against.
//!
//! Usage: `cargo run --release --example calibrate -- [key=value ...]`
//! with keys `subjects`, `trials`, `test`, `seed`, `p300`, `n700_1`, `n700_3`,
//! `white`, `pink`, `gain_sd`.

use std::time::Instant;

use speller_lab::experiment::{simulate_experiment, ExperimentConfig};
use speller_lab::synth::{calibration, Component};
use speller_lab::{Condition, Region};

fn main() {
    let mut cfg = ExperimentConfig::default();
    let mut n700 = calibration::N700_MAGNITUDE;
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').expect("key=value");
        let f: f64 = v.parse().expect("number");
        match k {
            "subjects" => cfg.n_subjects = f as usize,
            "trials" => cfg.trials_per_phase = f as usize,
            "test" => cfg.testing_trials = Some(f as usize),
            "seed" => cfg.master_seed = f as u64,
            "p300" => cfg.profile.p300_amplitude = Some(f),
            "n700_1" => n700[0] = f,
            "n700_3" => n700[1] = f,
            "white" => cfg.profile.white_sigma = Some(f),
            "pink" => cfg.profile.pink_sigma = Some(f),
            "gain_sd" => cfg.profile.gain_log_sd = Some(f),
            _ => panic!("unknown key {k}"),
        }
    }
    cfg.profile.n700_magnitude = Some(n700);

    let start = Instant::now();
    let res = simulate_experiment(&cfg).expect("simulation");
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());

    for c in Condition::ALL {
        let aucs: Vec<f64> = res.runs.iter().filter(|r| r.condition == c).map(|r| r.auc).collect();
        let lam: Vec<f64> = res.runs.iter().filter(|r| r.condition == c).map(|r| r.model.lambda).collect();
        println!(
            "condition {} auc {:.3} lambda {:.3}",
            c.id(),
            aucs.iter().sum::<f64>() / aucs.len() as f64,
            lam.iter().sum::<f64>() / lam.len() as f64
        );
    }
    println!("condition,sequence,mean,sd");
    for cell in res.accuracy() {
        println!("{},{},{:.1},{:.1}", cell.condition.id(), cell.sequences, cell.mean, cell.sd);
    }
    for comp in [Component::P300, Component::N700] {
        for region in Region::ALL {
            let means: Vec<String> = Condition::ALL
                .iter()
                .map(|&c| {
                    let v: Vec<f64> = res
                        .runs
                        .iter()
                        .filter(|r| r.condition == c)
                        .map(|r| r.l2.region_mean(comp, region))
                        .collect();
                    format!("{:.3}", v.iter().sum::<f64>() / v.len() as f64)
                })
                .collect();
            println!("l2 {} {} {}", comp.as_str(), region.as_str(), means.join(" "));
        }
    }
}
