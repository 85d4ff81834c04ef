use std::time::Instant;

use speller_lab::experiment::{simulate_trial, TrialSeeds};
use speller_lab::paradigm::generate_schedule;
use speller_lab::synth::{default_profile, render_stream, TrialSpec};
use speller_lab::{Condition, TimingConfig};

fn main() {
    let cfg = TimingConfig::default();
    let p = default_profile(1);
    let n = 200;
    let t = Instant::now();
    for i in 0..n {
        generate_schedule(i, &cfg).unwrap();
    }
    println!("schedule {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / n as f64);
    let s = generate_schedule(1, &cfg).unwrap();
    let t = Instant::now();
    for i in 0..n {
        render_stream(&TrialSpec { schedule: &s, condition: Condition::ErpOnly, true_target: 3, noise_seed: i }, &p, &cfg);
    }
    println!("render {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / n as f64);
    let t = Instant::now();
    for i in 0..n {
        simulate_trial(i, Condition::ErpOnly, TrialSeeds::derive(i, 36), &p, &cfg).unwrap();
    }
    println!("trial {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / n as f64);
}
