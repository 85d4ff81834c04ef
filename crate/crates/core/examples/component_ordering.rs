//! Repeats the component-distance analysis over many simulated studies and
//! reports how often the across-condition tests come out significant.
//!
//! Usage: `cargo run --release --example component_ordering -- [experiments]`

use std::time::Instant;

use rayon::prelude::*;
use speller_lab::analysis::kruskal_wallis;
use speller_lab::experiment::{simulate_component_l2, ExperimentConfig};
use speller_lab::synth::Component;
use speller_lab::{Condition, Region};

fn main() {
    let n: u64 = std::env::args().nth(1).map_or(20, |s| s.parse().expect("count"));
    let start = Instant::now();
    let stats: Vec<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|e| {
            let cfg = ExperimentConfig {
                master_seed: 1000 + e,
                ..ExperimentConfig::default()
            };
            let l2: Vec<Vec<_>> = Condition::ALL
                .iter()
                .map(|&c| (0..cfg.n_subjects).map(|s| simulate_component_l2(&cfg, s, c).unwrap()).collect())
                .collect();
            let mut out = Vec::new();
            for (comp, region) in [
                (Component::N700, Region::Frontal),
                (Component::P300, Region::Frontal),
                (Component::P300, Region::Central),
                (Component::P300, Region::Parietal),
            ] {
                let groups: Vec<Vec<f64>> = l2
                    .iter()
                    .map(|g| g.iter().map(|x| x.region_mean(comp, region)).collect())
                    .collect();
                let refs: Vec<&[f64]> = groups.iter().map(|g| g.as_slice()).collect();
                let means: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
                let ordered = means[2] > means[1] && means[1] > means[0];
                out.push((kruskal_wallis(&refs).unwrap().p_value, ordered as u8 as f64));
            }
            out
        })
        .collect();
    println!("elapsed {:.1} s for {n} experiments", start.elapsed().as_secs_f64());
    for (i, name) in ["n700 frontal", "p300 frontal", "p300 central", "p300 parietal"].iter().enumerate() {
        let sig = stats.iter().filter(|s| s[i].0 < 0.05).count();
        let ord = stats.iter().filter(|s| s[i].1 > 0.5).count();
        println!("{name}: p<0.05 in {sig}/{n}, strictly ordered in {ord}/{n}");
    }
}
