//! Randomised flash-group schedules and their stimulus timeline.
//!
//! A sequence is built from two random partitions of the objects into
//! flash groups, interleaved, then repaired by random swaps until
//!
//! * consecutive flashes (also across sequence boundaries) are disjoint,
//! * no pair of objects is flashed together twice within one sequence.
//!
//! The second rule makes every object's flash pattern within a sequence
//! unique, so noise-free evidence can single out the target after one
//! sequence.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::seed::rng_from;
use crate::timing::TimingConfig;
use crate::trial::ObjectId;

/// Retries per sequence before giving up.
pub const MAX_RETRIES: usize = 1000;
/// Swap attempts per retry.
const REPAIR_STEPS: usize = 4000;

/// Ordered flash groups for one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlashSchedule {
    pub flashes: Vec<Vec<ObjectId>>,
    pub flashes_per_sequence: usize,
    /// Seed the schedule was generated from; `None` when parsed from text.
    pub seed: Option<u64>,
}

impl FlashSchedule {
    pub fn len(&self) -> usize {
        self.flashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flashes.is_empty()
    }

    pub fn sequences(&self) -> std::slice::Chunks<'_, Vec<ObjectId>> {
        self.flashes.chunks(self.flashes_per_sequence)
    }

    /// (sequence, flash-within-sequence) for a global flash index.
    pub fn position(&self, flash: usize) -> (usize, usize) {
        (
            flash / self.flashes_per_sequence,
            flash % self.flashes_per_sequence,
        )
    }

    /// Checks coverage, group size and non-adjacency against `cfg`.
    pub fn validate(&self, cfg: &TimingConfig) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidSchedule(m));
        if self.flashes_per_sequence != cfg.flashes_per_sequence {
            return fail("flashes per sequence disagrees with timing config".into());
        }
        if self.flashes.len() != cfg.flashes_per_trial() {
            return fail(format!(
                "{} flashes, expected {}",
                self.flashes.len(),
                cfg.flashes_per_trial()
            ));
        }
        let mut prev: u128 = 0;
        for (i, group) in self.flashes.iter().enumerate() {
            if group.len() != cfg.objects_per_flash {
                return fail(format!("flash {i} has {} objects", group.len()));
            }
            let mut mask = 0u128;
            for &o in group {
                if o >= cfg.n_objects {
                    return fail(format!("flash {i} contains object {o} out of range"));
                }
                if mask & bit(o) != 0 {
                    return fail(format!("flash {i} repeats object {o}"));
                }
                mask |= bit(o);
            }
            if mask & prev != 0 {
                return fail(format!(
                    "object {} flashes in consecutive flashes {} and {i}",
                    (mask & prev).trailing_zeros(),
                    i - 1
                ));
            }
            prev = mask;
        }
        for (s, seq) in self.sequences().enumerate() {
            let mut counts = vec![0usize; cfg.n_objects];
            for &o in seq.iter().flatten() {
                counts[o] += 1;
            }
            if let Some(o) = counts.iter().position(|&c| c != 2) {
                return fail(format!(
                    "object {o} flashes {} times in sequence {s}",
                    counts[o]
                ));
            }
        }
        Ok(())
    }
}

fn bit(o: ObjectId) -> u128 {
    1u128 << o
}

fn pairs(c: u32) -> u32 {
    c * c.saturating_sub(1) / 2
}

/// Constraint violations of one sequence given the previous flash.
fn violations(masks: &[u128], prev: u128) -> u32 {
    let mut v = (prev & masks[0]).count_ones();
    for i in 0..masks.len() {
        if i + 1 < masks.len() {
            v += (masks[i] & masks[i + 1]).count_ones();
        }
        for j in i + 1..masks.len() {
            v += pairs((masks[i] & masks[j]).count_ones());
        }
    }
    v
}

/// (flash, object) slots involved in at least one violation.
fn offending(masks: &[u128], prev: u128) -> Vec<(usize, ObjectId)> {
    let mut out = Vec::new();
    let mut push = |f: usize, m: u128| {
        let mut m = m;
        while m != 0 {
            let o = m.trailing_zeros() as usize;
            out.push((f, o));
            m &= m - 1;
        }
    };
    push(0, prev & masks[0]);
    for i in 0..masks.len() {
        if i + 1 < masks.len() {
            let shared = masks[i] & masks[i + 1];
            push(i, shared);
            push(i + 1, shared);
        }
        for j in i + 1..masks.len() {
            let shared = masks[i] & masks[j];
            if shared.count_ones() > 1 {
                push(i, shared);
                push(j, shared);
            }
        }
    }
    out
}

fn random_partition<R: Rng>(rng: &mut R, cfg: &TimingConfig) -> Vec<u128> {
    let mut ids: Vec<ObjectId> = (0..cfg.n_objects).collect();
    ids.shuffle(rng);
    ids.chunks(cfg.objects_per_flash)
        .map(|g| g.iter().fold(0u128, |m, &o| m | bit(o)))
        .collect()
}

fn members(mask: u128) -> Vec<ObjectId> {
    let mut m = mask;
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

fn try_sequence<R: Rng>(rng: &mut R, prev: u128, cfg: &TimingConfig) -> Option<Vec<u128>> {
    let a = random_partition(rng, cfg);
    let b = random_partition(rng, cfg);
    let mut masks: Vec<u128> = a.into_iter().zip(b).flat_map(|(x, y)| [x, y]).collect();
    let mut cost = violations(&masks, prev);
    for _ in 0..REPAIR_STEPS {
        if cost == 0 {
            return Some(masks);
        }
        let bad = offending(&masks, prev);
        let (f, o) = bad[rng.random_range(0..bad.len())];
        let g = rng.random_range(0..masks.len());
        if g == f || masks[g] & bit(o) != 0 {
            continue;
        }
        let candidates = members(masks[g] & !masks[f]);
        if candidates.is_empty() {
            continue;
        }
        let p = candidates[rng.random_range(0..candidates.len())];
        let (old_f, old_g) = (masks[f], masks[g]);
        masks[f] = (old_f & !bit(o)) | bit(p);
        masks[g] = (old_g & !bit(p)) | bit(o);
        let next = violations(&masks, prev);
        if next <= cost {
            cost = next;
        } else {
            masks[f] = old_f;
            masks[g] = old_g;
        }
    }
    (cost == 0).then_some(masks)
}

/// Generates a valid schedule for one trial; deterministic in `seed`.
pub fn generate_schedule(seed: u64, cfg: &TimingConfig) -> Result<FlashSchedule> {
    cfg.validate()?;
    let mut rng = rng_from(seed);
    let mut flashes = Vec::with_capacity(cfg.flashes_per_trial());
    let mut prev = 0u128;
    for sequence in 0..cfg.sequences_per_trial {
        let masks = (0..MAX_RETRIES)
            .find_map(|_| try_sequence(&mut rng, prev, cfg))
            .ok_or(Error::Scheduling {
                sequence,
                retries: MAX_RETRIES,
            })?;
        prev = *masks.last().expect("non-empty sequence");
        for m in masks {
            let mut group = members(m);
            // presentation order within a flash is random
            group.shuffle(&mut rng);
            flashes.push(group);
        }
    }
    Ok(FlashSchedule {
        flashes,
        flashes_per_sequence: cfg.flashes_per_sequence,
        seed: Some(seed),
    })
}

/// One flash onset on the trial clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusEvent {
    pub flash_index: usize,
    pub sequence_index: usize,
    pub onset_ms: f64,
    pub group: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusTimeline {
    pub events: Vec<StimulusEvent>,
    pub stim_duration: f64,
}

/// Flash `k` starts at `k * soa`; the first flash is at 0 ms.
pub fn timeline(schedule: &FlashSchedule, cfg: &TimingConfig) -> StimulusTimeline {
    let soa = cfg.soa();
    let events = schedule
        .flashes
        .iter()
        .enumerate()
        .map(|(k, group)| StimulusEvent {
            flash_index: k,
            sequence_index: k / schedule.flashes_per_sequence,
            onset_ms: k as f64 * soa,
            group: group.clone(),
        })
        .collect();
    StimulusTimeline {
        events,
        stim_duration: cfg.stim_duration,
    }
}

/// Writes schedules as `trial,sequence,flash,obj1..objN`, one flash per line.
pub fn write_schedules<W: Write>(
    mut out: W,
    schedules: &[(u64, &FlashSchedule)],
) -> std::io::Result<()> {
    for (trial, schedule) in schedules {
        for (k, group) in schedule.flashes.iter().enumerate() {
            let (s, f) = schedule.position(k);
            write!(out, "{trial},{s},{f}")?;
            for o in group {
                write!(out, ",{o}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Parses the line format back into per-trial schedules, in file order.
///
/// Structural checks against a timing config are left to
/// [`FlashSchedule::validate`].
pub fn parse_schedules<R: BufRead>(
    input: R,
    flashes_per_sequence: usize,
) -> Result<Vec<(u64, FlashSchedule)>> {
    let mut out: Vec<(u64, FlashSchedule)> = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| f.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected at least 4 fields, got {}", fields.len()),
            });
        }
        let (trial, seq, flash) = (fields[0], fields[1] as usize, fields[2] as usize);
        let group: Vec<ObjectId> = fields[3..].iter().map(|&o| o as usize).collect();
        if out.last().map(|(t, _)| *t) != Some(trial) {
            out.push((
                trial,
                FlashSchedule {
                    flashes: Vec::new(),
                    flashes_per_sequence,
                    seed: None,
                },
            ));
        }
        let schedule = &mut out.last_mut().expect("pushed above").1;
        let expected = schedule.flashes.len();
        if seq * flashes_per_sequence + flash != expected {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("flash {seq}/{flash} out of order for trial {trial}"),
            });
        }
        schedule.flashes.push(group);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TimingConfig {
        TimingConfig::default()
    }

    #[test]
    fn same_seed_same_schedule() {
        let a = generate_schedule(42, &cfg()).unwrap();
        let b = generate_schedule(42, &cfg()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_schedule(43, &cfg()).unwrap());
    }

    #[test]
    fn schedule_satisfies_invariants() {
        for seed in 0..200 {
            let s = generate_schedule(seed, &cfg()).unwrap();
            s.validate(&cfg()).unwrap();
            assert_eq!(s.len(), 120);
            assert!(s.flashes.iter().all(|g| g.len() == 6));
        }
    }

    #[test]
    fn no_pair_flashes_together_twice_per_sequence() {
        for seed in 0..100 {
            let s = generate_schedule(seed, &cfg()).unwrap();
            for seq in s.sequences() {
                let mut seen = std::collections::HashSet::new();
                for g in seq {
                    for (i, &a) in g.iter().enumerate() {
                        for &b in &g[i + 1..] {
                            assert!(seen.insert((a.min(b), a.max(b))), "seed {seed}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn every_object_flashes_twenty_times_per_trial() {
        let s = generate_schedule(9, &cfg()).unwrap();
        for o in 0..36 {
            let n = s.flashes.iter().filter(|g| g.contains(&o)).count();
            assert_eq!(n, 20);
        }
    }

    #[test]
    fn validate_catches_adjacent_repeat() {
        let mut s = generate_schedule(1, &cfg()).unwrap();
        s.flashes[12] = s.flashes[11].clone();
        let err = s.validate(&cfg()).unwrap_err().to_string();
        assert!(err.contains("consecutive"), "{err}");
    }

    #[test]
    fn timeline_onsets() {
        let s = generate_schedule(3, &cfg()).unwrap();
        let tl = timeline(&s, &cfg());
        assert_eq!(tl.events.len(), 120);
        assert_eq!(tl.events[0].onset_ms, 0.0);
        assert_eq!(tl.events[12].onset_ms, 2220.0);
        assert_eq!(tl.events[12].sequence_index, 1);
        assert_eq!(tl.events[119].onset_ms, 22015.0);
        for w in tl.events.windows(2) {
            assert!((w[1].onset_ms - w[0].onset_ms - 185.0).abs() < 1e-9);
        }
    }

    #[test]
    fn text_round_trip() {
        let a = generate_schedule(5, &cfg()).unwrap();
        let b = generate_schedule(6, &cfg()).unwrap();
        let mut buf = Vec::new();
        write_schedules(&mut buf, &[(0, &a), (1, &b)]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 240);
        assert!(text.starts_with("0,0,0,"));
        let parsed = parse_schedules(buf.as_slice(), 12).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].1.flashes, a.flashes);
        assert_eq!(parsed[1].1.flashes, b.flashes);
        assert_eq!(parsed[1].1.seed, None);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(
            parse_schedules("0,0,0,1,x\n".as_bytes(), 12),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_schedules("0,0,1,1,2,3,4,5,6\n".as_bytes(), 12).is_err());
    }

    #[test]
    fn smaller_layouts_work() {
        // 12 objects, 3 per flash, 8 flashes per sequence
        let small = TimingConfig {
            n_objects: 12,
            objects_per_flash: 3,
            flashes_per_sequence: 8,
            sequences_per_trial: 3,
            ..Default::default()
        };
        let s = generate_schedule(11, &small).unwrap();
        s.validate(&small).unwrap();
    }
}
