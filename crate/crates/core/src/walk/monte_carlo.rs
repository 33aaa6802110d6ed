//! Monte-Carlo estimate of the root-to-exit hitting time.
//!
//! The walk is simulated from the augmented graph and the walk parameters
//! directly (not from the transition matrix), so it checks the analytic
//! route independently. Walks are grouped in blocks of [`MC_BLOCK_WALKS`];
//! block `b` draws from `Rng::new(mix(seed, b), Stream::MonteCarlo)`.
//! Block statistics are merged pairwise in block order, which makes the
//! result independent of the number of worker threads.

use rayon::prelude::*;

use super::hitting::{HittingTimeReport, Method};
use super::{AugmentedGraph, StepCounting, WalkError, WalkParams};
use crate::rng::{mix, Rng, Stream};

pub const MC_BLOCK_WALKS: u64 = 4096;
pub const MC_STEP_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        count: 0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let count = a.count + b.count;
        let delta = b.mean - a.mean;
        let mean = a.mean + delta * b.count as f64 / count as f64;
        let m2 = a.m2 + b.m2 + delta * delta * (a.count as f64 * b.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }
}

fn pairwise(mut parts: Vec<Moments>) -> Moments {
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|c| {
                if c.len() == 2 {
                    Moments::merge(c[0], c[1])
                } else {
                    c[0]
                }
            })
            .collect();
    }
    parts.pop().unwrap_or(Moments::EMPTY)
}

fn walk_once(
    aug: &AugmentedGraph,
    params: &WalkParams,
    counting: StepCounting,
    rng: &mut Rng,
    block: u64,
) -> Result<u64, WalkError> {
    let stay = params.stay_prob();
    let restart_edge = stay + params.restart_prob();
    let root = aug.root_index();
    let exit = aug.exit_index();
    let mut here = root;
    let mut steps = 0u64;
    let mut moves = 0u64;
    while here != exit {
        if steps >= MC_STEP_CAP {
            return Err(WalkError::StepCap {
                cap: MC_STEP_CAP,
                block,
            });
        }
        steps += 1;
        let u = rng.unit();
        let next = if u < stay {
            here
        } else if u < restart_edge {
            root
        } else {
            let out = aug.successors(here);
            out[rng.below(out.len())]
        };
        if next != here {
            moves += 1;
        }
        here = next;
    }
    Ok(match counting {
        StepCounting::EveryStep => steps,
        StepCounting::MovesOnly => moves,
    })
}

pub fn hitting_time_mc(
    aug: &AugmentedGraph,
    params: &WalkParams,
    walks: u64,
    seed: u64,
) -> Result<HittingTimeReport, WalkError> {
    hitting_time_mc_counted(aug, params, walks, seed, StepCounting::EveryStep)
}

pub fn hitting_time_mc_counted(
    aug: &AugmentedGraph,
    params: &WalkParams,
    walks: u64,
    seed: u64,
    counting: StepCounting,
) -> Result<HittingTimeReport, WalkError> {
    if walks == 0 {
        return Err(WalkError::InvalidArgument("walks must be >= 1".into()));
    }
    let blocks = walks.div_ceil(MC_BLOCK_WALKS);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = MC_BLOCK_WALKS.min(walks - b * MC_BLOCK_WALKS);
            let mut rng = Rng::new(mix(seed, b), Stream::MonteCarlo);
            let mut m = Moments::EMPTY;
            for _ in 0..n {
                m.push(walk_once(aug, params, counting, &mut rng, b)? as f64);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>, WalkError>>()?;
    let total = pairwise(parts);
    let stderr = if total.count > 1 {
        (total.m2 / (total.count - 1) as f64).sqrt() / (total.count as f64).sqrt()
    } else {
        0.0
    };
    Ok(HittingTimeReport {
        method: Method::MonteCarlo,
        source: aug.root_index(),
        target: aug.exit_index(),
        value: total.mean,
        per_state: Vec::new(),
        stderr: Some(stderr),
        walks: Some(total.count),
        residual: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DependencyGraph, GoalNode};
    use crate::walk::augment;
    use std::collections::BTreeMap;

    fn two_state() -> AugmentedGraph {
        let g = DependencyGraph::new(
            vec![GoalNode::start(), GoalNode::exit()],
            vec![("start".into(), "exit".into())],
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        augment(&g, false)
    }

    #[test]
    fn two_state_matches_geometric_mean() {
        let r = hitting_time_mc(&two_state(), &WalkParams::default(), 200_000, 11).unwrap();
        let se = r.stderr.unwrap();
        assert!(
            (r.value - 1.0 / 0.19).abs() <= 3.0 * se,
            "{} ± {se}",
            r.value
        );
        assert_eq!(r.walks, Some(200_000));
    }

    #[test]
    fn deterministic_for_seed() {
        let aug = two_state();
        let a = hitting_time_mc(&aug, &WalkParams::default(), 10_000, 3).unwrap();
        let b = hitting_time_mc(&aug, &WalkParams::default(), 10_000, 3).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.unwrap().to_bits(), b.stderr.unwrap().to_bits());
    }

    #[test]
    fn independent_of_thread_count() {
        let aug = augment(&crate::graph::load_template("b").unwrap(), false);
        let params = WalkParams::default();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| hitting_time_mc(&aug, &params, 20_000, 9).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.value.to_bits(), four.value.to_bits());
        assert_eq!(
            one.stderr.unwrap().to_bits(),
            four.stderr.unwrap().to_bits()
        );
    }

    #[test]
    fn single_walk_is_positive_integer() {
        let r = hitting_time_mc(&two_state(), &WalkParams::default(), 1, 5).unwrap();
        assert!(r.value >= 1.0);
        assert_eq!(r.value.fract(), 0.0);
        assert_eq!(r.walks, Some(1));
    }

    #[test]
    fn zero_walks_rejected() {
        assert!(hitting_time_mc(&two_state(), &WalkParams::default(), 0, 5).is_err());
    }

    #[test]
    fn pairwise_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let mut seq = Moments::EMPTY;
        xs.iter().for_each(|&x| seq.push(x));
        let parts: Vec<Moments> = xs
            .chunks(77)
            .map(|c| {
                let mut m = Moments::EMPTY;
                c.iter().for_each(|&x| m.push(x));
                m
            })
            .collect();
        let merged = pairwise(parts);
        assert_eq!(merged.count, seq.count);
        assert!((merged.mean - seq.mean).abs() < 1e-9);
        assert!((merged.m2 - seq.m2).abs() < 1e-6);
    }
}
