//! Seeded random games, experiments and strategies.
//!
//! Campaign trial `i` under master seed `s` draws from a ChaCha8 stream
//! seeded with [`trial_seed`]`(s, i)`, so any trial can be replayed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::Result;
use crate::model::{AmbiguousExperiment, GameSpec, Matrix, PriorSet, ReceiverStrategy, StatisticalExperiment};
use crate::obedience::ambiguous_obedience;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(seed ^ splitmix64(trial))`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distribution of a random probability row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Default)]
pub enum RowSampler {
    /// Independent uniform entries, normalized.
    #[default]
    Uniform,
    /// Symmetric Dirichlet with the given concentration.
    Dirichlet(f64),
    /// Entries on the grid `{0, 1/n, ..., 1}`. Payoff ties between
    /// experiments then occur with positive probability.
    Lattice(u32),
}

pub fn random_row<R: Rng>(rng: &mut R, n: usize, sampler: RowSampler) -> Vec<f64> {
    let mut row: Vec<f64> = match sampler {
        RowSampler::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        // normalized Gamma draws are Dirichlet
        RowSampler::Dirichlet(alpha) => {
            let gamma = Gamma::new(alpha, 1.0).expect("positive concentration");
            (0..n).map(|_| gamma.sample(rng)).collect()
        }
        RowSampler::Lattice(m) => {
            let mut cuts: Vec<u32> = (1..n).map(|_| rng.random_range(0..=m)).collect();
            cuts.push(0);
            cuts.push(m);
            cuts.sort_unstable();
            return cuts.windows(2).map(|w| f64::from(w[1] - w[0]) / f64::from(m)).collect();
        }
    };
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        row = vec![1.0 / n as f64; n];
    } else {
        row.iter_mut().for_each(|x| *x /= total);
    }
    // absorb rounding so the row sums to one
    let last = n - 1;
    let head: f64 = row[..last].iter().sum();
    row[last] = (1.0 - head).max(0.0);
    row
}

pub fn random_kernel<R: Rng>(rng: &mut R, rows: usize, cols: usize, sampler: RowSampler) -> Matrix {
    Matrix::from_rows((0..rows).map(|_| random_row(rng, cols, sampler)).collect())
        .expect("rectangular")
}

pub fn random_canonical<R: Rng>(rng: &mut R, game: &GameSpec, sampler: RowSampler) -> StatisticalExperiment {
    StatisticalExperiment::canonical(game, random_kernel(rng, game.num_states(), game.num_actions(), sampler))
        .expect("random rows are probability vectors")
}

pub fn random_strategy<R: Rng>(rng: &mut R, n_messages: usize, n_actions: usize) -> ReceiverStrategy {
    ReceiverStrategy::new(random_kernel(rng, n_messages, n_actions, RowSampler::Uniform))
        .expect("random rows are probability vectors")
}

pub fn random_payoff<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random game with uniform payoffs in `[-1, 1]` and `n_vertices` random
/// prior vertices.
pub fn random_game<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize, n_vertices: usize) -> GameSpec {
    let vertices = (0..n_vertices)
        .map(|_| random_row(rng, n_states, RowSampler::Uniform))
        .collect();
    GameSpec::new(
        labels("w", n_states),
        labels("a", n_actions),
        random_payoff(rng, n_actions, n_states),
        random_payoff(rng, n_actions, n_states),
        PriorSet::new(vertices).expect("random priors are on the simplex"),
    )
    .expect("random game is well formed")
}

/// Random prior interval `0 ≤ p_L ≤ p_U ≤ 1`; collapses to a point one time
/// in ten and touches an end of `[0, 1]` one time in ten.
pub fn random_interval<R: Rng>(rng: &mut R) -> (f64, f64) {
    let (a, b): (f64, f64) = (rng.random(), rng.random());
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    match rng.random_range(0..20) {
        0 | 1 => hi = lo,
        2 => lo = 0.0,
        3 => hi = 1.0,
        _ => {}
    }
    (lo, hi)
}

/// Random two-state, two-action game whose receiver deviation gain
/// `u_r(b,·) − u_r(a,·)` has mixed signs, in either orientation.
pub fn random_binary_game<R: Rng>(rng: &mut R) -> GameSpec {
    let w = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let mut v = [rng.random_range(0.1..2.0), -rng.random_range(0.1..2.0)];
    if rng.random::<bool>() {
        v = [-v[0], -v[1]];
    }
    let sender = random_payoff(rng, 2, 2);
    let (lo, hi) = random_interval(rng);
    GameSpec::new(
        labels("w", 2),
        labels("a", 2),
        sender,
        vec![w.to_vec(), vec![w[0] + v[0], w[1] + v[1]]],
        PriorSet::interval(lo, hi).expect("ordered interval"),
    )
    .expect("random game is well formed")
}

/// Two-by-two game with small integer payoffs and an interval prior whose
/// ends are multiples of `1/10`, for exercising exact ties.
pub fn random_lattice_binary_game<R: Rng>(rng: &mut R) -> GameSpec {
    let mut int = |lo: i32, hi: i32| f64::from(rng.random_range(lo..=hi));
    let w = [int(-2, 2), int(-2, 2)];
    let mut v = [int(1, 3), -int(1, 3)];
    let sender = vec![vec![int(-2, 2), int(-2, 2)], vec![int(-2, 2), int(-2, 2)]];
    if rng.random::<bool>() {
        v = [-v[0], -v[1]];
    }
    let a = f64::from(rng.random_range(0..=10u32)) / 10.0;
    let b = f64::from(rng.random_range(0..=10u32)) / 10.0;
    GameSpec::new(
        labels("w", 2),
        labels("a", 2),
        sender,
        vec![w.to_vec(), vec![w[0] + v[0], w[1] + v[1]]],
        PriorSet::interval(a.min(b), a.max(b)).expect("ordered interval"),
    )
    .expect("random game is well formed")
}

/// Rejection sampler: draws `n_generators` random canonical experiments per
/// attempt and returns the first set that passes the exposed-face obedience
/// test, or `None` after `max_attempts` attempts.
pub fn sample_obedient_ambiguous(
    game: &GameSpec,
    seed: u64,
    n_generators: usize,
    max_attempts: usize,
    sampler: RowSampler,
) -> Result<Option<AmbiguousExperiment>> {
    let mut rng = rng_from_seed(seed);
    for _ in 0..max_attempts {
        let gens = (0..n_generators)
            .map(|_| random_canonical(&mut rng, game, sampler))
            .collect();
        let set = AmbiguousExperiment::new(gens)?;
        if ambiguous_obedience(&set, game)?.is_some() {
            return Ok(Some(set));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::g0_interval;
    use crate::obedience::statistical_obedience;

    #[test]
    fn rows_are_probability_vectors() {
        let mut rng = rng_from_seed(7);
        for sampler in [RowSampler::Uniform, RowSampler::Dirichlet(0.5)] {
            for n in 2..6 {
                let r = random_row(&mut rng, n, sampler);
                assert!(r.iter().all(|&x| x >= 0.0));
                assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn lattice_rows_sit_on_the_grid() {
        let mut rng = rng_from_seed(2);
        for n in 2..5 {
            let r = random_row(&mut rng, n, RowSampler::Lattice(20));
            assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
            assert!(r.iter().all(|x| ((x * 20.0).round() - x * 20.0).abs() < 1e-12));
        }
        for _ in 0..50 {
            let g = random_lattice_binary_game(&mut rng);
            let u = g.receiver_payoff();
            assert!((u[(1, 0)] - u[(0, 0)]) * (u[(1, 1)] - u[(0, 1)]) < 0.0);
        }
    }

    #[test]
    fn trial_seeds_differ_and_repeat() {
        assert_eq!(trial_seed(42, 3), trial_seed(42, 3));
        assert_ne!(trial_seed(42, 3), trial_seed(42, 4));
        assert_ne!(trial_seed(42, 3), trial_seed(43, 3));
    }

    #[test]
    fn zero_budget_is_absent() {
        let g = g0_interval(0.4, 0.6);
        assert!(sample_obedient_ambiguous(&g, 1, 3, 0, RowSampler::Uniform).unwrap().is_none());
    }

    #[test]
    fn single_generator_samples_are_obedient_experiments() {
        let g = g0_interval(0.4, 0.6);
        for seed in 0..20 {
            if let Some(set) = sample_obedient_ambiguous(&g, seed, 1, 50, RowSampler::Uniform).unwrap() {
                assert!(statistical_obedience(&set.generators()[0], &g).unwrap().is_some());
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = g0_interval(0.3, 0.7);
        let a = sample_obedient_ambiguous(&g, 99, 3, 100, RowSampler::Uniform).unwrap();
        let b = sample_obedient_ambiguous(&g, 99, 3, 100, RowSampler::Uniform).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_binary_games_are_mixed() {
        let mut rng = rng_from_seed(5);
        for _ in 0..200 {
            let g = random_binary_game(&mut rng);
            let u = g.receiver_payoff();
            let v = [u[(1, 0)] - u[(0, 0)], u[(1, 1)] - u[(0, 1)]];
            assert!(v[0] * v[1] < 0.0);
        }
    }
}
