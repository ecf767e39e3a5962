//! Sender optimization.
//!
//! The sender's problems are solved in canonical form: experiments recommend
//! actions and the receiver obeys. The statistical value is a search over
//! canonical kernels subject to the saddle-point obedience test. An ambiguous
//! experiment is valued by its worst (prior, member) pair once it passes the
//! exposed-face test. [`gain_search`] samples obedient ambiguous experiments
//! and compares their values with the statistical optimum.
//!
//! Two-state, two-action games get an exact answer. The feasible set and the
//! sender's objective are cut out by finitely many lines in the `(x, y)`
//! square, so the optimum sits at a pairwise intersection of those lines. A
//! grid and local refinement run first, and the enumeration can only improve
//! on them. Other games use a lattice on the product of simplices and flag
//! the result as approximate.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::binary::construct_sigma_hat;
use crate::error::{Error, Result};
use crate::model::{
    ambiguous_meu_payoff, meu_payoff, AmbiguousExperiment, GameSpec, Matrix, ReceiverStrategy,
    StatisticalExperiment,
};
use crate::obedience::{ambiguous_obedience, interval_verdict, statistical_obedience, ObedienceWitness};
use crate::sampling::{rng_from_seed, sample_obedient_ambiguous, trial_seed, RowSampler};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Grid,
    RefinedGrid,
    Enumerated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SenderExperiment {
    Statistical(StatisticalExperiment),
    Ambiguous(AmbiguousExperiment),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SenderSolution {
    pub value: f64,
    pub experiment: SenderExperiment,
    pub obedience_witness: ObedienceWitness,
    pub method: SolveMethod,
    /// Set when the search is not exact (games other than two by two).
    pub approximate: bool,
    /// Grid step actually searched.
    pub resolution: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Grid step in `(0, 0.5]`.
    pub resolution: f64,
    /// Rounds of 10x local refinement around the best grid point.
    pub refinement_rounds: usize,
    /// Enumerate the line arrangement in two-by-two games.
    pub enumerate: bool,
    /// Point budget for the lattice used on larger games; the step coarsens
    /// until the lattice fits.
    pub max_lattice_points: usize,
}

impl SearchOptions {
    pub fn new(resolution: f64) -> Self {
        SearchOptions {
            resolution,
            ..SearchOptions::default()
        }
    }

    /// Plain grid, no refinement or enumeration.
    pub fn grid_only(resolution: f64) -> Self {
        SearchOptions {
            resolution,
            refinement_rounds: 0,
            enumerate: false,
            ..SearchOptions::default()
        }
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            resolution: 1e-3,
            refinement_rounds: 2,
            enumerate: true,
            max_lattice_points: 30_000,
        }
    }
}

fn check_resolution(resolution: f64) -> Result<()> {
    if resolution.is_finite() && resolution > 0.0 && resolution <= 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("resolution", format!("{resolution} is not in (0, 0.5]")))
    }
}

/// Number of grid intervals for a step. Equal to `1/resolution` whenever that
/// is an integer, so decimal resolutions give nested grids.
fn grid_intervals(resolution: f64) -> usize {
    (1.0 / resolution - 1e-9).ceil().max(1.0) as usize
}

/// Optimal statistical value with default refinement and enumeration.
pub fn optimal_statistical_value(game: &GameSpec, resolution: f64) -> Result<SenderSolution> {
    optimal_statistical_value_with(game, &SearchOptions::new(resolution))
}

pub fn optimal_statistical_value_with(game: &GameSpec, options: &SearchOptions) -> Result<SenderSolution> {
    check_resolution(options.resolution)?;
    let (kernel, method, approximate, resolution) = if game.is_binary() {
        let (x, y, method) = binary_search(game, options);
        let kernel = Matrix::from_rows(vec![vec![x, 1.0 - x], vec![y, 1.0 - y]])?;
        (kernel, method, false, options.resolution)
    } else {
        let (kernel, step) = lattice_search(game, options)?;
        (kernel, SolveMethod::Grid, true, step)
    };
    let sigma = StatisticalExperiment::canonical(game, kernel)?;
    let witness = statistical_obedience(&sigma, game)?
        .ok_or_else(|| Error::Internal("optimal experiment failed to re-certify as obedient".into()))?;
    let value = meu_payoff(
        &sigma,
        &ReceiverStrategy::obedient(game.num_actions()),
        game.sender_payoff(),
        game.priors(),
    )?
    .value;
    Ok(SenderSolution {
        value,
        experiment: SenderExperiment::Statistical(sigma),
        obedience_witness: witness,
        method,
        approximate,
        resolution,
    })
}

/// Sender value of an obedient two-by-two kernel `(x, y)`, or `None` if the
/// kernel is not obedient.
struct BinaryObjective<'a> {
    vertices: &'a [Vec<f64>],
    receiver: &'a Matrix,
    sender: &'a Matrix,
}

impl BinaryObjective<'_> {
    fn value(&self, x: f64, y: f64) -> Option<f64> {
        let kernel = [x, 1.0 - x, y, 1.0 - y];
        if !interval_verdict(self.vertices, self.receiver, &kernel).obedient() {
            return None;
        }
        let u = self.sender;
        let by_state = [x * u[(0, 0)] + (1.0 - x) * u[(1, 0)], y * u[(0, 1)] + (1.0 - y) * u[(1, 1)]];
        Some(
            self.vertices
                .iter()
                .map(|p| p[0] * by_state[0] + p[1] * by_state[1])
                .fold(f64::INFINITY, f64::min),
        )
    }
}

#[derive(Clone, Copy, Debug)]
struct Best {
    value: f64,
    x: f64,
    y: f64,
}

impl Best {
    fn offer(&mut self, value: Option<f64>, x: f64, y: f64) -> bool {
        match value {
            Some(v) if v > self.value => {
                *self = Best { value: v, x, y };
                true
            }
            _ => false,
        }
    }
}

fn binary_search(game: &GameSpec, options: &SearchOptions) -> (f64, f64, SolveMethod) {
    let objective = BinaryObjective {
        vertices: game.priors().vertices(),
        receiver: game.receiver_payoff(),
        sender: game.sender_payoff(),
    };
    let n = grid_intervals(options.resolution);
    let nf = n as f64;
    let per_row: Vec<Best> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / nf;
            let mut best = Best {
                value: f64::NEG_INFINITY,
                x,
                y: 0.0,
            };
            for j in 0..=n {
                let y = j as f64 / nf;
                best.offer(objective.value(x, y), x, y);
            }
            best
        })
        .collect();
    let mut best = per_row[0];
    for b in &per_row[1..] {
        best.offer(Some(b.value), b.x, b.y);
    }
    let mut method = SolveMethod::Grid;

    let mut step = 1.0 / nf;
    for _ in 0..options.refinement_rounds {
        step /= 10.0;
        let (cx, cy) = (best.x, best.y);
        let mut improved = false;
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                let x = (cx + f64::from(i) * step).clamp(0.0, 1.0);
                let y = (cy + f64::from(j) * step).clamp(0.0, 1.0);
                improved |= best.offer(objective.value(x, y), x, y);
            }
        }
        if improved {
            method = SolveMethod::RefinedGrid;
        }
    }

    if options.enumerate {
        let floor = best.value + tol::REPRESENTATION;
        let mut candidate = Best {
            value: floor,
            ..best
        };
        for (x, y) in arrangement_vertices(game) {
            candidate.offer(objective.value(x, y), x, y);
        }
        if candidate.value > floor {
            best = candidate;
            method = SolveMethod::Enumerated;
        }
    }
    (best.x, best.y, method)
}

/// Line `a x + b y = c` in the `(x, y)` square.
type Line = [f64; 3];

/// Lines that bound the obedient region and the sender's piecewise-linear
/// objective:
///
/// * the edges of the square;
/// * both obedience constraints at every prior vertex, and at the prior where
///   the two constraints can bind together;
/// * the kernels where the receiver's payoff is flat in the prior, which
///   switch the worst-prior face;
/// * the kernels where the sender's payoff is flat in the prior, which switch
///   the sender's worst prior.
fn arrangement_lines(game: &GameSpec) -> Vec<Line> {
    let r = game.receiver_payoff();
    let s = game.sender_payoff();
    let v = [r[(1, 0)] - r[(0, 0)], r[(1, 1)] - r[(0, 1)]];
    let mut lines: Vec<Line> = vec![[1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0]];

    let mut priors: Vec<f64> = game.priors().vertices().iter().map(|p| p[0]).collect();
    let (lo, hi) = game.priors().binary_bounds().expect("two states");
    if v[0] != v[1] {
        let joint = -v[1] / (v[0] - v[1]);
        if (lo..=hi).contains(&joint) {
            priors.push(joint);
        }
    }
    for p in priors {
        let (a, b) = (p * v[0], (1.0 - p) * v[1]);
        lines.push([a, b, 0.0]);
        lines.push([a, b, a + b]);
    }
    for u in [r, s] {
        lines.push([u[(0, 0)] - u[(1, 0)], u[(1, 1)] - u[(0, 1)], u[(1, 1)] - u[(1, 0)]]);
    }
    lines
}

fn arrangement_vertices(game: &GameSpec) -> Vec<(f64, f64)> {
    let lines = arrangement_lines(game);
    let mut out = Vec::new();
    for (i, l1) in lines.iter().enumerate() {
        for l2 in &lines[i + 1..] {
            let det = l1[0] * l2[1] - l1[1] * l2[0];
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (l1[2] * l2[1] - l1[1] * l2[2]) / det;
            let y = (l1[0] * l2[2] - l1[2] * l2[0]) / det;
            let inside = |t: f64| (-tol::REPRESENTATION..=1.0 + tol::REPRESENTATION).contains(&t);
            if inside(x) && inside(y) {
                out.push((x.clamp(0.0, 1.0), y.clamp(0.0, 1.0)));
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All probability vectors of length `n` with entries in `{0, 1/m, ..., 1}`.
fn simplex_lattice(n: usize, m: usize) -> Vec<Vec<f64>> {
    fn fill(prefix: &mut Vec<usize>, n: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            fill(prefix, n, left - c, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    fill(&mut Vec::with_capacity(n), n, m, &mut counts);
    counts
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / m as f64).collect())
        .collect()
}

/// Product lattice over the kernel rows, coarsened to fit the point budget.
/// Returns the best obedient kernel found and the step used.
fn lattice_search(game: &GameSpec, options: &SearchOptions) -> Result<(Matrix, f64)> {
    let (n_states, n_actions) = (game.num_states(), game.num_actions());
    let mut m = grid_intervals(options.resolution);
    while m > 1 && binomial(m + n_actions - 1, n_actions - 1).powi(n_states as i32) > options.max_lattice_points as f64 {
        m -= 1;
    }
    let rows = simplex_lattice(n_actions, m);
    let total = rows.len().pow(n_states as u32);

    let tau = ReceiverStrategy::obedient(n_actions);
    let evaluate = |kernel: Matrix| -> Result<Option<(f64, Matrix)>> {
        let sigma = StatisticalExperiment::canonical(game, kernel)?;
        let obedient = if n_states == 2 {
            interval_verdict(game.priors().vertices(), game.receiver_payoff(), sigma.kernel().as_slice()).obedient()
        } else {
            statistical_obedience(&sigma, game)?.is_some()
        };
        if !obedient {
            return Ok(None);
        }
        let value = meu_payoff(&sigma, &tau, game.sender_payoff(), game.priors())?.value;
        Ok(Some((value, sigma.kernel().clone())))
    };

    let found: Vec<Option<(f64, Matrix)>> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut kernel_rows = Vec::with_capacity(n_states);
            for _ in 0..n_states {
                kernel_rows.push(rows[idx % rows.len()].clone());
                idx /= rows.len();
            }
            evaluate(Matrix::from_rows(kernel_rows)?)
        })
        .collect::<Result<_>>()?;
    let revealing = evaluate(StatisticalExperiment::fully_revealing(game)?.kernel().clone())?;

    let mut best: Option<(f64, Matrix)> = None;
    for cand in found.into_iter().chain(std::iter::once(revealing)).flatten() {
        if best.as_ref().is_none_or(|b| cand.0 > b.0) {
            best = Some(cand);
        }
    }
    let (_, kernel) = best.ok_or_else(|| Error::Internal("no obedient experiment on the lattice".into()))?;
    Ok((kernel, 1.0 / m as f64))
}

/// Sender's maxmin value of an ambiguous experiment under obedience, or
/// `None` when the obedient strategy is not a best response.
pub fn ambiguous_sender_value(sigma_set: &AmbiguousExperiment, game: &GameSpec) -> Result<Option<f64>> {
    if ambiguous_obedience(sigma_set, game)?.is_none() {
        return Ok(None);
    }
    let tau = ReceiverStrategy::obedient(game.num_actions());
    Ok(Some(
        ambiguous_meu_payoff(sigma_set, &tau, game.sender_payoff(), game.priors())?.value,
    ))
}

/// Where an obedient member of an ambiguous experiment was found.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum MemberSource {
    Generator { index: usize },
    /// Generator weights read off the exposed-face witness.
    WitnessMixture,
    /// The two-by-two construction.
    SigmaHat,
    PairMixture { first: usize, second: usize, weight: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObedientMember {
    pub source: MemberSource,
    pub experiment: StatisticalExperiment,
}

/// Interior weights tried on each pair of generators.
const PAIR_GRID: usize = 20;

/// Looks for a statistically obedient member of `Σ`: every generator, the
/// mixture behind the exposed-face witness, the two-by-two construction when
/// it applies, and a grid of pairwise mixtures. `None` means no member was
/// found, which makes `Σ` a candidate for an ambiguous experiment without
/// obedient members.
pub fn find_obedient_member(sigma_set: &AmbiguousExperiment, game: &GameSpec) -> Result<Option<ObedientMember>> {
    let gens = sigma_set.generators();
    let found = |source, experiment| Ok(Some(ObedientMember { source, experiment }));
    for (index, g) in gens.iter().enumerate() {
        if statistical_obedience(g, game)?.is_some() {
            return found(MemberSource::Generator { index }, g.clone());
        }
    }
    if let Some(witness) = ambiguous_obedience(sigma_set, game)? {
        let mut weights = vec![0.0; gens.len()];
        for w in &witness.weights {
            weights[w.generator] += w.w;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mix = sigma_set.combination(&weights)?;
        if statistical_obedience(&mix, game)?.is_some() {
            return found(MemberSource::WitnessMixture, mix);
        }
    }
    if game.is_binary() {
        match construct_sigma_hat(sigma_set, game) {
            Ok(w) => return found(MemberSource::SigmaHat, w.sigma_hat.to_experiment(game)?),
            Err(Error::Degenerate | Error::Precondition(_)) => {}
            Err(e) => return Err(e),
        }
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            for k in 1..PAIR_GRID {
                let weight = k as f64 / PAIR_GRID as f64;
                let mix = gens[i].mix(&gens[j], weight)?;
                if statistical_obedience(&mix, game)?.is_some() {
                    return found(
                        MemberSource::PairMixture {
                            first: i,
                            second: j,
                            weight,
                        },
                        mix,
                    );
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSearchOptions {
    pub resolution: f64,
    pub min_generators: usize,
    pub max_generators: usize,
    /// Rejection-sampling draws per trial.
    pub max_attempts: usize,
    pub sampler: RowSampler,
}

impl Default for GainSearchOptions {
    fn default() -> Self {
        GainSearchOptions {
            resolution: 1e-3,
            min_generators: 2,
            max_generators: 5,
            max_attempts: 50,
            sampler: RowSampler::Uniform,
        }
    }
}

/// One row of the gain-search trial log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub trial: u64,
    pub obedient: bool,
    pub sender_value: Option<f64>,
    pub lemma2_candidate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainReport {
    pub v_stat: f64,
    /// Largest sender value over sampled obedient ambiguous experiments;
    /// absent when none was sampled.
    pub best_ambiguous: Option<f64>,
    pub gap: Option<f64>,
    pub best_trial: Option<u64>,
    pub trials: u64,
    pub obedient_trials: u64,
    /// Obedient samples for which no obedient member was found.
    pub lemma2_candidates: u64,
    /// True outside two-by-two games, where no bound is asserted.
    pub exploratory: bool,
    pub approximate_v_stat: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainSearch {
    pub report: GainReport,
    pub statistical: SenderSolution,
    pub records: Vec<TrialRecord>,
}

pub fn gain_search(game: &GameSpec, budget: u64, seed: u64) -> Result<GainSearch> {
    gain_search_with(game, budget, seed, &GainSearchOptions::default())
}

pub fn gain_search_with(game: &GameSpec, budget: u64, seed: u64, options: &GainSearchOptions) -> Result<GainSearch> {
    if options.min_generators == 0 || options.min_generators > options.max_generators {
        return Err(Error::invalid(
            "generators",
            format!("range {}..={} is empty", options.min_generators, options.max_generators),
        ));
    }
    let statistical = optimal_statistical_value(game, options.resolution)?;
    let records: Vec<TrialRecord> = (0..budget)
        .into_par_iter()
        .map(|trial| run_trial(game, seed, trial, options))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, u64)> = None;
    for r in &records {
        if let Some(v) = r.sender_value {
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, r.trial));
            }
        }
    }
    let v_stat = statistical.value;
    let report = GainReport {
        v_stat,
        best_ambiguous: best.map(|b| b.0),
        gap: best.map(|b| b.0 - v_stat),
        best_trial: best.map(|b| b.1),
        trials: budget,
        obedient_trials: records.iter().filter(|r| r.obedient).count() as u64,
        lemma2_candidates: records.iter().filter(|r| r.lemma2_candidate).count() as u64,
        exploratory: !game.is_binary(),
        approximate_v_stat: statistical.approximate,
    };
    Ok(GainSearch {
        report,
        statistical,
        records,
    })
}

/// Replays a single trial; the ambiguous experiment drawn depends only on
/// `(seed, trial)`.
pub fn trial_experiment(
    game: &GameSpec,
    seed: u64,
    trial: u64,
    options: &GainSearchOptions,
) -> Result<Option<AmbiguousExperiment>> {
    let mut rng = rng_from_seed(trial_seed(seed, trial));
    let n_generators = rng.random_range(options.min_generators..=options.max_generators);
    let sample_seed: u64 = rng.random();
    sample_obedient_ambiguous(game, sample_seed, n_generators, options.max_attempts, options.sampler)
}

fn run_trial(game: &GameSpec, seed: u64, trial: u64, options: &GainSearchOptions) -> Result<TrialRecord> {
    let mut record = TrialRecord {
        seed,
        trial,
        obedient: false,
        sender_value: None,
        lemma2_candidate: false,
    };
    if let Some(set) = trial_experiment(game, seed, trial, options)? {
        record.obedient = true;
        record.sender_value = ambiguous_sender_value(&set, game)?;
        record.lemma2_candidate = find_obedient_member(&set, game)?.is_none();
    }
    Ok(record)
}

/// Writes one CSV row per trial: `seed,trial,obedient,sender_value,lemma2_candidate`.
pub fn write_trial_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r).map_err(|e| Error::Internal(format!("csv: {e}")))?;
    }
    writer.flush()?;
    Ok(())
}
