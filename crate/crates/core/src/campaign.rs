//! Seeded verification campaign for the two-by-two no-gain construction.
//!
//! Each trial draws a game (unless one is fixed), samples an obedient
//! ambiguous experiment, runs [`construct_sigma_hat`], and then re-checks its
//! output by routes that share no code with the construction: planar hull
//! membership, the LP form of the saddle-point test, the receiver's
//! best-response LP, and the inequalities that make `p_L`/`p_U` worst priors
//! for the face experiments.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::binary::{construct_sigma_hat, normalize, phi, BinaryExperiment, DecompositionWitness};
use crate::error::{Error, Result};
use crate::hull;
use crate::minimax::is_best_response;
use crate::model::{AmbiguousExperiment, GameSpec, ReceiverStrategy};
use crate::obedience::statistical_obedience_lp;
use crate::sampling::{random_binary_game, random_lattice_binary_game, rng_from_seed, sample_obedient_ambiguous, trial_seed, RowSampler};
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub trials: u64,
    pub seed: u64,
    /// Fixed game; a fresh random game per trial when absent.
    pub game: Option<GameSpec>,
    pub min_generators: usize,
    pub max_generators: usize,
    /// Rejection-sampling draws per game.
    pub max_attempts: usize,
    /// Random games drawn per trial before the trial is skipped; a game that
    /// admits no sampled obedient experiment is replaced by a fresh one.
    pub max_game_draws: usize,
    pub sampler: RowSampler,
    pub family: GameFamily,
}

/// Distribution of the random games.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GameFamily {
    /// Continuous payoffs and prior interval.
    #[default]
    Continuous,
    /// Small integer payoffs and priors on a tenth grid. Pair with
    /// [`RowSampler::Lattice`] to produce ties between the two interval
    /// ends, the case where the decomposition uses both.
    Lattice,
}

impl CampaignConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        CampaignConfig {
            trials,
            seed,
            game: None,
            min_generators: 2,
            max_generators: 5,
            max_attempts: 200,
            max_game_draws: 20,
            sampler: RowSampler::Uniform,
            family: GameFamily::Continuous,
        }
    }

    /// Lattice games and lattice experiments.
    pub fn lattice(trials: u64, seed: u64) -> Self {
        CampaignConfig {
            sampler: RowSampler::Lattice(20),
            family: GameFamily::Lattice,
            ..CampaignConfig::new(trials, seed)
        }
    }

    pub fn with_game(mut self, game: GameSpec) -> Self {
        self.game = Some(game);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Verified,
    /// No obedient ambiguous experiment within the attempt budget.
    Skipped,
    Violation,
}

/// One CSV row per trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignRecord {
    pub seed: u64,
    pub trial: u64,
    pub status: TrialStatus,
    pub generators: usize,
    /// Both interval ends carry weight in the decomposition.
    pub two_sided: bool,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub hull_distance: Option<f64>,
    pub slope: Option<f64>,
    pub monotonicity_excess: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationDetail {
    pub trial: u64,
    pub message: String,
    pub diagnostics: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub trials: u64,
    pub verified: u64,
    /// Verified trials whose decomposition weighs both interval ends.
    pub two_sided: u64,
    pub skipped: u64,
    pub violations: u64,
    pub max_hull_distance: f64,
    /// Largest `|M(σ̂)|` over two-sided decompositions (normalized units).
    pub max_abs_slope: f64,
    /// Largest `Φ(p_L, σ) − Φ(p_L, σ_L)` or `Φ(p_U, σ) − Φ(p_U, σ_U)` over the
    /// generators and `σ̂`.
    pub max_monotonicity_excess: f64,
    pub violation_details: Vec<ViolationDetail>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub report: CampaignReport,
    pub records: Vec<CampaignRecord>,
}

/// Independent re-checks tolerated at these levels.
const HULL_TOLERANCE: f64 = 1e-9;

pub fn verify_theorem(config: &CampaignConfig) -> Result<Campaign> {
    if config.min_generators == 0 || config.min_generators > config.max_generators {
        return Err(Error::invalid(
            "generators",
            format!("range {}..={} is empty", config.min_generators, config.max_generators),
        ));
    }
    if let Some(game) = &config.game {
        if normalize(game)?.degenerate {
            return Err(Error::Degenerate);
        }
    }
    let outcomes: Vec<(CampaignRecord, Option<ViolationDetail>)> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;

    let mut report = CampaignReport {
        seed: config.seed,
        trials: config.trials,
        verified: 0,
        two_sided: 0,
        skipped: 0,
        violations: 0,
        max_hull_distance: 0.0,
        max_abs_slope: 0.0,
        max_monotonicity_excess: f64::NEG_INFINITY,
        violation_details: Vec::new(),
    };
    let mut records = Vec::with_capacity(outcomes.len());
    for (record, detail) in outcomes {
        match record.status {
            TrialStatus::Verified => {
                report.verified += 1;
                report.two_sided += u64::from(record.two_sided);
            }
            TrialStatus::Skipped => report.skipped += 1,
            TrialStatus::Violation => report.violations += 1,
        }
        let fold = |acc: &mut f64, v: Option<f64>| *acc = acc.max(v.unwrap_or(f64::NEG_INFINITY));
        fold(&mut report.max_hull_distance, record.hull_distance);
        fold(
            &mut report.max_abs_slope,
            record.slope.filter(|_| record.two_sided).map(f64::abs),
        );
        fold(&mut report.max_monotonicity_excess, record.monotonicity_excess);
        report.violation_details.extend(detail);
        records.push(record);
    }
    if report.max_monotonicity_excess == f64::NEG_INFINITY {
        report.max_monotonicity_excess = 0.0;
    }
    Ok(Campaign { report, records })
}

/// Draws the game and ambiguous experiment of one trial.
pub fn trial_instance(config: &CampaignConfig, trial: u64) -> Result<(GameSpec, usize, Option<AmbiguousExperiment>)> {
    let mut rng = rng_from_seed(trial_seed(config.seed, trial));
    let n = rng.random_range(config.min_generators..=config.max_generators);
    let draws = if config.game.is_some() { 1 } else { config.max_game_draws.max(1) };
    let mut last = None;
    for _ in 0..draws {
        let game = match &config.game {
            Some(g) => g.clone(),
            None => match config.family {
                GameFamily::Continuous => random_binary_game(&mut rng),
                GameFamily::Lattice => random_lattice_binary_game(&mut rng),
            },
        };
        let sample_seed: u64 = rng.random();
        let set = sample_obedient_ambiguous(&game, sample_seed, n, config.max_attempts, config.sampler)?;
        if set.is_some() {
            return Ok((game, n, set));
        }
        last = Some(game);
    }
    Ok((last.expect("at least one draw"), n, None))
}

fn run_trial(config: &CampaignConfig, trial: u64) -> Result<(CampaignRecord, Option<ViolationDetail>)> {
    let (game, generators, set) = trial_instance(config, trial)?;
    let mut record = CampaignRecord {
        seed: config.seed,
        trial,
        status: TrialStatus::Skipped,
        generators,
        two_sided: false,
        alpha: None,
        lambda: None,
        hull_distance: None,
        slope: None,
        monotonicity_excess: None,
    };
    let Some(set) = set else {
        return Ok((record, None));
    };
    let witness = match construct_sigma_hat(&set, &game) {
        Ok(w) => w,
        Err(Error::TheoremViolation(report)) => {
            record.status = TrialStatus::Violation;
            let detail = ViolationDetail {
                trial,
                message: report.message,
                diagnostics: report.diagnostics,
            };
            return Ok((record, Some(detail)));
        }
        Err(e) => return Err(e),
    };
    record.alpha = Some(witness.alpha);
    record.lambda = Some(witness.lambda);
    record.slope = Some(witness.slope_at_sigma_hat);
    record.two_sided = witness.p_u - witness.p_l > tol::REPRESENTATION && witness.alpha > 0.0 && witness.alpha < 1.0;

    let checks = recheck(&witness, &set, &game)?;
    record.hull_distance = Some(checks.hull_distance);
    record.monotonicity_excess = Some(checks.monotonicity_excess);
    let failures = checks.failures();
    if failures.is_empty() {
        record.status = TrialStatus::Verified;
        return Ok((record, None));
    }
    record.status = TrialStatus::Violation;
    let detail = ViolationDetail {
        trial,
        message: failures.join("; "),
        diagnostics: serde_json::json!({
            "game": game,
            "generators": set.generators().iter()
                .map(|g| [g.kernel()[(0, 0)], g.kernel()[(1, 0)]])
                .collect::<Vec<_>>(),
            "witness": witness,
        }),
    };
    Ok((record, Some(detail)))
}

struct Rechecks {
    hull_distance: f64,
    lp_obedient: bool,
    best_response: bool,
    monotonicity_excess: f64,
}

impl Rechecks {
    fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.hull_distance > HULL_TOLERANCE {
            out.push("sigma_hat outside the generator hull");
        }
        if !self.lp_obedient {
            out.push("sigma_hat fails the LP obedience test");
        }
        if !self.best_response {
            out.push("obedience is not a best response to sigma_hat");
        }
        if self.monotonicity_excess > tol::FEASIBILITY {
            out.push("face experiments are not receiver-worst at the interval ends");
        }
        out
    }
}

fn recheck(witness: &DecompositionWitness, set: &AmbiguousExperiment, game: &GameSpec) -> Result<Rechecks> {
    let points: Vec<hull::Point> = set
        .generators()
        .iter()
        .map(|g| BinaryExperiment::from_experiment(g, game).map(BinaryExperiment::point))
        .collect::<Result<_>>()?;
    let hull_distance = hull::distance_to_hull(&hull::convex_hull(&points), witness.sigma_hat.point());

    let sigma_hat = witness.sigma_hat.to_experiment(game)?;
    let lp_obedient = statistical_obedience_lp(&sigma_hat, game)?.is_some();
    let best_response = is_best_response(
        &ReceiverStrategy::obedient(2),
        &AmbiguousExperiment::singleton(sigma_hat),
        game,
    )?;

    // σ_L minimizes the receiver's payoff at p_L over Σ, equivalently
    // maximizes Φ_{a→b}(p_L, ·); same for σ_U at p_U. A one-sided
    // decomposition copies the present side, so only that end binds.
    let norm = normalize(game)?;
    let mut anchors = Vec::with_capacity(2);
    if witness.alpha > 0.0 {
        anchors.push((witness.p_l, witness.sigma_l));
    }
    if witness.alpha < 1.0 {
        anchors.push((witness.p_u, witness.sigma_u));
    }
    let mut excess = f64::NEG_INFINITY;
    let members = points
        .iter()
        .map(|&[x, y]| BinaryExperiment { x, y })
        .chain(std::iter::once(witness.sigma_hat));
    for s in members {
        for &(p, anchor) in &anchors {
            excess = excess.max(phi(p, s, &norm)?.0 - phi(p, anchor, &norm)?.0);
        }
    }
    Ok(Rechecks {
        hull_distance,
        lp_obedient,
        best_response,
        monotonicity_excess: excess,
    })
}

pub fn write_campaign_csv<W: Write>(records: &[CampaignRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r).map_err(|e| Error::Internal(format!("csv: {e}")))?;
    }
    writer.flush()?;
    Ok(())
}
