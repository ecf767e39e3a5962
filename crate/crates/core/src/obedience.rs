//! Certificates that the obedient strategy is a best response.
//!
//! Three tests, from the most primitive up:
//!
//! * [`joint_obedience`]: a joint state/action distribution is obedient iff
//!   `⟨π_a, v_{a→b}⟩ ≤ 0` for every ordered pair of actions, a finite
//!   intersection of half-spaces.
//! * [`statistical_obedience`]: a single experiment is obedient iff some
//!   worst-case prior (for the receiver, under obedience) makes its induced
//!   joint obedient. This is the saddle-point form of the receiver's maxmin
//!   problem.
//! * [`ambiguous_obedience`]: an ambiguous experiment is obedient iff some
//!   point of the exposed face `K*(Σ)` of the hull of induced joints is
//!   obedient.
//!
//! The map `(p, σ) ↦ p × σ` is bilinear, so the hull of all induced joints is
//! the hull of the joints induced by (prior vertex, generator) pairs, and the
//! face minimizing the receiver's obedient payoff is spanned by the minimizing
//! pairs. [`k_star`] therefore only evaluates the finite pair grid.
//!
//! Note on degenerate faces: an extreme point of `K*(Σ)` is induced by some
//! `(p, σ)` with `p` a worst prior for `σ`, but a listed pair `(p_i, σ_j)` may
//! minimize jointly while `p_i` is not in the worst-prior face of `σ_j` taken
//! alone (only when ties hold up to the tie tolerance). The face is computed
//! from the joint minimization alone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{
    argmin_within, induced_joint, obedient_payoff, AmbiguousExperiment, GameSpec,
    JointDistribution, Matrix, StatisticalExperiment,
};
use crate::tol;

/// Receiver's state-wise gain from playing `to` instead of `from`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationVector {
    pub from_action: String,
    pub to_action: String,
    pub values: Vec<f64>,
}

impl DeviationVector {
    pub fn new(game: &GameSpec, from: usize, to: usize) -> Self {
        let u = game.receiver_payoff();
        DeviationVector {
            from_action: game.actions()[from].clone(),
            to_action: game.actions()[to].clone(),
            values: (0..game.num_states()).map(|w| u[(to, w)] - u[(from, w)]).collect(),
        }
    }
}

/// All ordered deviations `(from, to)` with `from != to`.
pub fn deviation_vectors(game: &GameSpec) -> Vec<(usize, usize, DeviationVector)> {
    let n = game.num_actions();
    let mut out = Vec::with_capacity(n * (n - 1));
    for a in 0..n {
        for b in 0..n {
            if a != b {
                out.push((a, b, DeviationVector::new(game, a, b)));
            }
        }
    }
    out
}

fn slack_matrix(mass: &Matrix, game: &GameSpec) -> Matrix {
    let n = game.num_actions();
    let u = game.receiver_payoff();
    let mut slack = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            slack[(a, b)] = (0..game.num_states())
                .map(|w| mass[(w, a)] * (u[(b, w)] - u[(a, w)]))
                .sum();
        }
    }
    slack
}

fn max_slack(slack: &Matrix) -> f64 {
    slack.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointObedience {
    pub obedient: bool,
    /// `slack[(a, b)] = ⟨π_a, v_{a→b}⟩`; the diagonal is zero.
    pub slack: Matrix,
}

pub fn joint_obedience(pi: &JointDistribution, game: &GameSpec) -> Result<JointObedience> {
    let mass = pi.mass();
    if mass.rows() != game.num_states() || mass.cols() != game.num_actions() {
        return Err(Error::Dimension(format!(
            "joint distribution is {}x{}, game is {}x{}",
            mass.rows(),
            mass.cols(),
            game.num_states(),
            game.num_actions()
        )));
    }
    let slack = slack_matrix(mass, game);
    Ok(JointObedience {
        obedient: max_slack(&slack) <= tol::FEASIBILITY,
        slack,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Joint,
    Statistical,
    Ambiguous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessWeight {
    pub prior_vertex: usize,
    pub generator: usize,
    pub w: f64,
}

/// Certificate that obedience holds: the prior (saddle-point test) or the
/// convex weights over (prior vertex, generator) pairs (exposed-face test),
/// with every obedience inner product of the certified joint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObedienceWitness {
    pub kind: WitnessKind,
    pub prior: Option<Vec<f64>>,
    pub weights: Vec<WitnessWeight>,
    pub slack: Matrix,
}

impl ObedienceWitness {
    /// Rebuilds the certified joint distribution.
    pub fn joint(&self, sigma_set: &AmbiguousExperiment, game: &GameSpec) -> Result<JointDistribution> {
        let vertices = game.priors().vertices();
        let gens = sigma_set.generators();
        let parts = self
            .weights
            .iter()
            .map(|w| {
                let p = vertices
                    .get(w.prior_vertex)
                    .ok_or_else(|| Error::MalformedWitness(format!("prior vertex {}", w.prior_vertex)))?;
                let g = gens
                    .get(w.generator)
                    .ok_or_else(|| Error::MalformedWitness(format!("generator {}", w.generator)))?;
                Ok((w.w, induced_joint(p, g, game)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<(f64, &JointDistribution)> = parts.iter().map(|(w, pi)| (*w, pi)).collect();
        JointDistribution::mixture(&refs)
    }

    pub fn max_slack(&self) -> f64 {
        max_slack(&self.slack)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serialization cannot fail")
    }
}

/// Witness for a joint distribution that already passes the half-space test.
pub fn joint_witness(pi: &JointDistribution, game: &GameSpec) -> Result<Option<ObedienceWitness>> {
    let r = joint_obedience(pi, game)?;
    Ok(r.obedient.then_some(ObedienceWitness {
        kind: WitnessKind::Joint,
        prior: None,
        weights: Vec::new(),
        slack: r.slack,
    }))
}

/// Prior vertices minimizing the receiver's obedient payoff; their hull is
/// the worst-case prior face.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WorstPriorFace {
    pub vertex_indices: Vec<usize>,
}

pub fn worst_case_priors(sigma: &StatisticalExperiment, game: &GameSpec) -> Result<WorstPriorFace> {
    sigma.require_canonical(game)?;
    let u = game.receiver_payoff();
    let (_, vertex_indices) = argmin_within(
        game.priors()
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, p)| (i, obedient_payoff(p, sigma, u))),
    );
    Ok(WorstPriorFace { vertex_indices })
}

/// Minimizing face of the hull of induced joints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KStarFace {
    /// `(prior vertex, generator)` pairs attaining the minimum within `1e-10`.
    pub minimizing_pairs: Vec<(usize, usize)>,
    /// Minimum receiver payoff under obedience.
    pub value: f64,
}

pub fn k_star(sigma_set: &AmbiguousExperiment, game: &GameSpec) -> Result<KStarFace> {
    sigma_set.require_canonical(game)?;
    let u = game.receiver_payoff();
    let mut values = Vec::new();
    for (i, p) in game.priors().vertices().iter().enumerate() {
        for (j, g) in sigma_set.generators().iter().enumerate() {
            values.push(((i, j), obedient_payoff(p, g, u)));
        }
    }
    let (value, minimizing_pairs) = argmin_within(values);
    Ok(KStarFace {
        minimizing_pairs,
        value,
    })
}

/// Convex weights over `candidates` minimizing the largest obedience slack of
/// the mixed joint. Returns the weights and that slack.
fn min_max_slack(candidates: &[JointDistribution], game: &GameSpec) -> Result<(Vec<f64>, f64)> {
    if candidates.len() == 1 {
        let s = max_slack(&slack_matrix(candidates[0].mass(), game));
        return Ok((vec![1.0], s));
    }
    let n = candidates.len();
    let slacks: Vec<Matrix> = candidates
        .iter()
        .map(|pi| slack_matrix(pi.mass(), game))
        .collect();
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::minimize(objective);
    lp.set_free(n);
    let mut simplex = vec![1.0; n + 1];
    simplex[n] = 0.0;
    lp.add_constraint(simplex, Relation::Eq, 1.0);
    for a in 0..game.num_actions() {
        for b in 0..game.num_actions() {
            if a == b {
                continue;
            }
            let mut row: Vec<f64> = slacks.iter().map(|s| s[(a, b)]).collect();
            row.push(-1.0);
            lp.add_constraint(row, Relation::Le, 0.0);
        }
    }
    let sol = lp.solve().map_err(Error::Lp)?;
    let mut weights: Vec<f64> = sol.x[..n].iter().map(|w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((weights, sol.objective))
}

/// Saddle-point test for a single canonical experiment.
///
/// Two-state games use exact interval arithmetic on the prior line; larger
/// games solve a small linear program over the worst-prior face.
pub fn statistical_obedience(
    sigma: &StatisticalExperiment,
    game: &GameSpec,
) -> Result<Option<ObedienceWitness>> {
    if game.num_states() == 2 {
        statistical_obedience_interval(sigma, game)
    } else {
        statistical_obedience_lp(sigma, game)
    }
}

pub fn statistical_obedience_lp(
    sigma: &StatisticalExperiment,
    game: &GameSpec,
) -> Result<Option<ObedienceWitness>> {
    let face = worst_case_priors(sigma, game)?;
    let vertices = game.priors().vertices();
    let joints = face
        .vertex_indices
        .iter()
        .map(|&i| induced_joint(&vertices[i], sigma, game))
        .collect::<Result<Vec<_>>>()?;
    let (weights, _) = min_max_slack(&joints, game)?;
    let mut prior = vec![0.0; game.num_states()];
    for (&i, &w) in face.vertex_indices.iter().zip(&weights) {
        for (pw, v) in prior.iter_mut().zip(&vertices[i]) {
            *pw += w * v;
        }
    }
    let weights = face
        .vertex_indices
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&i, &w)| WitnessWeight {
            prior_vertex: i,
            generator: 0,
            w,
        })
        .collect();
    certify_statistical(sigma, game, prior, weights)
}

/// Two-state saddle-point test. Each obedience constraint is affine in the
/// probability `p` of the first state, so the minimal worst slack over the
/// face interval sits at an endpoint or where two constraints cross.
pub fn statistical_obedience_interval(
    sigma: &StatisticalExperiment,
    game: &GameSpec,
) -> Result<Option<ObedienceWitness>> {
    if game.num_states() != 2 {
        return Err(Error::Dimension("interval test needs two states".into()));
    }
    sigma.require_canonical(game)?;
    let vertices = game.priors().vertices();
    let v = interval_verdict(vertices, game.receiver_payoff(), sigma.kernel().as_slice());
    let (lo, hi) = (vertices[v.lo_vertex][0], vertices[v.hi_vertex][0]);
    let t = if hi > lo { (hi - v.p) / (hi - lo) } else { 1.0 };
    let prior: Vec<f64> = (0..2)
        .map(|s| t * vertices[v.lo_vertex][s] + (1.0 - t) * vertices[v.hi_vertex][s])
        .collect();
    let mut weights = Vec::new();
    if t > 0.0 {
        weights.push(WitnessWeight {
            prior_vertex: v.lo_vertex,
            generator: 0,
            w: t,
        });
    }
    if t < 1.0 {
        weights.push(WitnessWeight {
            prior_vertex: v.hi_vertex,
            generator: 0,
            w: 1.0 - t,
        });
    }
    certify_statistical(sigma, game, prior, weights)
}

/// Outcome of the two-state interval search.
#[derive(Clone, Copy, Debug)]
pub(crate) struct IntervalVerdict {
    pub lo_vertex: usize,
    pub hi_vertex: usize,
    /// Prior (probability of the first state) minimizing the worst slack.
    pub p: f64,
    /// Worst obedience slack at `p`.
    pub worst: f64,
}

impl IntervalVerdict {
    pub fn obedient(&self) -> bool {
        self.worst <= tol::FEASIBILITY
    }
}

/// Takes the kernel as a row-major `(state, action)` slice so hot loops can
/// skip building experiments.
pub(crate) fn interval_verdict(vertices: &[Vec<f64>], u: &Matrix, kernel: &[f64]) -> IntervalVerdict {
    let n = kernel.len() / 2;
    let payoff = |p: &[f64]| {
        (0..2)
            .map(|w| p[w] * (0..n).map(|a| kernel[w * n + a] * u[(a, w)]).sum::<f64>())
            .sum::<f64>()
    };
    let min = vertices.iter().map(|p| payoff(p)).fold(f64::INFINITY, f64::min);
    let (mut lo_vertex, mut hi_vertex) = (usize::MAX, usize::MAX);
    for (i, p) in vertices.iter().enumerate() {
        if payoff(p) <= min + tol::TIE {
            if lo_vertex == usize::MAX || p[0] < vertices[lo_vertex][0] {
                lo_vertex = i;
            }
            if hi_vertex == usize::MAX || p[0] > vertices[hi_vertex][0] {
                hi_vertex = i;
            }
        }
    }
    let (lo, hi) = (vertices[lo_vertex][0], vertices[hi_vertex][0]);

    // slack(a→b)(p) = α + β p, enumerated over ordered pairs a ≠ b
    let line = |i: usize| {
        let (a, mut b) = (i / (n - 1), i % (n - 1));
        if b >= a {
            b += 1;
        }
        let alpha = kernel[n + a] * (u[(b, 1)] - u[(a, 1)]);
        let beta = kernel[a] * (u[(b, 0)] - u[(a, 0)]) - alpha;
        (alpha, beta)
    };
    let n_lines = n * (n - 1);
    let worst = |p: f64| {
        (0..n_lines)
            .map(|i| {
                let (al, be) = line(i);
                al + be * p
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = (lo, worst(lo));
    let mut consider = |p: f64| {
        let w = worst(p);
        if w < best.1 {
            best = (p, w);
        }
    };
    consider(hi);
    for i in 0..n_lines {
        let (a1, b1) = line(i);
        for j in i + 1..n_lines {
            let (a2, b2) = line(j);
            if b1 != b2 {
                let p = (a2 - a1) / (b1 - b2);
                if p > lo && p < hi {
                    consider(p);
                }
            }
        }
    }
    IntervalVerdict {
        lo_vertex,
        hi_vertex,
        p: best.0,
        worst: best.1,
    }
}

fn certify_statistical(
    sigma: &StatisticalExperiment,
    game: &GameSpec,
    prior: Vec<f64>,
    weights: Vec<WitnessWeight>,
) -> Result<Option<ObedienceWitness>> {
    let pi = induced_joint(&prior, sigma, game)?;
    let r = joint_obedience(&pi, game)?;
    Ok(r.obedient.then_some(ObedienceWitness {
        kind: WitnessKind::Statistical,
        prior: Some(prior),
        weights,
        slack: r.slack,
    }))
}

/// Exposed-face test: finds convex weights over the `K*(Σ)` pairs whose
/// mixed joint is obedient.
pub fn ambiguous_obedience(
    sigma_set: &AmbiguousExperiment,
    game: &GameSpec,
) -> Result<Option<ObedienceWitness>> {
    let face = k_star(sigma_set, game)?;
    let vertices = game.priors().vertices();
    let gens = sigma_set.generators();
    let joints = face
        .minimizing_pairs
        .iter()
        .map(|&(i, j)| induced_joint(&vertices[i], &gens[j], game))
        .collect::<Result<Vec<_>>>()?;
    let (weights, _) = min_max_slack(&joints, game)?;
    let parts: Vec<(f64, &JointDistribution)> =
        weights.iter().copied().zip(joints.iter()).collect();
    let pi = JointDistribution::mixture(&parts)?;
    let r = joint_obedience(&pi, game)?;
    if !r.obedient {
        return Ok(None);
    }
    let weights = face
        .minimizing_pairs
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&(i, j), &w)| WitnessWeight {
            prior_vertex: i,
            generator: j,
            w,
        })
        .collect();
    Ok(Some(ObedienceWitness {
        kind: WitnessKind::Ambiguous,
        prior: None,
        weights,
        slack: r.slack,
    }))
}
