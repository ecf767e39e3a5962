//! Receiver's maxmin best response.
//!
//! For a fixed (prior vertex, generator) pair the receiver's payoff is linear
//! in the strategy, and the minimum over both hulls is attained at vertex
//! pairs, so the receiver's problem is the linear program
//!
//! ```text
//! max t  s.t.  t ≤ u_r(p_i, σ_j, τ)  for every pair (i, j),  τ row-stochastic.
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{ambiguous_meu_payoff, expected_payoff, AmbiguousExperiment, GameSpec, Matrix, ReceiverStrategy};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestResponseResult {
    pub value: f64,
    pub optimal_strategy: ReceiverStrategy,
    /// `(prior vertex, generator)` pairs whose constraint is tight at the
    /// optimum (within `1e-8`).
    pub active_constraints: Vec<(usize, usize)>,
}

pub fn receiver_best_response(
    sigma_set: &AmbiguousExperiment,
    game: &GameSpec,
) -> Result<BestResponseResult> {
    let n_msg = sigma_set.messages().len();
    let n_act = game.num_actions();
    let n_tau = n_msg * n_act;
    let t = n_tau;
    let u = game.receiver_payoff();
    for g in sigma_set.generators() {
        if g.num_states() != game.num_states() {
            return Err(Error::Dimension("experiment and game disagree on states".into()));
        }
    }

    let mut objective = vec![0.0; n_tau + 1];
    objective[t] = 1.0;
    let mut lp = LinearProgram::maximize(objective);
    lp.set_free(t);
    let mut pairs = Vec::new();
    for (i, p) in game.priors().vertices().iter().enumerate() {
        for (j, g) in sigma_set.generators().iter().enumerate() {
            // t - Σ_{m,a} c(m,a) τ(a|m) ≤ 0,  c(m,a) = Σ_ω p(ω) σ(m|ω) u(a,ω)
            let mut row = vec![0.0; n_tau + 1];
            for m in 0..n_msg {
                for a in 0..n_act {
                    let c: f64 = (0..game.num_states())
                        .map(|w| p[w] * g.kernel()[(w, m)] * u[(a, w)])
                        .sum();
                    row[m * n_act + a] = -c;
                }
            }
            row[t] = 1.0;
            lp.add_constraint(row, Relation::Le, 0.0);
            pairs.push((i, j));
        }
    }
    for m in 0..n_msg {
        let mut row = vec![0.0; n_tau + 1];
        row[m * n_act..(m + 1) * n_act].fill(1.0);
        lp.add_constraint(row, Relation::Eq, 1.0);
    }
    let sol = lp.solve().map_err(Error::Lp)?;

    let mut kernel = Matrix::zeros(n_msg, n_act);
    for m in 0..n_msg {
        let row: Vec<f64> = (0..n_act).map(|a| sol.x[m * n_act + a].max(0.0)).collect();
        let total: f64 = row.iter().sum();
        for (a, v) in row.into_iter().enumerate() {
            kernel[(m, a)] = v / total;
        }
    }
    let optimal_strategy = ReceiverStrategy::new(kernel)?;
    let value = sol.x[t];
    let mut active_constraints = Vec::new();
    for &(i, j) in &pairs {
        let v = expected_payoff(
            &game.priors().vertices()[i],
            &sigma_set.generators()[j],
            &optimal_strategy,
            u,
        )?;
        if v <= value + tol::FEASIBILITY {
            active_constraints.push((i, j));
        }
    }
    Ok(BestResponseResult {
        value,
        optimal_strategy,
        active_constraints,
    })
}

/// Value-based membership in the best-response set.
pub fn is_best_response(
    tau: &ReceiverStrategy,
    sigma_set: &AmbiguousExperiment,
    game: &GameSpec,
) -> Result<bool> {
    let attained = ambiguous_meu_payoff(sigma_set, tau, game.receiver_payoff(), game.priors())?;
    let best = receiver_best_response(sigma_set, game)?;
    Ok(attained.value >= best.value - tol::FEASIBILITY)
}
