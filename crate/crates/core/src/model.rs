//! Game data, experiments, strategies and the payoff functionals.
//!
//! Every matrix uses the index order fixed when the [`GameSpec`] is built:
//! payoffs are `(action, state)`, experiment kernels `(state, message)`,
//! receiver strategies `(message, action)` and joint distributions
//! `(state, action)`.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tol;

/// Dense row-major matrix of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Matrix {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `self * s + other * (1 - s)`, entrywise.
    pub fn lerp(&self, other: &Matrix, s: f64) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| s * a + (1.0 - s) * b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

fn check_probability_vector(v: &[f64], path: &str) -> Result<()> {
    let mut sum = 0.0;
    for (j, &x) in v.iter().enumerate() {
        if !x.is_finite() || !(-tol::REPRESENTATION..=1.0 + tol::REPRESENTATION).contains(&x) {
            return Err(Error::invalid(
                format!("{path}[{j}]"),
                format!("entry {x} is not a probability"),
            ));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > tol::REPRESENTATION {
        return Err(Error::invalid(path, format!("sums to {sum}, expected 1")));
    }
    Ok(())
}

/// The common set of priors, stored as the vertices of its convex hull.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorSet {
    vertices: Vec<Vec<f64>>,
}

impl PriorSet {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyPriorSet);
        }
        let n = vertices[0].len();
        for (i, v) in vertices.iter().enumerate() {
            let path = format!("prior_vertices[{i}]");
            if v.len() != n {
                return Err(Error::invalid(
                    path,
                    format!("has {} entries, expected {n}", v.len()),
                ));
            }
            check_probability_vector(v, &path)?;
        }
        Ok(PriorSet { vertices })
    }

    /// Two-state prior set `[lo, hi]` on the probability of the first state.
    /// Collapses to a single vertex when `lo == hi`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid(
                "prior_vertices",
                format!("interval lower end {lo} exceeds upper end {hi}"),
            ));
        }
        let mut vertices = vec![vec![lo, 1.0 - lo]];
        if hi != lo {
            vertices.push(vec![hi, 1.0 - hi]);
        }
        PriorSet::new(vertices)
    }

    pub fn singleton(p: Vec<f64>) -> Result<Self> {
        PriorSet::new(vec![p])
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn num_states(&self) -> usize {
        self.vertices[0].len()
    }

    /// `(p_L, p_U)`: smallest and largest probability of the first state over
    /// the vertices. Only meaningful for two states.
    pub fn binary_bounds(&self) -> Option<(f64, f64)> {
        if self.num_states() != 2 {
            return None;
        }
        let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi = self
            .vertices
            .iter()
            .map(|v| v[0])
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }
}

#[derive(Serialize, Deserialize)]
struct GameFile {
    states: Vec<String>,
    actions: Vec<String>,
    sender_payoff: Vec<Vec<f64>>,
    receiver_payoff: Vec<Vec<f64>>,
    prior_vertices: Vec<Vec<f64>>,
}

/// States, actions, both payoff matrices and the prior polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    states: Vec<String>,
    actions: Vec<String>,
    sender_payoff: Matrix,
    receiver_payoff: Matrix,
    priors: PriorSet,
}

fn check_labels(labels: &[String], path: &str) -> Result<()> {
    if labels.len() < 2 {
        return Err(Error::invalid(path, "needs at least two labels"));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::invalid(
                format!("{path}[{i}]"),
                format!("duplicate label {l:?}"),
            ));
        }
    }
    Ok(())
}

fn payoff_matrix(rows: Vec<Vec<f64>>, n_actions: usize, n_states: usize, path: &str) -> Result<Matrix> {
    if rows.len() != n_actions {
        return Err(Error::invalid(
            path,
            format!("has {} rows, expected one per action ({n_actions})", rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n_states {
            return Err(Error::invalid(
                format!("{path}[{i}]"),
                format!("has {} entries, expected one per state ({n_states})", row.len()),
            ));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("{path}[{i}][{j}]"), "not a finite real"));
        }
    }
    Matrix::from_rows(rows)
}

impl GameSpec {
    /// Payoff rows are indexed by action, columns by state.
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        sender_payoff: Vec<Vec<f64>>,
        receiver_payoff: Vec<Vec<f64>>,
        priors: PriorSet,
    ) -> Result<Self> {
        check_labels(&states, "states")?;
        check_labels(&actions, "actions")?;
        let sender_payoff = payoff_matrix(sender_payoff, actions.len(), states.len(), "sender_payoff")?;
        let receiver_payoff =
            payoff_matrix(receiver_payoff, actions.len(), states.len(), "receiver_payoff")?;
        if priors.num_states() != states.len() {
            return Err(Error::invalid(
                "prior_vertices[0]",
                format!(
                    "has {} entries, expected one per state ({})",
                    priors.num_states(),
                    states.len()
                ),
            ));
        }
        Ok(GameSpec {
            states,
            actions,
            sender_payoff,
            receiver_payoff,
            priors,
        })
    }

    /// Two-state, two-action game with default labels `w1, w2` and `a, b`.
    pub fn binary(
        sender_payoff: [[f64; 2]; 2],
        receiver_payoff: [[f64; 2]; 2],
        priors: PriorSet,
    ) -> Result<Self> {
        GameSpec::new(
            vec!["w1".into(), "w2".into()],
            vec!["a".into(), "b".into()],
            sender_payoff.iter().map(|r| r.to_vec()).collect(),
            receiver_payoff.iter().map(|r| r.to_vec()).collect(),
            priors,
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let priors = PriorSet::new(file.prior_vertices)?;
        GameSpec::new(
            file.states,
            file.actions,
            file.sender_payoff,
            file.receiver_payoff,
            priors,
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = GameFile {
            states: self.states.clone(),
            actions: self.actions.clone(),
            sender_payoff: self.sender_payoff.to_rows(),
            receiver_payoff: self.receiver_payoff.to_rows(),
            prior_vertices: self.priors.vertices.clone(),
        };
        serde_json::to_string_pretty(&file).expect("game serialization cannot fail")
    }

    pub fn with_priors(&self, priors: PriorSet) -> Result<Self> {
        GameSpec::new(
            self.states.clone(),
            self.actions.clone(),
            self.sender_payoff.to_rows(),
            self.receiver_payoff.to_rows(),
            priors,
        )
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn sender_payoff(&self) -> &Matrix {
        &self.sender_payoff
    }

    pub fn receiver_payoff(&self) -> &Matrix {
        &self.receiver_payoff
    }

    pub fn priors(&self) -> &PriorSet {
        &self.priors
    }

    pub fn is_binary(&self) -> bool {
        self.num_states() == 2 && self.num_actions() == 2
    }

    pub fn require_binary(&self) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(Error::NotBinary {
                states: self.num_states(),
                actions: self.num_actions(),
            })
        }
    }
}

impl Serialize for GameSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GameFile {
            states: self.states.clone(),
            actions: self.actions.clone(),
            sender_payoff: self.sender_payoff.to_rows(),
            receiver_payoff: self.receiver_payoff.to_rows(),
            prior_vertices: self.priors.vertices.clone(),
        }
        .serialize(serializer)
    }
}

/// State-contingent distribution over a finite message set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatisticalExperiment {
    messages: Vec<String>,
    kernel: Matrix,
}

impl StatisticalExperiment {
    /// `kernel` is indexed `(state, message)`; every row must be a
    /// probability vector.
    pub fn new(messages: Vec<String>, kernel: Matrix) -> Result<Self> {
        if kernel.cols() != messages.len() {
            return Err(Error::Dimension(format!(
                "kernel has {} columns for {} messages",
                kernel.cols(),
                messages.len()
            )));
        }
        if kernel.rows() == 0 {
            return Err(Error::Dimension("kernel has no states".into()));
        }
        for i in 0..kernel.rows() {
            check_probability_vector(kernel.row(i), &format!("kernel[{i}]"))?;
        }
        Ok(StatisticalExperiment { messages, kernel })
    }

    /// Canonical experiment for `game`: messages are the game's actions.
    pub fn canonical(game: &GameSpec, kernel: Matrix) -> Result<Self> {
        if kernel.rows() != game.num_states() {
            return Err(Error::Dimension(format!(
                "kernel has {} rows for {} states",
                kernel.rows(),
                game.num_states()
            )));
        }
        StatisticalExperiment::new(game.actions().to_vec(), kernel)
    }

    /// Two-state, two-action canonical experiment with `x = σ(a₀|ω₁)` and
    /// `y = σ(a₀|ω₂)`, where `a₀` is the game's first action.
    pub fn binary(game: &GameSpec, x: f64, y: f64) -> Result<Self> {
        game.require_binary()?;
        let kernel = Matrix::from_rows(vec![vec![x, 1.0 - x], vec![y, 1.0 - y]])?;
        StatisticalExperiment::canonical(game, kernel)
    }

    /// Reveals the state exactly when `n_states == n_actions`, each state
    /// mapped to the receiver-optimal action of that state.
    pub fn fully_revealing(game: &GameSpec) -> Result<Self> {
        let u = game.receiver_payoff();
        let mut kernel = Matrix::zeros(game.num_states(), game.num_actions());
        for w in 0..game.num_states() {
            let best = (0..game.num_actions())
                .max_by(|&a, &b| u[(a, w)].total_cmp(&u[(b, w)]))
                .expect("at least two actions");
            kernel[(w, best)] = 1.0;
        }
        StatisticalExperiment::canonical(game, kernel)
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    pub fn kernel(&self) -> &Matrix {
        &self.kernel
    }

    pub fn num_states(&self) -> usize {
        self.kernel.rows()
    }

    pub fn num_messages(&self) -> usize {
        self.kernel.cols()
    }

    pub fn is_canonical_for(&self, game: &GameSpec) -> bool {
        self.messages == game.actions() && self.num_states() == game.num_states()
    }

    pub fn require_canonical(&self, game: &GameSpec) -> Result<()> {
        if self.is_canonical_for(game) {
            Ok(())
        } else {
            Err(Error::NonCanonical(format!(
                "messages {:?} differ from actions {:?}",
                self.messages,
                game.actions()
            )))
        }
    }

    /// `s * self + (1 - s) * other`.
    pub fn mix(&self, other: &StatisticalExperiment, s: f64) -> Result<Self> {
        if self.messages != other.messages || self.num_states() != other.num_states() {
            return Err(Error::Dimension("experiments do not share states and messages".into()));
        }
        StatisticalExperiment::new(self.messages.clone(), self.kernel.lerp(&other.kernel, s))
    }
}

/// Finitely generated ambiguous experiment; stands for the convex hull of its
/// generators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmbiguousExperiment {
    generators: Vec<StatisticalExperiment>,
}

impl AmbiguousExperiment {
    /// Generators within `1e-12` of an earlier one are dropped.
    pub fn new(generators: Vec<StatisticalExperiment>) -> Result<Self> {
        let first = generators.first().ok_or(Error::EmptyGenerators)?;
        let (messages, n_states) = (first.messages.clone(), first.num_states());
        let mut kept: Vec<StatisticalExperiment> = Vec::with_capacity(generators.len());
        for (j, g) in generators.into_iter().enumerate() {
            if g.messages != messages || g.num_states() != n_states {
                return Err(Error::invalid(
                    format!("generators[{j}]"),
                    "does not share the states and messages of generators[0]",
                ));
            }
            if kept
                .iter()
                .all(|k| k.kernel.max_abs_diff(&g.kernel) > tol::REPRESENTATION)
            {
                kept.push(g);
            }
        }
        Ok(AmbiguousExperiment { generators: kept })
    }

    pub fn singleton(sigma: StatisticalExperiment) -> Self {
        AmbiguousExperiment {
            generators: vec![sigma],
        }
    }

    pub fn generators(&self) -> &[StatisticalExperiment] {
        &self.generators
    }

    pub fn messages(&self) -> &[String] {
        &self.generators[0].messages
    }

    pub fn is_canonical_for(&self, game: &GameSpec) -> bool {
        self.generators[0].is_canonical_for(game)
    }

    pub fn require_canonical(&self, game: &GameSpec) -> Result<()> {
        self.generators[0].require_canonical(game)
    }

    /// Convex combination of the generators with the given weights.
    pub fn combination(&self, weights: &[f64]) -> Result<StatisticalExperiment> {
        if weights.len() != self.generators.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} generators",
                weights.len(),
                self.generators.len()
            )));
        }
        let g0 = &self.generators[0];
        let mut kernel = Matrix::zeros(g0.num_states(), g0.num_messages());
        for (g, &w) in self.generators.iter().zip(weights) {
            for i in 0..kernel.rows() {
                for j in 0..kernel.cols() {
                    kernel[(i, j)] += w * g.kernel[(i, j)];
                }
            }
        }
        StatisticalExperiment::new(g0.messages.clone(), kernel)
    }
}

/// Message-contingent mixed action plan, `kernel` indexed `(message, action)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReceiverStrategy {
    kernel: Matrix,
}

impl ReceiverStrategy {
    pub fn new(kernel: Matrix) -> Result<Self> {
        for m in 0..kernel.rows() {
            check_probability_vector(kernel.row(m), &format!("strategy[{m}]"))?;
        }
        Ok(ReceiverStrategy { kernel })
    }

    /// The obedient strategy: follow every recommendation.
    pub fn obedient(n_actions: usize) -> Self {
        ReceiverStrategy {
            kernel: Matrix::identity(n_actions),
        }
    }

    /// Every message answered with `action`.
    pub fn constant(n_messages: usize, n_actions: usize, action: usize) -> Self {
        let mut kernel = Matrix::zeros(n_messages, n_actions);
        for m in 0..n_messages {
            kernel[(m, action)] = 1.0;
        }
        ReceiverStrategy { kernel }
    }

    pub fn kernel(&self) -> &Matrix {
        &self.kernel
    }

    pub fn num_messages(&self) -> usize {
        self.kernel.rows()
    }

    pub fn num_actions(&self) -> usize {
        self.kernel.cols()
    }

    /// Follows `self`, then garbles the chosen action through `delta`:
    /// `τ'(a|m) = Σ_{a'} δ(a|a') τ(a'|m)`.
    pub fn then(&self, delta: &ReceiverStrategy) -> Result<ReceiverStrategy> {
        ReceiverStrategy::new(self.kernel.matmul(&delta.kernel)?)
    }
}

/// Probability mass over `(state, action)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointDistribution {
    mass: Matrix,
}

impl JointDistribution {
    pub fn new(mass: Matrix) -> Result<Self> {
        let mut total = 0.0;
        for &x in mass.as_slice() {
            if x.is_nan() || x < -tol::TIE {
                return Err(Error::invalid("mass", format!("negative entry {x}")));
            }
            total += x;
        }
        if (total - 1.0).abs() > tol::TIE {
            return Err(Error::invalid("mass", format!("total {total}, expected 1")));
        }
        Ok(JointDistribution { mass })
    }

    pub fn mass(&self) -> &Matrix {
        &self.mass
    }

    /// `π_a`: the column of mass on `action`, as a vector over states.
    pub fn slice(&self, action: usize) -> Vec<f64> {
        self.mass.column(action)
    }

    /// Convex combination `Σ wᵢ πᵢ`.
    pub fn mixture(parts: &[(f64, &JointDistribution)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::Dimension("empty mixture".into()))?;
        let mut mass = Matrix::zeros(first.mass.rows(), first.mass.cols());
        for (w, pi) in parts {
            for i in 0..mass.rows() {
                for j in 0..mass.cols() {
                    mass[(i, j)] += w * pi.mass[(i, j)];
                }
            }
        }
        JointDistribution::new(mass)
    }
}

fn check_prior(p: &[f64], n_states: usize) -> Result<()> {
    if p.len() != n_states {
        return Err(Error::Dimension(format!(
            "prior has {} entries for {n_states} states",
            p.len()
        )));
    }
    Ok(())
}

/// `Σ_{ω,m,a} p(ω) σ(m|ω) τ(a|m) u(a,ω)`.
pub fn expected_payoff(
    p: &[f64],
    sigma: &StatisticalExperiment,
    tau: &ReceiverStrategy,
    u: &Matrix,
) -> Result<f64> {
    let (n_states, n_messages) = (sigma.num_states(), sigma.num_messages());
    check_prior(p, n_states)?;
    if tau.num_messages() != n_messages {
        return Err(Error::Dimension(format!(
            "strategy has {} message rows, experiment has {n_messages} messages",
            tau.num_messages()
        )));
    }
    if u.rows() != tau.num_actions() || u.cols() != n_states {
        return Err(Error::Dimension(format!(
            "payoff is {}x{}, expected {}x{n_states}",
            u.rows(),
            u.cols(),
            tau.num_actions()
        )));
    }
    let mut total = 0.0;
    for w in 0..n_states {
        for m in 0..n_messages {
            let sm = sigma.kernel[(w, m)];
            for a in 0..tau.num_actions() {
                total += p[w] * sm * tau.kernel[(m, a)] * u[(a, w)];
            }
        }
    }
    Ok(total)
}

/// Payoff of a canonical experiment under the obedient strategy,
/// `Σ_{ω,a} p(ω) σ(a|ω) u(a,ω)`. No dimension checks.
pub(crate) fn obedient_payoff(p: &[f64], sigma: &StatisticalExperiment, u: &Matrix) -> f64 {
    let k = &sigma.kernel;
    let mut total = 0.0;
    for w in 0..k.rows() {
        let mut row = 0.0;
        for a in 0..k.cols() {
            row += k[(w, a)] * u[(a, w)];
        }
        total += p[w] * row;
    }
    total
}

/// Minimum and the indices attaining it within the tie tolerance.
pub(crate) fn argmin_within<T: Copy>(values: impl IntoIterator<Item = (T, f64)>) -> (f64, Vec<T>) {
    let values: Vec<(T, f64)> = values.into_iter().collect();
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let argmin = values
        .iter()
        .filter(|v| v.1 <= min + tol::TIE)
        .map(|v| v.0)
        .collect();
    (min, argmin)
}

/// Maxmin value over the prior set for a single experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeuValue {
    pub value: f64,
    /// Prior vertices attaining the minimum within `1e-10`.
    pub argmin_vertices: Vec<usize>,
}

pub fn meu_payoff(
    sigma: &StatisticalExperiment,
    tau: &ReceiverStrategy,
    u: &Matrix,
    priors: &PriorSet,
) -> Result<MeuValue> {
    let values = priors
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, p)| expected_payoff(p, sigma, tau, u).map(|v| (i, v)))
        .collect::<Result<Vec<_>>>()?;
    let (value, argmin_vertices) = argmin_within(values);
    Ok(MeuValue {
        value,
        argmin_vertices,
    })
}

/// Maxmin value over priors and the members of an ambiguous experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmbiguousMeuValue {
    pub value: f64,
    /// `(prior vertex, generator)` pairs attaining the minimum within `1e-10`.
    pub argmin: Vec<(usize, usize)>,
}

/// The objective is bilinear in (prior, experiment), so the minimum over both
/// hulls is attained at a pair of vertices.
pub fn ambiguous_meu_payoff(
    sigma_set: &AmbiguousExperiment,
    tau: &ReceiverStrategy,
    u: &Matrix,
    priors: &PriorSet,
) -> Result<AmbiguousMeuValue> {
    let mut values = Vec::new();
    for (i, p) in priors.vertices().iter().enumerate() {
        for (j, sigma) in sigma_set.generators().iter().enumerate() {
            values.push(((i, j), expected_payoff(p, sigma, tau, u)?));
        }
    }
    let (value, argmin) = argmin_within(values);
    Ok(AmbiguousMeuValue { value, argmin })
}

/// `π(ω,a) = p(ω) σ(a|ω)` for a canonical experiment.
pub fn induced_joint(
    p: &[f64],
    sigma: &StatisticalExperiment,
    game: &GameSpec,
) -> Result<JointDistribution> {
    sigma.require_canonical(game)?;
    check_prior(p, game.num_states())?;
    let mut mass = Matrix::zeros(game.num_states(), game.num_actions());
    for w in 0..game.num_states() {
        for a in 0..game.num_actions() {
            mass[(w, a)] = p[w] * sigma.kernel[(w, a)];
        }
    }
    JointDistribution::new(mass)
}

/// Pushes every generator through `tau`, producing experiments whose messages
/// are the game's actions: `σ*(a|ω) = Σ_m σ(m|ω) τ(a|m)`. Payoffs under
/// `(σ, τ)` equal payoffs under `(σ*, τ*)` for every prior and payoff matrix.
pub fn canonicalize(
    sigma_set: &AmbiguousExperiment,
    tau: &ReceiverStrategy,
    game: &GameSpec,
) -> Result<AmbiguousExperiment> {
    if tau.num_messages() != sigma_set.messages().len() {
        return Err(Error::Dimension(format!(
            "strategy covers {} messages, experiment has {}",
            tau.num_messages(),
            sigma_set.messages().len()
        )));
    }
    if tau.num_actions() != game.num_actions() {
        return Err(Error::Dimension(format!(
            "strategy has {} actions, game has {}",
            tau.num_actions(),
            game.num_actions()
        )));
    }
    let generators = sigma_set
        .generators()
        .iter()
        .map(|g| {
            if g.num_states() != game.num_states() {
                return Err(Error::Dimension("experiment and game disagree on states".into()));
            }
            StatisticalExperiment::canonical(game, g.kernel.matmul(&tau.kernel)?)
        })
        .collect::<Result<Vec<_>>>()?;
    AmbiguousExperiment::new(generators)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Receiver wants to match the state: `u_r(a,ω₂) = u_r(b,ω₁) = 1`.
    /// Sender wants action `a` regardless of the state.
    pub fn g0(priors: PriorSet) -> GameSpec {
        GameSpec::binary([[1.0, 1.0], [0.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]], priors).unwrap()
    }

    pub fn g0_interval(lo: f64, hi: f64) -> GameSpec {
        g0(PriorSet::interval(lo, hi).unwrap())
    }

    pub fn sigma(game: &GameSpec, x: f64, y: f64) -> StatisticalExperiment {
        StatisticalExperiment::binary(game, x, y).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn brute_force(p: &[f64], s: &StatisticalExperiment, t: &ReceiverStrategy, u: &Matrix) -> f64 {
        let mut acc = 0.0;
        for (w, pw) in p.iter().enumerate() {
            for m in 0..s.num_messages() {
                for a in 0..t.num_actions() {
                    acc += pw * s.kernel()[(w, m)] * t.kernel()[(m, a)] * u[(a, w)];
                }
            }
        }
        acc
    }

    #[test]
    fn fully_revealing_matches_state() {
        let g = g0_interval(0.3, 0.3);
        let s = sigma(&g, 0.0, 1.0);
        let tau = ReceiverStrategy::obedient(2);
        let v = expected_payoff(&[0.3, 0.7], &s, &tau, g.receiver_payoff()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_payoff_is_zero() {
        let g = g0_interval(0.3, 0.3);
        let s = sigma(&g, 0.4, 0.9);
        let tau = ReceiverStrategy::obedient(2);
        assert_eq!(expected_payoff(&[0.3, 0.7], &s, &tau, &Matrix::zeros(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn sender_payoff_worked_value() {
        let g = g0_interval(0.7, 0.7);
        let s = sigma(&g, 3.0 / 7.0, 1.0);
        let tau = ReceiverStrategy::obedient(2);
        let v = expected_payoff(&[0.7, 0.3], &s, &tau, g.sender_payoff()).unwrap();
        let oracle = brute_force(&[0.7, 0.3], &s, &tau, g.sender_payoff());
        assert!((v - 0.6).abs() < 1e-12);
        assert!((v - oracle).abs() < 1e-15);
    }

    #[test]
    fn payoff_dimension_mismatch() {
        let g = g0_interval(0.3, 0.3);
        let s = sigma(&g, 0.4, 0.9);
        let tau = ReceiverStrategy::obedient(3);
        assert!(matches!(
            expected_payoff(&[0.3, 0.7], &s, &tau, g.receiver_payoff()),
            Err(Error::Dimension(_))
        ));
        let tau = ReceiverStrategy::obedient(2);
        assert!(expected_payoff(&[0.3, 0.3, 0.4], &s, &tau, g.receiver_payoff()).is_err());
    }

    #[test]
    fn meu_examples() {
        let g = g0_interval(0.4, 0.6);
        let tau = ReceiverStrategy::obedient(2);
        let full = meu_payoff(&sigma(&g, 0.0, 1.0), &tau, g.receiver_payoff(), g.priors()).unwrap();
        assert!((full.value - 1.0).abs() < 1e-15);
        assert_eq!(full.argmin_vertices, vec![0, 1]);

        let r = meu_payoff(&sigma(&g, 0.2, 1.0), &tau, g.receiver_payoff(), g.priors()).unwrap();
        // dense grid oracle over p
        let grid_min = (0..=2000)
            .map(|i| 0.4 + 0.2 * i as f64 / 2000.0)
            .map(|p| brute_force(&[p, 1.0 - p], &sigma(&g, 0.2, 1.0), &tau, g.receiver_payoff()))
            .fold(f64::INFINITY, f64::min);
        assert!((r.value - 0.88).abs() < 1e-12);
        assert!((r.value - grid_min).abs() < 1e-12);
        assert_eq!(r.argmin_vertices, vec![1]);
    }

    #[test]
    fn meu_singleton_equals_expected() {
        let g = g0_interval(0.35, 0.35);
        let tau = ReceiverStrategy::obedient(2);
        let s = sigma(&g, 0.3, 0.8);
        let r = meu_payoff(&s, &tau, g.sender_payoff(), g.priors()).unwrap();
        let e = expected_payoff(&[0.35, 0.65], &s, &tau, g.sender_payoff()).unwrap();
        assert_eq!(r.value, e);
    }

    #[test]
    fn ambiguous_meu_examples() {
        let g = g0_interval(0.4, 0.6);
        let tau = ReceiverStrategy::obedient(2);
        let set = AmbiguousExperiment::new(vec![sigma(&g, 0.2, 1.0), sigma(&g, 0.0, 0.8)]).unwrap();
        let r = ambiguous_meu_payoff(&set, &tau, g.sender_payoff(), g.priors()).unwrap();
        // 2-D grid oracle over (p, mixing weight)
        let mut grid_min = f64::INFINITY;
        for i in 0..=200 {
            let p = 0.4 + 0.2 * i as f64 / 200.0;
            for j in 0..=200 {
                let s = set.generators()[0].mix(&set.generators()[1], j as f64 / 200.0).unwrap();
                grid_min = grid_min.min(brute_force(&[p, 1.0 - p], &s, &tau, g.sender_payoff()));
            }
        }
        assert!((r.value - 0.32).abs() < 1e-12);
        assert!((r.value - grid_min).abs() < 1e-12);
        assert_eq!(r.argmin, vec![(1, 1)]);

        let constant = Matrix::from_rows(vec![vec![2.5, 2.5], vec![2.5, 2.5]]).unwrap();
        let c = ambiguous_meu_payoff(&set, &tau, &constant, g.priors()).unwrap();
        assert!((c.value - 2.5).abs() < 1e-15);

        let single = AmbiguousExperiment::singleton(sigma(&g, 0.2, 1.0));
        let a = ambiguous_meu_payoff(&single, &tau, g.receiver_payoff(), g.priors()).unwrap();
        let m = meu_payoff(&sigma(&g, 0.2, 1.0), &tau, g.receiver_payoff(), g.priors()).unwrap();
        assert_eq!(a.value, m.value);
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert!(matches!(PriorSet::new(vec![]), Err(Error::EmptyPriorSet)));
        assert!(matches!(AmbiguousExperiment::new(vec![]), Err(Error::EmptyGenerators)));
    }

    #[test]
    fn induced_joint_examples() {
        let g = g0_interval(0.6, 0.6);
        let pi = induced_joint(&[1.0, 0.0], &sigma(&g, 0.3, 0.9), &g).unwrap();
        assert_eq!(pi.mass().to_rows(), vec![vec![0.3, 0.7], vec![0.0, 0.0]]);

        let pi = induced_joint(&[0.5, 0.5], &sigma(&g, 0.0, 1.0), &g).unwrap();
        assert_eq!(pi.mass().to_rows(), vec![vec![0.0, 0.5], vec![0.5, 0.0]]);

        let pi = induced_joint(&[0.6, 0.4], &sigma(&g, 0.2, 1.0), &g).unwrap();
        let expected = [[0.6 * 0.2, 0.6 * 0.8], [0.4 * 1.0, 0.4 * 0.0]];
        for (w, row) in expected.iter().enumerate() {
            for (a, want) in row.iter().enumerate() {
                assert!((pi.mass()[(w, a)] - want).abs() < 1e-15);
            }
        }
        assert!((pi.mass()[(0, 0)] - 0.12).abs() < 1e-15);
        assert!((pi.mass()[(0, 1)] - 0.48).abs() < 1e-15);
    }

    #[test]
    fn induced_joint_rejects_non_canonical() {
        let g = g0_interval(0.6, 0.6);
        let s = StatisticalExperiment::new(
            vec!["m1".into(), "m2".into()],
            Matrix::identity(2),
        )
        .unwrap();
        assert!(matches!(induced_joint(&[0.5, 0.5], &s, &g), Err(Error::NonCanonical(_))));
    }

    #[test]
    fn canonicalize_examples() {
        let g = g0_interval(0.6, 0.6);
        let set = AmbiguousExperiment::new(vec![sigma(&g, 0.2, 1.0), sigma(&g, 0.5, 0.5)]).unwrap();
        let same = canonicalize(&set, &ReceiverStrategy::obedient(2), &g).unwrap();
        assert_eq!(same, set);

        let constant = canonicalize(&set, &ReceiverStrategy::constant(2, 2, 0), &g).unwrap();
        assert_eq!(constant.generators().len(), 1);
        assert_eq!(constant.generators()[0].kernel().column(0), vec![1.0, 1.0]);

        let raw = StatisticalExperiment::new(
            vec!["m1".into(), "m2".into()],
            Matrix::identity(2),
        )
        .unwrap();
        let tau = ReceiverStrategy::new(
            Matrix::from_rows(vec![vec![0.3, 0.7], vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let star = canonicalize(&AmbiguousExperiment::singleton(raw.clone()), &tau, &g).unwrap();
        let s = &star.generators()[0];
        assert!((s.kernel()[(0, 0)] - 0.3).abs() < 1e-15);
        assert!((s.kernel()[(1, 0)] - 1.0).abs() < 1e-15);
        assert!(s.is_canonical_for(&g));
        // payoff equality oracle
        let obedient = ReceiverStrategy::obedient(2);
        for p in [0.1, 0.5, 0.93] {
            for u in [g.sender_payoff(), g.receiver_payoff()] {
                let before = brute_force(&[p, 1.0 - p], &raw, &tau, u);
                let after = brute_force(&[p, 1.0 - p], s, &obedient, u);
                assert!((before - after).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn game_validation_names_fields() {
        let json = r#"{"states":["w1","w2"],"actions":["a","b"],
            "sender_payoff":[[1,1],[0,0]],"receiver_payoff":[[0,1],[1,0]],
            "prior_vertices":[[0.5,0.4]]}"#;
        let err = GameSpec::from_json_str(json).unwrap_err().to_string();
        assert!(err.contains("prior_vertices[0]"), "{err}");

        let json = r#"{"states":["w1","w2"],"actions":["a","b"],
            "receiver_payoff":[[0,1],[1,0]],"prior_vertices":[[0.5,0.5]]}"#;
        let err = GameSpec::from_json_str(json).unwrap_err().to_string();
        assert!(err.contains("sender_payoff"), "{err}");

        let json = r#"{"states":["w1","w2"],"actions":["a","b"],
            "sender_payoff":[[1,1],[0]],"receiver_payoff":[[0,1],[1,0]],
            "prior_vertices":[[0.5,0.5]]}"#;
        let err = GameSpec::from_json_str(json).unwrap_err().to_string();
        assert!(err.contains("sender_payoff[1]"), "{err}");
    }

    #[test]
    fn game_json_round_trip() {
        let g = g0(PriorSet::new(vec![vec![0.1, 0.9], vec![1.0 / 3.0, 2.0 / 3.0]]).unwrap());
        let back = GameSpec::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn duplicate_generators_are_dropped() {
        let g = g0_interval(0.6, 0.6);
        let set = AmbiguousExperiment::new(vec![
            sigma(&g, 0.2, 1.0),
            sigma(&g, 0.2 + 1e-14, 1.0),
            sigma(&g, 0.3, 1.0),
        ])
        .unwrap();
        assert_eq!(set.generators().len(), 2);
    }

    #[test]
    fn row_sums_are_checked() {
        let m = Matrix::from_rows(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap();
        assert!(StatisticalExperiment::new(vec!["a".into(), "b".into()], m).is_err());
    }
}
