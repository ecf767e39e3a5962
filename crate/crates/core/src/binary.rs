//! Two states, two actions: the geometry behind the no-gain result.
//!
//! Write `v = u_r(b,·) − u_r(a,·)`. When `v` has mixed signs the game is
//! relabelled (actions swapped if needed) and scaled so that `v = (1, −k)`
//! with `k > 0`. In those coordinates, for `x = σ(a|ω₁)`, `y = σ(a|ω₂)` and
//! `p` the probability of `ω₁`:
//!
//! * `Φ_{a→b}(p,σ) = p·x − k(1−p)·y` and `Φ_{b→a} = Φ_{a→b} + k − (1+k)p`;
//!   obedience at `p` is `Φ_{a→b} ≤ min{0, (1+k)p − k}`.
//! * The receiver's obedient payoff is the line `M(σ)p + N(σ)` with
//!   `M = w₁ − w₂ + (1−x) + k(1−y)`, `N = w₂ − k(1−y)`, `w = u_r(a,·)` scaled.
//!   The worst prior is `p_L` when `M > 0`, `p_U` when `M < 0`, and the whole
//!   interval when `M = 0`.
//!
//! [`construct_sigma_hat`] takes an obedient ambiguous experiment, splits an
//! obedient point of `K*(Σ)` into a `p_L` part and a `p_U` part, and mixes the
//! two parts' experiments so that `M(σ̂) = 0`. That `σ̂` is a member of `Σ`
//! and is obedient as a statistical experiment.
//!
//! Public values are always in the game's original labels; the relabelling is
//! internal.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result, ViolationReport};
use crate::hull;
use crate::model::{induced_joint, AmbiguousExperiment, GameSpec, JointDistribution, StatisticalExperiment};
use crate::obedience::{
    ambiguous_obedience, k_star, statistical_obedience, worst_case_priors, ObedienceWitness, WitnessKind,
};
use crate::tol;

/// Relabelling applied before scaling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Orientation {
    /// The game's second action plays the role of `a`.
    pub actions_swapped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinaryNormalization {
    pub k: f64,
    /// Scaled `u_r(a, ω₁), u_r(a, ω₂)` for the oriented `a`.
    pub w: [f64; 2],
    pub scale: f64,
    pub orientation: Orientation,
    /// `v ≥ 0` or `v ≤ 0` componentwise; `k`, `w` and `scale` are unused.
    pub degenerate: bool,
}

/// Canonical two-action experiment: `x = σ(a₀|ω₁)`, `y = σ(a₀|ω₂)` where
/// `a₀` is the game's first action.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinaryExperiment {
    pub x: f64,
    pub y: f64,
}

impl BinaryExperiment {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let ok = |v: f64| (-tol::REPRESENTATION..=1.0 + tol::REPRESENTATION).contains(&v);
        if !ok(x) || !ok(y) {
            return Err(Error::invalid("binary_experiment", format!("({x}, {y}) outside [0,1]²")));
        }
        Ok(BinaryExperiment { x, y })
    }

    pub fn from_experiment(sigma: &StatisticalExperiment, game: &GameSpec) -> Result<Self> {
        game.require_binary()?;
        sigma.require_canonical(game)?;
        Ok(BinaryExperiment {
            x: sigma.kernel()[(0, 0)],
            y: sigma.kernel()[(1, 0)],
        })
    }

    pub fn to_experiment(self, game: &GameSpec) -> Result<StatisticalExperiment> {
        StatisticalExperiment::binary(game, self.x, self.y)
    }

    /// `s * self + (1 - s) * other`.
    pub fn lerp(self, other: BinaryExperiment, s: f64) -> Self {
        BinaryExperiment {
            x: s * self.x + (1.0 - s) * other.x,
            y: s * self.y + (1.0 - s) * other.y,
        }
    }

    pub fn point(self) -> hull::Point {
        [self.x, self.y]
    }
}

/// Receiver's obedient payoff as a function of the prior, in normalized units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinaryLine {
    pub slope: f64,
    pub intercept: f64,
}

impl BinaryLine {
    pub fn at(&self, p: f64) -> f64 {
        self.slope * p + self.intercept
    }
}

impl BinaryNormalization {
    fn require_mixed(&self) -> Result<()> {
        if self.degenerate {
            Err(Error::Degenerate)
        } else {
            Ok(())
        }
    }

    /// `(x, y)` in the oriented labelling.
    fn oriented(&self, sigma: BinaryExperiment) -> (f64, f64) {
        if self.orientation.actions_swapped {
            (1.0 - sigma.x, 1.0 - sigma.y)
        } else {
            (sigma.x, sigma.y)
        }
    }

    /// `u_r(a₁,·) − u_r(a₀,·)` in original labels, rebuilt from `k`, the
    /// scale and the orientation.
    pub fn deviation(&self) -> [f64; 2] {
        let v = [1.0 / self.scale, -self.k / self.scale];
        if self.orientation.actions_swapped {
            [-v[0], -v[1]]
        } else {
            v
        }
    }

    pub fn line(&self, sigma: BinaryExperiment) -> Result<BinaryLine> {
        self.require_mixed()?;
        let (x, y) = self.oriented(sigma);
        Ok(BinaryLine {
            slope: self.w[0] - self.w[1] + (1.0 - x) + self.k * (1.0 - y),
            intercept: self.w[1] - self.k * (1.0 - y),
        })
    }

    /// Obedience tolerance in normalized units, matching the half-space
    /// test's tolerance in the game's own units.
    fn feasibility(&self) -> f64 {
        tol::FEASIBILITY * self.scale
    }
}

pub fn normalize(game: &GameSpec) -> Result<BinaryNormalization> {
    game.require_binary()?;
    let u = game.receiver_payoff();
    let v = [u[(1, 0)] - u[(0, 0)], u[(1, 1)] - u[(0, 1)]];
    if (v[0] >= 0.0 && v[1] >= 0.0) || (v[0] <= 0.0 && v[1] <= 0.0) {
        return Ok(BinaryNormalization {
            k: 0.0,
            w: [u[(0, 0)], u[(0, 1)]],
            scale: 1.0,
            orientation: Orientation {
                actions_swapped: false,
            },
            degenerate: true,
        });
    }
    let swapped = v[0] < 0.0;
    let (a, oriented) = if swapped { (1, [-v[0], -v[1]]) } else { (0, v) };
    let scale = 1.0 / oriented[0];
    Ok(BinaryNormalization {
        k: -oriented[1] * scale,
        w: [u[(a, 0)] * scale, u[(a, 1)] * scale],
        scale,
        orientation: Orientation {
            actions_swapped: swapped,
        },
        degenerate: false,
    })
}

/// `(Φ_{a→b}(p,σ), Φ_{b→a}(p,σ))` in the oriented, normalized labelling.
pub fn phi(p: f64, sigma: BinaryExperiment, norm: &BinaryNormalization) -> Result<(f64, f64)> {
    norm.require_mixed()?;
    let (x, y) = norm.oriented(sigma);
    let k = norm.k;
    let ab = p * x - k * (1.0 - p) * y;
    Ok((ab, ab + k - (1.0 + k) * p))
}

/// `Φ_{a→b}(p,σ) ≤ min{0, (1+k)p − k}` up to the feasibility tolerance.
pub fn binary_obedience(p: f64, sigma: BinaryExperiment, norm: &BinaryNormalization) -> Result<bool> {
    let (ab, _) = phi(p, sigma, norm)?;
    let k = norm.k;
    Ok(ab <= 0.0_f64.min((1.0 + k) * p - k) + norm.feasibility())
}

/// Generators whose pairing with `p_L` (resp. `p_U`) lies in `K*(Σ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceSplit {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

pub fn split_faces(sigma_set: &AmbiguousExperiment, game: &GameSpec) -> Result<FaceSplit> {
    normalize(game)?.require_mixed()?;
    let (p_lo, p_hi) = game.priors().binary_bounds().expect("binary game");
    let face = k_star(sigma_set, game)?;
    let vertices = game.priors().vertices();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for &(i, j) in &face.minimizing_pairs {
        let p = vertices[i][0];
        if (p - p_lo).abs() <= tol::REPRESENTATION && !lower.contains(&j) {
            lower.push(j);
        }
        if (p - p_hi).abs() <= tol::REPRESENTATION && !upper.contains(&j) {
            upper.push(j);
        }
    }
    lower.sort_unstable();
    upper.sort_unstable();
    Ok(FaceSplit { lower, upper })
}

/// `π = α·π^(p_L,σ_L) + (1−α)·π^(p_U,σ_U)` with the generator weights that
/// build `σ_L` and `σ_U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub sigma_l: BinaryExperiment,
    pub sigma_u: BinaryExperiment,
    pub alpha: f64,
    pub lower_weights: Vec<f64>,
    pub upper_weights: Vec<f64>,
}

fn average(set: &AmbiguousExperiment, game: &GameSpec, weights: &[f64]) -> Result<BinaryExperiment> {
    let total: f64 = weights.iter().sum();
    let normalized: Vec<f64> = weights.iter().map(|w| w / total).collect();
    BinaryExperiment::from_experiment(&set.combination(&normalized)?, game)
}

/// Aggregates a face witness by prior: weight on a pair with an interior
/// prior vertex is split between `p_L` and `p_U` in proportion to its
/// position, which is exact since `p × σ` is linear in `p`. If one side
/// carries no weight, it is set equal to the other side.
pub fn decompose_obedient_pi(
    witness: &ObedienceWitness,
    sigma_set: &AmbiguousExperiment,
    game: &GameSpec,
) -> Result<Decomposition> {
    game.require_binary()?;
    if witness.kind == WitnessKind::Joint || witness.weights.is_empty() {
        return Err(Error::MalformedWitness("no face weights".into()));
    }
    let total: f64 = witness.weights.iter().map(|w| w.w).sum();
    if witness.weights.iter().any(|w| w.w < 0.0) || (total - 1.0).abs() > tol::TIE {
        return Err(Error::MalformedWitness(format!("weights sum to {total}")));
    }
    let (p_lo, p_hi) = game.priors().binary_bounds().expect("binary game");
    let vertices = game.priors().vertices();
    let n = sigma_set.generators().len();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for w in &witness.weights {
        let p = vertices
            .get(w.prior_vertex)
            .ok_or_else(|| Error::MalformedWitness(format!("prior vertex {}", w.prior_vertex)))?[0];
        if w.generator >= n {
            return Err(Error::MalformedWitness(format!("generator {}", w.generator)));
        }
        let t = if p_hi - p_lo > tol::REPRESENTATION {
            ((p_hi - p) / (p_hi - p_lo)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        lower[w.generator] += w.w * t;
        upper[w.generator] += w.w * (1.0 - t);
    }
    let alpha: f64 = lower.iter().sum();
    let beta: f64 = upper.iter().sum();
    let (sigma_l, sigma_u) = match (alpha > 0.0, beta > 0.0) {
        (true, true) => (average(sigma_set, game, &lower)?, average(sigma_set, game, &upper)?),
        (true, false) => {
            upper = lower.clone();
            let s = average(sigma_set, game, &lower)?;
            (s, s)
        }
        (false, true) => {
            lower = upper.clone();
            let s = average(sigma_set, game, &upper)?;
            (s, s)
        }
        (false, false) => unreachable!("weights sum to one"),
    };
    let normalize_weights = |w: &mut Vec<f64>| {
        let t: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= t);
    };
    normalize_weights(&mut lower);
    normalize_weights(&mut upper);
    let alpha = alpha / (alpha + beta);

    let pi = witness.joint(sigma_set, game)?;
    let rebuilt = JointDistribution::mixture(&[
        (alpha, &induced_joint(&[p_lo, 1.0 - p_lo], &sigma_l.to_experiment(game)?, game)?),
        (1.0 - alpha, &induced_joint(&[p_hi, 1.0 - p_hi], &sigma_u.to_experiment(game)?, game)?),
    ])?;
    let err = pi.mass().max_abs_diff(rebuilt.mass());
    if err > tol::TIE {
        return Err(Error::MalformedWitness(format!(
            "decomposition misses the witness joint by {err:e}"
        )));
    }
    Ok(Decomposition {
        sigma_l,
        sigma_u,
        alpha,
        lower_weights: lower,
        upper_weights: upper,
    })
}

/// Output of the constructive no-gain argument.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionWitness {
    pub sigma_l: BinaryExperiment,
    pub sigma_u: BinaryExperiment,
    pub alpha: f64,
    pub p_l: f64,
    pub p_u: f64,
    pub p_alpha: f64,
    pub lambda: f64,
    pub sigma_hat: BinaryExperiment,
    /// Slope of the receiver's payoff line at `σ̂` (normalized units).
    pub slope_at_sigma_hat: f64,
    /// `σ̂` as a convex combination of the generators.
    pub generator_weights: Vec<f64>,
    /// Distance from `σ̂` to the planar hull of the generators.
    pub hull_distance: f64,
    pub statistical_witness: ObedienceWitness,
}

impl DecompositionWitness {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serialization cannot fail")
    }
}

fn violation(
    message: &str,
    game: &GameSpec,
    sigma_set: &AmbiguousExperiment,
    detail: serde_json::Value,
) -> Error {
    let generators: Vec<[f64; 2]> = sigma_set
        .generators()
        .iter()
        .map(|g| [g.kernel()[(0, 0)], g.kernel()[(1, 0)]])
        .collect();
    Error::TheoremViolation(Box::new(ViolationReport {
        message: message.to_string(),
        diagnostics: json!({
            "game": game,
            "generators": generators,
            "detail": detail,
        }),
    }))
}

/// Builds an obedient member `σ̂ = λσ_L + (1−λ)σ_U` of an obedient ambiguous
/// experiment.
///
/// Errors with `Precondition` if `Σ` is not obedient and with
/// `TheoremViolation` if any step of the construction fails to hold.
pub fn construct_sigma_hat(sigma_set: &AmbiguousExperiment, game: &GameSpec) -> Result<DecompositionWitness> {
    let norm = normalize(game)?;
    norm.require_mixed()?;
    sigma_set.require_canonical(game)?;
    let witness = ambiguous_obedience(sigma_set, game)?
        .ok_or_else(|| Error::Precondition("ambiguous experiment is not obedient".into()))?;
    let dec = decompose_obedient_pi(&witness, sigma_set, game)?;
    let (p_lo, p_hi) = game.priors().binary_bounds().expect("binary game");
    let width = p_hi - p_lo;
    let two_sided = width > tol::REPRESENTATION && dec.alpha > 0.0 && dec.alpha < 1.0;

    let m_l = norm.line(dec.sigma_l)?.slope;
    let m_u = norm.line(dec.sigma_u)?.slope;
    let lambda = if two_sided {
        // tie tolerance expressed in normalized units along the prior interval
        let sign_tol = 10.0 * tol::TIE * norm.scale / width;
        if m_l < -sign_tol || m_u > sign_tol {
            return Err(violation(
                "worst-prior slopes have the wrong sign",
                game,
                sigma_set,
                json!({ "decomposition": dec, "slope_l": m_l, "slope_u": m_u }),
            ));
        }
        if m_l - m_u > 0.0 {
            (-m_u / (m_l - m_u)).clamp(0.0, 1.0)
        } else {
            1.0
        }
    } else {
        1.0
    };
    let sigma_hat = dec.sigma_l.lerp(dec.sigma_u, lambda);
    let p_alpha = dec.alpha * p_lo + (1.0 - dec.alpha) * p_hi;
    let slope = norm.line(sigma_hat)?.slope;
    let generator_weights: Vec<f64> = dec
        .lower_weights
        .iter()
        .zip(&dec.upper_weights)
        .map(|(l, u)| lambda * l + (1.0 - lambda) * u)
        .collect();
    let points: Vec<hull::Point> = sigma_set
        .generators()
        .iter()
        .map(|g| BinaryExperiment::from_experiment(g, game).map(BinaryExperiment::point))
        .collect::<Result<_>>()?;
    let hull_distance = hull::distance_to_hull(&hull::convex_hull(&points), sigma_hat.point());

    let detail = |extra: &str| {
        json!({
            "step": extra,
            "decomposition": dec,
            "lambda": lambda,
            "sigma_hat": sigma_hat,
            "p_alpha": p_alpha,
            "slope_at_sigma_hat": slope,
            "hull_distance": hull_distance,
        })
    };
    if two_sided && slope.abs() > tol::TIE {
        return Err(violation("slope at sigma_hat is not zero", game, sigma_set, detail("slope")));
    }
    if !binary_obedience(p_alpha, sigma_hat, &norm)? {
        return Err(violation("sigma_hat is not obedient at p_alpha", game, sigma_set, detail("phi")));
    }
    let sigma_hat_exp = sigma_hat.to_experiment(game)?;
    let face = worst_case_priors(&sigma_hat_exp, game)?;
    let face_p: Vec<f64> = face
        .vertex_indices
        .iter()
        .map(|&i| game.priors().vertices()[i][0])
        .collect();
    let face_lo = face_p.iter().copied().fold(f64::INFINITY, f64::min);
    let face_hi = face_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if p_alpha < face_lo - tol::REPRESENTATION || p_alpha > face_hi + tol::REPRESENTATION {
        return Err(violation(
            "p_alpha is not a worst-case prior of sigma_hat",
            game,
            sigma_set,
            detail("worst prior"),
        ));
    }
    let Some(statistical_witness) = statistical_obedience(&sigma_hat_exp, game)? else {
        return Err(violation(
            "sigma_hat fails the saddle-point obedience test",
            game,
            sigma_set,
            detail("statistical obedience"),
        ));
    };
    if hull_distance > 1e-9 {
        return Err(violation(
            "sigma_hat lies outside the generator hull",
            game,
            sigma_set,
            detail("hull"),
        ));
    }
    Ok(DecompositionWitness {
        sigma_l: dec.sigma_l,
        sigma_u: dec.sigma_u,
        alpha: dec.alpha,
        p_l: p_lo,
        p_u: p_hi,
        p_alpha,
        lambda,
        sigma_hat,
        slope_at_sigma_hat: slope,
        generator_weights,
        hull_distance,
        statistical_witness,
    })
}
