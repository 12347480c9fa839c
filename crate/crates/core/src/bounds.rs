//! Surrogate distances, the boxes built from them, and the constants of the
//! greedy-merge loss bounds.
//!
//! `d(α, ζ) = min(|ζ − α|, (ζ − α)² / min(α, ζ))` bounds the per-coordinate
//! loss of a merge, and its vector form takes the maximum over coordinates.
//! The sets `{ζ : d(α, ζ) ≤ r}` are axis-aligned boxes around `α` (not
//! centred on it), described by the half-widths [`omega_down`] and
//! [`omega_up`]. Dropping the largest coordinate of `α` gives the quadrant
//! boxes used for the packing argument; two quadrants of letters with the same
//! largest coordinate that overlap force the letters within distance `r`.
//!
//! None of this is used for pair selection; it backs the verification paths.

use std::f64::consts::{E, PI};

use libm::lgamma as ln_gamma;

use crate::channel::{PosteriorChannel, SUM_TOLERANCE};
use crate::error::{Error, Result};

/// Radius of a `d`-ball; strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Radius(f64);

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r.is_finite() {
            Ok(Self(r))
        } else {
            Err(Error::field("radius", format!("{r} is not a positive finite number")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorVector(Vec<f64>);

impl PosteriorVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::field("posterior", "empty vector"));
        }
        if let Some(i) = entries.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::field(format!("posterior[{i}]"), "outside [0, 1]"));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::field("posterior", format!("entries sum to {total}, not 1")));
        }
        Ok(Self(entries))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn d1(alpha: f64, zeta: f64) -> f64 {
    (zeta - alpha).abs()
}

/// Infinite unless both arguments are strictly positive.
pub fn d2(alpha: f64, zeta: f64) -> f64 {
    if alpha > 0.0 && zeta > 0.0 {
        let diff = zeta - alpha;
        diff * diff / alpha.min(zeta)
    } else {
        f64::INFINITY
    }
}

pub fn d_scalar(alpha: f64, zeta: f64) -> f64 {
    d1(alpha, zeta).min(d2(alpha, zeta))
}

/// Largest coordinate-wise `d`.
pub fn d_vector(alpha: &[f64], zeta: &[f64]) -> Result<f64> {
    check_dims(alpha.len(), zeta.len())?;
    Ok(alpha
        .iter()
        .zip(zeta)
        .map(|(&a, &z)| d_scalar(a, z))
        .fold(0.0, f64::max))
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Upper bound `(π_a + π_b) |X| d(α, β)` on the loss of merging two letters.
pub fn pair_delta_bound(pi_a: f64, pi_b: f64, alpha: &[f64], beta: &[f64], num_inputs: usize) -> Result<f64> {
    Ok((pi_a + pi_b) * num_inputs as f64 * d_vector(alpha, beta)?)
}

/// Indices of letters with mass at most `2 / |Y|`.
pub fn y_small(pc: &PosteriorChannel) -> Vec<usize> {
    let threshold = 2.0 / pc.len() as f64;
    (0..pc.len()).filter(|&y| pc.letters()[y].mass() <= threshold).collect()
}

/// Lower half-width of the box `{ζ : d(α, ζ) ≤ r}`.
pub fn omega_down(alpha: f64, r: Radius) -> f64 {
    let r = r.0;
    ((r * r / 4.0 + alpha * r).sqrt() - r / 2.0).max(r)
}

/// Upper half-width of the box `{ζ : d(α, ζ) ≤ r}`.
pub fn omega_up(alpha: f64, r: Radius) -> f64 {
    let r = r.0;
    (alpha * r).sqrt().max(r)
}

/// `omega_down(α, r) / (|X| − 1)`, the half-width of the reduced boxes.
pub fn omega_prime(alpha: f64, r: Radius, num_inputs: usize) -> Result<f64> {
    if num_inputs < 2 {
        return Err(Error::BoundRange(format!("need at least 2 inputs, got {num_inputs}")));
    }
    Ok(omega_down(alpha, r) / (num_inputs - 1) as f64)
}

/// Box test for `ζ ∈ B(α, r)`, i.e. `d(α, ζ) ≤ r`.
pub fn in_ball(alpha: &PosteriorVector, r: Radius, zeta: &[f64]) -> Result<bool> {
    check_dims(alpha.len(), zeta.len())?;
    Ok(alpha.0.iter().zip(zeta).all(|(&a, &z)| {
        let diff = z - a;
        -omega_down(a, r) <= diff && diff <= omega_up(a, r)
    }))
}

/// Index of the largest entry, smallest index on ties.
pub fn x_max(alpha: &[f64]) -> usize {
    let mut best = 0;
    for (x, &a) in alpha.iter().enumerate() {
        if a > alpha[best] {
            best = x;
        }
    }
    best
}

/// `ζ ∈ C(α, r)`: the reduced box over every coordinate except `x_max(α)`.
/// `zeta` must sum to 1.
pub fn in_box_c(alpha: &PosteriorVector, r: Radius, zeta: &[f64]) -> Result<bool> {
    check_dims(alpha.len(), zeta.len())?;
    let total: f64 = zeta.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::field("zeta", format!("entries sum to {total}, not 1")));
    }
    let k = alpha.len();
    let skip = x_max(&alpha.0);
    for (x, (&a, &z)) in alpha.0.iter().zip(zeta).enumerate() {
        if x == skip {
            continue;
        }
        let w = omega_prime(a, r, k)?;
        let diff = z - a;
        if diff < -w || diff > w {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coordinates of `alpha` other than `x_max(alpha)`, paired with their
/// reduced half-widths.
fn reduced_coordinates(alpha: &PosteriorVector, r: Radius) -> Result<Vec<(f64, f64)>> {
    let k = alpha.len();
    let skip = x_max(&alpha.0);
    alpha
        .0
        .iter()
        .enumerate()
        .filter(|&(x, _)| x != skip)
        .map(|(_, &a)| Ok((a, omega_prime(a, r, k)?)))
        .collect()
}

/// `ζ' ∈ Q'(α, r)`, where `ζ'` lists the coordinates other than `x_max(α)`
/// in increasing index order.
pub fn in_quadrant_q(alpha: &PosteriorVector, r: Radius, zeta_prime: &[f64]) -> Result<bool> {
    check_dims(alpha.len().saturating_sub(1), zeta_prime.len())?;
    let coords = reduced_coordinates(alpha, r)?;
    Ok(coords
        .iter()
        .zip(zeta_prime)
        .all(|(&(a, w), &z)| a <= z && z <= a + w))
}

/// Whether `Q'(α, r)` and `Q'(β, r)` share a point. Both are boxes, so
/// this is a per-coordinate interval overlap. `None` when the two vectors
/// have different largest coordinates and the quadrants live in different
/// coordinate systems.
pub fn quadrants_intersect(alpha: &PosteriorVector, beta: &PosteriorVector, r: Radius) -> Result<Option<bool>> {
    check_dims(alpha.len(), beta.len())?;
    if x_max(&alpha.0) != x_max(&beta.0) {
        return Ok(None);
    }
    let qa = reduced_coordinates(alpha, r)?;
    let qb = reduced_coordinates(beta, r)?;
    Ok(Some(
        qa.iter()
            .zip(&qb)
            .all(|(&(a, wa), &(b, wb))| a.max(b) <= (a + wa).min(b + wb)),
    ))
}

fn check_inputs(num_inputs: usize) -> Result<f64> {
    if num_inputs < 2 {
        return Err(Error::BoundRange(format!("need at least 2 inputs, got {num_inputs}")));
    }
    Ok(num_inputs as f64)
}

/// `ln` of `(√(1 + 1/(2(k−1))) − 1)^{-2} (2k / Γ(1 + (k−1)/2))^{2/(k−1)}`,
/// the part shared by `mu` and `r_star`.
fn ln_packing_factor(k: f64) -> f64 {
    let eps = 1.0 / (2.0 * (k - 1.0));
    // √(1+ε) − 1 without cancellation
    let gap = eps / ((1.0 + eps).sqrt() + 1.0);
    -2.0 * gap.ln() + 2.0 / (k - 1.0) * ((2.0 * k).ln() - ln_gamma(1.0 + (k - 1.0) / 2.0))
}

/// Per-merge constant: the cheapest merge of a `|Y|`-letter channel costs
/// at most `mu(|X|) |Y|^{-(|X|+1)/(|X|−1)}` whenever `|Y| > 2|X|`.
pub fn mu(num_inputs: usize) -> Result<f64> {
    let k = check_inputs(num_inputs)?;
    Ok(((PI * k).ln() + ln_packing_factor(k)).exp())
}

/// Cumulative constant `((|X|−1)/2) mu(|X|)`.
pub fn nu(num_inputs: usize) -> Result<f64> {
    let k = check_inputs(num_inputs)?;
    Ok((k - 1.0) / 2.0 * mu(num_inputs)?)
}

/// Large-`|X|` approximation `16 π e |X|³` of [`nu`].
pub fn nu_approx(num_inputs: usize) -> Result<f64> {
    let k = check_inputs(num_inputs)?;
    Ok(16.0 * PI * E * k.powi(3))
}

/// `mu(|X|) |Y|^{-(|X|+1)/(|X|−1)}`; defined only for `|Y| > 2|X|`.
pub fn theorem1_rhs(num_inputs: usize, num_outputs: usize) -> Result<f64> {
    let k = check_inputs(num_inputs)?;
    if num_outputs <= 2 * num_inputs {
        return Err(Error::BoundRange(format!(
            "per-merge bound needs |Y| > 2|X|, got |Y| = {num_outputs}, |X| = {num_inputs}"
        )));
    }
    Ok(mu(num_inputs)? * (num_outputs as f64).powf(-(k + 1.0) / (k - 1.0)))
}

/// `nu(|X|) L^{-2/(|X|−1)}`; defined only for `L >= 2|X|`.
pub fn corollary_rhs(num_inputs: usize, target: usize) -> Result<f64> {
    let k = check_inputs(num_inputs)?;
    if target < 2 * num_inputs {
        return Err(Error::BoundRange(format!(
            "cumulative bound needs L >= 2|X|, got L = {target}, |X| = {num_inputs}"
        )));
    }
    Ok(nu(num_inputs)? * (target as f64).powf(-2.0 / (k - 1.0)))
}

/// Critical packing radius for a `|Y|`-letter channel: some pair in the
/// largest `x_max` class of the small letters lies within this `d`-distance.
pub fn r_star(num_inputs: usize, num_outputs: usize) -> Result<Radius> {
    let k = check_inputs(num_inputs)?;
    if num_outputs <= 2 * num_inputs {
        return Err(Error::BoundRange(format!(
            "packing radius needs |Y| > 2|X|, got |Y| = {num_outputs}, |X| = {num_inputs}"
        )));
    }
    let ln_r = (PI / 4.0).ln() + ln_packing_factor(k) - 2.0 / (k - 1.0) * (num_outputs as f64).ln();
    Radius::new(ln_r.exp())
}

/// The largest class of small letters sharing the same `x_max`; the class
/// with the smaller input index wins ties.
pub fn largest_xmax_class(pc: &PosteriorChannel) -> Vec<usize> {
    let mut classes = vec![Vec::new(); pc.num_inputs()];
    for y in y_small(pc) {
        classes[x_max(pc.letters()[y].posterior())].push(y);
    }
    let mut best = 0;
    for (x, class) in classes.iter().enumerate() {
        if class.len() > classes[best].len() {
            best = x;
        }
    }
    classes.swap_remove(best)
}

/// The pair among `indices` with the smallest vector `d`, by exhaustive scan.
pub fn closest_pair(pc: &PosteriorChannel, indices: &[usize]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, &a) in indices.iter().enumerate() {
        for &b in &indices[i + 1..] {
            let d = d_vector(pc.letters()[a].posterior(), pc.letters()[b].posterior())
                .expect("letters share the input alphabet");
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((a, b, d));
            }
        }
    }
    best
}
