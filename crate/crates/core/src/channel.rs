//! Channels, input distributions and the posterior representation used for merging.
//!
//! All information quantities are in nats. A [`Channel`] is the transition
//! matrix `W(y|x)`; a [`PosteriorChannel`] is the same channel seen from the
//! output side, one [`OutputLetter`] per output symbol carrying its mass
//! `P(Y=y)`, its joint column `P(X=x, Y=y)` and the posterior `P(X=x | Y=y)`.
//!
//! Merging works on joint columns (exact addition) and re-derives the
//! posterior, so thousands of merges do not compound Bayes-rule roundoff.

use crate::error::{Error, Result};

/// Tolerance on probability-vector sums accepted at construction.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// `-p ln p`, zero at `p = 0`. Values in `(1, 1 + SUM_TOLERANCE]` are clamped to 1.
pub fn eta(p: f64) -> Result<f64> {
    if !(0.0..=1.0 + SUM_TOLERANCE).contains(&p) {
        return Err(Error::Domain(p));
    }
    Ok(eta_unchecked(p.min(1.0)))
}

/// `eta` without range checks; callers guarantee `p >= 0`.
#[inline]
pub(crate) fn eta_unchecked(p: f64) -> f64 {
    if p <= 0.0 || p == 1.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

fn check_probability_vector(field: &str, values: &[f64], renormalize: bool) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::field(field, "empty probability vector"));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::field(format!("{field}[{i}]"), "not a finite number"));
        }
        if v < 0.0 {
            return Err(Error::field(format!("{field}[{i}]"), format!("negative entry {v}")));
        }
    }
    let total: f64 = values.iter().copied().collect::<CompensatedSum>().value();
    if renormalize {
        if total <= 0.0 {
            return Err(Error::field(field, "all entries are zero"));
        }
        return Ok(values.iter().map(|v| v / total).collect());
    }
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::field(field, format!("entries sum to {total}, not 1")));
    }
    Ok(values.to_vec())
}

/// Input distribution `π(x)` over the input alphabet.
///
/// Zero entries are accepted here; they are stripped when converting to
/// posterior form, since such input letters never occur.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let probs = check_probability_vector("input_dist", &probs, false)?;
        Ok(Self { probs })
    }

    /// Accepts any nonnegative, not-all-zero vector and rescales it to sum to 1.
    pub fn renormalized(probs: Vec<f64>) -> Result<Self> {
        let probs = check_probability_vector("input_dist", &probs, true)?;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::field("input_dist", "empty probability vector"));
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Transition matrix `W(y|x)`; row `x` is a distribution over outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    num_outputs: usize,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, false)
    }

    /// Same as [`Channel::new`] but rescales each row to sum to 1.
    pub fn renormalized(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, true)
    }

    fn build(rows: Vec<Vec<f64>>, renormalize: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::field("channel", "no rows"));
        }
        let num_outputs = rows[0].len();
        let mut checked = Vec::with_capacity(rows.len());
        for (x, row) in rows.iter().enumerate() {
            if row.len() != num_outputs {
                return Err(Error::field(
                    format!("channel[{x}]"),
                    format!("has {} entries, expected {num_outputs}", row.len()),
                ));
            }
            checked.push(check_probability_vector(&format!("channel[{x}]"), row, renormalize)?);
        }
        Ok(Self {
            num_outputs,
            rows: checked,
        })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new(
            (0..size)
                .map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn num_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `W(y|x)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }
}

/// One output letter in posterior form.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLetter {
    mass: f64,
    joint: Vec<f64>,
    posterior: Vec<f64>,
    provenance: Vec<usize>,
    entropy_term: f64,
}

impl OutputLetter {
    /// Builds a letter from its joint column `P(X=x, Y=y)`. The column must have
    /// positive total mass.
    pub(crate) fn from_joint(joint: Vec<f64>, provenance: Vec<usize>) -> Self {
        let mass = joint.iter().sum::<f64>();
        debug_assert!(mass > 0.0);
        Self::with_mass(mass, joint, provenance)
    }

    fn with_mass(mass: f64, joint: Vec<f64>, provenance: Vec<usize>) -> Self {
        let posterior: Vec<f64> = joint.iter().map(|p| p / mass).collect();
        let entropy_term = mass * posterior.iter().map(|&p| eta_unchecked(p)).sum::<f64>();
        Self {
            mass,
            joint,
            posterior,
            provenance,
            entropy_term,
        }
    }

    /// The letter obtained by merging `a` and `b`: joint columns add, the mass
    /// is `π_a + π_b` and the posterior is the mass-weighted mixture.
    pub(crate) fn merge(a: &OutputLetter, b: &OutputLetter) -> OutputLetter {
        let joint = a.joint.iter().zip(&b.joint).map(|(p, q)| p + q).collect();
        let mut provenance = Vec::with_capacity(a.provenance.len() + b.provenance.len());
        let (mut i, mut j) = (0, 0);
        while i < a.provenance.len() && j < b.provenance.len() {
            if a.provenance[i] < b.provenance[j] {
                provenance.push(a.provenance[i]);
                i += 1;
            } else {
                provenance.push(b.provenance[j]);
                j += 1;
            }
        }
        provenance.extend_from_slice(&a.provenance[i..]);
        provenance.extend_from_slice(&b.provenance[j..]);
        Self::with_mass(a.mass + b.mass, joint, provenance)
    }

    /// `π(y)`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `(W(x|y))_x`.
    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    /// `(π(x) W(y|x))_x`.
    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    /// Sorted original output indices merged into this letter.
    pub fn provenance(&self) -> &[usize] {
        &self.provenance
    }

    /// Smallest original output index in this letter.
    pub fn representative(&self) -> usize {
        self.provenance[0]
    }

    /// `π(y) Σ_x η(W(x|y))`, this letter's share of `H(X|Y)`.
    pub fn conditional_entropy_term(&self) -> f64 {
        self.entropy_term
    }
}

/// A channel in posterior form: the working representation for merging.
///
/// Only input letters with positive probability are kept (their original
/// indices are in [`PosteriorChannel::input_support`]); output letters with
/// zero mass are dropped and listed in [`PosteriorChannel::dropped_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorChannel {
    input_probs: Vec<f64>,
    input_support: Vec<usize>,
    letters: Vec<OutputLetter>,
    original_outputs: usize,
    dropped: Vec<usize>,
}

impl PosteriorChannel {
    /// Builds a channel directly from output masses and posterior vectors,
    /// one pair per output letter. Zero-mass letters are dropped.
    pub fn from_masses_posteriors(masses: &[f64], posteriors: &[Vec<f64>]) -> Result<Self> {
        if masses.len() != posteriors.len() {
            return Err(Error::DimensionMismatch {
                expected: masses.len(),
                got: posteriors.len(),
            });
        }
        let masses = check_probability_vector("masses", masses, false)?;
        let num_inputs = posteriors.first().map_or(0, Vec::len);
        let mut columns = Vec::with_capacity(masses.len());
        for (y, (m, post)) in masses.iter().zip(posteriors).enumerate() {
            if post.len() != num_inputs {
                return Err(Error::DimensionMismatch {
                    expected: num_inputs,
                    got: post.len(),
                });
            }
            let post = check_probability_vector(&format!("posterior[{y}]"), post, false)?;
            columns.push(post.iter().map(|p| p * m).collect::<Vec<_>>());
        }
        let input_probs: Vec<f64> = (0..num_inputs)
            .map(|x| columns.iter().map(|c| c[x]).collect::<CompensatedSum>().value())
            .collect();
        Ok(Self::from_joint_columns(input_probs, (0..num_inputs).collect(), columns))
    }

    /// `columns[y][x] = P(X=x, Y=y)`. Inputs with zero probability are removed.
    fn from_joint_columns(input_probs: Vec<f64>, support: Vec<usize>, columns: Vec<Vec<f64>>) -> Self {
        let keep: Vec<usize> = (0..input_probs.len()).filter(|&x| input_probs[x] > 0.0).collect();
        let input_support = keep.iter().map(|&x| support[x]).collect();
        let original_outputs = columns.len();
        let mut letters = Vec::with_capacity(columns.len());
        let mut dropped = Vec::new();
        for (y, column) in columns.into_iter().enumerate() {
            let joint: Vec<f64> = keep.iter().map(|&x| column[x]).collect();
            if joint.iter().sum::<f64>() > 0.0 {
                letters.push(OutputLetter::from_joint(joint, vec![y]));
            } else {
                dropped.push(y);
            }
        }
        Self {
            input_probs: keep.iter().map(|&x| input_probs[x]).collect(),
            input_support,
            letters,
            original_outputs,
            dropped,
        }
    }

    pub(crate) fn with_letters(&self, letters: Vec<OutputLetter>) -> Self {
        Self {
            input_probs: self.input_probs.clone(),
            input_support: self.input_support.clone(),
            letters,
            original_outputs: self.original_outputs,
            dropped: self.dropped.clone(),
        }
    }

    /// Number of input letters with positive probability.
    pub fn num_inputs(&self) -> usize {
        self.input_probs.len()
    }

    /// Original indices of the retained input letters.
    pub fn input_support(&self) -> &[usize] {
        &self.input_support
    }

    pub fn input_probs(&self) -> &[f64] {
        &self.input_probs
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[OutputLetter] {
        &self.letters
    }

    pub fn letter(&self, index: usize) -> Result<&OutputLetter> {
        self.letters.get(index).ok_or(Error::IndexOutOfRange {
            index,
            size: self.letters.len(),
        })
    }

    /// Output alphabet size of the channel this was built from.
    pub fn original_outputs(&self) -> usize {
        self.original_outputs
    }

    /// Original output indices that had zero mass.
    pub fn dropped_outputs(&self) -> &[usize] {
        &self.dropped
    }

    /// `Σ_x η(π(x)) − Σ_{x,y} π(y) η(W(x|y))`.
    pub fn mutual_information(&self) -> f64 {
        let input_entropy: CompensatedSum = self.input_probs.iter().map(|&p| eta_unchecked(p)).collect();
        let conditional: CompensatedSum = self.letters.iter().map(OutputLetter::conditional_entropy_term).collect();
        (input_entropy.value() - conditional.value()).max(0.0)
    }

    /// Map from original output indices to letters of this channel.
    /// Dropped zero-mass outputs go to letter 0, which leaves `Q` unchanged.
    pub fn degrading_map(&self) -> DegradingMap {
        let mut assignment = vec![0; self.original_outputs];
        for (z, letter) in self.letters.iter().enumerate() {
            for &y in &letter.provenance {
                assignment[y] = z;
            }
        }
        DegradingMap {
            assignment,
            num_merged: self.letters.len(),
        }
    }
}

/// Bayes conversion of `(W, P_X)` to posterior form.
pub fn to_posterior_form(channel: &Channel, input: &InputDistribution) -> Result<PosteriorChannel> {
    if channel.num_inputs() != input.len() {
        return Err(Error::DimensionMismatch {
            expected: channel.num_inputs(),
            got: input.len(),
        });
    }
    let columns = (0..channel.num_outputs())
        .map(|y| {
            input
                .probs()
                .iter()
                .zip(channel.rows())
                .map(|(p, row)| p * row[y])
                .collect()
        })
        .collect();
    Ok(PosteriorChannel::from_joint_columns(
        input.probs().to_vec(),
        (0..input.len()).collect(),
        columns,
    ))
}

/// `I(W, P_X)` in nats.
pub fn mutual_information(channel: &Channel, input: &InputDistribution) -> Result<f64> {
    Ok(to_posterior_form(channel, input)?.mutual_information())
}

/// Deterministic degrading map `Φ`: original output index to merged letter index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegradingMap {
    assignment: Vec<usize>,
    num_merged: usize,
}

impl DegradingMap {
    /// `assignment` must hit every index in `0..num_merged`.
    pub fn new(assignment: Vec<usize>, num_merged: usize) -> Result<Self> {
        let mut hit = vec![false; num_merged];
        for (y, &z) in assignment.iter().enumerate() {
            if z >= num_merged {
                return Err(Error::field(
                    format!("map[{y}]"),
                    format!("merged index {z} >= {num_merged}"),
                ));
            }
            hit[z] = true;
        }
        if let Some(z) = hit.iter().position(|h| !h) {
            return Err(Error::field("map", format!("merged letter {z} has no preimage")));
        }
        Ok(Self {
            assignment,
            num_merged,
        })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            assignment: (0..size).collect(),
            num_merged: size,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_merged(&self) -> usize {
        self.num_merged
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// `Q(z|x) = Σ_{y: Φ(y)=z} W(y|x)`.
pub fn apply_degrading_map(channel: &Channel, map: &DegradingMap) -> Result<Channel> {
    if map.len() != channel.num_outputs() {
        return Err(Error::DimensionMismatch {
            expected: channel.num_outputs(),
            got: map.len(),
        });
    }
    let rows = channel
        .rows()
        .iter()
        .map(|row| {
            let mut acc = vec![CompensatedSum::new(); map.num_merged()];
            for (&w, &z) in row.iter().zip(map.assignment()) {
                acc[z].add(w);
            }
            acc.iter().map(CompensatedSum::value).collect()
        })
        .collect();
    Ok(Channel {
        num_outputs: map.num_merged(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0).unwrap(), 0.0);
        assert_eq!(eta(1.0).unwrap(), 0.0);
        assert_eq!(eta(1.0 + 1e-10).unwrap(), 0.0);
        assert!(close(eta(0.5).unwrap(), 0.5 * std::f64::consts::LN_2, 1e-15));
        assert!(close(eta(0.5).unwrap(), 0.346_573_590_279_972_65, 1e-15));
        assert!(matches!(eta(-1e-3), Err(Error::Domain(_))));
        assert!(matches!(eta(1.01), Err(Error::Domain(_))));
    }

    #[test]
    fn mutual_information_examples() {
        let uniform = InputDistribution::uniform(2).unwrap();
        let noiseless = Channel::identity(2).unwrap();
        assert!(close(mutual_information(&noiseless, &uniform).unwrap(), std::f64::consts::LN_2, 1e-15));

        let useless = Channel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(mutual_information(&useless, &uniform).unwrap(), 0.0);

        // ln 2 - h(0.11), reference from a 40-digit evaluation.
        let bsc = Channel::new(vec![vec![0.89, 0.11], vec![0.11, 0.89]]).unwrap();
        let expected = 0.346_631_843_641_279_2;
        assert!(close(mutual_information(&bsc, &uniform).unwrap(), expected, 1e-14));
    }

    #[test]
    fn mutual_information_rejects_mismatch() {
        let ch = Channel::identity(3).unwrap();
        let input = InputDistribution::uniform(2).unwrap();
        assert!(matches!(
            mutual_information(&ch, &input),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn construction_validation() {
        assert!(InputDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(InputDistribution::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(InputDistribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(InputDistribution::new(vec![1.5, -0.5]).is_err());
        let r = InputDistribution::renormalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(r.probs(), &[0.25, 0.75]);

        let err = Channel::new(vec![vec![0.5, 0.5], vec![0.2, -0.1, 0.9]]).unwrap_err();
        assert!(err.to_string().contains("channel[1]"), "{err}");
        let err = Channel::new(vec![vec![0.5, 0.5], vec![0.2, 0.7]]).unwrap_err();
        assert!(err.to_string().contains("channel[1]"), "{err}");
        assert!(Channel::renormalized(vec![vec![1.0, 1.0], vec![0.2, 0.6]]).is_ok());
    }

    #[test]
    fn posterior_form_identity() {
        let pc = to_posterior_form(&Channel::identity(2).unwrap(), &InputDistribution::uniform(2).unwrap()).unwrap();
        assert_eq!(pc.len(), 2);
        assert_eq!(pc.letters()[0].mass(), 0.5);
        assert_eq!(pc.letters()[0].posterior(), &[1.0, 0.0]);
        assert_eq!(pc.letters()[1].posterior(), &[0.0, 1.0]);
        assert_eq!(pc.letters()[1].provenance(), &[1]);
    }

    #[test]
    fn posterior_form_drops_zero_column() {
        let ch = Channel::new(vec![vec![0.5, 0.0, 0.5], vec![0.25, 0.0, 0.75]]).unwrap();
        let pc = to_posterior_form(&ch, &InputDistribution::uniform(2).unwrap()).unwrap();
        assert_eq!(pc.len(), 2);
        assert_eq!(pc.dropped_outputs(), &[1]);
        assert_eq!(pc.letters()[1].provenance(), &[2]);
        assert_eq!(pc.degrading_map().assignment(), &[0, 0, 1]);
    }

    #[test]
    fn posterior_form_bayes_by_hand() {
        let ch = Channel::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]]).unwrap();
        let pc = to_posterior_form(&ch, &InputDistribution::uniform(2).unwrap()).unwrap();
        let masses: Vec<f64> = pc.letters().iter().map(OutputLetter::mass).collect();
        assert_eq!(masses, vec![0.25, 0.5, 0.25]);
        assert_eq!(pc.letters()[1].posterior(), &[0.5, 0.5]);
        assert_eq!(pc.letters()[0].posterior(), &[1.0, 0.0]);
    }

    #[test]
    fn zero_probability_inputs_are_stripped() {
        let ch = Channel::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.2, 0.3, 0.5]]).unwrap();
        let input = InputDistribution::new(vec![0.5, 0.0, 0.5]).unwrap();
        let pc = to_posterior_form(&ch, &input).unwrap();
        assert_eq!(pc.num_inputs(), 2);
        assert_eq!(pc.input_support(), &[0, 2]);
        assert_eq!(pc.len(), 3);
        for letter in pc.letters() {
            assert!(close(letter.posterior().iter().sum::<f64>(), 1.0, 1e-15));
        }
    }

    #[test]
    fn degrading_map_examples() {
        let ch = Channel::new(vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3]]).unwrap();
        let same = apply_degrading_map(&ch, &DegradingMap::identity(3)).unwrap();
        assert_eq!(same, ch);

        let collapse = DegradingMap::new(vec![0, 0, 0], 1).unwrap();
        let q = apply_degrading_map(&ch, &collapse).unwrap();
        assert_eq!(q.rows(), &[vec![1.0], vec![1.0]]);
        let input = InputDistribution::uniform(2).unwrap();
        assert_eq!(mutual_information(&q, &input).unwrap(), 0.0);

        assert!(DegradingMap::new(vec![0, 2, 0], 2).is_err());
        assert!(DegradingMap::new(vec![0, 0, 0], 2).is_err());
        let short = DegradingMap::new(vec![0, 1], 2).unwrap();
        assert!(apply_degrading_map(&ch, &short).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-17);
        }
        acc.add(-1.0);
        assert!(close(acc.value(), 1e-14, 1e-24), "{}", acc.value());
        let naive = 1.0 + 1e-17 - 1.0;
        assert_eq!(naive, 0.0);
    }
}
