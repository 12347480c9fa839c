//! Greedy-merge degrading.
//!
//! Each step merges the pair of output letters whose merger costs the least
//! mutual information, until the requested alphabet size is reached. Pair
//! selection uses a min-heap of candidates with lazy invalidation: every slot
//! carries a version stamp, and a popped candidate whose stamps no longer
//! match is discarded. After a merge only the candidates pairing the new
//! letter with each survivor are pushed.
//!
//! Ties are broken on the slot indices of the pair. Slots are ordered by the
//! smallest original output index of the letter they hold, and a merged
//! letter takes the lower of its two slots, so this is the same as breaking
//! ties lexicographically on the letters' provenance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::channel::{eta_unchecked, CompensatedSum, DegradingMap, OutputLetter, PosteriorChannel};
use crate::error::{Error, Result};

/// Step deltas in `[-NEGATIVE_RESIDUE, 0)` are reported as 0.
pub const NEGATIVE_RESIDUE: f64 = 1e-12;

/// A candidate merge of letters `letter_a < letter_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeCandidate {
    pub letter_a: usize,
    pub letter_b: usize,
    pub delta: f64,
    pub stamp_a: u32,
    pub stamp_b: u32,
}

/// Mutual-information loss of merging two letters, in nats.
///
/// Evaluates `Σ_x [π_ab η(γ_x) − π_a η(α_x) − π_b η(β_x)]` with the letters'
/// cached `π Σ η(posterior)` terms; the result is exactly symmetric in its
/// arguments.
#[inline]
pub(crate) fn pair_delta(a: &OutputLetter, b: &OutputLetter) -> f64 {
    let mass = a.mass() + b.mass();
    let mixed: f64 = a
        .joint()
        .iter()
        .zip(b.joint())
        .map(|(p, q)| eta_unchecked((p + q) / mass))
        .sum();
    // + 0.0 folds -0.0 into +0.0 so total_cmp orders true ties as equal
    mass * mixed - (a.conditional_entropy_term() + b.conditional_entropy_term()) + 0.0
}

fn check_pair(pc: &PosteriorChannel, a: usize, b: usize) -> Result<()> {
    if a == b {
        return Err(Error::SameLetter(a));
    }
    for index in [a, b] {
        if index >= pc.len() {
            return Err(Error::IndexOutOfRange { index, size: pc.len() });
        }
    }
    Ok(())
}

/// Loss `I(W) − I(Q)` of merging letters `a` and `b` of `pc`.
pub fn merge_delta(pc: &PosteriorChannel, a: usize, b: usize) -> Result<f64> {
    check_pair(pc, a, b)?;
    Ok(pair_delta(&pc.letters()[a], &pc.letters()[b]))
}

/// The letter that replaces `a` and `b` after merging them.
pub fn merged_letter(pc: &PosteriorChannel, a: usize, b: usize) -> Result<OutputLetter> {
    check_pair(pc, a, b)?;
    Ok(OutputLetter::merge(&pc.letters()[a], &pc.letters()[b]))
}

/// `pc` with letters `a` and `b` replaced by their merger, placed at the lower index.
pub fn merge_pair(pc: &PosteriorChannel, a: usize, b: usize) -> Result<PosteriorChannel> {
    let merged = merged_letter(pc, a, b)?;
    let (lo, hi) = (a.min(b), a.max(b));
    let mut letters = pc.letters().to_vec();
    letters[lo] = merged;
    letters.remove(hi);
    Ok(pc.with_letters(letters))
}

/// Exhaustive scan for the cheapest pair; ties go to the lexicographically
/// smallest `(a, b)`.
pub fn find_min_pair(pc: &PosteriorChannel) -> Result<MergeCandidate> {
    if pc.len() < 2 {
        return Err(Error::TooFewLetters { needed: 2, have: pc.len() });
    }
    let letters = pc.letters();
    let mut best = MergeCandidate {
        letter_a: 0,
        letter_b: 1,
        delta: pair_delta(&letters[0], &letters[1]),
        stamp_a: 0,
        stamp_b: 0,
    };
    for a in 0..letters.len() {
        for b in a + 1..letters.len() {
            let delta = pair_delta(&letters[a], &letters[b]);
            if delta.total_cmp(&best.delta) == Ordering::Less {
                best.letter_a = a;
                best.letter_b = b;
                best.delta = delta;
            }
        }
    }
    Ok(best)
}

/// One merge of a greedy run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    /// Smallest original output index of the first merged letter.
    pub a: usize,
    /// Smallest original output index of the second merged letter (`a < b`).
    pub b: usize,
    /// Loss of this merge in nats, with roundoff residue clamped to 0.
    pub delta: f64,
    /// Output alphabet size before the merge.
    pub size_before: usize,
}

/// Outcome of [`greedy_merge`].
#[derive(Debug, Clone)]
pub struct DegradeReport {
    pub result: PosteriorChannel,
    pub map: DegradingMap,
    pub total_delta: f64,
    pub steps: Vec<MergeStep>,
    raw_deltas: Vec<f64>,
}

impl DegradeReport {
    fn identity(pc: &PosteriorChannel) -> Self {
        Self {
            result: pc.clone(),
            map: pc.degrading_map(),
            total_delta: 0.0,
            steps: Vec::new(),
            raw_deltas: Vec::new(),
        }
    }

    /// Unclamped step losses, in merge order.
    pub fn raw_deltas(&self) -> &[f64] {
        &self.raw_deltas
    }

    /// Total loss at the moment the alphabet first had `size` letters.
    /// Runs are nested, so this equals the total of a run stopped at `size`.
    pub fn total_delta_at(&self, size: usize) -> f64 {
        let taken = self.steps.iter().take_while(|s| s.size_before > size).count();
        sum_losses(&self.raw_deltas[..taken])
    }
}

fn sum_losses(raw: &[f64]) -> f64 {
    raw.iter().copied().collect::<CompensatedSum>().value().max(0.0)
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    delta: f64,
    lo: u32,
    hi: u32,
    stamp_lo: u32,
    stamp_hi: u32,
}

impl QueueEntry {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.delta
            .total_cmp(&other.delta)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
    }
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// reversed: BinaryHeap is a max-heap
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

struct Engine {
    slots: Vec<Option<OutputLetter>>,
    stamps: Vec<u32>,
    alive: usize,
    heap: BinaryHeap<QueueEntry>,
}

impl Engine {
    fn new(letters: &[OutputLetter]) -> Self {
        let n = letters.len();
        let mut entries = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for lo in 0..n {
            for hi in lo + 1..n {
                entries.push(QueueEntry {
                    delta: pair_delta(&letters[lo], &letters[hi]),
                    lo: lo as u32,
                    hi: hi as u32,
                    stamp_lo: 0,
                    stamp_hi: 0,
                });
            }
        }
        Self {
            slots: letters.iter().cloned().map(Some).collect(),
            stamps: vec![0; n],
            alive: n,
            heap: BinaryHeap::from(entries),
        }
    }

    fn is_fresh(&self, e: &QueueEntry) -> bool {
        let (lo, hi) = (e.lo as usize, e.hi as usize);
        self.slots[lo].is_some()
            && self.slots[hi].is_some()
            && self.stamps[lo] == e.stamp_lo
            && self.stamps[hi] == e.stamp_hi
    }

    fn pop_best(&mut self) -> Option<QueueEntry> {
        while let Some(e) = self.heap.pop() {
            if self.is_fresh(&e) {
                return Some(e);
            }
        }
        None
    }

    fn merge(&mut self, e: &QueueEntry) -> MergeStep {
        let (lo, hi) = (e.lo as usize, e.hi as usize);
        let b = self.slots[hi].take().expect("fresh candidate");
        let a = self.slots[lo].as_ref().expect("fresh candidate");
        let step = MergeStep {
            a: a.representative(),
            b: b.representative(),
            delta: if e.delta < 0.0 && e.delta >= -NEGATIVE_RESIDUE { 0.0 } else { e.delta },
            size_before: self.alive,
        };
        let merged = OutputLetter::merge(a, &b);
        self.stamps[lo] += 1;
        self.alive -= 1;

        for (s, other) in self.slots.iter().enumerate() {
            let Some(other) = other else { continue };
            if s == lo {
                continue;
            }
            let (l, h) = if s < lo { (s, lo) } else { (lo, s) };
            self.heap.push(QueueEntry {
                delta: pair_delta(&merged, other),
                lo: l as u32,
                hi: h as u32,
                stamp_lo: self.stamps[l],
                stamp_hi: self.stamps[h],
            });
        }
        self.slots[lo] = Some(merged);
        self.compact();
        step
    }

    fn compact(&mut self) {
        let live = self.alive * self.alive.saturating_sub(1) / 2;
        if self.heap.len() > 2 * live + 1024 {
            let heap = std::mem::take(&mut self.heap);
            let kept: Vec<QueueEntry> = heap.into_vec().into_iter().filter(|e| self.is_fresh(e)).collect();
            self.heap = BinaryHeap::from(kept);
        }
    }

    fn into_letters(self) -> Vec<OutputLetter> {
        self.slots.into_iter().flatten().collect()
    }
}

/// Degrades `pc` to at most `target` output letters by greedy merging.
pub fn greedy_merge(pc: &PosteriorChannel, target: usize) -> Result<DegradeReport> {
    if target == 0 {
        return Err(Error::ZeroTarget);
    }
    if pc.len() <= target {
        return Ok(DegradeReport::identity(pc));
    }
    assert!(pc.len() <= u32::MAX as usize, "output alphabet too large");

    let mut engine = Engine::new(pc.letters());
    let mut steps = Vec::with_capacity(pc.len() - target);
    let mut raw_deltas = Vec::with_capacity(pc.len() - target);
    while engine.alive > target {
        let best = engine.pop_best().expect("at least two letters alive");
        raw_deltas.push(best.delta);
        steps.push(engine.merge(&best));
    }
    let result = pc.with_letters(engine.into_letters());
    Ok(DegradeReport {
        map: result.degrading_map(),
        result,
        total_delta: sum_losses(&raw_deltas),
        steps,
        raw_deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_way() -> PosteriorChannel {
        PosteriorChannel::from_masses_posteriors(
            &[0.25, 0.25, 0.25, 0.25],
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5], vec![0.2, 0.8]],
        )
        .unwrap()
    }

    #[test]
    fn identical_posteriors_cost_nothing() {
        let pc = PosteriorChannel::from_masses_posteriors(
            &[0.2, 0.3, 0.5],
            &[vec![0.3, 0.7], vec![0.3, 0.7], vec![0.9, 0.1]],
        )
        .unwrap();
        assert!(merge_delta(&pc, 0, 1).unwrap().abs() < 1e-16);
    }

    #[test]
    fn opposite_corners_cost_half_ln2() {
        let pc = four_way();
        let d = merge_delta(&pc, 0, 1).unwrap();
        assert!((d - 0.5 * std::f64::consts::LN_2).abs() < 1e-15, "{d}");
        assert_eq!(d, merge_delta(&pc, 1, 0).unwrap());
    }

    #[test]
    fn delta_argument_errors() {
        let pc = four_way();
        assert_eq!(merge_delta(&pc, 2, 2), Err(Error::SameLetter(2)));
        assert!(matches!(merge_delta(&pc, 0, 4), Err(Error::IndexOutOfRange { index: 4, .. })));
        assert!(merged_letter(&pc, 1, 1).is_err());
    }

    #[test]
    fn merged_letter_examples() {
        let pc = PosteriorChannel::from_masses_posteriors(
            &[0.2, 0.3, 0.5],
            &[vec![0.5, 0.5], vec![0.5, 0.5], vec![0.1, 0.9]],
        )
        .unwrap();
        let m = merged_letter(&pc, 0, 1).unwrap();
        assert!((m.mass() - 0.5).abs() < 1e-16);
        assert!((m.posterior()[0] - 0.5).abs() < 1e-16);
        assert_eq!(m.provenance(), &[0, 1]);

        let m = merged_letter(&four_way(), 0, 1).unwrap();
        assert_eq!(m.posterior(), &[0.5, 0.5]);
        assert_eq!(m.mass(), 0.5);
    }

    #[test]
    fn provenance_union_is_sorted() {
        let pc = PosteriorChannel::from_masses_posteriors(
            &[0.2; 5],
            &[vec![0.5, 0.5], vec![0.4, 0.6], vec![0.3, 0.7], vec![0.1, 0.9], vec![0.45, 0.55]],
        )
        .unwrap();
        // letters {1,4} and {2}
        let pc = merge_pair(&pc, 1, 4).unwrap();
        assert_eq!(pc.letters()[1].provenance(), &[1, 4]);
        let m = merged_letter(&pc, 1, 2).unwrap();
        assert_eq!(m.provenance(), &[1, 2, 4]);
    }

    #[test]
    fn find_min_pair_picks_duplicates() {
        let pc = PosteriorChannel::from_masses_posteriors(
            &[0.25, 0.25, 0.25, 0.25],
            &[vec![1.0, 0.0], vec![0.3, 0.7], vec![0.0, 1.0], vec![0.3, 0.7]],
        )
        .unwrap();
        let best = find_min_pair(&pc).unwrap();
        assert_eq!((best.letter_a, best.letter_b), (1, 3));
        assert!(best.delta.abs() < 1e-16);
    }

    #[test]
    fn find_min_pair_tie_goes_to_smallest_pair() {
        // (1,2) mirrors (0,3) under swapping the two inputs, so the costs are bit-identical.
        let pc = PosteriorChannel::from_masses_posteriors(
            &[0.25, 0.25, 0.25, 0.25],
            &[vec![0.3, 0.7], vec![0.7, 0.3], vec![0.65, 0.35], vec![0.35, 0.65]],
        )
        .unwrap();
        let d03 = merge_delta(&pc, 0, 3).unwrap();
        assert_eq!(d03, merge_delta(&pc, 1, 2).unwrap());
        let best = find_min_pair(&pc).unwrap();
        assert_eq!((best.letter_a, best.letter_b, best.delta), (0, 3, d03));
        assert_eq!(greedy_merge(&pc, 3).unwrap().steps[0].a, 0);
        assert_eq!(greedy_merge(&pc, 3).unwrap().steps[0].b, 3);
    }

    #[test]
    fn find_min_pair_needs_two_letters() {
        let pc = PosteriorChannel::from_masses_posteriors(&[1.0], &[vec![0.3, 0.7]]).unwrap();
        assert!(matches!(find_min_pair(&pc), Err(Error::TooFewLetters { .. })));
    }

    #[test]
    fn greedy_identity_when_target_large() {
        let pc = four_way();
        let report = greedy_merge(&pc, 4).unwrap();
        assert!(report.steps.is_empty());
        assert_eq!(report.total_delta, 0.0);
        assert_eq!(report.map, DegradingMap::identity(4));
        assert_eq!(greedy_merge(&pc, 10).unwrap().result, pc);
        assert_eq!(greedy_merge(&pc, 0).unwrap_err(), Error::ZeroTarget);
    }

    #[test]
    fn greedy_duplicates_are_free() {
        let post = vec![vec![0.7, 0.3], vec![0.7, 0.3], vec![0.7, 0.3], vec![0.1, 0.9], vec![0.4, 0.6]];
        let pc = PosteriorChannel::from_masses_posteriors(&[0.2; 5], &post).unwrap();
        let report = greedy_merge(&pc, 3).unwrap();
        assert_eq!(report.steps.len(), 2);
        assert!(report.total_delta < 1e-15);
        assert_eq!(report.result.letters()[0].provenance(), &[0, 1, 2]);
        assert_eq!(report.map.assignment(), &[0, 0, 0, 1, 2]);
    }

    #[test]
    fn trace_records_sizes_and_representatives() {
        let report = greedy_merge(&four_way(), 1).unwrap();
        let sizes: Vec<usize> = report.steps.iter().map(|s| s.size_before).collect();
        assert_eq!(sizes, vec![4, 3, 2]);
        assert!(report.steps.iter().all(|s| s.a < s.b));
        let total: f64 = report.steps.iter().map(|s| s.delta).sum();
        assert!((total - report.total_delta).abs() < 1e-15);
        // collapsing everything loses all the information
        assert!((report.total_delta - four_way().mutual_information()).abs() < 1e-14);
        assert_eq!(report.total_delta_at(2), greedy_merge(&four_way(), 2).unwrap().total_delta);
    }
}
