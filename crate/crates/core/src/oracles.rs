//! Optimal degrading for small instances.
//!
//! The optimum over all degraded channels with at most `L` outputs is attained
//! by a deterministic map: for a fixed input distribution `I(Q)` is convex in
//! `Q`, `Q` is affine in the intermediate channel `Φ`, and the row-stochastic
//! `Φ` form a polytope whose vertices are the deterministic maps. Searching
//! set partitions of the output letters is therefore exhaustive.
//!
//! [`brute_force_optimal`] enumerates every partition (any input alphabet,
//! at most [`MAX_BRUTE_FORCE_LETTERS`] outputs). [`dp_optimal_binary`] handles
//! binary inputs: it sorts letters by the posterior of input 0 and finds the
//! best contiguous partition by dynamic programming. That some optimal
//! partition is contiguous in this order is the premise of the binary-input
//! quantizer literature; the brute-force agreement tests back it up.

use crate::channel::{eta_unchecked, PosteriorChannel};
use crate::error::{Error, Result};

/// Largest output alphabet the exhaustive search accepts (Bell(12) ≈ 4.2e6).
pub const MAX_BRUTE_FORCE_LETTERS: usize = 12;

/// A set partition of letter indices `0..n`. Blocks are sorted and ordered by
/// their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds the partition from per-element block labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; labels.iter().max().map_or(0, |m| m + 1)];
        for (i, &label) in labels.iter().enumerate() {
            if slot[label] == usize::MAX {
                slot[label] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[slot[label]].push(i);
        }
        Self { blocks }
    }

    fn from_blocks(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks rewritten in original output indices of `pc`.
    pub fn original_blocks(&self, pc: &PosteriorChannel) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| {
                let mut out: Vec<usize> = b
                    .iter()
                    .flat_map(|&y| pc.letters()[y].provenance().iter().copied())
                    .collect();
                out.sort_unstable();
                out
            })
            .collect()
    }
}

/// `π_B Σ_x η(γ_B,x)` for a block with the given total joint column.
fn merged_term(joint: &[f64]) -> f64 {
    let mass: f64 = joint.iter().sum();
    if mass <= 0.0 {
        return 0.0;
    }
    mass * joint.iter().map(|&p| eta_unchecked(p / mass)).sum::<f64>()
}

fn baseline(pc: &PosteriorChannel) -> f64 {
    pc.letters().iter().map(|l| l.conditional_entropy_term()).sum()
}

/// `I(W) − I(Q)` when the letters of each block are merged.
pub fn partition_loss(pc: &PosteriorChannel, partition: &Partition) -> f64 {
    let k = pc.num_inputs();
    let mut joint = vec![0.0; k];
    let mut merged = 0.0;
    for block in partition.blocks() {
        joint.iter_mut().for_each(|p| *p = 0.0);
        for &y in block {
            for (acc, p) in joint.iter_mut().zip(pc.letters()[y].joint()) {
                *acc += p;
            }
        }
        merged += merged_term(&joint);
    }
    (merged - baseline(pc)).max(0.0)
}

/// Restricted growth strings `a` with `a[0] = 0`, `a[i] <= 1 + max(a[..i])`
/// and every label below `max_blocks`.
struct GrowthString {
    labels: Vec<usize>,
    // prefix_max[i] = max(labels[..=i])
    prefix_max: Vec<usize>,
    max_blocks: usize,
    started: bool,
}

impl GrowthString {
    fn new(n: usize, max_blocks: usize) -> Self {
        Self {
            labels: vec![0; n],
            prefix_max: vec![0; n],
            max_blocks,
            started: false,
        }
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        let n = self.labels.len();
        for i in (1..n).rev() {
            let next = self.labels[i] + 1;
            if next <= self.prefix_max[i - 1] + 1 && next < self.max_blocks {
                self.labels[i] = next;
                self.prefix_max[i] = self.prefix_max[i - 1].max(next);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return true;
            }
        }
        false
    }
}

/// Iterator over set partitions in restricted-growth-string order.
pub struct Partitions {
    inner: GrowthString,
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        self.inner
            .advance()
            .then(|| Partition::from_labels(&self.inner.labels))
    }
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_BRUTE_FORCE_LETTERS {
        return Err(Error::Guard(format!(
            "exhaustive search limited to n <= {MAX_BRUTE_FORCE_LETTERS} letters, got {n}"
        )));
    }
    Ok(())
}

/// Every partition of `{0, .., n-1}` into at most `max_blocks` blocks, each once.
pub fn enumerate_partitions(n: usize, max_blocks: usize) -> Result<Partitions> {
    guard(n)?;
    if n == 0 {
        return Err(Error::TooFewLetters { needed: 1, have: 0 });
    }
    if max_blocks == 0 {
        return Err(Error::ZeroTarget);
    }
    Ok(Partitions {
        inner: GrowthString::new(n, max_blocks.min(n)),
    })
}

/// Exhaustive minimum of `I(W) − I(Q)` over partitions into at most `target`
/// blocks. The first optimum in enumeration order is returned.
pub fn brute_force_optimal(pc: &PosteriorChannel, target: usize) -> Result<(Partition, f64)> {
    let n = pc.len();
    guard(n)?;
    if target == 0 {
        return Err(Error::ZeroTarget);
    }
    if target >= n {
        return Ok((Partition::singletons(n), 0.0));
    }

    let k = pc.num_inputs();
    let columns: Vec<&[f64]> = pc.letters().iter().map(|l| l.joint()).collect();
    let mut sums = vec![0.0; target * k];
    let mut rgs = GrowthString::new(n, target);
    let mut best = (f64::INFINITY, Vec::new());
    while rgs.advance() {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (y, &label) in rgs.labels.iter().enumerate() {
            let row = &mut sums[label * k..(label + 1) * k];
            for (acc, p) in row.iter_mut().zip(columns[y]) {
                *acc += p;
            }
        }
        let blocks = rgs.prefix_max[n - 1] + 1;
        let merged: f64 = sums.chunks(k).take(blocks).map(merged_term).sum();
        if merged < best.0 {
            best = (merged, rgs.labels.clone());
        }
    }
    let loss = (best.0 - baseline(pc)).max(0.0);
    Ok((Partition::from_labels(&best.1), loss))
}

/// Optimal degrading of a binary-input channel by dynamic programming over
/// contiguous blocks in posterior order.
pub fn dp_optimal_binary(pc: &PosteriorChannel, target: usize) -> Result<(Partition, f64)> {
    if pc.num_inputs() != 2 {
        return Err(Error::NotBinary(pc.num_inputs()));
    }
    if target == 0 {
        return Err(Error::ZeroTarget);
    }
    let n = pc.len();
    if target >= n {
        return Ok((Partition::singletons(n), 0.0));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let pa = pc.letters()[a].posterior()[0];
        let pb = pc.letters()[b].posterior()[0];
        pa.total_cmp(&pb).then(a.cmp(&b))
    });

    // prefix sums of the joint columns and of the per-letter entropy terms
    let mut p0 = vec![0.0; n + 1];
    let mut p1 = vec![0.0; n + 1];
    let mut h = vec![0.0; n + 1];
    for (i, &y) in order.iter().enumerate() {
        let letter = &pc.letters()[y];
        p0[i + 1] = p0[i] + letter.joint()[0];
        p1[i + 1] = p1[i] + letter.joint()[1];
        h[i + 1] = h[i] + letter.conditional_entropy_term();
    }
    let segment = |i: usize, j: usize| -> f64 {
        if j == i + 1 {
            return 0.0;
        }
        merged_term(&[p0[j] - p0[i], p1[j] - p1[i]]) - (h[j] - h[i])
    };

    // cost[b][j]: best loss covering the first j letters with b + 1 blocks
    let mut cost = vec![vec![f64::INFINITY; n + 1]; target];
    let mut split = vec![vec![0usize; n + 1]; target];
    for (j, c) in cost[0].iter_mut().enumerate().skip(1) {
        *c = segment(0, j);
    }
    for b in 1..target {
        for j in b + 1..=n {
            for i in b..j {
                let c = cost[b - 1][i] + segment(i, j);
                if c < cost[b][j] {
                    cost[b][j] = c;
                    split[b][j] = i;
                }
            }
        }
    }
    let mut blocks_used = 0;
    for b in 1..target {
        if cost[b][n] < cost[blocks_used][n] {
            blocks_used = b;
        }
    }
    let loss = cost[blocks_used][n].max(0.0);

    let mut blocks = Vec::with_capacity(blocks_used + 1);
    let mut end = n;
    for b in (0..=blocks_used).rev() {
        let start = if b == 0 { 0 } else { split[b][end] };
        blocks.push(order[start..end].to_vec());
        end = start;
    }
    Ok((Partition::from_blocks(blocks), loss))
}
