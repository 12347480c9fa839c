#![allow(dead_code)]

use greedy_degrade::random::Sampler;
use greedy_degrade::{random_channel, to_posterior_form, Channel, InputDistribution, PosteriorChannel};

/// `Σ p(x,y) ln(p(x,y) / (π(x) q(y)))` straight from the matrix, sharing no
/// code with the library's posterior-form evaluation.
pub fn matrix_mutual_information(rows: &[Vec<f64>], input: &[f64]) -> f64 {
    let outputs = rows[0].len();
    let q: Vec<f64> = (0..outputs)
        .map(|y| rows.iter().zip(input).map(|(row, p)| p * row[y]).sum())
        .collect();
    let mut total = 0.0;
    for (row, &p) in rows.iter().zip(input) {
        for (y, &w) in row.iter().enumerate() {
            let joint = p * w;
            if joint > 0.0 {
                total += joint * (w / q[y]).ln();
            }
        }
    }
    total
}

pub fn channel_mi(channel: &Channel, input: &InputDistribution) -> f64 {
    matrix_mutual_information(channel.rows(), input.probs())
}

pub fn random_instance(num_inputs: usize, num_outputs: usize, seed: u64) -> (Channel, InputDistribution, PosteriorChannel) {
    let (channel, input) = random_channel(num_inputs, num_outputs, seed).unwrap();
    let pc = to_posterior_form(&channel, &input).unwrap();
    (channel, input, pc)
}

/// Random row-stochastic matrix `Φ(z|y)` with `outputs` columns per row.
pub fn random_stochastic_map(sampler: &mut Sampler, inputs: usize, outputs: usize) -> Vec<Vec<f64>> {
    (0..inputs).map(|_| sampler.flat_dirichlet(outputs)).collect()
}

/// `Q(z|x) = Σ_y W(y|x) Φ(z|y)`.
pub fn compose(channel: &[Vec<f64>], phi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let outputs = phi[0].len();
    channel
        .iter()
        .map(|row| {
            (0..outputs)
                .map(|z| row.iter().zip(phi).map(|(w, p)| w * p[z]).sum())
                .collect()
        })
        .collect()
}

/// Channel rows rebuilt from a posterior channel: `W(y|x) = p(x,y) / π(x)`.
pub fn rows_of(pc: &PosteriorChannel) -> (Vec<Vec<f64>>, Vec<f64>) {
    let input = pc.input_probs().to_vec();
    let rows = (0..pc.num_inputs())
        .map(|x| pc.letters().iter().map(|l| l.joint()[x] / input[x]).collect())
        .collect();
    (rows, input)
}

/// Outcome of a randomized property check.
#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub samples: usize,
    /// Samples where the implication's premise held.
    pub exercised: usize,
    pub violations: usize,
}

fn log_uniform(sampler: &mut Sampler, lo: f64, hi: f64) -> f64 {
    (lo.ln() + sampler.uniform() * (hi.ln() - lo.ln())).exp()
}

fn symmetric(sampler: &mut Sampler) -> f64 {
    2.0 * sampler.uniform() - 1.0
}

/// Scalar ball test: the interval `[α − ω↓, α + ω↑]` against `d(α, ζ) ≤ r`.
pub fn interval_check(samples: usize, seed: u64) -> Tally {
    use greedy_degrade::bounds::{d_scalar, omega_down, omega_up, Radius};
    let mut sampler = Sampler::new(seed);
    let mut tally = Tally { samples, ..Tally::default() };
    for i in 0..samples {
        let alpha = if i % 10 == 0 { 0.0 } else { sampler.uniform() };
        let r = Radius::new(log_uniform(&mut sampler, 1e-6, 2.0)).unwrap();
        let (down, up) = (omega_down(alpha, r), omega_up(alpha, r));
        let zeta = (alpha + 2.0 * symmetric(&mut sampler) * up.max(down)).clamp(0.0, 1.0);
        let diff = zeta - alpha;
        let interval = -down <= diff && diff <= up;
        let direct = d_scalar(alpha, zeta) <= r.value();
        tally.exercised += usize::from(interval);
        tally.violations += usize::from(interval != direct);
    }
    tally
}

/// Vector ball test: `in_ball` against `d_vector(α, ζ) ≤ r`.
pub fn ball_check(samples: usize, seed: u64) -> Tally {
    use greedy_degrade::bounds::{d_vector, in_ball, omega_up, PosteriorVector, Radius};
    let mut sampler = Sampler::new(seed);
    let mut tally = Tally { samples, ..Tally::default() };
    for _ in 0..samples {
        let k = 2 + sampler.index(5);
        let alpha = sampler.flat_dirichlet(k);
        let r = Radius::new(log_uniform(&mut sampler, 1e-5, 1.0)).unwrap();
        let zeta: Vec<f64> = alpha
            .iter()
            .map(|&a| (a + 1.2 * symmetric(&mut sampler) * omega_up(a, r)).max(0.0))
            .collect();
        let pv = PosteriorVector::new(alpha.clone()).unwrap();
        let boxed = in_ball(&pv, r, &zeta).unwrap();
        let direct = d_vector(&alpha, &zeta).unwrap() <= r.value();
        tally.exercised += usize::from(boxed);
        tally.violations += usize::from(boxed != direct);
    }
    tally
}

/// `ζ ∈ C(α, r)` implies `ζ ∈ B(α, r)` and `Σ ζ = 1`.
pub fn box_in_ball_check(samples: usize, seed: u64) -> Tally {
    use greedy_degrade::bounds::{in_ball, in_box_c, omega_prime, x_max, PosteriorVector, Radius};
    let mut sampler = Sampler::new(seed);
    let mut tally = Tally { samples, ..Tally::default() };
    for _ in 0..samples {
        let k = 2 + sampler.index(5);
        let alpha = sampler.flat_dirichlet(k);
        let r = Radius::new(log_uniform(&mut sampler, 1e-5, 1.0)).unwrap();
        let top = x_max(&alpha);
        let mut zeta = alpha.clone();
        for x in (0..k).filter(|&x| x != top) {
            let w = omega_prime(alpha[x], r, k).unwrap();
            zeta[x] = (alpha[x] + symmetric(&mut sampler) * w).max(0.0);
        }
        let rest: f64 = (0..k).filter(|&x| x != top).map(|x| zeta[x]).sum();
        zeta[top] = 1.0 - rest;
        if zeta[top] < 0.0 {
            continue;
        }
        let pv = PosteriorVector::new(alpha).unwrap();
        if in_box_c(&pv, r, &zeta).unwrap() {
            tally.exercised += 1;
            let sums = (zeta.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
            if !(sums && in_ball(&pv, r, &zeta).unwrap()) {
                tally.violations += 1;
            }
        }
    }
    tally
}

/// Overlapping quadrants of letters sharing `x_max` imply `d(α, β) ≤ r`.
pub fn quadrant_check(samples: usize, seed: u64) -> Tally {
    use greedy_degrade::bounds::{d_vector, quadrants_intersect, PosteriorVector, Radius};
    let mut sampler = Sampler::new(seed);
    let mut tally = Tally { samples, ..Tally::default() };
    for _ in 0..samples {
        let k = 2 + sampler.index(5);
        let alpha = sampler.flat_dirichlet(k);
        let spread = log_uniform(&mut sampler, 1e-4, 0.5);
        let raw: Vec<f64> = alpha.iter().map(|&a| (a + spread * symmetric(&mut sampler)).max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let beta: Vec<f64> = raw.iter().map(|b| (b / total).min(1.0)).collect();
        let r = Radius::new(log_uniform(&mut sampler, 1e-5, 1.0)).unwrap();
        let (pa, pb) = (PosteriorVector::new(alpha.clone()).unwrap(), PosteriorVector::new(beta.clone()).unwrap());
        if let Some(true) = quadrants_intersect(&pa, &pb, r).unwrap() {
            tally.exercised += 1;
            if d_vector(&alpha, &beta).unwrap() > r.value() {
                tally.violations += 1;
            }
        }
    }
    tally
}

/// Random letter pairs: the exact merge loss never exceeds the pair bound.
pub fn pair_bound_check(samples: usize, seed: u64) -> Tally {
    use greedy_degrade::bounds::pair_delta_bound;
    use greedy_degrade::merge_delta;
    let mut sampler = Sampler::new(seed);
    let mut tally = Tally { samples, exercised: samples, violations: 0 };
    for _ in 0..samples {
        let k = 2 + sampler.index(5);
        let alpha = sampler.flat_dirichlet(k);
        let beta = sampler.flat_dirichlet(k);
        let (pi_a, pi_b) = (sampler.uniform(), sampler.uniform());
        let scale = pi_a + pi_b;
        if pi_a <= 0.0 || pi_b <= 0.0 {
            continue;
        }
        // the loss is homogeneous in the masses, so evaluate it on the
        // normalized pair and scale back
        let pc = PosteriorChannel::from_masses_posteriors(&[pi_a / scale, 1.0 - pi_a / scale], &[alpha.clone(), beta.clone()])
            .unwrap();
        let delta = scale * merge_delta(&pc, 0, 1).unwrap();
        let bound = pair_delta_bound(pi_a, pi_b, &alpha, &beta, k).unwrap();
        tally.violations += usize::from(delta > bound);
    }
    tally
}

/// Brute force never loses more than greedy, and on binary inputs the DP
/// agrees with brute force within 1e-10. One sample per (instance, L).
pub fn oracle_sandwich(instances: u64, seed: u64) -> Tally {
    use greedy_degrade::{brute_force_optimal, dp_optimal_binary, greedy_merge};
    let mut tally = Tally::default();
    for i in 0..instances {
        let k = 2 + (i % 2) as usize;
        let n = 5 + (i % 5) as usize;
        let (_, _, pc) = random_instance(k, n, greedy_degrade::random::split_seed(seed, i));
        for target in 2..=4 {
            tally.samples += 1;
            let (_, best) = brute_force_optimal(&pc, target).unwrap();
            let greedy = greedy_merge(&pc, target).unwrap().total_delta;
            let mut ok = best <= greedy + 1e-12;
            if pc.num_inputs() == 2 {
                tally.exercised += 1;
                let (_, dp) = dp_optimal_binary(&pc, target).unwrap();
                ok &= (dp - best).abs() <= 1e-10;
            }
            tally.violations += usize::from(!ok);
        }
    }
    tally
}
