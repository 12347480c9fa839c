//! Sweeps, bound verification and oracle comparisons behind the CLI.

use std::fmt;
use std::path::PathBuf;

use crate::bounds::{corollary_rhs, pair_delta_bound, theorem1_rhs};
use crate::channel::{to_posterior_form, PosteriorChannel};
use crate::error::{Error, Result};
use crate::merge::{find_min_pair, greedy_merge, merge_delta};
use crate::oracles::{brute_force_optimal, dp_optimal_binary};
use crate::random::{random_channel, split_seed};

/// Header of the sweep CSV.
pub const CSV_HEADER: &str = "seed,trial,X,Y,L,delta_greedy,bound,ratio";

/// Absolute slack for comparing a computed loss against a bound that may be 0.
pub const ROUNDOFF_SLACK: f64 = 1e-12;

/// 12 significant digits, scientific notation.
pub fn format_sci(value: f64) -> String {
    format!("{value:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub l_values: Vec<usize>,
    pub num_trials: usize,
    pub seed: u64,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_values.is_empty() {
            return Err(Error::field("targets", "no target sizes given"));
        }
        if self.l_values.contains(&0) {
            return Err(Error::field("targets", "target sizes must be at least 1"));
        }
        if self.num_trials == 0 {
            return Err(Error::field("trials", "need at least one trial"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Seed of this trial's channel; `X=..,Y=..,seed=<this>` regenerates it.
    pub seed: u64,
    pub trial: usize,
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub target: usize,
    pub delta_greedy: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map(format_sci).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            self.seed,
            self.trial,
            self.num_inputs,
            self.num_outputs,
            self.target,
            format_sci(self.delta_greedy),
            opt(self.bound),
            opt(self.ratio)
        )
    }
}

/// Greedy losses for every trial and target size, in `(trial, L)` order.
/// Each trial runs greedy merging once down to the smallest target and reads
/// the larger targets off the trace.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let smallest = *config.l_values.iter().min().expect("validated nonempty");
    let mut rows = Vec::with_capacity(config.num_trials * config.l_values.len());
    for trial in 0..config.num_trials {
        let seed = split_seed(config.seed, trial as u64);
        let (channel, input) = random_channel(config.num_inputs, config.num_outputs, seed)?;
        let pc = to_posterior_form(&channel, &input)?;
        let report = greedy_merge(&pc, smallest)?;
        for &target in &config.l_values {
            let delta_greedy = report.total_delta_at(target);
            let bound = corollary_rhs(pc.num_inputs(), target).ok();
            rows.push(SweepRow {
                seed,
                trial,
                num_inputs: config.num_inputs,
                num_outputs: config.num_outputs,
                target,
                delta_greedy,
                bound,
                ratio: bound.map(|b| delta_greedy / b),
            });
        }
    }
    Ok(rows)
}

/// Rows whose greedy loss exceeds the cumulative bound.
pub fn bound_violations(rows: &[SweepRow]) -> Vec<&SweepRow> {
    rows.iter().filter(|r| r.ratio.is_some_and(|q| q > 1.0)).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.status, self.name, self.detail)
    }
}

fn check(name: impl Into<String>, ok: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

fn skip(name: impl Into<String>, detail: String) -> Check {
    Check {
        name: name.into(),
        status: CheckStatus::Skip,
        detail,
    }
}

/// Bound checks on one channel. `bound_scale` multiplies every bound and
/// exists so the failure path can be exercised; use 1.0 otherwise.
pub fn verify_channel(pc: &PosteriorChannel, targets: &[usize], bound_scale: f64) -> Result<Vec<Check>> {
    let k = pc.num_inputs();
    let n = pc.len();
    let mut checks = Vec::new();

    match theorem1_rhs(k, n) {
        Ok(rhs) => {
            let best = find_min_pair(pc)?;
            let rhs = rhs * bound_scale;
            checks.push(check(
                "per-merge-min-pair",
                best.delta <= rhs,
                format!("min pair loss {} <= {}", format_sci(best.delta), format_sci(rhs)),
            ));
        }
        Err(e) => checks.push(skip("per-merge-min-pair", e.to_string())),
    }

    let smallest = targets.iter().copied().min().unwrap_or(n).max(1);
    let report = greedy_merge(pc, smallest)?;
    let mut worst: Option<(usize, f64, f64)> = None;
    let mut bounded_steps = 0;
    for (step, &raw) in report.steps.iter().zip(report.raw_deltas()) {
        if let Ok(rhs) = theorem1_rhs(k, step.size_before) {
            bounded_steps += 1;
            let rhs = rhs * bound_scale;
            if worst.is_none_or(|(_, d, b)| raw / rhs > d / b) {
                worst = Some((step.size_before, raw, rhs));
            }
        }
    }
    match worst {
        Some((size, delta, rhs)) => checks.push(check(
            "per-merge-greedy-steps",
            delta <= rhs,
            format!(
                "{bounded_steps} steps checked, tightest at size {size}: {} <= {}",
                format_sci(delta),
                format_sci(rhs)
            ),
        )),
        None => checks.push(skip("per-merge-greedy-steps", format!("no greedy step with size > 2|X| = {}", 2 * k))),
    }

    for &target in targets {
        let name = format!("cumulative-L{target}");
        if n <= 2 * k {
            checks.push(skip(name, format!("cumulative bound needs |Y| > 2|X|, got |Y| = {n}")));
            continue;
        }
        match corollary_rhs(k, target) {
            Ok(rhs) => {
                let total = report.total_delta_at(target);
                let rhs = rhs * bound_scale;
                checks.push(check(
                    name,
                    total <= rhs,
                    format!("greedy loss {} <= {}", format_sci(total), format_sci(rhs)),
                ));
            }
            Err(e) => checks.push(skip(name, e.to_string())),
        }
    }

    let mut violations = 0usize;
    let mut pairs = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            let la = &pc.letters()[a];
            let lb = &pc.letters()[b];
            let delta = merge_delta(pc, a, b)?;
            let bound = pair_delta_bound(la.mass(), lb.mass(), la.posterior(), lb.posterior(), k)? * bound_scale;
            pairs += 1;
            if delta > bound + ROUNDOFF_SLACK {
                violations += 1;
            }
        }
    }
    if pairs == 0 {
        checks.push(skip("pair-bound", "fewer than two letters".into()));
    } else {
        checks.push(check(
            "pair-bound",
            violations == 0,
            format!("{pairs} pairs, {violations} exceed (pi_a+pi_b)|X|d(alpha,beta)"),
        ));
    }
    Ok(checks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    BruteForce,
    DynamicProgramming,
}

impl std::str::FromStr for OracleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(OracleMethod::BruteForce),
            "dp" => Ok(OracleMethod::DynamicProgramming),
            other => Err(Error::field("method", format!("expected `brute` or `dp`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub optimal_delta: f64,
    /// Optimal blocks in original output indices.
    pub blocks: Vec<Vec<usize>>,
    pub greedy_delta: f64,
}

impl OracleOutcome {
    pub fn gap(&self) -> f64 {
        self.greedy_delta - self.optimal_delta
    }
}

pub fn run_oracle(pc: &PosteriorChannel, target: usize, method: OracleMethod) -> Result<OracleOutcome> {
    let (partition, optimal_delta) = match method {
        OracleMethod::BruteForce => brute_force_optimal(pc, target)?,
        OracleMethod::DynamicProgramming => dp_optimal_binary(pc, target)?,
    };
    let greedy = greedy_merge(pc, target)?;
    Ok(OracleOutcome {
        optimal_delta,
        blocks: partition.original_blocks(pc),
        greedy_delta: greedy.total_delta,
    })
}
