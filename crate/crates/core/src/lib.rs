//! Greedy-merge degrading of discrete memoryless channels.
//!
//! Given a channel `W(y|x)` and a fixed input distribution, [`greedy_merge`]
//! reduces the output alphabet to at most `L` letters by repeatedly merging
//! the pair of letters whose merger loses the least mutual information. The
//! [`bounds`] module provides the per-merge and cumulative upper bounds on
//! that loss together with the geometric predicates behind them, and
//! [`oracles`] computes the true optimum on small instances.
//!
//! ```
//! use greedy_degrade::{greedy_merge, random_channel, to_posterior_form};
//!
//! let (channel, input) = random_channel(2, 64, 7).unwrap();
//! let pc = to_posterior_form(&channel, &input).unwrap();
//! let report = greedy_merge(&pc, 8).unwrap();
//! assert_eq!(report.result.len(), 8);
//! assert!(report.total_delta <= greedy_degrade::bounds::corollary_rhs(2, 8).unwrap());
//! ```

pub mod bounds;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod io;
pub mod merge;
pub mod oracles;
pub mod random;

pub use channel::{
    apply_degrading_map, eta, mutual_information, to_posterior_form, Channel, DegradingMap, InputDistribution,
    OutputLetter, PosteriorChannel,
};
pub use error::{Error, Result};
pub use merge::{find_min_pair, greedy_merge, merge_delta, merged_letter, DegradeReport, MergeCandidate, MergeStep};
pub use oracles::{brute_force_optimal, dp_optimal_binary, enumerate_partitions, Partition};
pub use random::{random_channel, GeneratorSpec};
