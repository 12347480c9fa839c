//! JSON channel files and degrade reports.
//!
//! A channel file is `{"input_dist": [..], "channel": [[..], ..]}` with row
//! `x` of `channel` holding `W(y|x)`. A report carries `map`,
//! `total_delta_nats`, `steps` and the merged channel under the same two
//! keys, so a report is itself a valid channel file.

use serde::{Deserialize, Serialize};

use crate::bounds::theorem1_rhs;
use crate::channel::{apply_degrading_map, Channel, InputDistribution};
use crate::error::{Error, Result};
use crate::merge::DegradeReport;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub input_dist: Vec<f64>,
    pub channel: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn new(channel: &Channel, input: &InputDistribution) -> Self {
        Self {
            input_dist: input.probs().to_vec(),
            channel: channel.rows().to_vec(),
        }
    }

    /// Validates the file contents, `input_dist` first.
    pub fn validate(self, renormalize: bool) -> Result<(Channel, InputDistribution)> {
        let input = if renormalize {
            InputDistribution::renormalized(self.input_dist)?
        } else {
            InputDistribution::new(self.input_dist)?
        };
        let channel = if renormalize {
            Channel::renormalized(self.channel)?
        } else {
            Channel::new(self.channel)?
        };
        if channel.num_inputs() != input.len() {
            return Err(Error::field(
                "input_dist",
                format!("has {} entries but channel has {} rows", input.len(), channel.num_inputs()),
            ));
        }
        Ok((channel, input))
    }
}

/// Parses and validates a channel file. Non-finite numbers are not valid JSON
/// and fail at the parse stage.
pub fn parse_channel(json: &str, renormalize: bool) -> Result<(Channel, InputDistribution)> {
    let file: ChannelFile =
        serde_json::from_str(json).map_err(|e| Error::field("json", e.to_string()))?;
    file.validate(renormalize)
}

pub fn channel_to_json(channel: &Channel, input: &InputDistribution) -> String {
    serde_json::to_string_pretty(&ChannelFile::new(channel, input)).expect("plain data serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub a: usize,
    pub b: usize,
    pub delta: f64,
    pub size_before: usize,
    /// Per-merge bound at this alphabet size, present in traced reports where defined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub map: Vec<usize>,
    pub total_delta_nats: f64,
    pub steps: Vec<StepRecord>,
    pub input_dist: Vec<f64>,
    pub channel: Vec<Vec<f64>>,
}

impl ReportFile {
    /// `original` is the channel the report's map was computed for. With
    /// `trace`, steps carry the per-merge bound for the effective input
    /// alphabet wherever it is defined.
    pub fn new(report: &DegradeReport, original: &Channel, input: &InputDistribution, trace: bool) -> Result<Self> {
        let merged = apply_degrading_map(original, &report.map)?;
        let num_inputs = report.result.num_inputs();
        let steps = report
            .steps
            .iter()
            .map(|s| StepRecord {
                a: s.a,
                b: s.b,
                delta: s.delta,
                size_before: s.size_before,
                bound: if trace { theorem1_rhs(num_inputs, s.size_before).ok() } else { None },
            })
            .collect();
        Ok(Self {
            map: report.map.assignment().to_vec(),
            total_delta_nats: report.total_delta,
            steps,
            input_dist: input.probs().to_vec(),
            channel: merged.rows().to_vec(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}
