use std::path::PathBuf;

use kpell_core::reduction::{CampaignReport, FailureKind};
use kpell_core::search::SolutionRecord;
use kpell_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Pass = 0,
    Mismatch = 1,
    Usage = 2,
    Epsilon = 3,
    Precision = 4,
    Io = 5,
    Interrupted = 130,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// The more serious of two outcomes.
    pub fn worst(self, other: Exit) -> Exit {
        fn rank(e: Exit) -> u8 {
            match e {
                Exit::Pass => 0,
                Exit::Mismatch => 1,
                Exit::Epsilon => 2,
                Exit::Precision => 3,
                Exit::Io => 4,
                Exit::Usage => 5,
                Exit::Interrupted => 6,
            }
        }
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    pub fn of_error(e: &Error) -> Exit {
        match e {
            Error::EpsilonNeverPositive { .. } => Exit::Epsilon,
            Error::PrecisionExhausted { .. } | Error::Uncertified { .. } => Exit::Precision,
            Error::Io(_) | Error::Json(_) => Exit::Io,
            Error::Interrupted => Exit::Interrupted,
            Error::Precondition(_) => Exit::Usage,
            _ => Exit::Mismatch,
        }
    }

    /// Exit code implied by the failures recorded in a campaign, or by the
    /// campaign missing its target.
    pub fn of_campaign(rep: &CampaignReport, target_met: bool) -> Exit {
        let from_failures = rep.failures.iter().fold(Exit::Pass, |acc, f| {
            acc.worst(match f.kind {
                FailureKind::EpsilonNeverPositive => Exit::Epsilon,
                FailureKind::PrecisionExhausted => Exit::Precision,
                FailureKind::Other => Exit::Mismatch,
            })
        });
        if from_failures != Exit::Pass {
            from_failures
        } else if target_met {
            Exit::Pass
        } else {
            Exit::Mismatch
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub precision_bits: u32,
    pub precision_cap: u32,
    pub k_range: [usize; 2],
    pub d_range: [u8; 2],
    pub n_max: i64,
    pub convergent_advance_budget: usize,
    pub output: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            precision_bits: 2048,
            precision_cap: 1 << 20,
            k_range: [3, 400],
            d_range: [1, 9],
            n_max: 99,
            convergent_advance_budget: 40,
            output: None,
            checkpoint: None,
            jobs: None,
        }
    }
}

/// One section of the verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub status: Status,
    pub computed: Value,
    /// Value as published alongside the theorem.
    pub published_value: String,
    /// Short locator of the published claim.
    pub published_ref: String,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: PipelineConfig,
    pub stages: Vec<Section>,
    pub solutions: Vec<SolutionRecord>,
    pub verdict: Status,
}

impl VerificationReport {
    pub fn compute_verdict(stages: &[Section]) -> Status {
        if stages.iter().all(|s| s.status != Status::Fail) {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}
