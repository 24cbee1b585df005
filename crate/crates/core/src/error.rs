use thiserror::Error;

/// Everything that can go wrong inside the solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("agent {agent} has negative position {value}")]
    NegativePosition { agent: usize, value: String },
    #[error("agent {agent} has negative capacity {value}")]
    NegativeCapacity { agent: usize, value: String },
    #[error("agent {agent} belongs to group {group} but the instance has {num_groups} groups")]
    GroupIndexOutOfRange {
        agent: usize,
        group: usize,
        num_groups: usize,
    },
    #[error("common capacity model requires equal capacities, found {first} and {other}")]
    CommonCapacityViolated { first: String, other: String },
    #[error("an instance needs at least one group")]
    NoGroups,
    #[error("exact frontier requires integral positions and capacities; scale the instance or use the FPTAS")]
    NonIntegralInstance,
    #[error("group {group} has agents with different capacities")]
    GroupCapacityNonUniform { group: usize },
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(String),
    #[error("targets violate the every-other spacing precondition at index {index}")]
    SpacingPreconditionViolated { index: usize },
    #[error("agent at {position} is outside the window [{low}, {high})")]
    AgentOutsideWindow {
        position: String,
        low: String,
        high: String,
    },
    #[error("the simultaneous approximation requires the common capacity model")]
    IndividualizedCapacityUnsupported,
    #[error("budget {k} is below the number of groups {g}")]
    BudgetBelowGroupCount { k: usize, g: usize },
    #[error("group {0} has no agents")]
    EmptyGroup(usize),
    #[error("search space of {subsets} subsets exceeds the cap of {cap}")]
    SearchSpaceTooLarge { subsets: u128, cap: u128 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NegativePosition { .. } => "NegativePosition",
            Error::NegativeCapacity { .. } => "NegativeCapacity",
            Error::GroupIndexOutOfRange { .. } => "GroupIndexOutOfRange",
            Error::CommonCapacityViolated { .. } => "CommonCapacityViolated",
            Error::NoGroups => "NoGroups",
            Error::NonIntegralInstance => "NonIntegralInstance",
            Error::GroupCapacityNonUniform { .. } => "GroupCapacityNonUniform",
            Error::EpsilonOutOfRange(_) => "EpsilonOutOfRange",
            Error::SpacingPreconditionViolated { .. } => "SpacingPreconditionViolated",
            Error::AgentOutsideWindow { .. } => "AgentOutsideWindow",
            Error::IndividualizedCapacityUnsupported => "IndividualizedCapacityUnsupported",
            Error::BudgetBelowGroupCount { .. } => "BudgetBelowGroupCount",
            Error::EmptyGroup(_) => "EmptyGroup",
            Error::SearchSpaceTooLarge { .. } => "SearchSpaceTooLarge",
            Error::ParameterOutOfRange(_) => "ParameterOutOfRange",
            Error::EmptySample => "EmptySample",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::ParseRational(_) => "ParseRational",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
