//! Instance and distribution files.

use std::fmt;
use std::fs;
use std::path::Path;

use goalpost_core::learning::{
    GroupMixture, MixtureComponent, PositionDistribution, Population, SupportPoint,
};
use goalpost_core::{Agent, CapacityModel, Instance, Rational};
use serde::Deserialize;

/// A failure before any solver runs.
#[derive(Debug)]
pub enum InputError {
    Io(String),
    Parse(String),
    Domain(goalpost_core::Error),
}

impl InputError {
    pub fn code(&self) -> &'static str {
        match self {
            InputError::Io(_) => "Io",
            InputError::Parse(_) => "InvalidInputFile",
            InputError::Domain(e) => e.code(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io(m) | InputError::Parse(m) => f.write_str(m),
            InputError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<goalpost_core::Error> for InputError {
    fn from(e: goalpost_core::Error) -> Self {
        InputError::Domain(e)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentRecord {
    position: Rational,
    capacity: Rational,
    #[serde(default)]
    group: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    agents: Vec<AgentRecord>,
    num_groups: usize,
    capacity_model: CapacityModel,
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError::Io(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Parse(format!("{}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<Instance, InputError> {
    let file: InstanceFile = parse(path, &read(path)?)?;
    let agents = file
        .agents
        .into_iter()
        .map(|a| Agent::new(a.position, a.capacity, a.group))
        .collect();
    Ok(Instance::new(agents, file.num_groups, file.capacity_model)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionRecord {
    capacity: Rational,
    support: Vec<SupportPoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentRecord {
    weight: Rational,
    capacity: Rational,
    support: Vec<SupportPoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureFile {
    components: Vec<ComponentRecord>,
}

/// A single distribution, or a mixture when the file has `components`.
pub fn load_population(path: &Path) -> Result<Population, InputError> {
    let text = read(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    if value.get("components").is_some() {
        let file: MixtureFile = parse(path, &text)?;
        let components = file
            .components
            .into_iter()
            .map(|c| {
                Ok(MixtureComponent {
                    weight: c.weight,
                    dist: PositionDistribution::new(c.support, c.capacity)?,
                })
            })
            .collect::<Result<Vec<_>, goalpost_core::Error>>()?;
        Ok(Population::Mixture(GroupMixture::new(components)?))
    } else {
        let file: DistributionRecord = parse(path, &text)?;
        Ok(Population::Single(PositionDistribution::new(
            file.support,
            file.capacity,
        )?))
    }
}
