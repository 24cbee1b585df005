//! Agents, instances, target sets and the agent behavior rule.
//!
//! An agent at position `p` with capacity `d` moves to the least target level
//! `t` with `p < t <= p + d`; if there is none it stays put. Welfare is the
//! total distance moved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub position: Rational,
    pub capacity: Rational,
    pub group: usize,
}

impl Agent {
    pub fn new(position: Rational, capacity: Rational, group: usize) -> Self {
        Agent {
            position,
            capacity,
            group,
        }
    }

    /// Highest level the agent can still reach.
    pub fn reach(&self) -> Rational {
        &self.position + &self.capacity
    }

    /// Whether target `level` is eligible: strictly above and within capacity.
    pub fn can_reach(&self, level: &Rational) -> bool {
        level > &self.position && level <= &self.reach()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityModel {
    Common,
    Individualized,
}

/// A validated collection of agents split into `num_groups` groups.
///
/// Construct through [`Instance::new`]; every instance in circulation
/// satisfies the field invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    agents: Vec<Agent>,
    num_groups: usize,
    capacity_model: CapacityModel,
    #[serde(skip)]
    delta_max: Rational,
}

impl Instance {
    pub fn new(
        agents: Vec<Agent>,
        num_groups: usize,
        capacity_model: CapacityModel,
    ) -> Result<Self> {
        validate_instance(agents, num_groups, capacity_model)
    }

    /// Single-group instance under the common model.
    pub fn common(positions: &[Rational], capacity: Rational) -> Result<Self> {
        let agents = positions
            .iter()
            .map(|p| Agent::new(p.clone(), capacity.clone(), 0))
            .collect();
        Instance::new(agents, 1, CapacityModel::Common)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn capacity_model(&self) -> CapacityModel {
        self.capacity_model
    }

    pub fn delta_max(&self) -> &Rational {
        &self.delta_max
    }

    /// The shared capacity under the common model (zero for an empty instance).
    pub fn common_capacity(&self) -> Option<Rational> {
        match self.capacity_model {
            CapacityModel::Common => Some(self.delta_max.clone()),
            CapacityModel::Individualized => None,
        }
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_groups];
        for a in &self.agents {
            sizes[a.group] += 1;
        }
        sizes
    }

    /// Groups with no agents. Legal, but several solvers reject them.
    pub fn empty_groups(&self) -> Vec<usize> {
        self.group_sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0)
            .map(|(g, _)| g)
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.position.is_integer() && a.capacity.is_integer())
    }

    /// The agents of one group, relabelled as a single-group instance.
    pub fn group_instance(&self, group: usize) -> Instance {
        let agents: Vec<Agent> = self
            .agents
            .iter()
            .filter(|a| a.group == group)
            .map(|a| Agent::new(a.position.clone(), a.capacity.clone(), 0))
            .collect();
        Instance::new(agents, 1, self.capacity_model).expect("subset of a valid instance")
    }

    /// Sub-instance over the listed agent indices, keeping group labels.
    pub fn restrict(&self, indices: &[usize]) -> Instance {
        let agents = indices.iter().map(|&i| self.agents[i].clone()).collect();
        Instance::new(agents, self.num_groups, self.capacity_model)
            .expect("subset of a valid instance")
    }
}

/// Checks every field invariant and records the maximum capacity.
pub fn validate_instance(
    agents: Vec<Agent>,
    num_groups: usize,
    capacity_model: CapacityModel,
) -> Result<Instance> {
    if num_groups == 0 {
        return Err(Error::NoGroups);
    }
    for (i, a) in agents.iter().enumerate() {
        if a.position.is_negative() {
            return Err(Error::NegativePosition {
                agent: i,
                value: a.position.to_string(),
            });
        }
        if a.capacity.is_negative() {
            return Err(Error::NegativeCapacity {
                agent: i,
                value: a.capacity.to_string(),
            });
        }
        if a.group >= num_groups {
            return Err(Error::GroupIndexOutOfRange {
                agent: i,
                group: a.group,
                num_groups,
            });
        }
    }
    if capacity_model == CapacityModel::Common {
        if let Some(first) = agents.first() {
            if let Some(other) = agents.iter().find(|a| a.capacity != first.capacity) {
                return Err(Error::CommonCapacityViolated {
                    first: first.capacity.to_string(),
                    other: other.capacity.to_string(),
                });
            }
        }
    }
    let delta_max = agents
        .iter()
        .map(|a| &a.capacity)
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    Ok(Instance {
        agents,
        num_groups,
        capacity_model,
        delta_max,
    })
}

/// A finite set of target levels, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct TargetSet {
    levels: Vec<Rational>,
}

impl TargetSet {
    pub fn new(levels: impl IntoIterator<Item = Rational>) -> Self {
        let mut levels: Vec<Rational> = levels.into_iter().collect();
        levels.sort();
        levels.dedup();
        TargetSet { levels }
    }

    pub fn empty() -> Self {
        TargetSet::default()
    }

    pub fn levels(&self) -> &[Rational] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, level: &Rational) -> bool {
        self.levels.binary_search(level).is_ok()
    }

    pub fn union(&self, other: &TargetSet) -> TargetSet {
        TargetSet::new(self.levels.iter().chain(other.levels.iter()).cloned())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.levels.iter()
    }
}

impl From<Vec<Rational>> for TargetSet {
    fn from(levels: Vec<Rational>) -> Self {
        TargetSet::new(levels)
    }
}

impl From<TargetSet> for Vec<Rational> {
    fn from(set: TargetSet) -> Self {
        set.levels
    }
}

impl FromIterator<Rational> for TargetSet {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        TargetSet::new(iter)
    }
}

impl<'a> IntoIterator for &'a TargetSet {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.levels.iter()
    }
}

/// The level the agent aims for, if any.
pub fn eligible_target<'a>(agent: &Agent, targets: &'a TargetSet) -> Option<&'a Rational> {
    let levels = targets.levels();
    let first_above = levels.partition_point(|t| t <= &agent.position);
    levels
        .get(first_above)
        .filter(|t| *t <= &agent.reach())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentOutcome {
    pub target: Option<Rational>,
    pub improvement: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImprovementReport {
    pub per_agent: Vec<AgentOutcome>,
    pub group_totals: Vec<Rational>,
    pub group_averages: Vec<Rational>,
    pub total: Rational,
}

impl ImprovementReport {
    pub fn min_group_total(&self) -> Rational {
        self.group_totals
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn improves(&self, agent: usize) -> bool {
        self.per_agent[agent].improvement.is_positive()
    }

    /// Number of agents that strictly improve.
    pub fn improvers(&self) -> usize {
        self.per_agent
            .iter()
            .filter(|o| o.improvement.is_positive())
            .count()
    }
}

/// Applies the behavior rule to every agent and aggregates per group.
pub fn improvement_report(instance: &Instance, targets: &TargetSet) -> ImprovementReport {
    let g = instance.num_groups();
    let mut group_totals = vec![Rational::zero(); g];
    let mut total = Rational::zero();
    let per_agent = instance
        .agents()
        .iter()
        .map(|agent| {
            let target = eligible_target(agent, targets).cloned();
            let improvement = match &target {
                Some(t) => t - &agent.position,
                None => Rational::zero(),
            };
            group_totals[agent.group] += &improvement;
            total += &improvement;
            AgentOutcome {
                target,
                improvement,
            }
        })
        .collect();
    let group_averages = group_totals
        .iter()
        .zip(instance.group_sizes())
        .map(|(t, size)| {
            if size == 0 {
                Rational::zero()
            } else {
                t / Rational::from(size)
            }
        })
        .collect();
    ImprovementReport {
        per_agent,
        group_totals,
        group_averages,
        total,
    }
}

/// Total improvement only; avoids building the per-agent report.
pub fn total_improvement(agents: &[Agent], targets: &TargetSet) -> Rational {
    agents
        .iter()
        .filter_map(|a| eligible_target(a, targets).map(|t| t - &a.position))
        .sum()
}

/// Per-group totals only.
pub fn group_totals(instance: &Instance, targets: &TargetSet) -> Vec<Rational> {
    let mut totals = vec![Rational::zero(); instance.num_groups()];
    for a in instance.agents() {
        if let Some(t) = eligible_target(a, targets) {
            totals[a.group] += t - &a.position;
        }
    }
    totals
}

/// Union of all positions and positions plus capacities, sorted.
pub fn potential_targets(instance: &Instance) -> TargetSet {
    TargetSet::new(
        instance
            .agents()
            .iter()
            .flat_map(|a| [a.position.clone(), a.reach()]),
    )
}

/// Drops levels that no agent aims for. Never changes any agent's outcome.
pub fn strip_unused(instance: &Instance, targets: &TargetSet) -> TargetSet {
    let used: Vec<Rational> = instance
        .agents()
        .iter()
        .filter_map(|a| eligible_target(a, targets).cloned())
        .collect();
    TargetSet::new(used)
}
