//! Placement that is simultaneously approximately optimal for every group
//! under a common capacity `Δ`.
//!
//! 1. Each group is solved alone with `⌈k/g⌉` targets; triples closer than
//!    `Δ` are thinned.
//! 2. Targets are split by index mod 4 and the best part is kept, so kept
//!    targets are at least `2Δ` apart.
//! 3. Agents that did not improve are dropped and each target is replaced
//!    by the best single target for the agents in its window `[τ-Δ, τ)`.
//! 4. All groups' targets are merged; runs of window left ends closer than
//!    `Δ/g` share one target so no target cuts into another group's window.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    group_totals, improvement_report, total_improvement, Agent, CapacityModel, ImprovementReport,
    Instance, TargetSet,
};
use crate::pareto::{pareto_frontier, FrontierPoint};
use crate::rational::Rational;
use crate::welfare::{max_total_improvement, DpSolution};

/// Per-group isolated optimum at a fixed budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupOptima {
    pub budget: usize,
    pub per_group: Vec<DpSolution>,
}

impl GroupOptima {
    pub fn compute(instance: &Instance, budget: usize) -> Self {
        let per_group = (0..instance.num_groups())
            .into_par_iter()
            .map(|l| max_total_improvement(&instance.group_instance(l), budget))
            .collect();
        GroupOptima { budget, per_group }
    }

    pub fn values(&self) -> Vec<Rational> {
        self.per_group.iter().map(|s| s.value.clone()).collect()
    }

    /// `min_ℓ sw_ℓ / opt_ℓ`, counting groups with nothing to gain as 1.
    pub fn factor(&self, welfare: &[Rational]) -> Rational {
        welfare
            .iter()
            .zip(&self.per_group)
            .map(|(sw, opt)| {
                if opt.value.is_zero() {
                    Rational::one()
                } else {
                    sw / &opt.value
                }
            })
            .min()
            .unwrap_or_else(Rational::one)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupStep1 {
    pub optimum: TargetSet,
    pub pruned: TargetSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupStep3 {
    pub targets: TargetSet,
    /// Instance indices of the group's agents that improved after step 2.
    pub survivors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterferencePart {
    pub endpoints: Vec<Rational>,
    pub target: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step4 {
    pub union: TargetSet,
    pub endpoints: Vec<Rational>,
    pub parts: Vec<InterferencePart>,
    pub targets: TargetSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApproxTrace {
    pub k: usize,
    pub delta: Rational,
    pub group_budget: usize,
    pub step1: Vec<GroupStep1>,
    pub step2: Vec<TargetSet>,
    pub step3: Vec<GroupStep3>,
    pub step4: Step4,
    pub targets: TargetSet,
    pub report: ImprovementReport,
    pub opt_k: GroupOptima,
    pub opt_ceil: GroupOptima,
    pub alpha_k: Rational,
    pub alpha_ceil: Rational,
}

/// Removes the middle target of any triple spanning less than `delta`,
/// always fixing the leftmost violation first.
pub fn prune_every_other(targets: &TargetSet, delta: &Rational) -> TargetSet {
    let mut levels = targets.levels().to_vec();
    while let Some(j) = (0..levels.len().saturating_sub(2))
        .find(|&j| levels[j + 2] < &levels[j] + delta)
    {
        levels.remove(j + 1);
    }
    TargetSet::new(levels)
}

/// The index-mod-4 part of `targets` with the most improvement on
/// `group_agents`. Ties go to the lowest residue.
pub fn distant_targets(
    targets: &TargetSet,
    group_agents: &[Agent],
    delta: &Rational,
) -> Result<TargetSet> {
    let levels = targets.levels();
    if let Some(index) = (0..levels.len().saturating_sub(2))
        .find(|&j| &levels[j + 2] - &levels[j] < *delta)
    {
        return Err(Error::SpacingPreconditionViolated { index });
    }
    let mut best: Option<(Rational, TargetSet)> = None;
    for residue in 0..4.min(levels.len()) {
        let part: TargetSet = levels.iter().skip(residue).step_by(4).cloned().collect();
        let value = total_improvement(group_agents, &part);
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, part));
        }
    }
    Ok(best.map(|(_, p)| p).unwrap_or_default())
}

/// Best single target for agents inside the window `[tau - delta, tau)`.
/// An empty window keeps `tau`.
pub fn local_reopt(tau: &Rational, window: &[Agent], delta: &Rational) -> Result<Rational> {
    let low = tau - delta;
    if let Some(a) = window
        .iter()
        .find(|a| a.position < low || a.position >= *tau)
    {
        return Err(Error::AgentOutsideWindow {
            position: a.position.to_string(),
            low: low.to_string(),
            high: tau.to_string(),
        });
    }
    if window.is_empty() {
        return Ok(tau.clone());
    }
    let positions: Vec<Rational> = window.iter().map(|a| a.position.clone()).collect();
    let local = Instance::common(&positions, delta.clone())?;
    let best = max_total_improvement(&local, 1);
    Ok(best.targets.iter().next().cloned().unwrap_or_else(|| tau.clone()))
}

struct Plan {
    endpoints: Vec<Rational>,
    parts: Vec<InterferencePart>,
}

fn plan_interference(union_targets: &TargetSet, delta: &Rational, g: usize) -> Plan {
    let levels = union_targets.levels();
    let endpoints: Vec<Rational> = levels.iter().map(|t| t - delta).collect();
    let step = delta / &Rational::from(g);
    let mut parts = Vec::new();
    let mut u = 0;
    while u < levels.len() {
        let mut v = u;
        while v + 1 < levels.len() && &endpoints[v + 1] - &endpoints[v] < step {
            v += 1;
        }
        let target = match endpoints.get(v + 1) {
            Some(next) => (&levels[u]).min(next).clone(),
            None => levels[u].clone(),
        };
        parts.push(InterferencePart {
            endpoints: endpoints[u..=v].to_vec(),
            target,
        });
        u = v + 1;
    }
    Plan { endpoints, parts }
}

/// One target per run of window left ends spaced less than `delta / g`.
pub fn resolve_interference(union_targets: &TargetSet, delta: &Rational, g: usize) -> TargetSet {
    plan_interference(union_targets, delta, g)
        .parts
        .into_iter()
        .map(|p| p.target)
        .collect()
}

/// Runs the four-step procedure on a common-capacity instance with `k >= g`.
pub fn approx_solution(instance: &Instance, k: usize) -> Result<ApproxTrace> {
    if instance.capacity_model() == CapacityModel::Individualized {
        return Err(Error::IndividualizedCapacityUnsupported);
    }
    let g = instance.num_groups();
    if k < g {
        return Err(Error::BudgetBelowGroupCount { k, g });
    }
    if let Some(&empty) = instance.empty_groups().first() {
        return Err(Error::EmptyGroup(empty));
    }
    let delta = instance.common_capacity().unwrap_or_else(Rational::zero);
    let group_budget = k.div_ceil(g);
    let opt_ceil = GroupOptima::compute(instance, group_budget);

    let per_group: Vec<(GroupStep1, TargetSet, GroupStep3)> = (0..g)
        .into_par_iter()
        .map(|l| group_steps(instance, l, &delta, &opt_ceil.per_group[l].targets))
        .collect::<Result<_>>()?;

    let union = per_group
        .iter()
        .fold(TargetSet::empty(), |acc, (_, _, s3)| acc.union(&s3.targets));
    let plan = plan_interference(&union, &delta, g);
    let targets: TargetSet = plan.parts.iter().map(|p| p.target.clone()).collect();
    let report = improvement_report(instance, &targets);
    let opt_k = GroupOptima::compute(instance, k);
    let alpha_k = opt_k.factor(&report.group_totals);
    let alpha_ceil = opt_ceil.factor(&report.group_totals);

    let mut step1 = Vec::with_capacity(g);
    let mut step2 = Vec::with_capacity(g);
    let mut step3 = Vec::with_capacity(g);
    for (s1, s2, s3) in per_group {
        step1.push(s1);
        step2.push(s2);
        step3.push(s3);
    }
    Ok(ApproxTrace {
        k,
        delta,
        group_budget,
        step1,
        step2,
        step3,
        step4: Step4 {
            union,
            endpoints: plan.endpoints,
            parts: plan.parts,
            targets: targets.clone(),
        },
        targets,
        report,
        opt_k,
        opt_ceil,
        alpha_k,
        alpha_ceil,
    })
}

fn group_steps(
    instance: &Instance,
    group: usize,
    delta: &Rational,
    optimum: &TargetSet,
) -> Result<(GroupStep1, TargetSet, GroupStep3)> {
    let members: Vec<(usize, &Agent)> = instance
        .agents()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.group == group)
        .collect();
    let agents: Vec<Agent> = members.iter().map(|(_, a)| (*a).clone()).collect();

    let pruned = if delta.is_positive() {
        prune_every_other(optimum, delta)
    } else {
        optimum.clone()
    };
    let kept = distant_targets(&pruned, &agents, delta)?;

    let survivors: Vec<usize> = members
        .iter()
        .filter(|(_, a)| crate::model::eligible_target(a, &kept).is_some())
        .map(|(i, _)| *i)
        .collect();
    let mut moved = Vec::with_capacity(kept.len());
    for tau in kept.iter() {
        let low = tau - delta;
        let window: Vec<Agent> = survivors
            .iter()
            .map(|&i| &instance.agents()[i])
            .filter(|a| a.position >= low && a.position < *tau)
            .cloned()
            .collect();
        moved.push(local_reopt(tau, &window, delta)?);
    }

    Ok((
        GroupStep1 {
            optimum: optimum.clone(),
            pruned,
        },
        kept,
        GroupStep3 {
            targets: TargetSet::new(moved),
            survivors,
        },
    ))
}

/// `min_ℓ sw_ℓ(targets) / opt_ℓ^budget`, with 1 for groups whose optimum is 0.
pub fn simultaneity_factor(instance: &Instance, targets: &TargetSet, budget: usize) -> Rational {
    GroupOptima::compute(instance, budget).factor(&group_totals(instance, targets))
}

/// Frontier point with the largest simultaneity factor at budget `k`.
/// Ties go to the earliest point in frontier order.
pub fn best_simultaneous_on_frontier(
    instance: &Instance,
    k: usize,
) -> Result<(Rational, FrontierPoint)> {
    let frontier = pareto_frontier(instance, k)?;
    let optima = GroupOptima::compute(instance, k);
    let mut best: Option<(Rational, FrontierPoint)> = None;
    for point in frontier.points {
        let alpha = optima.factor(&point.tuple.per_group);
        if best.as_ref().is_none_or(|(a, _)| alpha > *a) {
            best = Some((alpha, point));
        }
    }
    Ok(best.expect("a frontier always has at least one point"))
}
