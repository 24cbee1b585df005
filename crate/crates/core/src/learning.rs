//! Sample-size bounds for learning target placements from sampled agents,
//! and a seeded Monte-Carlo check of the resulting deviation.
//!
//! Distributions have finite support, so expected improvement is exact and
//! the supremum over target sets runs over every subset of at most `k`
//! levels induced by the support.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eligible_target, Agent, TargetSet};
use crate::oracle::{for_each_subset, subset_count, DEFAULT_MAX_SUBSETS};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub position: Rational,
    pub probability: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct PositionDistribution {
    capacity: Rational,
    support: Vec<SupportPoint>,
}

#[derive(Deserialize)]
struct RawDistribution {
    capacity: Rational,
    support: Vec<SupportPoint>,
}

impl TryFrom<RawDistribution> for PositionDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        PositionDistribution::new(raw.support, raw.capacity)
    }
}

impl PositionDistribution {
    pub fn new(support: Vec<SupportPoint>, capacity: Rational) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if capacity.is_negative() {
            return Err(Error::InvalidDistribution(format!("negative capacity {capacity}")));
        }
        for p in &support {
            if p.position.is_negative() {
                return Err(Error::InvalidDistribution(format!(
                    "negative position {}",
                    p.position
                )));
            }
            if !p.probability.is_positive() {
                return Err(Error::InvalidDistribution(format!(
                    "non-positive probability {}",
                    p.probability
                )));
            }
        }
        let total: Rational = support.iter().map(|p| p.probability.clone()).sum();
        if total != Rational::one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(PositionDistribution { capacity, support })
    }

    /// Uniform over the given positions (repeats add weight).
    pub fn uniform(positions: &[Rational], capacity: Rational) -> Result<Self> {
        let p = Rational::new(1, positions.len().max(1) as i64);
        let support = positions
            .iter()
            .map(|x| SupportPoint {
                position: x.clone(),
                probability: p.clone(),
            })
            .collect();
        Self::new(support, capacity)
    }

    pub fn point_mass(position: Rational, capacity: Rational) -> Result<Self> {
        Self::uniform(&[position], capacity)
    }

    pub fn capacity(&self) -> &Rational {
        &self.capacity
    }

    pub fn support(&self) -> &[SupportPoint] {
        &self.support
    }

    fn agent(&self, i: usize) -> Agent {
        Agent::new(self.support[i].position.clone(), self.capacity.clone(), 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: Rational,
    #[serde(flatten)]
    pub dist: PositionDistribution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct GroupMixture {
    components: Vec<MixtureComponent>,
}

#[derive(Deserialize)]
struct RawMixture {
    components: Vec<MixtureComponent>,
}

impl TryFrom<RawMixture> for GroupMixture {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        GroupMixture::new(raw.components)
    }
}

impl GroupMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("no components".into()));
        }
        if let Some(c) = components.iter().find(|c| !c.weight.is_positive()) {
            return Err(Error::InvalidDistribution(format!(
                "non-positive weight {}",
                c.weight
            )));
        }
        let total: Rational = components.iter().map(|c| c.weight.clone()).sum();
        if total != Rational::one() {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(GroupMixture { components })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn alpha_min(&self) -> Rational {
        self.components
            .iter()
            .map(|c| c.weight.clone())
            .min()
            .expect("at least one component")
    }
}

/// Either a single population or one distribution per group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Population {
    Mixture(GroupMixture),
    Single(PositionDistribution),
}

impl Population {
    fn groups(&self) -> Vec<(Rational, &PositionDistribution)> {
        match self {
            Population::Single(d) => vec![(Rational::one(), d)],
            Population::Mixture(m) => m
                .components
                .iter()
                .map(|c| (c.weight.clone(), &c.dist))
                .collect(),
        }
    }
}

fn check_common(epsilon: &Rational, delta: &Rational, k: usize, delta_max: &Rational) -> Result<()> {
    if !epsilon.is_positive() {
        return Err(Error::ParameterOutOfRange(format!("epsilon must be positive, got {epsilon}")));
    }
    if !delta.is_positive() || *delta >= Rational::one() {
        return Err(Error::ParameterOutOfRange(format!("delta must lie in (0, 1), got {delta}")));
    }
    if k == 0 {
        return Err(Error::ParameterOutOfRange("k must be at least 1".into()));
    }
    if delta_max.is_negative() {
        return Err(Error::ParameterOutOfRange(format!(
            "delta_max must be non-negative, got {delta_max}"
        )));
    }
    Ok(())
}

fn ceil_at_least_one(x: f64) -> u64 {
    if x.is_finite() && x > 1.0 {
        x.ceil() as u64
    } else {
        1
    }
}

/// `⌈ε⁻² Δ_max² (k ln k + ln(1/δ))⌉`, at least 1.
pub fn required_samples_single(
    epsilon: &Rational,
    delta: &Rational,
    k: usize,
    delta_max: &Rational,
) -> Result<u64> {
    check_common(epsilon, delta, k, delta_max)?;
    let (e, d, dm, k) = (epsilon.to_f64(), delta.to_f64(), delta_max.to_f64(), k as f64);
    Ok(ceil_at_least_one(
        dm * dm / (e * e) * (k * k.ln() + (1.0 / d).ln()),
    ))
}

/// `⌈(2/α_min)(ε⁻² Δ_max² (k ln k + ln(2g/δ)) + 4 ln(2g/δ))⌉`, at least 1.
pub fn required_samples_groups(
    epsilon: &Rational,
    delta: &Rational,
    k: usize,
    delta_max: &Rational,
    g: usize,
    alpha_min: &Rational,
) -> Result<u64> {
    check_common(epsilon, delta, k, delta_max)?;
    if g == 0 {
        return Err(Error::ParameterOutOfRange("g must be at least 1".into()));
    }
    if !alpha_min.is_positive() || *alpha_min > Rational::one() {
        return Err(Error::ParameterOutOfRange(format!(
            "alpha_min must lie in (0, 1], got {alpha_min}"
        )));
    }
    let (e, d, dm, k) = (epsilon.to_f64(), delta.to_f64(), delta_max.to_f64(), k as f64);
    let log_term = (2.0 * g as f64 / d).ln();
    let inner = dm * dm / (e * e) * (k * k.ln() + log_term) + 4.0 * log_term;
    Ok(ceil_at_least_one(2.0 / alpha_min.to_f64() * inner))
}

fn improvement(agent: &Agent, targets: &TargetSet) -> Rational {
    eligible_target(agent, targets)
        .map(|t| t - &agent.position)
        .unwrap_or_else(Rational::zero)
}

/// Exact expected per-agent improvement.
pub fn expected_improvement(dist: &PositionDistribution, targets: &TargetSet) -> Rational {
    (0..dist.support.len())
        .map(|i| &dist.support[i].probability * &improvement(&dist.agent(i), targets))
        .sum()
}

/// Mean per-agent improvement over a sample sharing one capacity.
pub fn empirical_improvement(
    sample: &[Rational],
    capacity: &Rational,
    targets: &TargetSet,
) -> Result<Rational> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let total: Rational = sample
        .iter()
        .map(|p| improvement(&Agent::new(p.clone(), capacity.clone(), 0), targets))
        .sum();
    Ok(total / Rational::from(sample.len()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentParams {
    pub k: usize,
    pub epsilon: Rational,
    pub delta: Rational,
    pub trials: usize,
    pub seed: u64,
    /// A trial succeeds when every deviation is at most `constant * epsilon`.
    pub constant: Rational,
    pub max_subsets: u128,
}

impl ExperimentParams {
    pub fn new(k: usize, epsilon: Rational, delta: Rational, trials: usize, seed: u64) -> Self {
        ExperimentParams {
            k,
            epsilon,
            delta,
            trials,
            seed,
            constant: Rational::one(),
            max_subsets: DEFAULT_MAX_SUBSETS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub n: u64,
    pub trials: usize,
    pub success_fraction: Rational,
    pub worst_deviation: Rational,
    /// Trials in which some group drew no sample; counted as failures.
    pub empty_group_trials: usize,
}

/// Number of samples the bounds prescribe for this population.
pub fn required_samples_for(population: &Population, params: &ExperimentParams) -> Result<u64> {
    match population {
        Population::Single(d) => {
            required_samples_single(&params.epsilon, &params.delta, params.k, d.capacity())
        }
        Population::Mixture(m) => {
            let delta_max = m
                .components
                .iter()
                .map(|c| c.dist.capacity.clone())
                .max()
                .expect("at least one component");
            required_samples_groups(
                &params.epsilon,
                &params.delta,
                params.k,
                &delta_max,
                m.components.len(),
                &m.alpha_min(),
            )
        }
    }
}

/// Draws `n` agents per trial and records the largest gap between
/// empirical and expected improvement over every candidate target set and
/// every group.
pub fn deviation_experiment(
    population: &Population,
    params: &ExperimentParams,
) -> Result<ExperimentReport> {
    if params.trials == 0 {
        return Err(Error::ParameterOutOfRange("trials must be at least 1".into()));
    }
    let n = required_samples_for(population, params)?;
    let groups = population.groups();

    let grid = TargetSet::new(groups.iter().flat_map(|(_, d)| {
        d.support
            .iter()
            .flat_map(|p| [p.position.clone(), &p.position + &d.capacity])
    }));
    let subsets = subset_count(grid.len(), params.k);
    if subsets > params.max_subsets {
        return Err(Error::SearchSpaceTooLarge {
            subsets,
            cap: params.max_subsets,
        });
    }
    let mut candidates = Vec::new();
    for_each_subset(grid.levels(), params.k, |s| {
        candidates.push(TargetSet::new(s.iter().cloned()))
    });

    // gains[ℓ][c][i]: improvement of support point i of group ℓ under candidate c
    let gains: Vec<Vec<Vec<Rational>>> = groups
        .iter()
        .map(|(_, d)| {
            candidates
                .iter()
                .map(|t| (0..d.support.len()).map(|i| improvement(&d.agent(i), t)).collect())
                .collect()
        })
        .collect();
    let expected: Vec<Vec<Rational>> = groups
        .iter()
        .zip(&gains)
        .map(|((_, d), g)| {
            g.iter()
                .map(|row| {
                    row.iter()
                        .zip(&d.support)
                        .map(|(x, p)| x * &p.probability)
                        .sum()
                })
                .collect()
        })
        .collect();

    let group_sampler = WeightedIndex::new(groups.iter().map(|(w, _)| w.to_f64()))
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let point_samplers = groups
        .iter()
        .map(|(_, d)| WeightedIndex::new(d.support.iter().map(|p| p.probability.to_f64())))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let threshold = &params.constant * &params.epsilon;

    let outcomes: Vec<Option<Rational>> = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(trial as u64);
            let mut counts: Vec<Vec<u64>> =
                groups.iter().map(|(_, d)| vec![0; d.support.len()]).collect();
            for _ in 0..n {
                let l = group_sampler.sample(&mut rng);
                counts[l][point_samplers[l].sample(&mut rng)] += 1;
            }
            let mut worst = Rational::zero();
            for (l, row_counts) in counts.iter().enumerate() {
                let n_l: u64 = row_counts.iter().sum();
                if n_l == 0 {
                    return None;
                }
                let n_l = Rational::from_integer(n_l);
                for (c, row) in gains[l].iter().enumerate() {
                    let sum: Rational = row
                        .iter()
                        .zip(row_counts)
                        .filter(|(_, &cnt)| cnt > 0)
                        .map(|(x, &cnt)| x * &Rational::from_integer(cnt))
                        .sum();
                    let dev = (sum / &n_l - &expected[l][c]).abs();
                    if dev > worst {
                        worst = dev;
                    }
                }
            }
            Some(worst)
        })
        .collect();

    let empty_group_trials = outcomes.iter().filter(|o| o.is_none()).count();
    let successes = outcomes
        .iter()
        .filter(|o| o.as_ref().is_some_and(|d| *d <= threshold))
        .count();
    let worst_deviation = outcomes
        .into_iter()
        .flatten()
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(ExperimentReport {
        seed: params.seed,
        n,
        trials: params.trials,
        success_fraction: Rational::new(successes as i64, params.trials as i64),
        worst_deviation,
        empty_group_trials,
    })
}
