//! Integer view of an instance over its potential target levels, and the
//! pairwise contribution table shared by every dynamic program.
//!
//! All positions and capacities are multiplied by the least common multiple
//! of their denominators, so the dynamic programs add and compare integers
//! only. Instances whose scaled magnitudes fit comfortably in `i128` use it;
//! everything else falls back to `BigInt`.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::model::{potential_targets, Instance};
use crate::rational::Rational;

/// Exact integer weight used inside the dynamic programs.
pub(crate) trait Weight:
    Clone + Ord + Debug + Send + Sync + Zero + Add<Output = Self> + Sub<Output = Self> + for<'a> AddAssign<&'a Self>
{
    fn from_big(value: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
}

impl Weight for i128 {
    fn from_big(value: &BigInt) -> Self {
        value.to_i128().expect("magnitude checked before choosing i128")
    }

    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Weight for BigInt {
    fn from_big(value: &BigInt) -> Self {
        value.clone()
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Headroom kept below `i128::MAX` for sums of contributions.
const I128_LIMIT_BITS: u64 = 100;

#[derive(Debug, Clone)]
pub(crate) struct GridAgent<W> {
    /// Index of the agent's position among the potential targets.
    pub slot: usize,
    /// Index of position plus capacity among the potential targets.
    pub reach_slot: usize,
    pub position: W,
    pub group: usize,
}

/// Potential target levels with an integer image of every agent.
#[derive(Debug, Clone)]
pub(crate) struct Grid<W> {
    pub levels: Vec<Rational>,
    pub scaled: Vec<W>,
    pub scale: BigInt,
    pub agents: Vec<GridAgent<W>>,
    pub num_groups: usize,
}

/// Least common multiple of all position and capacity denominators.
pub(crate) fn common_scale(instance: &Instance) -> BigInt {
    instance
        .agents()
        .iter()
        .flat_map(|a| [a.position.denom(), a.capacity.denom()])
        .fold(BigInt::one(), |acc, d| acc.lcm(d))
}

fn scaled_int(value: &Rational, scale: &BigInt) -> BigInt {
    let v = value.numer() * scale;
    debug_assert!((&v % value.denom()).is_zero());
    v / value.denom()
}

/// Whether the scaled instance fits the fast `i128` path.
pub(crate) fn fits_i128(instance: &Instance) -> bool {
    let scale = common_scale(instance);
    let n = BigInt::from(instance.num_agents().max(1));
    instance.agents().iter().all(|a| {
        let reach = scaled_int(&a.reach(), &scale);
        (reach * &n).bits() < I128_LIMIT_BITS
    })
}

impl<W: Weight> Grid<W> {
    pub fn new(instance: &Instance) -> Self {
        let scale = common_scale(instance);
        let levels = potential_targets(instance).levels().to_vec();
        let scaled = levels
            .iter()
            .map(|l| W::from_big(&scaled_int(l, &scale)))
            .collect();
        let slot_of = |value: &Rational| {
            levels
                .binary_search(value)
                .expect("positions and reaches are potential targets")
        };
        let agents = instance
            .agents()
            .iter()
            .map(|a| GridAgent {
                slot: slot_of(&a.position),
                reach_slot: slot_of(&a.reach()),
                position: W::from_big(&scaled_int(&a.position, &scale)),
                group: a.group,
            })
            .collect();
        Grid {
            levels,
            scaled,
            scale,
            agents,
            num_groups: instance.num_groups(),
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn to_rational(&self, value: &W) -> Rational {
        Rational::new(value.to_big(), self.scale.clone())
    }
}

/// For every ordered pair of levels `a < b`, the improvement collected by a
/// target at level `b` from agents positioned in `[level a, level b)`, plus
/// how many agents that is. Optionally split by group.
#[derive(Debug, Clone)]
pub(crate) struct ContributionTable<W> {
    m: usize,
    groups: usize,
    total: Vec<W>,
    count: Vec<u32>,
    per_group: Option<Vec<W>>,
}

impl<W: Weight> ContributionTable<W> {
    pub fn new(grid: &Grid<W>, with_groups: bool) -> Self {
        let m = grid.len();
        let g = grid.num_groups;
        let mut by_slot: Vec<Vec<&GridAgent<W>>> = vec![Vec::new(); m];
        for agent in &grid.agents {
            by_slot[agent.slot].push(agent);
        }

        let mut total = vec![W::zero(); m * m];
        let mut count = vec![0u32; m * m];
        let mut per_group = with_groups.then(|| vec![W::zero(); m * m * g]);

        let mut running_groups = vec![W::zero(); g];
        for b in 0..m {
            let target = &grid.scaled[b];
            let mut running = W::zero();
            let mut running_count = 0u32;
            running_groups.iter_mut().for_each(|x| *x = W::zero());
            for a in (0..b).rev() {
                for agent in &by_slot[a] {
                    if agent.reach_slot >= b {
                        let gain = target.clone() - agent.position.clone();
                        running += &gain;
                        running_count += 1;
                        if with_groups {
                            running_groups[agent.group] += &gain;
                        }
                    }
                }
                let idx = a * m + b;
                total[idx] = running.clone();
                count[idx] = running_count;
                if let Some(pg) = per_group.as_mut() {
                    pg[idx * g..(idx + 1) * g].clone_from_slice(&running_groups);
                }
            }
        }

        ContributionTable {
            m,
            groups: g,
            total,
            count,
            per_group,
        }
    }

    /// Improvement a leftmost target at level `b` earns from agents in `[a, b)`.
    #[inline]
    pub fn total(&self, a: usize, b: usize) -> &W {
        &self.total[a * self.m + b]
    }

    /// Number of agents in `[a, b)` that reach level `b`.
    #[inline]
    pub fn count(&self, a: usize, b: usize) -> usize {
        self.count[a * self.m + b] as usize
    }

    pub fn groups(&self, a: usize, b: usize) -> &[W] {
        let pg = self
            .per_group
            .as_ref()
            .expect("table built without group split");
        let idx = a * self.m + b;
        &pg[idx * self.groups..(idx + 1) * self.groups]
    }
}
