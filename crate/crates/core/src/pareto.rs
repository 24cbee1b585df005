//! Exact Pareto frontier of per-group welfare, and the max-min point on it.
//!
//! Same recursion as the single-objective program, but every subproblem
//! stores the set of non-dominated welfare tuples (one witness each).
//! Composition adds the same contribution vector to every child tuple, so
//! dominance is preserved and pruning is applied at every subproblem.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fits_i128, ContributionTable, Grid, Weight};
use crate::model::{strip_unused, Instance, TargetSet};
use crate::rational::Rational;

/// Total improvement per group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WelfareTuple {
    pub per_group: Vec<Rational>,
}

impl WelfareTuple {
    pub fn new(per_group: Vec<Rational>) -> Self {
        WelfareTuple { per_group }
    }

    pub fn worst(&self) -> Rational {
        self.per_group
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Weakly better everywhere and strictly better somewhere.
    pub fn dominates(&self, other: &WelfareTuple) -> bool {
        weakly_dominates(&self.per_group, &other.per_group) && self != other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub tuple: WelfareTuple,
    pub targets: TargetSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParetoFrontier {
    pub points: Vec<FrontierPoint>,
}

impl ParetoFrontier {
    pub fn tuples(&self) -> Vec<WelfareTuple> {
        self.points.iter().map(|p| p.tuple.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn weakly_dominates<T: Ord>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Removes duplicate and dominated points. Among equal keys the earliest
/// point survives, so witnesses follow the caller's scan order.
pub(crate) fn prune_dominated<T: Ord, P>(mut points: Vec<P>, key: impl Fn(&P) -> &[T]) -> Vec<P> {
    // any dominator sorts lexicographically before what it dominates
    points.sort_by(|x, y| key(y).cmp(key(x)));
    let mut kept: Vec<P> = Vec::new();
    for p in points {
        if !kept.iter().any(|q| weakly_dominates(key(q), key(&p))) {
            kept.push(p);
        }
    }
    kept
}

#[derive(Debug, Clone)]
struct Point<W> {
    tuple: Vec<W>,
    slots: Vec<usize>,
}

fn frontier_dp<W: Weight>(instance: &Instance, k: usize) -> ParetoFrontier {
    let g = instance.num_groups();
    let grid: Grid<W> = Grid::new(instance);
    let m = grid.len();
    let zero = Point {
        tuple: vec![W::zero(); g],
        slots: Vec::new(),
    };
    if m == 0 || k == 0 {
        return finish(instance, &grid, vec![zero]);
    }
    let table = ContributionTable::new(&grid, true);

    let mut layer: Vec<Vec<Point<W>>> = vec![vec![zero.clone()]; m];
    #[allow(clippy::needless_range_loop)]
    for _kappa in 1..=k {
        let prev = &layer;
        let next: Vec<Vec<Point<W>>> = (0..m)
            .into_par_iter()
            .map(|a| {
                if a == m - 1 {
                    return vec![zero.clone()];
                }
                let mut candidates = Vec::new();
                for b in a + 1..m {
                    let gain = table.groups(a, b);
                    for child in &prev[b] {
                        let tuple = child
                            .tuple
                            .iter()
                            .zip(gain)
                            .map(|(x, y)| x.clone() + y.clone())
                            .collect();
                        let mut slots = Vec::with_capacity(child.slots.len() + 1);
                        slots.push(b);
                        slots.extend_from_slice(&child.slots);
                        candidates.push(Point { tuple, slots });
                    }
                }
                prune_dominated(candidates, |p| &p.tuple)
            })
            .collect();
        layer = next;
    }
    let root = std::mem::take(&mut layer[0]);
    finish(instance, &grid, root)
}

fn finish<W: Weight>(instance: &Instance, grid: &Grid<W>, root: Vec<Point<W>>) -> ParetoFrontier {
    let mut points: Vec<FrontierPoint> = root
        .into_iter()
        .map(|p| {
            let raw = TargetSet::new(p.slots.iter().map(|&s| grid.levels[s].clone()));
            FrontierPoint {
                tuple: WelfareTuple::new(p.tuple.iter().map(|w| grid.to_rational(w)).collect()),
                targets: strip_unused(instance, &raw),
            }
        })
        .collect();
    points.sort_by(|a, b| a.tuple.cmp(&b.tuple));
    ParetoFrontier { points }
}

/// All non-dominated per-group welfare tuples achievable with at most `k`
/// targets, each with a witnessing target set, sorted lexicographically.
pub fn pareto_frontier(instance: &Instance, k: usize) -> Result<ParetoFrontier> {
    if !instance.is_integral() {
        return Err(Error::NonIntegralInstance);
    }
    Ok(if fits_i128(instance) {
        frontier_dp::<i128>(instance, k)
    } else {
        frontier_dp::<BigInt>(instance, k)
    })
}

/// Frontier point maximizing the worst-off group's welfare. Ties go to the
/// lexicographically smallest tuple.
pub fn max_min_solution(instance: &Instance, k: usize) -> Result<(Rational, FrontierPoint)> {
    let frontier = pareto_frontier(instance, k)?;
    Ok(best_min_point(frontier))
}

pub(crate) fn best_min_point(frontier: ParetoFrontier) -> (Rational, FrontierPoint) {
    let mut best: Option<(Rational, FrontierPoint)> = None;
    for point in frontier.points {
        let value = point.tuple.worst();
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, point));
        }
    }
    best.expect("a frontier always has at least one point")
}
