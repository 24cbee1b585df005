//! Seeded random instances shared by the integration suites.

#![allow(dead_code)]

use goalpost_core::approx::ApproxTrace;
use goalpost_core::model::total_improvement;
use goalpost_core::oracle::brute_force_optimum;
use goalpost_core::{Agent, CapacityModel, Instance, Rational, TargetSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn int(v: i64) -> Rational {
    Rational::from(v)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small individualized instance: `n ≤ max_n`, integer positions up to
/// `max_pos`, capacities `0..=max_cap`, up to `max_g` groups.
pub fn small_integral(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_pos: i64,
    max_cap: i64,
    max_g: usize,
) -> Instance {
    let g = rng.gen_range(1..=max_g);
    let n = rng.gen_range(1..=max_n);
    let agents = (0..n)
        .map(|_| {
            Agent::new(
                int(rng.gen_range(0..=max_pos)),
                int(rng.gen_range(0..=max_cap)),
                rng.gen_range(0..g),
            )
        })
        .collect();
    Instance::new(agents, g, CapacityModel::Individualized).unwrap()
}

/// Common-capacity instance with `g` nonempty groups; positions are halves.
pub fn common_with_groups(rng: &mut ChaCha8Rng, g: usize, max_n: usize) -> Instance {
    let n = rng.gen_range(g..=max_n);
    let delta = [int(1), Rational::new(3, 2), int(2), int(3)][rng.gen_range(0..4)].clone();
    let agents = (0..n)
        .map(|i| {
            let group = if i < g { i } else { rng.gen_range(0..g) };
            Agent::new(Rational::new(rng.gen_range(0..=24), 2), delta.clone(), group)
        })
        .collect();
    Instance::new(agents, g, CapacityModel::Common).unwrap()
}

/// Each group gets its own capacity; positions are thirds.
pub fn per_group_capacity(rng: &mut ChaCha8Rng, max_n: usize, max_g: usize) -> Instance {
    let g = rng.gen_range(1..=max_g);
    let caps: Vec<Rational> = (0..g)
        .map(|_| Rational::new(rng.gen_range(1..=6), 2))
        .collect();
    let n = rng.gen_range(1..=max_n);
    let agents = (0..n)
        .map(|_| {
            let group = rng.gen_range(0..g);
            Agent::new(
                Rational::new(rng.gen_range(0..=18), 3),
                caps[group].clone(),
                group,
            )
        })
        .collect();
    Instance::new(agents, g, CapacityModel::Individualized).unwrap()
}

fn spaced(levels: &[Rational], step: usize, gap: &Rational) -> bool {
    levels.windows(step + 1).all(|w| &w[step] - &w[0] >= *gap)
}

fn group_agents(inst: &Instance, l: usize) -> Vec<Agent> {
    inst.agents().iter().filter(|a| a.group == l).cloned().collect()
}

/// Checks every per-step guarantee recorded in a trace, and the final
/// per-group welfare bounds.
pub fn check_trace(inst: &Instance, trace: &ApproxTrace) -> Result<(), String> {
    let g = inst.num_groups();
    let gr = Rational::from(g);
    let delta = &trace.delta;
    if trace.targets.len() > trace.k {
        return Err(format!("{} targets for budget {}", trace.targets.len(), trace.k));
    }
    for l in 0..g {
        let agents = group_agents(inst, l);
        let s1 = &trace.step1[l];
        let w1 = total_improvement(&agents, &s1.optimum);
        if total_improvement(&agents, &s1.pruned) != w1 {
            return Err(format!("group {l}: thinning lost welfare"));
        }
        if !spaced(s1.pruned.levels(), 2, delta) {
            return Err(format!("group {l}: thinned targets not spaced"));
        }
        let s2 = &trace.step2[l];
        let w2 = total_improvement(&agents, s2);
        if !spaced(s2.levels(), 1, &(delta * &int(2))) {
            return Err(format!("group {l}: step-2 targets closer than 2Δ"));
        }
        if w2.clone() * int(4) < w1 {
            return Err(format!("group {l}: step-2 welfare {w2} below a quarter of {w1}"));
        }
        if s2.len() > s1.pruned.len().div_ceil(4) {
            return Err(format!("group {l}: step-2 kept too many targets"));
        }
        let s3 = &trace.step3[l];
        if !spaced(s3.targets.levels(), 1, delta) {
            return Err(format!("group {l}: step-3 targets closer than Δ"));
        }
        let survivors: Vec<Agent> = s3.survivors.iter().map(|&i| inst.agents()[i].clone()).collect();
        if total_improvement(&survivors, &s3.targets) < w2 {
            return Err(format!("group {l}: step-3 welfare decreased"));
        }
        for (old, new) in s2.iter().zip(s3.targets.iter()) {
            if new < old || *new > old + delta {
                return Err(format!("group {l}: {old} moved to {new}, outside [τ, τ+Δ]"));
            }
            let window: Vec<Rational> = survivors
                .iter()
                .filter(|a| a.position >= old - delta && a.position < *old)
                .map(|a| a.position.clone())
                .collect();
            if window.is_empty() {
                continue;
            }
            let local = Instance::common(&window, delta.clone()).unwrap();
            let best = brute_force_optimum(&local, 1).unwrap().value;
            let got = total_improvement(local.agents(), &TargetSet::new([new.clone()]));
            if got != best {
                return Err(format!("group {l}: {new} is not optimal for its window"));
            }
        }
    }
    let band = delta / &gr;
    for tau in trace.step4.union.iter() {
        let low = tau - delta;
        let inner = &low + &band;
        let hit = trace.targets.iter().any(|t| *t >= inner && t <= tau);
        let intrudes = trace.targets.iter().any(|t| *t > low && *t < inner);
        if delta.is_positive() && (!hit || intrudes) {
            return Err(format!("final targets break the window rule around {tau}"));
        }
    }
    if trace.step4.parts.iter().any(|p| p.endpoints.len() > g) {
        return Err("an interference part has more than g endpoints".into());
    }
    let g3 = int(16) * gr.clone() * gr.clone() * gr.clone();
    let g2 = int(16) * gr.clone() * gr;
    for l in 0..g {
        let sw = &trace.report.group_totals[l];
        let ceil = &trace.opt_ceil.per_group[l].value;
        let full = &trace.opt_k.per_group[l].value;
        if sw.clone() * g2.clone() < *ceil {
            return Err(format!("group {l}: welfare {sw} below opt_ceil {ceil} / 16g²"));
        }
        if sw.clone() * g3.clone() < *full {
            return Err(format!("group {l}: welfare {sw} below opt_k {full} / 16g³"));
        }
    }
    Ok(())
}
