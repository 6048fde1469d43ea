//! Seeded random test networks.

use flg_core::{Branch, Bus, BusId, BusKind, GridCase};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const MAX_BUSES: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("bus count {0} outside 2..={MAX_BUSES}")]
    BusCount(usize),
    #[error("generator count {gens} must satisfy 1 <= gens < buses ({buses})")]
    GenCount { gens: usize, buses: usize },
}

/// A connected network: a random spanning tree plus up to `n_buses / 2`
/// extra (possibly parallel) branches. `r ~ U(0.01, 0.2)`,
/// `x ~ U(0.05, 1.0)`. Line charging and bus shunts are drawn either way and
/// zeroed when `shunts` is off, so both variants of a seed share topology
/// and series impedances.
pub fn gen_random(
    seed: u64,
    n_buses: usize,
    n_gens: usize,
    shunts: bool,
) -> Result<GridCase, GenError> {
    if !(2..=MAX_BUSES).contains(&n_buses) {
        return Err(GenError::BusCount(n_buses));
    }
    if n_gens == 0 || n_gens >= n_buses {
        return Err(GenError::GenCount {
            gens: n_gens,
            buses: n_buses,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = |v: f64| if shunts { v } else { 0.0 };

    let gens = index::sample(&mut rng, n_buses, n_gens).into_vec();
    let buses: Vec<Bus> = (0..n_buses)
        .map(|k| {
            let gs = rng.gen_range(0.0..0.02);
            let bs = rng.gen_range(-0.05..0.15);
            Bus {
                id: BusId(k as u32 + 1),
                kind: if gens.contains(&k) {
                    BusKind::Generator
                } else {
                    BusKind::Load
                },
                gs: keep(gs),
                bs: keep(bs),
            }
        })
        .collect();

    let mut order: Vec<u32> = (1..=n_buses as u32).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<(u32, u32)> = (1..n_buses)
        .map(|k| (order[rng.gen_range(0..k)], order[k]))
        .collect();
    let extra = rng.gen_range(0..=n_buses / 2);
    for _ in 0..extra {
        let a = rng.gen_range(1..=n_buses as u32);
        let mut b = rng.gen_range(1..n_buses as u32);
        if b >= a {
            b += 1;
        }
        edges.push((a, b));
    }

    let branches = edges
        .into_iter()
        .map(|(f, t)| {
            let r = rng.gen_range(0.01..0.2);
            let x = rng.gen_range(0.05..1.0);
            let b = rng.gen_range(0.0..0.1);
            Branch::new(f, t, r, x, keep(b))
        })
        .collect();

    Ok(GridCase {
        name: format!("random-s{seed}-n{n_buses}-g{n_gens}"),
        base_mva: 100.0,
        buses,
        branches,
    })
}

/// Size of the `index`-th member of a seeded population: `buses` in
/// `min_buses..=max_buses`, and every fifth member has a single generator.
pub fn population_member(
    base_seed: u64,
    index: usize,
    min_buses: usize,
    max_buses: usize,
) -> (u64, usize, usize) {
    let seed = base_seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let buses = rng.gen_range(min_buses..=max_buses);
    let gens = if index.is_multiple_of(5) {
        1
    } else {
        rng.gen_range(1..buses)
    };
    (seed, buses, gens)
}
