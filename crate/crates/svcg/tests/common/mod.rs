//! Shared helpers for the integration suites: the permutation-enumeration
//! Shapley oracle and seeded random instance builders.
//!
//! The oracle only touches `CostPolynomial::joint_cost`; it is independent
//! of the subset-weighted closed form it is used to check.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use svcg::game::{CostPolynomial, Game, PlayerId, Profile};
use svcg::generator::{generate, GeneratorParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Average marginal contribution of `target` over every arrival order,
/// by full `|S|!` enumeration (Heap's algorithm).
pub fn shapley_by_permutations(
    poly: &CostPolynomial,
    users: &[(PlayerId, f64)],
    target: PlayerId,
) -> f64 {
    let n = users.len();
    assert!((1..=8).contains(&n), "oracle is meant for |S| <= 8");
    let w_target = users
        .iter()
        .find(|&&(id, _)| id == target)
        .expect("target must be a user")
        .1;
    let mut order: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let mut count = 0u64;
    permute(&mut order, n, &mut |perm| {
        let mut prefix = 0.0;
        for &j in perm {
            if users[j].0 == target {
                break;
            }
            prefix += users[j].1;
        }
        total += poly.joint_cost(prefix + w_target) - poly.joint_cost(prefix);
        count += 1;
    });
    total / count as f64
}

fn permute(arr: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        visit(arr);
        return;
    }
    for i in 0..k {
        permute(arr, k - 1, visit);
        if k.is_multiple_of(2) {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}

/// Random polynomial of exact degree `degree` with non-negative
/// coefficients and a strictly positive leading one.
pub fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> CostPolynomial {
    let mut coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(0.0..2.0)).collect();
    coeffs[degree] = rng.gen_range(0.1..2.0);
    CostPolynomial::new(coeffs)
}

/// `count` users with ids `0..count` and weights in `[0.1, 10)`.
pub fn random_users(rng: &mut ChaCha8Rng, count: usize) -> Vec<(PlayerId, f64)> {
    (0..count)
        .map(|id| (id, rng.gen_range(0.1..10.0)))
        .collect()
}

/// Seeded random game through the public generator.
pub fn random_game(seed: u64, players: usize, strategies: usize, degree: usize) -> Game {
    let params = GeneratorParams {
        players,
        resources: 3 + (seed % 3) as usize,
        strategies_per_player: strategies,
        strategy_size: (1, 2),
        weight_range: (0.5, 3.0),
        degree,
        coeff_range: (0.05, 1.5),
        seed,
    };
    generate(&params).expect("generator parameters are consistent")
}

pub fn random_profile(rng: &mut ChaCha8Rng, game: &Game) -> Profile {
    Profile::new(
        game.players
            .iter()
            .map(|p| rng.gen_range(0..p.strategies.len()))
            .collect(),
    )
}
