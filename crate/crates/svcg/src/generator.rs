//! Seeded random instance generation.
//!
//! Output is deterministic for a fixed parameter set (including the seed)
//! and always passes [`crate::game::validate_game`]. Strategy subsets are
//! drawn uniformly without replacement from the non-empty subsets of the
//! allowed size range.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{CostPolynomial, Game, Player, Resource, MAX_DEGREE};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct GeneratorParams {
    pub players: usize,
    pub resources: usize,
    pub strategies_per_player: usize,
    /// Inclusive range of strategy sizes.
    pub strategy_size: (usize, usize),
    /// Inclusive range of player weights; lower bound must be positive.
    pub weight_range: (f64, f64),
    pub degree: usize,
    /// Inclusive range of polynomial coefficients; non-negative.
    pub coeff_range: (f64, f64),
    pub seed: u64,
}

/// `binom(n, k)` saturating at `u64::MAX`; used only to check that enough
/// distinct subsets exist.
fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    acc
}

fn validate_params(p: &GeneratorParams) -> Result<()> {
    let fail = |msg: String| Err(Error::InconsistentParams(msg));
    if p.players == 0 {
        return fail("player count must be at least 1".into());
    }
    if p.resources == 0 {
        return fail("resource count must be at least 1".into());
    }
    if p.strategies_per_player == 0 {
        return fail("strategies per player must be at least 1".into());
    }
    let (lo, hi) = p.strategy_size;
    if lo == 0 || lo > hi {
        return fail(format!(
            "strategy size range [{lo}, {hi}] must be non-empty and positive"
        ));
    }
    if hi > p.resources {
        return fail(format!(
            "strategy size {hi} exceeds the {} available resources",
            p.resources
        ));
    }
    let available: u64 = (lo..=hi).map(|k| binomial(p.resources, k)).sum();
    if available < p.strategies_per_player as u64 {
        return fail(format!(
            "{} distinct strategies requested but only {available} subsets exist in the size range",
            p.strategies_per_player
        ));
    }
    if !(p.weight_range.0 > 0.0 && p.weight_range.0 <= p.weight_range.1) {
        return fail(format!(
            "weight range [{}, {}] must be positive and non-empty",
            p.weight_range.0, p.weight_range.1
        ));
    }
    if p.degree > MAX_DEGREE {
        return fail(format!("degree {} exceeds maximum {MAX_DEGREE}", p.degree));
    }
    if !(p.coeff_range.0 >= 0.0 && p.coeff_range.0 <= p.coeff_range.1) {
        return fail(format!(
            "coefficient range [{}, {}] must be non-negative and non-empty",
            p.coeff_range.0, p.coeff_range.1
        ));
    }
    if p.coeff_range.1 <= 0.0 {
        return fail("coefficient range admits no strictly positive coefficient".into());
    }
    Ok(())
}

fn draw_in(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.gen_range(range.0..=range.1)
    }
}

/// Uniform k-subset of `0..n` by partial Fisher-Yates, returned sorted.
fn draw_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut subset = pool[..k].to_vec();
    subset.sort_unstable();
    subset
}

/// Generates a valid game; deterministic given the seed.
pub fn generate(params: &GeneratorParams) -> Result<Game> {
    validate_params(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut resources = Vec::with_capacity(params.resources);
    for id in 0..params.resources {
        let mut coeffs: Vec<f64> = (0..=params.degree)
            .map(|_| draw_in(&mut rng, params.coeff_range))
            .collect();
        // The leading coefficient must be strictly positive so that the
        // game's degree matches the requested one.
        while coeffs[params.degree] <= 0.0 {
            coeffs[params.degree] = draw_in(&mut rng, params.coeff_range);
        }
        resources.push(Resource {
            id,
            cost: CostPolynomial::new(coeffs),
        });
    }

    let (size_lo, size_hi) = params.strategy_size;
    let mut players = Vec::with_capacity(params.players);
    for id in 0..params.players {
        let weight = draw_in(&mut rng, params.weight_range);
        let mut strategies: Vec<Vec<usize>> = Vec::with_capacity(params.strategies_per_player);
        while strategies.len() < params.strategies_per_player {
            let k = if size_lo == size_hi {
                size_lo
            } else {
                rng.gen_range(size_lo..=size_hi)
            };
            let subset = draw_subset(&mut rng, params.resources, k);
            if !strategies.contains(&subset) {
                strategies.push(subset);
            }
        }
        players.push(Player {
            id,
            weight,
            strategies,
        });
    }

    let game = Game::new(players, resources);
    debug_assert!(crate::game::validate_game(&game).is_empty());
    Ok(game)
}
