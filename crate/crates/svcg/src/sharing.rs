//! Cost-sharing rules: exact Shapley shares, the permutation-sampling
//! estimator with median-of-batches amplification, and proportional shares.
//!
//! The exact Shapley share of player `i` on a resource with user set `A` is
//! the expectation over uniform arrival orders of the marginal joint-cost
//! increase `C(W + w_i) - C(W)`, where `W` is the weight of the users
//! arriving before `i`. It is computed here with the subset-weighted closed
//! form (summing `|T|! (|A|-|T|-1)! / |A|!` over subsets `T` of the other
//! users), which the tests validate against full permutation enumeration.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{CostPolynomial, Game, PlayerId, Profile, ResourceId};
use crate::{Error, Result};

/// Largest user set priced exactly; subset enumeration is `2^(|S|-1)` terms,
/// so beyond this the caller must switch to sampling.
pub const EXACT_SIZE_CAP: usize = 20;

/// Which cost-sharing rule prices a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ShareMethod {
    ShapleyExact,
    ShapleySampled(SampleConfig),
    Proportional,
}

impl ShareMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ShareMethod::ShapleyExact => "shapley-exact",
            ShareMethod::ShapleySampled(_) => "shapley-sampled",
            ShareMethod::Proportional => "proportional",
        }
    }
}

/// Parameters of the sampling estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Relative-error target, in `(0, 1]`.
    pub mu: f64,
    /// Outer repetitions whose batch means are median-combined; must be odd
    /// so the median is itself a sampled value.
    pub batch_count: u32,
    /// Master seed; every batch stream is derived from it.
    pub seed: u64,
    /// The failure-probability exponent `c >= 1` used when deriving the
    /// recommended batch count.
    pub failure_exponent: f64,
}

impl SampleConfig {
    pub fn new(mu: f64, batch_count: u32, seed: u64) -> Result<Self> {
        let cfg = SampleConfig {
            mu,
            batch_count,
            seed,
            failure_exponent: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::Precondition(format!(
                "sampling accuracy mu must lie in (0, 1], got {}",
                self.mu
            )));
        }
        if self.batch_count == 0 || self.batch_count.is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "batch count must be odd and positive, got {}",
                self.batch_count
            )));
        }
        if self.failure_exponent < 1.0 {
            return Err(Error::Precondition(format!(
                "failure exponent must be >= 1, got {}",
                self.failure_exponent
            )));
        }
        Ok(())
    }

    /// Permutations per batch: `max(1, ceil(4 (|S|-1) / mu^2))`.
    pub fn permutations_per_batch(&self, users: usize) -> u64 {
        let k = (4.0 * users.saturating_sub(1) as f64 / (self.mu * self.mu)).ceil();
        (k as u64).max(1)
    }
}

/// Identifies the sampling stream of one (player, resource) pair; batch `b`
/// of that pair draws from an RNG derived from `(seed, player, resource, b)`,
/// so batches are reproducible and independent of evaluation order.
#[derive(Clone, Copy, Debug)]
pub struct StreamKey {
    pub player: u64,
    pub resource: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn batch_rng(seed: u64, key: StreamKey, batch: u64) -> ChaCha8Rng {
    let mut s = splitmix64(seed);
    s = splitmix64(s ^ key.player);
    s = splitmix64(s ^ key.resource);
    s = splitmix64(s ^ batch);
    ChaCha8Rng::seed_from_u64(s)
}

/// Marginal joint-cost increase `C(prefix + w_i) - C(prefix)`; non-negative
/// because `C` is non-decreasing.
///
/// Panics on negative inputs (precondition fault).
pub fn marginal_contribution(poly: &CostPolynomial, prefix_weight: f64, w_i: f64) -> f64 {
    assert!(
        prefix_weight >= 0.0,
        "marginal_contribution: negative prefix"
    );
    assert!(w_i > 0.0, "marginal_contribution: non-positive weight");
    poly.joint_cost(prefix_weight + w_i) - poly.joint_cost(prefix_weight)
}

fn find_target(users: &[(PlayerId, f64)], target: PlayerId) -> Result<usize> {
    users
        .iter()
        .position(|&(id, _)| id == target)
        .ok_or_else(|| Error::Precondition(format!("target player {target} not among users")))
}

/// Exact Shapley share of `target` on a resource used by `users`.
pub fn shapley_exact(
    poly: &CostPolynomial,
    users: &[(PlayerId, f64)],
    target: PlayerId,
) -> Result<f64> {
    let t_idx = find_target(users, target)?;
    let a = users.len();
    if a > EXACT_SIZE_CAP {
        return Err(Error::ExactSizeExceeded {
            users: a,
            cap: EXACT_SIZE_CAP,
        });
    }
    let w_i = users[t_idx].1;
    let others: Vec<f64> = users
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != t_idx)
        .map(|(_, &(_, w))| w)
        .collect();
    let k = others.len();

    // coeff[t] = t! (a-1-t)! / a! = 1 / (a * binom(a-1, t))
    let mut coeff = vec![0.0f64; k + 1];
    let mut binom = 1.0f64;
    for (t, c) in coeff.iter_mut().enumerate() {
        *c = 1.0 / (a as f64 * binom);
        binom = binom * (k - t) as f64 / (t + 1) as f64;
    }

    let mut share = 0.0;
    for mask in 0u32..(1u32 << k) {
        let t = mask.count_ones() as usize;
        let mut prefix = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            prefix += others[j];
            bits &= bits - 1;
        }
        share += coeff[t] * marginal_contribution(poly, prefix, w_i);
    }
    Ok(share)
}

/// A sampling estimate together with its per-batch means. The estimate is
/// the median of the batch means.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledShare {
    pub estimate: f64,
    pub batch_means: Vec<f64>,
}

/// Estimates the Shapley share of `target` by averaging marginal
/// contributions over `k = max(1, ceil(4(|S|-1)/mu^2))` uniform random
/// permutations per batch and taking the median over `batch_count` batches.
///
/// A single user pays `C(w)` exactly, with zero permutations drawn.
/// Deterministic for a fixed `(config, key)`.
pub fn shapley_sampled(
    poly: &CostPolynomial,
    users: &[(PlayerId, f64)],
    target: PlayerId,
    config: &SampleConfig,
    key: StreamKey,
) -> Result<SampledShare> {
    config.validate()?;
    let t_idx = find_target(users, target)?;
    let w_i = users[t_idx].1;
    if users.len() == 1 {
        return Ok(SampledShare {
            estimate: poly.joint_cost(w_i),
            batch_means: Vec::new(),
        });
    }

    let k = config.permutations_per_batch(users.len());
    let mut order: Vec<usize> = (0..users.len()).collect();
    let mut batch_means = Vec::with_capacity(config.batch_count as usize);
    for batch in 0..config.batch_count as u64 {
        let mut rng = batch_rng(config.seed, key, batch);
        let mut sum = 0.0;
        for _ in 0..k {
            order.shuffle(&mut rng);
            let mut prefix = 0.0;
            for &j in &order {
                if j == t_idx {
                    break;
                }
                prefix += users[j].1;
            }
            sum += marginal_contribution(poly, prefix, w_i);
        }
        batch_means.push(sum / k as f64);
    }

    let mut sorted = batch_means.clone();
    sorted.sort_by(f64::total_cmp);
    let estimate = sorted[sorted.len() / 2];
    Ok(SampledShare {
        estimate,
        batch_means,
    })
}

/// Proportional share `w_i * c(f_e)`.
///
/// Panics unless `w_i > 0` and `load >= w_i` (the player must be counted
/// in the load).
pub fn proportional_share(poly: &CostPolynomial, load: f64, w_i: f64) -> f64 {
    assert!(w_i > 0.0, "proportional_share: non-positive weight");
    assert!(
        load >= w_i,
        "proportional_share: load {load} below weight {w_i}"
    );
    w_i * poly.eval(load)
}

/// Total cost `X_i(P)`: the player's shares summed over her chosen
/// resources under the given method.
pub fn player_cost(
    game: &Game,
    profile: &Profile,
    player: PlayerId,
    method: &ShareMethod,
) -> Result<f64> {
    if player >= game.players.len() {
        return Err(Error::Precondition(format!("unknown player {player}")));
    }
    let lv = crate::game::load_view(game, profile, None)?;
    let w_i = game.players[player].weight;
    let mut total = 0.0;
    for &e in &game.players[player].strategies[profile.choice[player]] {
        let poly = &game.resources[e].cost;
        total += match method {
            ShareMethod::ShapleyExact => {
                shapley_exact(poly, &with_weights(game, &lv.users[e]), player)?
            }
            ShareMethod::ShapleySampled(cfg) => {
                shapley_sampled(
                    poly,
                    &with_weights(game, &lv.users[e]),
                    player,
                    cfg,
                    StreamKey {
                        player: player as u64,
                        resource: e as u64,
                    },
                )?
                .estimate
            }
            ShareMethod::Proportional => proportional_share(poly, lv.loads[e], w_i),
        };
    }
    Ok(total)
}

fn with_weights(game: &Game, users: &[PlayerId]) -> Vec<(PlayerId, f64)> {
    users.iter().map(|&i| (i, game.players[i].weight)).collect()
}

/// Per-(player, resource) shares of a whole profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShareReport {
    pub method: String,
    pub entries: Vec<ShareEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShareEntry {
    pub player: PlayerId,
    pub resource: ResourceId,
    pub share: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_means: Option<Vec<f64>>,
}

/// Prices every (player, chosen resource) pair of the profile.
pub fn share_report(game: &Game, profile: &Profile, method: &ShareMethod) -> Result<ShareReport> {
    crate::game::validate_profile(game, profile)?;
    let lv = crate::game::load_view(game, profile, None)?;
    let mut entries = Vec::new();
    for (i, p) in game.players.iter().enumerate() {
        for &e in &p.strategies[profile.choice[i]] {
            let poly = &game.resources[e].cost;
            let users = with_weights(game, &lv.users[e]);
            let (share, batch_means) = match method {
                ShareMethod::ShapleyExact => (shapley_exact(poly, &users, i)?, None),
                ShareMethod::ShapleySampled(cfg) => {
                    let s = shapley_sampled(
                        poly,
                        &users,
                        i,
                        cfg,
                        StreamKey {
                            player: i as u64,
                            resource: e as u64,
                        },
                    )?;
                    (s.estimate, Some(s.batch_means))
                }
                ShareMethod::Proportional => {
                    (proportional_share(poly, lv.loads[e], p.weight), None)
                }
            };
            entries.push(ShareEntry {
                player: i,
                resource: e,
                share,
                batch_means,
            });
        }
    }
    Ok(ShareReport {
        method: method.label().to_string(),
        entries,
    })
}

/// Per-resource residual `sum_i share_ie - C_e(f_e)`; zero (up to
/// [`crate::numeric::REL_TOL`]) for exact Shapley by budget balance.
pub fn budget_residuals(game: &Game, profile: &Profile, report: &ShareReport) -> Result<Vec<f64>> {
    let lv = crate::game::load_view(game, profile, None)?;
    let mut sums = vec![0.0f64; game.resources.len()];
    for entry in &report.entries {
        sums[entry.resource] += entry.share;
    }
    Ok(game
        .resources
        .iter()
        .zip(&lv.loads)
        .zip(&sums)
        .map(|((r, &f), &s)| s - r.cost.joint_cost(f))
        .collect())
}

/// Recommended outer batch count for the sampler: the base-2 logarithm of
/// `2 n^(c+3) max_i|P_i| |E| (1 + log_g(X_max/X_min)) (d+1) gamma^-9`,
/// rounded up to the next odd integer.
pub fn recommended_batch_count(
    n: usize,
    max_strategies: usize,
    resource_count: usize,
    cost_ratio_log: f64,
    degree: usize,
    gamma: f64,
    failure_exponent: f64,
) -> u32 {
    let inner = 2.0
        * (n as f64).powf(failure_exponent + 3.0)
        * max_strategies as f64
        * resource_count as f64
        * (1.0 + cost_ratio_log)
        * (degree + 1) as f64
        * gamma.powi(-9);
    let r = inner.log2().ceil().max(1.0) as u32;
    if r.is_multiple_of(2) {
        r + 1
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Player, Resource};
    use crate::numeric::{rel_close, REL_TOL};
    use proptest::prelude::*;

    fn poly(coeffs: &[f64]) -> CostPolynomial {
        CostPolynomial::new(coeffs.to_vec())
    }

    fn square() -> CostPolynomial {
        poly(&[0.0, 0.0, 1.0])
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(marginal_contribution(&square(), 0.0, 1.0), 1.0);
        assert_eq!(marginal_contribution(&square(), 1.0, 2.0), 26.0);
        // Constant c makes C additive: the marginal is always w.
        assert_eq!(marginal_contribution(&poly(&[1.0]), 5.0, 3.0), 3.0);
    }

    #[test]
    #[should_panic(expected = "negative prefix")]
    fn marginal_rejects_negative_prefix() {
        marginal_contribution(&square(), -1.0, 1.0);
    }

    #[test]
    fn shapley_worked_example_is_exact() {
        let users = [(0, 1.0), (1, 2.0)];
        assert_eq!(shapley_exact(&square(), &users, 0).unwrap(), 10.0);
        assert_eq!(shapley_exact(&square(), &users, 1).unwrap(), 17.0);
    }

    #[test]
    fn shapley_single_user_pays_joint_cost() {
        let users = [(4, 3.0)];
        assert_eq!(shapley_exact(&square(), &users, 4).unwrap(), 27.0);
    }

    #[test]
    fn shapley_linear_coincides_with_proportional() {
        let linear = poly(&[0.0, 1.0]);
        let users = [(0, 1.0), (1, 2.0)];
        let x0 = shapley_exact(&linear, &users, 0).unwrap();
        let x1 = shapley_exact(&linear, &users, 1).unwrap();
        assert!(rel_close(
            x0,
            proportional_share(&linear, 3.0, 1.0),
            REL_TOL
        ));
        assert!(rel_close(
            x1,
            proportional_share(&linear, 3.0, 2.0),
            REL_TOL
        ));
        assert!(rel_close(x0, 3.0, REL_TOL));
        assert!(rel_close(x1, 6.0, REL_TOL));
    }

    #[test]
    fn shapley_rejects_absent_target() {
        assert!(matches!(
            shapley_exact(&square(), &[(0, 1.0)], 9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn shapley_enforces_size_cap() {
        let users: Vec<(usize, f64)> = (0..=EXACT_SIZE_CAP).map(|i| (i, 1.0)).collect();
        assert!(matches!(
            shapley_exact(&square(), &users, 0),
            Err(Error::ExactSizeExceeded { users: 21, cap: 20 })
        ));
    }

    #[test]
    fn proportional_examples() {
        assert_eq!(proportional_share(&square(), 3.0, 1.0), 9.0);
        assert_eq!(proportional_share(&square(), 3.0, 2.0), 18.0);
        assert_eq!(proportional_share(&poly(&[7.0]), 4.0, 2.5), 17.5);
    }

    #[test]
    #[should_panic(expected = "below weight")]
    fn proportional_rejects_uncounted_player() {
        proportional_share(&square(), 1.0, 2.0);
    }

    #[test]
    fn sampler_batch_size_formula() {
        let cfg = SampleConfig::new(0.5, 1, 0).unwrap();
        assert_eq!(cfg.permutations_per_batch(5), 64);
        assert_eq!(cfg.permutations_per_batch(1), 1);
    }

    #[test]
    fn sampler_single_user_is_exact_with_zero_samples() {
        let cfg = SampleConfig::new(0.3, 5, 42).unwrap();
        let s = shapley_sampled(
            &square(),
            &[(2, 3.0)],
            2,
            &cfg,
            StreamKey {
                player: 2,
                resource: 0,
            },
        )
        .unwrap();
        assert_eq!(s.estimate, 27.0);
        assert!(s.batch_means.is_empty());
    }

    #[test]
    fn sampler_close_to_exact_on_worked_example() {
        let cfg = SampleConfig::new(0.1, 11, 1234).unwrap();
        let s = shapley_sampled(
            &square(),
            &[(0, 1.0), (1, 2.0)],
            0,
            &cfg,
            StreamKey {
                player: 0,
                resource: 0,
            },
        )
        .unwrap();
        assert_eq!(s.batch_means.len(), 11);
        assert!(
            s.estimate >= 9.0 && s.estimate <= 11.0,
            "estimate {}",
            s.estimate
        );
    }

    #[test]
    fn sampler_is_deterministic() {
        let cfg = SampleConfig::new(0.4, 3, 77).unwrap();
        let key = StreamKey {
            player: 1,
            resource: 5,
        };
        let users = [(0, 1.0), (1, 2.0), (2, 0.5)];
        let a = shapley_sampled(&square(), &users, 1, &cfg, key).unwrap();
        let b = shapley_sampled(&square(), &users, 1, &cfg, key).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.batch_means, b.batch_means);
    }

    #[test]
    fn sample_config_rejects_bad_parameters() {
        assert!(SampleConfig::new(0.0, 1, 0).is_err());
        assert!(SampleConfig::new(1.5, 1, 0).is_err());
        assert!(SampleConfig::new(0.5, 4, 0).is_err());
        assert!(SampleConfig::new(0.5, 0, 0).is_err());
    }

    #[test]
    fn recommended_batch_count_is_odd() {
        for c in [1.0, 2.0] {
            let r = recommended_batch_count(4, 3, 5, 2.0, 2, 0.05, c);
            assert_eq!(r % 2, 1);
            assert!(r >= 1);
        }
    }

    fn two_player_game() -> (Game, Profile) {
        let game = Game::new(
            vec![
                Player {
                    id: 0,
                    weight: 1.0,
                    strategies: vec![vec![0]],
                },
                Player {
                    id: 1,
                    weight: 2.0,
                    strategies: vec![vec![0]],
                },
            ],
            vec![Resource {
                id: 0,
                cost: square(),
            }],
        );
        (game, Profile::new(vec![0, 0]))
    }

    #[test]
    fn player_cost_examples() {
        let (game, profile) = two_player_game();
        assert_eq!(
            player_cost(&game, &profile, 0, &ShareMethod::ShapleyExact).unwrap(),
            10.0
        );
        assert_eq!(
            player_cost(&game, &profile, 1, &ShareMethod::ShapleyExact).unwrap(),
            17.0
        );
        assert_eq!(
            player_cost(&game, &profile, 0, &ShareMethod::Proportional).unwrap(),
            9.0
        );
        assert_eq!(
            player_cost(&game, &profile, 1, &ShareMethod::Proportional).unwrap(),
            18.0
        );
    }

    #[test]
    fn sole_user_pays_joint_cost_on_each_resource() {
        let linear = poly(&[0.0, 1.0]);
        let game = Game::new(
            vec![Player {
                id: 0,
                weight: 1.0,
                strategies: vec![vec![0, 1]],
            }],
            vec![
                Resource {
                    id: 0,
                    cost: linear.clone(),
                },
                Resource {
                    id: 1,
                    cost: linear,
                },
            ],
        );
        let profile = Profile::new(vec![0]);
        assert_eq!(
            player_cost(&game, &profile, 0, &ShareMethod::ShapleyExact).unwrap(),
            2.0
        );
    }

    #[test]
    fn share_report_budget_balance() {
        let (game, profile) = two_player_game();
        let report = share_report(&game, &profile, &ShareMethod::ShapleyExact).unwrap();
        let residuals = budget_residuals(&game, &profile, &report).unwrap();
        assert!(residuals.iter().all(|r| r.abs() <= REL_TOL * 27.0));
    }

    proptest! {
        /// Budget balance: exact Shapley shares sum to the joint cost.
        #[test]
        fn budget_balance_random(
            weights in proptest::collection::vec(0.1f64..10.0, 1..8),
            coeffs in proptest::collection::vec(0.0f64..5.0, 1..6),
            lead in 0.1f64..5.0,
        ) {
            let mut coeffs = coeffs;
            let top = coeffs.len() - 1;
            coeffs[top] = lead;
            let p = CostPolynomial::new(coeffs);
            let users: Vec<(usize, f64)> =
                weights.iter().copied().enumerate().collect();
            let total: f64 = users
                .iter()
                .map(|&(id, _)| shapley_exact(&p, &users, id).unwrap())
                .sum();
            let joint = p.joint_cost(weights.iter().sum());
            prop_assert!(rel_close(total, joint, REL_TOL));
        }

        /// Adding a user never lowers an existing share.
        #[test]
        fn share_monotone_in_users(
            weights in proptest::collection::vec(0.1f64..5.0, 2..6),
            extra in 0.1f64..5.0,
        ) {
            let p = square();
            let users: Vec<(usize, f64)> =
                weights.iter().copied().enumerate().collect();
            let mut more = users.clone();
            more.push((users.len(), extra));
            let a = shapley_exact(&p, &users, 0).unwrap();
            let b = shapley_exact(&p, &more, 0).unwrap();
            prop_assert!(b >= a - REL_TOL * a.abs());
        }
    }
}
