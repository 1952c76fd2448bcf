//! Equilibrium verification, brute-force optimizers, measured
//! price-of-anarchy and stretch, and Shapley/proportional certificates.
//!
//! Everything here is enumeration-based: profile spaces are walked in
//! lexicographic order of the choice vector and refusal caps guard against
//! accidentally enumerating something astronomically large.

mod bounds;

pub use bounds::{
    alpha_of, limited_stretch_bound, max_admissible_gamma, poa_bound, rho_admissible_limit,
    sandwich_lower_factor, sandwich_upper_factor, smoothness_lambda, smoothness_mu, stretch_bound,
    transfer_factor, BoundValues,
};

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::game::{self, Game, PlayerId, Profile};
use crate::numeric::REL_TOL;
use crate::potential::potential;
use crate::sharing::{player_cost, proportional_share, shapley_exact, ShareMethod};
use crate::{Error, Result};

/// Refusal caps for enumeration-based operations.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationLimits {
    /// Cap on the number of profiles (`prod_i |P_i|`).
    pub max_profiles: u64,
    /// Cap on the total strategy count (`sum_i |P_i|`) for deviation scans.
    pub max_total_strategies: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_profiles: 1_000_000,
            max_total_strategies: 10_000,
        }
    }
}

/// Lexicographic iterator over all profiles of a game.
pub struct ProfileIter<'a> {
    game: &'a Game,
    next: Option<Vec<usize>>,
}

impl<'a> ProfileIter<'a> {
    pub fn new(game: &'a Game) -> Self {
        let start = if game.players.iter().all(|p| !p.strategies.is_empty()) {
            Some(vec![0; game.players.len()])
        } else {
            None
        };
        ProfileIter { game, next: start }
    }
}

impl Iterator for ProfileIter<'_> {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        let current = self.next.clone()?;
        let mut cursor = current.clone();
        let mut advanced = false;
        for i in (0..cursor.len()).rev() {
            if cursor[i] + 1 < self.game.players[i].strategies.len() {
                cursor[i] += 1;
                for c in cursor.iter_mut().skip(i + 1) {
                    *c = 0;
                }
                advanced = true;
                break;
            }
        }
        self.next = if advanced { Some(cursor) } else { None };
        Some(Profile::new(current))
    }
}

/// Result of an exhaustive unilateral-deviation scan.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumReport {
    pub profile: Profile,
    pub method: String,
    /// `max_i max_{P'_i} X_i(P) / X_i(P_{-i}, P'_i)`; the range of `P'_i`
    /// includes the current strategy, so the value is at least 1.
    pub worst_ratio: f64,
    /// The (player, strategy) witnessing the worst ratio.
    pub witness: Option<(PlayerId, usize)>,
}

impl EquilibriumReport {
    /// A profile is a rho-PNE iff no deviation improves by more than the
    /// factor rho; checked with the global relative slack.
    pub fn is_rho_pne(&self, rho: f64) -> bool {
        self.worst_ratio <= rho * (1.0 + REL_TOL)
    }
}

fn check_deviation_cap(game: &Game, limits: &EnumerationLimits) -> Result<()> {
    let total: usize = game.players.iter().map(|p| p.strategies.len()).sum();
    if total > limits.max_total_strategies {
        return Err(Error::CapExceeded(format!(
            "{total} total strategies exceed the deviation-scan cap {}",
            limits.max_total_strategies
        )));
    }
    Ok(())
}

fn check_profile_cap(space: u64, limits: &EnumerationLimits) -> Result<()> {
    if space > limits.max_profiles {
        return Err(Error::CapExceeded(format!(
            "{space} profiles exceed the enumeration cap {}",
            limits.max_profiles
        )));
    }
    Ok(())
}

/// Exhaustively enumerates all unilateral deviations and reports the
/// maximum cost ratio with its witness.
pub fn verify_approx_equilibrium(
    game: &Game,
    profile: &Profile,
    method: &ShareMethod,
    limits: &EnumerationLimits,
) -> Result<EquilibriumReport> {
    game::validate_profile(game, profile)?;
    check_deviation_cap(game, limits)?;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for i in 0..game.players.len() {
        let current = player_cost(game, profile, i, method)?;
        let mut alt = profile.clone();
        for s in 0..game.players[i].strategies.len() {
            alt.choice[i] = s;
            let cost = player_cost(game, &alt, i, method)?;
            let ratio = current / cost;
            if ratio > worst {
                worst = ratio;
                witness = Some((i, s));
            }
        }
        alt.choice[i] = profile.choice[i];
    }
    Ok(EquilibriumReport {
        profile: profile.clone(),
        method: method.label().to_string(),
        worst_ratio: worst,
        witness,
    })
}

/// Short-circuiting rho-PNE membership test, optionally restricted to
/// deviations by `movers`.
fn is_rho_pne_scoped(
    game: &Game,
    profile: &Profile,
    rho: f64,
    method: &ShareMethod,
    movers: Option<&BTreeSet<PlayerId>>,
) -> Result<bool> {
    let mut alt = profile.clone();
    for i in 0..game.players.len() {
        if let Some(set) = movers {
            if !set.contains(&i) {
                continue;
            }
        }
        let current = player_cost(game, profile, i, method)?;
        for s in 0..game.players[i].strategies.len() {
            if s == profile.choice[i] {
                continue;
            }
            alt.choice[i] = s;
            let cost = player_cost(game, &alt, i, method)?;
            if current > rho * (1.0 + REL_TOL) * cost {
                return Ok(false);
            }
        }
        alt.choice[i] = profile.choice[i];
    }
    Ok(true)
}

/// Objective for [`brute_force_min`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    SocialCost,
    Potential,
}

/// Exact minimizer by full enumeration; ties broken lexicographically by
/// choice vector (the first minimum in lexicographic order wins).
pub fn brute_force_min(
    game: &Game,
    objective: Objective,
    limits: &EnumerationLimits,
) -> Result<(Profile, f64)> {
    game::ensure_valid(game)?;
    check_profile_cap(game.profile_space(), limits)?;
    let mut best: Option<(Profile, f64)> = None;
    for profile in ProfileIter::new(game) {
        let value = match objective {
            Objective::SocialCost => game::social_cost(game, &profile, None)?,
            Objective::Potential => potential(game, &profile, None)?.total,
        };
        match &best {
            Some((_, v)) if value >= *v => {}
            _ => best = Some((profile, value)),
        }
    }
    best.ok_or_else(|| Error::InvalidGame("empty profile space".into()))
}

/// A measured ratio, or the distinguished empty-equilibrium-set outcome
/// (possible under proportional sharing).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MeasuredRatio {
    Value(f64),
    Empty,
}

impl MeasuredRatio {
    pub fn value(self) -> Option<f64> {
        match self {
            MeasuredRatio::Value(v) => Some(v),
            MeasuredRatio::Empty => None,
        }
    }
}

impl fmt::Display for MeasuredRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasuredRatio::Value(v) => write!(f, "{v}"),
            MeasuredRatio::Empty => write!(f, "empty equilibrium set"),
        }
    }
}

/// Measured rho-PoA: enumerates all profiles, filters rho-PNE under the
/// given method, and divides the worst equilibrium social cost by the
/// brute-force optimum.
pub fn measured_poa(
    game: &Game,
    rho: f64,
    method: &ShareMethod,
    limits: &EnumerationLimits,
) -> Result<MeasuredRatio> {
    if rho < 1.0 {
        return Err(Error::Precondition(format!("rho must be >= 1, got {rho}")));
    }
    let (_, optimum) = brute_force_min(game, Objective::SocialCost, limits)?;
    let mut worst: Option<f64> = None;
    for profile in ProfileIter::new(game) {
        if is_rho_pne_scoped(game, &profile, rho, method, None)? {
            let sc = game::social_cost(game, &profile, None)?;
            worst = Some(worst.map_or(sc, |w: f64| w.max(sc)));
        }
    }
    Ok(match worst {
        None => MeasuredRatio::Empty,
        Some(w) => MeasuredRatio::Value(w / optimum),
    })
}

/// Restriction scope for the limited stretch: only `movers` deviate, the
/// rest keep their strategy from `base`.
#[derive(Clone, Debug)]
pub struct LimitedScope {
    pub movers: BTreeSet<PlayerId>,
    pub base: Profile,
}

/// Measured rho-stretch under exact Shapley shares. Unrestricted: the worst
/// potential among rho-PNE over the global potential minimum. Restricted:
/// both the equilibrium set and the minimizer range only over profiles in
/// which non-movers keep their `base` strategies.
pub fn measured_stretch(
    game: &Game,
    rho: f64,
    scope: Option<&LimitedScope>,
    limits: &EnumerationLimits,
) -> Result<MeasuredRatio> {
    if rho < 1.0 {
        return Err(Error::Precondition(format!("rho must be >= 1, got {rho}")));
    }
    let method = ShareMethod::ShapleyExact;
    match scope {
        None => {
            let (_, min_phi) = brute_force_min(game, Objective::Potential, limits)?;
            let mut worst: Option<f64> = None;
            for profile in ProfileIter::new(game) {
                if is_rho_pne_scoped(game, &profile, rho, &method, None)? {
                    let phi = potential(game, &profile, None)?.total;
                    worst = Some(worst.map_or(phi, |w: f64| w.max(phi)));
                }
            }
            Ok(match worst {
                None => MeasuredRatio::Empty,
                Some(w) => MeasuredRatio::Value(w / min_phi),
            })
        }
        Some(scope) => {
            game::validate_profile(game, &scope.base)?;
            if let Some(&bad) = scope.movers.iter().find(|&&i| i >= game.players.len()) {
                return Err(Error::Precondition(format!(
                    "scope references unknown player {bad}"
                )));
            }
            let space = scope.movers.iter().fold(1u64, |acc, &i| {
                acc.saturating_mul(game.players[i].strategies.len() as u64)
            });
            check_profile_cap(space, limits)?;
            check_deviation_cap(game, limits)?;

            let movers: Vec<PlayerId> = scope.movers.iter().copied().collect();
            let mut min_phi = f64::INFINITY;
            let mut worst: Option<f64> = None;
            let mut assignment = vec![0usize; movers.len()];
            loop {
                let mut profile = scope.base.clone();
                for (k, &i) in movers.iter().enumerate() {
                    profile.choice[i] = assignment[k];
                }
                let phi = potential(game, &profile, None)?.total;
                min_phi = min_phi.min(phi);
                if is_rho_pne_scoped(game, &profile, rho, &method, Some(&scope.movers))? {
                    worst = Some(worst.map_or(phi, |w: f64| w.max(phi)));
                }

                let mut carried = true;
                for k in (0..movers.len()).rev() {
                    if assignment[k] + 1 < game.players[movers[k]].strategies.len() {
                        assignment[k] += 1;
                        for a in assignment.iter_mut().skip(k + 1) {
                            *a = 0;
                        }
                        carried = false;
                        break;
                    }
                }
                if carried {
                    break;
                }
            }
            Ok(match worst {
                None => MeasuredRatio::Empty,
                Some(w) => MeasuredRatio::Value(w / min_phi),
            })
        }
    }
}

/// One Shapley/proportional sandwich violation (expected never).
#[derive(Clone, Debug, Serialize)]
pub struct SandwichViolation {
    pub profile_index: usize,
    pub player: PlayerId,
    pub resource: usize,
    pub shapley: f64,
    pub proportional: f64,
}

/// Per-profile equilibrium transfer check: a rho-PNE under exact Shapley
/// must be a `transfer_factor(d) * rho`-PNE under proportional sharing.
#[derive(Clone, Debug, Serialize)]
pub struct TransferCheck {
    pub profile_index: usize,
    pub shapley_ratio: f64,
    pub proportional_ratio: f64,
    pub factor: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub degree: usize,
    pub lower_factor: f64,
    pub upper_factor: f64,
    pub pairs_checked: usize,
    pub violations: Vec<SandwichViolation>,
    /// Minimum of `chi_prop / (lower_factor * chi)` over all pairs; >= 1
    /// when the lower sandwich side holds everywhere.
    pub min_lower_slack: f64,
    /// Minimum of `(upper_factor * chi) / chi_prop` over all pairs.
    pub min_upper_slack: f64,
    pub transfers: Vec<TransferCheck>,
}

/// Checks the per-resource sandwich
/// `2/(d+1) chi <= chi_prop <= (d+3)/4 chi` on every (player, resource)
/// pair of the sampled profiles, and the cross-method equilibrium transfer.
pub fn shapley_prop_certificates(
    game: &Game,
    profiles: &[Profile],
    limits: &EnumerationLimits,
) -> Result<CertificateReport> {
    game::ensure_valid(game)?;
    let d = game.d;
    let lower = sandwich_lower_factor(d);
    let upper = sandwich_upper_factor(d);
    let mut report = CertificateReport {
        degree: d,
        lower_factor: lower,
        upper_factor: upper,
        pairs_checked: 0,
        violations: Vec::new(),
        min_lower_slack: f64::INFINITY,
        min_upper_slack: f64::INFINITY,
        transfers: Vec::new(),
    };
    for (idx, profile) in profiles.iter().enumerate() {
        let lv = game::load_view(game, profile, None)?;
        for (i, p) in game.players.iter().enumerate() {
            for &e in &p.strategies[profile.choice[i]] {
                let users: Vec<(PlayerId, f64)> = lv.users[e]
                    .iter()
                    .map(|&j| (j, game.players[j].weight))
                    .collect();
                let chi = shapley_exact(&game.resources[e].cost, &users, i)?;
                let chi_prop = proportional_share(&game.resources[e].cost, lv.loads[e], p.weight);
                report.pairs_checked += 1;
                let lower_slack = chi_prop / (lower * chi);
                let upper_slack = (upper * chi) / chi_prop;
                report.min_lower_slack = report.min_lower_slack.min(lower_slack);
                report.min_upper_slack = report.min_upper_slack.min(upper_slack);
                if lower_slack < 1.0 - REL_TOL || upper_slack < 1.0 - REL_TOL {
                    report.violations.push(SandwichViolation {
                        profile_index: idx,
                        player: i,
                        resource: e,
                        shapley: chi,
                        proportional: chi_prop,
                    });
                }
            }
        }
        let shapley_report =
            verify_approx_equilibrium(game, profile, &ShareMethod::ShapleyExact, limits)?;
        let prop_report =
            verify_approx_equilibrium(game, profile, &ShareMethod::Proportional, limits)?;
        let factor = transfer_factor(d);
        let ok = prop_report.worst_ratio <= factor * shapley_report.worst_ratio * (1.0 + REL_TOL);
        report.transfers.push(TransferCheck {
            profile_index: idx,
            shapley_ratio: shapley_report.worst_ratio,
            proportional_ratio: prop_report.worst_ratio,
            factor,
            ok,
        });
    }
    Ok(report)
}

/// One measured-vs-bound summary row.
#[derive(Clone, Debug, Serialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub d: usize,
    pub n: usize,
    pub metric: String,
    pub measured: f64,
    pub bound: f64,
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("seed,d,n,metric,measured,bound,margin\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.seed,
            r.d,
            r.n,
            r.metric,
            r.measured,
            r.bound,
            r.bound - r.measured
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{CostPolynomial, Player, Resource};
    use crate::numeric::rel_close;

    fn linear() -> CostPolynomial {
        CostPolynomial::new(vec![0.0, 1.0])
    }

    /// Two unit-weight players, two parallel linear links, both strategies
    /// available to both players.
    fn parallel_links() -> Game {
        Game::new(
            vec![
                Player {
                    id: 0,
                    weight: 1.0,
                    strategies: vec![vec![0], vec![1]],
                },
                Player {
                    id: 1,
                    weight: 1.0,
                    strategies: vec![vec![0], vec![1]],
                },
            ],
            vec![
                Resource {
                    id: 0,
                    cost: linear(),
                },
                Resource {
                    id: 1,
                    cost: linear(),
                },
            ],
        )
    }

    #[test]
    fn verify_worst_ratio_on_congested_profile() {
        let game = parallel_links();
        let limits = EnumerationLimits::default();
        let both_on_zero = Profile::new(vec![0, 0]);
        let report =
            verify_approx_equilibrium(&game, &both_on_zero, &ShareMethod::ShapleyExact, &limits)
                .unwrap();
        assert!(rel_close(report.worst_ratio, 2.0, REL_TOL));
        assert!(!report.is_rho_pne(1.0));
        assert!(report.is_rho_pne(2.0));

        let split = Profile::new(vec![0, 1]);
        let report =
            verify_approx_equilibrium(&game, &split, &ShareMethod::ShapleyExact, &limits).unwrap();
        assert!(report.worst_ratio <= 1.0 + REL_TOL);
        assert!(report.is_rho_pne(1.0));
    }

    #[test]
    fn verify_single_strategy_players() {
        let game = Game::new(
            vec![Player {
                id: 0,
                weight: 1.0,
                strategies: vec![vec![0]],
            }],
            vec![Resource {
                id: 0,
                cost: linear(),
            }],
        );
        let report = verify_approx_equilibrium(
            &game,
            &Profile::new(vec![0]),
            &ShareMethod::ShapleyExact,
            &EnumerationLimits::default(),
        )
        .unwrap();
        assert_eq!(report.worst_ratio, 1.0);
    }

    #[test]
    fn brute_force_finds_split_optimum() {
        let game = parallel_links();
        let (profile, value) =
            brute_force_min(&game, Objective::SocialCost, &EnumerationLimits::default()).unwrap();
        assert!(rel_close(value, 2.0, REL_TOL));
        // Lexicographic tie-break between the two split profiles.
        assert_eq!(profile.choice, vec![0, 1]);
    }

    #[test]
    fn brute_force_respects_cap() {
        let game = parallel_links();
        let limits = EnumerationLimits {
            max_profiles: 3,
            ..Default::default()
        };
        assert!(matches!(
            brute_force_min(&game, Objective::SocialCost, &limits),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn potential_minimizer_is_pure_equilibrium() {
        let game = parallel_links();
        let limits = EnumerationLimits::default();
        let (minimizer, _) = brute_force_min(&game, Objective::Potential, &limits).unwrap();
        let report =
            verify_approx_equilibrium(&game, &minimizer, &ShareMethod::ShapleyExact, &limits)
                .unwrap();
        assert!(report.is_rho_pne(1.0));
    }

    #[test]
    fn potential_minimizer_is_equilibrium_on_random_instances() {
        use crate::generator::{generate, GeneratorParams};

        let limits = EnumerationLimits::default();
        for seed in 0..15u64 {
            let game = generate(&GeneratorParams {
                players: 2 + (seed % 3) as usize,
                resources: 3,
                strategies_per_player: 2 + (seed % 2) as usize,
                strategy_size: (1, 2),
                weight_range: (0.5, 3.0),
                degree: (seed % 4) as usize,
                coeff_range: (0.05, 1.5),
                seed: 300 + seed,
            })
            .unwrap();
            let (minimizer, _) = brute_force_min(&game, Objective::Potential, &limits).unwrap();
            let report =
                verify_approx_equilibrium(&game, &minimizer, &ShareMethod::ShapleyExact, &limits)
                    .unwrap();
            assert!(
                report.is_rho_pne(1.0),
                "seed {seed}: ratio {}",
                report.worst_ratio
            );
        }
    }

    #[test]
    fn measured_poa_on_parallel_links() {
        let game = parallel_links();
        let limits = EnumerationLimits::default();
        let at_one = measured_poa(&game, 1.0, &ShareMethod::ShapleyExact, &limits).unwrap();
        assert!(rel_close(at_one.value().unwrap(), 1.0, REL_TOL));

        // With a huge rho every profile qualifies: max SC / min SC = 4 / 2.
        let loose = measured_poa(&game, 1e6, &ShareMethod::ShapleyExact, &limits).unwrap();
        assert!(rel_close(loose.value().unwrap(), 2.0, REL_TOL));
    }

    #[test]
    fn measured_stretch_on_parallel_links() {
        let game = parallel_links();
        let limits = EnumerationLimits::default();
        let s = measured_stretch(&game, 1.0, None, &limits).unwrap();
        assert!(rel_close(s.value().unwrap(), 1.0, REL_TOL));
        let bound = stretch_bound(1.0, game.d).unwrap();
        assert!(s.value().unwrap() <= bound);
    }

    #[test]
    fn limited_stretch_with_fixed_outsider() {
        let game = parallel_links();
        let limits = EnumerationLimits::default();
        let scope = LimitedScope {
            movers: [0].into_iter().collect(),
            base: Profile::new(vec![0, 0]),
        };
        let s = measured_stretch(&game, 1.0, Some(&scope), &limits).unwrap();
        // Player 0 alone moves off the shared link; the restricted minimizer
        // is that same deviation, so the ratio is 1.
        assert!(rel_close(s.value().unwrap(), 1.0, REL_TOL));
    }

    #[test]
    fn certificates_on_worked_example() {
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
                cost: CostPolynomial::new(vec![0.0, 0.0, 1.0]),
            }],
        );
        let profiles = vec![Profile::new(vec![0, 0])];
        let report =
            shapley_prop_certificates(&game, &profiles, &EnumerationLimits::default()).unwrap();
        assert_eq!(report.pairs_checked, 2);
        assert!(report.violations.is_empty());
        // chi = (10, 17), chi_prop = (9, 18): both sandwich sides hold with
        // the d = 2 factors 2/3 and 5/4.
        assert!(report.min_lower_slack >= 1.0);
        assert!(report.min_upper_slack >= 1.0);
        assert!(report.transfers[0].ok);
    }

    #[test]
    fn certificates_linear_games_have_equality() {
        let game = parallel_links();
        let profiles: Vec<Profile> = ProfileIter::new(&game).collect();
        let report =
            shapley_prop_certificates(&game, &profiles, &EnumerationLimits::default()).unwrap();
        assert!(report.violations.is_empty());
        // Linear coincidence: both slacks sit exactly at the factors.
        assert!(rel_close(report.min_lower_slack, 1.0, REL_TOL));
        assert!(rel_close(report.min_upper_slack, 1.0, REL_TOL));
    }

    /// Two players over twin linear resources (fast early growth) and twin
    /// slow quadratics (fast late growth). Every one of the four profiles
    /// admits a strictly improving proportional deviation, so the
    /// proportional 1-PNE set is empty, while exact Shapley shares keep an
    /// exact equilibrium (the game stays a potential game).
    fn proportional_cycle_game() -> Game {
        let linear = linear();
        let slow_quadratic = CostPolynomial::new(vec![0.0, 0.0, 0.22]);
        Game::new(
            vec![
                Player {
                    id: 0,
                    weight: 1.0,
                    strategies: vec![vec![0, 1], vec![2, 3]],
                },
                Player {
                    id: 1,
                    weight: 2.0,
                    strategies: vec![vec![0, 2], vec![1, 3]],
                },
            ],
            vec![
                Resource {
                    id: 0,
                    cost: linear.clone(),
                },
                Resource {
                    id: 1,
                    cost: slow_quadratic.clone(),
                },
                Resource {
                    id: 2,
                    cost: slow_quadratic,
                },
                Resource {
                    id: 3,
                    cost: linear,
                },
            ],
        )
    }

    #[test]
    fn proportional_equilibrium_set_can_be_empty() {
        let game = proportional_cycle_game();
        let limits = EnumerationLimits::default();
        for profile in ProfileIter::new(&game) {
            let report =
                verify_approx_equilibrium(&game, &profile, &ShareMethod::Proportional, &limits)
                    .unwrap();
            assert!(report.worst_ratio > 1.02, "profile {:?}", profile.choice);
        }
        let poa = measured_poa(&game, 1.0, &ShareMethod::Proportional, &limits).unwrap();
        assert_eq!(poa, MeasuredRatio::Empty);
        assert_eq!(poa.to_string(), "empty equilibrium set");

        let under_shapley = measured_poa(&game, 1.0, &ShareMethod::ShapleyExact, &limits).unwrap();
        assert!(under_shapley.value().is_some());
    }

    #[test]
    fn profile_iter_is_lexicographic() {
        let game = parallel_links();
        let all: Vec<Vec<usize>> = ProfileIter::new(&game).map(|p| p.choice).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn metrics_csv_columns() {
        let rows = vec![MetricsRow {
            seed: 7,
            d: 2,
            n: 3,
            metric: "poa".into(),
            measured: 1.5,
            bound: 2.0,
        }];
        let csv = metrics_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("seed,d,n,metric,measured,bound,margin"));
        assert_eq!(lines.next(), Some("7,2,3,poa,1.5,2,0.5"));
    }
}
