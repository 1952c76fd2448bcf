//! Game description, profiles, load/cost evaluation, validation, and the
//! JSON file formats used by the CLI, the generator, and the tests.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; all operations are pure functions of their inputs.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type PlayerId = usize;
pub type ResourceId = usize;

/// Maximum admitted polynomial degree.
pub const MAX_DEGREE: usize = 8;

/// Polynomial resource cost `c(x) = a_0 + a_1 x + ... + a_d x^d` with
/// non-negative coefficients. Serialized as the bare coefficient array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostPolynomial {
    coeffs: Vec<f64>,
}

impl CostPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        CostPolynomial { coeffs }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the highest non-zero coefficient (0 for an all-zero list,
    /// which validation rejects anyway).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0)
    }

    /// `c(x)` by Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    /// Joint cost `C(x) = x * c(x)`; `C(0) = 0` always.
    ///
    /// Panics on negative load (precondition fault).
    pub fn joint_cost(&self, load: f64) -> f64 {
        assert!(load >= 0.0, "joint_cost: negative load {load}");
        load * self.eval(load)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub id: ResourceId,
    #[serde(rename = "coeffs")]
    pub cost: CostPolynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Player {
    pub id: PlayerId,
    pub weight: f64,
    /// Explicit strategy sets: each strategy is a set of resource ids.
    pub strategies: Vec<Vec<ResourceId>>,
}

/// A weighted congestion game with polynomial costs.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    pub players: Vec<Player>,
    pub resources: Vec<Resource>,
    /// Maximum polynomial degree actually present.
    pub d: usize,
}

impl Game {
    /// Builds a game, deriving `d` from the resource polynomials.
    pub fn new(players: Vec<Player>, resources: Vec<Resource>) -> Self {
        let d = resources.iter().map(|r| r.cost.degree()).max().unwrap_or(0);
        Game {
            players,
            resources,
            d,
        }
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    /// Number of profiles `prod_i |P_i|`, saturating at `u64::MAX`.
    pub fn profile_space(&self) -> u64 {
        self.players
            .iter()
            .fold(1u64, |acc, p| acc.saturating_mul(p.strategies.len() as u64))
    }
}

/// One chosen strategy index per player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub choice: Vec<usize>,
}

impl Profile {
    pub fn new(choice: Vec<usize>) -> Self {
        Profile { choice }
    }
}

/// Per-resource user sets and loads for a fixed profile, with an optional
/// restriction to a player subset `A` (giving `S_e^A`, `f_e^A`).
#[derive(Clone, Debug, PartialEq)]
pub struct LoadView {
    /// `S_e`: users of each resource, ascending player id.
    pub users: Vec<Vec<PlayerId>>,
    /// `f_e`: total weight on each resource.
    pub loads: Vec<f64>,
    pub restricted: Option<RestrictedView>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedView {
    pub users: Vec<Vec<PlayerId>>,
    pub loads: Vec<f64>,
}

/// A single game-invariant violation. Violations are data, not faults:
/// [`validate_game`] collects all of them.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoPlayers,
    NoResources,
    NonDensePlayerId {
        index: usize,
        id: usize,
    },
    NonDenseResourceId {
        index: usize,
        id: usize,
    },
    NonPositiveWeight {
        player: PlayerId,
    },
    NoStrategies {
        player: PlayerId,
    },
    EmptyStrategy {
        player: PlayerId,
        strategy: usize,
    },
    UnknownResource {
        player: PlayerId,
        strategy: usize,
        resource: ResourceId,
    },
    DuplicateResourceInStrategy {
        player: PlayerId,
        strategy: usize,
        resource: ResourceId,
    },
    DuplicateStrategy {
        player: PlayerId,
        first: usize,
        second: usize,
    },
    NegativeCoefficient {
        resource: ResourceId,
        index: usize,
    },
    ZeroCostFunction {
        resource: ResourceId,
    },
    DegreeTooHigh {
        resource: ResourceId,
        degree: usize,
    },
    WrongDegree {
        declared: usize,
        actual: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoPlayers => write!(f, "game must have at least one player"),
            Violation::NoResources => write!(f, "game must have at least one resource"),
            Violation::NonDensePlayerId { index, id } => {
                write!(
                    f,
                    "player id {id} at position {index}: ids must be dense 0-based"
                )
            }
            Violation::NonDenseResourceId { index, id } => {
                write!(
                    f,
                    "resource id {id} at position {index}: ids must be dense 0-based"
                )
            }
            Violation::NonPositiveWeight { player } => {
                write!(f, "player {player}: weight must be positive")
            }
            Violation::NoStrategies { player } => {
                write!(f, "player {player}: strategy set must be non-empty")
            }
            Violation::EmptyStrategy { player, strategy } => {
                write!(
                    f,
                    "player {player} strategy {strategy}: empty strategies are forbidden"
                )
            }
            Violation::UnknownResource {
                player,
                strategy,
                resource,
            } => {
                write!(
                    f,
                    "player {player} strategy {strategy}: unknown resource {resource}"
                )
            }
            Violation::DuplicateResourceInStrategy {
                player,
                strategy,
                resource,
            } => {
                write!(
                    f,
                    "player {player} strategy {strategy}: duplicate resource {resource}"
                )
            }
            Violation::DuplicateStrategy {
                player,
                first,
                second,
            } => {
                write!(
                    f,
                    "player {player}: strategies {first} and {second} are the same set"
                )
            }
            Violation::NegativeCoefficient { resource, index } => {
                write!(f, "resource {resource}: coefficient {index} is negative")
            }
            Violation::ZeroCostFunction { resource } => {
                write!(f, "resource {resource}: identically-zero cost function")
            }
            Violation::DegreeTooHigh { resource, degree } => {
                write!(
                    f,
                    "resource {resource}: degree {degree} exceeds maximum {MAX_DEGREE}"
                )
            }
            Violation::WrongDegree { declared, actual } => {
                write!(
                    f,
                    "declared max degree {declared} but resources have max degree {actual}"
                )
            }
        }
    }
}

/// Collects every invariant violation; an empty list means the game is valid.
pub fn validate_game(game: &Game) -> Vec<Violation> {
    let mut out = Vec::new();
    if game.players.is_empty() {
        out.push(Violation::NoPlayers);
    }
    if game.resources.is_empty() {
        out.push(Violation::NoResources);
    }
    for (index, r) in game.resources.iter().enumerate() {
        if r.id != index {
            out.push(Violation::NonDenseResourceId { index, id: r.id });
        }
        let coeffs = r.cost.coefficients();
        for (k, &a) in coeffs.iter().enumerate() {
            if a < 0.0 {
                out.push(Violation::NegativeCoefficient {
                    resource: index,
                    index: k,
                });
            }
        }
        if !coeffs.iter().any(|&a| a > 0.0) {
            out.push(Violation::ZeroCostFunction { resource: index });
        } else if r.cost.degree() > MAX_DEGREE {
            out.push(Violation::DegreeTooHigh {
                resource: index,
                degree: r.cost.degree(),
            });
        }
    }
    let m = game.resources.len();
    for (index, p) in game.players.iter().enumerate() {
        if p.id != index {
            out.push(Violation::NonDensePlayerId { index, id: p.id });
        }
        if p.weight.is_nan() || p.weight <= 0.0 {
            out.push(Violation::NonPositiveWeight { player: index });
        }
        if p.strategies.is_empty() {
            out.push(Violation::NoStrategies { player: index });
        }
        let mut seen: Vec<BTreeSet<ResourceId>> = Vec::with_capacity(p.strategies.len());
        for (s, strat) in p.strategies.iter().enumerate() {
            if strat.is_empty() {
                out.push(Violation::EmptyStrategy {
                    player: index,
                    strategy: s,
                });
            }
            let mut set = BTreeSet::new();
            for &e in strat {
                if e >= m {
                    out.push(Violation::UnknownResource {
                        player: index,
                        strategy: s,
                        resource: e,
                    });
                } else if !set.insert(e) {
                    out.push(Violation::DuplicateResourceInStrategy {
                        player: index,
                        strategy: s,
                        resource: e,
                    });
                }
            }
            if let Some(first) = seen.iter().position(|prev| *prev == set) {
                out.push(Violation::DuplicateStrategy {
                    player: index,
                    first,
                    second: s,
                });
            }
            seen.push(set);
        }
    }
    let actual = game
        .resources
        .iter()
        .map(|r| r.cost.degree())
        .max()
        .unwrap_or(0);
    if game.d != actual {
        out.push(Violation::WrongDegree {
            declared: game.d,
            actual,
        });
    }
    out
}

/// Errors unless [`validate_game`] returns no violations.
pub fn ensure_valid(game: &Game) -> Result<()> {
    let violations = validate_game(game);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidGame(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }
}

/// Errors unless the profile indexes valid strategies of this game.
pub fn validate_profile(game: &Game, profile: &Profile) -> Result<()> {
    if profile.choice.len() != game.players.len() {
        return Err(Error::InvalidProfile(format!(
            "profile has {} choices for {} players",
            profile.choice.len(),
            game.players.len()
        )));
    }
    for (i, (&c, p)) in profile.choice.iter().zip(&game.players).enumerate() {
        if c >= p.strategies.len() {
            return Err(Error::InvalidProfile(format!(
                "player {i}: strategy index {c} out of range {}",
                p.strategies.len()
            )));
        }
    }
    Ok(())
}

fn check_restriction(game: &Game, restriction: &BTreeSet<PlayerId>) -> Result<()> {
    if let Some(&bad) = restriction.iter().find(|&&i| i >= game.players.len()) {
        return Err(Error::Precondition(format!(
            "restriction references unknown player {bad}"
        )));
    }
    Ok(())
}

/// Per-resource user sets `S_e` and loads `f_e`; with a restriction `A`,
/// also `S_e^A = S_e ∩ A` and `f_e^A`.
pub fn load_view(
    game: &Game,
    profile: &Profile,
    restriction: Option<&BTreeSet<PlayerId>>,
) -> Result<LoadView> {
    validate_profile(game, profile)?;
    let m = game.resources.len();
    let mut users = vec![Vec::new(); m];
    let mut loads = vec![0.0f64; m];
    for (i, p) in game.players.iter().enumerate() {
        for &e in &p.strategies[profile.choice[i]] {
            users[e].push(i);
            loads[e] += p.weight;
        }
    }
    let restricted = match restriction {
        None => None,
        Some(set) => {
            check_restriction(game, set)?;
            let mut r_users = vec![Vec::new(); m];
            let mut r_loads = vec![0.0f64; m];
            for (e, us) in users.iter().enumerate() {
                for &i in us {
                    if set.contains(&i) {
                        r_users[e].push(i);
                        r_loads[e] += game.players[i].weight;
                    }
                }
            }
            Some(RestrictedView {
                users: r_users,
                loads: r_loads,
            })
        }
    };
    Ok(LoadView {
        users,
        loads,
        restricted,
    })
}

/// Social cost. Unrestricted: `sum_e C_e(f_e)`. Restricted to `A`:
/// `sum_{i in A} X_i(P)` under exact Shapley shares.
pub fn social_cost(
    game: &Game,
    profile: &Profile,
    restriction: Option<&BTreeSet<PlayerId>>,
) -> Result<f64> {
    match restriction {
        None => {
            let lv = load_view(game, profile, None)?;
            Ok(game
                .resources
                .iter()
                .zip(&lv.loads)
                .map(|(r, &f)| r.cost.joint_cost(f))
                .sum())
        }
        Some(set) => {
            validate_profile(game, profile)?;
            check_restriction(game, set)?;
            let mut total = 0.0;
            for &i in set {
                total += crate::sharing::player_cost(
                    game,
                    profile,
                    i,
                    &crate::ShareMethod::ShapleyExact,
                )?;
            }
            Ok(total)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GameFile {
    resources: Vec<Resource>,
    players: Vec<Player>,
}

/// Parses the game file format. Ids must already be dense (position ==
/// id); anything else is rejected here because in-memory indexing relies
/// on it.
pub fn game_from_json(text: &str) -> Result<Game> {
    let file: GameFile = serde_json::from_str(text)?;
    for (index, r) in file.resources.iter().enumerate() {
        if r.id != index {
            return Err(Error::InvalidGame(
                Violation::NonDenseResourceId { index, id: r.id }.to_string(),
            ));
        }
    }
    for (index, p) in file.players.iter().enumerate() {
        if p.id != index {
            return Err(Error::InvalidGame(
                Violation::NonDensePlayerId { index, id: p.id }.to_string(),
            ));
        }
    }
    Ok(Game::new(file.players, file.resources))
}

pub fn game_to_json(game: &Game) -> String {
    let file = GameFile {
        resources: game.resources.clone(),
        players: game.players.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("game serialization");
    s.push('\n');
    s
}

pub fn read_game(path: &Path) -> Result<Game> {
    game_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_game(path: &Path, game: &Game) -> Result<()> {
    std::fs::write(path, game_to_json(game))?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<Profile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_profile(path: &Path, profile: &Profile) -> Result<()> {
    let mut s = serde_json::to_string(profile).expect("profile serialization");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}
