//! The exact potential of the game, its player-set-limited variant, and
//! partial potentials.
//!
//! For a fixed ordering of the players, the potential charges each user of a
//! resource her exact Shapley share within the set of users that precede her
//! (inclusive) in the ordering, summed over resources. The value does not
//! depend on the ordering; the canonical ordering (ascending player id) is
//! used whenever the caller supplies none, so traces are reproducible.
//!
//! The partial potential of `B` inside `A` is the literal difference of two
//! limited-potential evaluations. Incremental formulas are an optimization
//! that tests must validate against this reference; none is used here.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::game::{self, Game, PlayerId, Profile};
use crate::sharing::shapley_exact;
use crate::{Error, Result};

/// A potential evaluation: the total, its per-resource breakdown, and the
/// player ordering that was used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialValue {
    pub total: f64,
    pub per_resource: Vec<f64>,
    pub ordering: Vec<PlayerId>,
}

fn check_ordering(game: &Game, ordering: &[PlayerId]) -> Result<()> {
    let n = game.players.len();
    if ordering.len() != n {
        return Err(Error::Precondition(format!(
            "ordering has {} entries for {n} players",
            ordering.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in ordering {
        if i >= n || seen[i] {
            return Err(Error::Precondition(
                "ordering is not a permutation of the players".into(),
            ));
        }
        seen[i] = true;
    }
    Ok(())
}

fn canonical_ordering(game: &Game) -> Vec<PlayerId> {
    (0..game.players.len()).collect()
}

fn evaluate(
    game: &Game,
    profile: &Profile,
    restriction: Option<&BTreeSet<PlayerId>>,
    ordering: &[PlayerId],
) -> Result<PotentialValue> {
    let lv = game::load_view(game, profile, restriction)?;
    let users_per_resource = match (&lv.restricted, restriction) {
        (Some(r), Some(_)) => &r.users,
        _ => &lv.users,
    };
    let mut rank = vec![0usize; game.players.len()];
    for (pos, &i) in ordering.iter().enumerate() {
        rank[i] = pos;
    }
    let mut per_resource = Vec::with_capacity(game.resources.len());
    for (e, resource) in game.resources.iter().enumerate() {
        let mut ordered: Vec<PlayerId> = users_per_resource[e].clone();
        ordered.sort_by_key(|&i| rank[i]);
        let mut phi_e = 0.0;
        let mut prefix: Vec<(PlayerId, f64)> = Vec::with_capacity(ordered.len());
        for &i in &ordered {
            prefix.push((i, game.players[i].weight));
            phi_e += shapley_exact(&resource.cost, &prefix, i)?;
        }
        per_resource.push(phi_e);
    }
    Ok(PotentialValue {
        total: per_resource.iter().sum(),
        per_resource,
        ordering: ordering.to_vec(),
    })
}

/// The exact potential of the profile. `ordering = None` uses the canonical
/// ascending-id ordering.
pub fn potential(
    game: &Game,
    profile: &Profile,
    ordering: Option<&[PlayerId]>,
) -> Result<PotentialValue> {
    let ord = match ordering {
        Some(o) => {
            check_ordering(game, o)?;
            o.to_vec()
        }
        None => canonical_ordering(game),
    };
    evaluate(game, profile, None, &ord)
}

/// The A-limited potential: the same computation over `S_e^A` only.
pub fn limited_potential(
    game: &Game,
    profile: &Profile,
    a: &BTreeSet<PlayerId>,
    ordering: Option<&[PlayerId]>,
) -> Result<PotentialValue> {
    let ord = match ordering {
        Some(o) => {
            check_ordering(game, o)?;
            o.to_vec()
        }
        None => canonical_ordering(game),
    };
    evaluate(game, profile, Some(a), &ord)
}

/// The B-partial potential of `A`: `Phi^A(P) - Phi^(A\B)(P)`, a non-negative
/// quantity for `B ⊆ A`.
pub fn partial_potential(
    game: &Game,
    profile: &Profile,
    a: &BTreeSet<PlayerId>,
    b: &BTreeSet<PlayerId>,
    ordering: Option<&[PlayerId]>,
) -> Result<f64> {
    if !b.is_subset(a) {
        return Err(Error::Precondition("B must be a subset of A".into()));
    }
    let a_without_b: BTreeSet<PlayerId> = a.difference(b).copied().collect();
    let full = limited_potential(game, profile, a, ordering)?;
    let rest = limited_potential(game, profile, &a_without_b, ordering)?;
    Ok(full.total - rest.total)
}
