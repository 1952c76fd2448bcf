//! Phased improvement dynamics computing an alpha-approximate pure Nash
//! equilibrium.
//!
//! The schedule partitions player costs into geometric blocks
//! `b_r = X_max * g^(-r)` with `g = 2 n (d+1) gamma^(-3)`. An initial loop
//! lets players with cost at least `b_1` make t-moves (`t = 1 + gamma`);
//! each later phase `r` lets players at or above `b_r` make s-moves
//! (`s = (1/theta - 2 gamma)^(-1)`) and players inside `[b_(r+1), b_r)`
//! make t-moves, then freezes everyone at or above `b_r` for good.
//!
//! The scan order is a deterministic round-robin over non-finished players
//! by ascending id, restarting after every executed move; eligibility costs
//! are recomputed from the current profile at scan time. Interval
//! boundaries: the s-class is closed at `b_r`, the t-class half-open
//! `[b_(r+1), b_r)`, so a player exactly at `b_r` is classified once.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{limited_stretch_bound, max_admissible_gamma};
use crate::game::{self, Game, PlayerId, Profile};
use crate::numeric::REL_TOL;
use crate::potential::potential;
use crate::sharing::{player_cost, ShareMethod};
use crate::{Error, Result};

/// Derived constants of the phased schedule.
#[derive(Clone, Debug, Serialize)]
pub struct ScheduleParams {
    pub gamma: f64,
    /// t-move factor `1 + gamma`.
    pub t: f64,
    /// t-stretch upper bound at `rho = t`.
    pub theta: f64,
    /// s-move factor `(1/theta - 2 gamma)^(-1)`.
    pub s: f64,
    /// Block ratio `2 n (d+1) gamma^(-3)`.
    pub g: f64,
    /// Maximum player cost in the initial profile (exact Shapley).
    pub x_max: f64,
    /// Minimum solo best-response cost over all players.
    pub x_min: f64,
    /// Phase count `max(1, ceil(log_g(x_max / x_min)))`.
    pub m: usize,
    /// Block thresholds `b_0 .. b_m`, strictly decreasing, `b_m <= x_min`.
    pub blocks: Vec<f64>,
    /// Advertised guarantee `((1 + gamma^2)/(1 - gamma)) * s`.
    pub alpha: f64,
}

/// Kind of an executed improvement move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    #[serde(rename = "s")]
    S,
    #[serde(rename = "t")]
    T,
}

/// One executed move. Phase 0 is the initial t-move loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoveRecord {
    pub step: u64,
    pub phase: usize,
    pub player: PlayerId,
    pub from_strategy: usize,
    pub to_strategy: usize,
    pub cost_before: f64,
    pub cost_after: f64,
    pub kind: MoveKind,
    /// Exact potential after the move (canonical ordering); `None` when the
    /// instance is too large for exact shares.
    pub potential_after: Option<f64>,
}

/// Per-phase summary: step count, end-of-phase potential and social cost,
/// deviating players `D_r`, and the finished set after freezing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: usize,
    pub steps: u64,
    pub potential_end: Option<f64>,
    pub social_cost_end: f64,
    pub deviators: Vec<PlayerId>,
    pub finished_after: Vec<PlayerId>,
}

/// Complete move log of one solver run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveTrace {
    pub moves: Vec<MoveRecord>,
    pub phases: Vec<PhaseRecord>,
    pub final_profile: Profile,
}

impl SolveTrace {
    /// One JSON move record per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for record in &self.moves {
            out.push_str(&serde_json::to_string(record).expect("move serialization"));
            out.push('\n');
        }
        out
    }

    /// Per-phase summary as CSV (`phase,steps,potential,social_cost`).
    pub fn phase_csv(&self) -> String {
        let mut out = String::from("phase,steps,potential,social_cost\n");
        for p in &self.phases {
            let phi = p.potential_end.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.phase, p.steps, phi, p.social_cost_end
            ));
        }
        out
    }
}

/// Solver output: the final profile, the full trace, and the schedule used.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub final_profile: Profile,
    pub trace: SolveTrace,
    pub schedule: ScheduleParams,
}

/// Block ratio `g = 2 n (d+1) gamma^(-3)`.
pub fn block_ratio(n: usize, d: usize, gamma: f64) -> f64 {
    2.0 * n as f64 * (d + 1) as f64 * gamma.powi(-3)
}

/// Evaluates `X_i(P_{-i}, P'_i)` for every strategy of the player and
/// returns a minimizer, ties broken by lowest strategy index.
pub fn best_response(
    game: &Game,
    profile: &Profile,
    player: PlayerId,
    method: &ShareMethod,
) -> Result<(usize, f64)> {
    if player >= game.players.len() {
        return Err(Error::Precondition(format!("unknown player {player}")));
    }
    game::validate_profile(game, profile)?;
    let mut alt = profile.clone();
    let mut best: Option<(usize, f64)> = None;
    for s in 0..game.players[player].strategies.len() {
        alt.choice[player] = s;
        let cost = player_cost(game, &alt, player, method)?;
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((s, cost));
        }
    }
    best.ok_or_else(|| Error::InvalidGame(format!("player {player} has no strategies")))
}

/// A rho-improving deviation: the best response together with the ratio
/// `X_i(P) / X_i(P_{-i}, BR)` and the target cost.
#[derive(Clone, Copy, Debug)]
pub struct RhoMove {
    pub strategy: usize,
    pub ratio: f64,
    pub target_cost: f64,
}

/// Returns the best-response deviation iff it improves by strictly more
/// than the factor rho: `X_i(P) > rho (1 + REL_TOL) X_i(P_{-i}, BR)`.
pub fn can_rho_move(
    game: &Game,
    profile: &Profile,
    player: PlayerId,
    rho: f64,
    method: &ShareMethod,
) -> Result<Option<RhoMove>> {
    if rho < 1.0 {
        return Err(Error::Precondition(format!("rho must be >= 1, got {rho}")));
    }
    let current = player_cost(game, profile, player, method)?;
    let (strategy, target_cost) = best_response(game, profile, player, method)?;
    if current > rho * (1.0 + REL_TOL) * target_cost {
        Ok(Some(RhoMove {
            strategy,
            ratio: current / target_cost,
            target_cost,
        }))
    } else {
        Ok(None)
    }
}

/// Minimum cost a player can have in the whole game: her best strategy when
/// she is the only participant.
fn solo_best_cost(game: &Game, player: PlayerId) -> f64 {
    let w = game.players[player].weight;
    game.players[player]
        .strategies
        .iter()
        .map(|strat| {
            strat
                .iter()
                .map(|&e| game.resources[e].cost.joint_cost(w))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Derives the full phase schedule from the initial profile.
pub fn compute_schedule(game: &Game, initial: &Profile, gamma: f64) -> Result<ScheduleParams> {
    game::ensure_valid(game)?;
    game::validate_profile(game, initial)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Precondition(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let n = game.players.len();
    let d = game.d;
    let t = 1.0 + gamma;
    let theta = limited_stretch_bound(t, d).map_err(|_| Error::GammaTooLarge {
        gamma,
        degree: d,
        max_admissible: max_admissible_gamma(d),
    })?;
    let s_den = 1.0 / theta - 2.0 * gamma;
    if s_den <= 0.0 {
        return Err(Error::GammaTooLarge {
            gamma,
            degree: d,
            max_admissible: max_admissible_gamma(d),
        });
    }
    let s = 1.0 / s_den;
    let alpha = (1.0 + gamma * gamma) / (1.0 - gamma) * s;
    let g = block_ratio(n, d, gamma);
    debug_assert!(g > 1.0);

    let mut x_max = f64::NEG_INFINITY;
    for i in 0..n {
        x_max = x_max.max(player_cost(game, initial, i, &ShareMethod::ShapleyExact)?);
    }
    let x_min = (0..n)
        .map(|i| solo_best_cost(game, i))
        .fold(f64::INFINITY, f64::min);

    let ratio = (x_max / x_min).max(1.0);
    let mut m = (ratio.ln() / g.ln()).ceil().max(1.0) as usize;
    while x_max * g.powi(-(m as i32)) > x_min {
        m += 1;
    }
    let blocks: Vec<f64> = (0..=m).map(|r| x_max * g.powi(-(r as i32))).collect();

    Ok(ScheduleParams {
        gamma,
        t,
        theta,
        s,
        g,
        x_max,
        x_min,
        m,
        blocks,
        alpha,
    })
}

struct RunState<'a> {
    game: &'a Game,
    method: &'a ShareMethod,
    profile: Profile,
    finished: BTreeSet<PlayerId>,
    moves: Vec<MoveRecord>,
    phases: Vec<PhaseRecord>,
    step: u64,
    budget: f64,
}

impl RunState<'_> {
    fn exact_potential(&self) -> Option<f64> {
        potential(self.game, &self.profile, None)
            .ok()
            .map(|p| p.total)
    }

    fn abort_budget(&mut self) -> Error {
        let trace = SolveTrace {
            moves: std::mem::take(&mut self.moves),
            phases: std::mem::take(&mut self.phases),
            final_profile: self.profile.clone(),
        };
        Error::StepBudgetExceeded {
            steps: self.step,
            budget: self.budget,
            trace: Box::new(trace),
        }
    }

    /// Runs one phase to quiescence. `classify` maps a current cost to the
    /// applicable move factor and kind, or `None` when the player is outside
    /// both intervals.
    fn run_phase(
        &mut self,
        phase: usize,
        classify: impl Fn(f64) -> Option<(f64, MoveKind)>,
    ) -> Result<()> {
        let mut deviators = BTreeSet::new();
        let mut steps_this_phase = 0u64;
        'scan: loop {
            for i in 0..self.game.players.len() {
                if self.finished.contains(&i) {
                    continue;
                }
                let cost = player_cost(self.game, &self.profile, i, self.method)?;
                let Some((rho, kind)) = classify(cost) else {
                    continue;
                };
                let Some(mv) = can_rho_move(self.game, &self.profile, i, rho, self.method)? else {
                    continue;
                };
                let from = self.profile.choice[i];
                self.profile.choice[i] = mv.strategy;
                self.step += 1;
                steps_this_phase += 1;
                if self.step as f64 > self.budget {
                    return Err(self.abort_budget());
                }
                self.moves.push(MoveRecord {
                    step: self.step,
                    phase,
                    player: i,
                    from_strategy: from,
                    to_strategy: mv.strategy,
                    cost_before: cost,
                    cost_after: mv.target_cost,
                    kind,
                    potential_after: self.exact_potential(),
                });
                deviators.insert(i);
                continue 'scan;
            }
            break;
        }
        let social_cost_end = game::social_cost(self.game, &self.profile, None)?;
        self.phases.push(PhaseRecord {
            phase,
            steps: steps_this_phase,
            potential_end: self.exact_potential(),
            social_cost_end,
            deviators: deviators.into_iter().collect(),
            finished_after: self.finished.iter().copied().collect(),
        });
        Ok(())
    }
}

/// Runs the phased dynamics from `initial` and returns the final profile,
/// the complete trace, and the schedule.
///
/// Eligibility and best responses use the given share method; trace
/// potentials always use exact Shapley shares. The step budget
/// `(1 + m) * 2 n^2 (d+1) gamma^(-9)` is a proven bound for exact Shapley
/// shares, so exceeding it aborts with the partial trace attached.
pub fn solve(
    game: &Game,
    initial: &Profile,
    gamma: f64,
    method: &ShareMethod,
) -> Result<SolveOutcome> {
    let schedule = compute_schedule(game, initial, gamma)?;
    let n = game.players.len();
    let budget =
        (1.0 + schedule.m as f64) * 2.0 * (n as f64).powi(2) * (game.d + 1) as f64 * gamma.powi(-9);

    let mut state = RunState {
        game,
        method,
        profile: initial.clone(),
        finished: BTreeSet::new(),
        moves: Vec::new(),
        phases: Vec::new(),
        step: 0,
        budget,
    };

    // Initial loop: players at or above b_1 prepare the first real phase
    // with t-moves.
    let b1 = schedule.blocks[1];
    let t = schedule.t;
    state.run_phase(0, |cost| (cost >= b1).then_some((t, MoveKind::T)))?;

    for r in 1..schedule.m {
        let b_r = schedule.blocks[r];
        let b_next = schedule.blocks[r + 1];
        let s = schedule.s;
        state.run_phase(r, |cost| {
            if cost >= b_r {
                Some((s, MoveKind::S))
            } else if cost >= b_next {
                Some((t, MoveKind::T))
            } else {
                None
            }
        })?;
        // Freeze: players at or above b_r have decided irrevocably.
        for i in 0..n {
            if !state.finished.contains(&i) {
                let cost = player_cost(game, &state.profile, i, method)?;
                if cost >= b_r {
                    state.finished.insert(i);
                }
            }
        }
        if let Some(last) = state.phases.last_mut() {
            last.finished_after = state.finished.iter().copied().collect();
        }
    }

    let final_profile = state.profile.clone();
    let trace = SolveTrace {
        moves: state.moves,
        phases: state.phases,
        final_profile: final_profile.clone(),
    };
    Ok(SolveOutcome {
        final_profile,
        trace,
        schedule,
    })
}
