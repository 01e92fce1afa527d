//! Brute-force planning oracle for micro instances.
//!
//! Depth-first enumeration of every legal action sequence up to the horizon:
//! instantaneous chains are bounded and may not revisit an intra-tick state,
//! invariant violations terminate a branch, and goal states end a sequence.
//! No other pruning is applied, so the minimum cost found is ground truth
//! for the search engine. Deliberately single-threaded and simple enough to
//! audit by eye.

use crate::fixed::Cost;
use crate::fss::{ActionId, Domain, PlanningProblem, Trajectory, MAX_INSTANT_CHAIN};
use crate::pack::{DecodeError, PackedState};
use thiserror::Error;

/// Default cap on rule applications before the oracle gives up.
pub const DEFAULT_EXPLOSION_GUARD: u64 = 100_000_000;

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Minimum cost over all admissible sequences, if any exists.
    pub best_cost: Option<Cost>,
    /// The action sequence achieving it, tie-broken by (cost, duration,
    /// lexicographic action order) like the search engine.
    pub best_sequence: Vec<ActionId>,
    /// Rule applications performed during the enumeration.
    pub sequences_explored: u64,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("explosion guard exceeded after {expansions} rule applications")]
    ExplosionGuard { expansions: u64 },
    #[error(transparent)]
    Corrupted(#[from] DecodeError),
}

struct Dfs<'a, D: Domain + ?Sized> {
    domain: &'a D,
    horizon: u32,
    guard: u64,
    expansions: u64,
    best: Option<(Cost, u32, Vec<ActionId>)>,
    sequence: Vec<ActionId>,
    /// States on the current instantaneous chain, including its root.
    chain: Vec<PackedState>,
}

impl<D: Domain + ?Sized> Dfs<'_, D> {
    fn offer(&mut self, cost: Cost, ticks: u32) {
        let candidate = (cost, ticks, &self.sequence);
        let replace = match &self.best {
            None => true,
            Some((bc, bt, bs)) => candidate < (*bc, *bt, bs),
        };
        if replace {
            self.best = Some((cost, ticks, self.sequence.clone()));
        }
    }

    fn run(
        &mut self,
        state: PackedState,
        ticks: u32,
        chain_len: usize,
        cost: Cost,
    ) -> Result<(), OracleError> {
        for outcome in self.domain.successors(state)? {
            self.expansions += 1;
            if self.expansions > self.guard {
                return Err(OracleError::ExplosionGuard {
                    expansions: self.expansions,
                });
            }
            let action = outcome.action;
            let duration = self.domain.actions()[action as usize].duration;
            if duration == 0 {
                if chain_len >= MAX_INSTANT_CHAIN || self.chain.contains(&outcome.successor) {
                    continue;
                }
            } else if ticks + duration > self.horizon {
                continue;
            }
            if outcome.violation.is_some() {
                continue;
            }
            let step = self.domain.step_cost(state, action, ticks);
            let next_cost = cost + step;
            let next_ticks = ticks + duration;
            self.sequence.push(action);
            if self.domain.is_goal(outcome.successor) {
                self.offer(next_cost, next_ticks);
            } else if duration == 0 {
                self.chain.push(outcome.successor);
                self.run(outcome.successor, next_ticks, chain_len + 1, next_cost)?;
                self.chain.pop();
            } else {
                let saved = std::mem::replace(&mut self.chain, vec![outcome.successor]);
                self.run(outcome.successor, next_ticks, 0, next_cost)?;
                self.chain = saved;
            }
            self.sequence.pop();
        }
        Ok(())
    }
}

/// Exhaustively enumerates all legal sequences of at most `max_ticks`
/// durative ticks and returns the minimum-cost admissible one.
pub fn brute_force_plan<D: Domain + ?Sized>(
    problem: &PlanningProblem<'_, D>,
    max_ticks: u32,
    guard: u64,
) -> Result<OracleResult, OracleError> {
    let domain = problem.domain;
    let root = domain.initial_state();
    let mut dfs = Dfs {
        domain,
        horizon: max_ticks.min(problem.horizon),
        guard,
        expansions: 0,
        best: None,
        sequence: Vec::new(),
        chain: vec![root],
    };
    if domain.is_goal(root) {
        return Ok(OracleResult {
            best_cost: Some(Cost::ZERO),
            best_sequence: Vec::new(),
            sequences_explored: 0,
        });
    }
    if domain.violation(root).is_none() {
        dfs.run(root, 0, 0, Cost::ZERO)?;
    }
    let expansions = dfs.expansions;
    match dfs.best {
        Some((cost, _, sequence)) => Ok(OracleResult {
            best_cost: Some(cost),
            best_sequence: sequence,
            sequences_explored: expansions,
        }),
        None => Ok(OracleResult {
            best_cost: None,
            best_sequence: Vec::new(),
            sequences_explored: expansions,
        }),
    }
}

/// Replays an oracle sequence into a full trajectory.
pub fn sequence_trajectory<D: Domain + ?Sized>(
    domain: &D,
    sequence: &[ActionId],
) -> Option<Trajectory> {
    let mut cur = domain.initial_state();
    let mut steps = Vec::with_capacity(sequence.len());
    for &action in sequence {
        let outcomes = domain.successors(cur).ok()?;
        let outcome = outcomes.into_iter().find(|o| o.action == action)?;
        steps.push((cur, action));
        cur = outcome.successor;
    }
    Some(Trajectory {
        steps,
        final_state: cur,
    })
}
