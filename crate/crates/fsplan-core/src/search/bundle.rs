//! Tick-bundle enumeration.
//!
//! One search edge is a bundle: a chain of at most [`MAX_INSTANT_CHAIN`]
//! instantaneous actions followed by one durative action. Chains never
//! revisit an intra-tick state, which removes zero-duration cycles without
//! losing any optimal plan (a cycle-free chain to the same state exists with
//! at most the same cost).

use crate::fixed::Cost;
use crate::fss::{ActionId, Domain, MAX_INSTANT_CHAIN};
use crate::pack::{DecodeError, PackedState};
use thiserror::Error;

/// Compact encoding of a bundle's action sequence: one nibble per action
/// (id + 1), first action in the highest nibble. Numeric order on keys is
/// lexicographic order on sequences, which is the planner's tie-breaking
/// order among equal-cost candidates.
pub type BundleKey = u16;

pub fn bundle_key(actions: &[ActionId]) -> BundleKey {
    debug_assert!(actions.len() <= MAX_INSTANT_CHAIN + 1);
    let mut key = 0u16;
    for (i, &a) in actions.iter().enumerate() {
        debug_assert!(a < 15);
        key |= (a as u16 + 1) << (4 * (3 - i));
    }
    key
}

/// Decodes a bundle key back into its action sequence.
pub fn decode_bundle(key: BundleKey) -> Vec<ActionId> {
    let mut out = Vec::with_capacity(4);
    for i in 0..4 {
        let nibble = (key >> (4 * (3 - i))) & 0xF;
        if nibble == 0 {
            break;
        }
        out.push((nibble - 1) as ActionId);
    }
    out
}

/// One event produced while enumerating the bundles of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleEvent {
    /// A state materialized by an instantaneous action, at the same durative
    /// depth as the root. Terminal if it violates an invariant.
    ChainState {
        state: PackedState,
        violation: bool,
    },
    /// A complete bundle: the durative action advanced time by one tick.
    Tick {
        bundle: BundleKey,
        successor: PackedState,
        cost: Cost,
        violation: bool,
    },
    /// A chain prefix that reached a goal state without firing a durative
    /// action; only reported when goals are treated as terminal.
    GoalChain {
        bundle: BundleKey,
        state: PackedState,
        cost: Cost,
    },
}

#[derive(Debug, Error)]
pub enum ExpandError {
    #[error(transparent)]
    Corrupted(#[from] DecodeError),
    #[error("action {action} produced a negative step cost")]
    NegativeCost { action: ActionId },
}

/// Enumerates every bundle rooted at `state` with `elapsed` durative ticks
/// spent, emitting events in lexicographic action order.
///
/// `goal_terminal` controls whether goal states cut chains (plan search) or
/// are passed through (reachability). `durative` disables tick completion,
/// leaving a chain-only scan for frontier states at the horizon.
pub fn expand_tick<D: Domain + ?Sized>(
    domain: &D,
    state: PackedState,
    elapsed: u32,
    goal_terminal: bool,
    durative: bool,
    emit: &mut dyn FnMut(BundleEvent),
) -> Result<(), ExpandError> {
    let mut prefix: Vec<ActionId> = Vec::with_capacity(MAX_INSTANT_CHAIN + 1);
    let mut path: Vec<PackedState> = vec![state];
    recurse(
        domain,
        state,
        elapsed,
        Cost::ZERO,
        goal_terminal,
        durative,
        &mut prefix,
        &mut path,
        emit,
    )
}

#[allow(clippy::too_many_arguments)]
fn recurse<D: Domain + ?Sized>(
    domain: &D,
    state: PackedState,
    elapsed: u32,
    cost_so_far: Cost,
    goal_terminal: bool,
    durative: bool,
    prefix: &mut Vec<ActionId>,
    path: &mut Vec<PackedState>,
    emit: &mut dyn FnMut(BundleEvent),
) -> Result<(), ExpandError> {
    for outcome in domain.successors(state)? {
        let action = outcome.action;
        let descriptor = &domain.actions()[action as usize];
        if descriptor.duration == 0 {
            if prefix.len() >= MAX_INSTANT_CHAIN || path.contains(&outcome.successor) {
                continue;
            }
            let violation = outcome.violation.is_some();
            emit(BundleEvent::ChainState {
                state: outcome.successor,
                violation,
            });
            if violation {
                continue;
            }
            let step = domain.step_cost(state, action, elapsed);
            if step.is_negative() {
                return Err(ExpandError::NegativeCost { action });
            }
            let cost = cost_so_far + step;
            prefix.push(action);
            if goal_terminal && domain.is_goal(outcome.successor) {
                emit(BundleEvent::GoalChain {
                    bundle: bundle_key(prefix),
                    state: outcome.successor,
                    cost,
                });
            } else {
                path.push(outcome.successor);
                recurse(
                    domain,
                    outcome.successor,
                    elapsed,
                    cost,
                    goal_terminal,
                    durative,
                    prefix,
                    path,
                    emit,
                )?;
                path.pop();
            }
            prefix.pop();
        } else if durative {
            let step = domain.step_cost(state, action, elapsed);
            if step.is_negative() {
                return Err(ExpandError::NegativeCost { action });
            }
            prefix.push(action);
            emit(BundleEvent::Tick {
                bundle: bundle_key(prefix),
                successor: outcome.successor,
                cost: cost_so_far + step,
                violation: outcome.violation.is_some(),
            });
            prefix.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_roundtrip() {
        for actions in [vec![], vec![3], vec![1, 3], vec![1, 1, 2, 4]] {
            let key = bundle_key(&actions);
            assert_eq!(decode_bundle(key), actions);
        }
    }

    #[test]
    fn key_order_is_lexicographic() {
        // accelerate-first chains sort below a bare running tick, and a
        // prefix sorts below its extension.
        assert!(bundle_key(&[1, 3]) < bundle_key(&[3]));
        assert!(bundle_key(&[1]) < bundle_key(&[1, 3]));
        assert!(bundle_key(&[1, 1, 3]) < bundle_key(&[1, 2, 3]));
    }
}
