//! Finite-state-system abstraction: the contract every planning domain
//! implements and the search engine consumes.
//!
//! A domain is a deterministic transition system over bit-packed states.
//! Actions carry a duration (0 for instantaneous updates, 1 for a one-second
//! tick) and a nonnegative weight; per-step costs may additionally depend on
//! the elapsed durative time.

use crate::fixed::Cost;
use crate::pack::{DecodeError, PackedState};
use thiserror::Error;

/// Index into a domain's action table.
pub type ActionId = u8;

/// Upper bound on consecutive instantaneous firings between two durative
/// ticks. Chains may also never revisit an intra-tick state, which rules out
/// zero-duration cycles.
pub const MAX_INSTANT_CHAIN: usize = 3;

/// Static description of one action (transition rule).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDescriptor {
    pub name: &'static str,
    /// Durative length in ticks; 0 or 1 in this artifact.
    pub duration: u32,
    /// Static weight; the full per-step cost comes from [`Domain::step_cost`].
    pub weight: Cost,
}

/// Result of firing one enabled action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionOutcome {
    pub successor: PackedState,
    pub action: ActionId,
    /// A violated invariant label makes the successor terminal for search
    /// purposes: it is recorded and counted but never expanded.
    pub violation: Option<&'static str>,
}

/// A deterministic planning domain over packed states.
///
/// Implementations must be pure: no mutable shared state, so that many
/// search workers can call into the domain concurrently.
pub trait Domain: Sync {
    /// Action table; indices are `ActionId`s and the order is the
    /// tie-breaking order used by the planner.
    fn actions(&self) -> &[ActionDescriptor];

    fn initial_state(&self) -> PackedState;

    /// All outcomes of enabled actions, in action-id order. Empty when no
    /// action is enabled. Decoding failures indicate a corrupted descriptor.
    fn successors(&self, state: PackedState) -> Result<Vec<TransitionOutcome>, DecodeError>;

    fn is_goal(&self, state: PackedState) -> bool;

    /// Invariant check on a single state.
    fn violation(&self, state: PackedState) -> Option<&'static str>;

    /// Full cost of firing `action` from `state` with `elapsed` durative
    /// ticks already spent.
    fn step_cost(&self, state: PackedState, action: ActionId, elapsed: u32) -> Cost;

    /// Declared descriptor width in bits.
    fn descriptor_bits(&self) -> u32;
}

/// A planning problem: a domain (which carries its goal predicate and cost
/// function) plus the temporal horizon in durative ticks.
#[derive(Clone, Copy)]
pub struct PlanningProblem<'a, D: Domain + ?Sized> {
    pub domain: &'a D,
    /// Maximum durative length of a plan, in ticks.
    pub horizon: u32,
}

impl<'a, D: Domain + ?Sized> PlanningProblem<'a, D> {
    pub fn new(domain: &'a D, horizon: u32) -> Self {
        assert!(horizon >= 1, "horizon must be at least one tick");
        PlanningProblem { domain, horizon }
    }
}

/// An alternating state/action sequence consistent with the domain
/// transition function.
///
/// `steps[k]` records the state an action fired from together with the
/// action; the successor of each step is the state of the next one, or
/// `final_state` for the last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub steps: Vec<(PackedState, ActionId)>,
    pub final_state: PackedState,
}

impl Trajectory {
    /// The zero-length trajectory sitting at `state`.
    pub fn empty(state: PackedState) -> Trajectory {
        Trajectory {
            steps: Vec::new(),
            final_state: state,
        }
    }

    pub fn initial_state(&self) -> PackedState {
        self.steps.first().map(|s| s.0).unwrap_or(self.final_state)
    }

    /// Number of actions (the trajectory length).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.steps.iter().map(|s| s.1)
    }

    /// Sum of action durations, i.e. the elapsed seconds.
    pub fn durative_ticks<D: Domain + ?Sized>(&self, domain: &D) -> u32 {
        self.steps
            .iter()
            .map(|s| domain.actions()[s.1 as usize].duration)
            .sum()
    }

    /// States in visit order, including the initial and final states.
    pub fn states(&self) -> impl Iterator<Item = PackedState> + '_ {
        self.steps
            .iter()
            .map(|s| s.0)
            .chain(std::iter::once(self.final_state))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {step}: action {action} is not enabled")]
    NotEnabled { step: usize, action: ActionId },
    #[error("step {step}: recorded successor does not match the transition function")]
    SuccessorMismatch { step: usize },
    #[error("step {step}: corrupted state descriptor")]
    Corrupted { step: usize },
}

/// Replays a trajectory through the domain transition function, verifying
/// every recorded state bit-exactly.
pub fn replay<D: Domain + ?Sized>(domain: &D, t: &Trajectory) -> Result<(), ReplayError> {
    for (k, &(state, action)) in t.steps.iter().enumerate() {
        let outcomes = domain
            .successors(state)
            .map_err(|_| ReplayError::Corrupted { step: k })?;
        let outcome = outcomes
            .iter()
            .find(|o| o.action == action)
            .ok_or(ReplayError::NotEnabled { step: k, action })?;
        let expected = t.steps.get(k + 1).map(|s| s.0).unwrap_or(t.final_state);
        if outcome.successor != expected {
            return Err(ReplayError::SuccessorMismatch { step: k });
        }
    }
    Ok(())
}

/// Total cost of a trajectory: the sum of per-step costs, evaluated at the
/// durative time each action fired.
pub fn trajectory_cost<D: Domain + ?Sized>(
    domain: &D,
    t: &Trajectory,
) -> Result<Cost, ReplayError> {
    replay(domain, t)?;
    let mut total = Cost::ZERO;
    let mut elapsed = 0u32;
    for &(state, action) in &t.steps {
        total += domain.step_cost(state, action, elapsed);
        elapsed += domain.actions()[action as usize].duration;
    }
    Ok(total)
}

/// Why a trajectory is not an admissible solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdmissibilityFailure {
    NotFromInitialState,
    NotReplayable(ReplayError),
    HorizonExceeded { ticks: u32, horizon: u32 },
    InstantChainExceeded { step: usize },
    InvariantViolated { step: usize, label: &'static str },
    GoalNotReached,
}

/// Checks whether `t` is an admissible solution: it starts at the initial
/// state, replays, keeps its durative length within the horizon, violates no
/// invariant before the end, and finishes in a goal state.
pub fn check_admissible<D: Domain + ?Sized>(
    problem: &PlanningProblem<'_, D>,
    t: &Trajectory,
) -> Result<(), AdmissibilityFailure> {
    let domain = problem.domain;
    if t.initial_state() != domain.initial_state() {
        return Err(AdmissibilityFailure::NotFromInitialState);
    }
    if let Err(e) = replay(domain, t) {
        return Err(AdmissibilityFailure::NotReplayable(e));
    }
    let ticks = t.durative_ticks(domain);
    if ticks > problem.horizon {
        return Err(AdmissibilityFailure::HorizonExceeded {
            ticks,
            horizon: problem.horizon,
        });
    }
    let mut chain = 0usize;
    for (k, &(_, action)) in t.steps.iter().enumerate() {
        if domain.actions()[action as usize].duration == 0 {
            chain += 1;
            if chain > MAX_INSTANT_CHAIN {
                return Err(AdmissibilityFailure::InstantChainExceeded { step: k });
            }
        } else {
            chain = 0;
        }
    }
    // Intermediate states must satisfy every invariant; the final state must
    // satisfy the goal.
    for (k, state) in t.states().enumerate() {
        if k == t.len() {
            break;
        }
        if let Some(label) = domain.violation(state) {
            return Err(AdmissibilityFailure::InvariantViolated { step: k, label });
        }
    }
    if !domain.is_goal(t.final_state) {
        return Err(AdmissibilityFailure::GoalNotReached);
    }
    Ok(())
}

/// Boolean form of [`check_admissible`].
pub fn is_admissible<D: Domain + ?Sized>(problem: &PlanningProblem<'_, D>, t: &Trajectory) -> bool {
    check_admissible(problem, t).is_ok()
}
