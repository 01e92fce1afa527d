//! Reachability analysis and uniform-cost optimal plan search.
//!
//! Both searches proceed layer by layer over durative depth, which enforces
//! the temporal horizon and keys every node by (state, elapsed ticks); the
//! per-step cost may depend on the time index, so two visits to the same
//! state at different times are different nodes. Within nonnegative step
//! costs this layered expansion is exact uniform-cost search: every edge
//! advances exactly one tick, so settling layers in order and stopping once
//! the best goal cost is no worse than the cheapest frontier entry yields a
//! minimum-cost admissible solution.

use super::bundle::{decode_bundle, expand_tick, BundleEvent, BundleKey, ExpandError};
use crate::fixed::Cost;
use crate::fss::{ActionId, Domain, PlanningProblem, Trajectory};
use crate::pack::{DecodeError, PackedState};
use crate::sig::SignatureMode;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::Instant;
use thiserror::Error;

/// Default visited-set memory budget: 2 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 2 * 1024 * 1024 * 1024;

/// Statistics reported by every search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchStats {
    /// Distinct states (reachability) or search nodes (plan search)
    /// discovered within the horizon.
    pub reachable_count: u64,
    /// Entries actually expanded.
    pub expanded_count: u64,
    /// Peak size of the open frontier.
    pub peak_open_size: u64,
    /// Estimated peak memory of the search structures, in bytes.
    pub peak_memory_estimate: u64,
    /// Wall-clock time of the search, seconds.
    pub wall_time: f64,
}

impl SearchStats {
    fn new() -> SearchStats {
        SearchStats {
            reachable_count: 0,
            expanded_count: 0,
            peak_open_size: 0,
            peak_memory_estimate: 0,
            wall_time: 0.0,
        }
    }
}

/// Search configuration.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Worker threads for frontier expansion. Results are bit-identical for
    /// any worker count; 1 is the reference mode.
    pub workers: usize,
    /// When set, the visited set stores state signatures instead of full
    /// (state, tick) keys, trading an accepted collision risk for memory.
    pub compaction: Option<SignatureMode>,
    /// Abort threshold for the estimated search memory.
    pub memory_cap_bytes: u64,
}

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions {
            workers: 1,
            compaction: None,
            memory_cap_bytes: DEFAULT_MEMORY_CAP,
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("memory budget exceeded after {} entries", .stats.reachable_count)]
    MemoryBudget { stats: SearchStats },
    #[error("action {action} produced a negative step cost")]
    NegativeCost { action: ActionId },
    #[error(transparent)]
    Corrupted(#[from] DecodeError),
}

impl From<ExpandError> for SearchError {
    fn from(e: ExpandError) -> SearchError {
        match e {
            ExpandError::Corrupted(d) => SearchError::Corrupted(d),
            ExpandError::NegativeCost { action } => SearchError::NegativeCost { action },
        }
    }
}

/// Result of an optimal plan search.
#[derive(Debug)]
pub struct PlanOutcome {
    /// A minimum-cost admissible solution, or `None` when no goal is
    /// reachable within the horizon.
    pub plan: Option<Trajectory>,
    pub cost: Option<Cost>,
    pub stats: SearchStats,
}

/// Visited set: either exact (state, tick) keys or compacted signatures.
enum Visited {
    Exact(HashSet<(u64, u32)>),
    Compact(SignatureMode, HashSet<u64>),
}

impl Visited {
    fn new(compaction: Option<SignatureMode>) -> Visited {
        match compaction {
            None => Visited::Exact(HashSet::new()),
            Some(mode) => Visited::Compact(mode, HashSet::new()),
        }
    }

    fn insert(&mut self, state: PackedState, tick: u32) -> bool {
        match self {
            Visited::Exact(set) => set.insert((state.0, tick)),
            Visited::Compact(mode, set) => set.insert(mode.node_key(state, tick)),
        }
    }

    fn len(&self) -> u64 {
        match self {
            Visited::Exact(set) => set.len() as u64,
            Visited::Compact(_, set) => set.len() as u64,
        }
    }

    /// Payload bytes per entry: the full 12-byte (state, tick) key when
    /// exact, the signature width when compacted.
    fn entry_payload_bytes(&self) -> u64 {
        match self {
            Visited::Exact(_) => 12,
            Visited::Compact(mode, _) => mode.entry_bytes(),
        }
    }

    fn bytes(&self) -> u64 {
        // Payload plus a flat per-entry bookkeeping allowance for the table.
        self.len() * (self.entry_payload_bytes() + 8)
    }
}

/// Back-pointer record for plan reconstruction.
#[derive(Clone, Copy)]
struct NodeRec {
    parent: u32,
    bundle: BundleKey,
}

const NO_PARENT: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct FrontierEntry {
    state: PackedState,
    node: u32,
    g: i64,
}

/// Candidate successor produced during layer expansion.
#[derive(Clone, Copy)]
struct TickCand {
    succ: u64,
    g: i64,
    bundle: BundleKey,
    parent_packed: u64,
    parent_node: u32,
    violation: bool,
}

/// Candidate goal reached by an instantaneous chain within the parent layer.
#[derive(Clone, Copy)]
struct ChainGoalCand {
    state: u64,
    g: i64,
    bundle: BundleKey,
    parent_packed: u64,
    parent_node: u32,
}

struct GoalBest {
    g: i64,
    tick: u32,
    node: u32,
}

/// Optimal plan search over the implicit graph: uniform-cost by durative
/// layers, deterministic tie-breaking, optional hash compaction.
pub fn plan_optimal<D: Domain + ?Sized>(
    problem: &PlanningProblem<'_, D>,
    options: &SearchOptions,
) -> Result<PlanOutcome, SearchError> {
    let start = Instant::now();
    let domain = problem.domain;
    let root = domain.initial_state();

    let mut stats = SearchStats::new();
    let mut arena: Vec<NodeRec> = vec![NodeRec {
        parent: NO_PARENT,
        bundle: 0,
    }];
    let mut visited = Visited::new(options.compaction);
    visited.insert(root, 0);

    if domain.is_goal(root) {
        stats.reachable_count = 1;
        stats.wall_time = start.elapsed().as_secs_f64();
        return Ok(PlanOutcome {
            plan: Some(Trajectory::empty(root)),
            cost: Some(Cost::ZERO),
            stats,
        });
    }

    let mut best: Option<GoalBest> = None;
    let mut best_seq: Vec<ActionId> = Vec::new();
    let mut frontier = if domain.violation(root).is_none() {
        vec![FrontierEntry {
            state: root,
            node: 0,
            g: 0,
        }]
    } else {
        Vec::new()
    };
    stats.peak_open_size = frontier.len() as u64;

    let workers = options.workers.max(1);
    // Tick of the final unexpanded frontier; its instantaneous chains are
    // scanned separately below.
    let mut frontier_tick = problem.horizon;
    for tick in 0..problem.horizon {
        if frontier.is_empty() {
            break;
        }
        if let Some(b) = &best {
            // No future node can cost less than the cheapest frontier entry,
            // and deeper goals lose ties on the time index.
            let frontier_min = frontier.iter().map(|f| f.g).min().unwrap_or(i64::MAX);
            if b.g <= frontier_min {
                frontier_tick = tick;
                break;
            }
        }

        let (mut cands, chain_goals) = expand_layer(domain, &frontier, tick, workers, true)?;
        stats.expanded_count += frontier.len() as u64;

        // Deterministic merge: keep the best candidate per successor under
        // (cost, action-sequence, parent-state) order, independent of worker
        // scheduling.
        cands.sort_unstable_by_key(|c| (c.succ, c.g, c.bundle, c.parent_packed));
        let mut next = Vec::new();
        let mut last_succ: Option<u64> = None;
        for cand in &cands {
            if last_succ == Some(cand.succ) {
                continue;
            }
            last_succ = Some(cand.succ);
            let succ = PackedState(cand.succ);
            if !visited.insert(succ, tick + 1) {
                continue;
            }
            if cand.violation {
                continue;
            }
            let node = push_node(&mut arena, cand.parent_node, cand.bundle);
            if domain.is_goal(succ) {
                offer_goal(&arena, &mut best, &mut best_seq, cand.g, tick + 1, node);
            } else {
                next.push(FrontierEntry {
                    state: succ,
                    node,
                    g: cand.g,
                });
            }
        }

        let mut chain_goals = chain_goals;
        chain_goals.sort_unstable_by_key(|c| (c.g, c.bundle, c.parent_packed, c.state));
        for cg in &chain_goals {
            let node = push_node(&mut arena, cg.parent_node, cg.bundle);
            offer_goal(&arena, &mut best, &mut best_seq, cg.g, tick, node);
        }

        stats.peak_open_size = stats.peak_open_size.max(next.len() as u64);
        stats.reachable_count = visited.len();
        let estimate = arena.len() as u64 * 8
            + visited.bytes()
            + (frontier.len() + next.len()) as u64 * 24
            + cands.len() as u64 * 40;
        stats.peak_memory_estimate = stats.peak_memory_estimate.max(estimate);
        if estimate > options.memory_cap_bytes {
            stats.wall_time = start.elapsed().as_secs_f64();
            return Err(SearchError::MemoryBudget { stats });
        }
        frontier = next;
    }

    // Trailing instantaneous chains from the final frontier can still reach
    // a goal without spending another tick.
    if !frontier.is_empty() {
        let (_, chain_goals) = expand_layer(domain, &frontier, frontier_tick, workers, false)?;
        let mut chain_goals = chain_goals;
        chain_goals.sort_unstable_by_key(|c| (c.g, c.bundle, c.parent_packed, c.state));
        for cg in &chain_goals {
            let node = push_node(&mut arena, cg.parent_node, cg.bundle);
            offer_goal(&arena, &mut best, &mut best_seq, cg.g, frontier_tick, node);
        }
    }

    stats.reachable_count = visited.len();
    stats.wall_time = start.elapsed().as_secs_f64();
    match best {
        Some(b) => {
            let plan = reconstruct(domain, root, &arena, b.node);
            Ok(PlanOutcome {
                plan: Some(plan),
                cost: Some(Cost(b.g)),
                stats,
            })
        }
        None => Ok(PlanOutcome {
            plan: None,
            cost: None,
            stats,
        }),
    }
}

/// [`plan_optimal`] with the visited set compacted to 64-bit signatures.
pub fn plan_optimal_compacted<D: Domain + ?Sized>(
    problem: &PlanningProblem<'_, D>,
    options: &SearchOptions,
) -> Result<PlanOutcome, SearchError> {
    let mut options = options.clone();
    options.compaction = Some(options.compaction.unwrap_or(SignatureMode::Full64));
    plan_optimal(problem, &options)
}

fn push_node(arena: &mut Vec<NodeRec>, parent: u32, bundle: BundleKey) -> u32 {
    let idx = arena.len() as u32;
    arena.push(NodeRec { parent, bundle });
    idx
}

/// Records a goal candidate if it beats the current best under
/// (cost, tick, action-sequence) order.
fn offer_goal(
    arena: &[NodeRec],
    best: &mut Option<GoalBest>,
    best_seq: &mut Vec<ActionId>,
    g: i64,
    tick: u32,
    node: u32,
) {
    let replace = match best {
        None => true,
        Some(b) => {
            if (g, tick) != (b.g, b.tick) {
                (g, tick) < (b.g, b.tick)
            } else {
                action_sequence(arena, node) < *best_seq
            }
        }
    };
    if replace {
        *best_seq = action_sequence(arena, node);
        *best = Some(GoalBest { g, tick, node });
    }
}

fn action_sequence(arena: &[NodeRec], node: u32) -> Vec<ActionId> {
    let mut bundles = Vec::new();
    let mut cur = node;
    while cur != 0 {
        let rec = arena[cur as usize];
        bundles.push(rec.bundle);
        cur = rec.parent;
    }
    bundles.reverse();
    bundles.into_iter().flat_map(decode_bundle).collect()
}

fn reconstruct<D: Domain + ?Sized>(
    domain: &D,
    root: PackedState,
    arena: &[NodeRec],
    node: u32,
) -> Trajectory {
    let actions = action_sequence(arena, node);
    let mut steps = Vec::with_capacity(actions.len());
    let mut cur = root;
    for action in actions {
        let outcomes = domain
            .successors(cur)
            .expect("reconstruction replays previously expanded states");
        let outcome = outcomes
            .into_iter()
            .find(|o| o.action == action)
            .expect("recorded action is enabled on replay");
        steps.push((cur, action));
        cur = outcome.successor;
    }
    Trajectory {
        steps,
        final_state: cur,
    }
}

/// Expands one layer, in parallel when `workers > 1`. Candidate vectors are
/// concatenated in chunk order so the merge input is schedule-independent.
fn expand_layer<D: Domain + ?Sized>(
    domain: &D,
    frontier: &[FrontierEntry],
    tick: u32,
    workers: usize,
    durative: bool,
) -> Result<(Vec<TickCand>, Vec<ChainGoalCand>), SearchError> {
    let expand_chunk = |chunk: &[FrontierEntry]| -> Result<(Vec<TickCand>, Vec<ChainGoalCand>), SearchError> {
        let mut ticks = Vec::new();
        let mut goals = Vec::new();
        for entry in chunk {
            expand_tick(domain, entry.state, tick, true, durative, &mut |event| {
                match event {
                    BundleEvent::Tick {
                        bundle,
                        successor,
                        cost,
                        violation,
                    } => ticks.push(TickCand {
                        succ: successor.0,
                        g: entry.g + cost.0,
                        bundle,
                        parent_packed: entry.state.0,
                        parent_node: entry.node,
                        violation,
                    }),
                    BundleEvent::GoalChain {
                        bundle,
                        state,
                        cost,
                    } => goals.push(ChainGoalCand {
                        state: state.0,
                        g: entry.g + cost.0,
                        bundle,
                        parent_packed: entry.state.0,
                        parent_node: entry.node,
                    }),
                    BundleEvent::ChainState { .. } => {}
                }
            })?;
        }
        Ok((ticks, goals))
    };

    if workers <= 1 || frontier.len() < 2 * workers {
        return expand_chunk(frontier);
    }

    let chunk_size = frontier.len().div_ceil(workers);
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = frontier
            .chunks(chunk_size)
            .map(|chunk| scope.spawn(move || expand_chunk(chunk)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search worker panicked"))
            .collect::<Vec<_>>()
    });

    let mut ticks = Vec::new();
    let mut goals = Vec::new();
    for result in results {
        let (t, g) = result?;
        ticks.extend(t);
        goals.extend(g);
    }
    Ok((ticks, goals))
}

/// Breadth-first enumeration of the states reachable from the initial state
/// within `horizon` durative ticks. States that violate an invariant are
/// counted but not expanded; goal states are expanded like any other.
pub fn reachable<D: Domain + ?Sized>(
    domain: &D,
    horizon: u32,
    options: &SearchOptions,
) -> Result<SearchStats, SearchError> {
    let start = Instant::now();
    let mut stats = SearchStats::new();
    let root = domain.initial_state();

    let mut seen: HashSet<u64> = HashSet::new();
    let mut expanded: HashSet<u64> = HashSet::new();
    seen.insert(root.0);

    let mut frontier: Vec<PackedState> = if domain.violation(root).is_none() {
        expanded.insert(root.0);
        vec![root]
    } else {
        Vec::new()
    };
    stats.peak_open_size = frontier.len() as u64;

    for tick in 0..=horizon {
        if frontier.is_empty() {
            break;
        }
        let durative = tick < horizon;
        let mut next: Vec<PackedState> = Vec::new();
        for &state in &frontier {
            stats.expanded_count += 1;
            expand_tick(domain, state, tick, false, durative, &mut |event| {
                match event {
                    BundleEvent::ChainState { state, .. } => {
                        seen.insert(state.0);
                    }
                    BundleEvent::Tick {
                        successor,
                        violation,
                        ..
                    } => {
                        seen.insert(successor.0);
                        if !violation && expanded.insert(successor.0) {
                            next.push(successor);
                        }
                    }
                    BundleEvent::GoalChain { .. } => {}
                }
            })?;
        }
        stats.peak_open_size = stats.peak_open_size.max(next.len() as u64);
        stats.reachable_count = seen.len() as u64;
        let estimate =
            (seen.len() + expanded.len()) as u64 * 16 + (frontier.len() + next.len()) as u64 * 8;
        stats.peak_memory_estimate = stats.peak_memory_estimate.max(estimate);
        if estimate > options.memory_cap_bytes {
            stats.wall_time = start.elapsed().as_secs_f64();
            return Err(SearchError::MemoryBudget { stats });
        }
        frontier = next;
    }

    stats.reachable_count = seen.len() as u64;
    stats.wall_time = start.elapsed().as_secs_f64();
    Ok(stats)
}
