//! Replay outcomes and the layered breadth-first search shared by the replay engines.

use std::fmt;
use std::hash::Hash;

use indexmap::IndexSet;
use serde::Serialize;

use crate::model::TransitionId;
use crate::relations::Violation;

/// Default cap on the number of distinct search states visited during one replay.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FailureReason {
    NoEnabledBinding,
    FinalMarkingNotReached,
    UnknownActivity { activity: String },
    /// An object of the log has a type the model has no play/stop place for.
    UnknownObjectType { object: String },
    BudgetExhausted,
    LinkInferenceFailed { violations: Vec<Violation> },
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::NoEnabledBinding => f.write_str("no-enabled-binding"),
            FailureReason::FinalMarkingNotReached => f.write_str("final-marking-not-reached"),
            FailureReason::UnknownActivity { activity } => write!(f, "unknown-activity({activity})"),
            FailureReason::UnknownObjectType { object } => write!(f, "unknown-object-type({object})"),
            FailureReason::BudgetExhausted => f.write_str("budget-exhausted"),
            FailureReason::LinkInferenceFailed { violations } => {
                let objects: Vec<&str> = violations.iter().map(|v| v.object.id()).collect();
                write!(f, "link-inference-failed({})", objects.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayFailure {
    /// Index of the event at which replay got stuck, if the failure is tied to one.
    pub event_index: Option<usize>,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiredStep<B> {
    pub transition: TransitionId,
    pub binding: B,
    /// Index of the replayed event, `None` for silent and structural firings.
    pub event: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayResult<B> {
    pub accepted: bool,
    pub failure: Option<ReplayFailure>,
    pub trace: Vec<FiredStep<B>>,
    pub states_visited: usize,
}

impl<B> ReplayResult<B> {
    pub fn accept(trace: Vec<FiredStep<B>>, states_visited: usize) -> Self {
        ReplayResult { accepted: true, failure: None, trace, states_visited }
    }

    pub fn reject(event_index: Option<usize>, reason: FailureReason, states_visited: usize) -> Self {
        ReplayResult {
            accepted: false,
            failure: Some(ReplayFailure { event_index, reason }),
            trace: Vec::new(),
            states_visited,
        }
    }

    pub fn budget_exhausted(&self) -> bool {
        matches!(self.failure, Some(ReplayFailure { reason: FailureReason::BudgetExhausted, .. }))
    }

    pub fn reason(&self) -> Option<&FailureReason> {
        self.failure.as_ref().map(|f| &f.reason)
    }
}

/// A successor produced by firing a transition.
pub(crate) struct Successor<M, B> {
    pub transition: TransitionId,
    pub binding: B,
    pub marking: M,
}

pub(crate) type Successors<M, B> = Vec<Successor<M, B>>;

/// What a net needs to expose to be replayed event by event.
pub(crate) trait Stepper {
    type Marking: Clone + Eq + Hash;
    type Binding: Clone;

    fn silent_successors(&self, m: &Self::Marking) -> Vec<Successor<Self::Marking, Self::Binding>>;

    /// Successors replaying event `event`; an error aborts the whole replay at that event.
    fn event_successors(
        &self,
        m: &Self::Marking,
        event: usize,
    ) -> Result<Successors<Self::Marking, Self::Binding>, FailureReason>;

    fn is_final(&self, m: &Self::Marking) -> bool;
}

pub(crate) enum SearchOutcome<M, B> {
    Accepted { marking: M, trace: Vec<FiredStep<B>>, states: usize },
    Rejected { event_index: Option<usize>, reason: FailureReason, states: usize },
}

/// Breadth-first search over the silent closure between consecutive events, memoizing
/// `(events consumed, marking)` states.
pub(crate) fn layered_search<S: Stepper>(
    stepper: &S,
    init: S::Marking,
    events: usize,
    budget: usize,
) -> SearchOutcome<S::Marking, S::Binding> {
    let mut arena: IndexSet<(usize, S::Marking)> = IndexSet::new();
    let mut parents: Vec<Option<(usize, FiredStep<S::Binding>)>> = Vec::new();
    arena.insert((0, init));
    parents.push(None);

    macro_rules! add {
        ($layer:expr, $succ:expr, $parent:expr, $event:expr, $out:expr) => {{
            let s = $succ;
            let (idx, fresh) = arena.insert_full(($layer, s.marking));
            if fresh {
                parents.push(Some((
                    $parent,
                    FiredStep { transition: s.transition, binding: s.binding, event: $event },
                )));
                $out.push(idx);
                if arena.len() > budget {
                    return SearchOutcome::Rejected {
                        event_index: None,
                        reason: FailureReason::BudgetExhausted,
                        states: arena.len(),
                    };
                }
            }
        }};
    }

    let mut frontier = vec![0usize];
    for layer in 0..=events {
        // Silent closure of the current layer.
        let mut queue = frontier.clone();
        let mut head = 0;
        while head < queue.len() {
            let idx = queue[head];
            head += 1;
            let marking = arena[idx].1.clone();
            for succ in stepper.silent_successors(&marking) {
                add!(layer, succ, idx, None, queue);
            }
        }
        frontier = queue;
        if layer == events {
            break;
        }
        let mut next = Vec::new();
        for &idx in &frontier {
            let marking = arena[idx].1.clone();
            match stepper.event_successors(&marking, layer) {
                Err(reason) => {
                    return SearchOutcome::Rejected {
                        event_index: Some(layer),
                        reason,
                        states: arena.len(),
                    }
                }
                Ok(succs) => {
                    for succ in succs {
                        add!(layer + 1, succ, idx, Some(layer), next);
                    }
                }
            }
        }
        if next.is_empty() {
            return SearchOutcome::Rejected {
                event_index: Some(layer),
                reason: FailureReason::NoEnabledBinding,
                states: arena.len(),
            };
        }
        frontier = next;
    }

    let states = arena.len();
    let Some(&goal) = frontier.iter().find(|&&i| stepper.is_final(&arena[i].1)) else {
        return SearchOutcome::Rejected {
            event_index: None,
            reason: FailureReason::FinalMarkingNotReached,
            states,
        };
    };
    let mut trace = Vec::new();
    let mut cur = goal;
    while let Some((parent, step)) = parents[cur].take() {
        trace.push(step);
        cur = parent;
    }
    trace.reverse();
    let marking = arena.swap_remove_index(goal).expect("goal state").1;
    SearchOutcome::Accepted { marking, trace, states }
}

/// All non-empty subsets of `items`, each in input order.
pub(crate) fn nonempty_subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let n = items.len();
    assert!(n < 24, "subset enumeration over {n} items");
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| items[i].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets() {
        let s = nonempty_subsets(&[1, 2, 3]);
        assert_eq!(s.len(), 7);
        assert!(s.contains(&vec![1, 3]));
        assert!(nonempty_subsets::<u8>(&[]).is_empty());
    }
}
