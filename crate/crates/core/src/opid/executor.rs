use std::collections::{BTreeMap, BTreeSet};

use super::semantics::{enumerate_bindings, fire_idx, OpidBinding, OpidMarking, Scope};
use super::Opid;
use crate::model::{ObjectId, ObjectType, VarKind};
use crate::ocel::Ocel;
use crate::replay::{layered_search, FailureReason, ReplayResult, SearchOutcome, Stepper, Successor};

/// Exhaustive search for runs from the empty marking back to the empty marking whose visible
/// firings match a given sequence of activities and object sets.
///
/// Fresh variables only bind objects of a fixed universe, each at most once, and an accepted run
/// must have emitted the whole universe.
pub struct BoundedExecutor<'a> {
    net: &'a Opid,
    universe: BTreeSet<ObjectId>,
    max_states: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct ExecState {
    marking: OpidMarking,
    emitted: BTreeSet<ObjectId>,
}

struct ExecStepper<'a> {
    net: &'a Opid,
    universe: &'a BTreeSet<ObjectId>,
    events: &'a [(String, BTreeSet<ObjectId>)],
    silent: Vec<usize>,
}

impl ExecStepper<'_> {
    fn fresh_pool(&self, s: &ExecState) -> BTreeMap<ObjectType, Vec<ObjectId>> {
        let mut pool: BTreeMap<ObjectType, Vec<ObjectId>> = BTreeMap::new();
        for o in self.universe.difference(&s.emitted) {
            pool.entry(o.object_type().clone()).or_default().push(o.clone());
        }
        pool
    }

    fn successors(
        &self,
        s: &ExecState,
        transitions: &[usize],
        allowed: Option<&BTreeSet<ObjectId>>,
    ) -> Vec<Successor<ExecState, OpidBinding>> {
        let pool = self.fresh_pool(s);
        let scope = Scope { allowed, fresh: &pool };
        let mut out = Vec::new();
        for &ti in transitions {
            let fresh: Vec<_> = self.net.post_of(ti).iter().flat_map(|(_, i)| i.vars()).filter(|v| v.kind() == VarKind::Fresh).cloned().collect();
            for beta in enumerate_bindings(self.net, &s.marking, ti, &OpidBinding::default(), &scope) {
                if let Some(a) = allowed {
                    if &beta.codomain() != a {
                        continue;
                    }
                }
                let mut emitted = s.emitted.clone();
                for v in &fresh {
                    emitted.extend(beta.get(v).into_iter().flat_map(|val| val.objects().iter().cloned()));
                }
                out.push(Successor {
                    transition: self.net.transitions()[ti].id.clone(),
                    marking: ExecState { marking: fire_idx(self.net, &s.marking, ti, &beta), emitted },
                    binding: beta,
                });
            }
        }
        out
    }
}

impl Stepper for ExecStepper<'_> {
    type Marking = ExecState;
    type Binding = OpidBinding;

    fn silent_successors(&self, s: &ExecState) -> Vec<Successor<ExecState, OpidBinding>> {
        self.successors(s, &self.silent, None)
    }

    fn event_successors(
        &self,
        s: &ExecState,
        event: usize,
    ) -> Result<Vec<Successor<ExecState, OpidBinding>>, FailureReason> {
        let (activity, objects) = &self.events[event];
        let candidates: Vec<usize> = (0..self.net.transitions().len())
            .filter(|&i| self.net.transitions()[i].label.as_deref() == Some(activity.as_str()))
            .collect();
        if candidates.is_empty() {
            return Err(FailureReason::UnknownActivity { activity: activity.clone() });
        }
        Ok(self.successors(s, &candidates, Some(objects)))
    }

    fn is_final(&self, s: &ExecState) -> bool {
        s.marking.is_empty() && s.emitted.len() == self.universe.len()
    }
}

impl<'a> BoundedExecutor<'a> {
    pub fn new(net: &'a Opid, universe: impl IntoIterator<Item = ObjectId>, max_states: usize) -> Self {
        BoundedExecutor { net, universe: universe.into_iter().collect(), max_states }
    }

    /// Searches for an accepted run with the given visible sequence. The witness trace lists
    /// every firing, silent ones included.
    pub fn accepts(&self, events: &[(String, BTreeSet<ObjectId>)]) -> ReplayResult<OpidBinding> {
        let stepper = ExecStepper {
            net: self.net,
            universe: &self.universe,
            events,
            silent: (0..self.net.transitions().len()).filter(|&i| self.net.transitions()[i].is_silent()).collect(),
        };
        let init = ExecState { marking: OpidMarking::new(), emitted: BTreeSet::new() };
        match layered_search(&stepper, init, events.len(), self.max_states) {
            SearchOutcome::Accepted { trace, states, .. } => ReplayResult::accept(trace, states),
            SearchOutcome::Rejected { event_index, reason, states } => ReplayResult::reject(event_index, reason, states),
        }
    }

    /// Runs [`accepts`](Self::accepts) on the event sequence of `log`.
    pub fn accepts_log(&self, log: &Ocel) -> ReplayResult<OpidBinding> {
        let events: Vec<(String, BTreeSet<ObjectId>)> =
            log.events().iter().map(|e| (e.activity.clone(), e.objects.clone())).collect();
        self.accepts(&events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocel::{parse_ocel, OcelFormat};
    use crate::ocpn::tests::bike_net;
    use crate::transform::t1;

    #[test]
    fn empty_run_is_accepted() {
        let net = t1(&bike_net()).unwrap();
        let r = BoundedExecutor::new(&net, [], 1000).accepts(&[]);
        assert!(r.accepted);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn lowered_bike_accepts_l1() {
        let net = t1(&bike_net()).unwrap();
        let log = parse_ocel(include_bytes!("../../fixtures/l1.json"), OcelFormat::Native).unwrap();
        let r = BoundedExecutor::new(&net, log.objects().cloned(), 1_000_000).accepts_log(&log);
        assert!(r.accepted, "{:?}", r.failure);
        // Each object is emitted exactly once.
        let emits = r.trace.iter().filter(|s| s.transition.as_str().starts_with("emit__")).count();
        assert_eq!(emits, 8);
    }

    #[test]
    fn unemitted_universe_object_blocks_acceptance() {
        let net = t1(&bike_net()).unwrap();
        let stray = ObjectId::new("zz", "Frame".into());
        // The frame can never reach the stop place without an event.
        let r = BoundedExecutor::new(&net, [stray], 10_000).accepts(&[]);
        assert!(!r.accepted);
    }
}
