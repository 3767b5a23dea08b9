use std::collections::BTreeMap;

use super::{apply, Ocpn, OcpnBinding, OcpnMarking};
use crate::model::{ObjectId, ObjectType};
use crate::ocel::Ocel;
use crate::replay::{
    layered_search, FailureReason, ReplayResult, SearchOutcome, Stepper, Successor, DEFAULT_BUDGET,
};

struct OcpnStepper<'a> {
    net: &'a Ocpn,
    log: &'a Ocel,
    universe: BTreeMap<ObjectType, Vec<ObjectId>>,
    silent: Vec<usize>,
    final_marking: OcpnMarking,
}

impl Stepper for OcpnStepper<'_> {
    type Marking = OcpnMarking;
    type Binding = OcpnBinding;

    fn silent_successors(&self, m: &OcpnMarking) -> Vec<Successor<OcpnMarking, OcpnBinding>> {
        let mut out = Vec::new();
        for &ti in &self.silent {
            for b in self.net.enabled_bindings(ti, m, &self.universe) {
                let (cons, prod) = self.net.cons_prod_unchecked(ti, &b);
                out.push(Successor {
                    transition: self.net.transitions[ti].id.clone(),
                    binding: b,
                    marking: apply(m, &cons, &prod),
                });
            }
        }
        out
    }

    fn event_successors(
        &self,
        m: &OcpnMarking,
        event: usize,
    ) -> Result<Vec<Successor<OcpnMarking, OcpnBinding>>, FailureReason> {
        let e = &self.log.events()[event];
        let candidates: Vec<usize> = (0..self.net.transitions.len())
            .filter(|&i| self.net.transitions[i].label.as_deref() == Some(e.activity.as_str()))
            .collect();
        if candidates.is_empty() {
            return Err(FailureReason::UnknownActivity { activity: e.activity.clone() });
        }
        let b = OcpnBinding::from_objects(&e.objects);
        let mut out = Vec::new();
        for ti in candidates {
            let t = &self.net.transitions[ti];
            if self.net.check_binding(&t.id, &b).is_err() {
                continue;
            }
            let (cons, prod) = self.net.cons_prod_unchecked(ti, &b);
            if cons.is_subset(&m.0) {
                out.push(Successor { transition: t.id.clone(), binding: b.clone(), marking: apply(m, &cons, &prod) });
            }
        }
        Ok(out)
    }

    fn is_final(&self, m: &OcpnMarking) -> bool {
        m == &self.final_marking
    }
}

/// Replays `log` on `net` with the default state budget.
pub fn replay(net: &Ocpn, log: &Ocel) -> ReplayResult<OcpnBinding> {
    replay_with_budget(net, log, DEFAULT_BUDGET)
}

/// Decides whether the events of `log`, in order and interleaved with silent firings, form a run
/// from the initial to the final marking over all objects of the log.
pub fn replay_with_budget(net: &Ocpn, log: &Ocel, budget: usize) -> ReplayResult<OcpnBinding> {
    let objects: Vec<&ObjectId> = log.objects().collect();
    let (init, final_marking) = match (net.initial_marking(objects.iter().copied()), net.final_marking(objects.iter().copied())) {
        (Ok(i), Ok(f)) => (i, f),
        (Err(e), _) | (_, Err(e)) => {
            let object = match e {
                super::OcpnError::UnknownType { object, .. } => object,
                other => other.to_string(),
            };
            return ReplayResult::reject(None, FailureReason::UnknownObjectType { object }, 0);
        }
    };
    let mut universe: BTreeMap<ObjectType, Vec<ObjectId>> = BTreeMap::new();
    for o in objects {
        universe.entry(o.object_type().clone()).or_default().push(o.clone());
    }
    let stepper = OcpnStepper {
        net,
        log,
        universe,
        silent: (0..net.transitions.len()).filter(|&i| net.transitions[i].is_silent()).collect(),
        final_marking,
    };
    match layered_search(&stepper, init, log.events().len(), budget) {
        SearchOutcome::Accepted { trace, states, .. } => ReplayResult::accept(trace, states),
        SearchOutcome::Rejected { event_index, reason, states } => ReplayResult::reject(event_index, reason, states),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocel::{parse_ocel, OcelFormat};
    use crate::ocpn::tests::bike_net;
    use crate::ocpn::{FlowSpec, OcpnPlace, OcpnTransition};

    fn l1() -> Ocel {
        parse_ocel(include_bytes!("../../fixtures/l1.json"), OcelFormat::Native).unwrap()
    }

    fn l2() -> Ocel {
        parse_ocel(include_bytes!("../../fixtures/l2.json"), OcelFormat::Native).unwrap()
    }

    #[test]
    fn bike_net_accepts_l1_and_l2() {
        let net = bike_net();
        let r1 = replay(&net, &l1());
        assert!(r1.accepted, "{:?}", r1.failure);
        assert!(r1.failure.is_none());
        let r2 = replay(&net, &l2());
        assert!(r2.accepted, "{:?}", r2.failure);
    }

    #[test]
    fn trace_contains_every_event_in_order() {
        let r = replay(&bike_net(), &l1());
        let events: Vec<usize> = r.trace.iter().filter_map(|s| s.event).collect();
        assert_eq!(events, vec![0, 1, 2, 3, 4, 5]);
        // One silent loop per frame, moving it back from stop for assembling.
        assert_eq!(r.trace.iter().filter(|s| s.event.is_none()).count(), 2);
    }

    #[test]
    fn dropping_last_event_strands_wheels() {
        let log = l1();
        let n = log.events().len();
        let truncated = log.filter_events(|i, _| i + 1 < n);
        let r = replay(&bike_net(), &truncated);
        assert!(!r.accepted);
        assert_eq!(r.reason(), Some(&FailureReason::FinalMarkingNotReached));
    }

    #[test]
    fn unknown_activity_is_reported() {
        let log = Ocel::from_sequence(
            ["Frame".into()],
            [ObjectId::new("f1", "Frame".into())],
            &[("paint", &["f1"])],
        )
        .unwrap();
        let r = replay(&bike_net(), &log);
        assert_eq!(r.reason(), Some(&FailureReason::UnknownActivity { activity: "paint".into() }));
        assert_eq!(r.failure.unwrap().event_index, Some(0));
    }

    #[test]
    fn object_of_unknown_type_is_rejected() {
        let log = Ocel::from_sequence(["Seat".into()], [ObjectId::new("s1", "Seat".into())], &[]).unwrap();
        let r = replay(&bike_net(), &log);
        assert!(matches!(r.reason(), Some(FailureReason::UnknownObjectType { .. })));
    }

    #[test]
    fn empty_log_is_accepted() {
        let log = Ocel::from_sequence([], [], &[]).unwrap();
        assert!(replay(&bike_net(), &log).accepted);
    }

    #[test]
    fn budget_is_reported() {
        let r = replay_with_budget(&bike_net(), &l1(), 3);
        assert!(r.budget_exhausted());
    }

    #[test]
    fn same_type_pre_places_consume_the_same_object() {
        // split produces the object on two places; join needs it on both.
        let p = |id: &str, play, stop| OcpnPlace { id: id.into(), ty: "A".into(), play, stop };
        let t = |id: &str| OcpnTransition { id: id.into(), label: Some(id.into()) };
        let f = |a: &str, b: &str| FlowSpec { from: a.into(), to: b.into(), variable: false };
        let net = Ocpn::new(
            vec!["A".into()],
            vec![p("i", true, false), p("l", false, false), p("r", false, false), p("o", false, true)],
            vec![t("split"), t("join")],
            vec![f("i", "split"), f("split", "l"), f("split", "r"), f("l", "join"), f("r", "join"), f("join", "o")],
        )
        .unwrap();
        let a = |id: &str| ObjectId::new(id, "A".into());
        let ok = Ocel::from_sequence(
            ["A".into()],
            [a("a1"), a("a2")],
            &[("split", &["a1"]), ("split", &["a2"]), ("join", &["a2"]), ("join", &["a1"])],
        )
        .unwrap();
        assert!(replay(&net, &ok).accepted);
        let bad = Ocel::from_sequence(["A".into()], [a("a1")], &[("join", &["a1"]), ("split", &["a1"])]).unwrap();
        let r = replay(&net, &bad);
        assert_eq!(r.reason(), Some(&FailureReason::NoEnabledBinding));
    }
}
