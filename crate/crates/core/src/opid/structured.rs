//! Replay of translated nets following the constructive runs: emit every log object, create the
//! links, replay the events with silent steps in between, then consume everything again.

use std::collections::{BTreeMap, BTreeSet};

use super::semantics::{enumerate_bindings, extend_binding, fire_idx, OpidBinding, OpidMarking, Scope, Value};
use super::{NetKind, Opid, PlaceRole, TransitionRole};
use crate::model::{ObjectId, ObjectType, Token, TypePair, VarKind};
use crate::ocel::{CoOccurrence, Ocel};
use crate::relations::{link_partners, pair_violations};
use crate::replay::{
    layered_search, FailureReason, FiredStep, ReplayResult, SearchOutcome, Stepper, Successor, DEFAULT_BUDGET,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructuredError {
    #[error("net has no emitting and consuming transitions")]
    NotT1Net,
    #[error("net carries link machinery, which this replay does not handle")]
    UnexpectedLinks,
}

/// Replays a net produced by the identifier mapping alone.
pub fn replay_t1(net: &Opid, log: &Ocel) -> Result<ReplayResult<OpidBinding>, StructuredError> {
    match net.kind() {
        NetKind::T1 => replay_structured(net, log, DEFAULT_BUDGET),
        NetKind::Tr => Err(StructuredError::UnexpectedLinks),
        NetKind::Plain => Err(StructuredError::NotT1Net),
    }
}

/// Replays a net carrying link machinery; a net without relationships replays as with
/// [`replay_t1`].
pub fn replay_tr(net: &Opid, log: &Ocel) -> Result<ReplayResult<OpidBinding>, StructuredError> {
    replay_structured(net, log, DEFAULT_BUDGET)
}

struct Stage<'a> {
    net: &'a Opid,
    log: &'a Ocel,
    silent: Vec<usize>,
    consume: BTreeMap<ObjectType, usize>,
}

type Steps = Vec<FiredStep<OpidBinding>>;

/// Seeds every variable of `ti` whose base type is `ty`: lists get `objs`, single-object
/// variables get the only element when there is exactly one.
fn seed_type(net: &Opid, ti: usize, ty: &ObjectType, objs: &[ObjectId], seed: &mut OpidBinding) {
    let vars = net.pre_of(ti).iter().chain(net.post_of(ti)).flat_map(|(_, i)| i.vars());
    for v in vars.filter(|v| v.base_type() == ty) {
        match v.kind() {
            VarKind::List if !objs.is_empty() => seed.insert(v.clone(), Value::List(objs.to_vec())),
            VarKind::Normal | VarKind::Fresh if objs.len() == 1 => seed.insert(v.clone(), Value::One(objs[0].clone())),
            _ => {}
        }
    }
}

impl Stage<'_> {
    /// Fires `ti` with the first enabled binding extending `seed`.
    fn fire_seeded(&self, m: &mut OpidMarking, ti: usize, seed: &OpidBinding, steps: &mut Steps) -> bool {
        let pool = seed
            .0
            .iter()
            .filter(|(v, _)| v.kind() == VarKind::Fresh)
            .flat_map(|(_, val)| val.objects().iter().cloned())
            .fold(BTreeMap::<ObjectType, Vec<ObjectId>>::new(), |mut acc, o| {
                acc.entry(o.object_type().clone()).or_default().push(o);
                acc
            });
        let scope = Scope { allowed: None, fresh: &pool };
        let Some(beta) = enumerate_bindings(self.net, m, ti, seed, &scope).into_iter().next() else {
            return false;
        };
        *m = fire_idx(self.net, m, ti, &beta);
        steps.push(FiredStep { transition: self.net.transitions()[ti].id.clone(), binding: beta, event: None });
        true
    }

    fn fire_for_object(&self, m: &mut OpidMarking, ti: usize, o: &ObjectId, steps: &mut Steps) -> bool {
        let mut seed = OpidBinding::default();
        seed_type(self.net, ti, o.object_type(), std::slice::from_ref(o), &mut seed);
        self.fire_seeded(m, ti, &seed, steps)
    }

    /// Consumes every log object; `Some` iff the marking ends up empty.
    fn epilogue(&self, m: &OpidMarking) -> Option<Steps> {
        let mut m = m.clone();
        let mut steps = Vec::new();
        for o in self.log.objects() {
            let ti = *self.consume.get(o.object_type())?;
            if !self.fire_for_object(&mut m, ti, o, &mut steps) {
                return None;
            }
        }
        m.is_empty().then_some(steps)
    }
}

impl Stepper for Stage<'_> {
    type Marking = OpidMarking;
    type Binding = OpidBinding;

    fn silent_successors(&self, m: &OpidMarking) -> Vec<Successor<OpidMarking, OpidBinding>> {
        let pool = BTreeMap::new();
        let scope = Scope { allowed: None, fresh: &pool };
        let mut out = Vec::new();
        for &ti in &self.silent {
            for beta in enumerate_bindings(self.net, m, ti, &OpidBinding::default(), &scope) {
                out.push(Successor {
                    transition: self.net.transitions()[ti].id.clone(),
                    marking: fire_idx(self.net, m, ti, &beta),
                    binding: beta,
                });
            }
        }
        out
    }

    fn event_successors(
        &self,
        m: &OpidMarking,
        event: usize,
    ) -> Result<Vec<Successor<OpidMarking, OpidBinding>>, FailureReason> {
        let e = &self.log.events()[event];
        let candidates: Vec<usize> = (0..self.net.transitions().len())
            .filter(|&i| self.net.transitions()[i].label.as_deref() == Some(e.activity.as_str()))
            .collect();
        if candidates.is_empty() {
            return Err(FailureReason::UnknownActivity { activity: e.activity.clone() });
        }
        let mut by_type: BTreeMap<&ObjectType, Vec<ObjectId>> = BTreeMap::new();
        for o in &e.objects {
            by_type.entry(o.object_type()).or_default().push(o.clone());
        }
        let pool = BTreeMap::new();
        let scope = Scope { allowed: Some(&e.objects), fresh: &pool };
        let mut out = Vec::new();
        for ti in candidates {
            let mut seed = OpidBinding::default();
            for (ty, objs) in &by_type {
                seed_type(self.net, ti, ty, objs, &mut seed);
            }
            for beta in enumerate_bindings(self.net, m, ti, &seed, &scope) {
                if beta.codomain() != e.objects {
                    continue;
                }
                out.push(Successor {
                    transition: self.net.transitions()[ti].id.clone(),
                    marking: fire_idx(self.net, m, ti, &beta),
                    binding: beta,
                });
            }
        }
        Ok(out)
    }

    fn is_final(&self, m: &OpidMarking) -> bool {
        self.epilogue(m).is_some()
    }
}

/// Replays `log` on a translated net. Links are inferred from object co-occurrence; if some
/// relationship of the net does not hold in the log, the replay is rejected with the offending
/// objects.
pub fn replay_structured(net: &Opid, log: &Ocel, budget: usize) -> Result<ReplayResult<OpidBinding>, StructuredError> {
    if net.kind() == NetKind::Plain {
        return Err(StructuredError::NotT1Net);
    }
    let role_map = |f: fn(&TransitionRole) -> Option<&ObjectType>| -> BTreeMap<ObjectType, usize> {
        net.transitions().iter().enumerate().filter_map(|(i, t)| f(&t.role).map(|ty| (ty.clone(), i))).collect()
    };
    let emit = role_map(|r| if let TransitionRole::Emit { ty } = r { Some(ty) } else { None });
    let consume = role_map(|r| if let TransitionRole::Consume { ty } = r { Some(ty) } else { None });
    let pre_emit = role_map(|r| if let TransitionRole::PreEmit { ty } = r { Some(ty) } else { None });

    if let Some(o) = log.objects().find(|o| !emit.contains_key(o.object_type()) || !consume.contains_key(o.object_type())) {
        return Ok(ReplayResult::reject(None, FailureReason::UnknownObjectType { object: o.id().to_string() }, 0));
    }

    let pairs = net.relationships();
    let co = CoOccurrence::new(log);
    let violations: Vec<_> = pairs.iter().flat_map(|p| pair_violations(log, &co, p)).collect();
    if !violations.is_empty() {
        return Ok(ReplayResult::reject(None, FailureReason::LinkInferenceFailed { violations }, 0));
    }

    let stage = Stage {
        net,
        log,
        silent: (0..net.transitions().len())
            .filter(|&i| net.transitions()[i].is_silent() && net.transitions()[i].role == TransitionRole::Core)
            .collect(),
        consume,
    };
    let mut m = OpidMarking::new();
    let mut prologue = Vec::new();
    let stuck = |steps| ReplayResult::<OpidBinding>::reject(None, FailureReason::NoEnabledBinding, steps);

    for o in log.objects() {
        if let Some(&ti) = pre_emit.get(o.object_type()) {
            if !stage.fire_for_object(&mut m, ti, o, &mut prologue) {
                return Ok(stuck(prologue.len()));
            }
        }
    }
    for pair in &pairs {
        let Some(ti) = net.transition_with_role(&TransitionRole::Link { pair: pair.clone() }) else { continue };
        for (one, many) in link_partners(log, &co, pair) {
            let mut seed = OpidBinding::default();
            seed_type(net, ti, &pair.many, &many, &mut seed);
            seed_type(net, ti, &pair.one, std::slice::from_ref(&one), &mut seed);
            if !stage.fire_seeded(&mut m, ti, &seed, &mut prologue) {
                return Ok(stuck(prologue.len()));
            }
        }
    }
    for o in log.objects() {
        if !stage.fire_for_object(&mut m, emit[o.object_type()], o, &mut prologue) {
            return Ok(stuck(prologue.len()));
        }
    }

    Ok(match layered_search(&stage, m, log.events().len(), budget) {
        SearchOutcome::Accepted { marking, trace, states } => {
            let epilogue = stage.epilogue(&marking).expect("final marking admits the epilogue");
            let mut full = prologue;
            full.extend(trace);
            full.extend(epilogue);
            ReplayResult::accept(full, states)
        }
        SearchOutcome::Rejected { event_index, reason, states } => ReplayResult::reject(event_index, reason, states),
    })
}

/// Tokens written to each link place by the link transitions of an accepted run.
pub fn created_links(net: &Opid, result: &ReplayResult<OpidBinding>) -> BTreeMap<TypePair, BTreeSet<Token>> {
    let mut out: BTreeMap<TypePair, BTreeSet<Token>> = BTreeMap::new();
    for step in &result.trace {
        let Some(ti) = net.transition_idx(&step.transition) else { continue };
        if !matches!(net.transitions()[ti].role, TransitionRole::Link { .. }) {
            continue;
        }
        for (p, ins) in net.post_of(ti) {
            if let PlaceRole::LinkPlace { pair } = &net.places()[*p].role {
                if let Ok(tokens) = extend_binding(&step.binding, ins) {
                    out.entry(pair.clone()).or_default().extend(tokens);
                }
            }
        }
    }
    out
}
