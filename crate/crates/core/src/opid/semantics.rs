//! Bindings, their extension to inscriptions, enabledness and firing.

use std::collections::{BTreeMap, BTreeSet};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::Opid;
use crate::model::{Inscription, ObjectId, ObjectType, PlaceId, Token, TransitionId, VarKind, Variable};
use crate::replay::nonempty_subsets;

/// Value of a variable: one object, or a list for list variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Value {
    One(ObjectId),
    List(Vec<ObjectId>),
}

impl Value {
    pub fn objects(&self) -> &[ObjectId] {
        match self {
            Value::One(o) => std::slice::from_ref(o),
            Value::List(l) => l,
        }
    }
}

/// Assignment of variables to objects or object lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpidBinding(pub BTreeMap<Variable, Value>);

impl OpidBinding {
    pub fn get(&self, v: &Variable) -> Option<&Value> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Variable, value: Value) {
        self.0.insert(v, value);
    }

    pub fn one(mut self, v: Variable, o: ObjectId) -> Self {
        self.0.insert(v, Value::One(o));
        self
    }

    pub fn list(mut self, v: Variable, objects: Vec<ObjectId>) -> Self {
        self.0.insert(v, Value::List(objects));
        self
    }

    /// All objects bound by some variable.
    pub fn codomain(&self) -> BTreeSet<ObjectId> {
        self.0.values().flat_map(|v| v.objects().iter().cloned()).collect()
    }
}

impl Serialize for OpidBinding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k.name(), v)?;
        }
        map.end()
    }
}

/// Tokens per place; places without tokens are absent so equal markings compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OpidMarking(BTreeMap<PlaceId, BTreeSet<Token>>);

impl OpidMarking {
    pub fn new() -> Self {
        OpidMarking::default()
    }

    pub fn tokens(&self, p: &PlaceId) -> impl Iterator<Item = &Token> + '_ {
        self.0.get(p).into_iter().flatten()
    }

    pub fn contains(&self, p: &PlaceId, token: &Token) -> bool {
        self.0.get(p).is_some_and(|s| s.contains(token))
    }

    pub fn insert(&mut self, p: PlaceId, token: Token) {
        self.0.entry(p).or_default().insert(token);
    }

    pub fn remove(&mut self, p: &PlaceId, token: &Token) -> bool {
        let Some(set) = self.0.get_mut(p) else { return false };
        let removed = set.remove(token);
        if set.is_empty() {
            self.0.remove(p);
        }
        removed
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.0.values().map(BTreeSet::len).sum()
    }

    /// Places holding at least one token.
    pub fn places(&self) -> impl Iterator<Item = (&PlaceId, &BTreeSet<Token>)> + '_ {
        self.0.iter()
    }

    /// Whether `o` occurs in any token of any place.
    pub fn occurs(&self, o: &ObjectId) -> bool {
        self.0.values().flatten().any(|t| t.objects().contains(o))
    }

    fn set(&mut self, p: PlaceId, tokens: BTreeSet<Token>) {
        if tokens.is_empty() {
            self.0.remove(&p);
        } else {
            self.0.insert(p, tokens);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BindingError {
    #[error("variable {0} is unbound")]
    Unbound(String),
    #[error("value of {0} does not match its kind or type")]
    TypeMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FireError {
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("transition {0} is not enabled")]
    NotEnabled(String),
    #[error(transparent)]
    Binding(#[from] BindingError),
}

fn check_value(v: &Variable, value: &Value) -> Result<(), BindingError> {
    let ok = match (v.kind(), value) {
        (VarKind::List, Value::List(l)) => l.iter().all(|o| o.object_type() == v.base_type()),
        (VarKind::Normal | VarKind::Fresh, Value::One(o)) => o.object_type() == v.base_type(),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(BindingError::TypeMismatch(v.name().to_string()))
    }
}

/// Tokens denoted by `ins` under `beta`: a single tuple for a simple inscription, one tuple per
/// list element for a template inscription (none for an empty list).
pub fn extend_binding(beta: &OpidBinding, ins: &Inscription) -> Result<BTreeSet<Token>, BindingError> {
    let mut values = Vec::with_capacity(ins.len());
    for v in ins.vars() {
        let value = beta.get(v).ok_or_else(|| BindingError::Unbound(v.name().to_string()))?;
        check_value(v, value)?;
        values.push(value);
    }
    let tuple = |pick: Option<&ObjectId>| {
        let objs = values
            .iter()
            .map(|val| match val {
                Value::One(o) => o.clone(),
                Value::List(_) => pick.expect("list element").clone(),
            })
            .collect();
        Token::new(objs).expect("inscriptions are non-empty")
    };
    Ok(match ins.list_position() {
        None => BTreeSet::from([tuple(None)]),
        Some(k) => values[k].objects().iter().map(|u| tuple(Some(u))).collect(),
    })
}

fn all_vars(net: &Opid, ti: usize) -> BTreeSet<&Variable> {
    net.pre_of(ti).iter().chain(net.post_of(ti)).flat_map(|(_, i)| i.vars()).collect()
}

fn fresh_ok(net: &Opid, m: &OpidMarking, ti: usize, beta: &OpidBinding) -> bool {
    let mut used = BTreeSet::new();
    for v in net.post_of(ti).iter().flat_map(|(_, i)| i.vars()) {
        if v.kind() != VarKind::Fresh {
            continue;
        }
        let Some(Value::One(o)) = beta.get(v) else { return false };
        if !used.insert((v, o)) {
            continue;
        }
        if m.occurs(o) {
            return false;
        }
    }
    // Injectivity across distinct fresh variables.
    let values: BTreeSet<&ObjectId> = used.iter().map(|(_, o)| *o).collect();
    let vars: BTreeSet<&Variable> = used.iter().map(|(v, _)| *v).collect();
    values.len() == vars.len()
}

pub(crate) fn enabled_idx(net: &Opid, m: &OpidMarking, ti: usize, beta: &OpidBinding) -> bool {
    for v in all_vars(net, ti) {
        match beta.get(v) {
            Some(value) if check_value(v, value).is_ok() => {}
            _ => return false,
        }
    }
    for (p, ins) in net.pre_of(ti) {
        let pid = &net.places()[*p].id;
        let Ok(tokens) = extend_binding(beta, ins) else { return false };
        if !tokens.iter().all(|tok| m.contains(pid, tok)) {
            return false;
        }
    }
    fresh_ok(net, m, ti, beta)
}

/// Whether `(t, beta)` is enabled in `m`: all input tuples are present and fresh variables bind
/// pairwise distinct objects absent from `m`.
pub fn enabled(net: &Opid, m: &OpidMarking, t: &TransitionId, beta: &OpidBinding) -> bool {
    net.transition_idx(t).is_some_and(|ti| enabled_idx(net, m, ti, beta))
}

/// Fires `(t, beta)`: input tuples are removed and output tuples added, removing before adding on
/// places that are both input and output.
pub fn fire(net: &Opid, m: &OpidMarking, t: &TransitionId, beta: &OpidBinding) -> Result<OpidMarking, FireError> {
    let ti = net.transition_idx(t).ok_or_else(|| FireError::UnknownTransition(t.to_string()))?;
    for (_, ins) in net.pre_of(ti).iter().chain(net.post_of(ti)) {
        extend_binding(beta, ins)?;
    }
    if !enabled_idx(net, m, ti, beta) {
        return Err(FireError::NotEnabled(t.to_string()));
    }
    Ok(fire_idx(net, m, ti, beta))
}

pub(crate) fn fire_idx(net: &Opid, m: &OpidMarking, ti: usize, beta: &OpidBinding) -> OpidMarking {
    let mut removed: BTreeMap<usize, BTreeSet<Token>> = BTreeMap::new();
    let mut added: BTreeMap<usize, BTreeSet<Token>> = BTreeMap::new();
    for (p, ins) in net.pre_of(ti) {
        removed.entry(*p).or_default().extend(extend_binding(beta, ins).expect("checked binding"));
    }
    for (p, ins) in net.post_of(ti) {
        added.entry(*p).or_default().extend(extend_binding(beta, ins).expect("checked binding"));
    }
    let touched: BTreeSet<usize> = removed.keys().chain(added.keys()).copied().collect();
    let mut next = m.clone();
    for p in touched {
        let pid = net.places()[p].id.clone();
        let mut tokens: BTreeSet<Token> = m.0.get(&pid).cloned().unwrap_or_default();
        if let Some(r) = removed.get(&p) {
            tokens.retain(|t| !r.contains(t));
        }
        if let Some(a) = added.get(&p) {
            tokens.extend(a.iter().cloned());
        }
        next.set(pid, tokens);
    }
    next
}

/// Restrictions applied while enumerating bindings.
pub(crate) struct Scope<'a> {
    /// When set, every bound object must belong to this set.
    pub allowed: Option<&'a BTreeSet<ObjectId>>,
    /// Candidate objects for fresh variables, per type.
    pub fresh: &'a BTreeMap<ObjectType, Vec<ObjectId>>,
}

impl Scope<'_> {
    fn admits(&self, o: &ObjectId) -> bool {
        self.allowed.is_none_or(|a| a.contains(o))
    }
}

/// Every enabled binding of transition `ti` in `m` that extends `seed`. List variables bind
/// non-empty lists in ascending id order.
pub(crate) fn enumerate_bindings(
    net: &Opid,
    m: &OpidMarking,
    ti: usize,
    seed: &OpidBinding,
    scope: &Scope<'_>,
) -> Vec<OpidBinding> {
    let mut inflows: Vec<(&PlaceId, &Inscription)> =
        net.pre_of(ti).iter().map(|(p, i)| (&net.places()[*p].id, i)).collect();
    // Simple inscriptions first: they pin normal variables that templates then reuse.
    inflows.sort_by_key(|(_, i)| i.is_template());
    let mut partial = Vec::new();
    bind_inflows(m, &inflows, seed.clone(), scope, &mut partial);

    let outvars: BTreeSet<&Variable> = net.post_of(ti).iter().flat_map(|(_, i)| i.vars()).collect();
    let mut out = BTreeSet::new();
    for beta in partial {
        let unbound: Vec<&Variable> = outvars.iter().copied().filter(|v| beta.get(v).is_none()).collect();
        if unbound.iter().any(|v| v.kind() != VarKind::Fresh) {
            continue;
        }
        for full in bind_fresh(&beta, &unbound, scope) {
            if enabled_idx(net, m, ti, &full) {
                out.insert(full);
            }
        }
    }
    out.into_iter().collect()
}

fn bind_inflows(
    m: &OpidMarking,
    inflows: &[(&PlaceId, &Inscription)],
    beta: OpidBinding,
    scope: &Scope<'_>,
    out: &mut Vec<OpidBinding>,
) {
    let Some(((place, ins), rest)) = inflows.split_first() else {
        out.push(beta);
        return;
    };
    let tokens = m.tokens(place).filter(|t| t.objects().iter().all(|o| scope.admits(o)));
    match ins.list_position() {
        None => {
            for tok in tokens {
                if let Some(b) = unify(&beta, ins, tok, None) {
                    bind_inflows(m, rest, b, scope, out);
                }
            }
        }
        Some(k) => {
            let list_var = &ins.vars()[k];
            let mut groups: BTreeMap<OpidBinding, BTreeSet<ObjectId>> = BTreeMap::new();
            for tok in tokens {
                if let Some(b) = unify(&beta, ins, tok, Some(k)) {
                    groups.entry(b).or_default().insert(tok.objects()[k].clone());
                }
            }
            for (b, elems) in groups {
                match beta.get(list_var) {
                    Some(Value::List(l)) => {
                        if !l.is_empty() && l.iter().all(|u| elems.contains(u)) {
                            bind_inflows(m, rest, b, scope, out);
                        }
                    }
                    Some(Value::One(_)) => {}
                    None => {
                        let elems: Vec<ObjectId> = elems.into_iter().collect();
                        for subset in nonempty_subsets(&elems) {
                            let b = b.clone().list(list_var.clone(), subset);
                            bind_inflows(m, rest, b, scope, out);
                        }
                    }
                }
            }
        }
    }
}

/// Extends `beta` so that the non-list positions of `ins` match `tok`.
fn unify(beta: &OpidBinding, ins: &Inscription, tok: &Token, skip: Option<usize>) -> Option<OpidBinding> {
    let mut b = beta.clone();
    for (i, (v, o)) in ins.vars().iter().zip(tok.objects()).enumerate() {
        if Some(i) == skip {
            continue;
        }
        match b.get(v) {
            Some(Value::One(x)) if x == o => {}
            Some(_) => return None,
            None if v.kind() == VarKind::Normal => b.insert(v.clone(), Value::One(o.clone())),
            None => return None,
        }
    }
    Some(b)
}

fn bind_fresh(beta: &OpidBinding, vars: &[&Variable], scope: &Scope<'_>) -> Vec<OpidBinding> {
    let Some((v, rest)) = vars.split_first() else {
        return vec![beta.clone()];
    };
    let used = beta.codomain();
    let mut out = Vec::new();
    for o in scope.fresh.get(v.base_type()).into_iter().flatten() {
        if used.contains(o) || !scope.admits(o) {
            continue;
        }
        out.extend(bind_fresh(&beta.clone().one((*v).clone(), o.clone()), rest, scope));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Color;
    use crate::opid::{ArcDirection, OpidArc, OpidPlace, OpidTransition, PlaceRole, TransitionRole};

    fn ty(s: &str) -> ObjectType {
        ObjectType::new(s)
    }

    fn w(i: u8) -> ObjectId {
        ObjectId::new(format!("w{i}"), ty("Wheel"))
    }

    fn f(i: u8) -> ObjectId {
        ObjectId::new(format!("f{i}"), ty("Frame"))
    }

    fn ins(vars: Vec<Variable>) -> Inscription {
        Inscription::new(vars).unwrap()
    }

    fn tok(objs: &[ObjectId]) -> Token {
        Token::new(objs.to_vec()).unwrap()
    }

    #[test]
    fn extend_template() {
        let (wt, ft) = (ty("Wheel"), ty("Frame"));
        let beta = OpidBinding::default().list(Variable::list(&wt), vec![w(1), w(2)]).one(Variable::normal(&ft), f(1));
        let got = extend_binding(&beta, &ins(vec![Variable::list(&wt), Variable::normal(&ft)])).unwrap();
        assert_eq!(got, BTreeSet::from([tok(&[w(1), f(1)]), tok(&[w(2), f(1)])]));
    }

    #[test]
    fn extend_simple_and_empty_list() {
        let ft = ty("Frame");
        let beta = OpidBinding::default().one(Variable::normal(&ft), f(1));
        assert_eq!(
            extend_binding(&beta, &Inscription::single(Variable::normal(&ft))).unwrap(),
            BTreeSet::from([tok(&[f(1)])])
        );
        let wt = ty("Wheel");
        let empty = OpidBinding::default().list(Variable::list(&wt), vec![]);
        assert!(extend_binding(&empty, &Inscription::single(Variable::list(&wt))).unwrap().is_empty());
    }

    #[test]
    fn extend_errors() {
        let ft = ty("Frame");
        let x = Inscription::single(Variable::normal(&ft));
        assert_eq!(
            extend_binding(&OpidBinding::default(), &x),
            Err(BindingError::Unbound("x_Frame".into()))
        );
        let wrong = OpidBinding::default().one(Variable::normal(&ft), w(1));
        assert_eq!(extend_binding(&wrong, &x), Err(BindingError::TypeMismatch("x_Frame".into())));
    }

    /// `p --<x_A>--> t --<x_A>--> p` plus `t --<nu_A>--> q`.
    fn loop_net() -> Opid {
        let a = ty("A");
        let c = Color::single(a.clone());
        Opid::new(
            vec![a.clone()],
            vec![
                OpidPlace { id: "p".into(), color: c.clone(), role: PlaceRole::Core },
                OpidPlace { id: "q".into(), color: c, role: PlaceRole::Core },
            ],
            vec![OpidTransition { id: "t".into(), label: None, role: TransitionRole::Core }],
            vec![
                OpidArc { place: "p".into(), transition: "t".into(), direction: ArcDirection::In, inscription: Inscription::single(Variable::normal(&a)) },
                OpidArc { place: "p".into(), transition: "t".into(), direction: ArcDirection::Out, inscription: Inscription::single(Variable::normal(&a)) },
                OpidArc { place: "q".into(), transition: "t".into(), direction: ArcDirection::Out, inscription: Inscription::single(Variable::fresh(&a)) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn read_write_arc_keeps_place_and_fresh_must_be_new() {
        let net = loop_net();
        let a = ty("A");
        let (a1, a2) = (ObjectId::new("a1", a.clone()), ObjectId::new("a2", a.clone()));
        let mut m = OpidMarking::new();
        m.insert("p".into(), Token::single(a1.clone()));
        let beta = OpidBinding::default().one(Variable::normal(&a), a1.clone()).one(Variable::fresh(&a), a2.clone());
        let next = fire(&net, &m, &"t".into(), &beta).unwrap();
        assert_eq!(next.tokens(&"p".into()).count(), 1);
        assert!(next.contains(&"q".into(), &Token::single(a2.clone())));
        // a2 now occurs in the marking, so it is no longer fresh.
        let again = OpidBinding::default().one(Variable::normal(&a), a1.clone()).one(Variable::fresh(&a), a2);
        assert!(!enabled(&net, &next, &"t".into(), &again));
        // A fresh object equal to a consumed one is never fresh.
        let stale = OpidBinding::default().one(Variable::normal(&a), a1.clone()).one(Variable::fresh(&a), a1);
        assert_eq!(fire(&net, &m, &"t".into(), &stale), Err(FireError::NotEnabled("t".into())));
    }

    #[test]
    fn enumeration_respects_fresh_pool() {
        let net = loop_net();
        let a = ty("A");
        let objs: Vec<ObjectId> = (1..=3).map(|i| ObjectId::new(format!("a{i}"), a.clone())).collect();
        let mut m = OpidMarking::new();
        m.insert("p".into(), Token::single(objs[0].clone()));
        let pool = BTreeMap::from([(a.clone(), objs.clone())]);
        let scope = Scope { allowed: None, fresh: &pool };
        let got = enumerate_bindings(&net, &m, 0, &OpidBinding::default(), &scope);
        // x_A must be a1; nu_A ranges over the two objects not in the marking.
        assert_eq!(got.len(), 2);
        assert!(got.iter().all(|b| b.get(&Variable::normal(&a)) == Some(&Value::One(objs[0].clone()))));
    }
}
