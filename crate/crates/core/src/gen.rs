//! Seedable generators of small per-type workflow OCPNs, logs and relationship sets, used by the
//! property tests and the `gen` subcommand.
//!
//! Every type follows its own chain `play -> t -> ... -> t -> stop` through a subsequence of a
//! shared list of visible transitions, so each per-type projection is a workflow net. Silent
//! transitions skip or repeat one step of a single type's chain.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ObjectId, ObjectType, TypePair};
use crate::ocel::{synthetic_time, Event, Ocel};
use crate::ocpn::{FlowSpec, Ocpn, OcpnBinding, OcpnPlace, OcpnTransition};
use crate::relations::RelationshipSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub max_places: usize,
    pub max_types: usize,
    pub max_objects: usize,
    pub max_visible: usize,
    pub max_silent: usize,
    /// Probability that an arc of a (transition, type) slot is a variable arc.
    pub variable_rate: f64,
    /// Probability that a simulated log is perturbed afterwards.
    pub mutation_rate: f64,
    /// Upper bound on simulated firings, silent ones included.
    pub max_steps: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_places: 10,
            max_types: 3,
            max_objects: 8,
            max_visible: 4,
            max_silent: 2,
            variable_rate: 0.3,
            mutation_rate: 0.35,
            max_steps: 40,
        }
    }
}

/// A generated net, a log over it and a relationship set over its types.
#[derive(Debug, Clone)]
pub struct Instance {
    pub net: Ocpn,
    pub log: Ocel,
    pub relations: RelationshipSet,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn type_name(i: usize) -> ObjectType {
    ObjectType::new(((b'A' + i as u8) as char).to_string())
}

fn place_id(ty: &ObjectType, k: usize) -> String {
    format!("{}_p{k}", ty.as_str().to_lowercase())
}

pub fn random_ocpn(rng: &mut impl Rng, cfg: &GenConfig) -> Ocpn {
    let k = rng.gen_range(1..=cfg.max_types.max(1));
    let types: Vec<ObjectType> = (0..k).map(type_name).collect();
    let n = rng.gen_range(1..=cfg.max_visible.max(1));
    let max_len = (cfg.max_places / k).saturating_sub(1).max(1);

    let mut chains: Vec<Vec<usize>> = Vec::with_capacity(k);
    for _ in 0..k {
        let len = rng.gen_range(1..=max_len.min(n));
        let mut picked: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, len).cloned().collect();
        picked.sort_unstable();
        chains.push(picked);
    }
    let used: BTreeSet<usize> = chains.iter().flatten().copied().collect();
    let renumber: BTreeMap<usize, usize> = used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    for chain in &mut chains {
        for t in chain.iter_mut() {
            *t = renumber[t];
        }
    }
    let labels: Vec<String> = (0..used.len()).map(|i| ((b'a' + i as u8) as char).to_string()).collect();

    let mut places = Vec::new();
    let mut flows = Vec::new();
    for (ty, chain) in types.iter().zip(&chains) {
        for p in 0..=chain.len() {
            places.push(OcpnPlace {
                id: place_id(ty, p).into(),
                ty: ty.clone(),
                play: p == 0,
                stop: p == chain.len(),
            });
        }
        for (step, &t) in chain.iter().enumerate() {
            let variable = rng.gen_bool(cfg.variable_rate);
            flows.push(FlowSpec { from: place_id(ty, step), to: labels[t].clone(), variable });
            flows.push(FlowSpec { from: labels[t].clone(), to: place_id(ty, step + 1), variable });
        }
    }
    let mut transitions: Vec<OcpnTransition> =
        labels.iter().map(|l| OcpnTransition { id: l.as_str().into(), label: Some(l.clone()) }).collect();

    let silent = rng.gen_range(0..=cfg.max_silent);
    let mut seen = BTreeSet::new();
    for _ in 0..silent {
        let ti = rng.gen_range(0..k);
        let step = rng.gen_range(0..chains[ti].len());
        // A loop must neither re-enter the play place nor leave the stop place.
        let len = chains[ti].len();
        let skip = step == 0 || step + 1 >= len || rng.gen_bool(0.5);
        if !seen.insert((ti, step, skip)) {
            continue;
        }
        let id = format!("s{}", transitions.len() - labels.len() + 1);
        let (from, to) = if skip { (step, step + 1) } else { (step + 1, step) };
        let variable = rng.gen_bool(cfg.variable_rate);
        flows.push(FlowSpec { from: place_id(&types[ti], from), to: id.clone(), variable });
        flows.push(FlowSpec { from: id.clone(), to: place_id(&types[ti], to), variable });
        transitions.push(OcpnTransition { id: id.as_str().into(), label: None });
    }
    Ocpn::new(types, places, transitions, flows).expect("generated nets are well-formed")
}

/// A random relationship set over distinct type pairs of `net`. Pairs of types that share a
/// visible transition are drawn more often, since only those can hold in a log of the net.
pub fn random_relations(rng: &mut impl Rng, net: &Ocpn) -> RelationshipSet {
    let mut shared = BTreeSet::new();
    for t in net.transitions().iter().filter(|t| !t.is_silent()) {
        let types = net.tpl(&t.id);
        for a in &types {
            for b in &types {
                shared.insert((a.clone(), b.clone()));
            }
        }
    }
    let mut pairs = Vec::new();
    for m in net.types() {
        for o in net.types() {
            let p = if shared.contains(&(m.clone(), o.clone())) { 0.45 } else { 0.05 };
            if m != o && rng.gen_bool(p) {
                pairs.push(TypePair::new(m.clone(), o.clone()));
            }
        }
    }
    RelationshipSet::new(pairs).expect("pairs are distinct")
}

fn random_objects(rng: &mut impl Rng, types: &[ObjectType], max_objects: usize) -> Vec<ObjectId> {
    let mut out = Vec::new();
    let per_type = (max_objects / types.len().max(1)).clamp(1, 3);
    // Equal counts let non-variable synchronizations pair objects up, so half of the logs use them.
    let shared = rng.gen_bool(0.5).then(|| rng.gen_range(1..=per_type));
    for ty in types {
        let count = shared.unwrap_or_else(|| rng.gen_range(1..=per_type));
        for i in 1..=count {
            out.push(ObjectId::new(format!("{}{i}", ty.as_str().to_lowercase()), ty.clone()));
        }
    }
    out
}

/// For each pair, the one-side object every many-side object is linked to. Reverse pairs reuse
/// the inverse map when it is a bijection.
fn link_maps(
    rng: &mut impl Rng,
    relations: &RelationshipSet,
    objects: &[ObjectId],
) -> BTreeMap<TypePair, BTreeMap<ObjectId, ObjectId>> {
    let of_type = |ty: &ObjectType| objects.iter().filter(|o| o.object_type() == ty).cloned().collect::<Vec<_>>();
    let mut maps: BTreeMap<TypePair, BTreeMap<ObjectId, ObjectId>> = BTreeMap::new();
    for pair in relations.pairs() {
        if let Some(rev) = maps.get(&pair.reversed()) {
            let inverse: BTreeMap<ObjectId, ObjectId> = rev.iter().map(|(m, o)| (o.clone(), m.clone())).collect();
            if inverse.len() == rev.len() && inverse.len() == of_type(&pair.many).len() {
                maps.insert(pair.clone(), inverse);
                continue;
            }
        }
        let many = of_type(&pair.many);
        let mut one = of_type(&pair.one);
        one.shuffle(rng);
        let map = many
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let target = if i < one.len() { one[i].clone() } else { one[rng.gen_range(0..one.len())].clone() };
                (m.clone(), target)
            })
            .collect();
        maps.insert(pair.clone(), map);
    }
    maps
}

fn strictly_covers(big: &OcpnBinding, small: &OcpnBinding) -> bool {
    big != small
        && big.0.len() == small.0.len()
        && small.0.iter().all(|(ty, objs)| big.0.get(ty).is_some_and(|b| objs.is_subset(b)))
}

fn respects(binding: &OcpnBinding, maps: &BTreeMap<TypePair, BTreeMap<ObjectId, ObjectId>>) -> bool {
    maps.iter().all(|(pair, map)| {
        let (Some(many), Some(one)) = (binding.0.get(&pair.many), binding.0.get(&pair.one)) else {
            return true;
        };
        many.iter().all(|m| one.len() == 1 && one.contains(&map[m]))
    })
}

/// Simulates `net` on a fresh set of objects and records visible firings as events. When
/// `linked` is given, bindings only combine objects related by a random link map for each pair,
/// so the unperturbed log tends to conform to it.
pub fn random_log(rng: &mut impl Rng, net: &Ocpn, cfg: &GenConfig, linked: Option<&RelationshipSet>) -> Ocel {
    let objects = random_objects(rng, net.types(), cfg.max_objects);
    let maps = linked.map(|r| link_maps(rng, r, &objects)).unwrap_or_default();
    let mut m = net.initial_marking(&objects).expect("objects are typed by the net");
    let fin = net.final_marking(&objects).expect("objects are typed by the net");
    let universe: BTreeMap<ObjectType, Vec<ObjectId>> = BTreeMap::new();
    let stop_early = rng.gen_bool(0.1);

    let mut events: Vec<(String, BTreeSet<ObjectId>)> = Vec::new();
    for _ in 0..cfg.max_steps {
        if m == fin || (stop_early && rng.gen_bool(0.15)) {
            break;
        }
        let mut options = Vec::new();
        for ti in 0..net.transitions().len() {
            for b in net.enabled_bindings(ti, &m, &universe) {
                if respects(&b, &maps) {
                    options.push((ti, b));
                }
            }
        }
        if linked.is_some() && rng.gen_bool(0.8) {
            // Objects left behind by a partial variable binding can rarely meet their partner
            // again, so synchronized runs mostly move whole groups.
            let all = options.clone();
            options.retain(|(ti, b)| !all.iter().any(|(tj, c)| tj == ti && strictly_covers(c, b)));
        }
        let Some((ti, b)) = options.choose(rng).cloned() else {
            break;
        };
        let t = &net.transitions()[ti];
        m = net.fire(&m, &t.id, &b).expect("enabled binding fires");
        if let Some(label) = &t.label {
            events.push((label.clone(), b.codomain()));
        }
    }

    if rng.gen_bool(cfg.mutation_rate) {
        mutate(rng, net, &objects, &mut events);
    }
    let events = events
        .into_iter()
        .enumerate()
        .map(|(i, (activity, objs))| Event { id: format!("e{}", i + 1), activity, objects: objs, time: synthetic_time(i) })
        .collect();
    Ocel::new(net.types().iter().cloned(), objects, events).expect("generated logs are valid")
}

fn mutate(rng: &mut impl Rng, net: &Ocpn, objects: &[ObjectId], events: &mut Vec<(String, BTreeSet<ObjectId>)>) {
    let labels: Vec<String> = net.transitions().iter().filter_map(|t| t.label.clone()).collect();
    let choice = if events.is_empty() { 5 } else { rng.gen_range(0..6) };
    match choice {
        0 => {
            let i = rng.gen_range(0..events.len());
            events.remove(i);
        }
        1 if events.len() > 1 => {
            let i = rng.gen_range(0..events.len() - 1);
            events.swap(i, i + 1);
        }
        2 => {
            let i = rng.gen_range(0..events.len());
            events[i].0 = labels.choose(rng).cloned().unwrap_or_default();
        }
        3 => {
            let i = rng.gen_range(0..events.len());
            if events[i].1.len() > 1 {
                let victim = events[i].1.iter().nth(rng.gen_range(0..events[i].1.len())).cloned().unwrap();
                events[i].1.remove(&victim);
            }
        }
        4 => {
            let i = rng.gen_range(0..events.len());
            events[i].1.insert(objects.choose(rng).cloned().unwrap());
        }
        _ => {
            let i = rng.gen_range(0..=events.len());
            let label = labels.choose(rng).cloned().unwrap_or_default();
            let size = rng.gen_range(1..=objects.len().min(3));
            let objs = objects.choose_multiple(rng, size).cloned().collect();
            events.insert(i, (label, objs));
        }
    }
}

/// One instance per seed. With `synchronized`, the log is simulated under link maps for the
/// instance's relationship set.
pub fn instance(seed: u64, cfg: &GenConfig, synchronized: bool) -> Instance {
    let mut rng = rng(seed);
    let net = random_ocpn(&mut rng, cfg);
    let relations = random_relations(&mut rng, &net);
    let log = random_log(&mut rng, &net, cfg, synchronized.then_some(&relations));
    Instance { net, log, relations }
}

/// A random log over `types` alone, for checks that need no net.
pub fn random_free_log(rng: &mut impl Rng, types: usize, max_objects: usize, max_events: usize) -> Ocel {
    let types: Vec<ObjectType> = (0..types.max(1)).map(type_name).collect();
    let objects = random_objects(rng, &types, max_objects);
    let count = rng.gen_range(0..=max_events);
    let events = (0..count)
        .map(|i| {
            let size = rng.gen_range(1..=objects.len().min(4));
            Event {
                id: format!("e{}", i + 1),
                activity: ["a", "b", "c"].choose(rng).unwrap().to_string(),
                objects: objects.choose_multiple(rng, size).cloned().collect(),
                time: synthetic_time(i),
            }
        })
        .collect();
    Ocel::new(types, objects, events).expect("generated logs are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nets_respect_bounds() {
        let cfg = GenConfig::default();
        for seed in 0..300 {
            let net = random_ocpn(&mut rng(seed), &cfg);
            assert!(net.places().len() <= 10, "seed {seed}");
            assert!(net.types().len() <= 3);
            assert!(net.validate().is_empty(), "seed {seed}: {:?}", net.validate());
            assert!(net.workflow_warnings().is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn logs_respect_bounds() {
        let cfg = GenConfig::default();
        for seed in 0..200 {
            let inst = instance(seed, &cfg, seed % 2 == 0);
            assert!(inst.log.object_count() <= 8);
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let cfg = GenConfig::default();
        let a = instance(42, &cfg, true);
        let b = instance(42, &cfg, true);
        assert_eq!(a.net, b.net);
        assert_eq!(a.log, b.log);
        assert_eq!(a.relations, b.relations);
    }

    #[test]
    fn unperturbed_synchronized_logs_conform() {
        let cfg = GenConfig { mutation_rate: 0.0, ..GenConfig::default() };
        for seed in 0..100 {
            let mut r = rng(seed);
            let net = random_ocpn(&mut r, &cfg);
            let rel = random_relations(&mut r, &net);
            let log = random_log(&mut r, &net, &cfg, Some(&rel));
            for e in log.events() {
                let b = OcpnBinding::from_objects(&e.objects);
                for pair in rel.pairs() {
                    if let (Some(m), Some(o)) = (b.0.get(&pair.many), b.0.get(&pair.one)) {
                        assert!(o.len() == 1 || m.is_empty(), "seed {seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn free_logs_are_valid() {
        let mut r = rng(7);
        for _ in 0..50 {
            let log = random_free_log(&mut r, 3, 8, 6);
            assert!(log.events().len() <= 6);
        }
    }
}
