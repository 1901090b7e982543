use std::collections::BTreeMap;

use crate::bencode::{Circuit, ControlPattern, Gate};

/// Angles closer than this are treated as equal when merging.
pub const ANGLE_TOL: f64 = 1e-12;

/// Merges equal-angle rotations of the same diagonal whose control patterns
/// differ in exactly one cared bit, until no pair is left.
///
/// Only rotations that carry a diagonal tag are touched. A maximal run of
/// consecutive tagged rotations on one target commutes internally, so each
/// run is rewritten in canonical order: by diagonal, then control pattern.
/// Every other gate keeps its position.
pub fn collapse_rotations(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.num_qubits);
    let mut i = 0;
    while i < circuit.gates.len() {
        let Some(target) = tagged_target(&circuit.gates[i]) else {
            out.push(circuit.gates[i].clone());
            i += 1;
            continue;
        };
        let start = i;
        while i < circuit.gates.len() && tagged_target(&circuit.gates[i]) == Some(target) {
            i += 1;
        }
        out.gates.extend(collapse_run(&circuit.gates[start..i]));
    }
    out
}

fn tagged_target(g: &Gate) -> Option<usize> {
    match g {
        Gate::MultiplexedRy {
            target,
            diagonal: Some(_),
            ..
        } => Some(*target),
        _ => None,
    }
}

type GroupKey = (i64, usize, Vec<usize>);

fn collapse_run(run: &[Gate]) -> Vec<Gate> {
    let mut groups: BTreeMap<GroupKey, Vec<(f64, u64, u64)>> = BTreeMap::new();
    for g in run {
        if let Gate::MultiplexedRy {
            target,
            controls,
            angle,
            diagonal: Some(k),
        } = g
        {
            groups
                .entry((*k, *target, controls.qubits.clone()))
                .or_default()
                .push((*angle, controls.care, controls.bits));
        }
    }
    let mut out = Vec::with_capacity(run.len());
    for ((k, target, qubits), mut gates) in groups {
        gates.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged = Vec::new();
        let mut lo = 0;
        while lo < gates.len() {
            let mut hi = lo + 1;
            while hi < gates.len() && gates[hi].0 - gates[lo].0 <= ANGLE_TOL {
                hi += 1;
            }
            let angle = gates[lo].0;
            let patterns = merge_patterns(gates[lo..hi].iter().map(|g| (g.1, g.2)), qubits.len());
            merged.extend(patterns.into_iter().map(|(care, bits)| (care, bits, angle)));
            lo = hi;
        }
        merged.sort_by(|x, y| x.1.cmp(&y.1).then(x.0.cmp(&y.0)).then(x.2.total_cmp(&y.2)));
        out.extend(merged.into_iter().map(|(care, bits, angle)| Gate::MultiplexedRy {
            target,
            controls: ControlPattern {
                qubits: qubits.clone(),
                bits,
                care,
            },
            angle,
            diagonal: Some(k),
        }));
    }
    out
}

/// Repeated bottom-up sweeps over the control bits, least significant
/// first. A pattern is `(care, bits)`; duplicates are kept as a count.
fn merge_patterns(patterns: impl Iterator<Item = (u64, u64)>, width: usize) -> Vec<(u64, u64)> {
    let mut set: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    for (care, bits) in patterns {
        *set.entry((care, bits & care)).or_default() += 1;
    }
    loop {
        let mut changed = false;
        for b in 0..width {
            let bit = 1u64 << b;
            let mut next: BTreeMap<(u64, u64), usize> = BTreeMap::new();
            for (&(care, bits), &count) in &set {
                if care & bit == 0 {
                    *next.entry((care, bits)).or_default() += count;
                    continue;
                }
                let partner = set.get(&(care, bits ^ bit)).copied().unwrap_or(0);
                let pairs = count.min(partner);
                if pairs > 0 && bits & bit == 0 {
                    *next.entry((care & !bit, bits)).or_default() += pairs;
                    changed = true;
                }
                if count > pairs {
                    *next.entry((care, bits)).or_default() += count - pairs;
                }
            }
            set = next;
        }
        if !changed {
            break;
        }
    }
    set.into_iter()
        .flat_map(|(p, count)| std::iter::repeat_n(p, count))
        .collect()
}
