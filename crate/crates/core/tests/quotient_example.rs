use std::collections::BTreeSet;

use symest::{
    build_quotient, check_chain_decomposable, derive_distributed, estimate_and_predict, lemma1_relation,
    partition_chains, theorem2_decomposition, Estimator, Machine, Trace,
};

/// Seven states, six symbols; `d`, `a`, `c`, `e` and `f` all enter some
/// state from two sources, so the machine is not chain-decomposable.
fn machine() -> Machine {
    let states = (1..=7).map(|i| format!("xi{i}")).collect();
    let symbols = ["a", "b", "c", "d", "e", "f"].map(String::from).to_vec();
    let t = [
        ("xi1", "d", "xi4"),
        ("xi2", "d", "xi5"),
        ("xi3", "b", "xi6"),
        ("xi3", "a", "xi4"),
        ("xi6", "a", "xi1"),
        ("xi7", "a", "xi1"),
        ("xi4", "c", "xi1"),
        ("xi5", "c", "xi2"),
        ("xi4", "e", "xi6"),
        ("xi5", "e", "xi7"),
        ("xi4", "f", "xi3"),
        ("xi5", "f", "xi3"),
    ];
    Machine::new(states, symbols, &t, None).unwrap()
}

fn names(m: &Machine, ids: &[usize], state: bool) -> Vec<String> {
    ids.iter()
        .map(|&i| if state { m.state_name(i) } else { m.symbol_name(i) }.to_owned())
        .collect()
}

#[test]
fn merge_classes() {
    let m = machine();
    assert!(check_chain_decomposable(&m).is_err());
    let q = lemma1_relation(&m);
    let classes: Vec<Vec<String>> = q.classes().iter().map(|c| names(&m, c, true)).collect();
    assert_eq!(
        classes,
        [vec!["xi1", "xi2"], vec!["xi3"], vec!["xi4", "xi5"], vec!["xi6", "xi7"]]
    );
}

#[test]
fn quotient_transitions() {
    let m = machine();
    let t = build_quotient(&m, &lemma1_relation(&m)).unwrap().machine;
    let mut got: Vec<(String, String, String)> = t
        .transitions()
        .iter()
        .map(|&(s, w, d)| (t.state_name(s).into(), t.symbol_name(w).into(), t.state_name(d).into()))
        .collect();
    got.sort();
    let mut want: Vec<(String, String, String)> = [
        ("z4", "a", "z1"),
        ("z2", "a", "z3"),
        ("z2", "b", "z4"),
        ("z3", "c", "z1"),
        ("z1", "d", "z3"),
        ("z3", "e", "z4"),
        ("z3", "f", "z2"),
    ]
    .iter()
    .map(|&(s, w, d)| (s.into(), w.into(), d.into()))
    .collect();
    want.sort();
    assert_eq!(got, want);
    assert!(check_chain_decomposable(&t).is_ok());
}

#[test]
fn quotient_chains() {
    let m = machine();
    let t = build_quotient(&m, &lemma1_relation(&m)).unwrap().machine;
    let partition = partition_chains(&t).unwrap();
    let got: BTreeSet<BTreeSet<String>> =
        partition.blocks().iter().map(|b| names(&t, b, false).into_iter().collect()).collect();
    let want: BTreeSet<BTreeSet<String>> = [vec!["b", "c", "d"], vec!["e", "a"], vec!["f"]]
        .iter()
        .map(|b| b.iter().map(|s| s.to_string()).collect())
        .collect();
    assert_eq!(got, want);
}

#[test]
fn pipeline_is_exact_on_accepted_traces() {
    let m = machine();
    let qd = theorem2_decomposition(&m, 2).unwrap();
    assert_eq!(qd.iterations, 1);
    let family = derive_distributed(&m, &qd.decomposition).unwrap();
    let mut frontier = vec![(Vec::new(), Estimator::unbounded(&m), family.estimator())];
    let mut checked = 0;
    while let Some((path, mono, dec)) = frontier.pop() {
        for w in 0..m.num_symbols() {
            let (mut mono, mut dec) = (mono.clone(), dec.clone());
            mono.step(w).unwrap();
            dec.step(w).unwrap();
            let mut p = path.clone();
            p.push(w);
            assert_eq!(mono.chi(), &dec.chi(), "{p:?}");
            assert_eq!(mono.rho(), &dec.rho(), "{p:?}");
            checked += 1;
            if !mono.chi().is_empty() && p.len() < 5 {
                frontier.push((p, mono, dec));
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn hand_made_decomposition_overapproximates() {
    let m = machine();
    let d = symest::Decomposition::new(vec![
        symest::AggregationMap::from_labels(&["u", "u", "u", "v", "v", "v"]),
        symest::AggregationMap::from_labels(&["p", "q", "r", "p", "q", "r"]),
    ])
    .unwrap();
    let family = derive_distributed(&m, &d).unwrap();
    let w = m.trace(0, &["d", "f"]).unwrap();
    let (chi, _) = estimate_and_predict(&m, &w).unwrap();
    let (dchi, _) = family.decentralized(&w).unwrap();
    assert!(chi.is_subset(&dchi));
    let w = Trace::from_start(vec![3]);
    assert_eq!(family.decentralized(&w).unwrap(), estimate_and_predict(&m, &w).unwrap());
}
