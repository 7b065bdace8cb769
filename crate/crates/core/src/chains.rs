//! Non-deterministic chains and chain-decomposable machines.
//!
//! A symbol subset `Ω` carries a chain when the sources sets `χ(ω)`, `ω ∈ Ω`,
//! are pairwise disjoint and no state is entered twice by the Ω-transitions
//! (two transitions into the same target must be the same transition). For
//! a chain-decomposable machine, any consistent per-chain decomposition of
//! the alphabet makes the decentralized scheme exact.
//!
//! The first condition is the set-valued form (disjoint `χ` images). The
//! weaker triple form, which only forbids two symbols on the same
//! source/target pair, is not accepted.

use std::fmt;

use crate::decomposition::{AggregationMap, Decomposition};
use crate::error::{Error, Result};
use crate::machine::{Machine, StateSet};

/// Two transitions with the same symbol entering the same state from
/// different sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackwardWitness {
    pub symbol: usize,
    pub target: usize,
    pub sources: (usize, usize),
}

impl fmt::Display for BackwardWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "symbol #{} enters state #{} from both #{} and #{}",
            self.symbol, self.target, self.sources.0, self.sources.1
        )
    }
}

impl BackwardWitness {
    pub fn describe(&self, m: &Machine) -> String {
        format!(
            "symbol `{}` enters `{}` from both `{}` and `{}`",
            m.symbol_name(self.symbol),
            m.state_name(self.target),
            m.state_name(self.sources.0),
            m.state_name(self.sources.1)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainViolation {
    /// Two distinct symbols of the block leave the same state.
    SharedSource { state: usize, symbols: (usize, usize) },
    /// Two distinct transitions of the block enter the same state.
    SharedTarget { target: usize, first: (usize, usize), second: (usize, usize) },
}

impl fmt::Display for ChainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainViolation::SharedSource { state, symbols } => write!(
                f,
                "symbols #{} and #{} both leave state #{}",
                symbols.0, symbols.1, state
            ),
            ChainViolation::SharedTarget { target, first, second } => write!(
                f,
                "(#{}, #{}) and (#{}, #{}) both enter state #{}",
                first.0, first.1, second.0, second.1, target
            ),
        }
    }
}

impl ChainViolation {
    pub fn describe(&self, m: &Machine) -> String {
        match *self {
            ChainViolation::SharedSource { state, symbols } => format!(
                "symbols `{}` and `{}` both leave `{}`",
                m.symbol_name(symbols.0),
                m.symbol_name(symbols.1),
                m.state_name(state)
            ),
            ChainViolation::SharedTarget { target, first, second } => format!(
                "({}, {}, {t}) and ({}, {}, {t}) share their target",
                m.state_name(first.0),
                m.symbol_name(first.1),
                m.state_name(second.0),
                m.symbol_name(second.1),
                t = m.state_name(target)
            ),
        }
    }
}

/// Checks that the transitions labeled by `block` form a non-deterministic
/// chain.
pub fn is_chain(m: &Machine, block: &[usize]) -> Result<()> {
    for &w in block {
        m.check_symbol(w)?;
    }
    for (i, &a) in block.iter().enumerate() {
        for &b in &block[i + 1..] {
            if a == b {
                continue;
            }
            let shared = m.sources_unchecked(a).intersection(m.sources_unchecked(b));
            let first = shared.iter().next();
            if let Some(state) = first {
                return Err(Error::NotAChain(ChainViolation::SharedSource { state, symbols: (a, b) }));
            }
        }
    }
    let mut entered: Vec<Option<(usize, usize)>> = vec![None; m.num_states()];
    for &(s, w, t) in m.transitions() {
        if !block.contains(&w) {
            continue;
        }
        match entered[t] {
            None => entered[t] = Some((s, w)),
            Some(first) => {
                return Err(Error::NotAChain(ChainViolation::SharedTarget {
                    target: t,
                    first,
                    second: (s, w),
                }))
            }
        }
    }
    Ok(())
}

/// First symbol (in alphabet order) with a state entered from two sources.
pub fn backward_witness(m: &Machine) -> Option<BackwardWitness> {
    for w in 0..m.num_symbols() {
        let mut entered: Vec<Option<usize>> = vec![None; m.num_states()];
        for &(s, sym, t) in m.transitions() {
            if sym != w {
                continue;
            }
            match entered[t] {
                None => entered[t] = Some(s),
                Some(first) => {
                    return Some(BackwardWitness { symbol: w, target: t, sources: (first, s) })
                }
            }
        }
    }
    None
}

/// A machine is chain-decomposable iff every `ρ̂_ω` is backward injective.
pub fn check_chain_decomposable(m: &Machine) -> Result<()> {
    match backward_witness(m) {
        None => Ok(()),
        Some(w) => Err(Error::NotChainDecomposable(w)),
    }
}

/// A partition `W = Ω_1 ∪ … ∪ Ω_r` whose blocks all carry chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPartition {
    blocks: Vec<Vec<usize>>,
}

impl ChainPartition {
    /// Validates that `blocks` partition the alphabet and each is a chain.
    pub fn new(m: &Machine, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![None; m.num_symbols()];
        for (j, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {} is empty", j + 1)));
            }
            for &w in block {
                m.check_symbol(w)?;
                if owner[w].replace(j).is_some() {
                    return Err(Error::InvalidPartition(format!(
                        "symbol `{}` appears in more than one block",
                        m.symbol_name(w)
                    )));
                }
            }
        }
        if let Some(missing) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidPartition(format!(
                "symbol `{}` is not covered",
                m.symbol_name(missing)
            )));
        }
        for block in &blocks {
            is_chain(m, block)?;
        }
        Ok(ChainPartition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// `r`, the number of chains.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `δ_j`: the transitions labeled by block `j`.
    pub fn transitions<'m>(&self, m: &'m Machine, j: usize) -> impl Iterator<Item = &'m (usize, usize, usize)> + 'm {
        let block = self.blocks[j].clone();
        m.transitions().iter().filter(move |(_, w, _)| block.contains(w))
    }

    /// Block index of every symbol.
    pub fn block_of(&self, num_symbols: usize) -> Vec<usize> {
        let mut owner = vec![0; num_symbols];
        for (j, block) in self.blocks.iter().enumerate() {
            for &w in block {
                owner[w] = j;
            }
        }
        owner
    }
}

/// Groups symbols into chains by first-fit coloring of the conflict graph,
/// where two symbols conflict when their source sets or target sets meet.
/// Symbols are visited in alphabet order.
pub fn partition_chains(m: &Machine) -> Result<ChainPartition> {
    check_chain_decomposable(m)?;
    let n = m.num_symbols();
    let sources: Vec<&StateSet> = (0..n).map(|w| m.sources_unchecked(w)).collect();
    let targets: Vec<StateSet> = (0..n).map(|w| m.rho_single(w)).collect::<Result<_>>()?;
    let conflicts = |a: usize, b: usize| !sources[a].is_disjoint(sources[b]) || !targets[a].is_disjoint(&targets[b]);

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for w in 0..n {
        let chosen = blocks
            .iter()
            .position(|block| block.iter().all(|&other| !conflicts(w, other)))
            .unwrap_or_else(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
        blocks[chosen].push(w);
    }
    ChainPartition::new(m, blocks)
}

/// Mixed-radix factoring of one chain's symbols into `p` label coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFactors {
    /// Radix of each coordinate.
    pub radices: Vec<usize>,
    /// `V_{j,1} … V_{j,p}`, restricted to labels actually used.
    pub alphabets: Vec<Vec<String>>,
    /// Label tuple of each block symbol, in block order.
    pub tuples: Vec<Vec<String>>,
}

/// Smallest radices with product at least `count`, starting from
/// `⌈count^{1/p}⌉` everywhere and shrinking leading coordinates while the
/// product still covers `count`.
pub fn chain_radices(count: usize, p: usize) -> Vec<usize> {
    assert!(p >= 1, "a decomposition needs at least one coordinate");
    let count = count.max(1);
    let mut base = 1usize;
    while base.checked_pow(p as u32).is_none_or(|v| v < count) {
        base += 1;
    }
    let mut radices = vec![base; p];
    for i in 0..p {
        while radices[i] > 1 {
            let product: usize = radices.iter().product();
            if product / radices[i] * (radices[i] - 1) >= count {
                radices[i] -= 1;
            } else {
                break;
            }
        }
    }
    radices
}

/// Assigns each of the `count` symbols of chain `namespace` a distinct
/// `p`-tuple of labels `"{namespace}:{coordinate}:{digit}"` (both 1-based
/// prefixes, 0-based digit), most significant coordinate first.
pub fn decompose_chain(count: usize, p: usize, namespace: usize) -> ChainFactors {
    let radices = chain_radices(count, p);
    let mut used = vec![Vec::<usize>::new(); p];
    let tuples: Vec<Vec<usize>> = (0..count)
        .map(|mut index| {
            let mut digits = vec![0; p];
            for i in (0..p).rev() {
                digits[i] = index % radices[i];
                index /= radices[i];
            }
            digits
        })
        .collect();
    for digits in &tuples {
        for (i, &d) in digits.iter().enumerate() {
            if !used[i].contains(&d) {
                used[i].push(d);
            }
        }
    }
    let label = |i: usize, d: usize| format!("{namespace}:{}:{d}", i + 1);
    let alphabets = used
        .into_iter()
        .enumerate()
        .map(|(i, mut digits)| {
            digits.sort_unstable();
            digits.into_iter().map(|d| label(i, d)).collect()
        })
        .collect();
    let tuples = tuples
        .into_iter()
        .map(|digits| digits.into_iter().enumerate().map(|(i, d)| label(i, d)).collect())
        .collect();
    ChainFactors { radices, alphabets, tuples }
}

/// Combines per-chain factorings into a decomposition of the whole alphabet
/// with `V_k = ∪_j V_{j,k}`.
pub fn build_decomposition(m: &Machine, cp: &ChainPartition, p: usize) -> Result<Decomposition> {
    if p == 0 {
        return Err(Error::EmptyDecomposition);
    }
    let mut per_symbol = vec![vec![String::new(); m.num_symbols()]; p];
    for (j, block) in cp.blocks().iter().enumerate() {
        let factors = decompose_chain(block.len(), p, j + 1);
        for (&w, tuple) in block.iter().zip(factors.tuples) {
            for (k, label) in tuple.into_iter().enumerate() {
                per_symbol[k][w] = label;
            }
        }
    }
    Decomposition::new(per_symbol.iter().map(|labels| AggregationMap::from_labels(labels)).collect())
}

/// A machine whose alphabet factors as `W ⊆ U × Y`.
#[derive(Debug, Clone)]
pub struct IsMachineView<'m> {
    machine: &'m Machine,
    inputs: Vec<String>,
    outputs: Vec<String>,
    // (input, output) index pair of every symbol
    factors: Vec<(usize, usize)>,
}

impl<'m> IsMachineView<'m> {
    /// `factors[ω] = (μ, ν)` indexes into `inputs` and `outputs`; pairs must
    /// be distinct.
    pub fn new(
        machine: &'m Machine,
        inputs: Vec<String>,
        outputs: Vec<String>,
        factors: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if factors.len() != machine.num_symbols() {
            return Err(Error::AlphabetMismatch { expected: machine.num_symbols(), found: factors.len() });
        }
        for (w, &(u, y)) in factors.iter().enumerate() {
            if u >= inputs.len() || y >= outputs.len() {
                return Err(Error::NotIsMachine(format!(
                    "symbol `{}` is not factored over the declared inputs and outputs",
                    machine.symbol_name(w)
                )));
            }
            if let Some(other) = factors[..w].iter().position(|&f| f == (u, y)) {
                return Err(Error::NotIsMachine(format!(
                    "symbols `{}` and `{}` share the pair ({}, {})",
                    machine.symbol_name(other),
                    machine.symbol_name(w),
                    inputs[u],
                    outputs[y]
                )));
            }
        }
        Ok(IsMachineView { machine, inputs, outputs, factors })
    }

    /// Splits every symbol name at the first occurrence of `separator` into
    /// an input and an output name.
    pub fn from_symbol_names(
        machine: &'m Machine,
        inputs: Vec<String>,
        outputs: Vec<String>,
        separator: char,
    ) -> Result<Self> {
        let factors = machine
            .symbols()
            .iter()
            .map(|name| {
                let (u, y) = name.split_once(separator).ok_or_else(|| {
                    Error::NotIsMachine(format!("symbol `{name}` has no `{separator}` separator"))
                })?;
                let find = |list: &[String], part: &str| {
                    list.iter().position(|x| x == part).ok_or_else(|| {
                        Error::NotIsMachine(format!("`{part}` in symbol `{name}` is not declared"))
                    })
                };
                Ok((find(&inputs, u)?, find(&outputs, y)?))
            })
            .collect::<Result<_>>()?;
        Self::new(machine, inputs, outputs, factors)
    }

    pub fn machine(&self) -> &'m Machine {
        self.machine
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// `h(ξ, μ)` when defined.
    pub fn output(&self, state: usize, input: usize) -> Option<usize> {
        (0..self.machine.num_symbols())
            .find(|&w| self.factors[w].0 == input && self.machine.sources_unchecked(w).contains(state))
            .map(|w| self.factors[w].1)
    }

    fn check(&self) -> Result<()> {
        let m = self.machine;
        let reachable = m.reachable();
        for state in 0..m.num_states() {
            for input in 0..self.inputs.len() {
                let mut outputs = (0..m.num_symbols())
                    .filter(|&w| self.factors[w].0 == input && m.sources_unchecked(w).contains(state))
                    .map(|w| self.factors[w].1);
                match (outputs.next(), outputs.next()) {
                    (None, _) if reachable.contains(state) => {
                        return Err(Error::NotIsMachine(format!(
                            "reachable state `{}` has no transition for input `{}`",
                            m.state_name(state),
                            self.inputs[input]
                        )))
                    }
                    (Some(a), Some(b)) => {
                        return Err(Error::NotIsMachine(format!(
                            "state `{}` emits both `{}` and `{}` under input `{}`",
                            m.state_name(state),
                            self.outputs[a],
                            self.outputs[b],
                            self.inputs[input]
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Partitions an I/S/- machine with a singleton output map by input symbol:
/// `Ω_j = {μ_j} × Y`.
pub fn iso_partition(view: &IsMachineView<'_>) -> Result<ChainPartition> {
    view.check()?;
    let blocks: Vec<Vec<usize>> = (0..view.inputs.len())
        .map(|u| (0..view.factors.len()).filter(|&w| view.factors[w].0 == u).collect::<Vec<_>>())
        .filter(|b| !b.is_empty())
        .collect();
    ChainPartition::new(view.machine, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::check_consistency;
    use crate::machine::fixtures::{m_chain, m_nc};

    fn ids(m: &Machine, names: &[&str]) -> Vec<usize> {
        names.iter().map(|n| m.symbol_id(n).unwrap()).collect()
    }

    #[test]
    fn is_chain_examples() {
        let m = m_chain();
        is_chain(&m, &ids(&m, &["a1", "b1"])).unwrap();

        let nc = m_nc();
        assert_eq!(
            is_chain(&nc, &[0]).unwrap_err(),
            Error::NotAChain(ChainViolation::SharedTarget { target: 2, first: (0, 0), second: (1, 0) })
        );

        for w in 0..4 {
            is_chain(&m, &[w]).unwrap();
        }
        assert!(is_chain(&m, &[9]).is_err());
    }

    #[test]
    fn shared_source_is_a_violation() {
        let m = Machine::new(
            vec!["p".into(), "q".into(), "r".into()],
            vec!["a".into(), "b".into()],
            &[("p", "a", "q"), ("p", "b", "r")],
            None,
        )
        .unwrap();
        assert_eq!(
            is_chain(&m, &[0, 1]).unwrap_err(),
            Error::NotAChain(ChainViolation::SharedSource { state: 0, symbols: (0, 1) })
        );
    }

    #[test]
    fn triple_form_alone_is_not_enough() {
        // a and b leave p towards different targets: no shared (ξ, ·, ξ′) pair,
        // but χ(a) ∩ χ(b) = {p}.
        let m = Machine::new(
            vec!["p".into(), "q".into(), "r".into()],
            vec!["a".into(), "b".into()],
            &[("p", "a", "q"), ("p", "b", "r")],
            None,
        )
        .unwrap();
        assert!(matches!(is_chain(&m, &[0, 1]), Err(Error::NotAChain(ChainViolation::SharedSource { .. }))));
    }

    #[test]
    fn chain_decomposability_examples() {
        check_chain_decomposable(&m_chain()).unwrap();
        assert_eq!(
            check_chain_decomposable(&m_nc()).unwrap_err(),
            Error::NotChainDecomposable(BackwardWitness { symbol: 0, target: 2, sources: (0, 1) })
        );
        let perm = Machine::new(
            vec!["p".into(), "q".into(), "r".into()],
            vec!["rot".into(), "swap".into()],
            &[
                ("p", "rot", "q"),
                ("q", "rot", "r"),
                ("r", "rot", "p"),
                ("p", "swap", "q"),
                ("q", "swap", "p"),
                ("r", "swap", "r"),
            ],
            None,
        )
        .unwrap();
        check_chain_decomposable(&perm).unwrap();
    }

    #[test]
    fn partition_chains_examples() {
        let m = m_chain();
        let cp = partition_chains(&m).unwrap();
        // a1: x1→x2, b1: x2→x3, a2: x3→x4, b2: x4→x1 never share sources or targets.
        assert_eq!(cp.blocks(), [vec![0, 1, 2, 3]]);

        assert!(matches!(partition_chains(&m_nc()), Err(Error::NotChainDecomposable(_))));

        let crowded = Machine::new(
            vec!["p".into(), "q".into()],
            vec!["a".into(), "b".into(), "c".into()],
            &[("p", "a", "q"), ("p", "b", "p"), ("q", "c", "q")],
            None,
        )
        .unwrap();
        // a/b share source p; a/c share target q.
        let cp = partition_chains(&crowded).unwrap();
        assert_eq!(cp.blocks(), [vec![0], vec![1, 2]]);
        for b in cp.blocks() {
            is_chain(&crowded, b).unwrap();
        }
    }

    #[test]
    fn partition_is_deterministic() {
        let m = m_chain();
        assert_eq!(partition_chains(&m).unwrap(), partition_chains(&m).unwrap());
    }

    #[test]
    fn radices() {
        assert_eq!(chain_radices(2, 2), [1, 2]);
        assert_eq!(chain_radices(4, 2), [2, 2]);
        assert_eq!(chain_radices(3, 2), [2, 2]);
        assert_eq!(chain_radices(5, 1), [5]);
        assert_eq!(chain_radices(1, 3), [1, 1, 1]);
        assert_eq!(chain_radices(9, 2), [3, 3]);
        assert_eq!(chain_radices(7, 3), [2, 2, 2]);
        assert_eq!(chain_radices(5, 3), [2, 2, 2]);
    }

    #[test]
    fn decompose_chain_examples() {
        let two = decompose_chain(2, 2, 1);
        assert_eq!(two.tuples, [["1:1:0", "1:2:0"], ["1:1:0", "1:2:1"]]);
        assert_eq!(two.alphabets[0], ["1:1:0"]);

        let one = decompose_chain(3, 1, 2);
        assert_eq!(one.tuples, [["2:1:0"], ["2:1:1"], ["2:1:2"]]);

        let four = decompose_chain(4, 2, 1);
        assert_eq!(four.radices, [2, 2]);
        assert_eq!(four.alphabets, [["1:1:0", "1:1:1"], ["1:2:0", "1:2:1"]]);
        let distinct: std::collections::BTreeSet<_> = four.tuples.iter().collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn build_decomposition_chain_machine() {
        let m = m_chain();
        let cp = ChainPartition::new(&m, vec![ids(&m, &["a1", "b1"]), ids(&m, &["a2", "b2"])]).unwrap();
        let d = build_decomposition(&m, &cp, 2).unwrap();
        assert_eq!(check_consistency(d.maps()).unwrap(), Ok(()));
        // First coordinate names the chain, second the symbol inside it, as in D-CHAIN.
        let first: Vec<_> = (0..4).map(|w| d.maps()[0].label_of(w).unwrap()).collect();
        assert_eq!(first, [0, 0, 1, 1]);
        let second: Vec<_> = (0..4).map(|w| d.maps()[1].label_of(w).unwrap()).collect();
        assert_eq!(second, [0, 1, 2, 3]);

        let single = ChainPartition::new(&m, vec![vec![0, 1, 2, 3]]).unwrap();
        let d = build_decomposition(&m, &single, 1).unwrap();
        assert_eq!(d.maps()[0].labels().len(), 4);
    }

    #[test]
    fn partition_validation() {
        let m = m_chain();
        assert!(matches!(ChainPartition::new(&m, vec![vec![0, 1]]), Err(Error::InvalidPartition(_))));
        assert!(matches!(
            ChainPartition::new(&m, vec![vec![0, 1], vec![1, 2, 3]]),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(ChainPartition::new(&m, vec![vec![0, 1, 2, 3], vec![]]), Err(Error::InvalidPartition(_))));
    }

    /// Deterministic I/S/O machine: inputs {go, stay}, outputs {lo, hi}.
    fn iso_machine() -> Machine {
        Machine::new(
            vec!["s0".into(), "s1".into(), "s2".into()],
            ["go/lo", "go/hi", "stay/lo", "stay/hi"].map(String::from).to_vec(),
            &[
                ("s0", "go/lo", "s1"),
                ("s1", "go/hi", "s2"),
                ("s2", "go/hi", "s0"),
                ("s0", "stay/lo", "s0"),
                ("s1", "stay/hi", "s1"),
                ("s2", "stay/hi", "s2"),
            ],
            None,
        )
        .unwrap()
    }

    fn io_names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn iso_partition_by_input() {
        let m = iso_machine();
        let view = IsMachineView::from_symbol_names(&m, io_names(&["go", "stay"]), io_names(&["lo", "hi"]), '/')
            .unwrap();
        let cp = iso_partition(&view).unwrap();
        assert_eq!(cp.blocks(), [vec![0, 1], vec![2, 3]]);
        assert_eq!(view.output(1, 0), Some(1));
    }

    #[test]
    fn iso_single_input_gives_one_block() {
        let m = Machine::new(
            vec!["s0".into(), "s1".into()],
            ["u/a", "u/b"].map(String::from).to_vec(),
            &[("s0", "u/a", "s1"), ("s1", "u/b", "s0")],
            None,
        )
        .unwrap();
        let view = IsMachineView::from_symbol_names(&m, io_names(&["u"]), io_names(&["a", "b"]), '/').unwrap();
        assert_eq!(iso_partition(&view).unwrap().blocks(), [vec![0, 1]]);
    }

    #[test]
    fn iso_non_injective_successor_is_reported() {
        // s0 and s1 both emit `o` under `u` and move to s2.
        let m = Machine::new(
            vec!["s0".into(), "s1".into(), "s2".into()],
            vec!["u/o".into()],
            &[("s0", "u/o", "s2"), ("s1", "u/o", "s2"), ("s2", "u/o", "s0")],
            None,
        )
        .unwrap();
        let view = IsMachineView::from_symbol_names(&m, io_names(&["u"]), io_names(&["o"]), '/').unwrap();
        assert_eq!(
            iso_partition(&view).unwrap_err(),
            Error::NotAChain(ChainViolation::SharedTarget { target: 2, first: (0, 0), second: (1, 0) })
        );
    }

    #[test]
    fn iso_rejects_non_is_machines() {
        // Two outputs under the same input from one state.
        let m = Machine::new(
            vec!["s0".into()],
            ["u/a", "u/b"].map(String::from).to_vec(),
            &[("s0", "u/a", "s0"), ("s0", "u/b", "s0")],
            None,
        )
        .unwrap();
        let view = IsMachineView::from_symbol_names(&m, io_names(&["u"]), io_names(&["a", "b"]), '/').unwrap();
        assert!(matches!(iso_partition(&view), Err(Error::NotIsMachine(_))));

        // Missing input at a reachable state.
        let m = Machine::new(
            vec!["s0".into()],
            ["u/a", "v/a"].map(String::from).to_vec(),
            &[("s0", "u/a", "s0")],
            None,
        )
        .unwrap();
        let view = IsMachineView::from_symbol_names(&m, io_names(&["u", "v"]), io_names(&["a"]), '/').unwrap();
        assert!(matches!(iso_partition(&view), Err(Error::NotIsMachine(_))));

        assert!(IsMachineView::from_symbol_names(&m, io_names(&["u"]), io_names(&["a"]), '/').is_err());
    }
}
