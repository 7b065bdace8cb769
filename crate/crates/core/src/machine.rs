//! Finite state machines `P = (X, W, Δ, X₀)` and the single-symbol state-set
//! functions built on top of their transition relation.
//!
//! States and symbols are named by strings at the interface and addressed by
//! dense indices internally. All index-taking methods validate their input.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// A subset of a machine's state space, stored as a bit set over the dense
/// state range `0..capacity`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    bits: FixedBitSet,
}

impl StateSet {
    pub fn empty(capacity: usize) -> Self {
        StateSet { bits: FixedBitSet::with_capacity(capacity) }
    }

    pub fn full(capacity: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(capacity);
        bits.insert_range(..);
        StateSet { bits }
    }

    pub fn from_indices(capacity: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(capacity);
        for m in members {
            set.insert(m);
        }
        set
    }

    /// Size of the underlying state space, not the number of members.
    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn insert(&mut self, state: usize) {
        self.bits.insert(state);
    }

    pub fn contains(&self, state: usize) -> bool {
        self.bits.contains(state)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn union_with(&mut self, other: &StateSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A finite string `w(τ)…w(t)` of symbol indices, together with its absolute
/// start time `τ`. The alphabet is whichever one the trace is used with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Trace {
    pub start: usize,
    pub symbols: Vec<usize>,
}

impl Trace {
    pub fn new(start: usize, symbols: Vec<usize>) -> Self {
        Trace { start, symbols }
    }

    pub fn from_start(symbols: Vec<usize>) -> Self {
        Trace { start: 0, symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Absolute time of the last symbol. Undefined for the empty trace.
    pub fn end(&self) -> Option<usize> {
        (!self.is_empty()).then(|| self.start + self.symbols.len() - 1)
    }

    /// The window `[start + skip, end]`, keeping absolute time.
    pub fn suffix(&self, skip: usize) -> Trace {
        let skip = skip.min(self.symbols.len());
        Trace { start: self.start + skip, symbols: self.symbols[skip..].to_vec() }
    }

    /// The window `[start, start + len - 1]`.
    pub fn prefix(&self, len: usize) -> Trace {
        let len = len.min(self.symbols.len());
        Trace { start: self.start, symbols: self.symbols[..len].to_vec() }
    }
}

/// An immutable state machine `P = (X, W, Δ, X₀)`.
#[derive(Clone)]
pub struct Machine {
    states: Vec<String>,
    symbols: Vec<String>,
    state_index: HashMap<String, usize>,
    symbol_index: HashMap<String, usize>,
    transitions: Vec<(usize, usize, usize)>,
    initial: StateSet,
    // successors[symbol][source] -> targets
    successors: Vec<Vec<Vec<usize>>>,
    // sources[symbol] = χ(ω)
    sources: Vec<StateSet>,
}

impl PartialEq for Machine {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.symbols == other.symbols
            && self.transitions == other.transitions
            && self.initial == other.initial
    }
}

impl Eq for Machine {}

impl fmt::Debug for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let transitions: Vec<_> = self
            .transitions
            .iter()
            .map(|&(s, w, d)| (&self.states[s], &self.symbols[w], &self.states[d]))
            .collect();
        f.debug_struct("Machine")
            .field("states", &self.states)
            .field("symbols", &self.symbols)
            .field("initial", &self.state_names(&self.initial))
            .field("transitions", &transitions)
            .finish()
    }
}

fn index_names(names: &[String], duplicate: fn(String) -> Error) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if index.insert(name.clone(), i).is_some() {
            return Err(duplicate(name.clone()));
        }
    }
    Ok(index)
}

impl Machine {
    /// Builds a machine from named parts. `initial = None` means `X₀ = X`.
    pub fn new<S: AsRef<str>>(
        states: Vec<String>,
        symbols: Vec<String>,
        transitions: &[(S, S, S)],
        initial: Option<&[S]>,
    ) -> Result<Machine> {
        let state_index = index_names(&states, Error::DuplicateState)?;
        let symbol_index = index_names(&symbols, Error::DuplicateSymbol)?;
        let lookup_state = |name: &str| {
            state_index.get(name).copied().ok_or_else(|| Error::UnknownState(name.to_owned()))
        };
        let lookup_symbol = |name: &str| {
            symbol_index.get(name).copied().ok_or_else(|| Error::UnknownSymbol(name.to_owned()))
        };
        let indexed = transitions
            .iter()
            .map(|(s, w, d)| {
                Ok((lookup_state(s.as_ref())?, lookup_symbol(w.as_ref())?, lookup_state(d.as_ref())?))
            })
            .collect::<Result<Vec<_>>>()?;
        let initial = match initial {
            None => None,
            Some(names) => Some(names.iter().map(|n| lookup_state(n.as_ref())).collect::<Result<Vec<_>>>()?),
        };
        Self::build(states, symbols, state_index, symbol_index, indexed, initial)
    }

    /// Builds a machine from dense indices; state and symbol names are
    /// supplied separately. `initial = None` means `X₀ = X`.
    pub fn from_indices(
        states: Vec<String>,
        symbols: Vec<String>,
        transitions: Vec<(usize, usize, usize)>,
        initial: Option<Vec<usize>>,
    ) -> Result<Machine> {
        let state_index = index_names(&states, Error::DuplicateState)?;
        let symbol_index = index_names(&symbols, Error::DuplicateSymbol)?;
        Self::build(states, symbols, state_index, symbol_index, transitions, initial)
    }

    fn build(
        states: Vec<String>,
        symbols: Vec<String>,
        state_index: HashMap<String, usize>,
        symbol_index: HashMap<String, usize>,
        transitions: Vec<(usize, usize, usize)>,
        initial: Option<Vec<usize>>,
    ) -> Result<Machine> {
        if states.is_empty() {
            return Err(Error::NoStates);
        }
        if symbols.is_empty() {
            return Err(Error::NoSymbols);
        }
        let n = states.len();
        let m = symbols.len();
        let check_state = |index: usize| {
            if index < n {
                Ok(index)
            } else {
                Err(Error::StateIndex { index, size: n })
            }
        };

        let mut seen = HashSet::with_capacity(transitions.len());
        let mut successors = vec![vec![Vec::new(); n]; m];
        let mut sources = vec![StateSet::empty(n); m];
        for &(s, w, d) in &transitions {
            check_state(s)?;
            check_state(d)?;
            if w >= m {
                return Err(Error::SymbolIndex { index: w, size: m });
            }
            if !seen.insert((s, w, d)) {
                return Err(Error::DuplicateTransition(
                    states[s].clone(),
                    symbols[w].clone(),
                    states[d].clone(),
                ));
            }
            successors[w][s].push(d);
            sources[w].insert(s);
        }

        let initial = match initial {
            None => StateSet::full(n),
            Some(list) => {
                let mut set = StateSet::empty(n);
                for s in list {
                    set.insert(check_state(s)?);
                }
                set
            }
        };

        Ok(Machine {
            states,
            symbols,
            state_index,
            symbol_index,
            transitions,
            initial,
            successors,
            sources,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    /// Transition triples in construction order.
    pub fn transitions(&self) -> &[(usize, usize, usize)] {
        &self.transitions
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn state_id(&self, name: &str) -> Result<usize> {
        self.state_index.get(name).copied().ok_or_else(|| Error::UnknownState(name.to_owned()))
    }

    pub fn symbol_id(&self, name: &str) -> Result<usize> {
        self.symbol_index.get(name).copied().ok_or_else(|| Error::UnknownSymbol(name.to_owned()))
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }

    pub fn symbol_name(&self, symbol: usize) -> &str {
        &self.symbols[symbol]
    }

    /// Names of the members of `set`, in state-index order.
    pub fn state_names(&self, set: &StateSet) -> Vec<&str> {
        set.iter().map(|s| self.states[s].as_str()).collect()
    }

    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        let mut set = self.empty_set();
        for name in names {
            set.insert(self.state_id(name.as_ref())?);
        }
        Ok(set)
    }

    /// Resolves symbol names into a trace starting at `start`.
    pub fn trace<S: AsRef<str>>(&self, start: usize, names: &[S]) -> Result<Trace> {
        let symbols = names.iter().map(|n| self.symbol_id(n.as_ref())).collect::<Result<_>>()?;
        Ok(Trace::new(start, symbols))
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.num_states())
    }

    pub fn full_set(&self) -> StateSet {
        StateSet::full(self.num_states())
    }

    pub fn check_symbol(&self, symbol: usize) -> Result<usize> {
        if symbol < self.num_symbols() {
            Ok(symbol)
        } else {
            Err(Error::SymbolIndex { index: symbol, size: self.num_symbols() })
        }
    }

    pub fn check_trace(&self, trace: &Trace) -> Result<()> {
        trace.symbols.iter().try_for_each(|&w| self.check_symbol(w).map(drop))
    }

    fn check_set(&self, set: &StateSet) -> Result<()> {
        if set.capacity() == self.num_states() {
            Ok(())
        } else {
            Err(Error::StateIndex { index: set.capacity(), size: self.num_states() })
        }
    }

    /// `ρ̂_ω(ξ)`: targets of ω-transitions leaving `state`.
    pub fn successors(&self, symbol: usize, state: usize) -> &[usize] {
        &self.successors[symbol][state]
    }

    /// `χ(ω) = {ξ; ∃ξ′, (ξ, ω, ξ′) ∈ Δ}`.
    pub fn chi_single(&self, symbol: usize) -> Result<&StateSet> {
        self.check_symbol(symbol)?;
        Ok(&self.sources[symbol])
    }

    /// `ρ(ω) = ρ̂_ω(χ(ω))`, all targets of ω-transitions.
    pub fn rho_single(&self, symbol: usize) -> Result<StateSet> {
        self.check_symbol(symbol)?;
        Ok(self.post(symbol, &self.sources[symbol]))
    }

    /// Unchecked image of `set` under the ω-transitions.
    pub(crate) fn post(&self, symbol: usize, set: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for s in set.iter() {
            for &d in &self.successors[symbol][s] {
                out.insert(d);
            }
        }
        out
    }

    pub(crate) fn sources_unchecked(&self, symbol: usize) -> &StateSet {
        &self.sources[symbol]
    }

    /// `ρ̂_Ω(Ξ)`: union of ω-successors of `set` over all ω in `symbols`.
    pub fn rho_hat(&self, symbols: &[usize], set: &StateSet) -> Result<StateSet> {
        self.check_set(set)?;
        let mut out = self.empty_set();
        for &w in symbols {
            self.check_symbol(w)?;
            out.union_with(&self.post(w, set));
        }
        Ok(out)
    }

    /// All `(x(τ), x(t+1))` pairs joined by some run of `trace` through `Δ`,
    /// ignoring `X₀`. The empty trace yields the diagonal.
    ///
    /// Computed by composing the per-symbol transition relations pair by pair;
    /// no state-set recursion is involved.
    pub fn enumerate_paths(&self, trace: &Trace) -> Result<BTreeSet<(usize, usize)>> {
        self.check_trace(trace)?;
        let mut pairs: BTreeSet<(usize, usize)> = (0..self.num_states()).map(|s| (s, s)).collect();
        for &w in &trace.symbols {
            let mut next = BTreeSet::new();
            for &(start, mid) in &pairs {
                for &end in &self.successors[w][mid] {
                    next.insert((start, end));
                }
            }
            pairs = next;
            if pairs.is_empty() {
                break;
            }
        }
        Ok(pairs)
    }

    /// Every state has at least one outgoing transition.
    pub fn is_non_blocking(&self) -> bool {
        let mut covered = self.empty_set();
        for sources in &self.sources {
            covered.union_with(sources);
        }
        covered.len() == self.num_states()
    }

    /// States reachable from `X₀`, including `X₀` itself.
    pub fn reachable(&self) -> StateSet {
        let mut seen = self.initial.clone();
        let mut frontier: Vec<usize> = seen.iter().collect();
        while let Some(s) = frontier.pop() {
            for w in 0..self.num_symbols() {
                for &d in &self.successors[w][s] {
                    if !seen.contains(d) {
                        seen.insert(d);
                        frontier.push(d);
                    }
                }
            }
        }
        seen
    }

    /// Same structure with `X₀` replaced.
    pub fn with_initial(&self, initial: StateSet) -> Result<Machine> {
        self.check_set(&initial)?;
        let mut m = self.clone();
        m.initial = initial;
        Ok(m)
    }
}
