//! State-space aggregation `𝒬 : X → Z`, quotient machines `T = P/Q`, and the
//! pipeline that derives exact decompositions for machines that are not
//! chain-decomposable themselves.
//!
//! Two states are merged when some common string leads both of them into a
//! common state. That relation is closed transitively here, which can make
//! it coarser than needed but not finer; the quotient is then checked for
//! chain-decomposability instead of assuming it, and refined again on the
//! quotient if the check fails.

use std::collections::VecDeque;

use crate::chains::{backward_witness, build_decomposition, partition_chains, ChainPartition};
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::machine::{Machine, StateSet};

/// A surjection from states onto class labels `z1 … zr`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMap {
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl QuotientMap {
    /// Classes must partition `0..num_states`. They are renumbered by their
    /// smallest member.
    pub fn from_classes(num_states: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut class_of = vec![usize::MAX; num_states];
        for (c, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidQuotient(format!("class {} is empty", c + 1)));
            }
            for &s in class {
                if s >= num_states {
                    return Err(Error::StateIndex { index: s, size: num_states });
                }
                if class_of[s] != usize::MAX {
                    return Err(Error::InvalidQuotient(format!("state #{s} is in two classes")));
                }
                class_of[s] = c;
            }
        }
        if let Some(s) = class_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidQuotient(format!("state #{s} is not covered")));
        }
        Ok(Self::from_assignment(&class_of))
    }

    /// Builds the map from any class assignment, renumbering classes by their
    /// smallest member.
    fn from_assignment(raw: &[usize]) -> Self {
        let mut renumber = std::collections::HashMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let class_of = raw
            .iter()
            .enumerate()
            .map(|(s, c)| {
                let id = *renumber.entry(*c).or_insert_with(|| {
                    classes.push(Vec::new());
                    classes.len() - 1
                });
                classes[id].push(s);
                id
            })
            .collect();
        QuotientMap { class_of, classes }
    }

    pub fn identity(num_states: usize) -> Self {
        Self::from_assignment(&(0..num_states).collect::<Vec<_>>())
    }

    pub fn total(num_states: usize) -> Self {
        Self::from_assignment(&vec![0; num_states])
    }

    pub fn num_states(&self) -> usize {
        self.class_of.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// `𝒬(ξ)`.
    pub fn class_of(&self, state: usize) -> usize {
        self.class_of[state]
    }

    /// `𝒬⁻¹(ζ)`, sorted.
    pub fn members(&self, class: usize) -> &[usize] {
        &self.classes[class]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn label(class: usize) -> String {
        format!("z{}", class + 1)
    }

    /// `𝒬(Ξ)`.
    pub fn image(&self, set: &StateSet) -> StateSet {
        StateSet::from_indices(self.num_classes(), set.iter().map(|s| self.class_of[s]))
    }

    /// `𝒬⁻¹(Z′)`.
    pub fn preimage(&self, set: &StateSet) -> StateSet {
        StateSet::from_indices(self.num_states(), set.iter().flat_map(|c| self.classes[c].iter().copied()))
    }

    /// `self` followed by `outer`, where `outer` maps this map's classes.
    pub fn then(&self, outer: &QuotientMap) -> QuotientMap {
        let raw: Vec<usize> = self.class_of.iter().map(|&c| outer.class_of(c)).collect();
        Self::from_assignment(&raw)
    }
}

/// `T = (Z, W, Λ, 𝒬(X₀))` together with the map that produced it.
#[derive(Debug, Clone)]
pub struct QuotientMachine {
    pub machine: Machine,
    pub map: QuotientMap,
}

/// The merge relation: states joined by a common string into a common state,
/// closed under transitivity.
///
/// Runs a backward breadth-first search over the synchronized product
/// `X × X` from the diagonal; every off-diagonal pair reached is merged.
pub fn lemma1_relation(m: &Machine) -> QuotientMap {
    let n = m.num_states();
    // predecessors[symbol][target] -> sources
    let mut predecessors = vec![vec![Vec::new(); n]; m.num_symbols()];
    for &(s, w, t) in m.transitions() {
        predecessors[w][t].push(s);
    }

    let mut visited = vec![false; n * n];
    let mut queue: VecDeque<(usize, usize)> = (0..n).map(|s| (s, s)).collect();
    for s in 0..n {
        visited[s * n + s] = true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    while let Some((a, b)) = queue.pop_front() {
        for preds in &predecessors {
            for &pa in &preds[a] {
                for &pb in &preds[b] {
                    let (x, y) = if pa <= pb { (pa, pb) } else { (pb, pa) };
                    if visited[x * n + y] {
                        continue;
                    }
                    visited[x * n + y] = true;
                    union(&mut parent, x, y);
                    queue.push_back((x, y));
                }
            }
        }
    }
    let raw: Vec<usize> = (0..n).map(|s| find(&mut parent, s)).collect();
    QuotientMap::from_assignment(&raw)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// `Λ = {(ζ, ω, ζ′); ∃ξ ∈ 𝒬⁻¹(ζ), ξ′ ∈ 𝒬⁻¹(ζ′), (ξ, ω, ξ′) ∈ Δ}`.
pub fn build_quotient(m: &Machine, q: &QuotientMap) -> Result<QuotientMachine> {
    if q.num_states() != m.num_states() {
        return Err(Error::InvalidQuotient(format!(
            "map covers {} states, machine has {}",
            q.num_states(),
            m.num_states()
        )));
    }
    let mut seen = std::collections::HashSet::new();
    let transitions: Vec<_> = m
        .transitions()
        .iter()
        .map(|&(s, w, t)| (q.class_of(s), w, q.class_of(t)))
        .filter(|triple| seen.insert(*triple))
        .collect();
    let initial: Vec<usize> = q.image(m.initial()).iter().collect();
    let machine = Machine::from_indices(
        (0..q.num_classes()).map(QuotientMap::label).collect(),
        m.symbols().to_vec(),
        transitions,
        Some(initial),
    )?;
    Ok(QuotientMachine { machine, map: q.clone() })
}

/// Everything the quotient pipeline produced along the way.
#[derive(Debug, Clone)]
pub struct QuotientDecomposition {
    pub decomposition: Decomposition,
    pub quotient: QuotientMachine,
    pub partition: ChainPartition,
    /// Rounds of merging; 1 when the first quotient was already
    /// chain-decomposable.
    pub iterations: usize,
}

/// Quotients `m` until the result is chain-decomposable, partitions the
/// quotient into chains, and factors each chain into `p` coordinates. The
/// returned decomposition is over `m`'s own alphabet.
pub fn theorem2_decomposition(m: &Machine, p: usize) -> Result<QuotientDecomposition> {
    let mut map = lemma1_relation(m);
    let mut quotient = build_quotient(m, &map)?;
    let mut iterations = 1;
    while let Some(witness) = backward_witness(&quotient.machine) {
        if iterations > m.num_states() {
            return Err(Error::QuotientDidNotConverge { iterations, witness });
        }
        let refine = lemma1_relation(&quotient.machine);
        map = map.then(&refine);
        quotient = build_quotient(m, &map)?;
        iterations += 1;
    }
    let partition = partition_chains(&quotient.machine)?;
    let decomposition = build_decomposition(&quotient.machine, &partition, p)?;
    Ok(QuotientDecomposition { decomposition, quotient, partition, iterations })
}
