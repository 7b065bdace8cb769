//! Distributed machines `P_k = (X, V_k, Δ_k, X₀)` and the conjunctive
//! decentralized scheme: each `P_k` estimates from its aggregated
//! observation `v_k = 𝒜_k(w)` and the results are intersected.
//!
//! The intersection always contains the monolithic set; it is exact for the
//! decompositions produced by [`crate::chains`] and [`crate::quotient`].

use std::collections::BTreeSet;

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::estimator::{estimate_and_predict, Estimator};
use crate::machine::{Machine, StateSet, Trace};

#[derive(Debug, Clone)]
pub struct DistributedFamily {
    base: Machine,
    decomposition: Decomposition,
    machines: Vec<Machine>,
}

/// Builds `Δ_k = {(ξ, θ, ξ′); ∃ω ∈ 𝒜_k⁻¹(θ), (ξ, ω, ξ′) ∈ Δ}` for every map.
pub fn derive_distributed(m: &Machine, d: &Decomposition) -> Result<DistributedFamily> {
    if d.num_symbols() != m.num_symbols() {
        return Err(Error::AlphabetMismatch { expected: m.num_symbols(), found: d.num_symbols() });
    }
    let initial: Vec<usize> = m.initial().iter().collect();
    let machines = d
        .maps()
        .iter()
        .map(|map| {
            let mut seen = BTreeSet::new();
            let mut transitions = Vec::new();
            for &(s, w, t) in m.transitions() {
                let triple = (s, map.label_of(w)?, t);
                if seen.insert(triple) {
                    transitions.push(triple);
                }
            }
            Machine::from_indices(
                m.states().to_vec(),
                map.labels().to_vec(),
                transitions,
                Some(initial.clone()),
            )
        })
        .collect::<Result<_>>()?;
    Ok(DistributedFamily { base: m.clone(), decomposition: d.clone(), machines })
}

impl DistributedFamily {
    pub fn base(&self) -> &Machine {
        &self.base
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    /// The distributed machines `P_1 … P_p`.
    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    /// `v_k = 𝒜_k(w)` for every k.
    pub fn aggregate(&self, w: &Trace) -> Result<Vec<Trace>> {
        self.base.check_trace(w)?;
        self.decomposition.maps().iter().map(|map| map.aggregate_trace(w)).collect()
    }

    /// Per-machine `(χ_k(v_k), ρ_k(v_k))` before intersection.
    pub fn distributed_sets(&self, w: &Trace) -> Result<Vec<(StateSet, StateSet)>> {
        self.aggregate(w)?
            .iter()
            .zip(&self.machines)
            .map(|(v, pk)| estimate_and_predict(pk, v))
            .collect()
    }

    /// `(∩_k χ_k(v_k), ∩_k ρ_k(v_k))`.
    pub fn decentralized(&self, w: &Trace) -> Result<(StateSet, StateSet)> {
        let sets = self.distributed_sets(w)?;
        Ok(intersect_all(&self.base, &sets))
    }

    pub fn decentralized_estimate(&self, w: &Trace) -> Result<StateSet> {
        self.decentralized(w).map(|(chi, _)| chi)
    }

    pub fn decentralized_predict(&self, w: &Trace) -> Result<StateSet> {
        self.decentralized(w).map(|(_, rho)| rho)
    }

    pub fn estimator(&self) -> DecentralizedEstimator<'_> {
        DecentralizedEstimator {
            family: self,
            locals: self.machines.iter().map(Estimator::unbounded).collect(),
        }
    }
}

fn intersect_all(base: &Machine, sets: &[(StateSet, StateSet)]) -> (StateSet, StateSet) {
    sets.iter().fold((base.full_set(), base.full_set()), |(mut chi, mut rho), (c, r)| {
        chi.intersect_with(c);
        rho.intersect_with(r);
        (chi, rho)
    })
}

/// Online form of the scheme: one [`Estimator`] per distributed machine,
/// intersected once all of them have consumed the current symbol.
#[derive(Debug, Clone)]
pub struct DecentralizedEstimator<'f> {
    family: &'f DistributedFamily,
    locals: Vec<Estimator<'f>>,
}

impl DecentralizedEstimator<'_> {
    pub fn step(&mut self, symbol: usize) -> Result<()> {
        self.family.base.check_symbol(symbol)?;
        for (local, map) in self.locals.iter_mut().zip(self.family.decomposition.maps()) {
            local.step(map.label_of(symbol)?)?;
        }
        Ok(())
    }

    pub fn local_sets(&self) -> Vec<(StateSet, StateSet)> {
        self.locals.iter().map(|e| (e.chi().clone(), e.rho().clone())).collect()
    }

    pub fn chi(&self) -> StateSet {
        self.locals.iter().fold(self.family.base.full_set(), |acc, e| acc.intersection(e.chi()))
    }

    pub fn rho(&self) -> StateSet {
        self.locals.iter().fold(self.family.base.full_set(), |acc, e| acc.intersection(e.rho()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::fixtures::d_chain;
    use crate::decomposition::{AggregationMap, DEFAULT_MATERIALIZE_CAP};
    use crate::estimator::{estimate, predict};
    use crate::machine::fixtures::{m_chain, m_nc};

    fn names(m: &Machine, s: &StateSet) -> Vec<String> {
        m.state_names(s).into_iter().map(String::from).collect()
    }

    #[test]
    fn derive_chain_family() {
        let m = m_chain();
        let f = derive_distributed(&m, &d_chain()).unwrap();
        let p1 = &f.machines()[0];
        let got: Vec<_> = p1
            .transitions()
            .iter()
            .map(|&(s, l, t)| (p1.state_name(s), p1.symbol_name(l), p1.state_name(t)))
            .collect();
        assert_eq!(
            got,
            [("x1", "α1", "x2"), ("x2", "α1", "x3"), ("x3", "α2", "x4"), ("x4", "α2", "x1")]
        );
        assert_eq!(p1.initial(), m.initial());
    }

    #[test]
    fn identity_family_is_the_base_machine() {
        let m = m_chain();
        let f = derive_distributed(&m, &Decomposition::identity(m.symbols())).unwrap();
        assert_eq!(f.machines()[0], m);
    }

    #[test]
    fn constant_map_erases_symbols() {
        let m = m_nc();
        let two = Machine::new(
            m.states().to_vec(),
            vec!["a".into(), "b".into()],
            &[("x1", "a", "x3"), ("x2", "b", "x3"), ("x3", "a", "x3")],
            None,
        )
        .unwrap();
        // p = 1 with a constant map is only consistent over a one-symbol alphabet.
        let d = Decomposition::new(vec![AggregationMap::constant(1, "•")]).unwrap();
        let f = derive_distributed(&m, &d).unwrap();
        assert_eq!(f.machines()[0].transitions().len(), 3);

        let d = Decomposition::new(vec![
            AggregationMap::constant(2, "•"),
            AggregationMap::identity(two.symbols()),
        ])
        .unwrap();
        let f = derive_distributed(&two, &d).unwrap();
        let erased = &f.machines()[0];
        assert_eq!(erased.num_symbols(), 1);
        let edges: BTreeSet<_> = erased.transitions().iter().map(|&(s, _, t)| (s, t)).collect();
        assert_eq!(edges, BTreeSet::from([(0, 2), (1, 2), (2, 2)]));
    }

    #[test]
    fn mismatched_alphabet_is_rejected() {
        let m = m_nc();
        assert!(matches!(
            derive_distributed(&m, &d_chain()),
            Err(Error::AlphabetMismatch { expected: 1, found: 4 })
        ));
    }

    #[test]
    fn decentralized_chain_example() {
        let m = m_chain();
        let f = derive_distributed(&m, &d_chain()).unwrap();
        let w = m.trace(0, &["a1", "b1"]).unwrap();
        assert_eq!(names(&m, &f.decentralized_estimate(&w).unwrap()), ["x2"]);
        assert_eq!(names(&m, &f.decentralized_predict(&w).unwrap()), ["x3"]);
        let per_k: Vec<_> = f
            .distributed_sets(&w)
            .unwrap()
            .iter()
            .map(|(c, r)| (names(&m, c), names(&m, r)))
            .collect();
        let expect = (vec!["x2".to_string()], vec!["x3".to_string()]);
        assert_eq!(per_k, [expect.clone(), expect]);
    }

    #[test]
    fn identity_scheme_is_exact() {
        let m = m_nc();
        let f = derive_distributed(&m, &Decomposition::identity(m.symbols())).unwrap();
        for len in 0..4 {
            let w = Trace::from_start(vec![0; len]);
            assert_eq!(f.decentralized_estimate(&w).unwrap(), estimate(&m, &w).unwrap());
            assert_eq!(
                f.distributed_sets(&w).unwrap(),
                vec![(estimate(&m, &w).unwrap(), predict(&m, &w).unwrap())]
            );
        }
    }

    /// Two states each looping on their own symbol; erasing symbols confuses them.
    fn twin_loops() -> Machine {
        Machine::new(
            vec!["p".into(), "q".into()],
            vec!["a".into(), "b".into()],
            &[("p", "a", "p"), ("q", "b", "q")],
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_map_overapproximates() {
        let m = twin_loops();
        let d = Decomposition::new(vec![AggregationMap::constant(2, "•"), AggregationMap::identity(m.symbols())])
            .unwrap();
        let f = derive_distributed(&m, &d).unwrap();
        let erased_only = derive_distributed(&m, &Decomposition::new(vec![
            AggregationMap::constant(2, "•"),
            AggregationMap::from_labels(&["u", "v"]),
        ]).unwrap()).unwrap();
        let w = m.trace(0, &["a", "a"]).unwrap();
        let mono = estimate(&m, &w).unwrap();
        assert_eq!(f.decentralized_estimate(&w).unwrap(), mono);
        let sets = erased_only.distributed_sets(&w).unwrap();
        assert!(mono.is_subset(&sets[0].0) && sets[0].0 != mono);
    }

    #[test]
    fn rejected_component_empties_the_intersection() {
        let m = m_chain();
        let f = derive_distributed(&m, &d_chain()).unwrap();
        let w = m.trace(0, &["a1", "a1"]).unwrap();
        let sets = f.distributed_sets(&w).unwrap();
        assert!(sets[1].0.is_empty() && sets[1].1.is_empty());
        assert!(f.decentralized_estimate(&w).unwrap().is_empty());
    }

    #[test]
    fn components_match_preimage_semantics() {
        // χ_k(v_k) = ∪ { χ(w′) : w′ ∈ 𝒜_k⁻¹(v_k) }
        let m = twin_loops();
        let d = Decomposition::new(vec![AggregationMap::constant(2, "•"), AggregationMap::identity(m.symbols())])
            .unwrap();
        let f = derive_distributed(&m, &d).unwrap();
        for raw in [vec![0], vec![0, 1], vec![1, 1, 1], vec![0, 0, 1]] {
            let w = Trace::from_start(raw);
            let sets = f.distributed_sets(&w).unwrap();
            for (k, map) in d.maps().iter().enumerate() {
                let pre = map.preimage_trace(&map.aggregate_trace(&w).unwrap()).unwrap();
                let (mut chi, mut rho) = (m.empty_set(), m.empty_set());
                for member in pre.materialize(DEFAULT_MATERIALIZE_CAP).unwrap() {
                    chi.union_with(&estimate(&m, &member).unwrap());
                    rho.union_with(&predict(&m, &member).unwrap());
                }
                assert_eq!(sets[k], (chi, rho));
            }
        }
    }

    #[test]
    fn online_matches_batch() {
        let m = m_chain();
        let f = derive_distributed(&m, &d_chain()).unwrap();
        let w = m.trace(0, &["a1", "b1", "a2", "b2", "a1"]).unwrap();
        let mut online = f.estimator();
        for (i, &s) in w.symbols.iter().enumerate() {
            online.step(s).unwrap();
            let (chi, rho) = f.decentralized(&w.prefix(i + 1)).unwrap();
            assert_eq!((online.chi(), online.rho()), (chi, rho));
        }
    }
}
