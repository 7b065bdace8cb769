//! Set-valued estimation `χ(w|[τ,t])` and prediction `ρ(w|[τ,t])`.
//!
//! The batch functions and [`Estimator`] use the recursion
//!
//! ```text
//! χ(w|[τ,t]) = ρ(w|[τ,t-1]) ∩ χ(w(t))
//! ρ(w|[τ,t]) = ρ̂_{w(t)}(χ(w|[τ,t]))
//! ```
//!
//! seeded with the prior `X₀` when the window starts at time 0 and `X` for
//! any later start. The `oracle_*` functions compute the same sets by
//! composing path relations and are kept only as an independent check.
//!
//! An empty window estimates to its prior. An empty estimate is a value,
//! not an error: it means the observed string cannot be produced.

use std::collections::VecDeque;
use std::num::NonZeroUsize;

use crate::error::Result;
use crate::machine::{Machine, StateSet, Trace};

/// Prior state set at the start of a window beginning at `start`.
pub fn prior(m: &Machine, start: usize) -> StateSet {
    if start == 0 {
        m.initial().clone()
    } else {
        m.full_set()
    }
}

/// `(χ, ρ)` for the whole trace.
pub fn estimate_and_predict(m: &Machine, w: &Trace) -> Result<(StateSet, StateSet)> {
    m.check_trace(w)?;
    let mut rho = prior(m, w.start);
    let mut chi = rho.clone();
    for &sym in &w.symbols {
        chi = rho;
        chi.intersect_with(m.sources_unchecked(sym));
        rho = m.post(sym, &chi);
    }
    Ok((chi, rho))
}

pub fn estimate(m: &Machine, w: &Trace) -> Result<StateSet> {
    estimate_and_predict(m, w).map(|(chi, _)| chi)
}

pub fn predict(m: &Machine, w: &Trace) -> Result<StateSet> {
    estimate_and_predict(m, w).map(|(_, rho)| rho)
}

/// Path-enumeration estimate: states occupied at time `t` by some run that
/// starts in the prior and realizes all of `w`.
pub fn oracle_estimate(m: &Machine, w: &Trace) -> Result<StateSet> {
    m.check_trace(w)?;
    let start = prior(m, w.start);
    let Some((&last, head)) = w.symbols.split_last() else {
        return Ok(start);
    };
    let reach = m.enumerate_paths(&Trace::new(w.start, head.to_vec()))?;
    let last_step = m.enumerate_paths(&Trace::new(w.start + head.len(), vec![last]))?;
    let mut out = m.empty_set();
    for &(first, mid) in &reach {
        if start.contains(first) && last_step.iter().any(|&(from, _)| from == mid) {
            out.insert(mid);
        }
    }
    Ok(out)
}

/// Path-enumeration prediction: end states of runs realizing `w` from the prior.
pub fn oracle_predict(m: &Machine, w: &Trace) -> Result<StateSet> {
    m.check_trace(w)?;
    let start = prior(m, w.start);
    if w.is_empty() {
        return Ok(start);
    }
    let mut out = m.empty_set();
    for (first, end) in m.enumerate_paths(w)? {
        if start.contains(first) {
            out.insert(end);
        }
    }
    Ok(out)
}

/// Online estimator over an unbounded or sliding observation window.
///
/// With an unbounded window each step costs one intersection and one image.
/// A window of length `L` keeps the last `L` symbols and recomputes from
/// them, since the intersection cannot be undone once older symbols leave
/// the window.
#[derive(Debug, Clone)]
pub struct Estimator<'m> {
    machine: &'m Machine,
    window: Option<NonZeroUsize>,
    buffer: VecDeque<usize>,
    chi: StateSet,
    rho: StateSet,
    // number of symbols consumed so far; the next symbol has time index `time`
    time: usize,
}

impl<'m> Estimator<'m> {
    pub fn new(machine: &'m Machine, window: Option<NonZeroUsize>) -> Self {
        let initial = prior(machine, 0);
        Estimator {
            machine,
            window,
            buffer: VecDeque::new(),
            chi: initial.clone(),
            rho: initial,
            time: 0,
        }
    }

    pub fn unbounded(machine: &'m Machine) -> Self {
        Self::new(machine, None)
    }

    pub fn machine(&self) -> &'m Machine {
        self.machine
    }

    pub fn step(&mut self, symbol: usize) -> Result<()> {
        self.machine.check_symbol(symbol)?;
        match self.window {
            None => {
                self.chi = self.rho.intersection(self.machine.sources_unchecked(symbol));
                self.rho = self.machine.post(symbol, &self.chi);
            }
            Some(len) => {
                self.buffer.push_back(symbol);
                if self.buffer.len() > len.get() {
                    self.buffer.pop_front();
                }
                let (chi, rho) = estimate_and_predict(self.machine, &self.window_trace_after_push())?;
                self.chi = chi;
                self.rho = rho;
            }
        }
        self.time += 1;
        Ok(())
    }

    fn window_trace_after_push(&self) -> Trace {
        let start = self.time + 1 - self.buffer.len();
        Trace::new(start, self.buffer.iter().copied().collect())
    }

    /// `χ` for the current window; the prior before any step.
    pub fn chi(&self) -> &StateSet {
        &self.chi
    }

    /// `ρ` for the current window; the prior before any step.
    pub fn rho(&self) -> &StateSet {
        &self.rho
    }

    /// Time index of the most recent symbol, if any.
    pub fn time(&self) -> Option<usize> {
        self.time.checked_sub(1)
    }

    /// Start `τ` of the current window.
    pub fn window_start(&self) -> usize {
        match self.window {
            None => 0,
            Some(_) => self.time - self.buffer.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::fixtures::{m_chain, m_nc};

    fn names(m: &Machine, s: &StateSet) -> Vec<String> {
        m.state_names(s).into_iter().map(String::from).collect()
    }

    #[test]
    fn batch_examples() {
        let m = m_chain();
        let w = m.trace(0, &["a1", "b1"]).unwrap();
        assert_eq!(names(&m, &estimate(&m, &w).unwrap()), ["x2"]);
        assert_eq!(names(&m, &predict(&m, &w).unwrap()), ["x3"]);

        let bad = m.trace(0, &["a1", "a1"]).unwrap();
        assert!(estimate(&m, &bad).unwrap().is_empty());
        assert!(predict(&m, &bad).unwrap().is_empty());

        let nc = m_nc();
        assert_eq!(names(&nc, &predict(&nc, &Trace::from_start(vec![0])).unwrap()), ["x3"]);
    }

    #[test]
    fn single_symbol_estimate_is_chi_single() {
        let m = m_chain();
        for w in 0..m.num_symbols() {
            let est = estimate(&m, &Trace::from_start(vec![w])).unwrap();
            assert_eq!(&est, m.chi_single(w).unwrap());
        }
    }

    #[test]
    fn oracle_examples() {
        let m = m_chain();
        let w = m.trace(0, &["a1", "b1"]).unwrap();
        assert_eq!(names(&m, &oracle_estimate(&m, &w).unwrap()), ["x2"]);
        assert_eq!(names(&m, &oracle_predict(&m, &w).unwrap()), ["x3"]);

        let nc = m_nc();
        let aa = Trace::from_start(vec![0, 0]);
        assert_eq!(names(&nc, &oracle_estimate(&nc, &aa).unwrap()), ["x3"]);
        assert_eq!(names(&nc, &oracle_predict(&nc, &aa).unwrap()), ["x3"]);

        let bad = m.trace(0, &["b2", "b2"]).unwrap();
        assert!(oracle_estimate(&m, &bad).unwrap().is_empty());
        assert!(oracle_predict(&m, &bad).unwrap().is_empty());
    }

    #[test]
    fn unknown_symbol_is_an_error() {
        let m = m_chain();
        assert!(estimate(&m, &Trace::from_start(vec![7])).is_err());
        assert!(oracle_estimate(&m, &Trace::from_start(vec![7])).is_err());
        assert!(Estimator::unbounded(&m).step(7).is_err());
    }

    #[test]
    fn empty_window_is_the_prior() {
        let m = m_chain().with_initial(StateSet::from_indices(4, [0])).unwrap();
        assert_eq!(estimate(&m, &Trace::default()).unwrap(), StateSet::from_indices(4, [0]));
        assert_eq!(estimate(&m, &Trace::new(3, vec![])).unwrap(), m.full_set());
    }

    #[test]
    fn initial_set_only_constrains_windows_starting_at_zero() {
        let m = m_chain().with_initial(StateSet::from_indices(4, [1])).unwrap();
        let a1 = m.symbol_id("a1").unwrap();
        assert!(estimate(&m, &Trace::new(0, vec![a1])).unwrap().is_empty());
        assert_eq!(estimate(&m, &Trace::new(1, vec![a1])).unwrap(), StateSet::from_indices(4, [0]));
    }

    #[test]
    fn online_matches_batch() {
        let m = m_chain();
        let mut est = Estimator::unbounded(&m);
        est.step(m.symbol_id("a1").unwrap()).unwrap();
        est.step(m.symbol_id("b1").unwrap()).unwrap();
        assert_eq!(names(&m, est.chi()), ["x2"]);
        assert_eq!(names(&m, est.rho()), ["x3"]);
        assert_eq!(est.time(), Some(1));
    }

    #[test]
    fn empty_estimate_persists_then_window_recovers() {
        let m = m_chain();
        let a1 = m.symbol_id("a1").unwrap();
        let b1 = m.symbol_id("b1").unwrap();

        let mut unbounded = Estimator::unbounded(&m);
        for s in [a1, a1, b1] {
            unbounded.step(s).unwrap();
        }
        assert!(unbounded.chi().is_empty() && unbounded.rho().is_empty());

        let mut windowed = Estimator::new(&m, NonZeroUsize::new(2));
        windowed.step(a1).unwrap();
        windowed.step(a1).unwrap();
        assert!(windowed.chi().is_empty());
        windowed.step(b1).unwrap();
        assert_eq!(names(&m, windowed.chi()), ["x2"]);
        assert_eq!(windowed.window_start(), 1);
    }

    #[test]
    fn unit_window_forgets_everything_but_the_last_symbol() {
        let m = m_nc();
        let mut est = Estimator::new(&m, NonZeroUsize::new(1));
        for _ in 0..3 {
            est.step(0).unwrap();
            assert_eq!(est.chi(), m.chi_single(0).unwrap());
        }
    }
}
