//! Seeded random machines and executable property suites.
//!
//! Every suite derives one seed per trial from the configured seed, so a
//! failure is replayed by regenerating the machine from
//! [`Failure::seed`] with [`GenConfig::with_seed`]. Property violations are
//! collected in the [`Report`], never returned as errors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chains::{backward_witness, build_decomposition, check_chain_decomposable, partition_chains};
use crate::decomposition::{AggregationMap, Decomposition};
use crate::distributed::{derive_distributed, DistributedFamily};
use crate::error::{Error, Result};
use crate::estimator::{estimate_and_predict, oracle_estimate, oracle_predict, Estimator};
use crate::machine::{Machine, StateSet, Trace};
use crate::quotient::theorem2_decomposition;

const GENERATION_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    /// Inclusive bounds on `|X|`.
    pub states: (usize, usize),
    /// Inclusive bounds on `|W|`.
    pub symbols: (usize, usize),
    /// Inclusive bounds on the probability of each candidate triple.
    pub density: (f64, f64),
    pub force_chain_decomposable: bool,
    pub force_non_injective: bool,
    pub force_non_blocking: bool,
    /// Draw `X₀` as a random non-empty subset instead of `X`.
    pub random_initial: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            states: (2, 8),
            symbols: (1, 6),
            density: (0.1, 0.5),
            force_chain_decomposable: false,
            force_non_injective: false,
            force_non_blocking: false,
            random_initial: false,
        }
    }
}

impl GenConfig {
    pub fn with_seed(&self, seed: u64) -> GenConfig {
        GenConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, (lo, hi)) in [("state", self.states), ("symbol", self.symbols)] {
            if lo == 0 || lo > hi {
                return bad(format!("{name} count bounds [{lo}, {hi}] must be positive and ordered"));
            }
        }
        let (dlo, dhi) = self.density;
        if !(0.0..=1.0).contains(&dlo) || !(0.0..=1.0).contains(&dhi) || dlo > dhi {
            return bad(format!("density bounds [{dlo}, {dhi}] must be ordered within [0, 1]"));
        }
        if self.force_chain_decomposable && self.force_non_injective {
            return Err(Error::Unsatisfiable(
                "a machine cannot be both chain-decomposable and non-injective".into(),
            ));
        }
        if self.force_non_injective && self.states.1 < 2 {
            return Err(Error::Unsatisfiable("a non-injective machine needs at least two states".into()));
        }
        Ok(())
    }
}

/// Seed of trial `trial` under base seed `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng.next_u64()
}

/// Draws a machine with states `x1…` and symbols `w1…`.
pub fn random_machine(c: &GenConfig) -> Result<Machine> {
    c.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    for _ in 0..GENERATION_ATTEMPTS {
        if let Some(m) = draw(c, &mut rng) {
            return Ok(m);
        }
    }
    Err(Error::Unsatisfiable(format!(
        "no machine satisfying the forcing flags after {GENERATION_ATTEMPTS} attempts"
    )))
}

fn draw(c: &GenConfig, rng: &mut ChaCha8Rng) -> Option<Machine> {
    let min_states = if c.force_non_injective { c.states.0.max(2) } else { c.states.0 };
    let n = rng.gen_range(min_states..=c.states.1);
    let m = rng.gen_range(c.symbols.0..=c.symbols.1);
    let density = rng.gen_range(c.density.0..=c.density.1);

    // edges[w][s] = sorted targets
    let mut edges = vec![vec![BTreeSet::new(); n]; m];
    for per_symbol in edges.iter_mut() {
        for targets in per_symbol.iter_mut() {
            for t in 0..n {
                if rng.gen_bool(density) {
                    targets.insert(t);
                }
            }
        }
    }

    if c.force_chain_decomposable {
        for per_symbol in edges.iter_mut() {
            make_backward_injective(per_symbol, rng);
        }
    }
    if c.force_non_injective {
        let w = rng.gen_range(0..m);
        let mut pair: Vec<usize> = (0..n).collect();
        pair.shuffle(rng);
        let t = rng.gen_range(0..n);
        edges[w][pair[0]].insert(t);
        edges[w][pair[1]].insert(t);
    }
    if c.force_non_blocking {
        for s in 0..n {
            if edges.iter().any(|per_symbol| !per_symbol[s].is_empty()) {
                continue;
            }
            let mut options: Vec<(usize, usize)> = (0..m)
                .flat_map(|w| (0..n).map(move |t| (w, t)))
                .filter(|&(w, t)| !c.force_chain_decomposable || edges[w].iter().all(|ts| !ts.contains(&t)))
                .collect();
            options.shuffle(rng);
            let &(w, t) = options.first()?;
            edges[w][s].insert(t);
        }
    }

    let mut transitions = Vec::new();
    for (w, per_symbol) in edges.iter().enumerate() {
        for (s, targets) in per_symbol.iter().enumerate() {
            transitions.extend(targets.iter().map(|&t| (s, w, t)));
        }
    }
    transitions.sort_unstable();
    let initial = c.random_initial.then(|| {
        let mut set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if set.is_empty() {
            set.push(rng.gen_range(0..n));
        }
        set
    });
    let machine = Machine::from_indices(
        (1..=n).map(|i| format!("x{i}")).collect(),
        (1..=m).map(|i| format!("w{i}")).collect(),
        transitions,
        initial,
    )
    .expect("generated indices are in range and unique");

    let injective = backward_witness(&machine).is_none();
    let ok = (!c.force_chain_decomposable || injective)
        && (!c.force_non_injective || !injective)
        && (!c.force_non_blocking || machine.is_non_blocking());
    ok.then_some(machine)
}

/// Keeps one source per target and moves the other transitions to targets
/// nobody enters yet, dropping them when none is left.
fn make_backward_injective(per_symbol: &mut [BTreeSet<usize>], rng: &mut ChaCha8Rng) {
    let n = per_symbol.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut displaced = Vec::new();
    for (s, targets) in per_symbol.iter_mut().enumerate() {
        for t in targets.clone() {
            match owner[t] {
                None => owner[t] = Some(s),
                Some(_) => {
                    targets.remove(&t);
                    displaced.push(s);
                }
            }
        }
    }
    for s in displaced {
        let free: Vec<usize> = (0..n).filter(|&t| owner[t].is_none()).collect();
        if let Some(&t) = free.choose(rng) {
            owner[t] = Some(s);
            per_symbol[s].insert(t);
        }
    }
}

/// A property violation with everything needed to replay it.
#[derive(Debug, Clone)]
pub struct Failure {
    /// Trial seed; the machine is `random_machine(&config.with_seed(seed))`.
    pub seed: u64,
    pub machine: Machine,
    pub decomposition: Option<Decomposition>,
    pub trace: Trace,
    /// Which quantity broke, e.g. `chi` or `rho`.
    pub quantity: String,
    pub expected: Vec<String>,
    pub got: Vec<String>,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.machine;
        writeln!(f, "FAILURE seed={} {}", self.seed, self.message)?;
        writeln!(f, "  states: {}", m.states().join(" "))?;
        writeln!(f, "  symbols: {}", m.symbols().join(" "))?;
        writeln!(f, "  initial: {}", m.state_names(m.initial()).join(" "))?;
        let triples: Vec<String> = m
            .transitions()
            .iter()
            .map(|&(s, w, t)| format!("({} {} {})", m.state_name(s), m.symbol_name(w), m.state_name(t)))
            .collect();
        writeln!(f, "  transitions: {}", triples.join(" "))?;
        if let Some(d) = &self.decomposition {
            for (k, map) in d.maps().iter().enumerate() {
                let pairs: Vec<String> = (0..map.num_symbols())
                    .map(|w| format!("{}->{}", m.symbol_name(w), map.label_name(map.label_of(w).unwrap_or(0))))
                    .collect();
                writeln!(f, "  map {}: {}", k + 1, pairs.join(" "))?;
            }
        }
        let names: Vec<&str> = self.trace.symbols.iter().map(|&w| m.symbol_name(w)).collect();
        writeln!(f, "  trace: tau={} [{}]", self.trace.start, names.join(" "))?;
        writeln!(f, "  {}: expected [{}] got [{}]", self.quantity, self.expected.join(" "), self.got.join(" "))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub property: String,
    pub instances: usize,
    pub failures: Vec<Failure>,
    /// Named tallies such as `checks` or `strict_inclusions`.
    pub counters: BTreeMap<String, u64>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(property: &str) -> Self {
        Report { property: property.to_owned(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn counter(&self, name: &str) -> u64 {
        self.counters.get(name).copied().unwrap_or(0)
    }

    fn bump(&mut self, name: &str, by: u64) {
        *self.counters.entry(name.to_owned()).or_default() += by;
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {}: instances={} failures={} {}",
            self.property,
            self.instances,
            self.failures.len(),
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for (name, value) in &self.counters {
            writeln!(f, "  {name}={value}")?;
        }
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        for failure in &self.failures {
            write!(f, "{failure}")?;
        }
        Ok(())
    }
}

/// Drops leading and trailing symbols while `fails` keeps holding.
/// Dropping a leading symbol keeps the absolute time of the rest.
pub fn shrink(trace: &Trace, mut fails: impl FnMut(&Trace) -> bool) -> Trace {
    let mut current = trace.clone();
    loop {
        if current.len() > 1 {
            let shorter = current.suffix(1);
            if fails(&shorter) {
                current = shorter;
                continue;
            }
            let shorter = current.prefix(current.len() - 1);
            if fails(&shorter) {
                current = shorter;
                continue;
            }
        }
        return current;
    }
}

fn names(m: &Machine, set: &StateSet) -> Vec<String> {
    m.state_names(set).into_iter().map(str::to_owned).collect()
}

/// A random run of up to `len` steps from an initial state. `None` when the
/// machine blocks before the first step.
fn accepted_walk(m: &Machine, rng: &mut ChaCha8Rng, len: usize) -> Option<Trace> {
    let initial: Vec<usize> = m.initial().iter().collect();
    let mut state = *initial.choose(rng)?;
    let mut symbols = Vec::with_capacity(len);
    for _ in 0..len {
        let moves: Vec<(usize, usize)> = (0..m.num_symbols())
            .flat_map(|w| m.successors(w, state).iter().map(move |&t| (w, t)))
            .collect();
        let Some(&(w, t)) = moves.choose(rng) else { break };
        symbols.push(w);
        state = t;
    }
    (!symbols.is_empty()).then(|| Trace::from_start(symbols))
}

/// Every accepted trace of length `1..=max_len` from time 0, and every
/// rejected trace whose proper prefixes are all accepted.
fn enumerate_traces(m: &Machine, max_len: usize) -> Result<(Vec<Trace>, Vec<Trace>)> {
    fn walk(
        m: &Machine,
        est: &Estimator<'_>,
        path: &mut Vec<usize>,
        max_len: usize,
        found: &mut (Vec<Trace>, Vec<Trace>),
    ) -> Result<()> {
        for w in 0..m.num_symbols() {
            let mut next = est.clone();
            next.step(w)?;
            path.push(w);
            if next.chi().is_empty() {
                found.1.push(Trace::from_start(path.clone()));
            } else {
                found.0.push(Trace::from_start(path.clone()));
                if path.len() < max_len {
                    walk(m, &next, path, max_len, found)?;
                }
            }
            path.pop();
        }
        Ok(())
    }
    let mut found = (Vec::new(), Vec::new());
    walk(m, &Estimator::unbounded(m), &mut Vec::new(), max_len, &mut found)?;
    Ok(found)
}

/// `base` and all its continuations up to `max_len` symbols.
fn extend_all(base: &Trace, num_symbols: usize, max_len: usize, out: &mut BTreeSet<Trace>) {
    out.insert(base.clone());
    if base.len() < max_len {
        for w in 0..num_symbols {
            let mut next = base.clone();
            next.symbols.push(w);
            extend_all(&next, num_symbols, max_len, out);
        }
    }
}

pub type EstimatorFn = fn(&Machine, &Trace) -> Result<(StateSet, StateSet)>;

pub const ORACLE_ACCEPTED: usize = 50;
pub const ORACLE_REJECTED: usize = 5;
pub const ORACLE_MAX_LEN: usize = 5;

/// The recursive estimator agrees with the path-composition definition.
pub fn verify_oracle(c: &GenConfig, trials: usize) -> Result<Report> {
    verify_oracle_with(c, trials, estimate_and_predict)
}

/// [`verify_oracle`] against an arbitrary estimator.
pub fn verify_oracle_with(c: &GenConfig, trials: usize, estimator: EstimatorFn) -> Result<Report> {
    c.validate()?;
    let mut report = Report::new("oracle");
    let mut universal = 0;
    for trial in 0..trials {
        let seed = trial_seed(c.seed, trial);
        let m = random_machine(&c.with_seed(seed))?;
        report.instances += 1;
        let quota = oracle_check(&m, seed, estimator, &mut report)?;
        if quota.rejected == 0 {
            universal += 1;
        }
    }
    if universal > 0 {
        report.notes.push(format!(
            "{universal} machine(s) accept every trace of length <= {ORACLE_MAX_LEN}; no rejected trace exists for them"
        ));
    }
    Ok(report)
}

/// Like [`verify_oracle`], but draws machines until `machines` of them
/// supply the full quota of accepted and rejected traces. Machines short
/// of the quota are still checked and counted under `short_machines`.
pub fn verify_oracle_quota(c: &GenConfig, machines: usize, max_draws: usize) -> Result<Report> {
    c.validate()?;
    let mut report = Report::new("oracle-quota");
    report.counters.insert("short_machines".into(), 0);
    let mut trial = 0;
    while report.instances < machines && trial < max_draws {
        let seed = trial_seed(c.seed, trial);
        trial += 1;
        let m = random_machine(&c.with_seed(seed))?;
        let quota = oracle_check(&m, seed, estimate_and_predict, &mut report)?;
        if quota.accepted >= ORACLE_ACCEPTED && quota.rejected >= ORACLE_REJECTED {
            report.instances += 1;
        } else {
            report.bump("short_machines", 1);
        }
    }
    report.bump("draws", trial as u64);
    if report.instances < machines {
        report.notes.push(format!("only {} of {machines} machines met the quota within {max_draws} draws", report.instances));
    }
    Ok(report)
}

struct Quota {
    accepted: usize,
    rejected: usize,
}

/// Checks one machine against the oracle and records counters and any
/// failure in `report`.
fn oracle_check(m: &Machine, seed: u64, estimator: EstimatorFn, report: &mut Report) -> Result<Quota> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
    let (all_accepted, minimal_rejected) = enumerate_traces(m, ORACLE_MAX_LEN)?;
    let accepted: Vec<Trace> = if all_accepted.len() <= ORACLE_ACCEPTED {
        all_accepted
    } else {
        all_accepted.choose_multiple(&mut rng, ORACLE_ACCEPTED).cloned().collect()
    };
    // Rejected traces stay rejected under any continuation.
    let k = m.num_symbols() as u128;
    let available: u128 =
        minimal_rejected.iter().map(|w| k.pow((ORACLE_MAX_LEN - w.len()) as u32 + 1) / k.max(1)).sum();
    let mut rejected = BTreeSet::new();
    if available <= ORACLE_REJECTED as u128 {
        for base in &minimal_rejected {
            extend_all(base, m.num_symbols(), ORACLE_MAX_LEN, &mut rejected);
        }
    } else {
        while rejected.len() < ORACLE_REJECTED {
            let mut w = minimal_rejected.choose(&mut rng).expect("some rejection exists").clone();
            let len = rng.gen_range(w.len()..=ORACLE_MAX_LEN);
            while w.len() < len {
                w.symbols.push(rng.gen_range(0..m.num_symbols()));
            }
            rejected.insert(w);
        }
    }
    let quota = Quota { accepted: accepted.len(), rejected: rejected.len() };
    if quota.accepted < ORACLE_ACCEPTED {
        report.bump("accepted_quota_exhausted", 1);
    }
    if quota.rejected < ORACLE_REJECTED {
        report.bump("rejected_quota_exhausted", 1);
    }
    report.bump("accepted_traces", quota.accepted as u64);
    report.bump("rejected_traces", quota.rejected as u64);

    let mut traces: Vec<Trace> = accepted.into_iter().chain(rejected).collect();
    // Later windows of the same strings exercise the prior X.
    let windows: Vec<Trace> = traces.iter().filter(|w| w.len() > 1).map(|w| w.suffix(1)).collect();
    traces.extend(windows);

    for w in traces {
        report.bump("checks", 1);
        let (chi, rho) = estimator(m, &w)?;
        let (want_chi, want_rho) = (oracle_estimate(m, &w)?, oracle_predict(m, &w)?);
        let broken = if chi != want_chi {
            Some("chi")
        } else if rho != want_rho {
            Some("rho")
        } else {
            None
        };
        if let Some(quantity) = broken {
            let differs = |t: &Trace| {
                let (c, r) = estimator(m, t).expect("trace symbols are in range");
                match quantity {
                    "chi" => c != oracle_estimate(m, t).expect("in range"),
                    _ => r != oracle_predict(m, t).expect("in range"),
                }
            };
            let trace = shrink(&w, differs);
            let (chi, rho) = estimator(m, &trace)?;
            let (expected, got) = if quantity == "chi" {
                (oracle_estimate(m, &trace)?, chi)
            } else {
                (oracle_predict(m, &trace)?, rho)
            };
            report.failures.push(Failure {
                seed,
                machine: m.clone(),
                decomposition: None,
                trace,
                quantity: quantity.into(),
                expected: names(m, &expected),
                got: names(m, &got),
                message: "estimator disagrees with the path oracle".into(),
            });
            break;
        }
    }
    Ok(quota)
}

pub const MONOTONE_TRACES: usize = 20;
pub const MONOTONE_MAX_LEN: usize = 8;

/// Longer windows never produce larger sets: for `τ ≤ τ′ ≤ t`,
/// `χ(w|[τ,t]) ⊆ χ(w|[τ′,t])` and likewise for `ρ`.
pub fn verify_monotonicity(c: &GenConfig, trials: usize) -> Result<Report> {
    c.validate()?;
    let mut report = Report::new("monotone");
    for trial in 0..trials {
        let seed = trial_seed(c.seed, trial);
        let m = random_machine(&c.with_seed(seed))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        report.instances += 1;
        'traces: for i in 0..MONOTONE_TRACES {
            let len = rng.gen_range(1..=MONOTONE_MAX_LEN);
            // Mostly accepted runs, with some arbitrary strings mixed in.
            let w = match (i % 4, accepted_walk(&m, &mut rng, len)) {
                (0, _) | (_, None) => Trace::from_start((0..len).map(|_| rng.gen_range(0..m.num_symbols())).collect()),
                (_, Some(w)) => w,
            };
            for t in 0..w.len() {
                let upto = w.prefix(t + 1);
                let sets: Vec<(StateSet, StateSet)> =
                    (0..=t).map(|tau| estimate_and_predict(&m, &upto.suffix(tau))).collect::<Result<_>>()?;
                for tau in 0..=t {
                    for tau2 in tau..=t {
                        report.bump("checks", 1);
                        for (quantity, small, large) in [
                            ("chi", &sets[tau].0, &sets[tau2].0),
                            ("rho", &sets[tau].1, &sets[tau2].1),
                        ] {
                            if !small.is_subset(large) {
                                report.failures.push(Failure {
                                    seed,
                                    machine: m.clone(),
                                    decomposition: None,
                                    trace: upto.clone(),
                                    quantity: quantity.into(),
                                    expected: names(&m, large),
                                    got: names(&m, small),
                                    message: format!(
                                        "window from {tau} is not contained in the window from {tau2}"
                                    ),
                                });
                                break 'traces;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// A random consistent decomposition into 2 or 3 maps. The last map
/// separates whatever the earlier ones leave together.
pub fn random_decomposition(num_symbols: usize, rng: &mut ChaCha8Rng) -> Decomposition {
    let p = rng.gen_range(2..=3);
    let coarse = (num_symbols / 2).max(1);
    let mut per_map: Vec<Vec<String>> = Vec::with_capacity(p);
    for k in 1..p {
        let labels = rng.gen_range(1..=coarse);
        per_map.push((0..num_symbols).map(|_| format!("v{k}_{}", rng.gen_range(1..=labels))).collect());
    }
    let mut seen: BTreeMap<Vec<&String>, usize> = BTreeMap::new();
    let last: Vec<String> = (0..num_symbols)
        .map(|w| {
            let key: Vec<&String> = per_map.iter().map(|labels| &labels[w]).collect();
            let slot = seen.entry(key).or_insert(0);
            *slot += 1;
            format!("v{p}_{slot}")
        })
        .collect();
    per_map.push(last);
    Decomposition::new(per_map.iter().map(|labels| AggregationMap::from_labels(labels)).collect())
        .expect("the last map separates all collisions")
}

pub const OVERAPPROX_MAX_LEN: usize = 6;

/// The conjunctive scheme contains the monolithic sets.
pub fn verify_overapprox(c: &GenConfig, trials: usize) -> Result<Report> {
    c.validate()?;
    let mut report = Report::new("overapprox");
    report.counters.insert("strict_inclusions".into(), 0);
    for trial in 0..trials {
        let seed = trial_seed(c.seed, trial);
        let m = random_machine(&c.with_seed(seed))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        report.instances += 1;
        let d = random_decomposition(m.num_symbols(), &mut rng);
        let family = derive_distributed(&m, &d)?;
        let len = rng.gen_range(1..=OVERAPPROX_MAX_LEN);
        let w = match accepted_walk(&m, &mut rng, len) {
            Some(w) if rng.gen_bool(0.9) => w,
            _ => Trace::from_start((0..len).map(|_| rng.gen_range(0..m.num_symbols())).collect()),
        };
        report.bump("checks", 1);
        let mono = estimate_and_predict(&m, &w)?;
        let dec = family.decentralized(&w)?;
        let mut strict = false;
        for (quantity, small, large) in [("chi", &mono.0, &dec.0), ("rho", &mono.1, &dec.1)] {
            if !small.is_subset(large) {
                let trace = shrink(&w, |t| {
                    let mono = estimate_and_predict(&m, t).expect("in range");
                    let dec = family.decentralized(t).expect("in range");
                    !mono.0.is_subset(&dec.0) || !mono.1.is_subset(&dec.1)
                });
                report.failures.push(Failure {
                    seed,
                    machine: m.clone(),
                    decomposition: Some(d.clone()),
                    trace,
                    quantity: quantity.into(),
                    expected: names(&m, small),
                    got: names(&m, large),
                    message: "decentralized set misses monolithic states".into(),
                });
                break;
            }
            strict |= small != large;
        }
        if strict {
            report.bump("strict_inclusions", 1);
        }
    }
    Ok(report)
}

/// Compares the monolithic and decentralized estimators on every trace of
/// length at most `max_len` whose prefixes are all accepted, plus each
/// one-symbol extension that is rejected. Returns the first mismatch.
fn exact_on_accepted(
    m: &Machine,
    family: &DistributedFamily,
    max_len: usize,
    checks: &mut u64,
) -> Result<Option<(Trace, &'static str)>> {
    fn walk(
        m: &Machine,
        mono: &Estimator<'_>,
        dec: &crate::distributed::DecentralizedEstimator<'_>,
        path: &mut Vec<usize>,
        max_len: usize,
        checks: &mut u64,
    ) -> Result<Option<(Trace, &'static str)>> {
        for w in 0..m.num_symbols() {
            let (mut mono, mut dec) = (mono.clone(), dec.clone());
            mono.step(w)?;
            dec.step(w)?;
            path.push(w);
            *checks += 1;
            let mismatch = if *mono.chi() != dec.chi() {
                Some("chi")
            } else if *mono.rho() != dec.rho() {
                Some("rho")
            } else {
                None
            };
            if let Some(q) = mismatch {
                return Ok(Some((Trace::from_start(path.clone()), q)));
            }
            if !mono.chi().is_empty() && path.len() < max_len {
                if let Some(found) = walk(m, &mono, &dec, path, max_len, checks)? {
                    return Ok(Some(found));
                }
            }
            path.pop();
        }
        Ok(None)
    }
    walk(m, &Estimator::unbounded(m), &family.estimator(), &mut Vec::new(), max_len, checks)
}

fn exactness_failure(
    seed: u64,
    m: &Machine,
    family: &DistributedFamily,
    trace: Trace,
    quantity: &str,
    message: String,
) -> Result<Failure> {
    let differs = |t: &Trace| {
        let mono = estimate_and_predict(m, t).expect("in range");
        let dec = family.decentralized(t).expect("in range");
        if quantity == "chi" { mono.0 != dec.0 } else { mono.1 != dec.1 }
    };
    let trace = shrink(&trace, differs);
    let mono = estimate_and_predict(m, &trace)?;
    let dec = family.decentralized(&trace)?;
    let (expected, got) = if quantity == "chi" { (mono.0, dec.0) } else { (mono.1, dec.1) };
    Ok(Failure {
        seed,
        machine: m.clone(),
        decomposition: Some(family.decomposition().clone()),
        trace,
        quantity: quantity.into(),
        expected: names(m, &expected),
        got: names(m, &got),
        message,
    })
}

pub const T1_MAX_LEN: usize = 6;
pub const T1_COORDINATES: [usize; 3] = [1, 2, 3];

/// Chain-wise decompositions of chain-decomposable machines are exact.
/// The configuration is forced chain-decomposable.
pub fn verify_exactness_t1(c: &GenConfig, trials: usize) -> Result<Report> {
    let c = GenConfig { force_chain_decomposable: true, force_non_injective: false, ..c.clone() };
    c.validate()?;
    let mut report = Report::new("t1");
    for trial in 0..trials {
        let seed = trial_seed(c.seed, trial);
        let m = random_machine(&c.with_seed(seed))?;
        report.instances += 1;
        let partition = partition_chains(&m)?;
        report.bump("chains", partition.len() as u64);
        for p in T1_COORDINATES {
            let d = build_decomposition(&m, &partition, p)?;
            let family = derive_distributed(&m, &d)?;
            let mut checks = 0;
            let mismatch = exact_on_accepted(&m, &family, T1_MAX_LEN, &mut checks)?;
            report.bump("checks", checks);
            if let Some((trace, quantity)) = mismatch {
                let message = format!("decentralized differs from monolithic with p={p}");
                report.failures.push(exactness_failure(seed, &m, &family, trace, quantity, message)?);
                break;
            }
        }
    }
    Ok(report)
}

pub const T2_MAX_LEN: usize = 5;

/// Decompositions built through the quotient pipeline are exact, even for
/// machines that are not chain-decomposable. The configuration is forced
/// non-injective; `p` cycles through 1, 2, 3.
pub fn verify_exactness_t2(c: &GenConfig, trials: usize) -> Result<Report> {
    let c = GenConfig { force_chain_decomposable: false, force_non_injective: true, ..c.clone() };
    c.validate()?;
    let mut report = Report::new("t2");
    for trial in 0..trials {
        let seed = trial_seed(c.seed, trial);
        let m = random_machine(&c.with_seed(seed))?;
        report.instances += 1;
        let p = 1 + trial % 3;
        let qd = match theorem2_decomposition(&m, p) {
            Ok(qd) => qd,
            Err(err) => {
                report.failures.push(Failure {
                    seed,
                    machine: m.clone(),
                    decomposition: None,
                    trace: Trace::default(),
                    quantity: "quotient".into(),
                    expected: vec![],
                    got: vec![],
                    message: err.to_string(),
                });
                continue;
            }
        };
        if let Err(err) = check_chain_decomposable(&qd.quotient.machine) {
            report.failures.push(Failure {
                seed,
                machine: m.clone(),
                decomposition: Some(qd.decomposition.clone()),
                trace: Trace::default(),
                quantity: "quotient".into(),
                expected: vec![],
                got: vec![],
                message: err.to_string(),
            });
            continue;
        }
        report.bump("quotient_classes", qd.quotient.map.num_classes() as u64);
        if qd.iterations > 1 {
            report.bump("extra_iterations", 1);
            report.notes.push(format!("seed {seed}: quotient needed {} merging rounds", qd.iterations));
        }
        let family = derive_distributed(&m, &qd.decomposition)?;
        let mut checks = 0;
        let mismatch = exact_on_accepted(&m, &family, T2_MAX_LEN, &mut checks)?;
        report.bump("checks", checks);
        if let Some((trace, quantity)) = mismatch {
            let message = format!("decentralized differs from monolithic with p={p}");
            report.failures.push(exactness_failure(seed, &m, &family, trace, quantity, message)?);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Overapprox,
    T1,
    T2,
    Monotone,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Overapprox, Suite::T1, Suite::T2, Suite::Monotone, Suite::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Overapprox => "overapprox",
            Suite::T1 => "t1",
            Suite::T2 => "t2",
            Suite::Monotone => "monotone",
            Suite::Oracle => "oracle",
        }
    }

    /// Desk-scale generator settings for the suite.
    pub fn config(self, seed: u64) -> GenConfig {
        let base = GenConfig { seed, random_initial: true, ..GenConfig::default() };
        match self {
            Suite::Oracle => GenConfig { states: (1, 12), symbols: (1, 10), ..base },
            Suite::Monotone | Suite::Overapprox => GenConfig { states: (1, 10), symbols: (1, 8), ..base },
            Suite::T1 => GenConfig { states: (1, 8), symbols: (1, 6), force_chain_decomposable: true, ..base },
            Suite::T2 => GenConfig { states: (2, 10), symbols: (1, 8), force_non_injective: true, ..base },
        }
    }

    pub fn run(self, c: &GenConfig, trials: usize) -> Result<Report> {
        match self {
            Suite::Overapprox => verify_overapprox(c, trials),
            Suite::T1 => verify_exactness_t1(c, trials),
            Suite::T2 => verify_exactness_t2(c, trials),
            Suite::Monotone => verify_monotonicity(c, trials),
            Suite::Oracle => verify_oracle(c, trials),
        }
    }
}

/// Deliberately broken estimators for exercising the suites.
#[doc(hidden)]
pub mod faults {
    use super::*;
    use crate::estimator::prior;

    /// Propagates `ρ` without intersecting it with `χ(w(t))`.
    pub fn skip_intersection(m: &Machine, w: &Trace) -> Result<(StateSet, StateSet)> {
        m.check_trace(w)?;
        let mut chi = prior(m, w.start);
        let mut rho = chi.clone();
        for &symbol in &w.symbols {
            chi = rho;
            rho = m.rho_hat(&[symbol], &chi)?;
        }
        Ok((chi, rho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small(seed: u64) -> GenConfig {
        GenConfig { seed, states: (4, 4), symbols: (3, 3), density: (0.3, 0.3), ..GenConfig::default() }
    }

    #[test]
    fn forced_chain_decomposable_passes_the_check() {
        for seed in 0..50 {
            let c = GenConfig { force_chain_decomposable: true, ..small(seed) };
            let m = random_machine(&c).unwrap();
            assert!(check_chain_decomposable(&m).is_ok(), "seed {seed}");
        }
        let c = GenConfig { force_chain_decomposable: true, ..small(1) };
        assert!(check_chain_decomposable(&random_machine(&c).unwrap()).is_ok());
    }

    #[test]
    fn generation_is_deterministic() {
        let c = GenConfig { force_chain_decomposable: true, ..small(1) };
        assert_eq!(random_machine(&c).unwrap(), random_machine(&c).unwrap());
        assert_ne!(random_machine(&small(1)).unwrap(), random_machine(&small(2)).unwrap());
    }

    #[test]
    fn forced_non_injective_has_a_witness() {
        for seed in 0..50 {
            let c = GenConfig { force_non_injective: true, ..small(seed) };
            assert!(backward_witness(&random_machine(&c).unwrap()).is_some(), "seed {seed}");
        }
    }

    #[test]
    fn forced_non_blocking() {
        for seed in 0..50 {
            let c = GenConfig { force_non_blocking: true, density: (0.0, 0.05), ..small(seed) };
            assert!(random_machine(&c).unwrap().is_non_blocking(), "seed {seed}");
            let c = GenConfig { force_chain_decomposable: true, ..c };
            let m = random_machine(&c).unwrap();
            assert!(m.is_non_blocking() && backward_witness(&m).is_none(), "seed {seed}");
        }
    }

    #[test]
    fn dense_chain_forcing_still_succeeds() {
        let c = GenConfig { density: (1.0, 1.0), force_chain_decomposable: true, ..small(3) };
        let m = random_machine(&c).unwrap();
        // Each symbol is then a permutation.
        assert_eq!(m.transitions().len(), 12);
        assert!(backward_witness(&m).is_none());
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            GenConfig { states: (0, 3), ..GenConfig::default() },
            GenConfig { symbols: (4, 3), ..GenConfig::default() },
            GenConfig { density: (0.5, 1.5), ..GenConfig::default() },
            GenConfig { density: (0.6, 0.5), ..GenConfig::default() },
        ];
        for c in bad {
            assert!(matches!(random_machine(&c), Err(Error::InvalidConfig(_))), "{c:?}");
        }
        let both = GenConfig { force_chain_decomposable: true, force_non_injective: true, ..GenConfig::default() };
        assert!(matches!(random_machine(&both), Err(Error::Unsatisfiable(_))));
        let tiny = GenConfig { states: (1, 1), force_non_injective: true, ..GenConfig::default() };
        assert!(matches!(random_machine(&tiny), Err(Error::Unsatisfiable(_))));
        let blocked = GenConfig { states: (1, 1), symbols: (1, 1), density: (0.0, 0.0), force_non_blocking: true, force_chain_decomposable: true, ..GenConfig::default() };
        // A single state can always loop on itself.
        assert!(random_machine(&blocked).unwrap().is_non_blocking());
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: HashSet<u64> = (0..100).map(|t| trial_seed(7, t)).collect();
        assert_eq!(seeds.len(), 100);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
    }

    #[test]
    fn suites_pass_on_the_reference_implementation() {
        for suite in Suite::ALL {
            let report = suite.run(&suite.config(11), 15).unwrap();
            assert!(report.passed(), "{report}");
            assert_eq!(report.instances, 15);
            assert!(report.counter("checks") > 0);
        }
    }

    #[test]
    fn trivial_machine_passes() {
        let c = GenConfig { states: (1, 1), symbols: (1, 1), ..GenConfig::default() };
        for suite in [Suite::Overapprox, Suite::T1, Suite::Monotone, Suite::Oracle] {
            let report = suite.run(&c, 1).unwrap();
            assert!(report.passed() && report.instances == 1, "{report}");
        }
    }

    #[test]
    fn quota_mode_counts_only_full_machines() {
        let c = Suite::Oracle.config(4);
        let report = verify_oracle_quota(&c, 10, 500).unwrap();
        assert!(report.passed());
        assert_eq!(report.instances, 10);
        assert_eq!(report.counter("draws"), 10 + report.counter("short_machines"));
        assert!(report.counter("rejected_traces") >= 50);
    }

    #[test]
    fn broken_estimator_is_caught_with_a_short_witness() {
        let c = Suite::Oracle.config(5);
        let report = verify_oracle_with(&c, 20, faults::skip_intersection).unwrap();
        assert!(!report.passed());
        for f in &report.failures {
            // Skipping the intersection is already visible after one symbol.
            assert_eq!(f.trace.len(), 1, "{f}");
            let m = random_machine(&c.with_seed(f.seed)).unwrap();
            assert_eq!(m, f.machine);
            let (chi, _) = faults::skip_intersection(&m, &f.trace).unwrap();
            assert_ne!(chi, oracle_estimate(&m, &f.trace).unwrap());
        }
    }

    #[test]
    fn shrinking_keeps_the_failure() {
        let w = Trace::from_start(vec![0, 1, 2, 3, 4, 5]);
        let contains_three = |t: &Trace| t.symbols.contains(&3);
        let s = shrink(&w, contains_three);
        assert_eq!(s, Trace::new(3, vec![3]));
        let never = shrink(&w, |t| t.len() > 100);
        assert_eq!(never, w);
    }

    #[test]
    fn random_decompositions_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..12 {
            let d = random_decomposition(n, &mut rng);
            assert_eq!(d.num_symbols(), n);
            assert!((2..=3).contains(&d.len()));
        }
    }

    #[test]
    fn enumeration_splits_accepted_and_rejected() {
        for seed in 0..20 {
            let m = random_machine(&small(seed)).unwrap();
            let (accepted, rejected) = enumerate_traces(&m, 4).unwrap();
            let mut brute = 0;
            let k = m.num_symbols();
            for len in 1..=4u32 {
                for code in 0..k.pow(len) {
                    let symbols = (0..len).map(|i| code / k.pow(i) % k).collect();
                    if !estimate_and_predict(&m, &Trace::from_start(symbols)).unwrap().0.is_empty() {
                        brute += 1;
                    }
                }
            }
            assert_eq!(accepted.len(), brute, "seed {seed}");
            for w in &rejected {
                assert!(estimate_and_predict(&m, w).unwrap().0.is_empty());
                if w.len() > 1 {
                    assert!(!estimate_and_predict(&m, &w.prefix(w.len() - 1)).unwrap().0.is_empty());
                }
            }
        }
    }

}
