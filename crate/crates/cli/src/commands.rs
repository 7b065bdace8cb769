use std::fs;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::Path;

use serde_json::json;
use symest::abstraction::{abstract_grid, parse_field, GridSpec};
use symest::chains::ChainPartition;
use symest::quotient::QuotientMap;
use symest::verify::{faults, random_machine, verify_oracle_with, GenConfig, Report, Suite};
use symest::{
    build_decomposition, check_chain_decomposable, derive_distributed, estimate_and_predict, iso_partition,
    partition_chains, theorem2_decomposition, Decomposition, DistributedFamily, Estimator, IsMachineView, Machine,
    StateSet, Trace,
};

use crate::formats::{sorted_names, to_dot, DecompositionFile, MachineFile, TraceFile};
use crate::{
    AbstractArgs, CliError, Command, DecomposeArgs, DistributedArgs, EstimateArgs, Fault, RandomArgs, Strategy,
    SuiteArg, VerifyArgs, EXIT_PROPERTY_FAILURE, EXIT_REJECTED,
};

type Out<'a> = &'a mut dyn Write;

pub fn run(cli: crate::Cli, out: Out, err: Out) -> Result<u8, CliError> {
    match cli.command {
        Command::Estimate(args) => estimate(&args, out),
        Command::Decompose(args) => decompose(&args, out, err),
        Command::Distributed(args) => distributed(&args, out),
        Command::Verify(args) => verify(&args, out),
        Command::Random(args) => random(&args, out),
        Command::Abstract(args) => abstract_field(&args, out, err),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path) -> Result<Machine, CliError> {
    MachineFile::parse(&read(path)?)?.to_machine()
}

fn load_trace(m: &Machine, path: &Path) -> Result<Trace, CliError> {
    TraceFile::parse(&read(path)?)?.to_trace(m)
}

fn show(m: &Machine, set: &StateSet) -> String {
    format!("[{}]", sorted_names(m, set).join(","))
}

/// Seed from `SYMEST_SEED` when set, `flag` otherwise.
fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var("SYMEST_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("SYMEST_SEED={text:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

/// `(t, χ, ρ)` after every symbol of `w`, each over the last `window`
/// symbols when a window is given.
fn estimates(m: &Machine, w: &Trace, window: Option<NonZeroUsize>) -> Result<Vec<(usize, StateSet, StateSet)>, CliError> {
    let mut rows = Vec::with_capacity(w.len());
    if w.start == 0 {
        let mut online = Estimator::new(m, window);
        for &symbol in &w.symbols {
            online.step(symbol)?;
            rows.push((online.time().expect("stepped"), online.chi().clone(), online.rho().clone()));
        }
    } else {
        for i in 0..w.len() {
            let mut part = w.prefix(i + 1);
            if let Some(l) = window {
                part = part.suffix(part.len().saturating_sub(l.get()));
            }
            let (chi, rho) = estimate_and_predict(m, &part)?;
            rows.push((w.start + i, chi, rho));
        }
    }
    Ok(rows)
}

fn estimate(args: &EstimateArgs, out: Out) -> Result<u8, CliError> {
    let m = load_machine(&args.machine)?;
    let w = load_trace(&m, &args.trace)?;
    let window = match args.window {
        None => None,
        Some(l) => Some(NonZeroUsize::new(l).ok_or_else(|| CliError::Validation("--window must be positive".into()))?),
    };
    let rows = estimates(&m, &w, window)?;
    for (t, chi, rho) in &rows {
        if args.json {
            let record = json!({ "t": t, "chi": sorted_names(&m, chi), "rho": sorted_names(&m, rho) });
            writeln!(out, "{record}")?;
        } else if args.predict {
            writeln!(out, "t={t} chi={} rho={}", show(&m, chi), show(&m, rho))?;
        } else {
            writeln!(out, "t={t} chi={}", show(&m, chi))?;
        }
    }
    let rejected = rows.last().is_some_and(|(_, chi, _)| chi.is_empty());
    Ok(if rejected { EXIT_REJECTED } else { 0 })
}

fn describe_partition(m: &Machine, partition: &ChainPartition, report: &mut String) {
    report.push_str(&format!("chains: {}\n", partition.len()));
    for (j, block) in partition.blocks().iter().enumerate() {
        let names: Vec<&str> = block.iter().map(|&w| m.symbol_name(w)).collect();
        report.push_str(&format!("  chain {}: {}\n", j + 1, names.join(" ")));
    }
}

fn describe_classes(m: &Machine, map: &QuotientMap, report: &mut String) {
    for class in 0..map.num_classes() {
        let members: Vec<&str> = map.members(class).iter().map(|&s| m.state_name(s)).collect();
        report.push_str(&format!("  {} = {{{}}}\n", QuotientMap::label(class), members.join(", ")));
    }
}

fn decompose(args: &DecomposeArgs, out: Out, err: Out) -> Result<u8, CliError> {
    let m = load_machine(&args.machine)?;
    if args.p == 0 {
        return Err(CliError::Validation("--p must be at least 1".into()));
    }
    let mut report = String::new();
    let d: Decomposition = match args.strategy {
        Strategy::Chain => {
            if let Err(symest::Error::NotChainDecomposable(witness)) = check_chain_decomposable(&m) {
                return Err(CliError::NotChainDecomposable(witness.describe(&m)));
            }
            let partition = partition_chains(&m)?;
            describe_partition(&m, &partition, &mut report);
            build_decomposition(&m, &partition, args.p)?
        }
        Strategy::Quotient => {
            let qd = theorem2_decomposition(&m, args.p)?;
            report.push_str(&format!(
                "quotient: {} classes after {} round(s)\n",
                qd.quotient.map.num_classes(),
                qd.iterations
            ));
            describe_classes(&m, &qd.quotient.map, &mut report);
            describe_partition(&qd.quotient.machine, &qd.partition, &mut report);
            qd.decomposition
        }
        Strategy::Iso => {
            if args.inputs.is_empty() || args.outputs.is_empty() {
                return Err(CliError::Validation("--strategy iso needs --inputs and --outputs".into()));
            }
            let view = IsMachineView::from_symbol_names(&m, args.inputs.clone(), args.outputs.clone(), '/')?;
            let partition = iso_partition(&view)?;
            describe_partition(&m, &partition, &mut report);
            build_decomposition(&m, &partition, args.p)?
        }
    };
    let file = DecompositionFile::from_decomposition(&m, &d).to_json();
    match &args.out {
        Some(path) => {
            write_file(path, &file)?;
            out.write_all(report.as_bytes())?;
        }
        None => {
            out.write_all(file.as_bytes())?;
            err.write_all(report.as_bytes())?;
        }
    }
    Ok(0)
}

struct Step {
    t: usize,
    symbol: usize,
    local: Vec<(StateSet, StateSet)>,
    decentralized: (StateSet, StateSet),
    monolithic: (StateSet, StateSet),
}

fn distributed_steps(family: &DistributedFamily, w: &Trace) -> Result<Vec<Step>, CliError> {
    let m = family.base();
    let mut steps = Vec::with_capacity(w.len());
    if w.start == 0 {
        let mut mono = Estimator::unbounded(m);
        let mut dec = family.estimator();
        for (i, &symbol) in w.symbols.iter().enumerate() {
            mono.step(symbol)?;
            dec.step(symbol)?;
            steps.push(Step {
                t: i,
                symbol,
                local: dec.local_sets(),
                decentralized: (dec.chi(), dec.rho()),
                monolithic: (mono.chi().clone(), mono.rho().clone()),
            });
        }
    } else {
        for i in 0..w.len() {
            let part = w.prefix(i + 1);
            steps.push(Step {
                t: w.start + i,
                symbol: w.symbols[i],
                local: family.distributed_sets(&part)?,
                decentralized: family.decentralized(&part)?,
                monolithic: estimate_and_predict(m, &part)?,
            });
        }
    }
    Ok(steps)
}

fn distributed(args: &DistributedArgs, out: Out) -> Result<u8, CliError> {
    let m = load_machine(&args.machine)?;
    let d = DecompositionFile::parse(&read(&args.decomposition)?)?.to_decomposition(&m)?;
    let w = load_trace(&m, &args.trace)?;
    let family = derive_distributed(&m, &d)?;
    for step in distributed_steps(&family, &w)? {
        let exact = step.decentralized == step.monolithic;
        let verdict = if exact { "EXACT" } else { "OVERAPPROX" };
        if args.json {
            let local: Vec<_> = step
                .local
                .iter()
                .map(|(chi, rho)| json!({ "chi": sorted_names(&m, chi), "rho": sorted_names(&m, rho) }))
                .collect();
            let record = json!({
                "t": step.t,
                "symbol": m.symbol_name(step.symbol),
                "local": local,
                "chi": sorted_names(&m, &step.decentralized.0),
                "rho": sorted_names(&m, &step.decentralized.1),
                "monolithic_chi": sorted_names(&m, &step.monolithic.0),
                "monolithic_rho": sorted_names(&m, &step.monolithic.1),
                "verdict": verdict,
            });
            writeln!(out, "{record}")?;
        } else {
            writeln!(out, "t={} symbol={} {verdict}", step.t, m.symbol_name(step.symbol))?;
            for (k, (chi, rho)) in step.local.iter().enumerate() {
                writeln!(out, "  P{} chi={} rho={}", k + 1, show(&m, chi), show(&m, rho))?;
            }
            let (chi, rho) = &step.decentralized;
            writeln!(out, "  decentralized chi={} rho={}", show(&m, chi), show(&m, rho))?;
            let (chi, rho) = &step.monolithic;
            writeln!(out, "  monolithic chi={} rho={}", show(&m, chi), show(&m, rho))?;
        }
    }
    Ok(0)
}

fn verify(args: &VerifyArgs, out: Out) -> Result<u8, CliError> {
    if args.trials == 0 {
        return Err(CliError::Validation("--trials must be at least 1".into()));
    }
    let seed = effective_seed(args.seed)?;
    let suites: Vec<Suite> = match args.suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Overapprox => vec![Suite::Overapprox],
        SuiteArg::T1 => vec![Suite::T1],
        SuiteArg::T2 => vec![Suite::T2],
        SuiteArg::Monotone => vec![Suite::Monotone],
        SuiteArg::Oracle => vec![Suite::Oracle],
    };
    let mut passed = true;
    writeln!(out, "seed={seed} trials={}", args.trials)?;
    for suite in suites {
        let config = suite.config(seed);
        let report: Report = match (suite, args.inject_fault) {
            (Suite::Oracle, Some(Fault::SkipIntersection)) => {
                verify_oracle_with(&config, args.trials, faults::skip_intersection)?
            }
            _ => suite.run(&config, args.trials)?,
        };
        passed &= report.passed();
        write!(out, "{report}")?;
    }
    writeln!(out, "overall: {}", if passed { "PASS" } else { "FAIL" })?;
    Ok(if passed { 0 } else { EXIT_PROPERTY_FAILURE })
}

fn emit_machine(m: &Machine, dot: bool, path: Option<&Path>, out: Out) -> Result<(), CliError> {
    let text = if dot { to_dot(m) } else { MachineFile::from_machine(m).to_json() };
    match path {
        Some(path) => write_file(path, &text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn random(args: &RandomArgs, out: Out) -> Result<u8, CliError> {
    let config = GenConfig {
        seed: effective_seed(args.seed)?,
        states: (args.states, args.states),
        symbols: (args.symbols, args.symbols),
        density: (args.density, args.density),
        force_chain_decomposable: args.chain_decomposable,
        force_non_injective: args.non_injective,
        force_non_blocking: args.non_blocking,
        random_initial: false,
    };
    let m = random_machine(&config)?;
    emit_machine(&m, args.dot, args.out.as_deref(), out)?;
    Ok(0)
}

fn parse_bounds(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Parse(format!("--box expects LO,HI, got {text:?}"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn abstract_field(args: &AbstractArgs, out: Out, err: Out) -> Result<u8, CliError> {
    let field = parse_field(&args.field).map_err(symest::Error::from)?;
    let bounds = args.bounds.iter().map(|b| parse_bounds(b)).collect::<Result<Vec<_>, _>>()?;
    let cells = match args.cells.as_slice() {
        &[one] => vec![one; field.dimension()],
        many => many.to_vec(),
    };
    let grid = GridSpec { bounds, cells, ts: args.ts };
    let abstraction = abstract_grid(&field, &grid).map_err(symest::Error::from)?;
    if abstraction.skipped_samples > 0 {
        writeln!(err, "warning: {} sample(s) failed to integrate and were skipped", abstraction.skipped_samples)?;
    }
    emit_machine(&abstraction.machine, args.dot, args.out.as_deref(), out)?;
    Ok(0)
}
