//! Grid abstraction of a sampled ODE flow `ξ̇ = a(ξ)` into a finite machine.
//!
//! Every grid cell becomes a state and its own label becomes the symbol of
//! the transitions leaving it: `(c, label(c), c′)` whenever the `T_s`-flow
//! of one of the cell's sample points lands in `c′ ≠ c`, and the self-loop
//! `(c, label(c), c)` whenever a sample stays put. Flows leaving the box go
//! to a `sink` state that loops on its own `sink` symbol.
//!
//! Samples are the cell center and its corners. This is a demonstration
//! abstraction only; it is neither sound nor complete with respect to the
//! continuous flow, and "stays in the cell" is judged at time `T_s` only.

mod expr;

pub use expr::{parse_expr, parse_field, BinOp, Expr, Func, VectorField};

use thiserror::Error;

use crate::machine::Machine;

pub const SINK: &str = "sink";

/// Integration sub-steps per sampling period.
pub const RK4_STEPS: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbstractionError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },
    #[error("vector fields must have 1 or 2 components, found {0}")]
    Dimension(usize),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("every sample of cell `{0}` failed to integrate")]
    CellFailed(String),
}

/// Classical fourth-order Runge-Kutta approximation of `φ(T_s, ξ)` with
/// [`RK4_STEPS`] equal steps.
pub fn integrate(field: &VectorField, point: &[f64], ts: f64) -> Result<Vec<f64>, AbstractionError> {
    if point.len() != field.dimension() {
        return Err(AbstractionError::Grid(format!(
            "point has {} coordinates, field has {}",
            point.len(),
            field.dimension()
        )));
    }
    let h = ts / RK4_STEPS as f64;
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut x = point.to_vec();
    for _ in 0..RK4_STEPS {
        let k1 = field.eval(&x)?;
        let k2 = field.eval(&axpy(&x, &k1, h / 2.0))?;
        let k3 = field.eval(&axpy(&x, &k2, h / 2.0))?;
        let k4 = field.eval(&axpy(&x, &k3, h))?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// `(lo, hi)` per dimension.
    pub bounds: Vec<(f64, f64)>,
    /// Cells per dimension.
    pub cells: Vec<usize>,
    /// Sampling time `T_s`.
    pub ts: f64,
}

impl GridSpec {
    pub fn validate(&self, dimension: usize) -> Result<(), AbstractionError> {
        if self.bounds.len() != dimension || self.cells.len() != dimension {
            return Err(AbstractionError::Grid(format!(
                "expected bounds and cell counts for {dimension} dimension(s), got {} and {}",
                self.bounds.len(),
                self.cells.len()
            )));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(AbstractionError::Grid(format!("bounds [{lo}, {hi}] are not an interval")));
            }
        }
        if self.cells.contains(&0) {
            return Err(AbstractionError::Grid("every dimension needs at least one cell".into()));
        }
        if !(self.ts.is_finite() && self.ts > 0.0) {
            return Err(AbstractionError::Grid(format!("sampling time {} must be positive", self.ts)));
        }
        Ok(())
    }

    fn num_cells(&self) -> usize {
        self.cells.iter().product()
    }

    fn width(&self, d: usize) -> f64 {
        (self.bounds[d].1 - self.bounds[d].0) / self.cells[d] as f64
    }

    /// Row-major multi-index of cell `c`, first dimension outermost.
    fn coords(&self, mut c: usize) -> Vec<usize> {
        let mut out = vec![0; self.cells.len()];
        for d in (0..self.cells.len()).rev() {
            out[d] = c % self.cells[d];
            c /= self.cells[d];
        }
        out
    }

    fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.cells).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    fn label(&self, c: usize) -> String {
        let parts: Vec<String> = self.coords(c).iter().map(|i| (i + 1).to_string()).collect();
        format!("c{}", parts.join("_"))
    }

    fn cell_bounds(&self, c: usize) -> Vec<(f64, f64)> {
        self.coords(c)
            .iter()
            .enumerate()
            .map(|(d, &i)| {
                let lo = self.bounds[d].0 + self.width(d) * i as f64;
                let hi = if i + 1 == self.cells[d] { self.bounds[d].1 } else { lo + self.width(d) };
                (lo, hi)
            })
            .collect()
    }

    /// Center first, then the corners.
    fn samples(&self, c: usize) -> Vec<Vec<f64>> {
        let bounds = self.cell_bounds(c);
        let mut out = vec![bounds.iter().map(|(lo, hi)| (lo + hi) / 2.0).collect::<Vec<_>>()];
        for mask in 0..(1usize << bounds.len()) {
            out.push(
                bounds
                    .iter()
                    .enumerate()
                    .map(|(d, &(lo, hi))| if mask >> d & 1 == 1 { hi } else { lo })
                    .collect(),
            );
        }
        out
    }

    /// Cell reached by `point` when leaving `source`; `None` outside the box.
    /// Points on the closed boundary of `source` count as staying in it.
    fn locate(&self, source: usize, point: &[f64]) -> Option<usize> {
        let within = |b: &[(f64, f64)]| point.iter().zip(b).all(|(x, &(lo, hi))| lo <= *x && *x <= hi);
        if within(&self.cell_bounds(source)) {
            return Some(source);
        }
        if !within(&self.bounds) {
            return None;
        }
        let coords: Vec<usize> = point
            .iter()
            .enumerate()
            .map(|(d, x)| (((x - self.bounds[d].0) / self.width(d)).floor() as usize).min(self.cells[d] - 1))
            .collect();
        Some(self.index(&coords))
    }
}

/// The abstraction together with the number of samples skipped because
/// integration failed.
#[derive(Debug, Clone)]
pub struct Abstraction {
    pub machine: Machine,
    pub skipped_samples: usize,
}

pub fn abstract_grid(field: &VectorField, grid: &GridSpec) -> Result<Abstraction, AbstractionError> {
    grid.validate(field.dimension())?;
    let n = grid.num_cells();
    let sink = n;
    let mut names: Vec<String> = (0..n).map(|c| grid.label(c)).collect();
    names.push(SINK.to_owned());

    let mut transitions = Vec::new();
    let mut skipped = 0;
    for c in 0..n {
        let mut targets: Vec<usize> = Vec::new();
        let mut succeeded = 0;
        for sample in grid.samples(c) {
            match integrate(field, &sample, grid.ts) {
                Ok(end) => {
                    succeeded += 1;
                    let target = grid.locate(c, &end).unwrap_or(sink);
                    if !targets.contains(&target) {
                        targets.push(target);
                    }
                }
                Err(_) => skipped += 1,
            }
        }
        if succeeded == 0 {
            return Err(AbstractionError::CellFailed(names[c].clone()));
        }
        targets.sort_unstable();
        transitions.extend(targets.into_iter().map(|t| (c, c, t)));
    }
    transitions.push((sink, sink, sink));

    let machine = Machine::from_indices(names.clone(), names, transitions, None)
        .expect("grid labels are unique and transitions are in range");
    Ok(Abstraction { machine, skipped_samples: skipped })
}
