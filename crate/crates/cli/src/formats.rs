//! On-disk formats: machines, decompositions and traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use symest::{AggregationMap, Decomposition, Machine, StateSet, Trace};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineFile {
    pub states: Vec<String>,
    pub symbols: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<String>>,
    pub transitions: Vec<[String; 3]>,
}

impl MachineFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("machine file: {e}")))
    }

    pub fn to_machine(&self) -> Result<Machine, CliError> {
        let transitions: Vec<(&str, &str, &str)> =
            self.transitions.iter().map(|[s, w, d]| (s.as_str(), w.as_str(), d.as_str())).collect();
        let initial: Option<Vec<&str>> = self.initial.as_ref().map(|v| v.iter().map(String::as_str).collect());
        Ok(Machine::new(self.states.clone(), self.symbols.clone(), &transitions, initial.as_deref())?)
    }

    /// `initial` is omitted when it is the whole state space.
    pub fn from_machine(m: &Machine) -> Self {
        let initial = (m.initial().len() != m.num_states()).then(|| sorted_names(m, m.initial()));
        MachineFile {
            states: m.states().to_vec(),
            symbols: m.symbols().to_vec(),
            initial,
            transitions: m
                .transitions()
                .iter()
                .map(|&(s, w, d)| {
                    [m.state_name(s).to_owned(), m.symbol_name(w).to_owned(), m.state_name(d).to_owned()]
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("plain data serializes");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionFile {
    pub p: usize,
    pub maps: Vec<BTreeMap<String, String>>,
}

impl DecompositionFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("decomposition file: {e}")))
    }

    pub fn to_decomposition(&self, m: &Machine) -> Result<Decomposition, CliError> {
        if self.p != self.maps.len() {
            return Err(CliError::Validation(format!(
                "decomposition declares p={} but lists {} maps",
                self.p,
                self.maps.len()
            )));
        }
        let mut maps = Vec::with_capacity(self.maps.len());
        for (k, map) in self.maps.iter().enumerate() {
            if let Some(unknown) = map.keys().find(|w| m.symbol_id(w).is_err()) {
                return Err(CliError::Validation(format!("map {} labels unknown symbol `{unknown}`", k + 1)));
            }
            let labels: Vec<&String> = m
                .symbols()
                .iter()
                .map(|w| {
                    map.get(w).ok_or_else(|| {
                        CliError::Validation(format!("map {} does not label symbol `{w}`", k + 1))
                    })
                })
                .collect::<Result<_, _>>()?;
            maps.push(AggregationMap::from_labels(&labels));
        }
        Ok(Decomposition::new(maps)?)
    }

    pub fn from_decomposition(m: &Machine, d: &Decomposition) -> Self {
        let maps = d
            .maps()
            .iter()
            .map(|map| {
                (0..m.num_symbols())
                    .map(|w| {
                        let label = map.label_of(w).expect("maps cover the alphabet");
                        (m.symbol_name(w).to_owned(), map.label_name(label).to_owned())
                    })
                    .collect()
            })
            .collect();
        DecompositionFile { p: d.len(), maps }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("plain data serializes");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    #[serde(default)]
    pub tau: usize,
    pub symbols: Vec<String>,
}

impl TraceFile {
    /// JSON when the first non-blank character is `{`, otherwise one symbol
    /// per line with blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| CliError::Parse(format!("trace file: {e}")));
        }
        let symbols = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect();
        Ok(TraceFile { tau: 0, symbols })
    }

    pub fn to_trace(&self, m: &Machine) -> Result<Trace, CliError> {
        if self.symbols.is_empty() {
            return Err(CliError::Validation("trace is empty".into()));
        }
        Ok(m.trace(self.tau, &self.symbols)?)
    }
}

#[cfg(test)]
impl TraceFile {
    pub fn from_trace(m: &Machine, w: &Trace) -> Self {
        TraceFile { tau: w.start, symbols: w.symbols.iter().map(|&s| m.symbol_name(s).to_owned()).collect() }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string(self).expect("plain data serializes");
        out.push('\n');
        out
    }
}

pub fn sorted_names(m: &Machine, set: &StateSet) -> Vec<String> {
    let mut names: Vec<String> = m.state_names(set).into_iter().map(str::to_owned).collect();
    names.sort();
    names
}

pub fn to_dot(m: &Machine) -> String {
    let mut out = String::from("digraph machine {\n  rankdir=LR;\n");
    for (s, name) in m.states().iter().enumerate() {
        let shape = if m.initial().contains(s) && m.initial().len() != m.num_states() {
            "doublecircle"
        } else {
            "circle"
        };
        out.push_str(&format!("  {name:?} [shape={shape}];\n"));
    }
    for &(s, w, d) in m.transitions() {
        out.push_str(&format!(
            "  {:?} -> {:?} [label={:?}];\n",
            m.state_name(s),
            m.state_name(d),
            m.symbol_name(w)
        ));
    }
    out.push_str("}\n");
    out
}
