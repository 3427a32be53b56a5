//! JSON file formats. Item and agent indices are 0-based in every file.

use mdfa::allocate::AllocatorTrace;
use mdfa::verify::{FailureReport, Witness};
use mdfa::Instance;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// On-disk instance. `valuations` is `[item][dimension]` when `identical`
/// is true and `[agent][item][dimension]` otherwise; entries must be
/// nonnegative integers, anything else is rejected on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: usize,
    pub dimensions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identical: Option<bool>,
    pub valuations: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub bundles: Vec<Vec<usize>>,
}

/// Everything a command reports on standard output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultFile {
    pub query: QueryEcho,
    pub answer: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<ViolationsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee_c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceFile>,
    /// Present on "undecided": which resource cap fired.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub counters: Counters,
    pub timing_ms: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryEcho {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

/// `true`, `false`, or the string `"undecided"`. Undecided means a resource
/// cap fired, never that the answer is "no".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Undecided,
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Answer::Yes => s.serialize_bool(true),
            Answer::No => s.serialize_bool(false),
            Answer::Undecided => s.serialize_str("undecided"),
        }
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bool(bool),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Bool(true) => Ok(Answer::Yes),
            Raw::Bool(false) => Ok(Answer::No),
            Raw::Text(s) if s == "undecided" => Ok(Answer::Undecided),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("unknown answer {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Counters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp_states: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scanned_allocations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_nodes: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFile {
    /// One removal set per (envier, envied, dimension).
    Weak(Vec<WeakEntryFile>),
    /// One removal set per (envier, envied), good for every dimension.
    Strong(Vec<StrongEntryFile>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakEntryFile {
    pub envier: usize,
    pub envied: usize,
    pub dimension: usize,
    pub removed: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrongEntryFile {
    pub envier: usize,
    pub envied: usize,
    pub removed: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationsFile {
    Weak(Vec<WeakViolationFile>),
    Strong(Vec<StrongViolationFile>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakViolationFile {
    pub envier: usize,
    pub envied: usize,
    pub dimension: usize,
    pub own_value: u64,
    pub envied_value: u64,
    pub best_removable: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrongViolationFile {
    pub envier: usize,
    pub envied: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceFile {
    pub used_round_robin: bool,
    /// `pre_assigned[agent][dimension]`: items granted before the relaxation.
    pub pre_assigned: Vec<Vec<Vec<usize>>>,
    pub integral: Vec<Vec<usize>>,
    pub fractional: Vec<Vec<usize>>,
    /// Exact shares as `"p/q"` strings, `shares[agent][item]`.
    pub shares: Vec<Vec<String>>,
    pub suggested_removals: Vec<Vec<usize>>,
}

pub fn to_instance(file: &InstanceFile) -> Result<Instance, String> {
    let outer = file
        .valuations
        .as_array()
        .ok_or_else(|| "valuations: expected an array".to_string())?;
    let inst = if file.identical.unwrap_or(false) {
        let matrix = parse_matrix(outer, "valuations")?;
        Instance::identical(file.agents, file.dimensions, matrix).map_err(|e| e.to_string())?
    } else {
        if outer.len() != file.agents {
            return Err(format!(
                "valuations: {} agent matrices, header says {} agents",
                outer.len(),
                file.agents
            ));
        }
        let mut per_agent = Vec::with_capacity(outer.len());
        for (i, matrix) in outer.iter().enumerate() {
            let rows = matrix
                .as_array()
                .ok_or_else(|| format!("valuations[{i}]: expected an array"))?;
            per_agent.push(parse_matrix(rows, &format!("valuations[{i}]"))?);
        }
        Instance::new(file.dimensions, per_agent).map_err(|e| e.to_string())?
    };
    match &file.items {
        Some(names) => inst.with_item_names(names.clone()).map_err(|e| e.to_string()),
        None => Ok(inst),
    }
}

fn parse_matrix(rows: &[serde_json::Value], at: &str) -> Result<Vec<Vec<u64>>, String> {
    rows.iter()
        .enumerate()
        .map(|(j, row)| {
            let cells = row
                .as_array()
                .ok_or_else(|| format!("{at}[{j}]: expected an array"))?;
            cells
                .iter()
                .enumerate()
                .map(|(k, cell)| {
                    cell.as_u64().ok_or_else(|| {
                        format!("{at}[{j}][{k}]: values must be nonnegative integers, got {cell}")
                    })
                })
                .collect()
        })
        .collect()
}

pub fn from_instance(inst: &Instance) -> InstanceFile {
    let valuations = if inst.is_identical() {
        let matrix: Vec<Vec<u64>> = (0..inst.items())
            .map(|j| (0..inst.dims()).map(|k| inst.value(0, j, k)).collect())
            .collect();
        serde_json::json!(matrix)
    } else {
        let cube: Vec<Vec<Vec<u64>>> = (0..inst.agents())
            .map(|i| {
                (0..inst.items())
                    .map(|j| (0..inst.dims()).map(|k| inst.value(i, j, k)).collect())
                    .collect()
            })
            .collect();
        serde_json::json!(cube)
    };
    InstanceFile {
        agents: inst.agents(),
        dimensions: inst.dims(),
        identical: if inst.is_identical() { Some(true) } else { None },
        valuations,
        items: inst.item_names().map(<[String]>::to_vec),
    }
}

pub fn witness_file(witness: &Witness) -> WitnessFile {
    match witness {
        Witness::Weak(entries) => WitnessFile::Weak(
            entries
                .iter()
                .map(|e| WeakEntryFile {
                    envier: e.envier,
                    envied: e.envied,
                    dimension: e.dim,
                    removed: e.removed.clone(),
                })
                .collect(),
        ),
        Witness::Strong(entries) => WitnessFile::Strong(
            entries
                .iter()
                .map(|e| StrongEntryFile {
                    envier: e.envier,
                    envied: e.envied,
                    removed: e.removed.clone(),
                })
                .collect(),
        ),
    }
}

pub fn violations_file(report: &FailureReport) -> ViolationsFile {
    match report {
        FailureReport::Weak(list) => ViolationsFile::Weak(
            list.iter()
                .map(|v| WeakViolationFile {
                    envier: v.envier,
                    envied: v.envied,
                    dimension: v.dim,
                    own_value: v.own_value,
                    envied_value: v.envied_value,
                    best_removable: v.best_removable,
                })
                .collect(),
        ),
        FailureReport::Strong(list) => ViolationsFile::Strong(
            list.iter()
                .map(|v| StrongViolationFile { envier: v.envier, envied: v.envied })
                .collect(),
        ),
    }
}

pub fn trace_file(trace: &AllocatorTrace) -> TraceFile {
    TraceFile {
        used_round_robin: trace.used_round_robin,
        pre_assigned: trace.pre_assigned.clone(),
        integral: trace.integral.clone(),
        fractional: trace.fractional.clone(),
        shares: trace
            .shares
            .shares
            .iter()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect(),
        suggested_removals: trace.suggested_removals.clone(),
    }
}
