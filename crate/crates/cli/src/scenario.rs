//! Scenario files: JSON documents of the form
//! `{"version": "1", "entries": [ {<kind>: {...}}, ... ]}`.
//!
//! Stanzas are fully validated into core types at parse time, so an entry
//! that parses can only fail at run time through a physics verdict.

use serde_json::{Map, Value};

use nosig_core::qutrit::{ContextChoice, QutritScenario};
use nosig_core::{
    pure_state, ComplexMatrix, DensityMatrix, LocalInstrument, NsBox, ProductPartition, Projector,
    Sector, SumPartition, C64,
};

use crate::error::CliError;
use crate::sweep::{SweepKind, SweepParams};

pub const SUPPORTED_VERSIONS: &[&str] = &["1"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub version: String,
    pub entries: Vec<Stanza>,
}

// Stanzas are parsed once per file, so the size spread between variants is harmless.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Stanza {
    Qutrit(QutritSpec),
    Bipartite(BipartiteSpec),
    Box(BoxSpec),
    Sweep(SweepParams),
}

impl Stanza {
    pub fn kind(&self) -> &'static str {
        match self {
            Stanza::Qutrit(_) => "qutrit",
            Stanza::Bipartite(_) => "bipartite",
            Stanza::Box(_) => "box",
            Stanza::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QutritSpec {
    pub scenario: QutritScenario,
    pub context: ContextChoice,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteSpec {
    pub state: DensityMatrix,
    pub partition: ProductPartition,
    pub instruments: [LocalInstrument; 2],
    pub b_split: SumPartition,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub table: NsBox,
    pub tol: Option<f64>,
}

/// Location used to label schema errors.
struct At {
    stanza: usize,
    kind: &'static str,
}

impl At {
    fn err(&self, field: &str, message: impl Into<String>) -> CliError {
        CliError::Schema {
            stanza: self.stanza,
            kind: self.kind.to_string(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn core(&self, field: &str, e: nosig_core::Error) -> CliError {
        self.err(field, e.to_string())
    }

    fn object<'v>(&self, v: &'v Value, field: &str) -> Result<&'v Map<String, Value>, CliError> {
        v.as_object()
            .ok_or_else(|| self.err(field, "expected an object"))
    }

    fn required<'v>(
        &self,
        obj: &'v Map<String, Value>,
        field: &str,
    ) -> Result<&'v Value, CliError> {
        obj.get(field)
            .ok_or_else(|| self.err(field, "missing required field"))
    }

    fn only_keys(&self, obj: &Map<String, Value>, allowed: &[&str]) -> Result<(), CliError> {
        match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.err(k, format!("unknown field; expected one of {allowed:?}"))),
            None => Ok(()),
        }
    }

    fn number(&self, v: &Value, field: &str) -> Result<f64, CliError> {
        v.as_f64()
            .ok_or_else(|| self.err(field, "expected a number"))
    }

    fn count(&self, v: &Value, field: &str) -> Result<usize, CliError> {
        v.as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| self.err(field, "expected a non-negative integer"))
    }

    fn array<'v>(&self, v: &'v Value, field: &str) -> Result<&'v Vec<Value>, CliError> {
        v.as_array()
            .ok_or_else(|| self.err(field, "expected an array"))
    }

    fn opt_tol(&self, obj: &Map<String, Value>) -> Result<Option<f64>, CliError> {
        obj.get("tol")
            .map(|v| {
                let t = self.number(v, "tol")?;
                if t < 0.0 {
                    return Err(self.err("tol", "must be non-negative"));
                }
                Ok(t)
            })
            .transpose()
    }

    fn complex(&self, v: &Value, field: &str) -> Result<C64, CliError> {
        match v.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(C64::new(re, im)),
                _ => Err(self.err(field, "complex entries are [re, im] numbers")),
            },
            _ => Err(self.err(field, "complex entries are [re, im] pairs")),
        }
    }

    fn vector(&self, v: &Value, field: &str) -> Result<Vec<C64>, CliError> {
        self.array(v, field)?
            .iter()
            .map(|c| self.complex(c, field))
            .collect()
    }

    fn matrix(&self, v: &Value, field: &str) -> Result<ComplexMatrix, CliError> {
        let rows = self
            .array(v, field)?
            .iter()
            .map(|r| self.vector(r, field))
            .collect::<Result<Vec<_>, _>>()?;
        ComplexMatrix::from_rows(&rows).map_err(|e| self.core(field, e))
    }

    /// An index list (`[0, 2]`) or a matrix literal (array of row arrays).
    fn is_index_list(v: &Value) -> bool {
        v.as_array().is_some_and(|a| a.iter().all(Value::is_u64))
    }

    fn indices(&self, v: &Value, field: &str) -> Result<Vec<usize>, CliError> {
        self.array(v, field)?
            .iter()
            .map(|i| self.count(i, field))
            .collect()
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let top = At {
        stanza: 0,
        kind: "file",
    };
    let obj = top.object(&doc, "<root>")?;
    top.only_keys(obj, &["version", "entries"])?;
    let version = top
        .required(obj, "version")?
        .as_str()
        .ok_or_else(|| top.err("version", "expected a string"))?;
    if !SUPPORTED_VERSIONS.contains(&version) {
        return Err(top.err(
            "version",
            format!("unsupported version {version:?}; supported: {SUPPORTED_VERSIONS:?}"),
        ));
    }
    let entries = top
        .array(top.required(obj, "entries")?, "entries")?
        .iter()
        .enumerate()
        .map(|(i, e)| parse_stanza(i, e))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioFile {
        version: version.to_string(),
        entries,
    })
}

fn parse_stanza(index: usize, v: &Value) -> Result<Stanza, CliError> {
    let tagged = At {
        stanza: index,
        kind: "entry",
    };
    let obj = tagged.object(v, "<entry>")?;
    if obj.len() != 1 {
        return Err(tagged.err(
            "<entry>",
            "each entry has exactly one key: qutrit, bipartite, box or sweep",
        ));
    }
    let (tag, body) = obj.iter().next().expect("one key");
    match tag.as_str() {
        "qutrit" => parse_qutrit(
            &At {
                stanza: index,
                kind: "qutrit",
            },
            body,
        )
        .map(Stanza::Qutrit),
        "bipartite" => parse_bipartite(
            &At {
                stanza: index,
                kind: "bipartite",
            },
            body,
        )
        .map(Stanza::Bipartite),
        "box" => parse_box(
            &At {
                stanza: index,
                kind: "box",
            },
            body,
        )
        .map(Stanza::Box),
        "sweep" => parse_sweep(
            &At {
                stanza: index,
                kind: "sweep",
            },
            body,
        )
        .map(Stanza::Sweep),
        other => Err(tagged.err(
            other,
            "unknown stanza kind; expected qutrit, bipartite, box or sweep",
        )),
    }
}

fn parse_qutrit(at: &At, v: &Value) -> Result<QutritSpec, CliError> {
    let obj = at.object(v, "qutrit")?;
    at.only_keys(obj, &["beta", "a", "b", "context", "tol"])?;
    let beta = at.vector(at.required(obj, "beta")?, "beta")?;
    let beta: [C64; 3] = beta
        .try_into()
        .map_err(|b: Vec<C64>| at.err("beta", format!("expected 3 amplitudes, got {}", b.len())))?;
    let a = at.number(at.required(obj, "a")?, "a")?;
    let b = at.number(at.required(obj, "b")?, "b")?;
    let context = match at.required(obj, "context")?.as_str() {
        Some("Y1") => ContextChoice::Y1,
        Some("Y2") => ContextChoice::Y2,
        _ => return Err(at.err("context", "expected \"Y1\" or \"Y2\"")),
    };
    let scenario = QutritScenario::new(beta, a, b).map_err(|e| match e {
        nosig_core::Error::DegenerateSplit { .. } => at.core("b", e),
        _ => at.core("beta", e),
    })?;
    Ok(QutritSpec {
        scenario,
        context,
        tol: at.opt_tol(obj)?,
    })
}

fn parse_bipartite(at: &At, v: &Value) -> Result<BipartiteSpec, CliError> {
    let obj = at.object(v, "bipartite")?;
    at.only_keys(
        obj,
        &["state", "partition", "instruments", "b_split", "tol"],
    )?;

    let part = at.object(at.required(obj, "partition")?, "partition")?;
    at.only_keys(part, &["dims"])?;
    let dims = at.indices(at.required(part, "dims")?, "partition.dims")?;
    if dims.len() != 2 {
        return Err(at.err(
            "partition.dims",
            format!("expected [dA, dB], got {} sectors", dims.len()),
        ));
    }
    let partition = ProductPartition::new(&dims).map_err(|e| at.core("partition.dims", e))?;

    let state_obj = at.object(at.required(obj, "state")?, "state")?;
    let state = match (
        state_obj.get("pure"),
        state_obj.get("density"),
        state_obj.len(),
    ) {
        (Some(p), None, 1) => {
            pure_state(&at.vector(p, "state.pure")?, false).map_err(|e| at.core("state.pure", e))?
        }
        (None, Some(d), 1) => DensityMatrix::new(at.matrix(d, "state.density")?)
            .map_err(|e| at.core("state.density", e))?,
        _ => return Err(at.err("state", "expected exactly one of \"pure\" or \"density\"")),
    };
    if state.dim() != partition.total_dim() {
        return Err(at.err(
            "state",
            format!(
                "state dimension {} does not match partition {}",
                state.dim(),
                partition.total_dim()
            ),
        ));
    }

    let instr_values = at.array(at.required(obj, "instruments")?, "instruments")?;
    if instr_values.len() != 2 {
        return Err(at.err(
            "instruments",
            format!(
                "expected two instruments to compare, got {}",
                instr_values.len()
            ),
        ));
    }
    let dim_a = dims[0];
    let first = parse_instrument(at, &instr_values[0], "instruments[0]", dim_a)?;
    let second = parse_instrument(at, &instr_values[1], "instruments[1]", dim_a)?;

    let split = at.object(at.required(obj, "b_split")?, "b_split")?;
    at.only_keys(split, &["blocks"])?;
    let b_split = parse_blocks(at, at.required(split, "blocks")?, "b_split.blocks", dims[1])?;

    Ok(BipartiteSpec {
        state,
        partition,
        instruments: [first, second],
        b_split,
        tol: at.opt_tol(obj)?,
    })
}

/// `{"projective": [index list | matrix, ...]}` or `{"kraus": [matrix, ...]}`
/// acting on sector A.
fn parse_instrument(
    at: &At,
    v: &Value,
    field: &str,
    dim: usize,
) -> Result<LocalInstrument, CliError> {
    let obj = at.object(v, field)?;
    let check_dim = |m: &ComplexMatrix, f: &str| {
        if m.rows() != dim || m.cols() != dim {
            Err(at.err(
                f,
                format!(
                    "expected a {dim}x{dim} matrix, got {}x{}",
                    m.rows(),
                    m.cols()
                ),
            ))
        } else {
            Ok(())
        }
    };
    match (obj.get("projective"), obj.get("kraus"), obj.len()) {
        (Some(p), None, 1) => {
            let f = format!("{field}.projective");
            let projectors = at
                .array(p, &f)?
                .iter()
                .map(|spec| {
                    if At::is_index_list(spec) {
                        Projector::onto_basis_states(dim, &at.indices(spec, &f)?)
                            .map_err(|e| at.core(&f, e))
                    } else {
                        let m = at.matrix(spec, &f)?;
                        check_dim(&m, &f)?;
                        Projector::new(m).map_err(|e| at.core(&f, e))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            LocalInstrument::projective(Sector::A, projectors).map_err(|e| at.core(&f, e))
        }
        (None, Some(k), 1) => {
            let f = format!("{field}.kraus");
            let ops = at
                .array(k, &f)?
                .iter()
                .map(|m| {
                    let m = at.matrix(m, &f)?;
                    check_dim(&m, &f)?;
                    Ok(m)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            LocalInstrument::kraus(Sector::A, ops).map_err(|e| at.core(&f, e))
        }
        _ => Err(at.err(field, "expected exactly one of \"projective\" or \"kraus\"")),
    }
}

/// Blocks given as index lists or as matrices whose columns span the block.
fn parse_blocks(at: &At, v: &Value, field: &str, dim: usize) -> Result<SumPartition, CliError> {
    let bases = at
        .array(v, field)?
        .iter()
        .map(|b| {
            if At::is_index_list(b) {
                let idx = at.indices(b, field)?;
                let cols = idx
                    .iter()
                    .map(|&i| ComplexMatrix::basis_vector(dim, i).map(|c| c.column(0)))
                    .collect::<nosig_core::Result<Vec<_>>>()
                    .map_err(|e| at.core(field, e))?;
                ComplexMatrix::from_columns(&cols).map_err(|e| at.core(field, e))
            } else {
                let m = at.matrix(b, field)?;
                if m.rows() != dim {
                    return Err(at.err(
                        field,
                        format!("block basis has {} rows, expected {dim}", m.rows()),
                    ));
                }
                Ok(m)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    SumPartition::new(bases).map_err(|e| at.core(field, e))
}

fn parse_box(at: &At, v: &Value) -> Result<BoxSpec, CliError> {
    let obj = at.object(v, "box")?;
    at.only_keys(obj, &["x", "y", "a", "b", "table", "tol"])?;
    let counts = ["x", "y", "a", "b"]
        .iter()
        .map(|f| at.count(at.required(obj, f)?, f))
        .collect::<Result<Vec<_>, _>>()?;
    let table_v = at.array(at.required(obj, "table")?, "table")?;
    let mut table = Vec::with_capacity(counts[0]);
    for tx in table_v {
        let mut row_y = Vec::new();
        for txy in at.array(tx, "table")? {
            let mut rows_a = Vec::new();
            for ta in at.array(txy, "table")? {
                rows_a.push(
                    at.array(ta, "table")?
                        .iter()
                        .map(|p| at.number(p, "table"))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            row_y.push(rows_a);
        }
        table.push(row_y);
    }
    let table = NsBox::new(table).map_err(|e| at.core("table", e))?;
    let (nx, ny) = table.inputs();
    let (na, nb) = table.outputs();
    if [nx, ny, na, nb] != counts[..] {
        return Err(at.err(
            "table",
            format!(
                "table shape {nx}x{ny}x{na}x{nb} does not match declared x, y, a, b = {counts:?}"
            ),
        ));
    }
    Ok(BoxSpec {
        table,
        tol: at.opt_tol(obj)?,
    })
}

fn parse_sweep(at: &At, v: &Value) -> Result<SweepParams, CliError> {
    let obj = at.object(v, "sweep")?;
    at.only_keys(
        obj,
        &[
            "kind",
            "dims",
            "trials",
            "seed",
            "tol",
            "budget",
            "planted_bug",
        ],
    )?;
    let kind_name = at
        .required(obj, "kind")?
        .as_str()
        .ok_or_else(|| at.err("kind", "expected a string"))?;
    let kind: SweepKind = kind_name
        .parse()
        .map_err(|e: CliError| at.err("kind", e.to_string()))?;
    let mut p = SweepParams::defaults(kind);
    if let Some(d) = obj.get("dims") {
        p.dims = at
            .array(d, "dims")?
            .iter()
            .map(|item| match item {
                Value::Array(_) => at.indices(item, "dims"),
                _ => at.count(item, "dims").map(|n| vec![n]),
            })
            .collect::<Result<Vec<_>, _>>()?;
    }
    if let Some(t) = obj.get("trials") {
        p.trials = at.count(t, "trials")?;
    }
    if let Some(s) = obj.get("seed") {
        p.seed = s
            .as_u64()
            .ok_or_else(|| at.err("seed", "expected a non-negative integer"))?;
    }
    if let Some(t) = at.opt_tol(obj)? {
        p.tol = t;
    }
    if let Some(b) = obj.get("budget") {
        p.budget = at.count(b, "budget")?;
    }
    if let Some(b) = obj.get("planted_bug") {
        p.planted_bug = b
            .as_bool()
            .ok_or_else(|| at.err("planted_bug", "expected a boolean"))?;
    }
    p.validate().map_err(|m| at.err("dims", m))?;
    Ok(p)
}

/// Parses `2x2,3x3` or `3,4,5` style dimension lists from the command line.
pub fn parse_dims_flag(s: &str) -> Result<Vec<Vec<usize>>, CliError> {
    s.split(',')
        .map(|item| {
            item.trim()
                .split('x')
                .map(|d| d.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| {
                    CliError::Usage(format!("bad --dims item `{item}`; expected e.g. 2x3 or 4"))
                })
        })
        .collect()
}
