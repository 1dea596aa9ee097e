//! Input and output documents: model JSON, surface CSV, initial-surface
//! specs, and flow run records.
//!
//! Every parser here accepts untrusted text and returns `Err` rather than
//! panicking on malformed input; grid shape limits bound allocations.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{CmcError, Result};
use crate::flow::Snapshot;
use crate::grid::PeriodicGrid;
use crate::hypersurface::GraphSurface;
use crate::spacetime::{FiberSpec, MultiWarpedSpacetime};

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    /// Missing or null means unbounded below.
    #[serde(default)]
    t_min: Option<f64>,
    /// Null means future-infinite.
    #[serde(default)]
    t_max: Option<f64>,
    #[serde(default)]
    lambda: f64,
    fibers: Vec<FiberSpec>,
}

/// Parses a model document:
/// `{ "t_min": 0.0, "t_max": null, "lambda": 0.0,
///    "fibers": [ { "dim": 1, "period": 5.0, "law": {"type": "power", "p": 0.75} } ] }`.
pub fn parse_model_json(text: &str) -> Result<MultiWarpedSpacetime> {
    let doc: ModelDoc =
        serde_json::from_str(text).map_err(|e| CmcError::Parse(format!("model JSON: {e}")))?;
    MultiWarpedSpacetime::new(
        doc.t_min.unwrap_or(f64::NEG_INFINITY),
        doc.t_max,
        doc.fibers,
        doc.lambda,
    )
}

pub fn model_to_json(m: &MultiWarpedSpacetime) -> String {
    let doc = ModelDoc {
        t_min: if m.t_min.is_finite() {
            Some(m.t_min)
        } else {
            None
        },
        t_max: m.t_max,
        lambda: m.lambda,
        fibers: m.fibers.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
}

/// Serializes a surface as CSV: a `# grid: N1[,N2[,N3]]; periods: b1[,...]`
/// header, then one `i1[,i2[,i3]],u` row per grid point in row-major order.
pub fn surface_to_csv(s: &GraphSurface) -> String {
    let dims: Vec<String> = s.grid.dims.iter().map(|n| n.to_string()).collect();
    let periods: Vec<String> = s.grid.periods.iter().map(|b| b.to_string()).collect();
    let mut out = format!(
        "# grid: {}; periods: {}\n",
        dims.join(","),
        periods.join(",")
    );
    let d = s.grid.dim();
    for idx in 0..s.grid.len() {
        let c = s.grid.unflatten(idx);
        for comp in c.iter().take(d) {
            out.push_str(&comp.to_string());
            out.push(',');
        }
        out.push_str(&s.u[idx].to_string());
        out.push('\n');
    }
    out
}

/// Parses the surface CSV format written by [`surface_to_csv`]. Every grid
/// point must appear exactly once.
pub fn parse_surface_csv(text: &str) -> Result<GraphSurface> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CmcError::Parse("surface CSV is empty".into()))?;
    let header = header
        .strip_prefix("# grid:")
        .ok_or_else(|| CmcError::Parse("surface CSV must start with '# grid:'".into()))?;
    let (dims_part, periods_part) = header
        .split_once(';')
        .ok_or_else(|| CmcError::Parse("surface header needs '; periods:'".into()))?;
    let periods_part = periods_part
        .trim()
        .strip_prefix("periods:")
        .ok_or_else(|| CmcError::Parse("surface header needs 'periods:'".into()))?;
    let dims = parse_list::<usize>(dims_part, "grid dims")?;
    let periods = parse_list::<f64>(periods_part, "periods")?;
    let grid = PeriodicGrid::new(dims, periods)?;

    let d = grid.dim();
    let mut u = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    let mut rows = 0usize;
    for (line_no, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(CmcError::Parse(format!(
                "row {}: expected {} fields, got {}",
                line_no + 2,
                d + 1,
                fields.len()
            )));
        }
        let mut comps = [0usize; crate::grid::MAX_DIM];
        for k in 0..d {
            comps[k] = fields[k].trim().parse().map_err(|e| {
                CmcError::Parse(format!("row {}: bad index: {e}", line_no + 2))
            })?;
            if comps[k] >= grid.dims[k] {
                return Err(CmcError::Parse(format!(
                    "row {}: index {} out of range for axis {k}",
                    line_no + 2,
                    comps[k]
                )));
            }
        }
        let value: f64 = fields[d].trim().parse().map_err(|e| {
            CmcError::Parse(format!("row {}: bad height: {e}", line_no + 2))
        })?;
        let idx = grid.flatten(&comps[..d]);
        if seen[idx] {
            return Err(CmcError::Parse(format!(
                "row {}: duplicate grid point",
                line_no + 2
            )));
        }
        seen[idx] = true;
        u[idx] = value;
        rows += 1;
    }
    if rows != grid.len() {
        return Err(CmcError::Parse(format!(
            "surface CSV has {rows} rows, grid needs {}",
            grid.len()
        )));
    }
    GraphSurface::new(grid, u)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.trim()
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| CmcError::Parse(format!("{what}: bad entry '{tok}': {e}")))
        })
        .collect()
}

/// Initial-surface mini-language: `const:T`, `sine:T,A,k`
/// (`u = T + A sin(k pi x1 / b1)`), or `file:PATH`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSurface {
    Const(f64),
    Sine { base: f64, amplitude: f64, mode: u32 },
    File(PathBuf),
}

pub fn parse_initial_surface(spec: &str) -> Result<InitialSurface> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CmcError::Parse(format!("u0 spec '{spec}' needs 'kind:...'")))?;
    match kind {
        "const" => {
            let t: f64 = rest
                .trim()
                .parse()
                .map_err(|e| CmcError::Parse(format!("u0 const: {e}")))?;
            if !t.is_finite() {
                return Err(CmcError::Parse("u0 const must be finite".into()));
            }
            Ok(InitialSurface::Const(t))
        }
        "sine" => {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(CmcError::Parse(
                    "u0 sine needs three parameters: sine:T,A,k".into(),
                ));
            }
            let base: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|e| CmcError::Parse(format!("u0 sine base: {e}")))?;
            let amplitude: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|e| CmcError::Parse(format!("u0 sine amplitude: {e}")))?;
            let mode: u32 = parts[2]
                .trim()
                .parse()
                .map_err(|e| CmcError::Parse(format!("u0 sine mode: {e}")))?;
            if !base.is_finite() || !amplitude.is_finite() {
                return Err(CmcError::Parse("u0 sine parameters must be finite".into()));
            }
            Ok(InitialSurface::Sine {
                base,
                amplitude,
                mode,
            })
        }
        "file" => Ok(InitialSurface::File(PathBuf::from(rest))),
        other => Err(CmcError::Parse(format!(
            "unknown u0 kind '{other}' (expected const, sine, or file)"
        ))),
    }
}

impl InitialSurface {
    /// Realizes the spec on a grid. `File` variants must be loaded by the
    /// caller beforehand.
    pub fn build(&self, grid: PeriodicGrid) -> Result<GraphSurface> {
        match self {
            InitialSurface::Const(t) => GraphSurface::constant(grid, *t),
            InitialSurface::Sine {
                base,
                amplitude,
                mode,
            } => GraphSurface::sine(grid, *base, *amplitude, *mode),
            InitialSurface::File(path) => Err(CmcError::Argument(format!(
                "file-based surface {path:?} must be loaded from disk first"
            ))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GridDoc {
    dims: Vec<usize>,
    periods: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FlowRecordDoc {
    model: serde_json::Value,
    grid: GridDoc,
    c: f64,
    snapshots: Vec<Snapshot>,
}

/// A self-contained record of a flow run: the model, the grid, the forcing
/// level, and height snapshots (with consecutive step pairs) for the
/// estimate monitors.
#[derive(Debug)]
pub struct FlowRecord {
    pub model: MultiWarpedSpacetime,
    pub grid: PeriodicGrid,
    pub c: f64,
    pub snapshots: Vec<Snapshot>,
}

pub fn flow_record_to_json(
    m: &MultiWarpedSpacetime,
    grid: &PeriodicGrid,
    c: f64,
    snapshots: &[Snapshot],
) -> String {
    let doc = FlowRecordDoc {
        model: serde_json::from_str(&model_to_json(m)).expect("round-trip"),
        grid: GridDoc {
            dims: grid.dims.clone(),
            periods: grid.periods.clone(),
        },
        c,
        snapshots: snapshots.to_vec(),
    };
    serde_json::to_string(&doc).expect("record serialization cannot fail")
}

pub fn parse_flow_record(text: &str) -> Result<FlowRecord> {
    let doc: FlowRecordDoc =
        serde_json::from_str(text).map_err(|e| CmcError::Parse(format!("run record: {e}")))?;
    let model = parse_model_json(
        &serde_json::to_string(&doc.model).expect("value serialization cannot fail"),
    )?;
    let grid = PeriodicGrid::new(doc.grid.dims, doc.grid.periods)?;
    if !doc.c.is_finite() {
        return Err(CmcError::Parse("run record: c must be finite".into()));
    }
    for (i, snap) in doc.snapshots.iter().enumerate() {
        if snap.u.len() != grid.len() {
            return Err(CmcError::Parse(format!(
                "run record: snapshot {i} has {} heights, grid needs {}",
                snap.u.len(),
                grid.len()
            )));
        }
        if !snap.s.is_finite() || snap.u.iter().any(|v| !v.is_finite()) {
            return Err(CmcError::Parse(format!(
                "run record: snapshot {i} has non-finite values"
            )));
        }
    }
    Ok(FlowRecord {
        model,
        grid,
        c: doc.c,
        snapshots: doc.snapshots,
    })
}
