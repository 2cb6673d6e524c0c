//! Parameter sweeps, switch points and optimal-cooling search.

mod optimize;
mod switch;

pub use optimize::{nelder_mead, optimize_cooling, Bound, NelderMeadOptions, Objective, Optimum, SimplexResult};
pub use switch::{bisect, find_switch_point, SwitchPoint};

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{stability_check, QuadratureOptions};
use crate::error::{Error, Result};
use crate::params::{to_dimensionless, ChainParams, Config};
use crate::solver::{solve, Solver};

/// A sweepable parameter. Rates are in units of the reference frequency `omega_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamPath {
    /// Drive power (W); physical configs only.
    Power,
    Kappa,
    Coupling,
    GCd,
    OmegaFb,
    Zeta,
    /// Damping of every resonator.
    Gamma,
    /// Bath occupancy of every resonator.
    Nbar,
    /// Every link of the chain.
    EtaTilde,
    /// One link, 0-based.
    EtaTildeAt(usize),
    /// One resonator frequency, 0-based.
    OmegaAt(usize),
    /// `omega_2 / omega_1`.
    OmegaRatio,
}

impl ParamPath {
    /// Whether the parameter is applied before the dimensionless conversion of a physical config.
    fn is_physical_stage(self) -> bool {
        matches!(
            self,
            ParamPath::Power
                | ParamPath::Kappa
                | ParamPath::GCd
                | ParamPath::OmegaFb
                | ParamPath::Zeta
                | ParamPath::Gamma
                | ParamPath::Nbar
        )
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamPath::Power => f.write_str("P_L"),
            ParamPath::Kappa => f.write_str("kappa"),
            ParamPath::Coupling => f.write_str("G"),
            ParamPath::GCd => f.write_str("g_cd"),
            ParamPath::OmegaFb => f.write_str("omega_fb"),
            ParamPath::Zeta => f.write_str("zeta"),
            ParamPath::Gamma => f.write_str("gamma"),
            ParamPath::Nbar => f.write_str("nbar"),
            ParamPath::EtaTilde => f.write_str("eta_tilde"),
            ParamPath::EtaTildeAt(j) => write!(f, "eta_tilde_{}", j + 1),
            ParamPath::OmegaAt(j) => write!(f, "omega_{}", j + 1),
            ParamPath::OmegaRatio => f.write_str("omega_2/omega_1"),
        }
    }
}

impl FromStr for ParamPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let indexed = |prefix: &str| -> Option<usize> {
            s.strip_prefix(prefix)
                .and_then(|rest| rest.parse::<usize>().ok())
                .filter(|&j| j >= 1)
                .map(|j| j - 1)
        };
        Ok(match s {
            "P_L" | "P" => ParamPath::Power,
            "kappa" => ParamPath::Kappa,
            "G" => ParamPath::Coupling,
            "g_cd" => ParamPath::GCd,
            "omega_fb" => ParamPath::OmegaFb,
            "zeta" => ParamPath::Zeta,
            "gamma" => ParamPath::Gamma,
            "nbar" => ParamPath::Nbar,
            "eta_tilde" => ParamPath::EtaTilde,
            "omega_2/omega_1" => ParamPath::OmegaRatio,
            _ => {
                if let Some(j) = indexed("eta_tilde_") {
                    ParamPath::EtaTildeAt(j)
                } else if let Some(j) = indexed("omega_") {
                    ParamPath::OmegaAt(j)
                } else {
                    return Err(Error::config(format!("unknown sweep parameter {s:?}")));
                }
            }
        })
    }
}

impl Serialize for ParamPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParamPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn set_chain(c: &mut ChainParams, path: ParamPath, v: f64) -> Result<()> {
    let n = c.n();
    match path {
        ParamPath::Power => {
            return Err(Error::config("P_L can only be swept on a physical config"));
        }
        ParamPath::Kappa => c.kappa = v,
        ParamPath::Coupling => c.coupling = v,
        ParamPath::GCd => c.g_cd = v,
        ParamPath::OmegaFb => c.omega_fb = v,
        ParamPath::Zeta => c.zeta = v,
        ParamPath::Gamma => c.gamma = vec![v; n],
        ParamPath::Nbar => c.nbar = vec![v; n],
        ParamPath::EtaTilde => c.eta_tilde = vec![v; n.saturating_sub(1)],
        ParamPath::EtaTildeAt(j) => {
            *c.eta_tilde
                .get_mut(j)
                .ok_or_else(|| Error::config(format!("no link eta_tilde_{} for N = {n}", j + 1)))? = v
        }
        ParamPath::OmegaAt(j) => {
            *c.omega
                .get_mut(j)
                .ok_or_else(|| Error::config(format!("no resonator omega_{} for N = {n}", j + 1)))? = v
        }
        ParamPath::OmegaRatio => {
            if n < 2 {
                return Err(Error::config("omega_2/omega_1 needs N >= 2"));
            }
            c.omega[1] = v * c.omega[0];
        }
    }
    Ok(())
}

/// Applies parameter assignments to a base config and returns validated chain parameters.
///
/// On a physical base, `P_L`, `kappa`, `g_cd`, `omega_fb`, `zeta`, `gamma` and `nbar`
/// are applied before the conversion, so the optomechanical coupling follows the drive
/// and the cavity decay; every other parameter is applied to the converted chain.
pub fn apply(base: &Config, assignments: &[(ParamPath, f64)]) -> Result<ChainParams> {
    let mut chain = match base {
        Config::Dimensionless(c) => c.clone(),
        Config::Physical(p) => {
            let mut p = p.clone();
            let w_ref = p.omega_ref();
            for &(path, v) in assignments.iter().filter(|(k, _)| k.is_physical_stage()) {
                match path {
                    ParamPath::Power => p.power = v,
                    ParamPath::Kappa => p.kappa = v * w_ref,
                    ParamPath::GCd => p.g_cd = v,
                    ParamPath::OmegaFb => p.omega_fb = v * w_ref,
                    ParamPath::Zeta => p.zeta = v,
                    ParamPath::Gamma => p.gamma = vec![v * w_ref; p.n()],
                    ParamPath::Nbar => p.nbar = vec![v; p.n()],
                    _ => unreachable!("filtered to physical-stage parameters"),
                }
            }
            to_dimensionless(&p)?
        }
    };
    let physical = matches!(base, Config::Physical(_));
    for &(path, v) in assignments {
        if !(physical && path.is_physical_stage()) {
            set_chain(&mut chain, path, v)?;
        }
    }
    chain.validate()?;
    Ok(chain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Lin,
    Log,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lin" => Ok(Scale::Lin),
            "log" => Ok(Scale::Log),
            other => Err(Error::config(format!("unknown axis scale {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub path: ParamPath,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn new(path: ParamPath, lo: f64, hi: f64, points: usize, scale: Scale) -> Self {
        Axis { path, lo, hi, points, scale }
    }

    /// Parses `name:lo:hi:points[:lin|log]`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::config(format!(
                "axis {s:?} must look like name:lo:hi:points[:lin|log]"
            )));
        }
        let num = |t: &str| -> Result<f64> {
            t.parse().map_err(|_| Error::config(format!("bad number {t:?} in axis {s:?}")))
        };
        Ok(Axis {
            path: parts[0].parse()?,
            lo: num(parts[1])?,
            hi: num(parts[2])?,
            points: parts[3]
                .parse()
                .map_err(|_| Error::config(format!("bad point count in axis {s:?}")))?,
            scale: parts.get(4).map_or(Ok(Scale::Lin), |t| t.parse())?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::config(format!("axis {} has a non-finite range", self.path)));
        }
        if self.lo == self.hi {
            return Err(Error::config(format!("axis {} has a zero-length range", self.path)));
        }
        if self.points < 2 {
            return Err(Error::config(format!("axis {} needs at least 2 points", self.path)));
        }
        if self.scale == Scale::Log && !(self.lo > 0.0 && self.hi > 0.0) {
            return Err(Error::config(format!("log axis {} needs a positive range", self.path)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i + 1 == self.points {
                    return self.hi;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Lin => self.lo + t * (self.hi - self.lo),
                    Scale::Log => (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub solver: Solver,
    #[serde(default)]
    pub quadrature: QuadratureOptions,
}

impl SweepSpec {
    pub fn new(axes: Vec<Axis>, solver: Solver) -> Self {
        SweepSpec {
            axes,
            solver,
            quadrature: QuadratureOptions::default(),
        }
    }

    pub fn validate(&self, base: &Config) -> Result<()> {
        if !(1..=2).contains(&self.axes.len()) {
            return Err(Error::config("a sweep has one or two axes"));
        }
        for a in &self.axes {
            a.validate()?;
        }
        if self.axes.len() == 2 && self.axes[0].path == self.axes[1].path {
            return Err(Error::config("both sweep axes name the same parameter"));
        }
        let n = resonators(base);
        for a in &self.axes {
            let ok = match a.path {
                ParamPath::Power => matches!(base, Config::Physical(_)),
                ParamPath::EtaTildeAt(j) => j + 1 < n,
                ParamPath::OmegaAt(j) => j < n,
                ParamPath::OmegaRatio => n >= 2,
                _ => true,
            };
            if !ok {
                return Err(Error::config(format!("parameter {} does not apply to this config (N = {n})", a.path)));
            }
        }
        Ok(())
    }

    /// Grid points in row-major order, the last axis varying fastest.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        match values.as_slice() {
            [a] => a.iter().map(|&x| vec![x]).collect(),
            [a, b] => a
                .iter()
                .flat_map(|&x| b.iter().map(move |&y| vec![x, y]))
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub n_f: Option<Vec<f64>>,
    pub stable: bool,
    pub max_real_part: Option<f64>,
    pub error: Option<String>,
    pub quadrature_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axes: Vec<String>,
    pub resonators: usize,
    pub solver: Solver,
    pub rows: Vec<SweepRow>,
}

/// Evaluates one point of a sweep; failures are recorded in the row.
pub fn evaluate_point(
    base: &Config,
    paths: &[ParamPath],
    values: &[f64],
    solver: Solver,
    opts: &QuadratureOptions,
) -> SweepRow {
    let assignments: Vec<(ParamPath, f64)> = paths.iter().copied().zip(values.iter().copied()).collect();
    let mut row = SweepRow {
        values: values.to_vec(),
        n_f: None,
        stable: false,
        max_real_part: None,
        error: None,
        quadrature_nodes: None,
    };
    let p = match apply(base, &assignments) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let report = stability_check(&p);
    row.stable = report.stable;
    row.max_real_part = Some(report.max_real_part);
    match solve(&p, solver, opts) {
        Ok(r) => {
            row.quadrature_nodes = r.quadrature.as_ref().map(|q| q.nodes);
            row.n_f = Some(r.n_f);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn resonators(base: &Config) -> usize {
    match base {
        Config::Physical(p) => p.n(),
        Config::Dimensionless(c) => c.n(),
    }
}

/// Runs a sweep. Points are evaluated in parallel and returned in grid order.
pub fn run_sweep(spec: &SweepSpec, base: &Config) -> Result<SweepTable> {
    spec.validate(base)?;
    let paths: Vec<ParamPath> = spec.axes.iter().map(|a| a.path).collect();
    let rows: Vec<SweepRow> = spec
        .grid()
        .par_iter()
        .map(|v| evaluate_point(base, &paths, v, spec.solver, &spec.quadrature))
        .collect();
    Ok(SweepTable {
        axes: paths.iter().map(ToString::to_string).collect(),
        resonators: resonators(base),
        solver: spec.solver,
        rows,
    })
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".to_string()
    }
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = self.axes.clone();
        h.extend((1..=self.resonators).map(|j| format!("n_f_{j}")));
        h.push("stable".into());
        h
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header()).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.values.iter().map(|&v| format_number(v)).collect();
            match &r.n_f {
                Some(n) => rec.extend(n.iter().map(|&v| format_number(v))),
                None => rec.extend(std::iter::repeat_n("NaN".to_string(), self.resonators)),
            }
            rec.push(r.stable.to_string());
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.to_json())
            .map_err(|e| Error::Numerical(format!("JSON output: {e}")))
    }

    /// JSON form with per-row diagnostics; non-finite numbers become `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let num = |x: f64| -> serde_json::Value {
            if x.is_finite() {
                serde_json::Value::from(x)
            } else {
                serde_json::Value::Null
            }
        };
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = serde_json::Map::new();
                for (name, &v) in self.axes.iter().zip(&r.values) {
                    m.insert(name.clone(), num(v));
                }
                m.insert(
                    "n_f".into(),
                    r.n_f.as_ref().map_or(serde_json::Value::Null, |n| {
                        serde_json::Value::Array(n.iter().map(|&v| num(v)).collect())
                    }),
                );
                m.insert("stable".into(), r.stable.into());
                m.insert(
                    "max_real_part".into(),
                    r.max_real_part.map_or(serde_json::Value::Null, num),
                );
                m.insert(
                    "error".into(),
                    r.error.clone().map_or(serde_json::Value::Null, Into::into),
                );
                m.insert(
                    "quadrature_nodes".into(),
                    r.quadrature_nodes.map_or(serde_json::Value::Null, Into::into),
                );
                serde_json::Value::Object(m)
            })
            .collect();
        serde_json::json!({
            "axes": self.axes,
            "solver": self.solver,
            "resonators": self.resonators,
            "rows": rows,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// A table re-read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredTable {
    pub axes: Vec<ParamPath>,
    pub values: Vec<Vec<f64>>,
    pub n_f: Vec<Vec<f64>>,
    pub stable: Vec<bool>,
}

fn parse_cell(s: &str, line: usize) -> Result<f64> {
    if s == "NaN" {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| Error::Config {
        line: Some(line),
        message: format!("bad number {s:?}"),
    })
}

/// Reads a sweep table written by [`SweepTable::write_csv`].
pub fn read_csv<R: Read>(r: R) -> Result<StoredTable> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::config(format!("CSV header: {e}")))?
        .iter()
        .map(String::from)
        .collect();
    let first_n = header
        .iter()
        .position(|h| h == "n_f_1")
        .ok_or_else(|| Error::config("CSV header has no n_f_1 column"))?;
    if header.last().map(String::as_str) != Some("stable") {
        return Err(Error::config("CSV header must end with a stable column"));
    }
    let axes = header[..first_n]
        .iter()
        .map(|h| h.parse())
        .collect::<Result<Vec<ParamPath>>>()?;
    let n_res = header.len() - 1 - first_n;
    let mut table = StoredTable {
        axes,
        values: Vec::new(),
        n_f: Vec::new(),
        stable: Vec::new(),
    };
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Config {
            line: Some(line),
            message: e.to_string(),
        })?;
        let cells: Vec<&str> = rec.iter().collect();
        table.values.push(
            cells[..first_n]
                .iter()
                .map(|c| parse_cell(c, line))
                .collect::<Result<_>>()?,
        );
        table.n_f.push(
            cells[first_n..first_n + n_res]
                .iter()
                .map(|c| parse_cell(c, line))
                .collect::<Result<_>>()?,
        );
        table.stable.push(cells[first_n + n_res] == "true");
    }
    Ok(table)
}

/// Outcome of recomputing a stored table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub rows: usize,
    /// Rows whose recomputed phonon numbers differ in any bit.
    pub mismatched_rows: Vec<usize>,
    pub max_abs_difference: f64,
    pub recomputed: SweepTable,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.mismatched_rows.is_empty()
    }
}

/// Recomputes every row of a stored table against `base`.
pub fn replay(stored: &StoredTable, base: &Config, solver: Solver, opts: &QuadratureOptions) -> Result<ReplayReport> {
    let rows: Vec<SweepRow> = stored
        .values
        .par_iter()
        .map(|v| evaluate_point(base, &stored.axes, v, solver, opts))
        .collect();
    let mut mismatched_rows = Vec::new();
    let mut max_abs_difference: f64 = 0.0;
    for (i, (row, old)) in rows.iter().zip(&stored.n_f).enumerate() {
        let new: Vec<f64> = row.n_f.clone().unwrap_or_else(|| vec![f64::NAN; old.len()]);
        let same = new.len() == old.len()
            && new
                .iter()
                .zip(old)
                .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        if !same {
            mismatched_rows.push(i);
        }
        for (a, b) in new.iter().zip(old) {
            if a.is_finite() && b.is_finite() {
                max_abs_difference = max_abs_difference.max((a - b).abs());
            }
        }
    }
    let resonators = stored.n_f.first().map_or(0, Vec::len);
    Ok(ReplayReport {
        rows: rows.len(),
        mismatched_rows,
        max_abs_difference,
        recomputed: SweepTable {
            axes: stored.axes.iter().map(ToString::to_string).collect(),
            resonators,
            solver,
            rows,
        },
    })
}
