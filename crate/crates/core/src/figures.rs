//! Data behind the reference figures.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{self, QuadratureOptions};
use crate::error::{Error, Result};
use crate::params::{ChainParams, Config};
use crate::presets;
use crate::solver::Solver;
use crate::sweep::{format_number, run_sweep, Axis, ParamPath, Scale, SweepSpec, SweepTable};
use crate::twomode;

/// A plain numeric table; failed entries are NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|&v| format_number(v))).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: serde_json::Map<String, serde_json::Value> = self
                    .header
                    .iter()
                    .zip(r)
                    .map(|(h, &v)| {
                        let v = if v.is_finite() { v.into() } else { serde_json::Value::Null };
                        (h.clone(), v)
                    })
                    .collect();
                serde_json::Value::Object(m)
            })
            .collect();
        serde_json::json!({ "columns": self.header, "rows": rows })
    }
}

/// Evenly spaced grid including both ends.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    Axis::new(ParamPath::Kappa, lo, hi, points.max(2), Scale::Lin).values()
}

/// Effective frequencies and dampings of both resonators at each probe frequency.
pub fn response_table(p: &ChainParams, omegas: &[f64]) -> DataTable {
    let rows = omegas
        .par_iter()
        .map(|&w| match twomode::effective_response(p, w) {
            Ok(r) => vec![w, r.frequency[0], r.frequency[1], r.damping[0], r.damping[1]],
            Err(_) => {
                // the dampings stay defined when a squared frequency turns negative
                let mut row = vec![w, f64::NAN, f64::NAN, f64::NAN, f64::NAN];
                if let Ok(r) = twomode::effective_damping(p, w) {
                    row[3] = r[0];
                    row[4] = r[1];
                }
                row
            }
        })
        .collect();
    DataTable {
        header: ["omega", "Omega_1_eff", "Omega_2_eff", "Gamma_1_eff", "Gamma_2_eff"]
            .map(String::from)
            .to_vec(),
        rows,
    }
}

/// Response at `omega = 0` while one parameter moves over `values`.
pub fn resonant_response_scan(p: &ChainParams, path: ParamPath, values: &[f64]) -> Result<DataTable> {
    let base = Config::Dimensionless(p.clone());
    let rows = values
        .par_iter()
        .map(|&v| {
            let r = crate::sweep::apply(&base, &[(path, v)]).and_then(|q| twomode::effective_response(&q, 0.0));
            match r {
                Ok(r) => vec![v, r.frequency[0], r.frequency[1], r.damping[0], r.damping[1]],
                Err(_) => vec![v, f64::NAN, f64::NAN, f64::NAN, f64::NAN],
            }
        })
        .collect();
    Ok(DataTable {
        header: vec![
            path.to_string(),
            "Omega_1_eff".into(),
            "Omega_2_eff".into(),
            "Gamma_1_eff".into(),
            "Gamma_2_eff".into(),
        ],
        rows,
    })
}

/// Position spectra of every resonator and, for two resonators, the individual noise terms.
pub fn spectra_table(p: &ChainParams, omegas: &[f64]) -> DataTable {
    let n = p.n();
    let mut header = vec!["omega".to_string()];
    header.extend((1..=n).map(|j| format!("S_q_{j}")));
    let two = n == 2;
    if two {
        header.extend(["S_fb_1", "S_rp_1", "S_th_1", "S_me_1", "S_th_2", "S_me_2"].map(String::from));
    }
    let rows = omegas
        .par_iter()
        .map(|&w| {
            let mut row = vec![w];
            match chain::spectra(p, w) {
                Ok(s) => row.extend(s),
                Err(_) => row.extend(std::iter::repeat_n(f64::NAN, n)),
            }
            if two {
                match twomode::noise_breakdown(p, w) {
                    Ok(b) => row.extend([
                        b.feedback,
                        b.radiation_pressure,
                        b.thermal[0],
                        b.mechanical[0],
                        b.thermal[1],
                        b.mechanical[1],
                    ]),
                    Err(_) => row.extend([f64::NAN; 6]),
                }
            }
            row
        })
        .collect();
    DataTable { header, rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        };
        f.write_str(s)
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            other => Err(Error::config(format!("unknown figure {other:?} (fig2..fig6)"))),
        }
    }
}

impl Figure {
    /// Built-in base parameters; `n` sets the chain length of `fig6`.
    pub fn default_base(self, n: usize) -> Config {
        match self {
            Figure::Fig2 => Config::Dimensionless(presets::effective_damping()),
            Figure::Fig3 | Figure::Fig4 | Figure::Fig5 => Config::Physical(presets::device(0.1, 3.5)),
            Figure::Fig6 => Config::Dimensionless(presets::uniform_chain(n, 0.05)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PanelData {
    Sweep(SweepTable),
    Table(DataTable),
}

impl PanelData {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        match self {
            PanelData::Sweep(t) => t.write_csv(w),
            PanelData::Table(t) => t.write_csv(w),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            PanelData::Sweep(t) => t.to_json(),
            PanelData::Table(t) => t.to_json(),
        }
    }
}

/// One output file of a figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub name: String,
    pub data: PanelData,
}

fn sweep_panel(name: &str, base: &Config, axes: Vec<Axis>, solver: Solver, opts: &QuadratureOptions) -> Result<Panel> {
    let spec = SweepSpec {
        axes,
        solver,
        quadrature: *opts,
    };
    Ok(Panel {
        name: name.into(),
        data: PanelData::Sweep(run_sweep(&spec, base)?),
    })
}

fn lin(path: ParamPath, lo: f64, hi: f64, points: usize) -> Axis {
    Axis::new(path, lo, hi, points, Scale::Lin)
}

/// Regenerates every panel of `fig` on `base`.
pub fn generate(fig: Figure, base: &Config, solver: Solver, opts: &QuadratureOptions) -> Result<Vec<Panel>> {
    use ParamPath::*;
    match fig {
        Figure::Fig2 => {
            let p = base.chain()?;
            let table = |name: &str, t: DataTable| Panel {
                name: name.into(),
                data: PanelData::Table(t),
            };
            Ok(vec![
                table("response_omega", response_table(&p, &linspace(0.0, 3.0, 301))),
                table("response_G", resonant_response_scan(&p, Coupling, &linspace(0.0, 0.5, 101))?),
                table("response_g_cd", resonant_response_scan(&p, GCd, &linspace(0.0, 8.0, 81))?),
                table("response_eta_tilde", resonant_response_scan(&p, EtaTilde, &linspace(0.0, 0.3, 61))?),
            ])
        }
        Figure::Fig3 => {
            let p = base.chain()?;
            Ok(vec![
                Panel {
                    name: "spectra".into(),
                    data: PanelData::Table(spectra_table(&p, &linspace(-3.0, 3.0, 601))),
                },
                sweep_panel(
                    "map",
                    base,
                    vec![Axis::new(Power, 1e-3, 0.5, 19, Scale::Log), lin(Kappa, 0.5, 6.0, 23)],
                    solver,
                    opts,
                )?,
                sweep_panel("power", base, vec![Axis::new(Power, 1e-3, 0.5, 55, Scale::Log)], solver, opts)?,
                sweep_panel("kappa", base, vec![lin(Kappa, 0.5, 6.0, 56)], solver, opts)?,
            ])
        }
        Figure::Fig4 => Ok(vec![
            sweep_panel("map", base, vec![lin(GCd, 0.0, 2.0, 21), lin(OmegaFb, 0.5, 6.0, 23)], solver, opts)?,
            sweep_panel("g_cd", base, vec![lin(GCd, 0.0, 2.0, 41)], solver, opts)?,
            sweep_panel("omega_fb", base, vec![lin(OmegaFb, 0.2, 6.0, 59)], solver, opts)?,
        ]),
        Figure::Fig5 => Ok(vec![
            sweep_panel(
                "map",
                base,
                vec![lin(EtaTildeAt(0), 0.01, 0.2, 20), lin(OmegaRatio, 0.5, 3.0, 26)],
                solver,
                opts,
            )?,
            sweep_panel("eta_tilde", base, vec![lin(EtaTildeAt(0), 0.01, 0.2, 39)], solver, opts)?,
            sweep_panel("ratio", base, vec![lin(OmegaRatio, 0.5, 3.0, 51)], solver, opts)?,
        ]),
        Figure::Fig6 => {
            let n = base.chain()?.n();
            sweep_panel(&format!("chain_n{n}"), base, vec![lin(EtaTilde, 0.01, 0.3, 30)], solver, opts).map(|p| vec![p])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_names_round_trip() {
        for f in [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6] {
            assert_eq!(f.to_string().parse::<Figure>().unwrap(), f);
        }
        assert!("fig7".parse::<Figure>().is_err());
    }

    #[test]
    fn fig2_response_table_shape() {
        let panels = generate(
            Figure::Fig2,
            &Figure::Fig2.default_base(2),
            Solver::Lyapunov,
            &QuadratureOptions::default(),
        )
        .unwrap();
        assert_eq!(panels.len(), 4);
        let PanelData::Table(t) = &panels[0].data else { panic!("table expected") };
        assert_eq!(t.rows.len(), 301);
        assert_eq!(t.rows[0][0], 0.0);
        assert!((t.rows[0][1] - 0.98).abs() < 0.01);
    }

    #[test]
    fn spectra_columns_for_two_resonators() {
        let p = presets::device_operating_point();
        let t = spectra_table(&p, &[0.0, 1.0]);
        assert_eq!(t.header.len(), 1 + 2 + 6);
        assert!(t.rows.iter().flatten().all(|v| v.is_finite()));
    }
}
