use std::fs::{self, File};
use std::path::{Path, PathBuf};

use domino_core::chain::stability_check;
use domino_core::figures::{self, Figure};
use domino_core::params::load_config;
use domino_core::sweep::{
    find_switch_point, optimize_cooling, read_csv, replay, run_sweep, Axis, Bound, NelderMeadOptions,
    Objective, SweepSpec,
};
use domino_core::{format_number, solve, Config, CoolingResult, Error, QuadratureOptions, Result, Solver};

use crate::output::{emit, write_rows};
use crate::{Cli, Command, Global, Grid, SolverChoice};

fn quadrature(g: &Global) -> Result<QuadratureOptions> {
    let mut o = QuadratureOptions::default();
    if let Some(t) = g.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config {
                line: None,
                message: format!("--tol must be positive, got {t}"),
            });
        }
        o.tol = t;
    }
    Ok(o)
}

fn config_error(message: impl Into<String>) -> Error {
    Error::Config {
        line: None,
        message: message.into(),
    }
}

fn single_solver(s: SolverChoice) -> Result<Solver> {
    match s {
        SolverChoice::Quadrature => Ok(Solver::Quadrature),
        SolverChoice::Appendix => Ok(Solver::Appendix),
        SolverChoice::Lyapunov => Ok(Solver::Lyapunov),
        SolverChoice::All => Err(config_error("--solver all is only available for `cool`")),
    }
}

fn grid(g: &Grid, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    let lo = g.omega_min.unwrap_or(lo);
    let hi = g.omega_max.unwrap_or(hi);
    let points = g.omega_points.unwrap_or(points);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || points < 2 {
        return Err(config_error(format!(
            "frequency grid needs finite omega-min < omega-max and at least 2 points (got {lo}, {hi}, {points})"
        )));
    }
    Ok(figures::linspace(lo, hi, points))
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::Cool { config, solver } => cool(&load_config(&config.config)?, *solver, g),
        Command::Spectra { config, grid: gr } => {
            let p = load_config(&config.config)?.chain()?;
            let t = figures::spectra_table(&p, &grid(gr, -3.0, 3.0, 601)?);
            emit(out, g.format, |w| t.write_csv(w), || t.to_json())
        }
        Command::Response { config, grid: gr } => {
            let p = load_config(&config.config)?.chain()?;
            if p.n() != 2 {
                return Err(config_error(format!("`response` needs N = 2, the config has N = {}", p.n())));
            }
            let t = figures::response_table(&p, &grid(gr, 0.0, 3.0, 301)?);
            emit(out, g.format, |w| t.write_csv(w), || t.to_json())
        }
        Command::Sweep {
            config,
            axis,
            replay: stored,
            solver,
        } => {
            let base = load_config(&config.config)?;
            let solver = single_solver(*solver)?;
            match stored {
                Some(path) => replay_table(&base, path, solver, g),
                None => {
                    let axes = axis.iter().map(|a| Axis::parse(a)).collect::<Result<Vec<_>>>()?;
                    let spec = SweepSpec {
                        axes,
                        solver,
                        quadrature: quadrature(g)?,
                    };
                    let t = run_sweep(&spec, &base)?;
                    emit(out, g.format, |w| t.write_csv(w), || t.to_json())
                }
            }
        }
        Command::Switch {
            config,
            param,
            lo,
            hi,
            solver,
        } => {
            let base = load_config(&config.config)?;
            let sp = find_switch_point(&base, param.parse()?, *lo, *hi, single_solver(*solver)?, &quadrature(g)?)?;
            let mut header = vec![sp.parameter.clone()];
            header.extend((1..=sp.n_f.len()).map(|j| format!("n_f_{j}")));
            header.extend(["iterations".to_string(), "residual".to_string()]);
            let mut row = vec![format_number(sp.value)];
            row.extend(sp.n_f.iter().map(|&v| format_number(v)));
            row.extend([sp.iterations.to_string(), format_number(sp.residual)]);
            emit(out, g.format, |w| write_rows(w, &header, &[row]), || serde_json::json!(sp))
        }
        Command::Optimize {
            config,
            bound,
            objective,
            solver,
        } => {
            let base = load_config(&config.config)?;
            let bounds = bound.iter().map(|b| Bound::parse(b)).collect::<Result<Vec<_>>>()?;
            let objective: Objective = objective.parse()?;
            let o = optimize_cooling(
                &base,
                &bounds,
                objective,
                single_solver(*solver)?,
                &quadrature(g)?,
                &NelderMeadOptions::default(),
            )?;
            let mut header = o.parameters.clone();
            header.extend((1..=o.n_f.len()).map(|j| format!("n_f_{j}")));
            header.extend(["objective".to_string(), "evaluations".to_string(), "converged".to_string()]);
            let mut row: Vec<String> = o.values.iter().map(|&v| format_number(v)).collect();
            row.extend(o.n_f.iter().map(|&v| format_number(v)));
            row.extend([format_number(o.objective_value), o.evaluations.to_string(), o.converged.to_string()]);
            emit(out, g.format, |w| write_rows(w, &header, &[row]), || serde_json::json!(o))
        }
        Command::Figure { name, n, config, solver } => {
            let fig: Figure = name.parse()?;
            let base = match config {
                Some(path) => load_config(path)?,
                None => {
                    if fig == Figure::Fig6 && *n < 2 {
                        return Err(config_error("fig6 needs --N of at least 2"));
                    }
                    fig.default_base(*n)
                }
            };
            figure(fig, &base, single_solver(*solver)?, g)
        }
        Command::Stability { config } => {
            let p = load_config(&config.config)?.chain()?;
            let r = stability_check(&p);
            let header: Vec<String> = ["index", "re", "im"].map(String::from).to_vec();
            let rows: Vec<Vec<String>> = r
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(i, z)| vec![i.to_string(), format_number(z.re), format_number(z.im)])
                .collect();
            emit(out, g.format, |w| write_rows(w, &header, &rows), || serde_json::json!(r))?;
            eprintln!(
                "{}: max real part {:.6e} at {}",
                if r.stable { "stable" } else { "unstable" },
                r.max_real_part,
                r.worst_eigenvalue()
            );
            Ok(())
        }
    }
}

fn cool(base: &Config, choice: SolverChoice, g: &Global) -> Result<()> {
    let p = base.chain()?;
    let opts = quadrature(g)?;
    let solvers: Vec<Solver> = match choice {
        SolverChoice::All if p.n() != 2 => {
            log::warn!("the closed-form solver needs N = 2; skipping it for N = {}", p.n());
            vec![Solver::Quadrature, Solver::Lyapunov]
        }
        SolverChoice::All => Solver::ALL.to_vec(),
        one => vec![single_solver(one)?],
    };
    let results = solvers
        .iter()
        .map(|&s| solve(&p, s, &opts))
        .collect::<Result<Vec<CoolingResult>>>()?;
    let n = p.n();
    let mut header = vec!["solver".to_string(), "quantity".to_string()];
    header.extend((1..=n).map(|j| format!("n_f_{j}")));
    let mut rows = Vec::new();
    let mut diffs = Vec::new();
    for r in &results {
        let mut row = vec![r.solver.to_string(), "n_f".to_string()];
        row.extend(r.n_f.iter().map(|&v| format_number(v)));
        rows.push(row);
    }
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            let d: Vec<f64> = a
                .n_f
                .iter()
                .zip(&b.n_f)
                .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
                .collect();
            let mut row = vec![format!("{}-{}", a.solver, b.solver), "rel_diff".to_string()];
            row.extend(d.iter().map(|&v| format_number(v)));
            rows.push(row);
            diffs.push(serde_json::json!({ "solvers": [a.solver, b.solver], "relative_difference": d }));
        }
    }
    emit(
        g.out.as_deref(),
        g.format,
        |w| write_rows(w, &header, &rows),
        || serde_json::json!({ "results": results, "differences": diffs }),
    )
}

fn replay_table(base: &Config, path: &Path, solver: Solver, g: &Global) -> Result<()> {
    let stored = read_csv(File::open(path)?)?;
    let rep = replay(&stored, base, solver, &quadrature(g)?)?;
    if let Some(out) = g.out.as_deref() {
        let t = &rep.recomputed;
        emit(Some(out), g.format, |w| t.write_csv(w), || t.to_json())?;
    }
    if rep.identical() {
        println!("replay: {} rows reproduced identically", rep.rows);
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "replay: {} of {} rows differ (first row {}, max abs difference {:.3e})",
            rep.mismatched_rows.len(),
            rep.rows,
            rep.mismatched_rows[0],
            rep.max_abs_difference
        )))
    }
}

fn figure(fig: Figure, base: &Config, solver: Solver, g: &Global) -> Result<()> {
    let dir: PathBuf = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let panels = figures::generate(fig, base, solver, &quadrature(g)?)?;
    for p in &panels {
        let file = dir.join(format!("{fig}_{}.{}", p.name, g.format.extension()));
        emit(Some(&file), g.format, |w| p.data.write_csv(w), || p.data.to_json())?;
        println!("{}", file.display());
    }
    Ok(())
}
