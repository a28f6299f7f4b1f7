use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use warpspec::compare::{run_comparison, run_suite, ComparisonReport, ComparisonScenario, Role, SuiteSummary};
use warpspec::config::{Format, ScenarioConfig};
use warpspec::io::{fmt_float, write_json};
use warpspec::kernel::{cn_kernel, max_relative_discrepancy, Boundary, KernelExpansion, KernelGrid, SteppingOptions, DEFAULT_TAIL_TOL};
use warpspec::spectrum::{first_eigenvalue_p, kth_radial_eigenvalue, EigenSummary};
use warpspec::{solve_warping, Error, Result};

use crate::{Context, Method, Status};

/// Kernel cross-checks compare relative values only on `[0, 0.9 r0]`, away from the Dirichlet wall.
const CROSS_CHECK_RADIUS: f64 = 0.9;

struct Loaded {
    config: ScenarioConfig,
    out_dir: PathBuf,
}

fn load(ctx: &Context, path: &Path) -> Result<Loaded> {
    let mut config = ScenarioConfig::load(path)?;
    for s in &mut config.scenarios {
        if ctx.h_override.is_some() {
            s.grid.h = ctx.h_override;
        }
        if let Some(tol) = ctx.tol_override {
            s.tolerances.eig = tol;
        }
    }
    let out_dir = if config.output.dir.is_absolute() {
        config.output.dir.clone()
    } else {
        path.parent().unwrap_or(Path::new(".")).join(&config.output.dir)
    };
    Ok(Loaded { config, out_dir })
}

impl Loaded {
    fn scenario(&self, name: &str) -> Result<ComparisonScenario> {
        self.config.scenario(name).cloned()
    }

    fn dir(&self, scenario: &str) -> Result<PathBuf> {
        let dir = self.out_dir.join(scenario);
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn wants(&self, format: Format) -> bool {
        self.config.output.wants(format)
    }
}

fn write_csv(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    body(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn warp(ctx: &Context, config: &Path, name: &str) -> Result<Status> {
    let loaded = load(ctx, config)?;
    let scenario = loaded.scenario(name)?;
    scenario.check()?;
    let profile = scenario.kappa_g.build(scenario.s_max())?;
    let warping = solve_warping(&profile, scenario.n, scenario.s_max(), scenario.warp_step())
        .map_err(|e| e.in_scenario(name))?;
    let dir = loaded.dir(name)?;
    if loaded.wants(Format::Csv) {
        write_csv(&dir.join("warp.csv"), |out| warping.write_csv(out))?;
    }
    if loaded.wants(Format::Json) {
        let l = warping.first_zero().map_or(Value::from("inf"), Value::from);
        write_json(&dir.join("warp.json"), &json!({ "l": l, "n": warping.n(), "h": warping.h() }))?;
    }
    Ok(Status::Ok)
}

pub fn eig(ctx: &Context, config: &Path, name: &str, k: usize, p: Option<f64>) -> Result<Status> {
    let loaded = load(ctx, config)?;
    let mut scenario = loaded.scenario(name)?;
    if let Some(p) = p {
        scenario.p = p;
    }
    if k == 0 {
        return Err(Error::Config("--k counts from 1".into()));
    }
    let solve = || -> Result<_> {
        let problem = scenario.build()?.problem(Role::Test)?;
        let pair = if problem.p() == 2.0 {
            kth_radial_eigenvalue(&problem, k)?
        } else if k == 1 {
            first_eigenvalue_p(&problem)?
        } else {
            return Err(Error::Config("only the first eigenvalue is available for p != 2".into()));
        };
        let summary = EigenSummary::new(&problem, k, &pair)?;
        Ok((problem, pair, summary))
    };
    let (problem, pair, summary) = solve().map_err(|e| e.in_scenario(name))?;
    let dir = loaded.dir(name)?;
    if loaded.wants(Format::Csv) {
        write_csv(&dir.join("eig.csv"), |out| pair.write_csv(&problem, out))?;
    }
    if loaded.wants(Format::Json) {
        write_json(&dir.join("eig.json"), &summary)?;
    }
    Ok(Status::Ok)
}

fn kernel_json(method: Method, grid: &KernelGrid, discrepancy: Option<f64>) -> Value {
    let meta = grid.meta();
    json!({
        "method": match method { Method::Expansion => "expansion", Method::Cn => "cn" },
        "boundary": meta.boundary,
        "K": meta.modes,
        "t0": meta.t0,
        "dt": meta.dt,
        "times": grid.times,
        "masses": meta.masses,
        "min_value": meta.min_value,
        "max_rel_discrepancy": discrepancy,
    })
}

pub fn kernel(ctx: &Context, config: &Path, name: &str, method: Method, boundary: Boundary) -> Result<Status> {
    let loaded = load(ctx, config)?;
    let scenario = loaded.scenario(name)?;
    let exec = ctx.exec;
    let solve = || -> Result<(KernelGrid, Option<f64>)> {
        if scenario.p != 2.0 {
            return Err(Error::Config("heat kernels need p = 2".into()));
        }
        let problem = scenario.build()?.problem(Role::Test)?;
        let expansion = || {
            KernelExpansion::new(&problem, scenario.modes, exec)?.grid(&scenario.t_grid, DEFAULT_TAIL_TOL)
        };
        let stepping = || {
            let options = SteppingOptions {
                boundary,
                ..SteppingOptions::default()
            };
            cn_kernel(&problem, &scenario.t_grid, options, exec)
        };
        match (method, boundary) {
            (Method::Expansion, Boundary::Neumann) => Err(Error::Config(
                "the expansion method covers the Dirichlet kernel only; use --method cn".into(),
            )),
            (_, Boundary::Neumann) => Ok((stepping()?, None)),
            (Method::Expansion, Boundary::Dirichlet) => {
                let grid = expansion()?;
                let other = stepping()?;
                let d = max_relative_discrepancy(&grid, &other, CROSS_CHECK_RADIUS * scenario.r0)?;
                Ok((grid, Some(d)))
            }
            (Method::Cn, Boundary::Dirichlet) => {
                let grid = stepping()?;
                let other = expansion()?;
                let d = max_relative_discrepancy(&grid, &other, CROSS_CHECK_RADIUS * scenario.r0)?;
                Ok((grid, Some(d)))
            }
        }
    };
    let (grid, discrepancy) = solve().map_err(|e| e.in_scenario(name))?;
    let dir = loaded.dir(name)?;
    let stem = format!("kernel_{}_{}", if method == Method::Cn { "cn" } else { "expansion" }, boundary);
    if loaded.wants(Format::Csv) {
        write_csv(&dir.join(format!("{stem}.csv")), |out| grid.write_csv(out))?;
    }
    if loaded.wants(Format::Json) {
        write_json(&dir.join(format!("{stem}.json")), &kernel_json(method, &grid, discrepancy))?;
    }
    Ok(Status::Ok)
}

fn write_report(loaded: &Loaded, name: &str, result: &Result<ComparisonReport>) -> Result<()> {
    let dir = loaded.dir(name)?;
    match result {
        Ok(report) => {
            if loaded.wants(Format::Json) {
                write_json(&dir.join("report.json"), report)?;
            }
            if loaded.wants(Format::Csv) {
                write_csv(&dir.join("verdicts.csv"), |out| {
                    writeln!(out, "# warpspec verdicts scenario={name}")?;
                    writeln!(out, "inequality,margin,tolerance,pass,near_equality")?;
                    for v in &report.verdicts {
                        writeln!(
                            out,
                            "{},{},{},{},{}",
                            v.inequality,
                            fmt_float(v.margin),
                            fmt_float(v.tolerance),
                            v.pass,
                            v.near_equality
                        )?;
                    }
                    Ok(())
                })?;
            }
        }
        Err(e) => {
            let body = json!({ "scenario": name, "error": e.to_string(), "input_error": e.is_input_error() });
            write_json(&dir.join("error.json"), &body)?;
        }
    }
    Ok(())
}

pub fn compare(ctx: &Context, config: &Path, name: Option<&str>, all: bool) -> Result<Status> {
    let loaded = load(ctx, config)?;
    let scenarios = if all {
        if loaded.config.scenarios.is_empty() {
            return Err(Error::Config("the config defines no scenarios".into()));
        }
        loaded.config.scenarios.clone()
    } else {
        vec![loaded.scenario(name.unwrap_or_default())?]
    };
    let results = if all {
        run_suite(&scenarios, ctx.exec)
    } else {
        vec![run_comparison(&scenarios[0], ctx.exec)]
    };
    for (s, r) in scenarios.iter().zip(&results) {
        write_report(&loaded, &s.name, r)?;
    }
    let summary = SuiteSummary::new(&scenarios, &results);
    fs::create_dir_all(&loaded.out_dir)?;
    write_json(&loaded.out_dir.join("summary.json"), &summary)?;
    for (s, r) in scenarios.iter().zip(&results) {
        if let Ok(report) = r {
            for v in report.verdicts.iter().filter(|v| !v.pass) {
                eprintln!("{}: FAIL {} (margin {})", s.name, v.inequality, v.margin);
            }
        }
    }
    // the first input error decides the exit status, else the first solver error
    let mut errors: Vec<Error> = results.into_iter().filter_map(|r| r.err()).collect();
    if !errors.is_empty() {
        let chosen = errors.iter().position(Error::is_input_error).unwrap_or(0);
        let returned = errors.remove(chosen);
        for e in &errors {
            eprintln!("warpspec: {e}");
        }
        return Err(returned);
    }
    Ok(if summary.failed > 0 { Status::Failed } else { Status::Ok })
}
