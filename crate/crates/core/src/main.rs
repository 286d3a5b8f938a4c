//! Command-line entry point: scenario runs, verification suites, the
//! coefficient table, and amplitude sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use radgas::ibvp::{self, evaluate_run, make_scenario, NormSeries, RunChecks, Scenario};
use radgas::stationary::ExpansionCoeffs;
use radgas::verify::{verify_elliptic, verify_rarefaction, verify_stationary, Report};

#[derive(Parser)]
#[command(name = "radgas", about = "Radiating-gas half-line wave laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario from a JSON config and write its diagnostics.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Dotted-path overrides, e.g. --set cfl=0.3 --set perturbation.amplitude=0.01
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the stationary-layer property suite.
    VerifyStationary {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the rarefaction property suite.
    VerifyRarefaction {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the elliptic property suite.
    VerifyElliptic {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the trajectory expansion coefficients a_k up to order K.
    Coeffs { order: usize },
    /// Run the amplitude ladder (0.005 / 0.02 / 0.05) for one scenario.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

/// Energy-functional shape constant for sweeps: max_t [ ||w||_2^2 +
/// dissipation integrals ] must stay below this multiple of
/// (||w_0||_2^2 + delta). Frozen from pilot runs.
const SWEEP_ENERGY_C: f64 = 0.5;

fn fail(kind: &str, msg: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": msg, "kind": kind }));
    if kind == "check" {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            overrides,
        } => cmd_run(&config, &out, &overrides),
        Command::VerifyStationary { out } => {
            if let Err(e) = dump_stationary_profile(&out) {
                return fail("io", &e);
            }
            cmd_verify(verify_stationary(), &out)
        }
        Command::VerifyRarefaction { out } => {
            if let Err(e) = dump_rarefaction_lattice(&out) {
                return fail("io", &e);
            }
            cmd_verify(verify_rarefaction(), &out)
        }
        Command::VerifyElliptic { out } => cmd_verify(verify_elliptic(), &out),
        Command::Coeffs { order } => cmd_coeffs(order),
        Command::Sweep {
            config,
            out,
            overrides,
        } => cmd_sweep(&config, &out, &overrides),
    }
}

fn load_scenario(path: &Path, overrides: &[String]) -> Result<Scenario, (String, String)> {
    let text = fs::read_to_string(path)
        .map_err(|e| ("config".to_string(), format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| ("config".to_string(), format!("bad JSON in {}: {e}", path.display())))?;
    for ov in overrides {
        apply_override(&mut value, ov).map_err(|e| ("config".to_string(), e))?;
    }
    let config: ibvp::ScenarioConfig = serde_json::from_value(value)
        .map_err(|e| ("config".to_string(), format!("bad scenario config: {e}")))?;
    make_scenario(config).map_err(|e| ("scenario".to_string(), e.to_string()))
}

fn apply_override(value: &mut serde_json::Value, spec: &str) -> Result<(), String> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override '{spec}' is not KEY=VALUE"))?;
    let parsed: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = value;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cursor
            .as_object_mut()
            .ok_or_else(|| format!("override path '{path}' does not address an object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        cursor = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}

fn run_one(
    scenario: &Scenario,
    out: &Path,
    stem: &str,
) -> Result<(NormSeries, RunChecks), (String, String)> {
    let series = ibvp::run(scenario).map_err(|e| ("run".to_string(), e.to_string()))?;
    let checks = evaluate_run(scenario, &series);
    fs::create_dir_all(out)
        .map_err(|e| ("io".to_string(), format!("cannot create {}: {e}", out.display())))?;
    let csv_path = out.join(format!("{stem}_series.csv"));
    let mut csv = Vec::new();
    series
        .write_csv(&mut csv)
        .map_err(|e| ("io".to_string(), e.to_string()))?;
    fs::write(&csv_path, csv).map_err(|e| ("io".to_string(), e.to_string()))?;
    let summary = json!({
        "config": scenario.config,
        "checks": checks,
        "passed": checks.passed,
    });
    fs::write(
        out.join(format!("{stem}_summary.json")),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|e| ("io".to_string(), e.to_string()))?;
    Ok((series, checks))
}

fn cmd_run(config: &Path, out: &Path, overrides: &[String]) -> ExitCode {
    let scenario = match load_scenario(config, overrides) {
        Ok(s) => s,
        Err((kind, msg)) => return fail(&kind, &msg),
    };
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "run".to_string());
    match run_one(&scenario, out, &stem) {
        Ok((series, checks)) => {
            println!(
                "case {}: sup|w| ratio {:.4} (threshold {}), tails {:.4}/{:.4}, samples {} -> {}",
                scenario.config.case_id,
                checks.sup_w_ratio,
                checks.ratio_threshold,
                checks.tail_fraction_wx,
                checks.tail_fraction_z,
                series.first().t,
                series.last().t,
            );
            if checks.passed {
                ExitCode::SUCCESS
            } else {
                fail("check", "run checks failed; see summary JSON")
            }
        }
        Err((kind, msg)) => fail(&kind, &msg),
    }
}

fn cmd_verify(report: Report, out: &Path) -> ExitCode {
    for c in &report.checks {
        println!(
            "{} {}: measured {:.6e} vs bound {:.6e} ({})",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.measured,
            c.bound,
            c.note
        );
    }
    if let Err(e) = fs::create_dir_all(out).and_then(|_| {
        fs::write(
            out.join(format!("verify_{}.json", report.suite)),
            serde_json::to_string_pretty(&report).expect("report serializes"),
        )
    }) {
        return fail("io", &e.to_string());
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        fail("check", &format!("{} suite failed", report.suite))
    }
}

/// Degenerate stationary profile with its parameter sidecar.
fn dump_stationary_profile(out: &Path) -> Result<(), String> {
    use radgas::grid::Grid;
    use radgas::stationary::{reconstruct_profile, stationary_limit, StationaryParams};
    let params = StationaryParams::new(-(0.2_f64.sqrt()), 0.0).map_err(|e| e.to_string())?;
    let limit = stationary_limit(&params, 1e-9).map_err(|e| e.to_string())?;
    let grid = Grid::new(400.0, 8001).map_err(|e| e.to_string())?;
    let prof = reconstruct_profile(&limit, &grid).map_err(|e| e.to_string())?;
    fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    prof.write_csv(&mut buf).map_err(|e| e.to_string())?;
    fs::write(out.join("stationary_profile.csv"), buf).map_err(|e| e.to_string())?;
    fs::write(
        out.join("stationary_profile.json"),
        serde_json::to_string_pretty(&prof.sidecar_json()).expect("sidecar serializes"),
    )
    .map_err(|e| e.to_string())
}

/// (x, t, value) lattice of the smoothed wave for plotting.
fn dump_rarefaction_lattice(out: &Path) -> Result<(), String> {
    use radgas::rarefaction::{write_lattice_csv, RarefactionFamily};
    let fam = RarefactionFamily::new(0.2, 1.0).map_err(|e| e.to_string())?;
    let ts = [1.0, 4.0, 16.0, 64.0, 256.0];
    let mut rows = Vec::new();
    for &t in &ts {
        for i in 0..400 {
            let x = (fam.u_plus() * t + 20.0 * (1.0 + t).sqrt()) * i as f64 / 399.0;
            rows.push((x, t, fam.eval(x, t).map_err(|e| e.to_string())?.u));
        }
    }
    fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_lattice_csv(&mut buf, rows.into_iter()).map_err(|e| e.to_string())?;
    fs::write(out.join("rarefaction_lattice.csv"), buf).map_err(|e| e.to_string())
}

fn cmd_coeffs(order: usize) -> ExitCode {
    match ExpansionCoeffs::new(order) {
        Ok(c) => {
            for k in 1..=order {
                println!("a{k} = {}·√2", c.a_over_sqrt2(k));
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail("config", &e.to_string()),
    }
}

fn cmd_sweep(config: &Path, out: &Path, overrides: &[String]) -> ExitCode {
    let amplitudes = [0.005_f64, 0.02, 0.05];
    let threads: usize = std::env::var("RADGAS_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(amplitudes.len())
        .max(1);

    let mut scenarios = Vec::new();
    for amp in amplitudes {
        let mut ov = overrides.to_vec();
        ov.push(format!("perturbation.amplitude={amp}"));
        match load_scenario(config, &ov) {
            Ok(s) => scenarios.push((amp, s)),
            Err((kind, msg)) => return fail(&kind, &msg),
        }
    }
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "sweep".to_string());

    type SweepRow = Result<(f64, RunChecks, f64), (String, String)>;
    let mut results: Vec<Option<SweepRow>> = (0..scenarios.len()).map(|_| None).collect();
    let mut queue: Vec<(usize, &(f64, Scenario))> = scenarios.iter().enumerate().collect();
    while !queue.is_empty() {
        let batch: Vec<_> = queue.drain(..queue.len().min(threads)).collect();
        let outcomes: Vec<(usize, SweepRow)> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .into_iter()
                    .map(|(idx, (amp, scenario))| {
                        let stem = format!("{stem}_amp{amp}");
                        scope.spawn(move || {
                            let res = run_one(scenario, out, &stem).map(|(series, checks)| {
                                let w0_sq = series.first().w_h2.powi(2);
                                let energy = series
                                    .samples
                                    .iter()
                                    .map(|s| s.w_h2.powi(2) + s.int_wx_h1_sq + s.int_z_h3_sq)
                                    .fold(0.0_f64, f64::max);
                                let delta =
                                    (scenario.config.u_plus - scenario.config.u_minus).abs();
                                (*amp, checks, energy / (w0_sq + delta))
                            });
                            (idx, res)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sweep worker"))
                    .collect()
            });
        for (idx, res) in outcomes {
            results[idx] = Some(res);
        }
    }

    let mut rows = Vec::new();
    let mut all_passed = true;
    for res in results.into_iter().flatten() {
        match res {
            Ok((amp, checks, energy_ratio)) => {
                let energy_ok = energy_ratio <= SWEEP_ENERGY_C;
                all_passed &= checks.passed && energy_ok;
                println!(
                    "amplitude {amp}: passed={} energy_ratio={:.3} (cap {SWEEP_ENERGY_C})",
                    checks.passed && energy_ok,
                    energy_ratio
                );
                rows.push(json!({
                    "amplitude": amp,
                    "checks": checks,
                    "energy_ratio": energy_ratio,
                    "energy_cap": SWEEP_ENERGY_C,
                    "energy_ok": energy_ok,
                }));
            }
            Err((kind, msg)) => return fail(&kind, &msg),
        }
    }
    let summary = json!({ "runs": rows, "passed": all_passed });
    if let Err(e) = fs::write(
        out.join(format!("{stem}_sweep_summary.json")),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    ) {
        return fail("io", &e.to_string());
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        fail("check", "sweep checks failed; see sweep summary JSON")
    }
}
