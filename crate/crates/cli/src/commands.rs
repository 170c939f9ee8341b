//! One function per subcommand. Grid points are evaluated in parallel on
//! the current rayon pool and merged in grid order.

use nhse_core::characteristic::{solve_hn, RootKind};
use nhse_core::dense::{dense_eigensolve, eigen_residual, match_spectra, vec_dot, EigenDecomposition};
use nhse_core::model::{build_hn_matrix, build_ssh_matrix, HnParams, Model, SshParams};
use nhse_core::observables::{
    average_ipr, bound_state_index, classify_eigenvalues, classify_spectrum, critical_v0_hn, critical_v0_ssh,
    exact_critical_bracket, ipr, REALNESS_TOL,
};
use nhse_core::ssh::{assemble_gap_scan, min_abs_energy, solve_ssh_exact};
use nhse_core::winding::{critical_v0_for_energy, nu_log_derivative, pbc_distance, pbc_winding, spectral_flow, DEFAULT_REL_STEP};
use nhse_core::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, ModelKind, SweepConfig};
use crate::error::CliError;
use crate::output::{num, Report};

type Result<T> = std::result::Result<T, CliError>;

/// Evaluates `f` on every point in parallel; the first error in grid order
/// wins, so failures are as deterministic as successes.
fn par_map<T: Send>(points: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    points.par_iter().map(|&x| f(x)).collect::<Vec<_>>().into_iter().collect()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn model_at(cfg: &SweepConfig, v0: f64) -> Result<Model> {
    Ok(match cfg.model {
        ModelKind::Hn => Model::Hn(HnParams::new(cfg.n, cfg.g, v0)?),
        ModelKind::Ssh => Model::Ssh(SshParams::new(cfg.n, cfg.g, cfg.t_prime_single(), v0)?),
    })
}

fn closed_form_critical(cfg: &SweepConfig) -> Result<f64> {
    Ok(match cfg.model {
        ModelKind::Hn => critical_v0_hn(cfg.n, cfg.g),
        ModelKind::Ssh => critical_v0_ssh(cfg.n, cfg.g, cfg.t_prime_single())?,
    })
}

/// Canonical θ for a given cos θ: `Im θ ≥ 0`.
fn canonical_acos(z: Complex64) -> Complex64 {
    let t = z.acos();
    if t.im < 0.0 {
        -t
    } else {
        t
    }
}

pub fn run(cfg: &SweepConfig) -> Result<Report> {
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::IprSweep => ipr_sweep(cfg),
        Command::Critical => critical(cfg),
        Command::GapScan => gap_scan(cfg),
        Command::Winding => winding(cfg),
        Command::NuSweep => nu_sweep(cfg),
        Command::Flow => flow(cfg),
        Command::Validate => validate(),
    }
}

struct Row {
    energy: Complex64,
    theta: Complex64,
    class: &'static str,
    ipr: f64,
    residual: f64,
}

fn oracle_rows(cfg: &SweepConfig, dense: &EigenDecomposition, m: &nhse_core::dense::CMatrix, v0: f64) -> Result<Vec<Row>> {
    let bound = bound_state_index(&dense.values, c(v0));
    let tp = cfg.t_prime_single();
    dense
        .values
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let v = dense.vector(k).expect("vectors requested");
            let cos = match cfg.model {
                ModelKind::Hn => e / 2.0,
                ModelKind::Ssh => (e * e - tp * tp - 1.0) / (2.0 * tp),
            };
            Ok(Row {
                energy: e,
                theta: canonical_acos(cos),
                class: if Some(k) == bound { "bound" } else { "bulk" },
                ipr: ipr(&v)?,
                residual: eigen_residual(m, e, &v),
            })
        })
        .collect()
}

fn spectrum(cfg: &SweepConfig) -> Result<Report> {
    let v0 = cfg.v0.single().expect("validated");
    let (exact, matrix) = match cfg.model {
        ModelKind::Hn => {
            let p = HnParams::new(cfg.n, cfg.g, v0)?;
            let rows = solve_hn(&p)?
                .iter()
                .map(|m| {
                    Ok(Row {
                        energy: m.energy,
                        theta: m.root.theta,
                        class: match m.root.kind {
                            RootKind::Bulk => "bulk",
                            RootKind::Bound => "bound",
                            RootKind::Nonphysical => "nonphysical",
                        },
                        ipr: ipr(&m.amplitudes)?,
                        residual: m.residual,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, build_hn_matrix(&p)?.into_inner())
        }
        ModelKind::Ssh => {
            let p = SshParams::new(cfg.n, cfg.g, cfg.t_prime_single(), v0)?;
            let modes = solve_ssh_exact(&p)?;
            let energies: Vec<Complex64> = modes.iter().map(|m| m.energy).collect();
            let bound = bound_state_index(&energies, c(v0));
            let rows = modes
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    Ok(Row {
                        energy: m.energy,
                        theta: m.theta,
                        class: if Some(k) == bound { "bound" } else { "bulk" },
                        ipr: ipr(&m.amplitudes())?,
                        residual: m.residual,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, build_ssh_matrix(&p)?.into_inner())
        }
    };
    let dense = dense_eigensolve(&matrix, true)?;
    let oracle = oracle_rows(cfg, &dense, &matrix, v0)?;
    let exact_e: Vec<Complex64> = exact.iter().map(|r| r.energy).collect();
    let dist = match_spectra(&exact_e, &dense.values)?.max_distance;
    let mut rows = Vec::new();
    for (solver, set) in [("exact", &exact), ("oracle", &oracle)] {
        for (i, r) in set.iter().enumerate() {
            rows.push(vec![
                i.to_string(),
                num(r.energy.re),
                num(r.energy.im),
                num(r.theta.re),
                num(r.theta.im),
                r.class.to_string(),
                num(r.ipr),
                solver.to_string(),
                num(r.residual),
            ]);
        }
    }
    Ok(Report::csv(
        vec!["index", "re_e", "im_e", "re_theta", "im_theta", "class", "ipr", "solver", "residual"],
        rows,
    )
    .note("exact_vs_oracle_max_distance", num(dist)))
}

fn ipr_sweep(cfg: &SweepConfig) -> Result<Report> {
    let critical = closed_form_critical(cfg)?;
    let grid = cfg.v0.points();
    let rows = par_map(&grid, |v0| {
        let (mean, report) = match cfg.model {
            ModelKind::Hn => {
                let modes = solve_hn(&HnParams::new(cfg.n, cfg.g, v0)?)?;
                (average_ipr(&modes, true)?, classify_spectrum(&modes, REALNESS_TOL))
            }
            ModelKind::Ssh => {
                let modes = solve_ssh_exact(&SshParams::new(cfg.n, cfg.g, cfg.t_prime_single(), v0)?)?;
                let energies: Vec<Complex64> = modes.iter().map(|m| m.energy).collect();
                let bound = bound_state_index(&energies, c(v0));
                let iprs = modes
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| Some(*k) != bound)
                    .map(|(_, m)| ipr(&m.amplitudes()))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                (
                    iprs.iter().sum::<f64>() / iprs.len() as f64,
                    classify_eigenvalues(&energies, c(v0), REALNESS_TOL),
                )
            }
        };
        Ok(vec![
            num(v0),
            num(mean),
            report.n_real.to_string(),
            report.fully_real.to_string(),
            num(critical),
        ])
    })?;
    Ok(Report::csv(vec!["v0", "mean_ipr", "n_real", "fully_real", "critical_closed_form"], rows)
        .note("mean_ipr", "average over band states; the impurity bound state is excluded"))
}

/// Geometric bisection of the dense-oracle "bulk fully real" predicate
/// between `lo` (complex) and `hi` (real).
fn oracle_realness_bracket(cfg: &SweepConfig, closed: f64) -> Result<Option<(f64, f64)>> {
    let real = |v0: f64| -> Result<bool> {
        let m = model_at(cfg, v0)?.matrix()?.into_inner();
        let values = dense_eigensolve(&m, false)?.values;
        Ok(classify_eigenvalues(&values, c(v0), REALNESS_TOL).fully_real)
    };
    let (mut lo, mut hi) = (0.5 * closed, 2.0 * closed);
    if real(lo)? || !real(hi)? {
        return Ok(None);
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if real(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some((lo, hi)))
}

fn critical(cfg: &SweepConfig) -> Result<Report> {
    let closed = closed_form_critical(cfg)?;
    let oracle = oracle_realness_bracket(cfg, closed)?;
    let mut result = json!({
        "closed_form": closed,
        "oracle_bracket": oracle.map(|(a, b)| json!([a, b])),
    });
    if cfg.model == ModelKind::Hn {
        let b = exact_critical_bracket(cfg.n, cfg.g, 1e-9)?;
        result["exact"] = json!(b.upper);
        result["exact_bracket"] = json!([b.lower, b.upper]);
        result["ratio_exact_to_closed_form"] = json!(b.upper / closed);
    } else {
        result["exact"] = Value::Null;
        if let Some((a, b)) = oracle {
            result["ratio_oracle_to_closed_form"] = json!(0.5 * (a + b) / closed);
        }
    }
    Ok(Report::json(result).note(
        "oracle_bracket",
        "dense-oracle bisection of the fully real bulk spectrum (|Im E| <= 1e-8), relative width 1e-6",
    ))
}

fn gap_scan(cfg: &SweepConfig) -> Result<Report> {
    let v0 = cfg.v0.single().expect("validated");
    let p = SshParams::new(cfg.n, cfg.g, 1.0, v0)?;
    let grid = cfg.t_prime.points();
    let values = par_map(&grid, |t| Ok(min_abs_energy(&p, t)?))?;
    let scan = assemble_gap_scan(&p, &grid, &values)?;
    let row = |kind: &str, r: &nhse_core::ssh::GapScanRow| {
        vec![kind.to_string(), num(r.t_prime), num(r.min_abs_e), r.closing.to_string()]
    };
    let mut rows: Vec<Vec<String>> = scan.rows.iter().map(|r| row("grid", r)).collect();
    rows.extend(scan.minima.iter().map(|r| row("minimum", r)));
    Ok(Report::csv(vec!["kind", "t_prime", "min_abs_e", "closing"], rows)
        .note("closing_tolerance", num(nhse_core::ssh::GAP_CLOSING_TOL)))
}

fn winding(cfg: &SweepConfig) -> Result<Report> {
    let er = cfg.er.expect("validated");
    let model = model_at(cfg, 0.0)?;
    let w = pbc_winding(&model, er, cfg.n_k)?;
    Ok(Report::json(json!({
        "er": [er.re, er.im],
        "winding": w.winding,
        "n_k_used": w.n_k_used,
        "pbc_distance": pbc_distance(&model, er),
    })))
}

fn nu_sweep(cfg: &SweepConfig) -> Result<Report> {
    let er = cfg.er.expect("validated");
    let model = model_at(cfg, 0.0)?;
    let element = cfg.element.into();
    let grid = cfg.v0.points();
    let w = pbc_winding(&model, er, cfg.n_k)?;
    let vc = critical_v0_for_energy(&model, er)?;
    let nus = par_map(&grid, |v0| Ok(nu_log_derivative(&model, er, v0, DEFAULT_REL_STEP, element)?))?;
    let rows = grid
        .iter()
        .zip(&nus)
        .map(|(v, nu)| vec![num(*v), num(nu.re), num(nu.im)])
        .collect();
    let (row, col) = element.indices(&model);
    Ok(Report::csv(vec!["v0", "re_nu", "im_nu"], rows)
        .note("winding", w.winding.to_string())
        .note("vc_closed_form", format!("{},{}", num(vc.re), num(vc.im)))
        .note("vc_abs", num(vc.norm()))
        .note("green_element", format!("{row},{col}")))
}

fn flow(cfg: &SweepConfig) -> Result<Report> {
    let model = model_at(cfg, 0.0)?;
    let f = spectral_flow(&model, &cfg.v0.points())?;
    let mut rows = Vec::new();
    for (p, v0) in f.v0_grid.iter().enumerate() {
        for (mode, t) in f.trajectories.iter().enumerate() {
            rows.push(vec![num(*v0), mode.to_string(), num(t[p].re), num(t[p].im)]);
        }
    }
    Ok(Report::csv(vec!["v0", "mode", "re_e", "im_e"], rows))
}

#[derive(Debug, Clone, Copy)]
struct CheckPoint {
    model: ModelKind,
    n: usize,
    g: f64,
    t_prime: f64,
    v0: f64,
}

/// The default validation matrix: 24 HN points and 8 SSH points.
fn validation_points() -> Vec<CheckPoint> {
    let mut pts = Vec::new();
    for n in [6, 10, 14] {
        for g in [0.3, 1.0] {
            let vc = critical_v0_hn(n, g);
            for v0 in [0.5, 50.0, vc, 10.0 * vc] {
                pts.push(CheckPoint { model: ModelKind::Hn, n, g, t_prime: 0.0, v0 });
            }
        }
    }
    for n in [4, 8] {
        for t_prime in [0.5, 2.0] {
            for v0 in [0.5, 50.0] {
                pts.push(CheckPoint { model: ModelKind::Ssh, n, g: 1.0, t_prime, v0 });
            }
        }
    }
    pts
}

const MAX_DISTANCE: f64 = 1e-7;
const MIN_OVERLAP: f64 = 1.0 - 1e-6;
const MAX_TRACE_DEFECT: f64 = 1e-6;
const MAX_CONJUGATION_DEFECT: f64 = 1e-9;

fn check_point(p: CheckPoint) -> Result<Value> {
    let (energies, vectors, matrix) = match p.model {
        ModelKind::Hn => {
            let hp = HnParams::new(p.n, p.g, p.v0)?;
            let modes = solve_hn(&hp)?;
            (
                modes.iter().map(|m| m.energy).collect::<Vec<_>>(),
                modes.into_iter().map(|m| m.amplitudes).collect::<Vec<_>>(),
                build_hn_matrix(&hp)?.into_inner(),
            )
        }
        ModelKind::Ssh => {
            let sp = SshParams::new(p.n, p.g, p.t_prime, p.v0)?;
            let modes = solve_ssh_exact(&sp)?;
            (
                modes.iter().map(|m| m.energy).collect(),
                modes.iter().map(|m| m.amplitudes()).collect(),
                build_ssh_matrix(&sp)?.into_inner(),
            )
        }
    };
    let dense = dense_eigensolve(&matrix, true)?;
    let m = match_spectra(&energies, &dense.values)?;
    let overlap = m
        .pairing
        .iter()
        .enumerate()
        .map(|(i, &j)| vec_dot(&vectors[i], &dense.vector(j).expect("vectors requested")).norm())
        .fold(1.0, f64::min);
    let trace = (energies.iter().sum::<Complex64>() - matrix.trace()).norm();
    let conj: Vec<Complex64> = energies.iter().map(|e| e.conj()).collect();
    let conjugation = match_spectra(&energies, &conj)?.max_distance;
    let pass = m.max_distance < MAX_DISTANCE
        && overlap > MIN_OVERLAP
        && trace < MAX_TRACE_DEFECT
        && conjugation < MAX_CONJUGATION_DEFECT;
    Ok(json!({
        "model": p.model,
        "n": p.n,
        "g": p.g,
        "t_prime": if p.model == ModelKind::Ssh { json!(p.t_prime) } else { Value::Null },
        "v0": p.v0,
        "max_distance": m.max_distance,
        "min_overlap": overlap,
        "trace_defect": trace,
        "conjugation_defect": conjugation,
        "pass": pass,
    }))
}

fn validate() -> Result<Report> {
    let pts = validation_points();
    let results: Vec<Value> = pts
        .par_iter()
        .map(|&p| check_point(p))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let field_max = |k: &str| results.iter().map(|r| r[k].as_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let passed = results.iter().all(|r| r["pass"] == json!(true));
    let min_overlap = results
        .iter()
        .map(|r| r["min_overlap"].as_f64().unwrap_or(0.0))
        .fold(1.0, f64::min);
    let summary = json!({
        "points": results.len(),
        "passed": results.iter().filter(|r| r["pass"] == json!(true)).count(),
        "all_pass": passed,
        "max_distance": field_max("max_distance"),
        "min_overlap": min_overlap,
        "max_trace_defect": field_max("trace_defect"),
        "max_conjugation_defect": field_max("conjugation_defect"),
        "thresholds": {
            "max_distance": MAX_DISTANCE,
            "min_overlap": MIN_OVERLAP,
            "trace_defect": MAX_TRACE_DEFECT,
            "conjugation_defect": MAX_CONJUGATION_DEFECT,
        },
    });
    let mut report = Report::json(json!({ "summary": summary, "points": results }));
    report.passed = passed;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_matrix_has_the_default_24_hn_points() {
        let pts = validation_points();
        assert_eq!(pts.iter().filter(|p| p.model == ModelKind::Hn).count(), 24);
    }

    #[test]
    fn canonical_theta_has_nonnegative_imaginary_part() {
        for z in [Complex64::new(0.3, -0.7), Complex64::new(5.0, 0.0), Complex64::new(-1.5, 2.0)] {
            let t = canonical_acos(z);
            assert!(t.im >= 0.0);
            assert!((t.cos() - z).norm() < 1e-12);
        }
    }
}
