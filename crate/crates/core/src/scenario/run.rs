//! Executes prepared checks and assembles the report.

use std::time::Instant;

use nalgebra::Matrix2;
use serde_json::json;

use super::report::{Outcome, Record, Report, SCHEMA_VERSION};
use super::resolve::{prepare, GridSpec, Job, Prepared};
use super::Scenario;
use crate::bundle::{
    ccl_check, disk_samples, extract_flat_structure, flatness_check, holonomy, parallel_transport,
    OdeOptions,
};
use crate::coiso::{
    coisotropy_residuals, foliation_residual, perturb_legendrian, pointwise_coisotropy,
    singular_scan, verify_claim, CharFoliation, ResidualSystem,
};
use crate::error::Result;
use crate::germ::{
    contactness_scan, interpolation_contactness, volume_identity_residual,
    zero_section_foliation_check, InterpolationOptions,
};
use crate::par;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces every check's tolerance.
    pub tol: Option<f64>,
    /// Replaces the point count of random grids.
    pub samples: Option<usize>,
    /// Replaces the scenario seed.
    pub seed: Option<u64>,
}

struct Measured {
    residual: f64,
    ok: bool,
    samples: usize,
    details: serde_json::Value,
}

/// Runs every check in order. Check-level errors become failed records.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Report {
    let seed = opts.seed.unwrap_or(s.seed);
    let prepared = match prepare(s) {
        Ok(p) => p,
        Err(e) => {
            return Report {
                schema: SCHEMA_VERSION,
                scenario: s.name.clone(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                passed: false,
                records: vec![Record {
                    check: "resolve".into(),
                    anchor: "scenario declarations".into(),
                    max_residual: None,
                    tolerance: 0.0,
                    outcome: Outcome::Error,
                    expected: Outcome::Pass,
                    passed: false,
                    informational: false,
                    samples: 0,
                    message: Some(e.to_string()),
                    details: serde_json::Value::Null,
                    wall_time_ms: 0.0,
                }],
            };
        }
    };
    let records: Vec<Record> = prepared
        .iter()
        .enumerate()
        .map(|(i, p)| run_one(p, seed.wrapping_add(i as u64), opts))
        .collect();
    Report {
        schema: SCHEMA_VERSION,
        scenario: s.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        passed: records.iter().all(|r| r.passed || r.informational),
        records,
    }
}

fn run_one(p: &Prepared, seed: u64, opts: &RunOptions) -> Record {
    let tol = opts.tol.unwrap_or(p.tol);
    let start = Instant::now();
    let result = measure(&p.job, tol, seed, opts.samples);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let expected = if p.expect_fail {
        Outcome::Fail
    } else {
        Outcome::Pass
    };
    let (outcome, max_residual, samples, message, details) = match result {
        Ok(m) if !m.residual.is_finite() => (
            Outcome::Fail,
            None,
            m.samples,
            Some(format!("non-finite residual {}", m.residual)),
            m.details,
        ),
        Ok(m) => (
            if m.ok { Outcome::Pass } else { Outcome::Fail },
            Some(m.residual),
            m.samples,
            None,
            m.details,
        ),
        Err(e) => (
            Outcome::Error,
            None,
            0,
            Some(e.to_string()),
            serde_json::Value::Null,
        ),
    };
    let passed = match expected {
        Outcome::Pass => outcome == Outcome::Pass,
        _ => outcome != Outcome::Pass,
    };
    Record {
        check: p.op.name().into(),
        anchor: p.op.anchor().into(),
        max_residual,
        tolerance: tol,
        outcome,
        expected,
        passed,
        informational: p.informational,
        samples,
        message,
        details,
        wall_time_ms,
    }
}

fn points(spec: &GridSpec, seed: u64, samples: Option<usize>) -> Result<Vec<Vec<f64>>> {
    spec.build(seed, samples)?.points()
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn measure(job: &Job, tol: f64, seed: u64, samples: Option<usize>) -> Result<Measured> {
    let ode = OdeOptions::default();
    Ok(match job {
        Job::DdZero { form, grid } => {
            let dd = form.exterior_d()?.exterior_d()?;
            let pts = points(grid, seed, samples)?;
            let r = max(par::map(&pts, |p| dd.at(p).max_abs()));
            Measured {
                residual: r,
                ok: r <= tol,
                samples: pts.len(),
                details: json!(null),
            }
        }
        Job::Frobenius { form, grid } => {
            let g = grid.build(seed, samples)?;
            let r = crate::germ::frobenius_residual(form, &g)?;
            Measured {
                residual: r,
                ok: r <= tol,
                samples: g.len(),
                details: json!(null),
            }
        }
        Job::CoisotropyResiduals { graph, grid } => {
            let system = ResidualSystem::new(graph)?;
            let pts = points(grid, seed, samples)?;
            let res = par::map(&pts, |p| system.eval(p));
            let fol = max(res.iter().map(|r| r.max_foliation()));
            let lam = max(res.iter().map(|r| r.max_lambda()));
            let red = max(res.iter().map(|r| r.max_redundant()));
            let r = fol.max(lam);
            Measured {
                residual: r,
                ok: r <= tol,
                samples: pts.len(),
                details: json!({ "foliation": fol, "lambda_identity": lam, "redundant": red }),
            }
        }
        Job::VerifyClaim { graph, grid } => {
            let pts = points(grid, seed, samples)?;
            let rep = verify_claim(graph, &pts, tol)?;
            let m = &rep.max;
            let r = m.max();
            Measured {
                residual: r,
                ok: r <= tol,
                samples: rep.samples,
                details: json!({
                    "i_alpha": m.i_alpha, "i_dlambda": m.i_dlambda, "bracket": m.bracket,
                    "lie": m.lie, "lambda_ab": m.lambda_ab, "foliation": rep.max_foliation,
                }),
            }
        }
        Job::ResidualAt {
            graph,
            point,
            equation,
            indices,
            expected,
        } => {
            let res = coisotropy_residuals(graph, point)?;
            let entry = res
                .entries
                .iter()
                .find(|e| e.equation == *equation && &e.indices == indices)
                .ok_or_else(|| {
                    crate::Error::InvalidInput(format!(
                        "no {equation:?} entry with indices {indices:?}"
                    ))
                })?;
            let r = (entry.value - expected).abs();
            Measured {
                residual: r,
                ok: r <= tol,
                samples: 1,
                details: json!({ "value": entry.value, "expected": expected }),
            }
        }
        Job::OracleAgreement { graphs } => {
            let mut total = 0;
            let mut disagree = 0;
            let mut per_graph = serde_json::Map::new();
            for (i, (name, graph, grid)) in graphs.iter().enumerate() {
                let system = ResidualSystem::new(graph)?;
                let pts = points(grid, seed.wrapping_add(1000 * i as u64), samples)?;
                let verdicts = par::map(&pts, |p| -> Result<(bool, bool)> {
                    Ok((
                        system.eval(p).max_foliation() <= tol,
                        pointwise_coisotropy(graph, p)?.coisotropic(),
                    ))
                });
                let mut coiso = 0;
                for v in verdicts {
                    let (a, b) = v?;
                    total += 1;
                    coiso += usize::from(b);
                    disagree += usize::from(a != b);
                }
                per_graph.insert(
                    name.clone(),
                    json!({ "samples": pts.len(), "coisotropic": coiso }),
                );
            }
            Measured {
                residual: disagree as f64,
                ok: disagree == 0,
                samples: total,
                details: json!({ "disagreements": disagree, "graphs": per_graph }),
            }
        }
        Job::SingularScan {
            graph,
            grid,
            dims,
            flag,
        } => {
            let g = grid.build(seed, samples)?;
            let scan = singular_scan(graph, &g, tol)?;
            let found = scan.dimensions();
            let flags_ok = flag.is_none_or(|f| scan.clusters.iter().all(|c| c.flag == f));
            let ok = &found == dims && flags_ok;
            Measured {
                residual: scan.min_lambda,
                ok,
                samples: scan.points_scanned,
                details: json!({
                    "hits": scan.hits.len(),
                    "dimensions": found,
                    "expected_dimensions": dims,
                    "flags": scan.clusters.iter().map(|c| c.flag).collect::<Vec<_>>(),
                }),
            }
        }
        Job::Perturb { graph, bump, grid } => {
            let perturbed = perturb_legendrian(graph, bump)?;
            let g = grid.build(seed, samples)?;
            let scan = singular_scan(&perturbed, &g, crate::coiso::SCAN_TOL)?;
            let y1 = graph.n();
            let in_window = scan
                .hits
                .iter()
                .filter(|p| p[y1] >= bump.window.0 && p[y1] <= bump.window.1)
                .count();
            let pts = g.points()?;
            let fol = max(par::map(&pts, |p| {
                foliation_residual(&perturbed, p).unwrap_or(f64::NAN)
            }));
            Measured {
                residual: fol,
                ok: fol <= tol && in_window == 0,
                samples: pts.len(),
                details: json!({ "hits_in_window": in_window, "hits": scan.hits.len() }),
            }
        }
        Job::CharFoliation { graph, grid } => {
            let cf = CharFoliation::new(graph, crate::coiso::SCAN_TOL)?;
            let pts = points(grid, seed, samples)?;
            let at = par::map(&pts, |p| cf.at(p));
            let (mut mismatches, mut singular, mut integ, mut restricted, mut full) =
                (0, 0, 0.0_f64, 0.0_f64, 0.0_f64);
            for a in at {
                let a = a?;
                if a.singular {
                    singular += 1;
                    continue;
                }
                mismatches += usize::from(a.kernel_dim != a.expected_dim);
                integ = integ.max(a.integrability);
                restricted = restricted.max(a.restricted_power);
                full = full.max(a.full_power);
            }
            Measured {
                residual: integ,
                ok: mismatches == 0 && integ <= tol,
                samples: pts.len(),
                details: json!({
                    "expected_kernel_dim": cf.expected_dim(), "kernel_mismatches": mismatches,
                    "singular_samples": singular, "restricted_power": restricted, "full_power": full,
                }),
            }
        }
        Job::Flatness { bundle, grid } => {
            let pts = points(grid, seed, samples)?;
            let r = flatness_check(bundle, &pts)?;
            Measured {
                residual: r,
                ok: r <= tol,
                samples: pts.len(),
                details: json!(null),
            }
        }
        Job::Transport {
            bundle,
            path,
            start,
            end,
        } => {
            let t = parallel_transport(bundle, path, *start, ode)?;
            let r = ((t.end[0] - end[0]).powi(2) + (t.end[1] - end[1]).powi(2)).sqrt();
            Measured {
                residual: r,
                ok: !t.escaped && r <= tol,
                samples: 1,
                details: json!({ "end": t.end, "steps": t.steps, "escaped": t.escaped }),
            }
        }
        Job::Holonomy {
            bundle,
            generator,
            radius,
            divisions,
            angle,
        } => {
            let pts = disk_samples(*radius, *divisions);
            let base = vec![0.0; bundle.base_dim()];
            let h = holonomy(bundle, *generator, &base, &pts, ode)?;
            let rot = Matrix2::new(angle.cos(), -angle.sin(), angle.sin(), angle.cos());
            let r = h
                .max_displacement_from(|[u, v]| {
                    let w = rot * nalgebra::Vector2::new(u, v);
                    [w[0], w[1]]
                })
                .max(h.origin_displacement());
            Measured {
                residual: r,
                ok: r <= tol && h.orientation_preserving() && h.escaped() == 0,
                samples: pts.len(),
                details: json!({
                    "origin_displacement": h.origin_displacement(),
                    "orientation_preserving": h.orientation_preserving(),
                    "escaped": h.escaped(),
                }),
            }
        }
        Job::Ccl {
            bundle,
            form,
            fails,
        } => {
            let opts = crate::bundle::CclOptions {
                invariance_tol: tol,
                ..Default::default()
            };
            let rep = ccl_check(bundle, form, opts)?;
            let r = max(rep.invariance.iter().copied());
            Measured {
                residual: r,
                ok: &rep.failed == fails,
                samples: 0,
                details: json!({
                    "failed": rep.failed, "expected_failures": fails, "beta_at_origin": rep.beta_at_origin,
                    "min_away": rep.min_away, "spurious_zero": rep.spurious_zero, "min_dbeta": rep.min_dbeta,
                }),
            }
        }
        Job::FlatStructure { graph, grid } => {
            let g = grid.build(seed, samples)?;
            let f = extract_flat_structure(graph, &g, crate::coiso::SCAN_TOL)?;
            let r = f.max_residual();
            Measured {
                residual: r,
                ok: r <= tol && f.frame_rank == f.kernel_dim,
                samples: f.samples,
                details: json!({
                    "kernel_dim": f.kernel_dim, "frame_rank": f.frame_rank, "frame_residual": f.frame_residual,
                    "integrability": f.integrability, "covariant_constancy": f.covariant_constancy,
                }),
            }
        }
        Job::Contactness {
            germ,
            base,
            radius,
            fiber_divisions,
        } => {
            let g = germ.neighborhood(&base.build(seed, samples)?, *radius, *fiber_divisions)?;
            let rep = contactness_scan(germ, &g)?;
            Measured {
                residual: rep.min_abs,
                ok: rep.passed && rep.min_abs > tol,
                samples: rep.samples,
                details: json!({ "min_abs": rep.min_abs, "max_abs": rep.max_abs, "sign": rep.sign }),
            }
        }
        Job::VolumeIdentity {
            germ,
            base,
            radius,
            fiber_divisions,
        } => {
            let g = germ.neighborhood(&base.build(seed, samples)?, *radius, *fiber_divisions)?;
            let pts = g.points()?;
            let r = volume_identity_residual(germ, &pts)?;
            Measured {
                residual: r,
                ok: r <= tol,
                samples: pts.len(),
                details: json!(null),
            }
        }
        Job::ZeroSection {
            germ,
            expected,
            grid,
        } => {
            let g = grid.build(seed, samples)?;
            let rep = zero_section_foliation_check(germ, expected, &g)?;
            Measured {
                residual: rep.restriction_residual,
                ok: rep.passed && rep.restriction_residual <= tol,
                samples: rep.samples,
                details: json!({
                    "worst_point": rep.worst_point, "kernel_mismatches": rep.kernel_mismatches,
                    "singular_hits": rep.singular_hits, "singular_mismatches": rep.singular_mismatches,
                    "singular_dims": rep.singular_dims,
                }),
            }
        }
        Job::Interpolation {
            g0,
            g1,
            grid,
            t_samples,
        } => {
            let g = grid.build(seed, samples)?;
            let opts = InterpolationOptions {
                t_samples: (0..*t_samples)
                    .map(|i| i as f64 / (*t_samples - 1) as f64)
                    .collect(),
                threshold: tol,
            };
            let rep = interpolation_contactness(g0, g1, &g, &opts)?;
            let min = rep
                .per_t
                .iter()
                .map(|r| r.min_abs)
                .fold(f64::INFINITY, f64::min);
            Measured {
                residual: min,
                ok: rep.passed,
                samples: g.len() * rep.t_samples.len(),
                details: json!({
                    "min_abs": min, "matched_pairs": rep.matched_pairs, "singular_pairs": rep.singular_pairs,
                }),
            }
        }
    })
}
