//! Machine-readable outputs: JSON reports (schema-versioned, sorted keys)
//! and CSV series (header row, '.' decimal separator, '\n' line endings).
//! Timestamps never enter CSV bodies, so identical runs are byte-identical.

use crate::error::{Error, Result};
use crate::horo::Horofunction;
use crate::linalg::Mat;
use crate::lln::{DriftEstimate, GoodTimeReport, LlnReport, RayApproxReport, RayApproxVerdict};
use crate::matrixcocycle::{LyapunovSpectrum, OseledecDirection};
use crate::shadows::WitnessSearch;
use crate::spaces::{halfplane::Moebius, IsometryElement, SpacePoint};
use crate::walks::{CocycleDriver, IncrementLaw, Trajectory};
use serde_json::{json, Value};
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "1";

pub fn point_to_json(p: &SpacePoint) -> Result<Value> {
    Ok(match p {
        SpacePoint::Lattice(v) => json!({ "kind": "z", "coords": v }),
        SpacePoint::Word(w) => json!({ "kind": "f", "letters": w }),
        SpacePoint::HalfPlane { re, im } => json!({ "kind": "h2", "z": [re, im] }),
        SpacePoint::Spd(s) => {
            let dense = s.to_dense()?;
            json!({ "kind": "pos", "dim": s.dim, "matrix": dense.data })
        }
    })
}

pub fn isometry_to_json(g: &IsometryElement) -> Value {
    match g {
        IsometryElement::Translation(v) => json!({ "kind": "z", "shift": v }),
        IsometryElement::Word(w) => json!({ "kind": "f", "letters": w }),
        IsometryElement::Moebius(m) => json!({ "kind": "h2", "matrix": [m.a, m.b, m.c, m.d] }),
        IsometryElement::Linear(m) => {
            json!({ "kind": "pos", "dim": m.n_rows, "matrix": m.data })
        }
    }
}

pub fn isometry_from_json(v: &Value) -> Result<IsometryElement> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::validation("isometry json needs a 'kind' field"))?;
    match kind {
        "z" => {
            let shift = v
                .get("shift")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::validation("translation needs 'shift'"))?;
            let coords: Option<Vec<i64>> = shift.iter().map(Value::as_i64).collect();
            Ok(IsometryElement::Translation(
                coords.ok_or_else(|| Error::validation("shift must be integers"))?,
            ))
        }
        "f" => {
            let letters = v
                .get("letters")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::validation("word needs 'letters'"))?;
            let ls: Option<Vec<i64>> = letters.iter().map(Value::as_i64).collect();
            let ls = ls.ok_or_else(|| Error::validation("letters must be integers"))?;
            Ok(IsometryElement::Word(ls.into_iter().map(|l| l as i32).collect()))
        }
        "h2" => {
            let m = float_array(v, "matrix", 4)?;
            Ok(IsometryElement::Moebius(Moebius::new(m[0], m[1], m[2], m[3])?))
        }
        "pos" => {
            let dim = v
                .get("dim")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::validation("matrix isometry needs 'dim'"))?
                as usize;
            let data = float_array(v, "matrix", dim * dim)?;
            Ok(IsometryElement::Linear(Mat { n_rows: dim, n_cols: dim, data }))
        }
        other => Err(Error::validation(format!("unknown isometry kind '{other}'"))),
    }
}

fn float_array(v: &Value, field: &str, expect: usize) -> Result<Vec<f64>> {
    let arr = v
        .get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::validation(format!("missing '{field}' array")))?;
    if arr.len() != expect {
        return Err(Error::validation(format!(
            "'{field}' has {} entries, expected {expect}",
            arr.len()
        )));
    }
    arr.iter()
        .map(|x| x.as_f64().ok_or_else(|| Error::validation(format!("'{field}' must be numeric"))))
        .collect()
}

pub fn law_from_json(v: &Value) -> Result<IncrementLaw> {
    if let Some(tag) = v.get("parametric").and_then(Value::as_str) {
        return match tag {
            "uniform-rotation" => Ok(IncrementLaw::UniformRotation2),
            "rotation-times-diagonal" => {
                let r = v
                    .get("log_ratio")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::validation("rotation-times-diagonal needs 'log_ratio'"))?;
                Ok(IncrementLaw::RotationTimesDiag2 { log_ratio: r })
            }
            other => Err(Error::validation(format!("unknown parametric law '{other}'"))),
        };
    }
    let support = v
        .get("support")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::validation("law json needs 'support'"))?;
    let probabilities = v
        .get("probabilities")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::validation("law json needs 'probabilities'"))?;
    let elements: Result<Vec<IsometryElement>> = support.iter().map(isometry_from_json).collect();
    let probs: Option<Vec<f64>> = probabilities.iter().map(Value::as_f64).collect();
    Ok(IncrementLaw::Finite {
        support: elements?,
        probabilities: probs.ok_or_else(|| Error::validation("probabilities must be numeric"))?,
    })
}

pub fn driver_from_json(v: &Value) -> Result<CocycleDriver> {
    if let Some(m) = v.get("markov") {
        let transition = m
            .get("transition")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::validation("markov driver needs 'transition'"))?;
        let rows: Result<Vec<Vec<f64>>> = transition
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::validation("transition rows must be arrays"))?
                    .iter()
                    .map(|x| {
                        x.as_f64().ok_or_else(|| Error::validation("transition must be numeric"))
                    })
                    .collect()
            })
            .collect();
        let laws = m
            .get("state_laws")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::validation("markov driver needs 'state_laws'"))?;
        let state_laws: Result<Vec<IncrementLaw>> = laws.iter().map(law_from_json).collect();
        let initial = m
            .get("initial")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::validation("markov driver needs 'initial'"))?;
        let init: Option<Vec<f64>> = initial.iter().map(Value::as_f64).collect();
        return Ok(CocycleDriver::Markov {
            transition: rows?,
            state_laws: state_laws?,
            initial: init.ok_or_else(|| Error::validation("initial must be numeric"))?,
        });
    }
    Ok(CocycleDriver::Iid { law: law_from_json(v)? })
}

pub fn horofunction_descriptor(h: &Horofunction) -> Value {
    use crate::horo::BoundaryDirection as B;
    match h {
        Horofunction::Busemann { direction, .. } => match direction {
            B::LatticeSignature(s) => json!({ "type": "busemann", "signature": s }),
            B::TreeWord(w) => {
                json!({ "type": "busemann", "head": w.head(), "cycle": w.cycle() })
            }
            B::HalfPlaneBoundary(x) => match x {
                Some(v) => json!({ "type": "busemann", "xi": v }),
                None => json!({ "type": "busemann", "xi": "infinity" }),
            },
            B::SpdDirection { basis, eigs } => {
                json!({ "type": "busemann", "basis": basis.data, "eigs": eigs })
            }
        },
        Horofunction::Interior { point, .. } => {
            json!({ "type": "interior", "point": point_to_json(point).ok() })
        }
        Horofunction::Approximant { points, .. } => {
            json!({ "type": "approximant", "points": points.len() })
        }
        Horofunction::Translated { inner, .. } => {
            json!({ "type": "translated", "inner": horofunction_descriptor(inner) })
        }
    }
}

pub fn trajectory_header(traj: &Trajectory) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "space": traj.space().kind().name(),
        "driver": traj.driver().describe(),
        "seed": traj.seed(),
        "stream": traj.stream(),
        "length": traj.len(),
    })
}

pub fn drift_report(est: &DriftEstimate, space: &str, driver: &str) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "space": space,
        "driver": driver,
        "a_hat": est.a_hat,
        "ci_half_width": est.ci_half_width,
        "length": est.len,
        "per_seed": est.per_seed,
        "method": est.method,
        "window_start_frac": est.window_start_frac,
    })
}

pub fn lln_report(report: &LlnReport, header: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "trajectory": header,
        "a_used": report.a_used,
        "terminal_deviation": report.terminal_deviation,
        "horofunction": report.horofunction,
        "max_bound_violation": report.max_bound_violation,
        "series_len": report.series.len(),
    })
}

pub fn goodtime_report(report: &GoodTimeReport, header: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "trajectory": header,
        "eps": report.eps,
        "a_used": report.a_used,
        "k_cutoff": report.k_min,
        "good_time_count": report.good_times.len(),
        "density": report.density,
        "mode": format!("{:?}", report.mode),
        "min_margin": report.min_margins.iter().cloned().fold(f64::INFINITY, f64::min),
    })
}

pub fn witness_report(search: &WitnessSearch, header: Value, horizon_note: &str) -> Value {
    match search {
        WitnessSearch::Found(w) => {
            let mut sorted = w.margins.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = sorted[sorted.len() / 2];
            json!({
                "schema_version": SCHEMA_VERSION,
                "trajectory": header,
                "found": true,
                "eps": w.eps,
                "start_n": w.start_n,
                "end_m": w.end_m,
                "witness": w.witness,
                "horizon": w.horizon,
                "horizon_note": horizon_note,
                "margin_min": sorted[0],
                "margin_median": median,
            })
        }
        WitnessSearch::NotFound { best_n, best_min_margin, .. } => json!({
            "schema_version": SCHEMA_VERSION,
            "trajectory": header,
            "found": false,
            "horizon_note": horizon_note,
            "best_n": best_n,
            "best_min_margin": best_min_margin,
        }),
    }
}

pub fn ray_approx_report(report: &RayApproxReport) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "verdict": match report.verdict {
            RayApproxVerdict::PremiseFails => "premise-fails",
            RayApproxVerdict::ConclusionHolds => "conclusion-holds",
            RayApproxVerdict::ConclusionFails => "conclusion-fails",
        },
        "delta": report.delta,
        "tail_start": report.tail_start,
        "points": report.premise.len(),
    })
}

pub fn spectrum_report(spec: &LyapunovSpectrum, driver: &str) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "driver": driver,
        "exponents": spec.exponents,
        "n_used": spec.n_used,
        "seeds": spec.per_seed.len(),
        "spread": spec.spread,
        "warnings": spec.warnings,
    })
}

pub fn oseledec_report(dir: &OseledecDirection) -> Result<Value> {
    let dim = dir.x.n_rows;
    let mut lambda = Mat::zeros(dim, dim);
    for k in 0..dim {
        let e = dir.lambda_log_eigs[k].exp();
        for i in 0..dim {
            for j in 0..dim {
                let v = lambda.get(i, j) + e * dir.basis.get(i, k) * dir.basis.get(j, k);
                lambda.set(i, j, v);
            }
        }
    }
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "x": dir.x.data,
        "lambda": lambda.data,
        "lambda_log_eigs": dir.lambda_log_eigs,
        "residual_terminal": dir.residuals.last().map(|(_, r)| *r),
        "degenerate_warning": dir.degenerate_warning,
    }))
}

/// Write a JSON value (pretty, sorted keys, trailing newline).
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::numerical(format!("json encoding failed: {e}")))?;
    write_bytes(path, format!("{body}\n").as_bytes())
}

/// Write a CSV with a header row; rows are already formatted cells.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut body = String::new();
    body.push_str(&header.join(","));
    body.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        body.push_str(&cells.join(","));
        body.push('\n');
    }
    write_bytes(path, body.as_bytes())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::numerical(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::numerical(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| Error::numerical(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Format a float for CSV: shortest round-trip representation, '.' separator.
pub fn csv_float(x: f64) -> String {
    format!("{x}")
}
