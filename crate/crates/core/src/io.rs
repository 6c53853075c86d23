//! JSON input and output. Exact values are written as strings `"p/q"`; on
//! input, integers and such strings are both accepted. Errors name the
//! offending field, as in `items[0].weight`.

use num_traits::Signed;
use serde_json::{json, Map, Value};

use crate::balance::{
    BalanceResult, BundleBalance, BundlePoint, CMatrix, SampledBundleConfig, C64,
};
use crate::config::{Item, WeightedConfiguration};
use crate::error::{Error, Result};
use crate::exact::{format_q, parse_q, RationalMatrix, Subspace, Q};
use crate::filtration::{Filtration, FlagReport, MFiltration};
use crate::hilbert_mumford::{Certificate, Verdict};

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| err(path, format!("missing field {key:?}")))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| err(path, "expected a nonnegative integer"))
}

fn rational(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s).map_err(|e| err(path, e)),
        Value::Number(x) => match x.as_i64() {
            Some(i) => Ok(crate::exact::q(i)),
            None => Err(err(
                path,
                "non-integer numbers must be written as \"p/q\" strings",
            )),
        },
        _ => Err(err(path, "expected a rational")),
    }
}

fn real(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| err(path, "expected a number"))
}

fn rationals(v: &Value, path: &str) -> Result<Vec<Q>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| rational(x, &format!("{path}[{i}]")))
        .collect()
}

/// A list of basis vectors of length `ambient`, required to be independent.
fn basis(v: &Value, ambient: usize, path: &str) -> Result<Subspace> {
    let rows = array(v, path)?
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let p = format!("{path}[{j}]");
            let row = rationals(r, &p)?;
            if row.len() != ambient {
                return Err(err(
                    &p,
                    format!("vector has length {}, expected {ambient}", row.len()),
                ));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let s = Subspace::span(ambient, &rows).map_err(|e| err(path, e))?;
    if s.dim() < rows.len() {
        return Err(err(path, "basis is rank-deficient"));
    }
    Ok(s)
}

pub fn config_from_value(v: &Value) -> Result<WeightedConfiguration> {
    let n = count(field(v, "n", "")?, "n")?;
    let d = match v.get("d") {
        Some(x) => count(x, "d")?,
        None => 1,
    };
    if n == 0 || d == 0 {
        return Err(err(if n == 0 { "n" } else { "d" }, "must be positive"));
    }
    let items = array(field(v, "items", "")?, "items")?
        .iter()
        .enumerate()
        .map(|(i, it)| {
            let p = format!("items[{i}]");
            let subspace = basis(field(it, "basis", &p)?, n * d, &join(&p, "basis"))?;
            let wp = join(&p, "weight");
            let weight = rational(field(it, "weight", &p)?, &wp)?;
            if !weight.is_positive() {
                return Err(err(&wp, "weight must be positive"));
            }
            Ok(Item { subspace, weight })
        })
        .collect::<Result<Vec<_>>>()?;
    WeightedConfiguration::new(n, d, items)
}

pub fn parse_config(text: &str) -> Result<WeightedConfiguration> {
    config_from_value(&parse_json(text)?)
}

pub fn subspace_value(s: &Subspace) -> Value {
    json!(s.to_strings())
}

pub fn config_value(c: &WeightedConfiguration) -> Value {
    let items: Vec<Value> = c
        .items()
        .iter()
        .map(|it| json!({ "basis": subspace_value(&it.subspace), "weight": format_q(&it.weight) }))
        .collect();
    json!({ "n": c.n(), "d": c.d(), "items": items })
}

/// Extra test subspaces: a list of bases, an object with a `subspaces` list,
/// or a verdict whose certificate carries a basis.
pub fn parse_extra(text: &str, ambient: usize) -> Result<Vec<Subspace>> {
    let v = parse_json(text)?;
    let (list, path): (Vec<&Value>, &str) = if let Some(a) = v.as_array() {
        (a.iter().collect(), "")
    } else if let Some(a) = v.get("subspaces") {
        (array(a, "subspaces")?.iter().collect(), "subspaces")
    } else if let Some(b) = v.get("certificate").and_then(|c| c.get("basis")) {
        (vec![b], "certificate.basis")
    } else {
        return Err(err(
            "",
            "expected a list of bases, {\"subspaces\": [...]}, or a verdict",
        ));
    };
    list.iter()
        .enumerate()
        .map(|(i, b)| {
            let p = if list.len() == 1 && path == "certificate.basis" {
                path.to_string()
            } else {
                format!("{path}[{i}]")
            };
            basis(b, ambient, &p)
        })
        .collect()
}

pub fn mfiltration_from_value(v: &Value) -> Result<MFiltration> {
    let n = count(field(v, "n", "")?, "n")?;
    let filtrations = array(field(v, "filtrations", "")?, "filtrations")?
        .iter()
        .enumerate()
        .map(|(s, f)| {
            let p = format!("filtrations[{s}]");
            let sp = join(&p, "steps");
            let steps = array(field(f, "steps", &p)?, &sp)?
                .iter()
                .enumerate()
                .map(|(l, b)| basis(b, n, &format!("{sp}[{l}]")))
                .collect::<Result<Vec<_>>>()?;
            let weights = rationals(field(f, "weights", &p)?, &join(&p, "weights"))?;
            Ok(Filtration { steps, weights })
        })
        .collect::<Result<Vec<_>>>()?;
    MFiltration::new(n, filtrations)
}

pub fn parse_mfiltration(text: &str) -> Result<MFiltration> {
    mfiltration_from_value(&parse_json(text)?)
}

pub fn mfiltration_value(f: &MFiltration) -> Value {
    let fs: Vec<Value> = f
        .filtrations()
        .iter()
        .map(|fl| {
            json!({
                "steps": fl.steps.iter().map(subspace_value).collect::<Vec<_>>(),
                "weights": fl.weights.iter().map(format_q).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "n": f.n(), "filtrations": fs })
}

/// Frames are given per item as a list of columns, each a list of `[re, im]`
/// pairs (a bare number means a real entry).
pub fn bundle_from_value(v: &Value) -> Result<SampledBundleConfig> {
    let n = count(field(v, "N", "")?, "N")?;
    let weights = array(field(v, "weights", "")?, "weights")?
        .iter()
        .enumerate()
        .map(|(i, x)| real(x, &format!("weights[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let ranks = array(field(v, "ranks", "")?, "ranks")?
        .iter()
        .enumerate()
        .map(|(i, x)| count(x, &format!("ranks[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let points = array(field(v, "points", "")?, "points")?
        .iter()
        .enumerate()
        .map(|(t, pt)| {
            let p = format!("points[{t}]");
            let volume = real(field(pt, "volume", &p)?, &join(&p, "volume"))?;
            let fp = join(&p, "frames");
            let frames = array(field(pt, "frames", &p)?, &fp)?
                .iter()
                .enumerate()
                .map(|(i, f)| frame(f, n, &format!("{fp}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(BundlePoint { volume, frames })
        })
        .collect::<Result<Vec<_>>>()?;
    SampledBundleConfig::new(n, points, weights, ranks)
}

fn complex(v: &Value, path: &str) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok(C64::new(real(re, path)?, real(im, path)?)),
        _ => Err(err(path, "expected a number or an [re, im] pair")),
    }
}

fn frame(v: &Value, n: usize, path: &str) -> Result<CMatrix> {
    let cols = array(v, path)?;
    let mut m = CMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        let cp = format!("{path}[{j}]");
        let entries = array(c, &cp)?;
        if entries.len() != n {
            return Err(err(
                &cp,
                format!("column has length {}, expected {n}", entries.len()),
            ));
        }
        for (i, e) in entries.iter().enumerate() {
            m[(i, j)] = complex(e, &format!("{cp}[{i}]"))?;
        }
    }
    Ok(m)
}

pub fn parse_bundle(text: &str) -> Result<SampledBundleConfig> {
    bundle_from_value(&parse_json(text)?)
}

/// Matrix as rows of `[re, im]` pairs.
pub fn cmatrix_value(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn rational_matrix_value(m: &RationalMatrix) -> Value {
    json!(m.to_string_rows())
}

pub fn certificate_value(c: &Certificate) -> Value {
    match c {
        Certificate::Destabilizing { subspace, slope } => json!({
            "kind": "Destabilizing",
            "basis": subspace_value(subspace),
            "slope": format_q(slope),
        }),
        Certificate::Equality { subspace, slope } => json!({
            "kind": "Equality",
            "basis": subspace_value(subspace),
            "slope": format_q(slope),
        }),
        Certificate::DirectSum { summands } => json!({
            "kind": "DirectSum",
            "summands": summands.iter().map(subspace_value).collect::<Vec<_>>(),
        }),
        Certificate::Exhausted { candidates, digest } => json!({
            "kind": "Exhausted",
            "candidates": candidates,
            "digest": digest,
        }),
    }
}

pub fn verdict_value(v: &Verdict) -> Value {
    let mut m = Map::new();
    m.insert("status".into(), json!(v.status.name()));
    m.insert("confidence".into(), json!(v.confidence.name()));
    m.insert("slope_total".into(), json!(format_q(&v.slope_total)));
    m.insert("certificate".into(), certificate_value(&v.certificate));
    if let Some(d) = &v.decomposition {
        m.insert(
            "decomposition".into(),
            Value::Array(d.iter().map(subspace_value).collect()),
        );
    }
    if !v.notes.is_empty() {
        m.insert("notes".into(), json!(v.notes));
    }
    Value::Object(m)
}

pub fn flag_value(r: &FlagReport) -> Value {
    let gradeds: Vec<Value> = r
        .gradeds
        .iter()
        .map(|g| {
            json!({
                "dim": g.config.n(),
                "slope": format_q(&g.slope),
                "status": g.status.name(),
            })
        })
        .collect();
    json!({
        // the implicit zero step is omitted
        "steps": r.steps.iter().skip(1).map(subspace_value).collect::<Vec<_>>(),
        "slopes": r.slopes().iter().map(format_q).collect::<Vec<_>>(),
        "gradeds": gradeds,
        "confidence": r.confidence.name(),
    })
}

pub fn balance_value(r: &BalanceResult) -> Value {
    json!({
        "status": r.status.name(),
        "residual": r.residual,
        "iterations": r.iterations,
        "metric": cmatrix_value(&r.metric),
        "kempf_ness_final": r.trace.last(),
        "destabilizer_hint": r.destabilizer_hint.iter().map(cmatrix_value).collect::<Vec<_>>(),
    })
}

pub fn bundle_balance_value(b: &BundleBalance, tol: f64) -> Value {
    let mut v = balance_value(&b.result);
    if let Value::Object(m) = &mut v {
        m.insert("restart_gap".into(), json!(b.restart_gap));
        m.insert(
            "restart_status".into(),
            json!(b.restart_status.map(|s| s.name())),
        );
        m.insert("unique".into(), json!(b.unique(tol)));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(r#"{"n": 2, "items": [{"basis": [[1, 0]], "weight": 1}]}"#).unwrap();
        assert_eq!(c.n(), 2);
        assert_eq!(c.d(), 1);
        assert_eq!(c.weights(), vec![q(1)]);
        assert_eq!(config_from_value(&config_value(&c)).unwrap(), c);
    }

    #[test]
    fn field_paths_in_errors() {
        let e =
            parse_config(r#"{"n": 2, "items": [{"basis": [[1, 0]], "weight": "0"}]}"#).unwrap_err();
        assert!(e.to_string().contains("items[0].weight"), "{e}");
        let e = parse_config(r#"{"n": 2, "items": [{"basis": [[1, 0, 0]], "weight": 1}]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("items[0].basis[0]"), "{e}");
        let e = parse_config(r#"{"n": 2, "items": [{"basis": [[1, 1], [2, 2]], "weight": 1}]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("rank-deficient"), "{e}");
        let e =
            parse_config(r#"{"n": 2, "items": [{"basis": [[1, 0]], "weight": 0.5}]}"#).unwrap_err();
        assert!(e.to_string().contains("items[0].weight"), "{e}");
        assert!(parse_config(r#"{"items": []}"#)
            .unwrap_err()
            .to_string()
            .contains("\"n\""));
    }

    #[test]
    fn extras_accept_three_shapes() {
        let a = parse_extra("[[[1, 0]]]", 2).unwrap();
        let b = parse_extra(r#"{"subspaces": [[["1", "0"]]]}"#, 2).unwrap();
        let c = parse_extra(
            r#"{"status": "Unstable", "certificate": {"basis": [["2", "0"]]}}"#,
            2,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn mfiltration_round_trip() {
        let text = r#"{"n": 2, "filtrations": [{"steps": [[[1, 0]]], "weights": ["1/2"]}]}"#;
        let f = parse_mfiltration(text).unwrap();
        assert_eq!(mfiltration_from_value(&mfiltration_value(&f)).unwrap(), f);
    }

    #[test]
    fn bundle_parses() {
        let text = r#"{"N": 2, "weights": [1.0], "ranks": [1],
            "points": [{"volume": 0.5, "frames": [[[[1, 0], [0, 0]]]]},
                       {"volume": 0.5, "frames": [[[0, 1]]]}]}"#;
        let b = parse_bundle(text).unwrap();
        assert_eq!(b.points().len(), 2);
        let e = parse_bundle(r#"{"N": 2, "weights": [1.0], "ranks": [1], "points": [{"volume": 1, "frames": [[[1]]]}]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("points[0].frames[0][0]"), "{e}");
    }
}
