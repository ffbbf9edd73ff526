use serde::Serialize;
use serde_json::{json, Value};

use phasequant_core::cornell::{cornell_quantize_numeric, regge_table, CornellParams};
use phasequant_core::wavefunction::Region;
use phasequant_core::Error;

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("csv output: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, Error> {
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

pub fn wavefunction_csv(samples: &[(f64, f64, Region)]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "psi", "region"]).map_err(csv_error)?;
    for (x, psi, region) in samples {
        w.write_record([x.to_string(), psi.to_string(), region.label().to_string()])
            .map_err(csv_error)?;
    }
    finish(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct CornellRow {
    pub n_r: u32,
    pub l: u32,
    pub e_squared: f64,
    pub e: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifted: Option<f64>,
    pub linear: f64,
    /// Numerically quantized `E²`, or the structured error that stopped it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<Value>,
}

pub fn cornell_rows(
    params: &CornellParams,
    ls: &[u32],
    n_r_max: u32,
    shift: Option<f64>,
    numeric: bool,
) -> Result<Vec<CornellRow>, Error> {
    let l_max = ls.iter().copied().max().unwrap_or(0);
    let table = regge_table(params, n_r_max, l_max, shift)?;
    Ok(table
        .into_iter()
        .filter(|r| ls.contains(&r.l))
        .map(|r| CornellRow {
            n_r: r.n_r,
            l: r.l,
            e_squared: r.e_squared,
            e: r.e_squared.sqrt(),
            shifted: r.shifted,
            linear: r.linear,
            numeric: numeric.then(|| match cornell_quantize_numeric(&params.with_l(r.l), r.n_r) {
                Ok(level) => json!({ "e_squared": level.e_squared }),
                Err(e) => json!({ "error": { "tag": e.tag(), "message": e.to_string() } }),
            }),
        })
        .collect())
}

pub fn cornell_csv(rows: &[CornellRow]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n_r", "l", "e_squared", "e", "shifted", "linear", "numeric_e_squared"])
        .map_err(csv_error)?;
    for r in rows {
        let numeric = r
            .numeric
            .as_ref()
            .and_then(|v| v.get("e_squared"))
            .and_then(Value::as_f64)
            .map(|v| v.to_string())
            .unwrap_or_default();
        w.write_record([
            r.n_r.to_string(),
            r.l.to_string(),
            r.e_squared.to_string(),
            r.e.to_string(),
            r.shifted.map(|v| v.to_string()).unwrap_or_default(),
            r.linear.to_string(),
            numeric,
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}
