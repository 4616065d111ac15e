//! Field snapshots as CSV (index columns plus value) or as raw little-endian
//! `f64` values with a JSON sidecar.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::model::ModelParams;

use super::domain::{BoxDomain, Field};

/// Metadata stored next to a binary field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub p: usize,
    pub d: usize,
    #[serde(rename = "R")]
    pub radius: usize,
    pub t: f64,
    pub params: ModelParams,
}

impl Sidecar {
    pub fn new(field: &Field, t: f64, params: &ModelParams) -> Self {
        Self {
            p: field.domain.p,
            d: field.domain.d,
            radius: field.domain.radius,
            t,
            params: *params,
        }
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::new(self.p, self.d, self.radius)
    }
}

fn io_err(e: std::io::Error) -> PamError {
    PamError::Domain(format!("i/o error: {e}"))
}

/// Scientific notation with 17 significant digits (round-trips every `f64`).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per site: `x1, ..., x_{pd}, value`.
pub fn write_field_csv<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let n = field.domain.dims();
    let header: Vec<String> = (1..=n).map(|k| format!("x{k}")).chain(["value".into()]).collect();
    writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    for (i, v) in field.values.iter().enumerate() {
        let x = field.domain.coords(i);
        let cols: Vec<String> = x.iter().map(|c| c.to_string()).chain([fmt17(*v)]).collect();
        writeln!(w, "{}", cols.join(",")).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_field_csv<R: BufRead>(domain: BoxDomain, r: R) -> Result<Field> {
    let mut f = Field::zeros(domain);
    let mut lines = r.lines();
    lines.next().ok_or_else(|| PamError::Domain("empty CSV".into()))?.map_err(io_err)?;
    let n = domain.dims();
    for line in lines {
        let line = line.map_err(io_err)?;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != n + 1 {
            return Err(PamError::Domain(format!("bad CSV row: {line}")));
        }
        let x: std::result::Result<Vec<i64>, _> = cols[..n].iter().map(|c| c.parse()).collect();
        let x = x.map_err(|e| PamError::Domain(format!("bad index in {line}: {e}")))?;
        let v: f64 = cols[n]
            .parse()
            .map_err(|e| PamError::Domain(format!("bad value in {line}: {e}")))?;
        let i = domain
            .index(&x)
            .ok_or_else(|| PamError::Domain(format!("site {x:?} outside the box")))?;
        f.values[i] = v;
    }
    Ok(f)
}

pub fn write_field_bin<W: Write>(field: &Field, mut w: W) -> Result<()> {
    for v in &field.values {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_field_bin<R: Read>(domain: BoxDomain, mut r: R) -> Result<Field> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err)?;
    if bytes.len() != 8 * domain.len() {
        return Err(PamError::Domain(format!(
            "expected {} bytes, found {}",
            8 * domain.len(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks of 8")))
        .collect();
    Field::from_values(domain, values)
}

pub fn sidecar_json(sidecar: &Sidecar) -> String {
    serde_json::to_string_pretty(sidecar).expect("sidecar serializes")
}

pub fn parse_sidecar(s: &str) -> Result<Sidecar> {
    serde_json::from_str(s).map_err(|e| PamError::Domain(format!("bad sidecar: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Field, ModelParams) {
        let dom = BoxDomain::new(2, 1, 3).unwrap();
        let f = Field::from_fn(dom, |x| (x[0] as f64 * 0.1 + x[1] as f64).exp() / 3.0);
        (f, ModelParams::new(1, 1.0, 0.5, 2.0, 2).unwrap())
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let (f, _) = sample();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,value\n"));
        let g = read_field_csv(f.domain, buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn bin_round_trip_and_sidecar_schema() {
        let (f, params) = sample();
        let mut buf = Vec::new();
        write_field_bin(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 49);
        let s = Sidecar::new(&f, 1.25, &params);
        let json = sidecar_json(&s);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 5);
        let pos: Vec<usize> = ["\"p\"", "\"d\"", "\"R\"", "\"t\"", "\"params\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "key order {pos:?}");
        for k in ["d", "kappa", "rho", "gamma", "p"] {
            assert!(v["params"].get(k).is_some());
        }
        let back = parse_sidecar(&json).unwrap();
        let g = read_field_bin(back.domain().unwrap(), buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }
}
