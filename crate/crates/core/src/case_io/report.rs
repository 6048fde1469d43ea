//! JSON and CSV encodings for report payloads.
//!
//! Complex numbers are two-element `[re, im]` arrays in JSON and `re,im`
//! column pairs in CSV.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};

use crate::linalg::ComplexMatrix;

/// Serializes a complex number as `[re, im]`.
pub fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&[z.re, z.im], s)
}

/// Serializes a complex slice as `[[re, im], ...]`.
pub fn serialize_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Serializes a matrix as dense row-major nested arrays of `[re, im]`.
pub fn serialize_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.rows()))?;
    for i in 0..m.rows() {
        let row: Vec<[f64; 2]> = m.row(i).iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

/// Writes `(block, row, col, re, im)` records for each named matrix.
pub fn matrices_to_csv(blocks: &[(&str, &ComplexMatrix)]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["block", "row", "col", "re", "im"])?;
    for (name, m) in blocks {
        for (i, j, z) in m.iter_indexed() {
            w.write_record([
                name.to_string(),
                i.to_string(),
                j.to_string(),
                z.re.to_string(),
                z.im.to_string(),
            ])?;
        }
    }
    finish(w)
}

/// Writes `re,im` pairs, one per line, with a header.
pub fn pairs_to_csv(pairs: &[(f64, f64)]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re", "im"])?;
    for (re, im) in pairs {
        w.write_record([re.to_string(), im.to_string()])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, csv::Error> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Serialize)]
    struct Wrap<'a> {
        #[serde(serialize_with = "serialize_complex")]
        z: Complex64,
        #[serde(serialize_with = "serialize_matrix")]
        m: &'a ComplexMatrix,
    }

    #[test]
    fn complex_as_pairs() {
        let m =
            ComplexMatrix::from_rows(&[vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)]]);
        let json = serde_json::to_string(&Wrap {
            z: Complex64::new(3.0, 4.0),
            m: &m,
        })
        .unwrap();
        assert_eq!(json, r#"{"z":[3.0,4.0],"m":[[[1.0,-2.0],[0.5,0.0]]]}"#);
    }

    #[test]
    fn csv_layouts() {
        let text = pairs_to_csv(&[(1.5, -2.0)]).unwrap();
        assert_eq!(text, "re,im\n1.5,-2\n");
        let m = ComplexMatrix::from_rows(&[vec![Complex64::new(1.0, 2.0)]]);
        let text = matrices_to_csv(&[("F_LG", &m)]).unwrap();
        assert_eq!(text, "block,row,col,re,im\nF_LG,0,0,1,2\n");
    }
}
