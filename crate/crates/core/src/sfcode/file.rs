//! JSON codebook files.
//!
//! ```json
//! {"schema_version":1,"params":{"K":8,"L":2,"nt":2,"T":4},
//!  "lattice":{"family":"K12","d_S":0.2,"alpha":1.57,"band_width":0.3},
//!  "A_prime":[[[re,im],...],...],"words":[[[[re,im],...],...],...],"rate":1.8}
//! ```
//!
//! Matrices are row-major with complex entries as `[re, im]` pairs. `lattice`
//! is `null` for codes not built from a lattice.

use serde::{Deserialize, Serialize};

use super::{build_a, operators, rate, Codebook, LatticeInfo, OfdmParams};
use crate::linalg::{c, frobenius, CMat};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("codebook file does not match schema: {0}")]
    SchemaMismatch(String),
}

fn mismatch(msg: impl Into<String>) -> FileError {
    FileError::SchemaMismatch(msg.into())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    nt: usize,
    #[serde(rename = "T")]
    t: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    family: String,
    #[serde(rename = "d_S")]
    d_s: f64,
    alpha: f64,
    band_width: f64,
}

type MatFile = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    schema_version: u32,
    params: ParamsFile,
    lattice: Option<LatticeFile>,
    #[serde(rename = "A_prime")]
    a_prime: MatFile,
    words: Vec<MatFile>,
    rate: f64,
}

fn to_rows(m: &CMat) -> MatFile {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|j| [m[(r, j)].re, m[(r, j)].im])
                .collect()
        })
        .collect()
}

fn from_rows(rows: &MatFile, shape: (usize, usize), what: &str) -> Result<CMat, FileError> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(mismatch(format!("{what} is not {}×{}", shape.0, shape.1)));
    }
    Ok(CMat::from_fn(shape.0, shape.1, |r, j| {
        c(rows[r][j][0], rows[r][j][1])
    }))
}

impl Codebook {
    /// Serializes in the canonical field order; the output is a pure
    /// function of the codebook.
    pub fn to_json(&self) -> String {
        let p = self.params;
        let file = CodebookFile {
            schema_version: SCHEMA_VERSION,
            params: ParamsFile {
                k: p.k,
                l: p.l,
                nt: p.nt,
                t: p.t,
            },
            lattice: self.lattice.map(|info| LatticeFile {
                family: info.family.name().to_string(),
                d_s: info.d_s,
                alpha: info.alpha,
                band_width: info.band_width,
            }),
            a_prime: to_rows(&self.a_prime),
            words: self.words.iter().map(to_rows).collect(),
            rate: self.rate,
        };
        let mut s = serde_json::to_string(&file).expect("codebook serializes");
        s.push('\n');
        s
    }

    /// Parses and validates a codebook file. The inner points are recovered
    /// as `A′†·FFT†·W`.
    pub fn from_json(text: &str) -> Result<Codebook, FileError> {
        let file: CodebookFile = serde_json::from_str(text).map_err(|e| mismatch(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(mismatch(format!(
                "schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let fp = &file.params;
        let params = OfdmParams::new(fp.k, fp.l, fp.nt).map_err(|e| mismatch(e.to_string()))?;
        if params.t != fp.t {
            return Err(mismatch(format!("T = {} but K/L = {}", fp.t, params.t)));
        }
        let a_prime = from_rows(&file.a_prime, (params.k, params.t), "A_prime")?;
        let expected = build_a(params.k, params.l).expect("params validated");
        if frobenius(&(&a_prime - expected)) > 1e-9 {
            return Err(mismatch("A_prime is not the chirp multipath matrix"));
        }
        let words = file
            .words
            .iter()
            .map(|w| from_rows(w, (params.k, params.nt), "word"))
            .collect::<Result<Vec<_>, _>>()?;
        let want = rate(words.len(), params.k);
        if (file.rate - want).abs() > 1e-9 {
            return Err(mismatch(format!(
                "rate {} but log2|C|/K = {want}",
                file.rate
            )));
        }
        let lattice = match file.lattice {
            None => None,
            Some(l) => Some(LatticeInfo {
                family: l
                    .family
                    .parse()
                    .map_err(|e: crate::lattice::LatticeError| mismatch(e.to_string()))?,
                d_s: l.d_s,
                alpha: l.alpha,
                band_width: l.band_width,
            }),
        };
        let back = a_prime.adjoint() * operators(params.k).ifft;
        let inner = words.iter().map(|w| &back * w).collect();
        Ok(Codebook {
            params,
            a_prime,
            inner,
            words,
            rate: want,
            lattice,
        })
    }
}
