//! On-disk formats: JSON schemas for fields, coverings and decompositions,
//! plus the sinogram CSV.
//!
//! All floating-point output is printed with 17 significant digits, which
//! round-trips f64 exactly and keeps byte-identical reruns; files are
//! written atomically (temp file + rename). Validation errors name the
//! offending JSON path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{FourierTensorField, IntervalField};
use crate::kernel::{stability_constant, Decomposition};
use crate::poly::{HomogeneousPoly, MultiIndex};
use crate::twisted::{CoveringSpec, DeckTransform};
use crate::xray::Sinogram;

/// One monomial of a polynomial: `{"alpha":[e0,...,en], "re":..., "im":...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyTermJson {
    pub alpha: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldModeJson {
    pub j: i64,
    pub k: Vec<i64>,
    pub poly: Vec<PolyTermJson>,
}

/// A tensor field on the slab:
/// `{"n":..., "m":..., "modes":[{"j":..., "k":[...], "poly":[...]}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldJson {
    pub n: usize,
    pub m: i32,
    pub modes: Vec<FieldModeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalModeJson {
    pub j: i64,
    pub poly: Vec<PolyTermJson>,
}

/// An interval (x-only) field with polynomial values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalFieldJson {
    pub n: usize,
    pub m: i32,
    pub modes: Vec<IntervalModeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringGeneratorJson {
    pub flip: bool,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    pub c: Vec<f64>,
}

/// Generators of a deck group: `{"n":..., "generators":[...]}`. Loading
/// closes the group and validates it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringSpecJson {
    pub n: usize,
    pub generators: Vec<CoveringGeneratorJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsJson {
    #[serde(rename = "C_g")]
    pub c_g: f64,
}

/// A kernel decomposition certificate. `residual` is included so the file
/// reassembles to the input field exactly: π*h + dg + residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub h: IntervalFieldJson,
    pub g: FieldJson,
    pub residual: FieldJson,
    pub residual_norm: f64,
    pub boundary_defect: f64,
    pub constants: ConstantsJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SinogramSidecarJson {
    pub b: Vec<f64>,
    pub a_grid_size: usize,
}

fn poly_to_terms(p: &HomogeneousPoly) -> Vec<PolyTermJson> {
    p.terms()
        .map(|(alpha, c)| PolyTermJson {
            alpha: alpha.exponents().to_vec(),
            re: c.re,
            im: c.im,
        })
        .collect()
}

fn poly_from_terms(
    dim: usize,
    degree: i32,
    terms: &[PolyTermJson],
    path: &str,
) -> Result<HomogeneousPoly> {
    if degree < 0 && !terms.is_empty() {
        return Err(Error::json(
            path,
            "a polynomial of the zero space (degree -1) admits no terms",
        ));
    }
    let mut p = HomogeneousPoly::zero(dim, degree);
    for (t, term) in terms.iter().enumerate() {
        if term.alpha.len() != dim {
            return Err(Error::json(
                format!("{path}[{t}].alpha"),
                format!("expected {dim} exponents, got {}", term.alpha.len()),
            ));
        }
        let total: u32 = term.alpha.iter().sum();
        if total as i32 != degree {
            return Err(Error::json(
                format!("{path}[{t}].alpha"),
                format!("total degree {total} does not match the field order {degree}"),
            ));
        }
        let alpha = MultiIndex::new(term.alpha.clone());
        if p.coeff(&alpha) != Complex64::new(0.0, 0.0) {
            return Err(Error::json(
                format!("{path}[{t}].alpha"),
                "duplicate monomial",
            ));
        }
        p.add_term(alpha, Complex64::new(term.re, term.im))
            .map_err(|e| Error::json(format!("{path}[{t}]"), e.to_string()))?;
    }
    Ok(p)
}

pub fn field_to_json(f: &FourierTensorField) -> FieldJson {
    FieldJson {
        n: f.n(),
        m: f.m(),
        modes: f
            .iter()
            .map(|(mode, p)| FieldModeJson {
                j: mode.j,
                k: mode.k.clone(),
                poly: poly_to_terms(p),
            })
            .collect(),
    }
}

pub fn field_from_json(doc: &FieldJson) -> Result<FourierTensorField> {
    if doc.m < -1 {
        return Err(Error::json("m", "tensor order must be at least -1"));
    }
    let mut f = FourierTensorField::new(doc.n, doc.m);
    for (i, mode) in doc.modes.iter().enumerate() {
        if mode.k.len() != doc.n {
            return Err(Error::json(
                format!("modes[{i}].k"),
                format!("expected {} components, got {}", doc.n, mode.k.len()),
            ));
        }
        if f.mode(mode.j, &mode.k).is_some() {
            return Err(Error::json(format!("modes[{i}]"), "duplicate mode"));
        }
        let poly = poly_from_terms(doc.n + 1, doc.m, &mode.poly, &format!("modes[{i}].poly"))?;
        f.set_mode(mode.j, &mode.k, poly)
            .map_err(|e| Error::json(format!("modes[{i}]"), e.to_string()))?;
    }
    Ok(f)
}

pub fn interval_to_json(h: &IntervalField) -> IntervalFieldJson {
    IntervalFieldJson {
        n: h.n(),
        m: h.m(),
        modes: h
            .iter()
            .map(|(&j, p)| IntervalModeJson {
                j,
                poly: poly_to_terms(p),
            })
            .collect(),
    }
}

pub fn interval_from_json(doc: &IntervalFieldJson) -> Result<IntervalField> {
    if doc.m < -1 {
        return Err(Error::json("m", "tensor order must be at least -1"));
    }
    let mut h = IntervalField::new(doc.n, doc.m);
    for (i, mode) in doc.modes.iter().enumerate() {
        let poly = poly_from_terms(doc.n + 1, doc.m, &mode.poly, &format!("modes[{i}].poly"))?;
        h.set_mode(mode.j, poly)
            .map_err(|e| Error::json(format!("modes[{i}]"), e.to_string()))?;
    }
    Ok(h)
}

pub fn covering_from_json(doc: &CoveringSpecJson) -> Result<CoveringSpec> {
    let mut generators = Vec::with_capacity(doc.generators.len());
    for (i, g) in doc.generators.iter().enumerate() {
        if g.c.len() != doc.n {
            return Err(Error::json(
                format!("generators[{i}].c"),
                format!("expected {} components, got {}", doc.n, g.c.len()),
            ));
        }
        let t = DeckTransform::new(g.flip, g.a.clone(), g.c.clone())
            .map_err(|e| Error::json(format!("generators[{i}]"), e.to_string()))?;
        generators.push(t);
    }
    CoveringSpec::from_generators(doc.n, generators)
}

pub fn covering_to_json(spec: &CoveringSpec) -> CoveringSpecJson {
    CoveringSpecJson {
        n: spec.n(),
        generators: spec
            .elements()
            .iter()
            .map(|t| CoveringGeneratorJson {
                flip: t.flip(),
                a: t.torus_matrix().to_vec(),
                c: t.shift().to_vec(),
            })
            .collect(),
    }
}

pub fn decomposition_to_json(d: &Decomposition) -> DecompositionJson {
    DecompositionJson {
        h: interval_to_json(&d.h),
        g: field_to_json(&d.g),
        residual: field_to_json(&d.residual),
        residual_norm: d.residual_norm,
        boundary_defect: d.boundary_defect,
        constants: ConstantsJson {
            c_g: stability_constant(d.h.n(), d.h.m()),
        },
    }
}

/// Formatter that prints every f64 with 17 significant digits, enough to
/// round-trip the value exactly and deterministic across runs.
struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to JSON with fixed float formatting.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::json("<serialize>", e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::json("<serialize>", e.to_string()))
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".tmp");
    PathBuf::from(os)
}

/// Write bytes atomically: a temp file in the same directory is renamed
/// over the target once fully written.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Serialize a value to JSON (17 significant digits, trailing newline) and
/// write it atomically.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Parse a JSON file, labeling syntax errors with the file name and
/// position.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e.to_string()))
}

pub fn load_field(path: &Path) -> Result<FourierTensorField> {
    let doc: FieldJson = read_json(path)?;
    field_from_json(&doc).map_err(|e| prefix_path(e, path))
}

pub fn save_field(path: &Path, f: &FourierTensorField) -> Result<()> {
    write_json(path, &field_to_json(f))
}

pub fn load_covering(path: &Path) -> Result<CoveringSpec> {
    let doc: CoveringSpecJson = read_json(path)?;
    covering_from_json(&doc).map_err(|e| prefix_path(e, path))
}

fn prefix_path(e: Error, file: &Path) -> Error {
    match e {
        Error::Json { path, message } => Error::Json {
            path: format!("{}: {path}", file.display()),
            message,
        },
        other => other,
    }
}

/// Sinogram CSV: header `a_1,...,a_n,re,im`, one row per grid point in
/// row-major order (last axis fastest), floats at 17 significant digits.
pub fn write_sinogram_csv(path: &Path, s: &Sinogram) -> Result<()> {
    let mut out = String::new();
    for i in 1..=s.n() {
        out.push_str(&format!("a_{i},"));
    }
    out.push_str("re,im\n");
    for (flat, v) in s.values().iter().enumerate() {
        for a in s.grid_point(flat) {
            out.push_str(&format!("{a:.16e},"));
        }
        out.push_str(&format!("{:.16e},{:.16e}\n", v.re, v.im));
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xray::xray_sinogram;

    #[test]
    fn field_round_trips_losslessly() {
        let f = FourierTensorField::random(2, 2, 2, 1, 321);
        let doc = field_to_json(&f);
        let text = to_json_string(&doc).unwrap();
        let parsed: FieldJson = serde_json::from_str(&text).unwrap();
        let back = field_from_json(&parsed).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn serialization_is_deterministic() {
        let f = FourierTensorField::random(1, 1, 3, 3, 7);
        let a = to_json_string(&field_to_json(&f)).unwrap();
        let b = to_json_string(&field_to_json(&f)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains('e'), "floats use scientific notation: {a}");
    }

    #[test]
    fn validation_names_the_offending_path() {
        let doc = FieldJson {
            n: 2,
            m: 1,
            modes: vec![FieldModeJson {
                j: 0,
                k: vec![1], // wrong length
                poly: vec![],
            }],
        };
        match field_from_json(&doc) {
            Err(Error::Json { path, .. }) => assert_eq!(path, "modes[0].k"),
            other => panic!("expected json error, got {other:?}"),
        }

        let doc = FieldJson {
            n: 1,
            m: 1,
            modes: vec![FieldModeJson {
                j: 0,
                k: vec![1],
                poly: vec![PolyTermJson {
                    alpha: vec![2, 0], // degree 2 in an order-1 field
                    re: 1.0,
                    im: 0.0,
                }],
            }],
        };
        match field_from_json(&doc) {
            Err(Error::Json { path, .. }) => assert_eq!(path, "modes[0].poly[0].alpha"),
            other => panic!("expected json error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_modes_are_rejected() {
        let mode = FieldModeJson {
            j: 1,
            k: vec![0],
            poly: vec![PolyTermJson {
                alpha: vec![0, 0],
                re: 1.0,
                im: 0.0,
            }],
        };
        let doc = FieldJson {
            n: 1,
            m: 0,
            modes: vec![mode.clone(), mode],
        };
        assert!(matches!(field_from_json(&doc), Err(Error::Json { .. })));
    }

    #[test]
    fn covering_loads_and_closes() {
        let doc = CoveringSpecJson {
            n: 1,
            generators: vec![CoveringGeneratorJson {
                flip: true,
                a: vec![vec![1]],
                c: vec![0.5],
            }],
        };
        let spec = covering_from_json(&doc).unwrap();
        assert_eq!(spec.order(), 2);
    }

    #[test]
    fn atomic_json_files_round_trip() {
        let dir = std::env::temp_dir().join(format!("slab-tomo-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.json");
        let f = FourierTensorField::random(1, 0, 2, 2, 5);
        save_field(&path, &f).unwrap();
        let back = load_field(&path).unwrap();
        assert_eq!(back, f);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn sinogram_csv_has_header_and_rows() {
        let f = FourierTensorField::random(2, 0, 1, 1, 9);
        let s = xray_sinogram(&f, &[0.3, -0.4], 4).unwrap();
        let dir = std::env::temp_dir().join(format!("slab-tomo-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sino.csv");
        write_sinogram_csv(&path, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "a_1,a_2,re,im");
        assert_eq!(lines.count(), 16);
        std::fs::remove_dir_all(&dir).ok();
    }
}
