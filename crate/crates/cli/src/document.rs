use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use spectral_witness::linalg::{c, CMatrix, CVector};
use spectral_witness::maps::HermPreservingMap;
use spectral_witness::{BipartiteDims, Normalization, PureVector, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Vector,
    Matrix,
    Observable,
    Subspace,
    Map,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Vector => "vector",
            Kind::Matrix => "matrix",
            Kind::Observable => "observable",
            Kind::Subspace => "subspace",
            Kind::Map => "map",
        };
        f.write_str(s)
    }
}

/// JSON exchange format. Complex entries are `[re, im]` pairs, matrices are
/// row-major arrays of rows.
///
/// | kind         | `data`                                          |
/// |--------------|-------------------------------------------------|
/// | `vector`     | `d1*d2` entries, index `i*d2 + j`               |
/// | `matrix`     | `d1` rows of `d2` entries (coordinate matrix)   |
/// | `observable` | `d1*d2` rows of `d1*d2` entries                 |
/// | `subspace`   | list of spanning vectors, each `d1*d2` entries  |
/// | `map`        | `[plus, minus]`, each a list of `d2 x d1` Kraus operators |
///
/// A map's `meta.normalization` is `"paper"` (default) or `"unit"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub dims: [usize; 2],
    pub kind: Kind,
    pub data: Value,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentError(pub String);

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DocumentError {}

fn err<T>(msg: impl Into<String>) -> Result<T, DocumentError> {
    Err(DocumentError(msg.into()))
}

fn entry(v: &Value, at: &str) -> Result<spectral_witness::linalg::C64, DocumentError> {
    let pair = v.as_array().filter(|a| a.len() == 2);
    let Some(pair) = pair else {
        return err(format!("{at}: expected a [re, im] pair"));
    };
    match (pair[0].as_f64(), pair[1].as_f64()) {
        (Some(re), Some(im)) if re.is_finite() && im.is_finite() => Ok(c(re, im)),
        _ => err(format!("{at}: entries must be finite numbers")),
    }
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, DocumentError> {
    v.as_array().ok_or_else(|| DocumentError(format!("{at}: expected an array")))
}

fn parse_vector(v: &Value, len: usize, at: &str) -> Result<CVector, DocumentError> {
    let items = array(v, at)?;
    if items.len() != len {
        return err(format!("{at}: has {} entries, expected d1*d2 = {len}", items.len()));
    }
    let mut out = CVector::zeros(len);
    for (i, x) in items.iter().enumerate() {
        out[i] = entry(x, &format!("{at}[{i}]"))?;
    }
    Ok(out)
}

fn parse_matrix(v: &Value, rows: usize, cols: usize, at: &str) -> Result<CMatrix, DocumentError> {
    let items = array(v, at)?;
    if items.len() != rows {
        return err(format!("{at}: has {} rows, expected {rows}", items.len()));
    }
    let mut out = CMatrix::zeros(rows, cols);
    for (i, row) in items.iter().enumerate() {
        let row = array(row, &format!("{at}[{i}]"))?;
        if row.len() != cols {
            return err(format!("{at}[{i}]: has {} entries, expected {cols}", row.len()));
        }
        for (j, x) in row.iter().enumerate() {
            out[(i, j)] = entry(x, &format!("{at}[{i}][{j}]"))?;
        }
    }
    Ok(out)
}

fn emit_entry(z: &spectral_witness::linalg::C64) -> Value {
    Value::from(vec![z.re, z.im])
}

fn emit_vector(v: &CVector) -> Value {
    Value::Array(v.iter().map(emit_entry).collect())
}

fn emit_matrix(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array(m.row(i).iter().map(emit_entry).collect())).collect())
}

impl MatrixDocument {
    /// Parses and validates shape, finiteness and dimensions.
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let doc: MatrixDocument =
            serde_json::from_str(text).map_err(|e| DocumentError(format!("malformed document: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn bipartite_dims(&self) -> Result<BipartiteDims, DocumentError> {
        BipartiteDims::new(self.dims[0], self.dims[1]).map_err(|e| DocumentError(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), DocumentError> {
        let d = self.bipartite_dims()?;
        match self.kind {
            Kind::Vector => self.vector_coords(d).map(|_| ()),
            Kind::Matrix => parse_matrix(&self.data, d.d1(), d.d2(), "data").map(|_| ()),
            Kind::Observable => parse_matrix(&self.data, d.total(), d.total(), "data").map(|_| ()),
            Kind::Subspace => self.subspace_columns(d).map(|_| ()),
            Kind::Map => self.kraus(d).map(|_| ()),
        }
    }

    fn expect_kind(&self, allowed: &[Kind]) -> Result<BipartiteDims, DocumentError> {
        if !allowed.contains(&self.kind) {
            let names: Vec<String> = allowed.iter().map(|k| k.to_string()).collect();
            return err(format!("expected a {} document, got {}", names.join(" or "), self.kind));
        }
        self.bipartite_dims()
    }

    fn vector_coords(&self, d: BipartiteDims) -> Result<CVector, DocumentError> {
        parse_vector(&self.data, d.total(), "data")
    }

    fn subspace_columns(&self, d: BipartiteDims) -> Result<Vec<CVector>, DocumentError> {
        let items = array(&self.data, "data")?;
        if items.is_empty() {
            return err("data: a subspace needs at least one vector");
        }
        items.iter().enumerate().map(|(i, v)| parse_vector(v, d.total(), &format!("data[{i}]"))).collect()
    }

    fn kraus(&self, d: BipartiteDims) -> Result<(Vec<CMatrix>, Vec<CMatrix>), DocumentError> {
        let parts = array(&self.data, "data")?;
        if parts.len() != 2 {
            return err("data: a map is [plus, minus]");
        }
        let side = |i: usize, name: &str| -> Result<Vec<CMatrix>, DocumentError> {
            array(&parts[i], name)?
                .iter()
                .enumerate()
                .map(|(j, m)| parse_matrix(m, d.d2(), d.d1(), &format!("{name}[{j}]")))
                .collect()
        };
        Ok((side(0, "data.plus")?, side(1, "data.minus")?))
    }

    /// A `vector` document, or a `matrix` document read as a coordinate matrix.
    pub fn to_vector(&self) -> Result<PureVector, DocumentError> {
        let d = self.expect_kind(&[Kind::Vector, Kind::Matrix])?;
        let coords = match self.kind {
            Kind::Vector => self.vector_coords(d)?,
            _ => {
                let m = parse_matrix(&self.data, d.d1(), d.d2(), "data")?;
                CVector::from_fn(d.total(), |idx, _| m[(idx / d.d2(), idx % d.d2())])
            }
        };
        PureVector::new(d, coords).map_err(|e| DocumentError(e.to_string()))
    }

    pub fn to_observable(&self) -> Result<(BipartiteDims, CMatrix), DocumentError> {
        let d = self.expect_kind(&[Kind::Observable])?;
        Ok((d, parse_matrix(&self.data, d.total(), d.total(), "data")?))
    }

    /// Span of the listed vectors; a single `vector` document spans a line.
    pub fn to_subspace(&self, tol: f64) -> Result<Subspace, DocumentError> {
        let d = self.expect_kind(&[Kind::Subspace, Kind::Vector])?;
        let cols = match self.kind {
            Kind::Vector => vec![self.vector_coords(d)?],
            _ => self.subspace_columns(d)?,
        };
        let vectors = cols
            .into_iter()
            .map(|v| PureVector::new(d, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| DocumentError(e.to_string()))?;
        let s = Subspace::span(d, &vectors, tol).map_err(|e| DocumentError(e.to_string()))?;
        if s.is_empty() {
            return err("data: the listed vectors span the zero subspace");
        }
        Ok(s)
    }

    pub fn to_map(&self) -> Result<HermPreservingMap, DocumentError> {
        let d = self.expect_kind(&[Kind::Map])?;
        let normalization = match self.meta.get("normalization").map(String::as_str) {
            None | Some("paper") => Normalization::Paper,
            Some("unit") => Normalization::Unit,
            Some(other) => return err(format!("meta.normalization: unknown value {other:?}")),
        };
        let (plus, minus) = self.kraus(d)?;
        HermPreservingMap::new(d.d1(), d.d2(), plus, minus, normalization).map_err(|e| DocumentError(e.to_string()))
    }

    pub fn from_vector(psi: &PureVector) -> Self {
        let d = psi.dims();
        Self::new(d, Kind::Vector, emit_vector(psi.coords()))
    }

    pub fn from_observable(dims: BipartiteDims, w: &CMatrix) -> Self {
        Self::new(dims, Kind::Observable, emit_matrix(w))
    }

    pub fn from_subspace(v: &Subspace) -> Self {
        let cols = v.vectors().iter().map(|p| emit_vector(p.coords())).collect();
        Self::new(v.dims(), Kind::Subspace, Value::Array(cols))
    }

    pub fn from_map(map: &HermPreservingMap) -> Self {
        let side = |ops: &[CMatrix]| Value::Array(ops.iter().map(emit_matrix).collect());
        let mut doc = Self::new(
            map.dims(),
            Kind::Map,
            Value::Array(vec![side(&map.kraus_plus), side(&map.kraus_minus)]),
        );
        let norm = match map.normalization {
            Normalization::Paper => "paper",
            Normalization::Unit => "unit",
        };
        doc.meta.insert("normalization".into(), norm.into());
        doc
    }

    fn new(dims: BipartiteDims, kind: Kind, data: Value) -> Self {
        MatrixDocument { dims: [dims.d1(), dims.d2()], kind, data, meta: BTreeMap::new() }
    }
}
