//! Instance files, certificates and reports as canonical JSON.
//!
//! Canonical form: object keys sorted, two-space indentation, every float
//! printed as `{:.16e}` (17 significant digits, exact round trip), trailing
//! newline. Complex numbers are `[re, im]` pairs and matrices are
//! `{rows, cols, data}` with `data` in row-major order. Tensor product
//! carriers list the composable basis pairs `(a, b)` in lexicographic order,
//! which is plain Kronecker order for representations.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::algebra::{ActionModule, AlgebraIso, AlgebraObject};
use crate::category::{Backend, Category, Obj};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{self, Matrix, Tolerance};
use crate::unitarize::{Method, Residuals, SummandTrace, UnitarizationCertificate};

pub const FORMAT_VERSION: u32 = 1;

struct CanonicalFormatter(PrettyFormatter<'static>);

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Canonical JSON text for any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // Going through `Value` sorts every object's keys.
    let value = serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))?;
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Internal(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Internal(e.to_string()))
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Parses JSON text, reporting syntax and schema errors by line and column.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        parse_error(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|err| match err {
        Error::Parse { location, message } => {
            parse_error(format!("{}: {location}", path.display()), message)
        }
        other => other,
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = to_canonical_json(value)?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

// ----- schema -----

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `[re, im]` entries.
    pub data: Vec<[f64; 2]>,
}

impl MatrixSpec {
    pub fn from_matrix(m: &Matrix) -> MatrixSpec {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                data.push([v.re, v.im]);
            }
        }
        MatrixSpec {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self, location: &str) -> Result<Matrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(parse_error(
                location,
                format!(
                    "{} entries given for a {}x{} matrix",
                    self.data.len(),
                    self.rows,
                    self.cols
                ),
            ));
        }
        if self.data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(parse_error(location, "non-finite entry"));
        }
        let entries: Vec<_> = self.data.iter().map(|[re, im]| linalg::c(*re, *im)).collect();
        Ok(linalg::from_row_major(self.rows, self.cols, &entries))
    }

    /// Like [`to_matrix`](Self::to_matrix) with a required shape.
    pub fn to_shaped(&self, location: &str, rows: usize, cols: usize) -> Result<Matrix> {
        if (self.rows, self.cols) != (rows, cols) {
            return Err(parse_error(
                location,
                format!(
                    "expected a {rows}x{cols} matrix, found {}x{}",
                    self.rows, self.cols
                ),
            ));
        }
        self.to_matrix(location)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    GridHilb { n: usize },
    RepG { identity: usize, table: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectSpec {
    /// GridHilb: one `[i, j]` cell per basis vector.
    Labels { labels: Vec<[usize; 2]> },
    /// RepG: one unitary matrix per group element, in table order.
    Matrices { matrices: Vec<MatrixSpec> },
    /// RepG: trivial action on `C^dim`.
    Trivial { dim: usize },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub object: String,
    pub mult: MatrixSpec,
    pub unit: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub object: String,
    pub algebra: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub provenance: String,
    /// Ground-truth labels (`separable`, `connected`, `special`, ...).
    #[serde(default)]
    pub labels: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format_version: u32,
    pub backend: BackendSpec,
    #[serde(default)]
    pub objects: BTreeMap<String, ObjectSpec>,
    #[serde(default)]
    pub algebras: BTreeMap<String, AlgebraSpec>,
    #[serde(default)]
    pub modules: BTreeMap<String, ModuleSpec>,
    #[serde(default)]
    pub metadata: Metadata,
}

/// A module read from a file, with the name of its algebra.
#[derive(Debug, Clone)]
pub struct NamedModule {
    pub algebra: String,
    pub module: ActionModule,
}

/// An instance file resolved against its category.
#[derive(Debug, Clone)]
pub struct Instance {
    pub category: Category,
    pub objects: BTreeMap<String, Obj>,
    pub algebras: BTreeMap<String, AlgebraObject>,
    pub modules: BTreeMap<String, NamedModule>,
    pub metadata: Metadata,
}

impl BackendSpec {
    pub fn from_category(cat: &Category) -> BackendSpec {
        match cat.backend() {
            Backend::GridHilb { n } => BackendSpec::GridHilb { n: *n },
            Backend::RepG { group } => BackendSpec::RepG {
                identity: group.identity(),
                table: group.table().to_vec(),
            },
        }
    }

    pub fn category(&self, tol: Tolerance) -> Result<Category> {
        let cat = match self {
            BackendSpec::GridHilb { n } => Category::grid_hilb(*n)
                .map_err(|e| parse_error("backend.n", e.to_string()))?,
            BackendSpec::RepG { identity, table } => {
                let group = FiniteGroup::new(table.clone(), *identity)
                    .map_err(|e| parse_error("backend.table", e.to_string()))?;
                Category::rep_g(group)
            }
        };
        cat.with_tolerance(tol)
    }
}

impl ObjectSpec {
    pub fn from_object(x: &Obj) -> ObjectSpec {
        match x.rep_matrices() {
            None => ObjectSpec::Labels {
                labels: x.labels().into_iter().map(|(i, j)| [i, j]).collect(),
            },
            Some(_) if x.has_trivial_action() => ObjectSpec::Trivial { dim: x.dim() },
            Some(mats) => ObjectSpec::Matrices {
                matrices: mats.iter().map(MatrixSpec::from_matrix).collect(),
            },
        }
    }

    pub fn build(&self, cat: &Category, location: &str) -> Result<Obj> {
        let wrap = |e: Error| parse_error(location, e.to_string());
        match (self, cat.backend()) {
            (ObjectSpec::Labels { labels }, Backend::GridHilb { .. }) => cat
                .grid_object_from_labels(labels.iter().map(|&[i, j]| (i, j)).collect())
                .map_err(wrap),
            (ObjectSpec::Matrices { matrices }, Backend::RepG { .. }) => {
                let mats = matrices
                    .iter()
                    .enumerate()
                    .map(|(g, m)| m.to_matrix(&format!("{location}.matrices[{g}]")))
                    .collect::<Result<Vec<_>>>()?;
                cat.rep_object(mats).map_err(wrap)
            }
            (ObjectSpec::Trivial { dim }, Backend::RepG { .. }) => cat.trivial_rep(*dim).map_err(wrap),
            _ => Err(parse_error(location, "object kind does not match the backend")),
        }
    }
}

impl InstanceFile {
    pub fn new(cat: &Category) -> InstanceFile {
        InstanceFile {
            format_version: FORMAT_VERSION,
            backend: BackendSpec::from_category(cat),
            objects: BTreeMap::new(),
            algebras: BTreeMap::new(),
            modules: BTreeMap::new(),
            metadata: Metadata::default(),
        }
    }

    pub fn insert_object(&mut self, name: &str, x: &Obj) {
        self.objects.insert(name.to_string(), ObjectSpec::from_object(x));
    }

    /// Adds an algebra and its carrier (under the same name).
    pub fn insert_algebra(&mut self, name: &str, a: &AlgebraObject) {
        self.insert_object(name, &a.carrier);
        self.algebras.insert(
            name.to_string(),
            AlgebraSpec {
                object: name.to_string(),
                mult: MatrixSpec::from_matrix(&a.mult.matrix()),
                unit: MatrixSpec::from_matrix(&a.unit.matrix()),
            },
        );
    }

    /// Adds a module over a previously inserted algebra, with its carrier
    /// under the same name.
    pub fn insert_module(&mut self, name: &str, algebra: &str, m: &ActionModule) {
        self.insert_object(name, &m.carrier);
        self.modules.insert(
            name.to_string(),
            ModuleSpec {
                object: name.to_string(),
                algebra: algebra.to_string(),
                left: m.left.as_ref().map(|l| MatrixSpec::from_matrix(&l.matrix())),
                right: m.right.as_ref().map(|r| MatrixSpec::from_matrix(&r.matrix())),
            },
        );
    }

    /// Resolves names, checks every shape and the morphism law of every map.
    pub fn build(&self, tol: Tolerance) -> Result<Instance> {
        if self.format_version != FORMAT_VERSION {
            return Err(parse_error(
                "format_version",
                format!("unsupported version {}, expected {FORMAT_VERSION}", self.format_version),
            ));
        }
        let cat = self.backend.category(tol)?;
        let mut objects = BTreeMap::new();
        for (name, spec) in &self.objects {
            objects.insert(name.clone(), spec.build(&cat, &format!("objects.{name}"))?);
        }
        let lookup = |name: &str, location: &str| -> Result<Obj> {
            objects
                .get(name)
                .cloned()
                .ok_or_else(|| parse_error(location, format!("unknown object `{name}`")))
        };
        let morphism = |src: &Obj, tgt: &Obj, spec: &MatrixSpec, location: &str| {
            let m = spec.to_shaped(location, tgt.dim(), src.dim())?;
            cat.mor(src, tgt, m).map_err(|e| parse_error(location, e.to_string()))
        };
        let unit_obj = cat.unit();
        let mut algebras = BTreeMap::new();
        for (name, spec) in &self.algebras {
            let loc = format!("algebras.{name}");
            let x = lookup(&spec.object, &format!("{loc}.object"))?;
            let xx = cat.tensor_obj(&x, &x)?;
            let mult = morphism(&xx, &x, &spec.mult, &format!("{loc}.mult"))?;
            let unit = morphism(&unit_obj, &x, &spec.unit, &format!("{loc}.unit"))?;
            let a = AlgebraObject::new(&cat, x, mult, unit).map_err(|e| parse_error(&loc, e.to_string()))?;
            algebras.insert(name.clone(), a);
        }
        let mut modules = BTreeMap::new();
        for (name, spec) in &self.modules {
            let loc = format!("modules.{name}");
            let x = lookup(&spec.object, &format!("{loc}.object"))?;
            let a = algebras.get(&spec.algebra).ok_or_else(|| {
                parse_error(format!("{loc}.algebra"), format!("unknown algebra `{}`", spec.algebra))
            })?;
            let left = match &spec.left {
                Some(l) => {
                    let src = cat.tensor_obj(&a.carrier, &x)?;
                    Some(morphism(&src, &x, l, &format!("{loc}.left"))?)
                }
                None => None,
            };
            let right = match &spec.right {
                Some(r) => {
                    let src = cat.tensor_obj(&x, &a.carrier)?;
                    Some(morphism(&src, &x, r, &format!("{loc}.right"))?)
                }
                None => None,
            };
            if left.is_none() && right.is_none() {
                return Err(parse_error(loc, "module has neither a left nor a right action"));
            }
            modules.insert(
                name.clone(),
                NamedModule {
                    algebra: spec.algebra.clone(),
                    module: ActionModule {
                        carrier: x,
                        left,
                        right,
                    },
                },
            );
        }
        Ok(Instance {
            category: cat,
            objects,
            algebras,
            modules,
            metadata: self.metadata.clone(),
        })
    }
}

pub fn load(path: &Path) -> Result<InstanceFile> {
    read_json(path)
}

pub fn save(x: &InstanceFile, path: &Path) -> Result<()> {
    write_json(x, path)
}

// ----- certificates -----

/// Serialized form of a [`UnitarizationCertificate`]; the carrier is the
/// carrier of the named input algebra.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub format_version: u32,
    pub input_algebra: String,
    pub input_hash: String,
    pub mult: MatrixSpec,
    pub unit: MatrixSpec,
    pub iso: MatrixSpec,
    pub iso_inverse: MatrixSpec,
    pub residuals: Residuals,
    pub method: Method,
    pub summands: Vec<SummandTrace>,
    pub tolerance: Tolerance,
}

impl CertificateFile {
    pub fn new(input_algebra: &str, cert: &UnitarizationCertificate, tol: Tolerance) -> Self {
        CertificateFile {
            format_version: FORMAT_VERSION,
            input_algebra: input_algebra.to_string(),
            input_hash: cert.input_hash.clone(),
            mult: MatrixSpec::from_matrix(&cert.algebra.mult.matrix()),
            unit: MatrixSpec::from_matrix(&cert.algebra.unit.matrix()),
            iso: MatrixSpec::from_matrix(&cert.iso.map.matrix()),
            iso_inverse: MatrixSpec::from_matrix(&cert.iso.inverse.matrix()),
            residuals: cert.residuals,
            method: cert.method,
            summands: cert.summands.clone(),
            tolerance: tol,
        }
    }

    /// Rebuilds the certificate on the carrier of `a`.
    pub fn certificate(&self, cat: &Category, a: &AlgebraObject) -> Result<UnitarizationCertificate> {
        let x = &a.carrier;
        let xx = cat.tensor_obj(x, x)?;
        let unit_obj = cat.unit();
        let build = |src: &Obj, tgt: &Obj, spec: &MatrixSpec, field: &str| {
            let m = spec.to_shaped(field, tgt.dim(), src.dim())?;
            cat.mor(src, tgt, m).map_err(|e| parse_error(field, e.to_string()))
        };
        let mult = build(&xx, x, &self.mult, "mult")?;
        let unit = build(&unit_obj, x, &self.unit, "unit")?;
        let algebra = AlgebraObject::new(cat, x.clone(), mult, unit)?;
        Ok(UnitarizationCertificate {
            input_hash: self.input_hash.clone(),
            algebra,
            iso: AlgebraIso {
                map: build(x, x, &self.iso, "iso")?,
                inverse: build(x, x, &self.iso_inverse, "iso_inverse")?,
            },
            residuals: self.residuals,
            method: self.method,
            summands: self.summands.clone(),
        })
    }
}

#[cfg(test)]
mod tests;
