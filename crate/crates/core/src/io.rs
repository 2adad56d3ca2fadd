//! Schema-versioned JSON files for bodies, densities and solve reports, CSV
//! homotopy traces, and density specifications.
//!
//! Every float is written with 17 significant digits, so reading a file back
//! reproduces the values bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::geometry::{build_grid, DirectionGrid, Resolution, SupportField};
use crate::measures::MeasureDensity;
use crate::solver::{AprioriReport, Branch, SolveReport, TracePoint};
use crate::verification::zonal;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

/// Pretty JSON with floats as `{:.16e}`.
struct ExactFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for ExactFormatter {
    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(value))
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json_string(value)?.as_bytes())
}

/// Parses a schema-versioned document, rejecting other versions before
/// looking at any other field.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::InvalidInput("missing or malformed schema_version".into()))?;
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(serde_json::from_value(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&fs::read_to_string(path)?)
}

fn grid_from(dim: usize, parts: &[usize]) -> Result<Arc<DirectionGrid>> {
    build_grid(dim, Resolution::from_slice(dim, parts)?)
}

fn check_len(grid: &DirectionGrid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    Ok(())
}

/// Support samples in grid node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFile {
    pub schema_version: u64,
    pub dim: usize,
    /// `[N]` on S¹, `[n_lat, n_lon]` on S².
    pub grid: Vec<usize>,
    pub p: f64,
    pub values: Vec<f64>,
}

impl BodyFile {
    pub fn from_field(h: &SupportField) -> Self {
        BodyFile {
            schema_version: SCHEMA_VERSION,
            dim: h.dim(),
            grid: h.grid().resolution().to_vec(),
            p: h.p(),
            values: h.values().to_vec(),
        }
    }

    pub fn to_field(&self) -> Result<SupportField> {
        let grid = grid_from(self.dim, &self.grid)?;
        check_len(&grid, &self.values)?;
        SupportField::new(grid, self.values.clone(), self.p)
    }
}

pub fn write_body(path: &Path, h: &SupportField) -> Result<()> {
    write_json(path, &BodyFile::from_field(h))
}

pub fn read_body(path: &Path) -> Result<SupportField> {
    read_json::<BodyFile>(path)?.to_field()
}

/// Density samples of a measure, with its total mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub schema_version: u64,
    pub dim: usize,
    pub grid: Vec<usize>,
    pub p: f64,
    pub values: Vec<f64>,
    pub total: f64,
}

impl DensityFile {
    pub fn new(d: &MeasureDensity, p: f64) -> Self {
        DensityFile {
            schema_version: SCHEMA_VERSION,
            dim: d.grid().dim(),
            grid: d.grid().resolution().to_vec(),
            p,
            values: d.values().to_vec(),
            total: d.l1_norm(),
        }
    }

    pub fn to_density(&self) -> Result<MeasureDensity> {
        let grid = grid_from(self.dim, &self.grid)?;
        check_len(&grid, &self.values)?;
        MeasureDensity::new(grid, self.values.clone())
    }
}

/// Serialized [`SolveReport`] with the solution inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReportFile {
    pub schema_version: u64,
    pub branch: Branch,
    pub gamma_n: f64,
    pub residual_sup: f64,
    pub newton_history: Vec<f64>,
    pub homotopy_trace: Vec<TracePoint>,
    pub apriori: AprioriReport,
    pub c0: Option<f64>,
    pub crossed_half: bool,
    pub solution: BodyFile,
}

impl From<&SolveReport> for SolveReportFile {
    fn from(r: &SolveReport) -> Self {
        SolveReportFile {
            schema_version: SCHEMA_VERSION,
            branch: r.branch,
            gamma_n: r.gamma_n,
            residual_sup: r.residual_sup,
            newton_history: r.newton_history.clone(),
            homotopy_trace: r.homotopy_trace.clone(),
            apriori: r.apriori.clone(),
            c0: r.c0,
            crossed_half: r.crossed_half,
            solution: BodyFile::from_field(&r.solution),
        }
    }
}

pub fn write_report(path: &Path, report: &SolveReport) -> Result<()> {
    write_json(path, &SolveReportFile::from(report))
}

pub const TRACE_HEADER: &str = "t,gamma_n,residual_sup";

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for tp in trace {
        out.push_str(&format!("{},{},{}\n", fmt_f64(tp.t), fmt_f64(tp.gamma_n), fmt_f64(tp.residual_sup)));
    }
    out
}

pub fn write_trace_csv(path: &Path, trace: &[TracePoint]) -> Result<()> {
    write_atomic(path, trace_csv(trace).as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityFamily {
    /// `c`.
    Constant,
    /// c(1 + Σ_k a_k cos 2kθ); θ is the polar angle on S¹ and the
    /// colatitude on S². Parameters `c`, `a1`, `a2`, …
    CosineEven,
    /// c(1 + Σ_k a_k Z_k) with Z_k = cos kθ on S¹ and the Legendre
    /// polynomial P_k(cos θ) on S², k even. Parameters `c`, `a2`, `a4`, …
    HarmonicEven,
}

/// Right-hand side of the equation: explicit samples or a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Samples {
        values: Vec<f64>,
    },
    Family {
        name: DensityFamily,
        params: BTreeMap<String, f64>,
    },
}

impl DensitySpec {
    pub fn constant(c: f64) -> Self {
        DensitySpec::Family {
            name: DensityFamily::Constant,
            params: BTreeMap::from([("c".to_string(), c)]),
        }
    }

    /// Parses `constant:0.04`, `cosine_even:c=0.04,a1=0.1`,
    /// `harmonic_even:c=0.04,a2=0.1`, or a path to a JSON spec.
    pub fn parse(s: &str) -> Result<Self> {
        let Some((name, rest)) = s.split_once(':') else {
            let text = fs::read_to_string(s)?;
            return Ok(serde_json::from_str(&text)?);
        };
        let family = match name {
            "constant" => DensityFamily::Constant,
            "cosine_even" => DensityFamily::CosineEven,
            "harmonic_even" => DensityFamily::HarmonicEven,
            _ => return Err(Error::InvalidInput(format!("unknown density family '{name}'"))),
        };
        let bad = |item: &str| Error::InvalidInput(format!("malformed density parameter '{item}'"));
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (key, value) = match item.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None if params.is_empty() => ("c", item),
                None => return Err(bad(item)),
            };
            let v: f64 = value.parse().map_err(|_| bad(item))?;
            params.insert(key.to_string(), v);
        }
        Ok(DensitySpec::Family { name: family, params })
    }

    /// Samples the density on `grid`; the result must be positive and even.
    pub fn to_density(&self, grid: &Arc<DirectionGrid>) -> Result<MeasureDensity> {
        let d = match self {
            DensitySpec::Samples { values } => {
                check_len(grid, values)?;
                MeasureDensity::new(grid.clone(), values.clone())?
            }
            DensitySpec::Family { name, params } => family_density(grid, *name, params)?,
        };
        if !d.is_even() {
            return Err(Error::InvalidInput("density is not even".into()));
        }
        Ok(d)
    }
}

fn family_density(
    grid: &Arc<DirectionGrid>,
    name: DensityFamily,
    params: &BTreeMap<String, f64>,
) -> Result<MeasureDensity> {
    let c = *params
        .get("c")
        .ok_or_else(|| Error::InvalidInput("density family needs parameter 'c'".into()))?;
    let mut terms = Vec::new();
    for (key, &a) in params.iter().filter(|(k, _)| k.as_str() != "c") {
        let k: usize = key
            .strip_prefix('a')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("unknown density parameter '{key}'")))?;
        let term = match name {
            DensityFamily::Constant => {
                return Err(Error::InvalidInput(format!("constant density takes only 'c', got '{key}'")));
            }
            DensityFamily::CosineEven if k >= 1 => (2 * k, 2),
            DensityFamily::HarmonicEven if k >= 2 && k % 2 == 0 => (k, grid.dim()),
            _ => return Err(Error::InvalidInput(format!("invalid degree in parameter '{key}'"))),
        };
        terms.push((term, a));
    }
    let axis = |u: &nalgebra::Vector3<f64>| if grid.dim() == 2 { u.x } else { u.z };
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|u| {
            let x = axis(u);
            c * (1.0 + terms.iter().map(|((k, kind), a)| a * zonal(*kind, *k, x)).sum::<f64>())
        })
        .collect();
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositive {
            what: "density",
            index: i,
            value: *v,
        });
    }
    MeasureDensity::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_all_digits() {
        let s = to_json_string(&vec![0.1, 1.0 / 3.0, -2.5e-300]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0, -2.5e-300]);
        assert!(s.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn shorthand_parsing() {
        assert_eq!(DensitySpec::parse("constant:0.04").unwrap(), DensitySpec::constant(0.04));
        let DensitySpec::Family { name, params } = DensitySpec::parse("cosine_even:c=0.04, a1=0.1").unwrap() else {
            panic!()
        };
        assert_eq!(name, DensityFamily::CosineEven);
        assert_eq!(params["a1"], 0.1);
        assert!(DensitySpec::parse("bogus:1").is_err());
        assert!(DensitySpec::parse("constant:c=x").is_err());
    }

    #[test]
    fn cosine_family_matches_formula() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        let d = DensitySpec::parse("cosine_even:c=0.04,a1=0.1,a2=-0.05")
            .unwrap()
            .to_density(&grid)
            .unwrap();
        for i in 0..grid.len() {
            let t = grid.theta(i);
            let want = 0.04 * (1.0 + 0.1 * (2.0 * t).cos() - 0.05 * (4.0 * t).cos());
            assert!((d.values()[i] - want).abs() < 1e-15);
        }
        assert!(d.is_even());
    }

    #[test]
    fn harmonic_family_on_sphere() {
        let grid = build_grid(3, Resolution::Sphere { n_lat: 8, n_lon: 16 }).unwrap();
        let d = DensitySpec::parse("harmonic_even:c=2,a2=0.5").unwrap().to_density(&grid).unwrap();
        for (u, v) in grid.nodes().iter().zip(d.values()) {
            assert!((v - 2.0 * (1.0 + 0.25 * (3.0 * u.z * u.z - 1.0))).abs() < 1e-14);
        }
        assert!(DensitySpec::parse("harmonic_even:c=2,a3=0.5").unwrap().to_density(&grid).is_err());
    }

    #[test]
    fn nonpositive_family_rejected() {
        let grid = build_grid(2, Resolution::Circle { n: 16 }).unwrap();
        let spec = DensitySpec::parse("cosine_even:c=1,a1=2").unwrap();
        assert!(matches!(spec.to_density(&grid), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn schema_version_is_checked_first() {
        let err = from_json_str::<BodyFile>(r#"{"schema_version": 2, "whatever": true}"#).unwrap_err();
        assert!(matches!(err, Error::SchemaVersion { found: 2, expected: 1 }));
    }
}
