//! Text and JSON formats: complex scalars and vectors on the command line,
//! surface models and summand configurations on disk.
//!
//! Complex numbers are written `[re, im]` in JSON. On the command line both
//! `re+imi` and `re,im` are accepted.

use std::fmt;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use theta_summa_core::jacobian::{
    make_hyperelliptic2_with, make_torus, Sheet, SurfaceKind, SurfaceModel, SurfacePoint, DEFAULT_NODES,
};
use theta_summa_core::linalg::CMatrix;
use theta_summa_core::riemann::{Characteristic, PeriodMatrix};
use theta_summa_core::summation::SummandConfig;
use theta_summa_core::Complex64;

pub const SCHEMA: &str = "1";

/// Stored and rebuilt period matrices must agree to this.
const REBUILD_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum FormatError {
    Parse(String),
    Io(PathBuf, std::io::Error),
    Json(String),
    Model(String),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Parse(m) => write!(f, "parse error: {m}"),
            FormatError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            FormatError::Json(m) => write!(f, "invalid JSON document: {m}"),
            FormatError::Model(m) => write!(f, "model error: {m}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<theta_summa_core::Error> for FormatError {
    fn from(e: theta_summa_core::Error) -> Self {
        FormatError::Model(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| FormatError::Parse(format!("not a number: {s:?}")))
}

/// Parses `re,im`, `re+imi`, `re-imi`, `imi`, `i` or a plain real.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(FormatError::Parse("empty complex number".into()));
    }
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(parse_f64(&t)?, 0.0));
    };
    // The split is the last sign that is neither leading nor an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_f64(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => parse_f64(x)?,
    };
    Ok(Complex64::new(re, im))
}

/// Complex vector: entries separated by `;`, or by `,` when no `;` is present
/// (entries then use the `re+imi` form).
pub fn parse_vector(s: &str) -> Result<Vec<Complex64>> {
    let sep = if s.contains(';') { ';' } else { ',' };
    s.split(sep).map(parse_complex).collect()
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

/// Rational entries such as `1/2,0`.
pub fn parse_ratios(s: &str) -> Result<Vec<Ratio<i64>>> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            let parse = |v: &str| v.parse::<i64>().map_err(|_| FormatError::Parse(format!("not a rational: {x:?}")));
            match x.split_once('/') {
                Some((n, d)) => {
                    let d = parse(d)?;
                    if d == 0 {
                        return Err(FormatError::Parse(format!("zero denominator in {x:?}")));
                    }
                    Ok(Ratio::new(parse(n)?, d))
                }
                None => Ok(Ratio::from_integer(parse(x)?)),
            }
        })
        .collect()
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(pair).collect()
}

fn ratio_string(r: &Ratio<i64>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicDoc {
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
}

impl CharacteristicDoc {
    pub fn from_char(ch: &Characteristic) -> Self {
        CharacteristicDoc {
            alpha: ch.alpha.iter().map(ratio_string).collect(),
            beta: ch.beta.iter().map(ratio_string).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificatesDoc {
    pub symmetry_defect: f64,
    pub im_lambda_min: f64,
    pub a_normalization_defect: f64,
    pub quadrature_change: f64,
    pub nodes: usize,
    pub orientation_flipped: bool,
}

/// On-disk surface model. `omega` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub schema: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_points: Option<[f64; 6]>,
    /// Starting node count of the period quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_nodes: Option<usize>,
    pub genus: usize,
    #[serde(rename = "Omega")]
    pub omega: Vec<[f64; 2]>,
    pub odd_characteristic: CharacteristicDoc,
    pub certificates: CertificatesDoc,
}

impl ModelDoc {
    pub fn from_model(model: &SurfaceModel, quadrature_nodes: usize) -> Self {
        let (kind, tau, branch_points, nodes) = match model.kind() {
            SurfaceKind::Torus { tau } => ("torus", Some(pair(*tau)), None, None),
            SurfaceKind::Hyperelliptic2 { branch_points } => {
                ("hyperelliptic2", None, Some(*branch_points), Some(quadrature_nodes))
            }
        };
        let c = model.certificates();
        ModelDoc {
            schema: SCHEMA.into(),
            kind: kind.into(),
            tau,
            branch_points,
            quadrature_nodes: nodes,
            genus: model.genus(),
            omega: pairs(model.period_matrix().omega().as_slice()),
            odd_characteristic: CharacteristicDoc::from_char(&model.bracket().ch),
            certificates: CertificatesDoc {
                symmetry_defect: c.symmetry_defect,
                im_lambda_min: c.im_lambda_min,
                a_normalization_defect: c.a_normalization_defect,
                quadrature_change: c.quadrature_change,
                nodes: c.nodes,
                orientation_flipped: c.orientation_flipped,
            },
        }
    }

    /// Rebuilds the model from its parameters and checks the stored `Omega`.
    pub fn to_model(&self) -> Result<SurfaceModel> {
        let model = match self.kind.as_str() {
            "torus" => {
                let tau = self.tau.ok_or_else(|| FormatError::Json("torus model without tau".into()))?;
                make_torus(unpair(tau))?
            }
            "hyperelliptic2" => {
                let e = self
                    .branch_points
                    .ok_or_else(|| FormatError::Json("hyperelliptic2 model without branch_points".into()))?;
                make_hyperelliptic2_with(e, self.quadrature_nodes.unwrap_or(DEFAULT_NODES))?
            }
            k => return Err(FormatError::Json(format!("unknown model kind {k:?}"))),
        };
        let stored = self.period_matrix()?;
        let diff = stored
            .omega()
            .as_slice()
            .iter()
            .zip(model.period_matrix().omega().as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if stored.g() != model.genus() || diff > REBUILD_TOL {
            return Err(FormatError::Model(format!("stored Omega differs from the rebuilt one by {diff:e}")));
        }
        Ok(model)
    }

    pub fn period_matrix(&self) -> Result<PeriodMatrix> {
        period_matrix_from_pairs(&self.omega)
    }
}

pub fn period_matrix_from_pairs(omega: &[[f64; 2]]) -> Result<PeriodMatrix> {
    let m = CMatrix::from_row_major(omega.iter().copied().map(unpair).collect())?;
    Ok(PeriodMatrix::new(m)?)
}

/// Anything carrying an `Omega` field, such as a model file.
#[derive(Debug, Clone, Deserialize)]
pub struct OmegaDoc {
    #[serde(rename = "Omega")]
    pub omega: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SheetDoc {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// A surface point: `{"w": [re, im]}` on the torus, `{"x": [re, im], "sheet": "+"}`
/// on the hyperelliptic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointDoc {
    Torus { w: [f64; 2] },
    Hyperelliptic { x: [f64; 2], sheet: SheetDoc },
}

impl From<&SurfacePoint> for PointDoc {
    fn from(p: &SurfacePoint) -> Self {
        match *p {
            SurfacePoint::Torus(w) => PointDoc::Torus { w: pair(w) },
            SurfacePoint::Hyperelliptic { x, sheet } => PointDoc::Hyperelliptic {
                x: pair(x),
                sheet: match sheet {
                    Sheet::Plus => SheetDoc::Plus,
                    Sheet::Minus => SheetDoc::Minus,
                },
            },
        }
    }
}

impl From<&PointDoc> for SurfacePoint {
    fn from(p: &PointDoc) -> Self {
        match *p {
            PointDoc::Torus { w } => SurfacePoint::Torus(unpair(w)),
            PointDoc::Hyperelliptic { x, sheet } => SurfacePoint::Hyperelliptic {
                x: unpair(x),
                sheet: match sheet {
                    SheetDoc::Plus => Sheet::Plus,
                    SheetDoc::Minus => Sheet::Minus,
                },
            },
        }
    }
}

/// Model given inline or as a path to a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Inline(Box<ModelDoc>),
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummandDoc {
    pub schema: String,
    pub model: ModelRef,
    pub n: usize,
    pub z: Vec<Vec<[f64; 2]>>,
    pub a: Vec<PointDoc>,
    pub b: Vec<PointDoc>,
    pub c: Vec<PointDoc>,
    pub d: Vec<PointDoc>,
}

impl SummandDoc {
    pub fn new(model: ModelRef, cfg: &SummandConfig) -> Self {
        let pts = |v: &[SurfacePoint]| v.iter().map(PointDoc::from).collect();
        SummandDoc {
            schema: SCHEMA.into(),
            model,
            n: cfg.n(),
            z: cfg.z.iter().map(|z| pairs(z)).collect(),
            a: pts(&cfg.a),
            b: pts(&cfg.b),
            c: pts(&cfg.c),
            d: pts(&cfg.d),
        }
    }

    pub fn config(&self) -> Result<SummandConfig> {
        let pts = |v: &[PointDoc]| v.iter().map(SurfacePoint::from).collect();
        let cfg = SummandConfig {
            z: self.z.iter().map(|z| z.iter().copied().map(unpair).collect()).collect(),
            a: pts(&self.a),
            b: pts(&self.b),
            c: pts(&self.c),
            d: pts(&self.d),
        };
        if cfg.z.len() != self.n + 1 {
            return Err(FormatError::Json(format!("n = {} but {} z vectors", self.n, cfg.z.len())));
        }
        Ok(cfg)
    }

    /// Resolves the model; relative paths are taken from `base`.
    pub fn model_doc(&self, base: Option<&Path>) -> Result<ModelDoc> {
        match &self.model {
            ModelRef::Inline(doc) => Ok((**doc).clone()),
            ModelRef::Path(p) => {
                let path = match base {
                    Some(dir) if Path::new(p).is_relative() => dir.join(p),
                    _ => PathBuf::from(p),
                };
                read_json(&path)
            }
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| FormatError::Json(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| FormatError::Io(path.to_path_buf(), e))
}
