//! The two synthetic confounder models and the `x,y,z` CSV format.
//!
//! Both models draw, per sample, `a, b, c ~ U(0, sqrt 3)`,
//! `p, q ~ {-1, +1}` equiprobable and `v, w ~ N(0, 1)`, all independent:
//!
//! | model    | x                  | y                  | z       |
//! |----------|--------------------|--------------------|---------|
//! | `mplus`  | `sqrt(g) a p + v`  | `sqrt(g) a q + w`  | `a`     |
//! | `mminus` | `sqrt(g) b p + v`  | `sqrt(g) c q + w`  | `b - c` |
//!
//! `mplus` is marginally dependent but independent given `z`; `mminus` is
//! marginally independent but dependent given `z`. In both, `x`, `y` and `z`
//! are pairwise uncorrelated.
//!
//! Draw order per sample is fixed (`a, b, c, p, q, v, w`, normals by
//! Box-Muller from two uniforms), so a dataset of length `L` is a prefix of
//! the dataset of length `L + 1` under the same seed.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "mplus")]
    MPlus,
    #[serde(rename = "mminus")]
    MMinus,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::MPlus => "mplus",
            Model::MMinus => "mminus",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mplus" => Ok(Model::MPlus),
            "mminus" => Ok(Model::MMinus),
            other => Err(Error::Config(format!(
                "unknown model {other:?} (expected mplus or mminus)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub model: Model,
    /// Signal-to-noise ratio in decibels.
    pub gamma_db: f64,
    pub len: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.len < 2 {
            return Err(Error::Config(format!("L must be >= 2, got {}", self.len)));
        }
        if !self.gamma_db.is_finite() {
            return Err(Error::Config(format!("gamma_db must be finite, got {}", self.gamma_db)));
        }
        Ok(())
    }
}

pub fn db_to_linear(gamma_db: f64) -> f64 {
    10f64.powf(gamma_db / 10.0)
}

/// Three aligned sample arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != z.len() {
            return Err(Error::Shape(format!(
                "column lengths differ: x {}, y {}, z {}",
                x.len(),
                y.len(),
                z.len()
            )));
        }
        if let Some(bad) = x.iter().chain(&y).chain(&z).find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample {bad}")));
        }
        Ok(Dataset { x, y, z })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "x,y,z")?;
        for ((x, y), z) in self.x.iter().zip(&self.y).zip(&self.z) {
            writeln!(out, "{x:.16e},{y:.16e},{z:.16e}")?;
        }
        out.flush()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file).map_err(|e| Error::io(path, e))
    }

    /// Reads a CSV with (at least) the columns `x`, `y` and `z`, in any order.
    pub fn read_csv_from<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(|e| parse_err(e.to_string()))?.clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| parse_err(format!("missing column {name:?}")))
        };
        let idx = [column("x")?, column("y")?, column("z")?];
        let mut cols: [Vec<f64>; 3] = Default::default();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| parse_err(e.to_string()))?;
            for (col, &i) in cols.iter_mut().zip(&idx) {
                let field = record.get(i).unwrap_or("");
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(format!("row {}: bad number {field:?}", line + 2)))?;
                col.push(v);
            }
        }
        let [x, y, z] = cols;
        Dataset::new(x, y, z)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::read_csv_from(file, path)
    }
}

struct Draw {
    a: f64,
    b: f64,
    c: f64,
    p: f64,
    q: f64,
    v: f64,
    w: f64,
}

fn sign<R: RngCore>(rng: &mut R) -> f64 {
    if rng.next_u32() >> 31 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn draw<R: Rng>(rng: &mut R) -> Draw {
    let root3 = 3f64.sqrt();
    let a = root3 * rng.gen::<f64>();
    let b = root3 * rng.gen::<f64>();
    let c = root3 * rng.gen::<f64>();
    let p = sign(rng);
    let q = sign(rng);
    // 1 - U lies in (0, 1], keeping the logarithm finite.
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    let radius = (-2.0 * u1.ln()).sqrt();
    let (s, co) = (2.0 * PI * u2).sin_cos();
    Draw {
        a,
        b,
        c,
        p,
        q,
        v: radius * co,
        w: radius * s,
    }
}

pub fn generate(cfg: &ModelConfig, seed: u64) -> Result<Dataset> {
    cfg.validate()?;
    let gain = db_to_linear(cfg.gamma_db).sqrt();
    let mut rng = seed::rng(seed);
    let mut x = Vec::with_capacity(cfg.len);
    let mut y = Vec::with_capacity(cfg.len);
    let mut z = Vec::with_capacity(cfg.len);
    for _ in 0..cfg.len {
        let d = draw(&mut rng);
        match cfg.model {
            Model::MPlus => {
                x.push(gain * d.a * d.p + d.v);
                y.push(gain * d.a * d.q + d.w);
                z.push(d.a);
            }
            Model::MMinus => {
                x.push(gain * d.b * d.p + d.v);
                y.push(gain * d.c * d.q + d.w);
                z.push(d.b - d.c);
            }
        }
    }
    Ok(Dataset { x, y, z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(20.0) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ModelConfig {
            model: Model::MMinus,
            gamma_db: 10.0,
            len: 50,
        };
        assert_eq!(generate(&cfg, 3).unwrap(), generate(&cfg, 3).unwrap());
        assert_ne!(generate(&cfg, 3).unwrap(), generate(&cfg, 4).unwrap());
    }

    #[test]
    fn shorter_dataset_is_a_prefix() {
        let long = generate(&ModelConfig { model: Model::MPlus, gamma_db: 4.0, len: 30 }, 9).unwrap();
        let short = generate(&ModelConfig { model: Model::MPlus, gamma_db: 4.0, len: 12 }, 9).unwrap();
        assert_eq!(&long.x[..12], &short.x[..]);
        assert_eq!(&long.z[..12], &short.z[..]);
    }

    #[test]
    fn low_snr_is_pure_noise() {
        let cfg = ModelConfig {
            model: Model::MPlus,
            gamma_db: -300.0,
            len: 20_000,
        };
        let d = generate(&cfg, 1).unwrap();
        let n = d.len() as f64;
        let mean = d.x.iter().sum::<f64>() / n;
        let var = d.x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn config_validation() {
        let bad_len = ModelConfig { model: Model::MPlus, gamma_db: 0.0, len: 1 };
        assert!(matches!(generate(&bad_len, 0), Err(Error::Config(_))));
        let bad_gamma = ModelConfig { model: Model::MPlus, gamma_db: f64::NAN, len: 5 };
        assert!(generate(&bad_gamma, 0).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = generate(&ModelConfig { model: Model::MMinus, gamma_db: 7.0, len: 40 }, 11).unwrap();
        let mut buf = Vec::new();
        d.write_csv_to(&mut buf).unwrap();
        assert!(buf.starts_with(b"x,y,z\n"));
        let back = Dataset::read_csv_from(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn csv_rejects_bad_files() {
        let missing = Dataset::read_csv_from(&b"x,y\n1,2\n"[..], Path::new("mem"));
        assert!(matches!(missing, Err(Error::Parse { .. })));
        let garbage = Dataset::read_csv_from(&b"x,y,z\n1,oops,2\n"[..], Path::new("mem"));
        assert!(matches!(garbage, Err(Error::Parse { .. })));
        let reordered = Dataset::read_csv_from(&b"z,x,y\n3,1,2\n"[..], Path::new("mem")).unwrap();
        assert_eq!((reordered.x[0], reordered.y[0], reordered.z[0]), (1.0, 2.0, 3.0));
    }

    #[test]
    fn model_names() {
        assert_eq!("mplus".parse::<Model>().unwrap(), Model::MPlus);
        assert_eq!("mminus".parse::<Model>().unwrap(), Model::MMinus);
        assert!("m0".parse::<Model>().is_err());
    }
}
