//! Snapshot files, format version 1.
//!
//! ```text
//! mtcb-snapshot
//! version 1
//! p 64
//! ell 8e0
//! t 1e-1
//! alpha 1e0
//! beta 1e0
//! gamma 1e0
//! delta 1e0
//! count 128
//! <count lines, one coefficient each>
//! end
//! ```
//!
//! Floats are written in shortest round-trip exponent form, so reading back
//! is bit-exact. NaNs are written as `nan:0x<bits>` to keep sign and payload.
//! The trailing `end` line makes truncation detectable.

use std::io::{self, Write};
use std::path::Path;

use mtc_benjamin::{ModelParams, SpectralField};
use thiserror::Error;

use crate::{atomic_write, CliError};

const MAGIC: &str = "mtcb-snapshot";
pub const VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotError {
    #[error("unsupported snapshot version {0} (this build reads version 1)")]
    UnsupportedVersion(u32),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub p: usize,
    pub ell: f64,
    pub t: f64,
    pub params: ModelParams,
    pub coeffs: Vec<f64>,
}

impl Snapshot {
    pub fn new(field: &SpectralField, t: f64, params: ModelParams) -> Self {
        Self {
            p: field.len() / 2,
            ell: field.ell,
            t,
            params,
            coeffs: field.coeffs.clone(),
        }
    }

    pub fn field(&self) -> SpectralField {
        SpectralField::new(self.coeffs.clone(), self.ell)
    }

    /// Bitwise equality, so that `NaN` and `-0.0` compare as stored.
    pub fn bit_eq(&self, other: &Self) -> bool {
        let bits = |s: &Self| {
            let head = [s.ell, s.t, s.params.alpha, s.params.beta, s.params.gamma, s.params.delta];
            head.iter().chain(&s.coeffs).map(|x| x.to_bits()).collect::<Vec<_>>()
        };
        self.p == other.p && bits(self) == bits(other)
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "version {VERSION}")?;
        writeln!(w, "p {}", self.p)?;
        writeln!(w, "ell {}", Num(self.ell))?;
        writeln!(w, "t {}", Num(self.t))?;
        writeln!(w, "alpha {}", Num(self.params.alpha))?;
        writeln!(w, "beta {}", Num(self.params.beta))?;
        writeln!(w, "gamma {}", Num(self.params.gamma))?;
        writeln!(w, "delta {}", Num(self.params.delta))?;
        writeln!(w, "count {}", self.coeffs.len())?;
        for c in &self.coeffs {
            writeln!(w, "{}", Num(*c))?;
        }
        writeln!(w, "end")
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| SnapshotError::Parse {
                line: text.lines().count() + 1,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let (line, magic) = next("header")?;
        if magic != MAGIC {
            return Err(SnapshotError::Parse {
                line,
                message: format!("expected `{MAGIC}`"),
            });
        }
        let version: u32 = field(next("version")?, "version")?;
        if version != VERSION {
            return Err(SnapshotError::UnsupportedVersion(version));
        }
        let p: usize = field(next("p")?, "p")?;
        let ell = field::<Num>(next("ell")?, "ell")?.0;
        let t = field::<Num>(next("t")?, "t")?.0;
        let alpha = field::<Num>(next("alpha")?, "alpha")?.0;
        let beta = field::<Num>(next("beta")?, "beta")?.0;
        let gamma = field::<Num>(next("gamma")?, "gamma")?.0;
        let delta = field::<Num>(next("delta")?, "delta")?.0;
        let (count_line, count_text) = next("count")?;
        let count: usize = field((count_line, count_text), "count")?;
        if count != 2 * p {
            return Err(SnapshotError::Parse {
                line: count_line,
                message: format!("count {count} does not equal 2p = {}", 2 * p),
            });
        }
        let mut coeffs = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, s) = next("coefficient")?;
            coeffs.push(s.parse::<Num>().map(|n| n.0).map_err(|e| SnapshotError::Parse {
                line,
                message: format!("bad coefficient `{s}`: {e}"),
            })?);
        }
        let (line, end) = next("`end`")?;
        if end != "end" {
            return Err(SnapshotError::Parse {
                line,
                message: "expected `end` after the coefficients".into(),
            });
        }
        if let Ok((line, _)) = next("nothing") {
            return Err(SnapshotError::Parse {
                line,
                message: "trailing data after `end`".into(),
            });
        }
        Ok(Self {
            p,
            ell,
            t,
            params: ModelParams::new(alpha, beta, gamma, delta),
            coeffs,
        })
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        atomic_write(path, |w| self.write_to(w))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|source| CliError::Snapshot {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// An `f64` in snapshot text form.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_nan() {
            write!(f, "nan:{:#018x}", self.0.to_bits())
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

impl std::str::FromStr for Num {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(hex) = s.strip_prefix("nan:0x") {
            let bits = u64::from_str_radix(hex, 16).map_err(|e| e.to_string())?;
            let x = f64::from_bits(bits);
            return if x.is_nan() { Ok(Num(x)) } else { Err(format!("{s} is not a NaN")) };
        }
        match s.parse::<f64>() {
            Ok(x) if !x.is_nan() => Ok(Num(x)),
            Ok(_) => Err("NaN must be written as nan:0x<bits>".into()),
            Err(e) => Err(e.to_string()),
        }
    }
}

fn field<T: std::str::FromStr>((line, text): (usize, &str), key: &str) -> Result<T, SnapshotError>
where
    T::Err: std::fmt::Display,
{
    let value = text
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| SnapshotError::Parse {
            line,
            message: format!("expected `{key} <value>`"),
        })?;
    value.parse().map_err(|e| SnapshotError::Parse {
        line,
        message: format!("bad {key} `{value}`: {e}"),
    })
}
