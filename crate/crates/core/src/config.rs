//! Flat `key = value` parameter files.
//!
//! ```text
//! # comment
//! constants.units = mev_s
//! constants.lambda = 1.84e-12
//! medium.drive_re = 0.1
//! run.points = 201
//! ```
//!
//! Keys may carry a `constants.`, `medium.` or `run.` prefix. Bare keys are
//! matched against the constants and medium names, anything else is a run
//! key. With `units = mev_s` masses, Δm and λ are read in MeV and widths in
//! s⁻¹; medium values are always in internal units.

use std::collections::BTreeMap;
use std::path::Path;

use crate::constants::{KaonConstants, UnitSystem};
use crate::error::{KaonError, Result};
use crate::medium::MediumParams;
use crate::numkernel::Complex;

pub const CONSTANT_KEYS: [&str; 9] = [
    "units", "m_S", "m_L", "delta_m", "gamma_S", "gamma_L", "lambda", "eps_re", "eps_im",
];
pub const MEDIUM_KEYS: [&str; 9] = [
    "nu", "m_K", "f0_re", "f0_im", "f0bar_re", "f0bar_im", "drive_re", "drive_im", "dt",
];

/// Default regenerator traversal time, in τ_S.
pub const DEFAULT_SLAB_TIME: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    Natural,
    MevSeconds,
}

impl std::str::FromStr for Units {
    type Err = KaonError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Units::Natural),
            "mev_s" => Ok(Units::MevSeconds),
            other => Err(KaonError::InvalidParameter(format!(
                "units must be mev_s or natural (got {other:?})"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed parameter file; keys are stored fully qualified.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, Entry>,
}

fn canonical(list: &[&'static str], name: &str) -> Option<&'static str> {
    list.iter().copied().find(|k| k.eq_ignore_ascii_case(name))
}

/// Fully qualified form of a possibly bare key.
pub fn qualify(key: &str) -> Result<String> {
    let (section, name) = match key.split_once('.') {
        Some((s, n)) => (Some(s), n),
        None => (None, key),
    };
    if name.is_empty() {
        return Err(KaonError::InvalidParameter(format!(
            "empty key name in {key:?}"
        )));
    }
    match section {
        Some("constants") => canonical(&CONSTANT_KEYS, name)
            .map(|k| format!("constants.{k}"))
            .ok_or_else(|| KaonError::InvalidParameter(format!("unknown constants key {name:?}"))),
        Some("medium") => canonical(&MEDIUM_KEYS, name)
            .map(|k| format!("medium.{k}"))
            .ok_or_else(|| KaonError::InvalidParameter(format!("unknown medium key {name:?}"))),
        Some("run") => Ok(format!("run.{name}")),
        Some(other) => Err(KaonError::InvalidParameter(format!(
            "unknown section {other:?}"
        ))),
        None => Ok(if let Some(k) = canonical(&CONSTANT_KEYS, name) {
            format!("constants.{k}")
        } else if let Some(k) = canonical(&MEDIUM_KEYS, name) {
            format!("medium.{k}")
        } else {
            format!("run.{name}")
        }),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| KaonError::Parse {
                line,
                msg: format!("expected key = value, found {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(KaonError::Parse {
                    line,
                    msg: format!("missing value for {key:?}"),
                });
            }
            let full = qualify(key).map_err(|e| KaonError::Parse {
                line,
                msg: e.to_string(),
            })?;
            if let Some(prev) = cfg.entries.get(&full) {
                return Err(KaonError::Parse {
                    line,
                    msg: format!("{full} already set on line {}", prev.line),
                });
            }
            cfg.entries.insert(
                full,
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KaonError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets or replaces a value, e.g. from a command-line flag.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let full = qualify(key)?;
        self.entries.insert(
            full,
            Entry {
                value: value.into(),
                line: 0,
            },
        );
        Ok(())
    }

    pub fn remove(&mut self, key: &str) -> Result<()> {
        self.entries.remove(&qualify(key)?);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        let full = qualify(key).ok()?;
        self.entries.get(&full).map(|e| e.value.as_str())
    }

    /// Source line of a key read from a file.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        let full = qualify(key).ok()?;
        self.entries.get(&full).map(|e| e.line).filter(|&l| l > 0)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn error(&self, full: &str, msg: String) -> KaonError {
        match self.entries.get(full) {
            Some(e) if e.line > 0 => KaonError::Parse { line: e.line, msg },
            _ => KaonError::InvalidParameter(msg),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        let full = qualify(key)?;
        match self.entries.get(&full) {
            None => Ok(None),
            Some(e) => match e.value.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.error(
                    &full,
                    format!("{full} is not a finite number: {:?}", e.value),
                )),
            },
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        let full = qualify(key)?;
        match self.entries.get(&full) {
            None => Ok(None),
            Some(e) => e.value.parse::<u64>().map(Some).map_err(|_| {
                self.error(
                    &full,
                    format!("{full} is not a non-negative integer: {:?}", e.value),
                )
            }),
        }
    }

    pub fn units(&self) -> Result<Units> {
        match self.get("constants.units") {
            None => Ok(Units::Natural),
            Some(v) => v
                .parse()
                .map_err(|e: KaonError| self.error("constants.units", e.to_string())),
        }
    }

    /// Kaon constants with file values applied over the defaults.
    pub fn constants(&self) -> Result<KaonConstants> {
        let units = self.units()?;
        let u = UnitSystem::default();
        let d = KaonConstants::default();
        let get = |k: &str| self.get_f64(k);
        let energy = |x: f64| match units {
            Units::Natural => x,
            Units::MevSeconds => u.energy_to_natural(x),
        };
        let rate = |x: f64| match units {
            Units::Natural => x,
            Units::MevSeconds => u.rate_to_natural(x),
        };
        let (m_s, m_l) = match (
            get("constants.m_S")?,
            get("constants.m_L")?,
            get("constants.delta_m")?,
        ) {
            (_, Some(_), Some(_)) => {
                return Err(self.error(
                    "constants.delta_m",
                    "set either constants.m_L or constants.delta_m, not both".into(),
                ))
            }
            (s, None, Some(dm)) => (
                s.map(energy).unwrap_or(0.0),
                s.map(energy).unwrap_or(0.0) + energy(dm),
            ),
            (s, Some(l), None) => {
                // only the splitting is observable; subtract before converting
                let s = s.unwrap_or(0.0);
                match units {
                    Units::Natural => (s, l),
                    Units::MevSeconds => (0.0, energy(l - s)),
                }
            }
            (Some(s), None, None) => {
                let s = energy(s);
                (s, s + d.delta_m())
            }
            (None, None, None) => (d.m_s, d.m_l),
        };
        let c = KaonConstants {
            m_s,
            m_l,
            gamma_s: get("constants.gamma_S")?.map(rate).unwrap_or(d.gamma_s),
            gamma_l: get("constants.gamma_L")?.map(rate).unwrap_or(d.gamma_l),
            lambda: get("constants.lambda")?.map(energy).unwrap_or(d.lambda),
            eps: Complex::new(
                get("constants.eps_re")?.unwrap_or(0.0),
                get("constants.eps_im")?.unwrap_or(0.0),
            ),
        };
        c.validate()?;
        Ok(c)
    }

    /// Medium parameters, or `None` when no medium key is present.
    pub fn medium(&self) -> Result<Option<MediumParams>> {
        let get = |k: &str| self.get_f64(&format!("medium.{k}"));
        let present = |k: &str| self.get(&format!("medium.{k}")).is_some();
        let drive = present("drive_re") || present("drive_im");
        let explicit = ["nu", "m_K", "f0_re", "f0_im", "f0bar_re", "f0bar_im"]
            .iter()
            .any(|k| present(k));
        match (drive, explicit) {
            (false, false) => Ok(None),
            (true, true) => Err(self.error(
                "medium.drive_re",
                "give either medium.drive_re/drive_im or nu, m_K and amplitudes, not both".into(),
            )),
            (true, false) => Ok(Some(MediumParams::from_drive(Complex::new(
                get("drive_re")?.unwrap_or(0.0),
                get("drive_im")?.unwrap_or(0.0),
            )))),
            (false, true) => {
                let nu = get("nu")?
                    .ok_or_else(|| KaonError::InvalidParameter("medium.nu is required".into()))?;
                let m_k = get("m_K")?
                    .ok_or_else(|| KaonError::InvalidParameter("medium.m_K is required".into()))?;
                let f0 = Complex::new(get("f0_re")?.unwrap_or(0.0), get("f0_im")?.unwrap_or(0.0));
                let f0bar = Complex::new(
                    get("f0bar_re")?.unwrap_or(0.0),
                    get("f0bar_im")?.unwrap_or(0.0),
                );
                MediumParams::new(nu, m_k, f0, f0bar).map(Some)
            }
        }
    }

    /// Regenerator traversal time `medium.dt`.
    pub fn slab_time(&self) -> Result<f64> {
        Ok(self.get_f64("medium.dt")?.unwrap_or(DEFAULT_SLAB_TIME))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{DELTA_M_MEV, LAMBDA_MEAN_MEV, TAU_L_SECONDS, TAU_S_SECONDS};

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ConfigFile::parse("# nothing\n\n").unwrap();
        assert_eq!(cfg.constants().unwrap(), KaonConstants::default());
        assert_eq!(cfg.medium().unwrap(), None);
        assert_eq!(cfg.slab_time().unwrap(), DEFAULT_SLAB_TIME);
    }

    #[test]
    fn natural_values_and_prefixes() {
        let cfg = ConfigFile::parse(
            "constants.lambda = 0.25  # decoherence\nm_L = 0.5\neps_re=0.01\nrun.points = 11\npoints_extra = 3\n",
        )
        .unwrap();
        let c = cfg.constants().unwrap();
        assert_eq!(c.lambda, 0.25);
        assert_eq!(c.m_l, 0.5);
        assert_eq!(c.eps, Complex::new(0.01, 0.0));
        assert_eq!(cfg.get_u64("run.points").unwrap(), Some(11));
        assert_eq!(cfg.get("run.points_extra"), Some("3"));
        assert_eq!(cfg.get("constants.m_l"), Some("0.5"));
    }

    #[test]
    fn mev_seconds_values() {
        let text = format!(
            "units = mev_s\ndelta_m = {DELTA_M_MEV}\ngamma_S = {}\ngamma_L = {}\nlambda = {LAMBDA_MEAN_MEV}\n",
            1.0 / TAU_S_SECONDS,
            1.0 / TAU_L_SECONDS
        );
        let c = ConfigFile::parse(&text).unwrap().constants().unwrap();
        let r = KaonConstants::from_reference_mev();
        assert!((c.delta_m() - r.delta_m()).abs() < 1e-12);
        assert!((c.gamma_s - 1.0).abs() < 1e-12);
        assert!((c.gamma_l - r.gamma_l).abs() < 1e-15);
        assert!((c.lambda - 0.2503048).abs() < 1e-6);
    }

    #[test]
    fn mev_masses_subtract_before_conversion() {
        let text = "units = mev_s\nm_S = 497.614\nm_L = 497.61400000000349\n";
        let c = ConfigFile::parse(text).unwrap().constants().unwrap();
        assert_eq!(c.m_s, 0.0);
        let m_l: f64 = "497.61400000000349".parse().unwrap();
        let expected = UnitSystem::default().energy_to_natural(m_l - 497.614);
        assert_eq!(c.m_l, expected);
    }

    #[test]
    fn medium_blocks() {
        let cfg = ConfigFile::parse("medium.drive_re = 0.1\nmedium.dt = 0.02\n").unwrap();
        assert_eq!(
            cfg.medium().unwrap(),
            Some(MediumParams::from_drive(Complex::new(0.1, 0.0)))
        );
        assert_eq!(cfg.slab_time().unwrap(), 0.02);
        let cfg = ConfigFile::parse("nu = 0.5\nm_K = 2\nf0_re = 0.3\nf0bar_im = 0.1\n").unwrap();
        let m = cfg.medium().unwrap().unwrap();
        assert_eq!(
            m,
            MediumParams::new(0.5, 2.0, Complex::new(0.3, 0.0), Complex::new(0.0, 0.1)).unwrap()
        );
        assert!(ConfigFile::parse("nu = 0.5\ndrive_re = 0.1\n")
            .unwrap()
            .medium()
            .is_err());
        assert!(ConfigFile::parse("f0_re = 0.5\n")
            .unwrap()
            .medium()
            .is_err());
    }

    #[test]
    fn malformed_files_report_lines() {
        let e = ConfigFile::parse("lambda = 0.1\nthis is wrong\n").unwrap_err();
        assert_eq!(
            e,
            KaonError::Parse {
                line: 2,
                msg: "expected key = value, found \"this is wrong\"".into()
            }
        );
        assert!(matches!(
            ConfigFile::parse("a = 1\na = 2\n"),
            Err(KaonError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ConfigFile::parse("constants.foo = 1\n"),
            Err(KaonError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ConfigFile::parse("other.x = 1\n"),
            Err(KaonError::Parse { line: 1, .. })
        ));
        let cfg = ConfigFile::parse("\nlambda = abc\n").unwrap();
        assert!(matches!(
            cfg.constants(),
            Err(KaonError::Parse { line: 2, .. })
        ));
        let cfg = ConfigFile::parse("units = si\n").unwrap();
        assert!(matches!(
            cfg.constants(),
            Err(KaonError::Parse { line: 1, .. })
        ));
        let cfg = ConfigFile::parse("lambda = -1\n").unwrap();
        assert!(cfg.constants().is_err());
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut cfg = ConfigFile::parse("lambda = 0.1\n").unwrap();
        cfg.set("constants.lambda", "0.3").unwrap();
        assert_eq!(cfg.constants().unwrap().lambda, 0.3);
        cfg.remove("lambda").unwrap();
        assert_eq!(cfg.constants().unwrap().lambda, 0.0);
    }
}
