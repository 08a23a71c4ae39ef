//! Scenario configuration: a flat, sectioned `key = value` text format.
//!
//! Sections are `[chain]`, `[drive]`, `[blocking]`, `[protocol]` and
//! `[output]`; every physical value carries a unit suffix in its key name.
//! Unknown sections or keys are rejected so a typo cannot silently fall back
//! to a default. Lines starting with `#` are comments.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ChainSection {
    pub n_sites: usize,
    pub v_f_mev: f64,
    pub gamma_per_ps: f64,
    pub n_sites_min: usize,
    pub n_sites_max: usize,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            n_sites: 5,
            v_f_mev: 0.2,
            gamma_per_ps: 0.0,
            n_sites_min: 2,
            n_sites_max: 11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DriveSection {
    pub omega_over_vf: Vec<f64>,
    /// Absolute sweep values; overrides `omega_over_vf` when present (the
    /// only way to drive an uncoupled chain, v_f_mev = 0).
    pub omega_mev: Option<Vec<f64>>,
    /// Window per sweep point; when absent, three π times of the drive.
    pub t_max_ps: Option<f64>,
    pub dt_ps: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            omega_over_vf: vec![1.0, 5.0, 25.0, 50.0],
            omega_mev: None,
            t_max_ps: None,
            dt_ps: 0.005,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockingSection {
    pub ratio_list: Vec<f64>,
    pub lengths: Vec<usize>,
    pub t_max_ps: f64,
    pub dt_ps: f64,
}

impl Default for BlockingSection {
    fn default() -> Self {
        Self {
            ratio_list: vec![0.0, 2.0, 5.0, 10.0, 20.0, 40.0],
            lengths: vec![5, 7],
            t_max_ps: 20.0,
            dt_ps: 0.005,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolSection {
    pub bus_length_a: usize,
    pub bus_length_b: usize,
    pub v_f_mev: f64,
    pub shift_ratio: f64,
    pub gamma_per_ps: f64,
    pub ideal_controls: bool,
    pub explicit_blocking: bool,
    pub bell_mode: String,
    pub bell_duration_ps: f64,
    pub bell_shift_mev: f64,
    pub bell_pi2_rabi_mev: f64,
    pub bell_cond_rabi_mev: f64,
    pub control_rabi_mev: f64,
    pub swap_window_ps: f64,
    pub strict_timing: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            bus_length_a: 5,
            bus_length_b: 5,
            v_f_mev: 0.2,
            shift_ratio: 20.0,
            gamma_per_ps: 0.001,
            ideal_controls: true,
            explicit_blocking: false,
            bell_mode: "ideal".into(),
            bell_duration_ps: 1.0,
            bell_shift_mev: 4.0,
            bell_pi2_rabi_mev: 1.0,
            bell_cond_rabi_mev: 0.1,
            control_rabi_mev: 5.0,
            swap_window_ps: 2.0,
            strict_timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputSection {
    pub plots: bool,
    pub trajectories: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            plots: true,
            trajectories: false,
        }
    }
}

/// Parsed scenario file with defaults for every key.
#[derive(Debug, Clone, Default)]
pub struct ScenarioConfig {
    pub chain: ChainSection,
    pub drive: DriveSection,
    pub blocking: BlockingSection,
    pub protocol: ProtocolSection,
    pub output: OutputSection,
}

fn bad<T>(line_no: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Config(format!("line {line_no}: {msg}")))
}

fn parse_f64(line_no: usize, key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "line {line_no}: '{key}' expects a number, got '{value}'"
        ))
    })
}

fn parse_usize(line_no: usize, key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "line {line_no}: '{key}' expects an integer, got '{value}'"
        ))
    })
}

fn parse_bool(line_no: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bad(
            line_no,
            format!("'{key}' expects true/false, got '{value}'"),
        ),
    }
}

fn parse_f64_list(line_no: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(line_no, key, s))
        .collect()
}

fn parse_usize_list(line_no: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_usize(line_no, key, s))
        .collect()
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return bad(line_no, "unterminated section header");
                };
                section = name.trim().to_string();
                if !matches!(
                    section.as_str(),
                    "chain" | "drive" | "blocking" | "protocol" | "output"
                ) {
                    return bad(line_no, format!("unknown section [{section}]"));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return bad(line_no, format!("expected 'key = value', got '{line}'"));
            };
            let key = key.trim();
            let value = value.trim();
            if section.is_empty() {
                return bad(
                    line_no,
                    format!("key '{key}' appears before any section header"),
                );
            }
            cfg.apply(&section, key, value, line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str, n: usize) -> Result<()> {
        match (section, key) {
            ("chain", "n_sites") => self.chain.n_sites = parse_usize(n, key, value)?,
            ("chain", "v_f_mev") => self.chain.v_f_mev = parse_f64(n, key, value)?,
            ("chain", "gamma_per_ps") => self.chain.gamma_per_ps = parse_f64(n, key, value)?,
            ("chain", "n_sites_min") => self.chain.n_sites_min = parse_usize(n, key, value)?,
            ("chain", "n_sites_max") => self.chain.n_sites_max = parse_usize(n, key, value)?,
            ("drive", "omega_over_vf") => self.drive.omega_over_vf = parse_f64_list(n, key, value)?,
            ("drive", "omega_mev") => self.drive.omega_mev = Some(parse_f64_list(n, key, value)?),
            ("drive", "t_max_ps") => self.drive.t_max_ps = Some(parse_f64(n, key, value)?),
            ("drive", "dt_ps") => self.drive.dt_ps = parse_f64(n, key, value)?,
            ("blocking", "ratio_list") => self.blocking.ratio_list = parse_f64_list(n, key, value)?,
            ("blocking", "lengths") => self.blocking.lengths = parse_usize_list(n, key, value)?,
            ("blocking", "t_max_ps") => self.blocking.t_max_ps = parse_f64(n, key, value)?,
            ("blocking", "dt_ps") => self.blocking.dt_ps = parse_f64(n, key, value)?,
            ("protocol", "bus_length_a") => {
                self.protocol.bus_length_a = parse_usize(n, key, value)?
            }
            ("protocol", "bus_length_b") => {
                self.protocol.bus_length_b = parse_usize(n, key, value)?
            }
            ("protocol", "v_f_mev") => self.protocol.v_f_mev = parse_f64(n, key, value)?,
            ("protocol", "shift_ratio") => self.protocol.shift_ratio = parse_f64(n, key, value)?,
            ("protocol", "gamma_per_ps") => self.protocol.gamma_per_ps = parse_f64(n, key, value)?,
            ("protocol", "ideal_controls") => {
                self.protocol.ideal_controls = parse_bool(n, key, value)?
            }
            ("protocol", "explicit_blocking") => {
                self.protocol.explicit_blocking = parse_bool(n, key, value)?
            }
            ("protocol", "bell_mode") => self.protocol.bell_mode = value.to_string(),
            ("protocol", "bell_duration_ps") => {
                self.protocol.bell_duration_ps = parse_f64(n, key, value)?
            }
            ("protocol", "bell_shift_mev") => {
                self.protocol.bell_shift_mev = parse_f64(n, key, value)?
            }
            ("protocol", "bell_pi2_rabi_mev") => {
                self.protocol.bell_pi2_rabi_mev = parse_f64(n, key, value)?
            }
            ("protocol", "bell_cond_rabi_mev") => {
                self.protocol.bell_cond_rabi_mev = parse_f64(n, key, value)?
            }
            ("protocol", "control_rabi_mev") => {
                self.protocol.control_rabi_mev = parse_f64(n, key, value)?
            }
            ("protocol", "swap_window_ps") => {
                self.protocol.swap_window_ps = parse_f64(n, key, value)?
            }
            ("protocol", "strict_timing") => {
                self.protocol.strict_timing = parse_bool(n, key, value)?
            }
            ("output", "plots") => self.output.plots = parse_bool(n, key, value)?,
            ("output", "trajectories") => self.output.trajectories = parse_bool(n, key, value)?,
            _ => return bad(n, format!("unknown key '{key}' in section [{section}]")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let c = |ok: bool, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        c(
            self.chain.n_sites >= 1,
            "[chain] n_sites must be at least 1",
        )?;
        // v_f_mev = 0 is allowed: it models uncoupled dots (pure Rabi
        // flopping); sweeps then need absolute omega_mev values.
        c(
            self.chain.v_f_mev >= 0.0,
            "[chain] v_f_mev must be non-negative",
        )?;
        c(
            self.chain.gamma_per_ps >= 0.0,
            "[chain] gamma_per_ps must be non-negative",
        )?;
        c(
            self.chain.n_sites_min >= 2 && self.chain.n_sites_min <= self.chain.n_sites_max,
            "[chain] n_sites_min must be >= 2 and <= n_sites_max",
        )?;
        c(
            !self.drive.omega_over_vf.is_empty(),
            "[drive] omega_over_vf must not be empty",
        )?;
        c(
            self.drive.omega_over_vf.iter().all(|&r| r > 0.0),
            "[drive] omega_over_vf entries must be positive",
        )?;
        if let Some(omegas) = &self.drive.omega_mev {
            c(!omegas.is_empty(), "[drive] omega_mev must not be empty")?;
            c(
                omegas.iter().all(|&w| w > 0.0),
                "[drive] omega_mev entries must be positive",
            )?;
        }
        c(
            self.drive.omega_mev.is_some() || self.chain.v_f_mev > 0.0,
            "[drive] omega_mev is required when [chain] v_f_mev = 0",
        )?;
        c(self.drive.dt_ps > 0.0, "[drive] dt_ps must be positive")?;
        c(
            !self.blocking.ratio_list.is_empty(),
            "[blocking] ratio_list must not be empty",
        )?;
        c(
            self.blocking.lengths.iter().all(|&l| l >= 3),
            "[blocking] lengths must be at least 3 sites",
        )?;
        c(
            !self.blocking.lengths.is_empty(),
            "[blocking] lengths must not be empty",
        )?;
        c(
            self.blocking.t_max_ps > 0.0 && self.blocking.dt_ps > 0.0,
            "[blocking] window must be positive",
        )?;
        c(
            matches!(self.protocol.bell_mode.as_str(), "ideal" | "pulsed"),
            "[protocol] bell_mode must be 'ideal' or 'pulsed'",
        )?;
        c(
            self.protocol.v_f_mev > 0.0,
            "[protocol] v_f_mev must be positive",
        )?;
        c(
            self.protocol.shift_ratio >= 0.0,
            "[protocol] shift_ratio must be non-negative",
        )?;
        Ok(())
    }
}
