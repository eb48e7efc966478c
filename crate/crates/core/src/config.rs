//! Run configuration: a flat key-value text format with sections, plus the
//! named presets that reproduce the verification cases.
//!
//! ```text
//! # comments run to the end of the line
//! [case]
//! preset = euler_vortex        # or mesh_files = a.msh, b.msh
//! p = 4                        # polynomial degree
//! scheme = ssp(5,4)
//! dt = 5e-4                    # 0 = pick automatically from a CFL estimate
//! t_end = 2.0
//! omega = 5.0                  # rotation speed of the rotating subdomain
//!
//! [fluid]
//! gamma = 1.4
//! mach = 0.3
//! reynolds = 0                 # 0 = inviscid
//! prandtl = 0.72
//!
//! [bc]
//! outer = dirichlet_exact      # tag = kind (mesh-file cases)
//!
//! [output]
//! dir = out
//! field_every = 0              # 0 = final snapshot only
//! conservation = false
//! mortar_dump = false
//!
//! [numerics]
//! gcl = true
//! viscous_method = flux        # or gradient
//! wavespeed = average          # or max
//! workers = 1
//! ```
//!
//! Unknown keys are rejected so typos fail fast.

use crate::error::SolverError;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub mesh_files: Vec<String>,
    pub p: usize,
    pub scheme: String,
    pub dt: f64,
    pub t_end: f64,
    pub omega: f64,
    pub gamma: f64,
    pub mach: f64,
    pub reynolds: f64,
    pub prandtl: f64,
    pub bc: BTreeMap<String, String>,
    pub out_dir: Option<String>,
    pub field_every: usize,
    pub vtk: bool,
    pub conservation: bool,
    pub mortar_dump: bool,
    pub gcl: bool,
    pub viscous_method: String,
    pub wavespeed: String,
    pub workers: usize,
    pub restart_from: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: None,
            mesh_files: Vec::new(),
            p: 3,
            scheme: "ssp(5,4)".into(),
            dt: 0.0,
            t_end: 0.0,
            omega: 0.0,
            gamma: 1.4,
            mach: 0.3,
            reynolds: 0.0,
            prandtl: 0.72,
            bc: BTreeMap::new(),
            out_dir: None,
            field_every: 0,
            vtk: false,
            conservation: false,
            mortar_dump: false,
            gcl: true,
            viscous_method: "flux".into(),
            wavespeed: "average".into(),
            workers: 1,
            restart_from: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, SolverError> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| SolverError::Config(format!("line {}: {msg}", lno + 1));
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', found '{line}'")))?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        let fnum = |v: &str| -> Result<f64, String> {
            v.parse().map_err(|_| format!("bad number '{v}'"))
        };
        let fint = |v: &str| -> Result<usize, String> {
            v.parse().map_err(|_| format!("bad integer '{v}'"))
        };
        let fbool = |v: &str| -> Result<bool, String> {
            match v {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(format!("bad boolean '{v}'")),
            }
        };
        match (section, key) {
            ("case", "preset") => self.preset = Some(value.to_string()),
            ("case", "mesh_files") => {
                self.mesh_files = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            ("case", "p") => self.p = fint(value)?,
            ("case", "scheme") => self.scheme = value.to_string(),
            ("case", "dt") => self.dt = fnum(value)?,
            ("case", "t_end") => self.t_end = fnum(value)?,
            ("case", "omega") => self.omega = fnum(value)?,
            ("case", "restart_from") => self.restart_from = Some(value.to_string()),
            ("fluid", "gamma") => self.gamma = fnum(value)?,
            ("fluid", "mach") => self.mach = fnum(value)?,
            ("fluid", "reynolds") => self.reynolds = fnum(value)?,
            ("fluid", "prandtl") => self.prandtl = fnum(value)?,
            ("bc", tag) => {
                self.bc.insert(tag.to_string(), value.to_string());
            }
            ("output", "dir") => self.out_dir = Some(value.to_string()),
            ("output", "field_every") => self.field_every = fint(value)?,
            ("output", "vtk") => self.vtk = fbool(value)?,
            ("output", "conservation") => self.conservation = fbool(value)?,
            ("output", "mortar_dump") => self.mortar_dump = fbool(value)?,
            ("numerics", "gcl") => self.gcl = fbool(value)?,
            ("numerics", "viscous_method") => self.viscous_method = value.to_string(),
            ("numerics", "wavespeed") => self.wavespeed = value.to_string(),
            ("numerics", "workers") => self.workers = fint(value)?,
            _ => return Err(format!("unknown key '{key}' in section '[{section}]'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.p < 1 {
            return Err(SolverError::Config("polynomial degree must be >= 1".into()));
        }
        if self.dt < 0.0 || !self.dt.is_finite() {
            return Err(SolverError::Config("dt must be non-negative".into()));
        }
        if self.t_end < 0.0 || !self.t_end.is_finite() {
            return Err(SolverError::Config("t_end must be non-negative".into()));
        }
        if self.t_end > 0.0 && self.preset.is_none() && self.mesh_files.is_empty() {
            return Err(SolverError::Config(
                "a run needs either a preset or mesh_files".into(),
            ));
        }
        if self.preset.is_some() && !self.mesh_files.is_empty() {
            return Err(SolverError::Config(
                "preset and mesh_files are mutually exclusive".into(),
            ));
        }
        match self.viscous_method.as_str() {
            "flux" | "gradient" => {}
            other => {
                return Err(SolverError::Config(format!(
                    "viscous_method must be 'flux' or 'gradient', found '{other}'"
                )))
            }
        }
        match self.wavespeed.as_str() {
            "average" | "max" => {}
            other => {
                return Err(SolverError::Config(format!(
                    "wavespeed must be 'average' or 'max', found '{other}'"
                )))
            }
        }
        if let Some(p) = &self.preset {
            if !PRESETS.contains(&p.as_str()) {
                return Err(SolverError::Config(format!(
                    "unknown preset '{p}' (available: {})",
                    PRESETS.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Render the configuration back to the text format.
    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "[case]").unwrap();
        if let Some(p) = &self.preset {
            writeln!(s, "preset = {p}").unwrap();
        }
        if !self.mesh_files.is_empty() {
            writeln!(s, "mesh_files = {}", self.mesh_files.join(", ")).unwrap();
        }
        writeln!(s, "p = {}", self.p).unwrap();
        writeln!(s, "scheme = {}", self.scheme).unwrap();
        writeln!(s, "dt = {:e}", self.dt).unwrap();
        writeln!(s, "t_end = {:e}", self.t_end).unwrap();
        writeln!(s, "omega = {:e}", self.omega).unwrap();
        if let Some(r) = &self.restart_from {
            writeln!(s, "restart_from = {r}").unwrap();
        }
        writeln!(s, "\n[fluid]").unwrap();
        writeln!(s, "gamma = {}", self.gamma).unwrap();
        writeln!(s, "mach = {}", self.mach).unwrap();
        writeln!(s, "reynolds = {}", self.reynolds).unwrap();
        writeln!(s, "prandtl = {}", self.prandtl).unwrap();
        if !self.bc.is_empty() {
            writeln!(s, "\n[bc]").unwrap();
            for (k, v) in &self.bc {
                writeln!(s, "{k} = {v}").unwrap();
            }
        }
        writeln!(s, "\n[output]").unwrap();
        if let Some(d) = &self.out_dir {
            writeln!(s, "dir = {d}").unwrap();
        }
        writeln!(s, "field_every = {}", self.field_every).unwrap();
        writeln!(s, "vtk = {}", self.vtk).unwrap();
        writeln!(s, "conservation = {}", self.conservation).unwrap();
        writeln!(s, "mortar_dump = {}", self.mortar_dump).unwrap();
        writeln!(s, "\n[numerics]").unwrap();
        writeln!(s, "gcl = {}", self.gcl).unwrap();
        writeln!(s, "viscous_method = {}", self.viscous_method).unwrap();
        writeln!(s, "wavespeed = {}", self.wavespeed).unwrap();
        writeln!(s, "workers = {}", self.workers).unwrap();
        s
    }
}

pub const PRESETS: [&str; 6] = [
    "euler_vortex",
    "taylor_couette",
    "couette_conservation",
    "free_stream_conforming",
    "free_stream_sliding",
    "rotating_cylinder",
];

/// Default configuration of a named preset; omega and the numerical knobs can
/// be overridden afterwards.
pub fn preset_config(name: &str) -> Result<RunConfig, SolverError> {
    let mut cfg = RunConfig {
        preset: Some(name.to_string()),
        ..Default::default()
    };
    match name {
        "euler_vortex" => {
            cfg.p = 4;
            cfg.mach = 0.3;
            cfg.reynolds = 0.0;
            cfg.scheme = "ssp(5,4)".into();
            cfg.t_end = 2.0;
        }
        "taylor_couette" => {
            cfg.p = 4;
            cfg.mach = 0.1;
            cfg.reynolds = 10.0;
            cfg.scheme = "ssp(5,4)".into();
            cfg.t_end = 3.0;
        }
        "couette_conservation" => {
            cfg.p = 4;
            cfg.mach = 0.8;
            cfg.reynolds = 100.0;
            cfg.scheme = "ssp(5,4)".into();
            cfg.t_end = 2.0;
            cfg.conservation = true;
        }
        "free_stream_conforming" => {
            cfg.p = 4;
            cfg.mach = 0.3;
            cfg.reynolds = 0.0;
            cfg.scheme = "ssp(10,4)".into();
            cfg.t_end = 5.0;
            cfg.omega = 1.0;
        }
        "free_stream_sliding" => {
            cfg.p = 4;
            cfg.mach = 0.3;
            cfg.reynolds = 0.0;
            cfg.scheme = "ssp(10,4)".into();
            cfg.t_end = 5.0;
            cfg.omega = 10.0;
        }
        "rotating_cylinder" => {
            cfg.p = 3;
            cfg.mach = 0.1;
            cfg.reynolds = 100.0;
            cfg.scheme = "ssp(10,4)".into();
            cfg.omega = std::f64::consts::FRAC_PI_2;
            cfg.t_end = 1.0;
        }
        other => {
            return Err(SolverError::Config(format!("unknown preset '{other}'")));
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# a comment
[case]
preset = euler_vortex
p = 5
scheme = ssp(10,4)
dt = 1e-3
t_end = 2.0
omega = 5

[fluid]
mach = 0.3

[output]
dir = out/run1
field_every = 100

[numerics]
workers = 2
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.preset.as_deref(), Some("euler_vortex"));
        assert_eq!(cfg.p, 5);
        assert_eq!(cfg.scheme, "ssp(10,4)");
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.field_every, 100);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("[case]\nfoo = 1\n").is_err());
        assert!(RunConfig::parse("[case]\ndt = nope\n").is_err());
        assert!(RunConfig::parse("[case]\npreset = flying_teapot\n").is_err());
        assert!(RunConfig::parse("no_equals_sign\n").is_err());
        assert!(RunConfig::parse("[unterminated\n").is_err());
    }

    #[test]
    fn render_parse_round_trip() {
        let mut cfg = preset_config("taylor_couette").unwrap();
        cfg.omega = 5.0;
        cfg.bc.insert("extra".into(), "noslip_adiabatic".into());
        cfg.out_dir = Some("out".into());
        let text = cfg.render();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn all_presets_have_configs() {
        for name in PRESETS {
            let cfg = preset_config(name).unwrap();
            cfg.validate().unwrap();
        }
    }
}
