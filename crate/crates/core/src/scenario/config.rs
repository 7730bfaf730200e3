//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! list = 1, 0, -2.5
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key belongs to a section;
//! unknown sections and keys are rejected with their position.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Errors from reading a scenario file.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },

    #[error("invalid value for `{key}`: {message}")]
    Invariant { key: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    U1,
    So3,
    /// `so(2k)`.
    So2k(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InternalSpec {
    /// Point orbit `Φ = −charge·e¹` of an abelian algebra.
    Point { charge: f64 },
    /// Sphere orbit of radius `mu` in `so(3)*`.
    Sphere { mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchSpec {
    North,
    South,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GaugeSpec {
    None,
    Uniform { field: [f64; 3] },
    Monopole { q_m: f64, patch: PatchSpec },
    Wong { strength: f64, offset: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LagrangianSpec {
    Free { mass: f64 },
    /// `½m|v|² + 1/r − μ²/(2k r²)`.
    Kepler { mass: f64, mu: f64, k: usize },
    Oscillator { mass: f64, omega: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Lagrangian,
    Hamiltonian,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSpec {
    Rk4,
    Rkf45,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorSpec {
    pub method: MethodSpec,
    pub dt: f64,
    pub t_end: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub trajectory: Option<String>,
    pub diagnostics: Option<String>,
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub group: GroupSpec,
    pub internal: InternalSpec,
    pub gauge: GaugeSpec,
    pub lagrangian: LagrangianSpec,
    pub formulation: Formulation,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub integrator: IntegratorSpec,
    pub output: OutputSpec,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("scenario", &["name"]),
    ("system", &["group", "k"]),
    ("internal", &["kind", "charge", "mu"]),
    ("gauge", &["kind", "field", "q_m", "patch", "strength", "offset"]),
    ("lagrangian", &["kind", "mass", "mu", "k", "omega"]),
    ("dynamics", &["formulation"]),
    ("initial", &["q", "v", "z"]),
    ("integrator", &["method", "dt", "t_end", "tolerance"]),
    ("output", &["trajectory", "diagnostics", "stride"]),
];

/// A raw value with the position of its first character.
#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    column: usize,
    text: String,
}

type Raw = BTreeMap<(String, String), Entry>;

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn invariant(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invariant {
        key: key.to_string(),
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Raw, ConfigError> {
    let mut raw = Raw::new();
    let mut section: Option<String> = None;
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = full.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        let col = |offset: usize| body[..offset].chars().count() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(syntax(line, col(indent + trimmed.len()), "expected `]` to close the section header"));
            };
            let name = name.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(syntax(line, col(indent + 1), format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(syntax(line, col(indent), "expected `key = value`"));
        };
        let key = body[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(syntax(line, col(indent), format!("invalid key `{key}`")));
        }
        let Some(sec) = section.clone() else {
            return Err(syntax(line, col(indent), "key outside of any section"));
        };
        let allowed = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                section: sec,
                key: key.to_string(),
            });
        }
        let after = &body[eq + 1..];
        let value_start = eq + 1 + (after.len() - after.trim_start().len());
        let entry = Entry {
            line,
            column: col(value_start),
            text: after.trim().to_string(),
        };
        if raw.insert((sec.clone(), key.to_string()), entry).is_some() {
            return Err(syntax(line, col(indent), format!("duplicate key `{key}` in [{sec}]")));
        }
    }
    Ok(raw)
}

struct Reader {
    raw: Raw,
}

impl Reader {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.raw.get(&(section.to_string(), key.to_string()))
    }

    fn word(&self, section: &str, key: &str, default: &str) -> Result<String, ConfigError> {
        match self.get(section, key) {
            None => Ok(default.to_string()),
            Some(e) if e.text.is_empty() => Err(syntax(e.line, e.column, format!("missing value for `{key}`"))),
            Some(e) => Ok(e.text.clone()),
        }
    }

    fn number(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => parse_number(&e.text, e.line, e.column),
        }
    }

    fn integer(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e
                .text
                .parse::<usize>()
                .map_err(|_| syntax(e.line, e.column, format!("expected a non-negative integer, found `{}`", e.text))),
        }
    }

    fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        if e.text.is_empty() {
            return Ok(Some(Vec::new()));
        }
        let mut out = Vec::new();
        let mut offset = 0;
        for part in e.text.split(',') {
            let lead = part.len() - part.trim_start().len();
            out.push(parse_number(part.trim(), e.line, e.column + offset + lead)?);
            offset += part.chars().count() + 1;
        }
        Ok(Some(out))
    }
}

fn parse_number(text: &str, line: usize, column: usize) -> Result<f64, ConfigError> {
    let ok = !text.is_empty()
        && text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    match text.parse::<f64>() {
        Ok(x) if ok && x.is_finite() => Ok(x),
        _ => Err(syntax(line, column, format!("expected a number, found `{text}`"))),
    }
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
    options
        .iter()
        .find(|(name, _)| *name == value)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            invariant(key, format!("`{value}` is not one of {}", names.join(", ")))
        })
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let r = Reader { raw: lex(text)? };

    let name = r.word("scenario", "name", "custom")?;
    let k = r.integer("system", "k", 1)?;
    let group = match r.word("system", "group", "u1")?.as_str() {
        "u1" => GroupSpec::U1,
        "so3" => GroupSpec::So3,
        "so2k" => GroupSpec::So2k(k),
        other => return Err(invariant("system.group", format!("`{other}` is not one of u1, so3, so2k"))),
    };
    if k == 0 {
        return Err(invariant("system.k", "must be at least 1"));
    }

    let internal = match r.word("internal", "kind", "point")?.as_str() {
        "point" => InternalSpec::Point {
            charge: r.number("internal", "charge", 1.0)?,
        },
        "sphere" => InternalSpec::Sphere {
            mu: r.number("internal", "mu", 1.0)?,
        },
        other => return Err(invariant("internal.kind", format!("`{other}` is not one of point, sphere"))),
    };

    let gauge = match r.word("gauge", "kind", "none")?.as_str() {
        "none" => GaugeSpec::None,
        "uniform" => {
            let f = r
                .list("gauge", "field")?
                .ok_or_else(|| invariant("gauge.field", "required for a uniform field"))?;
            if f.len() != 3 {
                return Err(invariant("gauge.field", format!("needs 3 components, found {}", f.len())));
            }
            GaugeSpec::Uniform {
                field: [f[0], f[1], f[2]],
            }
        }
        "monopole" => GaugeSpec::Monopole {
            q_m: r.number("gauge", "q_m", 0.5)?,
            patch: choice(
                "gauge.patch",
                &r.word("gauge", "patch", "north")?,
                &[("north", PatchSpec::North), ("south", PatchSpec::South)],
            )?,
        },
        "wong" => GaugeSpec::Wong {
            strength: r.number("gauge", "strength", 1.0)?,
            offset: r.number("gauge", "offset", 0.0)?,
        },
        other => {
            return Err(invariant(
                "gauge.kind",
                format!("`{other}` is not one of none, uniform, monopole, wong"),
            ))
        }
    };

    let mass = r.number("lagrangian", "mass", 1.0)?;
    let lagrangian = match r.word("lagrangian", "kind", "free")?.as_str() {
        "free" => LagrangianSpec::Free { mass },
        "kepler" => LagrangianSpec::Kepler {
            mass,
            mu: r.number("lagrangian", "mu", 0.0)?,
            k: r.integer("lagrangian", "k", 1)?,
        },
        "oscillator" => LagrangianSpec::Oscillator {
            mass,
            omega: r.number("lagrangian", "omega", 1.0)?,
        },
        other => {
            return Err(invariant(
                "lagrangian.kind",
                format!("`{other}` is not one of free, kepler, oscillator"),
            ))
        }
    };

    let formulation = choice(
        "dynamics.formulation",
        &r.word("dynamics", "formulation", "lagrangian")?,
        &[
            ("lagrangian", Formulation::Lagrangian),
            ("hamiltonian", Formulation::Hamiltonian),
            ("both", Formulation::Both),
        ],
    )?;

    let q = r
        .list("initial", "q")?
        .ok_or_else(|| invariant("initial.q", "an initial position is required"))?;
    let v = r.list("initial", "v")?.unwrap_or_else(|| vec![0.0; q.len()]);
    let z = r.list("initial", "z")?.unwrap_or_default();

    let integrator = IntegratorSpec {
        method: choice(
            "integrator.method",
            &r.word("integrator", "method", "rk4")?,
            &[("rk4", MethodSpec::Rk4), ("rkf45", MethodSpec::Rkf45)],
        )?,
        dt: r.number("integrator", "dt", 1e-3)?,
        t_end: r.number("integrator", "t_end", 10.0)?,
        tolerance: r.number("integrator", "tolerance", crate::dynamics::DEFAULT_RKF45_TOL)?,
    };

    let output = OutputSpec {
        trajectory: r.get("output", "trajectory").map(|e| e.text.clone()),
        diagnostics: r.get("output", "diagnostics").map(|e| e.text.clone()),
        stride: r.integer("output", "stride", 1)?,
    };

    let config = ScenarioConfig {
        name,
        group,
        internal,
        gauge,
        lagrangian,
        formulation,
        q,
        v,
        z,
        integrator,
        output,
    };
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    pub fn base_dim(&self) -> usize {
        self.q.len()
    }

    pub fn internal_dim(&self) -> usize {
        match self.internal {
            InternalSpec::Point { .. } => 0,
            InternalSpec::Sphere { .. } => 2,
        }
    }

    /// Cross-field invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.chars().any(|c| c.is_whitespace() || c == '/' || c == '\\') {
            return Err(invariant("scenario.name", "must be a non-empty word usable in file names"));
        }
        let it = &self.integrator;
        if !(it.dt > 0.0) {
            return Err(invariant("integrator.dt", format!("must be positive, found {}", it.dt)));
        }
        if !(it.t_end > 0.0) {
            return Err(invariant("integrator.t_end", format!("must be positive, found {}", it.t_end)));
        }
        if !(it.tolerance > 0.0) {
            return Err(invariant("integrator.tolerance", format!("must be positive, found {}", it.tolerance)));
        }
        if self.output.stride == 0 {
            return Err(invariant("output.stride", "must be at least 1"));
        }
        for (key, path) in [("output.trajectory", &self.output.trajectory), ("output.diagnostics", &self.output.diagnostics)] {
            if matches!(path, Some(p) if p.is_empty()) {
                return Err(invariant(key, "path is empty"));
            }
        }
        match (self.group, self.internal) {
            (GroupSpec::So3, InternalSpec::Sphere { mu }) => {
                if !(mu > 0.0) {
                    return Err(invariant("internal.mu", format!("must be positive, found {mu}")));
                }
            }
            (GroupSpec::U1, InternalSpec::Point { .. }) => {}
            (GroupSpec::So2k(1), InternalSpec::Point { .. }) => {}
            (GroupSpec::So2k(k), InternalSpec::Point { .. }) => {
                return Err(invariant(
                    "system.k",
                    format!("so({}) has no fixed point orbit along e1; use k = 1", 2 * k),
                ))
            }
            (g, i) => {
                return Err(invariant(
                    "internal.kind",
                    format!("{i:?} is not an orbit of {g:?}"),
                ))
            }
        }
        let n = self.q.len();
        if n == 0 {
            return Err(invariant("initial.q", "needs at least one component"));
        }
        if self.v.len() != n {
            return Err(invariant("initial.v", format!("needs {n} components, found {}", self.v.len())));
        }
        if self.z.len() != self.internal_dim() {
            return Err(invariant(
                "initial.z",
                format!("needs {} components, found {}", self.internal_dim(), self.z.len()),
            ));
        }
        match (&self.gauge, self.group) {
            (GaugeSpec::None, _) => {}
            (GaugeSpec::Uniform { .. }, GroupSpec::U1)
            | (GaugeSpec::Monopole { .. }, GroupSpec::U1 | GroupSpec::So2k(1))
            | (GaugeSpec::Wong { .. }, GroupSpec::So3) => {
                if n != 3 {
                    return Err(invariant("initial.q", format!("this gauge field lives in 3 dimensions, found {n}")));
                }
            }
            (g, group) => {
                return Err(invariant("gauge.kind", format!("{g:?} does not take values in {group:?}")));
            }
        }
        let mass = match self.lagrangian {
            LagrangianSpec::Free { mass } | LagrangianSpec::Kepler { mass, .. } | LagrangianSpec::Oscillator { mass, .. } => mass,
        };
        if !(mass > 0.0) {
            return Err(invariant("lagrangian.mass", format!("must be positive, found {mass}")));
        }
        if let LagrangianSpec::Kepler { k, .. } = self.lagrangian {
            if k == 0 {
                return Err(invariant("lagrangian.k", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse_config(&c.to_text()) == Ok(c)`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "[scenario]\nname = {}\n", self.name);
        match self.group {
            GroupSpec::U1 => s.push_str("[system]\ngroup = u1\n\n"),
            GroupSpec::So3 => s.push_str("[system]\ngroup = so3\n\n"),
            GroupSpec::So2k(k) => {
                let _ = writeln!(s, "[system]\ngroup = so2k\nk = {k}\n");
            }
        }
        match self.internal {
            InternalSpec::Point { charge } => {
                let _ = writeln!(s, "[internal]\nkind = point\ncharge = {charge:?}\n");
            }
            InternalSpec::Sphere { mu } => {
                let _ = writeln!(s, "[internal]\nkind = sphere\nmu = {mu:?}\n");
            }
        }
        match &self.gauge {
            GaugeSpec::None => s.push_str("[gauge]\nkind = none\n\n"),
            GaugeSpec::Uniform { field } => {
                let _ = writeln!(s, "[gauge]\nkind = uniform\nfield = {}\n", list(field));
            }
            GaugeSpec::Monopole { q_m, patch } => {
                let p = match patch {
                    PatchSpec::North => "north",
                    PatchSpec::South => "south",
                };
                let _ = writeln!(s, "[gauge]\nkind = monopole\nq_m = {q_m:?}\npatch = {p}\n");
            }
            GaugeSpec::Wong { strength, offset } => {
                let _ = writeln!(s, "[gauge]\nkind = wong\nstrength = {strength:?}\noffset = {offset:?}\n");
            }
        }
        match self.lagrangian {
            LagrangianSpec::Free { mass } => {
                let _ = writeln!(s, "[lagrangian]\nkind = free\nmass = {mass:?}\n");
            }
            LagrangianSpec::Kepler { mass, mu, k } => {
                let _ = writeln!(s, "[lagrangian]\nkind = kepler\nmass = {mass:?}\nmu = {mu:?}\nk = {k}\n");
            }
            LagrangianSpec::Oscillator { mass, omega } => {
                let _ = writeln!(s, "[lagrangian]\nkind = oscillator\nmass = {mass:?}\nomega = {omega:?}\n");
            }
        }
        let f = match self.formulation {
            Formulation::Lagrangian => "lagrangian",
            Formulation::Hamiltonian => "hamiltonian",
            Formulation::Both => "both",
        };
        let _ = writeln!(s, "[dynamics]\nformulation = {f}\n");
        let _ = writeln!(s, "[initial]\nq = {}\nv = {}\nz = {}\n", list(&self.q), list(&self.v), list(&self.z));
        let it = &self.integrator;
        let m = match it.method {
            MethodSpec::Rk4 => "rk4",
            MethodSpec::Rkf45 => "rkf45",
        };
        let _ = writeln!(
            s,
            "[integrator]\nmethod = {m}\ndt = {:?}\nt_end = {:?}\ntolerance = {:?}\n",
            it.dt, it.t_end, it.tolerance
        );
        s.push_str("[output]\n");
        if let Some(p) = &self.output.trajectory {
            let _ = writeln!(s, "trajectory = {p}");
        }
        if let Some(p) = &self.output.diagnostics {
            let _ = writeln!(s, "diagnostics = {p}");
        }
        let _ = writeln!(s, "stride = {}", self.output.stride);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[gauge]
kind = uniform
field = 0, 0, 2

[initial]
q = 0, 0, 0
v = 1, 0, 0
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.name, "custom");
        assert_eq!(c.group, GroupSpec::U1);
        assert_eq!(c.internal, InternalSpec::Point { charge: 1.0 });
        assert_eq!(c.gauge, GaugeSpec::Uniform { field: [0.0, 0.0, 2.0] });
        assert_eq!(c.lagrangian, LagrangianSpec::Free { mass: 1.0 });
        assert_eq!(c.integrator.dt, 1e-3);
        assert_eq!(c.integrator.t_end, 10.0);
        assert_eq!(c.output.stride, 1);
        assert!(c.z.is_empty());
    }

    #[test]
    fn negative_step_names_the_key() {
        let e = parse_config(&format!("{MINIMAL}[integrator]\ndt = -1\n")).unwrap_err();
        match e {
            ConfigError::Invariant { key, .. } => assert_eq!(key, "integrator.dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positions_are_reported() {
        let e = parse_config("[initial]\nq = 1, x2, 3\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Syntax {
                line: 2,
                column: 8,
                message: "expected a number, found `x2`".into()
            }
        );
        let e = parse_config("\n\n[initial]\n  q 1\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 4, column: 3, .. }), "{e:?}");
        let e = parse_config("[gauge]\ncolour = red\n").unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: 2, .. }), "{e:?}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{MINIMAL}  # trailing\n[scenario]\nname = demo # inline\n");
        assert_eq!(parse_config(&text).unwrap().name, "demo");
    }

    #[test]
    fn round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }
}
