//! Plain-text scenario files.
//!
//! ```text
//! # comment
//! [scenario]
//! name = s2_round
//! dim = 2
//! connection = lc            # lc | torsioned | hermitianized | obata
//! samples = 50
//! seed = 42
//!
//! [box]
//! x1 = 0.5, 2.6
//! x2 = 0, 6.28
//!
//! [metric]                   # g_i_j; g_j_i is implied
//! g_1_1 = 1
//! g_2_2 = sin(x1)^2
//!
//! [torsion]                  # T_k_i_j = T^k_{ij}; T_k_j_i is implied
//! T_1_1_2 = 0.3
//!
//! [acs]                      # J_i_j, row i, column j
//! J_1_2 = -sin(x1)
//! J_2_1 = 1/sin(x1)
//!
//! [triple.1]                 # also [triple.2], [triple.3]
//! J_1_2 = -1
//!
//! [checks]
//! list = tm_lc_oracle, nijenhuis_I
//! expect_nonzero = nijenhuis_I
//!
//! [tolerances]               # overrides; `<check>.nonzero` for the other side
//! tm_lc_oracle = 1e-7
//! ```
//!
//! Indices are 1-based. Entries not given are zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::checks::CheckId;
use crate::base_manifold::{ChartManifold, ConnectionMode};
use crate::error::GeomError;
use crate::exprlang::{parse, Expr};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Expression { line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("invalid manifold data: {0}")]
    Geometry(#[from] GeomError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Per-check threshold overrides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tolerances {
    pub zero: BTreeMap<CheckId, f64>,
    pub nonzero: BTreeMap<CheckId, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub bounds: Vec<(f64, f64)>,
    /// `m*m`, row-major.
    pub metric: Vec<Expr>,
    /// `T^k_{ij}` at `(k*m + i)*m + j`.
    pub torsion: Option<Vec<Expr>>,
    pub acs: Option<Vec<Expr>>,
    pub triple: Option<[Vec<Expr>; 3]>,
    pub connection: ConnectionMode,
    pub checks: Vec<CheckId>,
    pub expect_nonzero: Vec<CheckId>,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_SEED: u64 = 42;

fn zeros(n: usize) -> Vec<Expr> {
    vec![Expr::num(0.0); n]
}

fn indices(key: &str, prefix: &str, count: usize, m: usize) -> Option<Vec<usize>> {
    let rest = key.strip_prefix(prefix)?;
    let idx: Vec<usize> = rest.split('_').map(|s| s.parse::<usize>().ok()).collect::<Option<_>>()?;
    (idx.len() == count && idx.iter().all(|i| (1..=m).contains(i))).then(|| idx.iter().map(|i| i - 1).collect())
}

fn check_list(value: &str, line: usize) -> Result<Vec<CheckId>, SpecError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| CheckId::from_name(s).ok_or_else(|| SpecError::Syntax { line, message: format!("unknown check `{s}`") }))
        .collect()
}

impl ScenarioSpec {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Compiles the geometric data.
    pub fn manifold(&self) -> Result<ChartManifold, SpecError> {
        let mut mfd = ChartManifold::new(self.bounds.clone(), self.metric.clone())?;
        if let Some(t) = &self.torsion {
            mfd = mfd.with_torsion(t.clone())?;
        }
        if let Some(j) = &self.acs {
            mfd = mfd.with_acs(j.clone())?;
        }
        if let Some(t) = &self.triple {
            mfd = mfd.with_triple(t.clone())?;
        }
        Ok(mfd)
    }

    /// Structural checks independent of sample points.
    pub fn validate(&self) -> Result<(), SpecError> {
        let m = self.dim();
        if m == 0 {
            return Err(SpecError::Invalid("empty [box]".into()));
        }
        if self.bounds.iter().any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(SpecError::Invalid("every box interval needs lo < hi".into()));
        }
        let all = self.metric.iter().chain(self.torsion.iter().flatten()).chain(self.acs.iter().flatten());
        let all: Vec<&Expr> = all.chain(self.triple.iter().flatten().flatten()).collect();
        if let Some(e) = all.iter().find(|e| e.max_var() > m) {
            return Err(SpecError::Invalid(format!("expression `{e}` uses a variable beyond x{m}")));
        }
        match self.connection {
            ConnectionMode::Hermitianized if self.acs.is_none() => {
                return Err(SpecError::Invalid("connection = hermitianized needs [acs]".into()));
            }
            ConnectionMode::Obata if self.triple.is_none() => {
                return Err(SpecError::Invalid("connection = obata needs [triple.1..3]".into()));
            }
            _ => {}
        }
        if let Some(c) = self.expect_nonzero.iter().find(|c| !self.checks.contains(c)) {
            return Err(SpecError::Invalid(format!("expect_nonzero lists `{}` which is not in the check list", c.name())));
        }
        if self.samples == 0 {
            return Err(SpecError::Invalid("samples must be positive".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut section = String::new();
        let mut scalars: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut entries: Vec<(String, usize, String, String)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(inner) = body.strip_prefix('[') {
                let name = inner.strip_suffix(']').ok_or(SpecError::Syntax { line, message: "unclosed section header".into() })?;
                let known = ["scenario", "box", "metric", "torsion", "acs", "triple.1", "triple.2", "triple.3", "checks", "tolerances"];
                if !known.contains(&name.trim()) {
                    return Err(SpecError::Syntax { line, message: format!("unknown section `{name}`") });
                }
                section = name.trim().to_string();
                // a bare header declares the component, all zero
                entries.push((section.clone(), line, String::new(), String::new()));
                continue;
            }
            let (k, v) = body.split_once('=').ok_or(SpecError::Syntax { line, message: "expected `key = value`".into() })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if section.is_empty() {
                return Err(SpecError::Syntax { line, message: "entry before any section header".into() });
            }
            if section == "scenario" {
                if scalars.insert(k.clone(), (line, v)).is_some() {
                    return Err(SpecError::Syntax { line, message: format!("duplicate key `{k}`") });
                }
            } else {
                entries.push((section.clone(), line, k, v));
            }
        }
        let get = |k: &str| scalars.get(k);
        let name = get("name").map(|(_, v)| v.clone()).ok_or(SpecError::Invalid("[scenario] needs `name`".into()))?;
        for (k, (line, _)) in &scalars {
            if !["name", "dim", "connection", "samples", "seed"].contains(&k.as_str()) {
                return Err(SpecError::Syntax { line: *line, message: format!("unknown key `{k}`") });
            }
        }
        let num = |k: &str, default: Option<u64>| -> Result<u64, SpecError> {
            match get(k) {
                Some((line, v)) => v.parse().map_err(|_| SpecError::Syntax { line: *line, message: format!("`{k}` must be a non-negative integer") }),
                None => default.ok_or(SpecError::Invalid(format!("[scenario] needs `{k}`"))),
            }
        };
        let m = num("dim", None)? as usize;
        let samples = num("samples", Some(DEFAULT_SAMPLES as u64))? as usize;
        let seed = num("seed", Some(DEFAULT_SEED))?;
        let connection = match get("connection") {
            Some((line, v)) => ConnectionMode::from_name(v)
                .ok_or(SpecError::Syntax { line: *line, message: format!("unknown connection `{v}`") })?,
            None => ConnectionMode::LeviCivita,
        };
        let mut bounds = vec![None; m];
        let mut metric = zeros(m * m);
        let mut metric_set = vec![false; m * m];
        let mut torsion: Option<Vec<Expr>> = None;
        let mut torsion_set = vec![false; m * m * m];
        let mut acs: Option<Vec<Expr>> = None;
        let mut triple: [Option<Vec<Expr>>; 3] = [None, None, None];
        let mut checks = Vec::new();
        let mut expect_nonzero = Vec::new();
        let mut tolerances = Tolerances::default();
        let expr = |line: usize, key: &str, v: &str| -> Result<Expr, SpecError> {
            // zero literals are canonical so that omitted and explicit zeros agree
            parse(v)
                .map(|e| if e.is_zero_literal() { Expr::num(0.0) } else { e })
                .map_err(|e| SpecError::Expression { line, column: key.len() + 4 + e.offset(), message: e.to_string() })
        };
        let bad_key = |line: usize, k: &str| SpecError::Syntax { line, message: format!("unknown or out-of-range key `{k}`") };
        for (sec, line, k, v) in &entries {
            let line = *line;
            if k.is_empty() {
                match sec.as_str() {
                    "torsion" => drop(torsion.get_or_insert_with(|| zeros(m * m * m))),
                    "acs" => drop(acs.get_or_insert_with(|| zeros(m * m))),
                    s if s.starts_with("triple.") => drop(triple[s.as_bytes()[7] as usize - b'1' as usize].get_or_insert_with(|| zeros(m * m))),
                    _ => {}
                }
                continue;
            }
            match sec.as_str() {
                "box" => {
                    let i = indices(k, "x", 1, m).ok_or_else(|| bad_key(line, k))?[0];
                    let parts: Vec<f64> = v.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>()
                        .map_err(|_| SpecError::Syntax { line, message: "expected `lo, hi`".into() })?;
                    if parts.len() != 2 {
                        return Err(SpecError::Syntax { line, message: "expected `lo, hi`".into() });
                    }
                    bounds[i] = Some((parts[0], parts[1]));
                }
                "metric" => {
                    let ij = indices(k, "g_", 2, m).ok_or_else(|| bad_key(line, k))?;
                    let e = expr(line, k, v)?;
                    let (a, b) = (ij[0] * m + ij[1], ij[1] * m + ij[0]);
                    metric[a] = e.clone();
                    metric_set[a] = true;
                    if !metric_set[b] {
                        metric[b] = e;
                    }
                }
                "torsion" => {
                    let kij = indices(k, "T_", 3, m).ok_or_else(|| bad_key(line, k))?;
                    if kij[1] == kij[2] {
                        return Err(SpecError::Syntax { line, message: "torsion is antisymmetric; T_k_i_i must be zero".into() });
                    }
                    let e = expr(line, k, v)?;
                    let t = torsion.get_or_insert_with(|| zeros(m * m * m));
                    let (a, b) = ((kij[0] * m + kij[1]) * m + kij[2], (kij[0] * m + kij[2]) * m + kij[1]);
                    t[a] = e.clone();
                    torsion_set[a] = true;
                    if !torsion_set[b] {
                        t[b] = if e.is_zero_literal() { e } else { Expr::Neg(Box::new(e)) };
                    }
                }
                "acs" | "triple.1" | "triple.2" | "triple.3" => {
                    let ij = indices(k, "J_", 2, m).ok_or_else(|| bad_key(line, k))?;
                    let e = expr(line, k, v)?;
                    let slot = match sec.as_str() {
                        "acs" => &mut acs,
                        s => &mut triple[s.as_bytes()[7] as usize - b'1' as usize],
                    };
                    slot.get_or_insert_with(|| zeros(m * m))[ij[0] * m + ij[1]] = e;
                }
                "checks" => match k.as_str() {
                    "list" => checks = check_list(v, line)?,
                    "expect_nonzero" => expect_nonzero = check_list(v, line)?,
                    _ => return Err(bad_key(line, k)),
                },
                "tolerances" => {
                    let (id, nonzero) = match k.strip_suffix(".nonzero") {
                        Some(id) => (id, true),
                        None => (k.as_str(), false),
                    };
                    let id = CheckId::from_name(id).ok_or_else(|| bad_key(line, k))?;
                    let val: f64 = v.parse().ok().filter(|x: &f64| *x > 0.0 && x.is_finite())
                        .ok_or(SpecError::Syntax { line, message: "tolerance must be a positive number".into() })?;
                    if nonzero {
                        tolerances.nonzero.insert(id, val);
                    } else {
                        tolerances.zero.insert(id, val);
                    }
                }
                _ => unreachable!("section names are checked when read"),
            }
        }
        let bounds = bounds
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.ok_or_else(|| SpecError::Invalid(format!("[box] is missing x{}", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let triple = match triple {
            [Some(a), Some(b), Some(c)] => Some([a, b, c]),
            [None, None, None] => None,
            _ => return Err(SpecError::Invalid("a triple needs all of [triple.1], [triple.2], [triple.3]".into())),
        };
        let spec = ScenarioSpec {
            name,
            bounds,
            metric,
            torsion,
            acs,
            triple,
            connection,
            checks,
            expect_nonzero,
            samples,
            seed,
            tolerances,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &str) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    /// Canonical text form; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let m = self.dim();
        let mut s = String::new();
        let _ = writeln!(s, "[scenario]\nname = {}\ndim = {m}\nconnection = {}", self.name, self.connection.name());
        let _ = writeln!(s, "samples = {}\nseed = {}\n\n[box]", self.samples, self.seed);
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            let _ = writeln!(s, "x{} = {lo:?}, {hi:?}", i + 1);
        }
        let _ = writeln!(s, "\n[metric]");
        for i in 0..m {
            for j in 0..m {
                let e = &self.metric[i * m + j];
                // lower entries are written only when they differ from the mirror
                let mirror = &self.metric[j * m + i];
                let write = match j.cmp(&i) {
                    std::cmp::Ordering::Greater => !e.is_zero_literal() || !mirror.is_zero_literal(),
                    std::cmp::Ordering::Equal => !e.is_zero_literal(),
                    std::cmp::Ordering::Less => e != mirror,
                };
                if write {
                    let _ = writeln!(s, "g_{}_{} = {e}", i + 1, j + 1);
                }
            }
        }
        if let Some(t) = &self.torsion {
            let _ = writeln!(s, "\n[torsion]");
            for k in 0..m {
                for i in 0..m {
                    for j in (i + 1)..m {
                        let (up, low) = (&t[(k * m + i) * m + j], &t[(k * m + j) * m + i]);
                        let neg = |e: &Expr| Expr::Neg(Box::new(e.clone()));
                        // write whichever entry the other one is implied from
                        let mut out: Vec<(usize, usize, &Expr)> = Vec::new();
                        if matches!(up, Expr::Neg(inner) if **inner == *low) {
                            out.push((j, i, low));
                        } else {
                            out.push((i, j, up));
                            if *low != neg(up) {
                                out.push((j, i, low));
                            }
                        }
                        for (a, b, e) in out {
                            if !e.is_zero_literal() || !(if a < b { low } else { up }).is_zero_literal() {
                                let _ = writeln!(s, "T_{}_{}_{} = {e}", k + 1, a + 1, b + 1);
                            }
                        }
                    }
                }
            }
        }
        let write_endo = |s: &mut String, header: &str, a: &[Expr]| {
            let _ = writeln!(s, "\n[{header}]");
            for i in 0..m {
                for j in 0..m {
                    if !a[i * m + j].is_zero_literal() {
                        let _ = writeln!(s, "J_{}_{} = {}", i + 1, j + 1, a[i * m + j]);
                    }
                }
            }
        };
        if let Some(a) = &self.acs {
            write_endo(&mut s, "acs", a);
        }
        if let Some(t) = &self.triple {
            for (n, a) in t.iter().enumerate() {
                write_endo(&mut s, &format!("triple.{}", n + 1), a);
            }
        }
        let names = |v: &[CheckId]| v.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "\n[checks]\nlist = {}", names(&self.checks));
        if !self.expect_nonzero.is_empty() {
            let _ = writeln!(s, "expect_nonzero = {}", names(&self.expect_nonzero));
        }
        if !self.tolerances.zero.is_empty() || !self.tolerances.nonzero.is_empty() {
            let _ = writeln!(s, "\n[tolerances]");
            for (id, v) in &self.tolerances.zero {
                let _ = writeln!(s, "{} = {v:e}", id.name());
            }
            for (id, v) in &self.tolerances.nonzero {
                let _ = writeln!(s, "{}.nonzero = {v:e}", id.name());
            }
        }
        s
    }
}
