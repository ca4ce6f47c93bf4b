// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Delta rules: how each metric turns into a plotted series.
//!
//! The rule file is INI with one `metric = method` line per metric, either
//! at the top level or under `[deltas]`:
//!
//! ```ini
//! [deltas]
//! vCpuTimeUserMode = delta
//! vMemoryFree      = raw
//! vBytesWritten    = derived: vDiskSectorWrites * sectorSizeBytes
//! ```
//!
//! Lines override the built-in defaults (counters `delta`, gauges `raw`,
//! plus `vBytesWritten` and `vMemoryUsed`) in place or append new derived
//! metrics. A formula may use `+ - * /`, parentheses, numbers, the run
//! constants `sectorSizeBytes`, `clockTicksPerSecond`, `intervalSeconds`,
//! and any host/container metric or derived metric defined above it.

use super::AnalysisError;
use crate::catalog::{catalog, lookup, Level, MetricKind};
use crate::snapshot::Scalar;
use ini::Ini;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunConstant {
    SectorSizeBytes,
    ClockTicksPerSecond,
    IntervalSeconds,
}

impl RunConstant {
    fn from_name(s: &str) -> Option<Self> {
        match s {
            "sectorSizeBytes" => Some(RunConstant::SectorSizeBytes),
            "clockTicksPerSecond" => Some(RunConstant::ClockTicksPerSecond),
            "intervalSeconds" => Some(RunConstant::IntervalSeconds),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            RunConstant::SectorSizeBytes => "sectorSizeBytes",
            RunConstant::ClockTicksPerSecond => "clockTicksPerSecond",
            RunConstant::IntervalSeconds => "intervalSeconds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConstants {
    pub sector_size_bytes: u64,
    pub clock_ticks_per_second: u64,
    /// Interval of the series being computed.
    pub interval_seconds: f64,
}

impl RunConstants {
    fn get(&self, c: RunConstant) -> Scalar {
        match c {
            RunConstant::SectorSizeBytes => Scalar::Int(self.sector_size_bytes),
            RunConstant::ClockTicksPerSecond => Scalar::Int(self.clock_ticks_per_second),
            RunConstant::IntervalSeconds => {
                let s = self.interval_seconds;
                if s.fract() == 0.0 && s >= 0.0 && s < u64::MAX as f64 {
                    Scalar::Int(s as u64)
                } else {
                    Scalar::Float(s)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(u64),
    Float(f64),
    Const(RunConstant),
    Metric(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Float(v) => write!(f, "{v:?}"),
            Expr::Const(c) => f.write_str(c.name()),
            Expr::Metric(m) => f.write_str(m),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn err<T>(&self, msg: &str) -> Result<T, String> {
        Err(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                let rest = &self.src[start..];
                let len = rest.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(rest.len());
                self.pos += len;
                let text = &rest[..len];
                if let Ok(v) = text.parse::<u64>() {
                    Ok(Expr::Int(v))
                } else if let Ok(v) = text.parse::<f64>() {
                    Ok(Expr::Float(v))
                } else {
                    self.pos = start;
                    self.err("bad number")
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let rest = &self.src[self.pos..];
                let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
                self.pos += len;
                let name = &rest[..len];
                Ok(match RunConstant::from_name(name) {
                    Some(c) => Expr::Const(c),
                    None => Expr::Metric(name.to_string()),
                })
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of formula"),
        }
    }
}

enum Exact {
    Value(i128),
    /// Needs floating point (division, float input, or overflow).
    Inexact,
    Missing,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, String> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    /// Metric names referenced by the formula, in order of appearance.
    pub fn metrics(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_metrics(&mut out);
        out
    }

    fn collect_metrics<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Metric(m) => out.push(m),
            Expr::Neg(e) => e.collect_metrics(out),
            Expr::Bin(_, a, b) => {
                a.collect_metrics(out);
                b.collect_metrics(out);
            }
            _ => {}
        }
    }

    fn exact(&self, get: &dyn Fn(&str) -> Option<Scalar>, k: &RunConstants) -> Exact {
        let scalar = |s: Scalar| match s {
            Scalar::Int(v) => Exact::Value(v as i128),
            Scalar::Float(_) => Exact::Inexact,
        };
        match self {
            Expr::Int(v) => Exact::Value(*v as i128),
            Expr::Float(_) => Exact::Inexact,
            Expr::Const(c) => scalar(k.get(*c)),
            Expr::Metric(m) => get(m).map_or(Exact::Missing, scalar),
            Expr::Neg(e) => match e.exact(get, k) {
                Exact::Value(v) => Exact::Value(-v),
                other => other,
            },
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.exact(get, k), b.exact(get, k));
                match (a, b) {
                    (Exact::Missing, _) | (_, Exact::Missing) => Exact::Missing,
                    (Exact::Value(x), Exact::Value(y)) => {
                        let r = match op {
                            BinOp::Add => x.checked_add(y),
                            BinOp::Sub => x.checked_sub(y),
                            BinOp::Mul => x.checked_mul(y),
                            BinOp::Div => None,
                        };
                        r.map_or(Exact::Inexact, Exact::Value)
                    }
                    _ => Exact::Inexact,
                }
            }
        }
    }

    fn float(&self, get: &dyn Fn(&str) -> Option<Scalar>, k: &RunConstants) -> Option<f64> {
        Some(match self {
            Expr::Int(v) => *v as f64,
            Expr::Float(v) => *v,
            Expr::Const(c) => k.get(*c).as_f64(),
            Expr::Metric(m) => get(m)?.as_f64(),
            Expr::Neg(e) => -e.float(get, k)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.float(get, k)?, b.float(get, k)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                }
            }
        })
    }

    /// Evaluates with exact integer arithmetic when the formula has no
    /// division and every input is an integer, otherwise in f64. `None`
    /// when an input is missing.
    pub fn eval(&self, get: &dyn Fn(&str) -> Option<Scalar>, k: &RunConstants) -> Option<Scalar> {
        match self.exact(get, k) {
            Exact::Missing => None,
            Exact::Value(v) if (0..=u64::MAX as i128).contains(&v) => Some(Scalar::Int(v as u64)),
            _ => self.float(get, k).map(Scalar::Float),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Counter differencing per bucket.
    Delta,
    /// Bucket-end sample passed through.
    Raw,
    Derived(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRule {
    pub metric: String,
    pub method: Method,
}

impl DeltaRule {
    pub fn level(&self) -> Option<Level> {
        lookup(&self.metric).map(|d| d.level)
    }
}

fn parse_method(metric: &str, value: &str) -> Result<Method, AnalysisError> {
    let value = value.trim();
    match value {
        "delta" => Ok(Method::Delta),
        "raw" => Ok(Method::Raw),
        _ => match value.strip_prefix("derived:") {
            Some(f) => {
                Expr::parse(f.trim()).map(Method::Derived).map_err(|e| AnalysisError::Config(format!("{metric}: {e}")))
            }
            None => Err(AnalysisError::Config(format!(
                "{metric}: method must be `delta`, `raw` or `derived: <formula>`, got `{value}`"
            ))),
        },
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Ordered, validated rule list.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    rules: Vec<DeltaRule>,
}

impl RuleSet {
    pub fn defaults() -> Self {
        let mut rules: Vec<DeltaRule> = catalog()
            .iter()
            .filter(|d| d.is_numeric())
            .map(|d| DeltaRule {
                metric: d.name.to_string(),
                method: match d.kind {
                    MetricKind::Counter => Method::Delta,
                    MetricKind::Gauge => Method::Raw,
                },
            })
            .collect();
        for (name, formula) in BUILTIN_DERIVED {
            rules.push(DeltaRule {
                metric: name.to_string(),
                method: Method::Derived(Expr::parse(formula).expect("built-in formula parses")),
            });
        }
        RuleSet { rules }
    }

    pub fn from_rules(rules: Vec<DeltaRule>) -> Result<Self, AnalysisError> {
        let set = RuleSet { rules };
        set.validate()?;
        Ok(set)
    }

    /// Defaults overridden by the INI text.
    pub fn parse_ini(text: &str) -> Result<Self, AnalysisError> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| AnalysisError::Config(e.to_string()))?;
        let mut rules = Self::defaults().rules;
        for (section, props) in ini.iter() {
            match section {
                None | Some("deltas") => {}
                Some(other) => return Err(AnalysisError::Config(format!("unknown section [{other}]"))),
            }
            for (metric, value) in props.iter() {
                let method = parse_method(metric, value)?;
                match rules.iter_mut().find(|r| r.metric == metric) {
                    Some(r) => r.method = method,
                    None => rules.push(DeltaRule { metric: metric.to_string(), method }),
                }
            }
        }
        Self::from_rules(rules)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| AnalysisError::Read { path: path.to_path_buf(), source })?;
        Self::parse_ini(&text)
    }

    pub fn rules(&self) -> &[DeltaRule] {
        &self.rules
    }

    pub fn get(&self, metric: &str) -> Option<&DeltaRule> {
        self.rules.iter().find(|r| r.metric == metric)
    }

    /// Non-catalog names must be derived; formulas may only use
    /// host/container metrics and rules defined earlier, which keeps the
    /// dependency graph acyclic.
    fn validate(&self) -> Result<(), AnalysisError> {
        for (i, rule) in self.rules.iter().enumerate() {
            if self.rules[..i].iter().any(|r| r.metric == rule.metric) {
                return Err(AnalysisError::Config(format!("duplicate rule for {}", rule.metric)));
            }
            let desc = lookup(&rule.metric);
            match (&rule.method, desc) {
                (_, Some(d)) if !d.is_numeric() => {
                    return Err(AnalysisError::Config(format!("{} is not numeric", rule.metric)));
                }
                (Method::Delta | Method::Raw, None) => {
                    return Err(AnalysisError::UnknownMetric(rule.metric.clone()));
                }
                (Method::Derived(_), Some(d)) if d.level == Level::Process => {
                    return Err(AnalysisError::Config(format!("{}: process metrics cannot be derived", rule.metric)));
                }
                (Method::Derived(_), None) if !valid_name(&rule.metric) => {
                    return Err(AnalysisError::Config(format!("invalid metric name `{}`", rule.metric)));
                }
                _ => {}
            }
            if let Method::Derived(expr) = &rule.method {
                for m in expr.metrics() {
                    let earlier = self.rules[..i].iter().any(|r| r.metric == m);
                    match lookup(m) {
                        Some(d) if d.level == Level::Process => {
                            return Err(AnalysisError::Config(format!(
                                "{}: formula uses process metric {m}",
                                rule.metric
                            )));
                        }
                        Some(d) if !d.is_numeric() => {
                            return Err(AnalysisError::Config(format!(
                                "{}: formula uses non-numeric {m}",
                                rule.metric
                            )));
                        }
                        _ if earlier => {}
                        Some(_) => {
                            return Err(AnalysisError::Config(format!(
                                "{}: formula uses {m}, which has no rule before it",
                                rule.metric
                            )));
                        }
                        None => return Err(AnalysisError::UnknownMetric(m.to_string())),
                    }
                }
            }
        }
        Ok(())
    }
}

/// Derivations every rule set starts with.
pub const BUILTIN_DERIVED: [(&str, &str); 2] =
    [("vBytesWritten", "vDiskSectorWrites * sectorSizeBytes"), ("vMemoryUsed", "vMemoryTotal - vMemoryFree")];
