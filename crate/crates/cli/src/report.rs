//! Deterministic text and JSON report rendering.
//!
//! JSON documents carry `"schema": 1` and stable field names; expression
//! fields hold strings in the input grammar, so they re-parse against the
//! same system context. Text output is line-oriented with LF endings.

use helmholtz_core::construct::{LagrangianResult, ValidationMode};
use helmholtz_core::expr::{Verdict, ZeroCheck, ZeroSettings};
use helmholtz_core::helmholtz::{HelmholtzReport, OdeSystem, Overall};
use helmholtz_core::multiplier::MultiplierResult;
use helmholtz_core::Expr;
use serde::Serialize;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Serialize)]
struct SettingsDoc {
    seed: u64,
    samples: u32,
    tol: f64,
}

impl From<&ZeroSettings> for SettingsDoc {
    fn from(s: &ZeroSettings) -> Self {
        SettingsDoc {
            seed: s.seed,
            samples: s.samples,
            tol: s.tol,
        }
    }
}

#[derive(Serialize)]
struct EntryDoc {
    condition: String,
    i: usize,
    j: usize,
    residual: String,
    verdict: String,
    max_abs_numeric: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<BTreeMap<String, f64>>,
}

#[derive(Serialize)]
struct ConditionDoc {
    condition: String,
    vacuous: bool,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize)]
struct CheckSection {
    overall: String,
    conditions: Vec<ConditionDoc>,
}

fn verdict_str(v: &Verdict) -> &'static str {
    match v {
        Verdict::ProvenZero => "proven_zero",
        Verdict::NumericallyZero => "numerically_zero",
        Verdict::Nonzero(_) => "nonzero",
    }
}

fn overall_json(o: Overall) -> &'static str {
    match o {
        Overall::Pass => "pass",
        Overall::PassWithCaveat => "pass-with-caveat",
        Overall::Fail => "fail",
    }
}

fn overall_text(o: Overall) -> &'static str {
    match o {
        Overall::Pass => "PASS",
        Overall::PassWithCaveat => "PASS (numeric caveat)",
        Overall::Fail => "FAIL",
    }
}

fn witness_map(check: &ZeroCheck, coords: &[String]) -> Option<BTreeMap<String, f64>> {
    match &check.verdict {
        Verdict::Nonzero(point) => Some(
            point
                .iter()
                .map(|(v, x)| (v.display_with(coords), *x))
                .collect(),
        ),
        _ => None,
    }
}

fn check_section(report: &HelmholtzReport, coords: &[String]) -> CheckSection {
    CheckSection {
        overall: overall_json(report.overall).to_string(),
        conditions: report
            .conditions
            .iter()
            .map(|c| ConditionDoc {
                condition: c.condition.to_string(),
                vacuous: c.vacuous,
                entries: c
                    .entries
                    .iter()
                    .map(|e| EntryDoc {
                        condition: e.condition.to_string(),
                        i: e.i,
                        j: e.j,
                        residual: e.residual.pretty(coords),
                        verdict: verdict_str(&e.check.verdict).to_string(),
                        max_abs_numeric: e.check.max_abs,
                        witness: witness_map(&e.check, coords),
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn zero_check_text(check: &ZeroCheck, residual: &Expr, coords: &[String]) -> String {
    match &check.verdict {
        Verdict::ProvenZero => "PASS (residual 0)".to_string(),
        Verdict::NumericallyZero => format!(
            "PASS (residual {}, numerically zero, max |residual| = {})",
            residual.pretty(coords),
            check.max_abs
        ),
        Verdict::Nonzero(point) => {
            let witness: Vec<String> = point
                .iter()
                .map(|(v, x)| format!("{} = {}", v.display_with(coords), x))
                .collect();
            format!(
                "FAIL (residual {}, max |residual| = {}, witness: {})",
                residual.pretty(coords),
                check.max_abs,
                witness.join(", ")
            )
        }
    }
}

fn check_text(report: &HelmholtzReport, coords: &[String], out: &mut String) {
    for condition in &report.conditions {
        if condition.vacuous {
            out.push_str(&format!("{}: vacuous (n = 1)\n", condition.condition));
            continue;
        }
        for entry in &condition.entries {
            out.push_str(&format!(
                "{} ({},{}): {}\n",
                entry.condition,
                entry.i,
                entry.j,
                zero_check_text(&entry.check, &entry.residual, coords)
            ));
        }
    }
}

fn header_text(command: &str, input: &str, n: usize, settings: &ZeroSettings) -> String {
    format!(
        "command: {command}\ninput: {input}\nn = {n}\nsettings: seed = {}, samples = {}, tol = {}\n",
        settings.seed, settings.samples, settings.tol
    )
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckDoc<'a> {
    schema: u32,
    command: &'a str,
    input: &'a str,
    n: usize,
    settings: SettingsDoc,
    overall: String,
    conditions: Vec<ConditionDoc>,
}

pub fn render_check(
    report: &HelmholtzReport,
    sys: &OdeSystem,
    input: &str,
    format: Format,
) -> String {
    let coords = sys.coordinates();
    match format {
        Format::Json => {
            let section = check_section(report, coords);
            let doc = CheckDoc {
                schema: SCHEMA_VERSION,
                command: "check",
                input,
                n: report.n,
                settings: (&report.settings).into(),
                overall: section.overall,
                conditions: section.conditions,
            };
            to_json(&doc)
        }
        Format::Text => {
            let mut out = header_text("check", input, report.n, &report.settings);
            check_text(report, coords, &mut out);
            out.push_str(&format!("overall: {}\n", overall_text(report.overall)));
            out
        }
    }
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PartsDoc {
    velocity_part: String,
    linear_coeffs: Vec<String>,
    scalar_part: String,
}

#[derive(Serialize)]
struct ValidationEntryDoc {
    equation: usize,
    residual: String,
    verdict: String,
    max_abs_numeric: f64,
}

#[derive(Serialize)]
struct ValidationDoc {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    residuals: Vec<ValidationEntryDoc>,
}

#[derive(Serialize)]
struct ConstructionDoc {
    lagrangian: String,
    parts: PartsDoc,
    gauge_note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_note: Option<String>,
    validation: ValidationDoc,
}

#[derive(Serialize)]
struct ConstructDoc<'a> {
    schema: u32,
    command: &'a str,
    input: &'a str,
    n: usize,
    settings: SettingsDoc,
    check: CheckSection,
    constructed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    construction: Option<ConstructionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn construction_doc(result: &LagrangianResult, coords: &[String]) -> ConstructionDoc {
    let (mode, lambda) = match &result.validation.mode {
        ValidationMode::Exact => ("exact", None),
        ValidationMode::ViaMultiplier { factor } => {
            ("via-multiplier", Some(factor.pretty(coords)))
        }
    };
    ConstructionDoc {
        lagrangian: result.lagrangian.pretty(coords),
        parts: PartsDoc {
            velocity_part: result.velocity_part.pretty(coords),
            linear_coeffs: result
                .linear_coeffs
                .iter()
                .map(|h| h.pretty(coords))
                .collect(),
            scalar_part: result.scalar_part.pretty(coords),
        },
        gauge_note: result.gauge_note.to_string(),
        reference_note: result.reference_note.clone(),
        validation: ValidationDoc {
            mode: mode.to_string(),
            lambda,
            residuals: result
                .validation
                .residuals
                .iter()
                .map(|r| ValidationEntryDoc {
                    equation: r.equation,
                    residual: r.residual.pretty(coords),
                    verdict: verdict_str(&r.check.verdict).to_string(),
                    max_abs_numeric: r.check.max_abs,
                })
                .collect(),
        },
    }
}

fn construction_text(result: &LagrangianResult, coords: &[String], out: &mut String) {
    out.push_str(&format!(
        "lagrangian: {}\n",
        result.lagrangian.pretty(coords)
    ));
    out.push_str(&format!(
        "velocity part (G0): {}\n",
        result.velocity_part.pretty(coords)
    ));
    for (i, h) in result.linear_coeffs.iter().enumerate() {
        out.push_str(&format!(
            "linear coefficient H[{}]: {}\n",
            i + 1,
            h.pretty(coords)
        ));
    }
    out.push_str(&format!(
        "scalar part (H0): {}\n",
        result.scalar_part.pretty(coords)
    ));
    out.push_str(&format!("gauge note: {}\n", result.gauge_note));
    if let Some(note) = &result.reference_note {
        out.push_str(&format!("reference note: {note}\n"));
    }
    let mode = match &result.validation.mode {
        ValidationMode::Exact => "exact".to_string(),
        ValidationMode::ViaMultiplier { factor } => {
            format!("via multiplier {}", factor.pretty(coords))
        }
    };
    for r in &result.validation.residuals {
        out.push_str(&format!(
            "validation ({mode}): equation {}: {}\n",
            r.equation,
            zero_check_text(&r.check, &r.residual, coords)
        ));
    }
}

pub fn render_construct(
    report: &HelmholtzReport,
    outcome: Result<&LagrangianResult, &str>,
    sys: &OdeSystem,
    input: &str,
    format: Format,
) -> String {
    let coords = sys.coordinates();
    match format {
        Format::Json => {
            let doc = ConstructDoc {
                schema: SCHEMA_VERSION,
                command: "construct",
                input,
                n: report.n,
                settings: (&report.settings).into(),
                check: check_section(report, coords),
                constructed: outcome.is_ok(),
                construction: outcome.ok().map(|r| construction_doc(r, coords)),
                error: outcome.err().map(|e| e.to_string()),
            };
            to_json(&doc)
        }
        Format::Text => {
            let mut out = header_text("construct", input, report.n, &report.settings);
            check_text(report, coords, &mut out);
            match outcome {
                Ok(result) => {
                    construction_text(result, coords, &mut out);
                    out.push_str("overall: CONSTRUCTED\n");
                }
                Err(message) => {
                    out.push_str(&format!("construction: failed ({message})\n"));
                    out.push_str("overall: FAIL\n");
                }
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// multiplier
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct H3Doc {
    residual: String,
    verdict: String,
    max_abs_numeric: f64,
}

#[derive(Serialize)]
struct MultiplierDoc<'a> {
    schema: u32,
    command: &'a str,
    input: &'a str,
    n: usize,
    settings: SettingsDoc,
    supported: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    damping: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modified: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h3: Option<H3Doc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    construction: Option<ConstructionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn render_multiplier(
    outcome: Result<&MultiplierResult, &str>,
    sys: &OdeSystem,
    input: &str,
    settings: &ZeroSettings,
    format: Format,
) -> String {
    let coords = sys.coordinates();
    match format {
        Format::Json => {
            let doc = match outcome {
                Ok(res) => MultiplierDoc {
                    schema: SCHEMA_VERSION,
                    command: "multiplier",
                    input,
                    n: sys.n(),
                    settings: settings.into(),
                    supported: true,
                    lambda: Some(res.factor.pretty(coords)),
                    damping: Some(res.damping.pretty(coords)),
                    modified: Some(
                        res.modified
                            .equations()
                            .iter()
                            .map(|e| e.pretty(coords))
                            .collect(),
                    ),
                    h3: Some(H3Doc {
                        residual: "0".to_string(),
                        verdict: verdict_str(&res.h3.verdict).to_string(),
                        max_abs_numeric: res.h3.max_abs,
                    }),
                    construction: res
                        .construction
                        .as_ref()
                        .map(|r| construction_doc(r, coords)),
                    error: None,
                },
                Err(message) => MultiplierDoc {
                    schema: SCHEMA_VERSION,
                    command: "multiplier",
                    input,
                    n: sys.n(),
                    settings: settings.into(),
                    supported: false,
                    lambda: None,
                    damping: None,
                    modified: None,
                    h3: None,
                    construction: None,
                    error: Some(message.to_string()),
                },
            };
            to_json(&doc)
        }
        Format::Text => {
            let mut out = header_text("multiplier", input, sys.n(), settings);
            match outcome {
                Ok(res) => {
                    out.push_str(&format!("lambda: {}\n", res.factor.pretty(coords)));
                    out.push_str(&format!(
                        "damping coefficient: {}\n",
                        res.damping.pretty(coords)
                    ));
                    for (i, eq) in res.modified.equations().iter().enumerate() {
                        out.push_str(&format!(
                            "modified equation {}: {}\n",
                            i + 1,
                            eq.pretty(coords)
                        ));
                    }
                    out.push_str(&format!(
                        "H3 after multiplication (1,1): {}\n",
                        zero_check_text(&res.h3, &Expr::zero(), coords)
                    ));
                    if let Some(built) = &res.construction {
                        construction_text(built, coords, &mut out);
                    }
                    out.push_str("overall: CONSTRUCTED\n");
                }
                Err(message) => {
                    out.push_str("multiplier: unsupported\n");
                    out.push_str(&format!("reason: {message}\n"));
                    out.push_str("overall: UNSUPPORTED\n");
                }
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// roundtrip
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RoundtripDoc<'a> {
    schema: u32,
    command: &'a str,
    input: &'a str,
    n: usize,
    settings: SettingsDoc,
    lagrangian: String,
    equations: Vec<String>,
    overall: String,
    conditions: Vec<ConditionDoc>,
}

pub fn render_roundtrip(
    lagrangian: &Expr,
    sys: &OdeSystem,
    report: &HelmholtzReport,
    input: &str,
    format: Format,
) -> String {
    let coords = sys.coordinates();
    match format {
        Format::Json => {
            let section = check_section(report, coords);
            let doc = RoundtripDoc {
                schema: SCHEMA_VERSION,
                command: "roundtrip",
                input,
                n: report.n,
                settings: (&report.settings).into(),
                lagrangian: lagrangian.pretty(coords),
                equations: sys.equations().iter().map(|e| e.pretty(coords)).collect(),
                overall: section.overall,
                conditions: section.conditions,
            };
            to_json(&doc)
        }
        Format::Text => {
            let mut out = header_text("roundtrip", input, report.n, &report.settings);
            out.push_str(&format!("lagrangian: {}\n", lagrangian.pretty(coords)));
            for (i, eq) in sys.equations().iter().enumerate() {
                out.push_str(&format!("equation {}: {}\n", i + 1, eq.pretty(coords)));
            }
            check_text(report, coords, &mut out);
            out.push_str(&format!("overall: {}\n", overall_text(report.overall)));
            out
        }
    }
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serialization");
    s.push('\n');
    s
}
