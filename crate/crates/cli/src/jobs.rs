//! One execution path shared by the subcommands and batch mode.

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use omaxcones::arch::{archimedeanize, default_samples, GeneratedCone};
use omaxcones::cones::{max_cone_test, min_cone_test, ConeBudget, ConeKind, ConeStatus};
use omaxcones::duality::{dual_cone_check, flat_adjoint, hilbert_schmidt_adjoint, MatrixMap};
use omaxcones::ebclass::{classify, EbStatus};
use omaxcones::norms::{dec_norm, min_norm, order_norm};
use omaxcones::verify::CertificateBundle;
use omaxcones::{BlockElement, ComplexMatrix};

const DEFAULT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ConeMinTest,
    ConeMaxTest,
    Classify,
    Norm,
    Flat,
    DualVerify,
    Arch,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ConeMinTest => "cone-min-test",
            Command::ConeMaxTest => "cone-max-test",
            Command::Classify => "classify",
            Command::Norm => "norm",
            Command::Flat => "flat",
            Command::DualVerify => "dual-verify",
            Command::Arch => "arch",
            Command::Selftest => "selftest",
        }
    }

    fn needs_input(self) -> bool {
        !matches!(self, Command::DualVerify | Command::Selftest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Order,
    Min,
    Dec,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobOptions {
    pub tol: Option<f64>,
    pub restarts: Option<usize>,
    pub iterations: Option<usize>,
    pub kind: Option<NormKind>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub samples: Option<usize>,
}

/// Job input, either raw file text (errors carry line and column) or an
/// already-parsed JSON value from a manifest.
pub enum Raw<'a> {
    Text(&'a str),
    Value(&'a Value),
}

pub fn decode<T: DeserializeOwned>(raw: &Raw) -> Result<T, String> {
    match raw {
        Raw::Text(s) => serde_json::from_str(s).map_err(|e| format!("malformed input: {e}")),
        Raw::Value(v) => T::deserialize(*v).map_err(|e| format!("malformed input: {e}")),
    }
}

pub struct Outcome {
    pub value: Value,
    pub undetermined: bool,
    pub bundle: Option<CertificateBundle>,
}

fn budget(opts: &JobOptions, seed: u64) -> ConeBudget {
    let d = ConeBudget::default();
    ConeBudget {
        restarts: opts.restarts.unwrap_or(d.restarts),
        iterations: opts.iterations.unwrap_or(d.iterations),
        tol: opts.tol.unwrap_or(d.tol),
        seed,
        ..d
    }
}

fn to_value<T: Serialize>(t: &T) -> Result<Value, String> {
    serde_json::to_value(t).map_err(|e| e.to_string())
}

fn cone_test(kind: ConeKind, raw: &Raw, opts: &JobOptions, seed: u64) -> Result<Outcome, String> {
    let element: BlockElement = decode(raw)?;
    let b = budget(opts, seed);
    let verdict = match kind {
        ConeKind::Min => min_cone_test(&element, &b),
        ConeKind::Max => max_cone_test(&element, &b),
    }
    .map_err(|e| e.to_string())?;
    Ok(Outcome {
        value: to_value(&verdict)?,
        undetermined: verdict.status == ConeStatus::Undetermined,
        bundle: Some(CertificateBundle::ConeTest { cone: kind, element, verdict }),
    })
}

pub fn execute(cmd: Command, raw: Option<&Raw>, opts: &JobOptions, seed: u64) -> Result<Outcome, String> {
    let raw = match (cmd.needs_input(), raw) {
        (true, None) => return Err(format!("{} needs an input", cmd.name())),
        (_, r) => r,
    };
    let plain = |value: Value| Outcome { value, undetermined: false, bundle: None };
    let e = |e: omaxcones::Error| e.to_string();
    match cmd {
        Command::ConeMinTest => cone_test(ConeKind::Min, raw.expect("input"), opts, seed),
        Command::ConeMaxTest => cone_test(ConeKind::Max, raw.expect("input"), opts, seed),
        Command::Classify => {
            let map: MatrixMap = decode(raw.expect("input"))?;
            let verdict = classify(&map, &budget(opts, seed)).map_err(e)?;
            Ok(Outcome {
                value: to_value(&verdict)?,
                undetermined: verdict.status == EbStatus::Undetermined,
                bundle: Some(CertificateBundle::Classification { map, verdict }),
            })
        }
        Command::Norm => {
            let v: ComplexMatrix = decode(raw.expect("input"))?;
            let tol = opts.tol.unwrap_or(DEFAULT_NORM_TOL);
            let kind = opts.kind.ok_or("norm needs a kind (order, min or dec)")?;
            let report = match kind {
                NormKind::Order => order_norm(&v),
                NormKind::Min => min_norm(&v, tol),
                NormKind::Dec => dec_norm(&v, tol, &ConeBudget { tol: ConeBudget::default().tol, ..budget(opts, seed) }),
            }
            .map_err(e)?;
            Ok(Outcome {
                value: json!({ "kind": kind, "report": report }),
                undetermined: report.undetermined > 0,
                bundle: None,
            })
        }
        Command::Flat => {
            let map: MatrixMap = decode(raw.expect("input"))?;
            Ok(plain(json!({
                "flat_adjoint": to_value(&flat_adjoint(&map))?,
                "hilbert_schmidt_adjoint": to_value(&hilbert_schmidt_adjoint(&map))?,
                "note": "flat_adjoint is Y ↦ Σ AᵗYBᵗ for X ↦ Σ AXB; hilbert_schmidt_adjoint conjugates as well and is not the flat adjoint",
            })))
        }
        Command::DualVerify => {
            let r = dual_cone_check(opts.n.unwrap_or(2), opts.m.unwrap_or(2), opts.samples.unwrap_or(500), seed)
                .map_err(e)?;
            Ok(plain(to_value(&r)?))
        }
        Command::Arch => {
            let cone: GeneratedCone = decode(raw.expect("input"))?;
            let samples = opts.samples.unwrap_or_else(|| default_samples(cone.dim));
            Ok(plain(to_value(&archimedeanize(&cone, samples, seed).map_err(e)?)?))
        }
        Command::Selftest => Ok(plain(to_value(&omaxcones::selftest::run(seed).map_err(e)?)?)),
    }
}
