//! Measurement tables: one row per family parameter with sizes, flatness,
//! shortest and canonical run lengths.

use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::compute_n;
use crate::families::{gen_2exp, gen_exp, gen_hp, gen_np, gen_weak, harness, NpInstance};
use crate::lang::{build, Artifact, CounterProgram};
use crate::replay::{replay, Policy};
use crate::search::{final_values, shortest_halting, SearchBudget, Verdict};
use crate::vass::{is_flat, validate_run, vass_size, Encoding, DEFAULT_CYCLE_BUDGET};

pub const FAMILIES: &[&str] = &["exp", "2exp", "np", "weak", "hp"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shortest {
    Found { length: String },
    Exhausted,
    BudgetExceeded,
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub family: String,
    pub param: u64,
    pub states: usize,
    pub transitions: usize,
    pub dimension: usize,
    pub size_unary: String,
    pub size_binary: String,
    pub flat: Option<bool>,
    pub bound: u64,
    pub shortest: Shortest,
    pub canonical: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_final: Option<u64>,
    /// Wall-clock milliseconds. Only filled in on request; never part of
    /// golden output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentReport {
    pub family: String,
    pub rows: Vec<ReportRow>,
}

/// The program measured for a parameter, the bound searched within, and the
/// canonical policy.
fn setup(family: &str, param: u64) -> Result<(CounterProgram, u64, Policy), String> {
    let e = |x: crate::families::FamilyError| x.to_string();
    Ok(match family {
        "exp" => {
            let n = compute_n(param).map_err(|x| x.to_string())?.to_u64().ok_or("N too large")?;
            (gen_exp(param).map_err(e)?, 2 * (param + 1) * n, Policy::new().count("pump", n - 1))
        }
        "2exp" => {
            let (p, meta) = gen_2exp(param as u32).map_err(e)?;
            let f = &meta.fractions.f;
            let bound = (&meta.n_can * f.numer() / f.denom() + 1u32).to_u64().unwrap_or(u64::MAX);
            (p, bound, Policy::new().count("pump", &meta.n_can - 1u32))
        }
        "np" => {
            // s_i = 1..k and s0 = k: always positive.
            if param == 0 {
                return Err("np needs k >= 1".into());
            }
            let inst = NpInstance::new(param, (1..=param).collect()).map_err(e)?;
            let bound = crate::verify::np_bound(&inst);
            let choices = (1..=param).map(|i| i == param).collect();
            (gen_np(&inst), bound, Policy::new().choices(choices))
        }
        "weak" => (gen_weak(param).map_err(e)?, 2 * param, Policy::new()),
        "hp" => {
            // HP(3,2) from x = 2^z, y = 0, z = param.
            let x0 = 1u64.checked_shl(param as u32).ok_or("z too large")?;
            let p = harness(&gen_hp(3, 2).map_err(e)?, &[x0, 0, param], &["y", "z"]);
            let peak = 3u64.pow(param as u32);
            (p, peak.max(param).max(1), Policy::new())
        }
        _ => return Err(format!("unknown family {family:?}")),
    })
}

fn row(family: &str, param: u64, budget: &SearchBudget, timing: bool) -> Result<ReportRow, String> {
    let started = Instant::now();
    let (p, bound, policy) = setup(family, param)?;
    let art: Artifact = build(&p).map_err(|e| e.to_string())?;
    let v = &art.compiled.vass;
    let b = SearchBudget {
        counter_bound: bound,
        ..*budget
    };
    let shortest = match shortest_halting(v, &b) {
        Ok(r) => match r.verdict {
            Verdict::Found(run) => Shortest::Found {
                length: run.len().to_string(),
            },
            Verdict::ExhaustedWithinBound => Shortest::Exhausted,
            Verdict::BudgetExceeded => Shortest::BudgetExceeded,
        },
        Err(e) => Shortest::Error {
            message: e.to_string(),
        },
    };
    let canonical = replay(&art, &policy)
        .ok()
        .filter(|o| o.halted && validate_run(v, &o.run).halting)
        .map(|o| o.run.len().to_string());
    let max_final = if family == "weak" {
        final_values(v, art.compiled.halt_state(), 0, &b)
            .ok()
            .and_then(|f| f.values.iter().max().copied())
    } else {
        None
    };
    Ok(ReportRow {
        family: family.to_string(),
        param,
        states: v.states.len(),
        transitions: v.transitions.len(),
        dimension: v.dimension,
        size_unary: vass_size(v, Encoding::Unary).to_string(),
        size_binary: vass_size(v, Encoding::Binary).to_string(),
        flat: is_flat(v, DEFAULT_CYCLE_BUDGET).ok().map(|r| r.is_flat),
        bound,
        shortest,
        canonical,
        max_final,
        wall_clock_ms: timing.then(|| started.elapsed().as_millis() as u64),
    })
}

/// One row per parameter, in the order given. Failures of a row are
/// reported in its `shortest` column without aborting the table.
pub fn measure(
    family: &str,
    params: &[u64],
    budget: &SearchBudget,
    timing: bool,
) -> Result<ExperimentReport, String> {
    if !FAMILIES.contains(&family) {
        return Err(format!("unknown family {family:?}; expected one of {FAMILIES:?}"));
    }
    let rows = params
        .iter()
        .map(|&p| {
            row(family, p, budget, timing).unwrap_or_else(|message| ReportRow {
                family: family.to_string(),
                param: p,
                states: 0,
                transitions: 0,
                dimension: 0,
                size_unary: "0".into(),
                size_binary: "0".into(),
                flat: None,
                bound: 0,
                shortest: Shortest::Error { message },
                canonical: None,
                max_final: None,
                wall_clock_ms: None,
            })
        })
        .collect();
    Ok(ExperimentReport {
        family: family.to_string(),
        rows,
    })
}

impl ExperimentReport {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let timing = self.rows.iter().any(|r| r.wall_clock_ms.is_some());
        let mut header = vec![
            "param", "states", "trans", "dim", "size(u)", "size(b)", "flat", "bound", "shortest", "canonical",
        ];
        let weak = self.rows.iter().any(|r| r.max_final.is_some());
        if weak {
            header.push("max_final");
        }
        if timing {
            header.push("ms");
        }
        let show = |o: &Option<String>| o.clone().unwrap_or_else(|| "-".into());
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut c = vec![
                    r.param.to_string(),
                    r.states.to_string(),
                    r.transitions.to_string(),
                    r.dimension.to_string(),
                    r.size_unary.clone(),
                    r.size_binary.clone(),
                    r.flat.map_or("-".into(), |f| if f { "yes" } else { "no" }.into()),
                    r.bound.to_string(),
                    match &r.shortest {
                        Shortest::Found { length } => length.clone(),
                        Shortest::Exhausted => "none".into(),
                        Shortest::BudgetExceeded => "budget".into(),
                        Shortest::Error { .. } => "error".into(),
                    },
                    show(&r.canonical),
                ];
                if weak {
                    c.push(r.max_final.map_or("-".into(), |m| m.to_string()));
                }
                if timing {
                    c.push(r.wall_clock_ms.map_or("-".into(), |m| m.to_string()));
                }
                c
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| cells.iter().map(|c| c[i].len()).chain([header[i].len()]).max().unwrap_or(0))
            .collect();
        let mut out = format!("family {}\n", self.family);
        let line = |cols: Vec<&str>, out: &mut String| {
            let parts: Vec<String> = cols.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  "));
        };
        line(header.clone(), &mut out);
        for c in &cells {
            line(c.iter().map(String::as_str).collect(), &mut out);
        }
        out
    }
}

/// Lengths as integers, for assertions.
pub fn shortest_length(r: &ReportRow) -> Option<BigInt> {
    match &r.shortest {
        Shortest::Found { length } => length.parse().ok(),
        _ => None,
    }
}
