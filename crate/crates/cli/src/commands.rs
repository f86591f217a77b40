use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use ati_core::deformation::{
    class_height_attainable, lift_bound_closed, lift_bound_oracle, DeformQuery,
};
use ati_core::germ::{germ_derivative_form, germ_extract};
use ati_core::matching::{
    afl_verify, ati_end_to_end, ati_growth_check, match_side, DiagOverrides, MatchContext,
};
use ati_core::orbital::{
    d_orb, orb_s, regularize_off_b0, transfer_factor, Level, OrbitData, RegularizeParams,
};
use ati_core::{Error, FieldSetup, Function, Rational};

/// Failure kinds, mapped to exit codes by the caller.
#[derive(Debug)]
pub enum Failure {
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;

fn config<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Config(msg.into()))
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    /// Tuples filtered out before evaluation.
    pub skipped: usize,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub config: Value,
    pub summary: Summary,
    pub pass: bool,
    pub rows: Vec<Value>,
}

impl Report {
    fn new(command: &'static str, config: Value, rows: Vec<Value>, skipped: usize) -> Report {
        let passed = rows
            .iter()
            .filter(|r| r["pass"] == Value::Bool(true))
            .count();
        let failed = rows.len() - passed;
        Report {
            schema: 1,
            command,
            config,
            summary: Summary {
                rows: rows.len(),
                passed,
                failed,
                skipped,
            },
            pass: failed == 0,
            rows,
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn error_row(mut key: Value, e: Error) -> Value {
    key["pass"] = Value::Bool(false);
    key["error"] = Value::String(e.to_string());
    key
}

fn setup(ramified: bool, q: u64) -> Outcome<FieldSetup> {
    Ok(if ramified {
        FieldSetup::ramified(q)?
    } else {
        FieldSetup::unramified(q)?
    })
}

pub fn afl(qs: &[u64], ts: &[u32], vbs: &[i64]) -> Outcome<Report> {
    for &q in qs {
        setup(false, q)?;
    }
    let mut tuples = Vec::new();
    for &q in qs {
        for &t in ts {
            for &v_b in vbs {
                tuples.push((q, t, v_b));
            }
        }
    }
    let rows: Vec<Value> = tuples
        .par_iter()
        .map(|&(q, t, v_b)| match afl_verify::<Rational>(q, t, v_b) {
            Ok(row) => to_value(&row),
            Err(e) => error_row(json!({"q": q, "t": t, "v_b": v_b}), e),
        })
        .collect();
    let cfg = json!({"q": qs, "t": ts, "v_b": vbs});
    Ok(Report::new("afl", cfg, rows, 0))
}

pub struct DeformArgs {
    pub ram: Vec<bool>,
    pub q: Vec<u64>,
    pub i: Vec<u32>,
    pub j: Vec<u32>,
    pub e: Vec<u64>,
    pub l: Vec<u32>,
    pub cross_check: bool,
}

pub fn deform(a: &DeformArgs) -> Outcome<Report> {
    let mut tuples = Vec::new();
    let mut skipped = 0;
    for &ram in &a.ram {
        for &q in &a.q {
            let s = setup(ram, q)?;
            for &i in &a.i {
                for &j in &a.j {
                    for &e in &a.e {
                        for &l in &a.l {
                            if class_height_attainable(&s, i, j, l) {
                                tuples.push(DeformQuery::new(s, i, j, e, l)?);
                            } else {
                                skipped += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let rows: Vec<Value> = tuples
        .par_iter()
        .map(|dq| {
            let key = json!({
                "ramified": dq.setup.ramified,
                "q": dq.setup.q,
                "i": dq.i,
                "j": dq.j,
                "e_rel": dq.e_rel,
                "l": dq.l,
                "case": dq.case(),
            });
            let closed = match lift_bound_closed(dq) {
                Ok(v) => v,
                Err(e) => return error_row(key, e),
            };
            let mut row = key;
            row["closed"] = to_value(&closed);
            let mut pass = true;
            if a.cross_check {
                match lift_bound_oracle(dq) {
                    Ok(o) => {
                        row["oracle"] = to_value(&o);
                        pass = o == closed;
                    }
                    Err(e) => return error_row(row, e),
                }
            }
            row["pass"] = Value::Bool(pass);
            row
        })
        .collect();
    let cfg = json!({
        "ramified": a.ram, "q": a.q, "i": a.i, "j": a.j, "e_rel": a.e, "l": a.l,
        "oracle_cross_check": a.cross_check,
    });
    Ok(Report::new("deform", cfg, rows, skipped))
}

pub fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Outcome<T> {
    let body = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .or_else(|e| config(format!("cannot read {what} file {path}: {e}")))?,
        None => text.to_string(),
    };
    serde_json::from_str(&body).or_else(|e| config(format!("invalid {what} JSON: {e}")))
}

pub fn orb(orbits: &[OrbitData], f: &Function) -> Outcome<Report> {
    f.validate()?;
    let rows = orbits
        .iter()
        .map(|g| {
            let key = json!({"orbit": g});
            let poly = match orb_s(g, f) {
                Ok(p) => p,
                Err(e) => return error_row(key, e),
            };
            let d = d_orb(g, f).expect("orb_s succeeded");
            let mut row = key;
            row["side"] = to_value(&match_side(g));
            row["omega"] = to_value(&transfer_factor(g));
            row["orb_s"] = to_value(&poly);
            row["orb"] = Value::String(poly.eval_at_s0().to_string());
            row["d_orb"] = to_value(&d);
            row["pass"] = Value::Bool(true);
            row
        })
        .collect();
    Ok(Report::new("orb", json!({"function": f}), rows, 0))
}

pub fn germ(s: FieldSetup, f: &Function, regularize: bool) -> Outcome<Report> {
    f.validate()?;
    let vanishes = f.vanishes_on_b0();
    let f = if !vanishes && regularize {
        regularize_off_b0(f, &RegularizeParams::default_for(&s))?
    } else {
        f.clone()
    };
    let row = match germ_extract(&f, &s) {
        Ok(g) => json!({
            "regularized": !vanishes && regularize,
            "germ": g,
            "derivative_form": germ_derivative_form(&g),
            "pass": true,
        }),
        Err(e @ Error::NotVanishingOnB0) => {
            return config(format!(
                "{e}; pass --regularize to remove the B0 value first"
            ))
        }
        Err(e) => error_row(json!({}), e),
    };
    Ok(Report::new(
        "germ",
        json!({"setup": s, "function": f}),
        vec![row],
        0,
    ))
}

pub struct AtiArgs {
    pub ram: Vec<bool>,
    pub q: Vec<u64>,
    pub i: Vec<u32>,
    pub j: Vec<u32>,
    pub e: Vec<u64>,
    pub t_max: Option<u32>,
    pub end_to_end: bool,
    pub span: u32,
    pub vb_abs: i64,
}

pub fn ati(a: &AtiArgs) -> Outcome<Report> {
    let mut ctxs = Vec::new();
    for &ram in &a.ram {
        for &q in &a.q {
            let s = setup(ram, q)?;
            for &i in &a.i {
                for &j in &a.j {
                    for &e in &a.e {
                        ctxs.push(MatchContext::from_e_rel(s, i, j, e)?);
                    }
                }
            }
        }
    }
    let rows: Vec<Value> = ctxs
        .par_iter()
        .flat_map_iter(|ctx| {
            let t_max = a.t_max.unwrap_or(ctx.i + ctx.j + 24);
            let mut regimes = vec![(Level::Infinite, Level::Infinite)];
            regimes.extend((0..ctx.i).map(|k| (Level::Finite(k), Level::Infinite)));
            regimes.extend((0..ctx.j).map(|k| (Level::Infinite, Level::Finite(k))));
            let mut out: Vec<Value> = regimes
                .into_iter()
                .map(|(la, ld)| {
                    let key = json!({"kind": "growth", "ctx": ctx, "lvl_a": la, "lvl_d": ld});
                    // bounded regimes need room to saturate
                    let t = if la.is_finite() || ld.is_finite() {
                        t_max + 16
                    } else {
                        t_max
                    };
                    match ati_growth_check(ctx, t, la, ld, DiagOverrides::default()) {
                        Ok(rep) => {
                            let mut v = to_value(&rep);
                            v["kind"] = json!("growth");
                            v
                        }
                        Err(e) => error_row(key, e),
                    }
                })
                .collect();
            if a.end_to_end {
                let key = json!({"kind": "end_to_end", "ctx": ctx});
                out.push(match ati_end_to_end::<Rational>(ctx, a.span, a.vb_abs) {
                    Ok(rep) => {
                        let mut v = to_value(&rep);
                        v["kind"] = json!("end_to_end");
                        v
                    }
                    Err(e) => error_row(key, e),
                });
            }
            out
        })
        .collect();
    let cfg = json!({
        "ramified": a.ram, "q": a.q, "i": a.i, "j": a.j, "e_rel": a.e, "t_max": a.t_max,
        "end_to_end": a.end_to_end, "span": a.span, "vb_abs": a.vb_abs,
    });
    Ok(Report::new("ati", cfg, rows, 0))
}
