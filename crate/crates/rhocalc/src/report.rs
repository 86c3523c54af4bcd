//! Serializable summaries of verdicts, numbers, jets and residual records,
//! and a flat CSV trace format for nets. The JSON side is consumed by the
//! command-line driver; the CSV side is for plotting `ε ↦ |x_ε|` decay
//! curves in external tools.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::holo::{PartialDerivativeRecord, TaylorJet};
use crate::scalars::{Classification, GenNumber, Verdict};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComplexParts {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexParts {
    fn from(z: Complex64) -> ComplexParts {
        ComplexParts { re: z.re, im: z.im }
    }
}

/// Snapshot of a generalized number: the full classification plus the value
/// at the finest grid point in log-polar form.
#[derive(Clone, Debug, Serialize)]
pub struct NumberSummary {
    pub label: String,
    pub classification: Classification,
    pub tail_log_magnitude: f64,
    pub tail_phase: f64,
}

pub fn number_summary(label: &str, x: &GenNumber) -> Result<NumberSummary> {
    let classification = x.classify()?;
    let vals = x.values()?;
    let last = vals.last().copied().unwrap_or(crate::wide::WideComplex::ZERO);
    let (lm, ph) = if last.is_zero() {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (last.lm(), last.phase())
    };
    Ok(NumberSummary {
        label: label.to_string(),
        classification,
        tail_log_magnitude: lm,
        tail_phase: ph,
    })
}

/// Taylor jet with its fitted growth bounds, coefficients summarized.
#[derive(Clone, Debug, Serialize)]
pub struct JetSummary {
    pub q: f64,
    pub r: f64,
    pub bound: Verdict,
    pub coeffs: Vec<NumberSummary>,
}

pub fn jet_summary(jet: &TaylorJet) -> Result<JetSummary> {
    let mut coeffs = Vec::with_capacity(jet.coeffs.len());
    for (n, c) in jet.coeffs.iter().enumerate() {
        coeffs.push(number_summary(&format!("coeff[{n}]"), c)?);
    }
    Ok(JetSummary {
        q: jet.q,
        r: jet.r,
        bound: jet.bound_verdict.clone(),
        coeffs,
    })
}

/// Cauchy–Riemann residuals at a probe, with the derivative value.
#[derive(Clone, Debug, Serialize)]
pub struct CauchyRiemannSummary {
    pub negligible1: Verdict,
    pub negligible2: Verdict,
    pub residual1: NumberSummary,
    pub residual2: NumberSummary,
    pub fprime: NumberSummary,
}

pub fn cauchy_riemann_summary(rec: &PartialDerivativeRecord) -> Result<CauchyRiemannSummary> {
    Ok(CauchyRiemannSummary {
        negligible1: rec.negligible1.clone(),
        negligible2: rec.negligible2.clone(),
        residual1: number_summary("d1u - d2v", &rec.residual1)?,
        residual2: number_summary("d2u + d1v", &rec.residual2)?,
        fprime: number_summary("f'", &rec.fprime)?,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportItem {
    Verdict { name: String, verdict: Verdict },
    Number { name: String, summary: NumberSummary },
    Jet { name: String, summary: JetSummary },
    CauchyRiemann { name: String, summary: CauchyRiemannSummary },
    Note { name: String, text: String },
}

/// A run report: the gauge it was computed over and the items in execution
/// order. `failures` lists items whose verdict is not `True`, which is what
/// drives process exit codes.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub gauge: String,
    pub grid_len: usize,
    pub eps_first: f64,
    pub eps_last: f64,
    pub seed: Option<u64>,
    pub items: Vec<ReportItem>,
}

impl Report {
    pub fn new(gauge: &Gauge) -> Report {
        Report {
            gauge: gauge.name.clone(),
            grid_len: gauge.len(),
            eps_first: gauge.eps(0),
            eps_last: gauge.eps(gauge.len() - 1),
            seed: None,
            items: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Report {
        self.seed = Some(seed);
        self
    }

    pub fn push_verdict(&mut self, name: impl Into<String>, verdict: Verdict) {
        self.items.push(ReportItem::Verdict {
            name: name.into(),
            verdict,
        });
    }

    pub fn push_number(&mut self, name: impl Into<String>, x: &GenNumber) -> Result<()> {
        let name = name.into();
        let summary = number_summary(&name, x)?;
        self.items.push(ReportItem::Number { name, summary });
        Ok(())
    }

    pub fn push_jet(&mut self, name: impl Into<String>, jet: &TaylorJet) -> Result<()> {
        self.items.push(ReportItem::Jet {
            name: name.into(),
            summary: jet_summary(jet)?,
        });
        Ok(())
    }

    pub fn push_cauchy_riemann(
        &mut self,
        name: impl Into<String>,
        rec: &PartialDerivativeRecord,
    ) -> Result<()> {
        self.items.push(ReportItem::CauchyRiemann {
            name: name.into(),
            summary: cauchy_riemann_summary(rec)?,
        });
        Ok(())
    }

    pub fn push_note(&mut self, name: impl Into<String>, text: impl Into<String>) {
        self.items.push(ReportItem::Note {
            name: name.into(),
            text: text.into(),
        });
    }

    /// Names of items whose verdict is `False` or `Undecidable`.
    pub fn failures(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter_map(|item| match item {
                ReportItem::Verdict { name, verdict } if !verdict.is_true() => {
                    Some(name.as_str())
                }
                ReportItem::Jet { name, summary } if !summary.bound.is_true() => {
                    Some(name.as_str())
                }
                ReportItem::CauchyRiemann { name, summary }
                    if !(summary.negligible1.is_true() && summary.negligible2.is_true()) =>
                {
                    Some(name.as_str())
                }
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("report serialization: {e}")))
    }
}

/// One row of a net trace: the value of one tracked quantity at one grid
/// point, in log-polar form so that huge and tiny magnitudes plot cleanly.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub eps: f64,
    pub rho_eps: f64,
    pub object: String,
    pub quantity: String,
    pub log_magnitude: f64,
    pub phase: f64,
}

pub const TRACE_HEADER: &str = "eps,rho_eps,object,quantity,log_magnitude,phase";

/// Trace every grid sample of a generalized number.
pub fn trace_number(object: &str, quantity: &str, x: &GenNumber) -> Result<Vec<TraceRow>> {
    let gauge = x.gauge().clone();
    let vals = x.values()?;
    let mut rows = Vec::with_capacity(vals.len());
    for (k, v) in vals.iter().enumerate() {
        let (lm, ph) = if v.is_zero() {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (v.lm(), v.phase())
        };
        rows.push(TraceRow {
            eps: gauge.eps(k),
            rho_eps: gauge.log_rho(k).exp(),
            object: object.to_string(),
            quantity: quantity.to_string(),
            log_magnitude: lm,
            phase: ph,
        });
    }
    Ok(rows)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write rows as CSV, header included.
pub fn write_csv<W: Write>(w: &mut W, rows: &[TraceRow]) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.eps,
            r.rho_eps,
            csv_field(&r.object),
            csv_field(&r.quantity),
            r.log_magnitude,
            r.phase
        )?;
    }
    Ok(())
}

pub fn csv_string(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::VerdictValue;

    #[test]
    fn report_round_trips_through_json() {
        let gauge = Gauge::standard();
        let mut rep = Report::new(&gauge).with_seed(7);
        rep.push_verdict("always", Verdict::symbolic(VerdictValue::True, "by construction"));
        let x = GenNumber::parse("rho^2 + rho^3", gauge.clone()).unwrap();
        rep.push_number("tiny", &x).unwrap();
        rep.push_note("context", "smoke test");
        assert!(rep.failures().is_empty());
        let json = rep.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["seed"], 7);
        assert_eq!(v["items"][0]["kind"], "verdict");
        assert_eq!(v["items"][1]["kind"], "number");
        let order = &v["items"][1]["summary"]["classification"]["order"]["value"];
        assert_eq!(order["kind"], "Finite");
    }

    #[test]
    fn failures_catch_non_true_verdicts() {
        let gauge = Gauge::standard();
        let mut rep = Report::new(&gauge);
        rep.push_verdict("good", Verdict::symbolic(VerdictValue::True, ""));
        rep.push_verdict("bad", Verdict::sampled(VerdictValue::False, 10.0, "nope"));
        rep.push_verdict(
            "fuzzy",
            Verdict::sampled(VerdictValue::Undecidable, 10.0, "maybe"),
        );
        assert_eq!(rep.failures(), vec!["bad", "fuzzy"]);
    }

    #[test]
    fn traces_are_log_polar_and_quote_safely() {
        let gauge = Gauge::standard();
        let x = GenNumber::parse("rho^3", gauge.clone()).unwrap();
        let rows = trace_number("delta, wide", "abs", &x).unwrap();
        assert_eq!(rows.len(), gauge.len());
        let k = 5;
        assert!((rows[k].log_magnitude - 3.0 * gauge.log_rho(k)).abs() < 1e-12);
        assert!((rows[k].rho_eps - gauge.eps(k)).abs() < 1e-15);
        let csv = csv_string(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), TRACE_HEADER);
        assert!(lines.next().unwrap().contains("\"delta, wide\""));
    }

    #[test]
    fn zero_samples_trace_as_negative_infinity() {
        let gauge = Gauge::standard();
        let zero = GenNumber::zero(gauge.clone());
        let rows = trace_number("zero", "abs", &zero).unwrap();
        assert!(rows.iter().all(|r| r.log_magnitude == f64::NEG_INFINITY));
        let csv = csv_string(&rows);
        assert!(csv.contains("-inf"));
    }
}
