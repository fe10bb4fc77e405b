//! Closed-form lower bounds on det(G)/μᵈ and their conversion to bounds on
//! the normalized maximal determinant Dbar(n) = D(n)/n^{n/2}.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::exactmath::MomentStats;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    ExpandDet,
    Chebyshev,
    ChebyshevOpt,
    ChebyshevLll,
    CantelliHoeffdingLll,
    CantelliHoeffdingNoLll,
    TwoParamCor5,
    TwoParamOpt,
    Sharpe,
}

impl BoundMethod {
    pub fn label(&self) -> &'static str {
        match self {
            BoundMethod::ExpandDet => "expand_det",
            BoundMethod::Chebyshev => "chebyshev",
            BoundMethod::ChebyshevOpt => "chebyshev_opt",
            BoundMethod::ChebyshevLll => "chebyshev_lll",
            BoundMethod::CantelliHoeffdingLll => "cantelli_hoeffding_lll",
            BoundMethod::CantelliHoeffdingNoLll => "cantelli_hoeffding_nolll",
            BoundMethod::TwoParamCor5 => "two_param_cor5",
            BoundMethod::TwoParamOpt => "two_param_opt",
            BoundMethod::Sharpe => "sharpe",
        }
    }

    pub fn all_table_methods() -> [BoundMethod; 8] {
        [
            BoundMethod::ExpandDet,
            BoundMethod::Chebyshev,
            BoundMethod::ChebyshevOpt,
            BoundMethod::ChebyshevLll,
            BoundMethod::CantelliHoeffdingLll,
            BoundMethod::CantelliHoeffdingNoLll,
            BoundMethod::TwoParamCor5,
            BoundMethod::TwoParamOpt,
        ]
    }
}

/// One bound method's output for a given (h, d).
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub applicable: bool,
    /// Lower bound on det(G)/μᵈ (or on D(n)/(h^{h/2}·μᵈ) for expand_det).
    pub ratio_bound: f64,
    pub lambda: Option<f64>,
    pub t: Option<f64>,
    /// Lower bound on Dbar(n); 0 when not applicable.
    pub dbar_bound: f64,
    pub notes: String,
}

fn report(
    stats: &MomentStats,
    d: usize,
    method: BoundMethod,
    ratio: f64,
    lambda: Option<f64>,
    t: Option<f64>,
    notes: impl Into<String>,
) -> BoundReport {
    let applicable = ratio > 0.0 && ratio.is_finite();
    BoundReport {
        method,
        applicable,
        ratio_bound: ratio,
        lambda,
        t,
        dbar_bound: if applicable {
            convert_dbar(stats, d, ratio)
        } else {
            0.0
        },
        notes: notes.into(),
    }
}

/// Error term η(h, d) swallowed by the determinant expansion for d <= 3.
pub fn eta(h: u64, d: usize) -> Result<f64> {
    match d {
        1 => Ok(0.0),
        2 => Ok(1.0),
        3 => Ok(5.0 * (h as f64).sqrt() + 3.0),
        _ => Err(Error::BadBorderWidth(d, "eta requires 1 <= d <= 3")),
    }
}

/// Determinant-expansion bound for d <= 3: ratio = 1 − η/μᵈ.
pub fn bound_expand_det(stats: &MomentStats, d: usize) -> Result<BoundReport> {
    let e = eta(stats.h, d)?;
    let ratio = 1.0 - e / stats.mu_f.powi(d as i32);
    Ok(report(stats, d, BoundMethod::ExpandDet, ratio, None, None, ""))
}

/// Chebyshev bound: ratio = 1 − d²/μ.
pub fn bound_chebyshev(stats: &MomentStats, d: usize) -> BoundReport {
    let ratio = 1.0 - (d * d) as f64 / stats.mu_f;
    report(stats, d, BoundMethod::Chebyshev, ratio, None, None, "")
}

/// Chebyshev with the optimal λ = √(d(d+σ²−1)): ratio = 1 − √(d³(d+σ²−1))/μ.
pub fn bound_chebyshev_opt(stats: &MomentStats, d: usize) -> BoundReport {
    let df = d as f64;
    let lambda = (df * (df + stats.sigma2_f - 1.0)).sqrt();
    let ratio = 1.0 - (df.powi(3) * (df + stats.sigma2_f - 1.0)).sqrt() / stats.mu_f;
    report(stats, d, BoundMethod::ChebyshevOpt, ratio, Some(lambda), None, "")
}

/// Chebyshev + local lemma: ratio = 1 − 2d√((d−1)e)/μ, with the easy d = 1
/// case returning 1.
pub fn bound_chebyshev_lll(stats: &MomentStats, d: usize) -> BoundReport {
    let ratio = if d == 1 {
        1.0
    } else {
        let df = d as f64;
        1.0 - 2.0 * df * ((df - 1.0) * E).sqrt() / stats.mu_f
    };
    report(stats, d, BoundMethod::ChebyshevLll, ratio, None, None, "")
}

fn two_param_ratio(d: usize, lambda: f64, t: f64) -> f64 {
    let df = d as f64;
    (1.0 - lambda - (df - 1.0) * t) * (1.0 - lambda + t).powi(d as i32 - 1)
}

/// Cantelli + Hoeffding bound; with `use_lll` the (λ, t) pair comes from the
/// local-lemma argument, otherwise from the sharper d < 10 variant.
pub fn bound_cantelli_hoeffding(
    stats: &MomentStats,
    d: usize,
    use_lll: bool,
) -> Result<BoundReport> {
    if d < 2 {
        return Err(Error::BadBorderWidth(d, "cantelli/hoeffding bounds need d >= 2"));
    }
    let df = d as f64;
    let tau = stats.tau_f;
    let (method, lambda, t) = if use_lll {
        (
            BoundMethod::CantelliHoeffdingLll,
            (4.0 * E * (df - 1.0) - 1.0).sqrt() * tau,
            (2.0 * (8.0 * E * (df - 1.0)).ln()).sqrt() / stats.mu_f,
        )
    } else {
        (
            BoundMethod::CantelliHoeffdingNoLll,
            (df * df - 1.0).sqrt() * tau,
            (2.0 * (2.0 * df * df).ln()).sqrt() / stats.mu_f,
        )
    };
    let hypothesis = lambda + (df - 1.0) * t <= 1.0;
    let ratio = two_param_ratio(d, lambda, t);
    let mut r = report(
        stats,
        d,
        method,
        ratio,
        Some(lambda),
        Some(t),
        if hypothesis { "" } else { "hypothesis lambda + (d-1)t <= 1 fails" },
    );
    r.applicable = r.applicable && hypothesis;
    if !r.applicable {
        r.dbar_bound = 0.0;
    }
    Ok(r)
}

/// Sufficient condition h >= πd²(4 + ln d) for the Cantelli/Hoeffding
/// hypothesis.
pub fn simple_condition(h: u64, d: usize) -> bool {
    let df = d as f64;
    h as f64 >= PI * df * df * (4.0 + df.ln())
}

/// ln[2d(d−1)].
pub fn big_l(d: usize) -> f64 {
    (2.0 * d as f64 * (d as f64 - 1.0)).ln()
}

/// Two-parameter bound at a chosen λ ∈ (0, 1); t is set so the tail budget
/// condition holds with equality: t² = 2(dτ²/λ² + L(d))/μ².
pub fn bound_two_param(stats: &MomentStats, d: usize, lambda: f64) -> Result<BoundReport> {
    bound_two_param_tagged(stats, d, lambda, BoundMethod::TwoParamCor5)
}

fn bound_two_param_tagged(
    stats: &MomentStats,
    d: usize,
    lambda: f64,
    method: BoundMethod,
) -> Result<BoundReport> {
    if d < 2 {
        return Err(Error::BadBorderWidth(d, "two-parameter bound needs d >= 2"));
    }
    if !(0.0..1.0).contains(&lambda) || lambda == 0.0 {
        return Err(Error::BadLambda(lambda));
    }
    let df = d as f64;
    let tau2 = stats.tau_f * stats.tau_f;
    let t = (2.0 * (df * tau2 / (lambda * lambda) + big_l(d)) / (stats.mu_f * stats.mu_f)).sqrt();
    let ratio = two_param_ratio(d, lambda, t);
    let mut r = report(stats, d, method, ratio, Some(lambda), Some(t), "");
    let feasible = 1.0 - lambda - (df - 1.0) * t > 0.0;
    r.applicable = r.applicable && feasible;
    if !r.applicable {
        r.dbar_bound = 0.0;
    }
    Ok(r)
}

/// Near-optimal λ = (2d(d−1)σ²/μ⁴)^(1/3).
pub fn lambda_cor5(stats: &MomentStats, d: usize) -> f64 {
    (2.0 * d as f64 * (d as f64 - 1.0) * stats.sigma2_f / stats.mu_f.powi(4)).powf(1.0 / 3.0)
}

/// Maximize the two-parameter ratio over λ ∈ (0, 1) by golden-section search
/// seeded at lambda_cor5, absolute λ tolerance 1e−10.
pub fn optimize_lambda(stats: &MomentStats, d: usize) -> Result<(f64, BoundReport)> {
    if d < 2 {
        return Err(Error::BadBorderWidth(d, "two-parameter bound needs d >= 2"));
    }
    let seed = lambda_cor5(stats, d);
    let objective = |lambda: f64| -> f64 {
        match bound_two_param_tagged(stats, d, lambda, BoundMethod::TwoParamOpt) {
            Ok(r) if r.applicable => r.ratio_bound,
            _ => f64::NEG_INFINITY,
        }
    };
    let mut lo = (seed / 10.0).max(1e-12);
    let mut hi = (50.0 * seed).min(0.9);
    if hi <= lo {
        hi = 0.9;
    }
    // unimodality check: value at the bracket midpoint should beat both ends;
    // otherwise fall back to a dense scan before refining
    let mid = 0.5 * (lo + hi);
    if !(objective(mid) >= objective(lo) && objective(mid) >= objective(hi)) {
        let mut best_x = f64::NAN;
        let mut best_v = f64::NEG_INFINITY;
        let mut x = 1e-4;
        while x < 1.0 {
            let v = objective(x);
            if v > best_v {
                best_v = v;
                best_x = x;
            }
            x += 1e-4;
        }
        if best_v == f64::NEG_INFINITY {
            let mut r = bound_two_param_tagged(stats, d, 0.5, BoundMethod::TwoParamOpt)?;
            r.applicable = false;
            r.dbar_bound = 0.0;
            r.notes = "no feasible lambda in (0, 1)".into();
            return Ok((f64::NAN, r));
        }
        lo = (best_x - 2e-4).max(1e-12);
        hi = (best_x + 2e-4).min(1.0 - 1e-12);
    }
    let lambda_star = golden_max(objective, lo, hi, 1e-10);
    let rep = bound_two_param_tagged(stats, d, lambda_star, BoundMethod::TwoParamOpt)?;
    Ok((lambda_star, rep))
}

/// Golden-section search for the maximum of a unimodal function on [a, b].
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Hadamard-minor bound for n = 4k − 1: returns ln D(4k−1) >= (2k−1)·ln(4k).
pub fn bound_sharpe(k: u64) -> f64 {
    (2 * k - 1) as f64 * ((4 * k) as f64).ln()
}

/// Dbar(4k−1) lower bound implied by [`bound_sharpe`].
pub fn sharpe_dbar(k: u64) -> f64 {
    let n = (4 * k - 1) as f64;
    (bound_sharpe(k) - n / 2.0 * n.ln()).exp()
}

/// Convert a det(G)/μᵈ bound into a Dbar(n) bound via log-space evaluation:
/// exp(d·ln μ + (h/2)·ln h − (n/2)·ln n + ln ratio), n = h + d.
pub fn convert_dbar(stats: &MomentStats, d: usize, ratio_bound: f64) -> f64 {
    assert!(ratio_bound > 0.0);
    let h = stats.h as f64;
    let n = h + d as f64;
    (d as f64 * stats.mu_f.ln() + h / 2.0 * h.ln() - n / 2.0 * n.ln() + ratio_bound.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// (2/(πe))^{d/2}·(1 − d²√(π/(2h))).
    Cor2,
    /// (2/(πe))^{d/2}·(1 − d√(2πe(d−1)/h))·e^{−d²/(2h)}.
    Cor3,
    /// The target constant (2/(πe))^{d/2}.
    TargetConst,
}

/// Published simplified Dbar bounds; non-positive values are a "not
/// applicable" signal, mirroring the sharper conversion's dashes.
pub fn closed_form_dbar(h: u64, d: usize, method: ClosedForm) -> f64 {
    let hf = h as f64;
    let df = d as f64;
    let lead = (2.0 / (PI * E)).powf(df / 2.0);
    match method {
        ClosedForm::Cor2 => lead * (1.0 - df * df * (PI / (2.0 * hf)).sqrt()),
        ClosedForm::Cor3 => {
            lead * (1.0 - df * (2.0 * PI * E * (df - 1.0) / hf).sqrt())
                * (-df * df / (2.0 * hf)).exp()
        }
        ClosedForm::TargetConst => lead,
    }
}

/// Determinant lower bound for M = I − E with e_ii <= δ and |e_ij| <= ε off
/// the diagonal: (1 − δ − (d−1)ε)(1 − δ + ε)^{d−1}.
pub fn perturbation_bound(d: usize, delta: f64, eps: f64) -> Result<f64> {
    if delta < 0.0 || eps < 0.0 || delta + (d as f64 - 1.0) * eps > 1.0 {
        return Err(Error::Precondition(format!(
            "need delta, eps >= 0 and delta + (d-1)eps <= 1, got d={d} delta={delta} eps={eps}"
        )));
    }
    Ok((1.0 - delta - (d as f64 - 1.0) * eps) * (1.0 - delta + eps).powi(d as i32 - 1))
}

/// All table methods evaluated at one (h, d).
pub fn evaluate_all(stats: &MomentStats, d: usize) -> Vec<BoundReport> {
    let mut rows = Vec::new();
    if (1..=3).contains(&d) {
        rows.push(bound_expand_det(stats, d).expect("d checked"));
    }
    rows.push(bound_chebyshev(stats, d));
    rows.push(bound_chebyshev_opt(stats, d));
    rows.push(bound_chebyshev_lll(stats, d));
    if d >= 2 {
        rows.push(bound_cantelli_hoeffding(stats, d, true).expect("d checked"));
        rows.push(bound_cantelli_hoeffding(stats, d, false).expect("d checked"));
        rows.push(
            bound_two_param(stats, d, lambda_cor5(stats, d)).expect("d checked"),
        );
        if let Ok((_, rep)) = optimize_lambda(stats, d) {
            rows.push(rep);
        }
    }
    rows
}

/// Table of bound reports for one h and several d values.
#[derive(Debug, Clone, Serialize)]
pub struct BoundTable {
    pub h: u64,
    pub columns: Vec<BoundColumn>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundColumn {
    pub d: usize,
    pub n: u64,
    pub reports: Vec<BoundReport>,
}

pub fn make_table(stats: &MomentStats, d_list: &[usize]) -> BoundTable {
    BoundTable {
        h: stats.h,
        columns: d_list
            .iter()
            .map(|&d| BoundColumn {
                d,
                n: stats.h + d as u64,
                reports: evaluate_all(stats, d),
            })
            .collect(),
    }
}

/// Round to four significant figures, the precision the tables print.
fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return "---".into();
    }
    if x == 0.0 {
        return "0.000".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let prec = (3 - exp).max(0) as usize;
    format!("{:.*}", prec, x)
}

impl BoundTable {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let width = 26usize;
        out.push_str(&format!("Lower bounds for h = {}\n", self.h));
        out.push_str(&format!("{:width$}", "Bound"));
        for col in &self.columns {
            out.push_str(&format!(
                "| {:>10} {:>9} {:>9} ",
                format!("|G|/mu^{}", col.d),
                "lambda",
                "t"
            ));
        }
        out.push('\n');
        for method in BoundMethod::all_table_methods() {
            let mut line = format!("{:width$}", method.label());
            for col in &self.columns {
                let rep = col.reports.iter().find(|r| r.method == method);
                match rep {
                    Some(r) if r.applicable => {
                        line.push_str(&format!(
                            "| {:>10} {:>9} {:>9} ",
                            format!("{:.4}", r.ratio_bound),
                            r.lambda.map_or("---".into(), sig4),
                            r.t.map_or("---".into(), sig4),
                        ));
                    }
                    _ => {
                        line.push_str(&format!("| {:>10} {:>9} {:>9} ", "---", "---", "---"));
                    }
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut cols = Vec::new();
        for col in &self.columns {
            let mut methods = serde_json::Map::new();
            for r in &col.reports {
                methods.insert(
                    r.method.label().to_string(),
                    serde_json::json!({
                        "ratio": r.ratio_bound,
                        "lambda": r.lambda,
                        "t": r.t,
                        "dbar": r.dbar_bound,
                        "applicable": r.applicable,
                    }),
                );
            }
            cols.push(serde_json::json!({
                "d": col.d,
                "n": col.n,
                "methods": methods,
            }));
        }
        serde_json::json!({ "schema": 1, "h": self.h, "columns": cols })
    }
}
