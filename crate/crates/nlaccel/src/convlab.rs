//! Scalar error-recursion laboratory for the three-point NL step.
//!
//! Model: three successive errors `e1, e2, e3` with `e2 > 0`, step ratios
//! `a1 = e2 / e1` and `a2 = e3 / e2`, a common base rate `|a1| = alpha` in
//! `(0, 1)`, and a second rate that is equal to, slower than, or faster than
//! the base: `|a2| = alpha`, `(1 + delta) alpha`, or `(1 - delta) alpha`.
//! Combined with the four sign patterns of `(a1, a2)` this yields twelve
//! cases. For each case the NL contraction factor `|e_NL / e3|` reduces to a
//! closed form in `(alpha, delta)`, which this module provides next to the
//! direct evaluation so the two can be checked against each other.
//!
//! For the faster same-sign cases the contraction factor crosses 1 at a
//! threshold `delta0(alpha)`; [`find_alpha_star`] locates the base rate at
//! which the case-3.2 threshold meets the line `delta = 1 - alpha`, i.e. the
//! rate above which NL contracts for every `|a2|` between `alpha^2` and
//! `alpha`.

use crate::error::{Error, Result};

/// Rate relation between the two consecutive error ratios.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateFamily {
    /// `|a2| = alpha`; `delta` is ignored.
    SameRate,
    /// `|a2| = (1 + delta) alpha` with `0 < delta < 1/alpha - 1`.
    SlowerDecay,
    /// `|a2| = (1 - delta) alpha` with `0 < delta < 1`.
    FasterDecay,
}

/// One of the twelve `family.variant` cases.
///
/// Sign patterns by variant: 1 -> `(+, +)`, 2 -> `(-, -)`, 3 -> `(+, -)`,
/// 4 -> `(-, +)` for `(sign a1, sign a2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvergenceCase {
    family: u8,
    variant: u8,
}

impl ConvergenceCase {
    pub fn new(family: u8, variant: u8) -> Result<Self> {
        if !(1..=3).contains(&family) {
            return Err(Error::invalid("family", "must be 1, 2 or 3"));
        }
        if !(1..=4).contains(&variant) {
            return Err(Error::invalid("variant", "must be 1..=4"));
        }
        Ok(ConvergenceCase { family, variant })
    }

    pub fn all() -> Vec<ConvergenceCase> {
        let mut v = Vec::with_capacity(12);
        for family in 1..=3 {
            for variant in 1..=4 {
                v.push(ConvergenceCase { family, variant });
            }
        }
        v
    }

    pub fn family(&self) -> u8 {
        self.family
    }

    pub fn variant(&self) -> u8 {
        self.variant
    }

    pub fn label(&self) -> String {
        format!("{}.{}", self.family, self.variant)
    }

    pub fn rate_family(&self) -> RateFamily {
        match self.family {
            1 => RateFamily::SameRate,
            2 => RateFamily::SlowerDecay,
            _ => RateFamily::FasterDecay,
        }
    }

    /// `(sign a1, sign a2)`.
    pub fn signs(&self) -> (f64, f64) {
        match self.variant {
            1 => (1.0, 1.0),
            2 => (-1.0, -1.0),
            3 => (1.0, -1.0),
            _ => (-1.0, 1.0),
        }
    }

    pub fn uses_delta(&self) -> bool {
        self.family != 1
    }

    /// Open admissible interval for `delta`, or `None` for family 1.
    pub fn delta_range(&self, alpha: f64) -> Option<(f64, f64)> {
        match self.rate_family() {
            RateFamily::SameRate => None,
            RateFamily::SlowerDecay => Some((0.0, 1.0 / alpha - 1.0)),
            RateFamily::FasterDecay => Some((0.0, 1.0)),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_delta(case: ConvergenceCase, alpha: f64, delta: f64) -> Result<()> {
    if let Some((lo, hi)) = case.delta_range(alpha) {
        if !(delta > lo && delta < hi) {
            return Err(Error::invalid(
                "delta",
                format!("case {} needs delta in ({lo}, {hi}), got {delta}", case.label()),
            ));
        }
    }
    Ok(())
}

/// Signed step ratios `(a1, a2)` for a case at `(alpha, delta)`.
pub fn rate_pair(case: ConvergenceCase, alpha: f64, delta: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    check_delta(case, alpha, delta)?;
    let (s1, s2) = case.signs();
    let mag2 = match case.rate_family() {
        RateFamily::SameRate => alpha,
        RateFamily::SlowerDecay => (1.0 + delta) * alpha,
        RateFamily::FasterDecay => (1.0 - delta) * alpha,
    };
    Ok((s1 * alpha, s2 * mag2))
}

/// Error triple `(e1, e2, e3)` realizing a case at scale `e2 > 0`.
pub fn synth_error_triple(
    case: ConvergenceCase,
    alpha: f64,
    delta: f64,
    e2: f64,
) -> Result<(f64, f64, f64)> {
    if !(e2 > 0.0) {
        return Err(Error::invalid("e2", "must be positive"));
    }
    let (a1, a2) = rate_pair(case, alpha, delta)?;
    Ok((e2 / a1, e2, a2 * e2))
}

/// Direct NL contraction factor `|e_NL / e3|` from an error triple.
pub fn nl_error_ratio(e1: f64, e2: f64, e3: f64) -> Result<f64> {
    if e3 == 0.0 {
        return Err(Error::invalid("e3", "must be non-zero"));
    }
    let denom = e3 - 2.0 * e2 + e1;
    if denom == 0.0 {
        return Err(Error::Numerical(
            "vanishing second difference in error triple".into(),
        ));
    }
    let d = e3 - e2;
    let e_nl = e3 - d * d / denom;
    Ok((e_nl / e3).abs())
}

/// Closed-form contraction factor `|e_NL / e3|` for a case at `(alpha, delta)`.
pub fn closed_form_ratio(case: ConvergenceCase, alpha: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_delta(case, alpha, delta)?;
    let a = alpha;
    let d = delta;
    let value = match (case.family, case.variant) {
        (1, 1) | (1, 2) => 0.0,
        (1, 3) => 2.0 / ((a + 1.0) * (a + 1.0) - 2.0).abs(),
        (1, 4) => 2.0 / ((a - 1.0) * (a - 1.0) - 2.0).abs(),
        (2, 1) => d / ((1.0 + d) * ((a - 1.0) * (a - 1.0) + d * a * a)),
        (2, 2) => d / ((1.0 + d) * ((a + 1.0) * (a + 1.0) + d * a * a)),
        (2, 3) => (d + 2.0) / ((1.0 + d) * ((a + 1.0) * (a + 1.0) - 2.0 + d * a * a).abs()),
        (2, 4) => (d + 2.0) / ((1.0 + d) * ((a - 1.0) * (a - 1.0) - 2.0 + d * a * a).abs()),
        (3, 1) => d / ((1.0 - d) * ((a - 1.0) * (a - 1.0) - d * a * a).abs()),
        (3, 2) => d / ((1.0 - d) * ((a + 1.0) * (a + 1.0) - d * a * a)),
        (3, 3) => (2.0 - d) / ((1.0 - d) * ((a + 1.0) * (a + 1.0) - 2.0 - d * a * a).abs()),
        (3, 4) => (2.0 - d) / ((1.0 - d) * ((a - 1.0) * (a - 1.0) - 2.0 - d * a * a).abs()),
        _ => unreachable!(),
    };
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "closed form for case {} is singular at alpha={alpha}, delta={delta}",
            case.label()
        )));
    }
    Ok(value)
}

/// Contraction threshold `delta0`: the `delta` at which the closed-form
/// factor reaches 1. Defined for the same-sign faster-decay cases 3.1/3.2.
pub fn delta0(case: ConvergenceCase, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = alpha;
    match (case.family, case.variant) {
        // Both roots are written with the conjugate pulled out: the raw
        // quadratic-formula numerator q - sqrt(q^2 - a^2 (1 -+ a)^2)
        // cancels catastrophically for small alpha.
        (3, 1) => {
            let q = a * a - a + 1.0;
            Ok((1.0 - a) * (1.0 - a) / (q + (2.0 * a * a - 2.0 * a + 1.0).sqrt()))
        }
        (3, 2) => {
            let q = a * a + a + 1.0;
            Ok((1.0 + a) * (1.0 + a) / (q + (2.0 * a * a + 2.0 * a + 1.0).sqrt()))
        }
        _ => Err(Error::invalid(
            "case",
            format!("delta0 is defined for cases 3.1 and 3.2, not {}", case.label()),
        )),
    }
}

/// Base rate at which the case-3.2 threshold satisfies
/// `delta0(alpha) = 1 - alpha`. Approximately 0.36110.
pub fn find_alpha_star() -> f64 {
    let case = ConvergenceCase { family: 3, variant: 2 };
    let g = |a: f64| delta0(case, a).unwrap() - (1.0 - a);
    let mut lo = 1e-9;
    let mut hi = 1.0 - 1e-9;
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// One evaluated grid point of the case table.
#[derive(Clone, Debug)]
pub struct CaseRow {
    pub case: ConvergenceCase,
    pub alpha: f64,
    pub delta: f64,
    pub e2: f64,
    pub direct: f64,
    pub closed: f64,
}

impl CaseRow {
    pub fn abs_diff(&self) -> f64 {
        (self.direct - self.closed).abs()
    }
}

/// Evaluates every case over the given grids.
///
/// `delta_fractions` are interior positions in `(0, 1)` mapped onto each
/// family's admissible `delta` interval; family 1 ignores them and records
/// `delta = 0`.
pub fn case_table(
    alphas: &[f64],
    delta_fractions: &[f64],
    e2_values: &[f64],
) -> Result<Vec<CaseRow>> {
    for &a in alphas {
        check_alpha(a)?;
    }
    for &f in delta_fractions {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::invalid("delta_fractions", "must lie in (0, 1)"));
        }
    }
    for &e2 in e2_values {
        if !(e2 > 0.0) {
            return Err(Error::invalid("e2_values", "must be positive"));
        }
    }
    let mut rows = Vec::new();
    for case in ConvergenceCase::all() {
        for &alpha in alphas {
            let deltas: Vec<f64> = match case.delta_range(alpha) {
                None => vec![0.0],
                Some((lo, hi)) => delta_fractions.iter().map(|f| lo + f * (hi - lo)).collect(),
            };
            for &delta in &deltas {
                for &e2 in e2_values {
                    let (e1, e2v, e3) = synth_error_triple(case, alpha, delta, e2)?;
                    let direct = nl_error_ratio(e1, e2v, e3)?;
                    let closed = closed_form_ratio(case, alpha, delta)?;
                    rows.push(CaseRow {
                        case,
                        alpha,
                        delta,
                        e2,
                        direct,
                        closed,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Default grid: alpha and interior fractions `0.1..=0.9` in steps of 0.1,
/// error scales `1e-6`, `1`, `1e6`.
pub fn default_case_table() -> Result<Vec<CaseRow>> {
    let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    case_table(&grid, &grid, &[1e-6, 1.0, 1e6])
}
