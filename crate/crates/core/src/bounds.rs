//! Closed-form bounds on the expected codeword length, each tagged with
//! whether its hypotheses hold on the given instance.

use serde::Serialize;

use crate::coding::ceil_log2;
use crate::dist::{
    binary_entropy, conditional_entropy, entropy, is_deterministic_function,
    per_symbol_conditional_entropies, Direction, JointDistribution, Pmf, MASS_TOL,
};
use crate::error::{Error, Result};
use crate::separation::{
    functional_separation, lift_separation, search_separations, Family, SearchMode, Separation,
};

/// One bound. `pre_ceiling` repeats the formula with every ceiling dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre_ceiling: Option<f64>,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_size: Option<usize>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Bound {
    pub fn exact(value: f64) -> Self {
        Bound {
            value: Some(value),
            pre_ceiling: None,
            applicable: true,
            key_size: None,
            note: String::new(),
        }
    }

    pub fn ceiled(value: f64, pre_ceiling: f64) -> Self {
        Bound {
            pre_ceiling: Some(pre_ceiling),
            ..Bound::exact(value)
        }
    }

    pub fn unavailable(note: impl Into<String>) -> Self {
        Bound {
            value: None,
            pre_ceiling: None,
            applicable: false,
            key_size: None,
            note: note.into(),
        }
    }

    fn when(mut self, applicable: bool, why_not: &str) -> Self {
        if !applicable {
            self.applicable = false;
            self.note = why_not.to_string();
        }
        self
    }

    fn key(mut self, key_size: usize) -> Self {
        self.key_size = Some(key_size);
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// The value if the bound applies.
    pub fn get(&self) -> Option<f64> {
        self.value.filter(|_| self.applicable)
    }
}

fn log2(v: f64) -> f64 {
    v.log2()
}

fn clog2(v: usize) -> f64 {
    ceil_log2(v) as f64
}

/// Quantities shared by all bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub nx: usize,
    pub ny: usize,
    pub support_x: usize,
    pub support_y: usize,
    pub h_x: f64,
    pub h_y_given_x: f64,
    pub h_x_given_y: f64,
    pub sum_h_y_given_x: f64,
    pub min_h_y_given_x: f64,
    pub x_function_of_y: bool,
    pub max_p_x: f64,
}

pub fn summarize(j: &JointDistribution) -> Summary {
    let per = per_symbol_conditional_entropies(j);
    let p_x = j.p_x();
    Summary {
        nx: j.nx(),
        ny: j.ny(),
        support_x: p_x.support_size(),
        support_y: j.p_y().support_size(),
        h_x: entropy(&p_x),
        h_y_given_x: conditional_entropy(j, Direction::YGivenX),
        h_x_given_y: conditional_entropy(j, Direction::XGivenY),
        sum_h_y_given_x: per.sum,
        min_h_y_given_x: per.min,
        x_function_of_y: is_deterministic_function(j, Direction::XGivenY),
        max_p_x: p_x.max_prob(),
    }
}

fn check_eps(eps: f64, h_x: f64) -> Result<()> {
    if eps.is_nan() || eps < 0.0 || eps > h_x + MASS_TOL {
        return Err(Error::EpsOutOfRange { eps, max: h_x });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBounds {
    /// `H(Y|X)`, also the perfect-privacy benchmark `h_0`.
    pub l1: Bound,
    /// `min_x H(Y|X=x) + ε` over all positive-mass x.
    pub l2: Bound,
    /// Same minimum restricted to strictly positive entropies.
    pub l2_nonzero: Bound,
    /// `H(Y|X) - H(X|Y) + ε`.
    pub l3: Bound,
    pub max_lower: Bound,
    /// `log2(1 / max_x P_X(x))`, valid when X = f(Y).
    pub logmax: Bound,
    /// `H(Y|X) - H(X|Y)`, valid for bounded leakage.
    pub thm4: Bound,
    pub thm4_logmax: Bound,
}

impl LowerBounds {
    /// Largest applicable lower bound for exactly ε-private codes.
    pub fn best_exact(&self) -> f64 {
        [&self.max_lower, &self.logmax]
            .iter()
            .filter_map(|b| b.get())
            .fold(f64::MIN, f64::max)
    }

    /// Largest applicable lower bound for codes leaking at most ε.
    pub fn best_bounded(&self) -> f64 {
        [&self.thm4, &self.thm4_logmax]
            .iter()
            .filter_map(|b| b.get())
            .fold(f64::MIN, f64::max)
    }
}

pub fn lower_bounds(j: &JointDistribution, eps: f64) -> Result<LowerBounds> {
    let s = summarize(j);
    check_eps(eps, s.h_x)?;
    let per = per_symbol_conditional_entropies(j);
    let l1 = s.h_y_given_x;
    let l2 = per.min + eps;
    let l3 = s.h_y_given_x - s.h_x_given_y + eps;
    let logmax = log2(1.0 / s.max_p_x);
    let thm4 = s.h_y_given_x - s.h_x_given_y;
    let not_functional = "X is not a deterministic function of Y";
    Ok(LowerBounds {
        l1: Bound::exact(l1),
        l2: Bound::exact(l2),
        l2_nonzero: per.min_nonzero.map_or_else(
            || Bound::unavailable("every H(Y|X=x) is zero"),
            |m| Bound::exact(m + eps),
        ),
        l3: Bound::exact(l3),
        max_lower: Bound::exact(l1.max(l2).max(l3)),
        logmax: Bound::exact(logmax).when(s.x_function_of_y, not_functional),
        thm4: Bound::exact(thm4),
        thm4_logmax: Bound::exact(logmax).when(s.x_function_of_y, not_functional),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm1Bounds {
    /// Entropy-coded U.
    pub eq12: Bound,
    /// Fixed-length U, as stated (without the revelation component).
    pub eq13: Bound,
    /// Fixed-length U including the revelation component T.
    pub eq13_parseable: Bound,
    /// Fixed-length U when X = f(Y).
    pub eq14: Bound,
}

/// Key size `|supp X|`; zero-mass symbols are never padded.
pub fn upper_thm1(j: &JointDistribution, eps: f64) -> Result<Thm1Bounds> {
    let s = summarize(j);
    check_eps(eps, s.h_x)?;
    let alpha = if s.h_x > 0.0 {
        (eps / s.h_x).min(1.0)
    } else {
        0.0
    };
    let h_alpha = binary_entropy(alpha)?;
    let base = s.sum_h_y_given_x + eps + h_alpha + 1.0;
    let nx = s.support_x;
    let card = (nx * (s.ny - 1) + 1) as f64;
    let key = nx;

    let eq12 = Bound::ceiled(base + clog2(nx), base + log2(nx as f64)).key(key);
    let eq13 = Bound::ceiled(
        card.log2().ceil() + clog2(nx),
        card.log2() + log2(nx as f64),
    )
    .key(key)
    .with_note("omits the revelation component's bits");
    let with_t = card * (nx + 1) as f64;
    let eq13_parseable = Bound::ceiled(
        with_t.log2().ceil() + clog2(nx),
        with_t.log2() + log2(nx as f64),
    )
    .key(key);

    let functional_card = s.support_y as i64 - s.support_x as i64 + 1;
    let eq14 = if functional_card <= 0 {
        Bound::unavailable("|Y| - |X| + 1 is not positive")
    } else {
        let prod = functional_card as f64 * (s.support_x + 1) as f64;
        Bound::ceiled(
            prod.log2().ceil() + clog2(s.support_x),
            prod.log2() + log2(s.support_x as f64),
        )
        .key(s.support_x)
        .when(s.x_function_of_y, "X is not a deterministic function of Y")
    };
    Ok(Thm1Bounds {
        eq12,
        eq13,
        eq13_parseable,
        eq14,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm3Bounds {
    pub h_x1: f64,
    pub h_x2: f64,
    pub shape: (usize, usize),
    /// X2 padded, X1 revealed; entropy-coded U.
    pub eq21: Bound,
    /// As `eq21` with fixed-length U.
    pub eq22: Bound,
    /// As `eq22` when X = f(Y).
    pub eq23: Bound,
    /// X1 padded, X2 revealed; entropy-coded U.
    pub eq24: Bound,
    /// As `eq24` with fixed-length U.
    pub eq24_fixed: Bound,
}

pub fn upper_thm3(j: &JointDistribution, separation: &Separation, eps: f64) -> Result<Thm3Bounds> {
    separation.check_split_shape()?;
    let s = summarize(j);
    let (r, c) = separation.shape();
    let (h1, h2) = (separation.h_x1(), separation.h_x2());
    let sum = s.sum_h_y_given_x;
    let x1_ok = eps + MASS_TOL >= h1;
    let x2_ok = eps + MASS_TOL >= h2;
    let below_x1 = "leakage budget below H(X1)";
    let below_x2 = "leakage budget below H(X2)";
    let card = (s.nx * (s.ny - 1) + 1) as f64;
    let functional_card = s.support_y as i64 - s.support_x as i64 + 1;

    let eq23 = if functional_card <= 0 {
        Bound::unavailable("|Y| - |X| + 1 is not positive")
    } else {
        let fc = functional_card as f64;
        Bound::ceiled(
            fc.log2().ceil() + clog2(c) + 2.0 + h1,
            fc.log2() + log2(c as f64) + 2.0 + h1,
        )
        .key(c)
        .when(s.x_function_of_y, "X is not a deterministic function of Y")
        .when(x1_ok, below_x1)
    };
    Ok(Thm3Bounds {
        h_x1: h1,
        h_x2: h2,
        shape: (r, c),
        eq21: Bound::ceiled(sum + h1 + 2.0 + clog2(c), sum + h1 + 2.0 + log2(c as f64))
            .key(c)
            .when(x1_ok, below_x1),
        eq22: Bound::ceiled(
            card.log2().ceil() + clog2(c) + 2.0 + h1,
            card.log2() + log2(c as f64) + 2.0 + h1,
        )
        .key(c)
        .when(x1_ok, below_x1),
        eq23,
        eq24: Bound::ceiled(sum + h2 + 2.0 + clog2(r), sum + h2 + 2.0 + log2(r as f64))
            .key(r)
            .when(x2_ok, below_x2),
        eq24_fixed: Bound::ceiled(
            card.log2().ceil() + clog2(r) + 2.0 + h2,
            card.log2() + log2(r as f64) + 2.0 + h2,
        )
        .key(r)
        .when(x2_ok, below_x2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm4Bounds {
    pub eq25: Bound,
    pub eq26: Bound,
}

pub fn lower_thm4(j: &JointDistribution, eps: f64) -> Result<Thm4Bounds> {
    let l = lower_bounds(j, eps)?;
    Ok(Thm4Bounds {
        eq25: l.thm4,
        eq26: l.thm4_logmax,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm5Bounds {
    /// Minimizing over separations with `H(X1) <= ε`.
    pub eq27: Bound,
    /// Minimizing over separations with `H(X2) <= ε`.
    pub eq28: Bound,
    /// `eq27` with the per-symbol sum replaced by the fixed-length U cost.
    pub eq27_finite_y: Bound,
    pub s1_objective: Option<f64>,
    pub s2_objective: Option<f64>,
    #[serde(skip)]
    pub s1_separation: Option<Separation>,
    #[serde(skip)]
    pub s2_separation: Option<Separation>,
    pub s1_optimal: Option<bool>,
}

pub fn upper_thm5(j: &JointDistribution, eps: f64, search_budget: u64) -> Result<Thm5Bounds> {
    let s = summarize(j);
    let p_x = j.p_x();
    let sum = s.sum_h_y_given_x;
    let card = (s.nx * (s.ny - 1) + 1) as f64;
    let s1 = search_separations(&p_x, eps, Family::S1, SearchMode::Auto, search_budget);
    let s2 = search_separations(&p_x, eps, Family::S2, SearchMode::Auto, search_budget);
    let describe = |e: &Error| match e {
        Error::EmptyFeasibleSet => "no separation meets the entropy threshold".to_string(),
        other => other.to_string(),
    };
    let (eq27, eq27_finite_y) = match &s1 {
        Ok(o) => (
            Bound::exact(sum + 2.0 + o.objective).key(o.key_size),
            Bound::exact(card.log2().ceil() + 2.0 + o.objective).key(o.key_size),
        ),
        Err(e) => (
            Bound::unavailable(describe(e)),
            Bound::unavailable(describe(e)),
        ),
    };
    let eq28 = match &s2 {
        Ok(o) => Bound::exact(sum + 2.0 + o.objective).key(o.key_size),
        Err(e) => Bound::unavailable(describe(e)),
    };
    for r in [&s1, &s2] {
        if let Err(e) = r {
            if !matches!(e, Error::EmptyFeasibleSet | Error::BudgetExceeded { .. }) {
                return Err(e.clone());
            }
        }
    }
    Ok(Thm5Bounds {
        eq27,
        eq28,
        eq27_finite_y,
        s1_objective: s1.as_ref().ok().map(|o| o.objective),
        s2_objective: s2.as_ref().ok().map(|o| o.objective),
        s1_optimal: s1.as_ref().ok().map(|o| o.optimal),
        s1_separation: s1.ok().map(|o| o.best),
        s2_separation: s2.ok().map(|o| o.best),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm6Bounds {
    pub shape: (usize, usize),
    /// Entropy-coded U, key size `|X1|`.
    pub eq30: Bound,
    /// Fixed-length U.
    pub eq31: Bound,
    /// Fixed-length U when X = f(Y).
    pub eq32: Bound,
}

/// Perfect-privacy bounds for a separation on which X2 = f(X1).
pub fn upper_thm6(j: &JointDistribution, separation: &Separation) -> Result<Thm6Bounds> {
    separation.functional_columns(&j.p_x())?;
    let s = summarize(j);
    let lifted = lift_separation(j, separation)?;
    let sum = per_symbol_conditional_entropies(&lifted).sum;
    let r = separation.shape().0;
    let card = (s.nx * (s.ny - 1) + 1) as f64;
    let functional_card = s.support_y as i64 - s.support_x as i64 + 1;
    let eq32 = if functional_card <= 0 {
        Bound::unavailable("|Y| - |X| + 1 is not positive")
    } else {
        let fc = functional_card as f64;
        Bound::ceiled(
            fc.log2().ceil() + clog2(r) + 1.0,
            fc.log2() + log2(r as f64) + 1.0,
        )
        .key(r)
        .when(s.x_function_of_y, "X is not a deterministic function of Y")
    };
    Ok(Thm6Bounds {
        shape: separation.shape(),
        eq30: Bound::ceiled(sum + 1.0 + clog2(r), sum + 1.0 + log2(r as f64)).key(r),
        eq31: Bound::ceiled(
            card.log2().ceil() + clog2(r) + 1.0,
            card.log2() + log2(r as f64) + 1.0,
        )
        .key(r),
        eq32,
    })
}

/// Pads only X1', a low-entropy factor of X1 being revealed:
/// `Σ_{x1} H(Y|X1=x1) + 2 + min {H(X1') + ⌈log2 |X1''|⌉}` over
/// separations of X1 with `H(X1') <= ε`.
pub fn upper_special_case(
    j: &JointDistribution,
    x1_separation: &Separation,
    eps: f64,
    search_budget: u64,
) -> Result<Bound> {
    x1_separation.functional_columns(&j.p_x())?;
    let lifted = lift_separation(j, x1_separation)?;
    let sum = per_symbol_conditional_entropies(&lifted).sum;
    let p_x1 = Pmf::from_probs(x1_separation.x1_pmf().to_vec())?;
    let out = search_separations(&p_x1, eps, Family::S1, SearchMode::Auto, search_budget)?;
    Ok(Bound::exact(sum + 2.0 + out.objective).key(out.key_size))
}

/// `⌈a⌉ + ⌈b⌉ <= ⌈a + b⌉ + 1`.
pub fn check_remark4(a: f64, b: f64) -> bool {
    a.ceil() + b.ceil() <= (a + b).ceil() + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBounds {
    pub thm1: Thm1Bounds,
    pub thm3: Option<Thm3Bounds>,
    pub thm5: Thm5Bounds,
    pub thm6: Option<Thm6Bounds>,
    pub special_case: Bound,
}

/// Every bound for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub eps: f64,
    pub summary: Summary,
    pub lower: LowerBounds,
    pub upper: UpperBounds,
    pub notes: Vec<String>,
}

/// Which separations the report evaluates the per-separation bounds on.
#[derive(Debug, Clone, Default)]
pub struct BoundsOptions {
    /// Split separation; defaults to the best S1 separation found.
    pub split: Option<Separation>,
    /// Separation with X2 = f(X1); defaults to [`functional_separation`].
    pub functional: Option<Separation>,
    pub search_budget: Option<u64>,
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

pub fn bounds_report(
    j: &JointDistribution,
    eps: f64,
    opts: &BoundsOptions,
) -> Result<BoundsReport> {
    let summary = summarize(j);
    let lower = lower_bounds(j, eps)?;
    let thm1 = upper_thm1(j, eps)?;
    let budget = opts.search_budget.unwrap_or(DEFAULT_SEARCH_BUDGET);
    let thm5 = upper_thm5(j, eps, budget)?;
    let mut notes = Vec::new();

    let split = opts.split.clone().or_else(|| thm5.s1_separation.clone());
    let thm3 = match split {
        Some(sep) => match upper_thm3(j, &sep, eps) {
            Ok(b) => Some(b),
            Err(e) => {
                notes.push(format!("split bounds skipped: {e}"));
                None
            }
        },
        None => {
            notes.push("split bounds skipped: no separation available".into());
            None
        }
    };

    let functional = match &opts.functional {
        Some(s) => s.clone(),
        None => functional_separation(&j.p_x())?,
    };
    let thm6 = match upper_thm6(j, &functional) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("perfect-privacy bounds skipped: {e}"));
            None
        }
    };
    let special_case = match upper_special_case(j, &functional, eps, budget) {
        Ok(b) => b,
        Err(e) => Bound::unavailable(e.to_string()),
    };
    if summary.min_h_y_given_x == 0.0 && lower.l2_nonzero.value.is_some() {
        notes.push("some H(Y|X=x) are zero; l2 uses the unfiltered minimum".into());
    }
    Ok(BoundsReport {
        eps,
        summary,
        lower,
        upper: UpperBounds {
            thm1,
            thm3,
            thm5,
            thm6,
            special_case,
        },
        notes,
    })
}

impl BoundsReport {
    /// `(name, bound)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, &Bound)> {
        let l = &self.lower;
        let u = &self.upper;
        let mut out: Vec<(&'static str, &Bound)> = vec![
            ("l1", &l.l1),
            ("l2", &l.l2),
            ("l2_nonzero", &l.l2_nonzero),
            ("l3", &l.l3),
            ("max_lower", &l.max_lower),
            ("logmax", &l.logmax),
            ("thm4", &l.thm4),
            ("thm4_logmax", &l.thm4_logmax),
            ("eq12", &u.thm1.eq12),
            ("eq13", &u.thm1.eq13),
            ("eq13_parseable", &u.thm1.eq13_parseable),
            ("eq14", &u.thm1.eq14),
        ];
        if let Some(t) = &u.thm3 {
            out.extend([
                ("eq21", &t.eq21),
                ("eq22", &t.eq22),
                ("eq23", &t.eq23),
                ("eq24", &t.eq24),
                ("eq24_fixed", &t.eq24_fixed),
            ]);
        }
        out.extend([
            ("eq27", &u.thm5.eq27),
            ("eq28", &u.thm5.eq28),
            ("eq27_finite_y", &u.thm5.eq27_finite_y),
        ]);
        if let Some(t) = &u.thm6 {
            out.extend([("eq30", &t.eq30), ("eq31", &t.eq31), ("eq32", &t.eq32)]);
        }
        out.push(("special_case", &u.special_case));
        out
    }

    /// Applicable upper bounds that fall below the best applicable lower bound.
    pub fn inconsistencies(&self) -> Vec<String> {
        let lower = self
            .lower
            .best_bounded()
            .max(self.lower.l1.get().unwrap_or(f64::MIN));
        self.entries()
            .into_iter()
            .skip(8)
            .filter(|(name, b)| *name != "eq13" && b.get().is_some_and(|v| v < lower - MASS_TOL))
            .map(|(name, b)| format!("{name} = {} below lower bound {lower}", b.value.unwrap()))
            .collect()
    }

    /// One header line and one data line; inapplicable bounds are left empty.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let entries = self.entries();
        let mut header = vec!["eps".to_string()];
        let mut row = vec![self.eps.to_string()];
        for (name, b) in &entries {
            header.push(name.to_string());
            row.push(b.get().map(|v| v.to_string()).unwrap_or_default());
        }
        let io = |e: csv::Error| Error::ParseError(e.to_string());
        w.write_record(&header).map_err(io)?;
        w.write_record(&row).map_err(io)?;
        let bytes = w
            .into_inner()
            .map_err(|e| Error::ParseError(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::ParseError(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::Separation;
    use approx::assert_abs_diff_eq;

    fn copy2() -> JointDistribution {
        JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap()
    }

    fn independent() -> JointDistribution {
        JointDistribution::from_matrix(vec![vec![0.12, 0.18, 0.3], vec![0.08, 0.12, 0.2]]).unwrap()
    }

    #[test]
    fn lower_on_binary_copy() {
        let l = lower_bounds(&copy2(), 0.5).unwrap();
        assert_abs_diff_eq!(l.l1.get().unwrap(), 0.0);
        assert_abs_diff_eq!(l.l2.get().unwrap(), 0.5);
        assert_abs_diff_eq!(l.l3.get().unwrap(), 0.5);
        assert_abs_diff_eq!(l.logmax.get().unwrap(), 1.0);
        assert_abs_diff_eq!(l.best_exact(), 1.0);
        assert!(l.l2_nonzero.get().is_none());
    }

    #[test]
    fn lower_on_independent() {
        let j = independent();
        let l = lower_bounds(&j, 0.0).unwrap();
        let h_y = entropy(&j.p_y());
        assert_abs_diff_eq!(l.max_lower.get().unwrap(), h_y, epsilon = 1e-12);
        assert_abs_diff_eq!(
            l.thm4.get().unwrap(),
            h_y - entropy(&j.p_x()),
            epsilon = 1e-12
        );
        assert!(l.logmax.get().is_none());
    }

    #[test]
    fn eps_range_checked() {
        assert!(matches!(
            lower_bounds(&copy2(), 1.5),
            Err(Error::EpsOutOfRange { .. })
        ));
        assert!(matches!(
            upper_thm1(&copy2(), -0.1),
            Err(Error::EpsOutOfRange { .. })
        ));
    }

    #[test]
    fn eps_bounds_on_binary_copy() {
        let t = upper_thm1(&copy2(), 0.5).unwrap();
        assert_abs_diff_eq!(t.eq12.get().unwrap(), 3.5);
        let z = upper_thm1(&copy2(), 0.0).unwrap();
        assert_abs_diff_eq!(z.eq12.get().unwrap(), 0.0 + 1.0 + 1.0);
        // |U| <= 3, (|X|+1) = 3: ceil(log2 9) + 1
        assert_abs_diff_eq!(t.eq13.get().unwrap(), 3.0);
        assert_abs_diff_eq!(t.eq13_parseable.get().unwrap(), 5.0);
        // (2 - 2 + 1)(3) -> ceil(log2 3) + 1
        assert_abs_diff_eq!(t.eq14.get().unwrap(), 3.0);
    }

    #[test]
    fn entropy_coded_bound_monotone_then_continuous() {
        let j = JointDistribution::from_matrix(vec![
            vec![0.2, 0.1, 0.0],
            vec![0.05, 0.25, 0.1],
            vec![0.0, 0.1, 0.2],
        ])
        .unwrap();
        let h = summarize(&j).h_x;
        let eq12 = |e: f64| upper_thm1(&j, e).unwrap().eq12.get().unwrap();
        let steps = 200;
        let mut prev = eq12(0.0);
        for i in 1..=steps {
            let e = h * i as f64 / steps as f64;
            let v = eq12(e);
            if e <= h / 2.0 {
                assert!(v >= prev - 1e-12);
            }
            assert!((v - prev).abs() < 0.1);
            prev = v;
        }
    }

    #[test]
    fn split_bounds_require_threshold() {
        let j = JointDistribution::from_matrix(vec![
            vec![0.2, 0.05],
            vec![0.05, 0.2],
            vec![0.2, 0.05],
            vec![0.05, 0.2],
        ])
        .unwrap();
        let sep = Separation::row_major(2, 2, &j.p_x()).unwrap();
        let t = upper_thm3(&j, &sep, 0.5).unwrap();
        assert!(t.eq21.get().is_none() && t.eq22.get().is_none() && t.eq24.get().is_none());
        assert!(t.eq21.value.is_some());
        let t = upper_thm3(&j, &sep, 1.0).unwrap();
        // 4 * h(0.2) + 1 + 2 + 1
        let expect = 4.0 * binary_entropy(0.2).unwrap() + 4.0;
        assert_abs_diff_eq!(t.eq21.get().unwrap(), expect, epsilon = 1e-12);
        assert_eq!(t.eq21.key_size, Some(2));
    }

    #[test]
    fn functional_bounds_on_parity() {
        // Y = X1 uniform binary, X2 = X1
        let j = JointDistribution::from_matrix(vec![
            vec![0.5, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.5],
        ])
        .unwrap();
        let sep = Separation::row_major(2, 2, &j.p_x()).unwrap();
        let t = upper_thm6(&j, &sep).unwrap();
        assert_abs_diff_eq!(t.eq30.get().unwrap(), 2.0);
        // ceil(log2(4 * 1 + 1)) + 1 + 1
        assert_abs_diff_eq!(t.eq31.get().unwrap(), 5.0);

        let dense = JointDistribution::from_matrix(vec![
            vec![0.25, 0.0],
            vec![0.25, 0.0],
            vec![0.0, 0.25],
            vec![0.0, 0.25],
        ])
        .unwrap();
        let sep = Separation::row_major(2, 2, &dense.p_x()).unwrap();
        assert_eq!(upper_thm6(&dense, &sep).unwrap_err(), Error::NotFunctional);
    }

    #[test]
    fn ceiling_sum_examples() {
        assert!(check_remark4(0.5, 0.5));
        assert!(check_remark4(1.2, 2.7));
        assert!(check_remark4(0.0, 0.0));
    }

    #[test]
    fn bounded_lower_examples() {
        let j = JointDistribution::from_matrix(vec![
            vec![0.25, 0.0, 0.0, 0.0],
            vec![0.0, 0.25, 0.0, 0.0],
            vec![0.0, 0.0, 0.25, 0.0],
            vec![0.0, 0.0, 0.0, 0.25],
        ])
        .unwrap();
        let t = lower_thm4(&j, 0.0).unwrap();
        assert_abs_diff_eq!(t.eq26.get().unwrap(), 2.0);
        assert_abs_diff_eq!(t.eq25.get().unwrap(), 0.0);
    }

    #[test]
    fn report_csv_has_two_lines() {
        let r = bounds_report(&copy2(), 0.5, &BoundsOptions::default()).unwrap();
        let csv = r.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert!(lines[0].starts_with("eps,l1,"));
    }

    #[test]
    fn report_is_consistent_on_small_instances() {
        let j = JointDistribution::from_matrix(vec![
            vec![0.1, 0.05, 0.05],
            vec![0.0, 0.2, 0.1],
            vec![0.15, 0.0, 0.05],
            vec![0.1, 0.1, 0.1],
        ])
        .unwrap();
        let h = summarize(&j).h_x;
        for e in [0.0, 0.25 * h, 0.5 * h, h] {
            let r = bounds_report(&j, e, &BoundsOptions::default()).unwrap();
            assert!(r.inconsistencies().is_empty(), "{:?}", r.inconsistencies());
        }
    }
}
