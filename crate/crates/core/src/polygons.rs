//! Newton and Hodge polygons, the on-or-above comparison, and the top-slope
//! window dimension bound.

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::semilinear::SlopeMultiset;
use crate::series::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolygonError {
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(i64, i64),
    #[error("degree too small: the bound needs i >= 2, got {0}")]
    DegreeTooSmall(u32),
    #[error("invalid polygon: {0}")]
    Invalid(String),
}

/// Lower-convex polygon through integer abscissae, starting at (0, 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPolygon {
    /// Breakpoints (x, y) with x strictly increasing, starting at (0, 0).
    pub breakpoints: Vec<(i64, Rat)>,
}

impl ConvexPolygon {
    pub fn from_breakpoints(breakpoints: Vec<(i64, Rat)>) -> Result<Self, PolygonError> {
        if breakpoints.first() != Some(&(0, Rat::from_integer(0))) {
            return Err(PolygonError::Invalid("must start at (0,0)".into()));
        }
        let mut prev_slope: Option<Rat> = None;
        for w in breakpoints.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x1 <= x0 {
                return Err(PolygonError::Invalid("x not increasing".into()));
            }
            let slope = (y1 - y0) / Rat::from_integer(x1 - x0);
            if let Some(ps) = prev_slope {
                if slope < ps {
                    return Err(PolygonError::Invalid("slopes must be nondecreasing".into()));
                }
            }
            prev_slope = Some(slope);
        }
        Ok(ConvexPolygon { breakpoints })
    }

    pub fn width(&self) -> i64 {
        self.breakpoints.last().map(|&(x, _)| x).unwrap_or(0)
    }

    pub fn end_height(&self) -> Rat {
        self.breakpoints
            .last()
            .map(|&(_, y)| y)
            .unwrap_or_else(|| Rat::from_integer(0))
    }

    /// Value at integer abscissa inside [0, width].
    pub fn value_at(&self, x: i64) -> Rat {
        for w in self.breakpoints.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x >= x0 && x <= x1 {
                return y0 + (y1 - y0) / Rat::from_integer(x1 - x0) * Rat::from_integer(x - x0);
            }
        }
        self.end_height()
    }

    /// Canonical JSON: {"breakpoints": [[x, "num/den"], ...]}.
    pub fn to_json(&self) -> serde_json::Value {
        let pts: Vec<serde_json::Value> = self
            .breakpoints
            .iter()
            .map(|&(x, y)| {
                serde_json::json!([x, format!("{}/{}", y.numer(), y.denom())])
            })
            .collect();
        serde_json::json!({ "breakpoints": pts })
    }
}

/// Running-sum polygon of a slope multiset.
pub fn polygon_from_slopes(sm: &SlopeMultiset) -> ConvexPolygon {
    let mut breakpoints = vec![(0i64, Rat::from_integer(0))];
    let mut x = 0i64;
    let mut y = Rat::from_integer(0);
    for &(slope, mult) in &sm.slopes {
        x += mult as i64;
        y += slope * Rat::from_integer(mult as i64);
        breakpoints.push((x, y));
    }
    ConvexPolygon { breakpoints }
}

/// True iff P(x) >= Q(x) at every integer x; both polygons have integer
/// breakpoints so integer checks suffice by convexity. The witness is the
/// first violating abscissa.
pub fn lies_on_or_above(
    p: &ConvexPolygon,
    q: &ConvexPolygon,
) -> Result<(bool, Option<i64>), PolygonError> {
    if p.width() != q.width() {
        return Err(PolygonError::WidthMismatch(p.width(), q.width()));
    }
    for x in 0..=p.width() {
        if p.value_at(x) < q.value_at(x) {
            return Ok((false, Some(x)));
        }
    }
    Ok((true, None))
}

/// Hodge numbers h^{a, i-a} for a = 0..i in cohomological degree i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HodgeVector {
    pub degree: u32,
    pub numbers: Vec<u64>,
}

impl HodgeVector {
    pub fn new(degree: u32, numbers: Vec<u64>) -> Result<Self, PolygonError> {
        if numbers.len() != degree as usize + 1 {
            return Err(PolygonError::Invalid(format!(
                "degree {} needs {} Hodge numbers, got {}",
                degree,
                degree + 1,
                numbers.len()
            )));
        }
        Ok(HodgeVector { degree, numbers })
    }

    pub fn total(&self) -> u64 {
        self.numbers.iter().sum()
    }

    /// Hodge polygon: slope a with multiplicity h^{a, i-a}.
    pub fn polygon(&self) -> ConvexPolygon {
        let slopes: Vec<(Rat, usize)> = self
            .numbers
            .iter()
            .enumerate()
            .filter(|&(_, &h)| h > 0)
            .map(|(a, &h)| (Rat::from_integer(a as i64), h as usize))
            .collect();
        polygon_from_slopes(&SlopeMultiset { slopes })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowBound {
    pub degree: u32,
    pub bound: u64,
    pub kernel_lower_bound: Option<u64>,
}

/// Largest dimension d of the top slope window [i-1, i] consistent with the
/// Newton-above-Hodge comparison: d <= 2 h^{i,0} + h^{i-1,1}. When a total
/// dimension is supplied the complementary kernel bound is reported.
pub fn top_window_bound(h: &HodgeVector, total: Option<u64>) -> Result<WindowBound, PolygonError> {
    let i = h.degree;
    if i < 2 {
        return Err(PolygonError::DegreeTooSmall(i));
    }
    let hi = h.numbers[0]; // h^{i,0}
    let hi1 = h.numbers[1]; // h^{i-1,1}
    let bound = 2 * hi + hi1;
    let kernel = total.map(|t| t.saturating_sub(bound));
    Ok(WindowBound {
        degree: i,
        bound,
        kernel_lower_bound: kernel,
    })
}

/// Brute-force oracle: the largest d >= 0 satisfying the integer inequality
/// (i-1) d <= i h^i + (i-1) h^{i-1} + (i-2)(d - h^i - h^{i-1})
/// scanned directly.
pub fn top_window_bound_oracle(i: u32, hi: u64, hi1: u64) -> u64 {
    let i = i as i64;
    let hi = hi as i64;
    let hi1 = hi1 as i64;
    let mut best = 0;
    for d in 0..=(2 * hi + hi1 + 16) {
        let lhs = (i - 1) * d;
        let rhs = i * hi + (i - 1) * hi1 + (i - 2) * (d - hi - hi1);
        if lhs <= rhs {
            best = d;
        }
    }
    best as u64
}

pub fn slope_multiset_from_pairs(pairs: &[(i64, i64, usize)]) -> SlopeMultiset {
    SlopeMultiset {
        slopes: pairs
            .iter()
            .map(|&(n, d, m)| (Ratio::new(n, d), m))
            .collect(),
    }
}
