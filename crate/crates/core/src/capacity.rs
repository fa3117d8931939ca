//! Capacity functions `f` applied to a user's path-loss-fading value.
//!
//! Every variant is stored as a [`Piecewise`] function: constant below the
//! first knot and above the last, an explicit value at each knot, and in
//! between products of linear factors. Products of capacity functions stay
//! in this form, so `(f·g)(t) = f(t)·g(t)` holds at every point.

use crate::error::{Error, Result};

/// Line through `(a, va)` and `(b, vb)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Linear {
    a: f64,
    b: f64,
    va: f64,
    vb: f64,
}

impl Linear {
    fn eval(&self, t: f64) -> f64 {
        self.va + (self.vb - self.va) * ((t - self.a) / (self.b - self.a))
    }

    fn slope(&self) -> f64 {
        (self.vb - self.va) / (self.b - self.a)
    }
}

/// Smooth part of a capacity function on an open interval between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    scale: f64,
    lines: Vec<Linear>,
}

impl Piece {
    fn constant(c: f64) -> Self {
        Piece {
            scale: c,
            lines: Vec::new(),
        }
    }

    /// `Some(c)` when the piece is the constant `c`.
    pub fn as_constant(&self) -> Option<f64> {
        if self.scale == 0.0 || self.lines.is_empty() {
            Some(self.scale)
        } else {
            None
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.lines.iter().fold(self.scale, |acc, l| acc * l.eval(t))
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if self.as_constant().is_some() {
            return 0.0;
        }
        let mut total = 0.0;
        for (j, lj) in self.lines.iter().enumerate() {
            let others: f64 = self
                .lines
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, l)| l.eval(t))
                .product();
            total += lj.slope() * others;
        }
        self.scale * total
    }

    fn times(&self, other: &Piece) -> Piece {
        let scale = self.scale * other.scale;
        if scale == 0.0 {
            return Piece::constant(0.0);
        }
        let mut lines = self.lines.clone();
        lines.extend_from_slice(&other.lines);
        Piece { scale, lines }
    }
}

/// Piecewise function on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    knots: Vec<f64>,
    at_knots: Vec<f64>,
    /// `pieces[i]` lives on `(knots[i], knots[i + 1])`.
    pieces: Vec<Piece>,
    head: f64,
    tail: f64,
}

impl Piecewise {
    fn constant(c: f64) -> Self {
        Piecewise {
            knots: Vec::new(),
            at_knots: Vec::new(),
            pieces: Vec::new(),
            head: c,
            tail: c,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn value_at_knot(&self, i: usize) -> f64 {
        self.at_knots[i]
    }

    pub fn piece(&self, i: usize) -> &Piece {
        &self.pieces[i]
    }

    /// Value on `[0, first knot)`.
    pub fn head(&self) -> f64 {
        self.head
    }

    /// Value beyond the last knot.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => self.at_knots[i],
            Err(0) => self.head,
            Err(i) if i == self.knots.len() => self.tail,
            Err(i) => self.pieces[i - 1].evaluate(t),
        }
    }

    /// The smooth part covering the open interval around `t` (not a knot).
    fn piece_around(&self, t: f64) -> Piece {
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(_) => unreachable!("piece_around called at a knot"),
            Err(0) => Piece::constant(self.head),
            Err(i) if i == self.knots.len() => Piece::constant(self.tail),
            Err(i) => self.pieces[i - 1].clone(),
        }
    }

    fn times(&self, other: &Piecewise) -> Piecewise {
        let mut knots: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let at_knots = knots
            .iter()
            .map(|&k| self.evaluate(k) * other.evaluate(k))
            .collect();
        let pieces = knots
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.piece_around(mid).times(&other.piece_around(mid))
            })
            .collect();
        Piecewise {
            knots,
            at_knots,
            pieces,
            head: self.head * other.head,
            tail: self.tail * other.tail,
        }
    }

    fn is_zero(&self) -> bool {
        self.head == 0.0
            && self.tail == 0.0
            && self.at_knots.iter().all(|&v| v == 0.0)
            && self.pieces.iter().all(|p| p.as_constant() == Some(0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    One,
    OutageIndicator { threshold: f64 },
    CoverageIndicator { threshold: f64 },
    PiecewiseConstant { breakpoints: Vec<f64>, rates: Vec<f64> },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    Product,
}

/// Nonnegative function of the path-loss-fading value `t ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityFunction {
    kind: Kind,
    repr: Piecewise,
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("threshold must be positive and finite, got {t}")))
    }
}

impl CapacityFunction {
    /// `f ≡ 1`: the cell capacity counts users.
    pub fn one() -> Self {
        CapacityFunction {
            kind: Kind::One,
            repr: Piecewise::constant(1.0),
        }
    }

    /// `f(t) = 1(t > T)`.
    pub fn outage_indicator(threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        Ok(CapacityFunction {
            kind: Kind::OutageIndicator { threshold },
            repr: Piecewise {
                knots: vec![threshold],
                at_knots: vec![0.0],
                pieces: Vec::new(),
                head: 0.0,
                tail: 1.0,
            },
        })
    }

    /// `f(t) = 1(t ≤ T)`.
    pub fn coverage_indicator(threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        Ok(CapacityFunction {
            kind: Kind::CoverageIndicator { threshold },
            repr: Piecewise {
                knots: vec![threshold],
                at_knots: vec![1.0],
                pieces: Vec::new(),
                head: 1.0,
                tail: 0.0,
            },
        })
    }

    /// `f(t) = Σ c_i 1(T_i ≤ t < T_{i+1})`; the last breakpoint may be `+∞`.
    pub fn piecewise_constant(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() || breakpoints.len() != rates.len() + 1 {
            return Err(Error::domain(
                "need n ≥ 1 rates and n + 1 breakpoints",
            ));
        }
        if !(breakpoints[0] > 0.0) {
            return Err(Error::domain("first breakpoint must be positive"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("breakpoints must be strictly ascending"));
        }
        if breakpoints[..rates.len()].iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("only the last breakpoint may be infinite"));
        }
        if rates.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::domain("rates must be finite and nonnegative"));
        }
        let n = rates.len();
        let open_ended = breakpoints[n].is_infinite();
        let knot_count = if open_ended { n } else { n + 1 };
        let knots = breakpoints[..knot_count].to_vec();
        let mut at_knots = rates.clone();
        if !open_ended {
            at_knots.push(0.0);
        }
        let pieces = rates[..knot_count - 1]
            .iter()
            .map(|&c| Piece::constant(c))
            .collect();
        let tail = if open_ended { rates[n - 1] } else { 0.0 };
        Ok(CapacityFunction {
            kind: Kind::PiecewiseConstant { breakpoints, rates },
            repr: Piecewise {
                knots,
                at_knots,
                pieces,
                head: 0.0,
                tail,
            },
        })
    }

    /// Linear interpolation of `(grid, values)`, zero outside the grid.
    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::domain("grid and values must be nonempty and of equal length"));
        }
        if grid.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::domain("grid must be finite and nonnegative"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("grid must be strictly ascending"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain("values must be finite and nonnegative"));
        }
        let pieces = grid
            .windows(2)
            .zip(values.windows(2))
            .map(|(g, v)| {
                if v[0] == v[1] {
                    Piece::constant(v[0])
                } else {
                    Piece {
                        scale: 1.0,
                        lines: vec![Linear {
                            a: g[0],
                            b: g[1],
                            va: v[0],
                            vb: v[1],
                        }],
                    }
                }
            })
            .collect();
        Ok(CapacityFunction {
            repr: Piecewise {
                knots: grid.clone(),
                at_knots: values.clone(),
                pieces,
                head: 0.0,
                tail: 0.0,
            },
            kind: Kind::Tabulated { grid, values },
        })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn piecewise(&self) -> &Piecewise {
        &self.repr
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.repr.evaluate(t)
    }

    /// Pointwise product; `One` is the identity.
    pub fn product(&self, other: &CapacityFunction) -> CapacityFunction {
        if self.kind == Kind::One {
            return other.clone();
        }
        if other.kind == Kind::One {
            return self.clone();
        }
        CapacityFunction {
            kind: Kind::Product,
            repr: self.repr.times(&other.repr),
        }
    }

    pub fn square(&self) -> CapacityFunction {
        self.product(self)
    }

    /// True when `f` vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.repr.is_zero()
    }

    /// Short label used in reports.
    pub fn name(&self) -> String {
        match &self.kind {
            Kind::One => "one".to_string(),
            Kind::OutageIndicator { threshold } => format!("outage({threshold})"),
            Kind::CoverageIndicator { threshold } => format!("coverage({threshold})"),
            Kind::PiecewiseConstant { rates, .. } => format!("piecewise({} bins)", rates.len()),
            Kind::Tabulated { grid, .. } => format!("tabulated({} nodes)", grid.len()),
            Kind::Product => "product".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f3() -> CapacityFunction {
        CapacityFunction::piecewise_constant(vec![1.0, 2.0, 3.0], vec![5.0, 7.0]).unwrap()
    }

    fn tab() -> CapacityFunction {
        CapacityFunction::tabulated(vec![0.5, 1.5, 2.0, 4.0], vec![0.0, 2.0, 2.0, 1.0]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(CapacityFunction::one().evaluate(17.3), 1.0);
        assert_eq!(f3().evaluate(2.5), 7.0);
        let cov = CapacityFunction::coverage_indicator(2.0).unwrap();
        assert_eq!(cov.evaluate(2.0), 1.0);
        assert_eq!(cov.evaluate(2.0 + 1e-12), 0.0);
        let out = CapacityFunction::outage_indicator(2.0).unwrap();
        assert_eq!(out.evaluate(2.0), 0.0);
        assert_eq!(out.evaluate(2.0 + 1e-12), 1.0);
    }

    #[test]
    fn piecewise_constant_bins_are_half_open() {
        let f = f3();
        assert_eq!(f.evaluate(0.0), 0.0);
        assert_eq!(f.evaluate(0.999), 0.0);
        assert_eq!(f.evaluate(1.0), 5.0);
        assert_eq!(f.evaluate(1.999), 5.0);
        assert_eq!(f.evaluate(2.0), 7.0);
        assert_eq!(f.evaluate(3.0), 0.0);
        assert_eq!(f.evaluate(1e9), 0.0);
        let open = CapacityFunction::piecewise_constant(vec![1.0, 2.0, f64::INFINITY], vec![5.0, 7.0])
            .unwrap();
        assert_eq!(open.evaluate(2.0), 7.0);
        assert_eq!(open.evaluate(1e300), 7.0);
        assert_eq!(open.piecewise().tail(), 7.0);
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_outside() {
        let f = tab();
        assert_eq!(f.evaluate(0.0), 0.0);
        assert_eq!(f.evaluate(0.5), 0.0);
        assert_eq!(f.evaluate(1.0), 1.0);
        assert_eq!(f.evaluate(1.75), 2.0);
        assert_eq!(f.evaluate(3.0), 1.5);
        assert_eq!(f.evaluate(4.0), 1.0);
        assert_eq!(f.evaluate(4.0001), 0.0);
    }

    #[test]
    fn constructor_validation() {
        assert!(CapacityFunction::outage_indicator(0.0).is_err());
        assert!(CapacityFunction::coverage_indicator(f64::NAN).is_err());
        assert!(CapacityFunction::piecewise_constant(vec![1.0, 1.0], vec![2.0]).is_err());
        assert!(CapacityFunction::piecewise_constant(vec![0.0, 1.0], vec![2.0]).is_err());
        assert!(CapacityFunction::piecewise_constant(vec![1.0, 2.0], vec![-2.0]).is_err());
        assert!(CapacityFunction::piecewise_constant(vec![1.0, 2.0, 3.0], vec![2.0]).is_err());
        assert!(CapacityFunction::tabulated(vec![1.0, 0.5], vec![1.0, 1.0]).is_err());
        assert!(CapacityFunction::tabulated(vec![0.5, 1.0], vec![1.0, -1.0]).is_err());
        assert!(CapacityFunction::tabulated(vec![], vec![]).is_err());
    }

    #[test]
    fn product_examples() {
        let cov = CapacityFunction::coverage_indicator(2.0).unwrap();
        let sq = cov.square();
        for t in [0.0, 1.0, 2.0, 2.0000001, 5.0] {
            assert_eq!(sq.evaluate(t), cov.evaluate(t));
        }
        assert_eq!(CapacityFunction::one().product(&f3()), f3());
        let out = CapacityFunction::outage_indicator(2.0).unwrap();
        let zero = out.product(&cov);
        assert!(zero.is_zero());
        for t in [0.0, 1.0, 2.0, 3.0] {
            assert_eq!(zero.evaluate(t), 0.0);
        }
        assert!(!cov.is_zero());
    }

    #[test]
    fn derivative_of_products() {
        let g = tab();
        let p = g.product(&g).product(&f3());
        let piecewise = p.piecewise();
        let t = 1.2;
        let i = piecewise.knots().iter().rposition(|&k| k < t).unwrap();
        let h = 1e-6;
        let fd = (p.evaluate(t + h) - p.evaluate(t - h)) / (2.0 * h);
        assert!((piecewise.piece(i).derivative(t) - fd).abs() < 1e-6);
    }

    fn any_function() -> impl Strategy<Value = CapacityFunction> {
        prop_oneof![
            Just(CapacityFunction::one()),
            (0.1f64..10.0).prop_map(|t| CapacityFunction::outage_indicator(t).unwrap()),
            (0.1f64..10.0).prop_map(|t| CapacityFunction::coverage_indicator(t).unwrap()),
            (prop::collection::vec(0.01f64..3.0, 2..6), prop::collection::vec(0.0f64..9.0, 1..5))
                .prop_map(|(gaps, rates)| {
                    let n = rates.len().min(gaps.len() - 1);
                    let mut bp = Vec::new();
                    let mut acc = 0.0;
                    for g in &gaps[..=n] {
                        acc += g;
                        bp.push(acc);
                    }
                    CapacityFunction::piecewise_constant(bp, rates[..n].to_vec()).unwrap()
                }),
            prop::collection::vec((0.01f64..2.0, 0.0f64..5.0), 1..8).prop_map(|nodes| {
                let mut acc = 0.0;
                let mut grid = Vec::new();
                let mut values = Vec::new();
                for (gap, v) in nodes {
                    acc += gap;
                    grid.push(acc);
                    values.push(v);
                }
                CapacityFunction::tabulated(grid, values).unwrap()
            }),
        ]
    }

    fn is_piecewise_constant(f: &CapacityFunction) -> bool {
        !matches!(f.kind(), Kind::Tabulated { .. })
    }

    proptest! {
        #[test]
        fn product_is_pointwise(f in any_function(), g in any_function(), ts in prop::collection::vec(0.0f64..20.0, 1000)) {
            let p = f.product(&g);
            let exact = is_piecewise_constant(&f) && is_piecewise_constant(&g);
            let mut probes = ts;
            probes.extend(f.piecewise().knots());
            probes.extend(g.piecewise().knots());
            for t in probes {
                let lhs = p.evaluate(t);
                let rhs = f.evaluate(t) * g.evaluate(t);
                if exact {
                    prop_assert_eq!(lhs, rhs);
                } else {
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), "{} vs {} at {}", lhs, rhs, t);
                }
                prop_assert!(f.square().evaluate(t) >= 0.0);
            }
        }
    }
}
