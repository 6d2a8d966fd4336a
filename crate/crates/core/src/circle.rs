//! Exact arithmetic on the circle `T = R/Z`.
//!
//! Points are stored as 64-bit fixed-point fractions of a turn (one tick is
//! `2^-64` of a turn), so reduction mod 1, translation, and integer multiples
//! `n*alpha` are exact. Closed oriented arcs are stored as a start point plus
//! a swept span in ticks; the span ranges over `[0, 2^64]` so a singleton and
//! the full circle are both representable.

use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Number of ticks in a full turn (`2^64`), as a `u128`.
pub const FULL_TURN: u128 = 1u128 << 64;

const TURN_F64: f64 = 18446744073709551616.0; // 2^64 exactly

/// A point of the circle `R/Z`, stored as ticks (`frac = ticks / 2^64`).
///
/// All group operations wrap mod 1 exactly; drift-free over arbitrarily many
/// compositions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CirclePoint {
    ticks: u64,
}

impl CirclePoint {
    pub const ZERO: Self = Self { ticks: 0 };
    pub const HALF: Self = Self { ticks: 1 << 63 };

    pub fn from_ticks(ticks: u64) -> Self {
        Self { ticks }
    }

    /// Nearest representable point to the real number `x` (reduced mod 1).
    pub fn from_f64(x: f64) -> Self {
        let f = x.rem_euclid(1.0);
        let t = (f * TURN_F64).round();
        if t >= TURN_F64 {
            Self { ticks: 0 }
        } else {
            Self { ticks: t as u64 }
        }
    }

    /// Nearest representable point to the rational `num/den`.
    pub fn from_fraction(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let num = (num % den) as u128;
        let q = (num << 64) / den as u128;
        let r = (num << 64) % den as u128;
        let rounded = q + u128::from(2 * r >= den as u128);
        Self {
            ticks: (rounded & (FULL_TURN - 1)) as u64,
        }
    }

    pub fn ticks(self) -> u64 {
        self.ticks
    }

    pub fn to_f64(self) -> f64 {
        self.ticks as f64 / TURN_F64
    }

    /// Exact integer multiple `n * self` on the circle.
    pub fn mul_int(self, n: i64) -> Self {
        let prod = (n as i128).wrapping_mul(self.ticks as i128);
        Self {
            ticks: prod.rem_euclid(1 << 64) as u64,
        }
    }

    /// Ticks swept moving from `self` to `to` in the positive direction.
    pub fn forward_ticks(self, to: Self) -> u64 {
        to.ticks.wrapping_sub(self.ticks)
    }

    /// Shift-invariant metric `min(|a-b|, 1-|a-b|)`, in `[0, 0.5]`.
    pub fn dist(self, other: Self) -> f64 {
        self.dist_ticks(other) as f64 / TURN_F64
    }

    /// Same metric in ticks (exact).
    pub fn dist_ticks(self, other: Self) -> u64 {
        let d = self.ticks.wrapping_sub(other.ticks);
        d.min(d.wrapping_neg())
    }
}

impl Add for CirclePoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            ticks: self.ticks.wrapping_add(rhs.ticks),
        }
    }
}

impl Sub for CirclePoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            ticks: self.ticks.wrapping_sub(rhs.ticks),
        }
    }
}

impl Neg for CirclePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            ticks: self.ticks.wrapping_neg(),
        }
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CirclePoint({})", self.to_f64())
    }
}

/// A point of the closed unit interval `[0, 1]`, in ticks over `[0, 2^64]`.
///
/// Lifts distinguish 0 from 1 (which coincide on the circle); they order the
/// fiber for CDF and quantile computations and are exact under complement
/// `y -> 1 - y`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lift {
    ticks: u128,
}

impl Lift {
    pub const ZERO: Self = Self { ticks: 0 };
    pub const ONE: Self = Self { ticks: FULL_TURN };

    pub fn from_ticks(ticks: u128) -> Self {
        assert!(ticks <= FULL_TURN, "lift out of range");
        Self { ticks }
    }

    pub fn from_point(p: CirclePoint) -> Self {
        Self {
            ticks: p.ticks() as u128,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        let t = (x.clamp(0.0, 1.0) * TURN_F64).round();
        if t >= TURN_F64 {
            Self::ONE
        } else {
            Self { ticks: t as u128 }
        }
    }

    pub fn ticks(self) -> u128 {
        self.ticks
    }

    /// Exact complement `1 - y`.
    pub fn complement(self) -> Self {
        Self {
            ticks: FULL_TURN - self.ticks,
        }
    }

    /// The underlying circle point (1 wraps to 0).
    pub fn to_point(self) -> CirclePoint {
        CirclePoint::from_ticks((self.ticks & (FULL_TURN - 1)) as u64)
    }

    pub fn as_f64(self) -> f64 {
        self.ticks as f64 / TURN_F64
    }
}

impl fmt::Debug for Lift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lift({})", self.as_f64())
    }
}

/// Classification of an arc by its swept span.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ArcKind {
    Singleton,
    Ordinary,
    FullCircle,
}

/// A closed oriented arc `[start, end]`: the set swept moving from `start`
/// in the positive direction for `span` ticks. Both endpoints are included.
///
/// `[a, a]` with span 0 is the singleton `{a}`; span `2^64` is the whole
/// circle. `[a, b] ∪ [b, a]` always covers the circle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Arc {
    start: CirclePoint,
    span: u128,
}

impl Arc {
    /// The positively oriented closed arc from `a` to `b`.
    ///
    /// When `a == b` the result is the full circle if `full_if_equal` is set
    /// and the singleton `{a}` otherwise.
    pub fn new(a: CirclePoint, b: CirclePoint, full_if_equal: bool) -> Self {
        let span = if a == b {
            if full_if_equal {
                FULL_TURN
            } else {
                0
            }
        } else {
            a.forward_ticks(b) as u128
        };
        Self { start: a, span }
    }

    pub fn full() -> Self {
        Self {
            start: CirclePoint::ZERO,
            span: FULL_TURN,
        }
    }

    pub fn singleton(p: CirclePoint) -> Self {
        Self { start: p, span: 0 }
    }

    /// Arc from `start` sweeping exactly `span` ticks.
    pub fn from_span(start: CirclePoint, span: u128) -> Self {
        assert!(span <= FULL_TURN, "span exceeds full turn");
        Self { start, span }
    }

    /// The arc `[0, y]` of the fiber, with `y` a lift in `[0, 1]`.
    pub fn from_zero_to(y: Lift) -> Self {
        Self {
            start: CirclePoint::ZERO,
            span: y.ticks(),
        }
    }

    pub fn start(&self) -> CirclePoint {
        self.start
    }

    pub fn end(&self) -> CirclePoint {
        self.start + CirclePoint::from_ticks((self.span & (FULL_TURN - 1)) as u64)
    }

    pub fn kind(&self) -> ArcKind {
        match self.span {
            0 => ArcKind::Singleton,
            FULL_TURN => ArcKind::FullCircle,
            _ => ArcKind::Ordinary,
        }
    }

    pub fn span_ticks(&self) -> u128 {
        self.span
    }

    /// Length in turns, in `[0, 1]`.
    pub fn length(&self) -> f64 {
        self.span as f64 / TURN_F64
    }

    /// Closed-arc membership under the positive-orientation convention.
    pub fn contains(&self, p: CirclePoint) -> bool {
        (self.start.forward_ticks(p) as u128) <= self.span
    }

    /// Translate the whole arc by `t`.
    pub fn translated(&self, t: CirclePoint) -> Self {
        Self {
            start: self.start + t,
            span: self.span,
        }
    }

    /// Image of `[a, b]` under the point reflection `t -> -t`, read as the
    /// oriented arc `[-a, -b]` (length becomes `1 - length` for ordinary
    /// arcs).
    pub fn reflected(&self) -> Self {
        let span = match self.span {
            0 => 0,
            FULL_TURN => FULL_TURN,
            s => FULL_TURN - s,
        };
        Self {
            start: -self.start,
            span,
        }
    }

    /// Exact total tick length of the intersection with `other`.
    ///
    /// The intersection of two wrapping arcs can have two components; both
    /// are summed. Endpoint touching contributes no length.
    pub fn overlap_ticks(&self, other: &Arc) -> u128 {
        // Work relative to self.start: A = [0, sa], B = [d, d + sb].
        let sa = self.span;
        let sb = other.span;
        let d = self.start.forward_ticks(other.start) as u128;
        let b_end = d + sb;
        // Component of B before the wrap point.
        let first = b_end.min(FULL_TURN).min(sa).saturating_sub(d);
        // Component of B after wrapping past a full turn.
        let second = b_end.saturating_sub(FULL_TURN).min(sa);
        first + second
    }

    /// Length in turns of the intersection with `other`.
    pub fn overlap_length(&self, other: &Arc) -> f64 {
        self.overlap_ticks(other) as f64 / TURN_F64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64) -> CirclePoint {
        CirclePoint::from_f64(x)
    }

    #[test]
    fn arc_conventions() {
        let a = Arc::new(pt(0.25), pt(0.75), false);
        assert_eq!(a.kind(), ArcKind::Ordinary);
        assert!((a.length() - 0.5).abs() < 1e-15);
        assert!(a.contains(pt(0.5)));

        let s = Arc::new(pt(0.0), pt(0.0), false);
        assert_eq!(s.kind(), ArcKind::Singleton);
        assert_eq!(s.length(), 0.0);
        assert!(s.contains(pt(0.0)));
        assert!(!s.contains(pt(0.5)));

        let f = Arc::new(pt(0.0), pt(0.0), true);
        assert_eq!(f.kind(), ArcKind::FullCircle);
        assert_eq!(f.length(), 1.0);
        assert!(f.contains(pt(0.123)));
    }

    #[test]
    fn wrapping_membership() {
        let a = Arc::new(pt(0.75), pt(0.25), false);
        assert!(a.contains(pt(0.0)));
        assert!(a.contains(pt(0.9)));
        assert!(!a.contains(pt(0.5)));
        assert!((a.length() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn endpoints_are_included() {
        let a = Arc::new(pt(0.3), pt(0.6), false);
        assert!(a.contains(pt(0.3)));
        assert!(a.contains(pt(0.6)));
    }

    #[test]
    fn overlap_examples() {
        let ov = |a: &Arc, b: &Arc| a.overlap_length(b);
        let a = Arc::new(pt(0.2), pt(0.6), false);
        let b = Arc::new(pt(0.4), pt(0.8), false);
        assert!((ov(&a, &b) - 0.2).abs() < 1e-15);

        // Intersection with two components: [0.2,0.3] and [0.9,0.95].
        let a = Arc::new(pt(0.9), pt(0.3), false);
        let b = Arc::new(pt(0.2), pt(0.95), false);
        assert!((ov(&a, &b) - 0.15).abs() < 1e-15);

        let a = Arc::new(pt(0.1), pt(0.2), false);
        let b = Arc::new(pt(0.3), pt(0.4), false);
        assert_eq!(ov(&a, &b), 0.0);
    }

    #[test]
    fn dist_examples() {
        assert!((pt(0.1).dist(pt(0.9)) - 0.2).abs() < 1e-15);
        assert_eq!(pt(0.37).dist(pt(0.37)), 0.0);
        assert!((pt(0.0).dist(pt(0.5)) - 0.5).abs() < 1e-18);
    }

    #[test]
    fn fraction_is_exact_for_dyadics() {
        assert_eq!(CirclePoint::from_fraction(1, 8).ticks(), 1u64 << 61);
        assert_eq!(CirclePoint::from_fraction(1, 2), CirclePoint::HALF);
        assert_eq!(CirclePoint::from_fraction(9, 8).ticks(), 1u64 << 61);
    }

    #[test]
    fn lift_complement_and_order() {
        let y = Lift::from_f64(0.3);
        assert_eq!(y.complement().complement(), y);
        assert_eq!(Lift::ZERO.complement(), Lift::ONE);
        assert!(Lift::ZERO < y && y < Lift::ONE);
        assert_eq!(Lift::ONE.to_point(), CirclePoint::ZERO);
    }

    proptest! {
        #[test]
        fn two_arcs_cover_circle(a: u64, b: u64, p: u64) {
            let (a, b, p) = (CirclePoint::from_ticks(a), CirclePoint::from_ticks(b), CirclePoint::from_ticks(p));
            let ab = Arc::new(a, b, true);
            let ba = Arc::new(b, a, true);
            prop_assert!(ab.contains(p) || ba.contains(p));
        }

        #[test]
        fn complementary_lengths(a: u64, b: u64) {
            prop_assume!(a != b);
            let (a, b) = (CirclePoint::from_ticks(a), CirclePoint::from_ticks(b));
            let s = Arc::new(a, b, false).span_ticks() + Arc::new(b, a, false).span_ticks();
            prop_assert_eq!(s, FULL_TURN);
        }

        #[test]
        fn overlap_symmetric_and_bounded(a: u64, sa in 0..=FULL_TURN, b: u64, sb in 0..=FULL_TURN) {
            let x = Arc::from_span(CirclePoint::from_ticks(a), sa);
            let y = Arc::from_span(CirclePoint::from_ticks(b), sb);
            let xy = x.overlap_ticks(&y);
            prop_assert_eq!(xy, y.overlap_ticks(&x));
            prop_assert!(xy <= sa.min(sb));
            prop_assert_eq!(x.overlap_ticks(&Arc::full()), sa);
        }

        #[test]
        fn dist_triangle_and_shift(a: u64, b: u64, c: u64) {
            let (a, b, c) = (CirclePoint::from_ticks(a), CirclePoint::from_ticks(b), CirclePoint::from_ticks(c));
            // Exact in ticks, so far below the 2^-50 budget.
            prop_assert!(a.dist_ticks(b) <= a.dist_ticks(c).saturating_add(c.dist_ticks(b)));
            prop_assert_eq!((a + c).dist_ticks(b + c), a.dist_ticks(b));
        }

        #[test]
        fn arc_splitting_is_additive(a: u64, s1 in 0..=FULL_TURN, s2 in 0..=FULL_TURN) {
            prop_assume!(s1 + s2 <= FULL_TURN);
            let start = CirclePoint::from_ticks(a);
            let whole = Arc::from_span(start, s1 + s2);
            let probe = Arc::from_span(CirclePoint::from_ticks(a.wrapping_add(12345)), FULL_TURN / 3);
            let left = Arc::from_span(start, s1);
            let right = Arc::from_span(whole.start() + CirclePoint::from_ticks((s1 & (FULL_TURN - 1)) as u64), s2);
            prop_assert_eq!(
                probe.overlap_ticks(&whole),
                probe.overlap_ticks(&left) + probe.overlap_ticks(&right)
            );
        }
    }
}
