//! The skew-product base layer: rotation angle from a continued fraction,
//! the odd trigonometric cocycle `r`, Birkhoff sums, the skew product
//! `S(x,y) = (x + alpha, y + r(x))`, and the involution `P(x,y) = (x + 1/2, 1 - y)`.
//!
//! The cocycle uses only odd frequencies, which forces `r(x + 1/2) = -r(x)`.
//! Evaluation folds phases into the first quarter turn in exact tick
//! arithmetic before calling `sin`, so that antisymmetry, `r(0) = 0` and
//! `r(1/2) = 0` hold bit-exactly, and hence `S` commutes with `P` with zero
//! residual.

use crate::circle::{CirclePoint, FULL_TURN};
use thiserror::Error;

/// One Fourier mode of the cocycle: `amp * sin(2 pi freq x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub freq: u64,
    pub amp: f64,
}

#[derive(Debug, Error)]
pub enum SkewError {
    #[error("continued fraction needs at least one partial quotient")]
    EmptyQuotients,
    #[error("partial quotient a_{index} must be positive")]
    ZeroQuotient { index: usize },
    #[error("convergent denominator overflows at a_{index}; shorten the recipe")]
    ConvergentOverflow { index: usize },
    #[error("cocycle needs at least one harmonic")]
    NoHarmonics,
    #[error("first harmonic must have frequency 1 (base mode of the positivity bound)")]
    BaseFrequency,
    #[error("harmonic frequency {freq} is even; odd frequencies are required for r(x+1/2) = -r(x)")]
    EvenFrequency { freq: u64 },
    #[error("harmonic amplitude must be positive (got {amp})")]
    NonPositiveAmplitude { amp: f64 },
    #[error("positivity margin violated: c1 - sum c_k q_k = {margin} <= 0")]
    PositivityMargin { margin: f64 },
    #[error("amplitude bound violated: scale * sum c_k = {total} >= 1/4")]
    AmplitudeBound { total: f64 },
    #[error("scale must be positive (got {scale})")]
    NonPositiveScale { scale: f64 },
}

/// Keep convergents comfortably inside `u128` so the exact resonance
/// arithmetic (`q * p mod q_K`) never overflows.
const MAX_CONVERGENT: u128 = 1 << 120;

/// A point of the 2-torus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct TorusPoint {
    pub x: CirclePoint,
    pub y: CirclePoint,
}

impl TorusPoint {
    pub fn new(x: CirclePoint, y: CirclePoint) -> Self {
        Self { x, y }
    }

    /// Product metric `max(d(x1,x2), d(y1,y2))`.
    pub fn dist(self, other: Self) -> f64 {
        self.x.dist(other.x).max(self.y.dist(other.y))
    }
}

/// The involution `P(x,y) = (x + 1/2, 1 - y)`; `1 - 0` reduces to `0`.
pub fn involution_p(z: TorusPoint) -> TorusPoint {
    TorusPoint::new(z.x + CirclePoint::HALF, -z.y)
}

/// Rotation angle recipe plus cocycle harmonics.
///
/// The angle is the value of the continued fraction `[0; a_1, a_2, ...]`,
/// rounded to the nearest tick; the exact rational value `p/q` of the last
/// convergent is kept for resonance diagnostics.
#[derive(Clone, Debug)]
pub struct CocycleSpec {
    partial_quotients: Vec<u64>,
    harmonics: Vec<Harmonic>,
    scale: f64,
    alpha: CirclePoint,
    /// Convergents `(p_k, q_k)` of the continued fraction, k = 1..
    convergents: Vec<(u128, u128)>,
}

impl CocycleSpec {
    /// Build and validate a spec. See [`CocycleSpec::validate`] for the checks.
    pub fn new(
        partial_quotients: Vec<u64>,
        harmonics: Vec<Harmonic>,
        scale: f64,
    ) -> Result<Self, SkewError> {
        let spec = Self::new_unvalidated(partial_quotients, harmonics, scale)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Build a spec computing the angle but skipping the cocycle invariants.
    ///
    /// Intended for diagnostics and negative controls (e.g. injecting an even
    /// harmonic to demonstrate that the verification battery catches it).
    pub fn new_unvalidated(
        partial_quotients: Vec<u64>,
        harmonics: Vec<Harmonic>,
        scale: f64,
    ) -> Result<Self, SkewError> {
        let convergents = convergents_of(&partial_quotients)?;
        let &(p, q) = convergents.last().expect("nonempty by construction");
        let alpha = CirclePoint::from_ticks(div_round_pow64(p, q));
        Ok(Self {
            partial_quotients,
            harmonics,
            scale,
            alpha,
            convergents,
        })
    }

    /// Check the cocycle invariants:
    /// - at least one harmonic, the first with frequency 1;
    /// - every frequency odd, every amplitude positive, scale positive;
    /// - positivity margin `c_1 - sum_{k>=2} c_k q_k > 0` (forces `r > 0` on
    ///   `(0, 1/2)` via `|sin n t| <= n |sin t|`);
    /// - amplitude bound `scale * sum c_k < 1/4`.
    pub fn validate(&self) -> Result<(), SkewError> {
        if self.harmonics.is_empty() {
            return Err(SkewError::NoHarmonics);
        }
        if self.scale <= 0.0 {
            return Err(SkewError::NonPositiveScale { scale: self.scale });
        }
        if self.harmonics[0].freq != 1 {
            return Err(SkewError::BaseFrequency);
        }
        for h in &self.harmonics {
            if h.freq % 2 == 0 {
                return Err(SkewError::EvenFrequency { freq: h.freq });
            }
            if h.amp <= 0.0 {
                return Err(SkewError::NonPositiveAmplitude { amp: h.amp });
            }
        }
        let margin = self.harmonics[0].amp
            - self.harmonics[1..]
                .iter()
                .map(|h| h.amp * h.freq as f64)
                .sum::<f64>();
        if margin <= 0.0 {
            return Err(SkewError::PositivityMargin { margin });
        }
        let total = self.scale * self.harmonics.iter().map(|h| h.amp).sum::<f64>();
        if total >= 0.25 {
            return Err(SkewError::AmplitudeBound { total });
        }
        Ok(())
    }

    /// The default fast-approximation recipe: quotients
    /// `[1, 20, 4000, 2*10^6, 2*10^9]` give odd convergent denominators
    /// `1, 21, 84001, 168002000021` with superexponentially small
    /// `||q_k alpha||`; harmonics sit on those denominators with
    /// `c_k = 4^{-k} / q_k` so every invariant holds with a wide margin.
    pub fn default_liouville() -> Self {
        let quotients = vec![1, 20, 4000, 2_000_000, 2_000_000_000];
        let harmonics = vec![
            Harmonic { freq: 1, amp: 1.0 },
            Harmonic {
                freq: 21,
                amp: 0.0625 / 21.0,
            },
            Harmonic {
                freq: 84_001,
                amp: 0.015_625 / 84_001.0,
            },
            Harmonic {
                freq: 168_002_000_021,
                amp: 0.003_906_25 / 168_002_000_021.0,
            },
        ];
        Self::new(quotients, harmonics, 0.24).expect("default spec is valid")
    }

    pub fn alpha(&self) -> CirclePoint {
        self.alpha
    }

    /// Exact rational value `(p, q)` of the full continued fraction.
    pub fn alpha_exact(&self) -> (u128, u128) {
        *self.convergents.last().expect("nonempty")
    }

    /// Convergents `(p_k, q_k)`, `k = 1..=len`.
    pub fn convergents(&self) -> &[(u128, u128)] {
        &self.convergents
    }

    pub fn partial_quotients(&self) -> &[u64] {
        &self.partial_quotients
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Distance of `n * alpha` to the nearest integer, using the exact
    /// rational angle.
    pub fn norm_dist(&self, n: u128) -> f64 {
        let (p, q) = self.alpha_exact();
        let m = mul_mod(n % q, p % q, q);
        let w = m.min(q - m);
        w as f64 / q as f64
    }

    /// Cocycle value `r(x) = scale * sum_k c_k sin(2 pi q_k x)`.
    ///
    /// Bit-exact antisymmetry: `r(x + 1/2) == -r(x)` for every `x`.
    pub fn r_eval(&self, x: CirclePoint) -> f64 {
        let t = x.ticks();
        let mut acc = 0.0;
        for h in &self.harmonics {
            let phase = (h.freq as u128).wrapping_mul(t as u128) as u64;
            acc += h.amp * sin_turn(phase);
        }
        self.scale * acc
    }

    /// `r(x)` rounded to signed ticks. The canonical value used whenever the
    /// cocycle translates circle points, so fiber translations are consistent
    /// across every code path.
    pub fn r_ticks(&self, x: CirclePoint) -> i64 {
        (self.r_eval(x) * FULL_TURN as f64).round() as i64
    }

    /// `r(x)` as a translation of the circle.
    pub fn r_point(&self, x: CirclePoint) -> CirclePoint {
        CirclePoint::from_ticks((self.r_ticks(x) as i128).rem_euclid(1 << 64) as u64)
    }

    /// Birkhoff sum `rho_n(x) = r(x) + r(x+alpha) + ... + r(x+(n-1)alpha)`.
    pub fn rho_n(&self, x: CirclePoint, n: u64) -> f64 {
        ticks_to_f64(self.rho_ticks(x, n))
    }

    /// Birkhoff sum in exact signed ticks (each term rounded once).
    pub fn rho_ticks(&self, x: CirclePoint, n: u64) -> i128 {
        let mut sums = BirkhoffSums::new(self, x);
        for _ in 0..n {
            sums.advance();
        }
        sums.sum_ticks()
    }

    /// The fiber translation of `rho_n(x)` reduced mod 1.
    pub fn rho_point(&self, x: CirclePoint, n: u64) -> CirclePoint {
        rho_ticks_to_point(self.rho_ticks(x, n))
    }

    /// `sigma_x^n(y) = y + rho_n(x)`.
    pub fn sigma_n(&self, x: CirclePoint, n: u64, y: CirclePoint) -> CirclePoint {
        y + self.rho_point(x, n)
    }

    /// One step of the skew product `S(x,y) = (x + alpha, y + r(x))`.
    pub fn parry_step(&self, z: TorusPoint) -> TorusPoint {
        TorusPoint::new(z.x + self.alpha, z.y + self.r_point(z.x))
    }

    /// Explicit inverse `S^{-1}(x,y) = (x - alpha, y - r(x - alpha))`.
    pub fn parry_inv(&self, z: TorusPoint) -> TorusPoint {
        let xp = z.x - self.alpha;
        TorusPoint::new(xp, z.y - self.r_point(xp))
    }

    /// Min/max statistics of `r` on a uniform grid (used by the validation
    /// battery: `0 < r < 1/4` on `(0, 1/2)` and `max |r| < 1/4`).
    pub fn r_grid_stats(&self, cells: usize) -> RGridStats {
        let mut max_abs = 0.0f64;
        let mut min_half = f64::INFINITY;
        let mut max_half = f64::NEG_INFINITY;
        let mut argmin_half = 0.0;
        for i in 0..cells {
            // Interior grid of (0, 1/2), mirrored to the other half by
            // antisymmetry.
            let frac = (i as f64 + 0.5) / cells as f64 * 0.5;
            let v = self.r_eval(CirclePoint::from_f64(frac));
            max_abs = max_abs.max(v.abs());
            if v < min_half {
                min_half = v;
                argmin_half = frac;
            }
            max_half = max_half.max(v);
        }
        RGridStats {
            max_abs,
            min_half,
            max_half,
            argmin_half,
        }
    }
}

/// Grid statistics of the cocycle on `(0, 1/2)`.
#[derive(Clone, Copy, Debug)]
pub struct RGridStats {
    pub max_abs: f64,
    pub min_half: f64,
    pub max_half: f64,
    pub argmin_half: f64,
}

/// Incremental Birkhoff-sum accumulator along the rotation orbit of one
/// point. Summation is exact in integer ticks, so incremental and fresh
/// evaluations agree bit-for-bit.
#[derive(Clone, Debug)]
pub struct BirkhoffSums<'a> {
    spec: &'a CocycleSpec,
    base: CirclePoint,
    sum: i128,
    n: u64,
}

impl<'a> BirkhoffSums<'a> {
    pub fn new(spec: &'a CocycleSpec, x: CirclePoint) -> Self {
        Self {
            spec,
            base: x,
            sum: 0,
            n: 0,
        }
    }

    /// Current orbit point `x + n alpha`.
    pub fn point(&self) -> CirclePoint {
        self.base
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sum_ticks(&self) -> i128 {
        self.sum
    }

    pub fn sum_f64(&self) -> f64 {
        ticks_to_f64(self.sum)
    }

    /// The translation `rho_n(x)` reduced mod 1.
    pub fn translation(&self) -> CirclePoint {
        rho_ticks_to_point(self.sum)
    }

    /// Add `r` at the current orbit point and advance to the next one.
    pub fn advance(&mut self) {
        self.sum += self.spec.r_ticks(self.base) as i128;
        self.base = self.base + self.spec.alpha();
        self.n += 1;
    }
}

fn ticks_to_f64(t: i128) -> f64 {
    t as f64 / FULL_TURN as f64
}

fn rho_ticks_to_point(t: i128) -> CirclePoint {
    CirclePoint::from_ticks(t.rem_euclid(1 << 64) as u64)
}

/// `sin(2 pi t)` with `t` in ticks, folded into the first quarter turn in
/// exact integer arithmetic. Guarantees `sin_turn(t + 1/2) == -sin_turn(t)`
/// and `sin_turn(0) == sin_turn(1/2) == 0` exactly.
fn sin_turn(ticks: u64) -> f64 {
    const HALF: u64 = 1 << 63;
    const QUARTER: u64 = 1 << 62;
    let (t, sign) = if ticks >= HALF {
        (ticks - HALF, -1.0)
    } else {
        (ticks, 1.0)
    };
    let folded = if t > QUARTER { HALF - t } else { t };
    sign * (std::f64::consts::TAU * (folded as f64 / FULL_TURN as f64)).sin()
}

fn convergents_of(quotients: &[u64]) -> Result<Vec<(u128, u128)>, SkewError> {
    if quotients.is_empty() {
        return Err(SkewError::EmptyQuotients);
    }
    let mut out = Vec::with_capacity(quotients.len());
    // p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1 for [0; a_1, a_2, ...].
    let (mut p_prev, mut q_prev) = (1u128, 0u128);
    let (mut p, mut q) = (0u128, 1u128);
    for (i, &a) in quotients.iter().enumerate() {
        if a == 0 {
            return Err(SkewError::ZeroQuotient { index: i + 1 });
        }
        let a = a as u128;
        let p_next = a
            .checked_mul(p)
            .and_then(|v| v.checked_add(p_prev))
            .filter(|&v| v < MAX_CONVERGENT)
            .ok_or(SkewError::ConvergentOverflow { index: i + 1 })?;
        let q_next = a
            .checked_mul(q)
            .and_then(|v| v.checked_add(q_prev))
            .filter(|&v| v < MAX_CONVERGENT)
            .ok_or(SkewError::ConvergentOverflow { index: i + 1 })?;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        out.push((p, q));
    }
    Ok(out)
}

/// `round(p * 2^64 / q)` for `0 <= p < q`, by binary long division
/// (no 256-bit intermediate needed).
fn div_round_pow64(p: u128, q: u128) -> u64 {
    debug_assert!(p < q && q < MAX_CONVERGENT);
    let mut rem = p;
    let mut out: u128 = 0;
    for _ in 0..64 {
        rem <<= 1;
        out <<= 1;
        if rem >= q {
            rem -= q;
            out += 1;
        }
    }
    if rem * 2 >= q {
        out += 1;
    }
    (out & (FULL_TURN - 1)) as u64
}

/// `(a * b) mod m` by double-and-add; valid for `m < 2^127`.
fn mul_mod(mut a: u128, mut b: u128, m: u128) -> u128 {
    debug_assert!(m < 1 << 127);
    a %= m;
    let mut acc: u128 = 0;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a + a) % m;
        b >>= 1;
    }
    acc
}

/// One term of the coboundary-resonance diagnostic.
#[derive(Clone, Copy, Debug)]
pub struct CoboundaryTerm {
    pub freq: u64,
    pub amp: f64,
    /// `|e^{2 pi i q alpha} - 1|`, from the exact rational angle.
    pub resonance: f64,
    /// `amp / resonance`.
    pub term: f64,
    /// Partial sum `G_k`.
    pub partial_sum: f64,
    /// `G_k / G_{k-1}` for `k >= 2`.
    pub growth: Option<f64>,
}

/// Growth report for the partial sums `G_K = sum_{k<=K} c_k / |e^{2 pi i q_k alpha} - 1|`.
///
/// Bounded partial sums indicate the coboundary regime; growth by a large
/// factor per term is the empirical signature of a cocycle with no
/// continuous transfer function, which is what makes the skew product
/// minimal-like at finite resolution.
#[derive(Clone, Debug)]
pub struct CoboundaryReport {
    pub terms: Vec<CoboundaryTerm>,
    pub factor: f64,
    pub min_growth: Option<f64>,
    /// True when every consecutive ratio `G_k / G_{k-1}` is at least `factor`.
    pub growing: bool,
}

/// Evaluate the resonance partial sums for the first `k` harmonics.
pub fn coboundary_diagnostic(spec: &CocycleSpec, k: usize, factor: f64) -> CoboundaryReport {
    assert!(
        k <= spec.harmonics().len(),
        "requested {k} terms but spec has {}",
        spec.harmonics().len()
    );
    let mut terms: Vec<CoboundaryTerm> = Vec::with_capacity(k);
    let mut partial = 0.0f64;
    let mut min_growth: Option<f64> = None;
    for h in &spec.harmonics()[..k] {
        let dist = spec.norm_dist(h.freq as u128);
        let resonance = 2.0 * (std::f64::consts::PI * dist).sin();
        let term = if resonance == 0.0 {
            f64::INFINITY
        } else {
            h.amp / resonance
        };
        let prev = partial;
        partial += term;
        let growth = if terms.is_empty() || prev == 0.0 {
            None
        } else {
            Some(partial / prev)
        };
        if let Some(g) = growth {
            min_growth = Some(min_growth.map_or(g, |m: f64| m.min(g)));
        }
        terms.push(CoboundaryTerm {
            freq: h.freq,
            amp: h.amp,
            resonance,
            term,
            partial_sum: partial,
            growth,
        });
    }
    let growing = min_growth.is_some_and(|m| m >= factor);
    CoboundaryReport {
        terms,
        factor,
        min_growth,
        growing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn golden(depth: usize) -> CocycleSpec {
        CocycleSpec::new(vec![1; depth], vec![Harmonic { freq: 1, amp: 1.0 }], 0.2).unwrap()
    }

    #[test]
    fn golden_mean_angle() {
        let spec = golden(45);
        assert!((spec.alpha().to_f64() - 0.6180339887).abs() < 1e-9);
        // q_1 = a_1.
        assert_eq!(spec.convergents()[0].1, 1);
    }

    #[test]
    fn default_convergents_and_liouville_property() {
        let spec = CocycleSpec::default_liouville();
        let q: Vec<u128> = spec.convergents().iter().map(|&(_, q)| q).collect();
        assert_eq!(q, vec![1, 21, 84_001, 168_002_000_021, 336_004_000_042_000_084_001]);
        for w in q.windows(2) {
            assert_eq!(w[0] % 2, 1, "harmonic denominators must be odd");
            // ||q_k alpha|| <= 1 / q_{k+1}
            let lhs = spec.norm_dist(w[0]);
            assert!(
                lhs <= 1.0 / w[1] as f64 * (1.0 + 1e-12),
                "||q alpha|| = {lhs} vs 1/q_next = {}",
                1.0 / w[1] as f64
            );
        }
    }

    #[test]
    fn convergent_overflow_rejected() {
        let err = CocycleSpec::new(
            vec![u64::MAX; 3],
            vec![Harmonic { freq: 1, amp: 1.0 }],
            0.2,
        )
        .unwrap_err();
        assert!(matches!(err, SkewError::ConvergentOverflow { .. }));
    }

    #[test]
    fn r_vanishes_at_fixed_points() {
        let spec = CocycleSpec::default_liouville();
        assert_eq!(spec.r_eval(CirclePoint::ZERO), 0.0);
        assert_eq!(spec.r_eval(CirclePoint::HALF), 0.0);
    }

    #[test]
    fn r_antisymmetry_is_exact() {
        let spec = CocycleSpec::default_liouville();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x = CirclePoint::from_ticks(rng.gen());
            let res = (spec.r_eval(x + CirclePoint::HALF) + spec.r_eval(x)).abs();
            worst = worst.max(res);
        }
        assert!(worst <= 2f64.powi(-50), "residual {worst}");
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn r_positive_and_bounded_on_half() {
        let spec = CocycleSpec::default_liouville();
        let stats = spec.r_grid_stats(10_000);
        assert!(stats.min_half > 0.0);
        assert!(stats.max_abs < 0.25);
        // Minimum of r on (0, 1/2) sits near the endpoints.
        assert!(stats.argmin_half < 0.025 || stats.argmin_half > 0.475);
        let quarter = spec.r_eval(CirclePoint::from_f64(0.25));
        assert!(quarter > 0.0 && quarter < 0.25);
    }

    #[test]
    fn r_matches_unfolded_reference() {
        // Independent route: plain f64 phase arithmetic, no tick folding.
        let spec = CocycleSpec::default_liouville();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x = CirclePoint::from_ticks(rng.gen());
            let mut reference = 0.0;
            for h in spec.harmonics() {
                let phase = (h.freq as u128).wrapping_mul(x.ticks() as u128) as u64;
                reference += h.amp * (std::f64::consts::TAU * (phase as f64 / FULL_TURN as f64)).sin();
            }
            reference *= spec.scale();
            assert!((spec.r_eval(x) - reference).abs() < 1e-13);
        }
    }

    #[test]
    fn rho_basics_and_cocycle_identity() {
        let spec = CocycleSpec::default_liouville();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = CirclePoint::from_ticks(rng.gen());
        assert_eq!(spec.rho_n(x, 0), 0.0);
        assert_eq!(spec.rho_n(x, 1), spec.r_eval(x) as f64);
        for _ in 0..50 {
            let n = rng.gen_range(0..=100u64);
            let m = rng.gen_range(0..=100u64);
            let lhs = spec.rho_n(x, n + m);
            let rhs = spec.rho_n(x, n) + spec.rho_n(x + spec.alpha().mul_int(n as i64), m);
            assert!((lhs - rhs).abs() <= 1e-12, "telescoping residual {}", lhs - rhs);
        }
    }

    #[test]
    fn incremental_matches_fresh() {
        let spec = CocycleSpec::default_liouville();
        let x = CirclePoint::from_f64(0.321);
        let mut sums = BirkhoffSums::new(&spec, x);
        for n in 0..200u64 {
            assert_eq!(sums.sum_ticks(), spec.rho_ticks(x, n));
            sums.advance();
        }
    }

    #[test]
    fn sigma_matches_iterated_steps() {
        let spec = CocycleSpec::default_liouville();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = CirclePoint::from_ticks(rng.gen());
        let y = CirclePoint::from_ticks(rng.gen());
        assert_eq!(spec.sigma_n(x, 0, y), y);
        assert_eq!(spec.sigma_n(x, 1, y), y + spec.r_point(x));
        let mut z = TorusPoint::new(x, y);
        for n in 0..=100u64 {
            let direct = spec.sigma_n(x, n, y);
            assert!(direct.dist(z.y) <= 1e-12);
            z = spec.parry_step(z);
        }
    }

    #[test]
    fn parry_commutes_with_involution_exactly() {
        let spec = CocycleSpec::default_liouville();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let z = TorusPoint::new(CirclePoint::from_ticks(rng.gen()), CirclePoint::from_ticks(rng.gen()));
            let a = spec.parry_step(involution_p(z));
            let b = involution_p(spec.parry_step(z));
            assert_eq!(a, b);
            assert_eq!(spec.parry_inv(spec.parry_step(z)), z);
        }
    }

    #[test]
    fn involution_examples() {
        let z = TorusPoint::new(CirclePoint::from_f64(0.3), CirclePoint::from_f64(0.2));
        let pz = involution_p(z);
        assert!(pz.x.dist(CirclePoint::from_f64(0.8)) < 1e-15);
        assert!(pz.y.dist(CirclePoint::from_f64(0.8)) < 1e-15);
        assert_eq!(involution_p(pz), z);
        let edge = TorusPoint::new(CirclePoint::from_f64(0.3), CirclePoint::ZERO);
        assert_eq!(involution_p(edge).y, CirclePoint::ZERO);
    }

    #[test]
    fn parry_step_fixes_zero_fiber() {
        let spec = CocycleSpec::default_liouville();
        let y = CirclePoint::from_f64(0.77);
        let img = spec.parry_step(TorusPoint::new(CirclePoint::ZERO, y));
        assert_eq!(img.x, spec.alpha());
        assert_eq!(img.y, y);
    }

    #[test]
    fn coboundary_regimes() {
        // Single harmonic over the golden mean: bounded partial sums.
        let g = golden(45);
        let rep = coboundary_diagnostic(&g, 1, 10.0);
        assert_eq!(rep.terms.len(), 1);
        assert!(!rep.growing);

        // Default spec: each new term grows the sum by >= 10x.
        let spec = CocycleSpec::default_liouville();
        let rep = coboundary_diagnostic(&spec, spec.harmonics().len(), 10.0);
        assert!(rep.growing, "growth ratios: {:?}", rep.min_growth);
        assert!(rep.min_growth.unwrap() >= 10.0);

        // Empty report.
        let rep = coboundary_diagnostic(&spec, 0, 10.0);
        assert!(rep.terms.is_empty() && !rep.growing);
    }
}
