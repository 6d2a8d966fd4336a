//! Blow-up data over two star points.
//!
//! Two piecewise-linear profiles `phi` and `psi` have `P`-invariant graphs
//! crossing transversally at `z1* = (x1*, y1*)` and `z2* = P(z1*)`. They
//! carve a family of fiber probability measures:
//!
//! - over `x = x_j*`: the Dirac measure at `y_j*`;
//! - over `x` inside a bump: normalized Lebesgue measure on the arc between
//!   the two profile lifts;
//! - elsewhere (profiles at `0 = 1`): plain Lebesgue measure on the circle.
//!
//! Pushing the base measure `mu^0` along the cocycle gives
//! `mu_x^n(A) = mu^0_{x + n alpha}(A + rho_n(x))`, and the blended measure
//! `mu_x = (lambda + sum_n 2^{-n-1} mu_x^n) / 2` has a CDF that every other
//! module consumes. Truncating the series after `N` terms omits at most
//! `2^{-N-1}` of mass, which [`CdfValue`] tracks as a hard bound.

use crate::circle::{Arc, CirclePoint, Lift, FULL_TURN};
use crate::skewbase::{BirkhoffSums, CocycleSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("x1_star = {0} must lie strictly inside (0.1, 0.2)")]
    StarOutOfRange(f64),
    #[error("bump [{lo}, {hi}] must satisfy lo < x1_star < hi inside (0.1, 0.2)")]
    BumpOutOfRange { lo: f64, hi: f64 },
    #[error("y1_star must lie strictly inside (0, 1) (got {0})")]
    StarValueOutOfRange(f64),
}

/// The measure carried by one fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FiberSupport {
    /// Unit mass at one point.
    Dirac(CirclePoint),
    /// Normalized Lebesgue measure on an arc (the full circle away from the
    /// bumps).
    Uniform(Arc),
}

/// Star points, bump interval, and the two profile graphs.
///
/// The first bump has three knots: `(lo, 1) -> (x1*, y1*) -> (hi, 0)` for
/// `phi` and `(lo, 0) -> (x1*, y1*) -> (hi, 1)` for `psi`; the second bump is
/// the exact tick-complement half a turn later, so `phi(x + 1/2) = 1 - phi(x)`
/// holds with zero residual. A nonzero `skew` (diagnostics only) moves the
/// second-bump crossing off the complement to break that symmetry on purpose.
#[derive(Clone, Debug)]
pub struct ProfileSpec {
    x1_star: CirclePoint,
    y1_star: Lift,
    bump_lo: CirclePoint,
    bump_hi: CirclePoint,
    skew: f64,
}

impl ProfileSpec {
    pub fn new(
        x1_star: CirclePoint,
        y1_star: Lift,
        bump_lo: CirclePoint,
        bump_hi: CirclePoint,
    ) -> Result<Self, ProfileError> {
        let x1 = x1_star.to_f64();
        if !(0.1 < x1 && x1 < 0.2) {
            return Err(ProfileError::StarOutOfRange(x1));
        }
        let (lo, hi) = (bump_lo.to_f64(), bump_hi.to_f64());
        if !(0.1 < lo && hi < 0.2)
            || bump_lo.ticks() >= x1_star.ticks()
            || x1_star.ticks() >= bump_hi.ticks()
        {
            return Err(ProfileError::BumpOutOfRange { lo, hi });
        }
        let y1 = y1_star.ticks();
        if y1 == 0 || y1 >= FULL_TURN {
            return Err(ProfileError::StarValueOutOfRange(y1_star.as_f64()));
        }
        Ok(Self {
            x1_star,
            y1_star,
            bump_lo,
            bump_hi,
            skew: 0.0,
        })
    }

    /// Default star data: `x1* = 1/8`, `y1* = 1/2`, bump `(0.105, 0.195)`.
    pub fn default_star() -> Self {
        Self::new(
            CirclePoint::from_fraction(1, 8),
            Lift::from_f64(0.5),
            CirclePoint::from_f64(0.105),
            CirclePoint::from_f64(0.195),
        )
        .expect("default star data is valid")
    }

    /// Diagnostic knob: shift the second-bump crossing by `skew`, destroying
    /// `P`-invariance of the graphs. Used by negative controls to show the
    /// verification battery notices.
    pub fn with_skewed_second_bump(mut self, skew: f64) -> Self {
        let y2 = self.y1_star.complement().as_f64() + skew;
        assert!(0.0 < y2 && y2 < 1.0, "skewed crossing must stay in (0,1)");
        self.skew = skew;
        self
    }

    pub fn x1_star(&self) -> CirclePoint {
        self.x1_star
    }

    pub fn x2_star(&self) -> CirclePoint {
        self.x1_star + CirclePoint::HALF
    }

    pub fn y1_star(&self) -> Lift {
        self.y1_star
    }

    pub fn y2_star(&self) -> Lift {
        if self.skew == 0.0 {
            self.y1_star.complement()
        } else {
            Lift::from_f64(self.y1_star.complement().as_f64() + self.skew)
        }
    }

    pub fn bump(&self) -> (CirclePoint, CirclePoint) {
        (self.bump_lo, self.bump_hi)
    }

    fn in_first_bump(&self, x: CirclePoint) -> bool {
        let rel = self.bump_lo.forward_ticks(x);
        rel <= self.bump_lo.forward_ticks(self.bump_hi)
    }

    /// Falling profile lift: `1 -> y1* -> 0` across the first bump, the
    /// complement across the second, `0` elsewhere.
    pub fn phi(&self, x: CirclePoint) -> Lift {
        self.lifts(x).0
    }

    /// Rising profile lift: `0 -> y1* -> 1` across the first bump.
    pub fn psi(&self, x: CirclePoint) -> Lift {
        self.lifts(x).1
    }

    /// Both profile lifts at `x`.
    pub fn lifts(&self, x: CirclePoint) -> (Lift, Lift) {
        if self.in_first_bump(x) {
            return self.first_bump_lifts(x);
        }
        let mirrored = x - CirclePoint::HALF;
        if self.in_first_bump(mirrored) {
            if self.skew == 0.0 {
                let (phi, psi) = self.first_bump_lifts(mirrored);
                return (phi.complement(), psi.complement());
            }
            return self.skewed_second_bump_lifts(mirrored);
        }
        (Lift::ZERO, Lift::ZERO)
    }

    fn first_bump_lifts(&self, x: CirclePoint) -> (Lift, Lift) {
        let y1 = self.y1_star;
        if x == self.bump_lo {
            return (Lift::ONE, Lift::ZERO);
        }
        if x == self.x1_star {
            return (y1, y1);
        }
        if x == self.bump_hi {
            return (Lift::ZERO, Lift::ONE);
        }
        let ys = y1.as_f64();
        let rel = self.bump_lo.forward_ticks(x);
        let w1 = self.bump_lo.forward_ticks(self.x1_star);
        if rel < w1 {
            let t = rel as f64 / w1 as f64;
            (
                Lift::from_f64(1.0 + t * (ys - 1.0)),
                Lift::from_f64(t * ys),
            )
        } else {
            let w2 = self.x1_star.forward_ticks(self.bump_hi);
            let t = self.x1_star.forward_ticks(x) as f64 / w2 as f64;
            (
                Lift::from_f64(ys * (1.0 - t)),
                Lift::from_f64(ys + t * (1.0 - ys)),
            )
        }
    }

    /// Second-bump lifts with the crossing moved off the complement;
    /// `mirrored` is already shifted back by half a turn.
    fn skewed_second_bump_lifts(&self, mirrored: CirclePoint) -> (Lift, Lift) {
        let y2 = self.y1_star.complement().as_f64() + self.skew;
        if mirrored == self.bump_lo {
            return (Lift::ZERO, Lift::ONE);
        }
        if mirrored == self.x1_star {
            return (Lift::from_f64(y2), Lift::from_f64(y2));
        }
        if mirrored == self.bump_hi {
            return (Lift::ONE, Lift::ZERO);
        }
        let rel = self.bump_lo.forward_ticks(mirrored);
        let w1 = self.bump_lo.forward_ticks(self.x1_star);
        if rel < w1 {
            let t = rel as f64 / w1 as f64;
            (Lift::from_f64(t * y2), Lift::from_f64(1.0 + t * (y2 - 1.0)))
        } else {
            let w2 = self.x1_star.forward_ticks(self.bump_hi);
            let t = self.x1_star.forward_ticks(mirrored) as f64 / w2 as f64;
            (
                Lift::from_f64(y2 + t * (1.0 - y2)),
                Lift::from_f64(y2 * (1.0 - t)),
            )
        }
    }

    /// The fiber measure over `x`.
    ///
    /// The profiles only meet at the star points (transversal crossing), so
    /// away from them the support arc is nondegenerate; at the bump edges it
    /// widens to the full circle, matching the plain-Lebesgue fibers outside.
    pub fn support(&self, x: CirclePoint) -> FiberSupport {
        if x == self.x1_star {
            return FiberSupport::Dirac(self.y1_star.to_point());
        }
        if x == self.x2_star() {
            return FiberSupport::Dirac(self.y2_star().to_point());
        }
        if !self.in_first_bump(x) && !self.in_first_bump(x - CirclePoint::HALF) {
            // Profiles sit at 0 = 1: plain Lebesgue fiber.
            return FiberSupport::Uniform(Arc::full());
        }
        let (phi, psi) = self.lifts(x);
        if phi == psi {
            // Unreachable for validated profiles; collapse to the common lift.
            debug_assert!(false, "degenerate support off the star points");
            return FiberSupport::Dirac(phi.to_point());
        }
        let (lo, hi) = if phi < psi { (phi, psi) } else { (psi, phi) };
        if lo == Lift::ZERO && hi == Lift::ONE {
            return FiberSupport::Uniform(Arc::full());
        }
        FiberSupport::Uniform(Arc::from_span(lo.to_point(), hi.ticks() - lo.ticks()))
    }

    /// Mass that the fiber measure over `x` assigns to `arc`.
    pub fn mu0_arc(&self, x: CirclePoint, arc: &Arc) -> f64 {
        match self.support(x) {
            FiberSupport::Dirac(p) => {
                if arc.contains(p) {
                    1.0
                } else {
                    0.0
                }
            }
            FiberSupport::Uniform(j) => arc.overlap_ticks(&j) as f64 / j.span_ticks() as f64,
        }
    }
}

/// `mu_x^n(A) = mu^0_{x + n alpha}(A + rho_n(x))`.
pub fn mun_arc(
    profile: &ProfileSpec,
    cocycle: &CocycleSpec,
    x: CirclePoint,
    n: u64,
    arc: &Arc,
) -> f64 {
    let base = x + cocycle.alpha().mul_int(n as i64);
    profile.mu0_arc(base, &arc.translated(cocycle.rho_point(x, n)))
}

/// A CDF value together with a hard bound on the omitted series tail.
///
/// The exact CDF lies in `[value, value + truncation_gap]` (up to f64
/// rounding of the partial sum); `truncation_gap = 2^{-N-1}` for truncation
/// depth `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdfValue {
    pub value: f64,
    pub truncation_gap: f64,
}

impl CdfValue {
    pub fn upper(&self) -> f64 {
        self.value + self.truncation_gap
    }
}

/// An atom of a truncated fiber measure.
#[derive(Clone, Copy, Debug)]
pub struct Atom {
    /// Series level contributing the atom.
    pub level: u32,
    pub position: CirclePoint,
    /// Weight `2^{-level-2}`.
    pub mass: f64,
}

enum Component {
    Dirac { pos: u64 },
    Uniform { start: u64, span: u128 },
}

/// Precomputed stack of the first `N` series components over one fiber, each
/// pulled back by its Birkhoff translation. Makes repeated CDF evaluations on
/// the same fiber (bisection, grids, orbits) cheap.
pub struct FiberKernel {
    x: CirclePoint,
    components: Vec<Component>,
}

impl FiberKernel {
    pub fn new(profile: &ProfileSpec, cocycle: &CocycleSpec, x: CirclePoint, n_terms: u32) -> Self {
        let mut components = Vec::with_capacity(n_terms as usize);
        let mut sums = BirkhoffSums::new(cocycle, x);
        for _ in 0..n_terms {
            let t = sums.translation();
            let comp = match profile.support(sums.point()) {
                FiberSupport::Dirac(p) => Component::Dirac { pos: (p - t).ticks() },
                FiberSupport::Uniform(j) => {
                    let moved = j.translated(-t);
                    Component::Uniform {
                        start: moved.start().ticks(),
                        span: moved.span_ticks(),
                    }
                }
            };
            components.push(comp);
            sums.advance();
        }
        Self { x, components }
    }

    pub fn base_point(&self) -> CirclePoint {
        self.x
    }

    pub fn n_terms(&self) -> u32 {
        self.components.len() as u32
    }

    /// `mu_x[0, y]` truncated after the kernel's components.
    pub fn cdf(&self, y: Lift) -> CdfValue {
        let arc = Arc::from_zero_to(y);
        let y_ticks = y.ticks();
        let mut sum = y.as_f64();
        let mut weight = 1.0;
        for comp in &self.components {
            weight *= 0.5;
            let mass = match comp {
                Component::Dirac { pos } => {
                    if (*pos as u128) <= y_ticks {
                        1.0
                    } else {
                        0.0
                    }
                }
                Component::Uniform { start, span } => {
                    let j = Arc::from_span(CirclePoint::from_ticks(*start), *span);
                    arc.overlap_ticks(&j) as f64 / *span as f64
                }
            };
            sum += weight * mass;
        }
        CdfValue {
            value: sum * 0.5,
            truncation_gap: 0.5 * weight,
        }
    }

    /// Mass of the atom placed exactly at the circle point `y` by the
    /// truncated series (zero off the backward star orbits).
    pub fn atom_mass(&self, y: CirclePoint) -> f64 {
        let mut total = 0.0;
        let mut weight = 0.25;
        for comp in &self.components {
            if let Component::Dirac { pos } = comp {
                if *pos == y.ticks() {
                    total += weight;
                }
            }
            weight *= 0.5;
        }
        total
    }

    /// All atoms of the truncated fiber measure.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        let mut mass = 0.25;
        for (level, comp) in self.components.iter().enumerate() {
            if let Component::Dirac { pos } = comp {
                out.push(Atom {
                    level: level as u32,
                    position: CirclePoint::from_ticks(*pos),
                    mass,
                });
            }
            mass *= 0.5;
        }
        out
    }
}

/// `mu_x[0, y]` with truncation depth `n_terms`.
pub fn cdf(
    profile: &ProfileSpec,
    cocycle: &CocycleSpec,
    x: CirclePoint,
    y: Lift,
    n_terms: u32,
) -> CdfValue {
    FiberKernel::new(profile, cocycle, x, n_terms).cdf(y)
}

/// Atom mass of the truncated `mu_x` at the point `y`.
pub fn atom_mass(
    profile: &ProfileSpec,
    cocycle: &CocycleSpec,
    x: CirclePoint,
    y: CirclePoint,
    n_terms: u32,
) -> f64 {
    FiberKernel::new(profile, cocycle, x, n_terms).atom_mass(y)
}

/// Outcome of the star-point exclusion scan.
#[derive(Clone, Copy, Debug)]
pub struct StarScanReport {
    pub horizon: u64,
    /// Smallest distance from an orbit point of a star to the excluded
    /// curves `y = 0` and `y = -r(x)` over `|m| <= horizon`.
    pub min_margin: f64,
    pub required_margin: f64,
    pub ok: bool,
    /// Orbit index attaining the minimum.
    pub worst_m: i64,
    /// Which star (1 or 2) attains the minimum.
    pub worst_star: u8,
}

/// Scan the orbits of both star points over `|m| <= horizon` and check they
/// keep at least `margin` away from the curves `T x {0}` and `{(x, -r(x))}`.
///
/// Those excursions are exactly where the fiber measures would acquire atoms
/// at `0` or at `-r(x)`; a failing scan means the star data is unusable.
pub fn validate_star_points(
    profile: &ProfileSpec,
    cocycle: &CocycleSpec,
    horizon: u64,
    margin: f64,
) -> StarScanReport {
    use crate::skewbase::TorusPoint;
    let mut min_margin = f64::INFINITY;
    let mut worst_m = 0i64;
    let mut worst_star = 1u8;
    let stars = [
        (1u8, TorusPoint::new(profile.x1_star(), profile.y1_star().to_point())),
        (2u8, TorusPoint::new(profile.x2_star(), profile.y2_star().to_point())),
    ];
    for (tag, star) in stars {
        let mut consider = |m: i64, z: TorusPoint| {
            let d0 = z.y.dist(CirclePoint::ZERO);
            let dr = z.y.dist(-cocycle.r_point(z.x));
            let d = d0.min(dr);
            if d < min_margin {
                min_margin = d;
                worst_m = m;
                worst_star = tag;
            }
        };
        let mut fwd = star;
        consider(0, fwd);
        for m in 1..=horizon as i64 {
            fwd = cocycle.parry_step(fwd);
            consider(m, fwd);
        }
        let mut bwd = star;
        for m in 1..=horizon as i64 {
            bwd = cocycle.parry_inv(bwd);
            consider(-m, bwd);
        }
    }
    StarScanReport {
        horizon,
        min_margin,
        required_margin: margin,
        ok: min_margin > margin,
        worst_m,
        worst_star,
    }
}
