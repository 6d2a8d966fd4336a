//! Quantile transport and the blown-up map.
//!
//! `tau_x(y) = min { y' in [0,1] : mu_x[0,y'] >= y }` is the generalized
//! inverse of the fiber CDF, computed by bisection in tick space. Because the
//! blended measure keeps half its mass Lebesgue, the CDF has slope at least
//! one half everywhere, so the bisection bracket pins the minimum to within
//! `2 * (bisect_tol + 2^{-N-1})`.
//!
//! The blown-up map is evaluated by its closed formula at every point of the
//! torus:
//!
//! ```text
//! S_hat(x, y) = (x + alpha, mu_{x+alpha}[0, tau_x(y) + r(x)])
//! ```
//!
//! which agrees with `T^{-1} . S . T` wherever the latter is defined and
//! realizes its unique continuous extension elsewhere.

use crate::blowup::{validate_star_points, FiberKernel, ProfileSpec, StarScanReport};
use crate::circle::{CirclePoint, Lift, FULL_TURN};
use crate::skewbase::{CocycleSpec, SkewError, TorusPoint};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Cocycle(#[from] SkewError),
    #[error("cocycle fails positivity on (0, 1/2): min r = {min}")]
    CocycleNotPositive { min: f64 },
    #[error("cocycle amplitude reaches {max} >= 1/4 on the evaluation grid")]
    CocycleTooLarge { max: f64 },
    #[error(
        "star-point exclusion scan failed: margin {margin} <= {required} at m = {worst_m} (star {worst_star})"
    )]
    ExclusionScan {
        margin: f64,
        required: f64,
        worst_m: i64,
        worst_star: u8,
    },
    #[error("truncation depth must be at least 2 (got {0})")]
    TruncationTooShallow(u32),
}

/// Engine tuning knobs.
#[derive(Clone, Copy, Debug)]
pub struct EngineParams {
    /// Series truncation depth `N`.
    pub n_terms: u32,
    /// Horizon `M` of the star-point exclusion scan.
    pub scan_horizon: u64,
    /// Required clearance in the exclusion scan.
    pub exclusion_margin: f64,
    /// Grid size for the startup check `max |r| < 1/4`.
    pub r_grid_cells: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            n_terms: 60,
            scan_horizon: 10_000,
            exclusion_margin: 1e-6,
            r_grid_cells: 10_000,
        }
    }
}

/// Which torus map drives an orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// The invertible skew product `S`.
    Skew,
    /// The blown-up map `S_hat`.
    BlowUp,
}

/// Holds the validated blow-up data and evaluates `tau`, `T`, and `S_hat`.
///
/// Immutable after construction; every evaluation is pure, so concurrent use
/// is safe.
pub struct TransportEngine {
    profile: ProfileSpec,
    cocycle: CocycleSpec,
    n_terms: u32,
    bisect_iters: u32,
    scan: Option<StarScanReport>,
}

impl TransportEngine {
    /// Validate the cocycle invariants, the amplitude grid bound, and the
    /// star-point exclusion scan, then build the engine.
    pub fn new(
        profile: ProfileSpec,
        cocycle: CocycleSpec,
        params: EngineParams,
    ) -> Result<Self, EngineError> {
        if params.n_terms < 2 {
            return Err(EngineError::TruncationTooShallow(params.n_terms));
        }
        cocycle.validate()?;
        let stats = cocycle.r_grid_stats(params.r_grid_cells);
        if stats.min_half <= 0.0 {
            return Err(EngineError::CocycleNotPositive {
                min: stats.min_half,
            });
        }
        if stats.max_abs >= 0.25 {
            return Err(EngineError::CocycleTooLarge {
                max: stats.max_abs,
            });
        }
        let scan = validate_star_points(
            &profile,
            &cocycle,
            params.scan_horizon,
            params.exclusion_margin,
        );
        if !scan.ok {
            return Err(EngineError::ExclusionScan {
                margin: scan.min_margin,
                required: scan.required_margin,
                worst_m: scan.worst_m,
                worst_star: scan.worst_star,
            });
        }
        Ok(Self::assemble(profile, cocycle, params, Some(scan)))
    }

    /// Build without validation. For diagnostics and negative controls only:
    /// the verification battery on such an engine is expected to fail.
    pub fn new_unchecked(profile: ProfileSpec, cocycle: CocycleSpec, params: EngineParams) -> Self {
        Self::assemble(profile, cocycle, params, None)
    }

    fn assemble(
        profile: ProfileSpec,
        cocycle: CocycleSpec,
        params: EngineParams,
        scan: Option<StarScanReport>,
    ) -> Self {
        // Inversion tolerance must stay coarser than truncation noise
        // (bisect_tol > 2^-N); 52 halvings at the default depth of 60.
        let bisect_iters = 52.min(params.n_terms.saturating_sub(1)).max(1);
        Self {
            profile,
            cocycle,
            n_terms: params.n_terms,
            bisect_iters,
            scan,
        }
    }

    pub fn profile(&self) -> &ProfileSpec {
        &self.profile
    }

    pub fn cocycle(&self) -> &CocycleSpec {
        &self.cocycle
    }

    pub fn n_terms(&self) -> u32 {
        self.n_terms
    }

    pub fn bisect_tol(&self) -> f64 {
        2f64.powi(-(self.bisect_iters as i32))
    }

    /// The startup exclusion-scan report (absent on unchecked engines).
    pub fn scan_report(&self) -> Option<&StarScanReport> {
        self.scan.as_ref()
    }

    /// Precompute the series stack over the fiber of `x`.
    pub fn fiber(&self, x: CirclePoint) -> FiberKernel {
        FiberKernel::new(&self.profile, &self.cocycle, x, self.n_terms)
    }

    /// Quantile `tau_x(y)` via a fresh fiber kernel.
    pub fn tau(&self, x: CirclePoint, y: Lift) -> Lift {
        self.tau_in(&self.fiber(x), y)
    }

    /// Quantile against a prebuilt kernel.
    ///
    /// Returns the lower generalized inverse: at a CDF jump the bracket
    /// converges onto the jump location, which is the minimum. Endpoints are
    /// pinned exactly: `tau(0) = 0`, `tau(1) = 1`.
    pub fn tau_in(&self, kernel: &FiberKernel, y: Lift) -> Lift {
        if y == Lift::ZERO {
            return Lift::ZERO;
        }
        if y == Lift::ONE {
            return Lift::ONE;
        }
        let target = y.as_f64();
        if kernel.cdf(Lift::ZERO).value >= target {
            return Lift::ZERO;
        }
        if kernel.cdf(Lift::ONE).value < target {
            // Only reachable within the truncation gap of 1; the slope bound
            // puts the true quantile within 2^{-N} of 1.
            return Lift::ONE;
        }
        let mut lo = 0u128;
        let mut hi = FULL_TURN;
        for _ in 0..self.bisect_iters {
            let mid = (lo + hi) / 2;
            if kernel.cdf(Lift::from_ticks(mid)).value >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Lift::from_ticks(hi)
    }

    /// The fiber-monotone transport `T(x, y) = (x, tau_x(y))`.
    pub fn t_map(&self, z: TorusPoint) -> TorusPoint {
        TorusPoint::new(z.x, self.tau(z.x, Lift::from_point(z.y)).to_point())
    }

    /// One step of the blown-up map.
    pub fn s_hat(&self, z: TorusPoint) -> TorusPoint {
        let k0 = self.fiber(z.x);
        let k1 = self.fiber(z.x + self.cocycle.alpha());
        self.s_hat_in(&k0, &k1, z)
    }

    /// `S_hat` against prebuilt kernels for the fibers of `x` and `x + alpha`.
    pub fn s_hat_in(&self, k0: &FiberKernel, k1: &FiberKernel, z: TorusPoint) -> TorusPoint {
        debug_assert_eq!(k0.base_point(), z.x);
        let tau = self.tau_in(k0, Lift::from_point(z.y));
        let w = tau.to_point() + self.cocycle.r_point(z.x);
        let v = k1.cdf(Lift::from_point(w)).value;
        TorusPoint::new(z.x + self.cocycle.alpha(), CirclePoint::from_f64(v))
    }

    /// Stream the orbit `z0, f(z0), ..., f^K(z0)` (`K + 1` points).
    ///
    /// Base coordinates advance by exactly `alpha` per step in tick
    /// arithmetic, so long orbits accumulate no rotational drift.
    pub fn orbit(&self, map: MapKind, z0: TorusPoint, steps: u64) -> OrbitIter<'_> {
        let kernel = match map {
            MapKind::Skew => None,
            MapKind::BlowUp => Some(self.fiber(z0.x)),
        };
        OrbitIter {
            engine: self,
            map,
            current: z0,
            kernel,
            emitted: 0,
            total: steps + 1,
        }
    }
}

/// Streaming orbit iterator; holds one fiber kernel which rolls forward with
/// the base rotation, so each blow-up step costs a single kernel build.
pub struct OrbitIter<'a> {
    engine: &'a TransportEngine,
    map: MapKind,
    current: TorusPoint,
    kernel: Option<FiberKernel>,
    emitted: u64,
    total: u64,
}

impl Iterator for OrbitIter<'_> {
    type Item = TorusPoint;

    fn next(&mut self) -> Option<TorusPoint> {
        if self.emitted == self.total {
            return None;
        }
        let out = self.current;
        self.emitted += 1;
        if self.emitted < self.total {
            self.current = match self.map {
                MapKind::Skew => self.engine.cocycle.parry_step(self.current),
                MapKind::BlowUp => {
                    let k0 = self.kernel.take().expect("kernel present for blow-up map");
                    let k1 = self
                        .engine
                        .fiber(self.current.x + self.engine.cocycle.alpha());
                    let next = self.engine.s_hat_in(&k0, &k1, self.current);
                    self.kernel = Some(k1);
                    next
                }
            };
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.emitted) as usize;
        (left, Some(left))
    }
}
