//! The property battery: every identity the construction promises, run as a
//! deterministic, seeded check with one report row per property.
//!
//! Checks are independent and pure; each draws its samples from its own
//! seeded generator, so reports are byte-identical across runs. Minimality is
//! never reported as a boolean: finite computation cannot certify it, so
//! orbit density shows up only as coverage statistics against a fixed grid.

use crate::blowup::{mun_arc, validate_star_points, FiberSupport, ProfileSpec};
use crate::circle::{Arc, CirclePoint, Lift};
use crate::klein::{klein_dist, s_tilde, KleinPoint};
use crate::skewbase::{coboundary_diagnostic, involution_p, CocycleSpec, Harmonic, TorusPoint};
use crate::transport::{EngineParams, MapKind, TransportEngine};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// Outcome of one property check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    /// Worst observed residual (or the measured quantity for threshold
    /// checks such as margins and growth factors).
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn residual_under(name: &str, samples: usize, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            samples,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    fn measure_over(name: &str, samples: usize, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            samples,
            residual: measured,
            tolerance: threshold,
            pass: measured >= threshold,
        }
    }
}

/// All check rows plus the global verdict.
#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width text table, one row per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>14} {:>12}  verdict",
            "check", "samples", "residual", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<24} {:>8} {:>14.6e} {:>12.4e}  {}",
                c.name,
                c.samples,
                c.residual,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.pass() { "pass" } else { "FAIL" }
        );
        out
    }

    /// CSV rows `name,samples,residual,tolerance,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,samples,residual,tolerance,verdict\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{}",
                c.name,
                c.samples,
                c.residual,
                c.tolerance,
                if c.pass { "pass" } else { "fail" }
            );
        }
        out
    }
}

/// Battery configuration. Defaults pin every tolerance the acceptance
/// criteria use.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Sample count for the map-identity checks.
    pub samples: usize,
    /// Residual tolerance for map identities (quantile round trip,
    /// semiconjugacy, commutation, quotient well-definedness, collapse).
    pub tol_map: f64,
    /// Tolerance for the coarse Riemann oracle.
    pub tol_oracle: f64,
    pub oracle_samples: usize,
    pub oracle_cells: usize,
    /// Series levels probed for continuity of `theta_n`.
    pub theta_levels: Vec<u64>,
    /// Circle grid resolution for the `theta_n` probes.
    pub theta_grid: usize,
    /// Maximal allowed jump of `theta_n` between adjacent grid points.
    pub theta_modulus: f64,
    /// Required growth factor per term of the resonance partial sums.
    pub growth_factor: f64,
    pub density_steps: u64,
    pub density_epsilon: f64,
    pub density_min_coverage: f64,
    /// Orbit seed point for the density statistics.
    pub density_seed: (f64, f64),
    /// Grid cells for the startup cocycle range check.
    pub r_grid_cells: usize,
    /// Exclusion-scan horizon and the clearance it must certify.
    pub scan_horizon: u64,
    pub exclusion_margin: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 20_140_717,
            samples: 10_000,
            tol_map: 1e-9,
            tol_oracle: 1e-3,
            oracle_samples: 100,
            oracle_cells: 10_000,
            theta_levels: vec![0, 1, 2, 5],
            theta_grid: 10_000,
            theta_modulus: 0.05,
            growth_factor: 10.0,
            density_steps: 100_000,
            density_epsilon: 0.05,
            density_min_coverage: 0.95,
            density_seed: (0.3, 0.7),
            r_grid_cells: 10_000,
            scan_horizon: 10_000,
            exclusion_margin: 1e-6,
        }
    }
}

impl VerifyOptions {
    /// Scaled-down battery for quick runs.
    pub fn quick() -> Self {
        Self {
            samples: 500,
            oracle_samples: 10,
            oracle_cells: 2_000,
            density_steps: 2_000,
            density_min_coverage: 0.0,
            ..Self::default()
        }
    }

    fn rng_for(&self, check: &str) -> ChaCha8Rng {
        // Stable per-check stream: seed mixed with an FNV-1a hash of the name.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in check.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> CirclePoint {
    CirclePoint::from_ticks(rng.next_u64())
}

fn random_torus(rng: &mut ChaCha8Rng) -> TorusPoint {
    TorusPoint::new(random_point(rng), random_point(rng))
}

/// Structural and spec-invariant gate: cocycle invariants, cocycle range on a
/// grid, profile `P`-invariance, and the exclusion scan.
pub fn check_config(engine: &TransportEngine, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let ok = engine.cocycle().validate().is_ok();
    out.push(CheckResult {
        name: "config_validate".into(),
        samples: 1,
        residual: if ok { 0.0 } else { 1.0 },
        tolerance: 0.0,
        pass: ok,
    });

    let stats = engine.cocycle().r_grid_stats(opts.r_grid_cells);
    out.push(CheckResult {
        name: "r_range".into(),
        samples: opts.r_grid_cells,
        residual: stats.max_abs,
        tolerance: 0.25,
        pass: stats.max_abs < 0.25 && stats.min_half > 0.0,
    });

    let mut rng = opts.rng_for("r_antisymmetry");
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = random_point(&mut rng);
        worst = worst
            .max((engine.cocycle().r_eval(x + CirclePoint::HALF) + engine.cocycle().r_eval(x)).abs());
    }
    out.push(CheckResult::residual_under(
        "r_antisymmetry",
        1000,
        worst,
        2f64.powi(-50),
    ));

    let mut rng = opts.rng_for("profile_p_invariance");
    let mut worst_ticks = 0u128;
    for i in 0..2000usize {
        let x = if i % 2 == 0 {
            random_point(&mut rng)
        } else {
            CirclePoint::from_f64(0.1 + 0.1 * rng.gen::<f64>())
        };
        let (phi, psi) = engine.profile().lifts(x);
        let (phi2, psi2) = engine.profile().lifts(x + CirclePoint::HALF);
        // Graph invariance on the circle (0 = 1).
        worst_ticks = worst_ticks
            .max(phi2.to_point().dist_ticks(phi.complement().to_point()) as u128)
            .max(psi2.to_point().dist_ticks(psi.complement().to_point()) as u128);
    }
    out.push(CheckResult::residual_under(
        "profile_p_invariance",
        2000,
        worst_ticks as f64 / crate::circle::FULL_TURN as f64,
        0.0,
    ));

    let scan = validate_star_points(
        engine.profile(),
        engine.cocycle(),
        opts.scan_horizon,
        opts.exclusion_margin,
    );
    out.push(CheckResult::measure_over(
        "star_exclusion",
        (2 * opts.scan_horizon + 1) as usize * 2,
        scan.min_margin,
        opts.exclusion_margin,
    ));
    out
}

/// Fiber-CDF symmetry `cdf(x, y) + cdf(x + 1/2, 1 - y) = 1`.
pub fn check_symmetry(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let mut rng = opts.rng_for("fiber_symmetry");
    let tol = 2f64.powi(-(engine.n_terms() as i32)) + 1e-9;
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let x = random_point(&mut rng);
        let y = Lift::from_ticks(rng.next_u64() as u128);
        let a = engine.fiber(x).cdf(y).value;
        let b = engine.fiber(x + CirclePoint::HALF).cdf(y.complement()).value;
        worst = worst.max((a + b - 1.0).abs());
    }
    CheckResult::residual_under("fiber_symmetry", opts.samples, worst, tol)
}

/// Base-measure reflection `mu0_x[a,b] + mu0_{x+1/2}[1-a,1-b] = 1`.
pub fn check_mu0_reflection(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let mut rng = opts.rng_for("mu0_reflection");
    let mut worst = 0.0f64;
    for i in 0..opts.samples {
        let x = if i % 3 == 0 {
            CirclePoint::from_f64(0.1 + 0.1 * rng.gen::<f64>())
        } else {
            random_point(&mut rng)
        };
        let (a, b) = (random_point(&mut rng), random_point(&mut rng));
        if a == b {
            continue;
        }
        let arc = Arc::new(a, b, false);
        let lhs = engine.profile().mu0_arc(x, &arc);
        let rhs = 1.0 - engine
            .profile()
            .mu0_arc(x + CirclePoint::HALF, &arc.reflected());
        worst = worst.max((lhs - rhs).abs());
    }
    CheckResult::residual_under("mu0_reflection", opts.samples, worst, 1e-12)
}

/// Quantile round trip `cdf(x, tau_x(y)) = y` (almost surely off the
/// backward star orbits for random `x`).
pub fn check_quantile_roundtrip(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let mut rng = opts.rng_for("quantile_roundtrip");
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let x = random_point(&mut rng);
        let kernel = engine.fiber(x);
        let y = rng.gen::<f64>();
        let tau = engine.tau_in(&kernel, Lift::from_f64(y));
        worst = worst.max((kernel.cdf(tau).value - y).abs());
    }
    CheckResult::residual_under("quantile_roundtrip", opts.samples, worst, opts.tol_map)
}

/// Endpoint pinning `tau_x(0) = 0`, `tau_x(1) = 1` (exact).
pub fn check_tau_endpoints(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let mut rng = opts.rng_for("tau_endpoints");
    let n = opts.samples.min(500);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let x = random_point(&mut rng);
        let kernel = engine.fiber(x);
        worst = worst.max(engine.tau_in(&kernel, Lift::ZERO).as_f64());
        worst = worst.max(1.0 - engine.tau_in(&kernel, Lift::ONE).as_f64());
    }
    CheckResult::residual_under("tau_endpoints", n, worst, 0.0)
}

/// Semiconjugacy `T . S_hat = S . T`.
pub fn check_semiconjugacy(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let mut rng = opts.rng_for("semiconjugacy");
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let z = random_torus(&mut rng);
        let lhs = engine.t_map(engine.s_hat(z));
        let rhs = engine.cocycle().parry_step(engine.t_map(z));
        worst = worst.max(lhs.dist(rhs));
    }
    CheckResult::residual_under("semiconjugacy", opts.samples, worst, opts.tol_map)
}

/// Commutation `S_hat . P = P . S_hat`.
pub fn check_commutation(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let mut rng = opts.rng_for("p_commutation");
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let z = random_torus(&mut rng);
        let lhs = engine.s_hat(involution_p(z));
        let rhs = involution_p(engine.s_hat(z));
        worst = worst.max(lhs.dist(rhs));
    }
    CheckResult::residual_under("p_commutation", opts.samples, worst, opts.tol_map)
}

/// Quotient well-definedness `S_tilde(pi z) = pi(S_hat z)`.
pub fn check_klein(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let mut rng = opts.rng_for("klein_well_defined");
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let z = random_torus(&mut rng);
        let lhs = s_tilde(engine, KleinPoint::project(z));
        let rhs = KleinPoint::project(engine.s_hat(z));
        worst = worst.max(klein_dist(lhs, rhs));
    }
    CheckResult::residual_under("klein_well_defined", opts.samples, worst, opts.tol_map)
}

/// Non-invertibility at the first star fiber: atom mass, the collapse of the
/// plateau `[y1 - 0.25, y1]` to one point, and separation past the plateau.
pub fn check_collapse(engine: &TransportEngine, opts: &VerifyOptions) -> Vec<CheckResult> {
    let x1 = engine.profile().x1_star();
    let kernel = engine.fiber(x1);
    let atom = kernel.atom_mass(engine.profile().y1_star().to_point());
    let mut out = vec![CheckResult::measure_over(
        "collapse_atom",
        1,
        atom,
        0.25 - 1e-9,
    )];

    let y1 = kernel.cdf(engine.profile().y1_star()).value;
    let base = CirclePoint::from_f64(y1);
    let reference = engine.s_hat(TorusPoint::new(x1, base));
    let mut worst = 0.0f64;
    let deltas = [0.05, 0.10, 0.20, 0.24];
    for delta in deltas {
        let img = engine.s_hat(TorusPoint::new(x1, base - CirclePoint::from_f64(delta)));
        worst = worst.max(reference.dist(img));
    }
    out.push(CheckResult::residual_under(
        "collapse_coincidence",
        deltas.len(),
        worst,
        opts.tol_map,
    ));

    let img = engine.s_hat(TorusPoint::new(x1, base - CirclePoint::from_f64(0.30)));
    out.push(CheckResult::measure_over(
        "collapse_separation",
        1,
        reference.dist(img),
        0.01,
    ));
    out
}

/// Independent CDF evaluation: midpoint Riemann sums of each component
/// density over its own support grid, plus explicit Dirac terms. Shares only
/// the measure definition with the production path, none of its arc
/// arithmetic.
pub fn riemann_cdf_oracle(
    profile: &ProfileSpec,
    cocycle: &CocycleSpec,
    x: CirclePoint,
    y: Lift,
    n_terms: u32,
    cells: usize,
) -> f64 {
    let yv = y.as_f64();
    let mut acc = yv; // Lebesgue blend term: exact integral of density 1 over [0, y].
    let mut rho = 0.0f64; // plain f64 Birkhoff accumulation
    let mut base = x;
    let mut weight = 1.0f64;
    for _ in 0..n_terms {
        weight *= 0.5;
        let t = rho.rem_euclid(1.0);
        let in_arc = |m: f64| (m - t).rem_euclid(1.0) <= yv;
        let mass = match profile.support(base) {
            FiberSupport::Dirac(p) => {
                if in_arc(p.to_f64()) {
                    1.0
                } else {
                    0.0
                }
            }
            FiberSupport::Uniform(j) => {
                let start = j.start().to_f64();
                let len = j.length();
                let mut count = 0usize;
                for i in 0..cells {
                    let m = (start + (i as f64 + 0.5) * len / cells as f64).rem_euclid(1.0);
                    if in_arc(m) {
                        count += 1;
                    }
                }
                count as f64 / cells as f64
            }
        };
        acc += weight * mass;
        rho += cocycle.r_eval(base);
        base = base + cocycle.alpha();
    }
    acc * 0.5
}

/// CDF against the Riemann/atom oracle, plus the shallow-truncation bracket
/// `cdf_{N=3} <= cdf_{N} <= cdf_{N=3} + 2^{-4}`.
pub fn check_oracle(engine: &TransportEngine, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut rng = opts.rng_for("cdf_oracle");
    let mut worst = 0.0f64;
    let mut bracket_worst = 0.0f64;
    for _ in 0..opts.oracle_samples {
        let x = random_point(&mut rng);
        let y = Lift::from_ticks(rng.next_u64() as u128);
        let value = engine.fiber(x).cdf(y).value;
        let oracle = riemann_cdf_oracle(
            engine.profile(),
            engine.cocycle(),
            x,
            y,
            engine.n_terms(),
            opts.oracle_cells,
        );
        worst = worst.max((value - oracle).abs());

        let coarse = crate::blowup::cdf(engine.profile(), engine.cocycle(), x, y, 3);
        // Violation depth of value in [coarse, coarse + 2^-4]; small f64
        // headroom since the bracket is exact only in real arithmetic.
        bracket_worst = bracket_worst
            .max(coarse.value - value)
            .max(value - coarse.upper());
    }
    vec![
        CheckResult::residual_under("cdf_oracle", opts.oracle_samples, worst, opts.tol_oracle),
        CheckResult::residual_under(
            "truncation_bracket",
            opts.oracle_samples,
            bracket_worst,
            1e-12,
        ),
    ]
}

/// `theta_n(x)`: mass the n-th component measure gives the short arc between
/// `-r(x)` and `0`.
pub fn theta(engine: &TransportEngine, n: u64, x: CirclePoint) -> f64 {
    let r = engine.cocycle().r_ticks(x);
    let arc = if r >= 0 {
        Arc::from_span(-engine.cocycle().r_point(x), r as u128)
    } else {
        Arc::from_span(CirclePoint::ZERO, r.unsigned_abs() as u128)
    };
    mun_arc(engine.profile(), engine.cocycle(), x, n, &arc)
}

/// Continuity probe for `theta_n`: maximal jump across an evenly spaced
/// circle grid stays under the configured modulus, and the pinned zeros
/// `theta_n(0) = theta_n(1/2) = 0` hold.
pub fn check_theta(engine: &TransportEngine, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut endpoint_worst = 0.0f64;
    for &n in &opts.theta_levels {
        let grid = opts.theta_grid;
        let mut prev = theta(engine, n, CirclePoint::ZERO);
        let first = prev;
        let mut max_jump = 0.0f64;
        for i in 1..=grid {
            let x = CirclePoint::from_f64(i as f64 / grid as f64);
            let v = if i == grid { first } else { theta(engine, n, x) };
            max_jump = max_jump.max((v - prev).abs());
            prev = v;
        }
        out.push(CheckResult::residual_under(
            &format!("theta_continuity_n{n}"),
            grid,
            max_jump,
            opts.theta_modulus,
        ));
        endpoint_worst = endpoint_worst
            .max(theta(engine, n, CirclePoint::ZERO).abs())
            .max(theta(engine, n, CirclePoint::HALF).abs());
    }
    out.push(CheckResult::residual_under(
        "theta_endpoints",
        2 * opts.theta_levels.len(),
        endpoint_worst,
        opts.tol_map,
    ));
    out
}

/// Resonance growth of the coboundary diagnostic.
pub fn check_coboundary(engine: &TransportEngine, opts: &VerifyOptions) -> CheckResult {
    let k = engine.cocycle().harmonics().len();
    let rep = coboundary_diagnostic(engine.cocycle(), k, opts.growth_factor);
    CheckResult {
        name: "coboundary_growth".into(),
        samples: k,
        residual: rep.min_growth.unwrap_or(0.0),
        tolerance: opts.growth_factor,
        pass: rep.growing,
    }
}

/// Coverage checkpoint of an orbit against an `epsilon`-grid.
#[derive(Clone, Copy, Debug)]
pub struct DensityCheckpoint {
    pub steps: u64,
    pub covered: usize,
    pub fraction: f64,
}

/// Orbit density statistics on a fixed grid.
#[derive(Clone, Debug)]
pub struct DensityReport {
    pub map: String,
    pub epsilon: f64,
    pub cells_x: usize,
    pub cells_y: usize,
    pub checkpoints: Vec<DensityCheckpoint>,
    pub final_coverage: f64,
    /// Largest distance from a grid-cell center to the orbit; estimates the
    /// radius of the biggest empty ball.
    pub max_empty_ball_radius: f64,
    /// Coverage fractions never decrease along the checkpoints.
    pub monotone: bool,
}

impl DensityReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "density[{}]: eps = {}, grid {} x {}",
            self.map, self.epsilon, self.cells_x, self.cells_y
        );
        for cp in &self.checkpoints {
            let _ = writeln!(
                out,
                "  steps {:>9}: {:>5}/{} cells ({:.2}%)",
                cp.steps,
                cp.covered,
                self.cells_x * self.cells_y,
                100.0 * cp.fraction
            );
        }
        let _ = writeln!(
            out,
            "  max empty-ball radius estimate: {:.4}",
            self.max_empty_ball_radius
        );
        out
    }
}

fn density_scan<I: Iterator<Item = (f64, f64)>>(
    map: &str,
    orbit: I,
    steps: u64,
    epsilon: f64,
    width_x: f64,
) -> DensityReport {
    let cells_x = (width_x / epsilon).ceil() as usize;
    let cells_y = (1.0 / epsilon).ceil() as usize;
    let mut hit = vec![false; cells_x * cells_y];
    let mut covered = 0usize;
    let mut checkpoints = Vec::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let every = (steps / 10).max(1);
    for (i, (x, y)) in orbit.enumerate() {
        let ix = ((x / width_x * cells_x as f64) as usize).min(cells_x - 1);
        let iy = ((y * cells_y as f64) as usize).min(cells_y - 1);
        let cell = ix * cells_y + iy;
        if !hit[cell] {
            hit[cell] = true;
            covered += 1;
        }
        points.push((x, y));
        let step = i as u64;
        if step > 0 && (step % every == 0 || step == steps) {
            checkpoints.push(DensityCheckpoint {
                steps: step,
                covered,
                fraction: covered as f64 / hit.len() as f64,
            });
        }
    }
    if checkpoints.is_empty() {
        checkpoints.push(DensityCheckpoint {
            steps,
            covered,
            fraction: covered as f64 / hit.len() as f64,
        });
    }
    // Nearest-orbit-point distance from each cell center, maximized. The
    // x-metric wraps only on the torus (width 1).
    let mut radius = 0.0f64;
    for ix in 0..cells_x {
        for iy in 0..cells_y {
            let cx = (ix as f64 + 0.5) / cells_x as f64 * width_x;
            let cy = (iy as f64 + 0.5) / cells_y as f64;
            let mut best = f64::INFINITY;
            for &(px, py) in &points {
                let dx = (cx - px).abs();
                let dx = if width_x >= 1.0 { dx.min(1.0 - dx) } else { dx };
                let dy = (cy - py).abs();
                let d = dx.max(dy.min(1.0 - dy));
                if d < best {
                    best = d;
                }
            }
            radius = radius.max(best);
        }
    }
    let monotone = checkpoints.windows(2).all(|w| w[1].covered >= w[0].covered);
    DensityReport {
        map: map.to_string(),
        epsilon,
        cells_x,
        cells_y,
        final_coverage: covered as f64 / (cells_x * cells_y) as f64,
        checkpoints,
        max_empty_ball_radius: radius,
        monotone,
    }
}

/// Density of the blown-up orbit on the torus.
pub fn density_hat(
    engine: &TransportEngine,
    z0: TorusPoint,
    steps: u64,
    epsilon: f64,
) -> DensityReport {
    density_scan(
        "S_hat",
        engine
            .orbit(MapKind::BlowUp, z0, steps)
            .map(|z| (z.x.to_f64(), z.y.to_f64())),
        steps,
        epsilon,
        1.0,
    )
}

/// Density of the quotient orbit on the canonical domain `[0, 1/2) x [0, 1)`.
pub fn density_tilde(
    engine: &TransportEngine,
    k0: KleinPoint,
    steps: u64,
    epsilon: f64,
) -> DensityReport {
    density_scan(
        "S_tilde",
        crate::klein::orbit(engine, k0, steps).map(|k| (k.rep().x.to_f64(), k.rep().y.to_f64())),
        steps,
        epsilon,
        0.5,
    )
}

fn density_checks(engine: &TransportEngine, opts: &VerifyOptions) -> (Vec<CheckResult>, Vec<DensityReport>) {
    let z0 = TorusPoint::new(
        CirclePoint::from_f64(opts.density_seed.0),
        CirclePoint::from_f64(opts.density_seed.1),
    );
    let hat = density_hat(engine, z0, opts.density_steps, opts.density_epsilon);
    let tilde = density_tilde(
        engine,
        KleinPoint::project(z0),
        opts.density_steps,
        opts.density_epsilon,
    );
    let mut checks = Vec::new();
    for rep in [&hat, &tilde] {
        let name = if rep.map == "S_hat" {
            "density_torus"
        } else {
            "density_klein"
        };
        checks.push(CheckResult {
            name: name.into(),
            samples: opts.density_steps as usize + 1,
            residual: rep.final_coverage,
            tolerance: opts.density_min_coverage,
            pass: rep.final_coverage >= opts.density_min_coverage && rep.monotone,
        });
    }
    (checks, vec![hat, tilde])
}

/// Run every check in a fixed order.
pub fn run_battery(engine: &TransportEngine, opts: &VerifyOptions) -> VerificationReport {
    let (report, _) = run_battery_with_density(engine, opts);
    report
}

/// Battery plus the underlying density reports (for rendering/emission).
pub fn run_battery_with_density(
    engine: &TransportEngine,
    opts: &VerifyOptions,
) -> (VerificationReport, Vec<DensityReport>) {
    let mut checks = Vec::new();
    checks.extend(check_config(engine, opts));
    checks.push(check_coboundary(engine, opts));
    checks.push(check_symmetry(engine, opts));
    checks.push(check_mu0_reflection(engine, opts));
    checks.push(check_quantile_roundtrip(engine, opts));
    checks.push(check_tau_endpoints(engine, opts));
    checks.push(check_semiconjugacy(engine, opts));
    checks.push(check_commutation(engine, opts));
    checks.push(check_klein(engine, opts));
    checks.extend(check_collapse(engine, opts));
    checks.extend(check_oracle(engine, opts));
    checks.extend(check_theta(engine, opts));
    let (density, reports) = density_checks(engine, opts);
    checks.extend(density);
    (VerificationReport { checks }, reports)
}

/// Engine with an even harmonic injected into the cocycle, breaking
/// `r(x + 1/2) = -r(x)`. Symmetry and commutation checks must fail on it.
pub fn broken_cocycle_engine() -> TransportEngine {
    let base = CocycleSpec::default_liouville();
    let mut harmonics = base.harmonics().to_vec();
    harmonics.push(Harmonic {
        freq: 2,
        amp: 0.02,
    });
    let broken = CocycleSpec::new_unvalidated(
        base.partial_quotients().to_vec(),
        harmonics,
        base.scale(),
    )
    .expect("structurally fine");
    TransportEngine::new_unchecked(ProfileSpec::default_star(), broken, EngineParams::default())
}

/// Engine whose profile second bump is skewed off the `P`-invariant
/// complement. The fiber symmetry check must fail on it.
pub fn broken_profile_engine() -> TransportEngine {
    TransportEngine::new_unchecked(
        ProfileSpec::default_star().with_skewed_second_bump(0.05),
        CocycleSpec::default_liouville(),
        EngineParams::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> TransportEngine {
        TransportEngine::new(
            ProfileSpec::default_star(),
            CocycleSpec::default_liouville(),
            EngineParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn quick_battery_passes_identity_checks() {
        let e = engine();
        let opts = VerifyOptions::quick();
        let (report, density) = run_battery_with_density(&e, &opts);
        for c in &report.checks {
            // Density coverage threshold is disabled in quick mode.
            assert!(c.pass, "check {} failed: {:+e} vs {:+e}", c.name, c.residual, c.tolerance);
        }
        assert!(report.pass());
        assert_eq!(density.len(), 2);
        assert!(density.iter().all(|d| d.monotone));
    }

    #[test]
    fn oracle_matches_cdf_on_lebesgue_fiber() {
        let e = engine();
        // Far from the bumps with a single term the fiber is pure Lebesgue.
        let x = CirclePoint::from_f64(0.45);
        let y = Lift::from_f64(0.37);
        let oracle = riemann_cdf_oracle(e.profile(), e.cocycle(), x, y, 1, 2000);
        let value = crate::blowup::cdf(e.profile(), e.cocycle(), x, y, 1).value;
        assert!((oracle - value).abs() <= 0.25, "within the N=1 truncation gap");
        assert!((oracle - value).abs() <= 1e-3, "same series, coarse grid");
        // Full circle reports unit mass within the gap.
        let full = riemann_cdf_oracle(e.profile(), e.cocycle(), x, Lift::ONE, 1, 2000);
        assert!((full - 1.0).abs() <= 0.25 + 1e-12);
    }

    #[test]
    fn theta_vanishes_at_pinned_points_and_refines() {
        let e = engine();
        assert!(theta(&e, 0, CirclePoint::ZERO).abs() <= 1e-12);
        assert!(theta(&e, 0, CirclePoint::HALF).abs() <= 1e-12);
        // Max jump shrinks when the grid is refined tenfold.
        let jump = |grid: usize| {
            let mut prev = theta(&e, 0, CirclePoint::ZERO);
            let mut worst = 0.0f64;
            for i in 1..=grid {
                let v = theta(&e, 0, CirclePoint::from_f64(i as f64 / grid as f64));
                worst = worst.max((v - prev).abs());
                prev = v;
            }
            worst
        };
        let coarse = jump(300);
        let fine = jump(3000);
        assert!(fine < coarse, "refinement: {fine} !< {coarse}");
    }

    #[test]
    fn negative_controls_fail_where_expected() {
        let opts = VerifyOptions::quick();

        let broken = broken_cocycle_engine();
        let sym = check_symmetry(&broken, &opts);
        let com = check_commutation(&broken, &opts);
        assert!(!sym.pass, "even harmonic must break fiber symmetry");
        assert!(!com.pass, "even harmonic must break commutation");

        let broken = broken_profile_engine();
        let sym = check_symmetry(&broken, &opts);
        assert!(!sym.pass, "skewed profile must break fiber symmetry");
    }

    #[test]
    fn reports_serialize_deterministically() {
        let e = engine();
        let opts = VerifyOptions::quick();
        let a = run_battery(&e, &opts);
        let b = run_battery(&e, &opts);
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.to_csv().starts_with("check,samples,residual,tolerance,verdict\n"));
    }

    #[test]
    fn zero_step_density_covers_one_cell() {
        let e = engine();
        let z0 = TorusPoint::new(CirclePoint::from_f64(0.3), CirclePoint::from_f64(0.7));
        let rep = density_hat(&e, z0, 0, 0.05);
        assert_eq!(rep.checkpoints.last().unwrap().covered, 1);
        assert!(rep.monotone);
    }
}
