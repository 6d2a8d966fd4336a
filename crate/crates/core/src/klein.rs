//! The Klein bottle as the quotient of the torus by the free involution
//! `P(x, y) = (x + 1/2, 1 - y)`.
//!
//! Each class `{z, P(z)}` has exactly one representative with `x in [0, 1/2)`;
//! picking it is exact in tick arithmetic, so projection is bit-deterministic.
//! Since the blown-up map commutes with `P`, it descends to a fiber-preserving
//! map `S_tilde` of the quotient.

use crate::circle::CirclePoint;
use crate::skewbase::{involution_p, TorusPoint};
use crate::transport::TransportEngine;

/// A point of the Klein bottle, stored as the canonical representative of
/// its `P`-class (the one with `x in [0, 1/2)`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct KleinPoint {
    rep: TorusPoint,
}

impl KleinPoint {
    /// Quotient projection: `project(z) == project(P(z))` exactly.
    pub fn project(z: TorusPoint) -> Self {
        if z.x.ticks() < CirclePoint::HALF.ticks() {
            Self { rep: z }
        } else {
            Self {
                rep: involution_p(z),
            }
        }
    }

    /// The canonical representative.
    pub fn rep(&self) -> TorusPoint {
        self.rep
    }
}

/// Quotient metric: the torus product metric minimized over the two
/// representatives of the second class. Zero exactly on equal classes.
pub fn klein_dist(a: KleinPoint, b: KleinPoint) -> f64 {
    let d1 = a.rep.dist(b.rep);
    let d2 = a.rep.dist(involution_p(b.rep));
    d1.min(d2)
}

/// The induced map on the quotient: `S_tilde(k) = project(S_hat(rep(k)))`.
///
/// Well-defined because `S_hat` commutes with `P`; the verification battery
/// measures the residual over both halves of the torus.
pub fn s_tilde(engine: &TransportEngine, k: KleinPoint) -> KleinPoint {
    KleinPoint::project(engine.s_hat(k.rep))
}

/// Stream the `S_tilde` orbit `k0, ..., S_tilde^K(k0)` (`K + 1` points),
/// reusing the forward fiber kernel whenever canonicalization does not flip
/// the representative.
pub fn orbit(
    engine: &TransportEngine,
    k0: KleinPoint,
    steps: u64,
) -> impl Iterator<Item = KleinPoint> + '_ {
    KleinOrbitIter {
        engine,
        current: k0,
        kernel: None,
        emitted: 0,
        total: steps + 1,
    }
}

struct KleinOrbitIter<'a> {
    engine: &'a TransportEngine,
    current: KleinPoint,
    kernel: Option<crate::blowup::FiberKernel>,
    emitted: u64,
    total: u64,
}

impl Iterator for KleinOrbitIter<'_> {
    type Item = KleinPoint;

    fn next(&mut self) -> Option<KleinPoint> {
        if self.emitted == self.total {
            return None;
        }
        let out = self.current;
        self.emitted += 1;
        if self.emitted < self.total {
            let z = self.current.rep;
            let k0 = match self.kernel.take() {
                Some(k) if k.base_point() == z.x => k,
                _ => self.engine.fiber(z.x),
            };
            let k1 = self.engine.fiber(z.x + self.engine.cocycle().alpha());
            let img = self.engine.s_hat_in(&k0, &k1, z);
            self.current = KleinPoint::project(img);
            // Reusable only when the canonical representative kept the
            // forward fiber.
            self.kernel = Some(k1);
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::ProfileSpec;
    use crate::circle::Lift;
    use crate::skewbase::CocycleSpec;
    use crate::transport::EngineParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine() -> TransportEngine {
        TransportEngine::new(
            ProfileSpec::default_star(),
            CocycleSpec::default_liouville(),
            EngineParams::default(),
        )
        .unwrap()
    }

    fn pt(x: f64, y: f64) -> TorusPoint {
        TorusPoint::new(CirclePoint::from_f64(x), CirclePoint::from_f64(y))
    }

    #[test]
    fn projection_examples() {
        let k = KleinPoint::project(pt(0.8, 0.3));
        assert!(k.rep().dist(pt(0.3, 0.7)) < 1e-15);
        let k = KleinPoint::project(pt(0.3, 0.7));
        assert_eq!(k.rep(), pt(0.3, 0.7));
        let k = KleinPoint::project(pt(0.5, 0.2));
        assert!(k.rep().dist(pt(0.0, 0.8)) < 1e-15);
    }

    #[test]
    fn projection_collapses_classes_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10_000 {
            let z = TorusPoint::new(
                CirclePoint::from_ticks(rng.gen()),
                CirclePoint::from_ticks(rng.gen()),
            );
            let a = KleinPoint::project(z);
            let b = KleinPoint::project(involution_p(z));
            assert_eq!(a, b);
            assert_eq!(klein_dist(a, b), 0.0);
            assert!(a.rep().x.ticks() < CirclePoint::HALF.ticks());
        }
    }

    #[test]
    fn quotient_metric() {
        let a = KleinPoint::project(pt(0.1, 0.2));
        let b = KleinPoint::project(pt(0.1, 0.25));
        assert!((klein_dist(a, b) - 0.05).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..2000 {
            let mk = |rng: &mut ChaCha8Rng| {
                KleinPoint::project(TorusPoint::new(
                    CirclePoint::from_ticks(rng.gen()),
                    CirclePoint::from_ticks(rng.gen()),
                ))
            };
            let (a, b, c) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
            assert!((klein_dist(a, b) - klein_dist(b, a)).abs() < 1e-15);
            assert!(klein_dist(a, b) <= klein_dist(a, c) + klein_dist(c, b) + 1e-15);
        }
    }

    #[test]
    fn s_tilde_well_defined_on_both_halves() {
        let e = engine();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let z = TorusPoint::new(
                CirclePoint::from_ticks(rng.gen()),
                CirclePoint::from_ticks(rng.gen()),
            );
            let lhs = s_tilde(&e, KleinPoint::project(z));
            let rhs = KleinPoint::project(e.s_hat(z));
            worst = worst.max(klein_dist(lhs, rhs));
        }
        assert!(worst <= 1e-9, "worst residual {worst}");
    }

    #[test]
    fn s_tilde_advances_base_with_flip_parity() {
        let e = engine();
        let alpha = e.cocycle().alpha();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..200 {
            let k = KleinPoint::project(TorusPoint::new(
                CirclePoint::from_ticks(rng.gen()),
                CirclePoint::from_ticks(rng.gen()),
            ));
            let img = s_tilde(&e, k);
            let fwd = k.rep().x + alpha;
            let expect = if fwd.ticks() < CirclePoint::HALF.ticks() {
                fwd
            } else {
                fwd + CirclePoint::HALF
            };
            assert_eq!(img.rep().x, expect);
        }
    }

    #[test]
    fn collapse_survives_the_quotient() {
        let e = engine();
        let x1 = e.profile().x1_star();
        let y1 = e.fiber(x1).cdf(e.profile().y1_star()).value;
        let base = CirclePoint::from_f64(y1);
        let top = KleinPoint::project(TorusPoint::new(x1, base));
        let bottom = KleinPoint::project(TorusPoint::new(
            x1,
            base - CirclePoint::from_f64(0.24),
        ));
        // A nondegenerate interval in the quotient...
        assert!(klein_dist(top, bottom) > 0.2);
        // ... maps to a single point.
        let d = klein_dist(s_tilde(&e, top), s_tilde(&e, bottom));
        assert!(d <= 1e-9, "collapsed images {d}");
        let _ = Lift::ZERO;
    }

    #[test]
    fn orbit_iterates_s_tilde() {
        let e = engine();
        let k0 = KleinPoint::project(pt(0.3, 0.7));
        let pts: Vec<_> = orbit(&e, k0, 40).collect();
        assert_eq!(pts.len(), 41);
        let mut k = k0;
        for p in &pts {
            assert_eq!(*p, k);
            assert!(p.rep().x.ticks() < CirclePoint::HALF.ticks());
            k = s_tilde(&e, k);
        }
    }
}
