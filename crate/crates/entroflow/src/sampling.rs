//! Reproducible random test-function generator: sums of 1-3 Gaussian bumps
//! with centers well inside the truncation box, floored at a tiny positive
//! level and normalized to unit mass.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{integrate, Domain, Field};

/// Deterministic bump sample for the given seed; every sweep indexes its
/// samples by seed so runs are reproducible and parallelizable.
pub fn random_bumps(domain: Arc<Domain>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = domain.dim();
    let n_bumps = rng.gen_range(1..=3);
    let mut bumps = Vec::with_capacity(n_bumps);
    for _ in 0..n_bumps {
        let mut center = [0.0; 3];
        let mut width = [1.0; 3];
        for a in 0..dim {
            let lo = domain.lo(a);
            let hi = domain.hi(a);
            let len = hi - lo;
            // keep the support safely inside the box
            center[a] = rng.gen_range(lo + 0.25 * len..hi - 0.25 * len);
            width[a] = rng.gen_range(0.05 * len..0.15 * len);
        }
        let amp: f64 = rng.gen_range(0.3..1.0);
        bumps.push((center, width, amp));
    }
    let f = Field::from_fn(domain, |x| {
        bumps
            .iter()
            .map(|(c, w, amp)| {
                let mut e = 0.0;
                for a in 0..dim {
                    let z = (x[a] - c[a]) / w[a];
                    e += 0.5 * z * z;
                }
                amp * (-e).exp()
            })
            .sum()
    });
    let floor = 1e-12 * f.max();
    let f = f.map(|v| v.max(floor));
    let mass = integrate(&f);
    f.scale(1.0 / mass)
}
