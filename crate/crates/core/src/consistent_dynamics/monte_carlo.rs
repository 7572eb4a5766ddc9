use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::probabilities::ShapeDistribution;
use super::{gamma2_law, DynamicsInitial};
use crate::error::{Error, Result};
use crate::numerics::gaussian_samples;
use crate::shape::ShapeTag;
use crate::shape_oracle::classify_direct;
use crate::term_structure::CurveKind;

/// Empirical shape frequencies from exact draws of `gamma2(t)`.
pub fn sample_shapes(kind: CurveKind, init: &DynamicsInitial, t: f64, n: usize, seed: u64) -> Result<ShapeDistribution> {
    sample_shapes_threads(kind, init, t, n, seed, 1)
}

pub fn sample_shapes_threads(
    kind: CurveKind,
    init: &DynamicsInitial,
    t: f64,
    n: usize,
    seed: u64,
    threads: usize,
) -> Result<ShapeDistribution> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!("time must be positive, got {t}")));
    }
    let (mu, var) = gamma2_law(init, t)?;
    let draws = gaussian_samples(mu, var.sqrt(), n, seed)?;
    let classify = |chunk: &[f64]| -> Result<Vec<ShapeTag>> {
        chunk.iter().map(|&g2| Ok(classify_direct(kind, &init.params_at(t, g2)?)?.tag)).collect()
    };
    let threads = threads.max(1).min(n);
    let tags: Vec<ShapeTag> = if threads == 1 {
        classify(&draws)?
    } else {
        let size = n.div_ceil(threads);
        let parts: Vec<Result<Vec<ShapeTag>>> = std::thread::scope(|s| {
            let hs: Vec<_> = draws.chunks(size).map(|c| s.spawn(move || classify(c))).collect();
            hs.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut v = Vec::with_capacity(n);
        for p in parts {
            v.extend(p?);
        }
        v
    };
    let mut counts: BTreeMap<ShapeTag, usize> = BTreeMap::new();
    for s in tags {
        *counts.entry(s).or_insert(0) += 1;
    }
    let probs = counts.into_iter().map(|(s, c)| (s, c as f64 / n as f64)).collect();
    Ok(ShapeDistribution { t, kind, probs, samples: Some(n) })
}

/// Sample mean and variance of `gamma2(t)` from an Euler scheme for `beta1`
/// with `steps` equal steps.
pub fn euler_gamma2_moments(init: &DynamicsInitial, t: f64, steps: usize, paths: usize, seed: u64) -> Result<(f64, f64)> {
    if !(t > 0.0) || steps == 0 || paths < 2 {
        return Err(Error::Argument("need t > 0, steps >= 1 and paths >= 2".into()));
    }
    let tau = init.tau1();
    let (b2, b3) = (init.beta2(), init.beta3());
    let dt = t / steps as f64;
    let sdt = dt.sqrt();
    let drift_t: Vec<(f64, f64)> = (0..steps)
        .map(|k| {
            let s = k as f64 * dt;
            let e = (-s / tau).exp();
            (b2 / tau * e + 2.0 * b3 / tau * e * e, (2.0 * b3).sqrt() / tau * e)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b3_t = b3 * (-2.0 * t / tau).exp();
    let finals: Vec<f64> = (0..paths)
        .map(|_| {
            let mut b1 = init.beta1();
            for &(a, vol) in &drift_t {
                let z: f64 = StandardNormal.sample(&mut rng);
                b1 += (a - b1 / tau) * dt + vol * sdt * z;
            }
            b1 / b3_t
        })
        .collect();
    let m = finals.iter().sum::<f64>() / paths as f64;
    let v = finals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (paths - 1) as f64;
    Ok((m, v))
}
