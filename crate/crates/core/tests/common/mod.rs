#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sfp_core::game::{random_ergodic_game, GameClass, GameDims, StochasticGame};
use sfp_core::regularizers::Temperature;

pub fn beta(b: f64) -> Temperature<f64> {
    Temperature::new(b).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn generated(
    num_states: usize,
    action_counts: &[usize],
    discount: f64,
    class: GameClass<f64>,
    seed: u64,
) -> StochasticGame<f64> {
    let dims = GameDims {
        num_states,
        action_counts: action_counts.to_vec(),
        discount,
    };
    random_ergodic_game(&dims, &class, 0.3, &mut rng(seed)).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Normalized point of the simplex from positive weights.
pub fn normalize(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Saddle value of `max_p min_q φ(p, q)` over 2×2 mixed strategies, with
/// `φ` concave in `p` and convex in `q`, by nested golden sections on the
/// probability of the first action.
pub fn saddle_2x2(phi: impl Fn(f64, f64) -> f64, tol: f64) -> (f64, f64, f64) {
    let inner = |p: f64| -golden_max(|q| -phi(p, q), 0.0, 1.0, tol).1;
    let (p, v) = golden_max(inner, 0.0, 1.0, tol);
    let (q, _) = golden_max(|q| -phi(p, q), 0.0, 1.0, tol);
    (p, q, v)
}

/// `−p log p − (1−p) log(1−p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}
