//! Quadrature building blocks.
//!
//! Gauss–Legendre and Gauss–Jacobi rules come from `gauss-quad` and are cached
//! per (degree, exponents). Only even degrees are handed to the Jacobi
//! generator: its odd-degree rule pins the middle node to 0, which is wrong for
//! unequal exponents. Adaptive integration is a bisecting Gauss–Kronrod 7/15
//! scheme that works for complex integrands.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::{GaussJacobi, GaussLegendre};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [a, b] (the Jacobi weight, if
    /// any, stays in reference coordinates).
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn even(n: usize) -> usize {
    let n = n.max(2);
    n + n % 2
}

type RuleCache = Mutex<HashMap<(usize, u64, u64), Arc<Rule>>>;

fn cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Legendre rule with `n` nodes (rounded up to an even count).
pub fn legendre(n: usize) -> Arc<Rule> {
    jacobi(n, 0.0, 0.0)
}

/// Gauss–Jacobi rule for the weight (1−x)^a (1+x)^b on [−1, 1], with `n`
/// nodes rounded up to an even count. Requires a, b > −1.
pub fn jacobi(n: usize, a: f64, b: f64) -> Arc<Rule> {
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let n = even(n);
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let pairs = if a == 0.0 && b == 0.0 {
        GaussLegendre::new(n).expect("degree >= 2").into_node_weight_pairs()
    } else {
        GaussJacobi::new(n, a, b).expect("validated exponents").into_node_weight_pairs()
    };
    let mut pairs = pairs;
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let rule = Arc::new(Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    });
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// ∫_a^b f by a composite Gauss–Legendre rule on the given breakpoints.
pub fn composite<F: FnMut(f64) -> Complex64>(breaks: &[f64], n: usize, mut f: F) -> Complex64 {
    let rule = legendre(n);
    let mut sum = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            sum += f(x) * wt;
        }
    }
    sum
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Settings for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-11, max_intervals: 4000 }
    }
}

/// Adaptive Gauss–Kronrod integration of a complex integrand over [a, b]
/// starting from the given breakpoints (pass `&[a, b]` for none). The interval
/// with the largest error estimate is bisected until the total estimate meets
/// `max(abs, rel·|I|)`.
pub fn adaptive<F: FnMut(f64) -> Complex64>(
    breaks: &[f64],
    tol: Tolerance,
    mut f: F,
) -> Result<Complex64> {
    if breaks.len() < 2 {
        return Err(Error::Empty("breakpoint list"));
    }
    let mut pieces: Vec<(f64, f64, Complex64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: Complex64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::NonConvergence("integrand produced a non-finite value".into()));
        }
        if err <= tol.abs.max(tol.rel * total.norm()) {
            return Ok(total);
        }
        if pieces.len() >= tol.max_intervals {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature: error {err:.3e} after {} intervals",
                pieces.len()
            )));
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .3.total_cmp(&q.1 .3))
            .expect("nonempty");
        let (a, b, _, _) = pieces[idx];
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        pieces[idx] = (a, m, v1, e1);
        pieces.push((m, b, v2, e2));
    }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(breaks: &[f64], tol: Tolerance, mut f: F) -> Result<f64> {
    adaptive(breaks, tol, |x| Complex64::new(f(x), 0.0)).map(|z| z.re)
}

/// Breakpoints a = b_0 < ... < b_n = b clustered geometrically towards `a`:
/// the first panel has width `first`, and each next one is `ratio` times wider
/// until a panel would overshoot, after which the remainder is split evenly
/// into panels no wider than `max_width`.
pub fn graded_breaks(a: f64, b: f64, first: f64, ratio: f64, max_width: f64) -> Vec<f64> {
    let mut out = vec![a];
    let mut w = first.min(b - a);
    let mut x = a;
    while x + w < b && w < max_width {
        x += w;
        out.push(x);
        w *= ratio;
    }
    let rest = b - x;
    let k = (rest / max_width).ceil().max(1.0) as usize;
    for i in 1..=k {
        out.push(x + rest * i as f64 / k as f64);
    }
    *out.last_mut().unwrap() = b;
    out
}
