//! Quadrature engineering for oscillatory integrands.
//!
//! The localization mechanism lives in increasingly rapid phase
//! oscillations, so aliasing them is the one numerical sin this crate
//! cannot afford. Every integral goes through cells that are split until
//! they hold at most [`MAX_CYCLES_PER_CELL`] phase cycles, then evaluated
//! with a fixed-order Gauss–Legendre rule carrying an embedded lower-order
//! error estimate.

use num_complex::Complex64;

/// Cells holding more than this many phase cycles are split before
/// fixed-order quadrature.
pub const MAX_CYCLES_PER_CELL: f64 = 8.0;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Nodes and weights by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss rule needs at least 2 nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Map nodes/weights onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

/// Legendre P_n and P_n' at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integral value plus an error estimate from an embedded lower-order rule.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub cells: usize,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            cells: 0,
        }
    }

    fn merge(&mut self, other: QuadResult) {
        self.value += other.value;
        self.error += other.error;
        self.cells += other.cells;
    }
}

/// Pair of rules used for the embedded error estimate.
#[derive(Debug, Clone)]
pub struct OscQuad {
    hi: GaussRule,
    lo: GaussRule,
    max_cycles: f64,
    max_depth: u32,
}

impl Default for OscQuad {
    fn default() -> Self {
        // 24-point cells hold the 8-cycle budget at machine precision.
        OscQuad::new(24)
    }
}

impl OscQuad {
    pub fn new(order: usize) -> Self {
        OscQuad {
            hi: GaussRule::new(order),
            lo: GaussRule::new(order / 2),
            max_cycles: MAX_CYCLES_PER_CELL,
            max_depth: 28,
        }
    }

    /// Integrate a complex-valued `f` over [a, b]. `cycles(a, b)` estimates
    /// the number of phase cycles of the integrand across a cell; cells
    /// exceeding the threshold are split before quadrature.
    pub fn integrate<F, P>(&self, f: &F, a: f64, b: f64, cycles: &P) -> QuadResult
    where
        F: Fn(f64) -> Complex64,
        P: Fn(f64, f64) -> f64,
    {
        let mut out = QuadResult::zero();
        self.recurse(f, a, b, cycles, 0, &mut out);
        out
    }

    /// Integrate over panels with fixed interior breakpoints (gap edges,
    /// shell crossings) so discontinuities sit on cell boundaries.
    pub fn integrate_panels<F, P>(&self, f: &F, edges: &[f64], cycles: &P) -> QuadResult
    where
        F: Fn(f64) -> Complex64,
        P: Fn(f64, f64) -> f64,
    {
        let mut out = QuadResult::zero();
        for w in edges.windows(2) {
            out.merge(self.integrate(f, w[0], w[1], cycles));
        }
        out
    }

    fn recurse<F, P>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        cycles: &P,
        depth: u32,
        out: &mut QuadResult,
    ) where
        F: Fn(f64) -> Complex64,
        P: Fn(f64, f64) -> f64,
    {
        if b <= a {
            return;
        }
        if depth < self.max_depth && cycles(a, b) > self.max_cycles {
            let mid = 0.5 * (a + b);
            self.recurse(f, a, mid, cycles, depth + 1, out);
            self.recurse(f, mid, b, cycles, depth + 1, out);
            return;
        }
        let mut hi = Complex64::new(0.0, 0.0);
        for (x, w) in self.hi.mapped(a, b) {
            hi += f(x) * w;
        }
        let mut lo = Complex64::new(0.0, 0.0);
        for (x, w) in self.lo.mapped(a, b) {
            lo += f(x) * w;
        }
        out.merge(QuadResult {
            value: hi,
            error: (hi - lo).norm(),
            cells: 1,
        });
    }

    /// Real-valued convenience wrapper.
    pub fn integrate_real<F, P>(&self, f: &F, a: f64, b: f64, cycles: &P) -> (f64, f64)
    where
        F: Fn(f64) -> f64,
        P: Fn(f64, f64) -> f64,
    {
        let r = self.integrate(&|x| Complex64::new(f(x), 0.0), a, b, cycles);
        (r.value.re, r.error)
    }
}

/// Uniformly spaced samples of `[a, b]` including both endpoints.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + step * i as f64).collect()
}
