//! Simpson quadrature: composite with panel doubling, and recursive adaptive.

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Richardson estimate `|S_2n - S_n| / 15`.
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CompositeOptions {
    pub initial_panels: usize,
    pub max_panels: usize,
    pub rel_tol: f64,
}

impl Default for CompositeOptions {
    fn default() -> Self {
        Self {
            initial_panels: 64,
            max_panels: 1 << 14,
            rel_tol: 1e-9,
        }
    }
}

fn composite(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Composite Simpson on `[a, b]`, doubling the (even) panel count until two
/// successive estimates agree to `rel_tol`.
pub fn composite_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    opts: CompositeOptions,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let mut panels = opts.initial_panels.max(2) & !1;
    let mut prev = composite(&f, a, b, panels);
    loop {
        let next_panels = panels * 2;
        let next = composite(&f, a, b, next_panels);
        let diff = (next - prev).abs();
        let converged = diff <= opts.rel_tol * next.abs() || diff == 0.0;
        if converged || next_panels >= opts.max_panels {
            return Quadrature {
                value: next,
                error: diff / 15.0,
                panels: next_panels,
                converged,
            };
        }
        panels = next_panels;
        prev = next;
    }
}

const MAX_DEPTH: u32 = 48;

/// Recursive adaptive Simpson with absolute tolerance `tol` on `[a, b]`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_on_exponential() {
        let q = composite_simpson(|s| (-2.0 * s).exp(), 0.0, 1.0, CompositeOptions::default());
        let exact = (1.0 - (-2.0f64).exp()) / 2.0;
        assert!(q.converged);
        assert!((q.value - exact).abs() < 1e-9 * exact);
        assert!(q.error < 1e-9);
    }

    #[test]
    fn empty_interval() {
        let q = composite_simpson(|s| s, 1.0, 1.0, CompositeOptions::default());
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn adaptive_on_gaussian() {
        // ∫_0^∞ e^{-u²} du = √π/2
        let v = adaptive_simpson(|u| (-u * u).exp(), 0.0, 12.0, 1e-14);
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - x, -1.0, 2.0, 1e-12);
        assert!((v - 2.25).abs() < 1e-13);
    }
}
