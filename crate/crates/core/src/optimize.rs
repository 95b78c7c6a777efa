//! One-dimensional maximisation: coarse grid bracketing followed by
//! golden-section refinement.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Evaluates `f` on `n` equispaced points of `(0, upper]` and returns the
/// bracket `[x_{i-1}, x_{i+1}]` around the best point.
pub fn grid_bracket_max<F: Fn(f64) -> f64>(f: F, upper: f64, n: usize) -> (f64, f64) {
    let h = upper / n as f64;
    let mut best = 1;
    let mut best_val = f64::NEG_INFINITY;
    for i in 1..=n {
        let v = f(i as f64 * h);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = (best - 1) as f64 * h;
    let hi = ((best + 1).min(n)) as f64 * h;
    (lo, hi)
}

/// Bracket-then-refine maximiser used by the optimal-scale routines.
pub fn maximize_on_positive<F: Fn(f64) -> f64>(f: F, upper: f64, grid: usize, tol: f64) -> (f64, f64) {
    let (lo, hi) = grid_bracket_max(&f, upper, grid);
    golden_section_max(&f, lo, hi, tol)
}
