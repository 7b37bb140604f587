//! Small numerical helpers: bracketing root search and sampling grids.

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops when the bracket is narrower than `tol` or after the bracket can no
/// longer shrink in floating point. Returns `None` if the endpoints do not
/// bracket a sign change.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Scans `grid` for sign changes of `f` and refines each bracket by bisection.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &t in grid {
        let v = f(t);
        if let Some((tp, vp)) = prev {
            if vp == 0.0 {
                roots.push(tp);
            } else if v != 0.0 && vp.signum() != v.signum() {
                if let Some(r) = bisect(&mut f, tp, t, tol) {
                    roots.push(r);
                }
            }
        }
        prev = Some((t, v));
    }
    if let Some((tp, vp)) = prev {
        if vp == 0.0 {
            roots.push(tp);
        }
    }
    roots
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
            v[n - 1] = end;
            v
        }
    }
}

/// `n` log-spaced points from `start` to `end` inclusive (both positive).
/// The endpoints are reproduced exactly.
pub fn logspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    assert!(
        start > 0.0 && end > 0.0,
        "logspace needs positive endpoints"
    );
    let mut v: Vec<f64> = linspace(start.ln(), end.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect();
    if let Some(first) = v.first_mut() {
        *first = start;
    }
    if n > 1 {
        v[n - 1] = end;
    }
    v
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_cube_root() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn scan_finds_all_roots() {
        let grid = linspace(0.0, 10.0, 1001);
        let roots = scan_roots(|x| (x - 1.5) * (x - 4.25) * (x - 7.75), &grid, 1e-13);
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([1.5, 4.25, 7.75]) {
            assert!((r - want).abs() < 1e-12);
        }
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = logspace(0.01, 0.125, 37);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[36], 0.125);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..10).map(|i| (i as f64).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x + 1.0).collect();
        assert!((fit_slope(&xs, &ys) - 2.5).abs() < 1e-12);
    }
}
