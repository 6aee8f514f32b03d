use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`; returns the best point
/// evaluated and its value. Errors from `f` are propagated.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::InvalidModel(format!("bad search interval [{lo}, {hi}] or tolerance {tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = if fd > fc { (d, fd) } else { (c, fc) };
    let mut iter = 0;
    while b - a > tol {
        if iter == max_iter {
            return Err(Error::NoConvergence {
                what: "golden-section search",
                iterations: max_iter,
                residual: b - a,
            });
        }
        iter += 1;
        // Ties keep the left part: the earliest maximizer wins.
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            if fc > best.1 || (fc == best.1 && c < best.0) {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    Ok(best)
}

/// `f` at `points` evenly spaced points of `[lo, hi]`, both ends included.
pub fn grid_scan<F>(mut f: F, lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points < 2 || !(lo < hi) {
        return Err(Error::InvalidModel(format!("grid of {points} points on [{lo}, {hi}]")));
    }
    (0..points)
        .map(|i| {
            let x = if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
            f(x).map(|y| (x, y))
        })
        .collect()
}
