//! Exact bounded-Lipschitz distance between two empirical laws on the line.
//!
//! The distance is `sup sum_i w_i f(x_i)` over `f` with `Lip(f) + sup|f| <= 1`,
//! where `w_i` is the signed weight difference at merged sample point `x_i`.
//! For a fixed Lipschitz constant `L` the best choice is `sup|f| <= s = 1 - L`,
//! and the resulting value `g(L)` is concave in `L`, so an outer golden-section
//! search finds its maximum. For fixed `(L, s)` the inner problem is a chain
//! DP: `V_{i+1}(y) = w_{i+1} y + max_{|y'-y| <= L d_i} V_i(y')` on `[-s, s]`.
//! Each `V_i` is concave piecewise linear and is kept in slope-trick form: two
//! heaps of weighted breakpoints on either side of the maximum, with lazy
//! shifts for the window step and infinite-weight walls at `-s` and `s`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Stop the outer search once the bracket on `L` is this narrow.
pub const GOLDEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Bp {
    pos: f64,
    w: i64,
}

impl PartialEq for Bp {
    fn eq(&self, o: &Self) -> bool {
        self.pos.total_cmp(&o.pos) == Ordering::Equal
    }
}
impl Eq for Bp {}
impl PartialOrd for Bp {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Bp {
    fn cmp(&self, o: &Self) -> Ordering {
        self.pos.total_cmp(&o.pos)
    }
}

/// Min-heap wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rev(Bp);
impl PartialOrd for Rev {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Rev {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.cmp(&self.0)
    }
}

const WALL: i64 = i64::MAX;

/// `max_f sum_i w_i f(x_i)` over `Lip(f) <= lip`, `|f| <= s`; `xs` strictly increasing.
///
/// Weights are integers (the signed counts scaled by `n_x n_y`) so that breakpoints
/// are consumed exactly and no slivers of weight accumulate in the heaps.
pub(crate) fn chain_value(xs: &[f64], ws: &[i64], lip: f64, s: f64) -> f64 {
    let mut left: BinaryHeap<Bp> = BinaryHeap::with_capacity(xs.len() + 1);
    let mut right: BinaryHeap<Rev> = BinaryHeap::with_capacity(xs.len() + 1);
    let (mut shl, mut shr) = (0.0, 0.0);
    left.push(Bp { pos: -s, w: WALL });
    right.push(Rev(Bp { pos: s, w: WALL }));
    let mut best = 0.0;
    for i in 0..xs.len() {
        if i > 0 {
            let r = lip * (xs[i] - xs[i - 1]);
            shl -= r;
            shr += r;
        }
        let w = ws[i];
        if w > 0 {
            let mut cur = (right.peek().expect("wall").0.pos + shr).min(s);
            let mut val = best + w as f64 * cur;
            let mut rem = w;
            loop {
                let Rev(top) = right.pop().expect("wall");
                let e = (top.pos + shr).min(s);
                val += rem as f64 * (e - cur);
                cur = e;
                if top.w <= rem {
                    rem -= top.w;
                    left.push(Bp { pos: e - shl, w: top.w });
                    if rem == 0 {
                        break;
                    }
                } else {
                    left.push(Bp { pos: e - shl, w: rem });
                    right.push(Rev(Bp { pos: top.pos, w: top.w - rem }));
                    break;
                }
            }
            best = val;
        } else if w < 0 {
            let mut cur = (left.peek().expect("wall").pos + shl).max(-s);
            let mut val = best + w as f64 * cur;
            let mut rem = -w;
            loop {
                let top = left.pop().expect("wall");
                let e = (top.pos + shl).max(-s);
                val += rem as f64 * (cur - e);
                cur = e;
                if top.w <= rem {
                    rem -= top.w;
                    right.push(Rev(Bp { pos: e - shr, w: top.w }));
                    if rem == 0 {
                        break;
                    }
                } else {
                    right.push(Rev(Bp { pos: e - shr, w: rem }));
                    left.push(Bp { pos: top.pos, w: top.w - rem });
                    break;
                }
            }
            best = val;
        }
    }
    best
}

/// Maximizes the concave `g(L) = chain_value(L, 1 - L)` over `[0, 1]`.
pub(crate) fn bl_value_merged(xs: &[f64], ws: &[i64], scale: f64, tol: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let g = |l: f64| chain_value(xs, ws, l, 1.0 - l) / scale;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    let mut best = gc.max(gd);
    while b - a > tol {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
            best = best.max(gc);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
            best = best.max(gd);
        }
    }
    best.clamp(0.0, 2.0)
}

/// Sorted `x` and `y` merged into distinct points with weights `c_x n_y - c_y n_x`.
pub(crate) fn merge_weights(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<i64>) {
    let (nx, ny) = (x.len() as i64, y.len() as i64);
    let mut xs = Vec::with_capacity(x.len() + y.len());
    let mut ws = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let p = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        let (mut cx, mut cy) = (0usize, 0usize);
        while i < x.len() && x[i] == p {
            cx += 1;
            i += 1;
        }
        while j < y.len() && y[j] == p {
            cy += 1;
            j += 1;
        }
        let w = cx as i64 * ny - cy as i64 * nx;
        if w != 0 {
            xs.push(p);
            ws.push(w);
        }
    }
    (xs, ws)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `true` when `(len, sorted values)` of `x` orders after `y`.
fn after(x: &[f64], y: &[f64]) -> bool {
    match x.len().cmp(&y.len()) {
        Ordering::Equal => x.iter().zip(y).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()) == Some(Ordering::Greater),
        o => o == Ordering::Greater,
    }
}

/// Exact distance between the empirical laws of `x` and `y`; symmetric bit for bit.
pub fn bl_exact_1d(x: &[f64], y: &[f64]) -> f64 {
    bl_exact_1d_tol(x, y, GOLDEN_TOL)
}

pub(crate) fn bl_exact_1d_tol(x: &[f64], y: &[f64], tol: f64) -> f64 {
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let (mut sx, mut sy) = (sorted(x), sorted(y));
    if after(&sx, &sy) {
        std::mem::swap(&mut sx, &mut sy);
    }
    let (xs, ws) = merge_weights(&sx, &sy);
    bl_value_merged(&xs, &ws, sx.len() as f64 * sy.len() as f64, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_masses(x: f64) -> f64 {
        bl_exact_1d(&[0.0], &[x])
    }

    #[test]
    fn point_mass_closed_form() {
        assert!((point_masses(2.0) - 1.0).abs() < 1e-8);
        for x in [0.1, 0.5, 3.0, 10.0] {
            assert!((point_masses(x) - 2.0 * x / (2.0 + x)).abs() < 1e-8, "{x}");
        }
        assert!(point_masses(1e6) > 1.99);
        assert!(point_masses(1e12) <= 2.0);
    }

    #[test]
    fn identical_samples_give_zero() {
        let x = [0.3, -1.0, 2.5, 0.3];
        assert_eq!(bl_exact_1d(&x, &[2.5, 0.3, 0.3, -1.0]), 0.0);
    }

    #[test]
    fn exact_symmetry() {
        let x = [0.1, 0.7, -0.4, 2.0, 1.1];
        let y = [0.0, 0.9, 1.3];
        assert_eq!(bl_exact_1d(&x, &y), bl_exact_1d(&y, &x));
    }

    #[test]
    fn chain_value_two_points() {
        // f(0) = -s, f(x) = min(s, -s + L x)
        let v = chain_value(&[0.0, 3.0], &[-1, 1], 0.25, 0.75);
        assert!((v - 0.75).abs() < 1e-15);
        let v = chain_value(&[0.0, 3.0], &[-1, 1], 0.5, 0.5);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
