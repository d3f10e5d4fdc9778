//! Derivative-free minimisers for one and two parameters.

/// Result of a minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<X> {
    pub x: X,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Minimum<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < max_iter {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };
    // The bracket ends are never evaluated by the search itself.
    let (fa, fb) = (f(lo), f(hi));
    let (x, value) = if fa < value && fa <= fb {
        (lo, fa)
    } else if fb < value {
        (hi, fb)
    } else {
        (x, value)
    };
    Minimum {
        x,
        value,
        iterations,
        converged: (b - a).abs() <= tol,
    }
}

/// Nelder–Mead simplex minimisation in two dimensions.
///
/// Points where `f` returns a non-finite value are treated as infeasible.
pub fn nelder_mead_2d<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    start: [f64; 2],
    step: [f64; 2],
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Minimum<[f64; 2]> {
    let mut eval = |x: [f64; 2]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut values = simplex.map(&mut eval);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        // Order best .. worst.
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = (values[2] - values[0]).abs();
        let size = (1..3)
            .map(|k| {
                (simplex[k][0] - simplex[0][0])
                    .abs()
                    .max((simplex[k][1] - simplex[0][1]).abs())
            })
            .fold(0.0, f64::max);
        if spread <= ftol * (values[0].abs() + ftol) && size <= xtol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };

        let xr = along(-1.0);
        let fr = eval(xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(xe);
            if fe < fr {
                simplex[2] = xe;
                values[2] = fe;
            } else {
                simplex[2] = xr;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = xr;
            values[2] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[2] {
            let xc = along(-0.5);
            (xc, eval(xc))
        } else {
            let xc = along(0.5);
            (xc, eval(xc))
        };
        if fc < values[2].min(fr) {
            simplex[2] = xc;
            values[2] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        for k in 1..3 {
            simplex[k] = [
                simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
            ];
            values[k] = eval(simplex[k]);
        }
    }

    let best = (0..3)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("three vertices");
    Minimum {
        x: simplex[best],
        value: values[best],
        iterations,
        converged,
    }
}
