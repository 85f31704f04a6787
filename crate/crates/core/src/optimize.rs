//! Derivative-free local maximization (Nelder-Mead simplex).

/// Maximizes `f` starting from `start`, with an initial simplex of edge `step`.
///
/// Stops when the simplex diameter drops below `xtol` or after `max_iter`
/// iterations. Returns the best point and its value.
pub(crate) fn nelder_mead_max<const N: usize, F>(
    f: F,
    start: [f64; N],
    step: f64,
    xtol: f64,
    max_iter: usize,
) -> ([f64; N], f64)
where
    F: Fn(&[f64; N]) -> f64,
{
    // Minimize the negation internally.
    let g = |x: &[f64; N]| -f(x);
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, g(&start)));
    for i in 0..N {
        let mut x = start;
        x[i] += step;
        simplex.push((x, g(&x)));
    }

    let lerp = |a: &[f64; N], b: &[f64; N], t: f64| -> [f64; N] {
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        out
    };

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < xtol {
            break;
        }

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for k in 0..N {
                centroid[k] += x[k] / N as f64;
            }
        }
        let (worst, f_worst) = simplex[N];
        let f_best = simplex[0].1;
        let f_second = simplex[N - 1].1;

        let reflected = lerp(&centroid, &worst, -1.0);
        let f_r = g(&reflected);
        if f_r < f_best {
            let expanded = lerp(&centroid, &worst, -2.0);
            let f_e = g(&expanded);
            simplex[N] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
            continue;
        }
        if f_r < f_second {
            simplex[N] = (reflected, f_r);
            continue;
        }
        let (contracted, f_c) = if f_r < f_worst {
            let x = lerp(&centroid, &reflected, 0.5);
            (x, g(&x))
        } else {
            let x = lerp(&centroid, &worst, 0.5);
            (x, g(&x))
        };
        if f_c < f_worst.min(f_r) {
            simplex[N] = (contracted, f_c);
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].0;
        for v in simplex.iter_mut().skip(1) {
            let x = lerp(&best, &v.0, 0.5);
            *v = (x, g(&x));
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, -simplex[0].1)
}
