//! Derivative-free Nelder–Mead minimisation.

/// Stopping controls.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Converged once every vertex lies within this distance of the best one,
    /// separately in each coordinate.
    pub coordinate_tolerance: f64,
    pub max_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Evaluator<F> {
    f: F,
    count: usize,
}

impl<F, E> Evaluator<F>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    fn eval(&mut self, x: &[f64]) -> Result<f64, E> {
        self.count += 1;
        (self.f)(x)
    }
}

/// Minimises `f` from `start`, with the initial simplex spanned by `start`
/// plus one `steps[i]` offset per coordinate. Non-finite objective values are
/// treated as +∞ so infeasible regions simply repel the simplex.
///
/// The start vertex is evaluated first, so the returned value never exceeds
/// `f(start)`.
pub fn minimize<F, E>(f: F, start: &[f64], steps: &[f64], opts: NelderMeadOptions) -> Result<Minimum, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    assert_eq!(start.len(), steps.len(), "one step per coordinate");
    let n = start.len();
    let mut ev = Evaluator { f, count: 0 };
    let sanitize = |v: f64| if v.is_nan() { f64::INFINITY } else { v };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = sanitize(ev.eval(start)?);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += steps[i];
        let v = sanitize(ev.eval(&x)?);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        // Stable sort keeps earlier vertices (the start first) ahead on ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0.clone();
        let spread_ok = (0..n).all(|d| simplex.iter().all(|(x, _)| (x[d] - best[d]).abs() < opts.coordinate_tolerance));
        if spread_ok {
            converged = true;
            break;
        }
        if ev.count >= opts.max_evaluations {
            break;
        }

        let centroid: Vec<f64> =
            (0..n).map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |coef: f64| -> Vec<f64> {
            (0..n).map(|d| centroid[d] + coef * (worst.0[d] - centroid[d])).collect()
        };

        let xr = along(-REFLECT);
        let fr = sanitize(ev.eval(&xr)?);
        if fr < simplex[0].1 {
            let xe = along(-EXPAND);
            let fe = sanitize(ev.eval(&xe)?);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(-CONTRACT);
            let fc = sanitize(ev.eval(&xc)?);
            (xc, fc)
        } else {
            let xc = along(CONTRACT);
            let fc = sanitize(ev.eval(&xc)?);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = (0..n).map(|d| anchor[d] + SHRINK * (vertex.0[d] - anchor[d])).collect();
            let v = sanitize(ev.eval(&x)?);
            *vertex = (x, v);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    Ok(Minimum { point, value, evaluations: ev.count, converged })
}
