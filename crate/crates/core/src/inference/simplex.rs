//! Nelder–Mead downhill simplex minimization on an unconstrained space.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Stop once the spread of function values over the simplex drops below
    /// this (absolute).
    pub f_tol: f64,
    /// ... and the largest vertex distance from the best vertex is below this.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_evals: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Starts from the axis-aligned simplex `x0, x0 + steps[i] e_i`.
pub fn minimize<const N: usize, F>(
    f: F,
    x0: [f64; N],
    steps: [f64; N],
    opts: SimplexOptions,
) -> SimplexResult<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut verts = vec![x0];
    for i in 0..N {
        let mut v = x0;
        v[i] += steps[i];
        verts.push(v);
    }
    minimize_from(f, verts, opts)
}

/// Starts from the given `N + 1` vertices.
///
/// # Panics
/// If `verts.len() != N + 1`.
pub fn minimize_from<const N: usize, F>(
    mut f: F,
    mut verts: Vec<[f64; N]>,
    opts: SimplexOptions,
) -> SimplexResult<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    assert_eq!(
        verts.len(),
        N + 1,
        "a simplex in {N} dimensions has {} vertices",
        N + 1
    );
    let mut evals = 0usize;
    let mut eval = |x: &[f64; N], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut vals: Vec<f64> = verts.iter().map(|v| eval(v, &mut evals)).collect();
    let mut converged = false;

    loop {
        // order vertices best..worst
        let mut idx: Vec<usize> = (0..=N).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = idx.iter().map(|&i| verts[i]).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let spread = vals[N] - vals[0];
        let size = verts[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&verts[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.is_finite() && spread <= opts.f_tol && size <= opts.x_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let mut centroid = [0.0; N];
        for v in &verts[..N] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / N as f64;
            }
        }
        let along = |t: f64| -> [f64; N] {
            let mut p = [0.0; N];
            for i in 0..N {
                p[i] = centroid[i] + t * (verts[N][i] - centroid[i]);
            }
            p
        };

        let xr = along(-REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-EXPAND);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                verts[N] = xe;
                vals[N] = fe;
            } else {
                verts[N] = xr;
                vals[N] = fr;
            }
            continue;
        }
        if fr < vals[N - 1] {
            verts[N] = xr;
            vals[N] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[N] {
            let xc = along(-CONTRACT);
            (xc, eval(&xc, &mut evals))
        } else {
            let xc = along(CONTRACT);
            (xc, eval(&xc, &mut evals))
        };
        if fc < vals[N].min(fr) {
            verts[N] = xc;
            vals[N] = fc;
            continue;
        }
        let best = verts[0];
        for j in 1..=N {
            for i in 0..N {
                verts[j][i] = best[i] + SHRINK * (verts[j][i] - best[i]);
            }
            vals[j] = eval(&verts[j], &mut evals);
        }
    }

    SimplexResult {
        x: verts[0],
        f: vals[0],
        evals,
        converged,
    }
}
