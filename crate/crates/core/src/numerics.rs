//! Small numerical helpers shared by the profile, stability and flow code.

/// Limit of `f` at `end` approached from inside `[-1, 1]`, by three-level
/// Richardson extrapolation of samples at distances `h`, `h/2`, `h/4`.
/// Assumes `f` is smooth up to `end`, so the error is `O(h³)`.
pub fn richardson_limit<F: Fn(f64) -> f64>(f: F, end: f64, h: f64) -> f64 {
    let dir = if end > 0.0 { -1.0 } else { 1.0 };
    let a = f(end + dir * h);
    let b = f(end + dir * h / 2.0);
    let c = f(end + dir * h / 4.0);
    (8.0 * c - 6.0 * b + a) / 3.0
}

/// Finite-difference weights for the `m`-th derivative at `x0` on the
/// nodes `xs` (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First derivative of `f` at `z` by the sixth-order central stencil.
pub fn central_derivative6<F: Fn(f64) -> f64>(f: F, z: f64, h: f64) -> f64 {
    const W: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    let mut acc = 0.0;
    for (j, w) in W.iter().enumerate() {
        let o = (j + 1) as f64 * h;
        acc += w * (f(z + o) - f(z - o));
    }
    acc / h
}

/// `n + 1` equally spaced points covering `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}
