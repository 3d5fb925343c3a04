#![allow(dead_code)]

/// Feigenbaum parameter of `q_t`, frozen from `feigenbaum_parameter`.
pub const T_F: f64 = 0.892_486_417_967_735_2;

/// `q_t^n(0)` by direct iteration.
pub fn critical_iterate(t: f64, n: usize) -> f64 {
    (0..n).fold(0.0, |x, _| (2.0 * t - 1.0) - 2.0 * t * x * x)
}

/// Accumulation point of the superstable parameters `t_k`, where `0` has
/// period `2^k`. Each `t_k` is located by a secant search started from the
/// geometric prediction of the previous two; the limit is extrapolated with
/// the measured ratio of successive gaps.
pub fn feigenbaum_parameter() -> f64 {
    let mut ts = vec![0.5, (1.0 + 5f64.sqrt()) / 4.0];
    let mut delta = 4.669;
    for k in 2..=12 {
        let n = 1usize << k;
        let (a, b) = (ts[k - 2], ts[k - 1]);
        let mut x0 = b + (b - a) / delta;
        let mut x1 = x0 + 1e-3 * (b - a) / delta;
        let (mut g0, mut g1) = (critical_iterate(x0, n), critical_iterate(x1, n));
        for _ in 0..100 {
            if g1 == g0 {
                break;
            }
            let x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
            x0 = x1;
            g0 = g1;
            x1 = x2;
            g1 = critical_iterate(x1, n);
            if (x1 - x0).abs() < 1e-16 {
                break;
            }
        }
        ts.push(x1);
        let m = ts.len();
        delta = (ts[m - 2] - ts[m - 3]) / (ts[m - 1] - ts[m - 2]);
    }
    let m = ts.len();
    ts[m - 1] + (ts[m - 1] - ts[m - 2]) / (delta - 1.0)
}
