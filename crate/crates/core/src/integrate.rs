//! Classical fixed-step fourth-order Runge-Kutta.

/// Failure inside a right-hand side, tagged with the step that hit it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("integration failed at step {step}: {source}")]
pub struct StepError<E: std::error::Error + 'static> {
    pub step: usize,
    #[source]
    pub source: E,
}

pub fn rk4_step<const N: usize, E>(
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], E> {
    let axpy = |a: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] { std::array::from_fn(|i| a[i] + s * k[i]) };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, &k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, &axpy(y, &k2, 0.5 * h))?;
    let k4 = f(t + h, &axpy(y, &k3, h))?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Integrate from `t0` over `steps` steps of size `h`. The returned
/// trajectory has `steps + 1` states and starts with `y0`.
pub fn rk4<const N: usize, E: std::error::Error + 'static>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    y0: [f64; N],
    t0: f64,
    h: f64,
    steps: usize,
) -> Result<Vec<[f64; N]>, StepError<E>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0);
    let mut y = y0;
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        y = rk4_step(&mut f, t, &y, h).map_err(|source| StepError { step, source })?;
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn exponential_decay() {
        let traj = rk4(|_, y: &[f64; 1]| Ok::<_, Infallible>([-y[0]]), [1.0], 0.0, 0.01, 100).unwrap();
        assert!((traj[100][0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let traj = rk4(
                |_, y: &[f64; 2]| Ok::<_, Infallible>([y[1], -y[0]]),
                [0.0, 1.0],
                0.0,
                h,
                n,
            )
            .unwrap();
            (traj[n][0] - 1f64.sin()).abs()
        };
        let ratio = err(10) / err(20);
        assert!((ratio - 16.0).abs() < 1.5, "{ratio}");
    }
}
