//! Dormand–Prince 5(4) explicit Runge–Kutta steps with FSAL.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Workspace for steps of a fixed dimension.
#[derive(Debug)]
pub(crate) struct Dopri {
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    k5: Vec<f64>,
    k6: Vec<f64>,
    tmp: Vec<f64>,
}

impl Dopri {
    pub fn new(n: usize) -> Self {
        Dopri {
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            k5: vec![0.0; n],
            k6: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// One step of size `h` from `(t, y0)` with `f0 = f(t, y0)`. Writes the
    /// fifth-order solution to `y1` and `f(t + h, y1)` to `f1`; returns the
    /// scaled RMS error estimate (accept when `<= 1`).
    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &mut self,
        f: &mut dyn FnMut(f64, &[f64], &mut [f64]),
        t: f64,
        y0: &[f64],
        f0: &[f64],
        h: f64,
        y1: &mut [f64],
        f1: &mut [f64],
        rtol: f64,
        atol: f64,
    ) -> f64 {
        let n = y0.len();
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y0[i] + h * A21 * f0[i];
        }
        f(t + C2 * h, tmp, &mut self.k2);
        for i in 0..n {
            tmp[i] = y0[i] + h * (A31 * f0[i] + A32 * self.k2[i]);
        }
        f(t + C3 * h, tmp, &mut self.k3);
        for i in 0..n {
            tmp[i] = y0[i] + h * (A41 * f0[i] + A42 * self.k2[i] + A43 * self.k3[i]);
        }
        f(t + C4 * h, tmp, &mut self.k4);
        for i in 0..n {
            tmp[i] =
                y0[i] + h * (A51 * f0[i] + A52 * self.k2[i] + A53 * self.k3[i] + A54 * self.k4[i]);
        }
        f(t + C5 * h, tmp, &mut self.k5);
        for i in 0..n {
            tmp[i] = y0[i]
                + h * (A61 * f0[i]
                    + A62 * self.k2[i]
                    + A63 * self.k3[i]
                    + A64 * self.k4[i]
                    + A65 * self.k5[i]);
        }
        f(t + h, tmp, &mut self.k6);
        for i in 0..n {
            y1[i] = y0[i]
                + h * (B1 * f0[i]
                    + B3 * self.k3[i]
                    + B4 * self.k4[i]
                    + B5 * self.k5[i]
                    + B6 * self.k6[i]);
        }
        f(t + h, y1, f1);
        let mut acc = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * f0[i]
                    + E3 * self.k3[i]
                    + E4 * self.k4[i]
                    + E5 * self.k5[i]
                    + E6 * self.k6[i]
                    + E7 * f1[i]);
            let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
            acc += (e / sc) * (e / sc);
        }
        if n == 0 {
            0.0
        } else {
            (acc / n as f64).sqrt()
        }
    }
}

/// Cubic Hermite interpolation on `[t0, t0 + h]` at fraction `theta`.
pub(crate) fn hermite(
    theta: f64,
    h: f64,
    y0: &[f64],
    f0: &[f64],
    y1: &[f64],
    f1: &[f64],
    out: &mut [f64],
) {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    for i in 0..y0.len() {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}

/// Suggested next step size from an error estimate.
pub(crate) fn next_step(h: f64, err: f64) -> f64 {
    let fac = if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * fac
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(h: f64, t_end: f64) -> f64 {
        let mut f = |_: f64, y: &[f64], d: &mut [f64]| d[0] = -y[0];
        let mut d = Dopri::new(1);
        let (mut y, mut f0) = (vec![1.0], vec![-1.0]);
        let (mut y1, mut f1) = (vec![0.0], vec![0.0]);
        let mut t = 0.0;
        while t < t_end - 1e-12 {
            d.step(&mut f, t, &y, &f0, h, &mut y1, &mut f1, 1e-6, 1e-9);
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut f0, &mut f1);
            t += h;
        }
        y[0]
    }

    #[test]
    fn fifth_order_convergence() {
        let exact = (-1.0f64).exp();
        let e1 = (integrate(0.1, 1.0) - exact).abs();
        let e2 = (integrate(0.05, 1.0) - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 4.5 && order < 5.8, "order {order}");
    }

    #[test]
    fn hermite_reproduces_cubics() {
        // y = t^3 on [1, 2]
        let (y0, f0, y1, f1) = ([1.0], [3.0], [8.0], [12.0]);
        let mut out = [0.0];
        hermite(0.5, 1.0, &y0, &f0, &y1, &f1, &mut out);
        assert!((out[0] - 1.5f64.powi(3)).abs() < 1e-12);
    }
}
