//! Fluid reference model in normalised units, written directly from the
//! differential equations rather than derived from the agent program.

use super::{Policy, ProstateParams};

/// Right-hand side of the normalised model in `(x, y, z, v)`, where `v`
/// relaxes towards `x + y` at unit rate. Fluxes whose agent guard fails
/// (`x > 0`, `y > 0`, `z > 0`, `v > 0`) contribute nothing.
#[derive(Clone, Debug)]
pub struct ReferenceOde {
    p: ProstateParams,
    policy: Policy,
}

pub fn reference_ode_field(p: &ProstateParams, policy: Policy) -> ReferenceOde {
    ReferenceOde {
        p: p.clone(),
        policy,
    }
}

impl ReferenceOde {
    pub fn policy(&self) -> Policy {
        self.policy
    }

    /// Androgen production for drug state `u` (1 = suppression on).
    pub fn production_z(&self, u: f64) -> f64 {
        match self.policy {
            Policy::Cas => 0.0,
            Policy::Ias => self.p.z0 * (1.0 - u) / self.p.tau,
        }
    }

    pub fn derivative(&self, s: &[f64; 4], u: f64) -> [f64; 4] {
        let p = &self.p;
        let [x, y, z, v] = *s;
        let (mut dx, mut dy, mut dz, mut dv) = (0.0, 0.0, self.production_z(u), x + y);
        if x > 0.0 {
            let gx = p.alpha_x * (p.k1 + (1.0 - p.k1) * z / (z + p.k2)) * x;
            let dxx = p.beta_x * (p.k3 + (1.0 - p.k3) * z / (z + p.k4)) * x;
            let m = p.m1 * (1.0 - z / p.z0);
            dx += gx - dxx - m;
            dy += m;
        }
        if y > 0.0 {
            dy += p.alpha_y * (1.0 - p.d * z / p.z0) * y - p.beta_y * y;
        }
        if z > 0.0 {
            dz -= z / p.tau;
        }
        if v > 0.0 {
            dv -= v;
        }
        [dx, dy, dz, dv]
    }

    pub fn initial(&self) -> [f64; 4] {
        let p = &self.p;
        [p.x_init, p.y_init, p.z_init, p.x_init + p.y_init]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferencePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v: f64,
    /// Drug state after any check at `t`.
    pub u: f64,
}

fn rk4(f: &ReferenceOde, s: &[f64; 4], u: f64, h: f64) -> [f64; 4] {
    let add = |a: &[f64; 4], b: &[f64; 4], c: f64| -> [f64; 4] {
        [
            a[0] + c * b[0],
            a[1] + c * b[1],
            a[2] + c * b[2],
            a[3] + c * b[3],
        ]
    };
    let k1 = f.derivative(s, u);
    let k2 = f.derivative(&add(s, &k1, h / 2.0), u);
    let k3 = f.derivative(&add(s, &k2, h / 2.0), u);
    let k4 = f.derivative(&add(s, &k3, h), u);
    let mut out = *s;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn crossed(before: &[f64; 4], after: &[f64; 4]) -> bool {
    (0..4).any(|i| before[i] > 0.0 && after[i] <= 0.0)
}

/// One RK4 step of size `h` that stops at the first instant a positive
/// component reaches zero, pins it there and finishes the step with that
/// flux switched off.
fn advance(f: &ReferenceOde, s: &[f64; 4], u: f64, h: f64) -> [f64; 4] {
    let full = rk4(f, s, u, h);
    if !crossed(s, &full) {
        return full;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if crossed(s, &rk4(f, s, u, mid * h)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut at = rk4(f, s, u, hi * h);
    for i in 0..4 {
        if s[i] > 0.0 && at[i] <= 0.0 {
            at[i] = 0.0;
        }
    }
    let rest = (1.0 - hi) * h;
    if rest > 0.0 {
        advance(f, &at, u, rest)
    } else {
        at
    }
}

/// Classical fourth-order Runge–Kutta solution with step at most `dt`
/// (a component reaching zero is stopped exactly there),
/// sampled every `sample_every` days from 0 to `t_end`. Under IAS the drug
/// state is updated at every multiple of the check period: switched off
/// when `v` is below the low threshold, on again when it reaches the high
/// one.
pub fn reference_solution(
    p: &ProstateParams,
    policy: Policy,
    t_end: f64,
    dt: f64,
    sample_every: f64,
) -> Vec<ReferencePoint> {
    let f = reference_ode_field(p, policy);
    let mut s = f.initial();
    let mut u = 1.0;
    let mut t = 0.0;
    let mut out = vec![ReferencePoint {
        t,
        x: s[0],
        y: s[1],
        z: s[2],
        v: s[3],
        u,
    }];
    let mut k_sample = 1u64;
    let mut k_check = 1u64;
    loop {
        let next_sample = k_sample as f64 * sample_every;
        let next_check = match policy {
            Policy::Ias => k_check as f64 * p.check_period,
            Policy::Cas => f64::INFINITY,
        };
        let next = next_sample.min(next_check).min(t_end);
        if next <= t {
            break;
        }
        let n = ((next - t) / dt).ceil().max(1.0) as usize;
        let h = (next - t) / n as f64;
        for _ in 0..n {
            s = advance(&f, &s, u, h);
        }
        t = next;
        if t == next_check {
            if u == 1.0 && s[3] < p.psa_low {
                u = 0.0;
            } else if u == 0.0 && s[3] >= p.psa_high {
                u = 1.0;
            }
            k_check += 1;
        }
        if t == next_sample {
            out.push(ReferencePoint {
                t,
                x: s[0],
                y: s[1],
                z: s[2],
                v: s[3],
                u,
            });
            k_sample += 1;
        }
        if t >= t_end {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_at_initial_point() {
        let f = reference_ode_field(&ProstateParams::default(), Policy::Cas);
        let d = f.derivative(&[15.0, 0.1, 12.0, 15.1], 1.0);
        assert!((d[2] + 0.192).abs() < 1e-15);
        let expected_dx = 0.0204 * (12.0 / 14.0) * 15.0
            - 0.0076 * (8.0 - 7.0 * 12.0 / 12.5) * 15.0
            - 5e-5 * (1.0 - 12.0 / 20.0);
        assert!((d[0] - expected_dx).abs() < 1e-15);
        assert!((d[0] - 0.116346).abs() < 1e-6);
        assert!(d[3].abs() < 1e-15);
        // at z = z0 with d = 1 AI cells do not grow
        let g = f.derivative(&[0.0, 1.0, 20.0, 1.0], 1.0);
        assert!((g[1] + 0.0168).abs() < 1e-15);
    }

    #[test]
    fn ias_production_switches_with_drug() {
        let f = reference_ode_field(&ProstateParams::default(), Policy::Ias);
        assert_eq!(f.production_z(1.0), 0.0);
        assert_eq!(f.production_z(0.0), 20.0 / 62.5);
    }

    #[test]
    fn cas_relapse() {
        let sol = reference_solution(&ProstateParams::default(), Policy::Cas, 1500.0, 0.01, 100.0);
        let last = sol.last().unwrap();
        assert_eq!(last.t, 1500.0);
        let f = reference_ode_field(&ProstateParams::default(), Policy::Cas);
        let d = f.derivative(&[last.x, last.y, last.z, last.v], 1.0);
        assert!(d[3] > 0.0);
        assert!(last.y > sol[2].y);
    }

    #[test]
    fn ias_checks_on_period() {
        let sol = reference_solution(&ProstateParams::default(), Policy::Ias, 400.0, 0.01, 1.0);
        let toggles: Vec<f64> = sol
            .windows(2)
            .filter(|w| w[0].u != w[1].u)
            .map(|w| w[1].t)
            .collect();
        assert!(!toggles.is_empty());
        assert!(toggles.iter().all(|t| t % 28.0 == 0.0), "{toggles:?}");
    }
}
