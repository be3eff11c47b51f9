//! Embedded Runge-Kutta 8(5,3) integrator of Dormand and Prince (DOP853)
//! with Hairer's step-size control, acting on flat `f64` state slices.
//!
//! Accepted step sizes can be recorded and replayed. Replaying the step
//! sequence of a reference trajectory on nearby initial conditions makes the
//! discrete flow a smooth function of the initial data, which is what finite
//! difference Jacobians of a stroboscopic map need.

use crate::error::{Error, Result};

const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    0.526001519587677318785587544488e-1,
    0.789002279381515978178381316732e-1,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
];

// Lower triangular stage matrix, row i holds a_{i+1, 1..i}.
const A: [[f64; STAGES - 1]; STAGES] = [
    [0.0; 11],
    [5.26001519587677318785587544488e-2, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [
        1.97250569845378994544595329183e-2,
        5.91751709536136983633785987549e-2,
        0., 0., 0., 0., 0., 0., 0., 0., 0.,
    ],
    [
        2.95875854768068491816892993775e-2,
        0.0,
        8.87627564304205475450678981324e-2,
        0., 0., 0., 0., 0., 0., 0., 0.,
    ],
    [
        2.41365134159266685502369798665e-1,
        0.0,
        -8.84549479328286085344864962717e-1,
        9.24834003261792003115737966543e-1,
        0., 0., 0., 0., 0., 0., 0.,
    ],
    [
        3.7037037037037037037037037037e-2,
        0.0,
        0.0,
        1.70828608729473871279604482173e-1,
        1.25467687566822425016691814123e-1,
        0., 0., 0., 0., 0., 0.,
    ],
    [
        3.7109375e-2,
        0.0,
        0.0,
        1.70252211019544039314978060272e-1,
        6.02165389804559606850219397283e-2,
        -1.7578125e-2,
        0., 0., 0., 0., 0.,
    ],
    [
        3.70920001185047927108779319836e-2,
        0.0,
        0.0,
        1.70383925712239993810214054705e-1,
        1.07262030446373284651809199168e-1,
        -1.53194377486244017527936158236e-2,
        8.27378916381402288758473766002e-3,
        0., 0., 0., 0.,
    ],
    [
        6.24110958716075717114429577812e-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825,
        -8.68219346841726006818189891453e-1,
        2.75920996994467083049415600797e1,
        2.01540675504778934086186788979e1,
        -4.34898841810699588477366255144e1,
        0., 0., 0.,
    ],
    [
        4.77662536438264365890433908527e-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468,
        -5.90290826836842996371446475743e-1,
        2.12300514481811942347288949897e1,
        1.52792336328824235832596922938e1,
        -3.32882109689848629194453265587e1,
        -2.03312017085086261358222928593e-2,
        0., 0.,
    ],
    [
        -9.3714243008598732571704021658e-1,
        0.0,
        0.0,
        5.18637242884406370830023853209,
        1.09143734899672957818500254654,
        -8.14978701074692612513997267357,
        -1.85200656599969598641566180701e1,
        2.27394870993505042818970056734e1,
        2.49360555267965238987089396762,
        -3.0467644718982195003823669022,
        0.,
    ],
    [
        2.27331014751653820792359768449,
        0.0,
        0.0,
        -1.05344954667372501984066689879e1,
        -2.00087205822486249909675718444,
        -1.79589318631187989172765950534e1,
        2.79488845294199600508499808837e1,
        -2.85899827713502369474065508674,
        -8.87285693353062954433549289258,
        1.23605671757943030647266201528e1,
        6.43392746015763530355970484046e-1,
    ],
];

const B: [f64; STAGES] = [
    5.42937341165687622380535766363e-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566,
    1.89151789931450038304281599044,
    -5.8012039600105847814672114227,
    3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1,
    2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2,
];

// Third-order embedded weights on stages 1, 9 and 12.
const BHH: [f64; 3] = [
    0.244094488188976377952755905512,
    0.733846688281611857341361741547,
    0.220588235294117647058823529412e-1,
];

// Fifth-order error weights.
const ER: [f64; STAGES] = [
    0.1312004499419488073250102996e-1,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753e1,
    -0.4957589496572501915214079952,
    0.1664377182454986536961530415e1,
    -0.3503288487499736816886487290,
    0.3341791187130174790297318841,
    0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1,
];

/// What an observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub safety: f64,
    /// Bounds on `h_new / h`.
    pub min_factor: f64,
    pub max_factor: f64,
}

impl Default for Dop853 {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 1_000_000, safety: 0.9, min_factor: 1.0 / 3.0, max_factor: 6.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Time reached; equals the requested end unless an observer stopped.
    pub t_end: f64,
    pub steps: Vec<f64>,
}

struct Work {
    k: Vec<Vec<f64>>,
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        Self { k: vec![vec![0.0; n]; STAGES], y_stage: vec![0.0; n], y_new: vec![0.0; n] }
    }
}

/// One DOP853 step from `(t, y)` with `k[0] = f(t, y)` already filled in.
/// Leaves the proposal in `w.y_new` and returns the scaled error norm (or
/// zero when no error estimate is requested).
fn step<F>(f: &mut F, t: f64, y: &[f64], h: f64, w: &mut Work, tol: Option<(f64, f64)>) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    for s in 1..STAGES {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, a) in A[s][..s].iter().enumerate() {
                if *a != 0.0 {
                    acc += a * w.k[j][i];
                }
            }
            w.y_stage[i] = y[i] + h * acc;
        }
        f(t + C[s] * h, &w.y_stage, &mut w.k[s]);
    }
    let mut err5 = 0.0;
    let mut err3 = 0.0;
    for i in 0..n {
        let mut incr = 0.0;
        let mut e5 = 0.0;
        for s in 0..STAGES {
            incr += B[s] * w.k[s][i];
            e5 += ER[s] * w.k[s][i];
        }
        w.y_new[i] = y[i] + h * incr;
        if let Some((rtol, atol)) = tol {
            let sk = atol + rtol * y[i].abs().max(w.y_new[i].abs());
            let e3 = incr - BHH[0] * w.k[0][i] - BHH[1] * w.k[8][i] - BHH[2] * w.k[11][i];
            err5 += (e5 / sk) * (e5 / sk);
            err3 += (e3 / sk) * (e3 / sk);
        }
    }
    if tol.is_none() {
        return 0.0;
    }
    let mut deno = err5 + 0.01 * err3;
    if deno <= 0.0 {
        deno = 1.0;
    }
    h.abs() * err5 * (1.0 / (n as f64 * deno)).sqrt()
}

impl Dop853 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    fn initial_step<F>(&self, f: &mut F, t: f64, y: &[f64], f0: &[f64], span: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let scale = |i: usize| self.atol + self.rtol * y[i].abs();
        let dnf = (0..n).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>();
        let dny = (0..n).map(|i| (y[i] / scale(i)).powi(2)).sum::<f64>();
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * (dny / dnf).sqrt() };
        h = h.min(span.abs());
        let y1: Vec<f64> = (0..n).map(|i| y[i] + h * f0[i]).collect();
        let mut f1 = vec![0.0; n];
        f(t + h, &y1, &mut f1);
        let der2 = ((0..n).map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2)).sum::<f64>()).sqrt() / h;
        let der = der2.max(dnf.sqrt());
        let h1 = if der <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der).powf(1.0 / 8.0) };
        (100.0 * h).min(h1).min(span.abs())
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` in place. The observer sees
    /// every accepted state and may stop the integration early.
    pub fn integrate<F, O>(
        &self,
        mut f: F,
        t0: f64,
        t1: f64,
        y: &mut [f64],
        record_steps: bool,
        mut observer: O,
    ) -> Result<Stats>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(f64, &[f64]) -> Control,
    {
        let n = y.len();
        let mut stats = Stats { t_end: t0, ..Stats::default() };
        if t1 == t0 {
            return Ok(stats);
        }
        let dir = (t1 - t0).signum();
        let mut w = Work::new(n);
        f(t0, y, &mut w.k[0]);
        stats.evaluations += 1;
        let mut h = dir * self.initial_step(&mut f, t0, y, &w.k[0].clone(), t1 - t0);
        stats.evaluations += 1;
        let mut t = t0;
        let mut last_rejected = false;
        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Integration { tau: t, reason: "too many steps".into() });
            }
            let remaining = t1 - t;
            let last = (h.abs() >= remaining.abs()) || ((t + h) - t1) * dir >= 0.0;
            if last {
                h = remaining;
            }
            if h.abs() <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Integration { tau: t, reason: "step size underflow".into() });
            }
            let err = step(&mut f, t, y, h, &mut w, Some((self.rtol, self.atol)));
            stats.evaluations += STAGES - 1;
            if !err.is_finite() {
                h *= 0.1;
                stats.rejected += 1;
                last_rejected = true;
                continue;
            }
            let expo = 1.0 / 8.0;
            let fac11 = err.powf(expo);
            let fac = (fac11 / self.safety).clamp(1.0 / self.max_factor, 1.0 / self.min_factor);
            let mut h_new = h / fac;
            if err <= 1.0 {
                stats.accepted += 1;
                if record_steps {
                    stats.steps.push(h);
                }
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&w.y_new);
                f(t, y, &mut w.k[0]);
                stats.evaluations += 1;
                if last_rejected {
                    h_new = dir * h_new.abs().min(h.abs());
                }
                last_rejected = false;
                stats.t_end = t;
                if observer(t, y) == Control::Stop || last {
                    return Ok(stats);
                }
            } else {
                h_new = h / (fac11 / self.safety).min(1.0 / self.min_factor);
                stats.rejected += 1;
                last_rejected = true;
            }
            h = h_new;
        }
    }

    /// Integrates with a prescribed sequence of step sizes and no error
    /// control, returning the final time.
    pub fn replay<F>(&self, mut f: F, t0: f64, steps: &[f64], y: &mut [f64]) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let mut w = Work::new(y.len());
        let mut t = t0;
        for &h in steps {
            f(t, y, &mut w.k[0]);
            step(&mut f, t, y, h, &mut w, None);
            y.copy_from_slice(&w.y_new);
            t += h;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tableau_rows_are_consistent() {
        for s in 1..STAGES {
            let row: f64 = A[s].iter().sum();
            assert_abs_diff_eq!(row, C[s], epsilon = 1e-13);
        }
        assert_abs_diff_eq!(B.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn harmonic_oscillator_to_tight_tolerance() {
        let solver = Dop853::with_tolerances(1e-12, 1e-14);
        let mut y = [1.0, 0.0];
        let stats = solver
            .integrate(|_, y, dy| { dy[0] = y[1]; dy[1] = -y[0]; }, 0.0, 20.0, &mut y, false, |_, _| Control::Continue)
            .unwrap();
        assert_abs_diff_eq!(y[0], 20f64.cos(), epsilon = 1e-10);
        assert_abs_diff_eq!(y[1], -(20f64.sin()), epsilon = 1e-10);
        assert_eq!(stats.t_end, 20.0);
    }

    #[test]
    fn eighth_order_convergence_under_replay() {
        // y' = y cos t, y = exp(sin t)
        let solver = Dop853::default();
        let exact = 3f64.sin().exp();
        let err = |n: usize| {
            let mut y = [1.0];
            let steps = vec![3.0 / n as f64; n];
            solver.replay(|t, y, dy| dy[0] = y[0] * t.cos(), 0.0, &steps, &mut y);
            (y[0] - exact).abs()
        };
        let (e1, e2) = (err(8), err(16));
        let order = (e1 / e2).log2();
        assert!(order > 7.0, "observed order {order}");
    }

    #[test]
    fn observer_can_stop_early() {
        let solver = Dop853::default();
        let mut y = [0.0];
        let stats = solver
            .integrate(|_, _, dy| dy[0] = 1.0, 0.0, 10.0, &mut y, true, |t, _| if t > 1.0 { Control::Stop } else { Control::Continue })
            .unwrap();
        assert!(stats.t_end > 1.0 && stats.t_end < 10.0);
        assert_abs_diff_eq!(y[0], stats.t_end, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.steps.iter().sum::<f64>(), stats.t_end, epsilon = 1e-12);
    }

    #[test]
    fn replay_reproduces_adaptive_run() {
        let solver = Dop853::default();
        let f = |t: f64, y: &[f64], dy: &mut [f64]| { dy[0] = -y[1] + 0.3 * t.sin(); dy[1] = y[0] - y[1] * y[1] * 0.1; };
        let mut y = [0.4, -0.2];
        let stats = solver.integrate(f, 0.0, 5.0, &mut y, true, |_, _| Control::Continue).unwrap();
        let mut z = [0.4, -0.2];
        let t = solver.replay(f, 0.0, &stats.steps, &mut z);
        assert_abs_diff_eq!(t, 5.0, epsilon = 1e-12);
        assert_eq!(y, z);
    }
}
