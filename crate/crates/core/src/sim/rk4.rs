use std::fmt::Write as _;

use super::field::VectorField;
use super::SimError;

/// Fixed-step integration window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Keep every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { t0: 0.0, t1: 1.0, dt: 1e-4, record_every: 10 }
    }
}

impl IntegratorConfig {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Self {
        IntegratorConfig { t0, t1, dt, ..Default::default() }
    }

    pub fn check(&self) -> Result<(), SimError> {
        if ![self.t0, self.t1, self.dt].iter().all(|v| v.is_finite()) {
            return Err(SimError::Config("t0, t1 and dt must be finite".into()));
        }
        if self.t1 <= self.t0 {
            return Err(SimError::Config(format!("t1 = {} must exceed t0 = {}", self.t1, self.t0)));
        }
        if self.dt <= 0.0 || self.dt > self.t1 - self.t0 {
            return Err(SimError::Config(format!("dt = {} must lie in (0, t1 − t0]", self.dt)));
        }
        if self.record_every == 0 {
            return Err(SimError::Config("record_every must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk slightly so the grid ends at `t1`.
    pub fn steps(&self) -> usize {
        let ratio = (self.t1 - self.t0) / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn step_size(&self) -> f64 {
        (self.t1 - self.t0) / self.steps() as f64
    }

    pub fn time_at(&self, step: usize) -> f64 {
        if step == self.steps() {
            self.t1
        } else {
            self.t0 + step as f64 * self.step_size()
        }
    }
}

/// Recorded states of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    /// Time of the last good state when the run stopped early.
    pub truncated_at: Option<f64>,
    pub warning: Option<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    /// `t,label1,...` header followed by one row per recorded time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (t, state) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for v in state {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn violates(state: &[f64], positive: bool) -> Option<String> {
    if let Some(i) = state.iter().position(|v| !v.is_finite()) {
        return Some(format!("component {i} became non-finite"));
    }
    if positive {
        if let Some(i) = state.iter().position(|&v| v <= 0.0) {
            return Some(format!("component {i} = {} lost positivity", state[i]));
        }
    }
    None
}

fn axpy(base: &[f64], h: f64, k: &[f64], out: &mut [f64]) {
    for ((o, b), d) in out.iter_mut().zip(base).zip(k) {
        *o = b + h * d;
    }
}

/// Classical fourth-order Runge-Kutta with a fixed step.
///
/// A domain error at `t0` is returned as `Err`. Losing positivity (or
/// finiteness) later stops the run and returns the trajectory so far with
/// `truncated_at` set.
pub fn integrate(field: &dyn VectorField, x0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory, SimError> {
    cfg.check()?;
    let dim = field.dim();
    if x0.len() != dim {
        return Err(SimError::Dimension(format!("initial state has {} components, system has {dim}", x0.len())));
    }
    let positive = field.requires_positive();
    if let Some(msg) = violates(x0, positive) {
        return Err(SimError::Domain(format!("initial state: {msg}")));
    }
    let mut k1 = vec![0.0; dim];
    field.eval(x0, &mut k1)?;

    let steps = cfg.steps();
    let h = cfg.step_size();
    let mut traj = Trajectory {
        times: vec![cfg.t0],
        states: vec![x0.to_vec()],
        labels: field.labels(),
        truncated_at: None,
        warning: None,
    };
    let mut x = x0.to_vec();
    let (mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut last_time = cfg.t0;
    for step in 1..=steps {
        let attempt = (|| -> Result<Vec<f64>, SimError> {
            field.eval(&x, &mut k1)?;
            axpy(&x, h / 2.0, &k1, &mut tmp);
            field.eval(&tmp, &mut k2)?;
            axpy(&x, h / 2.0, &k2, &mut tmp);
            field.eval(&tmp, &mut k3)?;
            axpy(&x, h, &k3, &mut tmp);
            field.eval(&tmp, &mut k4)?;
            Ok((0..dim).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
        })();
        let t = cfg.time_at(step);
        let failure = match attempt {
            Ok(next) => match violates(&next, positive) {
                Some(msg) => Some(msg),
                None => {
                    x = next;
                    None
                }
            },
            Err(e) => Some(e.to_string()),
        };
        if let Some(msg) = failure {
            if traj.times.last() != Some(&last_time) {
                traj.times.push(last_time);
                traj.states.push(x.clone());
            }
            traj.truncated_at = Some(last_time);
            traj.warning = Some(format!("integration stopped at t = {t}: {msg}"));
            return Ok(traj);
        }
        last_time = t;
        if step % cfg.record_every == 0 || step == steps {
            traj.times.push(t);
            traj.states.push(x.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear {
        rates: Vec<f64>,
        positive: bool,
    }

    impl VectorField for Linear {
        fn dim(&self) -> usize {
            self.rates.len()
        }
        fn labels(&self) -> Vec<String> {
            (0..self.dim()).map(|i| format!("u{i}")).collect()
        }
        fn requires_positive(&self) -> bool {
            self.positive
        }
        fn eval(&self, state: &[f64], out: &mut [f64]) -> Result<(), SimError> {
            for ((o, r), s) in out.iter_mut().zip(&self.rates).zip(state) {
                *o = r * s;
            }
            Ok(())
        }
    }

    /// Constant drift `u̇ = −1` from `u = 0.5`: hits zero at t = 0.5.
    struct Drift;

    impl VectorField for Drift {
        fn dim(&self) -> usize {
            1
        }
        fn labels(&self) -> Vec<String> {
            vec!["u".into()]
        }
        fn requires_positive(&self) -> bool {
            true
        }
        fn eval(&self, _: &[f64], out: &mut [f64]) -> Result<(), SimError> {
            out[0] = -1.0;
            Ok(())
        }
    }

    #[test]
    fn exponential_decay() {
        let field = Linear { rates: vec![-1.0], positive: true };
        let traj = integrate(&field, &[1.0], &IntegratorConfig::new(0.0, 1.0, 1e-3)).unwrap();
        let x1 = traj.last().unwrap()[0];
        assert!((x1 - (-1f64).exp()).abs() < 1e-8);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn step_grid() {
        let cfg = IntegratorConfig::new(0.0, 1.0, 1e-4);
        assert_eq!(cfg.steps(), 10_000);
        let odd = IntegratorConfig::new(0.0, 1.0, 0.3);
        assert_eq!(odd.steps(), 4);
        assert_eq!(odd.time_at(4), 1.0);
    }

    #[test]
    fn records_every_nth_step() {
        let field = Linear { rates: vec![0.0], positive: false };
        let cfg = IntegratorConfig { record_every: 3, ..IntegratorConfig::new(0.0, 1.0, 0.1) };
        let traj = integrate(&field, &[1.0], &cfg).unwrap();
        assert_eq!(traj.len(), 1 + 3 + 1);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn positivity_loss_truncates() {
        let traj = integrate(&Drift, &[0.5], &IntegratorConfig::new(0.0, 1.0, 0.01)).unwrap();
        let t = traj.truncated_at.unwrap();
        assert!(t < 0.5 && t > 0.48, "{t}");
        assert!(traj.warning.unwrap().contains("positivity"));
    }

    #[test]
    fn bad_initial_state() {
        assert!(matches!(integrate(&Drift, &[0.0], &IntegratorConfig::default()), Err(SimError::Domain(_))));
        let cfg = IntegratorConfig::new(1.0, 0.0, 0.1);
        assert!(matches!(integrate(&Drift, &[1.0], &cfg), Err(SimError::Config(_))));
    }

    #[test]
    fn csv_layout() {
        let field = Linear { rates: vec![0.0, 0.0], positive: false };
        let cfg = IntegratorConfig { record_every: 1, ..IntegratorConfig::new(0.0, 1.0, 0.5) };
        let csv = integrate(&field, &[1.0, 2.0], &cfg).unwrap().to_csv();
        assert_eq!(csv, "t,u0,u1\n0,1,2\n0.5,1,2\n1,1,2\n");
    }
}
