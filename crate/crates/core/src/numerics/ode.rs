/// Reusable stage buffers for the classical fourth-order Runge–Kutta method.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            stage: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.k1.len()
    }

    /// Advance `state` in place from `t` to `t + dt`.
    ///
    /// `field(t, y, out)` writes `dy/dt` into `out`. The first stage slope
    /// (the field at the start of the step) is left in [`Rk4::start_slope`].
    pub fn step<F, E>(&mut self, state: &mut [f64], t: f64, dt: f64, mut field: F) -> Result<(), E>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    {
        assert_eq!(state.len(), self.dim(), "state dimension mismatch");
        let half = 0.5 * dt;

        field(t, state, &mut self.k1)?;
        for ((s, y), k) in self.stage.iter_mut().zip(state.iter()).zip(&self.k1) {
            *s = y + half * k;
        }
        field(t + half, &self.stage, &mut self.k2)?;
        for ((s, y), k) in self.stage.iter_mut().zip(state.iter()).zip(&self.k2) {
            *s = y + half * k;
        }
        field(t + half, &self.stage, &mut self.k3)?;
        for ((s, y), k) in self.stage.iter_mut().zip(state.iter()).zip(&self.k3) {
            *s = y + dt * k;
        }
        field(t + dt, &self.stage, &mut self.k4)?;

        let sixth = dt / 6.0;
        for (i, y) in state.iter_mut().enumerate() {
            *y += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }

    pub fn start_slope(&self) -> &[f64] {
        &self.k1
    }
}

/// One classical RK4 step of `dy/dt = f(t, y)`; returns the new state.
pub fn rk4_step<F>(state: &[f64], t: f64, dt: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut next = state.to_vec();
    let mut rk = Rk4::new(state.len());
    rk.step::<_, std::convert::Infallible>(&mut next, t, dt, |t, y, out| {
        f(t, y, out);
        Ok(())
    })
    .unwrap_or_else(|e| match e {});
    next
}
