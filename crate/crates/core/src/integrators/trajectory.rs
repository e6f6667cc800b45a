use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vector::Vector;

/// States on a uniform time grid with trapezoid prefix integrals.
///
/// Between grid nodes the state is reconstructed linearly, and every
/// integral over a window is the exact integral of that reconstruction, so
/// running averages cost O(1) regardless of the window length.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dt: f64,
    values: Vec<Vector>,
    prefix: Vec<Vector>,
    max_norm: f64,
}

impl Trajectory {
    pub fn new(dt: f64, initial: Vector) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(alloc::format!("time step must be positive, got {dt}")));
        }
        Ok(Trajectory {
            dt,
            values: alloc::vec![initial],
            prefix: alloc::vec![Vector::zeros(initial.dim())],
            max_norm: initial.norm(),
        })
    }

    /// Builds a trajectory from grid values.
    pub fn from_values(dt: f64, values: &[Vector]) -> Result<Self> {
        let (first, rest) = values
            .split_first()
            .ok_or_else(|| Error::invalid("a trajectory needs at least one value"))?;
        let mut traj = Trajectory::new(dt, *first)?;
        for v in rest {
            traj.push(*v)?;
        }
        Ok(traj)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Last covered time.
    pub fn horizon(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// `P_k = ∫_0^{t_k} ξ`.
    pub fn prefix(&self) -> &[Vector] {
        &self.prefix
    }

    pub fn last(&self) -> &Vector {
        self.values.last().expect("trajectory is never empty")
    }

    /// Largest `|ξ_k|` seen so far.
    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    pub fn push(&mut self, value: Vector) -> Result<()> {
        value.check_dim(self.dim())?;
        let prev = *self.last();
        let p = *self.prefix.last().expect("prefix is never empty");
        self.prefix.push(p + (prev + value) * (0.5 * self.dt));
        self.values.push(value);
        self.max_norm = self.max_norm.max(value.norm());
        Ok(())
    }

    /// Overwrites the last node; used for trial values inside a step.
    pub fn replace_last(&mut self, value: Vector) -> Result<()> {
        value.check_dim(self.dim())?;
        let n = self.values.len();
        if n == 1 {
            return Err(Error::invalid("the initial value cannot be replaced"));
        }
        self.values[n - 1] = value;
        self.prefix[n - 1] = self.prefix[n - 2] + (self.values[n - 2] + value) * (0.5 * self.dt);
        self.max_norm = self.max_norm.max(value.norm());
        Ok(())
    }

    /// Drops nodes after index `len - 1`.
    pub fn truncate(&mut self, len: usize) {
        let len = len.max(1);
        self.values.truncate(len);
        self.prefix.truncate(len);
        self.max_norm = self.values.iter().map(Vector::norm).fold(0.0, f64::max);
    }

    fn check_window(&self, start: f64, end: f64) -> Result<(f64, f64)> {
        let horizon = self.horizon();
        let slack = 1e-12 * self.dt.max(horizon);
        if !(start >= -slack && end <= horizon + slack && start <= end + slack) {
            return Err(Error::OutsideHistory {
                start,
                end,
                horizon,
            });
        }
        let end = end.clamp(0.0, horizon);
        Ok((start.clamp(0.0, end), end))
    }

    /// Cell index `k` with `t ∈ [t_k, t_{k+1}]`, for `t` inside the horizon.
    #[inline]
    fn cell(&self, t: f64) -> usize {
        let last = self.values.len().saturating_sub(2);
        ((t / self.dt) as usize).min(last)
    }

    #[inline]
    fn interpolate(&self, t: f64) -> Vector {
        if self.values.len() == 1 {
            return self.values[0];
        }
        let k = self.cell(t);
        let tau = (t - self.time(k)) / self.dt;
        let mut v = self.values[k];
        v.axpy(tau, &(self.values[k + 1] - self.values[k]));
        v
    }

    /// Linearly interpolated state.
    pub fn value_at(&self, t: f64) -> Result<Vector> {
        let (t, _) = self.check_window(t, t)?;
        Ok(self.interpolate(t))
    }

    /// `∫_start^end ξ` for the piecewise-linear reconstruction.
    pub fn window_integral(&self, start: f64, end: f64) -> Result<Vector> {
        let (start, end) = self.check_window(start, end)?;
        Ok(self.window_integral_unchecked(start, end))
    }

    fn window_integral_unchecked(&self, start: f64, end: f64) -> Vector {
        if end <= start {
            return Vector::zeros(self.dim());
        }
        let ka = self.cell(start);
        let kb = self.cell(end);
        // linear pieces: length times midpoint value is exact
        if ka == kb {
            return self.interpolate(0.5 * (start + end)) * (end - start);
        }
        let a_next = self.time(ka + 1);
        let b_prev = self.time(kb);
        let mut acc = self.prefix[kb] - self.prefix[ka + 1];
        acc.axpy(a_next - start, &self.interpolate(0.5 * (start + a_next)));
        acc.axpy(end - b_prev, &self.interpolate(0.5 * (b_prev + end)));
        acc
    }

    /// `(1/span) ∫_{t-span}^t ξ`; the interpolated `ξ(t)` when `span = 0`.
    pub fn running_average(&self, t: f64, span: f64) -> Result<Vector> {
        if !(span >= 0.0) {
            return Err(Error::invalid(alloc::format!("window span must be non-negative, got {span}")));
        }
        let (start, end) = self.check_window(t - span, t)?;
        let len = end - start;
        if len <= 0.0 {
            return Ok(self.interpolate(end));
        }
        Ok(self.window_integral_unchecked(start, end) * (1.0 / len))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v3(a: f64, b: f64, c: f64) -> Vector {
        Vector::from_slice(&[a, b, c]).unwrap()
    }

    fn linear(dt: f64, n: usize, dir: Vector) -> Trajectory {
        let values: Vec<Vector> = (0..=n).map(|k| dir * (dt * k as f64)).collect();
        Trajectory::from_values(dt, &values).unwrap()
    }

    #[test]
    fn constant_average_is_constant() {
        let v = v3(0.3, -1.0, 2.0);
        let traj = Trajectory::from_values(0.1, &[v; 11]).unwrap();
        for (t, span) in [(1.0, 1.0), (0.73, 0.2), (0.5, 0.0), (0.55, 0.01)] {
            let avg = traj.running_average(t, span).unwrap();
            assert_relative_eq!(avg.distance(&v), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn linear_average_is_exact() {
        let dir = v3(1.0, -2.0, 0.5);
        let traj = linear(0.125, 16, dir);
        for (t, s) in [(2.0, 2.0), (1.3, 0.7), (0.9, 0.01), (1.0, 0.125), (0.4, 0.3)] {
            let avg = traj.running_average(t, s).unwrap();
            let want = dir * (t - 0.5 * s);
            assert_relative_eq!(avg.distance(&want), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn prefix_is_trapezoid_consistent() {
        let values: Vec<Vector> = (0..50)
            .map(|k| {
                let t = 0.01 * k as f64;
                v3(libm::sin(7.0 * t), libm::cos(3.0 * t), t * t)
            })
            .collect();
        let traj = Trajectory::from_values(0.01, &values).unwrap();
        assert_eq!(traj.prefix()[0].norm(), 0.0);
        for k in 0..49 {
            let step = (values[k] + values[k + 1]) * (0.5 * 0.01);
            assert_eq!(traj.prefix()[k + 1], traj.prefix()[k] + step);
        }
    }

    #[test]
    fn replace_last_keeps_prefix_consistent() {
        let mut traj = Trajectory::new(0.5, v3(1.0, 0.0, 0.0)).unwrap();
        traj.push(v3(5.0, 5.0, 5.0)).unwrap();
        traj.replace_last(v3(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(traj.prefix()[1], v3(0.75, 0.0, 0.0));
        assert!(traj.replace_last(Vector::zeros(2)).is_err());
    }

    #[test]
    fn windows_outside_history_are_rejected() {
        let traj = linear(0.1, 10, v3(1.0, 0.0, 0.0));
        assert!(matches!(
            traj.running_average(1.5, 0.2),
            Err(Error::OutsideHistory { .. })
        ));
        assert!(traj.running_average(0.3, 0.5).is_err());
        assert!(traj.running_average(0.3, -0.1).is_err());
        assert!(traj.running_average(1.0, 1.0).is_ok());
    }

    #[test]
    fn single_node_trajectory() {
        let v = v3(1.0, 2.0, 3.0);
        let traj = Trajectory::new(0.1, v).unwrap();
        assert_eq!(traj.running_average(0.0, 0.0).unwrap(), v);
        assert_eq!(traj.horizon(), 0.0);
    }
}
