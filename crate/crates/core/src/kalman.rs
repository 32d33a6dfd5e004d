//! Linear Kalman filtering: predict, measurement prediction, and update
//! over Gaussian states, plus the constant-velocity model used by the
//! simulation experiments.
//!
//! All operations are pure functions over immutable values. Innovation
//! covariances are inverted through their Cholesky factor and every
//! covariance result is re-symmetrized, which keeps long runs numerically
//! well behaved.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KalmanError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive definite")]
    NonPositiveDefinite,
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, KalmanError>;

/// Gaussian state estimate: mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Time-invariant linear-Gaussian system model.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// State transition matrix.
    pub f: DMatrix<f64>,
    /// Process noise covariance.
    pub q: DMatrix<f64>,
    /// Measurement matrix.
    pub h: DMatrix<f64>,
    /// Measurement noise covariance.
    pub r: DMatrix<f64>,
    /// Time step in seconds.
    pub dt: f64,
}

/// Predicted measurement and its innovation covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasPrediction {
    pub z_pred: DVector<f64>,
    pub s: DMatrix<f64>,
}

/// Posterior state together with the innovation that produced it.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub state: GaussState,
    pub residual: DVector<f64>,
    pub prediction: MeasPrediction,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

impl LinearModel {
    /// Constant-velocity model: state `[position, velocity]`, scalar
    /// position measurements. Process noise is discrete white-noise
    /// acceleration with intensity `sigma_v^2`.
    pub fn constant_velocity(dt: f64, sigma_v: f64, sigma_w: f64) -> Result<Self> {
        if dt <= 0.0 {
            return Err(KalmanError::Domain(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if sigma_w <= 0.0 {
            return Err(KalmanError::Domain(format!(
                "sigma_w must be positive, got {sigma_w}"
            )));
        }
        if sigma_v < 0.0 {
            return Err(KalmanError::Domain(format!(
                "sigma_v must be non-negative, got {sigma_v}"
            )));
        }
        let f = DMatrix::from_row_slice(2, 2, &[1.0, dt, 0.0, 1.0]);
        let qv = sigma_v * sigma_v;
        let (dt2, dt3, dt4) = (dt * dt, dt * dt * dt, dt * dt * dt * dt);
        let q = DMatrix::from_row_slice(
            2,
            2,
            &[qv * dt4 / 4.0, qv * dt3 / 2.0, qv * dt3 / 2.0, qv * dt2],
        );
        let h = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let r = DMatrix::from_element(1, 1, sigma_w * sigma_w);
        Ok(Self { f, q, h, r, dt })
    }

    pub fn state_dim(&self) -> usize {
        self.f.nrows()
    }

    pub fn meas_dim(&self) -> usize {
        self.h.nrows()
    }
}

/// Prior from a first measurement: measured components taken from `z0`,
/// unmeasured velocity set to zero with a wide prior standard deviation.
pub fn init_state(z0: &DVector<f64>, model: &LinearModel, v_prior_std: f64) -> Result<GaussState> {
    if z0.len() != model.meas_dim() || model.meas_dim() != 1 || model.state_dim() != 2 {
        return Err(KalmanError::DimensionMismatch(format!(
            "init_state expects a scalar measurement for a 2-state model, got z of length {}",
            z0.len()
        )));
    }
    let mean = DVector::from_vec(vec![z0[0], 0.0]);
    let mut cov = DMatrix::zeros(2, 2);
    cov[(0, 0)] = model.r[(0, 0)];
    cov[(1, 1)] = v_prior_std * v_prior_std;
    Ok(GaussState { mean, cov })
}

/// Time update: propagates mean and covariance through the process model.
pub fn predict(state: &GaussState, model: &LinearModel) -> Result<GaussState> {
    let n = model.state_dim();
    if state.mean.len() != n || state.cov.nrows() != n {
        return Err(KalmanError::DimensionMismatch(format!(
            "state dimension {} does not match model {}",
            state.mean.len(),
            n
        )));
    }
    let mean = &model.f * &state.mean;
    let cov = symmetrize(&(&model.f * &state.cov * model.f.transpose() + &model.q));
    Ok(GaussState { mean, cov })
}

/// Measurement prediction for a prior state: `z_pred = H x`, `S = H P H' + R`.
pub fn measurement_prediction(state: &GaussState, model: &LinearModel) -> Result<MeasPrediction> {
    if state.mean.len() != model.state_dim() {
        return Err(KalmanError::DimensionMismatch(format!(
            "state dimension {} does not match model {}",
            state.mean.len(),
            model.state_dim()
        )));
    }
    let z_pred = &model.h * &state.mean;
    let s = symmetrize(&(&model.h * &state.cov * model.h.transpose() + &model.r));
    // fail early if S is unusable downstream
    if s.clone().cholesky().is_none() {
        return Err(KalmanError::NonPositiveDefinite);
    }
    Ok(MeasPrediction { z_pred, s })
}

/// Measurement update of a predicted state.
///
/// Gain is `K = P H' S^-1` with `S` inverted via Cholesky; the posterior
/// covariance uses the standard subtractive form `(I - K H) P`,
/// re-symmetrized.
pub fn update(state: &GaussState, model: &LinearModel, z: &DVector<f64>) -> Result<UpdateOutcome> {
    if z.len() != model.meas_dim() {
        return Err(KalmanError::DimensionMismatch(format!(
            "measurement dimension {} does not match model {}",
            z.len(),
            model.meas_dim()
        )));
    }
    let prediction = measurement_prediction(state, model)?;
    let residual = z - &prediction.z_pred;

    let chol = prediction
        .s
        .clone()
        .cholesky()
        .ok_or(KalmanError::NonPositiveDefinite)?;
    // K = P H' S^-1, computed by solving S K' = H P
    let hp = &model.h * &state.cov;
    let gain = chol.solve(&hp).transpose();

    let mean = &state.mean + &gain * &residual;
    let identity = DMatrix::identity(model.state_dim(), model.state_dim());
    let cov = symmetrize(&((identity - &gain * &model.h) * &state.cov));

    Ok(UpdateOutcome {
        state: GaussState { mean, cov },
        residual,
        prediction,
    })
}
