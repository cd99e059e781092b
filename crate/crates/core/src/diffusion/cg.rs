use crate::degrade::LinearOp;
use crate::error::Result;
use crate::filter::CircularGaussian;
use crate::seqio::{dot, norm, FrameSequence};

/// Outcome of a conjugate-gradient data-consistency pass.
#[derive(Debug, Clone)]
pub struct CgResult {
    pub estimate: FrameSequence,
    /// `‖Y − A X‖` at the start and after every accepted iteration.
    pub residuals: Vec<f64>,
}

impl CgResult {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("at least the initial residual")
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += a * x;
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a - b).collect()
}

/// `iterations` steps of CG on `AᵀA X = AᵀY` started at `init` (CGLS form).
///
/// Every iterate lies in `init + K_l(AᵀA, Aᵀr₀)`. The residual is recomputed from the
/// iterate, and the loop stops as soon as a step would not reduce it, so the recorded
/// residuals never increase.
pub fn data_consistency(init: &FrameSequence, y: &FrameSequence, op: &dyn LinearOp, iterations: usize) -> Result<CgResult> {
    let mut x = init.clone().into_data();
    let mut r = sub(y.data(), op.forward(init)?.data());
    let mut residuals = vec![norm(&r)];
    if iterations == 0 {
        return Ok(CgResult {
            estimate: init.clone(),
            residuals,
        });
    }
    let in_dims = op.input_dims();
    let out_dims = op.output_dims();
    let mut s = op.adjoint(&FrameSequence::new(out_dims, r.clone())?)?.into_data();
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    for _ in 0..iterations {
        if gamma == 0.0 || !gamma.is_finite() {
            break;
        }
        let q = op.forward(&FrameSequence::new(in_dims, p.clone())?)?.into_data();
        let delta = dot(&q, &q);
        if delta == 0.0 {
            break;
        }
        let alpha = gamma / delta;
        let mut x_next = x.clone();
        axpy(&mut x_next, alpha, &p);
        let r_next = sub(y.data(), op.forward(&FrameSequence::new(in_dims, x_next.clone())?)?.data());
        let res = norm(&r_next);
        if res > *residuals.last().unwrap() {
            break;
        }
        x = x_next;
        r = r_next;
        residuals.push(res);
        s = op.adjoint(&FrameSequence::new(out_dims, r.clone())?)?.into_data();
        let gamma_next = dot(&s, &s);
        let beta = gamma_next / gamma;
        for (p, s) in p.iter_mut().zip(&s) {
            *p = s + beta * *p;
        }
        gamma = gamma_next;
    }
    Ok(CgResult {
        estimate: FrameSequence::new(in_dims, x)?,
        residuals,
    })
}

/// Per-frame circular Gaussian low-pass; `sigma = 0` returns the input untouched.
pub fn lowpass(frames: &FrameSequence, sigma: f64) -> Result<FrameSequence> {
    if sigma == 0.0 {
        return Ok(frames.clone());
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(crate::Error::Validation(format!("low-pass sigma must be >= 0, got {sigma}")));
    }
    let d = frames.dims();
    let g = CircularGaussian::new(sigma);
    let data = frames
        .frames()
        .flat_map(|f| g.apply_interleaved(f, d.height, d.width, d.channels))
        .collect();
    frames.with_data(data)
}
