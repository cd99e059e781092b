use crate::error::{Error, Result};
use crate::filter::CircularGaussian;
use crate::seqio::{Dims, FrameSequence};

use super::{expect_dims, LinearOp};

/// Non-overlapping `f×f` box average.
#[derive(Debug, Clone, Copy)]
pub struct BoxDownsample {
    input: Dims,
    factor: usize,
}

impl BoxDownsample {
    pub fn new(input: Dims, factor: usize) -> Result<Self> {
        input.validate()?;
        if factor == 0 || input.height % factor != 0 || input.width % factor != 0 {
            return Err(Error::validation(format!(
                "{}x{} frames are not divisible by the downsampling factor {factor}",
                input.height, input.width
            )));
        }
        Ok(BoxDownsample { input, factor })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }
}

impl LinearOp for BoxDownsample {
    fn input_dims(&self) -> Dims {
        self.input
    }

    fn output_dims(&self) -> Dims {
        Dims {
            height: self.input.height / self.factor,
            width: self.input.width / self.factor,
            ..self.input
        }
    }

    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence> {
        expect_dims(x, self.input, "downsample")?;
        let (d, o, f) = (self.input, self.output_dims(), self.factor);
        let scale = 1.0 / (f * f) as f64;
        let mut out = vec![0.0; o.len()];
        for t in 0..d.frames {
            for h in 0..d.height {
                for w in 0..d.width {
                    for c in 0..d.channels {
                        let dst = ((t * o.height + h / f) * o.width + w / f) * d.channels + c;
                        out[dst] += scale * x.get(t, h, w, c);
                    }
                }
            }
        }
        FrameSequence::new(o, out)
    }

    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence> {
        let o = self.output_dims();
        expect_dims(y, o, "downsample adjoint")?;
        let (d, f) = (self.input, self.factor);
        let scale = 1.0 / (f * f) as f64;
        let mut out = Vec::with_capacity(d.len());
        for t in 0..d.frames {
            for h in 0..d.height {
                for w in 0..d.width {
                    for c in 0..d.channels {
                        out.push(scale * y.get(t, h / f, w / f, c));
                    }
                }
            }
        }
        FrameSequence::new(d, out)
    }

    fn describe(&self) -> String {
        format!("box_downsample(x{})", self.factor)
    }
}

/// Per-frame circular Gaussian blur; self-adjoint.
#[derive(Debug, Clone)]
pub struct GaussianBlur {
    dims: Dims,
    filter: CircularGaussian,
}

impl GaussianBlur {
    pub fn new(dims: Dims, sigma: f64) -> Result<Self> {
        dims.validate()?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::validation(format!("blur sigma must be positive, got {sigma}")));
        }
        Ok(GaussianBlur {
            dims,
            filter: CircularGaussian::new(sigma),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.filter.sigma()
    }
}

impl LinearOp for GaussianBlur {
    fn input_dims(&self) -> Dims {
        self.dims
    }

    fn output_dims(&self) -> Dims {
        self.dims
    }

    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence> {
        expect_dims(x, self.dims, "gaussian blur")?;
        let d = self.dims;
        let data = x
            .frames()
            .flat_map(|f| self.filter.apply_interleaved(f, d.height, d.width, d.channels))
            .collect();
        FrameSequence::new(d, data)
    }

    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence> {
        self.forward(y)
    }

    fn describe(&self) -> String {
        format!("gaussian_blur(sigma={})", self.sigma())
    }
}

/// Centered moving average over time with symmetric reflection at the ends.
#[derive(Debug, Clone)]
pub struct TemporalAverage {
    dims: Dims,
    window: usize,
    weights: Vec<f64>,
}

/// Half-sample symmetric reflection of `j` into `0..n`.
fn reflect(j: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = j.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

impl TemporalAverage {
    pub fn new(dims: Dims, window: usize) -> Result<Self> {
        dims.validate()?;
        if window % 2 == 0 {
            return Err(Error::validation(format!("temporal window must be odd, got {window}")));
        }
        let t = dims.frames;
        let half = (window / 2) as i64;
        let mut weights = vec![0.0; t * t];
        for row in 0..t {
            for k in -half..=half {
                weights[row * t + reflect(row as i64 + k, t)] += 1.0 / window as f64;
            }
        }
        Ok(TemporalAverage { dims, window, weights })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Row-major `T×T` weight matrix.
    pub fn weight_matrix(&self) -> &[f64] {
        &self.weights
    }

    fn mix(&self, x: &FrameSequence, transpose: bool) -> Result<FrameSequence> {
        expect_dims(x, self.dims, "temporal average")?;
        let t = self.dims.frames;
        let n = self.dims.frame_len();
        let mut out = vec![0.0; self.dims.len()];
        for r in 0..t {
            let dst = &mut out[r * n..(r + 1) * n];
            for s in 0..t {
                let w = if transpose { self.weights[s * t + r] } else { self.weights[r * t + s] };
                if w != 0.0 {
                    for (o, v) in dst.iter_mut().zip(x.frame(s)) {
                        *o += w * v;
                    }
                }
            }
        }
        FrameSequence::new(self.dims, out)
    }
}

impl LinearOp for TemporalAverage {
    fn input_dims(&self) -> Dims {
        self.dims
    }

    fn output_dims(&self) -> Dims {
        self.dims
    }

    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence> {
        self.mix(x, false)
    }

    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence> {
        self.mix(y, true)
    }

    fn describe(&self) -> String {
        format!("temporal_average(w={})", self.window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_indices() {
        let got: Vec<usize> = (-3..8).map(|j| reflect(j, 5)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 4, 4, 3, 2]);
        assert_eq!(reflect(-1, 1), 0);
        assert_eq!(reflect(5, 1), 0);
    }

    #[test]
    fn weight_rows_sum_to_one() {
        for t in [1, 3, 7, 20] {
            let op = TemporalAverage::new(Dims::new(t, 2, 2, 1), 13).unwrap();
            for row in op.weight_matrix().chunks(t) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shapes() {
        let d = BoxDownsample::new(Dims::new(1, 768, 1280, 3), 4).unwrap();
        assert_eq!(d.output_dims(), Dims::new(1, 192, 320, 3));
        assert!(BoxDownsample::new(Dims::new(1, 10, 8, 1), 4).is_err());
        assert!(TemporalAverage::new(Dims::new(4, 2, 2, 1), 6).is_err());
        assert!(GaussianBlur::new(Dims::new(1, 4, 4, 1), 0.0).is_err());
    }
}
