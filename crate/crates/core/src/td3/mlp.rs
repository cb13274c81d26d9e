//! Fully connected networks with reverse-mode gradients.
//!
//! Parameters live in one flat vector, layer by layer, each layer stored as
//! its weight matrix (out × in, row-major) followed by its bias. Gradients,
//! optimizer moments and target-network interpolation all work on that same
//! layout.

use std::fmt::Debug;

use num_traits::Float;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Negative-side slope of the hidden activation.
pub const LEAKY_SLOPE: f64 = 0.01;

pub trait Scalar:
    Float + Default + Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// `c ← α·a·b + β·c` with explicit row/column strides.
    ///
    /// # Safety
    /// Strides must describe matrices that lie inside the given slices;
    /// [`gemm`] checks this before calling.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn of(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("finite constant")
    }
}

impl Scalar for f32 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// A dense operand: slice plus (rows, cols, row stride, col stride).
#[derive(Clone, Copy)]
struct View<'a, T> {
    data: &'a [T],
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a, T> View<'a, T> {
    fn row_major(data: &'a [T], rows: usize, cols: usize) -> Self {
        Self {
            data,
            rows,
            cols,
            rs: cols,
            cs: 1,
        }
    }

    fn t(self) -> Self {
        Self {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
        }
    }

    fn fits(&self) -> bool {
        self.rows == 0
            || self.cols == 0
            || (self.rows - 1) * self.rs + (self.cols - 1) * self.cs < self.data.len()
    }
}

/// `out (m × n, row-major) ← α a b + β out`.
fn gemm<T: Scalar>(alpha: T, a: View<T>, b: View<T>, beta: T, out: &mut [T]) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    assert_eq!(k, b.rows, "inner dimensions");
    assert!(a.fits() && b.fits(), "operand out of bounds");
    assert!(out.len() >= m * n, "output too small");
    // SAFETY: bounds checked above; `out` does not alias `a` or `b` because
    // it is a distinct &mut borrow.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            out.as_mut_ptr(),
            n as isize,
            1,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputActivation {
    Linear,
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mlp<T: Scalar> {
    sizes: Vec<usize>,
    output: OutputActivation,
    params: Vec<T>,
}

/// Activations recorded by a forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone, Default)]
pub struct Tape<T> {
    batch: usize,
    /// Input to each layer (layer 0 gets the network input).
    inputs: Vec<Vec<T>>,
    /// Pre-activation of each layer.
    pre: Vec<Vec<T>>,
    output: Vec<T>,
    delta: Vec<T>,
    delta_next: Vec<T>,
}

impl<T: Scalar> Tape<T> {
    pub fn output(&self) -> &[T] {
        &self.output
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

fn leaky<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        x * T::of(LEAKY_SLOPE)
    }
}

fn leaky_grad<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        T::of(LEAKY_SLOPE)
    }
}

impl<T: Scalar> Mlp<T> {
    /// Hidden and output layers draw from `U(-1/√fan_in, 1/√fan_in)`; the
    /// output layer instead uses `final_scale` when given.
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        output: OutputActivation,
        final_scale: Option<f64>,
        rng: &mut R,
    ) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let mut net = Self::zeros(sizes, output);
        let layers = net.layers();
        for l in 0..layers {
            let (fan_in, _) = (sizes[l], sizes[l + 1]);
            let bound = match final_scale {
                Some(s) if l + 1 == layers => s,
                _ => 1.0 / (fan_in as f64).sqrt(),
            };
            let (w, b) = net.layer_range(l);
            for p in &mut net.params[w.start..b.end] {
                *p = T::of(rng.random_range(-bound..bound));
            }
        }
        net
    }

    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Self {
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Self {
            sizes: sizes.to_vec(),
            output,
            params: vec![T::zero(); count],
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Ranges of the weight matrix and bias of layer `l` in the flat vector.
    pub fn layer_range(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let offset: usize = self.sizes[..l + 1]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum();
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        (offset..offset + i * o, offset + i * o..offset + i * o + o)
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Forward pass over a row-major `batch × input_dim` block, recording
    /// what [`Self::backward`] needs.
    pub fn forward<'t>(&self, x: &[T], batch: usize, tape: &'t mut Tape<T>) -> &'t [T] {
        assert_eq!(x.len(), batch * self.input_dim(), "input shape");
        let layers = self.layers();
        tape.batch = batch;
        tape.inputs.resize_with(layers, Vec::new);
        tape.pre.resize_with(layers, Vec::new);
        tape.inputs[0].clear();
        tape.inputs[0].extend_from_slice(x);
        for l in 0..layers {
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            let (wr, br) = self.layer_range(l);
            let bias = &self.params[br];
            let pre = &mut tape.pre[l];
            pre.clear();
            pre.reserve(batch * o);
            for _ in 0..batch {
                pre.extend_from_slice(bias);
            }
            let w = View::row_major(&self.params[wr], o, i);
            gemm(
                T::one(),
                View::row_major(&tape.inputs[l], batch, i),
                w.t(),
                T::one(),
                pre,
            );
            let next = if l + 1 < layers {
                &mut tape.inputs[l + 1]
            } else {
                &mut tape.output
            };
            next.clear();
            if l + 1 < layers {
                next.extend(pre.iter().map(|v| leaky(*v)));
            } else {
                match self.output {
                    OutputActivation::Linear => next.extend_from_slice(pre),
                    OutputActivation::Tanh => next.extend(pre.iter().map(|v| v.tanh())),
                }
            }
        }
        &tape.output
    }

    /// Forward pass without keeping a tape.
    pub fn predict(&self, x: &[T], batch: usize) -> Vec<T> {
        let mut tape = Tape::default();
        self.forward(x, batch, &mut tape);
        std::mem::take(&mut tape.output)
    }

    /// Reverse pass for `∂L/∂output = d_out` (row-major `batch × out`).
    ///
    /// Writes parameter gradients into `grads` (overwriting) and, when
    /// `d_input` is given, the gradient with respect to the network input.
    pub fn backward(
        &self,
        tape: &mut Tape<T>,
        d_out: &[T],
        grads: &mut [T],
        d_input: Option<&mut Vec<T>>,
    ) {
        let batch = tape.batch;
        let layers = self.layers();
        assert_eq!(d_out.len(), batch * self.output_dim(), "gradient shape");
        assert_eq!(grads.len(), self.params.len(), "gradient buffer");

        let mut delta = std::mem::take(&mut tape.delta);
        let mut delta_next = std::mem::take(&mut tape.delta_next);
        delta.clear();
        match self.output {
            OutputActivation::Linear => delta.extend_from_slice(d_out),
            OutputActivation::Tanh => delta.extend(
                d_out
                    .iter()
                    .zip(&tape.output)
                    .map(|(g, y)| *g * (T::one() - *y * *y)),
            ),
        }
        let mut d_input = d_input;
        for l in (0..layers).rev() {
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            let (wr, br) = self.layer_range(l);
            // dW = deltaᵀ · input
            gemm(
                T::one(),
                View::row_major(&delta, batch, o).t(),
                View::row_major(&tape.inputs[l], batch, i),
                T::zero(),
                &mut grads[wr.clone()],
            );
            let gb = &mut grads[br];
            gb.iter_mut().for_each(|g| *g = T::zero());
            for row in delta.chunks_exact(o) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g = *g + *d;
                }
            }
            let need_input = l > 0 || d_input.is_some();
            if !need_input {
                break;
            }
            // d(input) = delta · W
            delta_next.clear();
            delta_next.resize(batch * i, T::zero());
            gemm(
                T::one(),
                View::row_major(&delta, batch, o),
                View::row_major(&self.params[wr], o, i),
                T::zero(),
                &mut delta_next,
            );
            if l > 0 {
                for (d, z) in delta_next.iter_mut().zip(&tape.pre[l - 1]) {
                    *d = *d * leaky_grad(*z);
                }
                std::mem::swap(&mut delta, &mut delta_next);
            } else if let Some(out) = d_input.take() {
                out.clear();
                out.extend_from_slice(&delta_next);
            }
        }
        tape.delta = delta;
        tape.delta_next = delta_next;
    }

    /// `self ← rate·online + (1 - rate)·self`.
    pub fn soft_update_from(&mut self, online: &Mlp<T>, rate: T) {
        assert_eq!(self.params.len(), online.params.len());
        let keep = T::one() - rate;
        for (t, o) in self.params.iter_mut().zip(&online.params) {
            *t = rate * *o + keep * *t;
        }
    }

    /// Converts parameters to another precision.
    pub fn cast<U: Scalar>(&self) -> Mlp<U> {
        Mlp {
            sizes: self.sizes.clone(),
            output: self.output,
            params: self
                .params
                .iter()
                .map(|p| U::of(p.to_f64().expect("finite")))
                .collect(),
        }
    }
}
