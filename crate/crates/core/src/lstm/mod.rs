//! Peephole LSTM sequence classifier.
//!
//! ```text
//! i_t = sigmoid(W_xi x_t + W_hi h_{t-1} + w_ci * c_{t-1} + b_i)
//! f_t = sigmoid(W_xf x_t + W_hf h_{t-1} + w_cf * c_{t-1} + b_f)
//! c_t = f_t * c_{t-1} + i_t * tanh(W_xc x_t + W_hc h_{t-1} + b_c)
//! o_t = sigmoid(W_xo x_t + W_ho h_{t-1} + w_co * c_t + b_o)
//! h_t = o_t * tanh(c_t)
//! ```
//!
//! Peepholes are element-wise. The hidden outputs are averaged over the
//! sequence and a linear layer maps the average to one score per sense.

mod adagrad;
mod autoencoder;
mod checkpoint;
mod train;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use adagrad::{adagrad_update, AdaGradConfig, AdaGradState};
pub use autoencoder::{autoencoder_loss, pretrain_autoencoder, AutoencoderConfig};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use train::{lstm_predict, train_lstm_classifier, LstmConfig, LstmTrainStats};

/// Field names in storage order (checkpoints, gradient reports).
pub const FIELD_NAMES: [&str; 17] = [
    "w_xi", "w_xf", "w_xc", "w_xo", "w_hi", "w_hf", "w_hc", "w_ho", "w_ci", "w_cf", "w_co", "b_i", "b_f", "b_c", "b_o",
    "w_out", "b_out",
];

/// All weights of the cell and the output layer. Also used to hold
/// gradients and AdaGrad accumulators of the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w_xi: Array2<f64>,
    pub w_xf: Array2<f64>,
    pub w_xc: Array2<f64>,
    pub w_xo: Array2<f64>,
    pub w_hi: Array2<f64>,
    pub w_hf: Array2<f64>,
    pub w_hc: Array2<f64>,
    pub w_ho: Array2<f64>,
    pub w_ci: Array1<f64>,
    pub w_cf: Array1<f64>,
    pub w_co: Array1<f64>,
    pub b_i: Array1<f64>,
    pub b_f: Array1<f64>,
    pub b_c: Array1<f64>,
    pub b_o: Array1<f64>,
    /// K x d
    pub w_out: Array2<f64>,
    pub b_out: Array1<f64>,
}

impl LstmParams {
    pub fn zeros(d: usize, k: usize) -> Self {
        let m = || Array2::zeros((d, d));
        let v = || Array1::zeros(d);
        LstmParams {
            w_xi: m(),
            w_xf: m(),
            w_xc: m(),
            w_xo: m(),
            w_hi: m(),
            w_hf: m(),
            w_hc: m(),
            w_ho: m(),
            w_ci: v(),
            w_cf: v(),
            w_co: v(),
            b_i: v(),
            b_f: v(),
            b_c: v(),
            b_o: v(),
            w_out: Array2::zeros((k, d)),
            b_out: Array1::zeros(k),
        }
    }

    /// Every entry drawn from uniform(-range, range), fields in storage order.
    pub fn uniform<R: Rng>(d: usize, k: usize, range: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(d, k);
        if range > 0.0 {
            for (_, f) in p.fields_mut() {
                f.iter_mut().for_each(|v| *v = rng.gen_range(-range..range));
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.b_i.len()
    }

    pub fn n_classes(&self) -> usize {
        self.b_out.len()
    }

    /// `8d^2 + 7d + Kd + K`.
    pub fn num_parameters(&self) -> usize {
        self.fields().iter().map(|(_, f)| f.len()).sum()
    }

    pub fn fields(&self) -> [(&'static str, &[f64]); 17] {
        fn s1(a: &Array1<f64>) -> &[f64] {
            a.as_slice().expect("contiguous")
        }
        fn s2(a: &Array2<f64>) -> &[f64] {
            a.as_slice().expect("contiguous")
        }
        [
            (FIELD_NAMES[0], s2(&self.w_xi)),
            (FIELD_NAMES[1], s2(&self.w_xf)),
            (FIELD_NAMES[2], s2(&self.w_xc)),
            (FIELD_NAMES[3], s2(&self.w_xo)),
            (FIELD_NAMES[4], s2(&self.w_hi)),
            (FIELD_NAMES[5], s2(&self.w_hf)),
            (FIELD_NAMES[6], s2(&self.w_hc)),
            (FIELD_NAMES[7], s2(&self.w_ho)),
            (FIELD_NAMES[8], s1(&self.w_ci)),
            (FIELD_NAMES[9], s1(&self.w_cf)),
            (FIELD_NAMES[10], s1(&self.w_co)),
            (FIELD_NAMES[11], s1(&self.b_i)),
            (FIELD_NAMES[12], s1(&self.b_f)),
            (FIELD_NAMES[13], s1(&self.b_c)),
            (FIELD_NAMES[14], s1(&self.b_o)),
            (FIELD_NAMES[15], s2(&self.w_out)),
            (FIELD_NAMES[16], s1(&self.b_out)),
        ]
    }

    pub fn fields_mut(&mut self) -> [(&'static str, &mut [f64]); 17] {
        let LstmParams {
            w_xi,
            w_xf,
            w_xc,
            w_xo,
            w_hi,
            w_hf,
            w_hc,
            w_ho,
            w_ci,
            w_cf,
            w_co,
            b_i,
            b_f,
            b_c,
            b_o,
            w_out,
            b_out,
        } = self;
        fn s1(a: &mut Array1<f64>) -> &mut [f64] {
            a.as_slice_mut().expect("contiguous")
        }
        fn s2(a: &mut Array2<f64>) -> &mut [f64] {
            a.as_slice_mut().expect("contiguous")
        }
        [
            (FIELD_NAMES[0], s2(w_xi)),
            (FIELD_NAMES[1], s2(w_xf)),
            (FIELD_NAMES[2], s2(w_xc)),
            (FIELD_NAMES[3], s2(w_xo)),
            (FIELD_NAMES[4], s2(w_hi)),
            (FIELD_NAMES[5], s2(w_hf)),
            (FIELD_NAMES[6], s2(w_hc)),
            (FIELD_NAMES[7], s2(w_ho)),
            (FIELD_NAMES[8], s1(w_ci)),
            (FIELD_NAMES[9], s1(w_cf)),
            (FIELD_NAMES[10], s1(w_co)),
            (FIELD_NAMES[11], s1(b_i)),
            (FIELD_NAMES[12], s1(b_f)),
            (FIELD_NAMES[13], s1(b_c)),
            (FIELD_NAMES[14], s1(b_o)),
            (FIELD_NAMES[15], s2(w_out)),
            (FIELD_NAMES[16], s1(b_out)),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|(_, f)| f.iter().all(|v| v.is_finite()))
    }

    /// Copy the cell weights of `other`, keeping this output layer.
    pub fn copy_cell_from(&mut self, other: &LstmParams) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let out = (self.w_out.clone(), self.b_out.clone());
        *self = LstmParams {
            w_out: out.0,
            b_out: out.1,
            ..other.clone()
        };
        Ok(())
    }

    fn same_shape(&self, other: &LstmParams) -> bool {
        self.fields().iter().zip(other.fields().iter()).all(|(a, b)| a.1.len() == b.1.len())
            && self.dim() == other.dim()
            && self.n_classes() == other.n_classes()
    }

    fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (_, f) in self.fields() {
            for v in f {
                h = (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3);
            }
            h = (h ^ f.len() as u64).wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Array1<f64>,
    pub c: Array1<f64>,
}

impl LstmState {
    pub fn zeros(d: usize) -> Self {
        LstmState {
            h: Array1::zeros(d),
            c: Array1::zeros(d),
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Activations of one time step, kept for backpropagation.
#[derive(Clone, Debug)]
struct Step {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    g: Array1<f64>,
    c: Array1<f64>,
    o: Array1<f64>,
    tc: Array1<f64>,
    h: Array1<f64>,
}

fn step(p: &LstmParams, h_prev: &Array1<f64>, c_prev: &Array1<f64>, x: ArrayView1<f64>) -> Step {
    let i = (p.w_xi.dot(&x) + p.w_hi.dot(h_prev) + &p.w_ci * c_prev + &p.b_i).mapv(sigmoid);
    let f = (p.w_xf.dot(&x) + p.w_hf.dot(h_prev) + &p.w_cf * c_prev + &p.b_f).mapv(sigmoid);
    let g = (p.w_xc.dot(&x) + p.w_hc.dot(h_prev) + &p.b_c).mapv(f64::tanh);
    let c = &f * c_prev + &i * &g;
    let o = (p.w_xo.dot(&x) + p.w_ho.dot(h_prev) + &p.w_co * &c + &p.b_o).mapv(sigmoid);
    let tc = c.mapv(f64::tanh);
    let h = &o * &tc;
    Step {
        x: x.to_owned(),
        h_prev: h_prev.clone(),
        c_prev: c_prev.clone(),
        i,
        f,
        g,
        c,
        o,
        tc,
        h,
    }
}

fn check_input(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(Error::Dimension { expected: d, got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("LSTM input".into()));
    }
    Ok(())
}

/// One application of the cell.
pub fn cell_step(p: &LstmParams, s: &LstmState, x: &[f64]) -> Result<LstmState> {
    let d = p.dim();
    check_input(d, x)?;
    if s.h.len() != d || s.c.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: s.h.len().max(s.c.len()),
        });
    }
    let st = step(p, &s.h, &s.c, ArrayView1::from(x));
    Ok(LstmState { h: st.h, c: st.c })
}

/// Per-step activations of one run over a sequence.
#[derive(Clone, Debug)]
pub struct SequenceCache {
    steps: Vec<Step>,
    fingerprint: u64,
}

impl SequenceCache {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn hidden(&self, t: usize) -> &Array1<f64> {
        &self.steps[t].h
    }

    pub fn final_state(&self) -> LstmState {
        let last = self.steps.last().expect("nonempty sequence");
        LstmState {
            h: last.h.clone(),
            c: last.c.clone(),
        }
    }
}

pub(crate) fn run_sequence<V: AsRef<[f64]>>(p: &LstmParams, init: &LstmState, seq: &[V]) -> Result<SequenceCache> {
    let d = p.dim();
    let mut steps: Vec<Step> = Vec::with_capacity(seq.len());
    for x in seq {
        let x = x.as_ref();
        check_input(d, x)?;
        let st = match steps.last() {
            Some(prev) => step(p, &prev.h, &prev.c, ArrayView1::from(x)),
            None => step(p, &init.h, &init.c, ArrayView1::from(x)),
        };
        steps.push(st);
    }
    Ok(SequenceCache {
        steps,
        fingerprint: p.fingerprint(),
    })
}

fn add_outer(g: &mut Array2<f64>, a: &Array1<f64>, b: &Array1<f64>) {
    for (mut row, &ai) in g.rows_mut().into_iter().zip(a) {
        if ai != 0.0 {
            row.scaled_add(ai, b);
        }
    }
}

/// Backpropagation through time. `dh[t]` is the loss gradient reaching
/// `h_t` from outside the recurrence; `dh_last`/`dc_last` enter at the final
/// state. Cell gradients are accumulated into `grads`; the gradient with
/// respect to the initial state is returned.
pub(crate) fn backward_sequence(
    p: &LstmParams,
    cache: &SequenceCache,
    dh: &[Array1<f64>],
    dh_last: Array1<f64>,
    dc_last: Array1<f64>,
    grads: &mut LstmParams,
) -> (Array1<f64>, Array1<f64>) {
    let mut dh_next = dh_last;
    let mut dc_next = dc_last;
    for (t, s) in cache.steps.iter().enumerate().rev() {
        let dh_t = &dh[t] + &dh_next;
        let da_o = &dh_t * &s.tc * &s.o * &s.o.mapv(|v| 1.0 - v);
        let dc = &dc_next + &(&dh_t * &s.o * &s.tc.mapv(|v| 1.0 - v * v)) + &(&da_o * &p.w_co);
        let da_i = &dc * &s.g * &s.i * &s.i.mapv(|v| 1.0 - v);
        let da_f = &dc * &s.c_prev * &s.f * &s.f.mapv(|v| 1.0 - v);
        let da_c = &dc * &s.i * &s.g.mapv(|v| 1.0 - v * v);

        grads.w_co += &(&da_o * &s.c);
        grads.w_ci += &(&da_i * &s.c_prev);
        grads.w_cf += &(&da_f * &s.c_prev);
        grads.b_i += &da_i;
        grads.b_f += &da_f;
        grads.b_c += &da_c;
        grads.b_o += &da_o;
        add_outer(&mut grads.w_xi, &da_i, &s.x);
        add_outer(&mut grads.w_xf, &da_f, &s.x);
        add_outer(&mut grads.w_xc, &da_c, &s.x);
        add_outer(&mut grads.w_xo, &da_o, &s.x);
        add_outer(&mut grads.w_hi, &da_i, &s.h_prev);
        add_outer(&mut grads.w_hf, &da_f, &s.h_prev);
        add_outer(&mut grads.w_hc, &da_c, &s.h_prev);
        add_outer(&mut grads.w_ho, &da_o, &s.h_prev);

        dh_next = p.w_hi.t().dot(&da_i) + p.w_hf.t().dot(&da_f) + p.w_hc.t().dot(&da_c) + p.w_ho.t().dot(&da_o);
        dc_next = &dc * &s.f + &(&da_i * &p.w_ci) + &(&da_f * &p.w_cf);
    }
    (dh_next, dc_next)
}

/// Activations retained by [`forward`] for [`backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    seq: SequenceCache,
    h_mean: Array1<f64>,
    d: usize,
    k: usize,
}

impl ForwardCache {
    pub fn mean_hidden(&self) -> &Array1<f64> {
        &self.h_mean
    }

    pub fn sequence(&self) -> &SequenceCache {
        &self.seq
    }
}

/// Scores `W_out * mean_t(h_t) + b_out` from a zero initial state.
pub fn forward<V: AsRef<[f64]>>(p: &LstmParams, ctx: &[V]) -> Result<(Vec<f64>, ForwardCache)> {
    if ctx.is_empty() {
        return Err(Error::pre("LSTM context is empty"));
    }
    let d = p.dim();
    let seq = run_sequence(p, &LstmState::zeros(d), ctx)?;
    let mut h_mean = Array1::zeros(d);
    for s in &seq.steps {
        h_mean += &s.h;
    }
    h_mean /= seq.len() as f64;
    let scores = p.w_out.dot(&h_mean) + &p.b_out;
    Ok((
        scores.to_vec(),
        ForwardCache {
            seq,
            h_mean,
            d,
            k: p.n_classes(),
        },
    ))
}

/// Exact gradients of a loss with score gradient `dscores` with respect to every parameter.
pub fn backward(p: &LstmParams, cache: &ForwardCache, dscores: &[f64]) -> Result<LstmParams> {
    if cache.d != p.dim() || cache.k != p.n_classes() || cache.seq.fingerprint != p.fingerprint() {
        return Err(Error::StaleCache("cache was produced by different parameters".into()));
    }
    if dscores.len() != p.n_classes() {
        return Err(Error::Dimension {
            expected: p.n_classes(),
            got: dscores.len(),
        });
    }
    let d = p.dim();
    let ds = Array1::from(dscores.to_vec());
    let mut g = LstmParams::zeros(d, p.n_classes());
    add_outer(&mut g.w_out, &ds, &cache.h_mean);
    g.b_out.assign(&ds);
    let dh_each = p.w_out.t().dot(&ds) / cache.seq.len() as f64;
    let dh = vec![dh_each; cache.seq.len()];
    backward_sequence(p, &cache.seq, &dh, Array1::zeros(d), Array1::zeros(d), &mut g);
    Ok(g)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginNorm {
    /// Divide the summed hinge terms by K.
    #[default]
    Mean,
    Sum,
}

/// Multi-class hinge loss `(1/K) sum_{j != y} max(0, 1 - s_y + s_j)` and its gradient.
pub fn loss_multimargin(scores: &[f64], y: usize, norm: MarginNorm) -> Result<(f64, Vec<f64>)> {
    let k = scores.len();
    if k < 2 {
        return Err(Error::pre("multi-margin loss needs at least two classes"));
    }
    if y >= k {
        return Err(Error::pre(format!("label {y} outside 0..{k}")));
    }
    let scale = match norm {
        MarginNorm::Mean => 1.0 / k as f64,
        MarginNorm::Sum => 1.0,
    };
    let mut loss = 0.0;
    let mut grad = vec![0.0; k];
    for j in 0..k {
        if j == y {
            continue;
        }
        let m = 1.0 - scores[y] + scores[j];
        if m > 0.0 {
            loss += m * scale;
            grad[j] += scale;
            grad[y] -= scale;
        }
    }
    Ok((loss, grad))
}
