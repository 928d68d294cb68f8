//! Conditional score network `s(x, t, c)` with explicit reverse-mode gradients.
//!
//! ```text
//! t_out = L(silu(L(embed(t))))
//! c_out = L(silu(L(silu(L(c)))))          or the learned null vector
//! y_out = blocks(L(x)),  block(h) = h + L(silu(L(silu(L(silu(L(h)))))))
//! out   = Outmod(GroupNorm(y_out + t_out + c_out))
//! Outmod(u) = L(silu(L(silu(L(silu(L(u)))))))
//! ```
//!
//! All parameters live in one flat array; [`ScoreNetwork::segments`] names
//! the pieces.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::gemm::{linear_backward, linear_forward};
use super::schedule::embed_time_into;
use crate::error::{Error, Result};
use crate::math;
use crate::quantum::ClassLabel;

const NORM_EPS: f64 = 1e-5;

/// Architecture hyperparameters. The parameter count is a pure function of
/// these fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScoreArch {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub residual_blocks: usize,
    pub time_embed_dim: usize,
    pub label_dim: usize,
    pub norm_groups: usize,
}

impl Default for ScoreArch {
    fn default() -> Self {
        Self {
            input_dim: 16,
            hidden_dim: 256,
            residual_blocks: 4,
            time_embed_dim: 64,
            label_dim: 3,
            norm_groups: 8,
        }
    }
}

impl ScoreArch {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.input_dim == 0 || self.hidden_dim == 0 || self.label_dim == 0 {
            return bad(format!("architecture dimensions must be positive: {self:?}"));
        }
        if self.time_embed_dim == 0 || self.time_embed_dim % 2 != 0 {
            return bad(format!("time_embed_dim {} must be positive and even", self.time_embed_dim));
        }
        if self.norm_groups == 0 || self.hidden_dim % self.norm_groups != 0 {
            return bad(format!(
                "hidden_dim {} is not divisible into {} groups",
                self.hidden_dim, self.norm_groups
            ));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        Layout::new(self).total
    }
}

/// Named slice of the flat parameter array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Copy, Debug)]
struct Dense {
    w: usize,
    b: usize,
    inp: usize,
    out: usize,
}

impl Dense {
    fn weight<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.w..self.w + self.inp * self.out]
    }

    fn bias<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.b..self.b + self.out]
    }

    fn forward(&self, p: &[f64], x: &[f64], batch: usize) -> Vec<f64> {
        let mut y = vec![0.0; batch * self.out];
        linear_forward(x, self.weight(p), self.bias(p), &mut y, batch, self.inp, self.out);
        y
    }

    /// Accumulates parameter gradients into `grad`; returns `dx` if asked.
    fn backward(&self, p: &[f64], x: &[f64], dy: &[f64], grad: &mut [f64], want_dx: bool, batch: usize) -> Vec<f64> {
        let (lo, hi) = grad.split_at_mut(self.b);
        let dw = &mut lo[self.w..self.w + self.inp * self.out];
        let db = &mut hi[..self.out];
        let mut dx = if want_dx { vec![0.0; batch * self.inp] } else { Vec::new() };
        linear_backward(
            x,
            self.weight(p),
            dy,
            dw,
            db,
            if want_dx { Some(&mut dx) } else { None },
            batch,
            self.inp,
            self.out,
        );
        dx
    }
}

#[derive(Clone, Debug)]
struct Layout {
    time: [Dense; 2],
    cond: [Dense; 3],
    null: usize,
    input: Dense,
    blocks: Vec<[Dense; 4]>,
    gamma: usize,
    beta: usize,
    out: [Dense; 4],
    segments: Vec<Segment>,
    total: usize,
}

struct Builder {
    offset: usize,
    segments: Vec<Segment>,
}

impl Builder {
    fn raw(&mut self, name: String, len: usize) -> usize {
        let at = self.offset;
        self.segments.push(Segment { name, offset: at, len });
        self.offset += len;
        at
    }

    fn dense(&mut self, name: &str, inp: usize, out: usize) -> Dense {
        // weight directly followed by its bias
        let w = self.raw(format!("{name}.weight"), inp * out);
        let b = self.raw(format!("{name}.bias"), out);
        Dense { w, b, inp, out }
    }
}

impl Layout {
    fn new(a: &ScoreArch) -> Self {
        let h = a.hidden_dim;
        let mut bld = Builder {
            offset: 0,
            segments: Vec::new(),
        };
        let time = [bld.dense("time.0", a.time_embed_dim, h), bld.dense("time.1", h, h)];
        let cond = [
            bld.dense("cond.0", a.label_dim, h),
            bld.dense("cond.1", h, h),
            bld.dense("cond.2", h, h),
        ];
        let null = bld.raw("cond.null".into(), h);
        let input = bld.dense("input", a.input_dim, h);
        let blocks = (0..a.residual_blocks)
            .map(|r| {
                [
                    bld.dense(&format!("block.{r}.0"), h, h),
                    bld.dense(&format!("block.{r}.1"), h, h),
                    bld.dense(&format!("block.{r}.2"), h, h),
                    bld.dense(&format!("block.{r}.3"), h, h),
                ]
            })
            .collect();
        let gamma = bld.raw("norm.weight".into(), h);
        let beta = bld.raw("norm.bias".into(), h);
        let out = [
            bld.dense("out.0", h, h),
            bld.dense("out.1", h, h),
            bld.dense("out.2", h, h),
            bld.dense("out.3", h, a.input_dim),
        ];
        Self {
            time,
            cond,
            null,
            input,
            blocks,
            gamma,
            beta,
            out,
            total: bld.offset,
            segments: bld.segments,
        }
    }
}

/// Per-row conditioning: label weights, or the null condition.
#[derive(Clone, Debug, PartialEq)]
pub struct Conditioning {
    label_dim: usize,
    weights: Vec<f64>,
    null: Vec<bool>,
}

impl Conditioning {
    /// Every row uses the null condition.
    pub fn null(batch: usize, label_dim: usize) -> Self {
        Self {
            label_dim,
            weights: vec![0.0; batch * label_dim],
            null: vec![true; batch],
        }
    }

    /// The same label (or the null condition) for every row.
    pub fn repeated(label: Option<&ClassLabel>, batch: usize) -> Self {
        match label {
            None => Self::null(batch, crate::quantum::NUM_CLASSES),
            Some(l) => Self {
                label_dim: l.weights().len(),
                weights: l.weights().iter().copied().cycle().take(batch * l.weights().len()).collect(),
                null: vec![false; batch],
            },
        }
    }

    /// Rows from labels; `None` entries take the null condition.
    pub fn from_rows(rows: &[Option<ClassLabel>]) -> Self {
        let label_dim = crate::quantum::NUM_CLASSES;
        let mut weights = Vec::with_capacity(rows.len() * label_dim);
        let mut null = Vec::with_capacity(rows.len());
        for row in rows {
            match row {
                Some(l) => {
                    weights.extend_from_slice(l.weights());
                    null.push(false);
                }
                None => {
                    weights.extend(core::iter::repeat_n(0.0, label_dim));
                    null.push(true);
                }
            }
        }
        Self { label_dim, weights, null }
    }

    pub fn len(&self) -> usize {
        self.null.len()
    }

    pub fn is_empty(&self) -> bool {
        self.null.is_empty()
    }
}

/// Activations kept for the backward pass.
#[derive(Clone, Debug)]
pub struct Tape {
    batch: usize,
    emb: Vec<f64>,
    t_pre: Vec<f64>,
    t_act: Vec<f64>,
    c_in: Vec<f64>,
    c_pre: [Vec<f64>; 2],
    c_act: [Vec<f64>; 2],
    null: Vec<bool>,
    x: Vec<f64>,
    /// Residual stream entering each block, plus the final stream.
    h: Vec<Vec<f64>>,
    b_pre: Vec<[Vec<f64>; 3]>,
    b_act: Vec<[Vec<f64>; 3]>,
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
    normed: Vec<f64>,
    o_pre: [Vec<f64>; 3],
    o_act: [Vec<f64>; 3],
    out: Vec<f64>,
}

impl Tape {
    /// Network output, `batch x input_dim`.
    pub fn output(&self) -> &[f64] {
        &self.out
    }

    pub fn into_output(self) -> Vec<f64> {
        self.out
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + math::exp(-x))
}

fn silu(pre: &[f64]) -> Vec<f64> {
    pre.iter().map(|&a| a * sigmoid(a)).collect()
}

/// `d pre` from `d act` for `act = silu(pre)`, in place on `d`.
fn silu_backward(pre: &[f64], d: &mut [f64]) {
    for (g, &a) in d.iter_mut().zip(pre) {
        let s = sigmoid(a);
        *g *= s * (1.0 + a * (1.0 - s));
    }
}

/// Score network: architecture plus flat parameters.
#[derive(Clone, Debug)]
pub struct ScoreNetwork {
    arch: ScoreArch,
    layout: Layout,
    params: Vec<f64>,
}

impl PartialEq for ScoreNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.arch == other.arch && self.params == other.params
    }
}

impl ScoreNetwork {
    /// Fresh initialization: weights `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`,
    /// biases and the null embedding zero, norm scale one, and a zero output
    /// layer so the initial score is identically zero.
    pub fn init<R: Rng + ?Sized>(arch: ScoreArch, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let layout = Layout::new(&arch);
        let mut params = vec![0.0; layout.total];
        let fill = |d: &Dense, params: &mut [f64], rng: &mut R| {
            let bound = 1.0 / math::sqrt(d.inp as f64);
            for w in &mut params[d.w..d.w + d.inp * d.out] {
                *w = rng.random_range(-bound..bound);
            }
        };
        let hidden: Vec<Dense> = layout
            .time
            .iter()
            .chain(&layout.cond)
            .chain(core::iter::once(&layout.input))
            .chain(layout.blocks.iter().flatten())
            .chain(&layout.out[..3])
            .copied()
            .collect();
        for d in &hidden {
            fill(d, &mut params, rng);
        }
        for g in &mut params[layout.gamma..layout.gamma + arch.hidden_dim] {
            *g = 1.0;
        }
        Ok(Self { arch, layout, params })
    }

    /// Wraps existing parameters; the length must match the architecture.
    pub fn from_params(arch: ScoreArch, params: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        let layout = Layout::new(&arch);
        if params.len() != layout.total {
            return Err(Error::DimensionMismatch {
                expected: layout.total,
                actual: params.len(),
            });
        }
        Ok(Self { arch, layout, params })
    }

    pub fn arch(&self) -> &ScoreArch {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.layout.segments
    }

    /// Batched forward pass. `x` is `batch x input_dim` and `t` has one
    /// time per row.
    pub fn forward(&self, x: &[f64], t: &[f64], cond: &Conditioning) -> Result<Tape> {
        let a = &self.arch;
        let b = t.len();
        if x.len() != b * a.input_dim {
            return Err(Error::DimensionMismatch {
                expected: b * a.input_dim,
                actual: x.len(),
            });
        }
        if cond.len() != b || cond.label_dim != a.label_dim {
            return Err(Error::DimensionMismatch {
                expected: b * a.label_dim,
                actual: cond.weights.len(),
            });
        }
        let p = &self.params;
        let l = &self.layout;
        let h = a.hidden_dim;

        let mut emb = vec![0.0; b * a.time_embed_dim];
        for (row, &ti) in emb.chunks_exact_mut(a.time_embed_dim).zip(t) {
            embed_time_into(ti, row);
        }
        let t_pre = l.time[0].forward(p, &emb, b);
        let t_act = silu(&t_pre);
        let t_out = l.time[1].forward(p, &t_act, b);

        let c_in = cond.weights.clone();
        let c_pre0 = l.cond[0].forward(p, &c_in, b);
        let c_act0 = silu(&c_pre0);
        let c_pre1 = l.cond[1].forward(p, &c_act0, b);
        let c_act1 = silu(&c_pre1);
        let mut c_out = l.cond[2].forward(p, &c_act1, b);
        let null_vec = &p[l.null..l.null + h];
        for (row, &is_null) in c_out.chunks_exact_mut(h).zip(&cond.null) {
            if is_null {
                row.copy_from_slice(null_vec);
            }
        }

        let mut hs = Vec::with_capacity(l.blocks.len() + 1);
        let mut b_pre = Vec::with_capacity(l.blocks.len());
        let mut b_act = Vec::with_capacity(l.blocks.len());
        let mut stream = l.input.forward(p, x, b);
        for blk in &l.blocks {
            let p0 = blk[0].forward(p, &stream, b);
            let a0 = silu(&p0);
            let p1 = blk[1].forward(p, &a0, b);
            let a1 = silu(&p1);
            let p2 = blk[2].forward(p, &a1, b);
            let a2 = silu(&p2);
            let delta = blk[3].forward(p, &a2, b);
            let next: Vec<f64> = stream.iter().zip(&delta).map(|(s, d)| s + d).collect();
            hs.push(stream);
            b_pre.push([p0, p1, p2]);
            b_act.push([a0, a1, a2]);
            stream = next;
        }

        let gs = h / a.norm_groups;
        let gamma = &p[l.gamma..l.gamma + h];
        let beta = &p[l.beta..l.beta + h];
        let mut xhat = vec![0.0; b * h];
        let mut inv_std = vec![0.0; b * a.norm_groups];
        let mut normed = vec![0.0; b * h];
        for r in 0..b {
            for g in 0..a.norm_groups {
                let lo = r * h + g * gs;
                let z = |k: usize| stream[lo + k] + t_out[lo + k] + c_out[lo + k];
                let mean = (0..gs).map(z).sum::<f64>() / gs as f64;
                let var = (0..gs).map(|k| (z(k) - mean) * (z(k) - mean)).sum::<f64>() / gs as f64;
                let inv = 1.0 / math::sqrt(var + NORM_EPS);
                inv_std[r * a.norm_groups + g] = inv;
                for k in 0..gs {
                    let xh = (z(k) - mean) * inv;
                    xhat[lo + k] = xh;
                    normed[lo + k] = gamma[g * gs + k] * xh + beta[g * gs + k];
                }
            }
        }
        hs.push(stream);

        let o_pre0 = l.out[0].forward(p, &normed, b);
        let o_act0 = silu(&o_pre0);
        let o_pre1 = l.out[1].forward(p, &o_act0, b);
        let o_act1 = silu(&o_pre1);
        let o_pre2 = l.out[2].forward(p, &o_act1, b);
        let o_act2 = silu(&o_pre2);
        let out = l.out[3].forward(p, &o_act2, b);

        Ok(Tape {
            batch: b,
            emb,
            t_pre,
            t_act,
            c_in,
            c_pre: [c_pre0, c_pre1],
            c_act: [c_act0, c_act1],
            null: cond.null.clone(),
            x: x.to_vec(),
            h: hs,
            b_pre,
            b_act,
            xhat,
            inv_std,
            normed,
            o_pre: [o_pre0, o_pre1, o_pre2],
            o_act: [o_act0, o_act1, o_act2],
            out,
        })
    }

    /// Scores for a batch; shorthand for `forward(..).into_output()`.
    pub fn score(&self, x: &[f64], t: &[f64], cond: &Conditioning) -> Result<Vec<f64>> {
        Ok(self.forward(x, t, cond)?.into_output())
    }

    /// Gradient of `sum(d_out * out)` with respect to the parameters.
    pub fn backward(&self, tape: &Tape, d_out: &[f64]) -> Vec<f64> {
        let a = &self.arch;
        let l = &self.layout;
        let p = &self.params;
        let b = tape.batch;
        let h = a.hidden_dim;
        assert_eq!(d_out.len(), b * a.input_dim);
        let mut grad = vec![0.0; l.total];

        let mut d = l.out[3].backward(p, &tape.o_act[2], d_out, &mut grad, true, b);
        for k in (0..3).rev() {
            silu_backward(&tape.o_pre[k], &mut d);
            let x_in = if k == 0 { &tape.normed } else { &tape.o_act[k - 1] };
            d = l.out[k].backward(p, x_in, &d, &mut grad, true, b);
        }

        // group norm
        let gs = h / a.norm_groups;
        let mut dz = vec![0.0; b * h];
        {
            let gamma = &p[l.gamma..l.gamma + h];
            for r in 0..b {
                for g in 0..a.norm_groups {
                    let lo = r * h + g * gs;
                    let inv = tape.inv_std[r * a.norm_groups + g];
                    let mut m1 = 0.0;
                    let mut m2 = 0.0;
                    for k in 0..gs {
                        let j = g * gs + k;
                        let dy = d[lo + k];
                        grad[l.gamma + j] += dy * tape.xhat[lo + k];
                        grad[l.beta + j] += dy;
                        let dxh = dy * gamma[j];
                        m1 += dxh;
                        m2 += dxh * tape.xhat[lo + k];
                    }
                    m1 /= gs as f64;
                    m2 /= gs as f64;
                    for k in 0..gs {
                        let dxh = d[lo + k] * gamma[g * gs + k];
                        dz[lo + k] = inv * (dxh - m1 - tape.xhat[lo + k] * m2);
                    }
                }
            }
        }

        // time path
        let mut dt = l.time[1].backward(p, &tape.t_act, &dz, &mut grad, true, b);
        silu_backward(&tape.t_pre, &mut dt);
        l.time[0].backward(p, &tape.emb, &dt, &mut grad, false, b);

        // condition path; null rows feed the null vector instead
        let mut dc = dz.clone();
        for (r, &is_null) in tape.null.iter().enumerate() {
            if is_null {
                let row = &mut dc[r * h..(r + 1) * h];
                for (gn, v) in grad[l.null..l.null + h].iter_mut().zip(row.iter_mut()) {
                    *gn += *v;
                    *v = 0.0;
                }
            }
        }
        let mut dcc = l.cond[2].backward(p, &tape.c_act[1], &dc, &mut grad, true, b);
        silu_backward(&tape.c_pre[1], &mut dcc);
        let mut dcc = l.cond[1].backward(p, &tape.c_act[0], &dcc, &mut grad, true, b);
        silu_backward(&tape.c_pre[0], &mut dcc);
        l.cond[0].backward(p, &tape.c_in, &dcc, &mut grad, false, b);

        // residual stream
        let mut dh = dz;
        for (r, blk) in l.blocks.iter().enumerate().rev() {
            let pre = &tape.b_pre[r];
            let act = &tape.b_act[r];
            let mut g = blk[3].backward(p, &act[2], &dh, &mut grad, true, b);
            silu_backward(&pre[2], &mut g);
            let mut g = blk[2].backward(p, &act[1], &g, &mut grad, true, b);
            silu_backward(&pre[1], &mut g);
            let mut g = blk[1].backward(p, &act[0], &g, &mut grad, true, b);
            silu_backward(&pre[0], &mut g);
            let g = blk[0].backward(p, &tape.h[r], &g, &mut grad, true, b);
            for (acc, v) in dh.iter_mut().zip(&g) {
                *acc += v;
            }
        }
        l.input.backward(p, &tape.x, &dh, &mut grad, false, b);
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::StateClass;
    use crate::rng;

    fn small() -> ScoreArch {
        ScoreArch {
            input_dim: 4,
            hidden_dim: 16,
            residual_blocks: 2,
            time_embed_dim: 8,
            label_dim: 3,
            norm_groups: 4,
        }
    }

    #[test]
    fn segments_tile_the_parameters() {
        let net = ScoreNetwork::init(small(), &mut rng::stream(0, 0)).unwrap();
        let mut next = 0;
        for s in net.segments() {
            assert_eq!(s.offset, next);
            next += s.len;
        }
        assert_eq!(next, net.num_params());
        assert_eq!(small().num_params(), net.num_params());
        let names: Vec<&str> = net.segments().iter().map(|s| s.name.as_str()).collect();
        assert!(names.contains(&"cond.null"));
        assert!(names.contains(&"block.1.3.bias"));
        assert!(names.contains(&"norm.weight"));
    }

    #[test]
    fn invalid_architectures() {
        let mut a = small();
        a.time_embed_dim = 7;
        assert!(a.validate().is_err());
        let mut a = small();
        a.norm_groups = 5;
        assert!(a.validate().is_err());
        assert!(ScoreNetwork::from_params(small(), vec![0.0; 3]).is_err());
    }

    #[test]
    fn initial_score_is_zero() {
        let net = ScoreNetwork::init(small(), &mut rng::stream(1, 0)).unwrap();
        let x: Vec<f64> = (0..8).map(|i| i as f64 * 0.3).collect();
        let out = net.score(&x, &[0.5, 2.0], &Conditioning::null(2, 3)).unwrap();
        assert_eq!(out, vec![0.0; 8]);
    }

    #[test]
    fn zero_parameters_ignore_the_label() {
        let net = ScoreNetwork::from_params(small(), vec![0.0; small().num_params()]).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        let with = net
            .score(&x, &[1.0], &Conditioning::repeated(Some(&ClassLabel::one_hot(StateClass::Fully)), 1))
            .unwrap();
        let without = net.score(&x, &[1.0], &Conditioning::null(1, 3)).unwrap();
        assert_eq!(with, without);
        assert_eq!(with.len(), 4);
    }

    #[test]
    fn shape_errors() {
        let net = ScoreNetwork::init(small(), &mut rng::stream(2, 0)).unwrap();
        assert!(net.forward(&[0.0; 5], &[1.0], &Conditioning::null(1, 3)).is_err());
        assert!(net.forward(&[0.0; 4], &[1.0], &Conditioning::null(2, 3)).is_err());
    }

    #[test]
    fn rows_are_independent() {
        let mut net = ScoreNetwork::init(small(), &mut rng::stream(3, 0)).unwrap();
        for v in net.params_mut() {
            *v += 0.01;
        }
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let cond = Conditioning::from_rows(&[None, Some(ClassLabel::one_hot(StateClass::Product)), None]);
        let batched = net.score(&x, &[0.1, 1.0, 3.0], &cond).unwrap();
        let single = net
            .score(&x[4..8], &[1.0], &Conditioning::from_rows(&[Some(ClassLabel::one_hot(StateClass::Product))]))
            .unwrap();
        for (a, b) in batched[4..8].iter().zip(&single) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
