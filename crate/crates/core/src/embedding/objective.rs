//! Negative-sampling objective shared by PV-DM and PV-DBOW.
//!
//! One training example predicts a target token from a hidden vector: the
//! document vector alone (PV-DBOW) or the mean of the document vector and
//! the in-vocabulary context word vectors (PV-DM). The loss is
//!
//! ```text
//! -ln σ(out[target]·h) - Σ_neg ln σ(-out[neg]·h)
//! ```

use crate::matrix::{axpy, dot, Matrix};

use super::EmbedMode;

/// The three parameter tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    Doc,
    Word,
    Out,
}

/// Row-level access to the parameter tables, so the same update code runs
/// over owned matrices, frozen models during inference, and shared atomic
/// storage.
pub trait ParamStore {
    fn dim(&self) -> usize;
    fn read(&self, table: Table, row: usize, out: &mut [f64]);
    /// `table[row] += scale * delta`
    fn add(&mut self, table: Table, row: usize, scale: f64, delta: &[f64]);
}

/// Owned parameter tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub docs: Matrix,
    pub words: Matrix,
    pub outs: Matrix,
}

impl Params {
    pub fn table(&self, table: Table) -> &Matrix {
        match table {
            Table::Doc => &self.docs,
            Table::Word => &self.words,
            Table::Out => &self.outs,
        }
    }

    pub fn table_mut(&mut self, table: Table) -> &mut Matrix {
        match table {
            Table::Doc => &mut self.docs,
            Table::Word => &mut self.words,
            Table::Out => &mut self.outs,
        }
    }

    pub fn zeros_like(&self) -> Params {
        Params {
            docs: Matrix::zeros(self.docs.rows(), self.docs.cols()),
            words: Matrix::zeros(self.words.rows(), self.words.cols()),
            outs: Matrix::zeros(self.outs.rows(), self.outs.cols()),
        }
    }
}

impl ParamStore for Params {
    fn dim(&self) -> usize {
        self.docs.cols()
    }

    fn read(&self, table: Table, row: usize, out: &mut [f64]) {
        out.copy_from_slice(self.table(table).row(row));
    }

    fn add(&mut self, table: Table, row: usize, scale: f64, delta: &[f64]) {
        axpy(scale, delta, self.table_mut(table).row_mut(row));
    }
}

/// One prediction: `target` from document `doc` (and `contexts` in PV-DM).
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub doc: usize,
    pub contexts: &'a [usize],
    pub target: usize,
    pub negatives: &'a [usize],
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`, stable for large |x|.
pub fn log_sigmoid(x: f64) -> f64 {
    -((-x).max(0.0) + (-x.abs()).exp().ln_1p())
}

/// Reusable buffers for [`sgd_step`].
#[derive(Debug, Clone)]
pub struct Scratch {
    hidden: Vec<f64>,
    grad_hidden: Vec<f64>,
    row: Vec<f64>,
    out_grads: Vec<f64>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        Scratch {
            hidden: vec![0.0; dim],
            grad_hidden: vec![0.0; dim],
            row: vec![0.0; dim],
            out_grads: Vec::new(),
        }
    }
}

fn hidden_scale(ex: &Example<'_>, mode: EmbedMode) -> f64 {
    match mode {
        EmbedMode::Pvdm => 1.0 / (1 + ex.contexts.len()) as f64,
        EmbedMode::Pvdbow => 1.0,
    }
}

fn compute_hidden<P: ParamStore + ?Sized>(
    params: &P,
    ex: &Example<'_>,
    mode: EmbedMode,
    hidden: &mut [f64],
    row: &mut [f64],
) {
    params.read(Table::Doc, ex.doc, hidden);
    if mode == EmbedMode::Pvdm {
        for &c in ex.contexts {
            params.read(Table::Word, c, row);
            axpy(1.0, row, hidden);
        }
        let scale = hidden_scale(ex, mode);
        hidden.iter_mut().for_each(|h| *h *= scale);
    }
}

fn outputs<'a>(ex: &'a Example<'_>) -> impl Iterator<Item = (usize, bool)> + 'a {
    std::iter::once((ex.target, true)).chain(ex.negatives.iter().map(|&n| (n, false)))
}

/// Loss of one example, forward pass only.
pub fn example_loss<P: ParamStore + ?Sized>(params: &P, ex: &Example<'_>, mode: EmbedMode) -> f64 {
    let dim = params.dim();
    let mut hidden = vec![0.0; dim];
    let mut row = vec![0.0; dim];
    compute_hidden(params, ex, mode, &mut hidden, &mut row);
    outputs(ex)
        .map(|(o, positive)| {
            params.read(Table::Out, o, &mut row);
            let s = dot(&row, &hidden);
            if positive {
                -log_sigmoid(s)
            } else {
                -log_sigmoid(-s)
            }
        })
        .sum()
}

/// Loss, gradient w.r.t. the hidden vector (in `scratch.grad_hidden`) and
/// w.r.t. each output row in example order (in `scratch.out_grads`).
fn backward<P: ParamStore + ?Sized>(
    params: &P,
    ex: &Example<'_>,
    mode: EmbedMode,
    scratch: &mut Scratch,
) -> f64 {
    let dim = params.dim();
    let Scratch {
        hidden,
        grad_hidden,
        row,
        out_grads,
    } = scratch;
    compute_hidden(params, ex, mode, hidden, row);
    grad_hidden.iter_mut().for_each(|g| *g = 0.0);
    out_grads.clear();
    let mut loss = 0.0;
    for (o, positive) in outputs(ex) {
        params.read(Table::Out, o, row);
        let s = dot(row, hidden);
        let g = if positive {
            loss -= log_sigmoid(s);
            sigmoid(s) - 1.0
        } else {
            loss -= log_sigmoid(-s);
            sigmoid(s)
        };
        axpy(g, row, grad_hidden);
        out_grads.extend(hidden.iter().map(|h| g * h));
    }
    debug_assert_eq!(out_grads.len(), dim * (1 + ex.negatives.len()));
    loss
}

/// One plain SGD update on every parameter the example touches. Returns the
/// example loss before the update.
pub fn sgd_step<P: ParamStore + ?Sized>(
    params: &mut P,
    ex: &Example<'_>,
    mode: EmbedMode,
    lr: f64,
    scratch: &mut Scratch,
) -> f64 {
    let loss = backward(params, ex, mode, scratch);
    let dim = params.dim();
    for (k, (o, _)) in outputs(ex).enumerate() {
        params.add(
            Table::Out,
            o,
            -lr,
            &scratch.out_grads[k * dim..(k + 1) * dim],
        );
    }
    let scale = -lr * hidden_scale(ex, mode);
    params.add(Table::Doc, ex.doc, scale, &scratch.grad_hidden);
    if mode == EmbedMode::Pvdm {
        for &c in ex.contexts {
            params.add(Table::Word, c, scale, &scratch.grad_hidden);
        }
    }
    loss
}

/// Dense analytic gradient of [`example_loss`] with respect to all three
/// tables.
pub fn example_gradient(params: &Params, ex: &Example<'_>, mode: EmbedMode) -> (f64, Params) {
    let mut scratch = Scratch::new(params.dim());
    let loss = backward(params, ex, mode, &mut scratch);
    let mut grad = params.zeros_like();
    let dim = params.dim();
    for (k, (o, _)) in outputs(ex).enumerate() {
        grad.add(
            Table::Out,
            o,
            1.0,
            &scratch.out_grads[k * dim..(k + 1) * dim],
        );
    }
    let scale = hidden_scale(ex, mode);
    grad.add(Table::Doc, ex.doc, scale, &scratch.grad_hidden);
    if mode == EmbedMode::Pvdm {
        for &c in ex.contexts {
            grad.add(Table::Word, c, scale, &scratch.grad_hidden);
        }
    }
    (loss, grad)
}
