//! Hinge losses and their subgradients.
//!
//! Both objectives are sums of `max{0, 1 - positive + negative}` terms.
//! Gradients are returned sparsely: only the touched rows appear, and
//! the composer gradient is dense only when a multi-hop path was part
//! of the instance.

use std::collections::HashMap;

use crate::corpus::WordId;
use crate::deptree::{DepPath, Triple};
use crate::error::{Error, Result};

use super::{compose_with_trace, dot, htanh_grad, ComposeTrace, ContextPair, Matrix, ModelParams};

/// Sparse gradient of one training instance with respect to the model.
///
/// Row gradients are keyed by row index into the corresponding matrix.
/// Applying with a step size adds `-lr * grad` into the parameters.
#[derive(Debug, Default, Clone)]
pub struct SparseGrads {
    pub target: HashMap<usize, Vec<f64>>,
    pub context: HashMap<usize, Vec<f64>>,
    pub relations: HashMap<usize, Vec<f64>>,
    pub composer: Option<Matrix>,
}

impl SparseGrads {
    fn add_row(map: &mut HashMap<usize, Vec<f64>>, row: usize, grad: &[f64], scale: f64) {
        let entry = map.entry(row).or_insert_with(|| vec![0.0; grad.len()]);
        for (e, g) in entry.iter_mut().zip(grad) {
            *e += scale * g;
        }
    }

    pub fn add_target(&mut self, id: WordId, grad: &[f64], scale: f64) {
        Self::add_row(&mut self.target, id.index(), grad, scale);
    }

    pub fn add_context(&mut self, id: WordId, grad: &[f64], scale: f64) {
        Self::add_row(&mut self.context, id.index(), grad, scale);
    }

    pub fn add_relation(&mut self, row: usize, grad: &[f64], scale: f64) {
        Self::add_row(&mut self.relations, row, grad, scale);
    }

    fn composer_mut(&mut self, d: usize) -> &mut Matrix {
        self.composer.get_or_insert_with(|| Matrix::zeros(d, 2 * d))
    }

    /// Take one SGD step: `params -= lr * grads`. The unknown-word row is
    /// never touched by construction (it is neither observed nor sampled).
    pub fn apply(&self, params: &mut ModelParams, lr: f64) {
        for (&row, grad) in &self.target {
            for (p, g) in params.target_words.row_mut(row).iter_mut().zip(grad) {
                *p -= lr * g;
            }
        }
        for (&row, grad) in &self.context {
            for (p, g) in params.context_words.row_mut(row).iter_mut().zip(grad) {
                *p -= lr * g;
            }
        }
        for (&row, grad) in &self.relations {
            for (p, g) in params.relations.row_mut(row).iter_mut().zip(grad) {
                *p -= lr * g;
            }
        }
        if let Some(gw) = &self.composer {
            for (p, g) in params.composer.data_mut().iter_mut().zip(gw.data()) {
                *p -= lr * g;
            }
        }
    }
}

/// Backpropagate `upstream` (the gradient at the path's output vector)
/// through one composed path.
fn backprop_path(
    path: &DepPath,
    trace: &ComposeTrace,
    upstream: &[f64],
    params: &ModelParams,
    grads: &mut SparseGrads,
) {
    let d = params.dim();
    let steps = path.steps();
    let mut dh = upstream.to_vec();
    for k in (1..steps.len()).rev() {
        let z = &trace.pre[k - 1];
        let dz: Vec<f64> = dh.iter().zip(z).map(|(&g, &x)| g * htanh_grad(x)).collect();
        let h_prev = &trace.hidden[k - 1];
        let g_vec = params.relations.row(steps[k].row());
        {
            let gw = grads.composer_mut(d);
            for (a, &dz_a) in dz.iter().enumerate() {
                if dz_a == 0.0 {
                    continue;
                }
                let row = gw.row_mut(a);
                for (b, &h) in h_prev.iter().enumerate() {
                    row[b] += dz_a * h;
                }
                for (b, &g) in g_vec.iter().enumerate() {
                    row[d + b] += dz_a * g;
                }
            }
        }
        let mut dh_prev = vec![0.0; d];
        let mut dg = vec![0.0; d];
        for (a, &dz_a) in dz.iter().enumerate() {
            if dz_a == 0.0 {
                continue;
            }
            let w_row = params.composer.row(a);
            for b in 0..d {
                dh_prev[b] += w_row[b] * dz_a;
                dg[b] += w_row[d + b] * dz_a;
            }
        }
        grads.add_relation(steps[k].row(), &dg, 1.0);
        dh = dh_prev;
    }
    // h_1 = g_1: the remaining gradient lands on the first relation row.
    grads.add_relation(steps[0].row(), &dh, 1.0);
}

/// Loss and subgradients of one path-ranking instance:
/// `sum_{r'} max{0, 1 - (w2-w1)'r + (w2-w1)'r'}`.
///
/// Gradients flow into both word rows of the target matrix, the relation
/// rows of the true and corrupted paths, and the composer. Every negative
/// must have the same hop count as the true path.
pub fn path_loss_and_grads(
    triple: &Triple,
    negatives: &[DepPath],
    params: &ModelParams,
) -> Result<(f64, SparseGrads)> {
    if negatives.is_empty() {
        return Err(Error::invalid("need at least one negative path"));
    }
    for neg in negatives {
        if neg.len() != triple.path.len() {
            return Err(Error::invalid(format!(
                "negative path has {} hops, expected {}",
                neg.len(),
                triple.path.len()
            )));
        }
    }
    let n_rows = params.target_words.n_rows();
    if triple.w1.index() >= n_rows || triple.w2.index() >= n_rows {
        return Err(Error::invalid("word id outside the embedding matrix"));
    }
    let w1 = params.target_words.row(triple.w1.index());
    let w2 = params.target_words.row(triple.w2.index());
    let diff: Vec<f64> = w2.iter().zip(w1).map(|(a, b)| a - b).collect();

    let pos_trace = compose_with_trace(&triple.path, params)?;
    let r = pos_trace.hidden.last().expect("non-empty path");
    let pos_score = dot(&diff, r);

    let mut grads = SparseGrads::default();
    let mut loss = 0.0;
    let mut active = 0usize;
    let mut dw2 = vec![0.0; params.dim()];
    for neg in negatives {
        let neg_trace = compose_with_trace(neg, params)?;
        let r_neg = neg_trace.hidden.last().expect("non-empty path");
        let margin = 1.0 - pos_score + dot(&diff, r_neg);
        if margin <= 0.0 {
            continue;
        }
        loss += margin;
        active += 1;
        for ((acc, &rn), &rp) in dw2.iter_mut().zip(r_neg.iter()).zip(r.iter()) {
            *acc += rn - rp;
        }
        // d margin / d r_neg = diff.
        backprop_path(neg, &neg_trace, &diff, params, &mut grads);
    }
    if active > 0 {
        grads.add_target(triple.w2, &dw2, 1.0);
        grads.add_target(triple.w1, &dw2, -1.0);
        // d loss / d r = -active * diff.
        let upstream: Vec<f64> = diff.iter().map(|&x| -(active as f64) * x).collect();
        backprop_path(&triple.path, &pos_trace, &upstream, params, &mut grads);
    }
    Ok((loss, grads))
}

/// Loss and subgradients of one linear-context instance:
/// `sum_{c'} max{0, 1 - w'c + w'c'}` with the target row for `w` and
/// context rows for `c`, `c'`.
pub fn context_loss_and_grads(
    pair: &ContextPair,
    negatives: &[WordId],
    params: &ModelParams,
) -> Result<(f64, SparseGrads)> {
    if negatives.is_empty() {
        return Err(Error::invalid("need at least one negative word"));
    }
    if negatives.contains(&pair.context) {
        return Err(Error::invalid("negative equals the true context word"));
    }
    let n_rows = params.target_words.n_rows();
    if pair.target.index() >= n_rows
        || pair.context.index() >= n_rows
        || negatives.iter().any(|w| w.index() >= n_rows)
    {
        return Err(Error::invalid("word id outside the embedding matrix"));
    }
    let w = params.target_words.row(pair.target.index());
    let c = params.context_words.row(pair.context.index());
    let pos_score = dot(w, c);

    let mut grads = SparseGrads::default();
    let mut loss = 0.0;
    let mut dw = vec![0.0; params.dim()];
    let mut active = 0usize;
    for &neg in negatives {
        let c_neg = params.context_words.row(neg.index());
        let margin = 1.0 - pos_score + dot(w, c_neg);
        if margin <= 0.0 {
            continue;
        }
        loss += margin;
        active += 1;
        for ((acc, &cn), &cp) in dw.iter_mut().zip(c_neg.iter()).zip(c.iter()) {
            *acc += cn - cp;
        }
        grads.add_context(neg, w, 1.0);
    }
    if active > 0 {
        grads.add_target(pair.target, &dw, 1.0);
        grads.add_context(pair.context, w, -(active as f64));
    }
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, Vocabulary};
    use crate::deptree::{DepPath, Direction, DirectedRelation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_vocab() -> Vocabulary {
        let s = super::super::tests::toy_sentence();
        build_vocab(std::slice::from_ref(&s), 1).unwrap()
    }

    fn random_params<R: Rng>(vocab: &Vocabulary, d: usize, rng: &mut R) -> ModelParams {
        let mut params = ModelParams::init(vocab, d, 0);
        for v in params.target_words.data_mut().iter_mut().skip(d) {
            *v = rng.random_range(-0.5..=0.5);
        }
        for v in params.context_words.data_mut().iter_mut().skip(d) {
            *v = rng.random_range(-0.5..=0.5);
        }
        for v in params.relations.data_mut() {
            *v = rng.random_range(-0.5..=0.5);
        }
        for v in params.composer.data_mut() {
            *v = rng.random_range(-0.5..=0.5);
        }
        params
    }

    fn random_path<R: Rng>(vocab: &Vocabulary, hops: usize, rng: &mut R) -> DepPath {
        let steps = (0..hops)
            .map(|_| {
                DirectedRelation::new(
                    crate::corpus::RelId(rng.random_range(0..vocab.n_relations() as u32)),
                    if rng.random_bool(0.5) {
                        Direction::TowardHead
                    } else {
                        Direction::TowardDependent
                    },
                )
            })
            .collect();
        DepPath::new(steps).unwrap()
    }

    /// All (matrix kind, row) coordinates an instance can touch.
    enum Slot {
        Target(usize),
        Context(usize),
        Relation(usize),
        Composer,
    }

    fn perturbed(params: &ModelParams, slot: &Slot, col: usize, eps: f64) -> ModelParams {
        let mut p = params.clone();
        match slot {
            Slot::Target(row) => p.target_words.row_mut(*row)[col] += eps,
            Slot::Context(row) => p.context_words.row_mut(*row)[col] += eps,
            Slot::Relation(row) => p.relations.row_mut(*row)[col] += eps,
            Slot::Composer => p.composer.data_mut()[col] += eps,
        }
        p
    }

    fn grad_entry(grads: &SparseGrads, slot: &Slot, col: usize) -> f64 {
        match slot {
            Slot::Target(row) => grads.target.get(row).map_or(0.0, |g| g[col]),
            Slot::Context(row) => grads.context.get(row).map_or(0.0, |g| g[col]),
            Slot::Relation(row) => grads.relations.get(row).map_or(0.0, |g| g[col]),
            Slot::Composer => grads.composer.as_ref().map_or(0.0, |g| g.data()[col]),
        }
    }

    /// Central finite differences against the analytic gradient over the
    /// instance's full support. `loss_fn` must be a pure function of the
    /// parameters.
    fn check_instance<F>(params: &ModelParams, slots: &[Slot], loss_fn: F, grads: &SparseGrads)
    where
        F: Fn(&ModelParams) -> f64,
    {
        let eps = 1e-5;
        for slot in slots {
            let width = match slot {
                Slot::Composer => params.composer.data().len(),
                _ => params.dim(),
            };
            for col in 0..width {
                let up = loss_fn(&perturbed(params, slot, col, eps));
                let down = loss_fn(&perturbed(params, slot, col, -eps));
                let fd = (up - down) / (2.0 * eps);
                let analytic = grad_entry(grads, slot, col);
                let denom = fd.abs().max(analytic.abs()).max(1.0);
                assert!(
                    (fd - analytic).abs() / denom < 1e-4,
                    "finite difference {fd} vs analytic {analytic}"
                );
            }
        }
    }

    /// Margins or pre-activations too close to a hinge/clamp boundary make
    /// finite differences straddle the kink; such instances are resampled.
    fn path_instance_near_boundary(
        triple: &Triple,
        negatives: &[DepPath],
        params: &ModelParams,
        tol: f64,
    ) -> bool {
        let w1 = params.target_words.row(triple.w1.index());
        let w2 = params.target_words.row(triple.w2.index());
        let diff: Vec<f64> = w2.iter().zip(w1).map(|(a, b)| a - b).collect();
        let mut all_pre = Vec::new();
        let pos = compose_with_trace(&triple.path, params).unwrap();
        all_pre.extend(pos.pre.iter().flatten().copied());
        let pos_score = dot(&diff, pos.hidden.last().unwrap());
        for neg in negatives {
            let tr = compose_with_trace(neg, params).unwrap();
            all_pre.extend(tr.pre.iter().flatten().copied());
            let margin = 1.0 - pos_score + dot(&diff, tr.hidden.last().unwrap());
            if margin.abs() < tol {
                return true;
            }
        }
        all_pre.iter().any(|z| (z.abs() - 1.0).abs() < tol)
    }

    #[test]
    fn path_gradients_match_finite_differences() {
        let vocab = toy_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for dims in [3usize, 5, 10] {
            let mut checked = 0;
            while checked < 34 {
                let params = random_params(&vocab, dims, &mut rng);
                let hops = rng.random_range(1..=3);
                let w1 = crate::corpus::WordId(rng.random_range(1..vocab.n_words() as u32));
                let mut w2 = crate::corpus::WordId(rng.random_range(1..vocab.n_words() as u32));
                while w2 == w1 {
                    w2 = crate::corpus::WordId(rng.random_range(1..vocab.n_words() as u32));
                }
                let triple = Triple {
                    w1,
                    w2,
                    path: random_path(&vocab, hops, &mut rng),
                };
                let negatives: Vec<DepPath> = (0..rng.random_range(1..=3))
                    .map(|_| random_path(&vocab, hops, &mut rng))
                    .collect();
                if path_instance_near_boundary(&triple, &negatives, &params, 1e-3) {
                    continue;
                }
                let (_, grads) = path_loss_and_grads(&triple, &negatives, &params).unwrap();
                let mut slots = vec![Slot::Target(w1.index()), Slot::Target(w2.index()), Slot::Composer];
                for p in std::iter::once(&triple.path).chain(&negatives) {
                    for step in p.steps() {
                        slots.push(Slot::Relation(step.row()));
                    }
                }
                check_instance(
                    &params,
                    &slots,
                    |p| path_loss_and_grads(&triple, &negatives, p).unwrap().0,
                    &grads,
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn context_gradients_match_finite_differences() {
        let vocab = toy_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for dims in [3usize, 5, 10] {
            let mut checked = 0;
            while checked < 34 {
                let params = random_params(&vocab, dims, &mut rng);
                let n = vocab.n_words() as u32;
                let target = crate::corpus::WordId(rng.random_range(1..n));
                let context = crate::corpus::WordId(rng.random_range(1..n));
                let negatives: Vec<WordId> = (0..rng.random_range(1..=5))
                    .map(|_| {
                        let mut w = crate::corpus::WordId(rng.random_range(1..n));
                        while w == context {
                            w = crate::corpus::WordId(rng.random_range(1..n));
                        }
                        w
                    })
                    .collect();
                let pair = ContextPair { target, context };
                // Resample boundary-adjacent instances.
                let w = params.target_words.row(target.index());
                let c = params.context_words.row(context.index());
                let near = negatives.iter().any(|&neg| {
                    let m = 1.0 - dot(w, c) + dot(w, params.context_words.row(neg.index()));
                    m.abs() < 1e-3
                });
                if near {
                    continue;
                }
                let (_, grads) = context_loss_and_grads(&pair, &negatives, &params).unwrap();
                let mut slots = vec![Slot::Target(target.index()), Slot::Context(context.index())];
                for neg in &negatives {
                    slots.push(Slot::Context(neg.index()));
                }
                check_instance(
                    &params,
                    &slots,
                    |p| context_loss_and_grads(&pair, &negatives, p).unwrap().0,
                    &grads,
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn satisfied_margin_contributes_nothing() {
        let vocab = toy_vocab();
        let d = 3;
        let mut params = ModelParams::init(&vocab, d, 0);
        // w2 - w1 = (1, 0, 0); true path row scores 2, negative scores -1,
        // so the slack is 1 - 2 + (-1) = -2 < 0.
        params.target_words.row_mut(1).copy_from_slice(&[0.0, 0.0, 0.0]);
        params.target_words.row_mut(2).copy_from_slice(&[1.0, 0.0, 0.0]);
        params.relations.row_mut(0).copy_from_slice(&[2.0, 0.0, 0.0]);
        params.relations.row_mut(2).copy_from_slice(&[-1.0, 0.0, 0.0]);
        let triple = Triple {
            w1: crate::corpus::WordId(1),
            w2: crate::corpus::WordId(2),
            path: DepPath::new(vec![DirectedRelation::new(crate::corpus::RelId(0), Direction::TowardHead)]).unwrap(),
        };
        let neg = DepPath::new(vec![DirectedRelation::new(crate::corpus::RelId(1), Direction::TowardHead)]).unwrap();
        let (loss, grads) = path_loss_and_grads(&triple, &[neg], &params).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.target.is_empty() && grads.relations.is_empty() && grads.composer.is_none());
    }

    #[test]
    fn identical_words_force_unit_losses_with_flat_path_gradient() {
        let vocab = toy_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = random_params(&vocab, 4, &mut rng);
        let w = crate::corpus::WordId(2);
        let triple = Triple {
            w1: w,
            w2: w,
            path: random_path(&vocab, 1, &mut rng),
        };
        let negs = vec![random_path(&vocab, 1, &mut rng), random_path(&vocab, 1, &mut rng)];
        let (loss, grads) = path_loss_and_grads(&triple, &negs, &params).unwrap();
        assert!((loss - 2.0).abs() < 1e-12, "k terms of exactly 1");
        // diff = 0, so nothing reaches the relation rows.
        for g in grads.relations.values() {
            assert!(g.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn zero_target_word_context_loss_and_gradient_shape() {
        let vocab = toy_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut params = random_params(&vocab, 3, &mut rng);
        let target = crate::corpus::WordId(1);
        params.target_words.row_mut(1).copy_from_slice(&[0.0, 0.0, 0.0]);
        let context = crate::corpus::WordId(2);
        let negatives = [crate::corpus::WordId(3), crate::corpus::WordId(4)];
        let (loss, grads) = context_loss_and_grads(
            &ContextPair { target, context },
            &negatives,
            &params,
        )
        .unwrap();
        assert!((loss - 2.0).abs() < 1e-12);
        // Gradient into c and c' is +-w = 0; gradient into w sums c' - c.
        for (row, g) in &grads.context {
            assert!(g.iter().all(|&x| x == 0.0), "row {row}");
        }
        let dw = &grads.target[&target.index()];
        let expect: Vec<f64> = (0..3)
            .map(|col| {
                params.context_words.row(3)[col] + params.context_words.row(4)[col]
                    - 2.0 * params.context_words.row(2)[col]
            })
            .collect();
        for (a, b) in dw.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hop_mismatch_is_rejected() {
        let vocab = toy_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = random_params(&vocab, 3, &mut rng);
        let triple = Triple {
            w1: crate::corpus::WordId(1),
            w2: crate::corpus::WordId(2),
            path: random_path(&vocab, 2, &mut rng),
        };
        let neg = random_path(&vocab, 1, &mut rng);
        assert!(path_loss_and_grads(&triple, &[neg], &params).is_err());
    }

    #[test]
    fn sgd_step_decreases_an_active_term() {
        let vocab = toy_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let params = random_params(&vocab, 5, &mut rng);
            let triple = Triple {
                w1: crate::corpus::WordId(1),
                w2: crate::corpus::WordId(2),
                path: random_path(&vocab, 2, &mut rng),
            };
            let negs = vec![random_path(&vocab, 2, &mut rng)];
            let (loss, grads) = path_loss_and_grads(&triple, &negs, &params).unwrap();
            if loss == 0.0 {
                continue;
            }
            // lr = 0 leaves everything unchanged.
            let mut frozen = params.clone();
            grads.apply(&mut frozen, 0.0);
            assert_eq!(frozen, params);
            let mut stepped = params.clone();
            grads.apply(&mut stepped, 1e-6);
            let (after, _) = path_loss_and_grads(&triple, &negs, &stepped).unwrap();
            assert!(after < loss, "{after} !< {loss}");
        }
    }
}
