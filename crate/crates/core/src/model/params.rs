//! Learnable parameter storage, generic over the cell type so the same tree
//! describes concrete tensors and their tape bindings.

use super::config::ModelConfig;
use crate::nn::{Real, Tape, Tensor, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct NormP<C> {
    pub gain: C,
    pub bias: C,
}

#[derive(Debug, Clone)]
pub struct AttnP<C> {
    pub wq: C,
    pub wk: C,
    pub wv: C,
    pub wo: C,
}

#[derive(Debug, Clone)]
pub struct FfnP<C> {
    pub w1: C,
    pub b1: C,
    pub w2: C,
    pub b2: C,
}

#[derive(Debug, Clone)]
pub struct EncLayerP<C> {
    pub ln1: NormP<C>,
    pub attn: AttnP<C>,
    pub ln2: NormP<C>,
    pub ffn: FfnP<C>,
}

#[derive(Debug, Clone)]
pub struct DecLayerP<C> {
    pub ln1: NormP<C>,
    pub self_attn: AttnP<C>,
    pub ln2: NormP<C>,
    pub cross_attn: AttnP<C>,
    pub ln3: NormP<C>,
    pub ffn: FfnP<C>,
}

/// Per-layer, per-site prefix matrices P_k, P_v (each m×d, split across
/// heads at use).
#[derive(Debug, Clone)]
pub struct PrefixPairP<C> {
    pub pk: C,
    pub pv: C,
}

#[derive(Debug, Clone)]
pub struct PrefixBankP<C> {
    pub enc_self: Vec<PrefixPairP<C>>,
    pub dec_self: Vec<PrefixPairP<C>>,
    pub cross: Vec<PrefixPairP<C>>,
}

#[derive(Debug, Clone)]
pub struct ParamTree<C> {
    pub tok_emb: C,
    pub pos_emb: C,
    pub enc: Vec<EncLayerP<C>>,
    pub dec: Vec<DecLayerP<C>>,
    pub enc_ln: NormP<C>,
    pub dec_ln: NormP<C>,
    pub out_w: C,
    pub out_b: C,
    pub prefixes: PrefixBankP<C>,
}

/// All learnable arrays plus the shape-defining configuration.
#[derive(Debug, Clone)]
pub struct Parameters<T: Real> {
    pub config: ModelConfig,
    pub tree: ParamTree<Tensor<T>>,
}

/// The parameter tree bound onto a tape as autodiff leaves.
pub type BoundParams = ParamTree<Var>;

impl<C> ParamTree<C> {
    pub fn map<D>(&self, f: &mut impl FnMut(&C) -> D) -> ParamTree<D> {
        let norm = |n: &NormP<C>, f: &mut dyn FnMut(&C) -> D| NormP {
            gain: f(&n.gain),
            bias: f(&n.bias),
        };
        let attn = |a: &AttnP<C>, f: &mut dyn FnMut(&C) -> D| AttnP {
            wq: f(&a.wq),
            wk: f(&a.wk),
            wv: f(&a.wv),
            wo: f(&a.wo),
        };
        let ffn = |x: &FfnP<C>, f: &mut dyn FnMut(&C) -> D| FfnP {
            w1: f(&x.w1),
            b1: f(&x.b1),
            w2: f(&x.w2),
            b2: f(&x.b2),
        };
        ParamTree {
            tok_emb: f(&self.tok_emb),
            pos_emb: f(&self.pos_emb),
            enc: self
                .enc
                .iter()
                .map(|l| EncLayerP {
                    ln1: norm(&l.ln1, f),
                    attn: attn(&l.attn, f),
                    ln2: norm(&l.ln2, f),
                    ffn: ffn(&l.ffn, f),
                })
                .collect(),
            dec: self
                .dec
                .iter()
                .map(|l| DecLayerP {
                    ln1: norm(&l.ln1, f),
                    self_attn: attn(&l.self_attn, f),
                    ln2: norm(&l.ln2, f),
                    cross_attn: attn(&l.cross_attn, f),
                    ln3: norm(&l.ln3, f),
                    ffn: ffn(&l.ffn, f),
                })
                .collect(),
            enc_ln: norm(&self.enc_ln, f),
            dec_ln: norm(&self.dec_ln, f),
            out_w: f(&self.out_w),
            out_b: f(&self.out_b),
            prefixes: PrefixBankP {
                enc_self: self
                    .prefixes
                    .enc_self
                    .iter()
                    .map(|p| PrefixPairP {
                        pk: f(&p.pk),
                        pv: f(&p.pv),
                    })
                    .collect(),
                dec_self: self
                    .prefixes
                    .dec_self
                    .iter()
                    .map(|p| PrefixPairP {
                        pk: f(&p.pk),
                        pv: f(&p.pv),
                    })
                    .collect(),
                cross: self
                    .prefixes
                    .cross
                    .iter()
                    .map(|p| PrefixPairP {
                        pk: f(&p.pk),
                        pv: f(&p.pv),
                    })
                    .collect(),
            },
        }
    }

    /// Visit every cell with its stable dotted name, in a fixed order shared
    /// by checkpoints, gradients and optimizers.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(String, &'a C)) {
        f("tok_emb".into(), &self.tok_emb);
        f("pos_emb".into(), &self.pos_emb);
        for (i, l) in self.enc.iter().enumerate() {
            let p = format!("enc.{i}");
            f(format!("{p}.ln1.gain"), &l.ln1.gain);
            f(format!("{p}.ln1.bias"), &l.ln1.bias);
            f(format!("{p}.attn.wq"), &l.attn.wq);
            f(format!("{p}.attn.wk"), &l.attn.wk);
            f(format!("{p}.attn.wv"), &l.attn.wv);
            f(format!("{p}.attn.wo"), &l.attn.wo);
            f(format!("{p}.ln2.gain"), &l.ln2.gain);
            f(format!("{p}.ln2.bias"), &l.ln2.bias);
            f(format!("{p}.ffn.w1"), &l.ffn.w1);
            f(format!("{p}.ffn.b1"), &l.ffn.b1);
            f(format!("{p}.ffn.w2"), &l.ffn.w2);
            f(format!("{p}.ffn.b2"), &l.ffn.b2);
        }
        for (i, l) in self.dec.iter().enumerate() {
            let p = format!("dec.{i}");
            f(format!("{p}.ln1.gain"), &l.ln1.gain);
            f(format!("{p}.ln1.bias"), &l.ln1.bias);
            f(format!("{p}.self_attn.wq"), &l.self_attn.wq);
            f(format!("{p}.self_attn.wk"), &l.self_attn.wk);
            f(format!("{p}.self_attn.wv"), &l.self_attn.wv);
            f(format!("{p}.self_attn.wo"), &l.self_attn.wo);
            f(format!("{p}.ln2.gain"), &l.ln2.gain);
            f(format!("{p}.ln2.bias"), &l.ln2.bias);
            f(format!("{p}.cross_attn.wq"), &l.cross_attn.wq);
            f(format!("{p}.cross_attn.wk"), &l.cross_attn.wk);
            f(format!("{p}.cross_attn.wv"), &l.cross_attn.wv);
            f(format!("{p}.cross_attn.wo"), &l.cross_attn.wo);
            f(format!("{p}.ln3.gain"), &l.ln3.gain);
            f(format!("{p}.ln3.bias"), &l.ln3.bias);
            f(format!("{p}.ffn.w1"), &l.ffn.w1);
            f(format!("{p}.ffn.b1"), &l.ffn.b1);
            f(format!("{p}.ffn.w2"), &l.ffn.w2);
            f(format!("{p}.ffn.b2"), &l.ffn.b2);
        }
        f("enc_ln.gain".into(), &self.enc_ln.gain);
        f("enc_ln.bias".into(), &self.enc_ln.bias);
        f("dec_ln.gain".into(), &self.dec_ln.gain);
        f("dec_ln.bias".into(), &self.dec_ln.bias);
        f("out_w".into(), &self.out_w);
        f("out_b".into(), &self.out_b);
        for (site, pairs) in [
            ("enc_self", &self.prefixes.enc_self),
            ("dec_self", &self.prefixes.dec_self),
            ("cross", &self.prefixes.cross),
        ] {
            for (i, pair) in pairs.iter().enumerate() {
                f(format!("prefixes.{site}.{i}.pk"), &pair.pk);
                f(format!("prefixes.{site}.{i}.pv"), &pair.pv);
            }
        }
    }

    pub fn flat(&self) -> Vec<(String, &C)> {
        let mut out = Vec::new();
        self.visit(&mut |name, c| out.push((name, c)));
        out
    }

    /// Mutable cells in exactly the `visit` order (no names; zip against a
    /// `flat()`-aligned list when names are needed).
    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut C)) {
        f(&mut self.tok_emb);
        f(&mut self.pos_emb);
        for l in self.enc.iter_mut() {
            f(&mut l.ln1.gain);
            f(&mut l.ln1.bias);
            f(&mut l.attn.wq);
            f(&mut l.attn.wk);
            f(&mut l.attn.wv);
            f(&mut l.attn.wo);
            f(&mut l.ln2.gain);
            f(&mut l.ln2.bias);
            f(&mut l.ffn.w1);
            f(&mut l.ffn.b1);
            f(&mut l.ffn.w2);
            f(&mut l.ffn.b2);
        }
        for l in self.dec.iter_mut() {
            f(&mut l.ln1.gain);
            f(&mut l.ln1.bias);
            f(&mut l.self_attn.wq);
            f(&mut l.self_attn.wk);
            f(&mut l.self_attn.wv);
            f(&mut l.self_attn.wo);
            f(&mut l.ln2.gain);
            f(&mut l.ln2.bias);
            f(&mut l.cross_attn.wq);
            f(&mut l.cross_attn.wk);
            f(&mut l.cross_attn.wv);
            f(&mut l.cross_attn.wo);
            f(&mut l.ln3.gain);
            f(&mut l.ln3.bias);
            f(&mut l.ffn.w1);
            f(&mut l.ffn.b1);
            f(&mut l.ffn.w2);
            f(&mut l.ffn.b2);
        }
        f(&mut self.enc_ln.gain);
        f(&mut self.enc_ln.bias);
        f(&mut self.dec_ln.gain);
        f(&mut self.dec_ln.bias);
        f(&mut self.out_w);
        f(&mut self.out_b);
        for pairs in [
            &mut self.prefixes.enc_self,
            &mut self.prefixes.dec_self,
            &mut self.prefixes.cross,
        ] {
            for pair in pairs.iter_mut() {
                f(&mut pair.pk);
                f(&mut pair.pv);
            }
        }
    }
}

impl<T: Real> Parameters<T> {
    /// Deterministic initialization from a seed: Xavier-uniform matrices,
    /// zero biases, unit norm gains.
    pub fn init(config: ModelConfig, rng: &mut ChaCha8Rng) -> Parameters<T> {
        config.validate().expect("valid config");
        let d = config.d;
        let m = config.prefix_len;
        let xavier = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| -> Tensor<T> {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| T::from_f64(rng.gen_range(-a..=a)))
                .collect();
            Tensor::from_vec(rows, cols, data)
        };
        let small = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| -> Tensor<T> {
            let data = (0..rows * cols)
                .map(|_| T::from_f64(rng.gen_range(-0.02..=0.02)))
                .collect();
            Tensor::from_vec(rows, cols, data)
        };
        let norm = |_rng: &mut ChaCha8Rng| NormP {
            gain: Tensor::from_vec(1, d, vec![T::ONE; d]),
            bias: Tensor::zeros(1, d),
        };
        let attn = |rng: &mut ChaCha8Rng| AttnP {
            wq: xavier(rng, d, d),
            wk: xavier(rng, d, d),
            wv: xavier(rng, d, d),
            wo: xavier(rng, d, d),
        };
        let ffn = |rng: &mut ChaCha8Rng| FfnP {
            w1: xavier(rng, d, config.ffn),
            b1: Tensor::zeros(1, config.ffn),
            w2: xavier(rng, config.ffn, d),
            b2: Tensor::zeros(1, d),
        };
        let pair = |rng: &mut ChaCha8Rng| PrefixPairP {
            pk: xavier(rng, m, d),
            pv: xavier(rng, m, d),
        };
        // learned positional embeddings, sinusoid-initialized so encoder and
        // decoder positions align from the first step
        let pos_emb = {
            let mut t = Tensor::zeros(config.max_len, d);
            for p in 0..config.max_len {
                let row = t.row_mut(p);
                for i in 0..d / 2 {
                    let freq = 1.0 / 10000f64.powf(2.0 * i as f64 / d as f64);
                    let angle = p as f64 * freq;
                    row[2 * i] = T::from_f64(angle.sin());
                    row[2 * i + 1] = T::from_f64(angle.cos());
                }
            }
            t.scale_assign(T::from_f64(0.1));
            t
        };
        let tree = ParamTree {
            tok_emb: small(rng, config.vocab, d),
            pos_emb,
            enc: (0..config.enc_layers)
                .map(|_| EncLayerP {
                    ln1: norm(rng),
                    attn: attn(rng),
                    ln2: norm(rng),
                    ffn: ffn(rng),
                })
                .collect(),
            dec: (0..config.dec_layers)
                .map(|_| DecLayerP {
                    ln1: norm(rng),
                    self_attn: attn(rng),
                    ln2: norm(rng),
                    cross_attn: attn(rng),
                    ln3: norm(rng),
                    ffn: ffn(rng),
                })
                .collect(),
            enc_ln: norm(rng),
            dec_ln: norm(rng),
            out_w: xavier(rng, d, config.vocab),
            out_b: Tensor::zeros(1, config.vocab),
            prefixes: PrefixBankP {
                enc_self: (0..config.enc_layers).map(|_| pair(rng)).collect(),
                dec_self: (0..config.dec_layers).map(|_| pair(rng)).collect(),
                cross: (0..config.dec_layers).map(|_| pair(rng)).collect(),
            },
        };
        Parameters { config, tree }
    }

    /// Bind every tensor as a tape leaf, preserving structure.
    pub fn bind(&self, tape: &mut Tape<T>) -> BoundParams {
        self.tree.map(&mut |t: &Tensor<T>| tape.input(t.clone()))
    }

    pub fn cast<U: Real>(&self) -> Parameters<U> {
        Parameters {
            config: self.config.clone(),
            tree: self.tree.map(&mut |t: &Tensor<T>| t.cast::<U>()),
        }
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.tree.visit(&mut |_, t| ok &= t.all_finite());
        ok
    }

    pub fn total_len(&self) -> usize {
        let mut n = 0;
        self.tree.visit(&mut |_, t| n += t.len());
        n
    }
}
