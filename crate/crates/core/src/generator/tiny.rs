//! A small explicit-parameter autoregressive policy over a closed word
//! vocabulary, with exact log-likelihood gradients.
//!
//! For previous token `prev` and input tokens `x_1..x_m`:
//!
//! ```text
//! h      = E[prev] + mean_j E[x_j]
//! logit  = O h + b
//! p      = softmax(logit / temperature)   (BOS always masked, EOS masked before min_len)
//! ```

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::{Layer, Parameters};
use super::{Candidate, Decoding, Policy, TokenId};
use crate::error::{Error, Result};
use crate::text::fnv1a;

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
pub const UNK: TokenId = 2;
const SPECIALS: [&str; 3] = ["<s>", "</s>", "<unk>"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let mut v = Vocabulary {
            tokens,
            index: HashMap::new(),
        };
        v.reindex();
        v
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    /// Special tokens first, then `words` in order, deduplicated.
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        for w in words {
            let w = w.into();
            if !tokens.contains(&w) {
                tokens.push(w);
            }
        }
        let mut v = Vocabulary {
            tokens,
            index: HashMap::new(),
        };
        v.reindex();
        v
    }

    /// The `max_words` most frequent whitespace tokens (ties by string).
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>, max_words: usize) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in texts {
            for w in t.split_whitespace() {
                *counts.entry(w).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Vocabulary::new(ranked.into_iter().take(max_words).map(|(w, _)| w))
    }

    fn reindex(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn id(&self, word: &str) -> Option<TokenId> {
        self.index.get(word).copied()
    }

    pub fn tokenizer_id(&self) -> String {
        format!("ws-{:016x}", fnv1a(self.tokens.join("\u{1f}").as_bytes()))
    }

    /// Unknown words map to `<unk>`.
    pub fn encode_input(&self, text: &str) -> Vec<TokenId> {
        text.split_whitespace()
            .map(|w| self.id(w).unwrap_or(UNK))
            .collect()
    }

    pub fn encode_strict(&self, text: &str) -> Result<Vec<TokenId>> {
        text.split_whitespace()
            .map(|w| {
                self.id(w).ok_or_else(|| Error::UnknownToken {
                    backend_id: self.tokenizer_id(),
                    token: w.to_string(),
                })
            })
            .collect()
    }

    /// Space-joined tokens, skipping BOS and EOS.
    pub fn decode(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .filter(|&&i| i != BOS && i != EOS)
            .filter_map(|&i| self.token(i))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TinyPolicyConfig {
    pub dim: usize,
    /// Parameters start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for TinyPolicyConfig {
    fn default() -> Self {
        TinyPolicyConfig {
            dim: 1024,
            init_scale: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyPolicy {
    vocab: Vocabulary,
    config: TinyPolicyConfig,
    decoding: Decoding,
    params: Parameters,
    version: u64,
}

const EMBED: usize = 0;
const OUTPUT: usize = 1;
const BIAS: usize = 2;

struct Step {
    hidden: Vec<f64>,
    logp: Vec<f64>,
}

impl TinyPolicy {
    pub fn new(vocab: Vocabulary, config: TinyPolicyConfig, decoding: Decoding) -> Self {
        let v = vocab.len();
        let d = config.dim.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut init = |name: &str, shape: Vec<usize>, scale: f64| {
            let mut l = Layer::zeros(name, shape);
            l.values
                .iter_mut()
                .for_each(|x| *x = scale * rng.gen_range(-1.0..1.0));
            l
        };
        let params = Parameters {
            layers: vec![
                init("embed", vec![v, d], config.init_scale),
                init("output", vec![v, d], config.init_scale),
                init("bias", vec![v], 0.0),
            ],
        };
        TinyPolicy {
            vocab,
            config,
            decoding,
            params,
            version: 0,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &TinyPolicyConfig {
        &self.config
    }

    fn dim(&self) -> usize {
        self.config.dim.max(1)
    }

    fn row(&self, layer: usize, r: usize) -> &[f64] {
        let d = self.dim();
        &self.params.layers[layer].values[r * d..(r + 1) * d]
    }

    fn context(&self, x_ids: &[TokenId]) -> Vec<f64> {
        let mut ctx = vec![0.0; self.dim()];
        if x_ids.is_empty() {
            return ctx;
        }
        let w = 1.0 / x_ids.len() as f64;
        for &id in x_ids {
            for (c, e) in ctx.iter_mut().zip(self.row(EMBED, id)) {
                *c += w * e;
            }
        }
        ctx
    }

    fn step(&self, ctx: &[f64], prev: TokenId, pos: usize) -> Step {
        let temp = self.decoding.scoring_temperature();
        let hidden: Vec<f64> = ctx.iter().zip(self.row(EMBED, prev)).map(|(a, b)| a + b).collect();
        let bias = &self.params.layers[BIAS].values;
        let mut logits: Vec<f64> = (0..self.vocab.len())
            .map(|v| {
                let dot: f64 = self.row(OUTPUT, v).iter().zip(&hidden).map(|(o, h)| o * h).sum();
                (dot + bias[v]) / temp
            })
            .collect();
        logits[BOS] = f64::NEG_INFINITY;
        if pos < self.decoding.min_len {
            logits[EOS] = f64::NEG_INFINITY;
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        let logp = logits.into_iter().map(|l| l - lse).collect();
        Step { hidden, logp }
    }

    fn pick(&self, logp: &[f64], rng: &mut dyn RngCore) -> TokenId {
        let argmax = || {
            logp.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &l)| if l > best.1 { (i, l) } else { best })
                .0
        };
        if self.decoding.temperature <= 0.0 {
            return argmax();
        }
        let mut order: Vec<TokenId> = (0..logp.len()).filter(|&i| logp[i].is_finite()).collect();
        order.sort_by(|&a, &b| logp[b].total_cmp(&logp[a]).then(a.cmp(&b)));
        let mut kept = Vec::new();
        let mut mass = 0.0;
        for &i in &order {
            kept.push(i);
            mass += logp[i].exp();
            if mass >= self.decoding.top_p {
                break;
            }
        }
        let mut u = rng.gen::<f64>() * mass;
        for &i in &kept {
            u -= logp[i].exp();
            if u <= 0.0 {
                return i;
            }
        }
        *kept.last().unwrap_or(&EOS)
    }

    fn check_tokens(&self, tokens: &[TokenId]) -> Result<()> {
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.vocab.len()) {
            return Err(Error::UnknownToken {
                backend_id: self.vocab.tokenizer_id(),
                token: format!("#{bad}"),
            });
        }
        Ok(())
    }
}

impl Policy for TinyPolicy {
    fn backend_id(&self) -> &str {
        "tiny-bilinear"
    }

    fn tokenizer_id(&self) -> String {
        self.vocab.tokenizer_id()
    }

    fn version(&self) -> u64 {
        self.version
    }

    fn decoding(&self) -> &Decoding {
        &self.decoding
    }

    fn set_decoding(&mut self, decoding: Decoding) {
        self.decoding = decoding;
    }

    fn sample(&self, x: &str, k: usize, rng: &mut dyn RngCore) -> Result<Vec<Candidate>> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        let x_ids = self.vocab.encode_input(x);
        let ctx = self.context(&x_ids);
        let max_len = self.decoding.max_len_for(x_ids.len()).max(1);
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let mut tokens = Vec::new();
            let mut token_logprobs = Vec::new();
            let mut prev = BOS;
            while tokens.len() < max_len {
                let step = self.step(&ctx, prev, tokens.len());
                let t = self.pick(&step.logp, rng);
                tokens.push(t);
                token_logprobs.push(step.logp[t]);
                if t == EOS {
                    break;
                }
                prev = t;
            }
            let text = self.vocab.decode(&tokens);
            out.push(Candidate {
                empty: text.is_empty(),
                hit_max_len: tokens.last() != Some(&EOS),
                tokens,
                text,
                token_logprobs,
            });
        }
        Ok(out)
    }

    fn score(&self, x: &str, tokens: &[TokenId]) -> Result<Vec<f64>> {
        self.check_tokens(tokens)?;
        let ctx = self.context(&self.vocab.encode_input(x));
        let mut prev = BOS;
        let mut out = Vec::with_capacity(tokens.len());
        for (pos, &t) in tokens.iter().enumerate() {
            let lp = self.step(&ctx, prev, pos).logp[t];
            if !lp.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "token {t} is masked at position {pos}"
                )));
            }
            out.push(lp);
            prev = t;
        }
        Ok(out)
    }

    fn encode_target(&self, text: &str) -> Result<Vec<TokenId>> {
        let mut ids = self.vocab.encode_strict(text)?;
        ids.push(EOS);
        Ok(ids)
    }

    fn parameters(&self) -> &Parameters {
        &self.params
    }

    fn accumulate_logprob_gradient(
        &self,
        x: &str,
        tokens: &[TokenId],
        weight: f64,
        grad: &mut Parameters,
    ) -> Result<()> {
        self.check_tokens(tokens)?;
        if weight == 0.0 || tokens.is_empty() {
            return Ok(());
        }
        let d = self.dim();
        let v = self.vocab.len();
        let temp = self.decoding.scoring_temperature();
        let x_ids = self.vocab.encode_input(x);
        let ctx = self.context(&x_ids);
        let mut d_ctx = vec![0.0; d];
        let mut prev = BOS;
        for (pos, &t) in tokens.iter().enumerate() {
            let step = self.step(&ctx, prev, pos);
            // d log p_t / d raw logit_u = (1[u = t] - p_u) / temperature
            let g: Vec<f64> = (0..v)
                .map(|u| {
                    let p = step.logp[u].exp();
                    let one = if u == t { 1.0 } else { 0.0 };
                    weight * (one - p) / temp
                })
                .collect();
            let mut d_hidden = vec![0.0; d];
            for (u, &gu) in g.iter().enumerate() {
                if gu == 0.0 {
                    continue;
                }
                grad.layers[BIAS].values[u] += gu;
                let o = self.row(OUTPUT, u);
                let go = &mut grad.layers[OUTPUT].values[u * d..(u + 1) * d];
                for i in 0..d {
                    go[i] += gu * step.hidden[i];
                    d_hidden[i] += gu * o[i];
                }
            }
            let ge = &mut grad.layers[EMBED].values[prev * d..(prev + 1) * d];
            for i in 0..d {
                ge[i] += d_hidden[i];
                d_ctx[i] += d_hidden[i];
            }
            prev = t;
        }
        if !x_ids.is_empty() {
            let w = 1.0 / x_ids.len() as f64;
            for &id in &x_ids {
                let ge = &mut grad.layers[EMBED].values[id * d..(id + 1) * d];
                for i in 0..d {
                    ge[i] += w * d_ctx[i];
                }
            }
        }
        Ok(())
    }

    fn update_parameters(&mut self, f: &mut dyn FnMut(&mut Parameters)) {
        f(&mut self.params);
        self.version += 1;
    }

    fn restore(&mut self, params: Parameters, version: u64) -> Result<()> {
        if !self.params.same_shape(&params) {
            return Err(Error::DimensionMismatch {
                left: self.params.len(),
                right: params.len(),
            });
        }
        self.params = params;
        self.version = version;
        Ok(())
    }
}
