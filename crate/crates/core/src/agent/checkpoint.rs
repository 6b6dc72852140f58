//! Versioned little-endian binary checkpoints.
//!
//! Layout: magic `CSCK`, format version, update count, current noise scale,
//! hyperparameters, then actor, critic, target actor and target critic.
//! Floats are stored as raw bits, so a round trip is bit-exact.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::ddpg::{DdpgAgent, Hyperparams};
use super::mlp::{Mlp, OutputActivation};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CSCK";
pub const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn net(&mut self, net: &Mlp) {
        self.0.push(match net.output_activation() {
            OutputActivation::Softmax => 0,
            OutputActivation::Identity => 1,
        });
        self.u32(net.layer_sizes().len() as u32);
        for &s in net.layer_sizes() {
            self.u64(s as u64);
        }
        for &p in net.params() {
            self.f64(p);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn truncated() -> Error {
    Error::Checkpoint("truncated data".into())
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).ok_or_else(truncated)?;
        let out = self.buf.get(self.pos..end).ok_or_else(truncated)?;
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("size overflows usize".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn net(&mut self) -> Result<Mlp> {
        let output = match self.u8()? {
            0 => OutputActivation::Softmax,
            1 => OutputActivation::Identity,
            k => return Err(Error::Checkpoint(format!("unknown output activation {k}"))),
        };
        let n_layers = self.u32()? as usize;
        if n_layers < 2 || n_layers > 64 {
            return Err(Error::Checkpoint(format!("implausible layer count {n_layers}")));
        }
        let sizes = (0..n_layers).map(|_| self.usize()).collect::<Result<Vec<_>>>()?;
        let mut n_params = 0usize;
        for w in sizes.windows(2) {
            n_params = w[0]
                .checked_mul(w[1])
                .and_then(|x| x.checked_add(w[1]))
                .and_then(|x| x.checked_add(n_params))
                .ok_or_else(|| Error::Checkpoint("parameter count overflows".into()))?;
        }
        if n_params > (self.buf.len() - self.pos) / 8 {
            return Err(truncated());
        }
        let params = (0..n_params).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Mlp::from_parts(sizes, output, params).map_err(|e| Error::Checkpoint(e.to_string()))
    }
}

pub fn encode(agent: &DdpgAgent) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    w.u64(agent.update_count());
    w.f64(agent.noise_scale());
    let hp = agent.hyperparams();
    for v in [hp.actor_lr, hp.critic_lr, hp.gamma, hp.tau, hp.noise_scale, hp.noise_decay] {
        w.f64(v);
    }
    w.u64(hp.batch_size as u64);
    w.u64(hp.buffer_capacity as u64);
    w.u32(hp.hidden.len() as u32);
    for &h in &hp.hidden {
        w.u64(h as u64);
    }
    let nets = agent.networks();
    for net in [&nets.actor, &nets.critic, &nets.target_actor, &nets.target_critic] {
        w.net(net);
    }
    w.0
}

/// Restores an agent. Optimizer moments and replay contents are not
/// stored; `seed` reseeds the replay sampler.
pub fn decode(bytes: &[u8], seed: u64) -> Result<DdpgAgent> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let update_count = r.u64()?;
    let noise = r.f64()?;
    let mut f = [0.0; 6];
    for v in &mut f {
        *v = r.f64()?;
    }
    let batch_size = r.usize()?;
    let buffer_capacity = r.usize()?;
    let n_hidden = r.u32()? as usize;
    if n_hidden > 62 {
        return Err(Error::Checkpoint(format!("implausible hidden layer count {n_hidden}")));
    }
    let hidden = (0..n_hidden).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
    let hp = Hyperparams {
        actor_lr: f[0],
        critic_lr: f[1],
        gamma: f[2],
        tau: f[3],
        noise_scale: f[4],
        noise_decay: f[5],
        batch_size,
        buffer_capacity,
        hidden,
    };
    let actor = r.net()?;
    let critic = r.net()?;
    let target_actor = r.net()?;
    let target_critic = r.net()?;
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    if actor.layer_sizes()[1..actor.layer_sizes().len() - 1] != hp.hidden[..] {
        return Err(Error::Checkpoint("hidden sizes disagree with the actor".into()));
    }
    DdpgAgent::from_networks(
        actor,
        critic,
        target_actor,
        target_critic,
        hp,
        update_count,
        noise,
        seed,
    )
    .map_err(|e| match e {
        Error::Checkpoint(_) => e,
        other => Error::Checkpoint(other.to_string()),
    })
}

pub fn save(agent: &DdpgAgent, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode(agent))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>, seed: u64) -> Result<DdpgAgent> {
    decode(&std::fs::read(path)?, seed)
}

/// SHA-256 over a network's shape and parameter bits.
pub fn network_digest(net: &Mlp) -> [u8; 32] {
    let mut w = Writer(Vec::new());
    w.net(net);
    Sha256::digest(&w.0).into()
}
