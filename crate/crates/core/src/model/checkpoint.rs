//! Checkpoint serialization.
//!
//! Layout: the magic line `CVAE1`, a flat `key = value` manifest describing
//! the shapes and the training configuration, a `data` terminator line,
//! then the raw little-endian 64-bit float arrays of every layer in
//! declared order (encoder layers first, weight row-major then bias, then
//! decoder layers). Save followed by load reproduces the parameters
//! bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::vae::VaeParams;
use crate::nn::{Activation, DenseMatrix, Layer, MlpParams};

const MAGIC: &str = "CVAE1";
const DATA_MARKER: &str = "data";

/// Training configuration echoed into the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointMeta {
    pub alpha: f64,
    pub beta_pretrain: f64,
    pub beta_refine: f64,
    pub seed: u64,
}

fn join_widths(widths: &[usize]) -> String {
    widths
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_widths(value: &str) -> Result<Vec<usize>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("bad width list entry {w:?}")))
        })
        .collect()
}

pub fn save_checkpoint<W: Write>(writer: W, params: &VaeParams, meta: &CheckpointMeta) -> Result<()> {
    params.validate()?;
    let mut w = BufWriter::new(writer);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "n = {}", params.n())?;
    writeln!(w, "k = {}", params.k())?;
    writeln!(w, "enc_hidden = {}", join_widths(&params.encoder.hidden_widths()))?;
    writeln!(w, "dec_hidden = {}", join_widths(&params.decoder.hidden_widths()))?;
    writeln!(w, "alpha = {}", meta.alpha)?;
    writeln!(w, "beta_pretrain = {}", meta.beta_pretrain)?;
    writeln!(w, "beta_refine = {}", meta.beta_refine)?;
    writeln!(w, "seed = {}", meta.seed)?;
    writeln!(w, "{DATA_MARKER}")?;
    for layer in params.encoder.layers.iter().chain(&params.decoder.layers) {
        for v in layer.weight.data() {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &layer.bias {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint<R: Read>(reader: R) -> Result<(VaeParams, CheckpointMeta)> {
    let mut bytes = Vec::new();
    BufReader::new(reader).read_to_end(&mut bytes)?;

    // Split the text header from the binary payload at the data marker.
    let marker = format!("\n{DATA_MARKER}\n");
    let header_end = bytes
        .windows(marker.len())
        .position(|w| w == marker.as_bytes())
        .ok_or_else(|| Error::Format("checkpoint has no data marker".into()))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::Format("checkpoint manifest is not UTF-8".into()))?;
    let payload = &bytes[header_end + marker.len()..];

    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(Error::Format(format!("checkpoint does not start with {MAGIC}")));
    }
    let mut n = None;
    let mut k = None;
    let mut enc_hidden = None;
    let mut dec_hidden = None;
    let mut alpha = None;
    let mut beta_pretrain = None;
    let mut beta_refine = None;
    let mut seed = None;
    for line in lines {
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Format(format!("bad manifest line {line:?}")))?;
        let parse_f64 = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("bad float for {key}: {value:?}")))
        };
        let parse_usize = || {
            value
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("bad integer for {key}: {value:?}")))
        };
        match key {
            "n" => n = Some(parse_usize()?),
            "k" => k = Some(parse_usize()?),
            "enc_hidden" => enc_hidden = Some(parse_widths(value)?),
            "dec_hidden" => dec_hidden = Some(parse_widths(value)?),
            "alpha" => alpha = Some(parse_f64()?),
            "beta_pretrain" => beta_pretrain = Some(parse_f64()?),
            "beta_refine" => beta_refine = Some(parse_f64()?),
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| Error::Format(format!("bad seed {value:?}")))?,
                )
            }
            other => return Err(Error::Format(format!("unknown manifest key {other:?}"))),
        }
    }
    let missing = |what: &str| Error::Format(format!("manifest is missing {what}"));
    let n = n.ok_or_else(|| missing("n"))?;
    let k = k.ok_or_else(|| missing("k"))?;
    let enc_hidden = enc_hidden.ok_or_else(|| missing("enc_hidden"))?;
    let dec_hidden = dec_hidden.ok_or_else(|| missing("dec_hidden"))?;
    let meta = CheckpointMeta {
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
        beta_pretrain: beta_pretrain.ok_or_else(|| missing("beta_pretrain"))?,
        beta_refine: beta_refine.ok_or_else(|| missing("beta_refine"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
    };

    let mut enc_dims = vec![n];
    enc_dims.extend_from_slice(&enc_hidden);
    enc_dims.push(2 * k);
    let mut dec_dims = vec![k];
    dec_dims.extend_from_slice(&dec_hidden);
    dec_dims.push(n);

    let expected: usize = enc_dims
        .windows(2)
        .chain(dec_dims.windows(2))
        .map(|w| w[0] * w[1] + w[1])
        .sum();
    if payload.len() != expected * 8 {
        return Err(Error::Format(format!(
            "checkpoint payload holds {} bytes, expected {}",
            payload.len(),
            expected * 8
        )));
    }

    let mut cursor = 0usize;
    let mut take = |count: usize| -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let chunk: [u8; 8] = payload[cursor..cursor + 8].try_into().expect("length checked");
            out.push(f64::from_le_bytes(chunk));
            cursor += 8;
        }
        out
    };
    let mut read_net = |dims: &[usize]| -> Result<MlpParams> {
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let weight = DenseMatrix::from_vec(w[1], w[0], take(w[0] * w[1]))?;
            let bias = take(w[1]);
            layers.push(Layer { weight, bias });
        }
        Ok(MlpParams {
            layers,
            activation: Activation::Tanh,
        })
    };
    let encoder = read_net(&enc_dims)?;
    let decoder = read_net(&dec_dims)?;
    let params = VaeParams::from_networks(encoder, decoder)?;
    Ok((params, meta))
}

pub fn save_checkpoint_file<P: AsRef<Path>>(
    path: P,
    params: &VaeParams,
    meta: &CheckpointMeta,
) -> Result<()> {
    save_checkpoint(File::create(path)?, params, meta)
}

pub fn load_checkpoint_file<P: AsRef<Path>>(path: P) -> Result<(VaeParams, CheckpointMeta)> {
    load_checkpoint(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::vae::predict_scores;

    fn meta() -> CheckpointMeta {
        CheckpointMeta {
            alpha: 2.0,
            beta_pretrain: 0.1,
            beta_refine: 2.0,
            seed: 42,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let params = VaeParams::init(7, 3, &[5, 4], &[6], 1234);
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &params, &meta()).unwrap();
        let (loaded, loaded_meta) = load_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(loaded, params);
        assert_eq!(loaded_meta, meta());

        // Saving the loaded model reproduces the same bytes.
        let mut again = Vec::new();
        save_checkpoint(&mut again, &loaded, &loaded_meta).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn loaded_model_predicts_bit_exactly() {
        let params = VaeParams::init(9, 2, &[4], &[4], 77);
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &params, &meta()).unwrap();
        let (loaded, _) = load_checkpoint(buf.as_slice()).unwrap();
        let row = [0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        assert_eq!(
            predict_scores(&params, &row).unwrap(),
            predict_scores(&loaded, &row).unwrap()
        );
    }

    #[test]
    fn no_hidden_layers_round_trip() {
        let params = VaeParams::init(3, 2, &[], &[], 5);
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &params, &meta()).unwrap();
        let (loaded, _) = load_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(loaded, params);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(load_checkpoint("".as_bytes()).is_err());
        assert!(load_checkpoint("BOGUS\ndata\n".as_bytes()).is_err());

        let params = VaeParams::init(3, 2, &[], &[], 5);
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &params, &meta()).unwrap();
        // Truncated payload.
        buf.truncate(buf.len() - 8);
        assert!(load_checkpoint(buf.as_slice()).is_err());
    }
}
