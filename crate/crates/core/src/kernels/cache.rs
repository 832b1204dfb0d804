//! Binary Gram cache.
//!
//! Layout: one ASCII header line
//! `sigcurate-gram v1, n=<n>, backend=<backend>, normalized=<bool>, seed=<u64>`,
//! then `n` id lines, then the upper triangle (diagonal included) as
//! little-endian `f64` in row-major order.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{Backend, GramMatrix};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

const MAGIC: &str = "sigcurate-gram v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheHeader {
    pub n: usize,
    pub backend: Backend,
    pub normalized: bool,
    pub seed: u64,
}

pub fn encode_cache(gram: &GramMatrix, backend: Backend, seed: u64) -> Result<Vec<u8>> {
    let n = gram.n();
    let mut out = format!(
        "{MAGIC}, n={n}, backend={backend}, normalized={}, seed={seed}\n",
        gram.is_normalized()
    )
    .into_bytes();
    for id in gram.ids() {
        if id.contains(['\n', '\r']) {
            return Err(Error::InvalidGram(format!(
                "id {id:?} contains a line break and cannot be cached"
            )));
        }
        out.extend_from_slice(id.as_bytes());
        out.push(b'\n');
    }
    for i in 0..n {
        for j in i..n {
            out.extend_from_slice(&gram.get(i, j).to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses and validates a cache image. `source` names it in error messages.
pub fn decode_cache(bytes: &[u8], source: &Path) -> Result<(GramMatrix, CacheHeader)> {
    let bad = |reason: String| Error::Cache {
        path: source.to_path_buf(),
        reason,
    };
    let mut rest = bytes;
    let mut next_line = |what: &str| -> Result<String> {
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad(format!("truncated before {what}")))?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| bad(format!("{what} is not UTF-8")))?
            .to_string();
        rest = &rest[end + 1..];
        Ok(line)
    };

    let header_line = next_line("header")?;
    let header = parse_header(&header_line).map_err(bad)?;
    let mut ids = Vec::with_capacity(header.n);
    for k in 0..header.n {
        ids.push(next_line(&format!("id {k}"))?);
    }

    let n = header.n;
    let expected = n * (n + 1) / 2 * 8;
    if rest.len() != expected {
        return Err(bad(format!(
            "expected {expected} bytes of matrix data, found {}",
            rest.len()
        )));
    }
    let mut values = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = values.next().expect("length checked");
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    let gram = GramMatrix::new(entries, ids, header.normalized).map_err(|e| bad(e.to_string()))?;
    gram.check_psd().map_err(|e| bad(e.to_string()))?;
    Ok((gram, header))
}

fn parse_header(line: &str) -> std::result::Result<CacheHeader, String> {
    let mut parts = line.split(", ");
    if parts.next() != Some(MAGIC) {
        return Err(format!("unrecognized header {line:?}"));
    }
    let mut field = |key: &str| -> std::result::Result<String, String> {
        let part = parts
            .next()
            .ok_or_else(|| format!("header lacks '{key}'"))?;
        part.strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| format!("expected '{key}=...', found {part:?}"))
    };
    let n = field("n")?
        .parse::<usize>()
        .map_err(|e| format!("bad n: {e}"))?;
    let backend = field("backend")?
        .parse::<Backend>()
        .map_err(|e| e.to_string())?;
    let normalized = field("normalized")?
        .parse::<bool>()
        .map_err(|e| format!("bad normalized flag: {e}"))?;
    let seed = field("seed")?
        .parse::<u64>()
        .map_err(|e| format!("bad seed: {e}"))?;
    if parts.next().is_some() {
        return Err("trailing header fields".into());
    }
    if n == 0 {
        return Err("empty Gram".into());
    }
    Ok(CacheHeader {
        n,
        backend,
        normalized,
        seed,
    })
}

pub fn write_cache(path: &Path, gram: &GramMatrix, backend: Backend, seed: u64) -> Result<()> {
    write_atomic(path, &encode_cache(gram, backend, seed)?)
}

pub fn read_cache(path: &Path) -> Result<(GramMatrix, CacheHeader)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_cache(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> GramMatrix {
        let rows = vec![
            vec![1.0, 0.25, -0.1],
            vec![0.25, 1.0, 0.3333333333333333],
            vec![-0.1, 0.3333333333333333, 1.0],
        ];
        let g = GramMatrix::from_rows(&rows, true).unwrap();
        GramMatrix::new(
            g.entries().clone(),
            vec!["a".into(), "demo b".into(), "c".into()],
            true,
        )
        .unwrap()
    }

    #[test]
    fn header_and_layout() {
        let bytes = encode_cache(&sample(), Backend::RfsfDp, 17).unwrap();
        let text = String::from_utf8_lossy(&bytes[..80]);
        assert!(text.starts_with(
            "sigcurate-gram v1, n=3, backend=rfsf_dp, normalized=true, seed=17\na\ndemo b\nc\n"
        ));
        let header_len =
            "sigcurate-gram v1, n=3, backend=rfsf_dp, normalized=true, seed=17\na\ndemo b\nc\n"
                .len();
        assert_eq!(bytes.len(), header_len + 6 * 8);
        let second = f64::from_le_bytes(bytes[header_len + 8..header_len + 16].try_into().unwrap());
        assert_eq!(second, 0.25);
    }

    #[test]
    fn round_trip_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gram.bin");
        write_cache(&path, &sample(), Backend::Pde, 3).unwrap();
        let (g, h) = read_cache(&path).unwrap();
        assert_eq!(g.entries(), sample().entries());
        assert_eq!(g.ids(), sample().ids());
        assert_eq!(
            h,
            CacheHeader {
                n: 3,
                backend: Backend::Pde,
                normalized: true,
                seed: 3
            }
        );
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode_cache(&sample(), Backend::Pde, 3).unwrap();
        let p = Path::new("mem");
        assert!(decode_cache(&bytes[..bytes.len() - 1], p).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_cache(&extra, p).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(decode_cache(&bad_magic, p).is_err());

        // Diagonal entry no longer 1 for a normalized Gram.
        let header_len = bytes.len() - 48;
        let mut bad_diag = bytes.clone();
        bad_diag[header_len..header_len + 8].copy_from_slice(&0.5f64.to_le_bytes());
        assert!(decode_cache(&bad_diag, p).is_err());

        let not_psd = GramMatrix::from_rows(
            &[
                vec![1.0, 0.9, -0.9],
                vec![0.9, 1.0, 0.9],
                vec![-0.9, 0.9, 1.0],
            ],
            true,
        )
        .unwrap();
        let bytes = encode_cache(&not_psd, Backend::Pde, 0).unwrap();
        assert!(decode_cache(&bytes, p).is_err());
    }

    #[test]
    fn ids_with_newlines_rejected() {
        let g = GramMatrix::new(DMatrix::identity(1, 1), vec!["a\nb".into()], true).unwrap();
        assert!(encode_cache(&g, Backend::Pde, 0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(values in prop::collection::vec(-1.0f64..1.0, 1..40), n in 1usize..8) {
            // Build a PSD Gram from random features so decoding accepts it.
            let dim = values.len();
            let feats: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..dim).map(|k| values[(k + 3 * i) % dim] + i as f64 * 1e-3).collect())
                .collect();
            let entries = DMatrix::from_fn(n, n, |i, j| {
                feats[i].iter().zip(&feats[j]).map(|(a, b)| a * b).sum::<f64>() + if i == j { 1.0 } else { 0.0 }
            });
            let ids = (0..n).map(|i| format!("id-{i}")).collect();
            let g = GramMatrix::new(entries, ids, false).unwrap();
            let bytes = encode_cache(&g, Backend::TruncatedDp, 9).unwrap();
            let (back, _) = decode_cache(&bytes, Path::new("mem")).unwrap();
            prop_assert_eq!(back.entries(), g.entries());
        }
    }
}
