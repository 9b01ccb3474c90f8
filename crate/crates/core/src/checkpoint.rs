//! Binary state checkpoints.
//!
//! Little-endian layout: magic `KDUO`, format version (u32), `N_R` (u64),
//! `N_r` (u64), representation tag (u8), kick count (u64), the eleven
//! parameter values of [`ModelParams::to_array`] (f64), then `N_R·N_r`
//! complex amplitudes as interleaved `re, im` f64 pairs in storage order.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{QuantumState, Representation};
use crate::params::ModelParams;

pub const MAGIC: &[u8; 4] = b"KDUO";
pub const VERSION: u32 = 1;

pub fn write_state<W: Write>(state: &QuantumState, mut out: W) -> Result<()> {
    let p = &state.params;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(p.n_com as u64).to_le_bytes())?;
    out.write_all(&(p.n_int as u64).to_le_bytes())?;
    out.write_all(&[state.rep.tag()])?;
    out.write_all(&state.kick_count.to_le_bytes())?;
    for v in p.to_array() {
        out.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * state.coeffs.len());
    for c in &state.coeffs {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_state<R: Read>(mut input: R) -> Result<QuantumState> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(read_n(&mut input)?);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n_com = u64::from_le_bytes(read_n(&mut input)?) as usize;
    let n_int = u64::from_le_bytes(read_n(&mut input)?) as usize;
    let [tag] = read_n::<1, _>(&mut input)?;
    let rep = Representation::from_tag(tag)
        .ok_or_else(|| Error::Checkpoint(format!("unknown representation tag {tag}")))?;
    let kick_count = u64::from_le_bytes(read_n(&mut input)?);
    let mut values = [0.0; 11];
    for v in values.iter_mut() {
        *v = f64::from_le_bytes(read_n(&mut input)?);
    }
    let params = ModelParams::from_array(&values)?;
    if params.n_com != n_com || params.n_int != n_int {
        return Err(Error::Checkpoint("grid header disagrees with parameters".into()));
    }
    let mut raw = vec![0u8; 16 * n_com * n_int];
    input.read_exact(&mut raw)?;
    let coeffs = raw
        .chunks_exact(16)
        .map(|b| {
            Complex64::new(
                f64::from_le_bytes(b[..8].try_into().unwrap()),
                f64::from_le_bytes(b[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(QuantumState {
        coeffs,
        rep,
        params,
        kick_count,
    })
}

fn read_n<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input.read_exact(&mut b)?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let p = ModelParams::new(0.5, 2.5, 1.0, 0.25, 0.5, 16, 4, 9).unwrap();
        let mut s = QuantumState::random(&p, Representation::PosPos, &mut ChaCha8Rng::seed_from_u64(1));
        s.kick_count = 17;
        let mut buf = Vec::new();
        write_state(&s, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"KDUO");
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 1 + 8 + 11 * 8 + 16 * 64);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 16);
        assert_eq!(buf[24], 0);
        let back = read_state(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_corruption() {
        let p = ModelParams::new(0.5, 2.5, 1.0, 0.25, 0.5, 8, 2, 1).unwrap();
        let s = QuantumState::initial(&p);
        let mut buf = Vec::new();
        write_state(&s, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_state(&bad[..]), Err(Error::Checkpoint(_))));
        let mut bad = buf.clone();
        bad[24] = 9;
        assert!(read_state(&bad[..]).is_err());
        assert!(read_state(&buf[..buf.len() - 1]).is_err());
    }
}
