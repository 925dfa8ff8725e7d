//! State snapshot formats.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic   b"SKDVSTAT"
//! version u32 (= 1)
//! nx      u32
//! L, t, alpha, beta, gamma, s, l   f64 x 7
//! u       nx x (re f64, im f64)
//! v       nx x (re f64, im f64)
//! ```
//!
//! The CSV form carries the same header as `# key=value` comment lines
//! followed by `j,u_re,u_im,v_re,v_im` rows; floats are written in shortest
//! round-trip form so both encodings reproduce every bit.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{SystemParams, SystemState};
use crate::error::{Error, Result};
use crate::spectral::{ComplexField, Grid, RealField};

const MAGIC: &[u8; 8] = b"SKDVSTAT";
const VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_state_binary<W: Write>(
    mut w: W,
    state: &SystemState,
    params: &SystemParams,
) -> Result<()> {
    let grid = state.grid();
    let mut buf = Vec::with_capacity(8 + 8 + 56 + 32 * grid.nx());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.nx() as u32).to_le_bytes());
    for x in [
        grid.half_length(),
        state.t,
        params.alpha,
        params.beta,
        params.gamma,
        params.s,
        params.l,
    ] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for z in state.u.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    for x in state.v.values() {
        buf.extend_from_slice(&x.to_le_bytes());
        buf.extend_from_slice(&0f64.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_state_binary<R: Read>(mut r: R) -> Result<(SystemState, SystemParams)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err)?;
    let mut cur = bytes.as_slice();
    let mut take = |n: usize| -> Result<&[u8]> {
        if cur.len() < n {
            return Err(Error::Format("truncated state".into()));
        }
        let (head, tail) = cur.split_at(n);
        cur = tail;
        Ok(head)
    };
    if take(8)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let nx = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let mut f = || -> Result<f64> { Ok(f64::from_le_bytes(take(8)?.try_into().unwrap())) };
    let head: Vec<f64> = (0..7).map(|_| f()).collect::<Result<_>>()?;
    let mut u = Vec::with_capacity(nx);
    for _ in 0..nx {
        u.push(Complex64::new(f()?, f()?));
    }
    let mut v = Vec::with_capacity(nx);
    for _ in 0..nx {
        let re = f()?;
        let im = f()?;
        if im != 0.0 {
            return Err(Error::Format("v has a non-zero imaginary sample".into()));
        }
        v.push(re);
    }
    build(nx, &head, u, v)
}

fn build(
    nx: usize,
    head: &[f64],
    u: Vec<Complex64>,
    v: Vec<f64>,
) -> Result<(SystemState, SystemParams)> {
    let grid = Grid::new(nx, head[0])?;
    let state = SystemState::new(ComplexField::new(grid, u)?, RealField::new(grid, v)?, head[1])?;
    let params = SystemParams {
        alpha: head[2],
        beta: head[3],
        gamma: head[4],
        s: head[5],
        l: head[6],
    };
    Ok((state, params))
}

const CSV_KEYS: [&str; 7] = ["L", "t", "alpha", "beta", "gamma", "s", "l"];

pub fn write_state_csv<W: Write>(mut w: W, state: &SystemState, params: &SystemParams) -> Result<()> {
    let grid = state.grid();
    let mut out = String::new();
    out.push_str(&format!("# nx={}\n", grid.nx()));
    let vals = [
        grid.half_length(),
        state.t,
        params.alpha,
        params.beta,
        params.gamma,
        params.s,
        params.l,
    ];
    for (k, v) in CSV_KEYS.iter().zip(vals) {
        out.push_str(&format!("# {k}={v:?}\n"));
    }
    out.push_str("j,u_re,u_im,v_re,v_im\n");
    for (j, (z, x)) in state.u.values().iter().zip(state.v.values()).enumerate() {
        out.push_str(&format!("{j},{:?},{:?},{:?},0.0\n", z.re, z.im, x));
    }
    w.write_all(out.as_bytes()).map_err(io_err)
}

pub fn read_state_csv<R: BufRead>(r: R) -> Result<(SystemState, SystemParams)> {
    let mut nx = None;
    let mut head = [f64::NAN; 7];
    let mut u = Vec::new();
    let mut v = Vec::new();
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Format(format!("bad float `{s}`: {e}")))
    };
    for line in r.lines() {
        let line = line.map_err(io_err)?;
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, val) = rest
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header `{line}`")))?;
            if k == "nx" {
                nx = Some(val.parse::<usize>().map_err(|e| Error::Format(e.to_string()))?);
            } else if let Some(i) = CSV_KEYS.iter().position(|c| *c == k) {
                head[i] = parse(val)?;
            } else {
                return Err(Error::Format(format!("unknown header key `{k}`")));
            }
        } else if line.starts_with('j') || line.is_empty() {
            continue;
        } else {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(Error::Format(format!("bad row `{line}`")));
            }
            u.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
            v.push(parse(cols[3])?);
        }
    }
    let nx = nx.ok_or_else(|| Error::Format("missing nx".into()))?;
    if head.iter().any(|x| x.is_nan()) {
        return Err(Error::Format("incomplete header".into()));
    }
    build(nx, &head, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (SystemState, SystemParams) {
        let grid = Grid::new(16, 2.5).unwrap();
        let u = ComplexField::from_fn(grid, |x| Complex64::new((x / 3.0).exp(), -x.sin() / 7.0));
        let v = RealField::from_fn(grid, |x| 1.0 / (1.0 + x * x) - 1e-300);
        let p = SystemParams::new(1.0, -0.3, 1.0 / 3.0, -0.125, 0.1).unwrap();
        (SystemState::new(u, v, 0.1 + 0.2).unwrap(), p)
    }

    fn assert_bit_equal(a: &(SystemState, SystemParams), b: &(SystemState, SystemParams)) {
        assert_eq!(a.0.t.to_bits(), b.0.t.to_bits());
        assert_eq!(a.0.grid(), b.0.grid());
        assert_eq!(a.1, b.1);
        for (x, y) in a.0.u.values().iter().zip(b.0.u.values()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        for (x, y) in a.0.v.values().iter().zip(b.0.v.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let s = sample();
        let mut buf = Vec::new();
        write_state_binary(&mut buf, &s.0, &s.1).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 56 + 32 * 16);
        assert_bit_equal(&s, &read_state_binary(buf.as_slice()).unwrap());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = sample();
        let mut buf = Vec::new();
        write_state_csv(&mut buf, &s.0, &s.1).unwrap();
        assert_bit_equal(&s, &read_state_csv(buf.as_slice()).unwrap());
    }

    #[test]
    fn rejects_corrupt_input() {
        let s = sample();
        let mut buf = Vec::new();
        write_state_binary(&mut buf, &s.0, &s.1).unwrap();
        assert!(read_state_binary(&buf[..40]).is_err());
        buf[0] = b'X';
        assert!(read_state_binary(buf.as_slice()).is_err());
    }
}
