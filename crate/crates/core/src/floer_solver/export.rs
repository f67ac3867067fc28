//! CSV and binary grid dumps.
//!
//! Binary layout, little endian:
//! `b"PRFL"`, `u32` version, `u32` n, `f64` S, `u64` Ns, `u64` Nt, then
//! `(Ns + 1)·Nt` pairs `(re, im)` of `f64` in row-major `(s, t)` order.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{CylinderGrid, FloerError, FloerSolution};

pub const MAGIC: [u8; 4] = *b"PRFL";
pub const VERSION: u32 = 1;

pub fn write_csv<W: Write>(sol: &FloerSolution, mut w: W) -> std::io::Result<()> {
    let g = &sol.grid;
    writeln!(w, "s,t,re,im")?;
    for i in 0..=g.ns {
        for j in 0..g.nt {
            let z = sol.at(i, j);
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                g.s(i),
                g.t(j),
                z.re,
                z.im
            )?;
        }
    }
    Ok(())
}

pub fn write_binary<W: Write>(sol: &FloerSolution, mut w: W) -> std::io::Result<()> {
    let g = &sol.grid;
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&g.n.to_le_bytes())?;
    w.write_all(&g.s_max.to_le_bytes())?;
    w.write_all(&(g.ns as u64).to_le_bytes())?;
    w.write_all(&(g.nt as u64).to_le_bytes())?;
    for z in &sol.z {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(CylinderGrid, Vec<Complex64>), FloerError> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if b4 != MAGIC {
        return Err(FloerError::InvalidInput("bad magic".into()));
    }
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(FloerError::InvalidInput(format!(
            "unsupported version {version}"
        )));
    }
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let s_max = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let ns = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let nt = u64::from_le_bytes(b8) as usize;
    let g = CylinderGrid::new(n, s_max, ns, nt)?;
    let mut z = Vec::with_capacity(g.len());
    for _ in 0..g.len() {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        z.push(Complex64::new(re, f64::from_le_bytes(b8)));
    }
    Ok((g, z))
}
