//! Two-qubit gate skeletons of common NISQ benchmarks.

use rand::Rng as _;

use crate::circuit::{Gate, Program, Qubit};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// One MS gate per controlled-phase pair `(i, j)`, `i < j`.
pub fn gen_qft(n: usize) -> Result<Program> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("qft needs n >= 2, got {n}")));
    }
    let gates = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| Gate::Ms(i, j)))
        .collect();
    Ok(Program::new(n, gates)?.with_id(format!("qft{n}")))
}

/// Toffoli with controls `x`, `y` and target `t` as six CNOTs.
fn toffoli(g: &mut Vec<Gate>, x: Qubit, y: Qubit, t: Qubit) {
    g.extend([
        Gate::Ms(y, t),
        Gate::Ms(x, t),
        Gate::Ms(y, t),
        Gate::Ms(x, t),
        Gate::Ms(x, y),
        Gate::Ms(x, y),
    ]);
}

fn maj(g: &mut Vec<Gate>, x: Qubit, y: Qubit, z: Qubit) {
    g.push(Gate::Ms(z, y));
    g.push(Gate::Ms(z, x));
    toffoli(g, x, y, z);
}

fn uma(g: &mut Vec<Gate>, x: Qubit, y: Qubit, z: Qubit) {
    toffoli(g, x, y, z);
    g.push(Gate::Ms(z, x));
    g.push(Gate::Ms(x, y));
}

/// Cuccaro ripple-carry adder on `m = (n - 2) / 2` bit registers.
///
/// Layout: carry-in `0`, `a_i = 1 + 2i`, `b_i = 2 + 2i`, carry-out `n - 1`.
pub fn gen_adder(n: usize) -> Result<Program> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("adder needs even n >= 4, got {n}")));
    }
    let m = (n - 2) / 2;
    let a = |i: usize| 1 + 2 * i;
    let b = |i: usize| 2 + 2 * i;
    let prev = |i: usize| if i == 0 { 0 } else { a(i - 1) };
    let mut g = Vec::with_capacity(16 * m + 1);
    for i in 0..m {
        maj(&mut g, prev(i), b(i), a(i));
    }
    g.push(Gate::Ms(a(m - 1), n - 1));
    for i in (0..m).rev() {
        uma(&mut g, prev(i), b(i), a(i));
    }
    Ok(Program::new(n, g)?.with_id(format!("adder{n}")))
}

/// One MS gate per edge of a seeded G(n, p) random graph, edges in `(i, j)`
/// lexicographic order.
pub fn gen_qaoa(n: usize, density: f64, seed: u64) -> Result<Program> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("qaoa needs n >= 2, got {n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!("density must be in (0, 1], got {density}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut gates = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < density {
                gates.push(Gate::Ms(i, j));
            }
        }
    }
    Ok(Program::new(n, gates)?.with_id(format!("qaoa{n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(p: &Program) -> Vec<(usize, usize)> {
        p.ms_gates().map(|(_, a, b)| (a, b)).collect()
    }

    #[test]
    fn qft_pairs() {
        assert_eq!(pairs(&gen_qft(3).unwrap()), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(pairs(&gen_qft(2).unwrap()), vec![(0, 1)]);
        for n in 2..20 {
            assert_eq!(gen_qft(n).unwrap().len(), n * (n - 1) / 2);
        }
        assert!(gen_qft(1).is_err());
    }

    #[test]
    fn adder_sizes() {
        for n in (4..30).step_by(2) {
            let p = gen_adder(n).unwrap();
            assert_eq!(p.len(), 16 * ((n - 2) / 2) + 1);
            assert_eq!(p, gen_adder(n).unwrap());
        }
        assert!(gen_adder(3).is_err());
        assert!(gen_adder(5).is_err());
        assert!(gen_adder(2).is_err());
    }

    #[test]
    fn qaoa_density() {
        let p = gen_qaoa(7, 1.0, 3).unwrap();
        assert_eq!(pairs(&p), pairs(&gen_qft(7).unwrap()));
        assert_eq!(gen_qaoa(10, 0.4, 9).unwrap(), gen_qaoa(10, 0.4, 9).unwrap());
        assert!(gen_qaoa(4, 0.0, 0).is_err());
        assert!(gen_qaoa(4, 1.5, 0).is_err());
        assert!(gen_qaoa(4, f64::NAN, 0).is_err());
        assert!(gen_qaoa(1, 0.5, 0).is_err());
    }
}
