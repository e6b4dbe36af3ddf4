//! Reference computations that share no code paths with the library's
//! estimators. Each one goes the long way round on purpose.

#![allow(dead_code)]

use nalgebra::DMatrix;
pub type C = nalgebra::Complex<f64>;

pub type M = DMatrix<C>;

pub fn paulis() -> [M; 4] {
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    [
        M::from_row_slice(2, 2, &[o, z, z, o]),
        M::from_row_slice(2, 2, &[z, o, o, z]),
        M::from_row_slice(2, 2, &[z, -i, i, z]),
        M::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

pub fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

/// All Pauli strings on `n` qubits with their index digits (0 = I .. 3 = Z).
pub fn pauli_strings(n: usize) -> Vec<(Vec<usize>, M)> {
    let mut out = vec![(Vec::new(), M::identity(1, 1))];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|(idx, m)| {
                (0..4).map(move |k| {
                    let mut idx = idx.clone();
                    idx.push(k);
                    (idx, kron(&m, &paulis()[k]))
                })
            })
            .collect();
    }
    out
}

/// `<P>` from outcome frequencies of the setting that measures each non-identity
/// factor of `P` (identity positions are measured in Z and ignored).
/// `freq` maps a setting (digits 1..=3 per qubit) to frequencies indexed by bitstring.
pub fn expectation_from_frequencies(idx: &[usize], freq: &dyn Fn(&[usize]) -> Vec<f64>) -> f64 {
    let n = idx.len();
    let setting: Vec<usize> = idx.iter().map(|&k| if k == 0 { 3 } else { k }).collect();
    let f = freq(&setting);
    let mut e = 0.0;
    for (b, fb) in f.iter().enumerate() {
        let mut sign = 1.0;
        for q in 0..n {
            let bit = (b >> (n - 1 - q)) & 1;
            if idx[q] != 0 && bit == 1 {
                sign = -sign;
            }
        }
        e += sign * fb;
    }
    e
}

/// `rho = 2^-n sum_P <P> P`.
pub fn linear_inversion(n: usize, freq: &dyn Fn(&[usize]) -> Vec<f64>) -> M {
    let d = 1usize << n;
    let mut rho = M::zeros(d, d);
    for (idx, p) in pauli_strings(n) {
        let e = expectation_from_frequencies(&idx, freq);
        rho += p * C::new(e / d as f64, 0.0);
    }
    rho
}

/// Clamp negative eigenvalues and renormalize.
pub fn project_physical(m: &M) -> M {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let eig = h.clone().symmetric_eigen();
    let d = m.nrows();
    let mut out = M::zeros(d, d);
    let mut tr = 0.0;
    for k in 0..d {
        let v = eig.eigenvalues[k].max(0.0);
        tr += v;
        let col = eig.eigenvectors.column(k);
        out += &col * col.adjoint() * C::new(v, 0.0);
    }
    out / C::new(tr, 0.0)
}

/// Born probabilities of `rho` in a Pauli setting by explicit projector products.
pub fn born_frequencies(rho: &M, setting: &[usize]) -> Vec<f64> {
    let n = setting.len();
    let p = paulis();
    let d = 1usize << n;
    (0..d)
        .map(|b| {
            let mut proj = M::identity(1, 1);
            for q in 0..n {
                let bit = (b >> (n - 1 - q)) & 1;
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                let local =
                    (M::identity(2, 2) + &p[setting[q]] * C::new(sign, 0.0)) * C::new(0.5, 0.0);
                proj = kron(&proj, &local);
            }
            (rho * proj).trace().re
        })
        .collect()
}

pub fn trace_distance(a: &M, b: &M) -> f64 {
    let diff = a - b;
    let h = (&diff + diff.adjoint()) * C::new(0.5, 0.0);
    0.5 * h
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
}

/// Closed form for qubits: `F = Tr(a b) + 2 sqrt(det a det b)`.
pub fn qubit_fidelity(a: &M, b: &M) -> f64 {
    let det = |m: &M| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
    (a * b).trace().re + 2.0 * (det(a) * det(b)).sqrt()
}

/// The six Pauli eigenstates as kets.
pub fn pauli_eigenstates() -> Vec<[C; 2]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        [C::new(1.0, 0.0), C::new(0.0, 0.0)],
        [C::new(0.0, 0.0), C::new(1.0, 0.0)],
        [C::new(h, 0.0), C::new(h, 0.0)],
        [C::new(h, 0.0), C::new(-h, 0.0)],
        [C::new(h, 0.0), C::new(0.0, h)],
        [C::new(h, 0.0), C::new(0.0, -h)],
    ]
}

/// Process fidelity to the identity from the average fidelity over the six
/// Pauli eigenstates (a 2-design): `F_pro = (3 F_avg - 1) / 2`.
pub fn process_fidelity_via_design(channel: &dyn Fn(&M) -> M) -> f64 {
    let mut acc = 0.0;
    for k in pauli_eigenstates() {
        let v = nalgebra::DVector::from_row_slice(&k);
        let rho = &v * v.adjoint();
        let out = channel(&rho);
        acc += (v.adjoint() * out * &v)[(0, 0)].re;
    }
    let f_avg = acc / 6.0;
    (3.0 * f_avg - 1.0) / 2.0
}

/// `a|+++> + b|--->` written out amplitude by amplitude.
pub fn phase_code_ket(a: C, b: C) -> nalgebra::DVector<C> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    nalgebra::DVector::from_fn(8, |i, _| {
        let ones = (i as u32).count_ones() as i32;
        // <x|+++> = h^3; <x|---> = h^3 (-1)^|x|.
        let sign = if ones % 2 == 0 { 1.0 } else { -1.0 };
        (a + b * C::new(sign, 0.0)) * C::new(h * h * h, 0.0)
    })
}

/// `Z` on qubit `k` of three, as the diagonal sign pattern.
pub fn z_on(k: usize) -> M {
    M::from_fn(8, 8, |i, j| {
        if i != j {
            C::new(0.0, 0.0)
        } else if (i >> (2 - k)) & 1 == 1 {
            C::new(-1.0, 0.0)
        } else {
            C::new(1.0, 0.0)
        }
    })
}

/// Reduced state of one qubit of three, summing matrix elements by hand.
pub fn reduce_to_qubit(rho: &M, q: usize) -> M {
    let mut out = M::zeros(2, 2);
    for i in 0..8 {
        for j in 0..8 {
            let rest = |x: usize| x & !(1 << (2 - q));
            if rest(i) == rest(j) {
                out[((i >> (2 - q)) & 1, (j >> (2 - q)) & 1)] += rho[(i, j)];
            }
        }
    }
    out
}

/// Probability that ancillas (1, 2) read `(s1, s2)`.
pub fn ancilla_pattern_probability(rho: &M, s1: usize, s2: usize) -> f64 {
    (0..8)
        .filter(|i| (i >> 1) & 1 == s1 && i & 1 == s2)
        .map(|i| rho[(i, i)].re)
        .sum()
}
