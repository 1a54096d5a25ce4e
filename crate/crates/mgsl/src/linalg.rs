//! Small dense kernels: pivoted 4x4 LU solves and complex 4x4 eigenvalues.
//!
//! Everything in the Fourier engine reduces to dense operations on 4x4
//! blocks, so these are hand-rolled for speed instead of going through a
//! general-purpose factorization.

use nalgebra::{ComplexField, Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RMat4 = Matrix4<f64>;
pub type RVec4 = Vector4<f64>;
pub type CMat4 = Matrix4<Complex64>;
pub type CVec4 = Vector4<Complex64>;

pub fn complexify(m: &RMat4) -> CMat4 {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn cidentity() -> CMat4 {
    CMat4::identity()
}

/// LU factorization with partial pivoting of a 4x4 block.
///
/// Generic over the scalar field so the same code serves the real
/// physical-space blocks and the complex Fourier symbols.
#[derive(Clone, Debug)]
pub struct Lu4<T: ComplexField> {
    lu: Matrix4<T>,
    piv: [usize; 4],
}

impl<T: ComplexField + Copy> Lu4<T> {
    pub fn factor(a: &Matrix4<T>) -> Result<Self> {
        let mut lu = *a;
        let mut piv = [0usize, 1, 2, 3];
        for k in 0..4 {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for r in k + 1..4 {
                let m = lu[(r, k)].modulus();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if !(best > nalgebra::convert(0.0)) {
                return Err(Error::SingularDiagonal(None));
            }
            if p != k {
                lu.swap_rows(k, p);
                piv.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for r in k + 1..4 {
                let f = lu[(r, k)] / pivot;
                lu[(r, k)] = f;
                for c in k + 1..4 {
                    let sub = f * lu[(k, c)];
                    lu[(r, c)] -= sub;
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn solve(&self, b: &Vector4<T>) -> Vector4<T> {
        let mut x = Vector4::from_fn(|i, _| b[self.piv[i]]);
        // forward (unit lower triangle)
        for i in 1..4 {
            for j in 0..i {
                let s = self.lu[(i, j)] * x[j];
                x[i] -= s;
            }
        }
        // backward
        for i in (0..4).rev() {
            for j in i + 1..4 {
                let s = self.lu[(i, j)] * x[j];
                x[i] -= s;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &Matrix4<T>) -> Matrix4<T> {
        let mut out = Matrix4::zeros();
        for c in 0..4 {
            let col = self.solve(&b.column(c).into_owned());
            out.set_column(c, &col);
        }
        out
    }
}

/// Direct pivoted Gaussian elimination solve of a 4x4 system.
pub fn solve4<T: ComplexField + Copy>(a: &Matrix4<T>, b: &Vector4<T>) -> Result<Vector4<T>> {
    Ok(Lu4::factor(a)?.solve(b))
}

const MAX_QR_ITERS: usize = 200;

/// Eigenvalues of a complex 4x4 matrix by Hessenberg reduction and
/// shifted QR iteration with deflation. Returns `NonConvergence` if the
/// iteration cap is hit, never a silent value.
pub fn eigenvalues4(a: &CMat4) -> Result<[Complex64; 4]> {
    let mut h = *a;
    hessenberg4(&mut h);
    let mut evs = [Complex64::new(0.0, 0.0); 4];
    let mut hi = 3usize;
    let mut iters = 0usize;
    loop {
        // zero negligible subdiagonals
        for i in 1..=hi {
            let s = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
            let tol = f64::EPSILON * s + f64::MIN_POSITIVE;
            if h[(i, i - 1)].norm() <= tol {
                h[(i, i - 1)] = Complex64::new(0.0, 0.0);
            }
        }
        // deflate trailing 1x1 / 2x2 blocks
        if hi == 0 {
            evs[0] = h[(0, 0)];
            return Ok(evs);
        }
        if h[(hi, hi - 1)].norm() == 0.0 {
            evs[hi] = h[(hi, hi)];
            hi -= 1;
            continue;
        }
        if hi == 1 || h[(hi - 1, hi - 2)].norm() == 0.0 {
            let (l1, l2) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            evs[hi] = l1;
            evs[hi - 1] = l2;
            if hi == 1 {
                return Ok(evs);
            }
            hi -= 2;
            continue;
        }
        if iters >= MAX_QR_ITERS {
            return Err(Error::NonConvergence);
        }
        // active window [lo, hi]
        let mut lo = hi - 1;
        while lo > 0 && h[(lo, lo - 1)].norm() != 0.0 {
            lo -= 1;
        }
        let mut shift = wilkinson_shift(
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        if iters % 16 == 15 {
            // exceptional shift to break rare cycles
            shift = h[(hi, hi)] + Complex64::new(1.5 * h[(hi, hi - 1)].norm(), 0.0);
        }
        qr_step(&mut h, lo, hi, shift);
        iters += 1;
    }
}

pub fn spectral_radius4(a: &CMat4) -> Result<f64> {
    let evs = eigenvalues4(a)?;
    Ok(evs.iter().map(|e| e.norm()).fold(0.0, f64::max))
}

/// Cheap upper bound on the spectral radius (min of the Frobenius norm and
/// the maximum absolute row sum). Used to skip eigensolves during sweeps.
pub fn spectral_radius_upper_bound(a: &CMat4) -> f64 {
    let mut frob = 0.0;
    let mut rowmax: f64 = 0.0;
    for i in 0..4 {
        let mut rs = 0.0;
        for j in 0..4 {
            let n = a[(i, j)].norm();
            frob += n * n;
            rs += n;
        }
        rowmax = rowmax.max(rs);
    }
    frob.sqrt().min(rowmax)
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    (l1, l2)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (l1, l2) = eig2(a, b, c, d);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Givens rotation with real cosine: G * [f; g] = [r; 0], where the
/// rows transform as (c*r1 + s*r2, -conj(s)*r1 + c*r2).
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let fn_ = f.norm();
    let denom = (fn_ * fn_ + gn * gn).sqrt();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let c = fn_ / denom;
    let s = (f / fn_) * g.conj() / denom;
    (c, s)
}

fn rot_rows(h: &mut CMat4, i: usize, j: usize, c: f64, s: Complex64, col0: usize) {
    for k in col0..4 {
        let x = h[(i, k)];
        let y = h[(j, k)];
        h[(i, k)] = c * x + s * y;
        h[(j, k)] = -s.conj() * x + c * y;
    }
}

fn rot_cols(h: &mut CMat4, i: usize, j: usize, c: f64, s: Complex64, row_end: usize) {
    for k in 0..row_end {
        let x = h[(k, i)];
        let y = h[(k, j)];
        h[(k, i)] = c * x + s.conj() * y;
        h[(k, j)] = -s * x + c * y;
    }
}

/// Similarity reduction to upper Hessenberg form via Givens rotations.
fn hessenberg4(h: &mut CMat4) {
    // zero (3,0), (2,0), (3,1); bottom-up per column
    for &(col, row) in &[(0usize, 3usize), (0, 2), (1, 3)] {
        let pivot_row = row - 1;
        if h[(row, col)].norm() == 0.0 {
            continue;
        }
        let (c, s) = givens(h[(pivot_row, col)], h[(row, col)]);
        rot_rows(h, pivot_row, row, c, s, 0);
        rot_cols(h, pivot_row, row, c, s, 4);
        h[(row, col)] = Complex64::new(0.0, 0.0);
    }
}

/// One explicit shifted QR step on the Hessenberg window [lo, hi].
fn qr_step(h: &mut CMat4, lo: usize, hi: usize, shift: Complex64) {
    let mut rots = [(1.0f64, Complex64::new(0.0, 0.0)); 3];
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut n_rot = 0;
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        rot_rows(h, k, k + 1, c, s, k);
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        rots[n_rot] = (c, s);
        n_rot += 1;
    }
    for (idx, k) in (lo..hi).enumerate() {
        let (c, s) = rots[idx];
        rot_cols(h, k, k + 1, c, s, (k + 2).min(hi) + 1);
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Deterministic xorshift for reproducible pseudo-random matrices.
    pub struct XorShift(u64);
    impl XorShift {
        pub fn new(seed: u64) -> Self {
            Self(seed.max(1))
        }
        pub fn next_f64(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }
        pub fn next_c(&mut self) -> Complex64 {
            Complex64::new(self.next_f64(), self.next_f64())
        }
    }

    pub fn random_cmat(rng: &mut XorShift) -> CMat4 {
        CMat4::from_fn(|_, _| rng.next_c())
    }

    /// Characteristic polynomial coefficients via Newton's identities.
    fn char_poly(a: &CMat4) -> [Complex64; 5] {
        let m2 = a * a;
        let m3 = m2 * a;
        let m4 = m3 * a;
        let t1 = a.trace();
        let t2 = m2.trace();
        let t3 = m3.trace();
        let t4 = m4.trace();
        let e1 = t1;
        let e2 = (e1 * t1 - t2) / 2.0;
        let e3 = (e2 * t1 - e1 * t2 + t3) / 3.0;
        let e4 = (e3 * t1 - e2 * t2 + e1 * t3 - t4) / 4.0;
        // λ^4 - e1 λ^3 + e2 λ^2 - e3 λ + e4
        [
            Complex64::new(1.0, 0.0),
            -e1,
            e2,
            -e3,
            e4,
        ]
    }

    /// Durand-Kerner root finder for the monic quartic; the independent
    /// oracle for the QR-based eigensolver.
    fn durand_kerner(coeffs: &[Complex64; 5]) -> [Complex64; 4] {
        let eval = |z: Complex64| {
            let mut v = coeffs[0];
            for c in &coeffs[1..] {
                v = v * z + c;
            }
            v
        };
        let seed = Complex64::new(0.4, 0.9);
        let mut roots = [seed, seed * seed, seed * seed * seed, seed * seed * seed * seed];
        for _ in 0..500 {
            let mut max_step = 0.0f64;
            for i in 0..4 {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..4 {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                max_step = max_step.max(step.norm());
            }
            if max_step < 1e-14 {
                break;
            }
        }
        roots
    }

    fn assert_same_multiset(a: &[Complex64; 4], b: &[Complex64; 4], tol: f64) {
        let mut used = [false; 4];
        for x in a {
            let mut best = (f64::INFINITY, 5usize);
            for (j, y) in b.iter().enumerate() {
                if !used[j] {
                    let d = (x - y).norm();
                    if d < best.0 {
                        best = (d, j);
                    }
                }
            }
            assert!(best.0 < tol, "eigenvalue {x} unmatched (closest {})", best.0);
            used[best.1] = true;
        }
    }

    #[test]
    fn lu4_identity_and_diagonal() {
        let b = RVec4::new(2.0, 4.0, 5.0, 10.0);
        let x = solve4(&RMat4::identity(), &b).unwrap();
        assert_eq!(x, b);
        let a = RMat4::from_diagonal(&RVec4::new(2.0, 4.0, 5.0, 10.0));
        let x = solve4(&a, &b).unwrap();
        assert_eq!(x, RVec4::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn lu4_residual_small_on_random_systems() {
        let mut rng = XorShift::new(7);
        for _ in 0..50 {
            let a = RMat4::from_fn(|_, _| rng.next_f64()) + 4.0 * RMat4::identity();
            let b = RVec4::from_fn(|_, _| rng.next_f64());
            let x = solve4(&a, &b).unwrap();
            let r = (a * x - b).norm();
            assert!(r <= 1e-12 * b.norm().max(1.0), "residual {r}");
        }
    }

    #[test]
    fn lu4_rejects_singular() {
        let mut a = RMat4::identity();
        a[(2, 2)] = 0.0;
        a[(2, 3)] = 0.0;
        a[(3, 2)] = 0.0;
        a[(3, 3)] = 0.0;
        assert!(matches!(
            Lu4::factor(&a),
            Err(Error::SingularDiagonal(None))
        ));
    }

    #[test]
    fn lu4_complex_solve() {
        let mut rng = XorShift::new(11);
        for _ in 0..20 {
            let a = random_cmat(&mut rng) + CMat4::identity() * Complex64::new(3.0, 0.0);
            let b = CVec4::from_fn(|_, _| rng.next_c());
            let x = solve4(&a, &b).unwrap();
            let r = (a * x - b).norm();
            assert!(r <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let d = CMat4::from_diagonal(&CVec4::new(
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -0.25),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.1, 0.0),
        ));
        let evs = eigenvalues4(&d).unwrap();
        let expect = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -0.25),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.1, 0.0),
        ];
        assert_same_multiset(&evs, &expect, 1e-12);
        assert!((spectral_radius4(&d).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn spectral_radius_of_identity_is_one() {
        assert!((spectral_radius4(&CMat4::identity()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_match_companion_oracle_on_random_matrices() {
        let mut rng = XorShift::new(42);
        for iter in 0..400 {
            let scale = if iter % 3 == 0 { 100.0 } else { 1.0 };
            let a = random_cmat(&mut rng) * Complex64::new(scale, 0.0);
            let evs = eigenvalues4(&a).unwrap();
            let oracle = durand_kerner(&char_poly(&a));
            assert_same_multiset(&evs, &oracle, 1e-8 * scale.max(1.0));
        }
    }

    #[test]
    fn eigenvalues_handle_defective_jordan_block() {
        // Jordan block with eigenvalue 2 of multiplicity 4
        let mut a = CMat4::identity() * Complex64::new(2.0, 0.0);
        for i in 0..3 {
            a[(i, i + 1)] = Complex64::new(1.0, 0.0);
        }
        let evs = eigenvalues4(&a).unwrap();
        for e in evs {
            assert!((e - Complex64::new(2.0, 0.0)).norm() < 1e-3);
        }
        // spectral radius is well conditioned even though eigenvalues are not
        assert!((spectral_radius4(&a).unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn upper_bound_dominates_spectral_radius() {
        let mut rng = XorShift::new(3);
        for _ in 0..100 {
            let a = random_cmat(&mut rng);
            let rho = spectral_radius4(&a).unwrap();
            assert!(spectral_radius_upper_bound(&a) >= rho - 1e-12);
        }
    }
}
