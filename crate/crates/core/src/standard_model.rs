//! The tensor model `(H^0 (x) H^2) + (H (x) H) + (H^2 (x) H^0)` restricted to its active part:
//! the window tensor block plus the two lines `f (x) g` and `g (x) f`.
//!
//! Coordinates: `e_i (x) e_j` sits at index `i * two_g + j`, then `f (x) g`, then `g (x) f`.
//! The inner product is the tensor-block Hermitian product (the `f`/`g` lines are null), and
//! `beta(x, y) = x_gf conj(y_fg) + x_fg conj(y_gf) - <x, y>`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frobenius::{FrobeniusOperator, SpectralWindow};
use crate::linalg::{self, c, CMatrix, CVector, Cx, ONE};
use crate::report::{bounded_by_prefix, Check, Report, Sequence, SequencePoint};

/// Absolute tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Relative tolerance for trace identities.
pub const TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardModel {
    pub two_g: usize,
    pub q: f64,
    /// Action of `F` on `f` and on `g`.
    pub ext_f: Cx,
    pub ext_g: Cx,
    #[serde(with = "linalg::matrix_serde")]
    pub window: CMatrix,
}

pub fn build_standard_model(f: &FrobeniusOperator, w: &SpectralWindow) -> StandardModel {
    StandardModel { two_g: f.two_g, q: w.q, ext_f: f.ext_f, ext_g: f.ext_g, window: f.window.clone() }
}

/// Coordinates with an independent log scale for each of the three summands, so that
/// `Phi^n x` stays representable far beyond the overflow point of `q^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledVector {
    pub coords: CVector,
    /// Log scales of the tensor block, the `f (x) g` line and the `g (x) f` line.
    pub log_scales: [f64; 3],
}

impl ScaledVector {
    pub fn plain(coords: CVector) -> Self {
        ScaledVector { coords, log_scales: [0.0; 3] }
    }

    /// Dense coordinates; overflows to infinity when the scale is out of range.
    pub fn to_coords(&self) -> CVector {
        let d2 = self.coords.len() - 2;
        CVector::from_fn(self.coords.len(), |k, _| self.coords[k] * self.log_scales[part(k, d2)].exp())
    }

    fn renormalize(&mut self) {
        let d2 = self.coords.len() - 2;
        for (p, range) in [(0, 0..d2), (1, d2..d2 + 1), (2, d2 + 1..d2 + 2)] {
            let peak = range.clone().map(|k| self.coords[k].norm()).fold(0.0_f64, f64::max);
            if peak > 0.0 && !(1e-100..=1e100).contains(&peak) {
                for k in range {
                    self.coords[k] /= peak;
                }
                self.log_scales[p] += peak.ln();
            }
        }
    }
}

fn part(k: usize, d2: usize) -> usize {
    match k.cmp(&d2) {
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Greater => 2,
    }
}

impl StandardModel {
    pub fn dim_v(&self) -> usize {
        self.two_g * self.two_g + 2
    }

    pub fn tensor_index(&self, i: usize, j: usize) -> usize {
        i * self.two_g + j
    }

    pub fn fg_index(&self) -> usize {
        self.two_g * self.two_g
    }

    pub fn gf_index(&self) -> usize {
        self.two_g * self.two_g + 1
    }

    pub fn labels(&self) -> Vec<String> {
        let d = self.two_g;
        let mut out: Vec<String> = (0..d * d).map(|k| format!("e{}(x)e{}", k / d + 1, k % d + 1)).collect();
        out.push("f(x)g".into());
        out.push("g(x)f".into());
        out
    }

    pub fn basis_vector(&self, k: usize) -> CVector {
        let mut v = CVector::zeros(self.dim_v());
        v[k] = ONE;
        v
    }

    pub fn v01(&self) -> CVector {
        self.basis_vector(self.fg_index())
    }

    pub fn v10(&self) -> CVector {
        self.basis_vector(self.gf_index())
    }

    pub fn h_a(&self) -> CVector {
        self.v01() + self.v10()
    }

    /// `sum_i e_i (x) e_i + v01 + v10`.
    pub fn v_delta(&self) -> CVector {
        let mut v = self.v01() + self.v10();
        for i in 0..self.two_g {
            v[self.tensor_index(i, i)] = ONE;
        }
        v
    }

    /// Hermitian product, conjugate-linear in `y`; `f (x) g` and `g (x) f` are null.
    pub fn inner_product(&self, x: &CVector, y: &CVector) -> Cx {
        let d2 = self.fg_index();
        (0..d2).map(|k| x[k] * y[k].conj()).sum()
    }

    pub fn beta_form(&self, x: &CVector, y: &CVector) -> Cx {
        let (fg, gf) = (self.fg_index(), self.gf_index());
        x[gf] * y[fg].conj() + x[fg] * y[gf].conj() - self.inner_product(x, y)
    }

    /// `e^{offset} <x, y>` for scaled vectors.
    pub fn inner_scaled(&self, x: &ScaledVector, y: &ScaledVector, log_offset: f64) -> Cx {
        let d2 = self.fg_index();
        let raw: Cx = (0..d2).map(|k| x.coords[k] * y.coords[k].conj()).sum();
        raw * (x.log_scales[0] + y.log_scales[0] + log_offset).exp()
    }

    /// `e^{offset} beta(x, y)` for scaled vectors.
    pub fn beta_scaled(&self, x: &ScaledVector, y: &ScaledVector, log_offset: f64) -> Cx {
        let (fg, gf) = (self.fg_index(), self.gf_index());
        let a = x.coords[gf] * y.coords[fg].conj() * (x.log_scales[2] + y.log_scales[1] + log_offset).exp();
        let b = x.coords[fg] * y.coords[gf].conj() * (x.log_scales[1] + y.log_scales[2] + log_offset).exp();
        a + b - self.inner_scaled(x, y, log_offset)
    }

    /// One application of `Phi = I (x) F`: tensor rows map `r -> F r`, `f (x) g -> ext_g f (x) g`,
    /// `g (x) f -> ext_f g (x) f`.
    fn step(&self, x: &mut ScaledVector) {
        let d = self.two_g;
        let block = CMatrix::from_row_slice(d, d, &x.coords.as_slice()[..d * d]);
        let next = block * self.window.transpose();
        for i in 0..d {
            for j in 0..d {
                x.coords[i * d + j] = next[(i, j)];
            }
        }
        let (fg, gf) = (self.fg_index(), self.gf_index());
        x.coords[fg] *= self.ext_g;
        x.coords[gf] *= self.ext_f;
        x.renormalize();
    }

    /// `Phi^n x`. Negative powers are unrepresentable by construction (`n: usize`).
    pub fn apply_phi(&self, x: &CVector, n: usize) -> ScaledVector {
        let mut v = ScaledVector::plain(x.clone());
        for _ in 0..n {
            self.step(&mut v);
        }
        v
    }

    /// `x, Phi x, Phi^2 x, ...`.
    pub fn orbit(&self, x: &CVector) -> impl Iterator<Item = ScaledVector> + '_ {
        std::iter::successors(Some(ScaledVector::plain(x.clone())), move |v| {
            let mut next = v.clone();
            self.step(&mut next);
            Some(next)
        })
    }

    fn seeded_real(&self, rng: &mut ChaCha8Rng) -> CVector {
        CVector::from_fn(self.dim_v(), |_, _| c(rng.random_range(-1.0..=1.0), 0.0))
    }

    fn seeded_complex(&self, rng: &mut ChaCha8Rng) -> CVector {
        CVector::from_fn(self.dim_v(), |_, _| c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
    }

    /// Random vector in the span of `v01` and `v10` (null for the inner product).
    fn seeded_null(&self, rng: &mut ChaCha8Rng) -> CVector {
        let mut v = CVector::zeros(self.dim_v());
        v[self.fg_index()] = c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        v[self.gf_index()] = c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        v
    }

    /// Basis-vector axioms (a)-(d), the orbit identities (e), (f) and the growth sequence (g)
    /// for `n = 0..=n_max`.
    pub fn verify_ait1(&self, n_max: usize) -> Report {
        let mut report = Report::new("AIT1");
        let dim = self.dim_v();
        let basis: Vec<CVector> = (0..dim).map(|k| self.basis_vector(k)).collect();
        let mut sym: f64 = 0.0;
        for x in &basis {
            for y in &basis {
                let bxy = self.beta_form(x, y);
                let byx = self.beta_form(y, x);
                sym = sym.max((byx - bxy).norm()).max(bxy.im.abs());
            }
        }
        report.push(
            Check::within("AIT1-a", sym, EXACT_TOL).with_note("beta(y,x) = beta(x,y), real on real basis vectors"),
        );
        let (v01, v10) = (self.v01(), self.v10());
        report.push(Check::within("AIT1-b", self.beta_form(&v01, &v01).norm(), EXACT_TOL));
        report.push(Check::within("AIT1-c", self.beta_form(&v10, &v10).norm(), EXACT_TOL));
        report.push(Check::within("AIT1-d", (self.beta_form(&v01, &v10) - ONE).norm(), EXACT_TOL));

        let v01s = ScaledVector::plain(v01);
        let v10s = ScaledVector::plain(v10);
        let ln_q = self.q.ln();
        let (mut e_worst, mut f_worst) = (0.0_f64, 0.0_f64);
        let mut e_witness = None;
        let mut f_witness = None;
        let mut points = Vec::with_capacity(n_max + 1);
        for (n, v) in self.orbit(&self.v_delta()).take(n_max + 1).enumerate() {
            let e = (self.beta_scaled(&v, &v01s, 0.0) - ONE).norm();
            if e > e_worst {
                e_worst = e;
                e_witness = Some(n);
            }
            let f = (self.beta_scaled(&v, &v10s, -(n as f64) * ln_q) - ONE).norm();
            if f > f_worst {
                f_worst = f;
                f_witness = Some(n);
            }
            let g = self.beta_scaled(&v, &v, 0.0);
            let over = self.beta_scaled(&v, &v, -(n as f64) * ln_q).norm();
            points.push(SequencePoint { n, value_re: g.re, value_im: g.im, value_over_qn: over });
        }
        let power_witness = |n: Option<usize>| n.map(|n| vec![[n as f64, 0.0]]);
        report.push(
            Check::within("AIT1-e", e_worst, EXACT_TOL)
                .with_note("beta(Phi^n v_delta, v01) = 1")
                .with_witness(power_witness(e_witness)),
        );
        report.push(
            Check::within("AIT1-f", f_worst, EXACT_TOL)
                .with_note("beta(Phi^n v_delta, v10) = q^n, constant 1 in O(q^n)")
                .with_witness(power_witness(f_witness)),
        );
        let check = growth_check("AIT1-g", "beta(Phi^n v_delta, Phi^n v_delta)", &mut report.sequences, points);
        report.push(check);
        report
    }

    /// Hodge property on `samples` seeded real vectors projected onto `beta(x, h_a) = 0`.
    pub fn verify_ait2_hodge(&self, samples: usize, seed: u64) -> Report {
        let mut report = Report::new("AIT2");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h_a = self.h_a();
        let v01 = self.v01();
        let (fg, gf) = (self.fg_index(), self.gf_index());
        let (mut sign_worst, mut form_worst, mut constraint_worst) = (f64::NEG_INFINITY, 0.0_f64, 0.0_f64);
        let mut witness = None;
        for _ in 0..samples {
            let mut x = self.seeded_real(&mut rng);
            let mean = (x[fg] + x[gf]) * 0.5;
            x[fg] -= mean;
            x[gf] -= mean;
            constraint_worst = constraint_worst.max(self.beta_form(&x, &h_a).norm());
            let b = self.beta_form(&x, &x).re;
            if b > sign_worst {
                sign_worst = b;
                if b > EXACT_TOL {
                    witness = Some(linalg::complex_pairs(&x));
                }
            }
            let closed = -2.0 * self.beta_form(&x, &v01).re.powi(2) - self.inner_product(&x, &x).re;
            form_worst = form_worst.max((b - closed).abs() / b.abs().max(1.0));
        }
        report.push(Check::within("constraint beta(x, h_a) = 0", constraint_worst, EXACT_TOL));
        report.push(
            Check::within("AIT2", sign_worst, EXACT_TOL)
                .with_note(format!("max beta(x,x) over {samples} constrained samples"))
                .with_witness(witness),
        );
        report.push(
            Check::within("AIT2 closed form", form_worst, EXACT_TOL).with_note("beta(x,x) = -2 beta(x,v01)^2 - <x,x>"),
        );
        report
    }

    /// `tr(F^n) = <Phi^n v_delta, v_delta>` for `n = 0..=n_max`.
    pub fn verify_ait3_trace(&self, n_max: usize) -> Report {
        let mut report = Report::new("AIT3");
        let vd = ScaledVector::plain(self.v_delta());
        let mut power = linalg::identity(self.two_g);
        let mut worst = 0.0_f64;
        let mut witness = None;
        for (n, v) in self.orbit(&self.v_delta()).take(n_max + 1).enumerate() {
            if n > 0 {
                power = &power * &self.window;
            }
            let tr = power.trace();
            let pairing = self.inner_scaled(&v, &vd, 0.0);
            let r = (tr - pairing).norm() / (1.0 + tr.norm());
            if r > worst {
                worst = r;
                witness = Some(vec![[n as f64, 0.0], [tr.re, tr.im], [pairing.re, pairing.im]]);
            }
        }
        report.push(
            Check::within("AIT3", worst, TRACE_TOL)
                .with_note(format!("|tr(F^n) - <Phi^n v_delta, v_delta>| / (1 + |tr|), n <= {n_max}"))
                .with_witness(witness),
        );
        report
    }

    /// Inner-product axioms: symmetry and semidefiniteness on seeded samples, the exact zeros
    /// (b)-(f), the compatibility relation with `beta`, and the growth sequence (g).
    pub fn verify_ip(&self, n_max: usize, seed: u64) -> Report {
        let mut report = Report::new("IP");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut herm, mut real, mut psd, mut compat) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        let (v01, v10) = (self.v01(), self.v10());
        for _ in 0..256 {
            let x = self.seeded_complex(&mut rng);
            let y = self.seeded_complex(&mut rng);
            herm = herm.max((self.inner_product(&y, &x) - self.inner_product(&x, &y).conj()).norm());
            psd = psd.max(-self.inner_product(&x, &x).re).max(self.inner_product(&x, &x).im.abs());
            let xr = self.seeded_real(&mut rng);
            let yr = self.seeded_real(&mut rng);
            real = real
                .max((self.inner_product(&yr, &xr) - self.inner_product(&xr, &yr)).norm())
                .max(self.inner_product(&xr, &yr).im.abs());
            let rebuilt = self.beta_form(&x, &v01) * self.beta_form(&v10, &y)
                + self.beta_form(&x, &v10) * self.beta_form(&v01, &y)
                - self.beta_form(&x, &y);
            let ip = self.inner_product(&x, &y);
            compat = compat.max((rebuilt - ip).norm() / ip.norm().max(1.0));
        }
        report.push(
            Check::within("IP-a", herm.max(real), EXACT_TOL).with_note("Hermitian; real and symmetric on real vectors"),
        );
        report.push(Check::within("IP-b", self.inner_product(&v01, &v01).norm(), EXACT_TOL));
        report.push(Check::within("IP-c", self.inner_product(&v10, &v10).norm(), EXACT_TOL));
        report.push(Check::within("IP-d", self.inner_product(&v01, &v10).norm(), EXACT_TOL));

        let v01s = ScaledVector::plain(v01);
        let v10s = ScaledVector::plain(v10);
        let ln_q = self.q.ln();
        let (mut e_worst, mut f_worst) = (0.0_f64, 0.0_f64);
        let mut points = Vec::with_capacity(n_max + 1);
        for (n, v) in self.orbit(&self.v_delta()).take(n_max + 1).enumerate() {
            // Scale-free zeros: pair against the orbit's own magnitude.
            e_worst = e_worst.max(self.inner_scaled(&v, &v01s, -v.log_scales[0]).norm());
            f_worst = f_worst.max(self.inner_scaled(&v, &v10s, -v.log_scales[0]).norm());
            let g = self.inner_scaled(&v, &v, 0.0);
            points.push(SequencePoint {
                n,
                value_re: g.re,
                value_im: g.im,
                value_over_qn: self.inner_scaled(&v, &v, -(n as f64) * ln_q).norm(),
            });
        }
        report.push(Check::within("IP-e", e_worst, EXACT_TOL).with_note("<Phi^n v_delta, v01> = 0"));
        report.push(Check::within("IP-f", f_worst, EXACT_TOL).with_note("<Phi^n v_delta, v10> = 0"));
        report.push(Check::within("semidefinite", psd, EXACT_TOL).with_note("<x,x> >= 0 on 256 seeded samples"));
        report.push(Check::within("compatibility", compat, EXACT_TOL).with_note("<x,y> recomputed from beta"));
        let check = growth_check("IP-g", "<Phi^n v_delta, Phi^n v_delta>", &mut report.sequences, points);
        report.push(check);
        report
    }

    /// `beta(x,x) <= 2 beta(x,v01) beta(x,v10)` for a real vector `x`.
    pub fn check_castelnuovo_severi(&self, x: &CVector) -> Check {
        let lhs = self.beta_form(x, x).re;
        let rhs = 2.0 * (self.beta_form(x, &self.v01()) * self.beta_form(x, &self.v10())).re;
        let slack = EXACT_TOL * lhs.abs().max(rhs.abs()).max(1.0);
        Check::within("Castelnuovo-Severi", lhs - rhs, slack).with_witness(Some(linalg::complex_pairs(x)))
    }

    /// `|<x,y>| <= sqrt(<x,x><y,y>)`, including null `x`.
    pub fn check_cauchy_schwarz(&self, x: &CVector, y: &CVector) -> Check {
        let lhs = self.inner_product(x, y).norm();
        let rhs = (self.inner_product(x, x).re.max(0.0) * self.inner_product(y, y).re.max(0.0)).sqrt();
        let slack = EXACT_TOL * rhs.max(1.0);
        Check::within("Cauchy-Schwarz", lhs - rhs, slack)
            .with_witness(Some(linalg::complex_pairs(x).into_iter().chain(linalg::complex_pairs(y)).collect()))
    }

    /// Castelnuovo–Severi on `samples` seeded real vectors, a quarter of them in the null span.
    pub fn castelnuovo_severi_sweep(&self, samples: usize, seed: u64) -> Report {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let checks = (0..samples).map(|k| {
            let mut x = if k % 4 == 3 { self.seeded_null(&mut rng) } else { self.seeded_real(&mut rng) };
            x.iter_mut().for_each(|z| z.im = 0.0);
            self.check_castelnuovo_severi(&x)
        });
        summarize("Castelnuovo-Severi", samples, checks)
    }

    /// Cauchy–Schwarz on `samples` seeded complex pairs; every fourth `x` is null.
    pub fn cauchy_schwarz_sweep(&self, samples: usize, seed: u64) -> Report {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let checks = (0..samples).map(|k| {
            let x = if k % 4 == 3 { self.seeded_null(&mut rng) } else { self.seeded_complex(&mut rng) };
            let y = self.seeded_complex(&mut rng);
            self.check_cauchy_schwarz(&x, &y)
        });
        summarize("Cauchy-Schwarz", samples, checks)
    }

    /// `1 - tr(F^n) + q^n = beta(Phi^n v_delta, v_delta)`, and the `H^0`, `H^2` terms as
    /// `beta` products.
    pub fn lefschetz_decomposition(&self, n: usize) -> Report {
        let mut report = Report::new(format!("Lefschetz n={n}"));
        let v = self.apply_phi(&self.v_delta(), n);
        let vd = ScaledVector::plain(self.v_delta());
        let v01 = ScaledVector::plain(self.v01());
        let v10 = ScaledVector::plain(self.v10());
        let tr_h1 = linalg::mat_pow(&self.window, n).trace();
        let tr_h2 = c(self.q.powi(n as i32), 0.0);
        let lhs = ONE - tr_h1 + tr_h2;
        let rhs = self.beta_scaled(&v, &vd, 0.0);
        let scale = 1.0 + tr_h1.norm() + tr_h2.norm();
        report.push(
            Check::within("Lefschetz", (lhs - rhs).norm() / scale, TRACE_TOL)
                .with_witness(Some(vec![[lhs.re, lhs.im], [rhs.re, rhs.im]])),
        );
        let h0 = self.beta_scaled(&v, &v01, 0.0) * self.beta_scaled(&v10, &vd, 0.0);
        report.push(
            Check::within("H0 term", (h0 - ONE).norm(), TRACE_TOL)
                .with_note("beta(Phi^n v_delta, v01) beta(v10, v_delta) = 1"),
        );
        let h2 = self.beta_scaled(&v, &v10, 0.0) * self.beta_scaled(&v01, &vd, 0.0);
        report.push(
            Check::within("H2 term", (h2 - tr_h2).norm() / tr_h2.norm(), TRACE_TOL)
                .with_note("beta(Phi^n v_delta, v10) beta(v01, v_delta) = q^n"),
        );
        report
    }

    /// [`Self::lefschetz_decomposition`] for every `n <= n_max`, keeping the worst residual per check.
    pub fn lefschetz_range(&self, n_max: usize) -> Report {
        let mut merged = Report::new(format!("Lefschetz n<={n_max}"));
        for n in 0..=n_max {
            for check in self.lefschetz_decomposition(n).checks {
                match merged.checks.iter_mut().find(|c| c.name == check.name) {
                    Some(existing) => {
                        if check.worst_residual > existing.worst_residual || (existing.pass && !check.pass) {
                            *existing = check;
                        }
                    }
                    None => merged.push(check),
                }
            }
        }
        merged
    }
}

fn growth_check(name: &str, label: &str, sequences: &mut Vec<Sequence>, points: Vec<SequencePoint>) -> Check {
    let ratios: Vec<f64> = points.iter().map(|p| p.value_over_qn).collect();
    let max_over_qn = ratios.iter().copied().fold(0.0_f64, f64::max);
    let bounded = bounded_by_prefix(&ratios);
    let prefix = ratios[..(ratios.len() / 4).max(1)].iter().copied().fold(0.0_f64, f64::max);
    sequences.push(Sequence { name: name.to_string(), points, max_over_qn, bounded });
    let check = Check::within(name, max_over_qn, 4.0 * prefix.max(1.0));
    check.with_note(format!(
        "{label} / q^n: max {max_over_qn:.6e}; bounded means max <= 4 x first-quarter max (floor 1)"
    ))
}

fn summarize(name: &str, samples: usize, checks: impl Iterator<Item = Check>) -> Report {
    let mut report = Report::new(name);
    let mut worst: Option<Check> = None;
    let mut failures = 0usize;
    for check in checks {
        if !check.pass {
            failures += 1;
        }
        let replace = match &worst {
            None => true,
            Some(w) => {
                (w.pass && !check.pass)
                    || (w.pass == check.pass && check.worst_residual - check.tolerance > w.worst_residual - w.tolerance)
            }
        };
        if replace {
            worst = Some(check);
        }
    }
    if let Some(mut w) = worst {
        if w.pass {
            w.witness = None;
        }
        report.push(w.with_note(format!("{failures} failures in {samples} seeded samples")));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{frobenius_via_exponential, spectral_window};
    use crate::linalg::ZERO;
    use crate::operator_lab::{build_jordan_operator, EigenvalueSpec, OperatorSpec};

    fn model(blocks: &[(f64, f64, usize)], seed: u64, y: f64, q: f64) -> StandardModel {
        let spec = OperatorSpec::new(blocks.iter().map(|&(re, im, m)| EigenvalueSpec::new(c(re, im), m)).collect())
            .with_seed(seed);
        let a = build_jordan_operator(&spec).unwrap();
        let w = spectral_window(&spec, y, q).unwrap();
        build_standard_model(&frobenius_via_exponential(&a, &w).unwrap(), &w)
    }

    fn scalar_model(two_g: usize) -> StandardModel {
        StandardModel { two_g, q: 2.0, ext_f: ONE, ext_g: c(2.0, 0.0), window: linalg::identity(two_g) }
    }

    #[test]
    fn v_delta_layout() {
        let m = scalar_model(2);
        assert_eq!(m.dim_v(), 6);
        let expected: Vec<Cx> = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0].iter().map(|&x| c(x, 0.0)).collect();
        assert_eq!(m.v_delta().as_slice(), expected.as_slice());
        let one = scalar_model(1);
        assert_eq!(one.dim_v(), 3);
        assert_eq!(one.v_delta().as_slice(), &[ONE, ONE, ONE]);
        assert_eq!(model(&[(0.5, 1.0, 2), (0.5, -1.0, 2)], 0, 2.0, 2.0).dim_v(), 18);
        assert_eq!(m.h_a(), m.v01() + m.v10());
    }

    #[test]
    fn phi_examples() {
        let m = model(&[(0.5, 1.0, 1)], 0, 2.0, 2.0);
        let x = m.v_delta();
        assert_eq!(m.apply_phi(&x, 0).to_coords(), x);
        let lam = c(2.0, 0.0).powc(c(0.5, 1.0));
        let got = m.apply_phi(&x, 1).to_coords();
        assert!((got[0] - lam).norm() < 1e-14);
        assert!((got[1] - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(got[2], ONE);
        assert_eq!(m.apply_phi(&m.v10(), 57).to_coords(), m.v10());
    }

    #[test]
    fn form_examples() {
        let m = scalar_model(2);
        let (v01, v10) = (m.v01(), m.v10());
        assert_eq!(m.inner_product(&v01, &v01), ZERO);
        let e12 = m.basis_vector(m.tensor_index(0, 1));
        assert_eq!(m.inner_product(&e12, &e12), ONE);
        assert_eq!(m.inner_product(&m.v_delta(), &m.v_delta()), c(2.0, 0.0));
        assert_eq!(m.beta_form(&v01, &v10), ONE);
        let e11 = m.basis_vector(0);
        assert_eq!(m.beta_form(&e11, &e11), c(-1.0, 0.0));
        assert_eq!(m.beta_form(&m.h_a(), &m.h_a()), c(2.0, 0.0));
        assert_eq!(m.beta_form(&m.v_delta(), &m.v_delta()), c(0.0, 0.0));
    }

    #[test]
    fn ait1_examples() {
        let m = model(&[(0.5, 1.0, 1), (0.5, -1.0, 1)], 0, 2.0, 2.0);
        let r = m.verify_ait1(20);
        assert!(r.passed(), "{r:?}");
        let g = &r.sequences[0];
        assert!(g.bounded);
        // beta(Phi^n v_delta, Phi^n v_delta) = 2 q^n - 2 q^n = 0 for unitary-like diagonal windows.
        assert!(g.points.iter().all(|p| p.value_over_qn < 1e-12));
    }

    #[test]
    fn hodge_examples() {
        let m = scalar_model(2);
        let x = m.v01() - m.v10();
        assert_eq!(m.beta_form(&x, &m.h_a()), ZERO);
        assert_eq!(m.beta_form(&x, &x), c(-2.0, 0.0));
        let t = m.basis_vector(1) * c(3.0, 0.0);
        assert_eq!(m.beta_form(&t, &m.h_a()), ZERO);
        assert_eq!(m.beta_form(&t, &t), c(-9.0, 0.0));
        assert_eq!(m.beta_form(&m.h_a(), &m.h_a()), c(2.0, 0.0));
        assert!(m.verify_ait2_hodge(500, 1).passed());
    }

    #[test]
    fn ait3_examples() {
        let m = model(&[(0.5, 1.0, 1), (0.5, -1.0, 1)], 0, 2.0, 2.0);
        let v = m.apply_phi(&m.v_delta(), 1);
        let pairing = m.inner_scaled(&v, &ScaledVector::plain(m.v_delta()), 0.0);
        let expected = 2.0 * 2f64.sqrt() * 2f64.ln().cos();
        assert!((pairing - c(expected, 0.0)).norm() < 1e-12);
        assert!((expected - 2.175736174027818).abs() < 1e-12);
        assert!(m.verify_ait3_trace(30).passed());

        let j = model(&[(0.5, 1.0, 2)], 0, 2.0, 2.0);
        let v = j.apply_phi(&j.v_delta(), 3);
        let pairing = j.inner_scaled(&v, &ScaledVector::plain(j.v_delta()), 0.0);
        let expected = c(2.0, 0.0).powc(c(1.5, 3.0)) * 2.0;
        assert!((pairing - expected).norm() < 1e-12);
    }

    #[test]
    fn ip_examples() {
        let m = model(&[(0.5, 1.0, 1), (0.5, 3.0, 1)], 0, 4.0, 2.0);
        let r = m.verify_ip(40, 9);
        assert!(r.passed(), "{r:?}");
        let g = &r.sequences[0];
        assert!(g.points.iter().all(|p| (p.value_over_qn - 2.0).abs() < 1e-12));
    }

    #[test]
    fn ip_g_fails_for_growing_models() {
        let m = model(&[(0.4, 1.0, 1), (0.6, 1.0, 1)], 0, 2.0, 2.0);
        assert!(!m.verify_ip(256, 1).check("IP-g").unwrap().pass);
        let j = model(&[(0.5, 1.0, 2)], 0, 2.0, 2.0);
        assert!(!j.verify_ip(256, 1).check("IP-g").unwrap().pass);
    }

    #[test]
    fn inequality_examples() {
        let m = scalar_model(2);
        assert!(m.check_castelnuovo_severi(&m.h_a()).pass);
        assert!(m.check_castelnuovo_severi(&(m.basis_vector(2) * c(2.0, 0.0))).pass);
        let y = m.v_delta();
        let null = m.v01() * c(3.0, -1.0);
        assert_eq!(m.inner_product(&null, &y), ZERO);
        assert!(m.check_cauchy_schwarz(&null, &y).pass);
        assert!(m.check_cauchy_schwarz(&y, &y).pass);
        assert!(m.castelnuovo_severi_sweep(400, 2).passed());
        assert!(m.cauchy_schwarz_sweep(400, 3).passed());
    }

    #[test]
    fn lefschetz_examples() {
        let m = model(&[(0.5, 1.0, 1), (0.5, -1.0, 1)], 0, 2.0, 2.0);
        let r0 = m.lefschetz_decomposition(0);
        assert!(r0.passed());
        let r1 = m.lefschetz_decomposition(1);
        assert!(r1.passed());
        let v = m.apply_phi(&m.v_delta(), 1);
        let rhs = m.beta_scaled(&v, &ScaledVector::plain(m.v_delta()), 0.0);
        assert!((rhs.re - 0.824263825972182).abs() < 1e-12);
        let mut bad = m.clone();
        bad.ext_g = c(2.5, 0.0);
        let r = bad.lefschetz_decomposition(2);
        assert!(!r.check("H2 term").unwrap().pass);
        assert!(!r.check("Lefschetz").unwrap().pass);
        assert!(r.check("H0 term").unwrap().pass);
        assert!(m.lefschetz_range(30).passed());
    }

    #[test]
    fn orbit_survives_overflow_range() {
        let j = model(&[(0.5, 1.0, 3)], 0, 2.0, 2.0);
        let r = j.verify_ait1(2000);
        for name in ["AIT1-e", "AIT1-f"] {
            assert!(r.check(name).unwrap().pass, "{name}");
        }
        assert!(r.sequences[0].points.last().unwrap().value_over_qn.is_finite());
    }
}
