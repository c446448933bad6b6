//! Linear maps from real parameters to structured Hermitian matrices.
//!
//! Every parameter `θ_i` contributes `θ_i F_i` to the PSD matrix. `F_i` is
//! either a combination of shift matrices on a (one- or two-level) Toeplitz
//! block, or a short list of explicit entries. The structure lets the solvers
//! evaluate `F(θ)`, its adjoint and the Schur complement matrix
//! `H_ij = Re tr(F_i G F_j G)` without ever forming the `F_i` densely.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

use super::fft::{autocorrelate4, correlate4};

/// A square block of the PSD matrix with two-level Toeplitz structure.
/// Position `(i, p)` (inner `i < inner`, outer `p < outer`) sits at row
/// `offset + i + inner·p`. A one-level block has `outer = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftBlock {
    pub offset: usize,
    pub inner: usize,
    pub outer: usize,
}

impl ShiftBlock {
    pub fn one_level(offset: usize, n: usize) -> Self {
        Self { offset, inner: n, outer: 1 }
    }

    pub fn two_level(offset: usize, inner: usize, outer: usize) -> Self {
        Self { offset, inner, outer }
    }

    pub fn size(&self) -> usize {
        self.inner * self.outer
    }

    fn shift_width(&self) -> usize {
        2 * self.inner - 1
    }

    fn shift_count(&self) -> usize {
        self.shift_width() * (2 * self.outer - 1)
    }

    /// Dense index of shift `(s_in, s_out)`.
    #[inline]
    fn shift_index(&self, s_in: isize, s_out: isize) -> usize {
        (s_in + self.inner as isize - 1) as usize + self.shift_width() * (s_out + self.outer as isize - 1) as usize
    }

    /// Local position to absolute row.
    #[inline]
    fn row(&self, i: usize, p: usize) -> usize {
        self.offset + i + self.inner * p
    }
}

/// How one real parameter enters the PSD matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamMap {
    /// `Σ coef · E_s` on block `block`, where `E_s` has ones at
    /// `((i, p), (i + s_in, p + s_out))`. Terms must form a Hermitian matrix.
    Shift { block: usize, terms: Vec<(isize, isize, C64)> },
    /// `Σ coef · e_r e_c^T`, stored with mirrored entries already expanded.
    Entries(Vec<(usize, usize, C64)>),
}

impl ParamMap {
    /// Real part of shift `s`: `E_s + E_{−s}` (or `I`-like `E_0` for `s = 0`).
    pub fn shift_re(block: usize, s_in: isize, s_out: isize) -> Self {
        let one = C64::new(1.0, 0.0);
        let terms = if s_in == 0 && s_out == 0 {
            vec![(0, 0, one)]
        } else {
            vec![(s_in, s_out, one), (-s_in, -s_out, one)]
        };
        ParamMap::Shift { block, terms }
    }

    /// Imaginary part of shift `s ≠ 0`: `i·E_s − i·E_{−s}`.
    pub fn shift_im(block: usize, s_in: isize, s_out: isize) -> Self {
        debug_assert!(s_in != 0 || s_out != 0);
        let i = C64::new(0.0, 1.0);
        ParamMap::Shift { block, terms: vec![(s_in, s_out, i), (-s_in, -s_out, -i)] }
    }

    /// Hermitian pair `coef·e_r e_c^T + conj(coef)·e_c e_r^T` (`r ≠ c`), or a
    /// real diagonal entry when `r = c`.
    pub fn entry(r: usize, c: usize, coef: C64) -> Self {
        if r == c {
            ParamMap::Entries(vec![(r, r, C64::new(coef.re, 0.0))])
        } else {
            ParamMap::Entries(vec![(r, c, coef), (c, r, coef.conj())])
        }
    }
}

/// The affine map `θ ↦ F0 + Σ θ_i F_i` with its structure.
#[derive(Clone, Debug)]
pub struct Structure {
    dim: usize,
    blocks: Vec<ShiftBlock>,
    params: Vec<ParamMap>,
}

/// Direct Toeplitz–Toeplitz Schur assembly is used below this work estimate.
const DIRECT_KERNEL_LIMIT: usize = 20_000_000;

impl Structure {
    pub fn new(dim: usize, blocks: Vec<ShiftBlock>, params: Vec<ParamMap>) -> Result<Self> {
        for b in &blocks {
            if b.inner == 0 || b.outer == 0 || b.offset + b.size() > dim {
                return Err(Error::Dimension(format!("shift block {b:?} does not fit a {dim}x{dim} matrix")));
            }
        }
        for p in &params {
            match p {
                ParamMap::Shift { block, terms } => {
                    let b = blocks
                        .get(*block)
                        .ok_or_else(|| Error::Dimension(format!("parameter refers to missing block {block}")))?;
                    for &(si, so, _) in terms {
                        if si.unsigned_abs() >= b.inner || so.unsigned_abs() >= b.outer {
                            return Err(Error::Dimension(format!("shift ({si},{so}) outside block {b:?}")));
                        }
                    }
                }
                ParamMap::Entries(list) => {
                    for &(r, c, _) in list {
                        if r >= dim || c >= dim {
                            return Err(Error::Dimension(format!("entry ({r},{c}) outside {dim}x{dim}")));
                        }
                        if blocks.iter().any(|b| in_block(b, r) && in_block(b, c)) {
                            return Err(Error::Dimension(format!("entry ({r},{c}) overlaps a shift block")));
                        }
                    }
                }
            }
        }
        Ok(Self { dim, blocks, params })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn blocks(&self) -> &[ShiftBlock] {
        &self.blocks
    }

    pub fn params(&self) -> &[ParamMap] {
        &self.params
    }

    /// `Σ θ_i F_i`.
    pub fn apply(&self, theta: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        self.apply_into(theta, &mut out);
        out
    }

    /// `out += Σ θ_i F_i`.
    pub fn apply_into(&self, theta: &[f64], out: &mut ComplexMatrix) {
        assert_eq!(theta.len(), self.params.len());
        let mut gens: Vec<Vec<C64>> = self.blocks.iter().map(|b| vec![C64::new(0.0, 0.0); b.shift_count()]).collect();
        for (p, &t) in self.params.iter().zip(theta) {
            if t == 0.0 {
                continue;
            }
            match p {
                ParamMap::Shift { block, terms } => {
                    let b = &self.blocks[*block];
                    for &(si, so, coef) in terms {
                        gens[*block][b.shift_index(si, so)] += coef * t;
                    }
                }
                ParamMap::Entries(list) => {
                    for &(r, c, coef) in list {
                        out[(r, c)] += coef * t;
                    }
                }
            }
        }
        for (b, g) in self.blocks.iter().zip(&gens) {
            for q in 0..b.outer {
                for j in 0..b.inner {
                    let col = b.row(j, q);
                    for p in 0..b.outer {
                        for i in 0..b.inner {
                            let s = b.shift_index(j as isize - i as isize, q as isize - p as isize);
                            out[(b.row(i, p), col)] += g[s];
                        }
                    }
                }
            }
        }
    }

    /// Shift sums `D(s) = tr(E_s Z) = Σ_a Z[a+s, a]` for one block.
    fn shift_sums(&self, b: &ShiftBlock, z: &ComplexMatrix) -> Vec<C64> {
        let mut d = vec![C64::new(0.0, 0.0); b.shift_count()];
        for q in 0..b.outer {
            for j in 0..b.inner {
                let col = b.row(j, q);
                for p in 0..b.outer {
                    for i in 0..b.inner {
                        // Z[row(i,p), row(j,q)] with row = col + s ⇒ s = (i−j, p−q)
                        d[b.shift_index(i as isize - j as isize, p as isize - q as isize)] += z[(b.row(i, p), col)];
                    }
                }
            }
        }
        d
    }

    /// Adjoint map: `F^*(Z)_i = Re⟨F_i, Z⟩ = Re tr(F_i Z)`.
    pub fn adjoint(&self, z: &ComplexMatrix) -> Vec<f64> {
        let sums: Vec<Vec<C64>> = self.blocks.iter().map(|b| self.shift_sums(b, z)).collect();
        self.params
            .iter()
            .map(|p| match p {
                ParamMap::Shift { block, terms } => {
                    let b = &self.blocks[*block];
                    terms.iter().map(|&(si, so, coef)| (coef * sums[*block][b.shift_index(si, so)]).re).sum()
                }
                ParamMap::Entries(list) => list.iter().map(|&(r, c, coef)| (coef * z[(c, r)]).re).sum(),
            })
            .collect()
    }

    /// Gram matrix `Re⟨F_i, F_j⟩`, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let np = self.params.len();
        let mut g = vec![0.0; np * np];
        // group parameters by the keys they touch
        let mut touch: HashMap<(usize, usize, isize), Vec<(usize, C64, f64)>> = HashMap::new();
        for (idx, p) in self.params.iter().enumerate() {
            match p {
                ParamMap::Shift { block, terms } => {
                    let b = &self.blocks[*block];
                    for &(si, so, coef) in terms {
                        let mult = ((b.inner - si.unsigned_abs()) * (b.outer - so.unsigned_abs())) as f64;
                        let key = (usize::MAX - *block, b.shift_index(si, so), 0);
                        touch.entry(key).or_default().push((idx, coef, mult));
                    }
                }
                ParamMap::Entries(list) => {
                    for &(r, c, coef) in list {
                        touch.entry((r, c, 1)).or_default().push((idx, coef, 1.0));
                    }
                }
            }
        }
        for list in touch.values() {
            for &(i, ci, m) in list {
                for &(j, cj, _) in list {
                    g[i * np + j] += (ci.conj() * cj).re * m;
                }
            }
        }
        g
    }

    /// Schur complement matrix `H_ij = Re tr(F_i G F_j G)` for Hermitian `G`,
    /// row-major.
    pub fn schur(&self, g: &ComplexMatrix) -> Vec<f64> {
        let np = self.params.len();
        let mut h = vec![0.0; np * np];

        let mut by_block: Vec<Vec<usize>> = vec![Vec::new(); self.blocks.len()];
        let mut entry_params = Vec::new();
        for (idx, p) in self.params.iter().enumerate() {
            match p {
                ParamMap::Shift { block, .. } => by_block[*block].push(idx),
                ParamMap::Entries(_) => entry_params.push(idx),
            }
        }

        // shift × shift
        for (ba, pa) in by_block.iter().enumerate() {
            if pa.is_empty() {
                continue;
            }
            for (bb, pb) in by_block.iter().enumerate().skip(ba) {
                if pb.is_empty() {
                    continue;
                }
                let (a, b) = (&self.blocks[ba], &self.blocks[bb]);
                let k = shift_kernel(a, b, g);
                let wb = b.shift_count();
                for &i in pa {
                    let ParamMap::Shift { terms: ti, .. } = &self.params[i] else { unreachable!() };
                    for &j in pb {
                        let ParamMap::Shift { terms: tj, .. } = &self.params[j] else { unreachable!() };
                        let mut acc = 0.0;
                        for &(si, so, ci) in ti {
                            let row = a.shift_index(si, so) * wb;
                            for &(ti_, to, cj) in tj {
                                acc += (ci * cj * k[row + b.shift_index(ti_, to)]).re;
                            }
                        }
                        h[i * np + j] = acc;
                        h[j * np + i] = acc;
                    }
                }
            }
        }

        // shift × entries: W(s) = tr(G E_s G e_r e_c^T) = Σ_a G[c, a] G[a+s, r]
        let mut positions: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pos_list: Vec<(usize, usize)> = Vec::new();
        for &j in &entry_params {
            let ParamMap::Entries(list) = &self.params[j] else { unreachable!() };
            for &(r, c, _) in list {
                positions.entry((r, c)).or_insert_with(|| {
                    pos_list.push((r, c));
                    pos_list.len() - 1
                });
            }
        }
        let entry_slots: Vec<Vec<(usize, C64)>> = entry_params
            .iter()
            .map(|&j| {
                let ParamMap::Entries(list) = &self.params[j] else { unreachable!() };
                list.iter().map(|&(r, c, coef)| (positions[&(r, c)], coef)).collect()
            })
            .collect();
        for (bi, pa) in by_block.iter().enumerate() {
            if pa.is_empty() || entry_params.is_empty() {
                continue;
            }
            let b = &self.blocks[bi];
            let w = entry_kernels(b, g, &pos_list);
            // per entry parameter, the coefficient-weighted sum of its kernels
            let combined: Vec<Vec<C64>> = entry_slots
                .iter()
                .map(|slots| {
                    let mut v = vec![C64::new(0.0, 0.0); b.shift_count()];
                    for &(slot, cj) in slots {
                        for (d, x) in v.iter_mut().zip(&w[slot]) {
                            *d += cj * x;
                        }
                    }
                    v
                })
                .collect();
            for &i in pa {
                let ParamMap::Shift { terms: ti, .. } = &self.params[i] else { unreachable!() };
                let ti: Vec<(usize, C64)> = ti.iter().map(|&(si, so, ci)| (b.shift_index(si, so), ci)).collect();
                for (&j, v) in entry_params.iter().zip(&combined) {
                    let acc: f64 = ti.iter().map(|&(idx, ci)| (ci * v[idx]).re).sum();
                    h[i * np + j] = acc;
                    h[j * np + i] = acc;
                }
            }
        }

        // entries × entries: tr(G e_r e_c^T G e_r' e_c'^T) = G[c', r] G[c, r']
        for (ii, &i) in entry_params.iter().enumerate() {
            let ParamMap::Entries(li) = &self.params[i] else { unreachable!() };
            for &j in &entry_params[ii..] {
                let ParamMap::Entries(lj) = &self.params[j] else { unreachable!() };
                let mut acc = 0.0;
                for &(r, c, ci) in li {
                    for &(r2, c2, cj) in lj {
                        acc += (ci * cj * g[(c2, r)] * g[(c, r2)]).re;
                    }
                }
                h[i * np + j] = acc;
                h[j * np + i] = acc;
            }
        }
        h
    }
}

/// Groups sharing a column at least this large use one matrix product.
const KERNEL_GEMM_MIN: usize = 8;

/// [`entry_kernel`] for every position. A mirrored position reuses its
/// partner through `W_(c,r)(s) = conj(W_(r,c)(−s))` (G is Hermitian), and
/// positions sharing a column `c` are computed as one product
/// `W = P_c · G[block, rows]` with `P_c[s, y] = G[c, y − s]`.
fn entry_kernels(b: &ShiftBlock, g: &ComplexMatrix, pos: &[(usize, usize)]) -> Vec<Vec<C64>> {
    let index: HashMap<(usize, usize), usize> = pos.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut mirror_of = vec![None; pos.len()];
    let mut by_col: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (k, &(r, c)) in pos.iter().enumerate() {
        match index.get(&(c, r)) {
            Some(&m) if m < k => mirror_of[k] = Some(m),
            _ => by_col.entry(c).or_default().push(k),
        }
    }
    let mut out: Vec<Vec<C64>> = vec![Vec::new(); pos.len()];
    let count = b.shift_count();
    for (&c, members) in &by_col {
        if members.len() < KERNEL_GEMM_MIN {
            for &k in members {
                out[k] = entry_kernel(b, g, pos[k].0, c);
            }
            continue;
        }
        let size = b.size();
        let mut pc = ComplexMatrix::zeros(count, size);
        for yp in 0..b.outer {
            for yi in 0..b.inner {
                let y = yi + b.inner * yp;
                for ap in 0..b.outer {
                    for ai in 0..b.inner {
                        let s = b.shift_index(yi as isize - ai as isize, yp as isize - ap as isize);
                        pc[(s, y)] = g[(c, b.row(ai, ap))];
                    }
                }
            }
        }
        let rows = ComplexMatrix::from_fn(size, members.len(), |y, j| g[(b.offset + y, pos[members[j]].0)]);
        let w = pc.matmul(&rows);
        for (j, &k) in members.iter().enumerate() {
            out[k] = w.column(j).to_vec();
        }
    }
    for k in 0..pos.len() {
        if let Some(m) = mirror_of[k] {
            out[k] = out[m].iter().rev().map(|z| z.conj()).collect();
        }
    }
    out
}

fn in_block(b: &ShiftBlock, r: usize) -> bool {
    r >= b.offset && r < b.offset + b.size()
}

/// `K(s, t) = tr(G E^A_s G E^B_t)` for all shift pairs, row-major over
/// (shift of A, shift of B).
fn shift_kernel(a: &ShiftBlock, b: &ShiftBlock, g: &ComplexMatrix) -> Vec<C64> {
    let (na, nb) = (a.size(), b.size());
    if na * na * nb * nb <= DIRECT_KERNEL_LIMIT {
        shift_kernel_direct(a, b, g)
    } else {
        shift_kernel_fft(a, b, g)
    }
}

/// Σ over positions a ∈ A (with a+s ∈ A) and c ∈ B (with c+t ∈ B) of
/// `G[c+t, a] · G[a+s, c]`.
fn shift_kernel_direct(a: &ShiftBlock, b: &ShiftBlock, g: &ComplexMatrix) -> Vec<C64> {
    let wb = b.shift_count();
    let mut k = vec![C64::new(0.0, 0.0); a.shift_count() * wb];
    let pos_a: Vec<(usize, usize)> = (0..a.outer).flat_map(|p| (0..a.inner).map(move |i| (i, p))).collect();
    let pos_b: Vec<(usize, usize)> = (0..b.outer).flat_map(|p| (0..b.inner).map(move |i| (i, p))).collect();
    // U[a][d] = G[d, a] for d ∈ B; V[x][c] = G[x, c] for x ∈ A
    let mut row_t: Vec<(usize, C64)> = Vec::with_capacity(b.size());
    for &(ai, ap) in &pos_a {
        let ra = a.row(ai, ap);
        for &(ci, cp) in &pos_b {
            let rc = b.row(ci, cp);
            // collect G[c+t, a] over all valid t once
            row_t.clear();
            for &(di, dp) in &pos_b {
                let t = b.shift_index(di as isize - ci as isize, dp as isize - cp as isize);
                row_t.push((t, g[(b.row(di, dp), ra)]));
            }
            for &(xi, xp) in &pos_a {
                let s = a.shift_index(xi as isize - ai as isize, xp as isize - ap as isize);
                let v = g[(a.row(xi, xp), rc)];
                let krow = &mut k[s * wb..(s + 1) * wb];
                for &(t, u) in &row_t {
                    krow[t] += u * v;
                }
            }
        }
    }
    k
}

/// Same kernel through a zero-padded 4-D FFT correlation.
fn shift_kernel_fft(a: &ShiftBlock, b: &ShiftBlock, g: &ComplexMatrix) -> Vec<C64> {
    // dims ordered (a_in, a_out, b_in, b_out)
    let dims = [a.inner, a.outer, b.inner, b.outer];
    let len = dims.iter().product::<usize>();
    let mut u = vec![C64::new(0.0, 0.0); len];
    let mut v = vec![C64::new(0.0, 0.0); len];
    let idx = |x: [usize; 4]| x[0] + dims[0] * (x[1] + dims[1] * (x[2] + dims[2] * x[3]));
    for ap in 0..a.outer {
        for ai in 0..a.inner {
            let ra = a.row(ai, ap);
            for bp in 0..b.outer {
                for bi in 0..b.inner {
                    let rb = b.row(bi, bp);
                    let k = idx([ai, ap, bi, bp]);
                    u[k] = g[(rb, ra)];
                    v[k] = g[(ra, rb)];
                }
            }
        }
    }
    // corr(σ) = Σ_x U[x] V[x+σ]; K(s, t) = corr(s, −t). On a diagonal block
    // U = conj(V) because G is Hermitian.
    let corr = if a == b { autocorrelate4(&v, dims) } else { correlate4(&u, &v, dims) };
    let wb = b.shift_count();
    let mut k = vec![C64::new(0.0, 0.0); a.shift_count() * wb];
    let o_si = corr.axis_offsets(0, a.inner, false);
    let o_so = corr.axis_offsets(1, a.outer, false);
    let o_ti = corr.axis_offsets(2, b.inner, true);
    let o_to = corr.axis_offsets(3, b.outer, true);
    let data = corr.data();
    // shift_index is (s_in + inner − 1) + width·(s_out + outer − 1), matching
    // the increasing-lag order of the offset tables
    let mut out = k.iter_mut();
    for &fo in &o_so {
        for &fi in &o_si {
            let sa = fo + fi;
            for &go in &o_to {
                for &gi in &o_ti {
                    *out.next().expect("kernel size") = data[sa + go + gi];
                }
            }
        }
    }
    k
}

/// `W(s) = Σ_a G[c, a] G[a+s, r]` over positions of block `b`.
fn entry_kernel(b: &ShiftBlock, g: &ComplexMatrix, r: usize, c: usize) -> Vec<C64> {
    let (ni, no) = (b.inner, b.outer);
    let wi = b.shift_width();
    // x[a] = G[c, a], y[q] = G[q, r] over block positions (inner fastest)
    let x: Vec<C64> = (0..b.size()).map(|k| g[(c, b.offset + k)]).collect();
    let y = &g.column(r)[b.offset..b.offset + b.size()];
    let mut w = vec![C64::new(0.0, 0.0); b.shift_count()];
    for ap in 0..no {
        let xa = &x[ap * ni..(ap + 1) * ni];
        for yp in 0..no {
            let ya = &y[yp * ni..(yp + 1) * ni];
            // row of shifts with s_out = yp − ap
            let base = wi * (yp + no - 1 - ap);
            let wrow = &mut w[base..base + wi];
            for (ai, &xv) in xa.iter().enumerate() {
                if xv == C64::new(0.0, 0.0) {
                    continue;
                }
                // s_in = yi − ai ranges over (−ai ..= ni−1−ai) → index yi + ni−1−ai
                let dst = &mut wrow[ni - 1 - ai..2 * ni - 1 - ai];
                for (d, &yv) in dst.iter_mut().zip(ya) {
                    *d += xv * yv;
                }
            }
        }
    }
    w
}
