use super::states::{LumpedState, StateSpace};
use super::ExactError;
use crate::dynamics::ProcessKind;
use std::collections::BTreeMap;
use std::io::{self, Write};

/// Truncation bound on the neglected Poisson tail in [`GeneratorMatrix::transient`].
pub const TAIL_BOUND: f64 = 1e-12;

/// Normalized Poisson(`m`) weights for `k = 0..=K`, with the mass beyond `K`
/// bounded by [`TAIL_BOUND`].
fn poisson_weights(m: f64) -> Result<Vec<f64>, ExactError> {
    let mode = m.floor() as usize;
    let cap = (m + 40.0 * m.sqrt() + 200.0).ceil() as usize;
    // Unnormalized, w[mode] = 1.
    let mut w = vec![0.0; mode + 1];
    w[mode] = 1.0;
    for k in (1..=mode).rev() {
        w[k - 1] = w[k] * k as f64 / m;
        if w[k - 1] < 1e-300 {
            break;
        }
    }
    let mut total: f64 = w.iter().sum();
    let mut k = mode;
    loop {
        let next = w[k] * m / (k + 1) as f64;
        if (k + 2) as f64 > m && next / (1.0 - m / (k + 2) as f64) <= TAIL_BOUND * total {
            break;
        }
        if k >= cap {
            return Err(ExactError::Parameter(format!(
                "Poisson tail did not vanish within {cap} terms"
            )));
        }
        w.push(next);
        total += next;
        k += 1;
    }
    for x in &mut w {
        *x /= total;
    }
    Ok(w)
}

/// Sparse CTMC rate matrix: off-diagonal rates per row plus the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    /// From off-diagonal `(from, to, rate)` triplets; self-loops are dropped
    /// and repeated entries summed.
    pub fn from_rates(n: usize, rates: &[(usize, usize, f64)]) -> Result<Self, ExactError> {
        let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for &(i, j, q) in rates {
            if i >= n || j >= n || !(q >= 0.0 && q.is_finite()) {
                return Err(ExactError::Parameter(format!(
                    "bad rate entry ({i}, {j}, {q})"
                )));
            }
            if i != j && q > 0.0 {
                *acc[i].entry(j).or_default() += q;
            }
        }
        let rows: Vec<Vec<(usize, f64)>> =
            acc.into_iter().map(|m| m.into_iter().collect()).collect();
        let diag = rows
            .iter()
            .map(|r| -r.iter().map(|&(_, q)| q).sum::<f64>())
            .collect();
        Ok(GeneratorMatrix { rows, diag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    /// Largest absolute row sum error.
    pub fn row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.diag)
            .map(|(r, d)| (r.iter().map(|&(_, q)| q).sum::<f64>() + d).abs())
            .fold(0.0, f64::max)
    }

    /// Distribution at time `t` from a point mass at `init`, by uniformization
    /// with rate `max |q_ii|`. Poisson weights are built outward from the
    /// mode and normalized; the right tail is cut once its bound falls below
    /// [`TAIL_BOUND`].
    pub fn transient(&self, init: usize, t: f64) -> Result<Vec<f64>, ExactError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(ExactError::Parameter(format!(
                "time must be finite and >= 0, got {t}"
            )));
        }
        if init >= self.len() {
            return Err(ExactError::Parameter(format!(
                "state index {init} out of range"
            )));
        }
        let n = self.len();
        let mut v = vec![0.0; n];
        v[init] = 1.0;
        let rate = self.diag.iter().fold(0.0f64, |m, d| m.max(-d));
        if t == 0.0 || rate == 0.0 {
            return Ok(v);
        }
        let weights = poisson_weights(rate * t)?;
        let mut out = vec![0.0; n];
        let mut next = vec![0.0; n];
        for (k, &w) in weights.iter().enumerate() {
            if k > 0 {
                // v <- v P with P = I + Q / rate
                next.fill(0.0);
                for i in 0..n {
                    let vi = v[i];
                    if vi == 0.0 {
                        continue;
                    }
                    next[i] += vi * (1.0 + self.diag[i] / rate);
                    for &(j, q) in &self.rows[i] {
                        next[j] += vi * q / rate;
                    }
                }
                std::mem::swap(&mut v, &mut next);
            }
            if w > 0.0 {
                for (o, x) in out.iter_mut().zip(&v) {
                    *o += w * x;
                }
            }
        }
        Ok(out)
    }

    /// Sparse triplet text: one `row col rate` line per nonzero entry,
    /// diagonal included.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# row col rate")?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut entries: Vec<(usize, f64)> = row.clone();
            if self.diag[i] != 0.0 {
                entries.push((i, self.diag[i]));
            }
            entries.sort_by_key(|e| e.0);
            for (j, q) in entries {
                writeln!(w, "{i} {j} {q}")?;
            }
        }
        Ok(())
    }
}

/// Generator of a process on the lumped states of a small graph.
#[derive(Debug, Clone)]
pub struct LumpedGenerator {
    pub space: StateSpace,
    pub matrix: GeneratorMatrix,
    pub kind: ProcessKind,
    pub lambda: f64,
    pub r: f64,
}

/// Assembles the rate matrix. Block deaths (mutation) or individual deaths
/// occur at rate 1; each pair `x` occupied, `y` vacant, `x ~ y` adds `lambda r`
/// towards `y` as a new block and `lambda (1-r)` towards `y` joining the
/// block of `x`.
pub fn build_generator(
    space: &StateSpace,
    kind: ProcessKind,
    lambda: f64,
    r: f64,
) -> Result<LumpedGenerator, ExactError> {
    if !matches!(kind, ProcessKind::Mutation | ProcessKind::IndividualDeath) {
        return Err(ExactError::Parameter(format!(
            "no exact generator for {kind:?}"
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) || !(0.0..=1.0).contains(&r) {
        return Err(ExactError::Parameter(format!(
            "need lambda >= 0 and r in [0, 1], got {lambda}, {r}"
        )));
    }
    let n = space.vertex_count();
    let mut rates = Vec::new();
    for (i, s) in space.states().iter().enumerate() {
        let mut push = |target: LumpedState, q: f64| -> Result<(), ExactError> {
            if q > 0.0 {
                rates.push((i, space.index_of(&target)?, q));
            }
            Ok(())
        };
        match kind {
            ProcessKind::Mutation => {
                for b in 0..s.blocks().len() {
                    push(s.without_block(b), 1.0)?;
                }
            }
            _ => {
                for v in (0..n).filter(|v| s.occupied() >> v & 1 == 1) {
                    push(s.without_vertex(v), 1.0)?;
                }
            }
        }
        for (b, &block) in s.blocks().iter().enumerate() {
            for x in (0..n).filter(|x| block >> x & 1 == 1) {
                let vacant = space.adjacency(x) & !s.occupied();
                for y in (0..n).filter(|y| vacant >> y & 1 == 1) {
                    push(s.with_singleton(y), lambda * r)?;
                    push(s.join(b, y), lambda * (1.0 - r))?;
                }
            }
        }
    }
    let matrix = GeneratorMatrix::from_rates(space.len(), &rates)?;
    Ok(LumpedGenerator {
        space: space.clone(),
        matrix,
        kind,
        lambda,
        r,
    })
}
