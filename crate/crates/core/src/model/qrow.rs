use std::collections::BTreeMap;

use super::spec::{ModelSpec, Rates};
use super::ModelError;
use crate::special::{binomial_pmf, poisson_pmf};

/// Poisson extra-link tails beyond this mass are folded into the last support point.
pub const POISSON_TAIL_TOL: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowVariant {
    Base,
    /// Rows of (X, Z): entries flagged `catastrophe` increment Z.
    Bivariate,
    Weighted,
    Deaths,
    MultiBirth,
    RewiringLimit,
    /// Inhomogeneous rewiring row at graph size m.
    RewiringAt(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowEntry {
    pub target: usize,
    pub rate: f64,
    /// Set only in bivariate rows.
    pub catastrophe: bool,
}

/// One row of a generator. Off-diagonal entries for distinct targets
/// are merged, except in bivariate rows where the Z increment differs.
#[derive(Clone, Debug, PartialEq)]
pub struct QRow {
    pub state: usize,
    pub entries: Vec<RowEntry>,
    pub diagonal: f64,
}

impl QRow {
    fn from_map(state: usize, map: BTreeMap<usize, f64>, diagonal: f64) -> Self {
        let entries = map
            .into_iter()
            .filter(|&(j, r)| r > 0.0 && j != state)
            .map(|(target, rate)| RowEntry { target, rate, catastrophe: false })
            .collect();
        Self { state, entries, diagonal }
    }

    pub fn zero(state: usize) -> Self {
        Self { state, entries: Vec::new(), diagonal: 0.0 }
    }

    /// Σ off-diagonal + diagonal; zero for a conservative row.
    pub fn row_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.rate).sum::<f64>() + self.diagonal
    }

    /// Off-diagonal rate into `target` (bivariate self-entries excluded).
    pub fn rate_to(&self, target: usize) -> f64 {
        if target == self.state {
            return self.diagonal;
        }
        self.entries.iter().filter(|e| e.target == target).map(|e| e.rate).sum()
    }

    pub fn exit_rate(&self) -> f64 {
        -self.diagonal
    }

    pub fn max_target(&self) -> usize {
        self.entries.iter().map(|e| e.target).max().unwrap_or(self.state).max(self.state)
    }
}

/// Exact row k of the generator selected by `variant`.
pub fn q_row(spec: &ModelSpec, variant: RowVariant, k: usize) -> Result<QRow, ModelError> {
    match variant {
        RowVariant::Base => Ok(base_row(spec, k)),
        RowVariant::Bivariate => Ok(bivariate_row(spec, k)),
        RowVariant::Weighted => weighted_row(spec, k),
        RowVariant::Deaths => deaths_row(spec, k),
        RowVariant::MultiBirth => multibirth_row(spec, k),
        RowVariant::RewiringLimit => {
            let r = spec.rewiring().ok_or(ModelError::MissingVariant("rewiring"))?.r;
            rewiring_row(spec, k, r, None)
        }
        RowVariant::RewiringAt(m) => {
            let r = spec.rewiring().ok_or(ModelError::MissingVariant("rewiring"))?.r;
            if m < 1 || k + 1 > m {
                return Err(ModelError::StateOutOfRange { k, limit: m.saturating_sub(1) });
            }
            rewiring_row(spec, k, r, Some(m))
        }
    }
}

fn star_row(spec: &ModelSpec) -> QRow {
    match spec.star_rate() {
        Some(rate) => QRow {
            state: 0,
            entries: vec![RowEntry { target: 1, rate, catastrophe: false }],
            diagonal: -rate,
        },
        None => QRow::zero(0),
    }
}

fn base_row(spec: &ModelSpec, k: usize) -> QRow {
    if k == 0 {
        return star_row(spec);
    }
    let up = k as f64 * spec.alpha_k(k);
    let beta = spec.beta_k(k);
    let pi = spec.thinning().row(k);
    let mut entries = Vec::with_capacity(k + 1);
    for (j, &w) in pi.iter().enumerate().take(k) {
        let rate = beta * w;
        if rate > 0.0 {
            entries.push(RowEntry { target: j, rate, catastrophe: false });
        }
    }
    if up > 0.0 {
        entries.push(RowEntry { target: k + 1, rate: up, catastrophe: false });
    }
    QRow { state: k, entries, diagonal: -(up + beta * (1.0 - pi[k])) }
}

fn bivariate_row(spec: &ModelSpec, k: usize) -> QRow {
    if k == 0 {
        return star_row(spec);
    }
    let up = k as f64 * spec.alpha_k(k);
    let beta = spec.beta_k(k);
    let pi = spec.thinning().row(k);
    let mut entries = Vec::with_capacity(k + 2);
    for (j, &w) in pi.iter().enumerate() {
        let rate = beta * w;
        if rate > 0.0 {
            entries.push(RowEntry { target: j, rate, catastrophe: true });
        }
    }
    if up > 0.0 {
        entries.push(RowEntry { target: k + 1, rate: up, catastrophe: false });
    }
    QRow { state: k, entries, diagonal: -(up + beta) }
}

fn weighted_row(spec: &ModelSpec, k: usize) -> Result<QRow, ModelError> {
    if k == 0 {
        return Err(ModelError::StateOutOfRange { k, limit: 1 });
    }
    if !spec.is_constrained() || !spec.has_retention() {
        let alpha = spec.alpha();
        return Err(ModelError::ConstraintViolated { k, alpha_k: spec.alpha_k(k), alpha });
    }
    let alpha = spec.alpha();
    let beta = spec.beta_k(k);
    let pk = spec.p_k(k);
    let pi = spec.thinning().row(k);
    let mut entries = Vec::with_capacity(k + 1);
    let kp = k as f64 * pk;
    for j in 1..k {
        let rate = pk * beta * (j as f64 * pi[j] / kp);
        if rate > 0.0 {
            entries.push(RowEntry { target: j, rate, catastrophe: false });
        }
    }
    let up = alpha * (k + 1) as f64;
    entries.push(RowEntry { target: k + 1, rate: up, catastrophe: false });
    let diagonal = if k == 1 {
        -2.0 * alpha
    } else {
        -(-1.0 + k as f64 * alpha + beta * (1.0 - pi[k]) + 2.0 * alpha)
    };
    Ok(QRow { state: k, entries, diagonal })
}

fn deaths_row(spec: &ModelSpec, k: usize) -> Result<QRow, ModelError> {
    if spec.deaths().is_none() {
        return Err(ModelError::MissingVariant("deaths"));
    }
    if k == 0 {
        return Ok(star_row(spec));
    }
    let kf = k as f64;
    let up = kf * spec.alpha_k(k);
    let down = kf * spec.delta_k(k);
    let beta = spec.beta_k(k);
    let pi = spec.thinning().row(k);
    let mut map = BTreeMap::new();
    for (j, &w) in pi.iter().enumerate().take(k) {
        *map.entry(j).or_insert(0.0) += beta * w;
    }
    *map.entry(k - 1).or_insert(0.0) += down;
    *map.entry(k + 1).or_insert(0.0) += up;
    Ok(QRow::from_map(k, map, -(up + down + beta * (1.0 - pi[k]))))
}

fn multibirth_row(spec: &ModelSpec, k: usize) -> Result<QRow, ModelError> {
    let mb = spec.multi_births().ok_or(ModelError::MissingVariant("multi_births"))?;
    if k == 0 {
        return Ok(star_row(spec));
    }
    let kf = k as f64;
    let beta = spec.beta_k(k);
    let pi = spec.thinning().row(k);
    let mut map = BTreeMap::new();
    for (j, &w) in pi.iter().enumerate().take(k) {
        *map.entry(j).or_insert(0.0) += beta * w;
    }
    let mut total = 0.0;
    for j in mb.support() {
        let a = mb.a(k, j);
        total += a;
        let target = (k as i64 + j) as usize;
        *map.entry(target).or_insert(0.0) += kf * a;
    }
    Ok(QRow::from_map(k, map, -(kf * total + beta * (1.0 - pi[k]))))
}

/// Law of the extra-link count: Bi(m−1−k, r/m) at size m, Po(r) in the limit.
pub(crate) fn extra_link_law(k: usize, r: f64, m: Option<usize>) -> Vec<f64> {
    match m {
        Some(m) => binomial_head(m - 1 - k, (r / m as f64).min(1.0)),
        None => {
            let (mut row, _) = poisson_pmf(r, POISSON_TAIL_TOL);
            let s: f64 = row.iter().sum();
            if let Some(last) = row.last_mut() {
                *last += (1.0 - s).max(0.0);
            }
            row
        }
    }
}

/// Bi(n, p) for small np: the full row when n is small, otherwise the head of
/// the row up to a negligible tail, folded into the last retained point.
fn binomial_head(n: usize, p: f64) -> Vec<f64> {
    if n <= 60 || p >= 0.05 {
        return binomial_pmf(n, p);
    }
    let mut row = vec![(n as f64 * (-p).ln_1p()).exp()];
    let ratio = p / (1.0 - p);
    let mean = n as f64 * p;
    let mut acc = row[0];
    let mut j = 0usize;
    while j < n && (j as f64 <= mean || row[j] > POISSON_TAIL_TOL * 1e-3) {
        let next = row[j] * ratio * (n - j) as f64 / (j + 1) as f64;
        row.push(next);
        acc += next;
        j += 1;
    }
    if let Some(last) = row.last_mut() {
        *last += (1.0 - acc).max(0.0);
    }
    row
}

/// Copy law (qδ_k + (1−q)Π_k) convolved with the extra-link law.
pub(crate) fn rewiring_copy_law(spec: &ModelSpec, k: usize, r: f64, m: Option<usize>) -> Vec<f64> {
    let q = spec.q_k(k);
    let mut base = spec.thinning().row(k);
    for w in base.iter_mut() {
        *w *= 1.0 - q;
    }
    base[k] += q;
    let extra = extra_link_law(k, r, m);
    let mut out = vec![0.0; base.len() + extra.len() - 1];
    for (i, &a) in base.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in extra.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Gain rate to k+1: αk + r(1 − (k+1)/m) at size m, αk + r in the limit.
pub(crate) fn rewiring_gain(spec: &ModelSpec, k: usize, r: f64, m: Option<usize>) -> f64 {
    let alpha = spec.alpha_k(k.max(1));
    let extra = match m {
        Some(m) => r * (1.0 - (k + 1) as f64 / m as f64),
        None => r,
    };
    alpha * k as f64 + extra
}

fn rewiring_row(spec: &ModelSpec, k: usize, r: f64, m: Option<usize>) -> Result<QRow, ModelError> {
    if matches!(spec.rates(), Rates::General { .. }) {
        return Err(ModelError::NeedsRetention);
    }
    let gain = rewiring_gain(spec, k, r, m);
    let copy = rewiring_copy_law(spec, k, r, m);
    let mut map = BTreeMap::new();
    for (j, &w) in copy.iter().enumerate() {
        if j != k && w > 0.0 {
            *map.entry(j).or_insert(0.0) += w;
        }
    }
    *map.entry(k + 1).or_insert(0.0) += gain;
    Ok(QRow::from_map(k, map, -(gain + 1.0 - copy[k])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spec::{MultiBirth, RewiringMode, Sequence};
    use std::collections::BTreeMap;

    #[test]
    fn base_row_k1() {
        let (p, q) = (0.3, 0.25);
        let s = ModelSpec::basic(p, q).unwrap();
        let row = q_row(&s, RowVariant::Base, 1).unwrap();
        let alpha = q + p * (1.0 - q);
        assert_eq!(row.entries.len(), 2);
        assert!((row.rate_to(2) - alpha).abs() < 1e-15);
        assert!((row.rate_to(0) - (1.0 - q) * (1.0 - p)).abs() < 1e-15);
        assert!((row.diagonal + alpha + (1.0 - q) * (1.0 - p)).abs() < 1e-15);
    }

    #[test]
    fn state_zero_absorbing() {
        let s = ModelSpec::basic(0.6, 0.1).unwrap();
        assert_eq!(q_row(&s, RowVariant::Base, 0).unwrap(), QRow::zero(0));
        let s = s.with_star_rate(0.5).unwrap();
        assert_eq!(q_row(&s, RowVariant::Base, 0).unwrap().rate_to(1), 0.5);
    }

    #[test]
    fn weighted_row_k1() {
        let s = ModelSpec::basic(0.4, 0.3).unwrap();
        let a = s.alpha();
        let row = q_row(&s, RowVariant::Weighted, 1).unwrap();
        assert_eq!(row.entries.len(), 1);
        assert_eq!(row.entries[0].target, 2);
        assert!((row.entries[0].rate - 2.0 * a).abs() < 1e-15);
        assert!((row.diagonal + 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn weighted_needs_constraint() {
        let th = crate::model::ThinningFamily::perturbed_binomial(0.3, 0.1, 0.5).unwrap();
        let s = ModelSpec::new(th, Rates::DuplicationDivergence { q: Sequence::constant(0.2) }).unwrap();
        assert!(matches!(q_row(&s, RowVariant::Weighted, 3), Err(ModelError::ConstraintViolated { .. })));
        let s = ModelSpec::basic(0.3, 0.2).unwrap();
        assert!(q_row(&s, RowVariant::Weighted, 0).is_err());
    }

    #[test]
    fn rewiring_at_m_range() {
        let s = ModelSpec::basic(0.5, 0.1).unwrap().with_rewiring(0.5, RewiringMode::Independent).unwrap();
        assert!(q_row(&s, RowVariant::RewiringAt(5), 4).is_ok());
        assert!(matches!(
            q_row(&s, RowVariant::RewiringAt(5), 5),
            Err(ModelError::StateOutOfRange { .. })
        ));
        let plain = ModelSpec::basic(0.5, 0.1).unwrap();
        assert!(matches!(q_row(&plain, RowVariant::RewiringLimit, 2), Err(ModelError::MissingVariant(_))));
    }

    #[test]
    fn all_variants_conservative() {
        let mut lim = BTreeMap::new();
        lim.insert(-1, 0.05);
        lim.insert(1, 0.3);
        lim.insert(2, 0.1);
        let s = ModelSpec::basic(0.45, 0.2)
            .unwrap()
            .with_deaths(Sequence::power(0.1, 0.05, 1.0))
            .unwrap()
            .with_multi_births(MultiBirth::new(lim))
            .unwrap()
            .with_rewiring(1.5, RewiringMode::Independent)
            .unwrap();
        let variants = [
            RowVariant::Base,
            RowVariant::Bivariate,
            RowVariant::Weighted,
            RowVariant::Deaths,
            RowVariant::MultiBirth,
            RowVariant::RewiringLimit,
            RowVariant::RewiringAt(300),
        ];
        for v in variants {
            for k in (1..300).step_by(7) {
                let row = q_row(&s, v, k).unwrap();
                let scale = row.exit_rate().max(1.0);
                assert!(row.row_sum().abs() <= 1e-12 * scale, "{v:?} k={k} sum={}", row.row_sum());
                assert!(row.entries.iter().all(|e| e.rate >= 0.0));
            }
        }
    }
}
